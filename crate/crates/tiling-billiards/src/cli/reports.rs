use serde::{Deserialize, Serialize};

use super::{usage, CliError};
use crate::deviations::{DeviationReport, EnsembleReport, EstimatedSpectrum};
use crate::geometry::{chord_parameter, CyclicPolygon, Trajectory};
use crate::iet::{Permutation, StepKind};
use crate::linalg::IntMatrix;
use crate::selfsim::{build_selfsim, loop_matrix, GrowthConstants, SandwichReport, SelfSimilarSystem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub format_version: u32,
    pub arcs: Vec<f64>,
    pub tau: f64,
    pub x0: f64,
    pub requested_steps: u64,
    pub reanchor: bool,
    pub steps: usize,
    pub terminated_at_corner: Option<usize>,
    /// Largest change of the chord parameter measured from the geometry.
    pub max_tau_drift: f64,
    pub final_x: f64,
    pub final_position: [f64; 2],
}

impl SimulationSummary {
    pub fn new(polygon: &CyclicPolygon, x0: f64, tau: f64, requested: u64, reanchor: bool, traj: &Trajectory) -> Self {
        let max_tau_drift =
            traj.states.iter().map(|s| (chord_parameter(s, polygon) - tau).abs()).fold(0.0, f64::max);
        let last = traj.states.last().expect("trajectory has its start state");
        SimulationSummary {
            format_version: 1,
            arcs: polygon.arcs().to_vec(),
            tau,
            x0,
            requested_steps: requested,
            reanchor,
            steps: traj.n_steps(),
            terminated_at_corner: traj.terminated_at_corner,
            max_tau_drift,
            final_x: last.x,
            final_position: [last.position.re, last.position.im],
        }
    }

    pub fn summary_line(&self) -> String {
        let corner = self.terminated_at_corner.map_or("none".to_string(), |i| i.to_string());
        format!(
            "steps={} corner={} max_tau_drift={:.3e} final_x={:.9}",
            self.steps, corner, self.max_tau_drift, self.final_x
        )
    }
}

/// Portable description of a self-similar system; the loop alone
/// determines it, the rest is there for readers of the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDescriptor {
    pub base_perm: Permutation,
    /// Step kinds as letters, `t` for top and `b` for bottom.
    pub steps: String,
    #[serde(rename = "M")]
    pub m: IntMatrix,
    pub lambda1: f64,
    pub lambda2: f64,
    #[serde(rename = "V")]
    pub v: Vec<f64>,
    pub rho: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub kappa: f64,
    pub constants: GrowthConstants,
}

impl SystemDescriptor {
    pub fn from_system(sys: &SelfSimilarSystem) -> Self {
        SystemDescriptor {
            base_perm: sys.rauzy_loop.base_perm.clone(),
            steps: sys.rauzy_loop.steps_string(),
            m: sys.rauzy_loop.matrix.clone(),
            lambda1: sys.lambda1,
            lambda2: sys.lambda2,
            v: sys.v.clone(),
            rho: sys.rho,
            k: sys.k,
            kappa: sys.kappa,
            constants: sys.constants.clone(),
        }
    }

    /// Reads either a single descriptor or entry `index` of a systems file.
    pub fn from_json(text: &str, index: usize) -> Result<Self, CliError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| usage(format!("--system: not JSON ({e})")))?;
        if value.get("systems").is_some() {
            let file: SystemsFile =
                serde_json::from_value(value).map_err(|e| usage(format!("--system: bad systems file ({e})")))?;
            let n = file.systems.len();
            file.systems
                .into_iter()
                .nth(index)
                .ok_or_else(|| usage(format!("--index {index} out of range ({n} systems)")))
        } else {
            serde_json::from_value(value).map_err(|e| usage(format!("--system: bad descriptor ({e})")))
        }
    }

    /// Recomputes the system from its loop and checks it against the file.
    pub fn rebuild(&self) -> Result<SelfSimilarSystem, CliError> {
        let steps = self
            .steps
            .chars()
            .map(|c| match c {
                't' => Ok(StepKind::Top),
                'b' => Ok(StepKind::Bottom),
                _ => Err(usage(format!("--system: step letter `{c}` is not t or b"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let lp = loop_matrix(&self.base_perm, &steps)?;
        if lp.matrix != self.m {
            return Err(usage("--system: M does not match the loop"));
        }
        let sys = build_selfsim(&lp)?;
        if (sys.lambda1 - self.lambda1).abs() > 1e-9 * sys.lambda1 {
            return Err(usage("--system: lambda1 does not match the loop"));
        }
        Ok(sys)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemsFile {
    pub format_version: u32,
    pub d: usize,
    pub maxlen: usize,
    pub systems: Vec<SystemDescriptor>,
}

impl SystemsFile {
    pub fn new(d: usize, maxlen: usize, systems: &[SelfSimilarSystem]) -> Self {
        SystemsFile { format_version: 1, d, maxlen, systems: systems.iter().map(SystemDescriptor::from_system).collect() }
    }

    pub fn summary_line(&self) -> String {
        match self.systems.first() {
            Some(s) => format!(
                "systems={} d={} maxlen={} first={} lambda1={:.6} lambda2={:.6} rho={:.6} kappa={:.4}",
                self.systems.len(),
                self.d,
                self.maxlen,
                s.steps,
                s.lambda1,
                s.lambda2,
                s.rho,
                s.kappa
            ),
            None => format!("systems=0 d={} maxlen={}", self.d, self.maxlen),
        }
    }
}

fn parse<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> Result<T, CliError> {
    serde_json::from_value(v).map_err(|e| usage(format!("report: {e}")))
}

/// The summary line a command printed when it wrote `text`.
pub fn summary_of_report(text: &str) -> Result<String, CliError> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| usage(format!("report is not JSON ({e})")))?;
    let has = |k: &str| v.get(k).is_some();
    Ok(if has("systems") {
        parse::<SystemsFile>(v)?.summary_line()
    } else if has("lower_points") {
        parse::<SandwichReport>(v)?.summary_line()
    } else if has("dev_abs") {
        parse::<DeviationReport>(v)?.summary_line()
    } else if has("members") {
        parse::<EnsembleReport>(v)?.summary_line()
    } else if has("theta_hat") {
        parse::<EstimatedSpectrum>(v)?.summary_line()
    } else if has("terminated_at_corner") {
        parse::<SimulationSummary>(v)?.summary_line()
    } else {
        return Err(usage("unrecognized report"));
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_polygon, simulate_from_coordinates};
    use crate::selfsim::search_loops;

    #[test]
    fn simulation_summary_round_trip() {
        let p = build_polygon(&[0.15, 0.2, 0.25, 0.4, 1.8]).unwrap();
        let traj = simulate_from_coordinates(&p, 0.0731, 1.3, 50).unwrap();
        let s = SimulationSummary::new(&p, 0.0731, 1.3, 50, false, &traj);
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(summary_of_report(&text).unwrap(), s.summary_line());
    }

    #[test]
    fn descriptor_rebuilds_its_system() {
        let systems = search_loops(4, 9).unwrap();
        let file = SystemsFile::new(4, 9, &systems);
        let text = serde_json::to_string(&file).unwrap();
        assert_eq!(summary_of_report(&text).unwrap(), file.summary_line());
        let desc = SystemDescriptor::from_json(&text, 1).unwrap();
        assert_eq!(desc.rebuild().unwrap(), systems[1]);
        let single = serde_json::to_string(&file.systems[0]).unwrap();
        assert_eq!(SystemDescriptor::from_json(&single, 0).unwrap(), file.systems[0]);
        assert!(SystemDescriptor::from_json(&text, 10_000).is_err());
    }

    #[test]
    fn tampered_descriptor_rejected() {
        let sys = search_loops(4, 8).unwrap().remove(0);
        let mut d = SystemDescriptor::from_system(&sys);
        d.steps.push('x');
        assert!(d.rebuild().is_err());
        let mut d = SystemDescriptor::from_system(&sys);
        d.lambda1 += 0.1;
        assert!(d.rebuild().is_err());
    }
}
