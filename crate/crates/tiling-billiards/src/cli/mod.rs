//! The `tbill` command line.
//!
//! Every subcommand takes the same optional flags; each command accepts its
//! own subset and rejects the rest. Parameters can also come from a config
//! file (`--config FILE`) of `key = value` lines:
//!
//! ```text
//! # comments and blank lines are ignored
//! format_version = 1
//! command = deviations
//! params.arcs = 0.15,0.2,0.25,0.4,1.8
//! params.tau = 1.3
//! ```
//!
//! Flags override the file. Exit status is 0 on success, 2 when a
//! mathematical hypothesis fails (or a verification does not hold) and 1 on
//! usage errors.

mod config;
mod reports;

pub use config::{CommandName, ExperimentConfig, CONFIG_FORMAT_VERSION};
pub use reports::{summary_of_report, SimulationSummary, SystemDescriptor, SystemsFile};

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use thiserror::Error;

use crate::deviations::{build_q, deviation_ensemble, deviation_series, estimate_lyapunov_ratios};
use crate::geometry::{build_polygon, render_svg, simulate_with, trajectory_csv, SimulationOptions};
use crate::geometry::initial_state_from_coordinates;
use crate::selfsim::{search_loops, verify_sandwich};
use crate::{rng, Error};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    /// The run finished but a checked property does not hold.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(e) if e.is_hypothesis_failure() => 2,
            CliError::Failed(_) => 2,
            _ => 1,
        }
    }
}

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// What a successful run prints, and its exit status (2 when the run
/// completed but its check failed).
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub summary: String,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(summary: String) -> Self {
        Outcome { summary, exit_code: 0 }
    }
}

#[derive(Parser, Debug)]
#[command(name = "tbill", version, about = "Generalized tiling billiards in cyclic polygons")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Step a trajectory through the tiling; writes trajectory.csv, trajectory.svg, summary.json.
    Simulate(Flags),
    /// Deviation series of one billiard (series.csv, report.json) or, with --samples, of a random ensemble (ensemble.json).
    Deviations(Flags),
    /// Lyapunov spectrum of the Rauzy-Veech cocycle on the reversal class (spectrum.json).
    Lyapunov(Flags),
    /// Self-similar systems from short Rauzy loops (systems.json).
    SelfsimSearch(Flags),
    /// Check the two-sided power bound on a self-similar system (sandwich.json).
    SelfsimVerify(Flags),
    /// Check the reconstruction of the deviation vector from Q at random scales.
    Qcheck(Flags),
    /// Run the command named in a config file.
    Run(Flags),
    /// Print the summary line stored in a JSON report.
    Summary {
        #[arg(long)]
        report: PathBuf,
    },
}

#[derive(Args, Debug, Default, Clone)]
struct Flags {
    /// Config file with `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated arc lengths a_1,...,a_N (a_N the strict maximum).
    #[arg(long)]
    arcs: Option<String>,
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    x0: Option<String>,
    /// Step count, orbit length or number of blocks; accepts forms like 1e6.
    #[arg(long)]
    nmax: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    /// Number of exchanged intervals.
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    maxlen: Option<String>,
    /// A systems.json (use --index to pick an entry) or a single descriptor.
    #[arg(long)]
    system: Option<String>,
    #[arg(long)]
    index: Option<String>,
    /// Longest arc of the verified polygon.
    #[arg(long = "aN")]
    a_n: Option<String>,
    /// Worker threads for ensembles.
    #[arg(long)]
    jobs: Option<String>,
    /// Re-anchor each simulated step on the interval exchange.
    #[arg(long)]
    reanchor: bool,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let fields = [
            ("arcs", &self.arcs),
            ("tau", &self.tau),
            ("x0", &self.x0),
            ("nmax", &self.nmax),
            ("seed", &self.seed),
            ("out", &self.out),
            ("samples", &self.samples),
            ("d", &self.d),
            ("maxlen", &self.maxlen),
            ("system", &self.system),
            ("index", &self.index),
            ("aN", &self.a_n),
            ("jobs", &self.jobs),
        ];
        for (k, v) in fields {
            if let Some(v) = v {
                out.push((k, v.clone()));
            }
        }
        if self.reanchor {
            out.push(("reanchor", "true".to_string()));
        }
        out
    }
}

fn resolve(command: Option<CommandName>, flags: &Flags) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            let cfg = ExperimentConfig::parse(&text)?;
            if let Some(c) = command {
                if cfg.command != c {
                    return Err(usage(format!(
                        "config file is for `{}`, not `{}`",
                        cfg.command.as_str(),
                        c.as_str()
                    )));
                }
            }
            cfg
        }
        None => match command {
            Some(c) => ExperimentConfig::new(c),
            None => return Err(usage("`run` needs --config FILE")),
        },
    };
    for (k, v) in flags.pairs() {
        cfg.params.insert(k.to_string(), v);
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status. The summary line goes to `stdout`, diagnostics to `stderr`.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    1
                }
            };
        }
    };
    let result = match cli.command {
        Sub::Summary { report } => summary_file(&report).map(Outcome::ok),
        Sub::Run(f) => resolve(None, &f).and_then(|c| run(&c)),
        Sub::Simulate(f) => resolve(Some(CommandName::Simulate), &f).and_then(|c| run(&c)),
        Sub::Deviations(f) => resolve(Some(CommandName::Deviations), &f).and_then(|c| run(&c)),
        Sub::Lyapunov(f) => resolve(Some(CommandName::Lyapunov), &f).and_then(|c| run(&c)),
        Sub::SelfsimSearch(f) => resolve(Some(CommandName::SelfsimSearch), &f).and_then(|c| run(&c)),
        Sub::SelfsimVerify(f) => resolve(Some(CommandName::SelfsimVerify), &f).and_then(|c| run(&c)),
        Sub::Qcheck(f) => resolve(Some(CommandName::Qcheck), &f).and_then(|c| run(&c)),
    };
    match result {
        Ok(o) => {
            let _ = writeln!(stdout, "{}", o.summary);
            if o.exit_code != 0 {
                let _ = writeln!(stderr, "tbill: check failed");
            }
            o.exit_code
        }
        Err(e) => {
            let _ = writeln!(stderr, "tbill: {e}");
            if let CliError::Usage(_) = e {
                let _ = writeln!(stderr, "run `tbill help` for the list of flags");
            }
            e.exit_code()
        }
    }
}

fn summary_file(path: &Path) -> Result<String, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    summary_of_report(&text)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| CliError::Io { path, source })
}

fn out_dir(cfg: &ExperimentConfig) -> Result<PathBuf, CliError> {
    let dir = PathBuf::from(cfg.params.get("out").map(String::as_str).unwrap_or("tbill-out"));
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
    Ok(dir)
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

/// Runs a validated config.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    match cfg.command {
        CommandName::Simulate => run_simulate(cfg),
        CommandName::Deviations => run_deviations(cfg),
        CommandName::Lyapunov => run_lyapunov(cfg),
        CommandName::SelfsimSearch => run_search(cfg),
        CommandName::SelfsimVerify => run_verify(cfg),
        CommandName::Qcheck => run_qcheck(cfg),
    }
}

fn run_simulate(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let arcs = cfg.arcs("arcs")?;
    let tau = cfg.real("tau")?;
    let x0 = cfg.real("x0")?;
    let n = cfg.count_or("nmax", 200)?;
    let reanchor = cfg.flag("reanchor")?;
    let polygon = build_polygon(&arcs)?;
    let start = initial_state_from_coordinates(&polygon, x0, tau)?;
    let traj = simulate_with(&polygon, start, n as usize, SimulationOptions { reanchor })?;
    let dir = out_dir(cfg)?;
    let summary = SimulationSummary::new(&polygon, x0, tau, n, reanchor, &traj);
    write_file(&dir, "trajectory.csv", &trajectory_csv(&traj))?;
    write_file(&dir, "trajectory.svg", &render_svg(&traj, &polygon))?;
    write_file(&dir, "summary.json", &to_json(&summary))?;
    Ok(Outcome::ok(summary.summary_line()))
}

fn run_deviations(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let n_max = cfg.count_or("nmax", 1_000_000)?;
    if cfg.params.contains_key("samples") {
        for k in ["arcs", "tau", "x0"] {
            if cfg.params.contains_key(k) {
                return Err(usage(format!("--{k} cannot be combined with --samples (ensemble members are random)")));
            }
        }
        let count = cfg.count("samples")?;
        let d = cfg.count_or("d", 4)? as usize;
        if d < 4 {
            return Err(usage("--d must be at least 4 (a pentagon has four short arcs)"));
        }
        let seed = cfg.count_or("seed", 0)?;
        let jobs = cfg.count_or("jobs", 0)? as usize;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| usage(format!("--jobs: {e}")))?;
        let report = pool.install(|| deviation_ensemble(d + 1, count, n_max, seed))?;
        let dir = out_dir(cfg)?;
        write_file(&dir, "ensemble.json", &to_json(&report))?;
        return Ok(Outcome::ok(report.summary_line()));
    }
    for k in ["d", "jobs"] {
        if cfg.params.contains_key(k) {
            return Err(usage(format!("--{k} only applies together with --samples")));
        }
    }
    let arcs = cfg.arcs("arcs")?;
    let tau = cfg.real("tau")?;
    let x0 = cfg.real("x0")?;
    let seed = cfg.params.contains_key("seed").then(|| cfg.count("seed")).transpose()?;
    let polygon = build_polygon(&arcs)?;
    let mut report = deviation_series(&polygon, x0, tau, n_max)?;
    report.params.seed = seed;
    let dir = out_dir(cfg)?;
    write_file(&dir, "series.csv", &report.csv())?;
    write_file(&dir, "report.json", &to_json(&report))?;
    Ok(Outcome::ok(report.summary_line()))
}

fn run_lyapunov(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let d = cfg.count_or("d", 4)? as usize;
    let n = cfg.count_or("nmax", 100_000)?;
    let seed = cfg.count_or("seed", 0)?;
    let spec = estimate_lyapunov_ratios(d, n, seed)?;
    let dir = out_dir(cfg)?;
    write_file(&dir, "spectrum.json", &to_json(&spec))?;
    Ok(Outcome::ok(spec.summary_line()))
}

fn run_search(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let d = cfg.count_or("d", 4)? as usize;
    let maxlen = cfg.count_or("maxlen", 12)? as usize;
    if maxlen > 12 {
        return Err(usage("--maxlen is at most 12"));
    }
    let systems = search_loops(d, maxlen)?;
    let file = SystemsFile::new(d, maxlen, &systems);
    let dir = out_dir(cfg)?;
    write_file(&dir, "systems.json", &to_json(&file))?;
    Ok(Outcome::ok(file.summary_line()))
}

fn run_verify(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let path = PathBuf::from(cfg.text("system")?);
    let index = cfg.count_or("index", 0)? as usize;
    let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
    let desc = SystemDescriptor::from_json(&text, index)?;
    let sys = desc.rebuild()?;
    let a_n = cfg.real("aN")?;
    let tau = match cfg.params.get("tau") {
        Some(_) => cfg.real("tau")?,
        None => 0.5 * (1.0 + a_n),
    };
    let x0 = match cfg.params.get("x0") {
        Some(_) => cfg.real("x0")?,
        None => 0.5,
    };
    let n_max = cfg.count_or("nmax", 1_000_000)?;
    let report = verify_sandwich(&sys, a_n, tau, x0, n_max)?;
    let dir = out_dir(cfg)?;
    write_file(&dir, "sandwich.json", &to_json(&report))?;
    let exit_code = if report.passed() { 0 } else { 2 };
    Ok(Outcome { summary: report.summary_line(), exit_code })
}

/// Largest gap between `Q Theta(s)` and `|s m|^2 H` over `samples` scales
/// `s` drawn uniformly in `(0, pi)`; scales where the mean vanishes are
/// skipped and counted.
pub fn qcheck(arcs: &[f64], samples: u64, seed: u64) -> Result<(usize, f64, u64), Error> {
    let polygon = build_polygon(arcs)?;
    let q = build_q(&polygon);
    let mut rng = rng::seeded(seed);
    let mut worst = 0.0f64;
    let mut skipped = 0;
    for _ in 0..samples {
        let s = std::f64::consts::PI * (1.0 - rng.gen::<f64>());
        match q.reconstruction_error(s) {
            Some(e) => worst = worst.max(e),
            None => skipped += 1,
        }
    }
    Ok((q.rank, worst, skipped))
}

fn run_qcheck(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let arcs = cfg.arcs("arcs")?;
    let samples = cfg.count_or("samples", 100)?;
    let seed = cfg.count_or("seed", 0)?;
    let (rank, err, skipped) = qcheck(&arcs, samples, seed)?;
    let summary = format!("rank={rank} max_error={err:.3e} samples={samples} skipped={skipped}");
    Ok(Outcome { summary, exit_code: if err < 1e-9 { 0 } else { 2 } })
}
