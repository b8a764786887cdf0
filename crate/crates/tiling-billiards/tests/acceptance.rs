//! Acceptance checks, one PASS/FAIL line each. Tolerances are fixed here;
//! a red line stays red.

use std::time::Instant;

use nalgebra::Matrix3;
use num_complex::Complex64;
use rand::Rng;
use tiling_billiards::cli::{run, CommandName, ExperimentConfig};
use tiling_billiards::deviations::{
    build_q, deviation_ensemble, deviation_vector, displacement_vectors, estimate_lyapunov_ratios, ArcSum,
    QDecomposition,
};
use tiling_billiards::geometry::{build_polygon, chord_parameter, random_billiard, simulate_from_coordinates};
use tiling_billiards::iet::{rokhlin_towers, BilliardMap, Iet, StepKind};
use tiling_billiards::linalg::IntMatrix;
use tiling_billiards::rng::{seeded, uniform_simplex};
use tiling_billiards::selfsim::{prefix_decompose, search_loops, verify_sandwich};
use tiling_billiards::Error;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

// ---------------------------------------------------------------- 1 and 2

struct ConjugacyStats {
    worst_x: f64,
    worst_tau: f64,
    runs: usize,
    corner_redraws: usize,
}

fn conjugacy_ensemble() -> ConjugacyStats {
    let mut rng = seeded(101);
    let mut stats = ConjugacyStats { worst_x: 0.0, worst_tau: 0.0, runs: 0, corner_redraws: 0 };
    for n in [5, 6, 7] {
        let mut done = 0;
        while done < 100 {
            let b = random_billiard(&mut rng, n).unwrap();
            let traj = simulate_from_coordinates(&b.polygon, b.x0, b.tau, 10_000).unwrap();
            if traj.terminated_at_corner.is_some() {
                stats.corner_redraws += 1;
                continue;
            }
            let map = BilliardMap::new(&b.polygon, b.tau).unwrap();
            let mut x = b.x0;
            for s in &traj.states {
                stats.worst_x = stats.worst_x.max((s.x - x).abs());
                stats.worst_tau = stats.worst_tau.max((chord_parameter(s, &b.polygon) - b.tau).abs());
                x = map.phi(x).unwrap();
            }
            done += 1;
            stats.runs += 1;
        }
    }
    stats
}

// ---------------------------------------------------------------- 3

fn orthogonality_and_reconstruction() -> Outcome {
    let mut rng = seeded(303);
    let (mut worst_dot, mut worst_rec) = (0.0f64, 0.0f64);
    for i in 0..10_000 {
        let b = random_billiard(&mut rng, 5 + i % 3).unwrap();
        let p = &b.polygon;
        let data = displacement_vectors(p, b.x0);
        let dv = deviation_vector(&data).unwrap();
        let dot: Complex64 = dv.g.iter().zip(p.short_arcs()).map(|(g, a)| g * a).sum();
        worst_dot = worst_dot.max(dot.norm());
        let rec = build_q(p).reconstruction_error(1.0 / p.radius()).unwrap();
        worst_rec = worst_rec.max(rec);
    }
    outcome(
        worst_dot < 1e-12 && worst_rec < 1e-9,
        format!("10^4 draws N in 5..7: max |V.G| = {worst_dot:.2e} (< 1e-12), max |Q Theta - |m|^2 H| = {worst_rec:.2e} (< 1e-9)"),
    )
}

// ---------------------------------------------------------------- 4

/// Closed form of the N = 5 matrix `ᵗQ`, rows by basis element.
fn closed_form_transpose(a: &[f64]) -> Vec<(ArcSum, [f64; 4])> {
    let (a1, a2, a3, a4) = (a[0], a[1], a[2], a[3]);
    let s = |first, last| ArcSum { first, last };
    vec![
        (s(1, 1), [a2 + a3 + a4, -a1 + a3 + a4, -(a1 + a2), -(a1 + a2)]),
        (s(2, 2), [a2 + a3, -a1 + a3, -(a1 + a2), 0.0]),
        (s(3, 3), [0.0, a3 + a4, -a2 + a4, -(a2 + a3)]),
        (s(4, 4), [a3 + a4, a3 + a4, -(a1 + a2) + a4, -(a1 + a2 + a3)]),
        (s(1, 2), [0.0, a4, a4, -(a2 + a3)]),
        (s(2, 3), [a3 + a4, a3 + a4, -(a1 + a2), -(a1 + a2)]),
        (s(3, 4), [a2 + a3, -a1, -a1, 0.0]),
        (s(1, 3), [0.0, -(a3 + a4), a2, a2]),
        (s(2, 4), [-a3, -a3, a1 + a2, 0.0]),
        (s(1, 4), [-(a2 + a3 + a4), a1 - a4, a1 - a4, a1 + a2 + a3]),
    ]
}

fn row_of(q: &QDecomposition, b: ArcSum) -> Vec<f64> {
    let i = q.basis.iter().position(|&x| x == b).expect("basis element present");
    q.transposed()[i].clone()
}

fn closed_form_matrix() -> Outcome {
    let mut rng = seeded(404);
    let (mut worst, mut worst_minor) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let arcs = uniform_simplex(&mut rng, 4);
        let q = tiling_billiards::deviations::build_q(&build_polygon(&[&arcs[..], &[1.5]].concat()).unwrap());
        let a = &q.arcs;
        for (b, want) in closed_form_transpose(a) {
            for (x, y) in row_of(&q, b).iter().zip(want) {
                worst = worst.max((x - y).abs());
            }
        }
        // rows 4, 5, 8 of the transpose, first three columns
        let rows: Vec<Vec<f64>> = [ArcSum { first: 4, last: 4 }, ArcSum { first: 1, last: 2 }, ArcSum { first: 1, last: 3 }]
            .iter()
            .map(|&b| row_of(&q, b))
            .collect();
        let det = Matrix3::from_fn(|i, j| rows[i][j]).determinant();
        let want = (a[2] + a[3]) * a[3] * (a[1] + a[2] + a[3]);
        worst_minor = worst_minor.max((det - want).abs() / want);
    }
    outcome(
        worst < 1e-12 && worst_minor < 1e-12,
        format!("20 arc vectors: max entry error {worst:.2e} (< 1e-12), minor relative error {worst_minor:.2e}"),
    )
}

// ---------------------------------------------------------------- 5

fn rank_laws() -> Outcome {
    let mut rng = seeded(505);
    let mut bad = Vec::new();
    let mut worst_identity = 0.0f64;
    let mut ranks = Vec::new();
    for n in 5..=9 {
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..50 {
            let b = random_billiard(&mut rng, n).unwrap();
            let q = build_q(&b.polygon);
            seen.insert(q.rank);
            let ok = match n {
                5 => q.rank == 3,
                7 | 9 => q.rank == n - 2,
                _ => q.rank == n - 3 || q.rank == n - 2,
            };
            if !ok {
                bad.push((n, q.rank));
            }
            if n % 2 == 1 {
                let (det, pred) = (q.odd_minor_determinant(), q.odd_minor_prediction());
                worst_identity = worst_identity.max((det - pred).abs() / pred.abs());
            }
        }
        ranks.push(format!("N={n}:{seen:?}"));
    }
    outcome(
        bad.is_empty() && worst_identity < 1e-9,
        format!("ranks {}; odd-N minor identity rel. error {worst_identity:.2e} (< 1e-9){}", ranks.join(" "), if bad.is_empty() { String::new() } else { format!("; violations {bad:?}") }),
    )
}

// ---------------------------------------------------------------- 6

fn generic_rate() -> Outcome {
    let r = deviation_ensemble(5, 50, 10_000_000, 6006).unwrap();
    let finite: Vec<f64> = r.members.iter().map(|m| m.fitted_exponent).filter(|e| e.is_finite()).collect();
    let all_sublinear = finite.len() == r.members.len() && finite.iter().all(|&e| e < 0.95);
    let median_ok = (0.23..=0.43).contains(&r.median_exponent);
    outcome(
        all_sublinear && median_ok,
        format!(
            "50 pentagons at n_max = 1e7: max exponent {:.3} (< 0.95: {}), median {:.3} (in [0.23, 0.43]: {}), degenerate {}",
            r.max_exponent,
            all_sublinear,
            r.median_exponent,
            median_ok,
            r.members.iter().filter(|m| m.degenerate).count()
        ),
    )
}

// ---------------------------------------------------------------- 7

fn lyapunov_oracle() -> Outcome {
    let s = estimate_lyapunov_ratios(4, 100_000, 7).unwrap();
    let (t, w) = (&s.theta_hat, &s.half_widths);
    let ratio_ok = (s.ratios[0] - 1.0 / 3.0).abs() <= 0.05;
    let ordered = t[0] - t[1] > 3.0 * (w[0] + w[1]) && t[1] - t[2] > 3.0 * (w[1] + w[2]) && t[2] > 3.0 * w[2];
    let six = estimate_lyapunov_ratios(6, 100_000, 7).unwrap();
    outcome(
        ratio_ok && ordered,
        format!(
            "d=4, 1e5 blocks: theta2/theta1 = {:.4} +- {:.4} (1/3 +- 0.05: {ratio_ok}); theta = ({:.4}, {:.4}, {:.4}), strictly positive and separated: {ordered}; [d=6 for reference: ratios {:.4}, {:.4}]",
            s.ratios[0], s.ratio_half_widths[0], t[0], t[1], t[2], six.ratios[0], six.ratios[1]
        ),
    )
}

// ---------------------------------------------------------------- 8

fn induction_oracles() -> Outcome {
    let mut rng = seeded(808);
    let mut worst = 0.0f64;
    let mut points = 0;
    let mut count_mismatch = 0;
    let mut iets = 0;
    while iets < 50 {
        let t = Iet::reversal(uniform_simplex(&mut rng, 4 + iets % 3)).unwrap();
        let l = 1 + iets % 20;
        let Ok(towers) = rokhlin_towers(&t, l) else { continue };
        iets += 1;
        let end = towers.induced.total();
        let mut k = 0;
        while k < 1000 {
            let x = rng.gen::<f64>() * end;
            let Ok((img, label)) = towers.induced.eval_labelled(x) else { continue };
            let mut y = x;
            let mut visits = vec![0i64; t.d()];
            while let Ok((z, b)) = t.eval_labelled(y) {
                visits[b] += 1;
                y = z;
                if y < end {
                    break;
                }
            }
            worst = worst.max((y - img).abs());
            if (0..t.d()).any(|i| visits[i] != towers.visit_counts.get(i, label)) {
                count_mismatch += 1;
            }
            k += 1;
            points += 1;
        }
    }
    // visit counts up to order 20 on one exchange
    let t = Iet::reversal(uniform_simplex(&mut rng, 5)).unwrap();
    for l in 0..=20 {
        let towers = rokhlin_towers(&t, l).unwrap();
        let end = towers.induced.total();
        for j in 0..5 {
            let x = towers.induced.top_start(j) + 0.5 * towers.induced.lengths()[j];
            let word = t.symbolic_coding(x, towers.heights[j] as usize).unwrap();
            for i in 0..5 {
                if word.iter().filter(|&&b| b == i).count() as i64 != towers.visit_counts.get(i, j) {
                    count_mismatch += 1;
                }
            }
            if t.orbit(x, towers.heights[j] as usize).unwrap()[1..].iter().position(|&y| y < end)
                != Some(towers.heights[j] as usize - 1)
            {
                count_mismatch += 1;
            }
        }
    }
    // the five-step reference loop TTBBT
    use StepKind::{Bottom as B, Top as T};
    let fixture = loop {
        let t = Iet::reversal(uniform_simplex(&mut rng, 4)).unwrap();
        if let Ok(tw) = rokhlin_towers(&t, 5) {
            if tw.steps == [T, T, B, B, T] {
                break tw;
            }
        }
    };
    let want = IntMatrix::from_rows(&[vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 3, 2], vec![1, 1, 1, 1]]).unwrap();
    let images: Vec<Vec<usize>> = (0..4).map(|a| fixture.substitution.image(a).to_vec()).collect();
    let fixture_ok = fixture.visit_counts == want && images == [vec![0, 3], vec![1, 3], vec![2, 2, 2, 3], vec![2, 2, 3]];
    outcome(
        worst < 1e-10 && count_mismatch == 0 && fixture_ok,
        format!("{points} points on 50 exchanges: max first-return error {worst:.2e} (< 1e-10); visit-count mismatches {count_mismatch}; substitution fixture reproduced: {fixture_ok}"),
    )
}

// ---------------------------------------------------------------- 9

fn prefix_decomposition() -> Outcome {
    let sys = search_loops(4, 12).unwrap().remove(0);
    let t = sys.iet();
    let mut rng = seeded(909);
    let (mut mismatches, mut bound_fail, mut worst_l) = (0, 0, 0.0f64);
    let mut k = 0;
    while k < 1000 {
        let x: f64 = rng.gen();
        let n = 10f64.powf(rng.gen_range(0.0..6.0)).round() as usize;
        let Ok(coding) = t.symbolic_coding(x, n) else { continue };
        k += 1;
        let dec = prefix_decompose(&sys, x, n).unwrap();
        if dec.expand(&sys) != coding {
            mismatches += 1;
        }
        let short = dec.s_words.iter().chain(&dec.p_words).all(|w| w.len() < sys.k);
        if !short || dec.m_word.is_empty() || dec.m_word.len() > 2 * sys.k - 2 {
            bound_fail += 1;
        }
        worst_l = worst_l.max((dec.l as f64 - (n as f64).ln() / sys.lambda1.ln()).abs());
    }
    outcome(
        mismatches == 0 && bound_fail == 0 && worst_l <= sys.kappa,
        format!(
            "loop {} (K = {}): 1000 prefixes, round-trip mismatches {mismatches}, word-length violations {bound_fail}, max |l - log n / log lambda1| = {worst_l:.3} <= kappa = {:.3}",
            sys.rauzy_loop.steps_string(),
            sys.k,
            sys.kappa
        ),
    )
}

// ---------------------------------------------------------------- 10

fn sandwich() -> Outcome {
    let systems = search_loops(4, 12).unwrap();
    let a_n = 1.02;
    let (tau, x0) = (0.5 * (1.0 + a_n), 0.5);
    let mut tried = 0;
    let mut skipped_e3 = 0;
    for sys in &systems {
        tried += 1;
        let r = match verify_sandwich(sys, a_n, tau, x0, 1_000_000) {
            Ok(r) => r,
            Err(Error::HInE3 { .. }) => {
                skipped_e3 += 1;
                continue;
            }
            Err(_) => continue,
        };
        if r.passed() {
            return outcome(
                true,
                format!(
                    "system #{} of {} ({}), a_N = {a_n}: |alpha| = {:.3e}; upper |S_n h| / n^rho <= {:.3} < C1 = {:.3}; lower min ratio {:.3e} >= C2 = {:.3e} for l >= {}; slope {:.3} vs rho {:.3}",
                    tried,
                    systems.len(),
                    sys.rauzy_loop.steps_string(),
                    r.alpha.abs(),
                    r.upper_max_ratio,
                    r.c1_bound,
                    r.lower_min_ratio,
                    r.c2_quarter,
                    r.l0,
                    r.envelope_exponent,
                    r.rho
                ),
            );
        }
    }
    outcome(false, format!("no system passed among {tried} ({skipped_e3} with h in E3)"))
}

// ---------------------------------------------------------------- 11

fn determinism() -> Outcome {
    let configs = vec![
        ExperimentConfig::new(CommandName::Simulate).with("arcs", "0.15,0.2,0.25,0.4,1.8").with("tau", 1.3).with("x0", 0.0731).with("nmax", 500),
        ExperimentConfig::new(CommandName::Deviations).with("arcs", "0.15,0.2,0.25,0.4,1.8").with("tau", 1.3).with("x0", 0.05).with("nmax", "1e5").with("seed", 7),
        ExperimentConfig::new(CommandName::Deviations).with("samples", 8).with("nmax", "1e5").with("seed", 11),
        ExperimentConfig::new(CommandName::Lyapunov).with("d", 5).with("nmax", "2e4").with("seed", 3),
        ExperimentConfig::new(CommandName::SelfsimSearch).with("d", 4).with("maxlen", 10),
    ];
    let mut compared = 0;
    let mut differing = Vec::new();
    for cfg in configs {
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        let mut snapshots = Vec::new();
        for d in &dirs {
            let c = cfg.clone().with("out", d.path().display());
            run(&c).unwrap();
            let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(d.path())
                .unwrap()
                .map(|e| {
                    let e = e.unwrap();
                    (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
                })
                .collect();
            files.sort();
            snapshots.push(files);
        }
        compared += snapshots[0].len();
        if snapshots[0] != snapshots[1] {
            differing.push(cfg.command.as_str());
        }
    }
    outcome(
        differing.is_empty() && compared > 0,
        format!("{compared} CSV/JSON/SVG files byte-identical across repeated runs{}", if differing.is_empty() { String::new() } else { format!("; differing: {differing:?}") }),
    )
}

fn main() {
    let mut failures = 0;
    let mut report = |id: u32, name: &str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        println!("{} [{id:>2}] {name}: {} ({secs:.1}s)", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failures += 1;
        }
    };

    let start = Instant::now();
    let conj = conjugacy_ensemble();
    let conj_secs = start.elapsed().as_secs_f64();
    report(1, "conjugacy", &|| {
        outcome(
            conj.worst_x < 1e-9 && conj_secs < 60.0,
            format!(
                "{} trajectories (N = 5, 6, 7) x 10^4 steps: max |x_geom - Phi^i(x0)| = {:.2e} (< 1e-9), {conj_secs:.1}s (< 60s), corner redraws {}",
                conj.runs, conj.worst_x, conj.corner_redraws
            ),
        )
    });
    report(2, "tau invariance", &|| {
        outcome(conj.worst_tau < 1e-9, format!("same ensemble: max |tau_i - tau_0| = {:.2e} (< 1e-9)", conj.worst_tau))
    });
    report(3, "orthogonality and reconstruction", &orthogonality_and_reconstruction);
    report(4, "closed-form matrix fixture", &closed_form_matrix);
    report(5, "rank laws", &rank_laws);
    report(6, "generic deviation rate", &generic_rate);
    report(7, "Lyapunov ratio oracle", &lyapunov_oracle);
    report(8, "induction oracles", &induction_oracles);
    report(9, "prefix decomposition", &prefix_decomposition);
    report(10, "self-similar sandwich", &sandwich);
    report(11, "determinism", &determinism);

    println!("{} of 11 criteria pass", 11 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
