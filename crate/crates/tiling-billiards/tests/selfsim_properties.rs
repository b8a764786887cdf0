use nalgebra::DVector;
use rand::Rng;
use tiling_billiards::rng::seeded;
use tiling_billiards::selfsim::{prefix_decompose, search_loops, verify_sandwich, SelfSimilarSystem};

fn systems() -> Vec<SelfSimilarSystem> {
    search_loops(4, 10).unwrap()
}

#[test]
fn eigen_data_and_constants() {
    let all = systems();
    assert!(!all.is_empty());
    for sys in &all {
        let m = sys.rauzy_loop.matrix.to_f64();
        let v = DVector::from_vec(sys.v.clone());
        let w2 = DVector::from_vec(sys.w2.clone());
        assert!((&m * &v - &v * sys.lambda1).amax() < 1e-10, "{}", sys.summary_line());
        assert!((m.transpose() * &w2 - &w2 * sys.lambda2).amax() < 1e-8, "{}", sys.summary_line());
        assert!(sys.self_similarity_residual < 1e-10);
        assert!(sys.lambda2.abs() > 1.0 && sys.lambda2.abs() < sys.lambda1);
        assert!((sys.rho - sys.lambda2.abs().ln() / sys.lambda1.ln()).abs() < 1e-15);

        let g = &sys.constants;
        let l1 = sys.lambda1;
        let c = g.a.max((2 * sys.k - 2) as f64 * g.b * l1 / (l1 - 1.0));
        assert_eq!(g.c, c);
        assert!((sys.kappa - c.ln() / l1.ln()).abs() < 1e-12);
        // A and B bracket every image length seen
        for (k, lens) in sys.image_lengths(20).iter().enumerate() {
            let scale = l1.powi(k as i32);
            for &len in lens {
                assert!(g.a * scale < len as f64 && (len as f64) < g.b * scale, "level {k}");
            }
        }
    }
}

#[test]
fn decomposition_round_trip() {
    let sys = systems().remove(0);
    let t = sys.iet();
    let mut rng = seeded(1234);
    for _ in 0..1000 {
        let x: f64 = rng.gen();
        let n = 10f64.powf(rng.gen_range(0.0..5.0)).round() as usize;
        let dec = prefix_decompose(&sys, x, n).unwrap();
        let Ok(coding) = t.symbolic_coding(x, n) else { continue };
        assert_eq!(dec.expand(&sys), coding, "x = {x}, n = {n}");
        assert!(!dec.m_word.is_empty() && dec.m_word.len() <= 2 * sys.k - 2);
        let predicted = (n as f64).ln() / sys.lambda1.ln();
        assert!((dec.l as f64 - predicted).abs() <= sys.kappa, "n = {n}: l = {}", dec.l);
    }
}

#[test]
fn remainder_lies_in_the_contracted_part() {
    let sys = systems().remove(0);
    let r = verify_sandwich(&sys, 1.3, 1.15, 0.5, 1000).unwrap();
    let norms = sys.transposed_orbit_norms(&r.u, 12);
    let l2 = sys.lambda2.abs();
    let scaled: Vec<f64> = norms.iter().enumerate().map(|(l, x)| x / l2.powi(l as i32)).collect();
    let peak = scaled.iter().cloned().fold(0.0, f64::max);
    // beyond about 15 levels rounding along W1 takes over, growing like
    // (lambda1 / |lambda2|)^l; the sandwich never looks that deep
    assert!(scaled[12] < 1e-6 * peak, "{scaled:?}");
}

#[test]
fn both_bounds_hold_on_the_first_loop() {
    let sys = systems().remove(0);
    for a_n in [1.02, 1.5, 3.0] {
        let r = verify_sandwich(&sys, a_n, 0.5 * (1.0 + a_n), 0.5, 200_000).unwrap();
        assert!(r.upper_holds, "a_N = {a_n}: {} > {}", r.upper_max_ratio, r.c1_bound);
        assert!(r.lower_holds, "a_N = {a_n}: {:?}", r.certified);
        assert!(r.certified.iter().any(|c| c == "c2_rigorous"));
    }
}
