//! Values computed independently (closed forms or a separate implementation)
//! and frozen here.

use twospin_core::experiments::five_seven_demo;
use twospin_core::potentials::{compute_alpha_lambda, make_phi2, make_phi3_certificate, phi2_config, select_base_m};
use twospin_core::spin::{exact_partition, SpinSystem};
use twospin_core::thresholds::*;
use twospin_core::tree::{exact_tree_marginal, TreeSpec};
use twospin_core::{graphs, SpinParams};

fn p(b: f64, g: f64) -> SpinParams {
    SpinParams::new(b, g).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1e-300)
}

#[test]
fn thresholds_beta1_gamma2() {
    let r = compute_thresholds(&p(1.0, 2.0)).unwrap();
    let s2 = 2f64.sqrt();
    assert!(close(r.delta_c, (s2 + 1.0) / (s2 - 1.0), 1e-14));
    assert!(close(r.delta_c, 3.0 + 2.0 * s2, 1e-14));
    assert!(close(r.lambda_c, 2f64.powf((r.delta_c + 1.0) / 2.0), 1e-14));
    // ceil(delta_c) = 6 and floor(delta_c) = 5 give the same exponent 7/2.
    assert!(close(r.lambda_c_int, 2f64.powf(3.5), 1e-14));
    assert!(close(r.lambda_c_int_prime, 2f64.powf(3.5), 1e-14));
    assert!(!r.integral_delta_c);
}

#[test]
fn thresholds_ising() {
    let r = compute_thresholds(&p(1.5, 1.5)).unwrap();
    assert!(close(r.delta_c, 5.0, 1e-14));
    assert!(close(r.lambda_c, 1.0, 1e-14));
    assert!(r.integral_delta_c);
}

#[test]
fn critical_pair_and_boundary_fields() {
    let q = p(1.0, 2.0);
    let (x0, x1) = critical_x_pair(&q, 6.0).unwrap();
    assert!(close(x0, 1.0, 1e-14) && close(x1, 2.0, 1e-14));
    // g_i(d) = x_i ((x_i + 2)/(x_i + 1))^d
    assert!(close(boundary_field(&q, 6.0, Branch::Lower).unwrap(), 1.5f64.powi(6), 1e-13));
    assert!(close(boundary_field(&q, 6.0, Branch::Upper).unwrap(), 2.0 * (4.0f64 / 3.0).powi(6), 1e-13));
    assert!(critical_x_pair(&q, 5.0).is_none());
}

#[test]
fn uniqueness_band_at_degree_seven() {
    let q = p(1.0, 2.0);
    // Non-unique exactly on [g1(6), g0(6)] = [11.2373.., 11.390625].
    assert_eq!(uniqueness_at_degree(&q, 11.3, 7).unwrap(), Verdict::NonUnique);
    assert_eq!(uniqueness_at_degree(&q, 11.2, 7).unwrap(), Verdict::Unique);
    assert_eq!(uniqueness_at_degree(&q, 12.0, 7).unwrap(), Verdict::Unique);
    assert_eq!(uniqueness_at_degree(&q, 1.5f64.powi(6), 7).unwrap(), Verdict::Boundary);
    assert_eq!(uniqueness_at_degree(&q, 50.0, 6).unwrap(), Verdict::Unique);
    assert!(non_unique_degrees(&q, 12.0, 12).unwrap().is_empty());
    assert_eq!(non_unique_degrees(&q, 15.0, 12).unwrap(), vec![8]);
}

#[test]
fn five_seven_fixed_points() {
    let r = five_seven_demo(10.98).unwrap();
    let want = [1.2441155844, 1.8226662946, 2.1735847605];
    assert_eq!(r.fixed_points.len(), 3);
    for (a, b) in r.fixed_points.iter().zip(want) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
    assert!(r.fixed_points.iter().all(|&x| x < r.lambda_c));
}

#[test]
fn five_seven_sequences_match_explicit_trees() {
    let q = p(1.0, 2.0);
    let r = five_seven_demo(10.98).unwrap();
    for ell in 1..=2usize {
        let t = TreeSpec { degrees: vec![5, 7], depth: 2 * ell, extra: None }.build(10.98);
        let tp = TreeSpec { degrees: vec![5, 7], depth: 2 * ell, extra: Some(50) }.build(10.98);
        let a = exact_tree_marginal(&t, &q).unwrap().value();
        let b = exact_tree_marginal(&tp, &q).unwrap().value();
        assert!(close(a, r.t_sequence[ell], 1e-12), "{a} {}", r.t_sequence[ell]);
        assert!(close(b, r.t_prime_sequence[ell], 1e-12), "{b} {}", r.t_prime_sequence[ell]);
    }
    // Leaves of the depth-zero tree carry the bare field.
    assert_eq!(r.t_sequence[0], 10.98);
}

#[test]
fn triangle_partition_function() {
    // 8 configurations: all-0 weighs 2^3 * 1, all-1 weighs 2^3, the six mixed
    // ones weigh 2 each (one monochromatic edge).
    let s = SpinSystem::uniform(p(2.0, 2.0), 3, 1.0, graphs::cycle(3)).unwrap();
    assert!((exact_partition(&s).unwrap() - 28f64.ln()).abs() < 1e-14);
}

#[test]
fn universal_potential_constants() {
    // (beta, gamma, lambda, alpha_lambda, M) from a separate grid-search implementation.
    for &(b, g, l, alpha, m) in
        &[(1.0, 2.0, 10.0, 0.96859, 68u64), (1.5, 1.5, 0.8, 0.66492, 117), (1.0, 2.0, 1.0, 0.21176, 13)]
    {
        let q = p(b, g);
        let a = compute_alpha_lambda(&q, l).unwrap();
        assert!((a - alpha).abs() < 1e-5, "{a}");
        assert_eq!(select_base_m(&q, l, a).unwrap().m, m);
        let cfg = phi2_config(&q, l, a);
        let t = a * g / (b * g - 1.0) * ((l + g) / (b * l + 1.0)).ln();
        assert!(close(cfg.t, t, 1e-14));
        let pot = make_phi2(&q, l).unwrap();
        assert!(pot.c1 <= pot.c2 && pot.c2 == 1.0 / cfg.t);
    }
    // r = 11/12 and r^12 < 1/e <= r^11
    let q = p(1.0, 2.0);
    let base = select_base_m(&q, 10.0, compute_alpha_lambda(&q, 10.0).unwrap()).unwrap();
    assert_eq!((base.m, base.d0), (68, 12));
    assert!(base.verified_up_to >= 68 * 68);
    assert!(compute_alpha_lambda(&p(1.0, 2.0), 10.7).is_err());
}

#[test]
fn beyond_critical_certificate() {
    let q = p(0.6, 2.0);
    assert!(lambda_c(&q) < 1_002_762.0);
    let c = make_phi3_certificate(&q, 1_002_762.0).unwrap();
    assert!((c.t3 - 4.2403168169).abs() < 1e-9);
    assert_eq!(c.best.d, 22);
    assert!((c.best.value - 0.99998352078).abs() < 1e-10);
    assert!((c.best.x - 1.83066421).abs() < 1e-7);
    assert!((c.c0 / (1.0 + 1e-6) - 1.0719044).abs() < 1e-6);
    assert!(c.c1_tail <= 0.481875 && c.c1_tail > 0.4807);
    assert!(c.alpha3 < c.alpha && c.alpha < 1.0);
    assert!(c.concavity_margin < c.concavity_chain_bound && c.concavity_chain_bound < -5.68);
}
