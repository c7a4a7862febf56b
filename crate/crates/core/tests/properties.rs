//! Randomised invariants checked against the brute-force oracle and the
//! model's structural identities.

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twospin_core::fptas::{approx_marginal, approx_partition, regime_potential, select_depth, ApproxRequest, Mode};
use twospin_core::graphs;
use twospin_core::potentials::{decay_rate, make_phi1, make_phi2};
use twospin_core::saw::{saw_bounds, saw_ratio_exact, DEFAULT_BUDGET};
use twospin_core::spin::{exact_log_ratio, exact_marginal, exact_partition, exact_split, Vertex};
use twospin_core::thresholds::*;
use twospin_core::tree::{absorb_pins, eval_F, eval_f, eval_f_prime, eval_f_second, exact_tree_marginal, Horizon, Ratio, RootedTree};
use twospin_core::{Spin, SpinParams, SpinSystem};

/// `(beta, gamma)` with `beta gamma > 1`.
fn ferro() -> impl Strategy<Value = SpinParams> {
    (0.2f64..3.0, 1.02f64..4.0).prop_map(|(b, k)| SpinParams::new(b, k / b).unwrap())
}

/// `(beta, gamma)` with `beta gamma > 1` and `beta <= gamma`.
fn ordered() -> impl Strategy<Value = SpinParams> {
    ferro().prop_map(|p| {
        let (b, g) = (p.beta().min(p.gamma()), p.beta().max(p.gamma()));
        SpinParams::new(b, g).unwrap()
    })
}

fn random_system(p: SpinParams, seed: u64, n: usize, multi: bool, pins: bool) -> SpinSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = if multi { graphs::multigraph(&mut rng, n, 2 * n) } else { graphs::erdos_renyi(&mut rng, n, 0.4) };
    let verts = (0..n).map(|i| Vertex { id: i as u32, lambda: rng.gen_range(0.1..5.0) }).collect();
    let mut pm = BTreeMap::new();
    if pins {
        for _ in 0..rng.gen_range(0..=n / 3) {
            pm.insert(rng.gen_range(0..n as u32), if rng.gen_bool(0.5) { Spin::Zero } else { Spin::One });
        }
    }
    SpinSystem::new(p, verts, edges, pm).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn saw_tree_is_exact(p in ferro(), seed in any::<u64>(), n in 2usize..8, multi in any::<bool>(), pins in any::<bool>()) {
        let s = random_system(p, seed, n, multi, pins);
        for v in s.free_ids() {
            let want = exact_log_ratio(&s, v).unwrap();
            let got = saw_ratio_exact(&s, v, DEFAULT_BUDGET).unwrap().value().ln();
            prop_assert!((got - want).abs() < 1e-9, "v={} saw={} oracle={}", v, got, want);
        }
    }

    #[test]
    fn deeper_horizons_nest(p in ferro(), seed in any::<u64>(), n in 3usize..9, t in 0u32..6) {
        let s = random_system(p, seed, n, false, true);
        for v in s.free_ids() {
            let exact = exact_log_ratio(&s, v).unwrap().exp();
            for (a, b) in [
                (Horizon::Depth(t), Horizon::Depth(t + 1)),
                (Horizon::MBasedPadded { base: 3.0, ell: t }, Horizon::MBasedPadded { base: 3.0, ell: t + 1 }),
            ] {
                let ba = saw_bounds(&s, v, a, DEFAULT_BUDGET).unwrap().bounds;
                let bb = saw_bounds(&s, v, b, DEFAULT_BUDGET).unwrap().bounds;
                let tol = 1e-12 * exact;
                prop_assert!(ba.lower.0 <= bb.lower.0 + tol && bb.upper.0 <= ba.upper.0 * (1.0 + 1e-12) + tol);
                prop_assert!(bb.lower.0 <= exact * (1.0 + 1e-12) && exact <= bb.upper.0 * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn bounded_marginals_bracket_the_oracle(seed in any::<u64>(), k in 1.01f64..1.6, n in 3usize..10, eps in 1e-5f64..0.05) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = rng.gen_range(0.5..2.0);
        let p = SpinParams::new(b, k / b).unwrap();
        let cap = ((delta_c(&p) + 1.0).ceil() as usize - 1).clamp(2, 4);
        let edges = graphs::bounded_degree(&mut rng, n, cap, 3 * n);
        let verts = (0..n).map(|i| Vertex { id: i as u32, lambda: rng.gen_range(0.05..10.0) }).collect();
        let s = SpinSystem::new(p, verts, edges, BTreeMap::new()).unwrap();
        let (_, pot) = regime_potential(&s, Mode::Bounded).unwrap();
        for v in s.free_ids() {
            let mb = approx_marginal(&s, v, eps, &pot).unwrap();
            let want = exact_marginal(&s, v).unwrap();
            prop_assert!(mb.p_lower <= want + 1e-12 && want <= mb.p_upper + 1e-12);
            prop_assert!(mb.p_upper - mb.p_lower <= eps);
        }
    }

    #[test]
    fn partition_within_relative_error(seed in any::<u64>(), n in 2usize..10, universal in any::<bool>(), tight in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eps = if tight { 1e-3 } else { 1e-1 };
        let (s, mode) = if universal {
            let b: f64 = rng.gen_range(0.3..=1.0);
            let g = rng.gen_range((1.0 / b) * 1.1..(1.0 / b) * 3.0);
            let p = SpinParams::new(b, g).unwrap();
            let l = lambda_c(&p) * rng.gen_range(0.1..0.9);
            (SpinSystem::uniform(p, n, l, graphs::erdos_renyi(&mut rng, n, 0.5)).unwrap(), Mode::Universal)
        } else {
            let p = SpinParams::new(2.0, 2.0).unwrap();
            (SpinSystem::uniform(p, n, rng.gen_range(0.2..5.0), graphs::bounded_degree(&mut rng, n, 3, 3 * n)).unwrap(), Mode::Bounded)
        };
        let oracle = exact_partition(&s).unwrap();
        let r = approx_partition(&ApproxRequest { system: s, epsilon: eps, mode }).unwrap();
        prop_assert!((r.log_z - oracle).abs() <= eps.ln_1p() + 1e-12);
    }

    #[test]
    fn recursion_is_monotone(p in ferro(), l in 0.01f64..50.0, xs in prop::collection::vec(0.0f64..20.0, 0..6), i in 0usize..6, bump in 0.0f64..5.0) {
        let base: Vec<Ratio> = xs.iter().map(|&x| Ratio(x)).collect();
        let f0 = eval_F(&p, l, &base).0;
        prop_assert!(eval_F(&p, l * 1.5, &base).0 >= f0);
        if !xs.is_empty() {
            let mut up = base.clone();
            let j = i % xs.len();
            up[j] = Ratio(up[j].0 + bump);
            prop_assert!(eval_F(&p, l, &up).0 >= f0 * (1.0 - 1e-15));
            up[j] = Ratio::INFINITY;
            prop_assert!(eval_F(&p, l, &up).0 >= f0 * (1.0 - 1e-15));
        }
    }

    #[test]
    fn partition_splits_over_a_vertex(p in ferro(), seed in any::<u64>(), n in 1usize..9) {
        let s = random_system(p, seed, n, seed % 2 == 0, false);
        let z = exact_partition(&s).unwrap();
        let (z0, z1) = exact_split(&s, 0).unwrap();
        let sum = z0.max(z1) + (-(z0 - z1).abs()).exp().ln_1p();
        prop_assert!((sum - z).abs() <= 1e-12 * z.abs().max(1.0));
    }

    #[test]
    fn fixed_points_are_fixed(p in ordered(), l in 0.05f64..60.0, d in 1.0f64..20.0) {
        let fp = fixed_points(&p, l, d);
        prop_assert!(!fp.points.is_empty() && fp.points.len() <= 3);
        for &x in &fp.points {
            prop_assert!((eval_f(&p, l, d, x) / x - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn verdict_agrees_with_fixed_point_count(p in ordered(), l in 0.05f64..60.0, d in 2u32..20) {
        let fp = fixed_points(&p, l, (d - 1) as f64);
        match uniqueness_at_degree(&p, l, d).unwrap() {
            Verdict::NonUnique => prop_assert!(fp.points.len() == 3 || fp.tangent.iter().any(|&t| t)),
            Verdict::Unique => prop_assert!(fp.points.len() == 1 || fp.tangent.iter().any(|&t| t)),
            Verdict::Boundary => {}
        }
    }

    #[test]
    fn subcritical_fields_are_unique(p in ordered(), frac in 0.01f64..0.999, d in 2u32..40) {
        // only when one of the interactions is at most 1
        prop_assume!(p.beta() <= 1.0);
        let l = lambda_c(&p) * frac;
        prop_assert_eq!(uniqueness_at_degree(&p, l, d).unwrap(), Verdict::Unique);
    }

    #[test]
    fn small_degrees_are_unique(p in ordered(), l in 0.001f64..1e4, d in 2u32..60) {
        prop_assume!(((d - 1) as f64) < delta_c(&p));
        prop_assert_eq!(uniqueness_at_degree(&p, l, d).unwrap(), Verdict::Unique);
    }

    #[test]
    fn criticality_identities(p in ordered()) {
        let (d, l) = (delta_c(&p), lambda_c(&p));
        let x = (p.gamma() / p.beta()).sqrt();
        prop_assert!((eval_f(&p, l, d, x) / x - 1.0).abs() < 1e-10);
        prop_assert!((eval_f_prime(&p, l, d, x) - 1.0).abs() < 1e-10);
        prop_assert!((eval_f_second(&p, l, d, x) * x).abs() < 1e-10);
    }

    #[test]
    fn good_potential_contracts(p in ferro(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cap = ((delta_c(&p) + 1.0).ceil() as usize - 1).min(30);
        prop_assume!(cap >= 2);
        let delta = rng.gen_range(2..=cap);
        let lam = rng.gen_range(0.1..10.0);
        let pot = make_phi1(&p, delta, lam).unwrap();
        let (lo, hi) = pot.domain;
        for _ in 0..200 {
            let k = rng.gen_range(1..delta);
            let xs: Vec<f64> = (0..k).map(|_| (lo.ln() + (hi / lo).ln() * rng.gen::<f64>()).exp().clamp(lo, hi)).collect();
            let r = decay_rate(&pot, &p, lam, &xs).unwrap();
            prop_assert!(r <= pot.declared_bound(k) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn universal_potential_contracts(p in ordered(), frac in 0.05f64..0.9, seed in any::<u64>()) {
        let lam = lambda_c(&p) * frac;
        let pot = make_phi2(&p, lam).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..200 {
            let k = rng.gen_range(1..=60);
            let lo = lam.min(1.0) * 1e-15;
            let xs: Vec<f64> = (0..k).map(|_| (lo.ln() + (lam / lo).ln() * rng.gen::<f64>()).exp().min(lam)).collect();
            let r = decay_rate(&pot, &p, lam * rng.gen_range(0.5..=1.0), &xs).unwrap();
            prop_assert!(r <= pot.declared_bound(k) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn absorbing_pins_keeps_the_root_ratio(p in ferro(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = RootedTree::new(0, rng.gen_range(0.1..4.0), None);
        for i in 1..rng.gen_range(2..30u32) {
            let parent = rng.gen_range(0..t.len());
            if t.node(parent).pin.is_some() {
                continue;
            }
            let pin = match rng.gen_range(0..4) {
                0 => Some(Spin::Zero),
                1 => Some(Spin::One),
                _ => None,
            };
            t.push_child(parent, i, rng.gen_range(0.1..4.0), pin);
        }
        let a = exact_tree_marginal(&t, &p).unwrap().value();
        let b = exact_tree_marginal(&absorb_pins(&t, &p), &p).unwrap().value();
        prop_assert!((a / b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn halving_eps_adds_a_bounded_number_of_levels(p in ferro(), seed in any::<u64>(), eps in 1e-9f64..1e-2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cap = ((delta_c(&p) + 1.0).ceil() as usize - 1).min(30);
        prop_assume!(cap >= 3);
        let delta = rng.gen_range(3..=cap);
        let pot = make_phi1(&p, delta, 1.0).unwrap();
        let t1 = select_depth(&pot, 1.0, eps, delta);
        let t2 = select_depth(&pot, 1.0, eps / 2.0, delta);
        let step = (2f64.ln() / (1.0 / pot.alpha).ln()).ceil() as u32;
        prop_assert!(t2 >= t1 && t2 - t1 <= step);
    }
}

#[test]
fn approximation_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let p = SpinParams::new(0.7, 2.5).unwrap();
    let s = SpinSystem::uniform(p, 12, 2.0, graphs::erdos_renyi(&mut rng, 12, 0.3)).unwrap();
    let req = ApproxRequest { system: s, epsilon: 1e-3, mode: Mode::Auto };
    let a = approx_partition(&req).unwrap();
    let b = approx_partition(&req).unwrap();
    assert_eq!(a.log_z.to_bits(), b.log_z.to_bits());
    assert_eq!(a.depths, b.depths);
    assert_eq!(a.nodes_expanded, b.nodes_expanded);
}

#[test]
fn universal_alpha_sees_small_ratios_when_lambda_is_huge() {
    // lambda_c is about 1e142 here; the supremum sits at x of order one
    let p = SpinParams::new(0.2, 5.1).unwrap();
    let lam = lambda_c(&p) * 0.3;
    let pot = make_phi2(&p, lam).unwrap();
    assert!(pot.alpha > 0.9 && pot.alpha < 1.0, "alpha = {}", pot.alpha);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rep = twospin_core::potentials::verify_potential(&pot, &mut rng, 200, 20_000, 300);
    assert_eq!(rep.rate_violations + rep.phi_violations, 0);
}

fn cubic_system(seed: u64, n: usize) -> SpinSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = SpinParams::new(1.5, 1.5).unwrap();
    SpinSystem::uniform(p, n, 1.0, graphs::bounded_degree(&mut rng, n, 3, 20 * n)).unwrap()
}

#[test]
fn truncated_marginals_meet_their_target() {
    let eps = 1e-5;
    let mut truncated = 0;
    for seed in 0..20 {
        let s = cubic_system(seed, if seed < 4 { 18 } else { 60 });
        let (_, pot) = regime_potential(&s, Mode::Bounded).unwrap();
        for v in s.free_ids().into_iter().take(5) {
            let mb = approx_marginal(&s, v, eps, &pot).unwrap();
            assert!(mb.certified);
            assert!(mb.gap() <= eps, "seed {seed} v {v}: gap {}", mb.gap());
            if saw_bounds(&s, v, Horizon::Depth(mb.depth_used), DEFAULT_BUDGET).unwrap().truncated {
                truncated += 1;
            }
            if seed < 4 {
                let want = exact_marginal(&s, v).unwrap();
                assert!(mb.p_lower <= want + 1e-12 && want <= mb.p_upper + 1e-12);
            }
        }
    }
    assert!(truncated > 50, "only {truncated} truncated marginals");
}

#[test]
fn bracket_width_decays_at_least_at_the_certified_rate() {
    let s = cubic_system(11, 80);
    let (_, pot) = regime_potential(&s, Mode::Bounded).unwrap();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for t in 2..=12u32 {
        let b = saw_bounds(&s, 0, Horizon::Depth(t), DEFAULT_BUDGET).unwrap().bounds;
        let p = |r: f64| r / (1.0 + r);
        xs.push(t as f64);
        ys.push((p(b.upper.0) - p(b.lower.0)).ln());
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    assert!(slope <= pot.alpha.ln() + 0.02, "slope {slope} vs ln alpha {}", pot.alpha.ln());
}
