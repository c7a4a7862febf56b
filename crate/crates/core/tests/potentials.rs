//! Sampled checks of the inequalities each potential relies on.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twospin_core::potentials::{decay_rate, make_phi1, make_phi2, phi3, phi3_symmetric_rate, phi3_t, verify_potential};
use twospin_core::thresholds::{delta_c, lambda_c};
use twospin_core::tree::{eval_F, Ratio};
use twospin_core::SpinParams;

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + (hi / lo).ln() * rng.gen::<f64>()).exp().clamp(lo, hi)
}

#[test]
fn log_potential_is_tight_at_the_critical_pair() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let b: f64 = rng.gen_range(0.3..3.0);
        let g = rng.gen_range(b.max(1.0 / b) * 1.01..b.max(1.0 / b) * 3.0);
        let p = SpinParams::new(b, g).unwrap();
        let cap = ((delta_c(&p) + 1.0).ceil() as usize - 1).min(40);
        if cap < 2 {
            continue;
        }
        let delta = rng.gen_range(2..=cap);
        let xhat = (g / b).sqrt();
        let pot = make_phi1(&p, delta, xhat).unwrap();
        let r = decay_rate(&pot, &p, xhat, &vec![xhat; delta - 1]).unwrap();
        assert!((r - (delta - 1) as f64 / delta_c(&p)).abs() < 1e-3, "rate {r}");
    }
}

#[test]
fn universal_potential_chain_inequalities() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (b, g, frac) in [(1.0, 2.0, 0.94), (0.5, 3.0, 0.5), (0.8, 2.0, 0.2), (0.3, 4.0, 0.7)] {
        let p = SpinParams::new(b, g).unwrap();
        let lam = lambda_c(&p) * frac;
        let pot = make_phi2(&p, lam).unwrap();
        let lo = lam.min(1.0) * 1e-15;
        for _ in 0..100_000 {
            let x = log_uniform(&mut rng, lo, lam);
            let phi = pot.phi(x);
            assert!(phi * x * (lam / x).ln() <= 1.0 + 1e-12, "x = {x}");
            let child = (b * g - 1.0) / ((b * x + 1.0) * (x + g) * phi);
            assert!(child <= pot.alpha * ((x + g) / (b * x + 1.0)).ln() * (1.0 + 1e-12), "x = {x}");
        }
    }
}

#[test]
fn beyond_critical_rate_is_dominated_by_the_symmetric_one() {
    let p = SpinParams::new(0.6, 2.0).unwrap();
    let (b, g) = (0.6, 2.0);
    let lam = 1_002_762.0;
    let t = phi3_t(&p);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20_000 {
        let d = rng.gen_range(1..=60usize);
        let xs: Vec<f64> = (0..d).map(|_| log_uniform(&mut rng, 1e-8, lam)).collect();
        let kids: Vec<Ratio> = xs.iter().map(|&x| Ratio(x)).collect();
        let f = eval_F(&p, lam, &kids).0;
        let rate = phi3(t, f) * f * xs.iter().map(|&x| (b * g - 1.0) / ((b * x + 1.0) * (x + g) * phi3(t, x))).sum::<f64>();
        // f_d(x) = f solved in closed form through r = (beta x + 1)/(x + gamma)
        let r = (f / lam).powf(1.0 / d as f64);
        let xt = (g * r - 1.0) / (b - r);
        let sym = phi3_symmetric_rate(&p, lam, t, d as f64, xt);
        assert!(rate <= sym + 1e-9, "d = {d}: {rate} > {sym}");
    }
}

#[test]
fn verifier_covers_tiny_ratios() {
    let p = SpinParams::new(0.5, 2.1).unwrap();
    let pot = make_phi2(&p, lambda_c(&p) * 0.3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rep = verify_potential(&pot, &mut rng, 10_000, 100_000, 50);
    assert_eq!(rep.phi_violations + rep.rate_violations, 0);
    assert!(rep.worst_ratio > 0.5);
}
