//! Potential functions and contraction certificates.
//!
//! For a potential `Phi` with derivative `phi`, the amortised decay rate of
//! one recursion step is
//! `C(x) = phi(F(x)) * sum_i |dF/dx_i| / phi(x_i)`.
//! A good potential keeps it below a constant `alpha < 1` for bounded degree;
//! a universal one keeps it below `alpha^ceil(log_M(d+1))` for every degree.

#[allow(unused_imports)] // shadowed by std when another crate links it
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numeric::{bisect, ceil_log, grid_golden_max};
use crate::spin::SpinParams;
use crate::thresholds::{delta_c, lambda_c};
use crate::tree::{eval_F, eval_f, Ratio};

/// Relative slack when comparing a computed rate against its bound.
pub const DECAY_SLACK: f64 = 1e-12;
/// Multiplicative margin added to numerically maximised suprema.
pub const SUP_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phi2Config {
    pub alpha_lambda: f64,
    pub t: f64,
    /// Roots of `x ln(lambda/x) = t`, present when `t < lambda/e`.
    pub knots: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialKind {
    /// `phi(x) = 1/x`.
    Phi1,
    /// `phi(x) = 1/max(t, x ln(lambda/x))`.
    Phi2(Phi2Config),
    /// `phi(x) = 1/(y (ln(1 + 1/y) + t))` with `y = max(x, kappa)`.
    Phi3Chopped { t: f64, kappa: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Potential {
    pub kind: PotentialKind,
    pub params: SpinParams,
    /// Largest field the potential is certified for.
    pub lambda: f64,
    pub domain: (f64, f64),
    pub c1: f64,
    pub c2: f64,
    pub alpha: f64,
    /// Base of the M-based depth; `None` for good potentials.
    pub base_m: Option<f64>,
    /// For good potentials, the maximum graph degree `Delta` (recursions
    /// have at most `Delta - 1` children below the root).
    pub max_degree: Option<usize>,
}

impl Potential {
    pub fn phi(&self, x: f64) -> f64 {
        match self.kind {
            PotentialKind::Phi1 => 1.0 / x,
            PotentialKind::Phi2(c) => phi2(self.lambda, c.t, x),
            PotentialKind::Phi3Chopped { t, kappa } => phi3(t, x.max(kappa)),
        }
    }

    pub fn is_universal(&self) -> bool {
        self.base_m.is_some()
    }

    /// Bound on `C` for a node with `d` children.
    pub fn declared_bound(&self, d: usize) -> f64 {
        match self.base_m {
            Some(m) => self.alpha.powi(ceil_log(m, d as u64 + 1) as i32),
            None => self.alpha,
        }
    }

    /// Upper bound on `Phi(hi) - Phi(lo)`.
    pub fn gap_bound(&self, lo: f64, hi: f64) -> f64 {
        match self.kind {
            PotentialKind::Phi1 => (hi / lo).ln(),
            _ => self.c2 * (hi - lo),
        }
    }

    fn in_domain(&self, x: f64) -> bool {
        let (lo, hi) = self.domain;
        x >= lo * (1.0 - DECAY_SLACK) && x <= hi * (1.0 + DECAY_SLACK)
    }
}

fn phi2(lambda: f64, t: f64, x: f64) -> f64 {
    1.0 / t.max(x * (lambda / x).ln())
}

/// `phi_3(x) = 1/(x (ln(1 + 1/x) + t))`.
pub fn phi3(t: f64, x: f64) -> f64 {
    1.0 / (x * ((1.0 / x).ln_1p() + t))
}

/// Amortised decay rate `C^phi_d(x)` at a node with field `lambda_v`.
pub fn decay_rate(pot: &Potential, params: &SpinParams, lambda_v: f64, xs: &[f64]) -> Result<f64> {
    if let Some(&x) = xs.iter().find(|&&x| !pot.in_domain(x)) {
        return Err(Error::DomainViolation { x, lo: pot.domain.0, hi: pot.domain.1 });
    }
    if xs.is_empty() {
        return Ok(0.0);
    }
    let (b, g) = (params.beta(), params.gamma());
    let children: Vec<Ratio> = xs.iter().map(|&x| Ratio(x)).collect();
    let f = eval_F(params, lambda_v, &children).0;
    let front = match pot.kind {
        PotentialKind::Phi1 => 1.0,
        _ => pot.phi(f) * f,
    };
    let sum: f64 = xs.iter().map(|&x| (b * g - 1.0) / ((b * x + 1.0) * (x + g) * pot.phi(x))).sum();
    Ok(front * sum)
}

/// `Phi_1 = ln x` for graphs of maximum degree `delta`, with contraction
/// `(delta - 1)/delta_c`. Fields may range over `[lambda_min, lambda_max]`.
pub fn make_phi1_fields(params: &SpinParams, delta: usize, lambda_min: f64, lambda_max: f64) -> Result<Potential> {
    let dc = delta_c(params);
    let k = delta.saturating_sub(1) as f64;
    if k >= dc {
        return Err(Error::DegreeTooLarge { max_degree: delta, delta_c: dc });
    }
    let (b, g) = (params.beta(), params.gamma());
    let lo = lambda_min * (1.0 / g).min(1.0).powf(k);
    let hi = lambda_max * b.max(1.0).powf(k);
    Ok(Potential {
        kind: PotentialKind::Phi1,
        params: *params,
        lambda: lambda_max,
        domain: (lo, hi),
        c1: 1.0 / hi,
        c2: 1.0 / lo,
        alpha: k / dc,
        base_m: None,
        max_degree: Some(delta),
    })
}

pub fn make_phi1(params: &SpinParams, delta: usize, lambda: f64) -> Result<Potential> {
    make_phi1_fields(params, delta, lambda, lambda)
}

fn require_subcritical(params: &SpinParams, lambda: f64) -> Result<()> {
    params.require_beta_le_gamma()?;
    let lc = lambda_c(params);
    if !(lambda > 0.0 && lambda < lc) {
        return Err(Error::LambdaNotSubcritical { lambda, lambda_c: lc });
    }
    Ok(())
}

/// `g_lambda(x) = (beta gamma - 1) x ln(lambda/x) / ((beta x+1)(x+gamma) ln((x+gamma)/(beta x+1)))`.
pub fn g_lambda(params: &SpinParams, lambda: f64, x: f64) -> f64 {
    let (b, g) = (params.beta(), params.gamma());
    (b * g - 1.0) * x * (lambda / x).ln() / ((b * x + 1.0) * (x + g) * ((x + g) / (b * x + 1.0)).ln())
}

/// `(1 + 1e-6) * sup_{0 < x <= lambda} g_lambda(x)`, asserted below 1.
pub fn compute_alpha_lambda(params: &SpinParams, lambda: f64) -> Result<f64> {
    require_subcritical(params, lambda)?;
    // g_lambda increases on (0, lambda/e), so an absolute floor well below
    // min(1, lambda) captures the supremum even when lambda is huge.
    let lo = lambda.min(1.0) * 1e-15;
    let n = 200 * ((lambda / lo).log10().ceil() as usize).max(5);
    let (_, sup) = grid_golden_max(|x| g_lambda(params, lambda, x), lo, lambda, n, 1e-12);
    let alpha = (1.0 + SUP_MARGIN) * sup.max(0.0);
    if !(alpha < 1.0) {
        return Err(Error::ParametersOutOfRange(format!(
            "lambda {lambda} too close to lambda_c: contraction estimate {alpha} is not below 1"
        )));
    }
    Ok(alpha)
}

/// Threshold `t` and knots of the Phi_2 construction for a given `alpha`.
pub fn phi2_config(params: &SpinParams, lambda: f64, alpha_lambda: f64) -> Phi2Config {
    let (b, g) = (params.beta(), params.gamma());
    let t = alpha_lambda * g / (b * g - 1.0) * ((lambda + g) / (b * lambda + 1.0)).ln();
    let peak = lambda / core::f64::consts::E;
    let knots = (t < peak).then(|| {
        let h = |x: f64| x * (lambda / x).ln() - t;
        (bisect(h, f64::MIN_POSITIVE, peak, 1e-14), bisect(h, peak, lambda, 1e-14))
    });
    Phi2Config { alpha_lambda, t, knots }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseM {
    pub m: u64,
    pub d0: u64,
    pub verified_up_to: u64,
}

/// `r = (beta lambda + 1)/(lambda + gamma)`.
fn r_of(params: &SpinParams, lambda: f64) -> f64 {
    (params.beta() * lambda + 1.0) / (lambda + params.gamma())
}

/// Tail bound `B(d) = (alpha lambda / t) r^d d ln(1/r)` on the Phi_2 rate
/// for `d >= d0`.
pub fn phi2_tail_bound(params: &SpinParams, lambda: f64, alpha: f64, t: f64, d: u64) -> f64 {
    let r = r_of(params, lambda);
    alpha * lambda / t * r.powf(d as f64) * d as f64 * (1.0 / r).ln()
}

/// Smallest integer base `M >= max(d0, 2)` with `B(d) <= alpha^ceil(log_M(d+1))`
/// for all `d >= M`: checked directly on `[M, max(1000, M^2)]` and beyond
/// that by the sign and slope of
/// `ln B(d) - (1 + ln(d+1)/ln M) ln alpha`, whose derivative is decreasing.
pub fn select_base_m(params: &SpinParams, lambda: f64, alpha: f64) -> Result<BaseM> {
    require_subcritical(params, lambda)?;
    let r = r_of(params, lambda);
    if !(r < 1.0) {
        return Err(Error::ParametersOutOfRange(format!("(beta lambda + 1)/(lambda + gamma) = {r} is not below 1")));
    }
    let t = phi2_config(params, lambda, alpha).t;
    let mut d0 = 1u64;
    while r.powf(d0 as f64) >= (-1.0f64).exp() {
        d0 += 1;
    }
    let b = |d: u64| phi2_tail_bound(params, lambda, alpha, t, d);
    let tail_ok = |m: u64, dd: u64| {
        let (lm, la) = ((m as f64).ln(), alpha.ln());
        let d = dd as f64;
        let h = b(dd).ln() - (1.0 + (d + 1.0).ln() / lm) * la;
        let hp = 1.0 / d + r.ln() - la / ((d + 1.0) * lm);
        h < 0.0 && hp < 0.0
    };
    let mut m = d0.max(2);
    loop {
        let big = 1000u64.max(m.saturating_mul(m));
        // B decreases for d >= d0, so each block of constant exponent only
        // needs its left endpoint.
        let mut ok = true;
        let mut start = m;
        let mut k = 2i32;
        while start <= big {
            if b(start) > alpha.powi(k) {
                ok = false;
                break;
            }
            start = start.saturating_mul(m);
            k += 1;
        }
        if ok && tail_ok(m, big) {
            let exhaustive = (m..=big).all(|d| b(d) <= alpha.powi(ceil_log(m as f64, d + 1) as i32));
            if exhaustive {
                return Ok(BaseM { m, d0, verified_up_to: big });
            }
        }
        m += 1;
        if m > 10_000_000 {
            return Err(Error::ParametersOutOfRange("no base M found below 10^7".into()));
        }
    }
}

/// Universal `Phi_2` potential on `(0, lambda]`.
pub fn make_phi2(params: &SpinParams, lambda: f64) -> Result<Potential> {
    let alpha = compute_alpha_lambda(params, lambda)?;
    let cfg = phi2_config(params, lambda, alpha);
    let base = select_base_m(params, lambda, alpha)?;
    let c1 = if cfg.knots.is_some() { core::f64::consts::E / lambda } else { 1.0 / cfg.t };
    Ok(Potential {
        kind: PotentialKind::Phi2(cfg),
        params: *params,
        lambda,
        domain: (0.0, lambda),
        c1,
        c2: 1.0 / cfg.t,
        alpha,
        base_m: Some(base.m as f64),
        max_degree: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyInequalityReport {
    pub samples: usize,
    pub max_factor: f64,
    /// Largest `(lhs - rhs)/rhs` observed.
    pub max_relative_excess: f64,
    pub violations: usize,
    /// `|lhs - rhs|/rhs` at `x = sqrt(gamma/beta)`.
    pub equality_residual: f64,
}

/// Checks `(beta x+1)/(x+gamma) <= 1` and
/// `(beta gamma-1) x ln(lambda_c/x) <= (beta x+1)(x+gamma) ln((x+gamma)/(beta x+1))`
/// on a log grid over `(0, lambda_c]` plus the equality point.
pub fn key_inequality_check(params: &SpinParams, samples: usize) -> Result<KeyInequalityReport> {
    params.require_beta_le_gamma()?;
    let (b, g) = (params.beta(), params.gamma());
    let lc = lambda_c(params);
    let sides = |x: f64| {
        let lhs = (b * g - 1.0) * x * (lc / x).ln();
        let rhs = (b * x + 1.0) * (x + g) * ((x + g) / (b * x + 1.0)).ln();
        (lhs, rhs)
    };
    let mut rep = KeyInequalityReport {
        samples,
        max_factor: 0.0,
        max_relative_excess: f64::NEG_INFINITY,
        violations: 0,
        equality_residual: 0.0,
    };
    let xhat = (g / b).sqrt();
    let n = samples.max(2);
    let pts = (0..n).map(|k| lc * (1e-9f64).powf(1.0 - k as f64 / (n - 1) as f64)).chain(core::iter::once(xhat));
    for x in pts {
        let f = params.factor(x);
        let (lhs, rhs) = sides(x);
        let excess = (lhs - rhs) / rhs.abs().max(1e-300);
        rep.max_factor = rep.max_factor.max(f);
        rep.max_relative_excess = rep.max_relative_excess.max(excess);
        if f > 1.0 + DECAY_SLACK || excess > DECAY_SLACK {
            rep.violations += 1;
        }
    }
    let (lhs, rhs) = sides(xhat);
    rep.equality_residual = ((lhs - rhs) / rhs).abs();
    Ok(rep)
}

/// `t` for the beyond-critical potential:
/// `Delta_c * ln(sqrt(gamma/beta))/(sqrt(gamma/beta)+1) - ln(1 + sqrt(beta/gamma))`.
pub fn phi3_t(params: &SpinParams) -> f64 {
    let q = (params.gamma() / params.beta()).sqrt();
    delta_c(params) * q.ln() / (q + 1.0) - (1.0 / q).ln_1p()
}

/// Symmetric rate `C^{phi_3}_d(x)` with all children equal to `x`.
pub fn phi3_symmetric_rate(params: &SpinParams, lambda: f64, t: f64, d: f64, x: f64) -> f64 {
    let (b, g) = (params.beta(), params.gamma());
    let f = eval_f(params, lambda, d, x);
    d * (b * g - 1.0) / ((1.0 / f).ln_1p() + t) * x * ((1.0 / x).ln_1p() + t) / ((b * x + 1.0) * (x + g))
}

/// `rho''(s)` for `rho(s) = (1 + beta gamma - beta e^-s - gamma e^s)(ln(((gamma-1)e^s + beta - 1)/(gamma e^s - 1)) + t)`.
pub fn rho_second(params: &SpinParams, t: f64, s: f64) -> f64 {
    let (b, g) = (params.beta(), params.gamma());
    let u = s.exp();
    let a = 1.0 + b * g - b / u - g * u;
    let a1 = b / u - g * u;
    let a2 = -b / u - g * u;
    let p = (g - 1.0) * u + b - 1.0;
    let q = g * u - 1.0;
    let l = (p / q).ln() + t;
    let l1 = (g - 1.0) * u / p - g * u / q;
    let l2 = (g - 1.0) * u * (b - 1.0) / (p * p) + g * u / (q * q);
    a2 * l + 2.0 * a1 * l1 + a * l2
}

/// `gamma(beta+1) + gamma(beta gamma-1)/(gamma-1) - beta gamma - (beta-1)/(gamma-1) - 2t`.
pub fn rho_chain_bound(params: &SpinParams, t: f64) -> f64 {
    let (b, g) = (params.beta(), params.gamma());
    g * (b + 1.0) + g * (b * g - 1.0) / (g - 1.0) - b * g - (b - 1.0) / (g - 1.0) - 2.0 * t
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeMax {
    pub d: u32,
    pub x: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phi3Certificate {
    pub lambda: f64,
    pub t3: f64,
    /// Largest sampled `rho''` on the open interval `(-ln gamma, ln beta)`.
    pub concavity_margin: f64,
    /// Closed-form upper bound on `rho''`.
    pub concavity_chain_bound: f64,
    /// Maximum of the symmetric rate over `x` for each degree `1..=100`.
    pub per_degree_max: Vec<DegreeMax>,
    pub best: DegreeMax,
    /// `max_x x(ln(1+1/x)+t)/((beta x+1)(x+gamma))`, with margin.
    pub c0: f64,
    pub c0_argmax: f64,
    /// `max_{d>100} d(beta gamma-1)/(ln(1 + lambda^-1 beta^-d) + t)`, with margin.
    pub c1_tail: f64,
    pub c1_argmax: u32,
    pub alpha3: f64,
    /// Chop point and its inflation factor `eta`.
    pub kappa: f64,
    pub eta: f64,
    /// Contraction of the chopped potential, `(1 + eta) alpha3`.
    pub alpha: f64,
    pub base_m: u64,
    /// Largest exponent `k` with `(1+eta) c0 c1 <= alpha^k`; the schedule
    /// holds for all degrees with `ceil(log_M(d+1)) <= k`.
    pub tail_exponent_limit: f64,
}

/// Degrees whose symmetric maxima are computed individually.
pub const PHI3_DEGREE_CAP: u32 = 100;
/// Degrees scanned when bounding `c1_tail`, beyond which the expression is
/// monotone toward its limit.
pub const PHI3_TAIL_SCAN: u32 = 10_000;

/// Builds the beyond-critical certificate. Requires `beta <= 1 < gamma`
/// and a negative concavity margin.
pub fn make_phi3_certificate(params: &SpinParams, lambda: f64) -> Result<Phi3Certificate> {
    let (b, g) = (params.beta(), params.gamma());
    if !(b <= 1.0 && 1.0 < g) {
        return Err(Error::ParametersOutOfRange(format!("need beta <= 1 < gamma (beta={b}, gamma={g})")));
    }
    let t = phi3_t(params);
    let (slo, shi) = (-g.ln() + 1e-9, b.ln() - 1e-9);
    let n = 10_000;
    let margin = (0..=n)
        .map(|k| rho_second(params, t, slo + (shi - slo) * k as f64 / n as f64))
        .fold(f64::NEG_INFINITY, f64::max);
    if !(margin < 0.0) {
        return Err(Error::ConcavityFailed { margin });
    }

    let mut per_degree = Vec::new();
    for d in 1..=PHI3_DEGREE_CAP {
        let (x, v) =
            grid_golden_max(|x| phi3_symmetric_rate(params, lambda, t, d as f64, x), lambda * 1e-15, lambda, 2000, 1e-13);
        per_degree.push(DegreeMax { d, x, value: v });
    }
    let best = per_degree.iter().cloned().fold(per_degree[0].clone(), |a, c| if c.value > a.value { c } else { a });

    let c0f = |x: f64| x * ((1.0 / x).ln_1p() + t) / ((b * x + 1.0) * (x + g));
    let (c0x, c0) = grid_golden_max(c0f, 1e-12, 1e12, 4000, 1e-13);
    let c1f = |d: u32| d as f64 * (b * g - 1.0) / ((1.0 / lambda * b.powi(-(d as i32))).ln_1p() + t);
    let mut c1_tail = (b * g - 1.0) / (1.0 / b).ln();
    let mut c1_arg = u32::MAX;
    for d in PHI3_DEGREE_CAP + 1..=PHI3_TAIL_SCAN {
        let v = c1f(d);
        if v > c1_tail {
            c1_tail = v;
            c1_arg = d;
        }
    }
    let c0 = c0 * (1.0 + SUP_MARGIN);
    let c1_tail = c1_tail * (1.0 + SUP_MARGIN);
    let alpha3 = best.value.max(c0 * c1_tail);
    if !(alpha3 < 1.0) {
        return Err(Error::ParametersOutOfRange(format!("symmetric rate reaches {alpha3} >= 1")));
    }

    // Chopping at kappa inflates each child term by at most
    // 1 + kappa(beta + 1/gamma) + beta kappa^2/gamma.
    let target = (1.0 - alpha3) / (2.0 * alpha3);
    let (qa, qb) = (b / g, b + 1.0 / g);
    let kappa = (-qb + (qb * qb + 4.0 * qa * target).sqrt()) / (2.0 * qa);
    let eta = kappa * qb + qa * kappa * kappa;
    let alpha = (1.0 + eta) * alpha3;
    let tail = (1.0 + eta) * c0 * c1_tail;
    Ok(Phi3Certificate {
        lambda,
        t3: t,
        concavity_margin: margin,
        concavity_chain_bound: rho_chain_bound(params, t),
        per_degree_max: per_degree,
        best,
        c0,
        c0_argmax: c0x,
        c1_tail,
        c1_argmax: c1_arg,
        alpha3,
        kappa,
        eta,
        alpha,
        base_m: PHI3_DEGREE_CAP as u64 + 1,
        tail_exponent_limit: tail.ln() / alpha.ln(),
    })
}

impl Phi3Certificate {
    /// The chopped potential as a universal potential on `(0, lambda]`.
    pub fn potential(&self, params: &SpinParams) -> Potential {
        Potential {
            kind: PotentialKind::Phi3Chopped { t: self.t3, kappa: self.kappa },
            params: *params,
            lambda: self.lambda,
            domain: (0.0, self.lambda),
            c1: phi3(self.t3, self.lambda),
            c2: phi3(self.t3, self.kappa),
            alpha: self.alpha,
            base_m: Some(self.base_m as f64),
            max_degree: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerificationReport {
    pub phi_samples: usize,
    pub phi_violations: usize,
    pub vectors: usize,
    pub rate_violations: usize,
    /// Largest observed `rate / bound`.
    pub worst_ratio: f64,
}

/// Re-checks `c1 <= phi <= c2` on `phi_samples` domain points and
/// `rate <= declared_bound(d)` on `vectors` random child vectors with up to
/// `d_max` children (capped at `Delta - 1` for good potentials).
/// Fields are drawn from `[lambda/2, lambda]`.
pub fn verify_potential<R: Rng + ?Sized>(
    pot: &Potential,
    rng: &mut R,
    phi_samples: usize,
    vectors: usize,
    d_max: usize,
) -> VerificationReport {
    let (lo, hi) = pot.domain;
    let lo_s = if lo > 0.0 { lo } else { hi.min(1.0) * 1e-15 };
    let sample = |rng: &mut R| (lo_s.ln() + (hi.ln() - lo_s.ln()) * rng.gen::<f64>()).exp().clamp(lo_s, hi);
    let mut rep = VerificationReport { phi_samples, phi_violations: 0, vectors, rate_violations: 0, worst_ratio: 0.0 };
    for _ in 0..phi_samples {
        let p = pot.phi(sample(rng));
        if p < pot.c1 * (1.0 - DECAY_SLACK) || p > pot.c2 * (1.0 + DECAY_SLACK) {
            rep.phi_violations += 1;
        }
    }
    let d_cap = match pot.max_degree {
        Some(delta) => d_max.min(delta.saturating_sub(1)),
        None => d_max,
    };
    if d_cap == 0 {
        return rep;
    }
    let mut xs = Vec::with_capacity(d_cap);
    for _ in 0..vectors {
        let d = rng.gen_range(1..=d_cap);
        xs.clear();
        if rng.gen_bool(0.5) {
            let x = sample(rng);
            xs.resize(d, x);
        } else {
            for _ in 0..d {
                xs.push(sample(rng));
            }
        }
        let lam = match pot.kind {
            PotentialKind::Phi1 => pot.lambda,
            _ => pot.lambda * rng.gen_range(0.5..=1.0),
        };
        let rate = decay_rate(pot, &pot.params, lam, &xs).unwrap_or(f64::INFINITY);
        let bound = pot.declared_bound(d);
        rep.worst_ratio = rep.worst_ratio.max(rate / bound);
        if rate > bound * (1.0 + DECAY_SLACK) {
            rep.rate_violations += 1;
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi1_examples() {
        let p = SpinParams::new(2.0, 2.0).unwrap();
        assert!((make_phi1(&p, 3, 1.0).unwrap().alpha - 2.0 / 3.0).abs() < 1e-14);
        let q = SpinParams::new(1.0, 2.0).unwrap();
        assert!((make_phi1(&q, 6, 1.0).unwrap().alpha - 5.0 / delta_c(&q)).abs() < 1e-14);
        assert!(matches!(make_phi1(&q, 7, 1.0), Err(Error::DegreeTooLarge { .. })));
    }

    #[test]
    fn empty_rate_is_zero() {
        let q = SpinParams::new(1.0, 2.0).unwrap();
        let pot = make_phi1(&q, 4, 1.0).unwrap();
        assert_eq!(decay_rate(&pot, &q, 1.0, &[]).unwrap(), 0.0);
    }

    #[test]
    fn g_at_critical_point_is_one() {
        let q = SpinParams::new(1.0, 2.0).unwrap();
        let v = g_lambda(&q, lambda_c(&q), 2f64.sqrt());
        assert!((v - 1.0).abs() < 1e-12);
        assert!(g_lambda(&q, 10.0, 1e-30) < 1e-25);
    }

    #[test]
    fn alpha_lambda_small_field() {
        let q = SpinParams::new(1.0, 2.0).unwrap();
        assert!(compute_alpha_lambda(&q, 1.0).unwrap() < 0.5);
        assert!(compute_alpha_lambda(&q, 11.0).is_err());
    }

    #[test]
    fn concavity_fails_at_beta_one() {
        let q = SpinParams::new(1.0, 2.0).unwrap();
        assert!(matches!(make_phi3_certificate(&q, 10.0), Err(Error::ConcavityFailed { .. })));
    }
}
