//! Critical degree and fields, fixed points of the symmetric recursion and
//! uniqueness verdicts on regular trees.

#[allow(unused_imports)] // shadowed by std when another crate links it
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;


use crate::error::{Error, Result};
use crate::numeric::bisect;
use crate::spin::SpinParams;
use crate::tree::{eval_f, eval_f_prime};

/// `(sqrt(beta gamma) + 1)/(sqrt(beta gamma) - 1)`.
pub fn delta_c(params: &SpinParams) -> f64 {
    let s = (params.beta() * params.gamma()).sqrt();
    (s + 1.0) / (s - 1.0)
}

/// `(gamma/beta)^((delta_c + 1)/2)`.
pub fn lambda_c(params: &SpinParams) -> f64 {
    (params.gamma() / params.beta()).powf((delta_c(params) + 1.0) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdReport {
    pub delta_c: f64,
    pub lambda_c: f64,
    /// `(gamma/beta)^((ceil(delta_c)+1)/2)`.
    pub lambda_c_int: f64,
    /// `(gamma/beta)^((floor(delta_c)+2)/2)`.
    pub lambda_c_int_prime: f64,
    /// `delta_c` is an integer, where the two integral fields differ.
    pub integral_delta_c: bool,
}

/// Relative tolerance under which `delta_c` counts as an integer.
pub const INTEGRAL_TOL: f64 = 1e-12;

pub fn compute_thresholds(params: &SpinParams) -> Result<ThresholdReport> {
    params.require_beta_le_gamma()?;
    let dc = delta_c(params);
    let ratio = params.gamma() / params.beta();
    let near = dc.round();
    let integral = (dc - near).abs() <= INTEGRAL_TOL * dc;
    let (ceil, floor) = if integral { (near, near) } else { (dc.ceil(), dc.floor()) };
    Ok(ThresholdReport {
        delta_c: dc,
        lambda_c: lambda_c(params),
        lambda_c_int: ratio.powf((ceil + 1.0) / 2.0),
        lambda_c_int_prime: ratio.powf((floor + 2.0) / 2.0),
        integral_delta_c: integral,
    })
}

/// Roots `x0 <= x1` of `beta x^2 + ((beta gamma + 1) - d(beta gamma - 1)) x + gamma`,
/// the points where `f_d'(x) = f_d(x)/x`. Their product is `gamma/beta`.
/// `None` below `delta_c`.
pub fn critical_x_pair(params: &SpinParams, d: f64) -> Option<(f64, f64)> {
    let (b, g) = (params.beta(), params.gamma());
    let dc = delta_c(params);
    let xhat = (g / b).sqrt();
    if (d - dc).abs() <= 1e-12 * dc {
        return Some((xhat, xhat));
    }
    if d < dc {
        return None;
    }
    let bb = (b * g + 1.0) - d * (b * g - 1.0);
    let disc = (bb * bb - 4.0 * b * g).max(0.0);
    // bb < 0 here, so -bb + sqrt(disc) has no cancellation.
    let x1 = (-bb + disc.sqrt()) / (2.0 * b);
    Some(((g / b) / x1, x1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointSet {
    pub points: Vec<f64>,
    pub derivatives: Vec<f64>,
    pub tangent: Vec<bool>,
    /// Inflection point of `f_d` when it lies in `(0, inf)`.
    pub inflection: Option<f64>,
}

/// `|f'(x) - 1|` below this flags a tangent fixed point.
pub const TANGENCY_TOL: f64 = 1e-8;
/// `|ln f(x) - ln x|` below this counts as zero at the critical points.
pub const SIGN_TOL: f64 = 1e-12;

fn sign(v: f64) -> i8 {
    if v.abs() <= SIGN_TOL {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

fn root_of<Q: Fn(f64) -> f64>(q: &Q, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        if q(a) >= 0.0 {
            break;
        }
        a *= 0.5;
    }
    for _ in 0..200 {
        if q(b) <= 0.0 {
            break;
        }
        b *= 2.0;
    }
    bisect(q, a, b, 1e-15)
}

/// All solutions of `f_d(x) = x`.
///
/// Works with `q(x) = ln f_d(x) - ln x`, which decreases on `(0, x0)`,
/// increases on `(x0, x1)` and decreases on `(x1, inf)`; each monotone piece
/// holds at most one root.
pub fn fixed_points(params: &SpinParams, lambda: f64, d: f64) -> FixedPointSet {
    let (b, g) = (params.beta(), params.gamma());
    let q = |x: f64| lambda.ln() + d * params.factor(x).ln() - x.ln();
    let lo = lambda * g.powf(-d);
    let hi = lambda * b.powf(d);
    let mut pts = Vec::new();
    match critical_x_pair(params, d) {
        Some((x0, x1)) if x0 < x1 => {
            let s0 = sign(q(x0));
            let s1 = sign(q(x1));
            if s0 < 0 {
                pts.push(root_of(&q, lo.min(x0), x0));
            } else if s0 == 0 {
                pts.push(x0);
            }
            if s0 < 0 && s1 > 0 {
                pts.push(bisect(q, x0, x1, 1e-15));
            }
            if s1 == 0 {
                pts.push(x1);
            } else if s1 > 0 {
                pts.push(root_of(&q, x1, hi.max(x1)));
            }
        }
        _ => pts.push(root_of(&q, lo, hi)),
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let derivatives: Vec<f64> = pts.iter().map(|&x| eval_f_prime(params, lambda, d, x)).collect();
    let tangent = derivatives.iter().map(|&f| (f - 1.0).abs() < TANGENCY_TOL).collect();
    let xs = (d * (b * g - 1.0) - (b * g + 1.0)) / (2.0 * b);
    FixedPointSet { points: pts, derivatives, tangent, inflection: (xs > 0.0).then_some(xs) }
}

/// `f_{d_1} o f_{d_2} o ... o f_{d_k}` (rightmost applied first).
pub fn compose(params: &SpinParams, lambda: f64, degrees: &[f64], x: f64) -> f64 {
    degrees.iter().rev().fold(x, |acc, &d| eval_f(params, lambda, d, acc))
}

/// Derivative of [`compose`] by the chain rule.
pub fn compose_prime(params: &SpinParams, lambda: f64, degrees: &[f64], x: f64) -> f64 {
    let mut acc = x;
    let mut der = 1.0;
    for &d in degrees.iter().rev() {
        der *= eval_f_prime(params, lambda, d, acc);
        acc = eval_f(params, lambda, d, acc);
    }
    der
}

/// Grid resolution used by [`composed_fixed_points`].
pub const COMPOSED_GRID: usize = 20_000;

/// Fixed points of a composition of symmetric maps, found by scanning a
/// log-spaced grid for sign changes of `ln g(x) - ln x` and bisecting each.
/// Tangent roots that do not change sign can be missed.
pub fn composed_fixed_points(params: &SpinParams, lambda: f64, degrees: &[f64]) -> FixedPointSet {
    let (b, g) = (params.beta(), params.gamma());
    let d0 = degrees.first().copied().unwrap_or(0.0);
    let lo = lambda * b.min(1.0 / g).powf(d0) * 0.5;
    let hi = lambda * b.max(1.0 / g).max(1.0).powf(d0) * 2.0;
    let q = |x: f64| compose(params, lambda, degrees, x).ln() - x.ln();
    let (llo, lhi) = (lo.ln(), hi.ln());
    let at = |k: usize| (llo + (lhi - llo) * k as f64 / COMPOSED_GRID as f64).exp();
    let mut pts = Vec::new();
    let mut prev = (at(0), q(at(0)));
    for k in 1..=COMPOSED_GRID {
        let x = at(k);
        let v = q(x);
        if v == 0.0 {
            pts.push(x);
        } else if prev.1 != 0.0 && (v > 0.0) != (prev.1 > 0.0) {
            pts.push(bisect(q, prev.0, x, 1e-15));
        }
        prev = (x, v);
    }
    let derivatives: Vec<f64> = pts.iter().map(|&x| compose_prime(params, lambda, degrees, x)).collect();
    let tangent = derivatives.iter().map(|&f| (f - 1.0).abs() < TANGENCY_TOL).collect();
    FixedPointSet { points: pts, derivatives, tangent, inflection: None }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Unique,
    NonUnique,
    Boundary,
}

/// Which root of the critical pair a boundary field is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `x0`, giving `g_0`.
    Lower,
    /// `x1`, giving `g_1`.
    Upper,
}

/// `g_i(d) = x_i ((x_i + gamma)/(beta x_i + 1))^d`: the field at which `x_i`
/// is a tangent fixed point of `f_d`.
pub fn boundary_field(params: &SpinParams, d: f64, branch: Branch) -> Result<f64> {
    let dc = delta_c(params);
    let (x0, x1) = critical_x_pair(params, d).ok_or(Error::DegreeBelowCritical { d, delta_c: dc })?;
    let x = match branch {
        Branch::Lower => x0,
        Branch::Upper => x1,
    };
    Ok(x * (1.0 / params.factor(x)).powf(d))
}

/// Relative distance to `g_0` or `g_1` reported as [`Verdict::Boundary`].
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Gibbs uniqueness on the infinite `d`-regular tree, whose recursion uses
/// `d - 1` children. Unique iff `d - 1 < delta_c`, or `lambda > g_0(d-1)`, or
/// `lambda < g_1(d-1)`.
pub fn uniqueness_at_degree(params: &SpinParams, lambda: f64, d: u32) -> Result<Verdict> {
    params.require_beta_le_gamma()?;
    if d < 2 {
        return Err(Error::ParametersOutOfRange("tree degree must be at least 2".into()));
    }
    let k = (d - 1) as f64;
    if k < delta_c(params) {
        return Ok(Verdict::Unique);
    }
    let g0 = boundary_field(params, k, Branch::Lower)?;
    let g1 = boundary_field(params, k, Branch::Upper)?;
    if (lambda - g0).abs() <= BOUNDARY_TOL * g0 || (lambda - g1).abs() <= BOUNDARY_TOL * g1 {
        return Ok(Verdict::Boundary);
    }
    Ok(if lambda > g0 || lambda < g1 { Verdict::Unique } else { Verdict::NonUnique })
}

/// Tree degrees in `2..=d_max` where uniqueness fails or is borderline.
pub fn non_unique_degrees(params: &SpinParams, lambda: f64, d_max: u32) -> Result<Vec<u32>> {
    let mut out = vec![];
    for d in 2..=d_max {
        if uniqueness_at_degree(params, lambda, d)? != Verdict::Unique {
            out.push(d);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ising_three() {
        let p = SpinParams::new(3.0, 3.0).unwrap();
        let r = compute_thresholds(&p).unwrap();
        assert!((r.delta_c - 2.0).abs() < 1e-14);
        assert!(r.integral_delta_c);
        assert!((r.lambda_c - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pair_below_at_and_above_critical() {
        let p = SpinParams::new(1.0, 2.0).unwrap();
        assert!(critical_x_pair(&p, 2.0).is_none());
        let (a, b) = critical_x_pair(&p, delta_c(&p)).unwrap();
        assert_eq!(a, b);
        let (x0, x1) = critical_x_pair(&p, 7.0).unwrap();
        assert!(x0 < x1);
        assert!((x0 * x1 - 2.0).abs() < 1e-12);
        for x in [x0, x1] {
            assert!((x * x + (3.0 - 7.0) * x + 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn degree_two_has_one_point() {
        let p = SpinParams::new(1.0, 2.0).unwrap();
        for lam in [0.1, 1.0, 10.98, 500.0] {
            assert_eq!(fixed_points(&p, lam, 2.0).points.len(), 1);
        }
    }

    #[test]
    fn trivial_uniqueness() {
        let p = SpinParams::new(1.0, 2.0).unwrap();
        assert_eq!(uniqueness_at_degree(&p, 1e6, 2).unwrap(), Verdict::Unique);
        assert!(boundary_field(&p, 2.0, Branch::Upper).is_err());
    }
}
