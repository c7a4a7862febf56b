//! Deterministic approximation of marginals and of the partition function.
//!
//! A marginal is bracketed by evaluating the SAW tree to a finite horizon
//! with trivial bounds `[0, inf]` beyond it. The horizon is chosen from the
//! potential's contraction data so that the predicted gap meets the target;
//! the realised gap is always checked and the horizon deepened if needed.
//! The partition function follows by pinning vertices one at a time.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std when another crate links it
use num_traits::Float;

use crate::error::{Error, Result};
use crate::numeric::{ceil_log, KahanSum};
use crate::potentials::{make_phi1_fields, make_phi2, Potential};
use crate::saw::{saw_bounds, DEFAULT_BUDGET};
use crate::spin::{weight, Configuration, Spin, SpinSystem, VertexId};
use crate::thresholds::lambda_c;
use crate::tree::Horizon;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Bounded degree, `Delta < delta_c + 1`, potential `ln x`.
    Bounded,
    /// `beta <= 1 < gamma` and every field below `lambda_c`.
    Universal,
    Auto,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Bounded => "bounded",
            Mode::Universal => "universal",
            Mode::Auto => "auto",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxRequest {
    pub system: SpinSystem,
    pub epsilon: f64,
    pub mode: Mode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalBounds {
    /// Bounds on `Pr(sigma(v) = 0)`.
    pub p_lower: f64,
    pub p_upper: f64,
    /// Bounds on `Pr(sigma(v) = 1)`, computed without cancellation.
    pub q_lower: f64,
    pub q_upper: f64,
    pub depth_used: u32,
    pub nodes_expanded: u64,
    /// The depth predicted from the contraction data sufficed.
    pub certified: bool,
}

impl MarginalBounds {
    pub fn gap(&self) -> f64 {
        self.p_upper - self.p_lower
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxResult {
    pub log_z: f64,
    pub mode: Mode,
    pub epsilon: f64,
    pub eps_additive: f64,
    pub depths: Vec<u32>,
    pub nodes_expanded: u64,
    pub certified: bool,
}

/// Constant `C` in the predicted root gap `C * lambda * alpha^t` for a root
/// with `degree_hint` children.
///
/// It multiplies the root-step factor `d0 (beta gamma - 1)/gamma max(beta,1)^d0`,
/// the conversion `1/c1` from potential gaps to ratio gaps, the potential
/// gap at the truncation boundary, and one power of `alpha^-1`
/// (`alpha^(1 - ceil(log_M(d0+1)))` for universal potentials).
pub fn depth_constant(pot: &Potential, degree_hint: usize) -> f64 {
    let p = pot.params;
    let (b, g) = (p.beta(), p.gamma());
    let d0 = degree_hint as f64;
    let root = d0 * (b * g - 1.0) / g * b.max(1.0).powf(d0);
    match pot.base_m {
        None => root * pot.gap_bound(pot.domain.0, pot.domain.1) / (pot.c1 * pot.alpha),
        Some(m) => {
            let k0 = ceil_log(m, degree_hint as u64 + 1) as i32;
            root * pot.c2 * pot.lambda / pot.c1 * pot.alpha.powi(1 - k0)
        }
    }
}

/// Smallest `t` with `depth_constant * lambda * alpha^t <= eps_additive`.
pub fn select_depth(pot: &Potential, lambda: f64, eps_additive: f64, degree_hint: usize) -> u32 {
    let c = depth_constant(pot, degree_hint) * lambda;
    if c <= eps_additive {
        return 0;
    }
    if pot.alpha <= 0.0 {
        return 1;
    }
    let t = (c / eps_additive).ln() / (1.0 / pot.alpha).ln();
    if t >= (u32::MAX / 2) as f64 {
        u32::MAX / 2
    } else {
        t.ceil() as u32
    }
}

fn horizon_for(pot: &Potential, t: u32) -> Horizon {
    match pot.base_m {
        Some(base) => Horizon::MBasedPadded { base, ell: t },
        None => Horizon::Depth(t),
    }
}

/// Brackets `Pr(sigma(v) = 0)` to additive width `eps_additive`.
pub fn approx_marginal(system: &SpinSystem, v: VertexId, eps_additive: f64, pot: &Potential) -> Result<MarginalBounds> {
    if system.pin_of(v).is_some() {
        return Err(Error::VertexPinned(v));
    }
    let hint = system.degree(v)?;
    let mut t = select_depth(pot, system.lambda_max(), eps_additive, hint);
    let mut certified = true;
    loop {
        let sb = saw_bounds(system, v, horizon_for(pot, t), DEFAULT_BUDGET)?;
        let (lo, hi) = (sb.bounds.lower, sb.bounds.upper);
        let mb = MarginalBounds {
            p_lower: lo.prob_zero(),
            p_upper: hi.prob_zero(),
            q_lower: hi.prob_one(),
            q_upper: lo.prob_one(),
            depth_used: t,
            nodes_expanded: sb.nodes,
            certified,
        };
        if mb.gap() <= eps_additive || !sb.truncated {
            return Ok(mb);
        }
        certified = false;
        t = t.saturating_add((t / 2).max(1));
    }
}

fn bounded_potential(system: &SpinSystem) -> Result<Potential> {
    make_phi1_fields(&system.params(), system.max_degree(), system.lambda_min(), system.lambda_max())
}

fn universal_potential(system: &SpinSystem) -> Result<Potential> {
    let p = system.params();
    if !(p.beta() <= 1.0 && 1.0 < p.gamma()) {
        return Err(Error::RegimeViolation(format!(
            "universal mode needs beta <= 1 < gamma (beta={}, gamma={})",
            p.beta(),
            p.gamma()
        )));
    }
    let lc = lambda_c(&p);
    let lmax = system.lambda_max();
    if !(lmax < lc) {
        return Err(Error::RegimeViolation(format!(
            "lambda {lmax} >= lambda_c {lc}: universal mode unavailable"
        )));
    }
    make_phi2(&p, lmax)
}

/// Picks the regime and its potential. `Auto` prefers bounded mode.
pub fn regime_potential(system: &SpinSystem, mode: Mode) -> Result<(Mode, Potential)> {
    system.require_positive_fields()?;
    match mode {
        Mode::Bounded => Ok((Mode::Bounded, bounded_potential(system)?)),
        Mode::Universal => Ok((Mode::Universal, universal_potential(system)?)),
        Mode::Auto => match bounded_potential(system) {
            Ok(p) => Ok((Mode::Bounded, p)),
            Err(be) => match universal_potential(system) {
                Ok(p) => Ok((Mode::Universal, p)),
                Err(ue) => {
                    let mut msg = String::new();
                    msg.push_str(&format!("bounded: {be}; universal: {ue}"));
                    Err(Error::RegimeViolation(msg))
                }
            },
        },
    }
}

/// `log Z` within relative error `epsilon`.
pub fn approx_partition(req: &ApproxRequest) -> Result<ApproxResult> {
    let (mode, pot) = regime_potential(&req.system, req.mode)?;
    approx_partition_with(&req.system, req.epsilon, &pot, mode)
}

/// Self-reducibility with an explicit potential.
///
/// Each free vertex in turn receives the spin whose bracketed probability
/// has the larger midpoint; the per-step additive target
/// `min(epsilon/(3n), 1/12)` keeps the product of midpoints within a factor
/// `1 + epsilon` of the true configuration probability.
pub fn approx_partition_with(system: &SpinSystem, epsilon: f64, pot: &Potential, mode: Mode) -> Result<ApproxResult> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::ParametersOutOfRange(format!("epsilon {epsilon} must lie in (0, 1)")));
    }
    system.require_positive_fields()?;
    let free = system.free_ids();
    let n = free.len().max(1);
    let eps_add = (epsilon / (3.0 * n as f64)).min(1.0 / 12.0);
    let mut cur = system.clone();
    let mut log_p = KahanSum::default();
    let mut depths = Vec::with_capacity(free.len());
    let mut nodes = 0u64;
    let mut certified = true;
    for v in free {
        let mb = approx_marginal(&cur, v, eps_add, pot)?;
        let m0 = 0.5 * (mb.p_lower + mb.p_upper);
        let m1 = 0.5 * (mb.q_lower + mb.q_upper);
        let (spin, p) = if m0 >= m1 { (Spin::Zero, m0) } else { (Spin::One, m1) };
        log_p.add(p.ln());
        depths.push(mb.depth_used);
        nodes += mb.nodes_expanded;
        certified &= mb.certified;
        cur = cur.with_pin(v, spin)?;
    }
    let sigma = Configuration::from_map(&cur, cur.pins())?;
    let w = weight(&cur, &sigma)?;
    Ok(ApproxResult {
        log_z: w.log_weight - log_p.value(),
        mode,
        epsilon,
        eps_additive: eps_add,
        depths,
        nodes_expanded: nodes,
        certified,
    })
}
