//! Serializable reports emitted by the CLI. Every report parses back from
//! its own JSON; floats that may be non-finite are written as `null` and read
//! back as NaN.

use serde::{Deserialize, Deserializer, Serialize};

use twospin_core::experiments::{BeyondReport, FiveSevenReport, LandscapeRow, MixingRun};
use twospin_core::fptas::{ApproxResult, MarginalBounds};
use twospin_core::thresholds::{FixedPointSet, ThresholdReport, Verdict};

use crate::format::{Cell, Table};

fn nan_if_null<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

pub trait Report: Serialize {
    fn table(&self) -> Table;
}

pub fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Unique => "unique",
        Verdict::NonUnique => "non-unique",
        Verdict::Boundary => "boundary",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdsOut {
    pub beta: f64,
    pub gamma: f64,
    pub delta_c: f64,
    pub lambda_c: f64,
    pub lambda_c_int: f64,
    pub lambda_c_int_prime: f64,
    pub integral_delta_c: bool,
}

impl ThresholdsOut {
    pub fn new(beta: f64, gamma: f64, r: &ThresholdReport) -> Self {
        ThresholdsOut {
            beta,
            gamma,
            delta_c: r.delta_c,
            lambda_c: r.lambda_c,
            lambda_c_int: r.lambda_c_int,
            lambda_c_int_prime: r.lambda_c_int_prime,
            integral_delta_c: r.integral_delta_c,
        }
    }
}

impl Report for ThresholdsOut {
    fn table(&self) -> Table {
        let mut t = Table::new(&[
            "beta",
            "gamma",
            "delta_c",
            "lambda_c",
            "lambda_c_int",
            "lambda_c_int_prime",
            "integral_delta_c",
        ]);
        t.push(vec![
            self.beta.into(),
            self.gamma.into(),
            self.delta_c.into(),
            self.lambda_c.into(),
            self.lambda_c_int.into(),
            self.lambda_c_int_prime.into(),
            self.integral_delta_c.into(),
        ]);
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeRowOut {
    pub lambda: f64,
    pub d: u32,
    pub verdict: String,
    pub fixed_points: usize,
    pub g0: Option<f64>,
    pub g1: Option<f64>,
}

impl From<&LandscapeRow> for LandscapeRowOut {
    fn from(r: &LandscapeRow) -> Self {
        LandscapeRowOut {
            lambda: r.lambda,
            d: r.d,
            verdict: verdict_name(r.verdict).into(),
            fixed_points: r.fixed_points,
            g0: r.g0,
            g1: r.g1,
        }
    }
}

/// Used by both `uniqueness` and `experiment landscape`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeOut {
    pub beta: f64,
    pub gamma: f64,
    pub rows: Vec<LandscapeRowOut>,
}

impl Report for LandscapeOut {
    fn table(&self) -> Table {
        let mut t = Table::new(&["lambda", "d", "verdict", "fixed_points", "g0", "g1"]);
        for r in &self.rows {
            t.push(vec![r.lambda.into(), r.d.into(), r.verdict.as_str().into(), r.fixed_points.into(), r.g0.into(), r.g1.into()]);
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointsOut {
    pub beta: f64,
    pub gamma: f64,
    pub lambda: f64,
    /// Child counts of the composed maps, outermost first.
    pub degrees: Vec<f64>,
    pub points: Vec<f64>,
    pub derivatives: Vec<f64>,
    pub tangent: Vec<bool>,
    pub inflection: Option<f64>,
}

impl FixedPointsOut {
    pub fn new(beta: f64, gamma: f64, lambda: f64, degrees: Vec<f64>, s: FixedPointSet) -> Self {
        FixedPointsOut {
            beta,
            gamma,
            lambda,
            degrees,
            points: s.points,
            derivatives: s.derivatives,
            tangent: s.tangent,
            inflection: s.inflection,
        }
    }
}

impl Report for FixedPointsOut {
    fn table(&self) -> Table {
        let mut t = Table::new(&["index", "x", "derivative", "tangent"]);
        for (i, ((&x, &d), &tg)) in self.points.iter().zip(&self.derivatives).zip(&self.tangent).enumerate() {
            t.push(vec![i.into(), x.into(), d.into(), tg.into()]);
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZExactOut {
    #[serde(rename = "logZ")]
    pub log_z: f64,
    pub n: usize,
    pub free: usize,
}

impl Report for ZExactOut {
    fn table(&self) -> Table {
        let mut t = Table::new(&["logZ", "n", "free"]);
        t.push(vec![self.log_z.into(), self.n.into(), self.free.into()]);
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZApproxOut {
    #[serde(rename = "logZ")]
    pub log_z: f64,
    pub eps: f64,
    pub mode: String,
    pub depths: Vec<u32>,
    pub nodes_expanded: u64,
    pub eps_additive: f64,
    pub certified: bool,
}

impl From<&ApproxResult> for ZApproxOut {
    fn from(r: &ApproxResult) -> Self {
        ZApproxOut {
            log_z: r.log_z,
            eps: r.epsilon,
            mode: r.mode.name().into(),
            depths: r.depths.clone(),
            nodes_expanded: r.nodes_expanded,
            eps_additive: r.eps_additive,
            certified: r.certified,
        }
    }
}

impl Report for ZApproxOut {
    fn table(&self) -> Table {
        let mut t = Table::new(&["logZ", "eps", "mode", "max_depth", "nodes_expanded", "certified"]);
        t.push(vec![
            self.log_z.into(),
            self.eps.into(),
            self.mode.as_str().into(),
            self.depths.iter().copied().max().unwrap_or(0).into(),
            self.nodes_expanded.into(),
            self.certified.into(),
        ]);
        t
    }
}

/// Probability of spin 0 at one vertex; exact results have equal bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalOut {
    pub vertex: u32,
    pub method: String,
    pub p_lower: f64,
    pub p_upper: f64,
    pub depth_used: Option<u32>,
    pub nodes_expanded: Option<u64>,
}

impl MarginalOut {
    pub fn exact(vertex: u32, p: f64) -> Self {
        MarginalOut { vertex, method: "exact".into(), p_lower: p, p_upper: p, depth_used: None, nodes_expanded: None }
    }

    pub fn approx(vertex: u32, mb: &MarginalBounds) -> Self {
        MarginalOut {
            vertex,
            method: "approx".into(),
            p_lower: mb.p_lower,
            p_upper: mb.p_upper,
            depth_used: Some(mb.depth_used),
            nodes_expanded: Some(mb.nodes_expanded),
        }
    }
}

impl Report for MarginalOut {
    fn table(&self) -> Table {
        let mut t = Table::new(&["vertex", "method", "p_lower", "p_upper", "depth_used", "nodes_expanded"]);
        t.push(vec![
            self.vertex.into(),
            self.method.as_str().into(),
            self.p_lower.into(),
            self.p_upper.into(),
            self.depth_used.map_or(Cell::Empty, Cell::from),
            self.nodes_expanded.map_or(Cell::Empty, Cell::from),
        ]);
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingOut {
    pub beta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub generator: String,
    pub trials: usize,
    pub ells: Vec<u32>,
    pub discrepancy: Vec<f64>,
    #[serde(deserialize_with = "nan_if_null")]
    pub slope: f64,
    #[serde(deserialize_with = "nan_if_null")]
    pub intercept: f64,
    #[serde(deserialize_with = "nan_if_null")]
    pub r2: f64,
    pub alpha: f64,
    pub base_m: u64,
    pub certified_slope: f64,
}

impl From<&MixingRun> for MixingOut {
    fn from(r: &MixingRun) -> Self {
        MixingOut {
            beta: r.params.beta(),
            gamma: r.params.gamma(),
            lambda: r.lambda,
            generator: r.generator.spec(),
            trials: r.trials,
            ells: r.ells.clone(),
            discrepancy: r.discrepancy.clone(),
            slope: r.slope,
            intercept: r.intercept,
            r2: r.r2,
            alpha: r.alpha,
            base_m: r.base_m,
            certified_slope: r.certified_slope,
        }
    }
}

impl Report for MixingOut {
    fn table(&self) -> Table {
        let mut t = Table::new(&["ell", "discrepancy"]);
        for (&l, &d) in self.ells.iter().zip(&self.discrepancy) {
            t.push(vec![l.into(), d.into()]);
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiveSevenOut {
    pub lambda: f64,
    pub in_interval: bool,
    pub lambda_c: f64,
    pub fixed_points: Vec<f64>,
    pub derivatives: Vec<f64>,
    pub t_sequence: Vec<f64>,
    pub t_prime_sequence: Vec<f64>,
    pub t_limit: f64,
    pub t_prime_limit: f64,
    pub t_iterations: usize,
    pub t_prime_iterations: usize,
    pub t_final_step: f64,
    pub t_prime_final_step: f64,
    pub limit_gap: f64,
    pub separated: bool,
}

impl From<&FiveSevenReport> for FiveSevenOut {
    fn from(r: &FiveSevenReport) -> Self {
        FiveSevenOut {
            lambda: r.lambda,
            in_interval: r.in_interval,
            lambda_c: r.lambda_c,
            fixed_points: r.fixed_points.clone(),
            derivatives: r.derivatives.clone(),
            t_sequence: r.t_sequence.clone(),
            t_prime_sequence: r.t_prime_sequence.clone(),
            t_limit: r.t_limit,
            t_prime_limit: r.t_prime_limit,
            t_iterations: r.t_iterations,
            t_prime_iterations: r.t_prime_iterations,
            t_final_step: r.t_final_step,
            t_prime_final_step: r.t_prime_final_step,
            limit_gap: r.limit_gap(),
            separated: r.separated(),
        }
    }
}

impl Report for FiveSevenOut {
    fn table(&self) -> Table {
        let mut t = Table::new(&["ell", "t", "t_prime"]);
        for (l, (&a, &b)) in self.t_sequence.iter().zip(&self.t_prime_sequence).enumerate() {
            t.push(vec![l.into(), a.into(), b.into()]);
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeMaxOut {
    pub d: u32,
    pub x: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateOut {
    pub lambda: f64,
    pub t3: f64,
    pub concavity_margin: f64,
    pub concavity_chain_bound: f64,
    pub alpha3: f64,
    pub best: DegreeMaxOut,
    pub c0: f64,
    pub c0_argmax: f64,
    pub c1_tail: f64,
    pub c1_argmax: u32,
    pub kappa: f64,
    pub eta: f64,
    pub alpha: f64,
    pub base_m: u64,
    pub tail_exponent_limit: f64,
    pub per_degree_max: Vec<DegreeMaxOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeyondRunOut {
    pub n: usize,
    pub edges: usize,
    #[serde(rename = "logZ")]
    pub log_z: f64,
    #[serde(rename = "oracle_logZ")]
    pub oracle_log_z: f64,
    pub nodes_expanded: u64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeyondOut {
    pub beta: f64,
    pub gamma: f64,
    pub lambda_c: f64,
    pub eps: f64,
    pub certificate: CertificateOut,
    pub runs: Vec<BeyondRunOut>,
}

impl BeyondOut {
    pub fn new(beta: f64, gamma: f64, r: &BeyondReport) -> Self {
        let c = &r.certificate;
        let dm = |m: &twospin_core::potentials::DegreeMax| DegreeMaxOut { d: m.d, x: m.x, value: m.value };
        BeyondOut {
            beta,
            gamma,
            lambda_c: r.lambda_c,
            eps: r.epsilon,
            certificate: CertificateOut {
                lambda: c.lambda,
                t3: c.t3,
                concavity_margin: c.concavity_margin,
                concavity_chain_bound: c.concavity_chain_bound,
                alpha3: c.alpha3,
                best: dm(&c.best),
                c0: c.c0,
                c0_argmax: c.c0_argmax,
                c1_tail: c.c1_tail,
                c1_argmax: c.c1_argmax,
                kappa: c.kappa,
                eta: c.eta,
                alpha: c.alpha,
                base_m: c.base_m,
                tail_exponent_limit: c.tail_exponent_limit,
                per_degree_max: c.per_degree_max.iter().map(dm).collect(),
            },
            runs: r
                .runs
                .iter()
                .map(|x| BeyondRunOut {
                    n: x.n,
                    edges: x.edges,
                    log_z: x.log_z,
                    oracle_log_z: x.oracle_log_z,
                    nodes_expanded: x.nodes_expanded,
                    within: x.within,
                })
                .collect(),
        }
    }
}

impl Report for BeyondOut {
    fn table(&self) -> Table {
        let mut t = Table::new(&["n", "edges", "logZ", "oracle_logZ", "nodes_expanded", "within"]);
        for r in &self.runs {
            t.push(vec![
                r.n.into(),
                r.edges.into(),
                r.log_z.into(),
                r.oracle_log_z.into(),
                r.nodes_expanded.into(),
                r.within.into(),
            ]);
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalSweepOut {
    pub beta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub trials: usize,
    pub vertices_checked: usize,
    pub bound: f64,
    pub max_marginal: f64,
    pub violations: usize,
}

impl Report for MarginalSweepOut {
    fn table(&self) -> Table {
        let mut t =
            Table::new(&["beta", "gamma", "lambda", "trials", "vertices_checked", "bound", "max_marginal", "violations"]);
        t.push(vec![
            self.beta.into(),
            self.gamma.into(),
            self.lambda.into(),
            self.trials.into(),
            self.vertices_checked.into(),
            self.bound.into(),
            self.max_marginal.into(),
            self.violations.into(),
        ]);
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomClusterOut {
    pub pairs: usize,
    pub max_rel_error: f64,
}

impl Report for RandomClusterOut {
    fn table(&self) -> Table {
        let mut t = Table::new(&["pairs", "max_rel_error"]);
        t.push(vec![self.pairs.into(), self.max_rel_error.into()]);
        t
    }
}

/// Root marginal of an explicit tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeMarginalOut {
    pub nodes: usize,
    #[serde(deserialize_with = "nan_if_null")]
    pub ratio: f64,
    pub p_zero: f64,
}

impl Report for TreeMarginalOut {
    fn table(&self) -> Table {
        let mut t = Table::new(&["nodes", "ratio", "p_zero"]);
        t.push(vec![self.nodes.into(), self.ratio.into(), self.p_zero.into()]);
        t
    }
}
