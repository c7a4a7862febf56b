//! Numerical experiments: spatial-mixing decay on random trees, the 5-7
//! alternating tree, the large-field example beyond `lambda_c`, threshold
//! sweeps and the random-cluster identity check.

#[allow(unused_imports)] // shadowed by std when another crate links it
use num_traits::Float;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::fptas::{approx_partition_with, Mode};
use crate::graphs;
use crate::numeric::{ceil_log, linear_fit, signed_log_sum, SignedLog};
use crate::potentials::{compute_alpha_lambda, make_phi3_certificate, select_base_m, Phi3Certificate, Potential};
use crate::spin::{exact_partition, exact_partition_signed, random_cluster_split, SpinParams, SpinSystem};
use crate::thresholds::{
    boundary_field, composed_fixed_points, delta_c, fixed_points, lambda_c, uniqueness_at_degree, Branch, Verdict,
};
use crate::tree::eval_f;

/// Random trees described level by level: each level holds `types` node
/// types, each type has a uniform number of children in `[0, d_max]` drawn
/// from the next level. The root is type 0 of level 0 and nodes at level
/// `height` are leaves. This gives trees of exponential size whose ratios
/// cost `O(height * types * d_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayeredGenerator {
    pub types: usize,
    pub d_max: u32,
    pub height: u32,
}

impl Default for LayeredGenerator {
    fn default() -> Self {
        LayeredGenerator { types: 64, d_max: 8, height: 34 }
    }
}

impl LayeredGenerator {
    /// `layered[:types=K][:dmax=D][:height=H]`.
    pub fn parse(s: &str) -> Result<Self> {
        let err = || Error::Parse(format!("bad generator spec '{s}'"));
        let mut parts = s.split(':');
        if parts.next() != Some("layered") {
            return Err(err());
        }
        let mut g = LayeredGenerator::default();
        for p in parts {
            let (k, v) = p.split_once('=').ok_or_else(err)?;
            let v: usize = v.parse().map_err(|_| err())?;
            match k {
                "types" if v > 0 => g.types = v,
                "dmax" => g.d_max = v as u32,
                "height" => g.height = v as u32,
                _ => return Err(err()),
            }
        }
        Ok(g)
    }

    pub fn spec(&self) -> String {
        format!("layered:types={}:dmax={}:height={}", self.types, self.d_max, self.height)
    }

    fn sample_levels<R: Rng + ?Sized>(&self, rng: &mut R, levels: &mut [Vec<Vec<u32>>]) {
        for lvl in levels.iter_mut() {
            *lvl = (0..self.types)
                .map(|_| {
                    let k = rng.gen_range(0..=self.d_max);
                    (0..k).map(|_| rng.gen_range(0..self.types as u32)).collect()
                })
                .collect();
        }
    }
}

fn layered_root_ratio(params: &SpinParams, lambda: f64, levels: &[Vec<Vec<u32>>], types: usize) -> f64 {
    let mut vals = vec![lambda; types];
    let mut next = vec![0.0; types];
    for lvl in levels.iter().rev() {
        for (k, kids) in lvl.iter().enumerate() {
            next[k] = kids.iter().fold(lambda, |r, &c| r * params.factor(vals[c as usize]));
        }
        core::mem::swap(&mut vals, &mut next);
    }
    vals[0]
}

/// Largest `|p_v - p_v'|` over `trials` tree pairs that agree on their first
/// `ell` levels.
pub fn mixing_discrepancy<R: Rng + ?Sized>(
    params: &SpinParams,
    lambda: f64,
    gen: &LayeredGenerator,
    ell: u32,
    trials: usize,
    rng: &mut R,
) -> f64 {
    let h = gen.height as usize;
    let shared = (ell as usize).min(h);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let mut a = vec![Vec::new(); h];
        gen.sample_levels(rng, &mut a[..shared]);
        let mut b = a.clone();
        gen.sample_levels(rng, &mut a[shared..]);
        gen.sample_levels(rng, &mut b[shared..]);
        let ra = layered_root_ratio(params, lambda, &a, gen.types);
        let rb = layered_root_ratio(params, lambda, &b, gen.types);
        worst = worst.max((ra / (1.0 + ra) - rb / (1.0 + rb)).abs());
    }
    worst
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingRun {
    pub params: SpinParams,
    pub lambda: f64,
    pub generator: LayeredGenerator,
    pub trials: usize,
    pub ells: Vec<u32>,
    pub discrepancy: Vec<f64>,
    /// Least-squares fit of `ln discrepancy` against `ell`, over the
    /// positive entries.
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub alpha: f64,
    pub base_m: u64,
    /// `ln alpha / ceil(log_M(d_max + 1))`: the per-level rate the universal
    /// potential certifies.
    pub certified_slope: f64,
}

impl MixingRun {
    pub fn from_points(
        params: SpinParams,
        lambda: f64,
        generator: LayeredGenerator,
        trials: usize,
        ells: Vec<u32>,
        discrepancy: Vec<f64>,
    ) -> Result<Self> {
        params.require_beta_le_gamma()?;
        let alpha = compute_alpha_lambda(&params, lambda)?;
        let base_m = select_base_m(&params, lambda, alpha)?.m;
        let steps = ceil_log(base_m as f64, generator.d_max as u64 + 1).max(1);
        let (xs, ys): (Vec<f64>, Vec<f64>) = ells
            .iter()
            .zip(&discrepancy)
            .filter(|(_, &d)| d > 0.0)
            .map(|(&l, &d)| (l as f64, d.ln()))
            .unzip();
        let (slope, intercept, r2) =
            if xs.len() >= 2 { linear_fit(&xs, &ys) } else { (f64::NAN, f64::NAN, f64::NAN) };
        Ok(MixingRun {
            params,
            lambda,
            generator,
            trials,
            ells,
            discrepancy,
            slope,
            intercept,
            r2,
            alpha,
            base_m,
            certified_slope: alpha.ln() / steps as f64,
        })
    }
}

/// Runs [`mixing_discrepancy`] for every `ell`, drawing randomness for each
/// from `rng_for(ell)` so that points can also be computed independently.
pub fn mixing_decay<R: Rng, F: FnMut(u32) -> R>(
    params: &SpinParams,
    lambda: f64,
    gen: &LayeredGenerator,
    ells: &[u32],
    trials: usize,
    mut rng_for: F,
) -> Result<MixingRun> {
    params.require_beta_le_gamma()?;
    let disc = ells.iter().map(|&l| mixing_discrepancy(params, lambda, gen, l, trials, &mut rng_for(l))).collect();
    MixingRun::from_points(*params, lambda, *gen, trials, ells.to_vec(), disc)
}

/// Interval of fields quoted for three fixed points of `f_5 o f_7`.
pub const FIVE_SEVEN_INTERVAL: (f64, f64) = (10.9759, 10.9965);
/// Number of sequence entries kept in the report.
pub const FIVE_SEVEN_RECORD: usize = 30;
pub const FIVE_SEVEN_STEP_TOL: f64 = 1e-13;
pub const FIVE_SEVEN_MAX_ITER: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct FiveSevenReport {
    pub lambda: f64,
    pub in_interval: bool,
    pub lambda_c: f64,
    pub fixed_points: Vec<f64>,
    pub derivatives: Vec<f64>,
    /// Root ratio of the alternating tree of depth `2 ell`, `ell = 0, 1, ...`.
    pub t_sequence: Vec<f64>,
    /// Same with 50 extra leaves under every deepest node.
    pub t_prime_sequence: Vec<f64>,
    pub t_limit: f64,
    pub t_prime_limit: f64,
    pub t_iterations: usize,
    pub t_prime_iterations: usize,
    pub t_final_step: f64,
    pub t_prime_final_step: f64,
}

impl FiveSevenReport {
    pub fn limit_gap(&self) -> f64 {
        (self.t_limit - self.t_prime_limit).abs()
    }

    /// Limits differ by more than ten times the last movement of either
    /// sequence.
    pub fn separated(&self) -> bool {
        self.limit_gap() > 10.0 * self.t_final_step.max(self.t_prime_final_step)
    }
}

fn iterate_to_limit<H: Fn(f64) -> f64>(h: H, start: f64) -> (Vec<f64>, f64, usize, f64) {
    let mut seq = vec![start];
    let mut x = start;
    let mut step = f64::INFINITY;
    let mut it = 0;
    while it < FIVE_SEVEN_MAX_ITER {
        let y = h(x);
        step = (y - x).abs();
        x = y;
        it += 1;
        if seq.len() < FIVE_SEVEN_RECORD + 1 {
            seq.push(x);
        }
        if step < FIVE_SEVEN_STEP_TOL * x {
            break;
        }
    }
    (seq, x, it, step)
}

/// Alternating 5/7 tree at `beta = 1, gamma = 2`. Layers are symmetric, so
/// the depth-`2 ell` root ratio is `(f_5 o f_7)^ell` applied to the leaf
/// value: `lambda` for the plain tree, `f_50(lambda)` with the extra layer.
pub fn five_seven_demo(lambda: f64) -> Result<FiveSevenReport> {
    let params = SpinParams::new(1.0, 2.0)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::ParametersOutOfRange(format!("lambda {lambda} must be positive")));
    }
    let degrees = [5.0, 7.0];
    let fps = composed_fixed_points(&params, lambda, &degrees);
    let h = |x: f64| eval_f(&params, lambda, 5.0, eval_f(&params, lambda, 7.0, x));
    let (ts, tl, ti, tstep) = iterate_to_limit(h, lambda);
    let (ps, pl, pi, pstep) = iterate_to_limit(h, eval_f(&params, lambda, 50.0, lambda));
    Ok(FiveSevenReport {
        lambda,
        in_interval: (FIVE_SEVEN_INTERVAL.0..=FIVE_SEVEN_INTERVAL.1).contains(&lambda),
        lambda_c: lambda_c(&params),
        fixed_points: fps.points,
        derivatives: fps.derivatives,
        t_sequence: ts,
        t_prime_sequence: ps,
        t_limit: tl,
        t_prime_limit: pl,
        t_iterations: ti,
        t_prime_iterations: pi,
        t_final_step: tstep,
        t_prime_final_step: pstep,
    })
}

pub const BEYOND_BETA: f64 = 0.6;
pub const BEYOND_GAMMA: f64 = 2.0;
pub const BEYOND_LAMBDA: f64 = 1_002_762.0;

#[derive(Debug, Clone, PartialEq)]
pub struct BeyondRun {
    pub n: usize,
    pub edges: usize,
    pub log_z: f64,
    pub oracle_log_z: f64,
    pub nodes_expanded: u64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeyondReport {
    pub lambda_c: f64,
    pub certificate: Phi3Certificate,
    pub epsilon: f64,
    pub runs: Vec<BeyondRun>,
}

/// One random graph with `n_range.0..=n_range.1` vertices at the
/// large-field parameters, approximated with `pot` and compared to the oracle.
pub fn beyond_lambda_c_instance<R: Rng + ?Sized>(
    pot: &Potential,
    n_range: (usize, usize),
    epsilon: f64,
    rng: &mut R,
) -> Result<BeyondRun> {
    let n = rng.gen_range(n_range.0..=n_range.1);
    let p = rng.gen_range(1.5..3.0) / n as f64;
    let edges = graphs::erdos_renyi(rng, n, p);
    let sys = SpinSystem::uniform(pot.params, n, BEYOND_LAMBDA, edges)?;
    let r = approx_partition_with(&sys, epsilon, pot, Mode::Universal)?;
    let oracle = exact_partition(&sys)?;
    Ok(BeyondRun {
        n,
        edges: sys.edges().len(),
        log_z: r.log_z,
        oracle_log_z: oracle,
        nodes_expanded: r.nodes_expanded,
        within: (r.log_z - oracle).abs() <= epsilon.ln_1p(),
    })
}

/// Certificate for the chopped third potential at `beta = 0.6, gamma = 2`,
/// `lambda = 1002762 > lambda_c`.
pub fn beyond_lambda_c_certificate() -> Result<(SpinParams, Phi3Certificate)> {
    let params = SpinParams::new(BEYOND_BETA, BEYOND_GAMMA)?;
    Ok((params, make_phi3_certificate(&params, BEYOND_LAMBDA)?))
}

/// The certificate followed by `instances` oracle comparisons.
pub fn beyond_lambda_c_demo<R: Rng + ?Sized>(
    instances: usize,
    n_range: (usize, usize),
    epsilon: f64,
    rng: &mut R,
) -> Result<BeyondReport> {
    let (params, cert) = beyond_lambda_c_certificate()?;
    let pot = cert.potential(&params);
    let runs = (0..instances).map(|_| beyond_lambda_c_instance(&pot, n_range, epsilon, rng)).collect::<Result<_>>()?;
    Ok(BeyondReport { lambda_c: lambda_c(&params), certificate: cert, epsilon, runs })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapeRow {
    pub lambda: f64,
    /// Degree of the infinite regular tree; the recursion has `d - 1` children.
    pub d: u32,
    pub verdict: Verdict,
    pub fixed_points: usize,
    /// Boundary fields at `d - 1` children; absent below the critical degree.
    pub g0: Option<f64>,
    pub g1: Option<f64>,
}

pub fn threshold_landscape(params: &SpinParams, lambdas: &[f64], ds: &[u32]) -> Result<Vec<LandscapeRow>> {
    params.require_beta_le_gamma()?;
    let dc = delta_c(params);
    let mut rows = Vec::with_capacity(lambdas.len() * ds.len());
    for &lambda in lambdas {
        for &d in ds {
            let verdict = uniqueness_at_degree(params, lambda, d)?;
            let k = (d - 1) as f64;
            let (g0, g1) = if k >= dc {
                (boundary_field(params, k, Branch::Lower).ok(), boundary_field(params, k, Branch::Upper).ok())
            } else {
                (None, None)
            };
            rows.push(LandscapeRow {
                lambda,
                d,
                verdict,
                fixed_points: fixed_points(params, lambda, k).points.len(),
                g0,
                g1,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomClusterReport {
    pub pairs: usize,
    pub max_rel_error: f64,
}

/// Checks `Z(G) = Z(G-) + (gamma - 1) Z(G+)` on random simple graphs with
/// random parameters (`gamma > 1`, `beta gamma > 1`) and fields.
pub fn random_cluster_check<R: Rng + ?Sized>(pairs: usize, max_n: usize, rng: &mut R) -> Result<RandomClusterReport> {
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < pairs {
        let gamma = rng.gen_range(1.05..4.0);
        let beta = rng.gen_range((1.0 / gamma) * 1.01..3.0);
        let params = SpinParams::new(beta, gamma)?;
        let n = rng.gen_range(2..=max_n.max(2));
        let edges = graphs::erdos_renyi(rng, n, 0.5);
        if edges.is_empty() {
            continue;
        }
        let lambdas: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..3.0)).collect();
        let sys = SpinSystem::new(
            params,
            lambdas.iter().enumerate().map(|(i, &l)| crate::spin::Vertex { id: i as u32, lambda: l }).collect(),
            edges.clone(),
            Default::default(),
        )?;
        let e = rng.gen_range(0..edges.len());
        let (minus, plus, _) = random_cluster_split(&sys, e)?;
        let z = exact_partition_signed(&sys)?;
        let zm = exact_partition_signed(&minus)?;
        let mut zp = exact_partition_signed(&plus)?;
        zp.log_abs += (gamma - 1.0).ln();
        let rhs = signed_log_sum([zm, zp]);
        let diff = signed_log_sum([rhs, SignedLog { sign: -z.sign, log_abs: z.log_abs }]);
        let rel = if diff.sign == 0 { 0.0 } else { (diff.log_abs - z.log_abs).exp() };
        worst = worst.max(rel);
        done += 1;
    }
    Ok(RandomClusterReport { pairs, max_rel_error: worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_prefix_gives_zero() {
        let p = SpinParams::new(1.0, 2.0).unwrap();
        let g = LayeredGenerator { types: 8, d_max: 4, height: 6 };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(mixing_discrepancy(&p, 10.0, &g, 6, 4, &mut rng), 0.0);
        assert!(mixing_discrepancy(&p, 10.0, &g, 1, 4, &mut rng) > 0.0);
    }

    #[test]
    fn generator_spec_round_trip() {
        let g = LayeredGenerator::parse("layered:types=16:dmax=5:height=20").unwrap();
        assert_eq!(LayeredGenerator::parse(&g.spec()).unwrap(), g);
        assert!(LayeredGenerator::parse("tree:types=3").is_err());
    }

    #[test]
    fn five_seven_limits() {
        let r = five_seven_demo(10.98).unwrap();
        assert_eq!(r.fixed_points.len(), 3);
        assert!((r.t_limit - r.fixed_points[2]).abs() < 1e-6);
        assert!((r.t_prime_limit - r.fixed_points[0]).abs() < 1e-6);
        assert!(r.separated());
    }

    #[test]
    fn landscape_below_critical_degree() {
        let p = SpinParams::new(1.0, 2.0).unwrap();
        let rows = threshold_landscape(&p, &[9.0, 11.3], &[3, 6, 7]).unwrap();
        assert!(rows.iter().filter(|r| r.d <= 6).all(|r| r.verdict == Verdict::Unique && r.g0.is_none()));
        assert!(rows.iter().any(|r| r.verdict == Verdict::NonUnique));
    }

    #[test]
    fn random_cluster_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = random_cluster_check(10, 6, &mut rng).unwrap();
        assert!(r.max_rel_error < 1e-12, "{}", r.max_rel_error);
    }
}
