//! Problem instances, configuration weights and the exact oracle.
//!
//! Fields attach to spin 0: a configuration weighs
//! `beta^{m0} * gamma^{m1} * prod_{v: sigma(v)=0} lambda_v` where `m0`, `m1`
//! count monochromatic 0-0 and 1-1 edges.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std when another crate links it
use num_traits::Float;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numeric::{KahanSum, SignedLog};

pub type VertexId = u32;

/// Largest number of free vertices the exact oracle will enumerate.
pub const ORACLE_LIMIT: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Spin {
    Zero,
    One,
}

impl Spin {
    pub fn from_u8(s: u8) -> Result<Spin> {
        match s {
            0 => Ok(Spin::Zero),
            1 => Ok(Spin::One),
            _ => Err(Error::Parse(format!("spin must be 0 or 1, got {s}"))),
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Spin::Zero => 0,
            Spin::One => 1,
        }
    }
}

/// Edge weights: `beta` for a 0-0 edge, `gamma` for a 1-1 edge, 1 otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinParams {
    beta: f64,
    gamma: f64,
}

impl SpinParams {
    /// Rejects anything outside the ferromagnetic regime `beta * gamma > 1`.
    pub fn new(beta: f64, gamma: f64) -> Result<Self> {
        if !(beta.is_finite() && gamma.is_finite() && beta >= 0.0 && gamma >= 0.0) {
            return Err(Error::ParametersOutOfRange(format!(
                "beta and gamma must be finite and nonnegative (beta={beta}, gamma={gamma})"
            )));
        }
        if beta * gamma <= 1.0 {
            return Err(Error::ParametersOutOfRange(format!(
                "beta*gamma = {} must exceed 1",
                beta * gamma
            )));
        }
        Ok(SpinParams { beta, gamma })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn require_beta_le_gamma(&self) -> Result<()> {
        if self.beta <= self.gamma {
            Ok(())
        } else {
            Err(Error::ParametersOutOfRange(format!(
                "beta {} must not exceed gamma {}",
                self.beta, self.gamma
            )))
        }
    }

    /// Per-child factor `(beta x + 1)/(x + gamma)`, equal to `beta` at infinity.
    pub fn factor(&self, x: f64) -> f64 {
        if x.is_infinite() {
            self.beta
        } else {
            (self.beta * x + 1.0) / (x + self.gamma)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub id: VertexId,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem {
    params: SpinParams,
    vertices: Vec<Vertex>,
    edges: Vec<(VertexId, VertexId)>,
    pins: BTreeMap<VertexId, Spin>,
    index: BTreeMap<VertexId, usize>,
    /// Per vertex position: `(neighbour position, edge index)` sorted by
    /// neighbour id then edge index.
    adj: Vec<Vec<(usize, usize)>>,
}

impl SpinSystem {
    /// Fields must be finite. Zero or negative fields are accepted so that
    /// contracted instances can be represented; Gibbs quantities reject them.
    pub fn new(
        params: SpinParams,
        vertices: Vec<Vertex>,
        edges: Vec<(VertexId, VertexId)>,
        pins: BTreeMap<VertexId, Spin>,
    ) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if !v.lambda.is_finite() {
                return Err(Error::InvalidInstance(format!("vertex {} has non-finite field", v.id)));
            }
            if index.insert(v.id, i).is_some() {
                return Err(Error::InvalidInstance(format!("duplicate vertex id {}", v.id)));
            }
        }
        let mut adj = vec![Vec::new(); vertices.len()];
        for (e, &(a, b)) in edges.iter().enumerate() {
            if a == b {
                return Err(Error::InvalidInstance(format!("self-loop at vertex {a}")));
            }
            let ia = *index
                .get(&a)
                .ok_or_else(|| Error::InvalidInstance(format!("edge {e} references unknown vertex {a}")))?;
            let ib = *index
                .get(&b)
                .ok_or_else(|| Error::InvalidInstance(format!("edge {e} references unknown vertex {b}")))?;
            adj[ia].push((ib, e));
            adj[ib].push((ia, e));
        }
        for list in adj.iter_mut() {
            list.sort_by_key(|&(w, e)| (vertices[w].id, e));
        }
        for id in pins.keys() {
            if !index.contains_key(id) {
                return Err(Error::InvalidInstance(format!("pin references unknown vertex {id}")));
            }
        }
        Ok(SpinSystem { params, vertices, edges, pins, index, adj })
    }

    /// Vertices `0..n` sharing one field, no pins.
    pub fn uniform(params: SpinParams, n: usize, lambda: f64, edges: Vec<(VertexId, VertexId)>) -> Result<Self> {
        let vertices = (0..n as VertexId).map(|id| Vertex { id, lambda }).collect();
        Self::new(params, vertices, edges, BTreeMap::new())
    }

    pub fn params(&self) -> SpinParams {
        self.params
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn pins(&self) -> &BTreeMap<VertexId, Spin> {
        &self.pins
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, id: VertexId) -> Result<usize> {
        self.index.get(&id).copied().ok_or(Error::UnknownVertex(id))
    }

    pub fn pin_of(&self, id: VertexId) -> Option<Spin> {
        self.pins.get(&id).copied()
    }

    pub(crate) fn pin_at(&self, i: usize) -> Option<Spin> {
        self.pin_of(self.vertices[i].id)
    }

    pub(crate) fn adjacency(&self, i: usize) -> &[(usize, usize)] {
        &self.adj[i]
    }

    /// Degree counting parallel edges.
    pub fn degree(&self, id: VertexId) -> Result<usize> {
        Ok(self.adj[self.index_of(id)?].len())
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn free_ids(&self) -> Vec<VertexId> {
        self.vertices.iter().map(|v| v.id).filter(|id| !self.pins.contains_key(id)).collect()
    }

    pub fn lambda_max(&self) -> f64 {
        self.vertices.iter().map(|v| v.lambda).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn lambda_min(&self) -> f64 {
        self.vertices.iter().map(|v| v.lambda).fold(f64::INFINITY, f64::min)
    }

    pub fn require_positive_fields(&self) -> Result<()> {
        match self.vertices.iter().find(|v| v.lambda <= 0.0) {
            Some(v) => Err(Error::ParametersOutOfRange(format!(
                "vertex {} has non-positive field {}",
                v.id, v.lambda
            ))),
            None => Ok(()),
        }
    }

    /// Copy with one more vertex pinned.
    pub fn with_pin(&self, id: VertexId, spin: Spin) -> Result<Self> {
        self.index_of(id)?;
        let mut out = self.clone();
        out.pins.insert(id, spin);
        Ok(out)
    }

    pub fn with_pins(&self, pins: BTreeMap<VertexId, Spin>) -> Result<Self> {
        Self::new(self.params, self.vertices.clone(), self.edges.clone(), pins)
    }
}

/// Total assignment in vertex-list order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    pub spins: Vec<Spin>,
}

impl Configuration {
    pub fn from_map(system: &SpinSystem, map: &BTreeMap<VertexId, Spin>) -> Result<Self> {
        let spins = system
            .vertices
            .iter()
            .map(|v| map.get(&v.id).copied().ok_or(Error::UnknownVertex(v.id)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Configuration { spins })
    }

    pub fn respects_pins(&self, system: &SpinSystem) -> bool {
        system
            .vertices
            .iter()
            .zip(&self.spins)
            .all(|(v, s)| system.pin_of(v.id).is_none_or(|p| p == *s))
    }
}

/// Weight in log scale. `negative` is only ever set for contracted
/// instances carrying negative fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightAccumulator {
    pub log_weight: f64,
    pub zero_flag: bool,
    pub negative: bool,
}

impl WeightAccumulator {
    pub fn value(&self) -> f64 {
        if self.zero_flag {
            0.0
        } else if self.negative {
            -self.log_weight.exp()
        } else {
            self.log_weight.exp()
        }
    }
}

pub fn weight(system: &SpinSystem, sigma: &Configuration) -> Result<WeightAccumulator> {
    if sigma.spins.len() != system.len() {
        return Err(Error::InvalidInstance(format!(
            "configuration has {} spins for {} vertices",
            sigma.spins.len(),
            system.len()
        )));
    }
    let (mut m0, mut m1) = (0u64, 0u64);
    for &(a, b) in &system.edges {
        let sa = sigma.spins[system.index[&a]];
        let sb = sigma.spins[system.index[&b]];
        match (sa, sb) {
            (Spin::Zero, Spin::Zero) => m0 += 1,
            (Spin::One, Spin::One) => m1 += 1,
            _ => {}
        }
    }
    let mut acc = WeightAccumulator {
        log_weight: m0 as f64 * system.params.beta.ln() + m1 as f64 * system.params.gamma.ln(),
        zero_flag: false,
        negative: false,
    };
    for (v, s) in system.vertices.iter().zip(&sigma.spins) {
        if *s == Spin::Zero {
            if v.lambda == 0.0 {
                acc.zero_flag = true;
            } else {
                acc.log_weight += v.lambda.abs().ln();
                acc.negative ^= v.lambda < 0.0;
            }
        }
    }
    if acc.zero_flag {
        acc.log_weight = f64::NEG_INFINITY;
        acc.negative = false;
    }
    Ok(acc)
}

#[derive(Clone, Copy)]
struct FieldProduct {
    sign: i8,
    log_abs: f64,
}

fn field_table(lambdas: &[f64]) -> Vec<FieldProduct> {
    let mut table = vec![FieldProduct { sign: 1, log_abs: 0.0 }; 1 << lambdas.len()];
    for mask in 1usize..table.len() {
        let bit = mask.trailing_zeros() as usize;
        let prev = table[mask & (mask - 1)];
        let l = lambdas[bit];
        table[mask] = if prev.sign == 0 || l == 0.0 {
            FieldProduct { sign: 0, log_abs: f64::NEG_INFINITY }
        } else {
            FieldProduct {
                sign: if l < 0.0 { -prev.sign } else { prev.sign },
                log_abs: prev.log_abs + l.abs().ln(),
            }
        };
    }
    table
}

/// Signed partition function by Gray-code enumeration of the free vertices.
///
/// Edge counts are tracked as integers, field products come from two
/// half-size lookup tables, and the sum is a two-pass compensated
/// log-sum-exp with separate positive and negative accumulators.
pub fn exact_partition_signed(system: &SpinSystem) -> Result<SignedLog> {
    let n = system.len();
    let mut free_pos = vec![usize::MAX; n];
    let mut free = Vec::new();
    for i in 0..n {
        if system.pin_at(i).is_none() {
            free_pos[i] = free.len();
            free.push(i);
        }
    }
    let f = free.len();
    if f > ORACLE_LIMIT {
        return Err(Error::InstanceTooLarge { free: f, limit: ORACLE_LIMIT });
    }

    let mut const_sign: i8 = 1;
    let mut const_log = 0.0;
    for i in 0..n {
        if system.pin_at(i) == Some(Spin::Zero) {
            let l = system.vertices[i].lambda;
            if l == 0.0 {
                return Ok(SignedLog::ZERO);
            }
            if l < 0.0 {
                const_sign = -const_sign;
            }
            const_log += l.abs().ln();
        }
    }

    let (mut m0, mut m1) = (0i64, 0i64);
    let mut p0 = vec![0i64; f];
    let mut p1 = vec![0i64; f];
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); f];
    for &(a, b) in &system.edges {
        let (ia, ib) = (system.index[&a], system.index[&b]);
        match (system.pin_at(ia), system.pin_at(ib)) {
            (Some(sa), Some(sb)) => {
                if sa == sb {
                    if sa == Spin::Zero {
                        m0 += 1
                    } else {
                        m1 += 1
                    }
                }
            }
            (Some(s), None) | (None, Some(s)) => {
                let u = if system.pin_at(ia).is_none() { free_pos[ia] } else { free_pos[ib] };
                if s == Spin::Zero {
                    p0[u] += 1
                } else {
                    p1[u] += 1;
                    m1 += 1;
                }
            }
            (None, None) => {
                nbrs[free_pos[ia]].push(free_pos[ib]);
                nbrs[free_pos[ib]].push(free_pos[ia]);
                m1 += 1;
            }
        }
    }

    let lo_bits = f.div_ceil(2);
    let lo_mask = (1usize << lo_bits) - 1;
    let lambdas: Vec<f64> = free.iter().map(|&i| system.vertices[i].lambda).collect();
    let t_lo = field_table(&lambdas[..lo_bits]);
    let t_hi = field_table(&lambdas[lo_bits..]);
    let (lb, lg) = (system.params.beta.ln(), system.params.gamma.ln());

    // Visits every configuration once; calls `visit(sign, log)` per term.
    let walk = |visit: &mut dyn FnMut(i8, f64)| {
        let (mut m0, mut m1) = (m0, m1);
        let mut mask = 0usize;
        let total = 1usize << f;
        for step in 0..total {
            if step > 0 {
                let u = step.trailing_zeros() as usize;
                let to_zero = mask & (1 << u) == 0;
                for &w in &nbrs[u] {
                    let w_zero = mask & (1 << w) != 0;
                    match (to_zero, w_zero) {
                        (true, true) => m0 += 1,
                        (true, false) => m1 -= 1,
                        (false, true) => m0 -= 1,
                        (false, false) => m1 += 1,
                    }
                }
                if to_zero {
                    m0 += p0[u];
                    m1 -= p1[u];
                } else {
                    m0 -= p0[u];
                    m1 += p1[u];
                }
                mask ^= 1 << u;
            }
            let a = t_lo[mask & lo_mask];
            let b = t_hi[mask >> lo_bits];
            let sign = a.sign * b.sign;
            if sign != 0 {
                visit(sign, m0 as f64 * lb + m1 as f64 * lg + a.log_abs + b.log_abs);
            }
        }
    };

    let mut max = f64::NEG_INFINITY;
    walk(&mut |_, l| {
        if l > max {
            max = l
        }
    });
    if max == f64::NEG_INFINITY {
        return Ok(SignedLog::ZERO);
    }
    let mut pos = KahanSum::default();
    let mut neg = KahanSum::default();
    walk(&mut |s, l| {
        if s > 0 {
            pos.add((l - max).exp())
        } else {
            neg.add((l - max).exp())
        }
    });
    let mut out = SignedLog::from_f64(pos.value() - neg.value());
    out.log_abs += max + const_log;
    out.sign *= const_sign;
    Ok(out)
}

/// `log Z` for an instance whose partition function is positive.
pub fn exact_partition(system: &SpinSystem) -> Result<f64> {
    let z = exact_partition_signed(system)?;
    if z.sign <= 0 {
        return Err(Error::ParametersOutOfRange("partition function is not positive".into()));
    }
    Ok(z.log_abs)
}

/// `(log Z^{sigma(v)=0}, log Z^{sigma(v)=1})` for a free vertex.
pub fn exact_split(system: &SpinSystem, v: VertexId) -> Result<(f64, f64)> {
    system.require_positive_fields()?;
    if system.pin_of(v).is_some() {
        return Err(Error::VertexPinned(v));
    }
    let z0 = exact_partition(&system.with_pin(v, Spin::Zero)?)?;
    let z1 = exact_partition(&system.with_pin(v, Spin::One)?)?;
    Ok((z0, z1))
}

/// `Pr(sigma(v) = 0)` conditional on the instance's pins.
pub fn exact_marginal(system: &SpinSystem, v: VertexId) -> Result<f64> {
    let (z0, z1) = exact_split(system, v)?;
    Ok(1.0 / (1.0 + (z1 - z0).exp()))
}

/// `P(0)/P(1)` at `v` in log scale.
pub fn exact_log_ratio(system: &SpinSystem, v: VertexId) -> Result<f64> {
    let (z0, z1) = exact_split(system, v)?;
    Ok(z0 - z1)
}

/// Deletion/contraction of one edge.
///
/// Returns `(G minus e, G with e contracted, id of the contracted vertex)`,
/// where `Z(G) = Z(G-) + (gamma - 1) Z(G+)` and the contracted vertex carries
/// field `lambda_a lambda_b (beta - 1)/(gamma - 1)`.
pub fn random_cluster_split(system: &SpinSystem, edge: usize) -> Result<(SpinSystem, SpinSystem, VertexId)> {
    let p = system.params;
    if p.gamma == 1.0 {
        return Err(Error::GammaEqualsOne);
    }
    let &(a, b) = system.edges.get(edge).ok_or(Error::EdgeNotFound(edge))?;
    if system.pins.contains_key(&a) || system.pins.contains_key(&b) {
        return Err(Error::InvalidInstance("contracted edge must join two free vertices".into()));
    }
    let parallel = system
        .edges
        .iter()
        .enumerate()
        .any(|(i, &(x, y))| i != edge && ((x, y) == (a, b) || (x, y) == (b, a)));
    if parallel {
        return Err(Error::InvalidInstance(
            "contracting an edge with parallel copies would create self-loops".into(),
        ));
    }

    let mut minus_edges = system.edges.clone();
    minus_edges.remove(edge);
    let minus = SpinSystem::new(p, system.vertices.clone(), minus_edges, system.pins.clone())?;

    let new_id = system.vertices.iter().map(|v| v.id).max().unwrap_or(0) + 1;
    let la = system.vertices[system.index[&a]].lambda;
    let lb = system.vertices[system.index[&b]].lambda;
    let mut verts: Vec<Vertex> = system.vertices.iter().copied().filter(|v| v.id != a && v.id != b).collect();
    verts.push(Vertex { id: new_id, lambda: la * lb * (p.beta - 1.0) / (p.gamma - 1.0) });
    let map = |x: VertexId| if x == a || x == b { new_id } else { x };
    let plus_edges = system
        .edges
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != edge)
        .map(|(_, &(x, y))| (map(x), map(y)))
        .collect();
    let plus = SpinSystem::new(p, verts, plus_edges, system.pins.clone())?;
    Ok((minus, plus, new_id))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginalBoundReport {
    pub trials: usize,
    pub vertices_checked: usize,
    pub bound: f64,
    pub max_marginal: f64,
    pub violations: usize,
}

/// Absolute slack allowed above `lambda/(lambda+1)` before a vertex counts as
/// a violation; the bound is attained exactly in symmetric cases.
pub const MARGINAL_BOUND_SLACK: f64 = 1e-12;

/// Samples random unpinned graphs and checks `p_v <= lambda/(lambda+1)` for
/// every vertex, in the regime `1 <= beta <= gamma`,
/// `lambda <= (gamma-1)/(beta-1)` (no constraint when `beta = 1`).
pub fn marginal_bound_sweep<R: Rng + ?Sized>(
    params: SpinParams,
    lambda: f64,
    trials: usize,
    size_bound: usize,
    rng: &mut R,
) -> Result<MarginalBoundReport> {
    let (b, g) = (params.beta, params.gamma);
    if !(1.0 <= b && b <= g) {
        return Err(Error::ParametersOutOfRange(format!("need 1 <= beta <= gamma (beta={b}, gamma={g})")));
    }
    let cap = if b == 1.0 { f64::INFINITY } else { (g - 1.0) / (b - 1.0) };
    if !(lambda > 0.0 && lambda <= cap) {
        return Err(Error::ParametersOutOfRange(format!(
            "need 0 < lambda <= (gamma-1)/(beta-1) = {cap}, got {lambda}"
        )));
    }
    if size_bound == 0 || size_bound > ORACLE_LIMIT {
        return Err(Error::ParametersOutOfRange(format!("size bound must be in 1..={ORACLE_LIMIT}")));
    }
    let bound = lambda / (lambda + 1.0);
    let mut report = MarginalBoundReport { trials, vertices_checked: 0, bound, max_marginal: 0.0, violations: 0 };
    for _ in 0..trials {
        let n = rng.gen_range(1..=size_bound);
        let p = rng.gen_range(0.1..0.9);
        let edges = crate::graphs::erdos_renyi(rng, n, p);
        let sys = SpinSystem::uniform(params, n, lambda, edges)?;
        for id in 0..n as VertexId {
            let pv = exact_marginal(&sys, id)?;
            report.vertices_checked += 1;
            report.max_marginal = report.max_marginal.max(pv);
            if pv > bound + MARGINAL_BOUND_SLACK {
                report.violations += 1;
            }
        }
    }
    Ok(report)
}
