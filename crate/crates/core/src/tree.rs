//! Rooted trees and the ratio recursion
//! `R = lambda * prod_i (beta R_i + 1)/(R_i + gamma)`.

#[allow(unused_imports)] // shadowed by std when another crate links it
use num_traits::Float;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;


use crate::error::{Error, Result};
use crate::numeric::ceil_log;
use crate::spin::{Spin, SpinParams, VertexId};

/// `P(spin 0)/P(spin 1)` at a vertex, in `[0, inf]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Ratio(pub f64);

impl Ratio {
    pub const ZERO: Ratio = Ratio(0.0);
    pub const INFINITY: Ratio = Ratio(f64::INFINITY);

    /// Ratio of a vertex pinned to `spin`.
    pub fn pinned(spin: Spin) -> Ratio {
        match spin {
            Spin::Zero => Ratio::INFINITY,
            Spin::One => Ratio::ZERO,
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// `P(spin 0) = R/(1+R)`.
    pub fn prob_zero(self) -> f64 {
        if self.0.is_infinite() {
            1.0
        } else {
            self.0 / (1.0 + self.0)
        }
    }

    /// `P(spin 1) = 1/(1+R)`, computed directly to avoid cancellation.
    pub fn prob_one(self) -> f64 {
        if self.0.is_infinite() {
            0.0
        } else {
            1.0 / (1.0 + self.0)
        }
    }
}

/// `F_d(x) = lambda * prod (beta x_i + 1)/(x_i + gamma)`; an infinite child
/// contributes `beta`, a zero child `1/gamma`.
#[allow(non_snake_case)]
pub fn eval_F(params: &SpinParams, lambda: f64, children: &[Ratio]) -> Ratio {
    let mut r = lambda;
    for c in children {
        r *= params.factor(c.0);
    }
    Ratio(r)
}

/// Symmetric recursion `f_d(x) = lambda ((beta x + 1)/(x + gamma))^d` for real `d`.
pub fn eval_f(params: &SpinParams, lambda: f64, d: f64, x: f64) -> f64 {
    lambda * params.factor(x).powf(d)
}

/// `f_d'(x) = d (beta gamma - 1) f_d(x) / ((beta x + 1)(x + gamma))`.
pub fn eval_f_prime(params: &SpinParams, lambda: f64, d: f64, x: f64) -> f64 {
    let (b, g) = (params.beta(), params.gamma());
    d * (b * g - 1.0) * eval_f(params, lambda, d, x) / ((b * x + 1.0) * (x + g))
}

/// `f_d''(x) = f' * (d(beta gamma - 1) - (2 beta x + beta gamma + 1)) / ((beta x + 1)(x + gamma))`.
pub fn eval_f_second(params: &SpinParams, lambda: f64, d: f64, x: f64) -> f64 {
    let (b, g) = (params.beta(), params.gamma());
    let fp = eval_f_prime(params, lambda, d, x);
    fp * (d * (b * g - 1.0) - (2.0 * b * x + b * g + 1.0)) / ((b * x + 1.0) * (x + g))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub vertex: VertexId,
    pub lambda: f64,
    pub pin: Option<Spin>,
    /// Set on stubs whose children were never expanded.
    pub truncated: bool,
    pub children: Vec<usize>,
}

/// Arena tree. Node 0 is the root and every child index exceeds its
/// parent's, so a reverse scan is a valid bottom-up order.
#[derive(Debug, Clone, PartialEq)]
pub struct RootedTree {
    nodes: Vec<TreeNode>,
}

impl RootedTree {
    pub fn new(vertex: VertexId, lambda: f64, pin: Option<Spin>) -> Self {
        RootedTree { nodes: vec![TreeNode { vertex, lambda, pin, truncated: false, children: Vec::new() }] }
    }

    pub fn push_child(&mut self, parent: usize, vertex: VertexId, lambda: f64, pin: Option<Spin>) -> usize {
        let id = self.nodes.len();
        self.nodes.push(TreeNode { vertex, lambda, pin, truncated: false, children: Vec::new() });
        self.nodes[parent].children.push(id);
        id
    }

    pub fn mark_truncated(&mut self, node: usize) {
        self.nodes[node].truncated = true;
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &TreeNode {
        &self.nodes[i]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn free_children(&self, i: usize) -> usize {
        self.nodes[i].children.iter().filter(|&&c| self.nodes[c].pin.is_none()).count()
    }

    pub fn max_children(&self) -> usize {
        self.nodes.iter().map(|n| n.children.len()).max().unwrap_or(0)
    }

    pub fn depths(&self) -> Vec<u32> {
        let mut d = vec![0u32; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            for &c in &n.children {
                d[c] = d[i] + 1;
            }
        }
        d
    }

    pub fn height(&self) -> u32 {
        self.depths().into_iter().max().unwrap_or(0)
    }
}

/// M-based depth: the root sits at 0 and a child adds `ceil(log_M(c+1))`,
/// `c` being the number of unpinned children of its parent. Pinned children
/// are excluded because they are absorbed into the parent's field.
pub fn m_based_depth(tree: &RootedTree, m: f64) -> Vec<u32> {
    let mut d = vec![0u32; tree.len()];
    for i in 0..tree.len() {
        let step = ceil_log(m, tree.free_children(i) as u64 + 1);
        for &c in &tree.nodes[i].children {
            d[c] = d[i] + step;
        }
    }
    d
}

/// `|B(l)|` for `l = 0..=max_level`: unpinned nodes with M-based depth at most `l`.
pub fn ball_sizes(tree: &RootedTree, m: f64, max_level: u32) -> Vec<usize> {
    let d = m_based_depth(tree, m);
    (0..=max_level)
        .map(|l| (0..tree.len()).filter(|&i| tree.nodes[i].pin.is_none() && d[i] <= l).count())
        .collect()
}

/// Root ratio by the exact bottom-up recursion. Pinned nodes take their
/// pinned value regardless of what hangs below them.
pub fn exact_tree_marginal(tree: &RootedTree, params: &SpinParams) -> Result<Ratio> {
    let mut val = vec![Ratio::ZERO; tree.len()];
    let mut buf = Vec::new();
    for i in (0..tree.len()).rev() {
        let n = &tree.nodes[i];
        val[i] = if let Some(s) = n.pin {
            Ratio::pinned(s)
        } else if n.truncated {
            return Err(Error::Truncated);
        } else {
            buf.clear();
            buf.extend(n.children.iter().map(|&c| val[c]));
            eval_F(params, n.lambda, &buf)
        };
    }
    Ok(val[0])
}

/// Removes pinned children, folding each into the parent's field (factor
/// `beta` for spin 0, `1/gamma` for spin 1). A pinned root is kept as is.
pub fn absorb_pins(tree: &RootedTree, params: &SpinParams) -> RootedTree {
    let root = &tree.nodes[0];
    let mut out = RootedTree::new(root.vertex, root.lambda, root.pin);
    if root.pin.is_some() {
        return out;
    }
    out.nodes[0].truncated = root.truncated;
    let mut stack = vec![(0usize, 0usize)];
    while let Some((src, dst)) = stack.pop() {
        let mut lambda = tree.nodes[src].lambda;
        for &c in &tree.nodes[src].children {
            let child = &tree.nodes[c];
            match child.pin {
                Some(s) => lambda *= params.factor(Ratio::pinned(s).0),
                None => {
                    let id = out.push_child(dst, child.vertex, child.lambda, None);
                    out.nodes[id].truncated = child.truncated;
                    stack.push((c, id));
                }
            }
        }
        out.nodes[dst].lambda = lambda;
    }
    out
}

/// Which nodes of a tree are evaluated by the bounds recursion. Free nodes
/// outside the horizon receive the trivial interval `[0, inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Unbounded,
    /// Nodes at plain depth at most `t`.
    Depth(u32),
    /// Nodes with M-based depth at most `ell`.
    MBased { base: f64, ell: u32 },
    /// Nodes with M-based depth at most `ell`, plus their children.
    MBasedPadded { base: f64, ell: u32 },
}

impl Horizon {
    pub fn base(&self) -> Option<f64> {
        match *self {
            Horizon::MBased { base, .. } | Horizon::MBasedPadded { base, .. } => Some(base),
            _ => None,
        }
    }

    /// `parent_mdepth` is `None` at the root.
    pub fn inside(&self, depth: u32, mdepth: u32, parent_mdepth: Option<u32>) -> bool {
        match *self {
            Horizon::Unbounded => true,
            Horizon::Depth(t) => depth <= t,
            Horizon::MBased { ell, .. } => mdepth <= ell,
            Horizon::MBasedPadded { ell, .. } => parent_mdepth.is_none_or(|p| p <= ell),
        }
    }
}

/// Interval `[R_v, R^v]` containing the ratio at a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsPair {
    pub lower: Ratio,
    pub upper: Ratio,
}

impl BoundsPair {
    pub const TRIVIAL: BoundsPair = BoundsPair { lower: Ratio::ZERO, upper: Ratio::INFINITY };

    pub fn exact(r: Ratio) -> Self {
        BoundsPair { lower: r, upper: r }
    }

    /// `delta = R^v - R_v`.
    pub fn gap(&self) -> f64 {
        if self.upper.0 == self.lower.0 {
            0.0
        } else {
            self.upper.0 - self.lower.0
        }
    }

    pub fn contains(&self, r: Ratio, rel_tol: f64) -> bool {
        let slack = |x: f64| rel_tol * x.abs().max(1e-300);
        r.0 >= self.lower.0 - slack(self.lower.0) && r.0 <= self.upper.0 + slack(self.upper.0)
    }

    /// `[P_lower(0), P_upper(0)]`.
    pub fn prob_zero(&self) -> (f64, f64) {
        (self.lower.prob_zero(), self.upper.prob_zero())
    }
}

/// Interval recursion: endpoints propagate through `F`, which is increasing
/// in every argument when `beta gamma > 1`.
pub fn bounds_recursion(tree: &RootedTree, params: &SpinParams, horizon: &Horizon) -> BoundsPair {
    let depth = tree.depths();
    let mdepth = horizon.base().map(|m| m_based_depth(tree, m));
    let mut parent = vec![usize::MAX; tree.len()];
    for (i, n) in tree.nodes.iter().enumerate() {
        for &c in &n.children {
            parent[c] = i;
        }
    }
    let inside = |i: usize| {
        let (md, pmd) = match &mdepth {
            Some(m) => (m[i], if i == 0 { None } else { Some(m[parent[i]]) }),
            None => (0, if i == 0 { None } else { Some(0) }),
        };
        horizon.inside(depth[i], md, pmd)
    };
    let mut lo = vec![Ratio::ZERO; tree.len()];
    let mut hi = vec![Ratio::INFINITY; tree.len()];
    let mut buf_lo = Vec::new();
    let mut buf_hi = Vec::new();
    for i in (0..tree.len()).rev() {
        let n = &tree.nodes[i];
        if let Some(s) = n.pin {
            lo[i] = Ratio::pinned(s);
            hi[i] = lo[i];
        } else if n.truncated || !inside(i) {
            lo[i] = Ratio::ZERO;
            hi[i] = Ratio::INFINITY;
        } else {
            buf_lo.clear();
            buf_hi.clear();
            buf_lo.extend(n.children.iter().map(|&c| lo[c]));
            buf_hi.extend(n.children.iter().map(|&c| hi[c]));
            lo[i] = eval_F(params, n.lambda, &buf_lo);
            hi[i] = eval_F(params, n.lambda, &buf_hi);
        }
    }
    BoundsPair { lower: lo[0], upper: hi[0] }
}

/// Layered tree description: `alt:5,7:depth=12` cycles the listed child
/// counts level by level for `depth` levels; `regular:3:depth=4` is the
/// one-entry case. An optional `:extra=50` hangs that many leaves below every
/// deepest node.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeSpec {
    pub degrees: Vec<usize>,
    pub depth: usize,
    pub extra: Option<usize>,
}

impl TreeSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let err = || Error::Parse(format!("bad tree spec '{s}'"));
        let mut parts = s.split(':');
        let kind = parts.next().ok_or_else(err)?;
        let degs = parts.next().ok_or_else(err)?;
        let degrees: Vec<usize> = degs
            .split(',')
            .map(|d| d.trim().parse::<usize>().map_err(|_| err()))
            .collect::<Result<_>>()?;
        match kind {
            "alt" if !degrees.is_empty() => {}
            "regular" if degrees.len() == 1 => {}
            _ => return Err(err()),
        }
        let mut depth = None;
        let mut extra = None;
        for p in parts {
            let (k, v) = p.split_once('=').ok_or_else(err)?;
            let v: usize = v.parse().map_err(|_| err())?;
            match k {
                "depth" => depth = Some(v),
                "extra" => extra = Some(v),
                _ => return Err(err()),
            }
        }
        Ok(TreeSpec { degrees, depth: depth.ok_or_else(err)?, extra })
    }

    /// Number of nodes `build` would allocate.
    pub fn size(&self) -> u128 {
        let mut total: u128 = 1;
        let mut level: u128 = 1;
        for l in 0..self.depth {
            level = level.saturating_mul(self.degrees[l % self.degrees.len()] as u128);
            total = total.saturating_add(level);
        }
        if let Some(e) = self.extra {
            total = total.saturating_add(level.saturating_mul(e as u128));
        }
        total
    }

    pub fn build(&self, lambda: f64) -> RootedTree {
        let mut t = RootedTree::new(0, lambda, None);
        let mut frontier = vec![0usize];
        let levels = self.depth + usize::from(self.extra.is_some());
        for l in 0..levels {
            let k = if l < self.depth { self.degrees[l % self.degrees.len()] } else { self.extra.unwrap_or(0) };
            let mut next = Vec::with_capacity(frontier.len() * k);
            for &p in &frontier {
                for _ in 0..k {
                    let id = t.len() as VertexId;
                    next.push(t.push_child(p, id, lambda, None));
                }
            }
            frontier = next;
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(b: f64, g: f64) -> SpinParams {
        SpinParams::new(b, g).unwrap()
    }

    #[test]
    fn base_cases() {
        let q = p(2.0, 2.0);
        assert_eq!(eval_F(&q, 2.0, &[]), Ratio(2.0));
        assert_eq!(eval_F(&p(2.0, 1.0), 1.0, &[Ratio::INFINITY]), Ratio(2.0));
        assert_eq!(eval_F(&q, 1.0, &[Ratio::ZERO]), Ratio(0.5));
    }

    #[test]
    fn f7_at_one() {
        let q = p(1.0, 2.0);
        let v = eval_f(&q, 10.98, 7.0, 1.0);
        assert!((v - 10.98 * (2.0f64 / 3.0).powi(7)).abs() < 1e-13);
        assert!((v - 10.98 * 128.0 / 2187.0).abs() < 1e-13);
        let r = eval_F(&q, 10.98, &[Ratio(1.0); 7]);
        assert!((r.0 - v).abs() < 1e-12);
    }

    #[test]
    fn path_and_star() {
        let q = p(0.6, 2.0);
        let mut t = RootedTree::new(0, 1.0, None);
        t.push_child(0, 1, 1.0, None);
        let r = exact_tree_marginal(&t, &q).unwrap();
        assert!((r.0 - 1.6 / 3.0).abs() < 1e-15);

        let mut s = RootedTree::new(0, 1.5, None);
        for i in 0..4 {
            s.push_child(0, i + 1, 1.0, Some(Spin::Zero));
        }
        let r = exact_tree_marginal(&s, &q).unwrap();
        assert!((r.0 - 1.5 * 0.6f64.powi(4)).abs() < 1e-15);
    }

    #[test]
    fn absorb_rules() {
        let q = p(0.6, 2.0);
        let mut t = RootedTree::new(0, 1.0, None);
        t.push_child(0, 1, 1.0, Some(Spin::Zero));
        assert!((absorb_pins(&t, &q).node(0).lambda - 0.6).abs() < 1e-15);
        let mut t = RootedTree::new(0, 1.0, None);
        t.push_child(0, 1, 1.0, Some(Spin::One));
        let a = absorb_pins(&t, &q);
        assert_eq!(a.len(), 1);
        assert!((a.node(0).lambda - 0.5).abs() < 1e-15);
    }

    #[test]
    fn horizon_at_root() {
        let q = p(2.0, 3.0);
        let mut t = RootedTree::new(0, 2.0, None);
        for i in 0..3 {
            let c = t.push_child(0, i + 1, 1.0, None);
            t.push_child(c, 10 + i, 1.0, None);
        }
        let b = bounds_recursion(&t, &q, &Horizon::Depth(0));
        assert!((b.lower.0 - 2.0 / 27.0).abs() < 1e-15);
        assert!((b.upper.0 - 16.0).abs() < 1e-13);
        let full = bounds_recursion(&t, &q, &Horizon::Unbounded);
        assert_eq!(full.lower, full.upper);
        assert_eq!(full.lower, exact_tree_marginal(&t, &q).unwrap());
    }

    #[test]
    fn m_depth_examples() {
        let spec = TreeSpec::parse("regular:1:depth=5").unwrap();
        assert_eq!(m_based_depth(&spec.build(1.0), 2.0), vec![0, 1, 2, 3, 4, 5]);
        let star = TreeSpec::parse("regular:7:depth=1").unwrap().build(1.0);
        assert!(m_based_depth(&star, 2.0)[1..].iter().all(|&d| d == 3));
    }

    #[test]
    fn spec_grammar() {
        let s = TreeSpec::parse("alt:5,7:depth=2:extra=50").unwrap();
        assert_eq!(s.size(), 1 + 5 + 35 + 35 * 50);
        assert_eq!(s.build(1.0).len() as u128, s.size());
        assert!(TreeSpec::parse("regular:3,4:depth=2").is_err());
        assert!(TreeSpec::parse("alt:5,7").is_err());
    }

    #[test]
    fn binary_tree_iterates_f2() {
        let q = p(1.0, 2.0);
        let t = TreeSpec::parse("regular:2:depth=10").unwrap().build(10.98);
        let mut x = 10.98;
        for _ in 0..10 {
            x = eval_f(&q, 10.98, 2.0, x);
        }
        assert!((exact_tree_marginal(&t, &q).unwrap().0 - x).abs() < 1e-12 * x);
    }
}
