//! Self-avoiding-walk trees.
//!
//! Walks are edge based, so parallel edges yield distinct branches. Every
//! vertex ranks its incident edges by `(neighbour id, edge index)`. When a
//! walk returns to a vertex `w` already on the path, the leaf is pinned to
//! spin 0 if the closing edge ranks above the edge by which the walk left
//! `w`, and to spin 1 otherwise. Graph pins are copied onto every SAW copy of
//! a pinned vertex.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numeric::ceil_log;
use crate::spin::{Spin, SpinSystem, VertexId};
use crate::tree::{BoundsPair, Horizon, Ratio, RootedTree};

/// Default node budget for full expansions.
pub const DEFAULT_BUDGET: u64 = 200_000_000;

struct Walker<'a> {
    sys: &'a SpinSystem,
    /// `rank[v][k]`: for the k-th incident entry of v, the position of the
    /// same edge in the neighbour's list.
    back: Vec<Vec<usize>>,
    on_path: Vec<bool>,
    leave_rank: Vec<usize>,
}

enum Child {
    Pinned(Spin),
    Free,
}

impl<'a> Walker<'a> {
    fn new(sys: &'a SpinSystem) -> Self {
        let n = sys.len();
        let mut back = vec![Vec::new(); n];
        for (u, slot) in back.iter_mut().enumerate() {
            for &(w, e) in sys.adjacency(u) {
                let pos = sys.adjacency(w).iter().position(|&(x, f)| x == u && f == e).unwrap_or(0);
                slot.push(pos);
            }
        }
        Walker { sys, back, on_path: vec![false; n], leave_rank: vec![0; n] }
    }

    /// Classification of the k-th incident entry of `u`.
    fn classify(&self, u: usize, k: usize) -> Child {
        let (w, _) = self.sys.adjacency(u)[k];
        if self.on_path[w] {
            let closing = self.back[u][k];
            if closing > self.leave_rank[w] {
                Child::Pinned(Spin::Zero)
            } else {
                Child::Pinned(Spin::One)
            }
        } else if let Some(s) = self.sys.pin_at(w) {
            Child::Pinned(s)
        } else {
            Child::Free
        }
    }

    fn entries(&self, u: usize, arrival: Option<usize>) -> impl Iterator<Item = usize> + '_ {
        (0..self.sys.adjacency(u).len()).filter(move |&k| Some(self.sys.adjacency(u)[k].1) != arrival)
    }

    fn free_count(&self, u: usize, arrival: Option<usize>) -> u64 {
        self.entries(u, arrival).filter(|&k| matches!(self.classify(u, k), Child::Free)).count() as u64
    }
}

struct Stream<'a> {
    walker: Walker<'a>,
    horizon: Horizon,
    budget: u64,
    nodes: u64,
    truncated: bool,
}

impl Stream<'_> {
    fn visit(&mut self, u: usize, arrival: Option<usize>, depth: u32, mdepth: u32) -> Result<(f64, f64)> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded { budget: self.budget });
        }
        let sys = self.walker.sys;
        let p = sys.params();
        let lambda = sys.vertices()[u].lambda;
        let (mut lo, mut hi) = (lambda, lambda);
        let step = match self.horizon.base() {
            Some(m) => ceil_log(m, self.walker.free_count(u, arrival) + 1),
            None => 0,
        };
        let ks: Vec<usize> = self.walker.entries(u, arrival).collect();
        for k in ks {
            match self.walker.classify(u, k) {
                Child::Pinned(s) => {
                    let f = p.factor(Ratio::pinned(s).0);
                    lo *= f;
                    hi *= f;
                }
                Child::Free => {
                    let (w, e) = sys.adjacency(u)[k];
                    let cm = mdepth + step;
                    if self.horizon.inside(depth + 1, cm, Some(mdepth)) {
                        self.walker.leave_rank[u] = k;
                        self.walker.on_path[w] = true;
                        let r = self.visit(w, Some(e), depth + 1, cm);
                        self.walker.on_path[w] = false;
                        let (clo, chi) = r?;
                        lo *= p.factor(clo);
                        hi *= p.factor(chi);
                    } else {
                        self.truncated = true;
                        lo *= p.factor(0.0);
                        hi *= p.factor(f64::INFINITY);
                    }
                }
            }
        }
        Ok((lo, hi))
    }
}

/// Result of a streaming SAW evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SawBounds {
    pub bounds: BoundsPair,
    pub nodes: u64,
    /// Whether any free node fell outside the horizon.
    pub truncated: bool,
}

/// Interval bounds on `R_{G,v}` from the SAW tree truncated at `horizon`,
/// computed by depth-first search without materialising the tree.
/// M-based depths count free children only.
pub fn saw_bounds(system: &SpinSystem, v: VertexId, horizon: Horizon, budget: u64) -> Result<SawBounds> {
    system.require_positive_fields()?;
    let root = system.index_of(v)?;
    if let Some(s) = system.pin_of(v) {
        return Ok(SawBounds { bounds: BoundsPair::exact(Ratio::pinned(s)), nodes: 1, truncated: false });
    }
    let mut st = Stream { walker: Walker::new(system), horizon, budget, nodes: 0, truncated: false };
    st.walker.on_path[root] = true;
    let (lo, hi) = st.visit(root, None, 0, 0)?;
    Ok(SawBounds { bounds: BoundsPair { lower: Ratio(lo), upper: Ratio(hi) }, nodes: st.nodes, truncated: st.truncated })
}

/// Exact `R_{G,v}` from the fully expanded SAW tree.
pub fn saw_ratio_exact(system: &SpinSystem, v: VertexId, budget: u64) -> Result<Ratio> {
    Ok(saw_bounds(system, v, Horizon::Unbounded, budget)?.bounds.lower)
}

/// Materialises the SAW tree rooted at `v`. Free nodes outside `horizon`
/// become truncated stubs; pinned leaves are always emitted.
pub fn build_saw(system: &SpinSystem, v: VertexId, horizon: Horizon) -> Result<RootedTree> {
    let root = system.index_of(v)?;
    let mut tree = RootedTree::new(v, system.vertices()[root].lambda, system.pin_of(v));
    if system.pin_of(v).is_some() {
        return Ok(tree);
    }
    let mut w = Walker::new(system);
    w.on_path[root] = true;
    build_rec(&mut w, &mut tree, &horizon, root, 0, None, 0, 0);
    Ok(tree)
}

#[allow(clippy::too_many_arguments)]
fn build_rec(
    w: &mut Walker<'_>,
    tree: &mut RootedTree,
    horizon: &Horizon,
    u: usize,
    node: usize,
    arrival: Option<usize>,
    depth: u32,
    mdepth: u32,
) {
    let sys = w.sys;
    let step = match horizon.base() {
        Some(m) => ceil_log(m, w.free_count(u, arrival) + 1),
        None => 0,
    };
    let ks: Vec<usize> = w.entries(u, arrival).collect();
    for k in ks {
        let (x, e) = sys.adjacency(u)[k];
        let vert = sys.vertices()[x];
        match w.classify(u, k) {
            Child::Pinned(s) => {
                tree.push_child(node, vert.id, vert.lambda, Some(s));
            }
            Child::Free => {
                let c = tree.push_child(node, vert.id, vert.lambda, None);
                let cm = mdepth + step;
                if horizon.inside(depth + 1, cm, Some(mdepth)) {
                    w.leave_rank[u] = k;
                    w.on_path[x] = true;
                    build_rec(w, tree, horizon, x, c, Some(e), depth + 1, cm);
                    w.on_path[x] = false;
                } else {
                    tree.mark_truncated(c);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs;
    use crate::spin::{exact_log_ratio, SpinParams};
    use crate::tree::{absorb_pins, bounds_recursion, exact_tree_marginal};

    fn check(sys: &SpinSystem, tol: f64) {
        for v in sys.free_ids() {
            let r = saw_ratio_exact(sys, v, DEFAULT_BUDGET).unwrap();
            let want = exact_log_ratio(sys, v).unwrap();
            assert!((r.0.ln() - want).abs() < tol, "vertex {v}: {} vs {}", r.0.ln(), want);
        }
    }

    #[test]
    fn four_cycle() {
        let p = SpinParams::new(1.5, 2.0).unwrap();
        check(&SpinSystem::uniform(p, 4, 1.0, graphs::cycle(4)).unwrap(), 1e-12);
    }

    #[test]
    fn k4_and_triangle() {
        let p = SpinParams::new(1.2, 2.0).unwrap();
        check(&SpinSystem::uniform(p, 4, 1.0, graphs::complete(4)).unwrap(), 1e-10);
        let tri = SpinSystem::uniform(p, 3, 1.0, graphs::cycle(3)).unwrap();
        let t = build_saw(&tri, 0, Horizon::Unbounded).unwrap();
        assert_eq!(t.node(0).children.len(), 2);
        let pinned_leaves = t.nodes().iter().filter(|n| n.pin.is_some()).count();
        assert_eq!(pinned_leaves, 2);
    }

    #[test]
    fn tree_graph_has_no_cycle_pins() {
        let p = SpinParams::new(0.6, 2.0).unwrap();
        let sys = SpinSystem::uniform(p, 5, 1.3, graphs::star(4)).unwrap();
        let t = build_saw(&sys, 0, Horizon::Unbounded).unwrap();
        assert_eq!(t.len(), 5);
        assert!(t.nodes().iter().all(|n| n.pin.is_none()));
    }

    #[test]
    fn double_edge() {
        let p = SpinParams::new(0.8, 2.5).unwrap();
        let sys = SpinSystem::uniform(p, 3, 1.7, vec![(0, 1), (0, 1), (1, 2)]).unwrap();
        check(&sys, 1e-12);
    }

    #[test]
    fn streaming_matches_materialised() {
        let p = SpinParams::new(0.7, 2.0).unwrap();
        let sys = SpinSystem::uniform(p, 6, 1.4, graphs::complete(6))
            .unwrap()
            .with_pin(3, Spin::One)
            .unwrap();
        for h in [Horizon::Depth(2), Horizon::MBasedPadded { base: 3.0, ell: 2 }, Horizon::Unbounded] {
            let s = saw_bounds(&sys, 0, h, DEFAULT_BUDGET).unwrap().bounds;
            let full = build_saw(&sys, 0, Horizon::Unbounded).unwrap();
            let b = bounds_recursion(&absorb_pins(&full, &p), &p, &h);
            assert!((s.lower.0 - b.lower.0).abs() <= 1e-13 * b.lower.0);
            assert!((s.upper.0 - b.upper.0).abs() <= 1e-13 * b.upper.0);
        }
        let exact = exact_tree_marginal(&build_saw(&sys, 0, Horizon::Unbounded).unwrap(), &p).unwrap();
        assert!((exact.0.ln() - exact_log_ratio(&sys, 0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn budget_is_enforced() {
        let p = SpinParams::new(1.2, 2.0).unwrap();
        let sys = SpinSystem::uniform(p, 7, 1.0, graphs::complete(7)).unwrap();
        assert_eq!(saw_ratio_exact(&sys, 0, 100), Err(Error::BudgetExceeded { budget: 100 }));
    }
}
