//! Deterministic graph families and seeded random generators.

use alloc::vec::Vec;

use rand::Rng;

use crate::spin::VertexId;

pub type EdgeList = Vec<(VertexId, VertexId)>;

pub fn path(n: usize) -> EdgeList {
    (1..n as VertexId).map(|i| (i - 1, i)).collect()
}

pub fn cycle(n: usize) -> EdgeList {
    let mut e = path(n);
    if n > 2 {
        e.push((n as VertexId - 1, 0));
    }
    e
}

pub fn complete(n: usize) -> EdgeList {
    let n = n as VertexId;
    (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect()
}

pub fn star(leaves: usize) -> EdgeList {
    (1..=leaves as VertexId).map(|i| (0, i)).collect()
}

pub fn petersen() -> EdgeList {
    let mut e = Vec::new();
    for i in 0..5 {
        e.push((i, (i + 1) % 5));
        e.push((i, i + 5));
        e.push((i + 5, (i + 2) % 5 + 5));
    }
    e
}

/// Each of the `n(n-1)/2` pairs present independently with probability `p`.
pub fn erdos_renyi<R: Rng + ?Sized>(rng: &mut R, n: usize, p: f64) -> EdgeList {
    let mut e = Vec::new();
    for a in 0..n as VertexId {
        for b in a + 1..n as VertexId {
            if rng.gen_bool(p.clamp(0.0, 1.0)) {
                e.push((a, b));
            }
        }
    }
    e
}

/// Simple graph with every degree at most `max_degree`: random pairs are
/// offered `attempts` times and kept when both endpoints have room.
pub fn bounded_degree<R: Rng + ?Sized>(rng: &mut R, n: usize, max_degree: usize, attempts: usize) -> EdgeList {
    let mut deg = alloc::vec![0usize; n];
    let mut e: EdgeList = Vec::new();
    if n < 2 {
        return e;
    }
    for _ in 0..attempts {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b || deg[a] >= max_degree || deg[b] >= max_degree {
            continue;
        }
        let (x, y) = (a.min(b) as VertexId, a.max(b) as VertexId);
        if e.contains(&(x, y)) {
            continue;
        }
        deg[a] += 1;
        deg[b] += 1;
        e.push((x, y));
    }
    e
}

/// Random multigraph: `m` edges between uniformly chosen distinct endpoints,
/// repeats allowed.
pub fn multigraph<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> EdgeList {
    let mut e = Vec::new();
    if n < 2 {
        return e;
    }
    while e.len() < m {
        let a = rng.gen_range(0..n as VertexId);
        let b = rng.gen_range(0..n as VertexId);
        if a != b {
            e.push((a, b));
        }
    }
    e
}
