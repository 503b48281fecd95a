//! Monotone paths inside oriented subcubes.
//!
//! A monotone path visits at most one vertex per layer; a maximal one runs
//! from the root to the antipode and has as many edges as the subcube has
//! dimensions.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypercube::{OrientedSubcube, VertexId};
use crate::percolation::PercolationSample;

/// Default ceiling on the dimension handled by the exhaustive search.
pub const EXHAUSTIVE_CEILING: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotonePath {
    pub vertices: Vec<VertexId>,
    pub host: OrientedSubcube,
}

impl MonotonePath {
    /// Number of edges.
    pub fn len(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_maximal(&self) -> bool {
        self.len() == self.host.dim()
    }

    /// Adjacent consecutive vertices inside the host with strictly
    /// increasing layers.
    pub fn is_valid(&self) -> bool {
        let mut prev_layer = None;
        for (i, &v) in self.vertices.iter().enumerate() {
            let Ok(layer) = self.host.layer_of(v) else {
                return false;
            };
            if let Some(pl) = prev_layer {
                if layer <= pl || !self.vertices[i - 1].is_adjacent(v) {
                    return false;
                }
            }
            prev_layer = Some(layer);
        }
        true
    }
}

/// The order in which the greedy walk inspects the upward edges of a vertex.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum TieOrder {
    #[default]
    Ascending,
    Descending,
    /// Explicit coordinate priority; free coordinates missing from the list
    /// are inspected afterwards in ascending order.
    Explicit(Vec<usize>),
}

impl TieOrder {
    fn coords(&self, host: &OrientedSubcube) -> Vec<usize> {
        let free = host.cube().free_coords();
        match self {
            TieOrder::Ascending => free,
            TieOrder::Descending => free.into_iter().rev().collect(),
            TieOrder::Explicit(order) => {
                let mut out: Vec<usize> = Vec::with_capacity(free.len());
                for &c in order {
                    if host.cube().is_free(c) && !out.contains(&c) {
                        out.push(c);
                    }
                }
                out.extend(free.into_iter().filter(|c| !order.contains(c)));
                out
            }
        }
    }
}

/// Random greedy walk: from the root, repeatedly take the first present edge
/// (in `tie_order`) to the next layer. Succeeds iff the top layer is reached.
pub fn greedy_monotone_path(
    s: &PercolationSample,
    host: &OrientedSubcube,
    tie_order: &TieOrder,
) -> Option<MonotonePath> {
    greedy_with(host, tie_order, |u, v| s.has_edge(u, v))
}

pub(crate) fn greedy_with(
    host: &OrientedSubcube,
    tie_order: &TieOrder,
    mut edge: impl FnMut(VertexId, VertexId) -> bool,
) -> Option<MonotonePath> {
    let coords = tie_order.coords(host);
    let mut cur = host.root();
    let mut vertices = vec![cur];
    for _ in 0..coords.len() {
        // Upward edges flip a coordinate still equal to the root's value.
        let next = coords
            .iter()
            .filter(|&&c| cur.bit(c) == host.root().bit(c))
            .map(|&c| cur.flip(c))
            .find(|&w| edge(cur, w))?;
        vertices.push(next);
        cur = next;
    }
    Some(MonotonePath { vertices, host: *host })
}

/// Exhaustive search for a maximal monotone path root to antipode.
pub fn exists_maximal_monotone_path(s: &PercolationSample, host: &OrientedSubcube) -> Result<Option<MonotonePath>> {
    search_with(host, EXHAUSTIVE_CEILING, |u, v| s.has_edge(u, v))
}

/// Depth-first search over present upward edges. Whether a vertex can reach
/// the antipode monotonically does not depend on how it was reached, so
/// failed vertices are memoised once and never re-entered.
pub(crate) fn search_with(
    host: &OrientedSubcube,
    ceiling: usize,
    mut edge: impl FnMut(VertexId, VertexId) -> bool,
) -> Result<Option<MonotonePath>> {
    let dim = host.dim();
    if dim > ceiling {
        return Err(Error::Capacity {
            what: "exhaustive monotone path search",
            requested: dim as u64,
            limit: ceiling as u64,
        });
    }
    let coords = host.cube().free_coords();
    let root = host.root();
    let top = host.antipode();
    let mut dead: HashSet<VertexId> = HashSet::new();
    // Stack of (vertex, index of the next coordinate to try).
    let mut stack: Vec<(VertexId, usize)> = vec![(root, 0)];
    while let Some(&mut (cur, ref mut next_idx)) = stack.last_mut() {
        if cur == top {
            let vertices = stack.iter().map(|&(v, _)| v).collect();
            return Ok(Some(MonotonePath { vertices, host: *host }));
        }
        let mut advanced = None;
        while *next_idx < coords.len() {
            let c = coords[*next_idx];
            *next_idx += 1;
            if cur.bit(c) != root.bit(c) {
                continue;
            }
            let w = cur.flip(c);
            if !dead.contains(&w) && edge(cur, w) {
                advanced = Some(w);
                break;
            }
        }
        match advanced {
            Some(w) => stack.push((w, 0)),
            None => {
                dead.insert(cur);
                stack.pop();
            }
        }
    }
    Ok(None)
}

/// `prod_{j=1}^{D} (1 - (1 - rho)^j)`: the probability that the greedy walk
/// reaches the top layer of `Q^D_rho`.
pub fn greedy_success_probability_exact(dim: usize, rho: f64) -> f64 {
    (1..=dim).map(|j| 1.0 - (1.0 - rho).powi(j as i32)).product()
}

/// `(rho D / (2e))^D`, valid for `D >= 1` and `rho <= 1/D`.
pub fn short_path_lower_bound(dim: usize, rho: f64) -> Result<f64> {
    if dim == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&rho) || rho > 1.0 / dim as f64 + f64::EPSILON {
        return Err(Error::Domain(format!("rho = {rho} exceeds 1/D = {}", 1.0 / dim as f64)));
    }
    Ok((rho * dim as f64 / (2.0 * std::f64::consts::E)).powi(dim as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercube::Subcube;

    fn host(d: usize) -> OrientedSubcube {
        OrientedSubcube::full(d).unwrap()
    }

    #[test]
    fn greedy_with_all_edges_is_maximal() {
        for d in 0..10 {
            let s = PercolationSample::bond(1, d.max(1), 1.0).unwrap();
            let h = OrientedSubcube::full(d).unwrap();
            let p = greedy_monotone_path(&s, &h, &TieOrder::Ascending).unwrap();
            assert!(p.is_valid() && p.is_maximal());
        }
    }

    #[test]
    fn greedy_without_edges_fails() {
        let s = PercolationSample::bond(1, 5, 0.0).unwrap();
        assert!(greedy_monotone_path(&s, &host(5), &TieOrder::Ascending).is_none());
        assert!(exists_maximal_monotone_path(&s, &host(5)).unwrap().is_none());
    }

    #[test]
    fn tie_order_controls_first_choice() {
        let s = PercolationSample::bond(0, 4, 1.0).unwrap();
        let asc = greedy_monotone_path(&s, &host(4), &TieOrder::Ascending).unwrap();
        let desc = greedy_monotone_path(&s, &host(4), &TieOrder::Descending).unwrap();
        let expl = greedy_monotone_path(&s, &host(4), &TieOrder::Explicit(vec![2, 0])).unwrap();
        assert_eq!(asc.vertices[1], VertexId(1));
        assert_eq!(desc.vertices[1], VertexId(8));
        assert_eq!(expl.vertices[1], VertexId(4));
        assert_eq!(expl.vertices[2], VertexId(5));
    }

    #[test]
    fn greedy_success_implies_existence() {
        for seed in 0..300 {
            let s = PercolationSample::bond(seed, 7, 0.45).unwrap();
            let h = OrientedSubcube::new(Subcube::full(7).unwrap(), VertexId(seed % 128)).unwrap();
            let g = greedy_monotone_path(&s, &h, &TieOrder::Ascending);
            let e = exists_maximal_monotone_path(&s, &h).unwrap();
            if let Some(g) = &g {
                assert!(g.is_valid() && g.is_maximal());
                assert!(e.is_some());
            }
            if let Some(e) = &e {
                assert!(e.is_valid() && e.is_maximal());
                for w in e.vertices.windows(2) {
                    assert!(s.has_edge(w[0], w[1]));
                }
            }
        }
    }

    #[test]
    fn greedy_is_deterministic() {
        let s = PercolationSample::bond(99, 12, 0.3).unwrap();
        let a = greedy_monotone_path(&s, &host(12), &TieOrder::Ascending);
        let b = greedy_monotone_path(&s, &host(12), &TieOrder::Ascending);
        assert_eq!(a, b);
    }

    #[test]
    fn exhaustive_ceiling() {
        let s = PercolationSample::bond(1, 24, 0.5).unwrap();
        assert!(matches!(exists_maximal_monotone_path(&s, &host(21)), Err(Error::Capacity { .. })));
    }

    #[test]
    fn exact_product_values() {
        assert_eq!(greedy_success_probability_exact(0, 0.3), 1.0);
        assert!((greedy_success_probability_exact(1, 0.37) - 0.37).abs() < 1e-15);
        assert!((greedy_success_probability_exact(2, 0.5) - 0.375).abs() < 1e-15);
        assert!((greedy_success_probability_exact(3, 1.0 / 3.0) - 95.0 / 729.0).abs() < 1e-15);
    }

    #[test]
    fn lower_bound_values() {
        let base = 1.0 / (2.0 * std::f64::consts::E);
        assert!((short_path_lower_bound(3, 1.0 / 3.0).unwrap() - base.powi(3)).abs() < 1e-15);
        assert!((short_path_lower_bound(3, 1.0 / 3.0).unwrap() - 6.2234e-3).abs() < 1e-7);
        assert!((short_path_lower_bound(4, 0.25).unwrap() - 1.1447e-3).abs() < 1e-7);
        assert!(matches!(short_path_lower_bound(3, 0.5), Err(Error::Domain(_))));
        assert!(matches!(short_path_lower_bound(0, 0.5), Err(Error::Domain(_))));
    }

    /// Enumerates all edge subsets of the oriented `Q^2` and sums the
    /// probability mass on which the greedy walk succeeds.
    #[test]
    fn greedy_mass_on_q2_by_enumeration() {
        let rho: f64 = 0.5;
        // edges of Q^2 as (u, v) pairs, indexed 0..4
        let edges = [(0u64, 1u64), (0, 2), (1, 3), (2, 3)];
        let h = host(2);
        let mut mass = 0.0;
        for subset in 0u32..16 {
            let present = |u: VertexId, v: VertexId| {
                edges
                    .iter()
                    .enumerate()
                    .any(|(i, &(a, b))| subset >> i & 1 == 1 && ((a, b) == (u.0, v.0) || (b, a) == (u.0, v.0)))
            };
            let k = subset.count_ones() as i32;
            let prob = rho.powi(k) * (1.0 - rho).powi(4 - k);
            if greedy_with(&h, &TieOrder::Ascending, present).is_some() {
                mass += prob;
            }
        }
        assert!((mass - 0.375).abs() < 1e-15);
        assert!((mass - greedy_success_probability_exact(2, rho)).abs() < 1e-15);
    }

    #[test]
    fn lower_bound_is_below_exact_product() {
        for dim in 1..=10usize {
            for k in 1..=20usize {
                if k * dim > 20 {
                    continue;
                }
                let rho = k as f64 / 20.0;
                let lb = short_path_lower_bound(dim, rho).unwrap();
                assert!(lb <= greedy_success_probability_exact(dim, rho));
            }
        }
    }
}
