use crate::builder::{witness_classes, BuilderConfig};
use crate::error::{Error, Result};
use crate::hypercube::{deposit, OrientedSubcube, Subcube, VertexId};
use crate::monotone::search_with;
use crate::percolation::PercolationSample;
use crate::walk::Cycle;

/// A cycle of length `2 * ell + 2` inside `scope`.
///
/// The scope is cut into `(ell + 1)`-dimensional cells along its lowest free
/// coordinates. Each cell is split along its last free coordinate into two
/// `ell`-cubes joined by a matching; a root `a` of the lower half works when
/// both halves carry a maximal monotone path from `a` (resp. its partner)
/// to the antipode, and the two matching edges at the ends are present.
pub fn build_very_short(
    s: &PercolationSample,
    scope: &Subcube,
    ell: usize,
    cfg: &BuilderConfig,
) -> Result<Option<Cycle>> {
    if ell == 0 || ell + 1 > scope.dim() {
        return Err(Error::Parameter(format!("ell = {ell} needs 1 <= ell < {} (scope dimension)", scope.dim())));
    }
    if ell > cfg.exhaustive_ceiling {
        return Err(Error::Capacity {
            what: "very short cycle half-length",
            requested: ell as u64,
            limit: cfg.exhaustive_ceiling as u64,
        });
    }
    let allowed = witness_classes(s);
    let edge = |u: VertexId, v: VertexId| s.has_induced_edge(u, v, allowed);

    let free = scope.free_coords();
    let cell_mask: u64 = free[..=ell].iter().map(|&c| 1u64 << c).sum();
    let outer_mask = scope.free_mask() & !cell_mask;
    let split = free[ell];
    let half_mask = cell_mask & !(1u64 << split);
    let mut budget = cfg.very_short_search_budget;

    for j in 0..1u64 << outer_mask.count_ones() {
        let base = VertexId(scope.base().0 | deposit(j, outer_mask));
        let lower = Subcube::new(scope.ambient_dim(), half_mask, base)?;
        let upper = Subcube::new(scope.ambient_dim(), half_mask, base.flip(split))?;
        // `a` and its antipode give the same cycle, so fix the top half-coordinate
        for r in 0..1u64 << (ell - 1) {
            let a = lower.vertex_at(r);
            let top = VertexId(a.0 ^ half_mask);
            let (a1, top1) = (a.flip(split), top.flip(split));
            if !edge(a, a1) || !edge(top, top1) {
                continue;
            }
            if budget == 0 {
                return Ok(None);
            }
            budget -= 1;
            let Some(p0) = search_with(&OrientedSubcube::new(lower, a)?, cfg.exhaustive_ceiling, edge)? else {
                continue;
            };
            let Some(p1) = search_with(&OrientedSubcube::new(upper, a1)?, cfg.exhaustive_ceiling, edge)? else {
                continue;
            };
            let mut vertices = p0.vertices;
            vertices.extend(p1.vertices.into_iter().rev());
            debug_assert_eq!(vertices.len(), 2 * ell + 2);
            return Ok(Some(Cycle::new(vertices)));
        }
    }
    Ok(None)
}
