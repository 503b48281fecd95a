use std::collections::HashSet;

use crate::builder::long_cycle::longest_cycle;
use crate::builder::{witness_classes, BuilderConfig};
use crate::components::PercolatedGraph;
use crate::error::{Error, Result};
use crate::hypercube::{Subcube, VertexId};
use crate::percolation::{ClassSet, PercolationSample};
use crate::walk::{Cycle, Path};

/// Subpaths of `cycle` with exactly `path_len` edges whose endpoints lie in
/// cells of `partition` not used by any other returned path. The sweep
/// walks the start position along the cycle and keeps every window whose
/// endpoint cells are still free. Windows do not wrap past the last vertex.
pub fn select_candidate_paths(
    cycle: &Cycle,
    path_len: usize,
    count: usize,
    partition: &[Subcube],
) -> Result<Vec<Path>> {
    let out = sweep_candidates(cycle, path_len, count, partition)?;
    if out.len() < count {
        return Err(Error::Capacity { what: "candidate paths", requested: count as u64, limit: out.len() as u64 });
    }
    Ok(out)
}

fn sweep_candidates(cycle: &Cycle, path_len: usize, count: usize, partition: &[Subcube]) -> Result<Vec<Path>> {
    let n = cycle.len();
    if path_len == 0 || path_len >= n {
        return Err(Error::Parameter(format!("a cycle of length {n} has no subpath of length {path_len}")));
    }
    let cell_of = |v: VertexId| -> Result<usize> {
        partition.iter().position(|c| c.contains(v)).ok_or(Error::Membership { vertex: v.0 })
    };
    let mut used = HashSet::new();
    let mut out = Vec::new();
    for i in 0..n - path_len {
        if out.len() == count {
            break;
        }
        let (a, b) = (cell_of(cycle.vertices[i])?, cell_of(cycle.vertices[i + path_len])?);
        if used.contains(&a) || used.contains(&b) {
            continue;
        }
        used.insert(a);
        used.insert(b);
        out.push(Path::new(cycle.vertices[i..=i + path_len].to_vec()));
    }
    Ok(out)
}

/// Everything the medium construction reuses across target lengths.
///
/// The cube splits into quadrants by the first two coordinates. `Q00`
/// hosts a long cycle `C`; a window `P` of `C` from `u` to `v` is closed
/// through `Q10` by the edges `u u'`, `v v'` along the first coordinate and
/// a shortest path from `v'` to `u'`. The remaining deficit is filled by
/// replacing edges `x y` of `P` with `x x^ y^ y`, where `^` flips the
/// second coordinate, so the middle edge lies in `Q01`.
pub(crate) struct MediumContext {
    cycle: Option<Cycle>,
    q10: PercolatedGraph,
    cells: Vec<Subcube>,
    cell_coords: u64,
    allowed: ClassSet,
}

impl MediumContext {
    pub(crate) fn new(s: &PercolationSample, cfg: &BuilderConfig) -> Result<MediumContext> {
        let d = s.d;
        if d < 4 {
            return Err(Error::Dimension(d));
        }
        let full = Subcube::full(d)?;
        let q00 = full.fix(0, false)?.fix(1, false)?;
        let q10 = full.fix(0, true)?.fix(1, false)?;
        let allowed = witness_classes(s);
        let g00 = PercolatedGraph::build(s, &q00, allowed)?;
        let cycle = longest_cycle(s, &g00, &cfg.long_cycle, usize::MAX);
        let half = d / 2;
        let cell_coords: u64 = (2..half).map(|c| 1u64 << c).sum();
        Ok(MediumContext {
            cycle,
            q10: PercolatedGraph::build(s, &q10, allowed)?,
            cells: q00.partition(cell_coords)?,
            cell_coords,
            allowed,
        })
    }

    /// Size of the component of `x` (a `Q10` vertex) inside its cell.
    fn cell_component(&self, s: &PercolationSample, x: VertexId) -> Result<usize> {
        let cell = Subcube::new(s.d, self.q10.scope().free_mask() & !self.cell_coords, x)?;
        let g = PercolatedGraph::build(s, &cell, self.allowed)?;
        let comps = g.components();
        Ok(comps.label(x).map_or(0, |l| comps.sizes()[l]))
    }

    pub(crate) fn build(&self, s: &PercolationSample, length: usize, cfg: &BuilderConfig) -> Result<Option<Cycle>> {
        if length < 4 || length % 2 == 1 {
            return Err(Error::Parameter(format!("length {length} is not an even number >= 4")));
        }
        let Some(c) = &self.cycle else {
            return Ok(None);
        };
        let d = s.d;
        let Some(path_len) = length.checked_sub(cfg.medium_pad).filter(|&l| l >= 1 && l < c.len()) else {
            return Ok(None);
        };
        let count = cfg.candidate_paths.unwrap_or_else(|| (d.pow(4)).min((c.len() / (2 * path_len)).max(1)));
        let candidates = sweep_candidates(c, path_len, count, &self.cells)?;
        let cell_dim = d - d / 2;
        let large = ((1usize << cell_dim) / d).max(1);
        let limit = cfg.medium_bridge_bound.min(cfg.medium_pad.saturating_sub(2)) as u32;
        let edge = |x: VertexId, y: VertexId| s.has_induced_edge(x, y, self.allowed);

        for p in &candidates {
            let (u, v) = (p.start(), p.end());
            let (u1, v1) = (u.flip(0), v.flip(0));
            if !edge(u, u1) || !edge(v, v1) {
                continue;
            }
            if self.cell_component(s, u1)? < large || self.cell_component(s, v1)? < large {
                continue;
            }
            let (Some(a), Some(b)) = (self.q10.local(v1), self.q10.local(u1)) else {
                continue;
            };
            if !self.q10.is_retained_local(a) || !self.q10.is_retained_local(b) {
                continue;
            }
            let Some(bridge) = self.q10.path_within(a, b, limit) else {
                continue;
            };
            let base_len = path_len + bridge.len() + 2;
            if base_len > length {
                continue;
            }
            let needed = (length - base_len) / 2;
            let Some(detours) = pick_detours(p, needed, edge) else {
                continue;
            };
            let mut vertices = Vec::with_capacity(length);
            let mut next = detours.iter().peekable();
            for (i, &x) in p.vertices.iter().enumerate() {
                vertices.push(x);
                if next.next_if(|&&j| j == i).is_some() {
                    vertices.push(x.flip(1));
                    vertices.push(p.vertices[i + 1].flip(1));
                }
            }
            vertices.extend_from_slice(&bridge.vertices);
            debug_assert_eq!(vertices.len(), length);
            return Ok(Some(Cycle::new(vertices)));
        }
        Ok(None)
    }
}

/// Indices `i` of vertex-disjoint path edges `P[i] P[i+1]` whose detour
/// through the second coordinate is present, `needed` of them, ascending.
fn pick_detours(p: &Path, needed: usize, edge: impl Fn(VertexId, VertexId) -> bool) -> Option<Vec<usize>> {
    let mut out = Vec::with_capacity(needed);
    let mut i = 0;
    while out.len() < needed && i + 1 < p.vertices.len() {
        let (x, y) = (p.vertices[i], p.vertices[i + 1]);
        let (x1, y1) = (x.flip(1), y.flip(1));
        if edge(x, x1) && edge(x1, y1) && edge(y1, y) {
            out.push(i);
            i += 2;
        } else {
            i += 1;
        }
    }
    (out.len() == needed).then_some(out)
}

/// A cycle of length exactly `length` from the medium construction.
pub fn build_medium(s: &PercolationSample, length: usize, cfg: &BuilderConfig) -> Result<Option<Cycle>> {
    MediumContext::new(s, cfg)?.build(s, length, cfg)
}
