use std::collections::HashSet;

use crate::builder::long_cycle::longest_cycle;
use crate::builder::BuilderConfig;
use crate::components::PercolatedGraph;
use crate::error::{Error, Result};
use crate::hypercube::{four_cycle_partners, Subcube, VertexId};
use crate::percolation::{ClassSet, PercolationSample, VertexClass, VertexModel};
use crate::walk::Cycle;

const UNREACHED: u32 = u32::MAX;

/// The sample the long construction runs on: bond samples get the
/// tri-partition for `cfg.delta`, tri-partition samples are used as they are.
pub(crate) fn tri_sample(s: &PercolationSample, cfg: &BuilderConfig) -> Result<PercolationSample> {
    match s.vertex_model {
        VertexModel::TriPartition { .. } => Ok(*s),
        VertexModel::None => s.with_vertex_model(VertexModel::tri_partition(cfg.delta)),
        VertexModel::Keep { .. } => {
            Err(Error::Parameter("the long construction needs a bond sample or a tri-partition sample".into()))
        }
    }
}

/// Reusable parts of the long construction for one sample.
///
/// `C1` is a long cycle among `V1` vertices, enumerated from its smallest
/// vertex. A window of `C1` from `v_a` in the first `k` positions to `v_b`
/// in positions `T - 2k .. T - k` is closed by edges into the giant `L2` of
/// the `V2` graph and a shortest path inside `L2`. Each missing pair of
/// edges is then supplied by a 4-cycle detour `x x' y' y` through two
/// unused `V3` vertices.
pub(crate) struct LongContext {
    s: PercolationSample,
    c1: Option<Cycle>,
    g2: PercolatedGraph,
    in_giant: Vec<bool>,
}

impl LongContext {
    pub(crate) fn new(s: &PercolationSample, cfg: &BuilderConfig) -> Result<LongContext> {
        let s = tri_sample(s, cfg)?;
        let full = Subcube::full(s.d)?;
        let g1 = PercolatedGraph::build(&s, &full, ClassSet::V1)?;
        let c1 = longest_cycle(&s, &g1, &cfg.long_cycle, usize::MAX).map(|c| c.canonical());
        let g2 = PercolatedGraph::build(&s, &full, ClassSet::V2)?;
        let in_giant = {
            let comps = g2.components();
            (0..g2.order()).map(|i| comps.label_local(i) == Some(0)).collect()
        };
        Ok(LongContext { s, c1, g2, in_giant })
    }

    #[cfg(test)]
    pub(crate) fn cycle(&self) -> Option<&Cycle> {
        self.c1.as_ref()
    }

    /// Neighbours of `x` in `L2` joined to `x` by a present edge.
    fn giant_neighbours(&self, x: VertexId) -> impl Iterator<Item = usize> + '_ {
        (0..self.s.d)
            .map(move |c| x.flip(c))
            .filter(move |&w| self.s.has_edge(x, w))
            .filter_map(|w| self.g2.local(w))
            .filter(|&i| self.in_giant[i])
    }

    pub(crate) fn build(&self, length: usize, cfg: &BuilderConfig) -> Result<Option<Cycle>> {
        if length < 4 || length % 2 == 1 {
            return Err(Error::Parameter(format!("length {length} is not an even number >= 4")));
        }
        let Some(c1) = &self.c1 else {
            return Ok(None);
        };
        let k = cfg.long_window;
        if k == 0 || 3 * k > length || length - k > c1.len() {
            return Ok(None);
        }
        let v = &c1.vertices;
        let s2 = length - 2 * k..length - k;

        // (deficit, a, w1, b, w2) for the best b per bridge start
        let mut options = Vec::new();
        let starts = (0..k).flat_map(|a| self.giant_neighbours(v[a]).map(move |w| (a, w)));
        for (a, w1) in starts.take(cfg.long_bridge_attempts) {
            let (dist, _) = self.g2.bfs_local(w1, UNREACHED);
            for b in s2.clone() {
                let best = self
                    .giant_neighbours(v[b])
                    .filter(|&w2| dist[w2] != UNREACHED)
                    .map(|w2| (dist[w2] as usize, w2))
                    .min();
                if let Some((dw, w2)) = best {
                    let total = (b - a) + dw + 2;
                    if total <= length {
                        options.push((length - total, a, w1, b, w2));
                    }
                }
            }
        }
        options.sort_unstable();
        options.dedup();

        for &(deficit, a, w1, b, w2) in options.iter().take(cfg.retries as usize) {
            let Some(detours) = self.pick_detours(&v[a..=b], deficit / 2) else {
                continue;
            };
            let bridge =
                self.g2.path_within(w1, w2, UNREACHED).expect("bridge end was reached by the breadth-first search");
            let mut vertices = Vec::with_capacity(length);
            let mut next = detours.iter().peekable();
            for (i, &x) in v[a..=b].iter().enumerate() {
                vertices.push(x);
                if let Some(&(_, x1, y1)) = next.next_if(|&&(j, _, _)| j == i) {
                    vertices.push(x1);
                    vertices.push(y1);
                }
            }
            vertices.extend(bridge.vertices.iter().rev());
            debug_assert_eq!(vertices.len(), length);
            return Ok(Some(Cycle::new(vertices)));
        }
        Ok(None)
    }

    /// `needed` detours on vertex-disjoint edges of the path, each through
    /// two `V3` vertices no other detour uses.
    fn pick_detours(&self, path: &[VertexId], needed: usize) -> Option<Vec<(usize, VertexId, VertexId)>> {
        let is_v3 = |x: VertexId| self.s.effective_class(x) == VertexClass::V3;
        let mut used = HashSet::new();
        let mut out = Vec::with_capacity(needed);
        let mut i = 0;
        while out.len() < needed && i + 1 < path.len() {
            let (x, y) = (path[i], path[i + 1]);
            let partner = four_cycle_partners(x, y, self.s.d).ok()?.into_iter().find(|&(x1, y1)| {
                is_v3(x1)
                    && is_v3(y1)
                    && !used.contains(&x1)
                    && !used.contains(&y1)
                    && self.s.has_edge(x, x1)
                    && self.s.has_edge(x1, y1)
                    && self.s.has_edge(y1, y)
            });
            match partner {
                Some((x1, y1)) => {
                    used.insert(x1);
                    used.insert(y1);
                    out.push((i, x1, y1));
                    i += 2;
                }
                None => i += 1,
            }
        }
        (out.len() == needed).then_some(out)
    }
}

/// A cycle of length exactly `length` from the long construction.
pub fn build_long(s: &PercolationSample, length: usize, cfg: &BuilderConfig) -> Result<Option<Cycle>> {
    LongContext::new(s, cfg)?.build(length, cfg)
}
