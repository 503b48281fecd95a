//! Connected components of percolated subcubes: labelling, breadth-first
//! distances, diameter estimates and vertex expansion of connected sets.

use std::collections::{HashSet, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypercube::{Subcube, VertexId};
use crate::percolation::{ClassSet, PercolationSample};
use crate::walk::Path;

/// Largest subcube dimension materialised as an explicit graph.
pub const SCOPE_CEILING: usize = 24;
/// Component size up to which the exact diameter is computed.
pub const EXACT_DIAMETER_CEILING: usize = 1 << 20;
pub const DEFAULT_GIANT_THRESHOLD: f64 = 0.05;

const UNREACHED: u32 = u32::MAX;
const NO_LABEL: u32 = u32::MAX;

/// The percolated graph induced on the allowed vertices of a subcube,
/// materialised with local indices (see [`Subcube::vertex_at`]).
#[derive(Clone, Debug)]
pub struct PercolatedGraph {
    scope: Subcube,
    retained: Vec<bool>,
    /// Bit `j` set when the edge along the `j`-th free coordinate is present.
    adj: Vec<u32>,
}

impl PercolatedGraph {
    pub fn build(s: &PercolationSample, scope: &Subcube, allowed: ClassSet) -> Result<PercolatedGraph> {
        let dim = scope.dim();
        if dim > SCOPE_CEILING {
            return Err(Error::Capacity {
                what: "percolated subcube",
                requested: dim as u64,
                limit: SCOPE_CEILING as u64,
            });
        }
        if scope.ambient_dim() != s.d {
            return Err(Error::Parameter(format!(
                "scope lives in Q^{} but the sample is on Q^{}",
                scope.ambient_dim(),
                s.d
            )));
        }
        let n = 1usize << dim;
        let coords = scope.free_coords();
        let retained: Vec<bool> = (0..n).map(|i| s.vertex_allowed(scope.vertex_at(i as u64), allowed)).collect();
        let mut adj = vec![0u32; n];
        for i in 0..n {
            if !retained[i] {
                continue;
            }
            let v = scope.vertex_at(i as u64);
            for (j, &c) in coords.iter().enumerate() {
                let k = i ^ (1 << j);
                if k > i && retained[k] && s.has_edge(v, v.flip(c)) {
                    adj[i] |= 1 << j;
                    adj[k] |= 1 << j;
                }
            }
        }
        Ok(PercolatedGraph { scope: *scope, retained, adj })
    }

    /// The full `Q^d` with every vertex retained and exactly the given edges.
    pub fn from_edges(d: usize, edges: &[(VertexId, VertexId)]) -> Result<PercolatedGraph> {
        let scope = Subcube::full(d)?;
        if d > SCOPE_CEILING {
            return Err(Error::Capacity {
                what: "percolated subcube",
                requested: d as u64,
                limit: SCOPE_CEILING as u64,
            });
        }
        let n = 1usize << d;
        let mut adj = vec![0u32; n];
        for &(u, v) in edges {
            let c = u.differing_coord(v).ok_or(Error::NotAdjacent(u, v))?;
            if !u.fits(d) || !v.fits(d) {
                return Err(Error::Membership { vertex: u.0.max(v.0) });
            }
            adj[u.0 as usize] |= 1 << c;
            adj[v.0 as usize] |= 1 << c;
        }
        Ok(PercolatedGraph { scope, retained: vec![true; n], adj })
    }

    pub fn scope(&self) -> &Subcube {
        &self.scope
    }

    /// Number of local vertices, retained or not.
    pub fn order(&self) -> usize {
        self.adj.len()
    }

    pub fn retained_count(&self) -> usize {
        self.retained.iter().filter(|&&r| r).count()
    }

    pub fn local(&self, v: VertexId) -> Option<usize> {
        self.scope.local_index(v).map(|i| i as usize)
    }

    pub fn vertex(&self, local: usize) -> VertexId {
        self.scope.vertex_at(local as u64)
    }

    pub fn is_retained(&self, v: VertexId) -> bool {
        self.local(v).is_some_and(|i| self.retained[i])
    }

    pub(crate) fn is_retained_local(&self, i: usize) -> bool {
        self.retained[i]
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        match (self.local(u), self.local(v)) {
            (Some(a), Some(b)) => {
                let x = a ^ b;
                x.is_power_of_two() && self.adj[a] & (x as u32) != 0
            }
            _ => false,
        }
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.local(v).map_or(0, |i| self.adj[i].count_ones() as usize)
    }

    /// Local neighbours of a local vertex.
    pub(crate) fn neighbors_local(&self, i: usize) -> impl Iterator<Item = usize> {
        let mut m = self.adj[i];
        std::iter::from_fn(move || {
            if m == 0 {
                None
            } else {
                let j = m.trailing_zeros();
                m &= m - 1;
                Some(i ^ (1 << j))
            }
        })
    }

    fn require_retained(&self, v: VertexId) -> Result<usize> {
        match self.local(v) {
            Some(i) if self.retained[i] => Ok(i),
            _ => Err(Error::NotRetained { vertex: v.0 }),
        }
    }

    /// Breadth-first distances from `src` (local), [`u32::MAX`] when
    /// unreachable. Stops expanding beyond `limit` hops.
    pub(crate) fn bfs_local(&self, src: usize, limit: u32) -> (Vec<u32>, Vec<u32>) {
        let n = self.order();
        let mut dist = vec![UNREACHED; n];
        let mut parent = vec![UNREACHED; n];
        let mut queue = VecDeque::new();
        dist[src] = 0;
        queue.push_back(src);
        while let Some(x) = queue.pop_front() {
            if dist[x] >= limit {
                continue;
            }
            for y in self.neighbors_local(x) {
                if dist[y] == UNREACHED {
                    dist[y] = dist[x] + 1;
                    parent[y] = x as u32;
                    queue.push_back(y);
                }
            }
        }
        (dist, parent)
    }

    /// Shortest path of at most `limit` edges between two local vertices.
    pub(crate) fn path_within(&self, a: usize, b: usize, limit: u32) -> Option<Path> {
        let (dist, parent) = self.bfs_local(a, limit);
        if dist[b] == UNREACHED {
            return None;
        }
        let mut out = vec![self.vertex(b)];
        let mut x = b;
        while x != a {
            x = parent[x] as usize;
            out.push(self.vertex(x));
        }
        out.reverse();
        Some(Path::new(out))
    }

    /// Breadth-first shortest path, `None` when `u` and `v` lie in different
    /// components.
    pub fn shortest_path(&self, u: VertexId, v: VertexId) -> Result<Option<Path>> {
        let a = self.require_retained(u)?;
        let b = self.require_retained(v)?;
        Ok(self.path_within(a, b, UNREACHED))
    }

    /// Labels every retained vertex with its component. Labels are ordered
    /// by decreasing size (ties by smallest local index), so label 0 is a
    /// largest component.
    pub fn components(&self) -> Components<'_> {
        let n = self.order();
        let mut raw = vec![NO_LABEL; n];
        let mut sizes: Vec<usize> = Vec::new();
        let mut stack = Vec::new();
        for start in 0..n {
            if !self.retained[start] || raw[start] != NO_LABEL {
                continue;
            }
            let label = sizes.len() as u32;
            raw[start] = label;
            stack.push(start);
            let mut size = 0;
            while let Some(x) = stack.pop() {
                size += 1;
                for y in self.neighbors_local(x) {
                    if raw[y] == NO_LABEL {
                        raw[y] = label;
                        stack.push(y);
                    }
                }
            }
            sizes.push(size);
        }
        // Stable sort keeps discovery order (smallest local index) on ties.
        let mut order: Vec<usize> = (0..sizes.len()).collect();
        order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]));
        let mut rename = vec![0u32; sizes.len()];
        for (new, &old) in order.iter().enumerate() {
            rename[old] = new as u32;
        }
        let labels = raw.into_iter().map(|l| if l == NO_LABEL { l } else { rename[l as usize] }).collect();
        let sizes = order.iter().map(|&o| sizes[o]).collect();
        Components { graph: self, labels, sizes }
    }
}

/// Component labelling of a [`PercolatedGraph`].
#[derive(Clone, Debug)]
pub struct Components<'g> {
    graph: &'g PercolatedGraph,
    labels: Vec<u32>,
    sizes: Vec<usize>,
}

impl<'g> Components<'g> {
    pub fn graph(&self) -> &'g PercolatedGraph {
        self.graph
    }

    /// Component sizes in decreasing order; index = label.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn label(&self, v: VertexId) -> Option<usize> {
        let i = self.graph.local(v)?;
        self.label_local(i)
    }

    pub(crate) fn label_local(&self, i: usize) -> Option<usize> {
        match self.labels[i] {
            NO_LABEL => None,
            l => Some(l as usize),
        }
    }

    pub fn members(&self, label: usize) -> Vec<VertexId> {
        (0..self.labels.len()).filter(|&i| self.labels[i] == label as u32).map(|i| self.graph.vertex(i)).collect()
    }

    pub fn summary(&self, threshold: f64) -> ComponentSummary {
        let retained: usize = self.sizes.iter().sum();
        let largest = self.sizes.first().copied().unwrap_or(0);
        let giant = retained > 0 && largest as f64 >= threshold * retained as f64;
        ComponentSummary {
            component_sizes: self.sizes.clone(),
            retained,
            threshold,
            giant_index: giant.then_some(0),
            giant_fraction: if retained == 0 { 0.0 } else { largest as f64 / retained as f64 },
            second_size: self.sizes.get(1).copied().unwrap_or(0),
            diameter: None,
        }
    }

    /// Diameter of one component. `Exact` runs a BFS from every member;
    /// `DoubleSweep` runs two and yields a lower bound.
    pub fn diameter(&self, label: usize, mode: DiameterMethod) -> Result<Diameter> {
        let size =
            *self.sizes.get(label).ok_or_else(|| Error::Parameter(format!("no component with label {label}")))?;
        let members: Vec<usize> = (0..self.labels.len()).filter(|&i| self.labels[i] == label as u32).collect();
        let ecc = |src: usize| -> (u32, usize) {
            let (dist, _) = self.graph.bfs_local(src, UNREACHED);
            members.iter().map(|&i| (dist[i], i)).max_by_key(|&(d, i)| (d, std::cmp::Reverse(i))).unwrap()
        };
        let value = match mode {
            DiameterMethod::Exact => {
                if size > EXACT_DIAMETER_CEILING {
                    return Err(Error::Capacity {
                        what: "exact diameter",
                        requested: size as u64,
                        limit: EXACT_DIAMETER_CEILING as u64,
                    });
                }
                members.iter().map(|&i| ecc(i).0).max().unwrap_or(0)
            }
            DiameterMethod::DoubleSweep => {
                let (_, far) = ecc(members[0]);
                ecc(far).0
            }
        };
        Ok(Diameter { value, method: mode })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiameterMethod {
    Exact,
    /// Two BFS sweeps; the value is a lower bound.
    DoubleSweep,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diameter {
    pub value: u32,
    pub method: DiameterMethod,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentSummary {
    /// Decreasing.
    pub component_sizes: Vec<usize>,
    pub retained: usize,
    pub threshold: f64,
    pub giant_index: Option<usize>,
    /// Largest component over retained vertices.
    pub giant_fraction: f64,
    pub second_size: usize,
    pub diameter: Option<Diameter>,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GiantInfo {
    pub index: usize,
    pub size: usize,
    /// Largest over second largest; `None` when there is no second component.
    pub gap_ratio: Option<f64>,
}

/// Builds the percolated graph and labels its components.
pub fn components(
    s: &PercolationSample,
    scope: &Subcube,
    allowed: ClassSet,
) -> Result<(ComponentSummary, PercolatedGraph)> {
    let g = PercolatedGraph::build(s, scope, allowed)?;
    let summary = g.components().summary(DEFAULT_GIANT_THRESHOLD);
    Ok((summary, g))
}

/// The largest component when it holds at least `threshold` of the retained
/// vertices.
pub fn giant_component(summary: &ComponentSummary, threshold: f64) -> Option<GiantInfo> {
    let largest = *summary.component_sizes.first()?;
    if (largest as f64) < threshold * summary.retained as f64 {
        return None;
    }
    let gap_ratio = match summary.second_size {
        0 => None,
        second => Some(largest as f64 / second as f64),
    };
    Some(GiantInfo { index: 0, size: largest, gap_ratio })
}

pub fn shortest_path(
    s: &PercolationSample,
    scope: &Subcube,
    allowed: ClassSet,
    u: VertexId,
    v: VertexId,
) -> Result<Option<Path>> {
    PercolatedGraph::build(s, scope, allowed)?.shortest_path(u, v)
}

/// `|N(S)| / |S|`, where `N(S)` are the retained vertices outside `S` joined
/// to `S` by a present edge. `S` must be non-empty and connected.
pub fn expansion_ratio(g: &PercolatedGraph, set: &[VertexId]) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::Parameter("expansion of an empty set".into()));
    }
    let mut inside = HashSet::with_capacity(set.len());
    for &v in set {
        inside.insert(g.require_retained(v)?);
    }
    // connectivity of S inside the percolated graph
    let start = *inside.iter().next().unwrap();
    let mut seen = HashSet::from([start]);
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        for y in g.neighbors_local(x) {
            if inside.contains(&y) && seen.insert(y) {
                stack.push(y);
            }
        }
    }
    if seen.len() != inside.len() {
        return Err(Error::Disconnected);
    }
    let boundary: HashSet<usize> =
        inside.iter().flat_map(|&x| g.neighbors_local(x)).filter(|y| !inside.contains(y)).collect();
    Ok(boundary.len() as f64 / inside.len() as f64)
}

/// Grows a connected set of exactly `size` vertices from a uniformly chosen
/// retained vertex, adding a uniformly random boundary vertex at each step.
/// `None` when the chosen start lies in a component smaller than `size`.
pub fn sample_connected_set<R: Rng + ?Sized>(g: &PercolatedGraph, rng: &mut R, size: usize) -> Option<Vec<VertexId>> {
    let retained: Vec<usize> = (0..g.order()).filter(|&i| g.retained[i]).collect();
    if retained.is_empty() || size == 0 {
        return None;
    }
    let start = retained[rng.gen_range(0..retained.len())];
    let mut inside = HashSet::from([start]);
    let mut order = vec![start];
    let mut frontier: Vec<usize> = Vec::new();
    let mut on_frontier = HashSet::new();
    for y in g.neighbors_local(start) {
        if on_frontier.insert(y) {
            frontier.push(y);
        }
    }
    while order.len() < size {
        if frontier.is_empty() {
            return None;
        }
        let x = frontier.swap_remove(rng.gen_range(0..frontier.len()));
        inside.insert(x);
        order.push(x);
        for y in g.neighbors_local(x) {
            if !inside.contains(&y) && on_frontier.insert(y) {
                frontier.push(y);
            }
        }
    }
    Some(order.into_iter().map(|i| g.vertex(i)).collect())
}
