//! Ground truth for small instances: the cycle validator and an exhaustive
//! cycle-length search on explicit graphs.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::hypercube::{EdgeId, VertexId};
use crate::percolation::{ClassSet, PercolationSample, VertexClass};
use crate::walk::Cycle;

/// Largest explicit instance (in vertices) the exhaustive search accepts.
pub const ORACLE_CEILING: usize = 1 << 12;

/// First reason a vertex sequence is not a cycle of the sample.
#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    #[error("cycle has {length} vertices, fewer than 4")]
    TooShort { length: usize },
    #[error("cycle length {length} is odd")]
    OddLength { length: usize },
    #[error("vertex {vertex:#x} outside Q^{d}")]
    WrongDimension { vertex: u64, d: usize },
    #[error("vertex {vertex:#x} appears twice")]
    RepeatedVertex { vertex: u64 },
    #[error("positions {index} and {next} are not adjacent in the hypercube")]
    NotAdjacent { index: usize, next: usize },
    #[error("edge {u:#x}-{v:#x} is absent from the sample")]
    EdgeAbsent { u: u64, v: u64 },
    #[error("vertex {vertex:#x} has class {class:?}, which the witness does not allow")]
    ClassNotAllowed { vertex: u64, class: VertexClass },
}

/// Checks that `cycle` is a cycle of even length at least 4 with distinct
/// vertices, hypercube-adjacent cyclic neighbours, every edge present in
/// `s` and every vertex in an `allowed` class.
pub fn validate_cycle(s: &PercolationSample, cycle: &Cycle, allowed: ClassSet) -> std::result::Result<(), Violation> {
    let n = cycle.len();
    if n < 4 {
        return Err(Violation::TooShort { length: n });
    }
    if n % 2 == 1 {
        return Err(Violation::OddLength { length: n });
    }
    let mut seen = std::collections::HashSet::with_capacity(n);
    for &v in &cycle.vertices {
        if !v.fits(s.d) {
            return Err(Violation::WrongDimension { vertex: v.0, d: s.d });
        }
        if !seen.insert(v) {
            return Err(Violation::RepeatedVertex { vertex: v.0 });
        }
    }
    for (i, (u, v)) in cycle.edges().enumerate() {
        if !u.is_adjacent(v) {
            return Err(Violation::NotAdjacent { index: i, next: (i + 1) % n });
        }
        if !s.has_edge(u, v) {
            return Err(Violation::EdgeAbsent { u: u.0, v: v.0 });
        }
    }
    for &v in &cycle.vertices {
        if !s.vertex_allowed(v, allowed) {
            return Err(Violation::ClassNotAllowed { vertex: v.0, class: s.effective_class(v) });
        }
    }
    Ok(())
}

/// A spanning subgraph of `Q^d` held as per-vertex coordinate masks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitGraph {
    d: usize,
    adj: Vec<u32>,
}

impl ExplicitGraph {
    pub fn empty(d: usize) -> Result<ExplicitGraph> {
        if d == 0 || (1usize << d.min(63)) > ORACLE_CEILING {
            return Err(Error::Capacity {
                what: "explicit instance",
                requested: 1u64 << d.min(63),
                limit: ORACLE_CEILING as u64,
            });
        }
        Ok(ExplicitGraph { d, adj: vec![0; 1 << d] })
    }

    pub fn full(d: usize) -> Result<ExplicitGraph> {
        let mut g = ExplicitGraph::empty(d)?;
        let all = (1u32 << d) - 1;
        g.adj.iter_mut().for_each(|m| *m = all);
        Ok(g)
    }

    /// The percolated graph induced on vertices whose class is `allowed`.
    pub fn from_sample(s: &PercolationSample, allowed: ClassSet) -> Result<ExplicitGraph> {
        let mut g = ExplicitGraph::empty(s.d)?;
        for i in 0..g.adj.len() as u64 {
            let u = VertexId(i);
            for c in 0..s.d {
                let v = u.flip(c);
                if !u.bit(c) && s.has_induced_edge(u, v, allowed) {
                    g.insert(EdgeId::canonical(u, c));
                }
            }
        }
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn insert(&mut self, e: EdgeId) {
        let (u, v) = e.endpoints();
        self.adj[u.0 as usize] |= 1 << e.coord;
        self.adj[v.0 as usize] |= 1 << e.coord;
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        match u.differing_coord(v) {
            Some(c) if u.fits(self.d) && v.fits(self.d) => self.adj[u.0 as usize] >> c & 1 == 1,
            _ => false,
        }
    }

    /// Canonical edges in increasing (base, coordinate) order.
    pub fn edges(&self) -> Vec<EdgeId> {
        let mut out = Vec::new();
        for (i, &m) in self.adj.iter().enumerate() {
            for c in 0..self.d {
                if m >> c & 1 == 1 && i >> c & 1 == 0 {
                    out.push(EdgeId::canonical(VertexId(i as u64), c));
                }
            }
        }
        out
    }

    /// Edge-list text: a `dim <d>` header followed by one canonical edge per
    /// line as `<base coordinates> <flipped coordinate, 1-based>`. Lines
    /// starting with `#` are comments.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("dim {}\n", self.d);
        for e in self.edges() {
            let _ = writeln!(out, "{} {}", e.base.display(self.d), e.coord + 1);
        }
        out
    }

    pub fn parse_edge_list(text: &str) -> Result<ExplicitGraph> {
        let mut graph: Option<ExplicitGraph> = None;
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse { line: no + 1, message };
            let mut parts = line.split_whitespace();
            let (a, b) = match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => return Err(parse_err("expected two fields".into())),
            };
            match graph.as_mut() {
                None => {
                    if a != "dim" {
                        return Err(parse_err("missing `dim <d>` header".into()));
                    }
                    let d: usize = b.parse().map_err(|_| parse_err(format!("bad dimension {b:?}")))?;
                    graph = Some(ExplicitGraph::empty(d)?);
                }
                Some(g) => {
                    let (base, len) = VertexId::parse(a).map_err(|e| parse_err(e.to_string()))?;
                    if len != g.d {
                        return Err(parse_err(format!("vertex {a:?} does not have {} coordinates", g.d)));
                    }
                    let coord: usize = b.parse().map_err(|_| parse_err(format!("bad coordinate {b:?}")))?;
                    if coord == 0 || coord > g.d {
                        return Err(parse_err(format!("coordinate {coord} outside 1..={}", g.d)));
                    }
                    let e = EdgeId::from_base(base, coord - 1).map_err(|e| parse_err(e.to_string()))?;
                    g.insert(e);
                }
            }
        }
        graph.ok_or(Error::Parse { line: 0, message: "empty edge list".into() })
    }

    fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> {
        let mut m = self.adj[v];
        std::iter::from_fn(move || {
            if m == 0 {
                None
            } else {
                let c = m.trailing_zeros();
                m &= m - 1;
                Some(v ^ (1 << c))
            }
        })
    }
}

/// Exact decision by depth-first search. Each cycle is found once: from its
/// smallest vertex, through larger vertices only, with the second vertex
/// smaller than the last. A branch is cut when the start is farther (in
/// the graph on vertices above the start) than the remaining edge budget.
pub fn cycle_of_length_exists(g: &ExplicitGraph, length: usize) -> Result<bool> {
    Ok(find_cycle_of_length(g, length)?.is_some())
}

/// As [`cycle_of_length_exists`], returning the cycle found.
pub fn find_cycle_of_length(g: &ExplicitGraph, length: usize) -> Result<Option<Cycle>> {
    let n = g.vertex_count();
    if n > ORACLE_CEILING {
        return Err(Error::Capacity {
            what: "exhaustive cycle search",
            requested: n as u64,
            limit: ORACLE_CEILING as u64,
        });
    }
    if length < 4 || length % 2 == 1 || length > n {
        return Ok(None);
    }
    let mut search = Search {
        g,
        length,
        start: 0,
        dist: vec![u32::MAX; n],
        on_path: vec![false; n],
        path: Vec::with_capacity(length),
    };
    for start in 0..n {
        if g.adj[start].count_ones() < 2 {
            continue;
        }
        search.start = start;
        search.distances_above();
        search.path.clear();
        search.path.push(start);
        search.on_path[start] = true;
        let found = search.extend();
        search.on_path[start] = false;
        if found {
            let cycle = Cycle::new(search.path.iter().map(|&i| VertexId(i as u64)).collect());
            return Ok(Some(cycle));
        }
    }
    Ok(None)
}

struct Search<'a> {
    g: &'a ExplicitGraph,
    length: usize,
    start: usize,
    dist: Vec<u32>,
    on_path: Vec<bool>,
    path: Vec<usize>,
}

impl Search<'_> {
    fn distances_above(&mut self) {
        self.dist.iter_mut().for_each(|x| *x = u32::MAX);
        let mut queue = std::collections::VecDeque::from([self.start]);
        self.dist[self.start] = 0;
        while let Some(x) = queue.pop_front() {
            for y in self.g.neighbors(x) {
                if y > self.start && self.dist[y] == u32::MAX {
                    self.dist[y] = self.dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
    }

    /// Leaves the cycle in `path` on success.
    fn extend(&mut self) -> bool {
        let x = *self.path.last().unwrap();
        let used = self.path.len() - 1;
        if used == self.length - 1 {
            let diff = x ^ self.start;
            return self.path[1] < x && diff.is_power_of_two() && self.g.adj[x] >> diff.trailing_zeros() & 1 == 1;
        }
        let remaining_after = (self.length - used - 1) as u32;
        let neighbors: Vec<usize> = self.g.neighbors(x).collect();
        for y in neighbors {
            if y <= self.start || self.on_path[y] || self.dist[y] > remaining_after {
                continue;
            }
            self.on_path[y] = true;
            self.path.push(y);
            if self.extend() {
                return true;
            }
            self.path.pop();
            self.on_path[y] = false;
        }
        false
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumSet {
    pub lengths: BTreeSet<usize>,
    pub exhaustive: bool,
}

/// Every cycle length of the instance, by exhaustive search per even length.
pub fn full_spectrum(g: &ExplicitGraph) -> Result<SpectrumSet> {
    let mut lengths = BTreeSet::new();
    for length in (4..=g.vertex_count()).step_by(2) {
        if cycle_of_length_exists(g, length)? {
            lengths.insert(length);
        }
    }
    Ok(SpectrumSet { lengths, exhaustive: true })
}
