use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::builder::{LongCycleConfig, PURPOSE_LONG_CYCLE};
use crate::components::PercolatedGraph;
use crate::error::{Error, Result};
use crate::hypercube::Subcube;
use crate::percolation::{mix64, ClassSet, PercolationSample};
use crate::walk::Cycle;

const OFF_PATH: u32 = u32::MAX;

/// Outcome of [`find_long_cycle`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LongCycle {
    Found(Cycle),
    /// The budget ran out first; `best` is the longest cycle seen.
    BelowTarget {
        best: Option<Cycle>,
    },
}

impl LongCycle {
    pub fn cycle(&self) -> Option<&Cycle> {
        match self {
            LongCycle::Found(c) => Some(c),
            LongCycle::BelowTarget { best } => best.as_ref(),
        }
    }

    pub fn found(self) -> Option<Cycle> {
        match self {
            LongCycle::Found(c) => Some(c),
            LongCycle::BelowTarget { .. } => None,
        }
    }

    pub fn into_best(self) -> Option<Cycle> {
        match self {
            LongCycle::Found(c) => Some(c),
            LongCycle::BelowTarget { best } => best,
        }
    }
}

/// Searches for a cycle of length at least `min_fraction` times the number
/// of allowed vertices of `scope`.
///
/// With every edge and vertex present this is the Gray-code cycle. Otherwise
/// it is a heuristic on the largest component: a path grown greedily towards
/// low-degree vertices (Warnsdorff's rule), reversed once when it first
/// stalls, then kept alive by endpoint rotations, with a few restarts. A
/// cycle is read off whenever the current end has a neighbour earlier on
/// the path. There is no optimality guarantee.
pub fn find_long_cycle(
    s: &PercolationSample,
    scope: &Subcube,
    allowed: ClassSet,
    min_fraction: f64,
    cfg: &LongCycleConfig,
) -> Result<LongCycle> {
    if !(0.0..=1.0).contains(&min_fraction) {
        return Err(Error::Parameter(format!("min_fraction = {min_fraction} is not in [0, 1]")));
    }
    if s.p >= 1.0 && s.all_vertices_allowed(allowed) {
        if let Some(gray) = scope.gray_code_cycle() {
            return Ok(LongCycle::Found(Cycle::new(gray)));
        }
    }
    let g = PercolatedGraph::build(s, scope, allowed)?;
    let target = ((min_fraction * g.retained_count() as f64).ceil() as usize).max(4);
    let best = longest_cycle(s, &g, cfg, target);
    Ok(match best {
        Some(c) if c.len() >= target => LongCycle::Found(c),
        best => LongCycle::BelowTarget { best },
    })
}

/// Longest cycle the heuristic finds in the largest component of `g`,
/// stopping early once `target` is reached.
pub(crate) fn longest_cycle(
    s: &PercolationSample,
    g: &PercolatedGraph,
    cfg: &LongCycleConfig,
    target: usize,
) -> Option<Cycle> {
    let comps = g.components();
    let &size = comps.sizes().first()?;
    if size < 4 {
        return None;
    }
    let members: Vec<usize> = (0..g.order()).filter(|&i| comps.label_local(i) == Some(0)).collect();
    let scope = g.scope();
    let salt = mix64(scope.free_mask() ^ scope.base().0.rotate_left(32));
    let mut best: Option<Vec<usize>> = None;
    for restart in 0..cfg.restarts.max(1) as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(s.choice_seed(PURPOSE_LONG_CYCLE, restart) ^ salt);
        let start = members[rng.gen_range(0..members.len())];
        let mut search = Search::new(g, start, size, cfg);
        search.run(&mut rng, target);
        if let Some(c) = search.best {
            if best.as_ref().is_none_or(|b| c.len() > b.len()) {
                best = Some(c);
            }
        }
        if best.as_ref().is_some_and(|b| b.len() >= target.min(size)) {
            break;
        }
    }
    best.map(|c| Cycle::new(c.into_iter().map(|i| g.vertex(i)).collect()))
}

struct Search<'g> {
    g: &'g PercolatedGraph,
    path: Vec<usize>,
    pos: Vec<u32>,
    best: Option<Vec<usize>>,
    component_size: usize,
    stall_limit: usize,
    work_budget: usize,
}

impl<'g> Search<'g> {
    fn new(g: &'g PercolatedGraph, start: usize, component_size: usize, cfg: &LongCycleConfig) -> Search<'g> {
        let mut pos = vec![OFF_PATH; g.order()];
        pos[start] = 0;
        Search {
            g,
            path: vec![start],
            pos,
            best: None,
            component_size,
            stall_limit: cfg.rotations_per_stall,
            work_budget: cfg.rotation_work_factor.saturating_mul(component_size),
        }
    }

    fn unvisited_degree(&self, x: usize) -> usize {
        self.g.neighbors_local(x).filter(|&y| self.pos[y] == OFF_PATH).count()
    }

    fn extend(&mut self) -> bool {
        let end = *self.path.last().unwrap();
        let next =
            self.g.neighbors_local(end).filter(|&y| self.pos[y] == OFF_PATH).min_by_key(|&y| self.unvisited_degree(y));
        match next {
            Some(y) => {
                self.pos[y] = self.path.len() as u32;
                self.path.push(y);
                true
            }
            None => false,
        }
    }

    fn reverse_from(&mut self, i: usize) {
        self.path[i..].reverse();
        for (k, &x) in self.path.iter().enumerate().skip(i) {
            self.pos[x] = k as u32;
        }
    }

    /// Records the longest cycle closed by the current end.
    fn close(&mut self) {
        let end = *self.path.last().unwrap();
        let n = self.path.len();
        let earliest = self.g.neighbors_local(end).map(|y| self.pos[y]).filter(|&p| p != OFF_PATH).min();
        if let Some(i) = earliest {
            let len = n - i as usize;
            if len >= 4 && self.best.as_ref().is_none_or(|b| len > b.len()) {
                self.best = Some(self.path[i as usize..].to_vec());
            }
        }
    }

    fn done(&self, target: usize) -> bool {
        self.best.as_ref().is_some_and(|b| b.len() >= target || b.len() == self.component_size)
    }

    fn run<R: Rng>(&mut self, rng: &mut R, target: usize) {
        let mut reversed = false;
        let mut stalls = 0;
        let mut work = 0usize;
        loop {
            while self.extend() {
                stalls = 0;
            }
            self.close();
            if self.done(target) || self.path.len() == self.component_size && reversed {
                return;
            }
            if !reversed {
                reversed = true;
                self.path.reverse();
                for (k, &x) in self.path.iter().enumerate() {
                    self.pos[x] = k as u32;
                }
                self.close();
                continue;
            }
            stalls += 1;
            if stalls > self.stall_limit || work > self.work_budget {
                return;
            }
            let n = self.path.len();
            let end = self.path[n - 1];
            let pivots: Vec<usize> = self
                .g
                .neighbors_local(end)
                .map(|y| self.pos[y])
                .filter(|&p| p != OFF_PATH && (p as usize) + 2 < n)
                .map(|p| p as usize)
                .collect();
            if pivots.is_empty() {
                return;
            }
            // Prefer a rotation whose new end can grow, then the shortest reversal.
            let growing = pivots.iter().copied().filter(|&i| self.unvisited_degree(self.path[i + 1]) > 0).max();
            let i = growing.unwrap_or_else(|| pivots[rng.gen_range(0..pivots.len())]);
            work += n - i - 1;
            self.reverse_from(i + 1);
        }
    }
}
