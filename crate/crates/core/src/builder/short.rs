use std::collections::HashMap;
use std::sync::Mutex;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::builder::config::{stage_reach, GadgetConstants};
use crate::builder::very_short::build_very_short;
use crate::builder::{witness_classes, BuilderConfig, PURPOSE_GADGET_ORDER};
use crate::error::{Error, Result};
use crate::hypercube::{bit_positions, for_each_combination, unique_subcube_through, Subcube, VertexId};
use crate::monotone::search_with;
use crate::percolation::PercolationSample;
use crate::walk::Cycle;

/// How an extension by `k` is split into gadgets: `t` of size `k1` and one
/// of size `k2` (none when `k2 = 0`).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetPlan {
    pub k: usize,
    pub k1: usize,
    pub t: usize,
    pub k2: usize,
}

impl GadgetPlan {
    /// Plan for lengthening a cycle of length `2 * half_length` by `2 * k`
    /// inside an ambient cube of dimension `dim`.
    pub fn new(k: usize, dim: usize, half_length: usize, consts: &GadgetConstants) -> Result<GadgetPlan> {
        if k == 0 {
            return Ok(GadgetPlan { k, k1: consts.k1(dim), t: 0, k2: 0 });
        }
        let k1 = consts.k1(dim);
        let (lo, hi) = consts.k2_band(dim);
        if k1 == 0 || lo == 0 {
            return Err(Error::Plan(format!("gadget sizes vanish in dimension {dim}")));
        }
        if k < lo {
            return Err(Error::Plan(format!("k = {k} is below the remainder band [{lo}, {hi}]")));
        }
        // fewest unit gadgets that bring the remainder into the band
        let t = k.saturating_sub(hi).div_ceil(k1);
        let Some(k2) = k.checked_sub(t * k1).filter(|&r| r >= lo) else {
            return Err(Error::Plan(format!("no split of k = {k} leaves a remainder in [{lo}, {hi}]")));
        };
        let t_cap = consts.t_cap(half_length);
        if t > t_cap {
            return Err(Error::Plan(format!("needs {t} gadgets of size {k1}, cap is {t_cap}")));
        }
        let half = dim / 2;
        if (t > 0 && k1 > half) || k2 > half {
            return Err(Error::Plan(format!("gadget size exceeds half the ambient dimension {dim}")));
        }
        Ok(GadgetPlan { k, k1, t, k2 })
    }

    /// The arithmetic and band constraints [`GadgetPlan::new`] guarantees.
    pub fn satisfies(&self, dim: usize, half_length: usize, consts: &GadgetConstants) -> bool {
        if self.k != self.t * self.k1 + self.k2 || self.k1 != consts.k1(dim) {
            return false;
        }
        if self.k == 0 {
            return self.t == 0 && self.k2 == 0;
        }
        let (lo, hi) = consts.k2_band(dim);
        (lo..=hi).contains(&self.k2) && self.t <= consts.t_cap(half_length) && self.k2 <= dim / 2
    }
}

/// Lengthens `cycle` (inside `h`) to exactly `target` by replacing some of
/// its edges with gadgets through the coordinates `ambient` adds to `h`.
///
/// For a cycle edge `u u'` along coordinate `c`, the gadget of size `k`
/// picks the first set `S` of `k` extra coordinates (lexicographically)
/// whose crossing edge `(u + S)(u' + S)` is present, then needs maximal
/// monotone paths from `u` to `u + S` and from `u'` to `u' + S` inside the
/// subcubes they span. The replacement path has `2k + 1` edges. Gadgets on
/// vertex-disjoint edges live in disjoint cubes.
pub fn extend_cycle(
    s: &PercolationSample,
    h: &Subcube,
    cycle: &Cycle,
    target: usize,
    ambient: &Subcube,
    cfg: &BuilderConfig,
) -> Result<Option<Cycle>> {
    if !ambient.contains_cube(h) {
        return Err(Error::Parameter("the host subcube is not inside the ambient cube".into()));
    }
    if let Some(v) = cycle.vertices.iter().find(|&&v| !h.contains(v)) {
        return Err(Error::Membership { vertex: v.0 });
    }
    let n = cycle.len();
    if n < 4 || n % 2 == 1 || target < n || (target - n) % 2 == 1 {
        return Err(Error::Parameter(format!("cannot extend a cycle of length {n} to {target}")));
    }
    let extra = ambient.free_mask() & !h.free_mask();
    let m = extra.count_ones() as usize;
    let plan = GadgetPlan::new((target - n) / 2, 2 * m, n / 2, &cfg.gadget)?;
    if plan.k == 0 {
        return Ok(Some(cycle.clone()));
    }
    for size in [plan.k1, plan.k2] {
        if size > cfg.exhaustive_ceiling {
            return Err(Error::Capacity {
                what: "gadget monotone path",
                requested: size as u64,
                limit: cfg.exhaustive_ceiling as u64,
            });
        }
    }

    let allowed = witness_classes(s);
    let edge = |u: VertexId, v: VertexId| s.has_induced_edge(u, v, allowed);
    let extra_coords: Vec<usize> = bit_positions(extra).collect();
    let host_free = h.free_mask();
    // Outcomes are fixed by the sample, so retries only reorder the edges.
    let mut memo: HashMap<(usize, usize), Option<Vec<VertexId>>> = HashMap::new();
    let mut gadget = |pos: usize, size: usize| -> Result<Option<Vec<VertexId>>> {
        if let Some(r) = memo.get(&(pos, size)) {
            return Ok(r.clone());
        }
        let u = cycle.vertices[pos];
        let u1 = cycle.vertices[(pos + 1) % n];
        let r = build_gadget(u, u1, size, &extra_coords, ambient, cfg.exhaustive_ceiling, edge)?;
        memo.insert((pos, size), r.clone());
        Ok(r)
    };

    // every other edge of the cycle: (v0 v1), (v2 v3), ...
    let positions: Vec<usize> = (0..n).step_by(2).collect();
    for attempt in 0..cfg.retries as u64 {
        let mut order = positions.clone();
        if attempt > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(s.choice_seed(PURPOSE_GADGET_ORDER, attempt));
            order.shuffle(&mut rng);
        }
        let mut need1 = plan.t;
        let mut need2 = usize::from(plan.k2 > 0);
        let mut chosen: Vec<(usize, Vec<VertexId>)> = Vec::new();
        for &pos in &order {
            if need1 == 0 && need2 == 0 {
                break;
            }
            if need1 > 0 {
                if let Some(path) = gadget(pos, plan.k1)? {
                    chosen.push((pos, path));
                    need1 -= 1;
                    continue;
                }
            }
            if need2 > 0 {
                if let Some(path) = gadget(pos, plan.k2)? {
                    chosen.push((pos, path));
                    need2 -= 1;
                }
            }
        }
        if need1 > 0 || need2 > 0 {
            continue;
        }
        debug_assert!(gadget_cubes_disjoint(cycle, &chosen, host_free));
        chosen.sort_by_key(|&(pos, _)| pos);
        let mut vertices = Vec::with_capacity(target);
        let mut next = chosen.iter().peekable();
        for (i, &v) in cycle.vertices.iter().enumerate() {
            vertices.push(v);
            if let Some((_, interior)) = next.next_if(|&&(pos, _)| pos == i) {
                vertices.extend_from_slice(interior);
            }
        }
        debug_assert_eq!(vertices.len(), target);
        return Ok(Some(Cycle::new(vertices)));
    }
    Ok(None)
}

/// Interior vertices of the replacement path for the edge `u u1`, from the
/// `u` side to the `u1` side.
fn build_gadget(
    u: VertexId,
    u1: VertexId,
    size: usize,
    extra: &[usize],
    ambient: &Subcube,
    ceiling: usize,
    edge: impl Fn(VertexId, VertexId) -> bool + Copy,
) -> Result<Option<Vec<VertexId>>> {
    let mut crossing = None;
    for_each_combination(extra.len(), size, |idx| {
        let mask: u64 = idx.iter().map(|&i| 1u64 << extra[i]).sum();
        let (w, w1) = (VertexId(u.0 ^ mask), VertexId(u1.0 ^ mask));
        if edge(w, w1) {
            crossing = Some((w, w1));
            false
        } else {
            true
        }
    });
    let Some((w, w1)) = crossing else {
        return Ok(None);
    };
    let Some(p) = search_with(&unique_subcube_through(u, w, ambient)?, ceiling, edge)? else {
        return Ok(None);
    };
    let Some(p1) = search_with(&unique_subcube_through(u1, w1, ambient)?, ceiling, edge)? else {
        return Ok(None);
    };
    let mut interior: Vec<VertexId> = p.vertices[1..].to_vec();
    interior.extend(p1.vertices[1..].iter().rev());
    Ok(Some(interior))
}

/// The cube of the gadget on edge `u u'` fixes the host coordinates other
/// than the edge direction to their values at `u`; two such cubes meet iff
/// their edges agree on the host coordinates outside both directions.
fn gadget_cubes_disjoint(cycle: &Cycle, chosen: &[(usize, Vec<VertexId>)], host_free: u64) -> bool {
    let n = cycle.len();
    let key = |pos: usize| {
        let u = cycle.vertices[pos];
        let c = u.0 ^ cycle.vertices[(pos + 1) % n].0;
        (u.0, c)
    };
    for (i, &(a, _)) in chosen.iter().enumerate() {
        for &(b, _) in &chosen[i + 1..] {
            let (ua, ca) = key(a);
            let (ub, cb) = key(b);
            if (ua ^ ub) & host_free & !(ca | cb) == 0 {
                return false;
            }
        }
    }
    true
}

/// The staged short-cycle scheme for one sample. Stage `i` works inside
/// the cube on the first `D_i` coordinates (the others fixed to 0), with
/// `D_{i+1} = 2 D_i` up to `d`. Stage 0 uses very short cycles; stage
/// `i + 1` extends a cycle of stage `i` through the new coordinates.
/// Results are memoised per (stage, length), so one builder can serve many
/// target lengths.
pub struct ShortBuilder<'a> {
    s: &'a PercolationSample,
    cfg: &'a BuilderConfig,
    cubes: Vec<Subcube>,
    reach: Vec<usize>,
    memo: Mutex<HashMap<(usize, usize), Option<Cycle>>>,
}

impl<'a> ShortBuilder<'a> {
    pub fn new(s: &'a PercolationSample, cfg: &'a BuilderConfig) -> Result<ShortBuilder<'a>> {
        if cfg.d != s.d {
            return Err(Error::Parameter(format!("config is for d = {}, sample has d = {}", cfg.d, s.d)));
        }
        let dims = cfg.short_stages();
        let cubes = dims.iter().map(|&k| Subcube::with_coords(s.d, 0..k, VertexId(0))).collect::<Result<Vec<_>>>()?;
        let reach = stage_reach(&dims, &cfg.gadget, cfg.exhaustive_ceiling);
        Ok(ShortBuilder { s, cfg, cubes, reach, memo: Mutex::new(HashMap::new()) })
    }

    /// Longest length each stage could produce if every gadget succeeded.
    pub fn stage_reach(&self) -> &[usize] {
        &self.reach
    }

    pub fn build(&self, length: usize) -> Result<Option<Cycle>> {
        if length < 4 || length % 2 == 1 {
            return Err(Error::Parameter(format!("length {length} is not an even number >= 4")));
        }
        self.build_in(self.cubes.len() - 1, length)
    }

    fn build_in(&self, stage: usize, length: usize) -> Result<Option<Cycle>> {
        if length > self.reach[stage] {
            return Ok(None);
        }
        if let Some(hit) = self.memo.lock().unwrap().get(&(stage, length)) {
            return Ok(hit.clone());
        }
        let out = self.compute(stage, length)?;
        self.memo.lock().unwrap().insert((stage, length), out.clone());
        Ok(out)
    }

    fn compute(&self, stage: usize, length: usize) -> Result<Option<Cycle>> {
        if stage == 0 {
            let cube = &self.cubes[0];
            let ell = length / 2 - 1;
            if ell + 1 > cube.dim() || ell > self.cfg.exhaustive_ceiling {
                return Ok(None);
            }
            return build_very_short(self.s, cube, ell, self.cfg);
        }
        if let Some(c) = self.build_in(stage - 1, length)? {
            return Ok(Some(c));
        }
        let (h, ambient) = (&self.cubes[stage - 1], &self.cubes[stage]);
        let m = ambient.dim() - h.dim();
        let (lo, _) = self.cfg.gadget.k2_band(2 * m);
        let Some(top) = length.checked_sub(2 * lo.max(1)) else {
            return Ok(None);
        };
        let mut seeds_tried = 0;
        let mut seed = top.min(self.reach[stage - 1]) & !1;
        while seed >= 4 && seeds_tried < self.cfg.retries {
            let k = (length - seed) / 2;
            if GadgetPlan::new(k, 2 * m, seed / 2, &self.cfg.gadget).is_ok() {
                if let Some(c) = self.build_in(stage - 1, seed)? {
                    seeds_tried += 1;
                    if let Some(out) = extend_cycle(self.s, h, &c, length, ambient, self.cfg)? {
                        return Ok(Some(out));
                    }
                }
            }
            seed -= 2;
        }
        Ok(None)
    }
}

/// A cycle of length exactly `length` from the staged scheme.
pub fn build_short(s: &PercolationSample, length: usize, cfg: &BuilderConfig) -> Result<Option<Cycle>> {
    ShortBuilder::new(s, cfg)?.build(length)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::validate_cycle;
    use crate::percolation::ClassSet;

    #[test]
    fn plan_example() {
        let plan = GadgetPlan::new(100, 320, 200, &GadgetConstants::PAPER).unwrap();
        assert_eq!(plan, GadgetPlan { k: 100, k1: 10, t: 9, k2: 10 });
        assert!(plan.satisfies(320, 200, &GadgetConstants::PAPER));
    }

    #[test]
    fn plan_errors() {
        let g = GadgetConstants::PAPER;
        assert!(matches!(GadgetPlan::new(3, 320, 200, &g), Err(Error::Plan(_))));
        assert!(matches!(GadgetPlan::new(1000, 320, 200, &g), Err(Error::Plan(_))));
        assert!(matches!(GadgetPlan::new(5, 16, 200, &g), Err(Error::Plan(_))));
        let z = GadgetPlan::new(0, 16, 4, &g).unwrap();
        assert_eq!((z.t, z.k2), (0, 0));
    }

    fn cfg(d: usize) -> BuilderConfig {
        BuilderConfig::small_d(d, 0.5).unwrap()
    }

    fn square_in(h: &Subcube) -> Cycle {
        let c = h.free_coords();
        let b = h.base();
        Cycle::new(vec![b, b.flip(c[0]), b.flip(c[0]).flip(c[1]), b.flip(c[1])])
    }

    #[test]
    fn identity_extension() {
        let s = PercolationSample::bond(0, 8, 1.0).unwrap();
        let h = Subcube::with_coords(8, 0..4, VertexId(0)).unwrap();
        let c = square_in(&h);
        let out = extend_cycle(&s, &h, &c, 4, &Subcube::full(8).unwrap(), &cfg(8)).unwrap().unwrap();
        assert_eq!(out, c);
    }

    #[test]
    fn full_retention_reaches_every_planned_target() {
        let s = PercolationSample::bond(3, 12, 1.0).unwrap();
        let h = Subcube::with_coords(12, 0..6, VertexId(0)).unwrap();
        let ambient = Subcube::full(12).unwrap();
        let c = Cycle::new(h.gray_code_cycle().unwrap()[..].to_vec());
        let c = Cycle::new(c.vertices[..].to_vec());
        let mut hits = 0;
        for target in (c.len()..=c.len() + 200).step_by(2) {
            let k = (target - c.len()) / 2;
            if GadgetPlan::new(k, 12, c.len() / 2, &cfg(12).gadget).is_err() {
                continue;
            }
            let out = extend_cycle(&s, &h, &c, target, &ambient, &cfg(12)).unwrap().unwrap();
            assert_eq!(out.len(), target);
            assert_eq!(validate_cycle(&s, &out, ClassSet::ALL), Ok(()));
            hits += 1;
        }
        assert!(hits > 50);
    }

    #[test]
    fn short_builder_at_full_retention() {
        let d = 12;
        let s = PercolationSample::bond(5, d, 1.0).unwrap();
        let cfg = cfg(d);
        let b = ShortBuilder::new(&s, &cfg).unwrap();
        let top = *b.stage_reach().last().unwrap();
        for len in (4..=top).step_by(2) {
            let c = b.build(len).unwrap();
            let c = c.unwrap_or_else(|| panic!("length {len} missing"));
            assert_eq!(c.len(), len);
            assert_eq!(validate_cycle(&s, &c, ClassSet::ALL), Ok(()));
        }
    }

    #[test]
    fn short_builder_is_sound_under_percolation() {
        let d = 14;
        let cfg = cfg(d);
        for seed in 0..6 {
            let s = PercolationSample::bond(seed, d, 0.5).unwrap();
            let b = ShortBuilder::new(&s, &cfg).unwrap();
            for len in (cfg.bounds.very_short..=cfg.bounds.short).step_by(6) {
                if let Some(c) = b.build(len).unwrap() {
                    assert_eq!(c.len(), len);
                    assert_eq!(validate_cycle(&s, &c, ClassSet::ALL), Ok(()));
                }
            }
        }
    }
}
