use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monotone::EXHAUSTIVE_CEILING;
use crate::percolation::delta_for_epsilon;

/// Named sets of constants.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// The asymptotic constants as stated. Most regimes are empty below
    /// astronomically large `d`.
    Paper,
    /// Constants rescaled so every regime is non-trivial for `d` around 8..24.
    SmallD,
}

impl std::str::FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Profile> {
        match s {
            "paper" => Ok(Profile::Paper),
            "small-d" => Ok(Profile::SmallD),
            other => Err(Error::Parameter(format!("unknown profile {other:?}"))),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    VeryShort,
    Short,
    Medium,
    Long,
}

impl Regime {
    pub const ALL: [Regime; 4] = [Regime::VeryShort, Regime::Short, Regime::Medium, Regime::Long];

    fn index(self) -> usize {
        self as usize
    }
}

/// Inclusive upper ends of the four length intervals. The intervals are
/// `[4, very_short]`, `(very_short, short]`, `(short, medium]` and
/// `(medium, long]`; any of them may be empty.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeBounds {
    pub very_short: usize,
    pub short: usize,
    pub medium: usize,
    pub long: usize,
}

impl RegimeBounds {
    /// Clamps raw ends into a consecutive cover of `[4, long]`.
    fn clamped(very_short: usize, short: usize, medium: usize, long: usize) -> RegimeBounds {
        let even = |x: usize| x & !1;
        let long = even(long);
        let very_short = even(very_short).min(long);
        let short = even(short).clamp(very_short, long);
        let medium = even(medium).clamp(short, long);
        RegimeBounds { very_short, short, medium, long }
    }

    pub fn upper(&self, r: Regime) -> usize {
        [self.very_short, self.short, self.medium, self.long][r.index()]
    }

    pub fn lower(&self, r: Regime) -> usize {
        match r {
            Regime::VeryShort => 4,
            other => self.upper(Regime::ALL[other.index() - 1]) + 2,
        }
    }

    /// The regime whose interval holds `length`, if any.
    pub fn regime_of(&self, length: usize) -> Option<Regime> {
        if length < 4 || length % 2 == 1 {
            return None;
        }
        Regime::ALL.into_iter().find(|&r| length <= self.upper(r))
    }

    pub fn validate(&self) -> Result<()> {
        let ends = [self.very_short, self.short, self.medium, self.long];
        if ends.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Parameter(format!("regime ends {ends:?} are not increasing")));
        }
        Ok(())
    }
}

/// Sizes of the edge-replacement gadgets for an extension inside an ambient
/// cube of dimension `D` around a cycle of length `2L`:
/// `k1 = D / k1_divisor`, `k2` in `[D / k2_divisor, k2_high * D / k2_divisor]`,
/// at most `L / t_cap_divisor` gadgets of size `k1`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetConstants {
    pub k1_divisor: usize,
    pub k2_divisor: usize,
    pub k2_high: usize,
    pub t_cap_divisor: usize,
    /// Round vanishing sizes up to 1 instead of failing.
    pub floor_at_one: bool,
}

impl GadgetConstants {
    pub const PAPER: GadgetConstants =
        GadgetConstants { k1_divisor: 32, k2_divisor: 64, k2_high: 3, t_cap_divisor: 16, floor_at_one: false };

    pub const SMALL_D: GadgetConstants =
        GadgetConstants { k1_divisor: 4, k2_divisor: 8, k2_high: 3, t_cap_divisor: 2, floor_at_one: true };

    pub fn k1(&self, dim: usize) -> usize {
        let k1 = dim / self.k1_divisor;
        if self.floor_at_one {
            k1.max(1)
        } else {
            k1
        }
    }

    /// Inclusive band for the remainder gadget.
    pub fn k2_band(&self, dim: usize) -> (usize, usize) {
        let lo = dim / self.k2_divisor;
        let hi = self.k2_high * dim / self.k2_divisor;
        if self.floor_at_one {
            let lo = lo.max(1);
            (lo, hi.max(lo))
        } else {
            (lo, hi)
        }
    }

    pub fn t_cap(&self, half_length: usize) -> usize {
        half_length / self.t_cap_divisor
    }
}

/// Parameters of the long-cycle search.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongCycleConfig {
    pub restarts: u32,
    /// Consecutive rotations without extension before a restart gives up.
    pub rotations_per_stall: usize,
    /// Total reversal work per restart, as a multiple of the scope order.
    pub rotation_work_factor: usize,
}

impl Default for LongCycleConfig {
    fn default() -> Self {
        LongCycleConfig { restarts: 3, rotations_per_stall: 64, rotation_work_factor: 40 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuilderConfig {
    pub profile: Profile,
    pub d: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub bounds: RegimeBounds,
    pub gadget: GadgetConstants,
    /// Outer retries of a randomized step, each with a fresh choice seed.
    pub retries: u32,
    pub exhaustive_ceiling: usize,
    /// Number of exhaustive monotone-path searches one very-short build
    /// may run.
    pub very_short_search_budget: usize,
    /// Dimension of the first stage of the short-cycle scheme.
    pub short_seed_dim: usize,
    /// Length left for the bridge and detours in the medium construction;
    /// candidate paths have length `target - medium_pad`.
    pub medium_pad: usize,
    /// Longest bridge accepted in the medium construction.
    pub medium_bridge_bound: usize,
    /// Candidate paths in the medium construction; `None` derives the count
    /// from the cycle (`min(d^4, |C| / (2 * path length))`).
    pub candidate_paths: Option<usize>,
    /// Window size `k` of the long construction.
    pub long_window: usize,
    /// Bridges tried per long build.
    pub long_bridge_attempts: usize,
    pub long_cycle: LongCycleConfig,
}

fn pow_saturating(base: usize, exp: u32) -> usize {
    base.checked_pow(exp).unwrap_or(usize::MAX)
}

impl BuilderConfig {
    pub fn for_profile(profile: Profile, d: usize, epsilon: Option<f64>) -> Result<BuilderConfig> {
        match profile {
            Profile::Paper => BuilderConfig::paper(d, epsilon.unwrap_or(0.1)),
            Profile::SmallD => BuilderConfig::small_d(d, epsilon.unwrap_or(0.5)),
        }
    }

    /// Constants exactly as in the asymptotic argument.
    pub fn paper(d: usize, epsilon: f64) -> Result<BuilderConfig> {
        check(d, epsilon)?;
        let n = 1usize << d;
        let long = ((1.0 - epsilon) * n as f64).floor() as usize;
        let log_d = (d.max(2) as f64).ln();
        Ok(BuilderConfig {
            profile: Profile::Paper,
            d,
            epsilon,
            delta: delta_for_epsilon(epsilon)?,
            bounds: RegimeBounds::clamped(d / 5, pow_saturating(d, 10), n >> 4.min(d), long),
            gadget: GadgetConstants::PAPER,
            retries: 16,
            exhaustive_ceiling: EXHAUSTIVE_CEILING,
            very_short_search_budget: 1 << 16,
            short_seed_dim: (d / 32).max(16).min(d),
            medium_pad: d * d,
            medium_bridge_bound: (d as f64 * log_d.powi(3)).floor() as usize,
            candidate_paths: Some(pow_saturating(d, 4)),
            long_window: (n / pow_saturating(d, 8).max(1)).max(1),
            long_bridge_attempts: 8,
            long_cycle: LongCycleConfig::default(),
        })
    }

    /// Desk-scale constants.
    pub fn small_d(d: usize, epsilon: f64) -> Result<BuilderConfig> {
        check(d, epsilon)?;
        let n = 1usize << d;
        let long = ((1.0 - epsilon) * n as f64).floor() as usize;
        let very_short = d.min(2 * (EXHAUSTIVE_CEILING + 1));
        let short_seed_dim = d.div_ceil(4).max(4).min(d);
        let short = short_reach(d, short_seed_dim, &GadgetConstants::SMALL_D, EXHAUSTIVE_CEILING);
        Ok(BuilderConfig {
            profile: Profile::SmallD,
            d,
            epsilon,
            delta: delta_for_epsilon(epsilon)?,
            bounds: RegimeBounds::clamped(very_short, short, n >> 4.min(d), long),
            gadget: GadgetConstants::SMALL_D,
            retries: 16,
            exhaustive_ceiling: EXHAUSTIVE_CEILING,
            very_short_search_budget: 1 << 12,
            short_seed_dim,
            medium_pad: 2 * d,
            medium_bridge_bound: 2 * d,
            candidate_paths: None,
            long_window: (n / (d * d).max(1)).max(2),
            long_bridge_attempts: 8,
            long_cycle: LongCycleConfig::default(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        check(self.d, self.epsilon)?;
        self.bounds.validate()?;
        if self.retries == 0 {
            return Err(Error::Parameter("retry budget must be positive".into()));
        }
        if self.exhaustive_ceiling > EXHAUSTIVE_CEILING {
            return Err(Error::Parameter(format!(
                "exhaustive ceiling {} above the supported {EXHAUSTIVE_CEILING}",
                self.exhaustive_ceiling
            )));
        }
        Ok(())
    }

    /// Stage dimensions of the short-cycle scheme: doubling from the seed
    /// dimension, capped at `d`.
    pub fn short_stages(&self) -> Vec<usize> {
        stages(self.d, self.short_seed_dim)
    }
}

fn check(d: usize, epsilon: f64) -> Result<()> {
    if !(2..=crate::hypercube::MAX_DIM).contains(&d) {
        return Err(Error::Dimension(d));
    }
    if !(0.0..1.0).contains(&epsilon) || epsilon == 0.0 {
        return Err(Error::Parameter(format!("epsilon = {epsilon} is not in (0, 1)")));
    }
    Ok(())
}

pub(crate) fn stages(d: usize, seed_dim: usize) -> Vec<usize> {
    let mut out = vec![seed_dim.clamp(1, d)];
    while *out.last().unwrap() < d {
        let next = (2 * out.last().unwrap()).min(d);
        out.push(next);
    }
    out
}

/// Longest cycle each stage of the short scheme can reach when every
/// gadget succeeds.
pub(crate) fn stage_reach(stage_dims: &[usize], gadget: &GadgetConstants, ceiling: usize) -> Vec<usize> {
    let mut reach = Vec::with_capacity(stage_dims.len());
    let first = stage_dims[0];
    reach.push(2 * first.min(ceiling + 1));
    for w in stage_dims.windows(2) {
        let prev = *reach.last().unwrap();
        let m = w[1] - w[0];
        let dim = 2 * m;
        let k1 = gadget.k1(dim);
        let (_, hi) = gadget.k2_band(dim);
        let usable = |k: usize| k >= 1 && k <= m && k <= ceiling;
        let k_max = if usable(k1) { gadget.t_cap(prev / 2) * k1 } else { 0 } + if usable(hi) { hi } else { 0 };
        reach.push(prev + 2 * k_max);
    }
    reach
}

fn short_reach(d: usize, seed_dim: usize, gadget: &GadgetConstants, ceiling: usize) -> usize {
    *stage_reach(&stages(d, seed_dim), gadget, ceiling).last().unwrap()
}
