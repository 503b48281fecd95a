use std::sync::OnceLock;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::builder::long::LongContext;
use crate::builder::long_cycle::{find_long_cycle, LongCycle};
use crate::builder::medium::MediumContext;
use crate::builder::short::ShortBuilder;
use crate::builder::very_short::build_very_short;
use crate::builder::{witness_classes, BuilderConfig, Regime, Strategy};
use crate::error::{Error, Result};
use crate::hypercube::Subcube;
use crate::oracle::validate_cycle;
use crate::percolation::{PercolationSample, VertexModel};
use crate::walk::Cycle;

/// Outcome for one requested length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub length: usize,
    pub found: bool,
    /// The construction that produced the witness, or the one owning the
    /// length when nothing was found. `None` for lengths no cycle can have.
    pub strategy: Option<Strategy>,
    pub witness_digest: Option<String>,
    /// Wall time; not part of the reproducible record.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub millis: Option<u64>,
    #[serde(skip)]
    pub witness: Option<Cycle>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub seed: u64,
    pub d: usize,
    pub p: f64,
    pub model: VertexModel,
    pub entries: Vec<SpectrumEntry>,
}

impl SpectrumReport {
    /// Drops the wall times, leaving only reproducible fields.
    pub fn without_timings(mut self) -> SpectrumReport {
        for e in &mut self.entries {
            e.millis = None;
        }
        self
    }

    pub fn found_lengths(&self) -> Vec<usize> {
        self.entries.iter().filter(|e| e.found).map(|e| e.length).collect()
    }
}

/// Dispatches lengths to the regime builders for one sample, sharing the
/// expensive pieces (long cycles, component structures, short-cycle stages)
/// between lengths. Each piece is built on first use.
pub struct Builder<'a> {
    s: &'a PercolationSample,
    cfg: &'a BuilderConfig,
    full: Subcube,
    host_cycle: OnceLock<Option<Cycle>>,
    short: OnceLock<Option<ShortBuilder<'a>>>,
    medium: OnceLock<Option<MediumContext>>,
    long: OnceLock<Option<LongContext>>,
}

impl<'a> Builder<'a> {
    pub fn new(s: &'a PercolationSample, cfg: &'a BuilderConfig) -> Result<Builder<'a>> {
        cfg.validate()?;
        if cfg.d != s.d {
            return Err(Error::Parameter(format!("config is for d = {}, sample has d = {}", cfg.d, s.d)));
        }
        Ok(Builder {
            s,
            cfg,
            full: Subcube::full(s.d)?,
            host_cycle: OnceLock::new(),
            short: OnceLock::new(),
            medium: OnceLock::new(),
            long: OnceLock::new(),
        })
    }

    /// Strategies tried for `length`, in order: the owning regime, its
    /// neighbours, then a chord of a long cycle.
    pub fn plan(&self, length: usize) -> Vec<Strategy> {
        let order = match self.cfg.bounds.regime_of(length) {
            Some(r) => {
                let i = r as usize;
                let mut v = vec![r];
                if i > 0 {
                    v.push(Regime::ALL[i - 1]);
                }
                if i + 1 < Regime::ALL.len() {
                    v.push(Regime::ALL[i + 1]);
                }
                v
            }
            None => vec![Regime::Long],
        };
        let mut out: Vec<Strategy> = order.into_iter().map(Strategy::from).collect();
        out.push(Strategy::Chord);
        out
    }

    /// A witness of length `length` and the strategy that produced it; the
    /// strategy is the first planned one when nothing is found.
    pub fn build(&self, length: usize) -> Result<(Option<Cycle>, Strategy)> {
        if length < 4 || length % 2 == 1 {
            return Err(Error::Parameter(format!("length {length} is not an even number >= 4")));
        }
        let plan = self.plan(length);
        for &strategy in &plan {
            if let Some(c) = self.run(strategy, length)? {
                debug_assert_eq!(c.len(), length);
                debug_assert_eq!(validate_cycle(self.s, &c, witness_classes(self.s)), Ok(()));
                return Ok((Some(c), strategy));
            }
        }
        Ok((None, plan[0]))
    }

    pub fn run(&self, strategy: Strategy, length: usize) -> Result<Option<Cycle>> {
        let (s, cfg) = (self.s, self.cfg);
        match strategy {
            Strategy::VeryShort => {
                let ell = length / 2 - 1;
                if ell + 1 > s.d || ell > cfg.exhaustive_ceiling {
                    return Ok(None);
                }
                build_very_short(s, &self.full, ell, cfg)
            }
            Strategy::Short => match self.short.get_or_init(|| ShortBuilder::new(s, cfg).ok()) {
                Some(b) => b.build(length),
                None => Ok(None),
            },
            Strategy::Medium => match self.medium.get_or_init(|| MediumContext::new(s, cfg).ok()) {
                Some(m) => m.build(s, length, cfg),
                None => Ok(None),
            },
            Strategy::Long => match self.long.get_or_init(|| LongContext::new(s, cfg).ok()) {
                Some(l) => l.build(length, cfg),
                None => Ok(None),
            },
            Strategy::Chord => Ok(self.chord(length)),
        }
    }

    fn host_cycle(&self) -> Option<&Cycle> {
        self.host_cycle
            .get_or_init(|| {
                find_long_cycle(self.s, &self.full, witness_classes(self.s), 1.0, &self.cfg.long_cycle)
                    .ok()
                    .and_then(LongCycle::into_best)
            })
            .as_ref()
    }

    /// A chord `c[i] c[i + length - 1]` of the host cycle closes the arc
    /// between them into a cycle of `length`. In the Gray-code cycle every
    /// odd cyclic distance has such a chord.
    fn chord(&self, length: usize) -> Option<Cycle> {
        let c = self.host_cycle()?;
        let n = c.len();
        if length > n {
            return None;
        }
        if length == n {
            return Some(c.clone());
        }
        let allowed = witness_classes(self.s);
        (0..n).find_map(|i| {
            let j = (i + length - 1) % n;
            let (x, y) = (c.vertices[i], c.vertices[j]);
            (x.is_adjacent(y) && self.s.has_induced_edge(x, y, allowed))
                .then(|| Cycle::new((0..length).map(|k| c.vertices[(i + k) % n]).collect()))
        })
    }

    /// One entry per requested length, in the order given.
    pub fn report(&self, lengths: &[usize]) -> Result<SpectrumReport> {
        let mut entries = Vec::with_capacity(lengths.len());
        for &length in lengths {
            let start = Instant::now();
            let entry = if length < 4 || length % 2 == 1 {
                SpectrumEntry {
                    length,
                    found: false,
                    strategy: None,
                    witness_digest: None,
                    millis: None,
                    witness: None,
                }
            } else {
                let (witness, strategy) = self.build(length)?;
                SpectrumEntry {
                    length,
                    found: witness.is_some(),
                    strategy: Some(strategy),
                    witness_digest: witness.as_ref().map(Cycle::digest),
                    millis: None,
                    witness,
                }
            };
            entries.push(SpectrumEntry { millis: Some(start.elapsed().as_millis() as u64), ..entry });
        }
        Ok(SpectrumReport { seed: self.s.seed, d: self.s.d, p: self.s.p, model: self.s.vertex_model, entries })
    }
}

/// Spectrum report for `lengths` on one sample.
pub fn build_spectrum(s: &PercolationSample, lengths: &[usize], cfg: &BuilderConfig) -> Result<SpectrumReport> {
    Builder::new(s, cfg)?.report(lengths)
}
