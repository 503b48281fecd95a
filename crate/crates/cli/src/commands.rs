use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use cubecycles::builder::{Builder, BuilderConfig, Profile, SpectrumReport, Strategy};
use cubecycles::components::{expansion_ratio, sample_connected_set, DiameterMethod, PercolatedGraph};
use cubecycles::monotone::{greedy_monotone_path, greedy_success_probability_exact, short_path_lower_bound, TieOrder};
use cubecycles::oracle::{full_spectrum, ExplicitGraph};
use cubecycles::{ClassSet, OrientedSubcube, PercolationSample, Subcube};

use crate::args::{Density, LengthSpec, SeedSet};
use crate::{chernoff_bound, io_error, CliError};

const SCHEMA: u32 = 1;
const PURPOSE_EXPANSION: u64 = 0x4558_5041;

/// One experiment. Serialises to the manifest format
/// (`{"command": "spectrum", ...}`).
#[derive(Subcommand, Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Greedy monotone walk: Monte Carlo frequency against the exact product.
    MonotoneProb(MonotoneArgs),
    /// Cycle spectra from the constructive builders.
    Spectrum(SpectrumArgs),
    /// Component structure of the percolated cube.
    Giant(GiantArgs),
    /// Expansion ratios of random connected sets.
    Expansion(ExpansionArgs),
    /// Exact cycle spectra by exhaustive search (d <= 12).
    Oracle(OracleArgs),
    /// Chernoff tail bound 2 exp(-a^2 / (3 n p)).
    Chernoff(ChernoffArgs),
}

impl Command {
    pub fn out(&self) -> Option<&PathBuf> {
        match self {
            Command::MonotoneProb(a) => a.run.out.as_ref(),
            Command::Spectrum(a) => a.run.out.as_ref(),
            Command::Giant(a) => a.run.out.as_ref(),
            Command::Expansion(a) => a.run.out.as_ref(),
            Command::Oracle(a) => a.run.out.as_ref(),
            Command::Chernoff(_) => None,
        }
    }

    pub fn set_out(&mut self, out: PathBuf) {
        match self {
            Command::MonotoneProb(a) => a.run.out = Some(out),
            Command::Spectrum(a) => a.run.out = Some(out),
            Command::Giant(a) => a.run.out = Some(out),
            Command::Expansion(a) => a.run.out = Some(out),
            Command::Oracle(a) => a.run.out = Some(out),
            Command::Chernoff(_) => {}
        }
    }
}

/// Output directory and worker count.
#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
pub struct RunArgs {
    /// Directory for the output files; the primary table goes to stdout
    /// when omitted.
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long)]
    #[serde(default)]
    pub jobs: Option<usize>,
}

/// Which samples to draw: dimensions, densities and seeds.
#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct SampleArgs {
    /// Dimensions, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub d: Vec<usize>,
    /// Edge probabilities, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub p: Vec<f64>,
    /// Edge probabilities as c with p = c / d, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub c: Vec<f64>,
    /// Seeds: `a..b`, `a..=b` or a list.
    #[arg(long, default_value = "0..10")]
    pub seeds: SeedSet,
}

/// A sample and the grid cell it came from.
#[derive(Copy, Clone, Debug)]
struct Cell {
    seed: u64,
    d: usize,
    p: f64,
}

impl SampleArgs {
    fn cells(&self) -> Result<Vec<Cell>, CliError> {
        let densities = Density::grid(&self.p, &self.c)?;
        let mut out = Vec::new();
        for &d in &self.d {
            for &density in &densities {
                let p = density.resolve(d);
                for &seed in self.seeds.seeds() {
                    out.push(Cell { seed, d, p });
                }
            }
        }
        Ok(out)
    }
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct MonotoneArgs {
    /// Cube dimensions D, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3, 4])]
    pub dims: Vec<usize>,
    /// Edge probabilities; 1/D for each dimension when omitted.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub rho: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// Trial `t` uses the sample with seed `first_seed + t`.
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub first_seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sample: SampleArgs,
    /// `all`, `a..=b`, `a..b` or a list.
    #[arg(long, default_value = "all")]
    pub lengths: LengthSpec,
    /// `small-d` or `paper`.
    #[arg(long, default_value = "small-d")]
    pub profile: Profile,
    /// Spectrum fraction; the profile default when omitted.
    #[arg(long)]
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Also write every witness as a list of coordinate strings.
    #[arg(long)]
    #[serde(default)]
    pub witnesses: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct GiantArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sample: SampleArgs,
    /// Minimum fraction of retained vertices for the largest component to
    /// count as giant.
    #[arg(long, default_value_t = 0.05)]
    pub threshold: f64,
    /// Also estimate the giant's diameter by a double sweep.
    #[arg(long)]
    #[serde(default)]
    pub diameter: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct ExpansionArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sample: SampleArgs,
    /// Connected sets sampled per seed.
    #[arg(long, default_value_t = 100)]
    pub sets: usize,
    /// Smallest set size (default d).
    #[arg(long)]
    #[serde(default)]
    pub min_size: Option<usize>,
    /// Largest set size (default d^2).
    #[arg(long)]
    #[serde(default)]
    pub max_size: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct OracleArgs {
    /// Edge-list fixtures; when given, no samples are drawn.
    #[arg(long)]
    #[serde(default)]
    pub fixture: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub d: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub p: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub c: Vec<f64>,
    #[arg(long, default_value = "0..10")]
    pub seeds: SeedSet,
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct ChernoffArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub a: f64,
}

/// A named output file. Non-reproducible artifacts (wall times) are kept
/// apart from the data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
    pub reproducible: bool,
}

impl Artifact {
    fn data(name: &str, contents: String) -> Artifact {
        Artifact { name: name.into(), contents, reproducible: true }
    }
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn to_json<T: Serialize>(body: &T) -> Result<String, CliError> {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        schema: u32,
        #[serde(flatten)]
        body: &'a T,
    }
    let mut s = serde_json::to_string_pretty(&Doc { schema: SCHEMA, body })?;
    s.push('\n');
    Ok(s)
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        b = b.num_threads(j.max(1));
    }
    b.build().map_err(|e| CliError::Usage(e.to_string()))
}

/// Runs a command and returns its outputs, primary table first.
pub fn execute(cmd: &Command) -> Result<Vec<Artifact>, CliError> {
    match cmd {
        Command::MonotoneProb(a) => {
            let rows = pool(a.run.jobs)?.install(|| monotone_rows(a))?;
            Ok(vec![Artifact::data("monotone.csv", to_csv(&rows)?)])
        }
        Command::Spectrum(a) => pool(a.run.jobs)?.install(|| spectrum(a)),
        Command::Giant(a) => {
            let rows = pool(a.run.jobs)?.install(|| giant_rows(a))?;
            Ok(vec![Artifact::data("giant.csv", to_csv(&rows)?)])
        }
        Command::Expansion(a) => {
            let rows = pool(a.run.jobs)?.install(|| expansion_rows(a))?;
            Ok(vec![Artifact::data("expansion.csv", to_csv(&rows)?)])
        }
        Command::Oracle(a) => {
            let rows = pool(a.run.jobs)?.install(|| oracle_rows(a))?;
            Ok(vec![
                Artifact::data("oracle.csv", to_csv(&rows)?),
                Artifact::data("oracle.json", to_json(&OracleDoc { spectra: &rows })?),
            ])
        }
        Command::Chernoff(a) => {
            let row = ChernoffRow { n: a.n, p: a.p, a: a.a, bound: chernoff_bound(a.n, a.p, a.a)? };
            Ok(vec![Artifact::data("chernoff.csv", to_csv(&[row])?)])
        }
    }
}

#[derive(Serialize)]
struct ChernoffRow {
    n: u64,
    p: f64,
    a: f64,
    bound: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonotoneRow {
    /// Sample seeds of the trials, as a range.
    pub seeds: String,
    pub dim: usize,
    pub rho: f64,
    pub trials: u64,
    pub successes: u64,
    pub frequency: f64,
    pub exact: f64,
    /// Empty when `rho > 1/D`, outside the bound's range.
    pub lower_bound: Option<f64>,
    pub std_error: f64,
    pub within_3se: bool,
}

pub fn monotone_rows(a: &MonotoneArgs) -> Result<Vec<MonotoneRow>, CliError> {
    let cells: Vec<(usize, f64)> = if a.rho.is_empty() {
        a.dims.iter().map(|&d| (d, 1.0 / d as f64)).collect()
    } else {
        a.dims.iter().flat_map(|&d| a.rho.iter().map(move |&r| (d, r))).collect()
    };
    let mut rows = Vec::new();
    for (dim, rho) in cells {
        if dim == 0 || a.trials == 0 {
            return Err(CliError::Usage("dimension and trial count must be positive".into()));
        }
        let host = OrientedSubcube::full(dim)?;
        let tie = TieOrder::default();
        let successes = (0..a.trials)
            .into_par_iter()
            .map(|t| {
                let s = PercolationSample::bond(a.first_seed.wrapping_add(t), dim, rho)?;
                Ok(u64::from(greedy_monotone_path(&s, &host, &tie).is_some()))
            })
            .sum::<Result<u64, cubecycles::Error>>()?;
        let exact = greedy_success_probability_exact(dim, rho);
        let frequency = successes as f64 / a.trials as f64;
        let std_error = (exact * (1.0 - exact) / a.trials as f64).sqrt();
        rows.push(MonotoneRow {
            seeds: format!("{}..{}", a.first_seed, a.first_seed.wrapping_add(a.trials)),
            dim,
            rho,
            trials: a.trials,
            successes,
            frequency,
            exact,
            lower_bound: short_path_lower_bound(dim, rho).ok(),
            std_error,
            within_3se: (frequency - exact).abs() <= 3.0 * std_error,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub seed: u64,
    pub d: usize,
    pub p: f64,
    pub length: usize,
    pub found: bool,
    pub strategy: Option<Strategy>,
    pub witness_digest: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoverageRow {
    pub seeds: String,
    pub d: usize,
    pub p: f64,
    pub length: usize,
    pub runs: usize,
    pub successes: usize,
    pub rate: f64,
}

/// Per (d, p) totals over all seeds and requested lengths.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub seeds: String,
    pub d: usize,
    pub p: f64,
    pub requested: usize,
    pub found: usize,
    pub coverage: f64,
    /// Found lengths missing from the exact spectrum; only checked for
    /// `d <= 4`.
    pub oracle_violations: Option<usize>,
}

#[derive(Serialize)]
struct SpectrumDoc<'a> {
    summary: &'a [CoverageSummary],
    runs: &'a [SpectrumReport],
}

/// Spectrum reports for every sample of the grid, in grid order.
pub fn spectrum_reports(a: &SpectrumArgs) -> Result<Vec<SpectrumReport>, CliError> {
    let cells = a.sample.cells()?;
    cells
        .par_iter()
        .map(|cell| {
            let cfg = BuilderConfig::for_profile(a.profile, cell.d, a.epsilon)?;
            let s = PercolationSample::bond(cell.seed, cell.d, cell.p)?;
            let lengths = a.lengths.resolve(cfg.bounds.long);
            Ok(Builder::new(&s, &cfg)?.report(&lengths)?)
        })
        .collect()
}

fn spectrum(a: &SpectrumArgs) -> Result<Vec<Artifact>, CliError> {
    let reports = spectrum_reports(a)?;
    let mut rows = Vec::new();
    let mut timings = String::new();
    let mut witnesses = String::new();
    for r in &reports {
        for e in &r.entries {
            rows.push(SpectrumRow {
                seed: r.seed,
                d: r.d,
                p: r.p,
                length: e.length,
                found: e.found,
                strategy: e.strategy,
                witness_digest: e.witness_digest.clone(),
            });
            if let Some(ms) = e.millis {
                writeln!(timings, "seed={} d={} p={} length={} millis={ms}", r.seed, r.d, r.p, e.length).unwrap();
            }
            if let Some(c) = &e.witness {
                let coords: Vec<String> = c.vertices.iter().map(|v| v.display(r.d).to_string()).collect();
                writeln!(witnesses, "{} {} {} {}", r.seed, r.d, e.length, coords.join(" ")).unwrap();
            }
        }
    }

    let seeds = a.sample.seeds.to_string();
    let mut coverage = Vec::new();
    let mut summary = Vec::new();
    let per_cell = a.sample.seeds.seeds().len().max(1);
    for group in reports.chunks(per_cell) {
        let (d, p) = (group[0].d, group[0].p);
        let mut lengths: Vec<usize> = group[0].entries.iter().map(|e| e.length).collect();
        lengths.dedup();
        for (i, &length) in lengths.iter().enumerate() {
            let successes = group.iter().filter(|r| r.entries[i].found).count();
            coverage.push(CoverageRow {
                seeds: seeds.clone(),
                d,
                p,
                length,
                runs: group.len(),
                successes,
                rate: successes as f64 / group.len() as f64,
            });
        }
        let requested: usize = group.iter().map(|r| r.entries.len()).sum();
        let found: usize = group.iter().map(|r| r.found_lengths().len()).sum();
        let oracle_violations = if d <= 4 {
            let mut bad = 0;
            for r in group {
                let s = PercolationSample::bond(r.seed, d, p)?;
                let exact: BTreeSet<usize> = full_spectrum(&ExplicitGraph::from_sample(&s, ClassSet::ALL)?)?.lengths;
                bad += r.found_lengths().iter().filter(|l| !exact.contains(l)).count();
            }
            Some(bad)
        } else {
            None
        };
        summary.push(CoverageSummary {
            seeds: seeds.clone(),
            d,
            p,
            requested,
            found,
            coverage: if requested == 0 { 0.0 } else { found as f64 / requested as f64 },
            oracle_violations,
        });
    }

    let data: Vec<SpectrumReport> = reports.into_iter().map(SpectrumReport::without_timings).collect();
    let mut out = vec![
        Artifact::data("spectrum.csv", to_csv(&rows)?),
        Artifact::data("coverage.csv", to_csv(&coverage)?),
        Artifact::data("spectrum.json", to_json(&SpectrumDoc { summary: &summary, runs: &data })?),
    ];
    if a.witnesses {
        out.push(Artifact::data("witnesses.txt", witnesses));
    }
    out.push(Artifact { name: "timings.log".into(), contents: timings, reproducible: false });
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GiantRow {
    pub seed: u64,
    pub d: usize,
    pub p: f64,
    pub retained: usize,
    pub components: usize,
    pub largest: usize,
    pub second: usize,
    pub largest_fraction: f64,
    pub giant: bool,
    /// Largest over second largest; empty when there is no second component.
    pub gap_ratio: Option<f64>,
    pub diameter_lower_bound: Option<u32>,
}

pub fn giant_rows(a: &GiantArgs) -> Result<Vec<GiantRow>, CliError> {
    a.sample
        .cells()?
        .par_iter()
        .map(|cell| {
            let s = PercolationSample::bond(cell.seed, cell.d, cell.p)?;
            let g = PercolatedGraph::build(&s, &Subcube::full(cell.d)?, ClassSet::ALL)?;
            let comps = g.components();
            let summary = comps.summary(a.threshold);
            let largest = summary.component_sizes.first().copied().unwrap_or(0);
            let diameter_lower_bound = if a.diameter && largest > 0 {
                Some(comps.diameter(0, DiameterMethod::DoubleSweep)?.value)
            } else {
                None
            };
            Ok(GiantRow {
                seed: cell.seed,
                d: cell.d,
                p: cell.p,
                retained: summary.retained,
                components: summary.component_sizes.len(),
                largest,
                second: summary.second_size,
                largest_fraction: summary.giant_fraction,
                giant: summary.giant_index.is_some(),
                gap_ratio: (summary.second_size > 0).then(|| largest as f64 / summary.second_size as f64),
                diameter_lower_bound,
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpansionRow {
    pub seed: u64,
    pub d: usize,
    pub p: f64,
    pub min_size: usize,
    pub max_size: usize,
    /// Sets actually sampled; fewer than requested when starts keep
    /// landing in small components.
    pub sets: usize,
    pub min_ratio: Option<f64>,
    pub mean_ratio: Option<f64>,
}

pub fn expansion_rows(a: &ExpansionArgs) -> Result<Vec<ExpansionRow>, CliError> {
    a.sample
        .cells()?
        .par_iter()
        .map(|cell| {
            let d = cell.d;
            let (lo, hi) = (a.min_size.unwrap_or(d), a.max_size.unwrap_or(d * d));
            if lo == 0 || lo > hi {
                return Err(CliError::Usage(format!("bad set size range [{lo}, {hi}]")));
            }
            let s = PercolationSample::bond(cell.seed, d, cell.p)?;
            let g = PercolatedGraph::build(&s, &Subcube::full(d)?, ClassSet::ALL)?;
            let mut rng = ChaCha8Rng::seed_from_u64(s.choice_seed(PURPOSE_EXPANSION, 0));
            let mut ratios = Vec::with_capacity(a.sets);
            let mut attempts = 0;
            while ratios.len() < a.sets && attempts < 50 * a.sets {
                attempts += 1;
                let size = rng.gen_range(lo..=hi);
                if let Some(set) = sample_connected_set(&g, &mut rng, size) {
                    ratios.push(expansion_ratio(&g, &set)?);
                }
            }
            let min_ratio = ratios.iter().copied().reduce(f64::min);
            let mean_ratio = (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64);
            Ok(ExpansionRow {
                seed: cell.seed,
                d,
                p: cell.p,
                min_size: lo,
                max_size: hi,
                sets: ratios.len(),
                min_ratio,
                mean_ratio,
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleRow {
    /// Fixture file name, or `sample`.
    pub source: String,
    pub seed: Option<u64>,
    pub d: usize,
    pub p: Option<f64>,
    /// Space-separated cycle lengths.
    pub lengths: String,
    pub exhaustive: bool,
}

#[derive(Serialize)]
struct OracleDoc<'a> {
    spectra: &'a [OracleRow],
}

fn spectrum_string(lengths: &BTreeSet<usize>) -> String {
    lengths.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn oracle_rows(a: &OracleArgs) -> Result<Vec<OracleRow>, CliError> {
    if !a.fixture.is_empty() {
        return a
            .fixture
            .iter()
            .map(|path| {
                let text = std::fs::read_to_string(path).map_err(io_error(path))?;
                let g = ExplicitGraph::parse_edge_list(&text)?;
                let spec = full_spectrum(&g)?;
                Ok(OracleRow {
                    source: path
                        .file_name()
                        .map_or_else(|| path.display().to_string(), |f| f.to_string_lossy().into_owned()),
                    seed: None,
                    d: g.dim(),
                    p: None,
                    lengths: spectrum_string(&spec.lengths),
                    exhaustive: spec.exhaustive,
                })
            })
            .collect();
    }
    let sample = SampleArgs { d: a.d.clone(), p: a.p.clone(), c: a.c.clone(), seeds: a.seeds.clone() };
    if sample.d.is_empty() {
        return Err(CliError::Usage("oracle needs --fixture or --d".into()));
    }
    sample
        .cells()?
        .par_iter()
        .map(|cell| {
            let s = PercolationSample::bond(cell.seed, cell.d, cell.p)?;
            let spec = full_spectrum(&ExplicitGraph::from_sample(&s, ClassSet::ALL)?)?;
            Ok(OracleRow {
                source: "sample".into(),
                seed: Some(cell.seed),
                d: cell.d,
                p: Some(cell.p),
                lengths: spectrum_string(&spec.lengths),
                exhaustive: spec.exhaustive,
            })
        })
        .collect()
}
