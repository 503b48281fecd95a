use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Seeds as a half-open range `a..b`, an inclusive range `a..=b`, or a
/// comma-separated list. Order is preserved for lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SeedSet {
    text: String,
    seeds: Vec<u64>,
}

impl SeedSet {
    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }

    pub fn range(start: u64, end: u64) -> SeedSet {
        format!("{start}..{end}").parse().expect("a range is well formed")
    }
}

fn parse_range(s: &str) -> Option<Result<(u64, u64), CliError>> {
    let (a, b, inclusive) = if let Some((a, b)) = s.split_once("..=") {
        (a, b, true)
    } else {
        let (a, b) = s.split_once("..")?;
        (a, b, false)
    };
    let parse = |x: &str| x.trim().parse::<u64>().map_err(|e| CliError::Usage(format!("bad bound {x:?}: {e}")));
    Some((|| {
        let (a, b) = (parse(a)?, parse(b)?);
        let end =
            if inclusive { b.checked_add(1).ok_or_else(|| CliError::Usage("range overflows".into()))? } else { b };
        if end < a {
            return Err(CliError::Usage(format!("empty range {s:?}")));
        }
        Ok((a, end))
    })())
}

impl FromStr for SeedSet {
    type Err = CliError;

    fn from_str(s: &str) -> Result<SeedSet, CliError> {
        let text = s.trim().to_string();
        let seeds = match parse_range(&text) {
            Some(r) => {
                let (a, b) = r?;
                (a..b).collect()
            }
            None => text
                .split(',')
                .map(|x| x.trim().parse::<u64>().map_err(|e| CliError::Usage(format!("bad seed {x:?}: {e}"))))
                .collect::<Result<Vec<_>, _>>()?,
        };
        Ok(SeedSet { text, seeds })
    }
}

impl TryFrom<String> for SeedSet {
    type Error = CliError;

    fn try_from(s: String) -> Result<SeedSet, CliError> {
        s.parse()
    }
}

impl From<SeedSet> for String {
    fn from(s: SeedSet) -> String {
        s.text
    }
}

impl fmt::Display for SeedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Requested cycle lengths: `all` (every even length from 4 to the top of
/// the long regime), a range `a..=b` / `a..b` (even members only), or a
/// comma-separated list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum LengthSpec {
    All,
    Range { start: usize, end: usize, text: String },
    List(Vec<usize>),
}

impl LengthSpec {
    /// The lengths for a cube whose long regime ends at `top`.
    pub fn resolve(&self, top: usize) -> Vec<usize> {
        match self {
            LengthSpec::All => (4..=top).step_by(2).collect(),
            LengthSpec::Range { start, end, .. } => (*start..*end).filter(|l| l % 2 == 0).collect(),
            LengthSpec::List(v) => v.clone(),
        }
    }
}

impl FromStr for LengthSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<LengthSpec, CliError> {
        let text = s.trim();
        if text == "all" {
            return Ok(LengthSpec::All);
        }
        if let Some(r) = parse_range(text) {
            let (a, b) = r?;
            return Ok(LengthSpec::Range { start: a as usize, end: b as usize, text: text.to_string() });
        }
        let v = text
            .split(',')
            .map(|x| x.trim().parse::<usize>().map_err(|e| CliError::Usage(format!("bad length {x:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LengthSpec::List(v))
    }
}

impl TryFrom<String> for LengthSpec {
    type Error = CliError;

    fn try_from(s: String) -> Result<LengthSpec, CliError> {
        s.parse()
    }
}

impl From<LengthSpec> for String {
    fn from(l: LengthSpec) -> String {
        match l {
            LengthSpec::All => "all".into(),
            LengthSpec::Range { text, .. } => text,
            LengthSpec::List(v) => v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
        }
    }
}

/// Edge probability given either directly or as `c` with `p = c / d`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Density {
    P(f64),
    C(f64),
}

impl Density {
    pub fn resolve(self, d: usize) -> f64 {
        match self {
            Density::P(p) => p,
            Density::C(c) => (c / d as f64).min(1.0),
        }
    }

    /// Grid of densities from the `--p` / `--c` flags; exactly one may be given.
    pub fn grid(p: &[f64], c: &[f64]) -> Result<Vec<Density>, CliError> {
        match (p.is_empty(), c.is_empty()) {
            (false, true) => Ok(p.iter().map(|&x| Density::P(x)).collect()),
            (true, false) => Ok(c.iter().map(|&x| Density::C(x)).collect()),
            (true, true) => Err(CliError::Usage("one of --p or --c is required".into())),
            (false, false) => Err(CliError::Usage("--p and --c are mutually exclusive".into())),
        }
    }
}
