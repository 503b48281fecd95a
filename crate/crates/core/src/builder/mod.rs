//! Constructive cycle builders, one per length regime, and the dispatcher
//! that assembles a spectrum report.

mod config;
mod long;
mod long_cycle;
mod medium;
mod short;
mod spectrum;
mod very_short;

use serde::{Deserialize, Serialize};

use crate::percolation::{ClassSet, PercolationSample, VertexModel};

pub use config::{BuilderConfig, GadgetConstants, LongCycleConfig, Profile, Regime, RegimeBounds};
pub use long::build_long;
pub use long_cycle::{find_long_cycle, LongCycle};
pub use medium::{build_medium, select_candidate_paths};
pub use short::{build_short, extend_cycle, GadgetPlan, ShortBuilder};
pub use spectrum::{build_spectrum, Builder, SpectrumEntry, SpectrumReport};
pub use very_short::build_very_short;

pub(crate) const PURPOSE_GADGET_ORDER: u64 = 1;
pub(crate) const PURPOSE_LONG_CYCLE: u64 = 2;

/// Which construction produced (or was last tried for) a length.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    VeryShort,
    Short,
    Medium,
    Long,
    /// A chord of a long cycle closes a cycle of the requested length.
    Chord,
}

impl From<Regime> for Strategy {
    fn from(r: Regime) -> Strategy {
        match r {
            Regime::VeryShort => Strategy::VeryShort,
            Regime::Short => Strategy::Short,
            Regime::Medium => Strategy::Medium,
            Regime::Long => Strategy::Long,
        }
    }
}

/// Classes a witness may use. The tri-partition model admits every class;
/// the keep model restricts to kept vertices.
pub(crate) fn witness_classes(s: &PercolationSample) -> ClassSet {
    match s.vertex_model {
        VertexModel::Keep { .. } => ClassSet::KEPT,
        VertexModel::None | VertexModel::TriPartition { .. } => ClassSet::ALL,
    }
}
