//! Sampled comparison of functions by their isolevel sets, and
//! well-posedness of local objectives.
//!
//! `f1 ⪰ f2` when every isolevel set of `f1` sits inside one of `f2`:
//! knowing `f1(p)` determines `f2(p)`. On a finite sample this becomes a
//! pairwise test, `f1(p) = f1(q) ⇒ f2(p) = f2(q)`. Rejections are witnessed
//! by a concrete pair and are certain; acceptances only hold at the
//! resolution of the sample.

mod compare;
mod samples;
mod wellposed;

use thiserror::Error;

pub use compare::{
    compare_level_sets, compare_superlevel_sets, level_sets_equal, Counterexample, Direction, OrderVerdict, Relation,
    Resolution,
};
pub use samples::{SampleSet, SampleSource, DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_TOLERANCE};
pub use wellposed::{check_well_posed, WellPosedReport, WellPosedVerdict};

use crate::expr::EvalError;
use crate::sim::SimError;

#[derive(Debug, Error)]
pub enum OrderError {
    #[error("`{function}` uses `{variable}`, which the sample set does not cover")]
    UncoveredVariable { function: String, variable: String },
    #[error("`{function}` is not finite at sample {index}")]
    NonFinite { function: String, index: usize },
    #[error("sample set is empty")]
    EmptySamples,
    #[error("{0}")]
    InvalidSamples(String),
    #[error("missing objective: {0}")]
    MissingObjective(String),
    #[error("objective kinds differ: {0}")]
    KindMismatch(String),
    #[error("missing value for parameter `{0}`")]
    MissingParameter(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
