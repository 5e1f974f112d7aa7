//! Completeness estimation for open-world set enumeration.
//!
//! When a set is gathered answer by answer from a crowd (or any other
//! sampling process with unknown support), the natural questions are: how
//! many distinct items exist, how complete is the current result, what
//! would more effort buy, and is anyone gaming the process? This crate
//! answers them from nothing but the answer log:
//!
//! - [`stream`]: the answer-stream data model, CSV ingestion and the
//!   frequency-of-frequencies statistic.
//! - [`estimators`]: cardinality estimators (uniform MLE, Chao84, Chao92
//!   with sample coverage and coefficient of variation) and completeness.
//! - [`heuristics`]: corrections for over-contributing workers that bias
//!   the singleton count.
//! - [`paygo`]: pay-as-you-go benefit prediction: expected new unique
//!   answers from `m` additional HITs, by coverage reasoning or by spline
//!   extrapolation of the accumulation curve.
//! - [`listwalk`]: detection of workers transcribing the same external
//!   list, via a binomial tail test on shared answer windows.
//! - [`simulator`]: a seeded ground-truth generator used to validate all
//!   of the above.
//! - [`cli`]: the `crowdest` command-line front end.

pub mod cli;
pub mod error;
pub mod estimators;
pub mod heuristics;
pub mod listwalk;
pub mod paygo;
mod rng;
pub mod simulator;
mod spline;
pub mod stream;

pub use error::{Error, Result};
pub use estimators::{CardinalityEstimate, EstimateSeries, EstimatorKind};
pub use heuristics::{HeuristicConfig, HeuristicKind};
pub use listwalk::{ListWalkConfig, ListWalkReport};
pub use paygo::{PaygoMethod, PaygoPrediction, SplineModel};
pub use simulator::{ItemDistribution, ListWalkerSpec, SimulationOutput, WorkerModel};
pub use stream::{AnswerRecord, AnswerStream, FrequencyStatistics, SACurve, WorkerSequence};
