//! Difference-of-architecture search: instead of learning the accuracy of
//! whole architectures, build a dataset of close architecture pairs, learn
//! the accuracy *delta* of an edit, and walk each member of a population to
//! its best predicted single-edit neighbor.
//!
//! The crate is organized around that pipeline:
//!
//! * [`space`] — block/cell search spaces, enumeration, neighbors, edit
//!   distance, and the closed-form space sizes.
//! * [`encoding`] — one-hot and sparse difference encodings plus the `D^k`
//!   cardinalities.
//! * [`oracle`] — pluggable fitness sources: a seeded synthetic landscape, a
//!   noisy proxy, and tabular benchmark files.
//! * [`dataset`] — difference-dataset generation, aggregation and splitting.
//! * [`predictor`] — ridge and small-MLP delta regressors, Kendall's tau,
//!   gradient checking, and the loss-vs-edit-distance sweep.
//! * [`search`] — the delta-guided evolutionary search plus random-search
//!   and regularized-evolution baselines, all with full trace recording.
//!
//! Everything is deterministic given explicit seeds; see [`hash`] for the
//! stable hash every seeded value derives from.

pub mod dataset;
pub mod encoding;
pub mod hash;
pub mod oracle;
pub mod predictor;
pub mod search;
pub mod space;

pub use dataset::{DoaDataset, DoaSample, FeatureMode};
pub use encoding::{DiffEncoding, DiffFeature, Edit, EncodingError, OneHotEncoding};
pub use oracle::{
    CountingOracle, NoisyProxy, Oracle, OracleError, SyntheticLandscape, TabularBenchmark,
};
pub use predictor::{Backend, PredictorError, PredictorModel, TrainConfig};
pub use search::{
    Comparison, Convergence, DeltaPredictor, ModelDeltaPredictor, NeighborBudget, RegEvoConfig,
    SearchConfig, SearchError, SearchMethod, SearchTrace, TraceStep, TrueDeltaPredictor,
};
pub use space::{ArchKey, Architecture, SearchSpaceSpec, SpaceError, SpaceKind};
