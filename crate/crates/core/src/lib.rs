//! Test-input generation that exposes individual discrimination in
//! black-box tabular classifiers.
//!
//! A model individually discriminates when two inputs that agree on every
//! non-protected attribute and differ only in protected ones (gender, race,
//! age group, ...) receive different decisions. This crate finds such inputs
//! by driving a symbolic-execution-style search over the model's *local
//! explanations*: each candidate input is explained with a small decision
//! tree fitted to the model's behavior in a perturbation neighborhood, the
//! root-to-leaf path of that tree acts as a path constraint, and negated
//! ("toggled") variants of the path are solved over the feature domains to
//! produce the next candidates. A priority queue interleaves three input
//! sources: cluster-diversified training rows (seeds), constraints toggled
//! near a confirmed discriminatory input (directed search), and constraints
//! toggled to diversify coverage (undirected search).
//!
//! The crate also ships a uniform-random baseline generator and a synthetic
//! biased-dataset generator so runs can be compared end to end.
//!
//! Entry points:
//! - [`tabular::load_csv`] / [`tabular::FeatureSchema`] for data ingestion,
//! - [`model::train_logistic`] and [`model::ExternalModel`] for the model
//!   under test,
//! - [`search::run`] for the full generation loop,
//! - [`baseline::random_baseline`] for the random comparison run,
//! - [`report::emit_report`] for serializing results.

pub mod baseline;
pub mod constraint;
mod error;
pub mod explain;
pub mod fairness;
pub mod model;
pub mod report;
pub mod search;
pub mod synth;
pub mod tabular;

pub use error::{Error, Result};
pub use model::{LogisticModel, PredictionModel};
pub use report::{RunReport, Source};
pub use search::SearchConfig;
pub use tabular::{Dataset, FeatureSchema, Instance};

/// Derive an independent RNG stream from a run seed and a per-purpose salt.
///
/// Every stochastic stage (clustering, perturbation, solving, ...) gets its
/// own stream so that adding draws to one stage cannot shift another.
pub(crate) fn derive_rng(seed: u64, salt: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(salt))
}

pub(crate) mod salt {
    pub const KMEANS: u64 = 1;
    pub const SEEDS: u64 = 2;
    pub const EXPLAIN: u64 = 3;
    pub const SOLVE: u64 = 4;
    pub const BASELINE: u64 = 5;
}
