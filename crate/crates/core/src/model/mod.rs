//! The black-box classifier under test.
//!
//! Everything outside this module sees only [`PredictionModel`]: an opaque,
//! deterministic mapping from instances to binary class ids. Two
//! implementations ship with the crate — a trainable logistic regression
//! ([`LogisticModel`]) and a client for an external model process speaking
//! newline-delimited JSON ([`ExternalModel`]).

mod external;
mod logistic;

pub use external::{ExternalModel, ExternalModelConfig};
pub use logistic::{train_logistic, LogisticModel};

use crate::error::Result;
use crate::tabular::{ClassId, Instance};

/// A deterministic binary classifier: the same input always yields the same
/// class, and `predict_batch` pointwise-equals mapped `predict`.
pub trait PredictionModel {
    fn predict(&self, x: &Instance) -> Result<ClassId>;

    fn predict_batch(&self, xs: &[Instance]) -> Result<Vec<ClassId>> {
        xs.iter().map(|x| self.predict(x)).collect()
    }
}

impl<M: PredictionModel + ?Sized> PredictionModel for &M {
    fn predict(&self, x: &Instance) -> Result<ClassId> {
        (**self).predict(x)
    }

    fn predict_batch(&self, xs: &[Instance]) -> Result<Vec<ClassId>> {
        (**self).predict_batch(xs)
    }
}
