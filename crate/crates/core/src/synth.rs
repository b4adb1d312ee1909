//! Synthetic credit-style dataset with a tunable amount of gender bias,
//! used by the experiment harness and the acceptance runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tabular::{Dataset, FeatureSchema};

const SCHEMA_JSON: &str = r#"{
  "features": [
    {"name": "age", "domain": [1, 9], "kind": "numeric"},
    {"name": "income", "domain": [0, 10], "kind": "numeric"},
    {"name": "gender", "kind": "categorical", "labels": ["F", "M"]},
    {"name": "noise1", "domain": [0, 9], "kind": "numeric"},
    {"name": "noise2", "domain": [0, 9], "kind": "numeric"},
    {"name": "noise3", "domain": [0, 9], "kind": "numeric"}
  ],
  "protected": ["gender"],
  "label": "approved"
}"#;

pub fn synth_schema() -> FeatureSchema {
    FeatureSchema::from_json(SCHEMA_JSON).expect("builtin schema is valid")
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Draw `n` rows with P(label=1) = sigmoid(income - 5 + 4*beta*(gender - 0.5)).
/// At beta = 0 the label is independent of gender; at beta = 1 the log-odds
/// swing by 4 between the genders.
pub fn synth_biased_dataset(beta: f64, n: usize, seed: u64) -> Dataset {
    assert!((0.0..=1.0).contains(&beta), "beta must be in [0, 1]");
    assert!(n >= 100, "need at least 100 rows for a usable dataset");
    let schema = synth_schema();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let row = crate::tabular::random_instance(&schema, &mut rng);
        let income = row.get(1) as f64;
        let gender = row.get(2) as f64;
        let p = sigmoid(income - 5.0 + 4.0 * beta * (gender - 0.5));
        labels.push(u8::from(rng.gen::<f64>() < p));
        rows.push(row);
    }
    Dataset { schema, rows, labels }
}

/// Empirical P(label=1 | gender=g).
pub fn positive_rate_by_gender(data: &Dataset, gender: i64) -> f64 {
    let mut total = 0usize;
    let mut positive = 0usize;
    for (row, &label) in data.rows.iter().zip(&data.labels) {
        if row.get(2) == gender {
            total += 1;
            positive += label as usize;
        }
    }
    if total == 0 {
        0.0
    } else {
        positive as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unbiased_data_has_gender_balanced_labels() {
        let data = synth_biased_dataset(0.0, 10_000, 42);
        let gap = (positive_rate_by_gender(&data, 0) - positive_rate_by_gender(&data, 1)).abs();
        assert!(gap < 0.03, "beta=0 gap was {gap}");
    }

    #[test]
    fn fully_biased_data_has_a_wide_gap() {
        let data = synth_biased_dataset(1.0, 10_000, 42);
        let gap = positive_rate_by_gender(&data, 1) - positive_rate_by_gender(&data, 0);
        assert!(gap >= 0.25, "beta=1 gap was {gap}");
    }

    #[test]
    fn deterministic_given_seed() {
        let a = synth_biased_dataset(0.5, 500, 7);
        let b = synth_biased_dataset(0.5, 500, 7);
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.labels, b.labels);
        let c = synth_biased_dataset(0.5, 500, 8);
        assert_ne!(a.labels, c.labels);
    }

    #[test]
    fn rows_satisfy_the_schema() {
        let data = synth_biased_dataset(0.3, 200, 1);
        assert_eq!(data.len(), 200);
        for row in &data.rows {
            assert!(data.schema.instance_valid(row));
        }
        assert!(data.schema.is_protected(2));
    }

    #[test]
    #[should_panic(expected = "at least 100")]
    fn tiny_n_is_rejected() {
        let _ = synth_biased_dataset(0.5, 10, 1);
    }

    #[test]
    #[should_panic(expected = "beta")]
    fn out_of_range_beta_is_rejected() {
        let _ = synth_biased_dataset(1.5, 200, 1);
    }
}
