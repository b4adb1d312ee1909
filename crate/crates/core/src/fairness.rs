//! The discrimination oracle: does changing only protected attributes change
//! the model's decision?

use crate::error::{Error, Result};
use crate::model::PredictionModel;
use crate::tabular::{FeatureSchema, Instance};

/// Upper bound on the protected-value cross product before we refuse to
/// enumerate it.
pub const DEFAULT_COMBINATION_CAP: u128 = 10_000;

/// Outcome of probing one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscriminationResult {
    pub found: bool,
    /// The probed instance and the first protected variant that flipped the
    /// class, when one exists.
    pub witness: Option<(Instance, Instance)>,
    /// Model invocations spent on this check, the original included.
    pub probes: usize,
}

/// Enumerate the full cross product of protected-feature values in
/// lexicographic order (first protected feature most significant).
pub fn protected_combinations(schema: &FeatureSchema) -> Result<Vec<Vec<i64>>> {
    protected_combinations_capped(schema, DEFAULT_COMBINATION_CAP)
}

pub fn protected_combinations_capped(schema: &FeatureSchema, cap: u128) -> Result<Vec<Vec<i64>>> {
    let protected = schema.protected_indices();
    if protected.is_empty() {
        return Err(Error::NoProtectedAttributes);
    }
    let mut total: u128 = 1;
    for &i in &protected {
        let (lo, hi) = schema.domain(i);
        total = total.saturating_mul((hi - lo + 1) as u128);
    }
    if total > cap {
        return Err(Error::CombinationExplosion { combinations: total, cap });
    }
    let mut combos = Vec::with_capacity(total as usize);
    let mut current: Vec<i64> = protected.iter().map(|&i| schema.domain(i).0).collect();
    loop {
        combos.push(current.clone());
        // Mixed-radix increment, least significant digit last.
        let mut pos = protected.len();
        loop {
            if pos == 0 {
                return Ok(combos);
            }
            pos -= 1;
            let (lo, hi) = schema.domain(protected[pos]);
            if current[pos] < hi {
                current[pos] += 1;
                break;
            }
            current[pos] = lo;
        }
    }
}

/// Precomputed sweep over every protected-value combination.
pub struct DiscriminationChecker {
    protected: Vec<usize>,
    combos: Vec<Vec<i64>>,
}

impl DiscriminationChecker {
    pub fn new(schema: &FeatureSchema) -> Result<DiscriminationChecker> {
        DiscriminationChecker::with_cap(schema, DEFAULT_COMBINATION_CAP)
    }

    pub fn with_cap(schema: &FeatureSchema, cap: u128) -> Result<DiscriminationChecker> {
        Ok(DiscriminationChecker {
            protected: schema.protected_indices(),
            combos: protected_combinations_capped(schema, cap)?,
        })
    }

    /// Number of protected-value combinations in the sweep.
    pub fn combination_count(&self) -> usize {
        self.combos.len()
    }

    /// Probe `t` and every protected variant of it; report the first variant
    /// whose predicted class differs.
    ///
    /// `t`'s own combination is skipped (it cannot differ from itself), so
    /// the worst case costs `combination_count()` probes and a hit can cost
    /// as few as two.
    pub fn check_for_error_condition<M: PredictionModel + ?Sized>(
        &self,
        model: &M,
        t: &Instance,
    ) -> Result<DiscriminationResult> {
        let base_class = model.predict(t)?;
        let mut probes = 1;
        let own = t.project(&self.protected);
        for combo in &self.combos {
            if *combo == own {
                continue;
            }
            let variant = t.substitute(&self.protected, combo);
            probes += 1;
            if model.predict(&variant)? != base_class {
                return Ok(DiscriminationResult {
                    found: true,
                    witness: Some((t.clone(), variant)),
                    probes,
                });
            }
        }
        Ok(DiscriminationResult { found: false, witness: None, probes })
    }
}
