//! Random-generation baseline: uniform draws over the schema with duplicate
//! removal, each unique draw put through the same discrimination check as
//! the symbolic search.

use std::collections::HashSet;

use crate::error::Result;
use crate::fairness::DiscriminationChecker;
use crate::model::PredictionModel;
use crate::report::{RunReport, Source, WitnessPair};
use crate::tabular::{random_instance, FeatureSchema};
use crate::{derive_rng, salt};

/// Draw until `limit` unique tests ran or 50x`limit` draws were spent
/// (whichever first; the draw cap keeps tiny domains from livelocking).
pub fn random_baseline<M: PredictionModel + ?Sized>(
    model: &M,
    schema: &FeatureSchema,
    limit: usize,
    rng_seed: u64,
) -> Result<RunReport> {
    assert!(limit >= 1, "limit must be at least 1");
    let checker = DiscriminationChecker::new(schema)?;
    let non_protected = schema.non_protected_indices();
    let mut report = RunReport::new(serde_json::json!({
        "mode": "random-baseline",
        "limit": limit,
        "rng_seed": rng_seed,
    }));
    let mut rng = derive_rng(rng_seed, salt::BASELINE);
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let max_draws = limit.saturating_mul(50);
    let mut draws = 0usize;
    while seen.len() < limit && draws < max_draws {
        let t = random_instance(schema, &mut rng);
        draws += 1;
        if !seen.insert(t.project(&non_protected)) {
            continue;
        }
        report.random.generated += 1;
        let res = checker.check_for_error_condition(model, &t)?;
        report.model_probes += res.probes as u64;
        if res.found {
            report.random.discriminatory += 1;
            let (original, variant) = res.witness.expect("found implies witness");
            report.witnesses.push(WitnessPair { source: Source::Random, original, variant });
        }
    }
    Ok(report)
}
