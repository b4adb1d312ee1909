//! The generation loop: clustered seed inputs, a three-tier priority queue,
//! and constraint toggling in two flavors.
//!
//! Every dequeued input is checked for discrimination (once per distinct
//! non-protected value vector) and then locally explained. After a hit the
//! directed expansion re-solves the full path with one shaky non-protected
//! predicate negated, harvesting neighbors of a known-discriminatory region.
//! The undirected expansion toggles confident prefix predicates to push
//! coverage into unexplored paths. Directed work outranks seeds, seeds
//! outrank undirected work.

pub mod kmeans;
pub mod queue;

use std::collections::HashMap;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constraint::{canonicalize, solve, PathConstraint, Predicate, VisitedSet};
use crate::error::{Error, Result};
use crate::explain::{explain, DecisionPath, ExplainerConfig};
use crate::fairness::DiscriminationChecker;
use crate::model::PredictionModel;
use crate::report::{RunReport, Source, WitnessPair};
use crate::tabular::{random_instance, Dataset, FeatureSchema, Instance};
use crate::{derive_rng, salt};

use queue::RankQueue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedOrder {
    RoundRobin,
    Iterative,
}

impl std::str::FromStr for SeedOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<SeedOrder> {
        match s {
            "roundrobin" | "round-robin" => Ok(SeedOrder::RoundRobin),
            "iterative" => Ok(SeedOrder::Iterative),
            _ => Err(Error::Config(format!("unknown seed order '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedSource {
    Training,
    Random,
}

impl std::str::FromStr for SeedSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<SeedSource> {
        match s {
            "training" => Ok(SeedSource::Training),
            "random" => Ok(SeedSource::Random),
            _ => Err(Error::Config(format!("unknown seed source '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Main-loop iteration budget (dequeues, not enqueues).
    pub limit: usize,
    /// Undirected walks stop at the first predicate below this confidence.
    pub t1: f64,
    /// Directed expansion toggles only predicates below this confidence.
    pub t2: f64,
    pub rank_directed: f64,
    pub rank_seed: f64,
    pub rank_undirected: f64,
    pub num_clusters: usize,
    pub rng_seed: u64,
    pub directed: bool,
    pub undirected: bool,
    pub seed_order: SeedOrder,
    pub seed_source: SeedSource,
    /// Refuse protected-value sweeps larger than this.
    pub combination_cap: u64,
    pub explainer: ExplainerConfig,
}

impl Default for SearchConfig {
    fn default() -> SearchConfig {
        SearchConfig {
            limit: 1000,
            t1: 0.3,
            t2: 0.2,
            rank_directed: 0.0,
            rank_seed: 2.0,
            rank_undirected: 4.0,
            num_clusters: 4,
            rng_seed: 42,
            directed: true,
            undirected: true,
            seed_order: SeedOrder::RoundRobin,
            seed_source: SeedSource::Training,
            combination_cap: 10_000,
            explainer: ExplainerConfig::default(),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        fn unit(name: &str, v: f64) -> Result<()> {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must be in [0, 1], got {v}")));
            }
            Ok(())
        }
        unit("t1", self.t1)?;
        unit("t2", self.t2)?;
        unit("explainer.p_keep", self.explainer.p_keep)?;
        // Mean confidence r stays in [0, 1], so a spacing of at least 1
        // between tiers keeps directed < seed < undirected at all times.
        if !(self.rank_directed + 1.0 <= self.rank_seed
            && self.rank_seed + 1.0 <= self.rank_undirected)
        {
            return Err(Error::Config(format!(
                "rank tiers must be spaced by at least 1: directed={} seed={} undirected={}",
                self.rank_directed, self.rank_seed, self.rank_undirected
            )));
        }
        if self.num_clusters == 0 {
            return Err(Error::Config("num_clusters must be at least 1".into()));
        }
        if self.combination_cap == 0 {
            return Err(Error::Config("combination_cap must be positive".into()));
        }
        if self.explainer.num_samples == 0 {
            return Err(Error::Config("explainer.num_samples must be at least 1".into()));
        }
        if self.explainer.max_depth == 0 {
            return Err(Error::Config("explainer.max_depth must be at least 1".into()));
        }
        if !(0.0..=0.5).contains(&self.explainer.min_leaf_frac) {
            return Err(Error::Config("explainer.min_leaf_frac must be in [0, 0.5]".into()));
        }
        Ok(())
    }

    /// Load a run file; `.toml` by extension, JSON otherwise. Missing fields
    /// take the defaults.
    pub fn from_file(path: &Path) -> Result<SearchConfig> {
        let text = std::fs::read_to_string(path)?;
        let cfg: SearchConfig = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| Error::Config(format!("bad TOML run file: {e}")))?
        } else {
            serde_json::from_str(&text)?
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Supplies the local path explanation for a dequeued input. The second
/// tuple element is the number of model probes the explanation cost.
pub trait PathOracle {
    fn path_for(&mut self, t: &Instance) -> Result<(DecisionPath, u64)>;
}

/// The production oracle: fits a fresh surrogate tree around each input.
pub struct ModelExplainer<'a, M: ?Sized> {
    model: &'a M,
    schema: &'a FeatureSchema,
    cfg: ExplainerConfig,
    rng: ChaCha8Rng,
}

impl<'a, M: PredictionModel + ?Sized> ModelExplainer<'a, M> {
    pub fn new(
        model: &'a M,
        schema: &'a FeatureSchema,
        cfg: ExplainerConfig,
        rng_seed: u64,
    ) -> ModelExplainer<'a, M> {
        ModelExplainer { model, schema, cfg, rng: derive_rng(rng_seed, salt::EXPLAIN) }
    }
}

impl<M: PredictionModel + ?Sized> PathOracle for ModelExplainer<'_, M> {
    fn path_for(&mut self, t: &Instance) -> Result<(DecisionPath, u64)> {
        let ex = explain(self.model, t, self.schema, &self.cfg, &mut self.rng)?;
        Ok((ex.path, self.cfg.num_samples as u64))
    }
}

/// Interleave cluster members: first row of each cluster, then second of
/// each, skipping exhausted clusters, truncated to `limit`.
pub fn round_robin(clusters: &[Vec<usize>], limit: usize) -> Vec<usize> {
    let total: usize = clusters.iter().map(Vec::len).sum();
    let want = total.min(limit);
    let mut out = Vec::with_capacity(want);
    let mut depth = 0;
    while out.len() < want {
        for cluster in clusters {
            if out.len() == limit {
                break;
            }
            if let Some(&idx) = cluster.get(depth) {
                out.push(idx);
            }
        }
        depth += 1;
    }
    out
}

/// Exhaust each cluster before moving to the next, truncated to `limit`.
pub fn iterative(clusters: &[Vec<usize>], limit: usize) -> Vec<usize> {
    let mut out = clusters.concat();
    out.truncate(limit);
    out
}

/// Cluster the training rows and order them per `cfg.seed_order`. A cluster
/// count above the row count is clamped so small datasets still seed.
pub fn seed_test_inputs(data: &Dataset, cfg: &SearchConfig) -> Result<Vec<Instance>> {
    if data.is_empty() || cfg.limit == 0 {
        return Ok(Vec::new());
    }
    let k = cfg.num_clusters.min(data.len());
    let mut rng = derive_rng(cfg.rng_seed, salt::KMEANS);
    let clusters = kmeans::kmeans(data, k, &mut rng)?;
    let order = match cfg.seed_order {
        SeedOrder::RoundRobin => round_robin(&clusters, cfg.limit),
        SeedOrder::Iterative => iterative(&clusters, cfg.limit),
    };
    Ok(order.into_iter().map(|i| data.rows[i].clone()).collect())
}

struct SearchState<'a> {
    schema: &'a FeatureSchema,
    queue: RankQueue,
    visited: VisitedSet,
    solve_rng: ChaCha8Rng,
}

/// Canonicalize, dedup against visited paths, solve, enqueue. Unsatisfiable
/// constraints are marked visited and dropped silently.
fn enqueue_constraint(
    state: &mut SearchState,
    pc: PathConstraint,
    base: f64,
    sign: f64,
    source: Source,
) {
    let box_ = canonicalize(&pc, state.schema);
    if !state.visited.insert(&box_) {
        return;
    }
    if let Some(x) = solve(&pc, state.schema, &mut state.solve_rng) {
        let r = pc.mean_confidence();
        state.queue.push(x, base + sign * r, source);
    }
}

/// After a discriminatory input: for each non-protected predicate with
/// confidence below T2, re-solve the full path with only that predicate
/// negated. Every other predicate, protected ones included, stays in place.
/// Priority rank_directed - r dequeues higher-confidence constraints first.
fn directed_expand(state: &mut SearchState, cfg: &SearchConfig, path: &DecisionPath) {
    for (i, c) in path.predicates.iter().enumerate() {
        if c.is_protected || c.confidence >= cfg.t2 {
            continue;
        }
        let mut preds = path.predicates.clone();
        preds[i] = c.toggle();
        enqueue_constraint(
            state,
            PathConstraint::new(preds),
            cfg.rank_directed,
            -1.0,
            Source::Directed,
        );
    }
}

/// Walk the path top-down keeping a prefix of non-protected predicates.
/// Protected predicates are skipped outright; the walk ends at the first
/// confidence below T1. Each step solves prefix AND NOT(current), with no
/// suffix constraints, at priority rank_undirected + r.
fn undirected_expand(state: &mut SearchState, cfg: &SearchConfig, path: &DecisionPath) {
    let mut prefix: Vec<Predicate> = Vec::new();
    for c in &path.predicates {
        if c.is_protected {
            continue;
        }
        if c.confidence < cfg.t1 {
            break;
        }
        let mut preds = prefix.clone();
        preds.push(c.toggle());
        enqueue_constraint(
            state,
            PathConstraint::new(preds),
            cfg.rank_undirected,
            1.0,
            Source::Undirected,
        );
        prefix.push(c.clone());
    }
}

/// The main loop with a caller-supplied path oracle (tests script it; the
/// production entry point is [`run`]).
pub fn run_with_oracle<M, O>(
    model: &M,
    data: &Dataset,
    cfg: &SearchConfig,
    oracle: &mut O,
) -> Result<RunReport>
where
    M: PredictionModel + ?Sized,
    O: PathOracle + ?Sized,
{
    cfg.validate()?;
    let schema = &data.schema;
    let checker = DiscriminationChecker::with_cap(schema, cfg.combination_cap as u128)?;
    let non_protected = schema.non_protected_indices();
    let mut report = RunReport::new(serde_json::to_value(cfg)?);

    let mut state = SearchState {
        schema,
        queue: RankQueue::new(),
        visited: VisitedSet::new(),
        solve_rng: derive_rng(cfg.rng_seed, salt::SOLVE),
    };
    match cfg.seed_source {
        SeedSource::Training => {
            for s in seed_test_inputs(data, cfg)? {
                state.queue.push(s, cfg.rank_seed, Source::Seed);
            }
        }
        SeedSource::Random => {
            let mut rng = derive_rng(cfg.rng_seed, salt::SEEDS);
            for _ in 0..cfg.limit {
                state.queue.push(random_instance(schema, &mut rng), cfg.rank_seed, Source::Seed);
            }
        }
    }

    // Non-protected projection -> known check outcome. The check sweeps all
    // protected values itself, so its result depends only on this key.
    let mut generated: HashMap<Vec<i64>, bool> = HashMap::new();
    let mut count = 0usize;
    while count < cfg.limit {
        let Some(item) = state.queue.pop() else { break };
        count += 1;
        let t = item.instance;
        let key = t.project(&non_protected);
        let found = match generated.get(&key) {
            // Duplicate test: the verdict cannot change and no counter moves,
            // but its (possibly different) surrogate path still gets expanded.
            Some(&flag) => flag,
            None => {
                report.counters_mut(item.source).generated += 1;
                let res = checker.check_for_error_condition(model, &t)?;
                report.model_probes += res.probes as u64;
                if res.found {
                    report.counters_mut(item.source).discriminatory += 1;
                    let (original, variant) = res.witness.expect("found implies witness");
                    report.witnesses.push(WitnessPair { source: item.source, original, variant });
                }
                generated.insert(key, res.found);
                res.found
            }
        };
        if !cfg.directed && !cfg.undirected {
            continue;
        }
        let (path, probes) = oracle.path_for(&t)?;
        report.model_probes += probes;
        if cfg.directed && found {
            directed_expand(&mut state, cfg, &path);
        }
        if cfg.undirected {
            undirected_expand(&mut state, cfg, &path);
        }
    }
    log::debug!(
        "search done: {count} dequeues, {} unique, {} discriminatory, {} model probes",
        report.total_generated(),
        report.total_discriminatory(),
        report.model_probes
    );
    Ok(report)
}

/// Run the search against `model`, explaining each dequeued input with a
/// fresh local surrogate tree.
pub fn run<M: PredictionModel + ?Sized>(
    model: &M,
    data: &Dataset,
    cfg: &SearchConfig,
) -> Result<RunReport> {
    cfg.validate()?;
    let mut oracle = ModelExplainer::new(model, &data.schema, cfg.explainer.clone(), cfg.rng_seed);
    run_with_oracle(model, data, cfg, &mut oracle)
}
