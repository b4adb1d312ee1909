//! Path constraints over integer feature domains and their solver.
//!
//! Surrogate-tree splits are axis-aligned threshold predicates, so a
//! conjunction of them is an axis-aligned box. "Solving" a path constraint is
//! therefore exact interval intersection followed by uniform sampling inside
//! the box — no general-purpose constraint solver is involved. Box equality
//! also defines when two constraints are the same path for the visited set,
//! which is stronger than syntactic predicate-list equality and absorbs
//! reordered or redundant predicates.

use std::collections::HashSet;

use rand::Rng;
use serde::Serialize;

use crate::tabular::{FeatureSchema, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CmpOp {
    /// `x <= threshold`
    Le,
    /// `x > threshold`
    Gt,
}

/// One axis-aligned threshold predicate with the confidence it carried on
/// its surrogate path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Predicate {
    pub feature: usize,
    pub op: CmpOp,
    pub threshold: i64,
    pub confidence: f64,
    pub is_protected: bool,
}

impl Predicate {
    /// Negate the comparison; confidence and protected flag carry over.
    pub fn toggle(&self) -> Predicate {
        Predicate {
            op: match self.op {
                CmpOp::Le => CmpOp::Gt,
                CmpOp::Gt => CmpOp::Le,
            },
            ..self.clone()
        }
    }

    pub fn satisfied_by(&self, x: &Instance) -> bool {
        match self.op {
            CmpOp::Le => x.get(self.feature) <= self.threshold,
            CmpOp::Gt => x.get(self.feature) > self.threshold,
        }
    }
}

/// A conjunction of predicates; may be unsatisfiable.
#[derive(Debug, Clone, Default)]
pub struct PathConstraint {
    pub predicates: Vec<Predicate>,
}

impl PathConstraint {
    pub fn new(predicates: Vec<Predicate>) -> PathConstraint {
        PathConstraint { predicates }
    }

    pub fn satisfied_by(&self, x: &Instance) -> bool {
        self.predicates.iter().all(|p| p.satisfied_by(x))
    }

    /// Mean predicate confidence; the ranking value `r` of the search.
    pub fn mean_confidence(&self) -> f64 {
        if self.predicates.is_empty() {
            return 0.0;
        }
        self.predicates.iter().map(|p| p.confidence).sum::<f64>() / self.predicates.len() as f64
    }
}

/// Per-feature inclusive intervals: the feature domains intersected with
/// every predicate of a constraint. An empty interval anywhere makes the
/// whole box unsatisfiable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalBox {
    intervals: Vec<(i64, i64)>,
}

impl IntervalBox {
    pub fn is_unsat(&self) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo > hi)
    }

    pub fn interval(&self, feature: usize) -> (i64, i64) {
        self.intervals[feature]
    }

    /// Canonical visited-set key. All empty boxes denote the same (empty)
    /// set of instances and share one key.
    pub fn key(&self) -> BoxKey {
        if self.is_unsat() {
            BoxKey::Unsat
        } else {
            BoxKey::Sat(self.intervals.clone())
        }
    }

    /// Number of grid points inside the box (0 when unsatisfiable).
    pub fn cardinality(&self) -> u128 {
        self.intervals
            .iter()
            .map(|&(lo, hi)| if lo > hi { 0u128 } else { (hi - lo + 1) as u128 })
            .product()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BoxKey {
    Unsat,
    Sat(Vec<(i64, i64)>),
}

/// Intersect the feature domains with every predicate of the constraint.
///
/// `x <= t` caps the upper bound at `t`; `x > t` raises the lower bound to
/// `t + 1`. Two constraints are the same path iff their boxes are equal.
pub fn canonicalize(pc: &PathConstraint, schema: &FeatureSchema) -> IntervalBox {
    let mut intervals: Vec<(i64, i64)> = (0..schema.arity()).map(|i| schema.domain(i)).collect();
    for p in &pc.predicates {
        let (lo, hi) = &mut intervals[p.feature];
        match p.op {
            CmpOp::Le => *hi = (*hi).min(p.threshold),
            CmpOp::Gt => *lo = (*lo).max(p.threshold + 1),
        }
    }
    IntervalBox { intervals }
}

/// Sample a concrete instance satisfying the constraint, or `None` when the
/// canonical box is empty.
///
/// Constrained features are drawn uniformly from their narrowed interval;
/// features absent from the constraint keep their full domain, so repeated
/// solves diversify them.
pub fn solve(pc: &PathConstraint, schema: &FeatureSchema, rng: &mut impl Rng) -> Option<Instance> {
    let box_ = canonicalize(pc, schema);
    if box_.is_unsat() {
        return None;
    }
    let values = box_.intervals.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect();
    let out = Instance::new(values);
    assert!(pc.satisfied_by(&out), "solver produced an unsound witness");
    debug_assert!(schema.instance_valid(&out));
    Some(out)
}

/// Set of canonical constraint keys already scheduled for solving.
#[derive(Debug, Default)]
pub struct VisitedSet {
    keys: HashSet<BoxKey>,
}

impl VisitedSet {
    pub fn new() -> VisitedSet {
        VisitedSet::default()
    }

    /// Insert the constraint's canonical key; returns `true` if it was new.
    pub fn insert(&mut self, box_: &IntervalBox) -> bool {
        self.keys.insert(box_.key())
    }

    pub fn contains(&self, box_: &IntervalBox) -> bool {
        self.keys.contains(&box_.key())
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}
