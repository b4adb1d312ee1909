//! Local surrogate explanations.
//!
//! To explain one instance we sample a perturbation neighborhood around it,
//! label the samples with the black-box model, weight them by proximity, and
//! fit a small weighted decision tree. The root-to-leaf path the instance
//! takes through that tree is the local explanation the search engine
//! consumes: a conjunction of threshold predicates, each annotated with how
//! contested the branch it enters is.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constraint::{CmpOp, PathConstraint, Predicate};
use crate::error::{Error, Result};
use crate::model::PredictionModel;
use crate::tabular::{ClassId, FeatureSchema, Instance};

/// One perturbed neighbor: where it landed, what the model said, how close
/// it stayed to the explained instance.
#[derive(Debug, Clone)]
pub struct WeightedSample {
    pub instance: Instance,
    pub label: ClassId,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub enum TreeNode {
    Leaf {
        /// Weighted class totals of the samples reaching this leaf.
        counts: [f64; 2],
    },
    Split {
        feature: usize,
        /// Left child holds `value <= threshold`.
        threshold: i64,
        counts: [f64; 2],
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn counts(&self) -> [f64; 2] {
        match self {
            TreeNode::Leaf { counts } | TreeNode::Split { counts, .. } => *counts,
        }
    }

    /// Majority class by weight; ties go to class 0.
    pub fn majority(&self) -> ClassId {
        let c = self.counts();
        u8::from(c[1] > c[0])
    }

    /// Weighted share of samples at this node labeled opposite to its
    /// majority: 0 for a pure node, 0.5 for an even one. This is the
    /// confidence score attached to a path predicate entering this node;
    /// the search engine compares it against its toggling thresholds.
    pub fn minority_share(&self) -> f64 {
        let [a, b] = self.counts();
        let total = a + b;
        if total <= 0.0 {
            0.0
        } else {
            a.min(b) / total
        }
    }
}

#[derive(Debug, Clone)]
pub struct SurrogateTree {
    pub root: TreeNode,
}

impl SurrogateTree {
    pub fn predict(&self, x: &Instance) -> ClassId {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { .. } => return node.majority(),
                TreeNode::Split { feature, threshold, left, right, .. } => {
                    node = if x.get(*feature) <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn to_text(&self, schema: &FeatureSchema) -> String {
        fn rec(node: &TreeNode, schema: &FeatureSchema, depth: usize, out: &mut String) {
            let pad = "  ".repeat(depth);
            match node {
                TreeNode::Leaf { counts } => {
                    out.push_str(&format!(
                        "{pad}leaf class={} counts=[{:.2}, {:.2}]\n",
                        node.majority(),
                        counts[0],
                        counts[1]
                    ));
                }
                TreeNode::Split { feature, threshold, counts, left, right } => {
                    out.push_str(&format!(
                        "{pad}{} <= {} counts=[{:.2}, {:.2}]\n",
                        schema.features[*feature].name,
                        threshold,
                        counts[0],
                        counts[1]
                    ));
                    rec(left, schema, depth + 1, out);
                    rec(right, schema, depth + 1, out);
                }
            }
        }
        let mut out = String::new();
        rec(&self.root, schema, 0, &mut out);
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        fn rec(node: &TreeNode) -> serde_json::Value {
            match node {
                TreeNode::Leaf { .. } => serde_json::json!({ "class": node.majority() }),
                TreeNode::Split { feature, threshold, left, right, .. } => serde_json::json!({
                    "feature": feature,
                    "threshold": threshold,
                    "left": rec(left),
                    "right": rec(right),
                }),
            }
        }
        rec(&self.root)
    }
}

/// Root-to-leaf predicate sequence for one instance, plus the class the leaf
/// assigns it.
#[derive(Debug, Clone)]
pub struct DecisionPath {
    pub predicates: Vec<Predicate>,
    pub leaf_class: ClassId,
}

impl DecisionPath {
    pub fn constraint(&self) -> PathConstraint {
        PathConstraint::new(self.predicates.clone())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExplainerConfig {
    /// Neighborhood size, the explained instance included.
    pub num_samples: usize,
    /// Probability each feature of a neighbor keeps the center's value.
    pub p_keep: f64,
    pub max_depth: usize,
    /// Minimum child weight as a fraction of the neighborhood's total weight.
    pub min_leaf_frac: f64,
}

impl Default for ExplainerConfig {
    fn default() -> ExplainerConfig {
        ExplainerConfig { num_samples: 1000, p_keep: 0.7, max_depth: 6, min_leaf_frac: 0.01 }
    }
}

/// Sample `n` neighbors of `center` (the center itself is sample 0). Each
/// feature is kept with probability `p_keep`, otherwise redrawn uniformly
/// from its domain.
pub fn perturb(
    center: &Instance,
    schema: &FeatureSchema,
    n: usize,
    p_keep: f64,
    rng: &mut impl Rng,
) -> Vec<Instance> {
    let mut out = Vec::with_capacity(n);
    out.push(center.clone());
    for _ in 1..n {
        let values = (0..schema.arity())
            .map(|i| {
                if rng.gen::<f64>() < p_keep {
                    center.get(i)
                } else {
                    let (lo, hi) = schema.domain(i);
                    rng.gen_range(lo..=hi)
                }
            })
            .collect();
        out.push(Instance::new(values));
    }
    out
}

/// Proximity kernel exp(-d^2 / sigma^2) over domain-normalized features,
/// with sigma = 0.75 * sqrt(arity). Singleton domains contribute zero
/// distance.
pub fn kernel_weight(center: &Instance, sample: &Instance, schema: &FeatureSchema) -> f64 {
    let mut d2 = 0.0;
    for i in 0..schema.arity() {
        let (lo, hi) = schema.domain(i);
        if hi > lo {
            let diff = (sample.get(i) - center.get(i)) as f64 / (hi - lo) as f64;
            d2 += diff * diff;
        }
    }
    let sigma = 0.75 * (schema.arity() as f64).sqrt();
    (-d2 / (sigma * sigma)).exp()
}

fn gini(counts: [f64; 2]) -> f64 {
    let total = counts[0] + counts[1];
    if total <= 0.0 {
        return 0.0;
    }
    let p0 = counts[0] / total;
    let p1 = counts[1] / total;
    1.0 - p0 * p0 - p1 * p1
}

struct SplitChoice {
    feature: usize,
    threshold: i64,
    score: f64,
}

/// Best (feature, threshold) by weighted child Gini, or `None` when no
/// candidate leaves both children at least `min_leaf_weight` heavy.
/// Candidate thresholds are the floored midpoints between consecutive
/// distinct values observed at the node. Scanning features and thresholds
/// in ascending order with a strict comparison breaks score ties toward the
/// lower feature index, then the lower threshold. Features flagged in
/// `excluded` never become candidates.
fn best_split(
    samples: &[WeightedSample],
    indices: &[usize],
    excluded: &[bool],
    total: [f64; 2],
    min_leaf_weight: f64,
) -> Option<SplitChoice> {
    let mut best: Option<SplitChoice> = None;
    let mut order: Vec<usize> = Vec::with_capacity(indices.len());
    for (feature, skip) in excluded.iter().enumerate() {
        if *skip {
            continue;
        }
        order.clear();
        order.extend_from_slice(indices);
        order.sort_by_key(|&i| samples[i].instance.get(feature));
        let mut left = [0.0, 0.0];
        for w in 0..order.len() - 1 {
            let s = &samples[order[w]];
            left[s.label as usize] += s.weight;
            let a = s.instance.get(feature);
            let b = samples[order[w + 1]].instance.get(feature);
            if a == b {
                continue;
            }
            let right = [total[0] - left[0], total[1] - left[1]];
            let lw = left[0] + left[1];
            let rw = right[0] + right[1];
            if lw < min_leaf_weight || rw < min_leaf_weight {
                continue;
            }
            let score = lw * gini(left) + rw * gini(right);
            if best.as_ref().is_none_or(|b| score < b.score) {
                best = Some(SplitChoice { feature, threshold: (a + b).div_euclid(2), score });
            }
        }
    }
    best
}

fn build(
    samples: &[WeightedSample],
    indices: &[usize],
    excluded: &[bool],
    depth_left: usize,
    min_leaf_weight: f64,
) -> TreeNode {
    let mut counts = [0.0, 0.0];
    for &i in indices {
        counts[samples[i].label as usize] += samples[i].weight;
    }
    if depth_left == 0 || counts[0] == 0.0 || counts[1] == 0.0 {
        return TreeNode::Leaf { counts };
    }
    let Some(split) = best_split(samples, indices, excluded, counts, min_leaf_weight) else {
        return TreeNode::Leaf { counts };
    };
    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
        .iter()
        .partition(|&&i| samples[i].instance.get(split.feature) <= split.threshold);
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        counts,
        left: Box::new(build(samples, &left_idx, excluded, depth_left - 1, min_leaf_weight)),
        right: Box::new(build(samples, &right_idx, excluded, depth_left - 1, min_leaf_weight)),
    }
}

/// Weighted CART with Gini impurity. Recursion stops on a pure node, at
/// `max_depth`, or when every candidate split would starve a child below
/// `min_leaf_weight`.
///
/// Protected features are not split candidates: the surrogate describes the
/// model's behavior over the dimensions test generation may vary, so label
/// variation attributable to protected attributes surfaces as node impurity
/// rather than as a branch. A node that is impure only because of protected
/// variation still splits (zero-gain splits are allowed) until depth or the
/// weight floor stops it.
pub fn fit_tree(
    samples: &[WeightedSample],
    schema: &FeatureSchema,
    max_depth: usize,
    min_leaf_weight: f64,
) -> Result<SurrogateTree> {
    if samples.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let excluded: Vec<bool> = (0..schema.arity()).map(|i| schema.is_protected(i)).collect();
    let indices: Vec<usize> = (0..samples.len()).collect();
    let root = build(samples, &indices, &excluded, max_depth, min_leaf_weight);
    Ok(SurrogateTree { root })
}

/// Walk the tree with `instance` and emit one predicate per internal node,
/// oriented so the instance satisfies it. Each predicate's confidence is the
/// minority share of the child it enters.
pub fn extract_path(tree: &SurrogateTree, instance: &Instance, schema: &FeatureSchema) -> DecisionPath {
    let mut predicates = Vec::new();
    let mut node = &tree.root;
    loop {
        match node {
            TreeNode::Leaf { .. } => {
                let path = DecisionPath { predicates, leaf_class: node.majority() };
                for p in &path.predicates {
                    assert!(p.satisfied_by(instance), "path predicate not satisfied by its own instance");
                }
                return path;
            }
            TreeNode::Split { feature, threshold, left, right, .. } => {
                let goes_left = instance.get(*feature) <= *threshold;
                let child: &TreeNode = if goes_left { left } else { right };
                predicates.push(Predicate {
                    feature: *feature,
                    op: if goes_left { CmpOp::Le } else { CmpOp::Gt },
                    threshold: *threshold,
                    confidence: child.minority_share(),
                    is_protected: schema.is_protected(*feature),
                });
                node = child;
            }
        }
    }
}

#[derive(Debug)]
pub struct Explanation {
    pub tree: SurrogateTree,
    pub path: DecisionPath,
}

/// Full pipeline: perturb, label with the model, weight by proximity, fit,
/// extract the center's path. Costs `cfg.num_samples` model probes.
pub fn explain<M: PredictionModel + ?Sized>(
    model: &M,
    center: &Instance,
    schema: &FeatureSchema,
    cfg: &ExplainerConfig,
    rng: &mut impl Rng,
) -> Result<Explanation> {
    let neighborhood = perturb(center, schema, cfg.num_samples, cfg.p_keep, rng);
    let labels = model.predict_batch(&neighborhood)?;
    let samples: Vec<WeightedSample> = neighborhood
        .into_iter()
        .zip(labels)
        .map(|(instance, label)| {
            let weight = kernel_weight(center, &instance, schema);
            WeightedSample { instance, label, weight }
        })
        .collect();
    let total: f64 = samples.iter().map(|s| s.weight).sum();
    let tree = fit_tree(&samples, schema, cfg.max_depth, cfg.min_leaf_frac * total)?;
    let path = extract_path(&tree, center, schema);
    Ok(Explanation { tree, path })
}
