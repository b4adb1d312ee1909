//! Feature schemas, encoded instances, and dataset ingestion.
//!
//! Every feature is an integer over a closed interval `[lo, hi]`; continuous
//! columns must be pre-binned by the schema author, and categorical columns
//! are ordinal-encoded through their `labels` list. The schema lives in a
//! JSON sidecar next to the CSV:
//!
//! ```json
//! {
//!   "features": [
//!     {"name": "age", "domain": [1, 9], "kind": "numeric"},
//!     {"name": "gender", "kind": "categorical", "labels": ["F", "M"]}
//!   ],
//!   "protected": ["gender"],
//!   "label": "risk"
//! }
//! ```
//!
//! The CSV itself is UTF-8, comma-separated, with a header row naming the
//! features in schema order plus the label column last. Labels are binary
//! (`0`/`1`).

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Class decisions are binary.
pub type ClassId = u8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

/// One column of the input space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    /// Inclusive integer interval. Optional for categorical features, where
    /// it defaults to `[0, labels.len() - 1]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<[i64; 2]>,
    pub kind: FeatureKind,
    /// Display strings for categorical codes, in code order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

/// The feature universe all generation draws from: ordered features with
/// integer domains, plus the set of protected attribute names.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub features: Vec<Feature>,
    pub protected: Vec<String>,
    /// Name of the label column (last column of the CSV).
    pub label: String,
}

impl FeatureSchema {
    /// Parse and validate a schema from its sidecar JSON.
    pub fn from_json(text: &str) -> Result<FeatureSchema> {
        let schema: FeatureSchema = serde_json::from_str(text)?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<FeatureSchema> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serialization cannot fail")
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.is_empty() {
            return Err(Error::InvalidSchema("no features".into()));
        }
        let mut seen = HashSet::new();
        for f in &self.features {
            if !seen.insert(f.name.as_str()) {
                return Err(Error::InvalidSchema(format!("duplicate feature '{}'", f.name)));
            }
            let (lo, hi) = domain_of(f)?;
            if lo > hi {
                return Err(Error::InvalidSchema(format!(
                    "feature '{}' has empty domain [{lo}, {hi}]",
                    f.name
                )));
            }
            if let Some(labels) = &f.labels {
                let span = (hi - lo + 1) as usize;
                if labels.len() != span {
                    return Err(Error::InvalidSchema(format!(
                        "feature '{}' has {} labels for a domain of {} values",
                        f.name,
                        labels.len(),
                        span
                    )));
                }
            } else if f.kind == FeatureKind::Categorical {
                return Err(Error::InvalidSchema(format!(
                    "categorical feature '{}' needs labels",
                    f.name
                )));
            }
        }
        for p in &self.protected {
            if !self.features.iter().any(|f| &f.name == p) {
                return Err(Error::InvalidSchema(format!(
                    "protected attribute '{p}' is not a feature"
                )));
            }
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.features.len()
    }

    /// Inclusive domain of feature `i`.
    pub fn domain(&self, i: usize) -> (i64, i64) {
        domain_of(&self.features[i]).expect("validated schema")
    }

    pub fn is_protected(&self, i: usize) -> bool {
        self.protected.iter().any(|p| p == &self.features[i].name)
    }

    /// Indices of protected features, ascending.
    pub fn protected_indices(&self) -> Vec<usize> {
        (0..self.arity()).filter(|&i| self.is_protected(i)).collect()
    }

    /// Indices of non-protected features, ascending.
    pub fn non_protected_indices(&self) -> Vec<usize> {
        (0..self.arity()).filter(|&i| !self.is_protected(i)).collect()
    }

    pub fn instance_valid(&self, instance: &Instance) -> bool {
        instance.values().len() == self.arity()
            && instance.values().iter().enumerate().all(|(i, &v)| {
                let (lo, hi) = self.domain(i);
                lo <= v && v <= hi
            })
    }

    /// Encode one CSV row (feature fields only) into an instance.
    pub fn encode_row(&self, fields: &[&str], row: usize) -> Result<Instance> {
        if fields.len() != self.arity() {
            return Err(Error::ArityMismatch {
                row,
                expected: self.arity(),
                found: fields.len(),
            });
        }
        let mut values = Vec::with_capacity(self.arity());
        for (i, raw) in fields.iter().enumerate() {
            let f = &self.features[i];
            let (lo, hi) = self.domain(i);
            let v = match &f.labels {
                Some(labels) => {
                    let code = labels.iter().position(|l| l == raw).ok_or_else(|| {
                        Error::UnknownCategory {
                            feature: f.name.clone(),
                            value: raw.to_string(),
                        }
                    })?;
                    lo + code as i64
                }
                None => raw.trim().parse::<i64>().map_err(|_| Error::DomainViolation {
                    feature: f.name.clone(),
                    value: i64::MIN,
                    lo,
                    hi,
                })?,
            };
            if v < lo || v > hi {
                return Err(Error::DomainViolation {
                    feature: f.name.clone(),
                    value: v,
                    lo,
                    hi,
                });
            }
            values.push(v);
        }
        Ok(Instance::new(values))
    }

    /// Inverse of encoding: per-feature display strings.
    pub fn decode(&self, instance: &Instance) -> Vec<String> {
        debug_assert!(self.instance_valid(instance));
        instance
            .values()
            .iter()
            .enumerate()
            .map(|(i, &v)| match &self.features[i].labels {
                Some(labels) => {
                    let (lo, _) = self.domain(i);
                    labels[(v - lo) as usize].clone()
                }
                None => v.to_string(),
            })
            .collect()
    }
}

fn domain_of(f: &Feature) -> Result<(i64, i64)> {
    match (f.domain, &f.labels) {
        (Some([lo, hi]), _) => Ok((lo, hi)),
        (None, Some(labels)) if !labels.is_empty() => Ok((0, labels.len() as i64 - 1)),
        _ => Err(Error::InvalidSchema(format!(
            "feature '{}' has neither domain nor labels",
            f.name
        ))),
    }
}

/// One encoded input: an integer per schema feature, in schema order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Instance(Vec<i64>);

impl Instance {
    pub fn new(values: Vec<i64>) -> Instance {
        Instance(values)
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> i64 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, v: i64) {
        self.0[i] = v;
    }

    /// Copy with `values[indices[k]] = replacements[k]`.
    pub fn substitute(&self, indices: &[usize], replacements: &[i64]) -> Instance {
        debug_assert_eq!(indices.len(), replacements.len());
        let mut out = self.clone();
        for (&i, &v) in indices.iter().zip(replacements) {
            out.0[i] = v;
        }
        out
    }

    /// The values at `indices`, in order. Used as dedup key over the
    /// non-protected features.
    pub fn project(&self, indices: &[usize]) -> Vec<i64> {
        indices.iter().map(|&i| self.0[i]).collect()
    }
}

/// Encoded rows plus binary labels, tied to their schema.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub schema: FeatureSchema,
    pub rows: Vec<Instance>,
    pub labels: Vec<ClassId>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Write the dataset back out as a CSV with a header row, decoding
    /// categorical codes to their labels.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        let mut header: Vec<&str> = self.schema.features.iter().map(|f| f.name.as_str()).collect();
        header.push(&self.schema.label);
        writeln!(w, "{}", header.join(","))?;
        for (row, label) in self.rows.iter().zip(&self.labels) {
            let mut fields = self.schema.decode(row);
            fields.push(label.to_string());
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Load a dataset from a CSV file and its schema sidecar.
///
/// The header must name the schema features in order, followed by the label
/// column. Categorical strings are mapped to ordinal codes, numeric values
/// are validated against their domains, and labels must be `0` or `1`.
pub fn load_csv(path: impl AsRef<Path>, schema_path: impl AsRef<Path>) -> Result<Dataset> {
    let schema = FeatureSchema::load(schema_path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path.as_ref())?;

    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let mut expected: Vec<&str> = schema.features.iter().map(|f| f.name.as_str()).collect();
    expected.push(schema.label.as_str());
    if header != expected {
        return Err(Error::HeaderMismatch(format!(
            "expected [{}], found [{}]",
            expected.join(", "),
            header.join(", ")
        )));
    }

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let fields: Vec<&str> = record.iter().collect();
        if fields.len() != schema.arity() + 1 {
            return Err(Error::ArityMismatch {
                row: idx,
                expected: schema.arity() + 1,
                found: fields.len(),
            });
        }
        rows.push(schema.encode_row(&fields[..schema.arity()], idx)?);
        let label_raw = fields[schema.arity()].trim();
        let label = match label_raw {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(Error::InvalidLabel {
                    row: idx,
                    value: other.to_string(),
                })
            }
        };
        labels.push(label);
    }
    Ok(Dataset { schema, rows, labels })
}

/// Draw an instance uniformly from the schema's domains.
pub fn random_instance(schema: &FeatureSchema, rng: &mut impl Rng) -> Instance {
    let values = (0..schema.arity())
        .map(|i| {
            let (lo, hi) = schema.domain(i);
            rng.gen_range(lo..=hi)
        })
        .collect();
    let out = Instance::new(values);
    debug_assert!(schema.instance_valid(&out));
    out
}
