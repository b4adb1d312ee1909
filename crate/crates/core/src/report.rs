//! Run results: per-source generation counters, witness pairs, and the
//! serialized report formats.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::tabular::Instance;

/// Which mechanism put a test input on the queue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Seed,
    Directed,
    Undirected,
    Random,
}

impl std::fmt::Display for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Source::Seed => "seed",
            Source::Directed => "directed",
            Source::Undirected => "undirected",
            Source::Random => "random",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceCounters {
    /// Unique tests executed (distinct non-protected value vectors).
    pub generated: u64,
    /// How many of those the discrimination check flagged.
    pub discriminatory: u64,
}

/// A discriminatory pair: same everywhere except protected attributes, yet
/// classified differently.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessPair {
    pub source: Source,
    pub original: Instance,
    pub variant: Instance,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    /// Echo of the configuration that produced this report.
    pub config: serde_json::Value,
    pub seed: SourceCounters,
    pub directed: SourceCounters,
    pub undirected: SourceCounters,
    pub random: SourceCounters,
    pub witnesses: Vec<WitnessPair>,
    pub model_probes: u64,
    /// Wall-clock time; deliberately kept out of the serialized report so
    /// identical runs stay byte-identical. Text output shows it when set.
    #[serde(skip)]
    pub duration_ms: Option<u64>,
}

pub const REPORT_SCHEMA_VERSION: u32 = 1;

impl RunReport {
    pub fn new(config: serde_json::Value) -> RunReport {
        RunReport {
            schema_version: REPORT_SCHEMA_VERSION,
            config,
            seed: SourceCounters::default(),
            directed: SourceCounters::default(),
            undirected: SourceCounters::default(),
            random: SourceCounters::default(),
            witnesses: Vec::new(),
            model_probes: 0,
            duration_ms: None,
        }
    }

    pub fn counters(&self, source: Source) -> &SourceCounters {
        match source {
            Source::Seed => &self.seed,
            Source::Directed => &self.directed,
            Source::Undirected => &self.undirected,
            Source::Random => &self.random,
        }
    }

    pub fn counters_mut(&mut self, source: Source) -> &mut SourceCounters {
        match source {
            Source::Seed => &mut self.seed,
            Source::Directed => &mut self.directed,
            Source::Undirected => &mut self.undirected,
            Source::Random => &mut self.random,
        }
    }

    pub fn total_generated(&self) -> u64 {
        self.seed.generated
            + self.directed.generated
            + self.undirected.generated
            + self.random.generated
    }

    pub fn total_discriminatory(&self) -> u64 {
        self.seed.discriminatory
            + self.directed.discriminatory
            + self.undirected.discriminatory
            + self.random.discriminatory
    }

    /// Fraction of executed tests found discriminatory, if any were run.
    pub fn success_rate(&self) -> Option<f64> {
        let gen = self.total_generated();
        (gen > 0).then(|| self.total_discriminatory() as f64 / gen as f64)
    }

    /// Combine two runs (e.g. a symbolic run and a random baseline) into one
    /// report: counters add per source, witnesses concatenate.
    pub fn merged(&self, other: &RunReport) -> RunReport {
        let mut out = RunReport::new(serde_json::json!({
            "merged": [self.config.clone(), other.config.clone()],
        }));
        for source in [Source::Seed, Source::Directed, Source::Undirected, Source::Random] {
            let a = self.counters(source);
            let b = other.counters(source);
            *out.counters_mut(source) = SourceCounters {
                generated: a.generated + b.generated,
                discriminatory: a.discriminatory + b.discriminatory,
            };
        }
        out.witnesses.extend(self.witnesses.iter().cloned());
        out.witnesses.extend(other.witnesses.iter().cloned());
        out.model_probes = self.model_probes + other.model_probes;
        out.duration_ms = match (self.duration_ms, other.duration_ms) {
            (Some(a), Some(b)) => Some(a + b),
            (a, b) => a.or(b),
        };
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Text,
}

impl std::str::FromStr for ReportFormat {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<ReportFormat> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "text" => Ok(ReportFormat::Text),
            _ => Err(crate::Error::Config(format!("unknown report format '{s}'"))),
        }
    }
}

fn rate_cell(c: &SourceCounters) -> String {
    if c.generated == 0 {
        "n/a".to_string()
    } else {
        format!("{:.1}%", 100.0 * c.discriminatory as f64 / c.generated as f64)
    }
}

const SOURCES: [Source; 4] = [Source::Seed, Source::Directed, Source::Undirected, Source::Random];

/// Serialize a report. JSON is canonical (sorted keys) so that emitting,
/// parsing, and re-emitting reproduces the exact bytes.
pub fn emit_report(report: &RunReport, format: ReportFormat) -> Result<String> {
    for source in SOURCES {
        let c = report.counters(source);
        assert!(
            c.discriminatory <= c.generated,
            "{source}: discriminatory {} exceeds generated {}",
            c.discriminatory,
            c.generated
        );
    }
    match format {
        ReportFormat::Json => {
            let value = serde_json::to_value(report)?;
            Ok(serde_json::to_string_pretty(&value)? + "\n")
        }
        ReportFormat::Csv => {
            let mut out = String::from("source,generated,discriminatory,success_rate\n");
            for source in SOURCES {
                let c = report.counters(source);
                out.push_str(&format!(
                    "{source},{},{},{}\n",
                    c.generated,
                    c.discriminatory,
                    rate_cell(c)
                ));
            }
            Ok(out)
        }
        ReportFormat::Text => {
            let mut out = String::new();
            out.push_str(&format!("{:<12} {:>8} {:>8} {:>8}\n", "source", "#Gen", "#InDi", "rate"));
            for source in SOURCES {
                let c = report.counters(source);
                out.push_str(&format!(
                    "{:<12} {:>8} {:>8} {:>8}\n",
                    source.to_string(),
                    c.generated,
                    c.discriminatory,
                    rate_cell(c)
                ));
            }
            let total = SourceCounters {
                generated: report.total_generated(),
                discriminatory: report.total_discriminatory(),
            };
            out.push_str(&format!(
                "{:<12} {:>8} {:>8} {:>8}\n",
                "total",
                total.generated,
                total.discriminatory,
                rate_cell(&total)
            ));
            out.push_str(&format!("\nmodel probes: {}\n", report.model_probes));
            out.push_str(&format!("witnesses: {}\n", report.witnesses.len()));
            if let Some(ms) = report.duration_ms {
                out.push_str(&format!("duration: {:.2}s\n", ms as f64 / 1000.0));
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> RunReport {
        let mut r = RunReport::new(serde_json::json!({"limit": 1000, "rng_seed": 42}));
        r.seed = SourceCounters { generated: 600, discriminatory: 300 };
        r.directed = SourceCounters { generated: 300, discriminatory: 250 };
        r.undirected = SourceCounters { generated: 100, discriminatory: 48 };
        r.model_probes = 12345;
        r
    }

    #[test]
    fn success_rate_formats_to_one_decimal() {
        let mut r = RunReport::new(serde_json::Value::Null);
        r.seed = SourceCounters { generated: 1000, discriminatory: 598 };
        let text = emit_report(&r, ReportFormat::Text).unwrap();
        assert!(text.contains("59.8%"), "{text}");
        let csv = emit_report(&r, ReportFormat::Csv).unwrap();
        assert!(csv.contains("seed,1000,598,59.8%"), "{csv}");
    }

    #[test]
    fn empty_report_renders_na_rates() {
        let r = RunReport::new(serde_json::Value::Null);
        let text = emit_report(&r, ReportFormat::Text).unwrap();
        assert!(text.contains("n/a"));
        assert_eq!(r.success_rate(), None);
        let csv = emit_report(&r, ReportFormat::Csv).unwrap();
        assert!(csv.contains("random,0,0,n/a"));
    }

    #[test]
    fn json_emit_parse_reemit_is_byte_identical() {
        let r = sample_report();
        let first = emit_report(&r, ReportFormat::Json).unwrap();
        let parsed: RunReport = serde_json::from_str(&first).unwrap();
        let second = emit_report(&parsed, ReportFormat::Json).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn duration_shows_in_text_but_never_in_json() {
        let mut r = sample_report();
        r.duration_ms = Some(1234);
        let json = emit_report(&r, ReportFormat::Json).unwrap();
        assert!(!json.contains("duration"));
        let text = emit_report(&r, ReportFormat::Text).unwrap();
        assert!(text.contains("duration: 1.23s"));
    }

    #[test]
    #[should_panic(expected = "exceeds generated")]
    fn emit_rejects_impossible_counters() {
        let mut r = RunReport::new(serde_json::Value::Null);
        r.seed = SourceCounters { generated: 1, discriminatory: 2 };
        let _ = emit_report(&r, ReportFormat::Text);
    }

    #[test]
    fn merged_adds_counters_and_concatenates_witnesses() {
        let mut a = sample_report();
        a.witnesses.push(WitnessPair {
            source: Source::Seed,
            original: Instance::new(vec![1, 0]),
            variant: Instance::new(vec![1, 1]),
        });
        let mut b = RunReport::new(serde_json::json!({"limit": 1000}));
        b.random = SourceCounters { generated: 999, discriminatory: 166 };
        b.model_probes = 55;
        let m = a.merged(&b);
        assert_eq!(m.seed.generated, 600);
        assert_eq!(m.random.generated, 999);
        assert_eq!(m.random.discriminatory, 166);
        assert_eq!(m.model_probes, 12400);
        assert_eq!(m.witnesses.len(), 1);
        assert_eq!(m.total_generated(), 1000 + 999);
    }

    #[test]
    fn success_rate_is_total_ratio() {
        let r = sample_report();
        let rate = r.success_rate().unwrap();
        assert!((rate - 598.0 / 1000.0).abs() < 1e-12);
    }

    #[test]
    fn source_serializes_lowercase() {
        assert_eq!(serde_json::to_string(&Source::Directed).unwrap(), "\"directed\"");
        let s: Source = serde_json::from_str("\"undirected\"").unwrap();
        assert_eq!(s, Source::Undirected);
    }
}
