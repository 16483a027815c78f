//! Distribution files: CSV with a commented header, or JSON. Both carry the
//! fully resolved configuration so a file can be regenerated from itself.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::{Format, KindName, RunConfig};
use crate::error::{Error, Result};
use crate::experiments::{Distribution, HomPoint, Normalization};

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    /// One distribution, or one per walk prefix (`step = Some(n)`).
    Distributions(Vec<(Option<usize>, Distribution)>),
    Hom(Vec<HomPoint>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputDoc {
    pub kind: KindName,
    pub heralded: bool,
    pub config: RunConfig,
    pub payload: Payload,
}

fn normalization_name(n: Normalization) -> &'static str {
    match n {
        Normalization::RawPattern => "raw-pattern",
        Normalization::NormalizedOverOutcomes => "normalized-over-outcomes",
    }
}

/// 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

impl OutputDoc {
    fn normalization(&self) -> &'static str {
        match &self.payload {
            Payload::Distributions(d) => d
                .first()
                .map_or("normalized-over-outcomes", |(_, d)| normalization_name(d.normalization)),
            Payload::Hom(_) => "raw-pattern",
        }
    }

    fn undefined(&self) -> bool {
        match &self.payload {
            Payload::Distributions(d) => d.iter().any(|(_, d)| d.normalization_undefined),
            Payload::Hom(_) => false,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# qwalk distribution").unwrap();
        writeln!(out, "# kind = {}", self.kind.as_str()).unwrap();
        writeln!(out, "# heralded = {}", self.heralded).unwrap();
        writeln!(out, "# normalization = {}", self.normalization()).unwrap();
        writeln!(out, "# normalization_undefined = {}", self.undefined()).unwrap();
        writeln!(out, "# config:").unwrap();
        for line in self.config.to_toml().lines() {
            if line.is_empty() {
                writeln!(out, "#").unwrap();
            } else {
                writeln!(out, "# {line}").unwrap();
            }
        }
        match &self.payload {
            Payload::Hom(points) => {
                writeln!(out, "overlap,visibility,coincidence").unwrap();
                for p in points {
                    writeln!(out, "{},{},{}", num(p.overlap), num(p.visibility), num(p.coincidence)).unwrap();
                }
            }
            Payload::Distributions(dists) => {
                let stepped = dists.iter().any(|(s, _)| s.is_some());
                let fields = dists.first().map_or(1, |(_, d)| d.labels.first().map_or(1, |l| l.fields().len()));
                let mut cols: Vec<&str> = Vec::new();
                if stepped {
                    cols.push("step");
                }
                cols.extend_from_slice(if fields == 1 { &["bin"] } else { &["m1", "m2"] });
                cols.extend_from_slice(&["probability", "raw_pattern_probability"]);
                writeln!(out, "{}", cols.join(",")).unwrap();
                for (step, d) in dists {
                    for (i, l) in d.labels.iter().enumerate() {
                        let mut row: Vec<String> = Vec::new();
                        if let Some(s) = step {
                            row.push(s.to_string());
                        }
                        row.extend(l.fields().iter().map(|f| f.to_string()));
                        row.push(num(d.probs[i]));
                        row.push(num(d.raw[i]));
                        writeln!(out, "{}", row.join(",")).unwrap();
                    }
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let config = serde_json::to_value(&self.config).expect("config serializes");
        let body = match &self.payload {
            Payload::Hom(points) => serde_json::json!({
                "points": points.iter().map(|p| serde_json::json!({
                    "overlap": p.overlap,
                    "visibility": p.visibility,
                    "coincidence": p.coincidence,
                })).collect::<Vec<_>>(),
            }),
            Payload::Distributions(dists) => serde_json::json!({
                "distributions": dists.iter().map(|(step, d)| JsonDistribution {
                    step: *step,
                    normalization_undefined: d.normalization_undefined,
                    labels: d.labels.iter().map(|l| l.fields()).collect(),
                    probability: d.probs.clone(),
                    raw_pattern_probability: d.raw.clone(),
                }).collect::<Vec<_>>(),
            }),
        };
        let mut doc = serde_json::json!({
            "kind": self.kind.as_str(),
            "heralded": self.heralded,
            "normalization": self.normalization(),
            "config": config,
        });
        if let (Some(d), Some(b)) = (doc.as_object_mut(), body.as_object()) {
            for (k, v) in b {
                d.insert(k.clone(), v.clone());
            }
        }
        let mut s = serde_json::to_string_pretty(&doc).expect("json serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct JsonDistribution {
    step: Option<usize>,
    normalization_undefined: bool,
    labels: Vec<Vec<usize>>,
    probability: Vec<f64>,
    raw_pattern_probability: Vec<f64>,
}

#[derive(Deserialize)]
struct JsonDoc {
    kind: String,
    #[serde(default)]
    distributions: Vec<JsonDistribution>,
}

/// Labels and probabilities of one step.
pub type LoadedStep = (Vec<Vec<usize>>, Vec<f64>);

/// Distribution read back for comparison: kind, then per step the labels and
/// normalized probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedDistributions {
    pub kind: String,
    pub steps: Vec<(Option<usize>, LoadedStep)>,
}

pub fn parse(text: &str) -> Result<LoadedDistributions> {
    if text.trim_start().starts_with('{') {
        let doc: JsonDoc = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        if doc.distributions.is_empty() {
            return Err(Error::InvalidConfig("file holds no distributions".into()));
        }
        return Ok(LoadedDistributions {
            kind: doc.kind,
            steps: doc
                .distributions
                .into_iter()
                .map(|d| (d.step, (d.labels, d.probability)))
                .collect(),
        });
    }
    parse_csv(text)
}

fn parse_csv(text: &str) -> Result<LoadedDistributions> {
    let bad = |m: &str| Error::InvalidConfig(format!("distribution csv: {m}"));
    let mut kind = None;
    let mut header: Option<Vec<&str>> = None;
    let mut by_step: BTreeMap<Option<usize>, LoadedStep> = BTreeMap::new();
    for line in text.lines() {
        if let Some(c) = line.strip_prefix('#') {
            if let Some(k) = c.trim().strip_prefix("kind = ") {
                kind.get_or_insert_with(|| k.trim().to_string());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let Some(h) = &header else {
            header = Some(cells);
            continue;
        };
        if cells.len() != h.len() {
            return Err(bad("ragged row"));
        }
        let p_col = h.iter().position(|&c| c == "probability").ok_or_else(|| bad("no probability column"))?;
        let step_col = h.iter().position(|&c| c == "step");
        let step = step_col
            .map(|i| cells[i].parse::<usize>().map_err(|_| bad("bad step")))
            .transpose()?;
        let label = (0..p_col)
            .filter(|&i| Some(i) != step_col)
            .map(|i| cells[i].parse::<usize>().map_err(|_| bad("bad label")))
            .collect::<Result<Vec<_>>>()?;
        let p: f64 = cells[p_col].parse().map_err(|_| bad("bad probability"))?;
        let e = by_step.entry(step).or_default();
        e.0.push(label);
        e.1.push(p);
    }
    if by_step.is_empty() {
        return Err(bad("no rows"));
    }
    Ok(LoadedDistributions {
        kind: kind.ok_or_else(|| bad("missing kind header"))?,
        steps: by_step.into_iter().collect(),
    })
}
