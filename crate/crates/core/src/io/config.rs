//! Run configuration: one TOML (or JSON) document, every section optional,
//! unknown keys rejected.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{ExperimentKind, ExperimentSpec, Fold, PairSource};
use crate::fock::OracleOptions;
use crate::metrics::Convention;
use crate::par::Exec;
use crate::walk::{LayerParams, WalkConfig, DEFAULT_CRYSTAL_TRANSMISSION};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub walk: WalkSection,
    pub sources: SourceSection,
    pub detection: DetectionSection,
    pub experiment: ExperimentSection,
    pub output: OutputSection,
    pub oracle: OracleSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WalkSection {
    pub steps: usize,
    pub omega: f64,
    pub gamma: f64,
    pub transmission: f64,
    /// Per-layer overrides; when given, must have `steps` entries.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub layers: Vec<LayerSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSection {
    pub omega: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default = "default_transmission")]
    pub transmission: f64,
}

fn default_transmission() -> f64 {
    DEFAULT_CRYSTAL_TRANSMISSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceSection {
    pub mu_alpha: f64,
    pub mu_xi: f64,
    pub overlap: f64,
    pub coherent_phase: f64,
    pub pair_source: PairSourceName,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairSourceName {
    Tmsv,
    Squashed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectionSection {
    pub eta_kerr: f64,
    pub eta_idler: f64,
    pub eta_sys: f64,
    pub heralded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum KindName {
    OneFold,
    TwoFold,
    ThreeFold,
    Hom,
    StepEvolution,
}

impl KindName {
    pub fn as_str(self) -> &'static str {
        match self {
            KindName::OneFold => "one-fold",
            KindName::TwoFold => "two-fold",
            KindName::ThreeFold => "three-fold",
            KindName::Hom => "hom",
            KindName::StepEvolution => "step-evolution",
        }
    }

    fn fold(self) -> Option<Fold> {
        match self {
            KindName::OneFold => Some(Fold::One),
            KindName::TwoFold => Some(Fold::Two),
            KindName::ThreeFold => Some(Fold::ThreePartial),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub kind: KindName,
    /// Fold run at each prefix by `step-evolution`.
    pub step_kind: KindName,
    pub n_max: usize,
    pub hom_overlaps: Vec<f64>,
    pub hom_target_visibility: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimilarityName {
    Bhattacharyya,
    BhattacharyyaSquared,
}

impl From<SimilarityName> for Convention {
    fn from(s: SimilarityName) -> Self {
        match s {
            SimilarityName::Bhattacharyya => Convention::Bhattacharyya,
            SimilarityName::BhattacharyyaSquared => Convention::BhattacharyyaSquared,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Empty means stdout.
    pub path: String,
    pub format: Format,
    pub similarity: SimilarityName,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSection {
    pub enabled: bool,
    pub cutoff: usize,
    pub quadrature_order: usize,
    pub leak_bound: f64,
    pub max_dim: usize,
    /// Largest tolerated `|Gaussian − Fock|`.
    pub tolerance: f64,
}

impl Default for WalkSection {
    fn default() -> Self {
        Self {
            steps: 11,
            omega: FRAC_PI_2,
            gamma: 0.0,
            transmission: DEFAULT_CRYSTAL_TRANSMISSION,
            layers: Vec::new(),
        }
    }
}

impl Default for SourceSection {
    fn default() -> Self {
        Self {
            mu_alpha: 0.1,
            mu_xi: 0.026,
            overlap: 0.7,
            coherent_phase: 0.0,
            pair_source: PairSourceName::Tmsv,
        }
    }
}

impl Default for DetectionSection {
    fn default() -> Self {
        Self {
            eta_kerr: 0.97,
            eta_idler: 1.0,
            eta_sys: 1.0,
            heralded: true,
        }
    }
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            kind: KindName::OneFold,
            step_kind: KindName::OneFold,
            n_max: 11,
            hom_overlaps: (0..=10).map(|i| i as f64 / 10.0).collect(),
            hom_target_visibility: 0.70,
        }
    }
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            path: String::new(),
            format: Format::Csv,
            similarity: SimilarityName::Bhattacharyya,
        }
    }
}

impl Default for OracleSection {
    fn default() -> Self {
        let o = OracleOptions::default();
        Self {
            enabled: false,
            cutoff: 12,
            quadrature_order: o.quadrature_order,
            leak_bound: o.leak_bound,
            max_dim: o.max_dim,
            tolerance: 1e-6,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// `.json` files are read as JSON, everything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.walk_config()?;
        self.spec()?.validate()?;
        let e = &self.experiment;
        if e.step_kind.fold().is_none() {
            return Err(Error::InvalidConfig(format!(
                "step_kind must be one-fold, two-fold or three-fold, not {}",
                e.step_kind.as_str()
            )));
        }
        if e.kind == KindName::StepEvolution && (e.n_max == 0 || e.n_max > self.walk.steps) {
            return Err(Error::InvalidConfig(format!(
                "n_max = {} must be in 1..={}",
                e.n_max, self.walk.steps
            )));
        }
        if e.hom_overlaps.iter().any(|o| !(0.0..=1.0).contains(o)) {
            return Err(Error::InvalidConfig("hom_overlaps must lie in [0, 1]".into()));
        }
        if !(e.hom_target_visibility > 0.0 && e.hom_target_visibility < 1.0) {
            return Err(Error::InvalidConfig("hom_target_visibility must lie in (0, 1)".into()));
        }
        let o = &self.oracle;
        if o.cutoff < 2 || o.quadrature_order == 0 || !(o.leak_bound > 0.0) || !(o.tolerance > 0.0) {
            return Err(Error::InvalidConfig("oracle settings out of range".into()));
        }
        Ok(())
    }

    pub fn walk_config(&self) -> Result<WalkConfig> {
        let w = &self.walk;
        let layers = if w.layers.is_empty() {
            vec![LayerParams::new(w.omega, w.gamma, w.transmission)?; w.steps]
        } else {
            if w.layers.len() != w.steps {
                return Err(Error::InvalidConfig(format!(
                    "walk.layers has {} entries but walk.steps = {}",
                    w.layers.len(),
                    w.steps
                )));
            }
            w.layers
                .iter()
                .map(|l| LayerParams::new(l.omega, l.gamma, l.transmission))
                .collect::<Result<_>>()?
        };
        WalkConfig::new(layers)
    }

    pub fn spec(&self) -> Result<ExperimentSpec> {
        let kind = match self.experiment.kind {
            KindName::OneFold => ExperimentKind::OneFold,
            KindName::TwoFold => ExperimentKind::TwoFold,
            KindName::ThreeFold => ExperimentKind::ThreeFoldPartial,
            KindName::Hom => ExperimentKind::HomScan,
            KindName::StepEvolution => ExperimentKind::StepEvolution,
        };
        Ok(ExperimentSpec {
            walk: self.walk_config()?,
            mu_alpha: self.sources.mu_alpha,
            mu_xi: self.sources.mu_xi,
            overlap: self.sources.overlap,
            coherent_phase: self.sources.coherent_phase,
            eta_kerr: self.detection.eta_kerr,
            eta_idler: self.detection.eta_idler,
            eta_sys: self.detection.eta_sys,
            heralded: self.detection.heralded,
            pair_source: match self.sources.pair_source {
                PairSourceName::Tmsv => PairSource::Tmsv,
                PairSourceName::Squashed => PairSource::Squashed,
            },
            kind,
            step_fold: self.experiment.step_kind.fold().unwrap_or(Fold::One),
            exec: Exec::default(),
        })
    }

    pub fn fold(&self) -> Option<Fold> {
        match self.experiment.kind {
            KindName::StepEvolution => self.experiment.step_kind.fold(),
            k => k.fold(),
        }
    }

    pub fn oracle_options(&self) -> OracleOptions {
        OracleOptions {
            cutoff: self.oracle.cutoff,
            quadrature_order: self.oracle.quadrature_order,
            leak_bound: self.oracle.leak_bound,
            max_dim: self.oracle.max_dim,
        }
    }
}
