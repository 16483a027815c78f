//! Experiment presets: gate scans over the walk output, HOM visibility and
//! step-by-step evolution.
//!
//! Inputs are fixed by the setup: the attenuated coherent state enters
//! `|V,t_1>` and the pair-source signal enters `|H,t_1>`, with its idler on
//! the herald detector. Every scan point is an independent gate setting.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use crate::detection::{
    build_layout, heralded_with, ClickEvent, DetectorLayout, GateSpec, NoClickTable, BUCKET, GATE_A, GATE_B,
};
use crate::error::{Error, Result};
use crate::fock::{FockOracle, LabelSets, OracleOptions, OracleSetup};
use crate::gaussian::{prepare, GaussianState, ModeLabel, SourceSpec};
use crate::par::{try_map_ordered, Exec};
use crate::walk::{
    sector_extend, walk_unitary, LayerParams, ModeIndex, Polarization, WalkConfig, DEFAULT_CRYSTAL_TRANSMISSION,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    OneFold,
    TwoFold,
    ThreeFoldPartial,
    HomScan,
    StepEvolution,
}

/// Scan shape shared by the fold experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fold {
    One,
    Two,
    ThreePartial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairSource {
    #[default]
    Tmsv,
    /// Classical stand-in with the same marginals.
    Squashed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub walk: WalkConfig,
    pub mu_alpha: f64,
    pub mu_xi: f64,
    pub overlap: f64,
    pub coherent_phase: f64,
    pub eta_kerr: f64,
    pub eta_idler: f64,
    pub eta_sys: f64,
    pub heralded: bool,
    pub pair_source: PairSource,
    pub kind: ExperimentKind,
    /// Fold run at each prefix by `StepEvolution`.
    pub step_fold: Fold,
    pub exec: Exec,
}

impl ExperimentSpec {
    /// Source and detector parameters of the setup on an `n`-step walk of
    /// balanced coins with lossy crystals.
    pub fn setup_defaults(n_steps: usize, kind: ExperimentKind) -> Self {
        let layer = LayerParams::new(FRAC_PI_2, 0.0, DEFAULT_CRYSTAL_TRANSMISSION).expect("valid");
        Self {
            walk: WalkConfig::uniform(n_steps, layer).expect("valid"),
            mu_alpha: 0.1,
            mu_xi: 0.026,
            overlap: 0.7,
            coherent_phase: 0.0,
            eta_kerr: 0.97,
            eta_idler: 1.0,
            eta_sys: 1.0,
            heralded: true,
            pair_source: PairSource::Tmsv,
            kind,
            step_fold: Fold::One,
            exec: Exec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mu_alpha", self.mu_alpha), ("mu_xi", self.mu_xi)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} = {v} must be finite and >= 0")));
            }
        }
        if !(0.0..=1.0).contains(&self.overlap) {
            return Err(Error::InvalidConfig(format!("overlap {} outside [0, 1]", self.overlap)));
        }
        for eta in [self.eta_kerr, self.eta_idler, self.eta_sys] {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::EtaOutOfRange(eta));
            }
        }
        let needs_pairs = match self.kind {
            ExperimentKind::TwoFold | ExperimentKind::ThreeFoldPartial => true,
            ExperimentKind::StepEvolution => self.step_fold != Fold::One,
            _ => false,
        };
        if needs_pairs && self.walk.n_steps() < 1 {
            return Err(Error::InvalidConfig("pair scans need at least one step (two bins)".into()));
        }
        Ok(())
    }

    pub fn with_walk(&self, walk: WalkConfig) -> Self {
        Self { walk, ..self.clone() }
    }
}

pub fn sources_for(spec: &ExperimentSpec) -> Vec<SourceSpec> {
    let pair = match spec.pair_source {
        PairSource::Tmsv => SourceSpec::tmsv(ModeIndex::h(1), spec.mu_xi),
        PairSource::Squashed => SourceSpec::squashed(ModeIndex::h(1), spec.mu_xi),
    };
    vec![
        SourceSpec::coherent(ModeIndex::v(1), spec.mu_alpha, spec.coherent_phase, spec.overlap),
        pair,
    ]
}

/// Outcome descriptor of one scan point. Bins are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Bin(usize),
    Pair(usize, usize),
    /// Gated pair plus the bucket over every other bin.
    Triple(usize, usize),
}

impl Label {
    pub fn fields(&self) -> Vec<usize> {
        match *self {
            Label::Bin(m) => vec![m],
            Label::Pair(a, b) | Label::Triple(a, b) => vec![a, b],
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Bin(m) => write!(f, "t{m}"),
            Label::Pair(a, b) => write!(f, "(t{a},t{b})"),
            Label::Triple(a, b) => write!(f, "(t{a},t{b},[rest])"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    RawPattern,
    NormalizedOverOutcomes,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub labels: Vec<Label>,
    pub probs: Vec<f64>,
    /// Click probability of each scan point before normalization (conditioned
    /// on the herald when heralded).
    pub raw: Vec<f64>,
    pub normalization: Normalization,
    /// Every raw probability was zero, so `probs` are all zero.
    pub normalization_undefined: bool,
}

impl Distribution {
    pub fn normalized(labels: Vec<Label>, raw: Vec<f64>) -> Self {
        let total: f64 = raw.iter().sum();
        let undefined = total <= 0.0;
        let probs = if undefined {
            vec![0.0; raw.len()]
        } else {
            raw.iter().map(|p| p / total).collect()
        };
        Self {
            labels,
            probs,
            raw,
            normalization: Normalization::NormalizedOverOutcomes,
            normalization_undefined: undefined,
        }
    }

    pub fn raw_only(labels: Vec<Label>, raw: Vec<f64>) -> Self {
        Self {
            labels,
            probs: raw.clone(),
            raw,
            normalization: Normalization::RawPattern,
            normalization_undefined: false,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn max_prob(&self) -> f64 {
        self.probs.iter().copied().fold(0.0, f64::max)
    }

    pub fn get(&self, label: Label) -> Option<f64> {
        self.labels.iter().position(|&l| l == label).map(|i| self.probs[i])
    }
}

/// State after sources, losses and the walk, reduced to the modes any
/// detector can see: H walk modes (V too when `keep_v`) and idlers.
pub fn propagate(spec: &ExperimentSpec, keep_v: bool) -> Result<GaussianState> {
    spec.validate()?;
    let registry = spec.walk.registry();
    let state = prepare(&sources_for(spec), &registry)?;
    let walk_idx: Vec<usize> = (0..registry.len()).collect();
    let idlers: Vec<usize> = (registry.len()..state.n_modes()).collect();
    let state = state
        .apply_loss(&walk_idx, spec.walk.total_transmission() * spec.eta_sys)?
        .apply_loss(&idlers, spec.eta_idler)?;
    let u = sector_extend(&walk_unitary(&spec.walk));
    let state = state.apply_passive_on(&walk_idx, &u)?;
    let kept: Vec<usize> = state
        .modes()
        .iter()
        .enumerate()
        .filter(|(_, m)| match m {
            ModeLabel::Walk(w) => keep_v || w.pol == Polarization::H,
            _ => true,
        })
        .map(|(i, _)| i)
        .collect();
    state.reduce(&kept)
}

/// Gate settings and the detectors that must click for one scan point.
fn scan_point(fold: Fold, label: Label, eta: f64) -> (Vec<GateSpec>, Vec<usize>) {
    match (fold, label) {
        (Fold::One, Label::Bin(m)) => (vec![GateSpec::off(), GateSpec::at(m, eta)], vec![GATE_B]),
        (Fold::Two, Label::Pair(a, b)) => (vec![GateSpec::at(a, eta), GateSpec::at(b, eta)], vec![GATE_A, GATE_B]),
        (Fold::ThreePartial, Label::Triple(a, b)) => (
            vec![GateSpec::at(a, eta), GateSpec::at(b, eta)],
            vec![GATE_A, GATE_B, BUCKET],
        ),
        _ => unreachable!("label shape matches fold"),
    }
}

pub fn scan_labels(fold: Fold, bins: usize) -> Vec<Label> {
    let pairs = || (1..=bins).flat_map(move |a| (a + 1..=bins).map(move |b| (a, b)));
    match fold {
        Fold::One => (1..=bins).map(Label::Bin).collect(),
        Fold::Two => pairs().map(|(a, b)| Label::Pair(a, b)).collect(),
        Fold::ThreePartial => pairs().map(|(a, b)| Label::Triple(a, b)).collect(),
    }
}

/// Raw (herald-conditioned when `heralded`) probability of an event.
fn event_probability(table: &mut NoClickTable<'_>, clicks: &[usize], heralded: bool) -> Result<f64> {
    let event = ClickEvent::clicks(4, clicks);
    if heralded {
        heralded_with(table, &event)
    } else {
        table.event_prob(&event)
    }
}

fn run_fold(spec: &ExperimentSpec, fold: Fold) -> Result<Distribution> {
    let state = propagate(spec, false)?;
    let labels = scan_labels(fold, spec.walk.n_steps() + 1);
    let raw = try_map_ordered(spec.exec, &labels, |&label| {
        let (gates, clicks) = scan_point(fold, label, spec.eta_kerr);
        let (routed, layout) = build_layout(&state, &gates)?;
        let mut table = NoClickTable::new(&routed, &layout)?;
        event_probability(&mut table, &clicks, spec.heralded)
    })?;
    Ok(Distribution::normalized(labels, raw))
}

pub fn run_one_fold(spec: &ExperimentSpec) -> Result<Distribution> {
    run_fold(spec, Fold::One)
}

pub fn run_two_fold(spec: &ExperimentSpec) -> Result<Distribution> {
    run_fold(spec, Fold::Two)
}

pub fn run_three_fold_partial(spec: &ExperimentSpec) -> Result<Distribution> {
    run_fold(spec, Fold::ThreePartial)
}

pub fn run_fold_kind(spec: &ExperimentSpec, fold: Fold) -> Result<Distribution> {
    spec.validate()?;
    run_fold(spec, fold)
}

/// Distributions for every walk prefix `1..=n_max`.
pub fn step_evolution(spec: &ExperimentSpec, n_max: usize) -> Result<Vec<Distribution>> {
    if n_max > spec.walk.n_steps() {
        return Err(Error::InvalidConfig(format!(
            "n_max = {} exceeds the {}-step walk",
            n_max,
            spec.walk.n_steps()
        )));
    }
    (1..=n_max)
        .map(|n| run_fold(&spec.with_walk(spec.walk.prefix(n)?), spec.step_fold))
        .collect()
}

/// All 16 click patterns of the standard detectors for one gate setting,
/// indexed by [`crate::detection::ClickPattern::bits`].
pub fn pattern_table(spec: &ExperimentSpec, gates: &[GateSpec]) -> Result<Vec<f64>> {
    let state = propagate(spec, false)?;
    let (routed, layout) = build_layout(&state, gates)?;
    crate::detection::all_pattern_probs(&routed, &layout)
}

/// Gate settings visited by a fold scan.
pub fn scan_gates(spec: &ExperimentSpec, fold: Fold) -> Vec<Vec<GateSpec>> {
    scan_labels(fold, spec.walk.n_steps() + 1)
        .into_iter()
        .map(|l| scan_point(fold, l, spec.eta_kerr).0)
        .collect()
}

// ---------------------------------------------------------------------------
// Hong–Ou–Mandel

/// One balanced layer with the configured crystal transmission.
pub fn hom_walk(spec: &ExperimentSpec) -> WalkConfig {
    let t = spec
        .walk
        .layers()
        .first()
        .map_or(DEFAULT_CRYSTAL_TRANSMISSION, |l| l.transmission);
    WalkConfig::uniform(1, LayerParams::new(FRAC_PI_2, 0.0, t).expect("valid layer")).expect("valid walk")
}

/// Herald, H output arm, V output arm.
fn hom_layout(state: &GaussianState) -> Result<DetectorLayout> {
    let mut sets = vec![Vec::new(); 3];
    for (i, m) in state.modes().iter().enumerate() {
        match m {
            ModeLabel::Idler(_) => sets[0].push(i),
            ModeLabel::Walk(w) if w.pol == Polarization::H => sets[1].push(i),
            ModeLabel::Walk(_) => sets[2].push(i),
            ModeLabel::Routing { .. } => {}
        }
    }
    DetectorLayout::new(sets)
}

/// Herald-conditioned coincidence between the two polarization arms after a
/// single balanced coin, with the gates off.
pub fn hom_coincidence(spec: &ExperimentSpec, overlap: f64) -> Result<f64> {
    let s = ExperimentSpec {
        overlap,
        walk: hom_walk(spec),
        ..spec.clone()
    };
    let state = propagate(&s, true)?;
    let layout = hom_layout(&state)?;
    let mut table = NoClickTable::new(&state, &layout)?;
    heralded_with(&mut table, &ClickEvent::any(3).with(1, true).with(2, true))
}

/// `(C(0) − C(o)) / C(0)`.
pub fn hom_visibility(spec: &ExperimentSpec, overlap: f64) -> Result<f64> {
    let c_dist = hom_coincidence(spec, 0.0)?;
    if c_dist <= 0.0 {
        return Err(Error::NumericalInstability("zero distinguishable coincidence rate".into()));
    }
    Ok((c_dist - hom_coincidence(spec, overlap)?) / c_dist)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomPoint {
    pub overlap: f64,
    pub coincidence: f64,
    pub visibility: f64,
}

pub fn hom_scan(spec: &ExperimentSpec, overlaps: &[f64]) -> Result<Vec<HomPoint>> {
    let c_dist = hom_coincidence(spec, 0.0)?;
    if c_dist <= 0.0 {
        return Err(Error::NumericalInstability("zero distinguishable coincidence rate".into()));
    }
    try_map_ordered(spec.exec, overlaps, |&o| {
        let c = hom_coincidence(spec, o)?;
        Ok(HomPoint {
            overlap: o,
            coincidence: c,
            visibility: (c_dist - c) / c_dist,
        })
    })
}

/// Overlap at which the simulated visibility equals `target`, by bisection
/// to `|V − target| < tol`. Visibility grows monotonically with overlap.
pub fn fit_overlap(spec: &ExperimentSpec, target: f64, tol: f64) -> Result<f64> {
    let c_dist = hom_coincidence(spec, 0.0)?;
    if c_dist <= 0.0 {
        return Err(Error::NumericalInstability("zero distinguishable coincidence rate".into()));
    }
    let vis = |o: f64| hom_coincidence(spec, o).map(|c| (c_dist - c) / c_dist);
    let v_max = vis(1.0)?;
    if !(target > 0.0 && target <= v_max) {
        return Err(Error::FitNoSolution { target, max: v_max });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = vis(mid)?;
        if (v - target).abs() < tol {
            return Ok(mid);
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

// ---------------------------------------------------------------------------
// Oracle cross-check

/// Sources, walk and losses of `spec` for the Fock oracle.
pub fn oracle_setup(spec: &ExperimentSpec) -> OracleSetup {
    OracleSetup {
        sources: sources_for(spec),
        walk: spec.walk.clone(),
        eta_sys: spec.eta_sys,
        eta_idler: spec.eta_idler,
    }
}

/// Largest `|Gaussian − Fock|` over all 16 patterns of every gate setting
/// the fold scan visits.
pub fn oracle_deviation(spec: &ExperimentSpec, fold: Fold, opts: &OracleOptions) -> Result<f64> {
    let oracle = FockOracle::new(&oracle_setup(spec), opts)?;
    let state = propagate(spec, false)?;
    let gate_sets = scan_gates(spec, fold);
    let devs = try_map_ordered(spec.exec, &gate_sets, |gates| {
        let (routed, layout) = build_layout(&state, gates)?;
        let gaussian = crate::detection::all_pattern_probs(&routed, &layout)?;
        let fock = oracle.pattern_probs(gates)?;
        Ok::<f64, Error>(gaussian
            .iter()
            .zip(&fock)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    })?;
    Ok(devs.into_iter().fold(0.0, f64::max))
}

/// HOM coincidence from the Fock oracle, same event as [`hom_coincidence`].
pub fn hom_coincidence_oracle(spec: &ExperimentSpec, overlap: f64, opts: &OracleOptions) -> Result<f64> {
    let s = ExperimentSpec {
        overlap,
        walk: hom_walk(spec),
        ..spec.clone()
    };
    let oracle = FockOracle::new(&oracle_setup(&s), opts)?;
    hom_coincidence_from(&oracle, true)
}

/// Arm coincidence computed by an oracle; conditioned on the herald when
/// `heralded`.
pub fn hom_coincidence_from(oracle: &FockOracle, heralded: bool) -> Result<f64> {
    let (labels, w) = oracle.routed(&[])?;
    let pick = |f: &dyn Fn(&ModeLabel) -> bool| labels.iter().copied().filter(|l| f(l)).collect::<Vec<_>>();
    let sets: LabelSets = vec![
        pick(&|l| matches!(l, ModeLabel::Idler(_))),
        pick(&|l| matches!(l, ModeLabel::Walk(m) if m.pol == Polarization::H)),
        pick(&|l| matches!(l, ModeLabel::Walk(m) if m.pol == Polarization::V)),
    ];
    let p = oracle.pattern_probs_for(&labels, &w, &sets)?;
    let (arms, herald) = (0b110usize, 0b001usize);
    if !heralded {
        return Ok(p[arms] + p[arms | herald]);
    }
    let herald_rate: f64 = (0..8).filter(|b| b & herald != 0).map(|b| p[b]).sum();
    if herald_rate <= 1e-300 {
        return Err(Error::ZeroHeraldRate);
    }
    Ok(p[arms | herald] / herald_rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ideal(n: usize) -> ExperimentSpec {
        ExperimentSpec {
            walk: WalkConfig::balanced(n),
            mu_alpha: 0.0,
            overlap: 1.0,
            eta_kerr: 1.0,
            ..ExperimentSpec::setup_defaults(n, ExperimentKind::OneFold)
        }
    }

    #[test]
    fn nothing_happened_yet() {
        let d = run_one_fold(&ideal(0)).unwrap();
        assert_eq!(d.labels, vec![Label::Bin(1)]);
        assert!((d.probs[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_step_discards_v() {
        let d = run_one_fold(&ideal(1)).unwrap();
        assert!((d.get(Label::Bin(1)).unwrap() - 1.0).abs() < 1e-9);
        assert!(d.get(Label::Bin(2)).unwrap() < 1e-9);
    }

    #[test]
    fn vacuum_pairs_are_undefined() {
        let spec = ExperimentSpec {
            mu_alpha: 0.0,
            mu_xi: 0.0,
            heralded: false,
            ..ExperimentSpec::setup_defaults(2, ExperimentKind::TwoFold)
        };
        let d = run_two_fold(&spec).unwrap();
        assert!(d.normalization_undefined);
        assert!(d.probs.iter().all(|&p| p == 0.0));
        let heralded = ExperimentSpec { heralded: true, ..spec };
        assert_eq!(run_two_fold(&heralded), Err(Error::ZeroHeraldRate));
    }

    #[test]
    fn labels_and_normalization() {
        let spec = ExperimentSpec::setup_defaults(3, ExperimentKind::TwoFold);
        let d = run_two_fold(&spec).unwrap();
        assert_eq!(d.len(), 6);
        assert_eq!(d.labels[0], Label::Pair(1, 2));
        assert!((d.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let t = run_three_fold_partial(&spec).unwrap();
        assert_eq!(t.labels[5], Label::Triple(3, 4));
    }

    #[test]
    fn hom_limits() {
        let spec = ExperimentSpec::setup_defaults(1, ExperimentKind::HomScan);
        assert!(hom_visibility(&spec, 0.0).unwrap().abs() < 1e-15);
        let v1 = hom_visibility(&spec, 1.0).unwrap();
        assert!(v1 > 0.0 && v1 < 1.0);
    }
}
