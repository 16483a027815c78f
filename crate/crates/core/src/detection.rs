//! Kerr-gate demultiplexing and threshold-detector click statistics.
//!
//! Each enabled gate couples the H modes (both sectors) of its bin into fresh
//! routing modes with a beam splitter of reflectivity `η_K`; the transmitted
//! leakage stays on the bucket path. Click probabilities follow from vacuum
//! overlaps of Gaussian marginals by inclusion–exclusion.


use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, ModeLabel};
use crate::linalg::{beam_splitter, RMatrix};
use crate::walk::{ModeIndex, Polarization};

/// Detector order in every layout built here.
pub const HERALD: usize = 0;
pub const BUCKET: usize = 1;
pub const GATE_A: usize = 2;
pub const GATE_B: usize = 3;

pub const DETECTOR_NAMES: [&str; 4] = ["APD1", "APD2", "APD3", "APD4"];

/// Default Kerr gate efficiency.
pub const DEFAULT_KERR_EFFICIENCY: f64 = 0.97;

/// Below this the herald is treated as never firing.
const MIN_HERALD_RATE: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateSpec {
    pub bin: usize,
    pub efficiency: f64,
    pub enabled: bool,
}

impl GateSpec {
    pub fn at(bin: usize, efficiency: f64) -> Self {
        Self {
            bin,
            efficiency,
            enabled: true,
        }
    }

    pub fn off() -> Self {
        Self {
            bin: 0,
            efficiency: 0.0,
            enabled: false,
        }
    }
}

/// Mode sets (flat indices into the routed state) seen by each detector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectorLayout {
    detectors: Vec<Vec<usize>>,
}

impl DetectorLayout {
    pub fn new(detectors: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for d in &detectors {
            for &m in d {
                if !seen.insert(m) {
                    return Err(Error::InvalidConfig(format!(
                        "mode {m} assigned to two detectors"
                    )));
                }
            }
        }
        Ok(Self { detectors })
    }

    pub fn len(&self) -> usize {
        self.detectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detectors.is_empty()
    }

    pub fn modes(&self, detector: usize) -> &[usize] {
        &self.detectors[detector]
    }

    pub fn detectors(&self) -> &[Vec<usize>] {
        &self.detectors
    }
}

/// Click/no-click outcome of every detector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClickPattern {
    pub clicks: Vec<bool>,
}

impl ClickPattern {
    /// Bit `d` of `bits` is detector `d`.
    pub fn from_bits(bits: usize, len: usize) -> Self {
        Self {
            clicks: (0..len).map(|d| bits >> d & 1 == 1).collect(),
        }
    }

    pub fn bits(&self) -> usize {
        self.clicks
            .iter()
            .enumerate()
            .map(|(d, &c)| (c as usize) << d)
            .sum()
    }

    pub fn all(len: usize) -> impl Iterator<Item = ClickPattern> {
        (0..1usize << len).map(move |b| Self::from_bits(b, len))
    }
}

/// Partial outcome: `None` detectors are marginalized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClickEvent {
    pub outcomes: Vec<Option<bool>>,
}

impl ClickEvent {
    pub fn any(len: usize) -> Self {
        Self {
            outcomes: vec![None; len],
        }
    }

    pub fn with(mut self, detector: usize, click: bool) -> Self {
        self.outcomes[detector] = Some(click);
        self
    }

    pub fn clicks(len: usize, detectors: &[usize]) -> Self {
        detectors.iter().fold(Self::any(len), |e, &d| e.with(d, true))
    }
}

impl From<&ClickPattern> for ClickEvent {
    fn from(p: &ClickPattern) -> Self {
        Self {
            outcomes: p.clicks.iter().map(|&c| Some(c)).collect(),
        }
    }
}

/// Route gated bins to their detectors. `gates[k]` feeds detector
/// `GATE_A + k`; gate 0 is applied first.
pub fn build_layout(state: &GaussianState, gates: &[GateSpec]) -> Result<(GaussianState, DetectorLayout)> {
    if gates.len() > 2 {
        return Err(Error::InvalidConfig(format!("{} gates requested, at most 2", gates.len())));
    }
    let enabled: Vec<(usize, &GateSpec)> = gates.iter().enumerate().filter(|(_, g)| g.enabled).collect();
    for (k, (_, g)) in enabled.iter().enumerate() {
        if !(0.0..=1.0).contains(&g.efficiency) {
            return Err(Error::InvalidConfig(format!(
                "gate efficiency {} outside [0, 1]",
                g.efficiency
            )));
        }
        if enabled[..k].iter().any(|(_, o)| o.bin == g.bin) {
            return Err(Error::DuplicateGateBin(g.bin));
        }
    }

    let mut routed = state.clone();
    for &(slot, g) in &enabled {
        for sector in 0..=1u8 {
            let h = ModeLabel::Walk(ModeIndex::new(Polarization::H, g.bin, sector));
            let hi = routed.index_of(h).ok_or(Error::IndexOutOfRange {
                index: g.bin,
                len: state.n_modes(),
            })?;
            let r = ModeLabel::Routing { slot, sector };
            routed = routed.append_modes(&[r])?;
            let ri = routed.n_modes() - 1;
            routed = routed.apply_passive_on(&[hi, ri], &beam_splitter(g.efficiency))?;
        }
    }

    let mut detectors = vec![Vec::new(); 4];
    for (i, m) in routed.modes().iter().enumerate() {
        match m {
            ModeLabel::Idler(_) => detectors[HERALD].push(i),
            ModeLabel::Walk(w) if w.pol == Polarization::H => detectors[BUCKET].push(i),
            ModeLabel::Walk(_) => {}
            ModeLabel::Routing { slot, .. } => detectors[GATE_A + slot].push(i),
        }
    }
    Ok((routed, DetectorLayout::new(detectors)?))
}

/// Lower-triangular `M` with `I + X = (I + M)(I + M)ᵀ`.
///
/// Factoring the offset from the identity, rather than `I + X` itself, keeps
/// every entry relative to the size of `X`: near vacuum `1 + X_ii` would
/// round away most of `X_ii`.
fn shifted_cholesky(x: &RMatrix) -> Result<RMatrix> {
    let n = x.nrows();
    let mut m = RMatrix::zeros(n, n);
    for i in 0..n {
        let s: f64 = (0..i).map(|k| m[(i, k)] * m[(i, k)]).sum();
        let t = x[(i, i)] - s;
        // L_ii² = 1 + t, so L_ii − 1 = t / (√(1+t) + 1).
        if !(t > -1.0) {
            return Err(Error::SingularMatrix);
        }
        let lii = (1.0 + t).sqrt();
        m[(i, i)] = t / (lii + 1.0);
        for j in i + 1..n {
            let s: f64 = (0..i).map(|k| m[(j, k)] * m[(i, k)]).sum();
            m[(j, i)] = (x[(j, i)] - s) / lii;
        }
    }
    Ok(m)
}

/// `ln P(no photon in modes)` for a Gaussian state.
///
/// With `X = σ − I/2` on the reduced modes, `P₀ = exp(−½ dᵀ(I+X)⁻¹d) / √det(I+X)`.
/// `I + X ⪰ I/2` for any physical state, so the factorization always exists.
pub fn log_no_click_prob(state: &GaussianState, modes: &[usize]) -> Result<f64> {
    if modes.is_empty() {
        return Ok(0.0);
    }
    let sub = state.reduce(modes)?;
    let x = sub.excess();
    let d = sub.mean();
    if x.iter().all(|&v| v == 0.0) {
        return Ok(-0.5 * d.norm_squared());
    }
    let m = shifted_cholesky(x)?;
    let n = x.nrows();
    let log_det: f64 = (0..n).map(|i| 2.0 * m[(i, i)].ln_1p()).sum();
    // dᵀ(LLᵀ)⁻¹d = |L⁻¹d|², forward substitution with L = I + M.
    let mut quad = 0.0;
    if d.iter().any(|&v| v != 0.0) {
        let mut y = vec![0.0; n];
        for i in 0..n {
            let s: f64 = (0..i).map(|k| m[(i, k)] * y[k]).sum();
            y[i] = (d[i] - s) / (1.0 + m[(i, i)]);
            quad += y[i] * y[i];
        }
    }
    let v = -0.5 * quad - 0.5 * log_det;
    if !v.is_finite() {
        return Err(Error::NumericalInstability("non-finite vacuum overlap".into()));
    }
    Ok(v)
}

/// Probability that none of `modes` holds a photon.
pub fn no_click_prob(state: &GaussianState, modes: &[usize]) -> Result<f64> {
    log_no_click_prob(state, modes).map(f64::exp)
}

/// Lazily filled table of `ln P₀` over unions of detector mode sets.
pub struct NoClickTable<'a> {
    state: &'a GaussianState,
    layout: &'a DetectorLayout,
    cache: Vec<Option<f64>>,
}

impl<'a> NoClickTable<'a> {
    pub fn new(state: &'a GaussianState, layout: &'a DetectorLayout) -> Result<Self> {
        if layout.len() > 16 {
            return Err(Error::InvalidConfig("too many detectors".into()));
        }
        for d in layout.detectors() {
            for &m in d {
                if m >= state.n_modes() {
                    return Err(Error::IndexOutOfRange {
                        index: m,
                        len: state.n_modes(),
                    });
                }
            }
        }
        Ok(Self {
            state,
            layout,
            cache: vec![None; 1 << layout.len()],
        })
    }

    /// `ln P₀` over the union of detectors in the bitmask.
    pub fn log_p0(&mut self, mask: usize) -> Result<f64> {
        if let Some(v) = self.cache[mask] {
            return Ok(v);
        }
        let mut modes = Vec::new();
        for d in 0..self.layout.len() {
            if mask >> d & 1 == 1 {
                modes.extend_from_slice(self.layout.modes(d));
            }
        }
        let v = log_no_click_prob(self.state, &modes)?;
        self.cache[mask] = Some(v);
        Ok(v)
    }

    pub fn event_prob(&mut self, event: &ClickEvent) -> Result<f64> {
        if event.outcomes.len() != self.layout.len() {
            return Err(Error::DimensionMismatch {
                expected: self.layout.len(),
                got: event.outcomes.len(),
            });
        }
        let mut quiet = 0usize;
        let mut clicked = Vec::new();
        for (d, o) in event.outcomes.iter().enumerate() {
            match o {
                Some(false) => quiet |= 1 << d,
                Some(true) => clicked.push(d),
                None => {}
            }
        }
        if clicked.is_empty() {
            return Ok(self.log_p0(quiet)?.exp());
        }
        // Σ_T (−1)^|T| P₀(N ∪ T); the constant parts of the exponentials
        // cancel, so sum expm1 to avoid subtracting numbers close to 1.
        let mut sum = 0.0;
        for t in 0..1usize << clicked.len() {
            let mut mask = quiet;
            for (k, &d) in clicked.iter().enumerate() {
                if t >> k & 1 == 1 {
                    mask |= 1 << d;
                }
            }
            let term = self.log_p0(mask)?.exp_m1();
            if t.count_ones() % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
        }
        clamp_probability(sum)
    }
}

fn clamp_probability(p: f64) -> Result<f64> {
    if p < 0.0 {
        if p > -1e-12 {
            return Ok(0.0);
        }
        return Err(Error::NumericalInstability(format!("negative probability {p:.3e}")));
    }
    if p > 1.0 {
        if p < 1.0 + 1e-12 {
            return Ok(1.0);
        }
        return Err(Error::NumericalInstability(format!("probability {p} above one")));
    }
    Ok(p)
}

pub fn event_prob(state: &GaussianState, layout: &DetectorLayout, event: &ClickEvent) -> Result<f64> {
    NoClickTable::new(state, layout)?.event_prob(event)
}

pub fn pattern_prob(state: &GaussianState, layout: &DetectorLayout, pattern: &ClickPattern) -> Result<f64> {
    event_prob(state, layout, &ClickEvent::from(pattern))
}

/// Probabilities of all `2^J` patterns, indexed by [`ClickPattern::bits`].
pub fn all_pattern_probs(state: &GaussianState, layout: &DetectorLayout) -> Result<Vec<f64>> {
    let mut table = NoClickTable::new(state, layout)?;
    ClickPattern::all(layout.len())
        .map(|p| table.event_prob(&ClickEvent::from(&p)))
        .collect()
}

/// `P(rest ∧ herald click) / P(herald click)`. `rest` must leave the herald
/// unconstrained.
pub fn heralded_prob(state: &GaussianState, layout: &DetectorLayout, rest: &ClickEvent) -> Result<f64> {
    let mut table = NoClickTable::new(state, layout)?;
    heralded_with(&mut table, rest)
}

pub(crate) fn heralded_with(table: &mut NoClickTable<'_>, rest: &ClickEvent) -> Result<f64> {
    if rest.outcomes.get(HERALD).copied().flatten().is_some() {
        return Err(Error::InvalidConfig("heralded event must leave APD1 free".into()));
    }
    if table.layout.modes(HERALD).is_empty() {
        return Err(Error::ZeroHeraldRate);
    }
    let len = rest.outcomes.len();
    let herald = table.event_prob(&ClickEvent::any(len).with(HERALD, true))?;
    if herald <= MIN_HERALD_RATE {
        return Err(Error::ZeroHeraldRate);
    }
    let joint = table.event_prob(&rest.clone().with(HERALD, true))?;
    Ok((joint / herald).min(1.0))
}

/// Mean photon number reaching a detector.
pub fn detector_mean_photon(state: &GaussianState, layout: &DetectorLayout, detector: usize) -> f64 {
    layout.modes(detector).iter().map(|&m| state.mean_photon(m)).sum()
}
