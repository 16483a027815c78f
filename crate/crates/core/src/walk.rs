//! Single-particle time-bin walk: coin, shift and the composed walk unitary.
//!
//! Mode basis is polarization ⊗ time bin, flattened pol-major:
//! `index = pol * B + (bin - 1)` within one distinguishability sector, and
//! `sector * 2B + ...` once the sectors are doubled by [`sector_extend`].
//! A matrix column is the image of the corresponding input mode, so
//! `a†_j -> Σ_i U_ij a†_i`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};

/// Per-crystal intensity transmission for a −0.045 dB insertion loss.
pub const DEFAULT_CRYSTAL_TRANSMISSION: f64 = 0.989_691_863_869_102_9;

/// Time-bin spacing in picoseconds. Informational only.
pub const BIN_SPACING_PS: f64 = 4.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    fn offset(self) -> usize {
        match self {
            Polarization::H => 0,
            Polarization::V => 1,
        }
    }
}

/// A walk mode: polarization, 1-based time bin, distinguishability sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex {
    pub pol: Polarization,
    pub bin: usize,
    /// 0 = interfering, 1 = orthogonal copy.
    pub sector: u8,
}

impl ModeIndex {
    pub fn new(pol: Polarization, bin: usize, sector: u8) -> Self {
        Self { pol, bin, sector }
    }

    pub fn h(bin: usize) -> Self {
        Self::new(Polarization::H, bin, 0)
    }

    pub fn v(bin: usize) -> Self {
        Self::new(Polarization::V, bin, 0)
    }

    pub fn in_sector(self, sector: u8) -> Self {
        Self { sector, ..self }
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{:?},t{}>s{}", self.pol, self.bin, self.sector)
    }
}

/// Bijection between [`ModeIndex`] and flat indices for a bin capacity `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeRegistry {
    bins: usize,
}

impl ModeRegistry {
    pub fn new(bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidConfig("bin capacity must be at least 1".into()));
        }
        Ok(Self { bins })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    /// Modes in one sector (2B).
    pub fn sector_len(&self) -> usize {
        2 * self.bins
    }

    /// Modes across both sectors (4B).
    pub fn len(&self) -> usize {
        4 * self.bins
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn flatten(&self, m: ModeIndex) -> Result<usize> {
        if m.bin == 0 || m.bin > self.bins || m.sector > 1 {
            return Err(Error::IndexOutOfRange {
                index: m.bin,
                len: self.bins,
            });
        }
        Ok(m.sector as usize * self.sector_len() + m.pol.offset() * self.bins + (m.bin - 1))
    }

    pub fn unflatten(&self, i: usize) -> Result<ModeIndex> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange { index: i, len: self.len() });
        }
        let sector = (i / self.sector_len()) as u8;
        let r = i % self.sector_len();
        let pol = if r < self.bins { Polarization::H } else { Polarization::V };
        Ok(ModeIndex::new(pol, r % self.bins + 1, sector))
    }

    /// All modes in flat order.
    pub fn modes(&self) -> impl Iterator<Item = ModeIndex> + '_ {
        (0..self.len()).map(move |i| self.unflatten(i).expect("in range"))
    }
}

/// Coin angles and crystal transmission of one walk layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerParams {
    pub omega: f64,
    pub gamma: f64,
    pub transmission: f64,
}

impl Default for LayerParams {
    fn default() -> Self {
        Self::balanced()
    }
}

impl LayerParams {
    pub fn new(omega: f64, gamma: f64, transmission: f64) -> Result<Self> {
        let p = Self {
            omega,
            gamma,
            transmission,
        };
        p.validate()?;
        Ok(p)
    }

    /// 50:50 time-domain splitter, Ω = π/2, γ = 0, default crystal loss.
    pub fn balanced() -> Self {
        Self {
            omega: FRAC_PI_2,
            gamma: 0.0,
            transmission: DEFAULT_CRYSTAL_TRANSMISSION,
        }
    }

    pub fn lossless(omega: f64, gamma: f64) -> Self {
        Self {
            omega,
            gamma,
            transmission: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.omega.is_finite() || !self.gamma.is_finite() {
            return Err(Error::InvalidConfig("coin angles must be finite".into()));
        }
        if !(self.transmission > 0.0 && self.transmission <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "crystal transmission {} outside (0, 1]",
                self.transmission
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkConfig {
    layers: Vec<LayerParams>,
    bin_capacity: usize,
}

impl WalkConfig {
    /// Walk with `B = N + 1` bins.
    pub fn new(layers: Vec<LayerParams>) -> Result<Self> {
        let b = layers.len() + 1;
        Self::with_capacity(layers, b)
    }

    pub fn with_capacity(layers: Vec<LayerParams>, bin_capacity: usize) -> Result<Self> {
        for l in &layers {
            l.validate()?;
        }
        if bin_capacity < layers.len() + 1 {
            return Err(Error::InvalidConfig(format!(
                "bin capacity {} < N + 1 = {}",
                bin_capacity,
                layers.len() + 1
            )));
        }
        Ok(Self {
            layers,
            bin_capacity,
        })
    }

    pub fn uniform(n_steps: usize, layer: LayerParams) -> Result<Self> {
        Self::new(vec![layer; n_steps])
    }

    pub fn balanced(n_steps: usize) -> Self {
        Self::uniform(n_steps, LayerParams::balanced()).expect("balanced layers are valid")
    }

    pub fn n_steps(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[LayerParams] {
        &self.layers
    }

    pub fn bin_capacity(&self) -> usize {
        self.bin_capacity
    }

    pub fn registry(&self) -> ModeRegistry {
        ModeRegistry {
            bins: self.bin_capacity,
        }
    }

    /// First `n` layers with capacity `n + 1`.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n > self.layers.len() {
            return Err(Error::InvalidConfig(format!(
                "prefix of {} steps requested from a {}-step walk",
                n,
                self.layers.len()
            )));
        }
        Self::new(self.layers[..n].to_vec())
    }

    /// Product of crystal transmissions. Uniform loss commutes with the
    /// passive walk, so this single factor replaces the per-layer channels.
    pub fn total_transmission(&self) -> f64 {
        self.layers.iter().map(|l| l.transmission).product()
    }
}

/// `[[cos Ω/2, e^{iγ} sin Ω/2], [e^{-iγ} sin Ω/2, -cos Ω/2]]` on (H, V).
pub fn coin_matrix(layer: &LayerParams) -> CMatrix {
    let (s, co) = (layer.omega / 2.0).sin_cos();
    let e = Complex64::from_polar(1.0, layer.gamma);
    CMatrix::from_row_slice(2, 2, &[c(co, 0.0), e * s, e.conj() * s, c(-co, 0.0)])
}

/// `S · (C ⊗ I_bins)` on the 2B-dimensional single-sector space.
///
/// The shift maps `|V,t_m> -> |V,t_{m+1}>`. The column for `|V,t_B>` wraps to
/// `|V,t_1>` so the matrix stays a permutation; a walker that starts in `t_1`
/// with `B >= N + 1` never reaches it. Use [`apply_step`] to propagate an
/// amplitude vector with the overflow checked.
pub fn step_unitary(layer: &LayerParams, bins: usize) -> Result<CMatrix> {
    if bins == 0 {
        return Err(Error::InvalidConfig("bin capacity must be at least 1".into()));
    }
    let coin = coin_matrix(layer);
    let dim = 2 * bins;
    let mut u = CMatrix::zeros(dim, dim);
    for m in 0..bins {
        for (pin, col_off) in [(0usize, 0usize), (1, bins)] {
            let col = col_off + m;
            // H output stays in bin m.
            u[(m, col)] = coin[(0, pin)];
            // V output moves to bin m + 1 (cyclic at the boundary).
            u[(bins + (m + 1) % bins, col)] = coin[(1, pin)];
        }
    }
    Ok(u)
}

/// Apply one layer to a single-sector amplitude vector, refusing to shift a
/// nonzero V amplitude out of the last bin.
pub fn apply_step(layer: &LayerParams, amps: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    if !amps.len().is_multiple_of(2) || amps.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: amps.len(),
        });
    }
    let bins = amps.len() / 2;
    let coin = coin_matrix(layer);
    let mut out = DVector::from_element(2 * bins, c(0.0, 0.0));
    for m in 0..bins {
        let h = amps[m];
        let v = amps[bins + m];
        let h_out = coin[(0, 0)] * h + coin[(0, 1)] * v;
        let v_out = coin[(1, 0)] * h + coin[(1, 1)] * v;
        out[m] += h_out;
        if m + 1 == bins {
            if v_out.norm() > 1e-15 {
                return Err(Error::OverflowPolicyViolation { bin: bins });
            }
        } else {
            out[bins + m + 1] += v_out;
        }
    }
    Ok(out)
}

/// `U_N ··· U_1` with layer 1 applied first.
pub fn walk_unitary(config: &WalkConfig) -> CMatrix {
    let dim = 2 * config.bin_capacity;
    let mut u = CMatrix::identity(dim, dim);
    for layer in &config.layers {
        let step = step_unitary(layer, config.bin_capacity).expect("capacity validated");
        u = step * u;
    }
    u
}

/// `U ⊕ U`: both distinguishability sectors see the same optics.
pub fn sector_extend(u: &CMatrix) -> CMatrix {
    let n = u.nrows();
    let mut out = CMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(u);
    out.view_mut((n, n), (n, n)).copy_from(u);
    out
}
