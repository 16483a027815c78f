use std::collections::BTreeMap;

use num_complex::Complex64;

use super::basis::{compositions, occupation_factorial, sector_dim, Occupation};
use super::permanent::permanent_multiset;
use crate::error::{Error, Result};
use crate::linalg::{unitarity_deviation, CMatrix};

/// Truncation leak tolerated by default before an evolution is refused.
pub const DEFAULT_LEAK_BOUND: f64 = 1e-8;

const NORM_SLACK: f64 = 1e-9;

/// Pure state on `n_modes` modes, sparse over occupations with at most
/// `cutoff` photons in total.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    n_modes: usize,
    cutoff: usize,
    amps: BTreeMap<Occupation, Complex64>,
}

impl FockState {
    pub fn vacuum(n_modes: usize, cutoff: usize) -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(vec![0; n_modes], Complex64::new(1.0, 0.0));
        Self {
            n_modes,
            cutoff,
            amps,
        }
    }

    /// Terms above the cutoff are dropped and show up as truncation leak.
    pub fn from_terms<I>(n_modes: usize, cutoff: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Occupation, Complex64)>,
    {
        let mut amps = BTreeMap::new();
        for (occ, a) in terms {
            if occ.len() != n_modes {
                return Err(Error::DimensionMismatch {
                    expected: n_modes,
                    got: occ.len(),
                });
            }
            if total(&occ) <= cutoff && a != Complex64::new(0.0, 0.0) {
                *amps.entry(occ).or_insert(Complex64::new(0.0, 0.0)) += a;
            }
        }
        let s = Self {
            n_modes,
            cutoff,
            amps,
        };
        if s.norm_sqr() > 1.0 + NORM_SLACK {
            return Err(Error::NotNormalized(s.norm_sqr()));
        }
        Ok(s)
    }

    /// `|n>` for a single occupation.
    pub fn basis(occ: Occupation, cutoff: usize) -> Result<Self> {
        let n = occ.len();
        if total(&occ) > cutoff {
            return Err(Error::CutoffTooSmall {
                cutoff,
                leak: 1.0,
                bound: 0.0,
            });
        }
        Self::from_terms(n, cutoff, [(occ, Complex64::new(1.0, 0.0))])
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn amplitude(&self, occ: &[u16]) -> Complex64 {
        self.amps.get(occ).copied().unwrap_or_default()
    }

    pub fn probability(&self, occ: &[u16]) -> f64 {
        self.amplitude(occ).norm_sqr()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.amps.iter()
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    /// `1 − ‖ψ‖²`, the weight lost to truncation.
    pub fn truncation_leak(&self) -> f64 {
        (1.0 - self.norm_sqr()).max(0.0)
    }

    pub fn max_photons(&self) -> usize {
        self.amps.keys().map(|o| total(o)).max().unwrap_or(0)
    }

    /// `|ψ>|φ>`, truncated at the sum of the cutoffs unless `cutoff` is given.
    pub fn tensor(&self, other: &FockState, cutoff: Option<usize>) -> FockState {
        let cutoff = cutoff.unwrap_or(self.cutoff + other.cutoff);
        let mut amps = BTreeMap::new();
        for (a, x) in &self.amps {
            for (b, y) in &other.amps {
                if total(a) + total(b) > cutoff {
                    continue;
                }
                let mut occ = a.clone();
                occ.extend_from_slice(b);
                amps.insert(occ, x * y);
            }
        }
        FockState {
            n_modes: self.n_modes + other.n_modes,
            cutoff,
            amps,
        }
    }

    /// Probability that none of `modes` holds a photon.
    pub fn no_click_prob(&self, modes: &[usize]) -> f64 {
        self.amps
            .iter()
            .filter(|(o, _)| modes.iter().all(|&m| o[m] == 0))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

pub(crate) fn total(occ: &[u16]) -> usize {
    occ.iter().map(|&n| n as usize).sum()
}

/// Convex mixture of pure Fock states on a common mode set.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedFockState {
    pub ensemble: Vec<(f64, FockState)>,
}

impl MixedFockState {
    pub fn pure(state: FockState) -> Self {
        Self {
            ensemble: vec![(1.0, state)],
        }
    }

    pub fn new(ensemble: Vec<(f64, FockState)>) -> Result<Self> {
        let m = Self { ensemble };
        m.validate()?;
        Ok(m)
    }

    /// Weights nonnegative and summing to one.
    pub fn validate(&self) -> Result<()> {
        if self.ensemble.iter().any(|(w, _)| !(*w >= 0.0)) {
            return Err(Error::NotNormalized(f64::NAN));
        }
        let n = self.ensemble.first().map(|(_, s)| s.n_modes());
        if self.ensemble.iter().any(|(_, s)| Some(s.n_modes()) != n) {
            return Err(Error::InvalidConfig("ensemble members on different mode sets".into()));
        }
        let sum: f64 = self.ensemble.iter().map(|(w, _)| w).sum();
        if (sum - 1.0).abs() > NORM_SLACK {
            return Err(Error::NotNormalized(sum));
        }
        Ok(())
    }

    pub fn n_modes(&self) -> usize {
        self.ensemble.first().map_or(0, |(_, s)| s.n_modes())
    }

    pub fn trace(&self) -> f64 {
        self.ensemble.iter().map(|(w, s)| w * s.norm_sqr()).sum()
    }

    pub fn truncation_leak(&self) -> f64 {
        (1.0 - self.trace()).max(0.0)
    }

    /// Diagonal of the density matrix.
    pub fn probability(&self, occ: &[u16]) -> f64 {
        self.ensemble.iter().map(|(w, s)| w * s.probability(occ)).sum()
    }

    pub fn tensor(&self, other: &MixedFockState, cutoff: usize) -> MixedFockState {
        let mut ensemble = Vec::with_capacity(self.ensemble.len() * other.ensemble.len());
        for (w1, s1) in &self.ensemble {
            for (w2, s2) in &other.ensemble {
                ensemble.push((w1 * w2, s1.tensor(s2, Some(cutoff))));
            }
        }
        MixedFockState { ensemble }
    }

    pub fn no_click_prob(&self, modes: &[usize]) -> f64 {
        self.ensemble.iter().map(|(w, s)| w * s.no_click_prob(modes)).sum()
    }
}

fn check_evolution(state: &FockState, u: &CMatrix, leak_bound: f64) -> Result<()> {
    if u.nrows() != state.n_modes || u.ncols() != state.n_modes {
        return Err(Error::DimensionMismatch {
            expected: state.n_modes,
            got: u.nrows(),
        });
    }
    let dev = unitarity_deviation(u);
    if dev > 1e-10 {
        return Err(Error::NonUnitary { deviation: dev });
    }
    let leak = state.truncation_leak();
    if leak > leak_bound {
        return Err(Error::CutoffTooSmall {
            cutoff: state.cutoff,
            leak,
            bound: leak_bound,
        });
    }
    Ok(())
}

/// Apply `a†_j -> Σ_i U_ij a†_i` by expanding the creation-operator
/// products of every input term.
pub fn evolve(state: &FockState, u: &CMatrix, leak_bound: f64) -> Result<FockState> {
    check_evolution(state, u, leak_bound)?;
    let m = state.n_modes;
    let mut out: BTreeMap<Occupation, Complex64> = BTreeMap::new();
    for (occ, &amp) in &state.amps {
        let mut poly: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        poly.insert(vec![0; m], amp / occupation_factorial(occ).sqrt());
        for (j, &nj) in occ.iter().enumerate() {
            for _ in 0..nj {
                let mut next = BTreeMap::new();
                for (mono, v) in &poly {
                    for i in 0..m {
                        let uij = u[(i, j)];
                        if uij == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        let mut raised = mono.clone();
                        raised[i] += 1;
                        *next.entry(raised).or_insert(Complex64::new(0.0, 0.0)) += uij * v;
                    }
                }
                poly = next;
            }
        }
        for (mono, v) in poly {
            let a = v * occupation_factorial(&mono).sqrt();
            *out.entry(mono).or_insert(Complex64::new(0.0, 0.0)) += a;
        }
    }
    out.retain(|_, a| a.norm_sqr() > 0.0);
    Ok(FockState {
        n_modes: m,
        cutoff: state.cutoff,
        amps: out,
    })
}

/// `<out| Û |in>` for equal photon numbers:
/// `perm(U[out, in]) / √(Π out! Π in!)`.
pub fn transition_amplitude(u: &CMatrix, input: &[u16], output: &[u16]) -> Complex64 {
    if total(input) != total(output) {
        return Complex64::new(0.0, 0.0);
    }
    let rows: Vec<usize> = output.iter().map(|&n| n as usize).collect();
    let cols: Vec<usize> = input.iter().map(|&n| n as usize).collect();
    let norm = (occupation_factorial(input) * occupation_factorial(output)).sqrt();
    permanent_multiset(u, &rows, &cols) / norm
}

/// Same map as [`evolve`], computed output by output from permanents.
/// Refuses when a photon-number sector exceeds `max_dim` outputs.
pub fn evolve_by_permanents(
    state: &FockState,
    u: &CMatrix,
    leak_bound: f64,
    max_dim: usize,
) -> Result<FockState> {
    check_evolution(state, u, leak_bound)?;
    let m = state.n_modes;
    let mut by_k: BTreeMap<usize, Vec<(&Occupation, Complex64)>> = BTreeMap::new();
    for (occ, &a) in &state.amps {
        by_k.entry(total(occ)).or_default().push((occ, a));
    }
    let mut amps = BTreeMap::new();
    for (k, inputs) in by_k {
        let dim = sector_dim(k, m);
        if dim > max_dim {
            return Err(Error::ResourceBound { dim, cap: max_dim });
        }
        for out in compositions(k, m) {
            let a: Complex64 = inputs
                .iter()
                .map(|(inp, amp)| amp * transition_amplitude(u, inp, &out))
                .sum();
            if a.norm_sqr() > 0.0 {
                amps.insert(out, a);
            }
        }
    }
    Ok(FockState {
        n_modes: m,
        cutoff: state.cutoff,
        amps,
    })
}
