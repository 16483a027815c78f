use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DVector;

use super::state::{GaussianState, ModeLabel};
use crate::error::{Error, Result};
use crate::linalg::RMatrix;
use crate::walk::{ModeIndex, ModeRegistry};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Vacuum,
    /// Attenuated coherent state.
    Coherent,
    Thermal,
    /// Two-mode squeezed vacuum; signal in the walk, idler appended.
    Tmsv,
    /// Two-mode squeezed thermal state on the classical boundary: thermal
    /// marginals with cross-correlation `μ·diag(1, −1)`.
    SquashedPair,
    /// Single photon. Only the Fock oracle can represent it.
    Fock1,
}

impl SourceKind {
    pub fn is_pair(self) -> bool {
        matches!(self, SourceKind::Tmsv | SourceKind::SquashedPair)
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSpec {
    pub kind: SourceKind,
    /// Mean photon number μ (of the signal arm for pair sources).
    pub mean_photon: f64,
    /// Coherent-state phase in radians.
    pub phase: f64,
    pub target: ModeIndex,
    /// Squared overlap with sector 0. Coherent sources split their amplitude
    /// between the sector-0 and sector-1 copies of `target` accordingly.
    pub overlap: f64,
}

impl SourceSpec {
    fn base(kind: SourceKind, target: ModeIndex, mean_photon: f64) -> Self {
        Self {
            kind,
            mean_photon,
            phase: 0.0,
            target,
            overlap: 1.0,
        }
    }

    pub fn vacuum(target: ModeIndex) -> Self {
        Self::base(SourceKind::Vacuum, target, 0.0)
    }

    pub fn coherent(target: ModeIndex, mean_photon: f64, phase: f64, overlap: f64) -> Self {
        Self {
            phase,
            overlap,
            ..Self::base(SourceKind::Coherent, target, mean_photon)
        }
    }

    pub fn thermal(target: ModeIndex, mean_photon: f64) -> Self {
        Self::base(SourceKind::Thermal, target, mean_photon)
    }

    pub fn tmsv(target: ModeIndex, mean_photon: f64) -> Self {
        Self::base(SourceKind::Tmsv, target, mean_photon)
    }

    pub fn squashed(target: ModeIndex, mean_photon: f64) -> Self {
        Self::base(SourceKind::SquashedPair, target, mean_photon)
    }

    pub fn fock1(target: ModeIndex) -> Self {
        Self::base(SourceKind::Fock1, target, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean_photon >= 0.0 && self.mean_photon.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "mean photon number {} must be finite and >= 0",
                self.mean_photon
            )));
        }
        if !(0.0..=1.0).contains(&self.overlap) {
            return Err(Error::InvalidConfig(format!("overlap {} outside [0, 1]", self.overlap)));
        }
        if !self.phase.is_finite() {
            return Err(Error::InvalidConfig("coherent phase must be finite".into()));
        }
        Ok(())
    }

    /// Walk modes this source writes to (both sector copies for coherent).
    pub fn occupied_walk_modes(&self) -> Vec<ModeIndex> {
        match self.kind {
            SourceKind::Coherent => vec![self.target.in_sector(0), self.target.in_sector(1)],
            _ => vec![self.target],
        }
    }
}

/// Number of idler modes a source list needs.
pub fn idler_count(sources: &[SourceSpec]) -> usize {
    sources.iter().filter(|s| s.kind.is_pair()).count()
}

/// Reject sources that write to the same mode.
pub fn check_collisions(sources: &[SourceSpec], registry: &ModeRegistry) -> Result<()> {
    let mut seen = BTreeSet::new();
    for s in sources {
        s.validate()?;
        if s.kind == SourceKind::Coherent && s.target.sector != 0 {
            return Err(Error::InvalidConfig("coherent sources target sector 0".into()));
        }
        for m in s.occupied_walk_modes() {
            registry.flatten(m)?;
            if !seen.insert(m) {
                return Err(Error::ModeCollision(m.to_string()));
            }
        }
    }
    Ok(())
}

/// Product of independent Gaussian sources over the walk modes of
/// `registry`; pair sources get idler modes appended in source order.
pub fn prepare(sources: &[SourceSpec], registry: &ModeRegistry) -> Result<GaussianState> {
    check_collisions(sources, registry)?;
    let vac = GaussianState::vacuum_on(registry, idler_count(sources));
    let modes = vac.modes().to_vec();
    let mut mean = DVector::zeros(2 * modes.len());
    let mut excess = RMatrix::zeros(2 * modes.len(), 2 * modes.len());
    let mut next_idler = 0;

    for s in sources {
        let mu = s.mean_photon;
        let target = registry.flatten(s.target)?;
        match s.kind {
            SourceKind::Vacuum => {}
            SourceKind::Fock1 => return Err(Error::UnsupportedSource(s.kind.to_string())),
            SourceKind::Coherent => {
                let alpha = num_complex::Complex64::from_polar(mu.sqrt(), s.phase);
                let s1 = registry.flatten(s.target.in_sector(1))?;
                for (mode, weight) in [(target, s.overlap), (s1, 1.0 - s.overlap)] {
                    let a = alpha * weight.sqrt();
                    mean[2 * mode] = std::f64::consts::SQRT_2 * a.re;
                    mean[2 * mode + 1] = std::f64::consts::SQRT_2 * a.im;
                }
            }
            SourceKind::Thermal => {
                excess[(2 * target, 2 * target)] = mu;
                excess[(2 * target + 1, 2 * target + 1)] = mu;
            }
            SourceKind::Tmsv | SourceKind::SquashedPair => {
                let idler = modes
                    .iter()
                    .position(|&m| m == ModeLabel::Idler(next_idler))
                    .expect("idler allocated");
                next_idler += 1;
                let cross = if s.kind == SourceKind::Tmsv {
                    (mu * (mu + 1.0)).sqrt()
                } else {
                    mu
                };
                for (a, b) in [(target, target), (idler, idler)] {
                    excess[(2 * a, 2 * b)] = mu;
                    excess[(2 * a + 1, 2 * b + 1)] = mu;
                }
                for (a, b) in [(target, idler), (idler, target)] {
                    excess[(2 * a, 2 * b)] = cross;
                    excess[(2 * a + 1, 2 * b + 1)] = -cross;
                }
            }
        }
    }
    Ok(GaussianState::from_parts(modes, mean, excess))
}
