//! Fock-basis ensembles for each source kind.
//!
//! Single-mode sources live on one mode, pair sources on two (signal, idler).
//! Weight cut off by the truncation is kept as an extra zero-norm ensemble
//! member so the weights always sum to one and the trace shows the leak.

use num_complex::Complex64;

use super::permanent::factorial;
use super::quadrature::gauss_hermite;
use super::state::{FockState, MixedFockState};
use crate::error::{Error, Result};
use crate::gaussian::{SourceKind, SourceSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecomposeOptions {
    pub cutoff: usize,
    /// Minimum Gauss–Hermite order per axis for squashed pairs.
    pub quadrature_order: usize,
    pub leak_bound: f64,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self {
            cutoff: 10,
            quadrature_order: 12,
            leak_bound: super::state::DEFAULT_LEAK_BOUND,
        }
    }
}

/// Number of modes the decomposition of `kind` occupies.
pub fn source_modes(kind: SourceKind) -> usize {
    match kind {
        SourceKind::Vacuum => 0,
        SourceKind::Tmsv | SourceKind::SquashedPair => 2,
        _ => 1,
    }
}

pub fn input_decompose(source: &SourceSpec, cutoff: usize) -> Result<MixedFockState> {
    input_decompose_with(
        source,
        &DecomposeOptions {
            cutoff,
            ..DecomposeOptions::default()
        },
    )
}

pub fn input_decompose_with(source: &SourceSpec, opts: &DecomposeOptions) -> Result<MixedFockState> {
    source.validate()?;
    let cutoff = opts.cutoff;
    let mu = source.mean_photon;
    let mut members: Vec<(f64, FockState)> = match source.kind {
        SourceKind::Vacuum => vec![(1.0, FockState::vacuum(0, cutoff))],
        SourceKind::Fock1 => {
            if cutoff == 0 {
                return Err(Error::CutoffTooSmall {
                    cutoff,
                    leak: 1.0,
                    bound: opts.leak_bound,
                });
            }
            vec![(1.0, FockState::basis(vec![1], cutoff)?)]
        }
        SourceKind::Coherent => {
            let alpha = Complex64::from_polar(mu.sqrt(), source.phase);
            let pref = (-mu / 2.0).exp();
            let terms = (0..=cutoff).map(|n| {
                (
                    vec![n as u16],
                    alpha.powu(n as u32) * pref / factorial(n).sqrt(),
                )
            });
            vec![(1.0, FockState::from_terms(1, cutoff, terms)?)]
        }
        SourceKind::Thermal => (0..=cutoff)
            .map(|n| {
                let w = mu.powi(n as i32) / (1.0 + mu).powi(n as i32 + 1);
                Ok((w, FockState::basis(vec![n as u16], cutoff)?))
            })
            .collect::<Result<_>>()?,
        SourceKind::Tmsv => {
            if cutoff < 2 {
                return Err(Error::CutoffTooSmall {
                    cutoff,
                    leak: mu / (1.0 + mu),
                    bound: opts.leak_bound,
                });
            }
            let lambda = (mu / (1.0 + mu)).sqrt();
            let pref = 1.0 / (1.0 + mu).sqrt();
            let terms = (0..=cutoff / 2).map(|n| {
                (
                    vec![n as u16, n as u16],
                    Complex64::new(pref * lambda.powi(n as i32), 0.0),
                )
            });
            vec![(1.0, FockState::from_terms(2, cutoff, terms)?)]
        }
        SourceKind::SquashedPair => {
            if cutoff < 2 {
                return Err(Error::CutoffTooSmall {
                    cutoff,
                    leak: mu / (1.0 + mu),
                    bound: opts.leak_bound,
                });
            }
            squashed_members(mu, cutoff, opts.quadrature_order.max(cutoff + 1))?
        }
    };

    let kept: f64 = members.iter().map(|(w, s)| w * s.norm_sqr()).sum();
    let leak = (1.0 - kept).max(0.0);
    if leak > opts.leak_bound {
        return Err(Error::CutoffTooSmall {
            cutoff,
            leak,
            bound: opts.leak_bound,
        });
    }
    let weight_sum: f64 = members.iter().map(|(w, _)| w).sum();
    if weight_sum < 1.0 {
        let n = source_modes(source.kind);
        members.push((1.0 - weight_sum, FockState::from_terms(n, cutoff, [])?));
    }
    MixedFockState::new(members)
}

/// `ρ = ∫ P(α) |α><α| ⊗ |ᾱ><ᾱ| d²α` with `P(α) = e^{−|α|²/μ} / (πμ)`.
///
/// Writing `|α>|ᾱ> = e^{−|α|²} φ(α)` with `φ = Σ αⁿ ᾱᵐ/√(n!m!) |n,m>`, every
/// truncated matrix element is a polynomial of degree at most `2·cutoff` in
/// each quadrature times `e^{−(1/μ+2)|α|²}`, so a Gauss–Hermite product rule
/// of order `> cutoff` on `α = (x+iy)/√(1/μ+2)` integrates it exactly.
fn squashed_members(mu: f64, cutoff: usize, order: usize) -> Result<Vec<(f64, FockState)>> {
    if mu == 0.0 {
        return Ok(vec![(1.0, FockState::vacuum(2, cutoff))]);
    }
    let scale = 1.0 / mu + 2.0;
    let (x, w) = gauss_hermite(order);
    let mut members = Vec::with_capacity(order * order);
    for (j, &xj) in x.iter().enumerate() {
        for (k, &yk) in x.iter().enumerate() {
            let alpha = Complex64::new(xj, yk) / scale.sqrt();
            let weight = w[j] * w[k] / (std::f64::consts::PI * mu * scale);
            let mut terms = Vec::new();
            for n in 0..=cutoff {
                for m in 0..=cutoff - n {
                    let a = alpha.powu(n as u32) * alpha.conj().powu(m as u32)
                        / (factorial(n) * factorial(m)).sqrt();
                    terms.push((vec![n as u16, m as u16], a));
                }
            }
            let norm2: f64 = terms.iter().map(|(_, a)| a.norm_sqr()).sum();
            let inv = 1.0 / norm2.sqrt();
            let terms = terms.into_iter().map(|(o, a)| (o, a * inv));
            members.push((weight * norm2, FockState::from_terms(2, cutoff, terms)?));
        }
    }
    Ok(members)
}
