//! Similarity between distributions.

use crate::error::{Error, Result};
use crate::experiments::Distribution;

const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    /// `Σ √(p_i q_i)`
    #[default]
    Bhattacharyya,
    /// `(Σ √(p_i q_i))²`
    BhattacharyyaSquared,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityReport {
    pub value: f64,
    pub convention: Convention,
}

/// Bhattacharyya coefficient of two normalized probability vectors.
pub fn bhattacharyya_probs(p: &[f64], q: &[f64], convention: Convention) -> Result<SimilarityReport> {
    if p.len() != q.len() {
        return Err(Error::LabelMismatch);
    }
    for v in [p, q] {
        let sum: f64 = v.iter().sum();
        if (sum - 1.0).abs() > NORM_TOL || v.iter().any(|&x| x < 0.0) {
            return Err(Error::NotNormalized(sum));
        }
    }
    let bc: f64 = p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum();
    let bc = bc.clamp(0.0, 1.0);
    let value = match convention {
        Convention::Bhattacharyya => bc,
        Convention::BhattacharyyaSquared => bc * bc,
    };
    Ok(SimilarityReport { value, convention })
}

pub fn bhattacharyya(p: &Distribution, q: &Distribution, convention: Convention) -> Result<SimilarityReport> {
    if p.labels != q.labels {
        return Err(Error::LabelMismatch);
    }
    bhattacharyya_probs(&p.probs, &q.probs, convention)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::Label;

    fn dist(probs: &[f64]) -> Distribution {
        let labels = (1..=probs.len()).map(Label::Bin).collect();
        Distribution::normalized(labels, probs.to_vec())
    }

    #[test]
    fn examples() {
        let c = Convention::default();
        assert_eq!(bhattacharyya(&dist(&[0.3, 0.7]), &dist(&[0.3, 0.7]), c).unwrap().value, 1.0);
        assert_eq!(bhattacharyya(&dist(&[1.0, 0.0]), &dist(&[0.0, 1.0]), c).unwrap().value, 0.0);
        let r = bhattacharyya(&dist(&[0.5, 0.5]), &dist(&[1.0, 0.0]), c).unwrap();
        assert!((r.value - 0.5f64.sqrt()).abs() < 1e-15);
        let r = bhattacharyya(&dist(&[0.5, 0.5]), &dist(&[1.0, 0.0]), Convention::BhattacharyyaSquared).unwrap();
        assert!((r.value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        let c = Convention::default();
        assert_eq!(
            bhattacharyya(&dist(&[1.0]), &dist(&[0.5, 0.5]), c),
            Err(Error::LabelMismatch)
        );
        assert!(matches!(
            bhattacharyya_probs(&[0.5, 0.4], &[0.5, 0.5], c),
            Err(Error::NotNormalized(_))
        ));
    }
}
