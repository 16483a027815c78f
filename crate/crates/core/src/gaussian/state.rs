use std::fmt;

use nalgebra::{DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::{c, passive_symplectic, unitarity_deviation, CMatrix, RMatrix};
use crate::walk::{ModeIndex, ModeRegistry};

/// What a mode of a [`GaussianState`] physically is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModeLabel {
    Walk(ModeIndex),
    /// Herald arm of the k-th pair source.
    Idler(usize),
    /// Light picked off by the Kerr gate in `slot`, one mode per sector.
    Routing { slot: usize, sector: u8 },
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeLabel::Walk(m) => write!(f, "{m}"),
            ModeLabel::Idler(k) => write!(f, "idler{k}"),
            ModeLabel::Routing { slot, sector } => write!(f, "gate{slot}s{sector}"),
        }
    }
}

/// Multimode Gaussian state in the ħ = 1 convention with interleaved
/// `(x, p)` quadratures and vacuum covariance `I/2`.
///
/// The covariance is stored as its excess over vacuum, `cov − I/2`. All
/// passive, loss and marginal operations are linear in that quantity, and
/// keeping it explicit means vacuum stays exactly vacuum and small photon
/// numbers are not swamped by the `1/2` offset.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    modes: Vec<ModeLabel>,
    mean: DVector<f64>,
    excess: RMatrix,
}

impl GaussianState {
    pub fn vacuum(modes: Vec<ModeLabel>) -> Self {
        let n = modes.len();
        Self {
            modes,
            mean: DVector::zeros(2 * n),
            excess: RMatrix::zeros(2 * n, 2 * n),
        }
    }

    /// Vacuum on every walk mode of `registry` followed by `n_idlers` idlers.
    pub fn vacuum_on(registry: &ModeRegistry, n_idlers: usize) -> Self {
        let modes = registry
            .modes()
            .map(ModeLabel::Walk)
            .chain((0..n_idlers).map(ModeLabel::Idler))
            .collect();
        Self::vacuum(modes)
    }

    pub(crate) fn from_parts(modes: Vec<ModeLabel>, mean: DVector<f64>, excess: RMatrix) -> Self {
        let s = Self { modes, mean, excess };
        s.debug_check();
        s
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    pub fn index_of(&self, label: ModeLabel) -> Option<usize> {
        self.modes.iter().position(|&m| m == label)
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// `cov − I/2`.
    pub fn excess(&self) -> &RMatrix {
        &self.excess
    }

    pub fn cov(&self) -> RMatrix {
        let n = self.excess.nrows();
        &self.excess + RMatrix::identity(n, n) * 0.5
    }

    /// `<a†a>` of mode `i`.
    pub fn mean_photon(&self, i: usize) -> f64 {
        let (x, p) = (2 * i, 2 * i + 1);
        0.5 * (self.excess[(x, x)] + self.excess[(p, p)] + self.mean[x].powi(2) + self.mean[p].powi(2))
    }

    pub fn total_mean_photon(&self) -> f64 {
        (0..self.n_modes()).map(|i| self.mean_photon(i)).sum()
    }

    fn check_modes(&self, idx: &[usize]) -> Result<()> {
        for (k, &i) in idx.iter().enumerate() {
            if i >= self.n_modes() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: self.n_modes(),
                });
            }
            if idx[..k].contains(&i) {
                return Err(Error::InvalidConfig(format!("mode {i} listed twice")));
            }
        }
        Ok(())
    }

    /// Passive transformation `a_out = U a_in` on all modes.
    pub fn apply_passive(&self, u: &CMatrix) -> Result<Self> {
        let all: Vec<usize> = (0..self.n_modes()).collect();
        self.apply_passive_on(&all, u)
    }

    /// Passive transformation acting on the listed modes only.
    pub fn apply_passive_on(&self, idx: &[usize], u: &CMatrix) -> Result<Self> {
        if u.nrows() != idx.len() || u.ncols() != idx.len() {
            return Err(Error::DimensionMismatch {
                expected: idx.len(),
                got: u.nrows(),
            });
        }
        self.check_modes(idx)?;
        let deviation = unitarity_deviation(u);
        if deviation > 1e-10 {
            return Err(Error::NonUnitary { deviation });
        }
        let s = passive_symplectic(u);
        let q: Vec<usize> = idx.iter().flat_map(|&i| [2 * i, 2 * i + 1]).collect();
        let dim = self.excess.nrows();

        let mut mean = self.mean.clone();
        let sub_mean = DVector::from_iterator(q.len(), q.iter().map(|&r| self.mean[r]));
        let new_mean = &s * sub_mean;
        for (k, &r) in q.iter().enumerate() {
            mean[r] = new_mean[k];
        }

        // rows: X[q, :] <- S X[q, :]
        let rows = RMatrix::from_fn(q.len(), dim, |a, j| self.excess[(q[a], j)]);
        let rows = &s * rows;
        let mut excess = self.excess.clone();
        for (a, &r) in q.iter().enumerate() {
            for j in 0..dim {
                excess[(r, j)] = rows[(a, j)];
            }
        }
        // cols: X[:, q] <- X[:, q] Sᵀ
        let cols = RMatrix::from_fn(dim, q.len(), |i, b| excess[(i, q[b])]);
        let cols = cols * s.transpose();
        for (b, &r) in q.iter().enumerate() {
            for i in 0..dim {
                excess[(i, r)] = cols[(i, b)];
            }
        }
        symmetrize(&mut excess);
        Ok(Self::from_parts(self.modes.clone(), mean, excess))
    }

    /// Pure-loss channel of transmission `eta` on the listed modes:
    /// `cov -> η cov + (1 − η) I/2`, `mean -> √η mean`.
    pub fn apply_loss(&self, idx: &[usize], eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::EtaOutOfRange(eta));
        }
        self.check_modes(idx)?;
        let mut g = vec![1.0; 2 * self.n_modes()];
        for &i in idx {
            g[2 * i] = eta.sqrt();
            g[2 * i + 1] = eta.sqrt();
        }
        let mean = DVector::from_fn(self.mean.len(), |r, _| self.mean[r] * g[r]);
        let excess = RMatrix::from_fn(self.excess.nrows(), self.excess.ncols(), |r, s| {
            self.excess[(r, s)] * g[r] * g[s]
        });
        Ok(Self::from_parts(self.modes.clone(), mean, excess))
    }

    /// Append vacuum modes at the end.
    pub fn append_modes(&self, labels: &[ModeLabel]) -> Result<Self> {
        for l in labels {
            if self.modes.contains(l) {
                return Err(Error::ModeCollision(l.to_string()));
            }
        }
        let n_old = 2 * self.n_modes();
        let n_new = n_old + 2 * labels.len();
        let mut mean = DVector::zeros(n_new);
        mean.rows_mut(0, n_old).copy_from(&self.mean);
        let mut excess = RMatrix::zeros(n_new, n_new);
        excess.view_mut((0, 0), (n_old, n_old)).copy_from(&self.excess);
        let mut modes = self.modes.clone();
        modes.extend_from_slice(labels);
        Ok(Self::from_parts(modes, mean, excess))
    }

    /// New state whose mode `k` is old mode `perm[k]`. `perm` must be a
    /// permutation of `0..n_modes`.
    pub fn reorder(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_modes() {
            return Err(Error::DimensionMismatch {
                expected: self.n_modes(),
                got: perm.len(),
            });
        }
        self.reduce(perm)
    }

    /// Marginal on `subset` (in the given order).
    pub fn reduce(&self, subset: &[usize]) -> Result<Self> {
        self.check_modes(subset)?;
        let q: Vec<usize> = subset.iter().flat_map(|&i| [2 * i, 2 * i + 1]).collect();
        let mean = DVector::from_iterator(q.len(), q.iter().map(|&r| self.mean[r]));
        let excess = RMatrix::from_fn(q.len(), q.len(), |a, b| self.excess[(q[a], q[b])]);
        let modes = subset.iter().map(|&i| self.modes[i]).collect();
        Ok(Self { modes, mean, excess })
    }

    /// Smallest eigenvalue of `cov + (i/2)Ω`. Non-negative for physical states.
    pub fn physicality_margin(&self) -> f64 {
        let n = self.excess.nrows();
        if n == 0 {
            return 0.0;
        }
        // Entries many orders below the scale carry no information but can
        // underflow inside the QR sweeps and poison the spectrum with NaN.
        let floor = 1e-30 * self.excess.amax().max(1.0);
        let mut h = CMatrix::from_fn(n, n, |r, s| {
            let v = self.excess[(r, s)];
            c(if v.abs() < floor { 0.0 } else { v }, 0.0)
        });
        for i in 0..n {
            h[(i, i)] += c(0.5, 0.0);
        }
        for m in 0..n / 2 {
            h[(2 * m, 2 * m + 1)] += c(0.0, 0.5);
            h[(2 * m + 1, 2 * m)] += c(0.0, -0.5);
        }
        SymmetricEigen::new(h).eigenvalues.min()
    }

    /// Symmetry to 1e-12 and `cov + (i/2)Ω ⪰ 0` to −1e-10.
    pub fn check_physical(&self) -> Result<()> {
        let asym = (&self.excess - self.excess.transpose()).abs().max();
        if asym > 1e-12 {
            return Err(Error::NumericalInstability(format!("covariance asymmetry {asym:.3e}")));
        }
        let margin = self.physicality_margin();
        if !(margin >= -1e-10) {
            return Err(Error::NumericalInstability(format!(
                "unphysical covariance (min eigenvalue {margin:.3e})"
            )));
        }
        Ok(())
    }

    #[inline]
    fn debug_check(&self) {
        // The eigen-check is O(M³); skip it on the big expanded states.
        #[cfg(debug_assertions)]
        if self.n_modes() <= 16 {
            if let Err(e) = self.check_physical() {
                panic!("Gaussian state invariant broken: {e}");
            }
        }
    }
}

fn symmetrize(m: &mut RMatrix) {
    let n = m.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::beam_splitter;

    fn two_mode() -> Vec<ModeLabel> {
        vec![ModeLabel::Idler(0), ModeLabel::Idler(1)]
    }

    fn coherent_pair(alpha: f64) -> GaussianState {
        let mut mean = DVector::zeros(4);
        mean[0] = std::f64::consts::SQRT_2 * alpha;
        GaussianState::from_parts(two_mode(), mean, RMatrix::zeros(4, 4))
    }

    #[test]
    fn vacuum_is_exact() {
        let v = GaussianState::vacuum(two_mode());
        assert_eq!(v.cov(), RMatrix::identity(4, 4) * 0.5);
        assert_eq!(v.mean(), &DVector::zeros(4));
        assert!(v.check_physical().is_ok());
    }

    #[test]
    fn balanced_splitter_on_coherent() {
        let s = coherent_pair(0.8).apply_passive(&beam_splitter(0.5)).unwrap();
        let x = std::f64::consts::SQRT_2 * 0.8 / std::f64::consts::SQRT_2;
        assert!((s.mean()[0].abs() - x).abs() < 1e-14);
        assert!((s.mean()[2].abs() - x).abs() < 1e-14);
        assert!((s.total_mean_photon() - 0.64).abs() < 1e-14);
    }

    #[test]
    fn identity_passive_is_noop() {
        let s = coherent_pair(0.3);
        assert_eq!(s.apply_passive(&CMatrix::identity(2, 2)).unwrap(), s);
    }

    #[test]
    fn passive_rejects_bad_input() {
        let s = coherent_pair(0.3);
        assert!(matches!(
            s.apply_passive(&CMatrix::identity(3, 3)),
            Err(Error::DimensionMismatch { .. })
        ));
        let mut bad = CMatrix::identity(2, 2);
        bad[(0, 1)] = c(0.5, 0.0);
        assert!(matches!(s.apply_passive(&bad), Err(Error::NonUnitary { .. })));
    }

    #[test]
    fn loss_edges() {
        let s = coherent_pair(0.5);
        assert_eq!(s.apply_loss(&[0, 1], 1.0).unwrap(), s);
        let gone = s.apply_loss(&[0, 1], 0.0).unwrap();
        assert_eq!(gone.cov(), RMatrix::identity(4, 4) * 0.5);
        assert!(gone.mean().iter().all(|&v| v == 0.0));
        assert_eq!(s.apply_loss(&[0], 1.5), Err(Error::EtaOutOfRange(1.5)));
        assert!(matches!(s.apply_loss(&[7], 0.5), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn reduce_and_reorder() {
        let mut ex = RMatrix::zeros(4, 4);
        ex[(2, 2)] = 0.3;
        ex[(3, 3)] = 0.3;
        let s = GaussianState::from_parts(two_mode(), DVector::zeros(4), ex);
        let vac = s.reduce(&[0]).unwrap();
        assert_eq!(vac.cov(), RMatrix::identity(2, 2) * 0.5);
        let swapped = s.reorder(&[1, 0]).unwrap();
        assert!((swapped.mean_photon(0) - 0.3).abs() < 1e-15);
        assert_eq!(swapped.reorder(&[1, 0]).unwrap(), s);
        assert!(s.reduce(&[2]).is_err());
    }

    #[test]
    fn append_is_vacuum() {
        let s = coherent_pair(0.2).append_modes(&[ModeLabel::Routing { slot: 0, sector: 0 }]).unwrap();
        assert_eq!(s.n_modes(), 3);
        assert_eq!(s.mean_photon(2), 0.0);
        assert!(coherent_pair(0.2).append_modes(&[ModeLabel::Idler(0)]).is_err());
    }
}
