//! Gauss–Hermite rules for `∫ f(x) e^{−x²} dx`.

use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights of the `n`-point rule, exact for polynomials of degree
/// `2n − 1`. Golub–Welsch: nodes are the eigenvalues of the Jacobi matrix
/// with off-diagonal `√(k/2)`, weights `√π v₀²`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "quadrature order must be positive");
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], std::f64::consts::PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ∫ x^{2k} e^{−x²} dx = Γ(k + 1/2) = √π (2k−1)!! / 2^k
    fn even_moment(k: u32) -> f64 {
        let mut dfact = 1.0;
        let mut i = 2 * k as i64 - 1;
        while i > 1 {
            dfact *= i as f64;
            i -= 2;
        }
        std::f64::consts::PI.sqrt() * dfact / 2f64.powi(k as i32)
    }

    #[test]
    fn exact_on_polynomials() {
        for n in [1, 2, 5, 8, 12, 14] {
            let (x, w) = gauss_hermite(n);
            for deg in 0..2 * n as u32 {
                let terms = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32));
                let scale: f64 = terms.clone().map(f64::abs).sum();
                let got: f64 = terms.sum();
                let want = if deg % 2 == 0 { even_moment(deg / 2) } else { 0.0 };
                let err = (got - want).abs() / scale.max(1.0);
                assert!(err < 1e-11, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn two_point_rule() {
        let (x, w) = gauss_hermite(2);
        assert!((x[1] - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((w[0] - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-14);
    }
}
