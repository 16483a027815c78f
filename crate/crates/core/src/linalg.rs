//! Small matrix helpers shared by the walk, Gaussian and Fock modules.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// max |(U†U − I)_ij|
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    let n = u.ncols();
    let prod = u.adjoint() * u;
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((prod[(i, j)] - c(target, 0.0)).norm());
        }
    }
    dev
}

/// Real orthogonal-symplectic image of a passive mode transformation.
///
/// Quadratures are interleaved `(x_0, p_0, x_1, p_1, ...)`. With `U = A + iB`
/// and `a_out = U a_in`, the block for modes `(i, j)` is `[[A, -B], [B, A]]`.
pub fn passive_symplectic(u: &CMatrix) -> RMatrix {
    let n = u.nrows();
    let mut s = RMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..u.ncols() {
            let z = u[(i, j)];
            s[(2 * i, 2 * j)] = z.re;
            s[(2 * i, 2 * j + 1)] = -z.im;
            s[(2 * i + 1, 2 * j)] = z.im;
            s[(2 * i + 1, 2 * j + 1)] = z.re;
        }
    }
    s
}

/// Two-mode beam splitter moving a fraction `reflectivity` of mode 0's
/// intensity into mode 1.
pub fn beam_splitter(reflectivity: f64) -> CMatrix {
    let t = (1.0 - reflectivity).max(0.0).sqrt();
    let r = reflectivity.max(0.0).sqrt();
    CMatrix::from_row_slice(2, 2, &[c(t, 0.0), c(-r, 0.0), c(r, 0.0), c(t, 0.0)])
}
