//! Matrix permanents by Ryser's formula.

use num_complex::Complex64;

use crate::linalg::CMatrix;

/// Permanent of a square matrix, Ryser's formula with Gray-code updates,
/// `O(2^n n)`.
pub fn permanent(a: &CMatrix) -> Complex64 {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "permanent needs a square matrix");
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut total = Complex64::new(0.0, 0.0);
    let mut gray = 0usize;
    for k in 1..1usize << n {
        let next = k ^ (k >> 1);
        let flipped = (next ^ gray).trailing_zeros() as usize;
        let add = next & (1 << flipped) != 0;
        for (i, s) in row_sums.iter_mut().enumerate() {
            if add {
                *s += a[(i, flipped)];
            } else {
                *s -= a[(i, flipped)];
            }
        }
        gray = next;
        let prod: Complex64 = row_sums.iter().product();
        if next.count_ones() % 2 == 0 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    if n % 2 == 1 {
        -total
    } else {
        total
    }
}

/// Permanent of the `K × K` matrix obtained by repeating row `i` of `a`
/// `rows[i]` times and column `j` `cols[j]` times (`Σ rows = Σ cols = K`).
///
/// Ryser's sum grouped by how many copies of each column are chosen:
/// `Σ_s (−1)^{K−Σs} Π_j C(n_j, s_j) Π_i (Σ_j s_j a_ij)^{m_i}`, costing
/// `Π_j (n_j + 1)` terms instead of `2^K`.
pub fn permanent_multiset(a: &CMatrix, rows: &[usize], cols: &[usize]) -> Complex64 {
    assert_eq!(rows.len(), a.nrows());
    assert_eq!(cols.len(), a.ncols());
    let k: usize = cols.iter().sum();
    assert_eq!(k, rows.iter().sum::<usize>(), "row and column multiplicities differ");
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let live_rows: Vec<usize> = (0..rows.len()).filter(|&i| rows[i] > 0).collect();
    let live_cols: Vec<usize> = (0..cols.len()).filter(|&j| cols[j] > 0).collect();

    let mut s = vec![0usize; live_cols.len()];
    let mut total = Complex64::new(0.0, 0.0);
    loop {
        let chosen: usize = s.iter().sum();
        if chosen > 0 {
            let mut coeff = 1.0;
            for (c, &j) in live_cols.iter().enumerate() {
                coeff *= binomial(cols[j], s[c]);
            }
            let mut prod = Complex64::new(coeff, 0.0);
            for &i in &live_rows {
                let mut sum = Complex64::new(0.0, 0.0);
                for (c, &j) in live_cols.iter().enumerate() {
                    sum += a[(i, j)] * s[c] as f64;
                }
                prod *= sum.powu(rows[i] as u32);
            }
            if (k - chosen).is_multiple_of(2) {
                total += prod;
            } else {
                total -= prod;
            }
        }
        // odometer over 0..=n_j
        let mut c = 0;
        loop {
            if c == s.len() {
                return total;
            }
            s[c] += 1;
            if s[c] <= cols[live_cols[c]] {
                break;
            }
            s[c] = 0;
            c += 1;
        }
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}
