//! Fixed-photon-number occupation bases and the creation-operator ladder
//! between them.

use std::collections::HashMap;

use num_complex::Complex64;

use super::permanent::factorial;
use crate::linalg::CMatrix;

pub type Occupation = Vec<u16>;

/// All occupations of `modes` modes with exactly `k` photons, in
/// lexicographic order.
pub fn compositions(k: usize, modes: usize) -> Vec<Occupation> {
    fn rec(left: usize, mode: usize, cur: &mut Occupation, out: &mut Vec<Occupation>) {
        if mode + 1 == cur.len() {
            cur[mode] = left as u16;
            out.push(cur.clone());
            return;
        }
        for n in (0..=left).rev() {
            cur[mode] = n as u16;
            rec(left - n, mode + 1, cur, out);
        }
    }
    if modes == 0 {
        return if k == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    rec(k, 0, &mut vec![0; modes], &mut out);
    out
}

/// Number of `k`-photon occupations of `modes` modes.
pub fn sector_dim(k: usize, modes: usize) -> usize {
    if modes == 0 {
        return (k == 0) as usize;
    }
    super::permanent::binomial(k + modes - 1, modes - 1).round() as usize
}

pub fn occupation_factorial(occ: &[u16]) -> f64 {
    occ.iter().map(|&n| factorial(n as usize)).product()
}

/// Bases of every photon-number sector up to a cutoff, with the table of
/// `|m> -> |m + e_i>` indices used to multiply by a creation operator.
#[derive(Debug, Clone)]
pub struct Ladder {
    modes: usize,
    sectors: Vec<Vec<Occupation>>,
    index: Vec<HashMap<Occupation, usize>>,
    up: Vec<Vec<Vec<usize>>>,
}

impl Ladder {
    pub fn new(modes: usize, cutoff: usize) -> Self {
        let sectors: Vec<Vec<Occupation>> = (0..=cutoff).map(|k| compositions(k, modes)).collect();
        let index: Vec<HashMap<Occupation, usize>> = sectors
            .iter()
            .map(|s| s.iter().enumerate().map(|(i, o)| (o.clone(), i)).collect())
            .collect();
        let mut up = Vec::with_capacity(cutoff);
        for k in 0..cutoff {
            let table = sectors[k]
                .iter()
                .map(|occ| {
                    (0..modes)
                        .map(|i| {
                            let mut raised = occ.clone();
                            raised[i] += 1;
                            index[k + 1][&raised]
                        })
                        .collect()
                })
                .collect();
            up.push(table);
        }
        Self {
            modes,
            sectors,
            index,
            up,
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.sectors.len() - 1
    }

    pub fn sector(&self, k: usize) -> &[Occupation] {
        &self.sectors[k]
    }

    pub fn index_of(&self, occ: &[u16]) -> Option<(usize, usize)> {
        let k: usize = occ.iter().map(|&n| n as usize).sum();
        self.index.get(k)?.get(occ).map(|&i| (k, i))
    }

    pub fn total_dim(&self) -> usize {
        self.sectors.iter().map(Vec::len).sum()
    }

    /// Image of the normalized basis state `|n>` (sector `k`, position
    /// `col`) under the second-quantized map `a†_j -> Σ_i t_ij a†_i`, as
    /// amplitudes on sector `k`.
    ///
    /// Expands `Π_j (Σ_i t_ij a†_i)^{n_j} / √n!` one creation operator at a
    /// time, then converts monomial coefficients to normalized amplitudes.
    pub fn transform_basis_state(&self, t: &CMatrix, k: usize, col: usize) -> Vec<Complex64> {
        let occ = &self.sectors[k][col];
        let mut poly = vec![Complex64::new(1.0 / occupation_factorial(occ).sqrt(), 0.0)];
        let mut level = 0;
        for (j, &nj) in occ.iter().enumerate() {
            for _ in 0..nj {
                let mut next = vec![Complex64::new(0.0, 0.0); self.sectors[level + 1].len()];
                for (a, &v) in poly.iter().enumerate() {
                    if v == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let targets = &self.up[level][a];
                    for i in 0..self.modes {
                        let tij = t[(i, j)];
                        if tij != Complex64::new(0.0, 0.0) {
                            next[targets[i]] += tij * v;
                        }
                    }
                }
                poly = next;
                level += 1;
            }
        }
        for (a, v) in poly.iter_mut().enumerate() {
            *v *= occupation_factorial(&self.sectors[k][a]).sqrt();
        }
        poly
    }
}
