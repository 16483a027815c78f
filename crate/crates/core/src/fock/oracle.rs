//! Brute-force click statistics in the Fock basis.
//!
//! Every source occupies one or two input ports (signal, idler). A port's
//! creation operator is mapped through the walk, the crystal and detection
//! losses and the Kerr gates to a column `w_p` over the output modes plus
//! loss ancillas, which together form an isometry. The probability that a
//! set of output modes `S` stays dark is then
//!
//! `P₀(S) = Σ_K w_K <ψ_K| Γ(I − W_S† W_S) |ψ_K>`,
//!
//! where `Γ(T)` is the second quantization of the port-space matrix `T`
//! (the norm of the state with all `S` creation operators set to zero).
//! Click patterns follow by inclusion–exclusion over detectors.

use num_complex::Complex64;

use super::basis::Ladder;
use super::decompose::{input_decompose_with, DecomposeOptions};
use super::state::{FockState, MixedFockState};
use crate::detection::{ClickPattern, GateSpec};
use crate::error::{Error, Result};
use crate::gaussian::{check_collisions, ModeLabel, SourceKind, SourceSpec};
use crate::linalg::CMatrix;
use crate::walk::{apply_step, ModeIndex, Polarization, WalkConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Maximum total photon number kept in the joint input state.
    pub cutoff: usize,
    pub quadrature_order: usize,
    pub leak_bound: f64,
    /// Cap on the port-space Fock dimension.
    pub max_dim: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            cutoff: 10,
            quadrature_order: 12,
            leak_bound: super::state::DEFAULT_LEAK_BOUND,
            max_dim: 200_000,
        }
    }
}

/// Sources, walk and losses of one simulated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSetup {
    pub sources: Vec<SourceSpec>,
    pub walk: WalkConfig,
    pub eta_sys: f64,
    pub eta_idler: f64,
}

impl OracleSetup {
    pub fn lossless(sources: Vec<SourceSpec>, walk: WalkConfig) -> Self {
        Self {
            sources,
            walk,
            eta_sys: 1.0,
            eta_idler: 1.0,
        }
    }
}

/// Detector mode sets as labels of the routed output space.
pub type LabelSets = Vec<Vec<ModeLabel>>;

#[derive(Debug, Clone)]
pub struct FockOracle {
    labels: Vec<ModeLabel>,
    /// Column `p` holds the output-mode image of port `p` (ancillas omitted).
    columns: CMatrix,
    state: MixedFockState,
    ladder: Ladder,
    cutoff: usize,
}

impl FockOracle {
    pub fn new(setup: &OracleSetup, opts: &OracleOptions) -> Result<Self> {
        let registry = setup.walk.registry();
        check_collisions(&setup.sources, &registry)?;
        for eta in [setup.eta_sys, setup.eta_idler] {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::EtaOutOfRange(eta));
            }
        }
        let n_idlers = setup.sources.iter().filter(|s| s.kind.is_pair()).count();
        let mut labels: Vec<ModeLabel> = registry.modes().map(ModeLabel::Walk).collect();
        labels.extend((0..n_idlers).map(ModeLabel::Idler));
        let n_out = labels.len();

        let dopts = DecomposeOptions {
            cutoff: opts.cutoff,
            quadrature_order: opts.quadrature_order,
            leak_bound: opts.leak_bound,
        };
        let mut ports: Vec<Vec<Complex64>> = Vec::new();
        let mut state = MixedFockState::pure(FockState::vacuum(0, opts.cutoff));
        let mut idler = 0;
        for s in &setup.sources {
            let unit = |m: ModeLabel, w: f64| {
                let mut v = vec![Complex64::new(0.0, 0.0); n_out];
                let i = labels.iter().position(|&l| l == m).expect("label present");
                v[i] = Complex64::new(w, 0.0);
                v
            };
            match s.kind {
                SourceKind::Vacuum => continue,
                SourceKind::Coherent => {
                    let mut v = unit(ModeLabel::Walk(s.target.in_sector(0)), s.overlap.sqrt());
                    let w = unit(ModeLabel::Walk(s.target.in_sector(1)), (1.0 - s.overlap).sqrt());
                    for (a, b) in v.iter_mut().zip(w) {
                        *a += b;
                    }
                    ports.push(v);
                }
                SourceKind::Thermal | SourceKind::Fock1 => ports.push(unit(ModeLabel::Walk(s.target), 1.0)),
                SourceKind::Tmsv | SourceKind::SquashedPair => {
                    ports.push(unit(ModeLabel::Walk(s.target), 1.0));
                    ports.push(unit(ModeLabel::Idler(idler), 1.0));
                    idler += 1;
                }
            }
            let part = input_decompose_with(s, &dopts)?;
            state = state.tensor(&part, opts.cutoff);
        }
        let leak = state.truncation_leak();
        if leak > opts.leak_bound {
            return Err(Error::CutoffTooSmall {
                cutoff: opts.cutoff,
                leak,
                bound: opts.leak_bound,
            });
        }
        // drop zero-norm members left over from per-source truncation
        state.ensemble.retain(|(w, s)| *w > 0.0 && !s.is_empty());

        let n_ports = ports.len();
        let input = CMatrix::from_fn(n_out, n_ports, |i, p| ports[p][i]);
        let gram = input.adjoint() * &input;
        let dev = (gram - CMatrix::identity(n_ports, n_ports)).camax();
        if dev > 1e-12 {
            return Err(Error::ModeCollision(format!("input ports overlap (deviation {dev:.3e})")));
        }

        let ladder = Ladder::new(n_ports, opts.cutoff);
        if ladder.total_dim() > opts.max_dim {
            return Err(Error::ResourceBound {
                dim: ladder.total_dim(),
                cap: opts.max_dim,
            });
        }

        let columns = propagate(&input, &labels, setup)?;
        Ok(Self {
            labels,
            columns,
            state,
            ladder,
            cutoff: opts.cutoff,
        })
    }

    pub fn n_ports(&self) -> usize {
        self.columns.ncols()
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn truncation_leak(&self) -> f64 {
        self.state.truncation_leak()
    }

    pub fn input_state(&self) -> &MixedFockState {
        &self.state
    }

    /// Output labels and port columns after routing through `gates`.
    pub fn routed(&self, gates: &[GateSpec]) -> Result<(Vec<ModeLabel>, CMatrix)> {
        let mut labels = self.labels.clone();
        let mut rows: Vec<Vec<Complex64>> = (0..labels.len())
            .map(|i| self.columns.row(i).iter().copied().collect())
            .collect();
        let mut used = Vec::new();
        for (slot, g) in gates.iter().enumerate() {
            if !g.enabled {
                continue;
            }
            if used.contains(&g.bin) {
                return Err(Error::DuplicateGateBin(g.bin));
            }
            used.push(g.bin);
            if !(0.0..=1.0).contains(&g.efficiency) {
                return Err(Error::EtaOutOfRange(g.efficiency));
            }
            for sector in 0..=1u8 {
                let h = ModeLabel::Walk(ModeIndex::new(Polarization::H, g.bin, sector));
                let i = labels.iter().position(|&l| l == h).ok_or(Error::IndexOutOfRange {
                    index: g.bin,
                    len: self.labels.len(),
                })?;
                let picked: Vec<Complex64> = rows[i].iter().map(|a| a * g.efficiency.sqrt()).collect();
                for a in rows[i].iter_mut() {
                    *a *= (1.0 - g.efficiency).sqrt();
                }
                rows.push(picked);
                labels.push(ModeLabel::Routing { slot, sector });
            }
        }
        let w = CMatrix::from_fn(rows.len(), self.n_ports(), |i, p| rows[i][p]);
        Ok((labels, w))
    }

    /// Herald, bucket and gate detectors: idlers; every H walk mode; the
    /// routing modes of gate slot 0; those of slot 1.
    pub fn standard_sets(labels: &[ModeLabel]) -> LabelSets {
        let pick = |f: &dyn Fn(&ModeLabel) -> bool| labels.iter().copied().filter(|l| f(l)).collect();
        vec![
            pick(&|l| matches!(l, ModeLabel::Idler(_))),
            pick(&|l| matches!(l, ModeLabel::Walk(m) if m.pol == Polarization::H)),
            pick(&|l| matches!(l, ModeLabel::Routing { slot: 0, .. })),
            pick(&|l| matches!(l, ModeLabel::Routing { slot: 1, .. })),
        ]
    }

    /// Probability that every mode in `dark` is empty.
    pub fn no_click_prob(&self, labels: &[ModeLabel], w: &CMatrix, dark: &[ModeLabel]) -> Result<f64> {
        let p = self.n_ports();
        let mut t = CMatrix::identity(p, p);
        for l in dark {
            let i = labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| Error::InvalidConfig(format!("unknown detector mode {l}")))?;
            let row = w.row(i);
            t -= row.adjoint() * row;
        }
        Ok(self.expectation(&t))
    }

    /// `Σ_K w_K <ψ_K|Γ(T)|ψ_K>`.
    fn expectation(&self, t: &CMatrix) -> f64 {
        let mut blocks: Vec<Option<Vec<Vec<Complex64>>>> = vec![None; self.cutoff + 1];
        let mut total = 0.0;
        for (weight, psi) in &self.state.ensemble {
            let mut by_k: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); self.cutoff + 1];
            for (occ, &a) in psi.terms() {
                let (k, i) = self.ladder.index_of(occ).expect("occupation within cutoff");
                by_k[k].push((i, a));
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, terms) in by_k.iter().enumerate() {
                if terms.is_empty() {
                    continue;
                }
                let cols = blocks[k].get_or_insert_with(|| {
                    (0..self.ladder.sector(k).len())
                        .map(|c| self.ladder.transform_basis_state(t, k, c))
                        .collect()
                });
                for &(m, am) in terms {
                    for &(n, an) in terms {
                        acc += an.conj() * cols[m][n] * am;
                    }
                }
            }
            total += weight * acc.re;
        }
        total
    }

    /// Probabilities of all `2^J` click patterns for detectors given as mode
    /// sets, indexed by [`ClickPattern::bits`].
    pub fn pattern_probs_for(&self, labels: &[ModeLabel], w: &CMatrix, sets: &LabelSets) -> Result<Vec<f64>> {
        let j = sets.len();
        let mut p0 = vec![0.0; 1 << j];
        for (mask, slot) in p0.iter_mut().enumerate() {
            let dark: Vec<ModeLabel> = (0..j)
                .filter(|d| mask >> d & 1 == 1)
                .flat_map(|d| sets[d].iter().copied())
                .collect();
            *slot = self.no_click_prob(labels, w, &dark)?;
        }
        let full = (1 << j) - 1;
        let mut out = vec![0.0; 1 << j];
        for (bits, o) in out.iter_mut().enumerate() {
            let clicked = bits;
            let dark = full & !bits;
            // Σ over subsets T of the clicked detectors
            let mut sum = 0.0;
            let mut sub = clicked;
            loop {
                let sign = if sub.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                sum += sign * p0[dark | sub];
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & clicked;
            }
            *o = sum;
        }
        Ok(out)
    }

    /// All 16 patterns of the four standard detectors for a gate setting.
    pub fn pattern_probs(&self, gates: &[GateSpec]) -> Result<Vec<f64>> {
        let (labels, w) = self.routed(gates)?;
        let sets = Self::standard_sets(&labels);
        self.pattern_probs_for(&labels, &w, &sets)
    }
}

/// Push the input port columns through the walk (layer by layer, with the
/// crystal transmission), then apply detection and idler efficiencies.
fn propagate(input: &CMatrix, labels: &[ModeLabel], setup: &OracleSetup) -> Result<CMatrix> {
    let registry = setup.walk.registry();
    let sec = registry.sector_len();
    let mut out = input.clone();
    for p in 0..input.ncols() {
        for s in 0..2 {
            let mut v = nalgebra::DVector::from_fn(sec, |i, _| input[(s * sec + i, p)]);
            for layer in setup.walk.layers() {
                v = apply_step(layer, &v)? * Complex64::new(layer.transmission.sqrt(), 0.0);
            }
            for i in 0..sec {
                out[(s * sec + i, p)] = v[i] * setup.eta_sys.sqrt();
            }
        }
        for (i, l) in labels.iter().enumerate() {
            if matches!(l, ModeLabel::Idler(_)) {
                out[(i, p)] = input[(i, p)] * setup.eta_idler.sqrt();
            }
        }
    }
    Ok(out)
}

/// One pattern of the standard detectors.
pub fn oracle_pattern_prob(
    setup: &OracleSetup,
    gates: &[GateSpec],
    pattern: &ClickPattern,
    opts: &OracleOptions,
) -> Result<f64> {
    if pattern.clicks.len() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: pattern.clicks.len(),
        });
    }
    let oracle = FockOracle::new(setup, opts)?;
    Ok(oracle.pattern_probs(gates)?[pattern.bits()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::LayerParams;

    fn opts(cutoff: usize) -> OracleOptions {
        OracleOptions {
            cutoff,
            ..OracleOptions::default()
        }
    }

    #[test]
    fn vacuum_never_clicks() {
        let setup = OracleSetup::lossless(vec![], WalkConfig::balanced(2));
        let o = FockOracle::new(&setup, &opts(4)).unwrap();
        let p = o.pattern_probs(&[GateSpec::at(1, 0.97), GateSpec::at(2, 0.97)]).unwrap();
        assert_eq!(p[0], 1.0);
        assert!(p[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn photon_lost_half_the_time() {
        let setup = OracleSetup {
            eta_sys: 0.5,
            ..OracleSetup::lossless(vec![SourceSpec::fock1(ModeIndex::h(1))], WalkConfig::balanced(0))
        };
        let o = FockOracle::new(&setup, &opts(3)).unwrap();
        let (labels, w) = o.routed(&[]).unwrap();
        let walk: Vec<ModeLabel> = labels.iter().copied().filter(|l| matches!(l, ModeLabel::Walk(_))).collect();
        assert!((o.no_click_prob(&labels, &w, &walk).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn coherent_click_probability() {
        let setup = OracleSetup::lossless(
            vec![SourceSpec::coherent(ModeIndex::h(1), 0.1, 0.0, 0.6)],
            WalkConfig::balanced(0),
        );
        let o = FockOracle::new(&setup, &opts(12)).unwrap();
        let p = o.pattern_probs(&[]).unwrap();
        let bucket_click = p[1 << 1];
        assert!((bucket_click - (1.0 - (-0.1f64).exp())).abs() < 1e-12);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gate_splits_intensity() {
        let setup = OracleSetup::lossless(
            vec![SourceSpec::fock1(ModeIndex::h(1))],
            WalkConfig::uniform(1, LayerParams::lossless(0.0, 0.0)).unwrap(),
        );
        let o = FockOracle::new(&setup, &opts(2)).unwrap();
        let p = o.pattern_probs(&[GateSpec::at(1, 0.97)]).unwrap();
        assert!((p[1 << 2] - 0.97).abs() < 1e-14);
        assert!((p[1 << 1] - 0.03).abs() < 1e-14);
    }

    #[test]
    fn bounds_are_enforced() {
        let setup = OracleSetup::lossless(
            vec![SourceSpec::thermal(ModeIndex::h(1), 0.5)],
            WalkConfig::balanced(1),
        );
        assert!(matches!(FockOracle::new(&setup, &opts(4)), Err(Error::CutoffTooSmall { .. })));
        let big = OracleOptions {
            max_dim: 3,
            leak_bound: 1.0,
            ..opts(4)
        };
        assert!(matches!(FockOracle::new(&setup, &big), Err(Error::ResourceBound { .. })));
    }
}
