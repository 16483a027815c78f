use proptest::prelude::*;

use qwalk::detection::{
    all_pattern_probs, build_layout, detector_mean_photon, event_prob, heralded_prob, no_click_prob, pattern_prob,
    ClickEvent, ClickPattern, DetectorLayout, GateSpec, BUCKET, GATE_A, GATE_B, HERALD,
};
use qwalk::error::Error;
use qwalk::experiments::{pattern_table, propagate, ExperimentKind, ExperimentSpec, PairSource};
use qwalk::gaussian::{prepare, GaussianState, ModeLabel, SourceSpec};
use qwalk::walk::{ModeIndex, ModeRegistry};

fn reg() -> ModeRegistry {
    ModeRegistry::new(4).unwrap()
}

fn one(state: &GaussianState, m: ModeIndex) -> Vec<usize> {
    vec![state.index_of(ModeLabel::Walk(m)).unwrap()]
}

#[test]
fn no_click_examples() {
    let vac = prepare(&[], &reg()).unwrap();
    assert_eq!(no_click_prob(&vac, &[0, 1, 2]).unwrap(), 1.0);
    let coh = prepare(&[SourceSpec::coherent(ModeIndex::h(1), 0.1, 0.3, 1.0)], &reg()).unwrap();
    assert!((no_click_prob(&coh, &one(&coh, ModeIndex::h(1))).unwrap() - (-0.1f64).exp()).abs() < 1e-15);
    let th = prepare(&[SourceSpec::thermal(ModeIndex::h(1), 0.026)], &reg()).unwrap();
    assert!((no_click_prob(&th, &one(&th, ModeIndex::h(1))).unwrap() - 1.0 / 1.026).abs() < 1e-15);
}

#[test]
fn pattern_examples() {
    let vac = prepare(&[], &reg()).unwrap();
    let layout = DetectorLayout::new(vec![vec![0], vec![1, 2]]).unwrap();
    assert_eq!(pattern_prob(&vac, &layout, &ClickPattern::from_bits(0, 2)).unwrap(), 1.0);

    let mu = 0.37;
    let coh = prepare(&[SourceSpec::coherent(ModeIndex::h(2), mu, 0.0, 1.0)], &reg()).unwrap();
    let layout = DetectorLayout::new(vec![one(&coh, ModeIndex::h(2))]).unwrap();
    let p = pattern_prob(&coh, &layout, &ClickPattern::from_bits(1, 1)).unwrap();
    assert!((p - (-(-mu).exp_m1())).abs() < 1e-15);
}

#[test]
fn layout_examples() {
    let coh = prepare(&[SourceSpec::coherent(ModeIndex::h(3), 0.2, 0.0, 1.0)], &reg()).unwrap();
    let (_, l) = build_layout(&coh, &[GateSpec::off(), GateSpec::off()]).unwrap();
    assert_eq!(l.modes(BUCKET).len(), 2 * 4);
    assert!(l.modes(GATE_A).is_empty() && l.modes(GATE_B).is_empty());

    let (r, l) = build_layout(&coh, &[GateSpec::at(3, 1.0), GateSpec::off()]).unwrap();
    assert!((detector_mean_photon(&r, &l, GATE_A) - 0.2).abs() < 1e-15);
    assert!(detector_mean_photon(&r, &l, BUCKET).abs() < 1e-15);

    let (r, l) = build_layout(&coh, &[GateSpec::at(3, 0.97), GateSpec::off()]).unwrap();
    assert!((detector_mean_photon(&r, &l, GATE_A) - 0.97 * 0.2).abs() < 1e-15);
    assert!((detector_mean_photon(&r, &l, BUCKET) - 0.03 * 0.2).abs() < 1e-15);

    assert_eq!(
        build_layout(&coh, &[GateSpec::at(2, 0.9), GateSpec::at(2, 0.9)]).unwrap_err(),
        Error::DuplicateGateBin(2)
    );
}

#[test]
fn herald_rates() {
    let s = prepare(&[SourceSpec::coherent(ModeIndex::h(1), 0.2, 0.0, 1.0)], &reg()).unwrap();
    let (r, l) = build_layout(&s, &[]).unwrap();
    assert_eq!(heralded_prob(&r, &l, &ClickEvent::any(4)).unwrap_err(), Error::ZeroHeraldRate);

    let mu = 0.026;
    let t = prepare(&[SourceSpec::tmsv(ModeIndex::h(1), mu)], &reg()).unwrap();
    let (r, l) = build_layout(&t, &[]).unwrap();
    let p = event_prob(&r, &l, &ClickEvent::any(4).with(HERALD, true)).unwrap();
    assert!((p - mu / (1.0 + mu)).abs() < 1e-15);
    assert!((p - 0.02534).abs() < 5e-6);
}

#[test]
fn squashed_heralds_worse_than_tmsv() {
    let signal = |s: SourceSpec| {
        let st = prepare(&[s], &reg()).unwrap();
        let (r, l) = build_layout(&st, &[]).unwrap();
        heralded_prob(&r, &l, &ClickEvent::any(4).with(BUCKET, true)).unwrap()
    };
    let t = signal(SourceSpec::tmsv(ModeIndex::h(1), 0.026));
    let q = signal(SourceSpec::squashed(ModeIndex::h(1), 0.026));
    assert!(q < t, "squashed {q} vs tmsv {t}");
}

fn spec() -> impl Strategy<Value = ExperimentSpec> {
    (1usize..=4, 0.0..1.0f64, 0.0..0.2f64, 0.0..=1.0f64, 0.8..=1.0f64, any::<bool>()).prop_map(
        |(n, ma, mx, o, ek, sq)| ExperimentSpec {
            mu_alpha: ma,
            mu_xi: mx,
            overlap: o,
            eta_kerr: ek,
            pair_source: if sq { PairSource::Squashed } else { PairSource::Tmsv },
            ..ExperimentSpec::setup_defaults(n, ExperimentKind::TwoFold)
        },
    )
}

fn gates(n: usize) -> impl Strategy<Value = (usize, usize)> {
    (1..=n + 1, 1..=n + 1).prop_filter("distinct", |(a, b)| a != b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn patterns_are_complete(s in spec(), seed in 0usize..100) {
        let bins = s.walk.n_steps() + 1;
        let (a, b) = (1 + seed % bins, 1 + (seed / bins) % bins);
        let g = if a == b { vec![GateSpec::at(a, s.eta_kerr)] } else { vec![GateSpec::at(a, s.eta_kerr), GateSpec::at(b, s.eta_kerr)] };
        let p = pattern_table(&s, &g).unwrap();
        prop_assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn system_loss_never_adds_clicks(s in spec(), lo in 0.0..=1.0f64, hi in 0.0..=1.0f64) {
        let (lo, hi) = if lo < hi { (lo, hi) } else { (hi, lo) };
        let g = vec![GateSpec::at(1, s.eta_kerr), GateSpec::at(2, s.eta_kerr)];
        let worse = ExperimentSpec { eta_sys: lo, ..s.clone() };
        let better = ExperimentSpec { eta_sys: hi, ..s.clone() };
        let st_w = propagate(&worse, false).unwrap();
        let st_b = propagate(&better, false).unwrap();
        let (rw, lw) = build_layout(&st_w, &g).unwrap();
        let (rb, lb) = build_layout(&st_b, &g).unwrap();
        // Any event asking only for clicks among walk detectors.
        for mask in 1usize..8 {
            let dets: Vec<usize> = (0..3).filter(|k| mask >> k & 1 == 1).map(|k| BUCKET + k).collect();
            let e = ClickEvent::clicks(4, &dets);
            prop_assert!(event_prob(&rw, &lw, &e).unwrap() <= event_prob(&rb, &lb, &e).unwrap() + 1e-12);
        }
    }

    #[test]
    fn second_gate_marginalizes_out(s in spec(), seed in 0usize..100) {
        let bins = s.walk.n_steps() + 1;
        let (a, b) = (1 + seed % bins, 1 + (seed / 7) % bins);
        prop_assume!(a != b);
        let st = propagate(&s, false).unwrap();
        let (r2, l2) = build_layout(&st, &[GateSpec::at(a, s.eta_kerr), GateSpec::at(b, s.eta_kerr)]).unwrap();
        let (r1, l1) = build_layout(&st, &[GateSpec::at(a, s.eta_kerr)]).unwrap();
        for c in [false, true] {
            let joint: f64 = [false, true]
                .iter()
                .map(|&d| event_prob(&r2, &l2, &ClickEvent::any(4).with(GATE_A, c).with(GATE_B, d)).unwrap())
                .sum();
            let single = event_prob(&r1, &l1, &ClickEvent::any(4).with(GATE_A, c)).unwrap();
            prop_assert!((joint - single).abs() < 1e-9);
        }
    }

    #[test]
    fn gate_order_is_immaterial(s in spec(), (a, b) in gates(4)) {
        let bins = s.walk.n_steps() + 1;
        prop_assume!(a <= bins && b <= bins);
        let st = propagate(&s, false).unwrap();
        let (r, l) = build_layout(&st, &[GateSpec::at(a, s.eta_kerr), GateSpec::at(b, s.eta_kerr)]).unwrap();
        let (rs, ls) = build_layout(&st, &[GateSpec::at(b, s.eta_kerr), GateSpec::at(a, s.eta_kerr)]).unwrap();
        let p = all_pattern_probs(&r, &l).unwrap();
        let q = all_pattern_probs(&rs, &ls).unwrap();
        for bits in 0..16usize {
            // Swapping the gates swaps detectors 2 and 3.
            let swapped = (bits & 0b0011) | (bits >> 1 & 0b0100) | (bits << 1 & 0b1000);
            prop_assert!((p[bits] - q[swapped]).abs() < 1e-12);
        }
    }

    #[test]
    fn relabeling_detectors_permutes_patterns(s in spec()) {
        let st = propagate(&s, false).unwrap();
        let (r, l) = build_layout(&st, &[GateSpec::at(1, s.eta_kerr)]).unwrap();
        let perm = [2usize, 0, 3, 1];
        let moved = DetectorLayout::new(perm.iter().map(|&d| l.modes(d).to_vec()).collect()).unwrap();
        let p = all_pattern_probs(&r, &l).unwrap();
        let q = all_pattern_probs(&r, &moved).unwrap();
        for bits in 0..16usize {
            let mapped: usize = (0..4).filter(|&k| bits >> perm[k] & 1 == 1).map(|k| 1 << k).sum();
            prop_assert!((p[bits] - q[mapped]).abs() < 1e-12);
        }
    }
}
