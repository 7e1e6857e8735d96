//! Equiripple designs checked against a minimax linear program solved on the
//! same dense grid.

mod common;

use common::{grid, lp_minimax};
use ofdm_papr::fir::{remez_design, Band, FilterSpec, FirFilter};

struct Case {
    name: &'static str,
    bands: &'static [(f64, f64, f64, f64)],
    taps: usize,
    /// Minimax ripple from the LP, frozen.
    ripple: f64,
}

const CASES: [Case; 3] = [
    Case {
        name: "lowpass21",
        bands: &[(0.0, 0.2, 1.0, 1.0), (0.3, 0.5, 0.0, 1.0)],
        taps: 21,
        ripple: 0.011382203255656,
    },
    Case {
        name: "highpass25",
        bands: &[(0.0, 0.18, 0.0, 1.0), (0.27, 0.5, 1.0, 1.0)],
        taps: 25,
        ripple: 0.006839378583451,
    },
    Case {
        name: "lowpass31_weighted",
        bands: &[(0.0, 0.15, 1.0, 1.0), (0.2, 0.5, 0.0, 4.0)],
        taps: 31,
        ripple: 0.050190640544417,
    },
];

fn design(case: &Case) -> FirFilter<f64> {
    let bands = case.bands.iter().map(|&(lo, hi, d, w)| Band::new(lo, hi, d, w)).collect();
    remez_design(&FilterSpec::new(bands, case.taps).unwrap(), 100, 1e-12).unwrap()
}

fn weighted_error(case: &Case, filter: &FirFilter<f64>) -> Vec<f64> {
    grid(case.bands, case.taps)
        .into_iter()
        .map(|(f, d, w)| w * (d - filter.amplitude_at(f)))
        .collect()
}

#[test]
fn ripple_matches_lp_oracle() {
    for case in &CASES {
        let (_, lp_ripple) = lp_minimax(case.bands, case.taps);
        let f = design(case);
        assert!(
            (f.achieved_ripple() - lp_ripple).abs() < 1e-5,
            "{}: remez {} lp {}",
            case.name,
            f.achieved_ripple(),
            lp_ripple
        );
        assert!((lp_ripple - case.ripple).abs() < 1e-9, "{}: lp {lp_ripple}", case.name);
    }
}

#[test]
fn taps_match_lp_oracle() {
    for case in &CASES {
        let (lp_taps, _) = lp_minimax(case.bands, case.taps);
        let f = design(case);
        for (i, (a, b)) in f.taps().iter().zip(&lp_taps).enumerate() {
            assert!((a - b).abs() < 1e-6, "{} tap {i}: {a} vs {b}", case.name);
        }
    }
}

#[test]
fn alternation_certificate() {
    for case in &CASES {
        let f = design(case);
        let err = weighted_error(case, &f);
        let delta = f.achieved_ripple();
        let max = err.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        assert!((max - delta).abs() <= 1e-12 * delta.max(1.0), "{}", case.name);
        // Greedy alternating walk over points that reach the ripple.
        let mut count = 0;
        let mut last_sign = 0.0;
        for &e in &err {
            if e.abs() >= delta * (1.0 - 1e-6) && e.signum() != last_sign {
                count += 1;
                last_sign = e.signum();
            }
        }
        let need = (case.taps - 1) / 2 + 2;
        assert!(count >= need, "{}: {count} alternations, need {need}", case.name);
    }
}

#[test]
fn lowpass21_has_twelve_extrema() {
    let f = design(&CASES[0]);
    let err = weighted_error(&CASES[0], &f);
    let d = f.achieved_ripple();
    let mut signs = Vec::new();
    for &e in &err {
        if e.abs() >= d * (1.0 - 1e-6) && signs.last() != Some(&e.signum()) {
            signs.push(e.signum());
        }
    }
    assert!(signs.len() >= 12);
}

#[test]
fn half_band_symmetry() {
    // Edges and weights symmetric about f = 0.25: taps at even offsets from the centre vanish.
    let spec = FilterSpec::<f64>::new(vec![Band::new(0.0, 0.2, 1.0, 1.0), Band::new(0.3, 0.5, 0.0, 1.0)], 23).unwrap();
    let f = remez_design(&spec, 100, 1e-12).unwrap();
    let m = 11;
    for k in (2..=m).step_by(2) {
        assert!(f.taps()[m + k].abs() < 1e-10, "tap {} = {}", m + k, f.taps()[m + k]);
    }
    assert!((f.taps()[m] - 0.5).abs() < 1e-10);
}

#[test]
fn ripple_falls_with_more_taps() {
    let mut last = f64::INFINITY;
    for taps in [11, 15, 21, 27, 33] {
        let spec = FilterSpec::new(vec![Band::new(0.0, 0.2, 1.0, 1.0), Band::new(0.3, 0.5, 0.0, 1.0)], taps).unwrap();
        let r = remez_design(&spec, 100, 1e-12).unwrap().achieved_ripple();
        assert!(r < last, "{taps} taps: {r} !< {last}");
        last = r;
    }
}

