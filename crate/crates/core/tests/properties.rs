use num_complex::Complex;
use ofdm_papr::dsp::{
    dft_unitary, idft_unitary, occupied_bins, upconvert, zero_pad_interpolate_with, BasebandBlock, PadSplit,
    PassbandBlock, SpectrumBlock,
};
use ofdm_papr::fir::{stopband_template, FilterPreset, FrequencyMask};
use ofdm_papr::peak::{clip_baseband, clip_passband, composed_filter, papr_db, ChainPlan, Scheme};
use ofdm_papr::SimulationConfig;
use proptest::prelude::*;

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex<f64>>> {
    prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), len).prop_map(|v| v.into_iter().map(|(r, i)| Complex::new(r, i)).collect())
}

fn pow2_complex() -> impl Strategy<Value = Vec<Complex<f64>>> {
    (1u32..9).prop_flat_map(|p| complex_vec(1 << p))
}

fn energy(v: &[Complex<f64>]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

fn split() -> impl Strategy<Value = PadSplit> {
    prop_oneof![Just(PadSplit::Literal), Just(PadSplit::Symmetric)]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn dft_is_unitary(x in pow2_complex()) {
        let b = BasebandBlock::new(x.clone(), 1.0).unwrap();
        let s = dft_unitary(&b).unwrap();
        let e = energy(&x);
        prop_assert!((energy(s.bins()) - e).abs() <= 1e-12 * e.max(1e-300));
        let back = idft_unitary(&s).unwrap();
        let err: f64 = back.samples().iter().zip(&x).map(|(a, b)| (a - b).norm_sqr()).sum();
        prop_assert!(err.sqrt() <= 1e-12 * e.sqrt().max(1e-300));
    }

    #[test]
    fn zero_pad_preserves_energy_exactly(x in complex_vec(16), l in 1usize..9, sp in split()) {
        let s = SpectrumBlock::new(x.clone(), 1.0).unwrap();
        let p = zero_pad_interpolate_with(&s, l, sp).unwrap();
        prop_assert_eq!(p.len(), 16 * l);
        prop_assert_eq!(energy(p.bins()), energy(&x));
    }

    #[test]
    fn decimated_interpolation_matches_short_idft(x in complex_vec(32), l in 1usize..9, sp in split()) {
        let s = SpectrumBlock::new(x, 1.0).unwrap();
        let long = idft_unitary(&zero_pad_interpolate_with(&s, l, sp).unwrap()).unwrap();
        let short = idft_unitary(&s).unwrap();
        let g = 1.0 / (l as f64).sqrt();
        for (m, v) in short.samples().iter().enumerate() {
            prop_assert!((long.samples()[m * l] - v * g).norm() <= 1e-12 * (1.0 + v.norm()));
        }
    }

    #[test]
    fn papr_is_scale_invariant(x in complex_vec(64), c in 1e-3f64..1e3) {
        prop_assume!(energy(&x) > 0.0);
        let scaled: Vec<_> = x.iter().map(|v| v * c).collect();
        prop_assert!((papr_db(&x).unwrap() - papr_db(&scaled).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn baseband_clip_bound_and_idempotent(x in complex_vec(64), a in 0.1f64..12.0) {
        let b = BasebandBlock::new(x, 1.0).unwrap();
        let y = clip_baseband(&b, a).unwrap();
        prop_assert!(y.samples().iter().all(|v| v.norm() <= a));
        prop_assert_eq!(clip_baseband(&y, a).unwrap(), y);
    }

    #[test]
    fn passband_clip_bound_and_idempotent(x in prop::collection::vec(-10.0f64..10.0, 64), a in 0.1f64..12.0) {
        let b = PassbandBlock::new(x.clone(), 8.0, 2.0).unwrap();
        let y = clip_passband(&b, a).unwrap();
        prop_assert!(y.samples().iter().all(|v| v.abs() <= a));
        for (u, v) in x.iter().zip(y.samples()) {
            if u.abs() <= a { prop_assert_eq!(u, v); }
        }
        prop_assert_eq!(clip_passband(&y, a).unwrap(), y);
    }

    #[test]
    fn composed_filter_is_linear(
        x in prop::collection::vec(-5.0f64..5.0, 64),
        y in prop::collection::vec(-5.0f64..5.0, 64),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        g in prop::collection::vec(0.0f64..1.0, 33),
    ) {
        let mut gains = vec![0.0; 64];
        for k in 0..=32 { gains[k] = g[k]; gains[(64 - k) % 64] = g[k]; }
        let mask = FrequencyMask::new(gains).unwrap();
        let ones = FrequencyMask::all_pass(64);
        let f = |v: Vec<f64>| composed_filter(&PassbandBlock::new(v, 8.0, 2.0).unwrap(), &mask, &ones).unwrap().into_samples();
        let mix: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
        let lhs = f(mix);
        let (fx, fy) = (f(x), f(y));
        for i in 0..64 {
            prop_assert!((lhs[i] - (a * fx[i] + b * fy[i])).abs() < 1e-10);
        }
    }

    #[test]
    fn clip_only_papr_grows_with_ratio(seed in any::<u64>(), lo in 0.5f64..1.5, step in 0.01f64..0.5) {
        let cfg = SimulationConfig::default();
        let plan = plan(&cfg);
        let spec = qpsk_block(&plan, seed);
        let p_lo = plan.run(&spec, Scheme::ClipOnly, lo).unwrap().papr_db;
        let p_hi = plan.run(&spec, Scheme::ClipOnly, lo + step).unwrap().papr_db;
        prop_assert!(p_hi >= p_lo - 1e-12);
    }

    #[test]
    fn stop_bins_are_zero_after_template(seed in any::<u64>(), cr in 0.6f64..2.0, hpf in any::<bool>()) {
        let cfg = SimulationConfig::default();
        let plan = plan(&cfg);
        let (scheme, preset) = if hpf {
            (Scheme::ProposedHpf, FilterPreset::ProposedHpf)
        } else {
            (Scheme::ExistingBpf, FilterPreset::ExistingBpf)
        };
        let out = plan.run(&qpsk_block(&plan, seed), scheme, cr).unwrap();
        let template = stopband_template(&preset.spec(&cfg).unwrap(), cfg.block_len()).unwrap();
        let x: Vec<Complex<f64>> = out.passband.samples().iter().map(|&v| Complex::new(v, 0.0)).collect();
        let s = dft_unitary(&BasebandBlock::new(x, 1.0).unwrap()).unwrap();
        let scale = energy(s.bins()).sqrt();
        for (k, g) in template.gains().iter().enumerate() {
            if *g == 0.0 {
                prop_assert!(s.bins()[k].norm() <= 1e-13 * scale, "bin {} = {}", k, s.bins()[k]);
            }
        }
    }

    #[test]
    fn upconvert_keeps_power(x in complex_vec(32)) {
        let s = SpectrumBlock::new(x, 1.0).unwrap();
        let bb = idft_unitary(&zero_pad_interpolate_with(&s, 8, PadSplit::Literal).unwrap()).unwrap();
        let bb = BasebandBlock::new(bb.into_samples(), 8.0).unwrap();
        let pb = upconvert(&bb, 2.0).unwrap();
        let e_bb = energy(bb.samples());
        let e_pb: f64 = pb.samples().iter().map(|v| v * v).sum();
        prop_assert!((e_pb - e_bb).abs() <= 1e-10 * e_bb.max(1e-300));
    }
}

fn plan(cfg: &SimulationConfig) -> ChainPlan<f64> {
    use std::sync::OnceLock;
    static PLAN: OnceLock<ChainPlan<f64>> = OnceLock::new();
    assert_eq!(cfg, &SimulationConfig::default());
    PLAN.get_or_init(|| ChainPlan::new(cfg).unwrap()).clone()
}

fn qpsk_block(plan: &ChainPlan<f64>, seed: u64) -> SpectrumBlock<f64> {
    use ofdm_papr::modem::{generate_bits, map_symbols, ModulationScheme, SymbolBlock};
    let bits = generate_bits(2 * plan.config().num_subcarriers_n, seed);
    let sym: SymbolBlock<f64> = map_symbols(&bits, ModulationScheme::Qpsk).unwrap();
    plan.symbol_spectrum(sym.into_symbols()).unwrap()
}

#[test]
fn occupied_bins_are_distinct_and_in_range() {
    for sp in [PadSplit::Literal, PadSplit::Symmetric] {
        let b = occupied_bins(128, 8, sp).unwrap();
        let mut sorted = b.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 128);
        assert!(b.iter().all(|&i| i < 1024));
    }
}
