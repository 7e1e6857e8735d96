//! PAPR measurement, amplitude clipping and the FFT/mask/IFFT composed filter,
//! assembled into the transmit chain for every scheme.
//!
//! Chain, per block of `N` symbols:
//!
//! ```text
//! zero-pad to L*N -> unitary IDFT -> upconvert to f_c -> clip at A = CR * rms
//!   -> composed filter (band-pass or high-pass mask, then template) -> PAPR
//! ```
//!
//! `rms` is measured per block on the unclipped passband signal. PAPR is
//! read on the final passband output, so peak regrowth from filtering is
//! included.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::config::SimulationConfig;
use crate::dsp::{self, BasebandBlock, Dft, PassbandBlock, SpectrumBlock};
use crate::error::{invalid_input, Error, Result};
use crate::fir::{
    mask_from_filter, remez_design, stopband_template, FilterPreset, FilterSpec, FirFilter, FrequencyMask,
};
use crate::scalar::Real;

/// Anything whose instantaneous power can be measured as a `T`.
pub trait Sample<T: Real>: Copy {
    fn power(self) -> T;
}

impl<T: Real> Sample<T> for T {
    #[inline]
    fn power(self) -> T {
        self * self
    }
}

impl<T: Real> Sample<T> for Complex<T> {
    #[inline]
    fn power(self) -> T {
        self.norm_sqr()
    }
}

fn peak_and_energy<T: Real, S: Sample<T>>(samples: &[S]) -> (T, T) {
    samples.iter().fold((T::zero(), T::zero()), |(pk, e), s| {
        let p = s.power();
        (pk.max(p), e + p)
    })
}

/// Root-mean-square magnitude.
pub fn rms<T: Real, S: Sample<T>>(samples: &[S]) -> Result<T> {
    if samples.is_empty() {
        return Err(invalid_input("rms of an empty block"));
    }
    let (_, energy) = peak_and_energy(samples);
    Ok((energy / T::from_count(samples.len())).sqrt())
}

/// `10 log10(max |x|^2 / mean |x|^2)`.
pub fn papr_db<T: Real, S: Sample<T>>(samples: &[S]) -> Result<T> {
    papr_db_windowed(samples, samples.len())
}

/// PAPR with the mean taken over `window_len >= samples.len()` positions,
/// the remainder being implicit zeros.
pub fn papr_db_windowed<T: Real, S: Sample<T>>(samples: &[S], window_len: usize) -> Result<T> {
    if samples.is_empty() {
        return Err(invalid_input("PAPR of an empty block"));
    }
    if window_len < samples.len() {
        return Err(invalid_input("window shorter than the block"));
    }
    let (peak, energy) = peak_and_energy(samples);
    if energy.is_zero() {
        return Err(Error::UndefinedPapr);
    }
    let mean = energy / T::from_count(window_len);
    Ok(T::lit(10.0) * (peak / mean).log10())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClipDomain {
    Baseband,
    Passband,
}

/// Clipping ratio `CR = A / rms`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipConfig {
    clipping_ratio: f64,
    pub domain: ClipDomain,
}

impl ClipConfig {
    pub fn new(clipping_ratio: f64, domain: ClipDomain) -> Result<Self> {
        if !(clipping_ratio.is_finite() && clipping_ratio > 0.0) {
            return Err(invalid_input(format!("clipping ratio {clipping_ratio} must be finite and > 0")));
        }
        Ok(Self { clipping_ratio, domain })
    }

    pub fn clipping_ratio(&self) -> f64 {
        self.clipping_ratio
    }

    /// Amplitude threshold for a signal of the given RMS.
    pub fn level<T: Real>(&self, rms: T) -> T {
        T::lit(self.clipping_ratio) * rms
    }
}

fn check_level<T: Real>(a: T) -> Result<()> {
    if a.is_finite() && a > T::zero() {
        Ok(())
    } else {
        Err(invalid_input(format!("clip level {a} must be finite and > 0")))
    }
}

/// Magnitude clamp that keeps each sample's phase.
pub fn clip_baseband<T: Real>(block: &BasebandBlock<T>, a: T) -> Result<BasebandBlock<T>> {
    check_level(a)?;
    let out = block
        .samples()
        .iter()
        .map(|&x| {
            let m = x.norm();
            if m <= a {
                return x;
            }
            // Rounding in the rescale can land one ulp above `a`.
            let mut y = x.scale(a / m);
            while y.norm() > a {
                y = y.scale(T::one() - T::epsilon());
            }
            y
        })
        .collect();
    BasebandBlock::new(out, block.sample_rate_hz())
}

/// Hard clamp of real samples to `[-a, a]`.
pub fn clip_passband<T: Real>(block: &PassbandBlock<T>, a: T) -> Result<PassbandBlock<T>> {
    check_level(a)?;
    Ok(block.with_samples(block.samples().iter().map(|&v| v.max(-a).min(a)).collect()))
}

/// A filter mask and template folded into one set of bin gains with a planned DFT.
#[derive(Debug, Clone)]
pub struct ComposedFilter<T: Real> {
    dft: Dft<T>,
    gains: Vec<T>,
}

impl<T: Real> ComposedFilter<T> {
    pub fn new(mask: &FrequencyMask<T>, template: &FrequencyMask<T>) -> Result<Self> {
        let combined = mask.combine(template)?;
        for k in 1..combined.len() {
            if combined.gains()[k] != combined.gains()[combined.len() - k] {
                return Err(invalid_input("composed filter gains must be symmetric for a real output"));
            }
        }
        Ok(Self {
            dft: Dft::new(combined.len())?,
            gains: combined.gains().to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    pub fn gains(&self) -> &[T] {
        &self.gains
    }

    pub fn apply(&self, samples: &[T]) -> Result<Vec<T>> {
        if samples.len() != self.len() {
            return Err(invalid_input(format!(
                "block of {} samples does not match filter length {}",
                samples.len(),
                self.len()
            )));
        }
        let mut buf: Vec<Complex<T>> = samples.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.dft.forward_in_place(&mut buf);
        for (b, &g) in buf.iter_mut().zip(&self.gains) {
            *b = b.scale(g);
        }
        self.dft.inverse_in_place(&mut buf);
        let scale = buf.iter().fold(T::min_positive_value(), |m, v| m.max(v.re.abs()));
        let residue = buf.iter().fold(T::zero(), |m, v| m.max(v.im.abs()));
        debug_assert!(
            residue <= scale * T::epsilon() * T::lit(1e5),
            "imaginary residue {residue} after composed filter"
        );
        Ok(buf.into_iter().map(|v| v.re).collect())
    }
}

/// FFT, multiply by `mask * template`, IFFT, keep the real part.
pub fn composed_filter<T: Real>(
    block: &PassbandBlock<T>,
    mask: &FrequencyMask<T>,
    inband_zero_template: &FrequencyMask<T>,
) -> Result<PassbandBlock<T>> {
    if mask.len() != block.len() || inband_zero_template.len() != block.len() {
        return Err(invalid_input("mask, template and block lengths must match"));
    }
    let f = ComposedFilter::new(mask, inband_zero_template)?;
    Ok(block.with_samples(f.apply(block.samples())?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    None,
    ClipOnly,
    ExistingBpf,
    ProposedHpf,
}

impl Scheme {
    pub fn all() -> [Scheme; 4] {
        [Scheme::None, Scheme::ClipOnly, Scheme::ExistingBpf, Scheme::ProposedHpf]
    }

    pub fn preset(self) -> Option<FilterPreset> {
        match self {
            Scheme::ExistingBpf => Some(FilterPreset::ExistingBpf),
            Scheme::ProposedHpf => Some(FilterPreset::ProposedHpf),
            _ => None,
        }
    }

    pub fn clips(self) -> bool {
        self != Scheme::None
    }

    /// Short tag used in output file names.
    pub fn tag(self) -> &'static str {
        match self {
            Scheme::None => "none",
            Scheme::ClipOnly => "clip_only",
            Scheme::ExistingBpf => "existing_bpf",
            Scheme::ProposedHpf => "proposed_hpf",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::None => "none",
            Scheme::ClipOnly => "clip_only",
            Scheme::ExistingBpf => "clip_filter_existing_bpf",
            Scheme::ProposedHpf => "clip_filter_proposed_hpf",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "clip_only" => Ok(Self::ClipOnly),
            "clip_filter_existing_bpf" | "existing_bpf" | "existing" => Ok(Self::ExistingBpf),
            "clip_filter_proposed_hpf" | "proposed_hpf" | "proposed" => Ok(Self::ProposedHpf),
            other => Err(Error::InvalidConfig(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Over which window the mean power in the PAPR is taken.
///
/// `Block` uses the `L*N` samples of the block alone. `Guarded` places the
/// CP-extended block in a `2*L*N` frame padded with zeros and averages over
/// the whole frame; this is the framing behind the commonly quoted
/// 13.5 dB unclipped figure for `N = 128`, `L = 8`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PaprFrame {
    Block,
    #[default]
    Guarded,
}

impl fmt::Display for PaprFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PaprFrame::Block => "block",
            PaprFrame::Guarded => "guarded",
        })
    }
}

impl FromStr for PaprFrame {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "block" => Ok(Self::Block),
            "guarded" => Ok(Self::Guarded),
            other => Err(Error::InvalidConfig(format!("unknown papr_frame '{other}'"))),
        }
    }
}

/// Which bins the composed filter forces back to zero.
///
/// `Stopband` zeroes the bins inside the filter's stop bands.
/// `SignalImage` keeps only the passband image of the occupied subcarriers,
/// which makes every filter preset behave identically in-band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TemplateKind {
    #[default]
    Stopband,
    SignalImage,
}

impl fmt::Display for TemplateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TemplateKind::Stopband => "stopband",
            TemplateKind::SignalImage => "signal_image",
        })
    }
}

impl FromStr for TemplateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stopband" => Ok(Self::Stopband),
            "signal_image" => Ok(Self::SignalImage),
            other => Err(Error::InvalidConfig(format!("unknown template '{other}'"))),
        }
    }
}

/// Carrier position on the `L*N` grid; must be a whole bin.
fn carrier_bin(config: &SimulationConfig) -> Result<usize> {
    let exact = config.carrier_freq_hz / config.sample_rate_hz() * config.block_len() as f64;
    let bin = exact.round();
    if (exact - bin).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "carrier {} Hz does not fall on a bin of the {}-point grid",
            config.carrier_freq_hz,
            config.block_len()
        )));
    }
    Ok(bin as usize)
}

/// Ones at the passband bins carrying the subcarrier images, zero elsewhere.
pub fn image_template<T: Real>(config: &SimulationConfig) -> Result<FrequencyMask<T>> {
    let total = config.block_len();
    let fc = carrier_bin(config)?;
    let mut gains = vec![T::zero(); total];
    for b in dsp::occupied_bins(config.num_subcarriers_n, config.oversampling_l, config.pad_split)? {
        let offset = if b < total / 2 { b as isize } else { b as isize - total as isize };
        let pos = (fc as isize + offset).rem_euclid(total as isize) as usize;
        gains[pos] = T::one();
        gains[(total - pos) % total] = T::one();
    }
    FrequencyMask::new(gains)
}

/// Template for a preset under the configured [`TemplateKind`].
pub fn template_for<T: Real>(config: &SimulationConfig, spec: &FilterSpec<f64>) -> Result<FrequencyMask<T>> {
    match config.template {
        TemplateKind::Stopband => {
            let t = stopband_template(spec, config.block_len())?;
            FrequencyMask::new(t.gains().iter().map(|&g| T::lit(g)).collect())
        }
        TemplateKind::SignalImage => image_template(config),
    }
}

/// Final output of the transmit chain for one block.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput<T> {
    pub passband: PassbandBlock<T>,
    pub papr_db: T,
    /// `A = CR * rms`; infinite when the scheme does not clip.
    pub clip_level_a: T,
}

/// Everything the chain needs that does not change from block to block:
/// the transform plan and both composed filters.
#[derive(Debug, Clone)]
pub struct ChainPlan<T: Real> {
    config: SimulationConfig,
    dft: Dft<T>,
    bpf: ComposedFilter<T>,
    hpf: ComposedFilter<T>,
    bpf_design: FirFilter<f64>,
    hpf_design: FirFilter<f64>,
}

/// Designs a preset filter with the crate's standard exchange settings.
pub fn design_preset(config: &SimulationConfig, preset: FilterPreset) -> Result<(FilterSpec<f64>, FirFilter<f64>)> {
    let spec = preset.spec(config)?;
    let filter = remez_design(&spec, 200, 1e-9)?;
    Ok((spec, filter))
}

impl<T: Real> ChainPlan<T> {
    pub fn new(config: &SimulationConfig) -> Result<Self> {
        config.validate()?;
        let n = config.block_len();
        let fs = config.sample_rate_hz();
        let build = |preset| -> Result<(ComposedFilter<T>, FirFilter<f64>)> {
            let (spec, design) = design_preset(config, preset)?;
            let mask = mask_from_filter(&design.cast::<T>(), n, T::lit(fs))?;
            let template = template_for::<T>(config, &spec)?;
            Ok((ComposedFilter::new(&mask, &template)?, design))
        };
        let (bpf, bpf_design) = build(FilterPreset::ExistingBpf)?;
        let (hpf, hpf_design) = build(FilterPreset::ProposedHpf)?;
        Ok(Self {
            config: config.clone(),
            dft: Dft::new(n)?,
            bpf,
            hpf,
            bpf_design,
            hpf_design,
        })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn design(&self, preset: FilterPreset) -> Option<&FirFilter<f64>> {
        match preset {
            FilterPreset::ExistingBpf => Some(&self.bpf_design),
            FilterPreset::ProposedHpf => Some(&self.hpf_design),
            FilterPreset::ReceiverLpf => None,
        }
    }

    pub fn composed(&self, scheme: Scheme) -> Option<&ComposedFilter<T>> {
        match scheme {
            Scheme::ExistingBpf => Some(&self.bpf),
            Scheme::ProposedHpf => Some(&self.hpf),
            _ => None,
        }
    }

    /// `N` subcarrier symbols as a spectrum with the configured bin spacing.
    pub fn symbol_spectrum(&self, symbols: Vec<Complex<T>>) -> Result<SpectrumBlock<T>> {
        let cfg = &self.config;
        if symbols.len() != cfg.num_subcarriers_n {
            return Err(invalid_input(format!(
                "expected {} symbols, got {}",
                cfg.num_subcarriers_n,
                symbols.len()
            )));
        }
        SpectrumBlock::new(symbols, T::lit(cfg.bandwidth_hz / cfg.num_subcarriers_n as f64))
    }

    /// Zero-pad, IDFT and upconvert.
    pub fn modulate(&self, symbols: &SpectrumBlock<T>) -> Result<PassbandBlock<T>> {
        let cfg = &self.config;
        if symbols.len() != cfg.num_subcarriers_n {
            return Err(invalid_input(format!(
                "expected {} symbols, got {}",
                cfg.num_subcarriers_n,
                symbols.len()
            )));
        }
        let padded = dsp::zero_pad_interpolate_with(symbols, cfg.oversampling_l, cfg.pad_split)?;
        let mut samples = padded.into_bins();
        self.dft.inverse_in_place(&mut samples);
        let baseband = BasebandBlock::new(samples, T::lit(cfg.sample_rate_hz()))?;
        dsp::upconvert(&baseband, T::lit(cfg.carrier_freq_hz))
    }

    pub fn run(&self, symbols: &SpectrumBlock<T>, scheme: Scheme, clipping_ratio: f64) -> Result<ChainOutput<T>> {
        let unclipped = self.modulate(symbols)?;
        let (passband, clip_level_a) = if scheme.clips() {
            let clip = ClipConfig::new(clipping_ratio, ClipDomain::Passband)?;
            let a = clip.level(rms(unclipped.samples())?);
            let clipped = clip_passband(&unclipped, a)?;
            let out = match self.composed(scheme) {
                Some(f) => clipped.with_samples(f.apply(clipped.samples())?),
                None => clipped,
            };
            (out, a)
        } else {
            (unclipped, T::infinity())
        };
        let papr_db = self.measure_papr(passband.samples())?;
        Ok(ChainOutput {
            passband,
            papr_db,
            clip_level_a,
        })
    }

    /// Cyclic prefix of `cp_len * L` samples prepended.
    pub fn add_cyclic_prefix(&self, block: &[T]) -> Vec<T> {
        add_cyclic_prefix(block, self.config.cp_len * self.config.oversampling_l)
    }

    /// The transmitted frame: the chain output with its cyclic prefix.
    pub fn transmit_frame(&self, output: &ChainOutput<T>) -> PassbandBlock<T> {
        output.passband.with_samples(self.add_cyclic_prefix(output.passband.samples()))
    }

    /// PAPR of a final `L*N` block under the configured [`PaprFrame`].
    pub fn measure_papr(&self, block: &[T]) -> Result<T> {
        match self.config.papr_frame {
            PaprFrame::Block => papr_db(block),
            PaprFrame::Guarded => {
                let frame = self.add_cyclic_prefix(block);
                let window = (2 * self.config.block_len()).max(frame.len());
                papr_db_windowed(&frame, window)
            }
        }
    }
}

pub fn add_cyclic_prefix<T: Copy>(block: &[T], cp: usize) -> Vec<T> {
    let cp = cp.min(block.len());
    let mut out = Vec::with_capacity(block.len() + cp);
    out.extend_from_slice(&block[block.len() - cp..]);
    out.extend_from_slice(block);
    out
}

pub fn strip_cyclic_prefix<T: Copy>(frame: &[T], cp: usize) -> Result<&[T]> {
    if cp > frame.len() {
        return Err(invalid_input("frame shorter than its cyclic prefix"));
    }
    Ok(&frame[cp..])
}

/// One-shot chain run; builds a [`ChainPlan`] every call.
pub fn run_chain<T: Real>(
    symbols: &SpectrumBlock<T>,
    config: &SimulationConfig,
    scheme: Scheme,
    clipping_ratio: f64,
) -> Result<ChainOutput<T>> {
    ChainPlan::new(config)?.run(symbols, scheme, clipping_ratio)
}
