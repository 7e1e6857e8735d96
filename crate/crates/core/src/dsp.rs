//! Sample containers, unitary DFT/IDFT, mid-spectrum zero-pad interpolation
//! and passband up/down conversion.
//!
//! All transforms use the unitary `1/sqrt(M)` scaling in both directions, so
//! `idft_unitary(dft_unitary(x)) == x` and energy is preserved.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid_input, Result};
use crate::fir::FirFilter;
use crate::scalar::Real;

pub type ComplexSample<T> = Complex<T>;

fn check_finite_complex<T: Real>(samples: &[Complex<T>]) -> Result<()> {
    if samples.iter().all(|s| s.re.is_finite() && s.im.is_finite()) {
        Ok(())
    } else {
        Err(invalid_input("block contains a non-finite sample"))
    }
}

fn check_rate<T: Real>(rate: T, what: &str) -> Result<()> {
    if rate.is_finite() && rate > T::zero() {
        Ok(())
    } else {
        Err(invalid_input(format!("{what} must be finite and > 0")))
    }
}

/// Complex baseband samples at a given sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct BasebandBlock<T> {
    samples: Vec<Complex<T>>,
    sample_rate_hz: T,
}

impl<T: Real> BasebandBlock<T> {
    pub fn new(samples: Vec<Complex<T>>, sample_rate_hz: T) -> Result<Self> {
        check_finite_complex(&samples)?;
        check_rate(sample_rate_hz, "sample rate")?;
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[Complex<T>] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex<T>> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> T {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// DFT bins with the spacing between adjacent bins.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumBlock<T> {
    bins: Vec<Complex<T>>,
    bin_spacing_hz: T,
}

impl<T: Real> SpectrumBlock<T> {
    pub fn new(bins: Vec<Complex<T>>, bin_spacing_hz: T) -> Result<Self> {
        check_finite_complex(&bins)?;
        check_rate(bin_spacing_hz, "bin spacing")?;
        Ok(Self {
            bins,
            bin_spacing_hz,
        })
    }

    pub fn bins(&self) -> &[Complex<T>] {
        &self.bins
    }

    pub fn into_bins(self) -> Vec<Complex<T>> {
        self.bins
    }

    pub fn bin_spacing_hz(&self) -> T {
        self.bin_spacing_hz
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn energy(&self) -> T {
        self.bins.iter().map(|b| b.norm_sqr()).fold(T::zero(), |a, b| a + b)
    }
}

/// Real passband samples riding on a carrier.
#[derive(Debug, Clone, PartialEq)]
pub struct PassbandBlock<T> {
    samples: Vec<T>,
    sample_rate_hz: T,
    carrier_freq_hz: T,
}

impl<T: Real> PassbandBlock<T> {
    pub fn new(samples: Vec<T>, sample_rate_hz: T, carrier_freq_hz: T) -> Result<Self> {
        if !samples.iter().all(|s| s.is_finite()) {
            return Err(invalid_input("block contains a non-finite sample"));
        }
        check_rate(sample_rate_hz, "sample rate")?;
        check_rate(carrier_freq_hz, "carrier frequency")?;
        if carrier_freq_hz >= sample_rate_hz / T::lit(2.0) {
            return Err(invalid_input(format!(
                "carrier {carrier_freq_hz} Hz is not representable at {sample_rate_hz} Hz"
            )));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
            carrier_freq_hz,
        })
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> T {
        self.sample_rate_hz
    }

    pub fn carrier_freq_hz(&self) -> T {
        self.carrier_freq_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Same carrier and rate, new samples.
    pub fn with_samples(&self, samples: Vec<T>) -> Self {
        Self {
            samples,
            sample_rate_hz: self.sample_rate_hz,
            carrier_freq_hz: self.carrier_freq_hz,
        }
    }
}

/// A planned unitary DFT of fixed length, reusable across blocks and threads.
#[derive(Clone)]
pub struct Dft<T: Real> {
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    scale: T,
}

impl<T: Real> std::fmt::Debug for Dft<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dft").field("len", &self.len()).finish()
    }
}

impl<T: Real> Dft<T> {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(invalid_input("transform length must be >= 1"));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            scale: T::one() / T::from_count(len).sqrt(),
        })
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// In-place unitary forward transform.
    pub fn forward_in_place(&self, buf: &mut [Complex<T>]) {
        assert_eq!(buf.len(), self.len(), "buffer length does not match plan");
        self.forward.process(buf);
        buf.iter_mut().for_each(|v| *v = v.scale(self.scale));
    }

    /// In-place unitary inverse transform.
    pub fn inverse_in_place(&self, buf: &mut [Complex<T>]) {
        assert_eq!(buf.len(), self.len(), "buffer length does not match plan");
        self.inverse.process(buf);
        buf.iter_mut().for_each(|v| *v = v.scale(self.scale));
    }
}

pub fn dft_unitary<T: Real>(block: &BasebandBlock<T>) -> Result<SpectrumBlock<T>> {
    if block.is_empty() {
        return Err(invalid_input("cannot transform an empty block"));
    }
    let dft = Dft::new(block.len())?;
    let mut bins = block.samples.clone();
    dft.forward_in_place(&mut bins);
    SpectrumBlock::new(bins, block.sample_rate_hz / T::from_count(block.len()))
}

pub fn idft_unitary<T: Real>(spectrum: &SpectrumBlock<T>) -> Result<BasebandBlock<T>> {
    if spectrum.is_empty() {
        return Err(invalid_input("cannot transform an empty spectrum"));
    }
    let dft = Dft::new(spectrum.len())?;
    let mut samples = spectrum.bins.clone();
    dft.inverse_in_place(&mut samples);
    BasebandBlock::new(samples, spectrum.bin_spacing_hz * T::from_count(spectrum.len()))
}

/// Where the `N` subcarriers land on the `L*N` interpolation grid.
///
/// `Literal` keeps bins `0..=N/2` at the low end and `N/2 - 1` bins at the
/// top, so the Nyquist-adjacent subcarrier rides with the positive
/// frequencies. `Symmetric` keeps `N/2` bins on each side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PadSplit {
    #[default]
    Literal,
    Symmetric,
}

impl PadSplit {
    /// Number of subcarriers kept at the low (non-negative frequency) end.
    fn low_count(self, n: usize) -> usize {
        match self {
            PadSplit::Literal => n / 2 + 1,
            PadSplit::Symmetric => n / 2,
        }
    }
}

fn check_grid(n: usize, l: usize) -> Result<()> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(invalid_input(format!("subcarrier count {n} must be even and > 0")));
    }
    if l == 0 {
        return Err(invalid_input("oversampling factor must be >= 1"));
    }
    Ok(())
}

/// Indices into the `L*N` grid occupied by subcarriers `0..N`, in subcarrier order.
pub fn occupied_bins(n: usize, l: usize, split: PadSplit) -> Result<Vec<usize>> {
    check_grid(n, l)?;
    let total = n * l;
    let low = split.low_count(n);
    Ok((0..n)
        .map(|k| if k < low { k } else { k + total - n })
        .collect())
}

/// Inserts `N(L-1)` zeros in the middle of an `N`-bin spectrum.
pub fn zero_pad_interpolate<T: Real>(
    symbols: &SpectrumBlock<T>,
    l: usize,
) -> Result<SpectrumBlock<T>> {
    zero_pad_interpolate_with(symbols, l, PadSplit::Literal)
}

pub fn zero_pad_interpolate_with<T: Real>(
    symbols: &SpectrumBlock<T>,
    l: usize,
    split: PadSplit,
) -> Result<SpectrumBlock<T>> {
    let n = symbols.len();
    let idx = occupied_bins(n, l, split)?;
    let mut out = vec![Complex::new(T::zero(), T::zero()); n * l];
    for (k, &dst) in idx.iter().enumerate() {
        out[dst] = symbols.bins[k];
    }
    Ok(SpectrumBlock {
        bins: out,
        bin_spacing_hz: symbols.bin_spacing_hz,
    })
}

/// Inverse of [`zero_pad_interpolate_with`]: pulls the `N` subcarriers back
/// out of an `L*N` spectrum.
pub fn extract_subcarriers<T: Real>(
    spectrum: &SpectrumBlock<T>,
    n: usize,
    split: PadSplit,
) -> Result<SpectrumBlock<T>> {
    if n == 0 || !spectrum.len().is_multiple_of(n) {
        return Err(invalid_input(format!(
            "spectrum length {} is not a multiple of {n}",
            spectrum.len()
        )));
    }
    let idx = occupied_bins(n, spectrum.len() / n, split)?;
    Ok(SpectrumBlock {
        bins: idx.iter().map(|&i| spectrum.bins[i]).collect(),
        bin_spacing_hz: spectrum.bin_spacing_hz,
    })
}

fn carrier_step<T: Real>(carrier_freq_hz: T, sample_rate_hz: T) -> T {
    T::TAU() * carrier_freq_hz / sample_rate_hz
}

/// `sqrt(2) * Re{x[m] exp(j 2 pi fc m / fs)}`; passband power equals
/// baseband envelope power.
pub fn upconvert<T: Real>(block: &BasebandBlock<T>, carrier_freq_hz: T) -> Result<PassbandBlock<T>> {
    if block.is_empty() {
        return Err(invalid_input("cannot upconvert an empty block"));
    }
    let fs = block.sample_rate_hz;
    if !(carrier_freq_hz > T::zero() && carrier_freq_hz < fs / T::lit(2.0)) {
        return Err(invalid_input(format!(
            "carrier {carrier_freq_hz} Hz aliases at sample rate {fs} Hz"
        )));
    }
    let w = carrier_step(carrier_freq_hz, fs);
    let gain = T::SQRT_2();
    let samples = block
        .samples
        .iter()
        .enumerate()
        .map(|(m, x)| {
            let (s, c) = (w * T::from_count(m)).sin_cos();
            gain * (x.re * c - x.im * s)
        })
        .collect();
    PassbandBlock::new(samples, fs, carrier_freq_hz)
}

/// Multiplies by `sqrt(2) exp(-j 2 pi fc m / fs)` without any filtering.
/// The image at `-2 fc` is left in place.
pub fn mix_down<T: Real>(block: &PassbandBlock<T>) -> Vec<Complex<T>> {
    let w = carrier_step(block.carrier_freq_hz, block.sample_rate_hz);
    let gain = T::SQRT_2();
    block
        .samples
        .iter()
        .enumerate()
        .map(|(m, &v)| {
            let (s, c) = (w * T::from_count(m)).sin_cos();
            Complex::new(gain * v * c, -gain * v * s)
        })
        .collect()
}

/// Mixes to baseband and removes the `2 fc` image with `lpf`.
///
/// Filtering is a linear convolution aligned on the filter's group delay, so
/// the output has the same length as the input; the first and last
/// `(taps - 1) / 2` samples carry edge transients.
pub fn downconvert<T: Real>(block: &PassbandBlock<T>, lpf: &FirFilter<T>) -> Result<BasebandBlock<T>> {
    let taps = lpf.taps();
    if taps.is_empty() || taps.len().is_multiple_of(2) {
        return Err(invalid_input("low-pass filter must have an odd, nonzero tap count"));
    }
    if taps.iter().all(|t| t.is_zero()) || !taps.iter().all(|t| t.is_finite()) {
        return Err(invalid_input("low-pass filter is degenerate"));
    }
    let mixed = mix_down(block);
    let half = taps.len() / 2;
    let n = mixed.len();
    let zero = Complex::new(T::zero(), T::zero());
    let filtered = (0..n)
        .map(|i| {
            // y[i] = sum_k h[k] x[i + half - k]
            let lo = (i + half + 1).saturating_sub(n);
            let hi = (i + half).min(taps.len() - 1);
            (lo..=hi).fold(zero, |acc, k| acc + mixed[i + half - k].scale(taps[k]))
        })
        .collect();
    BasebandBlock::new(filtered, block.sample_rate_hz)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn bb(v: Vec<Complex<f64>>) -> BasebandBlock<f64> {
        BasebandBlock::new(v, 1.0).unwrap()
    }

    fn close(a: &[Complex<f64>], b: &[Complex<f64>], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn impulse_and_constant() {
        let s = dft_unitary(&bb(vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)])).unwrap();
        assert!(close(s.bins(), &[c(0.5, 0.); 4], 1e-15));
        let s = dft_unitary(&bb(vec![c(1., 0.); 4])).unwrap();
        assert!(close(s.bins(), &[c(2., 0.), c(0., 0.), c(0., 0.), c(0., 0.)], 1e-15));
    }

    #[test]
    fn inverse_examples() {
        let dc = SpectrumBlock::new(vec![c(2., 0.), c(0., 0.), c(0., 0.), c(0., 0.)], 1.0).unwrap();
        assert!(close(idft_unitary(&dc).unwrap().samples(), &[c(1., 0.); 4], 1e-15));
        let one = SpectrumBlock::new(vec![c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)], 1.0).unwrap();
        let x = idft_unitary(&one).unwrap();
        let want = [c(0.5, 0.), c(0., 0.5), c(-0.5, 0.), c(0., -0.5)];
        assert!(close(x.samples(), &want, 1e-15));
    }

    #[test]
    fn empty_blocks_rejected() {
        assert!(dft_unitary(&bb(vec![])).is_err());
        assert!(idft_unitary(&SpectrumBlock::<f64>::new(vec![], 1.0).unwrap()).is_err());
    }

    #[test]
    fn non_finite_rejected() {
        assert!(BasebandBlock::new(vec![c(f64::NAN, 0.)], 1.0).is_err());
        assert!(PassbandBlock::new(vec![f64::INFINITY], 8.0, 2.0).is_err());
        assert!(PassbandBlock::new(vec![0.0], 8.0, 4.0).is_err());
    }

    #[test]
    fn zero_pad_literal_ranges() {
        let x = SpectrumBlock::new(vec![c(1., 0.), c(2., 0.), c(3., 0.), c(4., 0.)], 1.0).unwrap();
        let y = zero_pad_interpolate(&x, 2).unwrap();
        let re: Vec<f64> = y.bins().iter().map(|b| b.re).collect();
        assert_eq!(re, vec![1., 2., 3., 0., 0., 0., 0., 4.]);
        let y = zero_pad_interpolate_with(&x, 2, PadSplit::Symmetric).unwrap();
        let re: Vec<f64> = y.bins().iter().map(|b| b.re).collect();
        assert_eq!(re, vec![1., 2., 0., 0., 0., 0., 3., 4.]);
        assert_eq!(zero_pad_interpolate(&x, 1).unwrap(), x);
        let back = extract_subcarriers(&zero_pad_interpolate(&x, 4).unwrap(), 4, PadSplit::Literal).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn zero_pad_energy_and_errors() {
        let x = SpectrumBlock::new(vec![c(1., 0.); 4], 1.0).unwrap();
        assert_eq!(zero_pad_interpolate(&x, 2).unwrap().energy(), 4.0);
        let odd = SpectrumBlock::new(vec![c(1., 0.); 3], 1.0).unwrap();
        assert!(zero_pad_interpolate(&odd, 2).is_err());
        assert!(zero_pad_interpolate(&x, 0).is_err());
    }

    #[test]
    fn upconvert_constant_at_quarter_rate() {
        let x = BasebandBlock::new(vec![c(1., 0.); 8], 8.0).unwrap();
        let p = upconvert(&x, 2.0).unwrap();
        let r2 = 2f64.sqrt();
        let want = [r2, 0., -r2, 0., r2, 0., -r2, 0.];
        for (a, b) in p.samples().iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        let z = upconvert(&BasebandBlock::new(vec![c(0., 0.); 8], 8.0).unwrap(), 2.0).unwrap();
        assert!(z.samples().iter().all(|v| *v == 0.0));
        assert!(upconvert(&x, 4.0).is_err());
        assert!(upconvert(&BasebandBlock::<f64>::new(vec![], 8.0).unwrap(), 2.0).is_err());
    }

    #[test]
    fn downconvert_rejects_bad_filter() {
        let p = PassbandBlock::new(vec![0.0; 16], 8.0, 2.0).unwrap();
        let even = FirFilter::from_taps(vec![0.5, 0.5]).unwrap();
        assert!(downconvert(&p, &even).is_err());
        let zero = FirFilter::from_taps(vec![0.0, 0.0, 0.0]).unwrap();
        assert!(downconvert(&p, &zero).is_err());
        let ok = FirFilter::from_taps(vec![0.25, 0.5, 0.25]).unwrap();
        let y = downconvert(&p, &ok).unwrap();
        assert!(y.samples().iter().all(|s| s.norm() == 0.0));
    }

    #[test]
    fn works_in_f32() {
        let x: BasebandBlock<f32> =
            BasebandBlock::new((0..16).map(|i| Complex::new(i as f32, -(i as f32))).collect(), 1.0).unwrap();
        let back = idft_unitary(&dft_unitary(&x).unwrap()).unwrap();
        for (a, b) in x.samples().iter().zip(back.samples()) {
            assert!((a - b).norm() < 1e-4);
        }
    }
}
