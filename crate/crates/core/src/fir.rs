//! Equiripple linear-phase FIR design by the Parks-McClellan (Remez exchange)
//! algorithm, plus the helpers that turn a designed filter into a
//! frequency-domain mask for the composed filter.
//!
//! Only Type-I filters (odd length, even symmetry) are produced. Their
//! zero-phase amplitude is a cosine polynomial
//! `A(f) = sum_{m=0}^{M} a_m cos(2 pi f m)`, `M = (taps - 1) / 2`, which the
//! exchange treats as an ordinary polynomial in `x = cos(2 pi f)`.

use crate::config::SimulationConfig;
use crate::error::{invalid_input, Error, Result};
use crate::scalar::Real;

/// One band of a piecewise-constant specification, edges in cycles/sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band<T> {
    pub low: T,
    pub high: T,
    pub desired: T,
    pub weight: T,
}

impl<T: Real> Band<T> {
    pub fn new(low: T, high: T, desired: T, weight: T) -> Self {
        Self {
            low,
            high,
            desired,
            weight,
        }
    }

    fn contains(&self, f: T) -> bool {
        f >= self.low && f <= self.high
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec<T> {
    pub bands: Vec<Band<T>>,
    pub num_taps: usize,
}

impl<T: Real> FilterSpec<T> {
    pub fn new(bands: Vec<Band<T>>, num_taps: usize) -> Result<Self> {
        let spec = Self { bands, num_taps };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.num_taps < 3 || self.num_taps.is_multiple_of(2) {
            return bad(format!("num_taps must be odd and >= 3, got {}", self.num_taps));
        }
        if self.bands.is_empty() {
            return bad("at least one band is required".into());
        }
        let half = T::lit(0.5);
        let mut prev_high: Option<T> = None;
        for (i, b) in self.bands.iter().enumerate() {
            if !(b.low.is_finite() && b.high.is_finite() && b.desired.is_finite()) {
                return bad(format!("band {i} has non-finite values"));
            }
            if b.low < T::zero() || b.high > half || b.low >= b.high {
                return bad(format!("band {i} edges [{}, {}] must satisfy 0 <= low < high <= 0.5", b.low, b.high));
            }
            if !(b.weight.is_finite() && b.weight > T::zero()) {
                return bad(format!("band {i} weight must be > 0"));
            }
            if let Some(p) = prev_high {
                if b.low <= p {
                    return bad(format!("band {i} overlaps or touches the previous band"));
                }
            }
            prev_high = Some(b.high);
        }
        if self.num_coefficients() < self.bands.len() {
            return bad(format!(
                "{} taps cannot serve {} bands",
                self.num_taps,
                self.bands.len()
            ));
        }
        Ok(())
    }

    /// `M + 1` cosine coefficients.
    pub fn num_coefficients(&self) -> usize {
        (self.num_taps - 1) / 2 + 1
    }

    /// Desired amplitude at `f`, if `f` falls inside a band.
    pub fn desired_at(&self, f: T) -> Option<T> {
        self.bands.iter().find(|b| b.contains(f)).map(|b| b.desired)
    }
}

/// A symmetric (linear-phase) real FIR filter.
#[derive(Debug, Clone, PartialEq)]
pub struct FirFilter<T> {
    taps: Vec<T>,
    achieved_ripple: T,
}

impl<T: Real> FirFilter<T> {
    /// Wraps existing taps; the ripple is recorded as zero.
    pub fn from_taps(taps: Vec<T>) -> Result<Self> {
        if taps.is_empty() || !taps.iter().all(|t| t.is_finite()) {
            return Err(invalid_input("taps must be nonempty and finite"));
        }
        Ok(Self {
            taps,
            achieved_ripple: T::zero(),
        })
    }

    pub fn taps(&self) -> &[T] {
        &self.taps
    }

    /// Maximum weighted approximation error over the design grid.
    pub fn achieved_ripple(&self) -> T {
        self.achieved_ripple
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.taps.len();
        (0..n / 2).all(|k| self.taps[k] == self.taps[n - 1 - k])
    }

    /// Zero-phase amplitude at normalized frequency `f` (cycles/sample).
    ///
    /// For symmetric odd-length taps this is the real amplitude with the
    /// group delay removed.
    pub fn amplitude_at(&self, f: T) -> T {
        let n = self.taps.len();
        let mid = T::from_count(n - 1) / T::lit(2.0);
        let w = T::TAU() * f;
        self.taps
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (i, &h)| acc + h * (w * (T::from_count(i) - mid)).cos())
    }

    pub fn into_taps(self) -> Vec<T> {
        self.taps
    }

    pub fn cast<U: Real>(&self) -> FirFilter<U> {
        FirFilter {
            taps: self.taps.iter().map(|t| U::lit(t.as_f64())).collect(),
            achieved_ripple: U::lit(self.achieved_ripple.as_f64()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemezOptions {
    pub max_iterations: usize,
    /// Relative spread allowed between the extremal error magnitudes.
    pub tolerance: f64,
    /// Grid points per tap across `[0, 0.5]`.
    pub grid_density: usize,
}

impl Default for RemezOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            tolerance: 1e-10,
            grid_density: 16,
        }
    }
}

/// Dense design grid shared by the exchange and by ripple certification.
#[derive(Debug, Clone)]
pub struct DesignGrid<T> {
    pub freqs: Vec<T>,
    pub desired: Vec<T>,
    pub weights: Vec<T>,
    /// Index range of each band in the grid.
    pub band_ranges: Vec<std::ops::Range<usize>>,
}

impl<T: Real> DesignGrid<T> {
    /// Uniform points inside each band, both edges included, spaced at most
    /// `0.5 / (density * num_taps)` apart.
    pub fn new(spec: &FilterSpec<T>, density: usize) -> Self {
        let step = T::lit(0.5) / T::from_count(density.max(1) * spec.num_taps);
        let mut grid = Self {
            freqs: Vec::new(),
            desired: Vec::new(),
            weights: Vec::new(),
            band_ranges: Vec::with_capacity(spec.bands.len()),
        };
        for b in &spec.bands {
            let span = b.high - b.low;
            let intervals = (span / step).ceil().to_usize().unwrap_or(1).max(1);
            let start = grid.freqs.len();
            for i in 0..=intervals {
                let f = if i == intervals {
                    b.high
                } else {
                    b.low + span * T::from_count(i) / T::from_count(intervals)
                };
                grid.freqs.push(f);
                grid.desired.push(b.desired);
                grid.weights.push(b.weight);
            }
            grid.band_ranges.push(start..grid.freqs.len());
        }
        grid
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Weighted error `W (D - A)` of `filter` at every grid point.
    pub fn weighted_error(&self, filter: &FirFilter<T>) -> Vec<T> {
        (0..self.len())
            .map(|i| self.weights[i] * (self.desired[i] - filter.amplitude_at(self.freqs[i])))
            .collect()
    }
}

/// Barycentric form of the trial polynomial through the current reference.
struct TrialPolynomial<T> {
    x: Vec<T>,
    bary: Vec<T>,
    values: Vec<T>,
    delta: T,
}

impl<T: Real> TrialPolynomial<T> {
    fn through(grid_x: &[T], grid: &DesignGrid<T>, reference: &[usize]) -> Self {
        let x: Vec<T> = reference.iter().map(|&i| grid_x[i]).collect();
        // Factor 2 keeps the products O(1) on [-1, 1].
        let bary: Vec<T> = (0..x.len())
            .map(|k| {
                let prod = (0..x.len())
                    .filter(|&j| j != k)
                    .fold(T::one(), |p, j| p * T::lit(2.0) * (x[k] - x[j]));
                T::one() / prod
            })
            .collect();
        let mut num = T::zero();
        let mut den = T::zero();
        for (k, &i) in reference.iter().enumerate() {
            let sign = if k % 2 == 0 { T::one() } else { -T::one() };
            num += bary[k] * grid.desired[i];
            den += sign * bary[k] / grid.weights[i];
        }
        let delta = num / den;
        let values = reference
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                let sign = if k % 2 == 0 { T::one() } else { -T::one() };
                grid.desired[i] - sign * delta / grid.weights[i]
            })
            .collect();
        Self {
            x,
            bary,
            values,
            delta,
        }
    }

    fn eval(&self, x: T) -> T {
        let mut num = T::zero();
        let mut den = T::zero();
        for k in 0..self.x.len() {
            let d = x - self.x[k];
            if d.is_zero() {
                return self.values[k];
            }
            let c = self.bary[k] / d;
            num += c * self.values[k];
            den += c;
        }
        num / den
    }

    /// Type-I taps from samples of the amplitude at `f = k / taps`.
    fn taps(&self, num_taps: usize) -> Vec<T> {
        let m = (num_taps - 1) / 2;
        let n = T::from_count(num_taps);
        let amp: Vec<T> = (0..=m)
            .map(|k| self.eval((T::TAU() * T::from_count(k) / n).cos()))
            .collect();
        let mut taps = vec![T::zero(); num_taps];
        for j in 0..=m {
            let mut acc = amp[0];
            for (k, &a) in amp.iter().enumerate().skip(1) {
                acc += T::lit(2.0) * a * (T::TAU() * T::from_count(k * j) / n).cos();
            }
            let h = acc / n;
            taps[m + j] = h;
            taps[m - j] = h;
        }
        taps
    }
}

/// Local extrema of the error inside each band, in grid order.
fn local_extrema<T: Real>(err: &[T], grid: &DesignGrid<T>) -> Vec<usize> {
    let mut out = Vec::new();
    for range in &grid.band_ranges {
        let (s, e) = (range.start, range.end);
        for i in s..e {
            let v = err[i];
            if v.is_zero() {
                continue;
            }
            let prev = if i > s { Some(err[i - 1]) } else { None };
            let next = if i + 1 < e { Some(err[i + 1]) } else { None };
            let peak = if v > T::zero() {
                prev.is_none_or(|p| v >= p) && next.is_none_or(|n| v > n)
            } else {
                prev.is_none_or(|p| v <= p) && next.is_none_or(|n| v < n)
            };
            if peak {
                out.push(i);
            }
        }
    }
    out
}

/// Merges runs of same-sign extrema, keeping the largest of each run.
fn enforce_alternation<T: Real>(cands: &[usize], err: &[T]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(cands.len());
    for &i in cands {
        match out.last_mut() {
            Some(last) if (err[*last] > T::zero()) == (err[i] > T::zero()) => {
                if err[i].abs() > err[*last].abs() {
                    *last = i;
                }
            }
            _ => out.push(i),
        }
    }
    out
}

/// Drops the weakest extrema until exactly `want` remain, keeping alternation.
fn trim_reference<T: Real>(mut ext: Vec<usize>, err: &[T], want: usize) -> Vec<usize> {
    while ext.len() > want {
        if ext.len() == want + 1 {
            // Only an end point can go without breaking alternation.
            if err[ext[0]].abs() <= err[ext[ext.len() - 1]].abs() {
                ext.remove(0);
            } else {
                ext.pop();
            }
            continue;
        }
        let weakest = (0..ext.len())
            .min_by(|&a, &b| err[ext[a]].abs().partial_cmp(&err[ext[b]].abs()).unwrap())
            .unwrap();
        ext.remove(weakest);
        ext = enforce_alternation(&ext, err);
    }
    ext
}

/// Designs the minimax Type-I filter for `spec`.
///
/// Converges when the extremal error magnitudes agree to within `tolerance`
/// (relative). On failure the error carries the last iterate.
pub fn remez_design<T: Real>(spec: &FilterSpec<T>, max_iterations: usize, tolerance: f64) -> Result<FirFilter<T>> {
    remez_design_with(
        spec,
        &RemezOptions {
            max_iterations,
            tolerance,
            ..RemezOptions::default()
        },
    )
}

pub fn remez_design_with<T: Real>(spec: &FilterSpec<T>, opts: &RemezOptions) -> Result<FirFilter<T>> {
    spec.validate()?;
    if opts.max_iterations == 0 {
        return Err(invalid_input("max_iterations must be >= 1"));
    }
    let grid = DesignGrid::new(spec, opts.grid_density);
    let r = spec.num_coefficients();
    if grid.len() < r + 1 {
        return Err(Error::InvalidSpec(format!(
            "grid of {} points cannot hold {} extremal frequencies",
            grid.len(),
            r + 1
        )));
    }
    let grid_x: Vec<T> = grid.freqs.iter().map(|&f| (T::TAU() * f).cos()).collect();
    let tol = T::lit(opts.tolerance);

    let mut reference: Vec<usize> = (0..=r).map(|i| i * (grid.len() - 1) / r).collect();
    let mut last_ripple = T::zero();
    let mut last_taps = Vec::new();

    for _ in 0..opts.max_iterations {
        let trial = TrialPolynomial::through(&grid_x, &grid, &reference);
        let err: Vec<T> = (0..grid.len())
            .map(|i| grid.weights[i] * (grid.desired[i] - trial.eval(grid_x[i])))
            .collect();
        let max_err = err.iter().fold(T::zero(), |m, e| m.max(e.abs()));
        last_ripple = max_err;
        last_taps = trial.taps(spec.num_taps);

        let scale = grid.desired.iter().fold(T::one(), |m, d| m.max(d.abs()));
        if max_err <= T::epsilon() * T::lit(64.0) * scale {
            // Exactly representable response.
            return Ok(FirFilter {
                taps: last_taps,
                achieved_ripple: max_err,
            });
        }

        // Reference points sit at |delta| up to rounding in the evaluation.
        let floor = trial.delta.abs() * (T::one() - T::lit(1e-9)) - T::epsilon() * T::lit(1e3) * scale;
        let strong: Vec<usize> = local_extrema(&err, &grid)
            .into_iter()
            .filter(|&i| err[i].abs() >= floor)
            .collect();
        let alternating = enforce_alternation(&strong, &err);
        if alternating.len() < r + 1 {
            break;
        }
        let next = trim_reference(alternating, &err, r + 1);

        let (lo, hi) = next
            .iter()
            .fold((T::infinity(), T::zero()), |(lo, hi), &i| (lo.min(err[i].abs()), hi.max(err[i].abs())));
        if hi - lo <= tol * hi {
            return Ok(FirFilter {
                taps: last_taps,
                achieved_ripple: max_err,
            });
        }
        reference = next;
    }
    Err(Error::Convergence {
        iterations: opts.max_iterations,
        ripple: last_ripple.as_f64(),
        taps: last_taps.iter().map(|t| t.as_f64()).collect(),
    })
}

/// Zero-phase amplitude at each normalized frequency in `[0, 0.5]`.
pub fn frequency_response<T: Real>(filter: &FirFilter<T>, freqs: &[T]) -> Result<Vec<T>> {
    freqs
        .iter()
        .map(|&f| {
            if f >= T::zero() && f <= T::lit(0.5) {
                Ok(filter.amplitude_at(f))
            } else {
                Err(invalid_input(format!("frequency {f} outside [0, 0.5]")))
            }
        })
        .collect()
}

/// Real, symmetric per-bin gains applied by the composed filter.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyMask<T> {
    gains: Vec<T>,
}

impl<T: Real> FrequencyMask<T> {
    pub fn new(gains: Vec<T>) -> Result<Self> {
        if gains.is_empty() || !gains.iter().all(|g| g.is_finite() && *g >= T::zero()) {
            return Err(invalid_input("mask gains must be nonempty, finite and >= 0"));
        }
        Ok(Self { gains })
    }

    pub fn all_pass(len: usize) -> Self {
        Self {
            gains: vec![T::one(); len],
        }
    }

    pub fn gains(&self) -> &[T] {
        &self.gains
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    /// Bin-wise product of two masks of equal length.
    pub fn combine(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(invalid_input("mask lengths differ"));
        }
        Ok(Self {
            gains: self.gains.iter().zip(&other.gains).map(|(a, b)| *a * *b).collect(),
        })
    }
}

/// Normalized frequency of bin `k` folded onto `[0, 0.5]`.
fn folded_bin_freq<T: Real>(k: usize, fft_size: usize) -> T {
    T::from_count(k.min(fft_size - k)) / T::from_count(fft_size)
}

/// Samples `|A(f)|` at every bin of an `fft_size`-point transform.
pub fn mask_from_filter<T: Real>(filter: &FirFilter<T>, fft_size: usize, sample_rate_hz: T) -> Result<FrequencyMask<T>> {
    if fft_size < 2 {
        return Err(invalid_input("fft_size must be >= 2"));
    }
    if !(sample_rate_hz.is_finite() && sample_rate_hz > T::zero()) {
        return Err(invalid_input("sample rate must be > 0"));
    }
    let gains = (0..fft_size)
        .map(|k| filter.amplitude_at(folded_bin_freq::<T>(k, fft_size)).abs())
        .collect();
    Ok(FrequencyMask { gains })
}

/// Zero at every bin inside a band whose desired response is zero, one elsewhere.
///
/// Applied after the filter mask it forces the stop bands to exact zeros,
/// which the equiripple filter alone only attenuates to `delta`.
pub fn stopband_template<T: Real>(spec: &FilterSpec<T>, fft_size: usize) -> Result<FrequencyMask<T>> {
    if fft_size < 2 {
        return Err(invalid_input("fft_size must be >= 2"));
    }
    let gains = (0..fft_size)
        .map(|k| {
            let f = folded_bin_freq::<T>(k, fft_size);
            let stop = spec.bands.iter().any(|b| b.desired.is_zero() && b.contains(f));
            if stop {
                T::zero()
            } else {
                T::one()
            }
        })
        .collect();
    Ok(FrequencyMask { gains })
}

/// Which composed-filter preset to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterPreset {
    ExistingBpf,
    ProposedHpf,
    ReceiverLpf,
}

impl FilterPreset {
    pub fn name(self) -> &'static str {
        match self {
            FilterPreset::ExistingBpf => "existing_bpf",
            FilterPreset::ProposedHpf => "proposed_hpf",
            FilterPreset::ReceiverLpf => "receiver_lpf",
        }
    }

    pub fn spec(self, config: &SimulationConfig) -> Result<FilterSpec<f64>> {
        match self {
            FilterPreset::ExistingBpf => preset_existing_bpf(config),
            FilterPreset::ProposedHpf => preset_proposed_hpf(config),
            FilterPreset::ReceiverLpf => preset_receiver_lpf(config),
        }
    }
}

impl std::str::FromStr for FilterPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "existing_bpf" | "bpf" => Ok(Self::ExistingBpf),
            "proposed_hpf" | "hpf" => Ok(Self::ProposedHpf),
            "receiver_lpf" | "lpf" => Ok(Self::ReceiverLpf),
            other => Err(Error::InvalidConfig(format!("unknown filter preset '{other}'"))),
        }
    }
}

/// Occupied band edges and transition width, normalized to `f_s`.
struct PresetEdges {
    pass_low: f64,
    pass_high: f64,
    transition: f64,
}

fn preset_edges(config: &SimulationConfig) -> Result<PresetEdges> {
    let bw = config.bandwidth_hz;
    let fc = config.carrier_freq_hz;
    let fs = config.sample_rate_hz();
    let tr = config.filter_transition_hz;
    if !(bw > 0.0 && fc > 0.0 && fs > 0.0 && tr > 0.0) {
        return Err(Error::InvalidConfig(
            "bandwidth, carrier, sample rate and transition width must be > 0".into(),
        ));
    }
    if fc + bw / 2.0 >= fs / 2.0 {
        return Err(Error::InvalidConfig(format!(
            "occupied band edge {} Hz is not below Nyquist {} Hz",
            fc + bw / 2.0,
            fs / 2.0
        )));
    }
    if fc - bw / 2.0 - tr <= 0.0 || fc + bw / 2.0 + tr >= fs / 2.0 {
        return Err(Error::InvalidConfig(
            "transition bands do not fit between DC, the occupied band and Nyquist".into(),
        ));
    }
    Ok(PresetEdges {
        pass_low: (fc - bw / 2.0) / fs,
        pass_high: (fc + bw / 2.0) / fs,
        transition: tr / fs,
    })
}

/// Band-pass around the occupied band: stop, pass `[fc - BW/2, fc + BW/2]`, stop.
pub fn preset_existing_bpf(config: &SimulationConfig) -> Result<FilterSpec<f64>> {
    let e = preset_edges(config)?;
    let (ws, wp) = (config.filter_stop_weight, config.filter_pass_weight);
    FilterSpec::new(
        vec![
            Band::new(0.0, e.pass_low - e.transition, 0.0, ws),
            Band::new(e.pass_low, e.pass_high, 1.0, wp),
            Band::new(e.pass_high + e.transition, 0.5, 0.0, ws),
        ],
        config.filter_num_taps,
    )
}

/// High-pass from the lower occupied edge: stop, pass `[fc - BW/2, fs/2]`.
pub fn preset_proposed_hpf(config: &SimulationConfig) -> Result<FilterSpec<f64>> {
    let e = preset_edges(config)?;
    let (ws, wp) = (config.filter_stop_weight, config.filter_pass_weight);
    FilterSpec::new(
        vec![
            Band::new(0.0, e.pass_low - e.transition, 0.0, ws),
            Band::new(e.pass_low, 0.5, 1.0, wp),
        ],
        config.filter_num_taps,
    )
}

/// Receiver low-pass for [`crate::dsp::downconvert`]: passes `[0, BW/2]`
/// and stops from `BW` on, or from the lower edge of the folded `2 fc`
/// image if that comes first.
pub fn preset_receiver_lpf(config: &SimulationConfig) -> Result<FilterSpec<f64>> {
    let fs = config.sample_rate_hz();
    let bw = config.bandwidth_hz;
    let fc = config.carrier_freq_hz;
    let pass = bw / 2.0 / fs;
    let image = (2.0 * fc) % fs;
    let image = image.min(fs - image);
    let stop = (bw.min(image - bw / 2.0) / fs).min(0.5);
    if !(pass > 0.0 && stop > pass) {
        return Err(Error::InvalidConfig("no room for a receiver low-pass transition".into()));
    }
    FilterSpec::new(
        vec![Band::new(0.0, pass, 1.0, 1.0), Band::new(stop, 0.5, 0.0, 1.0)],
        config.receiver_lpf_taps,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lowpass(taps: usize) -> FilterSpec<f64> {
        FilterSpec::new(
            vec![Band::new(0.0, 0.2, 1.0, 1.0), Band::new(0.3, 0.5, 0.0, 1.0)],
            taps,
        )
        .unwrap()
    }

    #[test]
    fn all_pass_is_centered_impulse() {
        for taps in [3, 7, 21] {
            let spec = FilterSpec::<f64>::new(vec![Band::new(0.0, 0.5, 1.0, 1.0)], taps).unwrap();
            let f = remez_design(&spec, 10, 1e-10).unwrap();
            assert!(f.achieved_ripple() < 1e-12);
            for (i, &t) in f.taps().iter().enumerate() {
                let want = if i == taps / 2 { 1.0 } else { 0.0 };
                assert!((t - want).abs() < 1e-12, "tap {i} = {t}");
            }
        }
    }

    #[test]
    fn lowpass_response_within_ripple() {
        let f = remez_design(&lowpass(21), 100, 1e-10).unwrap();
        assert!(f.is_symmetric());
        let d = f.achieved_ripple();
        assert!(d > 0.0 && d < 0.05, "ripple {d}");
        let grid = DesignGrid::new(&lowpass(21), 16);
        for (i, &fr) in grid.freqs.iter().enumerate() {
            let a = f.amplitude_at(fr);
            assert!((a - grid.desired[i]).abs() <= d * (1.0 + 1e-9), "f={fr} a={a}");
        }
    }

    #[test]
    fn spec_validation() {
        let b = |lo, hi| Band::new(lo, hi, 1.0, 1.0);
        assert!(FilterSpec::new(vec![b(0.0, 0.5)], 4).is_err());
        assert!(FilterSpec::new(vec![b(0.0, 0.5)], 1).is_err());
        assert!(FilterSpec::new(vec![b(0.0, 0.3), b(0.2, 0.5)], 11).is_err());
        assert!(FilterSpec::new(vec![b(0.0, 0.6)], 11).is_err());
        assert!(FilterSpec::new(vec![Band::new(0.0, 0.2, 1.0, 0.0)], 11).is_err());
        let three = vec![b(0.0, 0.1), b(0.2, 0.3), b(0.4, 0.5)];
        assert!(matches!(FilterSpec::new(three.clone(), 3), Err(Error::InvalidSpec(_))));
        assert!(FilterSpec::new(three, 5).is_ok());
    }

    #[test]
    fn too_few_iterations_reports_last_iterate() {
        match remez_design(&lowpass(31), 1, 1e-12) {
            Err(Error::Convergence { taps, iterations, .. }) => {
                assert_eq!(taps.len(), 31);
                assert_eq!(iterations, 1);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
        assert!(remez_design(&lowpass(31), 0, 1e-12).is_err());
    }

    #[test]
    fn response_examples() {
        let imp = FirFilter::<f64>::from_taps(vec![0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let r = frequency_response(&imp, &[0.0, 0.1, 0.37, 0.5]).unwrap();
        assert!(r.iter().all(|a| (a - 1.0).abs() < 1e-15));
        let tri = FirFilter::<f64>::from_taps(vec![0.25, 0.5, 0.25]).unwrap();
        assert!((frequency_response(&tri, &[0.0]).unwrap()[0] - 1.0).abs() < 1e-15);
        assert!(frequency_response(&tri, &[0.6]).is_err());
        assert!(frequency_response(&tri, &[-0.1]).is_err());
    }

    #[test]
    fn masks() {
        let imp = FirFilter::<f64>::from_taps(vec![0.0, 1.0, 0.0]).unwrap();
        let m = mask_from_filter(&imp, 16, 8e6).unwrap();
        assert!(m.gains().iter().all(|g| (g - 1.0).abs() < 1e-15));
        assert!(mask_from_filter(&imp, 1, 8e6).is_err());

        let f = remez_design(&lowpass(21), 100, 1e-10).unwrap();
        let m = mask_from_filter(&f, 1024, 8e6).unwrap();
        for k in 1..1024 {
            assert_eq!(m.gains()[k], m.gains()[1024 - k]);
        }
        // 0.2 of 8 MHz is 1.6 MHz. Bins fall between grid points, where the
        // response may exceed the grid ripple slightly.
        let d = f.achieved_ripple();
        for k in 0..=204 {
            assert!((m.gains()[k] - 1.0).abs() <= d * (1.0 + 1e-3), "bin {k}");
        }
    }

    #[test]
    fn presets_follow_default_parameters() {
        let cfg = SimulationConfig::default();
        let bpf = preset_existing_bpf(&cfg).unwrap();
        let edges: Vec<(f64, f64)> = bpf.bands.iter().map(|b| (b.low, b.high)).collect();
        let want = [(0.0, 0.175), (0.1875, 0.3125), (0.325, 0.5)];
        for (a, b) in edges.iter().zip(want) {
            assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12, "{a:?} vs {b:?}");
        }
        let hpf = preset_proposed_hpf(&cfg).unwrap();
        let edges: Vec<(f64, f64)> = hpf.bands.iter().map(|b| (b.low, b.high)).collect();
        let want = [(0.0, 0.175), (0.1875, 0.5)];
        for (a, b) in edges.iter().zip(want) {
            assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
        }
        assert_eq!(bpf.num_taps, 105);
        assert_eq!(hpf.bands[1].desired, 1.0);

        let degenerate = SimulationConfig {
            bandwidth_hz: 0.0,
            ..SimulationConfig::default()
        };
        assert!(matches!(preset_existing_bpf(&degenerate), Err(Error::InvalidConfig(_))));
        let high_carrier = SimulationConfig {
            carrier_freq_hz: 3.6e6,
            ..SimulationConfig::default()
        };
        assert!(preset_proposed_hpf(&high_carrier).is_err());
    }

    #[test]
    fn presets_design_cleanly() {
        let cfg = SimulationConfig::default();
        for p in [FilterPreset::ExistingBpf, FilterPreset::ProposedHpf, FilterPreset::ReceiverLpf] {
            let spec = p.spec(&cfg).unwrap();
            let f = remez_design(&spec, 100, 1e-9).unwrap();
            assert!(f.is_symmetric());
            assert!(f.achieved_ripple() < 0.1, "{}: {}", p.name(), f.achieved_ripple());
        }
    }

    #[test]
    fn stopband_template_zeroes_stop_bins() {
        let cfg = SimulationConfig::default();
        let spec = preset_existing_bpf(&cfg).unwrap();
        let t = stopband_template(&spec, 1024).unwrap();
        // Bin k sits at k * 7812.5 Hz.
        assert_eq!(t.gains()[0], 0.0);
        assert_eq!(t.gains()[256], 1.0);
        assert_eq!(t.gains()[1024 - 256], 1.0);
        assert_eq!(t.gains()[400], 0.0);
        assert_eq!(t.gains()[185], 1.0); // transition band is left alone
    }

    #[test]
    fn f32_design() {
        let spec = FilterSpec::new(
            vec![Band::new(0.0f32, 0.2, 1.0, 1.0), Band::new(0.3, 0.5, 0.0, 1.0)],
            11,
        )
        .unwrap();
        let f = remez_design(&spec, 50, 1e-4).unwrap();
        let f64_ref = remez_design(&lowpass(11), 50, 1e-10).unwrap();
        for (a, b) in f.taps().iter().zip(f64_ref.taps()) {
            assert!((*a as f64 - b).abs() < 1e-4);
        }
    }
}
