//! Monte Carlo estimation of PAPR CCDFs and BER curves, and the table and
//! CSV reproduction built on them.
//!
//! Every block draws its bits from `derive_seed(master, Bits, block)` and its
//! noise from a seed keyed on the SNR index and block, so all schemes and
//! clipping ratios see the same data and noise. Blocks are processed in
//! fixed-size chunks and merged in block order, which makes every result
//! independent of the worker count.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex;
use rayon::prelude::*;

use crate::channel::{add_awgn, AwgnConfig};
use crate::config::SimulationConfig;
use crate::dsp::{self, Dft, PassbandBlock, SpectrumBlock};
use crate::error::{invalid_input, Error, Result};
use crate::fir::{frequency_response, remez_design, FilterPreset, FirFilter};
use crate::modem::{count_bit_errors, demap_symbols, generate_bits, map_symbols, ModulationScheme, SymbolBlock};
use crate::peak::{strip_cyclic_prefix, ChainPlan, Scheme};
use crate::rng::{derive_seed, Stream};
use crate::scalar::Real;

/// Blocks per scheduling chunk of the BER loop.
const BER_CHUNK: usize = 64;

/// Empirical `P(PAPR > threshold)` on a uniform threshold grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CcdfCurve {
    points: Vec<(f64, f64)>,
}

impl CcdfCurve {
    /// Validated curve from `(threshold_db, probability)` pairs.
    pub fn from_points(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid_input("empty CCDF"));
        }
        for w in points.windows(2) {
            if w[1].0.partial_cmp(&w[0].0) != Some(std::cmp::Ordering::Greater) {
                return Err(invalid_input("CCDF thresholds must increase"));
            }
            if w[1].1 > w[0].1 {
                return Err(invalid_input("CCDF probabilities must not increase"));
            }
        }
        if points.iter().any(|&(t, p)| !t.is_finite() || !(0.0..=1.0).contains(&p)) {
            return Err(invalid_input("CCDF point out of range"));
        }
        Ok(Self { points })
    }

    /// Empirical CCDF of `samples` on a grid of `step_db`, spanning one step
    /// below the smallest sample to one step above the largest.
    pub fn from_samples(samples: &[f64], step_db: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(invalid_input("no PAPR samples"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(invalid_input("non-finite PAPR sample"));
        }
        if !(step_db.is_finite() && step_db > 0.0) {
            return Err(invalid_input("CCDF step must be > 0"));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        // Whole steps per dB keep grid points exact, e.g. 7.0 rather than 7.000000000000001.
        let per_db = 1.0 / step_db;
        let at = |k: i64| {
            if (per_db - per_db.round()).abs() < 1e-9 {
                k as f64 / per_db.round()
            } else {
                k as f64 * step_db
            }
        };
        let lo = (sorted[0] * per_db).floor() as i64 - 1;
        let hi = (sorted[sorted.len() - 1] * per_db).ceil() as i64 + 1;
        let n = sorted.len() as f64;
        let points = (lo..=hi)
            .map(|k| {
                let t = at(k);
                let above = sorted.len() - sorted.partition_point(|&v| v <= t);
                (t, above as f64 / n)
            })
            .collect();
        Self::from_points(points)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Threshold at which the curve crosses `level`, interpolating linearly in
    /// `(threshold, log10 probability)`.
    pub fn papr_at(&self, level: f64) -> Result<f64> {
        let max_p = self.points[0].1;
        let min_p = self.points[self.points.len() - 1].1;
        if !(level > 0.0 && level <= max_p && level >= min_p) {
            return Err(Error::OutOfRange { level, min: min_p, max: max_p });
        }
        for w in self.points.windows(2) {
            let ((t0, p0), (t1, p1)) = (w[0], w[1]);
            if p0 >= level && p1 <= level {
                if p0 == p1 {
                    return Ok(t0);
                }
                if p1 == 0.0 {
                    return Ok(t1);
                }
                let frac = (p0.log10() - level.log10()) / (p0.log10() - p1.log10());
                return Ok(t0 + frac * (t1 - t0));
            }
        }
        // Single-point curve at exactly `level`.
        Ok(self.points[0].0)
    }
}

/// Free-function form of [`CcdfCurve::papr_at`].
pub fn papr_at_ccdf(curve: &CcdfCurve, level: f64) -> Result<f64> {
    curve.papr_at(level)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub ebn0_db: f64,
    pub ber: f64,
    pub bits: u64,
    pub errors: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    pub points: Vec<BerPoint>,
}

impl BerCurve {
    pub fn at_snr(&self, snr_db: f64) -> Option<&BerPoint> {
        self.points.iter().find(|p| (p.snr_db - snr_db).abs() < 1e-9)
    }
}

/// `Eb/N0` for an in-band SNR. The cyclic prefix is discarded before
/// detection, so only the data part of each frame carries bit energy.
pub fn ebn0_db(snr_db: f64, modulation: ModulationScheme) -> f64 {
    snr_db - 10.0 * (modulation.bits_per_symbol() as f64).log10()
}

/// Strips the prefix, mixes down, takes the `L*N` DFT and keeps the occupied bins.
#[derive(Debug, Clone)]
pub struct Receiver<T: Real> {
    dft: Dft<T>,
    config: SimulationConfig,
}

impl<T: Real> Receiver<T> {
    pub fn new(config: &SimulationConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            dft: Dft::new(config.block_len())?,
            config: config.clone(),
        })
    }

    /// Subcarrier symbols of a CP-extended passband frame.
    pub fn symbols(&self, frame: &PassbandBlock<T>) -> Result<SymbolBlock<T>> {
        let cfg = &self.config;
        let body = strip_cyclic_prefix(frame.samples(), cfg.cp_len * cfg.oversampling_l)?;
        if body.len() != cfg.block_len() {
            return Err(invalid_input(format!(
                "frame body has {} samples, expected {}",
                body.len(),
                cfg.block_len()
            )));
        }
        let body = frame.with_samples(body.to_vec());
        let mut mixed = dsp::mix_down(&body);
        self.dft.forward_in_place(&mut mixed);
        let spacing = T::lit(cfg.sample_rate_hz() / cfg.block_len() as f64);
        let spectrum = SpectrumBlock::new(mixed, spacing)?;
        let sub = dsp::extract_subcarriers(&spectrum, cfg.num_subcarriers_n, cfg.pad_split)?;
        Ok(SymbolBlock::new(sub.into_bins()))
    }

    pub fn demodulate(&self, frame: &PassbandBlock<T>, modulation: ModulationScheme) -> Result<crate::modem::BitBlock> {
        Ok(demap_symbols(&self.symbols(frame)?, modulation))
    }
}

/// Shared state for a batch of experiments under one configuration.
pub struct Harness {
    config: SimulationConfig,
    plan: ChainPlan<f64>,
    receiver: Receiver<f64>,
    pool: rayon::ThreadPool,
}

impl Harness {
    pub fn new(config: &SimulationConfig) -> Result<Self> {
        let plan = ChainPlan::new(config)?;
        let receiver = Receiver::new(config)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        Ok(Self {
            config: config.clone(),
            plan,
            receiver,
            pool,
        })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn plan(&self) -> &ChainPlan<f64> {
        &self.plan
    }

    fn block_symbols(&self, block: usize, modulation: ModulationScheme) -> Result<(crate::modem::BitBlock, SpectrumBlock<f64>)> {
        let cfg = &self.config;
        let seed = derive_seed(cfg.master_seed, Stream::Bits, block as u64);
        let bits = generate_bits(cfg.num_subcarriers_n * modulation.bits_per_symbol(), seed);
        let symbols: SymbolBlock<f64> = map_symbols(&bits, modulation)?;
        let spectrum = self.plan.symbol_spectrum(symbols.into_symbols())?;
        Ok((bits, spectrum))
    }

    /// Per-block PAPR in dB, in block order.
    pub fn papr_samples(&self, scheme: Scheme, modulation: ModulationScheme, clipping_ratio: f64) -> Result<Vec<f64>> {
        self.pool.install(|| {
            (0..self.config.num_blocks)
                .into_par_iter()
                .map(|b| {
                    let (_, spectrum) = self.block_symbols(b, modulation)?;
                    Ok(self.plan.run(&spectrum, scheme, clipping_ratio)?.papr_db)
                })
                .collect()
        })
    }

    pub fn ccdf(&self, scheme: Scheme, modulation: ModulationScheme, clipping_ratio: f64) -> Result<CcdfCurve> {
        if self.config.num_blocks < 100 {
            return Err(Error::InvalidConfig("CCDF needs num_blocks >= 100".into()));
        }
        CcdfCurve::from_samples(
            &self.papr_samples(scheme, modulation, clipping_ratio)?,
            self.config.ccdf_step_db,
        )
    }

    /// BER at every point of the SNR grid. Each point stops once it has both
    /// `ber_min_bits` bits and `ber_min_errors` errors, or `ber_max_bits` bits.
    pub fn ber(&self, scheme: Scheme, modulation: ModulationScheme, clipping_ratio: f64) -> Result<BerCurve> {
        let cfg = &self.config;
        if cfg.snr_grid_db.is_empty() {
            return Err(Error::InvalidConfig("snr_grid_db is empty".into()));
        }
        let fraction = cfg.occupied_fraction();
        let noise_masters: Vec<u64> = (0..cfg.snr_grid_db.len())
            .map(|i| derive_seed(cfg.master_seed, Stream::Noise, i as u64))
            .collect();
        let mut counts = vec![(0u64, 0u64); cfg.snr_grid_db.len()];
        let done = |c: &(u64, u64)| {
            let (bits, errors) = *c;
            bits >= cfg.ber_max_bits || (bits >= cfg.ber_min_bits && errors >= cfg.ber_min_errors)
        };
        let mut next_block = 0usize;
        while !counts.iter().all(done) {
            let active: Vec<usize> = (0..counts.len()).filter(|&i| !done(&counts[i])).collect();
            let chunk: Vec<Vec<(u64, u64)>> = self.pool.install(|| {
                (next_block..next_block + BER_CHUNK)
                    .into_par_iter()
                    .map(|b| -> Result<Vec<(u64, u64)>> {
                        let (bits, spectrum) = self.block_symbols(b, modulation)?;
                        let out = self.plan.run(&spectrum, scheme, clipping_ratio)?;
                        let frame = self.plan.transmit_frame(&out);
                        active
                            .iter()
                            .map(|&i| {
                                let awgn = AwgnConfig::new(cfg.snr_grid_db[i], derive_seed(noise_masters[i], Stream::Noise, b as u64))
                                    .with_occupied_fraction(fraction);
                                let noisy = add_awgn(&frame, &awgn)?;
                                let rx = self.receiver.demodulate(&noisy, modulation)?;
                                let (errors, _) = count_bit_errors(&bits, &rx)?;
                                Ok((bits.len() as u64, errors))
                            })
                            .collect()
                    })
                    .collect::<Result<_>>()
            })?;
            for per_block in chunk {
                for (slot, (bits, errors)) in active.iter().zip(per_block) {
                    counts[*slot].0 += bits;
                    counts[*slot].1 += errors;
                }
            }
            next_block += BER_CHUNK;
        }
        let points = cfg
            .snr_grid_db
            .iter()
            .zip(&counts)
            .map(|(&snr_db, &(bits, errors))| BerPoint {
                snr_db,
                ebn0_db: ebn0_db(snr_db, modulation),
                ber: errors as f64 / bits as f64,
                bits,
                errors,
            })
            .collect();
        Ok(BerCurve { points })
    }
}

/// CCDF of `config.scheme` and `config.modulation` at one clipping ratio.
pub fn estimate_ccdf(config: &SimulationConfig, clipping_ratio: f64) -> Result<CcdfCurve> {
    Harness::new(config)?.ccdf(config.scheme, config.modulation, clipping_ratio)
}

/// BER curve of `config.scheme` and `config.modulation` at one clipping ratio.
pub fn estimate_ber(config: &SimulationConfig, clipping_ratio: f64) -> Result<BerCurve> {
    Harness::new(config)?.ber(config.scheme, config.modulation, clipping_ratio)
}

/// One row of a comparison table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub cr: f64,
    pub existing: f64,
    pub proposed: f64,
}

impl TableRow {
    pub fn difference(&self) -> f64 {
        self.existing - self.proposed
    }
}

/// Everything [`reproduce_tables`] computed, plus the files it wrote.
#[derive(Debug, Clone, Default)]
pub struct Reproduction {
    /// Keyed by modulation: PAPR tables (QPSK then 16-QAM).
    pub papr_tables: Vec<(ModulationScheme, Vec<TableRow>)>,
    /// Keyed by modulation: BER tables at `table_snr_db`.
    pub ber_tables: Vec<(ModulationScheme, Vec<TableRow>)>,
    /// Unclipped PAPR at CCDF 0.1 per modulation.
    pub unclipped_papr: Vec<(ModulationScheme, f64)>,
    pub files: Vec<PathBuf>,
}

/// Leading `#` block recording the full configuration.
pub fn config_header(config: &SimulationConfig) -> String {
    let mut s = String::new();
    for line in config.to_text().lines() {
        let _ = writeln!(s, "# {line}");
    }
    s
}

fn write_csv(dir: &Path, name: &str, config: &SimulationConfig, header: &str, rows: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut body = config_header(config);
    body.push_str(header);
    body.push('\n');
    body.push_str(rows);
    fs::write(&path, body)?;
    Ok(path)
}

/// File stem shared by CCDF and BER outputs, e.g. `existing_bpf_qpsk_cr0.8`.
/// The unclipped scheme has no clipping ratio in its name.
pub fn curve_tag(scheme: Scheme, modulation: ModulationScheme, clipping_ratio: f64) -> String {
    match scheme {
        Scheme::None => format!("none_{modulation}"),
        s => format!("{}_{modulation}_cr{clipping_ratio:.1}", s.tag()),
    }
}

pub fn write_ccdf_file(dir: &Path, config: &SimulationConfig, tag: &str, curve: &CcdfCurve) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    write_csv(dir, &format!("ccdf_{tag}.csv"), config, "threshold_db,probability", &ccdf_csv(curve))
}

pub fn write_ber_file(dir: &Path, config: &SimulationConfig, tag: &str, curve: &BerCurve) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    write_csv(dir, &format!("ber_{tag}.csv"), config, "snr_db,ebn0_db,ber,bits,errors", &ber_csv(curve))
}

pub fn ccdf_csv(curve: &CcdfCurve) -> String {
    curve.points().iter().fold(String::new(), |mut s, (t, p)| {
        let _ = writeln!(s, "{t},{p}");
        s
    })
}

pub fn ber_csv(curve: &BerCurve) -> String {
    curve.points.iter().fold(String::new(), |mut s, p| {
        let _ = writeln!(s, "{},{},{},{},{}", p.snr_db, p.ebn0_db, p.ber, p.bits, p.errors);
        s
    })
}

pub fn taps_csv(filter: &FirFilter<f64>) -> String {
    filter.taps().iter().enumerate().fold(String::new(), |mut s, (i, t)| {
        let _ = writeln!(s, "{i},{t}");
        s
    })
}

/// `(freq_hz, amplitude)` at `points` frequencies across `[0, fs/2]`.
pub fn response_csv(filter: &FirFilter<f64>, sample_rate_hz: f64, points: usize) -> Result<String> {
    let freqs: Vec<f64> = (0..points).map(|i| 0.5 * i as f64 / (points - 1).max(1) as f64).collect();
    let amp = frequency_response(filter, &freqs)?;
    Ok(freqs.iter().zip(amp).fold(String::new(), |mut s, (f, a)| {
        let _ = writeln!(s, "{},{a}", f * sample_rate_hz);
        s
    }))
}

/// Designs `preset` and writes its taps and response CSVs into `dir`.
pub fn write_filter_files(config: &SimulationConfig, preset: FilterPreset, dir: &Path) -> Result<(FirFilter<f64>, Vec<PathBuf>)> {
    fs::create_dir_all(dir)?;
    let spec = preset.spec(config)?;
    let filter = remez_design(&spec, 200, 1e-9)?;
    let name = preset.name();
    let taps = write_csv(dir, &format!("filter_{name}_taps.csv"), config, "index,tap", &taps_csv(&filter))?;
    let resp = write_csv(
        dir,
        &format!("filter_{name}_response.csv"),
        config,
        "freq_hz,amplitude",
        &response_csv(&filter, config.sample_rate_hz(), 1024)?,
    )?;
    Ok((filter, vec![taps, resp]))
}

/// Runs both schemes for both modulations at every clipping ratio and writes
/// the CCDF, BER, table and filter CSVs into `out_dir`.
pub fn reproduce_tables(config: &SimulationConfig, out_dir: &Path) -> Result<Reproduction> {
    fs::create_dir_all(out_dir)?;
    let harness = Harness::new(config)?;
    let mut rep = Reproduction::default();
    for preset in [FilterPreset::ExistingBpf, FilterPreset::ProposedHpf] {
        rep.files.extend(write_filter_files(config, preset, out_dir)?.1);
    }
    let snr_grid_has_table = config.snr_grid_db.iter().any(|&s| (s - config.table_snr_db).abs() < 1e-9);
    if !snr_grid_has_table {
        return Err(Error::InvalidConfig(format!(
            "table_snr_db {} is not on snr_grid_db",
            config.table_snr_db
        )));
    }

    for modulation in ModulationScheme::all() {
        let base = harness.ccdf(Scheme::None, modulation, 1.0)?;
        rep.unclipped_papr.push((modulation, base.papr_at(0.1)?));
        let tag = curve_tag(Scheme::None, modulation, 1.0);
        rep.files.push(write_ccdf_file(out_dir, config, &tag, &base)?);
        let base_ber = harness.ber(Scheme::None, modulation, 1.0)?;
        rep.files.push(write_ber_file(out_dir, config, &tag, &base_ber)?);

        let mut papr_rows = Vec::new();
        let mut ber_rows = Vec::new();
        for &cr in &config.clipping_ratios {
            let mut papr = [0.0; 2];
            let mut ber = [0.0; 2];
            for scheme in [Scheme::ClipOnly, Scheme::ExistingBpf, Scheme::ProposedHpf] {
                let tag = curve_tag(scheme, modulation, cr);
                let curve = harness.ccdf(scheme, modulation, cr)?;
                rep.files.push(write_ccdf_file(out_dir, config, &tag, &curve)?);
                if scheme == Scheme::ClipOnly {
                    continue;
                }
                let slot = usize::from(scheme == Scheme::ProposedHpf);
                papr[slot] = curve.papr_at(0.1)?;
                let bc = harness.ber(scheme, modulation, cr)?;
                rep.files.push(write_ber_file(out_dir, config, &tag, &bc)?);
                ber[slot] = bc.at_snr(config.table_snr_db).map(|p| p.ber).unwrap_or(f64::NAN);
            }
            papr_rows.push(TableRow { cr, existing: papr[0], proposed: papr[1] });
            ber_rows.push(TableRow { cr, existing: ber[0], proposed: ber[1] });
        }
        let (papr_name, ber_name) = match modulation {
            ModulationScheme::Qpsk => ("table2.csv", "table4.csv"),
            ModulationScheme::Qam16 => ("table3.csv", "table5.csv"),
        };
        rep.files.push(write_csv(out_dir, papr_name, config, "cr,existing_db,proposed_db,difference", &table_csv(&papr_rows))?);
        rep.files.push(write_csv(out_dir, ber_name, config, "cr,existing_ber,proposed_ber,difference", &table_csv(&ber_rows))?);
        rep.papr_tables.push((modulation, papr_rows));
        rep.ber_tables.push((modulation, ber_rows));
    }
    Ok(rep)
}

pub fn table_csv(rows: &[TableRow]) -> String {
    rows.iter().fold(String::new(), |mut s, r| {
        let _ = writeln!(s, "{},{},{},{}", r.cr, r.existing, r.proposed, r.difference());
        s
    })
}

/// Quick end-to-end sanity checks; each entry is `(name, passed, detail)`.
pub fn selftest() -> Vec<(String, bool, String)> {
    let mut out = Vec::new();
    let mut check = |name: &str, r: Result<(bool, String)>| {
        let (ok, detail) = r.unwrap_or_else(|e| (false, e.to_string()));
        out.push((name.to_string(), ok, detail));
    };

    check("dft round trip", (|| {
        let x: Vec<Complex<f64>> = (0..64).map(|i| Complex::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let b = dsp::BasebandBlock::new(x.clone(), 1.0)?;
        let back = dsp::idft_unitary(&dsp::dft_unitary(&b)?)?;
        let err = back.samples().iter().zip(&x).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        Ok((err < 1e-12, format!("max error {err:.3e}")))
    })());

    check("remez low-pass", (|| {
        let spec = crate::fir::FilterSpec::new(
            vec![crate::fir::Band::new(0.0, 0.2, 1.0, 1.0), crate::fir::Band::new(0.3, 0.5, 0.0, 1.0)],
            21,
        )?;
        let f = remez_design(&spec, 100, 1e-10)?;
        Ok((f.is_symmetric() && f.achieved_ripple() < 0.02, format!("ripple {:.6}", f.achieved_ripple())))
    })());

    check("noiseless link", (|| {
        let cfg = SimulationConfig {
            num_blocks: 100,
            snr_grid_db: vec![f64::INFINITY],
            ber_min_bits: 1,
            ber_min_errors: 0,
            ber_max_bits: 1,
            ..SimulationConfig::default()
        };
        let h = Harness::new(&cfg)?;
        let c = h.ber(Scheme::None, ModulationScheme::Qpsk, 1.0)?;
        Ok((c.points[0].errors == 0, format!("{} errors in {} bits", c.points[0].errors, c.points[0].bits)))
    })());

    check("unclipped ccdf", (|| {
        let cfg = SimulationConfig {
            num_blocks: 200,
            ..SimulationConfig::default()
        };
        let curve = Harness::new(&cfg)?.ccdf(Scheme::None, ModulationScheme::Qpsk, 1.0)?;
        let p = curve.papr_at(0.1)?;
        Ok(((11.0..16.0).contains(&p), format!("PAPR at 0.1: {p:.2} dB")))
    })());

    out
}
