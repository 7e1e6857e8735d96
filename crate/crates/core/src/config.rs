//! Simulation parameters and the plain-text `key = value` config format.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::dsp::PadSplit;
use crate::error::{Error, Result};
use crate::modem::ModulationScheme;
use crate::peak::{PaprFrame, Scheme, TemplateKind};

/// Every knob of an experiment. Defaults reproduce the LTE-like setup:
/// 1 MHz bandwidth, 8x oversampling, 2 MHz carrier, 128 subcarriers, CP of 32.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub bandwidth_hz: f64,
    pub oversampling_l: usize,
    pub carrier_freq_hz: f64,
    pub num_subcarriers_n: usize,
    pub cp_len: usize,
    pub modulation: ModulationScheme,
    pub clipping_ratios: Vec<f64>,
    pub scheme: Scheme,
    pub num_blocks: usize,
    pub snr_grid_db: Vec<f64>,
    pub master_seed: u64,

    // Composed-filter design.
    pub filter_num_taps: usize,
    pub filter_transition_hz: f64,
    pub filter_pass_weight: f64,
    pub filter_stop_weight: f64,
    pub receiver_lpf_taps: usize,

    pub pad_split: PadSplit,
    pub papr_frame: PaprFrame,
    pub template: TemplateKind,
    pub ccdf_step_db: f64,

    // BER stopping rule: run until both minimums are met, or max_bits.
    pub ber_min_bits: u64,
    pub ber_min_errors: u64,
    pub ber_max_bits: u64,
    /// SNR at which the BER tables are read out.
    pub table_snr_db: f64,

    /// Worker threads; 0 uses all cores. Results do not depend on it.
    pub workers: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            bandwidth_hz: 1e6,
            oversampling_l: 8,
            carrier_freq_hz: 2e6,
            num_subcarriers_n: 128,
            cp_len: 32,
            modulation: ModulationScheme::Qpsk,
            clipping_ratios: vec![0.8, 1.0, 1.2, 1.4, 1.6],
            scheme: Scheme::ProposedHpf,
            num_blocks: 10_000,
            snr_grid_db: (0..=10).map(f64::from).collect(),
            master_seed: 1,
            filter_num_taps: 105,
            filter_transition_hz: 1e5,
            filter_pass_weight: 1.0,
            filter_stop_weight: 1.0,
            receiver_lpf_taps: 63,
            pad_split: PadSplit::Literal,
            papr_frame: PaprFrame::Guarded,
            template: TemplateKind::Stopband,
            ccdf_step_db: 0.1,
            ber_min_bits: 100_000,
            ber_min_errors: 100,
            ber_max_bits: 10_000_000,
            table_snr_db: 6.0,
            workers: 0,
        }
    }
}

/// Field names accepted in config files and as `--key value` overrides.
pub const CONFIG_KEYS: &[&str] = &[
    "bandwidth_hz",
    "oversampling_l",
    "sample_rate_hz",
    "carrier_freq_hz",
    "num_subcarriers_n",
    "cp_len",
    "modulation",
    "clipping_ratios",
    "scheme",
    "num_blocks",
    "snr_grid_db",
    "master_seed",
    "filter_num_taps",
    "filter_transition_hz",
    "filter_pass_weight",
    "filter_stop_weight",
    "receiver_lpf_taps",
    "pad_split",
    "papr_frame",
    "template",
    "ccdf_step_db",
    "ber_min_bits",
    "ber_min_errors",
    "ber_max_bits",
    "table_snr_db",
    "workers",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("cannot parse '{value}' for {key}")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl SimulationConfig {
    /// `f_s = BW * L`.
    pub fn sample_rate_hz(&self) -> f64 {
        self.bandwidth_hz * self.oversampling_l as f64
    }

    /// Length of one oversampled block, `L * N`.
    pub fn block_len(&self) -> usize {
        self.oversampling_l * self.num_subcarriers_n
    }

    /// Fraction of the real passband noise bandwidth `[0, f_s/2]` the signal occupies.
    pub fn occupied_fraction(&self) -> f64 {
        self.bandwidth_hz / (self.sample_rate_hz() / 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return bad("bandwidth_hz must be > 0".into());
        }
        if self.oversampling_l == 0 {
            return bad("oversampling_l must be >= 1".into());
        }
        if self.num_subcarriers_n == 0 || !self.num_subcarriers_n.is_multiple_of(2) {
            return bad("num_subcarriers_n must be even and > 0".into());
        }
        if self.cp_len > self.num_subcarriers_n {
            return bad("cp_len cannot exceed num_subcarriers_n".into());
        }
        let fs = self.sample_rate_hz();
        if !(self.carrier_freq_hz > 0.0 && self.carrier_freq_hz + self.bandwidth_hz / 2.0 < fs / 2.0) {
            return bad(format!(
                "carrier {} Hz plus half bandwidth must lie below Nyquist {} Hz",
                self.carrier_freq_hz,
                fs / 2.0
            ));
        }
        if self.carrier_freq_hz - self.bandwidth_hz / 2.0 <= 0.0 {
            return bad("occupied band must lie above DC".into());
        }
        if self.clipping_ratios.is_empty() || !self.clipping_ratios.iter().all(|c| c.is_finite() && *c > 0.0) {
            return bad("clipping_ratios must be a nonempty list of positive values".into());
        }
        if self.snr_grid_db.iter().any(|s| s.is_nan()) {
            return bad("snr_grid_db contains NaN".into());
        }
        if !(self.ccdf_step_db.is_finite() && self.ccdf_step_db > 0.0) {
            return bad("ccdf_step_db must be > 0".into());
        }
        if self.filter_num_taps.is_multiple_of(2) || self.receiver_lpf_taps.is_multiple_of(2) {
            return bad("filter tap counts must be odd".into());
        }
        Ok(())
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "bandwidth_hz" => self.bandwidth_hz = parse(key, value)?,
            "oversampling_l" => self.oversampling_l = parse(key, value)?,
            "sample_rate_hz" => {
                // Derived; accepted only when consistent with BW * L.
                let fs: f64 = parse(key, value)?;
                if (fs - self.sample_rate_hz()).abs() > 1e-9 * fs.abs().max(1.0) {
                    return Err(Error::InvalidConfig(format!(
                        "sample_rate_hz {fs} disagrees with bandwidth_hz * oversampling_l = {}",
                        self.sample_rate_hz()
                    )));
                }
            }
            "carrier_freq_hz" => self.carrier_freq_hz = parse(key, value)?,
            "num_subcarriers_n" => self.num_subcarriers_n = parse(key, value)?,
            "cp_len" => self.cp_len = parse(key, value)?,
            "modulation" => self.modulation = parse(key, value)?,
            "clipping_ratios" => self.clipping_ratios = parse_list(key, value)?,
            "scheme" => self.scheme = parse(key, value)?,
            "num_blocks" => self.num_blocks = parse(key, value)?,
            "snr_grid_db" => self.snr_grid_db = parse_list(key, value)?,
            "master_seed" => self.master_seed = parse(key, value)?,
            "filter_num_taps" => self.filter_num_taps = parse(key, value)?,
            "filter_transition_hz" => self.filter_transition_hz = parse(key, value)?,
            "filter_pass_weight" => self.filter_pass_weight = parse(key, value)?,
            "filter_stop_weight" => self.filter_stop_weight = parse(key, value)?,
            "receiver_lpf_taps" => self.receiver_lpf_taps = parse(key, value)?,
            "pad_split" => {
                self.pad_split = match value.trim() {
                    "literal" => PadSplit::Literal,
                    "symmetric" => PadSplit::Symmetric,
                    other => return Err(Error::InvalidConfig(format!("unknown pad_split '{other}'"))),
                }
            }
            "papr_frame" => self.papr_frame = parse(key, value)?,
            "template" => self.template = parse(key, value)?,
            "ccdf_step_db" => self.ccdf_step_db = parse(key, value)?,
            "ber_min_bits" => self.ber_min_bits = parse(key, value)?,
            "ber_min_errors" => self.ber_min_errors = parse(key, value)?,
            "ber_max_bits" => self.ber_max_bits = parse(key, value)?,
            "table_snr_db" => self.table_snr_db = parse(key, value)?,
            "workers" => self.workers = parse(key, value)?,
            other => return Err(Error::InvalidConfig(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Applies a config file body on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            self.set(key.trim(), value.trim()).map_err(|e| match e {
                Error::InvalidConfig(msg) => Error::InvalidConfig(format!("line {}: {msg}", lineno + 1)),
                other => Error::InvalidConfig(format!("line {}: {other}", lineno + 1)),
            })?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Serializes every field in config-file syntax.
    pub fn to_text(&self) -> String {
        let pad = match self.pad_split {
            PadSplit::Literal => "literal",
            PadSplit::Symmetric => "symmetric",
        };
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("bandwidth_hz", self.bandwidth_hz.to_string());
        kv("oversampling_l", self.oversampling_l.to_string());
        kv("sample_rate_hz", self.sample_rate_hz().to_string());
        kv("carrier_freq_hz", self.carrier_freq_hz.to_string());
        kv("num_subcarriers_n", self.num_subcarriers_n.to_string());
        kv("cp_len", self.cp_len.to_string());
        kv("modulation", self.modulation.to_string());
        kv("clipping_ratios", join(&self.clipping_ratios));
        kv("scheme", self.scheme.to_string());
        kv("num_blocks", self.num_blocks.to_string());
        kv("snr_grid_db", join(&self.snr_grid_db));
        kv("master_seed", self.master_seed.to_string());
        kv("filter_num_taps", self.filter_num_taps.to_string());
        kv("filter_transition_hz", self.filter_transition_hz.to_string());
        kv("filter_pass_weight", self.filter_pass_weight.to_string());
        kv("filter_stop_weight", self.filter_stop_weight.to_string());
        kv("receiver_lpf_taps", self.receiver_lpf_taps.to_string());
        kv("pad_split", pad.to_string());
        kv("papr_frame", self.papr_frame.to_string());
        kv("template", self.template.to_string());
        kv("ccdf_step_db", self.ccdf_step_db.to_string());
        kv("ber_min_bits", self.ber_min_bits.to_string());
        kv("ber_min_errors", self.ber_min_errors.to_string());
        kv("ber_max_bits", self.ber_max_bits.to_string());
        kv("table_snr_db", self.table_snr_db.to_string());
        // workers is deliberately omitted: outputs must not depend on it.
        s
    }
}
