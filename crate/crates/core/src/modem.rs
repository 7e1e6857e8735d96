//! Bit source, Gray-coded QPSK / 16-QAM mapping, hard-decision demapping and
//! bit-error counting.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rand::RngCore;

use crate::error::{invalid_input, Error, Result};
use crate::rng::stream_rng;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitBlock {
    bits: Vec<u8>,
}

impl BitBlock {
    /// Every element must be 0 or 1.
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(invalid_input("bits must be 0 or 1"));
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ModulationScheme {
    #[default]
    Qpsk,
    Qam16,
}

impl ModulationScheme {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            ModulationScheme::Qpsk => 2,
            ModulationScheme::Qam16 => 4,
        }
    }

    pub fn all() -> [ModulationScheme; 2] {
        [ModulationScheme::Qpsk, ModulationScheme::Qam16]
    }
}

impl fmt::Display for ModulationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModulationScheme::Qpsk => "qpsk",
            ModulationScheme::Qam16 => "qam16",
        })
    }
}

impl FromStr for ModulationScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Self::Qpsk),
            "qam16" | "16qam" | "qam" => Ok(Self::Qam16),
            other => Err(Error::InvalidConfig(format!("unknown modulation '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolBlock<T> {
    symbols: Vec<Complex<T>>,
}

impl<T: Real> SymbolBlock<T> {
    pub fn new(symbols: Vec<Complex<T>>) -> Self {
        Self { symbols }
    }

    pub fn symbols(&self) -> &[Complex<T>] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<Complex<T>> {
        self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// `count` pseudo-random bits from ChaCha8 seeded with `seed`, drawn 64 at a
/// time and consumed least-significant bit first.
pub fn generate_bits(count: usize, seed: u64) -> BitBlock {
    let mut rng = stream_rng(seed);
    let mut bits = Vec::with_capacity(count);
    while bits.len() < count {
        let word = rng.next_u64();
        let take = (count - bits.len()).min(64);
        bits.extend((0..take).map(|i| ((word >> i) & 1) as u8));
    }
    BitBlock { bits }
}

/// Gray 4-PAM on `{+3, +1, -1, -3}` for bit pairs `01, 00, 10, 11`.
fn pam4_level(sign: u8, outer: u8) -> f64 {
    (1.0 - 2.0 * sign as f64) * (1.0 + 2.0 * outer as f64)
}

pub fn map_symbols<T: Real>(bits: &BitBlock, scheme: ModulationScheme) -> Result<SymbolBlock<T>> {
    let bps = scheme.bits_per_symbol();
    if !bits.len().is_multiple_of(bps) {
        return Err(invalid_input(format!(
            "{} bits do not divide into {bps}-bit symbols",
            bits.len()
        )));
    }
    let symbols = bits
        .bits
        .chunks_exact(bps)
        .map(|c| match scheme {
            ModulationScheme::Qpsk => {
                let s = T::FRAC_1_SQRT_2();
                Complex::new(
                    s * T::lit(1.0 - 2.0 * c[0] as f64),
                    s * T::lit(1.0 - 2.0 * c[1] as f64),
                )
            }
            ModulationScheme::Qam16 => {
                let s = T::one() / T::lit(10.0).sqrt();
                Complex::new(s * T::lit(pam4_level(c[0], c[1])), s * T::lit(pam4_level(c[2], c[3])))
            }
        })
        .collect();
    Ok(SymbolBlock { symbols })
}

/// Minimum-distance hard decisions.
pub fn demap_symbols<T: Real>(symbols: &SymbolBlock<T>, scheme: ModulationScheme) -> BitBlock {
    let mut bits = Vec::with_capacity(symbols.len() * scheme.bits_per_symbol());
    let sign = |v: T| u8::from(v < T::zero());
    let qam_threshold = T::lit(2.0) / T::lit(10.0).sqrt();
    for s in &symbols.symbols {
        match scheme {
            ModulationScheme::Qpsk => {
                bits.push(sign(s.re));
                bits.push(sign(s.im));
            }
            ModulationScheme::Qam16 => {
                bits.push(sign(s.re));
                bits.push(u8::from(s.re.abs() > qam_threshold));
                bits.push(sign(s.im));
                bits.push(u8::from(s.im.abs() > qam_threshold));
            }
        }
    }
    BitBlock { bits }
}

/// Hamming distance and its ratio to the block length.
pub fn count_bit_errors(sent: &BitBlock, received: &BitBlock) -> Result<(u64, f64)> {
    if sent.len() != received.len() {
        return Err(invalid_input(format!(
            "length mismatch: {} sent vs {} received",
            sent.len(),
            received.len()
        )));
    }
    let errors = sent.bits.iter().zip(&received.bits).filter(|(a, b)| a != b).count() as u64;
    let ber = if sent.is_empty() {
        0.0
    } else {
        errors as f64 / sent.len() as f64
    };
    Ok((errors, ber))
}
