//! OFDM PAPR reduction by passband clipping and FFT-domain filtering.
//!
//! The library is generic over the scalar type (`f32` or `f64`) through
//! [`Real`]; the aliases at the crate root fix it to `f64`.

pub mod channel;
pub mod config;
pub mod dsp;
pub mod error;
pub mod fir;
pub mod harness;
pub mod modem;
pub mod peak;
pub mod rng;
pub mod scalar;

pub use config::SimulationConfig;
pub use error::{Error, Result};
pub use harness::{estimate_ber, estimate_ccdf, papr_at_ccdf, reproduce_tables, BerCurve, CcdfCurve, Harness};
pub use modem::{BitBlock, ModulationScheme};
pub use peak::{PaprFrame, Scheme, TemplateKind};
pub use scalar::Real;

pub type Complex64 = num_complex::Complex<f64>;
pub type BasebandBlock = dsp::BasebandBlock<f64>;
pub type PassbandBlock = dsp::PassbandBlock<f64>;
pub type SpectrumBlock = dsp::SpectrumBlock<f64>;
pub type SymbolBlock = modem::SymbolBlock<f64>;
pub type FilterSpec = fir::FilterSpec<f64>;
pub type FirFilter = fir::FirFilter<f64>;
pub type FrequencyMask = fir::FrequencyMask<f64>;
pub type ChainPlan = peak::ChainPlan<f64>;
pub type ChainOutput = peak::ChainOutput<f64>;
