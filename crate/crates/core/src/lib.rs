//! Deterministic symbolic analysis of Grover-search circuits.
//!
//! The crate parses and prints a QASM 3.0 subset ([`qasm`]), generates Grover
//! circuits ([`circuits`]), simulates them exactly ([`simulator`]), recovers the
//! marked states and output distribution symbolically from the oracle
//! structure ([`analyzer`]), scores predictions ([`metrics`]), tokenizes QASM
//! ([`tokenizer`]) and runs dataset/evaluation/timing sweeps ([`bench`]).
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the common instantiations.

pub mod analyzer;
pub mod bench;
pub mod bits;
pub mod circuits;
pub mod distribution;
pub mod error;
pub mod metrics;
pub mod qasm;
pub mod scalar;
pub mod simulator;
pub mod tokenizer;

pub use bits::Bitstring;
pub use distribution::Distribution;
pub use error::Error;
pub use scalar::Real;

/// Double-precision distribution (the default everywhere).
pub type Distribution64 = Distribution<f64>;
/// Single-precision distribution.
pub type Distribution32 = Distribution<f32>;
pub type StateVector64 = simulator::StateVector<f64>;
pub type StateVector32 = simulator::StateVector<f32>;
pub type AnalyticParams64 = analyzer::AnalyticParams<f64>;
pub type MetricReport64 = metrics::MetricReport<f64>;

/// Complex amplitude type at double precision.
pub type C64 = num_complex::Complex<f64>;
