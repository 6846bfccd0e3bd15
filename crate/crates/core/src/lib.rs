//! Frequency diverse array (FDA) OFDM transmitter simulator for joint
//! communication and sensing.
//!
//! Every antenna of a uniform linear array radiates the same OFDM symbol
//! shifted by a small per-element frequency offset. The offset makes the
//! beam sweep the angular domain over time without phase shifters, at the
//! price of intercarrier interference (ICI) and an angle dependent
//! distortion of each received symbol. The modules below model the array,
//! the OFDM numerology, the transmitted waveform, the communication and
//! sensing channels, the receiver metrics (EVM, ISL, Doppler) and the
//! sweeps that tie them together.

pub mod array;
pub mod channels;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod metrics;
pub mod numerology;
pub mod waveform;

pub use array::{AntennaIndex, FdaConfig};
pub use error::{Result, SimError};
pub use numerology::{OfdmNumerology, SystemParameters};

/// Complex baseband sample type used throughout the crate.
pub type Complex = num_complex::Complex64;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
