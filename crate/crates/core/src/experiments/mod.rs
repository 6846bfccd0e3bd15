//! Scenario orchestration: full-scan simulations and the deterministic
//! sweeps built on them.
//!
//! A scan transmits every symbol of one beam period at its steering
//! instant and evaluates each symbol at every angle of the grid. Sweeps
//! reduce a scan to its worst case: the minimum over symbols at each angle
//! (the best symbol a receiver at that angle could use), then the maximum
//! of that envelope over angles.

mod output;
mod scan;
pub mod svg;
mod sweep;

use sha2::{Digest, Sha256};

use crate::array::FdaConfig;
use crate::channels::ChannelModel;
use crate::error::{Result, SimError};
use crate::numerology::{default_cp_len, max_scan_frequency_hz, OfdmNumerology};
use crate::{Complex, SPEED_OF_LIGHT};

pub use output::{
    write_beampattern, write_doppler, write_range_angle_map, write_scan, write_sweep,
    write_system_sweep, OutputFormat,
};
pub use scan::{
    doppler_scan, range_angle_scan, run_scan, scan_envelope, DopplerResult, Envelope, ScanOutput,
    WorstCase,
};
pub use sweep::{
    logspace_fractions, sweep_scan_frequency, sweep_subcarriers, sweep_system_parameters,
    PointResult, SummaryRow, SweepKind, SweepResult, SystemSweep, SystemSweepRow,
};

/// Relative slack accepted when an absolute offset is compared to `Δf_max`.
const OFFSET_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OffsetSpec {
    Hz(f64),
    /// Fraction of the maximum scanning frequency `1/T_p`.
    FractionOfMax(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Link {
    Comm,
    Sensing,
    #[default]
    Both,
}

impl Link {
    pub fn comm(self) -> bool {
        matches!(self, Link::Comm | Link::Both)
    }

    pub fn sensing(self) -> bool {
        matches!(self, Link::Sensing | Link::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Evm,
    Isl,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Evm => "evm",
            Metric::Isl => "isl",
        }
    }

    /// EVM is an amplitude ratio, ISL a power ratio.
    pub fn to_db(self, linear: f64) -> f64 {
        match self {
            Metric::Evm => crate::metrics::amplitude_db(linear),
            Metric::Isl => crate::metrics::power_db(linear),
        }
    }
}

/// Everything needed to simulate one scan configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub num_antennas: usize,
    pub carrier_hz: f64,
    /// Element spacing in carrier wavelengths.
    pub spacing_wavelengths: f64,
    pub offset: OffsetSpec,
    pub numerology: OfdmNumerology,
    pub link: Link,
    pub model: ChannelModel,
    /// One-way receiver delay in samples of `1/B`; keeps the receiver on grid.
    pub receiver_delay_samples: usize,
    pub attenuation: Complex,
    /// Target range in resolution cells `c/(2B)`.
    pub target_range_bin: usize,
    pub target_angle_deg: f64,
    pub reflectivity: Complex,
    pub target_velocity_mps: f64,
    /// Receiver/target angle grid in degrees.
    pub angles_deg: Vec<f64>,
    pub seed: u64,
    pub repetitions: usize,
    /// Optional per-subcarrier SNR; `None` is noiseless.
    pub snr_db: Option<f64>,
}

/// `points` evenly spaced angles over `[min_deg, max_deg]`.
pub fn angle_grid_deg(min_deg: f64, max_deg: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![min_deg],
        n => (0..n)
            .map(|i| min_deg + (max_deg - min_deg) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

impl Scenario {
    /// Desk-scale defaults: K = 256, N_cp = 64, B = 100 MHz, f_c = 60 GHz,
    /// half-wavelength spacing, scanning at `Δf_max`, 181 angles, 20 seeds.
    /// Receiver and target sit 8 samples away, inside the prefix of every
    /// `K ≥ 64` with `N_cp = K/4`.
    pub fn desk_scale(num_antennas: usize) -> Self {
        Self {
            num_antennas,
            carrier_hz: 60e9,
            spacing_wavelengths: 0.5,
            offset: OffsetSpec::FractionOfMax(1.0),
            numerology: OfdmNumerology::new(256, 100e6, 64, 1).expect("valid defaults"),
            link: Link::Both,
            model: ChannelModel::Exact,
            receiver_delay_samples: 8,
            attenuation: Complex::new(1.0, 0.0),
            target_range_bin: 8,
            target_angle_deg: 0.0,
            reflectivity: Complex::new(1.0, 0.0),
            target_velocity_mps: 0.0,
            angles_deg: angle_grid_deg(-90.0, 90.0, 181),
            seed: 1,
            repetitions: 20,
            snr_db: None,
        }
    }

    pub fn with_antennas(&self, num_antennas: usize) -> Self {
        Self {
            num_antennas,
            ..self.clone()
        }
    }

    /// Same scenario with `K` subcarriers and the conventional `K/4` prefix.
    pub fn with_subcarriers(&self, num_subcarriers: usize) -> Result<Self> {
        let n = &self.numerology;
        Ok(Self {
            numerology: OfdmNumerology::new(
                num_subcarriers,
                n.bandwidth_hz(),
                default_cp_len(num_subcarriers),
                n.num_scans(),
            )?,
            ..self.clone()
        })
    }

    pub fn with_offset(&self, offset: OffsetSpec) -> Self {
        Self {
            offset,
            ..self.clone()
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn max_scan_frequency_hz(&self) -> f64 {
        max_scan_frequency_hz(&self.numerology, self.num_antennas)
    }

    pub fn offset_hz(&self) -> f64 {
        match self.offset {
            OffsetSpec::Hz(hz) => hz,
            OffsetSpec::FractionOfMax(f) => f * self.max_scan_frequency_hz(),
        }
    }

    pub fn df_fraction(&self) -> f64 {
        self.offset_hz() / self.max_scan_frequency_hz()
    }

    pub fn fda_config(&self) -> Result<FdaConfig> {
        self.validate()?;
        FdaConfig::new(
            self.num_antennas,
            self.carrier_hz,
            self.offset_hz(),
            self.spacing_wavelengths * SPEED_OF_LIGHT / self.carrier_hz,
        )
    }

    pub fn receiver_distance_m(&self) -> f64 {
        self.receiver_delay_samples as f64 * SPEED_OF_LIGHT / self.numerology.bandwidth_hz()
    }

    pub fn target_distance_m(&self) -> f64 {
        self.target_range_bin as f64 * SPEED_OF_LIGHT / (2.0 * self.numerology.bandwidth_hz())
    }

    pub fn angles_rad(&self) -> Vec<f64> {
        self.angles_deg.iter().map(|a| a.to_radians()).collect()
    }

    /// Seed of repetition `rep`.
    pub fn rep_seed(&self, rep: usize) -> u64 {
        self.seed.wrapping_add(rep as u64)
    }

    /// Short label used in result rows.
    pub fn id(&self) -> String {
        format!(
            "m{}_k{}_f{}",
            self.num_antennas,
            self.numerology.num_subcarriers(),
            self.df_fraction()
        )
    }

    /// Hash of the full resolved scenario, recorded as output provenance.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(format!("{self:?}").as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_antennas == 0 {
            return Err(SimError::InvalidConfig("num_antennas must be at least 1".into()));
        }
        if !(self.carrier_hz > 0.0) {
            return Err(SimError::InvalidConfig(format!(
                "carrier_hz must be positive, got {}",
                self.carrier_hz
            )));
        }
        if !(self.spacing_wavelengths > 0.0) || !self.spacing_wavelengths.is_finite() {
            return Err(SimError::InvalidConfig(format!(
                "spacing must be positive, got {} wavelengths",
                self.spacing_wavelengths
            )));
        }
        let max = self.max_scan_frequency_hz();
        match self.offset {
            OffsetSpec::FractionOfMax(f) => {
                if !(f >= 0.0) || !f.is_finite() {
                    return Err(SimError::InvalidConfig(format!(
                        "offset fraction must be non-negative, got {f}"
                    )));
                }
                if f > 1.0 {
                    return Err(SimError::InvalidConfig(format!(
                        "offset fraction {f} exceeds maximum scanning frequency {max} Hz"
                    )));
                }
            }
            OffsetSpec::Hz(hz) => {
                if !(hz >= 0.0) || !hz.is_finite() {
                    return Err(SimError::InvalidConfig(format!(
                        "offset must be non-negative, got {hz} Hz"
                    )));
                }
                if hz > max * (1.0 + OFFSET_SLACK) {
                    return Err(SimError::InvalidConfig(format!(
                        "offset {hz} Hz exceeds maximum scanning frequency {max} Hz"
                    )));
                }
            }
        }
        let k = self.numerology.num_subcarriers();
        if self.link.comm() && self.receiver_delay_samples == 0 {
            return Err(SimError::InvalidConfig(
                "receiver delay must be at least one sample".into(),
            ));
        }
        if self.link.comm() && self.attenuation.norm() == 0.0 {
            return Err(SimError::InvalidConfig(
                "receiver attenuation must be non-zero".into(),
            ));
        }
        if self.target_range_bin == 0 || self.target_range_bin >= k {
            return Err(SimError::InvalidConfig(format!(
                "target range bin {} must lie in 1..{k}",
                self.target_range_bin
            )));
        }
        if !(self.target_angle_deg.abs() <= 90.0) {
            return Err(SimError::InvalidConfig(format!(
                "target angle {} deg lies outside [−90, 90]",
                self.target_angle_deg
            )));
        }
        if !self.target_velocity_mps.is_finite() {
            return Err(SimError::InvalidConfig("target velocity must be finite".into()));
        }
        if self.angles_deg.is_empty() {
            return Err(SimError::InvalidConfig("angle grid is empty".into()));
        }
        if let Some(a) = self.angles_deg.iter().find(|a| !(a.abs() <= 90.0)) {
            return Err(SimError::InvalidConfig(format!(
                "grid angle {a} deg lies outside [−90, 90]"
            )));
        }
        if self.repetitions == 0 {
            return Err(SimError::InvalidConfig("repetitions must be at least 1".into()));
        }
        Ok(())
    }
}
