//! OFDM grid and the radar/communication budget it implies for an FDA scan.

use crate::array::FdaConfig;
use crate::error::{Result, SimError};
use crate::SPEED_OF_LIGHT;

/// Cyclic prefix length conventionally used in sweeps, `K/4`.
pub fn default_cp_len(num_subcarriers: usize) -> usize {
    num_subcarriers / 4
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfdmNumerology {
    num_subcarriers: usize,
    bandwidth_hz: f64,
    cp_len: usize,
    num_scans: usize,
}

impl OfdmNumerology {
    pub fn new(num_subcarriers: usize, bandwidth_hz: f64, cp_len: usize, num_scans: usize) -> Result<Self> {
        if num_subcarriers < 2 {
            return Err(SimError::InvalidConfig(format!(
                "need at least 2 subcarriers, got {num_subcarriers}"
            )));
        }
        if !(bandwidth_hz > 0.0) || !bandwidth_hz.is_finite() {
            return Err(SimError::InvalidConfig(format!(
                "bandwidth must be positive, got {bandwidth_hz}"
            )));
        }
        if cp_len >= num_subcarriers {
            return Err(SimError::InvalidConfig(format!(
                "cyclic prefix length {cp_len} must be shorter than the {num_subcarriers} subcarriers"
            )));
        }
        if num_scans == 0 {
            return Err(SimError::InvalidConfig("need at least one scan".into()));
        }
        Ok(Self {
            num_subcarriers,
            bandwidth_hz,
            cp_len,
            num_scans,
        })
    }

    pub fn num_subcarriers(&self) -> usize {
        self.num_subcarriers
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz
    }

    pub fn cp_len(&self) -> usize {
        self.cp_len
    }

    pub fn num_scans(&self) -> usize {
        self.num_scans
    }

    /// `Δf_sc = B / K`.
    pub fn subcarrier_spacing_hz(&self) -> f64 {
        self.bandwidth_hz / self.num_subcarriers as f64
    }

    /// OFDM symbol duration including the cyclic prefix.
    pub fn symbol_duration_s(&self) -> f64 {
        (self.num_subcarriers + self.cp_len) as f64 / self.bandwidth_hz
    }
}

/// Minimum number of OFDM symbols per scan so every beam position gets a
/// full symbol: `⌈1.5·M⌉`.
pub fn symbols_per_scan(num_antennas: usize) -> usize {
    // ⌈3M/2⌉ in integers
    (3 * num_antennas).div_ceil(2)
}

/// Largest inter-element offset that completes one angular scan in
/// `⌈1.5·M⌉` symbols.
pub fn max_scan_frequency_hz(num: &OfdmNumerology, num_antennas: usize) -> f64 {
    1.0 / (symbols_per_scan(num_antennas) as f64 * num.symbol_duration_s())
}

/// Number of symbols a scan needs to cover one full beam period `1/Δf`,
/// never fewer than `⌈1.5·M⌉`. At `Δf = Δf_max` this is exactly `⌈1.5·M⌉`;
/// a static array (`Δf = 0`) also uses `⌈1.5·M⌉`.
pub fn scan_symbol_count(num: &OfdmNumerology, cfg: &FdaConfig) -> usize {
    let min = symbols_per_scan(cfg.num_antennas());
    if cfg.offset_hz() == 0.0 {
        return min;
    }
    let per_period = 1.0 / (cfg.offset_hz() * num.symbol_duration_s());
    // relative slack absorbs rounding when Δf is exactly Δf_max/n
    let count = (per_period * (1.0 - 1e-9)).ceil();
    if count >= usize::MAX as f64 {
        return usize::MAX;
    }
    (count as usize).max(min)
}

/// Duration of one scan, `scan_symbol_count · T_s`.
pub fn scan_period_s(num: &OfdmNumerology, cfg: &FdaConfig) -> f64 {
    scan_symbol_count(num, cfg) as f64 * num.symbol_duration_s()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParameters {
    pub symbol_duration_s: f64,
    pub angular_resolution_deg: f64,
    pub symbols_per_scan: usize,
    pub pri_s: f64,
    pub max_scan_freq_hz: f64,
    pub v_max_mps: f64,
    pub v_res_mps: f64,
    pub r_max_no_cp_m: f64,
    /// `None` without a cyclic prefix.
    pub r_max_w_cp_m: Option<f64>,
    pub r_res_m: f64,
    pub symbol_rate: f64,
    pub array_gain_db: f64,
}

impl SystemParameters {
    /// Symbol rate relative to a single-antenna system that needs one
    /// symbol per scan.
    pub fn normalized_symbol_rate(&self) -> f64 {
        1.0 / self.symbols_per_scan as f64
    }
}

pub fn derive_system_parameters(num: &OfdmNumerology, cfg: &FdaConfig) -> SystemParameters {
    let m = cfg.num_antennas();
    let k = num.num_subcarriers() as f64;
    let b = num.bandwidth_hz();
    let lambda = cfg.wavelength_m();
    let ts = num.symbol_duration_s();
    let l = symbols_per_scan(m);
    let tp = l as f64 * ts;
    let i = num.num_scans() as f64;
    SystemParameters {
        symbol_duration_s: ts,
        angular_resolution_deg: 120.0 / m as f64,
        symbols_per_scan: l,
        pri_s: tp,
        max_scan_freq_hz: 1.0 / tp,
        v_max_mps: lambda / (4.0 * tp),
        v_res_mps: lambda / (2.0 * i * tp),
        r_max_no_cp_m: SPEED_OF_LIGHT * k / (2.0 * b),
        r_max_w_cp_m: (num.cp_len() > 0).then(|| SPEED_OF_LIGHT * num.cp_len() as f64 / (2.0 * b)),
        r_res_m: SPEED_OF_LIGHT / (2.0 * b),
        symbol_rate: k * b / (l as f64 * (k + num.cp_len() as f64)),
        array_gain_db: 10.0 * (m as f64).log10(),
    }
}
