//! Receiver side processing: genie equalisation, EVM, zero-forcing channel
//! estimation, range profiles, ISL, slow-time Doppler and range-angle maps.

use crate::channels::{propagation_phase, ReceivedFrame};
use crate::error::{Result, SimError};
use crate::numerology::OfdmNumerology;
use crate::waveform::{Dft, ModulationFrame};
use crate::Complex;

/// Smallest symbol magnitude the zero-forcing estimator divides by.
pub const ZF_GUARD: f64 = 1e-9;

/// Exact channel knowledge used to equalise the communication link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Genie {
    pub attenuation: Complex,
    pub distance_m: f64,
    pub num_antennas: usize,
}

/// `r_eq(k) = r(k)·e^{−jφ_k} / (α·√M)`.
///
/// Removes attenuation, propagation phase and the nominal coherent array
/// gain; whatever distortion the FDA introduced stays in the result.
pub fn equalize_comm(r: &ReceivedFrame, genie: &Genie, num: &OfdmNumerology) -> Result<Vec<Complex>> {
    let mut out = r.samples.clone();
    equalize_comm_in_place(&mut out, genie, num)?;
    Ok(out)
}

pub fn equalize_comm_in_place(samples: &mut [Complex], genie: &Genie, num: &OfdmNumerology) -> Result<()> {
    if genie.attenuation.norm() == 0.0 {
        return Err(SimError::InvalidScenario(
            "cannot equalise a link with zero attenuation coefficient".into(),
        ));
    }
    if samples.len() != num.num_subcarriers() {
        return Err(SimError::Shape {
            expected: num.num_subcarriers(),
            actual: samples.len(),
        });
    }
    let inv = 1.0 / (genie.attenuation * (genie.num_antennas as f64).sqrt());
    for (k, v) in samples.iter_mut().enumerate() {
        *v *= Complex::from_polar(1.0, -propagation_phase(k, num, genie.distance_m)) * inv;
    }
    Ok(())
}

/// RMS error vector normalised by the RMS symbol magnitude.
pub fn evm(s: &ModulationFrame, r_eq: &[Complex]) -> Result<f64> {
    evm_of(&s.symbols, r_eq)
}

pub fn evm_of(s: &[Complex], r_eq: &[Complex]) -> Result<f64> {
    if s.len() != r_eq.len() {
        return Err(SimError::Shape {
            expected: s.len(),
            actual: r_eq.len(),
        });
    }
    if s.is_empty() {
        return Err(SimError::UndefinedMetric("EVM of an empty frame".into()));
    }
    let n = s.len() as f64;
    let err = s.iter().zip(r_eq).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / n;
    let ref_mag = (s.iter().map(|a| a.norm_sqr()).sum::<f64>() / n).sqrt();
    if ref_mag == 0.0 {
        return Err(SimError::UndefinedMetric("EVM against an all-zero reference".into()));
    }
    Ok(err.sqrt() / ref_mag)
}

/// Amplitude ratio in dB.
pub fn amplitude_db(x: f64) -> f64 {
    20.0 * x.log10()
}

/// Power ratio in dB.
pub fn power_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `q̂(k) = x(k) / s(k)`.
pub fn zf_channel_estimate(x: &ReceivedFrame, s: &ModulationFrame) -> Result<Vec<Complex>> {
    let mut out = x.samples.clone();
    zf_in_place(&mut out, &s.symbols)?;
    Ok(out)
}

pub fn zf_in_place(x: &mut [Complex], s: &[Complex]) -> Result<()> {
    if x.len() != s.len() {
        return Err(SimError::Shape {
            expected: s.len(),
            actual: x.len(),
        });
    }
    for (i, (v, &sv)) in x.iter_mut().zip(s).enumerate() {
        let mag = sv.norm();
        if mag < ZF_GUARD {
            return Err(SimError::DivisionGuard {
                index: i,
                magnitude: mag,
            });
        }
        *v /= sv;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeProfile {
    pub bins: Vec<Complex>,
    pub peak_index: usize,
}

impl RangeProfile {
    pub fn from_bins(bins: Vec<Complex>) -> Self {
        let peak_index = argmax_power(&bins);
        Self { bins, peak_index }
    }

    pub fn power(&self) -> Vec<f64> {
        self.bins.iter().map(|v| v.norm_sqr()).collect()
    }
}

fn argmax_power(bins: &[Complex]) -> usize {
    let mut best = 0;
    let mut best_p = f64::NEG_INFINITY;
    for (i, v) in bins.iter().enumerate() {
        let p = v.norm_sqr();
        if p > best_p {
            best = i;
            best_p = p;
        }
    }
    best
}

/// Range profile as the `1/K`-normalised IDFT of a channel estimate.
pub fn range_profile(q_hat: &[Complex]) -> Result<RangeProfile> {
    if q_hat.len() < 2 {
        return Err(SimError::Shape {
            expected: 2,
            actual: q_hat.len(),
        });
    }
    let mut bins = q_hat.to_vec();
    Dft::new(bins.len()).inverse(&mut bins);
    Ok(RangeProfile::from_bins(bins))
}

/// Energy outside the peak bin over the peak-bin energy.
pub fn isl(p: &RangeProfile) -> Result<f64> {
    isl_of(&p.bins)
}

pub fn isl_of(bins: &[Complex]) -> Result<f64> {
    if bins.len() < 2 {
        return Err(SimError::Shape {
            expected: 2,
            actual: bins.len(),
        });
    }
    let peak_index = argmax_power(bins);
    let peak = bins[peak_index].norm_sqr();
    if peak == 0.0 {
        return Err(SimError::UndefinedMetric("ISL of an all-zero range profile".into()));
    }
    let side: f64 = bins
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != peak_index)
        .map(|(_, v)| v.norm_sqr())
        .sum();
    Ok(side / peak)
}

/// Slow-time spectrum `D(j) = Σ_i v_i·e^{+j2π·i·j/I}` of one range bin
/// across `I` scans.
///
/// The positive exponent matches the `e^{−j2π·l·T_p·2v/λ}` slow-time
/// phasor, so a receding target at `j` velocity resolutions peaks at bin
/// `j`.
pub fn doppler_spectrum(values: &[Complex]) -> Result<Vec<Complex>> {
    if values.len() < 2 {
        return Err(SimError::InvalidScenario(format!(
            "Doppler processing needs at least 2 scans, got {}",
            values.len()
        )));
    }
    let mut out = values.to_vec();
    Dft::new(out.len()).inverse_unnormalized(&mut out);
    Ok(out)
}

/// Strongest Doppler bin, as `(bin, centred bin)` with the centred bin in
/// `[−I/2, I/2)`.
pub fn doppler_peak(spectrum: &[Complex]) -> (usize, i64) {
    let bin = argmax_power(spectrum);
    (bin, centered_bin(bin, spectrum.len()))
}

pub fn centered_bin(bin: usize, len: usize) -> i64 {
    let (b, n) = (bin as i64, len as i64);
    if 2 * b >= n {
        b - n
    } else {
        b
    }
}

/// Velocity of a centred Doppler bin, `bin·λ_c/(2·I·T_p)`.
pub fn doppler_bin_velocity(centered: i64, wavelength_m: f64, num_scans: usize, pri_s: f64) -> f64 {
    centered as f64 * wavelength_m / (2.0 * num_scans as f64 * pri_s)
}

/// Per-symbol range power, one row per transmitted symbol and its beam angle.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeAngleMap {
    pub angles: Vec<f64>,
    /// `[symbol][range bin]` power `|p_l(k)|²`.
    pub power: Vec<Vec<f64>>,
}

impl RangeAngleMap {
    /// `(row, range bin)` of the strongest cell.
    pub fn peak(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut best_p = f64::NEG_INFINITY;
        for (r, row) in self.power.iter().enumerate() {
            for (c, &p) in row.iter().enumerate() {
                if p > best_p {
                    best_p = p;
                    best = (r, c);
                }
            }
        }
        best
    }
}

pub fn range_angle_map(profiles: &[RangeProfile], beam_angles: &[f64]) -> Result<RangeAngleMap> {
    if profiles.len() != beam_angles.len() {
        return Err(SimError::Shape {
            expected: beam_angles.len(),
            actual: profiles.len(),
        });
    }
    Ok(RangeAngleMap {
        angles: beam_angles.to_vec(),
        power: profiles.iter().map(RangeProfile::power).collect(),
    })
}

/// Metrics of one symbol at one receiver or target angle.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub scenario_id: String,
    pub symbol_index: usize,
    pub angle: f64,
    pub evm: Option<f64>,
    pub isl: Option<f64>,
}

impl MetricsRecord {
    pub fn evm_db(&self) -> Option<f64> {
        self.evm.map(amplitude_db)
    }

    pub fn isl_db(&self) -> Option<f64> {
        self.isl.map(power_db)
    }
}
