//! Line-of-sight communication channel and point-scatterer sensing channel.
//!
//! Both channels are flat per subcarrier. The exact models keep every
//! `m·Δf` term; the simplified models assume `M·Δf ≪ Δf_sc` and reduce the
//! angle dependence to `Δφ = sin θ_TX − sin θ_RX` (or `θ_q` for a target).
//! Steering is applied once by the transmitter, so the channels only
//! contribute the receiver or target angle term.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::array::{AntennaIndex, FdaConfig};
use crate::error::{Result, SimError};
use crate::numerology::{scan_period_s, OfdmNumerology};
use crate::waveform::TransmitSymbol;
use crate::{Complex, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ChannelModel {
    #[default]
    Exact,
    Simplified,
}

impl std::fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ChannelModel::Exact => "exact",
            ChannelModel::Simplified => "simplified",
        })
    }
}

/// Single-antenna communication receiver in the far field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommReceiver {
    pub distance_m: f64,
    pub angle: f64,
    pub attenuation: Complex,
}

impl CommReceiver {
    pub fn new(distance_m: f64, angle: f64) -> Result<Self> {
        Self::with_attenuation(distance_m, angle, Complex::new(1.0, 0.0))
    }

    pub fn with_attenuation(distance_m: f64, angle: f64, attenuation: Complex) -> Result<Self> {
        check_geometry(distance_m, angle)?;
        Ok(Self {
            distance_m,
            angle,
            attenuation,
        })
    }
}

/// Isotropic point scatterer observed by a receiver at the array centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scatterer {
    pub distance_m: f64,
    pub angle: f64,
    pub reflectivity: Complex,
    pub velocity_mps: f64,
}

impl Scatterer {
    pub fn new(distance_m: f64, angle: f64, reflectivity: Complex, velocity_mps: f64) -> Result<Self> {
        check_geometry(distance_m, angle)?;
        if !velocity_mps.is_finite() {
            return Err(SimError::InvalidScenario(format!(
                "target velocity must be finite, got {velocity_mps}"
            )));
        }
        Ok(Self {
            distance_m,
            angle,
            reflectivity,
            velocity_mps,
        })
    }
}

fn check_geometry(distance_m: f64, angle: f64) -> Result<()> {
    if !(distance_m > 0.0) || !distance_m.is_finite() {
        return Err(SimError::InvalidScenario(format!(
            "distance must be positive, got {distance_m}"
        )));
    }
    if !(angle.abs() <= PI / 2.0) {
        return Err(SimError::InvalidScenario(format!(
            "angle {angle} rad lies outside [−π/2, π/2]"
        )));
    }
    Ok(())
}

/// Received frequency-domain symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedFrame {
    pub samples: Vec<Complex>,
    pub symbol_index: usize,
    pub model: ChannelModel,
}

/// Propagation phase `φ_k = −2π·k·Δf_sc·d/c`.
pub fn propagation_phase(k: usize, num: &OfdmNumerology, distance_m: f64) -> f64 {
    -2.0 * PI * k as f64 * num.subcarrier_spacing_hz() * distance_m / SPEED_OF_LIGHT
}

/// `h_m(k) = α·e^{−j2π(kΔf_sc + mΔf)·d/c}·e^{+j2π(f_c + kΔf_sc + mΔf)(m·d_a/c)·sin θ_RX}`.
///
/// The aperture term runs at the element's RF frequency; the common
/// carrier phase of the path delay is part of `α`.
pub fn comm_channel_coefficient(
    k: usize,
    m: AntennaIndex,
    cfg: &FdaConfig,
    num: &OfdmNumerology,
    rx: &CommReceiver,
) -> Complex {
    let f = k as f64 * num.subcarrier_spacing_hz() + m.value() * cfg.offset_hz();
    let aperture = m.value() * cfg.spacing_m() / SPEED_OF_LIGHT * rx.angle.sin();
    let phase = -2.0 * PI * f * rx.distance_m / SPEED_OF_LIGHT
        + 2.0 * PI * (cfg.carrier_hz() + f) * aperture;
    rx.attenuation * Complex::from_polar(1.0, phase)
}

/// Slow-time phasor of scan `l_scan`, `e^{−j2π·l_scan·T_p·2v/λ_c}`.
///
/// The two-way factor makes one Doppler bin of an `I`-scan DFT equal the
/// velocity resolution `λ_c/(2·I·T_p)`.
pub fn doppler_phasor(cfg: &FdaConfig, pri_s: f64, velocity_mps: f64, l_scan: usize) -> Complex {
    let cycles = l_scan as f64 * pri_s * 2.0 * velocity_mps / cfg.wavelength_m();
    Complex::from_polar(1.0, -2.0 * PI * cycles)
}

/// `q_m(k) = γ·e^{−j2π·l·T_p·2v/λ_c}·e^{−j2π(mΔf + kΔf_sc)·2d/c}·e^{+j2π(f_c + mΔf + kΔf_sc)·m·d_a·sin θ_q/c}`
/// for scan `l_scan`, with `T_p` the duration of one scan.
pub fn sensing_channel_coefficient(
    k: usize,
    m: AntennaIndex,
    cfg: &FdaConfig,
    num: &OfdmNumerology,
    q: &Scatterer,
    l_scan: usize,
) -> Complex {
    let pri = scan_period_s(num, cfg);
    q.reflectivity
        * doppler_phasor(cfg, pri, q.velocity_mps, l_scan)
        * sensing_static_phasor(k, m, cfg, num, q)
}

fn sensing_static_phasor(
    k: usize,
    m: AntennaIndex,
    cfg: &FdaConfig,
    num: &OfdmNumerology,
    q: &Scatterer,
) -> Complex {
    let f = m.value() * cfg.offset_hz() + k as f64 * num.subcarrier_spacing_hz();
    let aperture = m.value() * cfg.spacing_m() * q.angle.sin();
    let phase = -2.0 * PI * f * 2.0 * q.distance_m + 2.0 * PI * (cfg.carrier_hz() + f) * aperture;
    Complex::from_polar(1.0, phase / SPEED_OF_LIGHT)
}

/// Per-antenna, per-subcarrier gains applied to one of the transmit
/// vector sets of a [`TransmitSymbol`], precomputed for a fixed geometry.
#[derive(Debug, Clone)]
pub struct LinkGains {
    model: ChannelModel,
    /// `[antenna][subcarrier]`
    gains: Vec<Vec<Complex>>,
}

impl LinkGains {
    /// Communication link towards `rx`.
    pub fn comm(cfg: &FdaConfig, num: &OfdmNumerology, rx: &CommReceiver, model: ChannelModel) -> Self {
        let k_len = num.num_subcarriers();
        let dfsc = num.subcarrier_spacing_hz();
        let sin_rx = rx.angle.sin();
        let fc = cfg.carrier_hz();
        let gains = cfg
            .indices()
            .into_iter()
            .map(|m| {
                (0..k_len)
                    .map(|k| match model {
                        ChannelModel::Exact => comm_channel_coefficient(k, m, cfg, num, rx),
                        ChannelModel::Simplified => {
                            let rx_term = 2.0 * PI * (fc + k as f64 * dfsc) * m.value() * cfg.spacing_m()
                                / SPEED_OF_LIGHT
                                * sin_rx;
                            rx.attenuation
                                * Complex::from_polar(1.0, propagation_phase(k, num, rx.distance_m))
                                * Complex::from_polar(1.0, rx_term)
                        }
                    })
                    .collect()
            })
            .collect();
        Self { model, gains }
    }

    /// Sensing link for scatterer `q`, excluding the slow-time Doppler term.
    pub fn sensing(cfg: &FdaConfig, num: &OfdmNumerology, q: &Scatterer, model: ChannelModel) -> Self {
        let k_len = num.num_subcarriers();
        let dfsc = num.subcarrier_spacing_hz();
        let sin_q = q.angle.sin();
        let fc = cfg.carrier_hz();
        let gains = cfg
            .indices()
            .into_iter()
            .map(|m| {
                (0..k_len)
                    .map(|k| match model {
                        ChannelModel::Exact => q.reflectivity * sensing_static_phasor(k, m, cfg, num, q),
                        ChannelModel::Simplified => {
                            let tgt_term = 2.0 * PI * (fc + k as f64 * dfsc) * m.value() * cfg.spacing_m()
                                / SPEED_OF_LIGHT
                                * sin_q;
                            q.reflectivity
                                * Complex::from_polar(1.0, 2.0 * propagation_phase(k, num, q.distance_m))
                                * Complex::from_polar(1.0, tgt_term)
                        }
                    })
                    .collect()
            })
            .collect();
        Self { model, gains }
    }

    pub fn model(&self) -> ChannelModel {
        self.model
    }

    /// Sums the per-antenna received signals into `out`, scaled by `scale`.
    pub fn apply_into(&self, tx: &TransmitSymbol, scale: Complex, out: &mut [Complex]) -> Result<()> {
        let vectors = match self.model {
            ChannelModel::Exact => &tx.steered,
            ChannelModel::Simplified => &tx.steered_baseband,
        };
        if vectors.len() != self.gains.len() {
            return Err(SimError::Shape {
                expected: self.gains.len(),
                actual: vectors.len(),
            });
        }
        let k_len = self.gains.first().map_or(0, Vec::len);
        if out.len() != k_len {
            return Err(SimError::Shape {
                expected: k_len,
                actual: out.len(),
            });
        }
        out.iter_mut().for_each(|v| *v = Complex::new(0.0, 0.0));
        for (y, g) in vectors.iter().zip(&self.gains) {
            if y.len() != k_len {
                return Err(SimError::Shape {
                    expected: k_len,
                    actual: y.len(),
                });
            }
            for ((o, &yv), &gv) in out.iter_mut().zip(y).zip(g) {
                *o += yv * gv;
            }
        }
        if scale != Complex::new(1.0, 0.0) {
            out.iter_mut().for_each(|v| *v *= scale);
        }
        Ok(())
    }

    pub fn apply(&self, tx: &TransmitSymbol, scale: Complex) -> Result<ReceivedFrame> {
        let mut samples = vec![Complex::new(0.0, 0.0); self.gains.first().map_or(0, Vec::len)];
        self.apply_into(tx, scale, &mut samples)?;
        Ok(ReceivedFrame {
            samples,
            symbol_index: tx.symbol_index,
            model: self.model,
        })
    }
}

/// Received communication symbol `r(k) = Σ_m y_m(k, t_l)·h_m(k)`.
pub fn received_comm_frame(
    tx: &TransmitSymbol,
    cfg: &FdaConfig,
    num: &OfdmNumerology,
    rx: &CommReceiver,
    model: ChannelModel,
) -> Result<ReceivedFrame> {
    LinkGains::comm(cfg, num, rx, model).apply(tx, Complex::new(1.0, 0.0))
}

/// Target return `x(k) = Σ_m y_m(k, t_l)·q_m(k)` during scan `l_scan`.
pub fn received_sensing_frame(
    tx: &TransmitSymbol,
    cfg: &FdaConfig,
    num: &OfdmNumerology,
    q: &Scatterer,
    l_scan: usize,
    model: ChannelModel,
) -> Result<ReceivedFrame> {
    let doppler = doppler_phasor(cfg, scan_period_s(num, cfg), q.velocity_mps, l_scan);
    LinkGains::sensing(cfg, num, q, model).apply(tx, doppler)
}

/// Adds circular complex white noise at `snr_db` relative to a unit-power
/// subcarrier.
pub fn add_awgn<R: Rng + ?Sized>(samples: &mut [Complex], snr_db: f64, rng: &mut R) {
    let sigma = (10f64.powf(-snr_db / 10.0) / 2.0).sqrt();
    for v in samples {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *v += Complex::new(re, im) * sigma;
    }
}
