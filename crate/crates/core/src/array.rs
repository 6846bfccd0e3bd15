//! Array geometry, per-element frequencies and the time varying array
//! factor of a frequency diverse uniform linear array.
//!
//! Elements are indexed symmetrically around the array centre: integer
//! indices `{0, ±1, …}` for odd `M`, half-integer indices `{±0.5, ±1.5, …}`
//! for even `M`. The centre of the array is the phase reference.

use std::f64::consts::PI;

use crate::error::{Result, SimError};
use crate::{Complex, SPEED_OF_LIGHT};

/// Largest accepted ratio between the outermost element offset
/// `Δf·(M−1)/2` and the carrier. Beyond it the quadratic phase term can no
/// longer be neglected.
pub const MAX_OFFSET_TO_CARRIER: f64 = 1e-3;

/// Floor applied to normalised beampattern power so exact nulls stay finite.
pub const POWER_FLOOR_DB: f64 = -300.0;

/// Symmetric antenna index, stored as twice its value so that half-integer
/// indices of even-sized arrays are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AntennaIndex {
    twice: i32,
}

impl AntennaIndex {
    /// Index from its doubled value, e.g. `from_twice(-1)` is `m = -0.5`.
    pub const fn from_twice(twice: i32) -> Self {
        Self { twice }
    }

    pub const fn twice(self) -> i32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        f64::from(self.twice) / 2.0
    }
}

impl std::fmt::Display for AntennaIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}", self.value())
        }
    }
}

/// Ascending symmetric indices of an `M`-element array; they sum to zero.
pub fn antenna_indices(num_antennas: usize) -> Result<Vec<AntennaIndex>> {
    if num_antennas == 0 {
        return Err(SimError::InvalidConfig(
            "array must have at least one antenna".into(),
        ));
    }
    let m = i32::try_from(num_antennas)
        .map_err(|_| SimError::InvalidConfig(format!("{num_antennas} antennas is too many")))?;
    Ok((0..m)
        .map(|i| AntennaIndex::from_twice(2 * i - (m - 1)))
        .collect())
}

/// The physical FDA transmitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdaConfig {
    num_antennas: usize,
    carrier_hz: f64,
    offset_hz: f64,
    spacing_m: f64,
}

impl FdaConfig {
    pub fn new(num_antennas: usize, carrier_hz: f64, offset_hz: f64, spacing_m: f64) -> Result<Self> {
        let cfg = Self {
            num_antennas,
            carrier_hz,
            offset_hz,
            spacing_m,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Array with `λ_c/2` element spacing.
    pub fn half_wavelength(num_antennas: usize, carrier_hz: f64, offset_hz: f64) -> Result<Self> {
        if !(carrier_hz > 0.0) || !carrier_hz.is_finite() {
            return Err(SimError::InvalidConfig(format!(
                "carrier frequency must be positive, got {carrier_hz}"
            )));
        }
        Self::new(
            num_antennas,
            carrier_hz,
            offset_hz,
            SPEED_OF_LIGHT / carrier_hz / 2.0,
        )
    }

    /// Same array with a different inter-element frequency offset.
    pub fn with_offset(&self, offset_hz: f64) -> Result<Self> {
        Self::new(self.num_antennas, self.carrier_hz, offset_hz, self.spacing_m)
    }

    fn validate(&self) -> Result<()> {
        if self.num_antennas == 0 {
            return Err(SimError::InvalidConfig(
                "array must have at least one antenna".into(),
            ));
        }
        if !(self.carrier_hz > 0.0) || !self.carrier_hz.is_finite() {
            return Err(SimError::InvalidConfig(format!(
                "carrier frequency must be positive, got {}",
                self.carrier_hz
            )));
        }
        if !(self.offset_hz >= 0.0) || !self.offset_hz.is_finite() {
            return Err(SimError::InvalidConfig(format!(
                "frequency offset must be non-negative, got {}",
                self.offset_hz
            )));
        }
        if !(self.spacing_m > 0.0) || !self.spacing_m.is_finite() {
            return Err(SimError::InvalidConfig(format!(
                "element spacing must be positive, got {}",
                self.spacing_m
            )));
        }
        let outer = self.offset_hz * (self.num_antennas as f64 - 1.0) / 2.0;
        if outer >= MAX_OFFSET_TO_CARRIER * self.carrier_hz {
            return Err(SimError::InvalidConfig(format!(
                "outermost frequency offset {outer} Hz is not negligible against the carrier {} Hz",
                self.carrier_hz
            )));
        }
        Ok(())
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn carrier_hz(&self) -> f64 {
        self.carrier_hz
    }

    pub fn offset_hz(&self) -> f64 {
        self.offset_hz
    }

    pub fn spacing_m(&self) -> f64 {
        self.spacing_m
    }

    /// Carrier wavelength `λ_c = c / f_c`.
    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    /// Element spacing in carrier wavelengths, `d_a / λ_c`.
    pub fn spacing_wavelengths(&self) -> f64 {
        self.spacing_m / self.wavelength_m()
    }

    pub fn indices(&self) -> Vec<AntennaIndex> {
        // validated at construction
        antenna_indices(self.num_antennas).expect("validated antenna count")
    }
}

/// Per-element carrier `f_m = f_c + m·Δf`, in index order.
pub fn antenna_frequencies(cfg: &FdaConfig) -> Vec<f64> {
    cfg.indices()
        .into_iter()
        .map(|m| cfg.carrier_hz + m.value() * cfg.offset_hz)
        .collect()
}

/// Phase of element `m` relative to the array centre for a far-field point
/// at distance `distance_m` and angle `theta`, keeping the `m²` term.
pub fn phase_shift_exact(cfg: &FdaConfig, m: AntennaIndex, distance_m: f64, theta: f64) -> f64 {
    let m = m.value();
    let s = theta.sin();
    2.0 * PI / SPEED_OF_LIGHT
        * (m * cfg.offset_hz * distance_m
            + m * m * cfg.offset_hz * cfg.spacing_m * s
            + cfg.carrier_hz * m * cfg.spacing_m * s)
}

/// Phase of element `m` with the quadratic term dropped and range replaced
/// by propagation time `t = d / c`.
pub fn phase_shift_approx(cfg: &FdaConfig, m: AntennaIndex, t: f64, theta: f64) -> f64 {
    2.0 * PI * m.value() * scan_phase(cfg, theta, t)
}

/// `Δf·t + (d_a/λ_c)·sin θ`, the per-index phase in cycles.
fn scan_phase(cfg: &FdaConfig, theta: f64, t: f64) -> f64 {
    cfg.offset_hz * t + cfg.spacing_wavelengths() * theta.sin()
}

/// Array factor as the explicit sum over the symmetric element indices,
/// normalised so the total radiated power is one.
pub fn array_factor(cfg: &FdaConfig, theta: f64, t: f64) -> Complex {
    let u = scan_phase(cfg, theta, t);
    let sum: Complex = cfg
        .indices()
        .into_iter()
        .map(|m| Complex::from_polar(1.0, 2.0 * PI * m.value() * u))
        .sum();
    sum / (cfg.num_antennas as f64).sqrt()
}

/// Array factor through the `sin(Mπu)/sin(πu)` ratio.
///
/// The argument is reduced to the nearest integer before evaluating the
/// ratio. At the removable singularities the direct sum is returned.
pub fn array_factor_closed_form(cfg: &FdaConfig, theta: f64, t: f64) -> Complex {
    let u = scan_phase(cfg, theta, t);
    let n = u.round();
    let r = u - n;
    let den = (PI * r).sin();
    if den == 0.0 {
        return array_factor(cfg, theta, t);
    }
    let big_m = cfg.num_antennas as f64;
    // sin(Mπ(r+n)) / sin(π(r+n)) = (−1)^{(M−1)n} sin(Mπr) / sin(πr)
    let parity = ((cfg.num_antennas as i64 - 1) * n as i64).rem_euclid(2);
    let sign = if parity == 0 { 1.0 } else { -1.0 };
    Complex::new(sign * (big_m * PI * r).sin() / den / big_m.sqrt(), 0.0)
}

/// Mainbeam direction at time `t`.
///
/// `t` is folded into the symmetric period `[−1/(2Δf), 1/(2Δf))`. Returns
/// `None` when no mainbeam exists inside visible space, which can only
/// happen for spacings wider than half a wavelength. A zero offset gives a
/// static broadside beam.
pub fn beam_angle(cfg: &FdaConfig, t: f64) -> Option<f64> {
    if cfg.offset_hz == 0.0 {
        return Some(0.0);
    }
    let period = 1.0 / cfg.offset_hz;
    let folded = t - period * ((t + period / 2.0) / period).floor();
    let arg = cfg.offset_hz * folded / cfg.spacing_wavelengths();
    if arg.abs() <= 1.0 {
        Some(-arg.asin())
    } else {
        None
    }
}

/// `|AF|²/M` sampled over time (rows) and angle (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Beampattern {
    pub theta: Vec<f64>,
    pub t: Vec<f64>,
    /// Row-major `t.len() × theta.len()` power in dB; 0 dB is full array gain.
    pub power_db: Vec<f64>,
}

impl Beampattern {
    pub fn at(&self, t_index: usize, theta_index: usize) -> f64 {
        self.power_db[t_index * self.theta.len() + theta_index]
    }

    pub fn row(&self, t_index: usize) -> &[f64] {
        let n = self.theta.len();
        &self.power_db[t_index * n..(t_index + 1) * n]
    }
}

pub fn beampattern_grid(cfg: &FdaConfig, theta_grid: &[f64], t_grid: &[f64]) -> Result<Beampattern> {
    if theta_grid.is_empty() || t_grid.is_empty() {
        return Err(SimError::InvalidConfig(
            "beampattern grids must be non-empty".into(),
        ));
    }
    let power: Vec<f64> = t_grid
        .iter()
        .flat_map(|&t| theta_grid.iter().map(move |&th| array_factor(cfg, th, t).norm_sqr()))
        .collect();
    // coherent peak |AF|² = M
    let peak = cfg.num_antennas() as f64;
    let power_db = power
        .into_iter()
        .map(|p| {
            if p > 0.0 {
                (10.0 * (p / peak).log10()).max(POWER_FLOOR_DB)
            } else {
                POWER_FLOOR_DB
            }
        })
        .collect();
    Ok(Beampattern {
        theta: theta_grid.to_vec(),
        t: t_grid.to_vec(),
        power_db,
    })
}
