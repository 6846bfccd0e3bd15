//! QPSK/OFDM symbol synthesis, per-antenna frequency shift, intercarrier
//! interference and the steered frequency-domain transmit signal.
//!
//! The DFT length equals the number of subcarriers (critical sampling).
//! The cyclic prefix only enters through the symbol duration.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};

use crate::array::{beam_angle, AntennaIndex, FdaConfig};
use crate::error::{Result, SimError};
use crate::numerology::{scan_symbol_count, OfdmNumerology};
use crate::{Complex, SPEED_OF_LIGHT};

/// Forward/inverse DFT pair of a fixed length.
///
/// `forward` is unnormalised, `inverse` carries the `1/N` factor.
#[derive(Clone)]
pub struct Dft {
    len: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Dft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dft").field("len", &self.len).finish()
    }
}

impl Dft {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            len,
            fwd: planner.plan_fft_forward(len),
            inv: planner.plan_fft_inverse(len),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn forward(&self, buf: &mut [Complex]) {
        self.fwd.process(buf);
    }

    pub fn inverse(&self, buf: &mut [Complex]) {
        self.inv.process(buf);
        let scale = 1.0 / self.len as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
    }

    /// Unnormalised inverse transform, `Σ_n x(n)·e^{+j2πnk/N}`.
    pub fn inverse_unnormalized(&self, buf: &mut [Complex]) {
        self.inv.process(buf);
    }
}

/// One OFDM symbol worth of QPSK data.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationFrame {
    pub symbols: Vec<Complex>,
    pub seed: u64,
    pub stream: u64,
}

impl ModulationFrame {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// `K` unit-modulus QPSK symbols `(±1 ± j)/√2` drawn from a seeded generator.
pub fn generate_qpsk_frame(num_subcarriers: usize, seed: u64) -> Result<ModulationFrame> {
    generate_qpsk_frame_stream(num_subcarriers, seed, 0)
}

/// Like [`generate_qpsk_frame`] but from an independent generator stream,
/// used to give each symbol of a scan its own data.
pub fn generate_qpsk_frame_stream(num_subcarriers: usize, seed: u64, stream: u64) -> Result<ModulationFrame> {
    if num_subcarriers < 2 {
        return Err(SimError::InvalidConfig(format!(
            "need at least 2 subcarriers, got {num_subcarriers}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let symbols = (0..num_subcarriers)
        .map(|_| {
            let bits: u8 = rng.gen();
            let re = if bits & 1 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
            let im = if bits & 2 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
            Complex::new(re, im)
        })
        .collect();
    Ok(ModulationFrame {
        symbols,
        seed,
        stream,
    })
}

/// Time samples `y(n) = (1/N)·Σ_k s(k)·e^{j2πnk/N}`.
pub fn ofdm_modulate(frame: &ModulationFrame) -> Vec<Complex> {
    let mut y = frame.symbols.clone();
    Dft::new(y.len()).inverse(&mut y);
    y
}

/// Unnormalised forward DFT of a time-domain block.
pub fn dft(samples: &[Complex]) -> Vec<Complex> {
    let mut out = samples.to_vec();
    Dft::new(out.len()).forward(&mut out);
    out
}

/// Time samples radiated by element `m`: `y(n)·e^{j2π·m·ε·n/N}/√M`.
pub fn apply_frequency_shift(
    samples: &[Complex],
    m: AntennaIndex,
    epsilon: f64,
    num_antennas: usize,
) -> Vec<Complex> {
    let n_len = samples.len() as f64;
    let gain = 1.0 / (num_antennas as f64).sqrt();
    let rate = 2.0 * PI * m.value() * epsilon / n_len;
    samples
        .iter()
        .enumerate()
        .map(|(n, &y)| y * Complex::from_polar(gain, rate * n as f64))
        .collect()
}

/// Normalised ICI coefficient between subcarriers `l` and `k`, as a function
/// of `offset = l − k` and the element's normalised shift `m·ε`.
///
/// Closed form `e^{jπ(N−1)x/N}·sin(πx) / (N·sin(πx/N))` with
/// `x = offset + m·ε`; the value is 1 where `x` is a multiple of `N`.
pub fn ici_coefficient(n: usize, m: AntennaIndex, epsilon: f64, offset: i64) -> Complex {
    let n_f = n as f64;
    let x = offset as f64 + m.value() * epsilon;
    // the closed form has period N in x
    let x = x - n_f * (x / n_f).round();
    if x == 0.0 {
        return Complex::new(1.0, 0.0);
    }
    let mag = (PI * x).sin() / (n_f * (PI * x / n_f).sin());
    Complex::from_polar(1.0, PI * (n_f - 1.0) / n_f * x) * mag
}

/// Frequency-domain symbol of element `m` built from the ICI matrix,
/// `Σ_l s(l)·p_m(l−k)/√M`. Quadratic in `K`; the transmit path uses the DFT
/// route instead.
pub fn antenna_spectrum_via_ici(
    frame: &ModulationFrame,
    m: AntennaIndex,
    epsilon: f64,
    num_antennas: usize,
) -> Vec<Complex> {
    let n = frame.len();
    // p depends on (l − k) mod N only
    let p: Vec<Complex> = (0..n)
        .map(|d| ici_coefficient(n, m, epsilon, d as i64))
        .collect();
    let gain = 1.0 / (num_antennas as f64).sqrt();
    (0..n)
        .map(|k| {
            frame
                .symbols
                .iter()
                .enumerate()
                .map(|(l, &s)| s * p[(l + n - k) % n])
                .sum::<Complex>()
                * gain
        })
        .collect()
}

/// The symbols of one FDA scan and the instants they are steered at.
#[derive(Debug, Clone)]
pub struct ScanSignal {
    pub frames: Vec<ModulationFrame>,
    /// Mid-symbol steering instants `(l + 0.5)·T_s`.
    pub symbol_times: Vec<f64>,
    pub numerology: OfdmNumerology,
    /// `Δf / Δf_sc`.
    pub epsilon: f64,
}

impl ScanSignal {
    /// Scan covering one beam period (at least `⌈1.5·M⌉` symbols).
    pub fn new(num: &OfdmNumerology, cfg: &FdaConfig, seed: u64) -> Result<Self> {
        Self::with_symbols(num, cfg, seed, scan_symbol_count(num, cfg))
    }

    /// Scan of `num_symbols` symbols; symbol `l` carries data from
    /// generator stream `l` of `seed`.
    pub fn with_symbols(num: &OfdmNumerology, cfg: &FdaConfig, seed: u64, num_symbols: usize) -> Result<Self> {
        let epsilon = cfg.offset_hz() / num.subcarrier_spacing_hz();
        if !(0.0..1.0).contains(&epsilon) {
            return Err(SimError::InvalidConfig(format!(
                "normalised offset ε = {epsilon} must lie in [0, 1)"
            )));
        }
        if num_symbols == 0 {
            return Err(SimError::InvalidConfig("a scan needs at least one symbol".into()));
        }
        let k = num.num_subcarriers();
        let ts = num.symbol_duration_s();
        let frames = (0..num_symbols as u64)
            .map(|l| generate_qpsk_frame_stream(k, seed, l))
            .collect::<Result<Vec<_>>>()?;
        let symbol_times = (0..num_symbols).map(|l| (l as f64 + 0.5) * ts).collect();
        Ok(Self {
            frames,
            symbol_times,
            numerology: *num,
            epsilon,
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Per-antenna frequency-domain transmit vectors of one scan symbol.
#[derive(Debug, Clone)]
pub struct TransmitSymbol {
    pub symbol_index: usize,
    pub time_s: f64,
    pub theta_tx: f64,
    /// DFT of each element's shifted time signal, before steering.
    pub unsteered: Vec<Vec<Complex>>,
    /// With the full steering phasor `e^{−j2π(f_c + kΔf_sc + mΔf)(m·d_a/c)·sin θ_TX}`.
    pub steered: Vec<Vec<Complex>>,
    /// Without the element offset, `e^{−j2π(f_c + kΔf_sc)(m·d_a/c)·sin θ_TX}`,
    /// the form used by the simplified channel models.
    pub steered_baseband: Vec<Vec<Complex>>,
}

/// Reusable transmitter for one `(numerology, array)` pair.
#[derive(Debug, Clone)]
pub struct Transmitter {
    cfg: FdaConfig,
    num: OfdmNumerology,
    dft: Dft,
}

impl Transmitter {
    pub fn new(num: &OfdmNumerology, cfg: &FdaConfig) -> Self {
        Self {
            cfg: *cfg,
            num: *num,
            dft: Dft::new(num.num_subcarriers()),
        }
    }

    pub fn dft(&self) -> &Dft {
        &self.dft
    }

    pub fn symbol(&self, scan: &ScanSignal, symbol_index: usize) -> Result<TransmitSymbol> {
        let frame = scan.frames.get(symbol_index).ok_or_else(|| {
            SimError::InvalidScenario(format!(
                "symbol {symbol_index} is outside a scan of {} symbols",
                scan.len()
            ))
        })?;
        let k_len = self.num.num_subcarriers();
        if frame.len() != k_len {
            return Err(SimError::Shape {
                expected: k_len,
                actual: frame.len(),
            });
        }
        let time_s = scan.symbol_times[symbol_index];
        let theta_tx = beam_angle(&self.cfg, time_s).ok_or_else(|| {
            SimError::InvalidScenario(format!("no mainbeam at t = {time_s} s"))
        })?;

        let mut y = frame.symbols.clone();
        self.dft.inverse(&mut y);

        let num_antennas = self.cfg.num_antennas();
        let sin_tx = theta_tx.sin();
        let dfsc = self.num.subcarrier_spacing_hz();
        let df = self.cfg.offset_hz();
        let fc = self.cfg.carrier_hz();
        let mut unsteered = Vec::with_capacity(num_antennas);
        let mut steered = Vec::with_capacity(num_antennas);
        let mut steered_baseband = Vec::with_capacity(num_antennas);
        for m in self.cfg.indices() {
            let mut spec = apply_frequency_shift(&y, m, scan.epsilon, num_antennas);
            self.dft.forward(&mut spec);
            let delay = m.value() * self.cfg.spacing_m() / SPEED_OF_LIGHT * sin_tx;
            let full: Vec<Complex> = spec
                .iter()
                .enumerate()
                .map(|(k, &v)| {
                    let f = fc + k as f64 * dfsc + m.value() * df;
                    v * Complex::from_polar(1.0, -2.0 * PI * f * delay)
                })
                .collect();
            let base: Vec<Complex> = spec
                .iter()
                .enumerate()
                .map(|(k, &v)| v * Complex::from_polar(1.0, -2.0 * PI * (fc + k as f64 * dfsc) * delay))
                .collect();
            unsteered.push(spec);
            steered.push(full);
            steered_baseband.push(base);
        }
        Ok(TransmitSymbol {
            symbol_index,
            time_s,
            theta_tx,
            unsteered,
            steered,
            steered_baseband,
        })
    }
}

/// Steered per-antenna spectra of symbol `symbol_index` of a scan.
pub fn transmit_fd_signal(scan: &ScanSignal, cfg: &FdaConfig, symbol_index: usize) -> Result<TransmitSymbol> {
    Transmitter::new(&scan.numerology, cfg).symbol(scan, symbol_index)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_ici(n: usize, mu: f64, offset: i64) -> Complex {
        let x = offset as f64 + mu;
        (0..n)
            .map(|i| Complex::from_polar(1.0, 2.0 * PI * i as f64 * x / n as f64))
            .sum::<Complex>()
            / n as f64
    }

    #[test]
    fn qpsk_frame_properties() {
        let a = generate_qpsk_frame(256, 7).unwrap();
        let b = generate_qpsk_frame(256, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_qpsk_frame(256, 8).unwrap());
        assert_ne!(a.symbols, generate_qpsk_frame_stream(256, 7, 1).unwrap().symbols);
        for s in &a.symbols {
            assert!((s.norm() - 1.0).abs() < 1e-15);
            assert_eq!(s.re.abs(), FRAC_1_SQRT_2);
            assert_eq!(s.im.abs(), FRAC_1_SQRT_2);
        }
        let p: f64 = a.symbols.iter().map(|s| s.norm_sqr()).sum::<f64>() / 256.0;
        assert!((p - 1.0).abs() < 1e-15);
        assert!(generate_qpsk_frame(1, 0).is_err());
        // all four points used
        let mut quadrants = [false; 4];
        for s in &a.symbols {
            quadrants[usize::from(s.re < 0.0) + 2 * usize::from(s.im < 0.0)] = true;
        }
        assert!(quadrants.iter().all(|&q| q));
    }

    #[test]
    fn modulate_all_ones_is_delta() {
        let frame = ModulationFrame {
            symbols: vec![Complex::new(1.0, 0.0); 64],
            seed: 0,
            stream: 0,
        };
        let y = ofdm_modulate(&frame);
        assert!((y[0] - Complex::new(1.0, 0.0)).norm() < 1e-15);
        assert!(y[1..].iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn modulate_round_trip_and_parseval() {
        let frame = generate_qpsk_frame(128, 3).unwrap();
        let y = ofdm_modulate(&frame);
        let back = dft(&y);
        for (a, b) in back.iter().zip(&frame.symbols) {
            assert!((a - b).norm() < 1e-12);
        }
        let time: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        let freq: f64 = frame.symbols.iter().map(|v| v.norm_sqr()).sum::<f64>() / 128.0;
        assert!((time - freq).abs() < 1e-12);
    }

    #[test]
    fn frequency_shift_power() {
        let frame = generate_qpsk_frame(64, 1).unwrap();
        let y = ofdm_modulate(&frame);
        let cfg = FdaConfig::half_wavelength(4, 60e9, 0.0).unwrap();
        let zero = apply_frequency_shift(&y, AntennaIndex::from_twice(3), 0.0, 4);
        for (a, b) in zero.iter().zip(&y) {
            assert!((a - b / 2.0).norm() < 1e-16);
        }
        let total_in: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        let mut total_out = 0.0;
        for m in cfg.indices() {
            let ym = apply_frequency_shift(&y, m, 0.3, 4);
            for (a, b) in ym.iter().zip(&y) {
                assert!((a.norm() - b.norm() / 2.0).abs() < 1e-15);
            }
            total_out += ym.iter().map(|v| v.norm_sqr()).sum::<f64>();
        }
        assert!((total_in - total_out).abs() < 1e-14);
    }

    #[test]
    fn ici_orthogonal_point() {
        let m0 = AntennaIndex::from_twice(0);
        assert_eq!(ici_coefficient(64, m0, 0.3, 0), Complex::new(1.0, 0.0));
        for off in [1, 5, -3, 63, -63, 100] {
            assert!(ici_coefficient(64, m0, 0.3, off).norm() < 1e-15);
        }
        assert_eq!(ici_coefficient(64, m0, 0.3, 64), Complex::new(1.0, 0.0));
        // continuity as ε → 0
        let m = AntennaIndex::from_twice(2);
        let p = ici_coefficient(1024, m, 1e-9, 0);
        assert!((p - Complex::new(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn ici_half_subcarrier_magnitude() {
        // m·ε = 0.5 at N = 1024; direct sum oracle gives 1/(1024·sin(π/2048))
        let m = AntennaIndex::from_twice(1);
        let p = ici_coefficient(1024, m, 1.0, 0);
        let oracle = direct_ici(1024, 0.5, 0);
        assert!((p - oracle).norm() < 1e-12);
        assert!((p.norm() - 0.636_620_1).abs() < 1e-6);
        assert!((p.norm() - 1.0 / (1024.0 * (PI / 2048.0).sin())).abs() < 1e-14);
    }

    #[test]
    fn ici_is_circulant() {
        let m = AntennaIndex::from_twice(-3);
        for off in -40..40i64 {
            let a = ici_coefficient(32, m, 0.21, off);
            let b = ici_coefficient(32, m, 0.21, off + 32);
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn ici_path_matches_dft_path() {
        let frame = generate_qpsk_frame(64, 11).unwrap();
        let y = ofdm_modulate(&frame);
        for tw in [-3, -1, 1, 3] {
            let m = AntennaIndex::from_twice(tw);
            let mut via_dft = apply_frequency_shift(&y, m, 0.27, 4);
            Dft::new(64).forward(&mut via_dft);
            let via_ici = antenna_spectrum_via_ici(&frame, m, 0.27, 4);
            for (a, b) in via_dft.iter().zip(&via_ici) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn transmit_without_offset_is_scaled_data() {
        let num = OfdmNumerology::new(64, 100e6, 16, 1).unwrap();
        let cfg = FdaConfig::half_wavelength(4, 60e9, 0.0).unwrap();
        let scan = ScanSignal::with_symbols(&num, &cfg, 5, 3).unwrap();
        assert_eq!(scan.epsilon, 0.0);
        let tx = transmit_fd_signal(&scan, &cfg, 0).unwrap();
        assert_eq!(tx.theta_tx, 0.0);
        for ym in &tx.steered {
            for (a, s) in ym.iter().zip(&scan.frames[0].symbols) {
                assert!((a - s / 2.0).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn steering_preserves_power() {
        let num = OfdmNumerology::new(128, 100e6, 32, 1).unwrap();
        let dfmax = crate::numerology::max_scan_frequency_hz(&num, 4);
        let cfg = FdaConfig::half_wavelength(4, 60e9, dfmax).unwrap();
        let scan = ScanSignal::new(&num, &cfg, 2).unwrap();
        assert_eq!(scan.len(), 6);
        let tx = transmit_fd_signal(&scan, &cfg, 1).unwrap();
        assert!(tx.theta_tx != 0.0);
        for ((u, s), b) in tx.unsteered.iter().zip(&tx.steered).zip(&tx.steered_baseband) {
            let pu: f64 = u.iter().map(|v| v.norm_sqr()).sum::<f64>() / 128.0;
            let ps: f64 = s.iter().map(|v| v.norm_sqr()).sum::<f64>() / 128.0;
            let pb: f64 = b.iter().map(|v| v.norm_sqr()).sum::<f64>() / 128.0;
            assert!((pu - ps).abs() < 1e-14);
            assert!((pu - pb).abs() < 1e-14);
        }
        assert!(transmit_fd_signal(&scan, &cfg, 99).is_err());
    }

    #[test]
    fn scan_timing_and_epsilon() {
        let num = OfdmNumerology::new(256, 100e6, 64, 1).unwrap();
        let dfmax = crate::numerology::max_scan_frequency_hz(&num, 2);
        let cfg = FdaConfig::half_wavelength(2, 60e9, dfmax).unwrap();
        let scan = ScanSignal::new(&num, &cfg, 0).unwrap();
        assert_eq!(scan.len(), 3);
        assert!((scan.epsilon - 0.8 / 3.0).abs() < 1e-15);
        let ts = num.symbol_duration_s();
        for w in scan.symbol_times.windows(2) {
            assert!((w[1] - w[0] - ts).abs() < 1e-18);
        }
        assert!((scan.symbol_times[0] - ts / 2.0).abs() < 1e-20);
        // offset at or above the subcarrier spacing is rejected
        let fast = FdaConfig::half_wavelength(2, 60e9, num.subcarrier_spacing_hz()).unwrap();
        assert!(ScanSignal::with_symbols(&num, &fast, 0, 3).is_err());
    }
}
