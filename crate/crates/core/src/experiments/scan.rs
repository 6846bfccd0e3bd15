use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Metric, Scenario};
use crate::array::FdaConfig;
use crate::channels::{add_awgn, doppler_phasor, CommReceiver, LinkGains, Scatterer};
use crate::error::{Result, SimError};
use crate::metrics::{
    doppler_bin_velocity, doppler_peak, doppler_spectrum, equalize_comm_in_place, evm_of, isl_of,
    range_angle_map, zf_in_place, Genie, MetricsRecord, RangeAngleMap, RangeProfile,
};
use crate::numerology::{scan_period_s, scan_symbol_count, OfdmNumerology};
use crate::waveform::{ScanSignal, Transmitter};
use crate::Complex;

const NOISE_SALT: u64 = 0x6e6f_6973_655f_7278;
const SCAN_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Worst point of a min-over-symbols envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstCase {
    /// Linear metric value.
    pub value: f64,
    /// Grid angle (rad) where the envelope peaks.
    pub angle: f64,
    /// Symbol achieving the envelope at that angle.
    pub symbol_index: usize,
}

/// Per-angle minimum of a metric over the symbols of a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub metric: Metric,
    pub angles: Vec<f64>,
    pub values: Vec<f64>,
    pub symbols: Vec<usize>,
}

impl Envelope {
    fn empty(metric: Metric, angles: &[f64]) -> Self {
        Self {
            metric,
            angles: angles.to_vec(),
            values: vec![f64::INFINITY; angles.len()],
            symbols: vec![usize::MAX; angles.len()],
        }
    }

    fn absorb(&mut self, symbol: usize, row: &[f64]) {
        for ((v, s), &x) in self.values.iter_mut().zip(self.symbols.iter_mut()).zip(row) {
            if x < *v || (x == *v && symbol < *s) {
                *v = x;
                *s = symbol;
            }
        }
    }

    fn merge(mut self, other: &Envelope) -> Self {
        for i in 0..self.values.len() {
            let (x, s) = (other.values[i], other.symbols[i]);
            if x < self.values[i] || (x == self.values[i] && s < self.symbols[i]) {
                self.values[i] = x;
                self.symbols[i] = s;
            }
        }
        self
    }

    /// Maximum over angles; the first angle wins ties.
    pub fn worst(&self) -> WorstCase {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        WorstCase {
            value: self.values[best],
            angle: self.angles[best],
            symbol_index: self.symbols[best],
        }
    }

    pub fn values_db(&self) -> Vec<f64> {
        self.values.iter().map(|&v| self.metric.to_db(v)).collect()
    }
}

/// Per-symbol, per-angle metrics of one scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanOutput {
    pub scenario_id: String,
    pub seed: u64,
    pub num_antennas: usize,
    pub num_subcarriers: usize,
    pub df_fraction: f64,
    pub offset_hz: f64,
    /// Grid angles (rad).
    pub angles: Vec<f64>,
    pub symbol_times: Vec<f64>,
    /// Beam direction `θ_TX(t_l)` of every symbol (rad).
    pub beam_angles: Vec<f64>,
    /// `[symbol][angle]` linear EVM.
    pub evm: Option<Vec<Vec<f64>>>,
    /// `[symbol][angle]` linear ISL.
    pub isl: Option<Vec<Vec<f64>>>,
}

impl ScanOutput {
    fn matrix(&self, metric: Metric) -> Option<&Vec<Vec<f64>>> {
        match metric {
            Metric::Evm => self.evm.as_ref(),
            Metric::Isl => self.isl.as_ref(),
        }
    }

    pub fn envelope(&self, metric: Metric) -> Option<Envelope> {
        let m = self.matrix(metric)?;
        let mut env = Envelope::empty(metric, &self.angles);
        for (l, row) in m.iter().enumerate() {
            env.absorb(l, row);
        }
        Some(env)
    }

    pub fn worst_case(&self, metric: Metric) -> Option<WorstCase> {
        self.envelope(metric).map(|e| e.worst())
    }

    pub fn records(&self) -> Vec<MetricsRecord> {
        let mut out = Vec::with_capacity(self.symbol_times.len() * self.angles.len());
        for l in 0..self.symbol_times.len() {
            for (a, &angle) in self.angles.iter().enumerate() {
                out.push(MetricsRecord {
                    scenario_id: self.scenario_id.clone(),
                    symbol_index: l,
                    angle,
                    evm: self.evm.as_ref().map(|m| m[l][a]),
                    isl: self.isl.as_ref().map(|m| m[l][a]),
                });
            }
        }
        out
    }
}

struct ScanKernel {
    cfg: FdaConfig,
    num: OfdmNumerology,
    scan: ScanSignal,
    trans: Transmitter,
    comm: Vec<LinkGains>,
    sense: Vec<LinkGains>,
    genie: Genie,
    seed: u64,
    snr_db: Option<f64>,
}

impl ScanKernel {
    fn new(scenario: &Scenario, rep: usize) -> Result<Self> {
        let cfg = scenario.fda_config()?;
        let num = scenario.numerology;
        let seed = scenario.rep_seed(rep);
        let scan = ScanSignal::new(&num, &cfg, seed)?;
        let trans = Transmitter::new(&num, &cfg);
        let angles = scenario.angles_rad();
        let comm = if scenario.link.comm() {
            angles
                .iter()
                .map(|&a| {
                    let rx = CommReceiver::with_attenuation(
                        scenario.receiver_distance_m(),
                        a,
                        scenario.attenuation,
                    )?;
                    Ok(LinkGains::comm(&cfg, &num, &rx, scenario.model))
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        let sense = if scenario.link.sensing() {
            angles
                .iter()
                .map(|&a| {
                    let q = Scatterer::new(
                        scenario.target_distance_m(),
                        a,
                        scenario.reflectivity,
                        scenario.target_velocity_mps,
                    )?;
                    Ok(LinkGains::sensing(&cfg, &num, &q, scenario.model))
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok(Self {
            cfg,
            num,
            scan,
            trans,
            comm,
            sense,
            genie: Genie {
                attenuation: scenario.attenuation,
                distance_m: scenario.receiver_distance_m(),
                num_antennas: scenario.num_antennas,
            },
            seed,
            snr_db: scenario.snr_db,
        })
    }

    fn noise(&self, symbol: usize, angle: usize, link: u64, buf: &mut [Complex]) {
        if let Some(snr) = self.snr_db {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ NOISE_SALT);
            let stream = ((symbol * self.comm.len().max(self.sense.len()) + angle) as u64) << 1 | link;
            rng.set_stream(stream);
            add_awgn(buf, snr, &mut rng);
        }
    }

    /// EVM and ISL rows (one value per grid angle) of symbol `l`.
    fn evaluate(&self, l: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let tx = self.trans.symbol(&self.scan, l)?;
        let s = &self.scan.frames[l].symbols;
        let mut buf = vec![Complex::new(0.0, 0.0); self.num.num_subcarriers()];
        let one = Complex::new(1.0, 0.0);

        let mut evm_row = Vec::with_capacity(self.comm.len());
        for (a, gains) in self.comm.iter().enumerate() {
            gains.apply_into(&tx, one, &mut buf)?;
            self.noise(l, a, 0, &mut buf);
            equalize_comm_in_place(&mut buf, &self.genie, &self.num)?;
            evm_row.push(evm_of(s, &buf)?);
        }

        let mut isl_row = Vec::with_capacity(self.sense.len());
        for (a, gains) in self.sense.iter().enumerate() {
            gains.apply_into(&tx, one, &mut buf)?;
            self.noise(l, a, 1, &mut buf);
            zf_in_place(&mut buf, s)?;
            self.trans.dft().inverse(&mut buf);
            isl_row.push(isl_of(&buf)?);
        }
        Ok((evm_row, isl_row))
    }

    fn len(&self) -> usize {
        self.scan.len()
    }
}

fn beam_angles(scan: &ScanSignal, cfg: &FdaConfig) -> Result<Vec<f64>> {
    scan.symbol_times
        .iter()
        .map(|&t| {
            crate::array::beam_angle(cfg, t)
                .ok_or_else(|| SimError::InvalidScenario(format!("no mainbeam at t = {t} s")))
        })
        .collect()
}

/// Simulates repetition `rep` of a scenario and keeps every per-symbol,
/// per-angle metric.
pub fn run_scan(scenario: &Scenario, rep: usize) -> Result<ScanOutput> {
    let kernel = ScanKernel::new(scenario, rep)?;
    let rows = (0..kernel.len())
        .into_par_iter()
        .map(|l| kernel.evaluate(l))
        .collect::<Result<Vec<_>>>()?;
    let (evm, isl): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok(ScanOutput {
        scenario_id: scenario.id(),
        seed: kernel.seed,
        num_antennas: scenario.num_antennas,
        num_subcarriers: kernel.num.num_subcarriers(),
        df_fraction: scenario.df_fraction(),
        offset_hz: kernel.cfg.offset_hz(),
        angles: scenario.angles_rad(),
        symbol_times: kernel.scan.symbol_times.clone(),
        beam_angles: beam_angles(&kernel.scan, &kernel.cfg)?,
        evm: scenario.link.comm().then_some(evm),
        isl: scenario.link.sensing().then_some(isl),
    })
}

/// Min-over-symbols envelopes of one repetition without materialising the
/// full per-symbol matrices.
pub fn scan_envelope(scenario: &Scenario, rep: usize) -> Result<(Option<Envelope>, Option<Envelope>)> {
    let kernel = ScanKernel::new(scenario, rep)?;
    let angles = scenario.angles_rad();
    let init = || {
        (
            Envelope::empty(Metric::Evm, &angles),
            Envelope::empty(Metric::Isl, &angles),
        )
    };
    let (evm, isl) = (0..kernel.len())
        .into_par_iter()
        .try_fold(init, |(mut e, mut i), l| {
            let (er, ir) = kernel.evaluate(l)?;
            e.absorb(l, &er);
            i.absorb(l, &ir);
            Ok::<_, SimError>((e, i))
        })
        .try_reduce(init, |(e1, i1), (e2, i2)| Ok((e1.merge(&e2), i1.merge(&i2))))?;
    Ok((
        scenario.link.comm().then_some(evm),
        scenario.link.sensing().then_some(isl),
    ))
}

fn scan_seed(seed: u64, scan_index: usize) -> u64 {
    seed ^ (scan_index as u64).wrapping_mul(SCAN_SALT)
}

fn nearest_beam(beams: &[f64], angle: f64) -> usize {
    let mut best = 0;
    for (i, b) in beams.iter().enumerate() {
        if (b - angle).abs() < (beams[best] - angle).abs() {
            best = i;
        }
    }
    best
}

/// Range-angle map of the scenario's single target over one scan.
pub fn range_angle_scan(scenario: &Scenario) -> Result<RangeAngleMap> {
    let cfg = scenario.fda_config()?;
    let num = scenario.numerology;
    let scan = ScanSignal::new(&num, &cfg, scenario.seed)?;
    let trans = Transmitter::new(&num, &cfg);
    let q = Scatterer::new(
        scenario.target_distance_m(),
        scenario.target_angle_deg.to_radians(),
        scenario.reflectivity,
        scenario.target_velocity_mps,
    )?;
    let gains = LinkGains::sensing(&cfg, &num, &q, scenario.model);
    let profiles = (0..scan.len())
        .into_par_iter()
        .map(|l| {
            let tx = trans.symbol(&scan, l)?;
            let mut buf = gains.apply(&tx, Complex::new(1.0, 0.0))?.samples;
            zf_in_place(&mut buf, &scan.frames[l].symbols)?;
            trans.dft().inverse(&mut buf);
            Ok(RangeProfile::from_bins(buf))
        })
        .collect::<Result<Vec<_>>>()?;
    range_angle_map(&profiles, &beam_angles(&scan, &cfg)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DopplerResult {
    pub symbol_index: usize,
    pub range_bin: usize,
    /// Range-profile value at `range_bin` in every scan.
    pub slow_time: Vec<Complex>,
    pub spectrum: Vec<Complex>,
    pub peak_bin: usize,
    pub centered_bin: i64,
    pub velocity_mps: f64,
    pub pri_s: f64,
}

/// Slow-time processing of the target's range bin across the scenario's
/// `I` scans. Uses `symbol_index` of every scan, or by default the symbol
/// whose beam points closest to the target.
pub fn doppler_scan(scenario: &Scenario, symbol_index: Option<usize>) -> Result<DopplerResult> {
    let cfg = scenario.fda_config()?;
    let num = scenario.numerology;
    let scans = num.num_scans();
    if scans < 2 {
        return Err(SimError::InvalidScenario(format!(
            "Doppler processing needs at least 2 scans, got {scans}"
        )));
    }
    let nsym = scan_symbol_count(&num, &cfg);
    let pri = scan_period_s(&num, &cfg);
    let trans = Transmitter::new(&num, &cfg);
    let target_angle = scenario.target_angle_deg.to_radians();
    let q = Scatterer::new(
        scenario.target_distance_m(),
        target_angle,
        scenario.reflectivity,
        scenario.target_velocity_mps,
    )?;
    let gains = LinkGains::sensing(&cfg, &num, &q, scenario.model);
    let first = ScanSignal::with_symbols(&num, &cfg, scan_seed(scenario.seed, 0), nsym)?;
    let l = match symbol_index {
        Some(l) if l < nsym => l,
        Some(l) => {
            return Err(SimError::InvalidScenario(format!(
                "symbol {l} is outside a scan of {nsym} symbols"
            )))
        }
        None => nearest_beam(&beam_angles(&first, &cfg)?, target_angle),
    };
    let bin = scenario.target_range_bin;
    let slow_time = (0..scans)
        .into_par_iter()
        .map(|i| {
            let scan = ScanSignal::with_symbols(&num, &cfg, scan_seed(scenario.seed, i), nsym)?;
            let tx = trans.symbol(&scan, l)?;
            let phasor = doppler_phasor(&cfg, pri, scenario.target_velocity_mps, i);
            let mut buf = gains.apply(&tx, phasor)?.samples;
            zf_in_place(&mut buf, &scan.frames[l].symbols)?;
            trans.dft().inverse(&mut buf);
            Ok(buf[bin])
        })
        .collect::<Result<Vec<_>>>()?;
    let spectrum = doppler_spectrum(&slow_time)?;
    let (peak_bin, centered) = doppler_peak(&spectrum);
    Ok(DopplerResult {
        symbol_index: l,
        range_bin: bin,
        slow_time,
        spectrum,
        peak_bin,
        centered_bin: centered,
        velocity_mps: doppler_bin_velocity(centered, cfg.wavelength_m(), scans, pri),
        pri_s: pri,
    })
}
