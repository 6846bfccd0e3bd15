use rayon::prelude::*;

use super::{scan_envelope, Metric, OffsetSpec, Scenario, WorstCase};
use crate::array::FdaConfig;
use crate::error::{Result, SimError};
use crate::numerology::{default_cp_len, derive_system_parameters, OfdmNumerology, SystemParameters};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    /// Inter-element offset as a fraction of `Δf_max`.
    ScanFrequency,
    /// Subcarrier count at `Δf = Δf_max(K)`.
    Subcarriers,
}

/// Worst-case metrics of one (M, K, Δf, seed) point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub num_antennas: usize,
    pub num_subcarriers: usize,
    pub df_fraction: f64,
    pub offset_hz: f64,
    /// Normalized offset `Δf / Δf_sc`.
    pub epsilon: f64,
    pub seed: u64,
    pub evm: Option<WorstCase>,
    pub isl: Option<WorstCase>,
}

impl PointResult {
    pub fn worst(&self, metric: Metric) -> Option<WorstCase> {
        match metric {
            Metric::Evm => self.evm,
            Metric::Isl => self.isl,
        }
    }

    pub fn worst_db(&self, metric: Metric) -> Option<f64> {
        self.worst(metric).map(|w| metric.to_db(w.value))
    }
}

/// Seed statistics of one (M, K, Δf) point, in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub num_antennas: usize,
    pub num_subcarriers: usize,
    pub df_fraction: f64,
    pub offset_hz: f64,
    pub epsilon: f64,
    pub mean_db: f64,
    pub min_db: f64,
    pub max_db: f64,
    pub seeds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub kind: SweepKind,
    /// Fingerprint of the base scenario.
    pub fingerprint: String,
    /// One entry per (M, axis value, seed), in sweep order.
    pub points: Vec<PointResult>,
}

impl SweepResult {
    /// Aggregates over seeds, keeping first-appearance order of the points.
    pub fn summary(&self, metric: Metric) -> Vec<SummaryRow> {
        let mut rows: Vec<(SummaryRow, f64)> = Vec::new();
        for p in &self.points {
            let Some(db) = p.worst_db(metric) else { continue };
            let key = (p.num_antennas, p.num_subcarriers, p.df_fraction.to_bits());
            match rows.iter_mut().find(|(r, _)| {
                (r.num_antennas, r.num_subcarriers, r.df_fraction.to_bits()) == key
            }) {
                Some((r, sum)) => {
                    *sum += db;
                    r.seeds += 1;
                    r.min_db = r.min_db.min(db);
                    r.max_db = r.max_db.max(db);
                }
                None => rows.push((
                    SummaryRow {
                        num_antennas: p.num_antennas,
                        num_subcarriers: p.num_subcarriers,
                        df_fraction: p.df_fraction,
                        offset_hz: p.offset_hz,
                        epsilon: p.epsilon,
                        mean_db: 0.0,
                        min_db: db,
                        max_db: db,
                        seeds: 1,
                    },
                    db,
                )),
            }
        }
        rows.into_iter()
            .map(|(mut r, sum)| {
                r.mean_db = sum / r.seeds as f64;
                r
            })
            .collect()
    }

    /// Mean worst case (dB) of the first point matching `M` and `K` at the
    /// given fraction.
    pub fn mean_db(&self, metric: Metric, m: usize, k: usize, fraction: f64) -> Option<f64> {
        self.summary(metric)
            .into_iter()
            .find(|r| r.num_antennas == m && r.num_subcarriers == k && r.df_fraction == fraction)
            .map(|r| r.mean_db)
    }
}

/// `points` log-spaced fractions from 1 down to `10^-decades`.
pub fn logspace_fractions(decades: u32, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![1.0],
        n => (0..n)
            .map(|i| 10f64.powf(-(decades as f64) * i as f64 / (n - 1) as f64))
            .collect(),
    }
}

fn evaluate(scenarios: Vec<Scenario>, kind: SweepKind, base: &Scenario) -> Result<SweepResult> {
    let jobs: Vec<(Scenario, usize)> = scenarios
        .into_iter()
        .flat_map(|s| (0..s.repetitions).map(move |r| (s.clone(), r)))
        .collect();
    let points = jobs
        .par_iter()
        .map(|(s, rep)| {
            let (evm, isl) = scan_envelope(s, *rep)?;
            Ok(PointResult {
                num_antennas: s.num_antennas,
                num_subcarriers: s.numerology.num_subcarriers(),
                df_fraction: s.df_fraction(),
                offset_hz: s.offset_hz(),
                epsilon: s.offset_hz() / s.numerology.subcarrier_spacing_hz(),
                seed: s.rep_seed(*rep),
                evm: evm.map(|e| e.worst()),
                isl: isl.map(|e| e.worst()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        kind,
        fingerprint: base.fingerprint(),
        points,
    })
}

/// Worst-case EVM/ISL versus scanning frequency for every antenna count.
pub fn sweep_scan_frequency(base: &Scenario, antennas: &[usize], fractions: &[f64]) -> Result<SweepResult> {
    if let Some(f) = fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
        return Err(SimError::InvalidConfig(format!(
            "sweep fraction {f} must lie in (0, 1]"
        )));
    }
    let mut scenarios = Vec::new();
    for &m in antennas {
        for &f in fractions {
            let s = base.with_antennas(m).with_offset(OffsetSpec::FractionOfMax(f));
            s.validate()?;
            scenarios.push(s);
        }
    }
    evaluate(scenarios, SweepKind::ScanFrequency, base)
}

/// Worst-case EVM/ISL versus subcarrier count at `Δf_max(K)`, `N_cp = K/4`.
pub fn sweep_subcarriers(base: &Scenario, antennas: &[usize], subcarriers: &[usize]) -> Result<SweepResult> {
    let mut scenarios = Vec::new();
    for &m in antennas {
        for &k in subcarriers {
            let s = base
                .with_antennas(m)
                .with_subcarriers(k)?
                .with_offset(OffsetSpec::FractionOfMax(1.0));
            s.validate()?;
            scenarios.push(s);
        }
    }
    evaluate(scenarios, SweepKind::Subcarriers, base)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSweepRow {
    pub num_antennas: usize,
    pub num_subcarriers: usize,
    pub cp_len: usize,
    pub params: SystemParameters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSweep {
    pub bandwidth_hz: f64,
    pub carrier_hz: f64,
    pub rows: Vec<SystemSweepRow>,
}

/// System budget over an (M, K) grid with `N_cp = K/4`.
pub fn sweep_system_parameters(
    bandwidth_hz: f64,
    carrier_hz: f64,
    antennas: &[usize],
    subcarriers: &[usize],
    num_scans: usize,
) -> Result<SystemSweep> {
    let mut rows = Vec::with_capacity(antennas.len() * subcarriers.len());
    for &m in antennas {
        let cfg = FdaConfig::half_wavelength(m, carrier_hz, 0.0)?;
        for &k in subcarriers {
            let num = OfdmNumerology::new(k, bandwidth_hz, default_cp_len(k), num_scans)?;
            rows.push(SystemSweepRow {
                num_antennas: m,
                num_subcarriers: k,
                cp_len: num.cp_len(),
                params: derive_system_parameters(&num, &cfg),
            });
        }
    }
    Ok(SystemSweep {
        bandwidth_hz,
        carrier_hz,
        rows,
    })
}
