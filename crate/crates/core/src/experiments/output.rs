//! Deterministic CSV (and optional SVG) emitters.
//!
//! Floats use Rust's shortest round-trip formatting, so identical results
//! always produce identical bytes.

use std::fs::File;
use std::io;
use std::path::{Path, PathBuf};

use super::svg::{self, Series};
use super::{DopplerResult, Metric, ScanOutput, SweepKind, SweepResult, SystemSweep};
use crate::array::Beampattern;
use crate::error::{Result, SimError};
use crate::metrics::{power_db, RangeAngleMap};

/// dB floor used for heatmap colour scales.
const HEATMAP_FLOOR_DB: f64 = -40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    CsvSvg,
}

impl OutputFormat {
    pub fn svg(self) -> bool {
        self == OutputFormat::CsvSvg
    }
}

struct Table {
    path: PathBuf,
    writer: csv::Writer<File>,
}

fn ensure_dir(dir: &Path) -> Result<()> {
    if dir.is_dir() {
        Ok(())
    } else {
        Err(SimError::io(
            dir,
            io::Error::new(io::ErrorKind::NotFound, "output directory does not exist"),
        ))
    }
}

fn csv_err(path: &Path, e: csv::Error) -> SimError {
    SimError::io(path, io::Error::other(e.to_string()))
}

impl Table {
    fn create(dir: &Path, name: &str, header: &[&str]) -> Result<Self> {
        ensure_dir(dir)?;
        let path = dir.join(name);
        let file = File::create(&path).map_err(|e| SimError::io(&path, e))?;
        let mut t = Table {
            writer: csv::Writer::from_writer(file),
            path,
        };
        t.row(header.iter().map(|s| s.to_string()))?;
        Ok(t)
    }

    fn row(&mut self, fields: impl IntoIterator<Item = String>) -> Result<()> {
        let fields: Vec<String> = fields.into_iter().collect();
        self.writer.write_record(&fields).map_err(|e| csv_err(&self.path, e))
    }

    fn finish(mut self) -> Result<PathBuf> {
        self.writer.flush().map_err(|e| SimError::io(&self.path, e))?;
        Ok(self.path)
    }
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    ensure_dir(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| SimError::io(&path, e))?;
    Ok(path)
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// `<stem>.csv` with one row per (point, metric) plus `<stem>_summary.csv`
/// with the seed statistics.
pub fn write_sweep(dir: &Path, stem: &str, result: &SweepResult, format: OutputFormat) -> Result<Vec<PathBuf>> {
    let metrics: Vec<Metric> = [Metric::Evm, Metric::Isl]
        .into_iter()
        .filter(|m| result.points.iter().any(|p| p.worst(*m).is_some()))
        .collect();
    let mut t = Table::create(
        dir,
        &format!("{stem}.csv"),
        &[
            "metric", "df_hz", "epsilon", "evm_db", "isl_db", "symbol_index", "angle_deg",
            "m_antennas", "k_subcarriers", "df_fraction", "seed", "config_hash",
        ],
    )?;
    for p in &result.points {
        for &m in &metrics {
            let Some(w) = p.worst(m) else { continue };
            let db = m.to_db(w.value);
            t.row([
                m.name().to_string(),
                num(p.offset_hz),
                num(p.epsilon),
                if m == Metric::Evm { num(db) } else { String::new() },
                if m == Metric::Isl { num(db) } else { String::new() },
                w.symbol_index.to_string(),
                num(w.angle.to_degrees()),
                p.num_antennas.to_string(),
                p.num_subcarriers.to_string(),
                num(p.df_fraction),
                p.seed.to_string(),
                result.fingerprint.clone(),
            ])?;
        }
    }
    let mut paths = vec![t.finish()?];

    let mut s = Table::create(
        dir,
        &format!("{stem}_summary.csv"),
        &[
            "metric", "df_hz", "epsilon", "mean_db", "min_db", "max_db", "seeds", "m_antennas",
            "k_subcarriers", "df_fraction", "config_hash",
        ],
    )?;
    for &m in &metrics {
        for r in result.summary(m) {
            s.row([
                m.name().to_string(),
                num(r.offset_hz),
                num(r.epsilon),
                num(r.mean_db),
                num(r.min_db),
                num(r.max_db),
                r.seeds.to_string(),
                r.num_antennas.to_string(),
                r.num_subcarriers.to_string(),
                num(r.df_fraction),
                result.fingerprint.clone(),
            ])?;
        }
    }
    paths.push(s.finish()?);

    if format.svg() {
        for &m in &metrics {
            let rows = result.summary(m);
            let mut antennas: Vec<usize> = rows.iter().map(|r| r.num_antennas).collect();
            antennas.dedup();
            let series: Vec<Series> = antennas
                .iter()
                .map(|&a| Series {
                    label: format!("M = {a}"),
                    points: rows
                        .iter()
                        .filter(|r| r.num_antennas == a)
                        .map(|r| match result.kind {
                            SweepKind::ScanFrequency => (r.df_fraction, r.mean_db),
                            SweepKind::Subcarriers => (r.num_subcarriers as f64, r.mean_db),
                        })
                        .collect(),
                })
                .collect();
            let xlabel = match result.kind {
                SweepKind::ScanFrequency => "scanning frequency / maximum",
                SweepKind::Subcarriers => "subcarriers K",
            };
            let svg = svg::line_plot(
                &format!("worst-case {} (dB)", m.name().to_uppercase()),
                xlabel,
                "dB",
                &series,
                true,
            );
            paths.push(write_text(dir, &format!("{stem}_{}.svg", m.name()), &svg)?);
        }
    }
    Ok(paths)
}

/// Per-symbol curves and min-over-symbol envelopes of one scan.
pub fn write_scan(
    dir: &Path,
    stem: &str,
    scan: &ScanOutput,
    config_hash: &str,
    format: OutputFormat,
) -> Result<Vec<PathBuf>> {
    let mut t = Table::create(
        dir,
        &format!("{stem}.csv"),
        &[
            "curve", "theta_tx_deg", "evm_db", "isl_db", "symbol_index", "angle_deg",
            "m_antennas", "k_subcarriers", "df_fraction", "seed", "config_hash",
        ],
    )?;
    let common = |l: usize, a: usize| {
        [
            l.to_string(),
            num(scan.angles[a].to_degrees()),
            scan.num_antennas.to_string(),
            scan.num_subcarriers.to_string(),
            num(scan.df_fraction),
            scan.seed.to_string(),
            config_hash.to_string(),
        ]
    };
    for l in 0..scan.symbol_times.len() {
        for a in 0..scan.angles.len() {
            let mut row = vec![
                "symbol".to_string(),
                num(scan.beam_angles[l].to_degrees()),
                opt(scan.evm.as_ref().map(|m| Metric::Evm.to_db(m[l][a]))),
                opt(scan.isl.as_ref().map(|m| Metric::Isl.to_db(m[l][a]))),
            ];
            row.extend(common(l, a));
            t.row(row)?;
        }
    }
    let envelopes: Vec<_> = [Metric::Evm, Metric::Isl]
        .into_iter()
        .filter_map(|m| scan.envelope(m))
        .collect();
    for env in &envelopes {
        for a in 0..scan.angles.len() {
            let l = env.symbols[a];
            let db = env.metric.to_db(env.values[a]);
            let mut row = vec![
                format!("min_{}", env.metric.name()),
                num(scan.beam_angles[l].to_degrees()),
                if env.metric == Metric::Evm { num(db) } else { String::new() },
                if env.metric == Metric::Isl { num(db) } else { String::new() },
            ];
            row.extend(common(l, a));
            t.row(row)?;
        }
    }
    let mut paths = vec![t.finish()?];
    if format.svg() {
        for env in &envelopes {
            let matrix = match env.metric {
                Metric::Evm => scan.evm.as_ref(),
                Metric::Isl => scan.isl.as_ref(),
            }
            .expect("envelope implies matrix");
            let deg: Vec<f64> = scan.angles.iter().map(|a| a.to_degrees()).collect();
            let mut series: Vec<Series> = matrix
                .iter()
                .enumerate()
                .map(|(l, row)| Series {
                    label: format!("symbol {l}"),
                    points: deg
                        .iter()
                        .zip(row)
                        .map(|(&d, &v)| (d, env.metric.to_db(v)))
                        .collect(),
                })
                .collect();
            series.push(Series {
                label: "min over symbols".into(),
                points: deg.iter().copied().zip(env.values_db()).collect(),
            });
            let svg = svg::line_plot(
                &format!("{} per symbol", env.metric.name().to_uppercase()),
                "angle (deg)",
                "dB",
                &series,
                false,
            );
            paths.push(write_text(dir, &format!("{stem}_{}.svg", env.metric.name()), &svg)?);
        }
    }
    Ok(paths)
}

/// Beam pattern samples in long format.
pub fn write_beampattern(dir: &Path, stem: &str, bp: &Beampattern, format: OutputFormat) -> Result<Vec<PathBuf>> {
    let mut t = Table::create(dir, &format!("{stem}.csv"), &["t_s", "angle_deg", "power_db"])?;
    for (i, &time) in bp.t.iter().enumerate() {
        for (j, &theta) in bp.theta.iter().enumerate() {
            t.row([num(time), num(theta.to_degrees()), num(bp.at(i, j))])?;
        }
    }
    let mut paths = vec![t.finish()?];
    if format.svg() {
        let deg: Vec<f64> = bp.theta.iter().map(|a| a.to_degrees()).collect();
        let rows: Vec<Vec<f64>> = (0..bp.t.len()).map(|i| bp.row(i).to_vec()).collect();
        let svg = svg::heatmap("beam pattern (dB)", "angle (deg)", "time (s)", &deg, &bp.t, &rows, HEATMAP_FLOOR_DB);
        paths.push(write_text(dir, &format!("{stem}.svg"), &svg)?);
    }
    Ok(paths)
}

/// Range profile power of every scan symbol against its beam angle.
pub fn write_range_angle_map(
    dir: &Path,
    stem: &str,
    map: &RangeAngleMap,
    range_resolution_m: f64,
    format: OutputFormat,
) -> Result<Vec<PathBuf>> {
    let mut t = Table::create(
        dir,
        &format!("{stem}.csv"),
        &["symbol_index", "theta_tx_deg", "range_bin", "range_m", "power_db"],
    )?;
    for (l, row) in map.power.iter().enumerate() {
        for (k, &p) in row.iter().enumerate() {
            t.row([
                l.to_string(),
                num(map.angles[l].to_degrees()),
                k.to_string(),
                num(k as f64 * range_resolution_m),
                num(power_db(p)),
            ])?;
        }
    }
    let mut paths = vec![t.finish()?];
    if format.svg() {
        let bins: Vec<f64> = (0..map.power.first().map_or(0, Vec::len))
            .map(|k| k as f64 * range_resolution_m)
            .collect();
        let deg: Vec<f64> = map.angles.iter().map(|a| a.to_degrees()).collect();
        let rows: Vec<Vec<f64>> = map
            .power
            .iter()
            .map(|r| r.iter().map(|&p| power_db(p)).collect())
            .collect();
        let svg = svg::heatmap("range-angle map (dB)", "range (m)", "beam angle (deg)", &bins, &deg, &rows, HEATMAP_FLOOR_DB);
        paths.push(write_text(dir, &format!("{stem}.svg"), &svg)?);
    }
    Ok(paths)
}

/// Slow-time Doppler spectrum of the target range bin.
pub fn write_doppler(
    dir: &Path,
    stem: &str,
    d: &DopplerResult,
    wavelength_m: f64,
    format: OutputFormat,
) -> Result<Vec<PathBuf>> {
    let n = d.spectrum.len();
    let mut t = Table::create(
        dir,
        &format!("{stem}.csv"),
        &["bin", "centered_bin", "velocity_mps", "power_db", "is_peak"],
    )?;
    let mut points = Vec::with_capacity(n);
    for (j, v) in d.spectrum.iter().enumerate() {
        let c = crate::metrics::centered_bin(j, n);
        let vel = crate::metrics::doppler_bin_velocity(c, wavelength_m, n, d.pri_s);
        let p = power_db(v.norm_sqr());
        points.push((vel, p));
        t.row([
            j.to_string(),
            c.to_string(),
            num(vel),
            num(p),
            (j == d.peak_bin).to_string(),
        ])?;
    }
    let mut paths = vec![t.finish()?];
    if format.svg() {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let svg = svg::line_plot(
            "Doppler spectrum",
            "velocity (m/s)",
            "power (dB)",
            &[Series { label: "target bin".into(), points }],
            false,
        );
        paths.push(write_text(dir, &format!("{stem}.svg"), &svg)?);
    }
    Ok(paths)
}

/// System budget table over an (M, K) grid.
pub fn write_system_sweep(dir: &Path, stem: &str, sweep: &SystemSweep, format: OutputFormat) -> Result<Vec<PathBuf>> {
    let mut t = Table::create(
        dir,
        &format!("{stem}.csv"),
        &[
            "m_antennas", "k_subcarriers", "cp_len", "bandwidth_hz", "carrier_hz",
            "symbol_duration_s", "symbols_per_scan", "pri_s", "max_scan_freq_hz",
            "angular_resolution_deg", "v_max_mps", "v_res_mps", "r_max_no_cp_m", "r_max_w_cp_m",
            "r_res_m", "symbol_rate", "normalized_symbol_rate", "array_gain_db",
        ],
    )?;
    for r in &sweep.rows {
        let p = &r.params;
        t.row([
            r.num_antennas.to_string(),
            r.num_subcarriers.to_string(),
            r.cp_len.to_string(),
            num(sweep.bandwidth_hz),
            num(sweep.carrier_hz),
            num(p.symbol_duration_s),
            p.symbols_per_scan.to_string(),
            num(p.pri_s),
            num(p.max_scan_freq_hz),
            num(p.angular_resolution_deg),
            num(p.v_max_mps),
            num(p.v_res_mps),
            num(p.r_max_no_cp_m),
            opt(p.r_max_w_cp_m),
            num(p.r_res_m),
            num(p.symbol_rate),
            num(p.normalized_symbol_rate()),
            num(p.array_gain_db),
        ])?;
    }
    let mut paths = vec![t.finish()?];
    if format.svg() {
        let mut antennas: Vec<usize> = sweep.rows.iter().map(|r| r.num_antennas).collect();
        antennas.dedup();
        let curve = |f: fn(&super::SystemSweepRow) -> f64| -> Vec<Series> {
            antennas
                .iter()
                .map(|&a| Series {
                    label: format!("M = {a}"),
                    points: sweep
                        .rows
                        .iter()
                        .filter(|r| r.num_antennas == a)
                        .map(|r| (r.num_subcarriers as f64, f(r)))
                        .collect(),
                })
                .collect()
        };
        let plots: [(&str, &str, fn(&super::SystemSweepRow) -> f64); 3] = [
            ("v_max", "max velocity (m/s)", |r| r.params.v_max_mps),
            ("r_max", "max range with CP (m)", |r| r.params.r_max_w_cp_m.unwrap_or(0.0)),
            ("rate", "symbol rate (1/s)", |r| r.params.symbol_rate),
        ];
        for (name, ylabel, f) in plots {
            let svg = svg::line_plot(ylabel, "subcarriers K", ylabel, &curve(f), true);
            paths.push(write_text(dir, &format!("{stem}_{name}.svg"), &svg)?);
        }
    }
    Ok(paths)
}
