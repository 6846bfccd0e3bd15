//! Command-line front end: TOML scenario files, subcommands and reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::array::beampattern_grid;
use crate::channels::ChannelModel;
use crate::error::{Result, SimError};
use crate::experiments::{
    angle_grid_deg, doppler_scan, logspace_fractions, range_angle_scan, run_scan,
    sweep_scan_frequency, sweep_subcarriers, sweep_system_parameters, write_beampattern,
    write_doppler, write_range_angle_map, write_scan, write_sweep, write_system_sweep, Link,
    OffsetSpec, OutputFormat, Scenario,
};
use crate::numerology::{default_cp_len, derive_system_parameters, scan_period_s, OfdmNumerology};
use crate::Complex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum LinkSpec {
    Comm,
    Sensing,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ModelSpec {
    Exact,
    Simplified,
}

/// A real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
enum ComplexSpec {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexSpec> for Complex {
    fn from(c: ComplexSpec) -> Self {
        match c {
            ComplexSpec::Real(re) => Complex::new(re, 0.0),
            ComplexSpec::Pair([re, im]) => Complex::new(re, im),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArraySection {
    num_antennas: Option<usize>,
    carrier_hz: Option<f64>,
    spacing_wavelengths: Option<f64>,
    offset_fraction: Option<f64>,
    offset_hz: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OfdmSection {
    num_subcarriers: Option<usize>,
    bandwidth_hz: Option<f64>,
    cp_len: Option<usize>,
    num_scans: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReceiverSection {
    delay_samples: Option<usize>,
    attenuation: Option<ComplexSpec>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetSection {
    range_bin: Option<usize>,
    angle_deg: Option<f64>,
    reflectivity: Option<ComplexSpec>,
    velocity_mps: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnglesSection {
    min_deg: Option<f64>,
    max_deg: Option<f64>,
    points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    antennas: Option<Vec<usize>>,
    fractions: Option<Vec<f64>>,
    decades: Option<u32>,
    fraction_points: Option<usize>,
    subcarriers: Option<Vec<usize>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BeampatternSection {
    duration_s: Option<f64>,
    time_points: Option<usize>,
    angle_points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseSection {
    snr_db: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    seed: Option<u64>,
    repetitions: Option<usize>,
    link: Option<LinkSpec>,
    model: Option<ModelSpec>,
    #[serde(default)]
    array: ArraySection,
    #[serde(default)]
    ofdm: OfdmSection,
    #[serde(default)]
    receiver: ReceiverSection,
    #[serde(default)]
    target: TargetSection,
    #[serde(default)]
    angles: AnglesSection,
    #[serde(default)]
    sweep: SweepSection,
    #[serde(default)]
    beampattern: BeampatternSection,
    #[serde(default)]
    noise: NoiseSection,
}

/// Sweep axes; defaults follow the desk-scale study.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub antennas: Vec<usize>,
    pub fractions: Vec<f64>,
    pub subcarriers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeampatternSettings {
    /// Defaults to one beam period `1/Δf`.
    pub duration_s: Option<f64>,
    pub time_points: usize,
    pub angle_points: usize,
}

/// A fully resolved configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub scenario: Scenario,
    pub sweep: SweepSettings,
    pub beampattern: BeampatternSettings,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            scenario: Scenario::desk_scale(2),
            sweep: SweepSettings {
                antennas: vec![2, 4, 8],
                fractions: logspace_fractions(3, 13),
                subcarriers: vec![64, 128, 256, 512, 1024],
            },
            beampattern: BeampatternSettings {
                duration_s: None,
                time_points: 101,
                angle_points: 361,
            },
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses a TOML configuration, applying desk-scale defaults.
pub fn parse_config_str(text: &str, path: &Path) -> Result<Config> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| SimError::Parse {
        path: path.to_path_buf(),
        line: e.span().map_or(1, |s| line_of(text, s.start)),
        message: e.message().trim().replace('\n', " "),
    })?;
    resolve(file)
}

pub fn parse_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    parse_config_str(&text, path)
}

fn resolve(f: ConfigFile) -> Result<Config> {
    let mut cfg = Config::default();
    let s = &mut cfg.scenario;
    let a = f.array;
    if let Some(m) = a.num_antennas {
        s.num_antennas = m;
    }
    if let Some(fc) = a.carrier_hz {
        s.carrier_hz = fc;
    }
    if let Some(d) = a.spacing_wavelengths {
        s.spacing_wavelengths = d;
    }
    s.offset = match (a.offset_fraction, a.offset_hz) {
        (Some(_), Some(_)) => {
            return Err(SimError::InvalidConfig(
                "give either array.offset_fraction or array.offset_hz, not both".into(),
            ))
        }
        (Some(fr), None) => OffsetSpec::FractionOfMax(fr),
        (None, Some(hz)) => OffsetSpec::Hz(hz),
        (None, None) => s.offset,
    };

    let o = f.ofdm;
    let k = o.num_subcarriers.unwrap_or(s.numerology.num_subcarriers());
    s.numerology = OfdmNumerology::new(
        k,
        o.bandwidth_hz.unwrap_or(s.numerology.bandwidth_hz()),
        o.cp_len.unwrap_or(default_cp_len(k)),
        o.num_scans.unwrap_or(s.numerology.num_scans()),
    )?;

    if let Some(d) = f.receiver.delay_samples {
        s.receiver_delay_samples = d;
    }
    if let Some(att) = f.receiver.attenuation {
        s.attenuation = att.into();
    }
    let t = f.target;
    if let Some(b) = t.range_bin {
        s.target_range_bin = b;
    }
    if let Some(deg) = t.angle_deg {
        s.target_angle_deg = deg;
    }
    if let Some(g) = t.reflectivity {
        s.reflectivity = g.into();
    }
    if let Some(v) = t.velocity_mps {
        s.target_velocity_mps = v;
    }
    let g = f.angles;
    s.angles_deg = angle_grid_deg(
        g.min_deg.unwrap_or(-90.0),
        g.max_deg.unwrap_or(90.0),
        g.points.unwrap_or(181),
    );
    if let Some(seed) = f.seed {
        s.seed = seed;
    }
    if let Some(r) = f.repetitions {
        s.repetitions = r;
    }
    if let Some(l) = f.link {
        s.link = match l {
            LinkSpec::Comm => Link::Comm,
            LinkSpec::Sensing => Link::Sensing,
            LinkSpec::Both => Link::Both,
        };
    }
    if let Some(m) = f.model {
        s.model = match m {
            ModelSpec::Exact => ChannelModel::Exact,
            ModelSpec::Simplified => ChannelModel::Simplified,
        };
    }
    s.snr_db = f.noise.snr_db;
    s.validate()?;

    let sw = f.sweep;
    if let Some(a) = sw.antennas {
        cfg.sweep.antennas = a;
    }
    if sw.fractions.is_some() && (sw.decades.is_some() || sw.fraction_points.is_some()) {
        return Err(SimError::InvalidConfig(
            "give either sweep.fractions or sweep.decades/fraction_points, not both".into(),
        ));
    }
    cfg.sweep.fractions = match sw.fractions {
        Some(fr) => fr,
        None => logspace_fractions(sw.decades.unwrap_or(3), sw.fraction_points.unwrap_or(13)),
    };
    if let Some(k) = sw.subcarriers {
        cfg.sweep.subcarriers = k;
    }
    let bp = f.beampattern;
    cfg.beampattern.duration_s = bp.duration_s;
    if let Some(n) = bp.time_points {
        cfg.beampattern.time_points = n;
    }
    if let Some(n) = bp.angle_points {
        cfg.beampattern.angle_points = n;
    }
    Ok(cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    #[value(name = "csv+svg")]
    CsvSvg,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::CsvSvg => OutputFormat::CsvSvg,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fdasim", version, about = "FDA-OFDM joint communication and sensing simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Scenario file (TOML); desk-scale defaults when omitted
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Existing output directory
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    /// Override the configured base seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    /// Output artifacts
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: FormatArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Beam pattern over time and angle
    Beampattern,
    /// Print the system budget of the configured scenario
    Sysparams,
    /// Per-symbol EVM/ISL of one scan, range-angle map and Doppler spectrum
    Scan,
    /// Worst-case EVM/ISL versus scanning frequency
    SweepDf,
    /// Worst-case EVM/ISL versus number of subcarriers
    SweepK,
    /// System budget over antenna and subcarrier counts
    SweepSys,
}

/// Human-readable system budget table.
pub fn sysparams_report(scenario: &Scenario) -> Result<String> {
    let cfg = scenario.fda_config()?;
    let num = &scenario.numerology;
    let p = derive_system_parameters(num, &cfg);
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        let _ = writeln!(out, "{k:<28} {v}");
    };
    line("antennas", scenario.num_antennas.to_string());
    line("subcarriers", num.num_subcarriers().to_string());
    line("cyclic prefix", num.cp_len().to_string());
    line("bandwidth_hz", format!("{}", num.bandwidth_hz()));
    line("carrier_hz", format!("{}", scenario.carrier_hz));
    line("symbol_duration_s", format!("{}", p.symbol_duration_s));
    line("angular_resolution_deg", format!("{}", p.angular_resolution_deg));
    line("symbols_per_scan", p.symbols_per_scan.to_string());
    line("pri_s", format!("{}", p.pri_s));
    line("max_scan_freq_hz", format!("{}", p.max_scan_freq_hz));
    line("v_max_mps", format!("{}", p.v_max_mps));
    line("v_res_mps", format!("{}", p.v_res_mps));
    line("r_max_no_cp_m", format!("{}", p.r_max_no_cp_m));
    line(
        "r_max_w_cp_m",
        p.r_max_w_cp_m.map_or("n/a".into(), |v| format!("{v}")),
    );
    line("r_res_m", format!("{}", p.r_res_m));
    line("symbol_rate", format!("{}", p.symbol_rate));
    line("normalized_symbol_rate", format!("{}", p.normalized_symbol_rate()));
    line("array_gain_db", format!("{}", p.array_gain_db));
    line("offset_hz", format!("{}", cfg.offset_hz()));
    line("offset_fraction", format!("{}", scenario.df_fraction()));
    Ok(out)
}

fn run_command(cli: &Cli, config: &Config) -> Result<Vec<PathBuf>> {
    let s = &config.scenario;
    let out = cli.out.as_path();
    let format: OutputFormat = cli.format.into();
    match cli.command {
        Command::Sysparams => {
            print!("{}", sysparams_report(s)?);
            Ok(Vec::new())
        }
        Command::Beampattern => {
            let cfg = s.fda_config()?;
            let bp = &config.beampattern;
            let duration = match bp.duration_s {
                Some(d) if d > 0.0 && d.is_finite() => d,
                Some(d) => {
                    return Err(SimError::InvalidConfig(format!(
                        "beampattern duration must be positive, got {d}"
                    )))
                }
                None => scan_period_s(&s.numerology, &cfg),
            };
            let ts: Vec<f64> = (0..bp.time_points)
                .map(|i| duration * i as f64 / bp.time_points.max(2).saturating_sub(1) as f64)
                .collect();
            let thetas: Vec<f64> = angle_grid_deg(-90.0, 90.0, bp.angle_points)
                .into_iter()
                .map(f64::to_radians)
                .collect();
            let grid = beampattern_grid(&cfg, &thetas, &ts)?;
            write_beampattern(out, "beampattern", &grid, format)
        }
        Command::Scan => {
            let scan = run_scan(s, 0)?;
            let mut paths = write_scan(out, "scan", &scan, &s.fingerprint(), format)?;
            if s.link.sensing() {
                let map = range_angle_scan(s)?;
                let r_res = crate::SPEED_OF_LIGHT / (2.0 * s.numerology.bandwidth_hz());
                paths.extend(write_range_angle_map(out, "range_angle", &map, r_res, format)?);
                if s.numerology.num_scans() >= 2 {
                    let d = doppler_scan(s, None)?;
                    let wl = s.fda_config()?.wavelength_m();
                    paths.extend(write_doppler(out, "doppler", &d, wl, format)?);
                }
            }
            Ok(paths)
        }
        Command::SweepDf => {
            let r = sweep_scan_frequency(s, &config.sweep.antennas, &config.sweep.fractions)?;
            write_sweep(out, "sweep_df", &r, format)
        }
        Command::SweepK => {
            let r = sweep_subcarriers(s, &config.sweep.antennas, &config.sweep.subcarriers)?;
            write_sweep(out, "sweep_k", &r, format)
        }
        Command::SweepSys => {
            let r = sweep_system_parameters(
                s.numerology.bandwidth_hz(),
                s.carrier_hz,
                &config.sweep.antennas,
                &config.sweep.subcarriers,
                s.numerology.num_scans(),
            )?;
            write_system_sweep(out, "sweep_sys", &r, format)
        }
    }
}

/// Executes a parsed command line and returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let mut config = match &cli.config {
        Some(p) => parse_config(p)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        config.scenario.seed = seed;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| SimError::InvalidConfig(format!("cannot start {} worker threads: {e}", cli.jobs)))?;
    pool.install(|| run_command(cli, &config))
}

/// Process entry point; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            1
        }
    }
}
