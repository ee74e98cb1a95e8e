//! `mmhom` command-line surface.
//!
//! Exit codes: 0 success, 1 output failure, 2 invalid config, 3 resource or
//! numeric guard, 4 verification failure.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{ConfigError, Route, RunConfig};
use crate::error::HomError;
use crate::experiment::{add_poisson_noise, run_scan, visibility, CoincidenceCurve, Sampling, ScanConfig, Scenario};
use crate::fields::make_grid;
use crate::hom::{coincidence_rate, coincidence_rate_oracle, pair_coherence_length, spectral_amplitudes};
use crate::io::{curve_csv, field_to_bytes, field_to_csv, write_atomic};
use crate::modes::{parity_overlap_y, pump_field, BeamSpec, PumpSpec};
use crate::spdc::{make_polarization, PolarizationKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OUTPUT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

/// Largest detector grid, per axis, the verification suite will sum directly.
pub const VERIFY_NODE_CAP: usize = 16;
pub const VERIFY_TOLERANCE: f64 = 1e-6;
const PARITY_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "mmhom", version, about = "Multimode Hong-Ou-Mandel interference simulator")]
pub struct Cli {
    /// TOML run config; defaults are used when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Scenario preset, overriding the config's `preset` key.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Noise seed, overriding `noise.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coincidence rate over the configured delay scan.
    Scan,
    /// y-parity overlap of the pump at the detection plane.
    Overlap,
    /// Write the sampled pump (or its angular spectrum) to a file.
    DumpField {
        #[arg(long, value_enum, default_value_t = DumpFormat::Csv)]
        format: DumpFormat,
        #[arg(long, value_enum, default_value_t = FieldKind::Pump)]
        field: FieldKind,
    },
    /// Cross-check the factorized rate against the direct sum and the parity law.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DumpFormat {
    Csv,
    Bin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldKind {
    Pump,
    Spectrum,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Resource(String),
    Verify(String),
    Output(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Resource(_) => EXIT_RESOURCE,
            Failure::Verify(_) => EXIT_VERIFY,
            Failure::Output(_) => EXIT_OUTPUT,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Resource(m) | Failure::Verify(m) | Failure::Output(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<HomError> for Failure {
    fn from(e: HomError) -> Self {
        match e {
            HomError::InvalidArgument(_) | HomError::AsymmetricGrid { .. } => Failure::Config(e.to_string()),
            _ => Failure::Resource(e.to_string()),
        }
    }
}

fn output_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Output(format!("cannot write {}: {e}", path.display()))
}

pub fn run(cli: Cli) -> i32 {
    let result = load_config(&cli).and_then(|cfg| match &cli.command {
        Command::Scan => cmd_scan(&cfg, &cli.out),
        Command::Overlap => cmd_overlap(&cfg),
        Command::DumpField { format, field } => cmd_dump_field(&cfg, &cli.out, *format, *field),
        Command::Verify => cmd_verify(&cfg),
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.code()
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_path(path, cli.preset.as_deref())?,
        None => RunConfig::from_preset(cli.preset.as_deref())?,
    };
    if let (Some(seed), Some(noise)) = (cli.seed, cfg.noise.as_mut()) {
        noise.seed = seed;
    }
    Ok(cfg)
}

fn unix_millis() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

/// `<stem>_<unix millis>` that collides with no existing `.csv`/`.json`/`.bin` in `dir`.
fn fresh_stem(dir: &Path, stem: &str) -> String {
    let mut stamp = unix_millis();
    loop {
        let name = format!("{stem}_{stamp}");
        let taken = ["csv", "json", "bin"].iter().any(|ext| dir.join(format!("{name}.{ext}")).exists());
        if !taken {
            return name;
        }
        stamp += 1;
    }
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| output_err(dir, e))
}

/// Pump beam moved from the detection plane back to the crystal.
fn crystal_plane_pump(scenario: &Scenario<f64>) -> Result<PumpSpec<f64>, Failure> {
    let b = scenario.pump.beam;
    let beam = BeamSpec::new(b.waist, b.rayleigh_range, b.k, b.z - scenario.plane_z)?;
    Ok(PumpSpec { beam, ..scenario.pump.clone() })
}

fn spectral_curve(cfg: &RunConfig, scenario: &Scenario<f64>) -> Result<CoincidenceCurve<f64>, Failure> {
    let pump = crystal_plane_pump(scenario)?;
    let near_half = cfg.grid.extent_waists * pump.beam.width();
    let near = make_grid(cfg.hom.spectrum_nodes, cfg.hom.spectrum_nodes, near_half, near_half)?;
    let spectrum = pump_field(&pump, near)?.angular_spectrum()?;
    let h = scenario.sampling.half_width;
    let detection = make_grid(cfg.hom.spectral_nodes, cfg.hom.spectral_nodes, h, h)?;
    let amps = spectral_amplitudes(
        &spectrum,
        &cfg.crystal_spec()?,
        &make_polarization(scenario.polarization)?,
        &scenario.bs,
        detection,
        scenario.plane_z,
        scenario.det1.wavenumber(),
    )?;
    let delays = cfg.delays_m();
    let rates = delays
        .iter()
        .map(|&d| amps.coincidence_rate(&scenario.det1, &scenario.det2, d))
        .collect::<Result<Vec<_>, _>>()?;
    let curve = CoincidenceCurve {
        delays,
        rates,
        counts: None,
        noise: None,
        coherence_length: pair_coherence_length(&scenario.det1, &scenario.det2),
        meta: scenario.clone(),
    };
    match cfg.noise_spec() {
        Some(n) => Ok(add_poisson_noise(&curve, n.mean_counts, n.seed)?),
        None => Ok(curve),
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    scenario: String,
    csv: String,
    route: Route,
    visibility: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    visibility_error: Option<String>,
    coherence_length_m: f64,
    config: &'a RunConfig,
    resolved: &'a Scenario<f64>,
}

fn cmd_scan(cfg: &RunConfig, out: &Path) -> Result<(), Failure> {
    let scenario = cfg.scenario()?;
    let curve = match cfg.hom.route {
        Route::DetectionPlane => {
            run_scan(&ScanConfig { scenario: scenario.clone(), delays: cfg.delays_m(), noise: cfg.noise_spec() })?
        }
        Route::Spectral => spectral_curve(cfg, &scenario)?,
    };
    let (vis, vis_err) = match visibility(&curve) {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };

    ensure_dir(out)?;
    let stem = fresh_stem(out, &scenario.name);
    let csv_path = out.join(format!("{stem}.csv"));
    let json_path = out.join(format!("{stem}.json"));
    let body = curve_csv(&cfg.delays_um(), &curve.rates, curve.counts.as_deref());
    let sidecar = Sidecar {
        scenario: scenario.name.clone(),
        csv: format!("{stem}.csv"),
        route: cfg.hom.route,
        visibility: vis,
        visibility_error: vis_err,
        coherence_length_m: curve.coherence_length,
        config: cfg,
        resolved: &scenario,
    };
    let json = serde_json::to_string_pretty(&sidecar).map_err(|e| output_err(&json_path, e))?;
    write_atomic(&csv_path, body.as_bytes()).map_err(|e| output_err(&csv_path, e))?;
    write_atomic(&json_path, json.as_bytes()).map_err(|e| output_err(&json_path, e))?;
    println!("{}", csv_path.display());
    match vis {
        Some(v) => println!("visibility {v:.6}"),
        None => println!("visibility unavailable"),
    }
    Ok(())
}

fn fixed6(v: f64, signed: bool) -> String {
    if v.abs() < 5e-7 {
        "0.000000".into()
    } else if signed {
        format!("{v:+.6}")
    } else {
        format!("{v:.6}")
    }
}

/// `re,im class` line printed by `overlap`.
pub fn format_overlap(p: num_complex::Complex<f64>) -> String {
    let class = if (p.re - 1.0).abs() < PARITY_THRESHOLD && p.im.abs() < PARITY_THRESHOLD {
        "even"
    } else if (p.re + 1.0).abs() < PARITY_THRESHOLD && p.im.abs() < PARITY_THRESHOLD {
        "odd"
    } else {
        "mixed"
    };
    format!("{},{} {class}", fixed6(p.re, true), fixed6(p.im, false))
}

fn detection_pump(scenario: &Scenario<f64>) -> Result<crate::fields::ComplexField2D<f64>, Failure> {
    let h = scenario.sampling.half_width;
    let n = scenario.sampling.pump_nodes();
    Ok(pump_field(&scenario.pump, make_grid(n, n, h, h)?)?)
}

fn cmd_overlap(cfg: &RunConfig) -> Result<(), Failure> {
    let scenario = cfg.scenario()?;
    let p = parity_overlap_y(&detection_pump(&scenario)?)?;
    println!("{}", format_overlap(p));
    Ok(())
}

fn cmd_dump_field(cfg: &RunConfig, out: &Path, format: DumpFormat, kind: FieldKind) -> Result<(), Failure> {
    let scenario = cfg.scenario()?;
    let (field, label) = match kind {
        FieldKind::Pump => (detection_pump(&scenario)?, "pump amplitude at the detection plane, coordinates in m"),
        FieldKind::Spectrum => (
            detection_pump(&scenario)?.angular_spectrum()?,
            "angular spectrum of the detection-plane pump, coordinates in rad/m",
        ),
    };
    ensure_dir(out)?;
    let tag = match kind {
        FieldKind::Pump => "pump",
        FieldKind::Spectrum => "spectrum",
    };
    let stem = fresh_stem(out, &format!("{}_{tag}", scenario.name));
    let (path, bytes) = match format {
        DumpFormat::Csv => (out.join(format!("{stem}.csv")), field_to_csv(&field, label).into_bytes()),
        DumpFormat::Bin => (out.join(format!("{stem}.bin")), field_to_bytes(&field)),
    };
    write_atomic(&path, &bytes).map_err(|e| output_err(&path, e))?;
    println!("{}", path.display());
    Ok(())
}

struct Check {
    label: String,
    deviation: f64,
}

fn verification_scenario(base: &Scenario<f64>, pump: PumpSpec<f64>, pol: PolarizationKind<f64>, nodes: usize) -> Scenario<f64> {
    Scenario {
        pump,
        polarization: pol,
        sampling: Sampling { detection_nodes: nodes, ..base.sampling },
        ..base.clone()
    }
}

fn cmd_verify(cfg: &RunConfig) -> Result<(), Failure> {
    let nodes = cfg.verify.detection_nodes;
    if nodes > VERIFY_NODE_CAP {
        return Err(Failure::Resource(format!(
            "verify.detection_nodes = {nodes} exceeds the direct-sum cap of {VERIFY_NODE_CAP} per axis"
        )));
    }
    let base = cfg.scenario()?;
    let beam = base.pump.beam;
    let lc = base.det1.coherence_length();
    let far = 1e3 * lc;
    let mut checks = Vec::new();

    let pumps = [("HG10", PumpSpec::single(beam, 1, 0)?, 1.0), ("HG01", PumpSpec::single(beam, 0, 1)?, -1.0)];
    let pols = [("symmetric", PolarizationKind::SymmetricHh, 1.0), ("antisymmetric", PolarizationKind::AntisymmetricSinglet, -1.0)];
    for (pump_name, pump, parity) in &pumps {
        for (pol_name, pol, exchange) in &pols {
            let setup = verification_scenario(&base, pump.clone(), *pol, nodes).setup()?;
            for (delay_name, delay) in [("0", 0.0), ("inf", far)] {
                let fast = coincidence_rate(&setup, delay)?;
                let slow = coincidence_rate_oracle(&setup, delay)?;
                checks.push(Check {
                    label: format!("oracle {pump_name} {pol_name} delay={delay_name}"),
                    deviation: (fast - slow).abs(),
                });
            }
            let (t2, r2) = (base.bs.t * base.bs.t, base.bs.r * base.bs.r);
            let expected = 1.0 - exchange * parity * 2.0 * t2 * r2 / (t2 * t2 + r2 * r2);
            let c0 = coincidence_rate(&setup, 0.0)?;
            checks.push(Check { label: format!("parity law {pump_name} {pol_name}"), deviation: (c0 - expected).abs() });
        }
    }
    let own = verification_scenario(&base, base.pump.clone(), base.polarization, nodes).setup()?;
    for delay in [0.0, 0.5 * lc] {
        let fast = coincidence_rate(&own, delay)?;
        let slow = coincidence_rate_oracle(&own, delay)?;
        checks.push(Check { label: format!("oracle configured scenario delay={delay:.3e}"), deviation: (fast - slow).abs() });
    }

    let mut worst = 0.0f64;
    for c in &checks {
        println!("{:<48} {:.3e}", c.label, c.deviation);
        worst = worst.max(c.deviation);
    }
    println!("max deviation {worst:.3e}");
    if worst < VERIFY_TOLERANCE {
        println!("PASS");
        Ok(())
    } else {
        println!("FAIL");
        Err(Failure::Verify(format!("max deviation {worst:.3e} exceeds {VERIFY_TOLERANCE:e}")))
    }
}
