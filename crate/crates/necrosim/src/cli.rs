//! Command-line frontend: run configuration, reports, batch sweeps, and
//! plot-ready data emission.
//!
//! Subcommands:
//!
//! * `stationary` — solve the compatibility system, report `(A, G)`, the
//!   critical threshold, residuals and the uniqueness certificate as JSON;
//! * `spectrum` — tabulate the linearization's principal symbol entries and
//!   eigenvalues per angular mode as CSV;
//! * `evolve` — integrate the two-interface evolution, write per-snapshot
//!   mode coefficients and physical-space interface samples as CSV plus a
//!   JSON manifest;
//! * `verify` — run the numerical invariant suite (Bessel identities,
//!   stationary residuals, solver oracle, Jacobian-vs-symbol, symmetry and
//!   radial closure) and report per-check tolerances and measurements;
//! * `sweep` — batch-solve the stationary system across a `psi0` range
//!   (in parallel) and emit one CSV row per value.
//!
//! Configuration comes from an optional TOML file (`--config`) merged with
//! command-line flags; flags win. All numeric output is deterministic for
//! a fixed build: identical configuration yields byte-identical CSV.
//!
//! Exit codes: 0 success, 1 configuration error, 2 critical-threshold
//! non-solvability, 3 verification failure, 4 runtime numerical failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annulus_solver::{
    mode_solution, BoundaryData, EquationKind, SolverOptions, TransformedDomain,
};
use crate::error::{Error, Result};
use crate::evolution::{
    evolve, interface_velocity, EvolveOptions, InterfacePair, Termination,
    Trajectory,
};
use crate::linearization::{
    fd_jacobian_mode, principal_symbol, radial_velocity, spectrum_scan, symbol_eigenvalues,
};
use crate::specfun::{bessel_i, bessel_k, fault_enabled};
use crate::spectral::FourierSeries;
use crate::stationary::{
    psi0_critical, solve_stationary, uniqueness_certificate, zero_supply_certificate, Geometry,
    ModelParams,
};

/// Success.
pub const EXIT_OK: i32 = 0;
/// Invalid configuration (bad flags, bad file, inconsistent values).
pub const EXIT_CONFIG: i32 = 1;
/// The stationary system is non-solvable (psi0 in the critical band).
pub const EXIT_CRITICAL: i32 = 2;
/// One or more verification checks failed.
pub const EXIT_VERIFY: i32 = 3;
/// A runtime numerical failure (solver breakdown, overflow, collision at
/// configuration time).
pub const EXIT_NUMERICAL: i32 = 4;

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

/// Annulus geometry block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// Outer radius `R1`.
    pub r1: f64,
    /// Inner radius `R2` (`0 < R2 < R1`).
    pub r2: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self { r1: 2.0, r2: 1.0 }
    }
}

/// Model parameter block: either an explicit `(a, g)` pair or
/// `derive_stationary = true` to use the unique stationary pair for the
/// given geometry and `psi0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BioConfig {
    /// Nutrient consumption threshold.
    pub psi0: f64,
    /// Proliferation coefficient `A` (requires `g`; incompatible with
    /// `derive_stationary`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Nutrient boundary level `G` (requires `a`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    /// Derive `(A, G)` from the stationary compatibility system.
    pub derive_stationary: bool,
}

impl Default for BioConfig {
    fn default() -> Self {
        Self {
            psi0: 1.0,
            a: None,
            g: None,
            derive_stationary: true,
        }
    }
}

/// Spatial discretization block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiscretizationConfig {
    /// Angular mode cutoff `M`.
    pub modes: usize,
    /// Reported radial grid points.
    pub nr: usize,
    /// Internal radial oversampling factor.
    pub oversample: usize,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        let opts = SolverOptions::default();
        Self {
            modes: opts.modes,
            nr: opts.nr,
            oversample: opts.oversample,
        }
    }
}

/// Time-integration block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    /// Final time.
    pub t_end: f64,
    /// Initial (and maximal) step size.
    pub dt: f64,
    /// Record every n-th accepted step.
    pub output_every: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            t_end: 0.1,
            dt: 1e-3,
            output_every: 10,
        }
    }
}

/// Which interface a seed perturbation applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedInterface {
    /// Outer interface (`R1`).
    Outer,
    /// Inner interface (`R2`).
    Inner,
}

/// One seeded angular mode: adds `amplitude * cos(mode * theta + phase)`
/// to the chosen interface's initial perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedMode {
    /// Target interface.
    pub interface: SeedInterface,
    /// Angular mode number.
    pub mode: u32,
    /// Perturbation amplitude.
    pub amplitude: f64,
    /// Phase offset in radians.
    #[serde(default)]
    pub phase: f64,
}

/// Output location block.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Directory for emitted files; reports always go to stdout as well.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

/// Complete run configuration. Derived quantities (the admissibility
/// bound, the critical threshold) are recomputed from these fields, never
/// stored.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Annulus geometry.
    pub geometry: GeometryConfig,
    /// Model parameters.
    pub bio: BioConfig,
    /// Spatial discretization.
    pub discretization: DiscretizationConfig,
    /// Time integration.
    pub time: TimeConfig,
    /// Initial perturbation seeds (empty = round interfaces).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub seed: Vec<SeedMode>,
    /// Output locations.
    pub output: OutputConfig,
}

impl RunConfig {
    /// Parse a TOML configuration file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Serialize to TOML (round-trips through [`RunConfig::from_file`]).
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes")
    }

    /// Validate all fields and return the geometry.
    pub fn validate(&self) -> Result<Geometry> {
        let geom = Geometry::new(self.geometry.r1, self.geometry.r2)?;
        if !(self.bio.psi0.is_finite() && self.bio.psi0 > 0.0) {
            return Err(Error::Config(format!(
                "psi0 must be positive and finite, got {}",
                self.bio.psi0
            )));
        }
        if self.bio.derive_stationary {
            if self.bio.a.is_some() || self.bio.g.is_some() {
                return Err(Error::Config(
                    "explicit (a, g) conflicts with derive_stationary = true".into(),
                ));
            }
        } else {
            match (self.bio.a, self.bio.g) {
                (Some(a), Some(g)) if a.is_finite() && g.is_finite() => {}
                _ => {
                    return Err(Error::Config(
                        "explicit parameters require both --a and --g (finite)".into(),
                    ))
                }
            }
        }
        let d = &self.discretization;
        if d.modes == 0 || d.modes > 4096 {
            return Err(Error::Config(format!(
                "modes must lie in 1..=4096, got {}",
                d.modes
            )));
        }
        if d.nr < 8 || d.oversample == 0 {
            return Err(Error::Config(format!(
                "radial resolution too small: nr = {}, oversample = {}",
                d.nr, d.oversample
            )));
        }
        if !(self.time.t_end.is_finite() && self.time.t_end > 0.0) {
            return Err(Error::Config(format!(
                "t_end must be positive and finite, got {}",
                self.time.t_end
            )));
        }
        if !(self.time.dt.is_finite() && self.time.dt > 0.0) {
            return Err(Error::Config(format!(
                "dt must be positive and finite, got {}",
                self.time.dt
            )));
        }
        if self.time.output_every == 0 {
            return Err(Error::Config("output_every must be at least 1".into()));
        }
        for s in &self.seed {
            if s.mode as usize > d.modes {
                return Err(Error::Config(format!(
                    "seed mode {} exceeds the angular cutoff {}",
                    s.mode, d.modes
                )));
            }
            if !s.amplitude.is_finite() || !s.phase.is_finite() {
                return Err(Error::Config(
                    "seed amplitude and phase must be finite".into(),
                ));
            }
        }
        Ok(geom)
    }

    fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            modes: self.discretization.modes,
            nr: self.discretization.nr,
            oversample: self.discretization.oversample,
            ..SolverOptions::default()
        }
    }

    /// Effective model parameters and whether they were derived from the
    /// stationary system.
    fn effective_params(&self, geom: Geometry) -> Result<(ModelParams, bool)> {
        if self.bio.derive_stationary {
            let state = solve_stationary(geom, self.bio.psi0)?;
            Ok((state.params(), true))
        } else {
            Ok((
                ModelParams {
                    a: self.bio.a.expect("validated"),
                    g: self.bio.g.expect("validated"),
                    psi0: self.bio.psi0,
                },
                false,
            ))
        }
    }

    /// Initial interface pair from the seed list.
    fn seed_pair(&self) -> Result<InterfacePair> {
        let m = self.discretization.modes;
        let mut rho1 = FourierSeries::zero(m);
        let mut rho2 = FourierSeries::zero(m);
        for s in &self.seed {
            let target = match s.interface {
                SeedInterface::Outer => &mut rho1,
                SeedInterface::Inner => &mut rho2,
            };
            if s.mode == 0 {
                let c = target.coeff(0) + Complex64::new(s.amplitude * s.phase.cos(), 0.0);
                target.set_coeff(0, c);
            } else {
                let half = Complex64::from_polar(0.5 * s.amplitude, s.phase);
                let mode = s.mode as i32;
                target.set_coeff(mode, target.coeff(mode) + half);
                target.set_coeff(-mode, target.coeff(-mode) + half.conj());
            }
        }
        InterfacePair::new(rho1, rho2)
    }
}

// ---------------------------------------------------------------------------
// Command-line surface
// ---------------------------------------------------------------------------

#[derive(Debug, Parser)]
#[command(
    name = "necrosim",
    version,
    about = "Moving-boundary simulator for a two-interface necrotic annulus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the stationary compatibility system and report (A, G).
    Stationary(CommonArgs),
    /// Tabulate the linearization's principal symbol per mode as CSV.
    Spectrum(CommonArgs),
    /// Integrate the interface evolution and write trajectory data.
    Evolve(CommonArgs),
    /// Run the numerical invariant suite and report pass/fail.
    Verify(CommonArgs),
    /// Solve the stationary system across a psi0 range (in parallel).
    Sweep(SweepArgs),
}

/// Flags shared by every subcommand; each overrides the matching
/// configuration-file field.
#[derive(Debug, Default, Args)]
struct CommonArgs {
    /// TOML configuration file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Outer radius R1.
    #[arg(long)]
    r1: Option<f64>,
    /// Inner radius R2.
    #[arg(long)]
    r2: Option<f64>,
    /// Consumption threshold psi0.
    #[arg(long)]
    psi0: Option<f64>,
    /// Proliferation coefficient A (with --g; disables derive_stationary).
    #[arg(long)]
    a: Option<f64>,
    /// Nutrient boundary level G (with --a; disables derive_stationary).
    #[arg(long)]
    g: Option<f64>,
    /// Angular mode cutoff M.
    #[arg(long)]
    modes: Option<usize>,
    /// Reported radial grid points.
    #[arg(long)]
    nr: Option<usize>,
    /// Final integration time.
    #[arg(long)]
    t_end: Option<f64>,
    /// Initial step size.
    #[arg(long)]
    dt: Option<f64>,
    /// Output directory for emitted files.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Lowest psi0 of the sweep (default: 0.2 * psi0_critical).
    #[arg(long)]
    psi0_min: Option<f64>,
    /// Highest psi0 of the sweep (default: 1.8 * psi0_critical).
    #[arg(long)]
    psi0_max: Option<f64>,
    /// Number of evenly spaced samples (the critical value is appended).
    #[arg(long, default_value_t = 25)]
    samples: usize,
}

impl CommonArgs {
    fn effective_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.r1 {
            cfg.geometry.r1 = v;
        }
        if let Some(v) = self.r2 {
            cfg.geometry.r2 = v;
        }
        if let Some(v) = self.psi0 {
            cfg.bio.psi0 = v;
        }
        if self.a.is_some() || self.g.is_some() {
            cfg.bio.derive_stationary = false;
            if let Some(v) = self.a {
                cfg.bio.a = Some(v);
            }
            if let Some(v) = self.g {
                cfg.bio.g = Some(v);
            }
        }
        if let Some(v) = self.modes {
            cfg.discretization.modes = v;
        }
        if let Some(v) = self.nr {
            cfg.discretization.nr = v;
        }
        if let Some(v) = self.t_end {
            cfg.time.t_end = v;
        }
        if let Some(v) = self.dt {
            cfg.time.dt = v;
        }
        if let Some(v) = &self.out {
            cfg.output.dir = Some(v.clone());
        }
        Ok(cfg)
    }
}

/// Entry point: parse arguments, dispatch, and map failures to exit codes.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Stationary(args) => cmd_stationary(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Evolve(args) => cmd_evolve(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

/// Exit-code class of an error.
fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Contract(_) | Error::Io(_) | Error::DegenerateAnnulus { .. } => {
            EXIT_CONFIG
        }
        Error::CriticalPsi0 { .. } => EXIT_CRITICAL,
        _ => EXIT_NUMERICAL,
    }
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<String> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, content)
        .map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path.display().to_string())
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

// ---------------------------------------------------------------------------
// stationary
// ---------------------------------------------------------------------------

/// Uniqueness certificate section of the stationary report.
#[derive(Debug, Serialize)]
struct CertificateReport {
    inner_gap: f64,
    max_slope: f64,
    ratio_gap: f64,
    holds: bool,
}

/// Zero-supply nonexistence section of the stationary report.
#[derive(Debug, Serialize)]
struct ZeroSupplyReport {
    boundary_value: f64,
    min_slope_margin: f64,
    samples: usize,
    holds: bool,
}

/// JSON report of the `stationary` subcommand.
#[derive(Debug, Serialize)]
struct StationaryReport {
    r1: f64,
    r2: f64,
    psi0: f64,
    psi0_critical: f64,
    admissible_bound: f64,
    solvable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ag: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residuals: Option<[f64; 2]>,
    certificate: CertificateReport,
    /// Why no stationary annulus exists when the supply level G vanishes.
    zero_supply: ZeroSupplyReport,
}

fn build_stationary_report(geom: Geometry, psi0: f64) -> Result<(StationaryReport, i32)> {
    let psi0c = psi0_critical(geom)?;
    let cert = uniqueness_certificate(geom, 500)?;
    let certificate = CertificateReport {
        inner_gap: cert.inner_gap,
        max_slope: cert.max_slope,
        ratio_gap: cert.ratio_gap,
        holds: cert.holds(),
    };
    let zs = zero_supply_certificate(geom.r1(), 500)?;
    let zero_supply = ZeroSupplyReport {
        boundary_value: zs.boundary_value,
        min_slope_margin: zs.min_slope_margin,
        samples: zs.samples,
        holds: zs.holds(),
    };
    let base = StationaryReport {
        r1: geom.r1(),
        r2: geom.r2(),
        psi0,
        psi0_critical: psi0c,
        admissible_bound: geom.admissible_bound(),
        solvable: false,
        a: None,
        g: None,
        ag: None,
        residuals: None,
        certificate,
        zero_supply,
    };
    match solve_stationary(geom, psi0) {
        Ok(state) => Ok((
            StationaryReport {
                solvable: true,
                a: Some(state.a),
                g: Some(state.g),
                ag: Some(state.ag()),
                residuals: Some(state.defects),
                ..base
            },
            EXIT_OK,
        )),
        Err(Error::CriticalPsi0 { .. }) => Ok((base, EXIT_CRITICAL)),
        Err(e) => Err(e),
    }
}

fn cmd_stationary(args: &CommonArgs) -> Result<i32> {
    let cfg = args.effective_config()?;
    let geom = cfg.validate()?;
    let (report, code) = build_stationary_report(geom, cfg.bio.psi0)?;
    let json = to_json(&report);
    println!("{json}");
    if let Some(dir) = &cfg.output.dir {
        write_file(dir, "stationary.json", &json)?;
    }
    Ok(code)
}

// ---------------------------------------------------------------------------
// spectrum
// ---------------------------------------------------------------------------

fn spectrum_csv(geom: Geometry, max_mode: u32) -> String {
    let mut csv = String::from("m,a11,a12,a21,a22,lambda_dominant,lambda_fast\n");
    for point in spectrum_scan(geom, max_mode) {
        let a = point.matrix;
        let (dominant, fast) = point.eigenvalues;
        csv.push_str(&format!(
            "{},{:e},{:e},{:e},{:e},{:e},{:e}\n",
            point.m, a[0][0], a[0][1], a[1][0], a[1][1], dominant, fast
        ));
    }
    csv
}

fn cmd_spectrum(args: &CommonArgs) -> Result<i32> {
    let cfg = args.effective_config()?;
    let geom = cfg.validate()?;
    let csv = spectrum_csv(geom, cfg.discretization.modes as u32);
    match &cfg.output.dir {
        Some(dir) => {
            let path = write_file(dir, "spectrum.csv", &csv)?;
            println!("{}", to_json(&serde_json::json!({ "rows": cfg.discretization.modes + 1, "file": path })));
        }
        None => print!("{csv}"),
    }
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// evolve
// ---------------------------------------------------------------------------

/// Termination section of the evolve manifest.
#[derive(Debug, Serialize)]
struct TerminationReport {
    reason: &'static str,
    time: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    sup_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound: Option<f64>,
}

/// Per-seed decay report in the evolve manifest.
#[derive(Debug, Serialize)]
struct SeedReport {
    interface: SeedInterface,
    mode: u32,
    amplitude: f64,
    phase: f64,
    /// Decay rate measured from the first and last recorded snapshot.
    #[serde(skip_serializing_if = "Option::is_none")]
    measured_decay_rate: Option<f64>,
    /// Symbol eigenvalue of the branch associated with the seeded
    /// interface (outer = dominant, inner = fast).
    #[serde(skip_serializing_if = "Option::is_none")]
    symbol_rate: Option<f64>,
}

/// JSON manifest of the `evolve` subcommand.
#[derive(Debug, Serialize)]
struct EvolveManifest {
    r1: f64,
    r2: f64,
    a: f64,
    g: f64,
    psi0: f64,
    derived_stationary: bool,
    modes: usize,
    nr: usize,
    oversample: usize,
    t_end_requested: f64,
    dt_initial: f64,
    termination: TerminationReport,
    final_time: f64,
    steps: usize,
    snapshots: usize,
    /// Largest interface sup-norm over all recorded states.
    max_interface_drift: f64,
    seeds: Vec<SeedReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trajectory_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    interfaces_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    manifest_file: Option<String>,
}

fn termination_report(t: &Termination) -> TerminationReport {
    match *t {
        Termination::Completed => TerminationReport {
            reason: "Completed",
            time: f64::NAN, // replaced by final_time below
            sup_norm: None,
            bound: None,
        },
        Termination::Collision {
            time,
            sup_norm,
            bound,
        } => TerminationReport {
            reason: "InterfaceCollision",
            time,
            sup_norm: Some(sup_norm),
            bound: Some(bound),
        },
        Termination::Blowup { time } => TerminationReport {
            reason: "Blowup",
            time,
            sup_norm: None,
            bound: None,
        },
    }
}

/// Mode-coefficient time series: one row per (snapshot, interface, mode).
fn trajectory_csv(trajectory: &Trajectory) -> String {
    let mut csv = String::from("t,interface,m,re,im\n");
    for snap in &trajectory.snapshots {
        for (tag, series) in [(1, snap.pair.rho1()), (2, snap.pair.rho2())] {
            let mm = series.max_mode() as i32;
            for m in -mm..=mm {
                let c = series.coeff(m);
                csv.push_str(&format!("{:e},{tag},{m},{:e},{:e}\n", snap.time, c.re, c.im));
            }
        }
    }
    csv
}

/// Physical interface positions: one row per (snapshot, interface, angle).
fn interfaces_csv(geom: Geometry, trajectory: &Trajectory) -> Result<String> {
    let mut csv = String::from("t,interface,theta,radius\n");
    let Some(first) = trajectory.snapshots.first() else {
        return Ok(csv);
    };
    let n = (2 * first.pair.max_mode() + 1).max(256);
    let two_pi = 2.0 * std::f64::consts::PI;
    for snap in &trajectory.snapshots {
        for (tag, radius, series) in [
            (1, geom.r1(), snap.pair.rho1()),
            (2, geom.r2(), snap.pair.rho2()),
        ] {
            let samples = series.sample(n)?;
            for (k, value) in samples.iter().enumerate() {
                let theta = two_pi * k as f64 / n as f64;
                csv.push_str(&format!(
                    "{:e},{tag},{theta:e},{:e}\n",
                    snap.time,
                    radius * (1.0 + value)
                ));
            }
        }
    }
    Ok(csv)
}

fn seed_reports(geom: Geometry, seeds: &[SeedMode], trajectory: &Trajectory) -> Vec<SeedReport> {
    seeds
        .iter()
        .map(|s| {
            let series = |pair: &InterfacePair| match s.interface {
                SeedInterface::Outer => pair.rho1().coeff(s.mode as i32).norm(),
                SeedInterface::Inner => pair.rho2().coeff(s.mode as i32).norm(),
            };
            let measured = match (trajectory.snapshots.first(), trajectory.snapshots.last()) {
                (Some(first), Some(last)) if s.mode >= 1 => {
                    let dt = last.time - first.time;
                    let a0 = series(&first.pair);
                    let a1 = series(&last.pair);
                    if dt > 0.0 && a0 > 1e-300 && a1 > 1e-300 {
                        let rate = (a1 / a0).ln() / dt;
                        rate.is_finite().then_some(rate)
                    } else {
                        None
                    }
                }
                _ => None,
            };
            let symbol_rate = (s.mode >= 1).then(|| {
                let (dominant, fast) = symbol_eigenvalues(geom, s.mode as i32);
                match s.interface {
                    SeedInterface::Outer => dominant,
                    SeedInterface::Inner => fast,
                }
            });
            SeedReport {
                interface: s.interface,
                mode: s.mode,
                amplitude: s.amplitude,
                phase: s.phase,
                measured_decay_rate: measured,
                symbol_rate,
            }
        })
        .collect()
}

fn cmd_evolve(args: &CommonArgs) -> Result<i32> {
    let cfg = args.effective_config()?;
    let geom = cfg.validate()?;
    let (params, derived) = cfg.effective_params(geom)?;
    let initial = cfg.seed_pair()?;
    let opts = EvolveOptions {
        t_end: cfg.time.t_end,
        dt: cfg.time.dt,
        snapshot_stride: cfg.time.output_every,
        solver: cfg.solver_options(),
        ..EvolveOptions::default()
    };
    let trajectory = evolve(geom, &params, &initial, &opts)?;

    let mut termination = termination_report(&trajectory.termination);
    if let Termination::Completed = trajectory.termination {
        termination.time = trajectory.final_time;
    }
    let max_drift = trajectory
        .snapshots
        .iter()
        .map(|s| s.pair.sup_norm())
        .fold(0.0_f64, f64::max);
    let mut manifest = EvolveManifest {
        r1: geom.r1(),
        r2: geom.r2(),
        a: params.a,
        g: params.g,
        psi0: params.psi0,
        derived_stationary: derived,
        modes: cfg.discretization.modes,
        nr: cfg.discretization.nr,
        oversample: cfg.discretization.oversample,
        t_end_requested: cfg.time.t_end,
        dt_initial: cfg.time.dt,
        termination,
        final_time: trajectory.final_time,
        steps: trajectory.steps,
        snapshots: trajectory.snapshots.len(),
        max_interface_drift: max_drift,
        seeds: seed_reports(geom, &cfg.seed, &trajectory),
        trajectory_file: None,
        interfaces_file: None,
        manifest_file: None,
    };

    if let Some(dir) = &cfg.output.dir {
        manifest.trajectory_file = Some(write_file(dir, "trajectory.csv", &trajectory_csv(&trajectory))?);
        manifest.interfaces_file =
            Some(write_file(dir, "interfaces.csv", &interfaces_csv(geom, &trajectory)?)?);
        manifest.manifest_file = Some(dir.join("manifest.json").display().to_string());
        write_file(dir, "manifest.json", &to_json(&manifest))?;
    }
    println!("{}", to_json(&manifest));
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

/// One entry of the verification report.
#[derive(Debug, Serialize)]
struct CheckReport {
    name: &'static str,
    /// What is being compared, and how `measured` relates to `tolerance`.
    detail: &'static str,
    tolerance: f64,
    measured: f64,
    passed: bool,
}

impl CheckReport {
    fn below(name: &'static str, detail: &'static str, measured: f64, tolerance: f64) -> Self {
        Self {
            name,
            detail,
            tolerance,
            measured,
            passed: measured.is_finite() && measured <= tolerance,
        }
    }

    fn above(name: &'static str, detail: &'static str, measured: f64, tolerance: f64) -> Self {
        Self {
            name,
            detail,
            tolerance,
            measured,
            passed: measured.is_finite() && measured > tolerance,
        }
    }
}

/// JSON report of the `verify` subcommand.
#[derive(Debug, Serialize)]
pub(crate) struct VerifyReport {
    fault_injection_active: bool,
    passed: bool,
    checks: Vec<CheckReport>,
}

fn check_bessel_wronskian() -> Result<CheckReport> {
    let n = 200;
    let (lo, hi) = (1e-2_f64, 50.0_f64);
    let mut worst = 0.0_f64;
    for k in 0..n {
        let x = lo * (hi / lo).powf(k as f64 / (n - 1) as f64);
        let w = x * (bessel_i(0, x)? * bessel_k(1, x)? + bessel_i(1, x)? * bessel_k(0, x)?) - 1.0;
        worst = worst.max(w.abs());
    }
    Ok(CheckReport::below(
        "bessel_wronskian",
        "max |x (I0 K1 + I1 K0) - 1| over 200 log-spaced x in [0.01, 50]",
        worst,
        1e-12,
    ))
}

fn check_bessel_derivatives() -> Result<CheckReport> {
    let h = 1e-6;
    let mut worst = 0.0_f64;
    for &x in &[0.5, 1.0, 2.0, 5.0, 10.0] {
        let di = (bessel_i(0, x + h)? - bessel_i(0, x - h)?) / (2.0 * h);
        let dk = (bessel_k(0, x + h)? - bessel_k(0, x - h)?) / (2.0 * h);
        worst = worst.max((di - bessel_i(1, x)?).abs() / bessel_i(1, x)?.abs());
        worst = worst.max((dk + bessel_k(1, x)?).abs() / bessel_k(1, x)?.abs());
    }
    Ok(CheckReport::below(
        "bessel_derivative_identities",
        "max relative defect of I0' = I1 and K0' = -K1 vs central differences",
        worst,
        1e-6,
    ))
}

fn verify_geometries() -> Vec<Geometry> {
    [(2.0, 1.0), (5.0, 1.5), (1.0, 0.5)]
        .into_iter()
        .map(|(r1, r2)| Geometry::new(r1, r2).expect("valid"))
        .collect()
}

fn check_stationary_residuals() -> Result<CheckReport> {
    let mut worst = 0.0_f64;
    for geom in verify_geometries() {
        for psi0 in [0.5, 1.0, 2.0] {
            let state = solve_stationary(geom, psi0)?;
            worst = worst.max(state.defects[0].abs()).max(state.defects[1].abs());
        }
    }
    Ok(CheckReport::below(
        "stationary_residuals",
        "max scaled stationarity defect of solve_stationary over a small lattice",
        worst,
        1e-10,
    ))
}

fn check_critical_threshold() -> Result<CheckReport> {
    let mut min = f64::INFINITY;
    for geom in verify_geometries() {
        min = min.min(psi0_critical(geom)?);
    }
    Ok(CheckReport::above(
        "critical_threshold_positive",
        "min psi0_critical over the verification geometries (must exceed tolerance 0)",
        min,
        0.0,
    ))
}

fn check_solver_oracle() -> Result<CheckReport> {
    let geom = Geometry::new(2.0, 1.0).unwrap();
    let options = SolverOptions {
        modes: 8,
        nr: 65,
        oversample: 4,
        ..SolverOptions::default()
    };
    let flat = FourierSeries::zero(8);
    let domain = TransformedDomain::new(geom, &flat, &flat, options)?;
    let mut worst = 0.0_f64;
    for kind in [EquationKind::Laplace, EquationKind::ModifiedHelmholtz] {
        for m in 0..=3_u32 {
            let data = BoundaryData {
                outer: FourierSeries::cosine(8, m as usize, 1.0)?,
                inner: FourierSeries::zero(8),
            };
            let field = domain.solve(kind, &data)?;
            let radii = field.reported_radii();
            let profile = field.mode_profile(m as i32)?;
            let coeff = if m == 0 { 1.0 } else { 0.5 };
            for (r, value) in radii.iter().zip(&profile) {
                let (u1, _) = mode_solution(geom, kind, m, *r)?;
                worst = worst.max((value.re - coeff * u1).abs());
                worst = worst.max(value.im.abs());
            }
        }
    }
    Ok(CheckReport::below(
        "solver_round_annulus_oracle",
        "max pointwise error of the transformed-domain solver vs closed per-mode solutions",
        worst,
        5e-6,
    ))
}

fn verify_params() -> ModelParams {
    ModelParams {
        a: 1.0,
        g: 1.0,
        psi0: 1.0,
    }
}

fn check_jacobian_vs_symbol() -> Result<CheckReport> {
    let geom = Geometry::new(2.0, 1.0).unwrap();
    let options = SolverOptions {
        modes: 16,
        nr: 65,
        oversample: 4,
        ..SolverOptions::default()
    };
    let jac = fd_jacobian_mode(geom, &verify_params(), 8, 1e-6, options)?;
    let symbol = principal_symbol(geom, 8);
    let rel = (jac[0][0] - symbol[0][0]).abs() / symbol[0][0].abs();
    Ok(CheckReport::below(
        "jacobian_vs_symbol_mode8",
        "relative gap between the probed velocity Jacobian and the principal symbol (outer diagonal, m = 8; lower-order terms contribute ~10%)",
        rel,
        0.12,
    ))
}

fn verify_test_pair() -> Result<InterfacePair> {
    let mut rho1 = FourierSeries::cosine(8, 2, 0.04)?;
    let extra = FourierSeries::cosine(8, 3, 0.02)?;
    rho1 = rho1.add(&extra)?;
    let rho2 = FourierSeries::cosine(8, 3, 0.03)?;
    InterfacePair::new(rho1, rho2)
}

fn check_equivariance() -> Result<CheckReport> {
    let geom = Geometry::new(2.0, 1.0).unwrap();
    let params = verify_params();
    let options = SolverOptions {
        modes: 8,
        nr: 65,
        oversample: 4,
        ..SolverOptions::default()
    };
    let pair = verify_test_pair()?;
    let (phi1, phi2) = interface_velocity(geom, &params, &pair, options)?;

    // Rotation by 2*pi/8: a grid shift of both the solver grid (24 points)
    // and the assembly grid (64 points), so equivariance holds to rounding.
    let phi = 2.0 * std::f64::consts::PI / 8.0;
    let rotated = InterfacePair::new(pair.rho1().rotated(phi), pair.rho2().rotated(phi))?;
    let (rot1, rot2) = interface_velocity(geom, &params, &rotated, options)?;
    let mut worst = 0.0_f64;
    for m in -8..=8_i32 {
        worst = worst.max((rot1.coeff(m) - phi1.rotated(phi).coeff(m)).norm());
        worst = worst.max((rot2.coeff(m) - phi2.rotated(phi).coeff(m)).norm());
    }

    let reflected = InterfacePair::new(pair.rho1().reflected(), pair.rho2().reflected())?;
    let (ref1, ref2) = interface_velocity(geom, &params, &reflected, options)?;
    for m in -8..=8_i32 {
        worst = worst.max((ref1.coeff(m) - phi1.reflected().coeff(m)).norm());
        worst = worst.max((ref2.coeff(m) - phi2.reflected().coeff(m)).norm());
    }
    Ok(CheckReport::below(
        "velocity_equivariance",
        "max coefficient defect of rotation (grid-shift) and reflection equivariance of the velocity",
        worst,
        1e-10,
    ))
}

fn check_radial_closure() -> Result<CheckReport> {
    let geom = Geometry::new(2.0, 1.0).unwrap();
    let params = ModelParams {
        a: 0.7,
        g: 2.0,
        psi0: 1.3,
    };
    let options = SolverOptions {
        modes: 6,
        nr: 65,
        oversample: 4,
        ..SolverOptions::default()
    };
    let (c1, c2) = (0.05, -0.04);
    let mut rho1 = FourierSeries::zero(6);
    rho1.set_coeff(0, Complex64::new(c1, 0.0));
    let mut rho2 = FourierSeries::zero(6);
    rho2.set_coeff(0, Complex64::new(c2, 0.0));
    let pair = InterfacePair::new(rho1, rho2)?;
    let (phi1, phi2) = interface_velocity(geom, &params, &pair, options)?;
    let (oracle1, oracle2) = radial_velocity(geom, &params, c1, c2)?;
    let worst = (phi1.coeff(0).re - oracle1)
        .abs()
        .max((phi2.coeff(0).re - oracle2).abs());
    Ok(CheckReport::below(
        "radial_closure",
        "gap between the solver velocity of a round configuration and the closed-form radial oracle",
        worst,
        1e-4,
    ))
}

pub(crate) fn build_verify_report() -> Result<VerifyReport> {
    let checks = vec![
        check_bessel_wronskian()?,
        check_bessel_derivatives()?,
        check_stationary_residuals()?,
        check_critical_threshold()?,
        check_solver_oracle()?,
        check_jacobian_vs_symbol()?,
        check_equivariance()?,
        check_radial_closure()?,
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        fault_injection_active: fault_enabled(),
        passed,
        checks,
    })
}

fn cmd_verify(args: &CommonArgs) -> Result<i32> {
    let cfg = args.effective_config()?;
    // The suite runs on canonical internal parameters so its tolerances
    // stay meaningful; the configuration only supplies the output location.
    let report = build_verify_report()?;
    let json = to_json(&report);
    println!("{json}");
    if let Some(dir) = &cfg.output.dir {
        write_file(dir, "verify.json", &json)?;
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_VERIFY })
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepRow {
    psi0: f64,
    solvable: bool,
    a: Option<f64>,
    g: Option<f64>,
    defects: Option<[f64; 2]>,
}

fn sweep_rows(geom: Geometry, values: &[f64]) -> Vec<SweepRow> {
    values
        .par_iter()
        .map(|&psi0| match solve_stationary(geom, psi0) {
            Ok(state) => SweepRow {
                psi0,
                solvable: true,
                a: Some(state.a),
                g: Some(state.g),
                defects: Some(state.defects),
            },
            Err(_) => SweepRow {
                psi0,
                solvable: false,
                a: None,
                g: None,
                defects: None,
            },
        })
        .collect()
}

fn sweep_csv(psi0_critical: f64, rows: &[SweepRow]) -> String {
    let mut csv = String::from("psi0,psi0_critical,solvable,a,g,ag,defect_outer,defect_inner\n");
    let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    for row in rows {
        let ag = row.a.zip(row.g).map(|(a, g)| a * g);
        csv.push_str(&format!(
            "{:e},{:e},{},{},{},{},{},{}\n",
            row.psi0,
            psi0_critical,
            row.solvable,
            opt(row.a),
            opt(row.g),
            opt(ag),
            opt(row.defects.map(|d| d[0])),
            opt(row.defects.map(|d| d[1])),
        ));
    }
    csv
}

fn cmd_sweep(args: &SweepArgs) -> Result<i32> {
    let cfg = args.common.effective_config()?;
    let geom = cfg.validate()?;
    if args.samples < 2 {
        return Err(Error::Config(format!(
            "sweep needs at least 2 samples, got {}",
            args.samples
        )));
    }
    let psi0c = psi0_critical(geom)?;
    let lo = args.psi0_min.unwrap_or(0.2 * psi0c);
    let hi = args.psi0_max.unwrap_or(1.8 * psi0c);
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
        return Err(Error::Config(format!(
            "sweep range must satisfy 0 < psi0_min < psi0_max, got [{lo}, {hi}]"
        )));
    }
    let mut values: Vec<f64> = (0..args.samples)
        .map(|k| lo + (hi - lo) * k as f64 / (args.samples - 1) as f64)
        .collect();
    // Pin the exact critical value into the sweep unless a sample already
    // falls inside its rejection band (which would duplicate the row).
    let near_critical = |v: f64| (v - psi0c).abs() < crate::stationary::CRITICAL_BAND * psi0c;
    if psi0c > lo && psi0c < hi && !values.iter().any(|&v| near_critical(v)) {
        values.push(psi0c);
    }
    values.sort_by(f64::total_cmp);
    let rows = sweep_rows(geom, &values);
    let csv = sweep_csv(psi0c, &rows);
    match &cfg.output.dir {
        Some(dir) => {
            let path = write_file(dir, "sweep.csv", &csv)?;
            println!(
                "{}",
                to_json(&serde_json::json!({ "rows": rows.len(), "file": path }))
            );
        }
        None => print!("{csv}"),
    }
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn example_config() -> RunConfig {
        RunConfig {
            geometry: GeometryConfig { r1: 2.5, r2: 0.75 },
            bio: BioConfig {
                psi0: 1.25,
                a: Some(0.5),
                g: Some(2.0),
                derive_stationary: false,
            },
            discretization: DiscretizationConfig {
                modes: 24,
                nr: 65,
                oversample: 4,
            },
            time: TimeConfig {
                t_end: 0.05,
                dt: 5e-4,
                output_every: 3,
            },
            seed: vec![
                SeedMode {
                    interface: SeedInterface::Outer,
                    mode: 5,
                    amplitude: 1e-3,
                    phase: 0.4,
                },
                SeedMode {
                    interface: SeedInterface::Inner,
                    mode: 0,
                    amplitude: 2e-3,
                    phase: 0.0,
                },
            ],
            output: OutputConfig { dir: None },
        }
    }

    #[test]
    fn config_round_trips_through_toml() {
        for cfg in [RunConfig::default(), example_config()] {
            let text = cfg.to_toml();
            let parsed: RunConfig = toml::from_str(&text).unwrap();
            assert_eq!(parsed, cfg, "round trip failed for:\n{text}");
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = toml::from_str::<RunConfig>("[geometry]\nr1 = 2.0\nr2 = 1.0\nr3 = 4.0\n");
        assert!(err.is_err());
    }

    #[test]
    fn flags_override_file_values() {
        let args = CommonArgs {
            r1: Some(3.0),
            psi0: Some(2.5),
            a: Some(1.0),
            g: Some(4.0),
            modes: Some(12),
            dt: Some(1e-4),
            ..CommonArgs::default()
        };
        let cfg = args.effective_config().unwrap();
        assert_eq!(cfg.geometry.r1, 3.0);
        assert_eq!(cfg.geometry.r2, 1.0, "untouched fields keep defaults");
        assert_eq!(cfg.bio.psi0, 2.5);
        assert!(!cfg.bio.derive_stationary, "explicit (a, g) wins");
        assert_eq!(cfg.bio.a, Some(1.0));
        assert_eq!(cfg.discretization.modes, 12);
        assert_eq!(cfg.time.dt, 1e-4);
    }

    #[test]
    fn validation_rejects_inconsistent_configs() {
        let mut swapped = RunConfig::default();
        swapped.geometry = GeometryConfig { r1: 1.0, r2: 2.0 };
        assert_eq!(exit_code_for(&swapped.validate().unwrap_err()), EXIT_CONFIG);

        let mut half_explicit = RunConfig::default();
        half_explicit.bio.derive_stationary = false;
        half_explicit.bio.a = Some(1.0);
        assert!(matches!(half_explicit.validate(), Err(Error::Config(_))));

        let mut conflicting = RunConfig::default();
        conflicting.bio.a = Some(1.0);
        conflicting.bio.g = Some(1.0);
        assert!(matches!(conflicting.validate(), Err(Error::Config(_))));

        let mut bad_seed = RunConfig::default();
        bad_seed.discretization.modes = 8;
        bad_seed.seed.push(SeedMode {
            interface: SeedInterface::Outer,
            mode: 9,
            amplitude: 1e-3,
            phase: 0.0,
        });
        assert!(matches!(bad_seed.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn exit_codes_follow_error_classes() {
        assert_eq!(exit_code_for(&Error::Config("x".into())), EXIT_CONFIG);
        assert_eq!(
            exit_code_for(&Error::DegenerateAnnulus { r1: 1.0, r2: 2.0 }),
            EXIT_CONFIG
        );
        assert_eq!(
            exit_code_for(&Error::CriticalPsi0 {
                psi0: 1.0,
                psi0_critical: 1.0
            }),
            EXIT_CRITICAL
        );
        assert_eq!(
            exit_code_for(&Error::SolveFailure {
                residual: 1.0,
                iterations: 1,
                tol: 0.0
            }),
            EXIT_NUMERICAL
        );
        assert_eq!(
            exit_code_for(&Error::NumericalBlowup { time: 0.0 }),
            EXIT_NUMERICAL
        );
    }

    #[test]
    fn seed_pair_realises_cosines_with_phase() {
        let mut cfg = example_config();
        cfg.discretization.modes = 8;
        cfg.seed = vec![SeedMode {
            interface: SeedInterface::Outer,
            mode: 3,
            amplitude: 0.01,
            phase: 0.7,
        }];
        let pair = cfg.seed_pair().unwrap();
        let n = 32;
        let samples = pair.rho1().sample(n).unwrap();
        for (k, value) in samples.iter().enumerate() {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let expected = 0.01 * (3.0 * theta + 0.7).cos();
            assert!((value - expected).abs() < 1e-14, "sample {k}");
        }
        assert_eq!(pair.rho2().sup_norm(), 0.0);
    }

    #[test]
    fn stationary_report_solvable_and_critical() {
        let geom = Geometry::new(2.0, 1.0).unwrap();
        let (report, code) = build_stationary_report(geom, 1.0).unwrap();
        assert_eq!(code, EXIT_OK);
        assert!(report.solvable);
        assert!(report.residuals.unwrap()[0].abs() < 1e-10);
        assert!(report.certificate.holds);
        assert!(report.zero_supply.holds);
        assert!(report.psi0_critical > 0.0);

        let (critical_report, critical_code) =
            build_stationary_report(geom, report.psi0_critical).unwrap();
        assert_eq!(critical_code, EXIT_CRITICAL);
        assert!(!critical_report.solvable);
        assert!(critical_report.a.is_none());
    }

    #[test]
    fn spectrum_csv_matches_symbols() {
        let geom = Geometry::new(2.0, 1.0).unwrap();
        let csv = spectrum_csv(geom, 8);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 10, "header plus modes 0..=8");
        assert_eq!(lines[0], "m,a11,a12,a21,a22,lambda_dominant,lambda_fast");
        assert_eq!(lines[1], "0,0e0,0e0,0e0,0e0,0e0,0e0");
        let row: Vec<f64> = lines[9]
            .split(',')
            .skip(1)
            .map(|v| v.parse().unwrap())
            .collect();
        let symbol = principal_symbol(geom, 8);
        assert_eq!(row[0], symbol[0][0]);
        assert_eq!(row[3], symbol[1][1]);
        let (dominant, _) = symbol_eigenvalues(geom, 8);
        assert_eq!(row[4], dominant);
    }

    #[test]
    fn trajectory_and_interface_tables_have_the_declared_shape() {
        let geom = Geometry::new(2.0, 1.0).unwrap();
        let params = ModelParams {
            a: 1.0,
            g: 1.0,
            psi0: 1.0,
        };
        let opts = EvolveOptions {
            t_end: 2e-3,
            dt: 1e-3,
            snapshot_stride: 1,
            solver: SolverOptions {
                modes: 4,
                nr: 33,
                oversample: 2,
                ..SolverOptions::default()
            },
            ..EvolveOptions::default()
        };
        let trajectory = evolve(geom, &params, &InterfacePair::flat(4), &opts).unwrap();
        let csv = trajectory_csv(&trajectory);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,interface,m,re,im");
        assert_eq!(
            lines.len(),
            1 + trajectory.snapshots.len() * 2 * 9,
            "one row per snapshot, interface, and mode"
        );
        let surf = interfaces_csv(geom, &trajectory).unwrap();
        let rows: Vec<&str> = surf.lines().collect();
        assert_eq!(rows[0], "t,interface,theta,radius");
        assert_eq!(rows.len(), 1 + trajectory.snapshots.len() * 2 * 256);
        // Flat interfaces stay at their radii.
        let first = rows[1].split(',').collect::<Vec<_>>();
        assert_eq!(first[1], "1");
        assert!((first[3].parse::<f64>().unwrap() - 2.0).abs() < 1e-9);

        // Same configuration twice gives identical bytes.
        let again = evolve(geom, &params, &InterfacePair::flat(4), &opts).unwrap();
        assert_eq!(csv, trajectory_csv(&again));
    }

    #[test]
    fn seed_decay_rate_tracks_the_symbol() {
        let geom = Geometry::new(2.0, 1.0).unwrap();
        let params = ModelParams {
            a: 1.0,
            g: 1.0,
            psi0: 1.0,
        };
        let seeds = vec![SeedMode {
            interface: SeedInterface::Outer,
            mode: 8,
            amplitude: 1e-3,
            phase: 0.0,
        }];
        let mut cfg = RunConfig::default();
        cfg.bio = BioConfig {
            psi0: 1.0,
            a: Some(1.0),
            g: Some(1.0),
            derive_stationary: false,
        };
        cfg.discretization = DiscretizationConfig {
            modes: 12,
            nr: 65,
            oversample: 2,
        };
        cfg.seed = seeds.clone();
        let opts = EvolveOptions {
            t_end: 0.01,
            dt: 5e-4,
            snapshot_stride: 1,
            solver: cfg.solver_options(),
            ..EvolveOptions::default()
        };
        let trajectory = evolve(geom, &params, &cfg.seed_pair().unwrap(), &opts).unwrap();
        let reports = seed_reports(geom, &seeds, &trajectory);
        assert_eq!(reports.len(), 1);
        let measured = reports[0].measured_decay_rate.unwrap();
        let symbol = reports[0].symbol_rate.unwrap();
        let rel = (measured - symbol).abs() / symbol.abs();
        assert!(
            rel < 0.15,
            "measured {measured} vs symbol {symbol} (rel {rel})"
        );
    }

    #[test]
    fn verification_suite_passes_without_fault_injection() {
        let report = build_verify_report().unwrap();
        assert!(
            report.passed,
            "failing checks: {:?}",
            report
                .checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| (c.name, c.measured, c.tolerance))
                .collect::<Vec<_>>()
        );
        assert_eq!(report.checks.len(), 8);
        assert!(!report.fault_injection_active);
        for check in &report.checks {
            assert!(check.measured.is_finite(), "finite measurement for {}", check.name);
        }
    }

    #[test]
    fn sweep_marks_the_critical_row_unsolvable() {
        let geom = Geometry::new(2.0, 1.0).unwrap();
        let psi0c = psi0_critical(geom).unwrap();
        let values = [0.5 * psi0c, psi0c, 1.5 * psi0c];
        let rows = sweep_rows(geom, &values);
        assert_eq!(rows.len(), 3);
        assert!(rows[0].solvable);
        assert!(!rows[1].solvable, "the critical value must be rejected");
        assert!(rows[2].solvable);
        let csv = sweep_csv(psi0c, &rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[2].contains(",false,,,,,"));
        assert!(lines[1].contains(",true,"));
    }
}
