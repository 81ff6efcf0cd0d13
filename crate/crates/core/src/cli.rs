//! Command-line front end. Each subcommand reads one JSON config.
//!
//! Exit codes: 0 success, 1 numerical or verification failure, 2 invalid input.

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Deserialize;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::biortho::{BiorthogonalSystem, BuildOptions, EigenMethod, Sector};
use crate::classical::{
    circle_geometry, integrate, momentum_amplitude, Branch, PhasePoint, TrajectoryConfig as Stepping,
};
use crate::error::Error;
use crate::hamiltonian::HamiltonianSpec;
use crate::kernels::{ham_kernel_h, ham_kernel_h_nu, norm_kernel_j, norm_kernel_j_nu, periodic_grid, simple_kernel_k, KernelGrid};
use crate::models::{certify, ModelReport};
use crate::qft::instability_scan;

#[derive(Debug, Parser)]
#[command(name = "biorthogonal", version, about = "Biorthogonal systems for complex periodic potentials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a biorthogonal system and write it as JSON
    Build(Common),
    /// Build (or load) a system and certify it
    Verify(Common),
    /// Sample a closed-form kernel on a periodic grid
    Kernel(Common),
    /// Integrate a complex classical trajectory
    Trajectory(Common),
    /// Time-evolve a state and record <p> and <e^{2ix}>
    Evolve(Common),
    /// Scan the trial energy for a lower bound
    Qft(Common),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON config file
    #[arg(long)]
    pub config: PathBuf,
    /// Output path; overrides the config's `out`, stdout when neither is set
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override every verification tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// Suppress progress and summary lines on stderr
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Compute(#[from] Error),
    #[error("verification failed: {0}")]
    Check(String),
    #[error("cannot write output: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses arguments, runs the subcommand and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (common, result) = match &cli.command {
        Command::Build(c) => (c, cmd_build(c)),
        Command::Verify(c) => (c, cmd_verify(c)),
        Command::Kernel(c) => (c, cmd_kernel(c)),
        Command::Trajectory(c) => (c, cmd_trajectory(c)),
        Command::Evolve(c) => (c, cmd_evolve(c)),
        Command::Qft(c) => (c, cmd_qft(c)),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            if !common.quiet || e.exit_code() != 0 {
                eprintln!("error: {e}");
            }
            e.exit_code()
        }
    }
}

fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn output_path(common: &Common, configured: &Option<PathBuf>) -> Option<PathBuf> {
    common.out.clone().or_else(|| configured.clone())
}

/// Writes through a temporary file in the target directory and renames it into place.
fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn emit(path: Option<&Path>, contents: &str) -> CliResult<()> {
    match path {
        Some(p) => write_atomic(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn note(common: &Common, msg: impl AsRef<str>) {
    if !common.quiet {
        eprintln!("{}", msg.as_ref());
    }
}

fn json<T: serde::Serialize>(v: &T) -> CliResult<String> {
    serde_json::to_string_pretty(v)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::Io(e.to_string()))
}

fn default_n_max() -> usize {
    15
}
fn default_trunc() -> usize {
    60
}
fn default_sector() -> Sector {
    Sector::Right
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BuildConfig {
    model: HamiltonianSpec,
    #[serde(default = "default_n_max")]
    n_max: usize,
    #[serde(default = "default_trunc")]
    trunc: usize,
    #[serde(default = "default_sector")]
    sector: Sector,
    #[serde(default)]
    method: EigenMethod,
    #[serde(default)]
    out: Option<PathBuf>,
}

impl BuildConfig {
    fn options(&self) -> BuildOptions {
        BuildOptions {
            sector: self.sector,
            n_max: self.n_max,
            trunc: self.trunc,
            method: self.method,
        }
    }
}

pub fn cmd_build(common: &Common) -> CliResult<()> {
    let cfg: BuildConfig = read_config(&common.config)?;
    let sys = BiorthogonalSystem::build(&cfg.model, cfg.options())?;
    for w in sys.warnings() {
        note(common, format!("warning: {w:?}"));
    }
    let out = output_path(common, &cfg.out);
    emit(out.as_deref(), &(sys.to_json()? + "\n"))?;
    note(common, format!("built {} levels", sys.n_max() + 1));
    Ok(())
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub biorth: f64,
    pub eigen: f64,
    pub tail: f64,
    pub closed_form: f64,
    pub kernel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            biorth: 1e-10,
            eigen: 1e-10,
            tail: 1e-10,
            closed_form: 1e-10,
            kernel: 1e-9,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyConfig {
    #[serde(default)]
    model: Option<HamiltonianSpec>,
    /// A system file written by `build`, used instead of `model`.
    #[serde(default)]
    system: Option<PathBuf>,
    #[serde(default = "default_n_max")]
    n_max: usize,
    #[serde(default = "default_trunc")]
    trunc: usize,
    #[serde(default = "default_sector")]
    sector: Sector,
    #[serde(default)]
    method: EigenMethod,
    #[serde(default)]
    tolerances: Tolerances,
    #[serde(default)]
    out: Option<PathBuf>,
}

/// Named checks of a report against tolerances, in reporting order.
pub fn judge(report: &ModelReport, tol: &Tolerances) -> Vec<(String, f64, f64)> {
    let mut out = vec![
        ("eigen_residual".to_string(), report.max_eigen_residual, tol.eigen),
        ("eigen_residual (truncation tail)".to_string(), report.max_truncation_tail, tol.tail),
        ("biorthonormality".to_string(), report.max_biorth_dev, tol.biorth),
    ];
    for (name, v) in &report.checks {
        let t = match name.as_str() {
            "norm_kernel" => tol.kernel,
            "ground_state_annihilation" => tol.eigen,
            _ => tol.closed_form,
        };
        out.push((name.clone(), *v, t));
    }
    out
}

pub fn cmd_verify(common: &Common) -> CliResult<()> {
    let cfg: VerifyConfig = read_config(&common.config)?;
    let mut tol = cfg.tolerances;
    if let Some(t) = common.tol {
        if !(t > 0.0) {
            return Err(CliError::Config(format!("--tol must be positive, got {t}")));
        }
        tol = Tolerances {
            biorth: t,
            eigen: t,
            tail: t,
            closed_form: t,
            kernel: t,
        };
    }
    let sys = match (&cfg.model, &cfg.system) {
        (Some(spec), None) => BiorthogonalSystem::build(
            spec,
            BuildOptions {
                sector: cfg.sector,
                n_max: cfg.n_max,
                trunc: cfg.trunc,
                method: cfg.method,
            },
        )?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            BiorthogonalSystem::from_json(&text).map_err(|e| CliError::Config(e.to_string()))?
        }
        _ => return Err(CliError::Config("give exactly one of `model` and `system`".into())),
    };
    let report = certify(&sys)?;
    emit(output_path(common, &cfg.out).as_deref(), &json(&report)?)?;
    let mut first_failure = None;
    for (name, value, limit) in judge(&report, &tol) {
        let pass = value <= limit;
        note(
            common,
            format!("{:<34} {value:.3e} <= {limit:.1e} {}", name, if pass { "ok" } else { "FAIL" }),
        );
        if !pass && first_failure.is_none() {
            first_failure = Some(format!("{name} = {value:e} exceeds {limit:e}"));
        }
    }
    match first_failure {
        Some(msg) => Err(CliError::Check(msg)),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
enum KernelName {
    J,
    H,
    #[serde(rename = "J_nu")]
    JNu,
    #[serde(rename = "H_nu")]
    HNu,
    K,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelConfig {
    kernel: KernelName,
    m: f64,
    #[serde(default)]
    nu: f64,
    #[serde(default)]
    s: Option<Complex64>,
    #[serde(default = "default_grid")]
    nx: usize,
    #[serde(default = "default_grid")]
    ny: usize,
    #[serde(default)]
    out: Option<PathBuf>,
}

impl KernelName {
    fn name(self) -> &'static str {
        match self {
            KernelName::J => "J",
            KernelName::H => "H",
            KernelName::JNu => "J_nu",
            KernelName::HNu => "H_nu",
            KernelName::K => "K",
        }
    }
}

fn default_grid() -> usize {
    16
}

pub fn cmd_kernel(common: &Common) -> CliResult<()> {
    let cfg: KernelConfig = read_config(&common.config)?;
    if !cfg.m.is_finite() || !cfg.nu.is_finite() || cfg.nx == 0 || cfg.ny == 0 {
        return Err(CliError::Config("kernel needs finite m, nu and nonempty grids".into()));
    }
    let s = match (cfg.kernel, cfg.s) {
        (KernelName::K, Some(s)) if s != Complex64::new(0.0, 0.0) => s,
        (KernelName::K, _) => return Err(CliError::Config("kernel K needs a nonzero `s`".into())),
        (_, _) => Complex64::new(1.0, 0.0),
    };
    let (xs, ys) = (periodic_grid(cfg.nx), periodic_grid(cfg.ny));
    let (m, nu) = (cfg.m, cfg.nu);
    let grid = KernelGrid::sample(&xs, &ys, |x, y| match cfg.kernel {
        KernelName::J => norm_kernel_j(m, x, y),
        KernelName::H => ham_kernel_h(m, x, y),
        KernelName::JNu => norm_kernel_j_nu(m, nu, x, y),
        KernelName::HNu => ham_kernel_h_nu(m, nu, x, y),
        KernelName::K => simple_kernel_k(m, s, x, y),
    })?;
    let out = output_path(common, &cfg.out);
    emit(out.as_deref(), &grid.to_csv())?;
    if let Some(path) = out {
        let params = serde_json::json!({ "m": m, "nu": nu, "s": [s.re, s.im] });
        write_atomic(&path.with_extension("json"), &json(&grid.sidecar(cfg.kernel.name(), params))?)?;
    }
    note(common, format!("kernel {} on {}x{} grid", cfg.kernel.name(), cfg.nx, cfg.ny));
    Ok(())
}

fn default_bound() -> f64 {
    1e6
}
fn default_branch() -> Branch {
    Branch::Plus
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrajectoryRun {
    model: HamiltonianSpec,
    x0: Complex64,
    /// Initial momentum; otherwise derived from `energy` on `branch`.
    #[serde(default)]
    p0: Option<Complex64>,
    #[serde(default)]
    energy: Option<Complex64>,
    #[serde(default = "default_branch")]
    branch: Branch,
    dt: f64,
    steps: usize,
    #[serde(default = "default_bound")]
    bound: f64,
    #[serde(default)]
    out: Option<PathBuf>,
}

/// `p0 = +-sqrt(E - V(x0)) - nu`.
fn momentum_on_branch(spec: &HamiltonianSpec, x0: Complex64, energy: Complex64, branch: Branch) -> Complex64 {
    branch.sign() * (energy - spec.potential(x0)).sqrt() - spec.nu()
}

/// Largest distance of the sampled momenta from the predicted circle, when the model is a
/// single exponential at real positive energy.
pub fn circle_fit_residual(spec: &HamiltonianSpec, points: &[PhasePoint]) -> Option<f64> {
    let mu2 = spec.coupling(2);
    if spec.nu() != 0.0 || spec.mu().len() != 1 || mu2.im != 0.0 || !(mu2.re > 0.0) {
        return None;
    }
    let start = points.first()?;
    let energy = spec.energy(start.x, start.p);
    if !(energy.re > 0.0) || energy.im.abs() > 1e-12 * energy.norm().max(1.0) {
        return None;
    }
    let m = mu2.re.sqrt();
    let root = (energy - spec.potential(start.x)).sqrt();
    let branch = if (start.p - root).norm() <= (start.p + root).norm() {
        Branch::Plus
    } else {
        Branch::Minus
    };
    let a = momentum_amplitude(m, energy, start.x).ok()?;
    let geo = circle_geometry(a, energy.re, branch).ok()?;
    Some(points.iter().map(|pt| geo.distance(pt.p)).fold(0.0, f64::max))
}

pub fn cmd_trajectory(common: &Common) -> CliResult<()> {
    let cfg: TrajectoryRun = read_config(&common.config)?;
    let p0 = match (cfg.p0, cfg.energy) {
        (Some(p), None) => p,
        (None, Some(e)) => momentum_on_branch(&cfg.model, cfg.x0, e, cfg.branch),
        _ => return Err(CliError::Config("give exactly one of `p0` and `energy`".into())),
    };
    let stepping = Stepping {
        bound: cfg.bound,
        ..Stepping::new(cfg.dt, cfg.steps)
    };
    if !(cfg.dt > 0.0) || cfg.steps == 0 || !(cfg.bound > 0.0) {
        return Err(CliError::Config(format!("need dt > 0, steps >= 1 and bound > 0: {stepping:?}")));
    }
    let traj = integrate(&cfg.model, PhasePoint::new(cfg.x0, p0, 0.0), stepping)?;
    let mut csv = String::from("t,re_x,im_x,re_p,im_p\n");
    for pt in &traj.points {
        let _ = writeln!(
            csv,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            pt.t, pt.x.re, pt.x.im, pt.p.re, pt.p.im
        );
    }
    let residual = circle_fit_residual(&cfg.model, &traj.points);
    if let Some(r) = residual {
        let _ = writeln!(csv, "# circle_residual,{r:.16e}");
    }
    emit(output_path(common, &cfg.out).as_deref(), &csv)?;
    if let (Some(r), Some(t)) = (residual, common.tol) {
        if r > t {
            return Err(CliError::Check(format!("circle_residual = {r:e} exceeds {t:e}")));
        }
    }
    note(common, format!("{} trajectory samples", traj.points.len()));
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvolveConfig {
    model: HamiltonianSpec,
    #[serde(default = "default_n_max")]
    n_max: usize,
    #[serde(default = "default_trunc")]
    trunc: usize,
    /// `[n, re, im]` triples; unlisted levels are zero.
    coeffs: Vec<(usize, f64, f64)>,
    #[serde(default)]
    t0: f64,
    t1: f64,
    samples: usize,
    #[serde(default)]
    out: Option<PathBuf>,
}

pub fn cmd_evolve(common: &Common) -> CliResult<()> {
    let cfg: EvolveConfig = read_config(&common.config)?;
    let spec = &cfg.model;
    if spec.nu() != 0.0 || spec.mu().keys().ne([2].iter()) {
        return Err(CliError::Config("evolve needs nu = 0 and a single e^(2ix) coupling".into()));
    }
    if cfg.samples == 0 || !cfg.t0.is_finite() || !cfg.t1.is_finite() {
        return Err(CliError::Config("evolve needs finite times and samples >= 1".into()));
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); cfg.n_max + 1];
    for &(n, re, im) in &cfg.coeffs {
        let slot = coeffs
            .get_mut(n)
            .ok_or_else(|| CliError::Config(format!("coefficient index {n} exceeds n_max = {}", cfg.n_max)))?;
        *slot = Complex64::new(re, im);
    }
    if coeffs.iter().all(|c| c.norm() == 0.0) {
        return Err(CliError::Config("state has no nonzero coefficient".into()));
    }
    let sys = BiorthogonalSystem::build(
        spec,
        BuildOptions {
            n_max: cfg.n_max,
            trunc: cfg.trunc,
            ..BuildOptions::default()
        },
    )?;
    let state = sys.state(coeffs)?;
    let mut csv = String::from("t,re_p_expect,im_p_expect,re_e2ix_expect,im_e2ix_expect\n");
    let step = if cfg.samples > 1 { (cfg.t1 - cfg.t0) / (cfg.samples - 1) as f64 } else { 0.0 };
    for k in 0..cfg.samples {
        let t = cfg.t0 + step * k as f64;
        let p = state.p_expectation(t)?;
        let e = state.e2ix_expectation(t)?;
        let _ = writeln!(csv, "{t:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", p.re, p.im, e.re, e.im);
    }
    emit(output_path(common, &cfg.out).as_deref(), &csv)?;
    note(common, format!("{} evolution samples", cfg.samples));
    Ok(())
}

fn default_qft_m() -> f64 {
    1.0
}
fn default_qft_samples() -> usize {
    200
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct QftConfig {
    mu: Complex64,
    beta: f64,
    #[serde(default)]
    xi: f64,
    #[serde(default = "default_qft_m")]
    m: f64,
    #[serde(rename = "M_max")]
    m_max: f64,
    #[serde(default = "default_qft_samples")]
    samples: usize,
    #[serde(default)]
    out: Option<PathBuf>,
}

pub fn cmd_qft(common: &Common) -> CliResult<()> {
    let cfg: QftConfig = read_config(&common.config)?;
    if !(cfg.m > 0.0) || !(cfg.m_max > cfg.m) || !cfg.m_max.is_finite() || cfg.samples < 2 || !cfg.beta.is_finite() {
        return Err(CliError::Config("qft needs 0 < m < M_max, finite beta and samples >= 2".into()));
    }
    let r = instability_scan(cfg.mu, cfg.beta, cfg.xi, cfg.m, cfg.m_max, cfg.samples)?;
    emit(output_path(common, &cfg.out).as_deref(), &json(&r)?)?;
    note(
        common,
        format!("bounded_below = {}, min {:.6e} at M = {:.6e}", r.bounded_below, r.min_value, r.argmin_mass),
    );
    Ok(())
}
