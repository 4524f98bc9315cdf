//! The `mbtop` command-line front end.
//!
//! Every subcommand resolves its flags into a serializable config. That
//! config can be printed with `--dump-config` and replayed with `--config`,
//! which makes runs reproducible from a single JSON file. Exit codes: 0 on
//! success, 1 on rejected input, 2 when an integrator fails.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::g4::{reconstruct, ControlConfig, Costate, G4State, Reconstruction};
use crate::integrate::{drift_report, integrate, IntegratorSpec, Method, Sampling, Trajectory};
use crate::model::{preset, Params, State};
use crate::pendulum::{make_context, verify_reduction, ReductionCheck};
use crate::poisson::verify_structure;
use crate::stability::{equilibria, nonlinear_classify, perturbation_probe, Equilibrium};

/// Version tag written into every JSON report.
pub const SCHEMA: &str = "mbtop/1";
pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "MBTOP_SEED";

pub const TRAJECTORY_HEADER: [&str; 6] = ["t", "x1", "x2", "x3", "H", "C"];
pub const PENDULUM_HEADER: [&str; 7] = ["t", "theta", "theta_dot", "x1", "x2", "x3", "residual"];
pub const CONTROL_HEADER: [&str; 10] = ["t", "x1", "x2", "x3", "x4", "z1", "z2", "z3", "u1", "u2"];

#[derive(Debug, Parser)]
#[command(name = "mbtop", version, about = "Simulation and analysis of the Maxwell-Bloch top family")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the top and write `t,x1,x2,x3,H,C` as CSV.
    Simulate(SimulateArgs),
    /// Check skew-symmetry, Jacobi, Casimir and Hamiltonian form for several realizations.
    VerifyStructure(StructureArgs),
    /// Compare a direct integration with the pendulum route on the same level set.
    ReducePendulum(PendulumArgs),
    /// Classify the equilibria and probe them with small perturbations.
    AnalyzeEquilibria(EquilibriaArgs),
    /// Integrate an optimal-control extremal on G4 from an initial costate.
    ControlG4(ControlArgs),
    /// Render a trajectory CSV as an SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// Read the full run configuration from this JSON file (other flags except outputs are ignored).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long)]
    dump_config: bool,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Named parameter set: maxwell-bloch or lorenz-hamilton.
    #[arg(long, conflicts_with = "b")]
    preset: Option<String>,
    /// Parameters as `b1,b2,b3`.
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
}

#[derive(Debug, Args)]
struct IntegratorArgs {
    /// rk4, rk45 or midpoint.
    #[arg(long, default_value = "rk45")]
    method: String,
    /// Step size of the fixed-step methods.
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    #[arg(long, default_value_t = 1e-10)]
    rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    atol: f64,
    /// Output interval; every accepted step is written when absent.
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Initial state `x1,x2,x3`.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long, default_value_t = 10.0)]
    t_end: f64,
    #[command(flatten)]
    integrator: IntegratorArgs,
    /// CSV output path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    cfg: ConfigArgs,
}

#[derive(Debug, Args)]
struct StructureArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Number of random SL(2,R) realizations checked besides the base and bar ones.
    #[arg(long, default_value_t = 20)]
    realizations: usize,
    /// Random points for the Hamiltonian-form check.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON output path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    cfg: ConfigArgs,
}

#[derive(Debug, Args)]
struct PendulumArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long, default_value_t = 10.0)]
    t_end: f64,
    #[command(flatten)]
    integrator: IntegratorArgs,
    /// CSV output path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional JSON summary path.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    cfg: ConfigArgs,
}

#[derive(Debug, Args)]
struct EquilibriaArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Family parameters `m` to classify, comma separated.
    #[arg(long, default_value = "1,-1", allow_hyphen_values = true)]
    m: String,
    /// Radius of the perturbation probe.
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    #[arg(long, default_value_t = 100.0)]
    probe_t_end: f64,
    #[arg(long, default_value_t = 10)]
    directions: usize,
    /// Skip the perturbation probes.
    #[arg(long)]
    no_probe: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    cfg: ConfigArgs,
}

#[derive(Debug, Args)]
struct ControlArgs {
    #[arg(long, default_value_t = 1.0)]
    c1: f64,
    #[arg(long, default_value_t = 1.0)]
    c2: f64,
    /// The conserved momentum `z4`.
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    k: f64,
    #[arg(long, default_value_t = 10.0)]
    t_f: f64,
    /// Initial group element `x1,x2,x3,x4`.
    #[arg(long, allow_hyphen_values = true, default_value = "0,0,0,0")]
    x0: String,
    /// Initial costate `z1,z2,z3` (then `z4 = k`) or `z1,z2,z3,z4`.
    #[arg(long, allow_hyphen_values = true)]
    z0: Option<String>,
    /// Integration horizon, at most `t_f`; defaults to `t_f`.
    #[arg(long)]
    t_end: Option<f64>,
    #[command(flatten)]
    integrator: IntegratorArgs,
    /// CSV output path for the extremal.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON report path (stdout when absent).
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    cfg: ConfigArgs,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Trajectory CSV with columns `t,x1,x2,x3,H,C`.
    input: Option<PathBuf>,
    /// SVG output path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    cfg: ConfigArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub b: Params,
    pub x0: State,
    pub t_end: f64,
    pub integrator: IntegratorSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureConfig {
    pub b: Params,
    pub realizations: usize,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendulumConfig {
    pub b: Params,
    pub x0: State,
    pub t_end: f64,
    pub integrator: IntegratorSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub eps: f64,
    pub t_end: f64,
    pub directions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriaConfig {
    pub b: Params,
    pub m: Vec<f64>,
    pub probe: Option<ProbeConfig>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlRunConfig {
    pub control: ControlConfig,
    pub x0: G4State,
    pub z0: Costate,
    pub t_end: f64,
    pub integrator: IntegratorSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotConfig {
    pub input: PathBuf,
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

/// Entry point of the `mbtop` binary.
pub fn main() -> i32 {
    run(std::env::args_os())
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Simulate(a) => {
            let Some(cfg) = resolve(&a.cfg, || simulate_config(&a))? else {
                return Ok(());
            };
            warn_ill_conditioned(&cfg.b);
            let traj = run_simulate(&cfg)?;
            let drift = drift_report(&traj)?;
            eprintln!("max |H - H(0)| = {:e}, max |C - C(0)| = {:e}", drift.dh_max, drift.dc_max);
            emit(a.out.as_deref(), &trajectory_csv(&traj))
        }
        Command::VerifyStructure(a) => {
            let Some(cfg) = resolve(&a.cfg, || {
                Ok(StructureConfig {
                    b: model_params(&a.model)?,
                    realizations: a.realizations,
                    samples: a.samples,
                    seed: resolve_seed(a.seed)?,
                })
            })?
            else {
                return Ok(());
            };
            warn_ill_conditioned(&cfg.b);
            emit(a.out.as_deref(), &structure_json(&cfg)?)
        }
        Command::ReducePendulum(a) => {
            let Some(cfg) = resolve(&a.cfg, || {
                Ok(PendulumConfig {
                    b: model_params(&a.model)?,
                    x0: required_state(a.x0.as_deref())?,
                    t_end: a.t_end,
                    integrator: integrator_spec(&a.integrator)?,
                })
            })?
            else {
                return Ok(());
            };
            warn_ill_conditioned(&cfg.b);
            let check = run_pendulum(&cfg)?;
            eprintln!(
                "max discrepancy = {:e}, max level residual = {:e}",
                check.max_discrepancy, check.max_level_residual
            );
            if let Some(path) = a.report.as_deref() {
                emit(Some(path), &pendulum_json(&cfg, &check)?)?;
            }
            emit(a.out.as_deref(), &pendulum_csv(&check))
        }
        Command::AnalyzeEquilibria(a) => {
            let Some(cfg) = resolve(&a.cfg, || {
                Ok(EquilibriaConfig {
                    b: model_params(&a.model)?,
                    m: parse_list(&a.m, None, "--m")?,
                    probe: (!a.no_probe).then_some(ProbeConfig {
                        eps: a.eps,
                        t_end: a.probe_t_end,
                        directions: a.directions,
                    }),
                    seed: resolve_seed(a.seed)?,
                })
            })?
            else {
                return Ok(());
            };
            warn_ill_conditioned(&cfg.b);
            emit(a.out.as_deref(), &equilibria_json(&cfg)?)
        }
        Command::ControlG4(a) => {
            let Some(cfg) = resolve(&a.cfg, || control_config(&a))? else {
                return Ok(());
            };
            let rec = run_control(&cfg)?;
            if let Some(path) = a.out.as_deref() {
                emit(Some(path), &control_csv(&rec))?;
            }
            emit(a.report.as_deref(), &control_json(&cfg, &rec)?)
        }
        Command::Plot(a) => {
            let Some(cfg) = resolve(&a.cfg, || {
                let input = a.input.clone().ok_or_else(|| Error::InvalidInput("plot needs an input CSV".into()))?;
                Ok(PlotConfig { input })
            })?
            else {
                return Ok(());
            };
            let text = std::fs::read_to_string(&cfg.input)
                .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", cfg.input.display())))?;
            emit(a.out.as_deref(), &render_plot(&text)?)
        }
    }
}

/// Loads the config from `--config` or builds it from flags, then handles
/// `--dump-config`. `None` means the command is finished.
fn resolve<C>(args: &ConfigArgs, from_flags: impl FnOnce() -> Result<C>) -> Result<Option<C>>
where
    C: Serialize + DeserializeOwned,
{
    let cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::InvalidInput(format!("bad config {}: {e}", path.display())))?
        }
        None => from_flags()?,
    };
    if args.dump_config {
        println!("{}", to_json(&cfg)?);
        return Ok(None);
    }
    Ok(Some(cfg))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::InvalidInput(format!("serialization failed: {e}")))
}

fn emit(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, content).map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", p.display())))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Error::InvalidInput(format!("cannot write to stdout: {e}")))
        }
    }
}

fn warn_ill_conditioned(b: &Params) {
    if b.is_ill_conditioned() {
        eprintln!("warning: some |b_i| < 1e-9; the ratios b2/b3 and b3/b1 are ill-conditioned ({b})");
    }
}

/// Parses a comma-separated list of floats, optionally of a fixed length.
pub fn parse_list(s: &str, len: Option<usize>, what: &str) -> Result<Vec<f64>> {
    let values = s
        .split(',')
        .map(|v| {
            v.trim().parse::<f64>().map_err(|_| Error::InvalidInput(format!("{what}: `{}` is not a number", v.trim())))
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(n) = len {
        if values.len() != n {
            return Err(Error::InvalidInput(format!("{what} needs {n} comma-separated values, got {}", values.len())));
        }
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("{what} must be finite")));
    }
    Ok(values)
}

fn model_params(m: &ModelArgs) -> Result<Params> {
    match (&m.preset, &m.b) {
        (Some(name), _) => preset(name),
        (None, Some(b)) => {
            let v = parse_list(b, Some(3), "--b")?;
            Params::new(v[0], v[1], v[2])
        }
        (None, None) => Err(Error::InvalidInput("give either --preset or --b".into())),
    }
}

fn required_state(x0: Option<&str>) -> Result<State> {
    let s = x0.ok_or_else(|| Error::InvalidInput("missing --x0".into()))?;
    let v = parse_list(s, Some(3), "--x0")?;
    State::checked(v[0], v[1], v[2])
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("{SEED_ENV} must be an unsigned integer, got `{v}`"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn integrator_spec(a: &IntegratorArgs) -> Result<IntegratorSpec> {
    let spec = IntegratorSpec {
        method: a.method.parse::<Method>()?,
        step: a.step,
        rtol: a.rtol,
        atol: a.atol,
        sampling: a.dt.map_or(Sampling::Steps, Sampling::Every),
        ..IntegratorSpec::default()
    };
    spec.validate()?;
    Ok(spec)
}

fn simulate_config(a: &SimulateArgs) -> Result<SimulateConfig> {
    Ok(SimulateConfig {
        b: model_params(&a.model)?,
        x0: required_state(a.x0.as_deref())?,
        t_end: a.t_end,
        integrator: integrator_spec(&a.integrator)?,
    })
}

fn control_config(a: &ControlArgs) -> Result<ControlRunConfig> {
    let control = ControlConfig::new(a.c1, a.c2, a.k, a.t_f)?;
    let x = parse_list(&a.x0, Some(4), "--x0")?;
    let z = parse_list(a.z0.as_deref().ok_or_else(|| Error::InvalidInput("missing --z0".into()))?, None, "--z0")?;
    let z0 = match z.as_slice() {
        [z1, z2, z3] => Costate::new(*z1, *z2, *z3, a.k),
        [z1, z2, z3, z4] => Costate::new(*z1, *z2, *z3, *z4),
        _ => return Err(Error::InvalidInput("--z0 needs 3 or 4 comma-separated values".into())),
    };
    Ok(ControlRunConfig {
        control,
        x0: G4State::new(x[0], x[1], x[2], x[3]),
        z0,
        t_end: a.t_end.unwrap_or(a.t_f),
        integrator: integrator_spec(&a.integrator)?,
    })
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_row(out: &mut String, values: &[f64]) {
    let row: Vec<String> = values.iter().map(|v| fmt_f64(*v)).collect();
    out.push_str(&row.join(","));
    out.push('\n');
}

pub fn run_simulate(cfg: &SimulateConfig) -> Result<Trajectory> {
    cfg.integrator.validate()?;
    integrate(&cfg.b, &cfg.x0, cfg.t_end, &cfg.integrator)
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = TRAJECTORY_HEADER.join(",") + "\n";
    for i in 0..traj.len() {
        let x = traj.states[i];
        csv_row(&mut out, &[traj.times[i], x.x1, x.x2, x.x3, traj.h_series[i], traj.c_series[i]]);
    }
    out
}

pub fn structure_json(cfg: &StructureConfig) -> Result<String> {
    let report = verify_structure(&cfg.b, cfg.realizations, cfg.samples, cfg.seed)?;
    to_json(&json!({ "schema": SCHEMA, "config": cfg, "report": report }))
}

pub fn run_pendulum(cfg: &PendulumConfig) -> Result<ReductionCheck> {
    let ctx = make_context(&cfg.b)?;
    verify_reduction(&ctx, &cfg.x0, cfg.t_end, &cfg.integrator)
}

pub fn pendulum_csv(check: &ReductionCheck) -> String {
    let mut out = PENDULUM_HEADER.join(",") + "\n";
    for s in &check.samples {
        csv_row(&mut out, &[s.t, s.theta, s.theta_dot, s.direct.x1, s.direct.x2, s.direct.x3, s.residual]);
    }
    out
}

pub fn pendulum_json(cfg: &PendulumConfig, check: &ReductionCheck) -> Result<String> {
    to_json(&json!({
        "schema": SCHEMA,
        "config": cfg,
        "level": check.level,
        "max_discrepancy": check.max_discrepancy,
        "max_level_residual": check.max_level_residual,
        "energy_drift": check.energy_drift,
    }))
}

pub fn equilibria_json(cfg: &EquilibriaConfig) -> Result<String> {
    let mut targets = vec![Equilibrium::ORIGIN];
    for &m in &cfg.m {
        targets.push(Equilibrium::e1(m)?);
        targets.push(Equilibrium::e3(m)?);
    }
    let mut reports = Vec::with_capacity(targets.len());
    for (i, e) in targets.iter().enumerate() {
        let report = nonlinear_classify(&cfg.b, e);
        let probe = match cfg.probe {
            Some(p) => {
                Some(perturbation_probe(&cfg.b, e, p.eps, p.t_end, p.directions, cfg.seed.wrapping_add(i as u64))?)
            }
            None => None,
        };
        reports.push(json!({ "report": report, "probe": probe }));
    }
    to_json(&json!({
        "schema": SCHEMA,
        "config": cfg,
        "families": equilibria(&cfg.b),
        "equilibria": reports,
    }))
}

pub fn run_control(cfg: &ControlRunConfig) -> Result<Reconstruction> {
    reconstruct(&cfg.control, &cfg.x0, &cfg.z0, cfg.t_end, &cfg.integrator)
}

pub fn control_csv(rec: &Reconstruction) -> String {
    let mut out = CONTROL_HEADER.join(",") + "\n";
    for i in 0..rec.times.len() {
        let (x, z, (u1, u2)) = (rec.g4[i], rec.costate[i], rec.controls[i]);
        csv_row(&mut out, &[rec.times[i], x.x1, x.x2, x.x3, x.x4, z.z1, z.z2, z.z3, u1, u2]);
    }
    out
}

pub fn control_json(cfg: &ControlRunConfig, rec: &Reconstruction) -> Result<String> {
    to_json(&json!({
        "schema": SCHEMA,
        "config": cfg,
        "cost": rec.cost,
        "residual": rec.residual,
        "unipotent_residual": rec.unipotent_residual,
        "drift": { "z4": rec.z4_drift, "H": rec.h_drift, "C": rec.c_drift },
    }))
}

/// Rows of a trajectory CSV, validated against [`TRAJECTORY_HEADER`].
pub fn read_trajectory_csv(text: &str) -> Result<Vec<[f64; 6]>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::MalformedInput(format!("cannot read header: {e}")))?.clone();
    let columns = TRAJECTORY_HEADER
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h.trim() == *name)
                .ok_or_else(|| Error::MalformedInput(format!("missing column `{name}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::MalformedInput(format!("row {}: {e}", line + 1)))?;
        let mut row = [0.0; 6];
        for (slot, &col) in row.iter_mut().zip(&columns) {
            let field = record.get(col).unwrap_or("");
            *slot = field
                .trim()
                .parse()
                .map_err(|_| Error::MalformedInput(format!("row {}: `{field}` is not a number", line + 1)))?;
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    Ok(rows)
}

const PANEL: f64 = 260.0;
const MARGIN: f64 = 40.0;

struct Panel<'a> {
    title: &'a str,
    x_label: &'a str,
    y_label: &'a str,
    points: Vec<(f64, f64)>,
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi - lo > 1e-300 {
        (lo, hi)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}

fn draw_panel(svg: &mut String, panel: &Panel<'_>, ox: f64, oy: f64) {
    let (x_lo, x_hi) = range(panel.points.iter().map(|p| p.0));
    let (y_lo, y_hi) = range(panel.points.iter().map(|p| p.1));
    let sx = |x: f64| ox + (x - x_lo) / (x_hi - x_lo) * PANEL;
    let sy = |y: f64| oy + PANEL - (y - y_lo) / (y_hi - y_lo) * PANEL;
    let _ = writeln!(
        svg,
        r##"<rect x="{ox:.2}" y="{oy:.2}" width="{PANEL}" height="{PANEL}" fill="none" stroke="#888"/>"##
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{}</text>"#,
        ox + PANEL / 2.0,
        oy - 8.0,
        panel.title
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"#,
        ox + PANEL / 2.0,
        oy + PANEL + 16.0,
        panel.x_label
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="11" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
        ox - 10.0,
        oy + PANEL / 2.0,
        ox - 10.0,
        oy + PANEL / 2.0,
        panel.y_label
    );
    for (value, y) in [(y_lo, oy + PANEL), (y_hi, oy + 10.0)] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{y:.2}" font-size="9" text-anchor="start">{value:.3e}</text>"#,
            ox + 3.0
        );
    }
    let mut pts: Vec<(f64, f64)> = panel.points.iter().map(|&(x, y)| (sx(x), sy(y))).collect();
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 0.01 && (a.1 - b.1).abs() < 0.01);
    if pts.len() == 1 {
        let _ = writeln!(svg, r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#1f4e9c"/>"##, pts[0].0, pts[0].1);
    } else {
        let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ =
            writeln!(svg, r##"<polyline points="{}" fill="none" stroke="#1f4e9c" stroke-width="1"/>"##, path.join(" "));
    }
}

/// SVG with the three coordinate-plane projections and the drift of `H`
/// and `C` relative to their initial values.
pub fn render_plot(csv_text: &str) -> Result<String> {
    let rows = read_trajectory_csv(csv_text)?;
    let (h0, c0) = (rows[0][4], rows[0][5]);
    let proj = |i: usize, j: usize| rows.iter().map(|r| (r[i], r[j])).collect::<Vec<_>>();
    let panels = [
        Panel { title: "(x1, x2)", x_label: "x1", y_label: "x2", points: proj(1, 2) },
        Panel { title: "(x1, x3)", x_label: "x1", y_label: "x3", points: proj(1, 3) },
        Panel { title: "(x2, x3)", x_label: "x2", y_label: "x3", points: proj(2, 3) },
        Panel {
            title: "H(t) - H(0)",
            x_label: "t",
            y_label: "dH",
            points: rows.iter().map(|r| (r[0], r[4] - h0)).collect(),
        },
        Panel {
            title: "C(t) - C(0)",
            x_label: "t",
            y_label: "dC",
            points: rows.iter().map(|r| (r[0], r[5] - c0)).collect(),
        },
    ];
    let cell = PANEL + 2.0 * MARGIN;
    let (width, height) = (3.0 * cell, 2.0 * cell);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (n, panel) in panels.iter().enumerate() {
        let (col, row) = (n % 3, n / 3);
        draw_panel(&mut svg, panel, col as f64 * cell + MARGIN, row as f64 * cell + MARGIN);
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
