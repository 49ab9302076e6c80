//! Command-line front end: `scenario`, `qgt-check` and `sweep`.
//!
//! Exit codes: 0 success, 1 usage or runtime error, 2 physics assertion failure.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::dynamics::EngineConfig;
use crate::error::{Error, Result};
use crate::experiments::{
    self, OmegaConvention, Scenario, ScenarioSpec, SweepParameter, Units, METRIC_CHECK_TOL,
};
use crate::geometry::DEFAULT_FD_STEP;
use crate::model::{ControlPoint, Family, QubitFamily, QutritFamily, ShiftedOscillatorFamily, SqueezedOscillatorFamily};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_PHYSICS: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "geoqsl", version, about = "Geometric speed-limit experiments for ground-state preparation")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for sweeps and grid checks.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario and write its report and trajectory.
    Scenario(ScenarioArgs),
    /// Compare finite-difference and closed-form metrics on a grid.
    QgtCheck(QgtArgs),
    /// Run a scenario over a range of one parameter.
    Sweep(SweepArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    HoLinear,
    QubitCircle,
    SqueezedCircle,
    QutritLinear,
}

/// `T` given explicitly or found by the hold-time solver.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HoldSetting {
    Value(f64),
    Keyword(AutoKeyword),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AutoKeyword {
    #[serde(rename = "auto")]
    Auto,
}

impl HoldSetting {
    fn value(self) -> Option<f64> {
        match self {
            HoldSetting::Value(t) => Some(t),
            HoldSetting::Keyword(_) => None,
        }
    }
}

impl FromStr for HoldSetting {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(HoldSetting::Keyword(AutoKeyword::Auto));
        }
        s.parse().map(HoldSetting::Value).map_err(|_| format!("expected a number or 'auto', got '{s}'"))
    }
}

#[derive(Args, Debug, Default, Clone)]
#[command(allow_negative_numbers = true)]
struct ParamArgs {
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long = "s")]
    s: Option<f64>,
    /// Hold time, or `auto`.
    #[arg(long = "T")]
    hold: Option<HoldSetting>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long = "lambda-star")]
    lambda_star: Option<f64>,
    /// Sweep the control geodesic adiabatically over this duration instead.
    #[arg(long = "total-time")]
    total_time: Option<f64>,
    #[arg(long = "omega-convention", value_enum)]
    omega_convention: Option<ConventionArg>,
    #[arg(long, value_enum)]
    units: Option<UnitsArg>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    #[arg(long = "observable-tol")]
    observable_tol: Option<f64>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ConventionArg {
    HalfSplitting,
    Splitting,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum UnitsArg {
    Fs,
    LambdaPlane,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct ScenarioArgs {
    #[arg(value_enum)]
    name: Option<ScenarioName>,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct SweepArgs {
    #[arg(value_enum)]
    name: Option<ScenarioName>,
    /// Parameter to vary.
    #[arg(long, value_enum)]
    parameter: SweepArg,
    /// `START:STOP`, used with `--steps`.
    #[arg(long, conflicts_with = "values")]
    range: Option<String>,
    #[arg(long, requires = "range")]
    steps: Option<usize>,
    /// Explicit comma-separated values.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SweepArg {
    S,
    LambdaStar,
    Theta,
    R,
    TotalTime,
}

impl From<SweepArg> for SweepParameter {
    fn from(a: SweepArg) -> Self {
        match a {
            SweepArg::S => SweepParameter::S,
            SweepArg::LambdaStar => SweepParameter::LambdaStar,
            SweepArg::Theta => SweepParameter::Theta,
            SweepArg::R => SweepParameter::R,
            SweepArg::TotalTime => SweepParameter::TotalTime,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Qubit,
    Qutrit,
    #[value(alias = "coherent")]
    ShiftedOscillator,
    #[value(alias = "squeezed")]
    SqueezedOscillator,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct QgtArgs {
    #[arg(value_enum)]
    family: FamilyArg,
    /// Grid points per axis.
    #[arg(long, default_value_t = 5)]
    points: usize,
    /// `LO:HI` for the first chart coordinate.
    #[arg(long)]
    x_range: Option<String>,
    /// `LO:HI` for the second chart coordinate.
    #[arg(long)]
    y_range: Option<String>,
    #[arg(long, default_value_t = DEFAULT_FD_STEP)]
    step: f64,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
}

/// A run configuration, as read from `--config` or echoed into reports.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub hold: Option<HoldSetting>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_convention: Option<OmegaConvention>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<Units>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engine: Option<EngineConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    fn apply(&mut self, p: &ParamArgs) {
        fn set<T: Copy>(slot: &mut Option<T>, v: Option<T>) {
            if v.is_some() {
                *slot = v;
            }
        }
        set(&mut self.omega, p.omega);
        set(&mut self.theta, p.theta);
        set(&mut self.s, p.s);
        set(&mut self.hold, p.hold);
        set(&mut self.r, p.r);
        set(&mut self.a, p.a);
        set(&mut self.lambda_star, p.lambda_star);
        set(&mut self.total_time, p.total_time);
        set(
            &mut self.omega_convention,
            p.omega_convention.map(|c| match c {
                ConventionArg::HalfSplitting => OmegaConvention::HalfSplitting,
                ConventionArg::Splitting => OmegaConvention::Splitting,
            }),
        );
        set(
            &mut self.units,
            p.units.map(|u| match u {
                UnitsArg::Fs => Units::Fs,
                UnitsArg::LambdaPlane => Units::LambdaPlane,
            }),
        );
        if p.rtol.is_some() || p.atol.is_some() || p.observable_tol.is_some() {
            let e = self.engine.get_or_insert_with(EngineConfig::default);
            if let Some(v) = p.rtol {
                e.rtol = v;
            }
            if let Some(v) = p.atol {
                e.atol = v;
            }
            if let Some(v) = p.observable_tol {
                e.observable_tol = v;
            }
        }
    }

    /// Fill scenario defaults and reject parameters the scenario does not use.
    pub fn resolve(&self) -> Result<(RunConfig, ScenarioSpec)> {
        let name = self
            .scenario
            .ok_or_else(|| Error::InvalidParameter("no scenario given (argument or config key 'scenario')".into()))?;
        let unused = |keys: &[(&str, bool)]| -> Result<()> {
            match keys.iter().find(|(_, present)| *present) {
                Some((k, _)) => Err(Error::InvalidParameter(format!("parameter '{k}' does not apply to this scenario"))),
                None => Ok(()),
            }
        };
        let mut c = self.clone();
        let scenario = match name {
            ScenarioName::HoLinear => {
                unused(&[
                    ("theta", c.theta.is_some()),
                    ("s", c.s.is_some()),
                    ("T", c.hold.is_some()),
                    ("r", c.r.is_some()),
                    ("a", c.a.is_some()),
                    ("lambda_star", c.lambda_star.is_some()),
                    ("omega_convention", c.omega_convention.is_some()),
                ])?;
                Scenario::HoLinear { omega: *c.omega.get_or_insert(1.0) }
            }
            ScenarioName::QubitCircle => {
                unused(&[("r", c.r.is_some()), ("a", c.a.is_some()), ("lambda_star", c.lambda_star.is_some())])?;
                Scenario::QubitCircle {
                    theta: *c.theta.get_or_insert(PI / 4.0),
                    omega: *c.omega.get_or_insert(-0.5),
                    s: *c.s.get_or_insert(0.4),
                    hold: c.hold.get_or_insert(HoldSetting::Keyword(AutoKeyword::Auto)).value(),
                    omega_convention: *c.omega_convention.get_or_insert(OmegaConvention::HalfSplitting),
                }
            }
            ScenarioName::SqueezedCircle => {
                unused(&[
                    ("theta", c.theta.is_some()),
                    ("a", c.a.is_some()),
                    ("lambda_star", c.lambda_star.is_some()),
                    ("omega_convention", c.omega_convention.is_some()),
                ])?;
                Scenario::SqueezedCircle {
                    r: *c.r.get_or_insert(2.0),
                    omega: *c.omega.get_or_insert(2.0 * PI),
                    s: *c.s.get_or_insert(3e-3),
                    hold: c.hold.get_or_insert(HoldSetting::Keyword(AutoKeyword::Auto)).value(),
                }
            }
            ScenarioName::QutritLinear => {
                unused(&[
                    ("theta", c.theta.is_some()),
                    ("s", c.s.is_some()),
                    ("T", c.hold.is_some()),
                    ("r", c.r.is_some()),
                    ("omega_convention", c.omega_convention.is_some()),
                ])?;
                Scenario::QutritLinear {
                    omega: *c.omega.get_or_insert(2.0),
                    a: *c.a.get_or_insert(1.0),
                    lambda_star: *c.lambda_star.get_or_insert(1.0),
                }
            }
        };
        let spec = ScenarioSpec {
            scenario,
            total_time: c.total_time,
            units: *c.units.get_or_insert(Units::Fs),
            engine: c.engine.get_or_insert_with(EngineConfig::default).clone(),
        };
        Ok((c, spec))
    }
}

/// Parse `args`, run, and map the outcome to an exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

/// Entry point of the `geoqsl` binary.
pub fn main() -> ExitCode {
    let env = env_logger::Env::new().filter_or("GEOQSL_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).try_init();
    ExitCode::from(run(std::env::args_os()))
}

struct Globals {
    out: PathBuf,
    format: Option<Format>,
    jobs: Option<usize>,
}

fn dispatch(cli: Cli) -> Result<u8> {
    let mut file = match &cli.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if cli.out.is_some() {
        file.out = cli.out.clone();
    }
    if cli.format.is_some() {
        file.format = cli.format;
    }
    if cli.jobs.is_some() {
        file.jobs = cli.jobs;
    }
    if file.jobs == Some(0) {
        return Err(Error::InvalidParameter("--jobs must be at least 1".into()));
    }
    let globals = Globals { out: file.out.clone().unwrap_or_else(|| PathBuf::from(".")), format: file.format, jobs: file.jobs };
    match cli.command {
        Command::Scenario(args) => {
            if args.name.is_some() {
                file.scenario = args.name;
            }
            file.apply(&args.params);
            cmd_scenario(&file, &globals)
        }
        Command::Sweep(args) => {
            if args.name.is_some() {
                file.scenario = args.name;
            }
            file.apply(&args.params);
            cmd_sweep(&file, &args, &globals)
        }
        Command::QgtCheck(args) => cmd_qgt_check(&args, &globals),
    }
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

// configuration echoed into reports: resolved values, no output location
fn echo(config: &RunConfig) -> Result<serde_json::Value> {
    let mut c = config.clone();
    c.out = None;
    c.jobs = None;
    Ok(serde_json::to_value(c)?)
}

fn report_physics(failures: &[String]) -> u8 {
    for f in failures {
        eprintln!("physics assertion failed: {f}");
    }
    if failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_PHYSICS
    }
}

fn cmd_scenario(config: &RunConfig, g: &Globals) -> Result<u8> {
    let (resolved, spec) = config.resolve()?;
    let run = experiments::run_scenario(&spec)?;
    let mut report = run.report;
    report.config = Some(echo(&resolved)?);
    let name = spec.scenario.name();
    fs::create_dir_all(&g.out)?;
    let report_path = match g.format.unwrap_or(Format::Json) {
        Format::Json => {
            let p = g.out.join(format!("{name}.json"));
            fs::write(&p, report.to_json()? + "\n")?;
            p
        }
        Format::Csv => {
            let p = g.out.join(format!("{name}.csv"));
            let text = format!(
                "{}\n{}\n",
                experiments::report_csv_header().join(","),
                experiments::report_csv_fields(&report).join(",")
            );
            fs::write(&p, text)?;
            p
        }
    };
    let traj_path = g.out.join(format!("{name}_trajectory.csv"));
    let mut w = std::io::BufWriter::new(fs::File::create(&traj_path)?);
    run.trajectory.write_csv(&mut w)?;
    std::io::Write::flush(&mut w)?;
    println!(
        "{name}: l_E = {:.6}, l_g_control = {:.6}, d_lower = {:.6}, violated = {}, modified holds = {}",
        report.l_e, report.l_g_control, report.d_lower, report.original_conjecture_violated, report.modified_inequality_holds
    );
    println!("wrote {} and {}", report_path.display(), traj_path.display());
    Ok(report_physics(&report.assertion_failures()))
}

fn parse_range(text: &str) -> Result<(f64, f64)> {
    let bad = || Error::InvalidParameter(format!("range '{text}' must look like START:STOP"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(bad());
    }
    Ok((a, b))
}

fn cmd_sweep(config: &RunConfig, args: &SweepArgs, g: &Globals) -> Result<u8> {
    let values = match (&args.values, &args.range) {
        (Some(v), _) => v.clone(),
        (None, Some(r)) => {
            let (a, b) = parse_range(r)?;
            experiments::linspace(a, b, args.steps.unwrap_or(0))?
        }
        (None, None) => return Err(Error::InvalidParameter("give --range with --steps, or --values".into())),
    };
    if values.is_empty() {
        return Err(Error::InvalidParameter("empty sweep range".into()));
    }
    let (resolved, spec) = config.resolve()?;
    let parameter = SweepParameter::from(args.parameter);
    let rows = with_pool(g.jobs, || experiments::sweep(&spec, parameter, &values))??;
    fs::create_dir_all(&g.out)?;
    let stem = format!("sweep_{}_{}", spec.scenario.name(), parameter.name());
    let path = match g.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let p = g.out.join(format!("{stem}.csv"));
            let mut w = std::io::BufWriter::new(fs::File::create(&p)?);
            experiments::write_sweep_csv(parameter, &rows, &mut w)?;
            std::io::Write::flush(&mut w)?;
            p
        }
        Format::Json => {
            let p = g.out.join(format!("{stem}.json"));
            let body = serde_json::json!({
                "parameter": parameter.name(),
                "config": echo(&resolved)?,
                "rows": rows.iter().map(|r| serde_json::json!({"value": r.value, "report": r.report})).collect::<Vec<_>>(),
            });
            fs::write(&p, serde_json::to_string_pretty(&body)? + "\n")?;
            p
        }
    };
    println!("{} rows written to {}", rows.len(), path.display());
    let failures: Vec<String> = rows
        .iter()
        .flat_map(|r| r.report.assertion_failures().into_iter().map(move |f| format!("{} = {}: {f}", parameter.name(), r.value)))
        .collect();
    Ok(report_physics(&failures))
}

fn cmd_qgt_check(args: &QgtArgs, g: &Globals) -> Result<u8> {
    if args.points == 0 {
        return Err(Error::InvalidParameter("--points must be at least 1".into()));
    }
    let (family, default_x, default_y): (Family, (f64, f64), Option<(f64, f64)>) = match args.family {
        FamilyArg::Qubit => {
            no_param(args.a, "a")?;
            (QubitFamily::new(args.omega.unwrap_or(1.0), PI / 4.0)?.into(), (0.0, PI), Some((0.0, 2.0 * PI)))
        }
        FamilyArg::Qutrit => (QutritFamily::new(args.omega.unwrap_or(2.0), args.a.unwrap_or(1.0))?.into(), (-3.0, 3.0), None),
        FamilyArg::ShiftedOscillator => {
            no_param(args.a, "a")?;
            (ShiftedOscillatorFamily::new(args.omega.unwrap_or(1.0))?.into(), (-2.0, 2.0), Some((-2.0, 2.0)))
        }
        FamilyArg::SqueezedOscillator => {
            no_param(args.a, "a")?;
            (SqueezedOscillatorFamily::new(args.omega.unwrap_or(1.0))?.into(), (0.0, 2.0), Some((0.0, 2.0 * PI)))
        }
    };
    let xr = args.x_range.as_deref().map(parse_range).transpose()?.unwrap_or(default_x);
    let yr = match (default_y, args.y_range.as_deref()) {
        (None, Some(_)) => return Err(Error::InvalidParameter("this family has a single control coordinate".into())),
        (None, None) => None,
        (Some(d), y) => Some(y.map(parse_range).transpose()?.unwrap_or(d)),
    };
    let xs = experiments::linspace(xr.0, xr.1, args.points)?;
    let points: Vec<ControlPoint> = match yr {
        None => xs.iter().map(|x| (*x).into()).collect(),
        Some(yr) => {
            let ys = experiments::linspace(yr.0, yr.1, args.points)?;
            xs.iter().flat_map(|x| ys.iter().map(move |y| ControlPoint::from([*x, *y]))).collect()
        }
    };
    for p in &points {
        family.validate(p)?;
    }
    let rows = with_pool(g.jobs, || experiments::metric_check(&family, &points, args.step))??;
    fs::create_dir_all(&g.out)?;
    let name = format!("{:?}", args.family).to_lowercase();
    let path = match g.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let p = g.out.join(format!("qgt_{name}.csv"));
            let mut w = std::io::BufWriter::new(fs::File::create(&p)?);
            experiments::write_metric_csv(&rows, &mut w)?;
            std::io::Write::flush(&mut w)?;
            p
        }
        Format::Json => {
            let p = g.out.join(format!("qgt_{name}.json"));
            fs::write(&p, serde_json::to_string_pretty(&rows)? + "\n")?;
            p
        }
    };
    let worst = rows.iter().filter_map(|r| r.deviation).fold(0.0, f64::max);
    let skipped = rows.iter().filter(|r| r.deviation.is_none()).count();
    println!(
        "{} points, max deviation {worst:.3e}, {skipped} skipped; wrote {}",
        rows.len(),
        path.display()
    );
    let failures: Vec<String> = rows
        .iter()
        .filter(|r| r.deviation.is_some_and(|d| d > METRIC_CHECK_TOL))
        .map(|r| format!("metric deviation {:.3e} at {:?}", r.deviation.unwrap_or(0.0), r.point))
        .collect();
    Ok(report_physics(&failures))
}

fn no_param(v: Option<f64>, name: &str) -> Result<()> {
    match v {
        Some(_) => Err(Error::InvalidParameter(format!("parameter '{name}' does not apply to this family"))),
        None => Ok(()),
    }
}
