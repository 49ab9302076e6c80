//! The four counterexample scenarios, their length reports, the qutrit
//! analytics and parameter sweeps.

use std::f64::consts::{PI, SQRT_2};
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, csv_float, EngineConfig, Trajectory, TrajectoryStates};
use crate::error::{Error, Result};
use crate::geometry::{self, MetricSource};
use crate::linalg;
use crate::model::{
    fock, ControlPoint, DenseHamiltonian, Family, QubitFamily, QutritFamily, ShiftedOscillatorFamily,
    SqueezedOscillatorFamily, C64, DEGENERACY_TOL,
};
use crate::protocols::{self, ControlCurve, HoldTimeProblem, Protocol, RampSpec};

/// Absolute tolerance on length comparisons.
pub const LENGTH_TOL: f64 = 1e-6;
/// `|l_E − d|` below this counts as saturating the bound.
pub const SATURATION_TOL: f64 = 1e-4;
/// Squeezed initial and target angles.
pub const SQUEEZED_INITIAL_ANGLE: f64 = 4.0 * PI / 3.0;
pub const SQUEEZED_TARGET_ANGLE: f64 = 2.0 * PI / 3.0;

const ORACLE_TAIL: f64 = 1e-14;
const ORACLE_MARGIN: usize = 16;
const MIRROR_SAMPLES: usize = 100;
const GAP_SAMPLES: usize = 257;
const CRITICAL_WIDTH: f64 = 1e-4;

/// Length units of the coherent-family reports.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Units {
    /// Fubini–Study units.
    #[default]
    Fs,
    /// Euclidean length in the `(λ_q, λ_p)` plane, `√2 ×` Fubini–Study.
    LambdaPlane,
}

/// How the qubit `ω` enters `Ĥ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OmegaConvention {
    /// `ω` is half the level splitting: `Ĥ = −ω n·σ`.
    #[default]
    HalfSplitting,
    /// `ω` is the level splitting: `Ĥ = −(ω/2) n·σ`.
    Splitting,
}

impl OmegaConvention {
    /// The `ω` of [`QubitFamily`] that realizes this reading.
    pub fn family_omega(self, omega: f64) -> f64 {
        match self {
            OmegaConvention::HalfSplitting => 2.0 * omega,
            OmegaConvention::Splitting => omega,
        }
    }
}

/// Family parameters of a scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Scenario {
    /// Shifted oscillator driven along the semicircle from `(0,0)` to `(2,0)`.
    HoLinear { omega: f64 },
    /// Qubit on `Λ_θ` from `φ = 0` to `φ = π`; `T = None` finds the hold time.
    QubitCircle {
        theta: f64,
        omega: f64,
        s: f64,
        #[serde(rename = "T", default)]
        hold: Option<f64>,
        #[serde(default)]
        omega_convention: OmegaConvention,
    },
    /// Squeezed vacuum on `Λ_r` from `θ = 4π/3` to `θ = 2π/3`.
    SqueezedCircle {
        r: f64,
        omega: f64,
        s: f64,
        #[serde(rename = "T", default)]
        hold: Option<f64>,
    },
    /// Qutrit from `λ = −λ*` to `λ = λ*` under the static protocol.
    QutritLinear { omega: f64, a: f64, lambda_star: f64 },
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::HoLinear { .. } => "ho-linear",
            Scenario::QubitCircle { .. } => "qubit-circle",
            Scenario::SqueezedCircle { .. } => "squeezed-circle",
            Scenario::QutritLinear { .. } => "qutrit-linear",
        }
    }

    pub fn family(&self) -> Result<Family> {
        Ok(match *self {
            Scenario::HoLinear { omega } => ShiftedOscillatorFamily::new(omega)?.into(),
            Scenario::QubitCircle { theta, omega, omega_convention, .. } => {
                QubitFamily::new(omega_convention.family_omega(omega), theta)?.into()
            }
            Scenario::SqueezedCircle { omega, .. } => SqueezedOscillatorFamily::new(omega)?.into(),
            Scenario::QutritLinear { omega, a, .. } => QutritFamily::new(omega, a)?.into(),
        })
    }

    /// Initial and target control points.
    pub fn endpoints(&self) -> (ControlPoint, ControlPoint) {
        match *self {
            Scenario::HoLinear { .. } => ([0.0, 0.0].into(), [2.0, 0.0].into()),
            Scenario::QubitCircle { theta, .. } => ([theta, 0.0].into(), [theta, PI].into()),
            Scenario::SqueezedCircle { r, .. } => {
                ([r, SQUEEZED_INITIAL_ANGLE].into(), [r, SQUEEZED_TARGET_ANGLE].into())
            }
            Scenario::QutritLinear { lambda_star, .. } => ((-lambda_star).into(), lambda_star.into()),
        }
    }

    /// Shortest path between the endpoints inside the control space.
    pub fn control_geodesic(&self) -> ControlCurve {
        match *self {
            Scenario::HoLinear { .. } => ControlCurve::Circle { center: [1.0, 0.0], radius: 1.0, from: PI, to: 2.0 * PI },
            Scenario::QubitCircle { theta, .. } => ControlCurve::Arc { fixed: theta, from: 0.0, to: PI },
            Scenario::SqueezedCircle { r, .. } => {
                ControlCurve::Arc { fixed: r, from: SQUEEZED_INITIAL_ANGLE, to: SQUEEZED_TARGET_ANGLE }
            }
            Scenario::QutritLinear { lambda_star, .. } => {
                ControlCurve::Line { from: vec![-lambda_star], to: vec![lambda_star] }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name}={v} must be finite")))
            }
        };
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name}={v} must be > 0")))
            }
        };
        let hold_ok = |hold: Option<f64>| hold.map_or(Ok(()), |t| positive("T", t));
        match *self {
            Scenario::HoLinear { omega } => positive("omega", omega),
            Scenario::QubitCircle { theta, omega, s, hold, .. } => {
                if !(theta > 0.0 && theta < PI) {
                    return Err(Error::InvalidParameter(format!("theta={theta} must lie in (0, pi)")));
                }
                finite("omega", omega)?;
                if omega == 0.0 {
                    return Err(Error::Degenerate { gap: 0.0 });
                }
                positive("s", s)?;
                hold_ok(hold)
            }
            Scenario::SqueezedCircle { r, omega, s, hold } => {
                positive("r", r)?;
                positive("omega", omega)?;
                positive("s", s)?;
                hold_ok(hold)
            }
            Scenario::QutritLinear { omega, a, lambda_star } => {
                positive("omega", omega)?;
                finite("a", a)?;
                finite("lambda_star", lambda_star)?;
                if lambda_star < 0.0 {
                    return Err(Error::InvalidParameter(format!("lambda_star={lambda_star} must be >= 0")));
                }
                Ok(())
            }
        }
    }
}

/// A scenario together with its protocol choice, units and engine settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    /// Replace the scenario's fast protocol by an adiabatic sweep of the
    /// control geodesic lasting this long.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_time: Option<f64>,
    #[serde(default)]
    pub units: Units,
    #[serde(default)]
    pub engine: EngineConfig,
}

impl ScenarioSpec {
    pub fn new(scenario: Scenario) -> Self {
        Self { scenario, total_time: None, units: Units::Fs, engine: EngineConfig::default() }
    }
}

/// Lengths in `(λ_q, λ_p)`-plane units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaPlaneLengths {
    #[serde(rename = "l_E")]
    pub l_e: f64,
    pub l_g_control: f64,
    pub l_g_hamiltonian_path: f64,
    pub d_orbit_manifold: f64,
}

/// Squeezed-scenario extras.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezedDetails {
    /// `π/24 · sinh²(2r)`.
    pub l_g_sinh_squared_formula: f64,
    /// Fubini–Study arc length of the shorter control arc.
    pub l_g_metric_arc: f64,
    /// Independent number-basis check of `l_E` (ramp protocols only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fock_oracle: Option<OracleSummary>,
    /// Largest deviation from `μ(D − t) = (μ_r(t), 2π − μ_θ(t))` (ramp protocols only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mirror_symmetry_error: Option<f64>,
    pub min_mu_r: f64,
    pub max_mu_r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    #[serde(rename = "l_E")]
    pub l_e: f64,
    pub n_max: usize,
    pub final_fidelity: f64,
    /// `|l_E − l_E(oracle)| / l_E(oracle)`.
    pub l_e_relative_discrepancy: f64,
}

/// Verdicts on the original conjecture and the modified inequality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    pub original_conjecture_violated: bool,
    pub modified_inequality_holds: bool,
    pub orbit_bound_holds: bool,
    pub saturated: bool,
}

/// Comparisons with [`LENGTH_TOL`]; saturation is judged against the orbit distance.
pub fn verdicts(l_e: f64, l_g_control: f64, d_lower: f64, d_orbit: f64) -> Verdicts {
    Verdicts {
        original_conjecture_violated: l_e < l_g_control - LENGTH_TOL,
        modified_inequality_holds: l_e >= d_lower - LENGTH_TOL,
        orbit_bound_holds: l_e >= d_orbit - LENGTH_TOL,
        saturated: (l_e - d_orbit).abs() < SATURATION_TOL,
    }
}

pub fn check_inequalities(report: &LengthReport) -> Verdicts {
    verdicts(report.l_e, report.l_g_control, report.d_lower, report.d_orbit_manifold)
}

/// Outcome of one scenario run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthReport {
    pub scenario: String,
    pub units: Units,
    #[serde(rename = "l_E")]
    pub l_e: f64,
    /// Geodesic distance inside the ground-state manifold over the control space.
    pub l_g_control: f64,
    /// Length of the instantaneous ground-state path of the protocol.
    pub l_g_hamiltonian_path: f64,
    /// Whether the protocol's control path joins the initial and target points.
    pub hamiltonian_path_connects: bool,
    /// `arccos |⟨ψ_i|ψ_*⟩|`.
    pub d_lower: f64,
    /// Intrinsic distance inside the manifold reachable by the dynamics.
    pub d_orbit_manifold: f64,
    pub final_fidelity: f64,
    pub original_conjecture_violated: bool,
    pub modified_inequality_holds: bool,
    pub orbit_bound_holds: bool,
    pub saturated: bool,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub hold_time: Option<f64>,
    pub protocol: Protocol,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_plane: Option<LambdaPlaneLengths>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squeezed: Option<SqueezedDetails>,
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

impl LengthReport {
    /// Violated invariants; empty on a healthy run.
    pub fn assertion_failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.modified_inequality_holds {
            out.push(format!("l_E = {} is below d_lower = {}", self.l_e, self.d_lower));
        }
        if !self.orbit_bound_holds {
            out.push(format!("l_E = {} is below d_orbit_manifold = {}", self.l_e, self.d_orbit_manifold));
        }
        if self.hamiltonian_path_connects && self.l_g_hamiltonian_path < self.l_g_control - LENGTH_TOL {
            out.push(format!(
                "Hamiltonian path length {} is shorter than the control geodesic {}",
                self.l_g_hamiltonian_path, self.l_g_control
            ));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// A report with the trajectory it was computed from.
#[derive(Clone, Debug)]
pub struct ScenarioRun {
    pub report: LengthReport,
    pub trajectory: Trajectory,
}

struct Lengths {
    l_e: f64,
    l_g_control: f64,
    l_g_hamiltonian_path: f64,
    connects: bool,
    d_lower: f64,
    d_orbit: f64,
    final_fidelity: f64,
}

fn assemble(
    scenario: &Scenario,
    units: Units,
    lengths: Lengths,
    hold_time: Option<f64>,
    protocol: Protocol,
    notes: Vec<String>,
) -> LengthReport {
    let k = match units {
        Units::Fs => 1.0,
        Units::LambdaPlane => SQRT_2,
    };
    let v = verdicts(lengths.l_e, lengths.l_g_control, lengths.d_lower, lengths.d_orbit);
    let lambda_plane = matches!(scenario, Scenario::HoLinear { .. }).then(|| LambdaPlaneLengths {
        l_e: SQRT_2 * lengths.l_e,
        l_g_control: SQRT_2 * lengths.l_g_control,
        l_g_hamiltonian_path: SQRT_2 * lengths.l_g_hamiltonian_path,
        d_orbit_manifold: SQRT_2 * lengths.d_orbit,
    });
    LengthReport {
        scenario: scenario.name().into(),
        units,
        l_e: k * lengths.l_e,
        l_g_control: k * lengths.l_g_control,
        l_g_hamiltonian_path: k * lengths.l_g_hamiltonian_path,
        hamiltonian_path_connects: lengths.connects,
        d_lower: k * lengths.d_lower,
        d_orbit_manifold: k * lengths.d_orbit,
        final_fidelity: lengths.final_fidelity,
        original_conjecture_violated: v.original_conjecture_violated,
        modified_inequality_holds: v.modified_inequality_holds,
        orbit_bound_holds: v.orbit_bound_holds,
        saturated: v.saturated,
        hold_time,
        protocol,
        lambda_plane,
        squeezed: None,
        notes,
        config: None,
    }
}

/// Run a scenario as described by `spec`.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<ScenarioRun> {
    spec.scenario.validate()?;
    spec.engine.validate()?;
    if spec.units == Units::LambdaPlane && !matches!(spec.scenario, Scenario::HoLinear { .. }) {
        return Err(Error::InvalidParameter("lambda-plane units apply to the ho-linear scenario only".into()));
    }
    if let Some(t) = spec.total_time {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("total_time={t} must be > 0")));
        }
    }
    let cfg = &spec.engine;
    let scenario = &spec.scenario;
    match *scenario {
        Scenario::HoLinear { omega } => {
            let fam = ShiftedOscillatorFamily::new(omega)?;
            let protocol = match spec.total_time {
                None => protocols::ho_semicircle_protocol(omega)?,
                Some(t) => protocols::adiabatic_protocol(&fam.into(), &scenario.control_geodesic(), t)?,
            };
            coherent_run(scenario, fam, protocol, spec.units, cfg)
        }
        Scenario::QubitCircle { theta, s, hold, omega_convention, .. } => {
            let Family::Qubit(fam) = scenario.family()? else { unreachable!() };
            let (protocol, hold_time) = match spec.total_time {
                Some(t) => (protocols::adiabatic_protocol(&fam.into(), &scenario.control_geodesic(), t)?, None),
                None => {
                    let hold = match hold {
                        Some(t) => t,
                        None => protocols::find_hold_time(&HoldTimeProblem::QubitCircle(fam), s, None, cfg)?.hold,
                    };
                    (protocols::qubit_ramp_protocol(theta, RampSpec::new(s, hold)?), Some(hold))
                }
            };
            let mut notes = Vec::new();
            if omega_convention == OmegaConvention::HalfSplitting {
                notes.push(format!(
                    "omega is read as half the level splitting: H = -omega n.sigma (family omega {})",
                    fam.omega
                ));
            }
            let l_g_control = geometry::arc_distance_in_control_circle(&fam.into(), theta, 0.0, PI)?;
            matrix_run(scenario, fam.into(), protocol, hold_time, l_g_control, notes, cfg)
        }
        Scenario::SqueezedCircle { r, s, hold, .. } => {
            let Family::SqueezedOscillator(fam) = scenario.family()? else { unreachable!() };
            squeezed_run(scenario, fam, r, s, hold, spec.total_time, cfg)
        }
        Scenario::QutritLinear { lambda_star, .. } => {
            let Family::Qutrit(fam) = scenario.family()? else { unreachable!() };
            qutrit_gap_check(&fam, lambda_star)?;
            let protocol = match spec.total_time {
                None => protocols::qutrit_static_protocol(fam.omega)?,
                Some(t) => protocols::adiabatic_protocol(&fam.into(), &scenario.control_geodesic(), t)?,
            };
            let mut notes = Vec::new();
            if spec.total_time.is_none() {
                notes.push(
                    "static protocol: lambda(t) = 0 never visits the endpoints, so its Hamiltonian \
                     ground-state path is a single point"
                        .into(),
                );
            }
            let l_g_control = qutrit_l_g(&fam, lambda_star)?;
            matrix_run(scenario, fam.into(), protocol, None, l_g_control, notes, cfg)
        }
    }
}

pub fn run_ho_linear(omega: f64, config: &EngineConfig) -> Result<ScenarioRun> {
    run_scenario(&ScenarioSpec { engine: config.clone(), ..ScenarioSpec::new(Scenario::HoLinear { omega }) })
}

pub fn run_qubit(
    theta: f64,
    omega: f64,
    s: f64,
    hold: Option<f64>,
    omega_convention: OmegaConvention,
    config: &EngineConfig,
) -> Result<ScenarioRun> {
    let scenario = Scenario::QubitCircle { theta, omega, s, hold, omega_convention };
    run_scenario(&ScenarioSpec { engine: config.clone(), ..ScenarioSpec::new(scenario) })
}

pub fn run_squeezed(r: f64, omega: f64, s: f64, hold: Option<f64>, config: &EngineConfig) -> Result<ScenarioRun> {
    let scenario = Scenario::SqueezedCircle { r, omega, s, hold };
    run_scenario(&ScenarioSpec { engine: config.clone(), ..ScenarioSpec::new(scenario) })
}

pub fn run_qutrit(omega: f64, a: f64, lambda_star: f64, config: &EngineConfig) -> Result<ScenarioRun> {
    let scenario = Scenario::QutritLinear { omega, a, lambda_star };
    run_scenario(&ScenarioSpec { engine: config.clone(), ..ScenarioSpec::new(scenario) })
}

fn hamiltonian_path(family: &Family, protocol: &Protocol, target: &ControlPoint) -> Result<(f64, bool)> {
    let end = protocol.at(protocol.duration)?;
    let connects = family.points_equivalent(&end, target, 1e-9);
    Ok((protocol.ground_path_length(family, MetricSource::Analytic)?, connects))
}

fn matrix_run(
    scenario: &Scenario,
    family: Family,
    protocol: Protocol,
    hold_time: Option<f64>,
    l_g_control: f64,
    notes: Vec<String>,
    cfg: &EngineConfig,
) -> Result<ScenarioRun> {
    let (initial, target) = scenario.endpoints();
    let psi0 = family.ground_state(&initial, None)?;
    let psi_target = family.ground_state(&target, None)?;
    let trajectory = dynamics::evolve_matrix(&family, &protocol, &psi0, protocol.duration, cfg)?;
    let last = trajectory.final_vector().expect("matrix trajectory");
    let (l_g_hamiltonian_path, connects) = hamiltonian_path(&family, &protocol, &target)?;
    let d_lower = geometry::fs_distance(&psi0, &psi_target);
    let lengths = Lengths {
        l_e: trajectory.l_e(),
        l_g_control,
        l_g_hamiltonian_path,
        connects,
        d_lower,
        d_orbit: d_lower,
        final_fidelity: dynamics::fidelity(&last, &psi_target),
    };
    let report = assemble(scenario, Units::Fs, lengths, hold_time, protocol, notes);
    Ok(ScenarioRun { report, trajectory })
}

fn coherent_run(
    scenario: &Scenario,
    fam: ShiftedOscillatorFamily,
    protocol: Protocol,
    units: Units,
    cfg: &EngineConfig,
) -> Result<ScenarioRun> {
    let family = Family::from(fam);
    let (initial, target) = scenario.endpoints();
    let mu0 = [initial[0], initial[1]];
    let mu_target = [target[0], target[1]];
    let trajectory = dynamics::evolve_coherent(&fam, &protocol, mu0, protocol.duration, cfg)?;
    let last = trajectory.final_coordinates().expect("coherent trajectory");
    let l_g_control = control_geodesic_length(&family, &scenario.control_geodesic())?;
    let (l_g_hamiltonian_path, connects) = hamiltonian_path(&family, &protocol, &target)?;
    let d_lower = dynamics::coherent_fs_distance(mu0, mu_target);
    let d_orbit = geometry::geodesic_distance_coherent(mu0, mu_target);
    let lengths = Lengths {
        l_e: trajectory.l_e(),
        l_g_control,
        l_g_hamiltonian_path,
        connects,
        d_lower,
        d_orbit,
        final_fidelity: dynamics::coherent_overlap(last, mu_target).powi(2),
    };
    let saturated = (lengths.l_e - d_orbit).abs() < SATURATION_TOL;
    let mut notes = vec![format!(
        "d_lower = arccos|<psi_i|psi_*>| = {d_lower:.6} is the full state-space distance; the orbit of \
         displaced vacua is flat with distance {d_orbit:.6}"
    )];
    if saturated {
        notes.push("l_E equals the orbit distance: the modified inequality is saturated".into());
    }
    let report = assemble(scenario, units, lengths, None, protocol, notes);
    Ok(ScenarioRun { report, trajectory })
}

fn control_geodesic_length(family: &Family, curve: &ControlCurve) -> Result<f64> {
    geometry::curve_length(family, &|u| curve.point(u), &|u| curve.derivative(u), &[0.0, 1.0], MetricSource::Analytic)
}

fn squeezed_run(
    scenario: &Scenario,
    fam: SqueezedOscillatorFamily,
    r: f64,
    s: f64,
    hold: Option<f64>,
    total_time: Option<f64>,
    cfg: &EngineConfig,
) -> Result<ScenarioRun> {
    let family = Family::from(fam);
    let (initial, target) = scenario.endpoints();
    let (protocol, hold_time) = match total_time {
        Some(t) => (protocols::adiabatic_protocol(&family, &scenario.control_geodesic(), t)?, None),
        None => {
            let hold = match hold {
                Some(t) => t,
                None => {
                    protocols::find_hold_time(&HoldTimeProblem::SqueezedCircle { family: fam, r }, s, None, cfg)?.hold
                }
            };
            (protocols::squeezed_ramp_protocol(r, RampSpec::new(s, hold)?), Some(hold))
        }
    };
    let p0 = [initial[0], initial[1]];
    let p_target = [target[0], target[1]];
    let trajectory = dynamics::evolve_gaussian(&fam, &protocol, p0, protocol.duration, cfg)?;
    let last = trajectory.final_coordinates().expect("gaussian trajectory");
    let TrajectoryStates::Squeezed(coords) = &trajectory.states else { unreachable!() };
    let min_mu_r = coords.iter().map(|c| c[0]).fold(f64::INFINITY, f64::min);
    let max_mu_r = coords.iter().map(|c| c[0]).fold(0.0, f64::max);

    let l_g_control = geometry::arc_distance_in_control_circle(&family, r, p0[1], p_target[1])?;
    let (l_g_hamiltonian_path, connects) = hamiltonian_path(&family, &protocol, &target)?;
    let d_lower = dynamics::squeezed_fs_distance(p0, p_target);
    let d_orbit = geometry::geodesic_distance_squeezed((p0[0], p0[1]), (p_target[0], p_target[1]))?;
    let l_e = trajectory.l_e();

    let formula = sinh_squared_length(r);
    let (fock_oracle, mirror_symmetry_error) = match protocol.schedule {
        protocols::Schedule::SqueezedRamp { .. } => {
            let n_max = squeezed_oracle_truncation(max_mu_r);
            let oracle = squeezed_fock_oracle(fam.omega, &protocol, p0, p_target, n_max)?;
            let summary = OracleSummary {
                l_e: oracle.l_e,
                n_max,
                final_fidelity: oracle.final_fidelity,
                l_e_relative_discrepancy: (l_e - oracle.l_e).abs() / oracle.l_e.abs().max(f64::MIN_POSITIVE),
            };
            (Some(summary), squeezed_mirror_error(&trajectory))
        }
        _ => (None, None),
    };
    let details = SqueezedDetails {
        l_g_sinh_squared_formula: formula,
        l_g_metric_arc: l_g_control,
        fock_oracle,
        mirror_symmetry_error,
        min_mu_r,
        max_mu_r,
    };
    let mut notes = vec![format!(
        "length discrepancy: the closed form pi/24 sinh^2(2r) = {formula:.6} disagrees with the \
         Fubini-Study arc length {l_g_control:.6} of the same control arc; verdicts use the arc length"
    )];
    let reference = (r - 2.0).abs() < 1e-12 && (fam.omega - 2.0 * PI).abs() < 1e-12 && (s - 3e-3).abs() < 1e-15;
    if reference && total_time.is_none() {
        notes.push(format!(
            "reference values quoted for r=2, omega=2pi, s=3e-3 (l_E = 42.24, T = 4.77e-6) are not \
             reproduced; this run gives l_E = {l_e:.6}, T = {:.6e}",
            hold_time.unwrap_or(f64::NAN)
        ));
    }
    let lengths = Lengths {
        l_e,
        l_g_control,
        l_g_hamiltonian_path,
        connects,
        d_lower,
        d_orbit,
        final_fidelity: dynamics::squeezed_overlap(last, p_target).powi(2),
    };
    let mut report = assemble(scenario, Units::Fs, lengths, hold_time, protocol, notes);
    report.squeezed = Some(details);
    Ok(ScenarioRun { report, trajectory })
}

/// `π/24 · sinh²(2r)`.
pub fn sinh_squared_length(r: f64) -> f64 {
    PI / 24.0 * (2.0 * r).sinh().powi(2)
}

// largest |μ(D − t) − mirror(μ(t))| over evenly spread grid pairs
fn squeezed_mirror_error(traj: &Trajectory) -> Option<f64> {
    let TrajectoryStates::Squeezed(c) = &traj.states else { return None };
    let n = traj.len() - 1;
    let d = traj.times[n];
    let mut worst: f64 = 0.0;
    for i in 0..MIRROR_SAMPLES {
        let k = (i * n) / (2 * MIRROR_SAMPLES);
        let j = n - k;
        if (traj.times[k] + traj.times[j] - d).abs() > 1e-9 * d {
            return None;
        }
        let dr = (c[j][0] - c[k][0]).abs();
        let dth = linalg::wrap_pi(c[j][1] + c[k][1] - 2.0 * PI).abs();
        worst = worst.max(dr).max(dth);
    }
    Some(worst)
}

/// Result of [`squeezed_fock_oracle`].
#[derive(Clone, Debug, PartialEq)]
pub struct FockOracle {
    pub l_e: f64,
    pub final_fidelity: f64,
    pub n_max: usize,
    /// Even-number amplitudes `⟨2j|ψ(D)⟩`.
    pub final_amplitudes: Vec<C64>,
}

/// Even `n_max` for the oracle, from the largest squeezing reached.
pub fn squeezed_oracle_truncation(max_r: f64) -> usize {
    fock::squeezed_truncation(max_r, ORACLE_TAIL) + ORACLE_MARGIN
}

/// `l_E` of a squeezed ramp protocol by exact propagation in the even number
/// subspace.
///
/// With `R(θ) = exp(iθn̂/2)`, `Ĥ(r,θ) = R Ĥ(r,0) R†`; on a piece where `θ`
/// grows at rate `κ` the rotating-frame state obeys a constant Schrödinger
/// equation with generator `Ĥ(r,0) + (κ/2) n̂`, diagonalized once per piece.
pub fn squeezed_fock_oracle(
    omega: f64,
    protocol: &Protocol,
    initial: [f64; 2],
    target: [f64; 2],
    n_max: usize,
) -> Result<FockOracle> {
    let (r, ramp) = match protocol.schedule {
        protocols::Schedule::SqueezedRamp { r, ramp } if !protocol.reversed => (r, ramp),
        _ => return Err(Error::Unsupported("the Fock oracle handles squeezed ramp protocols only".into())),
    };
    if !n_max.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("oracle truncation n_max={n_max} must be even")));
    }
    let pairs = n_max / 2 + 1;
    let family = Family::from(SqueezedOscillatorFamily::new(omega)?);
    let full = family.hamiltonian_matrix(&[r, 0.0].into(), Some(n_max))?;
    let h0 = DMatrix::from_fn(pairs, pairs, |i, j| full.matrix()[(2 * i, 2 * j)].re);

    let even = |p: [f64; 2]| -> DVector<C64> {
        let amps = fock::squeezed_amplitudes(p[0], p[1], n_max);
        let v = DVector::from_iterator(pairs, amps.into_iter().step_by(2));
        let norm = v.norm();
        v / C64::new(norm, 0.0)
    };
    let rotate = |v: &DVector<C64>, theta: f64| -> DVector<C64> {
        DVector::from_fn(pairs, |j, _| v[j] * C64::from_polar(1.0, theta * j as f64))
    };

    let kappa = 2.0 * PI / (3.0 * ramp.s);
    let theta0 = -2.0 * PI / 3.0;
    // (θ at piece start, κ, duration)
    let pieces = [(theta0, kappa, ramp.s), (0.0, 0.0, ramp.hold), (0.0, kappa, ramp.s)];
    let mut psi = even(initial);
    let mut l_e = 0.0;
    for (theta_a, rate, dur) in pieces {
        let g = DMatrix::from_fn(pairs, pairs, |i, j| h0[(i, j)] + if i == j { rate * i as f64 } else { 0.0 });
        let (e, v) = linalg::eigh_real(&g);
        let a = v.transpose() * &h0 * &v;
        let phi = rotate(&psi, -theta_a);
        let c = DVector::from_fn(pairs, |k, _| (0..pairs).map(|j| phi[j] * v[(j, k)]).sum::<C64>());
        let amplitudes = |tau: f64| DVector::from_fn(pairs, |k, _| c[k] * C64::from_polar(1.0, -e[k] * tau));
        let a_c = a.map(|x| C64::new(x, 0.0));
        let delta_e = |tau: f64| {
            let d = amplitudes(tau);
            let ad = &a_c * &d;
            let mean = d.dotc(&ad).re;
            (ad.norm_squared() - mean * mean).max(0.0).sqrt()
        };
        let scale = delta_e(0.0).max(delta_e(dur)).max(1.0) * dur;
        l_e += crate::quad::integrate(delta_e, 0.0, dur, 1e-12 * scale);
        let d = amplitudes(dur);
        let v_c = v.map(|x| C64::new(x, 0.0));
        psi = rotate(&(v_c * d), theta_a + rate * dur);
    }
    let goal = even(target);
    let final_fidelity = goal.dotc(&psi).norm_sqr();
    Ok(FockOracle { l_e, final_fidelity, n_max, final_amplitudes: psi.iter().copied().collect() })
}

/// Lengths of the linearly controlled qutrit between `±λ*`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QutritLengths {
    pub lambda_star: f64,
    pub l_g: f64,
    #[serde(rename = "l_E")]
    pub l_e: f64,
}

/// Closed forms for `a = 1`.
pub fn qutrit_closed_forms(omega: f64, lambda_star: f64) -> Result<QutritLengths> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidParameter(format!("omega={omega} must be > 0")));
    }
    let (w, l) = (omega, lambda_star.abs());
    let root = (2.0 * l * l + w * w).sqrt();
    let l_g = SQRT_2 * (l * SQRT_2 / w).atan();
    let inner = (l.powi(4) + 2.0 * l * l * w * (root + 2.0 * w) + 2.0 * w.powi(3) * (root + w)) / (2.0 * l * l + w * w);
    let l_e = PI * l * inner.sqrt() / (w * (root + w) + l * l);
    Ok(QutritLengths { lambda_star: l, l_g, l_e })
}

/// `l_g` by metric quadrature over `[−λ*, λ*]`.
pub fn qutrit_l_g(family: &QutritFamily, lambda_star: f64) -> Result<f64> {
    let l = lambda_star.abs();
    if l == 0.0 {
        return Ok(0.0);
    }
    let w = family.omega;
    let mut knots = vec![-l];
    if l > w {
        knots.push(-w);
    }
    knots.push(0.0);
    if l > w {
        knots.push(w);
    }
    knots.push(l);
    let fam = Family::from(*family);
    geometry::curve_length(&fam, &|t| t.into(), &|_| vec![1.0], &knots, MetricSource::Analytic)
}

/// `l_E` of the static protocol: `(π/ω) δE(ψ0(−λ*), Ĥ0)`.
pub fn qutrit_static_l_e(family: &QutritFamily, lambda_star: f64) -> Result<f64> {
    let fam = Family::from(*family);
    let psi = fam.ground_state(&(-lambda_star.abs()).into(), None)?;
    let var = dynamics::energy_variance(&psi, &DenseHamiltonian::new(family.h0())?)?;
    Ok(PI / family.omega * var.sqrt())
}

/// Quadrature `l_g` and variance `l_E` for general `a`.
pub fn qutrit_lengths(family: &QutritFamily, lambda_star: f64) -> Result<QutritLengths> {
    Ok(QutritLengths {
        lambda_star: lambda_star.abs(),
        l_g: qutrit_l_g(family, lambda_star)?,
        l_e: qutrit_static_l_e(family, lambda_star)?,
    })
}

/// `lim_{λ*→∞} l_g`, the metric integrated over the whole line.
pub fn qutrit_asymptotic_l_g(family: &QutritFamily) -> Result<f64> {
    let fam = Family::from(*family);
    let failure = std::cell::RefCell::new(None);
    let value = crate::quad::integrate_real_line(
        |x| match geometry::analytic_metric(&fam, &x.into()) {
            Ok(g) => g.matrix()[(0, 0)].max(0.0).sqrt(),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        1e-12,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

// smallest spectral gap along [−λ*, λ*]
fn qutrit_gap_check(family: &QutritFamily, lambda_star: f64) -> Result<()> {
    let fam = Family::from(*family);
    let l = lambda_star.abs();
    for k in 0..GAP_SAMPLES {
        let x = -l + 2.0 * l * k as f64 / (GAP_SAMPLES - 1) as f64;
        let gap = fam.spectrum(&x.into(), None)?.gap;
        if gap < DEGENERACY_TOL {
            return Err(Error::Degenerate { gap });
        }
    }
    Ok(())
}

/// A crossing of `l_g − l_E` from negative to positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub lambda: f64,
    pub below: QutritLengths,
    pub above: QutritLengths,
}

/// First grid bracket where `l_g − l_E` changes sign, refined by bisection to
/// width 1e-4.
pub fn qutrit_critical_scan(omega: f64, a: f64, grid: &[f64]) -> Result<Option<CriticalPoint>> {
    let family = QutritFamily::new(omega, a)?;
    if grid.is_empty() || grid.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidParameter("grid must be non-empty and positive".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("grid must increase strictly".into()));
    }
    qutrit_gap_check(&family, grid[grid.len() - 1])?;
    let rows: Vec<QutritLengths> =
        grid.par_iter().map(|l| qutrit_lengths(&family, *l)).collect::<Result<_>>()?;
    let Some(k) = rows.windows(2).position(|w| w[0].l_g - w[0].l_e < 0.0 && w[1].l_g - w[1].l_e >= 0.0) else {
        return Ok(None);
    };
    let (mut lo, mut hi) = (rows[k], rows[k + 1]);
    while hi.lambda_star - lo.lambda_star > CRITICAL_WIDTH {
        let mid = qutrit_lengths(&family, 0.5 * (lo.lambda_star + hi.lambda_star))?;
        if mid.l_g - mid.l_e < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(CriticalPoint { lambda: 0.5 * (lo.lambda_star + hi.lambda_star), below: lo, above: hi }))
}

/// Parameters a sweep can vary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    S,
    LambdaStar,
    Theta,
    R,
    TotalTime,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::S => "s",
            SweepParameter::LambdaStar => "lambda_star",
            SweepParameter::Theta => "theta",
            SweepParameter::R => "r",
            SweepParameter::TotalTime => "total_time",
        }
    }

    /// Copy of `spec` with this parameter set to `value`.
    pub fn apply(self, spec: &ScenarioSpec, value: f64) -> Result<ScenarioSpec> {
        let mut out = spec.clone();
        let slot = match (self, &mut out.scenario) {
            (SweepParameter::TotalTime, _) => {
                out.total_time = Some(value);
                return Ok(out);
            }
            (SweepParameter::S, Scenario::QubitCircle { s, .. } | Scenario::SqueezedCircle { s, .. }) => s,
            (SweepParameter::Theta, Scenario::QubitCircle { theta, .. }) => theta,
            (SweepParameter::R, Scenario::SqueezedCircle { r, .. }) => r,
            (SweepParameter::LambdaStar, Scenario::QutritLinear { lambda_star, .. }) => lambda_star,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "parameter {} does not apply to scenario {}",
                    self.name(),
                    spec.scenario.name()
                )))
            }
        };
        *slot = value;
        Ok(out)
    }
}

/// One sweep row.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub report: LengthReport,
}

/// Run `spec` once per value in parallel; rows come back in grid order.
pub fn sweep(spec: &ScenarioSpec, parameter: SweepParameter, values: &[f64]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("empty sweep range".into()));
    }
    let specs: Vec<ScenarioSpec> = values.iter().map(|v| parameter.apply(spec, *v)).collect::<Result<_>>()?;
    specs
        .par_iter()
        .zip(values)
        .map(|(s, v)| run_scenario(s).map(|run| SweepRow { value: *v, report: run.report }))
        .collect()
}

/// `steps` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !start.is_finite() || !stop.is_finite() {
        return Err(Error::InvalidParameter(format!("invalid range {start}..{stop} with {steps} steps")));
    }
    if steps == 1 {
        return Ok(vec![start]);
    }
    Ok((0..steps).map(|k| start + (stop - start) * k as f64 / (steps - 1) as f64).collect())
}

const SWEEP_COLUMNS: [&str; 14] = [
    "l_E",
    "l_g_control",
    "l_g_hamiltonian_path",
    "hamiltonian_path_connects",
    "d_lower",
    "d_orbit_manifold",
    "final_fidelity",
    "original_conjecture_violated",
    "modified_inequality_holds",
    "orbit_bound_holds",
    "saturated",
    "T",
    "l_E_fock_oracle",
    "mirror_symmetry_error",
];

/// Column names of [`report_csv_fields`].
pub fn report_csv_header() -> &'static [&'static str] {
    &SWEEP_COLUMNS
}

/// Scalar report fields as CSV cells; absent values are empty.
pub fn report_csv_fields(r: &LengthReport) -> Vec<String> {
    let opt = |x: Option<f64>| x.map(csv_float).unwrap_or_default();
    vec![
        csv_float(r.l_e),
        csv_float(r.l_g_control),
        csv_float(r.l_g_hamiltonian_path),
        r.hamiltonian_path_connects.to_string(),
        csv_float(r.d_lower),
        csv_float(r.d_orbit_manifold),
        csv_float(r.final_fidelity),
        r.original_conjecture_violated.to_string(),
        r.modified_inequality_holds.to_string(),
        r.orbit_bound_holds.to_string(),
        r.saturated.to_string(),
        opt(r.hold_time),
        opt(r.squeezed.as_ref().and_then(|d| d.fock_oracle.as_ref()).map(|o| o.l_e)),
        opt(r.squeezed.as_ref().and_then(|d| d.mirror_symmetry_error)),
    ]
}

/// Sweep table with a header row; floats round-trip exactly.
pub fn write_sweep_csv<W: Write>(parameter: SweepParameter, rows: &[SweepRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{},{}", parameter.name(), SWEEP_COLUMNS.join(","))?;
    for row in rows {
        let mut fields = vec![csv_float(row.value)];
        fields.extend(report_csv_fields(&row.report));
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

/// One point of a metric check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricCheckRow {
    pub point: Vec<f64>,
    /// `‖g_fd − g_analytic‖∞`, `None` where the point was skipped.
    pub deviation: Option<f64>,
    pub note: Option<String>,
}

/// Largest allowed finite-difference deviation in a metric check.
pub const METRIC_CHECK_TOL: f64 = 1e-6;

/// Compare finite-difference and closed-form metrics at each point.
pub fn metric_check(family: &Family, points: &[ControlPoint], step: f64) -> Result<Vec<MetricCheckRow>> {
    points
        .par_iter()
        .map(|p| {
            if let Family::Qubit(_) = family {
                if p[0].sin().abs() < 1e-8 {
                    return Ok(MetricCheckRow {
                        point: p.coords().to_vec(),
                        deviation: None,
                        note: Some("skipped: the azimuthal direction is degenerate at the pole".into()),
                    });
                }
            }
            let fd = geometry::qgt_finite_difference(family, p, step)?.metric();
            let exact = geometry::analytic_metric(family, p)?;
            Ok(MetricCheckRow { point: p.coords().to_vec(), deviation: Some(fd.max_deviation(&exact)), note: None })
        })
        .collect()
}

pub fn write_metric_csv<W: Write>(rows: &[MetricCheckRow], mut w: W) -> std::io::Result<()> {
    let dim = rows.first().map_or(0, |r| r.point.len());
    let mut header: Vec<String> = (0..dim).map(|k| format!("x{k}")).collect();
    header.extend(["max_deviation".into(), "note".into()]);
    writeln!(w, "{}", header.join(","))?;
    for r in rows {
        let mut fields: Vec<String> = r.point.iter().map(|x| csv_float(*x)).collect();
        fields.push(r.deviation.map(csv_float).unwrap_or_default());
        fields.push(r.note.clone().unwrap_or_default());
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

/// Closed-form `s → 0` limit of the qubit `l_E` on `Λ_θ`.
pub fn qubit_fast_ramp_limit(theta: f64) -> f64 {
    let c2 = theta.cos().powi(2);
    (1.0 / (1.0 + c2).sqrt()).asin() * (1.0 - c2 * c2).sqrt()
}
