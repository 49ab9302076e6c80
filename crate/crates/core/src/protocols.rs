//! Control schedules `t ↦ λ(t)` and the hold-time solver.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::dynamics::{self, EngineConfig};
use crate::error::{Error, Result};
use crate::geometry::{self, MetricSource};
use crate::linalg::wrap_pi;
use crate::model::{ControlPoint, Family, QubitFamily, SqueezedOscillatorFamily, StateVector};
use crate::quad;

const DOMAIN_SLACK: f64 = 1e-12;

/// Ramp time `s` and hold time `T` of a ramp–hold–ramp schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RampSpec {
    pub s: f64,
    #[serde(rename = "T")]
    pub hold: f64,
}

impl RampSpec {
    pub fn new(s: f64, hold: f64) -> Result<Self> {
        if !(s > 0.0 && hold > 0.0 && s.is_finite() && hold.is_finite()) {
            return Err(Error::InvalidParameter(format!("ramp needs s, T > 0, got s={s}, T={hold}")));
        }
        Ok(Self { s, hold })
    }

    pub fn duration(&self) -> f64 {
        self.hold + 2.0 * self.s
    }
}

/// `β(t)`: 0 → 1 over the first ramp, 1 during the hold, 1 → 2 over the second ramp.
pub fn beta(t: f64, spec: RampSpec) -> Result<f64> {
    let d = spec.duration();
    if !(-DOMAIN_SLACK * d..=d * (1.0 + DOMAIN_SLACK)).contains(&t) {
        return Err(Error::ProtocolDomain { t, duration: d });
    }
    Ok(beta_rate(t, spec).0)
}

// (β, dβ/dt), clamped to the domain
fn beta_rate(t: f64, spec: RampSpec) -> (f64, f64) {
    let RampSpec { s, hold } = spec;
    if t <= s {
        (t.max(0.0) / s, 1.0 / s)
    } else if t <= hold + s {
        (1.0, 0.0)
    } else {
        ((t.min(hold + 2.0 * s) - hold) / s, 1.0 / s)
    }
}

/// A path through control space, parametrized by `u ∈ [0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ControlCurve {
    /// Straight segment in chart coordinates.
    Line { from: Vec<f64>, to: Vec<f64> },
    /// Circle `(fixed, angle)` with the angle running linearly from `from` to `to`.
    Arc { fixed: f64, from: f64, to: f64 },
    /// Euclidean circle `center + radius (cos a, sin a)` in a planar chart,
    /// `a` running linearly from `from` to `to`.
    Circle { center: [f64; 2], radius: f64, from: f64, to: f64 },
}

impl ControlCurve {
    pub fn point(&self, u: f64) -> ControlPoint {
        match self {
            ControlCurve::Line { from, to } => {
                ControlPoint::new(from.iter().zip(to).map(|(a, b)| a + u * (b - a)).collect())
            }
            ControlCurve::Arc { fixed, from, to } => ControlPoint::new(vec![*fixed, from + u * (to - from)]),
            ControlCurve::Circle { center, radius, from, to } => {
                let (s, c) = (from + u * (to - from)).sin_cos();
                ControlPoint::new(vec![center[0] + radius * c, center[1] + radius * s])
            }
        }
    }

    /// `dλ/du`.
    pub fn derivative(&self, u: f64) -> Vec<f64> {
        match self {
            ControlCurve::Line { from, to } => from.iter().zip(to).map(|(a, b)| b - a).collect(),
            ControlCurve::Arc { from, to, .. } => vec![0.0, to - from],
            ControlCurve::Circle { radius, from, to, .. } => {
                let (s, c) = (from + u * (to - from)).sin_cos();
                let k = radius * (to - from);
                vec![-k * s, k * c]
            }
        }
    }

    /// Whether the curve stays at a single point.
    pub fn is_degenerate(&self) -> bool {
        match self {
            ControlCurve::Line { from, to } => from == to,
            ControlCurve::Arc { from, to, .. } => from == to,
            ControlCurve::Circle { radius, from, to, .. } => from == to || *radius == 0.0,
        }
    }
}

/// Time profile of the arc-length fraction `σ(t/D)` along an adiabatic path.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpeedProfile {
    /// Constant metric speed, `σ(τ) = τ`.
    #[default]
    Uniform,
    /// `σ(τ) = τ − sin(2πτ)/2π`: speed and acceleration vanish at both ends.
    Smooth,
}

impl SpeedProfile {
    /// `(σ(τ), dσ/dτ)`.
    pub fn progress(self, tau: f64) -> (f64, f64) {
        match self {
            SpeedProfile::Uniform => (tau, 1.0),
            SpeedProfile::Smooth => {
                let x = 2.0 * PI * tau;
                (tau - x.sin() / (2.0 * PI), 1.0 - x.cos())
            }
        }
    }

    /// `τ` with `σ(τ) = sigma`.
    pub fn inverse(self, sigma: f64) -> f64 {
        match self {
            SpeedProfile::Uniform => sigma,
            SpeedProfile::Smooth => {
                let (mut lo, mut hi) = (0.0, 1.0);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if self.progress(mid).0 < sigma {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "parameters", rename_all = "kebab-case")]
pub enum Schedule {
    Constant {
        point: Vec<f64>,
    },
    /// `(θ, −β(t)π/2)`.
    QubitRamp {
        theta: f64,
        #[serde(flatten)]
        ramp: RampSpec,
    },
    /// `(r, (β(t)−1)2π/3)`.
    SqueezedRamp {
        r: f64,
        #[serde(flatten)]
        ramp: RampSpec,
    },
    /// `(2 sin²(ωt/2), −sin ωt)`.
    HoSemicircle { omega: f64 },
    /// `curve(u(t))` with `u` a cubic Hermite interpolant of the arc-length
    /// fraction through `(fractions, nodes)`. `slopes` holds `du/dσ` at the
    /// nodes; missing or non-finite entries are estimated from neighbours.
    Adiabatic {
        curve: ControlCurve,
        nodes: Vec<f64>,
        fractions: Vec<f64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        slopes: Vec<f64>,
        #[serde(default)]
        profile: SpeedProfile,
    },
}

/// Control schedule on `[0, duration]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    #[serde(flatten)]
    pub schedule: Schedule,
    pub duration: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub reversed: bool,
}

impl Protocol {
    pub fn new(schedule: Schedule, duration: f64) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::InvalidParameter(format!("protocol duration {duration} must be > 0")));
        }
        Ok(Self { schedule, duration, reversed: false })
    }

    /// Run the same path backwards in time.
    pub fn time_reversed(&self) -> Self {
        Self { reversed: !self.reversed, ..self.clone() }
    }

    fn local_time(&self, t: f64) -> Result<f64> {
        let d = self.duration;
        if !(t >= -DOMAIN_SLACK * d && t <= d * (1.0 + DOMAIN_SLACK)) {
            return Err(Error::ProtocolDomain { t, duration: d });
        }
        let t = t.clamp(0.0, d);
        Ok(if self.reversed { d - t } else { t })
    }

    /// `λ(t)`.
    pub fn at(&self, t: f64) -> Result<ControlPoint> {
        let t = self.local_time(t)?;
        Ok(match &self.schedule {
            Schedule::Constant { point } => ControlPoint::new(point.clone()),
            Schedule::QubitRamp { theta, ramp } => {
                ControlPoint::new(vec![*theta, -beta_rate(t, *ramp).0 * FRAC_PI_2])
            }
            Schedule::SqueezedRamp { r, ramp } => {
                ControlPoint::new(vec![*r, (beta_rate(t, *ramp).0 - 1.0) * 2.0 * PI / 3.0])
            }
            Schedule::HoSemicircle { omega } => {
                let x = omega * t;
                ControlPoint::new(vec![1.0 - x.cos(), -x.sin()])
            }
            Schedule::Adiabatic { curve, nodes, fractions, slopes, profile } => {
                let sigma = profile.progress(t / self.duration).0;
                curve.point(interp(fractions, nodes, slopes, sigma).0)
            }
        })
    }

    /// `dλ/dt`.
    pub fn velocity(&self, t: f64) -> Result<Vec<f64>> {
        let sign = if self.reversed { -1.0 } else { 1.0 };
        let t = self.local_time(t)?;
        let v = match &self.schedule {
            Schedule::Constant { point } => vec![0.0; point.len()],
            Schedule::QubitRamp { ramp, .. } => vec![0.0, -beta_rate(t, *ramp).1 * FRAC_PI_2],
            Schedule::SqueezedRamp { ramp, .. } => vec![0.0, beta_rate(t, *ramp).1 * 2.0 * PI / 3.0],
            Schedule::HoSemicircle { omega } => {
                let x = omega * t;
                vec![omega * x.sin(), -omega * x.cos()]
            }
            Schedule::Adiabatic { curve, nodes, fractions, slopes, profile } => {
                let (sigma, rate) = profile.progress(t / self.duration);
                let (u, slope) = interp(fractions, nodes, slopes, sigma);
                let du = slope * rate / self.duration;
                curve.derivative(u).into_iter().map(|c| c * du).collect()
            }
        };
        Ok(v.into_iter().map(|x| sign * x).collect())
    }

    /// Interior times where the schedule is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let raw: Vec<f64> = match &self.schedule {
            Schedule::QubitRamp { ramp, .. } | Schedule::SqueezedRamp { ramp, .. } => {
                vec![ramp.s, ramp.s + ramp.hold]
            }
            Schedule::Adiabatic { fractions, profile, .. } => fractions[1..fractions.len() - 1]
                .iter()
                .map(|f| profile.inverse(*f) * self.duration)
                .collect(),
            _ => vec![],
        };
        let mut out: Vec<f64> = raw
            .into_iter()
            .map(|b| if self.reversed { self.duration - b } else { b })
            .filter(|b| *b > 0.0 && *b < self.duration)
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }

    /// `[0, breakpoints.., end]` restricted to `[0, end]`.
    pub fn knots(&self, end: f64) -> Vec<f64> {
        let mut k = vec![0.0];
        k.extend(self.breakpoints().into_iter().filter(|b| *b < end));
        k.push(end);
        k
    }

    /// Fubini–Study length of the instantaneous ground-state path `ψ0(λ(t))`.
    pub fn ground_path_length(&self, family: &Family, source: MetricSource) -> Result<f64> {
        let curve = |t: f64| self.at(t).expect("time inside the protocol");
        let velocity = |t: f64| self.velocity(t).expect("time inside the protocol");
        geometry::curve_length(family, &curve, &velocity, &self.knots(self.duration), source)
    }
}

// piecewise-linear interpolation y(x) and slope
/// Monotone cubic interpolation with limited three-point tangents. Returns the value and its derivative.
fn interp(xs: &[f64], ys: &[f64], known: &[f64], x: f64) -> (f64, f64) {
    let n = xs.len();
    let x = x.clamp(xs[0], xs[n - 1]);
    let k = match xs.partition_point(|v| *v <= x) {
        0 => 0,
        k if k >= n => n - 2,
        k => k - 1,
    };
    let secant = |i: usize| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
    let tangent = |i: usize| -> f64 {
        if let Some(m) = known.get(i).filter(|m| m.is_finite()) {
            return *m;
        }
        if n == 2 {
            return secant(0);
        }
        if i == 0 || i == n - 1 {
            let (a, b, h0, h1) = if i == 0 {
                (secant(0), secant(1), xs[1] - xs[0], xs[2] - xs[1])
            } else {
                (secant(n - 2), secant(n - 3), xs[n - 1] - xs[n - 2], xs[n - 2] - xs[n - 3])
            };
            let d = ((2.0 * h0 + h1) * a - h0 * b) / (h0 + h1);
            return if d * a <= 0.0 {
                0.0
            } else if a * b <= 0.0 && d.abs() > 3.0 * a.abs() {
                3.0 * a
            } else {
                d
            };
        }
        let (a, b) = (secant(i - 1), secant(i));
        if a * b <= 0.0 {
            return 0.0;
        }
        let (h0, h1) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
        let d = (h1 * a + h0 * b) / (h0 + h1);
        let cap = 3.0 * a.abs().min(b.abs());
        d.signum() * d.abs().min(cap)
    };
    let h = xs[k + 1] - xs[k];
    let t = (x - xs[k]) / h;
    let (m0, m1) = (tangent(k), tangent(k + 1));
    let (y0, y1) = (ys[k], ys[k + 1]);
    let (t2, t3) = (t * t, t * t * t);
    let y = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * m0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * m1;
    let dy = ((6.0 * t2 - 6.0 * t) * (y0 - y1)) / h + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (3.0 * t2 - 2.0 * t) * m1;
    (y, dy)
}

pub fn qubit_ramp_protocol(theta: f64, spec: RampSpec) -> Protocol {
    Protocol { schedule: Schedule::QubitRamp { theta, ramp: spec }, duration: spec.duration(), reversed: false }
}

pub fn squeezed_ramp_protocol(r: f64, spec: RampSpec) -> Protocol {
    Protocol { schedule: Schedule::SqueezedRamp { r, ramp: spec }, duration: spec.duration(), reversed: false }
}

pub fn ho_semicircle_protocol(omega: f64) -> Result<Protocol> {
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!("omega must be > 0, got {omega}")));
    }
    Protocol::new(Schedule::HoSemicircle { omega }, PI / omega)
}

pub fn qutrit_static_protocol(omega: f64) -> Result<Protocol> {
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!("omega must be > 0, got {omega}")));
    }
    Protocol::new(Schedule::Constant { point: vec![0.0] }, PI / omega)
}

pub fn constant_protocol(point: ControlPoint, duration: f64) -> Result<Protocol> {
    Protocol::new(Schedule::Constant { point: point.coords().to_vec() }, duration)
}

const ARC_TABLE: usize = 256;

/// Traverse `curve` at constant Fubini–Study speed of the ground state.
pub fn adiabatic_protocol(family: &Family, curve: &ControlCurve, total_time: f64) -> Result<Protocol> {
    adiabatic_protocol_with_profile(family, curve, total_time, SpeedProfile::Uniform)
}

/// Traverse `curve` with the ground state's arc-length fraction following `profile`.
pub fn adiabatic_protocol_with_profile(
    family: &Family,
    curve: &ControlCurve,
    total_time: f64,
    profile: SpeedProfile,
) -> Result<Protocol> {
    if !(total_time > 0.0 && total_time.is_finite()) {
        return Err(Error::InvalidParameter(format!("total_time {total_time} must be > 0")));
    }
    if curve.is_degenerate() {
        return constant_protocol(curve.point(0.0), total_time);
    }
    let speed = |u: f64| -> Result<f64> {
        Ok(geometry::analytic_metric(family, &curve.point(u))?.quadratic_form(&curve.derivative(u)).max(0.0).sqrt())
    };
    let mut cumulative = vec![0.0];
    let failure = std::cell::RefCell::new(None);
    for k in 0..ARC_TABLE {
        let a = k as f64 / ARC_TABLE as f64;
        let b = (k + 1) as f64 / ARC_TABLE as f64;
        let piece = quad::integrate(
            |u| match speed(u) {
                Ok(v) => v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            a,
            b,
            1e-13,
        );
        cumulative.push(cumulative[k] + piece);
    }
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let total = cumulative[ARC_TABLE];
    if !(total > 0.0) {
        return Err(Error::InvalidParameter("control path has zero length".into()));
    }
    let nodes: Vec<f64> = (0..=ARC_TABLE).map(|k| k as f64 / ARC_TABLE as f64).collect();
    let fractions: Vec<f64> = cumulative.iter().map(|c| c / total).collect();
    let uniform = fractions.iter().zip(&nodes).all(|(f, u)| (f - u).abs() < 1e-12);
    let (nodes, fractions, slopes) = if uniform {
        (vec![0.0, 1.0], vec![0.0, 1.0], Vec::new())
    } else {
        let slopes = nodes.iter().map(|u| speed(*u).map(|v| total / v)).collect::<Result<Vec<f64>>>()?;
        (nodes, fractions, slopes)
    };
    Protocol::new(Schedule::Adiabatic { curve: curve.clone(), nodes, fractions, slopes, profile }, total_time)
}

/// Which circle-control problem to solve for the hold time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HoldTimeProblem {
    /// Qubit on `Λ_θ` from `φ = 0` to `φ = π`; the hold runs at `φ = −π/2`.
    QubitCircle(QubitFamily),
    /// Squeezed vacuum on `Λ_r` from `θ = 4π/3` to `θ = 2π/3`; the hold runs at `θ = 0`.
    SqueezedCircle { family: SqueezedOscillatorFamily, r: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HoldTime {
    pub hold: f64,
    pub residual: f64,
    /// Bloch azimuth `φ(s)` or squeezing angle `μ_θ(s)` after the first ramp.
    pub ramp_angle: f64,
}

const SCAN_POINTS: usize = 400;
const MAX_SCAN_DEPTH: usize = 14;
const MAX_BISECTIONS: usize = 200;
pub const HOLD_RESIDUAL_TOL: f64 = 1e-10;

/// Bloch azimuth `atan2(⟨σ_y⟩, ⟨σ_x⟩)` of a qubit state.
pub fn bloch_azimuth(psi: &StateVector) -> f64 {
    let a = psi.amplitudes();
    let c = a[0].conj() * a[1];
    c.im.atan2(c.re)
}

/// Smallest positive hold time `T` that makes the ramp–hold–ramp protocol
/// mirror-symmetric about its midpoint.
pub fn find_hold_time(
    problem: &HoldTimeProblem,
    s: f64,
    bracket: Option<(f64, f64)>,
    config: &EngineConfig,
) -> Result<HoldTime> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("ramp time s={s} must be > 0")));
    }
    match problem {
        HoldTimeProblem::QubitCircle(family) => {
            let omega = family.omega;
            let (lo, hi) = bracket.unwrap_or((0.0, 4.0 * PI / omega.abs()));
            check_bracket(lo, hi)?;
            let psi0 = QubitFamily::manifold_state(family.theta, 0.0);
            let ramp = qubit_ramp_protocol(family.theta, RampSpec::new(s, 1.0)?);
            let fam = Family::Qubit(*family);
            let traj = dynamics::evolve_matrix(&fam, &ramp, &psi0, s, config)?;
            let psi_s = traj.final_vector().expect("matrix trajectory");
            let az_s = bloch_azimuth(&psi_s);
            let target = PI - az_s;
            let h = fam.hamiltonian_matrix(&family.circle_point(-FRAC_PI_2), None)?;
            let (e, v) = h.eigh();
            let coeffs = v.adjoint() * psi_s.amplitudes();
            let residual = |t: f64| {
                let rotated = coeffs
                    .iter()
                    .zip(&e)
                    .map(|(c, en)| c * num_complex::Complex64::from_polar(1.0, -en * t))
                    .collect::<Vec<_>>();
                let amps = &v * nalgebra::DVector::from_vec(rotated);
                let az = bloch_azimuth(&StateVector::from_raw(amps));
                wrap_pi(az - target)
            };
            solve_first_root(residual, lo, hi, bracket.is_some(), || {
                format!("Bloch azimuth never reaches pi - phi(s) = {target:.6} during the hold (phi(s) = {az_s:.6})")
            })
            .map(|(hold, res)| HoldTime { hold, residual: res, ramp_angle: az_s })
        }
        HoldTimeProblem::SqueezedCircle { family, r } => {
            let omega = family.omega;
            let (lo, hi) = bracket.unwrap_or((0.0, 4.0 * PI / omega));
            check_bracket(lo, hi)?;
            let ramp = squeezed_ramp_protocol(*r, RampSpec::new(s, 1.0)?);
            let traj = dynamics::evolve_gaussian(family, &ramp, [*r, 4.0 * PI / 3.0], s, config)?;
            let [mu_r, mu_theta] = traj.final_coordinates().expect("gaussian trajectory");
            if !(mu_theta > PI) {
                return Err(Error::Unreachable(format!(
                    "mu_theta(s) = {mu_theta:.6} is not above pi; choose a shorter ramp time s"
                )));
            }
            let v_s = dynamics::covariance(mu_r, mu_theta);
            let m_hold = dynamics::quadratic_form(omega, *r, 0.0);
            let residual = |t: f64| {
                let v = dynamics::propagate_constant(&v_s, &m_hold, 0.5 * t);
                let (_, th) = dynamics::squeezing_coordinates(&v);
                wrap_pi(th - PI)
            };
            solve_first_root(residual, lo, hi, bracket.is_some(), || {
                format!("mu_theta never returns to pi during the hold (mu_theta(s) = {mu_theta:.6})")
            })
            .map(|(hold, res)| HoldTime { hold, residual: res, ramp_angle: mu_theta })
        }
    }
}

fn check_bracket(lo: f64, hi: f64) -> Result<()> {
    if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!("invalid bracket [{lo}, {hi}]")));
    }
    Ok(())
}

fn solve_first_root(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    user_bracket: bool,
    diagnostic: impl FnOnce() -> String,
) -> Result<(f64, f64)> {
    let found = first_crossing(&f, lo, hi, SCAN_POINTS, 0, (hi - lo) * 1e-15);
    let Some((mut a, mut fa, mut b)) = found else {
        return Err(if user_bracket { Error::NoSignChange { lo, hi } } else { Error::Unreachable(diagnostic()) });
    };
    if fa == 0.0 {
        return Ok((a, 0.0));
    }
    let mut best = (0.5 * (a + b), f64::INFINITY);
    for _ in 0..MAX_BISECTIONS {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm.abs() < best.1.abs() || best.1.is_infinite() {
            best = (m, fm);
        }
        if fm == 0.0 || b - a <= 4.0 * f64::EPSILON * m.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    if best.1.abs() > HOLD_RESIDUAL_TOL {
        return Err(Error::Convergence(format!("hold-time residual {:e} above tolerance", best.1)));
    }
    Ok(best)
}

// First subinterval on which the wrapped residual genuinely changes sign,
// refining wherever it moves too fast to tell crossings from branch jumps.
fn first_crossing(
    f: &impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    n: usize,
    depth: usize,
    min_width: f64,
) -> Option<(f64, f64, f64)> {
    let xs: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let fs: Vec<f64> = xs.iter().map(|x| f(*x)).collect();
    for i in 0..n {
        let (a, b, fa, fb) = (xs[i], xs[i + 1], fs[i], fs[i + 1]);
        if i == 0 && depth == 0 && a == 0.0 && fa == 0.0 {
            continue;
        }
        let jump = (fb - fa).abs();
        if jump > FRAC_PI_2 && depth < MAX_SCAN_DEPTH && b - a > min_width {
            if let Some(found) = first_crossing(f, a, b, 16, depth + 1, min_width) {
                return Some(found);
            }
            continue;
        }
        if fa == 0.0 {
            return Some((a, fa, b));
        }
        if fa.signum() != fb.signum() && jump < PI {
            return Some((a, fa, b));
        }
    }
    None
}
