//! Time evolution, energy variance and the dynamical length `l_E`.

use std::io::Write;

use nalgebra::{DMatrix, DVector, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry;
use crate::linalg;
use crate::model::{fock, DenseHamiltonian, Family, ShiftedOscillatorFamily, SqueezedOscillatorFamily, StateVector, C64};
use crate::protocols::Protocol;

const SQRT3_12: f64 = 0.144_337_567_297_406_43; // √3/12
const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // √3/6

/// Step control shared by the three engines.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    /// Relative tolerance per step (adaptive engine) and on the final state
    /// under step halving (fixed-step engines).
    pub rtol: f64,
    pub atol: f64,
    /// Refinement stops once `l_E` changes by less than this (relative).
    pub observable_tol: f64,
    pub max_step: Option<f64>,
    /// Renormalize state vectors after every step.
    pub renormalize: bool,
    pub max_refinements: u32,
    /// Evolve under `−Ĥ(λ(t))`, used with time-reversed protocols.
    pub negate_hamiltonian: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            observable_tol: 1e-8,
            max_step: None,
            renormalize: false,
            max_refinements: 16,
            negate_hamiltonian: false,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("rtol", self.rtol), ("atol", self.atol), ("observable_tol", self.observable_tol)] {
            if !(v > 0.0 && v <= 1e-2) {
                return Err(Error::InvalidParameter(format!("{name}={v} must lie in (0, 1e-2]")));
            }
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidParameter(format!("max_step={h} must be > 0")));
            }
        }
        Ok(())
    }

    /// The configuration for undoing a run with the time-reversed protocol.
    pub fn reversed(&self) -> Self {
        Self { negate_hamiltonian: !self.negate_hamiltonian, ..self.clone() }
    }

    fn sign(&self) -> f64 {
        if self.negate_hamiltonian {
            -1.0
        } else {
            1.0
        }
    }
}

/// Per-time state records.
#[derive(Clone, Debug, PartialEq)]
pub enum TrajectoryStates {
    Vectors(Vec<StateVector>),
    /// Coherent-state centers `(μ_q, μ_p)`.
    Coherent(Vec<[f64; 2]>),
    /// Squeezed-vacuum coordinates `(μ_r, μ_θ)`, `μ_θ` continuity-unwrapped.
    Squeezed(Vec<[f64; 2]>),
}

impl TrajectoryStates {
    pub fn len(&self) -> usize {
        match self {
            TrajectoryStates::Vectors(v) => v.len(),
            TrajectoryStates::Coherent(v) | TrajectoryStates::Squeezed(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: TrajectoryStates,
    pub delta_e: Vec<f64>,
    pub cumulative_length: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Engine-integrated dynamical length.
    pub fn l_e(&self) -> f64 {
        self.cumulative_length.last().copied().unwrap_or(0.0)
    }

    pub fn final_vector(&self) -> Option<StateVector> {
        match &self.states {
            TrajectoryStates::Vectors(v) => v.last().cloned(),
            _ => None,
        }
    }

    pub fn final_coordinates(&self) -> Option<[f64; 2]> {
        match &self.states {
            TrajectoryStates::Coherent(v) | TrajectoryStates::Squeezed(v) => v.last().copied(),
            _ => None,
        }
    }

    /// Largest `|‖ψ(t)‖ − 1|`; zero for manifold-coordinate records.
    pub fn max_norm_error(&self) -> f64 {
        match &self.states {
            TrajectoryStates::Vectors(v) => v.iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max),
            _ => 0.0,
        }
    }

    /// Fubini–Study distance between records `i` and `j`.
    pub fn distance_between(&self, i: usize, j: usize) -> f64 {
        match &self.states {
            TrajectoryStates::Vectors(v) => geometry::fs_distance(&v[i], &v[j]),
            TrajectoryStates::Coherent(v) => coherent_fs_distance(v[i], v[j]),
            TrajectoryStates::Squeezed(v) => squeezed_fs_distance(v[i], v[j]),
        }
    }

    /// `fs_distance(ψ(0), ψ(T))`.
    pub fn endpoint_distance(&self) -> f64 {
        self.distance_between(0, self.len() - 1)
    }

    /// CSV with columns `t`, state components, `deltaE`, `cumulative_length`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = vec!["t".to_string()];
        match &self.states {
            TrajectoryStates::Vectors(v) => {
                for k in 0..v.first().map_or(0, |s| s.dim()) {
                    header.push(format!("re_{k}"));
                    header.push(format!("im_{k}"));
                }
            }
            TrajectoryStates::Coherent(_) => header.extend(["mu_q".into(), "mu_p".into()]),
            TrajectoryStates::Squeezed(_) => header.extend(["mu_r".into(), "mu_theta".into()]),
        }
        header.extend(["deltaE".into(), "cumulative_length".into()]);
        writeln!(w, "{}", header.join(","))?;
        for i in 0..self.len() {
            let mut row = vec![csv_float(self.times[i])];
            match &self.states {
                TrajectoryStates::Vectors(v) => {
                    for c in v[i].amplitudes().iter() {
                        row.push(csv_float(c.re));
                        row.push(csv_float(c.im));
                    }
                }
                TrajectoryStates::Coherent(v) | TrajectoryStates::Squeezed(v) => {
                    row.push(csv_float(v[i][0]));
                    row.push(csv_float(v[i][1]));
                }
            }
            row.push(csv_float(self.delta_e[i]));
            row.push(csv_float(self.cumulative_length[i]));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Round-trip exact decimal with 17 significant digits.
pub fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// `⟨ψ|H²|ψ⟩ − ⟨ψ|H|ψ⟩²`.
pub fn energy_variance(psi: &StateVector, h: &DenseHamiltonian) -> Result<f64> {
    if psi.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: psi.dim() });
    }
    variance_raw(psi.amplitudes(), h.matrix())
}

fn variance_raw(psi: &DVector<C64>, h: &DMatrix<C64>) -> Result<f64> {
    let hpsi = h * psi;
    let n2 = psi.norm_squared();
    let mean = psi.dotc(&hpsi).re / n2;
    let second = hpsi.norm_squared() / n2;
    let var = second - mean * mean;
    if var < -1e-12 * second.max(1.0) {
        return Err(Error::Numerical(format!("negative energy variance {var:e}")));
    }
    Ok(var.max(0.0))
}

/// `|⟨target|ψ⟩|²`.
pub fn fidelity(psi: &StateVector, target: &StateVector) -> f64 {
    target.overlap(psi).norm_sqr().min(1.0)
}

/// Trapezoid rule for `∫ δE dt` over the recorded samples.
pub fn l_e_of_trajectory(traj: &Trajectory) -> f64 {
    trapezoid(&traj.times, &traj.delta_e)
}

fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2).zip(y.windows(2)).map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1])).sum()
}

fn cumulative_trapezoid(t: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..t.len() {
        acc += 0.5 * (t[k] - t[k - 1]) * (y[k] + y[k - 1]);
        out.push(acc);
    }
    out
}

/// `|⟨μ1|μ2⟩|` for coherent states centered at `μ = (q, p)`.
pub fn coherent_overlap(mu1: [f64; 2], mu2: [f64; 2]) -> f64 {
    let d2 = (mu1[0] - mu2[0]).powi(2) + (mu1[1] - mu2[1]).powi(2);
    (-0.25 * d2).exp()
}

pub fn coherent_fs_distance(mu1: [f64; 2], mu2: [f64; 2]) -> f64 {
    let d2 = (mu1[0] - mu2[0]).powi(2) + (mu1[1] - mu2[1]).powi(2);
    // sin² = 1 − e^{−d²/2}
    (-(-0.5 * d2).exp_m1()).sqrt().atan2((-0.25 * d2).exp())
}

/// `|⟨ψ0(r1,θ1)|ψ0(r2,θ2)⟩|` for squeezed vacua.
pub fn squeezed_overlap(p1: [f64; 2], p2: [f64; 2]) -> f64 {
    let (d, _) = squeezed_overlap_parts(p1, p2);
    d.powf(-0.25)
}

// (|D|², |D|² − 1) with |⟨1|2⟩|⁴ = 1/|D|²
fn squeezed_overlap_parts(p1: [f64; 2], p2: [f64; 2]) -> (f64, f64) {
    let excess = (p1[0] - p2[0]).sinh().powi(2)
        + (2.0 * p1[0]).sinh() * (2.0 * p2[0]).sinh() * (0.5 * (p2[1] - p1[1])).sin().powi(2);
    (1.0 + excess, excess)
}

pub fn squeezed_fs_distance(p1: [f64; 2], p2: [f64; 2]) -> f64 {
    let (d2, excess) = squeezed_overlap_parts(p1, p2);
    let d = d2.sqrt();
    let one_minus_f = excess / (d * (d + 1.0));
    one_minus_f.sqrt().atan2(d.powf(-0.5))
}

fn check_duration(protocol: &Protocol, duration: f64) -> Result<()> {
    if !(duration > 0.0 && duration <= protocol.duration * (1.0 + 1e-12)) {
        return Err(Error::ProtocolDomain { t: duration, duration: protocol.duration });
    }
    Ok(())
}

// step counts per knot interval: proportional to its length, but every
// interval refines as n grows
fn time_grid(knots: &[f64], n: usize) -> Vec<f64> {
    let total = knots[knots.len() - 1] - knots[0];
    let floor = (n / (2 * (knots.len() - 1))).max(1);
    let mut out = vec![knots[0]];
    for w in knots.windows(2) {
        let m = ((n as f64 * (w[1] - w[0]) / total).round() as usize).max(floor);
        for k in 1..=m {
            out.push(if k == m { w[1] } else { w[0] + (w[1] - w[0]) * k as f64 / m as f64 });
        }
    }
    out
}

fn initial_steps(knots: &[f64], duration: f64, config: &EngineConfig) -> usize {
    let by_step = config.max_step.map_or(0, |h| (duration / h).ceil() as usize);
    (8 * (knots.len() - 1)).max(16).max(by_step)
}

/// Exponential integrator for finite-dimensional (or Fock-truncated)
/// families: two-point Gauss Magnus step with an exact matrix exponential,
/// refined by step halving.
pub fn evolve_matrix(
    family: &Family,
    protocol: &Protocol,
    psi0: &StateVector,
    duration: f64,
    config: &EngineConfig,
) -> Result<Trajectory> {
    config.validate()?;
    check_duration(protocol, duration)?;
    let n_max = family.is_oscillator().then(|| psi0.dim() - 1);
    let sign = config.sign();
    let h_at = |t: f64| -> Result<DMatrix<C64>> {
        let h = family.hamiltonian_matrix(&protocol.at(t)?, n_max)?;
        Ok(h.matrix() * C64::new(sign, 0.0))
    };
    let d = h_at(0.0)?.nrows();
    if d != psi0.dim() {
        return Err(Error::DimensionMismatch { expected: d, got: psi0.dim() });
    }
    let knots = protocol.knots(duration);
    let mut n = initial_steps(&knots, duration, config);
    let mut prev: Option<Trajectory> = None;
    for _ in 0..=config.max_refinements {
        let traj = matrix_run(&h_at, psi0, &time_grid(&knots, n), config)?;
        if let Some(p) = &prev {
            let dpsi = (traj.final_vector().unwrap().into_amplitudes() - p.final_vector().unwrap().into_amplitudes()).norm();
            let dl = (traj.l_e() - p.l_e()).abs();
            if dpsi <= config.rtol + config.atol && dl <= config.observable_tol * traj.l_e().max(1.0) {
                log::debug!("matrix engine converged with {} steps", traj.len() - 1);
                return Ok(traj);
            }
        }
        prev = Some(traj);
        n *= 2;
    }
    Err(Error::Convergence(format!("matrix engine did not settle within {} halvings", config.max_refinements)))
}

fn matrix_run(
    h_at: &dyn Fn(f64) -> Result<DMatrix<C64>>,
    psi0: &StateVector,
    grid: &[f64],
    config: &EngineConfig,
) -> Result<Trajectory> {
    let mut psi = psi0.amplitudes().clone();
    let mut states = Vec::with_capacity(grid.len());
    let mut delta_e = Vec::with_capacity(grid.len());
    let mut h_now = h_at(grid[0])?;
    delta_e.push(variance_raw(&psi, &h_now)?.sqrt());
    states.push(StateVector::from_raw(psi.clone()));
    for w in grid.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let h = t1 - t0;
        let h1 = h_at(t0 + (0.5 - GAUSS_OFFSET) * h)?;
        let h2 = h_at(t0 + (0.5 + GAUSS_OFFSET) * h)?;
        let comm = linalg::commutator(&h2, &h1);
        let h_eff = (&h1 + &h2) * C64::new(0.5, 0.0) - comm * C64::new(0.0, SQRT3_12 * h);
        let h_eff = (&h_eff + h_eff.adjoint()) * C64::new(0.5, 0.0);
        psi = linalg::expm_hermitian(&h_eff, h) * psi;
        if config.renormalize {
            let norm = psi.norm();
            psi /= C64::new(norm, 0.0);
        }
        h_now = h_at(t1)?;
        delta_e.push(variance_raw(&psi, &h_now)?.sqrt());
        states.push(StateVector::from_raw(psi.clone()));
    }
    let cumulative_length = cumulative_trapezoid(grid, &delta_e);
    Ok(Trajectory { times: grid.to_vec(), states: TrajectoryStates::Vectors(states), delta_e, cumulative_length })
}

/// Adaptive RK4 (step doubling) for the coherent-state center
/// `μ̇_c = −iω(μ_c − λ_c(t))` together with its Fubini–Study arc length.
pub fn evolve_coherent(
    family: &ShiftedOscillatorFamily,
    protocol: &Protocol,
    mu0: [f64; 2],
    duration: f64,
    config: &EngineConfig,
) -> Result<Trajectory> {
    config.validate()?;
    check_duration(protocol, duration)?;
    let omega = family.omega;
    let sign = config.sign();
    let s2 = std::f64::consts::SQRT_2;
    let lambda_c = |t: f64| -> Result<C64> {
        let p = protocol.at(t)?;
        Ok(C64::new(p[0], p[1]) / s2)
    };
    // y = (Re μ_c, Im μ_c, ℓ)
    let rhs = |t: f64, y: [f64; 3]| -> Result<[f64; 3]> {
        let mu = C64::new(y[0], y[1]);
        let dmu = C64::new(0.0, -sign * omega) * (mu - lambda_c(t)?);
        Ok([dmu.re, dmu.im, dmu.norm()])
    };
    let rk4 = |t: f64, y: [f64; 3], h: f64| -> Result<[f64; 3]> {
        let add = |a: [f64; 3], b: [f64; 3], k: f64| [a[0] + k * b[0], a[1] + k * b[1], a[2] + k * b[2]];
        let k1 = rhs(t, y)?;
        let k2 = rhs(t + 0.5 * h, add(y, k1, 0.5 * h))?;
        let k3 = rhs(t + 0.5 * h, add(y, k2, 0.5 * h))?;
        let k4 = rhs(t + h, add(y, k3, h))?;
        Ok([0, 1, 2].map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])))
    };
    let knots = protocol.knots(duration);
    let max_step = config.max_step.unwrap_or(f64::INFINITY);
    let mut t = 0.0;
    let mut y = [mu0[0] / s2, mu0[1] / s2, 0.0];
    let mut h = (duration / 64.0).min(max_step);
    let record = |t: f64, y: &[f64; 3]| -> Result<(f64, [f64; 2], f64, f64)> {
        let mu = C64::new(y[0], y[1]);
        let de = omega * (mu - lambda_c(t)?).norm();
        Ok((t, [s2 * y[0], s2 * y[1]], de, y[2]))
    };
    let mut rows = vec![record(t, &y)?];
    let mut knot = 1;
    while t < duration {
        let target = knots[knot];
        let mut step = h.min(max_step);
        let lands = t + step >= target - 1e-14 * duration;
        if lands {
            step = target - t;
        }
        let big = rk4(t, y, step)?;
        let mid = rk4(t, y, 0.5 * step)?;
        let small = rk4(t + 0.5 * step, mid, 0.5 * step)?;
        let err = (0..3).map(|i| (small[i] - big[i]).abs()).fold(0.0, f64::max) / 15.0;
        let scale = y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let tol = config.atol + config.rtol * scale;
        let factor = if err == 0.0 { 5.0 } else { 0.9 * (tol / err).powf(0.2) };
        if err <= tol {
            y = [0, 1, 2].map(|i| small[i] + (small[i] - big[i]) / 15.0);
            t = if lands { target } else { t + step };
            if lands {
                knot += 1;
            }
            rows.push(record(t, &y)?);
            h = step * factor.min(5.0);
            if lands && h < step {
                h = step;
            }
        } else {
            h = step * factor.max(0.1);
            if h < 1e-14 * duration {
                return Err(Error::Convergence("coherent step size underflow".into()));
            }
        }
        if knot >= knots.len() {
            break;
        }
    }
    let times = rows.iter().map(|r| r.0).collect();
    let states = TrajectoryStates::Coherent(rows.iter().map(|r| r.1).collect());
    let delta_e = rows.iter().map(|r| r.2).collect();
    let cumulative_length = rows.iter().map(|r| r.3).collect();
    Ok(Trajectory { times, states, delta_e, cumulative_length })
}

/// Covariance matrix of the squeezed vacuum `ψ0(r, θ)` in `(q, p)`.
pub fn covariance(r: f64, theta: f64) -> Matrix2<f64> {
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    let (sn, cs) = theta.sin_cos();
    0.5 * Matrix2::new(c - s * cs, -s * sn, -s * sn, c + s * cs)
}

/// `(r, θ)` of a pure squeezed-vacuum covariance, `θ ∈ (−π, π]`.
pub fn squeezing_coordinates(v: &Matrix2<f64>) -> (f64, f64) {
    let x = v[(1, 1)] - v[(0, 0)];
    let y = -(v[(0, 1)] + v[(1, 0)]);
    (0.5 * x.hypot(y).asinh(), y.atan2(x))
}

/// Quadratic form `M` with `Ĥ(r,θ) = ½ xᵀ M x`, `x = (q, p)`.
pub fn quadratic_form(omega: f64, r: f64, theta: f64) -> Matrix2<f64> {
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    let (sn, cs) = theta.sin_cos();
    omega * Matrix2::new(c + s * cs, s * sn, s * sn, c - s * cs)
}

fn symplectic() -> Matrix2<f64> {
    Matrix2::new(0.0, 1.0, -1.0, 0.0)
}

fn expm_traceless(x: &Matrix2<f64>) -> Matrix2<f64> {
    let delta = -x.determinant();
    let (c, k) = if delta > 1e-16 {
        let q = delta.sqrt();
        (q.cosh(), q.sinh() / q)
    } else if delta < -1e-16 {
        let q = (-delta).sqrt();
        (q.cos(), q.sin() / q)
    } else {
        (1.0 + 0.5 * delta, 1.0 + delta / 6.0)
    };
    Matrix2::identity() * c + x * k
}

/// `V(t) = S V Sᵀ` with `S = exp(Ω M t)` for a constant quadratic form.
pub fn propagate_constant(v: &Matrix2<f64>, m: &Matrix2<f64>, t: f64) -> Matrix2<f64> {
    let s = expm_traceless(&(symplectic() * m * t));
    s * v * s.transpose()
}

/// `Var Ĥ = ½ Tr((MV)²) + ⅛ Tr((MΩ)²)` for a Gaussian state with covariance `V`.
pub fn gaussian_energy_variance(v: &Matrix2<f64>, m: &Matrix2<f64>) -> f64 {
    let mv = m * v;
    let mo = m * symplectic();
    0.5 * (mv * mv).trace() + 0.125 * (mo * mo).trace()
}

// Fubini–Study speed from V̇ via ds² = ⅛(dX² + dY²) − ⅛(d tr V)²
fn gaussian_speed(v: &Matrix2<f64>, a: &Matrix2<f64>) -> f64 {
    let vdot = a * v + v * a.transpose();
    let dx = vdot[(1, 1)] - vdot[(0, 0)];
    let dy = -(vdot[(0, 1)] + vdot[(1, 0)]);
    let dtr = vdot.trace();
    (0.125 * (dx * dx + dy * dy - dtr * dtr)).max(0.0).sqrt()
}

/// Symplectic two-point Magnus stepping of the squeezed-vacuum covariance.
pub fn evolve_gaussian(
    family: &SqueezedOscillatorFamily,
    protocol: &Protocol,
    state0: [f64; 2],
    duration: f64,
    config: &EngineConfig,
) -> Result<Trajectory> {
    config.validate()?;
    check_duration(protocol, duration)?;
    if state0[0] < 0.0 {
        return Err(Error::InvalidParameter(format!("initial squeezing r={} must be >= 0", state0[0])));
    }
    let sign = config.sign();
    let omega = family.omega;
    let gen = |t: f64| -> Result<Matrix2<f64>> {
        let p = protocol.at(t)?;
        Ok(sign * symplectic() * quadratic_form(omega, p[0], p[1]))
    };
    let knots = protocol.knots(duration);
    let mut n = initial_steps(&knots, duration, config);
    let mut prev: Option<Trajectory> = None;
    for _ in 0..=config.max_refinements {
        let traj = gaussian_run(&gen, state0, &time_grid(&knots, n))?;
        if let Some(p) = &prev {
            let a = traj.final_coordinates().unwrap();
            let b = p.final_coordinates().unwrap();
            let dstate = squeezed_fs_distance(a, b);
            let dl = (traj.l_e() - p.l_e()).abs();
            if dstate <= config.rtol + config.atol && dl <= config.observable_tol * traj.l_e().max(1.0) {
                log::debug!("gaussian engine converged with {} steps", traj.len() - 1);
                return Ok(traj);
            }
        }
        prev = Some(traj);
        n *= 2;
    }
    Err(Error::Convergence(format!("gaussian engine did not settle within {} halvings", config.max_refinements)))
}

fn gaussian_run(
    gen: &dyn Fn(f64) -> Result<Matrix2<f64>>,
    state0: [f64; 2],
    grid: &[f64],
) -> Result<Trajectory> {
    let mut v = covariance(state0[0], state0[1]);
    let mut coords = Vec::with_capacity(grid.len());
    let mut delta_e = Vec::with_capacity(grid.len());
    coords.push(state0);
    delta_e.push(gaussian_speed(&v, &gen(grid[0])?));
    for w in grid.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let h = t1 - t0;
        let a1 = gen(t0 + (0.5 - GAUSS_OFFSET) * h)?;
        let a2 = gen(t0 + (0.5 + GAUSS_OFFSET) * h)?;
        let x = (a1 + a2) * (0.5 * h) + (a2 * a1 - a1 * a2) * (SQRT3_12 * h * h);
        let s = expm_traceless(&x);
        v = s * v * s.transpose();
        check_covariance(&v, t1)?;
        v = 0.5 * (v + v.transpose());
        let (r, th) = squeezing_coordinates(&v);
        let prev = coords.last().unwrap()[1];
        // θ is undefined at r = 0; keep the previous branch there
        let th = if r > 1e-12 { linalg::unwrap_near(th, prev) } else { prev };
        coords.push([r, th]);
        delta_e.push(gaussian_speed(&v, &gen(t1)?));
    }
    let cumulative_length = cumulative_trapezoid(grid, &delta_e);
    Ok(Trajectory { times: grid.to_vec(), states: TrajectoryStates::Squeezed(coords), delta_e, cumulative_length })
}

fn check_covariance(v: &Matrix2<f64>, t: f64) -> Result<()> {
    let scale = v.abs().max();
    if (v[(0, 1)] - v[(1, 0)]).abs() > 1e-9 * scale {
        return Err(Error::Numerical(format!("covariance lost symmetry at t={t}")));
    }
    if !(v[(0, 0)] > 0.0 && v[(1, 1)] > 0.0) {
        return Err(Error::Numerical(format!("covariance lost positivity at t={t}")));
    }
    let purity = (4.0 * v.determinant() - 1.0).abs();
    if purity > 1e-9 {
        return Err(Error::Numerical(format!("purity violation |det(2V) - 1| = {purity:e} at t={t}")));
    }
    Ok(())
}

/// Fock-basis state of a coordinate record, for cross-checks.
pub fn coordinate_state(states: &TrajectoryStates, i: usize, n_max: usize) -> Option<StateVector> {
    let amps = match states {
        TrajectoryStates::Vectors(v) => return Some(v[i].clone()),
        TrajectoryStates::Coherent(v) => fock::coherent_amplitudes(fock::coherent_alpha(v[i][0], v[i][1]), n_max),
        TrajectoryStates::Squeezed(v) => fock::squeezed_amplitudes(v[i][0], v[i][1], n_max),
    };
    StateVector::normalized(DVector::from_vec(amps)).ok()
}
