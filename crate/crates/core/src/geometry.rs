//! Quantum geometric tensor, Fubini–Study metrics, path lengths and distances.

use std::cell::RefCell;
use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{fock, ControlPoint, Family, LinearFamily, StateVector, C64};
use crate::quad;

pub const DEFAULT_FD_STEP: f64 = 1e-4;
const MIN_STEP: f64 = 1e-6;
const MAX_STEP: f64 = 1e-2;
const PATH_RTOL: f64 = 1e-8;

/// Fubini–Study metric `g_{μν}` at a control point.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricTensor {
    g: DMatrix<f64>,
}

impl MetricTensor {
    pub fn new(g: DMatrix<f64>) -> Result<Self> {
        if !g.is_square() {
            return Err(Error::InvalidParameter("metric must be square".into()));
        }
        let asym = (&g - g.transpose()).abs().max();
        if asym > 1e-10 * g.abs().max().max(1.0) {
            return Err(Error::Numerical(format!("metric not symmetric (defect {asym:e})")));
        }
        let min_eig = g.clone().symmetric_eigen().eigenvalues.min();
        if min_eig < -1e-10 * g.abs().max().max(1.0) {
            return Err(Error::Numerical(format!("metric not positive semidefinite (eigenvalue {min_eig:e})")));
        }
        Ok(Self { g })
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        Self { g: DMatrix::from_diagonal(&DVector::from_column_slice(d)) }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// `g_{μν} v^μ v^ν`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        let v = DVector::from_column_slice(v);
        (v.transpose() * &self.g * &v)[(0, 0)]
    }

    /// Largest absolute entry of the difference.
    pub fn max_deviation(&self, other: &MetricTensor) -> f64 {
        (&self.g - &other.g).abs().max()
    }
}

/// Quantum geometric tensor `χ_{μν}`.
#[derive(Clone, Debug, PartialEq)]
pub struct QgTensor {
    chi: DMatrix<C64>,
}

impl QgTensor {
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.chi
    }

    pub fn metric(&self) -> MetricTensor {
        let g = self.chi.map(|c| c.re);
        MetricTensor { g: 0.5 * (&g + g.transpose()) }
    }

    /// `Im χ`, antisymmetric.
    pub fn imaginary(&self) -> DMatrix<f64> {
        self.chi.map(|c| c.im)
    }

    /// Largest absolute entry of the difference.
    pub fn max_deviation(&self, other: &QgTensor) -> f64 {
        (&self.chi - &other.chi).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// States at `λ ± h e_μ` and `λ ± (h/2) e_μ` around a center state.
#[derive(Clone, Debug)]
pub struct Stencil {
    pub step: f64,
    pub center: StateVector,
    /// Per axis: `[+h, −h, +h/2, −h/2]`.
    pub axes: Vec<[StateVector; 4]>,
}

/// Sample the ground states needed for [`qgt_from_stencil`].
pub fn sample_stencil(family: &Family, point: &ControlPoint, step: f64) -> Result<Stencil> {
    if !(MIN_STEP..=MAX_STEP).contains(&step) {
        return Err(Error::InvalidParameter(format!(
            "finite-difference step {step} outside [{MIN_STEP}, {MAX_STEP}]"
        )));
    }
    family.validate(point)?;
    let n_max = stencil_truncation(family, point, step);
    if !family.is_oscillator() {
        let spec = family.spectrum(point, None)?;
        if spec.gap < crate::model::DEGENERACY_TOL {
            return Err(Error::Degenerate { gap: spec.gap });
        }
    }
    let center = family.ground_state(point, n_max)?;
    let axes = (0..family.control_dim())
        .map(|mu| {
            [step, -step, 0.5 * step, -0.5 * step]
                .map(|d| family.ground_state_unchecked(&point.shifted(mu, d), n_max))
        })
        .collect();
    Ok(Stencil { step, center, axes })
}

fn stencil_truncation(family: &Family, point: &ControlPoint, step: f64) -> Option<usize> {
    match family {
        Family::ShiftedOscillator(_) => {
            let a = point[0].abs().hypot(point[1].abs()) + 2.0 * step;
            Some(fock::coherent_truncation(0.5 * a * a, fock::DEFAULT_TAIL) + 4)
        }
        Family::SqueezedOscillator(_) => {
            Some(fock::squeezed_truncation(point[0].abs() + step, fock::DEFAULT_TAIL) + 4)
        }
        _ => None,
    }
}

/// Projector-form tensor `χ_{μν} = ⟨∂_μP ψ|∂_νP ψ⟩` from central differences
/// of `P = |ψ⟩⟨ψ|`, Richardson-extrapolated over `h` and `h/2`.
pub fn qgt_from_stencil(st: &Stencil) -> QgTensor {
    let psi = &st.center;
    let h = st.step;
    let tangent = |plus: &StateVector, minus: &StateVector, h: f64| -> DVector<C64> {
        let a = plus.amplitudes() * plus.overlap(psi);
        let b = minus.amplitudes() * minus.overlap(psi);
        (a - b) / C64::new(2.0 * h, 0.0)
    };
    let us: Vec<DVector<C64>> = st
        .axes
        .iter()
        .map(|[p, m, p2, m2]| {
            let coarse = tangent(p, m, h);
            let fine = tangent(p2, m2, 0.5 * h);
            (fine * C64::new(4.0, 0.0) - coarse) / C64::new(3.0, 0.0)
        })
        .collect();
    let p = us.len();
    let chi = DMatrix::from_fn(p, p, |i, j| us[i].dotc(&us[j]));
    QgTensor { chi: (&chi + chi.adjoint()) * C64::new(0.5, 0.0) }
}

/// Finite-difference quantum geometric tensor of the ground-state family.
pub fn qgt_finite_difference(family: &Family, point: &ControlPoint, step: f64) -> Result<QgTensor> {
    Ok(qgt_from_stencil(&sample_stencil(family, point, step)?))
}

/// Sum-over-states tensor `Σ_{k≠0} ⟨0|K_μ|k⟩⟨k|K_ν|0⟩ / (E_k − E_0)²` of an
/// affine family.
pub fn perturbative_qgt(family: &LinearFamily, point: &ControlPoint) -> Result<QgTensor> {
    let f = Family::Linear(family.clone());
    let h = f.hamiltonian_matrix(point, None)?;
    let (e, v) = h.eigh();
    if e[1] - e[0] < crate::model::DEGENERACY_TOL {
        return Err(Error::Degenerate { gap: e[1] - e[0] });
    }
    let v0 = v.column(0).into_owned();
    // rows: k, columns: μ; entry ⟨k|K_μ|0⟩ / (E_k − E_0)
    let d = e.len();
    let p = family.generators.len();
    let amps = DMatrix::from_fn(d - 1, p, |k, mu| {
        let vk = v.column(k + 1);
        let kv0 = family.generators[mu].matrix() * &v0;
        vk.dotc(&kv0) / C64::new(e[k + 1] - e[0], 0.0)
    });
    let chi = amps.adjoint() * &amps;
    Ok(QgTensor { chi: (&chi + chi.adjoint()) * C64::new(0.5, 0.0) })
}

/// Closed-form metric (qutrit and generic affine families through
/// [`perturbative_qgt`]).
pub fn analytic_metric(family: &Family, point: &ControlPoint) -> Result<MetricTensor> {
    family.validate(point)?;
    Ok(match family {
        Family::Qubit(_) => MetricTensor::from_diagonal(&[0.25, 0.25 * point[0].sin().powi(2)]),
        Family::ShiftedOscillator(_) => MetricTensor::from_diagonal(&[0.5, 0.5]),
        Family::SqueezedOscillator(_) => {
            MetricTensor::from_diagonal(&[0.5, (2.0 * point[0]).sinh().powi(2) / 8.0])
        }
        Family::Qutrit(f) => perturbative_qgt(&f.as_linear(), point)?.metric(),
        Family::Linear(f) => perturbative_qgt(f, point)?.metric(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricSource {
    Analytic,
    FiniteDifference,
}

pub fn metric_at(family: &Family, point: &ControlPoint, source: MetricSource) -> Result<MetricTensor> {
    match source {
        MetricSource::Analytic => analytic_metric(family, point),
        MetricSource::FiniteDifference => {
            Ok(qgt_finite_difference(family, point, DEFAULT_FD_STEP)?.metric())
        }
    }
}

/// Time-stamped samples of a control path `λ(t)`, linearly interpolated.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamPath {
    samples: Vec<(f64, ControlPoint)>,
}

impl ParamPath {
    pub fn new(samples: Vec<(f64, ControlPoint)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidParameter("a path needs at least two samples".into()));
        }
        if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidParameter("path times must increase strictly".into()));
        }
        let p = samples[0].1.dim();
        if samples.iter().any(|(_, x)| x.dim() != p) {
            return Err(Error::InvalidParameter("path samples differ in dimension".into()));
        }
        Ok(Self { samples })
    }

    /// Sample `curve` at `n + 1` equally spaced times on `[t0, t1]`.
    pub fn from_fn(t0: f64, t1: f64, n: usize, curve: impl Fn(f64) -> ControlPoint) -> Result<Self> {
        let n = n.max(1);
        Self::new(
            (0..=n)
                .map(|k| {
                    let t = t0 + (t1 - t0) * k as f64 / n as f64;
                    (t, curve(t))
                })
                .collect(),
        )
    }

    pub fn samples(&self) -> &[(f64, ControlPoint)] {
        &self.samples
    }

    pub fn concat(&self, other: &ParamPath) -> Result<Self> {
        let mut samples = self.samples.clone();
        let (t_end, x_end) = samples.last().cloned().expect("non-empty path");
        let (t_start, x_start) = &other.samples[0];
        if x_start != &x_end {
            return Err(Error::InvalidParameter("paths do not join".into()));
        }
        let shift = t_end - t_start;
        samples.extend(other.samples[1..].iter().map(|(t, x)| (t + shift, x.clone())));
        Self::new(samples)
    }
}

/// `∫ √(g_{μν} dλ^μ dλ^ν)` along the piecewise-linear path, refined per
/// segment until successive trapezoid sums agree to 1e-8 relative.
pub fn path_length(family: &Family, path: &ParamPath, source: MetricSource) -> Result<f64> {
    let mut total = 0.0;
    for w in path.samples.windows(2) {
        let a = w[0].1.coords();
        let b = w[1].1.coords();
        let delta: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
        if delta.iter().all(|d| *d == 0.0) {
            continue;
        }
        let speed = |u: f64| -> Result<f64> {
            let x = ControlPoint::new(a.iter().zip(&delta).map(|(x, d)| x + u * d).collect());
            Ok(metric_at(family, &x, source)?.quadratic_form(&delta).max(0.0).sqrt())
        };
        let mut m = 1usize;
        let mut values = vec![speed(0.0)?, speed(1.0)?];
        let mut prev = 0.5 * (values[0] + values[1]);
        loop {
            // midpoints of the current panels
            let mut next = Vec::with_capacity(2 * m + 1);
            for (k, v) in values[..m].iter().enumerate() {
                next.push(*v);
                next.push(speed((2 * k + 1) as f64 / (2 * m) as f64)?);
            }
            next.push(values[m]);
            values = next;
            m *= 2;
            let interior: f64 = values[1..m].iter().sum();
            let est = (0.5 * (values[0] + values[m]) + interior) / m as f64;
            if (est - prev).abs() <= PATH_RTOL * est.abs().max(f64::MIN_POSITIVE) || est == 0.0 {
                total += est;
                break;
            }
            if m > 1 << 20 {
                return Err(Error::Convergence("path length quadrature did not settle".into()));
            }
            prev = est;
        }
    }
    Ok(total)
}

/// Length of a smooth curve `λ(t)` with velocity `λ'(t)`, integrated
/// piecewise between `knots`.
pub fn curve_length(
    family: &Family,
    curve: &dyn Fn(f64) -> ControlPoint,
    velocity: &dyn Fn(f64) -> Vec<f64>,
    knots: &[f64],
    source: MetricSource,
) -> Result<f64> {
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let speed = |t: f64| -> f64 {
        match metric_at(family, &curve(t), source) {
            Ok(g) => g.quadratic_form(&velocity(t)).max(0.0).sqrt(),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let value = quad::integrate_pieces(speed, knots, 1e-11);
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// Global Fubini–Study distance `arccos |⟨ψ1|ψ2⟩|`.
pub fn fs_distance(psi1: &StateVector, psi2: &StateVector) -> f64 {
    let ov = psi1.overlap(psi2);
    let perp12 = (psi2.amplitudes() - psi1.amplitudes() * ov).norm();
    let perp21 = (psi1.amplitudes() - psi2.amplitudes() * ov.conj()).norm();
    (0.5 * (perp12 + perp21)).atan2(ov.norm().min(1.0))
}

/// Distance in the flat coherent-state metric `½(dμ_q² + dμ_p²)`.
pub fn geodesic_distance_coherent(mu1: [f64; 2], mu2: [f64; 2]) -> f64 {
    (mu1[0] - mu2[0]).hypot(mu1[1] - mu2[1]) / SQRT_2
}

/// Hyperbolic distance between squeezed vacua `(r, θ)`.
pub fn geodesic_distance_squeezed(p1: (f64, f64), p2: (f64, f64)) -> Result<f64> {
    if p1.0 < 0.0 || p2.0 < 0.0 {
        return Err(Error::InvalidParameter("squeezing r must be >= 0".into()));
    }
    let w1 = C64::from_polar(p1.0.tanh(), p1.1);
    let w2 = C64::from_polar(p2.0.tanh(), p2.1);
    let x = (w1 - w2).norm() / (C64::new(1.0, 0.0) - w1.conj() * w2).norm();
    if x >= 1.0 {
        return Err(Error::Numerical("points at the disk boundary".into()));
    }
    Ok(x.min(1.0 - 1e-15).atanh() / SQRT_2)
}

/// Which way around a circle the shorter arc runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArcDirection {
    Counterclockwise,
    Clockwise,
}

/// Signed angular step of the shorter arc from `a1` to `a2`; at exactly half
/// a turn the counterclockwise arc is chosen.
pub fn shorter_arc(a1: f64, a2: f64) -> (f64, ArcDirection) {
    let ccw = (a2 - a1).rem_euclid(2.0 * PI);
    if ccw <= PI {
        (ccw, ArcDirection::Counterclockwise)
    } else {
        (ccw - 2.0 * PI, ArcDirection::Clockwise)
    }
}

/// In-manifold distance along the circular control space with the radial
/// coordinate held at `fixed` (qubit `Λ_θ`, squeezed `Λ_r`).
pub fn arc_distance_in_control_circle(family: &Family, fixed: f64, angle1: f64, angle2: f64) -> Result<f64> {
    let speed = match family {
        Family::Qubit(_) => {
            family.validate(&ControlPoint::new(vec![fixed, angle1]))?;
            0.5 * fixed.sin()
        }
        Family::SqueezedOscillator(_) => {
            family.validate(&ControlPoint::new(vec![fixed, angle1]))?;
            (2.0 * fixed).sinh() / (2.0 * SQRT_2)
        }
        _ => return Err(Error::Unsupported("family has no circular control space".into())),
    };
    Ok(shorter_arc(angle1, angle2).0.abs() * speed)
}

/// Fubini–Study speed of the circle `angle ↦ (fixed, angle)` at unit angular rate.
pub fn circle_speed(family: &Family, fixed: f64) -> Result<f64> {
    arc_distance_in_control_circle(family, fixed, 0.0, 1.0)
}
