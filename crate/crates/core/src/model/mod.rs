//! Hamiltonian families, their ground states and spectra.

pub mod fock;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

pub use fock::{displacement_fock, squeeze_fock};

pub type C64 = Complex64;

/// Gap below which a ground state counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// A point `λ ∈ Λ` in a family's control chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ControlPoint {
    coords: Vec<f64>,
}

impl ControlPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub(crate) fn shifted(&self, axis: usize, delta: f64) -> Self {
        let mut coords = self.coords.clone();
        coords[axis] += delta;
        Self { coords }
    }
}

impl std::ops::Index<usize> for ControlPoint {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

impl From<f64> for ControlPoint {
    fn from(x: f64) -> Self {
        Self::new(vec![x])
    }
}

impl<const N: usize> From<[f64; N]> for ControlPoint {
    fn from(x: [f64; N]) -> Self {
        Self::new(x.to_vec())
    }
}

impl From<Vec<f64>> for ControlPoint {
    fn from(x: Vec<f64>) -> Self {
        Self::new(x)
    }
}

/// A normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: DVector<C64>,
}

impl StateVector {
    pub const NORM_TOL: f64 = 1e-10;

    pub fn new(amps: DVector<C64>) -> Result<Self> {
        let norm = amps.norm();
        if (norm - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amps })
    }

    /// Normalize arbitrary nonzero amplitudes.
    pub fn normalized(amps: DVector<C64>) -> Result<Self> {
        let norm = amps.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amps: amps / C64::new(norm, 0.0) })
    }

    pub fn from_slice(amps: &[C64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(amps))
    }

    pub(crate) fn from_raw(amps: DVector<C64>) -> Self {
        Self { amps }
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &StateVector) -> C64 {
        self.amps.dotc(&other.amps)
    }

    /// Multiply by a global phase `e^{iφ}`.
    pub fn with_phase(mut self, phi: f64) -> Self {
        self.amps *= C64::from_polar(1.0, phi);
        self
    }

    /// Make the first amplitude with modulus above 1e-12 real and positive.
    pub fn gauge_fixed(mut self) -> Self {
        if let Some(c) = self.amps.iter().find(|c| c.norm() > 1e-12).copied() {
            self.amps *= c.conj() / c.norm();
        }
        self
    }
}

/// Finite Hermitian matrix `Ĥ(λ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseHamiltonian {
    matrix: DMatrix<C64>,
}

impl DenseHamiltonian {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidParameter(format!(
                "Hamiltonian must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let defect = linalg::hermiticity_defect(&matrix);
        if defect > 1e-12 * matrix.norm().max(f64::MIN_POSITIVE) {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self { matrix })
    }

    pub fn from_real(rows: usize, data: &[f64]) -> Result<Self> {
        let m = DMatrix::from_row_slice(rows, rows, data).map(|x| C64::new(x, 0.0));
        Self::new(m)
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Ascending eigenvalues and matching eigenvectors as columns.
    pub fn eigh(&self) -> (Vec<f64>, DMatrix<C64>) {
        linalg::eigh(&self.matrix)
    }

    pub fn apply(&self, psi: &StateVector) -> DVector<C64> {
        &self.matrix * psi.amplitudes()
    }

    pub fn expectation(&self, psi: &StateVector) -> f64 {
        psi.amplitudes().dotc(&self.apply(psi)).re
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self { matrix: &self.matrix * C64::new(k, 0.0) }
    }
}

/// Ordered spectrum with the ground-state gap.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub gap: f64,
}

/// `Ĥ(θ,φ) = -(ω/2) n(θ,φ)·σ`, controlled on the 2-D chart `(θ, φ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitFamily {
    pub omega: f64,
    /// Polar angle of the circular control space `Λ_θ`.
    pub theta: f64,
}

impl QubitFamily {
    pub fn new(omega: f64, theta: f64) -> Result<Self> {
        if !omega.is_finite() || !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidParameter(format!(
                "qubit needs finite omega and theta in [0, pi], got omega={omega}, theta={theta}"
            )));
        }
        Ok(Self { omega, theta })
    }

    /// The point `(θ, φ)` on the family's control circle.
    pub fn circle_point(&self, phi: f64) -> ControlPoint {
        ControlPoint::new(vec![self.theta, phi])
    }

    /// `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
    pub fn manifold_state(theta: f64, phi: f64) -> StateVector {
        StateVector::from_raw(DVector::from_vec(vec![
            C64::new((0.5 * theta).cos(), 0.0),
            C64::from_polar((0.5 * theta).sin(), phi),
        ]))
    }

    fn matrix(&self, theta: f64, phi: f64) -> DMatrix<C64> {
        let h = -0.5 * self.omega;
        let (st, ct) = theta.sin_cos();
        DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(h * ct, 0.0),
                C64::from_polar(h * st, -phi),
                C64::from_polar(h * st, phi),
                C64::new(-h * ct, 0.0),
            ],
        )
    }

    fn ground_raw(&self, theta: f64, phi: f64) -> StateVector {
        if self.omega > 0.0 {
            Self::manifold_state(theta, phi)
        } else {
            Self::manifold_state(PI - theta, phi + PI)
        }
    }
}

/// `Ĥ(λ) = Ĥ0 + λK̂` on a qutrit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QutritFamily {
    pub omega: f64,
    pub a: f64,
}

impl QutritFamily {
    pub fn new(omega: f64, a: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite() && a.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "qutrit needs omega > 0 and finite a, got omega={omega}, a={a}"
            )));
        }
        Ok(Self { omega, a })
    }

    pub fn h0(&self) -> DMatrix<C64> {
        DMatrix::from_diagonal(&DVector::from_vec(vec![
            C64::new(-self.omega, 0.0),
            C64::default(),
            C64::new(self.omega, 0.0),
        ]))
    }

    pub fn k(&self) -> DMatrix<C64> {
        let i = C64::new(0.0, 1.0);
        let z = C64::default();
        DMatrix::from_row_slice(3, 3, &[z, i, z, -i, z, i * self.a, z, -i * self.a, z])
    }

    pub fn as_linear(&self) -> LinearFamily {
        LinearFamily {
            h0: DenseHamiltonian { matrix: self.h0() },
            generators: vec![DenseHamiltonian { matrix: self.k() }],
        }
    }

    /// Unnormalized eigenvector `(a²λ² + μ(ω−μ), −iλ(ω−μ), aλ²)` for eigenvalue `μ`.
    pub fn eigenvector_formula(&self, lambda: f64, mu: f64) -> DVector<C64> {
        let (w, a) = (self.omega, self.a);
        DVector::from_vec(vec![
            C64::new(a * a * lambda * lambda + mu * (w - mu), 0.0),
            C64::new(0.0, -lambda * (w - mu)),
            C64::new(a * lambda * lambda, 0.0),
        ])
    }

    /// Discriminant of `μ³ − (λ²+a²λ²+ω²)μ + (1−a²)λ²ω`.
    pub fn discriminant(&self, lambda: f64) -> f64 {
        let p = -(lambda * lambda * (1.0 + self.a * self.a) + self.omega * self.omega);
        let q = lambda * lambda * self.omega * (1.0 - self.a * self.a);
        -4.0 * p * p * p - 27.0 * q * q
    }
}

/// `Ĥ(λ) = (ω/2)((q̂−λ_q)² + (p̂−λ_p)²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftedOscillatorFamily {
    pub omega: f64,
}

impl ShiftedOscillatorFamily {
    pub fn new(omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter(format!("oscillator needs omega > 0, got {omega}")));
        }
        Ok(Self { omega })
    }
}

/// `Ĥ(r,θ) = Ŝ_z Ĥ0 Ŝ_z†` with `z = r e^{iθ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezedOscillatorFamily {
    pub omega: f64,
}

impl SqueezedOscillatorFamily {
    pub fn new(omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter(format!("oscillator needs omega > 0, got {omega}")));
        }
        Ok(Self { omega })
    }
}

/// Generic affine family `Ĥ0 + Σ_k λ_k K̂_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearFamily {
    pub h0: DenseHamiltonian,
    pub generators: Vec<DenseHamiltonian>,
}

impl LinearFamily {
    pub fn new(h0: DenseHamiltonian, generators: Vec<DenseHamiltonian>) -> Result<Self> {
        if generators.iter().any(|k| k.dim() != h0.dim()) {
            return Err(Error::InvalidParameter("generator dimensions differ from H0".into()));
        }
        Ok(Self { h0, generators })
    }

    fn matrix(&self, point: &[f64]) -> DMatrix<C64> {
        let mut m = self.h0.matrix.clone();
        for (k, lam) in self.generators.iter().zip(point) {
            m += &k.matrix * C64::new(*lam, 0.0);
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Qubit(QubitFamily),
    Qutrit(QutritFamily),
    ShiftedOscillator(ShiftedOscillatorFamily),
    SqueezedOscillator(SqueezedOscillatorFamily),
    Linear(LinearFamily),
}

impl From<QubitFamily> for Family {
    fn from(f: QubitFamily) -> Self {
        Family::Qubit(f)
    }
}
impl From<QutritFamily> for Family {
    fn from(f: QutritFamily) -> Self {
        Family::Qutrit(f)
    }
}
impl From<ShiftedOscillatorFamily> for Family {
    fn from(f: ShiftedOscillatorFamily) -> Self {
        Family::ShiftedOscillator(f)
    }
}
impl From<SqueezedOscillatorFamily> for Family {
    fn from(f: SqueezedOscillatorFamily) -> Self {
        Family::SqueezedOscillator(f)
    }
}
impl From<LinearFamily> for Family {
    fn from(f: LinearFamily) -> Self {
        Family::Linear(f)
    }
}

impl Family {
    /// Control-space dimension `p`.
    pub fn control_dim(&self) -> usize {
        match self {
            Family::Qubit(_) | Family::ShiftedOscillator(_) | Family::SqueezedOscillator(_) => 2,
            Family::Qutrit(_) => 1,
            Family::Linear(f) => f.generators.len(),
        }
    }

    /// Which chart coordinates are 2π-periodic angles.
    pub fn angular_axes(&self) -> Vec<bool> {
        match self {
            Family::Qubit(_) | Family::SqueezedOscillator(_) => vec![false, true],
            _ => vec![false; self.control_dim()],
        }
    }

    pub fn is_oscillator(&self) -> bool {
        matches!(self, Family::ShiftedOscillator(_) | Family::SqueezedOscillator(_))
    }

    /// Energy scale `ω` of the closed-form families.
    pub fn omega(&self) -> Option<f64> {
        match self {
            Family::Qubit(f) => Some(f.omega),
            Family::Qutrit(f) => Some(f.omega),
            Family::ShiftedOscillator(f) => Some(f.omega),
            Family::SqueezedOscillator(f) => Some(f.omega),
            Family::Linear(_) => None,
        }
    }

    pub fn validate(&self, point: &ControlPoint) -> Result<()> {
        let expected = self.control_dim();
        if point.dim() != expected {
            return Err(Error::DimensionMismatch { expected, got: point.dim() });
        }
        if point.coords().iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidPoint(format!("non-finite coordinate in {:?}", point.coords())));
        }
        match self {
            Family::Qubit(_) if !(-1e-12..=PI + 1e-12).contains(&point[0]) => Err(
                Error::InvalidPoint(format!("qubit polar angle {} outside [0, pi]", point[0])),
            ),
            Family::SqueezedOscillator(_) if point[0] < 0.0 => {
                Err(Error::InvalidPoint(format!("squeezing r={} must be >= 0", point[0])))
            }
            _ => Ok(()),
        }
    }

    /// Whether two points coincide, comparing angles modulo 2π.
    pub fn points_equivalent(&self, a: &ControlPoint, b: &ControlPoint, tol: f64) -> bool {
        a.dim() == b.dim()
            && self
                .angular_axes()
                .iter()
                .zip(a.coords().iter().zip(b.coords()))
                .all(|(&ang, (x, y))| {
                    let d = if ang { linalg::wrap_pi(x - y) } else { x - y };
                    d.abs() <= tol
                })
    }

    /// Fock truncation whose ground-state tail at `point` is below 1e-15.
    pub fn default_truncation(&self, point: &ControlPoint) -> Option<usize> {
        match self {
            Family::ShiftedOscillator(_) => {
                let x = fock::coherent_alpha(point[0], point[1]).norm_sqr();
                Some(fock::coherent_truncation(x, fock::DEFAULT_TAIL))
            }
            Family::SqueezedOscillator(_) => {
                Some(fock::squeezed_truncation(point[0].abs(), fock::DEFAULT_TAIL))
            }
            _ => None,
        }
    }

    fn require_truncation(&self, n_max: Option<usize>) -> Result<usize> {
        match n_max {
            Some(n) if n >= 1 => Ok(n),
            _ => Err(Error::MissingTruncation),
        }
    }

    /// Matrix of `Ĥ(λ)`; oscillators in the number basis `n = 0..=n_max`.
    pub fn hamiltonian_matrix(&self, point: &ControlPoint, n_max: Option<usize>) -> Result<DenseHamiltonian> {
        self.validate(point)?;
        let matrix = match self {
            Family::Qubit(f) => f.matrix(point[0], point[1]),
            Family::Qutrit(f) => f.h0() + f.k() * C64::new(point[0], 0.0),
            Family::Linear(f) => f.matrix(point.coords()),
            Family::ShiftedOscillator(f) => {
                let n = self.require_truncation(n_max)?;
                shifted_matrix(f.omega, point[0], point[1], n)
            }
            Family::SqueezedOscillator(f) => {
                let n = self.require_truncation(n_max)?;
                squeezed_matrix(f.omega, point[0], point[1], n)
            }
        };
        Ok(DenseHamiltonian { matrix })
    }

    /// Gauge-fixed ground state `|ψ0(λ)⟩`.
    pub fn ground_state(&self, point: &ControlPoint, n_max: Option<usize>) -> Result<StateVector> {
        self.validate(point)?;
        match self {
            Family::Qubit(f) if f.omega == 0.0 => Err(Error::Degenerate { gap: 0.0 }),
            Family::ShiftedOscillator(_) | Family::SqueezedOscillator(_) => {
                let n = self.require_truncation(n_max)?;
                let tail = match self {
                    Family::ShiftedOscillator(_) => {
                        fock::coherent_tail(fock::coherent_alpha(point[0], point[1]).norm_sqr(), n)
                    }
                    _ => fock::squeezed_tail(point[0], n),
                };
                if tail > fock::GROUND_TAIL {
                    return Err(Error::InsufficientTruncation { n_max: n, tail });
                }
                Ok(self.ground_state_unchecked(point, Some(n)))
            }
            Family::Qutrit(_) | Family::Linear(_) => {
                let spec = self.spectrum(point, n_max)?;
                if spec.gap < DEGENERACY_TOL {
                    return Err(Error::Degenerate { gap: spec.gap });
                }
                Ok(self.ground_state_unchecked(point, n_max))
            }
            Family::Qubit(_) => Ok(self.ground_state_unchecked(point, n_max)),
        }
    }

    /// Ground state without validation, also at chart points outside the
    /// declared domain (used by finite-difference stencils).
    pub(crate) fn ground_state_unchecked(&self, point: &ControlPoint, n_max: Option<usize>) -> StateVector {
        let raw = match self {
            Family::Qubit(f) => f.ground_raw(point[0], point[1]),
            Family::ShiftedOscillator(_) => {
                let n = n_max.unwrap_or(1);
                let amps = fock::coherent_amplitudes(fock::coherent_alpha(point[0], point[1]), n);
                StateVector::normalized(DVector::from_vec(amps)).expect("coherent amplitudes")
            }
            Family::SqueezedOscillator(_) => {
                let n = n_max.unwrap_or(1);
                let amps = fock::squeezed_amplitudes(point[0], point[1], n);
                StateVector::normalized(DVector::from_vec(amps)).expect("squeezed amplitudes")
            }
            Family::Qutrit(f) => lowest_eigenvector(&(f.h0() + f.k() * C64::new(point[0], 0.0))),
            Family::Linear(f) => lowest_eigenvector(&f.matrix(point.coords())),
        };
        raw.gauge_fixed()
    }

    pub fn spectrum(&self, point: &ControlPoint, n_max: Option<usize>) -> Result<Spectrum> {
        let energies = match self {
            Family::Qubit(f) => {
                self.validate(point)?;
                let e = 0.5 * f.omega.abs();
                vec![-e, e]
            }
            _ => self.hamiltonian_matrix(point, n_max)?.eigh().0,
        };
        let gap = energies[1] - energies[0];
        Ok(Spectrum { energies, gap })
    }
}

fn lowest_eigenvector(m: &DMatrix<C64>) -> StateVector {
    let (_, v) = linalg::eigh(m);
    StateVector::from_raw(v.column(0).into_owned())
}

fn shifted_matrix(omega: f64, lq: f64, lp: f64, n_max: usize) -> DMatrix<C64> {
    let a = fock::annihilation(n_max);
    let ad = a.adjoint();
    let s2 = std::f64::consts::SQRT_2;
    let q = (&a + &ad) / C64::new(s2, 0.0);
    let p = (&a - &ad) / C64::new(0.0, s2);
    let d = n_max + 1;
    let number = DMatrix::from_fn(d, d, |r, c| if r == c { C64::new(r as f64 + 0.5, 0.0) } else { C64::default() });
    let mut h = number * C64::new(omega, 0.0);
    h -= q * C64::new(omega * lq, 0.0) + p * C64::new(omega * lp, 0.0);
    for k in 0..d {
        h[(k, k)] += 0.5 * omega * (lq * lq + lp * lp);
    }
    h
}

fn squeezed_matrix(omega: f64, r: f64, theta: f64, n_max: usize) -> DMatrix<C64> {
    let d = n_max + 1;
    let c = (2.0 * r).cosh();
    let s = 0.5 * (2.0 * r).sinh();
    DMatrix::from_fn(d, d, |row, col| {
        if row == col {
            C64::new(omega * c * (row as f64 + 0.5), 0.0)
        } else if row == col + 2 {
            // ⟨n+2| a†² |n⟩
            let n = col as f64;
            C64::from_polar(omega * s * ((n + 1.0) * (n + 2.0)).sqrt(), theta)
        } else if col == row + 2 {
            let n = row as f64;
            C64::from_polar(omega * s * ((n + 1.0) * (n + 2.0)).sqrt(), -theta)
        } else {
            C64::default()
        }
    })
}
