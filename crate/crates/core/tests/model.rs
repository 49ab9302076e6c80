mod common;

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use geoqsl::model::fock;
use geoqsl::model::{
    displacement_fock, squeeze_fock, ControlPoint, DenseHamiltonian, Family, QubitFamily, QutritFamily,
    ShiftedOscillatorFamily, SqueezedOscillatorFamily, StateVector, C64,
};
use geoqsl::Error;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

// roots of μ³ + pμ + q (three real roots) by the trigonometric formula
fn depressed_cubic_roots(p: f64, q: f64) -> [f64; 3] {
    let m = 2.0 * (-p / 3.0).sqrt();
    let phi = (3.0 * q / (p * m)).acos() / 3.0;
    let mut r = [0, 1, 2].map(|k| m * (phi - 2.0 * PI * k as f64 / 3.0).cos());
    r.sort_by(f64::total_cmp);
    r
}

fn residual(h: &DenseHamiltonian, psi: &StateVector) -> (f64, f64) {
    let e0 = h.expectation(psi);
    let r = (h.apply(psi) - psi.amplitudes() * C64::new(e0, 0.0)).norm();
    (e0, r)
}

#[test]
fn qutrit_origin_matrix_and_ground_state() {
    let f = Family::from(QutritFamily::new(2.0, 1.5).unwrap());
    let h = f.hamiltonian_matrix(&0.0.into(), None).unwrap();
    let want = DMatrix::from_diagonal(&DVector::from_vec(vec![-2.0, 0.0, 2.0])).map(|x| C64::new(x, 0.0));
    assert_eq!(h.matrix(), &want);
    let psi = f.ground_state(&0.0.into(), None).unwrap();
    common::assert_close(psi.amplitudes()[0].re, 1.0, 1e-14, "ground amplitude");
    assert!(psi.amplitudes()[0].im == 0.0);
}

#[test]
fn qubit_pole_is_sigma_z() {
    for omega in [1.0, -0.5, 3.0] {
        let f = Family::from(QubitFamily::new(omega, 0.0).unwrap());
        for phi in [0.0, 1.0, 4.0] {
            let h = f.hamiltonian_matrix(&[0.0, phi].into(), None).unwrap();
            let m = h.matrix();
            common::assert_close(m[(0, 0)].re, -0.5 * omega, 1e-15, "H00");
            common::assert_close(m[(1, 1)].re, 0.5 * omega, 1e-15, "H11");
            assert!(m[(0, 1)].norm() < 1e-15 && m[(1, 0)].norm() < 1e-15);
        }
    }
    let f = Family::from(QubitFamily::new(1.0, 0.0).unwrap());
    let psi = f.ground_state(&[0.0, 2.5].into(), None).unwrap();
    common::assert_close(psi.amplitudes()[0].re, 1.0, 1e-15, "ground (1,0)");
}

#[test]
fn qubit_matches_pauli_expansion() {
    let omega = 1.7;
    let f = Family::from(QubitFamily::new(omega, 0.3).unwrap());
    let (th, ph) = (1.1, -2.3);
    let h = f.hamiltonian_matrix(&[th, ph].into(), None).unwrap();
    let n = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
    let i = C64::new(0.0, 1.0);
    let sx = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0].map(|x| C64::new(x, 0.0)));
    let sy = DMatrix::from_row_slice(2, 2, &[C64::default(), -i, i, C64::default()]);
    let sz = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0].map(|x| C64::new(x, 0.0)));
    let want = (sx * C64::new(n[0], 0.0) + sy * C64::new(n[1], 0.0) + sz * C64::new(n[2], 0.0))
        * C64::new(-0.5 * omega, 0.0);
    assert!((h.matrix() - want).norm() < 1e-14);
}

#[test]
fn shifted_origin_is_number_operator() {
    let f = Family::from(ShiftedOscillatorFamily::new(1.0).unwrap());
    let h = f.hamiltonian_matrix(&[0.0, 0.0].into(), Some(20)).unwrap();
    let want = DMatrix::from_fn(21, 21, |r, c| C64::new(if r == c { r as f64 + 0.5 } else { 0.0 }, 0.0));
    assert!((h.matrix() - want).norm() < 1e-13);
}

#[test]
fn squeezed_ground_state_series() {
    let f = Family::from(SqueezedOscillatorFamily::new(1.0).unwrap());
    // 60 levels leave 7e-9 of the norm outside the basis
    assert!(matches!(f.ground_state(&[1.0, 0.0].into(), Some(60)), Err(Error::InsufficientTruncation { .. })));
    let psi = f.ground_state(&[1.0, 0.0].into(), Some(100)).unwrap();
    let t = 1.0f64.tanh();
    for n in 0..=30 {
        let mag = 0.5 * ln_factorial(2 * n) - ln_factorial(n) - n as f64 * 2f64.ln() - 0.5 * 1.0f64.cosh().ln()
            + n as f64 * t.ln();
        let want = if n % 2 == 0 { 1.0 } else { -1.0 } * mag.exp();
        let got = psi.amplitudes()[2 * n];
        assert!((got - C64::new(want, 0.0)).norm() < 1e-10, "n={n}: {got} vs {want}");
        {
            assert_eq!(psi.amplitudes()[2 * n + 1], C64::default());
        }
    }
}

#[test]
fn spectra() {
    for omega in [0.5, 2.0] {
        let f = Family::from(QutritFamily::new(omega, 1.0).unwrap());
        for lam in [-3.0, 0.2, 1.0, 7.0] {
            let e = f.spectrum(&lam.into(), None).unwrap().energies;
            let w = (omega * omega + 2.0 * lam * lam).sqrt();
            for (got, want) in e.iter().zip([-w, 0.0, w]) {
                common::assert_close(*got, want, 1e-12 * w, "qutrit a=1 eigenvalue");
            }
        }
    }
    let q = Family::from(QubitFamily::new(1.0, FRAC_PI_4).unwrap());
    let s = q.spectrum(&[FRAC_PI_4, 0.0].into(), None).unwrap();
    assert_eq!(s.energies, vec![-0.5, 0.5]);
    assert_eq!(s.gap, 1.0);

    let (omega, a, lam) = (2.0, 1.5, 1.0);
    let f = Family::from(QutritFamily::new(omega, a).unwrap());
    let e = f.spectrum(&lam.into(), None).unwrap().energies;
    let p = -(lam * lam * (1.0 + a * a) + omega * omega);
    let q = lam * lam * omega * (1.0 - a * a);
    let roots = depressed_cubic_roots(p, q);
    for (got, want) in e.iter().zip(roots) {
        common::assert_close(*got, want, 1e-12, "qutrit a=1.5 eigenvalue");
    }
    assert!(e[0] < e[1] && e[1] < e[2]);
}

#[test]
fn qutrit_eigenvector_formula_cross_check() {
    let fam = QutritFamily::new(2.0, 1.5).unwrap();
    let f = Family::from(fam);
    for lam in [-2.0, 0.3, 1.0, 4.0] {
        let e = f.spectrum(&lam.into(), None).unwrap().energies;
        let v = fam.eigenvector_formula(lam, e[0]);
        let v = StateVector::normalized(v).unwrap();
        let psi = f.ground_state(&lam.into(), None).unwrap();
        common::assert_close(psi.overlap(&v).norm(), 1.0, 1e-12, "formula overlap");
    }
}

#[test]
fn displacement_oracle() {
    let id = displacement_fock(0.0, 0.0, 10).unwrap();
    assert_eq!(id, DMatrix::identity(11, 11));
    let d = displacement_fock(SQRT_2, 0.0, 40).unwrap();
    for n in 0..=40 {
        let want = (-0.5 - 0.5 * ln_factorial(n)).exp();
        assert!((d[(n, 0)] - C64::new(want, 0.0)).norm() < 1e-14, "n={n}");
    }
    let d = displacement_fock(0.7, -1.1, 80).unwrap();
    let low = d.columns(0, 10).into_owned();
    let defect = (low.adjoint() * &low - DMatrix::<C64>::identity(10, 10)).norm();
    assert!(defect < 1e-8, "unitarity defect {defect:e}");
    // column 0 is the shifted-oscillator ground state
    let f = Family::from(ShiftedOscillatorFamily::new(1.0).unwrap());
    let psi = f.ground_state(&[0.7, -1.1].into(), Some(80)).unwrap();
    let col = StateVector::normalized(d.column(0).into_owned()).unwrap();
    common::assert_close(psi.overlap(&col).norm(), 1.0, 1e-12, "coherent overlap");
    assert!(matches!(displacement_fock(8.0, 0.0, 10), Err(Error::InsufficientTruncation { .. })));
}

#[test]
fn squeeze_oracle() {
    assert_eq!(squeeze_fock(0.0, 1.0, 6).unwrap(), DMatrix::identity(7, 7));
    let s = squeeze_fock(1.0, 0.0, 120).unwrap();
    let f = Family::from(SqueezedOscillatorFamily::new(1.0).unwrap());
    let psi = f.ground_state(&[1.0, 0.0].into(), Some(120)).unwrap();
    for n in 0..=120 {
        assert!((s[(n, 0)] - psi.amplitudes()[n]).norm() < 1e-12, "n={n}");
    }
    let s = squeeze_fock(0.6, 2.0, 160).unwrap();
    let low = s.columns(0, 8).into_owned();
    assert!((low.adjoint() * &low - DMatrix::<C64>::identity(8, 8)).norm() < 1e-8);
    assert!(matches!(squeeze_fock(-1.0, 0.0, 10), Err(Error::InvalidParameter(_))));
}

#[test]
fn squeezed_norm_with_tail_truncation() {
    for r in [0.0, 0.5, 1.0, 1.5, 2.0] {
        let n = fock::squeezed_truncation(r, fock::DEFAULT_TAIL);
        let amps = fock::squeezed_amplitudes(r, 0.4, n);
        let norm: f64 = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        common::assert_close(norm, 1.0, 1e-10, "squeezed norm");
    }
}

#[test]
fn truncation_doubling() {
    let f = Family::from(SqueezedOscillatorFamily::new(1.0).unwrap());
    let p: ControlPoint = [1.3, 0.8].into();
    let n = f.default_truncation(&p).unwrap();
    let a = f.ground_state(&p, Some(n)).unwrap();
    let b = f.ground_state(&p, Some(2 * n)).unwrap();
    let diff: f64 = (0..=n).map(|k| (a.amplitudes()[k] - b.amplitudes()[k]).norm_sqr()).sum::<f64>().sqrt();
    assert!(diff < 1e-8, "{diff:e}");
    let f = Family::from(ShiftedOscillatorFamily::new(1.0).unwrap());
    let p: ControlPoint = [1.5, -2.0].into();
    let n = f.default_truncation(&p).unwrap();
    let a = f.ground_state(&p, Some(n)).unwrap();
    let b = f.ground_state(&p, Some(2 * n)).unwrap();
    let diff: f64 = (0..=n).map(|k| (a.amplitudes()[k] - b.amplitudes()[k]).norm_sqr()).sum::<f64>().sqrt();
    assert!(diff < 1e-8, "{diff:e}");
}

#[test]
fn error_paths() {
    let sq = Family::from(SqueezedOscillatorFamily::new(1.0).unwrap());
    assert!(matches!(sq.hamiltonian_matrix(&[1.0, 0.0].into(), None), Err(Error::MissingTruncation)));
    assert!(matches!(sq.ground_state(&[2.0, 0.0].into(), Some(40)), Err(Error::InsufficientTruncation { .. })));
    assert!(matches!(sq.validate(&[-0.1, 0.0].into()), Err(Error::InvalidPoint(_))));
    let qt = Family::from(QutritFamily::new(1.0, 1.0).unwrap());
    assert!(matches!(
        qt.hamiltonian_matrix(&[1.0, 2.0].into(), None),
        Err(Error::DimensionMismatch { expected: 1, got: 2 })
    ));
    assert!(QubitFamily::new(1.0, 4.0).is_err());
    assert!(QutritFamily::new(-1.0, 1.0).is_err());
    assert!(ShiftedOscillatorFamily::new(0.0).is_err());
    let degenerate = Family::from(QubitFamily::new(0.0, 0.5).unwrap());
    assert!(matches!(degenerate.ground_state(&[0.5, 0.0].into(), None), Err(Error::Degenerate { .. })));
    let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0].map(|x| C64::new(x, 0.0)));
    assert!(matches!(DenseHamiltonian::new(m), Err(Error::NotHermitian(_))));
    assert!(StateVector::new(DVector::from_vec(vec![C64::new(2.0, 0.0)])).is_err());
}

fn family_point() -> impl Strategy<Value = (Family, ControlPoint)> {
    prop_oneof![
        (0.1f64..3.0, 0.0..PI, -PI..PI).prop_map(|(w, th, ph)| {
            (QubitFamily::new(w, 0.5).unwrap().into(), ControlPoint::from([th, ph]))
        }),
        (0.5f64..3.0, 0.5f64..2.0, -20.0f64..20.0)
            .prop_map(|(w, a, l)| (QutritFamily::new(w, a).unwrap().into(), ControlPoint::from(l))),
        (0.5f64..3.0, -2.0f64..2.0, -2.0f64..2.0)
            .prop_map(|(w, q, p)| (ShiftedOscillatorFamily::new(w).unwrap().into(), ControlPoint::from([q, p]))),
        (0.5f64..3.0, 0.0f64..1.5, 0.0..2.0 * PI)
            .prop_map(|(w, r, th)| (SqueezedOscillatorFamily::new(w).unwrap().into(), ControlPoint::from([r, th]))),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn ground_state_is_lowest_eigenvector((family, point) in family_point()) {
        // far enough out that the cut-off couplings leave no residual
        let n = match &family {
            Family::ShiftedOscillator(_) => {
                Some(fock::coherent_truncation(fock::coherent_alpha(point[0], point[1]).norm_sqr(), 1e-28))
            }
            Family::SqueezedOscillator(_) => Some(fock::squeezed_truncation(point[0], 1e-28)),
            _ => None,
        };
        let h = family.hamiltonian_matrix(&point, n).unwrap();
        prop_assert!(geoqsl::linalg::hermiticity_defect(h.matrix()) <= 1e-12 * h.matrix().norm().max(1.0));
        let psi = family.ground_state(&point, n).unwrap();
        prop_assert!((psi.norm() - 1.0).abs() <= 1e-10);
        let first = psi.amplitudes().iter().find(|c| c.norm() > 1e-300).unwrap();
        prop_assert!(first.im == 0.0 && first.re > 0.0);
        let (e0, res) = residual(&h, &psi);
        prop_assert!(res <= 1e-8, "residual {res:e}");
        let lowest = if family.is_oscillator() {
            0.5 * family.omega().unwrap()
        } else {
            family.spectrum(&point, None).unwrap().energies[0]
        };
        prop_assert!((e0 - lowest).abs() <= 1e-8 * lowest.abs().max(1.0), "E0 {e0} vs {lowest}");
    }

    #[test]
    fn qutrit_sign_symmetry(w in 0.5f64..3.0, a in 0.5f64..2.0, lam in 0.01f64..20.0) {
        let f = Family::from(QutritFamily::new(w, a).unwrap());
        let plus = f.ground_state(&lam.into(), None).unwrap();
        let minus = f.ground_state(&(-lam).into(), None).unwrap();
        let mut flipped = plus.amplitudes().clone();
        flipped[1] = -flipped[1];
        let flipped = StateVector::new(flipped).unwrap();
        prop_assert!((minus.overlap(&flipped).norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn qutrit_gap(w in 0.1f64..5.0, a in 0.5f64..2.0, lam in -20.0f64..20.0) {
        let fam = QutritFamily::new(w, a).unwrap();
        prop_assert!(fam.discriminant(lam) > 0.0);
        let e = Family::from(fam).spectrum(&lam.into(), None).unwrap().energies;
        prop_assert!(e[0] < e[1] && e[1] < e[2]);
    }
}
