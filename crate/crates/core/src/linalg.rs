//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted ascending.
pub fn eigh(h: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = h.clone().symmetric_eigen();
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigen-decomposition of a real symmetric matrix, ascending.
pub fn eigh_real(h: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = h.clone().symmetric_eigen();
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// `exp(-i H t)` for Hermitian `H`.
pub fn expm_hermitian(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let (values, v) = eigh(h);
    let n = h.nrows();
    let mut scaled = v.clone();
    for (c, e) in values.iter().enumerate() {
        let phase = C64::from_polar(1.0, -e * t);
        for r in 0..n {
            scaled[(r, c)] *= phase;
        }
    }
    scaled * v.adjoint()
}

pub fn commutator(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a * b - b * a
}

/// Frobenius norm of `H - H†`.
pub fn hermiticity_defect(h: &DMatrix<C64>) -> f64 {
    (h - h.adjoint()).norm()
}

/// `⟨a|b⟩`.
pub fn inner(a: &DVector<C64>, b: &DVector<C64>) -> C64 {
    a.dotc(b)
}

/// Reduce an angle into `(-π, π]`.
pub fn wrap_pi(x: f64) -> f64 {
    use std::f64::consts::PI;
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Shift `angle` by a multiple of 2π so that it lies closest to `reference`.
pub fn unwrap_near(angle: f64, reference: f64) -> f64 {
    reference + wrap_pi(angle - reference)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_pauli_x() {
        let i = C64::new(0.0, 1.0);
        let one = C64::new(1.0, 0.0);
        let sx = DMatrix::from_row_slice(2, 2, &[C64::default(), one, one, C64::default()]);
        let u = expm_hermitian(&sx, 0.3);
        let expect = DMatrix::from_row_slice(
            2,
            2,
            &[one * 0.3f64.cos(), -i * 0.3f64.sin(), -i * 0.3f64.sin(), one * 0.3f64.cos()],
        );
        assert!((u - expect).norm() < 1e-14);
    }

    #[test]
    fn wrapping() {
        use std::f64::consts::PI;
        assert!((wrap_pi(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((unwrap_near(0.1, 2.0 * PI) - (2.0 * PI + 0.1)).abs() < 1e-14);
    }
}
