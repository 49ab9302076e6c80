//! Truncated number-basis representations of the oscillator families.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Tail mass below which a truncated expansion counts as converged.
pub const GROUND_TAIL: f64 = 1e-10;
/// Tail mass used to pick default truncations.
pub const DEFAULT_TAIL: f64 = 1e-15;
const ORACLE_TAIL: f64 = 1e-8;

pub(crate) fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Coherent amplitude `α` of the displaced vacuum at `(λ_q, λ_p)`.
pub fn coherent_alpha(lambda_q: f64, lambda_p: f64) -> C64 {
    C64::new(lambda_q, lambda_p) / std::f64::consts::SQRT_2
}

/// Poisson mass `Σ_{k>n} e^{-x} x^k / k!`.
pub fn coherent_tail(abs_alpha_sq: f64, n_max: usize) -> f64 {
    let x = abs_alpha_sq;
    if x == 0.0 {
        return 0.0;
    }
    // term p_k in log form to survive large x
    let mut ln_p = -x;
    for k in 1..=n_max + 1 {
        ln_p += x.ln() - (k as f64).ln();
    }
    let mut k = n_max + 1;
    let mut tail = 0.0;
    loop {
        let p = ln_p.exp();
        tail += p;
        k += 1;
        ln_p += x.ln() - (k as f64).ln();
        if (k as f64) > x && ln_p.exp() < 1e-40 + 1e-20 * tail {
            break;
        }
        if k > n_max + 100_000 {
            break;
        }
    }
    tail
}

/// Mass of `Ŝ_z|0⟩` beyond Fock index `n_max`.
pub fn squeezed_tail(r: f64, n_max: usize) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let t2 = r.tanh().powi(2);
    let j0 = n_max / 2 + 1;
    // w_j = t^{2j} (2j)! / (4^j j!^2) / cosh r
    let mut ln_w = -r.cosh().ln();
    for j in 0..j0 {
        ln_w += t2.ln() + ((2 * j + 1) as f64 / (2 * j + 2) as f64).ln();
    }
    let mut tail = 0.0;
    let mut j = j0;
    loop {
        let w = ln_w.exp();
        tail += w;
        ln_w += t2.ln() + ((2 * j + 1) as f64 / (2 * j + 2) as f64).ln();
        j += 1;
        if ln_w.exp() < 1e-22 * tail.max(1e-300) || j > j0 + 200_000 {
            // geometric remainder with ratio below t²
            tail += ln_w.exp() / (1.0 - t2);
            break;
        }
    }
    tail
}

/// Smallest `n_max` with `coherent_tail < tol`.
pub fn coherent_truncation(abs_alpha_sq: f64, tol: f64) -> usize {
    let mut n = (abs_alpha_sq.ceil() as usize).max(1);
    while coherent_tail(abs_alpha_sq, n) >= tol {
        n += 1;
    }
    n
}

/// Smallest even `n_max` with `squeezed_tail < tol`.
pub fn squeezed_truncation(r: f64, tol: f64) -> usize {
    let mut n = 2;
    while squeezed_tail(r, n) >= tol {
        n += 2;
    }
    n
}

/// Number-basis amplitudes of the coherent state `|α⟩` for `n = 0..=n_max`.
pub fn coherent_amplitudes(alpha: C64, n_max: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    out.push(c);
    for n in 0..n_max {
        c = c * alpha / ((n + 1) as f64).sqrt();
        out.push(c);
    }
    out
}

/// Number-basis amplitudes of the squeezed vacuum `Ŝ_z|0⟩`, `z = r e^{iθ}`.
pub fn squeezed_amplitudes(r: f64, theta: f64, n_max: usize) -> Vec<C64> {
    let mut out = vec![C64::default(); n_max + 1];
    let t = -C64::from_polar(r.tanh(), theta);
    let mut c = C64::new(1.0 / r.cosh().sqrt(), 0.0);
    out[0] = c;
    let mut n = 0;
    while 2 * (n + 1) <= n_max {
        c = c * t * ((2 * n + 1) as f64 / (2 * n + 2) as f64).sqrt();
        out[2 * (n + 1)] = c;
        n += 1;
    }
    out
}

/// Annihilation operator on `n = 0..=n_max`.
pub fn annihilation(n_max: usize) -> DMatrix<C64> {
    let d = n_max + 1;
    DMatrix::from_fn(d, d, |r, c| {
        if c == r + 1 {
            C64::new((c as f64).sqrt(), 0.0)
        } else {
            C64::default()
        }
    })
}

/// Truncated matrix of `D̂_λ` from the normal-ordered (Kermack–McCrea) form
/// `D = e^{-|α|²/2} e^{α a†} e^{-α* a}`.
pub fn displacement_fock(lambda_q: f64, lambda_p: f64, n_max: usize) -> Result<DMatrix<C64>> {
    if n_max < 1 {
        return Err(Error::MissingTruncation);
    }
    let alpha = coherent_alpha(lambda_q, lambda_p);
    let x = alpha.norm_sqr();
    let tail = coherent_tail(x, n_max);
    if tail > ORACLE_TAIL {
        return Err(Error::InsufficientTruncation { n_max, tail });
    }
    let d = n_max + 1;
    if x == 0.0 {
        return Ok(DMatrix::identity(d, d));
    }
    let lf = ln_factorials(n_max);
    let ln_abs = alpha.norm().ln();
    let arg_a = alpha.arg();
    let arg_b = (-alpha.conj()).arg();
    Ok(DMatrix::from_fn(d, d, |m, n| {
        let mut acc = C64::default();
        for k in 0..=m.min(n) {
            let ln_mag = -0.5 * x + ((m + n - 2 * k) as f64) * ln_abs + 0.5 * (lf[m] + lf[n])
                - lf[k]
                - lf[m - k]
                - lf[n - k];
            let phase = (m - k) as f64 * arg_a + (n - k) as f64 * arg_b;
            acc += C64::from_polar(ln_mag.exp(), phase);
        }
        acc
    }))
}

/// Truncated matrix of `Ŝ_z` from the disentangled form
/// `S = e^{-(t/2) a†²} (cosh r)^{-(n+1/2)} e^{(t*/2) a²}`, `t = e^{iθ} tanh r`.
pub fn squeeze_fock(r: f64, theta: f64, n_max: usize) -> Result<DMatrix<C64>> {
    if n_max < 1 {
        return Err(Error::MissingTruncation);
    }
    if r < 0.0 {
        return Err(Error::InvalidParameter(format!("squeezing r={r} must be >= 0")));
    }
    let tail = squeezed_tail(r, n_max);
    if tail > ORACLE_TAIL {
        return Err(Error::InsufficientTruncation { n_max, tail });
    }
    let d = n_max + 1;
    if r == 0.0 {
        return Ok(DMatrix::identity(d, d));
    }
    let lf = ln_factorials(n_max);
    let ln_half_t = (0.5 * r.tanh()).ln();
    let ln_cosh = r.cosh().ln();
    Ok(DMatrix::from_fn(d, d, |m, n| {
        if (m + n) % 2 == 1 {
            return C64::default();
        }
        let mut acc = C64::default();
        let mut k = m % 2;
        while k <= m.min(n) {
            let j1 = (m - k) / 2;
            let j2 = (n - k) / 2;
            let ln_mag = ((j1 + j2) as f64) * ln_half_t - lf[j1] - lf[j2] + 0.5 * (lf[m] + lf[n])
                - lf[k]
                - (k as f64 + 0.5) * ln_cosh;
            let sign = if j1 % 2 == 0 { 1.0 } else { -1.0 };
            let phase = (j1 as f64 - j2 as f64) * theta;
            acc += C64::from_polar(sign * ln_mag.exp(), phase);
            k += 2;
        }
        acc
    }))
}
