//! Adaptive tanh-sinh quadrature with interval splitting.

const MAX_DEPTH: usize = 40;

/// Integrate `f` over `[a, b]` to roughly `tol` absolute error.
///
/// Each panel is handled by a double-exponential rule; panels whose error
/// estimate is too large are bisected.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    panel(&f, a, b, tol, 0)
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    let out = quadrature::integrate(f, a, b, tol);
    if out.error_estimate <= tol || depth >= MAX_DEPTH || out.integral.is_nan() {
        return out.integral;
    }
    let m = 0.5 * (a + b);
    panel(f, a, m, 0.5 * tol, depth + 1) + panel(f, m, b, 0.5 * tol, depth + 1)
}

/// Integrate over consecutive breakpoints `knots[0] < knots[1] < ...`.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, knots: &[f64], tol: f64) -> f64 {
    let n = knots.len().saturating_sub(1).max(1) as f64;
    knots
        .windows(2)
        .map(|w| integrate(&f, w[0], w[1], tol / n))
        .sum()
}

/// Integrate over the whole real line through `x = tan u`.
pub fn integrate_real_line<F: Fn(f64) -> f64>(f: F, tol: f64) -> f64 {
    let h = std::f64::consts::FRAC_PI_2;
    let g = |u: f64| {
        let c = u.cos();
        if c.abs() < 1e-300 {
            return 0.0;
        }
        let v = f(u.tan()) / (c * c);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(g, -h, 0.0, 0.5 * tol) + integrate(g, 0.0, h, 0.5 * tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_peak() {
        let v = integrate(|x| x * x, 0.0, 3.0, 1e-12);
        assert!((v - 9.0).abs() < 1e-10);
        let v = integrate(|x| 1.0 / (1.0 + x * x), -1e3, 1e3, 1e-12);
        assert!((v - 2.0 * 1e3f64.atan()).abs() < 1e-9);
    }

    #[test]
    fn real_line() {
        let v = integrate_real_line(|x| (-x * x).exp(), 1e-12);
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn kink_split() {
        let v = integrate_pieces(|x: f64| x.abs(), &[-1.0, 0.0, 2.0], 1e-12);
        assert!((v - 2.5).abs() < 1e-10);
    }
}
