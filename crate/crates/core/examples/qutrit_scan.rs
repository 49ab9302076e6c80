//! Critical λ̃ where l_g overtakes l_E for a = 1.5, and the small-ε slope of l_g at large λ*.

use std::f64::consts::SQRT_2;

use geoqsl::experiments::{linspace, qutrit_critical_scan, qutrit_lengths};
use geoqsl::model::QutritFamily;

fn main() -> geoqsl::Result<()> {
    let grid = linspace(0.5, 20.0, 40)?;
    for a in [1.0, 1.5] {
        match qutrit_critical_scan(2.0, a, &grid)? {
            Some(p) => println!("a = {a}: crossing at lambda = {:.5} (l_g - l_E: {:+.2e} -> {:+.2e})",
                p.lambda, p.below.l_g - p.below.l_e, p.above.l_g - p.above.l_e),
            None => println!("a = {a}: no crossing on [0.5, 20]"),
        }
    }
    let eps = 0.01;
    let base = qutrit_lengths(&QutritFamily::new(2.0, 1.0)?, 1e3)?.l_g;
    let shifted = qutrit_lengths(&QutritFamily::new(2.0, 1.0 + eps)?, 1e3)?.l_g;
    println!("slope d l_g / d eps = {:.5} (5/(6 sqrt2) = {:.5})", (shifted - base) / eps, 5.0 / (6.0 * SQRT_2));
    Ok(())
}
