//! Finite-difference quantum geometric tensor against the closed-form metrics.

use std::f64::consts::PI;

use geoqsl::experiments::{linspace, metric_check};
use geoqsl::geometry::{qgt_finite_difference, DEFAULT_FD_STEP};
use geoqsl::model::{ControlPoint, Family, QubitFamily, QutritFamily, ShiftedOscillatorFamily, SqueezedOscillatorFamily};

fn grid(x: (f64, f64), y: (f64, f64)) -> Vec<ControlPoint> {
    let xs = linspace(x.0, x.1, 5).unwrap();
    let ys = linspace(y.0, y.1, 5).unwrap();
    xs.iter().flat_map(|a| ys.iter().map(move |b| ControlPoint::from([*a, *b]))).collect()
}

fn main() -> geoqsl::Result<()> {
    let cases: Vec<(&str, Family, Vec<ControlPoint>)> = vec![
        ("coherent", ShiftedOscillatorFamily::new(1.0)?.into(), grid((-2.0, 2.0), (-2.0, 2.0))),
        ("qubit", QubitFamily::new(1.0, PI / 4.0)?.into(), grid((0.0, PI), (0.0, 2.0 * PI))),
        ("squeezed", SqueezedOscillatorFamily::new(1.0)?.into(), grid((0.0, 2.0), (0.0, 2.0 * PI))),
        ("qutrit", QutritFamily::new(2.0, 1.5)?.into(), linspace(-3.0, 3.0, 7)?.into_iter().map(Into::into).collect()),
    ];
    for (name, family, points) in &cases {
        let rows = metric_check(family, points, DEFAULT_FD_STEP)?;
        let worst = rows.iter().filter_map(|r| r.deviation).fold(0.0, f64::max);
        let skipped = rows.iter().filter(|r| r.deviation.is_none()).count();
        println!("{name:>9}: {} points, max |g_fd - g| = {worst:.2e}, {skipped} skipped", rows.len());
    }
    let qgt = qgt_finite_difference(&cases[1].1, &[1.0, 0.3].into(), DEFAULT_FD_STEP)?;
    println!("qubit metric at (1, 0.3):{}", qgt.metric().matrix());
    println!("qubit Im QGT at (1, 0.3):{}", qgt.imaginary());
    Ok(())
}
