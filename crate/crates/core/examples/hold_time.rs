//! Hold times that bring the ramp protocols onto their targets.

use std::f64::consts::{FRAC_PI_4, PI};

use geoqsl::dynamics::EngineConfig;
use geoqsl::model::{QubitFamily, SqueezedOscillatorFamily};
use geoqsl::protocols::{find_hold_time, HoldTimeProblem};

fn main() -> geoqsl::Result<()> {
    let cfg = EngineConfig::default();
    let qubit = HoldTimeProblem::QubitCircle(QubitFamily::new(-1.0, FRAC_PI_4)?);
    for s in [0.1, 0.4, 1.0] {
        let h = find_hold_time(&qubit, s, None, &cfg)?;
        println!("qubit    s = {s:<6} T = {:.9}  residual {:+.1e}", h.hold, h.residual);
    }
    let squeezed = HoldTimeProblem::SqueezedCircle { family: SqueezedOscillatorFamily::new(2.0 * PI)?, r: 2.0 };
    for s in [1e-3, 3e-3] {
        let h = find_hold_time(&squeezed, s, None, &cfg)?;
        println!("squeezed s = {s:<6} T = {:.6e}  residual {:+.1e}", h.hold, h.residual);
    }
    match find_hold_time(&squeezed, 0.5, None, &cfg) {
        Ok(h) => println!("squeezed s = 0.5    T = {:.6e}", h.hold),
        Err(e) => println!("squeezed s = 0.5    {e}"),
    }
    Ok(())
}
