//! Qubit l_E as the ramp time s shrinks, against the closed-form limit; writes a sweep CSV.

use std::f64::consts::FRAC_PI_4;

use geoqsl::experiments::{qubit_fast_ramp_limit, sweep, write_sweep_csv, OmegaConvention, Scenario, ScenarioSpec, SweepParameter};

fn main() -> geoqsl::Result<()> {
    let spec = ScenarioSpec::new(Scenario::QubitCircle {
        theta: FRAC_PI_4,
        omega: -0.5,
        s: 0.4,
        hold: None,
        omega_convention: OmegaConvention::HalfSplitting,
    });
    let rows = sweep(&spec, SweepParameter::S, &[0.4, 0.2, 0.1, 0.05, 0.025, 0.0125])?;
    let limit = qubit_fast_ramp_limit(FRAC_PI_4);
    for row in &rows {
        println!("s = {:<7} l_E = {:.6}  limit - l_E = {:.2e}", row.value, row.report.l_e, limit - row.report.l_e);
    }
    write_sweep_csv(SweepParameter::S, &rows, std::io::stdout().lock())?;
    Ok(())
}
