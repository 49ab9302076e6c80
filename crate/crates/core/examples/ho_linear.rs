//! Shifted oscillator driven along the semicircle: the modified bound is saturated.

use geoqsl::experiments::{run_scenario, Scenario, ScenarioSpec, Units};

fn main() -> geoqsl::Result<()> {
    let spec = ScenarioSpec { units: Units::LambdaPlane, ..ScenarioSpec::new(Scenario::HoLinear { omega: 1.0 }) };
    let report = run_scenario(&spec)?.report;
    println!("l_E (lambda plane)         = {:.9}", report.l_e);
    println!("control geodesic           = {:.9}", report.l_g_control);
    println!("l_E / l_g                  = {:.9}", report.l_e / report.l_g_control);
    println!("final fidelity             = {:.12}", report.final_fidelity);
    println!("original conjecture broken = {}", report.original_conjecture_violated);
    println!("modified bound saturated   = {}", report.saturated);
    Ok(())
}
