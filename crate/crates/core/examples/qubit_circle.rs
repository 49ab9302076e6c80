//! Qubit on the circle θ = π/4 with the hold time found automatically.

use std::f64::consts::FRAC_PI_4;

use geoqsl::experiments::{run_qubit, OmegaConvention};

fn main() -> geoqsl::Result<()> {
    let report = run_qubit(FRAC_PI_4, -0.5, 0.4, None, OmegaConvention::HalfSplitting, &Default::default())?.report;
    println!("hold time T    = {:.6}", report.hold_time.unwrap_or(f64::NAN));
    println!("l_E            = {:.6}", report.l_e);
    println!("l_g (control)  = {:.6}", report.l_g_control);
    println!("d_lower        = {:.6}", report.d_lower);
    println!("final fidelity = {:.12}", report.final_fidelity);
    println!("violated       = {}", report.original_conjecture_violated);
    for note in &report.notes {
        println!("note: {note}");
    }
    Ok(())
}
