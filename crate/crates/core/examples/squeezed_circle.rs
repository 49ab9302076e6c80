//! Squeezed vacuum on the circle r = 2, with both length conventions and the Fock oracle.

use std::f64::consts::PI;

use geoqsl::experiments::run_squeezed;

fn main() -> geoqsl::Result<()> {
    let report = run_squeezed(2.0, 2.0 * PI, 3e-3, None, &Default::default())?.report;
    let d = report.squeezed.as_ref().expect("squeezed details");
    println!("hold time T           = {:.6e}", report.hold_time.unwrap_or(f64::NAN));
    println!("l_E                   = {:.6}", report.l_e);
    if let Some(o) = &d.fock_oracle {
        println!("l_E (Fock, n_max={:>3}) = {:.6}  relative gap {:.1e}", o.n_max, o.l_e, o.l_e_relative_discrepancy);
    }
    println!("l_g metric arc        = {:.6}", d.l_g_metric_arc);
    println!("l_g sinh^2 formula    = {:.6}", d.l_g_sinh_squared_formula);
    println!("ramp ground path      = {:.6}", report.l_g_hamiltonian_path);
    println!("orbit distance        = {:.6}", report.d_orbit_manifold);
    println!("mirror symmetry error = {:.1e}", d.mirror_symmetry_error.unwrap_or(f64::NAN));
    for note in &report.notes {
        println!("note: {note}");
    }
    Ok(())
}
