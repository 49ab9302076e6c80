//! Slow sweeps along the qubit control arc: l_E approaches the geodesic length.

use std::f64::consts::{FRAC_PI_4, PI};

use geoqsl::dynamics::{evolve_matrix, fidelity, EngineConfig};
use geoqsl::model::{Family, QubitFamily};
use geoqsl::protocols::{adiabatic_protocol_with_profile, ControlCurve, SpeedProfile};

fn main() -> geoqsl::Result<()> {
    let qubit = QubitFamily::new(1.0, FRAC_PI_4)?;
    let family = Family::from(qubit);
    let curve = ControlCurve::Arc { fixed: FRAC_PI_4, from: 0.0, to: PI };
    let psi0 = family.ground_state(&qubit.circle_point(0.0), None)?;
    let target = family.ground_state(&qubit.circle_point(PI), None)?;
    let cfg = EngineConfig::default();
    for profile in [SpeedProfile::Uniform, SpeedProfile::Smooth] {
        for total in [10.0, 40.0, 160.0] {
            let p = adiabatic_protocol_with_profile(&family, &curve, total, profile)?;
            let l_g = p.ground_path_length(&family, geoqsl::geometry::MetricSource::Analytic)?;
            let traj = evolve_matrix(&family, &p, &psi0, p.duration, &cfg)?;
            let end = traj.final_vector().expect("state vectors");
            println!(
                "{profile:?} T = {total:>5}: l_E = {:.6}, l_g = {l_g:.6}, l_E/l_g = {:.6}, fidelity = {:.9}",
                traj.l_e(),
                traj.l_e() / l_g,
                fidelity(&end, &target)
            );
        }
    }
    Ok(())
}
