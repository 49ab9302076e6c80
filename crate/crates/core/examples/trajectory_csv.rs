//! Coherent-engine trajectory of the semicircle protocol, printed as CSV.

use geoqsl::dynamics::{evolve_coherent, EngineConfig};
use geoqsl::model::ShiftedOscillatorFamily;
use geoqsl::protocols::ho_semicircle_protocol;

fn main() -> geoqsl::Result<()> {
    let omega = 1.0;
    let protocol = ho_semicircle_protocol(omega)?;
    let traj = evolve_coherent(&ShiftedOscillatorFamily::new(omega)?, &protocol, [0.0, 0.0], protocol.duration, &EngineConfig::default())?;
    eprintln!("{} samples, l_E = {:.9}, max norm error {:.1e}", traj.len(), traj.l_e(), traj.max_norm_error());
    traj.write_csv(std::io::stdout().lock())?;
    Ok(())
}
