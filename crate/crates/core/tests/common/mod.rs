//! Shared checks applied to every trajectory the integration tests produce.
#![allow(dead_code)]

use geoqsl::dynamics::{self, EngineConfig, Trajectory, TrajectoryStates};
use geoqsl::model::{Family, StateVector};
use geoqsl::protocols::Protocol;

pub const NORM_TOL: f64 = 1e-10;
pub const MODIFIED_TOL: f64 = 1e-8;
pub const REVERSIBILITY_TOL: f64 = 1e-8;

/// Measured values of the three global properties.
#[derive(Clone, Copy, Debug)]
pub struct GlobalProperties {
    pub norm_error: f64,
    pub l_e: f64,
    pub endpoint_distance: f64,
    pub reversal_fidelity: f64,
}

impl GlobalProperties {
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.norm_error > NORM_TOL {
            out.push(format!("norm error {:e}", self.norm_error));
        }
        if self.l_e < self.endpoint_distance - MODIFIED_TOL {
            out.push(format!("l_E {} below endpoint distance {}", self.l_e, self.endpoint_distance));
        }
        if self.reversal_fidelity < 1.0 - REVERSIBILITY_TOL {
            out.push(format!("reversal fidelity 1 - {:e}", 1.0 - self.reversal_fidelity));
        }
        out
    }
}

/// Measure norm drift, the endpoint bound and the fidelity of evolving the
/// final state back under the time-reversed protocol.
pub fn measure(family: &Family, protocol: &Protocol, traj: &Trajectory, config: &EngineConfig) -> GlobalProperties {
    let duration = *traj.times.last().unwrap();
    assert!(
        (duration - protocol.duration).abs() <= 1e-12 * protocol.duration,
        "global checks need full-length trajectories"
    );
    let back = protocol.time_reversed();
    let rcfg = config.reversed();
    let reversal_fidelity = match (&traj.states, family) {
        (TrajectoryStates::Vectors(v), _) => {
            let end = v.last().unwrap();
            let undo = dynamics::evolve_matrix(family, &back, end, duration, &rcfg).expect("reverse run");
            dynamics::fidelity(&undo.final_vector().unwrap(), &v[0])
        }
        (TrajectoryStates::Coherent(c), Family::ShiftedOscillator(f)) => {
            let undo = dynamics::evolve_coherent(f, &back, *c.last().unwrap(), duration, &rcfg).expect("reverse run");
            dynamics::coherent_overlap(undo.final_coordinates().unwrap(), c[0]).powi(2)
        }
        (TrajectoryStates::Squeezed(c), Family::SqueezedOscillator(f)) => {
            let undo = dynamics::evolve_gaussian(f, &back, *c.last().unwrap(), duration, &rcfg).expect("reverse run");
            dynamics::squeezed_overlap(undo.final_coordinates().unwrap(), c[0]).powi(2)
        }
        _ => panic!("trajectory records do not match the family"),
    };
    GlobalProperties {
        norm_error: traj.max_norm_error(),
        l_e: traj.l_e(),
        endpoint_distance: traj.endpoint_distance(),
        reversal_fidelity,
    }
}

pub fn assert_global(family: &Family, protocol: &Protocol, traj: &Trajectory, config: &EngineConfig) {
    let props = measure(family, protocol, traj, config);
    let failures = props.failures();
    assert!(failures.is_empty(), "global property failures: {failures:?}");
}

pub fn assert_close(got: f64, want: f64, tol: f64, what: &str) {
    assert!((got - want).abs() <= tol, "{what}: got {got}, want {want} ± {tol} (diff {:e})", (got - want).abs());
}

pub fn state(amps: &[(f64, f64)]) -> StateVector {
    let v: Vec<_> = amps.iter().map(|&(re, im)| geoqsl::model::C64::new(re, im)).collect();
    StateVector::normalized(v.into()).unwrap()
}
