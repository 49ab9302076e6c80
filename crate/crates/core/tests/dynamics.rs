mod common;

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use geoqsl::dynamics::{
    self, coordinate_state, energy_variance, evolve_coherent, evolve_gaussian, evolve_matrix, fidelity,
    l_e_of_trajectory, EngineConfig, Trajectory, TrajectoryStates,
};
use geoqsl::experiments::qutrit_closed_forms;
use geoqsl::geometry;
use geoqsl::model::{
    fock, ControlPoint, Family, QubitFamily, QutritFamily, ShiftedOscillatorFamily, SqueezedOscillatorFamily,
    StateVector, C64,
};
use geoqsl::protocols::{
    adiabatic_protocol_with_profile, constant_protocol, ho_semicircle_protocol, qubit_ramp_protocol, qutrit_static_protocol,
    squeezed_ramp_protocol, ControlCurve, RampSpec, SpeedProfile,
};
use geoqsl::Error;
use nalgebra::DVector;

fn cfg() -> EngineConfig {
    EngineConfig::default()
}

fn fs_polyline(traj: &Trajectory) -> f64 {
    (1..traj.len()).map(|i| traj.distance_between(i - 1, i)).sum()
}

// Fock-space runs only need to resolve the 1e-6 / 1e-4 comparison
fn oracle_cfg() -> EngineConfig {
    EngineConfig { rtol: 1e-9, observable_tol: 1e-6, ..cfg() }
}

fn assert_trajectory_invariants(traj: &Trajectory) {
    assert_eq!(traj.times.len(), traj.states.len());
    assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    assert!(traj.delta_e.iter().all(|d| *d >= 0.0));
    assert!(traj.cumulative_length.windows(2).all(|w| w[1] >= w[0]));
    assert!(traj.max_norm_error() <= 1e-10);
}

#[test]
fn eigenstate_is_stationary() {
    let fam = Family::from(QutritFamily::new(2.0, 1.5).unwrap());
    let p: ControlPoint = 0.7.into();
    let psi0 = fam.ground_state(&p, None).unwrap();
    let prot = constant_protocol(p, 3.0).unwrap();
    let traj = evolve_matrix(&fam, &prot, &psi0, 3.0, &cfg()).unwrap();
    assert!(fidelity(&traj.final_vector().unwrap(), &psi0) > 1.0 - 1e-14);
    assert!(traj.delta_e.iter().all(|d| *d < 1e-7));
    assert!(traj.l_e() < 1e-6);
    assert_trajectory_invariants(&traj);
    common::assert_global(&fam, &prot, &traj, &cfg());
}

#[test]
fn qutrit_static_protocol_maps_ground_states() {
    for (omega, a, lam) in [(2.0, 1.0, 1.0), (1.0, 1.5, 3.0), (2.0, 0.7, 0.4)] {
        let fam = Family::from(QutritFamily::new(omega, a).unwrap());
        let prot = qutrit_static_protocol(omega).unwrap();
        let psi0 = fam.ground_state(&(-lam).into(), None).unwrap();
        let traj = evolve_matrix(&fam, &prot, &psi0, prot.duration, &cfg()).unwrap();
        let target = fam.ground_state(&lam.into(), None).unwrap();
        assert!(fidelity(&traj.final_vector().unwrap(), &target) >= 1.0 - 1e-10);
        assert_trajectory_invariants(&traj);
        common::assert_global(&fam, &prot, &traj, &cfg());
    }
    // propagator ∝ diag(1, −1, 1)
    let fam = Family::from(QutritFamily::new(2.0, 1.0).unwrap());
    let prot = qutrit_static_protocol(2.0).unwrap();
    let mut phases = Vec::new();
    for k in 0..3 {
        let mut e = vec![C64::default(); 3];
        e[k] = C64::new(1.0, 0.0);
        let traj = evolve_matrix(&fam, &prot, &StateVector::from_slice(&e).unwrap(), prot.duration, &cfg()).unwrap();
        let out = traj.final_vector().unwrap();
        for j in 0..3 {
            if j != k {
                assert!(out.amplitudes()[j].norm() < 1e-12);
            }
        }
        phases.push(out.amplitudes()[k]);
    }
    assert!((phases[0] - phases[2]).norm() < 1e-12);
    assert!((phases[0] + phases[1]).norm() < 1e-12);
}

#[test]
fn qubit_ramp_run() {
    // ω = −1/2 read as half the splitting
    let fam_q = QubitFamily::new(-1.0, FRAC_PI_4).unwrap();
    let fam = Family::from(fam_q);
    let prot = qubit_ramp_protocol(FRAC_PI_4, RampSpec::new(0.4, 1.4778).unwrap());
    let psi0 = fam.ground_state(&fam_q.circle_point(0.0), None).unwrap();
    let traj = evolve_matrix(&fam, &prot, &psi0, prot.duration, &cfg()).unwrap();
    let target = fam.ground_state(&fam_q.circle_point(PI), None).unwrap();
    assert!(fidelity(&traj.final_vector().unwrap(), &target) >= 0.999);
    common::assert_close(traj.l_e(), 0.81, 0.02, "l_E");
    common::assert_close(l_e_of_trajectory(&traj), traj.l_e(), 1e-14, "trapezoid l_E");
    common::assert_close(fs_polyline(&traj), traj.l_e(), 1e-6, "FS polyline of the recorded states");
    assert_trajectory_invariants(&traj);
    common::assert_global(&fam, &prot, &traj, &cfg());
}

#[test]
fn coherent_orbits() {
    let fam = ShiftedOscillatorFamily::new(1.3).unwrap();
    let f = Family::from(fam);
    let rest = constant_protocol([0.0, 0.0].into(), 2.0 * PI / 1.3).unwrap();
    let traj = evolve_coherent(&fam, &rest, [1.5, 0.0], rest.duration, &cfg()).unwrap();
    let end = traj.final_coordinates().unwrap();
    assert!((end[0] - 1.5).abs() < 1e-8 && end[1].abs() < 1e-8);
    common::assert_global(&f, &rest, &traj, &cfg());

    let half = constant_protocol([1.0, 0.0].into(), PI / 1.3).unwrap();
    let traj = evolve_coherent(&fam, &half, [0.0, 0.0], half.duration, &cfg()).unwrap();
    let end = traj.final_coordinates().unwrap();
    assert!((end[0] - 2.0).abs() < 1e-8 && end[1].abs() < 1e-8);
    common::assert_global(&f, &half, &traj, &cfg());
}

#[test]
fn semicircle_drives_along_the_real_axis() {
    for omega in [1.0, 2.5] {
        let fam = ShiftedOscillatorFamily::new(omega).unwrap();
        let prot = ho_semicircle_protocol(omega).unwrap();
        let traj = evolve_coherent(&fam, &prot, [0.0, 0.0], prot.duration, &cfg()).unwrap();
        let TrajectoryStates::Coherent(mu) = &traj.states else { panic!() };
        for (t, m) in traj.times.iter().zip(mu) {
            let want = 2.0 * (0.5 * omega * t).sin().powi(2);
            assert!((m[0] - want).abs() < 1e-8 && m[1].abs() < 1e-8, "t={t}: {m:?}");
        }
        common::assert_close(traj.l_e(), SQRT_2, 1e-8, "l_E");
        // μ runs along a straight line of the flat coherent metric
        let flat: f64 = mu.windows(2).map(|w| geometry::geodesic_distance_coherent(w[0], w[1])).sum();
        common::assert_close(flat, traj.l_e(), 1e-8, "coherent line element");
        common::assert_global(&fam.into(), &prot, &traj, &cfg());
    }
}

#[test]
fn coherent_engine_matches_fock_evolution() {
    let omega = 1.0;
    let fam = ShiftedOscillatorFamily::new(omega).unwrap();
    let f = Family::from(fam);
    let n_max = 30;
    let cases = [
        (ho_semicircle_protocol(omega).unwrap(), [0.0, 0.0]),
        (constant_protocol([0.5, -0.5].into(), 2.0).unwrap(), [0.3, 0.4]),
    ];
    for (prot, mu0) in cases {
        let coh = evolve_coherent(&fam, &prot, mu0, prot.duration, &cfg()).unwrap();
        let psi0 = f.ground_state(&mu0.into(), Some(n_max)).unwrap();
        let fock_run = evolve_matrix(&f, &prot, &psi0, prot.duration, &oracle_cfg()).unwrap();
        let end = coordinate_state(&coh.states, coh.len() - 1, n_max).unwrap();
        let fid = fidelity(&fock_run.final_vector().unwrap(), &end);
        assert!(fid >= 1.0 - 1e-6, "fidelity {fid}");
        assert!((coh.l_e() - fock_run.l_e()).abs() <= 1e-4 * coh.l_e(), "{} vs {}", coh.l_e(), fock_run.l_e());
        common::assert_global(&f, &prot, &coh, &cfg());
        assert!(fock_run.max_norm_error() <= 1e-10);
        assert!(fock_run.l_e() >= fock_run.endpoint_distance() - 1e-8);
    }
}

#[test]
fn gaussian_stationary_and_free_rotation() {
    let omega = 1.7;
    let fam = SqueezedOscillatorFamily::new(omega).unwrap();
    let f = Family::from(fam);
    let still = constant_protocol([0.8, 1.1].into(), 2.0).unwrap();
    let traj = evolve_gaussian(&fam, &still, [0.8, 1.1], 2.0, &cfg()).unwrap();
    let end = traj.final_coordinates().unwrap();
    assert!((end[0] - 0.8).abs() < 1e-10 && (end[1] - 1.1).abs() < 1e-10);
    assert!(traj.l_e() < 1e-8);
    common::assert_global(&f, &still, &traj, &cfg());

    let free = constant_protocol([0.0, 0.0].into(), 1.3).unwrap();
    let traj = evolve_gaussian(&fam, &free, [0.9, 0.4], 1.3, &cfg()).unwrap();
    let TrajectoryStates::Squeezed(c) = &traj.states else { panic!() };
    for (t, p) in traj.times.iter().zip(c) {
        assert!((p[0] - 0.9).abs() < 1e-10);
        let want = 0.4 - 2.0 * omega * t;
        assert!(geoqsl::linalg::wrap_pi(p[1] - want).abs() < 1e-9, "t={t}");
    }
    common::assert_global(&f, &free, &traj, &cfg());
}

#[test]
fn gaussian_orbits_close_after_half_period() {
    let omega = 1.0;
    let fam = SqueezedOscillatorFamily::new(omega).unwrap();
    for (gen, start) in [([0.7, 0.0], [0.2, 2.0]), ([1.2, 2.5], [0.0, 0.0]), ([0.3, 4.0], [1.0, 1.0])] {
        let prot = constant_protocol(gen.into(), PI / omega).unwrap();
        let traj = evolve_gaussian(&fam, &prot, start, prot.duration, &cfg()).unwrap();
        let end = traj.final_coordinates().unwrap();
        assert!(dynamics::squeezed_fs_distance(end, start) < 1e-6, "{end:?} vs {start:?}");
        common::assert_global(&fam.into(), &prot, &traj, &cfg());
    }
}

#[test]
fn gaussian_engine_matches_fock_evolution() {
    let omega = 1.0;
    let fam = SqueezedOscillatorFamily::new(omega).unwrap();
    let f = Family::from(fam);
    let r = 0.4;
    let cases = [
        (squeezed_ramp_protocol(r, RampSpec::new(0.3, 0.5).unwrap()), [r, 4.0 * PI / 3.0]),
        (constant_protocol([0.0, 0.0].into(), 1.0).unwrap(), [0.5, 0.3]),
        (constant_protocol([0.4, 1.0].into(), 1.2).unwrap(), [0.2, -1.0]),
    ];
    for (prot, start) in cases {
        let g = evolve_gaussian(&fam, &prot, start, prot.duration, &cfg()).unwrap();
        let TrajectoryStates::Squeezed(c) = &g.states else { panic!() };
        let max_r = c.iter().map(|p| p[0]).fold(0.0, f64::max).max(r);
        let n_max = fock::squeezed_truncation(max_r, 1e-14) + 4;
        let psi0 = f.ground_state(&start.into(), Some(n_max)).unwrap();
        let fock_run = evolve_matrix(&f, &prot, &psi0, prot.duration, &oracle_cfg()).unwrap();
        let end = coordinate_state(&g.states, g.len() - 1, n_max).unwrap();
        let fid = fidelity(&fock_run.final_vector().unwrap(), &end);
        assert!(fid >= 1.0 - 1e-6, "fidelity {fid}");
        assert!((g.l_e() - fock_run.l_e()).abs() <= 1e-4 * g.l_e(), "{} vs {}", g.l_e(), fock_run.l_e());
        common::assert_global(&f, &prot, &g, &cfg());
        assert!(fock_run.max_norm_error() <= 1e-10);
        assert!(fock_run.l_e() >= fock_run.endpoint_distance() - 1e-8);
    }
}

#[test]
fn energy_variance_examples() {
    let fam = Family::from(QutritFamily::new(2.0, 1.0).unwrap());
    let p: ControlPoint = 0.8.into();
    let h = fam.hamiltonian_matrix(&p, None).unwrap();
    let psi = fam.ground_state(&p, None).unwrap();
    assert!(energy_variance(&psi, &h).unwrap() < 1e-14);
    for (omega, lam) in [(2.0, 1.0), (1.0, 3.0), (2.0, 0.5)] {
        let fam = Family::from(QutritFamily::new(omega, 1.0).unwrap());
        let h0 = fam.hamiltonian_matrix(&0.0.into(), None).unwrap();
        let psi = fam.ground_state(&lam.into(), None).unwrap();
        let l_e = qutrit_closed_forms(omega, lam).unwrap().l_e;
        common::assert_close(energy_variance(&psi, &h0).unwrap(), (l_e * omega / PI).powi(2), 1e-12, "qutrit variance");
    }
    let omega = 1.4;
    let fam = Family::from(ShiftedOscillatorFamily::new(omega).unwrap());
    let (q, p) = (0.9, -1.3);
    let n = 60;
    let h = fam.hamiltonian_matrix(&[0.0, 0.0].into(), Some(n)).unwrap();
    let psi = fam.ground_state(&[q, p].into(), Some(n)).unwrap();
    let alpha2 = 0.5 * (q * q + p * p);
    common::assert_close(energy_variance(&psi, &h).unwrap(), omega * omega * alpha2, 1e-10, "coherent variance");
    let bad = StateVector::from_slice(&[C64::new(1.0, 0.0)]).unwrap();
    assert!(matches!(energy_variance(&bad, &h), Err(Error::DimensionMismatch { .. })));
}

fn qubit_arc_runs(profile: SpeedProfile, factors: &[f64]) -> (f64, Vec<f64>) {
    let fam_q = QubitFamily::new(1.0, FRAC_PI_4).unwrap();
    let fam = Family::from(fam_q);
    let curve = ControlCurve::Arc { fixed: FRAC_PI_4, from: 0.0, to: PI };
    let l_g = geometry::arc_distance_in_control_circle(&fam, FRAC_PI_4, 0.0, PI).unwrap();
    let psi0 = fam.ground_state(&fam_q.circle_point(0.0), None).unwrap();
    let l_e = factors
        .iter()
        .map(|&k| {
            let prot = adiabatic_protocol_with_profile(&fam, &curve, k, profile).unwrap();
            let traj = evolve_matrix(&fam, &prot, &psi0, k, &cfg()).unwrap();
            common::assert_global(&fam, &prot, &traj, &cfg());
            traj.l_e()
        })
        .collect();
    (l_g, l_e)
}

#[test]
fn adiabatic_limit_on_the_qubit_arc() {
    let (l_g, l_e) = qubit_arc_runs(SpeedProfile::Smooth, &[10.0, 40.0, 160.0]);
    let gaps: Vec<f64> = l_e.iter().map(|l| (l - l_g).abs()).collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    // the state follows a field tilted by Ω sinθ/ω, so to first order
    // l_E − l_g = (sin 2θ / 4ω) ∫Ω² dt = 3π²/(8k) for this profile at θ = π/4
    common::assert_close(gaps[2] * 160.0, 3.0 * PI * PI / 8.0, 0.1 * 3.0 * PI * PI / 8.0, "first-order gap");
}

// Starting abruptly at constant speed v leaves the state precessing on a cone
// whose own speed is also v, so the mean speed tends to (4/π) v.
#[test]
fn uniform_speed_start_leaves_a_precession() {
    let (l_g, l_e) = qubit_arc_runs(SpeedProfile::Uniform, &[400.0]);
    common::assert_close(l_e[0] / l_g, 4.0 / PI, 1e-2, "l_E / l_g");
}

#[test]
fn l_e_is_resolution_independent() {
    let fam = Family::from(QubitFamily::new(-1.0, FRAC_PI_4).unwrap());
    let prot = qubit_ramp_protocol(FRAC_PI_4, RampSpec::new(0.4, 1.4778).unwrap());
    let psi0 = fam.ground_state(&[FRAC_PI_4, 0.0].into(), None).unwrap();
    let coarse = evolve_matrix(&fam, &prot, &psi0, prot.duration, &cfg()).unwrap();
    let fine_cfg = EngineConfig { max_step: Some(prot.duration / (4.0 * coarse.len() as f64)), ..cfg() };
    let fine = evolve_matrix(&fam, &prot, &psi0, prot.duration, &fine_cfg).unwrap();
    assert!(fine.len() > coarse.len());
    common::assert_close(fine.l_e(), coarse.l_e(), 1e-6, "l_E at two resolutions");
    common::assert_close(fs_polyline(&fine), fs_polyline(&coarse), 1e-6, "FS polyline at two resolutions");
    common::assert_global(&fam, &prot, &fine, &fine_cfg);
}

#[test]
fn engine_errors() {
    let fam = Family::from(QubitFamily::new(1.0, 0.5).unwrap());
    let prot = constant_protocol([0.5, 0.0].into(), 1.0).unwrap();
    let psi0 = fam.ground_state(&[0.5, 0.0].into(), None).unwrap();
    assert!(matches!(evolve_matrix(&fam, &prot, &psi0, 2.0, &cfg()), Err(Error::ProtocolDomain { .. })));
    let loose = EngineConfig { rtol: 0.5, ..cfg() };
    assert!(matches!(evolve_matrix(&fam, &prot, &psi0, 1.0, &loose), Err(Error::InvalidParameter(_))));
    let wrong = StateVector::from_slice(&[C64::new(1.0, 0.0), C64::default(), C64::default()]).unwrap();
    assert!(matches!(evolve_matrix(&fam, &prot, &wrong, 1.0, &cfg()), Err(Error::DimensionMismatch { .. })));
    let sq = SqueezedOscillatorFamily::new(1.0).unwrap();
    let still = constant_protocol([0.5, 0.0].into(), 1.0).unwrap();
    assert!(evolve_gaussian(&sq, &still, [-0.1, 0.0], 1.0, &cfg()).is_err());
}

#[test]
fn trajectory_csv_layout() {
    let fam = ShiftedOscillatorFamily::new(1.0).unwrap();
    let prot = ho_semicircle_protocol(1.0).unwrap();
    let traj = evolve_coherent(&fam, &prot, [0.0, 0.0], prot.duration, &cfg()).unwrap();
    let mut buf = Vec::new();
    traj.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.first(), Some(&"t"));
    assert_eq!(&header[header.len() - 2..], &["deltaE", "cumulative_length"]);
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), traj.len());
    let last = rows.last().unwrap();
    assert_eq!(*last.last().unwrap(), traj.l_e());
    assert_eq!(last[0], traj.times[traj.len() - 1]);
    assert_eq!(dynamics::csv_float(0.1).parse::<f64>().unwrap(), 0.1);

    let qfam = Family::from(QubitFamily::new(1.0, 0.5).unwrap());
    let psi0 = StateVector::new(DVector::from_vec(vec![C64::new(1.0, 0.0), C64::default()])).unwrap();
    let prot = constant_protocol([0.5, 0.0].into(), 1.0).unwrap();
    let traj = evolve_matrix(&qfam, &prot, &psi0, 1.0, &cfg()).unwrap();
    let mut buf = Vec::new();
    traj.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap().split(',').count(), 1 + 4 + 2);
    common::assert_global(&qfam, &prot, &traj, &cfg());
}
