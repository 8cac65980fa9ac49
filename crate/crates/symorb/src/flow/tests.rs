use super::*;
use crate::sympath::{cz_index_rotation, cz_index_spectral, rs_index_crossing, rs_index_spectral};
use crate::systems::SystemModel;
use approx::assert_relative_eq;
use std::f64::consts::PI;

fn golden() -> f64 {
    0.5 * (1.0 + 5.0f64.sqrt())
}

fn ellipsoid() -> SystemModel {
    SystemModel::ellipsoid(1.0, golden()).unwrap()
}

/// First fundamental orbit: the circle in the z1-plane, period pi r1^2.
fn p1_trajectory(model: &SystemModel, periods: u32, spu: usize) -> Trajectory {
    let r1 = model.param("r1_sq").sqrt();
    let t1 = PI * model.param("r1_sq");
    integrate(
        model,
        &Vector4::new(r1, 0.0, 0.0, 0.0),
        t1 * periods as f64,
        spu * periods as usize,
        &Integrator::default(),
    )
    .unwrap()
}

#[test]
fn hopf_fiber_closes_after_pi() {
    let model = SystemModel::hopf();
    let traj = integrate(
        &model,
        &Vector4::new(1.0, 0.0, 0.0, 0.0),
        PI,
        256,
        &Integrator::default(),
    )
    .unwrap();
    assert!((traj.end() - traj.start()).norm() < 1e-10);
    assert!(traj.energy_drift < 1e-9);
}

#[test]
fn ellipsoid_orbit_closes_after_minimal_period() {
    let model = ellipsoid();
    let traj = p1_trajectory(&model, 1, 256);
    assert!((traj.end() - traj.start()).norm() < 1e-10);
    assert!(traj.energy_drift < 1e-9);
}

#[test]
fn zero_time_trajectory_is_a_point() {
    let model = ellipsoid();
    let z0 = Vector4::new(1.0, 0.0, 0.0, 0.0);
    let traj = integrate(&model, &z0, 0.0, 16, &Integrator::default()).unwrap();
    assert_eq!(traj.len(), 1);
    assert_eq!(traj.start(), z0);
}

#[test]
fn monodromy_starts_at_identity_and_stays_symplectic() {
    let model = ellipsoid();
    let traj = p1_trajectory(&model, 1, 128);
    let mono = integrate_variational(&model, &traj, &Integrator::default()).unwrap();
    assert_eq!(mono.matrices[0], Matrix4::identity());
    assert!(mono.symplectic_drift < 1e-7);
    // flow-direction transport: M(t) X(x0) = X(x(t))
    let x0 = model.vector_field(&traj.start()).unwrap();
    let mut dev: f64 = 0.0;
    for (i, m) in mono.matrices.iter().enumerate() {
        let lhs = m * x0;
        let rhs = model.vector_field(&traj.states[i]).unwrap();
        dev = dev.max((lhs - rhs).norm());
    }
    assert!(dev < 1e-6, "flow-direction transport deviates by {dev:.3e}");
}

#[test]
fn ellipsoid_monodromy_eigenvalues() {
    // over one period of the z1-circle: {1, 1, exp(+-2 pi i r1^2/r2^2)}
    let model = ellipsoid();
    let traj = p1_trajectory(&model, 1, 128);
    let mono = integrate_variational(&model, &traj, &Integrator::default()).unwrap();
    let m = nalgebra::DMatrix::from_column_slice(4, 4, mono.matrices.last().unwrap().as_slice());
    let eigs = m.complex_eigenvalues();
    let theta = 2.0 * PI / golden();
    let mut expected = [
        num_complex::Complex64::new(1.0, 0.0),
        num_complex::Complex64::new(1.0, 0.0),
        num_complex::Complex64::new(theta.cos(), theta.sin()),
        num_complex::Complex64::new(theta.cos(), -theta.sin()),
    ];
    let mut got: Vec<num_complex::Complex64> =
        eigs.iter().map(|e| num_complex::Complex64::new(e.re, e.im)).collect();
    // match greedily
    for e in &mut expected {
        let (idx, _) = got
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - *e).norm().total_cmp(&(b.1 - *e).norm()))
            .unwrap();
        let g = got.remove(idx);
        assert!((g - *e).norm() < 1e-7, "eigenvalue {g} vs expected {e}");
        *e = g;
    }
}

#[test]
fn hopf_monodromy_is_identity() {
    let model = SystemModel::hopf();
    let traj = integrate(
        &model,
        &Vector4::new(1.0, 0.0, 0.0, 0.0),
        PI,
        128,
        &Integrator::default(),
    )
    .unwrap();
    let mono = integrate_variational(&model, &traj, &Integrator::default()).unwrap();
    assert!((mono.matrices.last().unwrap() - Matrix4::identity()).norm() < 1e-8);
}

#[test]
fn global_frame_meets_invariants() {
    let model = ellipsoid();
    let traj = p1_trajectory(&model, 1, 128);
    let frame = build_frame(&model, &traj, false, None).unwrap();
    let (lambda_dev, tangent_dev, area_dev) = frame_defects(&model, &traj, &frame);
    assert!(lambda_dev < 1e-10, "lambda pairing {lambda_dev:.3e}");
    assert!(tangent_dev < 1e-10, "level tangency {tangent_dev:.3e}");
    assert!(area_dev < 1e-8, "area normalization {area_dev:.3e}");
}

#[test]
fn symmetric_frame_satisfies_mirror_relation() {
    let model = ellipsoid();
    let traj = p1_trajectory(&model, 1, 256);
    let rho = model.involution("rho").unwrap();
    let frame = build_frame(&model, &traj, true, Some(rho)).unwrap();
    assert!(frame.symmetric_flag);
    assert!(symmetric_frame_defect(&frame, rho) < 1e-8);
    // still a valid unitary frame
    let (lambda_dev, tangent_dev, area_dev) = frame_defects(&model, &traj, &frame);
    assert!(lambda_dev < 1e-9 && tangent_dev < 1e-9 && area_dev < 1e-8);
}

#[test]
fn frame_winding_global_vs_constant_section() {
    // Along the z1-circle the global frame winds once against the constant
    // z2-plane frame: wind(global, const) = +1.
    let model = ellipsoid();
    let traj = p1_trajectory(&model, 1, 256);
    let global = build_frame(&model, &traj, false, None).unwrap();
    let constant =
        constant_direction_frame(&model, &traj, &Vector4::new(0.0, 0.0, 1.0, 0.0)).unwrap();
    assert_eq!(frame_winding(&global, &constant).unwrap(), 1);
    assert_eq!(frame_winding(&constant, &global).unwrap(), -1);
    assert_eq!(frame_winding(&global, &global).unwrap(), 0);
}

#[test]
fn transverse_path_of_first_orbit_rotates_by_golden_ratio() {
    let model = ellipsoid();
    let traj = p1_trajectory(&model, 1, 512);
    let mono = integrate_variational(&model, &traj, &Integrator::default()).unwrap();
    let frame = build_frame(&model, &traj, false, None).unwrap();
    let path = transverse_path(&model, &traj, &mono, &frame, 1).unwrap();
    let report = cz_index_rotation(&path).unwrap();
    // rotation number 1 + r1^2/r2^2 = 1 + 1/golden = golden
    assert_relative_eq!(
        report.rotation_number.unwrap(),
        golden(),
        epsilon = 1e-8
    );
    assert_eq!(report.mu_cz, Some(3));
}

#[test]
fn transverse_path_spectral_agreement_and_chord_index() {
    let model = ellipsoid();
    let traj = p1_trajectory(&model, 1, 512);
    let mono = integrate_variational(&model, &traj, &Integrator::default()).unwrap();
    let rho = model.involution("rho").unwrap();
    let frame = build_frame(&model, &traj, true, Some(rho)).unwrap();
    let path = transverse_path(&model, &traj, &mono, &frame, 1).unwrap();
    let lp = path.generator().unwrap();
    assert!(lp.symmetric_flag());
    let cz = cz_index_spectral(lp, 1).unwrap();
    assert_eq!(cz.mu_cz, Some(3));
    let rs = rs_index_spectral(lp, 1).unwrap();
    assert_eq!(rs.mu_rs.unwrap().to_string(), "3/2");
    let rsx = rs_index_crossing(&path).unwrap();
    assert_eq!(rsx.mu_rs, rs.mu_rs);
}

#[test]
fn hopf_fiber_transverse_path_is_degenerate() {
    let model = SystemModel::hopf();
    let traj = integrate(
        &model,
        &Vector4::new(1.0, 0.0, 0.0, 0.0),
        PI,
        512,
        &Integrator::default(),
    )
    .unwrap();
    let mono = integrate_variational(&model, &traj, &Integrator::default()).unwrap();
    let frame = build_frame(&model, &traj, false, None).unwrap();
    let path = transverse_path(&model, &traj, &mono, &frame, 1).unwrap();
    assert!(matches!(
        cz_index_rotation(&path),
        Err(crate::error::Error::Degenerate { .. })
    ));
}

#[test]
fn reversibility_transports_monodromy() {
    // M(-t) = DR M(t) DR at mirrored times, with M(-t) = M(T-t) M(T)^{-1}.
    let model = ellipsoid();
    let traj = p1_trajectory(&model, 1, 128);
    let mono = integrate_variational(&model, &traj, &Integrator::default()).unwrap();
    let rho = model.involution("rho").unwrap().matrix;
    let n = traj.len() - 1;
    let m_t = mono.matrices[n].try_inverse().unwrap();
    let mut dev: f64 = 0.0;
    for i in 0..=n {
        let lhs = mono.matrices[n - i] * m_t;
        let rhs = rho * mono.matrices[i] * rho;
        dev = dev.max((lhs - rhs).norm());
    }
    assert!(dev < 1e-6, "reversibility transport deviates by {dev:.3e}");
}

#[test]
fn index_invariant_under_time_reparameterization() {
    // The same orbit integrated on the ellipsoid level directly and after
    // doubling the Hamiltonian (half the speed) gives identical indices.
    let model = ellipsoid();
    let slow = SystemModel::ellipsoid(2.0, 2.0 * golden()).unwrap();
    let r1 = 1.0;
    let t1 = PI;
    let traj_fast = integrate(
        &model,
        &Vector4::new(r1, 0.0, 0.0, 0.0),
        t1,
        512,
        &Integrator::default(),
    )
    .unwrap();
    let traj_slow = integrate(
        &slow,
        &Vector4::new(r1, 0.0, 0.0, 0.0),
        2.0 * t1,
        512,
        &Integrator::default(),
    )
    .unwrap();
    let path_fast = {
        let mono = integrate_variational(&model, &traj_fast, &Integrator::default()).unwrap();
        let frame = build_frame(&model, &traj_fast, false, None).unwrap();
        transverse_path(&model, &traj_fast, &mono, &frame, 1).unwrap()
    };
    let path_slow = {
        let mono = integrate_variational(&slow, &traj_slow, &Integrator::default()).unwrap();
        let frame = build_frame(&slow, &traj_slow, false, None).unwrap();
        transverse_path(&slow, &traj_slow, &mono, &frame, 1).unwrap()
    };
    let fast = cz_index_rotation(&path_fast).unwrap();
    let slow_r = cz_index_rotation(&path_slow).unwrap();
    assert_eq!(fast.mu_cz, slow_r.mu_cz);
    assert_relative_eq!(
        fast.rotation_number.unwrap(),
        slow_r.rotation_number.unwrap(),
        epsilon = 1e-8
    );
}
