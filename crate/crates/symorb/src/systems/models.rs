//! Hamiltonians, gradients, Hessians, and symmetry lists of the catalog.

use super::{deck_map, Chart, Involution, SystemModel, SystemName};
use crate::error::{Error, Result};
use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use std::collections::BTreeMap;

/// Position/momentum split for the mechanical systems: `z = (q1, p1, q2, p2)`.
fn mech_split(z: &Vector4<f64>) -> (Vector2<f64>, Vector2<f64>) {
    (Vector2::new(z[0], z[2]), Vector2::new(z[1], z[3]))
}

pub(super) fn hopf() -> SystemModel {
    let mut m = ellipsoid_unchecked(1.0, 1.0);
    m.name = SystemName::Hopf;
    // Principal involution (z1, z2) -> (conj z1, -conj z2): the one whose
    // invariant pages sit at angles pi/2 and 3 pi/2.
    let rho = Involution::from_phases(0.0, std::f64::consts::PI, "rho").unwrap();
    let cyc = deck_map(3, 1).unwrap();
    let mut invs = vec![
        rho.clone(),
        Involution::from_phases(0.0, 0.0, "rho_conj").unwrap(),
    ];
    let mut pow = Matrix4::identity();
    for j in 1..3 {
        pow = cyc.matrix * pow;
        invs.push(
            Involution::new(pow * rho.matrix, &format!("g{j}_rho"), Chart::Base).unwrap(),
        );
    }
    m.involutions = invs;
    m.cyclic = Some(cyc);
    m
}

pub(super) fn ellipsoid(r1_sq: f64, r2_sq: f64) -> Result<SystemModel> {
    if !(r1_sq > 0.0 && r2_sq > 0.0) {
        return Err(Error::InvalidInput("semi-axes must be positive".into()));
    }
    Ok(ellipsoid_unchecked(r1_sq, r2_sq))
}

fn ellipsoid_unchecked(r1_sq: f64, r2_sq: f64) -> SystemModel {
    let mut params = BTreeMap::new();
    params.insert("r1_sq".into(), r1_sq);
    params.insert("r2_sq".into(), r2_sq);
    let involutions = vec![
        // fixed set is the (x1, x2) ellipse
        Involution::from_phases(0.0, 0.0, "rho").unwrap(),
        // the page-invariance involution of the open book at angles pi/2, 3pi/2
        Involution::from_phases(0.0, std::f64::consts::PI, "rho_page").unwrap(),
    ];
    SystemModel::assemble(SystemName::Ellipsoid, params, involutions, None)
}

pub(super) fn pcr3bp(mu: f64, c: f64) -> Result<SystemModel> {
    if !(0.0 < mu && mu < 1.0) {
        return Err(Error::InvalidInput(format!(
            "mass ratio must lie in (0, 1), got {mu}"
        )));
    }
    let mut params = BTreeMap::new();
    params.insert("mu".into(), mu);
    params.insert("c".into(), c);
    let involutions = vec![
        // (q1, -q2, -p1, p2) in interleaved order (q1, p1, q2, p2)
        Involution::new(
            Matrix4::from_diagonal(&Vector4::new(1.0, -1.0, -1.0, 1.0)),
            "rho",
            Chart::Base,
        )?,
        // the two lifts of rho to the Levi-Civita double cover
        Involution::new(
            Matrix4::from_diagonal(&Vector4::new(1.0, -1.0, -1.0, 1.0)),
            "rho1",
            Chart::LeviCivita,
        )?,
        Involution::new(
            Matrix4::from_diagonal(&Vector4::new(-1.0, 1.0, 1.0, -1.0)),
            "rho2",
            Chart::LeviCivita,
        )?,
    ];
    Ok(SystemModel::assemble(
        SystemName::Pcr3bp,
        params,
        involutions,
        None,
    ))
}

pub(super) fn hill(c: f64) -> SystemModel {
    let mut params = BTreeMap::new();
    params.insert("c".into(), c);
    let involutions = vec![
        Involution::new(
            Matrix4::from_diagonal(&Vector4::new(1.0, -1.0, -1.0, 1.0)),
            "rho1",
            Chart::Base,
        )
        .unwrap(),
        Involution::new(
            Matrix4::from_diagonal(&Vector4::new(-1.0, 1.0, 1.0, -1.0)),
            "rho2",
            Chart::Base,
        )
        .unwrap(),
    ];
    SystemModel::assemble(SystemName::Hill, params, involutions, None)
}

/// The triangular symmetry: simultaneous rotation of the q- and p-planes.
fn henon_sigma_matrix(angle: f64) -> Matrix4<f64> {
    let (s, c) = angle.sin_cos();
    // q components are slots 0, 2; p components are slots 1, 3
    let mut m = Matrix4::zeros();
    m[(0, 0)] = c;
    m[(0, 2)] = -s;
    m[(2, 0)] = s;
    m[(2, 2)] = c;
    m[(1, 1)] = c;
    m[(1, 3)] = -s;
    m[(3, 1)] = s;
    m[(3, 3)] = c;
    m
}

pub(super) fn henon_heiles(c: f64) -> SystemModel {
    let mut params = BTreeMap::new();
    params.insert("c".into(), c);
    let sigma = henon_sigma_matrix(std::f64::consts::TAU / 3.0);
    let rho = Involution::new(
        Matrix4::from_diagonal(&Vector4::new(-1.0, 1.0, 1.0, -1.0)),
        "rho",
        Chart::Base,
    )
    .unwrap();
    let mut involutions = vec![rho.clone()];
    let mut pow = Matrix4::identity();
    for j in 1..3 {
        pow = sigma * pow;
        involutions
            .push(Involution::new(pow * rho.matrix, &format!("sigma{j}_rho"), Chart::Base).unwrap());
    }
    let cyclic = super::CyclicSymmetry::new(sigma, 3, "sigma").unwrap();
    SystemModel::assemble(SystemName::HenonHeiles, params, involutions, Some(cyclic))
}

pub(super) fn hamiltonian(model: &SystemModel, z: &Vector4<f64>) -> f64 {
    match model.name {
        SystemName::Hopf | SystemName::Ellipsoid => {
            let (r1, r2) = (model.param("r1_sq"), model.param("r2_sq"));
            (z[0] * z[0] + z[1] * z[1]) / r1 + (z[2] * z[2] + z[3] * z[3]) / r2
        }
        SystemName::Pcr3bp => {
            let mu = model.param("mu");
            let (q, p) = mech_split(z);
            let r1 = q.norm();
            let r2 = (q - Vector2::new(1.0, 0.0)).norm();
            0.5 * p.norm_squared() - (1.0 - mu) / r1 - mu / r2 + q[0] * p[1] - q[1] * p[0]
                - mu * p[1]
        }
        SystemName::Hill => {
            let (q, p) = mech_split(z);
            0.5 * p.norm_squared() - 1.0 / q.norm() + q[0] * p[1] - q[1] * p[0] - q[0] * q[0]
                + 0.5 * q[1] * q[1]
        }
        SystemName::HenonHeiles => {
            let (q, p) = mech_split(z);
            0.5 * p.norm_squared() + 0.5 * q.norm_squared() + q[0] * q[0] * q[1]
                - q[1] * q[1] * q[1] / 3.0
        }
    }
}

pub(super) fn gradient(model: &SystemModel, z: &Vector4<f64>) -> Vector4<f64> {
    match model.name {
        SystemName::Hopf | SystemName::Ellipsoid => {
            let (r1, r2) = (model.param("r1_sq"), model.param("r2_sq"));
            Vector4::new(
                2.0 * z[0] / r1,
                2.0 * z[1] / r1,
                2.0 * z[2] / r2,
                2.0 * z[3] / r2,
            )
        }
        SystemName::Pcr3bp => {
            let mu = model.param("mu");
            let (q, p) = mech_split(z);
            let d1 = q;
            let d2 = q - Vector2::new(1.0, 0.0);
            let (r1c, r2c) = (d1.norm().powi(3), d2.norm().powi(3));
            let gq = d1 * ((1.0 - mu) / r1c) + d2 * (mu / r2c) + Vector2::new(p[1], -p[0]);
            let gp = Vector2::new(p[0] - q[1], p[1] + q[0] - mu);
            Vector4::new(gq[0], gp[0], gq[1], gp[1])
        }
        SystemName::Hill => {
            let (q, p) = mech_split(z);
            let r3 = q.norm().powi(3);
            let gq = Vector2::new(
                q[0] / r3 + p[1] - 2.0 * q[0],
                q[1] / r3 - p[0] + q[1],
            );
            let gp = Vector2::new(p[0] - q[1], p[1] + q[0]);
            Vector4::new(gq[0], gp[0], gq[1], gp[1])
        }
        SystemName::HenonHeiles => {
            let (q, p) = mech_split(z);
            let gq = Vector2::new(
                q[0] + 2.0 * q[0] * q[1],
                q[1] + q[0] * q[0] - q[1] * q[1],
            );
            Vector4::new(gq[0], p[0], gq[1], p[1])
        }
    }
}

/// `d/dq (q / |q|^3)`: the Kepler Hessian block.
fn kepler_hess(d: Vector2<f64>) -> Matrix2<f64> {
    let r = d.norm();
    let r3 = r.powi(3);
    let r5 = r.powi(5);
    Matrix2::identity() / r3 - d * d.transpose() * (3.0 / r5)
}

/// Assembles the interleaved 4x4 Hessian from mechanical `(q, p)` blocks.
fn interleave_blocks(hqq: Matrix2<f64>, hqp: Matrix2<f64>, hpp: Matrix2<f64>) -> Matrix4<f64> {
    let mut h = Matrix4::zeros();
    // interleaved index: q1 p1 q2 p2 -> q slots {0,2}, p slots {1,3}
    let qi = [0usize, 2];
    let pi = [1usize, 3];
    for a in 0..2 {
        for b in 0..2 {
            h[(qi[a], qi[b])] = hqq[(a, b)];
            h[(pi[a], pi[b])] = hpp[(a, b)];
            h[(qi[a], pi[b])] = hqp[(a, b)];
            h[(pi[b], qi[a])] = hqp[(a, b)];
        }
    }
    h
}

pub(super) fn hessian(model: &SystemModel, z: &Vector4<f64>) -> Matrix4<f64> {
    match model.name {
        SystemName::Hopf | SystemName::Ellipsoid => {
            let (r1, r2) = (model.param("r1_sq"), model.param("r2_sq"));
            Matrix4::from_diagonal(&Vector4::new(
                2.0 / r1,
                2.0 / r1,
                2.0 / r2,
                2.0 / r2,
            ))
        }
        SystemName::Pcr3bp => {
            let mu = model.param("mu");
            let (q, _) = mech_split(z);
            let hqq = kepler_hess(q) * (1.0 - mu) + kepler_hess(q - Vector2::new(1.0, 0.0)) * mu;
            let hqp = Matrix2::new(0.0, 1.0, -1.0, 0.0);
            interleave_blocks(hqq, hqp, Matrix2::identity())
        }
        SystemName::Hill => {
            let (q, _) = mech_split(z);
            let hqq = kepler_hess(q) + Matrix2::new(-2.0, 0.0, 0.0, 1.0);
            let hqp = Matrix2::new(0.0, 1.0, -1.0, 0.0);
            interleave_blocks(hqq, hqp, Matrix2::identity())
        }
        SystemName::HenonHeiles => {
            let (q, _) = mech_split(z);
            let hqq = Matrix2::new(
                1.0 + 2.0 * q[1],
                2.0 * q[0],
                2.0 * q[0],
                1.0 - 2.0 * q[1],
            );
            interleave_blocks(hqq, Matrix2::zeros(), Matrix2::identity())
        }
    }
}

pub(super) fn collision_distance(model: &SystemModel, z: &Vector4<f64>) -> Option<f64> {
    match model.name {
        SystemName::Pcr3bp => {
            let (q, _) = mech_split(z);
            Some(q.norm().min((q - Vector2::new(1.0, 0.0)).norm()))
        }
        SystemName::Hill => {
            let (q, _) = mech_split(z);
            Some(q.norm())
        }
        _ => None,
    }
}
