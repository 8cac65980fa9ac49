//! Rotation-number index engine.
//!
//! For a non-degenerate path ending at an elliptic matrix the index is
//! `2 floor(rho) + 1`, and at a hyperbolic matrix `2 rho`, where `rho` is the
//! transverse rotation number of the path. The rotation number is a path
//! invariant: it is pinned down by tracking the continuous argument of
//! `Phi(t) v` along the whole path, never from the endpoint eigenvalues
//! alone. Two facts make the extraction exact:
//!
//! - the one-period windings of any two vectors differ by less than 1/2,
//!   and `rho` lies within 1/2 of each of them;
//! - `rho` is congruent mod 1 to the geometric rotation angle of the
//!   endpoint matrix (elliptic case), or is exactly the half-integer winding
//!   of an eigendirection (hyperbolic case).
//!
//! Intersecting the two constraints determines `rho` exactly.

use super::types::{Half, IndexMethod, IndexReport, SymplecticPath};
use crate::error::{Error, Result};
use crate::linalg::total_turning;
use nalgebra::{Matrix2, Vector2};
use std::collections::BTreeMap;
use std::f64::consts::TAU;

/// Endpoint classification margin on `|tr(Phi(k))| - 2`.
pub const CLASSIFICATION_MARGIN: f64 = 1e-8;

/// Total turning of `t -> Phi(t) v` along the sampled path, in turns.
fn vector_winding(path: &SymplecticPath, v: &Vector2<f64>) -> Result<f64> {
    let samples: Vec<Vector2<f64>> = path.matrices().iter().map(|m| m * v).collect();
    let total = total_turning(&samples).map_err(|step| {
        Error::IllConditioned(format!(
            "path too coarsely sampled: argument step {step:.3} rad"
        ))
    })?;
    Ok(total / TAU)
}

/// Geometric rotation angle of an elliptic matrix, in `(0, tau)`.
///
/// Eigenvalues are `exp(+-i theta)` with `theta = acos(tr/2)`; the actual
/// sense of rotation on the plane is fixed by the orientation of the real
/// and imaginary parts of the eigenvector.
fn elliptic_angle(m: &Matrix2<f64>) -> f64 {
    let tr = m.trace();
    let theta = (tr / 2.0).clamp(-1.0, 1.0).acos();
    let sin_t = theta.sin();
    // eigenvector a + i b for e^{i theta}: b = (cos(theta) a - M a) / sin(theta)
    let a = {
        let e1 = Vector2::new(1.0, 0.0);
        let b1 = (e1 * theta.cos() - m * e1) / sin_t;
        if b1.norm() > 1e-8 || (m * e1 - e1 * theta.cos()).norm() > 1e-8 {
            e1
        } else {
            Vector2::new(0.0, 1.0)
        }
    };
    let b = (a * theta.cos() - m * a) / sin_t;
    let orient = a[0] * b[1] - a[1] * b[0];
    if orient < 0.0 {
        theta
    } else {
        TAU - theta
    }
}

/// Conley-Zehnder index from the transverse rotation number of the path.
pub fn cz_index_rotation(path: &SymplecticPath) -> Result<IndexReport> {
    let end = *path.end_matrix();
    let margin = path.periodic_margin();
    let k = path.iterate_count();
    if margin < 1e-8 {
        return Err(Error::Degenerate {
            kind: "path",
            detail: format!("det(Phi({k}) - Id) = {margin:.3e}"),
            margin,
        });
    }
    let tr = end.trace();
    if (tr.abs() - 2.0).abs() < CLASSIFICATION_MARGIN {
        return Err(Error::Degenerate {
            kind: "endpoint",
            detail: format!("parabolic endpoint, |tr| - 2 = {:.3e}", tr.abs() - 2.0),
            margin: (tr.abs() - 2.0).abs(),
        });
    }

    let mut residuals = BTreeMap::new();
    residuals.insert("degeneracy_margin".into(), margin);

    if tr.abs() < 2.0 {
        // Elliptic: rho = angle/tau mod 1, pinned by the winding window.
        let angle = elliptic_angle(&end);
        let mut wmin = f64::INFINITY;
        let mut wmax = f64::NEG_INFINITY;
        for v in [
            Vector2::new(1.0, 0.0),
            Vector2::new(0.0, 1.0),
            Vector2::new(std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2),
        ] {
            let w = vector_winding(path, &v)?;
            wmin = wmin.min(w);
            wmax = wmax.max(w);
        }
        if wmax - wmin >= 0.5 {
            return Err(Error::Internal(format!(
                "winding window [{wmin:.6}, {wmax:.6}] wider than 1/2"
            )));
        }
        let frac = angle / TAU;
        // unique representative of frac + Z within (wmax - 1/2, wmin + 1/2)
        let center = 0.5 * (wmin + wmax);
        let rho = frac + (center - frac).round();
        let slack = (rho - (wmax - 0.5)).min((wmin + 0.5) - rho);
        if slack < 1e-6 {
            return Err(Error::IllConditioned(format!(
                "rotation number {rho:.9} too close to the winding window edge \
                 (slack {slack:.3e}); refine the path sampling"
            )));
        }
        let floor = rho.floor();
        if (rho - floor).min(floor + 1.0 - rho) < 1e-9 {
            return Err(Error::Degenerate {
                kind: "rotation number",
                detail: format!("elliptic rotation number {rho:.12} is nearly integral"),
                margin: (rho - rho.round()).abs(),
            });
        }
        residuals.insert("window_slack".into(), slack);
        let alpha = Half::new_int(floor as i64);
        let report = IndexReport {
            mu_cz: Some(alpha.0 + 1),
            mu_rs: None,
            alpha,
            p: Some(1),
            method: IndexMethod::Rotation,
            rotation_number: Some(rho),
            residuals,
        };
        report.check_consistency()?;
        Ok(report)
    } else {
        // Hyperbolic: the winding of an eigendirection is an exact
        // half-integer (integer for positive eigenvalues).
        let disc = (tr * tr - 4.0).sqrt();
        let lambda = 0.5 * (tr + tr.signum() * disc);
        // eigenvector of the larger-modulus eigenvalue
        let m = end - Matrix2::identity() * lambda;
        let row0 = Vector2::new(m[(0, 0)], m[(0, 1)]);
        let row1 = Vector2::new(m[(1, 0)], m[(1, 1)]);
        let v = if row0.norm() > row1.norm() {
            Vector2::new(-row0[1], row0[0])
        } else {
            Vector2::new(-row1[1], row1[0])
        }
        .normalize();
        let w = vector_winding(path, &v)?;
        let rho = Half::from_f64(w, 1e-6).map_err(|_| {
            Error::IllConditioned(format!(
                "hyperbolic winding {w:.9} is not a half-integer; refine sampling"
            ))
        })?;
        residuals.insert("roundness".into(), (w - rho.as_f64()).abs());
        // mu = 2 rho, and rho.0 already stores twice the rotation number
        let mu = rho.0;
        let p = (mu.rem_euclid(2)) as u8;
        let alpha = Half::new_int((mu - p as i64) / 2);
        let report = IndexReport {
            mu_cz: Some(mu),
            mu_rs: None,
            alpha,
            p: Some(p),
            method: IndexMethod::Rotation,
            rotation_number: Some(rho.as_f64()),
            residuals,
        };
        report.check_consistency()?;
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sympath::types::{path_from_loop, SymmetricLoop};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn rotation_path_has_rotation_number_theta() {
        let theta = 0.4;
        let s = Matrix2::identity() * (TAU * theta);
        let lp = SymmetricLoop::constant(s, 64).unwrap();
        let path = path_from_loop(&lp, 1).unwrap();
        let report = cz_index_rotation(&path).unwrap();
        assert_relative_eq!(report.rotation_number.unwrap(), theta, epsilon = 1e-9);
        assert_eq!(report.mu_cz, Some(1));
    }

    #[test]
    fn hyperbolic_path_rotation_number_zero() {
        // generator of diag(e^t, e^{-t})
        let s = Matrix2::new(0.0, -1.0, -1.0, 0.0);
        let lp = SymmetricLoop::constant(s, 64).unwrap();
        let path = path_from_loop(&lp, 1).unwrap();
        let report = cz_index_rotation(&path).unwrap();
        assert_eq!(report.rotation_number, Some(0.0));
        assert_eq!(report.mu_cz, Some(0));
    }

    #[test]
    fn iterated_rotation_scales_rotation_number() {
        let theta = 0.37;
        let s = Matrix2::identity() * (TAU * theta);
        let lp = SymmetricLoop::constant(s, 64).unwrap();
        for k in 1..=4u32 {
            let path = path_from_loop(&lp, k).unwrap();
            let report = cz_index_rotation(&path).unwrap();
            assert_relative_eq!(
                report.rotation_number.unwrap(),
                theta * k as f64,
                epsilon = 1e-8
            );
            let expect = 2 * (theta * k as f64).floor() as i64 + 1;
            assert_eq!(report.mu_cz, Some(expect));
        }
    }

    #[test]
    fn parabolic_endpoint_rejected() {
        // theta = 0.5 ends at rotation by pi: trace = -2, parabolic margin 0
        let s = Matrix2::identity() * (TAU * 0.5);
        let lp = SymmetricLoop::constant(s, 64).unwrap();
        let path = path_from_loop(&lp, 1).unwrap();
        match cz_index_rotation(&path) {
            Err(Error::Degenerate { .. }) => {}
            other => panic!("expected degeneracy, got {other:?}"),
        }
    }

    #[test]
    fn negative_hyperbolic_half_integer_rotation() {
        // S constant with J0 S = [[0.3, pi], [-pi, 0.3]]-type generator:
        // produce a path that rotates by pi while stretching, ending at
        // -diag(e^a, e^{-a}). Generator: Phi(t) = R(pi t) diag(e^{at}, e^{-at}),
        // S = -J0 Phi' Phi^{-1} evaluated directly.
        let a = 0.4;
        let lp = SymmetricLoop::from_fn(256, false, |t| {
            let r = crate::linalg::rot2(std::f64::consts::PI * t);
            let d = Matrix2::new((a * t).exp(), 0.0, 0.0, (-a * t).exp());
            let dr = crate::linalg::j0() * r * PI;
            let dd = Matrix2::new(a * (a * t).exp(), 0.0, 0.0, -a * (-a * t).exp());
            let phi = r * d;
            let dphi = dr * d + r * dd;
            let s = -crate::linalg::j0() * dphi * phi.try_inverse().unwrap();
            // symmetrize; the construction is symmetric up to roundoff
            Matrix2::new(
                s[(0, 0)],
                0.5 * (s[(0, 1)] + s[(1, 0)]),
                0.5 * (s[(0, 1)] + s[(1, 0)]),
                s[(1, 1)],
            )
        })
        .unwrap();
        let path = path_from_loop(&lp, 1).unwrap();
        let end = path.end_matrix();
        assert!(end.trace() < -2.0, "trace {}", end.trace());
        let report = cz_index_rotation(&path).unwrap();
        assert_eq!(report.rotation_number, Some(0.5));
        assert_eq!(report.mu_cz, Some(1));
    }
}
