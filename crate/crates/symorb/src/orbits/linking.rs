//! Gauss linking numbers, self-linking via frame push-offs, and the
//! hypothesis-predicate report.

use super::OrbitRecord;
use crate::error::{Error, Result};
use crate::flow::TrivializationFrame;
use crate::linalg::rotate_to_e4;
use nalgebra::{Vector3, Vector4};
use serde::Serialize;
use std::f64::consts::PI;

/// Result of a self-linking computation.
#[derive(Debug, Clone, Serialize)]
pub struct SelfLinking {
    /// `lk / p^2` for a `p`-fold covered orbit; an integer when `p = 1`.
    pub value: f64,
    /// Raw linking number of the curve with its push-off.
    pub lk: i64,
    pub covering: u32,
    /// Distance of the Gauss integral from the nearest integer.
    pub deviation: f64,
    /// Push-off scale at which the value stabilized.
    pub scale: f64,
}

/// Closed-curve samples on the unit sphere (radially normalized, endpoint
/// duplicate removed).
fn normalize_curve(states: &[Vector4<f64>]) -> Vec<Vector4<f64>> {
    let n = states.len() - 1;
    states[..n].iter().map(|x| x / x.norm()).collect()
}

/// Minimal pairwise distance between two sampled curves.
fn min_distance(a: &[Vector4<f64>], b: &[Vector4<f64>]) -> f64 {
    let mut d = f64::INFINITY;
    for x in a {
        for y in b {
            d = d.min((x - y).norm());
        }
    }
    d
}

/// Chooses a stereographic pole maximizing the minimal distance to both
/// curves, from a deterministic low-discrepancy candidate set.
fn choose_pole(a: &[Vector4<f64>], b: &[Vector4<f64>]) -> Vector4<f64> {
    let alphas = [0.5545497, 0.308517, 0.143475, 0.733734];
    let mut best = (f64::NEG_INFINITY, Vector4::new(0.0, 0.0, 0.0, 1.0));
    for i in 0..400usize {
        let mut v = Vector4::zeros();
        for d in 0..4 {
            v[d] = ((i + 1) as f64 * alphas[d]).fract() * 2.0 - 1.0;
        }
        if v.norm() < 1e-6 {
            continue;
        }
        let p = v.normalize();
        let d = min_distance(std::slice::from_ref(&p), a).min(min_distance(
            std::slice::from_ref(&p),
            b,
        ));
        if d > best.0 {
            best = (d, p);
        }
    }
    best.1
}

/// Stereographic image in R^3 after rotating the pole to `e4`.
///
/// The rotation is special-orthogonal and the projection from the pole is
/// orientation-preserving for the boundary orientation of the sphere, so
/// linking numbers computed downstream carry the standard sign.
fn project_curves(
    a: &[Vector4<f64>],
    b: &[Vector4<f64>],
    pole: &Vector4<f64>,
) -> (Vec<Vector3<f64>>, Vec<Vector3<f64>>) {
    let rot = rotate_to_e4(pole);
    let stereo = |x: &Vector4<f64>| -> Vector3<f64> {
        let y = rot * x;
        Vector3::new(y[0], y[1], y[2]) / (1.0 - y[3])
    };
    (a.iter().map(&stereo).collect(), b.iter().map(&stereo).collect())
}

/// Periodic central-difference tangents scaled by the parameter step.
fn tangents(curve: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
    let n = curve.len();
    (0..n)
        .map(|i| (curve[(i + 1) % n] - curve[(i + n - 1) % n]) * 0.5)
        .collect()
}

/// Gauss double integral for two disjoint closed polyline-sampled curves.
fn gauss_integral(a: &[Vector3<f64>], b: &[Vector3<f64>]) -> f64 {
    let ta = tangents(a);
    let tb = tangents(b);
    let mut acc = 0.0;
    for (x, tx) in a.iter().zip(&ta) {
        for (y, ty) in b.iter().zip(&tb) {
            let d = x - y;
            let r3 = d.norm().powi(3);
            acc += tx.cross(ty).dot(&d) / r3;
        }
    }
    acc / (4.0 * PI)
}

/// Linking number of two disjoint closed curves sampled on (a radial graph
/// over) the unit sphere.
///
/// The Gauss integral must fall within `0.05` of an integer; one refinement
/// by subsampling densification is attempted before failing.
pub fn linking_of_curves(
    states_a: &[Vector4<f64>],
    states_b: &[Vector4<f64>],
) -> Result<(i64, f64)> {
    let a = normalize_curve(states_a);
    let b = normalize_curve(states_b);
    let dmin = min_distance(&a, &b);
    if dmin < 1e-4 {
        return Err(Error::Geometry(format!(
            "curves come within {dmin:.3e} of each other; linking undefined at tolerance"
        )));
    }
    let pole = choose_pole(&a, &b);
    let (pa, pb) = project_curves(&a, &b, &pole);
    let val = gauss_integral(&pa, &pb);
    let dev = (val - val.round()).abs();
    if dev < 0.05 {
        return Ok((val.round() as i64, dev));
    }
    // refine once by doubling the sampling via midpoint insertion on the sphere
    let densify = |c: &[Vector4<f64>]| -> Vec<Vector4<f64>> {
        let n = c.len();
        let mut out = Vec::with_capacity(2 * n);
        for i in 0..n {
            out.push(c[i]);
            out.push((c[i] + c[(i + 1) % n]).normalize());
        }
        out
    };
    let (a2, b2) = (densify(&a), densify(&b));
    let (pa, pb) = project_curves(&a2, &b2, &pole);
    let val = gauss_integral(&pa, &pb);
    let dev = (val - val.round()).abs();
    if dev < 0.05 {
        Ok((val.round() as i64, dev))
    } else {
        Err(Error::IllConditioned(format!(
            "Gauss integral {val:.4} is {dev:.3} from an integer after refinement"
        )))
    }
}

/// Linking number of two orbit traces.
pub fn linking_number(a: &OrbitRecord, b: &OrbitRecord) -> Result<(i64, f64)> {
    linking_of_curves(&a.trajectory.states, &b.trajectory.states)
}

/// Fourier resampling of a smooth closed curve (uniform samples, endpoint
/// duplicate removed) onto `m` uniform nodes.
fn resample_closed(curve: &[Vector4<f64>], m: usize) -> Vec<Vector4<f64>> {
    use crate::sympath::grid_interp;
    let n = curve.len();
    if m == n {
        return curve.to_vec();
    }
    let comps: Vec<Vec<f64>> = (0..4)
        .map(|d| curve.iter().map(|x| x[d]).collect())
        .collect();
    (0..m)
        .map(|i| {
            let t = i as f64 / m as f64;
            Vector4::new(
                grid_interp(&comps[0], t),
                grid_interp(&comps[1], t),
                grid_interp(&comps[2], t),
                grid_interp(&comps[3], t),
            )
        })
        .collect()
}

/// Self-linking number of an orbit via the push-off along the first frame
/// section.
///
/// The push-off scale starts at `1e-2` of the minimal curvature radius and
/// is halved until two consecutive scales agree; the quadrature density is
/// tied to the scale so the Gauss integral stays resolved. For a `p`-fold
/// covered orbit the rational value `lk / p^2` is reported.
pub fn self_linking(orbit: &OrbitRecord, frame: &TrivializationFrame) -> Result<SelfLinking> {
    let states = &orbit.trajectory.states;
    if frame.e1.len() != states.len() {
        return Err(Error::InvalidInput(
            "frame and trajectory sampled on different grids".into(),
        ));
    }
    let base = normalize_curve(states);
    let n = base.len();
    // tangentialized frame directions on the sphere
    let dirs: Vec<Vector4<f64>> = (0..n)
        .map(|i| {
            let x = &base[i];
            let e = &frame.e1[i];
            let t = e - x * x.dot(e);
            t / t.norm()
        })
        .collect();
    // minimal curvature radius and arclength of the spherical curve
    let mut kappa_max: f64 = 0.0;
    let mut arclength = 0.0;
    for i in 0..n {
        let prev = &base[(i + n - 1) % n];
        let next = &base[(i + 1) % n];
        let d2 = next - 2.0 * base[i] + prev;
        let dt = orbit.period / n as f64;
        let v = (next - prev) * (0.5 / dt);
        let acc = d2 / (dt * dt);
        let speed2 = v.norm_squared().max(1e-300);
        let a_perp = acc - v * (acc.dot(&v) / speed2);
        kappa_max = kappa_max.max(a_perp.norm() / speed2);
        arclength += v.norm() * dt;
    }
    let r_min = 1.0 / kappa_max.max(1e-6);
    let mut eps = 1e-2 * r_min;
    let mut prev: Option<(i64, f64)> = None;
    while eps > 1e-5 * r_min.min(1.0) {
        // quadrature spacing at most eps/6, capped for cost
        let m = ((6.0 * arclength / eps).ceil() as usize).clamp(n, 10000);
        let base_m = resample_closed(&base, m);
        let dirs_m = resample_closed(&dirs, m);
        let pushed: Vec<Vector4<f64>> = (0..m)
            .map(|i| {
                let x = &base_m[i];
                let d = dirs_m[i] - x * x.dot(&dirs_m[i]);
                (base_m[i] + d.normalize() * eps).normalize()
            })
            .collect();
        let mut closed_base = base_m;
        closed_base.push(closed_base[0]);
        let mut closed_push = pushed;
        closed_push.push(closed_push[0]);
        match linking_of_curves(&closed_base, &closed_push) {
            Ok((lk, dev)) => {
                if let Some((lk_prev, _)) = prev {
                    if lk_prev == lk {
                        let p = orbit.covering_number;
                        return Ok(SelfLinking {
                            value: lk as f64 / (p as f64 * p as f64),
                            lk,
                            covering: p,
                            deviation: dev,
                            scale: eps,
                        });
                    }
                }
                prev = Some((lk, dev));
            }
            Err(_) => {
                // push-off too close for the distance guard; shrink and retry
            }
        }
        eps *= 0.5;
    }
    Err(Error::IllConditioned(
        "push-off linking did not stabilize before the minimal scale".into(),
    ))
}

/// Which hypotheses of the main existence criteria an orbit satisfies.
#[derive(Debug, Clone, Serialize)]
pub struct PredicateReport {
    pub simply_covered: bool,
    pub self_linking_minus_one: Option<bool>,
    pub cz_at_least_3: Option<bool>,
    pub rs_at_least_3_2: Option<bool>,
    pub symmetric: bool,
    pub doubly_symmetric: bool,
    pub mu_cz: Option<i64>,
    pub mu_rs: Option<f64>,
    pub sl: Option<f64>,
    /// Fields that could not be computed, with the reason.
    pub not_computed: Vec<String>,
    pub caveat: String,
}

/// Aggregates the computed invariants of an orbit into a hypothesis report.
///
/// Unknottedness and the global linking condition are sampled properties of
/// the computed data, not certified; the caveat records this.
pub fn predicate_report(orbit: &OrbitRecord, sl: Option<&SelfLinking>) -> PredicateReport {
    let mut not_computed = Vec::new();
    let mu_cz = orbit
        .indices
        .iter()
        .find(|(k, _)| k.ends_with("cz_spectral") || k.ends_with("cz_rotation"))
        .and_then(|(_, v)| v.mu_cz);
    if mu_cz.is_none() {
        not_computed.push("mu_cz (no index report attached)".into());
    }
    let mu_rs = orbit
        .indices
        .iter()
        .find(|(k, _)| k.ends_with("rs_spectral") || k.ends_with("rs_crossing"))
        .and_then(|(_, v)| v.mu_rs)
        .map(|h| h.as_f64());
    if mu_rs.is_none() {
        not_computed.push("mu_rs (no boundary index attached)".into());
    }
    if sl.is_none() {
        not_computed.push("self-linking (not computed)".into());
    }
    let n_sym = orbit.symmetry.len();
    PredicateReport {
        simply_covered: orbit.covering_number == 1,
        self_linking_minus_one: sl.map(|s| (s.value + 1.0).abs() < 1e-9),
        cz_at_least_3: mu_cz.map(|m| m >= 3),
        rs_at_least_3_2: mu_rs.map(|m| m >= 1.5 - 1e-12),
        symmetric: n_sym >= 1,
        doubly_symmetric: matches!(
            orbit.sym_type,
            super::SymmetryType::DoublySymmetric
        ),
        mu_cz,
        mu_rs,
        sl: sl.map(|s| s.value),
        not_computed,
        caveat: "unknottedness and the linking-to-all-index-2-orbits hypothesis are \
                 only sampled over the computed data, not certified"
            .into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn circle_z1(n: usize) -> Vec<Vector4<f64>> {
        (0..=n)
            .map(|i| {
                let t = TAU * i as f64 / n as f64;
                Vector4::new(t.cos(), t.sin(), 0.0, 0.0)
            })
            .collect()
    }

    fn circle_z2(n: usize) -> Vec<Vector4<f64>> {
        (0..=n)
            .map(|i| {
                let t = TAU * i as f64 / n as f64;
                Vector4::new(0.0, 0.0, t.cos(), t.sin())
            })
            .collect()
    }

    #[test]
    fn fundamental_circles_link_once() {
        // flow-oriented coordinate circles form a positive Hopf link
        let (lk, dev) = linking_of_curves(&circle_z1(256), &circle_z2(256)).unwrap();
        assert_eq!(lk, 1);
        assert!(dev < 0.05);
    }

    #[test]
    fn hopf_fibers_link_once() {
        // two fibers of the round fibration through different base points
        let n = 256;
        let fiber = |z1: num_complex::Complex64, z2: num_complex::Complex64| {
            (0..=n)
                .map(|i| {
                    let t = TAU * i as f64 / n as f64;
                    let p = num_complex::Complex64::new(t.cos(), t.sin());
                    crate::linalg::from_complex(z1 * p, z2 * p)
                })
                .collect::<Vec<_>>()
        };
        let f1 = fiber(
            num_complex::Complex64::new(0.8, 0.0),
            num_complex::Complex64::new(0.0, 0.6),
        );
        let f2 = fiber(
            num_complex::Complex64::new(0.0, 0.5),
            num_complex::Complex64::new(0.866, 0.0),
        );
        let (lk, _) = linking_of_curves(&f1, &f2).unwrap();
        assert_eq!(lk, 1);
    }

    #[test]
    fn distant_unlinked_circles() {
        // two small far-apart loops in a common chart
        let n = 128;
        let a: Vec<Vector4<f64>> = (0..=n)
            .map(|i| {
                let t = TAU * i as f64 / n as f64;
                Vector4::new(0.1 * t.cos(), 0.1 * t.sin(), 0.0, 1.0).normalize()
            })
            .collect();
        let b: Vec<Vector4<f64>> = (0..=n)
            .map(|i| {
                let t = TAU * i as f64 / n as f64;
                Vector4::new(0.1 * t.cos() + 0.0, 0.0, 0.1 * t.sin(), -1.0).normalize()
            })
            .collect();
        let (lk, dev) = linking_of_curves(&a, &b).unwrap();
        assert_eq!(lk, 0);
        assert!(dev < 0.05);
    }

    #[test]
    fn push_off_of_fundamental_circle_links_minus_one() {
        // gamma(t) = (e^{it}, 0) pushed along (0, e^{-it}): the (1, -1)
        // cable, linking -1 with the core.
        let n = 512;
        let core = circle_z1(n);
        let pushed: Vec<Vector4<f64>> = (0..=n)
            .map(|i| {
                let t = TAU * i as f64 / n as f64;
                let eps = 0.05;
                Vector4::new(t.cos(), t.sin(), eps * t.cos(), -eps * t.sin()).normalize()
            })
            .collect();
        let (lk, dev) = linking_of_curves(&core, &pushed).unwrap();
        assert_eq!(lk, -1);
        assert!(dev < 0.05);
    }

    #[test]
    fn too_close_curves_rejected() {
        let a = circle_z1(64);
        let mut b = circle_z1(64);
        for x in &mut b {
            x[2] += 1e-6;
            *x = x.normalize();
        }
        assert!(linking_of_curves(&a, &b).is_err());
    }
}
