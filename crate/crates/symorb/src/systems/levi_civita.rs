//! The Levi-Civita double cover of the planar Kepler-type charts.
//!
//! Convention: `q = 2 v^2`, `p = u / conj(v)` in complex notation, where
//! `(v, u)` are the cover coordinates and `(q, p)` the base coordinates.
//! The cover is 2-to-1 (`(v, u)` and `(-v, -u)` project to the same point)
//! and intertwines the base reflection `(q, p) -> (conj q, -conj p)` with
//! the two commuting lifts
//!
//! `rho1(v, u) = (conj v, -conj u)` and `rho2(v, u) = (-conj v, conj u)`,
//!
//! whose composition is the antipodal map. The constant factor in the
//! convention only rescales the contact form and the time parameter.

use crate::error::{Error, Result};
use crate::linalg::{from_complex, to_complex};
use nalgebra::Vector4;

/// Branch choice for the two-valued inverse `v = sqrt(q / 2)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Cover-to-base map `(v, u) -> (q, p)`. Fails on the collision fiber `v = 0`.
pub fn lc_to_base(vu: &Vector4<f64>) -> Result<Vector4<f64>> {
    let (v, u) = to_complex(vu);
    if v.norm() < 1e-12 {
        return Err(Error::Domain(
            "Levi-Civita chart is singular at v = 0".into(),
        ));
    }
    let q = 2.0 * v * v;
    let p = u / v.conj();
    Ok(from_complex(q, p))
}

/// Base-to-cover map `(q, p) -> (v, u)` on the chosen square-root branch.
pub fn lc_from_base(qp: &Vector4<f64>, branch: Sign) -> Result<Vector4<f64>> {
    let (q, p) = to_complex(qp);
    if q.norm() < 1e-300 {
        return Err(Error::Domain("collision point has no cover chart".into()));
    }
    let mut v = (q / 2.0).sqrt();
    if branch == Sign::Minus {
        v = -v;
    }
    let u = p * v.conj();
    Ok(from_complex(v, u))
}

/// The two lifts of the base reflection to the cover chart.
pub fn lifted_reflections() -> (
    impl Fn(&Vector4<f64>) -> Vector4<f64>,
    impl Fn(&Vector4<f64>) -> Vector4<f64>,
) {
    let rho1 = |z: &Vector4<f64>| {
        let (v, u) = to_complex(z);
        from_complex(v.conj(), -u.conj())
    };
    let rho2 = |z: &Vector4<f64>| {
        let (v, u) = to_complex(z);
        from_complex(-v.conj(), u.conj())
    };
    (rho1, rho2)
}

/// The base reflection `(q, p) -> (conj q, -conj p)`, i.e.
/// `(q1, -q2, -p1, p2)` in mechanical coordinates.
pub fn base_reflection(qp: &Vector4<f64>) -> Vector4<f64> {
    let (q, p) = to_complex(qp);
    from_complex(q.conj(), -p.conj())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector4;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rand_point(rng: &mut StdRng) -> Vector4<f64> {
        Vector4::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        )
    }

    #[test]
    fn round_trip_is_identity() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let vu = rand_point(&mut rng);
            if vu.fixed_rows::<2>(0).norm() < 1e-3 {
                continue;
            }
            let qp = lc_to_base(&vu).unwrap();
            // recover on the branch matching the original point
            let back_p = lc_from_base(&qp, Sign::Plus).unwrap();
            let back_m = lc_from_base(&qp, Sign::Minus).unwrap();
            let d = (back_p - vu).norm().min((back_m - vu).norm());
            assert!(d < 1e-12, "round trip deviation {d:.3e}");
        }
    }

    #[test]
    fn both_lifts_intertwine_the_base_reflection() {
        let (rho1, rho2) = lifted_reflections();
        let mut rng = StdRng::seed_from_u64(8);
        for _ in 0..100 {
            let vu = rand_point(&mut rng);
            if vu.fixed_rows::<2>(0).norm() < 1e-3 {
                continue;
            }
            let lhs1 = lc_to_base(&rho1(&vu)).unwrap();
            let lhs2 = lc_to_base(&rho2(&vu)).unwrap();
            let rhs = base_reflection(&lc_to_base(&vu).unwrap());
            assert!((lhs1 - rhs).norm() < 1e-12);
            assert!((lhs2 - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn lift_composition_is_antipodal() {
        let (rho1, rho2) = lifted_reflections();
        let z = Vector4::new(0.3, -0.7, 1.1, 0.2);
        assert!((rho1(&rho2(&z)) + z).norm() < 1e-15);
    }

    #[test]
    fn reflection_fixed_chord_start_lands_in_first_lift_fixed_set() {
        // base point with q2 = p1 = 0, q1 > 0 lifts to a real v direction
        let qp = Vector4::new(1.3, 0.0, 0.0, 0.8); // (q1, p1, q2, p2)
        let vu = lc_from_base(&qp, Sign::Plus).unwrap();
        let (rho1, _) = lifted_reflections();
        assert!((rho1(&vu) - vu).norm() < 1e-14, "not fixed by the first lift");
        // v is a real multiple of (1, 0)
        assert!(vu[1].abs() < 1e-14);
    }

    #[test]
    fn collision_fiber_rejected() {
        assert!(lc_to_base(&Vector4::new(0.0, 0.0, 1.0, 0.0)).is_err());
    }
}
