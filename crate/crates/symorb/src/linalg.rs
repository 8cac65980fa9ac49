//! Small linear-algebra helpers shared across the crate.
//!
//! Phase-space convention: coordinates `(x1, y1, x2, y2)` with complex
//! identification `z1 = x1 + i y1`, `z2 = x2 + i y2`. The standard complex
//! structure is block-diagonal, `J4 = diag(J0, J0)`.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use num_complex::Complex64;

/// The 2x2 standard complex structure `[[0, -1], [1, 0]]`.
pub fn j0() -> Matrix2<f64> {
    Matrix2::new(0.0, -1.0, 1.0, 0.0)
}

/// The 4x4 standard complex structure `diag(J0, J0)` in interleaved
/// coordinates `(x1, y1, x2, y2)`.
pub fn j4() -> Matrix4<f64> {
    Matrix4::new(
        0.0, -1.0, 0.0, 0.0, //
        1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, -1.0, //
        0.0, 0.0, 1.0, 0.0,
    )
}

/// Counterclockwise rotation by `theta`.
pub fn rot2(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Splits a phase point into its two complex components.
pub fn to_complex(z: &Vector4<f64>) -> (Complex64, Complex64) {
    (Complex64::new(z[0], z[1]), Complex64::new(z[2], z[3]))
}

/// Assembles a phase point from complex components.
pub fn from_complex(z1: Complex64, z2: Complex64) -> Vector4<f64> {
    Vector4::new(z1.re, z1.im, z2.re, z2.im)
}

/// Left quaternion multiplication by `i` equals `J4`.
pub fn quat_i(z: &Vector4<f64>) -> Vector4<f64> {
    Vector4::new(-z[1], z[0], -z[3], z[2])
}

/// Left quaternion multiplication by `j`: `(z1, z2) -> (-conj z2, conj z1)`.
pub fn quat_j(z: &Vector4<f64>) -> Vector4<f64> {
    Vector4::new(-z[2], z[3], z[0], -z[1])
}

/// Left quaternion multiplication by `k`: `(z1, z2) -> (-i conj z2, i conj z1)`.
pub fn quat_k(z: &Vector4<f64>) -> Vector4<f64> {
    Vector4::new(-z[3], -z[2], z[1], z[0])
}

/// Symplectic product `omega0(u, v) = <J4 u, v>`.
pub fn omega4(u: &Vector4<f64>, v: &Vector4<f64>) -> f64 {
    quat_i(u).dot(v)
}

/// Liouville one-form `lambda0 = 1/2 (x dy - y dx)` paired with `v` at `z`.
pub fn liouville(z: &Vector4<f64>, v: &Vector4<f64>) -> f64 {
    0.5 * omega4(z, v)
}

/// Unwraps `next` onto the branch nearest `prev` (continuous angle tracking).
pub fn unwrap_angle(prev: f64, next: f64) -> f64 {
    let mut a = next;
    let two_pi = std::f64::consts::TAU;
    while a - prev > std::f64::consts::PI {
        a -= two_pi;
    }
    while a - prev < -std::f64::consts::PI {
        a += two_pi;
    }
    a
}

/// Continuous argument increment along a sampled nonvanishing plane curve.
///
/// Returns the total change of `arg` from the first to the last sample; fails
/// if any single step turns by `pi/2` or more, which signals undersampling.
pub fn total_turning(samples: &[Vector2<f64>]) -> Result<f64, f64> {
    let mut total = 0.0;
    for w in samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let cross = a[0] * b[1] - a[1] * b[0];
        let dot = a[0] * b[0] + a[1] * b[1];
        let step = cross.atan2(dot);
        if step.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(step);
        }
        total += step;
    }
    Ok(total)
}

/// Rotation in SO(4) taking the unit vector `p` to `e4`.
///
/// Acts as the identity on the orthogonal complement of span(p, e4), so the
/// map is orientation-preserving. Requires `p != -e4`.
pub fn rotate_to_e4(p: &Vector4<f64>) -> Matrix4<f64> {
    let e4 = Vector4::new(0.0, 0.0, 0.0, 1.0);
    let c = p.dot(&e4);
    assert!(
        c > -1.0 + 1e-12,
        "pole opposite to e4; caller must perturb the pole"
    );
    let s = p + e4;
    Matrix4::identity() - s * s.transpose() / (1.0 + c) + 2.0 * e4 * p.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quaternion_frame_is_orthonormal() {
        let z = Vector4::new(0.3, -0.5, 0.7, 0.4).normalize();
        let (iz, jz, kz) = (quat_i(&z), quat_j(&z), quat_k(&z));
        for v in [&iz, &jz, &kz] {
            assert_relative_eq!(v.norm(), 1.0, epsilon = 1e-14);
            assert_relative_eq!(v.dot(&z), 0.0, epsilon = 1e-14);
        }
        assert_relative_eq!(iz.dot(&jz), 0.0, epsilon = 1e-14);
        assert_relative_eq!(iz.dot(&kz), 0.0, epsilon = 1e-14);
        assert_relative_eq!(jz.dot(&kz), 0.0, epsilon = 1e-14);
        // k = i*j as left multiplications
        assert_relative_eq!((quat_i(&jz) - kz).norm(), 0.0, epsilon = 1e-15);
        // dlambda0(jz, kz) = |z|^4 = 1 on the unit sphere
        assert_relative_eq!(omega4(&jz, &kz), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn liouville_annihilates_quaternion_frame() {
        let z = Vector4::new(0.9, 0.1, -0.2, 0.4).normalize();
        assert_relative_eq!(liouville(&z, &quat_j(&z)), 0.0, epsilon = 1e-15);
        assert_relative_eq!(liouville(&z, &quat_k(&z)), 0.0, epsilon = 1e-15);
        assert_relative_eq!(liouville(&z, &z), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn rotate_to_e4_is_special_orthogonal() {
        let p = Vector4::new(0.5, 0.5, 0.5, 0.5);
        let r = rotate_to_e4(&p);
        assert_relative_eq!((r * p)[3], 1.0, epsilon = 1e-14);
        assert_relative_eq!(
            (r.transpose() * r - Matrix4::identity()).norm(),
            0.0,
            epsilon = 1e-13
        );
        assert_relative_eq!(r.determinant(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn turning_rejects_coarse_steps() {
        let coarse = vec![Vector2::new(1.0, 0.0), Vector2::new(-1.0, 0.1)];
        assert!(total_turning(&coarse).is_err());
        let n = 64;
        let fine: Vec<_> = (0..=n)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / n as f64;
                Vector2::new(t.cos(), t.sin())
            })
            .collect();
        let total = total_turning(&fine).unwrap();
        assert_relative_eq!(total, std::f64::consts::TAU, epsilon = 1e-12);
    }
}
