//! Critical points and critical values of the catalog Hamiltonians.

use super::{SystemModel, SystemName};
use crate::error::{Error, Result};
use nalgebra::Vector4;

/// A Newton-refined critical point of a Hamiltonian.
#[derive(Debug, Clone)]
pub struct CriticalPoint {
    pub point: Vector4<f64>,
    pub value: f64,
    pub gradient_norm: f64,
}

const GRAD_TOL: f64 = 1e-12;

/// Full Newton iteration on `grad H = 0` from a seed.
fn refine(model: &SystemModel, seed: Vector4<f64>) -> Option<CriticalPoint> {
    let mut z = seed;
    for _ in 0..60 {
        if model.check_regular(&z).is_err() {
            return None;
        }
        let g = model.gradient(&z);
        if !g.norm().is_finite() {
            return None;
        }
        if g.norm() < GRAD_TOL {
            return Some(CriticalPoint {
                point: z,
                value: model.hamiltonian(&z),
                gradient_norm: g.norm(),
            });
        }
        let h = model.hessian(&z);
        let step = h.lu().solve(&g)?;
        // damped step; critical-point landscapes here are mild
        let mut lambda = 1.0;
        let g0 = g.norm();
        for _ in 0..20 {
            let trial = z - step * lambda;
            if model.check_regular(&trial).is_ok() && model.gradient(&trial).norm() < g0 {
                z = trial;
                break;
            }
            lambda *= 0.5;
        }
        if lambda < 1e-6 {
            return None;
        }
    }
    None
}

/// Seed points for the Newton search, per system.
fn seeds(model: &SystemModel) -> Vec<Vector4<f64>> {
    match model.name {
        SystemName::Pcr3bp => {
            let mu = model.param("mu");
            let mut out = Vec::new();
            // collinear equilibria: q2 = 0, p1 = q2 = 0, p2 = mu - q1
            let mut push_axis = |q1: f64| {
                out.push(Vector4::new(q1, 0.0, 0.0, mu - q1));
            };
            for i in 1..=9 {
                push_axis(i as f64 / 10.0); // between the primaries
            }
            for i in 1..=12 {
                push_axis(-0.05 - 1.45 * i as f64 / 12.0); // beyond the earth
            }
            for i in 1..=12 {
                push_axis(1.05 + 1.45 * i as f64 / 12.0); // beyond the sun
            }
            // triangular equilibria: |q| = |q - S| = 1
            let s3 = 3.0f64.sqrt() / 2.0;
            for sign in [1.0, -1.0] {
                // (q1, p1, q2, p2) with p1 = q2, p2 = mu - q1
                out.push(Vector4::new(0.5, sign * s3, sign * s3, mu - 0.5));
            }
            out
        }
        SystemName::Hill => {
            let r = 3.0f64.powf(-1.0 / 3.0);
            vec![
                Vector4::new(r, 0.0, 0.0, -r),
                Vector4::new(-r, 0.0, 0.0, r),
            ]
        }
        SystemName::HenonHeiles => {
            let s3 = 3.0f64.sqrt() / 2.0;
            vec![
                Vector4::new(0.01, 0.0, 0.01, 0.0),
                Vector4::new(0.0, 0.0, 1.0, 0.0),
                Vector4::new(s3, 0.0, -0.5, 0.0),
                Vector4::new(-s3, 0.0, -0.5, 0.0),
            ]
        }
        _ => Vec::new(),
    }
}

/// Newton-refined critical points and their energies.
///
/// Supported for the mechanical systems; the quadratic models have only the
/// origin. Distinct critical values are clustered at `1e-9`.
pub fn critical_values(model: &SystemModel) -> Result<(Vec<CriticalPoint>, Vec<f64>)> {
    let seed_list = seeds(model);
    if seed_list.is_empty() {
        return Err(Error::InvalidInput(format!(
            "critical-point search is not defined for system '{}'",
            model.name.as_str()
        )));
    }
    let mut points: Vec<CriticalPoint> = Vec::new();
    for seed in &seed_list {
        if let Some(cp) = refine(model, *seed) {
            if points
                .iter()
                .all(|p| (p.point - cp.point).norm() > 1e-7)
            {
                points.push(cp);
            }
        }
    }
    if points.is_empty() {
        return Err(Error::SearchFailed(format!(
            "no critical point converged from {} seeds",
            seed_list.len()
        )));
    }
    for p in &points {
        if p.gradient_norm > 1e-10 {
            return Err(Error::SearchFailed(format!(
                "critical point at {:?} has gradient norm {:.3e}",
                p.point, p.gradient_norm
            )));
        }
    }
    let mut values: Vec<f64> = Vec::new();
    let mut sorted: Vec<f64> = points.iter().map(|p| p.value).collect();
    sorted.sort_by(f64::total_cmp);
    for v in sorted {
        if values.last().is_none_or(|&last| (v - last).abs() > 1e-9) {
            values.push(v);
        }
    }
    Ok((points, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn henon_heiles_critical_levels() {
        let model = SystemModel::henon_heiles(0.1);
        let (_, values) = critical_values(&model).unwrap();
        assert_eq!(values.len(), 2);
        assert_relative_eq!(values[0], 0.0, epsilon = 1e-10);
        assert_relative_eq!(values[1], 1.0 / 6.0, epsilon = 1e-10);
    }

    #[test]
    fn hill_unique_critical_value() {
        let model = SystemModel::hill(-3.0);
        let (points, values) = critical_values(&model).unwrap();
        assert_eq!(points.len(), 2); // two critical points, one value
        assert_eq!(values.len(), 1);
        let expect = -0.5 * 3.0f64.powf(4.0 / 3.0);
        assert_relative_eq!(values[0], expect, epsilon = 1e-10);
    }

    #[test]
    fn pcr3bp_equal_masses_has_three_values() {
        let model = SystemModel::pcr3bp(0.5, -2.1).unwrap();
        let (_, values) = critical_values(&model).unwrap();
        assert_eq!(values.len(), 3, "values: {values:?}");
        // the inner collinear point sits midway with energy -2
        assert_relative_eq!(values[0], -2.0, epsilon = 1e-9);
        // the triangular points: H = 3/8 - 1/2 - 1/2 - 3/4 = -11/8
        assert_relative_eq!(values[2], -11.0 / 8.0, epsilon = 1e-9);
    }

    #[test]
    fn pcr3bp_asymmetric_has_four_values() {
        let model = SystemModel::pcr3bp(0.3, -2.0).unwrap();
        let (_, values) = critical_values(&model).unwrap();
        assert_eq!(values.len(), 4, "values: {values:?}");
    }

    #[test]
    fn quadratic_models_unsupported() {
        assert!(critical_values(&SystemModel::hopf()).is_err());
    }
}
