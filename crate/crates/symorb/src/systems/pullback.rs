//! Radial transport of a star-shaped energy level to the unit sphere.
//!
//! For a level `{H = c}` that is star-shaped about the origin, the radial
//! graph map `w -> h(w) w` (with `H(h(w) w) = c`) identifies the unit sphere
//! with the level. The Liouville form pulls back to `f lambda0` with
//! `f = h^2`, so the level's Reeb dynamics becomes a time-reparameterized
//! Reeb flow of a tight contact form on the sphere. Linear symmetries that
//! preserve `H` and the Euclidean norm commute with the transport and are
//! carried over unchanged.
//!
//! For the Henon-Heiles system the additional linear contactomorphism
//! normalizes the transported symmetries to standard form: the reflection
//! becomes `(q1, q2, p1, p2) -> (-q1, -q2, p1, p2)` and the triangular
//! symmetry becomes the deck map `g_{3,1}`.

use super::{deck_map, CyclicSymmetry, Involution, SystemModel, SystemName};
use crate::error::{Error, Result};
use nalgebra::{Matrix4, Vector4};

/// A catalog model transported to the unit sphere.
#[derive(Debug, Clone)]
pub struct SphereModel {
    pub base: SystemModel,
    level: f64,
}

impl SphereModel {
    /// The conformal factor `f(w) = h(w)^2` at a unit vector `w`.
    pub fn conformal_factor(&self, w: &Vector4<f64>) -> Result<f64> {
        match self.base.name {
            // closed form on quadratic levels: f = 1 / H
            SystemName::Hopf | SystemName::Ellipsoid => Ok(1.0 / self.base.hamiltonian(w)),
            _ => {
                let h = self.base.radial_scale_to_level(w)?;
                Ok(h * h)
            }
        }
    }

    /// Radial graph map from the unit sphere onto the energy level.
    pub fn to_level(&self, w: &Vector4<f64>) -> Result<Vector4<f64>> {
        let f = self.conformal_factor(w)?;
        Ok(w * f.sqrt())
    }

    /// Inverse of [`Self::to_level`]: radial retraction to the sphere.
    pub fn to_sphere(&self, x: &Vector4<f64>) -> Vector4<f64> {
        x / x.norm()
    }

    /// Involutions transported to the sphere. Linear symmetries preserving
    /// both `H` and the norm transport to the same matrices.
    pub fn involutions(&self) -> &[Involution] {
        self.base.involutions()
    }

    /// `lambda0(X_H)` at the level point over `w`; positive by
    /// star-shapedness, and the time-rescaling factor between the
    /// transported flow and the Reeb flow of `f lambda0`.
    pub fn reeb_rescaling(&self, w: &Vector4<f64>) -> Result<f64> {
        let x = self.to_level(w)?;
        self.base.reeb_rescaling(&x)
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    /// The linear contactomorphism normalizing the transported symmetries,
    /// when the catalog provides one (Henon-Heiles).
    pub fn normalizing_chart(&self) -> Option<Matrix4<f64>> {
        match self.base.name {
            SystemName::HenonHeiles => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                // (q1, q2, p1, p2) -> (q1 - p2, -q1 - p2, q2 + p1, q2 - p1)/sqrt(2),
                // written on interleaved coordinates (q1, p1, q2, p2).
                let mut m = Matrix4::zeros();
                // q1' = (q1 - p2)/sqrt2
                m[(0, 0)] = s;
                m[(0, 3)] = -s;
                // p1' = (q2 + p1)/sqrt2
                m[(1, 2)] = s;
                m[(1, 1)] = s;
                // q2' = (-q1 - p2)/sqrt2
                m[(2, 0)] = -s;
                m[(2, 3)] = -s;
                // p2' = (q2 - p1)/sqrt2
                m[(3, 2)] = s;
                m[(3, 1)] = -s;
                Some(m)
            }
            _ => None,
        }
    }

    /// Transported involution after the normalizing chart, by conjugation.
    pub fn normalized_involution(&self, label: &str) -> Result<Matrix4<f64>> {
        let phi = self
            .normalizing_chart()
            .ok_or_else(|| Error::InvalidInput("model has no normalizing chart".into()))?;
        let inv = self.base.involution(label)?;
        Ok(phi * inv.matrix * phi.try_inverse().unwrap())
    }

    /// Transported cyclic symmetry after the normalizing chart.
    pub fn normalized_cyclic(&self) -> Result<Matrix4<f64>> {
        let phi = self
            .normalizing_chart()
            .ok_or_else(|| Error::InvalidInput("model has no normalizing chart".into()))?;
        let cyc = self
            .base
            .cyclic_symmetry()
            .ok_or_else(|| Error::InvalidInput("model has no cyclic symmetry".into()))?;
        Ok(phi * cyc.matrix * phi.try_inverse().unwrap())
    }

    /// The standard deck map the transported cyclic symmetry equals.
    ///
    /// The normalized triangular symmetry acts as `(z1, z2) ->
    /// (e^{2 pi i/3} z1, e^{-2 pi i/3} z2)`, the order-3 deck map whose
    /// quotient is the lens space L(3, 2).
    pub fn reference_deck(&self) -> Result<CyclicSymmetry> {
        deck_map(3, 2)
    }
}

/// Low-discrepancy sample of the unit sphere used for star-shapedness checks.
fn sphere_samples(n: usize) -> Vec<Vector4<f64>> {
    // additive quasi-random lattice, deterministic
    let alphas = [0.5545497, 0.308517, 0.143475, 0.733734];
    (0..n)
        .map(|i| {
            let mut v = Vector4::zeros();
            for d in 0..4 {
                let x = ((i + 1) as f64 * alphas[d]).fract() * 2.0 - 1.0;
                v[d] = x;
            }
            if v.norm() < 1e-3 {
                v[0] = 1.0;
            }
            v.normalize()
        })
        .collect()
}

/// Transports a model with a star-shaped compact level to the unit sphere.
///
/// Star-shapedness is verified on a deterministic sphere sample; the first
/// violating direction is reported. Models whose relevant level component
/// is non-compact or not star-shaped about the origin (the rotating Kepler
/// charts) are rejected.
pub fn pullback_to_sphere(model: &SystemModel) -> Result<SphereModel> {
    match model.name {
        SystemName::Pcr3bp | SystemName::Hill => {
            return Err(Error::Geometry(format!(
                "the '{}' level is not star-shaped about the origin; \
                 use the regularizing cover chart instead",
                model.name.as_str()
            )));
        }
        SystemName::HenonHeiles => {
            let c = model.param("c");
            if !(0.0 < c && c < 1.0 / 6.0) {
                return Err(Error::Geometry(format!(
                    "bounded sphere-like component requires energy in (0, 1/6), got {c}"
                )));
            }
        }
        _ => {}
    }
    let sphere = SphereModel {
        base: model.clone(),
        level: model.energy_level(),
    };
    for w in sphere_samples(200) {
        let x = sphere.to_level(&w).map_err(|_| {
            Error::Geometry(format!(
                "radial ray through {w:?} does not meet the level"
            ))
        })?;
        let pairing = 0.5 * x.dot(&model.gradient(&x));
        if pairing <= 0.0 {
            return Err(Error::Geometry(format!(
                "level is not star-shaped: <z, grad H> = {:.3e} at sample {x:?}",
                2.0 * pairing
            )));
        }
    }
    Ok(sphere)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ellipsoid_conformal_factor_closed_form() {
        let model = SystemModel::ellipsoid(1.0, 0.5 * (1.0 + 5.0f64.sqrt())).unwrap();
        let sphere = pullback_to_sphere(&model).unwrap();
        let w = Vector4::new(1.0, 0.0, 0.0, 0.0);
        // f = 1/H; at (1,0,0,0) this is r1^2
        assert_relative_eq!(sphere.conformal_factor(&w).unwrap(), 1.0, epsilon = 1e-12);
        let model2 = SystemModel::ellipsoid(1.3, 2.9).unwrap();
        let sphere2 = pullback_to_sphere(&model2).unwrap();
        assert_relative_eq!(
            sphere2.conformal_factor(&w).unwrap(),
            1.3,
            epsilon = 1e-12
        );
        // the graph map lands on the level
        let x = sphere2.to_level(&w).unwrap();
        assert_relative_eq!(model2.hamiltonian(&x), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn hopf_pullback_is_identity() {
        let sphere = pullback_to_sphere(&SystemModel::hopf()).unwrap();
        let w = Vector4::new(0.5, 0.5, 0.5, 0.5);
        assert_relative_eq!(sphere.conformal_factor(&w).unwrap(), 1.0, epsilon = 1e-14);
        assert!((sphere.to_level(&w).unwrap() - w).norm() < 1e-14);
    }

    #[test]
    fn henon_heiles_level_maps_to_sphere() {
        let model = SystemModel::henon_heiles(0.1);
        let sphere = pullback_to_sphere(&model).unwrap();
        let w = Vector4::new(0.2, -0.4, 0.8, 0.4).normalize();
        let x = sphere.to_level(&w).unwrap();
        assert_relative_eq!(model.hamiltonian(&x), 0.1, epsilon = 1e-12);
        // star-shaped: positive rescaling
        assert!(sphere.reeb_rescaling(&w).unwrap() > 0.0);
    }

    #[test]
    fn henon_heiles_normalized_symmetries_are_standard() {
        let model = SystemModel::henon_heiles(0.1);
        let sphere = pullback_to_sphere(&model).unwrap();
        // transported reflection is (q1,q2,p1,p2) -> (-q1,-q2,p1,p2):
        // interleaved diag(-1, 1, -1, 1)
        let rho0 = sphere.normalized_involution("rho").unwrap();
        let expect = Matrix4::from_diagonal(&Vector4::new(-1.0, 1.0, -1.0, 1.0));
        assert!(
            (rho0 - expect).norm() < 1e-12,
            "transported reflection:\n{rho0:.4}"
        );
        // the chart itself is symplectic
        let phi = sphere.normalizing_chart().unwrap();
        assert!(
            (phi.transpose() * crate::linalg::j4() * phi - crate::linalg::j4()).norm() < 1e-14
        );
        // transported triangular symmetry is the L(3,2) deck map
        let sig = sphere.normalized_cyclic().unwrap();
        let g32 = sphere.reference_deck().unwrap().matrix;
        assert!(
            (sig - g32).norm() < 1e-12,
            "transported sigma:\n{sig:.4}\nexpected g_32:\n{g32:.4}"
        );
    }

    #[test]
    fn kepler_charts_rejected() {
        assert!(pullback_to_sphere(&SystemModel::hill(-3.0)).is_err());
        assert!(pullback_to_sphere(&SystemModel::pcr3bp(0.5, -2.1).unwrap()).is_err());
    }
}
