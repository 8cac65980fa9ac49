//! Catalog of model Hamiltonian systems on R^4 with their symmetries.
//!
//! All systems share the interleaved phase-space convention
//! `z = (x1, y1, x2, y2)`, `z1 = x1 + i y1`, `z2 = x2 + i y2`; for the
//! mechanical systems the symplectic pairs are `(q1, p1)` and `(q2, p2)`,
//! i.e. `z = (q1, p1, q2, p2)`. Hamiltonian vector fields follow the
//! convention `i_{X_H} omega = -dH`, realized as `X_H = J4 grad H`.
//!
//! The catalog:
//!
//! - `hopf`: round-sphere Hamiltonian `|z1|^2 + |z2|^2`, whose flow on the
//!   unit level is the Hopf fibration;
//! - `ellipsoid`: `|z1|^2/r1^2 + |z2|^2/r2^2` with `r2^2/r1^2` irrational;
//! - `pcr3bp`: the planar circular restricted three-body problem in the
//!   rotating frame, primary (earth) at the origin, secondary (sun) at
//!   `(1, 0)`;
//! - `hill`: Hill's lunar problem;
//! - `henon_heiles`: the cubic two-degree-of-freedom oscillator with
//!   triangular symmetry.

mod critical;
mod levi_civita;
mod models;
mod pullback;

pub use critical::{critical_values, CriticalPoint};
pub use levi_civita::{lc_from_base, lc_to_base, Sign};
pub use pullback::{pullback_to_sphere, SphereModel};

use crate::error::{Error, Result};
use crate::linalg::{j4, quat_i};
use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Which catalog system a model instantiates.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemName {
    Hopf,
    Ellipsoid,
    Pcr3bp,
    Hill,
    HenonHeiles,
}

impl SystemName {
    pub fn as_str(&self) -> &'static str {
        match self {
            SystemName::Hopf => "hopf",
            SystemName::Ellipsoid => "ellipsoid",
            SystemName::Pcr3bp => "pcr3bp",
            SystemName::Hill => "hill",
            SystemName::HenonHeiles => "henon_heiles",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "hopf" => Ok(SystemName::Hopf),
            "ellipsoid" => Ok(SystemName::Ellipsoid),
            "pcr3bp" => Ok(SystemName::Pcr3bp),
            "hill" => Ok(SystemName::Hill),
            "henon_heiles" => Ok(SystemName::HenonHeiles),
            other => Err(Error::InvalidInput(format!("unknown system '{other}'"))),
        }
    }
}

/// Whether a linear symmetry preserves or reverses the symplectic form.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvolutionKind {
    AntiSymplectic,
    Symplectic,
}

/// Which coordinate chart an involution acts on.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    Base,
    LeviCivita,
}

/// A linear involution of phase space with its fixed-plane data.
#[derive(Debug, Clone)]
pub struct Involution {
    pub matrix: Matrix4<f64>,
    pub kind: InvolutionKind,
    pub label: String,
    pub chart: Chart,
    /// Orthonormal basis of the +1 eigenspace (a plane for all catalog
    /// involutions).
    pub fixed_basis: [Vector4<f64>; 2],
}

impl Involution {
    /// Builds an involution from its matrix, verifying `R^2 = Id` exactly
    /// and classifying it by the conjugation test on `J4`.
    pub fn new(matrix: Matrix4<f64>, label: &str, chart: Chart) -> Result<Self> {
        let sq = matrix * matrix;
        if (sq - Matrix4::identity()).norm() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "'{label}' is not an involution: |R^2 - Id| = {:.3e}",
                (sq - Matrix4::identity()).norm()
            )));
        }
        let conj = matrix.transpose() * j4() * matrix;
        let kind = if (conj + j4()).norm() < 1e-12 {
            InvolutionKind::AntiSymplectic
        } else if (conj - j4()).norm() < 1e-12 {
            InvolutionKind::Symplectic
        } else {
            return Err(Error::InvalidInput(format!(
                "'{label}' is neither symplectic nor anti-symplectic"
            )));
        };
        let fixed_basis = fixed_plane_basis(&matrix).ok_or_else(|| {
            Error::InvalidInput(format!("'{label}' has no two-dimensional fixed plane"))
        })?;
        Ok(Self {
            matrix,
            kind,
            label: label.to_string(),
            chart,
            fixed_basis,
        })
    }

    /// Anti-symplectic involution `(z1, z2) -> (e^{i t1} conj z1, e^{i t2} conj z2)`.
    pub fn from_phases(t1: f64, t2: f64, label: &str) -> Result<Self> {
        let (s1, c1) = t1.sin_cos();
        let (s2, c2) = t2.sin_cos();
        // conjugation followed by rotation, block per complex coordinate
        let m = Matrix4::new(
            c1, s1, 0.0, 0.0, //
            s1, -c1, 0.0, 0.0, //
            0.0, 0.0, c2, s2, //
            0.0, 0.0, s2, -c2,
        );
        Self::new(m, label, Chart::Base)
    }

    pub fn apply(&self, z: &Vector4<f64>) -> Vector4<f64> {
        self.matrix * z
    }

    /// A point of the fixed plane with the given coordinates.
    pub fn fixed_point(&self, a: f64, b: f64) -> Vector4<f64> {
        self.fixed_basis[0] * a + self.fixed_basis[1] * b
    }

    /// Distance of the fixed-plane parameterization from `ker(R - Id)`.
    pub fn fixed_set_defect(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for v in &self.fixed_basis {
            dev = dev.max((self.matrix * v - v).norm());
        }
        dev
    }
}

/// Orthonormal basis of the +1 eigenspace of an involution matrix, obtained
/// from the projector `(R + Id)/2`.
fn fixed_plane_basis(m: &Matrix4<f64>) -> Option<[Vector4<f64>; 2]> {
    let proj = (m + Matrix4::identity()) * 0.5;
    // Gram-Schmidt over the projector columns.
    let mut basis: Vec<Vector4<f64>> = Vec::new();
    for c in 0..4 {
        let mut v = proj.column(c).into_owned();
        for b in &basis {
            v -= b * b.dot(&v);
        }
        if v.norm() > 1e-9 {
            basis.push(v.normalize());
        }
    }
    if basis.len() == 2 {
        Some([basis[0], basis[1]])
    } else {
        None
    }
}

/// A finite-order symplectic symmetry, e.g. the triangular symmetry of the
/// Henon-Heiles system or the deck maps `g_{p,q}` of lens-space quotients.
#[derive(Debug, Clone)]
pub struct CyclicSymmetry {
    pub matrix: Matrix4<f64>,
    pub order: u32,
    pub label: String,
}

impl CyclicSymmetry {
    pub fn new(matrix: Matrix4<f64>, order: u32, label: &str) -> Result<Self> {
        let conj = matrix.transpose() * j4() * matrix;
        if (conj - j4()).norm() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "cyclic symmetry '{label}' is not symplectic"
            )));
        }
        let mut pow = Matrix4::identity();
        for _ in 0..order {
            pow = matrix * pow;
        }
        if (pow - Matrix4::identity()).norm() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "cyclic symmetry '{label}' does not have order {order}"
            )));
        }
        // order must be exact
        for k in 1..order {
            let mut pk = Matrix4::identity();
            for _ in 0..k {
                pk = matrix * pk;
            }
            if (pk - Matrix4::identity()).norm() < 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "cyclic symmetry '{label}' has order {k}, not {order}"
                )));
            }
        }
        Ok(Self {
            matrix,
            order,
            label: label.to_string(),
        })
    }
}

/// The deck transformation `(z1, z2) -> (e^{2 pi i / p} z1, e^{2 pi i q / p} z2)`.
pub fn deck_map(p: u32, q: u32) -> Result<CyclicSymmetry> {
    if p == 0 {
        return Err(Error::InvalidInput("deck map order must be positive".into()));
    }
    let a = std::f64::consts::TAU / p as f64;
    let b = std::f64::consts::TAU * q as f64 / p as f64;
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    let m = Matrix4::new(
        ca, -sa, 0.0, 0.0, //
        sa, ca, 0.0, 0.0, //
        0.0, 0.0, cb, -sb, //
        0.0, 0.0, sb, cb,
    );
    CyclicSymmetry::new(m, p, &format!("g_{p}_{q}"))
}

/// A catalog Hamiltonian system with its symmetry data.
#[derive(Debug, Clone)]
pub struct SystemModel {
    pub name: SystemName,
    pub params: BTreeMap<String, f64>,
    involutions: Vec<Involution>,
    cyclic: Option<CyclicSymmetry>,
}

impl SystemModel {
    /// Round sphere; flow on the unit level is the Hopf fibration.
    pub fn hopf() -> Self {
        models::hopf()
    }

    /// Irrational ellipsoid with semi-axis squares `r1_sq < r2_sq`.
    pub fn ellipsoid(r1_sq: f64, r2_sq: f64) -> Result<Self> {
        models::ellipsoid(r1_sq, r2_sq)
    }

    /// Restricted three-body problem at mass ratio `mu`, energy `c`.
    pub fn pcr3bp(mu: f64, c: f64) -> Result<Self> {
        models::pcr3bp(mu, c)
    }

    /// Hill's lunar problem at energy `c`.
    pub fn hill(c: f64) -> Self {
        models::hill(c)
    }

    /// Henon-Heiles system at energy `c`.
    pub fn henon_heiles(c: f64) -> Self {
        models::henon_heiles(c)
    }

    /// Builds a model from a JSON config block, e.g.
    /// `{"system": "pcr3bp", "mu": 0.5, "c": -1.8}`.
    pub fn from_config(v: &serde_json::Value) -> Result<Self> {
        let name = v
            .get("system")
            .or_else(|| v.get("name"))
            .and_then(|s| s.as_str())
            .ok_or_else(|| Error::InvalidInput("config needs a 'system' field".into()))?;
        let get = |key: &str| -> Option<f64> { v.get(key).and_then(|x| x.as_f64()) };
        match SystemName::parse(name)? {
            SystemName::Hopf => Ok(Self::hopf()),
            SystemName::Ellipsoid => Self::ellipsoid(
                get("r1_sq").unwrap_or(1.0),
                get("r2_sq").unwrap_or(0.5 * (1.0 + 5.0f64.sqrt())),
            ),
            SystemName::Pcr3bp => Self::pcr3bp(
                get("mu").ok_or_else(|| Error::InvalidInput("pcr3bp needs 'mu'".into()))?,
                get("c").ok_or_else(|| Error::InvalidInput("pcr3bp needs 'c'".into()))?,
            ),
            SystemName::Hill => Ok(Self::hill(
                get("c").ok_or_else(|| Error::InvalidInput("hill needs 'c'".into()))?,
            )),
            SystemName::HenonHeiles => Ok(Self::henon_heiles(
                get("c").ok_or_else(|| Error::InvalidInput("henon_heiles needs 'c'".into()))?,
            )),
        }
    }

    pub(crate) fn assemble(
        name: SystemName,
        params: BTreeMap<String, f64>,
        involutions: Vec<Involution>,
        cyclic: Option<CyclicSymmetry>,
    ) -> Self {
        Self {
            name,
            params,
            involutions,
            cyclic,
        }
    }

    pub fn param(&self, key: &str) -> f64 {
        self.params[key]
    }

    /// The energy value whose level set the model studies.
    pub fn energy_level(&self) -> f64 {
        match self.name {
            SystemName::Hopf | SystemName::Ellipsoid => 1.0,
            _ => self.param("c"),
        }
    }

    pub fn involutions(&self) -> &[Involution] {
        &self.involutions
    }

    pub fn involution(&self, label: &str) -> Result<&Involution> {
        self.involutions
            .iter()
            .find(|i| i.label == label)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "system '{}' has no involution '{label}' (available: {})",
                    self.name.as_str(),
                    self.involutions
                        .iter()
                        .map(|i| i.label.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                ))
            })
    }

    pub fn cyclic_symmetry(&self) -> Option<&CyclicSymmetry> {
        self.cyclic.as_ref()
    }

    pub fn hamiltonian(&self, z: &Vector4<f64>) -> f64 {
        models::hamiltonian(self, z)
    }

    pub fn gradient(&self, z: &Vector4<f64>) -> Vector4<f64> {
        models::gradient(self, z)
    }

    pub fn hessian(&self, z: &Vector4<f64>) -> Matrix4<f64> {
        models::hessian(self, z)
    }

    /// Squared distances to the collision loci, if the model has any.
    pub fn collision_distance(&self, z: &Vector4<f64>) -> Option<f64> {
        models::collision_distance(self, z)
    }

    /// Radius of the hard exclusion balls around collisions.
    pub const COLLISION_RADIUS: f64 = 1e-6;

    pub fn check_regular(&self, z: &Vector4<f64>) -> Result<()> {
        if let Some(d) = self.collision_distance(z) {
            if d < Self::COLLISION_RADIUS {
                return Err(Error::Domain(format!(
                    "point within {d:.3e} of a collision locus"
                )));
            }
        }
        Ok(())
    }

    /// The Hamiltonian vector field `X_H = J4 grad H`.
    pub fn vector_field(&self, z: &Vector4<f64>) -> Result<Vector4<f64>> {
        self.check_regular(z)?;
        Ok(j4() * self.gradient(z))
    }

    /// Jacobian of the vector field, `J4 Hess H`.
    pub fn field_jacobian(&self, z: &Vector4<f64>) -> Result<Matrix4<f64>> {
        self.check_regular(z)?;
        Ok(j4() * self.hessian(z))
    }

    /// The pairing of the Liouville form with the Hamiltonian field,
    /// `lambda0(X_H)(z) = <z, grad H(z)> / 2`.
    ///
    /// On a level set that is star-shaped about the origin this is positive
    /// and converts the Hamiltonian flow into the Reeb flow by rescaling
    /// time; on homogeneous-quadratic levels (sphere, ellipsoid) it is
    /// identically the energy value.
    pub fn reeb_rescaling(&self, z: &Vector4<f64>) -> Result<f64> {
        self.check_regular(z)?;
        let pairing = 0.5 * z.dot(&self.gradient(z));
        if pairing <= 0.0 {
            return Err(Error::Geometry(format!(
                "level is not star-shaped at {z:?}: lambda0(X_H) = {pairing:.3e}"
            )));
        }
        Ok(pairing)
    }

    /// Solves `H(s z) = level` for the smallest `s > 0` along the ray of `z`.
    ///
    /// Taking the first radial crossing keeps the projection on the bounded
    /// component of levels that continue into unbounded sheets.
    pub fn radial_scale_to_level(&self, z: &Vector4<f64>) -> Result<f64> {
        let target = self.energy_level();
        let eval = |s: f64| self.hamiltonian(&(z * s)) - target;
        // bracket the first sign change marching outward from the origin
        let mut lo = 0.0;
        let mut glo = eval(0.0);
        let mut hi = None;
        let mut s = 0.0;
        while s < 20.0 {
            s += 0.05;
            let g = eval(s);
            if g.is_finite() && g * glo <= 0.0 && g != glo {
                hi = Some(s);
                break;
            }
            lo = s;
            glo = g;
        }
        let mut hi = hi.ok_or_else(|| {
            Error::Geometry(format!("radial ray through {z:?} does not meet the level"))
        })?;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if eval(mid) * glo <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
                glo = eval(lo);
            }
            if hi - lo < 1e-15 * hi.max(1.0) {
                break;
            }
        }
        let mut s = 0.5 * (lo + hi);
        // Newton polish
        for _ in 0..8 {
            let zs = z * s;
            let dh = self.gradient(&zs).dot(z);
            if dh.abs() < 1e-14 {
                break;
            }
            let step = (self.hamiltonian(&zs) - target) / dh;
            s -= step;
            if step.abs() < 1e-15 * s.abs().max(1.0) {
                break;
            }
        }
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Geometry(format!(
                "radial projection to the level failed along {z:?}"
            )));
        }
        Ok(s)
    }

    /// Verifies `dH(X_H) = 0` at `z`; diagnostic used in tests.
    pub fn energy_pairing_defect(&self, z: &Vector4<f64>) -> f64 {
        let g = self.gradient(z);
        let x = j4() * g;
        g.dot(&x).abs()
    }
}

/// `omega0(u, v)` convenience re-export for symmetry tests.
pub fn symplectic_product(u: &Vector4<f64>, v: &Vector4<f64>) -> f64 {
    quat_i(u).dot(v)
}
