//! Numerical toolkit for symmetric periodic orbits of Reeb and Hamiltonian
//! flows on three-dimensional energy levels with anti-symplectic symmetry.
//!
//! The crate is organized around five subsystems:
//!
//! - [`systems`]: the catalog of model Hamiltonians on R^4 (rotating Kepler
//!   variants, Henon-Heiles, irrational ellipsoids) together with their
//!   involutive symmetries and energy-level geometry.
//! - [`flow`]: trajectory and variational-equation integration, contact-plane
//!   trivialization frames along orbits, and transverse symplectic paths.
//! - [`sympath`]: the index engines. Conley-Zehnder and Robbin-Salamon
//!   indices of sampled paths of 2x2 symplectic matrices, computed both from
//!   the spectrum of the associated first-order operator and from rotation
//!   numbers / Lagrangian crossing counts.
//! - [`orbits`]: symmetric periodic orbit search by chord shooting between
//!   fixed-point sets, symmetry classification, Gauss linking and
//!   self-linking numbers.
//! - [`sections`]: disk-like surfaces of section, first-return maps, and
//!   symmetric fixed points of reversible return maps.
//!
//! Phase space is R^4 with coordinates ordered so that the two symplectic
//! pairs interleave: `(x1, y1, x2, y2)` with `z1 = x1 + i y1`,
//! `z2 = x2 + i y2`. The symplectic form is `dx1 ^ dy1 + dx2 ^ dy2` and
//! Hamiltonian vector fields follow the convention `i_{X_H} omega = -dH`,
//! i.e. `X_H = J grad H` with `J = diag(J0, J0)`.

pub mod error;
pub mod flow;
pub mod linalg;
pub mod orbits;
pub mod sections;
pub mod sympath;
pub mod systems;

pub use error::{Error, Result};
