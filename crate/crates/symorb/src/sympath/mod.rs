//! Index engines for sampled paths of 2x2 symplectic matrices.
//!
//! A path `Phi` with `Phi(0) = Id` and `Phi(t+1) = Phi(t) Phi(1)` is encoded
//! by [`SymplecticPath`]; the loop of symmetric matrices
//! `S(t) = -J0 Phi'(t) Phi(t)^{-1}` that generates it is a [`SymmetricLoop`].
//! Conley-Zehnder and Robbin-Salamon indices of non-degenerate paths are
//! computed by two independent routes:
//!
//! - spectrally, from eigenvalue/winding data of the first-order operator
//!   `v -> -J0 v' - S v` on periodic loops (index `2 alpha + p`) or on the
//!   half-interval with real boundary conditions (index `2 alpha + 1/2`);
//! - geometrically, from the transverse rotation number of the path
//!   (elliptic/hyperbolic endpoint) or from signed crossings of the
//!   Lagrangian line path `Phi(t) R` against `R`.
//!
//! Both routes are exposed so that every reported index can be
//! cross-checked.

mod crossing;
mod grid;
mod rotation;
mod spectral;
mod types;

pub use crossing::rs_index_crossing;
pub use rotation::cz_index_rotation;
pub use spectral::{
    cz_index_spectral, rs_index_spectral, winding_spectrum, SpectralOptions,
};
pub use types::{
    generator_from_path, path_from_loop, path_from_loop_with, EigenModeRecord, Half, IndexMethod,
    IndexReport, PathOptions, SymmetricLoop, SymplecticPath,
};

/// Trivialization change for the Robbin-Salamon index: a frame change of
/// winding `w` shifts the index by exactly `w`.
pub fn retrivialized_rs(mu_rs: Half, wind_change: i64) -> Half {
    Half(mu_rs.0 + 2 * wind_change)
}

/// Trigonometric interpolation of uniformly sampled periodic data at `t`,
/// measured in periods.
pub fn grid_interp(values: &[f64], t: f64) -> f64 {
    grid::PeriodicGrid::new(values.len(), 1.0).interp(values, t)
}
