//! Path and loop containers, index reports, and the loop <-> path maps.

use super::grid::PeriodicGrid;
use crate::error::{Error, Result};
use crate::linalg::j0;
use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// A half-integer stored as twice its value, so `Half(3)` is `3/2`.
///
/// Index arithmetic stays exact this way; serialization uses the `f64`
/// value for interoperability.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Half(pub i64);

impl Half {
    pub fn new_int(n: i64) -> Self {
        Half(2 * n)
    }

    /// `Half::new_half(3)` is `3/2`.
    pub fn new_half(numerator: i64) -> Self {
        Half(numerator)
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// Rounds `x` to the nearest half-integer, requiring the deviation to be
    /// below `tol`.
    pub fn from_f64(x: f64, tol: f64) -> Result<Self> {
        let doubled = 2.0 * x;
        let rounded = doubled.round();
        if (doubled - rounded).abs() > tol {
            return Err(Error::IllConditioned(format!(
                "value {x} is {:.3e} away from a half-integer",
                (doubled - rounded).abs() / 2.0
            )));
        }
        Ok(Half(rounded as i64))
    }
}

impl fmt::Display for Half {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl Serialize for Half {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for Half {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let x = f64::deserialize(d)?;
        Half::from_f64(x, 1e-9).map_err(serde::de::Error::custom)
    }
}

/// A loop of 2x2 symmetric matrices sampled on a uniform grid over `[0, 1)`.
///
/// When `symmetric_flag` is set the loop satisfies `S(-t) = I S(t) I` with
/// `I = diag(1, -1)`; in particular `S(0)` and `S(1/2)` are diagonal.
#[derive(Debug, Clone)]
pub struct SymmetricLoop {
    /// Entries `(a, b, d)` of `[[a, b], [b, d]]` at each node.
    entries: Vec<[f64; 3]>,
    symmetric_flag: bool,
}

pub const SYMMETRY_TOL: f64 = 1e-12;
pub const REFLECTION_TOL: f64 = 1e-9;

impl SymmetricLoop {
    /// Builds a loop from matrix samples at the uniform nodes `j/n`.
    ///
    /// Rejects matrices that are not symmetric to `1e-12`, and rejects the
    /// `symmetric_flag` when the reflection identity fails at `1e-9`.
    pub fn from_matrices(mats: &[Matrix2<f64>], symmetric_flag: bool) -> Result<Self> {
        if mats.len() < 4 {
            return Err(Error::InvalidInput(format!(
                "need at least 4 loop samples, got {}",
                mats.len()
            )));
        }
        let mut entries = Vec::with_capacity(mats.len());
        for (j, m) in mats.iter().enumerate() {
            if (m[(0, 1)] - m[(1, 0)]).abs() > SYMMETRY_TOL {
                return Err(Error::InvalidInput(format!(
                    "loop sample {j} is not symmetric: |b - c| = {:.3e}",
                    (m[(0, 1)] - m[(1, 0)]).abs()
                )));
            }
            entries.push([m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]]);
        }
        let lp = Self {
            entries,
            symmetric_flag,
        };
        if symmetric_flag {
            let dev = lp.reflection_defect();
            if dev > REFLECTION_TOL {
                return Err(Error::InvalidInput(format!(
                    "symmetric_flag set but S(-t) != I S(t) I; defect {dev:.3e}"
                )));
            }
        }
        Ok(lp)
    }

    pub fn from_fn(n: usize, symmetric_flag: bool, f: impl Fn(f64) -> Matrix2<f64>) -> Result<Self> {
        let mats: Vec<_> = (0..n).map(|j| f(j as f64 / n as f64)).collect();
        Self::from_matrices(&mats, symmetric_flag)
    }

    pub fn constant(s: Matrix2<f64>, n: usize) -> Result<Self> {
        let symmetric = s[(0, 1)].abs() <= REFLECTION_TOL;
        Self::from_matrices(&vec![s; n], symmetric)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn symmetric_flag(&self) -> bool {
        self.symmetric_flag
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 / self.len() as f64
    }

    pub fn matrix_at_node(&self, j: usize) -> Matrix2<f64> {
        let [a, b, d] = self.entries[j % self.len()];
        Matrix2::new(a, b, b, d)
    }

    /// `max_j |S(-t_j) - I S(t_j) I|`.
    pub fn reflection_defect(&self) -> f64 {
        let n = self.len();
        let mut dev: f64 = 0.0;
        for j in 0..n {
            let [a, b, d] = self.entries[j];
            let [ar, br, dr] = self.entries[(n - j) % n];
            // I S I negates the off-diagonal entry.
            dev = dev.max((ar - a).abs().max((dr - d).abs()).max((br + b).abs()));
        }
        dev
    }

    /// Enforces `S(-t) = I S(t) I` exactly by averaging mirrored samples.
    ///
    /// Used when a loop is produced by numerical differentiation along a
    /// symmetric frame: the identity holds up to integration error and the
    /// projection removes only that noise.
    pub fn symmetrized(&self) -> Self {
        let n = self.len();
        let mut entries = self.entries.clone();
        for j in 0..n {
            let k = (n - j) % n;
            if k < j {
                continue;
            }
            let [a1, b1, d1] = self.entries[j];
            let [a2, b2, d2] = self.entries[k];
            let (a, b, d) = (0.5 * (a1 + a2), 0.5 * (b1 - b2), 0.5 * (d1 + d2));
            entries[j] = [a, b, d];
            entries[k] = [a, -b, d];
        }
        Self {
            entries,
            symmetric_flag: true,
        }
    }

    /// Trigonometric interpolation of the loop at arbitrary `t` (period 1).
    pub fn eval(&self, t: f64) -> Matrix2<f64> {
        let grid = PeriodicGrid::new(self.len(), 1.0);
        let mut acc = [0.0; 3];
        for j in 0..self.len() {
            let w = super::grid::dirichlet_kernel(t - grid.node(j), self.len());
            for (local, &e) in acc.iter_mut().zip(self.entries[j].iter()) {
                *local += w * e;
            }
        }
        Matrix2::new(acc[0], acc[1], acc[1], acc[2])
    }

    /// Resamples onto `n` uniform nodes of the unit period.
    pub fn resample(&self, n: usize) -> Vec<Matrix2<f64>> {
        if n == self.len() {
            return (0..n).map(|j| self.matrix_at_node(j)).collect();
        }
        (0..n).map(|j| self.eval(j as f64 / n as f64)).collect()
    }

    /// JSON export: array of `[t, s11, s12, s21, s22]` rows.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<[f64; 5]> = (0..self.len())
            .map(|j| {
                let m = self.matrix_at_node(j);
                [self.node(j), m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]
            })
            .collect();
        serde_json::json!({
            "symmetric_flag": self.symmetric_flag,
            "samples": rows,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let flag = v
            .get("symmetric_flag")
            .and_then(|f| f.as_bool())
            .unwrap_or(false);
        let rows: Vec<[f64; 5]> = serde_json::from_value(
            v.get("samples")
                .cloned()
                .ok_or_else(|| Error::InvalidInput("missing 'samples'".into()))?,
        )
        .map_err(|e| Error::InvalidInput(format!("bad loop samples: {e}")))?;
        let mats: Vec<Matrix2<f64>> = rows
            .iter()
            .map(|r| Matrix2::new(r[1], r[2], r[3], r[4]))
            .collect();
        Self::from_matrices(&mats, flag)
    }
}

/// A sampled path of 2x2 symplectic matrices on `[0, k]` with `Phi(0) = Id`.
#[derive(Debug, Clone)]
pub struct SymplecticPath {
    /// Samples at `t_i = i / samples_per_unit`, `i = 0 ..= k * samples_per_unit`.
    mats: Vec<Matrix2<f64>>,
    samples_per_unit: usize,
    iterate_count: u32,
    generator: Option<SymmetricLoop>,
}

pub const DET_TOL: f64 = 1e-9;

impl SymplecticPath {
    pub fn from_samples(
        mats: Vec<Matrix2<f64>>,
        samples_per_unit: usize,
        iterate_count: u32,
        generator: Option<SymmetricLoop>,
    ) -> Result<Self> {
        let expected = samples_per_unit * iterate_count as usize + 1;
        if mats.len() != expected {
            return Err(Error::InvalidInput(format!(
                "expected {expected} path samples, got {}",
                mats.len()
            )));
        }
        if (mats[0] - Matrix2::identity()).norm() != 0.0 {
            return Err(Error::InvalidInput(
                "path must start at the identity matrix exactly".into(),
            ));
        }
        let det_drift = mats
            .iter()
            .map(|m| (m.determinant() - 1.0).abs())
            .fold(0.0, f64::max);
        if det_drift > DET_TOL {
            return Err(Error::InvalidInput(format!(
                "path determinant drifts by {det_drift:.3e} > {DET_TOL:.0e}"
            )));
        }
        Ok(Self {
            mats,
            samples_per_unit,
            iterate_count,
            generator,
        })
    }

    pub fn iterate_count(&self) -> u32 {
        self.iterate_count
    }

    pub fn samples_per_unit(&self) -> usize {
        self.samples_per_unit
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 / self.samples_per_unit as f64
    }

    pub fn matrix(&self, i: usize) -> &Matrix2<f64> {
        &self.mats[i]
    }

    pub fn matrices(&self) -> &[Matrix2<f64>] {
        &self.mats
    }

    pub fn generator(&self) -> Option<&SymmetricLoop> {
        self.generator.as_ref()
    }

    pub fn end_matrix(&self) -> &Matrix2<f64> {
        self.mats.last().unwrap()
    }

    /// Endpoint matrix of the first period, `Phi(1)`.
    pub fn period_matrix(&self) -> &Matrix2<f64> {
        &self.mats[self.samples_per_unit]
    }

    /// `|det(Phi(k) - Id)|`, the periodic non-degeneracy margin.
    pub fn periodic_margin(&self) -> f64 {
        (self.end_matrix() - Matrix2::identity()).determinant().abs()
    }

    /// Angle between `Phi(k/2) R` and `R`, the chord non-degeneracy margin.
    ///
    /// Requires `k * samples_per_unit` even so that `k/2` lies on the grid.
    pub fn chord_margin(&self) -> Result<f64> {
        let idx = self.half_index()?;
        let u = self.mats[idx] * Vector2::new(1.0, 0.0);
        let angle = u[1].atan2(u[0]);
        let d = angle.rem_euclid(std::f64::consts::PI);
        Ok(d.min(std::f64::consts::PI - d))
    }

    pub fn half_index(&self) -> Result<usize> {
        let total = self.samples_per_unit * self.iterate_count as usize;
        if total % 2 != 0 {
            return Err(Error::InvalidInput(
                "path sampling does not contain t = k/2; use an even sample count".into(),
            ));
        }
        Ok(total / 2)
    }

    /// Maximal deviation of `Phi(t + 1) - Phi(t) Phi(1)` over sampled overlaps.
    pub fn iteration_defect(&self) -> f64 {
        let m1 = *self.period_matrix();
        let spu = self.samples_per_unit;
        let mut dev: f64 = 0.0;
        for i in 0..self.mats.len() - spu {
            dev = dev.max((self.mats[i + spu] - self.mats[i] * m1).norm());
        }
        dev
    }

    /// JSON export: `[t, m11, m12, m21, m22]` rows plus the iterate count.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<[f64; 5]> = self
            .mats
            .iter()
            .enumerate()
            .map(|(i, m)| [self.time(i), m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]])
            .collect();
        serde_json::json!({
            "iterate_count": self.iterate_count,
            "samples": rows,
            "generator": self.generator.as_ref().map(|g| g.to_json()),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let k = v
            .get("iterate_count")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| Error::InvalidInput("missing 'iterate_count'".into()))? as u32;
        let rows: Vec<[f64; 5]> = serde_json::from_value(
            v.get("samples")
                .cloned()
                .ok_or_else(|| Error::InvalidInput("missing 'samples'".into()))?,
        )
        .map_err(|e| Error::InvalidInput(format!("bad path samples: {e}")))?;
        if rows.len() < 2 {
            return Err(Error::InvalidInput("path needs at least 2 samples".into()));
        }
        let spu = (rows.len() - 1) / k.max(1) as usize;
        let mut mats: Vec<Matrix2<f64>> = rows
            .iter()
            .map(|r| Matrix2::new(r[1], r[2], r[3], r[4]))
            .collect();
        mats[0] = Matrix2::identity();
        let generator = match v.get("generator") {
            Some(serde_json::Value::Null) | None => None,
            Some(g) => Some(SymmetricLoop::from_json(g)?),
        };
        Self::from_samples(mats, spu, k, generator)
    }
}

/// Which engine produced an [`IndexReport`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexMethod {
    Spectral,
    Rotation,
    Crossing,
}

/// Result of an index computation.
#[derive(Debug, Clone, Serialize)]
pub struct IndexReport {
    /// Conley-Zehnder index of the periodic problem, when computed.
    pub mu_cz: Option<i64>,
    /// Robbin-Salamon index of the boundary problem, when computed.
    pub mu_rs: Option<Half>,
    /// Extremal winding number `alpha` entering the index formula.
    pub alpha: Half,
    /// Parity term `p` of the periodic index formula.
    pub p: Option<u8>,
    pub method: IndexMethod,
    /// Transverse rotation number of the path, when the method computes one.
    pub rotation_number: Option<f64>,
    /// Named diagnostic residuals (non-degeneracy margins, roundness checks).
    pub residuals: BTreeMap<String, f64>,
}

impl IndexReport {
    pub(crate) fn check_consistency(&self) -> Result<()> {
        if let (Some(mu), Some(p)) = (self.mu_cz, self.p) {
            if !self.alpha.is_integer() || mu != self.alpha.0 + p as i64 {
                return Err(Error::Internal(format!(
                    "periodic index relation mu = 2 alpha + p violated: mu={mu} alpha={} p={p}",
                    self.alpha
                )));
            }
        }
        if let Some(mu) = self.mu_rs {
            if mu.is_integer() {
                return Err(Error::Internal(format!(
                    "boundary index must be a strict half-integer, got {mu}"
                )));
            }
            if mu.0 != self.alpha.0 * 2 + 1 {
                return Err(Error::Internal(format!(
                    "boundary index relation mu = 2 alpha + 1/2 violated: mu={mu} alpha={}",
                    self.alpha
                )));
            }
        }
        Ok(())
    }
}

/// One eigenmode of a first-order operator, with its winding number.
#[derive(Debug, Clone, Serialize)]
pub struct EigenModeRecord {
    pub eigenvalue: f64,
    /// Integer winding for the periodic problem, half-integer for the
    /// boundary problem.
    pub winding: Half,
    /// Samples `(t, re, im)` of the eigenfunction on the operator grid.
    pub eigenfunction: Vec<(f64, f64, f64)>,
    /// Relative residual of the eigen-equation, evaluated on a refined grid.
    pub residual: f64,
}

/// Options for integrating a path from its generating loop.
#[derive(Debug, Clone)]
pub struct PathOptions {
    /// Stored samples per unit time (even, so `t = k/2` lands on the grid).
    pub samples_per_unit: usize,
    /// Runge-Kutta substeps per stored sample.
    pub substeps: usize,
    /// Extend to `[0, k]` via `Phi(t+1) = Phi(t) Phi(1)` instead of
    /// integrating the whole interval directly.
    pub extend_by_product: bool,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self {
            samples_per_unit: 512,
            substeps: 16,
            extend_by_product: true,
        }
    }
}

/// Integrates `Phi' = J0 S(t) Phi`, `Phi(0) = Id` over `[0, k]`.
///
/// The loop must carry at least 64 samples; determinant drift beyond `1e-6`
/// during integration signals a grid too coarse for the loop and is
/// reported as an error.
pub fn path_from_loop(lp: &SymmetricLoop, k: u32) -> Result<SymplecticPath> {
    path_from_loop_with(lp, k, &PathOptions::default())
}

pub fn path_from_loop_with(
    lp: &SymmetricLoop,
    k: u32,
    opts: &PathOptions,
) -> Result<SymplecticPath> {
    if lp.len() < 64 {
        return Err(Error::InvalidInput(format!(
            "loop must be sampled on at least 64 points, got {}",
            lp.len()
        )));
    }
    if k == 0 {
        return Err(Error::InvalidInput("iterate count must be positive".into()));
    }
    if opts.samples_per_unit % 2 != 0 {
        return Err(Error::InvalidInput(
            "samples_per_unit must be even".into(),
        ));
    }
    let spu = opts.samples_per_unit;
    let integrate_units = if opts.extend_by_product { 1 } else { k as usize };

    // Tabulate S exactly at every Runge-Kutta evaluation node (step
    // endpoints and midpoints), so the integrator sees the interpolant with
    // no further approximation.
    let steps = spu * opts.substeps * integrate_units;
    let table: Vec<Matrix2<f64>> = (0..=2 * steps)
        .map(|i| lp.eval((i as f64 / (2 * spu * opts.substeps) as f64).rem_euclid(1.0)))
        .collect();

    let j = j0();
    let mut mats = Vec::with_capacity(spu * integrate_units + 1);
    let mut phi = Matrix2::identity();
    mats.push(phi);
    let h = 1.0 / (spu * opts.substeps) as f64;
    for i in 0..spu * integrate_units {
        for sub in 0..opts.substeps {
            let node = 2 * (i * opts.substeps + sub);
            let k1 = j * table[node] * phi;
            let k2 = j * table[node + 1] * (phi + k1 * (0.5 * h));
            let k3 = j * table[node + 1] * (phi + k2 * (0.5 * h));
            let k4 = j * table[node + 2] * (phi + k3 * h);
            phi += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        let drift = (phi.determinant() - 1.0).abs();
        if drift > 1e-6 {
            return Err(Error::IllConditioned(format!(
                "determinant drifted by {drift:.3e} while integrating the loop; \
                 the sampling grid is too coarse"
            )));
        }
        mats.push(phi);
    }

    if opts.extend_by_product && k > 1 {
        let m1 = mats[spu];
        for unit in 1..k as usize {
            for i in 1..=spu {
                let m = mats[(unit - 1) * spu + i] * m1;
                mats.push(m);
            }
            let _ = unit;
        }
    }

    SymplecticPath::from_samples(mats, spu, k, Some(lp.clone()))
}

/// Recovers the generating loop `S(t) = -J0 Phi' Phi^{-1}` from path samples
/// over the first period, by eighth-order central differencing.
///
/// The result is symmetrized entrywise; the skew part measures the
/// differentiation error and is returned alongside.
pub fn generator_from_path(path: &SymplecticPath, symmetric_flag: bool) -> Result<(SymmetricLoop, f64)> {
    let spu = path.samples_per_unit();
    if path.len() < 9 {
        return Err(Error::InvalidInput("path too short to differentiate".into()));
    }
    let h = 1.0 / spu as f64;
    // centered 8th-order stencil; wrap indices using Phi(t+1) = Phi(t) Phi(1)
    let weights = [3.0, -32.0, 168.0, -672.0, 0.0, 672.0, -168.0, 32.0, -3.0];
    let denom = 840.0 * h;
    let m1 = *path.period_matrix();
    let m1_inv = m1.try_inverse().ok_or_else(|| {
        Error::IllConditioned("period matrix not invertible".into())
    })?;
    let sample = |i: isize| -> Matrix2<f64> {
        if i < 0 {
            path.matrices()[(i + spu as isize) as usize] * m1_inv
        } else if (i as usize) < path.len() {
            path.matrices()[i as usize]
        } else {
            path.matrices()[i as usize - spu] * m1
        }
    };
    let j = j0();
    let mut mats = Vec::with_capacity(spu);
    let mut skew: f64 = 0.0;
    for i in 0..spu as isize {
        let mut d = Matrix2::zeros();
        for (o, w) in weights.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            d += sample(i + o as isize - 4) * *w;
        }
        d /= denom;
        let phi_inv = path.matrices()[i as usize]
            .try_inverse()
            .ok_or_else(|| Error::IllConditioned("singular path sample".into()))?;
        let s = -j * d * phi_inv;
        skew = skew.max((s[(0, 1)] - s[(1, 0)]).abs());
        let b = 0.5 * (s[(0, 1)] + s[(1, 0)]);
        mats.push(Matrix2::new(s[(0, 0)], b, b, s[(1, 1)]));
    }
    let lp = SymmetricLoop::from_matrices(&mats, false)?;
    let lp = if symmetric_flag { lp.symmetrized() } else { lp };
    Ok((lp, skew))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rot2;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn zero_loop_integrates_to_identity() {
        let lp = SymmetricLoop::constant(Matrix2::zeros(), 64).unwrap();
        let path = path_from_loop(&lp, 1).unwrap();
        for m in path.matrices() {
            assert_relative_eq!((m - Matrix2::identity()).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn constant_isotropic_loop_integrates_to_rotation() {
        // S = 2 pi theta Id generates the rigid rotation by angle 2 pi theta t.
        let theta = 0.4;
        let s = Matrix2::identity() * (2.0 * PI * theta);
        let lp = SymmetricLoop::constant(s, 64).unwrap();
        let path = path_from_loop(&lp, 1).unwrap();
        let end = path.end_matrix();
        assert_relative_eq!((end - rot2(2.0 * PI * theta)).norm(), 0.0, epsilon = 1e-10);
        // 144 degrees
        assert_relative_eq!(end[(0, 0)], (0.8 * PI).cos(), epsilon = 1e-10);
    }

    #[test]
    fn iterated_rotation_path_satisfies_product_rule() {
        let theta = 0.4;
        let s = Matrix2::identity() * (2.0 * PI * theta);
        let lp = SymmetricLoop::constant(s, 64).unwrap();
        let path = path_from_loop(&lp, 2).unwrap();
        let end = path.end_matrix();
        assert_relative_eq!((end - rot2(4.0 * PI * theta)).norm(), 0.0, epsilon = 1e-9);

        // direct integration oracle: Phi(1.5) = Phi(0.5) Phi(1)
        let direct = path_from_loop_with(
            &lp,
            2,
            &PathOptions {
                extend_by_product: false,
                ..PathOptions::default()
            },
        )
        .unwrap();
        let spu = direct.samples_per_unit();
        let lhs = direct.matrices()[spu + spu / 2];
        let rhs = direct.matrices()[spu / 2] * direct.matrices()[spu];
        assert!((lhs - rhs).norm() < 1e-8);
        assert!(direct.iteration_defect() < 1e-8);
        // and the two construction modes agree
        let dev: f64 = path
            .matrices()
            .iter()
            .zip(direct.matrices())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-9, "product vs direct deviation {dev:.3e}");
    }

    #[test]
    fn rejects_nonsymmetric_input() {
        let bad = Matrix2::new(0.0, 1.0, -1.0, 0.0);
        assert!(SymmetricLoop::constant(bad, 64).is_err());
    }

    #[test]
    fn generator_round_trip() {
        let lp = SymmetricLoop::from_fn(128, false, |t| {
            let c = (2.0 * PI * t).cos();
            let s = (2.0 * PI * t).sin();
            Matrix2::new(1.0 + 0.3 * c, 0.2 * s, 0.2 * s, -0.5 + 0.1 * c)
        })
        .unwrap();
        let path = path_from_loop(&lp, 1).unwrap();
        let (rec, skew) = generator_from_path(&path, false).unwrap();
        assert!(skew < 1e-8, "skew part {skew:.3e}");
        let mut dev: f64 = 0.0;
        for j in 0..rec.len() {
            let t = rec.node(j);
            dev = dev.max((rec.matrix_at_node(j) - lp.eval(t)).norm());
        }
        assert!(dev < 1e-7, "generator recovery deviation {dev:.3e}");
    }

    #[test]
    fn symmetric_loop_reflection_identity() {
        // diagonal cosine part + off-diagonal sine part is reflection-symmetric
        let lp = SymmetricLoop::from_fn(128, true, |t| {
            let c = (2.0 * PI * t).cos();
            let s = (2.0 * PI * t).sin();
            Matrix2::new(0.7 + c, 0.4 * s, 0.4 * s, -0.2 * c)
        })
        .unwrap();
        assert!(lp.reflection_defect() < 1e-12);
        // S(0) and S(1/2) diagonal
        assert!(lp.eval(0.0)[(0, 1)].abs() < 1e-12);
        assert!(lp.eval(0.5)[(0, 1)].abs() < 1e-10);
    }

    #[test]
    fn json_round_trip() {
        let lp = SymmetricLoop::from_fn(64, false, |t| {
            Matrix2::new((2.0 * PI * t).cos(), 0.1, 0.1, 1.0)
        })
        .unwrap();
        let path = path_from_loop(&lp, 2).unwrap();
        let back = SymplecticPath::from_json(&path.to_json()).unwrap();
        assert_eq!(back.len(), path.len());
        assert_eq!(back.iterate_count(), 2);
        let dev: f64 = back
            .matrices()
            .iter()
            .zip(path.matrices())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-14);
    }
}
