//! Spectral index engine.
//!
//! The operator `A_S v = -J0 v' - S v` acts on loops `v : R/kZ -> C`
//! (periodic problem) or on paths over `[0, k/2]` with real boundary values
//! (boundary problem). Both are discretized by Fourier collocation on a
//! uniform grid with an odd number of nodes; odd sizes avoid the Nyquist
//! mode, the differentiation matrix is exactly antisymmetric, and the
//! collocation matrix is exactly symmetric. The boundary problem is realized
//! by restricting the periodic operator to the subspace of loops fixed by
//! `v(-t) = conj(v(t))`, which is an orthogonal reduction whenever the loop
//! satisfies `S(-t) = I S(t) I`. Relative windings on the half-interval are
//! then half the full-circle winding of the doubled eigenfunction.

use super::grid::{next_odd, PeriodicGrid};
use super::types::{
    path_from_loop, EigenModeRecord, Half, IndexMethod, IndexReport, SymmetricLoop,
};
use crate::error::{Error, Result};
use crate::linalg::total_turning;
use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use std::collections::BTreeMap;
use std::ops::RangeInclusive;

/// Tunable discretization parameters.
#[derive(Debug, Clone)]
pub struct SpectralOptions {
    /// Requested collocation resolution per unit period (rounded up to odd).
    pub n_modes: usize,
    /// Eigenvalues within `delta` of zero count as nonnegative for the
    /// parity rule.
    pub delta: f64,
    /// Minimal spectral gap around zero; below this the problem is reported
    /// as ill-conditioned (numerically degenerate).
    pub gap_tol: f64,
    /// Eigenvalues closer than this form a multiplicity cluster.
    pub cluster_tol: f64,
    /// Non-degeneracy threshold for `|det(Phi(k) - Id)|`.
    pub degeneracy_tol: f64,
    /// Non-degeneracy threshold for the chord angle margin, in radians.
    pub chord_tol: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            n_modes: 256,
            delta: 1e-9,
            gap_tol: 1e-8,
            cluster_tol: 1e-9,
            degeneracy_tol: 1e-8,
            chord_tol: 1e-8,
        }
    }
}

/// Discretized operator together with its eigendecomposition.
struct EigenProblem {
    grid: PeriodicGrid,
    /// Eigenvalues in ascending order.
    eigenvalues: Vec<f64>,
    /// Eigenvectors as grid samples, `vecs[i][j] in R^2 ~ C`.
    vectors: Vec<Vec<Vector2<f64>>>,
    /// Loop samples on the grid (period-k extension of the unit loop).
    s_samples: Vec<Matrix2<f64>>,
}

fn grid_size(opts: &SpectralOptions, k: u32) -> usize {
    // Full per-unit resolution for short paths; longer iterates keep the
    // matrix tractable while staying well above the winding bandwidth.
    let per_unit = if k <= 2 {
        opts.n_modes
    } else {
        (opts.n_modes / 2).max(96)
    };
    next_odd(per_unit * k as usize)
}

/// Builds and diagonalizes the periodic operator on `R / kZ`.
fn periodic_problem(lp: &SymmetricLoop, k: u32, opts: &SpectralOptions) -> EigenProblem {
    let n = grid_size(opts, k);
    let grid = PeriodicGrid::new(n, k as f64);
    let s_samples: Vec<Matrix2<f64>> = (0..n)
        .map(|j| lp.eval(grid.node(j).rem_euclid(1.0)))
        .collect();
    let d = grid.diff_matrix();

    // A = -(J0 (x) D) - blockdiag(S_j); real symmetric of size 2n.
    let mut a = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for j in 0..n {
        for kk in 0..n {
            let djk = d[(j, kk)];
            if djk != 0.0 {
                // -J0 * djk = [[0, djk], [-djk, 0]]
                a[(2 * j, 2 * kk + 1)] += djk;
                a[(2 * j + 1, 2 * kk)] -= djk;
            }
        }
        let s = &s_samples[j];
        a[(2 * j, 2 * j)] -= s[(0, 0)];
        a[(2 * j, 2 * j + 1)] -= s[(0, 1)];
        a[(2 * j + 1, 2 * j)] -= s[(1, 0)];
        a[(2 * j + 1, 2 * j + 1)] -= s[(1, 1)];
    }
    // Symmetrize away floating-point asymmetry before the eigensolve.
    let a = (&a + &a.transpose()) * 0.5;

    let eig = a.symmetric_eigen();
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors: Vec<Vec<Vector2<f64>>> = order
        .iter()
        .map(|&i| {
            let col = eig.eigenvectors.column(i);
            (0..n).map(|j| Vector2::new(col[2 * j], col[2 * j + 1])).collect()
        })
        .collect();
    EigenProblem {
        grid,
        eigenvalues,
        vectors,
        s_samples,
    }
}

/// Restriction of the periodic operator to the conjugation-fixed subspace
/// `v(-t) = conj v(t)`, realizing real boundary conditions at `0` and `k/2`.
fn boundary_problem(lp: &SymmetricLoop, k: u32, opts: &SpectralOptions) -> Result<EigenProblem> {
    let n = grid_size(opts, k);
    let grid = PeriodicGrid::new(n, k as f64);
    let s_samples: Vec<Matrix2<f64>> = (0..n)
        .map(|j| lp.eval(grid.node(j).rem_euclid(1.0)))
        .collect();
    let d = grid.diff_matrix();

    let mut a = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for j in 0..n {
        for kk in 0..n {
            let djk = d[(j, kk)];
            if djk != 0.0 {
                a[(2 * j, 2 * kk + 1)] += djk;
                a[(2 * j + 1, 2 * kk)] -= djk;
            }
        }
        let s = &s_samples[j];
        a[(2 * j, 2 * j)] -= s[(0, 0)];
        a[(2 * j, 2 * j + 1)] -= s[(0, 1)];
        a[(2 * j + 1, 2 * j)] -= s[(1, 0)];
        a[(2 * j + 1, 2 * j + 1)] -= s[(1, 1)];
    }
    let a = (&a + &a.transpose()) * 0.5;

    // Orthonormal basis of the fixed subspace: node 0 contributes the real
    // direction; mirrored node pairs (j, n-j) contribute two directions each.
    let dim = n;
    let mut q = DMatrix::<f64>::zeros(2 * n, dim);
    q[(0, 0)] = 1.0;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut col = 1;
    for j in 1..=(n - 1) / 2 {
        let m = n - j;
        // (e1 at j) + (e1 at m), conjugation fixes the real part
        q[(2 * j, col)] = inv_sqrt2;
        q[(2 * m, col)] = inv_sqrt2;
        col += 1;
        // (e2 at j) - (e2 at m)
        q[(2 * j + 1, col)] = inv_sqrt2;
        q[(2 * m + 1, col)] = -inv_sqrt2;
        col += 1;
    }
    debug_assert_eq!(col, dim);

    let b = q.transpose() * &a * &q;
    let b = (&b + &b.transpose()) * 0.5;
    let eig = b.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors: Vec<Vec<Vector2<f64>>> = order
        .iter()
        .map(|&i| {
            let coeffs: DVector<f64> = eig.eigenvectors.column(i).into_owned();
            let full = &q * coeffs;
            (0..n)
                .map(|j| Vector2::new(full[2 * j], full[2 * j + 1]))
                .collect()
        })
        .collect();
    Ok(EigenProblem {
        grid,
        eigenvalues,
        vectors,
        s_samples,
    })
}

impl EigenProblem {
    /// Full-circle winding number of eigenvector `i` as a closed curve.
    ///
    /// Within a multiplicity cluster an eigenvector may be an unlucky
    /// combination that nearly vanishes somewhere; rotating within the
    /// cluster plane restores a usable representative.
    fn winding_times_two(&self, i: usize, cluster_tol: f64) -> Result<i64> {
        let candidates: Vec<usize> = (0..self.eigenvalues.len())
            .filter(|&j| (self.eigenvalues[j] - self.eigenvalues[i]).abs() <= cluster_tol)
            .collect();
        let mut best: Option<(f64, Vec<Vector2<f64>>)> = None;
        let partners: Vec<&Vec<Vector2<f64>>> =
            candidates.iter().map(|&j| &self.vectors[j]).collect();
        let mut consider = |v: Vec<Vector2<f64>>| {
            let max = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
            let min = v.iter().map(|x| x.norm()).fold(f64::INFINITY, f64::min);
            let quality = if max > 0.0 { min / max } else { 0.0 };
            if best.as_ref().is_none_or(|(q, _)| quality > *q) {
                best = Some((quality, v));
            }
        };
        consider(self.vectors[i].clone());
        if partners.len() == 2 {
            for phi in [0.25, 0.5, 0.75] {
                let (c, s) = (std::f64::consts::PI * phi).sin_cos();
                let v: Vec<Vector2<f64>> = partners[0]
                    .iter()
                    .zip(partners[1].iter())
                    .map(|(x, y)| x * c + y * s)
                    .collect();
                consider(v);
            }
        }
        let (quality, v) = best.unwrap();
        if quality < 1e-10 {
            return Err(Error::IllConditioned(format!(
                "eigenfunction of eigenvalue {:.6} nearly vanishes on the grid \
                 (modulus ratio {quality:.3e})",
                self.eigenvalues[i]
            )));
        }
        let mut closed = v;
        closed.push(closed[0]);
        let total = total_turning(&closed).map_err(|step| {
            Error::IllConditioned(format!(
                "eigenfunction winding step {step:.3} exceeds pi/2; refine the grid"
            ))
        })?;
        let w2 = total / std::f64::consts::PI;
        let rounded = w2.round();
        if (w2 - rounded).abs() > 1e-6 {
            return Err(Error::Internal(format!(
                "non-integral doubled winding {w2:.6}"
            )));
        }
        Ok(rounded as i64)
    }

    /// Residual of the eigen-equation on a doubled grid.
    fn residual(&self, lp: &SymmetricLoop, i: usize) -> f64 {
        let n = self.grid.n;
        let fine = PeriodicGrid::new(2 * n + 1, self.grid.period);
        let vx: Vec<f64> = self.vectors[i].iter().map(|v| v[0]).collect();
        let vy: Vec<f64> = self.vectors[i].iter().map(|v| v[1]).collect();
        let vx_f: Vec<f64> = fine.nodes().iter().map(|&t| self.grid.interp(&vx, t)).collect();
        let vy_f: Vec<f64> = fine.nodes().iter().map(|&t| self.grid.interp(&vy, t)).collect();
        let d = fine.diff_matrix();
        let dvx = &d * DVector::from_vec(vx_f.clone());
        let dvy = &d * DVector::from_vec(vy_f.clone());
        let eta = self.eigenvalues[i];
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, &t) in fine.nodes().iter().enumerate() {
            let s = lp.eval(t.rem_euclid(1.0));
            let v = Vector2::new(vx_f[j], vy_f[j]);
            // -J0 v' = (v'_y, -v'_x)
            let r = Vector2::new(dvy[j], -dvx[j]) - s * v - eta * v;
            num += r.norm_squared();
            den += v.norm_squared();
        }
        (num / den.max(1e-300)).sqrt()
    }

    fn mode_record(&self, lp: &SymmetricLoop, i: usize, winding: Half) -> EigenModeRecord {
        let eigenfunction = self
            .vectors[i]
            .iter()
            .enumerate()
            .map(|(j, v)| (self.grid.node(j), v[0], v[1]))
            .collect();
        EigenModeRecord {
            eigenvalue: self.eigenvalues[i],
            winding,
            eigenfunction,
            residual: self.residual(lp, i),
        }
    }
}

/// Extracts `alpha` (largest winding among negative eigenvalues) and the
/// parity bit from a diagonalized problem. Windings here are doubled
/// integers so periodic (w) and boundary (w/2) cases share code.
fn alpha_and_parity(
    prob: &EigenProblem,
    opts: &SpectralOptions,
) -> Result<(i64, u8, f64)> {
    let gap = prob
        .eigenvalues
        .iter()
        .map(|e| e.abs())
        .fold(f64::INFINITY, f64::min);
    if gap < opts.gap_tol {
        return Err(Error::IllConditioned(format!(
            "spectral gap around zero is {gap:.3e}; the path is numerically \
             degenerate or the discretization too coarse"
        )));
    }
    // First index with eigenvalue >= -delta.
    let split = prob
        .eigenvalues
        .partition_point(|&e| e < -opts.delta);
    if split == 0 || split >= prob.eigenvalues.len() {
        return Err(Error::Internal(
            "discretized spectrum does not straddle zero".into(),
        ));
    }
    let w_neg = prob.winding_times_two(split - 1, opts.cluster_tol)?;
    let w_pos = prob.winding_times_two(split, opts.cluster_tol)?;
    let p = if w_pos == w_neg { 0 } else { 1 };
    Ok((w_neg, p, gap))
}

/// Conley-Zehnder index of the path generated by `lp` over `[0, k]`,
/// via the spectral formula `mu = 2 alpha + p`.
pub fn cz_index_spectral(lp: &SymmetricLoop, k: u32) -> Result<IndexReport> {
    cz_index_spectral_with(lp, k, &SpectralOptions::default())
}

pub fn cz_index_spectral_with(
    lp: &SymmetricLoop,
    k: u32,
    opts: &SpectralOptions,
) -> Result<IndexReport> {
    let path = path_from_loop(lp, k)?;
    let margin = path.periodic_margin();
    if margin < opts.degeneracy_tol {
        return Err(Error::Degenerate {
            kind: "path",
            detail: format!("det(Phi({k}) - Id) = {margin:.3e}"),
            margin,
        });
    }
    let prob = periodic_problem(lp, k, opts);
    let (w2, p, gap) = alpha_and_parity(&prob, opts)?;
    if w2 % 2 != 0 {
        return Err(Error::Internal(format!(
            "periodic eigenfunction has non-integer winding {}",
            Half(w2)
        )));
    }
    let alpha = Half(w2);
    let mu = w2 + p as i64;
    let mut residuals = BTreeMap::new();
    residuals.insert("degeneracy_margin".into(), margin);
    residuals.insert("spectral_gap".into(), gap);
    let report = IndexReport {
        mu_cz: Some(mu),
        mu_rs: None,
        alpha,
        p: Some(p),
        method: IndexMethod::Spectral,
        rotation_number: None,
        residuals,
    };
    report.check_consistency()?;
    Ok(report)
}

/// Robbin-Salamon index of the half-path `[0, k/2]` via `mu = 2 alpha + 1/2`.
///
/// Requires a symmetric loop (`symmetric_flag` set and the reflection
/// identity satisfied); the chord must be non-degenerate.
pub fn rs_index_spectral(lp: &SymmetricLoop, k: u32) -> Result<IndexReport> {
    rs_index_spectral_with(lp, k, &SpectralOptions::default())
}

pub fn rs_index_spectral_with(
    lp: &SymmetricLoop,
    k: u32,
    opts: &SpectralOptions,
) -> Result<IndexReport> {
    if !lp.symmetric_flag() {
        return Err(Error::InvalidInput(
            "boundary index requires a loop with the symmetric flag".into(),
        ));
    }
    let defect = lp.reflection_defect();
    if defect > super::types::REFLECTION_TOL {
        return Err(Error::InvalidInput(format!(
            "loop violates S(-t) = I S(t) I by {defect:.3e}"
        )));
    }
    let path = path_from_loop(lp, k)?;
    let margin = path.chord_margin()?;
    if margin < opts.chord_tol {
        return Err(Error::Degenerate {
            kind: "chord",
            detail: format!("angle(Phi({k}/2) R, R) = {margin:.3e} rad"),
            margin,
        });
    }
    let prob = boundary_problem(lp, k, opts)?;
    let (w2, _p, gap) = alpha_and_parity(&prob, opts)?;
    // The doubled eigenfunction winds an integral number of times around the
    // full circle; its relative winding on the half-interval is half that,
    // so the doubled relative winding is w2 / 2.
    if w2 % 2 != 0 {
        return Err(Error::Internal(format!(
            "doubled eigenfunction has half-integral circle winding {}",
            Half(w2)
        )));
    }
    let alpha = Half(w2 / 2);
    let mu = Half(alpha.0 * 2 + 1);
    let mut residuals = BTreeMap::new();
    residuals.insert("chord_margin".into(), margin);
    residuals.insert("spectral_gap".into(), gap);
    let report = IndexReport {
        mu_cz: None,
        mu_rs: Some(mu),
        alpha,
        p: None,
        method: IndexMethod::Spectral,
        rotation_number: None,
        residuals,
    };
    report.check_consistency()?;
    Ok(report)
}

/// Eigenmodes of the periodic (`boundary = false`) or boundary problem with
/// windings inside `winding_range`, sorted by eigenvalue.
///
/// The periodic problem carries exactly two eigenvalues per integer winding
/// (counted with multiplicity), the boundary problem exactly one per
/// half-integer; a violation after one refinement is an internal error.
pub fn winding_spectrum(
    lp: &SymmetricLoop,
    k: u32,
    winding_range: RangeInclusive<i64>,
    boundary: bool,
) -> Result<Vec<EigenModeRecord>> {
    winding_spectrum_with(lp, k, winding_range, boundary, &SpectralOptions::default())
}

pub fn winding_spectrum_with(
    lp: &SymmetricLoop,
    k: u32,
    winding_range: RangeInclusive<i64>,
    boundary: bool,
    opts: &SpectralOptions,
) -> Result<Vec<EigenModeRecord>> {
    let n = grid_size(opts, k);
    let bandwidth = (n / 8) as i64;
    if *winding_range.start() < -bandwidth || *winding_range.end() > bandwidth {
        return Err(Error::InvalidInput(format!(
            "winding range must lie within +/-{bandwidth} at this resolution"
        )));
    }
    match collect_modes(lp, k, &winding_range, boundary, opts) {
        Ok(records) => Ok(records),
        Err(Error::Internal(first)) => {
            // one refinement pass before declaring an internal inconsistency
            let refined = SpectralOptions {
                n_modes: opts.n_modes * 2,
                ..opts.clone()
            };
            collect_modes(lp, k, &winding_range, boundary, &refined).map_err(|e| {
                Error::Internal(format!("winding count violation persists: {first}; {e}"))
            })
        }
        Err(e) => Err(e),
    }
}

fn collect_modes(
    lp: &SymmetricLoop,
    k: u32,
    winding_range: &RangeInclusive<i64>,
    boundary: bool,
    opts: &SpectralOptions,
) -> Result<Vec<EigenModeRecord>> {
    let prob = if boundary {
        boundary_problem(lp, k, opts)?
    } else {
        periodic_problem(lp, k, opts)
    };
    // Doubled-winding bounds: periodic windings w are integers (doubled 2w);
    // boundary relative windings are halves of full-circle windings.
    let lo = 2 * *winding_range.start();
    let hi = 2 * *winding_range.end();

    let m = prob.eigenvalues.len();
    let mid = prob.eigenvalues.partition_point(|&e| e < 0.0);
    let mut selected: Vec<(usize, i64)> = Vec::new();
    // March outward from the zero gap in both directions until windings
    // leave the requested range; windings are monotone in the eigenvalue.
    let mut idx = mid as isize - 1;
    while idx >= 0 {
        let w2full = prob.winding_times_two(idx as usize, opts.cluster_tol)?;
        let w2 = if boundary { w2full / 2 } else { w2full };
        if w2 < lo {
            break;
        }
        if w2 <= hi {
            selected.push((idx as usize, w2));
        }
        idx -= 1;
    }
    let mut idx = mid;
    while idx < m {
        let w2full = prob.winding_times_two(idx, opts.cluster_tol)?;
        let w2 = if boundary { w2full / 2 } else { w2full };
        if w2 > hi {
            break;
        }
        if w2 >= lo {
            selected.push((idx, w2));
        }
        idx += 1;
    }
    selected.sort_by(|a, b| prob.eigenvalues[a.0].total_cmp(&prob.eigenvalues[b.0]));

    // Count per winding: 2 for periodic, 1 per half-integer for boundary.
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for &(_, w2) in &selected {
        *counts.entry(w2).or_insert(0) += 1;
    }
    // Boundary windings fill the half-integer lattice (all doubled values);
    // periodic windings are integers (even doubled values only).
    let expected = if boundary { 1 } else { 2 };
    let step = if boundary { 1 } else { 2 };
    let mut w2 = lo;
    while w2 <= hi {
        let got = counts.get(&w2).copied().unwrap_or(0);
        if got != expected {
            return Err(Error::Internal(format!(
                "winding {} carries {got} eigenvalues, expected {expected}",
                Half(w2)
            )));
        }
        w2 += step;
    }

    // Monotonicity check along the selection.
    for pair in selected.windows(2) {
        if pair[1].1 < pair[0].1 {
            return Err(Error::Internal(
                "windings are not monotone in the eigenvalue".into(),
            ));
        }
    }

    Ok(selected
        .iter()
        .map(|&(i, w2)| prob.mode_record(lp, i, Half(w2)))
        .collect())
}
