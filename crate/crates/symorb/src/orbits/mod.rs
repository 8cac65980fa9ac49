//! Symmetric periodic orbit search by chord shooting between fixed-point
//! sets, closing-up by reflection, and symmetry classification.
//!
//! A chord runs from the fixed set of one anti-symplectic involution to the
//! fixed set of another (possibly the same). Reflecting it through the
//! dihedral group generated by the two involutions closes it into a periodic
//! orbit: if the composition of the two involutions has order `m`, the orbit
//! consists of `2m` reflected copies of the chord. The half-chord case is
//! `m = 1`; the doubly-symmetric quarter-chord case is `m = 2`; the
//! triangular-symmetry case closes after six copies.

mod linking;

pub use linking::{
    linking_number, linking_of_curves, predicate_report, self_linking, PredicateReport,
    SelfLinking,
};

use crate::error::{Error, Result};
use crate::flow::{
    build_frame, integrate, integrate_variational, transverse_path, Integrator, OdeSystem,
    Trajectory, TrivializationFrame,
};
use crate::sympath::{
    cz_index_rotation, cz_index_spectral, rs_index_crossing, rs_index_spectral, IndexReport,
};
use crate::systems::{Involution, InvolutionKind, SystemModel, SystemName};
use nalgebra::{Matrix4, Vector2, Vector4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Which fraction of the full period the shot chord represents.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChordFraction {
    /// Start and end on the same fixed set: the chord is half the orbit.
    Half,
    /// Start and end on different fixed sets: the chord is a quarter of the
    /// orbit when the two involutions commute (their composition has order
    /// two), and `1/(2m)` of it in general.
    Quarter,
}

/// Specification of a chord shooting problem.
#[derive(Debug, Clone)]
pub struct ChordSpec {
    pub start_label: String,
    pub end_label: String,
    pub energy: f64,
    /// Starting point on `Fix(start)` and on the energy level.
    pub seed: Vector4<f64>,
    pub time_guess: f64,
    pub fraction: ChordFraction,
}

impl ChordSpec {
    pub fn validate(&self, model: &SystemModel) -> Result<()> {
        let start = model.involution(&self.start_label)?;
        if (model.hamiltonian(&self.seed) - self.energy).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "seed is off the energy level by {:.3e}",
                (model.hamiltonian(&self.seed) - self.energy).abs()
            )));
        }
        if (start.apply(&self.seed) - self.seed).norm() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "seed is not fixed by '{}' (defect {:.3e})",
                self.start_label,
                (start.apply(&self.seed) - self.seed).norm()
            )));
        }
        let end = model.involution(&self.end_label)?;
        let same = (start.matrix - end.matrix).norm() < 1e-14;
        match self.fraction {
            ChordFraction::Half if !same => Err(Error::InvalidInput(
                "half chords need identical start and end involutions".into(),
            )),
            ChordFraction::Quarter if same => Err(Error::InvalidInput(
                "quarter chords need distinct start and end involutions".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Symmetry classification of a periodic orbit.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryType {
    Symmetric,
    DoublySymmetric,
    TypeI,
    TypeII,
    Nonsymmetric,
}

/// A found periodic orbit with its residuals and classification.
#[derive(Debug, Clone)]
pub struct OrbitRecord {
    pub trajectory: Trajectory,
    pub period: f64,
    /// Labels of involutions/cyclic symmetries whose reflection or shift
    /// maps the trace to itself within tolerance.
    pub symmetry: Vec<String>,
    pub sym_type: SymmetryType,
    /// `|x(T) - x(0)|` from direct integration over the full period.
    pub closure_residual: f64,
    /// Maximal deviation between the reflection-assembled orbit and the
    /// directly integrated one.
    pub reflection_defect: f64,
    pub covering_number: u32,
    /// chord data: flight time and involution labels
    pub chord_time: f64,
    pub chord_labels: (String, String),
    /// index reports keyed by "<frame>/<method>"
    pub indices: BTreeMap<String, IndexReport>,
}

/// Tunable shooting parameters.
#[derive(Debug, Clone)]
pub struct ShootOptions {
    pub integrator: Integrator,
    pub max_newton: usize,
    /// Convergence threshold on the endpoint residual.
    pub residual_tol: f64,
    /// Samples per chord arc in the assembled orbit.
    pub samples_per_arc: usize,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            integrator: Integrator::default(),
            max_newton: 50,
            residual_tol: 1e-11,
            samples_per_arc: 256,
        }
    }
}

/// Orthonormal basis of the -1 eigenspace of an involution: the coordinates
/// measuring the distance from its fixed plane.
fn normal_basis(inv: &Involution) -> [Vector4<f64>; 2] {
    let proj = (Matrix4::identity() - inv.matrix) * 0.5;
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
    assert_eq!(basis.len(), 2, "involution fixed plane is not 2-dimensional");
    [basis[0], basis[1]]
}

/// Walks along the curve `Fix(start) cap {H = c}`: moves `ds` in the
/// in-plane level-tangent direction, then re-projects onto the level within
/// the fixed plane.
fn walk_fixed_curve(
    model: &SystemModel,
    inv: &Involution,
    from: &Vector4<f64>,
    ds: f64,
    energy: f64,
) -> Result<Vector4<f64>> {
    let [b1, b2] = inv.fixed_basis;
    let g = model.gradient(from);
    let gp = Vector2::new(g.dot(&b1), g.dot(&b2));
    if gp.norm() < 1e-10 {
        return Err(Error::Geometry(
            "level is tangent to the fixed plane; cannot walk the seed curve".into(),
        ));
    }
    let tangent = (b1 * (-gp[1]) + b2 * gp[0]) / gp.norm();
    let mut p = from + tangent * ds;
    // project back to the level, moving within the fixed plane
    for _ in 0..50 {
        let h = model.hamiltonian(&p) - energy;
        if h.abs() < 1e-13 {
            return Ok(p);
        }
        let g = model.gradient(&p);
        let gp = b1 * g.dot(&b1) + b2 * g.dot(&b2);
        let n2 = gp.norm_squared();
        if n2 < 1e-20 {
            break;
        }
        p -= gp * (h / n2);
    }
    Err(Error::Geometry(
        "level projection within the fixed plane did not converge".into(),
    ))
}

/// Result of one Newton-refined chord.
struct Chord {
    start: Vector4<f64>,
    flight_time: f64,
    endpoint_residual: f64,
}

/// Variational propagation helper: state + monodromy to time tau.
fn propagate_with_monodromy(
    model: &SystemModel,
    z0: &Vector4<f64>,
    tau: f64,
    integ: &Integrator,
) -> Result<(Vector4<f64>, Matrix4<f64>)> {
    struct Var20<'a> {
        model: &'a SystemModel,
    }
    impl OdeSystem<20> for Var20<'_> {
        fn rhs(&self, _t: f64, y: &[f64; 20]) -> Result<[f64; 20]> {
            let z = Vector4::from_column_slice(&y[0..4]);
            let x = self.model.vector_field(&z)?;
            let a = self.model.field_jacobian(&z)?;
            let mut out = [0.0; 20];
            out[..4].copy_from_slice(x.as_slice());
            for col in 0..4 {
                let m_col = Vector4::new(
                    y[4 + 4 * col],
                    y[5 + 4 * col],
                    y[6 + 4 * col],
                    y[7 + 4 * col],
                );
                let d = a * m_col;
                out[4 + 4 * col..8 + 4 * col].copy_from_slice(d.as_slice());
            }
            Ok(out)
        }
    }
    let mut y0 = [0.0; 20];
    y0[..4].copy_from_slice(z0.as_slice());
    for i in 0..4 {
        y0[4 + 5 * i] = 1.0;
    }
    let y1 = integ.propagate(&Var20 { model }, 0.0, &y0, tau)?;
    Ok((
        Vector4::from_column_slice(&y1[0..4]),
        Matrix4::from_column_slice(&y1[4..20]),
    ))
}

/// Newton iteration on (position along the start curve, flight time).
fn refine_chord(
    model: &SystemModel,
    spec: &ChordSpec,
    opts: &ShootOptions,
) -> Result<Chord> {
    let start = model.involution(&spec.start_label)?.clone();
    let end = model.involution(&spec.end_label)?.clone();
    let normals = normal_basis(&end);
    let mut p = spec.seed;
    let mut tau = spec.time_guess;
    let mut res_norm = f64::INFINITY;
    for _ in 0..opts.max_newton {
        let (xt, mono) = propagate_with_monodromy(model, &p, tau, &opts.integrator)?;
        let r = Vector2::new(normals[0].dot(&xt), normals[1].dot(&xt));
        res_norm = r.norm();
        if res_norm < opts.residual_tol {
            return Ok(Chord {
                start: p,
                flight_time: tau,
                endpoint_residual: res_norm,
            });
        }
        // tangent of the seed curve at p
        let [b1, b2] = start.fixed_basis;
        let g = model.gradient(&p);
        let gp = Vector2::new(g.dot(&b1), g.dot(&b2));
        let tangent = (b1 * (-gp[1]) + b2 * gp[0]) / gp.norm();
        let flow = model.vector_field(&xt)?;
        let jac = nalgebra::Matrix2::new(
            normals[0].dot(&(mono * tangent)),
            normals[0].dot(&flow),
            normals[1].dot(&(mono * tangent)),
            normals[1].dot(&flow),
        );
        let delta = jac.lu().solve(&r).ok_or_else(|| {
            Error::SearchFailed("singular shooting Jacobian".into())
        })?;
        // damped update with backtracking on the residual norm
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let ds = -lambda * delta[0];
            let dtau = -lambda * delta[1];
            let tau_new = tau + dtau;
            if tau_new <= 1e-6 {
                lambda *= 0.5;
                continue;
            }
            match walk_fixed_curve(model, &start, &p, ds, spec.energy) {
                Ok(p_new) => {
                    let ok = (|| -> Result<bool> {
                        let (xt2, _) =
                            propagate_with_monodromy(model, &p_new, tau_new, &opts.integrator)?;
                        let r2 = Vector2::new(normals[0].dot(&xt2), normals[1].dot(&xt2));
                        Ok(r2.norm() < res_norm * (1.0 - 0.25 * lambda))
                    })();
                    if let Ok(true) = ok {
                        p = p_new;
                        tau = tau_new;
                        accepted = true;
                        break;
                    }
                }
                Err(_) => {}
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::SearchFailed(format!(
                "Newton stagnated at residual {res_norm:.3e}"
            )));
        }
    }
    Err(Error::SearchFailed(format!(
        "no convergence after {} Newton iterations (residual {res_norm:.3e})",
        opts.max_newton
    )))
}

/// Order of the composition `R_end R_start` as a matrix (at most 12).
fn composition_order(start: &Involution, end: &Involution) -> Result<u32> {
    let g = end.matrix * start.matrix;
    let mut pow = Matrix4::identity();
    for m in 1..=12u32 {
        pow = g * pow;
        if (pow - Matrix4::identity()).norm() < 1e-9 {
            return Ok(m);
        }
    }
    Err(Error::InvalidInput(
        "involution composition has order exceeding 12; cannot close the orbit".into(),
    ))
}

/// Assembles the closed orbit from the chord by dihedral reflection:
/// `x(2 j tau + s) = G^j c(s)`, `x((2 j + 1) tau + s) = G^j R_end c(tau - s)`
/// with `G = R_end R_start`.
fn assemble_orbit(
    chord_states: &[Vector4<f64>],
    start: &Involution,
    end: &Involution,
    m: u32,
) -> Vec<Vector4<f64>> {
    let g = end.matrix * start.matrix;
    let spu = chord_states.len() - 1;
    let mut out = Vec::with_capacity(2 * m as usize * spu + 1);
    let mut gj = Matrix4::identity();
    for _ in 0..m {
        for s in 0..spu {
            out.push(gj * chord_states[s]);
        }
        let gr = gj * end.matrix;
        for s in 0..spu {
            out.push(gr * chord_states[spu - s]);
        }
        gj = g * gj;
    }
    out.push(out[0]);
    out
}

/// Searches the reflected trace for the shift best aligning `R x(t)` with
/// `x(shift - t)`; returns the deviation at the best shift.
fn reflection_alignment(states: &[Vector4<f64>], r: &Matrix4<f64>) -> f64 {
    let n = states.len() - 1;
    let reflected: Vec<Vector4<f64>> = states[..n].iter().map(|x| r * x).collect();
    let stride = (n / 256).max(1);
    let mut best = (f64::INFINITY, 0usize);
    let mut shift = 0;
    while shift < n {
        let dev = alignment_dev(&reflected, states, n, shift, 16);
        if dev < best.0 {
            best = (dev, shift);
        }
        shift += stride;
    }
    // local refinement around the best coarse shift
    let lo = best.1.saturating_sub(stride);
    for s in lo..=best.1 + stride {
        let dev = alignment_dev(&reflected, states, n, s % n, 1);
        if dev < best.0 {
            best = (dev, s % n);
        }
    }
    alignment_dev(&reflected, states, n, best.1, 1)
}

fn alignment_dev(
    reflected: &[Vector4<f64>],
    states: &[Vector4<f64>],
    n: usize,
    shift: usize,
    sample_stride: usize,
) -> f64 {
    let mut dev: f64 = 0.0;
    let mut i = 0;
    while i < n {
        let j = (shift + n - i % n) % n;
        dev = dev.max((reflected[i] - states[j]).norm());
        i += sample_stride;
    }
    dev
}

/// Same for a shift symmetry: `S x(t) = x(t + shift)`.
fn shift_alignment(states: &[Vector4<f64>], s_mat: &Matrix4<f64>) -> f64 {
    let n = states.len() - 1;
    let mapped: Vec<Vector4<f64>> = states[..n].iter().map(|x| s_mat * x).collect();
    let stride = (n / 256).max(1);
    let mut best = (f64::INFINITY, 0usize);
    let mut shift = 0;
    while shift < n {
        let mut dev: f64 = 0.0;
        let mut i = 0;
        while i < n {
            dev = dev.max((mapped[i] - states[(i + shift) % n]).norm());
            i += 16;
        }
        if dev < best.0 {
            best = (dev, shift);
        }
        shift += stride;
    }
    let lo = best.1.saturating_sub(stride);
    let mut final_best = f64::INFINITY;
    for s in lo..=best.1 + stride {
        let mut dev: f64 = 0.0;
        for i in 0..n {
            dev = dev.max((mapped[i] - states[(i + s % n) % n]).norm());
        }
        final_best = final_best.min(dev);
    }
    final_best
}

/// Shoots a single chord from the given spec and closes it into an orbit.
pub fn shoot_chord(
    model: &SystemModel,
    spec: &ChordSpec,
    opts: &ShootOptions,
) -> Result<OrbitRecord> {
    spec.validate(model)?;
    let start = model.involution(&spec.start_label)?.clone();
    let end = model.involution(&spec.end_label)?.clone();
    if start.kind != InvolutionKind::AntiSymplectic || end.kind != InvolutionKind::AntiSymplectic {
        return Err(Error::InvalidInput(
            "chord shooting needs anti-symplectic involutions".into(),
        ));
    }
    let chord = refine_chord(model, spec, opts)?;
    let m = composition_order(&start, &end)?;
    let period = 2.0 * m as f64 * chord.flight_time;

    // sample the chord and assemble by reflection
    let chord_traj = integrate(
        model,
        &chord.start,
        chord.flight_time,
        opts.samples_per_arc,
        &opts.integrator,
    )?;
    let assembled = assemble_orbit(&chord_traj.states, &start, &end, m);

    // direct integration over the full period as the honest cross-check
    let n_total = 2 * m as usize * opts.samples_per_arc;
    let direct = integrate(model, &chord.start, period, n_total, &opts.integrator)?;
    let closure_residual = (direct.end() - direct.start()).norm();
    let reflection_defect = assembled
        .iter()
        .zip(direct.states.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);

    // covering number: largest k with x(T/k) back at the start
    let mut covering_number = 1;
    for k in (2..=12u32).rev() {
        let xk = opts
            .integrator
            .propagate_state(model, &chord.start, period / k as f64)?;
        if (xk - chord.start).norm() < 1e-8 {
            covering_number = k;
            break;
        }
    }

    // symmetry detection over the model's base involutions and cyclic map
    let mut symmetry = Vec::new();
    for inv in model.involutions() {
        if inv.chart != crate::systems::Chart::Base {
            continue;
        }
        if reflection_alignment(&direct.states, &inv.matrix) < 1e-6 {
            symmetry.push(inv.label.clone());
        }
    }
    if let Some(cyc) = model.cyclic_symmetry() {
        if shift_alignment(&direct.states, &cyc.matrix) < 1e-6 {
            symmetry.push(cyc.label.clone());
        }
    }

    let mut record = OrbitRecord {
        trajectory: direct,
        period,
        symmetry,
        sym_type: SymmetryType::Nonsymmetric,
        closure_residual,
        reflection_defect,
        covering_number,
        chord_time: chord.flight_time,
        chord_labels: (spec.start_label.clone(), spec.end_label.clone()),
        indices: BTreeMap::new(),
    };
    let _ = chord.endpoint_residual;
    classify_symmetry(&mut record, model)?;
    Ok(record)
}

/// Assigns the symmetry type.
///
/// On the rotating Kepler charts a reflection-symmetric orbit is of type I
/// when its half-chord endpoints project to opposite sides of the primary
/// on the symmetry axis, and of type II otherwise; endpoints within `1e-9`
/// of the axis origin are ambiguous.
pub fn classify_symmetry(record: &mut OrbitRecord, model: &SystemModel) -> Result<()> {
    let n_anti = record
        .symmetry
        .iter()
        .filter(|l| {
            model
                .involutions()
                .iter()
                .any(|i| &i.label == *l && i.kind == InvolutionKind::AntiSymplectic)
        })
        .count();
    record.sym_type = if n_anti == 0 {
        SymmetryType::Nonsymmetric
    } else if model.name == SystemName::Pcr3bp {
        // endpoints of the reflection half-chord: start point and the point
        // after half a period
        let x0 = record.trajectory.start();
        let mid = record.trajectory.states[record.trajectory.len() / 2];
        let (a, b) = (x0[0], mid[0]); // q1 coordinates
        if a.abs() < 1e-9 || b.abs() < 1e-9 {
            return Err(Error::Geometry(
                "chord endpoint within 1e-9 of the axis junction; type undecidable".into(),
            ));
        }
        if a * b < 0.0 {
            SymmetryType::TypeI
        } else {
            SymmetryType::TypeII
        }
    } else if n_anti >= 2 {
        SymmetryType::DoublySymmetric
    } else {
        SymmetryType::Symmetric
    };
    Ok(())
}

impl Integrator {
    /// State-only propagation of a model flow.
    pub fn propagate_state(
        &self,
        model: &SystemModel,
        z0: &Vector4<f64>,
        t: f64,
    ) -> Result<Vector4<f64>> {
        struct Flow4<'a> {
            model: &'a SystemModel,
        }
        impl OdeSystem<4> for Flow4<'_> {
            fn rhs(&self, _t: f64, y: &[f64; 4]) -> Result<[f64; 4]> {
                let z = Vector4::from_column_slice(y);
                let x = self.model.vector_field(&z)?;
                Ok([x[0], x[1], x[2], x[3]])
            }
        }
        let y0 = [z0[0], z0[1], z0[2], z0[3]];
        let y = self.propagate(&Flow4 { model }, 0.0, &y0, t)?;
        Ok(Vector4::from_column_slice(&y))
    }
}

/// Multistart shooting: seeds walk the fixed curve from the spec's seed in
/// both directions; distinct converged orbits are merged by trace distance.
pub fn multistart_shoot(
    model: &SystemModel,
    base: &ChordSpec,
    n_seeds: usize,
    arc_step: f64,
    time_guesses: &[f64],
    opts: &ShootOptions,
) -> Result<Vec<OrbitRecord>> {
    let start = model.involution(&base.start_label)?.clone();
    // build the seed list deterministically
    let mut seeds = vec![base.seed];
    let mut fwd = base.seed;
    let mut bwd = base.seed;
    for _ in 0..n_seeds / 2 {
        if let Ok(p) = walk_fixed_curve(model, &start, &fwd, arc_step, base.energy) {
            seeds.push(p);
            fwd = p;
        }
        if let Ok(p) = walk_fixed_curve(model, &start, &bwd, -arc_step, base.energy) {
            seeds.push(p);
            bwd = p;
        }
    }
    let specs: Vec<ChordSpec> = seeds
        .iter()
        .flat_map(|s| {
            time_guesses.iter().map(|&tg| ChordSpec {
                seed: *s,
                time_guess: tg,
                ..base.clone()
            })
        })
        .collect();
    let results: Vec<Option<OrbitRecord>> = specs
        .par_iter()
        .map(|spec| shoot_chord(model, spec, opts).ok())
        .collect();
    // deterministic single-threaded de-duplication in input order
    let mut orbits: Vec<OrbitRecord> = Vec::new();
    for rec in results.into_iter().flatten() {
        let duplicate = orbits.iter().any(|o| trace_distance(o, &rec) < 1e-6);
        if !duplicate {
            orbits.push(rec);
        }
    }
    Ok(orbits)
}

/// Symmetric Hausdorff-type distance between decimated orbit traces.
fn trace_distance(a: &OrbitRecord, b: &OrbitRecord) -> f64 {
    let da: Vec<&Vector4<f64>> = a.trajectory.states.iter().step_by(8).collect();
    let db: Vec<&Vector4<f64>> = b.trajectory.states.iter().step_by(8).collect();
    let one_way = |xs: &[&Vector4<f64>], ys: &[&Vector4<f64>]| -> f64 {
        xs.iter()
            .map(|x| {
                ys.iter()
                    .map(|y| (*x - *y).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    one_way(&da, &db).max(one_way(&db, &da))
}

/// Computes the four index reports for an orbit's k-th cover and stores them
/// on the record, keyed `<frame>/<method>`.
///
/// The trajectory is re-sampled over `k` periods, the global (and, when the
/// orbit starts on the fixed set of `sym_label`, symmetric) frame is built,
/// and all engines run on the resulting transverse path.
pub fn attach_indices(
    model: &SystemModel,
    record: &mut OrbitRecord,
    k: u32,
    sym_label: Option<&str>,
    integ: &Integrator,
) -> Result<()> {
    let spu = 512usize;
    let traj = integrate(
        model,
        &record.trajectory.start(),
        record.period * k as f64,
        spu * k as usize,
        integ,
    )?;
    let mono = integrate_variational(model, &traj, integ)?;

    let mut frames: Vec<(String, TrivializationFrame)> = Vec::new();
    frames.push((
        "global".into(),
        build_frame(model, &traj, false, None)?,
    ));
    if let Some(label) = sym_label {
        let inv = model.involution(label)?;
        frames.push((
            "symmetric".into(),
            build_frame(model, &traj, true, Some(inv))?,
        ));
    }

    for (frame_name, frame) in frames {
        let path = transverse_path(model, &traj, &mono, &frame, k)?;
        match cz_index_rotation(&path) {
            Ok(rep) => {
                record.indices.insert(format!("{frame_name}/cz_rotation"), rep);
            }
            Err(e) => {
                return Err(e);
            }
        }
        if let Some(lp) = path.generator() {
            let rep = cz_index_spectral(lp, k)?;
            record.indices.insert(format!("{frame_name}/cz_spectral"), rep);
            if lp.symmetric_flag() {
                let rep = rs_index_spectral(lp, k)?;
                record.indices.insert(format!("{frame_name}/rs_spectral"), rep);
                let rep = rs_index_crossing(&path)?;
                record.indices.insert(format!("{frame_name}/rs_crossing"), rep);
            }
        }
    }
    Ok(())
}

/// Serializable snapshot of an orbit record (decimated trace).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbitRecordJson {
    pub schema_version: u32,
    pub system: String,
    pub period: f64,
    pub initial_point: [f64; 4],
    pub symmetry: Vec<String>,
    pub sym_type: SymmetryType,
    pub closure_residual: f64,
    pub reflection_defect: f64,
    pub covering_number: u32,
    pub chord_time: f64,
    pub chord_labels: (String, String),
    pub energy_drift: f64,
    pub trace: Vec<[f64; 4]>,
    pub indices: BTreeMap<String, serde_json::Value>,
}

impl OrbitRecord {
    pub fn to_json(&self, model: &SystemModel) -> OrbitRecordJson {
        let stride = (self.trajectory.len() / 128).max(1);
        let z0 = self.trajectory.start();
        OrbitRecordJson {
            schema_version: 1,
            system: model.name.as_str().to_string(),
            period: self.period,
            initial_point: [z0[0], z0[1], z0[2], z0[3]],
            symmetry: self.symmetry.clone(),
            sym_type: self.sym_type,
            closure_residual: self.closure_residual,
            reflection_defect: self.reflection_defect,
            covering_number: self.covering_number,
            chord_time: self.chord_time,
            chord_labels: self.chord_labels.clone(),
            energy_drift: self.trajectory.energy_drift,
            trace: self
                .trajectory
                .states
                .iter()
                .step_by(stride)
                .map(|z| [z[0], z[1], z[2], z[3]])
                .collect(),
            indices: self
                .indices
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::to_value(v).unwrap()))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests;
