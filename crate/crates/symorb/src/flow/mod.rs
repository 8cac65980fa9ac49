//! Trajectory and variational-equation integration, contact-plane frames,
//! and transverse symplectic paths along orbits.
//!
//! Orbits of the catalog systems live on star-shaped energy levels in R^4,
//! where the contact plane at `x` is
//! `xi_x = ker(lambda0) cap ker(dH) = {v : <J4 x, v> = 0, <grad H, v> = 0}`.
//! The global reference frame of `xi` is the radial projection of the
//! quaternion pair `(j x, k x)`, normalized to unit symplectic area; on the
//! round sphere it is exactly the quaternion frame. Transverse symplectic
//! paths are obtained by expressing the variational flow in this frame,
//! projecting along the flow direction and the level normal; reparameterizing
//! time (Hamiltonian versus Reeb speed) drops out of the projection.

mod dopri5;

pub use dopri5::{EventDirection, EventHit, Integrator, OdeSystem};

use crate::error::{Error, Result};
use crate::linalg::{quat_j, quat_k, unwrap_angle};
use crate::sympath::{generator_from_path, SymplecticPath};
use crate::systems::SystemModel;
use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};

/// A sampled solution of the Hamiltonian flow on a fixed energy level.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vector4<f64>>,
    pub energy_drift: f64,
    pub model: SystemModel,
}

impl Trajectory {
    pub fn start(&self) -> Vector4<f64> {
        self.states[0]
    }

    pub fn end(&self) -> Vector4<f64> {
        *self.states.last().unwrap()
    }

    pub fn duration(&self) -> f64 {
        self.times.last().unwrap() - self.times[0]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Solutions of the variational equation along a trajectory.
#[derive(Debug, Clone)]
pub struct MonodromyPath {
    pub times: Vec<f64>,
    pub matrices: Vec<Matrix4<f64>>,
    /// Maximal deviation of `M^T J4 M - J4` over the samples.
    pub symplectic_drift: f64,
}

/// A frame of the contact plane field along a trajectory.
#[derive(Debug, Clone)]
pub struct TrivializationFrame {
    pub times: Vec<f64>,
    pub e1: Vec<Vector4<f64>>,
    pub e2: Vec<Vector4<f64>>,
    pub symmetric_flag: bool,
    /// Winding of this frame relative to the global reference frame along
    /// the same trajectory.
    pub winding_offset: i64,
}

/// Adapter: the Hamiltonian flow as a 4-dimensional ODE.
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

/// Adapter: state plus variational matrix as a 20-dimensional ODE.
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
        // column-major monodromy storage
        for col in 0..4 {
            let m_col = Vector4::new(y[4 + 4 * col], y[5 + 4 * col], y[6 + 4 * col], y[7 + 4 * col]);
            let d = a * m_col;
            out[4 + 4 * col..8 + 4 * col].copy_from_slice(d.as_slice());
        }
        Ok(out)
    }
}

/// Integrates the model flow from `z0` over `[0, t_final]`, sampled at
/// `n_out + 1` uniform times.
pub fn integrate(
    model: &SystemModel,
    z0: &Vector4<f64>,
    t_final: f64,
    n_out: usize,
    integ: &Integrator,
) -> Result<Trajectory> {
    model.check_regular(z0)?;
    let sys = Flow4 { model };
    let times: Vec<f64> = (0..=n_out)
        .map(|i| t_final * i as f64 / n_out.max(1) as f64)
        .collect();
    let mut states = Vec::with_capacity(times.len());
    if t_final == 0.0 {
        return Ok(Trajectory {
            times: vec![0.0],
            states: vec![*z0],
            energy_drift: 0.0,
            model: model.clone(),
        });
    }
    let y0 = [z0[0], z0[1], z0[2], z0[3]];
    integ.sample(&sys, 0.0, &y0, &times, |_t, y| {
        states.push(Vector4::from_column_slice(y));
    })?;
    let h0 = model.hamiltonian(z0);
    let energy_drift = states
        .iter()
        .map(|z| (model.hamiltonian(z) - h0).abs())
        .fold(0.0, f64::max);
    Ok(Trajectory {
        times,
        states,
        energy_drift,
        model: model.clone(),
    })
}

/// Integrates the variational equation along an existing trajectory,
/// producing the monodromy at each trajectory sample.
pub fn integrate_variational(
    model: &SystemModel,
    traj: &Trajectory,
    integ: &Integrator,
) -> Result<MonodromyPath> {
    let sys = Var20 { model };
    let z0 = traj.start();
    let mut y0 = [0.0; 20];
    y0[..4].copy_from_slice(z0.as_slice());
    for i in 0..4 {
        y0[4 + 5 * i] = 1.0; // identity in column-major slots
    }
    let mut matrices = Vec::with_capacity(traj.len());
    let mut state_dev: f64 = 0.0;
    let mut idx = 0usize;
    integ.sample(&sys, 0.0, &y0, &traj.times, |_t, y| {
        let m = Matrix4::from_column_slice(&y[4..20]);
        matrices.push(m);
        let z = Vector4::from_column_slice(&y[0..4]);
        state_dev = state_dev.max((z - traj.states[idx.min(traj.len() - 1)]).norm());
        idx += 1;
    })?;
    if state_dev > 1e-7 {
        return Err(Error::IllConditioned(format!(
            "variational re-integration deviates from the trajectory by {state_dev:.3e}"
        )));
    }
    let j = crate::linalg::j4();
    let symplectic_drift = matrices
        .iter()
        .map(|m| (m.transpose() * j * m - j).norm())
        .fold(0.0, f64::max);
    if symplectic_drift > 1e-6 {
        return Err(Error::IllConditioned(format!(
            "monodromy symplecticity drift {symplectic_drift:.3e}; tighten tolerances"
        )));
    }
    Ok(MonodromyPath {
        times: traj.times.clone(),
        matrices,
        symplectic_drift,
    })
}

/// The global contact frame at a level point: radial projection of the
/// quaternion pair `(j x, k x)`, scaled to unit symplectic area.
///
/// Fails where the level is not transverse to the radial direction or the
/// projected pair degenerates.
pub fn global_frame_at(model: &SystemModel, x: &Vector4<f64>) -> Result<(Vector4<f64>, Vector4<f64>)> {
    let grad = model.gradient(x);
    let radial = grad.dot(x);
    if radial.abs() < 1e-10 {
        return Err(Error::Geometry(
            "level tangent to the radial direction; no frame here".into(),
        ));
    }
    let project = |v: Vector4<f64>| -> Vector4<f64> { v - x * (grad.dot(&v) / radial) };
    let f1 = project(quat_j(x));
    let f2 = project(quat_k(x));
    let area = crate::linalg::omega4(&f1, &f2);
    if area < 1e-8 {
        return Err(Error::Geometry(format!(
            "projected quaternion frame degenerates (area {area:.3e})"
        )));
    }
    let s = 1.0 / area.sqrt();
    Ok((f1 * s, f2 * s))
}

/// Builds a trivialization frame along a closed trajectory.
///
/// With `symmetric = false` this is the global frame sampled along the
/// orbit. With `symmetric = true` the supplied involution must fix the
/// trajectory's start point; the global frame is then corrected by the
/// minimal pointwise rotation that enforces the mirror relation
/// `D rho e1(t) = e1(-t)`, `D rho e2(t) = -e2(-t)` at mirrored times.
pub fn build_frame(
    model: &SystemModel,
    traj: &Trajectory,
    symmetric: bool,
    involution: Option<&crate::systems::Involution>,
) -> Result<TrivializationFrame> {
    let n = traj.len() - 1; // closed orbit: last sample repeats the first
    let mut e1 = Vec::with_capacity(traj.len());
    let mut e2 = Vec::with_capacity(traj.len());
    for x in &traj.states {
        let (f1, f2) = global_frame_at(model, x)?;
        e1.push(f1);
        e2.push(f2);
    }
    if !symmetric {
        return Ok(TrivializationFrame {
            times: traj.times.clone(),
            e1,
            e2,
            symmetric_flag: false,
            winding_offset: 0,
        });
    }
    let inv = involution.ok_or_else(|| {
        Error::InvalidInput("symmetric frame needs the defining involution".into())
    })?;
    let x0 = traj.start();
    if (inv.apply(&x0) - x0).norm() > 1e-8 {
        return Err(Error::InvalidInput(format!(
            "trajectory start is not fixed by '{}' (defect {:.3e})",
            inv.label,
            (inv.apply(&x0) - x0).norm()
        )));
    }

    // Defect angle beta(t): coordinates of D rho e1(t) in the frame at the
    // mirrored sample x(-t) = x(T - t).
    let coords = |v: &Vector4<f64>, i: usize| -> Vector2<f64> {
        let a = crate::linalg::omega4(v, &e2[i]);
        let b = -crate::linalg::omega4(v, &e1[i]);
        Vector2::new(a, b)
    };
    let mut beta = Vec::with_capacity(n + 1);
    let mut prev = 0.0;
    for i in 0..=n {
        let mirror = (n - i) % n;
        let d = inv.matrix * e1[i];
        let c = coords(&d, if i == 0 { 0 } else { mirror });
        let raw = c[1].atan2(c[0]);
        let b = if i == 0 { raw } else { unwrap_angle(prev, raw) };
        beta.push(b);
        prev = b;
    }
    // beta is even and periodic up to 2 pi w; gamma(t) = beta/2 - pi w t
    // satisfies gamma(t) + gamma(-t) = beta(t) and periodicity.
    let w = (beta[n] - beta[0]) / std::f64::consts::TAU;
    let w_round = w.round();
    if (w - w_round).abs() > 1e-6 {
        return Err(Error::IllConditioned(format!(
            "mirror-defect winding {w:.6} is not integral"
        )));
    }
    for i in 0..=n {
        let t_frac = i as f64 / n as f64;
        let gamma = 0.5 * (beta[i] - std::f64::consts::TAU * w_round * t_frac);
        let (s, c) = gamma.sin_cos();
        let (f1, f2) = (e1[i], e2[i]);
        e1[i] = f1 * c + f2 * s;
        e2[i] = f2 * c - f1 * s;
    }

    let frame = TrivializationFrame {
        times: traj.times.clone(),
        e1,
        e2,
        symmetric_flag: true,
        winding_offset: 0,
    };
    let defect = symmetric_frame_defect(&frame, inv);
    if defect > 1e-8 {
        return Err(Error::IllConditioned(format!(
            "symmetric frame defect {defect:.3e} after correction"
        )));
    }
    Ok(frame)
}

/// Maximal violation of the mirror relation over all sample pairs.
pub fn symmetric_frame_defect(
    frame: &TrivializationFrame,
    inv: &crate::systems::Involution,
) -> f64 {
    let n = frame.e1.len() - 1;
    let mut dev: f64 = 0.0;
    for i in 0..=n {
        let mirror = (n - i) % n;
        let d1 = inv.matrix * frame.e1[i];
        let d2 = inv.matrix * frame.e2[i];
        dev = dev.max((d1 - frame.e1[mirror]).norm());
        dev = dev.max((d2 + frame.e2[mirror]).norm());
    }
    dev
}

/// Frame invariant checks: pairing with the Liouville form, the level
/// normal, and the symplectic normalization.
pub fn frame_defects(model: &SystemModel, traj: &Trajectory, frame: &TrivializationFrame) -> (f64, f64, f64) {
    let mut lambda_dev: f64 = 0.0;
    let mut tangent_dev: f64 = 0.0;
    let mut area_dev: f64 = 0.0;
    for (i, x) in traj.states.iter().enumerate() {
        let g = model.gradient(x);
        for e in [&frame.e1[i], &frame.e2[i]] {
            lambda_dev = lambda_dev.max(crate::linalg::liouville(x, e).abs());
            tangent_dev = tangent_dev.max(g.dot(e).abs() / g.norm());
        }
        area_dev = area_dev
            .max((crate::linalg::omega4(&frame.e1[i], &frame.e2[i]) - 1.0).abs());
    }
    (lambda_dev, tangent_dev, area_dev)
}

/// Winding of frame `b`'s first section expressed in frame `a`'s
/// coordinates, along a common closed trajectory.
pub fn frame_winding(a: &TrivializationFrame, b: &TrivializationFrame) -> Result<i64> {
    if a.e1.len() != b.e1.len() {
        return Err(Error::InvalidInput(
            "frames sampled on different grids".into(),
        ));
    }
    let samples: Vec<Vector2<f64>> = (0..a.e1.len())
        .map(|i| {
            Vector2::new(
                crate::linalg::omega4(&b.e1[i], &a.e2[i]),
                -crate::linalg::omega4(&b.e1[i], &a.e1[i]),
            )
        })
        .collect();
    let total = crate::linalg::total_turning(&samples).map_err(|s| {
        Error::IllConditioned(format!("frame comparison undersampled (step {s:.3})"))
    })?;
    let w = total / std::f64::consts::TAU;
    let rounded = w.round();
    if (w - rounded).abs() > 1e-6 {
        return Err(Error::Internal(format!(
            "non-integral frame winding {w:.6}"
        )));
    }
    Ok(rounded as i64)
}

/// A constant-section frame along a trajectory, for winding comparisons:
/// takes fixed ambient directions and projects them into `xi` at each
/// sample, normalizing symplectically. Fails if a direction degenerates.
pub fn constant_direction_frame(
    model: &SystemModel,
    traj: &Trajectory,
    dir1: &Vector4<f64>,
) -> Result<TrivializationFrame> {
    let mut e1 = Vec::with_capacity(traj.len());
    let mut e2 = Vec::with_capacity(traj.len());
    for x in &traj.states {
        let grad = model.gradient(x);
        let lam = crate::linalg::quat_i(x); // lambda0 direction: <J4 x, .>
        // project dir1 into xi = ker(lambda0) cap ker(dH)
        let mut v = *dir1;
        // subtract components along grad and J4 x within the 2-plane they span
        let basis = [grad, lam];
        // Gram-Schmidt the two constraint directions, then project
        let mut ortho: Vec<Vector4<f64>> = Vec::new();
        for b in basis {
            let mut u = b;
            for o in &ortho {
                u -= o * o.dot(&u);
            }
            if u.norm() > 1e-12 {
                ortho.push(u.normalize());
            }
        }
        for o in &ortho {
            v -= o * o.dot(&v);
        }
        if v.norm() < 1e-6 {
            return Err(Error::Geometry(
                "constant direction degenerates along the orbit".into(),
            ));
        }
        // complete to a symplectic frame with the compatible partner J v
        // projected the same way
        let mut w = crate::linalg::quat_i(&v);
        for o in &ortho {
            w -= o * o.dot(&w);
        }
        let area = crate::linalg::omega4(&v, &w);
        if area < 1e-10 {
            return Err(Error::Geometry(
                "constant-direction frame loses orientation".into(),
            ));
        }
        let s = 1.0 / area.sqrt();
        e1.push(v * s);
        e2.push(w * s);
    }
    Ok(TrivializationFrame {
        times: traj.times.clone(),
        e1,
        e2,
        symmetric_flag: false,
        winding_offset: 0,
    })
}

/// Expresses the variational flow in a frame as a path of 2x2 matrices,
/// projecting along the flow direction and the level normal.
pub fn transverse_path(
    model: &SystemModel,
    traj: &Trajectory,
    mono: &MonodromyPath,
    frame: &TrivializationFrame,
    iterate_count: u32,
) -> Result<SymplecticPath> {
    if mono.matrices.len() != traj.len() || frame.e1.len() != traj.len() {
        return Err(Error::InvalidInput(
            "monodromy / frame / trajectory grids differ".into(),
        ));
    }
    let total = traj.len() - 1;
    if total % iterate_count as usize != 0 {
        return Err(Error::InvalidInput(
            "sample count is not divisible by the iterate count".into(),
        ));
    }
    let spu = total / iterate_count as usize;
    if spu % 2 != 0 {
        return Err(Error::InvalidInput(
            "need an even number of samples per period".into(),
        ));
    }

    let cols0 = [frame.e1[0], frame.e2[0]];
    let mut mats = Vec::with_capacity(total + 1);
    for i in 0..=total {
        let x = &traj.states[i];
        let flow = model.vector_field(x)?;
        let normal = model.gradient(x);
        let basis = Matrix4::from_columns(&[flow, normal, frame.e1[i], frame.e2[i]]);
        let lu = basis.lu();
        // conditioning guard
        let det = basis.determinant().abs();
        if det < 1e-12 {
            return Err(Error::Geometry(format!(
                "transverse projection degenerates at sample {i}"
            )));
        }
        let mut m = Matrix2::zeros();
        for (bcol, e0) in cols0.iter().enumerate() {
            let image = mono.matrices[i] * e0;
            let c = lu.solve(&image).ok_or_else(|| {
                Error::Geometry(format!("projection solve failed at sample {i}"))
            })?;
            m[(0, bcol)] = c[2];
            m[(1, bcol)] = c[3];
        }
        mats.push(m);
    }
    mats[0] = Matrix2::identity();

    let det_dev = mats
        .iter()
        .map(|m| (m.determinant() - 1.0).abs())
        .fold(0.0, f64::max);
    if det_dev > 1e-8 {
        return Err(Error::IllConditioned(format!(
            "transverse path determinant drifts by {det_dev:.3e}"
        )));
    }

    let path = SymplecticPath::from_samples(mats, spu, iterate_count, None)?;
    // attach the generating loop, recovered by differentiation
    let (lp, _skew) = generator_from_path(&path, frame.symmetric_flag)?;
    SymplecticPath::from_samples(
        path.matrices().to_vec(),
        spu,
        iterate_count,
        Some(lp),
    )
}

#[cfg(test)]
mod tests;
