//! Maslov crossing-count engine for the boundary index.
//!
//! The Lagrangian line path `l(t) = Phi(t) R` is compared against the
//! reference line `R` over `[0, k/2]`. Crossings are times where the line
//! angle hits `0 mod pi`; each regular interior crossing contributes the
//! sign of the crossing form, the starting endpoint (always a crossing,
//! since `Phi(0) = Id`) contributes half that sign. When the generator loop
//! is available the crossing form is evaluated exactly as the quadratic form
//! of `S(t)` on the crossing line; otherwise it falls back to the angular
//! rate from the samples.

use super::types::{Half, IndexMethod, IndexReport, SymplecticPath};
use crate::error::{Error, Result};
use nalgebra::Vector2;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Crossing form values below this are treated as singular tangencies.
pub const FORM_SINGULAR_TOL: f64 = 1e-10;

/// Robbin-Salamon index of `Phi(t) R` relative to `R` on `[0, k/2]`.
pub fn rs_index_crossing(path: &SymplecticPath) -> Result<IndexReport> {
    let half = path.half_index()?;
    let margin = path.chord_margin()?;
    if margin < 1e-8 {
        return Err(Error::Degenerate {
            kind: "chord",
            detail: format!("angle(Phi(k/2) R, R) = {margin:.3e} rad"),
            margin,
        });
    }

    // Continuous lift of the angle of Phi(t) e1 over [0, k/2].
    let e1 = Vector2::new(1.0, 0.0);
    let mut lift = Vec::with_capacity(half + 1);
    let mut theta = 0.0;
    let mut prev = e1;
    lift.push(0.0);
    for i in 1..=half {
        let u = path.matrices()[i] * e1;
        let cross = prev[0] * u[1] - prev[1] * u[0];
        let dot = prev[0] * u[0] + prev[1] * u[1];
        let step = cross.atan2(dot);
        if step.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::IllConditioned(
                "path too coarsely sampled for crossing detection".into(),
            ));
        }
        theta += step;
        lift.push(theta);
        prev = u;
    }

    let form_at = |i: usize, t: f64| -> f64 {
        // crossing form = <u, S u> / |u|^2 at the crossing line
        if let Some(lp) = path.generator() {
            let u = path.matrices()[i] * e1;
            let s = lp.eval(t.rem_euclid(1.0));
            (u.dot(&(s * u))) / u.norm_squared()
        } else {
            // angular rate from neighbouring samples
            let dt = 1.0 / path.samples_per_unit() as f64;
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(half);
            (lift[hi] - lift[lo]) / ((hi - lo) as f64 * dt)
        }
    };

    let mut residuals = BTreeMap::new();
    residuals.insert("chord_margin".into(), margin);

    // Endpoint t = 0 is always a crossing.
    let f0 = form_at(0, 0.0);
    if f0.abs() < FORM_SINGULAR_TOL {
        return Err(Error::IllConditioned(format!(
            "crossing form at t = 0 is singular ({f0:.3e}); refine the grid"
        )));
    }
    let mut twice_mu: i64 = f0.signum() as i64;
    residuals.insert("form_t0".into(), f0);

    // Interior crossings: lifted angle passes a multiple of pi.
    let mut min_form = f64::INFINITY;
    for i in 0..half {
        let (a, b) = (lift[i], lift[i + 1]);
        let (fa, fb) = (a / PI, b / PI);
        let lo_m = fa.min(fb).ceil() as i64;
        let hi_m = fa.max(fb).floor() as i64;
        for m in lo_m..=hi_m {
            let target = m as f64 * PI;
            // skip the endpoint crossing handled above; the right endpoint
            // cannot be a crossing for a non-degenerate chord
            let hit_left = (a - target).abs() < 1e-14 && i == 0;
            if hit_left {
                continue;
            }
            if (b - target).abs() < 1e-14 && i + 1 == half {
                return Err(Error::Degenerate {
                    kind: "chord",
                    detail: "crossing at the right endpoint".into(),
                    margin: 0.0,
                });
            }
            // locate by linear interpolation within the step
            let frac = if (b - a).abs() > 0.0 { (target - a) / (b - a) } else { 0.5 };
            let idx = if frac < 0.5 { i } else { i + 1 };
            let t = (i as f64 + frac) / path.samples_per_unit() as f64;
            let f = form_at(idx, t);
            if f.abs() < FORM_SINGULAR_TOL {
                return Err(Error::IllConditioned(format!(
                    "interior crossing form at t = {t:.6} is singular ({f:.3e}); \
                     refine the grid"
                )));
            }
            min_form = min_form.min(f.abs());
            twice_mu += 2 * f.signum() as i64;
        }
    }
    if min_form.is_finite() {
        residuals.insert("min_interior_form".into(), min_form);
    }

    let mu = Half(twice_mu);
    if mu.is_integer() {
        return Err(Error::Internal(format!(
            "crossing count produced integral boundary index {mu}"
        )));
    }
    let alpha = Half((mu.0 - 1) / 2);
    let report = IndexReport {
        mu_cz: None,
        mu_rs: Some(mu),
        alpha,
        p: None,
        method: IndexMethod::Crossing,
        rotation_number: Some(lift[half] / (2.0 * PI)),
        residuals,
    };
    report.check_consistency()?;
    Ok(report)
}
