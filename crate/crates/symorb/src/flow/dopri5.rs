//! Embedded Dormand-Prince 5(4) integrator with dense output and event
//! location.
//!
//! Output samples are produced by forcing step endpoints onto the requested
//! times, so sampled states carry full integrator accuracy; the fourth-order
//! dense interpolant is used only to bracket event sign changes, after which
//! the event state is re-propagated from the step start.

use crate::error::{Error, Result};

/// Right-hand side of an autonomous or non-autonomous ODE on `R^N`.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> Result<[f64; N]>;
}

impl<const N: usize, F> OdeSystem<N> for F
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    fn rhs(&self, t: f64, y: &[f64; N]) -> Result<[f64; N]> {
        self(t, y)
    }
}

#[derive(Debug, Clone)]
pub struct Integrator {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }
}

/// Which sign changes of the event function trigger a hit.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum EventDirection {
    Rising,
    Falling,
    Any,
}

#[derive(Debug, Clone)]
pub struct EventHit<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// One accepted step with its dense-output coefficients.
struct DenseStep<const N: usize> {
    t0: f64,
    h: f64,
    cont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t0) / self.h;
        let th1 = 1.0 - theta;
        let mut y = [0.0; N];
        for i in 0..N {
            y[i] = self.cont[0][i]
                + theta
                    * (self.cont[1][i]
                        + th1
                            * (self.cont[2][i]
                                + theta * (self.cont[3][i] + th1 * self.cont[4][i])));
        }
        y
    }
}

struct StepOut<const N: usize> {
    y1: [f64; N],
    dense: DenseStep<N>,
}

impl Integrator {
    /// One adaptive macro-step from `(t, y)` toward `t_end` (sign of
    /// direction inferred). Returns the accepted step and updates `h`.
    fn step<const N: usize, S: OdeSystem<N>>(
        &self,
        sys: &S,
        t: f64,
        y: &[f64; N],
        h: &mut f64,
        k1: &mut [f64; N],
    ) -> Result<StepOut<N>> {
        let mut ks = [[0.0; N]; 7];
        loop {
            ks[0] = *k1;
            for stage in 1..7 {
                let mut arg = *y;
                for (j, kj) in ks.iter().enumerate().take(stage) {
                    let a = A[stage][j];
                    if a != 0.0 {
                        for i in 0..N {
                            arg[i] += *h * a * kj[i];
                        }
                    }
                }
                ks[stage] = sys.rhs(t + C[stage] * *h, &arg)?;
            }
            // 5th-order solution is the stage-7 argument (FSAL)
            let mut y1 = *y;
            for (j, kj) in ks.iter().enumerate().take(6) {
                let a = A[6][j];
                if a != 0.0 {
                    for i in 0..N {
                        y1[i] += *h * a * kj[i];
                    }
                }
            }
            // error estimate
            let mut err: f64 = 0.0;
            for i in 0..N {
                let mut e = 0.0;
                for (j, kj) in ks.iter().enumerate() {
                    e += E[j] * kj[i];
                }
                e *= *h;
                let sc = self.atol + self.rtol * y[i].abs().max(y1[i].abs());
                err += (e / sc) * (e / sc);
            }
            let err = (err / N as f64).sqrt();

            if err <= 1.0 {
                // dense coefficients
                let mut cont = [[0.0; N]; 5];
                for i in 0..N {
                    let ydiff = y1[i] - y[i];
                    let bspl = *h * ks[0][i] - ydiff;
                    cont[0][i] = y[i];
                    cont[1][i] = ydiff;
                    cont[2][i] = bspl;
                    cont[3][i] = ydiff - *h * ks[6][i] - bspl;
                    let mut c5 = 0.0;
                    for (j, kj) in ks.iter().enumerate() {
                        c5 += D[j] * kj[i];
                    }
                    cont[4][i] = *h * c5;
                }
                let dense = DenseStep {
                    t0: t,
                    h: *h,
                    cont,
                };
                *k1 = ks[6]; // FSAL
                let fac = (0.9 * (1.0 / err).powf(0.2)).clamp(0.2, 5.0);
                let h_new = clamp_mag(*h * fac, self.h_max);
                let out = StepOut { y1, dense };
                *h = h_new;
                return Ok(out);
            }
            let fac = (1.0 / err).powf(0.2).max(0.1) * 0.9;
            *h *= fac.max(0.1);
            if h.abs() < 1e-14 * t.abs().max(1.0) {
                return Err(Error::IllConditioned(format!(
                    "step size underflow at t = {t:.6e} (stiffness or singularity)"
                )));
            }
        }
    }

    fn initial_step<const N: usize, S: OdeSystem<N>>(
        &self,
        sys: &S,
        t0: f64,
        y0: &[f64; N],
        dir: f64,
    ) -> Result<f64> {
        let f0 = sys.rhs(t0, y0)?;
        let mut norm = 0.0f64;
        for (i, f) in f0.iter().enumerate() {
            let sc = self.atol + self.rtol * y0[i].abs();
            norm = norm.max((f / sc).abs());
        }
        let h = if norm > 0.0 { 0.01 / norm } else { 1e-3 };
        Ok(clamp_mag(h * dir, self.h_max))
    }

    /// Propagates to exactly `t_end`.
    pub fn propagate<const N: usize, S: OdeSystem<N>>(
        &self,
        sys: &S,
        t0: f64,
        y0: &[f64; N],
        t_end: f64,
    ) -> Result<[f64; N]> {
        if t_end == t0 {
            return Ok(*y0);
        }
        let dir = (t_end - t0).signum();
        let mut t = t0;
        let mut y = *y0;
        let mut h = self.initial_step(sys, t0, y0, dir)?;
        let mut k1 = sys.rhs(t0, y0)?;
        for _ in 0..self.max_steps {
            if (t_end - t) * dir <= 0.0 {
                return Ok(y);
            }
            if (t + h - t_end) * dir > 0.0 {
                h = t_end - t;
            }
            let out = self.step(sys, t, &y, &mut h, &mut k1)?;
            t = out.dense.t0 + out.dense.h;
            y = out.y1;
            if (t_end - t) * dir <= 1e-14 * t.abs().max(1.0) {
                return Ok(y);
            }
        }
        Err(Error::IllConditioned(format!(
            "integration exceeded {} steps",
            self.max_steps
        )))
    }

    /// Propagates through the sorted output times, calling `on_sample` at
    /// each. Every output time is hit by a forced step endpoint.
    pub fn sample<const N: usize, S: OdeSystem<N>>(
        &self,
        sys: &S,
        t0: f64,
        y0: &[f64; N],
        times: &[f64],
        mut on_sample: impl FnMut(f64, &[f64; N]),
    ) -> Result<()> {
        let mut t = t0;
        let mut y = *y0;
        for &target in times {
            if (target - t).abs() <= 1e-15 * target.abs().max(1.0) {
                on_sample(target, &y);
                continue;
            }
            y = self.propagate(sys, t, &y, target)?;
            t = target;
            on_sample(target, &y);
        }
        Ok(())
    }

    /// Integrates forward until the event function crosses zero in the
    /// requested direction, or `horizon` is reached.
    ///
    /// Each accepted step's dense interpolant is scanned on `scan`
    /// subsamples; a bracketed crossing is bisected to relative time
    /// tolerance `1e-12` and the state is re-propagated for full accuracy.
    /// Crossings within `dead_time` of the start are ignored, which lets a
    /// return-map query start on the section itself.
    pub fn to_event<const N: usize, S: OdeSystem<N>>(
        &self,
        sys: &S,
        t0: f64,
        y0: &[f64; N],
        horizon: f64,
        dead_time: f64,
        direction: EventDirection,
        scan: usize,
        g: impl Fn(f64, &[f64; N]) -> f64,
    ) -> Result<Option<EventHit<N>>> {
        let t_end = t0 + horizon;
        let mut t = t0;
        let mut y = *y0;
        let mut h = self.initial_step(sys, t0, y0, 1.0)?;
        let mut k1 = sys.rhs(t0, y0)?;
        let mut g_prev = g(t0, &y);
        for _ in 0..self.max_steps {
            if t >= t_end {
                return Ok(None);
            }
            if t + h > t_end {
                h = t_end - t;
            }
            let out = self.step(sys, t, &y, &mut h, &mut k1)?;
            let step_t0 = out.dense.t0;
            let step_h = out.dense.h;
            // scan for a sign change
            let mut prev_t = step_t0;
            let mut prev_g = g_prev;
            for s in 1..=scan {
                let ts = step_t0 + step_h * s as f64 / scan as f64;
                let ys = out.dense.eval(ts);
                let gs = g(ts, &ys);
                let crossed = match direction {
                    EventDirection::Rising => prev_g < 0.0 && gs >= 0.0,
                    EventDirection::Falling => prev_g > 0.0 && gs <= 0.0,
                    EventDirection::Any => prev_g * gs <= 0.0 && prev_g != gs,
                };
                if crossed && ts - t0 > dead_time {
                    // bisect on the dense interpolant
                    let (mut lo, mut hi) = (prev_t, ts);
                    let mut glo = prev_g;
                    for _ in 0..100 {
                        let mid = 0.5 * (lo + hi);
                        let gm = g(mid, &out.dense.eval(mid));
                        let cross_lo = match direction {
                            EventDirection::Rising => glo < 0.0 && gm >= 0.0,
                            EventDirection::Falling => glo > 0.0 && gm <= 0.0,
                            EventDirection::Any => glo * gm <= 0.0 && glo != gm,
                        };
                        if cross_lo {
                            hi = mid;
                        } else {
                            lo = mid;
                            glo = gm;
                        }
                        if hi - lo < 1e-12 * hi.abs().max(1.0) {
                            break;
                        }
                    }
                    let t_star = 0.5 * (lo + hi);
                    // re-propagate from the step start for full accuracy
                    let y_star = self.propagate(sys, step_t0, y_at_step_start(&out, step_t0), t_star)?;
                    return Ok(Some(EventHit { t: t_star, y: y_star }));
                }
                prev_t = ts;
                prev_g = gs;
            }
            t = step_t0 + step_h;
            y = out.y1;
            g_prev = g(t, &y);
        }
        Err(Error::IllConditioned(format!(
            "event search exceeded {} steps",
            self.max_steps
        )))
    }
}

fn y_at_step_start<const N: usize>(out: &StepOut<N>, _t0: f64) -> &[f64; N] {
    // cont[0] stores the step's initial state
    &out.dense.cont[0]
}

fn clamp_mag(h: f64, max: f64) -> f64 {
    if h.abs() > max {
        max.copysign(h)
    } else {
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{PI, TAU};

    struct Oscillator;
    impl OdeSystem<2> for Oscillator {
        fn rhs(&self, _t: f64, y: &[f64; 2]) -> Result<[f64; 2]> {
            Ok([y[1], -y[0]])
        }
    }

    #[test]
    fn harmonic_oscillator_period() {
        let integ = Integrator::default();
        let y = integ.propagate(&Oscillator, 0.0, &[1.0, 0.0], TAU).unwrap();
        assert_relative_eq!(y[0], 1.0, epsilon = 1e-10);
        assert_relative_eq!(y[1], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn event_detection_finds_zero_crossing() {
        // cos(t) crosses zero falling at pi/2
        let integ = Integrator::default();
        let hit = integ
            .to_event(
                &Oscillator,
                0.0,
                &[1.0, 0.0],
                10.0,
                1e-9,
                EventDirection::Falling,
                16,
                |_t, y| y[0],
            )
            .unwrap()
            .expect("crossing expected");
        assert_relative_eq!(hit.t, PI / 2.0, epsilon = 1e-10);
        assert_relative_eq!(hit.y[1], -1.0, epsilon = 1e-10);
    }

    #[test]
    fn sampling_hits_exact_times() {
        let integ = Integrator::default();
        let times: Vec<f64> = (1..=8).map(|i| i as f64 * 0.7).collect();
        let mut got = Vec::new();
        integ
            .sample(&Oscillator, 0.0, &[1.0, 0.0], &times, |t, y| {
                got.push((t, y[0]));
            })
            .unwrap();
        for (t, x) in got {
            assert_relative_eq!(x, t.cos(), epsilon = 1e-10);
        }
    }

    #[test]
    fn dead_time_skips_initial_section_point() {
        // start exactly on the section x = 0 moving down; the first true
        // return is at t = pi
        let integ = Integrator::default();
        let hit = integ
            .to_event(
                &Oscillator,
                0.0,
                &[0.0, -1.0],
                10.0,
                1e-6,
                EventDirection::Any,
                16,
                |_t, y| y[0],
            )
            .unwrap()
            .unwrap();
        assert_relative_eq!(hit.t, PI, epsilon = 1e-9);
    }
}
