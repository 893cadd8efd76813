//! Embedded Dormand-Prince 5(4) integrator on flat complex state vectors.
//!
//! Used for the dense master-equation propagator and as the generic
//! state-evolution fallback. Defaults follow the trajectory-engine contract:
//! `rel_tol = 1e-9`, `abs_tol = 1e-12`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const DEFAULT_REL_TOL: f64 = 1e-9;
pub const DEFAULT_ABS_TOL: f64 = 1e-12;

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
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
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub initial_step: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_REL_TOL,
            abs_tol: DEFAULT_ABS_TOL,
            max_steps: 200_000_000,
            initial_step: None,
        }
    }
}

/// Integrate `dy/dt = rhs(t, y)` from `t0` to `t1` in place.
///
/// `on_accept(t, y)` runs after each accepted step. Fails if the step size
/// collapses or the step budget is exhausted.
pub fn integrate<F, G>(
    rhs: &F,
    y: &mut Vec<C64>,
    t0: f64,
    t1: f64,
    opts: &OdeOptions,
    on_accept: &mut G,
) -> Result<()>
where
    F: Fn(f64, &[C64], &mut [C64]),
    G: FnMut(f64, &[C64]),
{
    if t1 == t0 {
        return Ok(());
    }
    assert!(t1 > t0, "backward integration unsupported");
    let n = y.len();
    let span = t1 - t0;
    let mut t = t0;
    let mut k: Vec<Vec<C64>> = (0..7).map(|_| vec![C64::new(0.0, 0.0); n]).collect();
    let mut y_tmp = vec![C64::new(0.0, 0.0); n];
    let mut y5 = vec![C64::new(0.0, 0.0); n];

    rhs(t, y, &mut k[0]);
    let mut h = opts.initial_step.unwrap_or_else(|| {
        // crude first guess from the RHS magnitude
        let y_norm = norm(y);
        let f_norm = norm(&k[0]);
        let scale = opts.abs_tol + opts.rel_tol * y_norm;
        if f_norm > 0.0 {
            (scale / f_norm).powf(0.2).min(span * 0.1).max(span * 1e-12)
        } else {
            span * 0.1
        }
    });
    let mut rejected = 0usize;

    for _ in 0..opts.max_steps {
        if t >= t1 {
            return Ok(());
        }
        h = h.min(t1 - t);
        if h <= (t1 - t0) * 1e-15 {
            return Err(Error::Integration(format!(
                "step size collapsed to {h:.3e} at t={t:.6e}"
            )));
        }
        // stages
        for s in 0..6 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s + 1) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc += kj[i] * (a * h);
                    }
                }
                y_tmp[i] = acc;
            }
            let ts = t + C[s] * h;
            let (head, tail) = k.split_at_mut(s + 1);
            let _ = head;
            rhs(ts, &y_tmp, &mut tail[0]);
        }
        // 5th-order solution and embedded error
        let mut err_sq = 0.0f64;
        for i in 0..n {
            let mut acc5 = y[i];
            let mut acc4 = y[i];
            for (j, kj) in k.iter().enumerate() {
                if B5[j] != 0.0 {
                    acc5 += kj[i] * (B5[j] * h);
                }
                if B4[j] != 0.0 {
                    acc4 += kj[i] * (B4[j] * h);
                }
            }
            y5[i] = acc5;
            let sc = opts.abs_tol + opts.rel_tol * y[i].norm().max(acc5.norm());
            let e = (acc5 - acc4).norm() / sc;
            err_sq += e * e;
        }
        let err = (err_sq / n as f64).sqrt();
        if err <= 1.0 {
            t += h;
            std::mem::swap(y, &mut y5);
            on_accept(t, y);
            // FSAL would save one eval; keep it simple and re-evaluate
            rhs(t, y, &mut k[0]);
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= factor;
            rejected = 0;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            rejected += 1;
            if rejected > 60 {
                return Err(Error::Integration(format!(
                    "step rejected {rejected} times in a row at t={t:.6e}"
                )));
            }
        }
    }
    Err(Error::Integration("step budget exhausted".into()))
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exponential_decay() {
        let rhs = |_t: f64, y: &[C64], dy: &mut [C64]| {
            dy[0] = -y[0];
        };
        let mut y = vec![C64::new(1.0, 0.0)];
        integrate(&rhs, &mut y, 0.0, 3.0, &OdeOptions::default(), &mut |_, _| {}).unwrap();
        assert_abs_diff_eq!(y[0].re, (-3.0f64).exp(), epsilon = 1e-9);
    }

    #[test]
    fn oscillator_phase_accuracy() {
        let rhs = |_t: f64, y: &[C64], dy: &mut [C64]| {
            dy[0] = C64::new(0.0, -2.0) * y[0];
        };
        let mut y = vec![C64::new(1.0, 0.0)];
        integrate(&rhs, &mut y, 0.0, 10.0, &OdeOptions::default(), &mut |_, _| {}).unwrap();
        assert_abs_diff_eq!(y[0].re, (20.0f64).cos(), epsilon = 1e-7);
        assert_abs_diff_eq!(y[0].im, -(20.0f64).sin(), epsilon = 1e-7);
    }
}
