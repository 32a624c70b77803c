//! Embedded Dormand–Prince 5(4) integrator for complex state vectors, with
//! fourth-order dense output at caller-requested sample times.
//!
//! Classic setup: FSAL tableau, scaled-RMS error norm over component
//! magnitudes, step factor 0.9·err^(−1/5) clamped to [0.2, 10] (growth capped
//! at 1 right after a rejection), and the standard automatic initial-step
//! estimate. States never get renormalized: norm drift is a diagnostic the
//! callers rely on.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum IntegrationError {
    #[error("step size underflow at t = {t} (h = {h})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("step limit of {limit} exceeded at t = {t}")]
    StepLimitExceeded { t: f64, limit: usize },
}

#[derive(Debug, Clone)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    /// Starting step; estimated automatically when absent.
    pub initial_step: Option<f64>,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            initial_step: None,
            max_step: f64::INFINITY,
            max_steps: 5_000_000,
        }
    }
}

// Dormand–Prince 5(4) nodes and stage coefficients.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
// Fifth-order weights (also the last stage row: FSAL).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b − b̂: error estimator weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense-output weights for the fifth interpolation polynomial coefficient.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

struct Workspace {
    k: [Vec<Complex64>; 7],
    stage: Vec<Complex64>,
    y_next: Vec<Complex64>,
    rcont: [Vec<Complex64>; 5],
}

impl Workspace {
    fn new(n: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); n];
        Self {
            k: [
                z.clone(),
                z.clone(),
                z.clone(),
                z.clone(),
                z.clone(),
                z.clone(),
                z.clone(),
            ],
            stage: z.clone(),
            y_next: z.clone(),
            rcont: [z.clone(), z.clone(), z.clone(), z.clone(), z],
        }
    }
}

/// Integrate dy/dt = rhs(t, y) from `t0` to `t1` (t0 < t1), returning the
/// state at each of `sample_times`, which must be sorted ascending and lie in
/// [t0, t1] with the first equal to t0.
pub fn integrate<F>(
    mut rhs: F,
    t0: f64,
    t1: f64,
    y0: &[Complex64],
    sample_times: &[f64],
    opts: &Dopri5Options,
) -> Result<Vec<Vec<Complex64>>, IntegrationError>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    assert!(t1 > t0, "integration window must be forward and non-empty");
    assert!(!sample_times.is_empty() && sample_times[0] == t0);
    assert!(sample_times.windows(2).all(|w| w[0] < w[1]));
    assert!(*sample_times.last().unwrap() <= t1);

    let n = y0.len();
    let mut ws = Workspace::new(n);
    let mut y = y0.to_vec();
    let mut t = t0;

    let mut samples: Vec<Vec<Complex64>> = Vec::with_capacity(sample_times.len());
    samples.push(y.clone());
    let mut next_sample = 1usize;

    rhs(t, &y, &mut ws.k[0]);

    let max_step = opts.max_step.min(t1 - t0);
    let mut h = match opts.initial_step {
        Some(h0) => h0.min(max_step),
        None => initial_step(&mut rhs, t, &y, &ws.k[0].clone(), t1, opts).min(max_step),
    };

    let mut just_rejected = false;
    let mut steps = 0usize;

    while t < t1 {
        steps += 1;
        if steps > opts.max_steps {
            return Err(IntegrationError::StepLimitExceeded {
                t,
                limit: opts.max_steps,
            });
        }
        h = h.min(t1 - t);
        // When capped, this step lands the integration exactly on t1.
        let is_last = h >= t1 - t;
        if h <= f64::EPSILON * 16.0 * t.abs().max(1.0) {
            return Err(IntegrationError::StepSizeUnderflow { t, h });
        }

        // Stages 2..7; k[6] is the derivative at the trial endpoint.
        stage_combine(&mut ws.stage, &y, h, &[(A21, &ws.k[0])]);
        rhs(t + C2 * h, &ws.stage, &mut ws.k[1]);
        stage_combine(&mut ws.stage, &y, h, &[(A31, &ws.k[0]), (A32, &ws.k[1])]);
        rhs(t + C3 * h, &ws.stage, &mut ws.k[2]);
        stage_combine(
            &mut ws.stage,
            &y,
            h,
            &[(A41, &ws.k[0]), (A42, &ws.k[1]), (A43, &ws.k[2])],
        );
        rhs(t + C4 * h, &ws.stage, &mut ws.k[3]);
        stage_combine(
            &mut ws.stage,
            &y,
            h,
            &[
                (A51, &ws.k[0]),
                (A52, &ws.k[1]),
                (A53, &ws.k[2]),
                (A54, &ws.k[3]),
            ],
        );
        rhs(t + C5 * h, &ws.stage, &mut ws.k[4]);
        stage_combine(
            &mut ws.stage,
            &y,
            h,
            &[
                (A61, &ws.k[0]),
                (A62, &ws.k[1]),
                (A63, &ws.k[2]),
                (A64, &ws.k[3]),
                (A65, &ws.k[4]),
            ],
        );
        rhs(t + h, &ws.stage, &mut ws.k[5]);
        stage_combine(
            &mut ws.y_next,
            &y,
            h,
            &[
                (B1, &ws.k[0]),
                (B3, &ws.k[2]),
                (B4, &ws.k[3]),
                (B5, &ws.k[4]),
                (B6, &ws.k[5]),
            ],
        );
        rhs(t + h, &ws.y_next, &mut ws.k[6]);

        // Scaled RMS error over component magnitudes.
        let mut err_sq = 0.0;
        #[allow(clippy::needless_range_loop)] // seven parallel stage arrays
        for i in 0..n {
            let e = h
                * (E1 * ws.k[0][i]
                    + E3 * ws.k[2][i]
                    + E4 * ws.k[3][i]
                    + E5 * ws.k[4][i]
                    + E6 * ws.k[5][i]
                    + E7 * ws.k[6][i]);
            let scale = opts.atol + opts.rtol * y[i].norm().max(ws.y_next[i].norm());
            let r = e.norm() / scale;
            err_sq += r * r;
        }
        let err = (err_sq / n as f64).sqrt();

        if err <= 1.0 {
            // Accepted: fill dense-output coefficients and emit samples
            // landing inside (t, t+h].
            let right = if is_last { t1 } else { t + h };
            if next_sample < sample_times.len() && sample_times[next_sample] <= right {
                prepare_dense(&mut ws.rcont, &y, &ws.y_next, &ws.k, h);
                while next_sample < sample_times.len() && sample_times[next_sample] <= right {
                    let theta = ((sample_times[next_sample] - t) / h).min(1.0);
                    samples.push(eval_dense(&ws.rcont, theta));
                    next_sample += 1;
                }
            }
            ws.k.swap(0, 6); // FSAL
            y.copy_from_slice(&ws.y_next);
            t = if is_last { t1 } else { t + h };
            let factor = if err == 0.0 {
                10.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 10.0)
            };
            let factor = if just_rejected {
                factor.min(1.0)
            } else {
                factor
            };
            h = (h * factor).min(max_step);
            just_rejected = false;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0).min(0.9);
            just_rejected = true;
        }
    }

    // The caller's final sample is t1 up to roundoff; hand it the exact
    // endpoint state rather than an interpolation.
    if next_sample < sample_times.len() {
        debug_assert_eq!(next_sample, sample_times.len() - 1);
        samples.push(y.clone());
    }
    Ok(samples)
}

fn stage_combine(out: &mut [Complex64], y: &[Complex64], h: f64, terms: &[(f64, &Vec<Complex64>)]) {
    for i in 0..out.len() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, k) in terms {
            acc += *a * k[i];
        }
        out[i] = y[i] + h * acc;
    }
}

fn prepare_dense(
    rcont: &mut [Vec<Complex64>; 5],
    y: &[Complex64],
    y_next: &[Complex64],
    k: &[Vec<Complex64>; 7],
    h: f64,
) {
    for i in 0..y.len() {
        let ydiff = y_next[i] - y[i];
        let bspl = h * k[0][i] - ydiff;
        rcont[0][i] = y[i];
        rcont[1][i] = ydiff;
        rcont[2][i] = bspl;
        rcont[3][i] = ydiff - h * k[6][i] - bspl;
        rcont[4][i] = h
            * (D1 * k[0][i]
                + D3 * k[2][i]
                + D4 * k[3][i]
                + D5 * k[4][i]
                + D6 * k[5][i]
                + D7 * k[6][i]);
    }
}

fn eval_dense(rcont: &[Vec<Complex64>; 5], theta: f64) -> Vec<Complex64> {
    let s = theta;
    let s1 = 1.0 - theta;
    (0..rcont[0].len())
        .map(|i| {
            rcont[0][i]
                + s * (rcont[1][i] + s1 * (rcont[2][i] + s * (rcont[3][i] + s1 * rcont[4][i])))
        })
        .collect()
}

/// Standard order-5 starting-step heuristic from the initial derivative.
fn initial_step<F>(
    rhs: &mut F,
    t0: f64,
    y0: &[Complex64],
    f0: &[Complex64],
    t1: f64,
    opts: &Dopri5Options,
) -> f64
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let n = y0.len();
    let scale = |y: &[Complex64], i: usize| opts.atol + opts.rtol * y[i].norm();
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..n {
        let sc = scale(y0, i);
        d0 += (y0[i].norm() / sc).powi(2);
        d1 += (f0[i].norm() / sc).powi(2);
    }
    d0 = (d0 / n as f64).sqrt();
    d1 = (d1 / n as f64).sqrt();

    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(t1 - t0);

    let y1: Vec<Complex64> = (0..n).map(|i| y0[i] + h0 * f0[i]).collect();
    let mut f1 = vec![Complex64::new(0.0, 0.0); n];
    rhs(t0 + h0, &y1, &mut f1);
    let mut d2 = 0.0;
    for i in 0..n {
        d2 += ((f1[i] - f0[i]).norm() / scale(y0, i)).powi(2);
    }
    let d2 = (d2 / n as f64).sqrt() / h0;

    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dm).powf(0.2)
    };
    (100.0 * h0).min(h1).min(t1 - t0)
}
