//! Dormand–Prince 5(4) integrator with step-size control and the
//! fourth-order continuous extension for dense output.

use crate::error::{Error, Result};

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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Smallest admissible |h| before giving up.
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-13,
            h_min: 1e-14,
            h_max: 0.5,
            max_steps: 5_000_000,
        }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution<const N: usize> {
    /// Requested sample times, in integration order.
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub t_final: f64,
    pub y_final: [f64; N],
    pub accepted: usize,
    pub rejected: usize,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

fn err_norm<const N: usize>(e: &[f64; N], y0: &[f64; N], y1: &[f64; N], opts: &OdeOptions) -> f64 {
    let s: f64 = (0..N)
        .map(|i| {
            let sc = opts.atol + opts.rtol * y0[i].abs().max(y1[i].abs());
            (e[i] / sc).powi(2)
        })
        .sum();
    (s / N as f64).sqrt()
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction) and
/// returns the state at each of `samples` via dense output.
///
/// `samples` must be ordered along the direction of integration and lie
/// between `t0` and `t1`.
pub fn integrate<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    samples: &[f64],
    opts: OdeOptions,
) -> Result<Solution<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let mut out = Solution {
        times: Vec::with_capacity(samples.len()),
        states: Vec::with_capacity(samples.len()),
        t_final: t0,
        y_final: y0,
        accepted: 0,
        rejected: 0,
    };
    let mut next_sample = 0;
    while next_sample < samples.len() && (samples[next_sample] - t0) * dir <= 0.0 {
        out.times.push(samples[next_sample]);
        out.states.push(y0);
        next_sample += 1;
    }
    if span == 0.0 {
        return Ok(out);
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);

    // initial step from the scale of y and y'
    let d0 = err_norm(&y, &y, &y, &opts).max(1e-5);
    let d1 = err_norm(&k1, &y, &y, &opts).max(1e-5);
    let mut h = (0.01 * d0 / d1).min(span).min(opts.h_max).max(opts.h_min * 10.0);

    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;

    for _ in 0..opts.max_steps {
        let remaining = (t1 - t) * dir;
        if remaining <= 0.0 {
            break;
        }
        let mut final_step = false;
        if h >= remaining {
            h = remaining;
            final_step = true;
        }
        let hs = h * dir;

        let y2 = axpy(&y, hs, &[(A21, &k1)]);
        let k2 = f(t + C2 * hs, &y2);
        let y3 = axpy(&y, hs, &[(A31, &k1), (A32, &k2)]);
        let k3 = f(t + C3 * hs, &y3);
        let y4 = axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        let k4 = f(t + C4 * hs, &y4);
        let y5 = axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        let k5 = f(t + C5 * hs, &y5);
        let y6 = axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        let k6 = f(t + hs, &y6);
        let y_new = axpy(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let t_new = if final_step { t1 } else { t + hs };
        let k7 = f(t_new, &y_new);

        let e = axpy(
            &[0.0; N],
            hs,
            &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
        );
        let err = err_norm(&e, &y, &y_new, &opts);

        // Lund-stabilized step control (Hairer's dopri5 constants)
        let fac11 = err.powf(0.17);
        let mut fac = fac11 / fac_old.powf(0.04) / 0.9;
        fac = fac.clamp(0.1, 5.0);

        if err <= 1.0 {
            fac_old = err.max(1e-4);
            out.accepted += 1;

            // dense output on [t, t_new]
            while next_sample < samples.len() && (samples[next_sample] - t_new) * dir <= 0.0 {
                let ts = samples[next_sample];
                let theta = (ts - t) / (t_new - t);
                let mut ys = [0.0; N];
                for i in 0..N {
                    let r2 = y_new[i] - y[i];
                    let r3 = hs * k1[i] - r2;
                    let r4 = r2 - hs * k7[i] - r3;
                    let r5 = hs
                        * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                    let th1 = 1.0 - theta;
                    ys[i] = y[i] + theta * (r2 + th1 * (r3 + theta * (r4 + th1 * r5)));
                }
                out.times.push(ts);
                out.states.push(ys);
                next_sample += 1;
            }

            t = t_new;
            y = y_new;
            k1 = k7;
            if final_step {
                out.t_final = t;
                out.y_final = y;
                return Ok(out);
            }
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            h = h_new.min(opts.h_max);
        } else {
            out.rejected += 1;
            last_rejected = true;
            h /= (fac11 / 0.9).min(5.0);
        }
        if h < opts.h_min {
            return Err(Error::StepUnderflow { t, h });
        }
    }
    if (t1 - t) * dir > 0.0 {
        return Err(Error::StepUnderflow { t, h });
    }
    out.t_final = t;
    out.y_final = y;
    Ok(out)
}
