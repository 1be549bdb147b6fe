//! Dormand-Prince 5(4) with step-size control, FSAL, and a step observer
//! that supports event location through cubic Hermite interpolation.

use crate::error::{Error, Result};

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step magnitude; `None` picks one from the initial slope.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub min_step: f64,
    pub max_steps: usize,
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

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            h_init: None,
            h_max: 1.0,
            min_step: 1e-14,
            max_steps: 10_000_000,
        }
    }
}

/// One accepted step, with enough data for Hermite interpolation.
#[derive(Debug, Clone, Copy)]
pub struct Step<'a, const N: usize> {
    pub t0: f64,
    pub y0: &'a [f64; N],
    pub f0: &'a [f64; N],
    pub t1: f64,
    pub y1: &'a [f64; N],
    pub f1: &'a [f64; N],
}

impl<const N: usize> Step<'_, N> {
    /// Cubic Hermite interpolant at `t` in `[t0, t1]`.
    pub fn interpolate(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = h00 * self.y0[i] + h10 * h * self.f0[i] + h01 * self.y1[i] + h11 * h * self.f1[i];
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrate `y' = f(t, y)` from `t0` to `t_end` (either direction).
///
/// `observer` sees every accepted step and may stop the integration early.
/// Returns the final time and state.
pub fn integrate<const N: usize, F, O>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
    mut observer: O,
) -> Result<(f64, [f64; N])>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    O: FnMut(&Step<'_, N>) -> Control,
{
    let span = t_end - t0;
    if span == 0.0 {
        return Ok((t0, y0));
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut fy = f(t, &y);
    let mut h = opts
        .h_init
        .unwrap_or_else(|| initial_step(&y, &fy, opts))
        .min(opts.h_max)
        .min(span.abs());

    for _ in 0..opts.max_steps {
        let remaining = (t_end - t) * dir;
        if remaining <= 0.0 {
            break;
        }
        let last = h >= remaining;
        if last {
            h = remaining;
        } else if h < opts.min_step {
            return Err(Error::StepUnderflow {
                t,
                min_step: opts.min_step,
            });
        }
        let hs = h * dir;
        let (y_new, f_new, err) = dopri_step(&f, t, &y, &fy, hs, opts);
        if err <= 1.0 {
            let t_new = if last { t_end } else { t + hs };
            let step = Step {
                t0: t,
                y0: &y,
                f0: &fy,
                t1: t_new,
                y1: &y_new,
                f1: &f_new,
            };
            let ctl = observer(&step);
            t = t_new;
            y = y_new;
            fy = f_new;
            if ctl == Control::Stop || last {
                return Ok((t, y));
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * fac).min(opts.h_max);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            if h < opts.min_step {
                return Err(Error::StepUnderflow {
                    t,
                    min_step: opts.min_step,
                });
            }
        }
    }
    if (t_end - t) * dir > 0.0 {
        return Err(Error::StepUnderflow {
            t,
            min_step: opts.min_step,
        });
    }
    Ok((t, y))
}

fn initial_step<const N: usize>(y: &[f64; N], f: &[f64; N], opts: &OdeOptions) -> f64 {
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for i in 0..N {
        let sc = opts.atol + opts.rtol * y[i].abs();
        d0 = d0.max((y[i] / sc).abs());
        d1 = d1.max((f[i] / sc).abs());
    }
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.clamp(1e-8, 0.1)
}

#[allow(clippy::needless_range_loop)]
fn dopri_step<const N: usize, F>(
    f: &F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    opts: &OdeOptions,
) -> ([f64; N], [f64; N], f64)
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut tmp = [0.0; N];
    for i in 0..N {
        tmp[i] = y[i] + h * A21 * k1[i];
    }
    let k2 = f(t + C2 * h, &tmp);
    for i in 0..N {
        tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
    }
    let k3 = f(t + C3 * h, &tmp);
    for i in 0..N {
        tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    }
    let k4 = f(t + C4 * h, &tmp);
    for i in 0..N {
        tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    }
    let k5 = f(t + C5 * h, &tmp);
    for i in 0..N {
        tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    }
    let k6 = f(t + h, &tmp);
    let mut y_new = [0.0; N];
    for i in 0..N {
        y_new[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
    }
    let k7 = f(t + h, &y_new);
    let mut err: f64 = 0.0;
    for i in 0..N {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
        err = err.max((e / sc).abs());
    }
    (y_new, k7, err)
}

/// Convenience wrapper returning only the final state.
pub fn flow_to<const N: usize, F>(f: F, t0: f64, y0: [f64; N], t_end: f64, opts: &OdeOptions) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    integrate(f, t0, y0, t_end, opts, |_| Control::Continue).map(|(_, y)| y)
}
