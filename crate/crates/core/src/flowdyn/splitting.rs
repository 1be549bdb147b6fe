//! Direct measurement of the splitting between the unstable and stable
//! manifolds of the saddle orbit through `(pi/2, y, pi)`.
//!
//! At `C = 0` the `(x, z)` motion is Hamiltonian and the manifolds coincide
//! along the level set through the saddle. Both are grown from a fundamental
//! domain of the return map to `y = 0` and intersected with the plane
//! `x = x_saddle + pi`, giving curves `z_u(y)` and `z_s(y)`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::section::{first_crossing, Axis, Crossing, SectionSpec};
use super::shooting::{eigenvector2, find_periodic_orbit, return_with_jacobian, PeriodicOrbit, ShootingOptions};
use crate::beltrami::{angle_diff, velocity_raw, wrap_angle, AbcParams, Point3};
use crate::error::{Error, Result};
use crate::ode::OdeOptions;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplittingOptions {
    /// Distance of the fundamental domain from the saddle orbit.
    pub offset: f64,
    pub ode_tol: f64,
    /// Largest increment of `C` per continuation step of the saddle orbit.
    pub continuation_step: f64,
    pub max_time: f64,
}

impl Default for SplittingOptions {
    fn default() -> Self {
        Self {
            offset: 1e-7,
            ode_tol: 1e-12,
            continuation_step: 0.0125,
            max_time: 200.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplittingProfile {
    pub c: f64,
    /// Sample angles `y` on the transversal, uniform in `[0, 2 pi)`.
    pub section_param: Vec<f64>,
    /// `z_u(y) - z_s(y)` on the transversal `x = x_saddle + pi`.
    pub signed_distance: Vec<f64>,
}

impl SplittingProfile {
    pub fn max_abs(&self) -> f64 {
        self.signed_distance.iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    /// Number of sign changes around the closed loop of samples, ignoring
    /// samples with `|d| <= floor` (those sitting on a zero).
    pub fn sign_changes(&self, floor: f64) -> usize {
        let signs: Vec<bool> = self
            .signed_distance
            .iter()
            .filter(|d| d.abs() > floor)
            .map(|d| *d > 0.0)
            .collect();
        if signs.len() < 2 {
            return 0;
        }
        (0..signs.len()).filter(|&i| signs[i] != signs[(i + 1) % signs.len()]).count()
    }
}

/// Continue the saddle orbit `(pi/2, y, pi)` from `C = 0` to `c`.
fn continue_saddle(b: f64, c: f64, opts: &SplittingOptions) -> Result<PeriodicOrbit> {
    let steps = ((c / opts.continuation_step).ceil() as usize).max(1);
    let shoot = ShootingOptions {
        ode_tol: opts.ode_tol,
        max_time: opts.max_time,
        ..ShootingOptions::default()
    };
    let mut guess = Point3::new(PI / 2.0, 0.0, PI);
    let mut orbit = None;
    for k in 0..=steps {
        let ck = c * k as f64 / steps as f64;
        let p = AbcParams::new(1.0, b, ck);
        let section = SectionSpec::oriented_at(&p, Axis::Y, 0.0, &guess);
        let o = find_periodic_orbit(&p, &section, &guess, &shoot).map_err(|e| match e {
            Error::NoConvergence { .. } | Error::NoReturn { .. } => Error::NoConvergence {
                iterations: shoot.max_iter,
                residual: f64::NAN,
            },
            other => other,
        })?;
        guess = o.base;
        orbit = Some(o);
    }
    Ok(orbit.unwrap())
}

struct Branch {
    params: AbcParams,
    base: [f64; 2],
    dir: [f64; 2],
    /// ratio between consecutive points of the fundamental domain
    ratio: f64,
    time_sign: f64,
    target: SectionSpec,
}

impl Branch {
    /// Lifted y and wrapped z where the manifold leaf with parameter
    /// `sigma` meets the transversal.
    fn eval(&self, sigma: f64, opts: &SplittingOptions) -> Result<(f64, f64)> {
        let s = opts.offset * self.ratio.powf(sigma);
        let q0 = [self.base[0] + s * self.dir[0], 0.0, self.base[1] + s * self.dir[1]];
        let p = self.params;
        let sign = self.time_sign;
        let f = move |_: f64, q: &[f64; 3]| {
            let u = velocity_raw(&p, q);
            [sign * u[0], sign * u[1], sign * u[2]]
        };
        let (_, y) = first_crossing(&f, q0, &self.target, opts.max_time, &OdeOptions::with_tol(opts.ode_tol))?;
        Ok((y[1], wrap_angle(y[2])))
    }

    /// `z` on the transversal as a function of the angle `y`, sampled at `ys`.
    fn profile(&self, ys: &[f64], opts: &SplittingOptions) -> Result<Vec<f64>> {
        let m = (4 * ys.len()).max(64);
        let mut sig = Vec::with_capacity(m + 1);
        let mut yl = Vec::with_capacity(m + 1);
        let mut prev: Option<f64> = None;
        for i in 0..=m {
            let sigma = i as f64 / m as f64;
            let (y, _) = self.eval(sigma, opts)?;
            let y = match prev {
                None => y,
                Some(p) => p + angle_diff(y, p),
            };
            prev = Some(y);
            sig.push(sigma);
            yl.push(y);
        }
        let mut out = Vec::with_capacity(ys.len());
        for &target in ys {
            out.push(self.solve_for(target, &sig, &yl, opts)?);
        }
        Ok(out)
    }

    fn solve_for(&self, target: f64, sig: &[f64], yl: &[f64], opts: &SplittingOptions) -> Result<f64> {
        // find a bracketing interval for some lift of the target angle
        for i in 0..sig.len() - 1 {
            let (y0, y1) = (yl[i], yl[i + 1]);
            let lo = y0.min(y1);
            let hi = y0.max(y1);
            let k = ((lo - target) / TAU).ceil();
            let t = target + k * TAU;
            if t > hi {
                continue;
            }
            // Illinois regula falsi on sigma
            let (mut a, mut b) = (sig[i], sig[i + 1]);
            let (mut fa, mut fb) = (y0 - t, y1 - t);
            if fa == 0.0 {
                return Ok(self.eval(a, opts)?.1);
            }
            let mut side = 0;
            let mut z = f64::NAN;
            for _ in 0..100 {
                let m = if fb != fa { b - fb * (b - a) / (fb - fa) } else { 0.5 * (a + b) };
                let (ym, zm) = self.eval(m, opts)?;
                let ym = yl[i] + angle_diff(ym, yl[i]);
                let fm = ym - t;
                z = zm;
                if fm.abs() < 1e-12 || (b - a).abs() < 1e-15 {
                    break;
                }
                if (fm < 0.0) == (fb < 0.0) {
                    b = m;
                    fb = fm;
                    if side == -1 {
                        fa /= 2.0;
                    }
                    side = -1;
                } else {
                    a = m;
                    fa = fm;
                    if side == 1 {
                        fb /= 2.0;
                    }
                    side = 1;
                }
            }
            return Ok(z);
        }
        Err(Error::NoConvergence {
            iterations: 0,
            residual: f64::NAN,
        })
    }
}

/// Signed splitting distance of the saddle-orbit manifolds for `(1, B, c)`.
pub fn separatrix_splitting(p_base: &AbcParams, c: f64, n_samples: usize, opts: &SplittingOptions) -> Result<SplittingProfile> {
    if p_base.a != 1.0 || p_base.c != 0.0 || !(p_base.b > 0.0 && p_base.b < 1.0) {
        return Err(Error::InvalidInput(format!(
            "base parameters must be (1, B, 0) with 0 < B < 1, got ({}, {}, {})",
            p_base.a, p_base.b, p_base.c
        )));
    }
    if !(c >= 0.0) || n_samples == 0 {
        return Err(Error::InvalidInput("need C >= 0 and at least one sample".into()));
    }
    let orbit = continue_saddle(p_base.b, c, opts)?;
    let p = orbit.params;
    let section = orbit.section;
    let b = orbit.base.to_array();
    let u = [b[0], b[2]];
    let fwd = return_with_jacobian(&p, &section, u, 1.0, opts.max_time, opts.ode_tol)?;
    let bwd = return_with_jacobian(&p, &section, u, -1.0, opts.max_time, opts.ode_tol)?;
    let lu = dominant(&fwd.jac);
    let ls_inv = dominant(&bwd.jac);
    if !(lu.abs() > 1.0 && ls_inv.abs() > 1.0) {
        return Err(Error::NoConvergence {
            iterations: 0,
            residual: f64::NAN,
        });
    }
    // both branches leave/enter the saddle on the side z < z_saddle
    let orient = |v: [f64; 2]| if v[1] > 0.0 { [-v[0], -v[1]] } else { v };
    let eu = orient(eigenvector2(&fwd.jac, lu));
    let es = orient(eigenvector2(&bwd.jac, ls_inv));
    let unstable = Branch {
        params: p,
        base: u,
        dir: eu,
        ratio: lu.abs(),
        time_sign: 1.0,
        target: SectionSpec::new(Axis::X, b[0] + PI, Crossing::Increasing),
    };
    let stable = Branch {
        params: p,
        base: u,
        dir: es,
        ratio: ls_inv.abs(),
        time_sign: -1.0,
        target: SectionSpec::new(Axis::X, b[0] - PI, Crossing::Decreasing),
    };
    let ys: Vec<f64> = (0..n_samples).map(|i| TAU * i as f64 / n_samples as f64).collect();
    let zu = unstable.profile(&ys, opts)?;
    let zs = stable.profile(&ys, opts)?;
    let signed_distance = zu.iter().zip(&zs).map(|(a, b)| angle_diff(*a, *b)).collect();
    Ok(SplittingProfile {
        c,
        section_param: ys,
        signed_distance,
    })
}

fn dominant(m: &[[f64; 2]; 2]) -> f64 {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr / 4.0 - det;
    tr / 2.0 + tr.signum() * disc.max(0.0).sqrt()
}
