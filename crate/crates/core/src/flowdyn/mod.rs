//! Trajectories, Poincaré sections, periodic orbits and separatrix splitting
//! for ABC flows.

mod section;
mod shooting;
mod splitting;

pub use section::{poincare_map, Axis, Crossing, SectionHit, SectionSpec};
pub use shooting::{find_periodic_orbit, floquet, FloquetResult, Multipliers, PeriodicOrbit, ShootingOptions, Stability};
pub use splitting::{separatrix_splitting, SplittingOptions, SplittingProfile};

use serde::{Deserialize, Serialize};

use crate::beltrami::{jacobian_raw, velocity_raw, AbcParams, Point3};
use crate::error::{Error, Result};
use crate::ode::{self, Control, OdeOptions};

/// Default local error tolerance for flow integration.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub q: Point3,
}

/// Accepted integration steps of a single flowline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: AbcParams,
    pub samples: Vec<TrajectorySample>,
    pub tol: f64,
    /// Unreduced coordinates, one per sample.
    lifted: Vec<[f64; 3]>,
}

impl Trajectory {
    pub fn lifted(&self) -> &[[f64; 3]] {
        &self.lifted
    }

    /// Net number of times each coordinate wrapped around the torus.
    pub fn winding(&self) -> [i64; 3] {
        let first = self.lifted[0];
        let last = *self.lifted.last().unwrap();
        let mut w = [0; 3];
        for i in 0..3 {
            w[i] = ((last[i] / std::f64::consts::TAU).floor() - (first[i] / std::f64::consts::TAU).floor()) as i64;
        }
        w
    }

    pub fn end(&self) -> &TrajectorySample {
        self.samples.last().unwrap()
    }
}

pub(crate) fn field(p: AbcParams) -> impl Fn(f64, &[f64; 3]) -> [f64; 3] {
    move |_, q| velocity_raw(&p, q)
}

/// Flow plus variational equations `Phi' = J Phi`, `Phi` row-major.
pub(crate) fn variational_field(p: AbcParams, sign: f64) -> impl Fn(f64, &[f64; 12]) -> [f64; 12] {
    move |_, s| {
        let q = [s[0], s[1], s[2]];
        let u = velocity_raw(&p, &q);
        let j = jacobian_raw(&p, &q);
        let mut out = [0.0; 12];
        for i in 0..3 {
            out[i] = sign * u[i];
        }
        for r in 0..3 {
            for c in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    acc += j[r][k] * s[3 + 3 * k + c];
                }
                out[3 + 3 * r + c] = sign * acc;
            }
        }
        out
    }
}

/// Integrate a flowline from `q0` for time `t_end >= 0`.
pub fn integrate(p: &AbcParams, q0: &Point3, t_end: f64, tol: f64) -> Result<Trajectory> {
    integrate_lifted(p, q0.to_array(), t_end, tol)
}

/// As [`integrate`], starting from unreduced coordinates.
pub fn integrate_lifted(p: &AbcParams, q0: [f64; 3], t_end: f64, tol: f64) -> Result<Trajectory> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidInput(format!("t_end must be finite and >= 0, got {t_end}")));
    }
    let mut samples = vec![TrajectorySample {
        t: 0.0,
        q: Point3::from_array(q0),
    }];
    let mut lifted = vec![q0];
    ode::integrate(field(*p), 0.0, q0, t_end, &OdeOptions::with_tol(tol), |s| {
        samples.push(TrajectorySample {
            t: s.t1,
            q: Point3::from_array(*s.y1),
        });
        lifted.push(*s.y1);
        Control::Continue
    })?;
    Ok(Trajectory {
        params: *p,
        samples,
        tol,
        lifted,
    })
}

/// First integral `H = -B sin x - A cos z` of the `C = 0` field.
pub fn integrable_hamiltonian(p: &AbcParams, q: &Point3) -> f64 {
    -p.b * q.x.sin() - p.a * q.z.cos()
}

/// Largest deviation of `H` from its initial value along a `C = 0` trajectory.
pub fn conserved_quantity_c0(traj: &Trajectory) -> Result<f64> {
    let p = traj.params;
    if p.c != 0.0 {
        return Err(Error::WrongParams { c: p.c });
    }
    let h0 = integrable_hamiltonian(&p, &traj.samples[0].q);
    Ok(traj
        .samples
        .iter()
        .map(|s| (integrable_hamiltonian(&p, &s.q) - h0).abs())
        .fold(0.0, f64::max))
}
