use serde::{Deserialize, Serialize};

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};

use super::section::{first_crossing, SectionSpec};
use super::variational_field;
use crate::beltrami::{angle_diff, AbcParams, Point3};
use crate::error::{Error, Result};
use crate::ode::OdeOptions;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    /// Required return residual `|Phi_T(base) - base|`.
    pub tol: f64,
    /// Local error tolerance of the underlying integrations.
    pub ode_tol: f64,
    pub max_time: f64,
    pub max_iter: usize,
    /// Cap on the Newton step length in section coordinates.
    pub max_step: f64,
    /// Intermediate sections used to globalize the Newton iteration; 1
    /// disables the multiple-shooting phase.
    pub segments: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            ode_tol: 1e-12,
            max_time: 200.0,
            max_iter: 50,
            max_step: 0.5,
            segments: 8,
        }
    }
}

/// Transverse Floquet multipliers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Multipliers {
    /// Expanding multiplier first.
    Real { large: f64, small: f64 },
    /// Complex-conjugate pair `re +- i im`.
    Complex { re: f64, im: f64 },
}

impl Multipliers {
    pub fn product(&self) -> f64 {
        match *self {
            Multipliers::Real { large, small } => large * small,
            Multipliers::Complex { re, im } => re * re + im * im,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Hyperbolic,
    Elliptic,
    Parabolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloquetResult {
    pub multipliers: Multipliers,
    pub stability: Stability,
    /// Linearized return map in the section coordinates.
    pub monodromy: [[f64; 2]; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub params: AbcParams,
    pub section: SectionSpec,
    pub base: Point3,
    pub period: f64,
    pub multipliers: Multipliers,
    pub stability: Stability,
    pub residual: f64,
    pub iterations: usize,
}

pub(crate) struct ReturnData {
    pub start: [f64; 3],
    pub end: [f64; 3],
    pub flight: f64,
    /// Return-map Jacobian in section coordinates.
    pub jac: [[f64; 2]; 2],
}

/// Flow the point with transverse coordinates `u` on `{q[axis] = from}` to
/// the first directed crossing of `to`, with the Jacobian of that transfer
/// map from the variational equations. `time_sign = -1` flows backwards.
pub(crate) fn transfer_with_jacobian(
    p: &AbcParams,
    from: f64,
    to: &SectionSpec,
    u: [f64; 2],
    time_sign: f64,
    max_time: f64,
    ode_tol: f64,
) -> Result<ReturnData> {
    let comp = to.axis.complement();
    let c = to.axis.index();
    let mut start = [0.0; 3];
    start[c] = from;
    start[comp[0]] = u[0];
    start[comp[1]] = u[1];
    let mut y0 = [0.0; 12];
    y0[..3].copy_from_slice(&start);
    for i in 0..3 {
        y0[3 + 4 * i] = 1.0;
    }
    let f = variational_field(*p, time_sign);
    let (flight, y) = first_crossing(&f, y0, to, max_time, &OdeOptions::with_tol(ode_tol))?;
    let end = [y[0], y[1], y[2]];
    let v = f(0.0, &y);
    let mut full = [[0.0; 3]; 3];
    for r in 0..3 {
        for col in 0..3 {
            let m_rc = y[3 + 3 * r + col];
            let m_cc = y[3 + 3 * c + col];
            full[r][col] = m_rc - v[r] / v[c] * m_cc;
        }
    }
    let jac = [
        [full[comp[0]][comp[0]], full[comp[0]][comp[1]]],
        [full[comp[1]][comp[0]], full[comp[1]][comp[1]]],
    ];
    Ok(ReturnData {
        start,
        end,
        flight,
        jac,
    })
}

/// Return map of the section point with coordinates `u`, plus its Jacobian.
/// `time_sign = -1` gives the inverse map.
pub(crate) fn return_with_jacobian(
    p: &AbcParams,
    section: &SectionSpec,
    u: [f64; 2],
    time_sign: f64,
    max_time: f64,
    ode_tol: f64,
) -> Result<ReturnData> {
    let target = if time_sign < 0.0 {
        SectionSpec {
            direction: section.direction.reversed(),
            ..*section
        }
    } else {
        *section
    };
    transfer_with_jacobian(p, section.value, &target, u, time_sign, max_time, ode_tol)
}

fn wrapped_mismatch(d: &ReturnData, comp: [usize; 2]) -> [f64; 2] {
    [
        angle_diff(d.end[comp[0]], d.start[comp[0]]),
        angle_diff(d.end[comp[1]], d.start[comp[1]]),
    ]
}

fn residual3(d: &ReturnData) -> f64 {
    (0..3).map(|i| angle_diff(d.end[i], d.start[i]).powi(2)).sum::<f64>().sqrt()
}

/// Residual below which multiple shooting hands over to single shooting.
const HANDOVER: f64 = 1e-6;

/// Damped Newton on the cyclic multiple-shooting system whose nodes start on
/// the straight circle through `u0` along the section axis. Returns the
/// node on the original section.
fn multiple_shooting(p: &AbcParams, section: &SectionSpec, u0: [f64; 2], opts: &ShootingOptions) -> Result<[f64; 2]> {
    let m = opts.segments;
    let comp = section.axis.complement();
    let sgn = section.direction.sign();
    let values: Vec<f64> = (0..m)
        .map(|k| crate::beltrami::wrap_angle(section.value + sgn * TAU * k as f64 / m as f64))
        .collect();
    let mut nodes = vec![u0; m];
    let evaluate = |nodes: &[[f64; 2]]| -> Result<(Vec<ReturnData>, DVector<f64>)> {
        let mut segs = Vec::with_capacity(m);
        let mut r = DVector::zeros(2 * m);
        for k in 0..m {
            let to = SectionSpec {
                value: values[(k + 1) % m],
                ..*section
            };
            let d = transfer_with_jacobian(p, values[k], &to, nodes[k], 1.0, opts.max_time, opts.ode_tol)?;
            let next = nodes[(k + 1) % m];
            r[2 * k] = angle_diff(d.end[comp[0]], next[0]);
            r[2 * k + 1] = angle_diff(d.end[comp[1]], next[1]);
            segs.push(d);
        }
        Ok((segs, r))
    };
    let (mut segs, mut r) = evaluate(&nodes)?;
    for _ in 0..opts.max_iter {
        let norm = r.norm();
        if norm < HANDOVER {
            break;
        }
        let mut jac = DMatrix::zeros(2 * m, 2 * m);
        for (k, d) in segs.iter().enumerate() {
            let kn = (k + 1) % m;
            for a in 0..2 {
                for b in 0..2 {
                    jac[(2 * k + a, 2 * k + b)] += d.jac[a][b];
                }
                jac[(2 * k + a, 2 * kn + a)] -= 1.0;
            }
        }
        let Some(mut step) = jac.lu().solve(&(-&r)) else {
            break;
        };
        let longest = (0..m).map(|k| step[2 * k].hypot(step[2 * k + 1])).fold(0.0, f64::max);
        if longest > opts.max_step {
            step *= opts.max_step / longest;
        }
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..12 {
            let trial: Vec<[f64; 2]> = (0..m)
                .map(|k| [nodes[k][0] + lambda * step[2 * k], nodes[k][1] + lambda * step[2 * k + 1]])
                .collect();
            if let Ok((s2, r2)) = evaluate(&trial) {
                if r2.norm() < norm {
                    nodes = trial;
                    segs = s2;
                    r = r2;
                    improved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok(nodes[0])
}

/// Newton shooting on `P(u) - u` in the section coordinates.
///
/// With `segments > 1` the guess is first refined by multiple shooting over
/// evenly spaced parallel sections, which keeps each Newton linearization
/// inside its domain of validity for strongly unstable orbits.
pub fn find_periodic_orbit(
    p: &AbcParams,
    section: &SectionSpec,
    guess: &Point3,
    opts: &ShootingOptions,
) -> Result<PeriodicOrbit> {
    let comp = section.axis.complement();
    let g = guess.to_array();
    let mut u = [g[comp[0]], g[comp[1]]];
    if opts.segments > 1 {
        if let Ok(refined) = multiple_shooting(p, section, u, opts) {
            u = refined;
        }
    }
    let mut data = return_with_jacobian(p, section, u, 1.0, opts.max_time, opts.ode_tol)?;
    let mut res = residual3(&data);
    for iter in 0..=opts.max_iter {
        if res < opts.tol {
            let base = Point3::from_array(data.start);
            let fl = floquet_from(p, section, &data, opts)?;
            return Ok(PeriodicOrbit {
                params: *p,
                section: *section,
                base,
                period: data.flight,
                multipliers: fl.multipliers,
                stability: fl.stability,
                residual: res,
                iterations: iter,
            });
        }
        if iter == opts.max_iter {
            break;
        }
        let fvec = wrapped_mismatch(&data, comp);
        let a = [
            [data.jac[0][0] - 1.0, data.jac[0][1]],
            [data.jac[1][0], data.jac[1][1] - 1.0],
        ];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let mut step = [
            -(a[1][1] * fvec[0] - a[0][1] * fvec[1]) / det,
            -(-a[1][0] * fvec[0] + a[0][0] * fvec[1]) / det,
        ];
        let len = step[0].hypot(step[1]);
        if len > opts.max_step {
            step = [step[0] * opts.max_step / len, step[1] * opts.max_step / len];
        }
        // backtrack on the residual; fall back to the shortest trial
        let mut lambda = 1.0;
        let mut accepted = None;
        let mut last_ok = None;
        for _ in 0..12 {
            let trial = [u[0] + lambda * step[0], u[1] + lambda * step[1]];
            if let Ok(d) = return_with_jacobian(p, section, trial, 1.0, opts.max_time, opts.ode_tol) {
                let r = residual3(&d);
                if r < res {
                    accepted = Some((trial, d, r));
                    break;
                }
                last_ok = Some((trial, d, r));
            }
            lambda *= 0.5;
        }
        let Some((nu, nd, nr)) = accepted.or(last_ok) else {
            break;
        };
        u = nu;
        data = nd;
        res = nr;
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual: res,
    })
}

fn eigen2(m: &[[f64; 2]; 2]) -> (f64, f64) {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    (tr, tr * tr / 4.0 - det)
}

/// Dominant real eigenvalue, computed without cancellation.
fn dominant_real(m: &[[f64; 2]; 2]) -> f64 {
    let (tr, disc) = eigen2(m);
    tr / 2.0 + tr.signum() * disc.max(0.0).sqrt()
}

/// Unit eigenvector of a 2x2 matrix for a real eigenvalue.
pub(crate) fn eigenvector2(m: &[[f64; 2]; 2], lambda: f64) -> [f64; 2] {
    let a = [m[0][1], lambda - m[0][0]];
    let b = [lambda - m[1][1], m[1][0]];
    let v = if a[0].hypot(a[1]) >= b[0].hypot(b[1]) { a } else { b };
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

fn floquet_from(p: &AbcParams, section: &SectionSpec, fwd: &ReturnData, opts: &ShootingOptions) -> Result<FloquetResult> {
    let (tr, disc) = eigen2(&fwd.jac);
    let (multipliers, stability) = if disc < 0.0 {
        let m = Multipliers::Complex {
            re: tr / 2.0,
            im: (-disc).sqrt(),
        };
        (m, Stability::Elliptic)
    } else {
        let large = dominant_real(&fwd.jac);
        if (large.abs() - 1.0).abs() < 1e-6 {
            (Multipliers::Real { large, small: tr - large }, Stability::Parabolic)
        } else {
            // the contracting multiplier is the inverse of the dominant one of the
            // backward return map; the forward matrix loses it to cancellation
            let comp = section.axis.complement();
            let u = [fwd.start[comp[0]], fwd.start[comp[1]]];
            let bwd = return_with_jacobian(p, section, u, -1.0, opts.max_time, opts.ode_tol)?;
            let small = 1.0 / dominant_real(&bwd.jac);
            (Multipliers::Real { large, small }, Stability::Hyperbolic)
        }
    };
    Ok(FloquetResult {
        multipliers,
        stability,
        monodromy: fwd.jac,
    })
}

/// Transverse Floquet multipliers of a computed orbit, integrating the
/// variational equations with local tolerance `tol`.
pub fn floquet(p: &AbcParams, orbit: &PeriodicOrbit, tol: f64) -> Result<FloquetResult> {
    let comp = orbit.section.axis.complement();
    let b = orbit.base.to_array();
    let opts = ShootingOptions {
        ode_tol: tol,
        max_time: (orbit.period * 2.0).max(10.0),
        ..ShootingOptions::default()
    };
    let fwd = return_with_jacobian(p, &orbit.section, [b[comp[0]], b[comp[1]]], 1.0, opts.max_time, tol)?;
    floquet_from(p, &orbit.section, &fwd, &opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowdyn::{Axis, Crossing};
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    const HALF: AbcParams = AbcParams::new(1.0, 0.5, 0.0);

    fn ysec(dir: Crossing) -> SectionSpec {
        SectionSpec::new(Axis::Y, 0.0, dir)
    }

    #[test]
    fn shooting_finds_first_saddle() {
        let orbit = find_periodic_orbit(&HALF, &ysec(Crossing::Decreasing), &Point3::new(1.5, 0.0, 3.0), &Default::default()).unwrap();
        assert!(angle_diff(orbit.base.x, FRAC_PI_2).abs() < 1e-8);
        assert!(angle_diff(orbit.base.z, PI).abs() < 1e-8);
        assert!((orbit.period - 4.0 * PI).abs() < 1e-6);
        assert!(orbit.residual < 1e-8);
        assert_eq!(orbit.stability, Stability::Hyperbolic);
        let Multipliers::Real { large, small } = orbit.multipliers else {
            panic!("expected real multipliers");
        };
        let expected = (2.0 * SQRT_2 * PI).exp();
        assert!((large / expected - 1.0).abs() < 1e-4, "{large}");
        assert!((small * expected - 1.0).abs() < 1e-4, "{small}");
        assert!((orbit.multipliers.product() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn shooting_finds_second_saddle() {
        let orbit = find_periodic_orbit(&HALF, &ysec(Crossing::Increasing), &Point3::new(-1.5, 0.0, 0.1), &Default::default()).unwrap();
        assert!(angle_diff(orbit.base.x, 1.5 * PI).abs() < 1e-8);
        assert!(angle_diff(orbit.base.z, 0.0).abs() < 1e-8);
        assert!((orbit.period - 4.0 * PI).abs() < 1e-6);
        assert_eq!(orbit.stability, Stability::Hyperbolic);
    }

    #[test]
    fn centers_are_elliptic() {
        for (g, dir) in [((FRAC_PI_2, 0.1), Crossing::Increasing), ((1.5 * PI, PI - 0.1), Crossing::Decreasing)] {
            let orbit = find_periodic_orbit(&HALF, &ysec(dir), &Point3::new(g.0, 0.0, g.1), &Default::default()).unwrap();
            assert_eq!(orbit.stability, Stability::Elliptic);
            let Multipliers::Complex { re, im } = orbit.multipliers else {
                panic!("expected complex multipliers");
            };
            // rotation by sqrt(1/2) * period, period = 2 pi / (3/2)
            let angle = (0.5f64).sqrt() * (TAU_OVER_1_5);
            assert!((re - angle.cos()).abs() < 1e-8);
            assert!((im - angle.sin().abs()).abs() < 1e-8);
            assert!((orbit.multipliers.product() - 1.0).abs() < 1e-6);
        }
    }

    const TAU_OVER_1_5: f64 = 2.0 * PI / 1.5;

    #[test]
    fn floquet_recomputation_agrees() {
        let orbit = find_periodic_orbit(&HALF, &ysec(Crossing::Decreasing), &Point3::new(FRAC_PI_2, 0.0, PI), &Default::default()).unwrap();
        let fl = floquet(&HALF, &orbit, 1e-12).unwrap();
        assert_eq!(fl.stability, Stability::Hyperbolic);
        assert!((fl.multipliers.product() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn period_independent_of_section() {
        let a = find_periodic_orbit(&HALF, &ysec(Crossing::Decreasing), &Point3::new(1.5, 0.0, 3.0), &Default::default()).unwrap();
        let s2 = SectionSpec::new(Axis::Y, 1.0, Crossing::Decreasing);
        let b = find_periodic_orbit(&HALF, &s2, &Point3::new(1.5, 1.0, 3.0), &Default::default()).unwrap();
        assert!((a.period - b.period).abs() < 1e-8);
    }

    #[test]
    fn iteration_budget_exhausted() {
        let opts = ShootingOptions {
            max_iter: 1,
            tol: 1e-14,
            ..Default::default()
        };
        let err = find_periodic_orbit(&AbcParams::new(1.0, 1.0, 1.0), &ysec(Crossing::Increasing), &Point3::new(0.5, 0.0, 2.5), &opts);
        assert!(matches!(err, Err(Error::NoConvergence { .. }) | Err(Error::NoReturn { .. })));
    }
}
