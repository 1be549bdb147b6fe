use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::beltrami::{velocity_raw, wrap_angle, AbcParams, Point3};
use crate::error::{Error, Result};
use crate::ode::{self, Control, OdeOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    /// The two coordinates spanning a section transverse to this axis.
    pub fn complement(self) -> [usize; 2] {
        match self {
            Axis::X => [1, 2],
            Axis::Y => [0, 2],
            Axis::Z => [0, 1],
        }
    }
}

/// Sign of the section coordinate's velocity at a counted crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Crossing {
    Increasing,
    Decreasing,
}

impl Crossing {
    pub fn sign(self) -> f64 {
        match self {
            Crossing::Increasing => 1.0,
            Crossing::Decreasing => -1.0,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Crossing::Increasing => Crossing::Decreasing,
            Crossing::Decreasing => Crossing::Increasing,
        }
    }
}

/// The torus section `{q[axis] = value}` crossed in a fixed direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionSpec {
    pub axis: Axis,
    pub value: f64,
    pub direction: Crossing,
}

impl SectionSpec {
    pub fn new(axis: Axis, value: f64, direction: Crossing) -> Self {
        Self {
            axis,
            value: wrap_angle(value),
            direction,
        }
    }

    /// Section whose direction matches the flow at `q`.
    pub fn oriented_at(p: &AbcParams, axis: Axis, value: f64, q: &Point3) -> Self {
        let v = velocity_raw(p, &q.to_array())[axis.index()];
        let dir = if v >= 0.0 { Crossing::Increasing } else { Crossing::Decreasing };
        Self::new(axis, value, dir)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionHit {
    pub point: Point3,
    pub flight: f64,
    /// Unreduced end point, continuous with the start.
    pub lifted: [f64; 3],
}

const ROOT_TOL: f64 = 1e-13;

/// Locate the first directed crossing of `section` by the system `f`,
/// whose first three components are torus coordinates. Backward flow is
/// handled by passing a negated field.
pub(crate) fn first_crossing<const N: usize, F>(
    f: &F,
    y0: [f64; N],
    section: &SectionSpec,
    max_time: f64,
    opts: &OdeOptions,
) -> Result<(f64, [f64; N])>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let c = section.axis.index();
    let level = |y: &[f64; N]| (y[c] - section.value) / TAU;
    let dir = section.direction;
    let mut found: Option<(f64, f64, [f64; N], f64)> = None; // (t_lo, target, y_lo, t_guess)
    ode::integrate(f, 0.0, y0, max_time, opts, |s| {
        let g0 = level(s.y0);
        let g1 = level(s.y1);
        let mut k = match dir {
            Crossing::Increasing => g0.floor() + 1.0,
            Crossing::Decreasing => g0.ceil() - 1.0,
        };
        // a start point on the section does not count as a crossing
        let near = g0.round();
        if s.t0 == 0.0 && (g0 - near).abs() < 1e-9 {
            k = near + dir.sign();
        }
        let inside = match dir {
            Crossing::Increasing => g0 < k && k <= g1,
            Crossing::Decreasing => g1 <= k && k < g0,
        };
        if !inside {
            return Control::Continue;
        }
        let target = section.value + k * TAU;
        // bisection on the Hermite interpolant
        let (mut a, mut b) = (s.t0, s.t1);
        let fa = s.y0[c] - target;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            let fm = s.interpolate(m)[c] - target;
            if (fm < 0.0) == (fa < 0.0) && fm != 0.0 {
                a = m;
            } else {
                b = m;
            }
            if (b - a).abs() < 1e-15 * (1.0 + b.abs()) {
                break;
            }
        }
        found = Some((s.t0, target, *s.y0, 0.5 * (a + b)));
        Control::Stop
    })?;
    let Some((t_lo, target, y_lo, mut t_hit)) = found else {
        return Err(Error::NoReturn { max_time });
    };
    // polish with the true flow from the start of the bracketing step
    let fine = OdeOptions {
        h_init: None,
        ..OdeOptions::with_tol((opts.rtol * 1e-2).max(1e-14))
    };
    for _ in 0..8 {
        let y = ode::flow_to(f, t_lo, y_lo, t_hit, &fine)?;
        let r = y[c] - target;
        let v = f(t_hit, &y)[c];
        if v == 0.0 {
            break;
        }
        t_hit -= r / v;
        if r.abs() < ROOT_TOL {
            break;
        }
    }
    let mut y = ode::flow_to(f, t_lo, y_lo, t_hit, &fine)?;
    y[c] = target;
    Ok((t_hit, y))
}

/// First return of `q0` to `section` in its stated direction.
pub fn poincare_map(p: &AbcParams, section: &SectionSpec, q0: &Point3, max_time: f64, tol: f64) -> Result<SectionHit> {
    let (t, y) = first_crossing(&super::field(*p), q0.to_array(), section, max_time, &OdeOptions::with_tol(tol))?;
    Ok(SectionHit {
        point: Point3::from_array(y),
        flight: t,
        lifted: y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn saddle_circle_returns_after_4pi() {
        let p = AbcParams::new(1.0, 0.5, 0.0);
        let s = SectionSpec::new(Axis::Y, 0.0, Crossing::Decreasing);
        let q0 = Point3::new(FRAC_PI_2, 0.0, PI);
        let hit = poincare_map(&p, &s, &q0, 100.0, 1e-10).unwrap();
        assert!(hit.point.torus_distance(&q0) < 1e-9);
        assert!((hit.flight - 4.0 * PI).abs() < 1e-6);
        assert!((hit.lifted[1] + TAU).abs() < 1e-12);
    }

    #[test]
    fn section_never_crossed_in_direction() {
        // y' = -1/2 everywhere on this circle, so an increasing crossing never happens
        let p = AbcParams::new(1.0, 0.5, 0.0);
        let s = SectionSpec::new(Axis::Y, 0.0, Crossing::Increasing);
        let err = poincare_map(&p, &s, &Point3::new(FRAC_PI_2, 0.0, PI), 50.0, 1e-10);
        assert!(matches!(err, Err(Error::NoReturn { .. })));
    }

    #[test]
    fn perturbed_saddle_returns_near_4pi() {
        // start on the continued saddle orbit; the multiplier ~7e3 makes any
        // O(C) offset leave the neighbourhood within one return
        let p = AbcParams::new(1.0, 0.5, 0.05);
        let s = SectionSpec::new(Axis::Y, 0.0, Crossing::Decreasing);
        let orbit = crate::flowdyn::find_periodic_orbit(&p, &s, &Point3::new(FRAC_PI_2, 0.0, PI), &Default::default()).unwrap();
        let hit = poincare_map(&p, &s, &orbit.base, 100.0, 1e-10).unwrap();
        assert!((hit.flight - 4.0 * PI).abs() < 0.5, "{}", hit.flight);
        assert!(hit.point.torus_distance(&orbit.base) < 1e-6);
        // a start O(C) away from the orbit still returns in finite time
        let far = poincare_map(&p, &s, &Point3::new(FRAC_PI_2, 0.0, PI), 100.0, 1e-10).unwrap();
        assert!(far.flight.is_finite() && far.flight > 0.0);
    }

    #[test]
    fn crossing_from_off_section_start() {
        // on the invariant line x = pi/2, z = 0, y' = 3/2
        let p = AbcParams::new(1.0, 0.5, 0.0);
        let s = SectionSpec::new(Axis::Y, 1.5, Crossing::Increasing);
        let hit = poincare_map(&p, &s, &Point3::new(FRAC_PI_2, 0.0, 0.0), 100.0, 1e-10).unwrap();
        assert!((hit.flight - 1.0).abs() < 1e-9);
        assert!((hit.point.y - 1.5).abs() < 1e-12);
    }
}
