//! Characteristic foliations in the model contact structure
//! `lambda = dz + r^2 dtheta` on `R^2 x [-1, 1]`, and annuli whose
//! characteristic foliation realizes a prescribed circle map as monodromy.
//!
//! An annulus is the graph `r = sqrt(g(theta, z))` over `S^1 x [-1, 1]`.
//! On the cylinder `r = const` the characteristic line has slope
//! `dz/dtheta = -r^2`, so leaves of the graph satisfy `dtheta/dz = -1/g`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions};

/// Number of lift samples used by [`CircleMap`] constructors.
pub const CIRCLE_SAMPLES: usize = 256;
/// Default `(n_theta, n_z)` grid of [`annulus_from_monodromy`].
pub const DEFAULT_GRID: (usize, usize) = (256, 129);
/// Default error tolerance for leaf integration.
pub const DEFAULT_LEAF_TOL: f64 = 1e-8;
/// Smallest sine of the angle between surface normal and contact normal
/// still counted as transverse.
pub const TANGENCY_SINE: f64 = 1e-6;

/// Slope `dz/dtheta` of the characteristic line on the cylinder of radius `r`.
pub fn characteristic_slope(r: f64) -> f64 {
    -r * r
}

/// Orientation-preserving circle map, stored as uniform samples of a lift
/// `F` on `[0, 2 pi)` with `F(theta + 2 pi) = F(theta) + 2 pi`, and evaluated
/// by periodic monotone cubic (Fritsch-Carlson) interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleMap {
    lift: Vec<f64>,
    #[serde(skip)]
    slopes: Vec<f64>,
}

impl CircleMap {
    /// Build from lift samples at `theta_i = 2 pi i / N`.
    pub fn from_lift(lift: Vec<f64>) -> Result<Self> {
        let n = lift.len();
        if n < 4 {
            return Err(Error::InvalidInput(format!("need at least 4 lift samples, got {n}")));
        }
        if lift.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("lift samples must be finite".into()));
        }
        let h = TAU / n as f64;
        for i in 0..n {
            let next = if i + 1 < n { lift[i + 1] } else { lift[0] + TAU };
            if !(next > lift[i]) {
                return Err(Error::NotMonotone { theta: i as f64 * h });
            }
        }
        let slopes = pchip_slopes(&lift, h);
        Ok(Self { lift, slopes })
    }

    /// Sample a lift given as a closure.
    pub fn from_fn(f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_lift((0..CIRCLE_SAMPLES).map(|i| f(TAU * i as f64 / CIRCLE_SAMPLES as f64)).collect())
    }

    pub fn rotation(delta: f64) -> Self {
        Self::from_fn(|t| t + delta).expect("rotations are monotone")
    }

    pub fn identity() -> Self {
        Self::rotation(0.0)
    }

    /// `self` after `inner`, sampled on the grid of `self`.
    pub fn compose(&self, inner: &CircleMap) -> Result<Self> {
        let n = self.lift.len();
        Self::from_lift((0..n).map(|i| self.eval(inner.eval(self.theta(i)))).collect())
    }

    pub fn len(&self) -> usize {
        self.lift.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lift.is_empty()
    }

    pub fn theta(&self, i: usize) -> f64 {
        TAU * i as f64 / self.lift.len() as f64
    }

    pub fn lift_samples(&self) -> &[f64] {
        &self.lift
    }

    /// Lift evaluated at any real `theta`.
    pub fn eval(&self, theta: f64) -> f64 {
        let n = self.lift.len();
        let h = TAU / n as f64;
        let turns = (theta / TAU).floor();
        let local = theta - turns * TAU;
        let k = ((local / h).floor() as usize).min(n - 1);
        let s = (local - k as f64 * h) / h;
        let (y0, d0) = (self.lift[k], self.slopes[k]);
        let (y1, d1) = if k + 1 < n {
            (self.lift[k + 1], self.slopes[k + 1])
        } else {
            (self.lift[0] + TAU, self.slopes[0])
        };
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        turns * TAU + h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
    }

    /// Derivative of the interpolant at the samples.
    pub fn sample_derivatives(&self) -> &[f64] {
        &self.slopes
    }

    /// Sup-norm distance between lifts, minimized over integer shifts by
    /// `2 pi` (so two lifts of the same circle map are at distance zero).
    /// Compared on the samples of `self`.
    pub fn lift_distance(&self, other: &CircleMap) -> f64 {
        let diffs: Vec<f64> = (0..self.len()).map(|i| self.lift[i] - other.eval(self.theta(i))).collect();
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        let shift = (mean / TAU).round() * TAU;
        diffs.iter().fold(0.0, |m, d| m.max((d - shift).abs()))
    }
}

/// Fritsch-Carlson slopes for periodic data with lift offset `2 pi`.
fn pchip_slopes(lift: &[f64], h: f64) -> Vec<f64> {
    let n = lift.len();
    let at = |i: isize| -> f64 {
        let k = i.rem_euclid(n as isize) as usize;
        lift[k] + TAU * (i.div_euclid(n as isize)) as f64
    };
    (0..n as isize)
        .map(|i| {
            let dl = (at(i) - at(i - 1)) / h;
            let dr = (at(i + 1) - at(i)) / h;
            // both secants are positive for a monotone lift
            2.0 * dl * dr / (dl + dr)
        })
        .collect()
}

/// Graph `r = sqrt(g(theta, z))` over a uniform `(theta, z)` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSurface {
    pub n_theta: usize,
    pub n_z: usize,
    pub epsilon: f64,
    /// Row-major in `z`: `g[j * n_theta + i] = g(theta_i, z_j)`.
    pub g: Vec<f64>,
    /// Integer number of extra turns of each leaf; leaves from `(theta, -1)`
    /// end at `F(theta) + 2 pi winding`.
    pub winding: i64,
}

impl AnnulusSurface {
    /// Sample `g` on the grid; boundary rows are set to `epsilon^2`.
    pub fn from_fn(n_theta: usize, n_z: usize, epsilon: f64, g: impl Fn(f64, f64) -> f64) -> Result<Self> {
        check_grid(n_theta, n_z, epsilon)?;
        let mut out = Self {
            n_theta,
            n_z,
            epsilon,
            g: vec![0.0; n_theta * n_z],
            winding: 0,
        };
        for j in 0..n_z {
            for i in 0..n_theta {
                let v = if j == 0 || j + 1 == n_z {
                    epsilon * epsilon
                } else {
                    g(out.theta(i), out.z(j))
                };
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::SlopeSignViolation {
                        theta: out.theta(i),
                        z: out.z(j),
                    });
                }
                out.g[j * n_theta + i] = v;
            }
        }
        Ok(out)
    }

    pub fn theta(&self, i: usize) -> f64 {
        TAU * i as f64 / self.n_theta as f64
    }

    pub fn z(&self, j: usize) -> f64 {
        -1.0 + 2.0 * j as f64 / (self.n_z - 1) as f64
    }

    pub fn g_grid(&self, i: usize, j: usize) -> f64 {
        self.g[j * self.n_theta + i]
    }

    /// Radius `sqrt(g)` at a grid point.
    pub fn radius(&self, i: usize, j: usize) -> f64 {
        self.g_grid(i, j).sqrt()
    }

    /// Tensor-product four-point Lagrange interpolation of `g`, periodic in
    /// `theta`, one-sided near `z = +-1`.
    pub fn g_at(&self, theta: f64, z: f64) -> f64 {
        let ht = TAU / self.n_theta as f64;
        let hz = 2.0 / (self.n_z - 1) as f64;
        let ut = theta.rem_euclid(TAU) / ht;
        let it = ut.floor() as isize;
        let wt = lagrange4(ut - (it - 1) as f64);
        let uz = (z + 1.0) / hz;
        let jz = (uz.floor() as isize - 1).clamp(0, self.n_z as isize - 4);
        let wz = lagrange4(uz - jz as f64);
        let mut acc = 0.0;
        for (b, wzb) in wz.iter().enumerate() {
            let row = (jz as usize + b) * self.n_theta;
            let mut r = 0.0;
            for (a, wta) in wt.iter().enumerate() {
                let col = (it - 1 + a as isize).rem_euclid(self.n_theta as isize) as usize;
                r += wta * self.g[row + col];
            }
            acc += wzb * r;
        }
        acc
    }

    /// Cartesian point of the surface over `(theta, z)`.
    pub fn point(&self, theta: f64, z: f64) -> [f64; 3] {
        let r = self.g_at(theta, z).max(0.0).sqrt();
        [r * theta.cos(), r * theta.sin(), z]
    }
}

/// Weights of the cubic through nodes `0, 1, 2, 3` evaluated at `u`.
fn lagrange4(u: f64) -> [f64; 4] {
    let (a, b, c, d) = (u, u - 1.0, u - 2.0, u - 3.0);
    [-b * c * d / 6.0, a * c * d / 2.0, -a * b * d / 2.0, a * b * c / 6.0]
}

fn check_grid(n_theta: usize, n_z: usize, eps: f64) -> Result<()> {
    if n_theta < 4 || n_z < 4 {
        return Err(Error::InvalidInput(format!("grid must be at least 4 x 4, got {n_theta} x {n_z}")));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {eps}")));
    }
    Ok(())
}

/// Leaf family over `s = (z + 1) / 2`:
/// `theta(s) = theta0 + m s + (D - m)(3 s^2 - 2 s^3)` with `m = -2 / eps^2`
/// and `D = F(theta0) - theta0 + 2 pi winding`. Strictly decreasing in `s`
/// iff `D < m / 3`; strictly increasing in `theta0` because `F' > 0`.
struct LeafFamily<'a> {
    f: &'a CircleMap,
    m: f64,
    winding: i64,
}

impl LeafFamily<'_> {
    fn drop(&self, theta0: f64) -> f64 {
        self.f.eval(theta0) - theta0 + TAU * self.winding as f64
    }

    fn theta(&self, theta0: f64, s: f64) -> f64 {
        let phi = s * s * (3.0 - 2.0 * s);
        theta0 + self.m * s + (self.drop(theta0) - self.m) * phi
    }

    fn dtheta_ds(&self, theta0: f64, s: f64) -> f64 {
        self.m + 6.0 * s * (1.0 - s) * (self.drop(theta0) - self.m)
    }

    /// Start angle of the leaf through `(theta, s)`.
    fn start_of(&self, theta: f64, s: f64) -> f64 {
        // theta(s) - theta0 lies within 2 pi of its value for the mean drop
        let guess = theta - self.theta(theta, s) + theta;
        let (mut a, mut b) = (guess - TAU, guess + TAU);
        while self.theta(a, s) > theta {
            a -= TAU;
        }
        while self.theta(b, s) < theta {
            b += TAU;
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if self.theta(mid, s) < theta {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    }
}

/// Smallest number of extra turns (largest `winding`) compatible with
/// strictly negative leaf slopes.
fn minimal_winding(f: &CircleMap, m: f64) -> i64 {
    let n = 8 * f.len();
    let max_excess = (0..n)
        .map(|i| {
            let t = TAU * i as f64 / n as f64;
            f.eval(t) - t
        })
        .fold(f64::NEG_INFINITY, f64::max);
    // largest w with max_excess + 2 pi w < m / 3
    let mut w = ((m / 3.0 - max_excess) / TAU).floor() as i64;
    if max_excess + TAU * w as f64 >= m / 3.0 {
        w -= 1;
    }
    w
}

/// Annulus whose characteristic foliation carries each leaf from
/// `(theta, -1)` to `(f(theta), +1)`, with `g = eps^2` on both boundaries.
pub fn annulus_from_monodromy(f: &CircleMap, eps: f64, grid: (usize, usize)) -> Result<AnnulusSurface> {
    let (n_theta, n_z) = grid;
    check_grid(n_theta, n_z, eps)?;
    let m = -2.0 / (eps * eps);
    let family = LeafFamily {
        f,
        m,
        winding: minimal_winding(f, m),
    };
    let mut out = AnnulusSurface {
        n_theta,
        n_z,
        epsilon: eps,
        g: vec![eps * eps; n_theta * n_z],
        winding: family.winding,
    };
    for j in 1..n_z - 1 {
        let z = out.z(j);
        let s = 0.5 * (z + 1.0);
        for i in 0..n_theta {
            let theta = out.theta(i);
            let theta0 = family.start_of(theta, s);
            let slope = family.dtheta_ds(theta0, s);
            // dtheta/dz = 2 dtheta/ds = -1/g
            let g = -2.0 / slope;
            if !(slope < 0.0) || !g.is_finite() {
                return Err(Error::SlopeSignViolation { theta, z });
            }
            out.g[j * n_theta + i] = g;
        }
    }
    Ok(out)
}

/// Boundary-to-boundary map obtained by following `dtheta/dz = -1/g` from
/// `z = -1` to `z = +1`, sampled at [`CIRCLE_SAMPLES`] start angles.
pub fn annulus_monodromy(a: &AnnulusSurface, tol: f64) -> Result<CircleMap> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    if let Some(k) = a.g.iter().position(|g| !(*g > 0.0)) {
        return Err(Error::SlopeSignViolation {
            theta: a.theta(k % a.n_theta),
            z: a.z(k / a.n_theta),
        });
    }
    let opts = OdeOptions {
        h_max: 0.1,
        ..OdeOptions::with_tol(tol)
    };
    let mut lift = Vec::with_capacity(CIRCLE_SAMPLES);
    for i in 0..CIRCLE_SAMPLES {
        let theta0 = TAU * i as f64 / CIRCLE_SAMPLES as f64;
        let y = ode::flow_to(|z, th: &[f64; 1]| [-1.0 / a.g_at(th[0], z)], -1.0, [theta0], 1.0, &opts)?;
        lift.push(y[0]);
    }
    CircleMap::from_lift(lift)
}

/// Result of a transversality test against `ker lambda`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransversalityReport {
    /// Parameter pairs at which the tangent plane is (numerically) `ker lambda`.
    pub locus: Vec<(f64, f64)>,
    /// Smallest sine of the angle between surface normal and contact normal.
    pub min_sine: f64,
}

impl TransversalityReport {
    pub fn is_transverse(&self) -> bool {
        self.locus.is_empty()
    }
}

/// Contact normal `(-y, x, 1)` of `lambda = dz + x dy - y dx`.
fn contact_normal(p: &[f64; 3]) -> [f64; 3] {
    [-p[1], p[0], 1.0]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: &[f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// Transversality of a parametrized surface, tested at every pair of
/// `us x vs`. Tangent vectors are central differences of `surface`.
pub fn transversality_check_surface(surface: impl Fn(f64, f64) -> [f64; 3], us: &[f64], vs: &[f64]) -> TransversalityReport {
    const H: f64 = 1e-6;
    let mut locus = Vec::new();
    let mut min_sine = f64::INFINITY;
    for &v in vs {
        for &u in us {
            let p = surface(u, v);
            let (up, um) = (surface(u + H, v), surface(u - H, v));
            let (vp, vm) = (surface(u, v + H), surface(u, v - H));
            let tu = [up[0] - um[0], up[1] - um[1], up[2] - um[2]];
            let tv = [vp[0] - vm[0], vp[1] - vm[1], vp[2] - vm[2]];
            let n = cross(&tu, &tv);
            let nu = contact_normal(&p);
            let denom = norm(&n) * norm(&nu);
            // a degenerate parametrization has no tangent plane to compare
            let sine = if denom > 0.0 { norm(&cross(&n, &nu)) / denom } else { 0.0 };
            min_sine = min_sine.min(sine);
            if sine < TANGENCY_SINE {
                locus.push((u, v));
            }
        }
    }
    TransversalityReport { locus, min_sine }
}

/// Transversality of the graph `r = sqrt(g)` at every grid point.
pub fn transversality_check(a: &AnnulusSurface) -> TransversalityReport {
    let thetas: Vec<f64> = (0..a.n_theta).map(|i| a.theta(i)).collect();
    // keep the difference stencil inside the grid at z = +-1
    let zs: Vec<f64> = (0..a.n_z).map(|j| a.z(j).clamp(-1.0 + 1e-6, 1.0 - 1e-6)).collect();
    transversality_check_surface(|t, z| a.point(t, z), &thetas, &zs)
}
