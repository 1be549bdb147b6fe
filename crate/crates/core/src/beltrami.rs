//! ABC fields on the flat 3-torus and the associated contact form.
//!
//! The ABC field
//!
//! ```text
//! x' = A sin z + C cos y
//! y' = B sin x + A cos z
//! z' = C sin y + B cos x
//! ```
//!
//! is an eigenfield of curl with eigenvalue 1. With the flat metric the dual
//! 1-form `alpha = u . dx` therefore satisfies `d alpha = iota_u mu`, so
//! `alpha ^ d alpha = |u|^2 mu` and `u / |u|^2` is the Reeb field of `alpha`
//! wherever `u` does not vanish. The standard tight form on the unit 3-sphere
//! lives here as well.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-4;
/// Default tolerance on `|u|` for a point to count as a zero of the field.
pub const DEFAULT_ZERO_TOL: f64 = 1e-10;
/// Below this speed the Reeb normalization `u / |u|^2` is refused.
pub const SINGULAR_SPEED: f64 = 1e-8;

/// Reduce an angle into `[0, 2 pi)`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed difference `a - b` reduced into `(-pi, pi]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > std::f64::consts::PI {
        d - TAU
    } else {
        d
    }
}

/// ABC amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbcParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl AbcParams {
    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    /// True when `1 = A >= B >= C >= 0` holds exactly.
    pub fn is_normalized(&self) -> bool {
        self.a == 1.0 && self.b <= self.a && self.c <= self.b && self.c >= 0.0
    }

    /// Nonsingularity criterion `B^2 + C^2 < A^2`, evaluated on the normalized
    /// representative.
    pub fn is_nonsingular(&self) -> Result<bool> {
        let n = self.normalize()?.params;
        Ok(n.b * n.b + n.c * n.c < 1.0)
    }

    /// Reorder and rescale to `1 = A >= B >= C >= 0`.
    ///
    /// The returned [`Normalization`] carries the torus symmetry conjugating
    /// the original field to the normalized one.
    pub fn normalize(&self) -> Result<Normalization> {
        let p = [self.a, self.b, self.c];
        if p.iter().any(|v| !v.is_finite() || *v < 0.0) || p.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidParams);
        }
        // stable sort of indices by decreasing amplitude
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| p[j].partial_cmp(&p[i]).unwrap());
        let sym = Symmetry::for_parameter_order(order);
        let scale = p[order[0]];
        let params = AbcParams::new(1.0, p[order[1]] / scale, p[order[2]] / scale);
        Ok(Normalization {
            params,
            symmetry: sym,
            speed_scale: scale,
        })
    }
}

/// Affine torus map `q'_i = sign_i * q_{perm_i} + quarter_i * pi/2`.
///
/// Every permutation of (A, B, C) is realized by one of these maps without
/// reversing time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Symmetry {
    pub perm: [usize; 3],
    pub sign: [i8; 3],
    pub quarter: [u8; 3],
}

impl Symmetry {
    pub const IDENTITY: Symmetry = Symmetry {
        perm: [0, 1, 2],
        sign: [1, 1, 1],
        quarter: [0, 0, 0],
    };

    /// Symmetry sending the field with amplitudes `p` to the field with
    /// amplitudes `(p[order[0]], p[order[1]], p[order[2]])`.
    pub fn for_parameter_order(order: [usize; 3]) -> Self {
        let twisted = |perm| Symmetry {
            perm,
            sign: [1, 1, -1],
            quarter: [1, 3, 1],
        };
        let cyclic = |perm| Symmetry {
            perm,
            sign: [1, 1, 1],
            quarter: [0, 0, 0],
        };
        match order {
            [0, 1, 2] => Self::IDENTITY,
            [1, 2, 0] => cyclic([1, 2, 0]),
            [2, 0, 1] => cyclic([2, 0, 1]),
            [2, 1, 0] => twisted([0, 2, 1]),
            [0, 2, 1] => twisted([1, 0, 2]),
            [1, 0, 2] => twisted([2, 1, 0]),
            _ => unreachable!("not a permutation: {order:?}"),
        }
    }

    pub fn apply_point(&self, q: Point3) -> Point3 {
        let c = q.to_array();
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = f64::from(self.sign[i]) * c[self.perm[i]] + f64::from(self.quarter[i]) * FRAC_PI_2;
        }
        Point3::from_array(out)
    }

    pub fn apply_vector(&self, v: Vec3) -> Vec3 {
        let c = v.to_array();
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = f64::from(self.sign[i]) * c[self.perm[i]];
        }
        Vec3::from_array(out)
    }
}

/// Result of [`AbcParams::normalize`]: `u_norm(S q) = S_* u(q) / speed_scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub params: AbcParams,
    pub symmetry: Symmetry,
    pub speed_scale: f64,
}

/// Point of the 3-torus, coordinates reduced into `[0, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self {
            x: wrap_angle(x),
            y: wrap_angle(y),
            z: wrap_angle(z),
        }
    }

    pub fn from_array(c: [f64; 3]) -> Self {
        Self::new(c[0], c[1], c[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Largest coordinate-wise angular separation.
    pub fn torus_distance(&self, other: &Point3) -> f64 {
        let a = self.to_array();
        let b = other.to_array();
        (0..3).map(|i| angle_diff(a[i], b[i]).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_array(c: [f64; 3]) -> Self {
        Self::new(c[0], c[1], c[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, o: &Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn sub(&self, o: &Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn sup_norm(&self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }
}

/// Coefficients of `dx`, `dy`, `dz`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactFormValue {
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
}

impl ContactFormValue {
    pub fn apply(&self, v: &Vec3) -> f64 {
        self.ax * v.x + self.ay * v.y + self.az * v.z
    }
}

/// ABC velocity at unreduced coordinates.
#[inline]
pub fn velocity_raw(p: &AbcParams, q: &[f64; 3]) -> [f64; 3] {
    let (sx, cx) = q[0].sin_cos();
    let (sy, cy) = q[1].sin_cos();
    let (sz, cz) = q[2].sin_cos();
    [
        p.a * sz + p.c * cy,
        p.b * sx + p.a * cz,
        p.c * sy + p.b * cx,
    ]
}

/// Analytic Jacobian `d u_i / d q_j` at unreduced coordinates.
#[inline]
pub fn jacobian_raw(p: &AbcParams, q: &[f64; 3]) -> [[f64; 3]; 3] {
    let (sx, cx) = q[0].sin_cos();
    let (sy, cy) = q[1].sin_cos();
    let (sz, cz) = q[2].sin_cos();
    [
        [0.0, -p.c * sy, p.a * cz],
        [p.b * cx, 0.0, -p.a * sz],
        [-p.b * sx, p.c * cy, 0.0],
    ]
}

pub fn abc_velocity(p: &AbcParams, q: &Point3) -> Vec3 {
    Vec3::from_array(velocity_raw(p, &q.to_array()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurlMode {
    /// Uses the eigenfield identity `curl u = u`.
    ClosedForm,
    /// Central differences with step `h`.
    FiniteDifference(f64),
}

/// Central-difference Jacobian of an arbitrary field.
fn fd_jacobian<F: Fn(&[f64; 3]) -> [f64; 3]>(f: F, q: &[f64; 3], h: f64) -> [[f64; 3]; 3] {
    let mut j = [[0.0; 3]; 3];
    for col in 0..3 {
        let mut qp = *q;
        let mut qm = *q;
        qp[col] += h;
        qm[col] -= h;
        let fp = f(&qp);
        let fm = f(&qm);
        for row in 0..3 {
            j[row][col] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    j
}

fn curl_from_jacobian(j: &[[f64; 3]; 3]) -> Vec3 {
    Vec3::new(j[2][1] - j[1][2], j[0][2] - j[2][0], j[1][0] - j[0][1])
}

pub fn abc_curl(p: &AbcParams, q: &Point3, mode: CurlMode) -> Vec3 {
    match mode {
        CurlMode::ClosedForm => abc_velocity(p, q),
        CurlMode::FiniteDifference(h) => {
            let j = fd_jacobian(|x| velocity_raw(p, x), &q.to_array(), h);
            curl_from_jacobian(&j)
        }
    }
}

/// Central-difference divergence.
pub fn abc_divergence(p: &AbcParams, q: &Point3, h: f64) -> f64 {
    let j = fd_jacobian(|x| velocity_raw(p, x), &q.to_array(), h);
    j[0][0] + j[1][1] + j[2][2]
}

/// The 1-form dual to `u` under the flat metric.
pub fn abc_contact_form(p: &AbcParams, q: &Point3) -> ContactFormValue {
    let u = velocity_raw(p, &q.to_array());
    ContactFormValue {
        ax: u[0],
        ay: u[1],
        az: u[2],
    }
}

/// `(alpha ^ d alpha) / (dx ^ dy ^ dz)`, with `d alpha` from central differences.
pub fn contact_volume_density(p: &AbcParams, q: &Point3, h: f64) -> f64 {
    let raw = q.to_array();
    let alpha = Vec3::from_array(velocity_raw(p, &raw));
    let j = fd_jacobian(|x| velocity_raw(p, x), &raw, h);
    alpha.dot(&curl_from_jacobian(&j))
}

/// Residuals of the Reeb conditions for `X = u / |u|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReebResidual {
    /// `|alpha(X) - 1|`
    pub r1: f64,
    /// sup-norm of the covector `iota_X d alpha`
    pub r2: f64,
}

pub fn reeb_residual(p: &AbcParams, q: &Point3, h: f64) -> Result<ReebResidual> {
    let raw = q.to_array();
    let u = Vec3::from_array(velocity_raw(p, &raw));
    let speed = u.norm();
    if speed < SINGULAR_SPEED {
        return Err(Error::SingularPoint {
            x: q.x,
            y: q.y,
            z: q.z,
            speed,
        });
    }
    let reeb = u.scale(1.0 / (speed * speed));
    let alpha = abc_contact_form(p, q);
    let r1 = (alpha.apply(&reeb) - 1.0).abs();
    // d alpha(e_i, e_k) = d_i alpha_k - d_k alpha_i
    let j = fd_jacobian(|x| velocity_raw(p, x), &raw, h);
    let x = reeb.to_array();
    let mut r2: f64 = 0.0;
    for k in 0..3 {
        let mut s = 0.0;
        for i in 0..3 {
            s += x[i] * (j[k][i] - j[i][k]);
        }
        r2 = r2.max(s.abs());
    }
    Ok(ReebResidual { r1, r2 })
}

/// Output of [`abc_singular_points`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularityReport {
    /// Refined zeros, `|u| < tol` at each.
    pub points: Vec<Point3>,
    /// Smallest `|u|` seen on the grid and at refined local minima.
    pub min_speed_sampled: f64,
    /// Certified lower bound on `min |u|` over the whole torus, when one was
    /// established. `None` for singular fields or when certification ran out
    /// of budget.
    pub certified_lower_bound: Option<f64>,
}

impl SingularityReport {
    pub fn is_certified_nonsingular(&self) -> bool {
        self.points.is_empty() && self.certified_lower_bound.is_some_and(|b| b > 0.0)
    }
}

const MAX_SEEDS: usize = 4096;
const MAX_CERT_CELLS: usize = 4_000_000;

/// Locate zeros of the field, or certify that there are none.
///
/// Zeros are found by seeding damped Gauss-Newton from the local minima of
/// `|u|^2` on an `n^3` grid. When no zero is found, a branch-and-bound pass
/// over grid cells uses the Lipschitz bound `|grad |u|| <= sqrt(A^2+B^2+C^2)`
/// to certify a positive lower bound on `|u|`.
pub fn abc_singular_points(p: &AbcParams, grid_n: usize, tol: f64) -> Result<SingularityReport> {
    if !p.is_normalized() {
        return Err(Error::NotNormalized {
            a: p.a,
            b: p.b,
            c: p.c,
        });
    }
    if grid_n < 8 {
        return Err(Error::InvalidInput(format!("grid_n must be >= 8, got {grid_n}")));
    }
    let n = grid_n;
    let h = TAU / n as f64;
    let idx = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    let mut speed2 = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let u = velocity_raw(p, &[i as f64 * h, j as f64 * h, k as f64 * h]);
                speed2[idx(i, j, k)] = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
            }
        }
    }
    let grid_min = speed2.iter().cloned().fold(f64::INFINITY, f64::min);

    // seeds: non-strict local minima within a Lipschitz margin of the grid minimum
    let lip = (p.a * p.a + p.b * p.b + p.c * p.c).sqrt();
    let margin = {
        let s = grid_min.sqrt() + lip * h * 3f64.sqrt();
        s * s
    };
    let mut seeds: Vec<(f64, [usize; 3])> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = speed2[idx(i, j, k)];
                if v > margin {
                    continue;
                }
                let nb = [
                    idx((i + 1) % n, j, k),
                    idx((i + n - 1) % n, j, k),
                    idx(i, (j + 1) % n, k),
                    idx(i, (j + n - 1) % n, k),
                    idx(i, j, (k + 1) % n),
                    idx(i, j, (k + n - 1) % n),
                ];
                if nb.iter().all(|&m| v <= speed2[m]) {
                    seeds.push((v, [i, j, k]));
                }
            }
        }
    }
    seeds.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    seeds.truncate(MAX_SEEDS);

    let mut min_speed = grid_min.sqrt();
    let mut zeros: Vec<Point3> = Vec::new();
    for (_, [i, j, k]) in &seeds {
        let q0 = [*i as f64 * h, *j as f64 * h, *k as f64 * h];
        let (q, s) = refine_zero(p, q0, tol);
        min_speed = min_speed.min(s);
        if s < tol {
            let pt = Point3::from_array(q);
            if !zeros.iter().any(|z| z.torus_distance(&pt) < 1e-6) {
                zeros.push(pt);
            }
        }
    }
    zeros.sort_by(|a, b| {
        (a.x, a.z, a.y)
            .partial_cmp(&(b.x, b.z, b.y))
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let certified_lower_bound = if zeros.is_empty() {
        certify_lower_bound(p, n, lip)
    } else {
        None
    };
    Ok(SingularityReport {
        points: zeros,
        min_speed_sampled: min_speed,
        certified_lower_bound,
    })
}

/// Damped Gauss-Newton on `u(q) = 0` with a pseudo-inverse step, so that the
/// rank-deficient Jacobian along curves of zeros is handled.
fn refine_zero(p: &AbcParams, mut q: [f64; 3], tol: f64) -> ([f64; 3], f64) {
    let speed = |q: &[f64; 3]| {
        let u = velocity_raw(p, q);
        (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt()
    };
    let mut s = speed(&q);
    for _ in 0..100 {
        if s < tol * 1e-3 {
            break;
        }
        let u = Vector3::from(velocity_raw(p, &q));
        let j = jacobian_raw(p, &q);
        let jm = Matrix3::from_fn(|r, c| j[r][c]);
        let svd = jm.svd(true, true);
        let smax = svd.singular_values.max();
        let Ok(pinv) = svd.pseudo_inverse(1e-10 * smax.max(1e-300)) else {
            break;
        };
        let step = -(pinv * u);
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let trial = [
                q[0] + lambda * step[0],
                q[1] + lambda * step[1],
                q[2] + lambda * step[2],
            ];
            let st = speed(&trial);
            if st < s {
                q = trial;
                s = st;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (q, s)
}

/// Branch-and-bound lower bound on `min |u|`; `None` if some cell could not
/// be certified within the cell budget.
fn certify_lower_bound(p: &AbcParams, n: usize, lip: f64) -> Option<f64> {
    let h = TAU / n as f64;
    // cells centred on grid nodes, half-diagonal = h sqrt(3) / 2
    let mut stack: Vec<([f64; 3], f64)> = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                stack.push(([i as f64 * h, j as f64 * h, k as f64 * h], h));
            }
        }
    }
    let mut best = f64::INFINITY;
    let mut processed = 0usize;
    while let Some((c, side)) = stack.pop() {
        processed += 1;
        if processed > MAX_CERT_CELLS {
            return None;
        }
        let u = velocity_raw(p, &c);
        let s = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
        let bound = s - lip * side * 3f64.sqrt() / 2.0;
        if bound > 0.0 {
            best = best.min(bound);
            continue;
        }
        if side < 1e-6 {
            return None;
        }
        let half = side / 2.0;
        for dx in [-0.25, 0.25] {
            for dy in [-0.25, 0.25] {
                for dz in [-0.25, 0.25] {
                    stack.push(([c[0] + dx * side, c[1] + dy * side, c[2] + dz * side], half));
                }
            }
        }
    }
    Some(best)
}

/// Point of `R^4`, expected on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point4 {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub x4: f64,
}

impl Point4 {
    pub const fn new(x1: f64, x2: f64, x3: f64, x4: f64) -> Self {
        Self { x1, x2, x3, x4 }
    }

    pub fn norm(&self) -> f64 {
        (self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3 + self.x4 * self.x4).sqrt()
    }
}

/// Reeb field of the standard tight form at a point of `S^3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TightReeb {
    /// `X0 = 2(-x2, x1, -x4, x3)`, tangent to the Hopf fibres.
    pub reeb: [f64; 4],
    pub alpha_on_reeb: f64,
    /// sup-norm of `iota_X0 d alpha0` restricted to `T_q S^3`.
    pub kernel_residual: f64,
}

/// Evaluate `alpha0 = (x1 dx2 - x2 dx1 + x3 dx4 - x4 dx3) / 2` and its Reeb field.
pub fn std_tight_eval(q: &Point4) -> Result<TightReeb> {
    let norm = q.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotOnSphere { norm });
    }
    let x = [q.x1, q.x2, q.x3, q.x4];
    let reeb = [-2.0 * x[1], 2.0 * x[0], -2.0 * x[3], 2.0 * x[2]];
    let alpha = [-x[1] / 2.0, x[0] / 2.0, -x[3] / 2.0, x[2] / 2.0];
    let alpha_on_reeb: f64 = (0..4).map(|i| alpha[i] * reeb[i]).sum();
    // d alpha0 = dx1^dx2 + dx3^dx4, so iota_X d alpha0 = X1 dx2 - X2 dx1 + X3 dx4 - X4 dx3
    let form = [-reeb[1], reeb[0], -reeb[3], reeb[2]];
    // project onto the tangent space of the sphere (remove the radial part)
    let radial: f64 = (0..4).map(|i| form[i] * x[i]).sum::<f64>() / (norm * norm);
    let kernel_residual = (0..4)
        .map(|i| (form[i] - radial * x[i]).abs())
        .fold(0.0, f64::max);
    Ok(TightReeb {
        reeb,
        alpha_on_reeb,
        kernel_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn velocity_direct_substitution() {
        let u = abc_velocity(&AbcParams::new(1.0, 1.0, 1.0), &Point3::new(0.0, 0.0, 0.0));
        assert_eq!(u, Vec3::new(1.0, 1.0, 1.0));
        let u = abc_velocity(&AbcParams::new(1.0, 0.5, 0.0), &Point3::new(PI / 2.0, 0.0, PI));
        assert!(close(u.x, 0.0, 1e-15) && close(u.y, -0.5, 1e-15) && close(u.z, 0.0, 1e-15));
    }

    #[test]
    fn velocity_vanishes_on_circle_for_b_one() {
        let p = AbcParams::new(1.0, 1.0, 0.0);
        for k in 0..16 {
            let y = k as f64 * TAU / 16.0;
            let u = abc_velocity(&p, &Point3::new(PI / 2.0, y, PI));
            assert!(u.norm() < 1e-15);
        }
    }

    #[test]
    fn curl_closed_form_is_velocity() {
        let p = AbcParams::new(1.0, 0.3, 0.2);
        let q = Point3::new(0.1, 2.0, 4.0);
        assert_eq!(abc_curl(&p, &q, CurlMode::ClosedForm), abc_velocity(&p, &q));
    }

    #[test]
    fn curl_finite_difference_matches() {
        let p = AbcParams::new(1.0, 1.0, 1.0);
        let q = Point3::new(0.3, 0.7, 1.1);
        let fd = abc_curl(&p, &q, CurlMode::FiniteDifference(1e-4));
        assert!(fd.sub(&abc_velocity(&p, &q)).sup_norm() < 1e-6);
    }

    #[test]
    fn divergence_is_zero() {
        let d = abc_divergence(&AbcParams::new(1.0, 1.0, 1.0), &Point3::new(0.0, 0.0, 0.0), 1e-4);
        assert!(d.abs() < 1e-8);
        let d = abc_divergence(&AbcParams::new(1.0, 0.5, 0.0), &Point3::new(1.2, 2.3, 0.4), 1e-4);
        assert!(d.abs() < 1e-8);
    }

    #[test]
    fn contact_form_equals_velocity() {
        let p = AbcParams::new(1.0, 1.0, 1.0);
        let q = Point3::new(0.0, 0.0, 0.0);
        let a = abc_contact_form(&p, &q);
        assert_eq!((a.ax, a.ay, a.az), (1.0, 1.0, 1.0));
        assert_eq!(a.apply(&abc_velocity(&p, &q)), 3.0);
        let p = AbcParams::new(1.0, 0.5, 0.0);
        let q = Point3::new(PI / 2.0, 0.0, PI);
        assert!(close(abc_contact_form(&p, &q).apply(&abc_velocity(&p, &q)), 0.25, 1e-15));
    }

    #[test]
    fn contact_density_examples() {
        let h = 1e-4;
        let d = contact_volume_density(&AbcParams::new(1.0, 1.0, 1.0), &Point3::new(0.0, 0.0, 0.0), h);
        assert!(close(d, 3.0, 1e-5));
        let d = contact_volume_density(&AbcParams::new(1.0, 1.0, 0.0), &Point3::new(PI / 2.0, 0.0, PI), h);
        assert!(d.abs() < 1e-6);
        for q in [Point3::new(0.4, 1.0, 2.0), Point3::new(5.0, 3.0, 0.2)] {
            let d = contact_volume_density(&AbcParams::new(1.0, 0.0, 0.0), &q, h);
            assert!(close(d, 1.0, 1e-5));
        }
    }

    #[test]
    fn reeb_residual_examples() {
        let r = reeb_residual(&AbcParams::new(1.0, 1.0, 1.0), &Point3::new(0.0, 0.0, 0.0), 1e-4).unwrap();
        assert!(r.r1 < 1e-15);
        assert!(r.r2 < 1e-6);
        let err = reeb_residual(&AbcParams::new(1.0, 1.0, 0.0), &Point3::new(PI / 2.0, 0.0, PI), 1e-4);
        assert!(matches!(err, Err(Error::SingularPoint { .. })));
    }

    #[test]
    fn normalization_reorders_and_rescales() {
        let n = AbcParams::new(0.5, 2.0, 1.0).normalize().unwrap();
        assert_eq!(n.params, AbcParams::new(1.0, 0.5, 0.25));
        assert_eq!(n.speed_scale, 2.0);
        let twice = n.params.normalize().unwrap();
        assert_eq!(twice.params, n.params);
        assert_eq!(twice.symmetry, Symmetry::IDENTITY);
        assert_eq!(twice.speed_scale, 1.0);
        assert!(AbcParams::new(-1.0, 0.0, 0.0).normalize().is_err());
        assert!(AbcParams::new(0.0, 0.0, 0.0).normalize().is_err());
    }

    #[test]
    fn normalization_conjugates_every_ordering() {
        let base = [0.9, 0.6, 0.2];
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let pts = [
            Point3::new(0.3, 1.7, 4.1),
            Point3::new(5.5, 0.2, 2.9),
            Point3::new(2.2, 3.3, 6.0),
        ];
        for perm in perms {
            let p = AbcParams::new(base[perm[0]], base[perm[1]], base[perm[2]]);
            let n = p.normalize().unwrap();
            for q in &pts {
                let lhs = abc_velocity(&n.params, &n.symmetry.apply_point(*q));
                let rhs = n.symmetry.apply_vector(abc_velocity(&p, q)).scale(1.0 / n.speed_scale);
                assert!(lhs.sub(&rhs).sup_norm() < 1e-14, "perm {perm:?}");
            }
        }
    }

    #[test]
    fn nonsingular_certificate() {
        let rep = abc_singular_points(&AbcParams::new(1.0, 0.5, 0.5), 64, DEFAULT_ZERO_TOL).unwrap();
        assert!(rep.points.is_empty());
        assert!(rep.is_certified_nonsingular());
        assert!(rep.certified_lower_bound.unwrap() <= rep.min_speed_sampled);
    }

    #[test]
    fn constant_speed_field_has_no_zeros() {
        let rep = abc_singular_points(&AbcParams::new(1.0, 0.0, 0.0), 16, DEFAULT_ZERO_TOL).unwrap();
        assert!(rep.is_certified_nonsingular());
        assert!(close(rep.min_speed_sampled, 1.0, 1e-12));
    }

    #[test]
    fn singular_circle_is_found() {
        let rep = abc_singular_points(&AbcParams::new(1.0, 1.0, 0.0), 32, DEFAULT_ZERO_TOL).unwrap();
        assert!(!rep.points.is_empty());
        let p = AbcParams::new(1.0, 1.0, 0.0);
        let mut on_first_circle = 0;
        for q in &rep.points {
            assert!(abc_velocity(&p, q).norm() < 1e-10);
            let first = angle_diff(q.x, PI / 2.0).abs() < 1e-8 && angle_diff(q.z, PI).abs() < 1e-8;
            let second = angle_diff(q.x, 1.5 * PI).abs() < 1e-8 && angle_diff(q.z, 0.0).abs() < 1e-8;
            assert!(first || second, "{q:?}");
            on_first_circle += usize::from(first);
        }
        assert!(on_first_circle > 0);
        assert!(rep.certified_lower_bound.is_none());
    }

    #[test]
    fn singular_points_requires_normalized() {
        let err = abc_singular_points(&AbcParams::new(0.5, 1.0, 0.0), 16, 1e-10);
        assert!(matches!(err, Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn tight_reeb_examples() {
        let r = std_tight_eval(&Point4::new(1.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(r.reeb, [0.0, 2.0, 0.0, 0.0]);
        assert_eq!(r.alpha_on_reeb, 1.0);
        let r = std_tight_eval(&Point4::new(0.0, 0.0, 1.0, 0.0)).unwrap();
        assert_eq!(r.reeb, [0.0, 0.0, 0.0, 2.0]);
        assert_eq!(r.alpha_on_reeb, 1.0);
        assert!(r.kernel_residual < 1e-15);
        assert!(matches!(
            std_tight_eval(&Point4::new(1.0, 1.0, 0.0, 0.0)),
            Err(Error::NotOnSphere { .. })
        ));
    }

    #[test]
    fn wrap_helpers() {
        assert_eq!(wrap_angle(-1e-300), 0.0);
        assert!(close(wrap_angle(-PI / 2.0), 1.5 * PI, 1e-15));
        assert!(close(angle_diff(0.1, TAU - 0.1), 0.2, 1e-15));
    }
}
