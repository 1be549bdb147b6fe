//! Invariants of closed braids and embedded polylines: Gauss linking by
//! signed crossings and by exact solid angles, writhe and transverse
//! self-linking, Alexander polynomials from the reduced Burau
//! representation, and a small identification table.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::template::{cycles, BraidWord};

/// Minimum distance below which two curves are treated as intersecting.
pub const MIN_SEPARATION: f64 = 1e-9;
const PROJECTION_ATTEMPTS: usize = 32;

/// Closed polyline; the last vertex connects back to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PLCurve {
    vertices: Vec<[f64; 3]>,
}

impl PLCurve {
    pub fn new(vertices: Vec<[f64; 3]>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidInput(format!("a closed curve needs at least 3 vertices, got {n}")));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("vertices must be finite".into()));
        }
        for i in 0..n {
            if vertices[i] == vertices[(i + 1) % n] {
                return Err(Error::InvalidInput(format!("vertices {i} and {} coincide", (i + 1) % n)));
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Closed edge list `(v_i, v_{i+1})`.
    pub fn segments(&self) -> impl Iterator<Item = ([f64; 3], [f64; 3])> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }
}

fn sub3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

/// Distance between segments `p0 p1` and `q0 q1`.
fn segment_distance(p0: &[f64; 3], p1: &[f64; 3], q0: &[f64; 3], q1: &[f64; 3]) -> f64 {
    let d1 = sub3(p1, p0);
    let d2 = sub3(q1, q0);
    let r = sub3(p0, q0);
    let (a, e, f) = (dot3(&d1, &d1), dot3(&d2, &d2), dot3(&d2, &r));
    let c = dot3(&d1, &r);
    let b = dot3(&d1, &d2);
    let denom = a * e - b * b;
    let mut s = if denom > 1e-300 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((b - c) / a).clamp(0.0, 1.0);
    }
    let pc = [p0[0] + s * d1[0], p0[1] + s * d1[1], p0[2] + s * d1[2]];
    let qc = [q0[0] + t * d2[0], q0[1] + t * d2[1], q0[2] + t * d2[2]];
    norm3(&sub3(&pc, &qc))
}

/// Smallest distance between the two curves.
pub fn curve_distance(c1: &PLCurve, c2: &PLCurve) -> f64 {
    let mut best = f64::INFINITY;
    for (p0, p1) in c1.segments() {
        for (q0, q1) in c2.segments() {
            best = best.min(segment_distance(&p0, &p1, &q0, &q1));
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinkingMethod {
    SignedCrossings,
    Quadrature,
}

/// Linking number of two disjoint closed curves. `SignedCrossings` returns
/// an exact integer; `Quadrature` returns the unrounded Gauss integral.
pub fn gauss_linking(c1: &PLCurve, c2: &PLCurve, method: LinkingMethod) -> Result<f64> {
    match method {
        LinkingMethod::SignedCrossings => linking_by_crossings(c1, c2).map(|v| v as f64),
        LinkingMethod::Quadrature => linking_by_quadrature(c1, c2),
    }
}

fn check_disjoint(c1: &PLCurve, c2: &PLCurve) -> Result<()> {
    let d = curve_distance(c1, c2);
    if d <= MIN_SEPARATION {
        return Err(Error::CurvesIntersect { distance: d });
    }
    Ok(())
}

/// Gauss integral summed over segment pairs, each pair contributing its
/// exact signed solid angle over `4 pi`.
pub fn linking_by_quadrature(c1: &PLCurve, c2: &PLCurve) -> Result<f64> {
    check_disjoint(c1, c2)?;
    let mut total = 0.0;
    for (p1, p2) in c1.segments() {
        for (p3, p4) in c2.segments() {
            total += segment_pair_solid_angle(&p1, &p2, &p3, &p4);
        }
    }
    Ok(total / (4.0 * PI))
}

fn segment_pair_solid_angle(p1: &[f64; 3], p2: &[f64; 3], p3: &[f64; 3], p4: &[f64; 3]) -> f64 {
    let r13 = sub3(p3, p1);
    let r14 = sub3(p4, p1);
    let r23 = sub3(p3, p2);
    let r24 = sub3(p4, p2);
    let unit = |v: [f64; 3]| -> Option<[f64; 3]> {
        let n = norm3(&v);
        (n > 1e-300).then(|| [v[0] / n, v[1] / n, v[2] / n])
    };
    let (Some(n1), Some(n2), Some(n3), Some(n4)) = (
        unit(cross3(&r13, &r14)),
        unit(cross3(&r14, &r24)),
        unit(cross3(&r24, &r23)),
        unit(cross3(&r23, &r13)),
    ) else {
        // coplanar segment pair: zero solid angle
        return 0.0;
    };
    let a = |u: &[f64; 3], v: &[f64; 3]| dot3(u, v).clamp(-1.0, 1.0).asin();
    let omega = a(&n1, &n2) + a(&n2, &n3) + a(&n3, &n4) + a(&n4, &n1);
    let r12 = sub3(p2, p1);
    let r34 = sub3(p4, p3);
    omega * dot3(&cross3(&r34, &r12), &r13).signum()
}

/// Deterministic sequence of projection directions, the first one fixed
/// and generic for the curves built in this crate.
fn projection_direction(k: usize) -> [f64; 3] {
    if k == 0 {
        let d = [0.2718, 0.3141, 0.9093];
        let n = norm3(&d);
        return [d[0] / n, d[1] / n, d[2] / n];
    }
    // spherical Fibonacci points on the upper hemisphere
    let golden = PI * (3.0 - 5f64.sqrt());
    let z = 1.0 - (k as f64 + 0.5) / (2.0 * PROJECTION_ATTEMPTS as f64);
    let r = (1.0 - z * z).sqrt();
    let phi = golden * k as f64;
    [r * phi.cos(), r * phi.sin(), z]
}

/// Linking number from inter-component crossings of a regular projection,
/// retrying other directions when the projection is not generic.
pub fn linking_by_crossings(c1: &PLCurve, c2: &PLCurve) -> Result<i64> {
    check_disjoint(c1, c2)?;
    for k in 0..PROJECTION_ATTEMPTS {
        if let Some(v) = crossing_sum(c1, c2, &projection_direction(k)) {
            return Ok(v / 2);
        }
    }
    Err(Error::DegenerateProjection {
        attempts: PROJECTION_ATTEMPTS,
    })
}

/// As [`linking_by_crossings`] for one prescribed direction; fails if the
/// projection along `dir` is not regular.
pub fn linking_along(c1: &PLCurve, c2: &PLCurve, dir: [f64; 3]) -> Result<i64> {
    check_disjoint(c1, c2)?;
    let n = norm3(&dir);
    if !(n > 0.0) {
        return Err(Error::InvalidInput("projection direction must be nonzero".into()));
    }
    crossing_sum(c1, c2, &[dir[0] / n, dir[1] / n, dir[2] / n])
        .map(|v| v / 2)
        .ok_or(Error::DegenerateProjection { attempts: 1 })
}

/// Sum of crossing signs `sign((t1 x t2) . (P1 - P2))` over the crossings
/// of the projections, or `None` when the projection is not regular.
fn crossing_sum(c1: &PLCurve, c2: &PLCurve, d: &[f64; 3]) -> Option<i64> {
    const EDGE: f64 = 1e-9;
    let helper = if d[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = {
        let v = cross3(d, &helper);
        let n = norm3(&v);
        [v[0] / n, v[1] / n, v[2] / n]
    };
    let e2 = cross3(d, &e1);
    let proj = |p: &[f64; 3]| [dot3(p, &e1), dot3(p, &e2)];
    let mut sum = 0i64;
    for (a0, a1) in c1.segments() {
        let (pa0, pa1) = (proj(&a0), proj(&a1));
        let da = [pa1[0] - pa0[0], pa1[1] - pa0[1]];
        for (b0, b1) in c2.segments() {
            let (pb0, pb1) = (proj(&b0), proj(&b1));
            let db = [pb1[0] - pb0[0], pb1[1] - pb0[1]];
            let den = da[0] * db[1] - da[1] * db[0];
            let w = [pb0[0] - pa0[0], pb0[1] - pa0[1]];
            let scale = (da[0].hypot(da[1]) * db[0].hypot(db[1])).max(1e-300);
            if den.abs() < 1e-12 * scale {
                // parallel in projection: degenerate only if collinear and overlapping
                let off = (w[0] * da[1] - w[1] * da[0]).abs() / da[0].hypot(da[1]).max(1e-300);
                if off < 1e-9 {
                    let len2 = da[0] * da[0] + da[1] * da[1];
                    let t0 = (w[0] * da[0] + w[1] * da[1]) / len2;
                    let t1 = ((pb1[0] - pa0[0]) * da[0] + (pb1[1] - pa0[1]) * da[1]) / len2;
                    if t0.max(t1) >= -EDGE && t0.min(t1) <= 1.0 + EDGE {
                        return None;
                    }
                }
                continue;
            }
            let s = (w[0] * db[1] - w[1] * db[0]) / den;
            let t = (w[0] * da[1] - w[1] * da[0]) / den;
            let inside = |u: f64| u > -EDGE && u < 1.0 + EDGE;
            if !inside(s) || !inside(t) {
                continue;
            }
            if s.abs() <= EDGE || (1.0 - s).abs() <= EDGE || t.abs() <= EDGE || (1.0 - t).abs() <= EDGE {
                return None;
            }
            let ta = sub3(&a1, &a0);
            let tb = sub3(&b1, &b0);
            let pa = [a0[0] + s * ta[0], a0[1] + s * ta[1], a0[2] + s * ta[2]];
            let pb = [b0[0] + t * tb[0], b0[1] + t * tb[1], b0[2] + t * tb[2]];
            let v = dot3(&cross3(&ta, &tb), &sub3(&pa, &pb));
            if v.abs() < 1e-15 {
                return None;
            }
            sum += v.signum() as i64;
        }
    }
    Some(sum)
}

/// Writhe (exponent sum) and self-linking `e - n` of a braid closing to a knot.
pub fn writhe_and_self_linking(b: &BraidWord) -> Result<(i64, i64)> {
    require_knot(b)?;
    let e = b.exponent_sum();
    Ok((e, e - b.strands as i64))
}

fn require_knot(b: &BraidWord) -> Result<()> {
    match b.components() {
        1 => Ok(()),
        components => Err(Error::NotAKnot { components }),
    }
}

/// Laurent polynomial with integer coefficients:
/// `sum_i coeffs[i] t^(offset + i)`, kept without leading or trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<(i64, i64)>", try_from = "Vec<(i64, i64)>")]
pub struct LaurentPoly {
    offset: i64,
    coeffs: Vec<i64>,
}

impl LaurentPoly {
    pub fn new(offset: i64, coeffs: Vec<i64>) -> Self {
        let mut p = Self { offset, coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Self::new(0, Vec::new())
    }

    pub fn constant(c: i64) -> Self {
        Self::new(0, vec![c])
    }

    /// The monomial `c t^e`.
    pub fn monomial(c: i64, e: i64) -> Self {
        Self::new(e, vec![c])
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| **c == 0).count();
        if lead == self.coeffs.len() {
            self.coeffs.clear();
            self.offset = 0;
            return;
        }
        self.coeffs.drain(..lead);
        self.offset += lead as i64;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_exponent(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.offset)
    }

    pub fn max_exponent(&self) -> Option<i64> {
        (!self.is_zero()).then(|| self.offset + self.coeffs.len() as i64 - 1)
    }

    /// `max exponent - min exponent`, zero for the zero polynomial.
    pub fn span(&self) -> i64 {
        self.coeffs.len().saturating_sub(1) as i64
    }

    pub fn coeff(&self, e: i64) -> i64 {
        let i = e - self.offset;
        if i < 0 || i >= self.coeffs.len() as i64 {
            0
        } else {
            self.coeffs[i as usize]
        }
    }

    /// Coefficients from the lowest exponent up.
    pub fn coefficients(&self) -> &[i64] {
        &self.coeffs
    }

    /// `(exponent, coefficient)` pairs with nonzero coefficient, ascending.
    pub fn terms(&self) -> Vec<(i64, i64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(i, c)| (self.offset + i as i64, *c))
            .collect()
    }

    pub fn eval_at_one(&self) -> i64 {
        self.coeffs.iter().sum()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms().iter().map(|(e, c)| *c as f64 * t.powi(*e as i32)).sum()
    }

    /// `t^k p`.
    pub fn shift(&self, k: i64) -> Self {
        Self::new(self.offset + k, self.coeffs.clone())
    }

    /// `p(1/t)`.
    pub fn invert_variable(&self) -> Self {
        let mut c = self.coeffs.clone();
        c.reverse();
        match self.max_exponent() {
            Some(hi) => Self::new(-hi, c),
            None => Self::zero(),
        }
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`
    /// over `Z[t, 1/t]`.
    pub fn div_exact(&self, d: &LaurentPoly) -> Option<Self> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        let dl = *d.coeffs.last().unwrap();
        let mut rem = self.coeffs.clone();
        let dn = d.coeffs.len();
        if rem.len() < dn {
            return None;
        }
        let mut q = vec![0i64; rem.len() - dn + 1];
        for k in (0..q.len()).rev() {
            let top = rem[k + dn - 1];
            if top % dl != 0 {
                return None;
            }
            let c = top / dl;
            q[k] = c;
            for (j, dc) in d.coeffs.iter().enumerate() {
                rem[k + j] = rem[k + j].checked_sub(c.checked_mul(*dc)?)?;
            }
        }
        if rem.iter().any(|c| *c != 0) {
            return None;
        }
        Some(Self::new(self.offset - d.offset, q))
    }

    /// Representative of `+- t^k p` that is symmetric about exponent zero
    /// with positive leading coefficient.
    pub fn symmetrized(&self) -> Result<Self> {
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let span = self.span();
        if span % 2 != 0 {
            return Err(Error::InvalidInput(format!("polynomial {self} has odd span and cannot be symmetric")));
        }
        let mut p = Self::new(-span / 2, self.coeffs.clone());
        if *p.coeffs.last().unwrap() < 0 {
            p = -p;
        }
        Ok(p)
    }

    /// Palindromic coefficient list.
    pub fn is_symmetric(&self) -> bool {
        self.coeffs.iter().eq(self.coeffs.iter().rev()) && self.offset == -self.span() / 2
    }
}

impl From<LaurentPoly> for Vec<(i64, i64)> {
    fn from(p: LaurentPoly) -> Self {
        p.terms()
    }
}

impl TryFrom<Vec<(i64, i64)>> for LaurentPoly {
    type Error = Error;

    fn try_from(terms: Vec<(i64, i64)>) -> Result<Self> {
        let mut p = LaurentPoly::zero();
        for (e, c) in terms {
            p = &p + &LaurentPoly::monomial(c, e);
        }
        Ok(p)
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;

    fn add(self, o: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let lo = self.offset.min(o.offset);
        let hi = self.max_exponent().unwrap().max(o.max_exponent().unwrap());
        let coeffs = (lo..=hi)
            .map(|e| self.coeff(e).checked_add(o.coeff(e)).expect("Laurent coefficient overflow"))
            .collect();
        LaurentPoly::new(lo, coeffs)
    }
}

impl Neg for LaurentPoly {
    type Output = LaurentPoly;

    fn neg(self) -> LaurentPoly {
        LaurentPoly::new(self.offset, self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;

    fn sub(self, o: &LaurentPoly) -> LaurentPoly {
        self + &(-o.clone())
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;

    fn mul(self, o: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() || o.is_zero() {
            return LaurentPoly::zero();
        }
        let mut c = vec![0i64; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                let term = a.checked_mul(*b).expect("Laurent coefficient overflow");
                c[i + j] = c[i + j].checked_add(term).expect("Laurent coefficient overflow");
            }
        }
        LaurentPoly::new(self.offset + o.offset, c)
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms().into_iter().rev() {
            let sign = if c < 0 { "-" } else { "+" };
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match (a, e) {
                (_, 0) => write!(f, "{a}")?,
                (1, 1) => write!(f, "t")?,
                (1, _) => write!(f, "t^{e}")?,
                (_, 1) => write!(f, "{a}t")?,
                _ => write!(f, "{a}t^{e}")?,
            }
        }
        Ok(())
    }
}

type PolyMatrix = Vec<Vec<LaurentPoly>>;

/// Reduced Burau matrix of the braid, `(n-1) x (n-1)`. Row `i-1` of the
/// generator `sigma_i` reads `(t, -t, 1)` in columns `i-2, i-1, i`; its
/// inverse has `(1, -1/t, 1/t)`.
pub fn reduced_burau(b: &BraidWord) -> PolyMatrix {
    let d = b.strands - 1;
    let mut m: PolyMatrix = (0..d)
        .map(|r| (0..d).map(|c| LaurentPoly::constant((r == c) as i64)).collect())
        .collect();
    for l in &b.letters {
        let i = l.unsigned_abs() as usize - 1;
        let row: [(isize, LaurentPoly); 3] = if *l > 0 {
            [
                (i as isize - 1, LaurentPoly::monomial(1, 1)),
                (i as isize, LaurentPoly::monomial(-1, 1)),
                (i as isize + 1, LaurentPoly::constant(1)),
            ]
        } else {
            [
                (i as isize - 1, LaurentPoly::constant(1)),
                (i as isize, LaurentPoly::monomial(-1, -1)),
                (i as isize + 1, LaurentPoly::monomial(1, -1)),
            ]
        };
        // M <- M G, where G is the identity except in row i
        for mr in m.iter_mut() {
            let pivot = mr[i].clone();
            if pivot.is_zero() {
                continue;
            }
            for (c, g) in &row {
                if *c < 0 || *c as usize >= d {
                    continue;
                }
                let c = *c as usize;
                let delta = if c == i { g - &LaurentPoly::constant(1) } else { g.clone() };
                mr[c] = &mr[c] + &(&pivot * &delta);
            }
        }
    }
    m
}

/// Determinant by fraction-free (Bareiss) elimination over `Z[t, 1/t]`.
pub fn determinant(mut a: PolyMatrix) -> LaurentPoly {
    let n = a.len();
    if n == 0 {
        return LaurentPoly::constant(1);
    }
    let mut sign = 1;
    let mut prev = LaurentPoly::constant(1);
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(r) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return LaurentPoly::zero();
            };
            a.swap(k, r);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = num.div_exact(&prev).expect("Bareiss division is exact");
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

/// Alexander polynomial of the closure, in symmetric form with positive
/// leading coefficient.
pub fn alexander(b: &BraidWord) -> Result<LaurentPoly> {
    require_knot(b)?;
    let n = b.strands;
    let mut m = reduced_burau(b);
    for (r, row) in m.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            let id = LaurentPoly::constant((r == c) as i64);
            *v = &id - v;
        }
    }
    let det = determinant(m);
    let cyclotomic = LaurentPoly::new(0, vec![1; n]);
    let delta = det
        .div_exact(&cyclotomic)
        .ok_or_else(|| Error::InvalidInput(format!("Burau determinant {det} is not divisible by 1 + ... + t^{}", n - 1)))?;
    let delta = delta.symmetrized()?;
    debug_assert_eq!(delta.eval_at_one().abs(), 1);
    Ok(delta)
}

/// Invariants of one closed orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotReport {
    pub word: String,
    pub strands: usize,
    pub crossings: usize,
    pub exponent_sum: i64,
    pub self_linking: i64,
    /// Exact genus for braids with letters of one sign, otherwise the
    /// Alexander lower bound `span / 2`.
    pub genus_bound: i64,
    pub alexander: LaurentPoly,
    pub name: String,
}

impl KnotReport {
    pub fn new(word: impl Into<String>, b: &BraidWord) -> Result<Self> {
        let (writhe, sl) = writhe_and_self_linking(b)?;
        let delta = alexander(b)?;
        let c = b.crossing_count();
        let homogeneous = b.is_positive() || b.is_negative();
        let genus_bound = if homogeneous {
            (c as i64 - b.strands as i64 + 1) / 2
        } else {
            delta.span() / 2
        };
        let mut r = Self {
            word: word.into(),
            strands: b.strands,
            crossings: c,
            exponent_sum: writhe,
            self_linking: sl,
            genus_bound,
            alexander: delta,
            name: String::new(),
        };
        r.name = identify(&r);
        Ok(r)
    }

    /// All crossings positive (or none).
    pub fn is_positive(&self) -> bool {
        self.exponent_sum == self.crossings as i64
    }

    /// All crossings negative (or none).
    pub fn is_negative(&self) -> bool {
        self.exponent_sum == -(self.crossings as i64)
    }
}

pub const UNKNOWN: &str = "unknown";

struct TableEntry {
    positive: &'static str,
    negative: &'static str,
    alexander: &'static [i64],
    genus: i64,
}

const TABLE: &[TableEntry] = &[
    TableEntry {
        positive: "unknot",
        negative: "unknot",
        alexander: &[1],
        genus: 0,
    },
    TableEntry {
        positive: "trefoil (right-handed)",
        negative: "trefoil (left-handed)",
        alexander: &[1, -1, 1],
        genus: 1,
    },
    TableEntry {
        positive: "figure-eight",
        negative: "figure-eight",
        alexander: &[1, -3, 1],
        genus: 1,
    },
    TableEntry {
        positive: "cinquefoil T(2,5)",
        negative: "cinquefoil T(2,-5)",
        alexander: &[1, -1, 1, -1, 1],
        genus: 2,
    },
    TableEntry {
        positive: "T(2,7)",
        negative: "T(2,-7)",
        alexander: &[1, -1, 1, -1, 1, -1, 1],
        genus: 3,
    },
    TableEntry {
        positive: "T(3,4)",
        negative: "T(3,-4)",
        alexander: &[1, -1, 0, 1, 0, -1, 1],
        genus: 3,
    },
    TableEntry {
        positive: "T(3,5)",
        negative: "T(3,-5)",
        alexander: &[1, -1, 0, 1, -1, 1, 0, -1, 1],
        genus: 4,
    },
];

/// Braids of at most this many crossings close to knots of crossing number
/// at most this, where the table's Alexander polynomials are unique.
const SMALL_DIAGRAM: usize = 7;

/// Table lookup. Braids whose letters share one sign are matched on the
/// Alexander polynomial and the exact genus, with chirality from the sign.
/// Mixed braids are named only for small diagrams and achiral entries.
/// Anything else is [`UNKNOWN`].
pub fn identify(report: &KnotReport) -> String {
    let Some(entry) = TABLE.iter().find(|e| report.alexander.coefficients() == e.alexander) else {
        return UNKNOWN.into();
    };
    let achiral = entry.positive == entry.negative;
    if report.is_positive() && report.genus_bound == entry.genus {
        return entry.positive.into();
    }
    if report.is_negative() && report.genus_bound == entry.genus {
        return entry.negative.into();
    }
    let mixed = !report.is_positive() && !report.is_negative();
    if mixed && achiral && report.crossings <= SMALL_DIAGRAM {
        return entry.positive.into();
    }
    UNKNOWN.into()
}

/// Inversions of a permutation.
pub fn inversions(perm: &[usize]) -> usize {
    let mut n = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                n += 1;
            }
        }
    }
    n
}

/// Components of a braid closure as lists of starting slots.
pub fn closure_components(b: &BraidWord) -> Vec<Vec<usize>> {
    cycles(&b.permutation())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn braid(n: usize, l: &[i32]) -> BraidWord {
        BraidWord::new(n, l.to_vec()).unwrap()
    }

    fn circle(center: [f64; 3], axis: usize, r: f64, n: usize) -> PLCurve {
        let v = (0..n)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / n as f64;
                let (c, s) = (r * a.cos(), r * a.sin());
                let mut p = center;
                match axis {
                    2 => {
                        p[0] += c;
                        p[1] += s;
                    }
                    1 => {
                        p[0] += c;
                        p[2] += s;
                    }
                    _ => {
                        p[1] += c;
                        p[2] += s;
                    }
                }
                p
            })
            .collect();
        PLCurve::new(v).unwrap()
    }

    #[test]
    fn laurent_arithmetic() {
        let p = LaurentPoly::new(-1, vec![1, -1, 1]);
        assert_eq!(p.to_string(), "t - 1 + t^-1");
        assert_eq!((&p * &p).to_string(), "t^2 - 2t + 3 - 2t^-1 + t^-2");
        assert_eq!((&p - &p), LaurentPoly::zero());
        let q = &p * &LaurentPoly::new(0, vec![1, 1]);
        assert_eq!(q.div_exact(&LaurentPoly::new(0, vec![1, 1])), Some(p.clone()));
        assert_eq!(p.div_exact(&LaurentPoly::new(0, vec![1, 1])), None);
        assert_eq!(p.invert_variable(), p);
        assert!(p.is_symmetric());
    }

    #[test]
    fn laurent_json_is_term_pairs() {
        let p = LaurentPoly::new(-1, vec![1, -3, 1]);
        let j = serde_json::to_string(&p).unwrap();
        assert_eq!(j, "[[-1,1],[0,-3],[1,1]]");
        assert_eq!(serde_json::from_str::<LaurentPoly>(&j).unwrap(), p);
    }

    #[test]
    fn burau_inverse_pairs() {
        for n in 2..6 {
            for i in 1..n as i32 {
                let m = reduced_burau(&braid(n, &[i, -i]));
                for (r, row) in m.iter().enumerate() {
                    for (c, v) in row.iter().enumerate() {
                        assert_eq!(*v, LaurentPoly::constant((r == c) as i64), "n={n} i={i}");
                    }
                }
            }
        }
    }

    #[test]
    fn alexander_examples() {
        assert_eq!(alexander(&braid(1, &[])).unwrap(), LaurentPoly::constant(1));
        assert_eq!(alexander(&braid(2, &[1, 1, 1])).unwrap().to_string(), "t - 1 + t^-1");
        assert_eq!(alexander(&braid(3, &[1, -2, 1, -2])).unwrap().to_string(), "t - 3 + t^-1");
        assert_eq!(alexander(&braid(2, &[1; 5])).unwrap().to_string(), "t^2 - t + 1 - t^-1 + t^-2");
        assert!(matches!(alexander(&braid(2, &[1, 1])), Err(Error::NotAKnot { components: 2 })));
    }

    #[test]
    fn self_linking_examples() {
        assert_eq!(writhe_and_self_linking(&braid(1, &[])).unwrap(), (0, -1));
        assert_eq!(writhe_and_self_linking(&braid(2, &[1, 1, 1])).unwrap(), (3, 1));
        assert!(writhe_and_self_linking(&braid(3, &[])).is_err());
    }

    #[test]
    fn identification() {
        let name = |n, l: &[i32]| KnotReport::new("", &braid(n, l)).unwrap().name;
        assert_eq!(name(1, &[]), "unknot");
        assert_eq!(name(2, &[1, 1, 1]), "trefoil (right-handed)");
        assert_eq!(name(2, &[-1, -1, -1]), "trefoil (left-handed)");
        assert_eq!(name(3, &[1, -2, 1, -2]), "figure-eight");
        assert_eq!(name(2, &[1; 5]), "cinquefoil T(2,5)");
        assert_eq!(name(2, &[1; 7]), "T(2,7)");
        assert_eq!(name(3, &[1, 2, 1, 2, 1, 2, 1, 2]), "T(3,4)");
        assert_eq!(name(3, &[-1, -2, -1, -2, -1, -2, -1, -2, -1, -2]), "T(3,-5)");
        // negative stabilization of the right-handed trefoil: mixed signs,
        // so chirality is not read off
        let r = KnotReport::new("", &braid(3, &[1, 1, 1, -2])).unwrap();
        assert_eq!(r.alexander.to_string(), "t - 1 + t^-1");
        assert_eq!(r.name, UNKNOWN);
        assert_eq!(name(3, &[1, -2]), "unknot");
    }

    #[test]
    fn hopf_and_split_circles() {
        let a = circle([0.0; 3], 2, 1.0, 64);
        let b = circle([1.0, 0.0, 0.0], 1, 1.0, 64);
        let q = linking_by_quadrature(&a, &b).unwrap();
        let s = linking_by_crossings(&a, &b).unwrap();
        assert!((q.abs() - 1.0).abs() < 1e-9, "{q}");
        assert_eq!(s as f64, q.round());
        let far = circle([5.0, 0.0, 0.0], 2, 1.0, 64);
        assert_eq!(linking_by_crossings(&a, &far).unwrap(), 0);
        assert!(linking_by_quadrature(&a, &far).unwrap().abs() < 1e-9);
    }

    #[test]
    fn touching_curves_rejected() {
        let a = circle([0.0; 3], 2, 1.0, 16);
        let b = circle([2.0, 0.0, 0.0], 2, 1.0, 16);
        assert!(matches!(linking_by_quadrature(&a, &b), Err(Error::CurvesIntersect { .. })));
    }

    #[test]
    fn degenerate_direction_detected() {
        let a = circle([0.0; 3], 2, 1.0, 16);
        let b = circle([1.0, 0.0, 0.0], 1, 1.0, 16);
        // looking along z, the second circle projects onto a segment
        assert!(matches!(linking_along(&a, &b, [0.0, 0.0, 1.0]), Err(Error::DegenerateProjection { .. })));
    }

    #[test]
    fn inversion_count() {
        assert_eq!(inversions(&[3, 4, 0, 1, 2]), 6);
        assert_eq!(inversions(&[0, 1, 2]), 0);
    }
}
