//! Double-double accumulation for Minkowski products.
//!
//! Points far from the origin of the hyperboloid have large coordinates while
//! their pairwise products stay of moderate size, so plain `f64` dot products
//! lose most of their digits to cancellation. Everything that feeds the energy
//! and the balanced residual goes through these helpers.

use core::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

pub(crate) type Dd3 = [Dd; 3];

const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    let c = SPLITTER * a;
    let hi = c - (c - a);
    (hi, a - hi)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[inline]
    pub fn new(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn prod(a: f64, b: f64) -> Dd {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        let x = libm::sqrt(self.hi);
        let r = self - Dd::prod(x, x);
        let (hi, lo) = quick_two_sum(x, r.hi / (2.0 * x));
        Dd { hi, lo }
    }

    pub fn recip(self) -> Dd {
        let q1 = 1.0 / self.hi;
        let r = Dd::new(1.0) - self * q1;
        let q2 = r.hi / self.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let (hi, lo) = quick_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi));
        Dd { hi, lo }
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }
}

pub(crate) fn lift3(v: &[f64; 3]) -> Dd3 {
    [Dd::new(v[0]), Dd::new(v[1]), Dd::new(v[2])]
}

pub(crate) fn round3(v: &Dd3) -> [f64; 3] {
    [v[0].to_f64(), v[1].to_f64(), v[2].to_f64()]
}

pub(crate) type DdMat = [[Dd; 3]; 3];

pub(crate) fn mat_lift(m: &[[f64; 3]; 3]) -> DdMat {
    m.map(|row| row.map(Dd::new))
}

pub(crate) fn mat_round(m: &DdMat) -> [[f64; 3]; 3] {
    m.map(|row| row.map(Dd::to_f64))
}

pub(crate) fn mat_mul(a: &DdMat, b: &DdMat) -> DdMat {
    let mut out = [[Dd::ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

pub(crate) fn mat_apply_dd(m: &DdMat, v: &Dd3) -> Dd3 {
    let mut out = [Dd::ZERO; 3];
    for (row, o) in m.iter().zip(out.iter_mut()) {
        *o = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
    }
    out
}

/// Inverse of a nearly Lorentz matrix: `J m^T J` refined by one Newton step
/// `X + X (I - m X)`.
pub(crate) fn inverse_refined(m: &[[f64; 3]; 3]) -> DdMat {
    inverse_refined_dd(&mat_lift(m))
}

pub(crate) fn inverse_refined_dd(m: &DdMat) -> DdMat {
    let sign = [-1.0, 1.0, 1.0];
    let mut x = [[Dd::ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            x[i][j] = m[j][i] * (sign[i] * sign[j]);
        }
    }
    let mx = mat_mul(m, &x);
    let mut resid = [[Dd::ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            resid[i][j] = Dd::new(if i == j { 1.0 } else { 0.0 }) - mx[i][j];
        }
    }
    let corr = mat_mul(&x, &resid);
    for i in 0..3 {
        for j in 0..3 {
            x[i][j] = x[i][j] + corr[i][j];
        }
    }
    x
}

/// Reflection in the geodesic through `a` and `b`, taken as exact.
pub(crate) fn reflection_through(a: &[f64; 3], b: &[f64; 3]) -> DdMat {
    // Minkowski cross product: J (a x b)
    let cross = [
        -(Dd::prod(a[1], b[2]) - Dd::prod(a[2], b[1])),
        Dd::prod(a[2], b[0]) - Dd::prod(a[0], b[2]),
        Dd::prod(a[0], b[1]) - Dd::prod(a[1], b[0]),
    ];
    let inv = minkowski(&cross, &cross).sqrt().recip();
    let n = [cross[0] * inv, cross[1] * inv, cross[2] * inv];
    let jn = [-n[0], n[1], n[2]];
    let mut out = mat_lift(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = out[i][j] - (n[i] * jn[j]) * 2.0;
        }
    }
    out
}

/// `exp_x(v)` with `x` held in double-double; `v` is tangent at `x`.
pub(crate) fn exp3(x: &Dd3, v: &[f64; 3]) -> Dd3 {
    let n2 = (Dd::prod(v[1], v[1]) + Dd::prod(v[2], v[2]) - Dd::prod(v[0], v[0])).to_f64();
    if !(n2 > 0.0) {
        return *x;
    }
    let n = libm::sqrt(n2);
    let (c, s) = (libm::cosh(n), libm::sinh(n) / n);
    let y = [x[0] * c + Dd::prod(v[0], s), x[1] * c + Dd::prod(v[1], s), x[2] * c + Dd::prod(v[2], s)];
    to_sheet(&y)
}

#[inline]
pub(crate) fn minkowski(a: &Dd3, b: &Dd3) -> Dd {
    -(a[0] * b[0]) + a[1] * b[1] + a[2] * b[2]
}

/// Rescales a timelike vector onto the unit sheet.
pub(crate) fn to_sheet(v: &Dd3) -> Dd3 {
    let n = (-minkowski(v, v)).sqrt();
    let inv = n.recip();
    [v[0] * inv, v[1] * inv, v[2] * inv]
}

/// Hyperbolic distance from `cosh d`, held in double-double so that the
/// short-distance branch keeps its relative accuracy.
pub(crate) fn arcosh_dd(c: Dd) -> f64 {
    let excess = c - Dd::new(1.0);
    if excess.hi <= 0.0 {
        return 0.0;
    }
    if c.hi < 2.0 {
        // cosh d - 1 = 2 sinh^2(d/2)
        2.0 * libm::asinh(libm::sqrt(0.5 * excess.to_f64()))
    } else {
        libm::acosh(c.to_f64())
    }
}

/// `sinh d` from `cosh d`, via `sqrt((c - 1)(c + 1))`.
pub(crate) fn sinh_from_cosh(c: Dd) -> f64 {
    let excess = c - Dd::new(1.0);
    if excess.hi <= 0.0 {
        return 0.0;
    }
    (excess * (c + Dd::new(1.0))).sqrt().to_f64()
}

fn sinh_from_cosh_dd(c: Dd) -> Dd {
    let excess = c - Dd::new(1.0);
    if excess.hi <= 0.0 {
        return Dd::ZERO;
    }
    (excess * (c + Dd::new(1.0))).sqrt()
}

/// `arcosh(b) - arcosh(a)` as `asinh(sinh b cosh a - cosh b sinh a)`, which
/// keeps its absolute accuracy when the two distances nearly agree.
pub(crate) fn arcosh_difference(a: Dd, b: Dd) -> f64 {
    let s = sinh_from_cosh_dd(b) * a - b * sinh_from_cosh_dd(a);
    libm::asinh(s.to_f64())
}

/// Everything needed about the geodesic from `x` to `y`, both taken as
/// projective points and rescaled onto the sheet internally.
pub(crate) struct Segment {
    /// Initial velocity of the unit-time geodesic, tangent at `x`.
    pub velocity: Dd3,
}

pub(crate) fn segment(x: &Dd3, y: &Dd3) -> Segment {
    segment_on_sheet(&to_sheet(x), &to_sheet(y))
}

/// [`segment`] for points already on the sheet. The far end is not
/// renormalized: for a point with large coordinates that step cancels
/// terms of size `x0^2` and its rounding would jitter with the input.
pub(crate) fn segment_on_sheet(xs: &Dd3, ys: &Dd3) -> Segment {
    let c = -minkowski(xs, ys);
    let length = arcosh_dd(c);
    if length == 0.0 {
        return Segment { velocity: [Dd::ZERO; 3] };
    }
    // u = y - c x is tangent at x with norm sinh d.
    let u = [ys[0] - c * xs[0], ys[1] - c * xs[1], ys[2] - c * xs[2]];
    let sh = sinh_from_cosh(c);
    let scale = length / sh;
    Segment { velocity: [u[0] * scale, u[1] * scale, u[2] * scale] }
}

pub(crate) fn distance(x: &Dd3, y: &Dd3) -> f64 {
    arcosh_dd(-minkowski(&to_sheet(x), &to_sheet(y)))
}

pub(crate) fn sheet_point(p: &[f64; 3]) -> Dd3 {
    to_sheet(&lift3(p))
}
