//! The hyperbolic plane in the hyperboloid model.
//!
//! Points live on the upper sheet of `<p, p> = -1` for the Minkowski form
//! `<p, q> = -p0 q0 + p1 q1 + p2 q2`; isometries are 3x3 matrices in
//! `SO+(2, 1)`. Distances, logarithms and everything downstream of them are
//! evaluated with double-double accumulation (see the `dd` module), so they
//! are accurate to a few ulps for the stored coordinates.

use core::f64::consts::PI;

use crate::dd;
use crate::error::{Error, Result};

/// Default tolerance for geometric identities (closure, isometry defects).
pub const GEOMETRIC_TOL: f64 = 1e-10;
/// Default tolerance for identities that hold to rounding (sheet, tangency).
pub const IDENTITY_TOL: f64 = 1e-12;

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

/// `-a0 b0 + a1 b1 + a2 b2`, summed in double-double so that vectors with
/// large coordinates keep their small products.
#[inline]
pub fn minkowski(a: &Vec3, b: &Vec3) -> f64 {
    (dd::Dd::prod(a[1], b[1]) + dd::Dd::prod(a[2], b[2]) - dd::Dd::prod(a[0], b[0])).to_f64()
}

/// Vector Minkowski-orthogonal to both arguments.
#[inline]
pub fn minkowski_cross(a: &Vec3, b: &Vec3) -> Vec3 {
    let c = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    [-c[0], c[1], c[2]]
}

#[inline]
fn det3(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// Small dense helpers for 3x3 matrices, including improper Lorentz maps
/// such as reflections.
pub mod mat {
    use super::{Mat3, Vec3};

    pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

    pub fn mul(a: &Mat3, b: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
            }
        }
        out
    }

    pub fn apply(m: &Mat3, v: &Vec3) -> Vec3 {
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    /// Inverse of a Lorentz matrix: `J m^T J`.
    pub fn lorentz_inverse(m: &Mat3) -> Mat3 {
        let s = [-1.0, 1.0, 1.0];
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = s[i] * m[j][i] * s[j];
            }
        }
        out
    }

    pub fn det(m: &Mat3) -> f64 {
        super::det3(&m[0], &m[1], &m[2])
    }

    /// `max |m^T J m - J|`.
    pub fn lorentz_defect(m: &Mat3) -> f64 {
        let s = [-1.0, 1.0, 1.0];
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    acc += m[k][i] * s[k] * m[k][j];
                }
                let target = if i == j { s[i] } else { 0.0 };
                worst = worst.max((acc - target).abs());
            }
        }
        worst
    }

    pub fn max_abs(m: &Mat3) -> f64 {
        m.iter().flatten().fold(0.0_f64, |a, &x| a.max(x.abs()))
    }

    pub fn max_abs_diff(a: &Mat3, b: &Mat3) -> f64 {
        a.iter().flatten().zip(b.iter().flatten()).fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
    }

    /// Reflection in the geodesic through two points of the sheet.
    pub fn reflection_through(a: &Vec3, b: &Vec3) -> Mat3 {
        let n = super::minkowski_cross(a, b);
        let norm = libm::sqrt(super::minkowski(&n, &n));
        let n = [n[0] / norm, n[1] / norm, n[2] / norm];
        // x -> x - 2 <x, n> n, and <x, n> = x . (J n)
        let jn = [-n[0], n[1], n[2]];
        let mut out = IDENTITY;
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] -= 2.0 * n[i] * jn[j];
            }
        }
        out
    }
}

/// A point of the hyperbolic plane on the upper sheet of the hyperboloid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HPoint([f64; 3]);

impl HPoint {
    /// Validates that the coordinates lie on the upper sheet, then
    /// renormalizes them.
    pub fn new(x0: f64, x1: f64, x2: f64) -> Result<Self> {
        let v = [x0, x1, x2];
        let defect = (minkowski(&v, &v) + 1.0).abs() / (1.0 + x0 * x0);
        if !(x0 >= 1.0 - IDENTITY_TOL) || !(defect <= IDENTITY_TOL) {
            return Err(Error::NotOnSheet { defect });
        }
        Ok(Self::from_raw_unchecked(v))
    }

    /// Projects any future-pointing timelike vector onto the sheet.
    pub fn from_timelike(v: Vec3) -> Result<Self> {
        let n = -minkowski(&v, &v);
        if !(n > 0.0) || !(v[0] > 0.0) {
            return Err(Error::NotOnSheet { defect: n });
        }
        Ok(Self::from_raw_unchecked(v))
    }

    pub(crate) fn from_raw_unchecked(v: Vec3) -> Self {
        let n = libm::sqrt((-minkowski(&v, &v)).max(f64::MIN_POSITIVE));
        let s = if v[0] < 0.0 { -1.0 / n } else { 1.0 / n };
        HPoint([v[0] * s, v[1] * s, v[2] * s])
    }

    pub const fn origin() -> Self {
        HPoint([1.0, 0.0, 0.0])
    }

    /// The point at distance `r` from the origin in direction `theta`.
    pub fn from_polar(r: f64, theta: f64) -> Self {
        let sh = libm::sinh(r);
        HPoint([libm::cosh(r), sh * libm::cos(theta), sh * libm::sin(theta)])
    }

    /// Inverse of [`HPoint::to_disk`]; the argument must lie in the open unit disk.
    pub fn from_disk(u: f64, v: f64) -> Result<Self> {
        let r2 = u * u + v * v;
        if !(r2 < 1.0) {
            return Err(Error::OutOfRange { what: "disk radius", value: libm::sqrt(r2) });
        }
        let d = 1.0 - r2;
        Ok(Self::from_raw_unchecked([(1.0 + r2) / d, 2.0 * u / d, 2.0 * v / d]))
    }

    /// Poincaré disk coordinates `(x1, x2) / (1 + x0)`.
    pub fn to_disk(&self) -> (f64, f64) {
        let d = 1.0 + self.0[0];
        (self.0[1] / d, self.0[2] / d)
    }

    /// Beltrami–Klein coordinates `(x1, x2) / x0`; geodesics are straight there.
    pub fn to_klein(&self) -> (f64, f64) {
        (self.0[1] / self.0[0], self.0[2] / self.0[0])
    }

    pub fn coords(&self) -> Vec3 {
        self.0
    }

    pub fn x0(&self) -> f64 {
        self.0[0]
    }

    pub fn sheet_defect(&self) -> f64 {
        (minkowski(&self.0, &self.0) + 1.0).abs()
    }

    pub fn exp(&self, v: &Vec3) -> HPoint {
        HPoint(dd::round3(&dd::exp3(&dd::lift3(&self.0), v)))
    }

    /// Minkowski centroid of a nonempty set of points.
    pub fn centroid(points: &[HPoint]) -> HPoint {
        let mut acc = [0.0; 3];
        for p in points {
            for (a, x) in acc.iter_mut().zip(p.0.iter()) {
                *a += x;
            }
        }
        HPoint::from_raw_unchecked(acc)
    }
}

/// A tangent vector, carried together with its base point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HTangent {
    base: HPoint,
    v: Vec3,
}

impl HTangent {
    pub fn new(base: HPoint, v: Vec3) -> Result<Self> {
        let scale = 1.0 + base.0.iter().map(|x| x.abs()).sum::<f64>() * v.iter().map(|x| x.abs()).sum::<f64>();
        let defect = minkowski(&base.0, &v).abs() / scale;
        if !(defect <= IDENTITY_TOL) {
            return Err(Error::NotTangent { defect });
        }
        Ok(HTangent { base, v })
    }

    /// Orthogonal projection of an ambient vector onto the tangent plane.
    pub fn project(base: HPoint, v: Vec3) -> Self {
        let k = minkowski(&v, &base.0);
        let p = base.0;
        HTangent { base, v: [v[0] + k * p[0], v[1] + k * p[1], v[2] + k * p[2]] }
    }

    pub fn zero(base: HPoint) -> Self {
        HTangent { base, v: [0.0; 3] }
    }

    /// `a e1 + b e2` in the canonical frame at `base` (see [`tangent_frame`]).
    pub fn from_frame(base: HPoint, a: f64, b: f64) -> Self {
        let [e1, e2] = tangent_frame(&base);
        HTangent { base, v: [a * e1[0] + b * e2[0], a * e1[1] + b * e2[1], a * e1[2] + b * e2[2]] }
    }

    pub fn base(&self) -> &HPoint {
        &self.base
    }

    pub fn components(&self) -> Vec3 {
        self.v
    }

    pub fn dot(&self, other: &HTangent) -> f64 {
        minkowski(&self.v, &other.v)
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(minkowski(&self.v, &self.v).max(0.0))
    }

    pub fn scaled(&self, k: f64) -> HTangent {
        HTangent { base: self.base, v: [k * self.v[0], k * self.v[1], k * self.v[2]] }
    }

    /// Sum of two vectors at the same base point.
    pub fn plus(&self, other: &HTangent) -> HTangent {
        let (a, b) = (self.v, other.v);
        HTangent { base: self.base, v: [a[0] + b[0], a[1] + b[1], a[2] + b[2]] }
    }

    /// Coordinates in the canonical frame at the base point.
    pub fn frame_coords(&self) -> (f64, f64) {
        let [e1, e2] = tangent_frame(&self.base);
        (minkowski(&self.v, &e1), minkowski(&self.v, &e2))
    }
}

/// Hyperbolic distance `arccosh(max(1, -<p, q>))`.
pub fn dist(p: &HPoint, q: &HPoint) -> f64 {
    dd::distance(&dd::lift3(&p.0), &dd::lift3(&q.0))
}

/// `cosh(|v|) p + sinh(|v|) v / |v|`.
pub fn exp_map(p: &HPoint, v: &HTangent) -> Result<HPoint> {
    let gap = dist(p, &v.base);
    if gap > GEOMETRIC_TOL {
        return Err(Error::NotTangent { defect: gap });
    }
    HTangent::new(*p, v.v)?;
    Ok(p.exp(&v.v))
}

/// Inverse of [`exp_map`]: the initial velocity of the unit-time geodesic from `p` to `q`.
pub fn log_map(p: &HPoint, q: &HPoint) -> HTangent {
    let seg = dd::segment(&dd::lift3(&p.0), &dd::lift3(&q.0));
    HTangent::project(*p, dd::round3(&seg.velocity))
}

/// The point at fraction `t` along the geodesic from `p` to `q`.
pub fn geodesic_point(p: &HPoint, q: &HPoint, t: f64) -> Result<HPoint> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfRange { what: "geodesic parameter", value: t });
    }
    if t == 0.0 {
        return Ok(*p);
    }
    if t == 1.0 {
        return Ok(*q);
    }
    Ok(p.exp(&log_map(p, q).scaled(t).v))
}

/// Orthonormal frame `(e1, e2)` at `p`, obtained by translating the
/// coordinate axes from the origin along the geodesic to `p`.
pub fn tangent_frame(p: &HPoint) -> [Vec3; 2] {
    let m = Isometry::frame(p).m;
    [[m[0][1], m[1][1], m[2][1]], [m[0][2], m[1][2], m[2][2]]]
}

/// Counterclockwise angle at `at` from tangent `a` to tangent `b`, in `(-pi, pi]`.
pub fn oriented_angle(at: &HPoint, a: &Vec3, b: &Vec3) -> f64 {
    let na = libm::sqrt(minkowski(a, a).max(0.0));
    let nb = libm::sqrt(minkowski(b, b).max(0.0));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let cos = minkowski(a, b) / (na * nb);
    let sin = det3(&at.0, a, b) / (na * nb);
    libm::atan2(sin, cos)
}

/// Interior angle at `at` of a counterclockwise polygon arriving from `prev`
/// and leaving toward `next`, in `(0, 2 pi)`.
pub fn interior_angle(prev: &HPoint, at: &HPoint, next: &HPoint) -> f64 {
    let to_next = log_map(at, next).v;
    let to_prev = log_map(at, prev).v;
    let a = oriented_angle(at, &to_next, &to_prev);
    if a <= 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Orientation-preserving isometry of the hyperbolic plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Isometry {
    m: Mat3,
}

impl Isometry {
    pub const fn identity() -> Self {
        Isometry { m: mat::IDENTITY }
    }

    /// Accepts `m` when `m^T J m = J` within tolerance (relative to the
    /// entry scale), `det m = 1` and the upper sheet is preserved.
    pub fn from_matrix(m: Mat3) -> Result<Self> {
        let iso = Isometry { m };
        let defect = iso.relative_defect();
        if !(defect <= GEOMETRIC_TOL)
            || (mat::det(&m) - 1.0).abs()
                > GEOMETRIC_TOL * {
                    let a = mat::max_abs(&m);
                    a * a * a
                }
            || m[0][0] <= 0.0
        {
            return Err(Error::NotIsometry { defect });
        }
        Ok(iso)
    }

    pub(crate) fn from_matrix_unchecked(m: Mat3) -> Self {
        Isometry { m }
    }

    /// Translation by `a` along the x1-axis.
    pub fn boost(a: f64) -> Self {
        let (c, s) = (libm::cosh(a), libm::sinh(a));
        Isometry { m: [[c, s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]] }
    }

    /// Rotation by `theta` about the origin.
    pub fn rotation(theta: f64) -> Self {
        let (c, s) = (libm::cos(theta), libm::sin(theta));
        Isometry { m: [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]] }
    }

    /// The transvection carrying the origin to `p` along their geodesic.
    pub fn frame(p: &HPoint) -> Self {
        let [x0, x1, x2] = p.0;
        let k = 1.0 / (1.0 + x0);
        Isometry { m: [[x0, x1, x2], [x1, 1.0 + x1 * x1 * k, x1 * x2 * k], [x2, x1 * x2 * k, 1.0 + x2 * x2 * k]] }
    }

    /// The transvection carrying `from` to `to` along their geodesic.
    pub fn transvection(from: &HPoint, to: &HPoint) -> Self {
        let f = Isometry::frame(from);
        let local = f.inverse().apply(to);
        f.compose(&Isometry::frame(&local)).compose(&f.inverse())
    }

    /// Rotation by `theta` about `p`.
    pub fn rotation_about(p: &HPoint, theta: f64) -> Self {
        let f = Isometry::frame(p);
        f.compose(&Isometry::rotation(theta)).compose(&f.inverse())
    }

    pub fn half_turn(p: &HPoint) -> Self {
        Isometry::rotation_about(p, PI)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.m
    }

    /// `self * other`: apply `other` first.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        Isometry { m: mat::mul(&self.m, &other.m) }
    }

    pub fn inverse(&self) -> Isometry {
        Isometry { m: mat::lorentz_inverse(&self.m) }
    }

    pub fn apply(&self, p: &HPoint) -> HPoint {
        HPoint::from_raw_unchecked(mat::apply(&self.m, &p.0))
    }

    pub fn apply_tangent(&self, v: &HTangent) -> HTangent {
        HTangent::project(self.apply(&v.base), mat::apply(&self.m, &v.v))
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn det(&self) -> f64 {
        mat::det(&self.m)
    }

    pub fn lorentz_defect(&self) -> f64 {
        mat::lorentz_defect(&self.m)
    }

    /// Defect scaled by the squared entry size, the attainable accuracy of a
    /// rounded Lorentz matrix.
    pub fn relative_defect(&self) -> f64 {
        let s = mat::max_abs(&self.m).max(1.0);
        self.lorentz_defect() / (s * s)
    }

    pub fn distance_to(&self, other: &Isometry) -> f64 {
        mat::max_abs_diff(&self.m, &other.m)
    }

    /// Minkowski Gram–Schmidt on the columns, restoring `m^T J m = J`.
    pub fn reorthonormalized(&self) -> Isometry {
        let col = |j: usize| [self.m[0][j], self.m[1][j], self.m[2][j]];
        let mut c0 = col(0);
        let n0 = libm::sqrt(-minkowski(&c0, &c0));
        c0.iter_mut().for_each(|x| *x /= n0);
        let mut c1 = col(1);
        let k = minkowski(&c1, &c0);
        for i in 0..3 {
            c1[i] += k * c0[i];
        }
        let n1 = libm::sqrt(minkowski(&c1, &c1));
        c1.iter_mut().for_each(|x| *x /= n1);
        let mut c2 = col(2);
        let (k0, k1) = (minkowski(&c2, &c0), minkowski(&c2, &c1));
        for i in 0..3 {
            c2[i] += k0 * c0[i] - k1 * c1[i];
        }
        let n2 = libm::sqrt(minkowski(&c2, &c2));
        c2.iter_mut().for_each(|x| *x /= n2);
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            m[i] = [c0[i], c1[i], c2[i]];
        }
        Isometry { m }
    }

    /// Re-orthonormalizes only when the defect exceeds [`GEOMETRIC_TOL`].
    pub fn cleaned(&self) -> Isometry {
        if self.relative_defect() > GEOMETRIC_TOL {
            self.reorthonormalized()
        } else {
            *self
        }
    }
}

/// Translation length `l` of a hyperbolic isometry, from `trace = 1 + 2 cosh l`.
pub fn translation_length(g: &Isometry) -> Result<f64> {
    let tr = g.trace();
    if tr <= 3.0 + GEOMETRIC_TOL {
        return Err(Error::NotHyperbolic { trace: tr });
    }
    Ok(libm::acosh((tr.max(3.0) - 1.0) / 2.0))
}
