//! Hyperbolic trigonometry for regular polygons, right-angled hexagons and
//! triangles, plus a turtle that lays out a polygon from side lengths and
//! angles.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hyp::{self, minkowski, minkowski_cross, HPoint, Isometry, Vec3};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularPolygon {
    pub sides: usize,
    pub interior_angle: f64,
    pub inradius: f64,
    pub circumradius: f64,
    pub side_length: f64,
    pub area: f64,
}

/// Regular `n`-gon with the given interior angle, from the right triangle with
/// angles `pi/n`, `interior_angle/2`, `pi/2`.
pub fn regular_polygon(n: usize, interior_angle: f64) -> Result<RegularPolygon> {
    if n < 3 {
        return Err(Error::OutOfRange { what: "polygon side count", value: n as f64 });
    }
    let nf = n as f64;
    let euclidean = PI * (nf - 2.0) / nf;
    if !(interior_angle > 0.0 && interior_angle < euclidean) {
        return Err(Error::NotRealizable("regular polygon with this interior angle"));
    }
    let (half, center) = (interior_angle / 2.0, PI / nf);
    let inradius = libm::acosh(libm::cos(half) / libm::sin(center));
    let circumradius = libm::acosh(1.0 / (libm::tan(center) * libm::tan(half)));
    let side_length = 2.0 * libm::acosh(libm::cos(center) / libm::sin(half));
    let area = (nf - 2.0) * PI - nf * interior_angle;
    Ok(RegularPolygon { sides: n, interior_angle, inradius, circumradius, side_length, area })
}

impl RegularPolygon {
    /// Counterclockwise corners on the circumcircle about the origin. Side
    /// `i` runs from corner `i` to corner `i + 1` and its midpoint lies in
    /// direction `2 pi i / n`.
    pub fn vertices(&self) -> Vec<HPoint> {
        let n = self.sides as f64;
        (0..self.sides).map(|i| HPoint::from_polar(self.circumradius, (2.0 * i as f64 - 1.0) * PI / n)).collect()
    }

    /// Midpoint of side `i`.
    pub fn side_midpoint(&self, i: usize) -> HPoint {
        HPoint::from_polar(self.inradius, 2.0 * PI * i as f64 / self.sides as f64)
    }
}

/// The length `t(s)` of the sides complementary to three alternating sides
/// of length `s` in a right-angled hexagon: `sinh(s/2) sinh(t/2) = 1/2`.
pub fn hexagon_partner_length(s: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::OutOfRange { what: "hexagon side length", value: s });
    }
    Ok(2.0 * libm::asinh(0.5 / libm::sinh(s / 2.0)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Triangle {
    pub angles: [f64; 3],
    /// `sides[i]` is opposite `angles[i]`.
    pub sides: [f64; 3],
    pub area: f64,
}

/// The triangle with the given angles, from the dual law of cosines.
/// `1/p + 1/q + 1/r < 1` with every index at least 2, decided exactly.
pub fn is_hyperbolic_triple(p: u32, q: u32, r: u32) -> bool {
    let (p, q, r) = (p as u64, q as u64, r as u64);
    p >= 2 && q >= 2 && r >= 2 && q * r + p * r + p * q < p * q * r
}

pub fn triangle_from_angles(alpha: f64, beta: f64, gamma: f64) -> Result<Triangle> {
    let angles = [alpha, beta, gamma];
    if angles.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::OutOfRange { what: "triangle angle", value: angles.iter().cloned().fold(f64::INFINITY, f64::min) });
    }
    let sum = alpha + beta + gamma;
    if !(sum < PI) {
        return Err(Error::NotRealizable("triangle with angle sum at least pi"));
    }
    let side = |a: f64, b: f64, c: f64| libm::acosh((libm::cos(a) + libm::cos(b) * libm::cos(c)) / (libm::sin(b) * libm::sin(c)));
    Ok(Triangle { angles, sides: [side(alpha, beta, gamma), side(beta, gamma, alpha), side(gamma, alpha, beta)], area: PI - sum })
}

/// Side lengths of the right-angled hexagon with sides 0, 2 and 4 given;
/// side `k + 3` is opposite side `k`.
pub fn right_angled_hexagon_sides(alternating: [f64; 3]) -> Result<[f64; 6]> {
    if alternating.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::OutOfRange { what: "hexagon side length", value: alternating.iter().cloned().fold(f64::INFINITY, f64::min) });
    }
    let [a, b, c] = alternating;
    let opp = |x: f64, y: f64, z: f64| libm::acosh((libm::cosh(y) * libm::cosh(z) + libm::cosh(x)) / (libm::sinh(y) * libm::sinh(z)));
    // side 3 is opposite a, side 5 opposite b, side 1 opposite c
    Ok([a, opp(c, a, b), b, opp(a, b, c), c, opp(b, c, a)])
}

/// Walks a polygon counterclockwise from the origin, heading along +x1.
/// `angles[i]` is the interior angle at the end of side `i`. Returns the
/// corners (corner `i` starts side `i`) and the closure defect, i.e. the
/// distance between the end of the walk and the start.
pub fn turtle_polygon(lengths: &[f64], angles: &[f64]) -> Result<(Vec<HPoint>, f64)> {
    if lengths.len() != angles.len() || lengths.len() < 3 {
        return Err(Error::OutOfRange { what: "turtle polygon size", value: lengths.len() as f64 });
    }
    let mut p: Vec3 = [1.0, 0.0, 0.0];
    let mut u: Vec3 = [0.0, 1.0, 0.0];
    let mut corners = Vec::with_capacity(lengths.len());
    for (&len, &angle) in lengths.iter().zip(angles) {
        corners.push(HPoint::from_raw_unchecked(p));
        let (ch, sh) = (libm::cosh(len), libm::sinh(len));
        let np = [ch * p[0] + sh * u[0], ch * p[1] + sh * u[1], ch * p[2] + sh * u[2]];
        let nu = [sh * p[0] + ch * u[0], sh * p[1] + ch * u[1], sh * p[2] + ch * u[2]];
        p = HPoint::from_raw_unchecked(np).coords();
        u = unit_tangent(&p, &nu);
        let n = minkowski_cross(&p, &u);
        let ext = PI - angle;
        let (c, s) = (libm::cos(ext), libm::sin(ext));
        u = unit_tangent(&p, &[c * u[0] + s * n[0], c * u[1] + s * n[1], c * u[2] + s * n[2]]);
    }
    let gap = hyp::dist(&HPoint::from_raw_unchecked(p), &corners[0]);
    Ok((corners, gap))
}

fn unit_tangent(p: &Vec3, v: &Vec3) -> Vec3 {
    let k = minkowski(v, p);
    let w = [v[0] + k * p[0], v[1] + k * p[1], v[2] + k * p[2]];
    let n = libm::sqrt(minkowski(&w, &w));
    [w[0] / n, w[1] / n, w[2] / n]
}

/// Moves a polygon so that the Minkowski centroid of its corners is the origin.
pub fn recentered(corners: &[HPoint]) -> Vec<HPoint> {
    let c = HPoint::centroid(corners);
    let back = Isometry::frame(&c).inverse();
    corners.iter().map(|p| back.apply(p)).collect()
}

/// Right-angled hexagon with alternating sides `alternating`, centered at the
/// origin, corners counterclockwise.
pub fn right_angled_hexagon(alternating: [f64; 3]) -> Result<Vec<HPoint>> {
    let sides = right_angled_hexagon_sides(alternating)?;
    let (corners, gap) = turtle_polygon(&sides, &[PI / 2.0; 6])?;
    if gap > 1e-8 * (1.0 + sides.iter().cloned().fold(0.0, f64::max)) {
        return Err(Error::NotRealizable("right-angled hexagon (turtle walk does not close)"));
    }
    Ok(recentered(&corners))
}

/// The right-angled hexagon with sides 0, 2, 4 of length `t` and sides 1,
/// 3, 5 of the partner length, built in closed form. Its corners lie on one
/// circle of radius `R` about the origin; side 0 subtends the central angle
/// `a` and side 1 subtends `2pi/3 - a`, where
/// `sinh(t/2) / sin(a/2) = sinh(s/2) / sin(pi/3 - a/2) = sinh R`.
pub fn symmetric_right_angled_hexagon(t: f64) -> Result<Vec<HPoint>> {
    let s = hexagon_partner_length(t)?;
    let (ht, hs) = (libm::sinh(0.5 * t), libm::sinh(0.5 * s));
    let f = |a: f64| ht * libm::sin(PI / 3.0 - 0.5 * a) - hs * libm::sin(0.5 * a);
    let (mut lo, mut hi) = (0.0, 2.0 * PI / 3.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = 0.5 * (lo + hi);
    let r = libm::asinh(ht / libm::sin(0.5 * a));
    let b = 2.0 * PI / 3.0 - a;
    let mut phi = -0.5 * a;
    let mut corners = Vec::with_capacity(6);
    for k in 0..6 {
        corners.push(HPoint::from_polar(r, phi));
        phi += if k % 2 == 0 { a } else { b };
    }
    Ok(corners)
}

/// Interior angles of a counterclockwise geodesic polygon.
pub fn interior_angles(corners: &[HPoint]) -> Vec<f64> {
    let n = corners.len();
    (0..n).map(|i| hyp::interior_angle(&corners[(i + n - 1) % n], &corners[i], &corners[(i + 1) % n])).collect()
}

/// Area of a simple counterclockwise geodesic polygon by its angle defect.
pub fn polygon_area(corners: &[HPoint]) -> f64 {
    let n = corners.len() as f64;
    (n - 2.0) * PI - interior_angles(corners).iter().sum::<f64>()
}

/// Side lengths of a closed polygon, side `i` from corner `i` to `i + 1`.
pub fn side_lengths(corners: &[HPoint]) -> Vec<f64> {
    let n = corners.len();
    (0..n).map(|i| hyp::dist(&corners[i], &corners[(i + 1) % n])).collect()
}
