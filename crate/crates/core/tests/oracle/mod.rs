//! Reference constructions that share no code with the crate: raw hyperboloid
//! arithmetic, bisection and geodesic intersection.

#![allow(dead_code)]

use std::f64::consts::PI;

pub type V = [f64; 3];

pub fn mink(a: &V, b: &V) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn dist(a: &V, b: &V) -> f64 {
    (-mink(a, b)).max(1.0).acosh()
}

pub fn polar(r: f64, theta: f64) -> V {
    [r.cosh(), r.sinh() * theta.cos(), r.sinh() * theta.sin()]
}

fn normalize(v: &V) -> V {
    let n = (-mink(v, v)).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Angle at `p` between the geodesics towards `a` and `b`.
pub fn angle_at(p: &V, a: &V, b: &V) -> f64 {
    let tangent = |q: &V| {
        let k = mink(p, q);
        [q[0] + k * p[0], q[1] + k * p[1], q[2] + k * p[2]]
    };
    let (u, v) = (tangent(a), tangent(b));
    (mink(&u, &v) / (mink(&u, &u) * mink(&v, &v)).sqrt()).clamp(-1.0, 1.0).acos()
}

/// Root of a monotone function on `[lo, hi]` by bisection.
pub fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub struct Polygon {
    pub inradius: f64,
    pub circumradius: f64,
    pub side: f64,
}

/// Regular `n`-gon with the given interior angle: the circumradius is found
/// by bisection on the measured corner angle.
pub fn regular_polygon(n: usize, angle: f64) -> Polygon {
    let corner = |r: f64, k: usize| polar(r, 2.0 * PI * k as f64 / n as f64);
    let measured = |r: f64| angle_at(&corner(r, 1), &corner(r, 0), &corner(r, 2));
    let r = bisect(1e-9, 30.0, |r| measured(r) - angle);
    let (a, b) = (corner(r, 0), corner(r, 1));
    let mid = normalize(&[a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
    Polygon { inradius: dist(&[1.0, 0.0, 0.0], &mid), circumradius: r, side: dist(&a, &b) }
}

/// Triangle with angles `alpha` at A, `beta` at B and `gamma` at C: A at the
/// origin, B on the x1 axis, the side from B shot at angle `beta` and
/// intersected with the ray from A. The length |AB| is found by bisection on
/// the measured angle at C. Returns the sides opposite A, B, C.
pub fn triangle(alpha: f64, beta: f64, gamma: f64) -> [f64; 3] {
    let vertices = |c: f64| -> Option<(V, V, V)> {
        let a = [1.0, 0.0, 0.0];
        let b = polar(c, 0.0);
        // unit tangent at b pointing back to a, turned by beta towards +x2
        let d = [-beta.cos() * c.sinh(), -beta.cos() * c.cosh(), beta.sin()];
        let m = [0.0, -alpha.sin(), alpha.cos()];
        let mb = m[1] * b[1] + m[2] * b[2];
        let md = m[1] * d[1] + m[2] * d[2];
        let th = -mb / md;
        if !(th > 0.0 && th < 1.0) {
            return None;
        }
        let u = th.atanh();
        let cpt = [b[0] * u.cosh() + d[0] * u.sinh(), b[1] * u.cosh() + d[1] * u.sinh(), b[2] * u.cosh() + d[2] * u.sinh()];
        Some((a, b, cpt))
    };
    let angle_c = |c: f64| vertices(c).map_or(0.0, |(a, b, cp)| angle_at(&cp, &a, &b));
    let c = bisect(1e-9, 20.0, |c| angle_c(c) - gamma);
    let (a, b, cp) = vertices(c).expect("triangle closes");
    [dist(&b, &cp), dist(&a, &cp), dist(&a, &b)]
}

/// Translation length of a boost by `a`, read off the trace of its matrix
/// `trace = 1 + 2 cosh(a)`.
pub fn length_from_trace(trace: f64) -> f64 {
    ((trace - 1.0) / 2.0).max(1.0).acosh()
}
