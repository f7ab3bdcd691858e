//! First and second variation of the energy under vertex motions.
//!
//! A variation moves each vertex lift along a geodesic, `x_v(s) = exp(s V_v)`,
//! and each edge stays the geodesic between its moving endpoints. Along an
//! edge of length `l` the variation field is then a Jacobi field in
//! curvature -1,
//!
//! `J(t) = (c + d t) u(t) + (alpha cosh(l t) + beta sinh(l t)) n`,
//!
//! with `u` the unit tangent and `n` the unit normal, and every integral in
//! the second variation has a closed form.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hyp::{self, minkowski, minkowski_cross, HPoint, HTangent, Vec3};
use crate::marked::MarkedMap;
use crate::solver::{self, NormalCoordinates};

/// One tangent vector per vertex, based at the vertex lift.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexVariation {
    vectors: Vec<HTangent>,
}

impl VertexVariation {
    pub fn new(map: &MarkedMap, vectors: Vec<HTangent>) -> Result<Self> {
        if vectors.len() != map.lifts().len() {
            return Err(Error::Map(alloc::format!("{} variation vectors for {} vertices", vectors.len(), map.lifts().len())));
        }
        for (v, p) in vectors.iter().zip(map.lifts()) {
            let gap = hyp::dist(v.base(), p);
            if gap > hyp::GEOMETRIC_TOL {
                return Err(Error::NotTangent { defect: gap });
            }
            HTangent::new(*p, v.components())?;
        }
        Ok(VertexVariation { vectors })
    }

    /// From coordinates in the canonical frame at each lift: vertex `v`
    /// gets `coords[2v] e1 + coords[2v + 1] e2`.
    pub fn from_frame_coords(map: &MarkedMap, coords: &[f64]) -> Result<Self> {
        if coords.len() != 2 * map.lifts().len() {
            return Err(Error::Map(alloc::format!("{} coordinates for {} vertices", coords.len(), map.lifts().len())));
        }
        let vectors = map.lifts().iter().enumerate().map(|(v, p)| HTangent::from_frame(*p, coords[2 * v], coords[2 * v + 1])).collect();
        Ok(VertexVariation { vectors })
    }

    pub fn zero(map: &MarkedMap) -> Self {
        VertexVariation { vectors: map.lifts().iter().map(|p| HTangent::zero(*p)).collect() }
    }

    /// Uniform frame coordinates in `[-scale, scale]`.
    pub fn random<R: Rng + ?Sized>(map: &MarkedMap, rng: &mut R, scale: f64) -> Self {
        let coords: Vec<f64> = (0..2 * map.lifts().len()).map(|_| rng.random_range(-scale..scale)).collect();
        Self::from_frame_coords(map, &coords).unwrap_or_else(|_| Self::zero(map))
    }

    pub fn vectors(&self) -> &[HTangent] {
        &self.vectors
    }

    pub fn frame_coords(&self) -> Vec<f64> {
        self.vectors
            .iter()
            .flat_map(|v| {
                let (a, b) = v.frame_coords();
                [a, b]
            })
            .collect()
    }

    pub fn scaled(&self, k: f64) -> Self {
        VertexVariation { vectors: self.vectors.iter().map(|v| v.scaled(k)).collect() }
    }

    pub fn plus(&self, other: &Self) -> Self {
        VertexVariation { vectors: self.vectors.iter().zip(&other.vectors).map(|(a, b)| a.plus(b)).collect() }
    }

    /// `V_e(0)` and `V_e(1)`: the vector at the origin of `e` and the deck
    /// image of the vector at its terminus.
    pub fn edge_values(&self, map: &MarkedMap, e: usize) -> (HTangent, HTangent) {
        let g = map.graph();
        let v1 = map.deck_matrix(e).apply_tangent(&self.vectors[g.terminus(e)]);
        (self.vectors[g.origin(e)], HTangent::project(map.edge_end(e), v1.components()))
    }
}

/// Jacobi field along the geodesic from `x` to `y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobiField {
    pub start: HPoint,
    pub length: f64,
    /// Unit tangent at the start.
    pub tangent: Vec3,
    /// Unit normal, parallel along the whole edge.
    pub normal: Vec3,
    pub c: f64,
    pub d: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl JacobiField {
    /// The field with the prescribed end values, or `None` when `x = y`.
    pub fn between(x: &HPoint, y: &HPoint, v0: &HTangent, v1: &HTangent) -> Option<JacobiField> {
        let velocity = hyp::log_map(x, y);
        let length = velocity.norm();
        if !(length > 1e-14) {
            return None;
        }
        let v = velocity.components();
        let p = x.coords();
        let u = [v[0] / length, v[1] / length, v[2] / length];
        let n = minkowski_cross(&p, &u);
        let (ch, sh) = (libm::cosh(length), libm::sinh(length));
        let u1 = [sh * p[0] + ch * u[0], sh * p[1] + ch * u[1], sh * p[2] + ch * u[2]];
        let (w0, w1) = (v0.components(), v1.components());
        let (a0, b0) = (minkowski(&w0, &u), minkowski(&w0, &n));
        let (a1, b1) = (minkowski(&w1, &u1), minkowski(&w1, &n));
        Some(JacobiField { start: *x, length, tangent: u, normal: n, c: a0, d: a1 - a0, alpha: b0, beta: (b1 - b0 * ch) / sh })
    }

    pub fn point(&self, t: f64) -> HPoint {
        let l = self.length * t;
        let (p, u) = (self.start.coords(), self.tangent);
        let (ch, sh) = (libm::cosh(l), libm::sinh(l));
        HPoint::from_raw_unchecked([ch * p[0] + sh * u[0], ch * p[1] + sh * u[1], ch * p[2] + sh * u[2]])
    }

    /// The field at parameter `t`, as an ambient vector tangent at `point(t)`.
    pub fn at(&self, t: f64) -> HTangent {
        let l = self.length * t;
        let (p, u, n) = (self.start.coords(), self.tangent, self.normal);
        let (ch, sh) = (libm::cosh(l), libm::sinh(l));
        let ut = [sh * p[0] + ch * u[0], sh * p[1] + ch * u[1], sh * p[2] + ch * u[2]];
        let a = self.c + self.d * t;
        let b = self.alpha * ch + self.beta * sh;
        HTangent::project(self.point(t), [a * ut[0] + b * n[0], a * ut[1] + b * n[1], a * ut[2] + b * n[2]])
    }

    /// `int_0^1 |tangential part of nabla_T J|^2 dt`.
    pub fn tangential_integral(&self) -> f64 {
        self.d * self.d
    }

    /// `int_0^1 (|nabla_T J_normal|^2 + l^2 |J_normal|^2) dt`, written as a
    /// sum of two non-negative terms.
    pub fn normal_integral(&self) -> f64 {
        let x = 2.0 * self.length;
        let (p, m) = (self.alpha + self.beta, self.alpha - self.beta);
        0.25 * self.length * (p * p * libm::expm1(x) - m * m * libm::expm1(-x))
    }
}

/// The Jacobi field along half-edge `e` induced by the vertex variation.
pub fn jacobi_solve(map: &MarkedMap, e: usize, var: &VertexVariation) -> Result<JacobiField> {
    let (v0, v1) = var.edge_values(map, e);
    let x = map.lifts()[map.graph().origin(e)];
    JacobiField::between(&x, &map.edge_end(e), &v0, &v1).ok_or(Error::DegenerateEdge(e))
}

/// `dE/ds = -2 sum over half-edges m(e) <V_e(0), T_e(0)>`.
pub fn first_variation(map: &MarkedMap, var: &VertexVariation) -> f64 {
    let g = map.graph();
    -2.0 * (0..g.half_edge_count())
        .map(|e| g.weight(e) * minkowski(&var.vectors[g.origin(e)].components(), &map.edge_vector(e).components()))
        .sum::<f64>()
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SecondVariation {
    pub total: f64,
    pub tangential: f64,
    pub normal: f64,
}

/// `d^2E/ds^2 = sum over half-edges m(e) int (|nabla_T V|^2 + |V_perp|^2 |T|^2) dt`
/// for the geodesic endpoint variation, in closed form.
pub fn second_variation_geodesic(map: &MarkedMap, var: &VertexVariation) -> SecondVariation {
    let g = map.graph();
    let mut out = SecondVariation::default();
    for e in g.edges() {
        let m = 2.0 * g.weight(e);
        match jacobi_solve(map, e, var) {
            Ok(j) => {
                out.tangential += m * j.tangential_integral();
                out.normal += m * j.normal_integral();
            }
            Err(_) => {
                // coincident endpoints: the edge is the straight segment
                // between the two moving points
                let (v0, v1) = var.edge_values(map, e);
                let dv = [
                    v1.components()[0] - v0.components()[0],
                    v1.components()[1] - v0.components()[1],
                    v1.components()[2] - v0.components()[2],
                ];
                out.tangential += m * minkowski(&dv, &dv).max(0.0);
            }
        }
    }
    out.total = out.tangential + out.normal;
    out
}

/// Central difference of the energy along `s -> exp(s V)`.
pub fn fd_first_variation(map: &MarkedMap, var: &VertexVariation, h: f64) -> f64 {
    let nc = NormalCoordinates::new(map);
    let c = var.frame_coords();
    let at = |s: f64| nc.energy(&c.iter().map(|x| s * x).collect::<Vec<_>>());
    (at(h) - at(-h)) / (2.0 * h)
}

/// Central second difference of the energy along `s -> exp(s V)`.
pub fn fd_second_variation(map: &MarkedMap, var: &VertexVariation, h: f64) -> f64 {
    let nc = NormalCoordinates::new(map);
    let c = var.frame_coords();
    let at = |s: f64| nc.energy(&c.iter().map(|x| s * x).collect::<Vec<_>>());
    (at(h) - 2.0 * at(0.0) + at(-h)) / (h * h)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HessianConsistency {
    pub samples: usize,
    pub step: f64,
    pub max_relative_deviation: f64,
    pub min_second_variation: f64,
    pub min_eigenvalue: f64,
}

/// Compares the closed-form second variation with `V^T H V` from the
/// finite-difference Hessian on random variations.
pub fn hessian_consistency(map: &MarkedMap, n_random: usize, seed: u64, h: f64) -> Result<HessianConsistency> {
    let hess = solver::hessian_fd(map, h)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut lowest = f64::INFINITY;
    for _ in 0..n_random {
        let v = VertexVariation::random(map, &mut rng, 1.0);
        let closed = second_variation_geodesic(map, &v).total;
        let fd = hess.quadratic_form(&v.frame_coords());
        worst = worst.max((closed - fd).abs() / closed.abs().max(1e-300));
        lowest = lowest.min(closed);
    }
    Ok(HessianConsistency {
        samples: n_random,
        step: h,
        max_relative_deviation: worst,
        min_second_variation: lowest,
        min_eigenvalue: hess.min_eigenvalue(),
    })
}
