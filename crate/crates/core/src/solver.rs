//! Harmonic maps in a fixed class by damped weighted-Karcher iteration.
//!
//! Every sweep moves all vertices at once (Jacobi style) toward the
//! weighted barycenter of their neighbours, `x <- exp_x(tau r_x / W_x)`, with
//! one step factor `tau` chosen by Armijo backtracking on the total energy.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dd::{self, Dd, Dd3};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::hyp::{self, minkowski, HPoint, Isometry, Vec3};
use crate::marked::MarkedMap;
use crate::surface::{SurfaceModel, Word};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub residual_tol: f64,
    pub max_iters: usize,
    /// Initial step factor, in `(0, 1]`.
    pub step: f64,
    pub backtrack: f64,
    pub armijo: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { residual_tol: 1e-9, max_iters: 10_000, step: 1.0, backtrack: 0.5, armijo: 1e-4, seed: 0 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.residual_tol > 0.0) {
            return Err(Error::OutOfRange { what: "residual tolerance", value: self.residual_tol });
        }
        if !(self.step > 0.0 && self.step <= 1.0) {
            return Err(Error::OutOfRange { what: "step factor", value: self.step });
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::OutOfRange { what: "backtracking factor", value: self.backtrack });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub energy: f64,
    pub max_residual: f64,
    pub step: f64,
}

#[derive(Clone, Debug)]
pub struct SolveTrace {
    pub records: Vec<IterationRecord>,
    pub map: MarkedMap,
    pub converged: bool,
    pub iterations: usize,
}

impl SolveTrace {
    pub fn energy(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.energy)
    }

    pub fn residual(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.max_residual)
    }

    /// Largest energy increase between accepted iterates (0 when monotone).
    pub fn max_energy_increase(&self) -> f64 {
        self.records.windows(2).map(|w| w[1].energy - w[0].energy).fold(0.0, f64::max)
    }
}

fn max_norm(lifts: &[HPoint], r: &[Vec3]) -> f64 {
    lifts
        .iter()
        .zip(r)
        .map(|(p, v)| hyp::HTangent::project(*p, *v).norm())
        .fold(0.0, |m, x| if x.is_nan() { f64::INFINITY } else { m.max(x) })
}

/// Runs the Karcher iteration from the lifts of `map` until the largest
/// balanced residual is at most `cfg.residual_tol`. A run that hits the
/// iteration cap, or stalls at the roundoff floor, returns its partial
/// trace with `converged = false`.
pub fn solve(map: &MarkedMap, cfg: &SolverConfig) -> Result<SolveTrace> {
    cfg.validate()?;
    let graph = map.graph().clone();
    let weights: Vec<f64> = (0..graph.vertex_count()).map(|x| graph.vertex_weight(x)).collect();
    let mut lifts: Vec<HPoint> = map.lifts().to_vec();
    let as_dd = |l: &[HPoint]| l.iter().map(|p| dd::sheet_point(&p.coords())).collect::<Vec<Dd3>>();
    let mut energy = map.energy_at(&as_dd(&lifts));
    let mut energy_dd = Dd::new(energy);
    let mut resid = map.residuals_at(&as_dd(&lifts));
    let mut worst = max_norm(&lifts, &resid);
    let mut records = vec![IterationRecord { iteration: 0, energy, max_residual: worst, step: 0.0 }];
    let mut tau_hint = cfg.step;
    let mut converged = worst <= cfg.residual_tol;
    let mut iterations = 0;
    while !converged && iterations < cfg.max_iters {
        let dirs: Vec<Vec3> = lifts
            .iter()
            .zip(&resid)
            .zip(&weights)
            .map(|((p, r), w)| {
                let v = hyp::HTangent::project(*p, *r).components();
                [v[0] / w, v[1] / w, v[2] / w]
            })
            .collect();
        let slope0: f64 = -2.0 * resid.iter().zip(&dirs).map(|(r, d)| minkowski(r, d)).sum::<f64>();
        if !(slope0 < 0.0) {
            break;
        }
        let current = as_dd(&lifts);
        let noise = 8.0 * f64::EPSILON * (1.0 + energy.abs());
        let mut tau = tau_hint;
        let mut accepted = None;
        for _ in 0..64 {
            let cand: Vec<HPoint> = lifts.iter().zip(&dirs).map(|(p, d)| p.exp(&[tau * d[0], tau * d[1], tau * d[2]])).collect();
            let cand_dd = as_dd(&cand);
            let change = map.energy_change(&current, &cand_dd);
            if change <= cfg.armijo * tau * slope0 {
                accepted = Some((cand, change, None));
                break;
            }
            if change <= 0.0 && -change <= noise {
                // roundoff floor: the sufficient decrease is judged by the
                // trapezoid rule on the directional slopes at both ends
                let r_new = map.residuals_at(&cand_dd);
                let slope: f64 = lifts
                    .iter()
                    .zip(&dirs)
                    .zip(&r_new)
                    .map(|((p, d), r)| {
                        let n = libm::sqrt(minkowski(d, d).max(0.0));
                        let (c, s) = (libm::cosh(tau * n), libm::sinh(tau * n) * n);
                        let x = p.coords();
                        let vel = [s * x[0] + c * d[0], s * x[1] + c * d[1], s * x[2] + c * d[2]];
                        -2.0 * minkowski(r, &vel)
                    })
                    .sum();
                if 0.5 * (slope0 + slope) <= cfg.armijo * slope0 {
                    accepted = Some((cand, change, Some(r_new)));
                    break;
                }
            }
            tau *= cfg.backtrack;
        }
        let Some((cand, change, r_new)) = accepted else { break };
        iterations += 1;
        lifts = cand;
        // running sum of exact changes, so the recorded energies are monotone
        energy_dd = energy_dd + Dd::new(change);
        energy = energy_dd.to_f64();
        resid = r_new.unwrap_or_else(|| map.residuals_at(&as_dd(&lifts)));
        worst = max_norm(&lifts, &resid);
        records.push(IterationRecord { iteration: iterations, energy, max_residual: worst, step: tau });
        tau_hint = (2.0 * tau).min(cfg.step);
        converged = worst <= cfg.residual_tol;
    }
    Ok(SolveTrace { records, map: map.with_lifts(lifts)?, converged, iterations })
}

/// The isometry moving lift 0 to the origin and the first nondegenerate
/// edge leaving it onto the +x1 direction.
pub fn gauge_fixing_isometry(map: &MarkedMap) -> Isometry {
    let p = map.lifts()[0];
    let to_origin = Isometry::frame(&p).inverse();
    let graph = map.graph();
    let edge = graph.star(0).edges.iter().copied().find(|&e| map.edge_length(e) > 1e-12);
    let angle = edge.map_or(0.0, |e| {
        let v = to_origin.apply_tangent(&map.edge_vector(e)).components();
        libm::atan2(v[2], v[1])
    });
    Isometry::rotation(-angle).compose(&to_origin)
}

pub fn gauge_fix(map: &MarkedMap) -> Result<MarkedMap> {
    map.gauge_transform(&gauge_fixing_isometry(map))
}

#[derive(Clone, Debug)]
pub struct UniquenessReport {
    pub starts: usize,
    pub converged: Vec<bool>,
    pub energies: Vec<f64>,
    /// Largest distance between lifts of the same vertex across starts.
    pub max_deviation: f64,
    /// The same after gauge fixing every result.
    pub max_gauge_fixed_deviation: f64,
    /// The image of the fundamental group is trivial or cyclic.
    pub image_cyclic: bool,
    pub hypothesis_violated: bool,
    pub seed: u64,
}

/// Elements of the surface group carried by the loops of a spanning tree.
pub fn loop_elements(map: &MarkedMap) -> Vec<Isometry> {
    let graph = map.graph();
    let parent = graph.spanning_tree();
    let mut tau: Vec<Option<Isometry>> = vec![None; graph.vertex_count()];
    tau[0] = Some(Isometry::identity());
    // parents are reached first in breadth-first order
    let mut order: Vec<usize> = (0..graph.vertex_count()).collect();
    let depth = |mut v: usize| {
        let mut d = 0;
        while let Some(e) = parent[v] {
            v = graph.origin(e);
            d += 1;
        }
        d
    };
    order.sort_by_key(|&v| depth(v));
    for v in order {
        if let Some(e) = parent[v] {
            let up = tau[graph.origin(e)].unwrap_or(Isometry::identity());
            tau[v] = Some(up.compose(map.deck_matrix(e)));
        }
    }
    let tau: Vec<Isometry> = tau.into_iter().map(|t| t.unwrap_or(Isometry::identity())).collect();
    graph
        .edges()
        .filter(|&e| parent[graph.terminus(e)] != Some(e) && parent[graph.origin(e)] != Some(graph.reversal(e)))
        .map(|e| tau[graph.origin(e)].compose(map.deck_matrix(e)).compose(&tau[graph.terminus(e)].inverse()).cleaned())
        .collect()
}

/// Whether the loop elements generate a trivial or cyclic group; in a
/// surface group that happens exactly when they pairwise commute.
pub fn image_is_cyclic(map: &MarkedMap) -> bool {
    let elems: Vec<Isometry> = loop_elements(map).into_iter().filter(|g| g.distance_to(&Isometry::identity()) > 1e-8 * scale(g)).collect();
    elems.iter().enumerate().all(|(i, a)| {
        elems[i + 1..].iter().all(|b| {
            let (ab, ba) = (a.compose(b), b.compose(a));
            ab.distance_to(&ba) <= 1e-8 * scale(a) * scale(b)
        })
    })
}

fn scale(g: &Isometry) -> f64 {
    g.matrix().iter().flatten().fold(1.0_f64, |a, x| a.max(x.abs()))
}

/// Solves from `n_starts` random initial lifts inside the fundamental
/// polygon and compares the results.
pub fn uniqueness_probe(
    surface: Arc<SurfaceModel>,
    graph: Arc<WeightedGraph>,
    decks: Vec<Word>,
    n_starts: usize,
    cfg: &SolverConfig,
) -> Result<UniquenessReport> {
    if n_starts < 2 {
        return Err(Error::OutOfRange { what: "number of starts", value: n_starts as f64 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = graph.vertex_count();
    let base = MarkedMap::new(surface.clone(), graph, vec![surface.barycenter(); n], decks)?;
    let mut results = Vec::with_capacity(n_starts);
    for _ in 0..n_starts {
        let lifts: Vec<HPoint> = (0..n).map(|_| surface.random_point(&mut rng)).collect();
        results.push(solve(&base.with_lifts(lifts)?, cfg)?);
    }
    let fixed = results.iter().map(|r| gauge_fix(&r.map)).collect::<Result<Vec<_>>>()?;
    let spread = |maps: &[&MarkedMap]| {
        let mut worst: f64 = 0.0;
        for (i, a) in maps.iter().enumerate() {
            for b in &maps[i + 1..] {
                for (p, q) in a.lifts().iter().zip(b.lifts()) {
                    worst = worst.max(hyp::dist(p, q));
                }
            }
        }
        worst
    };
    let raw: Vec<&MarkedMap> = results.iter().map(|r| &r.map).collect();
    let max_deviation = spread(&raw);
    let max_gauge_fixed_deviation = spread(&fixed.iter().collect::<Vec<_>>());
    let image_cyclic = image_is_cyclic(&base);
    Ok(UniquenessReport {
        starts: n_starts,
        converged: results.iter().map(|r| r.converged).collect(),
        energies: results.iter().map(|r| r.energy()).collect(),
        max_deviation,
        max_gauge_fixed_deviation,
        image_cyclic,
        hypothesis_violated: image_cyclic || max_deviation > 1e-6,
        seed: cfg.seed,
    })
}

/// Finite-difference Hessian of the energy in normal coordinates at each
/// vertex lift: coordinate `2v + k` moves vertex `v` along the `k`-th
/// vector of [`hyp::tangent_frame`].
#[derive(Clone, Debug, PartialEq)]
pub struct Hessian {
    pub dim: usize,
    /// Row-major, symmetrized.
    pub entries: Vec<f64>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
}

impl Hessian {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += v[i] * self.entries[i * self.dim + j] * v[j];
            }
        }
        acc
    }
}

pub(crate) struct NormalCoordinates<'a> {
    map: &'a MarkedMap,
    base: Vec<Dd3>,
    frames: Vec<[Vec3; 2]>,
}

impl<'a> NormalCoordinates<'a> {
    pub(crate) fn new(map: &'a MarkedMap) -> Self {
        let frames = map.lifts().iter().map(hyp::tangent_frame).collect();
        NormalCoordinates { map, base: map.lifted(), frames }
    }

    /// Energy with vertex `v` moved to `exp(coords[2v] e1 + coords[2v+1] e2)`.
    pub(crate) fn energy(&self, coords: &[f64]) -> f64 {
        let lifts: Vec<Dd3> = self
            .base
            .iter()
            .enumerate()
            .map(|(v, x)| {
                let (a, b) = (coords[2 * v], coords[2 * v + 1]);
                if a == 0.0 && b == 0.0 {
                    return *x;
                }
                let [e1, e2] = self.frames[v];
                dd::exp3(x, &[a * e1[0] + b * e2[0], a * e1[1] + b * e2[1], a * e1[2] + b * e2[2]])
            })
            .collect();
        self.map.energy_at(&lifts)
    }
}

pub fn hessian_fd(map: &MarkedMap, h: f64) -> Result<Hessian> {
    if !(1e-6..=1e-3).contains(&h) {
        return Err(Error::OutOfRange { what: "finite-difference step", value: h });
    }
    let nc = NormalCoordinates::new(map);
    let dim = 2 * map.lifts().len();
    let mut x = vec![0.0; dim];
    let e0 = nc.energy(&x);
    let mut entries = vec![0.0; dim * dim];
    for i in 0..dim {
        x[i] = h;
        let ep = nc.energy(&x);
        x[i] = -h;
        let em = nc.energy(&x);
        x[i] = 0.0;
        entries[i * dim + i] = (ep - 2.0 * e0 + em) / (h * h);
        for j in 0..i {
            let mut f = |a: f64, b: f64| {
                x[i] = a;
                x[j] = b;
                let e = nc.energy(&x);
                x[i] = 0.0;
                x[j] = 0.0;
                e
            };
            let v = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
            entries[i * dim + j] = v;
            entries[j * dim + i] = v;
        }
    }
    let eigenvalues = symmetric_eigenvalues(dim, &entries);
    Ok(Hessian { dim, entries, eigenvalues })
}

/// Ascending eigenvalues of a symmetric row-major matrix.
pub fn symmetric_eigenvalues(dim: usize, entries: &[f64]) -> Vec<f64> {
    let m = DMatrix::from_row_slice(dim, dim, entries);
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::bouquet;
    use crate::surface::{build_regular_4g_surface, regular_4g_bouquet_decks};

    #[test]
    fn bouquet_converges_to_center() {
        let s = Arc::new(build_regular_4g_surface(2).unwrap());
        let g = Arc::new(bouquet(4).unwrap());
        let m = MarkedMap::new(s, g, vec![HPoint::from_polar(0.7, 2.0)], regular_4g_bouquet_decks(2)).unwrap();
        let t = solve(&m, &SolverConfig::default()).unwrap();
        assert!(t.converged, "{:?}", t.records.last());
        assert!(hyp::dist(&t.map.lifts()[0], &HPoint::origin()) < 1e-8);
        assert!(t.max_energy_increase() <= 1e-12);
    }

    #[test]
    fn config_is_checked() {
        let bad = SolverConfig { step: 1.5, ..SolverConfig::default() };
        assert!(bad.validate().is_err());
        let bad = SolverConfig { residual_tol: 0.0, ..SolverConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let ev = symmetric_eigenvalues(2, &[3.0, 0.0, 0.0, -1.0]);
        assert_eq!(ev, vec![-1.0, 3.0]);
    }
}
