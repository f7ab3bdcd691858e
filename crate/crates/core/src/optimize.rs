//! Outer minimization of the harmonic energy over a metric family, and the
//! closed-form analysis of the hexagon family.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::family::{FamilyKind, MetricFamily};
use crate::hyp::HPoint;
use crate::marked::MarkedMap;
use crate::solver::{self, SolverConfig};
use crate::trig;

/// `6 (g - 1) (m_d s^2 + m_c t(s)^2)`: the energy of the hexagon
/// one-skeleton of the genus-`g` hexagon surface.
pub fn hexagon_energy_closed_form(genus: usize, s: f64, m_c: f64, m_d: f64) -> Result<f64> {
    let t = trig::hexagon_partner_length(s)?;
    Ok(6.0 * (genus as f64 - 1.0) * (m_d * s * s + m_c * t * t))
}

/// `order * (m1 l1^2 + m2 l2^2 + m3 l3^2)` where `l_i` is the side of the
/// `(p, q, r)` triangle opposite the angle `pi / p_i`.
pub fn triangle_energy(p: u32, q: u32, r: u32, group_order: u32, weights: [f64; 3]) -> Result<f64> {
    if !trig::is_hyperbolic_triple(p, q, r) {
        return Err(Error::NotRealizable("triangle group with 1/p + 1/q + 1/r >= 1"));
    }
    if group_order == 0 {
        return Err(Error::OutOfRange { what: "group order", value: 0.0 });
    }
    let pi = core::f64::consts::PI;
    let tri = trig::triangle_from_angles(pi / p as f64, pi / q as f64, pi / r as f64)?;
    let sum: f64 = tri.sides.iter().zip(weights).map(|(l, m)| m * l * l).sum();
    Ok(group_order as f64 * sum)
}

/// Harmonic energy at one parameter.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub parameter: f64,
    pub energy: f64,
    pub max_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub map: MarkedMap,
}

/// Solves for the harmonic map at each requested parameter. In warm mode the
/// previous solution's lifts seed the next solve; in cold mode every solve
/// starts with all vertices at the polygon barycenter.
#[derive(Clone, Debug)]
pub struct EnergyOracle {
    pub family: MetricFamily,
    pub cfg: SolverConfig,
    pub warm: bool,
    previous: Option<Vec<HPoint>>,
    pub evaluations: usize,
}

impl EnergyOracle {
    pub fn new(family: MetricFamily, cfg: SolverConfig) -> Self {
        EnergyOracle { family, cfg, warm: true, previous: None, evaluations: 0 }
    }

    pub fn cold(mut self) -> Self {
        self.warm = false;
        self
    }

    pub fn evaluate(&mut self, theta: f64) -> Result<Evaluation> {
        let member = self.family.member(theta)?;
        let start = match (&self.previous, self.warm) {
            (Some(lifts), true) => member.map_with_lifts(lifts.clone())?,
            _ => member.seed_map()?,
        };
        let trace = solver::solve(&start, &self.cfg)?;
        self.evaluations += 1;
        if !trace.converged {
            return Err(Error::NotConverged { iterations: trace.iterations, residual: trace.residual() });
        }
        self.previous = Some(trace.map.lifts().to_vec());
        Ok(Evaluation {
            parameter: theta,
            energy: trace.energy(),
            max_residual: trace.residual(),
            iterations: trace.iterations,
            converged: trace.converged,
            map: trace.map,
        })
    }

    pub fn energy(&mut self, theta: f64) -> Result<f64> {
        Ok(self.evaluate(theta)?.energy)
    }
}

/// `E_C(theta)`: the energy of the harmonic map on the surface at `theta`,
/// solved from a cold start.
pub fn energy_of_parameter(family: &MetricFamily, theta: f64, cfg: &SolverConfig) -> Result<Evaluation> {
    EnergyOracle::new(family.clone(), cfg.clone()).cold().evaluate(theta)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Minimum {
    pub theta: f64,
    pub energy: f64,
    pub evaluations: usize,
}

/// Golden-section search for the minimum of `f` on `[a, b]` down to a
/// bracket of width `tol`. Fails when the minimum sits at an end of the
/// bracket.
pub fn minimize_1d<F>(mut f: F, bracket: (f64, f64), tol: f64) -> Result<Minimum>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = bracket;
    if !(a < b) || !(tol > 0.0) {
        return Err(Error::OutOfRange { what: "bracket", value: b - a });
    }
    let fa = f(a)?;
    let fb = f(b)?;
    let ratio = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut evaluations = 4;
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2)?;
        }
        evaluations += 1;
    }
    let (theta, energy) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    if !(energy < fa) {
        return Err(Error::BracketTooSmall { at: bracket.0 });
    }
    if !(energy < fb) {
        return Err(Error::BracketTooSmall { at: bracket.1 });
    }
    Ok(Minimum { theta, energy, evaluations })
}

/// Golden-section minimization of `E_C` over the family.
pub fn minimize_family(oracle: &mut EnergyOracle, bracket: (f64, f64), tol: f64) -> Result<Minimum> {
    if oracle.family.is_singleton() {
        return Err(Error::Unsupported(alloc::format!("family {} has no modulus", oracle.family.kind.name())));
    }
    minimize_1d(|x| oracle.energy(x), bracket, tol)
}

/// Solution of the Lagrange system for the hexagon family with weight ratio
/// `M = m_c / m_d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LagrangeSolution {
    pub ratio: f64,
    pub s: f64,
    pub t: f64,
    /// `sinh(s/2) sinh(t/2) - 1/2`.
    pub constraint_residual: f64,
    /// `tanh(s/2) / tanh(t/2) - M t / s`.
    pub lagrange_residual: f64,
    /// `H(s, t) - M`.
    pub h_residual: f64,
}

/// `H(s, t) = s tanh(s/2) / (t tanh(t/2))`.
pub fn lagrange_h(s: f64, t: f64) -> f64 {
    s * libm::tanh(0.5 * s) / (t * libm::tanh(0.5 * t))
}

/// Solves `H(s, t(s)) = M` by bisection, using that `H(s, t(s))` increases
/// from 0 to infinity.
pub fn lagrange_solve(ratio: f64) -> Result<LagrangeSolution> {
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::OutOfRange { what: "weight ratio", value: ratio });
    }
    let h = |s: f64| -> Result<f64> { Ok(lagrange_h(s, trig::hexagon_partner_length(s)?)) };
    let (mut lo, mut hi) = (1e-6, 50.0);
    while h(lo)? > ratio {
        lo *= 0.1;
        if lo < 1e-300 {
            return Err(Error::NotRealizable("Lagrange bracket underflow"));
        }
    }
    while h(hi)? < ratio {
        hi *= 2.0;
        if hi > 700.0 {
            return Err(Error::NotRealizable("Lagrange bracket overflow"));
        }
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid)? < ratio {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // pick whichever end has the smaller residual
    let (rl, rh) = ((h(lo)? - ratio).abs(), (h(hi)? - ratio).abs());
    let s = if rl <= rh { lo } else { hi };
    let t = trig::hexagon_partner_length(s)?;
    Ok(LagrangeSolution {
        ratio,
        s,
        t,
        constraint_residual: libm::sinh(0.5 * s) * libm::sinh(0.5 * t) - 0.5,
        lagrange_residual: libm::tanh(0.5 * s) / libm::tanh(0.5 * t) - ratio * t / s,
        h_residual: lagrange_h(s, t) - ratio,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveSample {
    pub parameter: f64,
    pub energy: f64,
    pub max_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl From<&Evaluation> for CurveSample {
    fn from(e: &Evaluation) -> Self {
        CurveSample {
            parameter: e.parameter,
            energy: e.energy,
            max_residual: e.max_residual,
            iterations: e.iterations,
            converged: e.converged,
        }
    }
}

/// `E_C` sampled along the family, in increasing parameter order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EnergyCurve {
    pub samples: Vec<CurveSample>,
}

impl EnergyCurve {
    pub fn from_samples(mut samples: Vec<CurveSample>) -> Self {
        samples.sort_by(|a, b| a.parameter.total_cmp(&b.parameter));
        EnergyCurve { samples }
    }

    pub fn argmin(&self) -> Option<usize> {
        (0..self.samples.len()).min_by(|&i, &j| self.samples[i].energy.total_cmp(&self.samples[j].energy))
    }

    /// Strictly decreasing up to the smallest sample and strictly
    /// increasing after it.
    pub fn is_unimodal(&self) -> bool {
        let Some(k) = self.argmin() else { return true };
        let e: Vec<f64> = self.samples.iter().map(|s| s.energy).collect();
        e[..=k].windows(2).all(|w| w[0] > w[1]) && e[k..].windows(2).all(|w| w[0] < w[1])
    }

    pub fn all_converged(&self) -> bool {
        self.samples.iter().all(|s| s.converged && s.energy > 0.0)
    }
}

/// `n` points from `lo` to `hi` evenly spaced in `log(theta)`.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return alloc::vec![lo];
    }
    let (a, b) = (libm::log(lo), libm::log(hi));
    (0..n).map(|i| if i == n - 1 { hi } else { libm::exp(a + (b - a) * i as f64 / (n - 1) as f64) }).collect()
}

/// Samples `E_C` at each parameter in order, warm starting if the oracle does.
pub fn energy_curve(oracle: &mut EnergyOracle, parameters: &[f64]) -> Result<EnergyCurve> {
    let samples = parameters.iter().map(|&x| oracle.evaluate(x).map(|e| CurveSample::from(&e))).collect::<Result<Vec<_>>>()?;
    Ok(EnergyCurve::from_samples(samples))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeRow {
    pub factor: f64,
    pub below: f64,
    pub above: f64,
}

/// Energies at `theta / f` and `theta * f` for growing factors `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct PropernessReport {
    pub theta: f64,
    pub energy: f64,
    pub rows: Vec<ProbeRow>,
    /// Every probe exceeds `energy`.
    pub exceeds_minimum: bool,
    /// Both sequences increase with the factor.
    pub monotone: bool,
}

pub fn properness_probe(oracle: &mut EnergyOracle, theta: f64, factors: &[f64]) -> Result<PropernessReport> {
    let mut sorted = factors.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.first().is_some_and(|&f| !(f > 1.0)) {
        return Err(Error::OutOfRange { what: "probe factor", value: sorted[0] });
    }
    let energy = oracle.energy(theta)?;
    let mut rows = Vec::with_capacity(sorted.len());
    for &f in &sorted {
        let below = oracle.energy(theta / f)?;
        let above = oracle.energy(theta * f)?;
        rows.push(ProbeRow { factor: f, below, above });
    }
    let exceeds_minimum = rows.iter().all(|r| r.below > energy && r.above > energy);
    let monotone = rows.windows(2).all(|w| w[1].below > w[0].below && w[1].above > w[0].above);
    Ok(PropernessReport { theta, energy, rows, exceeds_minimum, monotone })
}

/// The weight ratio `m_c / m_d` of a hexagon family.
pub fn hexagon_ratio(family: &MetricFamily) -> Option<f64> {
    match family.kind {
        FamilyKind::HexagonGenus { m_c, m_d, .. } => Some(m_c / m_d),
        _ => None,
    }
}
