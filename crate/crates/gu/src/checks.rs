//! Packaged reproductions and the invariant suite behind `gu example` and
//! `gu check`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use gu_core::graph::bouquet;
use gu_core::optimize::{self, EnergyOracle};
use gu_core::solver::{self, SolverConfig};
use gu_core::surface::{self, build_regular_4g_surface};
use gu_core::variation::{self, VertexVariation};
use gu_core::{dist, trig, FamilyKind, HPoint, MarkedMap, MetricFamily, Word};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::parallel::par_map;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `"<="`, `">="`, `">"`, or `"holds"` for yes/no checks.
    pub relation: &'static str,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value, relation: "<=", limit, passed: value <= limit }
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value, relation: ">=", limit, passed: value >= limit }
    }

    pub fn above(name: &str, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value, relation: ">", limit, passed: value > limit }
    }

    pub fn holds(name: &str, ok: bool) -> Self {
        Check { name: name.into(), value: ok as u8 as f64, relation: "holds", limit: 1.0, passed: ok }
    }

    fn failed(name: &str, err: impl fmt::Display) -> Self {
        Check { name: format!("{name} ({err})"), value: f64::NAN, relation: "<=", limit: 0.0, passed: false }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub title: String,
    /// Headline numbers, printed above the table.
    pub values: Vec<(String, f64)>,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(title: &str) -> Self {
        Report { title: title.into(), values: Vec::new(), checks: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    fn value(&mut self, name: &str, v: f64) {
        self.values.push((name.into(), v));
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.title)?;
        for (k, v) in &self.values {
            writeln!(f, "  {k} = {v:.9}")?;
        }
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            let verdict = if c.passed { "pass" } else { "FAIL" };
            if c.relation == "holds" {
                writeln!(f, "  {verdict}  {}", c.name)?;
            } else {
                writeln!(f, "  {verdict}  {:width$}  {:>12.4e} {} {:.1e}", c.name, c.value, c.relation, c.limit)?;
            }
        }
        Ok(())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn star() -> f64 {
    (2.0 + 3f64.sqrt()).ln()
}

fn bouquet_map(genus: usize, weight: f64) -> gu_core::Result<MarkedMap> {
    let member = MetricFamily::new(FamilyKind::Regular4g { genus, weight })?.member(0.0)?;
    member.reference_map()
}

/// The bouquet of `2g` loops on the regular `4g`-gon surface.
pub fn regular_4g(genus: usize, weight: f64, cfg: &SolverConfig) -> Report {
    let mut r = Report::new(&format!("regular 4g-gon, genus {genus}, bouquet of {} loops", 2 * genus));
    let m = match bouquet_map(genus, weight) {
        Ok(m) => m,
        Err(e) => {
            r.push(Check::failed("build", e));
            return r;
        }
    };
    // every loop has length 2 arccosh(cot(pi / 4g))
    let l = 2.0 * (1.0 / (PI / (4.0 * genus as f64)).tan()).acosh();
    r.value("loop length", l);
    r.value("energy", m.energy());
    r.push(Check::at_most("balanced residual at the center", m.balanced_residual().max_norm, 1e-10));
    r.push(Check::at_most("energy vs 2g m l^2 (relative)", rel(m.energy(), 2.0 * genus as f64 * weight * l * l), 1e-10));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start = m.with_lifts(vec![m.surface().random_point(&mut rng)]);
    match start.and_then(|s| solver::solve(&s, cfg)) {
        Ok(t) => {
            r.push(Check::holds("solve from a random start converges", t.converged));
            r.push(Check::at_most("distance of the solution to the center", dist(&t.map.lifts()[0], &HPoint::origin()), 1e-7));
        }
        Err(e) => r.push(Check::failed("solve from a random start", e)),
    }
    match solver::hessian_fd(&m, 1e-4) {
        Ok(h) => r.push(Check::above("Hessian minimum eigenvalue", h.min_eigenvalue(), 0.0)),
        Err(e) => r.push(Check::failed("Hessian", e)),
    }
    r
}

/// The genus-2 hexagon family: outer minimization and the closed forms.
pub fn hexagon_genus2(m_c: f64, m_d: f64, bracket: (f64, f64), tol: f64, cfg: &SolverConfig) -> Report {
    let mut r = Report::new(&format!("genus-2 hexagon family, m_c = {m_c}, m_d = {m_d}"));
    let family = match MetricFamily::hexagon_genus2(m_c, m_d) {
        Ok(f) => f,
        Err(e) => {
            r.push(Check::failed("family", e));
            return r;
        }
    };
    let mut oracle = EnergyOracle::new(family.clone(), cfg.clone());
    let min = match optimize::minimize_family(&mut oracle, bracket, tol) {
        Ok(m) => m,
        Err(e) => {
            r.push(Check::failed("outer minimization", e));
            return r;
        }
    };
    r.value("s*", min.theta);
    r.value("t*", trig::hexagon_partner_length(min.theta).unwrap_or(f64::NAN));
    r.value("E*", min.energy);
    if m_c == m_d {
        r.push(Check::at_most("|s* - log(2 + sqrt 3)|", (min.theta - star()).abs(), 1e-6));
    }
    match optimize::lagrange_solve(m_c / m_d) {
        Ok(l) => {
            r.value("Lagrange s", l.s);
            r.push(Check::at_most("|s* - Lagrange s|", (min.theta - l.s).abs(), 1e-6));
            r.push(Check::at_most("constraint residual", l.constraint_residual.abs(), 1e-10));
            r.push(Check::at_most("Lagrange residual", l.lagrange_residual.abs(), 1e-10));
        }
        Err(e) => r.push(Check::failed("Lagrange system", e)),
    }
    match optimize::hexagon_energy_closed_form(2, min.theta, m_c, m_d) {
        Ok(e) => r.push(Check::at_most("E* vs 6(m_d s^2 + m_c t^2) (relative)", rel(min.energy, e), 1e-7)),
        Err(e) => r.push(Check::failed("closed form", e)),
    }
    let worst = (0..100)
        .map(|i| {
            let s = 0.1 + 9.9 * i as f64 / 99.0;
            let t = trig::hexagon_partner_length(s).unwrap_or(f64::NAN);
            ((0.5 * s).sinh() * (0.5 * t).sinh() - 0.5).abs()
        })
        .fold(0.0, f64::max);
    r.push(Check::at_most("sinh(s/2) sinh(t/2) = 1/2 on [0.1, 10]", worst, 1e-12));
    match family.member(min.theta).and_then(|m| m.reference_map()) {
        Ok(m) => r.push(Check::at_most("reference map residual", m.balanced_residual().max_norm, 1e-9)),
        Err(e) => r.push(Check::failed("reference map", e)),
    }
    r
}

/// One member of the genus-`g` hexagon family, solved from a cold start.
pub fn genus_g(genus: usize, s: f64, m_c: f64, m_d: f64, cfg: &SolverConfig) -> Report {
    let mut r = Report::new(&format!("genus-{genus} hexagon surface at s = {s}"));
    let family = match MetricFamily::new(FamilyKind::HexagonGenus { genus, m_c, m_d }) {
        Ok(f) => f,
        Err(e) => {
            r.push(Check::failed("family", e));
            return r;
        }
    };
    match optimize::energy_of_parameter(&family, s, cfg) {
        Ok(e) => {
            r.value("energy", e.energy);
            r.push(Check::at_most("solver residual", e.max_residual, cfg.residual_tol));
            match optimize::hexagon_energy_closed_form(genus, s, m_c, m_d) {
                Ok(want) => r.push(Check::at_most("energy vs 6(g-1)(m_d s^2 + m_c t^2) (relative)", rel(e.energy, want), 1e-7)),
                Err(err) => r.push(Check::failed("closed form", err)),
            }
            match solver::hessian_fd(&e.map, 1e-4) {
                Ok(h) => r.push(Check::above("Hessian minimum eigenvalue", h.min_eigenvalue(), 0.0)),
                Err(err) => r.push(Check::failed("Hessian", err)),
            }
        }
        Err(e) => r.push(Check::failed("solve", e)),
    }
    r
}

/// Klein's quartic: the 14-gon and the (2, 3, 7) triangulation.
pub fn klein(weights: [f64; 3], cfg: &SolverConfig) -> Report {
    let mut r = Report::new("Klein quartic");
    match surface::build_klein_quartic().map(|s| s.check()) {
        Ok(rep) => {
            r.push(Check::at_most("14-gon area - 8 pi", (rep.area.unwrap_or(f64::NAN) - 8.0 * PI).abs(), 1e-8));
            r.push(Check::holds("two vertex cycles", rep.vertex_cycles.len() == 2));
            let worst = rep.vertex_cycles.iter().map(|c| (c.angle_sum - 2.0 * PI).abs()).fold(0.0, f64::max);
            r.push(Check::at_most("vertex cycle angle sums - 2 pi", worst, 1e-8));
        }
        Err(e) => r.push(Check::failed("14-gon", e)),
    }
    let closed = match optimize::triangle_energy(2, 3, 7, 168, weights) {
        Ok(e) => e,
        Err(e) => {
            r.push(Check::failed("triangle energy", e));
            return r;
        }
    };
    r.value("168 (m1 l1^2 + m2 l2^2 + m3 l3^2)", closed);
    let family = MetricFamily::new(FamilyKind::Triangle { p: 2, q: 3, r: 7, weights });
    match family.and_then(|f| optimize::energy_of_parameter(&f, 0.0, cfg)) {
        Ok(e) => {
            r.value("solved energy", e.energy);
            r.push(Check::at_most("solved vs closed form (relative)", rel(e.energy, closed), 1e-8));
        }
        Err(e) => r.push(Check::failed("solve on the triangulation", e)),
    }
    r
}

/// First and second variation against finite differences, and positivity.
pub fn variations(seed: u64) -> Report {
    let mut r = Report::new("variation formulas");
    let m = match surface::build_genus2_hexagon_surface(1.3, 1.0, 1.5).and_then(|t| t.reference_map()) {
        Ok(m) => m,
        Err(e) => {
            r.push(Check::failed("genus-2 map", e));
            return r;
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // off the harmonic map so the first variation is not zero
    let pushed = VertexVariation::random(&m, &mut rng, 0.2);
    let lifts = m.lifts().iter().zip(pushed.vectors()).map(|(p, v)| gu_core::exp_map(p, v)).collect::<gu_core::Result<Vec<_>>>();
    let off = match lifts.and_then(|l| m.with_lifts(l)) {
        Ok(o) => o,
        Err(e) => {
            r.push(Check::failed("perturbed map", e));
            return r;
        }
    };
    let (mut first, mut second, mut lowest, mut harmonic_first) = (0.0f64, 0.0f64, f64::INFINITY, 0.0f64);
    for _ in 0..10 {
        let v = VertexVariation::random(&m, &mut rng, 1.0);
        let w = VertexVariation::random(&off, &mut rng, 1.0);
        first = first.max(rel(variation::fd_first_variation(&off, &w, 1e-5), variation::first_variation(&off, &w)));
        let s = variation::second_variation_geodesic(&m, &v).total;
        second = second.max(rel(variation::fd_second_variation(&m, &v, 1e-4), s));
        lowest = lowest.min(s);
        harmonic_first = harmonic_first.max(variation::first_variation(&m, &v).abs());
    }
    r.push(Check::at_most("first variation vs finite differences (relative)", first, 1e-6));
    r.push(Check::at_most("first variation at the harmonic map", harmonic_first, 1e-9));
    r.push(Check::at_most("second variation vs finite differences (relative)", second, 1e-6));
    r.push(Check::at_least("smallest second variation at the harmonic map", lowest, -1e-12));
    match variation::hessian_consistency(&m, 20, seed, 1e-4) {
        Ok(h) => r.push(Check::at_most("second variation vs V^T H V (relative)", h.max_relative_deviation, 1e-4)),
        Err(e) => r.push(Check::failed("Hessian consistency", e)),
    }
    r
}

/// Random-start uniqueness on genus 2, and the single-loop counterexample.
pub fn uniqueness(cfg: &SolverConfig) -> Report {
    let mut r = Report::new("uniqueness");
    match surface::build_genus2_hexagon_surface(1.3, 1.0, 1.5) {
        Ok(t) => match solver::uniqueness_probe(t.surface.clone(), t.graph.clone(), t.decks.clone(), 10, cfg) {
            Ok(u) => {
                r.push(Check::holds("all 10 starts converge", u.converged.iter().all(|&c| c)));
                r.push(Check::at_most("gauge-fixed spread of the solutions", u.max_gauge_fixed_deviation, 1e-7));
                r.push(Check::holds("genus-2 hypothesis holds", !u.hypothesis_violated));
            }
            Err(e) => r.push(Check::failed("genus-2 probe", e)),
        },
        Err(e) => r.push(Check::failed("genus-2 surface", e)),
    }
    let single = build_regular_4g_surface(2).map(Arc::new).and_then(|s| {
        let g = Arc::new(bouquet(1)?);
        MarkedMap::new(s, g, vec![HPoint::from_polar(0.2, 1.0)], vec![Word::letter(1), Word::letter(-1)])
    });
    match single.and_then(|m| solver::uniqueness_probe(m.surface().clone(), m.graph().clone(), m.decks().to_vec(), 10, cfg)) {
        Ok(u) => r.push(Check::holds("single loop is flagged", u.image_cyclic && u.hypothesis_violated)),
        Err(e) => r.push(Check::failed("single-loop probe", e)),
    }
    r
}

/// Cold-start samples of a family, solved in parallel.
pub fn sample_curve(family: &MetricFamily, parameters: &[f64], cfg: &SolverConfig) -> gu_core::Result<optimize::EnergyCurve> {
    let samples = par_map(parameters, |&x| optimize::energy_of_parameter(family, x, cfg).map(|e| optimize::CurveSample::from(&e)));
    Ok(optimize::EnergyCurve::from_samples(samples.into_iter().collect::<gu_core::Result<Vec<_>>>()?))
}

/// Convexity probe: Hessians at the harmonic maps and the shape of E(s).
pub fn convexity(cfg: &SolverConfig) -> Report {
    let mut r = Report::new("convexity probe");
    let maps = [
        ("genus-2", surface::build_genus2_hexagon_surface(star(), 1.0, 1.0).and_then(|t| t.reference_map())),
        ("bouquet", bouquet_map(2, 1.0)),
    ];
    for (name, m) in maps {
        match m.and_then(|m| solver::hessian_fd(&m, 1e-4)) {
            Ok(h) => r.push(Check::above(&format!("{name} Hessian minimum eigenvalue"), h.min_eigenvalue(), 0.0)),
            Err(e) => r.push(Check::failed(name, e)),
        }
    }
    let family = MetricFamily::hexagon_genus2(1.0, 1.0).expect("unit weights are valid");
    let grid = optimize::geometric_grid(star() / 8.0, 8.0 * star(), 25);
    match sample_curve(&family, &grid, cfg) {
        Ok(c) => {
            r.push(Check::holds("all 25 curve samples converge", c.all_converged()));
            r.push(Check::holds("E(s) is unimodal on [s*/8, 8 s*]", c.is_unimodal()));
        }
        Err(e) => r.push(Check::failed("energy curve", e)),
    }
    r
}

/// Everything, with default parameters. Groups run in parallel.
pub fn full_suite(cfg: &SolverConfig) -> Vec<Report> {
    type Job<'a> = Box<dyn Fn() -> Report + Sync + 'a>;
    let jobs: Vec<Job> = vec![
        Box::new(|| regular_4g(2, 1.0, cfg)),
        Box::new(|| hexagon_genus2(1.0, 1.0, (0.5, 3.0), 1e-8, cfg)),
        Box::new(|| hexagon_genus2(0.25, 1.0, (0.2, 6.0), 1e-8, cfg)),
        Box::new(|| hexagon_genus2(4.0, 1.0, (0.2, 6.0), 1e-8, cfg)),
        Box::new(|| genus_g(3, 1.0, 1.0, 1.0, cfg)),
        Box::new(|| genus_g(4, 1.5, 1.0, 1.0, cfg)),
        Box::new(|| klein([1.0; 3], cfg)),
        Box::new(|| variations(cfg.seed)),
        Box::new(|| uniqueness(cfg)),
        Box::new(|| convexity(cfg)),
    ];
    par_map(&jobs, |job| job())
}
