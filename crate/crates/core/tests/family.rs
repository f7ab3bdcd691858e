mod oracle;

use std::f64::consts::PI;
use std::time::Instant;

use gu_core::optimize::*;
use gu_core::*;

fn star() -> f64 {
    (2.0 + 3f64.sqrt()).ln()
}

/// `t(s)` straight from the constraint `sinh(s/2) sinh(t/2) = 1/2`.
fn partner(s: f64) -> f64 {
    2.0 * (0.5 / (s / 2.0).sinh()).asinh()
}

fn oracle_energy(s: f64, m_c: f64, m_d: f64) -> f64 {
    6.0 * (m_d * s * s + m_c * partner(s).powi(2))
}

fn minimize(m_c: f64, m_d: f64, bracket: (f64, f64)) -> Minimum {
    let mut o = EnergyOracle::new(MetricFamily::hexagon_genus2(m_c, m_d).unwrap(), SolverConfig::default());
    minimize_family(&mut o, bracket, 1e-8).unwrap()
}

#[test]
fn symmetric_minimizer() {
    let clock = Instant::now();
    let m = minimize(1.0, 1.0, (0.5, 3.0));
    assert!(clock.elapsed().as_secs() < 60);
    assert!((m.theta - star()).abs() < 1e-6, "{}", m.theta);
    assert!((m.theta - 1.3169579).abs() < 1e-6);
    assert!((m.energy - 12.0 * star() * star()).abs() < 1e-9);
    assert!((m.energy - 20.8125).abs() < 1e-4);
}

#[test]
fn minimizer_matches_lagrange() {
    for ratio in [0.25, 1.0, 4.0] {
        let sol = lagrange_solve(ratio).unwrap();
        assert!(sol.constraint_residual.abs() <= 1e-12);
        assert!(sol.lagrange_residual.abs() <= 1e-10, "{}", sol.lagrange_residual);
        assert!(sol.h_residual.abs() <= 1e-12);
        // independent residuals from the raw equations
        assert!(((sol.s / 2.0).sinh() * (sol.t / 2.0).sinh() - 0.5).abs() <= 1e-12);
        assert!(((sol.s / 2.0).tanh() / (sol.t / 2.0).tanh() - ratio * sol.t / sol.s).abs() <= 1e-10);
        let m = minimize(ratio, 1.0, (0.2, 6.0));
        assert!((m.theta - sol.s).abs() < 1e-6, "M = {ratio}: {} vs {}", m.theta, sol.s);
        assert!((m.energy - oracle_energy(sol.s, ratio, 1.0)).abs() < 1e-7 * m.energy);
    }
}

#[test]
fn weight_swap_swaps_the_lengths() {
    for ratio in [0.25, 3.0] {
        let a = lagrange_solve(ratio).unwrap();
        let b = lagrange_solve(1.0 / ratio).unwrap();
        assert!((a.s - b.t).abs() < 1e-9 && (a.t - b.s).abs() < 1e-9);
    }
    let a = minimize(2.0, 1.0, (0.2, 6.0));
    let b = minimize(1.0, 2.0, (0.2, 6.0));
    assert!((a.theta - partner(b.theta)).abs() < 1e-6);
    assert!((a.energy - b.energy).abs() < 1e-9 * a.energy);
}

#[test]
fn lagrange_limits() {
    let sol = lagrange_solve(1.0).unwrap();
    assert!((sol.s - star()).abs() < 1e-12 && (sol.t - star()).abs() < 1e-12);
    let s: Vec<f64> = [1e-1, 1e-2, 1e-3].iter().map(|&m| lagrange_solve(m).unwrap().s).collect();
    assert!(s[0] > s[1] && s[1] > s[2]);
    // reference values from an independent root find
    for (got, want) in s.iter().zip([0.6459588472193899, 0.2777780225815841, 0.10785975929631535]) {
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
    let big = lagrange_solve(1e3).unwrap();
    assert!((big.s - 5.844969061610283).abs() < 1e-9 && (big.t - s[2]).abs() < 1e-9);
    assert!(lagrange_solve(0.0).is_err());
    assert!(lagrange_solve(-1.0).is_err());
    let grid: Vec<f64> = (0..200).map(|i| 0.05 * 1.04f64.powi(i)).collect();
    let h: Vec<f64> = grid.iter().map(|&s| lagrange_h(s, partner(s))).collect();
    assert!(h.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn energy_formula_across_the_family() {
    let cfg = SolverConfig::default();
    for (m_c, m_d) in [(1.0, 1.0), (0.25, 1.0), (2.0, 0.5)] {
        let family = MetricFamily::hexagon_genus2(m_c, m_d).unwrap();
        for i in 0..10 {
            let s = 0.5 + 2.5 * i as f64 / 9.0;
            let e = energy_of_parameter(&family, s, &cfg).unwrap();
            assert!(e.converged);
            let want = oracle_energy(s, m_c, m_d);
            assert!((e.energy - want).abs() <= 1e-7 * want, "s = {s}: {} vs {want}", e.energy);
            assert!((e.energy - hexagon_energy_closed_form(2, s, m_c, m_d).unwrap()).abs() <= 1e-7 * want);
        }
    }
}

#[test]
fn properness() {
    let family = MetricFamily::hexagon_genus2(1.0, 1.0).unwrap();
    let mut o = EnergyOracle::new(family, SolverConfig::default()).cold();
    let r = properness_probe(&mut o, star(), &[2.0, 4.0, 8.0]).unwrap();
    assert!(r.exceeds_minimum && r.monotone);
    let below_8 = r.rows.last().unwrap().below;
    assert!(below_8 > 2.0 * r.energy);
    assert!((below_8 - oracle_energy(star() / 8.0, 1.0, 1.0)).abs() < 1e-7 * below_8);
    for row in &r.rows {
        assert!((row.above - oracle_energy(star() * row.factor, 1.0, 1.0)).abs() < 1e-7 * row.above);
    }
    assert!(properness_probe(&mut o, star(), &[0.5]).is_err());
}

#[test]
fn energy_curve_is_unimodal() {
    let family = MetricFamily::hexagon_genus2(1.0, 1.0).unwrap();
    let grid = geometric_grid(star() / 8.0, star() * 8.0, 25);
    let curve = energy_curve(&mut EnergyOracle::new(family, SolverConfig::default()).cold(), &grid).unwrap();
    assert!(curve.all_converged());
    assert!(curve.is_unimodal());
    let k = curve.argmin().unwrap();
    assert!((curve.samples[k].parameter - star()).abs() < 1e-12);
    for s in &curve.samples {
        let want = oracle_energy(s.parameter, 1.0, 1.0);
        assert!((s.energy - want).abs() <= 1e-7 * want, "{}", s.parameter);
    }
}

#[test]
fn warm_and_cold_starts_agree() {
    let family = MetricFamily::hexagon_genus2(1.0, 3.0).unwrap();
    let grid = geometric_grid(0.6, 2.5, 8);
    let warm = energy_curve(&mut EnergyOracle::new(family.clone(), SolverConfig::default()), &grid).unwrap();
    let cold = energy_curve(&mut EnergyOracle::new(family, SolverConfig::default()).cold(), &grid).unwrap();
    for (a, b) in warm.samples.iter().zip(&cold.samples) {
        assert!((a.energy - b.energy).abs() < 1e-9 * a.energy);
    }
}

#[test]
fn first_order_condition() {
    let m = minimize(1.0, 1.0, (0.5, 3.0));
    let family = MetricFamily::hexagon_genus2(1.0, 1.0).unwrap();
    let h = 1e-4;
    let cfg = SolverConfig::default();
    let e = |x: f64| energy_of_parameter(&family, x, &cfg).unwrap().energy;
    let d = (e(m.theta + h) - e(m.theta - h)) / (2.0 * h);
    assert!(d.abs() <= 1e-5, "{d}");
}

#[test]
fn bracket_errors() {
    let mut o = EnergyOracle::new(MetricFamily::hexagon_genus2(1.0, 1.0).unwrap(), SolverConfig::default());
    assert!(matches!(minimize_family(&mut o, (0.5, 1.0), 1e-6), Err(Error::BracketTooSmall { .. })));
    assert!(matches!(minimize_family(&mut o, (2.0, 3.0), 1e-6), Err(Error::BracketTooSmall { .. })));
    assert!(minimize_family(&mut o, (3.0, 0.5), 1e-6).is_err());
    assert!(o.evaluate(-0.5).is_err());
}

#[test]
fn triangle_energy_against_construction() {
    let sides = oracle::triangle(PI / 2.0, PI / 3.0, PI / 7.0);
    let want = 168.0 * sides.iter().map(|l| l * l).sum::<f64>();
    let e = triangle_energy(2, 3, 7, 168, [1.0; 3]).unwrap();
    assert!((e - want).abs() < 1e-8, "{e} vs {want}");
    let weighted = triangle_energy(2, 3, 7, 168, [2.0, 0.5, 3.0]).unwrap();
    let w_want = 168.0 * (2.0 * sides[0].powi(2) + 0.5 * sides[1].powi(2) + 3.0 * sides[2].powi(2));
    assert!((weighted - w_want).abs() < 1e-8);
    assert!((triangle_energy(2, 3, 7, 168, [2.5; 3]).unwrap() - 2.5 * e).abs() < 1e-12 * e);
    let eq = trig::triangle_from_angles(PI / 4.0, PI / 4.0, PI / 4.0).unwrap();
    assert!((eq.sides[0] - eq.sides[1]).abs() < 1e-14 && (eq.sides[1] - eq.sides[2]).abs() < 1e-14);
    assert!(triangle_energy(2, 3, 6, 168, [1.0; 3]).is_err());
    assert!(triangle_energy(2, 3, 7, 0, [1.0; 3]).is_err());
    // the solved Klein triangulation is the same number
    let family = MetricFamily::new(FamilyKind::Triangle { p: 2, q: 3, r: 7, weights: [1.0; 3] }).unwrap();
    let solved = energy_of_parameter(&family, family.default_parameter(), &SolverConfig::default()).unwrap();
    assert!((solved.energy - want).abs() < 1e-8 * want);
}

#[test]
fn regular_4g_singleton() {
    let family = MetricFamily::new(FamilyKind::Regular4g { genus: 2, weight: 1.5 }).unwrap();
    assert!(family.is_singleton());
    let e = energy_of_parameter(&family, family.default_parameter(), &SolverConfig::default()).unwrap();
    let l = 2.0 * oracle::regular_polygon(8, PI / 4.0).inradius;
    assert!((e.energy - 1.5 * 4.0 * l * l).abs() < 1e-8);
    let mut o = EnergyOracle::new(family, SolverConfig::default());
    assert!(minimize_family(&mut o, (0.5, 3.0), 1e-6).is_err());
}

#[test]
fn higher_genus_hexagons() {
    let cfg = SolverConfig::default();
    for g in [3, 4] {
        let family = MetricFamily::new(FamilyKind::HexagonGenus { genus: g, m_c: 1.0, m_d: 1.0 }).unwrap();
        for s in [0.8, star(), 2.0] {
            let e = energy_of_parameter(&family, s, &cfg).unwrap();
            let want = (g as f64 - 1.0) * oracle_energy(s, 1.0, 1.0);
            assert!((e.energy - want).abs() <= 1e-7 * want, "genus {g}, s = {s}");
        }
    }
}
