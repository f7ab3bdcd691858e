use std::f64::consts::PI;
use std::sync::Arc;

use gu_core::graph::bouquet;
use gu_core::solver::{gauge_fix, hessian_fd, image_is_cyclic, solve, uniqueness_probe};
use gu_core::surface::{build_genus2_hexagon_surface, build_regular_4g_surface, regular_4g_bouquet_decks, TiledSurface};
use gu_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn hexagons() -> TiledSurface {
    build_genus2_hexagon_surface(1.3, 1.0, 1.5).unwrap()
}

fn octagon_bouquet() -> MarkedMap {
    let s = Arc::new(build_regular_4g_surface(2).unwrap());
    MarkedMap::new(s, Arc::new(bouquet(4).unwrap()), vec![HPoint::origin()], regular_4g_bouquet_decks(2)).unwrap()
}

fn single_loop() -> MarkedMap {
    let s = Arc::new(build_regular_4g_surface(2).unwrap());
    MarkedMap::new(s, Arc::new(bouquet(1).unwrap()), vec![HPoint::from_polar(0.2, 1.0)], vec![Word::letter(1), Word::letter(-1)]).unwrap()
}

fn jitter(map: &MarkedMap, size: f64, seed: u64) -> MarkedMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lifts = map
        .lifts()
        .iter()
        .map(|p| {
            let a = rng.random_range(0.0..2.0 * PI);
            exp_map(p, &HTangent::from_frame(*p, size * a.cos(), size * a.sin())).unwrap()
        })
        .collect();
    map.with_lifts(lifts).unwrap()
}

fn fd_gradient_norm(map: &MarkedMap, h: f64) -> f64 {
    let lifts = map.lifts().to_vec();
    let mut worst: f64 = 0.0;
    for x in 0..lifts.len() {
        let p = lifts[x];
        let mut g = [0.0; 2];
        for (k, slot) in g.iter_mut().enumerate() {
            let at = |t: f64| {
                let mut l = lifts.clone();
                let (a, b) = if k == 0 { (t, 0.0) } else { (0.0, t) };
                l[x] = exp_map(&p, &HTangent::from_frame(p, a, b)).unwrap();
                map.energy_of(&l)
            };
            *slot = (at(h) - at(-h)) / (2.0 * h);
        }
        worst = worst.max(g[0].hypot(g[1]));
    }
    worst
}

#[test]
fn reference_map_is_a_fixed_point() {
    let m = hexagons().reference_map().unwrap();
    let trace = solve(&m, &SolverConfig::default()).unwrap();
    assert!(trace.converged);
    assert!(trace.iterations <= 1);
    for (p, q) in trace.map.lifts().iter().zip(m.lifts()) {
        assert!(dist(p, q) < 1e-9);
    }
}

#[test]
fn perturbed_reference_returns() {
    let tiled = hexagons();
    let reference = tiled.reference_map().unwrap();
    let want = gauge_fix(&reference).unwrap();
    for seed in 0..3 {
        let start = jitter(&reference, 0.3, seed);
        assert!(start.balanced_residual().max_norm > 0.1);
        let trace = solve(&start, &SolverConfig::default()).unwrap();
        assert!(trace.converged, "seed {seed}: residual {}", trace.residual());
        assert!(trace.max_energy_increase() <= 0.0, "{:e} at E = {}", trace.max_energy_increase(), trace.energy());
        let got = gauge_fix(&trace.map).unwrap();
        for (p, q) in got.lifts().iter().zip(want.lifts()) {
            assert!(dist(p, q) < 1e-7, "seed {seed}: {}", dist(p, q));
        }
        assert!((trace.energy() - reference.energy()).abs() < 1e-9 * reference.energy());
    }
}

#[test]
fn bouquet_goes_to_the_center() {
    let m = octagon_bouquet();
    let lengths: Vec<f64> = m.surface().generators().iter().map(|g| translation_length(g).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3 {
        let start = m.with_lifts(vec![m.surface().random_point(&mut rng)]).unwrap();
        let trace = solve(&start, &SolverConfig::default()).unwrap();
        assert!(trace.converged);
        assert!(dist(&trace.map.lifts()[0], &HPoint::origin()) < 1e-7);
        for (k, l) in lengths.iter().enumerate() {
            assert!((trace.map.edge_length(2 * k) - l).abs() < 1e-8);
        }
    }
}

#[test]
fn energy_never_increases() {
    let m = jitter(&hexagons().reference_map().unwrap(), 0.5, 42);
    let trace = solve(&m, &SolverConfig::default()).unwrap();
    assert!(trace.converged);
    for w in trace.records.windows(2) {
        assert!(w[1].energy <= w[0].energy, "iteration {}", w[1].iteration);
        assert!(w[1].step > 0.0 && w[1].step <= 1.0);
    }
    let first = &trace.records[0];
    assert_eq!(first.iteration, 0);
    assert!((first.energy - m.energy()).abs() < 1e-12 * m.energy());
}

#[test]
fn gradient_vanishes_at_convergence() {
    let cfg = SolverConfig::default();
    for start in [jitter(&hexagons().reference_map().unwrap(), 0.3, 5), jitter(&octagon_bouquet(), 0.4, 6)] {
        let trace = solve(&start, &cfg).unwrap();
        assert!(trace.converged);
        assert!(trace.map.balanced_residual().max_norm <= cfg.residual_tol);
        let g = fd_gradient_norm(&trace.map, 1e-5);
        assert!(g <= 10.0 * cfg.residual_tol + 1e-8, "{g}");
    }
}

#[test]
fn nonconvergence_returns_a_partial_trace() {
    let start = jitter(&hexagons().reference_map().unwrap(), 0.5, 1);
    let cfg = SolverConfig { max_iters: 3, ..SolverConfig::default() };
    let trace = solve(&start, &cfg).unwrap();
    assert!(!trace.converged);
    assert_eq!(trace.iterations, 3);
    assert_eq!(trace.records.len(), 4);
    assert!(trace.energy() < start.energy());
}

#[test]
fn bad_configurations() {
    let m = octagon_bouquet();
    for cfg in [
        SolverConfig { residual_tol: 0.0, ..SolverConfig::default() },
        SolverConfig { step: 1.5, ..SolverConfig::default() },
        SolverConfig { step: 0.0, ..SolverConfig::default() },
        SolverConfig { backtrack: 1.0, ..SolverConfig::default() },
    ] {
        assert!(solve(&m, &cfg).is_err());
    }
}

#[test]
fn uniqueness_on_genus2() {
    let t = hexagons();
    let cfg = SolverConfig { seed: 3, ..SolverConfig::default() };
    let r = uniqueness_probe(t.surface.clone(), t.graph.clone(), t.decks.clone(), 10, &cfg).unwrap();
    assert!(r.converged.iter().all(|&c| c));
    assert!(r.max_gauge_fixed_deviation <= 1e-7, "{}", r.max_gauge_fixed_deviation);
    assert!(!r.image_cyclic);
    assert!(!r.hypothesis_violated);
    let spread = r.energies.iter().fold(0.0f64, |m, e| m.max((e - r.energies[0]).abs()));
    assert!(spread < 1e-9 * r.energies[0]);
    assert_eq!(r.seed, 3);
}

#[test]
fn uniqueness_on_the_bouquet() {
    let m = octagon_bouquet();
    let r = uniqueness_probe(m.surface().clone(), m.graph().clone(), m.decks().to_vec(), 10, &SolverConfig::default()).unwrap();
    assert!(r.converged.iter().all(|&c| c));
    assert!(r.max_deviation <= 1e-7);
    assert!(!r.hypothesis_violated);
}

#[test]
fn single_loop_violates_the_hypothesis() {
    let m = single_loop();
    assert!(image_is_cyclic(&m));
    let r = uniqueness_probe(m.surface().clone(), m.graph().clone(), m.decks().to_vec(), 10, &SolverConfig::default()).unwrap();
    assert!(r.image_cyclic);
    assert!(r.hypothesis_violated);
    // every start lands somewhere on the axis
    let l = translation_length(&m.surface().generators()[0]).unwrap();
    for e in &r.energies {
        assert!((e - l * l).abs() < 1e-8);
    }
    assert!(r.max_deviation > 1e-3);
    assert!(uniqueness_probe(m.surface().clone(), m.graph().clone(), m.decks().to_vec(), 1, &SolverConfig::default()).is_err());
}

#[test]
fn hessian_is_positive_at_harmonic_maps() {
    for m in [hexagons().reference_map().unwrap(), octagon_bouquet()] {
        let h = hessian_fd(&m, 1e-4).unwrap();
        assert_eq!(h.dim, 2 * m.graph().vertex_count());
        assert!(h.min_eigenvalue() > 1e-3, "{}", h.min_eigenvalue());
        for i in 0..h.dim {
            for j in 0..h.dim {
                assert_eq!(h.entries[i * h.dim + j], h.entries[j * h.dim + i]);
            }
        }
        assert!(h.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn single_loop_hessian_is_degenerate() {
    let solved = solve(&single_loop(), &SolverConfig::default()).unwrap();
    assert!(solved.converged);
    let h = hessian_fd(&solved.map, 1e-4).unwrap();
    let e = &h.eigenvalues;
    assert!(e[0].abs() < 1e-6, "{e:?}");
    assert!(e[1] > 1e-2, "{e:?}");
}

#[test]
fn hessian_spectrum_is_gauge_invariant() {
    let m = hexagons().reference_map().unwrap();
    let g = Isometry::transvection(&HPoint::origin(), &HPoint::from_polar(0.7, 2.0)).compose(&Isometry::rotation(0.4));
    let a = hessian_fd(&m, 1e-4).unwrap();
    let b = hessian_fd(&m.gauge_transform(&g).unwrap(), 1e-4).unwrap();
    let top = a.eigenvalues.last().copied().unwrap();
    for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
        assert!((x - y).abs() <= 1e-6 * top, "{x} vs {y}");
    }
    assert!(hessian_fd(&m, 1.0).is_err());
}
