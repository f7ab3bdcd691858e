//! Piecewise-geodesic maps from a graph into a surface, stored as an
//! equivariant lift: one plane point per vertex and one deck word per
//! half-edge. The lifted edge `e` runs from `lift(o(e))` to
//! `gamma_e * lift(t(e))`.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::dd::{self, Dd, Dd3};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::hyp::{HPoint, HTangent, Isometry, Vec3};
use crate::surface::{SurfaceModel, Word};

#[derive(Clone, Debug)]
pub struct MarkedMap {
    surface: Arc<SurfaceModel>,
    graph: Arc<WeightedGraph>,
    lifts: Vec<HPoint>,
    decks: Vec<Word>,
    deck_mats: Vec<Isometry>,
    deck_dd: Vec<dd::DdMat>,
}

/// Per-vertex residuals `r_x = sum_{e in E_x} m(e) T_e(0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BalancedReport {
    pub residuals: Vec<HTangent>,
    pub max_norm: f64,
    pub rms_norm: f64,
}

impl BalancedReport {
    pub fn is_harmonic(&self, tol: f64) -> bool {
        self.max_norm <= tol
    }
}

impl MarkedMap {
    /// `decks` holds one word per half-edge; reversed half-edges must carry
    /// inverse isometries.
    pub fn new(surface: Arc<SurfaceModel>, graph: Arc<WeightedGraph>, lifts: Vec<HPoint>, decks: Vec<Word>) -> Result<Self> {
        if lifts.len() != graph.vertex_count() {
            return Err(Error::Map(format!("{} lifts for {} vertices", lifts.len(), graph.vertex_count())));
        }
        if decks.len() != graph.half_edge_count() {
            return Err(Error::Map(format!("{} deck words for {} half-edges", decks.len(), graph.half_edge_count())));
        }
        if let Some(x) = (0..graph.vertex_count()).find(|&x| graph.degree(x) == 0) {
            return Err(Error::IsolatedVertex(x));
        }
        let deck_dd = decks.iter().map(|w| surface.eval_dd(w)).collect::<Result<Vec<_>>>()?;
        let deck_mats: Vec<Isometry> = deck_dd.iter().map(|m| Isometry::from_matrix_unchecked(dd::mat_round(m))).collect();
        for e in 0..decks.len() {
            let r = graph.reversal(e);
            if decks[r] == decks[e].inverse() {
                continue;
            }
            let back = deck_mats[e].compose(&deck_mats[r]);
            let scale = hyp_scale(&deck_mats[e]);
            if back.distance_to(&Isometry::identity()) > 1e-10 * scale * scale {
                return Err(Error::Map(format!("deck of half-edge {r} is not the inverse of the deck of half-edge {e}")));
            }
        }
        Ok(MarkedMap { surface, graph, lifts, decks, deck_mats, deck_dd })
    }

    /// Like [`MarkedMap::new`] with one word per unoriented edge, in the
    /// order of [`WeightedGraph::edges`], read in the direction of that
    /// half-edge.
    pub fn from_edge_decks(surface: Arc<SurfaceModel>, graph: Arc<WeightedGraph>, lifts: Vec<HPoint>, forward: Vec<Word>) -> Result<Self> {
        if forward.len() != graph.edge_count() {
            return Err(Error::Map(format!("{} deck words for {} edges", forward.len(), graph.edge_count())));
        }
        let mut decks = alloc::vec![Word::identity(); graph.half_edge_count()];
        for (e, w) in graph.edges().collect::<Vec<_>>().into_iter().zip(forward) {
            decks[graph.reversal(e)] = w.inverse();
            decks[e] = w;
        }
        Self::new(surface, graph, lifts, decks)
    }

    /// The same class with different vertex lifts.
    pub fn with_lifts(&self, lifts: Vec<HPoint>) -> Result<Self> {
        if lifts.len() != self.lifts.len() {
            return Err(Error::Map(format!("{} lifts for {} vertices", lifts.len(), self.lifts.len())));
        }
        Ok(MarkedMap { lifts, ..self.clone() })
    }

    /// All vertices at the polygon barycenter.
    pub fn barycenter_seed(&self) -> Self {
        let c = self.surface.barycenter();
        MarkedMap { lifts: alloc::vec![c; self.lifts.len()], ..self.clone() }
    }

    pub fn surface(&self) -> &Arc<SurfaceModel> {
        &self.surface
    }

    pub fn graph(&self) -> &Arc<WeightedGraph> {
        &self.graph
    }

    pub fn lifts(&self) -> &[HPoint] {
        &self.lifts
    }

    pub fn decks(&self) -> &[Word] {
        &self.decks
    }

    pub fn deck_matrix(&self, e: usize) -> &Isometry {
        &self.deck_mats[e]
    }

    /// Far endpoint `gamma_e * lift(t(e))` of the lifted half-edge.
    pub fn edge_end(&self, e: usize) -> HPoint {
        let y = dd::mat_apply_dd(&self.deck_dd[e], &dd::lift3(&self.lifts[self.graph.terminus(e)].coords()));
        HPoint::from_raw_unchecked(dd::round3(&dd::to_sheet(&y)))
    }

    pub(crate) fn lifted(&self) -> Vec<Dd3> {
        self.lifts.iter().map(|p| dd::sheet_point(&p.coords())).collect()
    }

    pub(crate) fn segment_at(&self, lifts: &[Dd3], e: usize) -> dd::Segment {
        let y = dd::mat_apply_dd(&self.deck_dd[e], &lifts[self.graph.terminus(e)]);
        dd::segment_on_sheet(&lifts[self.graph.origin(e)], &y)
    }

    fn cosh_length_at(&self, lifts: &[Dd3], e: usize) -> Dd {
        let y = dd::mat_apply_dd(&self.deck_dd[e], &lifts[self.graph.terminus(e)]);
        -dd::minkowski(&lifts[self.graph.origin(e)], &y)
    }

    pub(crate) fn length_at(&self, lifts: &[Dd3], e: usize) -> f64 {
        dd::arcosh_dd(self.cosh_length_at(lifts, e))
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        self.length_at(&self.lifted(), e)
    }

    /// `T_e(0)`: initial velocity of the lifted half-edge.
    pub fn edge_vector(&self, e: usize) -> HTangent {
        let seg = self.segment_at(&self.lifted(), e);
        HTangent::project(self.lifts[self.graph.origin(e)], dd::round3(&seg.velocity))
    }

    pub(crate) fn energy_at(&self, lifts: &[Dd3]) -> f64 {
        let mut acc = Dd::ZERO;
        for e in self.graph.edges() {
            let l = self.length_at(lifts, e);
            acc = acc + Dd::prod(l, l) * self.graph.weight(e);
        }
        acc.to_f64()
    }

    /// `energy_at(to) - energy_at(from)`, accurate even when the change is
    /// far below the rounding error of either energy.
    pub(crate) fn energy_change(&self, from: &[Dd3], to: &[Dd3]) -> f64 {
        let mut acc = Dd::ZERO;
        for e in self.graph.edges() {
            let (a, b) = (self.cosh_length_at(from, e), self.cosh_length_at(to, e));
            let sum = dd::arcosh_dd(a) + dd::arcosh_dd(b);
            acc = acc + Dd::prod(dd::arcosh_difference(a, b), sum) * self.graph.weight(e);
        }
        acc.to_f64()
    }

    /// Energy of the same class with the given lifts.
    pub fn energy_of(&self, lifts: &[HPoint]) -> f64 {
        let l: Vec<Dd3> = lifts.iter().map(|p| dd::sheet_point(&p.coords())).collect();
        self.energy_at(&l)
    }

    /// `E = (1/2) sum over half-edges m(e) l_e^2`, i.e. the weighted sum of
    /// squared edge lengths.
    pub fn energy(&self) -> f64 {
        self.energy_at(&self.lifted())
    }

    /// Residual vectors as ambient vectors, tangent at each lift.
    pub(crate) fn residuals_at(&self, lifts: &[Dd3]) -> Vec<Vec3> {
        let mut out = Vec::with_capacity(lifts.len());
        for x in 0..lifts.len() {
            let mut acc = [Dd::ZERO; 3];
            for &e in self.graph.star(x).edges {
                let seg = self.segment_at(lifts, e);
                let m = self.graph.weight(e);
                for (a, v) in acc.iter_mut().zip(&seg.velocity) {
                    *a = *a + *v * m;
                }
            }
            out.push(dd::round3(&acc));
        }
        out
    }

    pub fn balanced_residual(&self) -> BalancedReport {
        report(&self.lifts, self.residuals_at(&self.lifted()))
    }

    /// Moves the whole picture by `g`: lifts, generators and polygon.
    /// Deck words are untouched, so the class is the same.
    pub fn gauge_transform(&self, g: &Isometry) -> Result<MarkedMap> {
        let surface = self.surface.conjugated(g)?;
        let lifts = self.lifts.iter().map(|p| g.apply(p)).collect();
        MarkedMap::new(Arc::new(surface), self.graph.clone(), lifts, self.decks.clone())
    }

    /// Replaces the lift of `vertex` by its image under `word`, adjusting
    /// the deck words so the map itself is unchanged.
    pub fn rebase(&self, vertex: usize, word: &Word) -> Result<MarkedMap> {
        let w = self.surface.eval(word)?;
        let mut lifts = self.lifts.clone();
        lifts[vertex] = w.apply(&lifts[vertex]);
        let mut decks = self.decks.clone();
        for (e, d) in decks.iter_mut().enumerate() {
            let mut out = d.clone();
            if self.graph.origin(e) == vertex {
                out = word.then(&out);
            }
            if self.graph.terminus(e) == vertex {
                out = out.then(&word.inverse());
            }
            *d = out;
        }
        MarkedMap::new(self.surface.clone(), self.graph.clone(), lifts, decks)
    }
}

fn hyp_scale(g: &Isometry) -> f64 {
    g.matrix().iter().flatten().fold(1.0_f64, |a, x| a.max(x.abs()))
}

fn report(lifts: &[HPoint], raw: Vec<Vec3>) -> BalancedReport {
    let residuals: Vec<HTangent> = lifts.iter().zip(raw).map(|(p, v)| HTangent::project(*p, v)).collect();
    let norms: Vec<f64> = residuals.iter().map(|r| r.norm()).collect();
    let max_norm = norms.iter().fold(0.0, |m: f64, &x| if x.is_nan() { f64::INFINITY } else { m.max(x) });
    let rms_norm = libm::sqrt(norms.iter().map(|n| n * n).sum::<f64>() / norms.len().max(1) as f64);
    BalancedReport { residuals, max_norm, rms_norm }
}
