//! One-parameter families of hyperbolic metrics with fixed gluing
//! combinatorics, together with the graph and homotopy class whose energy
//! is minimized over the family.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::graph::{bouquet, WeightedGraph};
use crate::hyp::HPoint;
use crate::marked::MarkedMap;
use crate::surface::{self, SurfaceModel, Word};

#[derive(Clone, Debug, PartialEq)]
pub enum FamilyKind {
    /// Genus `g >= 2` glued from `4(g - 1)` right-angled hexagons; the
    /// parameter is the `d`-side length `s`.
    HexagonGenus { genus: usize, m_c: f64, m_d: f64 },
    /// The regular `4g`-gon surface with the bouquet of `2g` loops. No modulus.
    Regular4g { genus: usize, weight: f64 },
    /// Klein's quartic tiled by `(2, 3, 7)` triangles. No modulus.
    Triangle { p: u32, q: u32, r: u32, weights: [f64; 3] },
}

impl FamilyKind {
    pub fn hexagon_genus2(m_c: f64, m_d: f64) -> Self {
        FamilyKind::HexagonGenus { genus: 2, m_c, m_d }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::HexagonGenus { genus: 2, .. } => "hexagon-genus2",
            FamilyKind::HexagonGenus { .. } => "hexagon-genus-g",
            FamilyKind::Regular4g { .. } => "regular-4g",
            FamilyKind::Triangle { .. } => "triangle",
        }
    }
}

/// Parameter domain of a family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    /// Open interval.
    Open(f64, f64),
    /// A single admissible parameter value.
    Point(f64),
}

impl Domain {
    pub fn contains(&self, theta: f64) -> bool {
        match *self {
            Domain::Open(lo, hi) => theta > lo && theta < hi,
            Domain::Point(p) => theta == p,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Open(lo, hi) => write!(f, "({lo}, {hi})"),
            Domain::Point(p) => write!(f, "{{{p}}}"),
        }
    }
}

/// A surface of the family together with the graph and the class of maps.
#[derive(Clone, Debug)]
pub struct FamilyMember {
    pub parameter: f64,
    pub surface: Arc<SurfaceModel>,
    pub graph: Arc<WeightedGraph>,
    /// Deck word of every half-edge. Identical for every member.
    pub decks: Vec<Word>,
    /// Lifts of the symmetric reference map.
    pub reference_lifts: Vec<HPoint>,
}

impl FamilyMember {
    pub fn reference_map(&self) -> Result<MarkedMap> {
        MarkedMap::new(self.surface.clone(), self.graph.clone(), self.reference_lifts.clone(), self.decks.clone())
    }

    /// Every vertex at the barycenter of the fundamental polygon.
    pub fn seed_map(&self) -> Result<MarkedMap> {
        Ok(self.reference_map()?.barycenter_seed())
    }

    pub fn map_with_lifts(&self, lifts: Vec<HPoint>) -> Result<MarkedMap> {
        MarkedMap::new(self.surface.clone(), self.graph.clone(), lifts, self.decks.clone())
    }
}

const RELATOR_LIMIT: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct MetricFamily {
    pub kind: FamilyKind,
    pub domain: Domain,
}

fn positive(what: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange { what, value: x })
    }
}

impl MetricFamily {
    pub fn new(kind: FamilyKind) -> Result<Self> {
        let domain = match &kind {
            FamilyKind::HexagonGenus { genus, m_c, m_d } => {
                if *genus < 2 {
                    return Err(Error::OutOfRange { what: "genus", value: *genus as f64 });
                }
                positive("weight m_c", *m_c)?;
                positive("weight m_d", *m_d)?;
                Domain::Open(0.0, f64::INFINITY)
            }
            FamilyKind::Regular4g { genus, weight } => {
                if *genus < 2 {
                    return Err(Error::OutOfRange { what: "genus", value: *genus as f64 });
                }
                positive("weight", *weight)?;
                Domain::Point(0.0)
            }
            FamilyKind::Triangle { p, q, r, weights } => {
                if (*p, *q, *r) != (2, 3, 7) {
                    return Err(Error::Unsupported(alloc::format!(
                        "triangle family ({p}, {q}, {r}): only the (2, 3, 7) tiling of Klein's quartic is built"
                    )));
                }
                for w in weights {
                    positive("triangle weight", *w)?;
                }
                Domain::Point(0.0)
            }
        };
        Ok(MetricFamily { kind, domain })
    }

    pub fn hexagon_genus2(m_c: f64, m_d: f64) -> Result<Self> {
        Self::new(FamilyKind::hexagon_genus2(m_c, m_d))
    }

    pub fn is_singleton(&self) -> bool {
        matches!(self.domain, Domain::Point(_))
    }

    pub fn member(&self, theta: f64) -> Result<FamilyMember> {
        if !self.domain.contains(theta) {
            return Err(Error::OutOfRange { what: "family parameter", value: theta });
        }
        let tiled = match &self.kind {
            FamilyKind::HexagonGenus { genus, m_c, m_d } => {
                let tiled = surface::build_hexagon_surface(*genus, theta, *m_c, *m_d)?;
                // long thin hexagons push the far tiles of the development out
                // of reach of double-double
                let defect = tiled.surface.check().max_relator_defect;
                if !(defect <= RELATOR_LIMIT) {
                    return Err(Error::Surface(alloc::format!("development at parameter {theta} has relator defect {defect:e}")));
                }
                tiled
            }
            FamilyKind::Triangle { weights, .. } => surface::build_klein_triangulation(*weights)?,
            FamilyKind::Regular4g { genus, weight } => {
                let s = surface::build_regular_4g_surface(*genus)?;
                let graph = scale_weights(&bouquet(2 * genus)?, *weight)?;
                return Ok(FamilyMember {
                    parameter: theta,
                    surface: Arc::new(s),
                    graph: Arc::new(graph),
                    decks: surface::regular_4g_bouquet_decks(*genus),
                    reference_lifts: vec![HPoint::origin()],
                });
            }
        };
        Ok(FamilyMember { parameter: theta, surface: tiled.surface, graph: tiled.graph, decks: tiled.decks, reference_lifts: tiled.lifts })
    }

    pub fn surface_at(&self, theta: f64) -> Result<Arc<SurfaceModel>> {
        Ok(self.member(theta)?.surface)
    }

    /// A parameter value inside the domain.
    pub fn default_parameter(&self) -> f64 {
        match self.domain {
            Domain::Point(p) => p,
            Domain::Open(..) => libm::log(2.0 + libm::sqrt(3.0)),
        }
    }
}

fn scale_weights(g: &WeightedGraph, k: f64) -> Result<WeightedGraph> {
    if k == 1.0 {
        return Ok(g.clone());
    }
    let edges: Vec<crate::graph::EdgeSpec> =
        g.edges().map(|e| crate::graph::EdgeSpec::new(g.origin(e), g.terminus(e), k * g.weight(e))).collect();
    Ok(WeightedGraph::from_edges(g.vertex_count(), &edges)?)
}
