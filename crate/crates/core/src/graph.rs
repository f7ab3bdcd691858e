//! Finite weighted graphs stored as half-edges, so loops and multi-edges are
//! ordinary edges.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, GraphError, Result};

/// Graph with oriented half-edges, a fixed-point-free reversal involution
/// and symmetric positive weights. Half-edges `2i` and `2i + 1` are the two
/// orientations of input edge `i` when built with [`WeightedGraph::from_edges`].
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    vertex_count: usize,
    origin: Vec<usize>,
    reversal: Vec<usize>,
    weight: Vec<f64>,
    class: Vec<Option<String>>,
    stars: Vec<Vec<usize>>,
}

/// The half-edges leaving one vertex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeStar<'a> {
    pub vertex: usize,
    pub edges: &'a [usize],
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub loop_count: usize,
    pub degrees: Vec<usize>,
    pub connected: bool,
}

/// One undirected edge as given to [`WeightedGraph::from_edges`].
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeSpec {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
    pub class: Option<String>,
}

impl EdgeSpec {
    pub fn new(from: usize, to: usize, weight: f64) -> Self {
        EdgeSpec { from, to, weight, class: None }
    }

    pub fn with_class(mut self, class: &str) -> Self {
        self.class = Some(class.into());
        self
    }
}

impl WeightedGraph {
    /// Builds and validates a connected graph from undirected edges.
    pub fn from_edges(vertex_count: usize, edges: &[EdgeSpec]) -> Result<Self, GraphError> {
        let mut origin = Vec::with_capacity(2 * edges.len());
        let mut reversal = Vec::with_capacity(2 * edges.len());
        let mut weight = Vec::with_capacity(2 * edges.len());
        let mut class = Vec::with_capacity(2 * edges.len());
        for (i, e) in edges.iter().enumerate() {
            origin.extend([e.from, e.to]);
            reversal.extend([2 * i + 1, 2 * i]);
            weight.extend([e.weight, e.weight]);
            class.extend([e.class.clone(), e.class.clone()]);
        }
        Self::from_half_edges(vertex_count, origin, reversal, weight, class, false)
    }

    /// Builds from raw half-edge tables, checking every invariant.
    pub fn from_half_edges(
        vertex_count: usize,
        origin: Vec<usize>,
        reversal: Vec<usize>,
        weight: Vec<f64>,
        class: Vec<Option<String>>,
        allow_disconnected: bool,
    ) -> Result<Self, GraphError> {
        let h = origin.len();
        if reversal.len() != h || weight.len() != h {
            return Err(GraphError::ReversalOutOfRange(h.min(reversal.len()).min(weight.len())));
        }
        if class.len() != h {
            return Err(GraphError::ClassCount { expected: h, got: class.len() });
        }
        let mut g = WeightedGraph { vertex_count, origin, reversal, weight, class, stars: Vec::new() };
        g.check_tables()?;
        g.stars = vec![Vec::new(); vertex_count];
        for (e, &o) in g.origin.iter().enumerate() {
            g.stars[o].push(e);
        }
        if !allow_disconnected {
            if let Some(v) = g.unreachable_vertex() {
                return Err(GraphError::Disconnected(v));
            }
        }
        Ok(g)
    }

    fn check_tables(&self) -> Result<(), GraphError> {
        if self.vertex_count == 0 {
            return Err(GraphError::Empty);
        }
        let h = self.origin.len();
        for e in 0..h {
            if self.origin[e] >= self.vertex_count {
                return Err(GraphError::VertexOutOfRange { half_edge: e, vertex: self.origin[e], count: self.vertex_count });
            }
            let r = self.reversal[e];
            if r >= h {
                return Err(GraphError::ReversalOutOfRange(e));
            }
            if r == e {
                return Err(GraphError::ReversalFixedPoint(e));
            }
        }
        for (e, &r) in self.reversal.iter().enumerate() {
            if self.reversal[r] != e {
                return Err(GraphError::NotInvolution(e));
            }
        }
        for e in 0..h {
            let w = self.weight[e];
            if !(w > 0.0) || !w.is_finite() {
                return Err(GraphError::NonPositiveWeight { half_edge: e, weight: w });
            }
            let wr = self.weight[self.reversal[e]];
            if w != wr {
                return Err(GraphError::AsymmetricWeight { half_edge: e, forward: w, backward: wr });
            }
        }
        Ok(())
    }

    fn unreachable_vertex(&self) -> Option<usize> {
        let mut seen = vec![false; self.vertex_count];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &e in &self.stars[v] {
                let w = self.terminus(e);
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    /// Re-runs every check and summarizes the graph.
    pub fn validate(&self) -> Result<ValidationReport, GraphError> {
        self.check_tables()?;
        let connected = self.unreachable_vertex().is_none();
        Ok(ValidationReport {
            vertex_count: self.vertex_count,
            edge_count: self.edge_count(),
            loop_count: self.edges().filter(|&e| self.origin(e) == self.terminus(e)).count(),
            degrees: self.stars.iter().map(|s| s.len()).collect(),
            connected,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn half_edge_count(&self) -> usize {
        self.origin.len()
    }

    /// Number of unoriented edges.
    pub fn edge_count(&self) -> usize {
        self.origin.len() / 2
    }

    pub fn origin(&self, e: usize) -> usize {
        self.origin[e]
    }

    pub fn terminus(&self, e: usize) -> usize {
        self.origin[self.reversal[e]]
    }

    pub fn reversal(&self, e: usize) -> usize {
        self.reversal[e]
    }

    pub fn weight(&self, e: usize) -> f64 {
        self.weight[e]
    }

    pub fn class(&self, e: usize) -> Option<&str> {
        self.class[e].as_deref()
    }

    pub fn star(&self, x: usize) -> EdgeStar<'_> {
        EdgeStar { vertex: x, edges: &self.stars[x] }
    }

    pub fn degree(&self, x: usize) -> usize {
        self.stars[x].len()
    }

    /// `W_x`, the total weight of the half-edges leaving `x`.
    pub fn vertex_weight(&self, x: usize) -> f64 {
        self.stars[x].iter().map(|&e| self.weight[e]).sum()
    }

    /// One half-edge per unoriented edge: the one with the smaller index.
    pub fn edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.origin.len()).filter(move |&e| e < self.reversal[e])
    }

    pub fn is_connected(&self) -> bool {
        self.unreachable_vertex().is_none()
    }

    /// Replaces the weight of every edge whose class is listed.
    pub fn with_class_weights(&self, weights: &[(&str, f64)]) -> Result<WeightedGraph> {
        let mut g = self.clone();
        for e in 0..g.weight.len() {
            if let Some(c) = g.class[e].as_deref() {
                if let Some((_, w)) = weights.iter().find(|(k, _)| *k == c) {
                    g.weight[e] = *w;
                }
            }
        }
        g.check_tables().map_err(Error::from)?;
        Ok(g)
    }

    /// A spanning tree by breadth-first search from vertex 0, as one
    /// half-edge per vertex (`None` at the root).
    pub fn spanning_tree(&self) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.vertex_count];
        let mut seen = vec![false; self.vertex_count];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.stars[v] {
                let w = self.terminus(e);
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(e);
                    queue.push_back(w);
                }
            }
        }
        parent
    }
}

/// `k` loops at a single vertex, unit weights.
pub fn bouquet(k: usize) -> Result<WeightedGraph> {
    if k == 0 {
        return Err(Error::OutOfRange { what: "loop count", value: 0.0 });
    }
    let edges: Vec<EdgeSpec> = (0..k).map(|_| EdgeSpec::new(0, 0, 1.0)).collect();
    Ok(WeightedGraph::from_edges(1, &edges)?)
}

/// One-skeleton of the tiling of a genus-`g` surface by `4(g - 1)`
/// right-angled hexagons, edges labelled `c` or `d`, unit weights.
pub fn hexagon_tiling_genus(g: usize) -> Result<WeightedGraph> {
    crate::tiling::TileComplex::hexagon_genus(g)?.graph()
}

/// One-skeleton of a `(p, q, r)` triangle tiling with `copies` triangles,
/// edges labelled `1`, `2`, `3` by the opposite corner. `copies = 2` is the
/// orbifold pair of a triangle and its mirror image; `(2, 3, 7)` also
/// supports `copies = 336`, the tiling of Klein's quartic.
pub fn triangle_tiling(p: u32, q: u32, r: u32, copies: usize) -> Result<WeightedGraph> {
    crate::tiling::TileComplex::triangles(p, q, r, copies)?.graph()
}
