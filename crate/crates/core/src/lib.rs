//! Discrete harmonic maps from finite weighted graphs into closed hyperbolic
//! surfaces, and minimization of their energy over families of hyperbolic
//! metrics.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, rendering and the
//! command line live in the companion `gu` crate.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

mod dd;
pub mod error;
pub mod family;
pub mod graph;
pub mod hyp;
pub mod marked;
pub mod optimize;
pub mod solver;
pub mod surface;
pub mod tiling;
pub mod trig;
pub mod variation;

pub use error::{Error, GraphError, Result};
pub use family::{FamilyKind, FamilyMember, MetricFamily};
pub use graph::{EdgeStar, ValidationReport, WeightedGraph};
pub use hyp::{dist, exp_map, geodesic_point, log_map, translation_length, HPoint, HTangent, Isometry};
pub use marked::{BalancedReport, MarkedMap};
pub use solver::{SolveTrace, SolverConfig};
pub use surface::{PolygonGluing, SurfaceModel, Word};
