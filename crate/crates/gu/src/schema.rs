//! JSON file formats for graphs, surfaces and maps.
//!
//! Numbers are written by `serde_json`, which prints the shortest decimal
//! that reads back to the same `f64`; every file round-trips bit for bit.

use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use gu_core::graph::EdgeSpec;
use gu_core::hyp::minkowski;
use gu_core::{HPoint, Isometry, MarkedMap, PolygonGluing, SurfaceModel, WeightedGraph, Word};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// How far a stored point may sit off the sheet before it is rejected. Points
/// inside this band are projected back.
const SHEET_SLACK: f64 = 1e-9;

#[derive(Debug)]
pub enum SchemaError {
    /// Not JSON, or JSON of the wrong shape.
    Syntax {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    /// Well-formed, but the content is inconsistent.
    Field {
        path: String,
        message: String,
    },
    Graph {
        path: String,
        source: gu_core::GraphError,
    },
}

impl SchemaError {
    fn field(path: impl Into<String>, message: impl fmt::Display) -> Self {
        SchemaError::Field { path: path.into(), message: message.to_string() }
    }
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemaError::Syntax { path, line, column, message } => {
                write!(f, "line {line}, column {column}")?;
                if !path.is_empty() && path != "." {
                    write!(f, ", at `{path}`")?;
                }
                write!(f, ": {message}")
            }
            SchemaError::Field { path, message } => write!(f, "`{path}`: {message}"),
            SchemaError::Graph { path, source } => write!(f, "`{path}`: {source}"),
        }
    }
}

impl std::error::Error for SchemaError {}

/// Parses `text`, reporting the line, column and field path of the first
/// problem.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, SchemaError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        SchemaError::Syntax { path, line: inner.line(), column: inner.column(), message: strip_position(&inner.to_string()) }
    })
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
}

/// `{ "vertices": n, "edges": [{"from", "to", "weight", "class"}] }`. Each
/// record is one unoriented edge; loops have `from == to`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertices: usize,
    pub edges: Vec<EdgeRecord>,
}

impl GraphFile {
    /// Edges are listed in the order of [`WeightedGraph::edges`], each read
    /// from its origin.
    pub fn from_graph(g: &WeightedGraph) -> Self {
        let edges = g
            .edges()
            .map(|e| EdgeRecord { from: g.origin(e), to: g.terminus(e), weight: g.weight(e), class: g.class(e).map(str::to_string) })
            .collect();
        GraphFile { vertices: g.vertex_count(), edges }
    }

    /// The graph numbers half-edges so that record `i` becomes half-edge
    /// `2i` and its reversal `2i + 1`.
    pub fn build(&self) -> Result<WeightedGraph, SchemaError> {
        for (i, e) in self.edges.iter().enumerate() {
            for (name, v) in [("from", e.from), ("to", e.to)] {
                if v >= self.vertices {
                    return Err(SchemaError::field(
                        format!("edges[{i}].{name}"),
                        format!("vertex {v} out of range (graph has {})", self.vertices),
                    ));
                }
            }
            if !(e.weight > 0.0 && e.weight.is_finite()) {
                return Err(SchemaError::field(
                    format!("edges[{i}].weight"),
                    format!("weight must be positive and finite, got {}", e.weight),
                ));
            }
        }
        let specs: Vec<EdgeSpec> =
            self.edges.iter().map(|e| EdgeSpec { from: e.from, to: e.to, weight: e.weight, class: e.class.clone() }).collect();
        WeightedGraph::from_edges(self.vertices, &specs).map_err(|source| SchemaError::Graph { path: "edges".into(), source })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolygonRecord {
    /// Corners as hyperboloid triples, in order.
    pub vertices: Vec<[f64; 3]>,
    /// Side `i` is glued to side `partner[i]`.
    pub partner: Vec<usize>,
    /// Signed generator carrying side `partner[i]` onto side `i`.
    pub letters: Vec<i32>,
}

/// Generators as row-major 3x3 matrices, an optional fundamental polygon,
/// and relator words of signed 1-based generator indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceFile {
    pub genus: usize,
    pub generators: Vec<[f64; 9]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polygon: Option<PolygonRecord>,
    #[serde(default)]
    pub relators: Vec<Vec<i32>>,
}

impl SurfaceFile {
    pub fn from_surface(s: &SurfaceModel) -> Self {
        let generators = s
            .generators()
            .iter()
            .map(|g| {
                let m = g.matrix();
                [m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2]]
            })
            .collect();
        let polygon = s.polygon().map(|p| PolygonRecord {
            vertices: p.vertices.iter().map(|v| v.coords()).collect(),
            partner: p.partner.clone(),
            letters: p.letters.clone(),
        });
        SurfaceFile { genus: s.genus(), generators, polygon, relators: s.relators().iter().map(|w| w.letters().to_vec()).collect() }
    }

    pub fn build(&self) -> Result<SurfaceModel, SchemaError> {
        let mut generators = Vec::with_capacity(self.generators.len());
        for (i, m) in self.generators.iter().enumerate() {
            let rows = [[m[0], m[1], m[2]], [m[3], m[4], m[5]], [m[6], m[7], m[8]]];
            generators.push(Isometry::from_matrix(rows).map_err(|e| SchemaError::field(format!("generators[{i}]"), e))?);
        }
        let polygon = match &self.polygon {
            None => None,
            Some(p) => {
                let vertices = p
                    .vertices
                    .iter()
                    .enumerate()
                    .map(|(i, v)| point(v, &format!("polygon.vertices[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                Some(PolygonGluing { vertices, partner: p.partner.clone(), letters: p.letters.clone() })
            }
        };
        let relators = self.relators.iter().map(|w| Word::new(w.clone())).collect();
        SurfaceModel::new(generators, polygon, relators, self.genus).map_err(|e| SchemaError::field("surface", e))
    }
}

/// Reads a hyperboloid triple, projecting it onto the sheet when it is off
/// by rounding only.
pub fn point(v: &[f64; 3], path: &str) -> Result<HPoint, SchemaError> {
    let q = minkowski(v, v);
    let defect = (q + 1.0).abs() / (1.0 + v[0] * v[0]);
    if !v.iter().all(|x| x.is_finite()) || !(v[0] > 0.0) || !(defect <= SHEET_SLACK) {
        return Err(SchemaError::field(path, format!("not a point of the upper sheet (<p, p> + 1 = {:e})", q + 1.0)));
    }
    HPoint::from_timelike(*v).map_err(|e| SchemaError::field(path, e))
}

/// Vertex lifts and one deck word per graph edge, read in the direction the
/// edge is listed. The surface and graph may be embedded; otherwise they
/// come from separate files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<SurfaceFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphFile>,
    pub lifts: Vec<[f64; 3]>,
    pub decks: Vec<Vec<i32>>,
}

impl MapFile {
    pub fn from_map(m: &MarkedMap, embed: bool) -> Self {
        let g = m.graph();
        MapFile {
            surface: embed.then(|| SurfaceFile::from_surface(m.surface())),
            graph: embed.then(|| GraphFile::from_graph(g)),
            lifts: m.lifts().iter().map(|p| p.coords()).collect(),
            decks: g.edges().map(|e| m.decks()[e].letters().to_vec()).collect(),
        }
    }

    /// Builds the map. `surface` and `graph` override anything embedded.
    pub fn build(&self, surface: Option<&SurfaceFile>, graph: Option<&GraphFile>) -> Result<MarkedMap, SchemaError> {
        let sf = surface
            .or(self.surface.as_ref())
            .ok_or_else(|| SchemaError::field("surface", "map has no embedded surface and none was given"))?;
        let gf =
            graph.or(self.graph.as_ref()).ok_or_else(|| SchemaError::field("graph", "map has no embedded graph and none was given"))?;
        let s = Arc::new(sf.build()?);
        let g = Arc::new(gf.build()?);
        if self.lifts.len() != g.vertex_count() {
            return Err(SchemaError::field("lifts", format!("{} lifts for {} vertices", self.lifts.len(), g.vertex_count())));
        }
        if self.decks.len() != g.edge_count() {
            return Err(SchemaError::field("decks", format!("{} deck words for {} edges", self.decks.len(), g.edge_count())));
        }
        let count = s.generators().len() as i32;
        for (i, w) in self.decks.iter().enumerate() {
            if let Some(k) = w.iter().position(|&l| l == 0 || l.abs() > count) {
                return Err(SchemaError::field(format!("decks[{i}][{k}]"), format!("letter {} is not one of ±1..±{count}", w[k])));
            }
        }
        let lifts = self.lifts.iter().enumerate().map(|(i, v)| point(v, &format!("lifts[{i}]"))).collect::<Result<Vec<_>, _>>()?;
        let words = self.decks.iter().map(|w| Word::new(w.clone())).collect();
        MarkedMap::from_edge_decks(s, g, lifts, words).map_err(|e| SchemaError::field("decks", e))
    }
}

/// The map inside a `solve` result, which carries other fields beside it.
#[derive(Deserialize)]
struct Solved {
    map: MapFile,
}

/// Parses either a bare map file or the output of `gu solve`.
pub fn parse_map(text: &str) -> Result<MapFile, SchemaError> {
    let wrapped = matches!(serde_json::from_str::<serde_json::Value>(text), Ok(serde_json::Value::Object(o)) if o.contains_key("map"));
    if wrapped {
        parse::<Solved>(text).map(|s| s.map)
    } else {
        parse(text)
    }
}

/// Reads and parses a file; the error names the file.
pub fn read<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).map_err(|e| anyhow::Error::new(e).context(format!("cannot read {}", path.display())))?;
    parse(&text).map_err(|e| anyhow::Error::new(e).context(format!("{} is not valid", path.display())))
}

pub fn read_map(path: &Path) -> anyhow::Result<MapFile> {
    let text = fs::read_to_string(path).map_err(|e| anyhow::Error::new(e).context(format!("cannot read {}", path.display())))?;
    parse_map(&text).map_err(|e| anyhow::Error::new(e).context(format!("{} is not valid", path.display())))
}
