//! Closed hyperbolic surfaces as numeric Fuchsian generators, usually with a
//! fundamental polygon whose sides they pair.
//!
//! Conventions: a [`Word`] is a list of signed 1-based generator indices and
//! evaluates left to right as a matrix product, so `[a, b]` is `A * B`.
//! Polygon side `i` runs from corner `i` to corner `i + 1`; the isometry named
//! by `letters[i]` carries side `i` onto side `partner[i]`, sending corner `i`
//! to corner `partner[i] + 1`. The tile across side `i` from the polygon is
//! therefore the image of the polygon under the inverse of that isometry.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

use crate::dd;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::hyp::{self, mat, HPoint, Isometry, Mat3};
use crate::tiling::TileComplex;
use crate::trig;

/// A word in the generators and their inverses.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<i32>);

impl Word {
    pub fn new(letters: Vec<i32>) -> Self {
        Word(letters).reduced()
    }

    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn letter(l: i32) -> Self {
        Word(vec![l])
    }

    pub fn letters(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| -l).collect())
    }

    /// `self * other`, freely reduced.
    pub fn then(&self, other: &Word) -> Word {
        let mut out = self.0.clone();
        out.extend_from_slice(&other.0);
        Word(out).reduced()
    }

    fn reduced(self) -> Word {
        let mut out: Vec<i32> = Vec::with_capacity(self.0.len());
        for l in self.0 {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }
}

/// A fundamental polygon together with its side pairing.
#[derive(Clone, Debug, PartialEq)]
pub struct PolygonGluing {
    pub vertices: Vec<HPoint>,
    pub partner: Vec<usize>,
    pub letters: Vec<i32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VertexCycle {
    pub corners: Vec<usize>,
    pub angle_sum: f64,
    /// Product of the pairings around the cycle; the identity for a surface.
    pub relator: Word,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceReport {
    pub relator_defects: Vec<f64>,
    pub max_relator_defect: f64,
    pub vertex_cycles: Vec<VertexCycle>,
    pub max_cycle_defect: f64,
    pub max_pairing_defect: f64,
    pub area: Option<f64>,
    pub expected_area: f64,
}

impl SurfaceReport {
    pub fn area_defect(&self) -> f64 {
        self.area.map_or(0.0, |a| (a - self.expected_area).abs())
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_relator_defect <= tol && self.max_cycle_defect <= tol && self.max_pairing_defect <= tol && self.area_defect() <= 10.0 * tol
    }
}

/// Generators written as products of reflections in the sides of a tile.
/// Deck words are multiplied out as reduced reflection words, which avoids
/// the cancellation between long generators.
#[derive(Clone, Debug, PartialEq)]
struct Mirrors {
    reflections: Vec<dd::DdMat>,
    words: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceModel {
    generators: Vec<Isometry>,
    // the generators and their inverses in double-double; `generators` is
    // the rounded copy
    exact: Vec<dd::DdMat>,
    exact_inv: Vec<dd::DdMat>,
    mirrors: Option<Mirrors>,
    polygon: Option<PolygonGluing>,
    relators: Vec<Word>,
    genus: usize,
}

impl SurfaceModel {
    /// Checks the structure (sizes, pairing involution, letter ranges);
    /// numeric identities are checked by [`SurfaceModel::check`].
    pub fn new(generators: Vec<Isometry>, polygon: Option<PolygonGluing>, relators: Vec<Word>, genus: usize) -> Result<Self> {
        let exact = generators.iter().map(|g| dd::mat_lift(g.matrix())).collect();
        Self::from_exact(exact, polygon, relators, genus)
    }

    pub(crate) fn from_exact(exact: Vec<dd::DdMat>, polygon: Option<PolygonGluing>, relators: Vec<Word>, genus: usize) -> Result<Self> {
        let generators: Vec<Isometry> = exact.iter().map(|m| Isometry::from_matrix_unchecked(dd::mat_round(m))).collect();
        if generators.is_empty() {
            return Err(Error::Surface("no generators".into()));
        }
        if genus < 2 {
            return Err(Error::Surface(format!("genus {genus} does not carry a hyperbolic metric")));
        }
        let count = generators.len();
        let check_letter = |l: i32| {
            if l == 0 || l.unsigned_abs() as usize > count {
                Err(Error::UnknownGenerator { letter: l, count })
            } else {
                Ok(())
            }
        };
        for w in &relators {
            w.letters().iter().try_for_each(|&l| check_letter(l))?;
        }
        if let Some(p) = &polygon {
            let n = p.vertices.len();
            if n < 3 || p.partner.len() != n || p.letters.len() != n {
                return Err(Error::Surface("polygon tables have mismatched sizes".into()));
            }
            for i in 0..n {
                let j = p.partner[i];
                if j >= n || j == i || p.partner[j] != i {
                    return Err(Error::Surface(format!("side pairing is not a fixed-point-free involution at side {i}")));
                }
                check_letter(p.letters[i])?;
                if p.letters[j] != -p.letters[i] {
                    return Err(Error::Surface(format!("paired sides {i} and {j} are not labelled by inverse letters")));
                }
            }
        }
        let exact_inv = exact.iter().map(dd::inverse_refined_dd).collect();
        Ok(SurfaceModel { generators, exact, exact_inv, mirrors: None, polygon, relators, genus })
    }

    fn with_mirrors(self, reflections: Vec<dd::DdMat>, words: Vec<Vec<usize>>) -> Result<Self> {
        let mirrors = Mirrors { reflections, words };
        let exact = mirrors.words.iter().map(|w| mirrors.product(w.iter().copied())).collect();
        let mut s = Self::from_exact(exact, self.polygon, self.relators, self.genus)?;
        s.mirrors = Some(mirrors);
        Ok(s)
    }

    /// The same surface moved by `g`: generators conjugated, polygon mapped.
    pub fn conjugated(&self, g: &Isometry) -> Result<SurfaceModel> {
        let gd = dd::mat_lift(g.matrix());
        let gi = dd::inverse_refined(g.matrix());
        let exact = self.exact.iter().map(|h| dd::mat_mul(&dd::mat_mul(&gd, h), &gi)).collect();
        let polygon = self.polygon.as_ref().map(|p| PolygonGluing {
            vertices: p.vertices.iter().map(|v| g.apply(v)).collect(),
            partner: p.partner.clone(),
            letters: p.letters.clone(),
        });
        let mut s = Self::from_exact(exact, polygon, self.relators.clone(), self.genus)?;
        s.mirrors = self.mirrors.as_ref().map(|m| Mirrors {
            reflections: m.reflections.iter().map(|r| dd::mat_mul(&dd::mat_mul(&gd, r), &gi)).collect(),
            words: m.words.clone(),
        });
        Ok(s)
    }

    pub fn generators(&self) -> &[Isometry] {
        &self.generators
    }

    pub fn polygon(&self) -> Option<&PolygonGluing> {
        self.polygon.as_ref()
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn generator(&self, letter: i32) -> Result<Isometry> {
        let count = self.generators.len();
        if letter == 0 || letter.unsigned_abs() as usize > count {
            return Err(Error::UnknownGenerator { letter, count });
        }
        let k = letter.unsigned_abs() as usize - 1;
        let m = if letter > 0 { &self.exact[k] } else { &self.exact_inv[k] };
        Ok(Isometry::from_matrix_unchecked(dd::mat_round(m)))
    }

    /// The isometry named by `w`. The product is accumulated in
    /// double-double and rounded once.
    pub fn eval(&self, w: &Word) -> Result<Isometry> {
        Ok(Isometry::from_matrix_unchecked(dd::mat_round(&self.eval_dd(w)?)))
    }

    pub(crate) fn eval_dd(&self, w: &Word) -> Result<dd::DdMat> {
        let count = self.generators.len();
        if let Some(&l) = w.letters().iter().find(|&&l| l == 0 || l.unsigned_abs() as usize > count) {
            return Err(Error::UnknownGenerator { letter: l, count });
        }
        if let Some(mirrors) = &self.mirrors {
            let mut reduced: Vec<usize> = Vec::new();
            for &l in w.letters() {
                let word = &mirrors.words[l.unsigned_abs() as usize - 1];
                let mut push = |r: usize| {
                    if reduced.last() == Some(&r) {
                        reduced.pop();
                    } else {
                        reduced.push(r);
                    }
                };
                if l > 0 {
                    word.iter().for_each(|&r| push(r));
                } else {
                    word.iter().rev().for_each(|&r| push(r));
                }
            }
            return Ok(mirrors.product(reduced.into_iter()));
        }
        let mut m = dd::mat_lift(&mat::IDENTITY);
        for &l in w.letters() {
            let k = l.unsigned_abs() as usize - 1;
            m = dd::mat_mul(&m, if l > 0 { &self.exact[k] } else { &self.exact_inv[k] });
        }
        Ok(m)
    }

    /// Vertex cycles of the polygon under the side pairing.
    pub fn vertex_cycles(&self) -> Option<Vec<VertexCycle>> {
        let p = self.polygon.as_ref()?;
        let n = p.vertices.len();
        let angles = trig::interior_angles(&p.vertices);
        let mut seen = vec![false; n];
        let mut cycles = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut corners = Vec::new();
            let mut letters = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                corners.push(i);
                letters.push(p.letters[i]);
                i = (p.partner[i] + 1) % n;
            }
            letters.reverse();
            let angle_sum = corners.iter().map(|&c| angles[c]).sum();
            cycles.push(VertexCycle { corners, angle_sum, relator: Word(letters) });
        }
        Some(cycles)
    }

    pub fn check(&self) -> SurfaceReport {
        let defect = |w: &Word| self.eval(w).map_or(f64::INFINITY, |m| m.distance_to(&Isometry::identity()));
        let relator_defects: Vec<f64> = self.relators.iter().map(defect).collect();
        let max_relator_defect = relator_defects.iter().cloned().fold(0.0, f64::max);
        let cycles = self.vertex_cycles().unwrap_or_default();
        let max_cycle_defect = cycles.iter().map(|c| (c.angle_sum - 2.0 * PI).abs()).fold(0.0, f64::max);
        let mut max_pairing_defect: f64 = 0.0;
        let mut area = None;
        if let Some(p) = &self.polygon {
            let n = p.vertices.len();
            for i in 0..n {
                let Ok(g) = self.eval_dd(&Word::letter(p.letters[i])) else {
                    max_pairing_defect = f64::INFINITY;
                    continue;
                };
                let j = p.partner[i];
                let gap = |x: &HPoint, y: &HPoint| dd::distance(&dd::mat_apply_dd(&g, &dd::lift3(&x.coords())), &dd::lift3(&y.coords()));
                let a = gap(&p.vertices[i], &p.vertices[(j + 1) % n]);
                let b = gap(&p.vertices[(i + 1) % n], &p.vertices[j]);
                max_pairing_defect = max_pairing_defect.max(a).max(b);
            }
            area = Some(trig::polygon_area(&p.vertices));
        }
        SurfaceReport {
            relator_defects,
            max_relator_defect,
            vertex_cycles: cycles,
            max_cycle_defect,
            max_pairing_defect,
            area,
            expected_area: 4.0 * PI * (self.genus as f64 - 1.0),
        }
    }

    pub fn validate(&self, tol: f64) -> Result<SurfaceReport> {
        let r = self.check();
        if !r.passes(tol) {
            return Err(Error::Surface(format!(
                "relator defect {:e}, cycle defect {:e}, pairing defect {:e}, area defect {:e} (tolerance {tol:e})",
                r.max_relator_defect,
                r.max_cycle_defect,
                r.max_pairing_defect,
                r.area_defect()
            )));
        }
        Ok(r)
    }

    /// Centroid of the polygon corners, or the origin without a polygon.
    pub fn barycenter(&self) -> HPoint {
        self.polygon.as_ref().map_or(HPoint::origin(), |p| HPoint::centroid(&p.vertices))
    }

    /// Whether `x` lies in the closed fundamental polygon. Geodesic polygons
    /// are Euclidean polygons in the Klein model, so this is a planar test.
    pub fn contains(&self, x: &HPoint) -> bool {
        let Some(p) = &self.polygon else { return true };
        let (px, py) = x.to_klein();
        let pts: Vec<(f64, f64)> = p.vertices.iter().map(|v| v.to_klein()).collect();
        let n = pts.len();
        let mut inside = false;
        for i in 0..n {
            let (ax, ay) = pts[i];
            let (bx, by) = pts[(i + 1) % n];
            if (ay > py) != (by > py) && px < ax + (py - ay) * (bx - ax) / (by - ay) {
                inside = !inside;
            }
        }
        inside
    }

    /// A point drawn uniformly in Klein coordinates from the polygon.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> HPoint {
        let Some(p) = &self.polygon else {
            return HPoint::from_polar(rng.random_range(0.0..1.0), rng.random_range(0.0..2.0 * PI));
        };
        let pts: Vec<(f64, f64)> = p.vertices.iter().map(|v| v.to_klein()).collect();
        let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
        for &(x, y) in &pts {
            lo = (lo.0.min(x), lo.1.min(y));
            hi = (hi.0.max(x), hi.1.max(y));
        }
        loop {
            let a = rng.random_range(lo.0..hi.0);
            let b = rng.random_range(lo.1..hi.1);
            if a * a + b * b >= 1.0 {
                continue;
            }
            let x = HPoint::from_raw_unchecked([1.0, a, b]);
            if self.contains(&x) {
                return x;
            }
        }
    }
}

impl Mirrors {
    fn product(&self, word: impl Iterator<Item = usize>) -> dd::DdMat {
        word.fold(dd::mat_lift(&mat::IDENTITY), |m, r| dd::mat_mul(&m, &self.reflections[r]))
    }
}

fn polygon_surface(vertices: Vec<HPoint>, partner: Vec<usize>, generator_for: impl Fn(usize) -> dd::DdMat) -> Result<SurfaceModel> {
    let n = vertices.len();
    let mut letters = vec![0i32; n];
    let mut generators = Vec::new();
    for i in 0..n {
        let j = partner[i];
        if j >= n || partner[j] != i || i == j {
            return Err(Error::Surface(format!("side pairing is not an involution at side {i}")));
        }
        if i < j {
            generators.push(generator_for(i));
            letters[i] = generators.len() as i32;
            letters[j] = -(generators.len() as i32);
        }
    }
    let pairs = generators.len();
    let polygon = PolygonGluing { vertices, partner, letters };
    let probe = SurfaceModel::from_exact(generators, Some(polygon), Vec::new(), 2)?;
    let cycles = probe.vertex_cycles().unwrap_or_default();
    let chi = cycles.len() as i64 - pairs as i64 + 1;
    if chi > -2 || chi % 2 != 0 {
        return Err(Error::Surface(format!("side pairing gives Euler characteristic {chi}")));
    }
    let genus = ((2 - chi) / 2) as usize;
    let relators = cycles.into_iter().map(|c| c.relator).collect();
    SurfaceModel::from_exact(probe.exact, probe.polygon, relators, genus)
}

/// A regular polygon centered at the origin with side `i` paired to side
/// `partner[i]` by the orientation-preserving isometry through the side
/// midpoints.
pub fn regular_paired_surface(n: usize, interior_angle: f64, partner: Vec<usize>) -> Result<SurfaceModel> {
    let poly = trig::regular_polygon(n, interior_angle)?;
    if partner.len() != n {
        return Err(Error::Surface("pairing has the wrong length".into()));
    }
    let flip = Isometry::half_turn(&poly.side_midpoint(0));
    let dir = |i: usize| 2.0 * PI * i as f64 / n as f64;
    let p = partner.clone();
    polygon_surface(poly.vertices(), partner, move |i| {
        dd::mat_lift(Isometry::rotation(dir(p[i])).compose(&flip).compose(&Isometry::rotation(-dir(i))).cleaned().matrix())
    })
}

/// The regular `4g`-gon with interior angle `pi / (2g)`, opposite sides
/// paired. Generator `k` (letter `k + 1`) carries side `k` to side `k + 2g`.
pub fn build_regular_4g_surface(g: usize) -> Result<SurfaceModel> {
    if g < 2 {
        return Err(Error::OutOfRange { what: "genus", value: g as f64 });
    }
    let n = 4 * g;
    regular_paired_surface(n, PI / (2.0 * g as f64), (0..n).map(|i| (i + 2 * g) % n).collect())
}

/// Deck words for the bouquet of `2g` loops through the center of the
/// regular `4g`-gon: loop `k` leaves through side `k`, so its forward
/// half-edge carries the inverse of generator `k`.
pub fn regular_4g_bouquet_decks(g: usize) -> Vec<Word> {
    (0..2 * g as i32).flat_map(|k| [Word::letter(-(k + 1)), Word::letter(k + 1)]).collect()
}

/// Klein's quartic as the regular 14-gon with interior angle `2 pi / 7`,
/// even side `i` paired with side `i + 5`.
pub fn build_klein_quartic() -> Result<SurfaceModel> {
    let mut partner = vec![0; 14];
    for i in (0..14).step_by(2) {
        let j = (i + 5) % 14;
        partner[i] = j;
        partner[j] = i;
    }
    regular_paired_surface(14, 2.0 * PI / 7.0, partner)
}

/// A tiled surface laid out in the plane: where every tile sits, which tile
/// sides bound the fundamental polygon, and the pairing letters.
#[derive(Clone, Debug, PartialEq)]
pub struct Development {
    /// Placement of each tile; the tile is the image of the prototype.
    /// Mirror tiles have determinant -1.
    pub placements: Vec<Mat3>,
    pub prototype: Vec<HPoint>,
    /// Polygon side index of every boundary tile side (`tile * n + k`).
    pub boundary: Vec<Option<usize>>,
    /// Tile and side of every polygon side.
    pub polygon_sides: Vec<(usize, usize)>,
    placements_dd: Vec<dd::DdMat>,
}

impl Development {
    pub fn tile_corners(&self, tile: usize) -> Vec<HPoint> {
        self.prototype.iter().map(|p| self.place(tile, p)).collect()
    }

    fn place(&self, tile: usize, p: &HPoint) -> HPoint {
        HPoint::from_raw_unchecked(dd::round3(&dd::mat_apply_dd(&self.placements_dd[tile], &dd::lift3(&p.coords()))))
    }
}

/// Lays the tiles of `complex` out in the plane by breadth-first growth
/// from tile 0 (lowest index first), then reads off the fundamental polygon
/// and its side pairings.
pub fn develop(complex: &TileComplex, prototype: &[HPoint]) -> Result<(SurfaceModel, Development)> {
    let n = complex.side_count();
    if prototype.len() != n {
        return Err(Error::Tiling("prototype polygon has the wrong number of corners".into()));
    }
    for (k, a) in trig::interior_angles(prototype).iter().enumerate() {
        let want = PI / complex.corner_order(k) as f64;
        if (a - want).abs() > 1e-8 {
            return Err(Error::Tiling(format!("prototype angle {a} at corner {k}, expected {want}")));
        }
    }
    if !complex.is_free() {
        return Err(Error::Tiling("tiles around some corner close up early (cone point)".into()));
    }
    if complex.orientation().is_none() {
        return Err(Error::Tiling("surface is not orientable".into()));
    }
    let tiles = complex.tile_count();
    let reflections: Vec<dd::DdMat> =
        (0..n).map(|k| dd::reflection_through(&prototype[k].coords(), &prototype[(k + 1) % n].coords())).collect();

    let mut placements_dd: Vec<Option<dd::DdMat>> = vec![None; tiles];
    let mut paths: Vec<Vec<usize>> = vec![Vec::new(); tiles];
    placements_dd[0] = Some(dd::mat_lift(&mat::IDENTITY));
    let mut queue = VecDeque::from([0usize]);
    while let Some(t) = queue.pop_front() {
        let w = placements_dd[t].unwrap_or_else(|| dd::mat_lift(&mat::IDENTITY));
        for (k, r) in reflections.iter().enumerate() {
            let u = complex.neighbor(t, k);
            if placements_dd[u].is_none() {
                placements_dd[u] = Some(dd::mat_mul(&w, r));
                paths[u] = paths[t].iter().copied().chain([k]).collect();
                queue.push_back(u);
            }
        }
    }
    let placements_dd: Vec<dd::DdMat> = placements_dd.into_iter().map(|p| p.unwrap_or_else(|| dd::mat_lift(&mat::IDENTITY))).collect();
    let placements: Vec<Mat3> = placements_dd.iter().map(dd::mat_round).collect();
    let center = dd::lift3(&HPoint::centroid(prototype).coords());
    let at = |m: &dd::DdMat| dd::mat_apply_dd(m, &center);
    let interior = |t: usize, k: usize| {
        let u = complex.neighbor(t, k);
        dd::distance(&at(&placements_dd[u]), &at(&dd::mat_mul(&placements_dd[t], &reflections[k]))) < 1e-6
    };

    // walk the boundary counterclockwise
    let is_boundary: Vec<bool> = (0..tiles * n).map(|i| !interior(i / n, i % n)).collect();
    let Some(first) = is_boundary.iter().position(|&b| b) else {
        return Err(Error::Tiling("development has no boundary".into()));
    };
    let mirrored = |t: usize| mat::det(&placements[t]) < 0.0;
    let other_side = |s: usize, c: usize| if s == c { (c + n - 1) % n } else { c };
    let (mut t, mut s) = (first / n, first % n);
    let mut c = if mirrored(t) { (s + 1) % n } else { s };
    let mut polygon_sides = Vec::new();
    let mut vertices = Vec::new();
    let mut boundary = vec![None; tiles * n];
    loop {
        if boundary[t * n + s].is_some() {
            return Err(Error::Tiling("boundary walk revisits a side".into()));
        }
        boundary[t * n + s] = Some(polygon_sides.len());
        polygon_sides.push((t, s));
        vertices.push(HPoint::from_raw_unchecked(dd::round3(&dd::mat_apply_dd(&placements_dd[t], &dd::lift3(&prototype[c].coords())))));
        c = if s == c { (s + 1) % n } else { s };
        let mut next = other_side(s, c);
        let mut guard = 0;
        while !is_boundary[t * n + next] {
            t = complex.neighbor(t, next);
            s = next;
            next = other_side(s, c);
            guard += 1;
            if guard > 2 * tiles * n {
                return Err(Error::Tiling("boundary walk does not terminate".into()));
            }
        }
        s = next;
        if t * n + s == first {
            break;
        }
    }
    if polygon_sides.len() != is_boundary.iter().filter(|&&b| b).count() {
        return Err(Error::Tiling("fundamental region is not a disk".into()));
    }
    let partner: Vec<usize> = polygon_sides.iter().map(|&(t, s)| boundary[complex.neighbor(t, s) * n + s].unwrap_or(usize::MAX)).collect();
    let sides = polygon_sides.clone();
    let surface = polygon_surface(vertices, partner, |i| {
        let (t, s) = sides[i];
        let u = complex.neighbor(t, s);
        dd::mat_mul(&dd::mat_mul(&placements_dd[u], &reflections[s]), &dd::inverse_refined_dd(&placements_dd[t]))
    })?;
    let polygon = surface.polygon().cloned();
    let mut words = vec![Vec::new(); surface.generators().len()];
    for (i, &(t, s)) in polygon_sides.iter().enumerate() {
        let l = polygon.as_ref().map_or(0, |p| p.letters[i]);
        if l > 0 {
            let u = complex.neighbor(t, s);
            words[l as usize - 1] = paths[u].iter().copied().chain([s]).chain(paths[t].iter().rev().copied()).collect();
        }
    }
    let surface = surface.with_mirrors(reflections.clone(), words)?;
    let development = Development { placements, prototype: prototype.to_vec(), boundary, polygon_sides, placements_dd };
    Ok((surface, development))
}

/// A surface tiled by copies of a polygon, with its one-skeleton graph and
/// the map sending the graph onto the tile sides.
#[derive(Clone, Debug)]
pub struct TiledSurface {
    pub surface: Arc<SurfaceModel>,
    pub graph: Arc<WeightedGraph>,
    pub complex: TileComplex,
    pub development: Development,
    /// Lift of each graph vertex: a tile corner in the development.
    pub lifts: Vec<HPoint>,
    /// Deck word of every half-edge.
    pub decks: Vec<Word>,
}

impl TiledSurface {
    pub fn new(complex: TileComplex, prototype: &[HPoint], weights: &[(&str, f64)]) -> Result<Self> {
        let (surface, development) = develop(&complex, prototype)?;
        let graph = complex.graph()?.with_class_weights(weights)?;
        let n = complex.side_count();
        let (corner_class, classes) = complex.corner_classes();
        let letter_of = |t: usize, k: usize| development.boundary[t * n + k].map(|i| surface.polygon().map_or(0, |p| p.letters[i]));
        // deck[(t, c)] carries the class lift onto corner c of tile t
        let mut deck: Vec<Option<Word>> = vec![None; complex.tile_count() * n];
        let mut lifts = vec![HPoint::origin(); classes];
        // each class is lifted to its corner nearest the origin
        let height: Vec<f64> = (0..deck.len()).map(|i| development.place(i / n, &prototype[i % n]).coords()[0]).collect();
        let mut order: Vec<usize> = (0..deck.len()).collect();
        order.sort_by(|&a, &b| height[a].total_cmp(&height[b]));
        for start in order {
            if deck[start].is_some() {
                continue;
            }
            let c = start % n;
            lifts[corner_class[start]] = development.place(start / n, &prototype[c]);
            deck[start] = Some(Word::identity());
            let mut queue = VecDeque::from([start / n]);
            while let Some(t) = queue.pop_front() {
                let here = deck[t * n + c].clone().unwrap_or_default();
                for side in [c, (c + n - 1) % n] {
                    let u = complex.neighbor(t, side);
                    if deck[u * n + c].is_none() {
                        let w = match letter_of(t, side) {
                            Some(l) => Word::letter(l).then(&here),
                            None => here.clone(),
                        };
                        deck[u * n + c] = Some(w);
                        queue.push_back(u);
                    }
                }
            }
        }
        let (edge_of, edges) = complex.side_edges();
        let mut decks = vec![Word::identity(); 2 * edges];
        let mut done = vec![false; edges];
        for i in 0..deck.len() {
            let e = edge_of[i];
            if done[e] {
                continue;
            }
            done[e] = true;
            let (t, k) = (i / n, i % n);
            let from = deck[i].clone().unwrap_or_default();
            let to = deck[t * n + (k + 1) % n].clone().unwrap_or_default();
            let w = from.inverse().then(&to);
            decks[2 * e + 1] = w.inverse();
            decks[2 * e] = w;
        }
        Ok(TiledSurface { surface: Arc::new(surface), graph: Arc::new(graph), complex, development, lifts, decks })
    }

    pub fn reference_map(&self) -> Result<crate::marked::MarkedMap> {
        crate::marked::MarkedMap::new(self.surface.clone(), self.graph.clone(), self.lifts.clone(), self.decks.clone())
    }
}

/// The genus-`g` surface glued from `4(g - 1)` right-angled hexagons whose
/// `d` sides have length `s` and `c` sides length `t(s)`.
pub fn build_hexagon_surface(g: usize, s: f64, m_c: f64, m_d: f64) -> Result<TiledSurface> {
    let t = trig::hexagon_partner_length(s)?;
    let hexagon = trig::symmetric_right_angled_hexagon(t)?;
    TiledSurface::new(TileComplex::hexagon_genus(g)?, &hexagon, &[("c", m_c), ("d", m_d)])
}

pub fn build_genus2_hexagon_surface(s: f64, m_c: f64, m_d: f64) -> Result<TiledSurface> {
    build_hexagon_surface(2, s, m_c, m_d)
}

/// The `(p, q, r)` triangle with corner 0 at angle `pi/p`, corner 1 at
/// `pi/q`, corner 2 at `pi/r`, counterclockwise about the origin.
pub fn prototype_triangle(p: u32, q: u32, r: u32) -> Result<(trig::Triangle, Vec<HPoint>)> {
    let angles = [PI / p as f64, PI / q as f64, PI / r as f64];
    let tri = trig::triangle_from_angles(angles[0], angles[1], angles[2])?;
    let (corners, gap) = trig::turtle_polygon(&[tri.sides[2], tri.sides[0], tri.sides[1]], &[angles[1], angles[2], angles[0]])?;
    if gap > 1e-9 {
        return Err(Error::NotRealizable("triangle (turtle walk does not close)"));
    }
    Ok((tri, trig::recentered(&corners)))
}

/// Klein's quartic tiled by 336 copies of the (2, 3, 7) triangle, with the
/// triangle-edge graph weighted by class (`1`, `2`, `3`).
pub fn build_klein_triangulation(weights: [f64; 3]) -> Result<TiledSurface> {
    let (_, triangle) = prototype_triangle(2, 3, 7)?;
    let complex = TileComplex::triangles(2, 3, 7, 336)?;
    TiledSurface::new(complex, &triangle, &[("1", weights[0]), ("2", weights[1]), ("3", weights[2])])
}

/// Tiles of the `(p, q, r)` reflection tiling of the plane out to a given
/// number of reflections from the prototype triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleTessellation {
    pub triangle: trig::Triangle,
    pub prototype: Vec<HPoint>,
    pub placements: Vec<Mat3>,
}

pub fn build_triangle_surface(p: u32, q: u32, r: u32, depth: usize) -> Result<TriangleTessellation> {
    TileComplex::triangles(p, q, r, 2)?;
    if depth > 24 {
        return Err(Error::OutOfRange { what: "tessellation depth", value: depth as f64 });
    }
    let (triangle, prototype) = prototype_triangle(p, q, r)?;
    let reflections: Vec<Mat3> =
        (0..3).map(|k| mat::reflection_through(&prototype[k].coords(), &prototype[(k + 1) % 3].coords())).collect();
    let mut placements = vec![mat::IDENTITY];
    let mut centers = vec![HPoint::origin()];
    let mut frontier = vec![mat::IDENTITY];
    for _ in 0..depth {
        let mut next = Vec::new();
        for w in &frontier {
            for r in &reflections {
                let m = mat::mul(w, r);
                let c = HPoint::from_raw_unchecked(mat::apply(&m, &[1.0, 0.0, 0.0]));
                if centers.iter().all(|x| hyp::dist(x, &c) > 1e-6) {
                    centers.push(c);
                    placements.push(m);
                    next.push(m);
                }
            }
        }
        frontier = next;
    }
    Ok(TriangleTessellation { triangle, prototype, placements })
}

impl TriangleTessellation {
    pub fn tile_corners(&self, tile: usize) -> Vec<HPoint> {
        self.prototype.iter().map(|p| HPoint::from_raw_unchecked(mat::apply(&self.placements[tile], &p.coords()))).collect()
    }
}

impl core::fmt::Display for Word {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let parts: Vec<alloc::string::String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn words_reduce_and_invert() {
        let w = Word::new(vec![1, 2, -2, 3]);
        assert_eq!(w.letters(), &[1, 3]);
        assert!(w.then(&w.inverse()).is_empty());
    }

    #[test]
    fn octagon_surface() {
        let s = build_regular_4g_surface(2).unwrap();
        assert_eq!(s.genus(), 2);
        assert_eq!(s.generators().len(), 4);
        let r = s.validate(1e-8).unwrap();
        assert_eq!(r.vertex_cycles.len(), 1);
        assert_eq!(r.vertex_cycles[0].corners.len(), 8);
        assert!((r.area.unwrap() - 4.0 * PI).abs() < 1e-10);
        let expect = 2.0 * libm::acosh(1.0 + libm::sqrt(2.0));
        for g in s.generators() {
            assert!((hyp::translation_length(g).unwrap() - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn regular_4g_for_higher_genus() {
        for g in 3..6 {
            let s = build_regular_4g_surface(g).unwrap();
            assert_eq!(s.genus(), g);
            // relator products amplify the rounding of the generators
            s.validate(if g < 5 { 1e-8 } else { 1e-6 }).unwrap();
        }
    }

    #[test]
    fn klein_fourteen_gon() {
        let s = build_klein_quartic().unwrap();
        assert_eq!(s.genus(), 3);
        let r = s.validate(1e-8).unwrap();
        assert_eq!(r.vertex_cycles.len(), 2);
        assert!(r.vertex_cycles.iter().all(|c| c.corners.len() == 7));
        assert!((r.area.unwrap() - 8.0 * PI).abs() < 1e-8);
    }

    #[test]
    fn genus_two_hexagons_develop() {
        let s = libm::log(2.0 + libm::sqrt(3.0));
        let tiled = build_genus2_hexagon_surface(s, 1.0, 1.0).unwrap();
        assert_eq!(tiled.surface.genus(), 2);
        tiled.surface.validate(1e-8).unwrap();
        let g = &tiled.graph;
        assert_eq!((g.vertex_count(), g.edge_count()), (6, 12));
    }

    #[test]
    fn random_points_fall_inside() {
        use rand::SeedableRng;
        let s = build_regular_4g_surface(2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            assert!(s.contains(&s.random_point(&mut rng)));
        }
        assert!(!s.contains(&HPoint::from_polar(3.0, 0.1)));
    }

    #[test]
    fn tessellation_grows_with_depth() {
        let t = build_triangle_surface(2, 3, 7, 4).unwrap();
        assert!(t.placements.len() > 10);
        assert!((t.triangle.area - PI / 42.0).abs() < 1e-12);
    }
}
