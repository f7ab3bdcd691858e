//! Combinatorial tilings of closed surfaces by copies of a reflection
//! polygon.
//!
//! Every tile is a copy of one prototype polygon with `n` sides; corner `k`
//! sits between sides `k - 1` and `k` and has angle `pi / m_k`. Crossing side
//! `k` of a tile lands in the neighbouring tile across its own side `k`, as
//! for the tiles of a reflection group. The surface is then a quotient of the
//! plane tiling, and everything about it is encoded in the neighbour table.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{EdgeSpec, WeightedGraph};

#[derive(Clone, Debug, PartialEq)]
pub struct TileComplex {
    sides: usize,
    corner_orders: Vec<u32>,
    neighbors: Vec<usize>,
    side_classes: Vec<String>,
}

impl TileComplex {
    pub fn new(corner_orders: Vec<u32>, neighbors: Vec<usize>, side_classes: Vec<String>) -> Result<Self> {
        let n = corner_orders.len();
        if n < 3 || side_classes.len() != n || neighbors.is_empty() || !neighbors.len().is_multiple_of(n) {
            return Err(Error::Tiling("table sizes do not match the side count".into()));
        }
        if corner_orders.iter().any(|&m| m < 2) {
            return Err(Error::Tiling("corner orders must be at least 2".into()));
        }
        let tiles = neighbors.len() / n;
        for t in 0..tiles {
            for k in 0..n {
                let u = neighbors[t * n + k];
                if u >= tiles || neighbors[u * n + k] != t {
                    return Err(Error::Tiling(format!("crossing side {k} of tile {t} is not an involution")));
                }
                if u == t {
                    return Err(Error::Tiling(format!("side {k} of tile {t} is glued to itself")));
                }
            }
        }
        Ok(TileComplex { sides: n, corner_orders, neighbors, side_classes })
    }

    /// Genus-`g` surface from `4(g - 1)` right-angled hexagons. Tiles are
    /// indexed `4i + 2p + h` for pants pair `i`, pants `p` (P or P') and
    /// hexagon `h` (H or its mirror). Sides `c1 d1 c2 d2 c3 d3` are 0..6.
    /// The `d` sides glue the two hexagons of a pair of pants; `c1`, `c2` glue
    /// P_i to P'_i and `c3` glues P_i to P'_{i-1}.
    pub fn hexagon_genus(g: usize) -> Result<Self> {
        if g < 2 {
            return Err(Error::OutOfRange { what: "genus", value: g as f64 });
        }
        let pairs = g - 1;
        let idx = |i: usize, p: usize, h: usize| 4 * i + 2 * p + h;
        let mut nb = vec![0; 4 * pairs * 6];
        for i in 0..pairs {
            for p in 0..2 {
                for h in 0..2 {
                    let t = idx(i, p, h);
                    for k in 0..6 {
                        nb[t * 6 + k] = match k {
                            1 | 3 | 5 => idx(i, p, 1 - h),
                            0 | 2 => idx(i, 1 - p, h),
                            _ if p == 0 => idx((i + pairs - 1) % pairs, 1, h),
                            _ => idx((i + 1) % pairs, 0, h),
                        };
                    }
                }
            }
        }
        let classes = ["c", "d", "c", "d", "c", "d"].iter().map(|s| String::from(*s)).collect();
        Self::new(vec![2; 6], nb, classes)
    }

    /// `(p, q, r)` triangles; corner 0 has angle `pi/p`, corner 1 `pi/q` and
    /// corner 2 `pi/r`. Side classes name the opposite corner: side 1 is class
    /// `1`, side 2 class `2`, side 0 class `3`.
    pub fn triangles(p: u32, q: u32, r: u32, copies: usize) -> Result<Self> {
        if !crate::trig::is_hyperbolic_triple(p, q, r) {
            return Err(Error::NotRealizable("triangle group with 1/p + 1/q + 1/r >= 1"));
        }
        let classes = ["3", "1", "2"].iter().map(|s| String::from(*s)).collect();
        let neighbors = match copies {
            2 => vec![1, 1, 1, 0, 0, 0],
            336 if (p, q, r) == (2, 3, 7) => pgl27::klein_neighbors(),
            _ => {
                return Err(Error::Unsupported(format!(
                    "{copies} copies of the ({p}, {q}, {r}) triangle; only 2 (orbifold) or 336 for (2, 3, 7)"
                )))
            }
        };
        Self::new(vec![p, q, r], neighbors, classes)
    }

    pub fn side_count(&self) -> usize {
        self.sides
    }

    pub fn tile_count(&self) -> usize {
        self.neighbors.len() / self.sides
    }

    pub fn corner_order(&self, k: usize) -> u32 {
        self.corner_orders[k]
    }

    pub fn side_class(&self, k: usize) -> &str {
        &self.side_classes[k]
    }

    pub fn neighbor(&self, tile: usize, side: usize) -> usize {
        self.neighbors[tile * self.sides + side]
    }

    fn prev(&self, k: usize) -> usize {
        (k + self.sides - 1) % self.sides
    }

    /// Number of alternating crossings of the two sides at `corner` needed
    /// to return to `tile`.
    pub fn corner_period(&self, tile: usize, corner: usize) -> usize {
        let sides = [corner, self.prev(corner)];
        let mut t = tile;
        let mut steps = 0;
        loop {
            t = self.neighbor(t, sides[steps % 2]);
            steps += 1;
            if t == tile && steps % 2 == 0 {
                return steps;
            }
        }
    }

    /// True when the tiles around every corner close up after exactly
    /// `2 m_k` of them, so the surface has no cone points.
    pub fn is_free(&self) -> bool {
        (0..self.tile_count()).all(|t| (0..self.sides).all(|k| self.corner_period(t, k) == 2 * self.corner_orders[k] as usize))
    }

    /// A two-colouring of the tiles with neighbours of opposite colour, if
    /// one exists (the surface is then orientable).
    pub fn orientation(&self) -> Option<Vec<bool>> {
        let n = self.tile_count();
        let mut color: Vec<Option<bool>> = vec![None; n];
        color[0] = Some(true);
        let mut queue = VecDeque::from([0usize]);
        while let Some(t) = queue.pop_front() {
            let c = color[t].unwrap_or(true);
            for k in 0..self.sides {
                let u = self.neighbor(t, k);
                match color[u] {
                    None => {
                        color[u] = Some(!c);
                        queue.push_back(u);
                    }
                    Some(cu) if cu == c => return None,
                    _ => {}
                }
            }
        }
        color.into_iter().collect()
    }

    /// Classes of corners `(tile, k)` under the crossings at corner `k`.
    /// Returns the class index of every corner (indexed `tile * n + k`) and
    /// the number of classes, numbered by smallest member.
    pub fn corner_classes(&self) -> (Vec<usize>, usize) {
        let n = self.sides;
        let mut class = vec![usize::MAX; self.neighbors.len()];
        let mut count = 0;
        for start in 0..self.neighbors.len() {
            if class[start] != usize::MAX {
                continue;
            }
            let k = start % n;
            let mut queue = VecDeque::from([start / n]);
            class[start] = count;
            while let Some(t) = queue.pop_front() {
                for side in [k, self.prev(k)] {
                    let u = self.neighbor(t, side);
                    if class[u * n + k] == usize::MAX {
                        class[u * n + k] = count;
                        queue.push_back(u);
                    }
                }
            }
            count += 1;
        }
        (class, count)
    }

    /// Edge index of every side `(tile, k)`; both copies of a glued side
    /// share it and run the same way, from corner `k` to corner `k + 1`.
    /// Edges are numbered by their smaller member.
    pub fn side_edges(&self) -> (Vec<usize>, usize) {
        let n = self.sides;
        let mut edge = vec![usize::MAX; self.neighbors.len()];
        let mut count = 0;
        for i in 0..self.neighbors.len() {
            if edge[i] == usize::MAX {
                let (t, k) = (i / n, i % n);
                edge[i] = count;
                edge[self.neighbor(t, k) * n + k] = count;
                count += 1;
            }
        }
        (edge, count)
    }

    /// The one-skeleton: corner classes joined by side classes, unit weights
    /// and each edge labelled by its side class.
    pub fn graph(&self) -> Result<WeightedGraph> {
        let n = self.sides;
        let (corner, vertices) = self.corner_classes();
        let (edge, count) = self.side_edges();
        let mut specs: Vec<Option<EdgeSpec>> = vec![None; count];
        for i in 0..self.neighbors.len() {
            if specs[edge[i]].is_none() {
                let (t, k) = (i / n, i % n);
                let spec = EdgeSpec::new(corner[i], corner[t * n + (k + 1) % n], 1.0).with_class(&self.side_classes[k]);
                specs[edge[i]] = Some(spec);
            }
        }
        let specs: Vec<EdgeSpec> = specs.into_iter().flatten().collect();
        Ok(WeightedGraph::from_edges(vertices, &specs)?)
    }

    pub fn euler_characteristic(&self) -> i64 {
        let (_, v) = self.corner_classes();
        let (_, e) = self.side_edges();
        v as i64 - e as i64 + self.tile_count() as i64
    }
}

/// The group PGL(2, 7), order 336, realized as the full symmetry group of
/// the (2, 3, 7) tiling of Klein's quartic.
mod pgl27 {
    use alloc::collections::VecDeque;
    use alloc::vec;
    use alloc::vec::Vec;

    type M = [u8; 4];
    const P: u8 = 7;

    fn inv(a: u8) -> u8 {
        (1..P).find(|x| (x * a) % P == 1).unwrap_or(0)
    }

    fn normalize(m: [u8; 4]) -> M {
        let lead = m.iter().copied().find(|&x| x != 0).unwrap_or(1);
        let k = inv(lead);
        [m[0] * k % P, m[1] * k % P, m[2] * k % P, m[3] * k % P]
    }

    fn mul(a: &M, b: &M) -> M {
        let f = |x: u8, y: u8, z: u8, w: u8| ((x as u16 * y as u16 + z as u16 * w as u16) % P as u16) as u8;
        normalize([f(a[0], b[0], a[1], b[2]), f(a[0], b[1], a[1], b[3]), f(a[2], b[0], a[3], b[2]), f(a[2], b[1], a[3], b[3])])
    }

    fn det(a: &M) -> u8 {
        ((a[0] as u16 * a[3] as u16 + (P as u16 - (a[1] as u16 * a[2] as u16) % P as u16)) % P as u16) as u8
    }

    fn key(a: &M) -> usize {
        a.iter().fold(0, |acc, &x| acc * P as usize + x as usize)
    }

    const ID: M = [1, 0, 0, 1];

    fn order(a: &M) -> usize {
        let mut x = *a;
        let mut k = 1;
        while x != ID {
            x = mul(&x, a);
            k += 1;
        }
        k
    }

    fn elements() -> Vec<M> {
        let mut out = Vec::new();
        let mut seen = vec![false; 2401];
        for i in 0..2401usize {
            let m = [(i / 343) as u8, (i / 49 % 7) as u8, (i / 7 % 7) as u8, (i % 7) as u8];
            if det(&m) == 0 {
                continue;
            }
            let n = normalize(m);
            if !seen[key(&n)] {
                seen[key(&n)] = true;
                out.push(n);
            }
        }
        out
    }

    fn generated(gens: &[M]) -> usize {
        let mut seen = vec![false; 2401];
        let mut queue = VecDeque::from([ID]);
        seen[key(&ID)] = true;
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for g in gens {
                let y = mul(&x, g);
                if !seen[key(&y)] {
                    seen[key(&y)] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        count
    }

    /// Neighbour table of the 336 triangles: crossing side `k` of tile `x`
    /// is right multiplication by the involution `rho_k`, where
    /// `rho_2 rho_0`, `rho_0 rho_1`, `rho_1 rho_2` have orders 2, 3, 7.
    pub(super) fn klein_neighbors() -> Vec<usize> {
        let all = elements();
        let mut index = vec![usize::MAX; 2401];
        for (i, m) in all.iter().enumerate() {
            index[key(m)] = i;
        }
        // non-squares mod 7 are 3, 5, 6; such involutions reverse orientation
        let flips: Vec<M> = all.iter().copied().filter(|m| *m != ID && mul(m, m) == ID && matches!(det(m), 3 | 5 | 6)).collect();
        let mut rho = None;
        'search: for a in &flips {
            for b in &flips {
                if order(&mul(a, b)) != 3 {
                    continue;
                }
                for c in &flips {
                    if order(&mul(c, a)) == 2 && order(&mul(b, c)) == 7 && generated(&[*a, *b, *c]) == all.len() {
                        rho = Some([*a, *b, *c]);
                        break 'search;
                    }
                }
            }
        }
        let rho = rho.expect("PGL(2,7) contains a (2,3,7) reflection triple");
        let mut nb = Vec::with_capacity(all.len() * 3);
        for x in &all {
            for r in &rho {
                nb.push(index[key(&mul(x, r))]);
            }
        }
        nb
    }

}
