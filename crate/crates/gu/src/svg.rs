//! Poincare-disk pictures of a marked map.

use std::fmt::Write;

use gu_core::{HPoint, Isometry, MarkedMap};

#[derive(Clone, Debug)]
pub struct RenderOptions {
    /// Width and height in pixels.
    pub size: f64,
    /// How many generator letters deep to draw translates (0 draws only the
    /// fundamental domain).
    pub depth: usize,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { size: 800.0, depth: 1 }
    }
}

/// `(x1, x2) / (1 + x0)`.
pub fn to_disk(p: &HPoint) -> (f64, f64) {
    let c = p.coords();
    (c[1] / (1.0 + c[0]), c[2] / (1.0 + c[0]))
}

struct Canvas {
    out: String,
    center: f64,
    radius: f64,
}

impl Canvas {
    fn xy(&self, (u, v): (f64, f64)) -> (f64, f64) {
        (self.center + self.radius * u, self.center - self.radius * v)
    }

    /// SVG path data for the geodesic between two disk points: a straight
    /// segment through the center, otherwise an arc of the circle
    /// orthogonal to the boundary.
    fn geodesic(&self, a: (f64, f64), b: (f64, f64)) -> String {
        let (pa, pb) = (self.xy(a), self.xy(b));
        let det = a.0 * b.1 - a.1 * b.0;
        let scale = (a.0.hypot(a.1) * b.0.hypot(b.1)).max(1e-300);
        if det.abs() <= 1e-9 * scale {
            return format!("M{:.3} {:.3}L{:.3} {:.3}", pa.0, pa.1, pb.0, pb.1);
        }
        // center c with c.a = (1 + |a|^2) / 2 and the same for b
        let (ra, rb) = (0.5 * (1.0 + a.0 * a.0 + a.1 * a.1), 0.5 * (1.0 + b.0 * b.0 + b.1 * b.1));
        let c = ((ra * b.1 - rb * a.1) / det, (a.0 * rb - b.0 * ra) / det);
        let r = (c.0 * c.0 + c.1 * c.1 - 1.0).max(0.0).sqrt();
        let turn = (a.0 - c.0) * (b.1 - c.1) - (a.1 - c.1) * (b.0 - c.0);
        let sweep = if turn > 0.0 { 1 } else { 0 };
        let rr = r * self.radius;
        format!("M{:.3} {:.3}A{rr:.3} {rr:.3} 0 0 {sweep} {:.3} {:.3}", pa.0, pa.1, pb.0, pb.1)
    }

    fn path(&mut self, d: &str, style: &str) {
        let _ = writeln!(self.out, r#"<path d="{d}" {style}/>"#);
    }
}

/// Words of length at most `depth` in the generators, without immediate
/// cancellations. The identity comes first.
fn translates(map: &MarkedMap, depth: usize) -> Vec<Isometry> {
    let gens = map.surface().generators();
    let mut letters: Vec<(i32, Isometry)> = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        letters.push((i as i32 + 1, *g));
        letters.push((-(i as i32) - 1, g.inverse()));
    }
    let mut out = vec![Isometry::identity()];
    let mut frontier: Vec<(i32, Isometry)> = vec![(0, Isometry::identity())];
    for _ in 0..depth {
        let mut next = Vec::new();
        for (last, w) in &frontier {
            for (l, g) in &letters {
                if *l == -last {
                    continue;
                }
                let h = w.compose(g);
                out.push(h);
                next.push((*l, h));
            }
        }
        frontier = next;
    }
    out
}

pub fn render(map: &MarkedMap, opts: &RenderOptions) -> String {
    let size = opts.size;
    let mut cv = Canvas { out: String::new(), center: size / 2.0, radius: size / 2.0 - 10.0 };
    let _ = writeln!(cv.out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#);
    let _ = writeln!(
        cv.out,
        r#"<circle cx="{c}" cy="{c}" r="{r}" fill="white" stroke="black" stroke-width="1.5"/>"#,
        c = cv.center,
        r = cv.radius
    );
    let g = map.graph();
    let edges: Vec<(HPoint, HPoint)> = g.edges().map(|e| (map.lifts()[g.origin(e)], map.edge_end(e))).collect();
    let polygon: Vec<HPoint> = map.surface().polygon().map(|p| p.vertices.clone()).unwrap_or_default();
    let all = translates(map, opts.depth);
    // translates first so the fundamental domain is drawn on top
    for (k, h) in all.iter().enumerate().rev() {
        let home = k == 0;
        let (poly_style, edge_style) = if home {
            (r#"fill="none" stroke="black" stroke-width="1.2""#, r##"fill="none" stroke="#1f5fbf" stroke-width="2""##)
        } else {
            (r##"fill="none" stroke="#b0b0b0" stroke-width="0.6""##, r##"fill="none" stroke="#9bb8e6" stroke-width="0.8""##)
        };
        let n = polygon.len();
        for i in 0..n {
            let (a, b) = (to_disk(&h.apply(&polygon[i])), to_disk(&h.apply(&polygon[(i + 1) % n])));
            let d = cv.geodesic(a, b);
            cv.path(&d, poly_style);
        }
        for (p, q) in &edges {
            let d = cv.geodesic(to_disk(&h.apply(p)), to_disk(&h.apply(q)));
            cv.path(&d, edge_style);
        }
    }
    for p in map.lifts() {
        let (x, y) = cv.xy(to_disk(p));
        let _ = writeln!(cv.out, r##"<circle cx="{x:.3}" cy="{y:.3}" r="3.5" fill="#c0392b"/>"##);
    }
    cv.out.push_str("</svg>\n");
    cv.out
}
