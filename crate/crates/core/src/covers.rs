//! Ramified covers of flat cone spheres by flat tori.
//!
//! The total torus lives in the plane as `R²/Λ`. Each sheet is a copy of the
//! developed base, moved by a power of the deck rotation about a developed
//! cone point.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Affine2, ConvexPolygon, Mat2, Vec2};
use crate::lattice::Lattice;
use crate::loops::{ChartSegment, Crossing, SurfaceLoop};
use crate::surface::{ConeSurface, GluingSpec, SurfaceDescription, SurfacePoint};

/// Distance below which a loop counts as hitting a ramification point.
pub const COLLISION_TOL: f64 = 1e-9;
const ANGLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RamificationPoint {
    /// Plane position, reduced into the fundamental parallelogram.
    pub position: Vec2,
    pub base_class: usize,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sheet {
    pub index: usize,
    pub base_polygon: usize,
    /// Base chart to plane.
    pub map: Affine2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Preimage {
    pub position: Vec2,
    pub multiplicity: usize,
}

#[derive(Debug, Clone)]
pub struct RamifiedCover {
    base: ConeSurface,
    total: ConeSurface,
    degree: usize,
    lattice: Lattice,
    deck: Affine2,
    sheets: Vec<Sheet>,
    sheet_polygons: Vec<ConvexPolygon>,
    inverse_maps: Vec<Affine2>,
    ramification: Vec<RamificationPoint>,
}

/// Sidecar describing the cover maps next to the total surface file.
#[derive(Debug, Clone, Serialize)]
pub struct CoverSidecar {
    pub degree: usize,
    pub lattice: [Vec2; 2],
    pub deck: Affine2,
    pub sheets: Vec<Sheet>,
    pub ramification_points: Vec<RamificationPoint>,
}

/// Degree-3 cover of a doubled equilateral triangle.
pub fn build_degree3_cover(base: &ConeSurface) -> Result<RamifiedCover> {
    let polys = base.polygons();
    let doubled = polys.len() == 2
        && polys.iter().all(|p| p.len() == 3)
        && (0..3).all(|i| base.partner(0, i).polygon == 1);
    if !doubled || base.euler_characteristic() != 2 {
        return Err(Error::UnsupportedBase("degree-3 covers need two triangles glued along their boundary".into()));
    }
    check_cone_points(base, 3, 2.0 * PI / 3.0)?;
    RamifiedCover::build(base, 3)
}

/// Degree-2 cover of a sphere with four cone points of angle π.
pub fn build_degree2_cover(base: &ConeSurface) -> Result<RamifiedCover> {
    if base.euler_characteristic() != 2 {
        return Err(Error::UnsupportedBase("degree-2 covers need a sphere".into()));
    }
    check_cone_points(base, 4, PI)?;
    RamifiedCover::build(base, 2)
}

/// A flat torus as a degree-1 cover of itself: its developing map, holonomy
/// lattice and the developed positions of its vertex classes.
pub fn develop_flat_torus(base: &ConeSurface) -> Result<RamifiedCover> {
    if base.euler_characteristic() != 0 {
        return Err(Error::UnsupportedBase("flat torus route needs genus one".into()));
    }
    if base.vertex_classes().iter().any(|c| (c.angle - 2.0 * PI).abs() > ANGLE_TOL) {
        return Err(Error::UnsupportedBase("torus has a cone point".into()));
    }
    let (dev, _) = base.develop();
    for (p, poly) in base.polygons().iter().enumerate() {
        for i in 0..poly.len() {
            let q = base.partner(p, i).polygon;
            let map = base.transition(p, i);
            let hol = dev[q].compose(map).compose(&dev[p].inverse().expect("isometry"));
            let l = hol.lin;
            if (l.a - 1.0).abs() + l.b.abs() + l.c.abs() + (l.d - 1.0).abs() > 1e-9 {
                return Err(Error::UnsupportedBase("torus holonomy is not a translation".into()));
            }
        }
    }
    RamifiedCover::build(base, 1)
}

fn check_cone_points(base: &ConeSurface, count: usize, angle: f64) -> Result<()> {
    let classes = base.vertex_classes();
    if classes.len() != count || classes.iter().any(|c| (c.angle - angle).abs() > ANGLE_TOL) {
        return Err(Error::UnsupportedBase(format!(
            "expected {count} vertex classes of angle {angle:.6}, found angles {:?}",
            classes.iter().map(|c| c.angle).collect::<Vec<_>>()
        )));
    }
    if let Some(c) = (0..count).find(|&c| !base.is_marked_class(c)) {
        return Err(Error::UnsupportedBase(format!("cone point class {c} is not marked")));
    }
    Ok(())
}

fn gcd_ext(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a.abs(), a.signum(), 0)
    } else {
        let (g, s, t) = gcd_ext(b, a.rem_euclid(b));
        (g, t, s - a.div_euclid(b) * t)
    }
}

/// Basis of the lattice generated by `vecs`, assuming they are rational
/// combinations with small denominators of two of them.
pub fn lattice_from_generators(vecs: &[Vec2]) -> Option<[Vec2; 2]> {
    let (mut best, mut pair) = (0.0, (0, 0));
    for i in 0..vecs.len() {
        for j in i + 1..vecs.len() {
            let d = vecs[i].cross(vecs[j]).abs();
            if d > best {
                best = d;
                pair = (i, j);
            }
        }
    }
    if best <= 1e-12 {
        return None;
    }
    let (r1, r2) = (vecs[pair.0], vecs[pair.1]);
    let det = r1.cross(r2);
    let coords: Vec<(f64, f64)> = vecs.iter().map(|v| (v.cross(r2) / det, r1.cross(*v) / det)).collect();
    let denom = (1..=64i64).find(|&d| {
        coords.iter().all(|&(a, b)| {
            let (x, y) = (a * d as f64, b * d as f64);
            (x - x.round()).abs() < 1e-6 && (y - y.round()).abs() < 1e-6
        })
    })?;
    // Hermite form of the integer generators: b1 = (a, b), b2 = (0, e)
    let (mut a, mut b, mut e) = (0i64, 0i64, 0i64);
    for &(x, y) in &coords {
        let (x, y) = ((x * denom as f64).round() as i64, (y * denom as f64).round() as i64);
        if x == 0 && a == 0 {
            e = gcd_ext(e, y).0;
            continue;
        }
        let (g, s, t) = gcd_ext(a, x);
        let nb = s * b + t * y;
        let leftover = (x / g) * b - (a / g) * y;
        a = g;
        b = nb;
        e = gcd_ext(e, leftover).0;
    }
    if a == 0 || e == 0 {
        return None;
    }
    let to_plane = |cx: i64, cy: i64| (r1 * cx as f64 + r2 * cy as f64) * (1.0 / denom as f64);
    Some([to_plane(a, b), to_plane(0, e)])
}

impl RamifiedCover {
    fn build(base: &ConeSurface, degree: usize) -> Result<RamifiedCover> {
        let (dev, _) = base.develop();
        let center = dev[0].apply(base.polygon(0).vertex(0));
        let deck = Affine2::rotation_about(center, 2.0 * PI / degree as f64);
        if !base.norm().is_preserved_by(&deck.lin, 1e-9) {
            return Err(Error::NormCompatibility(format!(
                "the order-{degree} deck rotation does not preserve the unit ball"
            )));
        }
        let mut sheets = Vec::new();
        for m in 0..degree {
            let power = deck.pow(m);
            for (p, d) in dev.iter().enumerate() {
                sheets.push(Sheet { index: m, base_polygon: p, map: power.compose(d) });
            }
        }
        let sheet_polygons: Vec<ConvexPolygon> = sheets
            .iter()
            .map(|s| base.polygon(s.base_polygon).transformed(&s.map))
            .collect::<Result<_>>()?;
        let inverse_maps: Vec<Affine2> =
            sheets.iter().map(|s| s.map.inverse().expect("sheet maps are invertible")).collect();

        // lattice from differences of developed copies of each cone point
        let classes = base.vertex_classes();
        let mut generators = Vec::new();
        let mut copies: Vec<Vec<Vec2>> = vec![Vec::new(); classes.len()];
        for s in &sheets {
            let poly = base.polygon(s.base_polygon);
            for i in 0..poly.len() {
                copies[base.corner_class(s.base_polygon, i)].push(s.map.apply(poly.vertex(i)));
            }
        }
        for list in &copies {
            for q in &list[1..] {
                let d = *q - list[0];
                if d.length() > 1e-9 {
                    generators.push(d);
                }
            }
        }
        let [b1, b2] = lattice_from_generators(&generators)
            .ok_or_else(|| Error::UnsupportedBase("cone point copies do not generate a lattice".into()))?;
        let (b1, b2) = if b1.cross(b2) < 0.0 { (b2, b1) } else { (b1, b2) };
        let lattice = Lattice::new(b1, b2)?;
        let expected = degree as f64 * base.euclidean_area();
        if (lattice.covolume() - expected).abs() > 1e-9 * expected.max(1.0) {
            return Err(Error::UnsupportedBase(format!(
                "cover lattice covolume {} differs from {expected}",
                lattice.covolume()
            )));
        }
        let ramification = copies
            .iter()
            .enumerate()
            .map(|(c, list)| RamificationPoint {
                position: lattice.reduce(list[0]),
                base_class: c,
                multiplicity: degree,
            })
            .collect();

        let mut cover = RamifiedCover {
            base: base.clone(),
            total: base.clone(),
            degree,
            lattice,
            deck,
            sheets,
            sheet_polygons,
            inverse_maps,
            ramification,
        };
        cover.total = cover.total_description()?.build()?;
        Ok(cover)
    }

    fn total_description(&self) -> Result<SurfaceDescription> {
        let mut gluings = Vec::new();
        let n = self.sheets.len();
        let per_sheet = self.base.polygons().len();
        for k in 0..n {
            let p = self.sheets[k].base_polygon;
            for i in 0..self.sheet_polygons[k].len() {
                let target = self.base.partner(p, i);
                let (a, b) = self.sheet_polygons[k].edge(i);
                let mut found = None;
                for m in 0..self.degree {
                    let k2 = m * per_sheet + target.polygon;
                    let (c, d) = self.sheet_polygons[k2].edge(target.edge);
                    let t = d - a;
                    let lp = self.lattice.point(self.lattice.round(t));
                    if lp.dist(t) < 1e-9 && (c - t).dist(b) < 1e-9 {
                        found = Some(k2);
                        break;
                    }
                }
                let k2 = found.ok_or_else(|| {
                    Error::Invariant(format!("no sheet edge matches sheet polygon {k} edge {i}"))
                })?;
                if (k, i) < (k2, target.edge) {
                    gluings.push(GluingSpec { a: [k, i], b: [k2, target.edge], linear: None });
                }
            }
        }
        let mut marked_points = Vec::new();
        let mut seen = vec![false; self.base.vertex_classes().len()];
        for (k, s) in self.sheets.iter().enumerate() {
            let poly = &self.sheet_polygons[k];
            for i in 0..poly.len() {
                let c = self.base.corner_class(s.base_polygon, i);
                if !seen[c] {
                    seen[c] = true;
                    marked_points.push(SurfacePoint { polygon: k, point: poly.vertex(i) });
                }
            }
        }
        let desc = self.base.description();
        Ok(SurfaceDescription {
            label: format!("{}_cover{}", desc.label, self.degree),
            metric_class: desc.metric_class,
            norm: desc.norm.clone(),
            polygons: self.sheet_polygons.iter().map(|p| p.vertices().to_vec()).collect(),
            gluings,
            marked_points,
        })
    }

    pub fn base(&self) -> &ConeSurface {
        &self.base
    }
    pub fn total(&self) -> &ConeSurface {
        &self.total
    }
    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }
    pub fn deck(&self) -> &Affine2 {
        &self.deck
    }
    pub fn sheets(&self) -> &[Sheet] {
        &self.sheets
    }
    pub fn sheet_polygons(&self) -> &[ConvexPolygon] {
        &self.sheet_polygons
    }
    pub fn ramification_points(&self) -> &[RamificationPoint] {
        &self.ramification
    }

    pub fn sidecar(&self) -> CoverSidecar {
        CoverSidecar {
            degree: self.degree,
            lattice: self.lattice.basis(),
            deck: self.deck,
            sheets: self.sheets.clone(),
            ramification_points: self.ramification.clone(),
        }
    }

    /// Whether two plane points agree modulo the lattice.
    pub fn same_torus_point(&self, a: Vec2, b: Vec2, tol: f64) -> bool {
        let d = b - a;
        (d - self.lattice.point(self.lattice.round(d))).length() <= tol
    }

    /// Torus distance in the Euclidean metric of the plane.
    pub fn torus_gap(&self, a: Vec2, b: Vec2) -> f64 {
        crate::lattice::flat_torus_distance(&self.lattice, &crate::geometry::Norm::Euclidean, a, b)
    }

    /// Base location of a plane point.
    pub fn project_point(&self, z: Vec2) -> Option<SurfacePoint> {
        let z0 = self.lattice.reduce(z);
        let [r1, r2] = self.lattice.reduced();
        let mut best: Option<(f64, SurfacePoint)> = None;
        for i in -2..=2 {
            for j in -2..=2 {
                let w = z0 + r1 * i as f64 + r2 * j as f64;
                for (k, poly) in self.sheet_polygons.iter().enumerate() {
                    let depth = poly.depth(w);
                    if depth >= -1e-9 && best.is_none_or(|(d, _)| depth > d) {
                        let point = self.inverse_maps[k].apply(w);
                        best = Some((depth, SurfacePoint { polygon: self.sheets[k].base_polygon, point }));
                    }
                }
            }
        }
        best.map(|(_, p)| p)
    }

    /// Preimages of a base point, with multiplicities.
    pub fn lift_point(&self, x: SurfacePoint) -> Vec<Preimage> {
        let mut out: Vec<Preimage> = Vec::new();
        for (k, s) in self.sheets.iter().enumerate() {
            if s.base_polygon != x.polygon {
                continue;
            }
            let z = self.lattice.reduce(self.sheets[k].map.apply(x.point));
            match out.iter_mut().find(|p| self.same_torus_point(p.position, z, 1e-9)) {
                Some(p) => p.multiplicity += 1,
                None => out.push(Preimage { position: z, multiplicity: 1 }),
            }
        }
        out
    }

    /// Fixed points of the deck map on the torus.
    pub fn deck_fixed_points(&self) -> Vec<Vec2> {
        let l = self.deck.lin;
        let i_minus = Mat2::new(1.0 - l.a, -l.b, -l.c, 1.0 - l.d);
        let inv = i_minus.inverse().expect("deck rotation has isolated fixed points");
        let mut out: Vec<Vec2> = Vec::new();
        for c1 in -4..=4 {
            for c2 in -4..=4 {
                let z = inv.apply(self.deck.t - self.lattice.point([c1, c2]));
                let z = self.lattice.reduce(z);
                if !out.iter().any(|&w| self.same_torus_point(w, z, 1e-9)) {
                    out.push(z);
                }
            }
        }
        out
    }

    /// Sample points spread over the sheets, at least `count` in total.
    pub fn sample_points(&self, count: usize) -> Vec<Vec2> {
        let per = (count as f64 / self.sheet_polygons.len() as f64).ceil() as usize;
        let side = ((per as f64) * 2.0).sqrt().ceil() as usize + 1;
        let mut out = Vec::new();
        for poly in &self.sheet_polygons {
            let a = poly.vertex(0);
            let mut taken = 0;
            for i in 1..poly.len() - 1 {
                let (b, c) = (poly.vertex(i), poly.vertex(i + 1));
                for u in 0..side {
                    for w in 0..side - u {
                        let s = (u as f64 + 1.0 / 3.0) / side as f64;
                        let t = (w as f64 + 1.0 / 3.0) / side as f64;
                        out.push(a + (b - a) * s + (c - a) * t);
                        taken += 1;
                    }
                }
            }
            debug_assert!(taken >= per);
        }
        out
    }

    /// Maximum deviations of `ρ^d = id` and `π∘ρ = π` over the samples.
    pub fn check_identities(&self, samples: &[Vec2]) -> CoverIdentityCheck {
        let full = self.deck.pow(self.degree);
        let mut order_err: f64 = 0.0;
        let mut proj_err: f64 = 0.0;
        for &z in samples {
            order_err = order_err.max(self.torus_gap(full.apply(z), z));
            let a = self.project_point(z).expect("sample lies in the torus");
            let b = self.project_point(self.deck.apply(z)).expect("image lies in the torus");
            let gap = if self.base.same_point(a, b, 1e-9) { 0.0 } else { self.base_gap(a, b) };
            proj_err = proj_err.max(gap);
        }
        let lattice_invariant = self.lattice.basis().iter().all(|&b| {
            let img = self.deck.lin.apply(b);
            self.same_torus_point(img, Vec2::ZERO, 1e-9)
        });
        CoverIdentityCheck { samples: samples.len(), order_error: order_err, projection_error: proj_err, lattice_invariant }
    }

    fn base_gap(&self, a: SurfacePoint, b: SurfacePoint) -> f64 {
        if a.polygon == b.polygon {
            a.point.dist(b.point)
        } else {
            f64::INFINITY
        }
    }

    /// `χ(total)` predicted from the base and the ramification data.
    pub fn riemann_hurwitz(&self) -> i64 {
        self.degree as i64 * self.base.euler_characteristic()
            - self.ramification.iter().map(|r| r.multiplicity as i64 - 1).sum::<i64>()
    }

    /// Pushes a closed plane polyline (last vertex equal to the first modulo
    /// the lattice) down to base chart segments.
    pub fn project_loop(&self, vertices: &[Vec2]) -> Result<Vec<ChartSegment>> {
        if vertices.len() < 2 {
            return Ok(Vec::new());
        }
        let first = vertices[0];
        let last = *vertices.last().expect("nonempty");
        if !self.same_torus_point(first, last, 1e-9) {
            return Err(Error::Invariant("polyline is not closed on the torus".into()));
        }
        let mut out = Vec::new();
        for w in vertices.windows(2) {
            let (a, b) = (w[0], w[1]);
            self.check_collision(a, b)?;
            out.extend(self.project_segment(a, b)?);
        }
        Ok(out)
    }

    /// Like `project_loop`, but the polyline may pass through ramification
    /// points (degenerate loops between marked points).
    pub fn project_path(&self, vertices: &[Vec2]) -> Result<Vec<ChartSegment>> {
        let mut out = Vec::new();
        for w in vertices.windows(2) {
            out.extend(self.project_segment(w[0], w[1])?);
        }
        Ok(out)
    }

    fn check_collision(&self, a: Vec2, b: Vec2) -> Result<()> {
        let d = b - a;
        let span = d.length();
        for r in &self.ramification {
            for (c1, c2) in lattice_window(&self.lattice, a, b) {
                let x = r.position + self.lattice.point([c1, c2]);
                let s = if span > 0.0 { ((x - a).dot(d) / (span * span)).clamp(0.0, 1.0) } else { 0.0 };
                if (a + d * s).dist(x) <= COLLISION_TOL {
                    return Err(Error::RamificationCollision(format!(
                        "segment passes through the preimage of vertex class {}",
                        r.base_class
                    )));
                }
            }
        }
        Ok(())
    }

    fn project_segment(&self, a: Vec2, b: Vec2) -> Result<Vec<ChartSegment>> {
        if a.dist(b) == 0.0 {
            let p = self.project_point(a).ok_or_else(|| Error::Invariant("point outside the torus".into()))?;
            return Ok(vec![ChartSegment { polygon: p.polygon, start: p.point, end: p.point }]);
        }
        let mut pieces: Vec<(f64, f64, usize, [i64; 2])> = Vec::new();
        for (c1, c2) in lattice_window(&self.lattice, a, b) {
            let t = self.lattice.point([c1, c2]);
            for (k, poly) in self.sheet_polygons.iter().enumerate() {
                if let Some((s0, s1)) = poly.clip_segment(a - t, b - t) {
                    if s1 - s0 > 1e-12 {
                        pieces.push((s0, s1, k, [c1, c2]));
                    }
                }
            }
        }
        pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
        // a segment running along a glued edge is clipped by both sides
        let mut covered = 0.0;
        let mut kept = Vec::with_capacity(pieces.len());
        for p in pieces {
            if p.0 > covered + 1e-9 {
                return Err(Error::Invariant(format!("projection leaves a gap at parameter {covered}")));
            }
            if p.1 > covered + 1e-9 {
                covered = p.1;
                kept.push(p);
            }
        }
        let pieces = kept;
        if covered < 1.0 - 1e-9 {
            return Err(Error::Invariant("projection does not cover the segment".into()));
        }
        let d = b - a;
        Ok(pieces
            .into_iter()
            .map(|(s0, s1, k, c)| {
                let t = self.lattice.point(c);
                let inv = &self.inverse_maps[k];
                ChartSegment {
                    polygon: self.sheets[k].base_polygon,
                    start: inv.apply(a + d * s0 - t),
                    end: inv.apply(a + d * s1 - t),
                }
            })
            .collect())
    }
}

/// Lattice translates whose fundamental-domain copies may meet segment `a→b`.
fn lattice_window(lat: &Lattice, a: Vec2, b: Vec2) -> Vec<(i64, i64)> {
    let [r1, r2] = lat.reduced();
    let reach = a.length().max(b.length()) + r1.length() + r2.length();
    let det = r1.cross(r2).abs();
    let n1 = (reach * r2.length() / det).ceil() as i64 + 3;
    let n2 = (reach * r1.length() / det).ceil() as i64 + 3;
    let [b1, b2] = lat.basis();
    let mut out = Vec::new();
    for i in -n1..=n1 {
        for j in -n2..=n2 {
            let t = r1 * i as f64 + r2 * j as f64;
            // keep translates near the segment
            let mid = (a + b) * 0.5;
            if (t - mid).length() <= reach + (b - a).length() {
                let det_b = b1.cross(b2);
                let c1 = (t.cross(b2) / det_b).round() as i64;
                let c2 = (b1.cross(t) / det_b).round() as i64;
                out.push((c1, c2));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverIdentityCheck {
    pub samples: usize,
    pub order_error: f64,
    pub projection_error: f64,
    pub lattice_invariant: bool,
}

impl CoverIdentityCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.order_error <= tol && self.projection_error <= tol && self.lattice_invariant
    }
}

/// Crossing sequence of projected base segments. Consecutive pieces in
/// different polygons meet on a glued edge.
pub fn segments_to_loop(base: &ConeSurface, segs: &[ChartSegment]) -> Result<SurfaceLoop> {
    let mut crossings = Vec::new();
    let n = segs.len();
    for k in 0..n {
        let cur = segs[k];
        let next = segs[(k + 1) % n];
        if cur.polygon == next.polygon && cur.end.dist(next.start) < 1e-9 {
            continue;
        }
        let poly = base.polygon(cur.polygon);
        let edge = (0..poly.len())
            .find(|&i| {
                let (a, b) = poly.edge(i);
                let off = ((b - a).cross(cur.end - a) / (b - a).length()).abs();
                off < 1e-9
                    && base.partner(cur.polygon, i).polygon == next.polygon
                    && base.transition(cur.polygon, i).apply(cur.end).dist(next.start) < 1e-9
            })
            .ok_or_else(|| Error::Invariant(format!("projected pieces {k} and {} do not meet on an edge", (k + 1) % n)))?;
        let (a, b) = poly.edge(edge);
        let t = (cur.end - a).dot(b - a) / (b - a).dot(b - a);
        crossings.push(Crossing { polygon: cur.polygon, edge, t });
    }
    let lp = SurfaceLoop::new(crossings);
    lp.validate(base)?;
    Ok(lp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::geometry::Norm;

    const S3: f64 = 1.732_050_807_568_877_2;

    #[test]
    fn calabi_croke_cover() {
        let base = catalog::calabi_croke().build().unwrap();
        let c = build_degree3_cover(&base).unwrap();
        assert!((c.total().surface_area() - 3.0 * S3 / 2.0).abs() < 1e-12);
        assert_eq!(c.total().euler_characteristic(), 0);
        assert_eq!(c.riemann_hurwitz(), 0);
        assert_eq!(c.ramification_points().len(), 3);
        let [r1, r2] = c.lattice().reduced();
        assert!((r1.length() - S3).abs() < 1e-12 && (r2.length() - S3).abs() < 1e-12);
        assert_eq!(c.deck_fixed_points().len(), 3);
    }

    #[test]
    fn tetrahedral_cover() {
        let base = catalog::tetrahedral().build().unwrap();
        let c = build_degree2_cover(&base).unwrap();
        assert!((c.total().surface_area() - 2.0 * S3).abs() < 1e-12);
        let [r1, r2] = c.lattice().reduced();
        assert!((r1.length() - 2.0).abs() < 1e-12 && (r2.length() - 2.0).abs() < 1e-12);
        assert_eq!(c.deck_fixed_points().len(), 4);
        assert_eq!(c.riemann_hurwitz(), 0);
    }

    #[test]
    fn pillowcase_cover_is_diagonal_l1_torus() {
        let base = catalog::pillowcase_l1().build().unwrap();
        let c = build_degree2_cover(&base).unwrap();
        let sys = crate::lattice::lattice_systole(c.lattice(), &Norm::l1());
        assert_eq!(sys.length, 2.0);
        assert!((c.lattice().covolume() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn wrong_base_types() {
        let tet = catalog::tetrahedral().build().unwrap();
        assert!(matches!(build_degree3_cover(&tet), Err(Error::UnsupportedBase(_))));
        let cc = catalog::calabi_croke().build().unwrap();
        assert!(matches!(build_degree2_cover(&cc), Err(Error::UnsupportedBase(_))));
    }

    #[test]
    fn rotation_deck_preserves_euclidean_not_l1() {
        let r = Mat2::rotation(2.0 * PI / 3.0);
        assert!(Norm::Euclidean.is_preserved_by(&r, 1e-9));
        assert!(!Norm::l1().is_preserved_by(&r, 1e-9));
    }

    #[test]
    fn identities_on_samples() {
        for c in [
            build_degree3_cover(&catalog::calabi_croke().build().unwrap()).unwrap(),
            build_degree2_cover(&catalog::tetrahedral().build().unwrap()).unwrap(),
            build_degree2_cover(&catalog::pillowcase_l1().build().unwrap()).unwrap(),
        ] {
            let samples = c.sample_points(1000);
            assert!(samples.len() >= 1000);
            let check = c.check_identities(&samples);
            assert!(check.holds(1e-9), "{check:?}");
        }
    }

    #[test]
    fn lifts() {
        let base = catalog::calabi_croke().build().unwrap();
        let c = build_degree3_cover(&base).unwrap();
        let regular = c.lift_point(SurfacePoint { polygon: 0, point: Vec2::new(0.4, 0.2) });
        assert_eq!(regular.len(), 3);
        assert!(regular.iter().all(|p| p.multiplicity == 1));
        let vertex = c.lift_point(SurfacePoint { polygon: 0, point: Vec2::new(1.0, 0.0) });
        assert_eq!(vertex.len(), 1);
        assert_eq!(vertex[0].multiplicity, 3);
        let tet = build_degree2_cover(&catalog::tetrahedral().build().unwrap()).unwrap();
        let v = tet.lift_point(SurfacePoint { polygon: 0, point: Vec2::new(1.0, 0.0) });
        assert_eq!((v.len(), v[0].multiplicity), (1, 2));
    }

    #[test]
    fn constant_loop_projects_to_constant() {
        let c = build_degree3_cover(&catalog::calabi_croke().build().unwrap()).unwrap();
        let z = Vec2::new(0.3, 0.1);
        let segs = c.project_loop(&[z, z]).unwrap();
        assert!(segs.iter().all(|s| s.start.dist(s.end) == 0.0));
    }

    #[test]
    fn collision_is_reported() {
        let c = build_degree3_cover(&catalog::calabi_croke().build().unwrap()).unwrap();
        let r = c.ramification_points()[0].position;
        let lambda = c.lattice().basis()[0];
        assert!(matches!(c.project_loop(&[r, r + lambda]), Err(Error::RamificationCollision(_))));
    }

    #[test]
    fn generators_to_basis() {
        let b = lattice_from_generators(&[Vec2::new(2.0, 0.0), Vec2::new(4.0, 0.0), Vec2::new(1.0, 1.0)]).unwrap();
        assert!((b[0].cross(b[1]).abs() - 2.0).abs() < 1e-12);
        let b = lattice_from_generators(&[Vec2::new(3.0, 0.0), Vec2::new(0.0, 2.0), Vec2::new(1.0, 1.0)]).unwrap();
        assert!((b[0].cross(b[1]).abs() - 1.0).abs() < 1e-12);
    }
}
