//! Closed piecewise-flat surfaces given as convex polygons with edge gluings.
//!
//! Edge `i` of a polygon runs from vertex `i` to vertex `i + 1`. A gluing of
//! `(p, i)` with `(q, j)` identifies the two edges with opposite orientations:
//! vertex `i` of `p` goes to vertex `j + 1` of `q`.

use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Affine2, ConvexPolygon, Mat2, Norm, NormLiteral, Vec2};

/// Endpoint matching tolerance for gluings.
pub const GLUE_TOL: f64 = 1e-9;

pub type GluingIsometry = Affine2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricClass {
    Riemannian,
    ReversibleFinsler,
    NonreversibleFinsler,
}

impl MetricClass {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricClass::Riemannian => "riemannian",
            MetricClass::ReversibleFinsler => "reversible_finsler",
            MetricClass::NonreversibleFinsler => "nonreversible_finsler",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GluingSpec {
    pub a: [usize; 2],
    pub b: [usize; 2],
    /// Linear part of the map from the chart of `a` to the chart of `b`; when
    /// absent, the orientation-preserving rigid motion matching the endpoints.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear: Option<Mat2>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub polygon: usize,
    pub point: Vec2,
}

/// Surface file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceDescription {
    pub label: String,
    pub metric_class: MetricClass,
    pub norm: NormLiteral,
    pub polygons: Vec<Vec<Vec2>>,
    pub gluings: Vec<GluingSpec>,
    #[serde(default)]
    pub marked_points: Vec<SurfacePoint>,
}

impl SurfaceDescription {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("surface description serializes")
    }

    pub fn build(&self) -> Result<ConeSurface> {
        build_surface(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeRef {
    pub polygon: usize,
    pub edge: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConePoint {
    pub location: usize,
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexClass {
    pub corners: Vec<(usize, usize)>,
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkedPoint {
    pub location: SurfacePoint,
    pub vertex_class: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct ConeSurface {
    label: String,
    metric_class: MetricClass,
    norm: Norm,
    polygons: Vec<ConvexPolygon>,
    partner: Vec<Vec<EdgeRef>>,
    transition: Vec<Vec<GluingIsometry>>,
    corner_class: Vec<Vec<usize>>,
    classes: Vec<VertexClass>,
    marked: Vec<MarkedPoint>,
    description: SurfaceDescription,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = x;
        while self.0[c] != r {
            let next = self.0[c];
            self.0[c] = r;
            c = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

pub fn build_surface(desc: &SurfaceDescription) -> Result<ConeSurface> {
    let norm = Norm::from_literal(&desc.norm)?;
    match (desc.metric_class, &norm) {
        (MetricClass::Riemannian, Norm::Euclidean) => {}
        (MetricClass::Riemannian, _) => {
            return Err(Error::MetricClass("riemannian surfaces require the euclidean norm".into()))
        }
        (_, Norm::Euclidean) => {
            return Err(Error::MetricClass("finsler surfaces require a polygonal norm".into()))
        }
        (MetricClass::ReversibleFinsler, n) if !n.is_reversible() => {
            return Err(Error::MetricClass("reversible_finsler requires a symmetric ball".into()))
        }
        _ => {}
    }

    let polygons: Vec<ConvexPolygon> = desc
        .polygons
        .iter()
        .enumerate()
        .map(|(k, vs)| {
            ConvexPolygon::new(vs.clone()).map_err(|e| Error::Degenerate(format!("polygon {k}: {e}")))
        })
        .collect::<Result<_>>()?;
    if polygons.is_empty() {
        return Err(Error::Gluing("surface has no polygons".into()));
    }

    let unset = EdgeRef { polygon: usize::MAX, edge: usize::MAX };
    let mut partner: Vec<Vec<EdgeRef>> = polygons.iter().map(|p| vec![unset; p.len()]).collect();
    let mut transition: Vec<Vec<Affine2>> = polygons.iter().map(|p| vec![Affine2::IDENTITY; p.len()]).collect();

    for (g, spec) in desc.gluings.iter().enumerate() {
        let [p, i] = spec.a;
        let [q, j] = spec.b;
        for &(poly, edge) in &[(p, i), (q, j)] {
            if poly >= polygons.len() || edge >= polygons[poly].len() {
                return Err(Error::Gluing(format!("gluing {g} references missing edge ({poly}, {edge})")));
            }
            if partner[poly][edge] != unset {
                return Err(Error::Gluing(format!("edge ({poly}, {edge}) is glued more than once")));
            }
        }
        if (p, i) == (q, j) {
            return Err(Error::Gluing(format!("gluing {g} glues edge ({p}, {i}) to itself")));
        }
        let (a, b) = polygons[p].edge(i);
        let (c, d) = polygons[q].edge(j);
        let map = match spec.linear {
            Some(lin) => {
                if (lin.det().abs() - 1.0).abs() > GLUE_TOL {
                    return Err(Error::Isometry(format!("gluing {g}: linear part has determinant {}", lin.det())));
                }
                let m = Affine2::new(lin, d - lin.apply(a));
                if m.apply(b).dist(c) > GLUE_TOL {
                    return Err(Error::Isometry(format!("gluing {g}: linear part does not match the edges")));
                }
                m
            }
            None => Affine2::rigid_from_segments(a, b, d, c, GLUE_TOL).ok_or_else(|| {
                Error::Isometry(format!(
                    "gluing {g}: euclidean edge lengths differ ({} vs {}); supply a linear part",
                    (b - a).length(),
                    (c - d).length()
                ))
            })?,
        };
        if !norm.is_preserved_by(&map.lin, GLUE_TOL) {
            return Err(Error::NormCompatibility(format!(
                "gluing {g}: linear part {:?} does not preserve the unit ball",
                map.lin
            )));
        }
        let src_len = norm.eval(b - a);
        let dst_len = norm.eval(c - d);
        if (src_len - dst_len).abs() > GLUE_TOL {
            return Err(Error::Isometry(format!(
                "gluing {g}: edge ({p}, {i}) has length {src_len} but ({q}, {j}) has length {dst_len}"
            )));
        }
        let inv = map.inverse().expect("isometry is invertible");
        partner[p][i] = EdgeRef { polygon: q, edge: j };
        partner[q][j] = EdgeRef { polygon: p, edge: i };
        transition[p][i] = map;
        transition[q][j] = inv;
    }
    for (p, row) in partner.iter().enumerate() {
        if let Some(i) = row.iter().position(|e| *e == unset) {
            return Err(Error::Gluing(format!("edge ({p}, {i}) is not glued")));
        }
    }

    // vertex classes
    let offsets: Vec<usize> = polygons
        .iter()
        .scan(0, |acc, p| {
            let o = *acc;
            *acc += p.len();
            Some(o)
        })
        .collect();
    let total: usize = polygons.iter().map(|p| p.len()).sum();
    let mut uf = UnionFind::new(total);
    for (p, poly) in polygons.iter().enumerate() {
        for i in 0..poly.len() {
            let EdgeRef { polygon: q, edge: j } = partner[p][i];
            let nq = polygons[q].len();
            uf.union(offsets[p] + i, offsets[q] + (j + 1) % nq);
            uf.union(offsets[p] + (i + 1) % poly.len(), offsets[q] + j);
        }
    }
    let mut root_to_class: BTreeMap<usize, usize> = BTreeMap::new();
    let mut classes: Vec<VertexClass> = Vec::new();
    let mut corner_class: Vec<Vec<usize>> = polygons.iter().map(|p| vec![0; p.len()]).collect();
    for (p, poly) in polygons.iter().enumerate() {
        for i in 0..poly.len() {
            let r = uf.find(offsets[p] + i);
            let c = *root_to_class.entry(r).or_insert_with(|| {
                classes.push(VertexClass { corners: Vec::new(), angle: 0.0 });
                classes.len() - 1
            });
            corner_class[p][i] = c;
            classes[c].corners.push((p, i));
            classes[c].angle += poly.interior_angle(i);
        }
    }

    let mut marked = Vec::with_capacity(desc.marked_points.len());
    for (k, m) in desc.marked_points.iter().enumerate() {
        let poly = polygons
            .get(m.polygon)
            .ok_or_else(|| Error::Invariant(format!("marked point {k} references missing polygon {}", m.polygon)))?;
        if !poly.contains(m.point, GLUE_TOL) {
            return Err(Error::Invariant(format!("marked point {k} lies outside polygon {}", m.polygon)));
        }
        let vertex_class =
            (0..poly.len()).find(|&i| poly.vertex(i).dist(m.point) <= GLUE_TOL).map(|i| corner_class[m.polygon][i]);
        marked.push(MarkedPoint { location: *m, vertex_class });
    }

    let surface = ConeSurface {
        label: desc.label.clone(),
        metric_class: desc.metric_class,
        norm,
        polygons,
        partner,
        transition,
        corner_class,
        classes,
        marked,
        description: desc.clone(),
    };
    let deficit: f64 = surface.classes.iter().map(|c| 2.0 * PI - c.angle).sum();
    let expected = 2.0 * PI * surface.euler_characteristic() as f64;
    if (deficit - expected).abs() > 1e-9 {
        return Err(Error::Invariant(format!("Gauss-Bonnet fails: total deficit {deficit} vs {expected}")));
    }
    Ok(surface)
}

impl ConeSurface {
    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn metric_class(&self) -> MetricClass {
        self.metric_class
    }
    pub fn norm(&self) -> &Norm {
        &self.norm
    }
    pub fn polygons(&self) -> &[ConvexPolygon] {
        &self.polygons
    }
    pub fn polygon(&self, p: usize) -> &ConvexPolygon {
        &self.polygons[p]
    }
    pub fn description(&self) -> &SurfaceDescription {
        &self.description
    }
    pub fn partner(&self, p: usize, i: usize) -> EdgeRef {
        self.partner[p][i]
    }
    /// Map from the chart of polygon `p` to the chart of the polygon across edge `i`.
    pub fn transition(&self, p: usize, i: usize) -> &GluingIsometry {
        &self.transition[p][i]
    }
    pub fn corner_class(&self, p: usize, i: usize) -> usize {
        self.corner_class[p][i % self.polygons[p].len()]
    }
    pub fn vertex_classes(&self) -> &[VertexClass] {
        &self.classes
    }
    pub fn marked_points(&self) -> &[MarkedPoint] {
        &self.marked
    }
    pub fn edge_count(&self) -> usize {
        self.polygons.iter().map(|p| p.len()).sum::<usize>() / 2
    }

    /// Location of a vertex class, taken from its first corner.
    pub fn class_location(&self, c: usize) -> SurfacePoint {
        let (p, i) = self.classes[c].corners[0];
        SurfacePoint { polygon: p, point: self.polygons[p].vertex(i) }
    }

    pub fn is_marked_class(&self, c: usize) -> bool {
        self.marked.iter().any(|m| m.vertex_class == Some(c))
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.classes.len() as i64 - self.edge_count() as i64 + self.polygons.len() as i64
    }

    /// One entry per vertex class.
    pub fn cone_angles(&self) -> Vec<ConePoint> {
        self.classes.iter().enumerate().map(|(k, c)| ConePoint { location: k, angle: c.angle }).collect()
    }

    /// Vertex classes whose angle differs from 2π.
    pub fn singular_points(&self) -> Vec<ConePoint> {
        self.cone_angles().into_iter().filter(|c| (c.angle - 2.0 * PI).abs() > 1e-9).collect()
    }

    pub fn euclidean_area(&self) -> f64 {
        self.polygons.iter().map(|p| p.area()).sum()
    }

    /// Holmes–Thompson area: Euclidean area times the polar-body factor.
    pub fn surface_area(&self) -> f64 {
        self.euclidean_area() * self.norm.ht_area_factor().value()
    }

    /// Charts-to-plane maps from a breadth-first unfolding along a spanning
    /// tree of the dual graph, together with the tree edges used.
    pub fn develop(&self) -> (Vec<Affine2>, Vec<EdgeRef>) {
        let n = self.polygons.len();
        let mut dev: Vec<Option<Affine2>> = vec![None; n];
        dev[0] = Some(Affine2::IDENTITY);
        let mut tree = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        while let Some(p) = queue.pop_front() {
            let dp = dev[p].expect("queued polygons are developed");
            for i in 0..self.polygons[p].len() {
                let EdgeRef { polygon: q, .. } = self.partner[p][i];
                if dev[q].is_none() {
                    let back = self.transition[p][i].inverse().expect("isometry is invertible");
                    dev[q] = Some(dp.compose(&back));
                    tree.push(EdgeRef { polygon: p, edge: i });
                    queue.push_back(q);
                }
            }
        }
        (dev.into_iter().map(|d| d.expect("surface is connected")).collect(), tree)
    }

    pub fn is_connected(&self) -> bool {
        let n = self.polygons.len();
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(p) = stack.pop() {
            for e in &self.partner[p] {
                if !seen[e.polygon] {
                    seen[e.polygon] = true;
                    stack.push(e.polygon);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Polygon containing `point` (chart of `hint` first, then neighbours).
    pub fn locate(&self, hint: usize, point: Vec2, tol: f64) -> Option<SurfacePoint> {
        if self.polygons[hint].contains(point, tol) {
            return Some(SurfacePoint { polygon: hint, point });
        }
        for i in 0..self.polygons[hint].len() {
            let t = &self.transition[hint][i];
            let q = self.partner[hint][i].polygon;
            let x = t.apply(point);
            if self.polygons[q].contains(x, tol) {
                return Some(SurfacePoint { polygon: q, point: x });
            }
        }
        None
    }

    /// Whether two chart points denote the same surface point (up to one gluing).
    pub fn same_point(&self, a: SurfacePoint, b: SurfacePoint, tol: f64) -> bool {
        if a.polygon == b.polygon && a.point.dist(b.point) <= tol {
            return true;
        }
        let pa = &self.polygons[a.polygon];
        for i in 0..pa.len() {
            if self.partner[a.polygon][i].polygon == b.polygon {
                let (s, e) = pa.edge(i);
                let on_edge = ((e - s).cross(a.point - s) / (e - s).length()).abs() <= tol;
                if on_edge && self.transition[a.polygon][i].apply(a.point).dist(b.point) <= tol {
                    return true;
                }
            }
        }
        // vertices: compare classes
        let va = (0..pa.len()).find(|&i| pa.vertex(i).dist(a.point) <= tol);
        let pb = &self.polygons[b.polygon];
        let vb = (0..pb.len()).find(|&i| pb.vertex(i).dist(b.point) <= tol);
        matches!((va, vb), (Some(i), Some(j)) if self.corner_class(a.polygon, i) == self.corner_class(b.polygon, j))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn calabi_croke_sphere() {
        let s = catalog::calabi_croke().build().unwrap();
        assert_eq!(s.euler_characteristic(), 2);
        let angles = s.cone_angles();
        assert_eq!(angles.len(), 3);
        for c in &angles {
            assert!((c.angle - 2.0 * PI / 3.0).abs() < 1e-12);
        }
        assert!((s.surface_area() - 3f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn tetrahedral_sphere() {
        let s = catalog::tetrahedral().build().unwrap();
        assert_eq!(s.euler_characteristic(), 2);
        let angles = s.cone_angles();
        assert_eq!(angles.len(), 4);
        for c in &angles {
            assert!((c.angle - PI).abs() < 1e-12);
        }
        assert!((s.surface_area() - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn square_torus() {
        let s = catalog::square_torus(Norm::Euclidean, MetricClass::Riemannian).build().unwrap();
        assert_eq!(s.euler_characteristic(), 0);
        let angles = s.cone_angles();
        assert_eq!(angles.len(), 1);
        assert!((angles[0].angle - 2.0 * PI).abs() < 1e-12);
        assert!(s.singular_points().is_empty());
    }

    #[test]
    fn linf_torus_area() {
        let s = catalog::torus_linf().build().unwrap();
        assert!((s.surface_area() - 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn hexagon_torus_euler() {
        let s = catalog::hexagon_torus(1.0).build().unwrap();
        assert_eq!(s.vertex_classes().len(), 2);
        assert_eq!(s.euler_characteristic(), 0);
    }

    #[test]
    fn unmatched_edge_is_rejected() {
        let mut d = catalog::calabi_croke();
        d.gluings.pop();
        assert!(matches!(build_surface(&d), Err(Error::Gluing(_))));
    }

    #[test]
    fn edge_length_mismatch_is_rejected() {
        let mut d = catalog::square_torus(Norm::Euclidean, MetricClass::Riemannian);
        d.polygons[0][2] = Vec2::new(1.0, 1.2);
        d.polygons[0][3] = Vec2::new(0.0, 1.2);
        d.polygons[0][1] = Vec2::new(1.1, 0.0);
        assert!(matches!(build_surface(&d), Err(Error::Isometry(_))));
    }

    #[test]
    fn metric_class_mismatch_is_rejected() {
        let mut d = catalog::torus_linf();
        d.metric_class = MetricClass::Riemannian;
        assert!(matches!(build_surface(&d), Err(Error::MetricClass(_))));
        let mut d = catalog::torus_triangle_norm();
        d.metric_class = MetricClass::ReversibleFinsler;
        assert!(matches!(build_surface(&d), Err(Error::MetricClass(_))));
        let mut d = catalog::calabi_croke();
        d.metric_class = MetricClass::NonreversibleFinsler;
        assert!(matches!(build_surface(&d), Err(Error::MetricClass(_))));
    }

    #[test]
    fn pillowcase_norm_compatibility() {
        assert!(catalog::pillowcase_l1().build().is_ok());
        let d = catalog::pillowcase_with_norm(Norm::triangle(), MetricClass::NonreversibleFinsler);
        assert!(matches!(build_surface(&d), Err(Error::NormCompatibility(_))));
    }

    #[test]
    fn marked_vertices_resolve_to_classes() {
        let s = catalog::tetrahedral().build().unwrap();
        let mut classes: Vec<usize> = s.marked_points().iter().map(|m| m.vertex_class.unwrap()).collect();
        classes.sort();
        assert_eq!(classes, vec![0, 1, 2, 3]);
    }

    #[test]
    fn json_round_trip() {
        let d = catalog::pillowcase_l1();
        let back = SurfaceDescription::from_json(&d.to_json()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn parse_error_reports_position() {
        let err = SurfaceDescription::from_json("{\n \"label\": 3\n}").unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }
}
