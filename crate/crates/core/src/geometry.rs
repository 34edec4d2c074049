//! Planar convex geometry: vectors, affine maps, convex polygons and the
//! (possibly asymmetric) norms whose unit balls they describe.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Areas at or below this are treated as degenerate.
pub const AREA_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }
    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }
    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }
    #[inline]
    pub fn length(self) -> f64 {
        self.x.hypot(self.y)
    }
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }
    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).length()
    }
    pub fn lerp(self, o: Vec2, t: f64) -> Vec2 {
        self + (o - self) * t
    }
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
    fn lex_lt(self, o: Vec2) -> bool {
        self.x < o.x || (self.x == o.x && self.y < o.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Row-major 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[[f64; 2]; 2]", into = "[[f64; 2]; 2]")]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl From<[[f64; 2]; 2]> for Mat2 {
    fn from(m: [[f64; 2]; 2]) -> Self {
        Mat2::new(m[0][0], m[0][1], m[1][0], m[1][1])
    }
}

impl From<Mat2> for [[f64; 2]; 2] {
    fn from(m: Mat2) -> Self {
        [[m.a, m.b], [m.c, m.d]]
    }
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Mat2::new(c, -s, s, c)
    }
    pub fn scale(s: f64) -> Self {
        Mat2::new(s, 0.0, 0.0, s)
    }
    /// Matrix whose columns are `u` and `v`.
    pub fn from_cols(u: Vec2, v: Vec2) -> Self {
        Mat2::new(u.x, v.x, u.y, v.y)
    }
    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }
    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(self.a * v.x + self.b * v.y, self.c * v.x + self.d * v.y)
    }
    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
    pub fn inverse(&self) -> Option<Mat2> {
        let det = self.det();
        if det.abs() < 1e-15 {
            return None;
        }
        Some(Mat2::new(self.d / det, -self.b / det, -self.c / det, self.a / det))
    }
    pub fn max_abs_diff(&self, o: &Mat2) -> f64 {
        (self.a - o.a)
            .abs()
            .max((self.b - o.b).abs())
            .max((self.c - o.c).abs())
            .max((self.d - o.d).abs())
    }
}

/// Affine map `x ↦ lin·x + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine2 {
    pub lin: Mat2,
    pub t: Vec2,
}

impl Affine2 {
    pub const IDENTITY: Affine2 = Affine2 { lin: Mat2::IDENTITY, t: Vec2::ZERO };

    pub fn new(lin: Mat2, t: Vec2) -> Self {
        Affine2 { lin, t }
    }
    pub fn translation(t: Vec2) -> Self {
        Affine2 { lin: Mat2::IDENTITY, t }
    }
    /// Rotation by `theta` about `center`.
    pub fn rotation_about(center: Vec2, theta: f64) -> Self {
        let lin = Mat2::rotation(theta);
        Affine2 { lin, t: center - lin.apply(center) }
    }
    pub fn apply(&self, p: Vec2) -> Vec2 {
        self.lin.apply(p) + self.t
    }
    /// `self ∘ other`
    pub fn compose(&self, other: &Affine2) -> Affine2 {
        Affine2 { lin: self.lin.mul(&other.lin), t: self.lin.apply(other.t) + self.t }
    }
    pub fn inverse(&self) -> Option<Affine2> {
        let inv = self.lin.inverse()?;
        Some(Affine2 { lin: inv, t: -inv.apply(self.t) })
    }
    pub fn pow(&self, n: usize) -> Affine2 {
        (0..n).fold(Affine2::IDENTITY, |acc, _| self.compose(&acc))
    }
    /// Orientation-preserving rigid motion sending `a ↦ a2` and `b ↦ b2`.
    /// Requires `|b − a| = |b2 − a2|` up to `tol`.
    pub fn rigid_from_segments(a: Vec2, b: Vec2, a2: Vec2, b2: Vec2, tol: f64) -> Option<Affine2> {
        let u = b - a;
        let w = b2 - a2;
        if (u.length() - w.length()).abs() > tol || u.length() < tol {
            return None;
        }
        let theta = w.angle() - u.angle();
        let lin = Mat2::rotation(theta);
        Some(Affine2 { lin, t: a2 - lin.apply(a) })
    }
    /// Affine map determined by three point correspondences.
    pub fn from_triangles(src: [Vec2; 3], dst: [Vec2; 3]) -> Option<Affine2> {
        let s = Mat2::from_cols(src[1] - src[0], src[2] - src[0]);
        let d = Mat2::from_cols(dst[1] - dst[0], dst[2] - dst[0]);
        let lin = d.mul(&s.inverse()?);
        Some(Affine2 { lin, t: dst[0] - lin.apply(src[0]) })
    }
}

/// Counterclockwise, strictly convex polygon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexPolygon {
    vertices: Vec<Vec2>,
}

impl ConvexPolygon {
    pub fn new(vertices: Vec<Vec2>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::Degenerate(format!("polygon with {n} vertices")));
        }
        let scale = vertices.iter().map(|v| v.length()).fold(1.0, f64::max);
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            let turn = (b - a).cross(c - b);
            if turn <= 1e-12 * scale * scale {
                return Err(Error::Degenerate(format!(
                    "vertices {i}..{} are not strictly convex counterclockwise (turn {turn:e})",
                    (i + 2) % n
                )));
            }
        }
        let p = ConvexPolygon { vertices };
        if p.signed_area() <= AREA_FLOOR {
            return Err(Error::Degenerate("area below numeric floor".into()));
        }
        Ok(p)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }
    pub fn len(&self) -> usize {
        self.vertices.len()
    }
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
    pub fn vertex(&self, i: usize) -> Vec2 {
        self.vertices[i % self.vertices.len()]
    }
    /// Edge `i` runs from vertex `i` to vertex `i + 1`.
    pub fn edge(&self, i: usize) -> (Vec2, Vec2) {
        (self.vertex(i), self.vertex(i + 1))
    }

    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        0.5 * (0..n).map(|i| self.vertices[i].cross(self.vertices[(i + 1) % n])).sum::<f64>()
    }

    pub fn area(&self) -> f64 {
        self.signed_area()
    }

    pub fn centroid(&self) -> Vec2 {
        let n = self.vertices.len() as f64;
        self.vertices.iter().fold(Vec2::ZERO, |acc, &v| acc + v) * (1.0 / n)
    }

    /// Interior angle at vertex `i`.
    pub fn interior_angle(&self, i: usize) -> f64 {
        let n = self.vertices.len();
        let prev = self.vertex(i + n - 1);
        let cur = self.vertex(i);
        let next = self.vertex(i + 1);
        let u = prev - cur;
        let w = next - cur;
        w.cross(u).atan2(w.dot(u))
    }

    /// Minimum signed distance from `p` to the edge lines; positive inside.
    pub fn depth(&self, p: Vec2) -> f64 {
        (0..self.len())
            .map(|i| {
                let (a, b) = self.edge(i);
                (b - a).cross(p - a) / (b - a).length()
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        self.depth(p) >= -tol
    }

    pub fn transformed(&self, map: &Affine2) -> Result<ConvexPolygon> {
        let mut vs: Vec<Vec2> = self.vertices.iter().map(|&v| map.apply(v)).collect();
        if map.lin.det() < 0.0 {
            vs.reverse();
        }
        ConvexPolygon::new(vs)
    }

    /// Parameter interval `[t0, t1] ⊂ [0, 1]` of the part of segment `a → b`
    /// inside the polygon, if it has positive length.
    pub fn clip_segment(&self, a: Vec2, b: Vec2) -> Option<(f64, f64)> {
        let d = b - a;
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        for i in 0..self.len() {
            let (p, q) = self.edge(i);
            let e = q - p;
            // inside ⇔ e × (x − p) ≥ 0
            let num = e.cross(a - p);
            let den = e.cross(d);
            if den.abs() < 1e-300 {
                if num < 0.0 {
                    return None;
                }
                continue;
            }
            let t = -num / den;
            if den > 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
            if t0 >= t1 {
                return None;
            }
        }
        Some((t0, t1))
    }
}

/// Shoelace area; errors when the polygon is degenerate.
pub fn polygon_area(p: &ConvexPolygon) -> Result<f64> {
    let a = p.signed_area();
    if a <= AREA_FLOOR {
        return Err(Error::Degenerate(format!("area {a:e}")));
    }
    Ok(a)
}

/// Convex hull (Andrew's monotone chain), counterclockwise, collinear points dropped.
pub fn convex_hull(points: &[Vec2]) -> Vec<Vec2> {
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Vec2> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Vec2>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                if (b - a).cross(p - b) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Polar body `{y : ⟨y, x⟩ ≤ 1 ∀x ∈ ball}`: one vertex per input edge, emitted
/// in edge order starting from the edge leaving the lexicographically smallest vertex.
pub fn polar_body(ball: &ConvexPolygon) -> Result<ConvexPolygon> {
    let n = ball.len();
    let start = (0..n)
        .reduce(|m, i| if ball.vertex(i).lex_lt(ball.vertex(m)) { i } else { m })
        .unwrap_or(0);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let (a, b) = ball.edge(start + k);
        // outward normal of a ccw edge, scaled so that ⟨normal, a⟩ = 1
        let normal = Vec2::new(b.y - a.y, a.x - b.x);
        let offset = normal.dot(a);
        if offset <= 1e-12 * normal.length() {
            return Err(Error::InvalidNorm(format!(
                "origin is not strictly inside the ball (edge {} has offset {offset:e})",
                (start + k) % n
            )));
        }
        out.push(normal * (1.0 / offset));
    }
    ConvexPolygon::new(out)
}

/// Minkowski functional `inf {t > 0 : v/t ∈ ball}`.
pub fn minkowski_functional(ball: &ConvexPolygon, v: Vec2) -> Result<f64> {
    let polar = polar_body(ball)?;
    Ok(support(polar.vertices(), v))
}

fn support(dual_vertices: &[Vec2], v: Vec2) -> f64 {
    dual_vertices.iter().map(|y| y.dot(v)).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Euclidean,
    Polygonal,
}

/// A norm on the plane: the Euclidean norm, or the Minkowski functional of a
/// convex polygon containing the origin strictly inside.
#[derive(Debug, Clone, PartialEq)]
pub enum Norm {
    Euclidean,
    Polygon { ball: ConvexPolygon, polar: ConvexPolygon, reversible: bool },
}

/// JSON literal used in surface files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NormLiteral {
    Euclidean,
    Polygon { vertices: Vec<Vec2> },
}

impl Norm {
    pub fn polygon(vertices: Vec<Vec2>) -> Result<Norm> {
        let ball = ConvexPolygon::new(vertices).map_err(|e| Error::InvalidNorm(e.to_string()))?;
        Norm::from_ball(ball)
    }

    pub fn from_ball(ball: ConvexPolygon) -> Result<Norm> {
        let polar = polar_body(&ball)?;
        let reversible = ball.vertices().iter().all(|&v| {
            let f = support(polar.vertices(), -v);
            (f - 1.0).abs() <= 1e-9
        });
        Ok(Norm::Polygon { ball, polar, reversible })
    }

    /// ℓ¹ norm, unit ball the diamond `(±1,0), (0,±1)`.
    pub fn l1() -> Norm {
        Norm::polygon(vec![
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(-1.0, 0.0),
            Vec2::new(0.0, -1.0),
        ])
        .expect("diamond is a valid ball")
    }

    /// ℓ∞ norm, unit ball the square `(±1,±1)`.
    pub fn linf() -> Norm {
        Norm::polygon(vec![
            Vec2::new(1.0, -1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 1.0),
            Vec2::new(-1.0, -1.0),
        ])
        .expect("square is a valid ball")
    }

    /// Non-symmetric norm whose unit ball is the triangle `(1,0), (0,1), (−1,−1)`.
    pub fn triangle() -> Norm {
        Norm::polygon(vec![Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(-1.0, -1.0)])
            .expect("triangle is a valid ball")
    }

    pub fn from_literal(lit: &NormLiteral) -> Result<Norm> {
        match lit {
            NormLiteral::Euclidean => Ok(Norm::Euclidean),
            NormLiteral::Polygon { vertices } => Norm::polygon(vertices.clone()),
        }
    }

    pub fn to_literal(&self) -> NormLiteral {
        match self {
            Norm::Euclidean => NormLiteral::Euclidean,
            Norm::Polygon { ball, .. } => NormLiteral::Polygon { vertices: ball.vertices().to_vec() },
        }
    }

    pub fn kind(&self) -> NormKind {
        match self {
            Norm::Euclidean => NormKind::Euclidean,
            Norm::Polygon { .. } => NormKind::Polygonal,
        }
    }

    pub fn ball(&self) -> Option<&ConvexPolygon> {
        match self {
            Norm::Euclidean => None,
            Norm::Polygon { ball, .. } => Some(ball),
        }
    }

    pub fn is_reversible(&self) -> bool {
        match self {
            Norm::Euclidean => true,
            Norm::Polygon { reversible, .. } => *reversible,
        }
    }

    #[inline]
    pub fn eval(&self, v: Vec2) -> f64 {
        match self {
            Norm::Euclidean => v.length(),
            Norm::Polygon { polar, .. } => support(polar.vertices(), v),
        }
    }

    /// Largest Euclidean length of a unit vector, so that `F(v) ≥ |v| / max_radius`.
    pub fn max_radius(&self) -> f64 {
        match self {
            Norm::Euclidean => 1.0,
            Norm::Polygon { ball, .. } => ball.vertices().iter().map(|v| v.length()).fold(0.0, f64::max),
        }
    }

    /// Smallest Euclidean length of a unit vector, so that `F(v) ≤ |v| / min_radius`.
    pub fn min_radius(&self) -> f64 {
        match self {
            Norm::Euclidean => 1.0,
            Norm::Polygon { ball, .. } => ball.depth(Vec2::ZERO),
        }
    }

    pub fn ht_area_factor(&self) -> HtAreaFactor {
        match self {
            Norm::Euclidean => HtAreaFactor(1.0),
            Norm::Polygon { polar, .. } => HtAreaFactor(polar.area() / PI),
        }
    }

    /// Whether the linear map sends the unit ball onto itself.
    pub fn is_preserved_by(&self, lin: &Mat2, tol: f64) -> bool {
        match self {
            Norm::Euclidean => {
                let g = lin.mul(&Mat2::new(lin.a, lin.c, lin.b, lin.d));
                g.max_abs_diff(&Mat2::IDENTITY) <= tol
            }
            Norm::Polygon { ball, .. } => {
                let vs = ball.vertices();
                vs.iter().all(|&v| {
                    let w = lin.apply(v);
                    vs.iter().any(|&u| u.dist(w) <= tol)
                })
            }
        }
    }

    /// Norm of the image ball under a linear map: `F'(v) = F(A⁻¹ v)`.
    pub fn pushed_forward(&self, lin: &Mat2) -> Result<Norm> {
        match self {
            Norm::Euclidean => Err(Error::InvalidNorm("cannot push forward the exact Euclidean norm".into())),
            Norm::Polygon { ball, .. } => Norm::from_ball(ball.transformed(&Affine2::new(*lin, Vec2::ZERO))?),
        }
    }

    /// Scaled ball `t·B`, so that lengths scale by `1/t`.
    pub fn scaled_ball(&self, t: f64) -> Result<Norm> {
        self.pushed_forward(&Mat2::scale(t))
    }
}

/// Holmes–Thompson area multiplier for a constant norm: polar-body area over π.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct HtAreaFactor(pub f64);

impl HtAreaFactor {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn ht_area_factor(norm: &Norm) -> Result<HtAreaFactor> {
    Ok(norm.ht_area_factor())
}

/// Random unit balls for randomized suites.
pub mod random {
    use super::*;
    use rand::Rng;

    /// Centrally symmetric polygon with `2m` vertices, `m ∈ [2, 6]`.
    pub fn symmetric_ball<R: Rng>(rng: &mut R) -> Norm {
        loop {
            let m = rng.gen_range(2..=6);
            let mut pts = Vec::with_capacity(2 * m);
            for _ in 0..m {
                let th = rng.gen_range(0.0..PI);
                let r = rng.gen_range(0.3..2.0);
                let v = Vec2::new(r * th.cos(), r * th.sin());
                pts.push(v);
                pts.push(-v);
            }
            let hull = convex_hull(&pts);
            if hull.len() < 4 {
                continue;
            }
            if let Ok(n) = Norm::polygon(hull) {
                if n.is_reversible() {
                    return n;
                }
            }
        }
    }

    /// Polygon with 3–8 vertices containing the origin strictly inside.
    pub fn asymmetric_ball<R: Rng>(rng: &mut R) -> Norm {
        loop {
            let m = rng.gen_range(3..=8);
            let pts: Vec<Vec2> = (0..m)
                .map(|_| {
                    let th = rng.gen_range(0.0..2.0 * PI);
                    let r = rng.gen_range(0.2..2.0);
                    Vec2::new(r * th.cos(), r * th.sin())
                })
                .collect();
            let hull = convex_hull(&pts);
            if hull.len() < 3 {
                continue;
            }
            let Ok(poly) = ConvexPolygon::new(hull) else { continue };
            if poly.depth(Vec2::ZERO) < 0.05 {
                continue;
            }
            if let Ok(n) = Norm::from_ball(poly) {
                return n;
            }
        }
    }
}
