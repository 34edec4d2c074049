//! Closed loops on cone surfaces stored as cyclic sequences of edge crossings,
//! and their straightening to geodesics.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cuts::CutSystem;
use crate::error::{Error, Result};
use crate::geometry::{Norm, Vec2};
use crate::surface::{ConeSurface, SurfacePoint};
use crate::words::HomotopyWord;

/// Crossing parameters are kept this far from edge endpoints.
pub const T_CLAMP: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 100_000;
/// Vertex proximity that counts as touching a vertex while tracing.
pub const TRANSVERSE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartSegment {
    pub polygon: usize,
    pub start: Vec2,
    pub end: Vec2,
}

/// The loop leaves `polygon` through `edge` at parameter `t` along the edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub polygon: usize,
    pub edge: usize,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SurfaceLoop {
    pub crossings: Vec<Crossing>,
}

impl SurfaceLoop {
    pub fn new(crossings: Vec<Crossing>) -> SurfaceLoop {
        SurfaceLoop { crossings }
    }

    pub fn len(&self) -> usize {
        self.crossings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.crossings.is_empty()
    }

    /// Exit point of crossing `k`, in the chart of the polygon being left.
    pub fn exit_point(&self, s: &ConeSurface, k: usize) -> Vec2 {
        let c = self.crossings[k];
        let (a, b) = s.polygon(c.polygon).edge(c.edge);
        a.lerp(b, c.t)
    }

    /// Consecutive crossings must chain through the glued polygons.
    pub fn validate(&self, s: &ConeSurface) -> Result<()> {
        let n = self.crossings.len();
        for k in 0..n {
            let c = self.crossings[k];
            let next = self.crossings[(k + 1) % n];
            if s.partner(c.polygon, c.edge).polygon != next.polygon {
                return Err(Error::Invariant(format!("crossing {k} does not lead into polygon {}", next.polygon)));
            }
        }
        Ok(())
    }

    pub fn segments(&self, s: &ConeSurface) -> Vec<ChartSegment> {
        let n = self.crossings.len();
        (0..n)
            .map(|k| {
                let c = self.crossings[k];
                let next = (k + 1) % n;
                ChartSegment {
                    polygon: self.crossings[next].polygon,
                    start: s.transition(c.polygon, c.edge).apply(self.exit_point(s, k)),
                    end: self.exit_point(s, next),
                }
            })
            .collect()
    }

    pub fn length(&self, s: &ConeSurface) -> f64 {
        segments_length(s.norm(), &self.segments(s))
    }

    pub fn word(&self, cuts: &CutSystem) -> HomotopyWord {
        cuts.word_of_exits(self.crossings.iter().map(|c| (c.polygon, c.edge)))
    }

    /// Removes crossings that immediately recross the same edge.
    pub fn cancel_backtracks(&mut self, s: &ConeSurface) {
        loop {
            let n = self.crossings.len();
            if n < 2 {
                return;
            }
            let hit = (0..n).find(|&k| {
                let c = self.crossings[k];
                let d = self.crossings[(k + 1) % n];
                let back = s.partner(c.polygon, c.edge);
                back.polygon == d.polygon && back.edge == d.edge
            });
            match hit {
                None => return,
                Some(k) => {
                    let j = (k + 1) % n;
                    let (a, b) = if k < j { (k, j) } else { (j, k) };
                    self.crossings.remove(b);
                    self.crossings.remove(a);
                }
            }
        }
    }
}

pub fn segments_length(norm: &Norm, segs: &[ChartSegment]) -> f64 {
    segs.iter().map(|g| norm.eval(g.end - g.start)).sum()
}

/// Follows a closed polyline given as a start point and successive
/// displacement vectors (each expressed in the chart where it begins).
pub fn trace_polyline(s: &ConeSurface, start: SurfacePoint, moves: &[Vec2]) -> Result<SurfaceLoop> {
    let mut crossings = Vec::new();
    let mut p = start.polygon;
    let mut x = start.point;
    for &mv in moves {
        let mut d = mv;
        loop {
            let poly = s.polygon(p);
            let end = x + d;
            if poly.contains(end, 0.0) {
                x = end;
                break;
            }
            let (_, t1) = poly.clip_segment(x, end).ok_or_else(|| {
                Error::Transversality("polyline leaves its chart through a vertex or edge".into())
            })?;
            let hit = x + d * t1;
            if let Some(i) = (0..poly.len()).find(|&i| poly.vertex(i).dist(hit) < TRANSVERSE_TOL) {
                return Err(Error::Transversality(format!("polyline passes through vertex {i} of polygon {p}")));
            }
            let edge = (0..poly.len())
                .min_by(|&i, &j| edge_offset(s, p, i, hit).total_cmp(&edge_offset(s, p, j, hit)))
                .expect("polygon has edges");
            let (a, b) = poly.edge(edge);
            let t = (hit - a).dot(b - a) / (b - a).dot(b - a);
            crossings.push(Crossing { polygon: p, edge, t });
            let map = s.transition(p, edge);
            x = map.apply(hit);
            d = map.lin.apply(d * (1.0 - t1));
            p = s.partner(p, edge).polygon;
        }
    }
    if p != start.polygon || x.dist(start.point) > 1e-9 {
        return Err(Error::Invariant("polyline does not close up".into()));
    }
    let mut lp = SurfaceLoop { crossings };
    lp.cancel_backtracks(s);
    Ok(lp)
}

fn edge_offset(s: &ConeSurface, p: usize, i: usize, x: Vec2) -> f64 {
    let (a, b) = s.polygon(p).edge(i);
    ((b - a).cross(x - a) / (b - a).length()).abs()
}

/// Minimizer over `t ∈ [lo, hi]` of `F(e(t) − a) + F(b − e(t))` where
/// `e(t) = e0 + t·dir`.
fn best_parameter(norm: &Norm, e0: Vec2, dir: Vec2, a: Vec2, b: Vec2, current: f64) -> f64 {
    let (lo, hi) = (T_CLAMP, 1.0 - T_CLAMP);
    let cost = |t: f64| norm.eval(e0 + dir * t - a) + norm.eval(b - e0 - dir * t);
    match norm {
        Norm::Euclidean => {
            let side_a = dir.cross(a - e0);
            let side_b = dir.cross(b - e0);
            // reflect b across the edge line when both ends lie on one side
            let b = if side_a * side_b > 0.0 {
                let n = dir.perp() * (1.0 / dir.length());
                b - n * (2.0 * n.dot(b - e0))
            } else {
                b
            };
            let den = dir.cross(b - a);
            if den.abs() < 1e-300 {
                return current;
            }
            ((a - e0).cross(b - a) / den).clamp(lo, hi)
        }
        Norm::Polygon { ball, .. } => {
            let mut cands = vec![lo, hi, current.clamp(lo, hi)];
            for &u in ball.vertices() {
                let den = dir.cross(u);
                if den.abs() > 1e-300 {
                    for base in [e0 - a, e0 - b] {
                        let t = -base.cross(u) / den;
                        if t > lo && t < hi {
                            cands.push(t);
                        }
                    }
                }
            }
            let mut best = (f64::INFINITY, current);
            for t in cands {
                let c = cost(t);
                let tie = (c - best.0).abs() <= 1e-15 * c.max(1.0);
                if c < best.0 && !tie || tie && (t - current).abs() < (best.1 - current).abs() {
                    best = (c, t);
                }
            }
            best.1
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VertexVisit {
    pub vertex_class: usize,
    pub angles: [f64; 2],
    pub marked: bool,
}

#[derive(Debug, Clone)]
pub struct Straightened {
    pub path: SurfaceLoop,
    pub length: f64,
    pub sweeps: usize,
    /// Length after each sweep, starting with the input length.
    pub history: Vec<f64>,
    pub vertex_visits: Vec<VertexVisit>,
}

impl Straightened {
    /// Both side angles at least π at every unmarked cone point the loop
    /// passes through. At marked points the loop may wrap around the puncture.
    pub fn is_geodesic(&self, tol: f64) -> bool {
        self.vertex_visits.iter().all(|v| v.marked || v.angles.iter().all(|&a| a >= PI - tol))
    }
}

/// Coordinate descent on the crossing parameters until no parameter moves.
pub fn straighten(s: &ConeSurface, input: &SurfaceLoop) -> Result<Straightened> {
    input.validate(s)?;
    let mut lp = input.clone();
    lp.cancel_backtracks(s);
    if lp.is_empty() {
        return Err(Error::Collapsed);
    }
    let norm = s.norm();
    let n = lp.len();
    let mut history = vec![lp.length(s)];
    let mut sweeps = 0;
    loop {
        if sweeps >= MAX_SWEEPS {
            return Err(Error::NonConvergence(MAX_SWEEPS));
        }
        sweeps += 1;
        let mut moved: f64 = 0.0;
        for k in 0..n {
            let prev = (k + n - 1) % n;
            let next = (k + 1) % n;
            let c = lp.crossings[k];
            let pc = lp.crossings[prev];
            let a = s.transition(pc.polygon, pc.edge).apply(lp.exit_point(s, prev));
            let back = s.transition(c.polygon, c.edge).inverse().expect("isometry is invertible");
            let b = back.apply(lp.exit_point(s, next));
            let (e0, e1) = s.polygon(c.polygon).edge(c.edge);
            let t = best_parameter(norm, e0, e1 - e0, a, b, c.t);
            let before = lp.length(s);
            let old = lp.crossings[k].t;
            lp.crossings[k].t = t;
            if lp.length(s) > before {
                lp.crossings[k].t = old;
            } else {
                moved = moved.max((t - old).abs());
            }
        }
        snap_to_vertices(s, &mut lp);
        let len = lp.length(s);
        history.push(len);
        if moved < 1e-13 {
            break;
        }
    }
    let length = lp.length(s);
    let vertex_visits = vertex_visits(s, &lp);
    Ok(Straightened { path: lp, length, sweeps, history, vertex_visits })
}

const SNAP_RANGE: f64 = 1e-3;

/// Coordinate sweeps crawl linearly towards a cone point the loop wraps
/// around; move every crossing close to one vertex class onto it at once and
/// keep the move if the loop does not get longer.
fn snap_to_vertices(s: &ConeSurface, lp: &mut SurfaceLoop) {
    let near: Vec<Option<(usize, f64)>> = lp
        .crossings
        .iter()
        .map(|c| {
            if c.t < SNAP_RANGE {
                Some((s.corner_class(c.polygon, c.edge), T_CLAMP))
            } else if c.t > 1.0 - SNAP_RANGE {
                Some((s.corner_class(c.polygon, c.edge + 1), 1.0 - T_CLAMP))
            } else {
                None
            }
        })
        .collect();
    let mut classes: Vec<usize> = near.iter().flatten().map(|&(v, _)| v).collect();
    classes.sort_unstable();
    classes.dedup();
    for v in classes {
        let before = lp.length(s);
        let old = lp.crossings.clone();
        let mut changed = false;
        for (c, n) in lp.crossings.iter_mut().zip(&near) {
            if let Some((w, t)) = *n {
                if w == v && c.t != t {
                    c.t = t;
                    changed = true;
                }
            }
        }
        if changed && lp.length(s) > before {
            lp.crossings = old;
        }
    }
}

fn pinned_vertex(s: &ConeSurface, c: &Crossing) -> Option<(usize, Vec2)> {
    let poly = s.polygon(c.polygon);
    if c.t <= 1e-9 {
        Some((c.edge, poly.vertex(c.edge)))
    } else if c.t >= 1.0 - 1e-9 {
        Some(((c.edge + 1) % poly.len(), poly.vertex(c.edge + 1)))
    } else {
        None
    }
}

fn angle_between(u: Vec2, w: Vec2) -> f64 {
    u.cross(w).abs().atan2(u.dot(w))
}

/// Side angles at each maximal run of crossings pinned at one vertex.
fn vertex_visits(s: &ConeSurface, lp: &SurfaceLoop) -> Vec<VertexVisit> {
    let n = lp.len();
    let pinned: Vec<Option<usize>> = lp
        .crossings
        .iter()
        .map(|c| pinned_vertex(s, c).map(|(i, _)| s.corner_class(c.polygon, i)))
        .collect();
    if pinned.iter().all(|p| p.is_some()) && pinned.iter().all(|p| *p == pinned[0]) {
        // loop wound around a single vertex
        let class = pinned[0].expect("all pinned");
        return vec![VertexVisit { vertex_class: class, angles: [0.0, 0.0], marked: s.is_marked_class(class) }];
    }
    let segs = lp.segments(s);
    let mut out = Vec::new();
    let mut k = 0;
    while k < n {
        let Some(class) = pinned[k] else {
            k += 1;
            continue;
        };
        // skip runs that started before index 0; they are handled at the wrap
        if k == 0 && pinned[n - 1] == Some(class) {
            k += 1;
            while k < n && pinned[k] == Some(class) {
                k += 1;
            }
            continue;
        }
        let mut m = k;
        while pinned[(m + 1) % n] == Some(class) && (m + 1) % n != k {
            m += 1;
        }
        // incoming segment ends at crossing k in polygon of crossing k
        let c = lp.crossings[k];
        let (vi, v) = pinned_vertex(s, &c).expect("pinned");
        let poly = s.polygon(c.polygon);
        let other_end = if vi == c.edge { poly.vertex(c.edge + 1) } else { poly.vertex(c.edge) };
        let incoming = segs[(k + n - 1) % n].start;
        let mut side = angle_between(incoming - v, other_end - v);
        for j in k..m {
            let cn = lp.crossings[(j + 1) % n];
            let (wi, _) = pinned_vertex(s, &cn).expect("pinned");
            side += s.polygon(cn.polygon).interior_angle(wi);
        }
        let last = lp.crossings[m % n];
        let map = s.transition(last.polygon, last.edge);
        let entry = s.partner(last.polygon, last.edge);
        let q = s.polygon(entry.polygon);
        let (lv, _) = pinned_vertex(s, &last).expect("pinned");
        let vq = map.apply(s.polygon(last.polygon).vertex(lv));
        let far = if q.vertex(entry.edge).dist(vq) < 1e-9 { q.vertex(entry.edge + 1) } else { q.vertex(entry.edge) };
        let outgoing = segs[m % n].end;
        side += angle_between(outgoing - vq, far - vq);
        let total = s.vertex_classes()[class].angle;
        out.push(VertexVisit { vertex_class: class, angles: [side, total - side], marked: s.is_marked_class(class) });
        k = m + 1;
    }
    out
}
