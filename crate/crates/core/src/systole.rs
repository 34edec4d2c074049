//! Marked systoles with certificates: exact values through the torus cover,
//! and the ε-net search for arbitrary surfaces.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::str::FromStr;

use serde::Serialize;

use crate::covers::{build_degree2_cover, build_degree3_cover, develop_flat_torus, segments_to_loop, RamifiedCover};
use crate::cuts::CutSystem;
use crate::discrete::{discrete_marked_systole, DiscreteOptions};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::lattice::{flat_torus_distance, lattice_systole};
use crate::loops::{segments_length, ChartSegment};
use crate::surface::{ConeSurface, MetricClass};
use crate::words::{is_admissible_in, HomotopyWord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    CoverExact,
    Discretized,
    Both,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::CoverExact => "cover_exact",
            Method::Discretized => "discretized",
            Method::Both => "both",
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Method> {
        match s {
            "cover_exact" => Ok(Method::CoverExact),
            "discretized" => Ok(Method::Discretized),
            "both" => Ok(Method::Both),
            _ => Err(Error::Config(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystoleOptions {
    pub method: Method,
    pub discrete: DiscreteOptions,
    /// Largest relative gap tolerated between the two methods.
    pub agreement_tol: f64,
}

impl Default for SystoleOptions {
    fn default() -> Self {
        SystoleOptions { method: Method::CoverExact, discrete: DiscreteOptions::default(), agreement_tol: 0.02 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionKind {
    FigureEight,
    SimpleTwoTwo,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub kind: ProjectionKind,
    pub self_intersections: usize,
    /// Branch points per complementary region, largest first.
    pub region_branch_counts: Vec<usize>,
    /// Whether the region census agrees with the self-intersection count.
    pub consistent: bool,
}

/// How the certified loop was found.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "route", rename_all = "snake_case")]
pub enum Witness {
    /// Projection of a straight closed geodesic of the cover torus.
    CoverGeodesic { degree: usize, lattice_vector: [f64; 2], start: [f64; 2] },
    /// Degenerate loop running between two marked points of a flat torus.
    MarkedPair { from: usize, to: usize },
    /// Straightened shortest path on an ε-net.
    Net { eps: f64, graph_length: f64, nodes: usize, sweeps: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystoleCertificate {
    pub surface: String,
    pub metric_class: MetricClass,
    pub method: Method,
    pub length: f64,
    #[serde(rename = "loop")]
    pub segments: Vec<ChartSegment>,
    pub word: String,
    pub letters: Vec<i32>,
    pub admissible: bool,
    pub witness: Witness,
    pub classification: Option<Classification>,
}

impl SystoleCertificate {
    /// Length recomputed from the loop.
    pub fn loop_length(&self, s: &ConeSurface) -> f64 {
        segments_length(s.norm(), &self.segments)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystoleReport {
    pub certificates: Vec<SystoleCertificate>,
    /// Relative gap between the methods when both ran.
    pub relative_gap: Option<f64>,
}

impl SystoleReport {
    pub fn best(&self) -> &SystoleCertificate {
        self.certificates
            .iter()
            .min_by(|a, b| a.length.total_cmp(&b.length))
            .expect("report holds a certificate")
    }
}

pub fn marked_systole(s: &ConeSurface, opts: &SystoleOptions) -> Result<SystoleReport> {
    let mut certificates = Vec::new();
    if matches!(opts.method, Method::CoverExact | Method::Both) {
        certificates.push(cover_exact(s)?);
    }
    if matches!(opts.method, Method::Discretized | Method::Both) {
        certificates.push(discretized(s, &opts.discrete)?);
    }
    let relative_gap = if certificates.len() == 2 {
        let (a, b) = (certificates[0].length, certificates[1].length);
        let gap = (a - b).abs() / a.min(b);
        if gap > opts.agreement_tol {
            return Err(Error::Invariant(format!(
                "methods disagree: cover_exact {a:.9}, discretized {b:.9} (gap {gap:.3e})"
            )));
        }
        Some(gap)
    } else {
        None
    };
    Ok(SystoleReport { certificates, relative_gap })
}

/// The cover used by the exact route: the torus itself, or the degree-3 or
/// degree-2 cover of a sphere.
pub fn exact_cover(s: &ConeSurface) -> Result<RamifiedCover> {
    match s.euler_characteristic() {
        0 => develop_flat_torus(s),
        2 => {
            let marked_elsewhere = s.marked_points().iter().any(|m| m.vertex_class.is_none());
            if marked_elsewhere {
                return Err(Error::UnsupportedBase("marked points away from the cone points".into()));
            }
            match s.vertex_classes().len() {
                3 => build_degree3_cover(s),
                4 => build_degree2_cover(s),
                n => Err(Error::UnsupportedBase(format!("no exact route for a sphere with {n} cone points"))),
            }
        }
        chi => Err(Error::UnsupportedBase(format!("no exact route for Euler characteristic {chi}"))),
    }
}

fn plane_marked_points(s: &ConeSurface, cover: &RamifiedCover) -> Vec<Vec2> {
    s.marked_points()
        .iter()
        .map(|m| cover.lattice().reduce(cover.sheets()[m.location.polygon].map.apply(m.location.point)))
        .collect()
}

/// Start point for a closed geodesic in direction `v`: the middle of the
/// widest strip between parallel lines through the points to avoid.
pub fn widest_gap_start(cover: &RamifiedCover, v: Vec2, avoid: &[Vec2]) -> Vec2 {
    let n = v.perp() * (1.0 / v.length());
    let spacing = cover.lattice().covolume() / v.length();
    let origin = avoid.first().copied().unwrap_or(Vec2::ZERO);
    let mut offsets: Vec<f64> = avoid.iter().map(|&x| (x - origin).dot(n).rem_euclid(spacing)).collect();
    offsets.sort_by(f64::total_cmp);
    offsets.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut best = (spacing, 0.0);
    for k in 0..offsets.len() {
        let next = if k + 1 < offsets.len() { offsets[k + 1] } else { offsets[0] + spacing };
        let gap = next - offsets[k];
        if k == 0 || gap > best.0 + 1e-12 {
            best = (gap, offsets[k] + gap / 2.0);
        }
    }
    origin + n * best.1
}

fn certificate_word(s: &ConeSurface, segs: &[ChartSegment]) -> Result<(HomotopyWord, bool)> {
    let cuts = CutSystem::new(s)?;
    let lp = segments_to_loop(s, segs)?;
    let word = lp.word(&cuts);
    let ok = is_admissible_in(&word, cuts.peripherals());
    Ok((word, ok))
}

fn cover_exact(s: &ConeSurface) -> Result<SystoleCertificate> {
    let cover = exact_cover(s)?;
    let norm = s.norm();
    let lam = lattice_systole(cover.lattice(), norm);
    let mut avoid: Vec<Vec2> = cover.ramification_points().iter().map(|r| r.position).collect();
    let marked = if cover.degree() == 1 { plane_marked_points(s, &cover) } else { Vec::new() };
    avoid.extend(&marked);

    // a loop around two marked points of a torus may beat the lattice
    let mut pair: Option<(f64, usize, usize)> = None;
    for i in 0..marked.len() {
        for j in 0..marked.len() {
            if i == j {
                continue;
            }
            let rt = flat_torus_distance(cover.lattice(), norm, marked[i], marked[j])
                + flat_torus_distance(cover.lattice(), norm, marked[j], marked[i]);
            if pair.is_none_or(|(b, _, _)| rt < b - 1e-12) {
                pair = Some((rt, i, j));
            }
        }
    }

    if let Some((rt, i, j)) = pair.filter(|&(rt, _, _)| rt < lam.length - 1e-12) {
        let (x, y) = (marked[i], marked[j]);
        let y = nearest_translate(&cover, x, y, norm, true);
        let back = nearest_translate(&cover, y, x, norm, true);
        let segs = cover.project_path(&[x, y, back])?;
        let (word, admissible) = certificate_word(s, &cover.project_loop(&stadium(x, y, back))?)?;
        return Ok(SystoleCertificate {
            surface: s.label().into(),
            metric_class: s.metric_class(),
            method: Method::CoverExact,
            length: rt,
            segments: segs,
            word: word.to_string(),
            letters: word.letters().to_vec(),
            admissible,
            witness: Witness::MarkedPair { from: i, to: j },
            classification: None,
        });
    }

    let start = widest_gap_start(&cover, lam.vector, &avoid);
    let segs = cover.project_loop(&[start, start + lam.vector])?;
    let (word, admissible) = certificate_word(s, &segs)?;
    if !admissible {
        return Err(Error::Invariant(format!("projected systolic loop has inadmissible word {word}")));
    }
    let classification =
        if cover.degree() > 1 { Some(classify_projection(&cover, start, lam.vector)?) } else { None };
    Ok(SystoleCertificate {
        surface: s.label().into(),
        metric_class: s.metric_class(),
        method: Method::CoverExact,
        length: lam.length,
        segments: segs,
        word: word.to_string(),
        letters: word.letters().to_vec(),
        admissible,
        witness: Witness::CoverGeodesic {
            degree: cover.degree(),
            lattice_vector: [lam.vector.x, lam.vector.y],
            start: [start.x, start.y],
        },
        classification,
    })
}

/// The translate `y + κ` closest to `x` in the norm, measured from `x` when
/// `forward`.
fn nearest_translate(cover: &RamifiedCover, x: Vec2, y: Vec2, norm: &crate::geometry::Norm, forward: bool) -> Vec2 {
    let base = cover.lattice().round(y - x);
    let mut best: Option<(f64, Vec2)> = None;
    for i in -3..=3 {
        for j in -3..=3 {
            let z = y - cover.lattice().point(base) + cover.lattice().point([i, j]);
            let len = if forward { norm.eval(z - x) } else { norm.eval(x - z) };
            if best.is_none_or(|(b, _)| len < b - 1e-12) {
                best = Some((len, z));
            }
        }
    }
    best.expect("window is nonempty").1
}

/// Thin loop around the doubled path `x → y → back`, used to read off the
/// homotopy class of the degenerate loop.
fn stadium(x: Vec2, y: Vec2, back: Vec2) -> Vec<Vec2> {
    let d = y - x;
    let u = d * (1.0 / d.length());
    let n = u.perp();
    let r = 1e-4 * d.length();
    let shift = back - x;
    vec![
        x - u * r - n * r,
        y + u * r - n * r,
        y + u * r + n * r,
        x - u * r + n * r,
        x - u * r - n * r + shift,
    ]
}

fn discretized(s: &ConeSurface, opts: &DiscreteOptions) -> Result<SystoleCertificate> {
    let out = discrete_marked_systole(s, opts)?;
    let cuts = CutSystem::new(s)?;
    let admissible = is_admissible_in(&out.word, cuts.peripherals());
    if !admissible {
        return Err(Error::Invariant(format!("straightened loop has inadmissible word {}", out.word)));
    }
    Ok(SystoleCertificate {
        surface: s.label().into(),
        metric_class: s.metric_class(),
        method: Method::Discretized,
        length: out.straightened.length,
        segments: out.straightened.path.segments(s),
        word: out.word.to_string(),
        letters: out.word.letters().to_vec(),
        admissible,
        witness: Witness::Net {
            eps: opts.eps,
            graph_length: out.graph_length,
            nodes: out.nodes,
            sweeps: out.straightened.sweeps,
        },
        classification: None,
    })
}

const RASTER: usize = 400;

/// Self-intersections and complementary regions of the projection of the
/// straight loop `start + s·v`, `s ∈ [0, 1)`.
pub fn classify_projection(cover: &RamifiedCover, start: Vec2, v: Vec2) -> Result<Classification> {
    let d = cover.degree();
    let deck = *cover.deck();
    let lat = cover.lattice();
    let lines: Vec<(Vec2, Vec2)> = (0..d)
        .map(|m| {
            let g = deck.pow(m);
            (g.apply(start), g.lin.apply(v))
        })
        .collect();

    let mut hits = 0usize;
    for &(w, mu) in &lines[1..] {
        let det = v.cross(mu);
        if det.abs() < 1e-9 * v.dot(v) {
            let spacing = lat.covolume() / v.length();
            let off = (w - start).cross(v) / v.length();
            let r = off.rem_euclid(spacing);
            if r.min(spacing - r) < 1e-9 {
                return Err(Error::Classification("the projection traces one curve twice".into()));
            }
            continue;
        }
        // z0 + s v = w + s' mu + κ with s, s' in [0, 1)
        let reach = v.length() + mu.length() + (w - start).length() + 1.0;
        let [r1, r2] = lat.reduced();
        let bound = (2.0 * reach / r1.length().min(r2.length())).ceil() as i64 + 2;
        for i in -bound..=bound {
            for j in -bound..=bound {
                let rhs = w - start + r1 * i as f64 + r2 * j as f64;
                let s = rhs.cross(-mu) / (v.cross(-mu));
                let s2 = v.cross(rhs) / (v.cross(-mu));
                let inside = |t: f64| (-1e-12..1.0 - 1e-12).contains(&t);
                if inside(s) && inside(s2) {
                    hits += 1;
                }
            }
        }
    }
    if !hits.is_multiple_of(2) {
        return Err(Error::Classification(format!("odd number {hits} of sheet crossings")));
    }
    let self_intersections = hits / 2;

    let counts = region_census(cover, &lines)?;
    let kind = match (self_intersections, counts.as_slice()) {
        (1, [1, 1, 1]) => ProjectionKind::FigureEight,
        (0, [2, 2]) => ProjectionKind::SimpleTwoTwo,
        _ => ProjectionKind::Other,
    };
    // a closed curve on the sphere with n transverse double points has n + 2
    // complementary regions, and each must hold a marked point
    let consistent = counts.len() == self_intersections + 2 && counts.iter().all(|&c| c >= 1);
    Ok(Classification { kind, self_intersections, region_branch_counts: counts, consistent })
}

/// Branch points in each region of the base, found on a raster of the torus
/// whose components are merged along the deck orbits.
fn region_census(cover: &RamifiedCover, lines: &[(Vec2, Vec2)]) -> Result<Vec<usize>> {
    let n = RASTER;
    let lat = cover.lattice();
    let [r1, r2] = lat.reduced();
    let det = r1.cross(r2);
    let cell = |x: Vec2| -> (usize, usize) {
        let a = (x.cross(r2) / det).rem_euclid(1.0);
        let b = (r1.cross(x) / det).rem_euclid(1.0);
        (((a * n as f64) as usize).min(n - 1), ((b * n as f64) as usize).min(n - 1))
    };
    let center = |i: usize, j: usize| r1 * ((i as f64 + 0.5) / n as f64) + r2 * ((j as f64 + 0.5) / n as f64);
    let band = (r1.length() + r2.length()) / n as f64;
    let families: Vec<(Vec2, Vec2, f64)> = lines
        .iter()
        .map(|&(w, mu)| (w, mu.perp() * (1.0 / mu.length()), lat.covolume() / mu.length()))
        .collect();
    let blocked = |x: Vec2| {
        families.iter().any(|&(w, nrm, h)| {
            let f = (x - w).dot(nrm).rem_euclid(h);
            f.min(h - f) < band
        })
    };

    let mut label = vec![usize::MAX; n * n];
    for i in 0..n {
        for j in 0..n {
            if blocked(center(i, j)) {
                label[i * n + j] = usize::MAX - 1;
            }
        }
    }
    let mut components = 0;
    for start in 0..n * n {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = components;
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            let (i, j) = (c / n, c % n);
            for (a, b) in [((i + 1) % n, j), ((i + n - 1) % n, j), (i, (j + 1) % n), (i, (j + n - 1) % n)] {
                if label[a * n + b] == usize::MAX {
                    label[a * n + b] = components;
                    queue.push_back(a * n + b);
                }
            }
        }
        components += 1;
    }

    // merge deck images
    let mut parent: Vec<usize> = (0..components).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let deck = *cover.deck();
    for c in 0..n * n {
        let comp = label[c];
        if comp >= components {
            continue;
        }
        let (a, b) = cell(deck.apply(center(c / n, c % n)));
        let other = label[a * n + b];
        if other < components {
            let (x, y) = (find(&mut parent, comp), find(&mut parent, other));
            parent[x] = y;
        }
    }

    let mut counts = vec![0usize; components];
    for r in cover.ramification_points() {
        let (a, b) = cell(r.position);
        let comp = label[a * n + b];
        if comp >= components {
            return Err(Error::Classification("a branch point lies on the loop".into()));
        }
        let root = find(&mut parent, comp);
        counts[root] += 1;
    }
    let mut out: Vec<usize> = (0..components)
        .filter(|&c| find(&mut parent, c) == c)
        .map(|c| counts[c])
        .filter(|&k| k > 0)
        .collect();
    out.sort_unstable_by(|a, b| b.cmp(a));
    Ok(out)
}

/// Euclidean angle of `v`, in `[0, 2π)`.
pub fn direction_angle(v: Vec2) -> f64 {
    v.y.atan2(v.x).rem_euclid(2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn exact(d: crate::surface::SurfaceDescription) -> SystoleCertificate {
        let s = d.build().unwrap();
        let c = cover_exact(&s).unwrap();
        assert!((c.loop_length(&s) - c.length).abs() < 1e-9, "{} vs {}", c.loop_length(&s), c.length);
        assert!(c.admissible);
        c
    }

    #[test]
    fn calabi_croke_is_figure_eight() {
        let c = exact(catalog::calabi_croke());
        assert!((c.length - 3f64.sqrt()).abs() < 1e-12);
        let cl = c.classification.unwrap();
        assert_eq!(cl.kind, ProjectionKind::FigureEight);
        assert_eq!(cl.region_branch_counts, vec![1, 1, 1]);
    }

    #[test]
    fn pillowcase_is_simple() {
        let c = exact(catalog::pillowcase_l1());
        assert!((c.length - 2.0).abs() < 1e-12);
        let cl = c.classification.unwrap();
        assert_eq!(cl.kind, ProjectionKind::SimpleTwoTwo);
        assert!(cl.consistent);
    }

    #[test]
    fn tetrahedral_regions() {
        let c = exact(catalog::tetrahedral());
        assert!((c.length - 2.0).abs() < 1e-12);
        let cl = c.classification.unwrap();
        assert!(cl.consistent);
        assert!(cl.region_branch_counts.iter().all(|&k| (1..=2).contains(&k)));
    }

    #[test]
    fn tori() {
        let c = exact(catalog::torus_equilateral());
        assert!((c.length - 1.0).abs() < 1e-12);
        let c = exact(catalog::torus_linf());
        assert!((c.length - 1.0).abs() < 1e-12);
    }

    #[test]
    fn marked_pairs_can_win() {
        // unit square torus cut at x = 0.3, both vertex classes marked
        use crate::surface::{GluingSpec, SurfaceDescription, SurfacePoint};
        let v = Vec2::new;
        let g = |a: [usize; 2], b: [usize; 2]| GluingSpec { a, b, linear: None };
        let d = SurfaceDescription {
            label: "split_square".into(),
            metric_class: MetricClass::Riemannian,
            norm: crate::geometry::Norm::Euclidean.to_literal(),
            polygons: vec![
                vec![v(0.0, 0.0), v(0.3, 0.0), v(0.3, 1.0), v(0.0, 1.0)],
                vec![v(0.3, 0.0), v(1.0, 0.0), v(1.0, 1.0), v(0.3, 1.0)],
            ],
            gluings: vec![g([0, 1], [1, 3]), g([1, 1], [0, 3]), g([0, 0], [0, 2]), g([1, 0], [1, 2])],
            marked_points: vec![
                SurfacePoint { polygon: 0, point: v(0.0, 0.0) },
                SurfacePoint { polygon: 0, point: v(0.3, 0.0) },
            ],
        };
        let c = exact(d);
        assert!((c.length - 0.6).abs() < 1e-12);
        assert!(matches!(c.witness, Witness::MarkedPair { .. }));
    }

    #[test]
    fn both_methods_agree() {
        let s = catalog::calabi_croke().build().unwrap();
        let opts = SystoleOptions {
            method: Method::Both,
            discrete: DiscreteOptions { eps: 0.04, ..DiscreteOptions::default() },
            ..SystoleOptions::default()
        };
        let r = marked_systole(&s, &opts).unwrap();
        assert!(r.relative_gap.unwrap() < 1e-6);
    }
}
