//! Canonical surfaces and generated families.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::geometry::{Norm, Vec2};
use crate::surface::{GluingSpec, MetricClass, SurfaceDescription, SurfacePoint};

const S3: f64 = 1.732_050_807_568_877_2;

fn v(x: f64, y: f64) -> Vec2 {
    Vec2::new(x, y)
}

fn glue(p: usize, i: usize, q: usize, j: usize) -> GluingSpec {
    GluingSpec { a: [p, i], b: [q, j], linear: None }
}

fn mark(polygon: usize, point: Vec2) -> SurfacePoint {
    SurfacePoint { polygon, point }
}

fn reflect(p: Vec2) -> Vec2 {
    v(p.x, -p.y)
}

/// Two copies of a convex polygon glued along their boundaries. The second
/// copy is the mirror image in the x-axis; every vertex is marked.
pub fn doubled_polygon(label: &str, face: &[Vec2], norm: Norm, class: MetricClass) -> SurfaceDescription {
    let n = face.len();
    let back: Vec<Vec2> = (0..n).map(|k| reflect(face[(n - k) % n])).collect();
    let gluings = (0..n).map(|i| glue(0, i, 1, n - 1 - i)).collect();
    SurfaceDescription {
        label: label.into(),
        metric_class: class,
        norm: norm.to_literal(),
        polygons: vec![face.to_vec(), back],
        gluings,
        marked_points: face.iter().map(|&p| mark(0, p)).collect(),
    }
}

/// Doubled unit equilateral triangle.
pub fn calabi_croke() -> SurfaceDescription {
    doubled_polygon(
        "calabi_croke",
        &[v(0.0, 0.0), v(1.0, 0.0), v(0.5, S3 / 2.0)],
        Norm::Euclidean,
        MetricClass::Riemannian,
    )
}

/// Net of the unit regular tetrahedron inside an equilateral triangle of side 2.
pub fn tetrahedral() -> SurfaceDescription {
    let a = v(0.0, 0.0);
    let b = v(2.0, 0.0);
    let c = v(1.0, S3);
    let mab = v(1.0, 0.0);
    let mbc = v(1.5, S3 / 2.0);
    let mca = v(0.5, S3 / 2.0);
    SurfaceDescription {
        label: "tetrahedral".into(),
        metric_class: MetricClass::Riemannian,
        norm: Norm::Euclidean.to_literal(),
        polygons: vec![vec![a, mab, mca], vec![mab, b, mbc], vec![mca, mbc, c], vec![mab, mbc, mca]],
        gluings: vec![
            glue(3, 0, 1, 2),
            glue(3, 1, 2, 0),
            glue(3, 2, 0, 1),
            glue(0, 0, 1, 0),
            glue(1, 1, 2, 1),
            glue(2, 2, 0, 2),
        ],
        marked_points: vec![mark(0, a), mark(0, mab), mark(0, mca), mark(1, mbc)],
    }
}

/// Doubled square of unit ℓ¹ side, drawn as the diamond with diagonal `[0,1]`.
pub fn pillowcase_with_norm(norm: Norm, class: MetricClass) -> SurfaceDescription {
    doubled_polygon(
        "pillowcase_l1",
        &[v(0.0, 0.0), v(0.5, -0.5), v(1.0, 0.0), v(0.5, 0.5)],
        norm,
        class,
    )
}

pub fn pillowcase_l1() -> SurfaceDescription {
    pillowcase_with_norm(Norm::l1(), MetricClass::ReversibleFinsler)
}

/// Parallelogram spanned by `u`, `w` with opposite sides identified.
pub fn lattice_torus(label: &str, u: Vec2, w: Vec2, norm: Norm, class: MetricClass) -> SurfaceDescription {
    let o = Vec2::ZERO;
    SurfaceDescription {
        label: label.into(),
        metric_class: class,
        norm: norm.to_literal(),
        polygons: vec![vec![o, u, u + w, w]],
        gluings: vec![glue(0, 0, 0, 2), glue(0, 1, 0, 3)],
        marked_points: Vec::new(),
    }
}

pub fn square_torus(norm: Norm, class: MetricClass) -> SurfaceDescription {
    lattice_torus("square_torus", v(1.0, 0.0), v(0.0, 1.0), norm, class)
}

pub fn torus_equilateral() -> SurfaceDescription {
    lattice_torus("torus_equilateral", v(1.0, 0.0), v(0.5, S3 / 2.0), Norm::Euclidean, MetricClass::Riemannian)
}

pub fn torus_linf() -> SurfaceDescription {
    lattice_torus("torus_linf", v(1.0, 0.0), v(0.0, 1.0), Norm::linf(), MetricClass::ReversibleFinsler)
}

/// ℓ¹ torus on the lattice spanned by `(1,1)` and `(1,−1)`.
pub fn torus_l1_diagonal() -> SurfaceDescription {
    lattice_torus("torus_l1_diagonal", v(1.0, -1.0), v(1.0, 1.0), Norm::l1(), MetricClass::ReversibleFinsler)
}

pub fn torus_triangle_norm() -> SurfaceDescription {
    lattice_torus(
        "torus_triangle_norm",
        v(1.0, 0.0),
        v(0.0, 1.0),
        Norm::triangle(),
        MetricClass::NonreversibleFinsler,
    )
}

/// Regular hexagon of circumradius `r` with opposite sides identified.
pub fn hexagon_torus(r: f64) -> SurfaceDescription {
    let verts: Vec<Vec2> = (0..6)
        .map(|k| {
            let t = k as f64 * std::f64::consts::PI / 3.0;
            v(r * t.cos(), r * t.sin())
        })
        .collect();
    SurfaceDescription {
        label: "hexagon_torus".into(),
        metric_class: MetricClass::Riemannian,
        norm: Norm::Euclidean.to_literal(),
        polygons: vec![verts],
        gluings: (0..3).map(|i| glue(0, i, 0, i + 3)).collect(),
        marked_points: Vec::new(),
    }
}

/// The shipped canonical surfaces, keyed by file stem.
pub fn canonical() -> Vec<(&'static str, SurfaceDescription)> {
    vec![
        ("calabi_croke", calabi_croke()),
        ("tetrahedral", tetrahedral()),
        ("pillowcase_l1", pillowcase_l1()),
        ("torus_equilateral", torus_equilateral()),
        ("torus_linf", torus_linf()),
        ("torus_triangle_norm", torus_triangle_norm()),
    ]
}

fn div_floor(a: i64, b: i64) -> i64 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

/// Coset representatives of `Z² / M Z²`, each reduced into the half-open
/// fundamental parallelogram of the columns of `m`.
pub fn coset_representatives(m: [[i64; 2]; 2]) -> Result<Vec<[i64; 2]>> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det == 0 {
        return Err(Error::Config("refinement matrix is singular".into()));
    }
    let reduce = |r: [i64; 2]| -> [i64; 2] {
        // x = adj(M)·r / det, floor componentwise
        let x0 = m[1][1] * r[0] - m[0][1] * r[1];
        let x1 = -m[1][0] * r[0] + m[0][0] * r[1];
        let f0 = div_floor(x0, det);
        let f1 = div_floor(x1, det);
        [r[0] - m[0][0] * f0 - m[0][1] * f1, r[1] - m[1][0] * f0 - m[1][1] * f1]
    };
    let n = det.abs();
    let mut reps = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            reps.insert(reduce([i, j]));
        }
    }
    let reps: Vec<[i64; 2]> = reps.into_iter().collect();
    debug_assert_eq!(reps.len() as i64, n);
    Ok(reps)
}

/// Torus `R²/Λ` with the points of a finer lattice `Λ' ⊃ Λ` marked.
///
/// `Λ'` is spanned by `(u, w)` (counterclockwise) and `Λ` by the columns of
/// `m` in that basis. The torus is tiled by `|det m|` translates of the `Λ'`
/// cell, one per marked point.
pub fn marked_lattice_torus(
    label: &str,
    u: Vec2,
    w: Vec2,
    m: [[i64; 2]; 2],
    norm: Norm,
    class: MetricClass,
) -> Result<SurfaceDescription> {
    if u.cross(w) <= 0.0 {
        return Err(Error::Config("refinement basis must be counterclockwise".into()));
    }
    let reps = coset_representatives(m)?;
    let index = |r: [i64; 2]| -> usize {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let x0 = m[1][1] * r[0] - m[0][1] * r[1];
        let x1 = -m[1][0] * r[0] + m[0][0] * r[1];
        let (f0, f1) = (div_floor(x0, det), div_floor(x1, det));
        let red = [r[0] - m[0][0] * f0 - m[0][1] * f1, r[1] - m[1][0] * f0 - m[1][1] * f1];
        reps.binary_search(&red).expect("reduced vector is a representative")
    };
    let pos = |r: [i64; 2]| u * r[0] as f64 + w * r[1] as f64;
    let mut polygons = Vec::with_capacity(reps.len());
    let mut gluings = Vec::new();
    let mut marked_points = Vec::new();
    for (k, &r) in reps.iter().enumerate() {
        let o = pos(r);
        polygons.push(vec![o, o + u, o + u + w, o + w]);
        marked_points.push(mark(k, o));
        gluings.push(glue(k, 1, index([r[0] + 1, r[1]]), 3));
        gluings.push(glue(k, 2, index([r[0], r[1] + 1]), 0));
    }
    Ok(SurfaceDescription {
        label: label.into(),
        metric_class: class,
        norm: norm.to_literal(),
        polygons,
        gluings,
        marked_points,
    })
}

/// Near-uniform grid of `m` points in the open unit square.
pub fn grid_points(m: usize) -> Vec<Vec2> {
    if m == 0 {
        return Vec::new();
    }
    let rows = ((m as f64).sqrt().round() as usize).max(1);
    let mut out = Vec::with_capacity(m);
    for row in 0..rows {
        let count = m / rows + usize::from(row < m % rows);
        let y = (row as f64 + 0.5) / rows as f64;
        for c in 0..count {
            out.push(v((c as f64 + 0.5) / count as f64, y));
        }
    }
    out
}

/// Triangulation of the unit square with the given interior points as
/// vertices, by successive point insertion. Returns vertex positions (the
/// four corners first) and counterclockwise triangles.
pub fn triangulate_square(interior: &[Vec2]) -> (Vec<Vec2>, Vec<[usize; 3]>) {
    const ON_EDGE: f64 = 1e-12;
    let mut pts = vec![v(0.0, 0.0), v(1.0, 0.0), v(1.0, 1.0), v(0.0, 1.0)];
    let mut tris: Vec<[usize; 3]> = vec![[0, 1, 2], [0, 2, 3]];
    for &p in interior {
        let idx = pts.len();
        pts.push(p);
        let bary = |t: &[usize; 3]| -> [f64; 3] {
            let [a, b, c] = t.map(|i| pts[i]);
            let area = (b - a).cross(c - a);
            [(b - p).cross(c - p) / area, (c - p).cross(a - p) / area, (a - p).cross(b - p) / area]
        };
        let (ti, w) = tris
            .iter()
            .enumerate()
            .map(|(k, t)| (k, bary(t)))
            .find(|(_, w)| w.iter().all(|&x| x >= -ON_EDGE))
            .expect("point lies in the square");
        let t = tris[ti];
        match w.iter().position(|&x| x.abs() <= ON_EDGE) {
            None => {
                tris.swap_remove(ti);
                tris.push([t[0], t[1], idx]);
                tris.push([t[1], t[2], idx]);
                tris.push([t[2], t[0], idx]);
            }
            Some(z) => {
                // on the edge opposite vertex z
                let (a, b) = (t[(z + 1) % 3], t[(z + 2) % 3]);
                let mut split = vec![ti];
                if let Some(other) =
                    tris.iter().position(|s| (0..3).any(|i| s[i] == b && s[(i + 1) % 3] == a))
                {
                    split.push(other);
                }
                let mut fresh = Vec::new();
                for &k in &split {
                    let s = tris[k];
                    let i = (0..3).find(|&i| !(s[i] == a || s[i] == b)).expect("triangle has an apex");
                    let (x, y) = (s[(i + 1) % 3], s[(i + 2) % 3]);
                    fresh.push([s[i], x, idx]);
                    fresh.push([s[i], idx, y]);
                }
                split.sort_unstable();
                for &k in split.iter().rev() {
                    tris.swap_remove(k);
                }
                tris.extend(fresh);
            }
        }
    }
    (pts, tris)
}

/// Doubled unit square (euclidean) with `k ≥ 4` marked points: the four
/// corners and `k − 4` points on near-uniform grids in the two faces.
pub fn marked_doubled_square(k: usize) -> Result<SurfaceDescription> {
    if k < 4 {
        return Err(Error::Config(format!("doubled square needs at least 4 marked points, got {k}")));
    }
    let extra = k - 4;
    let front_pts = grid_points(extra / 2 + extra % 2);
    let back_pts = grid_points(extra / 2);
    let (fp, ft) = triangulate_square(&front_pts);
    let (bp, bt) = triangulate_square(&back_pts);

    let mut polygons: Vec<Vec<Vec2>> = Vec::new();
    let mut marked_points = Vec::new();
    let mut gluings = Vec::new();
    // (face, a, b) -> (polygon, edge) for directed triangle edges
    let mut edges: Vec<((usize, usize, usize), (usize, usize))> = Vec::new();
    for (face, pts, tris) in [(0usize, &fp, &ft), (1, &bp, &bt)] {
        let mut seen = vec![false; pts.len()];
        for t in tris.iter() {
            let poly_id = polygons.len();
            let corners: Vec<Vec2> = if face == 0 {
                t.iter().map(|&i| pts[i]).collect()
            } else {
                [t[0], t[2], t[1]].iter().map(|&i| reflect(pts[i])).collect()
            };
            let order = if face == 0 { [t[0], t[1], t[2]] } else { [t[0], t[2], t[1]] };
            for e in 0..3 {
                edges.push(((face, order[e], order[(e + 1) % 3]), (poly_id, e)));
                let vi = order[e];
                let skip_corner = face == 1 && vi < 4;
                if !seen[vi] && !skip_corner {
                    seen[vi] = true;
                    marked_points.push(mark(poly_id, corners[e]));
                }
            }
            polygons.push(corners);
        }
    }
    edges.sort_by_key(|(key, _)| *key);
    let find = |key: (usize, usize, usize)| -> (usize, usize) {
        let k = edges.binary_search_by_key(&key, |(x, _)| *x).expect("edge exists");
        edges[k].1
    };
    for &((face, a, b), (p, i)) in &edges {
        let boundary = a < 4 && b < 4 && (a + 1) % 4 == b || a < 4 && b < 4 && (b + 1) % 4 == a;
        if boundary {
            if face == 0 {
                // mirrored side appears with the same orientation in the back face
                let (q, j) = find((1, b, a));
                gluings.push(glue(p, i, q, j));
            }
        } else if a < b {
            let (q, j) = find((face, b, a));
            gluings.push(glue(p, i, q, j));
        }
    }
    Ok(SurfaceDescription {
        label: format!("doubled_square_k{k}"),
        metric_class: MetricClass::Riemannian,
        norm: Norm::Euclidean.to_literal(),
        polygons,
        gluings,
        marked_points,
    })
}
