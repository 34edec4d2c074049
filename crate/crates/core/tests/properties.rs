use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use systole_core::catalog;
use systole_core::covers::build_degree3_cover;
use systole_core::geometry::{convex_hull, minkowski_functional, polar_body, random, ConvexPolygon, Norm, Vec2};
use systole_core::lattice::{brute_force_systole, lattice_systole, Lattice};
use systole_core::loops::{segments_length, straighten, trace_polyline};
use systole_core::surface::{MetricClass, SurfacePoint};
use systole_core::words::{inverse, is_admissible, HomotopyWord};

fn norm_from_seed(seed: u64, symmetric: bool) -> Norm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if symmetric {
        random::symmetric_ball(&mut rng)
    } else {
        random::asymmetric_ball(&mut rng)
    }
}

fn vec2() -> impl Strategy<Value = Vec2> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y)| Vec2::new(x, y))
}

fn lattice() -> impl Strategy<Value = Lattice> {
    (0.3..3.0f64, -2.0..2.0f64, 0.3..3.0f64, 0.0..PI)
        .prop_map(|(a, shear, h, rot)| {
            let (c, s) = (rot.cos(), rot.sin());
            let r = |v: Vec2| Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y);
            Lattice::new(r(Vec2::new(a, 0.0)), r(Vec2::new(shear, h))).unwrap()
        })
}

proptest! {
    #[test]
    fn norm_is_homogeneous_and_subadditive(seed in any::<u64>(), sym in any::<bool>(), u in vec2(), v in vec2(), t in 0.01..50.0f64) {
        let n = norm_from_seed(seed, sym);
        prop_assert!((n.eval(u * t) - t * n.eval(u)).abs() <= 1e-9 * (1.0 + t * n.eval(u)));
        prop_assert!(n.eval(u + v) <= n.eval(u) + n.eval(v) + 1e-9);
        if sym {
            prop_assert!((n.eval(-u) - n.eval(u)).abs() <= 1e-9 * (1.0 + n.eval(u)));
        }
    }

    #[test]
    fn polar_of_polar_is_the_ball(seed in any::<u64>(), sym in any::<bool>()) {
        let n = norm_from_seed(seed, sym);
        let ball = n.ball().unwrap();
        let back = polar_body(&polar_body(ball).unwrap()).unwrap();
        for k in 0..32 {
            let th = k as f64 * PI / 16.0 + 0.01;
            let d = Vec2::new(th.cos(), th.sin());
            let a = minkowski_functional(ball, d).unwrap();
            let b = minkowski_functional(&back, d).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a);
        }
    }

    #[test]
    fn certified_systole_matches_scan(lat in lattice(), seed in any::<u64>(), sym in any::<bool>()) {
        let n = norm_from_seed(seed, sym);
        let scan = brute_force_systole(&lat, &n, 12);
        prop_assert_eq!(lattice_systole(&lat, &n).length, scan.length);
    }

    #[test]
    fn systole_scales_with_the_lattice(lat in lattice(), seed in any::<u64>(), t in 0.1..10.0f64) {
        let n = norm_from_seed(seed, false);
        let a = lattice_systole(&lat, &n).length;
        let b = lattice_systole(&lat.scaled(t).unwrap(), &n).length;
        prop_assert!((b - t * a).abs() <= 1e-9 * t * a);
    }
}

fn convex_face() -> impl Strategy<Value = Vec<Vec2>> {
    prop::collection::vec((0.0..2.0 * PI, 0.5..2.0f64), 3..9).prop_filter_map("degenerate face", |pts| {
        let pts: Vec<Vec2> = pts.iter().map(|&(a, r)| Vec2::new(r * a.cos(), r * a.sin())).collect();
        let hull = convex_hull(&pts);
        let poly = ConvexPolygon::new(hull.clone()).ok()?;
        let ok = hull.len() >= 3
            && poly.area() > 0.1
            && (0..hull.len()).all(|i| poly.interior_angle(i) < PI - 0.05 && hull[i].dist(hull[(i + 1) % hull.len()]) > 0.05);
        ok.then_some(hull)
    })
}

fn segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let t = ((p - a).dot(b - a) / (b - a).dot(b - a)).clamp(0.0, 1.0);
    p.dist(a.lerp(b, t))
}

fn gauss_bonnet_defect(s: &systole_core::surface::ConeSurface) -> f64 {
    let curvature: f64 = s.vertex_classes().iter().map(|c| 2.0 * PI - c.angle).sum();
    curvature - 2.0 * PI * s.euler_characteristic() as f64
}

proptest! {
    #[test]
    fn doubled_polygons_satisfy_gauss_bonnet(face in convex_face()) {
        let s = catalog::doubled_polygon("face", &face, Norm::Euclidean, MetricClass::Riemannian).build().unwrap();
        prop_assert_eq!(s.euler_characteristic(), 2);
        prop_assert!(gauss_bonnet_defect(&s).abs() <= 1e-9);
        let area = ConvexPolygon::new(face).unwrap().area();
        prop_assert!((s.euclidean_area() - 2.0 * area).abs() <= 1e-9 * area);
        prop_assert!((s.surface_area() - s.euclidean_area()).abs() <= 1e-9 * area);
    }

    #[test]
    fn tori_are_flat(lat in lattice(), seed in any::<u64>()) {
        let [u, w] = lat.basis();
        let norm = norm_from_seed(seed, false);
        let factor = norm.ht_area_factor().value();
        let s = catalog::lattice_torus("t", u, w, norm, MetricClass::NonreversibleFinsler).build().unwrap();
        prop_assert_eq!(s.euler_characteristic(), 0);
        prop_assert!(gauss_bonnet_defect(&s).abs() <= 1e-9);
        prop_assert!((s.euclidean_area() - lat.covolume()).abs() <= 1e-9 * lat.covolume());
        prop_assert!((s.surface_area() - factor * lat.covolume()).abs() <= 1e-9 * lat.covolume());
    }

    #[test]
    fn projection_preserves_length(x in 0.05..0.95f64, y in 0.05..0.95f64, len in 0.05..1.5f64, th in 0.0..2.0 * PI) {
        let base = catalog::calabi_croke().build().unwrap();
        let cover = build_degree3_cover(&base).unwrap();
        let [r1, r2] = cover.lattice().reduced();
        let a = r1 * x + r2 * y;
        let b = a + Vec2::new(th.cos(), th.sin()) * len;
        let near_branch = cover.ramification_points().iter().any(|r| {
            (-3..=3).any(|i| (-3..=3).any(|j| segment_distance(r.position + r1 * i as f64 + r2 * j as f64, a, b) < 1e-6))
        });
        prop_assume!(!near_branch);
        let segs = cover.project_path(&[a, b]).unwrap();
        prop_assert!((segments_length(base.norm(), &segs) - len).abs() <= 1e-9);
    }
}

fn word(rank: usize) -> impl Strategy<Value = Vec<i32>> {
    prop::collection::vec((1..=rank as i32, any::<bool>()).prop_map(|(g, neg)| if neg { -g } else { g }), 0..8)
}

proptest! {
    #[test]
    fn admissibility_is_conjugation_invariant(w in word(3), u in word(3)) {
        let conj: Vec<i32> = u.iter().chain(&w).chain(&inverse(&u)).copied().collect();
        let a = is_admissible(&HomotopyWord::new(&w, 3));
        prop_assert_eq!(a, is_admissible(&HomotopyWord::new(&conj, 3)));
        prop_assert_eq!(a, is_admissible(&HomotopyWord::new(&inverse(&w), 3)));
    }

    #[test]
    fn puncture_loops_are_not_admissible(g in 0usize..4, n in 1usize..4, u in word(3)) {
        // four punctures: three generators and the inverse of their product
        let p = if g < 3 { vec![g as i32 + 1] } else { HomotopyWord::last_generator(3) };
        let pow: Vec<i32> = p.iter().copied().cycle().take(n * p.len()).collect();
        let conj: Vec<i32> = u.iter().chain(&pow).chain(&inverse(&u)).copied().collect();
        prop_assert!(!is_admissible(&HomotopyWord::new(&conj, 3)));
    }

    #[test]
    fn straightening_never_lengthens(pts in prop::collection::vec((0.05..0.95f64, 0.05..0.95f64), 1..5), sym in any::<bool>(), seed in any::<u64>()) {
        // a polyline through random points of the unit square torus,
        // closing up after one horizontal turn
        let norm = norm_from_seed(seed, sym);
        let class = if sym { MetricClass::ReversibleFinsler } else { MetricClass::NonreversibleFinsler };
        let s = catalog::square_torus(norm.clone(), class).build().unwrap();
        let mut stops: Vec<Vec2> = pts.iter().enumerate().map(|(i, &(x, y))| Vec2::new(x + i as f64, y)).collect();
        stops.push(stops[0] + Vec2::new(pts.len() as f64, 0.0));
        let moves: Vec<Vec2> = stops.windows(2).map(|w| w[1] - w[0]).collect();
        let start = SurfacePoint { polygon: 0, point: stops[0] };
        let lp = trace_polyline(&s, start, &moves).unwrap();
        let st = straighten(&s, &lp).unwrap();
        prop_assert!(st.history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        // no loop in the class of n horizontal turns is shorter than the straight one
        let n = pts.len() as f64;
        prop_assert!(st.length >= norm.eval(Vec2::new(n, 0.0)) - 1e-9);
    }
}
