//! Planar lattices and shortest vectors for arbitrary convex norms.

use crate::error::{Error, Result};
use crate::geometry::{Norm, Vec2};

/// Relative tolerance under which two norm values count as tied.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    basis: [Vec2; 2],
    reduced: [Vec2; 2],
    /// Columns give the reduced vectors in input coordinates.
    to_input: [[i64; 2]; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeVector {
    pub coeffs: [i64; 2],
    pub vector: Vec2,
    pub length: f64,
}

impl Lattice {
    pub fn new(b1: Vec2, b2: Vec2) -> Result<Lattice> {
        let det = b1.cross(b2);
        if !det.is_finite() || det.abs() <= 1e-14 * (b1.length() * b2.length()).max(1e-300) {
            return Err(Error::Degenerate("lattice basis is linearly dependent".into()));
        }
        let (mut r1, mut r2) = (b1, b2);
        let (mut u1, mut u2) = ([1i64, 0], [0i64, 1]);
        loop {
            if r1.dot(r1) > r2.dot(r2) {
                std::mem::swap(&mut r1, &mut r2);
                std::mem::swap(&mut u1, &mut u2);
            }
            let mu = (r1.dot(r2) / r1.dot(r1)).round();
            if mu == 0.0 {
                break;
            }
            let m = mu as i64;
            r2 = r2 - r1 * mu;
            u2 = [u2[0] - m * u1[0], u2[1] - m * u1[1]];
        }
        Ok(Lattice { basis: [b1, b2], reduced: [r1, r2], to_input: [[u1[0], u2[0]], [u1[1], u2[1]]] })
    }

    pub fn basis(&self) -> [Vec2; 2] {
        self.basis
    }

    /// Gauss-reduced basis.
    pub fn reduced(&self) -> [Vec2; 2] {
        self.reduced
    }

    pub fn covolume(&self) -> f64 {
        self.basis[0].cross(self.basis[1]).abs()
    }

    pub fn point(&self, c: [i64; 2]) -> Vec2 {
        self.basis[0] * c[0] as f64 + self.basis[1] * c[1] as f64
    }

    pub fn scaled(&self, t: f64) -> Result<Lattice> {
        Lattice::new(self.basis[0] * t, self.basis[1] * t)
    }

    fn reduced_to_input(&self, d: [i64; 2]) -> [i64; 2] {
        let u = &self.to_input;
        [u[0][0] * d[0] + u[0][1] * d[1], u[1][0] * d[0] + u[1][1] * d[1]]
    }

    /// Reduced-basis coordinates of `x`.
    fn reduced_coords(&self, x: Vec2) -> (f64, f64) {
        let [r1, r2] = self.reduced;
        let det = r1.cross(r2);
        (x.cross(r2) / det, r1.cross(x) / det)
    }

    /// Lattice point nearest to `x` in the reduced-basis rounding sense.
    pub fn round(&self, x: Vec2) -> [i64; 2] {
        let (a, b) = self.reduced_coords(x);
        self.reduced_to_input([a.round() as i64, b.round() as i64])
    }

    /// `x` reduced into the half-open fundamental parallelogram of the reduced basis.
    pub fn reduce(&self, x: Vec2) -> Vec2 {
        let (a, b) = self.reduced_coords(x);
        let [r1, r2] = self.reduced;
        x - r1 * a.floor() - r2 * b.floor()
    }

    /// Reduced-coordinate box containing every lattice vector of euclidean
    /// length at most `radius` (Cramer's rule).
    fn box_bounds(&self, radius: f64) -> (i64, i64) {
        let [r1, r2] = self.reduced;
        let det = r1.cross(r2).abs();
        let b1 = (radius * r2.length() / det).floor() as i64 + 1;
        let b2 = (radius * r1.length() / det).floor() as i64 + 1;
        (b1, b2)
    }
}

fn pick(candidates: &[LatticeVector]) -> Option<LatticeVector> {
    let best = candidates.iter().map(|c| c.length).fold(f64::INFINITY, f64::min);
    let tol = TIE_TOL * best.max(1.0);
    candidates.iter().filter(|c| c.length <= best + tol).min_by_key(|c| c.coeffs).copied()
}

/// All nonzero lattice vectors whose norm is within the tie tolerance of the minimum.
pub fn lattice_minimizers(lat: &Lattice, norm: &Norm) -> Vec<LatticeVector> {
    let r_max = norm.max_radius();
    let [r1, r2] = lat.reduced;
    let best = norm.eval(r1).min(norm.eval(r2)).min(norm.eval(-r1)).min(norm.eval(-r2));
    let (n1, n2) = lat.box_bounds(best * r_max * (1.0 + 1e-9));
    let mut found = Vec::new();
    for d1 in -n1..=n1 {
        for d2 in -n2..=n2 {
            if d1 == 0 && d2 == 0 {
                continue;
            }
            let coeffs = lat.reduced_to_input([d1, d2]);
            let vector = lat.point(coeffs);
            let length = norm.eval(vector);
            if length <= best * (1.0 + 1e-9) {
                found.push(LatticeVector { coeffs, vector, length });
            }
        }
    }
    let min = found.iter().map(|c| c.length).fold(f64::INFINITY, f64::min);
    let tol = TIE_TOL * min.max(1.0);
    found.retain(|c| c.length <= min + tol);
    found.sort_by_key(|c| c.coeffs);
    found
}

/// Shortest nonzero lattice vector in the norm; ties go to the
/// lexicographically smallest input-basis coefficients.
pub fn lattice_systole(lat: &Lattice, norm: &Norm) -> LatticeVector {
    *lattice_minimizers(lat, norm).first().expect("certified box contains a basis vector")
}

/// Exhaustive scan over input-basis coefficients `|c_i| ≤ bound`.
pub fn brute_force_systole(lat: &Lattice, norm: &Norm, bound: i64) -> LatticeVector {
    let mut all = Vec::new();
    for c1 in -bound..=bound {
        for c2 in -bound..=bound {
            if c1 == 0 && c2 == 0 {
                continue;
            }
            let vector = lat.point([c1, c2]);
            all.push(LatticeVector { coeffs: [c1, c2], vector, length: norm.eval(vector) });
        }
    }
    pick(&all).expect("scan is nonempty")
}

/// Directed distance on the flat torus `R²/L`: `min_t F(q + t − p)`.
pub fn flat_torus_distance(lat: &Lattice, norm: &Norm, p: Vec2, q: Vec2) -> f64 {
    let d = q - p;
    let base = lat.round(d);
    let d0 = d - lat.point(base);
    let [r1, r2] = lat.reduced;
    let mut best = norm.eval(d0);
    for w in [r1, r2, -r1, -r2] {
        best = best.min(norm.eval(d0 + w));
    }
    let (n1, n2) = lat.box_bounds(best * norm.max_radius() * (1.0 + 1e-9) + d0.length());
    for d1 in -n1..=n1 {
        for d2 in -n2..=n2 {
            let t = lat.point(lat.reduced_to_input([d1, d2]));
            best = best.min(norm.eval(d0 + t));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    const S3: f64 = 1.732_050_807_568_877_2;

    fn lat(a: (f64, f64), b: (f64, f64)) -> Lattice {
        Lattice::new(Vec2::new(a.0, a.1), Vec2::new(b.0, b.1)).unwrap()
    }

    #[test]
    fn equilateral_euclidean() {
        let s = lattice_systole(&lat((1.0, 0.0), (0.5, S3 / 2.0)), &Norm::Euclidean);
        assert!((s.length - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_z2_l1() {
        let s = lattice_systole(&lat((2.0, 0.0), (0.0, 2.0)), &Norm::l1());
        assert_eq!(s.length, 2.0);
        assert_eq!(s.coeffs, [-1, 0]);
        let b = brute_force_systole(&lat((2.0, 0.0), (0.0, 2.0)), &Norm::l1(), 3);
        assert_eq!(b, s);
    }

    #[test]
    fn triangle_ball_minimizers() {
        let l = lat((1.0, 0.0), (0.0, 1.0));
        let n = Norm::triangle();
        let mins: Vec<[i64; 2]> = lattice_minimizers(&l, &n).iter().map(|m| m.coeffs).collect();
        assert_eq!(mins, vec![[-1, -1], [0, 1], [1, 0]]);
        assert_eq!(lattice_systole(&l, &n).length, 1.0);
        assert_eq!(n.eval(Vec2::new(-1.0, 0.0)), 2.0);
        assert_eq!(brute_force_systole(&l, &n, 4), lattice_systole(&l, &n));
    }

    #[test]
    fn diagonal_l1() {
        let s = lattice_systole(&lat((1.0, 1.0), (1.0, -1.0)), &Norm::l1());
        assert_eq!(s.length, 2.0);
    }

    #[test]
    fn skewed_basis_is_reduced() {
        let l = lat((1.0, 0.0), (37.0, 1.0));
        let s = lattice_systole(&l, &Norm::Euclidean);
        assert!((s.length - 1.0).abs() < 1e-12);
        let [r1, r2] = l.reduced();
        assert!(r1.length() <= r2.length());
        assert!((r1.cross(r2).abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn torus_distances() {
        let eq = lat((1.0, 0.0), (0.5, S3 / 2.0));
        let p = Vec2::ZERO;
        assert_eq!(flat_torus_distance(&eq, &Norm::Euclidean, p, p), 0.0);
        let bary = Vec2::new(0.5, S3 / 6.0);
        assert!((flat_torus_distance(&eq, &Norm::Euclidean, p, bary) - 1.0 / S3).abs() < 1e-12);
        let z2 = lat((1.0, 0.0), (0.0, 1.0));
        let d = flat_torus_distance(&z2, &Norm::linf(), p, Vec2::new(0.5, 0.5));
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn directed_distance() {
        let z2 = lat((1.0, 0.0), (0.0, 1.0));
        let n = Norm::triangle();
        let x = Vec2::new(1.0 / 3.0, 0.0);
        let there = flat_torus_distance(&z2, &n, Vec2::ZERO, x);
        let back = flat_torus_distance(&z2, &n, x, Vec2::ZERO);
        assert!((there - 1.0 / 3.0).abs() < 1e-12);
        assert!((back - 2.0 / 3.0).abs() < 1e-12);
    }
}
