//! Cut graphs on the 1-skeleton. Every vertex of the cut graph is a marked
//! point and its complement is a disk, so the sequence of cut edges crossed by
//! a loop is a word in a free basis of the punctured surface group.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::surface::{ConeSurface, EdgeRef};
use crate::words::HomotopyWord;

#[derive(Debug, Clone)]
pub struct CutSystem {
    /// One side of each cut edge; its direction is the arc direction.
    arcs: Vec<EdgeRef>,
    /// Letter for leaving polygon `p` through edge `i`, if that edge is cut.
    exit_letter: Vec<Vec<Option<i32>>>,
    /// Puncture word for every vertex class.
    peripherals: Vec<Vec<i32>>,
}

impl CutSystem {
    /// Tree–cotree cut graph. Requires every vertex class to be marked, except
    /// that a lone vertex class is accepted unmarked.
    pub fn new(surface: &ConeSurface) -> Result<CutSystem> {
        let classes = surface.vertex_classes().len();
        if surface.marked_points().iter().any(|m| m.vertex_class.is_none()) {
            return Err(Error::UnsupportedBase(
                "marked point inside a polygon; subdivide so that marked points are vertices".into(),
            ));
        }
        if classes > 1 {
            if let Some(c) = (0..classes).find(|&c| !surface.is_marked_class(c)) {
                return Err(Error::UnsupportedBase(format!(
                    "vertex class {c} is not marked; cut graphs need every vertex marked"
                )));
            }
        }
        let polys = surface.polygons();
        // canonical edge list
        let mut edges = Vec::new();
        for (p, poly) in polys.iter().enumerate() {
            for i in 0..poly.len() {
                let e = EdgeRef { polygon: p, edge: i };
                if e <= surface.partner(p, i) {
                    edges.push(e);
                }
            }
        }
        let canon = |p: usize, i: usize| -> EdgeRef {
            let e = EdgeRef { polygon: p, edge: i };
            e.min(surface.partner(p, i))
        };
        let ends = |e: EdgeRef| -> (usize, usize) {
            (surface.corner_class(e.polygon, e.edge), surface.corner_class(e.polygon, e.edge + 1))
        };

        // spanning tree of the vertex graph
        let mut in_tree = vec![false; edges.len()];
        let mut seen = vec![false; classes];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(c) = queue.pop_front() {
            for (k, &e) in edges.iter().enumerate() {
                let (a, b) = ends(e);
                let other = if a == c { b } else if b == c { a } else { continue };
                if !seen[other] {
                    seen[other] = true;
                    in_tree[k] = true;
                    queue.push_back(other);
                }
            }
        }

        // spanning tree of the dual graph avoiding the primal tree
        let mut in_cotree = vec![false; edges.len()];
        let mut reached = vec![false; polys.len()];
        reached[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(p) = queue.pop_front() {
            for i in 0..polys[p].len() {
                let e = canon(p, i);
                let k = edges.binary_search(&e).expect("canonical edge is listed");
                if in_tree[k] {
                    continue;
                }
                let q = surface.partner(p, i).polygon;
                if !reached[q] {
                    reached[q] = true;
                    in_cotree[k] = true;
                    queue.push_back(q);
                }
            }
        }

        let arcs: Vec<EdgeRef> =
            edges.iter().enumerate().filter(|&(k, _)| !in_cotree[k]).map(|(_, &e)| e).collect();
        let mut exit_letter: Vec<Vec<Option<i32>>> = polys.iter().map(|p| vec![None; p.len()]).collect();
        for (a, &e) in arcs.iter().enumerate() {
            let letter = a as i32 + 1;
            exit_letter[e.polygon][e.edge] = Some(letter);
            let o = surface.partner(e.polygon, e.edge);
            exit_letter[o.polygon][o.edge] = Some(-letter);
        }

        let mut cuts = CutSystem { arcs, exit_letter, peripherals: Vec::new() };
        cuts.peripherals = (0..classes).map(|c| cuts.walk_around(surface, c)).collect();
        Ok(cuts)
    }

    fn walk_around(&self, surface: &ConeSurface, class: usize) -> Vec<i32> {
        let start = surface.vertex_classes()[class].corners[0];
        let (mut p, mut i) = start;
        let mut word = Vec::new();
        loop {
            let n = surface.polygon(p).len();
            let e = (i + n - 1) % n;
            if let Some(x) = self.exit_letter[p][e] {
                word.push(x);
            }
            let next = surface.partner(p, e);
            p = next.polygon;
            i = next.edge;
            if (p, i) == start {
                break;
            }
        }
        word
    }

    pub fn rank(&self) -> usize {
        self.arcs.len()
    }

    pub fn arcs(&self) -> &[EdgeRef] {
        &self.arcs
    }

    pub fn exit_letter(&self, p: usize, i: usize) -> Option<i32> {
        self.exit_letter[p][i]
    }

    /// Loop around each vertex class, in class order.
    pub fn peripherals(&self) -> &[Vec<i32>] {
        &self.peripherals
    }

    /// Word of a cyclic sequence of edge exits.
    pub fn word_of_exits(&self, exits: impl IntoIterator<Item = (usize, usize)>) -> HomotopyWord {
        let letters: Vec<i32> = exits.into_iter().filter_map(|(p, i)| self.exit_letter[p][i]).collect();
        HomotopyWord::new(&letters, self.rank())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::words::{cyclic_reduce, is_admissible_in};

    #[test]
    fn ranks_match_punctured_groups() {
        let cc = catalog::calabi_croke().build().unwrap();
        assert_eq!(CutSystem::new(&cc).unwrap().rank(), 2);
        let tet = catalog::tetrahedral().build().unwrap();
        assert_eq!(CutSystem::new(&tet).unwrap().rank(), 3);
        let torus = catalog::torus_equilateral().build().unwrap();
        assert_eq!(CutSystem::new(&torus).unwrap().rank(), 2);
        let k9 = catalog::marked_doubled_square(9).unwrap().build().unwrap();
        assert_eq!(CutSystem::new(&k9).unwrap().rank(), 8);
    }

    #[test]
    fn puncture_words_multiply_to_identity_on_spheres() {
        let tet = catalog::tetrahedral().build().unwrap();
        let cuts = CutSystem::new(&tet).unwrap();
        for p in cuts.peripherals() {
            assert!(!cyclic_reduce(p).is_empty());
        }
        let total: usize = cuts.peripherals().iter().map(|p| p.len()).sum();
        assert_eq!(total, 2 * cuts.rank());
    }

    #[test]
    fn unmarked_vertex_is_rejected() {
        let mut d = catalog::tetrahedral();
        d.marked_points.pop();
        let s = d.build().unwrap();
        assert!(matches!(CutSystem::new(&s), Err(Error::UnsupportedBase(_))));
    }

    #[test]
    fn torus_single_vertex_word_is_commutator() {
        let torus = catalog::torus_equilateral().build().unwrap();
        let cuts = CutSystem::new(&torus).unwrap();
        let p = HomotopyWord::new(&cuts.peripherals()[0], 2);
        assert_eq!(p.len(), 4);
        assert!(!is_admissible_in(&p, cuts.peripherals()));
    }
}
