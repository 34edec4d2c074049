//! Marked systoles by shortest-path search on an ε-net, with homotopy words
//! tracked along paths.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::cuts::CutSystem;
use crate::error::{Error, Result};
use crate::geometry::{Affine2, Vec2};
use crate::loops::{straighten, Crossing, Straightened, SurfaceLoop};
use crate::surface::ConeSurface;
use crate::words::{cyclic_reduce, free_reduce, inverse, is_admissible_in, HomotopyWord};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteOptions {
    pub eps: f64,
    pub word_cap: usize,
    pub node_budget: usize,
    pub state_budget: usize,
    /// Neighbour radius in units of ε.
    pub neighbor_radius: f64,
    /// Basepoint spacing along cut edges in units of ε.
    pub basepoint_spacing: f64,
    /// Candidate classes within `slack · best + margin · ε` of the best graph
    /// length are straightened; the graph overestimates loops that wrap
    /// tightly around marked points by a few ε.
    pub candidate_slack: f64,
    pub candidate_margin: f64,
    pub max_candidates: usize,
}

impl Default for DiscreteOptions {
    fn default() -> Self {
        DiscreteOptions {
            eps: 0.01,
            word_cap: 6,
            node_budget: 500_000,
            state_budget: 4_000_000,
            neighbor_radius: 2.3,
            basepoint_spacing: 8.0,
            candidate_slack: 0.15,
            candidate_margin: 12.0,
            max_candidates: 16,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    polygon: usize,
    pos: Vec2,
}

#[derive(Debug, Clone)]
struct GraphEdge {
    from: u32,
    to: u32,
    weight: f64,
    crossings: Vec<Crossing>,
    letters: Vec<i32>,
}

pub struct NetGraph {
    nodes: Vec<Node>,
    edges: Vec<GraphEdge>,
    out: Vec<Vec<u32>>,
    incoming: Vec<Vec<u32>>,
    grid: HashMap<(usize, i64, i64), u32>,
    eps: f64,
}

impl NetGraph {
    pub fn build(s: &ConeSurface, cuts: &CutSystem, opts: &DiscreteOptions) -> Result<NetGraph> {
        let eps = opts.eps;
        if !(eps > 0.0) {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        let estimate = (s.euclidean_area() / (eps * eps)) as usize;
        if estimate > 2 * opts.node_budget {
            return Err(Error::Budget(format!("about {estimate} nodes exceed the budget {}", opts.node_budget)));
        }
        let mut nodes = Vec::new();
        let mut grid = HashMap::new();
        for (p, poly) in s.polygons().iter().enumerate() {
            let (mut lo, mut hi) = (poly.vertex(0), poly.vertex(0));
            for &v in poly.vertices() {
                lo = Vec2::new(lo.x.min(v.x), lo.y.min(v.y));
                hi = Vec2::new(hi.x.max(v.x), hi.y.max(v.y));
            }
            for i in (lo.x / eps).ceil() as i64..=(hi.x / eps).floor() as i64 {
                for j in (lo.y / eps).ceil() as i64..=(hi.y / eps).floor() as i64 {
                    let pos = Vec2::new(i as f64 * eps, j as f64 * eps);
                    if poly.depth(pos) >= 0.2 * eps {
                        grid.insert((p, i, j), nodes.len() as u32);
                        nodes.push(Node { polygon: p, pos });
                    }
                }
            }
        }
        if nodes.len() > opts.node_budget {
            return Err(Error::Budget(format!("{} nodes exceed the budget {}", nodes.len(), opts.node_budget)));
        }
        let r = opts.neighbor_radius;
        let reach = r.ceil() as i64;
        let stencil: Vec<(i64, i64)> = (-reach..=reach)
            .flat_map(|a| (-reach..=reach).map(move |b| (a, b)))
            .filter(|&(a, b)| (a != 0 || b != 0) && ((a * a + b * b) as f64) <= r * r)
            .collect();

        let mut edges: Vec<GraphEdge> = Vec::new();
        let mut out = vec![Vec::new(); nodes.len()];
        let mut incoming = vec![Vec::new(); nodes.len()];
        let norm = s.norm();
        for (a, node) in nodes.iter().enumerate() {
            let p = node.polygon;
            let poly = s.polygon(p);
            let gi = (node.pos.x / eps).round() as i64;
            let gj = (node.pos.y / eps).round() as i64;
            let near_boundary = poly.depth(node.pos) < (r + 0.5) * eps;
            let mut best: HashMap<u32, (f64, Vec<Crossing>)> = HashMap::new();
            for &(di, dj) in &stencil {
                let end = node.pos + Vec2::new(di as f64 * eps, dj as f64 * eps);
                if poly.contains(end, 0.0) {
                    if let Some(&b) = grid.get(&(p, gi + di, gj + dj)) {
                        best.insert(b, (norm.eval(end - node.pos), Vec::new()));
                    }
                    continue;
                }
                if !near_boundary {
                    continue;
                }
                let Some((q, y, chart)) = walk(s, p, node.pos, end - node.pos) else { continue };
                let key = (q, (y.x / eps).round() as i64, (y.y / eps).round() as i64);
                let Some(&b) = grid.get(&key) else { continue };
                let target = chart.inverse().expect("isometry").apply(nodes[b as usize].pos);
                let Some((q2, _, _)) = walk(s, p, node.pos, target - node.pos) else { continue };
                if q2 != q {
                    continue;
                }
                let crossings = walk_crossings(s, p, node.pos, target - node.pos);
                let w = norm.eval(target - node.pos);
                if best.get(&b).is_none_or(|(old, _)| w < *old) {
                    best.insert(b, (w, crossings));
                }
            }
            let mut targets: Vec<(u32, (f64, Vec<Crossing>))> = best.into_iter().collect();
            targets.sort_by_key(|(b, _)| *b);
            for (b, (weight, crossings)) in targets {
                if b as usize == a {
                    continue;
                }
                let raw: Vec<i32> = crossings.iter().filter_map(|c| cuts.exit_letter(c.polygon, c.edge)).collect();
                let id = edges.len() as u32;
                out[a].push(id);
                incoming[b as usize].push(id);
                edges.push(GraphEdge { from: a as u32, to: b, weight, crossings, letters: free_reduce(&raw) });
            }
        }
        Ok(NetGraph { nodes, edges, out, incoming, grid, eps })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    fn nearest_node(&self, p: usize, x: Vec2, radius: f64) -> Option<u32> {
        let eps = self.eps;
        let reach = (radius / eps).ceil() as i64;
        let (ci, cj) = ((x.x / eps).round() as i64, (x.y / eps).round() as i64);
        let mut best: Option<(f64, u32)> = None;
        for i in ci - reach..=ci + reach {
            for j in cj - reach..=cj + reach {
                if let Some(&n) = self.grid.get(&(p, i, j)) {
                    let d = self.nodes[n as usize].pos.dist(x);
                    if d <= radius && best.is_none_or(|(bd, _)| d < bd) {
                        best = Some((d, n));
                    }
                }
            }
        }
        best.map(|(_, n)| n)
    }
}

const VERTEX_CLEARANCE: f64 = 1e-7;

/// Straight walk from `x` in polygon `p` by displacement `d`, returning the
/// final polygon, end point, and the chart map from `p` to it. `None` when the
/// walk passes too close to a vertex.
fn walk(s: &ConeSurface, p: usize, x: Vec2, d: Vec2) -> Option<(usize, Vec2, Affine2)> {
    let mut p = p;
    let mut x = x;
    let mut d = d;
    let mut chart = Affine2::IDENTITY;
    for _ in 0..8 {
        let poly = s.polygon(p);
        let end = x + d;
        if poly.contains(end, 0.0) {
            return Some((p, end, chart));
        }
        let (_, t1) = poly.clip_segment(x, end)?;
        let hit = x + d * t1;
        if poly.vertices().iter().any(|v| v.dist(hit) < VERTEX_CLEARANCE) {
            return None;
        }
        let edge = exit_edge(s, p, hit);
        let map = *s.transition(p, edge);
        chart = map.compose(&chart);
        x = map.apply(hit);
        d = map.lin.apply(d * (1.0 - t1));
        p = s.partner(p, edge).polygon;
    }
    None
}

fn exit_edge(s: &ConeSurface, p: usize, hit: Vec2) -> usize {
    let poly = s.polygon(p);
    (0..poly.len())
        .min_by(|&i, &j| {
            let off = |k: usize| {
                let (a, b) = poly.edge(k);
                ((b - a).cross(hit - a) / (b - a).length()).abs()
            };
            off(i).total_cmp(&off(j))
        })
        .expect("polygon has edges")
}

fn walk_crossings(s: &ConeSurface, p: usize, x: Vec2, d: Vec2) -> Vec<Crossing> {
    let mut out = Vec::new();
    let (mut p, mut x, mut d) = (p, x, d);
    for _ in 0..8 {
        let poly = s.polygon(p);
        let end = x + d;
        if poly.contains(end, 0.0) {
            break;
        }
        let Some((_, t1)) = poly.clip_segment(x, end) else { break };
        let hit = x + d * t1;
        let edge = exit_edge(s, p, hit);
        let (a, b) = poly.edge(edge);
        let t = (hit - a).dot(b - a) / (b - a).dot(b - a);
        out.push(Crossing { polygon: p, edge, t });
        let map = s.transition(p, edge);
        x = map.apply(hit);
        d = map.lin.apply(d * (1.0 - t1));
        p = s.partner(p, edge).polygon;
    }
    out
}

#[derive(Default)]
struct WordTable {
    words: Vec<Vec<i32>>,
    index: HashMap<Vec<i32>, u32>,
    step: HashMap<(u32, u32, bool), u32>,
}

impl WordTable {
    fn intern(&mut self, w: Vec<i32>) -> u32 {
        if let Some(&id) = self.index.get(&w) {
            return id;
        }
        let id = self.words.len() as u32;
        self.words.push(w.clone());
        self.index.insert(w, id);
        id
    }

    /// Word after traversing edge `eid` forwards, or backwards for inverted
    /// (backward search) words.
    fn step(&mut self, id: u32, eid: u32, forward: bool, e: &GraphEdge) -> u32 {
        if let Some(&r) = self.step.get(&(id, eid, forward)) {
            return r;
        }
        let mut w = self.words[id as usize].clone();
        if forward {
            w.extend_from_slice(&e.letters);
        } else {
            w.extend(inverse(&e.letters));
        }
        let r = self.intern(free_reduce(&w));
        self.step.insert((id, eid, forward), r);
        r
    }
}

#[derive(Clone, Copy)]
struct State {
    node: u32,
    word: u32,
    dist: f64,
    parent: u32,
    edge: u32,
    done: bool,
}

#[derive(PartialEq)]
struct Entry(f64, u32);
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
    }
}

struct Tree {
    states: Vec<State>,
    /// States grouped by node; all are final once the search ends.
    slots: Vec<Vec<u32>>,
    touched: Vec<u32>,
}

const ROOT: u32 = u32::MAX;
const NOT_ADMISSIBLE: u32 = u32::MAX;

fn dijkstra(
    g: &NetGraph,
    start: u32,
    forward: bool,
    radius: f64,
    cap: usize,
    words: &mut WordTable,
    budget: usize,
) -> Result<Tree> {
    let empty = words.intern(Vec::new());
    let mut states = vec![State { node: start, word: empty, dist: 0.0, parent: ROOT, edge: ROOT, done: false }];
    let mut slots: Vec<Vec<u32>> = vec![Vec::new(); g.nodes.len()];
    slots[start as usize].push(0);
    let mut touched = vec![start];
    let mut heap = BinaryHeap::from([Entry(0.0, 0)]);
    while let Some(Entry(d, si)) = heap.pop() {
        let st = states[si as usize];
        if st.done || d > st.dist {
            continue;
        }
        states[si as usize].done = true;
        let list = if forward { &g.out[st.node as usize] } else { &g.incoming[st.node as usize] };
        for &eid in list {
            let e = &g.edges[eid as usize];
            let nd = d + e.weight;
            if nd > radius {
                continue;
            }
            let next = if forward { e.to } else { e.from };
            let word = if e.letters.is_empty() { st.word } else { words.step(st.word, eid, forward, e) };
            if words.words[word as usize].len() > cap {
                continue;
            }
            let slot = &mut slots[next as usize];
            match slot.iter().copied().find(|&k| states[k as usize].word == word) {
                Some(k) => {
                    let s2 = &mut states[k as usize];
                    if !s2.done && nd < s2.dist {
                        s2.dist = nd;
                        s2.parent = si;
                        s2.edge = eid;
                        heap.push(Entry(nd, k));
                    }
                }
                None => {
                    if states.len() >= budget {
                        return Err(Error::Budget(format!("search exceeded {budget} states")));
                    }
                    let k = states.len() as u32;
                    if slot.is_empty() {
                        touched.push(next);
                    }
                    slot.push(k);
                    states.push(State { node: next, word, dist: nd, parent: si, edge: eid, done: false });
                    heap.push(Entry(nd, k));
                }
            }
        }
    }
    touched.sort_unstable();
    Ok(Tree { states, slots, touched })
}

/// Edges from the root to state `si` (forward trees) or from state `si` to
/// the root (backward trees), in travel order.
fn path_edges(tree: &Tree, si: u32, forward: bool) -> Vec<u32> {
    let mut out = Vec::new();
    let mut cur = si;
    while tree.states[cur as usize].parent != ROOT {
        out.push(tree.states[cur as usize].edge);
        cur = tree.states[cur as usize].parent;
    }
    if forward {
        out.reverse();
    }
    out
}

fn canonical_rotation(w: &[i32]) -> Vec<i32> {
    (0..w.len()).map(|s| [&w[s..], &w[..s]].concat()).min().unwrap_or_default()
}

#[derive(Debug, Clone)]
struct Candidate {
    length: f64,
    crossings: Vec<Crossing>,
}

#[derive(Debug, Clone)]
pub struct DiscreteOutcome {
    /// Shortest admissible loop length found on the graph.
    pub graph_length: f64,
    pub straightened: Straightened,
    pub word: HomotopyWord,
    pub nodes: usize,
    pub edges: usize,
    pub basepoints: usize,
    pub classes_found: usize,
}

fn basepoints(s: &ConeSurface, cuts: &CutSystem, g: &NetGraph, opts: &DiscreteOptions) -> Vec<u32> {
    let spacing = opts.basepoint_spacing * opts.eps;
    let mut out = Vec::new();
    for arc in cuts.arcs() {
        let (a, b) = s.polygon(arc.polygon).edge(arc.edge);
        let m = ((b - a).length() / spacing).ceil().max(1.0) as usize;
        let other = s.partner(arc.polygon, arc.edge);
        for j in 0..m {
            let t = (j as f64 + 0.5) / m as f64;
            let x = a.lerp(b, t);
            let inward = (b - a).perp() * (opts.eps / (b - a).length());
            let found = g.nearest_node(arc.polygon, x + inward, 6.0 * opts.eps).or_else(|| {
                let map = s.transition(arc.polygon, arc.edge);
                g.nearest_node(other.polygon, map.apply(x - inward), 6.0 * opts.eps)
            });
            if let Some(n) = found {
                out.push(n);
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

pub fn discrete_marked_systole(s: &ConeSurface, opts: &DiscreteOptions) -> Result<DiscreteOutcome> {
    if opts.word_cap < 2 {
        return Err(Error::Config("word cap must be at least 2".into()));
    }
    let cuts = CutSystem::new(s)?;
    let g = NetGraph::build(s, &cuts, opts)?;
    let bases = basepoints(s, &cuts, &g, opts);
    if bases.is_empty() {
        return Err(Error::Budget("no basepoints near the cut graph; decrease epsilon".into()));
    }
    let reversible = s.norm().is_reversible();
    let max_weight = g.edges.iter().map(|e| e.weight).fold(0.0, f64::max);
    let k = s.vertex_classes().len().max(1) as f64;
    let mut radius = 0.5 * (s.surface_area() / k).sqrt().max(4.0 * opts.eps);
    let diameter_cap = 4.0 * s.euclidean_area().sqrt() * s.norm().max_radius().max(1.0 / s.norm().min_radius()) + 1.0;

    let cutoff = |best: f64| best * (1.0 + opts.candidate_slack) + opts.candidate_margin * opts.eps;
    let mut words = WordTable::default();
    let mut pair_class: HashMap<(u32, u32), u32> = HashMap::new();
    let mut class_index: HashMap<Vec<i32>, u32> = HashMap::new();
    let mut class_keys: Vec<Vec<i32>> = Vec::new();
    let mut classes: Vec<Option<Candidate>> = Vec::new();
    let mut best = f64::INFINITY;
    loop {
        for &b in &bases {
            let r = radius.min(cutoff(best) / 2.0 + max_weight);
            let fwd = dijkstra(&g, b, true, r, opts.word_cap, &mut words, opts.state_budget)?;
            let bwd = if reversible {
                None
            } else {
                Some(dijkstra(&g, b, false, r, opts.word_cap, &mut words, opts.state_budget)?)
            };
            let back = bwd.as_ref().unwrap_or(&fwd);
            for &v in &fwd.touched {
                let other = &back.slots[v as usize];
                for &i in &fwd.slots[v as usize] {
                    let si = fwd.states[i as usize];
                    for &j in other {
                        let sj = back.states[j as usize];
                        let len = si.dist + sj.dist;
                        if len > cutoff(best) {
                            continue;
                        }
                        let class = *pair_class.entry((si.word, sj.word)).or_insert_with(|| {
                            let mut letters = words.words[si.word as usize].clone();
                            letters.extend(inverse(&words.words[sj.word as usize]));
                            let red = cyclic_reduce(&letters);
                            if red.is_empty()
                                || !is_admissible_in(&HomotopyWord::new(&red, cuts.rank()), cuts.peripherals())
                            {
                                return NOT_ADMISSIBLE;
                            }
                            let key = canonical_rotation(&red);
                            let next = class_keys.len() as u32;
                            *class_index.entry(key.clone()).or_insert_with(|| {
                                class_keys.push(key);
                                classes.push(None);
                                next
                            })
                        });
                        if class == NOT_ADMISSIBLE
                            || classes[class as usize].as_ref().is_some_and(|c: &Candidate| c.length <= len)
                        {
                            continue;
                        }
                        let mut crossings: Vec<Crossing> = path_edges(&fwd, i, true)
                            .iter()
                            .flat_map(|&e| g.edges[e as usize].crossings.clone())
                            .collect();
                        if reversible {
                            // the second half runs the forward tree backwards
                            for e in path_edges(&fwd, j, true).iter().rev() {
                                crossings.extend(g.edges[*e as usize].crossings.iter().rev().map(|c| {
                                    let o = s.partner(c.polygon, c.edge);
                                    Crossing { polygon: o.polygon, edge: o.edge, t: 1.0 - c.t }
                                }));
                            }
                        } else {
                            for e in path_edges(back, j, false) {
                                crossings.extend(g.edges[e as usize].crossings.iter().copied());
                            }
                        }
                        classes[class as usize] = Some(Candidate { length: len, crossings });
                        best = best.min(len);
                    }
                }
            }
        }
        if best.is_finite() || radius > diameter_cap {
            break;
        }
        radius *= 2.0;
    }
    if !best.is_finite() {
        return Err(Error::Budget(format!("no admissible loop with at most {} letters", opts.word_cap)));
    }

    let mut ranked: Vec<(&Vec<i32>, &Candidate)> =
        class_keys.iter().zip(&classes).filter_map(|(k, c)| c.as_ref().map(|c| (k, c))).collect();
    ranked.sort_by(|a, b| a.1.length.total_cmp(&b.1.length).then_with(|| a.0.cmp(b.0)));
    let ranked_len = ranked.len();
    let mut winner: Option<(f64, Vec<i32>, Straightened)> = None;
    for (key, cand) in ranked.iter().take(opts.max_candidates) {
        if cand.length > cutoff(best) {
            break;
        }
        let lp = SurfaceLoop::new(cand.crossings.clone());
        let Ok(st) = straighten(s, &lp) else { continue };
        let better = match &winner {
            None => true,
            Some((len, k, _)) => {
                let tol = 1e-9 * len.max(1.0);
                st.length < len - tol || (st.length <= len + tol && *key < k)
            }
        };
        if better {
            winner = Some((st.length, (*key).clone(), st));
        }
    }
    let (_, _, straightened) =
        winner.ok_or_else(|| Error::Invariant("no candidate loop could be straightened".into()))?;
    let word = straightened.path.word(&cuts);
    Ok(DiscreteOutcome {
        graph_length: best,
        straightened,
        word,
        nodes: g.node_count(),
        edges: g.edge_count(),
        basepoints: bases.len(),
        classes_found: ranked_len,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn coarse() -> DiscreteOptions {
        DiscreteOptions { eps: 0.04, ..DiscreteOptions::default() }
    }

    #[test]
    fn calabi_croke_coarse() {
        let s = catalog::calabi_croke().build().unwrap();
        let out = discrete_marked_systole(&s, &coarse()).unwrap();
        assert!((out.straightened.length - 3f64.sqrt()).abs() < 1e-6, "{}", out.straightened.length);
        assert!(out.graph_length >= out.straightened.length - 1e-9);
    }

    #[test]
    fn tetrahedral_coarse() {
        let s = catalog::tetrahedral().build().unwrap();
        let out = discrete_marked_systole(&s, &coarse()).unwrap();
        assert!((out.straightened.length - 2.0).abs() < 1e-6, "{}", out.straightened.length);
    }

    #[test]
    fn node_budget() {
        let s = catalog::calabi_croke().build().unwrap();
        let opts = DiscreteOptions { eps: 0.01, node_budget: 100, ..DiscreteOptions::default() };
        assert!(matches!(discrete_marked_systole(&s, &opts), Err(Error::Budget(_))));
    }
}
