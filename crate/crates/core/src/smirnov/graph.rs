//! Snapped flow graphs and their decomposition into paths and cycles.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::curve::{CurveField, CurveRecord, FieldFile, PolyCurve};
use crate::error::Result;
use crate::measure::AtomicMeasure;
use crate::point::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowEdge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

/// Cancellation-free directed graph carrying a curve field.
///
/// `imbalance[k]` is outflow minus inflow at node `k`, which is the
/// divergence coefficient there. A virtual balance node absorbs `-Σ imbalance`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowGraph<const N: usize> {
    pub nodes: Vec<Point<N>>,
    pub edges: Vec<FlowEdge>,
    pub imbalance: Vec<f64>,
}

impl<const N: usize> FlowGraph<N> {
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Imbalance carried by the virtual balance node.
    pub fn balance(&self) -> f64 {
        -self.imbalance.iter().sum::<f64>()
    }

    /// `Σ weight · length`.
    pub fn mass(&self) -> f64 {
        self.edges.iter().map(|e| e.weight * self.nodes[e.from].dist(&self.nodes[e.to])).sum()
    }

    pub fn divergence(&self) -> AtomicMeasure<N> {
        AtomicMeasure::from_atoms(self.imbalance.iter().enumerate().map(|(k, &c)| (self.nodes[k], c)))
    }

    /// One segment per edge.
    pub fn to_field(&self) -> CurveField<N> {
        CurveField::new(
            self.edges
                .iter()
                .map(|e| PolyCurve::segment(self.nodes[e.from], self.nodes[e.to], e.weight).unwrap())
                .collect(),
        )
    }

    /// Weight of the edge `from -> to`, negative if only the reverse is present.
    pub fn edge_weight(&self, from: Point<N>, to: Point<N>) -> f64 {
        let find = |p: Point<N>| self.nodes.iter().position(|q| *q == p);
        let (Some(a), Some(b)) = (find(from), find(to)) else {
            return 0.0;
        };
        self.edges
            .iter()
            .map(|e| if (e.from, e.to) == (a, b) { e.weight } else if (e.from, e.to) == (b, a) { -e.weight } else { 0.0 })
            .sum()
    }
}

fn bucket<const N: usize>(p: &Point<N>, tol: f64) -> [i64; N] {
    let mut key = [0i64; N];
    for (k, c) in key.iter_mut().enumerate() {
        *c = if tol > 0.0 { (p[k] / tol).floor() as i64 } else { p[k].to_bits() as i64 };
    }
    key
}

fn neighbour_keys<const N: usize>(key: [i64; N], tol: f64) -> Vec<[i64; N]> {
    if tol <= 0.0 {
        return vec![key];
    }
    let mut out = vec![key];
    for axis in 0..N {
        let mut next = Vec::with_capacity(out.len() * 3);
        for k in &out {
            for d in -1..=1 {
                let mut m = *k;
                m[axis] += d;
                next.push(m);
            }
        }
        out = next;
    }
    out
}

/// Merges vertices within `tol`, splits segments at nodes lying on them and
/// sums antiparallel and parallel overlaps with signed weights.
pub fn snap_to_graph<const N: usize>(f: &CurveField<N>, tol: f64) -> FlowGraph<N> {
    let tol = tol.max(0.0);
    let mut verts: Vec<Point<N>> = f.curves.iter().flat_map(|c| c.vertices().iter().copied()).collect();
    verts.sort_by(|a, b| a.lex_cmp(b));
    verts.dedup();

    // Leader clustering in lexicographic order.
    let mut leaders: Vec<Point<N>> = Vec::new();
    let mut grid: HashMap<[i64; N], Vec<usize>> = HashMap::new();
    let mut leader_of: HashMap<[u64; N], usize> = HashMap::new();
    let bits = |p: &Point<N>| p.0.map(f64::to_bits);
    for v in &verts {
        let key = bucket(v, tol);
        let hit = neighbour_keys(key, tol)
            .iter()
            .filter_map(|k| grid.get(k))
            .flatten()
            .copied()
            .filter(|&l| leaders[l].dist(v) <= tol)
            .min();
        let id = hit.unwrap_or_else(|| {
            leaders.push(*v);
            grid.entry(key).or_default().push(leaders.len() - 1);
            leaders.len() - 1
        });
        leader_of.insert(bits(v), id);
    }
    // Leaders are already in lexicographic order.
    let nodes = leaders;
    let node_of = |p: &Point<N>| leader_of[&bits(p)];

    let mut by_x: Vec<usize> = (0..nodes.len()).collect();
    by_x.sort_by(|&a, &b| nodes[a][0].total_cmp(&nodes[b][0]).then(a.cmp(&b)));
    let xs: Vec<f64> = by_x.iter().map(|&k| nodes[k][0]).collect();

    let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut add = |a: usize, b: usize, w: f64| {
        if a == b {
            return;
        }
        let (key, s) = if a < b { ((a, b), w) } else { ((b, a), -w) };
        *acc.entry(key).or_insert(0.0) += s;
    };
    for c in &f.curves {
        for (a, b) in c.segments() {
            let (ia, ib) = (node_of(&a), node_of(&b));
            let (pa, pb) = (nodes[ia], nodes[ib]);
            let d = pb - pa;
            let len2 = d.dot(&d);
            if len2 == 0.0 {
                continue;
            }
            let (lo, hi) = (pa[0].min(pb[0]) - tol, pa[0].max(pb[0]) + tol);
            let start = xs.partition_point(|&x| x < lo);
            let mut inner: Vec<(f64, usize)> = Vec::new();
            for &k in &by_x[start..] {
                if nodes[k][0] > hi {
                    break;
                }
                if k == ia || k == ib {
                    continue;
                }
                let t = (nodes[k] - pa).dot(&d) / len2;
                if t <= 0.0 || t >= 1.0 {
                    continue;
                }
                if pa.lerp(&pb, t).dist(&nodes[k]) <= tol.max(1e-15 * len2.sqrt()) {
                    inner.push((t, k));
                }
            }
            inner.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            let mut prev = ia;
            for (_, k) in inner {
                add(prev, k, c.weight());
                prev = k;
            }
            add(prev, ib, c.weight());
        }
    }

    let wmax = acc.values().fold(0.0f64, |m, w| m.max(w.abs()));
    let zero = 1e-12 * wmax;
    let mut edges: Vec<FlowEdge> = acc
        .into_iter()
        .filter(|(_, w)| w.abs() > zero)
        .map(|((a, b), w)| if w > 0.0 { FlowEdge { from: a, to: b, weight: w } } else { FlowEdge { from: b, to: a, weight: -w } })
        .collect();
    edges.sort_by(|x, y| (x.from, x.to).cmp(&(y.from, y.to)));
    let mut imbalance = vec![0.0; nodes.len()];
    for e in &edges {
        imbalance[e.from] += e.weight;
        imbalance[e.to] -= e.weight;
    }
    FlowGraph { nodes, edges, imbalance }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PieceKind {
    Path,
    Cycle,
}

impl PieceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PieceKind::Path => "path",
            PieceKind::Cycle => "cycle",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowPiece<const N: usize> {
    pub kind: PieceKind,
    pub curve: PolyCurve<N>,
}

#[derive(Clone, Copy, PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Residual<'a, const N: usize> {
    g: &'a FlowGraph<N>,
    out: Vec<Vec<usize>>,
    rem: Vec<f64>,
    zero: f64,
}

impl<const N: usize> Residual<'_, N> {
    /// Euclidean shortest path over live edges from `src` to the first
    /// settled node satisfying `goal`; returns the edge ids in order.
    fn shortest(&self, src: usize, goal: impl Fn(usize) -> bool) -> Option<Vec<usize>> {
        let n = self.g.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut via: Vec<Option<usize>> = vec![None; n];
        let mut heap = BinaryHeap::new();
        dist[src] = 0.0;
        heap.push(Key(0.0, src));
        while let Some(Key(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            if u != src && goal(u) {
                let mut path = Vec::new();
                let mut v = u;
                while let Some(e) = via[v] {
                    path.push(e);
                    v = self.g.edges[e].from;
                }
                path.reverse();
                return Some(path);
            }
            for &e in &self.out[u] {
                if self.rem[e] <= self.zero {
                    continue;
                }
                let v = self.g.edges[e].to;
                let nd = d + self.g.nodes[u].dist(&self.g.nodes[v]);
                if nd < dist[v] {
                    dist[v] = nd;
                    via[v] = Some(e);
                    heap.push(Key(nd, v));
                }
            }
        }
        None
    }

    fn take(&mut self, path: &[usize], w: f64) {
        for &e in path {
            self.rem[e] -= w;
            if self.rem[e] <= self.zero {
                self.rem[e] = 0.0;
            }
        }
    }

    fn curve(&self, start: usize, path: &[usize], w: f64) -> PolyCurve<N> {
        let mut vs = vec![self.g.nodes[start]];
        vs.extend(path.iter().map(|&e| self.g.nodes[self.g.edges[e].to]));
        PolyCurve::new(vs, w).unwrap()
    }
}

/// Flow decomposition: source-to-sink paths first, then cycles.
///
/// Every piece is a shortest live route, which keeps pieces simple and lets a
/// layered graph decompose into pieces that change layer as rarely as possible.
pub fn graph_decompose<const N: usize>(g: &FlowGraph<N>) -> Vec<FlowPiece<N>> {
    let wmax = g.edges.iter().fold(0.0f64, |m, e| m.max(e.weight));
    let zero = 1e-12 * wmax;
    let mut out = vec![Vec::new(); g.nodes.len()];
    for (k, e) in g.edges.iter().enumerate() {
        out[e.from].push(k);
    }
    let mut res = Residual { g, out, rem: g.edges.iter().map(|e| e.weight).collect(), zero };
    let mut excess = g.imbalance.clone();
    let mut pieces = Vec::new();

    for s in 0..g.nodes.len() {
        while excess[s] > zero {
            let Some(path) = res.shortest(s, |v| excess[v] < -zero) else {
                excess[s] = 0.0;
                break;
            };
            let t = g.edges[*path.last().unwrap()].to;
            let w = path.iter().map(|&e| res.rem[e]).fold(excess[s].min(-excess[t]), f64::min);
            res.take(&path, w);
            excess[s] -= w;
            excess[t] += w;
            pieces.push(FlowPiece { kind: PieceKind::Path, curve: res.curve(s, &path, w) });
        }
    }

    for e0 in 0..g.edges.len() {
        while res.rem[e0] > zero {
            let (u, v) = (g.edges[e0].from, g.edges[e0].to);
            let Some(back) = res.shortest(v, |x| x == u) else {
                res.rem[e0] = 0.0;
                break;
            };
            let mut cycle = vec![e0];
            cycle.extend(back);
            let w = cycle.iter().map(|&e| res.rem[e]).fold(f64::INFINITY, f64::min);
            res.take(&cycle, w);
            // Start the closed curve at its lowest-index node.
            let (rot, _) = cycle.iter().enumerate().min_by_key(|(_, &e)| g.edges[e].from).unwrap();
            cycle.rotate_left(rot);
            let start = g.edges[cycle[0]].from;
            pieces.push(FlowPiece { kind: PieceKind::Cycle, curve: res.curve(start, &cycle, w) });
        }
    }
    pieces
}

/// Sum of the pieces as a curve field.
pub fn decomposition_field<const N: usize>(pieces: &[FlowPiece<N>]) -> CurveField<N> {
    CurveField::new(pieces.iter().map(|p| p.curve.clone()).collect())
}

/// Core field format with a `kind` tag per curve.
pub fn decomposition_file<const N: usize>(pieces: &[FlowPiece<N>]) -> FieldFile<N> {
    FieldFile {
        curves: pieces
            .iter()
            .map(|p| CurveRecord {
                weight: p.curve.weight(),
                vertices: p.curve.vertices().to_vec(),
                kind: Some(p.kind.as_str().to_string()),
            })
            .collect(),
    }
}

/// `Σ weight · length` over the pieces.
pub fn decomposition_mass<const N: usize>(pieces: &[FlowPiece<N>]) -> f64 {
    pieces.iter().map(|p| p.curve.weight().abs() * p.curve.length()).sum()
}

/// Resnaps the recomposed pieces and compares edge weights with `g`.
pub fn recomposition_error<const N: usize>(g: &FlowGraph<N>, pieces: &[FlowPiece<N>]) -> Result<f64> {
    let back = snap_to_graph(&decomposition_field(pieces), 0.0);
    let index = |gr: &FlowGraph<N>| -> BTreeMap<([u64; N], [u64; N]), f64> {
        gr.edges
            .iter()
            .map(|e| ((gr.nodes[e.from].0.map(f64::to_bits), gr.nodes[e.to].0.map(f64::to_bits)), e.weight))
            .collect()
    };
    let (a, b) = (index(g), index(&back));
    let mut err: f64 = 0.0;
    for (k, w) in &a {
        err = err.max((w - b.get(k).copied().unwrap_or(0.0)).abs());
    }
    for (k, w) in &b {
        if !a.contains_key(k) {
            err = err.max(w.abs());
        }
    }
    Ok(err)
}
