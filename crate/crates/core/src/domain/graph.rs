use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::PolygonalDomain;
use crate::curve::PolyCurve;
use crate::error::{Error, Result};
use crate::point::{Point, Point2};
use crate::region::{Location, PolyRegion};

/// Grid nodes and route vertices must be at least this far from the boundary.
pub const MIN_CLEARANCE: f64 = 1e-7;

const DIRS: [(i64, i64); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];

/// Cell-centred 8-connected grid over the open domain.
///
/// Node `(i, j)` sits at `origin + (i h, j h)` and has index `i * ny + j`, so
/// index order is lexicographic order of positions. An edge is kept only when
/// its closed segment stays off the boundary.
#[derive(Debug, Clone)]
pub struct RoutingGraph {
    domain: PolygonalDomain,
    h: f64,
    origin: Point2,
    nx: usize,
    ny: usize,
    clearance: Vec<f64>,
    valid: Vec<bool>,
    /// Bit `k` set when the edge towards `DIRS[k]` exists.
    edges: Vec<u8>,
    component: Vec<Option<usize>>,
    components: usize,
}

#[derive(Clone, Copy, PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl Ord for Key {
    // Reversed for a min-heap; lower index first on ties.
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl RoutingGraph {
    pub fn build(domain: &PolygonalDomain, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidInput(format!("grid spacing must be positive, got {h}")));
        }
        let (lo, hi) = domain.region.bounding_box();
        let nx = (((hi.x() - lo.x()) / h).ceil() as usize).max(1);
        let ny = (((hi.y() - lo.y()) / h).ceil() as usize).max(1);
        if nx.saturating_mul(ny) > 20_000_000 {
            return Err(Error::InvalidInput(format!("grid of {nx} x {ny} nodes is too large")));
        }
        // Centre the lattice on the bounding box.
        let origin = Point([
            0.5 * (lo.x() + hi.x()) - 0.5 * (nx - 1) as f64 * h,
            0.5 * (lo.y() + hi.y()) - 0.5 * (ny - 1) as f64 * h,
        ]);
        let region = &domain.region;
        let at = |k: usize| Point([origin.x() + (k / ny) as f64 * h, origin.y() + (k % ny) as f64 * h]);
        let (clearance, valid): (Vec<f64>, Vec<bool>) = (0..nx * ny)
            .into_par_iter()
            .map(|k| {
                let p = at(k);
                let c = region.dist_to_boundary(p);
                let ok = c > MIN_CLEARANCE && region.classify(p) == Location::Inside;
                (c, ok)
            })
            .unzip();
        let safe = h * std::f64::consts::SQRT_2 * 0.5;
        let edges: Vec<u8> = (0..nx * ny)
            .into_par_iter()
            .map(|k| {
                if !valid[k] {
                    return 0;
                }
                let (i, j) = ((k / ny) as i64, (k % ny) as i64);
                let mut bits = 0u8;
                for (d, &(di, dj)) in DIRS.iter().enumerate() {
                    let (a, b) = (i + di, j + dj);
                    if a < 0 || b < 0 || a >= nx as i64 || b >= ny as i64 {
                        continue;
                    }
                    let m = a as usize * ny + b as usize;
                    if !valid[m] {
                        continue;
                    }
                    if (clearance[k] > safe && clearance[m] > safe) || !region.segment_touches_boundary(at(k), at(m)) {
                        bits |= 1 << d;
                    }
                }
                bits
            })
            .collect();
        let mut g = RoutingGraph {
            domain: domain.clone(),
            h,
            origin,
            nx,
            ny,
            clearance,
            valid,
            edges,
            component: vec![],
            components: 0,
        };
        g.label_components();
        Ok(g)
    }

    pub fn domain(&self) -> &PolygonalDomain {
        &self.domain
    }

    pub fn region(&self) -> &PolyRegion {
        &self.domain.region
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn node_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    pub fn component_count(&self) -> usize {
        self.components
    }

    pub fn position(&self, k: usize) -> Point2 {
        Point([self.origin.x() + (k / self.ny) as f64 * self.h, self.origin.y() + (k % self.ny) as f64 * self.h])
    }

    pub fn clearance(&self, k: usize) -> f64 {
        self.clearance[k]
    }

    /// Valid node indices in lexicographic order of position.
    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.valid.len()).filter(|&k| self.valid[k])
    }

    fn neighbours(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        let bits = self.edges[k];
        let (i, j) = ((k / self.ny) as i64, (k % self.ny) as i64);
        DIRS.iter().enumerate().filter(move |(d, _)| bits & (1 << d) != 0).map(move |(_, &(di, dj))| {
            (i + di) as usize * self.ny + (j + dj) as usize
        })
    }

    fn label_components(&mut self) {
        let mut comp = vec![None; self.valid.len()];
        let mut next = 0;
        for s in 0..self.valid.len() {
            if !self.valid[s] || comp[s].is_some() {
                continue;
            }
            comp[s] = Some(next);
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for v in self.neighbours(u).collect::<Vec<_>>() {
                    if comp[v].is_none() {
                        comp[v] = Some(next);
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        self.component = comp;
        self.components = next;
    }

    pub fn component_of_node(&self, k: usize) -> Option<usize> {
        self.component[k]
    }

    /// Component of an arbitrary point of the closed domain, via its attach nodes.
    pub fn component_of(&self, p: Point2) -> Option<usize> {
        self.attach(p).first().and_then(|&(k, _)| self.component[k])
    }

    fn nearest_index(&self, p: Point2) -> (i64, i64) {
        (
            ((p.x() - self.origin.x()) / self.h).round() as i64,
            ((p.y() - self.origin.y()) / self.h).round() as i64,
        )
    }

    /// Grid nodes joined to `p` by a segment through the open domain, with costs.
    pub fn attach(&self, p: Point2) -> Vec<(usize, f64)> {
        let (ci, cj) = self.nearest_index(p);
        if ci >= 0 && cj >= 0 && (ci as usize) < self.nx && (cj as usize) < self.ny {
            let k = ci as usize * self.ny + cj as usize;
            if self.valid[k] && self.position(k).dist(&p) <= 1e-12 {
                return vec![(k, 0.0)];
            }
        }
        let region = &self.domain.region;
        let mut radius = 2i64;
        let limit = self.nx.max(self.ny) as i64;
        loop {
            let mut out = Vec::new();
            for i in (ci - radius).max(0)..=(ci + radius).min(self.nx as i64 - 1) {
                for j in (cj - radius).max(0)..=(cj + radius).min(self.ny as i64 - 1) {
                    let k = i as usize * self.ny + j as usize;
                    if !self.valid[k] {
                        continue;
                    }
                    let q = self.position(k);
                    let d = p.dist(&q);
                    if d <= radius as f64 * self.h && region.open_segment_inside(p, q) {
                        out.push((k, d));
                    }
                }
            }
            if !out.is_empty() || radius >= limit {
                return out;
            }
            radius *= 2;
        }
    }

    /// Best grid path from attach set `src` to attach set `dst`, as node indices.
    fn astar(&self, src: &[(usize, f64)], dst: &[(usize, f64)], goal: Point2) -> Option<Vec<usize>> {
        let slack = dst.iter().map(|d| d.1).fold(0.0, f64::max);
        let heur = |k: usize| (self.position(k).dist(&goal) - slack).max(0.0);
        let mut exit = vec![f64::INFINITY; self.valid.len()];
        for &(k, c) in dst {
            exit[k] = exit[k].min(c);
        }
        let mut g = vec![f64::INFINITY; self.valid.len()];
        let mut pred = vec![usize::MAX; self.valid.len()];
        let mut closed = vec![false; self.valid.len()];
        let mut heap = BinaryHeap::new();
        for &(k, c) in src {
            if c < g[k] {
                g[k] = c;
                heap.push(Key(c + heur(k), k));
            }
        }
        let mut best = (f64::INFINITY, usize::MAX);
        while let Some(Key(f, u)) = heap.pop() {
            if closed[u] {
                continue;
            }
            if f >= best.0 {
                break;
            }
            closed[u] = true;
            if exit[u].is_finite() {
                let total = g[u] + exit[u];
                if total < best.0 {
                    best = (total, u);
                }
            }
            for v in self.neighbours(u) {
                let cand = g[u] + self.h * if (v / self.ny != u / self.ny) && (v % self.ny != u % self.ny) {
                    std::f64::consts::SQRT_2
                } else {
                    1.0
                };
                if cand < g[v] {
                    g[v] = cand;
                    pred[v] = u;
                    heap.push(Key(cand + heur(v), v));
                }
            }
        }
        if best.1 == usize::MAX {
            return None;
        }
        let mut path = vec![best.1];
        let mut v = best.1;
        while pred[v] != usize::MAX {
            v = pred[v];
            path.push(v);
        }
        path.reverse();
        Some(path)
    }

    fn vertex_ok(&self, v: Point2) -> bool {
        self.domain.region.classify(v) == Location::Inside && self.domain.region.dist_to_boundary(v) > MIN_CLEARANCE
    }

    fn polyline_ok(&self, pts: &[Point2]) -> bool {
        pts[1..pts.len() - 1].iter().all(|&v| self.vertex_ok(v))
            && pts.windows(2).all(|w| self.domain.region.open_segment_inside(w[0], w[1]))
    }

    /// Shortcut a polyline greedily: from each kept point jump to the farthest
    /// later point that is still visible through the open domain.
    fn string_pull(&self, pts: &[Point2]) -> Vec<Point2> {
        let region = &self.domain.region;
        let last = pts.len() - 1;
        let mut out = vec![pts[0]];
        let mut i = 0;
        while i < last {
            let mut j = i + 1;
            while j < last && region.open_segment_inside(pts[i], pts[j + 1]) {
                j += 1;
            }
            out.push(pts[j]);
            i = j;
        }
        out
    }

    fn candidates(&self, p: Point2, q: Point2) -> Vec<Vec<Point2>> {
        let region = &self.domain.region;
        let len = p.dist(&q);
        let mut out = Vec::new();
        let mid = p.lerp(&q, 0.5);
        let n = (q - p).perp() * (1.0 / len);
        for s in [0.5, 0.25, 0.125] {
            for sign in [1.0, -1.0] {
                out.push(vec![p, mid + n * (sign * s * len), q]);
            }
        }
        for ring in region.rings() {
            let m = ring.len();
            for k in 0..m {
                let v = ring[k];
                if v.dist(&mid) > len {
                    continue;
                }
                let a = ring[(k + m - 1) % m];
                let b = ring[(k + 1) % m];
                let n1 = (v - a).perp() * (1.0 / v.dist(&a));
                let n2 = (b - v).perp() * (1.0 / b.dist(&v));
                let bis = n1 + n2;
                let bl = bis.norm();
                if bl < 1e-12 {
                    continue;
                }
                for eta in [len / 4.0, len / 16.0] {
                    out.push(vec![p, v + bis * (eta / bl), q]);
                }
            }
        }
        out
    }

    /// A polygonal curve from `p` to `q` through the open domain and its length.
    ///
    /// The search runs in a canonical orientation, so `route(p, q)` and
    /// `route(q, p)` return reversed curves with identical lengths.
    pub fn route(&self, p: Point2, q: Point2) -> Result<(PolyCurve<2>, f64)> {
        let region = &self.domain.region;
        for x in [p, q] {
            if !x.is_finite() || region.classify(x) == Location::Outside {
                return Err(Error::InvalidInput(format!("route endpoint {x:?} is outside the closed domain")));
            }
        }
        if p == q {
            return Ok((PolyCurve::new(vec![p, q], 1.0)?, 0.0));
        }
        let flip = q.lex_cmp(&p).is_lt();
        let (a, b) = if flip { (q, p) } else { (p, q) };
        let pts = self.route_canonical(a, b)?;
        let length: f64 = pts.windows(2).map(|w| w[0].dist(&w[1])).sum();
        let mut verts = pts;
        if flip {
            verts.reverse();
        }
        if let (Some(eps), Some(delta)) = (self.domain.eps, self.domain.delta) {
            let d = p.dist(&q);
            if d <= delta && length > d / eps {
                return Err(Error::LrcViolation { length, bound: d / eps });
            }
        }
        Ok((PolyCurve::new(verts, 1.0)?, length))
    }

    fn route_canonical(&self, p: Point2, q: Point2) -> Result<Vec<Point2>> {
        if self.domain.region.open_segment_inside(p, q) {
            return Ok(vec![p, q]);
        }
        let length = |v: &[Point2]| v.windows(2).map(|w| w[0].dist(&w[1])).sum::<f64>();
        let mut best: Option<(f64, Vec<Point2>)> = None;
        let offer = |c: Vec<Point2>, best: &mut Option<(f64, Vec<Point2>)>| {
            let l = length(&c);
            if best.as_ref().is_none_or(|b| l < b.0) {
                *best = Some((l, c));
            }
        };
        for c in self.candidates(p, q) {
            if best.as_ref().is_some_and(|b| length(&c) >= b.0) {
                continue;
            }
            if self.polyline_ok(&c) {
                offer(c, &mut best);
            }
        }
        let (sa, sb) = (self.attach(p), self.attach(q));
        if let Some(path) = self.astar(&sa, &sb, q) {
            let mut pts = vec![p];
            pts.extend(path.iter().map(|&k| self.position(k)));
            pts.push(q);
            let pulled = self.string_pull(&pts);
            if self.polyline_ok(&pulled) {
                offer(pulled, &mut best);
            } else if self.polyline_ok(&pts) {
                offer(pts, &mut best);
            }
        }
        best.map(|b| b.1).ok_or(Error::Disconnected { from: p.0, to: q.0 })
    }

    /// Greedy `δ`-net over nodes with clearance at least `δ/2`.
    ///
    /// Nodes are visited in lexicographic order; each one still uncovered
    /// selects, among the candidates of its component within `δ`, the one
    /// covering the most uncovered nodes (lowest position on ties).
    pub fn select_lambda(&self, delta: f64) -> Result<Vec<Point2>> {
        if !(delta > 0.0) {
            return Err(Error::InvalidInput(format!("delta must be positive, got {delta}")));
        }
        let half = 0.5 * delta;
        let reach = (delta / self.h).floor() as i64;
        let ball = |c: usize| -> Vec<usize> {
            let pc = self.position(c);
            let comp = self.component[c];
            let (ci, cj) = ((c / self.ny) as i64, (c % self.ny) as i64);
            let mut out = Vec::new();
            for i in (ci - reach).max(0)..=(ci + reach).min(self.nx as i64 - 1) {
                for j in (cj - reach).max(0)..=(cj + reach).min(self.ny as i64 - 1) {
                    let k = i as usize * self.ny + j as usize;
                    if self.valid[k] && self.component[k] == comp && self.position(k).dist(&pc) <= delta {
                        out.push(k);
                    }
                }
            }
            out
        };
        let mut covered = vec![false; self.valid.len()];
        let mut chosen = Vec::new();
        for u in self.nodes().collect::<Vec<_>>() {
            if covered[u] {
                continue;
            }
            let best = ball(u)
                .into_iter()
                .filter(|&c| self.clearance[c] >= half)
                .map(|c| (ball(c).into_iter().filter(|&k| !covered[k]).count(), c))
                .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
            let pick = match best {
                Some((_, c)) => self.position(c),
                None => self.off_grid_candidate(u, delta).ok_or(Error::InfeasibleDelta { half_delta: half })?,
            };
            let comp = self.component[u];
            for k in self.ball_around(pick, delta) {
                if self.component[k] == comp {
                    covered[k] = true;
                }
            }
            chosen.push(pick);
        }
        chosen.sort_by(|a, b| a.lex_cmp(b));
        Ok(chosen)
    }

    fn ball_around(&self, c: Point2, r: f64) -> Vec<usize> {
        let (ci, cj) = self.nearest_index(c);
        let reach = (r / self.h).ceil() as i64 + 1;
        let mut out = Vec::new();
        for i in (ci - reach).max(0)..=(ci + reach).min(self.nx as i64 - 1) {
            for j in (cj - reach).max(0)..=(cj + reach).min(self.ny as i64 - 1) {
                let k = i as usize * self.ny + j as usize;
                if self.valid[k] && self.position(k).dist(&c) <= r {
                    out.push(k);
                }
            }
        }
        out
    }

    /// Deepest point within `delta` of node `u`, searched off the lattice.
    /// Sharp corners put the only admissible centres at exact distances the
    /// grid rarely hits.
    fn off_grid_candidate(&self, u: usize, delta: f64) -> Option<Point2> {
        let region = &self.domain.region;
        let pu = self.position(u);
        let comp = self.component[u];
        let score = |c: Point2| -> f64 {
            if c.dist(&pu) > delta || region.classify(c) != Location::Inside {
                return f64::NEG_INFINITY;
            }
            region.dist_to_boundary(c)
        };
        let mut samples = Vec::with_capacity(16 * 256);
        for j in 1..=16 {
            let rho = delta * j as f64 / 16.0;
            for t in 0..256 {
                let th = 2.0 * std::f64::consts::PI * t as f64 / 256.0;
                let c = pu + Point([rho * th.cos(), rho * th.sin()]);
                samples.push((score(c), c));
            }
        }
        samples.sort_by(|x, y| y.0.total_cmp(&x.0));
        let dirs: Vec<Point2> = (0..16)
            .map(|k| {
                let th = std::f64::consts::PI * k as f64 / 8.0;
                Point([th.cos(), th.sin()])
            })
            .collect();
        // Pattern search polish from the best few samples.
        let mut best = (f64::NEG_INFINITY, pu);
        for &(s0, c0) in samples.iter().take(8) {
            let mut cur = (s0, c0);
            let mut step = delta / 16.0;
            while step > delta * 1e-7 {
                let next = dirs.iter().map(|&d| cur.1 + d * step).map(|c| (score(c), c)).max_by(|x, y| x.0.total_cmp(&y.0));
                match next {
                    Some(n) if n.0 > cur.0 => cur = n,
                    _ => step *= 0.5,
                }
            }
            if cur.0 > best.0 {
                best = cur;
            }
        }
        (best.0 >= 0.5 * delta && self.component_of(best.1) == comp).then_some(best.1)
    }

    /// Multi-source grid distances from `lambda` (attached to the grid).
    fn distance_field(&self, lambda: &[Point2]) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.valid.len()];
        let mut heap = BinaryHeap::new();
        for &l in lambda {
            for (k, c) in self.attach(l) {
                if c < dist[k] {
                    dist[k] = c;
                    heap.push(Key(c, k));
                }
            }
        }
        while let Some(Key(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for v in self.neighbours(u) {
                let step = if (v / self.ny != u / self.ny) && (v % self.ny != u % self.ny) {
                    std::f64::consts::SQRT_2
                } else {
                    1.0
                };
                let cand = d + self.h * step;
                if cand < dist[v] {
                    dist[v] = cand;
                    heap.push(Key(cand, v));
                }
            }
        }
        dist
    }

    /// `sup_p inf_λ ℓ(γ)` over `samples` boundary points, estimated with grid paths.
    pub fn separation(&self, lambda: &[Point2], samples: usize) -> Result<f64> {
        let dist = self.distance_field(lambda);
        let pts = self.domain.region.boundary_samples(samples);
        let per: Vec<Result<f64>> = pts
            .par_iter()
            .map(|&p| {
                let best = self
                    .attach(p)
                    .into_iter()
                    .map(|(k, c)| c + dist[k])
                    .fold(f64::INFINITY, f64::min);
                if best.is_finite() {
                    Ok(best)
                } else {
                    let to = lambda.first().map_or(p.0, |l| l.0);
                    Err(Error::Disconnected { from: p.0, to })
                }
            })
            .collect();
        let mut sep: f64 = 0.0;
        for r in per {
            sep = sep.max(r?);
        }
        Ok(sep)
    }

    /// `dist(Λ, ∂U)`.
    pub fn lambda_clearance(&self, lambda: &[Point2]) -> f64 {
        lambda.iter().map(|&l| self.domain.region.dist_to_boundary(l)).fold(f64::INFINITY, f64::min)
    }

    /// Valid node with the largest clearance (lowest index on ties).
    pub fn deepest_node(&self) -> Option<Point2> {
        self.nodes()
            .fold(None, |best: Option<usize>, k| match best {
                Some(b) if self.clearance[b] >= self.clearance[k] => Some(b),
                _ => Some(k),
            })
            .map(|k| self.position(k))
    }
}
