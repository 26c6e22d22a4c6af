//! Planar polygonal regions with holes.
//!
//! Membership always refers to the open interior. Points within
//! [`BOUNDARY_TOL`] of a boundary edge are classified as on the boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planar::{bbox, point_segment_dist, segment_hit, signed_area, SegmentHit};
use crate::point::{Point, Point2};

/// Distance below which a point counts as lying on a region boundary.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Inside,
    Outside,
    OnBoundary,
}

/// One connected piece: an outer ring (counterclockwise) and holes (clockwise).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionPart {
    pub outer: Vec<Point2>,
    #[serde(default)]
    pub holes: Vec<Vec<Point2>>,
}

/// A bounded open polygonal set: a union of parts with holes.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyRegion {
    parts: Vec<RegionPart>,
    edges: Vec<(Point2, Point2)>,
    index: EdgeIndex,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RegionFile {
    Multi { parts: Vec<RegionPart> },
    Single(RegionPart),
}

impl Serialize for PolyRegion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.parts.len() == 1 {
            RegionFile::Single(self.parts[0].clone()).serialize(s)
        } else {
            RegionFile::Multi { parts: self.parts.clone() }.serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for PolyRegion {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let parts = match RegionFile::deserialize(d)? {
            RegionFile::Multi { parts } => parts,
            RegionFile::Single(p) => vec![p],
        };
        PolyRegion::from_parts(parts).map_err(serde::de::Error::custom)
    }
}

fn clean_ring(ring: &[Point2], ccw: bool) -> Result<Vec<Point2>> {
    let mut r: Vec<Point2> = Vec::with_capacity(ring.len());
    for &v in ring {
        if !v.is_finite() {
            return Err(Error::InvalidRegion(format!("non-finite vertex {v:?}")));
        }
        if r.last() != Some(&v) {
            r.push(v);
        }
    }
    while r.len() > 1 && r.first() == r.last() {
        r.pop();
    }
    if r.len() < 3 {
        return Err(Error::InvalidRegion("ring needs at least 3 distinct vertices".into()));
    }
    let area = signed_area(&r);
    if area == 0.0 {
        return Err(Error::InvalidRegion("ring has zero area".into()));
    }
    if (area > 0.0) != ccw {
        r.reverse();
    }
    Ok(r)
}

fn ring_edges(ring: &[Point2]) -> impl Iterator<Item = (Point2, Point2)> + '_ {
    (0..ring.len()).map(move |i| (ring[i], ring[(i + 1) % ring.len()]))
}

impl PolyRegion {
    pub fn new(outer: Vec<Point2>, holes: Vec<Vec<Point2>>) -> Result<Self> {
        Self::from_parts(vec![RegionPart { outer, holes }])
    }

    /// Axis-aligned open rectangle.
    pub fn rectangle(lo: Point2, hi: Point2) -> Result<Self> {
        Self::new(
            vec![lo, Point([hi.x(), lo.y()]), hi, Point([lo.x(), hi.y()])],
            vec![],
        )
    }

    /// Validates the rings (finite, nondegenerate, no two edges crossing
    /// transversally) and orients outers counterclockwise and holes clockwise.
    /// Collinear overlaps such as slits are accepted here; they are rejected
    /// by operations that need `∂U = ∂(closure U)^c`.
    pub fn from_parts(parts: Vec<RegionPart>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidRegion("region has no parts".into()));
        }
        let mut clean = Vec::with_capacity(parts.len());
        for part in &parts {
            let outer = clean_ring(&part.outer, true)?;
            let holes = part
                .holes
                .iter()
                .map(|h| clean_ring(h, false))
                .collect::<Result<Vec<_>>>()?;
            clean.push(RegionPart { outer, holes });
        }
        let edges: Vec<(Point2, Point2)> = clean
            .iter()
            .flat_map(|p| std::iter::once(&p.outer).chain(p.holes.iter()))
            .flat_map(|r| ring_edges(r).collect::<Vec<_>>())
            .collect();
        let index = EdgeIndex::build(&edges);
        let region = PolyRegion { parts: clean, edges, index };
        region.check_no_crossings()?;
        Ok(region)
    }

    pub fn parts(&self) -> &[RegionPart] {
        &self.parts
    }

    pub fn rings(&self) -> impl Iterator<Item = &Vec<Point2>> {
        self.parts.iter().flat_map(|p| std::iter::once(&p.outer).chain(p.holes.iter()))
    }

    pub fn edges(&self) -> &[(Point2, Point2)] {
        &self.edges
    }

    pub fn bounding_box(&self) -> (Point2, Point2) {
        bbox(self.edges.iter().map(|e| e.0))
    }

    pub fn area(&self) -> f64 {
        self.rings().map(|r| signed_area(r)).sum()
    }

    pub fn boundary_length(&self) -> f64 {
        self.edges.iter().map(|(a, b)| a.dist(b)).sum()
    }

    fn check_no_crossings(&self) -> Result<()> {
        let n = self.edges.len();
        for i in 0..n {
            let (a, b) = self.edges[i];
            for j in self.index.candidates(a, b) {
                if j <= i {
                    continue;
                }
                let (c, d) = self.edges[j];
                let shares_vertex = a == c || a == d || b == c || b == d;
                if let SegmentHit::Point(t) = segment_hit(a, b, c, d) {
                    // Transversal crossing strictly inside both edges.
                    let q = a.lerp(&b, t);
                    let interior_ab = t > 1e-9 && t < 1.0 - 1e-9;
                    let interior_cd = q.dist(&c) > 1e-9 * (1.0 + c.dist(&d)) && q.dist(&d) > 1e-9 * (1.0 + c.dist(&d));
                    if !shares_vertex && interior_ab && interior_cd {
                        let r = b - a;
                        let s = d - c;
                        if r.cross(&(c - a)).signum() * r.cross(&(d - a)).signum() < 0.0
                            && s.cross(&(a - c)).signum() * s.cross(&(b - c)).signum() < 0.0
                        {
                            return Err(Error::InvalidRegion(format!(
                                "boundary edges cross at {q:?}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Euclidean distance to the boundary.
    pub fn dist_to_boundary(&self, p: Point2) -> f64 {
        self.index.nearest_dist(&self.edges, p)
    }

    /// Even-odd parity over all rings; ignores the boundary tolerance.
    fn parity_inside(&self, p: Point2) -> bool {
        let mut inside = false;
        for &(a, b) in &self.edges {
            if (a.y() > p.y()) != (b.y() > p.y()) {
                let x = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
                if x > p.x() {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn classify(&self, p: Point2) -> Location {
        self.classify_with_tol(p, BOUNDARY_TOL)
    }

    pub fn classify_with_tol(&self, p: Point2, tol: f64) -> Location {
        if self.dist_to_boundary(p) <= tol {
            Location::OnBoundary
        } else if self.parity_inside(p) {
            Location::Inside
        } else {
            Location::Outside
        }
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.classify(p) == Location::Inside
    }

    /// Indices of edges whose bounding boxes meet that of segment `a b`.
    pub fn edges_near(&self, a: Point2, b: Point2) -> Vec<usize> {
        self.index.candidates(a, b)
    }

    /// True when the open segment `(a, b)` lies in the open interior.
    ///
    /// Endpoints may sit on the boundary; the segment may meet the boundary
    /// only there.
    pub fn open_segment_inside(&self, a: Point2, b: Point2) -> bool {
        let len = a.dist(&b);
        if len == 0.0 {
            return false;
        }
        let a_on = self.dist_to_boundary(a) <= BOUNDARY_TOL;
        let b_on = self.dist_to_boundary(b) <= BOUNDARY_TOL;
        for j in self.index.candidates(a, b) {
            let (c, d) = self.edges[j];
            match segment_hit(a, b, c, d) {
                SegmentHit::None => {}
                SegmentHit::Overlap(..) => return false,
                SegmentHit::Point(t) => {
                    let along = t * len;
                    let near_a = a_on && along <= 2.0 * BOUNDARY_TOL;
                    let near_b = b_on && (len - along) <= 2.0 * BOUNDARY_TOL;
                    if !(near_a || near_b) {
                        return false;
                    }
                }
            }
        }
        self.classify(a.lerp(&b, 0.5)) == Location::Inside
    }

    /// True when the closed segment `[a, b]` meets the boundary anywhere.
    pub fn segment_touches_boundary(&self, a: Point2, b: Point2) -> bool {
        self.index
            .candidates(a, b)
            .into_iter()
            .any(|j| segment_hit(a, b, self.edges[j].0, self.edges[j].1) != SegmentHit::None)
    }

    /// Midpoint of each boundary edge pushed a distance `eta` to each side.
    pub fn edge_side_probes(&self, eta: f64) -> impl Iterator<Item = (Point2, Point2, Point2)> + '_ {
        self.edges.iter().map(move |&(a, b)| {
            let m = a.lerp(&b, 0.5);
            let n = (b - a).perp() * (1.0 / a.dist(&b));
            (m, m + n * eta, m - n * eta)
        })
    }

    /// Arclength-uniform samples along every ring.
    pub fn boundary_samples(&self, count: usize) -> Vec<Point2> {
        let total = self.boundary_length();
        if count == 0 || total == 0.0 {
            return Vec::new();
        }
        let step = total / count as f64;
        let mut out = Vec::with_capacity(count + self.edges.len());
        let mut offset = 0.0;
        for &(a, b) in &self.edges {
            let l = a.dist(&b);
            let mut s = offset;
            while s < l {
                out.push(a.lerp(&b, s / l));
                s += step;
            }
            offset = s - l;
            // Always include the vertex itself: corners are where separations peak.
            out.push(a);
        }
        out
    }
}

/// Uniform bucket grid over boundary edges.
#[derive(Debug, Clone, PartialEq)]
struct EdgeIndex {
    lo: Point2,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl EdgeIndex {
    fn build(edges: &[(Point2, Point2)]) -> Self {
        let (lo, hi) = bbox(edges.iter().flat_map(|e| [e.0, e.1]));
        let w = (hi.x() - lo.x()).max(hi.y() - lo.y()).max(1e-12);
        let per_side = ((edges.len() as f64).sqrt().ceil() as usize).clamp(1, 256);
        let cell = w / per_side as f64 * (1.0 + 1e-9);
        let nx = (((hi.x() - lo.x()) / cell).floor() as usize + 1).max(1);
        let ny = (((hi.y() - lo.y()) / cell).floor() as usize + 1).max(1);
        let mut idx = EdgeIndex { lo, cell, nx, ny, buckets: vec![Vec::new(); nx * ny] };
        for (k, &(a, b)) in edges.iter().enumerate() {
            let (i0, j0, i1, j1) = idx.cell_range(a, b);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    idx.buckets[j * nx + i].push(k);
                }
            }
        }
        idx
    }

    fn cell_of(&self, v: f64, lo: f64, n: usize) -> usize {
        let c = ((v - lo) / self.cell).floor();
        if c < 0.0 {
            0
        } else {
            (c as usize).min(n - 1)
        }
    }

    fn cell_range(&self, a: Point2, b: Point2) -> (usize, usize, usize, usize) {
        let pad = 2.0 * BOUNDARY_TOL;
        let i0 = self.cell_of(a.x().min(b.x()) - pad, self.lo.x(), self.nx);
        let i1 = self.cell_of(a.x().max(b.x()) + pad, self.lo.x(), self.nx);
        let j0 = self.cell_of(a.y().min(b.y()) - pad, self.lo.y(), self.ny);
        let j1 = self.cell_of(a.y().max(b.y()) + pad, self.lo.y(), self.ny);
        (i0, j0, i1, j1)
    }

    fn candidates(&self, a: Point2, b: Point2) -> Vec<usize> {
        let (i0, j0, i1, j1) = self.cell_range(a, b);
        let mut out = Vec::new();
        for j in j0..=j1 {
            for i in i0..=i1 {
                out.extend_from_slice(&self.buckets[j * self.nx + i]);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn nearest_dist(&self, edges: &[(Point2, Point2)], p: Point2) -> f64 {
        let ci = ((p.x() - self.lo.x()) / self.cell).floor();
        let cj = ((p.y() - self.lo.y()) / self.cell).floor();
        let (ci, cj) = (ci as i64, cj as i64);
        let mut best = f64::INFINITY;
        let max_r = (self.nx.max(self.ny) as i64) + 1 + ci.abs().max(cj.abs());
        for r in 0..=max_r {
            // Once a candidate is found, finish the shell that could still beat it.
            if best.is_finite() && (r as f64 - 1.0) * self.cell > best {
                break;
            }
            for j in (cj - r)..=(cj + r) {
                for i in (ci - r)..=(ci + r) {
                    if (j - cj).abs() != r && (i - ci).abs() != r {
                        continue;
                    }
                    if i < 0 || j < 0 || i >= self.nx as i64 || j >= self.ny as i64 {
                        continue;
                    }
                    for &k in &self.buckets[j as usize * self.nx + i as usize] {
                        let (a, b) = edges[k];
                        best = best.min(point_segment_dist(p, a, b));
                    }
                }
            }
        }
        best
    }
}
