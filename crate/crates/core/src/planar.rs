//! Planar segment predicates shared by regions, crossings and routing.

use crate::point::Point2;

/// Relative threshold under which two directions count as parallel.
pub const PARALLEL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentHit {
    None,
    /// Single contact at parameter `t` along the first segment.
    Point(f64),
    /// Collinear overlap of positive length, as a parameter range on the first segment.
    Overlap(f64, f64),
}

/// Intersection of segment `a b` with segment `c d`.
///
/// The result depends only on the unordered pair `{c, d}`: the second
/// segment is put in lexicographic order first, so reversing a boundary
/// edge never perturbs the reported parameter.
pub fn segment_hit(a: Point2, b: Point2, c: Point2, d: Point2) -> SegmentHit {
    let (c, d) = if c.lex_cmp(&d).is_gt() { (d, c) } else { (c, d) };
    let r = b - a;
    let s = d - c;
    let rn = r.norm();
    let sn = s.norm();
    if rn == 0.0 {
        return if point_segment_dist(a, c, d) <= PARALLEL_EPS * (1.0 + sn) {
            SegmentHit::Point(0.0)
        } else {
            SegmentHit::None
        };
    }
    let denom = r.cross(&s);
    let ca = c - a;
    if denom.abs() <= PARALLEL_EPS * rn * sn {
        // Parallel: collinear iff c is on the line through a, b.
        if ca.cross(&r).abs() > PARALLEL_EPS * rn * (rn + ca.norm()) {
            return SegmentHit::None;
        }
        let rr = r.dot(&r);
        let t0 = ca.dot(&r) / rr;
        let t1 = (d - a).dot(&r) / rr;
        let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
        let lo = lo.max(0.0);
        let hi = hi.min(1.0);
        let tol = PARALLEL_EPS;
        if hi < lo - tol {
            SegmentHit::None
        } else if (hi - lo) * rn <= tol * (1.0 + rn) {
            SegmentHit::Point(0.5 * (lo + hi))
        } else {
            SegmentHit::Overlap(lo, hi)
        }
    } else {
        let t = ca.cross(&s) / denom;
        let u = ca.cross(&r) / denom;
        let eps = PARALLEL_EPS;
        if t < -eps || t > 1.0 + eps || u < -eps || u > 1.0 + eps {
            SegmentHit::None
        } else {
            SegmentHit::Point(t.clamp(0.0, 1.0))
        }
    }
}

pub fn point_segment_dist(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(&ab);
    if len2 == 0.0 {
        return p.dist(&a);
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    p.dist(&a.lerp(&b, t))
}

/// Signed area (positive for counterclockwise rings).
pub fn signed_area(ring: &[Point2]) -> f64 {
    let n = ring.len();
    (0..n).map(|i| ring[i].cross(&ring[(i + 1) % n])).sum::<f64>() * 0.5
}

/// Axis-aligned bounding box `(min, max)`.
pub fn bbox(points: impl IntoIterator<Item = Point2>) -> (Point2, Point2) {
    let mut lo = Point2::new([f64::INFINITY, f64::INFINITY]);
    let mut hi = Point2::new([f64::NEG_INFINITY, f64::NEG_INFINITY]);
    for p in points {
        for k in 0..2 {
            lo.0[k] = lo.0[k].min(p.0[k]);
            hi.0[k] = hi.0[k].max(p.0[k]);
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::Point;

    fn p(x: f64, y: f64) -> Point2 {
        Point([x, y])
    }

    #[test]
    fn proper_crossing() {
        let h = segment_hit(p(-1.0, 0.5), p(2.0, 0.5), p(0.0, 0.0), p(0.0, 1.0));
        assert_eq!(h, SegmentHit::Point(1.0 / 3.0));
    }

    #[test]
    fn touching_at_endpoint() {
        let h = segment_hit(p(0.0, 0.0), p(1.0, 1.0), p(1.0, 1.0), p(2.0, 0.0));
        assert_eq!(h, SegmentHit::Point(1.0));
    }

    #[test]
    fn collinear_overlap_and_disjoint() {
        let h = segment_hit(p(0.0, 0.0), p(2.0, 0.0), p(1.0, 0.0), p(3.0, 0.0));
        assert_eq!(h, SegmentHit::Overlap(0.5, 1.0));
        let h = segment_hit(p(0.0, 0.0), p(1.0, 0.0), p(2.0, 0.0), p(3.0, 0.0));
        assert_eq!(h, SegmentHit::None);
        let h = segment_hit(p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0), p(1.0, 1.0));
        assert_eq!(h, SegmentHit::None);
    }

    #[test]
    fn independent_of_second_segment_orientation() {
        let (a, b) = (p(0.1, 0.3), p(0.9, 0.71));
        let (c, d) = (p(0.3, 0.0), p(0.55, 1.0));
        assert_eq!(segment_hit(a, b, c, d), segment_hit(a, b, d, c));
    }

    #[test]
    fn areas() {
        let sq = [p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)];
        assert_eq!(signed_area(&sq), 1.0);
        let mut rev = sq;
        rev.reverse();
        assert_eq!(signed_area(&rev), -1.0);
    }
}
