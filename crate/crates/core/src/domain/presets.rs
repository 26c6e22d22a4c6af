//! Preset domains with declared constants `(ε, δ)`.
//!
//! The constants were checked against the router at spacing 0.02: every pair
//! of boundary points closer than `δ` routes within `|p - q| / ε`.

use std::f64::consts::PI;

use super::PolygonalDomain;
use crate::error::{Error, Result};
use crate::point::{Point, Point2};
use crate::region::PolyRegion;

/// Largest Koch iteration accepted.
pub const KOCH_MAX: u32 = 7;

fn p(x: f64, y: f64) -> Point2 {
    Point([x, y])
}

fn regular_polygon(r: f64, n: usize) -> Vec<Point2> {
    (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            p(r * t.cos(), r * t.sin())
        })
        .collect()
}

/// `(0, 1)²`.
pub fn square() -> PolygonalDomain {
    let r = PolyRegion::rectangle(p(0.0, 0.0), p(1.0, 1.0)).unwrap();
    PolygonalDomain::with_constants(r, 0.5, 0.4).unwrap()
}

/// Polygonal annulus between 64-gons of radii 1 and 2 centred at the origin.
pub fn annulus() -> PolygonalDomain {
    let r = PolyRegion::new(regular_polygon(2.0, 64), vec![regular_polygon(1.0, 64)]).unwrap();
    PolygonalDomain::with_constants(r, 0.5, 0.4).unwrap()
}

/// `(0, 2)² \ [1, 2)²`.
pub fn lshape() -> PolygonalDomain {
    let r = PolyRegion::new(
        vec![p(0.0, 0.0), p(2.0, 0.0), p(2.0, 1.0), p(1.0, 1.0), p(1.0, 2.0), p(0.0, 2.0)],
        vec![],
    )
    .unwrap();
    PolygonalDomain::with_constants(r, 0.5, 0.4).unwrap()
}

/// Two unit squares three apart: `(0, 1)²` and `(4, 5) × (0, 1)`.
pub fn two_squares() -> PolygonalDomain {
    let a = PolyRegion::rectangle(p(0.0, 0.0), p(1.0, 1.0)).unwrap();
    let b = PolyRegion::rectangle(p(4.0, 0.0), p(5.0, 1.0)).unwrap();
    let parts = a.parts().iter().chain(b.parts()).cloned().collect();
    PolygonalDomain::with_constants(PolyRegion::from_parts(parts).unwrap(), 0.5, 0.4).unwrap()
}

/// Unit square with a slit from the top edge down to its centre.
pub fn slit_square() -> PolygonalDomain {
    let r = PolyRegion::new(
        vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.5, 1.0), p(0.5, 0.5), p(0.5, 1.0), p(0.0, 1.0)],
        vec![],
    )
    .unwrap();
    PolygonalDomain::new(r)
}

/// Koch snowflake prefix on the unit equilateral triangle: `3 · 4^k` edges.
pub fn koch(iterations: u32) -> Result<PolygonalDomain> {
    if iterations > KOCH_MAX {
        return Err(Error::InvalidInput(format!("koch iterations must be at most {KOCH_MAX}, got {iterations}")));
    }
    let mut ring = vec![p(0.0, 0.0), p(1.0, 0.0), p(0.5, 0.75f64.sqrt())];
    let (c, s) = ((-PI / 3.0).cos(), (-PI / 3.0).sin());
    for _ in 0..iterations {
        let n = ring.len();
        let mut next = Vec::with_capacity(4 * n);
        for k in 0..n {
            let a = ring[k];
            let b = ring[(k + 1) % n];
            let d = (b - a) * (1.0 / 3.0);
            let p1 = a + d;
            let p3 = a + d * 2.0;
            // Outward for a counterclockwise ring is to the right of the edge.
            let peak = p1 + p(c * d.x() - s * d.y(), s * d.x() + c * d.y());
            next.extend([a, p1, peak, p3]);
        }
        ring = next;
    }
    let region = PolyRegion::new(ring, vec![])?;
    // The corners sharpen with k, so ε and δ shrink with it.
    let (eps, delta) = match iterations {
        0 => (0.5, 0.2),
        1 => (0.4, 0.2),
        _ => (0.3, 0.2),
    };
    PolygonalDomain::with_constants(region, eps, delta)
}

/// Preset by name: `square`, `annulus`, `lshape`, `two-squares`, `slit`, `koch-<k>`.
pub fn by_name(name: &str) -> Result<PolygonalDomain> {
    match name {
        "square" => Ok(square()),
        "annulus" => Ok(annulus()),
        "lshape" | "l-shape" => Ok(lshape()),
        "two-squares" => Ok(two_squares()),
        "slit" => Ok(slit_square()),
        _ => match name.strip_prefix("koch-").or_else(|| name.strip_prefix("koch")) {
            Some(k) => koch(k.parse().map_err(|_| Error::UnknownKind(name.to_string()))?),
            None => Err(Error::UnknownKind(name.to_string())),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar::signed_area;

    #[test]
    fn koch_vertex_counts() {
        for (k, n) in [(0, 3), (1, 12), (2, 48), (3, 192)] {
            let d = koch(k).unwrap();
            assert_eq!(d.region.parts()[0].outer.len(), n);
        }
        assert!(koch(8).is_err());
    }

    #[test]
    fn koch_area_grows_outward() {
        let base = 3f64.sqrt() / 4.0;
        let a1 = signed_area(&koch(1).unwrap().region.parts()[0].outer);
        assert!((a1 - base * (1.0 + 1.0 / 3.0)).abs() < 1e-12);
        let a2 = signed_area(&koch(2).unwrap().region.parts()[0].outer);
        assert!((a2 - base * (1.0 + 1.0 / 3.0 + 4.0 / 27.0)).abs() < 1e-12);
    }

    #[test]
    fn koch_seven_is_valid() {
        let d = koch(7).unwrap();
        assert_eq!(d.region.edges().len(), 3 * 4usize.pow(7));
    }

    #[test]
    fn presets_by_name() {
        assert_eq!(by_name("koch-2").unwrap(), koch(2).unwrap());
        assert!((by_name("annulus").unwrap().region.area() - 96.0 * (PI / 32.0).sin()).abs() < 1e-9);
        assert!(matches!(by_name("torus"), Err(Error::UnknownKind(_))));
    }
}
