//! Planar domains with declared rectifiable-convexity constants.
//!
//! A domain is locally rectifiably convex with constants `(ε, δ)` when any
//! two points of its closure at distance at most `δ` are joined through the
//! open domain by a curve of length at most `|p - q| / ε`. Constants are
//! declared, and checked a posteriori on every route.

mod graph;
pub mod presets;

pub use graph::{RoutingGraph, MIN_CLEARANCE};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::curve::PolyCurve;
use crate::point::Point2;
use crate::region::{Location, PolyRegion, RegionPart};

#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalDomain {
    pub region: PolyRegion,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
}

impl PolygonalDomain {
    pub fn new(region: PolyRegion) -> Self {
        PolygonalDomain { region, eps: None, delta: None }
    }

    pub fn with_constants(region: PolyRegion, eps: f64, delta: f64) -> Result<Self> {
        let d = PolygonalDomain { region, eps: Some(eps), delta: Some(delta) };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(e) = self.eps {
            if !(e > 0.0 && e <= 1.0) {
                return Err(Error::InvalidInput(format!("eps must lie in (0, 1], got {e}")));
            }
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::InvalidInput(format!("delta must be positive, got {d}")));
            }
        }
        Ok(())
    }

    /// Requires `∂U = ∂(closure U)^c`: every boundary edge has the open set on
    /// exactly one side. Slits and other two-sided edges fail.
    pub fn check_two_sided_boundary(&self) -> Result<()> {
        let (lo, hi) = self.region.bounding_box();
        let scale = 1.0 + lo.dist(&hi);
        for (k, &(a, b)) in self.region.edges().iter().enumerate() {
            let eta = (1e-7 * scale).min(0.25 * a.dist(&b));
            let (m, left, right) = self.region.edge_side_probes(eta).nth(k).unwrap();
            let l = self.region.classify_with_tol(left, 0.0);
            let r = self.region.classify_with_tol(right, 0.0);
            let one_sided = matches!((l, r), (Location::Inside, Location::Outside) | (Location::Outside, Location::Inside));
            if !one_sided {
                return Err(Error::TopologyViolation(format!(
                    "boundary edge through {m:?} does not separate the domain from its complement"
                )));
            }
        }
        Ok(())
    }

    /// `box \ closure(U)` as a domain (constants are not inherited).
    pub fn complement_region(&self, bx: &PolyRegion) -> Result<PolygonalDomain> {
        self.check_two_sided_boundary()?;
        if bx.parts().len() != 1 || !bx.parts()[0].holes.is_empty() {
            return Err(Error::InvalidInput("bounding box must be a single polygon without holes".into()));
        }
        for ring in self.region.rings() {
            for &v in ring {
                if bx.classify(v) != Location::Inside {
                    return Err(Error::InvalidInput(format!("domain vertex {v:?} is not strictly inside the box")));
                }
            }
        }
        let mut parts = vec![RegionPart {
            outer: bx.parts()[0].outer.clone(),
            holes: self.region.parts().iter().map(|p| p.outer.clone()).collect(),
        }];
        for part in self.region.parts() {
            for hole in &part.holes {
                parts.push(RegionPart { outer: hole.clone(), holes: vec![] });
            }
        }
        Ok(PolygonalDomain::new(PolyRegion::from_parts(parts)?))
    }

    /// Convenience wrapper building a one-off routing graph.
    pub fn route(&self, p: Point2, q: Point2, h: f64) -> Result<(PolyCurve<2>, f64)> {
        RoutingGraph::build(self, h)?.route(p, q)
    }
}

/// `box \ closure(U)`.
pub fn complement_region(d: &PolygonalDomain, bx: &PolyRegion) -> Result<PolygonalDomain> {
    d.complement_region(bx)
}

#[derive(Serialize, Deserialize)]
struct DomainExtras {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
}

impl Serialize for PolygonalDomain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::Error as _;
        let mut v = serde_json::to_value(&self.region).map_err(S::Error::custom)?;
        let extras = serde_json::to_value(DomainExtras { eps: self.eps, delta: self.delta }).map_err(S::Error::custom)?;
        if let (Some(obj), serde_json::Value::Object(ex)) = (v.as_object_mut(), extras) {
            obj.extend(ex);
        }
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolygonalDomain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let mut v = serde_json::Value::deserialize(d)?;
        let obj = v.as_object_mut().ok_or_else(|| D::Error::custom("domain must be an object"))?;
        let extras = DomainExtras {
            eps: obj.remove("eps").map(serde_json::from_value).transpose().map_err(D::Error::custom)?,
            delta: obj.remove("delta").map(serde_json::from_value).transpose().map_err(D::Error::custom)?,
        };
        let region: PolyRegion = serde_json::from_value(v).map_err(D::Error::custom)?;
        let dom = PolygonalDomain { region, eps: extras.eps, delta: extras.delta };
        dom.validate().map_err(D::Error::custom)?;
        Ok(dom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::Point;

    fn p(x: f64, y: f64) -> Point2 {
        Point([x, y])
    }

    #[test]
    fn complement_of_square() {
        let sq = presets::square();
        let bx = PolyRegion::rectangle(p(-1.0, -1.0), p(2.0, 2.0)).unwrap();
        let c = sq.complement_region(&bx).unwrap();
        assert_eq!(c.region.parts().len(), 1);
        assert_eq!(c.region.parts()[0].holes.len(), 1);
        assert!((c.region.area() - 8.0).abs() < 1e-12);
        assert!(c.region.contains(p(-0.5, 0.5)));
        assert!(!c.region.contains(p(0.5, 0.5)));
    }

    #[test]
    fn complement_of_annulus_has_two_parts() {
        let an = presets::annulus();
        let bx = PolyRegion::rectangle(p(-3.0, -3.0), p(3.0, 3.0)).unwrap();
        let c = an.complement_region(&bx).unwrap();
        assert_eq!(c.region.parts().len(), 2);
        assert!(c.region.contains(p(0.0, 0.0)));
        assert!(c.region.contains(p(2.5, 0.0)));
        assert!(!c.region.contains(p(1.5, 0.0)));
    }

    #[test]
    fn slit_complement_is_rejected() {
        let bx = PolyRegion::rectangle(p(-1.0, -1.0), p(2.0, 2.0)).unwrap();
        assert!(matches!(presets::slit_square().complement_region(&bx), Err(Error::TopologyViolation(_))));
    }

    #[test]
    fn box_must_contain_domain() {
        let bx = PolyRegion::rectangle(p(0.5, -1.0), p(2.0, 2.0)).unwrap();
        assert!(presets::square().complement_region(&bx).is_err());
    }

    #[test]
    fn file_format() {
        let d = presets::square();
        let s = serde_json::to_string(&d).unwrap();
        assert!(s.contains("\"eps\""));
        let back: PolygonalDomain = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
        let bare: PolygonalDomain = serde_json::from_str(r#"{"outer":[[0,0],[1,0],[1,1]]}"#).unwrap();
        assert_eq!(bare.eps, None);
        assert!(serde_json::from_str::<PolygonalDomain>(r#"{"outer":[[0,0],[1,0],[1,1]],"eps":2}"#).is_err());
    }
}
