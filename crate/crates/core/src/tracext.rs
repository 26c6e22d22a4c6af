//! Right inverses of the normal trace and field extensions.
//!
//! Given an atomic functional `m` on `∂U`, [`lift_surject`] builds a curve
//! field on `U` whose normal trace is exactly `m` and whose divergence inside
//! `U` sits on a finite net `Λ`. The construction follows an optimal dipole
//! representation of `m` term by term:
//!
//! * `a (δ_q - δ_p)` with `|p - q| <= δ`: one curve routed from `q` to `p`;
//! * `a (δ_q - δ_p)` with `|p - q| > δ`: a curve from the nearest `Λ` point
//!   to `p` and a curve from `q` to its nearest `Λ` point;
//! * terms involving the base point `e`: a single curve between the boundary
//!   point and its nearest `Λ` point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aespace::{ae_norm, AEElement, Node};
use crate::curve::{CurveField, PolyCurve};
use crate::domain::{PolygonalDomain, RoutingGraph};
use crate::error::{Error, Result};
use crate::measure::AtomicMeasure;
use crate::pairing::{divergence_in, normal_trace};
use crate::point::Point2;
use crate::region::{PolyRegion, BOUNDARY_TOL};

/// Boundary samples used to estimate the separation.
pub const SEPARATION_SAMPLES: usize = 400;
/// Normalization tolerance for comparing constructed measures.
pub const ATOM_TOL: f64 = 1e-9;

/// Everything the lift needs about a domain: routing graph, net `Λ` and base point `e ∈ Λ`.
#[derive(Debug, Clone)]
pub struct LiftConfig {
    graph: RoutingGraph,
    lambda: Vec<Point2>,
    lambda_component: Vec<Option<usize>>,
    e: Point2,
    separation: f64,
    lambda_clearance: f64,
}

impl LiftConfig {
    /// Builds the grid, selects `Λ` for the declared `δ` and uses the deepest
    /// grid node as `e`.
    pub fn build(domain: &PolygonalDomain, h: f64) -> Result<Self> {
        let delta = domain.delta.ok_or(Error::MissingConstants("delta"))?;
        let graph = RoutingGraph::build(domain, h)?;
        let lambda = graph.select_lambda(delta)?;
        Self::from_graph(graph, lambda, None)
    }

    /// Uses a caller-supplied `Λ` (and optionally `e`, which is added to `Λ`).
    pub fn with_lambda(domain: &PolygonalDomain, h: f64, lambda: Vec<Point2>, e: Option<Point2>) -> Result<Self> {
        let graph = RoutingGraph::build(domain, h)?;
        Self::from_graph(graph, lambda, e)
    }

    fn from_graph(graph: RoutingGraph, mut lambda: Vec<Point2>, e: Option<Point2>) -> Result<Self> {
        let region = graph.region();
        let e = match e {
            Some(e) => e,
            None => graph
                .deepest_node()
                .ok_or_else(|| Error::InvalidInput("domain has no interior grid node".into()))?,
        };
        for &l in lambda.iter().chain(std::iter::once(&e)) {
            if !graph.region().contains(l) {
                return Err(Error::InvalidInput(format!("net point {l:?} is not inside the domain")));
            }
        }
        let e_clear = region.dist_to_boundary(e);
        if let Some(delta) = graph.domain().delta {
            if e_clear <= delta {
                return Err(Error::InvalidInput(format!(
                    "base point {e:?} has clearance {e_clear}, which must exceed delta = {delta}"
                )));
            }
        }
        if !lambda.contains(&e) {
            lambda.push(e);
        }
        let lambda_component: Vec<Option<usize>> = lambda.iter().map(|&l| graph.component_of(l)).collect();
        for c in 0..graph.component_count() {
            if !lambda_component.contains(&Some(c)) {
                return Err(Error::InvalidInput(format!("no net point in domain component {c}")));
            }
        }
        let separation = graph.separation(&lambda, SEPARATION_SAMPLES)?;
        let lambda_clearance = graph.lambda_clearance(&lambda);
        Ok(LiftConfig { graph, lambda, lambda_component, e, separation, lambda_clearance })
    }

    pub fn domain(&self) -> &PolygonalDomain {
        self.graph.domain()
    }

    pub fn graph(&self) -> &RoutingGraph {
        &self.graph
    }

    pub fn lambda(&self) -> &[Point2] {
        &self.lambda
    }

    pub fn base_point(&self) -> Point2 {
        self.e
    }

    /// Estimated `sep_γ(Λ, U)`.
    pub fn separation(&self) -> f64 {
        self.separation
    }

    /// `dist(Λ, ∂U)`.
    pub fn lambda_clearance(&self) -> f64 {
        self.lambda_clearance
    }

    /// The same configuration with `Λ = {e}`.
    pub fn single_point(&self) -> Result<Self> {
        Self::from_graph(self.graph.clone(), vec![self.e], Some(self.e))
    }

    /// Euclidean-nearest net point in the component of `p`, lowest
    /// lexicographic position on ties.
    pub fn nearest_lambda(&self, p: Point2) -> Result<Point2> {
        let comp = self.graph.component_of(p);
        self.lambda
            .iter()
            .zip(&self.lambda_component)
            .filter(|(_, c)| comp.is_some() && **c == comp)
            .map(|(l, _)| *l)
            .min_by(|a, b| a.dist(&p).total_cmp(&b.dist(&p)).then(a.lex_cmp(b)))
            .ok_or(Error::Disconnected { from: p.0, to: self.e.0 })
    }
}

/// `C = max(1/ε, 4 sep/δ, 2 sep/dist(Λ, ∂U)) + 2/δ`.
pub fn bound_constant_from(eps: f64, delta: f64, sep: f64, dist: f64) -> f64 {
    (1.0 / eps).max(4.0 * sep / delta).max(2.0 * sep / dist) + 2.0 / delta
}

pub fn bound_constant(cfg: &LiftConfig) -> Result<f64> {
    let d = cfg.domain();
    let eps = d.eps.ok_or(Error::MissingConstants("eps"))?;
    let delta = d.delta.ok_or(Error::MissingConstants("delta"))?;
    Ok(bound_constant_from(eps, delta, cfg.separation, cfg.lambda_clearance))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiftCase {
    /// Nearby boundary points joined directly.
    Near,
    /// Distant boundary points joined through the net.
    Far,
    /// A boundary point against the base point.
    Base,
}

/// How one dipole term was realized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftRecord {
    pub case: LiftCase,
    pub a: f64,
    pub p: Node<2>,
    pub q: Node<2>,
    pub route_lengths: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lift {
    pub field: CurveField<2>,
    pub norm: f64,
    pub provenance: Vec<LiftRecord>,
}

impl Lift {
    /// `field_mass + |div F|(U)`.
    pub fn cost(&self, region: &PolyRegion) -> f64 {
        self.field.mass() + divergence_in(&self.field, region).total_variation()
    }
}

fn oriented(curve: PolyCurve<2>, weight: f64, reverse: bool) -> PolyCurve<2> {
    let c = if reverse { curve.reversed() } else { curve };
    c.with_weight(weight)
}

/// A curve field on `U` with normal trace `m` and interior divergence on `Λ`.
pub fn lift_surject(cfg: &LiftConfig, m: &AEElement<2>) -> Result<Lift> {
    let region = cfg.graph.region();
    for a in m.support.atoms() {
        let d = region.dist_to_boundary(a.location);
        if d > BOUNDARY_TOL {
            return Err(Error::AtomOffBoundary { location: a.location.0, distance: d });
        }
    }
    let norm = ae_norm(m);
    let delta = cfg.domain().delta.ok_or(Error::MissingConstants("delta"))?;
    let built: Vec<Result<(Vec<PolyCurve<2>>, LiftRecord)>> = norm
        .rep
        .terms
        .par_iter()
        .map(|t| {
            let a = t.a;
            match (t.p, t.q) {
                (Node::At(p), Node::At(q)) if p.dist(&q) <= delta => {
                    let (c, l) = cfg.graph.route(q, p)?;
                    Ok((vec![c.with_weight(a)], LiftRecord { case: LiftCase::Near, a, p: t.p, q: t.q, route_lengths: vec![l] }))
                }
                (Node::At(p), Node::At(q)) => {
                    let (lp, lq) = (cfg.nearest_lambda(p)?, cfg.nearest_lambda(q)?);
                    let (c1, l1) = cfg.graph.route(lp, p)?;
                    let (c2, l2) = cfg.graph.route(q, lq)?;
                    Ok((
                        vec![c1.with_weight(a), c2.with_weight(a)],
                        LiftRecord { case: LiftCase::Far, a, p: t.p, q: t.q, route_lengths: vec![l1, l2] },
                    ))
                }
                (Node::At(p), Node::Base) => {
                    let lp = cfg.nearest_lambda(p)?;
                    let (c, l) = cfg.graph.route(p, lp)?;
                    Ok((vec![oriented(c, a, true)], LiftRecord { case: LiftCase::Base, a, p: t.p, q: t.q, route_lengths: vec![l] }))
                }
                (Node::Base, Node::At(q)) => {
                    let lq = cfg.nearest_lambda(q)?;
                    let (c, l) = cfg.graph.route(q, lq)?;
                    Ok((vec![oriented(c, a, false)], LiftRecord { case: LiftCase::Base, a, p: t.p, q: t.q, route_lengths: vec![l] }))
                }
                (Node::Base, Node::Base) => Ok((vec![], LiftRecord { case: LiftCase::Base, a, p: t.p, q: t.q, route_lengths: vec![] })),
            }
        })
        .collect();
    let mut curves = Vec::new();
    let mut provenance = Vec::new();
    for r in built {
        let (cs, rec) = r?;
        curves.extend(cs);
        provenance.push(rec);
    }
    Ok(Lift { field: CurveField::new(curves), norm: norm.value, provenance })
}

/// `F` on `U ∪ (closure U)^c` with trace `m` from inside and `-m` from outside.
pub fn two_sided_lift(cfg_in: &LiftConfig, cfg_out: &LiftConfig, m: &AEElement<2>) -> Result<CurveField<2>> {
    cfg_in.domain().check_two_sided_boundary()?;
    let inner = lift_surject(cfg_in, m)?;
    let neg = AEElement::with_label(m.support.scaled(-1.0), m.label.clone());
    let outer = lift_surject(cfg_out, &neg)?;
    Ok(inner.field.union(&outer.field))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extension {
    pub field: CurveField<2>,
    /// The normal trace of the input on `∂U`.
    pub trace: AtomicMeasure<2>,
    /// The exterior part added to the input.
    pub exterior: CurveField<2>,
    pub provenance: Vec<LiftRecord>,
}

/// `F̃ = F ⊎ G` where `G` lives in `box \ closure(U)` with trace `-N_U(F)`.
pub fn extend_field(f: &CurveField<2>, u: &PolygonalDomain, cfg_out: &LiftConfig) -> Result<Extension> {
    u.check_two_sided_boundary()?;
    let trace = normal_trace(f, &u.region)?.normalized(ATOM_TOL);
    let g = lift_surject(cfg_out, &AEElement::new(trace.scaled(-1.0)))?;
    Ok(Extension { field: f.union(&g.field), trace, exterior: g.field, provenance: g.provenance })
}

/// Where a divergence-free extension is divergence-free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveDomain {
    pub bounding_box: PolyRegion,
    /// Points removed from the box; empty for a global extension.
    pub punctures: Vec<Point2>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivFreeExtension {
    pub extension: Extension,
    pub domain: EffectiveDomain,
    /// Net divergence left at the single net point (global case only).
    pub residual: f64,
}

/// Extends a divergence-free field on `U`.
///
/// With a connected complement the exterior lift uses a single net point,
/// where all divergence cancels; this needs zero net flux through `∂U`.
/// Otherwise the result is divergence-free away from the exterior net.
pub fn extend_divfree(
    f: &CurveField<2>,
    u: &PolygonalDomain,
    cfg_out: &LiftConfig,
    bx: &PolyRegion,
    connected_complement: bool,
) -> Result<DivFreeExtension> {
    let inner_div = divergence_in(f, &u.region).normalized(ATOM_TOL);
    if !inner_div.is_empty() {
        return Err(Error::InvalidInput(format!("field has divergence inside the domain: {inner_div:?}")));
    }
    u.check_two_sided_boundary()?;
    let trace = normal_trace(f, &u.region)?.normalized(ATOM_TOL);
    if connected_complement {
        let net = trace.total();
        if net.abs() > ATOM_TOL * (1.0 + trace.total_variation()) {
            return Err(Error::NonzeroNetFlux(net));
        }
        let single = cfg_out.single_point()?;
        let g = lift_surject(&single, &AEElement::new(trace.scaled(-1.0)))?;
        let field = f.union(&g.field);
        let residual = field.divergence().restrict(|p| *p == single.base_point()).total();
        Ok(DivFreeExtension {
            extension: Extension { field, trace, exterior: g.field, provenance: g.provenance },
            domain: EffectiveDomain { bounding_box: bx.clone(), punctures: vec![] },
            residual,
        })
    } else {
        let ext = extend_field(f, u, cfg_out)?;
        Ok(DivFreeExtension {
            extension: ext,
            domain: EffectiveDomain { bounding_box: bx.clone(), punctures: cfg_out.lambda().to_vec() },
            residual: 0.0,
        })
    }
}
