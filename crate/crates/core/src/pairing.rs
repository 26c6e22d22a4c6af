//! Pairing measures and normal traces of curve fields on polygonal sets.
//!
//! Everything here is telescoping: a curve contributes `w (φ(end) - φ(start))`
//! over each maximal stretch it spends in the open set, and the trace collects
//! the boundary terms. No gradients of `φ` are ever formed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{CurveField, PolyCurve};
use crate::error::{Error, Result};
use crate::lipfun::LipFunc;
use crate::measure::AtomicMeasure;
use crate::planar::{segment_hit, SegmentHit};
use crate::point::{Point, Point2};
use crate::quadrature::GaussLegendre;
use crate::region::{Location, PolyRegion, BOUNDARY_TOL};

/// Breakpoints closer than this (in segment-parameter units) are merged.
const MERGE_TOL: f64 = 1e-12;
/// Midpoint tolerance when classifying a sub-interval.
const MIDPOINT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Entering,
    Exiting,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub curve: usize,
    /// Parameter in `[0, 1]`, constant speed per segment.
    pub t: f64,
    pub location: Point2,
    pub direction: Direction,
}

/// How sub-intervals lying along the boundary are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverlapPolicy {
    /// Raise `DegenerateGeometry`.
    #[default]
    Reject,
    /// Count them as outside the open set.
    Exclude,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossingReport {
    pub crossings: Vec<Crossing>,
    /// Whether the curve starts out in the open interior.
    pub initially_inside: bool,
}

/// A curve cut at its boundary contacts.
#[derive(Debug, Clone)]
struct Pieces {
    /// Global parameters `u = segment index + local t` and locations.
    bps: Vec<(f64, Point2)>,
    /// Inside flag for each interval between consecutive breakpoints.
    inside: Vec<bool>,
    start_on_boundary: bool,
    end_on_boundary: bool,
}

impl Pieces {
    /// Maximal runs of inside intervals as breakpoint index pairs.
    fn runs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < self.inside.len() {
            if self.inside[i] {
                let s = i;
                while i < self.inside.len() && self.inside[i] {
                    i += 1;
                }
                out.push((s, i));
            } else {
                i += 1;
            }
        }
        out
    }

    fn outside_runs(&self) -> Vec<(usize, usize)> {
        let flipped = Pieces {
            bps: Vec::new(),
            inside: self.inside.iter().map(|b| !b).collect(),
            start_on_boundary: false,
            end_on_boundary: false,
        };
        flipped.runs()
    }
}

fn point_at(c: &PolyCurve<2>, u: f64) -> Point2 {
    let v = c.vertices();
    let n = v.len() - 1;
    if u <= 0.0 {
        return v[0];
    }
    if u >= n as f64 {
        return v[n];
    }
    let i = (u.floor() as usize).min(n - 1);
    let t = u - i as f64;
    if t == 0.0 {
        v[i]
    } else {
        v[i].lerp(&v[i + 1], t)
    }
}

fn cut(c: &PolyCurve<2>, e: &PolyRegion, policy: OverlapPolicy) -> Result<Pieces> {
    let v = c.vertices();
    let n = v.len() - 1;
    let start_on = e.dist_to_boundary(c.start()) <= BOUNDARY_TOL;
    let end_on = e.dist_to_boundary(c.end()) <= BOUNDARY_TOL;
    if c.length() == 0.0 {
        return Ok(Pieces { bps: vec![], inside: vec![], start_on_boundary: start_on, end_on_boundary: end_on });
    }
    for (i, &p) in v.iter().enumerate().take(n).skip(1) {
        if e.dist_to_boundary(p) <= BOUNDARY_TOL {
            return Err(Error::DegenerateGeometry(format!(
                "interior vertex {i} at {p:?} lies on the region boundary"
            )));
        }
    }
    let mut hits: Vec<f64> = Vec::new();
    for (i, (a, b)) in c.segments().enumerate() {
        for k in e.edges_near(a, b) {
            let (p, q) = e.edges()[k];
            match segment_hit(a, b, p, q) {
                SegmentHit::None => {}
                SegmentHit::Point(t) => hits.push(i as f64 + t),
                SegmentHit::Overlap(t0, t1) => {
                    hits.push(i as f64 + t0);
                    hits.push(i as f64 + t1);
                }
            }
        }
    }
    let (s, t) = (c.start(), c.end());
    let mut bps: Vec<(f64, Point2)> = vec![(0.0, s)];
    hits.sort_by(f64::total_cmp);
    for u in hits {
        if u <= 0.0 || u >= n as f64 {
            continue;
        }
        let loc = point_at(c, u);
        if (start_on && loc.dist(&s) <= 2.0 * BOUNDARY_TOL) || (end_on && loc.dist(&t) <= 2.0 * BOUNDARY_TOL) {
            continue;
        }
        if u - bps.last().unwrap().0 <= MERGE_TOL {
            continue;
        }
        bps.push((u, loc));
    }
    if n as f64 - bps.last().unwrap().0 <= MERGE_TOL && bps.len() > 1 {
        bps.pop();
    }
    bps.push((n as f64, t));

    let mut inside = Vec::with_capacity(bps.len() - 1);
    for w in bps.windows(2) {
        let mid = point_at(c, 0.5 * (w[0].0 + w[1].0));
        let flag = match e.classify_with_tol(mid, MIDPOINT_TOL) {
            Location::Inside => true,
            Location::Outside => false,
            Location::OnBoundary => match policy {
                OverlapPolicy::Exclude => false,
                OverlapPolicy::Reject => {
                    return Err(Error::DegenerateGeometry(format!(
                        "curve runs along the region boundary near {mid:?}"
                    )))
                }
            },
        };
        inside.push(flag);
    }
    Ok(Pieces { bps, inside, start_on_boundary: start_on, end_on_boundary: end_on })
}

/// Boundary crossings of one curve, in parameter order.
pub fn crossings(c: &PolyCurve<2>, e: &PolyRegion) -> Result<CrossingReport> {
    crossings_indexed(0, c, e)
}

fn crossings_indexed(index: usize, c: &PolyCurve<2>, e: &PolyRegion) -> Result<CrossingReport> {
    let pieces = cut(c, e, OverlapPolicy::Reject)?;
    let n = (c.vertices().len() - 1) as f64;
    let mut out = Vec::new();
    for k in 1..pieces.inside.len() {
        let (before, after) = (pieces.inside[k - 1], pieces.inside[k]);
        if before != after {
            let (u, location) = pieces.bps[k];
            out.push(Crossing {
                curve: index,
                t: u / n,
                location,
                direction: if after { Direction::Entering } else { Direction::Exiting },
            });
        }
    }
    Ok(CrossingReport {
        crossings: out,
        initially_inside: pieces.inside.first().copied().unwrap_or(false),
    })
}

/// Crossings of every curve, ordered by curve index then parameter.
pub fn field_crossings(f: &CurveField<2>, e: &PolyRegion) -> Result<Vec<Crossing>> {
    let per: Vec<Vec<Crossing>> = f
        .curves
        .par_iter()
        .enumerate()
        .map(|(i, c)| crossings_indexed(i, c, e).map(|r| r.crossings))
        .collect::<Result<_>>()?;
    Ok(per.into_iter().flatten().collect())
}

fn eval2(phi: &LipFunc, p: &Point2) -> Result<f64> {
    phi.eval(p.coords())
}

fn curve_pairing(c: &PolyCurve<2>, phi: &LipFunc, e: &PolyRegion, policy: OverlapPolicy) -> Result<f64> {
    let pieces = cut(c, e, policy)?;
    let mut acc = 0.0;
    for (s, t) in pieces.runs() {
        acc += eval2(phi, &pieces.bps[t].1)? - eval2(phi, &pieces.bps[s].1)?;
    }
    Ok(c.weight() * acc)
}

/// `(∇φ · F)(E)`: the pairing measure of the open set `E`.
pub fn pairing_over_set(f: &CurveField<2>, phi: &LipFunc, e: &PolyRegion) -> Result<f64> {
    pairing_over_set_with(f, phi, e, OverlapPolicy::Reject)
}

pub fn pairing_over_set_with(
    f: &CurveField<2>,
    phi: &LipFunc,
    e: &PolyRegion,
    policy: OverlapPolicy,
) -> Result<f64> {
    phi.validate(2)?;
    let parts: Vec<f64> = f
        .curves
        .par_iter()
        .map(|c| curve_pairing(c, phi, e, policy))
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().sum())
}

/// Normal trace of `F` on `∂E` with respect to the inward normal.
///
/// Entering crossings carry `+w`, exiting crossings `-w`. A curve endpoint on
/// `∂E` whose adjacent arc lies inside carries `+w` at a start and `-w` at an
/// end. Endpoints strictly inside belong to `div F`, not to the trace.
pub fn normal_trace(f: &CurveField<2>, e: &PolyRegion) -> Result<AtomicMeasure<2>> {
    normal_trace_with(f, e, OverlapPolicy::Reject)
}

pub fn normal_trace_with(f: &CurveField<2>, e: &PolyRegion, policy: OverlapPolicy) -> Result<AtomicMeasure<2>> {
    let per: Vec<Vec<(Point2, f64)>> = f
        .curves
        .par_iter()
        .map(|c| {
            let pieces = cut(c, e, policy)?;
            let w = c.weight();
            let mut atoms = Vec::new();
            for (s, t) in pieces.runs() {
                let first = s == 0;
                let last = t == pieces.inside.len();
                if !first || pieces.start_on_boundary {
                    atoms.push((pieces.bps[s].1, w));
                }
                if !last || pieces.end_on_boundary {
                    atoms.push((pieces.bps[t].1, -w));
                }
            }
            Ok(atoms)
        })
        .collect::<Result<_>>()?;
    Ok(AtomicMeasure::from_atoms(per.into_iter().flatten()))
}

/// `div F` restricted to the open set `E`.
pub fn divergence_in(f: &CurveField<2>, e: &PolyRegion) -> AtomicMeasure<2> {
    f.divergence().restrict(|p| e.classify(*p) == Location::Inside)
}

fn sub_curve(c: &PolyCurve<2>, pieces: &Pieces, s: usize, t: usize) -> Result<Option<PolyCurve<2>>> {
    let (u0, p0) = pieces.bps[s];
    let (u1, p1) = pieces.bps[t];
    let mut verts = vec![p0];
    let first_vertex = u0.floor() as usize + 1;
    let last_vertex = u1.ceil() as usize;
    for (k, &v) in c.vertices().iter().enumerate() {
        if k >= first_vertex && k < last_vertex && (k as f64) > u0 && (k as f64) < u1 {
            verts.push(v);
        }
    }
    verts.push(p1);
    let piece = PolyCurve::new(verts, c.weight())?;
    Ok((piece.length() > 0.0).then_some(piece))
}

fn clip_with(f: &CurveField<2>, e: &PolyRegion, policy: OverlapPolicy, inside: bool) -> Result<CurveField<2>> {
    let per: Vec<Vec<PolyCurve<2>>> = f
        .curves
        .par_iter()
        .map(|c| {
            let pieces = cut(c, e, policy)?;
            let runs = if inside { pieces.runs() } else { pieces.outside_runs() };
            let mut out = Vec::new();
            for (s, t) in runs {
                if let Some(p) = sub_curve(c, &pieces, s, t)? {
                    out.push(p);
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(CurveField::new(per.into_iter().flatten().collect()))
}

/// `1_E F`: every curve replaced by its maximal sub-curves in the open set.
pub fn clip_field(f: &CurveField<2>, e: &PolyRegion) -> Result<CurveField<2>> {
    clip_with(f, e, OverlapPolicy::Reject, true)
}

/// The parts of `F` outside the closure of `E`.
pub fn clip_field_outside(f: &CurveField<2>, e: &PolyRegion) -> Result<CurveField<2>> {
    clip_with(f, e, OverlapPolicy::Reject, false)
}

/// Largest piece length used when integrating along curves.
const FINE_PIECE: f64 = 1e-4;
/// Step for central differences of the test function.
const FD_STEP: f64 = 1e-5;

fn fd_gradient(test: &LipFunc, p: Point2) -> Result<Point2> {
    let mut g = [0.0; 2];
    for (k, slot) in g.iter_mut().enumerate() {
        let d = Point::<2>::unit(k) * FD_STEP;
        *slot = (eval2(test, &(p + d))? - eval2(test, &(p - d))?) / (2.0 * FD_STEP);
    }
    Ok(Point(g))
}

/// Residual of the product rule `∇φ·F = div(φF) - φ div F` tested against
/// `test`, with `⟨div(φF), test⟩ = -∫ φ ∇test · dF`.
pub fn product_rule_residual(f: &CurveField<2>, phi: &LipFunc, test: &LipFunc, order: usize) -> Result<f64> {
    phi.validate(2)?;
    test.validate(2)?;
    let rule = GaussLegendre::new(order.max(1));
    let per: Vec<(f64, f64)> = f
        .curves
        .par_iter()
        .map(|c| {
            let w = c.weight();
            let (mut lhs, mut pair) = (0.0, 0.0);
            for (a, b) in c.segments() {
                let len = a.dist(&b);
                if len == 0.0 {
                    continue;
                }
                let pieces = (len / FINE_PIECE).ceil().max(1.0) as usize;
                let d = b - a;
                for j in 0..pieces {
                    let (s0, s1) = (j as f64 / pieces as f64, (j + 1) as f64 / pieces as f64);
                    let (p0, p1) = (a.lerp(&b, s0), a.lerp(&b, s1));
                    let dphi = eval2(phi, &p1)? - eval2(phi, &p0)?;
                    let mut err = None;
                    let mean_test = rule.integrate(0.0, 1.0, |s| match eval2(test, &p0.lerp(&p1, s)) {
                        Ok(v) => v,
                        Err(e) => {
                            err = Some(e);
                            0.0
                        }
                    });
                    let div_part = rule.integrate(s0, s1, |s| {
                        let x = a.lerp(&b, s);
                        match (eval2(phi, &x), fd_gradient(test, x)) {
                            (Ok(v), Ok(g)) => v * g.dot(&d),
                            (Err(e), _) | (_, Err(e)) => {
                                err = Some(e);
                                0.0
                            }
                        }
                    });
                    if let Some(e) = err {
                        return Err(e);
                    }
                    pair += mean_test * dphi;
                    lhs -= div_part;
                }
            }
            Ok((w * lhs, w * pair))
        })
        .collect::<Result<_>>()?;
    let lhs: f64 = per.iter().map(|p| p.0).sum();
    let pair: f64 = per.iter().map(|p| p.1).sum();
    let mut div_term = 0.0;
    for a in f.divergence().atoms() {
        div_term += a.coefficient * eval2(phi, &a.location)? * eval2(test, &a.location)?;
    }
    Ok((lhs - pair - div_term).abs())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetwiseReport {
    pub values: Vec<f64>,
    pub limit: f64,
    pub tolerance: f64,
    pub converged: bool,
}

/// Pairings `v_k = (∇φ_k · F)(E)` for `k = 1..=k_max` against the limit value.
///
/// The tolerance is `mass(F) · sup_k Lip(φ_k) / k_max`.
pub fn setwise_probe(
    f: &CurveField<2>,
    sequence: impl Fn(u32) -> Result<LipFunc>,
    limit_fn: &LipFunc,
    e: &PolyRegion,
    k_max: u32,
) -> Result<SetwiseReport> {
    let mut values = Vec::with_capacity(k_max as usize);
    let mut lip: f64 = 0.0;
    for k in 1..=k_max {
        let phi = sequence(k)?;
        lip = lip.max(phi.lip_bound());
        values.push(pairing_over_set(f, &phi, e)?);
    }
    let limit = pairing_over_set(f, limit_fn, e)?;
    let tolerance = f.mass() * lip / k_max.max(1) as f64;
    let converged = values.last().is_none_or(|v| (v - limit).abs() <= tolerance);
    Ok(SetwiseReport { values, limit, tolerance, converged })
}
