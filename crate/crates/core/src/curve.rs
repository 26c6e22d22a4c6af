//! Weighted polygonal curves and the curve fields they generate.
//!
//! A curve `gamma` with weight `w` acts on vector test fields by
//! `Phi -> w * int_0^1 Phi(gamma(t)) . gamma'(t) dt`. Its distributional
//! divergence is the dipole `w (delta_{gamma(0)} - delta_{gamma(1)})`, the
//! sign for which `int grad(phi) . dF = -int phi d(div F)` holds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::AtomicMeasure;
use crate::point::Point;
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, PartialEq)]
pub struct PolyCurve<const N: usize> {
    vertices: Vec<Point<N>>,
    weight: f64,
}

impl<const N: usize> PolyCurve<N> {
    /// Validates and normalizes: consecutive duplicate vertices are removed,
    /// except that a curve whose vertices all coincide is kept as a
    /// degenerate two-vertex curve of length zero.
    pub fn new(vertices: Vec<Point<N>>, weight: f64) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidCurve(format!(
                "need at least 2 vertices, got {}",
                vertices.len()
            )));
        }
        if !weight.is_finite() {
            return Err(Error::InvalidCurve(format!("non-finite weight {weight}")));
        }
        if let Some(v) = vertices.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidCurve(format!("non-finite vertex {v:?}")));
        }
        let mut vs: Vec<Point<N>> = Vec::with_capacity(vertices.len());
        for v in vertices {
            if vs.last() != Some(&v) {
                vs.push(v);
            }
        }
        if vs.len() == 1 {
            vs.push(vs[0]);
        }
        Ok(PolyCurve { vertices: vs, weight })
    }

    pub fn segment(a: Point<N>, b: Point<N>, weight: f64) -> Result<Self> {
        Self::new(vec![a, b], weight)
    }

    pub fn vertices(&self) -> &[Point<N>] {
        &self.vertices
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn start(&self) -> Point<N> {
        self.vertices[0]
    }

    pub fn end(&self) -> Point<N> {
        *self.vertices.last().unwrap()
    }

    pub fn is_closed(&self) -> bool {
        self.start() == self.end()
    }

    pub fn with_weight(&self, weight: f64) -> Self {
        PolyCurve { vertices: self.vertices.clone(), weight }
    }

    /// Same trace traversed backwards, same weight.
    pub fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        PolyCurve { vertices, weight: self.weight }
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point<N>, Point<N>)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    /// Arclength; independent of the weight.
    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| a.dist(&b)).sum()
    }

    /// `weight * (delta_start - delta_end)`; empty for closed curves.
    pub fn divergence(&self) -> AtomicMeasure<N> {
        AtomicMeasure::from_atoms([(self.start(), self.weight), (self.end(), -self.weight)])
    }

    /// `weight * int Phi(gamma) . dgamma` with a Gauss-Legendre rule per segment.
    pub fn pair_vector<F>(&self, phi: &F, rule: &GaussLegendre) -> Result<f64>
    where
        F: Fn(&Point<N>) -> Result<Point<N>> + ?Sized,
    {
        let mut total = 0.0;
        for (a, b) in self.segments() {
            let d = b - a;
            let mut seg = 0.0;
            for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                seg += w * phi(&a.lerp(&b, t))?.dot(&d);
            }
            total += seg;
        }
        Ok(self.weight * total)
    }
}

/// Convenience: `curve_length` as a free function.
pub fn curve_length<const N: usize>(c: &PolyCurve<N>) -> f64 {
    c.length()
}

/// A finite sum of weighted curves.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurveField<const N: usize> {
    pub curves: Vec<PolyCurve<N>>,
}

impl<const N: usize> CurveField<N> {
    pub fn new(curves: Vec<PolyCurve<N>>) -> Self {
        CurveField { curves }
    }

    pub fn empty() -> Self {
        CurveField { curves: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn push(&mut self, c: PolyCurve<N>) {
        self.curves.push(c);
    }

    /// Disjoint union `self ⊎ other`.
    pub fn union(&self, other: &Self) -> Self {
        let mut curves = self.curves.clone();
        curves.extend(other.curves.iter().cloned());
        CurveField { curves }
    }

    pub fn scaled(&self, s: f64) -> Self {
        CurveField {
            curves: self.curves.iter().map(|c| c.with_weight(s * c.weight())).collect(),
        }
    }

    /// `sum_i |w_i| len(gamma_i)`.
    pub fn mass(&self) -> f64 {
        self.curves.iter().map(|c| c.weight().abs() * c.length()).sum()
    }

    /// Coalesced `sum_i w_i (delta_{start_i} - delta_{end_i})`.
    pub fn divergence(&self) -> AtomicMeasure<N> {
        AtomicMeasure::from_atoms(
            self.curves
                .iter()
                .flat_map(|c| [(c.start(), c.weight()), (c.end(), -c.weight())]),
        )
    }

    /// `sum_i w_i int Phi(gamma_i) . dgamma_i`, `order`-point Gauss-Legendre per
    /// segment. Curves are reduced in parallel; the sum is taken in curve order.
    pub fn pair_vector<F>(&self, phi: &F, order: usize) -> Result<f64>
    where
        F: Fn(&Point<N>) -> Result<Point<N>> + Sync + ?Sized,
    {
        let rule = GaussLegendre::new(order);
        let parts: Vec<Result<f64>> =
            self.curves.par_iter().map(|c| c.pair_vector(phi, &rule)).collect();
        parts.into_iter().sum()
    }
}

pub fn field_divergence<const N: usize>(f: &CurveField<N>) -> AtomicMeasure<N> {
    f.divergence()
}

pub fn field_mass<const N: usize>(f: &CurveField<N>) -> f64 {
    f.mass()
}

pub fn pair_vector<const N: usize, F>(f: &CurveField<N>, phi: &F, order: usize) -> Result<f64>
where
    F: Fn(&Point<N>) -> Result<Point<N>> + Sync + ?Sized,
{
    f.pair_vector(phi, order)
}

/// On-disk record for one curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord<const N: usize> {
    pub weight: f64,
    pub vertices: Vec<Point<N>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldFile<const N: usize> {
    pub curves: Vec<CurveRecord<N>>,
}

impl<const N: usize> From<&CurveField<N>> for FieldFile<N> {
    fn from(f: &CurveField<N>) -> Self {
        FieldFile {
            curves: f
                .curves
                .iter()
                .map(|c| CurveRecord { weight: c.weight(), vertices: c.vertices().to_vec(), kind: None })
                .collect(),
        }
    }
}

impl<const N: usize> TryFrom<FieldFile<N>> for CurveField<N> {
    type Error = Error;
    fn try_from(f: FieldFile<N>) -> Result<Self> {
        let curves = f
            .curves
            .into_iter()
            .map(|r| PolyCurve::new(r.vertices, r.weight))
            .collect::<Result<Vec<_>>>()?;
        Ok(CurveField { curves })
    }
}

impl<const N: usize> Serialize for CurveField<N> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FieldFile::from(self).serialize(s)
    }
}

impl<'de, const N: usize> Deserialize<'de> for CurveField<N> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = FieldFile::<N>::deserialize(d)?;
        CurveField::try_from(file).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::Point2;

    fn p(x: f64, y: f64) -> Point2 {
        Point([x, y])
    }

    fn seg(a: Point2, b: Point2, w: f64) -> PolyCurve<2> {
        PolyCurve::segment(a, b, w).unwrap()
    }

    #[test]
    fn lengths() {
        assert_eq!(seg(p(0.0, 0.0), p(3.0, 4.0), 1.0).length(), 5.0);
        let c = PolyCurve::new(vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0)], 7.0).unwrap();
        assert_eq!(curve_length(&c), 2.0);
        let d = seg(p(2.0, 2.0), p(2.0, 2.0), 1.0);
        assert_eq!(d.length(), 0.0);
        assert_eq!(d.vertices().len(), 2);
    }

    #[test]
    fn normalization_drops_repeated_vertices() {
        let c = PolyCurve::new(vec![p(0.0, 0.0), p(0.0, 0.0), p(1.0, 0.0), p(1.0, 0.0)], 1.0).unwrap();
        assert_eq!(c.vertices().len(), 2);
        assert!(PolyCurve::new(vec![p(0.0, 0.0)], 1.0).is_err());
        assert!(PolyCurve::new(vec![p(0.0, f64::NAN), p(0.0, 0.0)], 1.0).is_err());
    }

    #[test]
    fn divergence_examples() {
        let f = CurveField::new(vec![seg(p(0.0, 0.0), p(1.0, 0.0), 1.0)]);
        let d = field_divergence(&f);
        assert_eq!(d.coefficient_at(&p(0.0, 0.0)), 1.0);
        assert_eq!(d.coefficient_at(&p(1.0, 0.0)), -1.0);

        let square = PolyCurve::new(
            vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0), p(0.0, 0.0)],
            3.0,
        )
        .unwrap();
        assert!(square.is_closed());
        assert!(CurveField::new(vec![square]).divergence().is_empty());

        let (a, b, c) = (p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0));
        let chain = CurveField::new(vec![seg(a, b, 1.0), seg(b, c, 1.0)]);
        let d = chain.divergence();
        assert_eq!(d.len(), 2);
        assert_eq!(d.coefficient_at(&a), 1.0);
        assert_eq!(d.coefficient_at(&c), -1.0);
    }

    #[test]
    fn pair_vector_examples() {
        let f = CurveField::new(vec![seg(p(0.0, 0.0), p(1.0, 0.0), 1.0)]);
        let e1 = |_: &Point2| Ok(p(1.0, 0.0));
        assert!((f.pair_vector(&e1, 2).unwrap() - 1.0).abs() < 1e-15);
        // int_0^1 t dt computed independently by the trapezoid rule (exact for linear).
        let oracle = 0.5 * (0.0 + 1.0);
        let x1 = |x: &Point2| Ok(p(x.x(), 0.0));
        assert!((f.pair_vector(&x1, 2).unwrap() - oracle).abs() < 1e-15);

        let loop_ = CurveField::new(vec![PolyCurve::new(
            vec![p(0.2, 0.1), p(1.3, 0.4), p(0.7, 2.0), p(0.2, 0.1)],
            2.5,
        )
        .unwrap()]);
        let grad_xy = |x: &Point2| Ok(p(x.y(), x.x()));
        assert!(loop_.pair_vector(&grad_xy, 3).unwrap().abs() < 1e-14);
    }

    #[test]
    fn pair_vector_propagates_evaluation_errors() {
        let f = CurveField::new(vec![seg(p(0.0, 0.0), p(1.0, 0.0), 1.0)]);
        let bad = |_: &Point2| -> Result<Point2> { Err(Error::Evaluation("boom".into())) };
        assert!(matches!(f.pair_vector(&bad, 2), Err(Error::Evaluation(_))));
    }

    #[test]
    fn masses() {
        let f = CurveField::new(vec![
            seg(p(0.0, 0.0), p(3.0, 4.0), 2.0),
            PolyCurve::new(vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0)], -3.0).unwrap(),
        ]);
        assert_eq!(field_mass(&f), 16.0);
        assert_eq!(field_mass(&CurveField::<2>::empty()), 0.0);
        assert_eq!(CurveField::new(vec![seg(p(0.0, 0.0), p(1.0, 0.0), 1.0)]).mass(), 1.0);
    }

    #[test]
    fn reversal_with_negated_weight_is_the_same_current() {
        let c = PolyCurve::new(vec![p(0.0, 0.0), p(1.0, 0.5), p(2.0, -1.0)], 1.5).unwrap();
        let f = CurveField::new(vec![c.clone()]);
        let g = CurveField::new(vec![c.reversed().with_weight(-1.5)]);
        assert_eq!(f.divergence(), g.divergence());
        let phi = |x: &Point2| Ok(p(x.x() * x.y(), x.x().sin()));
        let (a, b) = (f.pair_vector(&phi, 6).unwrap(), g.pair_vector(&phi, 6).unwrap());
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn field_file_roundtrip() {
        let f = CurveField::new(vec![seg(p(0.1, 0.2), p(0.30000000000000004, 1e-17), -0.7)]);
        let s = serde_json::to_string(&f).unwrap();
        let g: CurveField<2> = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
    }
}
