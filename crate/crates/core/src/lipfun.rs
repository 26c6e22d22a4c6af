//! Bounded Lipschitz test functions as closed expression trees.
//!
//! Every constructor carries a compositional Lipschitz bound and sup bound,
//! so `max(sup, Lip)` (the `Lip_b` norm) is certified without sampling.
//! Gradients are never formed: pairings and traces only ever evaluate
//! functions at points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum LipFunc {
    Const { value: f64 },
    /// `x -> v . x`
    Linear { direction: Vec<f64> },
    /// `x -> |x - p|`
    DistTo { point: Vec<f64> },
    Neg { inner: Box<LipFunc> },
    Sum { left: Box<LipFunc>, right: Box<LipFunc> },
    Scale { factor: f64, inner: Box<LipFunc> },
    Min { left: Box<LipFunc>, right: Box<LipFunc> },
    Max { left: Box<LipFunc>, right: Box<LipFunc> },
    Clamp { inner: Box<LipFunc>, lo: f64, hi: f64 },
    /// `x -> a sin(k (x . d))` with `d` a unit vector.
    Wave { amplitude: f64, frequency: f64, direction: Vec<f64> },
}

use LipFunc::*;

impl LipFunc {
    pub fn constant(value: f64) -> Self {
        Const { value }
    }

    pub fn linear(direction: impl Into<Vec<f64>>) -> Self {
        Linear { direction: direction.into() }
    }

    pub fn dist_to(point: impl Into<Vec<f64>>) -> Self {
        DistTo { point: point.into() }
    }

    pub fn wave(amplitude: f64, frequency: f64, direction: impl Into<Vec<f64>>) -> Self {
        Wave { amplitude, frequency, direction: direction.into() }
    }

    pub fn neg(self) -> Self {
        Neg { inner: Box::new(self) }
    }

    pub fn add(self, other: LipFunc) -> Self {
        Sum { left: Box::new(self), right: Box::new(other) }
    }

    pub fn scale(self, factor: f64) -> Self {
        Scale { factor, inner: Box::new(self) }
    }

    pub fn min(self, other: LipFunc) -> Self {
        Min { left: Box::new(self), right: Box::new(other) }
    }

    pub fn max(self, other: LipFunc) -> Self {
        Max { left: Box::new(self), right: Box::new(other) }
    }

    pub fn clamp(self, lo: f64, hi: f64) -> Self {
        Clamp { inner: Box::new(self), lo, hi }
    }

    /// Checks vector dimensions against `dim` and scalar finiteness.
    pub fn validate(&self, dim: usize) -> Result<()> {
        let check = |v: &[f64]| {
            if v.len() != dim {
                Err(Error::DimensionMismatch { expected: dim, got: v.len() })
            } else if v.iter().any(|c| !c.is_finite()) {
                Err(Error::InvalidInput("non-finite vector in test function".into()))
            } else {
                Ok(())
            }
        };
        match self {
            Const { value } if !value.is_finite() => {
                Err(Error::InvalidInput("non-finite constant".into()))
            }
            Const { .. } => Ok(()),
            Linear { direction } => check(direction),
            DistTo { point } => check(point),
            Wave { amplitude, frequency, direction } => {
                check(direction)?;
                let n: f64 = direction.iter().map(|c| c * c).sum::<f64>().sqrt();
                if !(amplitude.is_finite() && frequency.is_finite()) || (n - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidInput("wave direction must be a unit vector".into()));
                }
                Ok(())
            }
            Neg { inner } | Scale { inner, .. } => inner.validate(dim),
            Clamp { inner, lo, hi } => {
                if !(lo <= hi) {
                    return Err(Error::InvalidInput(format!("clamp bounds {lo} > {hi}")));
                }
                inner.validate(dim)
            }
            Sum { left, right } | Min { left, right } | Max { left, right } => {
                left.validate(dim)?;
                right.validate(dim)
            }
        }
    }

    /// Evaluates at `x`; fails on a dimension mismatch.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let dim_check = |v: &[f64]| {
            if v.len() == x.len() {
                Ok(())
            } else {
                Err(Error::DimensionMismatch { expected: v.len(), got: x.len() })
            }
        };
        Ok(match self {
            Const { value } => *value,
            Linear { direction } => {
                dim_check(direction)?;
                direction.iter().zip(x).map(|(a, b)| a * b).sum()
            }
            DistTo { point } => {
                dim_check(point)?;
                point.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
            }
            Neg { inner } => -inner.eval(x)?,
            Sum { left, right } => left.eval(x)? + right.eval(x)?,
            Scale { factor, inner } => factor * inner.eval(x)?,
            Min { left, right } => left.eval(x)?.min(right.eval(x)?),
            Max { left, right } => left.eval(x)?.max(right.eval(x)?),
            Clamp { inner, lo, hi } => inner.eval(x)?.clamp(*lo, *hi),
            Wave { amplitude, frequency, direction } => {
                dim_check(direction)?;
                let s: f64 = direction.iter().zip(x).map(|(a, b)| a * b).sum();
                amplitude * (frequency * s).sin()
            }
        })
    }

    /// A global Lipschitz constant, composed bottom-up.
    pub fn lip_bound(&self) -> f64 {
        match self {
            Const { .. } => 0.0,
            Linear { direction } => direction.iter().map(|c| c * c).sum::<f64>().sqrt(),
            DistTo { .. } => 1.0,
            Neg { inner } | Clamp { inner, .. } => inner.lip_bound(),
            Sum { left, right } => left.lip_bound() + right.lip_bound(),
            Scale { factor, inner } => factor.abs() * inner.lip_bound(),
            Min { left, right } | Max { left, right } => left.lip_bound().max(right.lip_bound()),
            Wave { amplitude, frequency, .. } => amplitude.abs() * frequency.abs(),
        }
    }

    /// A global bound on `|f|`; infinite for unbounded functions.
    pub fn sup_bound(&self) -> f64 {
        match self {
            Const { value } => value.abs(),
            Linear { direction } => {
                if direction.iter().all(|&c| c == 0.0) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            DistTo { .. } => f64::INFINITY,
            Neg { inner } => inner.sup_bound(),
            Sum { left, right } => left.sup_bound() + right.sup_bound(),
            Scale { factor, inner } => {
                if *factor == 0.0 {
                    0.0
                } else {
                    factor.abs() * inner.sup_bound()
                }
            }
            Min { left, right } | Max { left, right } => left.sup_bound().max(right.sup_bound()),
            Clamp { inner, lo, hi } => inner.sup_bound().min(lo.abs().max(hi.abs())),
            Wave { amplitude, .. } => amplitude.abs(),
        }
    }

    /// `max(sup, Lip)`.
    pub fn lip_b_norm(&self) -> f64 {
        self.lip_bound().max(self.sup_bound())
    }
}

/// Families of weak-* convergent sequences `phi_k -> base`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceKind {
    /// `base + Wave(1/k, k, e_1)`: gradients stay of size one but do not converge.
    WavePerturbation,
    /// `base + (1/k) clamp(x_1, -1, 1)`: uniform convergence with vanishing slope.
    MollifiedRamp,
}

impl std::str::FromStr for SequenceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wave-perturbation" => Ok(SequenceKind::WavePerturbation),
            "mollified-ramp" => Ok(SequenceKind::MollifiedRamp),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

/// The `k`-th member of a weak-* convergent family around `base` in dimension `dim`.
pub fn weakstar_sequence(kind: SequenceKind, k: u32, base: &LipFunc, dim: usize) -> Result<LipFunc> {
    if k == 0 {
        return Err(Error::InvalidInput("sequence index must be positive".into()));
    }
    let kf = k as f64;
    let mut e1 = vec![0.0; dim];
    e1[0] = 1.0;
    let perturbation = match kind {
        SequenceKind::WavePerturbation => LipFunc::wave(1.0 / kf, kf, e1),
        SequenceKind::MollifiedRamp => LipFunc::linear(e1).clamp(-1.0, 1.0).scale(1.0 / kf),
    };
    Ok(match base {
        Const { value } if *value == 0.0 => perturbation,
        _ => base.clone().add(perturbation),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn eval_examples() {
        assert_eq!(LipFunc::dist_to([0.0, 0.0]).eval(&[3.0, 4.0]).unwrap(), 5.0);
        let f = LipFunc::linear([1.0, 0.0]).min(LipFunc::constant(0.5));
        assert_eq!(f.eval(&[1.0, 0.0]).unwrap(), 0.5);
        let w = LipFunc::wave(0.5, 2.0, [1.0, 0.0]);
        assert!((w.eval(&[PI / 4.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn eval_rejects_dimension_mismatch() {
        let f = LipFunc::dist_to([0.0, 0.0]);
        assert!(matches!(f.eval(&[1.0, 2.0, 3.0]), Err(Error::DimensionMismatch { .. })));
        assert!(f.validate(3).is_err());
    }

    #[test]
    fn lip_bound_examples() {
        let p = [0.0, 0.0];
        let q = [1.0, 1.0];
        assert_eq!(LipFunc::dist_to(p).add(LipFunc::dist_to(q)).lip_bound(), 2.0);
        let f = LipFunc::dist_to(p).min(LipFunc::linear([2.0, 0.0])).scale(3.0);
        assert_eq!(f.lip_bound(), 6.0);
        assert_eq!(LipFunc::wave(0.1, 50.0, [0.0, 1.0]).lip_bound(), 5.0);
    }

    #[test]
    fn weakstar_examples() {
        let phi = weakstar_sequence(SequenceKind::WavePerturbation, 10, &LipFunc::constant(0.0), 2).unwrap();
        assert_eq!(phi, LipFunc::wave(0.1, 10.0, vec![1.0, 0.0]));
        assert!((phi.lip_bound() - 1.0).abs() < 1e-15);
        assert!((phi.sup_bound() - 0.1).abs() < 1e-15);

        let base = LipFunc::linear([1.0, 0.0]);
        let phi1 = weakstar_sequence(SequenceKind::WavePerturbation, 1, &base, 2).unwrap();
        assert_eq!(phi1, base.clone().add(LipFunc::wave(1.0, 1.0, vec![1.0, 0.0])));
        for k in 1..50 {
            for kind in [SequenceKind::WavePerturbation, SequenceKind::MollifiedRamp] {
                let phi = weakstar_sequence(kind, k, &base, 2).unwrap();
                assert!(phi.lip_bound() <= base.lip_bound() + 1.0 + 1e-15);
            }
        }
        assert!("zigzag".parse::<SequenceKind>().is_err());
    }

    #[test]
    fn wave_perturbation_deviation_is_at_most_one_over_k() {
        let base = LipFunc::dist_to([0.3, -0.2]).min(LipFunc::constant(2.0));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<[f64; 2]> =
            (0..200).map(|_| [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)]).collect();
        for k in [1, 2, 5, 17, 100, 1000] {
            let phi = weakstar_sequence(SequenceKind::WavePerturbation, k, &base, 2).unwrap();
            let dev = pts
                .iter()
                .map(|x| (phi.eval(x).unwrap() - base.eval(x).unwrap()).abs())
                .fold(0.0, f64::max);
            assert!(dev <= 1.0 / k as f64, "k = {k}: {dev}");
        }
    }

    #[test]
    fn serde_is_tagged_and_roundtrips() {
        let f = LipFunc::dist_to([0.0, 1.0]).min(LipFunc::constant(1.0)).clamp(-1.0, 0.5);
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains(r#""kind":"Clamp""#));
        let g: LipFunc = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
    }

    fn arb_lipfunc() -> impl proptest::strategy::Strategy<Value = LipFunc> {
        use proptest::prelude::*;
        let coord = -3.0..3.0f64;
        let leaf = prop_oneof![
            coord.clone().prop_map(LipFunc::constant),
            (coord.clone(), coord.clone()).prop_map(|(a, b)| LipFunc::linear([a, b])),
            (coord.clone(), coord.clone()).prop_map(|(a, b)| LipFunc::dist_to([a, b])),
            (0.0..2.0f64, 0.0..20.0f64, 0.0..(2.0 * PI))
                .prop_map(|(a, k, t)| LipFunc::wave(a, k, [t.cos(), t.sin()])),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(LipFunc::neg),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(b)),
                (-4.0..4.0f64, inner.clone()).prop_map(|(s, a)| a.scale(s)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.min(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.max(b)),
                (inner, -2.0..0.0f64, 0.0..2.0f64).prop_map(|(a, lo, hi)| a.clamp(lo, hi)),
            ]
        })
    }

    proptest::proptest! {
        #![proptest_config(proptest::test_runner::Config::with_cases(64))]

        #[test]
        fn sampled_lipschitz_and_sup_bounds_hold(f in arb_lipfunc(), seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lip = f.lip_bound();
            let sup = f.sup_bound();
            for _ in 0..10_000 / 64 {
                let x = [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)];
                let y = [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)];
                let (fx, fy) = (f.eval(&x).unwrap(), f.eval(&y).unwrap());
                let d = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
                proptest::prop_assert!((fx - fy).abs() <= lip * d + 1e-12 * (1.0 + fx.abs().max(fy.abs())));
                proptest::prop_assert!(fx.abs() <= sup + 1e-12 * (1.0 + sup.min(1e300)));
            }
        }

        #[test]
        fn serde_roundtrip(f in arb_lipfunc()) {
            let s = serde_json::to_string(&f).unwrap();
            let g: LipFunc = serde_json::from_str(&s).unwrap();
            proptest::prop_assert_eq!(f, g);
        }
    }
}
