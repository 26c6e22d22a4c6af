use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeTuple;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A point (or displacement) in `N`-dimensional Euclidean space.
#[derive(Clone, Copy, PartialEq)]
pub struct Point<const N: usize>(pub [f64; N]);

pub type Point2 = Point<2>;
pub type Point3 = Point<3>;

impl<const N: usize> Point<N> {
    pub const fn new(coords: [f64; N]) -> Self {
        Point(coords)
    }

    pub fn origin() -> Self {
        Point([0.0; N])
    }

    pub fn unit(axis: usize) -> Self {
        let mut c = [0.0; N];
        c[axis] = 1.0;
        Point(c)
    }

    pub fn coords(&self) -> &[f64; N] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(&self, other: &Self) -> f64 {
        (*self - *other).norm()
    }

    /// `self + t (other - self)`.
    pub fn lerp(&self, other: &Self, t: f64) -> Self {
        let mut c = self.0;
        for (ci, (a, b)) in c.iter_mut().zip(self.0.iter().zip(other.0.iter())) {
            *ci = a + t * (b - a);
        }
        Point(c)
    }

    /// Total lexicographic order on coordinates (`total_cmp` per axis).
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

impl Point2 {
    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn y(&self) -> f64 {
        self.0[1]
    }

    /// z-component of the 2D cross product.
    pub fn cross(&self, other: &Self) -> f64 {
        self.0[0] * other.0[1] - self.0[1] * other.0[0]
    }

    /// Counterclockwise quarter turn.
    pub fn perp(&self) -> Self {
        Point([-self.0[1], self.0[0]])
    }
}

impl<const N: usize> Default for Point<N> {
    fn default() -> Self {
        Self::origin()
    }
}

impl<const N: usize> Index<usize> for Point<N> {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl<const N: usize> Add for Point<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
        self
    }
}

impl<const N: usize> Sub for Point<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a -= b;
        }
        self
    }
}

impl<const N: usize> Mul<f64> for Point<N> {
    type Output = Self;
    fn mul(mut self, s: f64) -> Self {
        for a in self.0.iter_mut() {
            *a *= s;
        }
        self
    }
}

impl<const N: usize> fmt::Debug for Point<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl<const N: usize> From<[f64; N]> for Point<N> {
    fn from(c: [f64; N]) -> Self {
        Point(c)
    }
}

impl<const N: usize> Serialize for Point<N> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut t = s.serialize_tuple(N)?;
        for c in &self.0 {
            t.serialize_element(c)?;
        }
        t.end()
    }
}

impl<'de, const N: usize> Deserialize<'de> for Point<N> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct PointVisitor<const M: usize>;

        impl<'de, const M: usize> Visitor<'de> for PointVisitor<M> {
            type Value = Point<M>;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "an array of {M} finite numbers")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Point<M>, A::Error> {
                let mut c = [0.0f64; M];
                for (i, slot) in c.iter_mut().enumerate() {
                    *slot = seq
                        .next_element()?
                        .ok_or_else(|| de::Error::invalid_length(i, &self))?;
                }
                if seq.next_element::<f64>()?.is_some() {
                    return Err(de::Error::invalid_length(M + 1, &self));
                }
                if c.iter().any(|v| !v.is_finite()) {
                    return Err(de::Error::custom("non-finite coordinate"));
                }
                Ok(Point(c))
            }
        }

        d.deserialize_tuple(N, PointVisitor::<N>)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_norms() {
        let p = Point([3.0, 4.0]);
        assert_eq!(p.norm(), 5.0);
        assert_eq!(p.dist(&Point::origin()), 5.0);
        assert_eq!((p - Point([1.0, 1.0])).0, [2.0, 3.0]);
        assert_eq!(p.lerp(&Point([5.0, 4.0]), 0.5).0, [4.0, 4.0]);
        assert_eq!(Point([1.0, 0.0]).perp().0, [0.0, 1.0]);
    }

    #[test]
    fn serde_roundtrip_and_rejects_wrong_length() {
        let p = Point([0.1, -2.5e-300]);
        let s = serde_json::to_string(&p).unwrap();
        let q: Point2 = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        assert!(serde_json::from_str::<Point2>("[1.0, 2.0, 3.0]").is_err());
        assert!(serde_json::from_str::<Point2>("[1.0]").is_err());
    }
}
