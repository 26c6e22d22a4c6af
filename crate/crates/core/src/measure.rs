use serde::{Deserialize, Serialize};

use crate::point::Point;

/// A signed point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom<const N: usize> {
    pub location: Point<N>,
    pub coefficient: f64,
}

/// A finitely supported signed measure `sum_i c_i delta_{x_i}`.
///
/// Atoms are kept sorted lexicographically by location. Locations are
/// pairwise distinct (coalesced on exact equality) and coefficients are
/// nonzero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AtomicMeasure<const N: usize> {
    atoms: Vec<Atom<N>>,
}

impl<const N: usize> AtomicMeasure<N> {
    pub fn new() -> Self {
        AtomicMeasure { atoms: Vec::new() }
    }

    /// Builds a measure from arbitrary `(location, coefficient)` pairs,
    /// summing coefficients at identical locations and dropping exact zeros.
    pub fn from_atoms(atoms: impl IntoIterator<Item = (Point<N>, f64)>) -> Self {
        let mut raw: Vec<Atom<N>> = atoms
            .into_iter()
            .map(|(location, coefficient)| Atom { location, coefficient })
            .collect();
        raw.sort_by(|a, b| a.location.lex_cmp(&b.location));
        let mut out: Vec<Atom<N>> = Vec::with_capacity(raw.len());
        for a in raw {
            match out.last_mut() {
                Some(last) if last.location == a.location => last.coefficient += a.coefficient,
                _ => out.push(a),
            }
        }
        out.retain(|a| a.coefficient != 0.0);
        AtomicMeasure { atoms: out }
    }

    pub fn dirac(location: Point<N>) -> Self {
        Self::from_atoms([(location, 1.0)])
    }

    pub fn atoms(&self) -> &[Atom<N>] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `m(X)`, the net mass.
    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|a| a.coefficient).sum()
    }

    /// Total variation `sum |c_i|`.
    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.coefficient.abs()).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_atoms(self.atoms.iter().map(|a| (a.location, s * a.coefficient)))
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self::from_atoms(
            self.atoms
                .iter()
                .chain(other.atoms.iter())
                .map(|a| (a.location, a.coefficient)),
        )
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.scaled(-1.0))
    }

    /// Keeps the atoms whose location satisfies `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(&Point<N>) -> bool) -> Self {
        AtomicMeasure {
            atoms: self.atoms.iter().copied().filter(|a| keep(&a.location)).collect(),
        }
    }

    /// `sum_i c_i f(x_i)`.
    pub fn integrate(&self, mut f: impl FnMut(&Point<N>) -> f64) -> f64 {
        self.atoms.iter().map(|a| a.coefficient * f(&a.location)).sum()
    }

    /// Coefficient at exactly `location`, or zero.
    pub fn coefficient_at(&self, location: &Point<N>) -> f64 {
        self.atoms
            .binary_search_by(|a| a.location.lex_cmp(location))
            .map(|i| self.atoms[i].coefficient)
            .unwrap_or(0.0)
    }

    /// Tolerance-based normalization for comparing floating-point results:
    /// atoms within `tol` of an earlier (lexicographic) atom are merged into
    /// it, then atoms with `|c| <= tol` are dropped.
    pub fn normalized(&self, tol: f64) -> Self {
        let mut merged: Vec<Atom<N>> = Vec::new();
        for a in &self.atoms {
            match merged.iter_mut().find(|m| m.location.dist(&a.location) <= tol) {
                Some(m) => m.coefficient += a.coefficient,
                None => merged.push(*a),
            }
        }
        merged.retain(|a| a.coefficient.abs() > tol);
        AtomicMeasure { atoms: merged }
    }

    /// True when `self - other` normalizes to the zero measure at `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.minus(other).normalized(tol).is_empty()
    }
}

impl<const N: usize> Serialize for AtomicMeasure<N> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.atoms.serialize(s)
    }
}

impl<'de, const N: usize> Deserialize<'de> for AtomicMeasure<N> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let atoms = Vec::<Atom<N>>::deserialize(d)?;
        if atoms.iter().any(|a| !a.coefficient.is_finite()) {
            return Err(serde::de::Error::custom("non-finite coefficient"));
        }
        Ok(Self::from_atoms(atoms.into_iter().map(|a| (a.location, a.coefficient))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::Point2;

    fn p(x: f64, y: f64) -> Point2 {
        Point([x, y])
    }

    #[test]
    fn coalesces_on_exact_equality_only() {
        let m = AtomicMeasure::from_atoms([(p(0.0, 0.0), 1.0), (p(0.0, 0.0), 2.0), (p(1e-15, 0.0), 1.0)]);
        assert_eq!(m.len(), 2);
        assert_eq!(m.coefficient_at(&p(0.0, 0.0)), 3.0);
        let n = m.normalized(1e-9);
        assert_eq!(n.len(), 1);
        assert_eq!(n.atoms()[0].coefficient, 4.0);
    }

    #[test]
    fn cancellation_removes_atoms() {
        let m = AtomicMeasure::from_atoms([(p(1.0, 2.0), 1.5), (p(1.0, 2.0), -1.5)]);
        assert!(m.is_empty());
        assert_eq!(m.total_variation(), 0.0);
    }

    #[test]
    fn serde_format_is_location_coefficient_array() {
        let m = AtomicMeasure::from_atoms([(p(0.5, 0.0), -1.0)]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"[{"location":[0.5,0.0],"coefficient":-1.0}]"#);
        let back: AtomicMeasure<2> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
