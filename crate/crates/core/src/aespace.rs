//! Arens-Eells norms of finitely supported functionals.
//!
//! The space carries the metric `ρ(p, q) = min(|p - q|, 2)` and an abstract
//! base point `e` with `ρ(p, e) = 1`. The norm of `m` is the cheapest way to
//! write `m - m(X) δ_e` as a sum of dipoles `a (δ_q - δ_p)` weighted by
//! `|a| ρ(p, q)`, which is a transport problem.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lipfun::LipFunc;
use crate::mcf;
use crate::measure::AtomicMeasure;
use crate::point::Point;

/// Distance cap of the metric.
pub const RHO_CAP: f64 = 2.0;
/// Largest support handled by [`ae_norm_oracle`].
pub const ORACLE_LIMIT: usize = 8;

/// A point of `X` or the base point `e`.
#[derive(Clone, Copy, PartialEq)]
pub enum Node<const N: usize> {
    At(Point<N>),
    Base,
}

impl<const N: usize> Node<N> {
    pub fn point(&self) -> Option<Point<N>> {
        match self {
            Node::At(p) => Some(*p),
            Node::Base => None,
        }
    }

    pub fn is_base(&self) -> bool {
        matches!(self, Node::Base)
    }

    /// Points in lexicographic order, then `e`.
    pub fn cmp_key(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Node::At(a), Node::At(b)) => a.lex_cmp(b),
            (Node::At(_), Node::Base) => Ordering::Less,
            (Node::Base, Node::At(_)) => Ordering::Greater,
            (Node::Base, Node::Base) => Ordering::Equal,
        }
    }
}

impl<const N: usize> fmt::Debug for Node<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::At(p) => write!(f, "{p:?}"),
            Node::Base => write!(f, "e"),
        }
    }
}

impl<const N: usize> Serialize for Node<N> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Node::At(p) => p.serialize(s),
            Node::Base => s.serialize_str("e"),
        }
    }
}

impl<'de, const N: usize> Deserialize<'de> for Node<N> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw<const M: usize> {
            Tag(String),
            At(Point<M>),
        }
        match Raw::<N>::deserialize(d)? {
            Raw::Tag(t) if t == "e" => Ok(Node::Base),
            Raw::Tag(t) => Err(de::Error::custom(format!("expected \"e\" or a point, got {t:?}"))),
            Raw::At(p) => Ok(Node::At(p)),
        }
    }
}

/// `ρ(p, q) = min(|p - q|, 2)`, `ρ(p, e) = 1`, `ρ(e, e) = 0`.
pub fn rho<const N: usize>(p: &Node<N>, q: &Node<N>) -> f64 {
    match (p, q) {
        (Node::At(a), Node::At(b)) => a.dist(b).min(RHO_CAP),
        (Node::Base, Node::Base) => 0.0,
        _ => 1.0,
    }
}

/// A finitely supported element of `Æ(X)`; `X` is a label only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AEElement<const N: usize> {
    #[serde(rename = "X", default = "default_label")]
    pub label: String,
    pub support: AtomicMeasure<N>,
}

fn default_label() -> String {
    "boundary".to_string()
}

impl<const N: usize> AEElement<N> {
    pub fn new(support: AtomicMeasure<N>) -> Self {
        AEElement { label: default_label(), support }
    }

    pub fn with_label(support: AtomicMeasure<N>, label: impl Into<String>) -> Self {
        AEElement { label: label.into(), support }
    }

    /// Support nodes in lexicographic order followed by `e`, with the
    /// coefficients of `m - m(X) δ_e`.
    fn nodes_and_supply(&self) -> (Vec<Node<N>>, Vec<f64>) {
        let mut nodes: Vec<Node<N>> = self.support.atoms().iter().map(|a| Node::At(a.location)).collect();
        let mut supply: Vec<f64> = self.support.atoms().iter().map(|a| a.coefficient).collect();
        nodes.push(Node::Base);
        supply.push(-self.support.total());
        (nodes, supply)
    }
}

/// One dipole `a (δ_q - δ_p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleTerm<const N: usize> {
    pub a: f64,
    pub p: Node<N>,
    pub q: Node<N>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DipoleRep<const N: usize> {
    pub terms: Vec<DipoleTerm<N>>,
    pub cost: f64,
}

impl<const N: usize> DipoleRep<N> {
    /// `Σ a (δ_q - δ_p)` restricted to `X` (the base point is dropped).
    pub fn recombine(&self) -> AtomicMeasure<N> {
        AtomicMeasure::from_atoms(self.terms.iter().flat_map(|t| {
            [t.q.point().map(|q| (q, t.a)), t.p.point().map(|p| (p, -t.a))]
                .into_iter()
                .flatten()
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualEntry<const N: usize> {
    pub node: Node<N>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeNorm<const N: usize> {
    pub value: f64,
    pub rep: DipoleRep<N>,
    /// Optimal ρ-Lipschitz potential with value 0 at `e`.
    pub dual: Vec<DualEntry<N>>,
}

/// Norm, optimal dipole representation and dual certificate.
pub fn ae_norm<const N: usize>(m: &AEElement<N>) -> AeNorm<N> {
    if m.support.is_empty() {
        return AeNorm {
            value: 0.0,
            rep: DipoleRep { terms: vec![], cost: 0.0 },
            dual: vec![DualEntry { node: Node::Base, value: 0.0 }],
        };
    }
    let (nodes, supply) = m.nodes_and_supply();
    let n = nodes.len();
    let cost: Vec<Vec<f64>> = nodes.iter().map(|a| nodes.iter().map(|b| rho(a, b)).collect()).collect();
    let sol = mcf::solve(&cost, &supply, n - 1);
    let mut terms = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if sol.flow[i][j] > 0.0 {
                // Flow i -> j carries +x at i and -x at j, i.e. x (δ_i - δ_j).
                terms.push(DipoleTerm { a: sol.flow[i][j], p: nodes[j], q: nodes[i] });
            }
        }
    }
    let rep_cost = terms.iter().map(|t| t.a.abs() * rho(&t.p, &t.q)).sum();
    let dual = nodes
        .iter()
        .zip(&sol.potential)
        .map(|(&node, &value)| DualEntry { node, value: if node.is_base() { 0.0 } else { value } })
        .collect();
    AeNorm { value: sol.cost, rep: DipoleRep { terms, cost: rep_cost }, dual }
}

/// Brute-force norm for supports of at most [`ORACLE_LIMIT`] atoms.
///
/// Enumerates every spanning tree of the complete bipartite graph between the
/// positive and negative nodes of `m - m(X) δ_e`. Each tree carries a unique
/// flow; the minimum cost over the nonnegative ones is the optimum because
/// the basic solutions of a transportation problem are exactly these trees.
pub fn ae_norm_oracle<const N: usize>(m: &AEElement<N>) -> Result<f64> {
    if m.support.len() > ORACLE_LIMIT {
        return Err(Error::SupportTooLarge { size: m.support.len(), limit: ORACLE_LIMIT });
    }
    let (nodes, supply) = m.nodes_and_supply();
    let scale: f64 = supply.iter().map(|s| s.abs()).sum();
    let tol = 1e-12 * scale.max(1.0);
    let src: Vec<usize> = (0..nodes.len()).filter(|&i| supply[i] > tol).collect();
    let snk: Vec<usize> = (0..nodes.len()).filter(|&i| supply[i] < -tol).collect();
    if src.is_empty() || snk.is_empty() {
        return Ok(0.0);
    }
    let edges: Vec<(usize, usize)> = src.iter().flat_map(|&s| snk.iter().map(move |&t| (s, t))).collect();
    let k = src.len() + snk.len();
    let mut search = TreeSearch {
        nodes: &nodes,
        supply: &supply,
        edges: &edges,
        need: k - 1,
        chosen: Vec::with_capacity(k - 1),
        best: f64::INFINITY,
        tol,
    };
    let mut uf = UnionFind::new(nodes.len());
    search.dfs(0, &mut uf);
    Ok(search.best)
}

struct TreeSearch<'a, const N: usize> {
    nodes: &'a [Node<N>],
    supply: &'a [f64],
    edges: &'a [(usize, usize)],
    need: usize,
    chosen: Vec<usize>,
    best: f64,
    tol: f64,
}

impl<const N: usize> TreeSearch<'_, N> {
    fn dfs(&mut self, from: usize, uf: &mut UnionFind) {
        if self.chosen.len() == self.need {
            self.evaluate();
            return;
        }
        let left = self.need - self.chosen.len();
        for e in from..self.edges.len() {
            if self.edges.len() - e < left {
                break;
            }
            let (a, b) = self.edges[e];
            if uf.find(a) == uf.find(b) {
                continue;
            }
            let mut next = uf.clone();
            next.union(a, b);
            self.chosen.push(e);
            self.dfs(e + 1, &mut next);
            self.chosen.pop();
        }
    }

    /// Solves the tree flow by peeling leaves.
    fn evaluate(&mut self) {
        let n = self.nodes.len();
        let mut rem = self.supply.to_vec();
        let mut degree = vec![0usize; n];
        for &e in &self.chosen {
            let (a, b) = self.edges[e];
            degree[a] += 1;
            degree[b] += 1;
        }
        let mut alive = vec![true; self.chosen.len()];
        let mut cost = 0.0;
        for _ in 0..self.chosen.len() {
            let Some(k) = (0..self.chosen.len())
                .find(|&k| alive[k] && (degree[self.edges[self.chosen[k]].0] == 1 || degree[self.edges[self.chosen[k]].1] == 1))
            else {
                return;
            };
            let (s, t) = self.edges[self.chosen[k]];
            // s is a source, t a sink; the leaf's leftover fixes the edge flow.
            let x = if degree[s] == 1 { rem[s] } else { -rem[t] };
            if x < -self.tol {
                return;
            }
            rem[s] -= x;
            rem[t] += x;
            cost += x.max(0.0) * rho(&self.nodes[s], &self.nodes[t]);
            alive[k] = false;
            degree[s] -= 1;
            degree[t] -= 1;
        }
        if rem.iter().all(|r| r.abs() <= self.tol * 10.0) && cost < self.best {
            self.best = cost;
        }
    }
}

#[derive(Clone)]
struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Checks that `dual` is ρ-Lipschitz with value 0 at `e` (to 1e-10) and that
/// its objective `Σ coeff · dual` matches the norm (to 1e-8).
pub fn dual_check<const N: usize>(m: &AEElement<N>, dual: &[DualEntry<N>]) -> bool {
    let lookup = |node: &Node<N>| -> Option<f64> {
        if node.is_base() {
            return Some(dual.iter().find(|d| d.node.is_base()).map_or(0.0, |d| d.value));
        }
        dual.iter().find(|d| d.node == *node).map(|d| d.value)
    };
    let (nodes, supply) = m.nodes_and_supply();
    let mut values = Vec::with_capacity(nodes.len());
    for node in &nodes {
        match lookup(node) {
            Some(v) => values.push(v),
            None => return false,
        }
    }
    if values.last().is_none_or(|v| v.abs() > 1e-10) {
        return false;
    }
    for i in 0..nodes.len() {
        for j in 0..nodes.len() {
            if values[i] - values[j] > rho(&nodes[i], &nodes[j]) + 1e-10 {
                return false;
            }
        }
    }
    let objective: f64 = supply.iter().zip(&values).map(|(b, u)| b * u).sum();
    let value = ae_norm(m).value;
    (objective - value).abs() <= 1e-8 * value.max(1.0)
}

/// `⟨m, φ⟩ = Σ coeff · φ(location)`.
pub fn ae_pair<const N: usize>(m: &AEElement<N>, phi: &LipFunc) -> Result<f64> {
    let mut acc = 0.0;
    for a in m.support.atoms() {
        acc += a.coefficient * phi.eval(a.location.coords())?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::Point2;

    fn p(x: f64, y: f64) -> Point2 {
        Point([x, y])
    }

    fn el(atoms: &[(Point2, f64)]) -> AEElement<2> {
        AEElement::new(AtomicMeasure::from_atoms(atoms.iter().copied()))
    }

    #[test]
    fn metric_examples() {
        let a = Node::At(p(0.0, 0.0));
        assert_eq!(rho(&a, &Node::At(p(0.3, 0.0))), 0.3);
        assert_eq!(rho(&a, &Node::At(p(3.0, 4.0))), 2.0);
        assert_eq!(rho(&a, &Node::Base), 1.0);
        assert_eq!(rho(&a, &a), 0.0);
    }

    #[test]
    fn norm_examples_agree_with_oracle() {
        let cases = [
            (el(&[(p(0.3, 0.0), 1.0), (p(0.0, 0.0), -1.0)]), 0.3),
            (el(&[(p(0.0, 0.0), 1.0)]), 1.0),
            (el(&[(p(0.0, 0.0), 2.0), (p(3.0, 4.0), -2.0)]), 4.0),
            (el(&[]), 0.0),
            (el(&[(p(0.0, 0.0), 1.0), (p(30.0, 0.0), 1.0)]), 2.0),
        ];
        for (m, expect) in cases {
            let r = ae_norm(&m);
            assert!((r.value - expect).abs() < 1e-12, "{m:?}: {}", r.value);
            assert!((ae_norm_oracle(&m).unwrap() - expect).abs() < 1e-12);
            assert!(r.rep.recombine().approx_eq(&m.support, 1e-12));
            assert!((r.rep.cost - r.value).abs() < 1e-12);
            assert!(dual_check(&m, &r.dual));
        }
    }

    #[test]
    fn collinear_quadruple() {
        let m = el(&[(p(0.0, 0.0), 1.0), (p(0.1, 0.0), -1.0), (p(0.2, 0.0), 1.0), (p(0.3, 0.0), -1.0)]);
        let v = ae_norm(&m).value;
        assert!((v - 0.2).abs() < 1e-12);
        assert!((ae_norm_oracle(&m).unwrap() - v).abs() < 1e-12);
    }

    #[test]
    fn dual_check_rejects_bad_certificates() {
        let m = el(&[(p(0.0, 0.0), 1.0), (p(0.5, 0.0), -1.0)]);
        let r = ae_norm(&m);
        let scaled: Vec<_> = r.dual.iter().map(|d| DualEntry { node: d.node, value: 1.5 * d.value }).collect();
        assert!(!dual_check(&m, &scaled));
        let single = el(&[(p(0.0, 0.0), 1.0)]);
        let zero = vec![DualEntry { node: Node::At(p(0.0, 0.0)), value: 0.0 }, DualEntry { node: Node::Base, value: 0.0 }];
        assert!(!dual_check(&single, &zero));
    }

    #[test]
    fn oracle_limit() {
        let atoms: Vec<_> = (0..9).map(|i| (p(i as f64, 0.0), 1.0)).collect();
        assert!(matches!(ae_norm_oracle(&el(&atoms)), Err(Error::SupportTooLarge { size: 9, limit: 8 })));
    }

    #[test]
    fn pairing_with_functions() {
        let m = el(&[(p(1.0, 0.0), 1.0), (p(0.0, 0.0), -1.0)]);
        assert_eq!(ae_pair(&m, &LipFunc::linear(vec![1.0, 0.0])).unwrap(), 1.0);
        assert_eq!(ae_pair(&m, &LipFunc::constant(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn serde_round_trip() {
        let m = el(&[(p(0.25, 0.5), 1.0), (p(0.0, 0.0), -3.0)]);
        let r = ae_norm(&m);
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"e\""));
        let back: AeNorm<2> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        let ms = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<AEElement<2>>(&ms).unwrap(), m);
    }
}
