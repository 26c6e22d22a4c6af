//! Dense uncapacitated min-cost flow by successive shortest paths.
//!
//! Nodes are `0..n`; every ordered pair is an arc of infinite capacity with
//! cost `cost[i][j]`. Residual reverse arcs carry cost `-cost[i][j]` and
//! capacity `flow[i][j]`. Shortest paths use Bellman-Ford from all open
//! sources at once; ties go to the lower node index.

/// Amounts at or below this fraction of the total supply are treated as zero.
const ZERO_REL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    /// `flow[i][j]` is the amount sent along `i -> j`.
    pub flow: Vec<Vec<f64>>,
    pub cost: f64,
    /// Node potentials with `potential[root] = 0`, `potential[i] - potential[j] <= cost[i][j]`
    /// and equality wherever `flow[i][j] > 0`.
    pub potential: Vec<f64>,
}

/// Solves `min Σ cost·flow` subject to `out(i) - in(i) = supply[i]`.
///
/// `supply` must sum to zero up to rounding. `root` anchors the potentials.
pub fn solve(cost: &[Vec<f64>], supply: &[f64], root: usize) -> FlowSolution {
    let n = supply.len();
    let scale: f64 = supply.iter().map(|s| s.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    let zero = ZERO_REL * scale;
    let mut rem: Vec<f64> = supply.to_vec();
    let mut flow = vec![vec![0.0; n]; n];

    // Every augmentation zeroes a source, a sink or a reverse arc; the cap
    // only guards against rounding loops.
    let max_rounds = 4 * n * n + 16;
    for _ in 0..max_rounds {
        if !rem.iter().any(|&r| r > zero) || !rem.iter().any(|&r| r < -zero) {
            break;
        }
        let (dist, pred) = bellman_ford(cost, &flow, |i| rem[i] > zero, n);
        // Nearest sink, lowest index on ties.
        let Some(t) = (0..n)
            .filter(|&j| rem[j] < -zero && dist[j].is_finite())
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)))
        else {
            break;
        };
        let mut path = vec![t];
        let mut v = t;
        while let Some(u) = pred[v] {
            path.push(u);
            v = u;
            if path.len() > n + 1 {
                break;
            }
        }
        path.reverse();
        let s = path[0];
        let mut amount = rem[s].min(-rem[t]);
        for w in path.windows(2) {
            let (u, v) = (w[0], w[1]);
            if uses_reverse(cost, &flow, u, v) {
                amount = amount.min(flow[v][u]);
            }
        }
        for w in path.windows(2) {
            let (u, v) = (w[0], w[1]);
            if uses_reverse(cost, &flow, u, v) {
                let back = flow[v][u];
                flow[v][u] = if back - amount <= zero { 0.0 } else { back - amount };
            } else {
                flow[u][v] += amount;
            }
        }
        rem[s] = if rem[s] - amount <= zero { 0.0 } else { rem[s] - amount };
        rem[t] = if rem[t] + amount >= -zero { 0.0 } else { rem[t] + amount };
    }

    let cost_total = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| flow[i][j] * cost[i][j])
        .sum();
    let (dist, _) = bellman_ford(cost, &flow, |i| i == root, n);
    let potential = dist.iter().map(|d| -d).collect();
    FlowSolution { flow, cost: cost_total, potential }
}

/// Cost of the cheapest residual arc `u -> v`: the reverse of flow `v -> u`
/// when present, otherwise the forward arc.
fn reduced_arc_cost(cost: &[Vec<f64>], flow: &[Vec<f64>], u: usize, v: usize) -> f64 {
    if uses_reverse(cost, flow, u, v) {
        -cost[v][u]
    } else {
        cost[u][v]
    }
}

fn uses_reverse(cost: &[Vec<f64>], flow: &[Vec<f64>], u: usize, v: usize) -> bool {
    flow[v][u] > 0.0 && -cost[v][u] <= cost[u][v]
}

fn bellman_ford(
    cost: &[Vec<f64>],
    flow: &[Vec<f64>],
    is_source: impl Fn(usize) -> bool,
    n: usize,
) -> (Vec<f64>, Vec<Option<usize>>) {
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![None; n];
    for (i, d) in dist.iter_mut().enumerate() {
        if is_source(i) {
            *d = 0.0;
        }
    }
    for _ in 0..n {
        let mut changed = false;
        for u in 0..n {
            if !dist[u].is_finite() {
                continue;
            }
            for v in 0..n {
                if u == v {
                    continue;
                }
                let c = reduced_arc_cost(cost, flow, u, v);
                let cand = dist[u] + c;
                // Strict improvement beyond rounding noise keeps the search finite.
                if !dist[v].is_finite() || cand < dist[v] - 1e-15 * (1.0 + dist[v].abs()) {
                    dist[v] = cand;
                    pred[v] = Some(u);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    (dist, pred)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sources_two_sinks_on_a_line() {
        // Points 0, 1, 2, 3 on a line; supplies +1 at 0 and 2, -1 at 1 and 3.
        let x = [0.0f64, 1.0, 2.0, 3.0];
        let cost: Vec<Vec<f64>> = x.iter().map(|a| x.iter().map(|b| (a - b).abs()).collect()).collect();
        let sol = solve(&cost, &[1.0, -1.0, 1.0, -1.0], 0);
        assert!((sol.cost - 2.0).abs() < 1e-15);
        for i in 0..4 {
            for j in 0..4 {
                assert!(sol.potential[i] - sol.potential[j] <= cost[i][j] + 1e-12);
            }
        }
        let obj: f64 = [1.0, -1.0, 1.0, -1.0].iter().zip(&sol.potential).map(|(b, u)| b * u).sum();
        assert!((obj - sol.cost).abs() < 1e-12);
    }

    #[test]
    fn rerouting_through_reverse_arcs() {
        // Greedy would ship 0 -> 1 first; optimum is 0 -> 2 and 3 -> 1.
        let cost = vec![
            vec![0.0, 1.0, 1.5, 9.0],
            vec![1.0, 0.0, 9.0, 1.0],
            vec![1.5, 9.0, 0.0, 9.0],
            vec![9.0, 1.0, 9.0, 0.0],
        ];
        let sol = solve(&cost, &[1.0, -1.0, -1.0, 1.0], 0);
        assert!((sol.cost - 2.5).abs() < 1e-12);
    }
}
