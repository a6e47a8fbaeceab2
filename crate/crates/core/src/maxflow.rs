//! Dinic max-flow on the bipartite transport network
//! `source -> x_i (a_i)`, `x_i -> y_j (∞)`, `y_j -> sink (b_j)` with real capacities.

use alloc::vec;
use alloc::vec::Vec;

/// Residual capacities at or below this are treated as saturated.
pub const RESIDUAL_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy)]
struct Arc {
    to: usize,
    cap: f64,
    flow: f64,
    rev: usize,
}

impl Arc {
    #[inline]
    fn residual(&self) -> f64 {
        self.cap - self.flow
    }
}

struct Network {
    adj: Vec<Vec<Arc>>,
    level: Vec<i32>,
    next: Vec<usize>,
}

impl Network {
    fn new(nodes: usize) -> Self {
        Self { adj: vec![Vec::new(); nodes], level: vec![0; nodes], next: vec![0; nodes] }
    }

    /// Adds `u -> v`; returns the arc position in `adj[u]`.
    fn add(&mut self, u: usize, v: usize, cap: f64, flow: f64) -> usize {
        let pu = self.adj[u].len();
        let pv = self.adj[v].len() + usize::from(u == v);
        self.adj[u].push(Arc { to: v, cap, flow, rev: pv });
        self.adj[v].push(Arc { to: u, cap: 0.0, flow: -flow, rev: pu });
        pu
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        let mut queue = vec![s];
        self.level[s] = 0;
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head];
            head += 1;
            for a in &self.adj[u] {
                if a.residual() > RESIDUAL_TOL && self.level[a.to] < 0 {
                    self.level[a.to] = self.level[u] + 1;
                    queue.push(a.to);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, limit: f64) -> f64 {
        if u == t {
            return limit;
        }
        while self.next[u] < self.adj[u].len() {
            let i = self.next[u];
            let a = self.adj[u][i];
            if a.residual() > RESIDUAL_TOL && self.level[a.to] == self.level[u] + 1 {
                let pushed = self.dfs(a.to, t, limit.min(a.residual()));
                if pushed > 0.0 {
                    let arc = &mut self.adj[u][i];
                    arc.flow += pushed;
                    if arc.residual() <= RESIDUAL_TOL {
                        arc.flow = arc.cap;
                    }
                    let (to, rev) = (arc.to, arc.rev);
                    self.adj[to][rev].flow -= pushed;
                    return pushed;
                }
            }
            self.next[u] += 1;
        }
        0.0
    }

    fn run(&mut self, s: usize, t: usize) {
        while self.bfs(s, t) {
            self.next.iter_mut().for_each(|n| *n = 0);
            loop {
                let f = self.dfs(s, t, f64::INFINITY);
                if f <= 0.0 {
                    break;
                }
            }
        }
    }

    fn reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            for a in &self.adj[u] {
                if a.residual() > RESIDUAL_TOL && !seen[a.to] {
                    seen[a.to] = true;
                    stack.push(a.to);
                }
            }
        }
        seen
    }
}

/// Maximum flow of a bipartite transport network.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    /// Total flow from source to sink.
    pub value: f64,
    /// Flow on each admissible edge, aligned with the input edge list.
    pub edge_flows: Vec<f64>,
    /// Supply nodes reachable from the source in the final residual network.
    pub reachable_supply: Vec<bool>,
}

/// Solves the network for the admissible `edges` (pairs `(i, j)`).
///
/// `warm` gives initial edge flows that respect the supplies and demands;
/// augmentation continues from there.
pub fn bipartite_max_flow(supply: &[f64], demand: &[f64], edges: &[(usize, usize)], warm: Option<&[f64]>) -> FlowSolution {
    let (n, m) = (supply.len(), demand.len());
    let (s, t) = (0, n + m + 1);
    let mut net = Network::new(n + m + 2);
    let mut out = vec![0.0; n];
    let mut inn = vec![0.0; m];
    if let Some(w) = warm {
        for (&(i, j), &f) in edges.iter().zip(w) {
            out[i] += f;
            inn[j] += f;
        }
    }
    for i in 0..n {
        net.add(s, 1 + i, supply[i], out[i].min(supply[i]));
    }
    let mut handles = Vec::with_capacity(edges.len());
    for (e, &(i, j)) in edges.iter().enumerate() {
        let f = warm.map_or(0.0, |w| w[e]);
        handles.push((1 + i, net.add(1 + i, 1 + n + j, f64::INFINITY, f)));
    }
    for j in 0..m {
        net.add(1 + n + j, t, demand[j], inn[j].min(demand[j]));
    }
    net.run(s, t);
    let value = net.adj[s].iter().map(|a| a.flow).sum();
    let edge_flows = handles.iter().map(|&(u, p)| net.adj[u][p].flow).collect();
    let seen = net.reachable(s);
    FlowSolution { value, edge_flows, reachable_supply: seen[1..=n].to_vec() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_deficient_networks() {
        let a = [0.5, 0.5];
        let b = [0.5, 0.5];
        let full = bipartite_max_flow(&a, &b, &[(0, 0), (0, 1), (1, 1)], None);
        assert!((full.value - 1.0).abs() < 1e-15);
        let deficient = bipartite_max_flow(&a, &b, &[(0, 0), (1, 0)], None);
        assert!((deficient.value - 0.5).abs() < 1e-15);
        assert_eq!(deficient.reachable_supply, vec![true, true]);
    }

    #[test]
    fn warm_start_completes_flow() {
        let a = [0.3, 0.7];
        let b = [0.6, 0.4];
        let edges = [(0, 0), (1, 0), (1, 1)];
        let warm = [0.3, 0.0, 0.4];
        let sol = bipartite_max_flow(&a, &b, &edges, Some(&warm));
        assert!((sol.value - 1.0).abs() < 1e-15);
        assert!((sol.edge_flows[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn flow_conservation() {
        let a = [0.2, 0.3, 0.5];
        let b = [0.1, 0.6, 0.3];
        let edges = [(0, 1), (1, 0), (1, 1), (2, 1), (2, 2)];
        let sol = bipartite_max_flow(&a, &b, &edges, None);
        for i in 0..3 {
            let out: f64 = edges.iter().zip(&sol.edge_flows).filter(|((x, _), _)| *x == i).map(|(_, f)| f).sum();
            assert!(out <= a[i] + 1e-15);
        }
        for j in 0..3 {
            let inn: f64 = edges.iter().zip(&sol.edge_flows).filter(|((_, y), _)| *y == j).map(|(_, f)| f).sum();
            assert!(inn <= b[j] + 1e-15);
        }
        assert!(sol.edge_flows.iter().all(|f| *f >= 0.0));
        assert!((sol.value - 1.0).abs() < 1e-15);
    }
}
