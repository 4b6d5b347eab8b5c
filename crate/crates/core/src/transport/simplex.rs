//! Primal network simplex for the bipartite transportation problem.
//!
//! Rows are supply nodes `0..m`, columns are demand nodes `m..m+n`. A basis
//! is a spanning tree of `m + n - 1` arcs. Pivoting follows Bland's rule:
//! the lowest-index arc with negative reduced cost enters, and ties in the
//! ratio test leave by lowest arc index, so the solver cannot cycle and its
//! output is a deterministic function of the input.

use std::collections::VecDeque;

use crate::error::{Error, Result};

pub(crate) struct Problem<'a> {
    pub supply: &'a [f64],
    pub demand: &'a [f64],
    /// Row-major `m × n`.
    pub cost: &'a [f64],
    /// Arc that may not carry flow.
    pub forbidden: Option<(usize, usize)>,
}

struct Tree {
    m: usize,
    n: usize,
    arcs: Vec<(usize, usize)>,
    flow: Vec<f64>,
    in_basis: Vec<bool>,
}

impl Tree {
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.m + self.n];
        for (k, &(i, j)) in self.arcs.iter().enumerate() {
            adj[i].push((self.m + j, k));
            adj[self.m + j].push((i, k));
        }
        adj
    }
}

fn northwest_corner(supply: &[f64], demand: &[f64]) -> Tree {
    let (m, n) = (supply.len(), demand.len());
    let mut rs = supply.to_vec();
    let mut cs = demand.to_vec();
    let mut tree = Tree { m, n, arcs: Vec::new(), flow: Vec::new(), in_basis: vec![false; m * n] };
    let (mut i, mut j) = (0, 0);
    loop {
        let x = rs[i].min(cs[j]);
        tree.arcs.push((i, j));
        tree.flow.push(x);
        tree.in_basis[i * n + j] = true;
        if i == m - 1 && j == n - 1 {
            break;
        }
        let row_done = rs[i] <= cs[j];
        rs[i] -= x;
        cs[j] -= x;
        if j == n - 1 || (row_done && i < m - 1) {
            i += 1;
        } else {
            j += 1;
        }
    }
    tree
}

/// Basic flows recomputed from the tree by leaf elimination.
fn tree_flows(tree: &Tree, supply: &[f64], demand: &[f64]) -> Vec<f64> {
    let m = tree.m;
    let adj = tree.adjacency();
    let mut residual: Vec<f64> = supply.iter().chain(demand).copied().collect();
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut removed = vec![false; tree.arcs.len()];
    let mut flow = vec![0.0; tree.arcs.len()];
    let mut leaves: VecDeque<usize> = (0..adj.len()).filter(|&v| degree[v] == 1).collect();
    while let Some(v) = leaves.pop_front() {
        if degree[v] != 1 {
            continue;
        }
        let &(w, k) = adj[v].iter().find(|&&(_, k)| !removed[k]).expect("leaf has an arc");
        removed[k] = true;
        flow[k] = residual[v].max(0.0);
        residual[w] -= residual[v];
        residual[v] = 0.0;
        degree[v] = 0;
        degree[w] -= 1;
        if degree[w] == 1 {
            leaves.push_back(w);
        }
    }
    debug_assert!(tree.arcs.iter().all(|&(i, _)| i < m));
    flow
}

/// Node potentials with `u_0 = 0` and `u_i + v_j = c_ij` on the tree, plus a
/// BFS parent arc and depth for each node.
fn potentials(tree: &Tree, cost: &[f64]) -> (Vec<f64>, Vec<usize>, Vec<usize>) {
    let (m, n) = (tree.m, tree.n);
    let adj = tree.adjacency();
    let mut pot = vec![0.0; m + n];
    let mut parent = vec![usize::MAX; m + n];
    let mut depth = vec![usize::MAX; m + n];
    depth[0] = 0;
    let mut queue = VecDeque::from([0]);
    while let Some(v) = queue.pop_front() {
        for &(w, k) in &adj[v] {
            if depth[w] == usize::MAX {
                let (i, j) = tree.arcs[k];
                pot[w] = cost[i * n + j] - pot[v];
                depth[w] = depth[v] + 1;
                parent[w] = k;
                queue.push_back(w);
            }
        }
    }
    (pot, parent, depth)
}

fn other_end(tree: &Tree, k: usize, v: usize) -> usize {
    let (i, j) = tree.arcs[k];
    if v == i {
        tree.m + j
    } else {
        i
    }
}

/// Tree arcs on the path from column node `a` to row node `b`, in order.
fn tree_path(tree: &Tree, parent: &[usize], depth: &[usize], mut a: usize, mut b: usize) -> Vec<usize> {
    let mut from_a = Vec::new();
    let mut from_b = Vec::new();
    while depth[a] > depth[b] {
        from_a.push(parent[a]);
        a = other_end(tree, parent[a], a);
    }
    while depth[b] > depth[a] {
        from_b.push(parent[b]);
        b = other_end(tree, parent[b], b);
    }
    while a != b {
        from_a.push(parent[a]);
        a = other_end(tree, parent[a], a);
        from_b.push(parent[b]);
        b = other_end(tree, parent[b], b);
    }
    from_a.extend(from_b.into_iter().rev());
    from_a
}

/// Optimal basic flows, row-major `m × n`.
pub(crate) fn solve(p: &Problem) -> Result<Vec<f64>> {
    let (m, n) = (p.supply.len(), p.demand.len());
    if m == 0 || n == 0 {
        return Err(Error::SolverFailure("empty problem".into()));
    }
    if p.cost.len() != m * n || p.cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::SolverFailure("cost matrix must be finite with m × n entries".into()));
    }
    let forbidden = p.forbidden.map(|(i, j)| i * n + j);
    let scale = p.cost.iter().fold(1.0f64, |a, c| a.max(c.abs()));
    let eps = 1e-12 * scale;
    let mut tree = northwest_corner(p.supply, p.demand);
    if let Some(f) = forbidden {
        if tree.arcs.iter().zip(&tree.flow).any(|(&(i, j), &x)| i * n + j == f && x > 0.0) {
            return Err(Error::SolverFailure("initial basis uses the forbidden arc".into()));
        }
    }
    let max_pivots = 50 * m * n + 1000;
    for _ in 0..max_pivots {
        let (pot, parent, depth) = potentials(&tree, p.cost);
        let entering = (0..m * n).find(|&idx| {
            !tree.in_basis[idx] && Some(idx) != forbidden && p.cost[idx] - pot[idx / n] - pot[m + idx % n] < -eps
        });
        let Some(idx) = entering else {
            let flow = tree_flows(&tree, p.supply, p.demand);
            let mut out = vec![0.0; m * n];
            for (k, &(i, j)) in tree.arcs.iter().enumerate() {
                out[i * n + j] = flow[k];
            }
            if let Some(f) = forbidden {
                if out[f] != 0.0 {
                    return Err(Error::SolverFailure("forbidden arc carries flow".into()));
                }
            }
            return Ok(out);
        };
        let (ei, ej) = (idx / n, idx % n);
        // cycle: entering arc forward, then alternating backward/forward from column ej to row ei
        let path = tree_path(&tree, &parent, &depth, m + ej, ei);
        let minus: Vec<usize> = path.iter().step_by(2).copied().collect();
        let theta = minus.iter().map(|&k| tree.flow[k]).fold(f64::INFINITY, f64::min);
        let key = |k: usize| tree.arcs[k].0 * n + tree.arcs[k].1;
        let leave = minus
            .iter()
            .copied()
            .filter(|&k| tree.flow[k] <= theta + 1e-15)
            .min_by_key(|&k| key(k))
            .expect("cycle has a backward arc");
        let theta = theta.max(0.0);
        for (s, &k) in path.iter().enumerate() {
            if s % 2 == 0 {
                tree.flow[k] -= theta;
            } else {
                tree.flow[k] += theta;
            }
        }
        let (li, lj) = tree.arcs[leave];
        tree.in_basis[li * n + lj] = false;
        tree.in_basis[idx] = true;
        tree.arcs[leave] = (ei, ej);
        tree.flow[leave] = theta;
    }
    Err(Error::SolverFailure(format!("no convergence after {max_pivots} pivots")))
}
