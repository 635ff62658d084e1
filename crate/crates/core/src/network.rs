//! Agent topologies, the pairwise averaging operator and its spectral gap.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};
use crate::lda::SufficientStats;

/// Whole-graph regenerations allowed when rewiring disconnects the graph.
pub const WATTS_STROGATZ_RETRIES: usize = 100;

/// Undirected simple graph over nodes `0..n`. Edges are stored as `(i, j)`
/// with `i < j`, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::Config(format!("self-loop at node {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::Config(format!("edge ({a}, {b}) out of range for n={n}")));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(Error::Config(format!("duplicate edge ({a}, {b})")));
            }
        }
        Ok(Graph {
            n,
            edges: set.into_iter().collect(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    reached += 1;
                    queue.push_back(w);
                }
            }
        }
        reached == self.n
    }

    pub(crate) fn require_connected(&self) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "graph with {} nodes and {} edges is not connected",
                self.n,
                self.edges.len()
            )))
        }
    }

    /// Uniform draw from the edge set.
    pub fn sample_edge<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        self.edges[rng.random_range(0..self.edges.len())]
    }

    /// `n=<int>` header followed by one `i j` pair per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("n={}\n", self.n);
        for (a, b) in &self.edges {
            writeln!(out, "{a} {b}").expect("writing to a String cannot fail");
        }
        out
    }

    pub fn from_text(s: &str) -> Result<Self> {
        let mut lines = s.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty graph file".into()))?;
        let n = crate::text::header_value(header, "n")?;
        let mut edges = Vec::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let ends: Vec<usize> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|e| Error::Parse(format!("edge `{line}`: {e}"))))
                .collect::<Result<_>>()?;
            if ends.len() != 2 {
                return Err(Error::Parse(format!("edge line `{line}` needs two endpoints")));
            }
            edges.push((ends[0], ends[1]));
        }
        Graph::new(n, edges)
    }
}

pub fn complete_graph(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::Config(format!("complete graph needs n ≥ 2, got {n}")));
    }
    Graph::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
}

fn check_lattice(n: usize, k: usize) -> Result<()> {
    if k < 2 || !k.is_multiple_of(2) || n <= k {
        return Err(Error::Config(format!(
            "ring lattice needs an even k ≥ 2 with n > k, got n={n} k={k}"
        )));
    }
    Ok(())
}

/// Ring where every node links to its `k/2` successors and `k/2` predecessors.
pub fn ring_lattice(n: usize, k: usize) -> Result<Graph> {
    check_lattice(n, k)?;
    Graph::new(n, (0..n).flat_map(|i| (1..=k / 2).map(move |j| (i, (i + j) % n))))
}

/// Watts–Strogatz small world.
///
/// Starts from [`ring_lattice`] and, for every lattice edge `(u, u + j)`,
/// moves the far endpoint with probability `p` to a uniform node, redrawing
/// on self-loops and duplicates. The edge count stays `n k / 2`. A
/// disconnected result is discarded and regenerated, up to
/// [`WATTS_STROGATZ_RETRIES`] times.
pub fn watts_strogatz<R: Rng + ?Sized>(n: usize, k: usize, p: f64, rng: &mut R) -> Result<Graph> {
    check_lattice(n, k)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!(
            "rewiring probability must be in [0, 1], got {p}"
        )));
    }
    for _ in 0..WATTS_STROGATZ_RETRIES {
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for u in 0..n {
            for j in 1..=k / 2 {
                let v = (u + j) % n;
                adj[u].insert(v);
                adj[v].insert(u);
            }
        }
        for j in 1..=k / 2 {
            for u in 0..n {
                let v = (u + j) % n;
                if !adj[u].contains(&v) || rng.random::<f64>() >= p {
                    continue;
                }
                if adj[u].len() >= n - 1 {
                    continue;
                }
                let w = loop {
                    let w = rng.random_range(0..n);
                    if w != u && !adj[u].contains(&w) {
                        break w;
                    }
                };
                adj[u].remove(&v);
                adj[v].remove(&u);
                adj[u].insert(w);
                adj[w].insert(u);
            }
        }
        let edges = adj
            .iter()
            .enumerate()
            .flat_map(|(u, nb)| nb.iter().filter(move |&&w| w > u).map(move |&w| (u, w)));
        let graph = Graph::new(n, edges)?;
        if graph.is_connected() {
            return Ok(graph);
        }
    }
    Err(Error::Generation(format!(
        "no connected Watts-Strogatz graph (n={n}, k={k}, p={p}) within {WATTS_STROGATZ_RETRIES} attempts"
    )))
}

/// A symmetric doubly stochastic n×n matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragingMatrix {
    w: DMatrix<f64>,
}

impl AveragingMatrix {
    /// The realized operator `I - ½ (e_i - e_j)(e_i - e_j)ᵀ` for one active pair.
    pub fn pairwise(n: usize, i: usize, j: usize) -> Result<Self> {
        if i == j || i >= n || j >= n {
            return Err(Error::Precondition(format!("invalid pair ({i}, {j}) for n={n}")));
        }
        let mut w = DMatrix::identity(n, n);
        w[(i, i)] = 0.5;
        w[(j, j)] = 0.5;
        w[(i, j)] = 0.5;
        w[(j, i)] = 0.5;
        Ok(AveragingMatrix { w })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn size(&self) -> usize {
        self.w.nrows()
    }

    /// Eigenvalues in decreasing order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.w.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }
}

/// `E[W]` under uniform edge sampling:
/// `I - (1/|E|) Σ_{(i,j)∈E} ½ (e_i - e_j)(e_i - e_j)ᵀ`.
pub fn expected_averaging_matrix(graph: &Graph) -> Result<AveragingMatrix> {
    graph.require_connected()?;
    let n = graph.node_count();
    let weight = 0.5 / graph.edge_count() as f64;
    let mut w = DMatrix::identity(n, n);
    for &(i, j) in graph.edges() {
        w[(i, i)] -= weight;
        w[(j, j)] -= weight;
        w[(i, j)] += weight;
        w[(j, i)] += weight;
    }
    Ok(AveragingMatrix { w })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGap {
    pub lambda2: f64,
    pub gap: f64,
}

/// Second largest eigenvalue of `E[W]` and the gap `1 - λ₂`.
pub fn spectral_gap(graph: &Graph) -> Result<SpectralGap> {
    let ev = expected_averaging_matrix(graph)?.eigenvalues();
    // Eigenvalues of E[W] are nonnegative; clamp round-off below zero.
    let lambda2 = ev.get(1).copied().unwrap_or(0.0).max(0.0);
    Ok(SpectralGap {
        lambda2,
        gap: 1.0 - lambda2,
    })
}

/// Replaces `states[i]` and `states[j]` by their entrywise mean.
pub fn apply_pairwise_average(states: &mut [SufficientStats], i: usize, j: usize) -> Result<()> {
    if i == j || i >= states.len() || j >= states.len() {
        return Err(Error::Precondition(format!(
            "invalid averaging pair ({i}, {j}) for {} nodes",
            states.len()
        )));
    }
    let (lo, hi) = (i.min(j), i.max(j));
    let (head, tail) = states.split_at_mut(hi);
    average_pair(&mut head[lo], &mut tail[0])
}

pub(crate) fn average_pair(a: &mut SufficientStats, b: &mut SufficientStats) -> Result<()> {
    if !a.same_shape(b) {
        return Err(Error::Config("cannot average stats of different shapes".into()));
    }
    for (x, y) in a.as_mut_slice().iter_mut().zip(b.as_mut_slice()) {
        let m = 0.5 * (*x + *y);
        *x = m;
        *y = m;
    }
    Ok(())
}
