use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeRole<T> {
    /// Memristive edge with its initial memory value.
    Memristor { w0: T },
    /// Ideal voltage source; the potential rises by `volts` from tail to head.
    Source { volts: T },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T> {
    pub tail: usize,
    pub head: usize,
    pub role: EdgeRole<T>,
}

/// Directed multigraph whose edges are memristors or ideal sources.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitGraph<T> {
    nodes: usize,
    edges: Vec<Edge<T>>,
}

impl<T: Scalar> CircuitGraph<T> {
    pub fn new(nodes: usize, edges: Vec<Edge<T>>) -> Result<Self> {
        if nodes == 0 {
            return Err(Error::invalid("nodes", "graph needs at least one node"));
        }
        for (k, e) in edges.iter().enumerate() {
            if e.tail >= nodes || e.head >= nodes {
                return Err(Error::invalid("edges", format!("edge {k} references a node >= {nodes}")));
            }
            match e.role {
                EdgeRole::Memristor { w0 } if !(w0 >= T::zero() && w0 <= T::one()) => {
                    return Err(Error::invalid("edges", format!("edge {k}: w0 must lie in [0, 1]")));
                }
                EdgeRole::Source { volts } if !volts.is_finite_val() => {
                    return Err(Error::invalid("edges", format!("edge {k}: source voltage must be finite")));
                }
                EdgeRole::Source { .. } if e.tail == e.head => {
                    return Err(Error::invalid("edges", format!("edge {k}: a source cannot be a self-loop")));
                }
                _ => {}
            }
        }
        let g = CircuitGraph { nodes, edges };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    /// All-memristor graph from `(tail, head)` pairs, every `w0` set to `w0`.
    pub fn memristive(nodes: usize, pairs: &[(usize, usize)], w0: T) -> Result<Self> {
        Self::new(nodes, pairs.iter().map(|&(tail, head)| Edge { tail, head, role: EdgeRole::Memristor { w0 } }).collect())
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn memristor_edges(&self) -> Vec<usize> {
        (0..self.edges.len()).filter(|&k| matches!(self.edges[k].role, EdgeRole::Memristor { .. })).collect()
    }

    pub fn source_edges(&self) -> Vec<usize> {
        (0..self.edges.len()).filter(|&k| matches!(self.edges[k].role, EdgeRole::Source { .. })).collect()
    }

    pub fn initial_memory(&self) -> Vec<T> {
        self.edges
            .iter()
            .filter_map(|e| match e.role {
                EdgeRole::Memristor { w0 } => Some(w0),
                EdgeRole::Source { .. } => None,
            })
            .collect()
    }

    /// Reverses edge `k`; a source keeps its physical polarity (sign flips).
    pub fn flip(&mut self, k: usize) {
        let e = &mut self.edges[k];
        std::mem::swap(&mut e.tail, &mut e.head);
        if let EdgeRole::Source { volts } = &mut e.role {
            *volts = -*volts;
        }
    }

    pub fn is_connected(&self) -> bool {
        let adj = self.adjacency();
        let mut seen = vec![false; self.nodes];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Undirected adjacency: `adj[u]` lists `(neighbour, edge index)`.
    pub(crate) fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.nodes];
        for (k, e) in self.edges.iter().enumerate() {
            adj[e.tail].push((e.head, k));
            if e.head != e.tail {
                adj[e.head].push((e.tail, k));
            }
        }
        adj
    }

    /// Fundamental cycles of a BFS spanning tree, one row per cycle over all
    /// edges, entries in `{-1, 0, 1}` following the traversal direction.
    pub fn cycle_matrix(&self) -> Vec<Vec<i8>> {
        let adj = self.adjacency();
        let n = self.nodes;
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut depth = vec![0usize; n];
        let mut seen = vec![false; n];
        let mut tree_edge = vec![false; self.edges.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, k) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some((u, k));
                    depth[v] = depth[u] + 1;
                    tree_edge[k] = true;
                    queue.push_back(v);
                }
            }
        }
        let mut rows = Vec::new();
        for (k, e) in self.edges.iter().enumerate() {
            if tree_edge[k] {
                continue;
            }
            let mut row = vec![0i8; self.edges.len()];
            row[k] = 1;
            // close the cycle: walk from head back to tail through the tree
            let (mut a, mut b) = (e.head, e.tail);
            let mut up_from_a = Vec::new();
            let mut down_to_b = Vec::new();
            while a != b {
                if depth[a] >= depth[b] {
                    let (p, ke) = parent[a].expect("non-root has parent");
                    up_from_a.push((a, p, ke));
                    a = p;
                } else {
                    let (p, ke) = parent[b].expect("non-root has parent");
                    down_to_b.push((p, b, ke));
                    b = p;
                }
            }
            for (from, to, ke) in up_from_a.into_iter().chain(down_to_b.into_iter().rev()) {
                let te = &self.edges[ke];
                row[ke] += if te.tail == from && te.head == to { 1 } else { -1 };
            }
            rows.push(row);
        }
        rows
    }

    /// `tail head role value` per line; role is `memristor` (value `w0`) or `source` (value volts).
    pub fn to_text(&self) -> String {
        let mut s = format!("nodes {}\n", self.nodes);
        for e in &self.edges {
            let (role, value) = match e.role {
                EdgeRole::Memristor { w0 } => ("memristor", w0),
                EdgeRole::Source { volts } => ("source", volts),
            };
            writeln!(s, "{} {} {} {}", e.tail, e.head, role, value).expect("write to String");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut nodes = None;
        let mut edges = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Parse(format!("line {}: expected `tail head role value`", ln + 1));
            if parts.len() == 2 && parts[0] == "nodes" {
                nodes = Some(parts[1].parse::<usize>().map_err(|_| bad())?);
                continue;
            }
            if parts.len() != 4 {
                return Err(bad());
            }
            let tail = parts[0].parse::<usize>().map_err(|_| bad())?;
            let head = parts[1].parse::<usize>().map_err(|_| bad())?;
            let value = T::lit(parts[3].parse::<f64>().map_err(|_| bad())?);
            let role = match parts[2] {
                "memristor" => EdgeRole::Memristor { w0: value },
                "source" => EdgeRole::Source { volts: value },
                other => return Err(Error::Parse(format!("line {}: unknown role `{other}`", ln + 1))),
            };
            edges.push(Edge { tail, head, role });
        }
        let nodes = nodes.unwrap_or_else(|| edges.iter().map(|e| e.tail.max(e.head) + 1).max().unwrap_or(0));
        Self::new(nodes, edges)
    }
}

/// Random connected memristive graph: a random spanning tree plus uniformly
/// chosen extra node pairs (no self-loops, no parallel edges), each edge
/// randomly oriented, initial memory uniform in `[0, 1]`.
pub fn random_graph<T: Scalar, R: Rng>(nodes: usize, edges: usize, rng: &mut R) -> Result<CircuitGraph<T>> {
    if nodes < 2 {
        return Err(Error::invalid("nodes", "need at least 2 nodes"));
    }
    let max_edges = nodes * (nodes - 1) / 2;
    if edges < nodes - 1 || edges > max_edges {
        return Err(Error::invalid("edges", format!("need {} <= edges <= {max_edges}", nodes - 1)));
    }
    let mut order: Vec<usize> = (0..nodes).collect();
    order.shuffle(rng);
    let mut present = std::collections::BTreeSet::new();
    let mut pairs = Vec::with_capacity(edges);
    for k in 1..nodes {
        let a = order[k];
        let b = order[rng.random_range(0..k)];
        present.insert((a.min(b), a.max(b)));
        pairs.push((a, b));
    }
    while pairs.len() < edges {
        let a = rng.random_range(0..nodes);
        let b = rng.random_range(0..nodes);
        if a == b || !present.insert((a.min(b), a.max(b))) {
            continue;
        }
        pairs.push((a, b));
    }
    let list = pairs
        .into_iter()
        .map(|(a, b)| {
            let (tail, head) = if rng.random::<bool>() { (a, b) } else { (b, a) };
            Edge { tail, head, role: EdgeRole::Memristor { w0: T::lit(rng.random::<f64>()) } }
        })
        .collect();
    CircuitGraph::new(nodes, list)
}
