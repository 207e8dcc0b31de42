//! Undirected simple graphs over `p` nodes and multi-environment ensembles.
//!
//! Unordered node pairs `(i, j)` with `i < j` are addressed by a linear index
//! in row-major upper-triangular order; every per-pair table in the crate
//! (edge covariates, accumulators) uses the same order.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of unordered pairs on `p` nodes.
#[inline]
pub fn pair_count(p: usize) -> usize {
    p * p.saturating_sub(1) / 2
}

/// Linear index of the unordered pair `{i, j}`, `i != j`.
#[inline]
pub fn pair_index(i: usize, j: usize, p: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    debug_assert!(b < p && a != b);
    a * (2 * p - a - 1) / 2 + (b - a - 1)
}

/// All pairs `(i, j)`, `i < j`, in linear-index order.
pub fn pairs(p: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..p).flat_map(move |i| (i + 1..p).map(move |j| (i, j)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    p: usize,
    edges: Vec<bool>,
}

impl Graph {
    pub fn empty(p: usize) -> Self {
        Graph { p, edges: vec![false; pair_count(p)] }
    }

    pub fn complete(p: usize) -> Self {
        Graph { p, edges: vec![true; pair_count(p)] }
    }

    pub fn from_edges(p: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::empty(p);
        for &(i, j) in edges {
            if i == j || i >= p || j >= p {
                return Err(Error::Domain(format!("invalid edge ({i}, {j}) for p = {p}")));
            }
            g.set_edge(i, j, true);
        }
        Ok(g)
    }

    /// Reads the upper triangle of a symmetric 0/1 adjacency matrix.
    pub fn from_adjacency(adj: &DMatrix<f64>) -> Result<Self> {
        let p = adj.nrows();
        if adj.ncols() != p {
            return Err(Error::Dimension("adjacency matrix is not square".into()));
        }
        let mut g = Graph::empty(p);
        for (i, j) in pairs(p) {
            if adj[(i, j)] != adj[(j, i)] {
                return Err(Error::Domain(format!("adjacency not symmetric at ({i}, {j})")));
            }
            g.set_edge(i, j, adj[(i, j)] != 0.0);
        }
        Ok(g)
    }

    pub fn to_adjacency(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.p, self.p);
        for (i, j) in self.edge_list() {
            m[(i, j)] = 1.0;
            m[(j, i)] = 1.0;
        }
        m
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.edges[pair_index(i, j, self.p)]
    }

    #[inline]
    pub fn has_pair(&self, pair: usize) -> bool {
        self.edges[pair]
    }

    #[inline]
    pub fn set_edge(&mut self, i: usize, j: usize, present: bool) {
        let idx = pair_index(i, j, self.p);
        self.edges[idx] = present;
    }

    #[inline]
    pub fn set_pair(&mut self, pair: usize, present: bool) {
        self.edges[pair] = present;
    }

    pub fn toggle(&mut self, i: usize, j: usize) {
        let idx = pair_index(i, j, self.p);
        self.edges[idx] = !self.edges[idx];
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().filter(|&&e| e).count()
    }

    pub fn density(&self) -> f64 {
        let n = pair_count(self.p);
        if n == 0 {
            0.0
        } else {
            self.edge_count() as f64 / n as f64
        }
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.p).filter(move |&j| self.has_edge(i, j))
    }

    /// Number of nodes adjacent to both `i` and `j`.
    pub fn common_neighbors(&self, i: usize, j: usize) -> usize {
        (0..self.p).filter(|&l| l != i && l != j && self.has_edge(i, l) && self.has_edge(j, l)).count()
    }

    pub fn edge_list(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        pairs(self.p).zip(self.edges.iter()).filter(|(_, &e)| e).map(|(ij, _)| ij)
    }

    pub fn indicators(&self) -> &[bool] {
        &self.edges
    }
}

/// One graph per environment over a shared node set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEnsemble {
    p: usize,
    graphs: Vec<Graph>,
}

impl GraphEnsemble {
    pub fn empty(p: usize, b: usize) -> Self {
        GraphEnsemble { p, graphs: vec![Graph::empty(p); b] }
    }

    pub fn new(graphs: Vec<Graph>) -> Result<Self> {
        let p = graphs.first().map(Graph::p).unwrap_or(0);
        if graphs.iter().any(|g| g.p() != p) {
            return Err(Error::Dimension("graphs in an ensemble must share p".into()));
        }
        Ok(GraphEnsemble { p, graphs })
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    #[inline]
    pub fn graph(&self, k: usize) -> &Graph {
        &self.graphs[k]
    }

    #[inline]
    pub fn graph_mut(&mut self, k: usize) -> &mut Graph {
        &mut self.graphs[k]
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn into_graphs(self) -> Vec<Graph> {
        self.graphs
    }
}
