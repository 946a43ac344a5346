//! Undirected weighted graphs, their Laplacians, and the graph generators
//! used by the experiment harness.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("vertex index {index} out of range for {n} vertices")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("self loop at vertex {0}")]
    SelfLoop(usize),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("edge ({i}, {j}) has invalid weight {w} (must be finite and > 0)")]
    InvalidWeight { i: usize, j: usize, w: f64 },

    #[error("graph must have at least one vertex")]
    EmptyGraph,

    #[error("circular graph needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),

    #[error("edge probability {0} outside (0, 1)")]
    EdgeProbabilityOutOfRange(f64),

    #[error("normalized Laplacian undefined: vertex {0} has zero degree")]
    ZeroDegreeVertex(usize),

    #[error("edge list parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Which Laplacian to build from a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianKind {
    /// L = D - W.
    Combinatorial,
    /// D^{-1/2} (D - W) D^{-1/2}; requires every degree > 0.
    Normalized,
}

/// Undirected weighted graph stored as a dense symmetric weight matrix with
/// zero diagonal and nonnegative entries.
///
/// Immutable after construction, so shared references are safe across threads.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    weights: DMatrix<f64>,
}

impl Graph {
    /// Build a graph from an edge list. Each `(i, j, w)` entry sets
    /// `weights[i][j] = weights[j][i] = w`; everything else stays zero.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let mut weights = DMatrix::zeros(n, n);
        for &(i, j, w) in edges {
            if i >= n {
                return Err(GraphError::IndexOutOfRange { index: i, n });
            }
            if j >= n {
                return Err(GraphError::IndexOutOfRange { index: j, n });
            }
            if i == j {
                return Err(GraphError::SelfLoop(i));
            }
            if !w.is_finite() || w <= 0.0 {
                return Err(GraphError::InvalidWeight { i, j, w });
            }
            if weights[(i, j)] != 0.0 {
                return Err(GraphError::DuplicateEdge(i.min(j), i.max(j)));
            }
            weights[(i, j)] = w;
            weights[(j, i)] = w;
        }
        Ok(Self { n, weights })
    }

    /// Unweighted ring: vertex n is adjacent to (n±1) mod N.
    pub fn circular(n: usize) -> Result<Self, GraphError> {
        if n < 3 {
            return Err(GraphError::TooFewVertices(n));
        }
        let edges: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        Self::from_edges(n, &edges)
    }

    /// Erdos-Renyi graph: each unordered pair carries weight 1 with
    /// probability `p`, independently. Deterministic for a given seed.
    ///
    /// Pairs are visited in row-major order `(0,1), (0,2), ..., (N-2,N-1)`
    /// with one uniform draw each from a ChaCha20 stream, so the draw
    /// sequence is part of the reproducibility contract.
    pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::EmptyGraph);
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(GraphError::EdgeProbabilityOutOfRange(p));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut weights = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < p {
                    weights[(i, j)] = 1.0;
                    weights[(j, i)] = 1.0;
                }
            }
        }
        Ok(Self { n, weights })
    }

    /// Parse the edge-list text format: a header line `N <count>` followed by
    /// one edge per line as `<i> <j> <w>` (0-based, whitespace-separated).
    /// `#` starts a comment. Repeating an unordered pair, in either
    /// orientation, is rejected as a duplicate.
    pub fn from_edge_list_str(text: &str) -> Result<Self, GraphError> {
        let mut n: Option<usize> = None;
        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let content = content.trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            match n {
                None => {
                    if fields.len() != 2 || fields[0] != "N" {
                        return Err(GraphError::Parse {
                            line,
                            reason: "expected header `N <count>`".into(),
                        });
                    }
                    let count: usize = fields[1].parse().map_err(|_| GraphError::Parse {
                        line,
                        reason: format!("invalid vertex count `{}`", fields[1]),
                    })?;
                    n = Some(count);
                }
                Some(_) => {
                    if fields.len() != 3 {
                        return Err(GraphError::Parse {
                            line,
                            reason: "expected `<i> <j> <w>`".into(),
                        });
                    }
                    let i: usize = fields[0].parse().map_err(|_| GraphError::Parse {
                        line,
                        reason: format!("invalid index `{}`", fields[0]),
                    })?;
                    let j: usize = fields[1].parse().map_err(|_| GraphError::Parse {
                        line,
                        reason: format!("invalid index `{}`", fields[1]),
                    })?;
                    let w: f64 = fields[2].parse().map_err(|_| GraphError::Parse {
                        line,
                        reason: format!("invalid weight `{}`", fields[2]),
                    })?;
                    edges.push((i, j, w));
                }
            }
        }
        let n = n.ok_or(GraphError::Parse {
            line: 0,
            reason: "missing header `N <count>`".into(),
        })?;
        Self::from_edges(n, &edges)
    }

    /// Load the edge-list format from a file.
    pub fn from_edge_list_path(path: &std::path::Path) -> Result<Self, GraphError> {
        let text = std::fs::read_to_string(path).map_err(|e| GraphError::Parse {
            line: 0,
            reason: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::from_edge_list_str(&text)
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    /// Weighted degree of vertex `i` (row sum of the weight matrix).
    pub fn degree(&self, i: usize) -> f64 {
        self.weights.row(i).sum()
    }

    pub fn edge_count(&self) -> usize {
        let mut count = 0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.weights[(i, j)] != 0.0 {
                    count += 1;
                }
            }
        }
        count
    }

    /// The Laplacian matrix of the requested kind. Combinatorial is D - W;
    /// normalized is D^{-1/2} (D - W) D^{-1/2} and requires all degrees > 0.
    pub fn laplacian(&self, kind: LaplacianKind) -> Result<DMatrix<f64>, GraphError> {
        let degrees: Vec<f64> = (0..self.n).map(|i| self.degree(i)).collect();
        match kind {
            LaplacianKind::Combinatorial => {
                let mut l = -self.weights.clone();
                for i in 0..self.n {
                    l[(i, i)] = degrees[i];
                }
                Ok(l)
            }
            LaplacianKind::Normalized => {
                if let Some(i) = degrees.iter().position(|&d| d <= 0.0) {
                    return Err(GraphError::ZeroDegreeVertex(i));
                }
                let inv_sqrt: Vec<f64> = degrees.iter().map(|d| 1.0 / d.sqrt()).collect();
                let mut l = DMatrix::zeros(self.n, self.n);
                for i in 0..self.n {
                    for j in 0..self.n {
                        if i == j {
                            l[(i, i)] = 1.0;
                        } else if self.weights[(i, j)] != 0.0 {
                            l[(i, j)] = -inv_sqrt[i] * self.weights[(i, j)] * inv_sqrt[j];
                        }
                    }
                }
                Ok(l)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_edge_symmetry() {
        let g = Graph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        assert_eq!(g.weights()[(0, 1)], 1.0);
        assert_eq!(g.weights()[(1, 0)], 1.0);
        assert_eq!(g.weights()[(0, 0)], 0.0);
    }

    #[test]
    fn empty_graph_is_zero_matrix() {
        let g = Graph::from_edges(3, &[]).unwrap();
        assert_eq!(g.weights().sum(), 0.0);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn direct_construction() {
        let g = Graph::from_edges(3, &[(0, 1, 2.0), (1, 2, 0.5)]).unwrap();
        assert_eq!(g.weights()[(0, 1)], 2.0);
        assert_eq!(g.weights()[(1, 2)], 0.5);
        assert_eq!(g.weights()[(0, 2)], 0.0);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(matches!(
            Graph::from_edges(2, &[(0, 2, 1.0)]),
            Err(GraphError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            Graph::from_edges(2, &[(1, 1, 1.0)]),
            Err(GraphError::SelfLoop(1))
        ));
        assert!(matches!(
            Graph::from_edges(3, &[(0, 1, 1.0), (1, 0, 2.0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        ));
        assert!(matches!(
            Graph::from_edges(2, &[(0, 1, f64::NAN)]),
            Err(GraphError::InvalidWeight { .. })
        ));
        assert!(matches!(
            Graph::from_edges(2, &[(0, 1, -1.0)]),
            Err(GraphError::InvalidWeight { .. })
        ));
    }

    #[test]
    fn two_vertex_laplacians() {
        let g = Graph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let l = g.laplacian(LaplacianKind::Combinatorial).unwrap();
        assert_abs_diff_eq!(l, expect, epsilon = 1e-15);
        let ln = g.laplacian(LaplacianKind::Normalized).unwrap();
        assert_abs_diff_eq!(ln, expect, epsilon = 1e-15);
    }

    #[test]
    fn three_cycle_laplacian_eigenvalues() {
        // Hand eigendecomposition of the 3-cycle: eigenvalues {0, 3, 3}.
        let g = Graph::circular(3).unwrap();
        let l = g.laplacian(LaplacianKind::Combinatorial).unwrap();
        let mut eig: Vec<f64> = l.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(eig[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig[1], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig[2], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn normalized_laplacian_rejects_isolated_vertex() {
        let g = Graph::from_edges(3, &[(0, 1, 1.0)]).unwrap();
        assert!(matches!(
            g.laplacian(LaplacianKind::Normalized),
            Err(GraphError::ZeroDegreeVertex(2))
        ));
    }

    #[test]
    fn circular_ring_adjacency() {
        let g = Graph::circular(4).unwrap();
        let w = g.weights();
        assert_eq!(w[(0, 1)], 1.0);
        assert_eq!(w[(1, 2)], 1.0);
        assert_eq!(w[(2, 3)], 1.0);
        assert_eq!(w[(3, 0)], 1.0);
        assert_eq!(w[(0, 2)], 0.0);
        assert_eq!(w[(1, 3)], 0.0);
        assert!(Graph::circular(2).is_err());
    }

    #[test]
    fn circular_laplacian_matches_shift_form() {
        // L = 2 I - R - R^T with R the cyclic shift.
        let n = 7;
        let g = Graph::circular(n).unwrap();
        let l = g.laplacian(LaplacianKind::Combinatorial).unwrap();
        let mut expect = DMatrix::zeros(n, n);
        for i in 0..n {
            expect[(i, i)] = 2.0;
            expect[(i, (i + 1) % n)] -= 1.0;
            expect[((i + 1) % n, i)] -= 1.0;
        }
        assert_abs_diff_eq!(l, expect, epsilon = 1e-15);
    }

    #[test]
    fn erdos_renyi_deterministic_per_seed() {
        let a = Graph::erdos_renyi(10, 0.3, 42).unwrap();
        let b = Graph::erdos_renyi(10, 0.3, 42).unwrap();
        assert_eq!(a.weights(), b.weights());
        let c = Graph::erdos_renyi(10, 0.3, 43).unwrap();
        assert!(a.weights() != c.weights());
    }

    #[test]
    fn erdos_renyi_edge_count_moments() {
        // Binomial moments: 4950 pairs at p = 0.25, std ~ 30.5.
        let g = Graph::erdos_renyi(100, 0.25, 7).unwrap();
        let count = g.edge_count() as f64;
        let mean = 4950.0 * 0.25;
        let sd = (4950.0 * 0.25 * 0.75f64).sqrt();
        assert!(
            (count - mean).abs() < 4.0 * sd,
            "edge count {count} too far from {mean}"
        );
    }

    #[test]
    fn erdos_renyi_seed_sweep_frequency() {
        // Monte Carlo over seeds: a 2-vertex graph at p = 0.5 has its single
        // edge present in about half of the seeds.
        let mut present = 0;
        for seed in 0..10_000 {
            if Graph::erdos_renyi(2, 0.5, seed).unwrap().edge_count() == 1 {
                present += 1;
            }
        }
        assert!(
            (4800..=5200).contains(&present),
            "edge present in {present}/10000 seeds"
        );
    }

    #[test]
    fn edge_list_round_trip() {
        let text = "# toy graph\nN 3\n0 1 2.0   # heavy edge\n1 2 0.5\n";
        let g = Graph::from_edge_list_str(text).unwrap();
        assert_eq!(g.n_vertices(), 3);
        assert_eq!(g.weights()[(0, 1)], 2.0);
        assert_eq!(g.weights()[(2, 1)], 0.5);
    }

    #[test]
    fn edge_list_rejects_asymmetric_duplicate() {
        let text = "N 3\n0 1 1.0\n1 0 1.0\n";
        assert!(matches!(
            Graph::from_edge_list_str(text),
            Err(GraphError::DuplicateEdge(0, 1))
        ));
    }

    #[test]
    fn edge_list_requires_header() {
        assert!(matches!(
            Graph::from_edge_list_str("0 1 1.0\n"),
            Err(GraphError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            Graph::from_edge_list_str("# nothing\n"),
            Err(GraphError::Parse { line: 0, .. })
        ));
    }
}
