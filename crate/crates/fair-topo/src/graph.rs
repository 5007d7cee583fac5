//! Core graph, group, and constraint-set types.
//!
//! The graph shift operator throughout the crate is the adjacency matrix:
//! symmetric, zero diagonal, nonnegative weights. Groups are dense integer
//! ids `0..G`; string labels are resolved at ingestion.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Symmetric nonnegative N x N weight matrix with zero diagonal.
///
/// Weighted estimates are first-class; binary truth graphs are the special
/// case of unit weights. Construction validates the invariants exactly, so
/// numerically produced matrices should go through
/// [`ConstraintSet::project`] first.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    n: usize,
    w: DMatrix<f64>,
}

impl AdjacencyMatrix {
    pub fn new(w: DMatrix<f64>) -> Result<Self> {
        if w.nrows() != w.ncols() {
            return Err(Error::InvalidGraph(format!(
                "expected a square matrix, got {}x{}",
                w.nrows(),
                w.ncols()
            )));
        }
        let n = w.nrows();
        for i in 0..n {
            if w[(i, i)] != 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "nonzero diagonal entry at ({i},{i}): {}",
                    w[(i, i)]
                )));
            }
            for j in 0..n {
                let wij = w[(i, j)];
                if !wij.is_finite() {
                    return Err(Error::InvalidGraph(format!(
                        "non-finite weight at ({i},{j})"
                    )));
                }
                if wij < 0.0 {
                    return Err(Error::InvalidGraph(format!(
                        "negative weight at ({i},{j}): {wij}"
                    )));
                }
                if wij != w[(j, i)] {
                    return Err(Error::InvalidGraph(format!(
                        "asymmetric weights at ({i},{j}): {} vs {}",
                        wij,
                        w[(j, i)]
                    )));
                }
            }
        }
        Ok(Self { n, w })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            w: DMatrix::zeros(n, n),
        }
    }

    /// Unit-weight graph from an undirected edge list.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut w = DMatrix::zeros(n, n);
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({i},{j}) out of bounds for {n} nodes"
                )));
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("self-loop at node {i}")));
            }
            w[(i, j)] = 1.0;
            w[(j, i)] = 1.0;
        }
        Self::new(w)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.w
    }

    /// Sum of all entries (each undirected edge counted twice).
    pub fn total_weight(&self) -> f64 {
        self.w.sum()
    }

    /// Entrywise l1 norm; equals `total_weight` since weights are nonnegative.
    pub fn l1_norm(&self) -> f64 {
        self.w.iter().map(|v| v.abs()).sum()
    }
}

/// Partition of `n` nodes into `g_count` groups with dense ids `0..g_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAssignment {
    n: usize,
    g_count: usize,
    labels: Vec<usize>,
}

impl GroupAssignment {
    pub fn new(labels: Vec<usize>, g_count: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidGroups("no nodes".into()));
        }
        if g_count == 0 {
            return Err(Error::InvalidGroups("zero groups".into()));
        }
        let mut sizes = vec![0usize; g_count];
        for (i, &g) in labels.iter().enumerate() {
            if g >= g_count {
                return Err(Error::InvalidGroups(format!(
                    "node {i} has group id {g}, expected < {g_count}"
                )));
            }
            sizes[g] += 1;
        }
        if let Some(g) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidGroups(format!("group {g} has no members")));
        }
        Ok(Self {
            n: labels.len(),
            g_count,
            labels,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn g_count(&self) -> usize {
        self.g_count
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label_of(&self, node: usize) -> usize {
        self.labels[node]
    }

    /// Member count per group; every entry is at least 1.
    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.g_count];
        for &g in &self.labels {
            sizes[g] += 1;
        }
        sizes
    }

    pub fn members(&self, g: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|&(_, &l)| l == g)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Binary N x G indicator: `Z[i][g] = 1` iff node `i` belongs to group `g`.
pub fn indicator_matrix(groups: &GroupAssignment) -> DMatrix<f64> {
    let mut z = DMatrix::zeros(groups.n(), groups.g_count());
    for (i, &g) in groups.labels().iter().enumerate() {
        z[(i, g)] = 1.0;
    }
    z
}

/// Normalization pinning the scale of an adjacency matrix so that the zero
/// matrix is excluded from the feasible set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Normalization {
    /// First row sums to 1. Keeps the l1 objective non-constant on the
    /// feasible set; the default.
    FirstRowSum1,
    /// All entries sum to N. Makes the l1 term constant over the feasible
    /// set, so the sparsity objective degenerates; offered with a warning.
    TotalSumN,
}

/// The set of valid, nontrivial adjacency matrices: symmetry, zero diagonal
/// and nonnegativity always hold; the normalization is configurable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ConstraintSet {
    pub normalization: Normalization,
}

impl Default for ConstraintSet {
    fn default() -> Self {
        Self {
            normalization: Normalization::FirstRowSum1,
        }
    }
}

impl ConstraintSet {
    /// Map an arbitrary square matrix to the structural part of the set:
    /// symmetrize as `(m + m')/2`, zero the diagonal, clamp negatives.
    /// The normalization is an equality constraint handled by the solver,
    /// not applied here. Idempotent.
    pub fn project(&self, m: &DMatrix<f64>) -> Result<AdjacencyMatrix> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!(
                "cannot project a {}x{} matrix",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        let mut w = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = (0.5 * (m[(i, j)] + m[(j, i)])).max(0.0);
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
        AdjacencyMatrix::new(w)
    }

    /// Coefficients of the normalization functional on the upper-triangle
    /// parameter vector, together with its right-hand side.
    ///
    /// `FirstRowSum1`: sum of the first row is 1, so every pair `(0, j)`
    /// carries coefficient 1. `TotalSumN`: the total entry sum is N and each
    /// free parameter appears twice.
    pub fn normalization_functional(&self, n: usize) -> (DVector<f64>, f64) {
        let e = n * (n - 1) / 2;
        match self.normalization {
            Normalization::FirstRowSum1 => {
                let mut row = DVector::zeros(e);
                // pairs (0, j) occupy the first n-1 slots of the
                // lexicographic upper-triangle ordering
                for k in 0..(n - 1) {
                    row[k] = 1.0;
                }
                (row, 1.0)
            }
            Normalization::TotalSumN => (DVector::from_element(e, 2.0), n as f64),
        }
    }

    /// Value of the normalization functional on a concrete matrix.
    pub fn normalization_value(&self, a: &AdjacencyMatrix) -> f64 {
        match self.normalization {
            Normalization::FirstRowSum1 => a.weights().row(0).sum(),
            Normalization::TotalSumN => a.total_weight(),
        }
    }

    /// Target value of the normalization functional.
    pub fn normalization_target(&self, n: usize) -> f64 {
        match self.normalization {
            Normalization::FirstRowSum1 => 1.0,
            Normalization::TotalSumN => n as f64,
        }
    }

    /// `|functional(a) - target|`, for feasibility checks.
    pub fn normalization_residual(&self, a: &AdjacencyMatrix) -> f64 {
        (self.normalization_value(a) - self.normalization_target(a.n())).abs()
    }
}
