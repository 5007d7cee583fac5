//! Vectorized form of the inference program.
//!
//! Symmetry and the zero diagonal make the strict upper triangle a complete
//! parameterization of an adjacency matrix, so the program is expressed over
//! `a = vec_upper(A)` of length `E = N(N-1)/2`. The objective
//! `||A||_1 + beta * gap(A, Z)` becomes `||Psi a||_1` because both gap
//! metrics are sums of absolute values of linear functionals of `A`; the
//! exact-stationarity constraint and the normalization become `Phi a = b`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fairness::build_b;
use crate::graph::{AdjacencyMatrix, ConstraintSet, GroupAssignment};
use crate::signals::CovarianceEstimate;

/// Bijection between strict-upper-triangle pairs `(i, j)`, `i < j`, and
/// positions `0..E` in lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexMap {
    n: usize,
}

impl IndexMap {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of free parameters `N(N-1)/2`.
    pub fn e(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    pub fn pair_to_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn index_to_pair(&self, k: usize) -> (usize, usize) {
        debug_assert!(k < self.e());
        let mut i = 0;
        let mut base = 0;
        loop {
            let row_len = self.n - i - 1;
            if k < base + row_len {
                return (i, i + 1 + k - base);
            }
            base += row_len;
            i += 1;
        }
    }
}

/// Strict upper triangle of the weight matrix in lexicographic pair order.
pub fn vec_upper(a: &AdjacencyMatrix) -> DVector<f64> {
    let n = a.n();
    let map = IndexMap::new(n);
    let mut v = DVector::zeros(map.e());
    let w = a.weights();
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            v[k] = w[(i, j)];
            k += 1;
        }
    }
    v
}

/// Rebuild the symmetric hollow matrix encoded by an upper-triangle vector.
/// No sign validation; use [`unvec_upper`] to get a checked adjacency.
pub fn unvec_upper_matrix(v: &DVector<f64>, n: usize) -> DMatrix<f64> {
    let map = IndexMap::new(n);
    assert_eq!(v.len(), map.e(), "vector length does not match node count");
    let mut w = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            w[(i, j)] = v[k];
            w[(j, i)] = v[k];
            k += 1;
        }
    }
    w
}

pub fn unvec_upper(v: &DVector<f64>, n: usize) -> Result<AdjacencyMatrix> {
    AdjacencyMatrix::new(unvec_upper_matrix(v, n))
}

/// Which gap metric the solver penalizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Penalty {
    None,
    /// Groupwise gap, one penalty row per ordered group pair.
    Dp,
    /// Nodewise gap, one penalty row per (group, node) pair.
    DpNode,
}

impl Penalty {
    pub fn as_str(&self) -> &'static str {
        match self {
            Penalty::None => "none",
            Penalty::Dp => "dp",
            Penalty::DpNode => "node",
        }
    }
}

/// The `(Psi, Phi, b)` triple over the free-parameter vector.
///
/// `psi` rows: `E` sparsity rows (`2 I`, each free parameter appears twice
/// in `||A||_1`) followed by the beta-weighted fairness rows. `phi` rows:
/// the `N^2` coefficients of `a -> vec(AC - CA)` in column-major order,
/// then one normalization row; `b` is zero except for the normalization
/// entry.
#[derive(Debug, Clone)]
pub struct VectorizedProblem {
    pub e: usize,
    pub psi: DMatrix<f64>,
    pub phi: DMatrix<f64>,
    pub b: DVector<f64>,
    pub index_map: IndexMap,
    pub penalty: Penalty,
    pub beta: f64,
    n: usize,
    fairness_rows: usize,
}

impl VectorizedProblem {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn fairness_row_count(&self) -> usize {
        self.fairness_rows
    }

    /// The commutativity block of `phi` (everything but the last row).
    pub fn commutativity_block(&self) -> DMatrix<f64> {
        self.phi.rows(0, self.n * self.n).into_owned()
    }

    /// The appended normalization row of `phi` and its right-hand side.
    pub fn normalization_row(&self) -> (DVector<f64>, f64) {
        let q = self.phi.nrows() - 1;
        (self.phi.row(q).transpose(), self.b[q])
    }
}

/// Beta-weighted fairness rows for the chosen penalty; `F x E` where `F` is
/// `G(G-1)` for the groupwise gap and `N*G` for the nodewise gap.
pub(crate) fn fairness_rows(
    groups: &GroupAssignment,
    beta: f64,
    penalty: Penalty,
    map: &IndexMap,
) -> Result<DMatrix<f64>> {
    let e = map.e();
    match penalty {
        Penalty::None => Ok(DMatrix::zeros(0, e)),
        Penalty::Dp => {
            let g_count = groups.g_count();
            if g_count < 2 {
                return Err(Error::InvalidGroups(
                    "the groupwise gap needs at least two groups".into(),
                ));
            }
            let sizes = groups.group_sizes();
            if let Some((g, &size)) = sizes.iter().enumerate().find(|&(_, &s)| s < 2) {
                return Err(Error::DegenerateGroup { group: g, size });
            }
            let labels = groups.labels();
            let mut rows = DMatrix::zeros(g_count * (g_count - 1), e);
            let mut r = 0;
            for g in 0..g_count {
                let ng = sizes[g] as f64;
                for h in 0..g_count {
                    if h == g {
                        continue;
                    }
                    let nh = sizes[h] as f64;
                    for k in 0..e {
                        let (p, q) = map.index_to_pair(k);
                        let (lp, lq) = (labels[p], labels[q]);
                        let coeff = if lp == g && lq == g {
                            2.0 / (ng * ng - ng)
                        } else if (lp == g && lq == h) || (lp == h && lq == g) {
                            -1.0 / (ng * nh)
                        } else {
                            0.0
                        };
                        rows[(r, k)] = beta * coeff;
                    }
                    r += 1;
                }
            }
            Ok(rows)
        }
        Penalty::DpNode => {
            let b = build_b(groups)?;
            let g_count = groups.g_count();
            let n = groups.n();
            let mut rows = DMatrix::zeros(n * g_count, e);
            let mut r = 0;
            for g in 0..g_count {
                for i in 0..n {
                    // (B A)[g][i] = sum_j B[g][j] A[j][i]
                    for j in 0..n {
                        if j == i {
                            continue;
                        }
                        let k = if i < j {
                            map.pair_to_index(i, j)
                        } else {
                            map.pair_to_index(j, i)
                        };
                        rows[(r, k)] += beta * b[(g, j)];
                    }
                    r += 1;
                }
            }
            Ok(rows)
        }
    }
}

/// Coefficients of `a -> vec(AC - CA)` with entries in column-major order.
fn commutator_block(c: &DMatrix<f64>, map: &IndexMap) -> DMatrix<f64> {
    let n = map.n();
    let e = map.e();
    let mut m = DMatrix::zeros(n * n, e);
    for k in 0..e {
        let (p, q) = map.index_to_pair(k);
        // d(AC - CA)[i][j] / dA_pq with A_pq and A_qp moving together
        for j in 0..n {
            m[(j * n + p, k)] += c[(q, j)];
            m[(j * n + q, k)] += c[(p, j)];
        }
        for i in 0..n {
            m[(q * n + i, k)] -= c[(i, p)];
            m[(p * n + i, k)] -= c[(i, q)];
        }
    }
    m
}

/// Upper-triangle commutator operator used by the solver: `E` rows scaled by
/// sqrt(2) so that `||M a||_2 = ||AC - CA||_F` exactly (the commutator of
/// symmetric matrices is antisymmetric, so the strict upper triangle carries
/// all of it).
pub(crate) fn reduced_commutator(c: &DMatrix<f64>, map: &IndexMap) -> DMatrix<f64> {
    let n = map.n();
    let e = map.e();
    let s = 2.0f64.sqrt();
    let mut m = DMatrix::zeros(e, e);
    for k in 0..e {
        let (p, q) = map.index_to_pair(k);
        // entry (i, j), i < j, of the commutator picks up the same four
        // delta terms as the full block
        for j in (p + 1)..n {
            m[(map.pair_to_index(p, j), k)] += s * c[(q, j)];
        }
        for i in 0..p {
            m[(map.pair_to_index(i, p), k)] -= s * c[(i, q)];
        }
        for j in (q + 1)..n {
            m[(map.pair_to_index(q, j), k)] += s * c[(p, j)];
        }
        for i in 0..q {
            m[(map.pair_to_index(i, q), k)] -= s * c[(i, p)];
        }
    }
    m
}

/// Assemble the vectorized problem for a covariance, group assignment,
/// penalty weight and constraint set.
pub fn build_vectorized(
    c: &CovarianceEstimate,
    groups: &GroupAssignment,
    beta: f64,
    penalty: Penalty,
    cset: &ConstraintSet,
) -> Result<VectorizedProblem> {
    if c.n() != groups.n() {
        return Err(Error::Dimension(format!(
            "covariance has {} nodes, groups {}",
            c.n(),
            groups.n()
        )));
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "penalty weight must be finite and nonnegative, got {beta}"
        )));
    }
    let n = c.n();
    if n < 2 {
        return Err(Error::Infeasible(
            "a single node has no free edge parameters".into(),
        ));
    }
    let map = IndexMap::new(n);
    let e = map.e();

    let fair = fairness_rows(groups, beta, penalty, &map)?;
    let f = fair.nrows();
    let mut psi = DMatrix::zeros(e + f, e);
    for k in 0..e {
        psi[(k, k)] = 2.0;
    }
    psi.rows_mut(e, f).copy_from(&fair);

    let comm = commutator_block(c.matrix(), &map);
    let (norm_row, norm_rhs) = cset.normalization_functional(n);
    let q = n * n + 1;
    let mut phi = DMatrix::zeros(q, e);
    phi.rows_mut(0, n * n).copy_from(&comm);
    phi.row_mut(n * n).copy_from(&norm_row.transpose());
    let mut b = DVector::zeros(q);
    b[q - 1] = norm_rhs;

    Ok(VectorizedProblem {
        e,
        psi,
        phi,
        b,
        index_map: map,
        penalty,
        beta,
        n,
        fairness_rows: f,
    })
}
