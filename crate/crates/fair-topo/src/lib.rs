//! Fair network topology inference from stationary graph signals.
//!
//! Observations on the nodes of an unknown undirected graph are assumed
//! stationary: their covariance commutes with the adjacency matrix. This
//! crate recovers a sparse adjacency matrix from such observations while
//! penalizing demographically biased edge patterns between node groups.
//!
//! The main pieces:
//!
//! - [`graph`]: adjacency, group-assignment, and constraint-set types.
//! - [`fairness`]: the groupwise and nodewise demographic-parity gaps.
//! - [`signals`]: stationary signal synthesis and covariance estimation.
//! - [`vectorize`]: the `(Psi, Phi, b)` form over free edge parameters.
//! - [`solver`]: the convex program via operator splitting, plus an exact
//!   support-enumeration oracle for tiny instances.
//! - [`certify`]: the two sufficient conditions under which the convex
//!   relaxation provably returns the sparsest solution.
//! - [`synth`]: two-community generators with controlled across-group edge
//!   ratios.
//! - [`experiments`]: edge-ratio sweeps, group-label studies, and the
//!   roll-call sweep, emitting plot-ready CSV tables.
//! - [`ingest`]: roll-call vote ingestion into nodal signal matrices.
//!
//! See the `examples/` directory for runnable walkthroughs of each
//! capability, and the `fair-topo` binary for the file-based CLI.

pub mod certify;
pub mod error;
pub mod fairness;
pub mod graph;
pub mod seed;
pub mod signals;
pub mod solver;
pub mod synth;
pub mod vectorize;

pub use certify::{certify, check_condition1, check_condition2, default_psi_grid, CertificateReport};
pub use error::{Error, Result};
pub use fairness::{bias_report, build_b, delta_dp, delta_dp_node, BiasReport};
pub use graph::{indicator_matrix, AdjacencyMatrix, ConstraintSet, GroupAssignment, Normalization};
pub use signals::{
    analytic_covariance, apply_filter, commutativity_residual, sample_covariance, sample_signals,
    well_conditioned_filter, CovarianceEstimate, FilterSpec,
};
pub use solver::{solve_convex, solve_l0_bruteforce, support_of, SolveConfig, SolveReport, SolverContext};
pub use vectorize::{build_vectorized, unvec_upper, vec_upper, Penalty, VectorizedProblem};
