//! Topological demographic-parity gap metrics.
//!
//! Two gaps are implemented. The groupwise gap compares within-group and
//! across-group edge rates over every ordered pair of groups. The nodewise
//! gap is the entrywise l1 norm of `B * A` for a group-contrast matrix `B`;
//! it grows whenever any single node prefers connecting to some group, which
//! makes it the stricter of the two.
//!
//! Both metrics are positively homogeneous seminorms of the weight matrix,
//! which is what lets the solver fold them into an l1 objective. Evaluation
//! uses a fixed accumulation order (group-major, then node) so results are
//! bit-reproducible for identical inputs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{AdjacencyMatrix, GroupAssignment};
use nalgebra::DMatrix;

/// Quadratic form `z_g' A z_h` accumulated in node order.
fn group_pair_weight(a: &AdjacencyMatrix, groups: &GroupAssignment, g: usize, h: usize) -> f64 {
    let w = a.weights();
    let labels = groups.labels();
    let n = groups.n();
    let mut sum = 0.0;
    for i in 0..n {
        if labels[i] != g {
            continue;
        }
        for j in 0..n {
            if labels[j] == h {
                sum += w[(i, j)];
            }
        }
    }
    sum
}

fn check_dims(a: &AdjacencyMatrix, groups: &GroupAssignment) -> Result<()> {
    if a.n() != groups.n() {
        return Err(Error::Dimension(format!(
            "graph has {} nodes but the assignment covers {}",
            a.n(),
            groups.n()
        )));
    }
    Ok(())
}

/// Groupwise gap in demographic parity.
///
/// Sums `|z_g'Az_g/(N_g^2-N_g) - z_g'Az_h/(N_g N_h)|` over ordered pairs
/// `(g, h)`, `h != g`. The within-group denominator counts ordered node
/// pairs, so every group needs at least two members.
pub fn delta_dp(a: &AdjacencyMatrix, groups: &GroupAssignment) -> Result<f64> {
    check_dims(a, groups)?;
    if groups.g_count() < 2 {
        return Err(Error::InvalidGroups(
            "the groupwise gap needs at least two groups".into(),
        ));
    }
    let sizes = groups.group_sizes();
    if let Some((g, &size)) = sizes.iter().enumerate().find(|&(_, &s)| s < 2) {
        return Err(Error::DegenerateGroup { group: g, size });
    }
    let g_count = groups.g_count();
    let mut total = 0.0;
    for g in 0..g_count {
        let ng = sizes[g] as f64;
        let within = group_pair_weight(a, groups, g, g) / (ng * ng - ng);
        for h in 0..g_count {
            if h == g {
                continue;
            }
            let nh = sizes[h] as f64;
            let across = group_pair_weight(a, groups, g, h) / (ng * nh);
            total += (within - across).abs();
        }
    }
    Ok(total)
}

/// Group-contrast matrix: `B[g][i] = (G-1)/N_g` when node `i` is in group
/// `g`, and `-1/N_h` when it is in group `h != g`. Rows sum to zero.
pub fn build_b(groups: &GroupAssignment) -> Result<DMatrix<f64>> {
    if groups.g_count() < 2 {
        return Err(Error::InvalidGroups(
            "the contrast matrix needs at least two groups".into(),
        ));
    }
    let sizes = groups.group_sizes();
    let g_count = groups.g_count();
    let n = groups.n();
    let mut b = DMatrix::zeros(g_count, n);
    for g in 0..g_count {
        for i in 0..n {
            let li = groups.label_of(i);
            b[(g, i)] = if li == g {
                (g_count as f64 - 1.0) / sizes[g] as f64
            } else {
                -1.0 / sizes[li] as f64
            };
        }
    }
    Ok(b)
}

/// Nodewise gap in demographic parity: the entrywise l1 norm of `B * A`.
///
/// Unlike the groupwise gap this is defined for singleton groups; its
/// normalization divides by `N_g`, not `N_g - 1`, so even complete graphs
/// register a nonzero value.
pub fn delta_dp_node(a: &AdjacencyMatrix, groups: &GroupAssignment) -> Result<f64> {
    check_dims(a, groups)?;
    let b = build_b(groups)?;
    let w = a.weights();
    let g_count = groups.g_count();
    let n = groups.n();
    // group-major accumulation of |(BA)[g][i]|
    let mut total = 0.0;
    for g in 0..g_count {
        for i in 0..n {
            let mut entry = 0.0;
            for j in 0..n {
                entry += b[(g, j)] * w[(j, i)];
            }
            total += entry.abs();
        }
    }
    Ok(total)
}

/// Bias summary of a single graph under a group assignment.
#[derive(Debug, Clone, Serialize)]
pub struct BiasReport {
    pub delta_dp: f64,
    pub delta_dp_node: f64,
    pub edge_density: f64,
    /// `delta_dp / edge_density`; absent for the empty graph.
    pub normalized_bias: Option<f64>,
}

/// Evaluate both gaps plus the density-normalized bias used to compare
/// weighted estimates against binary truths.
pub fn bias_report(a: &AdjacencyMatrix, groups: &GroupAssignment) -> Result<BiasReport> {
    let dp = delta_dp(a, groups)?;
    let dp_node = delta_dp_node(a, groups)?;
    let n = a.n() as f64;
    let edge_density = a.total_weight() / (n * (n - 1.0));
    let normalized_bias = if edge_density > 0.0 {
        Some(dp / edge_density)
    } else {
        None
    };
    Ok(BiasReport {
        delta_dp: dp,
        delta_dp_node: dp_node,
        edge_density,
        normalized_bias,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GroupAssignment;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn two_groups_of_two() -> GroupAssignment {
        GroupAssignment::new(vec![0, 0, 1, 1], 2).unwrap()
    }

    fn complete(n: usize) -> AdjacencyMatrix {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((i, j));
            }
        }
        AdjacencyMatrix::from_edges(n, &edges).unwrap()
    }

    fn random_adjacency(rng: &mut ChaCha8Rng, n: usize) -> AdjacencyMatrix {
        let mut w = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v: f64 = rng.random::<f64>() * 2.0;
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
        AdjacencyMatrix::new(w).unwrap()
    }

    #[test]
    fn groupwise_gap_within_only_graph() {
        // within rate 1, across rate 0, two ordered pairs
        let a = AdjacencyMatrix::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert_abs_diff_eq!(delta_dp(&a, &two_groups_of_two()).unwrap(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn groupwise_gap_zero_matrix() {
        let a = AdjacencyMatrix::zeros(4);
        assert_eq!(delta_dp(&a, &two_groups_of_two()).unwrap(), 0.0);
    }

    #[test]
    fn groupwise_gap_complete_graph() {
        // within rate 2/2 equals across rate 4/4
        assert_abs_diff_eq!(
            delta_dp(&complete(4), &two_groups_of_two()).unwrap(),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn groupwise_gap_rejects_singleton_group() {
        let a = AdjacencyMatrix::zeros(3);
        let g = GroupAssignment::new(vec![0, 0, 1], 2).unwrap();
        match delta_dp(&a, &g) {
            Err(Error::DegenerateGroup { group: 1, size: 1 }) => {}
            other => panic!("expected degenerate-group error, got {other:?}"),
        }
    }

    #[test]
    fn contrast_matrix_equal_groups() {
        let b = build_b(&two_groups_of_two()).unwrap();
        let expected = DMatrix::from_row_slice(
            2,
            4,
            &[0.5, 0.5, -0.5, -0.5, -0.5, -0.5, 0.5, 0.5],
        );
        assert_eq!(b, expected);
    }

    #[test]
    fn contrast_matrix_singletons() {
        let g = GroupAssignment::new(vec![0, 1], 2).unwrap();
        let b = build_b(&g).unwrap();
        assert_eq!(b, DMatrix::from_row_slice(2, 2, &[1., -1., -1., 1.]));
    }

    #[test]
    fn contrast_matrix_rows_sum_to_zero() {
        let g = GroupAssignment::new(vec![0, 1, 2, 0, 1, 2, 1], 3).unwrap();
        let b = build_b(&g).unwrap();
        for gi in 0..3 {
            assert_abs_diff_eq!(b.row(gi).sum(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn contrast_matrix_rejects_single_group() {
        let g = GroupAssignment::new(vec![0, 0], 1).unwrap();
        assert!(build_b(&g).is_err());
    }

    #[test]
    fn nodewise_gap_zero_matrix() {
        assert_eq!(delta_dp_node(&AdjacencyMatrix::zeros(4), &two_groups_of_two()).unwrap(), 0.0);
    }

    #[test]
    fn nodewise_gap_complete_graph() {
        // per node |1/2 - 2/2| = 0.5, over 4 nodes and 2 group rows
        assert_abs_diff_eq!(
            delta_dp_node(&complete(4), &two_groups_of_two()).unwrap(),
            4.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn nodewise_gap_within_only_graph() {
        let a = AdjacencyMatrix::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert_abs_diff_eq!(
            delta_dp_node(&a, &two_groups_of_two()).unwrap(),
            4.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn report_within_only_graph() {
        let a = AdjacencyMatrix::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let r = bias_report(&a, &two_groups_of_two()).unwrap();
        assert_abs_diff_eq!(r.edge_density, 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.normalized_bias.unwrap(), 6.0, epsilon = 1e-12);
    }

    #[test]
    fn report_complete_graph() {
        let r = bias_report(&complete(4), &two_groups_of_two()).unwrap();
        assert_abs_diff_eq!(r.edge_density, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.normalized_bias.unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn report_zero_graph_flags_undefined_bias() {
        let r = bias_report(&AdjacencyMatrix::zeros(4), &two_groups_of_two()).unwrap();
        assert_eq!(r.edge_density, 0.0);
        assert!(r.normalized_bias.is_none());
    }

    #[test]
    fn normalized_bias_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_adjacency(&mut rng, 6);
        let groups = GroupAssignment::new(vec![0, 0, 0, 1, 1, 1], 2).unwrap();
        let scaled = AdjacencyMatrix::new(a.weights() * 3.5).unwrap();
        let r1 = bias_report(&a, &groups).unwrap();
        let r2 = bias_report(&scaled, &groups).unwrap();
        assert_abs_diff_eq!(
            r1.normalized_bias.unwrap(),
            r2.normalized_bias.unwrap(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn nodewise_gap_matches_paper_expansion() {
        // direct matrix-product evaluation vs the per-node rate expansion
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = 7;
            let a = random_adjacency(&mut rng, n);
            let labels: Vec<usize> = (0..n).map(|i| [0, 1, 2][i % 3]).collect();
            let groups = GroupAssignment::new(labels, 3).unwrap();
            let sizes = groups.group_sizes();
            let w = a.weights();
            let mut expansion = 0.0;
            for i in 0..n {
                for g in 0..3 {
                    let mut term = 0.0;
                    for h in 0..3 {
                        if h == g {
                            continue;
                        }
                        let rate_g: f64 = (0..n)
                            .filter(|&j| groups.label_of(j) == g)
                            .map(|j| w[(i, j)])
                            .sum::<f64>()
                            / sizes[g] as f64;
                        let rate_h: f64 = (0..n)
                            .filter(|&j| groups.label_of(j) == h)
                            .map(|j| w[(i, j)])
                            .sum::<f64>()
                            / sizes[h] as f64;
                        term += rate_g - rate_h;
                    }
                    expansion += term.abs();
                }
            }
            let direct = delta_dp_node(&a, &groups).unwrap();
            assert_abs_diff_eq!(direct, expansion, epsilon = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn gaps_are_positively_homogeneous(
            vals in proptest::collection::vec(0.0f64..2.0, 15),
            c in 0.0f64..4.0,
        ) {
            let mut w = DMatrix::zeros(6, 6);
            let mut k = 0;
            for i in 0..6 {
                for j in (i + 1)..6 {
                    w[(i, j)] = vals[k];
                    w[(j, i)] = vals[k];
                    k += 1;
                }
            }
            let a = AdjacencyMatrix::new(w.clone()).unwrap();
            let ca = AdjacencyMatrix::new(w * c).unwrap();
            let groups = GroupAssignment::new(vec![0, 0, 0, 1, 1, 1], 2).unwrap();
            let dp = delta_dp(&a, &groups).unwrap();
            let dpc = delta_dp(&ca, &groups).unwrap();
            prop_assert!((dpc - c * dp).abs() < 1e-9 * (1.0 + dp));
            let nw = delta_dp_node(&a, &groups).unwrap();
            let nwc = delta_dp_node(&ca, &groups).unwrap();
            prop_assert!((nwc - c * nw).abs() < 1e-9 * (1.0 + nw));
        }

        #[test]
        fn gaps_satisfy_triangle_inequality(
            v1 in proptest::collection::vec(0.0f64..2.0, 15),
            v2 in proptest::collection::vec(0.0f64..2.0, 15),
        ) {
            let build = |vals: &[f64]| {
                let mut w = DMatrix::zeros(6, 6);
                let mut k = 0;
                for i in 0..6 {
                    for j in (i + 1)..6 {
                        w[(i, j)] = vals[k];
                        w[(j, i)] = vals[k];
                        k += 1;
                    }
                }
                w
            };
            let w1 = build(&v1);
            let w2 = build(&v2);
            let groups = GroupAssignment::new(vec![0, 0, 0, 1, 1, 1], 2).unwrap();
            let a1 = AdjacencyMatrix::new(w1.clone()).unwrap();
            let a2 = AdjacencyMatrix::new(w2.clone()).unwrap();
            let sum = AdjacencyMatrix::new(w1 + w2).unwrap();
            let lhs = delta_dp(&sum, &groups).unwrap();
            let rhs = delta_dp(&a1, &groups).unwrap() + delta_dp(&a2, &groups).unwrap();
            prop_assert!(lhs <= rhs + 1e-9);
            let lhs_n = delta_dp_node(&sum, &groups).unwrap();
            let rhs_n = delta_dp_node(&a1, &groups).unwrap() + delta_dp_node(&a2, &groups).unwrap();
            prop_assert!(lhs_n <= rhs_n + 1e-9);
        }

        #[test]
        fn gaps_invariant_under_simultaneous_permutation(
            vals in proptest::collection::vec(0.0f64..2.0, 15),
            seed in 0u64..1000,
        ) {
            let mut w = DMatrix::zeros(6, 6);
            let mut k = 0;
            for i in 0..6 {
                for j in (i + 1)..6 {
                    w[(i, j)] = vals[k];
                    w[(j, i)] = vals[k];
                    k += 1;
                }
            }
            let mut perm: Vec<usize> = (0..6).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            perm.shuffle(&mut rng);
            let mut wp = DMatrix::zeros(6, 6);
            for i in 0..6 {
                for j in 0..6 {
                    wp[(perm[i], perm[j])] = w[(i, j)];
                }
            }
            let labels = vec![0, 0, 0, 1, 1, 1];
            let mut labels_p = vec![0usize; 6];
            for i in 0..6 {
                labels_p[perm[i]] = labels[i];
            }
            let a = AdjacencyMatrix::new(w).unwrap();
            let ap = AdjacencyMatrix::new(wp).unwrap();
            let g = GroupAssignment::new(labels, 2).unwrap();
            let gp = GroupAssignment::new(labels_p, 2).unwrap();
            prop_assert!((delta_dp(&a, &g).unwrap() - delta_dp(&ap, &gp).unwrap()).abs() < 1e-9);
            prop_assert!(
                (delta_dp_node(&a, &g).unwrap() - delta_dp_node(&ap, &gp).unwrap()).abs() < 1e-9
            );
        }
    }
}
