//! Synthetic two-community graphs with a controlled across-group edge
//! ratio, and group labelings for the label studies.
//!
//! The generator first draws one connected Erdos-Renyi graph per group and
//! then rewires a prescribed fraction of within-group edges: one endpoint
//! of each selected edge moves to a uniformly chosen node of the other
//! group. Every rewire converts exactly one within-group edge into an
//! across-group edge and rejects duplicates, so the total edge count is
//! invariant along the whole ratio sweep and the across-group edge count is
//! exactly `ceil(ratio * |E|)`.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{AdjacencyMatrix, GroupAssignment};

const CONNECT_RESAMPLES: usize = 1000;
const REWIRE_RESAMPLES: usize = 1000;

/// Parameters of the rewiring generator.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RewireSpec {
    /// Node count; must be even so the two groups have equal size.
    pub n: usize,
    /// Edge probability of the per-group Erdos-Renyi draw.
    pub p: f64,
    /// Fraction of edges to move across groups, in [0, 1].
    pub across_ratio: f64,
    pub seed: u64,
}

impl Default for RewireSpec {
    fn default() -> Self {
        Self {
            n: 30,
            p: 0.3,
            across_ratio: 0.0,
            seed: 0,
        }
    }
}

fn er_connected(nodes: &[usize], p: f64, rng: &mut ChaCha8Rng) -> Result<Vec<(usize, usize)>> {
    for _ in 0..CONNECT_RESAMPLES {
        let mut edges = Vec::new();
        for (ai, &a) in nodes.iter().enumerate() {
            for &b in nodes.iter().skip(ai + 1) {
                if rng.random::<f64>() < p {
                    edges.push((a, b));
                }
            }
        }
        if is_connected(nodes, &edges) {
            return Ok(edges);
        }
    }
    Err(Error::Generator(format!(
        "could not draw a connected group of {} nodes at p = {p} within {CONNECT_RESAMPLES} attempts",
        nodes.len()
    )))
}

fn is_connected(nodes: &[usize], edges: &[(usize, usize)]) -> bool {
    if nodes.is_empty() {
        return true;
    }
    let index_of = |v: usize| nodes.iter().position(|&x| x == v).unwrap();
    let mut adj = vec![Vec::new(); nodes.len()];
    for &(a, b) in edges {
        let (ia, ib) = (index_of(a), index_of(b));
        adj[ia].push(ib);
        adj[ib].push(ia);
    }
    let mut seen = vec![false; nodes.len()];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == nodes.len()
}

/// Draw the two-community graph and its community labeling.
///
/// Nodes `0..n/2` form group 0, the rest group 1. Fails explicitly when the
/// edge probability cannot produce connected groups or when rewiring runs
/// out of duplicate-free moves.
pub fn generate_two_group_graph(spec: &RewireSpec) -> Result<(AdjacencyMatrix, GroupAssignment)> {
    if spec.n < 4 || spec.n % 2 != 0 {
        return Err(Error::Generator(format!(
            "need an even node count of at least 4, got {}",
            spec.n
        )));
    }
    if !(0.0..=1.0).contains(&spec.across_ratio) {
        return Err(Error::Generator(format!(
            "across ratio {} outside [0, 1]",
            spec.across_ratio
        )));
    }
    if !(0.0..=1.0).contains(&spec.p) {
        return Err(Error::Generator(format!("edge probability {} outside [0, 1]", spec.p)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let half = spec.n / 2;
    let group0: Vec<usize> = (0..half).collect();
    let group1: Vec<usize> = (half..spec.n).collect();

    let mut edges = er_connected(&group0, spec.p, &mut rng)?;
    edges.extend(er_connected(&group1, spec.p, &mut rng)?);
    let total = edges.len();
    let to_move = (spec.across_ratio * total as f64).ceil() as usize;

    let mut exists = vec![vec![false; spec.n]; spec.n];
    for &(a, b) in &edges {
        exists[a][b] = true;
        exists[b][a] = true;
    }

    // choose the within-group edges to move by a partial shuffle
    let mut order: Vec<usize> = (0..total).collect();
    for k in 0..to_move.min(total) {
        let pick = rng.random_range(k..total);
        order.swap(k, pick);
    }
    if to_move > total {
        return Err(Error::Generator(format!(
            "cannot move {to_move} of {total} edges"
        )));
    }

    for &edge_idx in order.iter().take(to_move) {
        let (a, b) = edges[edge_idx];
        let mut placed = false;
        for _ in 0..REWIRE_RESAMPLES {
            // keep one endpoint, send the other across
            let keep = if rng.random::<bool>() { a } else { b };
            let target_group = if keep < half { &group1 } else { &group0 };
            let target = target_group[rng.random_range(0..target_group.len())];
            if exists[keep][target] {
                continue;
            }
            exists[a][b] = false;
            exists[b][a] = false;
            exists[keep][target] = true;
            exists[target][keep] = true;
            edges[edge_idx] = (keep, target);
            placed = true;
            break;
        }
        if !placed {
            return Err(Error::Generator(format!(
                "no duplicate-free rewire for edge ({a},{b}) within {REWIRE_RESAMPLES} attempts"
            )));
        }
    }

    let graph = AdjacencyMatrix::from_edges(spec.n, &edges)?;
    let labels: Vec<usize> = (0..spec.n).map(|v| usize::from(v >= half)).collect();
    let groups = GroupAssignment::new(labels, 2)?;
    Ok((graph, groups))
}

/// How nodes are assigned to groups in the label studies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupMode {
    /// Balanced uniformly random labeling.
    Uniform,
    /// Labels equal the given community ids.
    ByCommunity(Vec<usize>),
}

/// Produce a group assignment for `n` nodes.
pub fn assign_groups(n: usize, g_count: usize, mode: &GroupMode, seed: u64) -> Result<GroupAssignment> {
    match mode {
        GroupMode::ByCommunity(communities) => {
            if communities.len() != n {
                return Err(Error::InvalidGroups(format!(
                    "community partition covers {} nodes, expected {n}",
                    communities.len()
                )));
            }
            let found = communities.iter().copied().max().map_or(0, |m| m + 1);
            if found != g_count {
                return Err(Error::InvalidGroups(format!(
                    "partition has {found} blocks, expected {g_count}"
                )));
            }
            GroupAssignment::new(communities.clone(), g_count)
        }
        GroupMode::Uniform => {
            if g_count == 0 || n < g_count {
                return Err(Error::InvalidGroups(format!(
                    "cannot split {n} nodes into {g_count} nonempty groups"
                )));
            }
            // balanced: group sizes differ by at most one
            let mut labels: Vec<usize> = (0..n).map(|i| i % g_count).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            labels.shuffle(&mut rng);
            GroupAssignment::new(labels, g_count)
        }
    }
}

/// Count edges with endpoints in different groups.
pub fn across_group_edges(a: &AdjacencyMatrix, groups: &GroupAssignment) -> usize {
    let w = a.weights();
    let mut count = 0;
    for i in 0..a.n() {
        for j in (i + 1)..a.n() {
            if w[(i, j)] != 0.0 && groups.label_of(i) != groups.label_of(j) {
                count += 1;
            }
        }
    }
    count
}

/// Count all edges.
pub fn edge_count(a: &AdjacencyMatrix) -> usize {
    let w = a.weights();
    let mut count = 0;
    for i in 0..a.n() {
        for j in (i + 1)..a.n() {
            if w[(i, j)] != 0.0 {
                count += 1;
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::bias_report;

    #[test]
    fn zero_ratio_keeps_groups_separate() {
        let spec = RewireSpec {
            across_ratio: 0.0,
            seed: 5,
            ..RewireSpec::default()
        };
        let (a, groups) = generate_two_group_graph(&spec).unwrap();
        assert_eq!(across_group_edges(&a, &groups), 0);
    }

    #[test]
    fn half_ratio_moves_exactly_half() {
        let spec = RewireSpec {
            across_ratio: 0.5,
            seed: 9,
            ..RewireSpec::default()
        };
        let (a, groups) = generate_two_group_graph(&spec).unwrap();
        let total = edge_count(&a);
        assert_eq!(across_group_edges(&a, &groups), total.div_ceil(2));
    }

    #[test]
    fn edge_count_is_invariant_over_the_sweep() {
        let mut counts = Vec::new();
        for ratio in [0.0, 0.125, 0.25, 0.5, 0.75, 0.875, 1.0] {
            let spec = RewireSpec {
                across_ratio: ratio,
                seed: 33,
                ..RewireSpec::default()
            };
            let (a, groups) = generate_two_group_graph(&spec).unwrap();
            counts.push(edge_count(&a));
            assert_eq!(
                across_group_edges(&a, &groups),
                (ratio * counts[0] as f64).ceil() as usize
            );
        }
        assert!(counts.iter().all(|&c| c == counts[0]));
    }

    #[test]
    fn truth_bias_dips_at_balanced_ratio() {
        // averaged over seeds, the normalized groupwise gap of the truth is
        // smallest near a ratio of one half
        let ratios = [0.125, 0.5, 0.875];
        let mut means = Vec::new();
        for &ratio in &ratios {
            let mut sum = 0.0;
            for seed in 0..20 {
                let spec = RewireSpec {
                    across_ratio: ratio,
                    seed,
                    ..RewireSpec::default()
                };
                let (a, groups) = generate_two_group_graph(&spec).unwrap();
                sum += bias_report(&a, &groups).unwrap().normalized_bias.unwrap();
            }
            means.push(sum / 20.0);
        }
        assert!(means[1] < means[0], "{means:?}");
        assert!(means[1] < means[2], "{means:?}");
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = RewireSpec {
            across_ratio: 0.3,
            seed: 77,
            ..RewireSpec::default()
        };
        let (a1, g1) = generate_two_group_graph(&spec).unwrap();
        let (a2, g2) = generate_two_group_graph(&spec).unwrap();
        assert_eq!(a1.weights(), a2.weights());
        assert_eq!(g1.labels(), g2.labels());
    }

    #[test]
    fn odd_node_count_rejected() {
        let spec = RewireSpec {
            n: 7,
            ..RewireSpec::default()
        };
        assert!(generate_two_group_graph(&spec).is_err());
    }

    #[test]
    fn hopeless_probability_fails_explicitly() {
        let spec = RewireSpec {
            p: 0.0,
            n: 10,
            ..RewireSpec::default()
        };
        match generate_two_group_graph(&spec) {
            Err(Error::Generator(_)) => {}
            other => panic!("expected generator failure, got {other:?}"),
        }
    }

    #[test]
    fn community_labels_pass_through() {
        let communities = vec![0, 0, 1, 1, 0, 1];
        let g = assign_groups(6, 2, &GroupMode::ByCommunity(communities.clone()), 0).unwrap();
        assert_eq!(g.labels(), communities.as_slice());
        assert!(assign_groups(5, 2, &GroupMode::ByCommunity(communities), 0).is_err());
    }

    #[test]
    fn uniform_labels_are_balanced_and_seeded() {
        let g1 = assign_groups(30, 2, &GroupMode::Uniform, 4).unwrap();
        let g2 = assign_groups(30, 2, &GroupMode::Uniform, 4).unwrap();
        assert_eq!(g1.labels(), g2.labels());
        assert_eq!(g1.group_sizes(), vec![15, 15]);
        let g3 = assign_groups(30, 2, &GroupMode::Uniform, 5).unwrap();
        assert_ne!(g1.labels(), g3.labels());
    }

    #[test]
    fn uniform_relabeling_reduces_truth_bias_on_unfair_graphs() {
        // community labels mark the construction bias; random labels hide it
        let mut wins = 0;
        for seed in 0..100 {
            let spec = RewireSpec {
                across_ratio: 0.2,
                seed,
                ..RewireSpec::default()
            };
            let (a, communities) = generate_two_group_graph(&spec).unwrap();
            let uniform = assign_groups(30, 2, &GroupMode::Uniform, seed + 1000).unwrap();
            let unfair = crate::fairness::delta_dp(&a, &communities).unwrap();
            let fair = crate::fairness::delta_dp(&a, &uniform).unwrap();
            if fair < unfair {
                wins += 1;
            }
        }
        assert!(wins >= 95, "uniform labels won only {wins}/100 seeds");
    }
}
