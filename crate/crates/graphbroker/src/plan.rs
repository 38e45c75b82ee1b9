//! Decomposition of a target graph into brokered fragments scheduled in
//! parallel rounds.
//!
//! A plan is a sequence of rounds; within a round every blueprint uses a
//! disjoint set of nodes, so their links can be attempted through the
//! optical multiplexer simultaneously. Across the whole plan each target
//! edge is covered exactly once.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::AdornedGraph;
use crate::timing::StrategyChoice;

/// One fragment to broker and transfer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Blueprint {
    /// A single brokered pair mapping to one client edge.
    Edge { a: usize, b: usize },
    /// A four-broker star fragment mapping to three client edges sharing
    /// `center`.
    Star4 { center: usize, leaves: [usize; 3] },
}

impl Blueprint {
    pub fn nodes(&self) -> Vec<usize> {
        match self {
            Blueprint::Edge { a, b } => vec![*a, *b],
            Blueprint::Star4 { center, leaves } => {
                vec![*center, leaves[0], leaves[1], leaves[2]]
            }
        }
    }

    /// Client edges this fragment adds, as (min, max) pairs.
    pub fn image_edges(&self) -> Vec<(usize, usize)> {
        match self {
            Blueprint::Edge { a, b } => vec![(*a.min(b), *a.max(b))],
            Blueprint::Star4 { center, leaves } => leaves
                .iter()
                .map(|&l| (*center.min(&l), *center.max(&l)))
                .collect(),
        }
    }
}

impl std::fmt::Display for Blueprint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Blueprint::Edge { a, b } => write!(f, "edge({a},{b})"),
            Blueprint::Star4 { center, leaves } => {
                write!(f, "star4(center={center}; {},{},{})", leaves[0], leaves[1], leaves[2])
            }
        }
    }
}

/// Rounds of node-disjoint blueprints covering a target graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildPlan {
    pub n: usize,
    pub rounds: Vec<Vec<Blueprint>>,
    /// The covered target edges, (min, max) ascending.
    pub target_edges: Vec<(usize, usize)>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("round {round} reuses node {node}")]
    NodeReused { round: usize, node: usize },
    #[error("edge ({0}, {1}) covered more than once")]
    EdgeRecovered(usize, usize),
    #[error("edge ({0}, {1}) not covered by any blueprint")]
    EdgeMissing(usize, usize),
    #[error("blueprint references vertex {0} outside the target")]
    VertexOutOfRange(usize),
}

impl BuildPlan {
    pub fn num_blueprints(&self) -> usize {
        self.rounds.iter().map(Vec::len).sum()
    }

    /// Check the structural invariants: rounds are node-disjoint and the
    /// blueprint images cover every target edge exactly once.
    pub fn validate(&self, target: &AdornedGraph) -> Result<(), PlanError> {
        let mut covered = std::collections::BTreeSet::new();
        for (round_idx, round) in self.rounds.iter().enumerate() {
            let mut used = vec![false; self.n];
            for bp in round {
                for node in bp.nodes() {
                    if node >= self.n {
                        return Err(PlanError::VertexOutOfRange(node));
                    }
                    if used[node] {
                        return Err(PlanError::NodeReused {
                            round: round_idx,
                            node,
                        });
                    }
                    used[node] = true;
                }
                for e in bp.image_edges() {
                    if !covered.insert(e) {
                        return Err(PlanError::EdgeRecovered(e.0, e.1));
                    }
                }
            }
        }
        for e in target.edges() {
            if !covered.contains(&e) {
                return Err(PlanError::EdgeMissing(e.0, e.1));
            }
        }
        for e in covered {
            if !target.has_edge(e.0, e.1) {
                return Err(PlanError::EdgeMissing(e.0, e.1));
            }
        }
        Ok(())
    }
}

/// Decompose `target` into rounds of fragments under the given strategy.
///
/// Sequential: first-fit edge coloring, edges in ascending (a, b) order.
/// Star: every vertex of degree exactly three whose edges are all still
/// uncovered becomes a star fragment (vertices scanned ascending), and the
/// remaining edges are colored as in the sequential case. Blueprints are
/// packed into the earliest node-disjoint round, stars first.
pub fn plan_growth(target: &AdornedGraph, strategy: StrategyChoice) -> BuildPlan {
    let n = target.num_vertices();
    let mut blueprints: Vec<Blueprint> = Vec::new();
    let mut covered = vec![vec![false; n]; n];

    if strategy == StrategyChoice::MultipartiteStar {
        for v in 0..n {
            if target.degree(v) != 3 {
                continue;
            }
            let leaves: Vec<usize> = target.neighbors(v).collect();
            if leaves.iter().any(|&l| covered[v][l]) {
                continue;
            }
            for &l in &leaves {
                covered[v][l] = true;
                covered[l][v] = true;
            }
            blueprints.push(Blueprint::Star4 {
                center: v,
                leaves: [leaves[0], leaves[1], leaves[2]],
            });
        }
    }
    for (a, b) in target.edges() {
        if !covered[a][b] {
            covered[a][b] = true;
            covered[b][a] = true;
            blueprints.push(Blueprint::Edge { a, b });
        }
    }

    // First-fit packing into node-disjoint rounds.
    let mut rounds: Vec<Vec<Blueprint>> = Vec::new();
    let mut occupancy: Vec<Vec<bool>> = Vec::new();
    for bp in blueprints {
        let nodes = bp.nodes();
        let slot = (0..rounds.len())
            .find(|&r| nodes.iter().all(|&v| !occupancy[r][v]))
            .unwrap_or_else(|| {
                rounds.push(Vec::new());
                occupancy.push(vec![false; n]);
                rounds.len() - 1
            });
        for &v in &nodes {
            occupancy[slot][v] = true;
        }
        rounds[slot].push(bp);
    }

    BuildPlan {
        n,
        rounds,
        target_edges: target.edges(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SimRng;

    fn graph(n: usize, edges: &[(usize, usize)]) -> AdornedGraph {
        AdornedGraph::from_edges(n, edges).unwrap()
    }

    #[test]
    fn single_edge_is_one_round() {
        let g = graph(2, &[(0, 1)]);
        for strategy in [StrategyChoice::SequentialBipartite, StrategyChoice::MultipartiteStar] {
            let plan = plan_growth(&g, strategy);
            assert_eq!(plan.rounds.len(), 1);
            assert_eq!(plan.rounds[0], vec![Blueprint::Edge { a: 0, b: 1 }]);
            plan.validate(&g).unwrap();
        }
    }

    #[test]
    fn star_target_under_both_strategies() {
        let g = graph(4, &[(0, 1), (0, 2), (0, 3)]);
        let star_plan = plan_growth(&g, StrategyChoice::MultipartiteStar);
        assert_eq!(star_plan.rounds.len(), 1);
        assert_eq!(
            star_plan.rounds[0],
            vec![Blueprint::Star4 {
                center: 0,
                leaves: [1, 2, 3]
            }]
        );
        star_plan.validate(&g).unwrap();

        let seq_plan = plan_growth(&g, StrategyChoice::SequentialBipartite);
        assert_eq!(seq_plan.rounds.len(), 3, "shared centre serializes the edges");
        assert!(seq_plan.rounds.iter().all(|r| r.len() == 1));
        seq_plan.validate(&g).unwrap();
    }

    #[test]
    fn six_cycle_packs_into_two_rounds() {
        let g = graph(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)]);
        let plan = plan_growth(&g, StrategyChoice::SequentialBipartite);
        assert_eq!(plan.rounds.len(), 2);
        assert_eq!(plan.rounds[0].len(), 3);
        assert_eq!(plan.rounds[1].len(), 3);
        plan.validate(&g).unwrap();
    }

    #[test]
    fn degree_three_vertices_become_stars_when_disjoint() {
        // Two disjoint 3-stars.
        let g = graph(8, &[(0, 1), (0, 2), (0, 3), (4, 5), (4, 6), (4, 7)]);
        let plan = plan_growth(&g, StrategyChoice::MultipartiteStar);
        assert_eq!(plan.rounds.len(), 1);
        assert_eq!(plan.rounds[0].len(), 2);
        plan.validate(&g).unwrap();
    }

    #[test]
    fn adjacent_degree_three_vertices_share_edges_once() {
        // 0 and 3 both have degree 3 and share the edge (0, 3): the second
        // star is blocked, its remaining edges fall back to pairs.
        let g = graph(6, &[(0, 1), (0, 2), (0, 3), (3, 4), (3, 5)]);
        let plan = plan_growth(&g, StrategyChoice::MultipartiteStar);
        plan.validate(&g).unwrap();
        let stars = plan
            .rounds
            .iter()
            .flatten()
            .filter(|b| matches!(b, Blueprint::Star4 { .. }))
            .count();
        assert_eq!(stars, 1);
    }

    #[test]
    fn random_graphs_satisfy_plan_invariants() {
        let mut rng = SimRng::new(0xBEEF);
        for _ in 0..300 {
            let n = 2 + rng.gen_range(11) as usize; // up to 12 vertices
            let mut edges = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_bool(0.35) {
                        edges.push((a, b));
                    }
                }
            }
            let g = graph(n, &edges);
            for strategy in
                [StrategyChoice::SequentialBipartite, StrategyChoice::MultipartiteStar]
            {
                let plan = plan_growth(&g, strategy);
                plan.validate(&g).unwrap_or_else(|e| {
                    panic!("invalid plan for n={n}, edges={edges:?}, {strategy:?}: {e}")
                });
            }
        }
    }
}
