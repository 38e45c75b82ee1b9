//! Graph states up to local Cliffords.
//!
//! An [`AdornedGraph`] is a simple undirected graph plus one single-qubit
//! Clifford per vertex. It describes the state obtained by preparing every
//! vertex in |+>, applying a CZ per edge, and then applying the per-vertex
//! byproducts. Every stabilizer state is of this form, and
//! [`StabilizerTableau::extract_graph`] recovers one such description
//! deterministically.

use thiserror::Error;

use crate::clifford::{BasicGate, LocalClifford};
use crate::gf2::BitRow;
use crate::pauli::{Axis, PauliString};
use crate::tableau::{gate_on_row, Gate, StabilizerTableau};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph must contain at least one vertex")]
    EmptyGraph,
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
}

/// Simple undirected graph with a local-Clifford byproduct per vertex.
#[derive(Clone, PartialEq, Eq)]
pub struct AdornedGraph {
    n: usize,
    adj: Vec<BitRow>,
    byproducts: Vec<LocalClifford>,
}

impl AdornedGraph {
    /// Edgeless graph on `n` vertices with identity byproducts.
    pub fn empty(n: usize) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::EmptyGraph);
        }
        Ok(Self {
            n,
            adj: (0..n).map(|_| BitRow::zeros(n)).collect(),
            byproducts: vec![LocalClifford::identity(); n],
        })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Self::empty(n)?;
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<(), GraphError> {
        if a >= self.n {
            return Err(GraphError::VertexOutOfRange(a));
        }
        if b >= self.n {
            return Err(GraphError::VertexOutOfRange(b));
        }
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        if self.adj[a].get(b) {
            return Err(GraphError::DuplicateEdge(a.min(b), a.max(b)));
        }
        self.adj[a].set(b, true);
        self.adj[b].set(a, true);
        Ok(())
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].get(b)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter_ones()
    }

    /// Edges as (a, b) with a < b, ascending.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in self.adj[a].iter_ones() {
                if a < b {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn num_edges(&self) -> usize {
        self.edges().len()
    }

    pub fn byproduct(&self, v: usize) -> &LocalClifford {
        &self.byproducts[v]
    }

    pub fn set_byproduct(&mut self, v: usize, c: LocalClifford) {
        self.byproducts[v] = c;
    }

    pub fn byproducts_identity(&self) -> bool {
        self.byproducts.iter().all(|c| c.is_identity())
    }

    /// Same adjacency, ignoring byproducts.
    pub fn same_adjacency(&self, other: &Self) -> bool {
        self.n == other.n && self.adj == other.adj
    }

    /// The stabilizer tableau of the adorned state: generators
    /// X_a prod_{b in N(a)} Z_b conjugated by the byproducts. Includes
    /// destabilizer rows (Z_a, conjugated alike).
    pub fn to_tableau(&self) -> StabilizerTableau {
        let n = self.n;
        let stabs: Vec<PauliString> = (0..n)
            .map(|a| {
                let mut ops = vec![(a, Axis::X)];
                ops.extend(self.adj[a].iter_ones().map(|b| (b, Axis::Z)));
                PauliString::from_ops(n, &ops)
            })
            .collect();
        let destabs: Vec<PauliString> =
            (0..n).map(|a| PauliString::single(n, a, Axis::Z)).collect();
        let mut t = StabilizerTableau::from_parts(n, stabs, destabs);
        for (v, c) in self.byproducts.iter().enumerate() {
            t.apply_local(v, c).expect("vertex in range");
        }
        t
    }
}

impl std::fmt::Debug for AdornedGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "AdornedGraph(n={}, edges={:?}", self.n, self.edges())?;
        if !self.byproducts_identity() {
            write!(f, ", adorned")?;
        }
        write!(f, ")")
    }
}

impl StabilizerTableau {
    /// Decompose the state as per-vertex local Cliffords applied to a graph
    /// state: self = (prod_v C_v) |G>, returning G with byproducts C_v.
    ///
    /// Deterministic: columns are eliminated in ascending qubit order, a
    /// Hadamard is inserted on the lowest usable column whenever the X block
    /// lacks a pivot, S clears the Z diagonal, and Z fixes generator signs.
    pub fn extract_graph(&self) -> AdornedGraph {
        let n = self.num_qubits();
        let mut rows: Vec<PauliString> = self.generators().to_vec();
        let mut words: Vec<Vec<BasicGate>> = vec![Vec::new(); n];
        let apply = |rows: &mut Vec<PauliString>, words: &mut Vec<Vec<BasicGate>>, q: usize, g: BasicGate| {
            let gate = match g {
                BasicGate::H => Gate::H(q),
                BasicGate::S => Gate::S(q),
            };
            for row in rows.iter_mut() {
                gate_on_row(row, gate);
            }
            words[q].push(g);
        };

        // Raise the X block to full rank, adding Hadamards where needed.
        let mut guard = 0;
        loop {
            let pivots = rref_x_block(&mut rows, n);
            if pivots.len() == n {
                break;
            }
            let pure_z = &rows[pivots.len()];
            let j = pure_z
                .z_bits()
                .iter_ones()
                .find(|c| !pivots.contains(c))
                .expect("independent pure-Z row has support off the pivot columns");
            apply(&mut rows, &mut words, j, BasicGate::H);
            guard += 1;
            assert!(guard <= n, "graph extraction failed to converge");
        }

        // X block is now the identity; the Z block is symmetric. Clear the
        // diagonal with S and the signs with Z = S,S.
        for i in 0..n {
            debug_assert!(rows[i].x_bit(i));
            if rows[i].z_bit(i) {
                apply(&mut rows, &mut words, i, BasicGate::S);
            }
        }
        for i in 0..n {
            debug_assert_eq!(rows[i].phase() & 1, 0);
            if rows[i].phase() == 2 {
                apply(&mut rows, &mut words, i, BasicGate::S);
                apply(&mut rows, &mut words, i, BasicGate::S);
            }
        }

        let mut graph = AdornedGraph::empty(n).expect("n >= 1");
        for i in 0..n {
            debug_assert_eq!(rows[i].phase(), 0);
            for j in rows[i].z_bits().iter_ones() {
                debug_assert_ne!(i, j, "Z diagonal should be clear");
                debug_assert!(rows[j].z_bit(i), "Z block must be symmetric");
                if i < j {
                    graph.add_edge(i, j).expect("valid extraction edge");
                }
            }
            graph.set_byproduct(i, LocalClifford::from_gates(&words[i]).inverse());
        }
        graph
    }
}

/// Reduced row echelon over the X block only, columns ascending. Returns the
/// pivot columns; rows are reordered so pivot rows come first in column
/// order, with X-free rows at the bottom.
fn rref_x_block(rows: &mut [PauliString], n: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..n {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r].x_bit(col)) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row.x_bit(col) {
                *row = row.mul(&pivot_row);
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    pivots
}
