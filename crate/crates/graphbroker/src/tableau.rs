//! Exact stabilizer states in tableau form.
//!
//! A state of `n` qubits is identified by `n` commuting, independent Pauli
//! generators (the stabilizer group), each stored as a bit-packed
//! [`PauliString`]. Alongside the stabilizer rows the tableau keeps `n`
//! destabilizer rows forming a symplectic partner basis: destabilizer `i`
//! anticommutes with stabilizer `i` and commutes with every other row. The
//! pairing makes the deterministic branch of a Pauli measurement O(n²) in
//! row operations instead of requiring a fresh rank computation.
//!
//! Clifford gates conjugate every row in place; measurements and parity
//! projections use the standard anticommuting-generator replacement. Views
//! produced by [`StabilizerTableau::restricted`] carry generators only and
//! support the group-level operations (canonicalization, comparison, graph
//! extraction) but not further measurement.

use thiserror::Error;

use crate::clifford::{BasicGate, LocalClifford};
use crate::gf2::BitRow;
use crate::pauli::{Axis, PauliString, Sign};
use crate::rng::OutcomeChooser;

/// Clifford gates understood by the tableau.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Gate {
    H(usize),
    S(usize),
    X(usize),
    Z(usize),
    Cz(usize, usize),
    /// Controlled-NOT; first index is the control.
    Cnot(usize, usize),
}

/// Computational register preparation.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum InitialBasis {
    /// |0...0>, stabilized by {Z_i}.
    AllZero,
    /// |+...+>, stabilized by {X_i}.
    AllPlus,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableauError {
    #[error("register must contain at least one qubit")]
    EmptyRegister,
    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },
    #[error("two-qubit gate requires distinct qubits (got {0})")]
    DuplicateQubit(usize),
    #[error("operator acts on {op} qubits but the state has {n}")]
    SizeMismatch { op: usize, n: usize },
    #[error("operation requires destabilizer rows (generator-only view)")]
    MissingDestabilizers,
    #[error("requested qubits are entangled with the rest of the register")]
    EntangledAcrossCut,
    #[error("projection outcome has probability zero")]
    ImpossibleOutcome,
}

/// Result of a Pauli measurement: the observed eigenvalue and whether the
/// outcome was forced by the state.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct MeasureOutcome {
    pub sign: Sign,
    pub deterministic: bool,
}

#[derive(Clone, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    stabs: Vec<PauliString>,
    destabs: Option<Vec<PauliString>>,
}

impl StabilizerTableau {
    pub fn new(n: usize, basis: InitialBasis) -> Result<Self, TableauError> {
        if n == 0 {
            return Err(TableauError::EmptyRegister);
        }
        let (stab_axis, destab_axis) = match basis {
            InitialBasis::AllZero => (Axis::Z, Axis::X),
            InitialBasis::AllPlus => (Axis::X, Axis::Z),
        };
        let stabs = (0..n).map(|q| PauliString::single(n, q, stab_axis)).collect();
        let destabs = (0..n).map(|q| PauliString::single(n, q, destab_axis)).collect();
        Ok(Self {
            n,
            stabs,
            destabs: Some(destabs),
        })
    }

    pub fn new_zero(n: usize) -> Result<Self, TableauError> {
        Self::new(n, InitialBasis::AllZero)
    }

    pub fn new_plus(n: usize) -> Result<Self, TableauError> {
        Self::new(n, InitialBasis::AllPlus)
    }

    /// Build a generator-only view from explicit stabilizer rows.
    ///
    /// Rows must be independent, pairwise commuting, and hermitian; this is
    /// debug-asserted, not validated, since all callers are internal.
    pub(crate) fn from_generators(n: usize, stabs: Vec<PauliString>) -> Self {
        debug_assert!(stabs.iter().all(|g| g.num_qubits() == n && g.is_hermitian()));
        Self {
            n,
            stabs,
            destabs: None,
        }
    }

    /// Build a generator-only view from an explicit stabilizer list.
    ///
    /// The rows must be pairwise commuting, independent, hermitian
    /// generators of a state's group: this is asserted. The result carries
    /// no destabilizers, so it supports group operations but not
    /// measurement until [`Self::rebuild_destabilizers`] runs.
    pub fn from_stabilizers(stabs: Vec<PauliString>) -> Self {
        assert!(!stabs.is_empty(), "at least one generator required");
        let n = stabs[0].num_qubits();
        assert!(stabs.len() == n, "a state of n qubits has n generators");
        let t = Self::from_generators(n, stabs);
        debug_assert!(t.check_invariants().is_ok());
        t
    }

    /// Build a full tableau from explicit stabilizer and destabilizer rows.
    pub(crate) fn from_parts(
        n: usize,
        stabs: Vec<PauliString>,
        destabs: Vec<PauliString>,
    ) -> Self {
        debug_assert_eq!(stabs.len(), n);
        debug_assert_eq!(destabs.len(), n);
        Self {
            n,
            stabs,
            destabs: Some(destabs),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.stabs
    }

    pub fn has_destabilizers(&self) -> bool {
        self.destabs.is_some()
    }

    fn check_qubit(&self, q: usize) -> Result<(), TableauError> {
        if q < self.n {
            Ok(())
        } else {
            Err(TableauError::QubitOutOfRange { index: q, n: self.n })
        }
    }

    pub fn apply_gate(&mut self, gate: Gate) -> Result<(), TableauError> {
        match gate {
            Gate::H(q) | Gate::S(q) | Gate::X(q) | Gate::Z(q) => self.check_qubit(q)?,
            Gate::Cz(a, b) | Gate::Cnot(a, b) => {
                self.check_qubit(a)?;
                self.check_qubit(b)?;
                if a == b {
                    return Err(TableauError::DuplicateQubit(a));
                }
            }
        }
        self.for_each_row(|row| gate_on_row(row, gate));
        Ok(())
    }

    /// Apply a sequence of gates; panics on invalid indices, for internal use
    /// where indices are constructed in range.
    pub(crate) fn gates(&mut self, gates: &[Gate]) {
        for &g in gates {
            self.apply_gate(g).expect("internally constructed gate indices");
        }
    }

    /// Conjugate the state by a single-qubit Clifford on qubit `q`.
    pub fn apply_local(&mut self, q: usize, c: &LocalClifford) -> Result<(), TableauError> {
        self.check_qubit(q)?;
        for &g in c.decomposition() {
            let gate = match g {
                BasicGate::H => Gate::H(q),
                BasicGate::S => Gate::S(q),
            };
            self.apply_gate(gate)?;
        }
        Ok(())
    }

    fn for_each_row(&mut self, mut f: impl FnMut(&mut PauliString)) {
        for row in &mut self.stabs {
            f(row);
        }
        if let Some(destabs) = &mut self.destabs {
            for row in destabs {
                f(row);
            }
        }
    }

    fn check_operator(&self, op: &PauliString) -> Result<(), TableauError> {
        if op.num_qubits() != self.n {
            return Err(TableauError::SizeMismatch {
                op: op.num_qubits(),
                n: self.n,
            });
        }
        debug_assert!(op.is_hermitian(), "measurement operator must be hermitian");
        Ok(())
    }

    /// Measure a hermitian Pauli operator.
    ///
    /// If ±op is in the stabilizer group the outcome is deterministic and the
    /// state is unchanged; otherwise the chooser supplies the outcome bit and
    /// the group is updated by anticommuting-generator replacement.
    pub fn measure_pauli(
        &mut self,
        op: &PauliString,
        chooser: &mut dyn OutcomeChooser,
    ) -> Result<MeasureOutcome, TableauError> {
        self.check_operator(op)?;
        match self.first_anticommuting_stab(op) {
            Some(pivot) => {
                let sign = Sign::from_bit(chooser.choose_minus());
                self.replace_after_measurement(op, pivot, sign)?;
                Ok(MeasureOutcome {
                    sign,
                    deterministic: false,
                })
            }
            None => {
                let sign = self.deterministic_sign(op)?;
                Ok(MeasureOutcome {
                    sign,
                    deterministic: true,
                })
            }
        }
    }

    /// Project onto the `desired` eigenspace of a hermitian Pauli.
    ///
    /// Fails iff the opposite outcome is certain, i.e. −desired·op is in the
    /// stabilizer group.
    pub fn project_onto(
        &mut self,
        op: &PauliString,
        desired: Sign,
    ) -> Result<(), TableauError> {
        self.check_operator(op)?;
        match self.first_anticommuting_stab(op) {
            Some(pivot) => {
                self.replace_after_measurement(op, pivot, desired)?;
                Ok(())
            }
            None => {
                if self.deterministic_sign(op)? == desired {
                    Ok(())
                } else {
                    Err(TableauError::ImpossibleOutcome)
                }
            }
        }
    }

    /// Outcome sign if measuring `op` would be deterministic, without
    /// touching the state.
    pub fn peek_deterministic(&self, op: &PauliString) -> Result<Option<Sign>, TableauError> {
        self.check_operator(op)?;
        if self.first_anticommuting_stab(op).is_some() {
            Ok(None)
        } else {
            Ok(Some(self.deterministic_sign(op)?))
        }
    }

    fn first_anticommuting_stab(&self, op: &PauliString) -> Option<usize> {
        self.stabs.iter().position(|g| !g.commutes_with(op))
    }

    fn replace_after_measurement(
        &mut self,
        op: &PauliString,
        pivot: usize,
        sign: Sign,
    ) -> Result<(), TableauError> {
        let destabs = self
            .destabs
            .as_mut()
            .ok_or(TableauError::MissingDestabilizers)?;
        let old_pivot = self.stabs[pivot].clone();
        for (i, row) in self.stabs.iter_mut().enumerate() {
            if i != pivot && !row.commutes_with(op) {
                *row = row.mul(&old_pivot);
            }
        }
        for row in destabs.iter_mut() {
            if !row.commutes_with(op) {
                *row = row.mul(&old_pivot);
            }
        }
        destabs[pivot] = old_pivot;
        let mut new_gen = op.clone();
        if sign == Sign::Minus {
            new_gen.negate();
        }
        self.stabs[pivot] = new_gen;
        Ok(())
    }

    /// For an operator commuting with the whole group, find the sign s with
    /// s·op in the group via the destabilizer pairing.
    fn deterministic_sign(&self, op: &PauliString) -> Result<Sign, TableauError> {
        let destabs = self
            .destabs
            .as_ref()
            .ok_or(TableauError::MissingDestabilizers)?;
        let mut acc = PauliString::identity(self.n);
        for (destab, stab) in destabs.iter().zip(&self.stabs) {
            if !destab.commutes_with(op) {
                acc = acc.mul(stab);
            }
        }
        debug_assert_eq!(acc.x_bits(), op.x_bits(), "operator not in the group");
        debug_assert_eq!(acc.z_bits(), op.z_bits(), "operator not in the group");
        let diff = acc.phase().wrapping_sub(op.phase()) & 3;
        debug_assert!(diff == 0 || diff == 2);
        Ok(Sign::from_bit(diff == 2))
    }

    /// Canonical generator set: Gaussian elimination over the 2n bit columns
    /// (X block first, then Z block), phases tracked through row products.
    /// Two tableaus generate the same signed group iff their canonical rows
    /// are identical.
    pub fn canonical_generators(&self) -> Vec<PauliString> {
        let mut rows = self.stabs.clone();
        let n = self.n;
        let bit = |row: &PauliString, col: usize| {
            if col < n {
                row.x_bit(col)
            } else {
                row.z_bit(col - n)
            }
        };
        let mut rank = 0;
        for col in 0..2 * n {
            let Some(pivot) = (rank..rows.len()).find(|&r| bit(&rows[r], col)) else {
                continue;
            };
            rows.swap(rank, pivot);
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && bit(row, col) {
                    *row = row.mul(&pivot_row);
                }
            }
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rows
    }

    /// True iff both generator sets generate the same signed Pauli group.
    pub fn groups_equal(&self, other: &Self) -> bool {
        self.n == other.n && self.canonical_generators() == other.canonical_generators()
    }

    /// Stable byte encoding of the canonical generators, for snapshots.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for row in self.canonical_generators() {
            for w in row.x_bits().words() {
                out.extend_from_slice(&w.to_le_bytes());
            }
            for w in row.z_bits().words() {
                out.extend_from_slice(&w.to_le_bytes());
            }
            out.push(row.phase());
        }
        out
    }

    /// The subgroup supported on `keep`, re-indexed to those qubits in order.
    ///
    /// Succeeds iff the kept qubits are unentangled with the rest, i.e. the
    /// supported subgroup has full rank on the subset. The result is a
    /// generator-only view.
    pub fn restricted(&self, keep: &[usize]) -> Result<Self, TableauError> {
        for &q in keep {
            self.check_qubit(q)?;
        }
        let mut keep_mask = vec![false; self.n];
        for &q in keep {
            keep_mask[q] = true;
        }
        // Eliminate complement columns first so rows supported on `keep`
        // accumulate at the bottom.
        let mut rows = self.stabs.clone();
        let complement: Vec<usize> = (0..self.n).filter(|&q| !keep_mask[q]).collect();
        let m = complement.len();
        let bit = |row: &PauliString, col: usize| {
            if col < m {
                row.x_bit(complement[col])
            } else {
                row.z_bit(complement[col - m])
            }
        };
        let mut rank = 0;
        for col in 0..2 * m {
            let Some(pivot) = (rank..rows.len()).find(|&r| bit(&rows[r], col)) else {
                continue;
            };
            rows.swap(rank, pivot);
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && bit(row, col) {
                    *row = row.mul(&pivot_row);
                }
            }
            rank += 1;
        }
        let supported: Vec<PauliString> = rows[rank..]
            .iter()
            .filter(|row| row.supported_on(&keep_mask))
            .cloned()
            .collect();
        if supported.len() != keep.len() {
            return Err(TableauError::EntangledAcrossCut);
        }
        let gathered = supported
            .iter()
            .map(|row| row.gather_qubits(keep))
            .collect();
        Ok(Self::from_generators(keep.len(), gathered))
    }

    /// Rebuild destabilizer rows for a generator-only view by completing a
    /// symplectic basis. Used when a restricted state needs measurement.
    pub fn rebuild_destabilizers(&mut self) {
        let n = self.n;
        let mut destabs: Vec<PauliString> = Vec::with_capacity(n);
        // Candidate single-qubit Paulis plus reduction keeps this simple:
        // for stabilizer i, find a Pauli anticommuting with stab i and
        // commuting with all other stabs and the destabs found so far, by
        // Gaussian elimination over the symplectic constraints.
        for i in 0..n {
            let mut cand = solve_symplectic_partner(&self.stabs, i);
            // Make candidate commute with previously fixed destabilizers by
            // multiplying with stabilizers (which never changes the pairing
            // against stabs).
            for (j, d) in destabs.iter().enumerate() {
                if !cand.commutes_with(d) {
                    cand = cand.mul(&self.stabs[j]);
                }
            }
            destabs.push(cand);
        }
        self.destabs = Some(destabs);
    }

    /// Check the structural invariants: pairwise commuting generators of full
    /// rank, hermitian rows, and (when present) the destabilizer pairing.
    pub fn check_invariants(&self) -> Result<(), String> {
        for (i, a) in self.stabs.iter().enumerate() {
            if !a.is_hermitian() {
                return Err(format!("generator {i} is not hermitian: {a}"));
            }
            for (j, b) in self.stabs.iter().enumerate().skip(i + 1) {
                if !a.commutes_with(b) {
                    return Err(format!("generators {i} and {j} anticommute"));
                }
            }
        }
        let canon = self.canonical_generators();
        for (i, row) in canon.iter().enumerate() {
            if row.is_identity() {
                if row.phase() != 0 {
                    return Err(format!("-I in the group (row {i})"));
                }
                return Err(format!("generators are dependent (row {i} reduces to I)"));
            }
        }
        if let Some(destabs) = &self.destabs {
            for (i, d) in destabs.iter().enumerate() {
                for (j, s) in self.stabs.iter().enumerate() {
                    let anti = !d.commutes_with(s);
                    if anti != (i == j) {
                        return Err(format!("destabilizer {i} pairing broken against stabilizer {j}"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Conjugate a single Pauli row by a Clifford gate, in place.
///
/// Rows store `i^phase X^x Z^z`; with that ordering the basis images
/// (H: X<->Z, S: X->iXZ, CZ: X_a->X_a Z_b, CNOT: X_c->X_c X_t, Z_t->Z_c Z_t)
/// reduce to bit flips plus the phase increments below.
pub(crate) fn gate_on_row(row: &mut PauliString, gate: Gate) {
    match gate {
        Gate::H(q) => {
            let xq = row.x_bit(q);
            let zq = row.z_bit(q);
            if xq && zq {
                row.add_phase(2);
            }
            row.set_x_bit(q, zq);
            row.set_z_bit(q, xq);
        }
        Gate::S(q) => {
            if row.x_bit(q) {
                row.add_phase(1);
                row.flip_z_bit(q);
            }
        }
        Gate::X(q) => {
            if row.z_bit(q) {
                row.add_phase(2);
            }
        }
        Gate::Z(q) => {
            if row.x_bit(q) {
                row.add_phase(2);
            }
        }
        Gate::Cz(a, b) => {
            let xa = row.x_bit(a);
            let xb = row.x_bit(b);
            if xa && xb {
                row.add_phase(2);
            }
            if xb {
                row.flip_z_bit(a);
            }
            if xa {
                row.flip_z_bit(b);
            }
        }
        Gate::Cnot(c, t) => {
            if row.x_bit(c) {
                row.flip_x_bit(t);
            }
            if row.z_bit(t) {
                row.flip_z_bit(c);
            }
        }
    }
}

/// Find a Pauli anticommuting with `stabs[target]` and commuting with every
/// other row, by solving the symplectic linear system over GF(2).
fn solve_symplectic_partner(stabs: &[PauliString], target: usize) -> PauliString {
    let n = stabs[0].num_qubits();
    // Unknown vector v = (x | z) of length 2n; constraint per stabilizer s:
    // <s_x, v_z> + <s_z, v_x> = delta(target). Build the augmented system.
    let mut matrix: Vec<(BitRow, bool)> = stabs
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut row = BitRow::zeros(2 * n);
            for q in 0..n {
                // coefficient of v_x[q] is s_z[q]; of v_z[q] is s_x[q]
                if s.z_bit(q) {
                    row.set(q, true);
                }
                if s.x_bit(q) {
                    row.set(n + q, true);
                }
            }
            (row, i == target)
        })
        .collect();
    // Gaussian elimination to row echelon, then back-substitute with free
    // variables set to zero.
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, col)
    let mut rank = 0;
    for col in 0..2 * n {
        let Some(pr) = (rank..matrix.len()).find(|&r| matrix[r].0.get(col)) else {
            continue;
        };
        matrix.swap(rank, pr);
        let (prow, prhs) = matrix[rank].clone();
        for (r, (row, rhs)) in matrix.iter_mut().enumerate() {
            if r != rank && row.get(col) {
                row.xor_assign(&prow);
                *rhs ^= prhs;
            }
        }
        pivots.push((rank, col));
        rank += 1;
        if rank == matrix.len() {
            break;
        }
    }
    let mut v = BitRow::zeros(2 * n);
    for &(row, col) in &pivots {
        if matrix[row].1 {
            v.set(col, true);
        }
    }
    let mut p = PauliString::identity(n);
    for q in 0..n {
        let x = v.get(q);
        let z = v.get(n + q);
        match (x, z) {
            (true, false) => p = p.mul(&PauliString::single(n, q, Axis::X)),
            (false, true) => p = p.mul(&PauliString::single(n, q, Axis::Z)),
            (true, true) => p = p.mul(&PauliString::single(n, q, Axis::Y)),
            (false, false) => {}
        }
    }
    p
}

impl std::fmt::Debug for StabilizerTableau {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "StabilizerTableau(n={})", self.n)?;
        for row in &self.stabs {
            writeln!(f, "  {row}")?;
        }
        Ok(())
    }
}
