//! The single-qubit Clifford group (24 elements), used for per-vertex
//! corrections on adorned graphs and for byproduct accounting.
//!
//! An element is stored by its conjugation action on X and Z: two signed
//! single-qubit Paulis that anticommute. Composition, inversion, and
//! decomposition into H/S gate words are derived from that action alone.

use std::sync::OnceLock;

use crate::pauli::{Axis, PauliString, Sign};

/// One-qubit gates sufficient to generate the single-qubit Clifford group.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum BasicGate {
    H,
    S,
}

/// A single-qubit Clifford, represented by the images of X and Z under
/// conjugation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LocalClifford {
    x_image: PauliString, // 1-qubit, hermitian, non-identity
    z_image: PauliString,
}

impl LocalClifford {
    pub fn identity() -> Self {
        Self {
            x_image: PauliString::single(1, 0, Axis::X),
            z_image: PauliString::single(1, 0, Axis::Z),
        }
    }

    pub fn hadamard() -> Self {
        Self {
            x_image: PauliString::single(1, 0, Axis::Z),
            z_image: PauliString::single(1, 0, Axis::X),
        }
    }

    /// The S gate (phase gate): X -> Y, Z -> Z.
    pub fn phase_s() -> Self {
        Self {
            x_image: PauliString::single(1, 0, Axis::Y),
            z_image: PauliString::single(1, 0, Axis::Z),
        }
    }

    pub fn pauli_x() -> Self {
        Self {
            x_image: PauliString::single(1, 0, Axis::X),
            z_image: PauliString::single(1, 0, Axis::Z).negated(),
        }
    }

    pub fn pauli_z() -> Self {
        Self {
            x_image: PauliString::single(1, 0, Axis::X).negated(),
            z_image: PauliString::single(1, 0, Axis::Z),
        }
    }

    pub fn from_basic(gate: BasicGate) -> Self {
        match gate {
            BasicGate::H => Self::hadamard(),
            BasicGate::S => Self::phase_s(),
        }
    }

    /// Compose a word of gates applied left to right.
    pub fn from_gates(gates: &[BasicGate]) -> Self {
        gates
            .iter()
            .fold(Self::identity(), |c, &g| c.then(&Self::from_basic(g)))
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    /// True for the four diagonal Cliffords {I, S, Z, S^3}: Z maps to +Z.
    pub fn is_z_diagonal(&self) -> bool {
        self.z_image == PauliString::single(1, 0, Axis::Z)
    }

    /// Conjugate an arbitrary signed single-qubit Pauli through this Clifford.
    pub fn image_of(&self, p: &PauliString) -> PauliString {
        debug_assert_eq!(p.num_qubits(), 1);
        let mut out = PauliString::identity(1);
        out.set_phase(p.phase());
        if p.x_bit(0) {
            out = out.mul(&self.x_image);
        }
        if p.z_bit(0) {
            out = out.mul(&self.z_image);
        }
        out
    }

    /// Image of a bare axis, as (axis, sign).
    pub fn image_of_axis(&self, axis: Axis) -> (Axis, Sign) {
        let img = self.image_of(&PauliString::single(1, 0, axis));
        (img.axis_at(0).expect("clifford image is non-identity"), img.sign())
    }

    /// Sequential composition: apply `self` first, then `next`.
    pub fn then(&self, next: &Self) -> Self {
        Self {
            x_image: next.image_of(&self.x_image),
            z_image: next.image_of(&self.z_image),
        }
    }

    pub fn inverse(&self) -> Self {
        // Invert the axis map directly: if self sends X to s·P then the
        // inverse sends P to s·X, and likewise for Z.
        let mut inv_images: [Option<PauliString>; 3] = [None, None, None];
        for (src, img) in [(Axis::X, &self.x_image), (Axis::Z, &self.z_image)] {
            let axis = img.axis_at(0).expect("non-identity image");
            let mut back = PauliString::single(1, 0, src);
            if img.sign() == Sign::Minus {
                back.negate();
            }
            inv_images[axis_index(axis)] = Some(back);
        }
        // The remaining axis image follows from Y = i X Z.
        let y = self.image_of(&PauliString::single(1, 0, Axis::Y));
        let y_axis = y.axis_at(0).expect("non-identity image");
        let mut back = PauliString::single(1, 0, Axis::Y);
        if y.sign() == Sign::Minus {
            back.negate();
        }
        inv_images[axis_index(y_axis)] = Some(back);

        let take = |a: Axis| inv_images[axis_index(a)].clone().expect("complete map");
        Self {
            x_image: take(Axis::X),
            z_image: take(Axis::Z),
        }
    }

    /// A shortest H/S word implementing this Clifford (up to global phase),
    /// applied left to right.
    pub fn decomposition(&self) -> &'static [BasicGate] {
        let table = decomposition_table();
        table
            .iter()
            .find(|(c, _)| c == self)
            .map(|(_, word)| word.as_slice())
            .expect("all 24 single-qubit Cliffords are tabulated")
    }

    /// Enumerate the full group.
    pub fn all() -> Vec<Self> {
        decomposition_table().iter().map(|(c, _)| c.clone()).collect()
    }
}

fn axis_index(a: Axis) -> usize {
    match a {
        Axis::X => 0,
        Axis::Y => 1,
        Axis::Z => 2,
    }
}

fn decomposition_table() -> &'static Vec<(LocalClifford, Vec<BasicGate>)> {
    static TABLE: OnceLock<Vec<(LocalClifford, Vec<BasicGate>)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // Breadth-first search over words in {H, S} from the identity.
        let mut table: Vec<(LocalClifford, Vec<BasicGate>)> =
            vec![(LocalClifford::identity(), Vec::new())];
        let mut frontier = vec![0usize];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &idx in &frontier {
                for gate in [BasicGate::H, BasicGate::S] {
                    let (cur, word) = &table[idx];
                    let cand = cur.then(&LocalClifford::from_basic(gate));
                    if !table.iter().any(|(c, _)| *c == cand) {
                        let mut w = word.clone();
                        w.push(gate);
                        table.push((cand, w));
                        next.push(table.len() - 1);
                    }
                }
            }
            frontier = next;
        }
        assert_eq!(table.len(), 24);
        table
    })
}

impl std::fmt::Debug for LocalClifford {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LocalClifford(X->{:?}, Z->{:?})", self.x_image, self.z_image)
    }
}
