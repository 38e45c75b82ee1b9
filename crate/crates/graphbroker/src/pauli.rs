//! n-qubit Pauli operators in symplectic (X-bits, Z-bits, phase) form.
//!
//! A `PauliString` encodes `i^phase · X^x · Z^z` where `x` and `z` are bit
//! vectors over GF(2) and `phase` is an exponent of `i` modulo 4. With this
//! ordering the product rule is a pair of XORs plus one popcount:
//!
//! ```text
//! (X^a Z^b)(X^c Z^d) = (-1)^(b·c) X^(a⊕c) Z^(b⊕d)
//! ```
//!
//! A single-qubit `Y` is stored as `i · X Z`, so hermitian operators carry a
//! phase whose parity equals the number of `Y` tensor factors.

use crate::gf2::BitRow;

/// Single-qubit Pauli axis.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Outcome sign of a measurement or projection, the ±1 eigenvalue.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn is_minus(self) -> bool {
        matches!(self, Sign::Minus)
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub(crate) x: BitRow,
    pub(crate) z: BitRow,
    /// Exponent of i, modulo 4.
    pub(crate) phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self {
            x: BitRow::zeros(n),
            z: BitRow::zeros(n),
            phase: 0,
        }
    }

    /// A single-axis Pauli on qubit `q` of an `n`-qubit register.
    pub fn single(n: usize, q: usize, axis: Axis) -> Self {
        let mut p = Self::identity(n);
        match axis {
            Axis::X => p.x.set(q, true),
            Axis::Z => p.z.set(q, true),
            Axis::Y => {
                p.x.set(q, true);
                p.z.set(q, true);
                p.phase = 1;
            }
        }
        p
    }

    /// Build from a list of (qubit, axis) factors; duplicate qubits multiply.
    pub fn from_ops(n: usize, ops: &[(usize, Axis)]) -> Self {
        let mut p = Self::identity(n);
        for &(q, axis) in ops {
            p = p.mul(&Self::single(n, q, axis));
        }
        p
    }

    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub(crate) fn set_phase(&mut self, phase: u8) {
        self.phase = phase & 3;
    }

    #[inline]
    pub fn x_bit(&self, q: usize) -> bool {
        self.x.get(q)
    }

    #[inline]
    pub fn z_bit(&self, q: usize) -> bool {
        self.z.get(q)
    }

    #[inline]
    pub(crate) fn set_x_bit(&mut self, q: usize, v: bool) {
        self.x.set(q, v);
    }

    #[inline]
    pub(crate) fn set_z_bit(&mut self, q: usize, v: bool) {
        self.z.set(q, v);
    }

    #[inline]
    pub(crate) fn flip_x_bit(&mut self, q: usize) {
        self.x.flip(q);
    }

    #[inline]
    pub(crate) fn flip_z_bit(&mut self, q: usize) {
        self.z.flip(q);
    }

    #[inline]
    pub(crate) fn add_phase(&mut self, delta: u8) {
        self.phase = (self.phase + delta) & 3;
    }

    pub fn x_bits(&self) -> &BitRow {
        &self.x
    }

    pub fn z_bits(&self) -> &BitRow {
        &self.z
    }

    /// Re-index onto the qubits in `keep`, in order. The operator must act
    /// as identity elsewhere for the result to represent the same physics.
    pub(crate) fn gather_qubits(&self, keep: &[usize]) -> Self {
        Self {
            x: self.x.gather(keep),
            z: self.z.gather(keep),
            phase: self.phase,
        }
    }

    /// The overall sign, assuming a hermitian operator (phase 0 or 2 after
    /// discounting the stored `i` per Y factor).
    pub fn sign(&self) -> Sign {
        debug_assert!(self.is_hermitian());
        let y_count = self.x.words().iter().zip(self.z.words()).fold(0u32, |acc, (a, b)| {
            acc + (a & b).count_ones()
        });
        let adj = (self.phase as u32).wrapping_sub(y_count) & 3;
        debug_assert!(adj == 0 || adj == 2);
        Sign::from_bit(adj == 2)
    }

    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) & 3;
    }

    pub fn negated(&self) -> Self {
        let mut p = self.clone();
        p.negate();
        p
    }

    /// Hermitian iff the phase parity matches the Y count parity.
    pub fn is_hermitian(&self) -> bool {
        let y_parity = self
            .x
            .words()
            .iter()
            .zip(self.z.words())
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            & 1;
        u32::from(self.phase & 1) == y_parity
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// True when the operators commute.
    #[inline]
    pub fn commutes_with(&self, other: &Self) -> bool {
        !(self.x.dot(&other.z) ^ self.z.dot(&other.x))
    }

    /// Group product `self · other`.
    pub fn mul(&self, other: &Self) -> Self {
        let mut x = self.x.clone();
        let mut z = self.z.clone();
        x.xor_assign(&other.x);
        z.xor_assign(&other.z);
        let reorder = if self.z.dot(&other.x) { 2 } else { 0 };
        Self {
            x,
            z,
            phase: (self.phase + other.phase + reorder) & 3,
        }
    }

    /// In-place left multiplication: `self := other · self`.
    pub fn premul(&mut self, other: &Self) {
        let reorder = if other.z.dot(&self.x) { 2 } else { 0 };
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
        self.phase = (self.phase + other.phase + reorder) & 3;
    }

    /// Axis on qubit `q`, or `None` for identity there.
    pub fn axis_at(&self, q: usize) -> Option<Axis> {
        match (self.x.get(q), self.z.get(q)) {
            (false, false) => None,
            (true, false) => Some(Axis::X),
            (true, true) => Some(Axis::Y),
            (false, true) => Some(Axis::Z),
        }
    }

    /// True when the operator acts as identity outside `keep`.
    pub fn supported_on(&self, keep: &[bool]) -> bool {
        (0..self.num_qubits()).all(|q| keep[q] || self.axis_at(q).is_none())
    }
}

fn fmt_pauli(p: &PauliString, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
    let y_count = p
        .x
        .words()
        .iter()
        .zip(p.z.words())
        .map(|(a, b)| (a & b).count_ones())
        .sum::<u32>();
    let adj = (p.phase as u32).wrapping_sub(y_count) & 3;
    let prefix = match adj {
        0 => "+",
        1 => "+i",
        2 => "-",
        _ => "-i",
    };
    write!(f, "{prefix}")?;
    for q in 0..p.num_qubits() {
        let c = match p.axis_at(q) {
            None => 'I',
            Some(Axis::X) => 'X',
            Some(Axis::Y) => 'Y',
            Some(Axis::Z) => 'Z',
        };
        write!(f, "{c}")?;
    }
    Ok(())
}

impl std::fmt::Debug for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fmt_pauli(self, f)
    }
}

impl std::fmt::Display for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fmt_pauli(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn y_is_hermitian_with_phase_one() {
        let y = PauliString::single(1, 0, Axis::Y);
        assert_eq!(y.phase(), 1);
        assert!(y.is_hermitian());
        assert_eq!(y.sign(), Sign::Plus);
        assert_eq!(format!("{y}"), "+Y");
    }

    #[test]
    fn products_follow_pauli_algebra() {
        let x = PauliString::single(1, 0, Axis::X);
        let z = PauliString::single(1, 0, Axis::Z);
        let y = PauliString::single(1, 0, Axis::Y);

        // X·Z = -i Y
        let xz = x.mul(&z);
        assert_eq!(xz.x.get(0), true);
        assert_eq!(xz.z.get(0), true);
        assert_eq!(xz.phase, 0); // X Z stored form has phase 0 = -i·Y
        // Z·X = i Y
        let zx = z.mul(&x);
        assert_eq!(zx.phase, 2);
        // Y·Y = I
        let yy = y.mul(&y);
        assert!(yy.is_identity());
        assert_eq!(yy.phase, 0);
        // X·Y = iZ, Y·X = -iZ
        assert_eq!(x.mul(&y).phase, 1);
        assert_eq!(y.mul(&x).phase, 3);
    }

    #[test]
    fn commutation() {
        let xx = PauliString::from_ops(2, &[(0, Axis::X), (1, Axis::X)]);
        let zz = PauliString::from_ops(2, &[(0, Axis::Z), (1, Axis::Z)]);
        let zi = PauliString::single(2, 0, Axis::Z);
        assert!(xx.commutes_with(&zz));
        assert!(!xx.commutes_with(&zi));
    }

    #[test]
    fn sign_extraction() {
        let mut zz = PauliString::from_ops(2, &[(0, Axis::Z), (1, Axis::Z)]);
        assert_eq!(zz.sign(), Sign::Plus);
        zz.negate();
        assert_eq!(zz.sign(), Sign::Minus);
        assert_eq!(format!("{zz}"), "-ZZ");
    }
}
