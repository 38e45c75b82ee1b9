//! Dense state-vector oracle for validating the tableau engine.
//!
//! Reconstructs the unique (up to phase) state stabilized by a tableau's
//! generators, and provides dense gate/projection application so tableau
//! evolution can be cross-checked amplitude by amplitude. Capped at 16
//! qubits (65536 amplitudes), which covers an eight-node protocol register.

pub use num_complex::Complex64;
use thiserror::Error;

use crate::pauli::{PauliString, Sign};
use crate::tableau::{Gate, StabilizerTableau};

/// Largest register the oracle will materialize.
pub const MAX_ORACLE_QUBITS: usize = 16;

pub const ORACLE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle supports at most {MAX_ORACLE_QUBITS} qubits (asked for {0})")]
    TooManyQubits(usize),
    #[error("projection annihilated the state")]
    ZeroProjection,
}

/// Expand a stabilizer tableau into a normalized 2^n amplitude vector.
pub fn dense_state(t: &StabilizerTableau) -> Result<Vec<Complex64>, OracleError> {
    let n = t.num_qubits();
    if n > MAX_ORACLE_QUBITS {
        return Err(OracleError::TooManyQubits(n));
    }
    let dim = 1usize << n;
    let canon = t.canonical_generators();

    // Basis states with nonzero amplitude satisfy the parity constraints of
    // the pure-Z canonical rows; with canonical rows in reduced echelon form
    // each pure-Z row pins its leading Z column directly.
    let mut support_point = 0usize;
    for row in &canon {
        if row.x_bits().is_zero() {
            let lead = row.z_bits().first_one().expect("non-identity row");
            if row.sign() == Sign::Minus {
                support_point |= 1 << lead;
            }
        }
    }

    let mut v = vec![Complex64::ZERO; dim];
    v[support_point] = Complex64::ONE;
    // Apply the group projector as a product of (I + g)/2 factors.
    for g in &canon {
        let gv = apply_pauli_dense(&v, g);
        for (a, b) in v.iter_mut().zip(gv) {
            *a = (*a + b) * 0.5;
        }
    }
    let norm = l2_norm(&v);
    if norm < ORACLE_TOLERANCE {
        return Err(OracleError::ZeroProjection);
    }
    for a in &mut v {
        *a /= norm;
    }
    Ok(v)
}

/// Apply a Pauli operator to a dense vector: g|j> = i^phase (-1)^<z,j> |j xor x>.
pub fn apply_pauli_dense(v: &[Complex64], op: &PauliString) -> Vec<Complex64> {
    let n = op.num_qubits();
    debug_assert_eq!(v.len(), 1 << n);
    let x_mask = low_mask(op.x_bits().words());
    let z_mask = low_mask(op.z_bits().words());
    let phase = match op.phase() & 3 {
        0 => Complex64::ONE,
        1 => Complex64::I,
        2 => -Complex64::ONE,
        _ => -Complex64::I,
    };
    let mut out = vec![Complex64::ZERO; v.len()];
    for (j, &amp) in v.iter().enumerate() {
        if amp == Complex64::ZERO {
            continue;
        }
        let sign = if (z_mask & j as u64).count_ones() & 1 == 1 {
            -Complex64::ONE
        } else {
            Complex64::ONE
        };
        out[j ^ x_mask as usize] += phase * sign * amp;
    }
    out
}

/// Apply a Clifford gate to a dense vector.
pub fn apply_gate_dense(v: &mut Vec<Complex64>, gate: Gate) {
    let dim = v.len();
    match gate {
        Gate::H(q) => {
            let bit = 1usize << q;
            let s = std::f64::consts::FRAC_1_SQRT_2;
            for j in 0..dim {
                if j & bit == 0 {
                    let a = v[j];
                    let b = v[j | bit];
                    v[j] = s * (a + b);
                    v[j | bit] = s * (a - b);
                }
            }
        }
        Gate::S(q) => {
            let bit = 1usize << q;
            for (j, a) in v.iter_mut().enumerate() {
                if j & bit != 0 {
                    *a *= Complex64::I;
                }
            }
        }
        Gate::X(q) => {
            let bit = 1usize << q;
            for j in 0..dim {
                if j & bit == 0 {
                    v.swap(j, j | bit);
                }
            }
        }
        Gate::Z(q) => {
            let bit = 1usize << q;
            for (j, a) in v.iter_mut().enumerate() {
                if j & bit != 0 {
                    *a = -*a;
                }
            }
        }
        Gate::Cz(p, q) => {
            let mask = (1usize << p) | (1usize << q);
            for (j, a) in v.iter_mut().enumerate() {
                if j & mask == mask {
                    *a = -*a;
                }
            }
        }
        Gate::Cnot(c, t) => {
            let cbit = 1usize << c;
            let tbit = 1usize << t;
            for j in 0..dim {
                if j & cbit != 0 && j & tbit == 0 {
                    v.swap(j, j | tbit);
                }
            }
        }
    }
}

/// Project a dense vector onto the `desired` eigenspace of a Pauli and
/// renormalize. Errors when the outcome has zero probability.
pub fn project_dense(
    v: &[Complex64],
    op: &PauliString,
    desired: Sign,
) -> Result<Vec<Complex64>, OracleError> {
    let gv = apply_pauli_dense(v, op);
    let s = match desired {
        Sign::Plus => Complex64::ONE,
        Sign::Minus => -Complex64::ONE,
    };
    let mut out: Vec<Complex64> = v
        .iter()
        .zip(gv)
        .map(|(a, b)| (a + s * b) * 0.5)
        .collect();
    let norm = l2_norm(&out);
    if norm < ORACLE_TOLERANCE {
        return Err(OracleError::ZeroProjection);
    }
    for a in &mut out {
        *a /= norm;
    }
    Ok(out)
}

/// True when `op` stabilizes `v`: op|v> = |v> within the oracle tolerance.
pub fn stabilizes(v: &[Complex64], op: &PauliString) -> bool {
    let gv = apply_pauli_dense(v, op);
    v.iter()
        .zip(gv)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
        < ORACLE_TOLERANCE
}

/// |<u|v>|, for comparing states up to global phase.
pub fn overlap(u: &[Complex64], v: &[Complex64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| a.conj() * b)
        .sum::<Complex64>()
        .norm()
}

fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn low_mask(words: &[u64]) -> u64 {
    words.first().copied().unwrap_or(0)
}
