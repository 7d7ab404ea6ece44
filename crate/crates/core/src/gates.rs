//! Named gates, controlled diagonal-block operations and Haar sampling.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::qstate::Unitary;

const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

pub const MAX_BLOCK_QUBITS: usize = 3;

pub fn pauli_x() -> Unitary {
    Unitary::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
}

pub fn pauli_z() -> Unitary {
    Unitary::from_real(2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
}

/// Normalized Hadamard, `H|i⟩ = (|0⟩ + (−1)^i |1⟩)/√2`.
pub fn hadamard() -> Unitary {
    Unitary::from_real(2, &[S, S, S, -S]).unwrap()
}

/// CNOT with the control on the first wire.
pub fn cnot() -> Unitary {
    embed_diagonal_block(&DiagonalBlockOp::new(Unitary::identity(2), pauli_x()).unwrap())
}

/// A controlled operation `|0⟩⟨0| ⊗ block0 + |1⟩⟨1| ⊗ block1`.
///
/// Blocks act on `block_qubits` wires. The party holding the device may not
/// know the blocks; the protocols only ever apply the embedded operation.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalBlockOp {
    block0: Unitary,
    block1: Unitary,
    block_qubits: usize,
}

impl DiagonalBlockOp {
    pub fn new(block0: Unitary, block1: Unitary) -> Result<Self> {
        if block0.dim() != block1.dim() {
            return Err(Error::DimensionMismatch {
                expected: block0.dim(),
                actual: block1.dim(),
            });
        }
        let block_qubits = block0.num_qubits();
        if block_qubits == 0 {
            return Err(Error::BlockQubitsOutOfRange(0));
        }
        Ok(Self {
            block0,
            block1,
            block_qubits,
        })
    }

    /// `(I, X)`, the CNOT.
    pub fn cnot_blocks() -> Self {
        Self::new(Unitary::identity(2), pauli_x()).unwrap()
    }

    /// `(I, I)` on `block_qubits` wires.
    pub fn identity(block_qubits: usize) -> Self {
        let id = Unitary::identity(1 << block_qubits);
        Self::new(id.clone(), id).unwrap()
    }

    pub fn block(&self, control: u8) -> &Unitary {
        if control == 0 {
            &self.block0
        } else {
            &self.block1
        }
    }

    pub fn block_qubits(&self) -> usize {
        self.block_qubits
    }
}

/// Block-diagonal unitary with `op.block0` on top; the control is wire 0.
pub fn embed_diagonal_block(op: &DiagonalBlockOp) -> Unitary {
    block_diag(&op.block0, &op.block1)
}

/// The combined target `Σᵢ |i⟩⟨i| ⊗ uᵢ ⊗ vᵢ` on wires `(A, B-register,
/// C-register)`: the effect of applying `u` to `(A, B)` and then `v` to
/// `(A, C)`.
pub fn compose_w(u: &DiagonalBlockOp, v: &DiagonalBlockOp) -> Unitary {
    block_diag(&u.block0.kron(&v.block0), &u.block1.kron(&v.block1))
}

fn block_diag(top: &Unitary, bottom: &Unitary) -> Unitary {
    debug_assert_eq!(top.dim(), bottom.dim());
    let d = top.dim();
    let n = 2 * d;
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    for r in 0..d {
        for c in 0..d {
            entries[r * n + c] = top.get(r, c);
            entries[(r + d) * n + (c + d)] = bottom.get(r, c);
        }
    }
    Unitary::from_parts_unchecked(n, entries)
}

/// Two independent Haar-random blocks on `block_qubits` wires, reproducible
/// from `seed`.
pub fn haar_random_blocks(block_qubits: usize, seed: u64) -> Result<DiagonalBlockOp> {
    if !(1..=MAX_BLOCK_QUBITS).contains(&block_qubits) {
        return Err(Error::BlockQubitsOutOfRange(block_qubits));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 1 << block_qubits;
    let b0 = haar_unitary(dim, &mut rng);
    let b1 = haar_unitary(dim, &mut rng);
    DiagonalBlockOp::new(b0, b1)
}

/// Haar-distributed unitary of dimension `dim`.
///
/// Orthonormalizes the columns of a complex Ginibre matrix with modified
/// Gram-Schmidt. Dividing each column by its real positive norm fixes R to a
/// positive real diagonal, the phase convention under which Q is Haar
/// distributed (a LAPACK-style QR would need an explicit phase correction).
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Unitary {
    assert!(dim.is_power_of_two());
    let mut cols: Vec<Vec<Complex64>> = (0..dim)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    Complex64::new(
                        StandardNormal.sample(&mut *rng),
                        StandardNormal.sample(&mut *rng),
                    ) * S
                })
                .collect()
        })
        .collect();

    for j in 0..dim {
        let (done, rest) = cols.split_at_mut(j);
        let v = &mut rest[0];
        // Two passes keep the columns orthogonal to machine precision.
        for _ in 0..2 {
            for q in done.iter() {
                let proj: Complex64 = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let r_jj = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for vi in v.iter_mut() {
            *vi /= r_jj;
        }
    }

    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (c, col) in cols.iter().enumerate() {
        for (r, x) in col.iter().enumerate() {
            entries[r * dim + c] = *x;
        }
    }
    Unitary::new(dim, entries).expect("Gram-Schmidt output is unitary")
}
