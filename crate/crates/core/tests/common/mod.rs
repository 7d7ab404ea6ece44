//! Test-only oracles, independent of the library's gate application path.
#![allow(dead_code)]

use ghz_locc::qstate::{StateVector, Unitary};
use num_complex::Complex64;

pub type Dense = Vec<Vec<Complex64>>;

pub fn zeros(d: usize) -> Dense {
    vec![vec![Complex64::new(0.0, 0.0); d]; d]
}

pub fn to_dense(u: &Unitary) -> Dense {
    (0..u.dim())
        .map(|r| (0..u.dim()).map(|c| u.get(r, c)).collect())
        .collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut out = zeros(n);
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn kron(a: &Dense, b: &Dense) -> Dense {
    let (n, m) = (a.len(), b.len());
    let mut out = zeros(n * m);
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn identity(d: usize) -> Dense {
    let mut out = zeros(d);
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    out
}

pub fn matvec(a: &Dense, v: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

/// Full `2ⁿ×2ⁿ` matrix for `gate` on `wires`: pad with identity as
/// `gate ⊗ I` acting on the wire order (wires..., remaining wires ascending),
/// then conjugate by the permutation that maps the natural order into it.
pub fn dense_gate(gate: &Unitary, wires: &[usize], n: usize) -> Dense {
    let k = wires.len();
    let padded = kron(&to_dense(gate), &identity(1 << (n - k)));
    let mut order: Vec<usize> = wires.to_vec();
    order.extend((0..n).filter(|w| !wires.contains(w)));

    let dim = 1usize << n;
    // perm[x] = index of basis state x when its bits are read in `order`.
    let perm: Vec<usize> = (0..dim)
        .map(|x| {
            order
                .iter()
                .fold(0, |acc, &w| (acc << 1) | ((x >> (n - 1 - w)) & 1))
        })
        .collect();
    let mut p = zeros(dim);
    for (x, &y) in perm.iter().enumerate() {
        p[y][x] = Complex64::new(1.0, 0.0);
    }
    let pt: Dense = (0..dim)
        .map(|r| (0..dim).map(|c| p[c][r]).collect())
        .collect();
    matmul(&pt, &matmul(&padded, &p))
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn dense_max_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter()
        .zip(b)
        .map(|(r, s)| max_diff(r, s))
        .fold(0.0, f64::max)
}

/// `Σᵢ |i⟩ ⊗ partsᵢ ⊗ |tailᵢ⟩`, where `tailᵢ` is a basis index on
/// `tail_bits` wires. Used to write the expected protocol states by hand.
pub fn controlled_sum(
    parts: [&[Complex64]; 2],
    tails: [usize; 2],
    tail_bits: usize,
) -> Vec<Complex64> {
    let body = parts[0].len();
    let tail = 1usize << tail_bits;
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * body * tail];
    for i in 0..2 {
        for (j, amp) in parts[i].iter().enumerate() {
            out[(i * body + j) * tail + tails[i]] += *amp;
        }
    }
    out
}

pub fn state(amps: Vec<Complex64>) -> StateVector {
    StateVector::normalized(amps).unwrap()
}

/// Eigenvalues of a 2×2 Hermitian matrix `[[a, b], [b*, d]]` in closed form.
pub fn hermitian2_eigenvalues(a: f64, b: Complex64, d: f64) -> [f64; 2] {
    let mean = 0.5 * (a + d);
    let r = (0.25 * (a - d).powi(2) + b.norm_sqr()).sqrt();
    [mean + r, mean - r]
}

/// Entropy of wire 0 via its 2×2 reduced density matrix.
pub fn single_wire_entropy(s: &StateVector) -> f64 {
    let half = s.amplitudes().len() / 2;
    let (top, bottom) = s.amplitudes().split_at(half);
    let a: f64 = top.iter().map(|x| x.norm_sqr()).sum();
    let d: f64 = bottom.iter().map(|x| x.norm_sqr()).sum();
    let b: Complex64 = top.iter().zip(bottom).map(|(x, y)| x * y.conj()).sum();
    hermitian2_eigenvalues(a, b, d)
        .iter()
        .filter(|&&p| p > 1e-300)
        .map(|&p| -p * p.log2())
        .sum()
}
