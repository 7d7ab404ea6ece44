use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Entrywise tolerance for the `U·U† = I` check.
pub const UNITARITY_TOL: f64 = 1e-10;

/// A dense square unitary matrix stored row-major. The dimension is always a
/// power of two so the matrix acts on a whole number of qubits.
#[derive(Clone, PartialEq)]
pub struct Unitary {
    dim: usize,
    entries: Vec<Complex64>,
}

impl Unitary {
    /// Builds a unitary from row-major entries, rejecting anything that is not
    /// square, power-of-two sized and unitary within [`UNITARITY_TOL`].
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(dim));
        }
        if entries.len() != dim * dim {
            return Err(Error::BadMatrixShape {
                dim,
                entries: entries.len(),
            });
        }
        let u = Self { dim, entries };
        let residual = u.unitarity_residual();
        if residual > UNITARITY_TOL {
            return Err(Error::NotUnitary { residual });
        }
        Ok(u)
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(
            dim,
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim.is_power_of_two(), "identity dimension must be 2^k");
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Self { dim, entries }
    }

    // Products of unitaries are unitary, so internal constructors skip the check.
    pub(crate) fn from_parts_unchecked(dim: usize, entries: Vec<Complex64>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        Self { dim, entries }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for c in 0..n {
                out[c * n + r] = self.entries[r * n + c].conj();
            }
        }
        Self::from_parts_unchecked(n, out)
    }

    /// Matrix product `self · rhs`.
    pub fn matmul(&self, rhs: &Unitary) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: rhs.dim,
            });
        }
        let n = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.entries[r * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..n {
                    out[r * n + c] += a * rhs.entries[k * n + c];
                }
            }
        }
        Ok(Self::from_parts_unchecked(n, out))
    }

    /// Kronecker product `self ⊗ rhs`; `self` acts on the leading wires.
    pub fn kron(&self, rhs: &Unitary) -> Self {
        let (n, m) = (self.dim, rhs.dim);
        let d = n * m;
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for r1 in 0..n {
            for c1 in 0..n {
                let a = self.entries[r1 * n + c1];
                for r2 in 0..m {
                    for c2 in 0..m {
                        out[(r1 * m + r2) * d + (c1 * m + c2)] = a * rhs.entries[r2 * m + c2];
                    }
                }
            }
        }
        Self::from_parts_unchecked(d, out)
    }

    /// Plain matrix-vector product on a raw amplitude slice.
    pub fn apply_to(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(
            v.len(),
            self.dim,
            "vector length must equal matrix dimension"
        );
        let n = self.dim;
        (0..n)
            .map(|r| {
                self.entries[r * n..(r + 1) * n]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Largest entrywise deviation of `U·U†` from the identity.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self.entries[r * n + k] * self.entries[c * n + k].conj();
                }
                if r == c {
                    acc -= 1.0;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    /// Largest entrywise distance to another matrix of the same dimension.
    pub fn max_abs_diff(&self, other: &Unitary) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for Unitary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Unitary({}x{})", self.dim, self.dim)?;
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|c| {
                    let z = self.get(r, c);
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_unitary() {
        let err = Unitary::from_real(2, &[1.0, 1.0, 0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NotUnitary { .. }));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert_eq!(
            Unitary::from_real(3, &[1.0; 9]).unwrap_err(),
            Error::NotPowerOfTwo(3)
        );
        assert!(matches!(
            Unitary::from_real(2, &[1.0, 0.0, 0.0]).unwrap_err(),
            Error::BadMatrixShape { .. }
        ));
    }

    #[test]
    fn kron_orders_leading_factor_first() {
        let x = Unitary::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let id = Unitary::identity(2);
        let xi = x.kron(&id);
        // X on the most significant wire maps |00> to |10>, i.e. index 0 -> 2.
        assert_eq!(xi.get(2, 0), Complex64::new(1.0, 0.0));
        assert_eq!(xi.get(1, 0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn adjoint_inverts() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u = Unitary::new(
            2,
            vec![
                Complex64::new(s, 0.0),
                Complex64::new(0.0, s),
                Complex64::new(0.0, s),
                Complex64::new(s, 0.0),
            ],
        )
        .unwrap();
        let p = u.matmul(&u.adjoint()).unwrap();
        assert!(p.max_abs_diff(&Unitary::identity(2)) < 1e-15);
    }
}
