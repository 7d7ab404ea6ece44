//! Exact statevector mathematics for registers of a handful of qubits.
//!
//! Basis ordering: wire 0 is the most significant bit of the basis index, so
//! on three wires `|abc⟩` sits at index `4a + 2b + c`. Every operation here
//! returns a fresh value; a [`StateVector`] never changes after construction.

mod unitary;

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub use unitary::{Unitary, UNITARITY_TOL};

/// Allowed norm drift when constructing a state from raw amplitudes.
pub const CONSTRUCTION_TOL: f64 = 1e-9;
/// Tolerance used when comparing protocol outputs with their oracle.
pub const VERIFICATION_TOL: f64 = 1e-10;
/// Tolerance for exact algebraic identities (norms, oracle agreement).
pub const ALGEBRA_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Normalized pure state on `num_qubits` wires.
#[derive(Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

/// Result of a computational-basis measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub outcome: u8,
    /// Born probability of `outcome` in the pre-measurement state.
    pub probability: f64,
    /// Remaining register with the measured wire removed. `None` when the
    /// measured wire was the only one.
    pub post_state: Option<StateVector>,
}

impl Measurement {
    /// The measured wire itself after collapse, `|outcome⟩`.
    pub fn collapsed_wire(&self) -> StateVector {
        StateVector::basis(1, self.outcome as usize)
    }
}

impl StateVector {
    /// Builds a state from amplitudes whose length is a power of two and whose
    /// norm is within [`CONSTRUCTION_TOL`] of 1. Residual drift is removed by
    /// renormalizing.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        let norm = norm_of(&amplitudes);
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        if (norm - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(Error::Unnormalized { norm });
        }
        Ok(Self::from_normalized(scale(amplitudes, 1.0 / norm)))
    }

    /// Builds a state from real amplitudes.
    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Normalizes an arbitrary nonzero vector. Used for sampling and for
    /// projections, where the norm is known to be far from 1.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        let norm = norm_of(&amplitudes);
        if norm <= f64::MIN_POSITIVE {
            return Err(Error::ZeroVector);
        }
        Ok(Self::from_normalized(scale(amplitudes, 1.0 / norm)))
    }

    fn from_normalized(amplitudes: Vec<Complex64>) -> Self {
        let num_qubits = amplitudes.len().trailing_zeros() as usize;
        Self {
            num_qubits,
            amplitudes,
        }
    }

    /// Computational basis state `|index⟩` on `num_qubits` wires.
    pub fn basis(num_qubits: usize, index: usize) -> Self {
        assert!(num_qubits >= 1, "a state needs at least one qubit");
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[index] = ONE;
        Self::from_normalized(amps)
    }

    /// `|0…0⟩` on `num_qubits` wires.
    pub fn zero(num_qubits: usize) -> Self {
        Self::basis(num_qubits, 0)
    }

    /// `|+⟩ = (|0⟩ + |1⟩)/√2`.
    pub fn plus() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_normalized(vec![Complex64::new(s, 0.0), Complex64::new(s, 0.0)])
    }

    /// Random state with i.i.d. complex Gaussian amplitudes, normalized. This
    /// is the unitarily invariant distribution on the sphere.
    pub fn random<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Self {
        assert!(num_qubits >= 1);
        let amps: Vec<Complex64> = (0..1usize << num_qubits)
            .map(|_| {
                Complex64::new(
                    StandardNormal.sample(&mut *rng),
                    StandardNormal.sample(&mut *rng),
                )
            })
            .collect();
        Self::normalized(amps).expect("gaussian vector is nonzero with probability 1")
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    #[inline]
    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm(&self) -> f64 {
        norm_of(&self.amplitudes)
    }

    /// `self ⊗ other`, with `self` on the leading wires.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        Self::from_normalized(amps)
    }

    /// Applies `gate` to the listed wires. `wires[0]` is the gate's most
    /// significant wire. All other wires are untouched.
    pub fn apply_gate(&self, gate: &Unitary, wires: &[usize]) -> Result<StateVector> {
        let k = wires.len();
        if gate.dim() != 1 << k {
            return Err(Error::DimensionMismatch {
                expected: 1 << k,
                actual: gate.dim(),
            });
        }
        self.check_wires(wires)?;

        let n = self.num_qubits;
        // Bit position (from the least significant end) of each gate wire.
        let shifts: Vec<usize> = wires.iter().map(|&w| n - 1 - w).collect();
        let target_mask: usize = shifts.iter().map(|&s| 1usize << s).sum();
        let sub_dim = 1usize << k;
        let offsets: Vec<usize> = (0..sub_dim)
            .map(|sub| {
                (0..k)
                    .filter(|&j| sub >> (k - 1 - j) & 1 == 1)
                    .map(|j| 1usize << shifts[j])
                    .sum()
            })
            .collect();

        let mut out = self.amplitudes.clone();
        let mut gathered = vec![ZERO; sub_dim];
        for base in (0..self.amplitudes.len()).filter(|i| i & target_mask == 0) {
            for (slot, &off) in gathered.iter_mut().zip(&offsets) {
                *slot = self.amplitudes[base | off];
            }
            for (row, &off) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (col, amp) in gathered.iter().enumerate() {
                    acc += gate.get(row, col) * amp;
                }
                out[base | off] = acc;
            }
        }
        Ok(Self::from_normalized(out))
    }

    /// Born probability that `wire` reads `outcome`.
    pub fn probability(&self, wire: usize, outcome: u8) -> Result<f64> {
        self.check_wires(&[wire])?;
        let shift = self.num_qubits - 1 - wire;
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| (i >> shift) & 1 == outcome as usize)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Measures `wire` in the computational basis and removes it from the
    /// register. With `forced_outcome` set, that branch is selected instead
    /// of sampling; its probability must exceed [`ALGEBRA_TOL`].
    pub fn measure<R: Rng + ?Sized>(
        &self,
        wire: usize,
        forced_outcome: Option<u8>,
        rng: &mut R,
    ) -> Result<Measurement> {
        self.check_wires(&[wire])?;
        let p1 = self.probability(wire, 1)?.clamp(0.0, 1.0);
        let p0 = 1.0 - p1;
        let outcome = match forced_outcome {
            Some(bit) => {
                let bit = bit & 1;
                let p = if bit == 0 { p0 } else { p1 };
                if p <= ALGEBRA_TOL {
                    return Err(Error::ImpossibleOutcome {
                        outcome: bit,
                        probability: p,
                    });
                }
                bit
            }
            None => u8::from(rng.random::<f64>() < p1),
        };
        let probability = if outcome == 0 { p0 } else { p1 };
        let post_state = if self.num_qubits == 1 {
            None
        } else {
            Some(Self::normalized(self.project_out(wire, outcome))?)
        };
        Ok(Measurement {
            outcome,
            probability,
            post_state,
        })
    }

    /// Unnormalized amplitudes of the branch where `wire` reads `outcome`,
    /// with that wire dropped.
    fn project_out(&self, wire: usize, outcome: u8) -> Vec<Complex64> {
        let shift = self.num_qubits - 1 - wire;
        let low_mask = (1usize << shift) - 1;
        (0..self.amplitudes.len() / 2)
            .map(|j| {
                let high = j >> shift;
                let low = j & low_mask;
                let idx = (high << (shift + 1)) | ((outcome as usize) << shift) | low;
                self.amplitudes[idx]
            })
            .collect()
    }

    /// Returns `(max entrywise |a_i − b_i|, |⟨self|other⟩|²)`. The first is
    /// sensitive to global phase, the second is not.
    pub fn distance(&self, other: &StateVector) -> Result<(f64, f64)> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                actual: other.num_qubits,
            });
        }
        let exact = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        Ok((exact, self.inner(other).norm_sqr()))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Von Neumann entropy in bits of the reduced state on `cut.side_a()`,
    /// from the singular values of the amplitude matrix reshaped along the cut.
    pub fn entanglement_entropy(&self, cut: &Bipartition) -> Result<f64> {
        if cut.num_wires() != self.num_qubits {
            return Err(Error::InvalidBipartition(format!(
                "cut covers {} wires but state has {}",
                cut.num_wires(),
                self.num_qubits
            )));
        }
        let side_a: Vec<usize> = cut.side_a().iter().copied().collect();
        let side_b: Vec<usize> = cut.side_b().iter().copied().collect();
        let n = self.num_qubits;
        let gather = |wires: &[usize], idx: usize| -> usize {
            wires
                .iter()
                .fold(0, |acc, &w| (acc << 1) | ((idx >> (n - 1 - w)) & 1))
        };
        let rows = 1usize << side_a.len();
        let cols = 1usize << side_b.len();
        let mut m = DMatrix::<Complex64>::zeros(rows, cols);
        for (idx, amp) in self.amplitudes.iter().enumerate() {
            m[(gather(&side_a, idx), gather(&side_b, idx))] = *amp;
        }
        let singular = m.svd(false, false).singular_values;
        let entropy = singular
            .iter()
            .map(|s| s * s)
            .filter(|&p| p > 0.0)
            .map(|p| -p * p.log2())
            .sum::<f64>();
        Ok(entropy.max(0.0))
    }

    fn check_wires(&self, wires: &[usize]) -> Result<()> {
        let mut seen = BTreeSet::new();
        for &w in wires {
            if w >= self.num_qubits {
                return Err(Error::WireOutOfRange {
                    wire: w,
                    num_qubits: self.num_qubits,
                });
            }
            if !seen.insert(w) {
                return Err(Error::RepeatedWire(w));
            }
        }
        Ok(())
    }
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.num_qubits;
        let terms: Vec<String> = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 1e-12)
            .map(|(i, a)| format!("({:+.6}{:+.6}i)|{:0n$b}⟩", a.re, a.im, i))
            .collect();
        write!(f, "StateVector[{n}]: {}", terms.join(" + "))
    }
}

/// A split of the wires `0..num_wires` into two nonempty complementary sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    side_a: BTreeSet<usize>,
    side_b: BTreeSet<usize>,
}

impl Bipartition {
    pub fn new(side_a: impl IntoIterator<Item = usize>, num_wires: usize) -> Result<Self> {
        let side_a: BTreeSet<usize> = side_a.into_iter().collect();
        if let Some(&w) = side_a.iter().find(|&&w| w >= num_wires) {
            return Err(Error::InvalidBipartition(format!(
                "wire {w} outside 0..{num_wires}"
            )));
        }
        let side_b: BTreeSet<usize> = (0..num_wires).filter(|w| !side_a.contains(w)).collect();
        if side_a.is_empty() || side_b.is_empty() {
            return Err(Error::InvalidBipartition(
                "both sides must be nonempty".into(),
            ));
        }
        Ok(Self { side_a, side_b })
    }

    pub fn side_a(&self) -> &BTreeSet<usize> {
        &self.side_a
    }

    pub fn side_b(&self) -> &BTreeSet<usize> {
        &self.side_b
    }

    pub fn num_wires(&self) -> usize {
        self.side_a.len() + self.side_b.len()
    }

    pub fn swapped(&self) -> Self {
        Self {
            side_a: self.side_b.clone(),
            side_b: self.side_a.clone(),
        }
    }
}

fn norm_of(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn scale(mut amps: Vec<Complex64>, factor: f64) -> Vec<Complex64> {
    for a in &mut amps {
        *a *= factor;
    }
    amps
}
