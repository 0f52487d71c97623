//! Exact density-matrix simulation of small qubit registers.
//!
//! Qubit `0` is the most significant bit of a basis index, so the bitstring
//! `"10"` names the basis state with qubit 0 set and qubit 1 clear.

mod gate;
mod state;

pub use gate::{GateKind, GateSpec, Pauli};
pub use state::{MeasurementOutcome, QuantumState};

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 12;

/// Global numerical tolerances.
pub mod tol {
    /// Trace, Hermiticity, positivity and completeness checks.
    pub const STRUCTURAL: f64 = 1e-10;
    /// Gate unitarity.
    pub const UNITARY: f64 = 1e-12;
    /// Derived scalar quantities (entropies, fidelities, capacities).
    pub const SCALAR: f64 = 1e-9;
    /// Eigenvalues below this contribute nothing to an entropy.
    pub const EIGEN_FLOOR: f64 = 1e-12;
    /// Smallest branch probability a measurement may renormalise.
    pub const BRANCH: f64 = 1e-12;
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QsimError {
    #[error("register of {requested} qubits exceeds capacity (1..={max})")]
    Capacity { requested: usize, max: usize },
    #[error("qubit index {qubit} out of range for a {num_qubits}-qubit register")]
    Index { qubit: usize, num_qubits: usize },
    #[error("qubit index {0} listed more than once")]
    DuplicateTarget(usize),
    #[error("gate {gate} acts on {expected} qubits, got {found} targets")]
    GateArity {
        gate: String,
        expected: usize,
        found: usize,
    },
    #[error("invalid bitstring {0:?}")]
    InvalidBitstring(String),
    #[error("partial trace needs a nonempty set of kept qubits")]
    EmptyKeep,
    #[error("reference state is not pure (purity {0})")]
    NotPure(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("selected measurement branch has probability {0:e}, below the renormalisation guard")]
    RenormalizationGuard(f64),
    #[error("state invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, QsimError>;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Outer product `|v⟩⟨v|`.
pub fn projector(amplitudes: &[C64]) -> CMatrix {
    let d = amplitudes.len();
    CMatrix::from_fn(d, d, |r, col| amplitudes[r] * amplitudes[col].conj())
}

/// Largest element-wise deviation between two matrices of equal shape.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Real eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut vals: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    vals
}

/// Shannon entropy in bits of a spectrum, after the clipping rule: values
/// below `-STRUCTURAL` are rejected, the rest are clipped into `[0, 1]` and
/// anything under `EIGEN_FLOOR` contributes zero.
pub fn spectrum_entropy(eigenvalues: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &l in eigenvalues {
        if l < -tol::STRUCTURAL {
            return Err(QsimError::Invariant(format!("negative eigenvalue {l:e}")));
        }
        let l = l.clamp(0.0, 1.0);
        if l >= tol::EIGEN_FLOOR {
            s -= l * l.log2();
        }
    }
    Ok(s.max(0.0))
}

/// Positions in the full index space of an operator acting on `targets`.
///
/// Returns the base indices (all target bits cleared) and, for each local
/// index `j` of the operator, the bit pattern it contributes. `targets[0]`
/// is the most significant local bit.
pub(crate) fn index_layout(targets: &[usize], num_qubits: usize) -> (Vec<usize>, Vec<usize>) {
    let k = targets.len();
    let masks: Vec<usize> = targets
        .iter()
        .map(|&q| 1usize << (num_qubits - 1 - q))
        .collect();
    let target_mask: usize = masks.iter().sum();
    let offsets = (0..1usize << k)
        .map(|j| {
            (0..k)
                .filter(|&b| j & (1 << (k - 1 - b)) != 0)
                .map(|b| masks[b])
                .sum()
        })
        .collect();
    let bases = (0..1usize << num_qubits)
        .filter(|i| i & target_mask == 0)
        .collect();
    (bases, offsets)
}

pub(crate) fn check_targets(targets: &[usize], num_qubits: usize) -> Result<()> {
    for (i, &q) in targets.iter().enumerate() {
        if q >= num_qubits {
            return Err(QsimError::Index {
                qubit: q,
                num_qubits,
            });
        }
        if targets[..i].contains(&q) {
            return Err(QsimError::DuplicateTarget(q));
        }
    }
    Ok(())
}

/// `A ρ B†` where `A` and `B` act locally on `targets` of an `n`-qubit
/// register. With `A = B` this is the conjugation `A ρ A†`.
pub(crate) fn sandwich_local(
    rho: &CMatrix,
    left: &CMatrix,
    right: &CMatrix,
    targets: &[usize],
    num_qubits: usize,
) -> CMatrix {
    let (bases, offsets) = index_layout(targets, num_qubits);
    let d = offsets.len();
    let dim = rho.nrows();
    let mut tmp = rho.clone();
    let mut buf = vec![C64::new(0.0, 0.0); d];

    // left multiply on row indices
    for col in 0..dim {
        for &base in &bases {
            for (j, off) in offsets.iter().enumerate() {
                buf[j] = rho[(base + off, col)];
            }
            for (i, off) in offsets.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..d {
                    acc += left[(i, j)] * buf[j];
                }
                tmp[(base + off, col)] = acc;
            }
        }
    }

    // right multiply by B† on column indices
    let mut out = tmp.clone();
    for row in 0..dim {
        for &base in &bases {
            for (j, off) in offsets.iter().enumerate() {
                buf[j] = tmp[(row, base + off)];
            }
            for (i, off) in offsets.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..d {
                    acc += buf[j] * right[(i, j)].conj();
                }
                out[(row, base + off)] = acc;
            }
        }
    }
    out
}
