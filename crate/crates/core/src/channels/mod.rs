//! CPTP channels as Kraus sets, their serial and switched composition, and
//! Holevo-information estimates of the classical rate they support.

mod holevo;
mod spec;
mod switch;

pub use holevo::{
    best_over_polar_grid, bottleneck_check, holevo_information, BottleneckReport, CapacityEstimate,
    ControlBasis, ControlReadout, Ensemble, POLAR_GRID_POINTS,
};
pub use spec::ChannelSpec;
pub use switch::{quantum_switch, switch_joint};

use thiserror::Error;

use crate::qsim::{
    c, check_targets, hermitian_eigenvalues, max_abs_diff, sandwich_local, tol, CMatrix, Pauli,
    QsimError, QuantumState,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error(transparent)]
    Qsim(#[from] QsimError),
    #[error("Kraus set is not complete (defect {0:e})")]
    Incomplete(f64),
    #[error("channel needs at least one Kraus operator")]
    Empty,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unsupported dimension {0}: only qubit channels are supported here")]
    UnsupportedDimension(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
}

pub type Result<T> = std::result::Result<T, ChannelError>;

/// A completely positive trace-preserving map `ρ → Σ Kᵢ ρ Kᵢ†`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMatrix>,
}

impl ChannelModel {
    /// Builds a channel and checks `Σ Kᵢ†Kᵢ = I`.
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or(ChannelError::Empty)?;
        let (dim_out, dim_in) = first.shape();
        for k in &kraus {
            if k.shape() != (dim_out, dim_in) {
                return Err(ChannelError::DimensionMismatch {
                    expected: dim_out * dim_in,
                    found: k.nrows() * k.ncols(),
                });
            }
        }
        let ch = Self {
            dim_in,
            dim_out,
            kraus,
        };
        let defect = ch.completeness_defect();
        if defect > tol::STRUCTURAL {
            return Err(ChannelError::Incomplete(defect));
        }
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim_in: dim,
            dim_out: dim,
            kraus: vec![CMatrix::identity(dim, dim)],
        }
    }

    /// Qubit depolarizing channel, `ρ → (1−p)ρ + p·I/2`.
    pub fn depolarizing(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(ChannelError::InvalidParameter(format!(
                "depolarizing parameter {p} outside [0, 1]"
            )));
        }
        let weights = [1.0 - 0.75 * p, p / 4.0, p / 4.0, p / 4.0];
        let kraus = Pauli::ALL
            .iter()
            .zip(weights)
            .filter(|(_, w)| *w > 0.0)
            .map(|(pauli, w)| pauli.matrix() * c(w.sqrt(), 0.0))
            .collect();
        Self::new(kraus)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// `max |Σ Kᵢ†Kᵢ − I|`.
    pub fn completeness_defect(&self) -> f64 {
        let sum = self
            .kraus
            .iter()
            .fold(CMatrix::zeros(self.dim_in, self.dim_in), |acc, k| {
                acc + k.adjoint() * k
            });
        max_abs_diff(&sum, &CMatrix::identity(self.dim_in, self.dim_in))
    }

    /// Applies the channel to the whole register.
    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        if state.dim() != self.dim_in {
            return Err(ChannelError::DimensionMismatch {
                expected: self.dim_in,
                found: state.dim(),
            });
        }
        let rho = state.matrix();
        let out = self
            .kraus
            .iter()
            .fold(CMatrix::zeros(self.dim_out, self.dim_out), |acc, k| {
                acc + k * rho * k.adjoint()
            });
        Ok(QuantumState::from_matrix_unchecked(out))
    }

    /// Applies the channel to the subsystem `targets` of `state`. The channel
    /// must be square on that subsystem unless `targets` covers the register.
    pub fn apply_to(&self, state: &QuantumState, targets: &[usize]) -> Result<QuantumState> {
        check_targets(targets, state.num_qubits())?;
        let n = state.num_qubits();
        if targets.len() == n && targets.iter().enumerate().all(|(i, &q)| i == q) {
            return self.apply(state);
        }
        let sub_dim = 1usize << targets.len();
        if self.dim_in != sub_dim || self.dim_out != sub_dim {
            return Err(ChannelError::DimensionMismatch {
                expected: sub_dim,
                found: if self.dim_in != sub_dim {
                    self.dim_in
                } else {
                    self.dim_out
                },
            });
        }
        let rho = state.matrix();
        let out = self
            .kraus
            .iter()
            .fold(CMatrix::zeros(rho.nrows(), rho.ncols()), |acc, k| {
                acc + sandwich_local(rho, k, k, targets, n)
            });
        Ok(QuantumState::from_matrix_unchecked(out))
    }

    /// `second ∘ first`: apply `first`, then `second`.
    pub fn compose_serial(first: &ChannelModel, second: &ChannelModel) -> Result<Self> {
        if first.dim_out != second.dim_in {
            return Err(ChannelError::DimensionMismatch {
                expected: first.dim_out,
                found: second.dim_in,
            });
        }
        let kraus = first
            .kraus
            .iter()
            .flat_map(|k1| second.kraus.iter().map(move |k2| k2 * k1))
            .collect();
        Ok(Self {
            dim_in: first.dim_in,
            dim_out: second.dim_out,
            kraus,
        })
    }

    /// Parallel use `self ⊗ other` on a product input.
    pub fn tensor(&self, other: &ChannelModel) -> Self {
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| other.kraus.iter().map(move |b| a.kronecker(b)))
            .collect();
        Self {
            dim_in: self.dim_in * other.dim_in,
            dim_out: self.dim_out * other.dim_out,
            kraus,
        }
    }

    /// Choi matrix `Σ_ij |i⟩⟨j| ⊗ C(|i⟩⟨j|)`.
    pub fn choi(&self) -> CMatrix {
        let (din, dout) = (self.dim_in, self.dim_out);
        let mut j = CMatrix::zeros(din * dout, din * dout);
        for k in &self.kraus {
            for i in 0..din {
                for i2 in 0..din {
                    for o in 0..dout {
                        for o2 in 0..dout {
                            j[(i * dout + o, i2 * dout + o2)] += k[(o, i)] * k[(o2, i2)].conj();
                        }
                    }
                }
            }
        }
        j
    }

    /// Equivalent channel with at most `dim_in·dim_out` Kraus operators,
    /// read off the Choi eigendecomposition.
    pub fn minimal(&self) -> Self {
        if self.kraus.len() <= 1 {
            return self.clone();
        }
        let (din, dout) = (self.dim_in, self.dim_out);
        let eig = self.choi().symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let kraus: Vec<CMatrix> = order
            .into_iter()
            .filter(|&idx| eig.eigenvalues[idx] > 1e-14)
            .map(|idx| {
                let scale = c(eig.eigenvalues[idx].sqrt(), 0.0);
                let v = eig.eigenvectors.column(idx);
                CMatrix::from_fn(dout, din, |o, i| v[i * dout + o] * scale)
            })
            .collect();
        if kraus.is_empty() {
            return self.clone();
        }
        Self {
            dim_in: din,
            dim_out: dout,
            kraus,
        }
    }

    /// Largest deviation between the two channels' Choi matrices.
    pub fn action_distance(&self, other: &ChannelModel) -> Result<f64> {
        if (self.dim_in, self.dim_out) != (other.dim_in, other.dim_out) {
            return Err(ChannelError::DimensionMismatch {
                expected: self.dim_in * self.dim_out,
                found: other.dim_in * other.dim_out,
            });
        }
        Ok(max_abs_diff(&self.choi(), &other.choi()))
    }

    /// Whether the Choi matrix is positive within tolerance (complete positivity).
    pub fn is_completely_positive(&self) -> bool {
        hermitian_eigenvalues(&self.choi())
            .first()
            .is_none_or(|&l| l > -tol::STRUCTURAL)
    }
}

#[cfg(test)]
pub(crate) mod tests;
