use std::fmt::Write as _;

use rand::Rng;

use super::{
    c, check_targets, hermitian_eigenvalues, max_abs_diff, projector, sandwich_local,
    spectrum_entropy, tol, CMatrix, GateSpec, QsimError, Result, C64, MAX_QUBITS,
};

/// Density matrix of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    num_qubits: usize,
    matrix: CMatrix,
}

/// Result of a single computational-basis measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementOutcome {
    pub qubit: usize,
    pub bit: u8,
    /// Born-rule probability of `bit` in the pre-measurement state.
    pub probability: f64,
}

fn check_capacity(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(QsimError::Capacity {
            requested: n,
            max: MAX_QUBITS,
        });
    }
    Ok(())
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(QsimError::DimensionMismatch {
            expected: dim.next_power_of_two().max(2),
            found: dim,
        });
    }
    let n = dim.trailing_zeros() as usize;
    check_capacity(n)?;
    Ok(n)
}

impl QuantumState {
    /// Computational-basis state `|init⟩⟨init|`.
    pub fn new_register(n: usize, init: &str) -> Result<Self> {
        check_capacity(n)?;
        if init.len() != n || !init.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(QsimError::InvalidBitstring(init.to_owned()));
        }
        let index = usize::from_str_radix(init, 2).expect("validated bitstring");
        let dim = 1usize << n;
        let mut matrix = CMatrix::zeros(dim, dim);
        matrix[(index, index)] = c(1.0, 0.0);
        Ok(Self {
            num_qubits: n,
            matrix,
        })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new_register(n, &"0".repeat(n))
    }

    /// Pure state from (not necessarily normalised) amplitudes.
    pub fn from_amplitudes(amplitudes: &[C64]) -> Result<Self> {
        let n = qubits_for_dim(amplitudes.len())?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < tol::BRANCH {
            return Err(QsimError::Invariant("zero state vector".into()));
        }
        let v: Vec<C64> = amplitudes.iter().map(|a| a / norm).collect();
        Ok(Self {
            num_qubits: n,
            matrix: projector(&v),
        })
    }

    /// Wraps an explicit density matrix after checking every invariant.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(QsimError::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let num_qubits = qubits_for_dim(matrix.nrows())?;
        let state = Self { num_qubits, matrix };
        state.check_invariants()?;
        Ok(state)
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        let num_qubits = matrix.nrows().trailing_zeros() as usize;
        Self { num_qubits, matrix }
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_capacity(n)?;
        let dim = 1usize << n;
        Ok(Self {
            num_qubits: n,
            matrix: CMatrix::identity(dim, dim) / c(dim as f64, 0.0),
        })
    }

    /// Pure qubit `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
    pub fn bloch(theta: f64, phi: f64) -> Self {
        let a = c((theta / 2.0).cos(), 0.0);
        let b = C64::from_polar((theta / 2.0).sin(), phi);
        Self::from_amplitudes(&[a, b]).expect("qubit amplitudes")
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        let m = &self.matrix;
        // Tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
        m.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Trace one, Hermitian and positive semidefinite, all within `STRUCTURAL`.
    pub fn check_invariants(&self) -> Result<()> {
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > tol::STRUCTURAL || tr.im.abs() > tol::STRUCTURAL {
            return Err(QsimError::Invariant(format!("trace {tr}")));
        }
        let herm = max_abs_diff(&self.matrix, &self.matrix.adjoint());
        if herm > tol::STRUCTURAL {
            return Err(QsimError::Invariant(format!("hermiticity defect {herm:e}")));
        }
        let min = self.eigenvalues().first().copied().unwrap_or(0.0);
        if min < -tol::STRUCTURAL {
            return Err(QsimError::Invariant(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// `self ⊗ other`, with `self`'s qubits first.
    pub fn tensor(&self, other: &QuantumState) -> Result<Self> {
        check_capacity(self.num_qubits + other.num_qubits)?;
        Ok(Self {
            num_qubits: self.num_qubits + other.num_qubits,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    /// `ρ → UρU†`.
    pub fn apply_unitary(&self, gate: &GateSpec) -> Result<Self> {
        gate.validate(self.num_qubits)?;
        let u = gate.matrix();
        Ok(self.conjugate_local(&u, &gate.targets))
    }

    pub fn apply_gates<'a>(&self, gates: impl IntoIterator<Item = &'a GateSpec>) -> Result<Self> {
        let mut out = self.clone();
        for g in gates {
            out = out.apply_unitary(g)?;
        }
        Ok(out)
    }

    /// `ρ → AρA†` for an arbitrary local operator; targets must already be valid.
    pub(crate) fn conjugate_local(&self, op: &CMatrix, targets: &[usize]) -> Self {
        Self {
            num_qubits: self.num_qubits,
            matrix: sandwich_local(&self.matrix, op, op, targets, self.num_qubits),
        }
    }

    /// Born probability of reading `bit` on `qubit`.
    pub fn probability(&self, qubit: usize, bit: u8) -> Result<f64> {
        check_targets(&[qubit], self.num_qubits)?;
        let mask = 1usize << (self.num_qubits - 1 - qubit);
        let p1: f64 = (0..self.dim())
            .filter(|i| i & mask != 0)
            .map(|i| self.matrix[(i, i)].re)
            .sum();
        let p1 = p1.clamp(0.0, 1.0);
        Ok(if bit == 1 { p1 } else { 1.0 - p1 })
    }

    /// Projects `qubit` onto `bit` and renormalises. Returns the branch
    /// probability with the post-measurement state.
    pub fn project(&self, qubit: usize, bit: u8) -> Result<(f64, Self)> {
        let p = self.probability(qubit, bit)?;
        if p < tol::BRANCH {
            return Err(QsimError::RenormalizationGuard(p));
        }
        let mask = 1usize << (self.num_qubits - 1 - qubit);
        let want = if bit == 1 { mask } else { 0 };
        let dim = self.dim();
        let matrix = CMatrix::from_fn(dim, dim, |r, col| {
            if r & mask == want && col & mask == want {
                self.matrix[(r, col)] / p
            } else {
                c(0.0, 0.0)
            }
        });
        Ok((
            p,
            Self {
                num_qubits: self.num_qubits,
                matrix,
            },
        ))
    }

    /// Computational-basis measurement of one qubit. The measured qubit stays
    /// in the register, collapsed.
    pub fn measure<R: Rng + ?Sized>(
        &self,
        qubit: usize,
        rng: &mut R,
    ) -> Result<(MeasurementOutcome, Self)> {
        let p1 = self.probability(qubit, 1)?;
        let u: f64 = rng.random();
        let bit = u8::from(u < p1);
        let (probability, post) = self.project(qubit, bit)?;
        Ok((
            MeasurementOutcome {
                qubit,
                bit,
                probability,
            },
            post,
        ))
    }

    /// Reduced state on `keep`, in ascending qubit order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(QsimError::EmptyKeep);
        }
        check_targets(keep, self.num_qubits)?;
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        if keep.len() == self.num_qubits {
            return Ok(self.clone());
        }
        let traced: Vec<usize> = (0..self.num_qubits).filter(|q| !keep.contains(q)).collect();
        let (_, kept_bases) = super::index_layout(&keep, self.num_qubits);
        let (_, traced_bases) = super::index_layout(&traced, self.num_qubits);
        let dk = kept_bases.len();
        let mut out = CMatrix::zeros(dk, dk);
        for (a, &ka) in kept_bases.iter().enumerate() {
            for (b, &kb) in kept_bases.iter().enumerate() {
                let mut acc = c(0.0, 0.0);
                for &t in &traced_bases {
                    acc += self.matrix[(ka | t, kb | t)];
                }
                out[(a, b)] = acc;
            }
        }
        Ok(Self {
            num_qubits: keep.len(),
            matrix: out,
        })
    }

    /// Von Neumann entropy in bits.
    pub fn von_neumann_entropy(&self) -> Result<f64> {
        spectrum_entropy(&self.eigenvalues())
    }

    /// `⟨ψ|ρ|ψ⟩` against a pure reference.
    pub fn fidelity(&self, reference: &QuantumState) -> Result<f64> {
        if reference.dim() != self.dim() {
            return Err(QsimError::DimensionMismatch {
                expected: self.dim(),
                found: reference.dim(),
            });
        }
        let purity = reference.purity();
        if (purity - 1.0).abs() > tol::STRUCTURAL {
            return Err(QsimError::NotPure(purity));
        }
        Ok(overlap(&self.matrix, &reference.matrix).clamp(0.0, 1.0))
    }

    /// Row-major dump as `re,im` pairs, one matrix row per line.
    pub fn dump(&self) -> String {
        let mut s = format!("qubits {}\n", self.num_qubits);
        for r in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|col| {
                    let z = self.matrix[(r, col)];
                    format!("({:.12e},{:.12e})", z.re, z.im)
                })
                .collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }
}

/// `Tr(ρσ)` for Hermitian arguments.
pub(crate) fn overlap(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    let d = rho.nrows();
    let mut acc = c(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += rho[(i, j)] * sigma[(j, i)];
        }
    }
    acc.re
}
