use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{c, check_targets, CMatrix, QsimError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> CMatrix {
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        match self {
            Pauli::I => CMatrix::identity(2, 2),
            Pauli::X => CMatrix::from_row_slice(2, 2, &[z, one, one, z]),
            Pauli::Y => CMatrix::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
            Pauli::Z => CMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    I,
    X,
    Y,
    Z,
    H,
    /// Targets are `[control, target]`.
    Cnot,
    Cz,
    /// Applies the Pauli on `targets[1]` when `targets[0]` is set.
    ControlledPauli(Pauli),
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::I | GateKind::X | GateKind::Y | GateKind::Z | GateKind::H => 1,
            GateKind::Cnot | GateKind::Cz | GateKind::ControlledPauli(_) => 2,
        }
    }

    pub fn matrix(self) -> CMatrix {
        match self {
            GateKind::I => Pauli::I.matrix(),
            GateKind::X => Pauli::X.matrix(),
            GateKind::Y => Pauli::Y.matrix(),
            GateKind::Z => Pauli::Z.matrix(),
            GateKind::H => {
                let h = c(FRAC_1_SQRT_2, 0.0);
                CMatrix::from_row_slice(2, 2, &[h, h, h, -h])
            }
            GateKind::Cnot => controlled(&Pauli::X.matrix()),
            GateKind::Cz => controlled(&Pauli::Z.matrix()),
            GateKind::ControlledPauli(p) => controlled(&p.matrix()),
        }
    }
}

fn controlled(u: &CMatrix) -> CMatrix {
    let mut m = CMatrix::identity(4, 4);
    m.view_mut((2, 2), (2, 2)).copy_from(u);
    m
}

/// A named gate bound to an ordered list of qubits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateSpec {
    pub kind: GateKind,
    pub targets: Vec<usize>,
}

impl GateSpec {
    pub fn new(kind: GateKind, targets: Vec<usize>) -> Self {
        Self { kind, targets }
    }

    pub fn single(kind: GateKind, q: usize) -> Self {
        Self::new(kind, vec![q])
    }

    pub fn x(q: usize) -> Self {
        Self::single(GateKind::X, q)
    }

    pub fn z(q: usize) -> Self {
        Self::single(GateKind::Z, q)
    }

    pub fn h(q: usize) -> Self {
        Self::single(GateKind::H, q)
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::new(GateKind::Cnot, vec![control, target])
    }

    pub fn matrix(&self) -> CMatrix {
        self.kind.matrix()
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        if self.targets.len() != self.kind.arity() {
            return Err(QsimError::GateArity {
                gate: self.kind.to_string(),
                expected: self.kind.arity(),
                found: self.targets.len(),
            });
        }
        check_targets(&self.targets, num_qubits)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateKind::ControlledPauli(p) => write!(f, "C{p:?}"),
            GateKind::Cnot => f.write_str("CNOT"),
            GateKind::Cz => f.write_str("CZ"),
            other => write!(f, "{other:?}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{max_abs_diff, tol};

    #[test]
    fn every_gate_is_unitary() {
        let kinds = [
            GateKind::I,
            GateKind::X,
            GateKind::Y,
            GateKind::Z,
            GateKind::H,
            GateKind::Cnot,
            GateKind::Cz,
            GateKind::ControlledPauli(Pauli::Y),
        ];
        for k in kinds {
            let u = k.matrix();
            let id = CMatrix::identity(u.nrows(), u.ncols());
            assert!(max_abs_diff(&(u.adjoint() * &u), &id) < tol::UNITARY, "{k}");
        }
    }

    #[test]
    fn target_validation() {
        assert!(GateSpec::cnot(0, 1).validate(2).is_ok());
        assert_eq!(
            GateSpec::cnot(1, 1).validate(2),
            Err(QsimError::DuplicateTarget(1))
        );
        assert!(matches!(
            GateSpec::h(3).validate(2),
            Err(QsimError::Index { qubit: 3, .. })
        ));
        assert!(matches!(
            GateSpec::new(GateKind::H, vec![0, 1]).validate(2),
            Err(QsimError::GateArity { .. })
        ));
    }
}
