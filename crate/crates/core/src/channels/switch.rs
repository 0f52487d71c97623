use super::{ChannelError, ChannelModel, Result};
use crate::qsim::{c, projector, CMatrix, QuantumState};

fn require_qubit(ch: &ChannelModel) -> Result<()> {
    if ch.dim_in() != 2 || ch.dim_out() != 2 {
        let bad = if ch.dim_in() != 2 {
            ch.dim_in()
        } else {
            ch.dim_out()
        };
        return Err(ChannelError::UnsupportedDimension(bad));
    }
    Ok(())
}

/// The switch as a channel on `system ⊗ control` (system qubit first).
///
/// Control `|0⟩` runs `c1` then `c2`; control `|1⟩` runs `c2` then `c1`.
/// Kraus operators are `W_ij = K2_i K1_j ⊗ |0⟩⟨0| + K1_j K2_i ⊗ |1⟩⟨1|`.
pub fn switch_joint(c1: &ChannelModel, c2: &ChannelModel) -> Result<ChannelModel> {
    require_qubit(c1)?;
    require_qubit(c2)?;
    let p0 = projector(&[c(1.0, 0.0), c(0.0, 0.0)]);
    let p1 = projector(&[c(0.0, 0.0), c(1.0, 0.0)]);
    let mut kraus = Vec::with_capacity(c1.kraus_ops().len() * c2.kraus_ops().len());
    for k2 in c2.kraus_ops() {
        for k1 in c1.kraus_ops() {
            let forward = k2 * k1;
            let backward = k1 * k2;
            kraus.push(forward.kronecker(&p0) + backward.kronecker(&p1));
        }
    }
    ChannelModel::new(kraus)
}

/// The switch fed with a fixed control state: a channel from the system
/// qubit to `system ⊗ control`.
pub fn quantum_switch(
    c1: &ChannelModel,
    c2: &ChannelModel,
    control: &QuantumState,
) -> Result<ChannelModel> {
    if control.num_qubits() != 1 {
        return Err(ChannelError::DimensionMismatch {
            expected: 2,
            found: control.dim(),
        });
    }
    control.check_invariants()?;
    let joint = switch_joint(c1, c2)?;

    // |ψ⟩ → |ψ⟩ ⊗ √λ_k |c_k⟩ for each eigenpair of the control state.
    let eig = control.matrix().clone().symmetric_eigen();
    let id = CMatrix::identity(2, 2);
    let attach: Vec<CMatrix> = (0..2)
        .filter(|&k| eig.eigenvalues[k] > 1e-14)
        .map(|k| {
            let v = eig.eigenvectors.column(k).into_owned() * c(eig.eigenvalues[k].sqrt(), 0.0);
            id.kronecker(&v)
        })
        .collect();

    let kraus = joint
        .kraus_ops()
        .iter()
        .flat_map(|w| attach.iter().map(move |a| w * a))
        .collect();
    ChannelModel::new(kraus)
}
