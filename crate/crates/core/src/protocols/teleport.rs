use rand::Rng;

use super::{
    bell_measure, pauli_frame, CorrectionMessage, CorrectionPurpose, EntangledResource,
    ProtocolError, ResourceStatus, Result,
};
use crate::qsim::QuantumState;
use crate::NodeId;

/// Teleportation after the source's Bell measurement, waiting for the
/// correction at the destination.
#[derive(Debug, Clone)]
pub struct PendingTeleport {
    joint: QuantumState,
    source: NodeId,
    destination: NodeId,
}

impl PendingTeleport {
    pub fn destination(&self) -> NodeId {
        self.destination
    }

    /// Applies the Pauli correction carried by `msg` and returns the
    /// destination qubit.
    pub fn complete(self, msg: &CorrectionMessage) -> Result<QuantumState> {
        if msg.purpose != CorrectionPurpose::Teleport {
            return Err(ProtocolError::MessageMismatch(format!(
                "expected a teleport correction, got {:?}",
                msg.purpose
            )));
        }
        if msg.target != self.destination || msg.origin != self.source {
            return Err(ProtocolError::MessageMismatch(format!(
                "correction {}->{} does not belong to {}->{}",
                msg.origin, msg.target, self.source, self.destination
            )));
        }
        let remote = self.joint.partial_trace(&[2])?;
        pauli_frame(&remote, msg.bits, 0)
    }
}

/// Source side: Bell-measures the payload with its half of `resource`.
///
/// Qubit order of the joint register is `(payload, source half, destination half)`.
pub fn teleport_send<R: Rng + ?Sized>(
    payload: &QuantumState,
    mut resource: EntangledResource,
    rng: &mut R,
) -> Result<(CorrectionMessage, PendingTeleport)> {
    if payload.num_qubits() != 1 {
        return Err(ProtocolError::PayloadShape(payload.num_qubits()));
    }
    resource.require_usable(2)?;
    resource.status = ResourceStatus::Consumed;
    let joint = payload.tensor(&resource.state)?;
    let (bits, joint) = bell_measure(&joint, 0, 1, rng)?;
    let (source, destination) = (resource.holders[0], resource.holders[1]);
    let msg = CorrectionMessage {
        bits,
        origin: source,
        target: destination,
        purpose: CorrectionPurpose::Teleport,
    };
    Ok((
        msg,
        PendingTeleport {
            joint,
            source,
            destination,
        },
    ))
}

/// Teleports `payload` over `resource`. `signal` carries the two-bit
/// correction; returning `None` models a message that never arrives.
pub fn teleport<R, F>(
    payload: &QuantumState,
    resource: EntangledResource,
    rng: &mut R,
    signal: F,
) -> Result<QuantumState>
where
    R: Rng + ?Sized,
    F: FnOnce(CorrectionMessage) -> Option<CorrectionMessage>,
{
    let (msg, pending) = teleport_send(payload, resource, rng)?;
    let delivered = signal(msg).ok_or(ProtocolError::SignalTimeout(CorrectionPurpose::Teleport))?;
    pending.complete(&delivered)
}
