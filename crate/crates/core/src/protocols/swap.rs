use rand::Rng;

use super::{
    bell_measure, pauli_frame, CorrectionMessage, CorrectionPurpose, EntangledResource,
    ProtocolError, ResourceKind, ResourceStatus, Result,
};
use crate::qsim::QuantumState;

/// Swap after the middle node's Bell measurement. The correction is applied
/// at the right-hand end node.
#[derive(Debug, Clone)]
pub struct PendingSwap {
    joint: QuantumState,
    resource: EntangledResource,
    middle: crate::NodeId,
}

impl PendingSwap {
    fn outer_state(&self) -> Result<QuantumState> {
        Ok(self.joint.partial_trace(&[0, 3])?)
    }

    /// Applies the correction at the right-hand end node.
    pub fn complete(mut self, msg: &CorrectionMessage) -> Result<EntangledResource> {
        let target = self.resource.holders[1];
        if msg.purpose != CorrectionPurpose::Swap
            || msg.target != target
            || msg.origin != self.middle
        {
            return Err(ProtocolError::MessageMismatch(format!(
                "unexpected correction {}",
                msg.wire()
            )));
        }
        self.resource.state = pauli_frame(&self.outer_state()?, msg.bits, 1)?;
        self.resource.status = ResourceStatus::Fresh;
        self.resource.refresh_fidelity();
        Ok(self.resource)
    }

    /// The end-to-end pair as it stands without the correction; flagged so
    /// that no protocol will use it.
    pub fn abandon(mut self) -> Result<EntangledResource> {
        self.resource.state = self.outer_state()?;
        self.resource.status = ResourceStatus::Uncorrected;
        self.resource.refresh_fidelity();
        Ok(self.resource)
    }
}

/// Middle node Bell-measures its halves of `left = (A, B)` and `right = (B, C)`.
/// The correction message always goes out, whatever the outcome.
pub fn swap_measure<R: Rng + ?Sized>(
    left: EntangledResource,
    right: EntangledResource,
    rng: &mut R,
) -> Result<(CorrectionMessage, PendingSwap)> {
    left.require_usable(2)?;
    right.require_usable(2)?;
    let middle = left.holders[1];
    if right.holders[0] != middle {
        return Err(ProtocolError::NoSharedNode);
    }
    let joint = left.state.tensor(&right.state)?;
    let (bits, joint) = bell_measure(&joint, 1, 2, rng)?;
    let (a, c) = (left.holders[0], right.holders[1]);
    let msg = CorrectionMessage {
        bits,
        origin: middle,
        target: c,
        purpose: CorrectionPurpose::Swap,
    };
    let resource = EntangledResource {
        state: QuantumState::maximally_mixed(2)?,
        kind: ResourceKind::BellPhiPlus,
        holders: vec![a, c],
        status: ResourceStatus::Uncorrected,
        fidelity: None,
    };
    Ok((
        msg,
        PendingSwap {
            joint,
            resource,
            middle,
        },
    ))
}

/// Entanglement swapping with the correction carried by `signal`. A lost
/// correction yields a resource flagged [`ResourceStatus::Uncorrected`].
pub fn entanglement_swap<R, F>(
    left: EntangledResource,
    right: EntangledResource,
    rng: &mut R,
    signal: F,
) -> Result<EntangledResource>
where
    R: Rng + ?Sized,
    F: FnOnce(CorrectionMessage) -> Option<CorrectionMessage>,
{
    let (msg, pending) = swap_measure(left, right, rng)?;
    match signal(msg) {
        Some(delivered) => pending.complete(&delivered),
        None => pending.abandon(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{bell_state, haar_qubit, teleport, werner_state};
    use crate::qsim::max_abs_diff;
    use crate::NodeId;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pair(a: u32, b: u32) -> EntangledResource {
        EntangledResource::bell_pair(NodeId(a), NodeId(b))
    }

    #[test]
    fn ideal_swap_every_outcome() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..64 {
            let mut sent = None;
            let out = entanglement_swap(pair(0, 1), pair(1, 2), &mut rng, |m| {
                sent = Some(m);
                Some(m)
            })
            .unwrap();
            assert_eq!(out.holders, vec![NodeId(0), NodeId(2)]);
            assert!((out.fidelity.unwrap() - 1.0).abs() < 1e-10);
            let m = sent.expect("correction is always emitted");
            assert_eq!(m.origin, NodeId(1));
            assert_eq!(m.target, NodeId(2));
        }
    }

    #[test]
    fn werner_parameter_propagates() {
        // 4-qubit oracle: the swapped pair of Werner(w1) and Werner(w2)
        // is Werner(w1·w2).
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (w1, w2) in [(0.7, 1.0), (0.9, 0.6), (0.3, 0.3)] {
            for _ in 0..8 {
                let l = EntangledResource::werner(w1, NodeId(0), NodeId(1));
                let r = EntangledResource::werner(w2, NodeId(1), NodeId(2));
                let out = entanglement_swap(l, r, &mut rng, Some).unwrap();
                let expect = werner_state(w1 * w2);
                assert!(max_abs_diff(out.state.matrix(), expect.matrix()) < 1e-9);
                let f = (1.0 + 3.0 * w1 * w2) / 4.0;
                assert!((out.fidelity.unwrap() - f).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn outcome_frequencies_are_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let trials = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..trials {
            let (m, _) = swap_measure(pair(0, 1), pair(1, 2), &mut rng).unwrap();
            counts[m.bits.value() as usize] += 1;
        }
        for c in counts {
            let f = c as f64 / trials as f64;
            assert!((f - 0.25).abs() < 0.01, "{f}");
        }
    }

    #[test]
    fn lost_correction_leaves_unusable_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let out = entanglement_swap(pair(0, 1), pair(1, 2), &mut rng, |_| None).unwrap();
        assert_eq!(out.status, ResourceStatus::Uncorrected);
        let psi = haar_qubit(&mut rng);
        assert_eq!(
            teleport(&psi, out, &mut rng, Some).unwrap_err(),
            ProtocolError::ResourceUncorrected
        );
    }

    #[test]
    fn uncorrected_pair_is_some_bell_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (m, pending) = swap_measure(pair(0, 1), pair(1, 2), &mut rng).unwrap();
        let raw = pending.abandon().unwrap();
        let f = raw.state.fidelity(&bell_state(m.bits)).unwrap();
        assert!((f - 1.0).abs() < 1e-10);
    }

    #[test]
    fn requires_shared_middle() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            swap_measure(pair(0, 1), pair(2, 3), &mut rng).unwrap_err(),
            ProtocolError::NoSharedNode
        );
    }
}
