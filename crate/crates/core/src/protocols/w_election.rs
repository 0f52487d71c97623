use rand::Rng;

use super::{EntangledResource, ProtocolError, ResourceKind, ResourceStatus, Result};
use crate::NodeId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElectionOutcome {
    /// Position of the elected node among the resource holders.
    pub winner: usize,
    pub winner_node: NodeId,
    /// Local measurement result of every holder, in holder order.
    pub outcomes: Vec<u8>,
}

/// Every holder measures its W-state qubit; the single holder that reads `1`
/// is elected. No classical message is involved. The resource is consumed.
pub fn w_election_round<R: Rng + ?Sized>(
    resource: &mut EntangledResource,
    rng: &mut R,
) -> Result<ElectionOutcome> {
    let n = match resource.kind {
        ResourceKind::WState(n) => n,
        _ => {
            return Err(ProtocolError::ResourceShape {
                expected: resource.holders.len(),
                found: resource.num_qubits(),
            })
        }
    };
    resource.require_usable(n)?;
    resource.status = ResourceStatus::Consumed;

    let mut state = resource.state.clone();
    let mut outcomes = Vec::with_capacity(n);
    for q in 0..n {
        let (o, post) = state.measure(q, rng)?;
        outcomes.push(o.bit);
        state = post;
    }
    resource.state = state;

    let winner = outcomes
        .iter()
        .position(|&b| b == 1)
        .ok_or_else(|| ProtocolError::MessageMismatch("W measurement produced no 1".into()))?;
    Ok(ElectionOutcome {
        winner,
        winner_node: resource.holders[winner],
        outcomes,
    })
}
