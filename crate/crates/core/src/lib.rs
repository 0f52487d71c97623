//! Exact small-register quantum simulation driving quantum-assisted
//! networking services: teleportation, superdense coding, entanglement
//! swapping, switch-activated channels, W-state medium access and
//! switch-augmented routing, on top of a deterministic discrete-event engine.

use std::fmt;

use serde::{Deserialize, Serialize};

pub mod channels;
pub mod netsim;
pub mod protocols;
pub mod qsim;
pub mod services;

/// Identifier of a network node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}
