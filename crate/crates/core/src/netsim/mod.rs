//! Deterministic discrete-event engine: nodes, classical links with integer
//! latency, heralded quantum links, and a ledger of every classical bit the
//! quantum protocols put on the wire.

mod engine;
mod ledger;
pub mod sessions;
mod topology;

pub use engine::{Engine, Event, EventHandler, EventKind, EventPayload, RunAborted, RunReport};
pub use ledger::{
    ClassicalLedger, ClassicalMessage, LedgerEntry, MessageContent, MessagePurpose, SignalingScope,
};
pub use topology::{ClassicalLink, QuantumLink, Topology};

use thiserror::Error;

use crate::channels::ChannelError;
use crate::protocols::ProtocolError;
use crate::NodeId;

/// Simulation time in integer ticks.
pub type Tick = u64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("cannot schedule at t={time}, clock is already at t={now}")]
    PastEvent { time: Tick, now: Tick },
    #[error("no classical route from {from} to {to}")]
    Unreachable { from: NodeId, to: NodeId },
    #[error("host-to-host message between non-adjacent {from} and {to}")]
    NotAdjacent { from: NodeId, to: NodeId },
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown quantum link #{0}")]
    UnknownLink(usize),
    #[error("route {0:?} does not follow live classical links")]
    BadRoute(Vec<NodeId>),
    #[error("invalid topology: {}", .0.join("; "))]
    InvalidTopology(Vec<String>),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("{0}")]
    Handler(String),
}

pub type Result<T> = std::result::Result<T, NetError>;
