//! Networking services built on quantum resources: a qubit-based physical
//! bit service, W-state medium access against a contention baseline, and
//! multipath routing that superposes two link-disjoint paths.

pub mod mac;
mod phy;
pub mod routing;

pub use mac::{run_mac_sim, MacConfig, MacMetrics, MacProtocol};
pub use phy::{phy_effective_rate, phy_rate_on_grid, PhyMode};
pub use routing::{
    route_max_bottleneck, route_with_switch_merging, PlanMode, RoutingOptions, TrajectoryPlan,
};

use thiserror::Error;

use crate::channels::ChannelError;
use crate::netsim::NetError;
use crate::protocols::ProtocolError;
use crate::NodeId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ServiceError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("{mode:?} mode takes {expected} link(s), got {found}")]
    LinkCount {
        mode: PhyMode,
        expected: usize,
        found: usize,
    },
    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("source and destination are both {0}")]
    SameEndpoints(NodeId),
}

pub type Result<T> = std::result::Result<T, ServiceError>;
