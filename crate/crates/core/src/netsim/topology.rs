use std::collections::BTreeSet;

use super::{NetError, Result, Tick};
use crate::channels::ChannelModel;
use crate::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassicalLink {
    pub a: NodeId,
    pub b: NodeId,
    pub latency: Tick,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumLink {
    pub a: NodeId,
    pub b: NodeId,
    /// Noise applied to each half of a freshly generated pair.
    pub channel: ChannelModel,
    pub gen_success_prob: f64,
    pub attempt_period: Tick,
}

impl QuantumLink {
    pub fn new(a: NodeId, b: NodeId, channel: ChannelModel) -> Self {
        Self {
            a,
            b,
            channel,
            gen_success_prob: 1.0,
            attempt_period: 1,
        }
    }

    pub fn with_generation(mut self, success_prob: f64, period: Tick) -> Self {
        self.gen_success_prob = success_prob;
        self.attempt_period = period;
        self
    }

    pub fn connects(&self, x: NodeId, y: NodeId) -> bool {
        (self.a == x && self.b == y) || (self.a == y && self.b == x)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Topology {
    pub nodes: Vec<NodeId>,
    pub classical_links: Vec<ClassicalLink>,
    pub quantum_links: Vec<QuantumLink>,
}

impl Topology {
    pub fn new(nodes: impl IntoIterator<Item = NodeId>) -> Self {
        Self {
            nodes: nodes.into_iter().collect(),
            ..Self::default()
        }
    }

    /// Nodes `0..n` with no links.
    pub fn with_nodes(n: u32) -> Self {
        Self::new((0..n).map(NodeId))
    }

    pub fn classical(mut self, a: u32, b: u32, latency: Tick) -> Self {
        self.classical_links.push(ClassicalLink {
            a: NodeId(a),
            b: NodeId(b),
            latency,
        });
        self
    }

    pub fn quantum(mut self, link: QuantumLink) -> Self {
        self.quantum_links.push(link);
        self
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.nodes.contains(&n)
    }

    /// Index of the first quantum link joining `x` and `y`.
    pub fn quantum_link_between(&self, x: NodeId, y: NodeId) -> Option<usize> {
        self.quantum_links.iter().position(|l| l.connects(x, y))
    }

    /// Checks every structural invariant and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        let mut seen = BTreeSet::new();
        for n in &self.nodes {
            if !seen.insert(*n) {
                errs.push(format!("duplicate node {n}"));
            }
        }
        if self.nodes.is_empty() {
            errs.push("no nodes".into());
        }
        for (i, l) in self.classical_links.iter().enumerate() {
            for end in [l.a, l.b] {
                if !seen.contains(&end) {
                    errs.push(format!("classical link #{i}: unknown endpoint {end}"));
                }
            }
            if l.a == l.b {
                errs.push(format!("classical link #{i}: self-loop at {}", l.a));
            }
            if l.latency == 0 {
                errs.push(format!("classical link #{i}: latency must be > 0"));
            }
        }
        for (i, l) in self.quantum_links.iter().enumerate() {
            for end in [l.a, l.b] {
                if !seen.contains(&end) {
                    errs.push(format!("quantum link #{i}: unknown endpoint {end}"));
                }
            }
            if l.a == l.b {
                errs.push(format!("quantum link #{i}: self-loop at {}", l.a));
            }
            if !(0.0..=1.0).contains(&l.gen_success_prob) {
                errs.push(format!(
                    "quantum link #{i}: gen_success_prob {} outside [0, 1]",
                    l.gen_success_prob
                ));
            }
            if l.attempt_period == 0 {
                errs.push(format!("quantum link #{i}: attempt_period must be > 0"));
            }
            if l.channel.dim_in() != 2 || l.channel.dim_out() != 2 {
                errs.push(format!(
                    "quantum link #{i}: channel must act on one qubit, got {}->{}",
                    l.channel.dim_in(),
                    l.channel.dim_out()
                ));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(NetError::InvalidTopology(errs))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collects_every_violation() {
        let bad = Topology::with_nodes(2).classical(0, 5, 0).quantum(
            QuantumLink::new(NodeId(0), NodeId(0), ChannelModel::identity(4))
                .with_generation(1.5, 0),
        );
        match bad.validate() {
            Err(NetError::InvalidTopology(v)) => assert_eq!(v.len(), 6, "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn accepts_a_line() {
        let t = Topology::with_nodes(3)
            .classical(0, 1, 2)
            .classical(1, 2, 3)
            .quantum(QuantumLink::new(
                NodeId(0),
                NodeId(1),
                ChannelModel::identity(2),
            ));
        t.validate().unwrap();
        assert_eq!(t.quantum_link_between(NodeId(1), NodeId(0)), Some(0));
        assert_eq!(t.quantum_link_between(NodeId(1), NodeId(2)), None);
    }
}
