use std::fmt;

use serde::{Deserialize, Serialize};

use super::Tick;
use crate::protocols::{CorrectionMessage, CorrectionPurpose};
use crate::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SignalingScope {
    /// Between directly connected nodes only.
    HostToHost,
    /// Routed over the classical network.
    EndToEnd,
}

impl fmt::Display for SignalingScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::HostToHost => "host-to-host",
            Self::EndToEnd => "end-to-end",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MessagePurpose {
    Herald,
    TeleportCorrection,
    SwapCorrection,
    /// Contention resolution for medium access.
    Contention,
    /// Classical record of a switch control measurement.
    ControlReadout,
    Data,
}

impl fmt::Display for MessagePurpose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Herald => "herald",
            Self::TeleportCorrection => "teleport-correction",
            Self::SwapCorrection => "swap-correction",
            Self::Contention => "contention",
            Self::ControlReadout => "control-readout",
            Self::Data => "data",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MessageContent {
    Correction(CorrectionMessage),
    Herald { link: usize, success: bool },
    Opaque,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassicalMessage {
    pub origin: NodeId,
    pub target: NodeId,
    pub size_bits: u32,
    pub purpose: MessagePurpose,
    pub content: MessageContent,
}

impl ClassicalMessage {
    pub fn correction(msg: CorrectionMessage) -> Self {
        Self {
            origin: msg.origin,
            target: msg.target,
            size_bits: CorrectionMessage::SIZE_BITS,
            purpose: match msg.purpose {
                CorrectionPurpose::Teleport => MessagePurpose::TeleportCorrection,
                CorrectionPurpose::Swap => MessagePurpose::SwapCorrection,
            },
            content: MessageContent::Correction(msg),
        }
    }

    pub fn opaque(origin: NodeId, target: NodeId, size_bits: u32, purpose: MessagePurpose) -> Self {
        Self {
            origin,
            target,
            size_bits,
            purpose,
            content: MessageContent::Opaque,
        }
    }

    pub fn summary(&self) -> String {
        let body = match self.content {
            MessageContent::Correction(c) => format!(" bits={}", c.bits),
            MessageContent::Herald { link, success } => {
                format!(" link#{link} {}", if success { "ok" } else { "fail" })
            }
            MessageContent::Opaque => String::new(),
        };
        format!(
            "{}->{} {}b {}{}",
            self.origin, self.target, self.size_bits, self.purpose, body
        )
    }
}

/// One classical message as accounted by the engine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerEntry {
    pub id: u64,
    pub origin: NodeId,
    pub target: NodeId,
    pub bits: u32,
    pub scope: SignalingScope,
    pub purpose: MessagePurpose,
    pub route: Vec<NodeId>,
    pub sent_at: Tick,
    /// `None` for accounting-only messages that never produce an event.
    pub deliver_at: Option<Tick>,
    pub delivered_at: Option<Tick>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassicalLedger {
    entries: Vec<LedgerEntry>,
}

impl ClassicalLedger {
    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn get(&self, id: u64) -> Option<&LedgerEntry> {
        self.entries.get(id as usize)
    }

    pub(crate) fn get_mut(&mut self, id: u64) -> Option<&mut LedgerEntry> {
        self.entries.get_mut(id as usize)
    }

    pub(crate) fn push(&mut self, mut entry: LedgerEntry) -> u64 {
        entry.id = self.entries.len() as u64;
        let id = entry.id;
        self.entries.push(entry);
        id
    }

    pub fn bits(&self, scope: SignalingScope) -> u64 {
        self.entries
            .iter()
            .filter(|e| e.scope == scope)
            .map(|e| e.bits as u64)
            .sum()
    }

    pub fn bits_for(&self, purpose: MessagePurpose) -> u64 {
        self.entries
            .iter()
            .filter(|e| e.purpose == purpose)
            .map(|e| e.bits as u64)
            .sum()
    }

    pub fn count_for(&self, purpose: MessagePurpose) -> usize {
        self.entries.iter().filter(|e| e.purpose == purpose).count()
    }
}
