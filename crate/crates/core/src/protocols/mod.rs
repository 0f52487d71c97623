//! Entanglement-based communication protocols over exact density matrices.
//!
//! Every protocol that needs classical signaling takes a `signal` callback:
//! the callback receives the outgoing [`CorrectionMessage`] and returns the
//! message as delivered to the far end, or `None` when it never arrives.
//! The two-phase variants (`*_send`/`complete`) let an event engine put real
//! latency between the phases.

mod resource;
mod superdense;
mod swap;
mod teleport;
mod w_election;

pub use resource::{
    bell_state, haar_qubit, make_bell_pair, make_w_state, werner_state, EntangledResource,
    ResourceKind, ResourceStatus, MAX_W_NODES, MIN_W_NODES,
};
pub use superdense::{superdense_decode, superdense_encode};
pub use swap::{entanglement_swap, swap_measure, PendingSwap};
pub use teleport::{teleport, teleport_send, PendingTeleport};
pub use w_election::{w_election_round, ElectionOutcome};

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channels::ChannelError;
use crate::qsim::{GateSpec, QsimError, QuantumState};
use crate::NodeId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error(transparent)]
    Qsim(#[from] QsimError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("{0:?} correction never arrived; destination refuses to guess")]
    SignalTimeout(CorrectionPurpose),
    #[error("resource has {found} qubits, protocol needs {expected}")]
    ResourceShape { expected: usize, found: usize },
    #[error("resource was already consumed")]
    ResourceConsumed,
    #[error("resource is missing its swap correction")]
    ResourceUncorrected,
    #[error("payload must be a single qubit, got {0} qubits")]
    PayloadShape(usize),
    #[error("W state needs {min}..={max} nodes, got {found}")]
    WCapacity {
        min: usize,
        max: usize,
        found: usize,
    },
    #[error("pairs do not share a middle node")]
    NoSharedNode,
    #[error("correction message mismatch: {0}")]
    MessageMismatch(String),
    #[error(
        "joint state is ambiguous (best Bell fidelity {fidelity:.3}); best guess {best_guess}"
    )]
    DecodeAmbiguity { best_guess: TwoBits, fidelity: f64 },
}

pub type Result<T> = std::result::Result<T, ProtocolError>;

/// A two-bit classical payload. `first` is the Z-type bit, `second` the
/// X-type bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TwoBits(u8);

impl TwoBits {
    pub const BITS: u32 = 2;
    pub const ALL: [TwoBits; 4] = [TwoBits(0), TwoBits(1), TwoBits(2), TwoBits(3)];

    pub fn new(first: u8, second: u8) -> Self {
        Self(((first & 1) << 1) | (second & 1))
    }

    pub fn from_value(v: u8) -> Self {
        Self(v & 0b11)
    }

    pub fn first(self) -> u8 {
        self.0 >> 1
    }

    pub fn second(self) -> u8 {
        self.0 & 1
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

impl fmt::Display for TwoBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.first(), self.second())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CorrectionPurpose {
    Teleport,
    Swap,
}

/// The Pauli-frame correction sent after a Bell measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CorrectionMessage {
    pub bits: TwoBits,
    pub origin: NodeId,
    pub target: NodeId,
    pub purpose: CorrectionPurpose,
}

impl CorrectionMessage {
    pub const SIZE_BITS: u32 = TwoBits::BITS;

    /// Wire form: `<purpose> <origin>-><target> bits=<b0b1>`.
    pub fn wire(&self) -> String {
        format!(
            "{:?} {}->{} bits={}",
            self.purpose, self.origin, self.target, self.bits
        )
    }
}

/// Bell-basis measurement of qubits `a`, `b` by `CNOT(a→b)`, `H(a)` and two
/// computational measurements. Outcome `(m_a, m_b)` identifies the Bell state
/// `(Z^{m_a} X^{m_b} ⊗ I)|Φ+⟩`.
pub(crate) fn bell_measure<R: Rng + ?Sized>(
    state: &QuantumState,
    a: usize,
    b: usize,
    rng: &mut R,
) -> Result<(TwoBits, QuantumState)> {
    let rotated = state.apply_gates(&[GateSpec::cnot(a, b), GateSpec::h(a)])?;
    let (oa, s) = rotated.measure(a, rng)?;
    let (ob, s) = s.measure(b, rng)?;
    Ok((TwoBits::new(oa.bit, ob.bit), s))
}

/// Applies `Z^{first} X^{second}` to `qubit`.
pub(crate) fn pauli_frame(
    state: &QuantumState,
    bits: TwoBits,
    qubit: usize,
) -> Result<QuantumState> {
    let mut out = state.clone();
    if bits.second() == 1 {
        out = out.apply_unitary(&GateSpec::x(qubit))?;
    }
    if bits.first() == 1 {
        out = out.apply_unitary(&GateSpec::z(qubit))?;
    }
    Ok(out)
}
