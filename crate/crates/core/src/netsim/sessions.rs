//! Protocol sessions driven by the event engine: entanglement is generated
//! on quantum links, corrections travel as classical messages with real
//! latency, and a missing correction is detected by timeout.

use std::collections::HashMap;

use rand::Rng;

use super::{
    ClassicalMessage, Engine, Event, EventHandler, EventPayload, MessageContent, NetError, Result,
    SignalingScope, Tick,
};
use crate::protocols::{
    haar_qubit, superdense_decode, superdense_encode, swap_measure, teleport_send,
    CorrectionPurpose, EntangledResource, PendingSwap, PendingTeleport, ProtocolError,
    ResourceStatus, TwoBits,
};
use crate::qsim::QuantumState;
use crate::NodeId;

const TIMEOUT_TAG: &str = "timeout";

fn oriented(pair: EntangledResource, first: NodeId) -> Result<EntangledResource> {
    if pair.holders[0] == first {
        Ok(pair)
    } else {
        Ok(pair.reversed()?)
    }
}

fn link_between(engine: &Engine, a: NodeId, b: NodeId) -> Result<usize> {
    engine
        .topology()
        .quantum_link_between(a, b)
        .ok_or_else(|| NetError::Handler(format!("no quantum link between {a} and {b}")))
}

fn period(engine: &Engine, link: usize) -> Tick {
    engine.topology().quantum_links[link].attempt_period
}

/// Optional mid-run failure of a classical link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Severance {
    pub at: Tick,
    pub a: NodeId,
    pub b: NodeId,
}

fn schedule_severance(engine: &mut Engine, sever: Option<Severance>) -> Result<()> {
    if let Some(s) = sever {
        engine.schedule(s.at, EventPayload::Custom(format!("sever {} {}", s.a, s.b)))?;
    }
    Ok(())
}

fn apply_severance(engine: &mut Engine, sever: Option<Severance>, ev: &Event) {
    if let (EventPayload::Custom(_), Some(s)) = (&ev.payload, sever) {
        engine.sever_classical_link(s.a, s.b);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeleportRecord {
    pub fidelity: f64,
    pub sent_at: Tick,
    pub corrected_at: Tick,
    pub message_id: u64,
}

/// Teleports `total` Haar-random qubits from `source` to `destination`, one
/// at a time, each over a freshly generated pair.
pub struct TeleportSession {
    source: NodeId,
    link: usize,
    total: usize,
    timeout: Tick,
    sever: Option<Severance>,
    next_token: u64,
    waiting: HashMap<u64, (PendingTeleport, QuantumState)>,
    by_message: HashMap<u64, u64>,
    pub records: Vec<TeleportRecord>,
}

impl TeleportSession {
    pub fn new(
        engine: &Engine,
        source: NodeId,
        destination: NodeId,
        total: usize,
        timeout: Tick,
    ) -> Result<Self> {
        Ok(Self {
            source,
            link: link_between(engine, source, destination)?,
            total,
            timeout,
            sever: None,
            next_token: 0,
            waiting: HashMap::new(),
            by_message: HashMap::new(),
            records: Vec::new(),
        })
    }

    pub fn with_severance(mut self, sever: Severance) -> Self {
        self.sever = Some(sever);
        self
    }

    pub fn start(&self, engine: &mut Engine) -> Result<()> {
        schedule_severance(engine, self.sever)?;
        if self.total > 0 {
            engine.schedule_in(0, EventPayload::Attempt { link: self.link })?;
        }
        Ok(())
    }

    fn send(&mut self, engine: &mut Engine, pair: EntangledResource) -> Result<()> {
        let pair = oriented(pair, self.source)?;
        let payload = haar_qubit(engine.rng());
        let (msg, pending) = teleport_send(&payload, pair, engine.rng())?;
        let token = self.next_token;
        self.next_token += 1;
        // An unreachable destination is not fatal here: the qubit sits at
        // the far end waiting for a correction that cannot come.
        match engine.send_classical(ClassicalMessage::correction(msg), SignalingScope::EndToEnd) {
            Ok(id) => {
                self.by_message.insert(id, token);
            }
            Err(NetError::Unreachable { .. }) => {
                engine.note(format_args!("teleport#{token} correction unroutable"));
            }
            Err(e) => return Err(e),
        }
        self.waiting.insert(token, (pending, payload));
        engine.schedule_in(
            self.timeout,
            EventPayload::Step {
                tag: TIMEOUT_TAG,
                token,
            },
        )?;
        Ok(())
    }
}

impl EventHandler for TeleportSession {
    fn handle(&mut self, engine: &mut Engine, ev: &Event) -> Result<()> {
        match &ev.payload {
            EventPayload::Attempt { link } if *link == self.link => {
                match engine.attempt_entanglement(*link)? {
                    Some(pair) => self.send(engine, pair)?,
                    None => {
                        engine.schedule_in(
                            period(engine, *link),
                            EventPayload::Attempt { link: *link },
                        )?;
                    }
                }
            }
            EventPayload::Deliver {
                message_id,
                message,
            } => {
                let MessageContent::Correction(corr) = message.content else {
                    return Ok(());
                };
                if corr.purpose != CorrectionPurpose::Teleport {
                    return Ok(());
                }
                let token = self.by_message.remove(message_id).ok_or_else(|| {
                    NetError::Handler(format!("unexpected correction msg#{message_id}"))
                })?;
                let (pending, payload) = self.waiting.remove(&token).expect("token registered");
                let out = pending.complete(&corr)?;
                let fidelity = out.fidelity(&payload).map_err(ProtocolError::from)?;
                let sent_at = engine.ledger().get(*message_id).map_or(0, |e| e.sent_at);
                engine.note(format_args!("teleport#{token} f={fidelity:.12}"));
                self.records.push(TeleportRecord {
                    fidelity,
                    sent_at,
                    corrected_at: engine.now(),
                    message_id: *message_id,
                });
                if self.records.len() < self.total {
                    engine.schedule_in(
                        period(engine, self.link),
                        EventPayload::Attempt { link: self.link },
                    )?;
                }
            }
            EventPayload::Step { tag, token } if *tag == TIMEOUT_TAG => {
                if self.waiting.contains_key(token) {
                    return Err(ProtocolError::SignalTimeout(CorrectionPurpose::Teleport).into());
                }
            }
            _ => apply_severance(engine, self.sever, ev),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwapRecord {
    /// Fidelity of the end-to-end pair to `Φ+`.
    pub fidelity: f64,
    pub corrected: bool,
}

/// Repeated entanglement swapping over `left - middle - right`.
pub struct SwapSession {
    nodes: [NodeId; 3],
    links: [usize; 2],
    rounds: usize,
    timeout: Tick,
    sever: Option<Severance>,
    held: [Option<EntangledResource>; 2],
    next_token: u64,
    waiting: HashMap<u64, PendingSwap>,
    by_message: HashMap<u64, u64>,
    pub records: Vec<SwapRecord>,
}

impl SwapSession {
    pub fn new(
        engine: &Engine,
        left: NodeId,
        middle: NodeId,
        right: NodeId,
        rounds: usize,
        timeout: Tick,
    ) -> Result<Self> {
        Ok(Self {
            nodes: [left, middle, right],
            links: [
                link_between(engine, left, middle)?,
                link_between(engine, middle, right)?,
            ],
            rounds,
            timeout,
            sever: None,
            held: [None, None],
            next_token: 0,
            waiting: HashMap::new(),
            by_message: HashMap::new(),
            records: Vec::new(),
        })
    }

    pub fn with_severance(mut self, sever: Severance) -> Self {
        self.sever = Some(sever);
        self
    }

    pub fn start(&self, engine: &mut Engine) -> Result<()> {
        schedule_severance(engine, self.sever)?;
        if self.rounds > 0 {
            self.attempt_both(engine, 0)?;
        }
        Ok(())
    }

    fn attempt_both(&self, engine: &mut Engine, delay: Tick) -> Result<()> {
        for link in self.links {
            engine.schedule_in(delay, EventPayload::Attempt { link })?;
        }
        Ok(())
    }

    fn finish_round(&mut self, engine: &mut Engine, record: SwapRecord) -> Result<()> {
        engine.note(format_args!(
            "swap f={:.12} corrected={}",
            record.fidelity, record.corrected
        ));
        self.records.push(record);
        if self.records.len() < self.rounds {
            let delay = self
                .links
                .iter()
                .map(|l| period(engine, *l))
                .max()
                .unwrap_or(1);
            self.attempt_both(engine, delay)?;
        }
        Ok(())
    }

    fn swap_now(&mut self, engine: &mut Engine) -> Result<()> {
        let left = oriented(self.held[0].take().expect("left held"), self.nodes[0])?;
        let right = oriented(self.held[1].take().expect("right held"), self.nodes[1])?;
        let (msg, pending) = swap_measure(left, right, engine.rng())?;
        let token = self.next_token;
        self.next_token += 1;
        match engine.send_classical(ClassicalMessage::correction(msg), SignalingScope::EndToEnd) {
            Ok(id) => {
                self.by_message.insert(id, token);
            }
            Err(NetError::Unreachable { .. }) => {
                engine.note(format_args!("swap#{token} correction unroutable"));
            }
            Err(e) => return Err(e),
        }
        self.waiting.insert(token, pending);
        engine.schedule_in(
            self.timeout,
            EventPayload::Step {
                tag: TIMEOUT_TAG,
                token,
            },
        )?;
        Ok(())
    }
}

impl EventHandler for SwapSession {
    fn handle(&mut self, engine: &mut Engine, ev: &Event) -> Result<()> {
        match &ev.payload {
            EventPayload::Attempt { link } => {
                let Some(side) = self.links.iter().position(|l| l == link) else {
                    return Ok(());
                };
                if self.held[side].is_some() {
                    return Ok(());
                }
                match engine.attempt_entanglement(*link)? {
                    Some(pair) => {
                        self.held[side] = Some(pair);
                        if self.held.iter().all(Option::is_some) {
                            self.swap_now(engine)?;
                        }
                    }
                    None => {
                        engine.schedule_in(
                            period(engine, *link),
                            EventPayload::Attempt { link: *link },
                        )?;
                    }
                }
            }
            EventPayload::Deliver {
                message_id,
                message,
            } => {
                let MessageContent::Correction(corr) = message.content else {
                    return Ok(());
                };
                let Some(token) = self.by_message.remove(message_id) else {
                    return Ok(());
                };
                let pending = self.waiting.remove(&token).expect("token registered");
                let pair = pending.complete(&corr)?;
                let record = SwapRecord {
                    fidelity: pair.fidelity.unwrap_or(0.0),
                    corrected: pair.status == ResourceStatus::Fresh,
                };
                self.finish_round(engine, record)?;
            }
            EventPayload::Step { tag, token } if *tag == TIMEOUT_TAG => {
                if let Some(pending) = self.waiting.remove(token) {
                    let pair = pending.abandon()?;
                    let record = SwapRecord {
                        fidelity: pair.fidelity.unwrap_or(0.0),
                        corrected: false,
                    };
                    self.finish_round(engine, record)?;
                }
            }
            _ => apply_severance(engine, self.sever, ev),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuperdenseRecord {
    pub sent: TwoBits,
    /// `None` when the receiver could not decode at all.
    pub decoded: Option<TwoBits>,
}

/// Sends `total` random two-bit messages from `sender` to `receiver`. Each
/// message consumes one generated pair; the encoded qubit then crosses the
/// same quantum link.
pub struct SuperdenseSession {
    sender: NodeId,
    link: usize,
    total: usize,
    pub records: Vec<SuperdenseRecord>,
}

impl SuperdenseSession {
    pub fn new(engine: &Engine, sender: NodeId, receiver: NodeId, total: usize) -> Result<Self> {
        Ok(Self {
            sender,
            link: link_between(engine, sender, receiver)?,
            total,
            records: Vec::new(),
        })
    }

    pub fn start(&self, engine: &mut Engine) -> Result<()> {
        if self.total > 0 {
            engine.schedule_in(0, EventPayload::Attempt { link: self.link })?;
        }
        Ok(())
    }
}

impl EventHandler for SuperdenseSession {
    fn handle(&mut self, engine: &mut Engine, ev: &Event) -> Result<()> {
        let EventPayload::Attempt { link } = ev.payload else {
            return Ok(());
        };
        if link != self.link {
            return Ok(());
        }
        let next = period(engine, link);
        if let Some(pair) = engine.attempt_entanglement(link)? {
            let pair = oriented(pair, self.sender)?;
            let sent = TwoBits::from_value(engine.rng().random_range(0..4u8));
            let joint = superdense_encode(sent, &pair)?;
            let channel = engine.topology().quantum_links[link].channel.clone();
            let joint = channel
                .apply_to(&joint, &[0])
                .map_err(ProtocolError::from)?;
            let decoded = match superdense_decode(&joint, engine.rng()) {
                Ok(b) => Some(b),
                Err(ProtocolError::DecodeAmbiguity { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            engine.note(format_args!(
                "superdense sent={sent} decoded={}",
                decoded.map_or("?".to_string(), |b| b.to_string())
            ));
            self.records.push(SuperdenseRecord { sent, decoded });
            if self.records.len() >= self.total {
                return Ok(());
            }
        }
        engine.schedule_in(next, EventPayload::Attempt { link })?;
        Ok(())
    }
}
