use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::ledger::{
    ClassicalLedger, ClassicalMessage, LedgerEntry, MessageContent, MessagePurpose,
};
use super::{NetError, QuantumLink, Result, SignalingScope, Tick, Topology};
use crate::protocols::EntangledResource;
use crate::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    ClassicalDeliver,
    EntanglementAttempt,
    ProtocolStep,
    MacSlot,
    Custom,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ClassicalDeliver => "deliver",
            Self::EntanglementAttempt => "attempt",
            Self::ProtocolStep => "step",
            Self::MacSlot => "slot",
            Self::Custom => "custom",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventPayload {
    Deliver {
        message_id: u64,
        message: ClassicalMessage,
    },
    Attempt {
        link: usize,
    },
    Step {
        tag: &'static str,
        token: u64,
    },
    Slot {
        index: u64,
    },
    Custom(String),
}

impl EventPayload {
    pub fn kind(&self) -> EventKind {
        match self {
            Self::Deliver { .. } => EventKind::ClassicalDeliver,
            Self::Attempt { .. } => EventKind::EntanglementAttempt,
            Self::Step { .. } => EventKind::ProtocolStep,
            Self::Slot { .. } => EventKind::MacSlot,
            Self::Custom(_) => EventKind::Custom,
        }
    }

    fn summary(&self) -> String {
        match self {
            Self::Deliver {
                message_id,
                message,
            } => format!("msg#{message_id} {}", message.summary()),
            Self::Attempt { link } => format!("link#{link}"),
            Self::Step { tag, token } => format!("{tag}#{token}"),
            Self::Slot { index } => format!("slot#{index}"),
            Self::Custom(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: Tick,
    pub seq: u64,
    pub payload: EventPayload,
}

impl Event {
    pub fn kind(&self) -> EventKind {
        self.payload.kind()
    }
}

// Min-heap on (time, seq).
impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        (other.time, other.seq).cmp(&(self.time, self.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Eq for Event {}

pub trait EventHandler {
    fn handle(&mut self, engine: &mut Engine, event: &Event) -> Result<()>;
}

impl<F> EventHandler for F
where
    F: FnMut(&mut Engine, &Event) -> Result<()>,
{
    fn handle(&mut self, engine: &mut Engine, event: &Event) -> Result<()> {
        self(engine, event)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunReport {
    pub end_time: Tick,
    pub events: u64,
    /// Lines recorded during this call; empty unless tracing is enabled.
    pub trace: Vec<String>,
    /// SHA-256 over every trace line since the engine was created, whether
    /// or not lines are being kept.
    pub trace_hash: String,
    pub classical_bits_host_to_host: u64,
    pub classical_bits_end_to_end: u64,
    pub entanglement_attempts: u64,
    pub entanglement_successes: u64,
}

/// A run stopped by a handler error. The report covers everything up to and
/// including the failing event.
#[derive(Debug, Clone, PartialEq)]
pub struct RunAborted {
    pub error: NetError,
    pub report: RunReport,
}

impl fmt::Display for RunAborted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "run aborted at t={}: {}",
            self.report.end_time, self.error
        )
    }
}

impl std::error::Error for RunAborted {}

struct Trace {
    keep: bool,
    lines: Vec<String>,
    hasher: Sha256,
}

impl Trace {
    fn push(&mut self, line: String) {
        self.hasher.update(line.as_bytes());
        self.hasher.update(b"\n");
        if self.keep {
            self.lines.push(line);
        }
    }

    fn hash(&self) -> String {
        self.hasher
            .clone()
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Single-threaded event loop over one topology and one seeded RNG.
pub struct Engine {
    topology: Topology,
    index: HashMap<NodeId, usize>,
    live: Vec<bool>,
    /// `routes[src][dst]`: hop-count shortest path, both ends included.
    routes: Vec<Vec<Option<Vec<NodeId>>>>,
    now: Tick,
    next_seq: u64,
    queue: BinaryHeap<Event>,
    rng: ChaCha8Rng,
    ledger: ClassicalLedger,
    trace: Trace,
    events: u64,
    attempts: u64,
    successes: u64,
}

impl Engine {
    pub fn new(topology: Topology, seed: u64) -> Result<Self> {
        topology.validate()?;
        let index = topology
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (*n, i))
            .collect();
        let live = vec![true; topology.classical_links.len()];
        let mut engine = Self {
            topology,
            index,
            live,
            routes: Vec::new(),
            now: 0,
            next_seq: 0,
            queue: BinaryHeap::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            ledger: ClassicalLedger::default(),
            trace: Trace {
                keep: false,
                lines: Vec::new(),
                hasher: Sha256::new(),
            },
            events: 0,
            attempts: 0,
            successes: 0,
        };
        engine.recompute_routes();
        Ok(engine)
    }

    /// Keep trace lines in memory so that [`RunReport::trace`] is populated.
    pub fn with_tracing(mut self, keep: bool) -> Self {
        self.trace.keep = keep;
        self
    }

    pub fn now(&self) -> Tick {
        self.now
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn ledger(&self) -> &ClassicalLedger {
        &self.ledger
    }

    pub fn pending_events(&self) -> usize {
        self.queue.len()
    }

    pub fn schedule(&mut self, time: Tick, payload: EventPayload) -> Result<u64> {
        if time < self.now {
            return Err(NetError::PastEvent {
                time,
                now: self.now,
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Event { time, seq, payload });
        Ok(seq)
    }

    pub fn schedule_in(&mut self, delay: Tick, payload: EventPayload) -> Result<u64> {
        self.schedule(self.now + delay, payload)
    }

    /// Appends a free-form line to the trace at the current time.
    pub fn note(&mut self, text: impl fmt::Display) {
        let line = format!("{}\t-\tnote\t{text}", self.now);
        self.trace.push(line);
    }

    fn latency(&self, a: NodeId, b: NodeId) -> Option<Tick> {
        self.topology
            .classical_links
            .iter()
            .zip(&self.live)
            .filter(|(l, live)| **live && ((l.a == a && l.b == b) || (l.a == b && l.b == a)))
            .map(|(l, _)| l.latency)
            .min()
    }

    fn neighbours(&self, n: NodeId) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = self
            .topology
            .classical_links
            .iter()
            .zip(&self.live)
            .filter(|(_, live)| **live)
            .filter_map(|(l, _)| match (l.a == n, l.b == n) {
                (true, _) => Some(l.b),
                (_, true) => Some(l.a),
                _ => None,
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    fn recompute_routes(&mut self) {
        let nodes = self.topology.nodes.clone();
        let adjacency: Vec<Vec<NodeId>> = nodes.iter().map(|n| self.neighbours(*n)).collect();
        let mut routes = Vec::with_capacity(nodes.len());
        for (si, src) in nodes.iter().enumerate() {
            // BFS visiting neighbours in id order: ties go to the
            // lexicographically smallest predecessor chain.
            let mut parent: Vec<Option<usize>> = vec![None; nodes.len()];
            let mut seen = vec![false; nodes.len()];
            seen[si] = true;
            let mut queue = VecDeque::from([si]);
            while let Some(u) = queue.pop_front() {
                for v in &adjacency[u] {
                    let vi = self.index[v];
                    if !seen[vi] {
                        seen[vi] = true;
                        parent[vi] = Some(u);
                        queue.push_back(vi);
                    }
                }
            }
            let row = (0..nodes.len())
                .map(|di| {
                    if !seen[di] {
                        return None;
                    }
                    let mut path = vec![nodes[di]];
                    let mut cur = di;
                    while let Some(p) = parent[cur] {
                        path.push(nodes[p]);
                        cur = p;
                    }
                    path.reverse();
                    debug_assert_eq!(path[0], *src);
                    Some(path)
                })
                .collect();
            routes.push(row);
        }
        self.routes = routes;
    }

    /// Takes every classical link between `a` and `b` down and recomputes
    /// routes. Messages already in flight are still delivered.
    pub fn sever_classical_link(&mut self, a: NodeId, b: NodeId) {
        for (l, live) in self
            .topology
            .classical_links
            .iter()
            .zip(self.live.iter_mut())
        {
            if (l.a == a && l.b == b) || (l.a == b && l.b == a) {
                *live = false;
            }
        }
        self.recompute_routes();
    }

    pub fn route(&self, from: NodeId, to: NodeId) -> Result<Vec<NodeId>> {
        let si = *self.index.get(&from).ok_or(NetError::UnknownNode(from))?;
        let di = *self.index.get(&to).ok_or(NetError::UnknownNode(to))?;
        self.routes[si][di]
            .clone()
            .ok_or(NetError::Unreachable { from, to })
    }

    /// Sends over the precomputed route (end-to-end) or the direct link
    /// (host-to-host). Returns the ledger id of the message.
    pub fn send_classical(&mut self, msg: ClassicalMessage, scope: SignalingScope) -> Result<u64> {
        let route = match scope {
            SignalingScope::EndToEnd => self.route(msg.origin, msg.target)?,
            SignalingScope::HostToHost => vec![msg.origin, msg.target],
        };
        self.send_classical_via(msg, &route, scope)
    }

    /// Sends along an explicit node path.
    pub fn send_classical_via(
        &mut self,
        msg: ClassicalMessage,
        route: &[NodeId],
        scope: SignalingScope,
    ) -> Result<u64> {
        for n in [msg.origin, msg.target] {
            if !self.index.contains_key(&n) {
                return Err(NetError::UnknownNode(n));
            }
        }
        if route.first() != Some(&msg.origin)
            || route.last() != Some(&msg.target)
            || route.len() < 2
        {
            return Err(NetError::BadRoute(route.to_vec()));
        }
        if scope == SignalingScope::HostToHost && route.len() != 2 {
            return Err(NetError::NotAdjacent {
                from: msg.origin,
                to: msg.target,
            });
        }
        let mut total = 0;
        for hop in route.windows(2) {
            match self.latency(hop[0], hop[1]) {
                Some(l) => total += l,
                None if scope == SignalingScope::HostToHost => {
                    return Err(NetError::NotAdjacent {
                        from: msg.origin,
                        to: msg.target,
                    })
                }
                None => {
                    return Err(NetError::Unreachable {
                        from: msg.origin,
                        to: msg.target,
                    })
                }
            }
        }
        let deliver_at = self.now + total;
        let id = self.ledger.push(LedgerEntry {
            id: 0,
            origin: msg.origin,
            target: msg.target,
            bits: msg.size_bits,
            scope,
            purpose: msg.purpose,
            route: route.to_vec(),
            sent_at: self.now,
            deliver_at: Some(deliver_at),
            delivered_at: None,
        });
        self.schedule(
            deliver_at,
            EventPayload::Deliver {
                message_id: id,
                message: msg,
            },
        )?;
        Ok(id)
    }

    /// Records a message in the ledger without scheduling its delivery.
    pub fn account_classical(&mut self, msg: ClassicalMessage, scope: SignalingScope) -> u64 {
        let line = format!("{}\t-\tledger\t{} {}", self.now, scope, msg.summary());
        self.trace.push(line);
        self.ledger.push(LedgerEntry {
            id: 0,
            origin: msg.origin,
            target: msg.target,
            bits: msg.size_bits,
            scope,
            purpose: msg.purpose,
            route: vec![msg.origin, msg.target],
            sent_at: self.now,
            deliver_at: None,
            delivered_at: None,
        })
    }

    /// One heralded generation attempt on quantum link `link`. Every attempt
    /// costs a one-bit host-to-host herald, successful or not.
    pub fn attempt_entanglement(&mut self, link: usize) -> Result<Option<EntangledResource>> {
        let l = self
            .topology
            .quantum_links
            .get(link)
            .ok_or(NetError::UnknownLink(link))?
            .clone();
        let outcome = attempt_on_link(&l, &mut self.rng)?;
        self.attempts += 1;
        let success = outcome.is_some();
        if success {
            self.successes += 1;
        }
        self.account_classical(
            ClassicalMessage {
                origin: l.a,
                target: l.b,
                size_bits: 1,
                purpose: MessagePurpose::Herald,
                content: MessageContent::Herald { link, success },
            },
            SignalingScope::HostToHost,
        );
        Ok(outcome)
    }

    fn report(&mut self) -> RunReport {
        RunReport {
            end_time: self.now,
            events: self.events,
            trace: std::mem::take(&mut self.trace.lines),
            trace_hash: self.trace.hash(),
            classical_bits_host_to_host: self.ledger.bits(SignalingScope::HostToHost),
            classical_bits_end_to_end: self.ledger.bits(SignalingScope::EndToEnd),
            entanglement_attempts: self.attempts,
            entanglement_successes: self.successes,
        }
    }

    /// Processes every event with `time <= t_end` in (time, seq) order.
    #[allow(clippy::result_large_err)]
    pub fn run_until<H: EventHandler + ?Sized>(
        &mut self,
        t_end: Tick,
        handler: &mut H,
    ) -> std::result::Result<RunReport, RunAborted> {
        while self.queue.peek().is_some_and(|e| e.time <= t_end) {
            let event = self.queue.pop().expect("peeked");
            self.now = event.time;
            self.events += 1;
            let line = format!(
                "{}\t{}\t{}\t{}",
                event.time,
                event.seq,
                event.kind(),
                event.payload.summary()
            );
            self.trace.push(line);
            if let EventPayload::Deliver { message_id, .. } = &event.payload {
                if let Some(entry) = self.ledger.get_mut(*message_id) {
                    debug_assert_eq!(entry.deliver_at, Some(event.time));
                    entry.delivered_at = Some(event.time);
                }
            }
            if let Err(error) = handler.handle(self, &event) {
                let line = format!("{}\t{}\tabort\t{error}", event.time, event.seq);
                self.trace.push(line);
                return Err(RunAborted {
                    error,
                    report: self.report(),
                });
            }
        }
        Ok(self.report())
    }
}

/// Bernoulli generation followed by per-qubit link noise.
pub(crate) fn attempt_on_link<R: Rng + ?Sized>(
    link: &QuantumLink,
    rng: &mut R,
) -> Result<Option<EntangledResource>> {
    let draw: f64 = rng.random();
    if draw >= link.gen_success_prob {
        return Ok(None);
    }
    let mut pair = EntangledResource::bell_pair(link.a, link.b);
    pair.degrade(&link.channel)?;
    Ok(Some(pair))
}
