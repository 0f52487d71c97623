//! Slotted medium access for `n` stations sharing one channel: W-state
//! election against a contention baseline (p-persistence, optional carrier
//! sense, binary exponential backoff, hidden pairs).

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Result, ServiceError};
use crate::netsim::{
    ClassicalMessage, Engine, Event, EventHandler, EventPayload, MessagePurpose, NetError,
    RunReport, SignalingScope, Topology,
};
use crate::protocols::{w_election_round, EntangledResource, MAX_W_NODES};
use crate::NodeId;

/// Largest exponent used by binary exponential backoff.
const MAX_BACKOFF_STAGE: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MacProtocol {
    WStateAccess,
    SlottedContention,
}

impl MacProtocol {
    pub fn name(self) -> &'static str {
        match self {
            MacProtocol::WStateAccess => "w-state-access",
            MacProtocol::SlottedContention => "slotted-contention",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MacConfig {
    pub n_nodes: usize,
    pub protocol: MacProtocol,
    pub slots: u64,
    /// Probability that an idle station gets a new frame in a slot.
    pub offered_load: f64,
    /// Idle slots spent regenerating the W state after each election.
    pub w_refresh_cost: u64,
    /// Initial contention window; `0` disables backoff.
    pub backoff_window: u32,
    /// Station pairs that cannot hear each other.
    pub hidden_pairs: Vec<(u32, u32)>,
    /// Probability that a ready station transmits in a slot.
    pub persistence: f64,
    pub carrier_sense: bool,
    /// Start offsets available to carrier-sensing stations within a slot.
    pub contention_minislots: u32,
}

impl Default for MacConfig {
    fn default() -> Self {
        Self {
            n_nodes: 4,
            protocol: MacProtocol::WStateAccess,
            slots: 10_000,
            offered_load: 1.0,
            w_refresh_cost: 0,
            backoff_window: 0,
            hidden_pairs: Vec::new(),
            persistence: 1.0,
            carrier_sense: false,
            contention_minislots: 8,
        }
    }
}

impl MacConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.n_nodes < 2 {
            errs.push(format!("n_nodes must be >= 2, got {}", self.n_nodes));
        }
        if self.protocol == MacProtocol::WStateAccess && self.n_nodes > MAX_W_NODES {
            errs.push(format!(
                "W-state access supports at most {MAX_W_NODES} nodes, got {}",
                self.n_nodes
            ));
        }
        if self.slots == 0 {
            errs.push("slots must be >= 1".into());
        }
        for (name, v) in [
            ("offered_load", self.offered_load),
            ("persistence", self.persistence),
        ] {
            if !(0.0..=1.0).contains(&v) {
                errs.push(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        if self.carrier_sense && self.contention_minislots == 0 {
            errs.push("contention_minislots must be >= 1 with carrier sense".into());
        }
        for &(a, b) in &self.hidden_pairs {
            if a == b || a as usize >= self.n_nodes || b as usize >= self.n_nodes {
                errs.push(format!("hidden pair ({a}, {b}) is not a pair of stations"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ServiceError::InvalidConfig(errs))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MacMetrics {
    /// Successful slots over total slots.
    pub throughput: f64,
    /// Collided slots over total slots.
    pub collision_rate: f64,
    /// Jain index over per-station successes; `1.0` when nobody succeeded.
    pub fairness: f64,
    /// No station learned anything beyond its own outcome, and no classical
    /// message was spent on contention.
    pub privacy_ok: bool,
    pub successes: Vec<u64>,
    pub collided_slots: u64,
    pub idle_slots: u64,
    pub contention_signaling_bits: u64,
    pub w_states_consumed: u64,
}

pub fn jain_index(xs: &[u64]) -> f64 {
    let sum: f64 = xs.iter().map(|&x| x as f64).sum();
    let sq: f64 = xs.iter().map(|&x| (x as f64).powi(2)).sum();
    if sq == 0.0 {
        1.0
    } else {
        sum * sum / (xs.len() as f64 * sq)
    }
}

struct MacSim {
    cfg: MacConfig,
    hears: Vec<Vec<bool>>,
    access_point: NodeId,
    template: Option<EntangledResource>,
    refresh_left: u64,
    has_frame: Vec<bool>,
    backoff: Vec<u64>,
    stage: Vec<u32>,
    successes: Vec<u64>,
    collided: u64,
    idle: u64,
    w_states: u64,
    privacy_violations: u64,
}

impl MacSim {
    fn new(cfg: MacConfig) -> Result<Self> {
        let n = cfg.n_nodes;
        let mut hears = vec![vec![true; n]; n];
        for &(a, b) in &cfg.hidden_pairs {
            hears[a as usize][b as usize] = false;
            hears[b as usize][a as usize] = false;
        }
        let template = match cfg.protocol {
            MacProtocol::WStateAccess => Some(EntangledResource::w_state(
                (0..n as u32).map(NodeId).collect(),
            )?),
            MacProtocol::SlottedContention => None,
        };
        Ok(Self {
            hears,
            access_point: NodeId(n as u32),
            template,
            refresh_left: 0,
            has_frame: vec![false; n],
            backoff: vec![0; n],
            stage: vec![0; n],
            successes: vec![0; n],
            collided: 0,
            idle: 0,
            w_states: 0,
            privacy_violations: 0,
            cfg,
        })
    }

    fn arrivals(&mut self, engine: &mut Engine) {
        let load = self.cfg.offered_load;
        for f in self.has_frame.iter_mut().filter(|f| !**f) {
            *f = engine.rng().random::<f64>() < load;
        }
    }

    fn w_slot(&mut self, engine: &mut Engine) -> Result<()> {
        if self.refresh_left > 0 {
            self.refresh_left -= 1;
            self.idle += 1;
            return Ok(());
        }
        let mut w = self.template.clone().expect("W template");
        let out = w_election_round(&mut w, engine.rng())?;
        self.w_states += 1;
        self.refresh_left = self.cfg.w_refresh_cost;
        // Each station reads only its own qubit; the round is private iff
        // exactly one of those local readings is 1.
        if out.outcomes.iter().filter(|&&b| b == 1).count() != 1 {
            self.privacy_violations += 1;
        }
        if self.has_frame[out.winner] {
            self.has_frame[out.winner] = false;
            self.successes[out.winner] += 1;
        } else {
            self.idle += 1;
        }
        Ok(())
    }

    fn contention_slot(&mut self, engine: &mut Engine) {
        let n = self.cfg.n_nodes;
        let mut ready = Vec::new();
        for i in 0..n {
            if !self.has_frame[i] {
                continue;
            }
            if self.backoff[i] > 0 {
                self.backoff[i] -= 1;
                continue;
            }
            if engine.rng().random::<f64>() < self.cfg.persistence {
                ready.push(i);
            }
        }
        let transmitters = if self.cfg.carrier_sense {
            let mut timed: Vec<(u32, usize)> = ready
                .iter()
                .map(|&i| {
                    (
                        engine.rng().random_range(0..self.cfg.contention_minislots),
                        i,
                    )
                })
                .collect();
            timed.sort_unstable();
            let mut started: Vec<(u32, usize)> = Vec::new();
            for (offset, i) in timed {
                let busy = started.iter().any(|&(o, j)| o < offset && self.hears[i][j]);
                if !busy {
                    started.push((offset, i));
                }
            }
            started.into_iter().map(|(_, i)| i).collect()
        } else {
            ready
        };

        for &t in &transmitters {
            // Per-transmission ACK/NACK from the access point.
            engine.account_classical(
                ClassicalMessage::opaque(
                    self.access_point,
                    NodeId(t as u32),
                    1,
                    MessagePurpose::Contention,
                ),
                SignalingScope::HostToHost,
            );
        }
        match transmitters.len() {
            0 => self.idle += 1,
            1 => {
                let t = transmitters[0];
                self.has_frame[t] = false;
                self.stage[t] = 0;
                self.successes[t] += 1;
            }
            _ => {
                self.collided += 1;
                for &t in &transmitters {
                    self.stage[t] = (self.stage[t] + 1).min(MAX_BACKOFF_STAGE);
                    if self.cfg.backoff_window > 0 {
                        let window = (self.cfg.backoff_window as u64) << self.stage[t];
                        self.backoff[t] = engine.rng().random_range(0..window);
                    }
                }
            }
        }
    }

    fn metrics(&self, engine: &Engine) -> MacMetrics {
        let slots = self.cfg.slots as f64;
        let total: u64 = self.successes.iter().sum();
        let contention_bits = engine.ledger().bits_for(MessagePurpose::Contention);
        MacMetrics {
            throughput: total as f64 / slots,
            collision_rate: self.collided as f64 / slots,
            fairness: jain_index(&self.successes),
            privacy_ok: self.privacy_violations == 0 && contention_bits == 0,
            successes: self.successes.clone(),
            collided_slots: self.collided,
            idle_slots: self.idle,
            contention_signaling_bits: contention_bits,
            w_states_consumed: self.w_states,
        }
    }
}

impl EventHandler for MacSim {
    fn handle(&mut self, engine: &mut Engine, ev: &Event) -> crate::netsim::Result<()> {
        let EventPayload::Slot { index } = ev.payload else {
            return Ok(());
        };
        self.arrivals(engine);
        match self.cfg.protocol {
            MacProtocol::WStateAccess => self
                .w_slot(engine)
                .map_err(|e| NetError::Handler(e.to_string()))?,
            MacProtocol::SlottedContention => self.contention_slot(engine),
        }
        if index + 1 < self.cfg.slots {
            engine.schedule_in(1, EventPayload::Slot { index: index + 1 })?;
        }
        Ok(())
    }
}

/// Runs the MAC simulation on its own engine and returns the engine report
/// alongside the metrics.
pub fn run_mac_engine(
    config: &MacConfig,
    seed: u64,
    keep_trace: bool,
) -> Result<(MacMetrics, RunReport)> {
    config.validate()?;
    let topology = Topology::with_nodes(config.n_nodes as u32 + 1);
    let mut engine = Engine::new(topology, seed)?.with_tracing(keep_trace);
    let mut sim = MacSim::new(config.clone())?;
    engine.schedule(0, EventPayload::Slot { index: 0 })?;
    let report = engine
        .run_until(config.slots, &mut sim)
        .map_err(|a| ServiceError::Net(a.error))?;
    Ok((sim.metrics(&engine), report))
}

pub fn run_mac_sim(config: &MacConfig, seed: u64) -> Result<MacMetrics> {
    run_mac_engine(config, seed, false).map(|(m, _)| m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn w(n: usize, slots: u64) -> MacConfig {
        MacConfig {
            n_nodes: n,
            slots,
            ..MacConfig::default()
        }
    }

    fn aloha(g: f64, slots: u64) -> MacConfig {
        MacConfig {
            n_nodes: 100,
            protocol: MacProtocol::SlottedContention,
            slots,
            persistence: g / 100.0,
            ..MacConfig::default()
        }
    }

    fn csma(hidden: Vec<(u32, u32)>) -> MacConfig {
        MacConfig {
            n_nodes: 6,
            protocol: MacProtocol::SlottedContention,
            slots: 50_000,
            persistence: 0.5,
            carrier_sense: true,
            hidden_pairs: hidden,
            ..MacConfig::default()
        }
    }

    #[test]
    fn saturated_w_access_is_perfect() {
        let m = run_mac_sim(&w(4, 100_000), 1).unwrap();
        assert_eq!(m.throughput, 1.0);
        assert_eq!(m.collision_rate, 0.0);
        assert!(m.fairness >= 0.99);
        assert!(m.privacy_ok);
        assert_eq!(m.contention_signaling_bits, 0);
        assert_eq!(m.w_states_consumed, 100_000);
    }

    #[test]
    fn w_wins_pass_chi_square() {
        let m = run_mac_sim(&w(5, 100_000), 7).unwrap();
        let expect = 100_000.0 / 5.0;
        let stat: f64 = m
            .successes
            .iter()
            .map(|&s| (s as f64 - expect).powi(2) / expect)
            .sum();
        let critical = ChiSquared::new(4.0).unwrap().inverse_cdf(0.99);
        assert!(stat < critical, "{stat} >= {critical}");
    }

    #[test]
    fn refresh_cost_halves_throughput() {
        let cfg = MacConfig {
            w_refresh_cost: 1,
            ..w(4, 100_000)
        };
        let m = run_mac_sim(&cfg, 3).unwrap();
        assert!((m.throughput - 0.5).abs() < 0.01);
        assert_eq!(m.collided_slots, 0);
    }

    #[test]
    fn w_access_ignores_hidden_pairs() {
        let plain = run_mac_sim(&w(6, 20_000), 9).unwrap();
        let hidden = MacConfig {
            hidden_pairs: vec![(0, 1), (2, 5)],
            ..w(6, 20_000)
        };
        assert_eq!(run_mac_sim(&hidden, 9).unwrap(), plain);
    }

    #[test]
    fn light_load_leaves_idle_winners() {
        let cfg = MacConfig {
            offered_load: 0.1,
            ..w(3, 50_000)
        };
        let m = run_mac_sim(&cfg, 5).unwrap();
        assert!(
            m.throughput < 0.35 && m.throughput > 0.2,
            "{}",
            m.throughput
        );
        assert_eq!(m.collided_slots, 0);
    }

    #[test]
    fn slotted_aloha_limit() {
        let exact = |g: f64| g * (1.0 - g / 100.0).powi(99);
        for g in [0.5, 1.0, 2.0] {
            let m = run_mac_sim(&aloha(g, 100_000), 11).unwrap();
            assert!(
                (m.throughput - exact(g)).abs() < 0.01,
                "G={g}: {}",
                m.throughput
            );
            assert!((exact(g) - g * (-g).exp()).abs() < 0.005);
        }
        let peak = run_mac_sim(&aloha(1.0, 200_000), 12).unwrap().throughput;
        assert!((peak - 0.368).abs() < 0.01, "{peak}");
    }

    #[test]
    fn hidden_pairs_hurt_carrier_sense() {
        let base = run_mac_sim(&csma(vec![]), 21).unwrap();
        let hidden = run_mac_sim(&csma(vec![(0, 1), (2, 3), (4, 5), (0, 5)]), 21).unwrap();
        assert!(
            hidden.collision_rate > base.collision_rate,
            "{base:?} {hidden:?}"
        );
        assert!(base.throughput + base.collision_rate <= 1.0);
        assert!(base.contention_signaling_bits > 0);
        assert!(!base.privacy_ok);
    }

    #[test]
    fn backoff_relieves_persistent_collisions() {
        let greedy = MacConfig {
            n_nodes: 6,
            protocol: MacProtocol::SlottedContention,
            slots: 20_000,
            ..MacConfig::default()
        };
        assert_eq!(run_mac_sim(&greedy, 1).unwrap().collision_rate, 1.0);
        let polite = MacConfig {
            backoff_window: 2,
            ..greedy
        };
        let m = run_mac_sim(&polite, 1).unwrap();
        assert!(m.collision_rate < 0.5 && m.throughput > 0.3, "{m:?}");
    }

    #[test]
    fn invalid_configs_list_every_problem() {
        let bad = MacConfig {
            n_nodes: 1,
            slots: 0,
            offered_load: 2.0,
            hidden_pairs: vec![(0, 0)],
            ..MacConfig::default()
        };
        match bad.validate() {
            Err(ServiceError::InvalidConfig(v)) => assert_eq!(v.len(), 4, "{v:?}"),
            other => panic!("{other:?}"),
        }
        assert!(run_mac_sim(&w(11, 10), 0).is_err());
    }

    #[test]
    fn jain_edge_cases() {
        assert_eq!(jain_index(&[5, 5, 5]), 1.0);
        assert!((jain_index(&[1, 0, 0, 0]) - 0.25).abs() < 1e-12);
        assert_eq!(jain_index(&[0, 0]), 1.0);
    }

    #[test]
    fn same_seed_same_trace() {
        let cfg = csma(vec![(0, 1)]);
        let cfg = MacConfig {
            slots: 2_000,
            ..cfg
        };
        let a = run_mac_engine(&cfg, 4, true).unwrap();
        let b = run_mac_engine(&cfg, 4, true).unwrap();
        assert_eq!(a, b);
    }
}
