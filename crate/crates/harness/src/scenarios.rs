//! Typed per-scenario parameters and the code that runs one
//! (seed, parameter tuple) cell of an experiment.

use qnet_core::channels::{ChannelModel, POLAR_GRID_POINTS};
use qnet_core::netsim::sessions::{Severance, SuperdenseSession, SwapSession, TeleportSession};
use qnet_core::netsim::{
    Engine, Event, EventPayload, NetError, RunAborted, RunReport, Tick, Topology,
};
use qnet_core::services::mac::run_mac_engine;
use qnet_core::services::routing::{route_max_bottleneck_with, route_with_switch_merging_with};
use qnet_core::services::{
    phy_rate_on_grid, MacConfig, MacProtocol, PhyMode, PlanMode, RoutingOptions,
};
use qnet_core::NodeId;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::config::{ExperimentConfig, ParamTuple, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeverSpec {
    pub at: Tick,
    pub a: u32,
    pub b: u32,
}

impl SeverSpec {
    fn severance(self) -> Severance {
        Severance {
            at: self.at,
            a: NodeId(self.a),
            b: NodeId(self.b),
        }
    }
}

fn d_count() -> usize {
    100
}

fn d_messages() -> usize {
    1000
}

fn d_timeout() -> Tick {
    1000
}

fn d_one() -> f64 {
    1.0
}

fn d_grid() -> usize {
    POLAR_GRID_POINTS
}

fn d_pair_grid() -> usize {
    RoutingOptions::default().pair_grid_points
}

fn d_candidates() -> usize {
    RoutingOptions::default().max_candidate_paths
}

fn d_protocols() -> Vec<MacProtocol> {
    vec![MacProtocol::WStateAccess, MacProtocol::SlottedContention]
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TeleportParams {
    pub source: u32,
    pub destination: u32,
    #[serde(default = "d_count")]
    pub count: usize,
    #[serde(default = "d_timeout")]
    pub timeout: Tick,
    /// Replaces every quantum link channel by `dep(link_p)`.
    pub link_p: Option<f64>,
    pub sever: Option<SeverSpec>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperdenseParams {
    pub sender: u32,
    pub receiver: u32,
    #[serde(default = "d_messages")]
    pub count: usize,
    pub link_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwapParams {
    pub left: u32,
    pub middle: u32,
    pub right: u32,
    #[serde(default = "d_count")]
    pub rounds: usize,
    #[serde(default = "d_timeout")]
    pub timeout: Tick,
    pub link_p: Option<f64>,
    pub sever: Option<SeverSpec>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchParams {
    /// Depolarizing parameters of the two channels.
    #[serde(default = "d_one")]
    pub p1: f64,
    #[serde(default = "d_one")]
    pub p2: f64,
    #[serde(default = "d_grid")]
    pub grid_points: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoutingParams {
    pub source: u32,
    pub destination: u32,
    #[serde(default = "d_grid")]
    pub link_grid_points: usize,
    #[serde(default = "d_pair_grid")]
    pub pair_grid_points: usize,
    #[serde(default = "d_candidates")]
    pub max_candidate_paths: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct MacProtocols {
    #[serde(default = "d_protocols")]
    protocols: Vec<MacProtocol>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MacCompareParams {
    pub protocols: Vec<MacProtocol>,
    pub base: MacConfig,
}

/// A cell ready to run: parameters typed, topology built and checked.
#[derive(Debug, Clone)]
pub enum Prepared {
    Teleport(Topology, TeleportParams),
    Superdense(Topology, SuperdenseParams),
    Swap(Topology, SwapParams),
    SwitchActivation(SwitchParams),
    MacCompare(MacCompareParams),
    MultipathRouting(Topology, RoutingParams),
}

fn typed<T: DeserializeOwned>(
    table: &toml::Table,
    required: &[&str],
    known: &[&str],
) -> Result<T, Vec<String>> {
    let mut errs = Vec::new();
    for key in required {
        if !table.contains_key(*key) {
            errs.push(format!("params.{key}: missing"));
        }
    }
    for key in table.keys() {
        if !known.contains(&key.as_str()) {
            errs.push(format!(
                "params.{key}: unknown parameter (expected one of {})",
                known.join(", ")
            ));
        }
    }
    match T::deserialize(toml::Value::Table(table.clone())) {
        Ok(v) if errs.is_empty() => Ok(v),
        Ok(_) => Err(errs),
        Err(e) => {
            let msg = e.to_string();
            if !msg.contains("missing field") && !msg.contains("unknown field") {
                errs.push(format!("params: {}", msg.trim().replace('\n', " ")));
            }
            Err(errs)
        }
    }
}

fn both<P>(
    p: Result<P, Vec<String>>,
    t: Result<Topology, Vec<String>>,
) -> Result<(P, Topology), Vec<String>> {
    match (p, t) {
        (Ok(p), Ok(t)) => Ok((p, t)),
        (p, t) => Err(p.err().into_iter().chain(t.err()).flatten().collect()),
    }
}

fn topology(cfg: &ExperimentConfig, params: &toml::Table) -> Result<Topology, Vec<String>> {
    let link_p = params.get("link_p").and_then(toml::Value::as_float);
    let spec = cfg
        .topology
        .as_ref()
        .ok_or_else(|| vec![format!("topology: required by scenario {}", cfg.scenario)])?;
    let mut t = spec.build()?;
    if let Some(p) = link_p {
        let ch = ChannelModel::depolarizing(p).map_err(|e| vec![format!("params.link_p: {e}")])?;
        for l in &mut t.quantum_links {
            l.channel = ch.clone();
        }
    }
    Ok(t)
}

fn need_node(t: &Topology, key: &str, n: u32, errs: &mut Vec<String>) {
    if !t.contains(NodeId(n)) {
        errs.push(format!("params.{key}: node {n} is not in the topology"));
    }
}

fn need_qlink(t: &Topology, a: u32, b: u32, errs: &mut Vec<String>) {
    if t.contains(NodeId(a))
        && t.contains(NodeId(b))
        && t.quantum_link_between(NodeId(a), NodeId(b)).is_none()
    {
        errs.push(format!("topology: no quantum link between {a} and {b}"));
    }
}

fn need_sever(t: &Topology, s: Option<SeverSpec>, errs: &mut Vec<String>) {
    if let Some(s) = s {
        need_node(t, "sever.a", s.a, errs);
        need_node(t, "sever.b", s.b, errs);
    }
}

fn finish<T>(value: T, errs: Vec<String>) -> Result<T, Vec<String>> {
    if errs.is_empty() {
        Ok(value)
    } else {
        Err(errs)
    }
}

pub fn prepare(cfg: &ExperimentConfig, tuple: &ParamTuple) -> Result<Prepared, Vec<String>> {
    let params = cfg.params_for(tuple);
    match cfg.scenario {
        Scenario::Teleport => {
            let (p, t) = both(
                typed::<TeleportParams>(
                    &params,
                    &["source", "destination"],
                    &[
                        "source",
                        "destination",
                        "count",
                        "timeout",
                        "link_p",
                        "sever",
                    ],
                ),
                topology(cfg, &params),
            )?;
            let mut errs = Vec::new();
            need_node(&t, "source", p.source, &mut errs);
            need_node(&t, "destination", p.destination, &mut errs);
            need_qlink(&t, p.source, p.destination, &mut errs);
            need_sever(&t, p.sever, &mut errs);
            finish(Prepared::Teleport(t, p), errs)
        }
        Scenario::Superdense => {
            let (p, t) = both(
                typed::<SuperdenseParams>(
                    &params,
                    &["sender", "receiver"],
                    &["sender", "receiver", "count", "link_p"],
                ),
                topology(cfg, &params),
            )?;
            let mut errs = Vec::new();
            need_node(&t, "sender", p.sender, &mut errs);
            need_node(&t, "receiver", p.receiver, &mut errs);
            need_qlink(&t, p.sender, p.receiver, &mut errs);
            finish(Prepared::Superdense(t, p), errs)
        }
        Scenario::Swap => {
            let (p, t) = both(
                typed::<SwapParams>(
                    &params,
                    &["left", "middle", "right"],
                    &[
                        "left", "middle", "right", "rounds", "timeout", "link_p", "sever",
                    ],
                ),
                topology(cfg, &params),
            )?;
            let mut errs = Vec::new();
            need_node(&t, "left", p.left, &mut errs);
            need_node(&t, "middle", p.middle, &mut errs);
            need_node(&t, "right", p.right, &mut errs);
            need_qlink(&t, p.left, p.middle, &mut errs);
            need_qlink(&t, p.middle, p.right, &mut errs);
            need_sever(&t, p.sever, &mut errs);
            finish(Prepared::Swap(t, p), errs)
        }
        Scenario::SwitchActivation => {
            let p: SwitchParams = typed(&params, &[], &["p1", "p2", "grid_points"])?;
            let mut errs = Vec::new();
            for (k, v) in [("p1", p.p1), ("p2", p.p2)] {
                if let Err(e) = ChannelModel::depolarizing(v) {
                    errs.push(format!("params.{k}: {e}"));
                }
            }
            if p.grid_points == 0 {
                errs.push("params.grid_points: must be >= 1".into());
            }
            finish(Prepared::SwitchActivation(p), errs)
        }
        Scenario::MacCompare => {
            let mut rest = params.clone();
            let mut picked = toml::Table::new();
            if let Some(v) = rest.remove("protocols") {
                picked.insert("protocols".into(), v);
            }
            let mut errs = Vec::new();
            if rest.contains_key("protocol") {
                errs.push("params.protocol: use `protocols = [...]` instead".into());
                rest.remove("protocol");
            }
            let protocols = MacProtocols::deserialize(toml::Value::Table(picked))
                .map_err(|e| format!("params.protocols: {}", e.to_string().trim()));
            let base = MacConfig::deserialize(toml::Value::Table(rest))
                .map_err(|e| format!("params: {}", e.to_string().trim()));
            match (protocols, base) {
                (Ok(pr), Ok(base)) => {
                    if pr.protocols.is_empty() {
                        errs.push("params.protocols: empty".into());
                    }
                    for &protocol in &pr.protocols {
                        let cfg = MacConfig {
                            protocol,
                            ..base.clone()
                        };
                        if let Err(e) = cfg.validate() {
                            errs.push(format!("params ({}): {e}", protocol.name()));
                        }
                    }
                    finish(
                        Prepared::MacCompare(MacCompareParams {
                            protocols: pr.protocols,
                            base,
                        }),
                        errs,
                    )
                }
                (a, b) => {
                    errs.extend(a.err());
                    errs.extend(b.err());
                    Err(errs)
                }
            }
        }
        Scenario::MultipathRouting => {
            let (p, t) = both(
                typed::<RoutingParams>(
                    &params,
                    &["source", "destination"],
                    &[
                        "source",
                        "destination",
                        "link_grid_points",
                        "pair_grid_points",
                        "max_candidate_paths",
                    ],
                ),
                topology(cfg, &toml::Table::new()),
            )?;
            let mut errs = Vec::new();
            need_node(&t, "source", p.source, &mut errs);
            need_node(&t, "destination", p.destination, &mut errs);
            if p.source == p.destination {
                errs.push("params: source and destination must differ".into());
            }
            finish(Prepared::MultipathRouting(t, p), errs)
        }
    }
}

/// Every validation problem across all sweep tuples, deduplicated.
pub(crate) fn check(cfg: &ExperimentConfig) -> Vec<String> {
    let tuples = if cfg.sweep.values().any(Vec::is_empty) {
        vec![Vec::new()]
    } else {
        cfg.tuples()
    };
    let mut errs: Vec<String> = Vec::new();
    for t in &tuples {
        if let Err(v) = prepare(cfg, t) {
            for e in v {
                if !errs.contains(&e) {
                    errs.push(e);
                }
            }
        }
    }
    errs
}

/// Result of one engine run.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRun {
    /// Extra parameter label, e.g. the MAC protocol.
    pub variant: Option<String>,
    pub metrics: Vec<(String, f64)>,
    pub classical_bits_host_to_host: u64,
    pub classical_bits_end_to_end: u64,
    pub trace: Vec<String>,
    pub trace_hash: String,
    pub error: Option<String>,
}

impl CellRun {
    fn from_run(outcome: Result<RunReport, RunAborted>, metrics: Vec<(String, f64)>) -> Self {
        let (report, error) = match outcome {
            Ok(r) => (r, None),
            Err(a) => (a.report, Some(a.error.to_string())),
        };
        Self {
            variant: None,
            metrics,
            classical_bits_host_to_host: report.classical_bits_host_to_host,
            classical_bits_end_to_end: report.classical_bits_end_to_end,
            trace: report.trace,
            trace_hash: report.trace_hash,
            error,
        }
    }

    fn failed(error: String) -> Self {
        Self {
            variant: None,
            metrics: Vec::new(),
            classical_bits_host_to_host: 0,
            classical_bits_end_to_end: 0,
            trace: Vec::new(),
            trace_hash: String::new(),
            error: Some(error),
        }
    }
}

fn m(name: &str, v: f64) -> (String, f64) {
    (name.to_string(), v)
}

fn stats(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    Some((mean, min))
}

fn engine(t: &Topology, seed: u64, keep: bool) -> Result<Engine, String> {
    Engine::new(t.clone(), seed)
        .map(|e| e.with_tracing(keep))
        .map_err(|e| e.to_string())
}

fn run_teleport(
    t: &Topology,
    p: &TeleportParams,
    seed: u64,
    keep: bool,
) -> Result<CellRun, String> {
    let mut e = engine(t, seed, keep)?;
    let mut s = TeleportSession::new(
        &e,
        NodeId(p.source),
        NodeId(p.destination),
        p.count,
        p.timeout,
    )
    .map_err(|e| e.to_string())?;
    if let Some(sv) = p.sever {
        s = s.with_severance(sv.severance());
    }
    s.start(&mut e).map_err(|e| e.to_string())?;
    let out = e.run_until(Tick::MAX, &mut s);
    let fids: Vec<f64> = s.records.iter().map(|r| r.fidelity).collect();
    let done = fids.len() as f64;
    let mut metrics = vec![m("teleported", done)];
    if let Some((mean, min)) = stats(&fids) {
        metrics.push(m("mean_fidelity", mean));
        metrics.push(m("min_fidelity", min));
        let bits = out.as_ref().map_or_else(
            |a| a.report.classical_bits_end_to_end,
            |r| r.classical_bits_end_to_end,
        );
        metrics.push(m("end_to_end_bits_per_teleport", bits as f64 / done));
    }
    let attempts = out.as_ref().map_or_else(
        |a| a.report.entanglement_attempts,
        |r| r.entanglement_attempts,
    );
    metrics.push(m("entanglement_attempts", attempts as f64));
    Ok(CellRun::from_run(out, metrics))
}

fn run_superdense(
    t: &Topology,
    p: &SuperdenseParams,
    seed: u64,
    keep: bool,
) -> Result<CellRun, String> {
    let mut e = engine(t, seed, keep)?;
    let mut s = SuperdenseSession::new(&e, NodeId(p.sender), NodeId(p.receiver), p.count)
        .map_err(|e| e.to_string())?;
    s.start(&mut e).map_err(|e| e.to_string())?;
    let out = e.run_until(Tick::MAX, &mut s);
    let n = s.records.len() as f64;
    let ok = s
        .records
        .iter()
        .filter(|r| r.decoded == Some(r.sent))
        .count() as f64;
    let ambiguous = s.records.iter().filter(|r| r.decoded.is_none()).count() as f64;
    let mut metrics = vec![m("messages", n)];
    if n > 0.0 {
        metrics.push(m("success_rate", ok / n));
        metrics.push(m("ambiguous_rate", ambiguous / n));
        metrics.push(m("bits_per_qubit", 2.0 * ok / n));
    }
    Ok(CellRun::from_run(out, metrics))
}

fn run_swap(t: &Topology, p: &SwapParams, seed: u64, keep: bool) -> Result<CellRun, String> {
    let mut e = engine(t, seed, keep)?;
    let mut s = SwapSession::new(
        &e,
        NodeId(p.left),
        NodeId(p.middle),
        NodeId(p.right),
        p.rounds,
        p.timeout,
    )
    .map_err(|e| e.to_string())?;
    if let Some(sv) = p.sever {
        s = s.with_severance(sv.severance());
    }
    s.start(&mut e).map_err(|e| e.to_string())?;
    let out = e.run_until(Tick::MAX, &mut s);
    let n = s.records.len() as f64;
    let mut metrics = vec![m("rounds", n)];
    let fids: Vec<f64> = s
        .records
        .iter()
        .filter(|r| r.corrected)
        .map(|r| r.fidelity)
        .collect();
    if n > 0.0 {
        metrics.push(m("corrected_fraction", fids.len() as f64 / n));
    }
    if let Some((mean, min)) = stats(&fids) {
        metrics.push(m("mean_fidelity", mean));
        metrics.push(m("min_fidelity", min));
    }
    if n > 0.0 {
        let bits = out.as_ref().map_or_else(
            |a| a.report.classical_bits_end_to_end,
            |r| r.classical_bits_end_to_end,
        );
        metrics.push(m("end_to_end_bits_per_round", bits as f64 / n));
    }
    Ok(CellRun::from_run(out, metrics))
}

/// Runs a pure computation inside a one-event engine so that it leaves a
/// trace like every other scenario.
fn one_shot<F>(seed: u64, keep: bool, mut body: F) -> Result<CellRun, String>
where
    F: FnMut(&mut Engine) -> Result<Vec<(String, f64)>, String>,
{
    let mut e = engine(&Topology::with_nodes(2), seed, keep)?;
    e.schedule(
        0,
        EventPayload::Step {
            tag: "evaluate",
            token: 0,
        },
    )
    .map_err(|e| e.to_string())?;
    let mut metrics = Vec::new();
    let out = e.run_until(0, &mut |eng: &mut Engine, _: &Event| {
        metrics = body(eng).map_err(NetError::Handler)?;
        for (k, v) in &metrics {
            eng.note(format_args!("{k}={v}"));
        }
        Ok(())
    });
    Ok(CellRun::from_run(out, metrics))
}

fn run_switch(p: &SwitchParams, seed: u64, keep: bool) -> Result<CellRun, String> {
    one_shot(seed, keep, |_| {
        let c1 = ChannelModel::depolarizing(p.p1).map_err(|e| e.to_string())?;
        let c2 = ChannelModel::depolarizing(p.p2).map_err(|e| e.to_string())?;
        let rate = |links: &[ChannelModel], mode| {
            phy_rate_on_grid(links, mode, p.grid_points).map_err(|e| e.to_string())
        };
        Ok(vec![
            m(
                "chi_direct_first",
                rate(std::slice::from_ref(&c1), PhyMode::Direct)?,
            ),
            m(
                "chi_direct_second",
                rate(std::slice::from_ref(&c2), PhyMode::Direct)?,
            ),
            m(
                "chi_serial",
                rate(&[c1.clone(), c2.clone()], PhyMode::Serial)?,
            ),
            m(
                "chi_switch",
                rate(&[c1.clone(), c2.clone()], PhyMode::Switch)?,
            ),
        ])
    })
}

fn run_routing(t: &Topology, p: &RoutingParams, seed: u64, keep: bool) -> Result<CellRun, String> {
    let opts = RoutingOptions {
        link_grid_points: p.link_grid_points,
        pair_grid_points: p.pair_grid_points,
        max_candidate_paths: p.max_candidate_paths,
    };
    let (src, dst) = (NodeId(p.source), NodeId(p.destination));
    one_shot(seed, keep, |eng| {
        let single = route_max_bottleneck_with(t, src, dst, &opts).map_err(|e| e.to_string())?;
        let merged =
            route_with_switch_merging_with(t, src, dst, &opts).map_err(|e| e.to_string())?;
        for (name, plan) in [("single", &single), ("merged", &merged)] {
            eng.note(format_args!(
                "{name} {:?} paths={:?}",
                plan.mode, plan.paths
            ));
        }
        Ok(vec![
            m("single_rate", single.effective_rate),
            m("single_unreachable", single.unreachable as u8 as f64),
            m("merged_rate", merged.effective_rate),
            m(
                "merged_superposed",
                (merged.mode == PlanMode::SuperposedPair) as u8 as f64,
            ),
            m("packet_instances", merged.packet_instances as f64),
        ])
    })
}

fn run_mac(p: &MacCompareParams, seed: u64, keep: bool) -> Vec<CellRun> {
    p.protocols
        .iter()
        .map(|&protocol| {
            let cfg = MacConfig {
                protocol,
                ..p.base.clone()
            };
            let mut run = match run_mac_engine(&cfg, seed, keep) {
                Ok((mm, report)) => CellRun::from_run(
                    Ok(report),
                    vec![
                        m("throughput", mm.throughput),
                        m("collision_rate", mm.collision_rate),
                        m("fairness", mm.fairness),
                        m("privacy_ok", mm.privacy_ok as u8 as f64),
                        m(
                            "contention_signaling_bits",
                            mm.contention_signaling_bits as f64,
                        ),
                        m("w_states_consumed", mm.w_states_consumed as f64),
                    ],
                ),
                Err(e) => CellRun::failed(e.to_string()),
            };
            run.variant = Some(format!("protocol={}", protocol.name()));
            run
        })
        .collect()
}

/// Runs one cell; MAC comparisons yield one run per protocol.
pub fn run(prepared: &Prepared, seed: u64, keep_trace: bool) -> Vec<CellRun> {
    let single = |r: Result<CellRun, String>| vec![r.unwrap_or_else(CellRun::failed)];
    match prepared {
        Prepared::Teleport(t, p) => single(run_teleport(t, p, seed, keep_trace)),
        Prepared::Superdense(t, p) => single(run_superdense(t, p, seed, keep_trace)),
        Prepared::Swap(t, p) => single(run_swap(t, p, seed, keep_trace)),
        Prepared::SwitchActivation(p) => single(run_switch(p, seed, keep_trace)),
        Prepared::MacCompare(p) => run_mac(p, seed, keep_trace),
        Prepared::MultipathRouting(t, p) => single(run_routing(t, p, seed, keep_trace)),
    }
}
