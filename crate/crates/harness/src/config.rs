use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use qnet_core::channels::ChannelSpec;
use qnet_core::netsim::{QuantumLink, Tick, Topology};
use qnet_core::NodeId;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenarios;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Invalid(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Teleport,
    Superdense,
    Swap,
    SwitchActivation,
    MacCompare,
    MultipathRouting,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Teleport,
        Scenario::Superdense,
        Scenario::Swap,
        Scenario::SwitchActivation,
        Scenario::MacCompare,
        Scenario::MultipathRouting,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Teleport => "teleport",
            Scenario::Superdense => "superdense",
            Scenario::Swap => "swap",
            Scenario::SwitchActivation => "switch-activation",
            Scenario::MacCompare => "mac-compare",
            Scenario::MultipathRouting => "multipath-routing",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn summary(self) -> &'static str {
        match self {
            Scenario::Teleport => {
                "teleport random qubits over generated pairs; fidelity and signaling cost"
            }
            Scenario::Superdense => "two classical bits per qubit over a shared pair",
            Scenario::Swap => "entanglement swapping across a three-node chain",
            Scenario::SwitchActivation => {
                "Holevo rate of two channels: direct, serial and switched order"
            }
            Scenario::MacCompare => "W-state medium access against slotted contention",
            Scenario::MultipathRouting => {
                "widest single path against superposed link-disjoint pairs"
            }
        }
    }

    /// Whether the scenario reads `[topology]`.
    pub fn needs_topology(self) -> bool {
        !matches!(self, Scenario::SwitchActivation | Scenario::MacCompare)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalLinkSpec {
    pub a: u32,
    pub b: u32,
    pub latency: Tick,
}

fn one() -> f64 {
    1.0
}

fn one_tick() -> Tick {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumLinkSpec {
    pub a: u32,
    pub b: u32,
    pub channel: ChannelSpec,
    #[serde(default = "one")]
    pub gen_success_prob: f64,
    #[serde(default = "one_tick")]
    pub attempt_period: Tick,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    pub nodes: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub classical: Vec<ClassicalLinkSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub quantum: Vec<QuantumLinkSpec>,
}

impl TopologySpec {
    pub fn build(&self) -> Result<Topology, Vec<String>> {
        let mut errs = Vec::new();
        let mut t = Topology::new(self.nodes.iter().copied().map(NodeId));
        for c in &self.classical {
            t = t.classical(c.a, c.b, c.latency);
        }
        for (i, q) in self.quantum.iter().enumerate() {
            match q.channel.build() {
                Ok(ch) => {
                    t = t.quantum(
                        QuantumLink::new(NodeId(q.a), NodeId(q.b), ch)
                            .with_generation(q.gen_success_prob, q.attempt_period),
                    )
                }
                Err(e) => errs.push(format!("topology.quantum[{i}].channel: {e}")),
            }
        }
        if let Err(qnet_core::netsim::NetError::InvalidTopology(v)) = t.validate() {
            errs.extend(v.into_iter().map(|e| format!("topology: {e}")));
        }
        if errs.is_empty() {
            Ok(t)
        } else {
            Err(errs)
        }
    }
}

/// One point of the sweep grid: `(parameter, value)` in key order.
pub type ParamTuple = Vec<(String, toml::Value)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologySpec>,
    #[serde(default)]
    pub params: toml::Table,
    /// Parameter grid; every combination overrides `params`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sweep: BTreeMap<String, Vec<toml::Value>>,
}

impl ExperimentConfig {
    /// Cartesian product of the sweep grid, keys in sorted order, last key
    /// varying fastest. A config without sweep has one empty tuple.
    pub fn tuples(&self) -> Vec<ParamTuple> {
        let mut out: Vec<ParamTuple> = vec![Vec::new()];
        for (key, values) in &self.sweep {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |v| {
                        let mut t = prefix.clone();
                        t.push((key.clone(), v.clone()));
                        t
                    })
                })
                .collect();
        }
        out
    }

    /// `params` with one sweep tuple applied.
    pub fn params_for(&self, tuple: &ParamTuple) -> toml::Table {
        let mut p = self.params.clone();
        for (k, v) in tuple {
            p.insert(k.clone(), v.clone());
        }
        p
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serialisable")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errs = Vec::new();
        if self.seeds.is_empty() {
            errs.push("seeds: at least one seed is required".to_string());
        }
        for (k, v) in &self.sweep {
            if v.is_empty() {
                errs.push(format!("sweep.{k}: empty value list"));
            }
        }
        errs.extend(scenarios::check(self));
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(errs))
        }
    }
}

pub fn tuple_label(tuple: &ParamTuple) -> String {
    tuple
        .iter()
        .map(|(k, v)| match v {
            toml::Value::String(s) => format!("{k}={s}"),
            other => format!("{k}={other}"),
        })
        .collect::<Vec<_>>()
        .join(";")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<String>,
    seeds: Option<Vec<u64>>,
    topology: Option<toml::Value>,
    params: Option<toml::Table>,
    sweep: Option<BTreeMap<String, Vec<toml::Value>>>,
}

/// Parses and validates a config, reporting every violation found.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let mut errs = Vec::new();
    let scenario = match raw.scenario.as_deref() {
        None => {
            errs.push("scenario: missing".to_string());
            None
        }
        Some(name) => Scenario::from_name(name).or_else(|| {
            let known: Vec<&str> = Scenario::ALL.iter().map(|s| s.name()).collect();
            errs.push(format!(
                "scenario: unknown `{name}` (expected one of {})",
                known.join(", ")
            ));
            None
        }),
    };
    let seeds_missing = raw.seeds.is_none();
    if seeds_missing {
        errs.push("seeds: missing".to_string());
    }
    let topology = match raw.topology {
        None => None,
        Some(v) => match TopologySpec::deserialize(v) {
            Ok(t) => Some(t),
            Err(e) => {
                errs.push(format!("topology: {e}"));
                None
            }
        },
    };
    let Some(scenario) = scenario else {
        return Err(ConfigError::Invalid(errs));
    };
    if scenario.needs_topology()
        && topology.is_none()
        && !errs.iter().any(|e| e.starts_with("topology"))
    {
        errs.push(format!("topology: required by scenario {scenario}"));
    }
    let cfg = ExperimentConfig {
        scenario,
        seeds: raw.seeds.unwrap_or_default(),
        topology,
        params: raw.params.unwrap_or_default(),
        sweep: raw.sweep.unwrap_or_default(),
    };
    if let Err(ConfigError::Invalid(more)) = cfg.validate() {
        for e in more {
            if !(e.starts_with("seeds") && seeds_missing) && !errs.contains(&e) {
                errs.push(e);
            }
        }
    }
    if errs.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::Invalid(errs))
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
scenario = "teleport"
seeds = [1]

[topology]
nodes = [0, 1]
classical = [{ a = 0, b = 1, latency = 2 }]
quantum = [{ a = 0, b = 1, channel = { type = "identity" } }]

[params]
source = 0
destination = 1
"#;

    #[test]
    fn minimal_teleport_is_valid() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.scenario, Scenario::Teleport);
        assert_eq!(cfg.tuples(), vec![Vec::new()]);
    }

    #[test]
    fn missing_seeds_is_named() {
        let text = MINIMAL.replace("seeds = [1]", "");
        match parse_config(&text) {
            Err(ConfigError::Invalid(v)) => {
                assert_eq!(v.len(), 1, "{v:?}");
                assert!(v[0].starts_with("seeds"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn all_violations_are_reported() {
        let text = r#"
scenario = "teleport"
seeds = []

[topology]
nodes = [0, 1]
classical = [{ a = 0, b = 7, latency = 0 }]

[params]
source = 0
count = "many"

[sweep]
count = []
"#;
        match parse_config(text) {
            Err(ConfigError::Invalid(v)) => {
                let joined = v.join("\n");
                for needle in [
                    "seeds",
                    "sweep.count",
                    "unknown endpoint",
                    "latency",
                    "destination",
                ] {
                    assert!(joined.contains(needle), "missing {needle}: {joined}");
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_scenario_and_syntax_errors() {
        let bad = MINIMAL.replace("\"teleport\"", "\"telepathy\"");
        let err = parse_config(&bad).unwrap_err().to_string();
        assert!(
            err.contains("telepathy") && err.contains("mac-compare"),
            "{err}"
        );
        let broken = parse_config("scenario = \n").unwrap_err().to_string();
        assert!(broken.contains("line 1"), "{broken}");
    }

    #[test]
    fn sweep_of_eleven_values_gives_eleven_tuples() {
        let mut cfg = parse_config(MINIMAL).unwrap();
        let grid: Vec<toml::Value> = (0..=10)
            .map(|i| toml::Value::Float(i as f64 / 10.0))
            .collect();
        cfg.sweep.insert("link_p".into(), grid);
        let tuples = cfg.tuples();
        assert_eq!(tuples.len(), 11);
        assert_eq!(tuple_label(&tuples[3]), "link_p=0.3");
        cfg.sweep.insert("count".into(), vec![1.into(), 2.into()]);
        let tuples = cfg.tuples();
        assert_eq!(tuples.len(), 22);
        assert_eq!(tuple_label(&tuples[1]), "count=1;link_p=0.1");
        cfg.validate().unwrap();
    }

    #[test]
    fn round_trip() {
        let mut cfg = parse_config(MINIMAL).unwrap();
        cfg.sweep
            .insert("link_p".into(), vec![0.0.into(), 0.5.into()]);
        let again = parse_config(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg);
    }
}
