//! Route planning over quantum links. A single path is rated by its weakest
//! link; a superposed pair sends one packet down two link-disjoint paths in
//! superposed order through the switch.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::phy::phy_rate_on_grid;
use super::{PhyMode, Result, ServiceError};
use crate::channels::{ChannelModel, POLAR_GRID_POINTS};
use crate::netsim::Topology;
use crate::qsim::tol;
use crate::NodeId;

/// Links at or below this rate are treated as unusable.
pub const MIN_USABLE_RATE: f64 = 1e-9;

/// Upper bound on simple paths enumerated before candidates are ranked.
const ENUMERATION_LIMIT: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanMode {
    SinglePath,
    SuperposedPair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPlan {
    pub mode: PlanMode,
    /// Node sequences, source first.
    pub paths: Vec<Vec<NodeId>>,
    /// Quantum link indices used by each path, hop by hop.
    pub links: Vec<Vec<usize>>,
    /// Bits per use; for a single path, the weakest link's rate.
    pub effective_rate: f64,
    pub unreachable: bool,
    /// Copies of the packet in flight; a superposed pair still carries one.
    pub packet_instances: u32,
}

impl TrajectoryPlan {
    fn unreachable() -> Self {
        Self {
            mode: PlanMode::SinglePath,
            paths: Vec::new(),
            links: Vec::new(),
            effective_rate: 0.0,
            unreachable: true,
            packet_instances: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoutingOptions {
    /// Polar grid used when rating single links.
    pub link_grid_points: usize,
    /// Polar grid used when rating superposed pairs.
    pub pair_grid_points: usize,
    /// Shortest simple paths (by hops, then node ids) considered for pairing.
    pub max_candidate_paths: usize,
}

impl Default for RoutingOptions {
    fn default() -> Self {
        Self {
            link_grid_points: POLAR_GRID_POINTS,
            pair_grid_points: 16,
            max_candidate_paths: 16,
        }
    }
}

#[derive(Debug, Clone)]
struct Graph {
    /// `adj[v]`: (neighbour index, link index), sorted by neighbour id then link.
    adj: Vec<Vec<(usize, usize)>>,
    ids: Vec<NodeId>,
    index: HashMap<NodeId, usize>,
}

impl Graph {
    fn new(t: &Topology) -> Self {
        let mut ids = t.nodes.clone();
        ids.sort();
        let index: HashMap<NodeId, usize> = ids.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let mut adj = vec![Vec::new(); ids.len()];
        for (k, l) in t.quantum_links.iter().enumerate() {
            let (a, b) = (index[&l.a], index[&l.b]);
            adj[a].push((b, k));
            adj[b].push((a, k));
        }
        for row in &mut adj {
            row.sort();
        }
        Self { adj, ids, index }
    }

    fn endpoints(&self, src: NodeId, dst: NodeId) -> Result<(usize, usize)> {
        let s = *self.index.get(&src).ok_or(ServiceError::UnknownNode(src))?;
        let d = *self.index.get(&dst).ok_or(ServiceError::UnknownNode(dst))?;
        if s == d {
            return Err(ServiceError::SameEndpoints(src));
        }
        Ok((s, d))
    }

    /// Is `dst` reachable from `from` over allowed links without touching
    /// `blocked` nodes?
    fn reaches(
        &self,
        from: usize,
        dst: usize,
        blocked: &[bool],
        allowed: &dyn Fn(usize) -> bool,
    ) -> bool {
        let mut seen = blocked.to_vec();
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            if u == dst {
                return true;
            }
            for &(v, k) in &self.adj[u] {
                if !seen[v] && allowed(k) {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        false
    }
}

fn link_rates(t: &Topology, opts: &RoutingOptions) -> Result<Vec<f64>> {
    t.quantum_links
        .iter()
        .map(|l| {
            phy_rate_on_grid(
                std::slice::from_ref(&l.channel),
                PhyMode::Direct,
                opts.link_grid_points,
            )
        })
        .collect()
}

#[derive(PartialEq)]
struct Width(f64, usize);

impl Eq for Width {}

impl Ord for Width {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .total_cmp(&other.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Width {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Widest-path width from `s` to every node (max-min Dijkstra).
fn widest(g: &Graph, rates: &[f64], s: usize) -> Vec<f64> {
    let mut best = vec![0.0f64; g.ids.len()];
    best[s] = f64::INFINITY;
    let mut done = vec![false; g.ids.len()];
    let mut heap = BinaryHeap::from([Width(f64::INFINITY, s)]);
    while let Some(Width(w, u)) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &(v, k) in &g.adj[u] {
            if rates[k] <= MIN_USABLE_RATE {
                continue;
            }
            let cand = w.min(rates[k]);
            if cand > best[v] {
                best[v] = cand;
                heap.push(Width(cand, v));
            }
        }
    }
    best
}

fn plan_single(t: &Topology, rates: &[f64], src: NodeId, dst: NodeId) -> Result<TrajectoryPlan> {
    let g = Graph::new(t);
    let (s, d) = g.endpoints(src, dst)?;
    let width = widest(&g, rates, s)[d];
    if width <= MIN_USABLE_RATE {
        return Ok(TrajectoryPlan::unreachable());
    }

    // Greedy smallest-id walk over links at least as wide as the optimum,
    // only stepping where the destination stays reachable: yields the
    // lexicographically smallest widest path without backtracking.
    let allowed = |k: usize| rates[k] >= width;
    let mut on_path = vec![false; g.ids.len()];
    on_path[s] = true;
    let (mut nodes, mut links, mut u) = (vec![src], Vec::new(), s);
    while u != d {
        let mut step = None;
        let mut neighbours: Vec<usize> = g.adj[u].iter().map(|&(v, _)| v).collect();
        neighbours.dedup();
        for v in neighbours {
            if on_path[v] {
                continue;
            }
            // Among parallel links to v take the widest, then the lowest index.
            let best_link = g.adj[u]
                .iter()
                .filter(|&&(w, k)| w == v && allowed(k))
                .max_by(|a, b| {
                    rates[a.1]
                        .total_cmp(&rates[b.1])
                        .then_with(|| b.1.cmp(&a.1))
                })
                .map(|&(_, k)| k);
            let Some(k) = best_link else { continue };
            if g.reaches(v, d, &on_path, &allowed) {
                step = Some((v, k));
                break;
            }
        }
        let (v, k) = step.expect("a widest path exists");
        on_path[v] = true;
        nodes.push(g.ids[v]);
        links.push(k);
        u = v;
    }
    Ok(TrajectoryPlan {
        mode: PlanMode::SinglePath,
        paths: vec![nodes],
        links: vec![links],
        effective_rate: width,
        unreachable: false,
        packet_instances: 1,
    })
}

/// Widest single path; ties go to the lexicographically smallest node
/// sequence.
pub fn route_max_bottleneck(
    topology: &Topology,
    src: NodeId,
    dst: NodeId,
) -> Result<TrajectoryPlan> {
    route_max_bottleneck_with(topology, src, dst, &RoutingOptions::default())
}

pub fn route_max_bottleneck_with(
    topology: &Topology,
    src: NodeId,
    dst: NodeId,
    opts: &RoutingOptions,
) -> Result<TrajectoryPlan> {
    let rates = link_rates(topology, opts)?;
    plan_single(topology, &rates, src, dst)
}

/// Simple paths from `s` to `d` as (nodes, links), ordered by hop count,
/// then node sequence, then link sequence.
fn simple_paths(g: &Graph, s: usize, d: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    fn dfs(
        g: &Graph,
        d: usize,
        nodes: &mut Vec<usize>,
        links: &mut Vec<usize>,
        on: &mut [bool],
        out: &mut Vec<(Vec<usize>, Vec<usize>)>,
    ) {
        if out.len() >= ENUMERATION_LIMIT {
            return;
        }
        let u = *nodes.last().expect("non-empty");
        if u == d {
            out.push((nodes.clone(), links.clone()));
            return;
        }
        for &(v, k) in &g.adj[u] {
            if on[v] {
                continue;
            }
            on[v] = true;
            nodes.push(v);
            links.push(k);
            dfs(g, d, nodes, links, on, out);
            links.pop();
            nodes.pop();
            on[v] = false;
        }
    }
    let mut on = vec![false; g.ids.len()];
    on[s] = true;
    let mut out = Vec::new();
    dfs(g, d, &mut vec![s], &mut Vec::new(), &mut on, &mut out);
    out.sort_by(|a, b| a.1.len().cmp(&b.1.len()).then_with(|| a.cmp(b)));
    out
}

fn path_channel(t: &Topology, links: &[usize]) -> Result<ChannelModel> {
    let mut ch = t.quantum_links[links[0]].channel.clone();
    for &k in &links[1..] {
        ch = ChannelModel::compose_serial(&ch, &t.quantum_links[k].channel)?.minimal();
    }
    Ok(ch)
}

/// Best of the widest single path and every superposed pair of
/// link-disjoint candidate paths. Never worse than [`route_max_bottleneck`].
pub fn route_with_switch_merging(
    topology: &Topology,
    src: NodeId,
    dst: NodeId,
) -> Result<TrajectoryPlan> {
    route_with_switch_merging_with(topology, src, dst, &RoutingOptions::default())
}

pub fn route_with_switch_merging_with(
    topology: &Topology,
    src: NodeId,
    dst: NodeId,
    opts: &RoutingOptions,
) -> Result<TrajectoryPlan> {
    let rates = link_rates(topology, opts)?;
    let single = plan_single(topology, &rates, src, dst)?;

    let g = Graph::new(topology);
    let (s, d) = g.endpoints(src, dst)?;
    let mut candidates = simple_paths(&g, s, d);
    candidates.truncate(opts.max_candidate_paths);
    let channels = candidates
        .iter()
        .map(|(_, links)| path_channel(topology, links))
        .collect::<Result<Vec<_>>>()?;

    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..candidates.len() {
        for j in i + 1..candidates.len() {
            let disjoint = !candidates[i].1.iter().any(|k| candidates[j].1.contains(k));
            if !disjoint {
                continue;
            }
            let pair = [channels[i].clone(), channels[j].clone()];
            let rate = phy_rate_on_grid(&pair, PhyMode::Switch, opts.pair_grid_points)?;
            if best.is_none_or(|(r, _, _)| rate > r) {
                best = Some((rate, i, j));
            }
        }
    }

    match best {
        Some((rate, i, j))
            if rate > MIN_USABLE_RATE && rate > single.effective_rate + tol::SCALAR =>
        {
            let to_ids = |p: &[usize]| p.iter().map(|&v| g.ids[v]).collect::<Vec<_>>();
            Ok(TrajectoryPlan {
                mode: PlanMode::SuperposedPair,
                paths: vec![to_ids(&candidates[i].0), to_ids(&candidates[j].0)],
                links: vec![candidates[i].1.clone(), candidates[j].1.clone()],
                effective_rate: rate,
                unreachable: false,
                packet_instances: 1,
            })
        }
        _ => Ok(single),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netsim::QuantumLink;
    use proptest::prelude::*;

    fn dep(p: f64) -> ChannelModel {
        ChannelModel::depolarizing(p).unwrap()
    }

    fn graph(n: u32, edges: &[(u32, u32, f64)]) -> Topology {
        edges.iter().fold(Topology::with_nodes(n), |t, &(a, b, p)| {
            t.quantum(QuantumLink::new(NodeId(a), NodeId(b), dep(p)))
        })
    }

    fn ids(v: &[u32]) -> Vec<NodeId> {
        v.iter().copied().map(NodeId).collect()
    }

    /// Six nodes, two dep(1) routes 0-1-2-5 and 0-3-4-5, a clean cross link
    /// 1-4: every route crosses a completely depolarizing link.
    fn canned() -> Topology {
        let mut t = graph(
            6,
            &[
                (0, 1, 1.0),
                (1, 2, 1.0),
                (2, 5, 1.0),
                (0, 3, 1.0),
                (3, 4, 1.0),
                (4, 5, 1.0),
            ],
        );
        t.quantum_links.push(QuantumLink::new(
            NodeId(1),
            NodeId(4),
            ChannelModel::identity(2),
        ));
        t
    }

    /// Exhaustive oracle: every simple node path, each hop on its widest
    /// link; maximise the minimum, ties to the smallest node sequence.
    fn brute_force(t: &Topology, rates: &[f64], src: u32, dst: u32) -> (f64, Vec<NodeId>) {
        let n = t.nodes.len();
        let hop = |a: usize, b: usize| {
            t.quantum_links
                .iter()
                .enumerate()
                .filter(|(_, l)| l.connects(NodeId(a as u32), NodeId(b as u32)))
                .map(|(k, _)| rates[k])
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let mut best = (0.0, Vec::new());
        let mut stack = vec![vec![src as usize]];
        while let Some(path) = stack.pop() {
            let last = *path.last().unwrap();
            if last == dst as usize {
                let w = path
                    .windows(2)
                    .map(|h| hop(h[0], h[1]))
                    .fold(f64::INFINITY, f64::min);
                let nodes: Vec<NodeId> = path.iter().map(|&v| NodeId(v as u32)).collect();
                if w > MIN_USABLE_RATE && (w > best.0 || (w == best.0 && nodes < best.1)) {
                    best = (w, nodes);
                }
                continue;
            }
            for v in 0..n {
                if !path.contains(&v) && hop(last, v) > f64::NEG_INFINITY {
                    let mut next = path.clone();
                    next.push(v);
                    stack.push(next);
                }
            }
        }
        best
    }

    #[test]
    fn chain_bottleneck_is_the_minimum() {
        let mut t = graph(3, &[(1, 2, 0.0)]);
        // a link of exactly half a bit: dep(p) with 1 - h(p/2) = 0.5
        let h = |x: f64| -x * x.log2() - (1.0 - x) * (1.0 - x).log2();
        let (mut lo, mut hi) = (0.0, 0.5);
        for _ in 0..100 {
            let mid = (lo + hi) / 2.0;
            if h(mid) < 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        t.quantum_links
            .insert(0, QuantumLink::new(NodeId(0), NodeId(1), dep(2.0 * lo)));
        let plan = route_max_bottleneck(&t, NodeId(0), NodeId(2)).unwrap();
        assert!((plan.effective_rate - 0.5).abs() < 1e-9);
        assert_eq!(plan.paths, vec![ids(&[0, 1, 2])]);
        assert_eq!(plan.links, vec![vec![0, 1]]);
    }

    #[test]
    fn dead_network_is_unreachable() {
        let t = graph(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]);
        let plan = route_max_bottleneck(&t, NodeId(0), NodeId(2)).unwrap();
        assert!(plan.unreachable);
        assert_eq!(plan.effective_rate, 0.0);
        assert!(plan.paths.is_empty());
    }

    #[test]
    fn five_node_mesh_matches_enumeration() {
        let t = graph(
            5,
            &[
                (0, 1, 0.1),
                (0, 2, 0.3),
                (1, 2, 0.05),
                (1, 3, 0.4),
                (2, 3, 0.2),
                (2, 4, 0.6),
                (3, 4, 0.1),
                (1, 4, 0.9),
            ],
        );
        let rates = link_rates(&t, &RoutingOptions::default()).unwrap();
        for (s, d) in [(0, 4), (4, 0), (1, 2), (0, 3)] {
            let plan = route_max_bottleneck(&t, NodeId(s), NodeId(d)).unwrap();
            let (w, p) = brute_force(&t, &rates, s, d);
            assert_eq!(plan.effective_rate, w);
            assert_eq!(plan.paths[0], p);
        }
    }

    #[test]
    fn canned_topology_needs_superposition() {
        let t = canned();
        let single = route_max_bottleneck(&t, NodeId(0), NodeId(5)).unwrap();
        assert!(single.unreachable);
        let merged = route_with_switch_merging(&t, NodeId(0), NodeId(5)).unwrap();
        assert_eq!(merged.mode, PlanMode::SuperposedPair);
        assert!(merged.effective_rate > 0.02);
        // each path is a chain of dep(1) links, i.e. dep(1) itself
        let golden = crate::channels::tests::ACTIVATION_CHI_GOLDEN;
        assert!((merged.effective_rate - golden).abs() < 1e-9);
        assert_eq!(merged.packet_instances, 1);
        assert_eq!(merged.paths.len(), 2);
        assert!(!merged.links[0].iter().any(|k| merged.links[1].contains(k)));
    }

    #[test]
    fn clean_path_beats_superposition() {
        let mut t = canned();
        t.quantum_links.push(QuantumLink::new(
            NodeId(0),
            NodeId(5),
            ChannelModel::identity(2),
        ));
        let plan = route_with_switch_merging(&t, NodeId(0), NodeId(5)).unwrap();
        assert_eq!(plan.mode, PlanMode::SinglePath);
        assert!((plan.effective_rate - 1.0).abs() < 1e-9);
        assert_eq!(plan.paths, vec![ids(&[0, 5])]);
    }

    #[test]
    fn bad_endpoints_are_rejected() {
        let t = canned();
        assert_eq!(
            route_max_bottleneck(&t, NodeId(0), NodeId(0)).unwrap_err(),
            ServiceError::SameEndpoints(NodeId(0))
        );
        assert_eq!(
            route_with_switch_merging(&t, NodeId(0), NodeId(9)).unwrap_err(),
            ServiceError::UnknownNode(NodeId(9))
        );
    }

    fn arb_graph() -> impl Strategy<Value = Topology> {
        (3u32..=8).prop_flat_map(|n| {
            let pairs: Vec<(u32, u32)> = (0..n)
                .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                .collect();
            let m = pairs.len();
            (
                Just(n),
                Just(pairs),
                proptest::collection::vec(proptest::option::weighted(0.45, 0u8..=10), m),
            )
                .prop_map(|(n, pairs, picks)| {
                    let edges: Vec<(u32, u32, f64)> = pairs
                        .iter()
                        .zip(picks)
                        .filter_map(|(&(a, b), p)| p.map(|p| (a, b, p as f64 / 10.0)))
                        .collect();
                    graph(n, &edges)
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn single_path_equals_enumeration(t in arb_graph()) {
            let rates = link_rates(&t, &RoutingOptions::default()).unwrap();
            let d = t.nodes.len() as u32 - 1;
            let plan = route_max_bottleneck(&t, NodeId(0), NodeId(d)).unwrap();
            let (w, p) = brute_force(&t, &rates, 0, d);
            prop_assert_eq!(plan.effective_rate, w);
            prop_assert_eq!(plan.unreachable, p.is_empty());
            if !p.is_empty() {
                prop_assert_eq!(&plan.paths[0], &p);
            }
        }

        #[test]
        fn merging_dominates_single_path(t in arb_graph()) {
            let d = t.nodes.len() as u32 - 1;
            let single = route_max_bottleneck(&t, NodeId(0), NodeId(d)).unwrap();
            let merged = route_with_switch_merging(&t, NodeId(0), NodeId(d)).unwrap();
            prop_assert!(merged.effective_rate >= single.effective_rate);
            prop_assert_eq!(merged.packet_instances, 1);
        }
    }
}
