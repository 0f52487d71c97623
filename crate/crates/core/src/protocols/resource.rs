use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;

use super::{ProtocolError, Result, TwoBits};
use crate::channels::ChannelModel;
use crate::qsim::{c, CMatrix, GateSpec, QuantumState, C64};
use crate::NodeId;

pub const MIN_W_NODES: usize = 2;
pub const MAX_W_NODES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResourceKind {
    BellPhiPlus,
    WState(usize),
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResourceStatus {
    Fresh,
    /// A swap whose correction never arrived.
    Uncorrected,
    Consumed,
}

/// An entangled state together with the nodes holding each of its qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct EntangledResource {
    pub state: QuantumState,
    pub kind: ResourceKind,
    pub holders: Vec<NodeId>,
    pub status: ResourceStatus,
    /// Fidelity to `|Φ+⟩` for Bell-type resources.
    pub fidelity: Option<f64>,
}

/// `(Z^{first} X^{second} ⊗ I)|Φ+⟩`, i.e. `Φ+`, `Ψ+`, `Φ−`, `Ψ−` for
/// `00`, `01`, `10`, `11`.
pub fn bell_state(bits: TwoBits) -> QuantumState {
    let h = FRAC_1_SQRT_2;
    let z = c(0.0, 0.0);
    let sign = if bits.first() == 1 { -1.0 } else { 1.0 };
    let amps: [C64; 4] = if bits.second() == 0 {
        // (|00⟩ ± |11⟩)/√2
        [c(h, 0.0), z, z, c(sign * h, 0.0)]
    } else {
        // (|10⟩ ± |01⟩)/√2 up to global phase
        [z, c(sign * h, 0.0), c(h, 0.0), z]
    };
    QuantumState::from_amplitudes(&amps).expect("two-qubit amplitudes")
}

/// `w·Φ+ + (1−w)·I/4`.
pub fn werner_state(w: f64) -> QuantumState {
    let w = w.clamp(0.0, 1.0);
    let phi = bell_state(TwoBits::new(0, 0));
    let m = phi.matrix() * c(w, 0.0) + CMatrix::identity(4, 4) * c((1.0 - w) / 4.0, 0.0);
    QuantumState::from_matrix(m).expect("Werner state")
}

/// Haar-random pure qubit.
pub fn haar_qubit<R: Rng + ?Sized>(rng: &mut R) -> QuantumState {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    QuantumState::bloch((1.0 - 2.0 * u).acos(), 2.0 * PI * v)
}

pub fn make_bell_pair() -> EntangledResource {
    EntangledResource::bell_pair(NodeId(0), NodeId(1))
}

/// `n`-qubit W state held by nodes `0..n`.
pub fn make_w_state(n: usize) -> Result<EntangledResource> {
    let holders = (0..n as u32).map(NodeId).collect();
    EntangledResource::w_state(holders)
}

impl EntangledResource {
    pub fn bell_pair(a: NodeId, b: NodeId) -> Self {
        Self {
            state: bell_state(TwoBits::new(0, 0)),
            kind: ResourceKind::BellPhiPlus,
            holders: vec![a, b],
            status: ResourceStatus::Fresh,
            fidelity: Some(1.0),
        }
    }

    pub fn werner(w: f64, a: NodeId, b: NodeId) -> Self {
        let mut r = Self::bell_pair(a, b);
        r.state = werner_state(w);
        r.refresh_fidelity();
        r
    }

    pub fn w_state(holders: Vec<NodeId>) -> Result<Self> {
        let n = holders.len();
        if !(MIN_W_NODES..=MAX_W_NODES).contains(&n) {
            return Err(ProtocolError::WCapacity {
                min: MIN_W_NODES,
                max: MAX_W_NODES,
                found: n,
            });
        }
        let dim = 1usize << n;
        let mut amps = vec![c(0.0, 0.0); dim];
        for q in 0..n {
            amps[1 << q] = c(1.0, 0.0);
        }
        Ok(Self {
            state: QuantumState::from_amplitudes(&amps)?,
            kind: ResourceKind::WState(n),
            holders,
            status: ResourceStatus::Fresh,
            fidelity: None,
        })
    }

    pub fn custom(state: QuantumState, holders: Vec<NodeId>) -> Result<Self> {
        if holders.len() != state.num_qubits() {
            return Err(ProtocolError::ResourceShape {
                expected: state.num_qubits(),
                found: holders.len(),
            });
        }
        Ok(Self {
            state,
            kind: ResourceKind::Custom,
            holders,
            status: ResourceStatus::Fresh,
            fidelity: None,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.state.num_qubits()
    }

    /// Sends every qubit of the resource through `channel`.
    pub fn degrade(&mut self, channel: &ChannelModel) -> Result<()> {
        let mut s = self.state.clone();
        for q in 0..s.num_qubits() {
            s = channel.apply_to(&s, &[q])?;
        }
        self.state = s;
        self.refresh_fidelity();
        Ok(())
    }

    /// The same two-qubit resource with holder order (and qubit order) swapped.
    pub fn reversed(&self) -> Result<Self> {
        if self.num_qubits() != 2 {
            return Err(ProtocolError::ResourceShape {
                expected: 2,
                found: self.num_qubits(),
            });
        }
        let swap = [
            GateSpec::cnot(0, 1),
            GateSpec::cnot(1, 0),
            GateSpec::cnot(0, 1),
        ];
        let mut out = self.clone();
        out.state = self.state.apply_gates(&swap)?;
        out.holders.reverse();
        Ok(out)
    }

    pub(crate) fn refresh_fidelity(&mut self) {
        if self.kind == ResourceKind::BellPhiPlus {
            self.fidelity = self.state.fidelity(&bell_state(TwoBits::new(0, 0))).ok();
        }
    }

    pub(crate) fn require_usable(&self, qubits: usize) -> Result<()> {
        match self.status {
            ResourceStatus::Consumed => return Err(ProtocolError::ResourceConsumed),
            ResourceStatus::Uncorrected => return Err(ProtocolError::ResourceUncorrected),
            ResourceStatus::Fresh => {}
        }
        if self.num_qubits() != qubits {
            return Err(ProtocolError::ResourceShape {
                expected: qubits,
                found: self.num_qubits(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::max_abs_diff;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bell_pair_is_ideal() {
        let pair = make_bell_pair();
        assert_eq!(pair.fidelity, Some(1.0));
        let mixed = QuantumState::maximally_mixed(1).unwrap();
        for q in [0, 1] {
            let m = pair.state.partial_trace(&[q]).unwrap();
            assert!(max_abs_diff(m.matrix(), mixed.matrix()) < 1e-12);
        }
    }

    #[test]
    fn bell_pair_measurement_statistics() {
        let pair = make_bell_pair();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let trials = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..trials {
            let (a, s) = pair.state.measure(0, &mut rng).unwrap();
            let (b, _) = s.measure(1, &mut rng).unwrap();
            counts[(a.bit * 2 + b.bit) as usize] += 1;
        }
        assert_eq!(counts[1] + counts[2], 0);
        for k in [0, 3] {
            let f = counts[k] as f64 / trials as f64;
            assert!((f - 0.5).abs() < 0.01, "{f}");
        }
    }

    #[test]
    fn w_state_amplitudes() {
        let two = make_w_state(2).unwrap();
        let h = FRAC_1_SQRT_2;
        let expect =
            QuantumState::from_amplitudes(&[c(0.0, 0.0), c(h, 0.0), c(h, 0.0), c(0.0, 0.0)])
                .unwrap();
        assert!(max_abs_diff(two.state.matrix(), expect.matrix()) < 1e-12);

        let three = make_w_state(3).unwrap();
        for i in 0..8 {
            let expect = if [1, 2, 4].contains(&i) {
                1.0 / 3.0
            } else {
                0.0
            };
            assert!((three.state.matrix()[(i, i)].re - expect).abs() < 1e-12);
        }
        for n in MIN_W_NODES..=MAX_W_NODES {
            let w = make_w_state(n).unwrap();
            assert!((w.state.purity() - 1.0).abs() < 1e-10);
            assert_eq!(w.holders.len(), n);
            assert_eq!(w.kind, ResourceKind::WState(n));
        }
        assert!(matches!(
            make_w_state(1),
            Err(ProtocolError::WCapacity { .. })
        ));
        assert!(matches!(
            make_w_state(11),
            Err(ProtocolError::WCapacity { .. })
        ));
    }

    #[test]
    fn bell_states_are_orthonormal() {
        for a in TwoBits::ALL {
            for b in TwoBits::ALL {
                let f = bell_state(a).fidelity(&bell_state(b)).unwrap();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((f - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degrading_both_halves_gives_werner() {
        // dep(p) on each qubit of Φ+ leaves a Werner state with w = (1-p)²
        let mut pair = make_bell_pair();
        pair.degrade(&ChannelModel::depolarizing(0.2).unwrap())
            .unwrap();
        let expect = werner_state(0.64);
        assert!(max_abs_diff(pair.state.matrix(), expect.matrix()) < 1e-12);
        let f = pair.fidelity.unwrap();
        assert!((f - (1.0 + 3.0 * 0.64) / 4.0).abs() < 1e-9);
    }

    #[test]
    fn reversal_swaps_qubits_and_holders() {
        let prod = QuantumState::new_register(2, "10").unwrap();
        let r = EntangledResource::custom(prod, vec![NodeId(3), NodeId(7)]).unwrap();
        let rev = r.reversed().unwrap();
        assert_eq!(rev.holders, vec![NodeId(7), NodeId(3)]);
        let expect = QuantumState::new_register(2, "01").unwrap();
        assert!(max_abs_diff(rev.state.matrix(), expect.matrix()) < 1e-12);
    }
}
