use rand::Rng;

use super::{
    bell_measure, bell_state, pauli_frame, EntangledResource, ProtocolError, Result, TwoBits,
};
use crate::qsim::QuantumState;

/// Minimum Bell-state fidelity for a joint state to be decodable.
const DECODE_THRESHOLD: f64 = 0.5;

/// Sender applies `I`, `X`, `Z` or `XZ` to its half (qubit 0) for
/// `00`, `01`, `10`, `11`. Returns the joint two-qubit state the receiver
/// holds once the sender's qubit has been delivered.
pub fn superdense_encode(bits: TwoBits, resource: &EntangledResource) -> Result<QuantumState> {
    resource.require_usable(2)?;
    pauli_frame(&resource.state, bits, 0)
}

/// Bell-basis measurement of the joint state.
pub fn superdense_decode<R: Rng + ?Sized>(joint: &QuantumState, rng: &mut R) -> Result<TwoBits> {
    if joint.num_qubits() != 2 {
        return Err(ProtocolError::ResourceShape {
            expected: 2,
            found: joint.num_qubits(),
        });
    }
    let mut best = (TwoBits::new(0, 0), f64::NEG_INFINITY);
    for b in TwoBits::ALL {
        let f = joint.fidelity(&bell_state(b))?;
        if f > best.1 {
            best = (b, f);
        }
    }
    if best.1 < DECODE_THRESHOLD {
        return Err(ProtocolError::DecodeAmbiguity {
            best_guess: best.0,
            fidelity: best.1,
        });
    }
    let (bits, _) = bell_measure(joint, 0, 1, rng)?;
    Ok(bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::make_bell_pair;
    use crate::qsim::{max_abs_diff, CMatrix, C64};
    use crate::NodeId;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn encodings_hit_the_expected_bell_states() {
        let pair = make_bell_pair();
        let enc = |b| superdense_encode(b, &pair).unwrap();
        assert!(max_abs_diff(enc(TwoBits::new(0, 0)).matrix(), pair.state.matrix()) < 1e-12);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        let psi_plus =
            QuantumState::from_amplitudes(&[z, C64::new(h, 0.0), C64::new(h, 0.0), z]).unwrap();
        let phi_minus =
            QuantumState::from_amplitudes(&[C64::new(h, 0.0), z, z, C64::new(-h, 0.0)]).unwrap();
        assert!(max_abs_diff(enc(TwoBits::new(0, 1)).matrix(), psi_plus.matrix()) < 1e-12);
        assert!(max_abs_diff(enc(TwoBits::new(1, 0)).matrix(), phi_minus.matrix()) < 1e-12);
    }

    #[test]
    fn ideal_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for b in TwoBits::ALL {
            for _ in 0..10 {
                let joint = superdense_encode(b, &make_bell_pair()).unwrap();
                assert_eq!(superdense_decode(&joint, &mut rng).unwrap(), b);
            }
        }
    }

    /// `⟨B_b|ρ|B_b⟩` with the Bell vectors written out explicitly.
    fn born_success(rho: &CMatrix, b: TwoBits) -> f64 {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v: [f64; 4] = match (b.first(), b.second()) {
            (0, 0) => [h, 0.0, 0.0, h],
            (0, 1) => [0.0, h, h, 0.0],
            (1, 0) => [h, 0.0, 0.0, -h],
            _ => [0.0, -h, h, 0.0],
        };
        let mut acc = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                acc += v[i] * rho[(i, j)].re * v[j];
            }
        }
        acc
    }

    #[test]
    fn werner_success_rate_matches_born_rule() {
        let w = 0.9;
        let trials = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let pair = EntangledResource::werner(w, NodeId(0), NodeId(1));
        for b in TwoBits::ALL {
            let joint = superdense_encode(b, &pair).unwrap();
            let oracle = born_success(joint.matrix(), b);
            assert!((oracle - (1.0 + 3.0 * w) / 4.0).abs() < 1e-12);
            let hits = (0..trials)
                .filter(|_| superdense_decode(&joint, &mut rng).unwrap() == b)
                .count();
            let rate = hits as f64 / trials as f64;
            assert!((rate - oracle).abs() < 0.01, "{b}: {rate} vs {oracle}");
        }
    }

    #[test]
    fn maximally_mixed_is_ambiguous() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mixed = QuantumState::maximally_mixed(2).unwrap();
        match superdense_decode(&mixed, &mut rng) {
            Err(ProtocolError::DecodeAmbiguity { fidelity, .. }) => {
                assert!((fidelity - 0.25).abs() < 1e-12)
            }
            other => panic!("expected ambiguity, got {other:?}"),
        }
    }
}
