use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::qsim::{kron, projector, spectrum_entropy, CMatrix, QuantumState, C64};

fn plus() -> QuantumState {
    QuantumState::bloch(std::f64::consts::FRAC_PI_2, 0.0)
}

/// Informationally complete single-qubit inputs.
fn probe_states() -> Vec<QuantumState> {
    vec![
        QuantumState::new_register(1, "0").unwrap(),
        QuantumState::new_register(1, "1").unwrap(),
        plus(),
        QuantumState::bloch(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2),
    ]
}

fn random_density(rng: &mut ChaCha8Rng, dim: usize) -> QuantumState {
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    QuantumState::from_matrix(rho / tr).unwrap()
}

/// Random CPTP map: `Kᵢ = Aᵢ S^{-1/2}` with `S = Σ Aᵢ†Aᵢ`.
fn random_channel(rng: &mut ChaCha8Rng, dim: usize, count: usize) -> ChannelModel {
    let a: Vec<CMatrix> = (0..count)
        .map(|_| {
            CMatrix::from_fn(dim, dim, |_, _| {
                C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            })
        })
        .collect();
    let s = a
        .iter()
        .fold(CMatrix::zeros(dim, dim), |acc, k| acc + k.adjoint() * k);
    let eig = s.symmetric_eigen();
    let inv_sqrt = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::new(1.0 / l.sqrt(), 0.0)));
    let s_inv_half = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.adjoint();
    ChannelModel::new(a.iter().map(|k| k * &s_inv_half).collect()).unwrap()
}

fn close(a: &QuantumState, b: &QuantumState, eps: f64) {
    let d = max_abs_diff(a.matrix(), b.matrix());
    assert!(d < eps, "states differ by {d:e}");
}

#[test]
fn depolarizing_endpoints_and_midpoint() {
    let id = ChannelModel::depolarizing(0.0).unwrap();
    let mixed = QuantumState::maximally_mixed(1).unwrap();
    for s in probe_states() {
        close(&id.apply(&s).unwrap(), &s, 1e-12);
        close(
            &ChannelModel::depolarizing(1.0).unwrap().apply(&s).unwrap(),
            &mixed,
            1e-12,
        );
    }
    // (1 - 3p/4)|0><0| + p/4 (X|0><0|X + Y|0><0|Y + Z|0><0|Z) = diag(1 - p/2, p/2)
    let out = ChannelModel::depolarizing(0.5)
        .unwrap()
        .apply(&QuantumState::new_register(1, "0").unwrap())
        .unwrap();
    assert!((out.matrix()[(0, 0)].re - 0.75).abs() < 1e-12);
    assert!((out.matrix()[(1, 1)].re - 0.25).abs() < 1e-12);
    assert!(out.matrix()[(0, 1)].norm() < 1e-12);

    assert!(ChannelModel::depolarizing(-0.1).is_err());
    assert!(ChannelModel::depolarizing(1.5).is_err());
}

#[test]
fn apply_to_subsystem() {
    let bell = QuantumState::zero(2)
        .unwrap()
        .apply_gates(&[
            crate::qsim::GateSpec::h(0),
            crate::qsim::GateSpec::cnot(0, 1),
        ])
        .unwrap();
    let id = ChannelModel::identity(2);
    close(&id.apply_to(&bell, &[1]).unwrap(), &bell, 1e-12);

    let out = ChannelModel::depolarizing(1.0)
        .unwrap()
        .apply_to(&bell, &[1])
        .unwrap();
    close(&out, &QuantumState::maximally_mixed(2).unwrap(), 1e-12);

    assert!(matches!(
        ChannelModel::identity(4).apply_to(&bell, &[0]),
        Err(ChannelError::DimensionMismatch { .. })
    ));
}

#[test]
fn apply_to_matches_brute_force_kraus_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let ch = random_channel(&mut rng, 2, 3);
        let rho = random_density(&mut rng, 8);
        let got = ch.apply_to(&rho, &[1]).unwrap();
        // embed every Kraus operator as I ⊗ K ⊗ I and sum explicitly
        let id2 = CMatrix::identity(2, 2);
        let mut expect = CMatrix::zeros(8, 8);
        for k in ch.kraus_ops() {
            let full = kron(&kron(&id2, k), &id2);
            expect += &full * rho.matrix() * full.adjoint();
        }
        assert!(max_abs_diff(got.matrix(), &expect) < 1e-12);
        got.check_invariants().unwrap();
    }
}

#[test]
fn serial_composition_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ch = random_channel(&mut rng, 2, 2);
    let composed = ChannelModel::compose_serial(&ChannelModel::identity(2), &ch).unwrap();
    for s in probe_states() {
        close(&composed.apply(&s).unwrap(), &ch.apply(&s).unwrap(), 1e-12);
    }

    let absorbing =
        ChannelModel::compose_serial(&ch, &ChannelModel::depolarizing(1.0).unwrap()).unwrap();
    for s in probe_states() {
        close(
            &absorbing.apply(&s).unwrap(),
            &QuantumState::maximally_mixed(1).unwrap(),
            1e-12,
        );
    }

    // dep(q) ∘ dep(p) = dep(1 - (1-p)(1-q))
    for (p, q) in [(0.1, 0.3), (0.5, 0.5), (0.9, 0.2)] {
        let serial = ChannelModel::compose_serial(
            &ChannelModel::depolarizing(p).unwrap(),
            &ChannelModel::depolarizing(q).unwrap(),
        )
        .unwrap();
        let single = ChannelModel::depolarizing(1.0 - (1.0 - p) * (1.0 - q)).unwrap();
        for s in probe_states() {
            close(
                &serial.apply(&s).unwrap(),
                &single.apply(&s).unwrap(),
                1e-12,
            );
        }
    }

    assert!(matches!(
        ChannelModel::compose_serial(&ChannelModel::identity(4), &ch),
        Err(ChannelError::DimensionMismatch { .. })
    ));
}

#[test]
fn minimal_form_preserves_action() {
    let dep = ChannelModel::depolarizing(0.7).unwrap();
    let long = (0..4).fold(ChannelModel::identity(2), |acc, _| {
        ChannelModel::compose_serial(&acc, &dep).unwrap()
    });
    assert_eq!(long.kraus_ops().len(), 256);
    let short = long.minimal();
    assert!(short.kraus_ops().len() <= 4);
    assert!(short.completeness_defect() < 1e-10);
    assert!(long.action_distance(&short).unwrap() < 1e-12);
}

#[test]
fn switch_with_definite_control_is_serial() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let c1 = random_channel(&mut rng, 2, 2);
    let c2 = random_channel(&mut rng, 2, 3);
    let zero = QuantumState::new_register(1, "0").unwrap();
    let one = QuantumState::new_register(1, "1").unwrap();
    let sw0 = quantum_switch(&c1, &c2, &zero).unwrap();
    let sw1 = quantum_switch(&c1, &c2, &one).unwrap();
    let forward = ChannelModel::compose_serial(&c1, &c2).unwrap();
    let backward = ChannelModel::compose_serial(&c2, &c1).unwrap();
    for s in probe_states() {
        let expect0 = forward.apply(&s).unwrap().tensor(&zero).unwrap();
        let expect1 = backward.apply(&s).unwrap().tensor(&one).unwrap();
        close(&sw0.apply(&s).unwrap(), &expect0, 1e-10);
        close(&sw1.apply(&s).unwrap(), &expect1, 1e-10);
    }
}

#[test]
fn switch_rejects_non_qubit_channels() {
    let big = ChannelModel::identity(4);
    assert!(matches!(
        quantum_switch(&big, &ChannelModel::identity(2), &plus()),
        Err(ChannelError::UnsupportedDimension(4))
    ));
}

/// Brute-force output of the switch on `ρ ⊗ |+⟩⟨+|`, built from explicit
/// 4×4 operators without the library's composition helpers.
fn oracle_switch_output(rho: &CMatrix, k1: &[CMatrix], k2: &[CMatrix]) -> CMatrix {
    let p0 = projector(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let p1 = projector(&[C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = projector(&[C64::new(h, 0.0), C64::new(h, 0.0)]);
    let input = kron(rho, &plus);
    let mut out = CMatrix::zeros(4, 4);
    for a in k1 {
        for b in k2 {
            let w = kron(&(b * a), &p0) + kron(&(a * b), &p1);
            out += &w * &input * w.adjoint();
        }
    }
    out
}

/// Conditional blocks `⟨±|ρ|±⟩` of the control, each 2×2 and unnormalised.
fn oracle_control_blocks(joint: &CMatrix) -> [CMatrix; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let vecs = [[h, h], [h, -h]];
    vecs.map(|v| {
        CMatrix::from_fn(2, 2, |r, col| {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..2 {
                for b in 0..2 {
                    acc += joint[(2 * r + a, 2 * col + b)] * v[a] * v[b];
                }
            }
            acc
        })
    })
}

fn oracle_switch_chi(k1: &[CMatrix], k2: &[CMatrix]) -> f64 {
    let inputs = [
        projector(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]),
        projector(&[C64::new(0.0, 0.0), C64::new(1.0, 0.0)]),
    ];
    let mut avg_spec = vec![];
    let mut cond = 0.0;
    let mut avg_blocks = [CMatrix::zeros(2, 2), CMatrix::zeros(2, 2)];
    for rho in &inputs {
        let blocks = oracle_control_blocks(&oracle_switch_output(rho, k1, k2));
        let mut spec = vec![];
        for (i, b) in blocks.iter().enumerate() {
            spec.extend(b.clone().symmetric_eigenvalues().iter().copied());
            avg_blocks[i] += b * C64::new(0.5, 0.0);
        }
        cond += 0.5 * spectrum_entropy(&spec).unwrap();
    }
    for b in &avg_blocks {
        avg_spec.extend(b.clone().symmetric_eigenvalues().iter().copied());
    }
    spectrum_entropy(&avg_spec).unwrap() - cond
}

/// Closed form for two completely depolarizing channels: the control reads
/// `+` w.p. 5/8 with system `(I/2 + ρ/4)·4/5` and `−` w.p. 3/8 with
/// `(I/2 − ρ/4)·4/3`.
fn closed_form_activation_chi() -> f64 {
    let h = |ps: &[f64]| -> f64 { ps.iter().map(|p| -p * p.log2()).sum() };
    let avg = h(&[5.0 / 16.0, 5.0 / 16.0, 3.0 / 16.0, 3.0 / 16.0]);
    let cond = h(&[3.0 / 8.0, 1.0 / 4.0, 1.0 / 8.0, 1.0 / 4.0]);
    avg - cond
}

pub(crate) const ACTIVATION_CHI_GOLDEN: f64 = 0.048_794_940_695_398_25;

#[test]
fn activation_golden_value_from_two_oracles() {
    let closed = closed_form_activation_chi();
    let dep = ChannelModel::depolarizing(1.0).unwrap();
    let brute = oracle_switch_chi(dep.kraus_ops(), dep.kraus_ops());
    assert!((closed - brute).abs() < 1e-12, "{closed} vs {brute}");
    assert!((closed - ACTIVATION_CHI_GOLDEN).abs() < 1e-12, "{closed}");
}

#[test]
fn holevo_examples() {
    let ens = Ensemble::computational_basis();
    let id = holevo_information(&ChannelModel::identity(2), &ens, None).unwrap();
    assert!((id.holevo_bits - 1.0).abs() < 1e-9);
    assert!(id.is_lower_bound);

    let dep = ChannelModel::depolarizing(1.0).unwrap();
    assert!(holevo_information(&dep, &ens, None).unwrap().holevo_bits < 1e-9);

    let sw = quantum_switch(&dep, &dep, &plus()).unwrap();
    let chi = holevo_information(
        &sw,
        &ens,
        Some(ControlReadout::Measure(ControlBasis::PlusMinus)),
    )
    .unwrap()
    .holevo_bits;
    assert!((chi - ACTIVATION_CHI_GOLDEN).abs() < 1e-9, "{chi}");

    let traced = holevo_information(&sw, &ens, Some(ControlReadout::TraceOut))
        .unwrap()
        .holevo_bits;
    assert!(traced < 1e-9, "{traced}");

    let big = Ensemble::new(vec![(1.0, QuantumState::zero(2).unwrap())]).unwrap();
    assert!(matches!(
        holevo_information(&dep, &big, None),
        Err(ChannelError::DimensionMismatch { .. })
    ));
}

#[test]
fn switch_output_is_correlated_with_control() {
    let dep = ChannelModel::depolarizing(1.0).unwrap();
    let sw = quantum_switch(&dep, &dep, &plus()).unwrap();
    let rho = QuantumState::new_register(1, "0").unwrap();
    let out = sw.apply(&rho).unwrap();
    let oracle = oracle_switch_output(rho.matrix(), dep.kraus_ops(), dep.kraus_ops());
    assert!(max_abs_diff(out.matrix(), &oracle) < 1e-12);
    let product = out
        .partial_trace(&[0])
        .unwrap()
        .tensor(&out.partial_trace(&[1]).unwrap())
        .unwrap();
    assert!(max_abs_diff(out.matrix(), product.matrix()) > 1e-3);
}

#[test]
fn ensemble_validation() {
    let zero = QuantumState::zero(1).unwrap();
    assert!(Ensemble::new(vec![]).is_err());
    assert!(Ensemble::new(vec![(0.4, zero.clone()), (0.4, zero.clone())]).is_err());
    assert!(Ensemble::new(vec![(-0.1, zero.clone()), (1.1, zero.clone())]).is_err());
    assert!(Ensemble::new(vec![
        (0.5, zero.clone()),
        (0.5, QuantumState::zero(2).unwrap())
    ])
    .is_err());
}

#[test]
fn polar_grid_never_worse_than_basis() {
    let ch = ChannelModel::depolarizing(0.3).unwrap();
    let basis = holevo_information(&ch, &Ensemble::computational_basis(), None).unwrap();
    let grid = best_over_polar_grid(&ch, None, POLAR_GRID_POINTS).unwrap();
    assert!(grid.holevo_bits >= basis.holevo_bits - 1e-12);
}

#[test]
fn bottleneck_examples() {
    let ens = Ensemble::computational_basis();
    let id = ChannelModel::identity(2);
    let r = bottleneck_check(&id, &id, &ens).unwrap();
    assert!((r.composed_bits - 1.0).abs() < 1e-9 && r.holds);

    let dep = ChannelModel::depolarizing(1.0).unwrap();
    for (a, b) in [(&dep, &id), (&id, &dep)] {
        let r = bottleneck_check(a, b, &ens).unwrap();
        assert!(r.composed_bits < 1e-9 && r.holds);
    }
}

#[test]
fn bottleneck_sweep_against_brute_force() {
    // binary symmetric channel with flip probability p/2: χ = 1 - h(p/2)
    let h2 = |x: f64| {
        if x <= 0.0 || x >= 1.0 {
            0.0
        } else {
            -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
        }
    };
    let ens = Ensemble::computational_basis();
    for i in 1..=9 {
        for j in 1..=9 {
            let (p, q) = (i as f64 / 10.0, j as f64 / 10.0);
            let r = bottleneck_check(
                &ChannelModel::depolarizing(p).unwrap(),
                &ChannelModel::depolarizing(q).unwrap(),
                &ens,
            )
            .unwrap();
            assert!(r.holds);
            let composed = 1.0 - (1.0 - p) * (1.0 - q);
            assert!((r.composed_bits - (1.0 - h2(composed / 2.0))).abs() < 1e-9);
            assert!((r.first_bits - (1.0 - h2(p / 2.0))).abs() < 1e-9);
        }
    }
}

#[test]
fn channel_spec_round_trip() {
    let spec = ChannelSpec::Depolarizing { p: 0.25 };
    let ch = spec.build().unwrap();
    let listed = ChannelSpec::from_channel(&ch);
    let rebuilt = listed.build().unwrap();
    assert!(ch.action_distance(&rebuilt).unwrap() < 1e-15);

    let bad = ChannelSpec::KrausList {
        dim_in: 2,
        dim_out: 2,
        ops: vec![vec![[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.5, 0.0]]],
    };
    assert!(matches!(bad.build(), Err(ChannelError::Incomplete(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constructors_preserve_completeness(p in 0.0f64..=1.0, q in 0.0f64..=1.0, theta in 0.0f64..std::f64::consts::PI, phi in 0.0f64..std::f64::consts::TAU) {
        let a = ChannelModel::depolarizing(p).unwrap();
        let b = ChannelModel::depolarizing(q).unwrap();
        prop_assert!(a.completeness_defect() < 1e-10);
        let serial = ChannelModel::compose_serial(&a, &b).unwrap();
        prop_assert!(serial.completeness_defect() < 1e-10);
        let control = QuantumState::bloch(theta, phi);
        let sw = quantum_switch(&a, &b, &control).unwrap();
        prop_assert!(sw.completeness_defect() < 1e-10);
        prop_assert!(sw.minimal().completeness_defect() < 1e-10);
        prop_assert!(sw.is_completely_positive());
    }

    #[test]
    fn holevo_is_bounded(p in 0.0f64..=1.0, q in 0.0f64..=1.0, theta in 0.0f64..std::f64::consts::PI) {
        let a = ChannelModel::depolarizing(p).unwrap();
        let b = ChannelModel::depolarizing(q).unwrap();
        let ens = Ensemble::antipodal_pair(theta);
        let chi = holevo_information(&a, &ens, None).unwrap().holevo_bits;
        prop_assert!((0.0..=1.0 + 1e-9).contains(&chi));
        let sw = quantum_switch(&a, &b, &plus()).unwrap();
        let chi = holevo_information(&sw, &ens, Some(ControlReadout::Measure(ControlBasis::PlusMinus))).unwrap().holevo_bits;
        prop_assert!((0.0..=2.0 + 1e-9).contains(&chi));
    }
}
