use std::f64::consts::PI;

use super::{ChannelError, ChannelModel, Result};
use crate::qsim::{c, tol, CMatrix, GateKind, QuantumState};

/// Number of polar angles tried by [`best_over_polar_grid`].
pub const POLAR_GRID_POINTS: usize = 64;

/// A classical-quantum input alphabet: states sent with given priors.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    entries: Vec<(f64, QuantumState)>,
}

impl Ensemble {
    pub fn new(entries: Vec<(f64, QuantumState)>) -> Result<Self> {
        let Some((_, first)) = entries.first() else {
            return Err(ChannelError::InvalidEnsemble("no entries".into()));
        };
        let dim = first.dim();
        let mut total = 0.0;
        for (p, s) in &entries {
            if *p < 0.0 || !p.is_finite() {
                return Err(ChannelError::InvalidEnsemble(format!("probability {p}")));
            }
            if s.dim() != dim {
                return Err(ChannelError::DimensionMismatch {
                    expected: dim,
                    found: s.dim(),
                });
            }
            total += p;
        }
        if (total - 1.0).abs() > tol::STRUCTURAL {
            return Err(ChannelError::InvalidEnsemble(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { entries })
    }

    /// Uniform `{|0⟩, |1⟩}`.
    pub fn computational_basis() -> Self {
        Self::antipodal_pair(0.0)
    }

    /// Uniform pair of orthogonal pure qubits at polar angle `theta` (azimuth 0)
    /// and its antipode.
    pub fn antipodal_pair(theta: f64) -> Self {
        Self {
            entries: vec![
                (0.5, QuantumState::bloch(theta, 0.0)),
                (0.5, QuantumState::bloch(PI - theta, PI)),
            ],
        }
    }

    pub fn entries(&self) -> &[(f64, QuantumState)] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries[0].1.dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlBasis {
    Computational,
    PlusMinus,
}

/// What the receiver does with the control qubit, taken to be the last
/// output qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlReadout {
    /// Measure and keep the classical outcome next to the system.
    Measure(ControlBasis),
    /// Discard the control.
    TraceOut,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityEstimate {
    pub holevo_bits: f64,
    pub ensemble_used: Ensemble,
    /// Holevo information for a fixed ensemble only bounds the classical
    /// capacity from below.
    pub is_lower_bound: bool,
}

/// Replaces the last qubit by the classical record of measuring it:
/// `Σ_k (I ⊗ ⟨b_k|) ρ (I ⊗ |b_k⟩) ⊗ |k⟩⟨k|`.
fn measure_last_qubit(state: &QuantumState, basis: ControlBasis) -> QuantumState {
    let n = state.num_qubits();
    let rotated = match basis {
        ControlBasis::Computational => state.clone(),
        ControlBasis::PlusMinus => state.conjugate_local(&GateKind::H.matrix(), &[n - 1]),
    };
    let m = rotated.matrix();
    let d = m.nrows();
    let out = CMatrix::from_fn(d, d, |r, col| {
        if (r ^ col) & 1 == 0 {
            m[(r, col)]
        } else {
            c(0.0, 0.0)
        }
    });
    QuantumState::from_matrix_unchecked(out)
}

fn read_out(state: QuantumState, control: Option<ControlReadout>) -> Result<QuantumState> {
    match control {
        None => Ok(state),
        Some(readout) => {
            let n = state.num_qubits();
            if n < 2 {
                return Err(ChannelError::DimensionMismatch {
                    expected: 4,
                    found: state.dim(),
                });
            }
            Ok(match readout {
                ControlReadout::Measure(basis) => measure_last_qubit(&state, basis),
                ControlReadout::TraceOut => {
                    let keep: Vec<usize> = (0..n - 1).collect();
                    state.partial_trace(&keep)?
                }
            })
        }
    }
}

/// `χ = S(Σ pₓ ρ'ₓ) − Σ pₓ S(ρ'ₓ)` for the channel outputs `ρ'ₓ`.
pub fn holevo_information(
    channel: &ChannelModel,
    ensemble: &Ensemble,
    control: Option<ControlReadout>,
) -> Result<CapacityEstimate> {
    if ensemble.dim() != channel.dim_in() {
        return Err(ChannelError::DimensionMismatch {
            expected: channel.dim_in(),
            found: ensemble.dim(),
        });
    }
    let mut outputs = Vec::with_capacity(ensemble.entries().len());
    for (p, s) in ensemble.entries() {
        outputs.push((*p, read_out(channel.apply(s)?, control)?));
    }
    let d = outputs[0].1.dim();
    let mut average = CMatrix::zeros(d, d);
    let mut conditional = 0.0;
    for (p, s) in &outputs {
        average += s.matrix() * c(*p, 0.0);
        conditional += p * s.von_neumann_entropy()?;
    }
    let total = QuantumState::from_matrix_unchecked(average).von_neumann_entropy()?;
    let chi = total - conditional;
    if chi < -tol::SCALAR {
        return Err(ChannelError::InvalidParameter(format!(
            "negative Holevo quantity {chi:e}"
        )));
    }
    Ok(CapacityEstimate {
        holevo_bits: chi.max(0.0),
        ensemble_used: ensemble.clone(),
        is_lower_bound: true,
    })
}

/// Best χ over antipodal pairs on a fixed polar-angle grid in `[0, π)`.
pub fn best_over_polar_grid(
    channel: &ChannelModel,
    control: Option<ControlReadout>,
    points: usize,
) -> Result<CapacityEstimate> {
    let mut best: Option<CapacityEstimate> = None;
    for k in 0..points.max(1) {
        let theta = PI * k as f64 / points.max(1) as f64;
        let est = holevo_information(channel, &Ensemble::antipodal_pair(theta), control)?;
        if best
            .as_ref()
            .is_none_or(|b| est.holevo_bits > b.holevo_bits)
        {
            best = Some(est);
        }
    }
    Ok(best.expect("at least one grid point"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BottleneckReport {
    pub composed_bits: f64,
    pub first_bits: f64,
    pub second_bits: f64,
    /// `χ(c2∘c1) ≤ min(χ(c1), χ(c2)) + SCALAR`.
    pub holds: bool,
}

pub fn bottleneck_check(
    c1: &ChannelModel,
    c2: &ChannelModel,
    ensemble: &Ensemble,
) -> Result<BottleneckReport> {
    let composed = ChannelModel::compose_serial(c1, c2)?;
    let composed_bits = holevo_information(&composed, ensemble, None)?.holevo_bits;
    let first_bits = holevo_information(c1, ensemble, None)?.holevo_bits;
    // c2 sees the outputs of c1 in the composition, but its own rate is
    // evaluated on the same input alphabet.
    let second_bits = holevo_information(c2, ensemble, None)?.holevo_bits;
    Ok(BottleneckReport {
        composed_bits,
        first_bits,
        second_bits,
        holds: composed_bits <= first_bits.min(second_bits) + tol::SCALAR,
    })
}
