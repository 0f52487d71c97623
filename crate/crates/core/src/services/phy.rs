use serde::{Deserialize, Serialize};

use super::{Result, ServiceError};
use crate::channels::{
    best_over_polar_grid, quantum_switch, ChannelModel, ControlBasis, ControlReadout,
    POLAR_GRID_POINTS,
};
use crate::qsim::QuantumState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhyMode {
    /// One link on its own.
    Direct,
    /// Two links in a fixed order.
    Serial,
    /// Two links in superposed order with control `|+⟩`, the control
    /// measured in the `±` basis at the receiver.
    Switch,
}

impl PhyMode {
    pub const ALL: [PhyMode; 3] = [PhyMode::Direct, PhyMode::Serial, PhyMode::Switch];

    pub fn link_count(self) -> usize {
        match self {
            PhyMode::Direct => 1,
            PhyMode::Serial | PhyMode::Switch => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PhyMode::Direct => "direct",
            PhyMode::Serial => "serial",
            PhyMode::Switch => "switch",
        }
    }
}

/// End-to-end channel seen by the bit service, plus how the receiver
/// treats the control qubit.
pub(crate) fn phy_channel(
    links: &[ChannelModel],
    mode: PhyMode,
) -> Result<(ChannelModel, Option<ControlReadout>)> {
    if links.len() != mode.link_count() {
        return Err(ServiceError::LinkCount {
            mode,
            expected: mode.link_count(),
            found: links.len(),
        });
    }
    Ok(match mode {
        PhyMode::Direct => (links[0].clone(), None),
        PhyMode::Serial => (ChannelModel::compose_serial(&links[0], &links[1])?, None),
        PhyMode::Switch => (
            quantum_switch(
                &links[0],
                &links[1],
                &QuantumState::bloch(std::f64::consts::FRAC_PI_2, 0.0),
            )?,
            Some(ControlReadout::Measure(ControlBasis::PlusMinus)),
        ),
    })
}

/// Holevo rate in bits per channel use, maximised over antipodal input
/// pairs on a polar grid of `points` angles.
pub fn phy_rate_on_grid(links: &[ChannelModel], mode: PhyMode, points: usize) -> Result<f64> {
    let (channel, readout) = phy_channel(links, mode)?;
    Ok(best_over_polar_grid(&channel, readout, points)?.holevo_bits)
}

/// Bits per use of the bit transmission service over `links` in `mode`.
pub fn phy_effective_rate(links: &[ChannelModel], mode: PhyMode) -> Result<f64> {
    phy_rate_on_grid(links, mode, POLAR_GRID_POINTS)
}
