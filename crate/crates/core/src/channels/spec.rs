use serde::{Deserialize, Serialize};

use super::{ChannelError, ChannelModel, Result};
use crate::qsim::{c, CMatrix};

/// Structured-text description of a channel.
///
/// ```toml
/// channel = { type = "depolarizing", p = 0.2 }
/// channel = { type = "kraus-list", dim_in = 2, dim_out = 2, ops = [[[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]] }
/// ```
///
/// Kraus operators are listed row-major as `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ChannelSpec {
    Identity,
    Depolarizing {
        p: f64,
    },
    KrausList {
        dim_in: usize,
        dim_out: usize,
        ops: Vec<Vec<[f64; 2]>>,
    },
}

impl ChannelSpec {
    pub fn build(&self) -> Result<ChannelModel> {
        match self {
            ChannelSpec::Identity => Ok(ChannelModel::identity(2)),
            ChannelSpec::Depolarizing { p } => ChannelModel::depolarizing(*p),
            ChannelSpec::KrausList {
                dim_in,
                dim_out,
                ops,
            } => {
                let mut kraus = Vec::with_capacity(ops.len());
                for op in ops {
                    if op.len() != dim_in * dim_out {
                        return Err(ChannelError::DimensionMismatch {
                            expected: dim_in * dim_out,
                            found: op.len(),
                        });
                    }
                    let entries: Vec<_> = op.iter().map(|[re, im]| c(*re, *im)).collect();
                    kraus.push(CMatrix::from_row_slice(*dim_out, *dim_in, &entries));
                }
                ChannelModel::new(kraus)
            }
        }
    }

    /// Serialises an arbitrary channel as a Kraus list.
    pub fn from_channel(ch: &ChannelModel) -> Self {
        let ops = ch
            .kraus_ops()
            .iter()
            .map(|k| {
                let mut row_major = Vec::with_capacity(k.len());
                for r in 0..k.nrows() {
                    for col in 0..k.ncols() {
                        let z = k[(r, col)];
                        row_major.push([z.re, z.im]);
                    }
                }
                row_major
            })
            .collect();
        ChannelSpec::KrausList {
            dim_in: ch.dim_in(),
            dim_out: ch.dim_out(),
            ops,
        }
    }
}
