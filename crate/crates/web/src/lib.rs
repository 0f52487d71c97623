//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every function returns a flat `Float64Array` (or `Uint32Array`) that the
//! page reshapes into rows.

use qnet_core::channels::ChannelModel;
use qnet_core::protocols::{make_w_state, w_election_round};
use qnet_core::services::{phy_rate_on_grid, run_mac_sim, MacConfig, MacProtocol, PhyMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Holevo rates of two equal depolarizing channels used directly, in
/// series and in a quantum switch, for `steps + 1` values of `p` in `[0, 1]`.
///
/// Rows: `[p, direct, serial, switch]`.
#[wasm_bindgen]
pub fn switch_activation_curve(steps: usize, grid_points: usize) -> Result<Vec<f64>, JsValue> {
    let steps = steps.max(1);
    let mut out = Vec::with_capacity(4 * (steps + 1));
    for i in 0..=steps {
        let p = i as f64 / steps as f64;
        let ch = ChannelModel::depolarizing(p).map_err(js_err)?;
        let pair = [ch.clone(), ch];
        out.push(p);
        for (links, mode) in [
            (&pair[..1], PhyMode::Direct),
            (&pair[..], PhyMode::Serial),
            (&pair[..], PhyMode::Switch),
        ] {
            out.push(phy_rate_on_grid(links, mode, grid_points).map_err(js_err)?);
        }
    }
    Ok(out)
}

/// Throughput of W-state access and of slotted contention (with the given
/// transmit probability) as offered load rises from `1/steps` to 1.
///
/// Rows: `[load, w_throughput, contention_throughput, contention_collisions]`.
#[wasm_bindgen]
pub fn mac_load_sweep(
    n_nodes: usize,
    slots: u64,
    steps: usize,
    persistence: f64,
    seed: u64,
) -> Result<Vec<f64>, JsValue> {
    let steps = steps.max(1);
    let mut out = Vec::with_capacity(4 * steps);
    for i in 1..=steps {
        let load = i as f64 / steps as f64;
        let base = MacConfig {
            n_nodes,
            slots,
            offered_load: load,
            persistence,
            ..MacConfig::default()
        };
        let w = run_mac_sim(
            &MacConfig {
                protocol: MacProtocol::WStateAccess,
                ..base.clone()
            },
            seed,
        )
        .map_err(js_err)?;
        let c = run_mac_sim(
            &MacConfig {
                protocol: MacProtocol::SlottedContention,
                ..base
            },
            seed,
        )
        .map_err(js_err)?;
        out.extend([load, w.throughput, c.throughput, c.collision_rate]);
    }
    Ok(out)
}

/// Win counts per node over `rounds` W-state elections.
#[wasm_bindgen]
pub fn w_election_histogram(n_nodes: usize, rounds: u32, seed: u64) -> Result<Vec<u32>, JsValue> {
    let template = make_w_state(n_nodes).map_err(js_err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u32; n_nodes];
    for _ in 0..rounds {
        let mut w = template.clone();
        let outcome = w_election_round(&mut w, &mut rng).map_err(js_err)?;
        counts[outcome.winner] += 1;
    }
    Ok(counts)
}
