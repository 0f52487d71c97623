/* tslint:disable */
/* eslint-disable */

/**
 * Throughput of W-state access and of slotted contention (with the given
 * transmit probability) as offered load rises from `1/steps` to 1.
 *
 * Rows: `[load, w_throughput, contention_throughput, contention_collisions]`.
 */
export function mac_load_sweep(n_nodes: number, slots: bigint, steps: number, persistence: number, seed: bigint): Float64Array;

/**
 * Holevo rates of two equal depolarizing channels used directly, in
 * series and in a quantum switch, for `steps + 1` values of `p` in `[0, 1]`.
 *
 * Rows: `[p, direct, serial, switch]`.
 */
export function switch_activation_curve(steps: number, grid_points: number): Float64Array;

/**
 * Win counts per node over `rounds` W-state elections.
 */
export function w_election_histogram(n_nodes: number, rounds: number, seed: bigint): Uint32Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly mac_load_sweep: (a: number, b: bigint, c: number, d: number, e: bigint) => [number, number, number, number];
    readonly switch_activation_curve: (a: number, b: number) => [number, number, number, number];
    readonly w_election_histogram: (a: number, b: number, c: bigint) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
