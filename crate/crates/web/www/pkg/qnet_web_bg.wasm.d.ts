/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const mac_load_sweep: (a: number, b: bigint, c: number, d: number, e: bigint) => [number, number, number, number];
export const switch_activation_curve: (a: number, b: number) => [number, number, number, number];
export const w_election_histogram: (a: number, b: number, c: bigint) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
