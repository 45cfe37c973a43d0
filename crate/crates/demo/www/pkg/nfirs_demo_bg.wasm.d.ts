/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const correlation_map: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number];
export const irs_phase_pattern: (a: number, b: number, c: number, d: number, e: number) => [number, number];
export const rayleigh_distance_m: (a: number, b: number) => number;
export const run_trial: (a: number, b: number, c: bigint, d: number, e: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
