/* tslint:disable */
/* eslint-disable */

/**
 * Normalized correlation `|a(th, ph, u_assumed)^H a(theta, phi, u)|^2 / N^2`
 * over a `grid x grid` lattice of elevation `(0, 180)` deg (rows) and
 * azimuth `(-90, 90)` deg (columns). With `assumed_distance_m` equal to the
 * true distance the peak sits at the true angles; far-field atoms (a very
 * large assumed distance) smear it for nearby scatterers.
 */
export function correlation_map(theta_deg: number, phi_deg: number, distance_m: number, assumed_distance_m: number, n_y: number, n_z: number, grid: number): Float64Array;

/**
 * Phase (radians, in `(-pi, pi]`) of every IRS element for a scatterer at
 * `(theta, phi, distance)`, row-major over `n_z` rows of `n_y` elements.
 * The reference element has phase 0; a planar wavefront would make each
 * row an arithmetic progression.
 */
export function irs_phase_pattern(theta_deg: number, phi_deg: number, distance_m: number, n_y: number, n_z: number): Float64Array;

/**
 * Rayleigh distance (m) of an `n_y x n_z` IRS at the default carrier.
 */
export function rayleigh_distance_m(n_y: number, n_z: number): number;

/**
 * Draws one scenario, estimates it at `snr_db` and returns truth, estimate
 * and error figures as JSON. Estimates are listed in the order matched to
 * the truth.
 */
export function run_trial(snr_db: number, paths: number, seed: bigint, d_lo: number, d_hi: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly correlation_map: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number];
    readonly irs_phase_pattern: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly rayleigh_distance_m: (a: number, b: number) => number;
    readonly run_trial: (a: number, b: number, c: bigint, d: number, e: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
