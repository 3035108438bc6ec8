/* tslint:disable */
/* eslint-disable */

/**
 * Admissibility of an index system `(i₀; I; J; j_∞)` with degree at `p`.
 */
export function check_admissible(lead: string, i_set: string, j_set: string, trail: string, p: number): string;

/**
 * Decay profile and multiplicities `D_1..D_nmax` of a curve given as JSON,
 * at `p = 3`.
 */
export function decay_profile(curve_json: string, omega: string, n_max: number): string;

/**
 * `q_L(m)` and `q_L(m)/m^{3/2}` for the ambient lattice, `m` in `lo..=hi`.
 */
export function eisenstein_growth(lo: number, hi: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly check_admissible: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number, number];
    readonly decay_profile: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly eisenstein_growth: (a: number, b: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
