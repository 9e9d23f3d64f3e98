/* tslint:disable */
/* eslint-disable */

/**
 * Synthetic cells, optionally dried after `late_from`; their leading
 * extremes clustered with `k` clusters (0 picks k by silhouette).
 */
export function cluster_view(n_cells: number, k: number, standardize: boolean, late_depth: number, seed: number): string;

/**
 * Band for `n_cells` cells of uniform probability over 1900..=2014.
 */
export function null_band_view(n_cells: number, k: number, reps: number, seed: number): string;

/**
 * Global wavelet spectrum of `sin(2πt/period) + Normal(0, noise_sd)` over 115 years.
 */
export function wavelet_view(period: number, noise_sd: number, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly cluster_view: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly null_band_view: (a: number, b: number, c: number, d: number) => [number, number];
    readonly wavelet_view: (a: number, b: number, c: number) => [number, number];
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
