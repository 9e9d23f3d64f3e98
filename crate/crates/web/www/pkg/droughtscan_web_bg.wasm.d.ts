/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const cluster_view: (a: number, b: number, c: number, d: number, e: number) => [number, number];
export const null_band_view: (a: number, b: number, c: number, d: number) => [number, number];
export const wavelet_view: (a: number, b: number, c: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
