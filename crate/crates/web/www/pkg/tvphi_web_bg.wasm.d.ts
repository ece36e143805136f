/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_denoiseresult_free: (a: number, b: number) => void;
export const denoise_two_region: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const denoiseresult_clean: (a: number) => [number, number];
export const denoiseresult_denoised: (a: number) => [number, number];
export const denoiseresult_iterations: (a: number) => number;
export const denoiseresult_metrics: (a: number) => [number, number];
export const denoiseresult_noisy: (a: number) => [number, number];
export const denoiseresult_size: (a: number) => number;
export const limit_traces: (a: number) => [number, number, number, number];
export const phi_curves: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const __externref_table_alloc: () => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
