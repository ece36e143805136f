/* tslint:disable */
/* eslint-disable */

export class DenoiseResult {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly clean: Uint8Array;
    readonly denoised: Uint8Array;
    readonly iterations: number;
    readonly metrics: Float64Array;
    readonly noisy: Uint8Array;
    readonly size: number;
}

/**
 * A negative `cutoff` selects the pure power integrand.
 */
export function denoise_two_region(size: number, sigma: number, seed: number, q: number, cutoff: number, alpha_infty: number): DenoiseResult;

export function limit_traces(q: number): Float64Array;

export function phi_curves(q: number, cutoff: number, t_max: number, n: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_denoiseresult_free: (a: number, b: number) => void;
    readonly denoise_two_region: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly denoiseresult_clean: (a: number) => [number, number];
    readonly denoiseresult_denoised: (a: number) => [number, number];
    readonly denoiseresult_iterations: (a: number) => number;
    readonly denoiseresult_metrics: (a: number) => [number, number];
    readonly denoiseresult_noisy: (a: number) => [number, number];
    readonly denoiseresult_size: (a: number) => number;
    readonly limit_traces: (a: number) => [number, number, number, number];
    readonly phi_curves: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __externref_table_alloc: () => number;
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
