/* tslint:disable */
/* eslint-disable */

/**
 * Generates a synthetic elevated network, solves it with and without
 * gravity and returns the per-node differences with histogram and CDF.
 */
export function gravity_histogram(config: string): string;

/**
 * Sweeps the inclination for both equations of state and both inertia
 * settings; returns the rows of the sweep table as JSON.
 */
export function incline_sweep(config: string): string;

/**
 * Integrates one pipe and returns `{x, pressure, sens_inlet, sens_flow}`
 * (SI units) as JSON.
 */
export function pipe_profile(config: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly gravity_histogram: (a: number, b: number) => [number, number, number, number];
    readonly incline_sweep: (a: number, b: number) => [number, number, number, number];
    readonly pipe_profile: (a: number, b: number) => [number, number, number, number];
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
