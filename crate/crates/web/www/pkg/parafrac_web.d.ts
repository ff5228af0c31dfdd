/* tslint:disable */
/* eslint-disable */

/**
 * Result of [`analyze_curve`].
 */
export class Analysis {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    area(): Float64Array;
    /**
     * Directed areas as `[re, im, …]`.
     */
    directed(): Float64Array;
    eps(): Float64Array;
    /**
     * `[dim_B, k, Re a₁, Im a₁, Re a, Im a]` from the fit.
     */
    invariants(): Float64Array;
    /**
     * `[k, Re a₁, Im a₁, Re a, Im a]` from the series.
     */
    series(): Float64Array;
    warnings(): string;
}

/**
 * Exact areas over a log grid, box dimension and invariants from the fit.
 */
export function analyze_curve(coeffs: Float64Array, z0: Float64Array, eps_min: number, eps_max: number, count: number): Analysis;

export function default_grid(coeffs: Float64Array): Float64Array;

/**
 * `z0` (empty for the default start) and its first `n` iterates.
 */
export function orbit(coeffs: Float64Array, z0: Float64Array, n: number): Float64Array;

/**
 * `[k, Re a₁, Im a₁, Re a, Im a]` by formal reduction.
 */
export function series_invariants(coeffs: Float64Array): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_analysis_free: (a: number, b: number) => void;
    readonly analysis_area: (a: number) => [number, number];
    readonly analysis_directed: (a: number) => [number, number];
    readonly analysis_eps: (a: number) => [number, number];
    readonly analysis_invariants: (a: number) => [number, number];
    readonly analysis_series: (a: number) => [number, number];
    readonly analysis_warnings: (a: number) => [number, number];
    readonly analyze_curve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
    readonly default_grid: (a: number, b: number) => [number, number, number, number];
    readonly orbit: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly series_invariants: (a: number, b: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
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
