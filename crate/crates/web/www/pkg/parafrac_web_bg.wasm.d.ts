/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_analysis_free: (a: number, b: number) => void;
export const analysis_area: (a: number) => [number, number];
export const analysis_directed: (a: number) => [number, number];
export const analysis_eps: (a: number) => [number, number];
export const analysis_invariants: (a: number) => [number, number];
export const analysis_series: (a: number) => [number, number];
export const analysis_warnings: (a: number) => [number, number];
export const analyze_curve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
export const default_grid: (a: number, b: number) => [number, number, number, number];
export const orbit: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const series_invariants: (a: number, b: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
