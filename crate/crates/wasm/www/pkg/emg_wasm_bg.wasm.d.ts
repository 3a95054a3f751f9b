/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const demo_active_window_fraction: (a: number, b: number, c: number) => [number, number, number];
export const demo_channel_names: (a: number) => [number, number];
export const demo_duration: (a: number) => number;
export const demo_envelope: (a: number, b: number) => [number, number, number, number];
export const demo_feature_name: (a: number, b: number, c: number) => [number, number];
export const demo_feature_trace: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const demo_intervals: (a: number) => [number, number];
export const demo_new: (a: number, b: number, c: number, d: number, e: bigint, f: number) => [number, number, number];
export const demo_ratios: (a: number) => [number, number, number, number];
export const filter_markers: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const filter_response: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
export const presets: () => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __externref_drop_slice: (a: number, b: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
