/* tslint:disable */
/* eslint-disable */

/**
 * A generated session kept in memory between calls.
 */
export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Fraction of windows whose label is not relax, a quick sanity figure
     * for the window settings.
     */
    active_window_fraction(window_length: number, window_offset: number): number;
    channel_names(): string[];
    duration(): number;
    /**
     * Decimated envelope of one channel as interleaved `[t, v, ...]`.
     */
    envelope(channel: number): Float64Array;
    feature_name(channel: number, feature: number): string;
    /**
     * One feature column over sliding windows as interleaved
     * `[window_end_time, value, ...]`, plus its name in `feature_name`.
     */
    feature_trace(channel: number, feature: number, window_length: number, window_offset: number): Float64Array;
    /**
     * Annotation intervals as JSON `[{start, end, label}]`.
     */
    intervals(): string;
    /**
     * `gain_scale` multiplies every programmed movement gain so the page
     * can show ratios following the generator.
     */
    constructor(preset_name: string, device: string, seed: bigint, gain_scale: number);
    /**
     * Active/rest ratio report as JSON.
     */
    ratios(): string;
}

/**
 * Response at each corner (when the bandpass applies) and each notch, as
 * JSON `{bandpass, points: [{what, hz, db}]}`.
 */
export function filter_markers(device: string, low_hz: number, high_hz: number, order: number, notch_q: number): string;

/**
 * Magnitude response of the preprocessing chain (bandpass then notches) as
 * interleaved `[freq, dB, freq, dB, ...]`. Stages that cannot be designed
 * at the device rate are dropped, as in the pipeline.
 */
export function filter_response(device: string, low_hz: number, high_hz: number, order: number, notch_q: number, points: number): Float64Array;

export function presets(): string[];

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_active_window_fraction: (a: number, b: number, c: number) => [number, number, number];
    readonly demo_channel_names: (a: number) => [number, number];
    readonly demo_duration: (a: number) => number;
    readonly demo_envelope: (a: number, b: number) => [number, number, number, number];
    readonly demo_feature_name: (a: number, b: number, c: number) => [number, number];
    readonly demo_feature_trace: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly demo_intervals: (a: number) => [number, number];
    readonly demo_new: (a: number, b: number, c: number, d: number, e: bigint, f: number) => [number, number, number];
    readonly demo_ratios: (a: number) => [number, number, number, number];
    readonly filter_markers: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly filter_response: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly presets: () => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __externref_drop_slice: (a: number, b: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
