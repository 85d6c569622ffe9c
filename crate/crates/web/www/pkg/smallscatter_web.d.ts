/* tslint:disable */
/* eslint-disable */

/**
 * `|A|` at `samples` equally spaced angles in the xz-plane, measured from
 * +z toward +x.
 */
export function far_field_pattern(count: number, radius: number, spacing: number, k: number, incidence: number, samples: number): Float64Array;

/**
 * `|u|` on an `n × n` grid covering `[−half, half]²` of the xz-plane, row
 * by row from −z; points inside a body are NaN.
 */
export function near_field_slice(count: number, radius: number, spacing: number, k: number, incidence: number, half: number, n: number): Float64Array;

/**
 * `[C_exact, C⁽⁰⁾, …, C⁽ⁿ⁾]` for the spheroid with semi-axes
 * `(aspect, 1, 1)`, `aspect > 1`.
 */
export function spheroid_capacitance(aspect: number, subdivisions: number, order: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly far_field_pattern: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly near_field_slice: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly spheroid_capacitance: (a: number, b: number, c: number) => [number, number, number, number];
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
