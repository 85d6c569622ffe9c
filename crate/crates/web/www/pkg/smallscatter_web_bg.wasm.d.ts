/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const far_field_pattern: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const near_field_slice: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
export const spheroid_capacitance: (a: number, b: number, c: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
