/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const critical_fates_json: (a: number, b: number) => [number, number, number, number];
export const grid_size: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const julia_rgba: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
export const scan_rgba: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
