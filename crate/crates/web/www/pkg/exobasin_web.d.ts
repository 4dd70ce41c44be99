/* tslint:disable */
/* eslint-disable */

/**
 * Fates of the free critical points `u`, `v` and of `w`, as JSON.
 */
export function critical_fates_json(k: number, w: number): string;

/**
 * `[width, height]` of the pixel grid used by [`julia_rgba`].
 */
export function grid_size(re_min: number, re_max: number, im_min: number, im_max: number, resolution: number): Uint32Array;

/**
 * Basin picture of the slice map `(k, w)`: white for `w`, grey for `∞`,
 * black for other cycles. The longer side has `resolution` pixels; see
 * [`grid_size`] for both dimensions.
 */
export function julia_rgba(k: number, w: number, re_min: number, re_max: number, im_min: number, im_max: number, resolution: number): Uint8Array;

/**
 * Nine-color parameter-plane picture, `nk` wide and `nw` tall, largest `w`
 * on top.
 */
export function scan_rgba(k_min: number, k_max: number, w_min: number, w_max: number, nk: number, nw: number): Uint8Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly critical_fates_json: (a: number, b: number) => [number, number, number, number];
    readonly grid_size: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly julia_rgba: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly scan_rgba: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
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
