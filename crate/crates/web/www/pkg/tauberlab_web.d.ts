/* tslint:disable */
/* eslint-disable */

/**
 * A rate function together with its smoothed growth and contour.
 */
export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    continuationMap(re_min: number, re_max: number, im_min: number, im_max: number, n_re: number, n_im: number): Float64Array;
    label(): string;
    constructor(rate: string, alpha: number);
    oscillation(x_min: number, x_max: number, n: number): Float64Array;
    profile(x_min: number, x_max: number, n: number): Float64Array;
    residue(radius: number): Float64Array;
    witnesses(x_min: number, x_max: number): Float64Array;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_continuationMap: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly demo_label: (a: number) => [number, number];
    readonly demo_new: (a: number, b: number, c: number) => [number, number, number];
    readonly demo_oscillation: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly demo_profile: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly demo_residue: (a: number, b: number) => [number, number, number, number];
    readonly demo_witnesses: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
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
