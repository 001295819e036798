/* tslint:disable */
/* eslint-disable */

/**
 * A trained gain surrogate loaded from its JSON model file.
 */
export class Surrogate {
    free(): void;
    [Symbol.dispose](): void;
    constructor(text: string);
    predict(heading0_deg: number, desired_deg: number, n_f: number): string;
    readonly problem: string;
}

export function costCurve(heading0_deg: number, desired_deg: number, n_f: number, step: number, t_max: number): string;

export function simulate(heading0_deg: number, desired_deg: number, mode: string, n_ori: number, n_f: number, t_max: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_surrogate_free: (a: number, b: number) => void;
    readonly costCurve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly simulate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly surrogate_new: (a: number, b: number) => [number, number, number];
    readonly surrogate_predict: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly surrogate_problem: (a: number) => [number, number];
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
