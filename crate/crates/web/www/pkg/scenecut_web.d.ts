/* tslint:disable */
/* eslint-disable */

/**
 * A generated clip: noisy scores, thresholded labels and true changes.
 */
export class Clip {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Change-point times found by `method` (mse, hmm, forecast-ar1,
     * forecast-mean, mle).
     */
    detect(method: string): Float64Array;
    labels(): Uint8Array;
    /**
     * `changes` is a comma-separated list of switch indices.
     */
    constructor(seed: number, n: number, changes: string, sigma: number, accuracy: number);
    /**
     * `[recall, precision]` of `predicted` against the true changes.
     */
    score(predicted: Float64Array, window: number): Float64Array;
    scores(): Float64Array;
    truth(): Float64Array;
}

export function soft_weights(descriptor: Float64Array, centroids: Float64Array, dim: number, decay: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_clip_free: (a: number, b: number) => void;
    readonly clip_detect: (a: number, b: number, c: number) => [number, number, number, number];
    readonly clip_labels: (a: number) => [number, number];
    readonly clip_new: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly clip_score: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly clip_scores: (a: number) => [number, number];
    readonly clip_truth: (a: number) => [number, number];
    readonly soft_weights: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
