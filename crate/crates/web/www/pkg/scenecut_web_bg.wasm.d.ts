/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_clip_free: (a: number, b: number) => void;
export const clip_detect: (a: number, b: number, c: number) => [number, number, number, number];
export const clip_labels: (a: number) => [number, number];
export const clip_new: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const clip_score: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const clip_scores: (a: number) => [number, number];
export const clip_truth: (a: number) => [number, number];
export const soft_weights: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
