/* tslint:disable */
/* eslint-disable */

/**
 * Generates one synthetic trajectory. `spec_json` may set any subset of the
 * synth parameters. Returns `{trajectory, xy, truth}`.
 */
export function generate(spec_json: string): string;

/**
 * Sensor cross-check labels with speed threshold `ts` (m/s) and heading
 * threshold `th` (degrees).
 */
export function label(trajectory_json: string, ts: number, th: number): string;

/**
 * Runs one detector. `config_json` uses the same keys as a `[[detector]]`
 * table, e.g. `{"detector": "hampel", "window_half": 5, "n_sigmas": 3}`.
 * `truth_json` is an index list or `null`; when given, scores are included.
 */
export function run_detector(trajectory_json: string, config_json: string, truth_json: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly generate: (a: number, b: number) => [number, number, number, number];
    readonly label: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly run_detector: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
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
