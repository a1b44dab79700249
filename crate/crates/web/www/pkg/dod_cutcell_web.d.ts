/* tslint:disable */
/* eslint-disable */

export class WebMesh {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    alphas(): Float64Array;
    coords(): Float64Array;
    kinds(): Uint8Array;
    offsets(): Uint32Array;
    readonly minVolumeFraction: number;
    readonly numCells: number;
    readonly stabilized: number;
}

export class WebSimulation {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    exact(): Float64Array;
    mesh(): WebMesh;
    values(): Float64Array;
    readonly betaError: number;
    readonly dt: number;
    readonly l2Error: number;
    readonly steps: number;
}

export function convergenceCsv(gamma_deg: number, x0: number, n_list: string, kappa: number, t_final: number): string;

export function meshView(gamma_deg: number, x0: number, n: number): WebMesh;

export function simulate(gamma_deg: number, x0: number, n: number, kappa: number, t_final: number): WebSimulation;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_webmesh_free: (a: number, b: number) => void;
    readonly __wbg_websimulation_free: (a: number, b: number) => void;
    readonly convergenceCsv: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly meshView: (a: number, b: number, c: number) => [number, number, number];
    readonly simulate: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly webmesh_alphas: (a: number) => [number, number];
    readonly webmesh_coords: (a: number) => [number, number];
    readonly webmesh_kinds: (a: number) => [number, number];
    readonly webmesh_minVolumeFraction: (a: number) => number;
    readonly webmesh_numCells: (a: number) => number;
    readonly webmesh_offsets: (a: number) => [number, number];
    readonly webmesh_stabilized: (a: number) => number;
    readonly websimulation_betaError: (a: number) => number;
    readonly websimulation_dt: (a: number) => number;
    readonly websimulation_exact: (a: number) => [number, number];
    readonly websimulation_l2Error: (a: number) => number;
    readonly websimulation_mesh: (a: number) => number;
    readonly websimulation_steps: (a: number) => number;
    readonly websimulation_values: (a: number) => [number, number];
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
