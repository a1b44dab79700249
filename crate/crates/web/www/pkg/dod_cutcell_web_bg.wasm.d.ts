/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_webmesh_free: (a: number, b: number) => void;
export const __wbg_websimulation_free: (a: number, b: number) => void;
export const convergenceCsv: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const meshView: (a: number, b: number, c: number) => [number, number, number];
export const simulate: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const webmesh_alphas: (a: number) => [number, number];
export const webmesh_coords: (a: number) => [number, number];
export const webmesh_kinds: (a: number) => [number, number];
export const webmesh_minVolumeFraction: (a: number) => number;
export const webmesh_numCells: (a: number) => number;
export const webmesh_offsets: (a: number) => [number, number];
export const webmesh_stabilized: (a: number) => number;
export const websimulation_betaError: (a: number) => number;
export const websimulation_dt: (a: number) => number;
export const websimulation_exact: (a: number) => [number, number];
export const websimulation_l2Error: (a: number) => number;
export const websimulation_mesh: (a: number) => number;
export const websimulation_steps: (a: number) => number;
export const websimulation_values: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
