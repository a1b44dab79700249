//! Browser bindings for the ramp solver: mesh inspection, a single run and a
//! small convergence study. The plain functions are usable natively; the
//! `wasm_bindgen` wrappers only convert types and errors.

use dod_cutcell::discretization::SchemeConfig;
use dod_cutcell::geometry::CutCellMesh;
use dod_cutcell::study::{converge, run_ramp};
use dod_cutcell::{config::parse_n_list, RampTestProblem, Result};
use wasm_bindgen::prelude::*;

/// Flattened polygons with per-cell data, ready for canvas drawing.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshView {
    /// `x, y` pairs of all polygon vertices.
    pub coords: Vec<f64>,
    /// Start of each cell in `coords` (in vertices), plus a final end marker.
    pub offsets: Vec<u32>,
    /// 0 Cartesian, 3/4/5 cut cells by vertex count.
    pub kinds: Vec<u8>,
    pub alphas: Vec<f64>,
    pub stabilized: usize,
    pub min_volume_fraction: f64,
}

impl MeshView {
    fn new(mesh: &CutCellMesh, alphas: &[f64], stabilized: usize) -> Self {
        let mut coords = Vec::new();
        let mut offsets = vec![0u32];
        let mut kinds = Vec::with_capacity(mesh.num_cells());
        for c in mesh.cells() {
            for p in &c.vertices {
                coords.push(p.x);
                coords.push(p.y);
            }
            offsets.push((coords.len() / 2) as u32);
            kinds.push(c.kind.code() as u8);
        }
        Self {
            coords,
            offsets,
            kinds,
            alphas: alphas.to_vec(),
            stabilized,
            min_volume_fraction: mesh.min_volume_fraction(),
        }
    }

    pub fn num_cells(&self) -> usize {
        self.kinds.len()
    }
}

/// Final state of one run.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub mesh: MeshView,
    pub values: Vec<f64>,
    /// Exact solution at the cell centroids at the final time.
    pub exact: Vec<f64>,
    pub steps: usize,
    pub dt: f64,
    pub l2_error: f64,
    pub beta_error: f64,
}

fn problem(gamma_deg: f64, x0: f64, t_final: f64) -> Result<RampTestProblem> {
    RampTestProblem::new(gamma_deg.to_radians(), x0, t_final)
}

/// `kappa = None` selects the stability-based time step.
fn scheme_config(kappa: Option<f64>, t_final: f64) -> Result<SchemeConfig> {
    let c = SchemeConfig {
        cfl_factor: kappa,
        t_final,
        ..Default::default()
    };
    c.validate()?;
    Ok(c)
}

pub fn mesh_view(gamma_deg: f64, x0: f64, n: usize) -> Result<MeshView> {
    let pb = problem(gamma_deg, x0, 0.0)?;
    let s = dod_cutcell::DodScheme::for_ramp(&pb, n, &scheme_config(None, 0.0)?)?;
    Ok(MeshView::new(s.mesh(), s.alphas(), s.records().len()))
}

pub fn simulate(
    gamma_deg: f64,
    x0: f64,
    n: usize,
    kappa: Option<f64>,
    t_final: f64,
) -> Result<Simulation> {
    let pb = problem(gamma_deg, x0, t_final)?;
    let r = run_ramp(&pb, n, &scheme_config(kappa, t_final)?, false)?;
    let mesh = r.scheme.mesh();
    let exact = mesh
        .cells()
        .iter()
        .map(|c| pb.exact(t_final, c.centroid()))
        .collect();
    Ok(Simulation {
        mesh: MeshView::new(mesh, r.scheme.alphas(), r.scheme.records().len()),
        values: r.u.into_inner(),
        exact,
        steps: r.steps,
        dt: r.dt,
        l2_error: r.errors.l2,
        beta_error: r.errors.beta_semi,
    })
}

/// Convergence table in the CLI's CSV format.
pub fn convergence_csv(
    gamma_deg: f64,
    x0: f64,
    n_list: &str,
    kappa: Option<f64>,
    t_final: f64,
) -> Result<String> {
    let pb = problem(gamma_deg, x0, t_final)?;
    let ns = parse_n_list(n_list)?;
    Ok(converge(&pb, &ns, &scheme_config(kappa, t_final)?, false, 0)?.to_csv())
}

fn js(e: dod_cutcell::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Non-positive values select the stability-based time step.
fn kappa_arg(kappa: f64) -> Option<f64> {
    (kappa > 0.0).then_some(kappa)
}

#[wasm_bindgen]
pub struct WebMesh(MeshView);

#[wasm_bindgen]
impl WebMesh {
    pub fn coords(&self) -> Vec<f64> {
        self.0.coords.clone()
    }
    pub fn offsets(&self) -> Vec<u32> {
        self.0.offsets.clone()
    }
    pub fn kinds(&self) -> Vec<u8> {
        self.0.kinds.clone()
    }
    pub fn alphas(&self) -> Vec<f64> {
        self.0.alphas.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn stabilized(&self) -> usize {
        self.0.stabilized
    }
    #[wasm_bindgen(getter, js_name = minVolumeFraction)]
    pub fn min_volume_fraction(&self) -> f64 {
        self.0.min_volume_fraction
    }
    #[wasm_bindgen(getter, js_name = numCells)]
    pub fn num_cells(&self) -> usize {
        self.0.num_cells()
    }
}

#[wasm_bindgen]
pub struct WebSimulation(Simulation);

#[wasm_bindgen]
impl WebSimulation {
    pub fn mesh(&self) -> WebMesh {
        WebMesh(self.0.mesh.clone())
    }
    pub fn values(&self) -> Vec<f64> {
        self.0.values.clone()
    }
    pub fn exact(&self) -> Vec<f64> {
        self.0.exact.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn steps(&self) -> usize {
        self.0.steps
    }
    #[wasm_bindgen(getter)]
    pub fn dt(&self) -> f64 {
        self.0.dt
    }
    #[wasm_bindgen(getter, js_name = l2Error)]
    pub fn l2_error(&self) -> f64 {
        self.0.l2_error
    }
    #[wasm_bindgen(getter, js_name = betaError)]
    pub fn beta_error(&self) -> f64 {
        self.0.beta_error
    }
}

#[wasm_bindgen(js_name = meshView)]
pub fn mesh_view_js(gamma_deg: f64, x0: f64, n: usize) -> std::result::Result<WebMesh, JsError> {
    mesh_view(gamma_deg, x0, n).map(WebMesh).map_err(js)
}

#[wasm_bindgen(js_name = simulate)]
pub fn simulate_js(
    gamma_deg: f64,
    x0: f64,
    n: usize,
    kappa: f64,
    t_final: f64,
) -> std::result::Result<WebSimulation, JsError> {
    simulate(gamma_deg, x0, n, kappa_arg(kappa), t_final)
        .map(WebSimulation)
        .map_err(js)
}

#[wasm_bindgen(js_name = convergenceCsv)]
pub fn convergence_csv_js(
    gamma_deg: f64,
    x0: f64,
    n_list: &str,
    kappa: f64,
    t_final: f64,
) -> std::result::Result<String, JsError> {
    convergence_csv(gamma_deg, x0, n_list, kappa_arg(kappa), t_final).map_err(js)
}
