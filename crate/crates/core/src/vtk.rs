//! Legacy ASCII VTK output (`UNSTRUCTURED_GRID` of polygons) and CSV diagnostics.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::CutCellMesh;

/// VTK cell type of a general polygon.
const VTK_POLYGON: u8 = 7;

/// One cell-data array.
pub enum CellData<'a> {
    Int(&'a str, Vec<i32>),
    Float(&'a str, &'a [f64]),
}

/// Renders the mesh with the given cell data as a legacy VTK document.
pub fn render(mesh: &CutCellMesh, title: &str, data: &[CellData<'_>]) -> String {
    let mut index: HashMap<(u64, u64), usize> = HashMap::new();
    let mut points = Vec::new();
    let mut conn: Vec<Vec<usize>> = Vec::with_capacity(mesh.num_cells());
    for c in mesh.cells() {
        let ids = c
            .vertices
            .iter()
            .map(|p| {
                *index
                    .entry((p.x.to_bits(), p.y.to_bits()))
                    .or_insert_with(|| {
                        points.push(*p);
                        points.len() - 1
                    })
            })
            .collect();
        conn.push(ids);
    }
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "{}", title.lines().next().unwrap_or(""));
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", points.len());
    for p in &points {
        let _ = writeln!(s, "{:.17e} {:.17e} 0", p.x, p.y);
    }
    let size: usize = conn.iter().map(|c| c.len() + 1).sum();
    let _ = writeln!(s, "CELLS {} {}", conn.len(), size);
    for c in &conn {
        let _ = write!(s, "{}", c.len());
        for i in c {
            let _ = write!(s, " {i}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {}", conn.len());
    for _ in &conn {
        let _ = writeln!(s, "{VTK_POLYGON}");
    }
    if !data.is_empty() {
        let _ = writeln!(s, "CELL_DATA {}", conn.len());
    }
    for d in data {
        match d {
            CellData::Int(name, v) => {
                let _ = writeln!(s, "SCALARS {name} int 1\nLOOKUP_TABLE default");
                for x in v {
                    let _ = writeln!(s, "{x}");
                }
            }
            CellData::Float(name, v) => {
                let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
                for x in v.iter() {
                    let _ = writeln!(s, "{x:.17e}");
                }
            }
        }
    }
    s
}

/// Mesh with `kind`, `area` and `alpha` (1 where no stabilization applies).
pub fn render_mesh(mesh: &CutCellMesh, alpha: &[f64]) -> String {
    let kinds = mesh.cells().iter().map(|c| c.kind.code()).collect();
    let areas: Vec<f64> = mesh.cells().iter().map(|c| c.area).collect();
    render(
        mesh,
        "cut-cell mesh",
        &[
            CellData::Int("kind", kinds),
            CellData::Float("area", &areas),
            CellData::Float("alpha", alpha),
        ],
    )
}

/// Solution snapshot with cell data `u`.
pub fn render_solution(mesh: &CutCellMesh, u: &[f64]) -> String {
    render(mesh, "solution", &[CellData::Float("u", u)])
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Per-step record for the diagnostics CSV.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub t: f64,
    pub l2_norm: f64,
    pub min: f64,
    pub max: f64,
}

pub const DIAGNOSTICS_HEADER: &str = "step,t,l2_norm,min,max";

impl StepDiagnostics {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.12e},{:.12e},{:.12e},{:.12e}",
            self.step, self.t, self.l2_norm, self.min, self.max
        )
    }
}

pub fn render_diagnostics(rows: &[StepDiagnostics]) -> String {
    let mut s = String::from(DIAGNOSTICS_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}
