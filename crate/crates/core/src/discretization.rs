//! DoD-stabilized upwind scheme for piecewise constants.
//!
//! Face fluxes come from stream-function differences, so every cell balances
//! exactly up to roundoff no matter how small it is. Small triangular cut cells
//! along the ramp receive a Domain-of-Dependence correction on their outflow face.

use std::ops::{Deref, DerefMut};
use std::sync::Arc;

use log::warn;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{face_flux_samples, RampTestProblem, VelocityField};
use crate::geometry::{CellKind, CutCellMesh, FaceKind, Point};
use crate::quadrature::{Quadrature, QuadratureConfig};

/// One value per cell.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PiecewiseConstantField(pub Vec<f64>);

impl PiecewiseConstantField {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self(vec![c; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Deref for PiecewiseConstantField {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for PiecewiseConstantField {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for PiecewiseConstantField {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Which side supplies the upwind value on a face.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Upwind {
    Left,
    Right,
    /// Boundary face where β enters the domain.
    Inflow,
    /// Boundary face where β leaves the domain.
    Outflow,
    /// No flux crosses the face (ramp faces).
    Tangent,
}

/// `∫ β·n` (with the stored normal) and `∫ |β·n|` for every face.
#[derive(Clone, Debug)]
pub struct FaceIntegralTable {
    flux: Vec<f64>,
    abs_flux: Vec<f64>,
    upwind: Vec<Upwind>,
}

impl FaceIntegralTable {
    /// Builds the table from stream-function differences and checks with the
    /// face rule that `β·n` keeps one sign per face and vanishes on the ramp.
    pub fn build(
        mesh: &CutCellMesh,
        field: &dyn VelocityField,
        quad: &Quadrature,
        beta_inf: f64,
    ) -> Result<Self> {
        let psi_ramp = mesh.ramp().map(|r| field.stream_function(r.start()));
        let psi = |p: Point, on_ramp: bool| match (on_ramp, psi_ramp) {
            (true, Some(v)) => v,
            _ => field.stream_function(p),
        };
        let nf = mesh.num_faces();
        let mut flux = Vec::with_capacity(nf);
        let mut abs_flux = Vec::with_capacity(nf);
        let mut upwind = Vec::with_capacity(nf);
        for f in mesh.faces() {
            let (lo, hi, _, q_abs) = face_flux_samples(field, &quad.face, f);
            if f.kind == FaceKind::BoundaryRamp {
                if q_abs > 1e-10 * mesh.h() * beta_inf {
                    return Err(Error::NotTangent {
                        face: f.id,
                        flux: q_abs,
                    });
                }
                flux.push(0.0);
                abs_flux.push(0.0);
                upwind.push(Upwind::Tangent);
                continue;
            }
            let tol = 1e-12 * lo.abs().max(hi.abs());
            if lo < -tol && hi > tol {
                return Err(Error::FluxSignChange {
                    face: f.id,
                    min: lo,
                    max: hi,
                });
            }
            let phi = psi(f.b, f.ends_on_ramp[1]) - psi(f.a, f.ends_on_ramp[0]);
            let up = match (f.right, phi) {
                (_, 0.0) => Upwind::Tangent,
                (Some(_), p) if p > 0.0 => Upwind::Left,
                (Some(_), _) => Upwind::Right,
                (None, p) if p > 0.0 => Upwind::Outflow,
                (None, _) => Upwind::Inflow,
            };
            flux.push(phi);
            abs_flux.push(phi.abs());
            upwind.push(up);
        }
        Ok(Self {
            flux,
            abs_flux,
            upwind,
        })
    }

    /// `∫ β·n` with the stored (owner's outward) normal.
    #[inline]
    pub fn flux(&self, face: usize) -> f64 {
        self.flux[face]
    }

    #[inline]
    pub fn abs_flux(&self, face: usize) -> f64 {
        self.abs_flux[face]
    }

    #[inline]
    pub fn upwind(&self, face: usize) -> Upwind {
        self.upwind[face]
    }

    /// `∫ β·n_E` with the outward normal of `cell`.
    #[inline]
    pub fn flux_out_of(&self, mesh: &CutCellMesh, cell: usize, face: usize) -> f64 {
        self.flux[face] * mesh.face(face).sign_for(cell)
    }

    /// Inflow and outflow totals `(Σ ∫|β·n| over inflow faces, same over outflow faces)` of a cell.
    pub fn cell_balance(&self, mesh: &CutCellMesh, cell: usize) -> (f64, f64) {
        let mut inflow = 0.0;
        let mut outflow = 0.0;
        for &fid in &mesh.cell(cell).faces {
            let phi = self.flux_out_of(mesh, cell, fid);
            if phi < 0.0 {
                inflow -= phi;
            } else {
                outflow += phi;
            }
        }
        (inflow, outflow)
    }
}

/// A small triangular cut cell that receives DoD stabilization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilizedCellRecord {
    pub cell: usize,
    pub e_in: usize,
    pub e_out: usize,
    pub e_bdy: usize,
    /// Upwind neighbour across `e_in`.
    pub cell_in: usize,
    /// Downwind neighbour across `e_out`.
    pub cell_out: usize,
    pub alpha: f64,
}

impl StabilizedCellRecord {
    /// Penalty weight `η_E = 1 − α_E`.
    pub fn eta(&self) -> f64 {
        1.0 - self.alpha
    }
}

/// Capacity `min(|E| / (τ h ∫_{e_in} |β·n|), 1)`.
pub fn capacity(area: f64, tau: f64, h: f64, inflow: f64) -> f64 {
    (area / (tau * h * inflow)).min(1.0)
}

/// Size criterion `max(|e_in|, |e_out|) < h/2` (strict).
pub fn is_small_leg_pair(a: f64, b: f64, h: f64) -> bool {
    a.max(b) < 0.5 * h
}

/// Selects triangular cut cells whose two grid faces are both shorter than `h/2`.
pub fn identify_stabilized(
    mesh: &CutCellMesh,
    table: &FaceIntegralTable,
    tau: f64,
) -> Result<Vec<StabilizedCellRecord>> {
    let h = mesh.h();
    let mut records = Vec::new();
    for c in mesh.cells().iter().filter(|c| c.kind == CellKind::Cut3) {
        let Some(&e_bdy) = c
            .faces
            .iter()
            .find(|&&f| mesh.face(f).kind == FaceKind::BoundaryRamp)
        else {
            continue;
        };
        let legs: Vec<usize> = c.faces.iter().copied().filter(|&f| f != e_bdy).collect();
        if legs.len() != 2 {
            continue;
        }
        if !is_small_leg_pair(mesh.face(legs[0]).length, mesh.face(legs[1]).length, h) {
            continue;
        }
        let (p0, p1) = (
            table.flux_out_of(mesh, c.id, legs[0]),
            table.flux_out_of(mesh, c.id, legs[1]),
        );
        let (e_in, e_out) = if p0 < 0.0 && p1 > 0.0 {
            (legs[0], legs[1])
        } else if p1 < 0.0 && p0 > 0.0 {
            (legs[1], legs[0])
        } else {
            return Err(Error::InvalidStabilization {
                cell: c.id,
                reason: format!("no unique inflow and outflow face (fluxes {p0:e}, {p1:e})"),
            });
        };
        let inflow = table.abs_flux(e_in);
        if inflow == 0.0 {
            return Err(Error::InvalidStabilization {
                cell: c.id,
                reason: "zero inflow through e_in".into(),
            });
        }
        let (Some(cell_in), Some(cell_out)) =
            (mesh.face(e_in).other(c.id), mesh.face(e_out).other(c.id))
        else {
            return Err(Error::InvalidStabilization {
                cell: c.id,
                reason: "inflow or outflow face lies on the outer boundary".into(),
            });
        };
        records.push(StabilizedCellRecord {
            cell: c.id,
            e_in,
            e_out,
            e_bdy,
            cell_in,
            cell_out,
            alpha: capacity(c.area, tau, h, inflow),
        });
    }
    let mut flagged = vec![false; mesh.num_cells()];
    for r in &records {
        flagged[r.cell] = true;
    }
    for r in &records {
        if flagged[r.cell_in] || flagged[r.cell_out] {
            return Err(Error::InvalidStabilization {
                cell: r.cell,
                reason: "a neighbour across e_in or e_out is itself stabilized".into(),
            });
        }
    }
    Ok(records)
}

/// Parameters of the fully discrete scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeConfig {
    pub tau: f64,
    pub epsilon: f64,
    /// Manual `κ` in `Δt = κ h`, replacing the stability formula.
    pub cfl_factor: Option<f64>,
    pub t_final: f64,
    pub quad: QuadratureConfig,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            tau: 1.0,
            epsilon: 1.0 / 14.0,
            cfl_factor: None,
            t_final: 0.5,
            quad: QuadratureConfig::default(),
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "final time must be non-negative, got {}",
                self.t_final
            )));
        }
        if let Some(k) = self.cfl_factor {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "CFL factor must be positive, got {k}"
                )));
            }
        } else {
            theorem_kappa(self.epsilon, 1.0, self.tau)?;
        }
        if self.quad.face_order == 0 {
            return Err(Error::InvalidConfig(
                "quad.face_order must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// `C_tr = max(4‖β‖_∞, 1/τ)`.
pub fn trace_constant(beta_inf: f64, tau: f64) -> f64 {
    (4.0 * beta_inf).max(1.0 / tau)
}

/// `κ = (1 − 2ε) / ((1 + ε) max(4‖β‖_∞, 1/τ))`.
pub fn theorem_kappa(epsilon: f64, beta_inf: f64, tau: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidConfig(format!(
            "CFL epsilon must lie in (0, 1/2), got {epsilon}"
        )));
    }
    Ok((1.0 - 2.0 * epsilon) / ((1.0 + epsilon) * trace_constant(beta_inf, tau)))
}

/// Compressed sparse rows.
#[derive(Clone, Debug, Default)]
struct Csr {
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Csr {
    fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut csr = Csr {
            offsets: Vec::with_capacity(rows.len() + 1),
            ..Default::default()
        };
        csr.offsets.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < row.len() {
                let col = row[k].0;
                let mut v = 0.0;
                while k < row.len() && row[k].0 == col {
                    v += row[k].1;
                    k += 1;
                }
                csr.cols.push(col);
                csr.vals.push(v);
            }
            csr.offsets.push(csr.cols.len());
        }
        csr
    }

    #[inline]
    fn row_dot(&self, r: usize, v: &[f64]) -> f64 {
        let (a, b) = (self.offsets[r], self.offsets[r + 1]);
        self.cols[a..b]
            .iter()
            .zip(&self.vals[a..b])
            .map(|(&c, &w)| w * v[c])
            .sum()
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        if out.len() >= PARALLEL_THRESHOLD {
            out.par_iter_mut()
                .enumerate()
                .for_each(|(r, o)| *o = self.row_dot(r, v));
        } else {
            for (r, o) in out.iter_mut().enumerate() {
                *o = self.row_dot(r, v);
            }
        }
    }
}

const PARALLEL_THRESHOLD: usize = 8192;

/// Quadrature data of one inflow face.
#[derive(Clone, Debug)]
struct InflowFace {
    cell: usize,
    /// `∫ β·n_F` (negative).
    flux: f64,
    /// Points with weights `w |β·n| / Σ w |β·n|`.
    points: Vec<(Point, f64)>,
}

/// β-weighted means of a function's traces, one per face side.
///
/// For discrete fields these are simply the cell values; for smooth functions
/// they are computed with the face rule.
#[derive(Clone, Debug)]
pub struct TraceMeans {
    /// Mean of the trace from `face.left`.
    pub left: Vec<f64>,
    /// Mean of the trace from `face.right` (equal to `left` on boundary faces).
    pub right: Vec<f64>,
}

impl TraceMeans {
    pub fn discrete(scheme: &DodScheme, v: &[f64]) -> Self {
        let faces = scheme.mesh().faces();
        let left = faces.iter().map(|f| v[f.left]).collect();
        let right = faces
            .iter()
            .map(|f| f.right.map_or(v[f.left], |r| v[r]))
            .collect();
        Self { left, right }
    }

    /// Means of a continuous function (identical on both sides). Faces
    /// without flux get 0; they never enter any form.
    pub fn smooth(scheme: &DodScheme, f: impl Fn(Point) -> f64 + Sync) -> Self {
        let means: Vec<f64> = (0..scheme.mesh().num_faces())
            .into_par_iter()
            .map(|e| scheme.beta_weighted_mean(e, &f).unwrap_or(0.0))
            .collect();
        Self {
            left: means.clone(),
            right: means,
        }
    }

    /// Means of `f − v` for smooth `f` and discrete `v`.
    pub fn difference(scheme: &DodScheme, f: impl Fn(Point) -> f64 + Sync, v: &[f64]) -> Self {
        let mut tm = Self::smooth(scheme, f);
        for (e, face) in scheme.mesh().faces().iter().enumerate() {
            tm.left[e] -= v[face.left];
            tm.right[e] -= face.right.map_or(v[face.left], |r| v[r]);
        }
        tm
    }

    /// Mean on `face` of the trace taken from `cell`.
    #[inline]
    pub fn from_side(&self, scheme: &DodScheme, face: usize, cell: usize) -> f64 {
        if scheme.mesh().face(face).left == cell {
            self.left[face]
        } else {
            self.right[face]
        }
    }

    /// Pointwise combination `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &TraceMeans, b: f64) -> Self {
        let mix = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect();
        Self {
            left: mix(&self.left, &other.left),
            right: mix(&self.right, &other.right),
        }
    }
}

/// Face-assembled scheme on a fixed mesh.
pub struct DodScheme {
    mesh: CutCellMesh,
    field: Arc<dyn VelocityField>,
    quad: Quadrature,
    table: FaceIntegralTable,
    records: Vec<StabilizedCellRecord>,
    alpha: Vec<f64>,
    record_of_cell: Vec<Option<usize>>,
    record_of_out_face: Vec<Option<usize>>,
    stabilized_face: Vec<bool>,
    beta_inf: f64,
    tau: f64,
    operator: Csr,
    inflow: Vec<InflowFace>,
}

impl std::fmt::Debug for DodScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DodScheme")
            .field("cells", &self.mesh.num_cells())
            .field("faces", &self.mesh.num_faces())
            .field("stabilized", &self.records.len())
            .field("beta_inf", &self.beta_inf)
            .field("tau", &self.tau)
            .finish()
    }
}

impl DodScheme {
    pub fn new(
        mesh: CutCellMesh,
        field: Arc<dyn VelocityField>,
        beta_inf: f64,
        tau: f64,
        quad: QuadratureConfig,
    ) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tau must be positive, got {tau}"
            )));
        }
        let quad = Quadrature::new(quad);
        let table = FaceIntegralTable::build(&mesh, field.as_ref(), &quad, beta_inf)?;
        let records = identify_stabilized(&mesh, &table, tau)?;
        let nc = mesh.num_cells();
        let nf = mesh.num_faces();
        let mut alpha = vec![1.0; nc];
        let mut record_of_cell = vec![None; nc];
        let mut record_of_out_face = vec![None; nf];
        let mut stabilized_face = vec![false; nf];
        for (k, r) in records.iter().enumerate() {
            alpha[r.cell] = r.alpha;
            record_of_cell[r.cell] = Some(k);
            record_of_out_face[r.e_out] = Some(k);
            stabilized_face[r.e_in] = true;
            stabilized_face[r.e_out] = true;
        }
        let mut scheme = Self {
            mesh,
            field,
            quad,
            table,
            records,
            alpha,
            record_of_cell,
            record_of_out_face,
            stabilized_face,
            beta_inf,
            tau,
            operator: Csr::default(),
            inflow: Vec::new(),
        };
        scheme.operator = scheme.assemble_operator();
        scheme.inflow = scheme.collect_inflow();
        Ok(scheme)
    }

    /// Scheme for the ramp benchmark on an `n × n` background grid.
    pub fn for_ramp(problem: &RampTestProblem, n: usize, config: &SchemeConfig) -> Result<Self> {
        config.validate()?;
        let mesh = CutCellMesh::build(&problem.domain, n)?;
        Self::new(
            mesh,
            Arc::new(problem.velocity),
            problem.beta_inf_norm(),
            config.tau,
            config.quad,
        )
    }

    fn assemble_operator(&self) -> Csr {
        let mesh = &self.mesh;
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); mesh.num_cells()];
        for f in mesh.faces() {
            let phi = self.table.flux(f.id);
            match self.table.upwind(f.id) {
                Upwind::Tangent | Upwind::Inflow => {}
                Upwind::Outflow => rows[f.left].push((f.left, phi)),
                up @ (Upwind::Left | Upwind::Right) => {
                    let r = f.right.expect("interior face");
                    if let Some(k) = self.record_of_out_face[f.id] {
                        // Downwind neighbour sees α v_E + (1 − α) v_in.
                        let rec = &self.records[k];
                        let down = f.other(rec.cell).expect("interior face");
                        let q = self.table.abs_flux(f.id);
                        let a = rec.alpha;
                        rows[down].push((rec.cell_in, -q));
                        rows[down].push((rec.cell, -a * q));
                        rows[down].push((rec.cell_in, a * q));
                        continue;
                    }
                    if let Some(k) = self.inflow_face_record(f.id) {
                        // Upwind neighbour's outflow is unchanged.
                        let rec = &self.records[k];
                        let q = self.table.abs_flux(f.id);
                        rows[rec.cell_in].push((rec.cell_in, q));
                        continue;
                    }
                    let u = if up == Upwind::Left { f.left } else { r };
                    rows[f.left].push((u, phi));
                    rows[r].push((u, -phi));
                }
            }
        }
        // Stabilized cells: inflow through e_in and the plain part of the e_out
        // flux cancel, leaving α ∫|β·n| (v_E − v_in).
        for rec in &self.records {
            let q_in = self.table.abs_flux(rec.e_in);
            let q_out = self.table.abs_flux(rec.e_out);
            let row = &mut rows[rec.cell];
            if q_out != q_in {
                row.push((rec.cell_in, q_out - q_in));
            }
            row.push((rec.cell, rec.alpha * q_out));
            row.push((rec.cell_in, -rec.alpha * q_out));
        }
        for (c, row) in rows.iter_mut().enumerate() {
            let inv = 1.0 / mesh.cell(c).area;
            for e in row.iter_mut() {
                e.1 *= inv;
            }
        }
        Csr::from_rows(rows)
    }

    fn inflow_face_record(&self, face: usize) -> Option<usize> {
        if !self.stabilized_face[face] || self.record_of_out_face[face].is_some() {
            return None;
        }
        self.records.iter().position(|r| r.e_in == face)
    }

    fn collect_inflow(&self) -> Vec<InflowFace> {
        let mut out = Vec::new();
        for f in self.mesh.faces() {
            if self.table.upwind(f.id) != Upwind::Inflow {
                continue;
            }
            let mut pts: Vec<(Point, f64)> = self
                .quad
                .face
                .points(f.a, f.b)
                .map(|(p, w)| (p, w * self.field.velocity(p).dot(f.normal).abs()))
                .collect();
            let total: f64 = pts.iter().map(|(_, w)| w).sum();
            if total > 0.0 {
                for (_, w) in pts.iter_mut() {
                    *w /= total;
                }
            } else {
                // Degenerate quadrature on a vanishing face: plain average.
                let m = pts.len() as f64;
                for (_, w) in pts.iter_mut() {
                    *w = 1.0 / m;
                }
            }
            out.push(InflowFace {
                cell: f.left,
                flux: self.table.flux(f.id),
                points: pts,
            });
        }
        out
    }

    pub fn mesh(&self) -> &CutCellMesh {
        &self.mesh
    }

    pub fn table(&self) -> &FaceIntegralTable {
        &self.table
    }

    pub fn records(&self) -> &[StabilizedCellRecord] {
        &self.records
    }

    pub fn field(&self) -> &dyn VelocityField {
        self.field.as_ref()
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.quad
    }

    pub fn beta_inf(&self) -> f64 {
        self.beta_inf
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn h(&self) -> f64 {
        self.mesh.h()
    }

    pub fn num_cells(&self) -> usize {
        self.mesh.num_cells()
    }

    /// `α_E`, equal to 1 for cells that are not stabilized.
    pub fn alpha(&self, cell: usize) -> f64 {
        self.alpha[cell]
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alpha
    }

    pub fn record_for_cell(&self, cell: usize) -> Option<&StabilizedCellRecord> {
        self.record_of_cell[cell].map(|k| &self.records[k])
    }

    /// The record whose `e_out` is `face`, if any.
    pub fn record_for_out_face(&self, face: usize) -> Option<&StabilizedCellRecord> {
        self.record_of_out_face[face].map(|k| &self.records[k])
    }

    /// True for `e_in` and `e_out` of stabilized cells.
    pub fn is_stabilized_face(&self, face: usize) -> bool {
        self.stabilized_face[face]
    }

    /// `C_tr = max(4‖β‖_∞, 1/τ)`.
    pub fn trace_constant(&self) -> f64 {
        trace_constant(self.beta_inf, self.tau)
    }

    /// `⟨v⟩_e = ∫ |β·n| v / ∫ |β·n|` by face quadrature.
    pub fn beta_weighted_mean(&self, face: usize, v: impl Fn(Point) -> f64) -> Result<f64> {
        if self.table.abs_flux(face) == 0.0 {
            return Err(Error::ZeroFluxFace { face });
        }
        let f = self.mesh.face(face);
        let mut num = 0.0;
        let mut den = 0.0;
        for (p, w) in self.quad.face.points(f.a, f.b) {
            let b = self.field.velocity(p).dot(f.normal).abs() * w;
            num += b * v(p);
            den += b;
        }
        if den == 0.0 {
            // Quadrature underflow on a vanishing face: fall back to the midpoint.
            return Ok(v(f.midpoint()));
        }
        Ok(num / den)
    }

    /// `A v`, the operator induced by the stabilized bilinear form.
    pub fn apply(&self, v: &[f64]) -> PiecewiseConstantField {
        let mut out = vec![0.0; v.len()];
        self.operator.apply_into(v, &mut out);
        PiecewiseConstantField(out)
    }

    /// Inflow source `L(t)`, with `(L, w) = −Σ ∫ (β·n)⁻ g w` and `(β·n)⁻ = max(−β·n, 0)`.
    pub fn inflow_rhs(&self, t: f64, g: &dyn Fn(f64, Point) -> f64) -> PiecewiseConstantField {
        let mut out = vec![0.0; self.mesh.num_cells()];
        for f in &self.inflow {
            let mean: f64 = f.points.iter().map(|&(p, w)| w * g(t, p)).sum();
            out[f.cell] += f.flux * mean / self.mesh.cell(f.cell).area;
        }
        PiecewiseConstantField(out)
    }

    /// `κ` from the configuration: the manual factor if set, otherwise the stability formula.
    pub fn cfl_kappa(&self, config: &SchemeConfig) -> Result<f64> {
        let theorem = theorem_kappa(config.epsilon, self.beta_inf, self.tau);
        match config.cfl_factor {
            Some(k) => {
                if let Ok(kt) = theorem {
                    if k > kt * (1.0 + 1e-12) {
                        warn!("κ = {k} exceeds the guaranteed stability bound {kt}");
                    }
                }
                Ok(k)
            }
            None => theorem,
        }
    }

    /// Nominal time step `Δt = κ h`.
    pub fn cfl_dt(&self, config: &SchemeConfig) -> Result<f64> {
        Ok(self.cfl_kappa(config)? * self.h())
    }

    /// One explicit Euler step `u − Δt (A u + L(t))`.
    pub fn step(
        &self,
        u: &[f64],
        t: f64,
        dt: f64,
        g: Option<&dyn Fn(f64, Point) -> f64>,
    ) -> PiecewiseConstantField {
        let mut au = self.apply(u);
        if let Some(g) = g {
            let l = self.inflow_rhs(t, g);
            for (a, b) in au.iter_mut().zip(l.iter()) {
                *a += b;
            }
        }
        PiecewiseConstantField(u.iter().zip(au.iter()).map(|(x, a)| x - dt * a).collect())
    }

    /// Marches from `u0` at `t = 0` to `t_final` with nominal step `dt`,
    /// shortening only the last step. `observer` sees every time level,
    /// including the initial one, as `(step, t, u)`.
    pub fn march(
        &self,
        u0: PiecewiseConstantField,
        t_final: f64,
        dt: f64,
        g: Option<&dyn Fn(f64, Point) -> f64>,
        mut observer: impl FnMut(usize, f64, &[f64]),
    ) -> Result<(PiecewiseConstantField, usize)> {
        if !(dt > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "time step must be positive, got {dt}"
            )));
        }
        let steps = step_count(t_final, dt);
        let mut u = u0;
        observer(0, 0.0, &u);
        for k in 0..steps {
            let t = k as f64 * dt;
            let dtk = if k + 1 == steps { t_final - t } else { dt };
            u = self.step(&u, t, dtk, g);
            observer(k + 1, if k + 1 == steps { t_final } else { t + dt }, &u);
        }
        Ok((u, steps))
    }

    /// `a_DoD(v, w)` summed face by face, with the convex combination
    /// `α v̄↑ + (1 − α) v̄_in` on outflow faces of stabilized cells.
    pub fn a_dod(&self, v: &TraceMeans, w: &[f64]) -> f64 {
        let mut acc = 0.0;
        for f in self.mesh.faces() {
            let jump = w_jump(f.left, f.right, w);
            let phi = self.table.flux(f.id);
            let up = match self.table.upwind(f.id) {
                Upwind::Tangent | Upwind::Inflow => continue,
                Upwind::Left | Upwind::Outflow => v.left[f.id],
                Upwind::Right => v.right[f.id],
            };
            let value = match self.record_for_out_face(f.id) {
                Some(r) => {
                    let v_in = v.from_side(self, r.e_in, r.cell_in);
                    r.alpha * up + (1.0 - r.alpha) * v_in
                }
                None => up,
            };
            acc += value * phi * jump;
        }
        acc
    }

    /// Plain upwind form `Σ_e ∫ v̄↑ β·[w̄]`.
    pub fn a_upw(&self, v: &TraceMeans, w: &[f64]) -> f64 {
        let mut acc = 0.0;
        for f in self.mesh.faces() {
            let phi = self.table.flux(f.id);
            let up = match self.table.upwind(f.id) {
                Upwind::Tangent | Upwind::Inflow => continue,
                Upwind::Left | Upwind::Outflow => v.left[f.id],
                Upwind::Right => v.right[f.id],
            };
            acc += up * phi * w_jump(f.left, f.right, w);
        }
        acc
    }

    /// Upwind form in central-plus-penalty shape:
    /// `Σ_b ∫ (β·n)⁺ v̄ w̄ + Σ_i ∫ {v̄} β·[w̄] + ½ |β·n| [v̄]·[w̄]`.
    pub fn a_upw_central(&self, v: &TraceMeans, w: &[f64]) -> f64 {
        let mut acc = 0.0;
        for f in self.mesh.faces() {
            let phi = self.table.flux(f.id);
            match f.right {
                None => acc += phi.max(0.0) * v.left[f.id] * w[f.left],
                Some(r) => {
                    let avg = 0.5 * (v.left[f.id] + v.right[f.id]);
                    let vj = v.left[f.id] - v.right[f.id];
                    let wj = w[f.left] - w[r];
                    acc += avg * phi * wj + 0.5 * phi.abs() * vj * wj;
                }
            }
        }
        acc
    }

    /// Stabilization `Σ_E (1 − α_E) ∫_{e_out} (v̄_in − v̄_E) β·[w̄]`.
    pub fn j_stab(&self, v: &TraceMeans, w: &[f64]) -> f64 {
        self.records
            .iter()
            .map(|r| {
                let v_in = v.from_side(self, r.e_in, r.cell_in);
                let v_e = v.from_side(self, r.e_out, r.cell);
                let q = self.table.abs_flux(r.e_out);
                r.eta() * (v_in - v_e) * q * (w[r.cell] - w[r.cell_out])
            })
            .sum()
    }

    /// Sum of absolute face contributions of `a_DoD(v, w)`; the natural scale
    /// for judging roundoff in that form.
    pub fn a_dod_scale(&self, v: &TraceMeans, w: &[f64]) -> f64 {
        let mut acc = 0.0;
        for f in self.mesh.faces() {
            let jump = w_jump(f.left, f.right, w).abs();
            let q = self.table.abs_flux(f.id);
            acc += q * jump * (v.left[f.id].abs() + v.right[f.id].abs());
            if let Some(r) = self.record_for_out_face(f.id) {
                acc += q * jump * v.from_side(self, r.e_in, r.cell_in).abs();
            }
        }
        acc
    }
}

#[inline]
fn w_jump(left: usize, right: Option<usize>, w: &[f64]) -> f64 {
    match right {
        Some(r) => w[left] - w[r],
        None => w[left],
    }
}

/// Number of steps of nominal length `dt` needed to reach `t_final`.
pub fn step_count(t_final: f64, dt: f64) -> usize {
    if t_final <= 0.0 {
        return 0;
    }
    let ratio = t_final / dt;
    let n = ratio.round();
    if (ratio - n).abs() <= 1e-9 * ratio.max(1.0) {
        n as usize
    } else {
        ratio.ceil() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ConstantField;
    use crate::geometry::RampDomain;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ramp_scheme(deg: f64, x0: f64, n: usize) -> (RampTestProblem, DodScheme) {
        let pb = RampTestProblem::new(deg.to_radians(), x0, 0.5).unwrap();
        let s = DodScheme::for_ramp(&pb, n, &SchemeConfig::default()).unwrap();
        (pb, s)
    }

    fn random_field(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn strip(nx: usize) -> DodScheme {
        let mesh = CutCellMesh::cartesian(Point::new(0.0, 0.0), nx, 1, 1.0 / nx as f64).unwrap();
        DodScheme::new(
            mesh,
            Arc::new(ConstantField::new(1.0, 0.0)),
            1.0,
            1.0,
            QuadratureConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn strip_reduces_to_one_dimensional_upwind() {
        let nx = 8;
        let s = strip(nx);
        let h = 1.0 / nx as f64;
        let v: Vec<f64> = (0..nx).map(|i| (i as f64 * 0.7).sin()).collect();
        let av = s.apply(&v);
        assert!(s.records().is_empty());
        assert_relative_eq!(av[0], v[0] / h, max_relative = 1e-14);
        for i in 1..nx {
            assert_relative_eq!(
                av[i],
                (v[i] - v[i - 1]) / h,
                max_relative = 1e-12,
                epsilon = 1e-12
            );
        }
        // One Euler step with inflow g = 2.
        let dt = 0.5 * h;
        let g = |_: f64, _: Point| 2.0;
        let u1 = s.step(&v, 0.0, dt, Some(&g));
        assert_relative_eq!(u1[0], v[0] - dt / h * (v[0] - 2.0), epsilon = 1e-14);
        for i in 1..nx {
            assert_relative_eq!(u1[i], v[i] - dt / h * (v[i] - v[i - 1]), epsilon = 1e-14);
        }
    }

    #[test]
    fn inflow_contribution_on_unit_face() {
        let s = strip(4);
        let h = 0.25;
        // β = (1, 0) enters through x = 0 only, with β·n = −1 on a face of length h.
        let l = s.inflow_rhs(0.0, &|_, _| 1.0);
        assert_relative_eq!(l[0], -1.0 / h, epsilon = 1e-13);
        assert!(l[1..].iter().all(|&x| x == 0.0));
        let zero = s.inflow_rhs(0.0, &|_, _| 0.0);
        assert!(zero.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn mesh_areas_match_closed_form() {
        let (pb, s) = ramp_scheme(25.0, 0.2001, 32);
        let want = 1.0 - 25f64.to_radians().tan() * (1.0 - 0.2001f64).powi(2) / 2.0;
        assert_relative_eq!(s.mesh().total_area(), want, max_relative = 1e-12);
        assert_relative_eq!(pb.domain.area(), want, max_relative = 1e-14);
    }

    #[test]
    fn cell_balance_holds() {
        for deg in [5.0, 25.0, 45.0] {
            let (_, s) = ramp_scheme(deg, 0.2001, 32);
            for c in s.mesh().cells() {
                let (i, o) = s.table().cell_balance(s.mesh(), c.id);
                assert!((i - o).abs() <= 1e-12 * c.perimeter() * s.beta_inf());
            }
            for f in s.mesh().faces() {
                assert!(s.table().flux(f.id).abs() <= s.table().abs_flux(f.id));
            }
        }
    }

    #[test]
    fn table_agrees_with_quadrature() {
        let (pb, s) = ramp_scheme(35.0, 0.2001, 16);
        for f in s.mesh().faces() {
            let q = s
                .quadrature()
                .integrate_face(f, |p| pb.velocity.velocity(p).dot(f.normal));
            assert!((q - s.table().flux(f.id)).abs() < 1e-14);
        }
    }

    #[test]
    fn stabilized_records_are_consistent() {
        for deg in [5.0, 15.0, 25.0, 35.0, 45.0] {
            for n in [16, 32, 64] {
                let (_, s) = ramp_scheme(deg, 0.2001, n);
                let h = s.h();
                let mut seen = std::collections::HashSet::new();
                for r in s.records() {
                    let c = s.mesh().cell(r.cell);
                    assert_eq!(c.kind, CellKind::Cut3);
                    let lin = s.mesh().face(r.e_in).length;
                    let lout = s.mesh().face(r.e_out).length;
                    assert!(lin.max(lout) < 0.5 * h);
                    assert!(r.alpha > 0.0 && r.alpha <= 1.0);
                    let want = (c.area / (h * s.table().abs_flux(r.e_in))).min(1.0);
                    assert_eq!(r.alpha, want);
                    assert!(s.table().flux_out_of(s.mesh(), r.cell, r.e_in) < 0.0);
                    assert!(s.table().flux_out_of(s.mesh(), r.cell, r.e_out) > 0.0);
                    assert!(s.record_for_cell(r.cell_in).is_none());
                    assert!(s.record_for_cell(r.cell_out).is_none());
                    for f in [r.e_in, r.e_out, r.e_bdy] {
                        assert!(seen.insert(f), "face shared between records");
                    }
                }
            }
        }
    }

    #[test]
    fn capacity_examples() {
        // Clamps at 1 when the cell can absorb the whole inflow.
        assert_eq!(capacity(1.0, 1.0, 0.1, 2.0), 1.0);
        // Shrinking triangle with legs δ and unit normal velocity: α = δ / (2 τ h).
        for delta in [1e-2, 1e-4, 1e-8] {
            let h = 0.05;
            let a = capacity(delta * delta / 2.0, 1.0, h, delta);
            assert_relative_eq!(a, delta / (2.0 * h), max_relative = 1e-14);
        }
    }

    #[test]
    fn half_length_legs_are_not_stabilized() {
        let h = 0.125;
        assert!(!is_small_leg_pair(0.5 * h, 0.5 * h, h));
        assert!(!is_small_leg_pair(0.1 * h, 0.5 * h, h));
        assert!(is_small_leg_pair(0.4999 * h, 0.3 * h, h));
        // A 45° ramp from x0 = h/2 produces triangles whose legs are h/2 up to roundoff.
        let pb = RampTestProblem::new(std::f64::consts::FRAC_PI_4, 0.5 * h, 0.5).unwrap();
        let s = DodScheme::for_ramp(&pb, 8, &SchemeConfig::default()).unwrap();
        let mut checked = 0;
        for c in s.mesh().cells().iter().filter(|c| c.kind == CellKind::Cut3) {
            let legs: Vec<f64> = c
                .faces
                .iter()
                .map(|&f| s.mesh().face(f))
                .filter(|f| f.kind != FaceKind::BoundaryRamp)
                .map(|f| f.length)
                .collect();
            if legs.iter().all(|&l| (l - 0.5 * h).abs() < 1e-12) {
                checked += 1;
                let small = legs[0].max(legs[1]) < 0.5 * h;
                assert_eq!(s.record_for_cell(c.id).is_some(), small);
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn constants_are_preserved() {
        for (deg, x0, n) in [
            (25.0, 0.2001, 16),
            (45.0, 0.2 + 1e-10, 40),
            (5.0, 0.2001, 64),
        ] {
            let (_, s) = ramp_scheme(deg, x0, n);
            let c = 0.73;
            let u = vec![c; s.num_cells()];
            let g = |_: f64, _: Point| c;
            let dt = s.cfl_dt(&SchemeConfig::default()).unwrap();
            let u1 = s.step(&u, 0.0, dt, Some(&g));
            for v in u1.iter() {
                assert!((v - c).abs() <= 1e-13, "{deg} {n}: {}", v - c);
            }
        }
    }

    #[test]
    fn constant_in_closed_cell_gives_zero() {
        let (_, s) = ramp_scheme(25.0, 0.2001, 16);
        let av = s.apply(&vec![1.0; s.num_cells()]);
        for c in s.mesh().cells() {
            let interior = c.faces.iter().all(|&f| !s.mesh().face(f).is_boundary());
            if interior {
                assert!(av[c.id].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn operator_matches_bilinear_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (deg, x0, n) in [(25.0, 0.2001, 16), (45.0, 0.2 + 1e-10, 40)] {
            let (_, s) = ramp_scheme(deg, x0, n);
            for _ in 0..20 {
                let v = random_field(&mut rng, s.num_cells());
                let av = s.apply(&v);
                let tm = TraceMeans::discrete(&s, &v);
                let mut w = vec![0.0; s.num_cells()];
                for c in s.mesh().cells() {
                    w[c.id] = 1.0;
                    let lhs = c.area * av[c.id];
                    let rhs = s.a_dod(&tm, &w);
                    let scale = s.a_dod_scale(&tm, &w);
                    assert!((lhs - rhs).abs() <= 1e-12 * scale, "{lhs} {rhs} {scale}");
                    w[c.id] = 0.0;
                }
            }
        }
    }

    #[test]
    fn forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (pb, s) = ramp_scheme(35.0, 0.2001, 32);
        for k in 0..10 {
            let v = random_field(&mut rng, s.num_cells());
            let w = random_field(&mut rng, s.num_cells());
            let tm = if k % 2 == 0 {
                TraceMeans::discrete(&s, &v)
            } else {
                TraceMeans::difference(&s, |p| pb.exact(0.25, p), &v)
            };
            let a = s.a_dod(&tm, &w);
            let b = s.a_upw(&tm, &w) + s.j_stab(&tm, &w);
            let c = s.a_upw_central(&tm, &w) + s.j_stab(&tm, &w);
            let scale = s.a_dod_scale(&tm, &w);
            assert!((a - b).abs() <= 1e-12 * scale);
            assert!((a - c).abs() <= 1e-12 * scale);
            assert_eq!(s.a_dod(&tm, &vec![0.0; s.num_cells()]), 0.0);
        }
    }

    #[test]
    fn stabilization_vanishes_for_constants() {
        let (_, s) = ramp_scheme(45.0, 0.2 + 1e-10, 40);
        assert!(!s.records().is_empty());
        let tm = TraceMeans::smooth(&s, |_| 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = random_field(&mut rng, s.num_cells());
        assert!(s.j_stab(&tm, &w).abs() < 1e-14);
    }

    #[test]
    fn beta_weighted_mean_examples() {
        let (_, s) = ramp_scheme(25.0, 0.2001, 16);
        for f in s.mesh().faces() {
            match s.beta_weighted_mean(f.id, |_| 2.5) {
                Ok(m) => assert_relative_eq!(m, 2.5, epsilon = 1e-14),
                Err(Error::ZeroFluxFace { face }) => {
                    assert_eq!(face, f.id);
                    assert_eq!(f.kind, FaceKind::BoundaryRamp);
                }
                Err(e) => panic!("{e}"),
            }
            if f.kind != FaceKind::BoundaryRamp && f.a.x == f.b.x {
                let m = s.beta_weighted_mean(f.id, |p| p.x).unwrap();
                assert_relative_eq!(m, f.a.x, epsilon = 1e-15);
            }
        }
        let v: Vec<f64> = (0..s.num_cells()).map(|i| i as f64).collect();
        let tm = TraceMeans::discrete(&s, &v);
        for f in s.mesh().faces() {
            assert_eq!(tm.from_side(&s, f.id, f.left), f.left as f64);
        }
    }

    #[test]
    fn cfl_constants() {
        let k = theorem_kappa(1.0 / 14.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(k, 0.2, epsilon = 1e-15);
        let k0 = theorem_kappa(1e-12, 1.0, 1.0).unwrap();
        assert!((k0 - 0.25).abs() < 1e-11);
        assert!(matches!(
            theorem_kappa(0.0, 1.0, 1.0),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            theorem_kappa(0.5, 1.0, 1.0),
            Err(Error::InvalidConfig(_))
        ));
        let (_, s) = ramp_scheme(45.0, 0.2001, 32);
        let cfg = SchemeConfig {
            cfl_factor: Some(0.5 / s.beta_inf()),
            ..Default::default()
        };
        assert_relative_eq!(s.cfl_dt(&cfg).unwrap(), s.h() / (2.0 * s.beta_inf()));
    }

    #[test]
    fn final_step_is_shortened() {
        assert_eq!(step_count(0.5, 0.1), 5);
        assert_eq!(step_count(0.5, 0.3), 2);
        assert_eq!(step_count(0.0, 0.3), 0);
        let s = strip(4);
        let mut times = Vec::new();
        let (_, n) = s
            .march(
                PiecewiseConstantField::zeros(4),
                0.5,
                0.3,
                None,
                |_, t, _| times.push(t),
            )
            .unwrap();
        assert_eq!(n, 2);
        assert_eq!(times, vec![0.0, 0.3, 0.5]);
    }

    #[test]
    fn zero_final_time_returns_initial_data() {
        let s = strip(4);
        let u0 = PiecewiseConstantField(vec![1.0, 2.0, 3.0, 4.0]);
        let (u, n) = s.march(u0.clone(), 0.0, 0.1, None, |_, _, _| {}).unwrap();
        assert_eq!(n, 0);
        assert_eq!(u, u0);
    }

    #[test]
    fn tangency_violation_is_reported() {
        let dom = RampDomain::new(0.4, 0.3).unwrap();
        let mesh = CutCellMesh::build(&dom, 8).unwrap();
        let r = DodScheme::new(
            mesh,
            Arc::new(ConstantField::new(1.0, 0.0)),
            1.0,
            1.0,
            QuadratureConfig::default(),
        );
        assert!(matches!(r, Err(Error::NotTangent { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn partition_of_domain(deg in 3.0f64..55.0, x0 in 0.0f64..0.5, n in 4usize..40) {
            let dom = RampDomain::new(deg.to_radians(), x0);
            prop_assume!(dom.is_ok());
            let dom = dom.unwrap();
            let mesh = CutCellMesh::build(&dom, n).unwrap();
            prop_assert!((mesh.total_area() - dom.area()).abs() <= 1e-12 * dom.area());
            for c in mesh.cells() {
                prop_assert!(c.area > 0.0);
                prop_assert!(crate::geometry::is_convex_ccw(&c.vertices));
            }
        }

        #[test]
        fn mass_balance(deg in 5.0f64..45.0, seed in 0u64..1000) {
            let (pb, s) = ramp_scheme(deg, 0.2001, 16);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = random_field(&mut rng, s.num_cells());
            let g = |t: f64, p: Point| pb.inflow(t, p);
            // d/dt Σ|E|u_E = −Σ_out φ v − Σ_in φ g
            let av = s.apply(&v);
            let l = s.inflow_rhs(0.1, &g);
            let rate: f64 = s.mesh().cells().iter().map(|c| -c.area * (av[c.id] + l[c.id])).sum();
            let mut boundary = 0.0;
            for f in s.mesh().faces().iter().filter(|f| f.is_boundary()) {
                let phi = s.table().flux(f.id);
                if phi > 0.0 {
                    boundary -= phi * v[f.left];
                } else if phi < 0.0 {
                    boundary -= phi * s.beta_weighted_mean(f.id, |p| g(0.1, p)).unwrap();
                }
            }
            prop_assert!((rate - boundary).abs() < 1e-12);
        }
    }
}
