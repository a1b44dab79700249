//! L² projection, L² norms and the face-based β-seminorm with its triple norms.

use rayon::prelude::*;

use crate::discretization::{DodScheme, PiecewiseConstantField, TraceMeans};
use crate::geometry::{CutCellMesh, Point};
use crate::quadrature::Quadrature;

/// Cellwise mean values `|E|⁻¹ ∫_E f`.
pub fn l2_project(
    mesh: &CutCellMesh,
    quad: &Quadrature,
    f: impl Fn(Point) -> f64 + Sync,
) -> PiecewiseConstantField {
    PiecewiseConstantField(
        mesh.cells()
            .par_iter()
            .map(|c| quad.integrate_cell(c, &f) / c.area)
            .collect(),
    )
}

/// `‖v‖_{L²}` of a piecewise constant field.
pub fn l2_norm(mesh: &CutCellMesh, v: &[f64]) -> f64 {
    mesh.cells()
        .iter()
        .map(|c| c.area * v[c.id] * v[c.id])
        .sum::<f64>()
        .sqrt()
}

/// `‖f − v‖_{L²}` with cell quadrature.
pub fn l2_error(
    mesh: &CutCellMesh,
    quad: &Quadrature,
    f: impl Fn(Point) -> f64 + Sync,
    v: &[f64],
) -> f64 {
    let parts: Vec<f64> = mesh
        .cells()
        .par_iter()
        .map(|c| {
            let vc = v[c.id];
            quad.integrate_cell(c, |p| (f(p) - vc).powi(2))
        })
        .collect();
    parts.iter().sum::<f64>().sqrt()
}

/// `‖f‖_{L²}` of a smooth function.
pub fn l2_norm_smooth(
    mesh: &CutCellMesh,
    quad: &Quadrature,
    f: impl Fn(Point) -> f64 + Sync,
) -> f64 {
    let parts: Vec<f64> = mesh
        .cells()
        .par_iter()
        .map(|c| quad.integrate_cell(c, |p| f(p).powi(2)))
        .collect();
    parts.iter().sum::<f64>().sqrt()
}

/// `‖∇f‖_{L²}` given the gradient.
pub fn grad_l2_norm(
    mesh: &CutCellMesh,
    quad: &Quadrature,
    grad: impl Fn(Point) -> Point + Sync,
) -> f64 {
    let parts: Vec<f64> = mesh
        .cells()
        .par_iter()
        .map(|c| {
            quad.integrate_cell(c, |p| {
                let g = grad(p);
                g.dot(g)
            })
        })
        .collect();
    parts.iter().sum::<f64>().sqrt()
}

/// `‖f‖_{H¹} = (‖f‖² + ‖∇f‖²)^{1/2}` with an analytic gradient.
pub fn h1_norm(
    mesh: &CutCellMesh,
    quad: &Quadrature,
    f: impl Fn(Point) -> f64 + Sync,
    grad: impl Fn(Point) -> Point + Sync,
) -> f64 {
    let a = l2_norm_smooth(mesh, quad, f);
    let b = grad_l2_norm(mesh, quad, grad);
    (a * a + b * b).sqrt()
}

/// `‖f‖_{H¹}` with central differences of step `10⁻⁶ h` for the gradient.
pub fn h1_norm_fd(mesh: &CutCellMesh, quad: &Quadrature, f: impl Fn(Point) -> f64 + Sync) -> f64 {
    let d = 1e-6 * mesh.h();
    let grad = |p: Point| {
        Point::new(
            (f(Point::new(p.x + d, p.y)) - f(Point::new(p.x - d, p.y))) / (2.0 * d),
            (f(Point::new(p.x, p.y + d)) - f(Point::new(p.x, p.y - d))) / (2.0 * d),
        )
    };
    h1_norm(mesh, quad, &f, grad)
}

/// Squared contributions to `|v|²_β`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SeminormParts {
    /// `Σ ∫ |β·n| [v̄]²` over faces that are not `e_in`/`e_out` of a stabilized cell.
    pub plain: f64,
    /// `Σ_E α_E ∫_{e_in ∪ e_out} |β·n| [v̄]²`.
    pub alpha: f64,
    /// `Σ_E (1 − α_E) ∫_{e_out} |β·n| (v̄_out − v̄_in)²`.
    pub extended: f64,
}

impl SeminormParts {
    pub fn total(&self) -> f64 {
        self.plain + self.alpha + self.extended
    }
}

#[inline]
fn face_jump(tm: &TraceMeans, face: usize, boundary: bool) -> f64 {
    if boundary {
        tm.left[face]
    } else {
        tm.left[face] - tm.right[face]
    }
}

/// The three groups of `|v|²_β`. Boundary faces use the one-sided jump
/// `[v̄] = v̄ n`; ramp faces carry no flux and drop out.
pub fn beta_seminorm_parts(scheme: &DodScheme, tm: &TraceMeans) -> SeminormParts {
    let mesh = scheme.mesh();
    let table = scheme.table();
    let mut parts = SeminormParts::default();
    for f in mesh.faces() {
        if scheme.is_stabilized_face(f.id) {
            continue;
        }
        let j = face_jump(tm, f.id, f.is_boundary());
        parts.plain += table.abs_flux(f.id) * j * j;
    }
    for r in scheme.records() {
        let j_in = face_jump(tm, r.e_in, false);
        let j_out = face_jump(tm, r.e_out, false);
        let q_in = table.abs_flux(r.e_in);
        let q_out = table.abs_flux(r.e_out);
        parts.alpha += r.alpha * (q_in * j_in * j_in + q_out * j_out * j_out);
        let v_out = tm.from_side(scheme, r.e_out, r.cell_out);
        let v_in = tm.from_side(scheme, r.e_in, r.cell_in);
        parts.extended += r.eta() * q_out * (v_out - v_in).powi(2);
    }
    parts
}

/// `|v|_β`.
pub fn beta_seminorm(scheme: &DodScheme, tm: &TraceMeans) -> f64 {
    beta_seminorm_parts(scheme, tm).total().sqrt()
}

/// `Σ_E w_E Σ_{e ⊂ ∂E} ∫_e |β·n| v̄_{E,e}²` with `w_E = α_E` (1 for unstabilized cells):
/// the extra term of the starred norm.
pub fn starred_extra(scheme: &DodScheme, tm: &TraceMeans) -> f64 {
    let mesh = scheme.mesh();
    let table = scheme.table();
    let mut acc = 0.0;
    for f in mesh.faces() {
        let q = table.abs_flux(f.id);
        if q == 0.0 {
            continue;
        }
        acc += scheme.alpha(f.left) * q * tm.left[f.id].powi(2);
        if let Some(r) = f.right {
            acc += scheme.alpha(r) * q * tm.right[f.id].powi(2);
        }
    }
    acc
}

/// `|||v||| = (‖v‖² + |v|²_β)^{1/2}`.
pub fn triple_norm(l2: f64, beta_semi: f64) -> f64 {
    (l2 * l2 + beta_semi * beta_semi).sqrt()
}

/// `|||v|||_*` from the L² norm and the trace means.
pub fn triple_star_norm(scheme: &DodScheme, l2: f64, tm: &TraceMeans) -> f64 {
    (l2 * l2 + beta_seminorm_parts(scheme, tm).total() + starred_extra(scheme, tm)).sqrt()
}

/// All error measures of one function.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorBreakdown {
    pub l2: f64,
    pub beta_semi: f64,
    pub triple: f64,
    pub triple_star: f64,
    pub parts: SeminormParts,
}

impl ErrorBreakdown {
    pub fn new(scheme: &DodScheme, l2: f64, tm: &TraceMeans) -> Self {
        let parts = beta_seminorm_parts(scheme, tm);
        let semi2 = parts.total();
        let extra = starred_extra(scheme, tm);
        Self {
            l2,
            beta_semi: semi2.sqrt(),
            triple: (l2 * l2 + semi2).sqrt(),
            triple_star: (l2 * l2 + semi2 + extra).sqrt(),
            parts,
        }
    }
}

/// Norms of a discrete field.
pub fn discrete_breakdown(scheme: &DodScheme, v: &[f64]) -> ErrorBreakdown {
    let tm = TraceMeans::discrete(scheme, v);
    ErrorBreakdown::new(scheme, l2_norm(scheme.mesh(), v), &tm)
}

/// Norms of `u − u_h` for smooth `u`.
pub fn error_breakdown(
    scheme: &DodScheme,
    u: impl Fn(Point) -> f64 + Sync,
    uh: &[f64],
) -> ErrorBreakdown {
    let l2 = l2_error(scheme.mesh(), scheme.quadrature(), &u, uh);
    let tm = TraceMeans::difference(scheme, &u, uh);
    ErrorBreakdown::new(scheme, l2, &tm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::SchemeConfig;
    use crate::field::RampTestProblem;
    use crate::quadrature::QuadratureConfig;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scheme(deg: f64, x0: f64, n: usize) -> (RampTestProblem, DodScheme) {
        let pb = RampTestProblem::new(deg.to_radians(), x0, 0.5).unwrap();
        let s = DodScheme::for_ramp(&pb, n, &SchemeConfig::default()).unwrap();
        (pb, s)
    }

    #[test]
    fn projection_examples() {
        let (_, s) = scheme(25.0, 0.2001, 8);
        let c = l2_project(s.mesh(), s.quadrature(), |_| 1.5);
        assert!(c.iter().all(|&v| (v - 1.5).abs() < 1e-14));
        let h = s.h();
        let id = s.mesh().cell_at(0, 0).unwrap();
        let x = l2_project(s.mesh(), s.quadrature(), |p| p.x);
        assert_relative_eq!(x[id], h / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn projection_matches_high_degree_rule() {
        let (pb, s) = scheme(25.0, 0.2001, 32);
        let lo = l2_project(s.mesh(), s.quadrature(), |p| pb.initial(p));
        let hi = l2_project(
            s.mesh(),
            &Quadrature::new(QuadratureConfig {
                face_order: 8,
                cell_degree: 12,
            }),
            |p| pb.initial(p),
        );
        for (a, b) in lo.iter().zip(hi.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn decomposition_and_ordering() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (_, s) = scheme(45.0, 0.2 + 1e-10, 40);
        for _ in 0..10 {
            let v: Vec<f64> = (0..s.num_cells())
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect();
            let e = discrete_breakdown(&s, &v);
            assert_relative_eq!(
                e.triple.powi(2),
                e.l2.powi(2) + e.beta_semi.powi(2),
                max_relative = 1e-12
            );
            assert!(e.triple_star >= e.triple);
        }
        let zero = discrete_breakdown(&s, &vec![0.0; s.num_cells()]);
        assert_eq!(zero.triple_star, 0.0);
    }

    #[test]
    fn starred_extra_matches_cell_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (_, s) = scheme(45.0, 0.2 + 1e-10, 40);
        let v: Vec<f64> = (0..s.num_cells())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let tm = TraceMeans::discrete(&s, &v);
        let mut want = 0.0;
        for c in s.mesh().cells() {
            let w = s.record_for_cell(c.id).map_or(1.0, |r| r.alpha);
            let q: f64 = c.faces.iter().map(|&f| s.table().abs_flux(f)).sum();
            want += w * v[c.id] * v[c.id] * q;
        }
        assert_relative_eq!(starred_extra(&s, &tm), want, max_relative = 1e-12);
    }

    #[test]
    fn smooth_function_has_no_interior_jumps() {
        let (pb, s) = scheme(25.0, 0.2001, 16);
        let tm = TraceMeans::smooth(&s, |p| pb.exact(0.3, p));
        for f in s.mesh().faces().iter().filter(|f| !f.is_boundary()) {
            assert_eq!(tm.left[f.id], tm.right[f.id]);
        }
        let mut only_boundary = 0.0;
        for f in s.mesh().faces().iter().filter(|f| f.is_boundary()) {
            only_boundary += s.table().abs_flux(f.id) * tm.left[f.id].powi(2);
        }
        let parts = beta_seminorm_parts(&s, &tm);
        // Interior terms vanish; extended jumps compare two different faces and stay O(h).
        assert_relative_eq!(parts.plain, only_boundary, max_relative = 1e-12);
    }

    #[test]
    fn constant_error_is_zero() {
        let (_, s) = scheme(35.0, 0.2001, 16);
        let e = error_breakdown(&s, |_| 0.4, &vec![0.4; s.num_cells()]);
        assert!(e.l2 < 1e-14 && e.beta_semi < 1e-14);
    }

    #[test]
    fn h1_norms_agree() {
        let (pb, s) = scheme(25.0, 0.2001, 16);
        let a = h1_norm(
            s.mesh(),
            s.quadrature(),
            |p| pb.exact(0.25, p),
            |p| pb.exact_gradient(0.25, p),
        );
        let b = h1_norm_fd(s.mesh(), s.quadrature(), |p| pb.exact(0.25, p));
        assert_relative_eq!(a, b, max_relative = 1e-6);
    }
}
