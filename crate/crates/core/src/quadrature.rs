//! Gauss rules on segments, triangles and convex polygons.

use crate::geometry::{Cell, Face, Point};

/// Gauss–Legendre rule mapped to `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl SegmentRule {
    /// `order`-point rule, exact for polynomials of degree `2 order − 1`.
    pub fn gauss(order: usize) -> Self {
        assert!(order >= 1, "a Gauss rule needs at least one point");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Chebyshev-like initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // Map from [−1, 1] to [0, 1].
            nodes[i] = 0.5 * (1.0 - x);
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// ∫ f over the segment `a → b`.
    pub fn integrate_segment(&self, a: Point, b: Point, mut f: impl FnMut(Point) -> f64) -> f64 {
        let len = b.sub(a).norm();
        let mut acc = 0.0;
        for (&s, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(a.lerp(b, s));
        }
        acc * len
    }

    /// Quadrature points of the segment `a → b` with weights scaled by its length.
    pub fn points(&self, a: Point, b: Point) -> impl Iterator<Item = (Point, f64)> + '_ {
        let len = b.sub(a).norm();
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&s, &w)| (a.lerp(b, s), w * len))
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Collapsed Gauss product rule on the reference triangle `(0,0), (1,0), (0,1)`.
///
/// The square `[0,1]²` is mapped onto the triangle by `(s, t) ↦ (s (1 − t), t)`;
/// with `q` points per direction the rule is exact up to degree `2q − 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleRule {
    degree: usize,
    /// Barycentric-style reference coordinates `(ξ, η)` and weights summing to 1.
    points: Vec<(f64, f64, f64)>,
}

impl TriangleRule {
    pub fn with_degree(degree: usize) -> Self {
        let q = (degree + 3) / 2;
        let g = SegmentRule::gauss(q);
        let mut points = Vec::with_capacity(q * q);
        for (&t, &wt) in g.nodes().iter().zip(g.weights()) {
            for (&s, &ws) in g.nodes().iter().zip(g.weights()) {
                // Jacobian (1 − t); the factor 2 normalises the weights to sum to 1.
                points.push((s * (1.0 - t), t, 2.0 * ws * wt * (1.0 - t)));
            }
        }
        Self { degree, points }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// ∫ f over the triangle `a, b, c` (any orientation; the area is taken unsigned).
    pub fn integrate(&self, a: Point, b: Point, c: Point, mut f: impl FnMut(Point) -> f64) -> f64 {
        let e1 = b.sub(a);
        let e2 = c.sub(a);
        let area = 0.5 * e1.cross(e2).abs();
        let mut acc = 0.0;
        for &(xi, eta, w) in &self.points {
            acc += w * f(a.add(e1.scale(xi)).add(e2.scale(eta)));
        }
        acc * area
    }
}

/// Fan triangulation from vertex 0 with a collapsed Gauss rule on every triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct PolygonRule {
    triangle: TriangleRule,
}

impl PolygonRule {
    pub fn with_degree(degree: usize) -> Self {
        Self {
            triangle: TriangleRule::with_degree(degree),
        }
    }

    pub fn degree(&self) -> usize {
        self.triangle.degree()
    }

    /// ∫ f over a convex counter-clockwise polygon.
    pub fn integrate(&self, vertices: &[Point], mut f: impl FnMut(Point) -> f64) -> f64 {
        let o = vertices[0];
        let mut acc = 0.0;
        for k in 1..vertices.len().saturating_sub(1) {
            acc += self
                .triangle
                .integrate(o, vertices[k], vertices[k + 1], &mut f);
        }
        acc
    }
}

/// Rule settings shared by the whole solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureConfig {
    /// Gauss points per face.
    pub face_order: usize,
    /// Polynomial exactness of the cell rule.
    pub cell_degree: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            face_order: 4,
            cell_degree: 6,
        }
    }
}

/// Ready-to-use face and cell rules.
#[derive(Clone, Debug)]
pub struct Quadrature {
    pub face: SegmentRule,
    pub cell: PolygonRule,
}

impl Quadrature {
    pub fn new(config: QuadratureConfig) -> Self {
        Self {
            face: SegmentRule::gauss(config.face_order.max(1)),
            cell: PolygonRule::with_degree(config.cell_degree),
        }
    }

    pub fn integrate_face(&self, face: &Face, f: impl FnMut(Point) -> f64) -> f64 {
        self.face.integrate_segment(face.a, face.b, f)
    }

    pub fn integrate_cell(&self, cell: &Cell, f: impl FnMut(Point) -> f64) -> f64 {
        self.cell.integrate(&cell.vertices, f)
    }
}

impl Default for Quadrature {
    fn default() -> Self {
        Self::new(QuadratureConfig::default())
    }
}
