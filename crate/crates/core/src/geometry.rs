//! Ramp domain and cut-cell mesh construction.
//!
//! A Cartesian background grid over a square is clipped against the half-plane
//! above a straight ramp `y = y0 + tan(γ)(x − x0)`. Cells keep their exact
//! polygonal shape, however small; nothing is merged.
//!
//! Intersections of the ramp with grid lines are computed from the grid line
//! alone (never by interpolating along an edge), so the two cells sharing a
//! face always see bit-identical endpoints.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    #[inline]
    #[allow(clippy::should_implement_trait)]
    pub fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    #[inline]
    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    #[inline]
    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 2D cross product.
    #[inline]
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// `self + t (other − self)`
    #[inline]
    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(
            self.x + t * (other.x - self.x),
            self.y + t * (other.y - self.y),
        )
    }
}

/// Signed area of a polygon (positive for counter-clockwise order).
///
/// Cross products are taken relative to the first vertex so that tiny
/// polygons far from the origin keep their relative accuracy.
pub fn polygon_area(vertices: &[Point]) -> f64 {
    if vertices.len() < 3 {
        return 0.0;
    }
    let o = vertices[0];
    let mut twice = 0.0;
    for k in 1..vertices.len() - 1 {
        twice += vertices[k].sub(o).cross(vertices[k + 1].sub(o));
    }
    0.5 * twice
}

/// True when every turn of the closed polygon is a left turn (or straight).
pub fn is_convex_ccw(vertices: &[Point]) -> bool {
    let m = vertices.len();
    if m < 3 {
        return false;
    }
    (0..m).all(|k| {
        let a = vertices[k];
        let b = vertices[(k + 1) % m];
        let c = vertices[(k + 2) % m];
        let e1 = b.sub(a);
        let e2 = c.sub(b);
        e1.cross(e2) >= -1e-14 * e1.norm() * e2.norm()
    })
}

/// Square domain with a straight ramp cut out of its lower right part.
#[derive(Clone, Debug, PartialEq)]
pub struct RampDomain {
    gamma: f64,
    x0: f64,
    lower: Point,
    upper: Point,
    cos: f64,
    sin: f64,
    tan: f64,
}

impl RampDomain {
    /// Ramp on the unit square `[0, 1]²`.
    pub fn new(gamma: f64, x0: f64) -> Result<Self> {
        Self::with_square(gamma, x0, Point::new(0.0, 0.0), Point::new(1.0, 1.0))
    }

    pub fn with_square(gamma: f64, x0: f64, lower: Point, upper: Point) -> Result<Self> {
        if !(gamma > 0.0 && gamma < FRAC_PI_2) {
            return Err(Error::InvalidConfig(format!(
                "ramp angle must lie in (0, π/2), got {gamma}"
            )));
        }
        let w = upper.x - lower.x;
        let hgt = upper.y - lower.y;
        if !(w > 0.0 && (w - hgt).abs() <= 1e-12 * w) {
            return Err(Error::InvalidConfig(format!(
                "bounding box {lower:?}–{upper:?} is not a square"
            )));
        }
        if !(x0 >= lower.x && x0 < upper.x) {
            return Err(Error::DegenerateGeometry(format!(
                "ramp start x0 = {x0} is not on the bottom edge [{}, {})",
                lower.x, upper.x
            )));
        }
        let domain = Self {
            gamma,
            x0,
            lower,
            upper,
            cos: gamma.cos(),
            sin: gamma.sin(),
            tan: gamma.tan(),
        };
        let exit = domain.ramp_y_at(upper.x);
        if exit >= upper.y {
            return Err(Error::DegenerateGeometry(format!(
                "ramp leaves the square through the top edge (y = {exit} at the right edge)"
            )));
        }
        Ok(domain)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn lower(&self) -> Point {
        self.lower
    }

    pub fn upper(&self) -> Point {
        self.upper
    }

    pub fn side(&self) -> f64 {
        self.upper.x - self.lower.x
    }

    /// Unit vector along the ramp, pointing up the incline.
    pub fn tangent(&self) -> Point {
        Point::new(self.cos, self.sin)
    }

    /// Outward unit normal of the domain on the ramp.
    pub fn ramp_normal(&self) -> Point {
        Point::new(self.sin, -self.cos)
    }

    /// Signed distance to the ramp line, positive on the retained side.
    #[inline]
    pub fn signed_distance(&self, p: Point) -> f64 {
        self.cos * (p.y - self.lower.y) - self.sin * (p.x - self.x0)
    }

    #[inline]
    pub fn ramp_y_at(&self, x: f64) -> f64 {
        self.lower.y + self.tan * (x - self.x0)
    }

    #[inline]
    pub fn ramp_x_at(&self, y: f64) -> f64 {
        self.x0 + (y - self.lower.y) / self.tan
    }

    pub fn start(&self) -> Point {
        Point::new(self.x0, self.lower.y)
    }

    pub fn end(&self) -> Point {
        Point::new(self.upper.x, self.ramp_y_at(self.upper.x))
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.lower.x
            && p.x <= self.upper.x
            && p.y >= self.lower.y
            && p.y <= self.upper.y
            && self.signed_distance(p) >= 0.0
    }

    /// |Ω|: the square minus the triangle below the ramp.
    pub fn area(&self) -> f64 {
        let s = self.side();
        let run = self.upper.x - self.x0;
        s * s - 0.5 * run * run * self.tan
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellKind {
    Cartesian,
    Cut3,
    Cut4,
    Cut5,
}

impl CellKind {
    /// Integer code used in exported cell data.
    pub fn code(self) -> i32 {
        match self {
            CellKind::Cartesian => 0,
            CellKind::Cut3 => 3,
            CellKind::Cut4 => 4,
            CellKind::Cut5 => 5,
        }
    }

    pub fn is_cut(self) -> bool {
        self != CellKind::Cartesian
    }
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub id: usize,
    /// Counter-clockwise vertices.
    pub vertices: Vec<Point>,
    pub area: f64,
    pub kind: CellKind,
    /// `(i, j)` of the parent background cell.
    pub background: (usize, usize),
    /// `faces[k]` is the face spanning `vertices[k] → vertices[k + 1]`.
    pub faces: Vec<usize>,
}

impl Cell {
    pub fn perimeter(&self) -> f64 {
        let m = self.vertices.len();
        (0..m)
            .map(|k| self.vertices[(k + 1) % m].sub(self.vertices[k]).norm())
            .sum()
    }

    pub fn centroid(&self) -> Point {
        let o = self.vertices[0];
        let mut acc = Point::default();
        let mut twice = 0.0;
        for k in 1..self.vertices.len() - 1 {
            let a = self.vertices[k].sub(o);
            let b = self.vertices[k + 1].sub(o);
            let w = a.cross(b);
            acc = acc.add(a.add(b).scale(w / 3.0));
            twice += w;
        }
        o.add(acc.scale(1.0 / twice))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FaceKind {
    Interior,
    BoundarySquare,
    BoundaryRamp,
}

#[derive(Clone, Debug)]
pub struct Face {
    pub id: usize,
    /// Start point, as traversed counter-clockwise by `left`.
    pub a: Point,
    pub b: Point,
    pub length: f64,
    /// Outward unit normal of `left`.
    pub normal: Point,
    /// Owning cell (the lower id when the face is shared).
    pub left: usize,
    pub right: Option<usize>,
    pub kind: FaceKind,
    /// Whether `a` / `b` lie on the ramp line.
    pub ends_on_ramp: [bool; 2],
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }

    /// +1 if `cell` owns the stored normal, −1 if it is the other side.
    #[inline]
    pub fn sign_for(&self, cell: usize) -> f64 {
        if self.left == cell {
            1.0
        } else {
            debug_assert_eq!(self.right, Some(cell));
            -1.0
        }
    }

    /// The cell across the face from `cell`.
    #[inline]
    pub fn other(&self, cell: usize) -> Option<usize> {
        if self.left == cell {
            self.right
        } else {
            Some(self.left)
        }
    }

    pub fn midpoint(&self) -> Point {
        self.a.lerp(self.b, 0.5)
    }
}

/// Provenance of a clipped polygon vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Tag {
    Node(usize, usize),
    /// Ramp crossing of vertical grid line `i`.
    OnVertical(usize),
    /// Ramp crossing of horizontal grid line `j`.
    OnHorizontal(usize),
}

impl Tag {
    fn vline(self) -> Option<usize> {
        match self {
            Tag::Node(i, _) | Tag::OnVertical(i) => Some(i),
            Tag::OnHorizontal(_) => None,
        }
    }

    fn hline(self) -> Option<usize> {
        match self {
            Tag::Node(_, j) | Tag::OnHorizontal(j) => Some(j),
            Tag::OnVertical(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct ClipVertex {
    p: Point,
    tag: Tag,
    on_ramp: bool,
}

/// Relative tolerance (in units of h) below which a node counts as lying on the ramp.
pub const SNAP_TOLERANCE: f64 = 1e-12;

/// Clips the axis-aligned square `[xs[0], xs[1]] × [ys[0], ys[1]]` against the
/// retained half-plane. `ij` are the grid indices of the lower-left node.
fn clip_square(
    ramp: &RampDomain,
    ij: (usize, usize),
    xs: [f64; 2],
    ys: [f64; 2],
    snap: f64,
) -> Vec<ClipVertex> {
    let (i, j) = ij;
    let corners = [
        (Point::new(xs[0], ys[0]), Tag::Node(i, j)),
        (Point::new(xs[1], ys[0]), Tag::Node(i + 1, j)),
        (Point::new(xs[1], ys[1]), Tag::Node(i + 1, j + 1)),
        (Point::new(xs[0], ys[1]), Tag::Node(i, j + 1)),
    ];
    let dist: Vec<f64> = corners
        .iter()
        .map(|(p, _)| {
            let d = ramp.signed_distance(*p);
            if d.abs() <= snap {
                0.0
            } else {
                d
            }
        })
        .collect();

    let mut out = Vec::with_capacity(5);
    for k in 0..4 {
        let (pa, ta) = corners[k];
        let da = dist[k];
        let db = dist[(k + 1) % 4];
        if da >= 0.0 {
            out.push(ClipVertex {
                p: pa,
                tag: ta,
                on_ramp: da == 0.0,
            });
        }
        if (da > 0.0 && db < 0.0) || (da < 0.0 && db > 0.0) {
            // Edges 0 and 2 are horizontal, 1 and 3 vertical.
            let v = match k {
                0 => {
                    let x = ramp.ramp_x_at(ys[0]).clamp(xs[0], xs[1]);
                    ClipVertex {
                        p: Point::new(x, ys[0]),
                        tag: Tag::OnHorizontal(j),
                        on_ramp: true,
                    }
                }
                2 => {
                    let x = ramp.ramp_x_at(ys[1]).clamp(xs[0], xs[1]);
                    ClipVertex {
                        p: Point::new(x, ys[1]),
                        tag: Tag::OnHorizontal(j + 1),
                        on_ramp: true,
                    }
                }
                1 => {
                    let y = ramp.ramp_y_at(xs[1]).clamp(ys[0], ys[1]);
                    ClipVertex {
                        p: Point::new(xs[1], y),
                        tag: Tag::OnVertical(i + 1),
                        on_ramp: true,
                    }
                }
                _ => {
                    let y = ramp.ramp_y_at(xs[0]).clamp(ys[0], ys[1]);
                    ClipVertex {
                        p: Point::new(xs[0], y),
                        tag: Tag::OnVertical(i),
                        on_ramp: true,
                    }
                }
            };
            out.push(v);
        }
    }

    // Clamping can collapse a crossing onto a corner.
    out.dedup_by(|b, a| a.p == b.p);
    if out.len() > 1 && out[0].p == out[out.len() - 1].p {
        out.pop();
    }
    if out.len() < 3 {
        return Vec::new();
    }
    let pts: Vec<Point> = out.iter().map(|v| v.p).collect();
    if polygon_area(&pts) <= 0.0 {
        return Vec::new();
    }
    out
}

/// Clips an axis-aligned `h × h` square with lower-left corner `lower_left`
/// against the retained side of the ramp. Returns the counter-clockwise
/// intersection polygon, or an empty vector when nothing of positive area remains.
pub fn clip_cell(ramp: &RampDomain, lower_left: Point, h: f64) -> Vec<Point> {
    let xs = [lower_left.x, lower_left.x + h];
    let ys = [lower_left.y, lower_left.y + h];
    clip_square(ramp, (0, 0), xs, ys, SNAP_TOLERANCE * h)
        .into_iter()
        .map(|v| v.p)
        .collect()
}

/// Face key on the background grid.
#[derive(Clone, Copy, Debug)]
enum GridEdge {
    /// Vertical line `i`, spanning row `j`.
    Vertical(usize, usize),
    /// Horizontal line `j`, spanning column `i`.
    Horizontal(usize, usize),
    Ramp,
}

#[derive(Clone, Debug)]
pub struct CutCellMesh {
    ramp: Option<RampDomain>,
    lower: Point,
    nx: usize,
    ny: usize,
    h: f64,
    cells: Vec<Cell>,
    faces: Vec<Face>,
    background: Vec<Option<usize>>,
}

impl CutCellMesh {
    /// Cut-cell mesh of the ramp domain on an `n × n` background grid.
    pub fn build(ramp: &RampDomain, n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidConfig(format!(
                "need at least 4 cells per side, got {n}"
            )));
        }
        Self::assemble(
            Some(ramp.clone()),
            ramp.lower(),
            n,
            n,
            ramp.side() / n as f64,
        )
    }

    /// Uncut `nx × ny` Cartesian mesh, used for reference problems.
    pub fn cartesian(lower: Point, nx: usize, ny: usize, h: f64) -> Result<Self> {
        if nx == 0 || ny == 0 || !(h > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "invalid Cartesian grid {nx} × {ny} with h = {h}"
            )));
        }
        Self::assemble(None, lower, nx, ny, h)
    }

    fn assemble(
        ramp: Option<RampDomain>,
        lower: Point,
        nx: usize,
        ny: usize,
        h: f64,
    ) -> Result<Self> {
        let upper = ramp
            .as_ref()
            .map(|r| r.upper())
            .unwrap_or(Point::new(lower.x + nx as f64 * h, lower.y + ny as f64 * h));
        let xs: Vec<f64> = (0..=nx)
            .map(|i| {
                if i == nx {
                    upper.x
                } else {
                    lower.x + h * i as f64
                }
            })
            .collect();
        let ys: Vec<f64> = (0..=ny)
            .map(|j| {
                if j == ny {
                    upper.y
                } else {
                    lower.y + h * j as f64
                }
            })
            .collect();
        let snap = SNAP_TOLERANCE * h;

        let mut cells = Vec::new();
        let mut faces: Vec<Face> = Vec::new();
        let mut background = vec![None; nx * ny];
        let mut vfaces = vec![usize::MAX; (nx + 1) * ny];
        let mut hfaces = vec![usize::MAX; nx * (ny + 1)];

        for j in 0..ny {
            for i in 0..nx {
                let xr = [xs[i], xs[i + 1]];
                let yr = [ys[j], ys[j + 1]];
                let poly = match &ramp {
                    Some(r) => clip_square(r, (i, j), xr, yr, snap),
                    None => vec![
                        ClipVertex {
                            p: Point::new(xr[0], yr[0]),
                            tag: Tag::Node(i, j),
                            on_ramp: false,
                        },
                        ClipVertex {
                            p: Point::new(xr[1], yr[0]),
                            tag: Tag::Node(i + 1, j),
                            on_ramp: false,
                        },
                        ClipVertex {
                            p: Point::new(xr[1], yr[1]),
                            tag: Tag::Node(i + 1, j + 1),
                            on_ramp: false,
                        },
                        ClipVertex {
                            p: Point::new(xr[0], yr[1]),
                            tag: Tag::Node(i, j + 1),
                            on_ramp: false,
                        },
                    ],
                };
                if poly.is_empty() {
                    continue;
                }
                let id = cells.len();
                background[j * nx + i] = Some(id);
                let vertices: Vec<Point> = poly.iter().map(|v| v.p).collect();
                let m = poly.len();
                let mut cell_faces = Vec::with_capacity(m);
                let mut has_ramp = false;
                for k in 0..m {
                    let va = poly[k];
                    let vb = poly[(k + 1) % m];
                    let edge = match (va.tag.vline(), vb.tag.vline()) {
                        (Some(p), Some(q)) if p == q => GridEdge::Vertical(p, j),
                        _ => match (va.tag.hline(), vb.tag.hline()) {
                            (Some(p), Some(q)) if p == q => GridEdge::Horizontal(i, p),
                            _ => GridEdge::Ramp,
                        },
                    };
                    let (slot, boundary) = match edge {
                        GridEdge::Vertical(line, row) => {
                            (Some(line * ny + row), line == 0 || line == nx)
                        }
                        GridEdge::Horizontal(col, line) => {
                            (Some(line * nx + col), line == 0 || line == ny)
                        }
                        GridEdge::Ramp => {
                            has_ramp = true;
                            (None, true)
                        }
                    };
                    let table = match edge {
                        GridEdge::Vertical(..) => Some(&mut vfaces),
                        GridEdge::Horizontal(..) => Some(&mut hfaces),
                        GridEdge::Ramp => None,
                    };
                    let existing = match (&table, slot) {
                        (Some(t), Some(s)) if t[s] != usize::MAX => Some(t[s]),
                        _ => None,
                    };
                    let fid = if let Some(fid) = existing {
                        let f = &mut faces[fid];
                        if f.a != vb.p || f.b != va.p || f.right.is_some() {
                            return Err(Error::DegenerateGeometry(format!(
                                "face {fid} endpoints disagree between cells {} and {id}",
                                f.left
                            )));
                        }
                        f.right = Some(id);
                        fid
                    } else {
                        let d = vb.p.sub(va.p);
                        let length = d.norm();
                        if !(length > 0.0) {
                            return Err(Error::DegenerateGeometry(format!(
                                "zero-length edge in cell {id}"
                            )));
                        }
                        let fid = faces.len();
                        let kind = match edge {
                            GridEdge::Ramp => FaceKind::BoundaryRamp,
                            _ if boundary => FaceKind::BoundarySquare,
                            _ => FaceKind::Interior,
                        };
                        faces.push(Face {
                            id: fid,
                            a: va.p,
                            b: vb.p,
                            length,
                            normal: Point::new(d.y / length, -d.x / length),
                            left: id,
                            right: None,
                            kind,
                            ends_on_ramp: [va.on_ramp, vb.on_ramp],
                        });
                        if let (Some(t), Some(s)) = (table, slot) {
                            t[s] = fid;
                        }
                        fid
                    };
                    cell_faces.push(fid);
                }
                let kind = match (has_ramp, m) {
                    (false, _) => CellKind::Cartesian,
                    (true, 3) => CellKind::Cut3,
                    (true, 4) => CellKind::Cut4,
                    (true, 5) => CellKind::Cut5,
                    (true, _) => {
                        return Err(Error::DegenerateGeometry(format!(
                            "cut cell {id} has {m} vertices"
                        )))
                    }
                };
                let area = polygon_area(&vertices);
                cells.push(Cell {
                    id,
                    vertices,
                    area,
                    kind,
                    background: (i, j),
                    faces: cell_faces,
                });
            }
        }

        if let Some(f) = faces
            .iter()
            .find(|f| f.kind == FaceKind::Interior && f.right.is_none())
        {
            return Err(Error::DegenerateGeometry(format!(
                "interior face {} between {:?} and {:?} has a single neighbour",
                f.id, f.a, f.b
            )));
        }

        Ok(Self {
            ramp,
            lower,
            nx,
            ny,
            h,
            cells,
            faces,
            background,
        })
    }

    pub fn ramp(&self) -> Option<&RampDomain> {
        self.ramp.as_ref()
    }

    /// Background mesh width.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn lower(&self) -> Point {
        self.lower
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn cell(&self, id: usize) -> &Cell {
        &self.cells[id]
    }

    pub fn face(&self, id: usize) -> &Face {
        &self.faces[id]
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    /// Cell cut from background cell `(i, j)`, if any area remains.
    pub fn cell_at(&self, i: usize, j: usize) -> Option<usize> {
        self.background[j * self.nx + i]
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum()
    }

    /// Outward unit normal of `cell` on `face`.
    pub fn outward_normal(&self, cell: usize, face: usize) -> Point {
        let f = &self.faces[face];
        f.normal.scale(f.sign_for(cell))
    }

    pub fn count_kind(&self, kind: CellKind) -> usize {
        self.cells.iter().filter(|c| c.kind == kind).count()
    }

    /// Smallest |E| / h² over all cells.
    pub fn min_volume_fraction(&self) -> f64 {
        let h2 = self.h * self.h;
        self.cells
            .iter()
            .map(|c| c.area / h2)
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn unit_square_loses_corner_triangle() {
        // y ≥ x − 0.5 removes the triangle with legs 1/2.
        let ramp = RampDomain::new(FRAC_PI_4, 0.5).unwrap();
        let poly = clip_cell(&ramp, Point::new(0.0, 0.0), 1.0);
        assert_eq!(poly.len(), 5);
        assert_relative_eq!(polygon_area(&poly), 7.0 / 8.0, epsilon = 1e-15);
        assert!(is_convex_ccw(&poly));
    }

    #[test]
    fn cell_above_line_is_unchanged() {
        let ramp = RampDomain::new(0.3, 0.5).unwrap();
        let h = 0.125;
        let poly = clip_cell(&ramp, Point::new(0.0, 0.5), h);
        assert_eq!(poly.len(), 4);
        assert_relative_eq!(polygon_area(&poly), h * h, max_relative = 1e-14);
    }

    #[test]
    fn diagonal_halves_the_square() {
        let ramp = RampDomain::new(FRAC_PI_4, 0.0).unwrap();
        let h = 0.25;
        // The diagonal y = x runs through [h, 2h]² corner to corner.
        let poly = clip_cell(&ramp, Point::new(h, h), h);
        assert_eq!(poly.len(), 3);
        assert_relative_eq!(polygon_area(&poly), h * h / 2.0, max_relative = 1e-14);
        // Below the diagonal nothing of positive area is left.
        assert!(clip_cell(&ramp, Point::new(h, 0.0), h).is_empty());
    }

    #[test]
    fn rejects_bad_ramps() {
        assert!(matches!(
            RampDomain::new(0.0, 0.2),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            RampDomain::new(FRAC_PI_2, 0.2),
            Err(Error::InvalidConfig(_))
        ));
        // 60° from x0 = 0.2 exits through the top edge.
        assert!(matches!(
            RampDomain::new(60f64.to_radians(), 0.2),
            Err(Error::DegenerateGeometry(_))
        ));
        assert!(matches!(
            RampDomain::new(0.3, 1.0),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn diagonal_mesh_area() {
        let ramp = RampDomain::new(FRAC_PI_4, 0.0).unwrap();
        let mesh = CutCellMesh::build(&ramp, 4).unwrap();
        assert_relative_eq!(mesh.total_area(), 0.5, max_relative = 1e-12);
        // Diagonal cells are exact half squares, the rest Cartesian.
        assert_eq!(mesh.count_kind(CellKind::Cut3), 4);
        assert_eq!(mesh.num_cells(), 10);
    }

    #[test]
    fn too_coarse_mesh_is_rejected() {
        let ramp = RampDomain::new(0.4, 0.2).unwrap();
        assert!(CutCellMesh::build(&ramp, 3).is_err());
    }

    #[test]
    fn face_orientation_and_adjacency() {
        let ramp = RampDomain::new(25f64.to_radians(), 0.2001).unwrap();
        let mesh = CutCellMesh::build(&ramp, 16).unwrap();
        for f in mesh.faces() {
            assert_relative_eq!(f.normal.norm(), 1.0, epsilon = 1e-14);
            match f.kind {
                FaceKind::Interior => assert!(f.right.is_some()),
                _ => assert!(f.right.is_none()),
            }
            if f.kind == FaceKind::BoundaryRamp {
                let h = mesh.h();
                assert!(ramp.signed_distance(f.a).abs() <= 1e-12 * h);
                assert!(ramp.signed_distance(f.b).abs() <= 1e-12 * h);
            }
            // Outward normal of the owner points away from its centroid.
            let c = mesh.cell(f.left).centroid();
            assert!(f.normal.dot(f.midpoint().sub(c)) > 0.0);
        }
        for c in mesh.cells() {
            for &fid in &c.faces {
                let f = mesh.face(fid);
                assert!(f.left == c.id || f.right == Some(c.id));
            }
        }
    }

    #[test]
    fn cartesian_mesh_has_no_cuts() {
        let mesh = CutCellMesh::cartesian(Point::new(0.0, 0.0), 5, 1, 0.2).unwrap();
        assert_eq!(mesh.num_cells(), 5);
        assert_eq!(mesh.num_faces(), 16);
        assert!(mesh.cells().iter().all(|c| c.kind == CellKind::Cartesian));
    }
}
