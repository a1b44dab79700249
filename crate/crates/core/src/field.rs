//! Velocity fields, initial and inflow data, and the exact solution of the ramp test.

use std::f64::consts::PI;

use log::warn;

use crate::error::Result;
use crate::geometry::{Face, Point, RampDomain};
use crate::quadrature::SegmentRule;

/// Divergence-free velocity field given through a stream function.
///
/// Implementations must satisfy `β = (∂ψ/∂y, −∂ψ/∂x)`; fluxes through straight
/// faces are then exact differences of `ψ`.
pub trait VelocityField: Send + Sync {
    fn velocity(&self, p: Point) -> Point;

    /// Jacobian `[[∂β₁/∂x, ∂β₁/∂y], [∂β₂/∂x, ∂β₂/∂y]]`.
    fn gradient(&self, p: Point) -> [[f64; 2]; 2];

    fn stream_function(&self, p: Point) -> f64;

    fn divergence(&self, p: Point) -> f64 {
        let g = self.gradient(p);
        g[0][0] + g[1][1]
    }
}

/// Spatially constant velocity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantField {
    pub beta: Point,
}

impl ConstantField {
    pub fn new(bx: f64, by: f64) -> Self {
        Self {
            beta: Point::new(bx, by),
        }
    }
}

impl VelocityField for ConstantField {
    fn velocity(&self, _p: Point) -> Point {
        self.beta
    }

    fn gradient(&self, _p: Point) -> [[f64; 2]; 2] {
        [[0.0; 2]; 2]
    }

    fn stream_function(&self, p: Point) -> f64 {
        self.beta.x * p.y - self.beta.y * p.x
    }
}

/// Shear flow parallel to the ramp: `β = (2 − η)/2 · (cos γ, sin γ)` where `η`
/// is the distance above the ramp line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RampVelocity {
    cos: f64,
    sin: f64,
    origin: Point,
}

impl RampVelocity {
    pub fn new(ramp: &RampDomain) -> Self {
        Self {
            cos: ramp.gamma().cos(),
            sin: ramp.gamma().sin(),
            origin: ramp.start(),
        }
    }

    /// Coordinate along the ramp.
    #[inline]
    pub fn xi(&self, p: Point) -> f64 {
        self.cos * (p.x - self.origin.x) + self.sin * (p.y - self.origin.y)
    }

    /// Signed distance above the ramp line.
    #[inline]
    pub fn eta(&self, p: Point) -> f64 {
        self.cos * (p.y - self.origin.y) - self.sin * (p.x - self.origin.x)
    }

    /// Transport speed on the streamline at height `eta`.
    #[inline]
    pub fn speed(eta: f64) -> f64 {
        0.5 * (2.0 - eta)
    }
}

impl VelocityField for RampVelocity {
    fn velocity(&self, p: Point) -> Point {
        let s = Self::speed(self.eta(p));
        Point::new(s * self.cos, s * self.sin)
    }

    fn gradient(&self, _p: Point) -> [[f64; 2]; 2] {
        // ∇s = −½ ∇η = −½ (−sin γ, cos γ)
        let gx = 0.5 * self.sin;
        let gy = -0.5 * self.cos;
        [
            [self.cos * gx, self.cos * gy],
            [self.sin * gx, self.sin * gy],
        ]
    }

    fn stream_function(&self, p: Point) -> f64 {
        let eta = self.eta(p);
        eta - 0.25 * eta * eta
    }
}

/// `‖∇β‖` in the Frobenius norm at one point.
pub fn gradient_norm(field: &dyn VelocityField, p: Point) -> f64 {
    let g = field.gradient(p);
    (g[0][0].powi(2) + g[0][1].powi(2) + g[1][0].powi(2) + g[1][1].powi(2)).sqrt()
}

/// Maximum of `g` over the ramp domain by dense sampling followed by a local
/// pattern search until the step drops below `1e-6` of the domain size.
pub fn sampled_domain_max(domain: &RampDomain, g: impl Fn(Point) -> f64) -> f64 {
    let lo = domain.lower();
    let side = domain.side();
    let m = 200;
    let mut best = (f64::NEG_INFINITY, lo);
    for j in 0..=m {
        for i in 0..=m {
            let p = Point::new(
                lo.x + side * i as f64 / m as f64,
                lo.y + side * j as f64 / m as f64,
            );
            if domain.contains(p) {
                let v = g(p);
                if v > best.0 {
                    best = (v, p);
                }
            }
        }
    }
    // Ramp points can fall between samples.
    for i in 0..=m {
        let x = domain.x0() + (domain.upper().x - domain.x0()) * i as f64 / m as f64;
        let p = Point::new(x, domain.ramp_y_at(x));
        let v = g(p);
        if v > best.0 {
            best = (v, p);
        }
    }
    let mut step = side / m as f64;
    let clamp_in = |p: Point| -> Option<Point> {
        let q = Point::new(
            p.x.clamp(lo.x, domain.upper().x),
            p.y.clamp(lo.y, domain.upper().y),
        );
        if domain.signed_distance(q) >= 0.0 {
            Some(q)
        } else {
            // Project onto the ramp.
            let x = q.x.max(domain.x0());
            let on = Point::new(x, domain.ramp_y_at(x));
            domain.contains(on).then_some(on)
        }
    };
    while step > 1e-6 * side {
        let mut improved = false;
        for (dx, dy) in [
            (1.0, 0.0),
            (-1.0, 0.0),
            (0.0, 1.0),
            (0.0, -1.0),
            (1.0, 1.0),
            (-1.0, -1.0),
            (1.0, -1.0),
            (-1.0, 1.0),
        ] {
            if let Some(q) = clamp_in(Point::new(best.1.x + dx * step, best.1.y + dy * step)) {
                let v = g(q);
                if v > best.0 {
                    best = (v, q);
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best.0
}

/// `‖β‖_∞ = max |β|` over the domain, by sampling.
pub fn sampled_inf_norm(field: &dyn VelocityField, domain: &RampDomain) -> f64 {
    sampled_domain_max(domain, |p| field.velocity(p).norm())
}

/// `‖β‖_{W^{1,∞}} = max(‖β‖_∞, ‖∇β‖_∞)`, by sampling.
pub fn sampled_w1inf_norm(field: &dyn VelocityField, domain: &RampDomain) -> f64 {
    sampled_inf_norm(field, domain).max(sampled_domain_max(domain, |p| gradient_norm(field, p)))
}

/// Smallest `|β·n|` sampled at `samples` evenly spaced points on each face.
/// Logs a warning when the estimate falls below `1e-8`.
pub fn estimate_cb<'a>(
    field: &dyn VelocityField,
    faces: impl IntoIterator<Item = &'a Face>,
    samples: usize,
) -> f64 {
    let mut cb = f64::INFINITY;
    for f in faces {
        for k in 0..samples {
            let s = (k as f64 + 0.5) / samples as f64;
            let v = field.velocity(f.a.lerp(f.b, s)).dot(f.normal).abs();
            cb = cb.min(v);
        }
    }
    if cb < 1e-8 {
        warn!("|β·n| drops to {cb:e} on a stabilized face; projection bounds may degrade");
    }
    cb
}

/// The ramp benchmark: sinusoidal data transported by [`RampVelocity`].
#[derive(Clone, Debug)]
pub struct RampTestProblem {
    pub domain: RampDomain,
    pub velocity: RampVelocity,
    pub t_final: f64,
    wave: f64,
}

impl RampTestProblem {
    pub fn new(gamma: f64, x0: f64, t_final: f64) -> Result<Self> {
        let domain = RampDomain::new(gamma, x0)?;
        Ok(Self::on_domain(domain, t_final))
    }

    pub fn on_domain(domain: RampDomain, t_final: f64) -> Self {
        let velocity = RampVelocity::new(&domain);
        let wave = 2f64.sqrt() * PI / (domain.upper().x - domain.x0());
        Self {
            domain,
            velocity,
            t_final,
            wave,
        }
    }

    /// Benchmark defaults: `x0 = 0.2001`, `T = 0.5`.
    pub fn benchmark(gamma_deg: f64) -> Result<Self> {
        Self::new(gamma_deg.to_radians(), 0.2001, 0.5)
    }

    /// Wave number `√2 π / (1 − x0)` of the initial datum.
    pub fn wave_number(&self) -> f64 {
        self.wave
    }

    pub fn initial(&self, p: Point) -> f64 {
        (self.wave * self.velocity.xi(p)).sin()
    }

    /// Exact solution by characteristics: each streamline `η = const` moves
    /// rigidly with speed `(2 − η)/2`.
    pub fn exact(&self, t: f64, p: Point) -> f64 {
        let eta = self.velocity.eta(p);
        let xi = self.velocity.xi(p);
        (self.wave * (xi - RampVelocity::speed(eta) * t)).sin()
    }

    pub fn exact_gradient(&self, t: f64, p: Point) -> Point {
        let eta = self.velocity.eta(p);
        let xi = self.velocity.xi(p);
        let c = self.wave * (self.wave * (xi - RampVelocity::speed(eta) * t)).cos();
        let d_xi = c;
        let d_eta = 0.5 * c * t;
        let (cos, sin) = (self.velocity.cos, self.velocity.sin);
        Point::new(cos * d_xi - sin * d_eta, sin * d_xi + cos * d_eta)
    }

    /// Inflow data: the exact solution on the boundary.
    pub fn inflow(&self, t: f64, p: Point) -> f64 {
        self.exact(t, p)
    }

    /// `‖β‖_∞`: the speed is largest on the ramp itself, where it equals 1.
    pub fn beta_inf_norm(&self) -> f64 {
        1.0
    }

    /// `max(‖β‖_∞, ‖∇β‖_∞)`, with `|∇β| = ½` everywhere.
    pub fn beta_w1inf_norm(&self) -> f64 {
        self.beta_inf_norm().max(0.5)
    }
}

/// Integrates `β·n` along a face with the given rule and returns `(min, max, ∫β·n, ∫|β·n|)`
/// over the quadrature nodes.
pub(crate) fn face_flux_samples(
    field: &dyn VelocityField,
    rule: &SegmentRule,
    face: &Face,
) -> (f64, f64, f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut signed = 0.0;
    let mut abs = 0.0;
    for (p, w) in rule.points(face.a, face.b) {
        let v = field.velocity(p).dot(face.normal);
        lo = lo.min(v);
        hi = hi.max(v);
        signed += w * v;
        abs += w * v.abs();
    }
    (lo, hi, signed, abs)
}
