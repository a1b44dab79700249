//! Single runs and convergence studies of the ramp benchmark.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::discretization::{DodScheme, PiecewiseConstantField, SchemeConfig, TraceMeans};
use crate::error::Result;
use crate::field::RampTestProblem;
use crate::geometry::Point;
use crate::norms::{beta_seminorm, error_breakdown, l2_norm, l2_project, ErrorBreakdown};
use crate::verify::fitted_slope;
use crate::vtk::StepDiagnostics;

/// Outcome of one solve.
pub struct RunResult {
    pub scheme: DodScheme,
    pub u: PiecewiseConstantField,
    pub steps: usize,
    /// Nominal time step.
    pub dt: f64,
    pub kappa: f64,
    pub errors: ErrorBreakdown,
    /// `(Σₙ Δtₙ |u(tⁿ) − uⁿ|²_β)^{1/2}` over `n = 0 … N−1`, when requested.
    pub accumulated_seminorm: Option<f64>,
    pub diagnostics: Vec<StepDiagnostics>,
}

/// Projects the initial datum, marches to `T` with exact inflow data and
/// measures the error at `T`.
pub fn run_ramp(
    problem: &RampTestProblem,
    n: usize,
    config: &SchemeConfig,
    accumulate: bool,
) -> Result<RunResult> {
    let scheme = DodScheme::for_ramp(problem, n, config)?;
    let kappa = scheme.cfl_kappa(config)?;
    let dt = kappa * scheme.h();
    let u0 = l2_project(scheme.mesh(), scheme.quadrature(), |p| problem.initial(p));
    let g = |t: f64, p: Point| problem.inflow(t, p);
    let mut diagnostics = Vec::new();
    let mut acc = 0.0;
    let mut last_t = 0.0;
    let mut last_semi2 = 0.0;
    let (u, steps) = scheme.march(u0, config.t_final, dt, Some(&g), |step, t, u| {
        let (lo, hi) = u
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        diagnostics.push(StepDiagnostics {
            step,
            t,
            l2_norm: l2_norm(scheme.mesh(), u),
            min: lo,
            max: hi,
        });
        if accumulate {
            // Each level's seminorm is weighted by the step that follows it.
            acc += (t - last_t) * last_semi2;
            last_t = t;
            let tm = TraceMeans::difference(&scheme, |p| problem.exact(t, p), u);
            last_semi2 = beta_seminorm(&scheme, &tm).powi(2);
        }
    })?;
    let errors = error_breakdown(&scheme, |p| problem.exact(config.t_final, p), &u);
    Ok(RunResult {
        scheme,
        u,
        steps,
        dt,
        kappa,
        errors,
        accumulated_seminorm: accumulate.then(|| acc.sqrt()),
        diagnostics,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub dt: f64,
    pub l2_error: f64,
    pub beta_semi_error: f64,
    pub accumulated_seminorm: Option<f64>,
    pub order_l2: Option<f64>,
    pub order_beta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub gamma_deg: f64,
    pub x0: f64,
    pub kappa: f64,
    pub tau: f64,
    pub t_final: f64,
    pub seed: u64,
}

pub const CONVERGENCE_HEADER: &str =
    "n,h,dt,l2_error,beta_semi_error,accumulated_seminorm,order_l2,order_beta";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.12e}")).unwrap_or_default()
}

impl ConvergenceReport {
    /// CSV with `#` metadata lines; contains no timing, so identical inputs give identical bytes.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# gamma_deg={}", self.gamma_deg);
        let _ = writeln!(s, "# x0={}", self.x0);
        let _ = writeln!(s, "# kappa={}", self.kappa);
        let _ = writeln!(s, "# tau={}", self.tau);
        let _ = writeln!(s, "# t_final={}", self.t_final);
        let _ = writeln!(s, "# seed={}", self.seed);
        let _ = writeln!(s, "{CONVERGENCE_HEADER}");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{:.12e},{:.12e},{:.12e},{:.12e},{},{},{}",
                r.n,
                r.h,
                r.dt,
                r.l2_error,
                r.beta_semi_error,
                opt(r.accumulated_seminorm),
                opt(r.order_l2),
                opt(r.order_beta)
            );
        }
        s
    }

    /// Two-column `h error` data for plotting.
    pub fn plot_data(&self, error: impl Fn(&ConvergenceRow) -> f64) -> String {
        let mut s = String::new();
        for r in &self.rows {
            let _ = writeln!(s, "{:.12e} {:.12e}", r.h, error(r));
        }
        s
    }

    /// Least-squares order over the last `k` rows.
    pub fn fitted_order(&self, k: usize, error: impl Fn(&ConvergenceRow) -> f64) -> Option<f64> {
        if self.rows.len() < 2 {
            return None;
        }
        let tail = &self.rows[self.rows.len().saturating_sub(k)..];
        let h: Vec<f64> = tail.iter().map(|r| r.h).collect();
        let e: Vec<f64> = tail.iter().map(&error).collect();
        Some(fitted_slope(&h, &e))
    }
}

/// Observed order `log(e₀/e₁) / log(h₀/h₁)`.
pub fn order(e0: f64, e1: f64, h0: f64, h1: f64) -> f64 {
    (e0 / e1).ln() / (h0 / h1).ln()
}

/// Runs the benchmark for every `n` (in parallel) and assembles the table.
pub fn converge(
    problem: &RampTestProblem,
    ns: &[usize],
    config: &SchemeConfig,
    accumulate: bool,
    seed: u64,
) -> Result<ConvergenceReport> {
    let results: Vec<Result<(ConvergenceRow, f64)>> = ns
        .par_iter()
        .map(|&n| {
            let r = run_ramp(problem, n, config, accumulate)?;
            Ok((
                ConvergenceRow {
                    n,
                    h: r.scheme.h(),
                    dt: r.dt,
                    l2_error: r.errors.l2,
                    beta_semi_error: r.errors.beta_semi,
                    accumulated_seminorm: r.accumulated_seminorm,
                    order_l2: None,
                    order_beta: None,
                },
                r.kappa,
            ))
        })
        .collect();
    let mut rows = Vec::with_capacity(ns.len());
    let mut kappa = f64::NAN;
    for r in results {
        let (row, k) = r?;
        kappa = k;
        rows.push(row);
    }
    for i in 1..rows.len() {
        let (a, b) = (&rows[i - 1], &rows[i]);
        let ol2 = order(a.l2_error, b.l2_error, a.h, b.h);
        let ob = order(a.beta_semi_error, b.beta_semi_error, a.h, b.h);
        rows[i].order_l2 = Some(ol2);
        rows[i].order_beta = Some(ob);
    }
    Ok(ConvergenceReport {
        rows,
        gamma_deg: problem.domain.gamma().to_degrees(),
        x0: problem.domain.x0(),
        kappa,
        tau: config.tau,
        t_final: config.t_final,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_time_returns_projection() {
        let pb = RampTestProblem::benchmark(25.0).unwrap();
        let cfg = SchemeConfig {
            t_final: 0.0,
            ..Default::default()
        };
        let r = run_ramp(&pb, 16, &cfg, true).unwrap();
        let proj = l2_project(r.scheme.mesh(), r.scheme.quadrature(), |p| pb.initial(p));
        assert_eq!(r.steps, 0);
        assert_eq!(r.u, proj);
        assert_eq!(r.accumulated_seminorm, Some(0.0));
    }

    #[test]
    fn single_row_has_no_orders() {
        let pb = RampTestProblem::new(25f64.to_radians(), 0.2001, 0.05).unwrap();
        let cfg = SchemeConfig {
            t_final: 0.05,
            ..Default::default()
        };
        let rep = converge(&pb, &[8], &cfg, false, 1).unwrap();
        assert_eq!(rep.rows.len(), 1);
        assert!(rep.rows[0].order_l2.is_none());
        let csv = rep.to_csv();
        assert!(csv.lines().last().unwrap().ends_with(",,,"));
        assert!(rep.fitted_order(3, |r| r.l2_error).is_none());
    }

    #[test]
    fn order_formula() {
        assert!((order(4.0, 1.0, 0.2, 0.1) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn csv_is_deterministic() {
        let pb = RampTestProblem::new(35f64.to_radians(), 0.2001, 0.1).unwrap();
        let cfg = SchemeConfig {
            t_final: 0.1,
            ..Default::default()
        };
        let a = converge(&pb, &[8, 16], &cfg, true, 5).unwrap().to_csv();
        let b = converge(&pb, &[8, 16], &cfg, true, 5).unwrap().to_csv();
        assert_eq!(a, b);
        assert!(a.contains(CONVERGENCE_HEADER));
    }
}
