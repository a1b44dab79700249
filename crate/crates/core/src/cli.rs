//! Command-line interface: `run`, `converge`, `verify` and `export`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use log::info;

use crate::config::{parse_n_list, CflMode, RunConfig};
use crate::discretization::DodScheme;
use crate::error::{Error, Result};
use crate::study::{converge, run_ramp};
use crate::verify::{run_all, SweepConfig};
use crate::vtk::{render_diagnostics, render_mesh, render_solution, write_file};

#[derive(Debug, Parser)]
#[command(
    name = "dod-cutcell",
    version,
    about = "DoD-stabilized upwind DG on ramp cut-cell meshes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve once and write the final state and an error summary.
    Run(Options),
    /// Convergence study over a list of resolutions.
    Converge(Options),
    /// Check the stability and error-analysis estimates numerically.
    Verify(Options),
    /// Write the mesh only.
    Export(Options),
}

#[derive(Debug, Default, Args)]
pub struct Options {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Ramp angle in degrees.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub x0: Option<f64>,
    /// Background cells per side.
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated resolutions for `converge`.
    #[arg(long)]
    pub n_list: Option<String>,
    /// ε of the stability-based time step.
    #[arg(long, conflicts_with = "cfl_kappa")]
    pub cfl_epsilon: Option<f64>,
    /// Fixed κ in Δt = κ h.
    #[arg(long)]
    pub cfl_kappa: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub quad_face_order: Option<usize>,
    #[arg(long)]
    pub quad_cell_degree: Option<usize>,
    /// Random fields per mesh for `verify`.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Skip the time-accumulated seminorm in `converge`.
    #[arg(long)]
    pub no_accumulated: bool,
}

impl Options {
    /// Defaults, then the config file, then the flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = RunConfig::default();
        if let Some(path) = &self.config {
            c.apply_file(path)?;
        }
        if let Some(v) = self.gamma {
            c.gamma_deg = v;
        }
        if let Some(v) = self.x0 {
            c.x0 = v;
        }
        if let Some(v) = self.n {
            c.n = v;
        }
        if let Some(v) = &self.n_list {
            c.n_list = parse_n_list(v)?;
        }
        if let Some(v) = self.cfl_epsilon {
            c.cfl = CflMode::Theorem(v);
        }
        if let Some(v) = self.cfl_kappa {
            c.cfl = CflMode::Manual(v);
        }
        if let Some(v) = self.tau {
            c.tau = v;
        }
        if let Some(v) = self.t_final {
            c.t_final = v;
        }
        if let Some(v) = &self.out {
            c.out = v.clone();
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.quad_face_order {
            c.quad.face_order = v;
        }
        if let Some(v) = self.quad_cell_degree {
            c.quad.cell_degree = v;
        }
        if let Some(v) = self.samples {
            c.samples = v;
        }
        c.validate()?;
        Ok(c)
    }
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    VerificationFailed,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::VerificationFailed => 2,
        }
    }
}

/// Exit code for an error: configuration and I/O problems map to 1.
pub fn error_exit_code(_e: &Error) -> i32 {
    1
}

pub const VERIFY_HEADER: &str = "lemma_id,instances,max_ratio,pass";

pub fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Run(o) => cmd_run(&o.resolve()?),
        Command::Converge(o) => cmd_converge(&o.resolve()?, !o.no_accumulated),
        Command::Verify(o) => cmd_verify(&o.resolve()?),
        Command::Export(o) => cmd_export(&o.resolve()?),
    }
}

fn cmd_run(c: &RunConfig) -> Result<Outcome> {
    let pb = c.problem()?;
    let r = run_ramp(&pb, c.n, &c.scheme(), true)?;
    write_file(
        &c.out.join("solution.vtk"),
        &render_solution(r.scheme.mesh(), &r.u),
    )?;
    write_file(
        &c.out.join("diagnostics.csv"),
        &render_diagnostics(&r.diagnostics),
    )?;
    let summary = format!(
        "n,h,dt,steps,l2_error,beta_semi_error,triple,triple_star,accumulated_seminorm\n{},{:.12e},{:.12e},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
        c.n,
        r.scheme.h(),
        r.dt,
        r.steps,
        r.errors.l2,
        r.errors.beta_semi,
        r.errors.triple,
        r.errors.triple_star,
        r.accumulated_seminorm.unwrap_or(f64::NAN)
    );
    write_file(&c.out.join("summary.csv"), &summary)?;
    print!("{summary}");
    info!(
        "wrote solution.vtk, diagnostics.csv and summary.csv to {}",
        c.out.display()
    );
    Ok(Outcome::Success)
}

fn cmd_converge(c: &RunConfig, accumulate: bool) -> Result<Outcome> {
    let pb = c.problem()?;
    let rep = converge(&pb, &c.n_list, &c.scheme(), accumulate, c.seed)?;
    let csv = rep.to_csv();
    write_file(&c.out.join("convergence.csv"), &csv)?;
    write_file(&c.out.join("l2_error.dat"), &rep.plot_data(|r| r.l2_error))?;
    write_file(
        &c.out.join("beta_error.dat"),
        &rep.plot_data(|r| r.beta_semi_error),
    )?;
    print!("{csv}");
    Ok(Outcome::Success)
}

fn cmd_verify(c: &RunConfig) -> Result<Outcome> {
    let sweep = SweepConfig {
        gamma_deg: c.gamma_deg,
        x0: c.x0,
        seed: c.seed,
        samples: c.samples,
        scheme: c.scheme(),
    };
    let reports = run_all(&sweep)?;
    let mut csv = String::from(VERIFY_HEADER);
    csv.push('\n');
    for r in &reports {
        info!("{r}");
        csv.push_str(&format!(
            "{},{},{:.6e},{}\n",
            r.id,
            r.instances(),
            r.max_observed(),
            r.pass()
        ));
    }
    if c.out != std::path::Path::new(".") {
        write_file(&c.out.join("verify.csv"), &csv)?;
    }
    print!("{csv}");
    Ok(if reports.iter().all(|r| r.pass()) {
        Outcome::Success
    } else {
        Outcome::VerificationFailed
    })
}

fn cmd_export(c: &RunConfig) -> Result<Outcome> {
    let pb = c.problem()?;
    let s = DodScheme::for_ramp(&pb, c.n, &c.scheme())?;
    write_file(&c.out.join("mesh.vtk"), &render_mesh(s.mesh(), s.alphas()))?;
    println!(
        "cells={} faces={} stabilized={}",
        s.mesh().num_cells(),
        s.mesh().num_faces(),
        s.records().len()
    );
    Ok(Outcome::Success)
}
