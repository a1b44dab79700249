//! Cut-cell discretization of linear advection past a ramp with
//! Domain-of-Dependence stabilization.
//!
//! * [`geometry`] clips a Cartesian grid against the ramp and builds faces and adjacency.
//! * [`quadrature`] integrates over faces and convex cells.
//! * [`field`] holds the velocity field, data and exact solution of the benchmark.
//! * [`discretization`] assembles the stabilized upwind operator and time stepping.
//! * [`norms`] provides the L² projection and the β-seminorm family.
//! * [`verify`] checks the stability and error estimates numerically.
//! * [`study`], [`config`], [`cli`] and [`vtk`] drive runs and write results.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod discretization;
pub mod error;
pub mod field;
pub mod geometry;
pub mod norms;
pub mod quadrature;
pub mod study;
pub mod verify;
pub mod vtk;

pub use discretization::{DodScheme, PiecewiseConstantField, SchemeConfig};
pub use error::{Error, Result};
pub use field::{RampTestProblem, VelocityField};
pub use geometry::{CutCellMesh, Point, RampDomain};
