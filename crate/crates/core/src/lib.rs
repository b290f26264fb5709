//! Fully discrete Luenberger (nudging) observer for the one-dimensional
//! barotropic Euler equations with quadratic friction.
//!
//! Density lives in piecewise constants, momentum in continuous piecewise
//! linears; time stepping is implicit Euler with a Newton solve per step.
//! The crate also ships a manufactured reference solution, relative-energy
//! diagnostics and the experiment harness behind the `euler-observer` CLI.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the bottom of this file fix the scalar to `f64`, which is what
//! the experiments use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod banded;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod gas;
pub mod mesh;
pub mod newton;
pub mod reference;
pub mod scalar;
pub mod scheme;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Grid = mesh::Grid1D<f64>;
pub type Cells = mesh::CellField<f64>;
pub type Nodes = mesh::NodalField<f64>;
pub type State = scheme::DiscreteState<f64>;
pub type Params = scheme::SchemeParams<f64>;
pub type Reference = reference::ManufacturedSolution<f64>;
pub type Noise = reference::NoiseModel<f64>;
pub type Record = diagnostics::TimeSeriesRecord<f64>;
pub type Bounds = gas::StateBounds<f64>;
