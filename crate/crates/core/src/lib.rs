//! Normalized solutions of `D^2 u + mu D u - lambda u = |u|^{p-2} u` with
//! prescribed mass `|u|_2 = a`, where `D` is the Laplacian on `R^N`.
//!
//! The numerical layers are generic over [`Scalar`]; the aliases at the
//! crate root fix them to `f64`.

pub mod analytic;
pub mod banded;
pub mod error;
pub mod fiber;
pub mod harness;
pub mod json;
pub mod radial;
pub mod roots;
pub mod scalar;
pub mod solve;

pub use error::{Error, Result};
pub use scalar::{lit, Scalar};

pub type ProblemParams = analytic::ProblemParams<f64>;
pub type GnConstant = analytic::GnConstant<f64>;
pub type Thresholds = analytic::Thresholds<f64>;
pub type Landscape = analytic::Landscape<f64>;
pub type NormQuadruple = fiber::NormQuadruple<f64>;
pub type FiberGeometry = fiber::FiberGeometry<f64>;
pub type RadialGrid = radial::RadialGrid<f64>;
pub type RadialProfile = radial::RadialProfile<f64>;
pub type SolveReport = solve::SolveReport<f64>;
pub type SolverConfig = solve::SolverConfig<f64>;
