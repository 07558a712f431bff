//! Grid numerics on three-dimensional groups (the first Heisenberg group and
//! ℝ³): instantiated operators, convolutions, homotopies and the primitive
//! pipeline for volume forms.

pub mod convolve;
pub mod fd;
pub mod grid;
pub mod homotopy;
pub mod io;
pub mod kernel;
pub mod norms;
pub mod pipeline;
pub mod samples;

use crate::opcalc::OpcalcError;
use crate::rumin::RuminError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("unsupported group: {0}")]
    UnsupportedGroup(String),
    #[error("field is nonzero within {nodes} nodes of the grid boundary along axis {axis}")]
    MarginViolation { axis: usize, nodes: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("kernel is singular inside the support and excision is disabled")]
    SingularKernel,
    #[error("inadmissible exponents: {0}")]
    InvalidExponent(String),
    #[error("input does not have zero average: integral {integral:e} against L1 norm {l1:e}")]
    NonZeroAverage { integral: f64, l1: f64 },
    #[error("support condition violated: {0}")]
    Support(String),
    #[error("bump mass {mass} differs from 1")]
    BumpMass { mass: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("i/o failure: {0}")]
    Io(String),
    #[error(transparent)]
    Rumin(#[from] RuminError),
    #[error(transparent)]
    Opcalc(#[from] OpcalcError),
}

impl From<std::io::Error> for NumericsError {
    fn from(e: std::io::Error) -> Self {
        NumericsError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, NumericsError>;
