//! Periodic pseudospectral library for the regularized Benjamin-type equation
//!
//! ```text
//!     η_t = A_j(η − (3α/4) η²),    A_j = −(1 + b·D_j − a∂²)⁻¹ ∂_x
//! ```
//!
//! on `[−π, π]`, where `D_j` is the Hilbert transform (`j = 1`) or its finite-depth
//! counterpart on a strip (`j = 2`). The linear flow is applied exactly mode by mode; the
//! nonlinear flow is integrated by RK4 or by a Picard iteration on the Duhamel formula.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod io;
pub mod propagator;
pub mod spectral;
pub mod symbols;

pub use analysis::{diagnostics, frequency_split, norm_equivalence_constants, DiagnosticsRecord, ProbeReport};
pub use error::{Error, Result};
pub use evolution::{solve, Method, SolverConfig, Trajectory};
pub use propagator::linear_propagate;
pub use spectral::{
    forward_transform, inverse_transform, sobolev_norm, PeriodicGrid, RealField, SobolevIndex,
    SpectralField,
};
pub use symbols::{apply_aj, ModelParams, Operator, SymbolTable};
