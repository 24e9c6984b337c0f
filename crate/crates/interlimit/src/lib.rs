//! Two-dimensional diffuse-interface (Cahn–Hilliard) / Stokes solver with a
//! sharp-interface (Mullins–Sekerka) radial reference, spectral verification
//! of the linearized interface operator, and an ε-convergence harness.
//!
//! The library is organized around the ε → 0 interface-limit workflow:
//!
//! * [`potential`] — double-well potentials, the optimal 1D profile θ₀, the
//!   surface-tension constant σ, and smooth cut-off functions.
//! * [`geometry`] — closed Fourier interface curves, signed distance, tubular
//!   charts (r, s), stretched coordinates, and surface differential operators.
//! * [`field`] — uniform-grid scalar/vector (MAC) fields with CSV and binary
//!   import/export.
//! * [`dst`] — fast sine-transform solvers: the node-centered Dirichlet
//!   Poisson inverse and the spectral Cahn–Hilliard step kernel.
//! * [`stokes`] — stationary Stokes solver on a staggered grid with the slip
//!   (traction-Robin) boundary condition and Korn-form diagnostics.
//! * [`diffuse`] — semi-implicit convex-splitting time integration of the
//!   coupled Stokes/Cahn–Hilliard system with energy diagnostics.
//! * [`sharp`] — semi-analytic radial Mullins–Sekerka reference solution and
//!   leading-order ansatz composition for error measurement.
//! * [`spectral`] — 1D/2D verification of the spectral lower bound of the
//!   linearized Cahn–Hilliard operator and the interface-layer decomposition.
//! * [`norms`] — every error functional used by the convergence study,
//!   including the H⁻¹ gauge and boundary-weighted norms.
//! * [`config`] / [`harness`] — flat-file run configuration, orchestration of
//!   the run modes, and the convergence-table fitter.
//!
//! All numerics are deterministic: serial kernels, explicitly seeded RNG for
//! randomized suites, and byte-stable text output.

pub mod config;
pub mod diffuse;
pub mod dst;
pub mod error;
pub mod field;
pub mod geometry;
pub mod harness;
pub mod norms;
pub mod potential;
pub mod sharp;
pub mod spectral;
pub mod stokes;
pub mod tolerances;

pub use error::InterlimitError;

/// Convenience result alias used across the crate.
pub type Result<T> = std::result::Result<T, InterlimitError>;
