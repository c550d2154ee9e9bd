//! Numerical laboratory for the 2D incompressible Boussinesq system with
//! viscosity and no thermal diffusivity, specialized to mirror-symmetric
//! temperature patches.
//!
//! The crate is organized around five independent layers:
//!
//! * [`grid`] / [`field`] / [`spectral`]: doubly periodic grids, real and
//!   spectral fields, Fourier derivatives, inverse Laplacian, Biot-Savart,
//!   homogeneous Sobolev norms and 2/3-rule dealiasing.
//! * [`solver`]: vorticity-form time stepper (integrating-factor RK4),
//!   patch seeding and the odd-in-`x2` symmetry projection.
//! * [`contour`] / [`spline`] / [`shapes`]: Lagrangian marker curves,
//!   periodic cubic splines, curvature and inscribed-radius measurement,
//!   rasterization back onto the grid.
//! * [`diagnostics`]: energy balances, the potential-energy derivative
//!   identities and their residuals, cumulative bound checks, and
//!   low-dissipation time extraction.
//! * [`lemmas`]: constructive test-function checks of the curvature and
//!   perimeter lower-bound inequalities, plus the inscribed-disk product
//!   check `r * max|kappa| >= 1`.
//!
//! Everything here is deterministic and IO-free; file formats and the CLI
//! live in the companion crate.

pub mod contour;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod grid;
pub mod lemmas;
pub mod sampler;
pub mod shapes;
pub mod solver;
pub mod spectral;
pub mod spline;

pub use error::Error;
pub use field::{RealField, SpectralField};
pub use grid::Grid;
