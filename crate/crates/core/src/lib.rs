//! Pseudospectral simulation of the one-dimensional viscous spinodal
//! decomposition equation
//!
//! ```text
//! u_t = p(u)_xx + nu u_xxt - eps (u_x^2)_xx - delta u_xxxx,   x in [0, l]
//! ```
//!
//! with periodic or Neumann boundary conditions, together with diagnostics
//! that check the a priori energy inequalities along computed trajectories.
//!
//! * [`spectral`]: grids, Fourier/cosine transforms, derivatives, Helmholtz inverse.
//! * [`eos`]: the nonconvex equation of state `p(u)`.
//! * [`dynamics`]: right-hand side, IMEX and exponential steppers, Picard iteration.
//! * [`diagnostics`]: norms, energies, inequality certificates.
//! * [`cli`]: configuration files, run orchestration and CSV output.

pub mod cli;
pub mod diagnostics;
pub mod dynamics;
pub mod eos;
pub mod spectral;

pub use eos::EquationOfState;
pub use spectral::{BoundaryCondition, Field, Grid, SpectralCoeffs};
