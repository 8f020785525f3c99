//! Stochastic symmetrized Kantorovich operators and the fractional calculus
//! around them.
//!
//! The crate is organised bottom-up:
//!
//! * [`kernel`] builds the deformed hyperbolic-tangent activation, the
//!   symmetrized density and the separable product kernel used by every
//!   lattice operator.
//! * [`fractional`] holds the Caputo L1 discretization, the Gamma and
//!   Mittag-Leffler special functions, Hölder (Gagliardo) estimators and the
//!   spectral fractional Laplacian on periodic grids.
//! * [`kantorovich`] is the lattice operator with multiplicative Gaussian cell
//!   noise: expectation, noisy sampling, closed-form variance and kernel
//!   moments for the Voronovskaya expansion.
//! * [`mollifier`] is the continuous counterpart: scaled bump kernels, white
//!   noise measure integration and the bias/variance/MSE decomposition.
//! * [`turbulence`] runs a 1D periodic fractional Burgers proxy and the energy
//!   dissipation and L² convergence studies.

pub mod error;
pub mod field;
pub mod fractional;
pub mod kantorovich;
pub mod kernel;
pub mod mollifier;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod stats;
pub mod testfn;
pub mod turbulence;

pub use error::{Error, Result};
pub use field::{BoxGrid, Domain, Field, PeriodicGrid};
pub use kernel::KernelParams;
pub use report::{Check, ExperimentReport, ReportRow};
