//! Fractional calculus: Caputo derivatives, special functions, Hölder
//! seminorm estimates and the spectral fractional Laplacian.

mod caputo;
mod holder;
mod laplacian;
mod special;

pub use caputo::{caputo_l1, frac_sobolev_norm, l1_weights, FracOrder, TimeGrid};
pub use holder::gagliardo_seminorm;
pub use laplacian::{frac_laplacian, spectral_multiplier, SpectralField};
pub use special::{gamma_fn, ln_gamma, mittag_leffler, mittag_leffler_terms};
