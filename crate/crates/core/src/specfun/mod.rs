//! Scalar special functions: Gamma, Bessel `J_m` and its zeros, the
//! Mittag-Leffler function, and radial Bessel moments.

pub mod bessel;
pub mod gamma;
pub mod mittag_leffler;
pub mod quadrature;

pub use bessel::{bessel_j, bessel_zero, phi_integral, zeros_below, BesselScratch, BesselZero};
pub use gamma::{gamma, ln_gamma, recip_gamma};
pub use mittag_leffler::{
    ml_decay, ml_time_derivative, mittag_leffler, MLArgs, MittagLeffler,
};
