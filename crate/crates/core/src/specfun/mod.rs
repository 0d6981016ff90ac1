//! Real-parameter special functions and quadrature rules backing the
//! analytical machinery.
//!
//! Everything here is a pure, deterministic function of its arguments; the
//! only shared state is a read-mostly cache of quadrature nodes keyed by
//! order.

pub mod bessel;
pub mod erf;
pub mod gamma;
pub mod hyper;
pub mod integrate;
pub mod jet;
pub mod laguerre;

pub use bessel::bessel_k_real_order;
pub use erf::{erfc, erfcx};
pub use gamma::{gamma_fn, ln_gamma, lower_incomplete_gamma_reg, real_binomial};
pub use hyper::{appell_f2, gauss_2f1, kummer_1f1, ln_kummer_1f1_pos};
pub use integrate::{adaptive_simpson, integrate_zero_to_inf};
pub use jet::{erfcx_jet, lower_inc_gamma_reg_jet, Jet};
pub use laguerre::{gauss_laguerre, gauss_laguerre_general, QuadratureRule};
