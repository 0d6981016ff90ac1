//! Downlink performance analysis of K-tier Poisson cellular networks under
//! κ-μ shadowed small-scale fading combined with large-scale shadowing.
//!
//! The crate pairs an analytical engine (series expansion of the fading law,
//! interference Laplace transforms, radial-expectation kernels) with an
//! independent Monte Carlo point-process simulator so every metric can be
//! cross-validated.

pub mod error;
pub mod fading;
pub mod network;
pub mod performance;
pub mod settings;
pub mod shadowing;
pub mod simulator;
pub mod specfun;

pub use error::{Error, Result};
pub use fading::{laguerre_coeffs, laguerre_coeffs_auto, pdf_series, GammaMixture, KappaMuShadowedParams, LaguerreCoeffs, NamedModel};
pub use network::{association_probability, NetworkConfig, TierConfig};
pub use performance::{GFunction, MetricResult};
pub use settings::NumericSettings;
pub use shadowing::ShadowingModel;
pub use simulator::{DropResult, Estimate, SimConfig, SimMetric, SimMode};
