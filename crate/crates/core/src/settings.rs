use serde::{Deserialize, Serialize};

/// Numeric tolerances and truncation limits shared by the analytical engine.
///
/// Every series and quadrature routine reads its knobs from here so a single
/// record can tighten or relax the whole evaluation chain.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NumericSettings {
    /// Term-relative stopping tolerance for hypergeometric-type series.
    pub series_tol: f64,
    /// Hard cap on series terms before reporting non-convergence.
    pub max_series_terms: usize,
    /// Gauss-Laguerre order for the interference kernel.
    pub quad_order: usize,
    /// Absolute tolerance for adaptive quadrature of radial/z integrals.
    pub integral_tol: f64,
    /// Maximum order of the Laguerre expansion of the fading PDF.
    pub max_laguerre_order: usize,
    /// Adaptive stop for the Laguerre coefficients.
    pub laguerre_tol: f64,
}

impl Default for NumericSettings {
    fn default() -> Self {
        NumericSettings {
            series_tol: 1e-14,
            max_series_terms: 100_000,
            quad_order: 64,
            integral_tol: 1e-10,
            max_laguerre_order: 50,
            laguerre_tol: 1e-10,
        }
    }
}
