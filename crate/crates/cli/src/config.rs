//! Configuration file schema and parameter-path resolution.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use hetnet_core::{KappaMuShadowedParams, NetworkConfig, NumericSettings, ShadowingModel, SimMode};

use crate::CliError;

/// How shadowing enters the simulator, config-file spelling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimModeName {
    ExplicitShadowing,
    EquivalentDensity,
}

impl SimModeName {
    pub fn to_mode(self) -> SimMode {
        match self {
            SimModeName::ExplicitShadowing => SimMode::ExplicitShadowing,
            SimModeName::EquivalentDensity => SimMode::EquivalentDensity,
        }
    }
}

/// `[sim]` section: Monte Carlo run controls.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub drops: u64,
    pub seed: u64,
    pub mode: SimModeName,
    /// Drop-region radius; derived from the density when absent.
    pub region_radius: Option<f64>,
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            drops: 100_000,
            seed: 1,
            mode: SimModeName::EquivalentDensity,
            region_radius: None,
        }
    }
}

/// `[numerics]` section: optional overrides folded onto the defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsSection {
    pub series_tol: Option<f64>,
    pub max_series_terms: Option<usize>,
    pub quad_order: Option<usize>,
    pub integral_tol: Option<f64>,
    pub max_laguerre_order: Option<usize>,
    pub laguerre_tol: Option<f64>,
}

impl NumericsSection {
    pub fn to_settings(&self) -> NumericSettings {
        let d = NumericSettings::default();
        NumericSettings {
            series_tol: self.series_tol.unwrap_or(d.series_tol),
            max_series_terms: self.max_series_terms.unwrap_or(d.max_series_terms),
            quad_order: self.quad_order.unwrap_or(d.quad_order),
            integral_tol: self.integral_tol.unwrap_or(d.integral_tol),
            max_laguerre_order: self.max_laguerre_order.unwrap_or(d.max_laguerre_order),
            laguerre_tol: self.laguerre_tol.unwrap_or(d.laguerre_tol),
        }
    }
}

/// `[sweep]` section: one metric evaluated over a grid of one parameter.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// `rate`, `moment:<r>`, `outage:<T_dB>`, or `mgf:<t>`.
    pub metric: String,
    /// Swept parameter path, e.g. `tiers[0].fading.kappa`.
    pub path: String,
    pub grid: Vec<f64>,
    /// Fixed parameter-path overrides applied before the sweep.
    #[serde(default)]
    pub overrides: BTreeMap<String, f64>,
    /// Add Monte Carlo columns next to the analytic ones.
    #[serde(default)]
    pub with_monte_carlo: bool,
}

/// Whole config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppConfig {
    pub network: NetworkConfig,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

impl AppConfig {
    /// Parse from TOML (or JSON, which the reproducibility header uses),
    /// rebuild the derived fading parameters, and validate.
    pub fn from_str(text: &str) -> Result<AppConfig, CliError> {
        let trimmed = text.trim_start();
        let mut cfg: AppConfig = if trimmed.starts_with('{') {
            serde_json::from_str(text)
                .map_err(|e| CliError::config(format!("config parse error: {e}")))?
        } else {
            toml::from_str(text)
                .map_err(|e| CliError::config(format!("config parse error: {e}")))?
        };
        cfg.finalize()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<AppConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        AppConfig::from_str(&text)
    }

    /// Recompute the derived θ fields (serde skips them) and validate.
    pub fn finalize(&mut self) -> Result<(), CliError> {
        for (k, tier) in self.network.tiers.iter_mut().enumerate() {
            let f = &tier.fading;
            tier.fading = KappaMuShadowedParams::new(f.kappa, f.mu, f.m, f.mean_power)
                .map_err(|e| CliError::config(format!("network.tiers[{k}].fading: {e}")))?;
        }
        self.network
            .validate()
            .map_err(|e| CliError::config(format!("network: {e}")))?;
        if self.sim.drops == 0 {
            return Err(CliError::config("sim.drops: must be > 0"));
        }
        if let Some(sw) = &self.sweep {
            if sw.grid.is_empty() {
                return Err(CliError::config("sweep.grid: must be nonempty"));
            }
        }
        Ok(())
    }
}

/// Set a numeric field addressed by a dotted path such as
/// `tiers[0].fading.kappa` or `alpha`. `tier[k]` is accepted as an alias.
pub fn set_path(net: &mut NetworkConfig, path: &str, value: f64) -> Result<(), CliError> {
    let bad = |msg: &str| CliError::config(format!("parameter path '{path}': {msg}"));
    let parts: Vec<&str> = path.split('.').collect();
    match parts[0] {
        "alpha" if parts.len() == 1 => net.alpha = value,
        "tau" if parts.len() == 1 => net.tau = value,
        "noise_psd" if parts.len() == 1 => net.noise_psd = value,
        "bandwidth" if parts.len() == 1 => net.bandwidth = value,
        head if head.starts_with("tiers[") || head.starts_with("tier[") => {
            let idx_str = head
                .trim_start_matches("tiers[")
                .trim_start_matches("tier[")
                .strip_suffix(']')
                .ok_or_else(|| bad("missing closing bracket"))?;
            let k: usize = idx_str
                .parse()
                .map_err(|_| bad("tier index is not an integer"))?;
            if k >= net.tiers.len() {
                return Err(bad(&format!(
                    "tier index {k} out of range (network has {} tiers)",
                    net.tiers.len()
                )));
            }
            let tier = &mut net.tiers[k];
            match parts.get(1).copied() {
                Some("density") if parts.len() == 2 => tier.density = value,
                Some("power") if parts.len() == 2 => tier.power = value,
                Some("fading") if parts.len() == 3 => {
                    let f = &tier.fading;
                    let (mut kappa, mut mu, mut m, mut hbar) =
                        (f.kappa, f.mu, f.m, f.mean_power);
                    match parts[2] {
                        "kappa" => kappa = value,
                        "mu" => mu = value,
                        "m" => m = value,
                        "mean_power" => hbar = value,
                        other => return Err(bad(&format!("unknown fading field '{other}'"))),
                    }
                    tier.fading = KappaMuShadowedParams::new(kappa, mu, m, hbar)
                        .map_err(|e| bad(&e.to_string()))?;
                }
                Some("shadowing") if parts.len() == 3 => {
                    set_shadowing_field(&mut tier.shadowing, parts[2], value)
                        .map_err(|msg| bad(&msg))?
                }
                _ => return Err(bad("unknown tier field")),
            }
        }
        _ => return Err(bad("does not resolve to a numeric field")),
    }
    net.validate()
        .map_err(|e| CliError::config(format!("after setting '{path}': {e}")))
}

fn set_shadowing_field(sh: &mut ShadowingModel, field: &str, value: f64) -> Result<(), String> {
    match (sh, field) {
        (ShadowingModel::Lognormal { mu_db, .. }, "mu_db") => *mu_db = value,
        (ShadowingModel::Lognormal { sigma_db, .. }, "sigma_db") => *sigma_db = value,
        (ShadowingModel::Gamma { shape, .. }, "shape") => *shape = value,
        (ShadowingModel::Gamma { scale, .. }, "scale") => *scale = value,
        (ShadowingModel::InverseGaussian { mean, .. }, "mean") => *mean = value,
        (ShadowingModel::InverseGaussian { shape, .. }, "shape") => *shape = value,
        (_, other) => {
            return Err(format!(
                "field '{other}' does not exist on the configured shadowing law"
            ))
        }
    }
    Ok(())
}
