//! Subcommand execution: turns a resolved `Invocation` into a table.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use hetnet_core::performance::{outage_probability, sinr_mgf, sinr_moment, spectral_efficiency};
use hetnet_core::simulator::{association_fractions, estimate};
use hetnet_core::{
    association_probability, laguerre_coeffs_auto, pdf_series, MetricResult, NetworkConfig,
    NumericSettings, ShadowingModel, SimConfig, SimMetric,
};

use crate::config::{set_path, AppConfig};
use crate::output::{Cell, Invocation, Table};
use crate::CliError;

/// Outcome of one run: the rendered table plus whether every validation
/// check (if any) passed.
pub struct RunOutcome {
    pub table: Table,
    pub checks_passed: bool,
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Parsed `--metric` / sweep-metric string.
#[derive(Debug, Clone, Copy)]
pub enum MetricSpec {
    Rate,
    /// E[SINR^r]
    Moment(f64),
    /// P(SINR < T), threshold stored in dB
    OutageDb(f64),
    /// E[e^{t·SINR}] (analytic only)
    Mgf(f64),
    /// E[e^{−s·Î}] (simulation only)
    Laplace(f64),
}

pub fn parse_metric(s: &str) -> Result<MetricSpec, CliError> {
    if s == "rate" {
        return Ok(MetricSpec::Rate);
    }
    let (name, arg) = s
        .split_once(':')
        .ok_or_else(|| CliError::config(format!("metric '{s}': expected name:value")))?;
    let x: f64 = arg
        .parse()
        .map_err(|_| CliError::config(format!("metric '{s}': '{arg}' is not a number")))?;
    match name {
        "moment" => Ok(MetricSpec::Moment(x)),
        "outage" => Ok(MetricSpec::OutageDb(x)),
        "mgf" => Ok(MetricSpec::Mgf(x)),
        "laplace" => Ok(MetricSpec::Laplace(x)),
        other => Err(CliError::config(format!("unknown metric '{other}'"))),
    }
}

fn analytic_metric(
    net: &NetworkConfig,
    spec: MetricSpec,
    settings: &NumericSettings,
) -> Result<MetricResult, CliError> {
    let r = match spec {
        MetricSpec::Rate => spectral_efficiency(net, settings),
        MetricSpec::Moment(r) => sinr_moment(net, r, settings),
        MetricSpec::OutageDb(db) => outage_probability(net, db_to_linear(db), settings),
        MetricSpec::Mgf(t) => sinr_mgf(net, t, 12, settings),
        MetricSpec::Laplace(_) => {
            return Err(CliError::config(
                "metric 'laplace' is simulation-only; use the simulate subcommand",
            ))
        }
    };
    r.map_err(CliError::from)
}

fn sim_metric(spec: MetricSpec) -> Result<SimMetric, CliError> {
    match spec {
        MetricSpec::Rate => Ok(SimMetric::Rate),
        MetricSpec::Moment(r) => Ok(SimMetric::MomentOf(r)),
        MetricSpec::OutageDb(db) => Ok(SimMetric::OutageAt(db_to_linear(db))),
        MetricSpec::Laplace(s) => Ok(SimMetric::LaplaceAt(s)),
        MetricSpec::Mgf(_) => Err(CliError::config(
            "metric 'mgf' has no Monte Carlo estimator (the SINR MGF diverges)",
        )),
    }
}

fn sim_config(cfg: &AppConfig) -> Result<SimConfig, CliError> {
    let mode = cfg.sim.mode.to_mode();
    let sim = match cfg.sim.region_radius {
        Some(r) => {
            let sim = SimConfig {
                region_radius: r,
                drops: cfg.sim.drops,
                seed: cfg.sim.seed,
                conditioning: None,
                mode,
            };
            sim.validate(&cfg.network)?;
            sim
        }
        None => SimConfig::auto(&cfg.network, cfg.sim.drops, cfg.sim.seed, mode)?,
    };
    Ok(sim)
}

/// Fail loudly (exit 3) when a headline metric did not converge, carrying
/// the engine's diagnostic notes in the message.
fn require_converged(which: &str, r: &MetricResult) -> Result<(), CliError> {
    if r.diagnostics.converged {
        Ok(())
    } else {
        Err(CliError::no_convergence(format!(
            "{which}: {}",
            r.diagnostics.notes.join("; ")
        )))
    }
}

pub fn execute(inv: &Invocation) -> Result<RunOutcome, CliError> {
    let cfg = &inv.config;
    let settings = cfg.numerics.to_settings();
    let table = match inv.command.as_str() {
        "pdf" => run_pdf(inv, cfg, &settings)?,
        "coeffs" => run_coeffs(inv, cfg, &settings)?,
        "rate" => run_rate(cfg, &settings)?,
        "moments" => run_moments(inv, cfg, &settings)?,
        "mgf" => run_mgf(inv, cfg, &settings)?,
        "outage" => run_outage(inv, cfg, &settings)?,
        "simulate" => run_simulate(inv, cfg)?,
        "sweep" => run_sweep(cfg, &settings)?,
        "validate" => return run_validate(cfg, &settings),
        other => return Err(CliError::config(format!("unknown command '{other}'"))),
    };
    Ok(RunOutcome {
        table,
        checks_passed: true,
    })
}

fn tier_index(inv: &Invocation, cfg: &AppConfig) -> Result<usize, CliError> {
    let k = inv.param_u64("tier").unwrap_or(0) as usize;
    if k >= cfg.network.tiers.len() {
        return Err(CliError::config(format!(
            "tier: index {k} out of range (network has {} tiers)",
            cfg.network.tiers.len()
        )));
    }
    Ok(k)
}

fn run_pdf(
    inv: &Invocation,
    cfg: &AppConfig,
    settings: &NumericSettings,
) -> Result<Table, CliError> {
    let k = tier_index(inv, cfg)?;
    let fading = &cfg.network.tiers[k].fading;
    let points = inv.param_u64("points").unwrap_or(200).max(2);
    let x_max = inv
        .param_f64("x_max")
        .unwrap_or(8.0 * fading.mean_power.max(fading.moment(1.0)?));
    let coeffs = laguerre_coeffs_auto(fading, settings.max_laguerre_order, settings.laguerre_tol)?;
    let mut table = Table {
        columns: vec!["x", "pdf_exact", "pdf_series"],
        ..Default::default()
    };
    table.notes.push(format!(
        "laguerre: order = {}, converged = {}, tail_estimate = {:e}",
        coeffs.order, coeffs.converged, coeffs.tail_estimate
    ));
    for i in 1..=points {
        let x = x_max * i as f64 / points as f64;
        let exact = fading.pdf_exact(x)?;
        let series = if coeffs.converged {
            pdf_series(&coeffs, fading, x)?
        } else {
            f64::NAN
        };
        table
            .rows
            .push(vec![Cell::F(x), Cell::F(exact), Cell::F(series)]);
    }
    Ok(table)
}

fn run_coeffs(
    inv: &Invocation,
    cfg: &AppConfig,
    settings: &NumericSettings,
) -> Result<Table, CliError> {
    let k = tier_index(inv, cfg)?;
    let fading = &cfg.network.tiers[k].fading;
    let coeffs = laguerre_coeffs_auto(fading, settings.max_laguerre_order, settings.laguerre_tol)?;
    let mut table = Table {
        columns: vec!["n", "c_n"],
        ..Default::default()
    };
    table.notes.push(format!(
        "converged = {}, tail_estimate = {:e}",
        coeffs.converged, coeffs.tail_estimate
    ));
    for n in 0..=coeffs.order {
        table
            .rows
            .push(vec![Cell::I(n as i64), Cell::F(coeffs.c_series[n])]);
    }
    Ok(table)
}

fn run_rate(cfg: &AppConfig, settings: &NumericSettings) -> Result<Table, CliError> {
    let rate = spectral_efficiency(&cfg.network, settings)?;
    require_converged("spectral efficiency", &rate)?;
    let f = &cfg.network.tiers[0].fading;
    let sigma_l = match cfg.network.tiers[0].shadowing {
        ShadowingModel::Lognormal { sigma_db, .. } => sigma_db,
        _ => 0.0,
    };
    Ok(Table {
        columns: vec!["kappa", "mu", "m", "sigma_l", "rate_nats", "err_est"],
        rows: vec![vec![
            Cell::F(f.kappa),
            Cell::F(f.mu),
            Cell::F(f.m),
            Cell::F(sigma_l),
            Cell::F(rate.value),
            Cell::F(rate.abs_error_estimate),
        ]],
        notes: vec![format!("kernel: {:?}", rate.kernel)],
    })
}

fn run_moments(
    inv: &Invocation,
    cfg: &AppConfig,
    settings: &NumericSettings,
) -> Result<Table, CliError> {
    let orders = inv
        .param_vec_f64("orders")
        .unwrap_or_else(|| vec![0.1, 0.25, 0.4]);
    let mut table = Table {
        columns: vec!["r", "value", "err_est", "converged"],
        ..Default::default()
    };
    for r in orders {
        let m = sinr_moment(&cfg.network, r, settings)?;
        table.rows.push(vec![
            Cell::F(r),
            Cell::F(m.value),
            Cell::F(m.abs_error_estimate),
            Cell::I(m.diagnostics.converged as i64),
        ]);
        for n in &m.diagnostics.notes {
            table.notes.push(format!("r = {r}: {n}"));
        }
    }
    Ok(table)
}

fn run_mgf(
    inv: &Invocation,
    cfg: &AppConfig,
    settings: &NumericSettings,
) -> Result<Table, CliError> {
    let points = inv
        .param_vec_f64("points")
        .unwrap_or_else(|| vec![-2.0, -1.0, -0.5, 0.0]);
    let terms = inv.param_u64("terms").unwrap_or(12) as usize;
    let mut table = Table {
        columns: vec!["t", "value", "err_est", "terms_used", "converged"],
        ..Default::default()
    };
    for t in points {
        let m = sinr_mgf(&cfg.network, t, terms, settings)?;
        table.rows.push(vec![
            Cell::F(t),
            Cell::F(m.value),
            Cell::F(m.abs_error_estimate),
            Cell::I(m.series_terms_used as i64),
            Cell::I(m.diagnostics.converged as i64),
        ]);
        for n in &m.diagnostics.notes {
            table.notes.push(format!("t = {t}: {n}"));
        }
    }
    Ok(table)
}

fn run_outage(
    inv: &Invocation,
    cfg: &AppConfig,
    settings: &NumericSettings,
) -> Result<Table, CliError> {
    let thresholds = inv
        .param_vec_f64("thresholds_db")
        .unwrap_or_else(|| vec![-5.0, 0.0, 5.0, 10.0]);
    let mut table = Table {
        columns: vec!["threshold_db", "threshold", "outage", "err_est"],
        ..Default::default()
    };
    for db in thresholds {
        let t = db_to_linear(db);
        let o = outage_probability(&cfg.network, t, settings)?;
        require_converged(&format!("outage at {db} dB"), &o)?;
        table.rows.push(vec![
            Cell::F(db),
            Cell::F(t),
            Cell::F(o.value),
            Cell::F(o.abs_error_estimate),
        ]);
    }
    Ok(table)
}

fn run_simulate(inv: &Invocation, cfg: &AppConfig) -> Result<Table, CliError> {
    let spec = parse_metric(inv.param_str("metric").unwrap_or("rate"))?;
    let sim = sim_config(cfg)?;
    let est = estimate(&cfg.network, &sim, sim_metric(spec)?)?;
    let mut table = Table {
        columns: vec![
            "metric",
            "mean",
            "ci_half_width",
            "n_effective",
            "trimmed_mean",
            "empty_region_redraws",
        ],
        ..Default::default()
    };
    table
        .notes
        .push(format!("region_radius: {:e}", sim.region_radius));
    if let Some(w) = &est.warning {
        table.notes.push(format!("warning: {w}"));
    }
    table.rows.push(vec![
        Cell::S(inv.param_str("metric").unwrap_or("rate").to_string()),
        Cell::F(est.mean),
        Cell::F(est.ci_half_width),
        Cell::I(est.n_effective as i64),
        Cell::F(est.trimmed_mean.unwrap_or(f64::NAN)),
        Cell::I(est.empty_region_redraws as i64),
    ]);
    Ok(table)
}

fn run_sweep(cfg: &AppConfig, settings: &NumericSettings) -> Result<Table, CliError> {
    let spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::config("sweep: config has no [sweep] section"))?;
    let metric = parse_metric(&spec.metric)?;
    let mut base = cfg.network.clone();
    for (path, &v) in &spec.overrides {
        set_path(&mut base, path, v)?;
    }
    // Resolve the path once up front so a bad path fails before any work.
    {
        let mut probe = base.clone();
        set_path(&mut probe, &spec.path, spec.grid[0])?;
    }
    let with_mc = spec.with_monte_carlo;
    let n = spec.grid.len();
    let results: Mutex<Vec<Option<Result<Vec<Cell>, CliError>>>> =
        Mutex::new((0..n).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = std::thread::available_parallelism()
        .map(|p| p.get())
        .unwrap_or(1)
        .min(n);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let value = spec.grid[i];
                let row = (|| -> Result<Vec<Cell>, CliError> {
                    let mut net = base.clone();
                    set_path(&mut net, &spec.path, value)?;
                    let a = analytic_metric(&net, metric, settings)?;
                    let mut row = vec![
                        Cell::F(value),
                        Cell::F(a.value),
                        Cell::F(a.abs_error_estimate),
                    ];
                    if with_mc {
                        let mut point_cfg = cfg.clone();
                        point_cfg.network = net;
                        let sim = sim_config(&point_cfg)?;
                        let est = estimate(&point_cfg.network, &sim, sim_metric(metric)?)?;
                        row.push(Cell::F(est.trimmed_mean.unwrap_or(est.mean)));
                        row.push(Cell::F(est.ci_half_width));
                    }
                    Ok(row)
                })();
                results.lock().expect("sweep results lock")[i] = Some(row);
            });
        }
    });
    let mut table = Table {
        columns: if with_mc {
            vec!["value", "metric", "err_est", "mc_mean", "mc_ci_half_width"]
        } else {
            vec!["value", "metric", "err_est"]
        },
        ..Default::default()
    };
    table
        .notes
        .push(format!("sweep: {} over {}", spec.metric, spec.path));
    for slot in results.into_inner().expect("sweep results lock") {
        table
            .rows
            .push(slot.expect("every grid point was dispatched")?);
    }
    Ok(table)
}

/// Analytic-vs-simulator cross-check on the configured network.
fn run_validate(cfg: &AppConfig, settings: &NumericSettings) -> Result<RunOutcome, CliError> {
    let net = &cfg.network;
    let sim = sim_config(cfg)?;
    let drops = sim.drops as f64;
    let mut table = Table {
        columns: vec!["check", "analytic", "simulated", "tolerance", "pass"],
        ..Default::default()
    };
    let mut all_pass = true;
    let mut push = |name: String, analytic: f64, simulated: f64, tol: f64| {
        let ok = (analytic - simulated).abs() <= tol;
        all_pass &= ok;
        table.rows.push(vec![
            Cell::S(name),
            Cell::F(analytic),
            Cell::F(simulated),
            Cell::F(tol),
            Cell::S(if ok { "pass" } else { "FAIL" }.into()),
        ]);
    };

    let rate = spectral_efficiency(net, settings)?;
    require_converged("spectral efficiency", &rate)?;
    let rate_mc = estimate(net, &sim, SimMetric::Rate)?;
    push(
        "rate".into(),
        rate.value,
        rate_mc.mean,
        0.02 * rate.value.abs() + 3.0 * rate_mc.ci_half_width,
    );

    for db in [-5.0, 0.0, 5.0, 10.0] {
        let t = db_to_linear(db);
        let o = outage_probability(net, t, settings)?;
        require_converged(&format!("outage at {db} dB"), &o)?;
        let o_mc = estimate(net, &sim, SimMetric::OutageAt(t))?;
        push(
            format!("outage@{db}dB"),
            o.value,
            o_mc.mean,
            0.02 + 3.0 * o_mc.ci_half_width,
        );
    }

    let fracs = association_fractions(net, &sim)?;
    for (k, frac) in fracs.iter().enumerate() {
        let p = association_probability(net, k)?;
        let sigma = (p * (1.0 - p) / drops).sqrt();
        push(format!("association@tier{k}"), p, *frac, 3.0 * sigma + 1e-6);
    }

    Ok(RunOutcome {
        table,
        checks_passed: all_pass,
    })
}
