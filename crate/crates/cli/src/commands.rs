//! `run`, `optimize` and `sweep`: each renders a CSV document.

use std::io::Write;
use std::path::Path;

use qie_core::cycle::run_cycle_analytic;
use qie_core::optimizer::{
    analytic_optimum, brute_force_max_power, eta_star_microscopic, optimal_hot_time, run_cycle,
    sweep, GridSpec, DEFAULT_GRID, DEFAULT_TAU_FB_RATIOS,
};

use crate::config::ScenarioConfig;
use crate::csv::CsvTable;
use crate::error::CliError;

pub const RUN_HEADER: [&str; 10] = [
    "dS", "sigma", "tau_circ", "W_total", "W_fb", "W_wm", "Q_h", "Q_c", "eta", "P",
];

pub const RESIDUAL_HEADER: [&str; 6] = [
    "state_closure",
    "reservoir_energy",
    "work_decomposition",
    "energy_closure",
    "measurement_energy",
    "isotherm_first_law",
];

pub const OPTIMIZE_HEADER: [&str; 12] = [
    "tau_h_star",
    "tau_h_star_bruteforce",
    "eta_star",
    "eta_star_bruteforce",
    "eta_star_microscopic",
    "p_star",
    "p_star_bruteforce",
    "tau_circ",
    "rel_diff_tau_h_star",
    "rel_diff_eta_star",
    "rel_diff_eta_star_microscopic",
    "rel_diff_p_star",
];

pub const SWEEP_HEADER: [&str; 5] = [
    "tau_fb_over_circ",
    "tau_h_over_circ",
    "power_over_pstar",
    "eta",
    "power",
];

/// Lower end of the brute-force bracket, in units of `τ_h°`.
const BRACKET_LO: f64 = 1.05;
/// Upper end of the brute-force bracket, in units of `τ_h*`.
const BRACKET_HI: f64 = 10.0;

fn rel_diff(value: f64, reference: f64) -> f64 {
    ((value - reference) / reference).abs()
}

/// One ledger row for the configured cycle.
pub fn run_csv(cfg: &ScenarioConfig) -> Result<String, CliError> {
    let cycle = cfg.cycle()?;
    let r = run_cycle(&cycle, cfg.mode, cfg.steps)?;
    let mut header = RUN_HEADER.to_vec();
    let mut row = vec![
        r.delta_s, r.sigma, r.tau_circ, r.w_total, r.w_fb, r.w_wm, r.q_h, r.q_c, r.eta, r.power,
    ];
    if let Some(res) = r.residuals {
        header.extend(RESIDUAL_HEADER);
        row.extend([
            res.state_closure,
            res.reservoir_energy,
            res.work_decomposition,
            res.energy_closure,
            res.measurement_energy,
            res.isotherm_first_law,
        ]);
    }
    let mut table = CsvTable::new(&header);
    table.push(&row);
    Ok(table.into_string())
}

/// Closed-form optimum next to a golden-section search over the
/// fixed-entropy family through the configured frequencies. The file's
/// `tau_h`/`beta_prime` is not used.
pub fn optimize_csv(cfg: &ScenarioConfig) -> Result<String, CliError> {
    let tau_circ =
        qie_core::optimizer::dissipation_time_microscopic(cfg.omega3, cfg.omega4, cfg.a)?;
    let tau_star = optimal_hot_time(tau_circ, cfg.tau_fb);
    let base = cfg.cycle_at(tau_star)?;
    let reference = run_cycle_analytic(&base)?;
    let analytic = analytic_optimum(reference.t_hot, reference.delta_s, tau_circ, cfg.tau_fb)?;
    let micro = eta_star_microscopic(cfg.a, cfg.tau_fb, cfg.omega3, cfg.omega4)?;

    let (mode, steps) = (cfg.mode, cfg.steps);
    let found = brute_force_max_power(
        |t| run_cycle(&base.with_hot_time(t)?, mode, steps),
        (BRACKET_LO * tau_circ, BRACKET_HI * tau_star),
    )?;

    let mut table = CsvTable::new(&OPTIMIZE_HEADER);
    table.push(&[
        analytic.tau_h_star,
        found.tau_h_star,
        analytic.eta_star,
        found.eta_star,
        micro,
        analytic.p_star,
        found.p_star,
        tau_circ,
        rel_diff(found.tau_h_star, analytic.tau_h_star),
        rel_diff(found.eta_star, analytic.eta_star),
        rel_diff(micro, analytic.eta_star),
        rel_diff(found.p_star, analytic.p_star),
    ]);
    Ok(table.into_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub tau_fb_ratios: Vec<f64>,
    pub grid: GridSpec,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            tau_fb_ratios: DEFAULT_TAU_FB_RATIOS.to_vec(),
            grid: DEFAULT_GRID,
        }
    }
}

/// Reduced-power curves, one block per `τ_fb/τ_h°`. Points that cannot be
/// evaluated are written as NaN.
pub fn sweep_csv(cfg: &ScenarioConfig, opts: &SweepOptions) -> Result<String, CliError> {
    let base = cfg.cycle()?;
    let rows = sweep(&base, &opts.tau_fb_ratios, &opts.grid, cfg.mode, cfg.steps)?;
    let mut table = CsvTable::new(&SWEEP_HEADER);
    for r in rows {
        table.push(&[
            r.tau_fb_over_circ,
            r.tau_h_over_circ,
            r.power_over_pstar,
            r.eta,
            r.power,
        ]);
    }
    Ok(table.into_string())
}

/// Writes `text` to `path`, or to stdout when there is none.
pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}
