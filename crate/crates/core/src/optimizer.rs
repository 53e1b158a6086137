//! Maximum-power operation: closed forms, a golden-section oracle over any
//! `τ_h ↦ CycleResult` family, and the reduced-power sweep.

use crate::cycle::{run_cycle_analytic, run_cycle_numeric, CycleConfig, CycleMode, CycleResult};
use crate::error::{ensure_positive, invalid, Error, Result};
use crate::isotherm::dissipation_time_closed_form;

/// `(√5 − 1)/2`.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Default relative tolerance of [`golden_section_max`].
pub const GOLDEN_REL_TOL: f64 = 1e-9;

const GOLDEN_MAX_ITER: usize = 500;

pub const DEFAULT_TAU_FB_RATIOS: [f64; 3] = [0.5, 1.0, 3.0];

pub const DEFAULT_GRID: GridSpec = GridSpec {
    lo: 1.02,
    hi: 20.0,
    n: 400,
};

/// `τ_h° = Σ/ΔS`.
pub fn dissipation_time(sigma: f64, delta_s: f64) -> Result<f64> {
    ensure_positive("sigma", sigma)?;
    ensure_positive("dS", delta_s)?;
    Ok(sigma / delta_s)
}

/// `ln(ω_3/ω_4)/4a`; zero when the isotherm is degenerate.
pub fn dissipation_time_microscopic(omega3: f64, omega4: f64, a: f64) -> Result<f64> {
    ensure_positive("a", a)?;
    ensure_positive("omega4", omega4)?;
    if !(omega3 >= omega4) || !omega3.is_finite() {
        return Err(invalid("requires omega3 >= omega4 > 0"));
    }
    let tau = dissipation_time_closed_form(omega3, omega4, a);
    if !tau.is_finite() {
        return Err(invalid(format!("dissipation time overflows: {tau}")));
    }
    Ok(tau)
}

/// `τ_h* = τ_h°(1 + √(1 + τ_fb/τ_h°))`.
pub fn optimal_hot_time(tau_circ: f64, tau_fb: f64) -> f64 {
    tau_circ * (1.0 + (1.0 + tau_fb / tau_circ).sqrt())
}

/// `η* = 1 − 1/(1 + √(1 + τ_fb/τ_h°))`.
pub fn eta_star(tau_circ: f64, tau_fb: f64) -> f64 {
    1.0 - 1.0 / (1.0 + (1.0 + tau_fb / tau_circ).sqrt())
}

/// `η* = 1 − τ_h°/τ_h*`.
pub fn eta_star_from_optimum(tau_circ: f64, tau_fb: f64) -> f64 {
    1.0 - tau_circ / optimal_hot_time(tau_circ, tau_fb)
}

/// `η* = 1 − 1/(1 + √(1 + 4aτ_fb/ln(ω_3/ω_4)))`.
pub fn eta_star_microscopic(a: f64, tau_fb: f64, omega3: f64, omega4: f64) -> Result<f64> {
    ensure_positive("a", a)?;
    ensure_positive("omega4", omega4)?;
    if !(omega3 > omega4) || !omega3.is_finite() {
        return Err(invalid("requires omega3 > omega4 > 0"));
    }
    if !(tau_fb >= 0.0) {
        return Err(invalid(format!("tau_fb must be >= 0, got {tau_fb}")));
    }
    let ln_ratio = (omega3 / omega4).ln();
    if !ln_ratio.is_finite() {
        return Err(invalid("omega3/omega4 overflows"));
    }
    Ok(1.0 - 1.0 / (1.0 + (1.0 + 4.0 * a * tau_fb / ln_ratio).sqrt()))
}

/// Low-dissipation power `T_hΔS(1 − τ_h°/τ_h)/(τ_h + τ_fb)`.
pub fn analytic_power(t_hot: f64, delta_s: f64, tau_circ: f64, tau_fb: f64, tau_h: f64) -> f64 {
    t_hot * delta_s * (1.0 - tau_circ / tau_h) / (tau_h + tau_fb)
}

/// `P* = η* T_hΔS/(τ_h* + τ_fb)`.
pub fn p_star(t_hot: f64, delta_s: f64, tau_circ: f64, tau_fb: f64) -> f64 {
    eta_star(tau_circ, tau_fb) * t_hot * delta_s / (optimal_hot_time(tau_circ, tau_fb) + tau_fb)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizationMethod {
    Analytic,
    GoldenSection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizationReport {
    pub tau_h_star: f64,
    pub tau_circ: f64,
    pub eta_star: f64,
    pub p_star: f64,
    pub method: OptimizationMethod,
}

/// Closed-form optimum of the low-dissipation power.
pub fn analytic_optimum(
    t_hot: f64,
    delta_s: f64,
    tau_circ: f64,
    tau_fb: f64,
) -> Result<OptimizationReport> {
    ensure_positive("T_h", t_hot)?;
    ensure_positive("dS", delta_s)?;
    ensure_positive("tau_circ", tau_circ)?;
    if !(tau_fb >= 0.0) || !tau_fb.is_finite() {
        return Err(invalid(format!(
            "tau_fb must be finite and >= 0, got {tau_fb}"
        )));
    }
    Ok(OptimizationReport {
        tau_h_star: optimal_hot_time(tau_circ, tau_fb),
        tau_circ,
        eta_star: eta_star(tau_circ, tau_fb),
        p_star: p_star(t_hot, delta_s, tau_circ, tau_fb),
        method: OptimizationMethod::Analytic,
    })
}

/// Maximizes a unimodal `f` on `[lo, hi]` by golden-section search.
///
/// Only comparisons of `f` values are used, so `f` may return any ordered
/// type; an extended-precision objective locates the abscissa below the
/// `√ε` floor of a plain `f64` one. Returns the abscissa and value of the
/// best point. Fails with [`Error::Bracket`] when the maximum sits on a
/// bracket end.
pub fn golden_section_max<F, V>(mut f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<(f64, V)>
where
    F: FnMut(f64) -> Result<V>,
    V: PartialOrd,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(invalid(format!("bracket ({lo}, {hi}) is not an interval")));
    }
    ensure_positive("rel_tol", rel_tol)?;
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;

    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut iter = 0;
    while (b - a) > rel_tol * (c.abs() + d.abs()) && iter < GOLDEN_MAX_ITER {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
        iter += 1;
    }
    let (x, fx) = if fc >= fd { (c, fc) } else { (d, fd) };
    if !(fx > f_lo) || !(fx > f_hi) {
        return Err(Error::Bracket { lo, hi });
    }
    Ok((x, fx))
}

/// Golden-section maximization of the power of a `τ_h ↦ CycleResult`
/// family over `bracket`.
pub fn brute_force_max_power<F>(mut family: F, bracket: (f64, f64)) -> Result<OptimizationReport>
where
    F: FnMut(f64) -> Result<CycleResult>,
{
    let (tau, _) = golden_section_max(
        |t| Ok(family(t)?.power),
        bracket.0,
        bracket.1,
        GOLDEN_REL_TOL,
    )?;
    let best = family(tau)?;
    Ok(OptimizationReport {
        tau_h_star: tau,
        tau_circ: best.tau_circ,
        eta_star: best.eta,
        p_star: best.power,
        method: OptimizationMethod::GoldenSection,
    })
}

/// Evaluates `config` at its own `τ_h` in the given mode.
pub fn run_cycle(config: &CycleConfig, mode: CycleMode, steps: usize) -> Result<CycleResult> {
    match mode {
        CycleMode::Analytic => run_cycle_analytic(config),
        CycleMode::Numeric => run_cycle_numeric(config, steps),
    }
}

/// Inclusive linear grid of `n` points on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
            return Err(invalid(format!("grid needs 0 < lo < hi, got {lo}:{hi}")));
        }
        if n < 2 {
            return Err(invalid(format!("grid needs at least 2 points, got {n}")));
        }
        Ok(GridSpec { lo, hi, n })
    }

    pub fn points(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| {
                if i + 1 == self.n {
                    self.hi
                } else {
                    self.lo + step * i as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub tau_fb_over_circ: f64,
    pub tau_h_over_circ: f64,
    pub power_over_pstar: f64,
    pub eta: f64,
    pub power: f64,
    /// `false` when the point could not be evaluated; the numeric fields are
    /// then NaN.
    pub feasible: bool,
}

/// Reduced power curves of the fixed-entropy family through `base`.
///
/// One block per `τ_fb/τ_h°` ratio (ascending), each over the `τ_h/τ_h°` grid
/// with the optimum `τ_h*/τ_h°` merged in. `P*` is the family's power at
/// `τ_h*`.
pub fn sweep(
    base: &CycleConfig,
    tau_fb_ratios: &[f64],
    grid: &GridSpec,
    mode: CycleMode,
    steps: usize,
) -> Result<Vec<SweepRow>> {
    let mut ratios = tau_fb_ratios.to_vec();
    if ratios.is_empty() {
        return Err(invalid("empty tau_fb list"));
    }
    if let Some(bad) = ratios.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(invalid(format!(
            "tau_fb ratio must be finite and >= 0, got {bad}"
        )));
    }
    ratios.sort_by(f64::total_cmp);
    ratios.dedup();

    let tau_circ = base.tau_circ();
    let grid_points = grid.points();
    let mut rows = Vec::with_capacity(ratios.len() * (grid_points.len() + 1));
    for ratio in ratios {
        let cfg = base.with_feedback_time(ratio * tau_circ)?;
        let x_star = optimal_hot_time(1.0, ratio);
        let p_ref = run_cycle(&cfg.with_hot_time(x_star * tau_circ)?, mode, steps)?.power;

        let mut xs = grid_points.clone();
        if !xs.contains(&x_star) {
            xs.push(x_star);
            xs.sort_by(f64::total_cmp);
        }
        for x in xs {
            let point = cfg
                .with_hot_time(x * tau_circ)
                .and_then(|c| run_cycle(&c, mode, steps));
            rows.push(match point {
                Ok(r) => SweepRow {
                    tau_fb_over_circ: ratio,
                    tau_h_over_circ: x,
                    power_over_pstar: r.power / p_ref,
                    eta: r.eta,
                    power: r.power,
                    feasible: true,
                },
                Err(_) => SweepRow {
                    tau_fb_over_circ: ratio,
                    tau_h_over_circ: x,
                    power_over_pstar: f64::NAN,
                    eta: f64::NAN,
                    power: f64::NAN,
                    feasible: false,
                },
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycle::derive_cycle;
    use crate::isotherm::BathCoupling;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    #[test]
    fn overflowing_frequency_ratio_is_rejected() {
        assert!(eta_star_microscopic(1e308, 1e308, 1e300, 1e-300).is_err());
        assert!(dissipation_time_microscopic(1e300, 1e-300, 1e-308).is_err());
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(optimal_hot_time(1.0, 0.0), 2.0);
        assert_eq!(optimal_hot_time(1.0, 3.0), 3.0);
        assert_eq!(eta_star(1.0, 0.0), 0.5);
        assert_relative_eq!(eta_star(1.0, 3.0), 2.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(
            eta_star(2.0, 2.0),
            1.0 - 1.0 / (1.0 + 2f64.sqrt()),
            epsilon = 1e-15
        );
        assert_relative_eq!(
            eta_star_microscopic(1.0, 1.0, E, 1.0).unwrap(),
            1.0 - 1.0 / (1.0 + 5f64.sqrt()),
            epsilon = 1e-15
        );
        assert_eq!(eta_star_microscopic(0.3, 0.0, 5.0, 2.0).unwrap(), 0.5);
        let ln = (3.0f64 / 1.5).ln();
        assert_relative_eq!(
            eta_star_microscopic(0.5, 3.0 * ln / 2.0, 3.0, 1.5).unwrap(),
            2.0 / 3.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn dissipation_time_examples() {
        assert_relative_eq!(
            dissipation_time_microscopic(E, 1.0, 0.25).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_eq!(dissipation_time_microscopic(1.5, 1.5, 0.25).unwrap(), 0.0);
        assert!(dissipation_time(0.0, 1.0).is_err());
        assert!(dissipation_time(1.0, -1.0).is_err());
        // high-T entropy change and coefficient share β²(ω_3² − ω_4²)/8
        let (b, w3, w4, a): (f64, f64, f64, f64) = (0.01, 2.0, 1.0, 0.25);
        let ds = b * b * (w3 * w3 - w4 * w4) / 8.0;
        let sigma = ds * (w3 / w4).ln() / (4.0 * a);
        assert_relative_eq!(
            dissipation_time(sigma, ds).unwrap(),
            2f64.ln(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn forms_agree() {
        for r in [0.0, 1e-3, 0.5, 1.0, 7.0, 1e4] {
            assert!((eta_star(1.3, 1.3 * r) - eta_star_from_optimum(1.3, 1.3 * r)).abs() < 1e-14);
        }
    }

    #[test]
    fn p_star_is_power_at_optimum() {
        for (tc, tf) in [(1.0, 0.0), (0.7, 2.0), (3.0, 0.1)] {
            let ts = optimal_hot_time(tc, tf);
            assert_relative_eq!(
                p_star(2.0, 0.3, tc, tf),
                analytic_power(2.0, 0.3, tc, tf, ts),
                max_relative = 1e-14
            );
        }
        assert_relative_eq!(p_star(1.0, 1.0, 1.0, 0.0), 0.25, epsilon = 1e-16);
        assert_relative_eq!(
            p_star(4.0, 0.3, 1.2, 0.5),
            2.0 * p_star(2.0, 0.3, 1.2, 0.5),
            max_relative = 1e-15
        );
    }

    #[test]
    fn golden_section_on_parabola() {
        let (x, fx) = golden_section_max(|x| Ok(-(x - 1.7) * (x - 1.7)), 0.0, 5.0, 1e-12).unwrap();
        assert!((x - 1.7).abs() < 1e-7);
        assert!(fx <= 0.0);
    }

    #[test]
    fn golden_section_rejects_monotone() {
        assert!(matches!(
            golden_section_max(Ok::<f64, Error>, 0.0, 1.0, 1e-9),
            Err(Error::Bracket { .. })
        ));
        assert!(golden_section_max(Ok::<f64, Error>, 1.0, 1.0, 1e-9).is_err());
    }

    fn family_base(tau_fb: f64) -> CycleConfig {
        let bath = BathCoupling::new(0.25, -0.3, 1.0).unwrap();
        derive_cycle(1.0, E, 1.0, bath, tau_fb, 2.0).unwrap()
    }

    #[test]
    fn brute_force_analytic_family() {
        let base = family_base(3.0);
        let report = brute_force_max_power(
            |t| base.with_hot_time(t).and_then(|c| run_cycle_analytic(&c)),
            (1.01, 50.0),
        )
        .unwrap();
        assert_relative_eq!(report.tau_h_star, 3.0, max_relative = 1e-6);
        assert_relative_eq!(report.eta_star, 2.0 / 3.0, epsilon = 1e-6);
        assert_relative_eq!(report.tau_circ, 1.0, max_relative = 1e-14);
        assert_eq!(report.method, OptimizationMethod::GoldenSection);
    }

    #[test]
    fn grid_points_inclusive() {
        let g = GridSpec::new(1.0, 2.0, 5).unwrap();
        assert_eq!(g.points(), vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        assert!(GridSpec::new(2.0, 1.0, 5).is_err());
        assert!(GridSpec::new(1.0, 2.0, 1).is_err());
        assert!(GridSpec::new(0.0, 2.0, 3).is_err());
    }

    #[test]
    fn sweep_blocks_peak_at_one() {
        let base = family_base(0.0);
        let rows = sweep(
            &base,
            &[3.0, 0.5, 1.0],
            &DEFAULT_GRID,
            CycleMode::Analytic,
            0,
        )
        .unwrap();
        assert_eq!(rows.len(), 3 * 401);
        for (block, ratio) in rows.chunks(401).zip([0.5, 1.0, 3.0]) {
            assert!(block
                .iter()
                .all(|r| r.tau_fb_over_circ == ratio && r.feasible));
            let best = block
                .iter()
                .max_by(|a, b| a.power_over_pstar.total_cmp(&b.power_over_pstar))
                .unwrap();
            assert!((best.power_over_pstar - 1.0).abs() < 1e-9);
            assert_relative_eq!(best.tau_h_over_circ, optimal_hot_time(1.0, ratio));
            assert!((best.eta - eta_star(1.0, ratio)).abs() < 1e-9);
            assert!(block
                .windows(2)
                .all(|w| w[0].tau_h_over_circ < w[1].tau_h_over_circ));
        }
    }

    #[test]
    fn sweep_flags_infeasible_points() {
        let base = family_base(0.0);
        let grid = GridSpec::new(0.5, 3.0, 6).unwrap();
        let rows = sweep(&base, &[1.0], &grid, CycleMode::Analytic, 0).unwrap();
        assert!(!rows[0].feasible && rows[0].power.is_nan());
        assert!(rows
            .iter()
            .filter(|r| r.tau_h_over_circ > 1.0)
            .all(|r| r.feasible));
    }
}
