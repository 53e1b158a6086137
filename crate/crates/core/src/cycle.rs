//! One cycle of the qubit information engine.
//!
//! Branches, from the working medium's point of view:
//!
//! 1. (1-2) isochore at `ω_fb`: measurement plus feedback take the thermal
//!    state at `β_b` to the thermal state at `β_a`;
//! 2. (2-3) adiabat `ω_fb → ω_3`;
//! 3. (3-4) hot isotherm `ω_3 → ω_4` at effective inverse temperature `β′`;
//! 4. (4-1) adiabat `ω_4 → ω_fb`.
//!
//! `[H_t, H_t′] = 0`, so populations are frozen on the adiabats and
//! `β_b ω_fb = β′ ω_4`, `β_a ω_fb = β′ ω_3`. Adiabats take no time.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{ensure_non_negative, ensure_positive, invalid, Error, Result};
use crate::isotherm::{
    beta_prime_for_duration, dissipation_time_closed_form, isotherm_duration_high_t,
    simulate_isotherm_from, BathCoupling, IsothermSpec,
};
use crate::measurement::{
    apply_feedback, apply_measurement, build_measurement, feedback_target, measurement_statistics,
};
use crate::states::{
    energy, entropy, polarization_of, thermal_state, DensityMatrix, PolarizationSpectrum,
    ScaledHamiltonian, NUMERIC_STATE_TOL,
};

/// Largest ledger residual tolerated by [`run_cycle_numeric`] before it
/// reports a numeric failure.
pub const LEDGER_GUARD: f64 = 1e-6;

/// Fully derived parameters of one cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleConfig {
    omega_fb: f64,
    omega3: f64,
    omega4: f64,
    bath: BathCoupling,
    tau_fb: f64,
    tau_h: f64,
    beta_prime: f64,
    beta_b: f64,
    beta_a: f64,
}

fn check_frequencies(omega_fb: f64, omega3: f64, omega4: f64) -> Result<()> {
    ensure_positive("omega_fb", omega_fb)?;
    ensure_positive("omega3", omega3)?;
    ensure_positive("omega4", omega4)?;
    if omega3 <= omega4 {
        return Err(invalid(format!(
            "omega3 ({omega3}) must exceed omega4 ({omega4})"
        )));
    }
    Ok(())
}

/// Closes the cycle for a given hot-isotherm duration: `β′` from the
/// high-temperature duration formula, `β_b`, `β_a` from adiabatic invariance.
pub fn derive_cycle(
    omega_fb: f64,
    omega3: f64,
    omega4: f64,
    bath: BathCoupling,
    tau_fb: f64,
    tau_h: f64,
) -> Result<CycleConfig> {
    check_frequencies(omega_fb, omega3, omega4)?;
    ensure_non_negative("tau_fb", tau_fb)?;
    let beta_prime = beta_prime_for_duration(omega3, omega4, &bath, tau_h)?;
    Ok(CycleConfig {
        omega_fb,
        omega3,
        omega4,
        bath,
        tau_fb,
        tau_h,
        beta_prime,
        beta_b: beta_prime * omega4 / omega_fb,
        beta_a: beta_prime * omega3 / omega_fb,
    })
}

/// As [`derive_cycle`], parameterised by `β′` instead of `τ_h`.
pub fn derive_cycle_from_beta_prime(
    omega_fb: f64,
    omega3: f64,
    omega4: f64,
    bath: BathCoupling,
    tau_fb: f64,
    beta_prime: f64,
) -> Result<CycleConfig> {
    check_frequencies(omega_fb, omega3, omega4)?;
    ensure_non_negative("tau_fb", tau_fb)?;
    let spec = IsothermSpec::new(omega3, omega4, beta_prime)?;
    let tau_h = isotherm_duration_high_t(&spec, &bath)?;
    Ok(CycleConfig {
        omega_fb,
        omega3,
        omega4,
        bath,
        tau_fb,
        tau_h,
        beta_prime,
        beta_b: beta_prime * omega4 / omega_fb,
        beta_a: beta_prime * omega3 / omega_fb,
    })
}

impl CycleConfig {
    pub fn omega_fb(&self) -> f64 {
        self.omega_fb
    }
    pub fn omega3(&self) -> f64 {
        self.omega3
    }
    pub fn omega4(&self) -> f64 {
        self.omega4
    }
    pub fn bath(&self) -> &BathCoupling {
        &self.bath
    }
    pub fn tau_fb(&self) -> f64 {
        self.tau_fb
    }
    pub fn tau_h(&self) -> f64 {
        self.tau_h
    }
    pub fn beta_prime(&self) -> f64 {
        self.beta_prime
    }
    pub fn beta_b(&self) -> f64 {
        self.beta_b
    }
    pub fn beta_a(&self) -> f64 {
        self.beta_a
    }

    /// `ln(ω_3/ω_4)/4a`.
    pub fn tau_circ(&self) -> f64 {
        dissipation_time_closed_form(self.omega3, self.omega4, self.bath.a())
    }

    pub fn isotherm(&self) -> IsothermSpec {
        IsothermSpec {
            omega_start: self.omega3,
            omega_end: self.omega4,
            beta_prime: self.beta_prime,
        }
    }

    /// Hamiltonian during the measurement isochore.
    pub fn feedback_hamiltonian(&self) -> ScaledHamiltonian {
        ScaledHamiltonian::new(self.omega_fb, PolarizationSpectrum::qubit())
            .expect("omega_fb validated at construction")
    }

    /// The same engine run with a different hot-isotherm duration.
    ///
    /// The measurement (`β_b`, `β_a`, `ω_fb`) and hence the entropy endpoints
    /// of the isotherm are held fixed; `ω_3` and `ω_4` are rescaled by
    /// `β′_old/β′_new` so that `β′ω_3` and `β′ω_4` are unchanged. The ratio
    /// `ω_3/ω_4`, and with it the dissipation time, does not change.
    pub fn with_hot_time(&self, tau_h: f64) -> Result<CycleConfig> {
        let beta_prime = beta_prime_for_duration(self.omega3, self.omega4, &self.bath, tau_h)?;
        let scale = self.beta_prime / beta_prime;
        Ok(CycleConfig {
            omega3: self.omega3 * scale,
            omega4: self.omega4 * scale,
            tau_h,
            beta_prime,
            ..*self
        })
    }

    pub fn with_feedback_time(&self, tau_fb: f64) -> Result<CycleConfig> {
        ensure_non_negative("tau_fb", tau_fb)?;
        Ok(CycleConfig { tau_fb, ..*self })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleMode {
    Analytic,
    Numeric,
}

/// Closure checks of a simulated cycle. All should vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerResiduals {
    /// Max-norm distance between the final and the initial state.
    pub state_closure: f64,
    /// `Q_c + W_fb`: energy exchanged with the information reservoir.
    pub reservoir_energy: f64,
    /// `W_total − (W_fb + W_wm)`.
    pub work_decomposition: f64,
    /// Sum of the energy changes of the medium over the four branches.
    pub energy_closure: f64,
    /// `Σ p_i E_i − E_before`.
    pub measurement_energy: f64,
    /// First-law residual of the isotherm integration.
    pub isotherm_first_law: f64,
}

impl LedgerResiduals {
    pub fn max_abs(&self) -> f64 {
        [
            self.state_closure,
            self.reservoir_energy,
            self.work_decomposition,
            self.energy_closure,
            self.measurement_energy,
            self.isotherm_first_law,
        ]
        .iter()
        .fold(0.0_f64, |m, r| m.max(r.abs()))
    }
}

/// Energy and entropy ledger of one cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleResult {
    pub mode: CycleMode,
    /// Entropy absorbed on the hot isotherm.
    pub delta_s: f64,
    pub sigma: f64,
    /// `Σ/ΔS`.
    pub tau_circ: f64,
    pub w_total: f64,
    pub w_fb: f64,
    pub w_wm: f64,
    pub q_h: f64,
    pub q_c: f64,
    pub eta: f64,
    pub power: f64,
    /// Hot-isotherm duration the power refers to.
    pub tau_h: f64,
    pub tau_fb: f64,
    pub t_hot: f64,
    pub residuals: Option<LedgerResiduals>,
}

fn qubit_entropy_at(beta: f64, hamiltonian: &ScaledHamiltonian) -> Result<(f64, f64)> {
    let rho = thermal_state(beta, hamiltonian)?;
    Ok((entropy(&rho)?, energy(&rho, hamiltonian)?))
}

/// Low-dissipation ledger, `W = T_h(ΔS − Σ/τ_h)`, with exact qubit entropies
/// and `Σ = ΔS · ln(ω_3/ω_4)/4a`.
pub fn run_cycle_analytic(config: &CycleConfig) -> Result<CycleResult> {
    let h_fb = config.feedback_hamiltonian();
    let (s_before, e_before) = qubit_entropy_at(config.beta_b, &h_fb)?;
    let (s_after, e_after) = qubit_entropy_at(config.beta_a, &h_fb)?;
    let delta_s = s_before - s_after;
    if !(delta_s > 0.0) {
        return Err(invalid(format!(
            "entropy change {delta_s:e} vanishes at this temperature"
        )));
    }
    let tau_circ = config.tau_circ();
    let sigma = delta_s * tau_circ;
    let t_hot = config.bath.temperature();
    let w_total = t_hot * (delta_s - sigma / config.tau_h);
    let w_fb = e_before - e_after;
    Ok(CycleResult {
        mode: CycleMode::Analytic,
        delta_s,
        sigma,
        tau_circ,
        w_total,
        w_fb,
        w_wm: w_total - w_fb,
        q_h: w_total,
        q_c: -w_fb,
        eta: 1.0 - sigma / (delta_s * config.tau_h),
        power: w_total / (config.tau_h + config.tau_fb),
        tau_h: config.tau_h,
        tau_fb: config.tau_fb,
        t_hot,
        residuals: None,
    })
}

/// Runs the cycle explicitly: Kraus measurement and feedback on the isochore,
/// frozen populations on the adiabats and the integrated master equation on
/// the isotherm. `steps` is the schedule resolution of the isotherm.
///
/// The power uses the duration of the simulated isotherm, which differs from
/// the configured `τ_h` outside the high-temperature regime.
pub fn run_cycle_numeric(config: &CycleConfig, steps: usize) -> Result<CycleResult> {
    let h_fb = config.feedback_hamiltonian();
    let spectrum = h_fb.spectrum().clone();
    let rho_before = thermal_state(config.beta_b, &h_fb)?;

    // (1-2) measurement and feedback
    let meas = build_measurement(config.beta_b, config.beta_a, config.omega_fb)?;
    let stats = measurement_statistics(&meas, &rho_before, &h_fb)?;
    let target = feedback_target(&meas, &h_fb)?;
    let mut mixed = DMatrix::from_element(2, 2, Complex64::new(0.0, 0.0));
    for record in apply_measurement(&meas, &rho_before, &h_fb)? {
        let fb = apply_feedback(&record, &target, &h_fb)?;
        mixed += fb.final_state.matrix() * Complex64::new(record.probability, 0.0);
    }
    let rho_after = DensityMatrix::with_tolerance(mixed, NUMERIC_STATE_TOL)?;
    let q_c = energy(&rho_after, &h_fb)? - energy(&rho_before, &h_fb)?;
    let w_fb = stats.avg_feedback_work;

    // (2-3) adiabat
    let p2 = polarization_of(&rho_after, &spectrum)?;
    let w_23 = (config.omega_fb - config.omega3) * p2;

    // (3-4) isotherm
    let traj = simulate_isotherm_from(&config.isotherm(), &config.bath, steps, p2)?;
    let p4 = traj.last().polarization;
    let rho_3 = DensityMatrix::qubit_from_polarization(p2)?;
    let rho_4 = DensityMatrix::qubit_from_polarization(p4)?;
    let delta_s = entropy(&rho_4)? - entropy(&rho_3)?;

    // (4-1) adiabat
    let w_41 = (config.omega4 - config.omega_fb) * p4;
    let rho_final = rho_4;

    let q_h = traj.heat_absorbed;
    let w_wm = w_23 + traj.work_output + w_41;
    let w_total = q_h;
    let tau_h = traj.duration();
    let t_hot = config.bath.temperature();
    let sigma = (delta_s - config.bath.beta_h() * q_h) * tau_h;

    let energy_closure = q_c
        + (config.omega3 - config.omega_fb) * p2
        + traj.energy_change()
        + (config.omega_fb - config.omega4) * p4;
    let residuals = LedgerResiduals {
        state_closure: rho_final.max_abs_diff(&rho_before),
        reservoir_energy: q_c + w_fb,
        work_decomposition: w_total - (w_fb + w_wm),
        energy_closure,
        measurement_energy: stats.avg_energy_change_meas,
        isotherm_first_law: traj.first_law_residual(),
    };
    if !(residuals.max_abs() <= LEDGER_GUARD) {
        return Err(Error::NumericFailure {
            segment: traj.samples.len().saturating_sub(2),
            t: tau_h,
            reason: format!("cycle ledger does not close: {residuals:?}"),
        });
    }

    Ok(CycleResult {
        mode: CycleMode::Numeric,
        delta_s,
        sigma,
        tau_circ: sigma / delta_s,
        w_total,
        w_fb,
        w_wm,
        q_h,
        q_c,
        eta: w_total / (t_hot * delta_s),
        power: w_total / (tau_h + config.tau_fb),
        tau_h,
        tau_fb: config.tau_fb,
        t_hot,
        residuals: Some(residuals),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    fn bath(beta_h: f64) -> BathCoupling {
        BathCoupling::new(0.25, -0.3, beta_h).unwrap()
    }

    fn qubit_entropy(x: f64) -> f64 {
        (2.0 * (x / 2.0).cosh()).ln() - x / 2.0 * (x / 2.0).tanh()
    }

    #[test]
    fn derive_reference_cycle() {
        let bh = 0.3;
        let cfg = derive_cycle(1.0, E, 1.0, bath(bh), 0.5, 2.0).unwrap();
        assert_relative_eq!(cfg.tau_circ(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(cfg.beta_prime(), 2.0 * bh, max_relative = 1e-15);
        assert_relative_eq!(cfg.beta_b(), 2.0 * bh, max_relative = 1e-15);
        assert_relative_eq!(cfg.beta_a(), 2.0 * bh * E, max_relative = 1e-15);
    }

    #[test]
    fn long_isotherm_touches_bath_temperature() {
        let cfg = derive_cycle(1.0, 2.0, 1.0, bath(0.4), 0.0, 1e15).unwrap();
        assert_relative_eq!(cfg.beta_b(), 0.4, max_relative = 1e-12);
    }

    #[test]
    fn adiabatic_invariance() {
        let cfg = derive_cycle(0.7, 3.1, 1.3, bath(0.9), 0.2, 9.0).unwrap();
        assert_relative_eq!(
            cfg.beta_b() * cfg.omega_fb(),
            cfg.beta_prime() * cfg.omega4(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            cfg.beta_a() * cfg.omega_fb(),
            cfg.beta_prime() * cfg.omega3(),
            max_relative = 1e-12
        );
        assert!(cfg.beta_a() > cfg.beta_b());
        let s_before = qubit_entropy(cfg.beta_b() * cfg.omega_fb());
        let s_4 = qubit_entropy(cfg.beta_prime() * cfg.omega4());
        assert!((s_before - s_4).abs() < 1e-12);
    }

    #[test]
    fn derive_rejects_invalid() {
        let b = bath(1.0);
        assert!(matches!(
            derive_cycle(1.0, E, 1.0, b, 0.0, 1.0),
            Err(Error::InfeasibleDuration { .. })
        ));
        assert!(derive_cycle(1.0, 1.0, 2.0, b, 0.0, 5.0).is_err());
        assert!(derive_cycle(0.0, 2.0, 1.0, b, 0.0, 5.0).is_err());
        assert!(derive_cycle(1.0, 2.0, 1.0, b, -1.0, 5.0).is_err());
        assert!(derive_cycle_from_beta_prime(1.0, 2.0, 1.0, b, 0.0, 0.5).is_err());
    }

    #[test]
    fn beta_prime_parameterisation_round_trips() {
        let b = bath(0.5);
        let a = derive_cycle(1.0, 2.0, 1.0, b, 0.3, 4.0).unwrap();
        let c = derive_cycle_from_beta_prime(1.0, 2.0, 1.0, b, 0.3, a.beta_prime()).unwrap();
        assert_relative_eq!(c.tau_h(), 4.0, max_relative = 1e-13);
    }

    #[test]
    fn analytic_limits() {
        let b = bath(0.2);
        let cfg = derive_cycle(1.0, E, 1.0, b, 1.0, 2.0).unwrap();
        let r = run_cycle_analytic(&cfg).unwrap();
        assert_relative_eq!(r.eta, 0.5, epsilon = 1e-15);
        assert_relative_eq!(r.w_total, r.w_fb + r.w_wm, epsilon = 1e-16);
        assert_eq!(r.q_c + r.w_fb, 0.0);
        assert_relative_eq!(
            r.w_total,
            r.t_hot * (r.delta_s - r.sigma / r.tau_h),
            epsilon = 1e-18
        );
        assert_relative_eq!(r.power, r.w_total / 3.0, max_relative = 1e-15);

        let edge = cfg.with_hot_time(cfg.tau_circ() * (1.0 + 1e-12)).unwrap();
        let r = run_cycle_analytic(&edge).unwrap();
        assert!(r.eta.abs() < 1e-11 && r.w_total.abs() < 1e-11 * r.t_hot * r.delta_s);

        let far = cfg.with_hot_time(1e9).unwrap();
        assert!(1.0 - run_cycle_analytic(&far).unwrap().eta < 1e-8);
    }

    #[test]
    fn analytic_feedback_work() {
        let cfg = derive_cycle(1.0, 2.0, 1.0, bath(0.5), 0.0, 3.0).unwrap();
        let r = run_cycle_analytic(&cfg).unwrap();
        let w = cfg.omega_fb();
        let expected =
            0.5 * w * ((cfg.beta_a() * w / 2.0).tanh() - (cfg.beta_b() * w / 2.0).tanh());
        assert_relative_eq!(r.w_fb, expected, max_relative = 1e-13);
        assert!(r.w_fb > 0.0);
    }

    #[test]
    fn hot_time_family_keeps_measurement_fixed() {
        let cfg = derive_cycle(0.8, 2.0, 1.0, bath(0.5), 0.7, 3.0).unwrap();
        let other = cfg.with_hot_time(7.5).unwrap();
        assert_relative_eq!(other.beta_b(), cfg.beta_b());
        assert_relative_eq!(other.beta_a(), cfg.beta_a());
        assert_relative_eq!(other.tau_circ(), cfg.tau_circ(), max_relative = 1e-14);
        assert_relative_eq!(
            other.beta_prime() * other.omega3(),
            cfg.beta_prime() * cfg.omega3(),
            max_relative = 1e-14
        );
        assert_eq!(other.tau_h(), 7.5);
        let ra = run_cycle_analytic(&cfg).unwrap();
        let rb = run_cycle_analytic(&other).unwrap();
        assert_relative_eq!(ra.delta_s, rb.delta_s, max_relative = 1e-13);
    }

    #[test]
    fn numeric_cycle_closes() {
        let cfg = derive_cycle(0.5, 2.0, 1.0, bath(0.5), 0.5, 4.0).unwrap();
        let r = run_cycle_numeric(&cfg, 200).unwrap();
        let res = r.residuals.unwrap();
        assert!(res.state_closure < 1e-9, "{res:?}");
        assert!(res.reservoir_energy.abs() < 1e-10, "{res:?}");
        assert!(res.work_decomposition.abs() < 1e-9, "{res:?}");
        assert!(res.measurement_energy.abs() < 1e-10, "{res:?}");
        assert!(r.w_total < r.t_hot * r.delta_s);
        assert!(r.w_total > 0.0);
    }
}
