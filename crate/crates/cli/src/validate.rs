//! Self-test of the engine: seeded random invariants of every module, one
//! line per check with the worst observed defect.

use std::fmt;

use clap::ValueEnum;
use qie_core::cycle::{derive_cycle_from_beta_prime, run_cycle_analytic, run_cycle_numeric};
use qie_core::isotherm::{
    frequency_schedule, integrate_constant_omega, isotherm_duration_high_t, polarization_rate,
    relax_constant_omega, simulate_isotherm, BathCoupling, IsothermSpec,
};
use qie_core::measurement::{
    apply_measurement, build_measurement, completeness_defect, feedback_target,
    measurement_statistics, GeneralizedMeasurement,
};
use qie_core::optimizer::{
    analytic_power, dissipation_time_microscopic, eta_star, eta_star_from_optimum,
    eta_star_microscopic, golden_section_max, optimal_hot_time,
};
use qie_core::states::{
    effective_beta, energy, entropy, polarization_of, thermal_state, ScaledHamiltonian,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x5eed_0001;

/// Deliberate defects for exercising the failure path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    /// Perturbs one Kraus operator so that completeness fails.
    Cptp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub suite: &'static str,
    pub description: String,
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {} (worst {:.3e}, tol {:.0e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.suite,
            self.description,
            self.worst,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<CheckLine>,
}

impl ValidationReport {
    pub fn failed_suites(&self) -> Vec<&'static str> {
        let mut names: Vec<&'static str> = self
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.suite)
            .collect();
        names.dedup();
        names
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn check(
        &mut self,
        suite: &'static str,
        description: impl Into<String>,
        worst: f64,
        tolerance: f64,
    ) {
        let worst = if worst.is_nan() {
            f64::INFINITY
        } else {
            worst.abs()
        };
        self.checks.push(CheckLine {
            suite,
            description: description.into(),
            worst,
            tolerance,
            passed: worst <= tolerance,
        });
    }

    /// A yes/no invariant, reported as defect 0 or 1.
    fn holds(&mut self, suite: &'static str, description: impl Into<String>, ok: bool) {
        self.check(suite, description, if ok { 0.0 } else { 1.0 }, 0.0);
    }

    /// An invariant that could not even be evaluated.
    fn broken(
        &mut self,
        suite: &'static str,
        description: impl Into<String>,
        err: impl fmt::Display,
    ) {
        self.checks.push(CheckLine {
            suite,
            description: format!("{} [{err}]", description.into()),
            worst: f64::INFINITY,
            tolerance: 0.0,
            passed: false,
        });
    }

    pub fn render(&self) -> String {
        let mut out: String = self.checks.iter().map(|c| format!("{c}\n")).collect();
        let suites = {
            let mut s: Vec<&str> = self.checks.iter().map(|c| c.suite).collect();
            s.dedup();
            s.len()
        };
        if self.passed() {
            out.push_str(&format!(
                "validate: {suites} suites, {} checks passed\n",
                self.checks.len()
            ));
        } else {
            out.push_str(&format!(
                "validate: failing suites: {}\n",
                self.failed_suites().join(", ")
            ));
        }
        out
    }
}

/// `max(worst, |x|)`, turning NaN into infinity so it cannot pass.
fn track(worst: &mut f64, x: f64) {
    *worst = if x.is_nan() {
        f64::INFINITY
    } else {
        worst.max(x.abs())
    };
}

fn s_closed(x: f64) -> f64 {
    (2.0 * (x / 2.0).cosh()).ln() - x / 2.0 * (x / 2.0).tanh()
}

fn e_closed(omega: f64, x: f64) -> f64 {
    -omega / 2.0 * (x / 2.0).tanh()
}

fn states_suite(rep: &mut ValidationReport, rng: &mut ChaCha8Rng) {
    const SUITE: &str = "states";
    let mut worst_closed = 0.0;
    let mut worst_beta = 0.0;
    for _ in 0..1000 {
        let beta: f64 = rng.gen_range(1e-3..30.0);
        let omega: f64 = rng.gen_range(1e-2..5.0);
        let outcome = ScaledHamiltonian::qubit(omega).and_then(|h| {
            let rho = thermal_state(beta, &h)?;
            let x = beta * omega;
            let ds = entropy(&rho)? - s_closed(x);
            let de = energy(&rho, &h)? - e_closed(omega, x);
            Ok(ds.abs().max(de.abs()))
        });
        match outcome {
            Ok(d) => track(&mut worst_closed, d),
            Err(e) => return rep.broken(SUITE, "thermal entropy and energy", e),
        }

        let beta = 10f64.powf(rng.gen_range(-4.0..50f64.log10()));
        let omega = rng.gen_range(0.05..0.2);
        let outcome = ScaledHamiltonian::qubit(omega).and_then(|h| {
            let p = polarization_of(&thermal_state(beta, &h)?, h.spectrum())?;
            Ok(effective_beta(p, omega)?.beta / beta - 1.0)
        });
        match outcome {
            Ok(d) => track(&mut worst_beta, d),
            Err(e) => return rep.broken(SUITE, "effective temperature round trip", e),
        }
    }
    rep.check(
        SUITE,
        "thermal entropy and energy vs closed form over 1000 states",
        worst_closed,
        1e-12,
    );
    rep.check(
        SUITE,
        "effective temperature round trip (relative)",
        worst_beta,
        1e-10,
    );
}

fn random_triple(rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
    let bb: f64 = rng.gen_range(1e-3..10.0);
    let ba = bb * (1.0 + rng.gen_range(0.0..3.0));
    (bb, ba, rng.gen_range(0.05..4.0))
}

/// A copy of `meas` whose first Kraus operator has a shifted entry.
fn perturb_first_kraus(meas: &GeneralizedMeasurement) -> qie_core::Result<GeneralizedMeasurement> {
    let mut ops = meas.kraus_ops().to_vec();
    ops[0][(0, 0)] += 1e-6;
    GeneralizedMeasurement::from_kraus(ops)
}

fn cptp_suite(rep: &mut ValidationReport, rng: &mut ChaCha8Rng, fault: Option<Fault>) {
    const SUITE: &str = "cptp";
    let mut worst = 0.0;
    for _ in 0..1000 {
        let (bb, ba, w) = random_triple(rng);
        let meas: qie_core::Result<GeneralizedMeasurement> =
            build_measurement(bb, ba, w).and_then(|m| {
                if fault == Some(Fault::Cptp) {
                    perturb_first_kraus(&m)
                } else {
                    Ok(m)
                }
            });
        match meas {
            Ok(m) => track(&mut worst, completeness_defect(&m)),
            Err(e) => return rep.broken(SUITE, "completeness", e),
        }
    }
    rep.check(
        SUITE,
        "completeness defect ≤ 1e-12 over 1000 measurements",
        worst,
        1e-12,
    );
}

fn reversibility_suite(rep: &mut ValidationReport, rng: &mut ChaCha8Rng) {
    const SUITE: &str = "reversibility";
    let (mut states, mut entropy_avg, mut energy_avg, mut work) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..1000 {
        let (bb, ba, w) = random_triple(rng);
        let outcome = (|| -> qie_core::Result<[f64; 4]> {
            let meas = build_measurement(bb, ba, w)?;
            let h = ScaledHamiltonian::qubit(w)?;
            let before = thermal_state(bb, &h)?;
            let after = feedback_target(&meas, &h)?;
            let records = apply_measurement(&meas, &before, &h)?;
            let mut d_state = records[0].post_state.max_abs_diff(&after);
            if !records[1].zero_probability {
                d_state = d_state.max(records[1].post_state.max_abs_diff(&after.flipped()));
            }
            let mean_s: f64 = records.iter().map(|r| r.probability * r.post_entropy).sum();
            let stats = measurement_statistics(&meas, &before, &h)?;
            Ok([
                d_state,
                mean_s - s_closed(ba * w),
                stats.avg_energy_change_meas,
                stats.avg_feedback_work - (e_closed(w, bb * w) - e_closed(w, ba * w)),
            ])
        })();
        match outcome {
            Ok([a, b, c, d]) => {
                track(&mut states, a);
                track(&mut entropy_avg, b);
                track(&mut energy_avg, c);
                track(&mut work, d);
            }
            Err(e) => return rep.broken(SUITE, "measurement outcomes", e),
        }
    }
    rep.check(
        SUITE,
        "outcome states equal target and its flip",
        states,
        1e-12,
    );
    rep.check(
        SUITE,
        "mean post-measurement entropy equals target entropy",
        entropy_avg,
        1e-12,
    );
    rep.check(
        SUITE,
        "mean measurement energy change vanishes",
        energy_avg,
        1e-12,
    );
    rep.check(
        SUITE,
        "feedback work equals E_before - E_after",
        work,
        1e-12,
    );
}

fn master_equation_suite(rep: &mut ValidationReport, rng: &mut ChaCha8Rng) {
    const SUITE: &str = "master-equation";
    let (mut relax, mut stationary) = (0.0, 0.0);
    for _ in 0..200 {
        let a = rng.gen_range(0.05..2.0);
        let q = rng.gen_range(-0.95..-0.05);
        let beta_h = rng.gen_range(0.1..2.0);
        let omega = rng.gen_range(0.01..5.0);
        let p0 = rng.gen_range(-0.49..0.49);
        let outcome = BathCoupling::new(a, q, beta_h).and_then(|bath| {
            let t = rng.gen_range(0.0..3.0) / bath.relaxation_rate(omega);
            let d = relax_constant_omega(p0, omega, &bath, t)?
                - integrate_constant_omega(p0, omega, &bath, t)?;
            let p_eq = -(beta_h * omega / 2.0).tanh() / 2.0;
            let residual = polarization_rate(p_eq, omega, &bath) / bath.relaxation_rate(omega);
            Ok((d, residual))
        });
        match outcome {
            Ok((d, r)) => {
                track(&mut relax, d);
                track(&mut stationary, r);
            }
            Err(e) => return rep.broken(SUITE, "constant-frequency relaxation", e),
        }
    }
    rep.check(
        SUITE,
        "closed-form relaxation vs adaptive integration",
        relax,
        1e-9,
    );
    rep.check(
        SUITE,
        "stationary point residual (relative to relaxation rate)",
        stationary,
        1e-15,
    );
}

fn isotherm_suite(rep: &mut ValidationReport) {
    const SUITE: &str = "isotherm";
    let outcome = (|| -> qie_core::Result<(f64, bool, f64)> {
        let bath = BathCoupling::new(0.25, -0.3, 1.0)?;
        let mut last = f64::INFINITY;
        let mut monotone = true;
        for bw3 in [0.1, 0.03, 0.01, 0.003] {
            let spec = IsothermSpec::new(bw3, bw3 / 2.0, 1.2)?;
            let quad = frequency_schedule(&spec, &bath)?.duration();
            let err = (quad / isotherm_duration_high_t(&spec, &bath)? - 1.0).abs();
            monotone &= err < last;
            last = err;
        }
        let spec = IsothermSpec::new(0.01, 0.004, 1.3)?;
        let traj = simulate_isotherm(&spec, &bath, 200)?;
        let mut drift: f64 = 0.0;
        for s in &traj.samples {
            drift = drift
                .max((effective_beta(s.polarization, s.omega)?.beta / spec.beta_prime - 1.0).abs());
        }
        Ok((last, monotone, drift))
    })();
    match outcome {
        Ok((err, monotone, drift)) => {
            rep.check(
                SUITE,
                "high-temperature duration limit at beta_h*omega3 = 0.003",
                err,
                1e-2,
            );
            rep.holds(
                SUITE,
                "duration error shrinks monotonically with temperature",
                monotone,
            );
            rep.check(
                SUITE,
                "effective temperature held along the schedule (relative)",
                drift,
                1e-3,
            );
        }
        Err(e) => rep.broken(SUITE, "high-temperature isotherm", e),
    }
}

fn ledger_suite(rep: &mut ValidationReport) {
    const SUITE: &str = "cycle-ledger";
    let outcome = (|| -> qie_core::Result<_> {
        let bath = BathCoupling::new(0.25, -0.3, 1.0)?;
        let (w3, w4) = (0.01, 0.01 / std::f64::consts::E);
        let cfg = derive_cycle_from_beta_prime(0.003, w3, w4, bath, 1.0, 1.005)?;
        let num = run_cycle_numeric(&cfg, 400)?;
        let ana = run_cycle_analytic(&cfg)?;
        Ok((num, ana))
    })();
    match outcome {
        Ok((num, ana)) => {
            let res = num.residuals.expect("numeric cycles carry residuals");
            rep.check(
                SUITE,
                "final state equals initial state",
                res.state_closure,
                1e-9,
            );
            rep.check(SUITE, "Q_c + W_fb vanishes", res.reservoir_energy, 1e-10);
            rep.check(SUITE, "W_total = W_fb + W_wm", res.work_decomposition, 1e-9);
            rep.holds(
                SUITE,
                "W_total below T_h dS",
                num.w_total < num.t_hot * num.delta_s,
            );
            rep.check(
                SUITE,
                "numeric vs low-dissipation efficiency (relative)",
                num.eta / ana.eta - 1.0,
                2e-2,
            );
        }
        Err(e) => rep.broken(SUITE, "numeric high-temperature cycle", e),
    }
}

fn optimizer_suite(rep: &mut ValidationReport, rng: &mut ChaCha8Rng) {
    const SUITE: &str = "optimizer";
    let (mut tau, mut eta, mut forms) = (0.0, 0.0, 0.0);
    for _ in 0..100 {
        let tc: f64 = rng.gen_range(0.1..10.0);
        let tf = tc * rng.gen_range(0.0..100.0);
        let found = golden_section_max(
            |t| Ok(analytic_power(1.0, 1.0, tc, tf, t)),
            tc * 1.001,
            tc * 1000.0,
            1e-10,
        );
        match found {
            Ok((x, _)) => {
                let ts = optimal_hot_time(tc, tf);
                track(&mut tau, x / ts - 1.0);
                track(&mut eta, (1.0 - tc / x) - eta_star(tc, tf));
                track(&mut forms, eta_star(tc, tf) - eta_star_from_optimum(tc, tf));
            }
            Err(e) => return rep.broken(SUITE, "golden-section search", e),
        }
    }
    let mut micro = 0.0;
    for _ in 0..1000 {
        let a = rng.gen_range(0.01..5.0);
        let tf = rng.gen_range(0.0..100.0);
        let w4 = rng.gen_range(0.1..5.0);
        let w3 = w4 * rng.gen_range(1.01..20.0);
        let d = dissipation_time_microscopic(w3, w4, a)
            .and_then(|tc| Ok(eta_star_microscopic(a, tf, w3, w4)? - eta_star(tc, tf)));
        match d {
            Ok(d) => track(&mut micro, d),
            Err(e) => return rep.broken(SUITE, "microscopic efficiency", e),
        }
    }
    let mut bounded = true;
    let mut last = 0.5;
    for k in 0..=120 {
        let e = eta_star(1.0, 10f64.powf(-6.0 + 0.1 * k as f64));
        bounded &= e > last && e < 1.0;
        last = e;
    }
    rep.check(
        SUITE,
        "optimal hot time: golden section vs closed form (relative)",
        tau,
        1e-6,
    );
    rep.check(
        SUITE,
        "efficiency at the golden-section optimum vs closed form",
        eta,
        1e-7,
    );
    rep.check(
        SUITE,
        "efficiency at maximum power: both closed forms agree",
        forms,
        1e-14,
    );
    rep.check(
        SUITE,
        "microscopic efficiency identity over 1000 parameter sets",
        micro,
        1e-14,
    );
    rep.holds(
        SUITE,
        "1/2 < eta* < 1 and increasing for tau_fb/tau_circ in [1e-6, 1e6]",
        bounded,
    );
}

/// Runs every suite; `fault` injects a known defect.
pub fn run_validation(fault: Option<Fault>) -> ValidationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut rep = ValidationReport::default();
    states_suite(&mut rep, &mut rng);
    cptp_suite(&mut rep, &mut rng, fault);
    reversibility_suite(&mut rep, &mut rng);
    master_equation_suite(&mut rep, &mut rng);
    isotherm_suite(&mut rep);
    ledger_suite(&mut rep);
    optimizer_suite(&mut rep, &mut rng);
    rep
}
