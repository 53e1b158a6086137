//! Dissipative polarization dynamics of a qubit on the hot isotherm.
//!
//! The bath obeys detailed balance with rates `γ_+ = a e^{qβ_hω}` and
//! `γ_− = a e^{(1+q)β_hω}`, which closes the master equation into a scalar
//! ODE for `⟨𝒫⟩`:
//!
//! ```text
//! d⟨𝒫⟩/dt = −a e^{qβ_hω} [2(1 + e^{β_hω})⟨𝒫⟩ + (e^{β_hω} − 1)]
//! ```
//!
//! The frequency schedule `ω_t` of the isotherm is the one that keeps the
//! qubit thermal at a fixed effective inverse temperature `β′ > β_h`. It is
//! tabulated by quadrature of the exact `dt/dω` and inverted by monotone cubic
//! Hermite interpolation.
//!
//! Sign convention: `work_output > 0` is energy delivered by the medium and
//! `heat_absorbed > 0` is energy received from the bath.

use ode_solvers::{Dopri5, OutputType, System, Vector1, Vector3};

use crate::error::{ensure_non_negative, ensure_positive, invalid, Error, Result};
use crate::states::thermal_polarization;

/// Relative tolerance of the adaptive integrator.
pub const RTOL: f64 = 1e-10;
/// Absolute tolerance of the adaptive integrator.
pub const ATOL: f64 = 1e-12;
/// Minimum number of schedule intervals accepted by [`simulate_isotherm`].
pub const MIN_STEPS: usize = 100;
/// Schedule resolution used by [`frequency_schedule`].
pub const DEFAULT_SCHEDULE_INTERVALS: usize = 400;

/// Detailed-balance coupling to the hot bath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathCoupling {
    a: f64,
    q: f64,
    beta_h: f64,
}

impl BathCoupling {
    pub fn new(a: f64, q: f64, beta_h: f64) -> Result<Self> {
        ensure_positive("a", a)?;
        ensure_positive("beta_h", beta_h)?;
        if !(q > -1.0 && q < 0.0) {
            return Err(invalid(format!("q must lie in (-1, 0), got {q}")));
        }
        Ok(Self { a, q, beta_h })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn beta_h(&self) -> f64 {
        self.beta_h
    }

    pub fn temperature(&self) -> f64 {
        1.0 / self.beta_h
    }

    /// Excitation rate.
    pub fn gamma_plus(&self, omega: f64) -> f64 {
        self.a * (self.q * self.beta_h * omega).exp()
    }

    /// Decay rate.
    pub fn gamma_minus(&self, omega: f64) -> f64 {
        self.a * ((1.0 + self.q) * self.beta_h * omega).exp()
    }

    /// Relaxation rate `Γ = 2a e^{qβ_hω}(1 + e^{β_hω})` at fixed frequency.
    pub fn relaxation_rate(&self, omega: f64) -> f64 {
        let y = self.beta_h * omega;
        2.0 * self.a * (self.q * y).exp() * (1.0 + y.exp())
    }

    /// Bath-thermal polarization `−tanh(β_hω/2)/2`.
    pub fn equilibrium_polarization(&self, omega: f64) -> f64 {
        thermal_polarization(self.beta_h * omega)
    }
}

/// Endpoints and effective inverse temperature of the hot isotherm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsothermSpec {
    pub omega_start: f64,
    pub omega_end: f64,
    pub beta_prime: f64,
}

impl IsothermSpec {
    pub fn new(omega_start: f64, omega_end: f64, beta_prime: f64) -> Result<Self> {
        ensure_positive("omega_start", omega_start)?;
        ensure_positive("omega_end", omega_end)?;
        ensure_positive("beta_prime", beta_prime)?;
        if omega_start <= omega_end {
            return Err(invalid(format!(
                "isotherm must lower the frequency: omega_start = {omega_start}, omega_end = {omega_end}"
            )));
        }
        Ok(Self {
            omega_start,
            omega_end,
            beta_prime,
        })
    }

    fn check_against(&self, bath: &BathCoupling) -> Result<()> {
        if self.beta_prime > bath.beta_h() {
            Ok(())
        } else {
            Err(invalid(format!(
                "effective beta ({}) must exceed the bath beta ({}) for heat to flow in",
                self.beta_prime,
                bath.beta_h()
            )))
        }
    }
}

/// Right-hand side of the polarization master equation.
pub fn polarization_rate(polarization: f64, omega: f64, bath: &BathCoupling) -> f64 {
    let y = bath.beta_h * omega;
    -bath.a * (bath.q * y).exp() * (2.0 * (1.0 + y.exp()) * polarization + y.exp_m1())
}

/// Closed-form relaxation at constant frequency.
pub fn relax_constant_omega(p0: f64, omega: f64, bath: &BathCoupling, t: f64) -> Result<f64> {
    ensure_non_negative("t", t)?;
    let p_eq = bath.equilibrium_polarization(omega);
    Ok(p_eq + (p0 - p_eq) * (-bath.relaxation_rate(omega) * t).exp())
}

struct FixedOmegaOde<'a> {
    omega: f64,
    bath: &'a BathCoupling,
}

impl System<f64, Vector1<f64>> for FixedOmegaOde<'_> {
    fn system(&self, _t: f64, y: &Vector1<f64>, dy: &mut Vector1<f64>) {
        dy[0] = polarization_rate(y[0], self.omega, self.bath);
    }
}

/// Adaptive (DOPRI5) integration of the master equation at constant
/// frequency; the numerical counterpart of [`relax_constant_omega`].
pub fn integrate_constant_omega(p0: f64, omega: f64, bath: &BathCoupling, t: f64) -> Result<f64> {
    ensure_non_negative("t", t)?;
    ensure_positive("omega", omega)?;
    if t == 0.0 {
        return Ok(p0);
    }
    let ode = FixedOmegaOde { omega, bath };
    let mut solver = Dopri5::new(ode, 0.0, t, t, Vector1::new(p0), RTOL, ATOL);
    solver.set_output(OutputType::Sparse);
    solver.integrate().map_err(|e| Error::NumericFailure {
        segment: 0,
        t: 0.0,
        reason: e.to_string(),
    })?;
    let (ts, ys) = solver.results().get();
    match (ts.last(), ys.last()) {
        (Some(&t_end), Some(y)) if (t_end - t).abs() <= 1e-12 * t.max(1.0) && y[0].is_finite() => {
            Ok(y[0])
        }
        _ => Err(Error::NumericFailure {
            segment: 0,
            t,
            reason: "integrator stopped early".into(),
        }),
    }
}

/// `ln(ω_3/ω_4) / 4a`: the hot-isotherm duration at which the extracted work
/// vanishes.
pub fn dissipation_time_closed_form(omega3: f64, omega4: f64, a: f64) -> f64 {
    (omega3 / omega4).ln() / (4.0 * a)
}

/// High-temperature duration `ln(ω_3/ω_4) / (4a(1 − β_h/β′))`.
pub fn isotherm_duration_high_t(spec: &IsothermSpec, bath: &BathCoupling) -> Result<f64> {
    spec.check_against(bath)?;
    Ok(
        dissipation_time_closed_form(spec.omega_start, spec.omega_end, bath.a)
            / (1.0 - bath.beta_h / spec.beta_prime),
    )
}

/// Inverts [`isotherm_duration_high_t`] for `β′`.
pub fn beta_prime_for_duration(
    omega3: f64,
    omega4: f64,
    bath: &BathCoupling,
    tau_h: f64,
) -> Result<f64> {
    ensure_positive("omega3", omega3)?;
    ensure_positive("omega4", omega4)?;
    if omega3 <= omega4 {
        return Err(invalid("omega3 must exceed omega4"));
    }
    if tau_h.is_nan() {
        return Err(invalid("tau_h is NaN"));
    }
    let tau_circ = dissipation_time_closed_form(omega3, omega4, bath.a);
    if tau_h <= tau_circ {
        return Err(Error::InfeasibleDuration { tau_h, tau_circ });
    }
    Ok(bath.beta_h / (1.0 - tau_circ / tau_h))
}

/// High-temperature dissipation coefficient of the qubit,
/// `Σ = (β_h²/8)(ω_3² − ω_4²) ln(ω_3/ω_4) / 4a`.
pub fn sigma_coefficient(omega3: f64, omega4: f64, bath: &BathCoupling) -> Result<f64> {
    ensure_positive("omega4", omega4)?;
    if !(omega3 >= omega4) || !omega3.is_finite() {
        return Err(invalid("sigma requires omega3 >= omega4 > 0"));
    }
    let b = bath.beta_h;
    Ok(b * b / 8.0
        * (omega3 * omega3 - omega4 * omega4)
        * dissipation_time_closed_form(omega3, omega4, bath.a))
}

/// Process for [`entropy_change_high_t`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HighTProcess {
    /// Fixed frequency, inverse temperature changes.
    Isochoric {
        omega: f64,
        beta_start: f64,
        beta_end: f64,
    },
    /// Fixed inverse temperature, frequency changes.
    Isothermal {
        beta: f64,
        omega_start: f64,
        omega_end: f64,
    },
}

/// Quadratic high-temperature entropy change `S(end) − S(start)`.
pub fn entropy_change_high_t(
    process: HighTProcess,
    spectrum: &crate::states::PolarizationSpectrum,
) -> f64 {
    let c = spectrum.chi() / spectrum.dim() as f64;
    match process {
        HighTProcess::Isochoric {
            omega,
            beta_start,
            beta_end,
        } => c * omega * omega * (beta_start * beta_start - beta_end * beta_end),
        HighTProcess::Isothermal {
            beta,
            omega_start,
            omega_end,
        } => c * beta * beta * (omega_start * omega_start - omega_end * omega_end),
    }
}

/// Time spent per unit frequency decrease, `−dt/dω > 0`, on a branch held
/// thermal at `β′`. With `x = β′ω`, `ε = β_h/β′` this is `β′` times
/// `1 / (2a e^{qεx} (e^x − e^{εx}) (1 + e^{−x}))`.
fn hot_time_density(omega: f64, beta_prime: f64, bath: &BathCoupling) -> f64 {
    let bh = bath.beta_h * omega;
    beta_prime
        / (2.0
            * bath.a
            * ((1.0 + bath.q) * bh).exp()
            * ((beta_prime - bath.beta_h) * omega).exp_m1()
            * (1.0 + (-beta_prime * omega).exp()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Node {
    t: f64,
    omega: f64,
    /// dω/dt
    slope: f64,
}

/// Tabulated `t ↦ ω_t` holding the effective temperature fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySchedule {
    spec: IsothermSpec,
    nodes: Vec<Node>,
}

impl FrequencySchedule {
    pub fn spec(&self) -> &IsothermSpec {
        &self.spec
    }

    pub fn duration(&self) -> f64 {
        self.nodes.last().map_or(0.0, |n| n.t)
    }

    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Node times, ascending.
    pub fn node_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().map(|n| n.t)
    }

    fn segment(&self, t: f64) -> usize {
        let k = self.nodes.partition_point(|n| n.t <= t);
        k.clamp(1, self.nodes.len() - 1) - 1
    }

    /// Returns `(ω, dω/dt)` at time `t`, clamped to the schedule.
    pub fn evaluate(&self, t: f64) -> (f64, f64) {
        let k = self.segment(t);
        self.evaluate_in(k, t)
    }

    fn evaluate_in(&self, k: usize, t: f64) -> (f64, f64) {
        let (n0, n1) = (self.nodes[k], self.nodes[k + 1]);
        let h = n1.t - n0.t;
        let s = ((t - n0.t) / h).clamp(0.0, 1.0);
        let (s2, s3) = (s * s, s * s * s);
        let omega = (2.0 * s3 - 3.0 * s2 + 1.0) * n0.omega
            + (s3 - 2.0 * s2 + s) * h * n0.slope
            + (-2.0 * s3 + 3.0 * s2) * n1.omega
            + (s3 - s2) * h * n1.slope;
        let rate = ((6.0 * s2 - 6.0 * s) * n0.omega + (-6.0 * s2 + 6.0 * s) * n1.omega) / h
            + (3.0 * s2 - 4.0 * s + 1.0) * n0.slope
            + (3.0 * s2 - 2.0 * s) * n1.slope;
        (omega, rate)
    }

    pub fn omega_at(&self, t: f64) -> f64 {
        self.evaluate(t).0
    }
}

/// Schedule at [`DEFAULT_SCHEDULE_INTERVALS`] resolution.
pub fn frequency_schedule(spec: &IsothermSpec, bath: &BathCoupling) -> Result<FrequencySchedule> {
    frequency_schedule_with_intervals(spec, bath, DEFAULT_SCHEDULE_INTERVALS)
}

/// Tabulates `t(ω)` on a geometric frequency grid from `ω_3` down to `ω_4`.
pub fn frequency_schedule_with_intervals(
    spec: &IsothermSpec,
    bath: &BathCoupling,
    intervals: usize,
) -> Result<FrequencySchedule> {
    spec.check_against(bath)?;
    if intervals == 0 {
        return Err(invalid("schedule needs at least one interval"));
    }
    let density = |w: f64| hot_time_density(w, spec.beta_prime, bath);
    let ratio = spec.omega_end / spec.omega_start;
    let omega_k = |k: usize| {
        if k == intervals {
            spec.omega_end
        } else {
            spec.omega_start * ratio.powf(k as f64 / intervals as f64)
        }
    };

    let mut nodes = Vec::with_capacity(intervals + 1);
    let mut t = 0.0;
    let mut hi = spec.omega_start;
    nodes.push(Node {
        t,
        omega: hi,
        slope: -1.0 / density(hi),
    });
    for k in 1..=intervals {
        let lo = omega_k(k);
        let scale = density(0.5 * (lo + hi)) * (hi - lo);
        let out = quadrature::integrate(density, lo, hi, 1e-15 * scale);
        if !out.integral.is_finite() || out.integral <= 0.0 {
            return Err(Error::NumericFailure {
                segment: k - 1,
                t,
                reason: format!("schedule quadrature returned {}", out.integral),
            });
        }
        t += out.integral;
        nodes.push(Node {
            t,
            omega: lo,
            slope: -1.0 / density(lo),
        });
        hi = lo;
    }

    // Fritsch–Carlson limiter keeps the inverse interpolant monotone.
    for k in 0..intervals {
        let delta = (nodes[k + 1].omega - nodes[k].omega) / (nodes[k + 1].t - nodes[k].t);
        let alpha = nodes[k].slope / delta;
        let beta = nodes[k + 1].slope / delta;
        let r2 = alpha * alpha + beta * beta;
        if r2 > 9.0 {
            let tau = 3.0 / r2.sqrt();
            nodes[k].slope = tau * alpha * delta;
            nodes[k + 1].slope = tau * beta * delta;
        }
    }

    Ok(FrequencySchedule { spec: *spec, nodes })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub omega: f64,
    pub polarization: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub heat_absorbed: f64,
    pub work_output: f64,
}

impl Trajectory {
    pub fn duration(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    pub fn first(&self) -> TrajectorySample {
        self.samples[0]
    }

    pub fn last(&self) -> TrajectorySample {
        *self.samples.last().expect("trajectory has samples")
    }

    /// `ω_end⟨𝒫⟩_end − ω_start⟨𝒫⟩_start`.
    pub fn energy_change(&self) -> f64 {
        let (a, b) = (self.first(), self.last());
        b.omega * b.polarization - a.omega * a.polarization
    }

    /// `heat_absorbed − (ΔE + work_output)`.
    pub fn first_law_residual(&self) -> f64 {
        self.heat_absorbed - (self.energy_change() + self.work_output)
    }
}

/// Polarization, work and heat integrated together along one schedule
/// segment.
struct SegmentOde<'a> {
    schedule: &'a FrequencySchedule,
    segment: usize,
    bath: &'a BathCoupling,
}

impl System<f64, Vector3<f64>> for SegmentOde<'_> {
    fn system(&self, t: f64, y: &Vector3<f64>, dy: &mut Vector3<f64>) {
        let (omega, omega_dot) = self.schedule.evaluate_in(self.segment, t);
        let p = y[0];
        let p_dot = polarization_rate(p, omega, self.bath);
        dy[0] = p_dot;
        dy[1] = -p * omega_dot;
        dy[2] = omega * p_dot;
    }
}

/// Integrates the master equation along the schedule, starting thermal at
/// `β′` on `ω_3`.
pub fn simulate_isotherm(
    spec: &IsothermSpec,
    bath: &BathCoupling,
    steps: usize,
) -> Result<Trajectory> {
    let p0 = thermal_polarization(spec.beta_prime * spec.omega_start);
    simulate_isotherm_from(spec, bath, steps, p0)
}

/// As [`simulate_isotherm`] with an explicit initial polarization.
pub fn simulate_isotherm_from(
    spec: &IsothermSpec,
    bath: &BathCoupling,
    steps: usize,
    p0: f64,
) -> Result<Trajectory> {
    if steps < MIN_STEPS {
        return Err(invalid(format!(
            "steps must be >= {MIN_STEPS}, got {steps}"
        )));
    }
    if !(p0.abs() < 0.5) {
        return Err(invalid(format!(
            "initial polarization {p0} outside (-1/2, 1/2)"
        )));
    }
    let schedule = frequency_schedule_with_intervals(spec, bath, steps)?;
    integrate_schedule(&schedule, bath, p0)
}

/// Runs the master equation along an existing schedule.
pub fn integrate_schedule(
    schedule: &FrequencySchedule,
    bath: &BathCoupling,
    p0: f64,
) -> Result<Trajectory> {
    let nodes = &schedule.nodes;
    let mut samples = Vec::with_capacity(nodes.len());
    samples.push(TrajectorySample {
        t: 0.0,
        omega: nodes[0].omega,
        polarization: p0,
    });
    let mut y = Vector3::new(p0, 0.0, 0.0);
    for k in 0..schedule.intervals() {
        let (t0, t1) = (nodes[k].t, nodes[k + 1].t);
        let ode = SegmentOde {
            schedule,
            segment: k,
            bath,
        };
        let mut solver = Dopri5::new(ode, t0, t1, t1 - t0, y, RTOL, ATOL);
        solver.set_output(OutputType::Sparse);
        solver.integrate().map_err(|e| Error::NumericFailure {
            segment: k,
            t: t0,
            reason: e.to_string(),
        })?;
        let (ts, ys) = solver.results().get();
        match (ts.last(), ys.last()) {
            (Some(&t_end), Some(y_end)) if (t_end - t1).abs() <= 1e-12 * t1.max(1.0) => {
                y = *y_end;
            }
            _ => {
                return Err(Error::NumericFailure {
                    segment: k,
                    t: t0,
                    reason: "integrator stopped before the segment end".into(),
                })
            }
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::NumericFailure {
                segment: k,
                t: t1,
                reason: "non-finite state".into(),
            });
        }
        samples.push(TrajectorySample {
            t: t1,
            omega: nodes[k + 1].omega,
            polarization: y[0],
        });
    }
    Ok(Trajectory {
        samples,
        work_output: y[1],
        heat_absorbed: y[2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn bath() -> BathCoupling {
        BathCoupling::new(0.25, -0.5, 0.5).unwrap()
    }

    #[test]
    fn bath_validation() {
        assert!(BathCoupling::new(0.0, -0.5, 1.0).is_err());
        assert!(BathCoupling::new(1.0, 0.0, 1.0).is_err());
        assert!(BathCoupling::new(1.0, -1.0, 1.0).is_err());
        assert!(BathCoupling::new(1.0, -0.5, -1.0).is_err());
    }

    #[test]
    fn detailed_balance() {
        let b = BathCoupling::new(0.3, -0.2, 1.7).unwrap();
        for w in [0.1, 1.0, 3.0] {
            assert_relative_eq!(
                b.gamma_minus(w) / b.gamma_plus(w),
                (1.7 * w).exp(),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn rate_vanishes_at_equilibrium() {
        let b = bath();
        for w in [0.05, 0.7, 2.0, 4.0] {
            let p = -(0.5 * b.beta_h() * w).tanh() / 2.0;
            assert!(polarization_rate(p, w, &b).abs() <= 1e-15);
        }
        let hot = BathCoupling::new(0.25, -0.5, 1e-9).unwrap();
        assert!(polarization_rate(0.0, 1.0, &hot).abs() < 1e-9);
    }

    #[test]
    fn rate_matches_term_by_term() {
        let (p, w, a, q, bh) = (-0.1_f64, 1.0_f64, 0.25_f64, -0.5_f64, 0.5_f64);
        let b = BathCoupling::new(a, q, bh).unwrap();
        let expected =
            -a * (q * bh * w).exp() * (2.0 * (1.0 + (bh * w).exp()) * p + (bh * w).exp() - 1.0);
        assert_relative_eq!(polarization_rate(p, w, &b), expected, max_relative = 1e-14);
    }

    #[test]
    fn relaxation_endpoints() {
        let b = bath();
        assert_eq!(relax_constant_omega(-0.3, 1.2, &b, 0.0).unwrap(), -0.3);
        assert_relative_eq!(
            relax_constant_omega(-0.3, 1.2, &b, 1e4).unwrap(),
            -(0.5 * 0.5 * 1.2f64).tanh() / 2.0,
            epsilon = 1e-15
        );
        assert!(relax_constant_omega(-0.3, 1.2, &b, -1.0).is_err());
    }

    #[test]
    fn adaptive_relaxation_matches_closed_form() {
        let b = bath();
        for (p0, w, t) in [(0.3, 1.0, 0.5), (-0.45, 0.2, 10.0), (0.0, 3.0, 2.0)] {
            let exact = relax_constant_omega(p0, w, &b, t).unwrap();
            let num = integrate_constant_omega(p0, w, &b, t).unwrap();
            assert!((exact - num).abs() < 1e-10, "{exact} {num}");
        }
        assert_eq!(integrate_constant_omega(0.1, 1.0, &b, 0.0).unwrap(), 0.1);
    }

    #[test]
    fn high_t_duration_examples() {
        let b = bath();
        let e = std::f64::consts::E;
        let spec = IsothermSpec::new(e, 1.0, 1.0).unwrap();
        assert_relative_eq!(
            isotherm_duration_high_t(&spec, &b).unwrap(),
            2.0,
            epsilon = 1e-15
        );
        let cold = IsothermSpec::new(e, 1.0, 1e300).unwrap();
        assert_relative_eq!(
            isotherm_duration_high_t(&cold, &b).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        let bad = IsothermSpec::new(e, 1.0, 0.5).unwrap();
        assert!(isotherm_duration_high_t(&bad, &b).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(IsothermSpec::new(1.0, 2.0, 1.0).is_err());
        assert!(IsothermSpec::new(2.0, 2.0, 1.0).is_err());
        assert!(IsothermSpec::new(2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn beta_prime_inversion() {
        let b = bath();
        let (w3, w4) = (3.0, 1.5);
        let tc = dissipation_time_closed_form(w3, w4, b.a());
        assert_relative_eq!(
            beta_prime_for_duration(w3, w4, &b, 2.0 * tc).unwrap(),
            2.0 * b.beta_h(),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            beta_prime_for_duration(w3, w4, &b, f64::INFINITY).unwrap(),
            b.beta_h()
        );
        let bp = beta_prime_for_duration(w3, w4, &b, 3.7 * tc).unwrap();
        let spec = IsothermSpec::new(w3, w4, bp).unwrap();
        assert_relative_eq!(
            isotherm_duration_high_t(&spec, &b).unwrap(),
            3.7 * tc,
            max_relative = 1e-12
        );
        assert!(matches!(
            beta_prime_for_duration(w3, w4, &b, tc),
            Err(Error::InfeasibleDuration { .. })
        ));
    }

    #[test]
    fn sigma_examples() {
        let b = BathCoupling::new(0.25, -0.5, 0.01).unwrap();
        let s = sigma_coefficient(2.0, 1.0, &b).unwrap();
        assert_relative_eq!(s, 1e-4 / 8.0 * 3.0 * 2f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(s, 2.599_302_5e-5, max_relative = 1e-6);
        assert_eq!(sigma_coefficient(1.5, 1.5, &b).unwrap(), 0.0);
        let ds = entropy_change_high_t(
            HighTProcess::Isothermal {
                beta: 0.01,
                omega_start: 2.0,
                omega_end: 1.0,
            },
            &crate::states::PolarizationSpectrum::qubit(),
        );
        assert_relative_eq!(s / ds, 2f64.ln(), max_relative = 1e-14);
    }

    #[test]
    fn high_t_entropy_changes() {
        use crate::states::{entropy, thermal_state, PolarizationSpectrum, ScaledHamiltonian};
        let q = PolarizationSpectrum::qubit();
        let ds = entropy_change_high_t(
            HighTProcess::Isothermal {
                beta: 0.01,
                omega_start: 2.0,
                omega_end: 1.0,
            },
            &q,
        );
        assert_relative_eq!(ds, 3.75e-5, max_relative = 1e-14);
        let s = |w: f64| {
            entropy(&thermal_state(0.01, &ScaledHamiltonian::qubit(w).unwrap()).unwrap()).unwrap()
        };
        assert!(((s(1.0) - s(2.0)) / ds - 1.0).abs() < 1e-4);
        let zero = entropy_change_high_t(
            HighTProcess::Isochoric {
                omega: 1.0,
                beta_start: 1.0,
                beta_end: 1.0,
            },
            &q,
        );
        assert_eq!(zero, 0.0);
        let iso = entropy_change_high_t(
            HighTProcess::Isothermal {
                beta: 0.3,
                omega_start: 1.0,
                omega_end: 1.0,
            },
            &q,
        );
        assert_eq!(iso, 0.0);
    }

    #[test]
    fn schedule_endpoints_and_monotonicity() {
        let b = bath();
        let spec = IsothermSpec::new(2.0, 1.0, 1.0).unwrap();
        let sched = frequency_schedule(&spec, &b).unwrap();
        assert_eq!(sched.omega_at(0.0), 2.0);
        assert_eq!(sched.omega_at(sched.duration()), 1.0);
        let n = 2000;
        let mut prev = f64::INFINITY;
        for i in 0..=n {
            let (w, rate) = sched.evaluate(sched.duration() * i as f64 / n as f64);
            assert!(w <= prev && rate < 0.0);
            prev = w;
        }
    }

    #[test]
    fn schedule_rejects_hot_effective_temperature() {
        let b = bath();
        let spec = IsothermSpec::new(2.0, 1.0, 0.5).unwrap();
        assert!(frequency_schedule(&spec, &b).is_err());
    }

    #[test]
    fn simulate_requires_enough_steps() {
        let spec = IsothermSpec::new(2.0, 1.0, 1.0).unwrap();
        assert!(simulate_isotherm(&spec, &bath(), 99).is_err());
    }

    #[test]
    fn simulation_follows_effective_temperature() {
        let b = bath();
        let spec = IsothermSpec::new(2.0, 1.0, 1.0).unwrap();
        let traj = simulate_isotherm(&spec, &b, 200).unwrap();
        for s in &traj.samples {
            let target = thermal_polarization(spec.beta_prime * s.omega);
            assert!(
                (s.polarization - target).abs() < 1e-9,
                "{} vs {target}",
                s.polarization
            );
        }
        assert!(traj.first_law_residual().abs() < 1e-10);
        assert!(traj.heat_absorbed > 0.0);
    }
}
