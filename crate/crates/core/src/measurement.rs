//! Reversible generalized energy measurement of a qubit and the
//! outcome-dependent feedback that maps every outcome onto the same thermal
//! state.
//!
//! With `a = β_b ω_fb` and `b = β_a ω_fb` the Kraus operators are diagonal in
//! the energy basis,
//!
//! ```text
//! M_0 = y |0⟩⟨0| + x |1⟩⟨1|,   M_1 = v |0⟩⟨0| + u |1⟩⟨1|
//! x² = (e^{a+b} − 1)/(e^{2b} − 1)      y² = (1 − e^{−a−b})/(1 − e^{−2b})
//! u² = 1 − x²                          v² = 1 − y²
//! ```
//!
//! so that outcome 0 leaves the state thermal at `β_a` and outcome 1 leaves
//! its spin flip. All entries are real and nonnegative.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{ensure_positive, invalid, Error, Result};
use crate::states::{energy, entropy, thermal_state, DensityMatrix, ScaledHamiltonian};

/// Probabilities below this are treated as outcomes that never occur.
pub const ZERO_PROBABILITY: f64 = 1e-15;
/// Maximum coherence tolerated in the measured state.
pub const COMMUTATION_TOL: f64 = 1e-9;
/// Tolerance used to identify a post-measurement state with a feedback branch.
pub const BRANCH_TOL: f64 = 1e-9;

/// Parameters of the thermal pair the measurement was built for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackContext {
    pub beta_before: f64,
    pub beta_after: f64,
    pub omega_fb: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedMeasurement {
    kraus: Vec<DMatrix<Complex64>>,
    context: Option<FeedbackContext>,
}

impl GeneralizedMeasurement {
    /// Wraps arbitrary square Kraus operators. Completeness is not enforced
    /// here; use [`completeness_defect`] to check it.
    pub fn from_kraus(kraus: Vec<DMatrix<Complex64>>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| invalid("measurement needs at least one Kraus operator"))?;
        let n = first.nrows();
        if n < 2 || kraus.iter().any(|m| m.nrows() != n || m.ncols() != n) {
            return Err(invalid(
                "Kraus operators must be square and of equal dimension",
            ));
        }
        Ok(Self {
            kraus,
            context: None,
        })
    }

    pub fn kraus_ops(&self) -> &[DMatrix<Complex64>] {
        &self.kraus
    }

    pub fn context(&self) -> Option<FeedbackContext> {
        self.context
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].nrows()
    }

    pub fn outcomes(&self) -> usize {
        self.kraus.len()
    }
}

/// Squared diagonal entries `(x², y², u², v²)`, each evaluated in a form free
/// of overflow and cancellation.
fn kraus_weights(a: f64, b: f64) -> (f64, f64, f64, f64) {
    let denom = (-2.0 * b).exp_m1(); // −(1 − e^{−2b})
    let x2 = (a - b).exp() * (-(a + b)).exp_m1() / denom;
    let y2 = (-(a + b)).exp_m1() / denom;
    let u2 = (a - b).exp_m1() / denom;
    let v2 = (-(a + b)).exp() * (a - b).exp_m1() / denom;
    (x2, y2, u2, v2)
}

fn diag2(ground: f64, excited: f64) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(2, 2, Complex64::new(0.0, 0.0));
    m[(0, 0)] = Complex64::new(ground, 0.0);
    m[(1, 1)] = Complex64::new(excited, 0.0);
    m
}

/// Builds the two-outcome measurement that sends `thermal(β_b, ω_fb)` to
/// `thermal(β_a, ω_fb)` (outcome 0) or its spin flip (outcome 1).
///
/// Requires `β_a ≥ β_b`; equality gives the trivial measurement `{I, 0}`.
pub fn build_measurement(
    beta_b: f64,
    beta_a: f64,
    omega_fb: f64,
) -> Result<GeneralizedMeasurement> {
    ensure_positive("beta_b", beta_b)?;
    ensure_positive("beta_a", beta_a)?;
    ensure_positive("omega_fb", omega_fb)?;
    if beta_a < beta_b {
        return Err(invalid(format!(
            "beta_a ({beta_a}) must not be below beta_b ({beta_b}): the measurement must cool the state"
        )));
    }
    let (x2, y2, u2, v2) = kraus_weights(beta_b * omega_fb, beta_a * omega_fb);
    let m0 = diag2(y2.max(0.0).sqrt(), x2.max(0.0).sqrt());
    let m1 = diag2(v2.max(0.0).sqrt(), u2.max(0.0).sqrt());
    Ok(GeneralizedMeasurement {
        kraus: vec![m0, m1],
        context: Some(FeedbackContext {
            beta_before: beta_b,
            beta_after: beta_a,
            omega_fb,
        }),
    })
}

/// `max |Σ M_i†M_i − I|`.
pub fn completeness_defect(meas: &GeneralizedMeasurement) -> f64 {
    let n = meas.dim();
    let mut sum = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for m in meas.kraus_ops() {
        sum += m.adjoint() * m;
    }
    let mut defect = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((sum[(i, j)] - Complex64::new(id, 0.0)).norm());
        }
    }
    defect
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub outcome: usize,
    pub probability: f64,
    pub post_state: DensityMatrix,
    pub post_entropy: f64,
    pub post_energy: f64,
    /// The outcome has probability below [`ZERO_PROBABILITY`]; `post_state`
    /// is then the analytic target for that branch.
    pub zero_probability: bool,
}

/// The state every outcome is mapped to by the feedback, `thermal(β_a)`.
pub fn feedback_target(
    meas: &GeneralizedMeasurement,
    hamiltonian: &ScaledHamiltonian,
) -> Result<DensityMatrix> {
    let ctx = meas
        .context()
        .ok_or_else(|| invalid("measurement carries no feedback target"))?;
    thermal_state(ctx.beta_after, hamiltonian)
}

/// Applies the measurement to a state diagonal in the energy basis and returns
/// one record per outcome.
pub fn apply_measurement(
    meas: &GeneralizedMeasurement,
    rho: &DensityMatrix,
    hamiltonian: &ScaledHamiltonian,
) -> Result<Vec<MeasurementRecord>> {
    if rho.dim() != meas.dim() || hamiltonian.dim() != meas.dim() {
        return Err(invalid(format!(
            "dimension mismatch: state {}, measurement {}, Hamiltonian {}",
            rho.dim(),
            meas.dim(),
            hamiltonian.dim()
        )));
    }
    let off = rho.max_off_diagonal();
    if off > COMMUTATION_TOL {
        return Err(Error::ReversibilityViolation { off_diagonal: off });
    }

    let target = meas
        .context()
        .map(|ctx| thermal_state(ctx.beta_after, hamiltonian))
        .transpose()?;

    let mut records = Vec::with_capacity(meas.outcomes());
    for (outcome, m) in meas.kraus_ops().iter().enumerate() {
        let unnormalised = m * rho.matrix() * m.adjoint();
        let probability = unnormalised.trace().re.max(0.0);
        let (post_state, zero_probability) = if probability < ZERO_PROBABILITY {
            let fallback = match (&target, outcome) {
                (Some(t), 0) => t.clone(),
                (Some(t), _) => t.flipped(),
                (None, _) => rho.clone(),
            };
            (fallback, true)
        } else {
            let post = unnormalised / Complex64::new(probability, 0.0);
            (DensityMatrix::with_tolerance(post, COMMUTATION_TOL)?, false)
        };
        records.push(MeasurementRecord {
            outcome,
            probability,
            post_entropy: entropy(&post_state)?,
            post_energy: energy(&post_state, hamiltonian)?,
            post_state,
            zero_probability,
        });
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackBranch {
    /// Outcome already equals the target.
    Identity,
    /// Populations are reordered (spin flip) and the levels shifted back.
    Reorder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackReport {
    pub final_state: DensityMatrix,
    /// `E_i − E_after`, released when the levels are restored to `H`.
    pub work_extracted: f64,
    pub entropy_change: f64,
    pub branch: FeedbackBranch,
}

/// Maps a measurement outcome onto `target` by a unitary reordering of
/// populations, extracting `E_i − E_after` as work.
pub fn apply_feedback(
    record: &MeasurementRecord,
    target: &DensityMatrix,
    hamiltonian: &ScaledHamiltonian,
) -> Result<FeedbackReport> {
    let branch = if record.post_state.max_abs_diff(target) <= BRANCH_TOL {
        FeedbackBranch::Identity
    } else if record.post_state.flipped().max_abs_diff(target) <= BRANCH_TOL {
        FeedbackBranch::Reorder
    } else {
        return Err(Error::ProtocolMismatch(format!(
            "outcome {} matches neither the target nor its flip",
            record.outcome
        )));
    };
    let e_after = energy(target, hamiltonian)?;
    Ok(FeedbackReport {
        final_state: target.clone(),
        work_extracted: record.post_energy - e_after,
        entropy_change: entropy(target)? - record.post_entropy,
        branch,
    })
}

/// Outcome averages over measurement plus feedback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementStatistics {
    /// `Σ p_i (E_i − E_after)`.
    pub avg_feedback_work: f64,
    /// `Σ p_i S_i − S_before`.
    pub avg_entropy_change: f64,
    /// `Σ p_i E_i − E_before`.
    pub avg_energy_change_meas: f64,
}

pub fn measurement_statistics(
    meas: &GeneralizedMeasurement,
    rho_before: &DensityMatrix,
    hamiltonian: &ScaledHamiltonian,
) -> Result<MeasurementStatistics> {
    let target = feedback_target(meas, hamiltonian)?;
    let records = apply_measurement(meas, rho_before, hamiltonian)?;
    let e_before = energy(rho_before, hamiltonian)?;
    let s_before = entropy(rho_before)?;

    let mut work = 0.0;
    let mut s_avg = 0.0;
    let mut e_avg = 0.0;
    for record in &records {
        let fb = apply_feedback(record, &target, hamiltonian)?;
        work += record.probability * fb.work_extracted;
        s_avg += record.probability * record.post_entropy;
        e_avg += record.probability * record.post_energy;
    }
    Ok(MeasurementStatistics {
        avg_feedback_work: work,
        avg_entropy_change: s_avg - s_before,
        avg_energy_change_meas: e_avg - e_before,
    })
}
