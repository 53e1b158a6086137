//! Thermal states, entropy, energy and polarization for a working medium with
//! a scaling Hamiltonian `H_t = ω_t 𝒫`.
//!
//! Conventions: `k = ħ = 1`, entropies in nats, basis ordered by ascending
//! polarization eigenvalue so that `|0⟩` is the ground state.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{ensure_positive, invalid, Error, Result};

/// Tolerance for states built from closed forms.
pub const STATE_TOL: f64 = 1e-12;
/// Relaxed positivity tolerance for states produced by numerical integration.
pub const NUMERIC_STATE_TOL: f64 = 1e-9;

/// Eigenvalues `λ_n` of the scaled observable `𝒫`, normalised so that
/// `Σ λ_n = 0` and `Σ λ_n² = 2χ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationSpectrum {
    eigenvalues: Vec<f64>,
    chi: f64,
}

impl PolarizationSpectrum {
    /// Builds a spectrum from arbitrary eigenvalues. They are sorted in
    /// ascending order; the sum must vanish.
    pub fn new(mut eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.len() < 2 {
            return Err(invalid("polarization spectrum needs at least two levels"));
        }
        if eigenvalues.iter().any(|l| !l.is_finite()) {
            return Err(invalid("polarization eigenvalues must be finite"));
        }
        eigenvalues.sort_by(f64::total_cmp);
        let sum: f64 = eigenvalues.iter().sum();
        let scale = eigenvalues.iter().fold(1.0_f64, |m, l| m.max(l.abs()));
        if sum.abs() > 1e-12 * scale {
            return Err(invalid(format!(
                "polarization eigenvalues must sum to zero, got {sum:e}"
            )));
        }
        let chi = 0.5 * eigenvalues.iter().map(|l| l * l).sum::<f64>();
        if chi <= 0.0 {
            return Err(invalid(
                "polarization spectrum must not be identically zero",
            ));
        }
        Ok(Self { eigenvalues, chi })
    }

    /// Spin-1/2: `λ = (−1/2, +1/2)`, `χ = 1/4`.
    pub fn qubit() -> Self {
        Self {
            eigenvalues: vec![-0.5, 0.5],
            chi: 0.25,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }
}

/// `H = ω 𝒫` with `ω > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledHamiltonian {
    omega: f64,
    spectrum: PolarizationSpectrum,
}

impl ScaledHamiltonian {
    pub fn new(omega: f64, spectrum: PolarizationSpectrum) -> Result<Self> {
        ensure_positive("omega", omega)?;
        Ok(Self { omega, spectrum })
    }

    pub fn qubit(omega: f64) -> Result<Self> {
        Self::new(omega, PolarizationSpectrum::qubit())
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn spectrum(&self) -> &PolarizationSpectrum {
        &self.spectrum
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    /// Energy eigenvalues `ω λ_n`, ascending.
    pub fn levels(&self) -> Vec<f64> {
        self.spectrum
            .eigenvalues()
            .iter()
            .map(|l| self.omega * l)
            .collect()
    }

    pub fn matrix(&self) -> DMatrix<Complex64> {
        let levels = self.levels();
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            if i == j {
                Complex64::new(levels[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}

/// Hermitian, unit-trace, positive semidefinite `N × N` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates at [`STATE_TOL`].
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        Self::with_tolerance(matrix, STATE_TOL)
    }

    pub fn with_tolerance(matrix: DMatrix<Complex64>, tol: f64) -> Result<Self> {
        let n = matrix.nrows();
        if n < 2 || matrix.ncols() != n {
            return Err(Error::InvalidState(format!(
                "density matrix must be square with dim >= 2, got {}x{}",
                n,
                matrix.ncols()
            )));
        }
        if matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidState("non-finite matrix entry".into()));
        }
        let mut herm = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                herm = herm.max((matrix[(i, j)] - matrix[(j, i)].conj()).norm());
            }
        }
        if herm > tol {
            return Err(Error::InvalidState(format!(
                "not Hermitian (defect {herm:e})"
            )));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > tol || trace.im.abs() > tol {
            return Err(Error::InvalidState(format!("trace {trace} differs from 1")));
        }
        let state = Self { matrix };
        let min_eig = state
            .eigenvalues()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -tol {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(state)
    }

    /// Diagonal state with the given populations (energy basis, ascending).
    pub fn from_populations(populations: &[f64]) -> Result<Self> {
        Self::from_populations_with_tolerance(populations, STATE_TOL)
    }

    pub fn from_populations_with_tolerance(populations: &[f64], tol: f64) -> Result<Self> {
        let n = populations.len();
        let matrix = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(populations[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self::with_tolerance(matrix, tol)
    }

    /// Qubit state with polarization `⟨𝒫⟩ = p`: excited population `1/2 + p`.
    pub fn qubit_from_polarization(p: f64) -> Result<Self> {
        Self::from_populations_with_tolerance(&[0.5 - p, 0.5 + p], NUMERIC_STATE_TOL)
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(invalid("dimension must be >= 2"));
        }
        Self::from_populations(&vec![1.0 / dim as f64; dim])
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    /// Diagonal entries (real parts).
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// Largest off-diagonal modulus.
    pub fn max_off_diagonal(&self) -> f64 {
        let n = self.dim();
        let mut m = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m = m.max(self.matrix[(i, j)].norm());
                }
            }
        }
        m
    }

    /// Eigenvalues; read off the diagonal when the state has no coherences.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.max_off_diagonal() == 0.0 {
            self.populations()
        } else {
            self.matrix
                .clone()
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .collect()
        }
    }

    /// Max-norm distance between two states of equal dimension.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Reverses the order of the energy basis; `σ_x ρ σ_x` for a qubit.
    pub fn flipped(&self) -> DensityMatrix {
        let n = self.dim();
        let matrix = DMatrix::from_fn(n, n, |i, j| self.matrix[(n - 1 - i, n - 1 - j)]);
        DensityMatrix { matrix }
    }
}

/// Gibbs state `e^{−βω𝒫} / Tr e^{−βω𝒫}`.
pub fn thermal_state(beta: f64, hamiltonian: &ScaledHamiltonian) -> Result<DensityMatrix> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(invalid(format!("beta must be finite and >= 0, got {beta}")));
    }
    let levels = hamiltonian.levels();
    let ground = levels[0];
    let weights: Vec<f64> = levels
        .iter()
        .map(|e| (-beta * (e - ground)).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    let populations: Vec<f64> = weights.iter().map(|w| w / z).collect();
    DensityMatrix::from_populations(&populations)
}

/// Von Neumann entropy `−Tr ρ ln ρ` from the eigenvalues, `0 ln 0 := 0`.
pub fn entropy(rho: &DensityMatrix) -> Result<f64> {
    let mut s = 0.0;
    for p in rho.eigenvalues() {
        if p < -NUMERIC_STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {p:e}")));
        }
        if p > 0.0 {
            s -= p * p.ln();
        }
    }
    Ok(s.max(0.0))
}

fn check_dim(rho: &DensityMatrix, dim: usize) -> Result<()> {
    if rho.dim() == dim {
        Ok(())
    } else {
        Err(invalid(format!(
            "dimension mismatch: state is {}, operator is {dim}",
            rho.dim()
        )))
    }
}

/// `Tr ρH`.
pub fn energy(rho: &DensityMatrix, hamiltonian: &ScaledHamiltonian) -> Result<f64> {
    check_dim(rho, hamiltonian.dim())?;
    Ok(hamiltonian.omega() * polarization_of(rho, hamiltonian.spectrum())?)
}

/// `⟨𝒫⟩ = Σ λ_n p_n`.
pub fn polarization_of(rho: &DensityMatrix, spectrum: &PolarizationSpectrum) -> Result<f64> {
    check_dim(rho, spectrum.dim())?;
    Ok(spectrum
        .eigenvalues()
        .iter()
        .zip(rho.populations())
        .map(|(l, p)| l * p)
        .sum())
}

/// Qubit thermal polarization `−tanh(βω/2)/2` as a function of `x = βω`.
pub fn thermal_polarization(beta_omega: f64) -> f64 {
    -0.5 * (0.5 * beta_omega).tanh()
}

/// Effective inverse temperature of a qubit polarization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveBeta {
    pub beta: f64,
    /// Set when `⟨𝒫⟩ > 0`: the excited level is more populated and `beta < 0`.
    pub inverted: bool,
}

/// Inverts `⟨𝒫⟩ = −tanh(β′ω/2)/2`.
pub fn effective_beta(polarization: f64, omega: f64) -> Result<EffectiveBeta> {
    ensure_positive("omega", omega)?;
    if !polarization.is_finite() || polarization.abs() >= 0.5 {
        return Err(invalid(format!(
            "qubit polarization must lie in (-1/2, 1/2), got {polarization}"
        )));
    }
    Ok(EffectiveBeta {
        beta: 2.0 / omega * (-2.0 * polarization).atanh(),
        inverted: polarization > 0.0,
    })
}

/// Leading high-temperature entropy `ln N − β²ω²χ/N`.
///
/// Only meaningful for `|βωλ_n| ≪ 1`; not enforced.
pub fn entropy_high_t(beta: f64, omega: f64, spectrum: &PolarizationSpectrum) -> f64 {
    let n = spectrum.dim() as f64;
    n.ln() - beta * beta * omega * omega * spectrum.chi() / n
}
