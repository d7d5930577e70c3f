//! Quantum relative-entropy updating of density matrices.
//!
//! The posterior for expectation constraints `Tr(ρ̂Âᵢ) = tᵢ` is
//! `ρ̂ = exp(Σ αᵢÂᵢ + ln φ̂) / Z`. Multipliers are found by minimizing the
//! convex dual `ln Z(α) − α·t`; its gradient is `Tr(ρ̂(α)Âᵢ) − tᵢ` exactly
//! (trace cyclicity removes the Duhamel integral), so only the Hessian is
//! approximated.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::classical::{screen_targets, EntropyVariant};
use crate::dual::{self, DualObjective, SolverOptions, SolverReport};
use crate::error::{Error, Result};
use crate::hermitian::{trace_product, ComplexMatrix, HermitianOperator, SpectralDecomposition};
use crate::scalar::{log_sum_exp, Real};

/// Smallest prior eigenvalue accepted where `ln φ̂` is needed.
pub const FULL_RANK_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;

/// Positive-semidefinite Hermitian operator. The spectrum is computed once at
/// construction and kept alongside the matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    op: HermitianOperator<T>,
    spectrum: SpectralDecomposition<T>,
    trace_tol: T,
    normalized: bool,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(op: HermitianOperator<T>) -> Result<Self> {
        Self::with_trace_tolerance(op, T::tolerance(TRACE_TOL))
    }

    pub fn with_trace_tolerance(op: HermitianOperator<T>, trace_tol: T) -> Result<Self> {
        let spectrum = op.eigh()?;
        let lowest = spectrum.min_eigenvalue();
        if lowest < -T::tolerance(PSD_TOL) {
            return Err(Error::NotPositive {
                eigenvalue: lowest.to_f64_lossy(),
            });
        }
        let normalized = (op.trace() - T::one()).abs() <= trace_tol;
        Ok(Self {
            op,
            spectrum,
            trace_tol,
            normalized,
        })
    }

    /// `U·diag(weights)·U†` with `weights` already known to be nonnegative
    /// and summing to one.
    pub(crate) fn from_normalized_spectrum(unitary: ComplexMatrix<T>, weights: Vec<T>) -> Self {
        let spectrum = SpectralDecomposition {
            eigenvalues: weights,
            unitary,
        };
        let op = spectrum.compose(&spectrum.eigenvalues);
        Self {
            op,
            spectrum,
            trace_tol: T::tolerance(TRACE_TOL),
            normalized: true,
        }
    }

    pub fn from_matrix(matrix: ComplexMatrix<T>) -> Result<Self> {
        Self::new(HermitianOperator::new(matrix)?)
    }

    pub fn from_diagonal(weights: &[T]) -> Result<Self> {
        Self::new(HermitianOperator::from_real_diagonal(weights))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let w = T::one() / T::from_usize(dim).expect("dimension fits scalar");
        Self::from_diagonal(&vec![w; dim]).expect("uniform diagonal is a state")
    }

    pub fn op(&self) -> &HermitianOperator<T> {
        &self.op
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        self.op.matrix()
    }

    pub fn spectrum(&self) -> &SpectralDecomposition<T> {
        &self.spectrum
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn trace(&self) -> T {
        self.op.trace()
    }

    pub fn trace_tol(&self) -> T {
        self.trace_tol
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn is_full_rank(&self) -> bool {
        self.spectrum.min_eigenvalue() > T::tolerance(FULL_RANK_TOL)
    }

    /// Rescaled to unit trace.
    pub fn normalize(&self) -> Result<Self> {
        let tr = self.trace();
        if !(tr > T::zero()) {
            return Err(Error::InvalidArgument("cannot normalize a zero-trace operator".into()));
        }
        let weights = self
            .spectrum
            .eigenvalues
            .iter()
            .map(|&w| (w / tr).max(T::zero()))
            .collect();
        Ok(Self::from_normalized_spectrum(self.spectrum.unitary.clone(), weights))
    }

    /// `ln ρ̂`; rejects any eigenvalue `≤ 1e-12`.
    pub fn ln(&self) -> Result<HermitianOperator<T>> {
        let lowest = self.spectrum.min_eigenvalue();
        let guard = T::tolerance(FULL_RANK_TOL);
        if lowest <= guard {
            return Err(Error::Domain {
                eigenvalue: lowest.to_f64_lossy(),
                bound: guard.to_f64_lossy(),
            });
        }
        Ok(self.spectrum.apply(T::ln))
    }

    /// `Tr(ρ̂ ln ρ̂)` with `0·ln 0 = 0`.
    pub fn trace_rho_ln_rho(&self) -> T {
        self.spectrum
            .eigenvalues
            .iter()
            .filter(|&&p| p > T::zero())
            .map(|&p| p * p.ln())
            .sum()
    }

    pub fn kron(&self, other: &Self) -> Result<Self> {
        Self::new(self.op.kron(&other.op))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.matrix().max_abs_diff(other.matrix())
    }
}

impl<T: Real + Serialize> Serialize for DensityMatrix<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.op.matrix().serialize(serializer)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for DensityMatrix<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let op = HermitianOperator::<T>::deserialize(deserializer)?;
        DensityMatrix::new(op).map_err(serde::de::Error::custom)
    }
}

/// `Tr(ρ̂·observable) = target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct QuantumConstraint<T> {
    pub observable: HermitianOperator<T>,
    pub target: T,
}

impl<T: Real> QuantumConstraint<T> {
    pub fn new(observable: HermitianOperator<T>, target: T) -> Self {
        Self { observable, target }
    }
}

pub type QuantumReport<T> = SolverReport<T, DensityMatrix<T>>;

/// Quantum relative entropy of `rho` with respect to a full-rank `phi`.
/// `Normalized` is the negated Umegaki divergence `−Tr(ρ̂ ln ρ̂ − ρ̂ ln φ̂)`;
/// `Full` adds `Tr ρ̂`.
pub fn quantum_relative_entropy<T: Real>(
    rho: &DensityMatrix<T>,
    phi: &DensityMatrix<T>,
    variant: EntropyVariant,
) -> Result<T> {
    if rho.dim() != phi.dim() {
        return Err(Error::shape(format!("dim {}", phi.dim()), format!("dim {}", rho.dim())));
    }
    let ln_phi = phi.ln()?;
    let cross = trace_product(rho.op(), &ln_phi)?;
    let divergence = rho.trace_rho_ln_rho() - cross;
    Ok(match variant {
        EntropyVariant::Normalized => -divergence,
        EntropyVariant::Full => rho.trace() - divergence,
    })
}

/// `Tr(ρ̂Â)`.
pub fn expectation<T: Real>(rho: &DensityMatrix<T>, observable: &HermitianOperator<T>) -> Result<T> {
    trace_product(rho.op(), observable)
}

/// Spectrum of `Ĉ = Σ αᵢÂᵢ + ln φ̂` and the resulting normalized posterior.
struct ExponentialState<T> {
    unitary: ComplexMatrix<T>,
    weights: Vec<T>,
    log_partition: T,
}

impl<T: Real> ExponentialState<T> {
    /// `ρ̂` as an operator, without building a [`DensityMatrix`].
    fn operator(&self) -> HermitianOperator<T> {
        SpectralDecomposition {
            eigenvalues: self.weights.clone(),
            unitary: self.unitary.clone(),
        }
        .compose(&self.weights)
    }

    fn into_density(self) -> DensityMatrix<T> {
        DensityMatrix::from_normalized_spectrum(self.unitary, self.weights)
    }
}

fn check_observables<T: Real>(dim: usize, observables: &[&HermitianOperator<T>]) -> Result<()> {
    for (i, a) in observables.iter().enumerate() {
        if a.dim() != dim {
            return Err(Error::shape(
                format!("dim {dim}"),
                format!("dim {} for observable {i}", a.dim()),
            ));
        }
    }
    Ok(())
}

fn exponential_state<T: Real>(
    ln_prior: &HermitianOperator<T>,
    observables: &[&HermitianOperator<T>],
    alphas: &[T],
) -> Result<ExponentialState<T>> {
    if observables.len() != alphas.len() {
        return Err(Error::shape(
            format!("{} multipliers", observables.len()),
            format!("{} multipliers", alphas.len()),
        ));
    }
    let mut generator = ln_prior.clone();
    for (a, &alpha) in observables.iter().zip(alphas) {
        generator = generator.add_scaled(alpha, a)?;
    }
    let spectrum = generator.eigh()?;
    let log_partition = log_sum_exp(&spectrum.eigenvalues);
    let weights = spectrum
        .eigenvalues
        .iter()
        .map(|&l| (l - log_partition).exp())
        .collect();
    Ok(ExponentialState {
        unitary: spectrum.unitary,
        weights,
        log_partition,
    })
}

/// `ρ̂ = exp(Σ αᵢÂᵢ + ln φ̂)/Z` together with `Z = Tr exp(Σ αᵢÂᵢ + ln φ̂)`.
pub fn posterior_from_multipliers<T: Real>(
    phi: &DensityMatrix<T>,
    observables: &[HermitianOperator<T>],
    alphas: &[T],
) -> Result<(DensityMatrix<T>, T)> {
    let refs: Vec<&HermitianOperator<T>> = observables.iter().collect();
    check_observables(phi.dim(), &refs)?;
    let state = exponential_state(&phi.ln()?, &refs, alphas)?;
    let z = state.log_partition.exp();
    Ok((state.into_density(), z))
}

/// `ln Tr exp(Σ αᵢÂᵢ + ln φ̂)`.
pub fn log_partition<T: Real>(phi: &DensityMatrix<T>, observables: &[HermitianOperator<T>], alphas: &[T]) -> Result<T> {
    let refs: Vec<&HermitianOperator<T>> = observables.iter().collect();
    check_observables(phi.dim(), &refs)?;
    Ok(exponential_state(&phi.ln()?, &refs, alphas)?.log_partition)
}

struct QuantumDual<'a, T> {
    ln_prior: HermitianOperator<T>,
    observables: Vec<&'a HermitianOperator<T>>,
    targets: Vec<T>,
}

impl<T: Real> DualObjective<T> for QuantumDual<'_, T> {
    fn len(&self) -> usize {
        self.observables.len()
    }

    fn evaluate(&self, alpha: &[T]) -> Result<(T, Vec<T>)> {
        let state = exponential_state(&self.ln_prior, &self.observables, alpha)?;
        let rho = state.operator();
        let gradient = self
            .observables
            .iter()
            .zip(&self.targets)
            .map(|(a, &t)| trace_product(&rho, a).map(|m| m - t))
            .collect::<Result<Vec<T>>>()?;
        let value = state.log_partition - alpha.iter().zip(&self.targets).map(|(&a, &t)| a * t).sum::<T>();
        Ok((value, gradient))
    }

    /// Central differences of the exact gradient, step `1e-5·(‖α‖ + 1)`.
    fn hessian(&self, alpha: &[T], _gradient: &[T]) -> Result<Vec<T>> {
        let m = self.len();
        let norm = alpha.iter().map(|a| a.abs()).fold(T::zero(), T::max);
        let h = T::lit(1e-5) * (norm + T::one());
        let mut columns = Vec::with_capacity(m);
        let mut probe = alpha.to_vec();
        for j in 0..m {
            probe[j] = alpha[j] + h;
            let (_, up) = self.evaluate(&probe)?;
            probe[j] = alpha[j] - h;
            let (_, down) = self.evaluate(&probe)?;
            probe[j] = alpha[j];
            columns.push(
                up.iter()
                    .zip(&down)
                    .map(|(&u, &d)| (u - d) / (h + h))
                    .collect::<Vec<T>>(),
            );
        }
        let mut hess = vec![T::zero(); m * m];
        for i in 0..m {
            for j in 0..m {
                hess[i * m + j] = (columns[j][i] + columns[i][j]) * T::lit(0.5);
            }
        }
        Ok(hess)
    }
}

/// Maximizes the quantum relative entropy relative to a full-rank,
/// normalized `prior` subject to every expectation constraint.
pub fn solve_quantum<T: Real>(
    prior: &DensityMatrix<T>,
    constraints: &[QuantumConstraint<T>],
    options: &SolverOptions<T>,
) -> Result<QuantumReport<T>> {
    if !prior.is_normalized() {
        return Err(Error::InvalidArgument(format!(
            "prior must have unit trace (trace is {})",
            prior.trace()
        )));
    }
    let ln_prior = prior.ln()?;
    let observables: Vec<&HermitianOperator<T>> = constraints.iter().map(|c| &c.observable).collect();
    check_observables(prior.dim(), &observables)?;

    let mut bounds = Vec::with_capacity(constraints.len());
    for a in &observables {
        let s = a.eigh()?;
        bounds.push((s.min_eigenvalue(), s.max_eigenvalue()));
    }
    let targets: Vec<T> = constraints.iter().map(|c| c.target).collect();
    let screened = screen_targets(&bounds, &targets, options.tol)?;

    let dual = QuantumDual {
        ln_prior,
        observables: screened.active.iter().map(|&j| observables[j]).collect(),
        targets: screened.active.iter().map(|&j| targets[j]).collect(),
    };
    let mut outcome = dual::minimize(&dual, options)?;
    if !outcome.converged && dual.len() == 1 {
        let fallback = dual::bisect_single(&dual, options)?;
        outcome = dual::DualOutcome {
            iterations: outcome.iterations + fallback.iterations,
            ..fallback
        };
    }

    let mut multipliers = vec![T::zero(); constraints.len()];
    for (&j, &a) in screened.active.iter().zip(&outcome.alpha) {
        multipliers[j] = a;
    }
    let state = exponential_state(&dual.ln_prior, &dual.observables, &outcome.alpha)?;
    let log_partition = state.log_partition;
    let posterior = state.into_density();
    let residuals = constraints
        .iter()
        .map(|c| expectation(&posterior, &c.observable).map(|m| m - c.target))
        .collect::<Result<Vec<T>>>()?;
    let converged = outcome.converged && residuals.iter().all(|r| r.abs() <= options.tol);

    Ok(SolverReport {
        multipliers,
        partition_value: log_partition.exp(),
        log_partition,
        posterior,
        residuals,
        iterations: outcome.iterations,
        converged,
    })
}
