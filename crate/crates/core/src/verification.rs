//! Executable property checks for the updating machinery.
//!
//! Each check runs the solvers on one instance and reports the worst
//! deviation from the expected behaviour against a threshold.
//! [`run_suite`] draws seeded random instances for all six checks.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::classical::{relative_entropy, solve_classical, ClassicalConstraint, ClassicalDistribution, EntropyVariant};
use crate::dual::SolverOptions;
use crate::error::{Error, Result};
use crate::hermitian::{pauli, HermitianOperator};
use crate::quantum::{expectation, quantum_relative_entropy, solve_quantum, DensityMatrix, QuantumConstraint};
use crate::scalar::Real;

pub const PRIOR_RECOVERY_THRESHOLD: f64 = 1e-10;
pub const SUBSYSTEM_INDEPENDENCE_THRESHOLD: f64 = 1e-8;
pub const COMMUTING_REDUCTION_THRESHOLD: f64 = 1e-9;
pub const ZERO_MULTIPLIER_THRESHOLD: f64 = 1e-8;
pub const LOG_TENSOR_ADDITIVITY_THRESHOLD: f64 = 1e-9;
pub const SUBDOMAIN_INDEPENDENCE_THRESHOLD: f64 = 1e-10;

/// Residual tolerance for the solves run inside checks.
pub const CHECK_SOLVER_TOL: f64 = 1e-12;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub max_deviation: f64,
    pub threshold: f64,
    pub passed: bool,
    pub detail: String,
}

impl PropertyResult {
    pub fn new(name: &str, max_deviation: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            max_deviation,
            threshold,
            passed: max_deviation <= threshold,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prior<T> {
    Classical(ClassicalDistribution<T>),
    Quantum(DensityMatrix<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Constraint<T> {
    Classical(ClassicalConstraint<T>),
    Quantum(QuantumConstraint<T>),
}

fn check_options<T: Real>() -> SolverOptions<T> {
    SolverOptions::with_tol(T::tolerance(CHECK_SOLVER_TOL))
}

fn require_converged<T: Real, P>(report: &crate::dual::SolverReport<T, P>) -> Result<()> {
    if report.converged {
        Ok(())
    } else {
        Err(Error::NotConverged {
            iterations: report.iterations,
            residual: report.max_residual().to_f64_lossy(),
        })
    }
}

/// With no constraints the posterior must equal the normalized prior.
pub fn check_prior_recovery<T: Real>(prior: &Prior<T>, threshold: f64) -> Result<PropertyResult> {
    let options = check_options();
    let (deviation, detail) = match prior {
        Prior::Classical(phi) => {
            let report = solve_classical(phi, &[], &options)?;
            let dev = report.posterior.max_abs_diff(&phi.normalize()?);
            (dev, format!("classical, {} states", phi.len()))
        }
        Prior::Quantum(phi) => {
            let normalized = phi.normalize()?;
            let report = solve_quantum(&normalized, &[], &options)?;
            let dev = report.posterior.max_abs_diff(&normalized);
            (dev, format!("quantum, dim {}", phi.dim()))
        }
    };
    Ok(PropertyResult::new(
        "prior_recovery",
        deviation.to_f64_lossy(),
        threshold,
        detail,
    ))
}

/// Independent subsystems with a product prior must update to the product of
/// the separately updated posteriors.
pub fn check_subsystem_independence<T: Real>(
    prior1: &DensityMatrix<T>,
    prior2: &DensityMatrix<T>,
    cons1: &[QuantumConstraint<T>],
    cons2: &[QuantumConstraint<T>],
    threshold: f64,
) -> Result<PropertyResult> {
    let options = check_options();
    let first = solve_quantum(prior1, cons1, &options)?;
    let second = solve_quantum(prior2, cons2, &options)?;
    require_converged(&first)?;
    require_converged(&second)?;

    let id1 = HermitianOperator::identity(prior1.dim());
    let id2 = HermitianOperator::identity(prior2.dim());
    let joint_constraints: Vec<QuantumConstraint<T>> = cons1
        .iter()
        .map(|c| QuantumConstraint::new(c.observable.kron(&id2), c.target))
        .chain(
            cons2
                .iter()
                .map(|c| QuantumConstraint::new(id1.kron(&c.observable), c.target)),
        )
        .collect();
    let joint = solve_quantum(&prior1.kron(prior2)?, &joint_constraints, &options)?;
    require_converged(&joint)?;

    let product = first.posterior.kron(&second.posterior)?;
    let deviation = joint.posterior.max_abs_diff(&product);
    Ok(PropertyResult::new(
        "subsystem_independence",
        deviation.to_f64_lossy(),
        threshold,
        format!(
            "dims {}x{}, {}+{} constraints",
            prior1.dim(),
            prior2.dim(),
            cons1.len(),
            cons2.len()
        ),
    ))
}

/// Diagonal problems must give the same posterior and entropy through the
/// classical and the quantum solver.
pub fn check_commuting_reduction<T: Real>(
    diag_prior: &[T],
    diag_observables: &[Vec<T>],
    targets: &[T],
    threshold: f64,
) -> Result<PropertyResult> {
    if diag_observables.len() != targets.len() {
        return Err(Error::shape(
            format!("{} targets", diag_observables.len()),
            format!("{} targets", targets.len()),
        ));
    }
    let options = check_options();
    let prior = ClassicalDistribution::new(diag_prior.to_vec())?.normalize()?;
    let classical_constraints: Vec<ClassicalConstraint<T>> = diag_observables
        .iter()
        .zip(targets)
        .map(|(v, &t)| ClassicalConstraint::new(v.clone(), t))
        .collect();
    let classical = solve_classical(&prior, &classical_constraints, &options)?;
    require_converged(&classical)?;

    let quantum_prior = DensityMatrix::from_diagonal(prior.weights())?;
    let quantum_constraints: Vec<QuantumConstraint<T>> = diag_observables
        .iter()
        .zip(targets)
        .map(|(v, &t)| QuantumConstraint::new(HermitianOperator::from_real_diagonal(v), t))
        .collect();
    let quantum = solve_quantum(&quantum_prior, &quantum_constraints, &options)?;
    require_converged(&quantum)?;

    let as_matrix = HermitianOperator::from_real_diagonal(classical.posterior.weights());
    let posterior_gap = quantum.posterior.matrix().max_abs_diff(as_matrix.matrix());
    let s_classical = relative_entropy(&classical.posterior, &prior, EntropyVariant::Normalized)?;
    let s_quantum = quantum_relative_entropy(&quantum.posterior, &quantum_prior, EntropyVariant::Normalized)?;
    let entropy_gap = (s_classical - s_quantum).abs();
    Ok(PropertyResult::new(
        "commuting_reduction",
        posterior_gap.max(entropy_gap).to_f64_lossy(),
        threshold,
        format!(
            "{} states, {} constraints; posterior gap {:e}, entropy gap {:e}",
            prior.len(),
            targets.len(),
            posterior_gap.to_f64_lossy(),
            entropy_gap.to_f64_lossy()
        ),
    ))
}

/// A constraint the prior already satisfies must get a zero multiplier.
pub fn check_zero_multiplier<T: Real>(
    prior: &Prior<T>,
    constraint: &Constraint<T>,
    threshold: f64,
) -> Result<PropertyResult> {
    let options = check_options();
    let (alpha, detail) = match (prior, constraint) {
        (Prior::Classical(phi), Constraint::Classical(c)) => {
            let report = solve_classical(phi, std::slice::from_ref(c), &options)?;
            require_converged(&report)?;
            (report.multipliers[0], format!("classical, {} states", phi.len()))
        }
        (Prior::Quantum(phi), Constraint::Quantum(c)) => {
            let report = solve_quantum(phi, std::slice::from_ref(c), &options)?;
            require_converged(&report)?;
            (report.multipliers[0], format!("quantum, dim {}", phi.dim()))
        }
        _ => {
            return Err(Error::InvalidArgument(
                "prior and constraint must both be classical or both quantum".into(),
            ))
        }
    };
    Ok(PropertyResult::new(
        "zero_multiplier",
        alpha.abs().to_f64_lossy(),
        threshold,
        detail,
    ))
}

/// `−(ln ρ̂ − ln φ̂)` for full-rank states.
fn log_ratio<T: Real>(rho: &DensityMatrix<T>, phi: &DensityMatrix<T>) -> Result<HermitianOperator<T>> {
    phi.ln()?.sub(&rho.ln()?)
}

/// The solution `−(ln ρ̂ − ln φ̂)` of the composition functional equation is
/// additive over tensor products:
/// `f(ρ̂₁⊗ρ̂₂, φ̂₁⊗φ̂₂) = f(ρ̂₁, φ̂₁)⊗1 + 1⊗f(ρ̂₂, φ̂₂)`.
pub fn check_log_tensor_additivity<T: Real>(
    rho1: &DensityMatrix<T>,
    phi1: &DensityMatrix<T>,
    rho2: &DensityMatrix<T>,
    phi2: &DensityMatrix<T>,
    threshold: f64,
) -> Result<PropertyResult> {
    let lhs = log_ratio(&rho1.kron(rho2)?, &phi1.kron(phi2)?)?;
    let id1 = HermitianOperator::identity(rho1.dim());
    let id2 = HermitianOperator::identity(rho2.dim());
    let rhs = log_ratio(rho1, phi1)?
        .kron(&id2)
        .add(&id1.kron(&log_ratio(rho2, phi2)?))?;
    let deviation = lhs.matrix().max_abs_diff(rhs.matrix());
    Ok(PropertyResult::new(
        "log_tensor_additivity",
        deviation.to_f64_lossy(),
        threshold,
        format!("dims {}x{}", rho1.dim(), rho2.dim()),
    ))
}

/// Information about a subdomain `D` (its total mass plus an optional
/// expectation supported on `D`) must leave the conditional distribution on
/// the complement untouched.
pub fn check_subdomain_independence<T: Real>(
    prior: &ClassicalDistribution<T>,
    domain_mask: &[bool],
    domain_mass: T,
    local_constraint: Option<&ClassicalConstraint<T>>,
    threshold: f64,
) -> Result<PropertyResult> {
    let n = prior.len();
    if domain_mask.len() != n {
        return Err(Error::shape(
            format!("{n} mask entries"),
            format!("{}", domain_mask.len()),
        ));
    }
    if domain_mask.iter().all(|&m| m) || domain_mask.iter().all(|&m| !m) {
        return Err(Error::InvalidArgument(
            "domain and its complement must both be nonempty".into(),
        ));
    }
    let indicator: Vec<T> = domain_mask
        .iter()
        .map(|&m| if m { T::one() } else { T::zero() })
        .collect();
    let mut constraints = vec![ClassicalConstraint::new(indicator, domain_mass)];
    if let Some(local) = local_constraint {
        let leaks = local
            .values
            .iter()
            .zip(domain_mask)
            .any(|(&v, &inside)| !inside && v != T::zero());
        if leaks {
            return Err(Error::InvalidArgument(
                "local constraint must vanish outside the domain".into(),
            ));
        }
        constraints.push(local.clone());
    }
    let report = solve_classical(prior, &constraints, &check_options())?;
    require_converged(&report)?;

    let outside = |w: &[T]| -> T {
        w.iter()
            .zip(domain_mask)
            .filter(|(_, &inside)| !inside)
            .map(|(&v, _)| v)
            .sum()
    };
    let posterior = report.posterior.weights();
    let (post_out, prior_out) = (outside(posterior), outside(prior.weights()));
    let deviation = posterior
        .iter()
        .zip(prior.weights())
        .zip(domain_mask)
        .filter(|(_, &inside)| !inside)
        .map(|((&p, &q), _)| (p / post_out - q / prior_out).abs())
        .fold(T::zero(), T::max);
    Ok(PropertyResult::new(
        "subdomain_independence",
        deviation.to_f64_lossy(),
        threshold,
        format!("{n} states, |D| = {}", domain_mask.iter().filter(|&&m| m).count()),
    ))
}

/// Seeded random instances.
pub mod random {
    use num_complex::Complex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::classical::ClassicalDistribution;
    use crate::hermitian::{ComplexMatrix, HermitianOperator};
    use crate::quantum::DensityMatrix;

    pub fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Hermitian matrix with entries uniform in `[−scale, scale]`.
    pub fn hermitian<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> HermitianOperator<f64> {
        let mut m = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex::new(rng.random_range(-scale..=scale), 0.0));
            for j in i + 1..dim {
                let z = Complex::new(rng.random_range(-scale..=scale), rng.random_range(-scale..=scale));
                m.set(i, j, z);
                m.set(j, i, z.conj());
            }
        }
        HermitianOperator::new(m).expect("constructed Hermitian")
    }

    /// Full-rank state `exp(H)/Tr exp(H)` for a random Hermitian `H`.
    pub fn density_matrix<R: Rng>(rng: &mut R, dim: usize) -> DensityMatrix<f64> {
        let generator = hermitian(rng, dim, 1.0);
        let spectrum = generator.eigh().expect("small Hermitian diagonalizes");
        let weights: Vec<f64> = spectrum.eigenvalues.iter().map(|l| l.exp()).collect();
        let total: f64 = weights.iter().sum();
        let weights = weights.iter().map(|w| w / total).collect();
        DensityMatrix::from_normalized_spectrum(spectrum.unitary, weights)
    }

    /// Normalized weights drawn uniformly from `[0.05, 1]` before scaling.
    pub fn distribution<R: Rng>(rng: &mut R, n: usize) -> ClassicalDistribution<f64> {
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..=1.0)).collect();
        ClassicalDistribution::new(w)
            .and_then(|d| d.normalize())
            .expect("positive weights")
    }

    pub fn values<R: Rng>(rng: &mut R, n: usize, scale: f64) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-scale..=scale)).collect()
    }
}

/// Worst result over the trials of one check.
struct Aggregate {
    name: &'static str,
    threshold: f64,
    worst: f64,
    worst_trial: usize,
    failure: Option<String>,
}

impl Aggregate {
    fn new(name: &'static str, threshold: f64) -> Self {
        Self {
            name,
            threshold,
            worst: 0.0,
            worst_trial: 0,
            failure: None,
        }
    }

    fn record(&mut self, trial: usize, outcome: Result<PropertyResult>) {
        match outcome {
            Ok(r) => {
                if r.max_deviation > self.worst || r.max_deviation.is_nan() {
                    self.worst = r.max_deviation;
                    self.worst_trial = trial;
                }
                if !r.passed && self.failure.is_none() {
                    self.failure = Some(format!("trial {trial} failed: {}", r.detail));
                }
            }
            Err(e) => {
                self.worst = f64::INFINITY;
                self.worst_trial = trial;
                if self.failure.is_none() {
                    self.failure = Some(format!("trial {trial} errored: {e}"));
                }
            }
        }
    }

    fn finish(self, seed: u64, trials: usize) -> PropertyResult {
        let mut detail = format!("seed {seed}, {trials} trials, worst trial {}", self.worst_trial);
        if let Some(f) = &self.failure {
            detail.push_str("; ");
            detail.push_str(f);
        }
        let mut result = PropertyResult::new(self.name, self.worst, self.threshold, detail);
        result.passed &= self.failure.is_none();
        result
    }
}

/// Target for an observable: its expectation in a random full-rank state,
/// which lies strictly inside the observable's spectrum.
fn random_quantum_target(rng: &mut ChaCha8Rng, observable: &HermitianOperator<f64>) -> f64 {
    let state = random::density_matrix(rng, observable.dim());
    expectation(&state, observable).expect("matching dims")
}

fn complete_qubit_basis(rng: &mut ChaCha8Rng) -> Vec<QuantumConstraint<f64>> {
    let target_state = random::density_matrix(rng, 2);
    [pauli::identity(), pauli::sigma_x(), pauli::sigma_y(), pauli::sigma_z()]
        .into_iter()
        .map(|op| {
            let t = expectation(&target_state, &op).expect("2x2");
            QuantumConstraint::new(op, t)
        })
        .collect()
}

fn single_random_qubit_constraint(rng: &mut ChaCha8Rng) -> Vec<QuantumConstraint<f64>> {
    let op = random::hermitian(rng, 2, 1.0);
    let t = random_quantum_target(rng, &op);
    vec![QuantumConstraint::new(op, t)]
}

/// Random diagonal problem whose targets are expectations under a random
/// positive distribution (so they are jointly feasible).
pub fn random_commuting_instance(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) {
    let n = rng.random_range(2..=8);
    let m = rng.random_range(1..=2.min(n - 1));
    let prior = random::distribution(rng, n).weights().to_vec();
    let witness = random::distribution(rng, n);
    let observables: Vec<Vec<f64>> = (0..m).map(|_| random::values(rng, n, 2.0)).collect();
    let targets = observables
        .iter()
        .map(|v| witness.expectation(v).expect("lengths match"))
        .collect();
    (prior, observables, targets)
}

/// Runs every property check on `trials` seeded random instances and returns
/// one aggregated result per check.
pub fn run_suite(seed: u64, trials: usize) -> Vec<PropertyResult> {
    let mut rng = random::rng(seed);
    let mut prior_recovery = Aggregate::new("prior_recovery", PRIOR_RECOVERY_THRESHOLD);
    let mut subsystem = Aggregate::new("subsystem_independence", SUBSYSTEM_INDEPENDENCE_THRESHOLD);
    let mut commuting = Aggregate::new("commuting_reduction", COMMUTING_REDUCTION_THRESHOLD);
    let mut zero = Aggregate::new("zero_multiplier", ZERO_MULTIPLIER_THRESHOLD);
    let mut additivity = Aggregate::new("log_tensor_additivity", LOG_TENSOR_ADDITIVITY_THRESHOLD);
    let mut subdomain = Aggregate::new("subdomain_independence", SUBDOMAIN_INDEPENDENCE_THRESHOLD);

    for trial in 0..trials {
        let n = rng.random_range(2..=8);
        let classical = Prior::Classical(random::distribution(&mut rng, n));
        prior_recovery.record(trial, check_prior_recovery(&classical, PRIOR_RECOVERY_THRESHOLD));
        let dim = rng.random_range(2..=4);
        let quantum = Prior::Quantum(random::density_matrix(&mut rng, dim));
        prior_recovery.record(trial, check_prior_recovery(&quantum, PRIOR_RECOVERY_THRESHOLD));

        let p1 = random::density_matrix(&mut rng, 2);
        let p2 = random::density_matrix(&mut rng, 2);
        let (c1, c2) = if trial % 2 == 0 {
            (complete_qubit_basis(&mut rng), complete_qubit_basis(&mut rng))
        } else {
            (
                single_random_qubit_constraint(&mut rng),
                single_random_qubit_constraint(&mut rng),
            )
        };
        subsystem.record(
            trial,
            check_subsystem_independence(&p1, &p2, &c1, &c2, SUBSYSTEM_INDEPENDENCE_THRESHOLD),
        );

        let (prior, observables, targets) = random_commuting_instance(&mut rng);
        commuting.record(
            trial,
            check_commuting_reduction(&prior, &observables, &targets, COMMUTING_REDUCTION_THRESHOLD),
        );

        let n = rng.random_range(2..=8);
        let phi = random::distribution(&mut rng, n);
        let values = random::values(&mut rng, n, 2.0);
        let target = phi.expectation(&values).expect("lengths match");
        zero.record(
            trial,
            check_zero_multiplier(
                &Prior::Classical(phi),
                &Constraint::Classical(ClassicalConstraint::new(values, target)),
                ZERO_MULTIPLIER_THRESHOLD,
            ),
        );
        let dim = rng.random_range(2..=4);
        let phi = random::density_matrix(&mut rng, dim);
        let op = random::hermitian(&mut rng, dim, 1.0);
        let target = expectation(&phi, &op).expect("matching dims");
        zero.record(
            trial,
            check_zero_multiplier(
                &Prior::Quantum(phi),
                &Constraint::Quantum(QuantumConstraint::new(op, target)),
                ZERO_MULTIPLIER_THRESHOLD,
            ),
        );

        let quad: Vec<DensityMatrix<f64>> = (0..4).map(|_| random::density_matrix(&mut rng, 2)).collect();
        additivity.record(
            trial,
            check_log_tensor_additivity(&quad[0], &quad[1], &quad[2], &quad[3], LOG_TENSOR_ADDITIVITY_THRESHOLD),
        );

        let (prior, mask, mass, local) = random_subdomain_instance(&mut rng);
        subdomain.record(
            trial,
            check_subdomain_independence(&prior, &mask, mass, Some(&local), SUBDOMAIN_INDEPENDENCE_THRESHOLD),
        );
    }

    [prior_recovery, subsystem, commuting, zero, additivity, subdomain]
        .into_iter()
        .map(|a| a.finish(seed, trials))
        .collect()
}

/// Random prior, domain of at least two states with a nonempty complement,
/// domain mass, and a local constraint whose conditional mean lies strictly
/// inside its range on the domain.
pub fn random_subdomain_instance(
    rng: &mut ChaCha8Rng,
) -> (ClassicalDistribution<f64>, Vec<bool>, f64, ClassicalConstraint<f64>) {
    let n = rng.random_range(3..=8);
    let prior = random::distribution(rng, n);
    let mut mask = vec![false; n];
    let inside = rng.random_range(2..n);
    let mut order: Vec<usize> = (0..n).collect();
    for i in 0..inside {
        let j = rng.random_range(i..n);
        order.swap(i, j);
        mask[order[i]] = true;
    }
    let mass = rng.random_range(0.1..=0.9);
    let values: Vec<f64> = mask
        .iter()
        .map(|&m| if m { rng.random_range(-2.0..=2.0) } else { 0.0 })
        .collect();
    let (lo, hi) = values
        .iter()
        .zip(&mask)
        .filter(|(_, &m)| m)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (&v, _)| {
            (lo.min(v), hi.max(v))
        });
    let conditional_mean = lo + (hi - lo) * rng.random_range(0.1..=0.9);
    (
        prior,
        mask,
        mass,
        ClassicalConstraint::new(values, mass * conditional_mean),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prior_recovery_examples() {
        let uniform = Prior::Classical(ClassicalDistribution::<f64>::uniform(5));
        let r = check_prior_recovery(&uniform, PRIOR_RECOVERY_THRESHOLD).unwrap();
        assert!(r.passed);
        assert_eq!(r.max_deviation, 0.0);
        let quantum = Prior::Quantum(DensityMatrix::from_diagonal(&[0.3, 0.7]).unwrap());
        let r = check_prior_recovery(&quantum, PRIOR_RECOVERY_THRESHOLD).unwrap();
        assert!(r.max_deviation <= 1e-12);
    }

    #[test]
    fn subsystem_independence_without_constraints() {
        let p1 = DensityMatrix::from_diagonal(&[0.3, 0.7]).unwrap();
        let p2 = DensityMatrix::from_diagonal(&[0.6, 0.4]).unwrap();
        let r = check_subsystem_independence(&p1, &p2, &[], &[], SUBSYSTEM_INDEPENDENCE_THRESHOLD).unwrap();
        assert!(r.max_deviation <= 1e-12);
    }

    #[test]
    fn subsystem_independence_sigma_z_marginals() {
        let half = DensityMatrix::<f64>::maximally_mixed(2);
        let c1 = [QuantumConstraint::new(pauli::sigma_z(), 0.3)];
        let c2 = [QuantumConstraint::new(pauli::sigma_z(), -0.2)];
        let r = check_subsystem_independence(&half, &half, &c1, &c2, SUBSYSTEM_INDEPENDENCE_THRESHOLD).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn commuting_reduction_examples() {
        let r = check_commuting_reduction(&[1.0], &[vec![3.0]], &[3.0], COMMUTING_REDUCTION_THRESHOLD).unwrap();
        assert_eq!(r.max_deviation, 0.0);
        let r = check_commuting_reduction(
            &[1.0, 1.0, 1.0],
            &[vec![1.0, 2.0, 3.0]],
            &[2.5],
            COMMUTING_REDUCTION_THRESHOLD,
        )
        .unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn zero_multiplier_examples() {
        let r = check_zero_multiplier(
            &Prior::Classical(ClassicalDistribution::uniform(3)),
            &Constraint::Classical(ClassicalConstraint::new(vec![1.0, 2.0, 3.0], 2.0)),
            ZERO_MULTIPLIER_THRESHOLD,
        )
        .unwrap();
        assert!(r.passed);
        let r = check_zero_multiplier(
            &Prior::Quantum(DensityMatrix::maximally_mixed(2)),
            &Constraint::Quantum(QuantumConstraint::new(pauli::sigma_x(), 0.0)),
            ZERO_MULTIPLIER_THRESHOLD,
        )
        .unwrap();
        assert!(r.passed);
        assert!(check_zero_multiplier(
            &Prior::Quantum(DensityMatrix::<f64>::maximally_mixed(2)),
            &Constraint::Classical(ClassicalConstraint::new(vec![1.0, 2.0], 1.5)),
            ZERO_MULTIPLIER_THRESHOLD,
        )
        .is_err());
    }

    #[test]
    fn off_target_constraint_fails_zero_multiplier() {
        let r = check_zero_multiplier(
            &Prior::Classical(ClassicalDistribution::uniform(3)),
            &Constraint::Classical(ClassicalConstraint::new(vec![1.0, 2.0, 3.0], 2.5)),
            ZERO_MULTIPLIER_THRESHOLD,
        )
        .unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn log_tensor_additivity_examples() {
        let a = DensityMatrix::from_diagonal(&[0.3, 0.7]).unwrap();
        let b = DensityMatrix::from_diagonal(&[0.6, 0.4]).unwrap();
        let r = check_log_tensor_additivity(&a, &a, &b, &b, LOG_TENSOR_ADDITIVITY_THRESHOLD).unwrap();
        assert!(r.max_deviation < 1e-15);
        let c = DensityMatrix::from_diagonal(&[0.1, 0.9]).unwrap();
        let r = check_log_tensor_additivity(&a, &c, &b, &a, LOG_TENSOR_ADDITIVITY_THRESHOLD).unwrap();
        assert!(r.passed);
    }

    #[test]
    fn subdomain_examples() {
        let prior = ClassicalDistribution::<f64>::uniform(4);
        let mask = [true, true, false, false];
        let r = check_subdomain_independence(&prior, &mask, 0.5, None, SUBDOMAIN_INDEPENDENCE_THRESHOLD).unwrap();
        assert!(r.max_deviation < 1e-15);
        let local = ClassicalConstraint::new(vec![1.0, 2.0, 0.0, 0.0], 0.8);
        let r =
            check_subdomain_independence(&prior, &mask, 0.5, Some(&local), SUBDOMAIN_INDEPENDENCE_THRESHOLD).unwrap();
        assert!(r.passed, "{r:?}");
        let leaky = ClassicalConstraint::new(vec![1.0, 2.0, 1.0, 0.0], 0.8);
        assert!(check_subdomain_independence(&prior, &mask, 0.5, Some(&leaky), 1e-10).is_err());
        assert!(check_subdomain_independence(&prior, &[true; 4], 0.5, None, 1e-10).is_err());
    }

    #[test]
    fn suite_reports_all_six_checks() {
        let results = run_suite(DEFAULT_SEED, 1);
        let names: Vec<&str> = results.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(
            names,
            [
                "prior_recovery",
                "subsystem_independence",
                "commuting_reduction",
                "zero_multiplier",
                "log_tensor_additivity",
                "subdomain_independence"
            ]
        );
        assert!(results.iter().all(|r| r.passed), "{results:#?}");
        assert!(results[0].detail.contains("seed 42"));
    }

    #[test]
    fn passed_matches_threshold() {
        let r = PropertyResult::new("x", 2e-9, 1e-9, "");
        assert!(!r.passed);
        let r = PropertyResult::new("x", 1e-9, 1e-9, "");
        assert!(r.passed);
    }
}
