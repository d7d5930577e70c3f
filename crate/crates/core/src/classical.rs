//! Relative-entropy updating of finite discrete distributions.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dual::{self, DualObjective, SolverOptions, SolverReport};
use crate::error::{Error, Result};
use crate::scalar::{log_sum_exp, Real};

/// Which form of the relative entropy to evaluate.
///
/// `Full` keeps the `+Σρ` (`+Tr ρ`) term that makes the unconstrained
/// stationary point the prior itself; `Normalized` is the familiar
/// `−Σ ρ ln(ρ/φ)` (Umegaki's form in the quantum case).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyVariant {
    Full,
    #[default]
    #[serde(alias = "umegaki")]
    Normalized,
}

/// Nonnegative weights over a finite set of states.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalDistribution<T> {
    weights: Vec<T>,
    normalized: bool,
}

impl<T: Real> ClassicalDistribution<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("distribution needs at least one state".into()));
        }
        if let Some(i) = weights.iter().position(|w| !(*w >= T::zero()) || !w.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "weight {i} is {} (weights must be finite and nonnegative)",
                weights[i]
            )));
        }
        let total: T = weights.iter().copied().sum();
        let normalized = (total - T::one()).abs() <= T::tolerance(1e-12);
        Ok(Self { weights, normalized })
    }

    pub fn uniform(n: usize) -> Self {
        let w = T::one() / T::from_usize(n).expect("state count fits scalar");
        Self {
            weights: vec![w; n],
            normalized: true,
        }
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn total(&self) -> T {
        self.weights.iter().copied().sum()
    }

    /// Rescaled to unit mass.
    pub fn normalize(&self) -> Result<Self> {
        let total = self.total();
        if !(total > T::zero()) {
            return Err(Error::InvalidArgument("cannot normalize a zero distribution".into()));
        }
        let weights = self.weights.iter().map(|&w| w / total).collect();
        Ok(Self {
            weights,
            normalized: true,
        })
    }

    /// `Σ wᵢ·values[i]`.
    pub fn expectation(&self, values: &[T]) -> Result<T> {
        if values.len() != self.len() {
            return Err(Error::shape(
                format!("{} values", self.len()),
                format!("{} values", values.len()),
            ));
        }
        Ok(self.weights.iter().zip(values).map(|(&w, &v)| w * v).sum())
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.len(), other.len(), "length mismatch");
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max)
    }
}

impl<T: Real + Serialize> Serialize for ClassicalDistribution<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.weights.serialize(serializer)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for ClassicalDistribution<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let weights = Vec::<T>::deserialize(deserializer)?;
        ClassicalDistribution::new(weights).map_err(serde::de::Error::custom)
    }
}

/// An expectation-value constraint `Σ ρᵢ·values[i] = target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalConstraint<T> {
    pub values: Vec<T>,
    pub target: T,
}

impl<T: Real> ClassicalConstraint<T> {
    pub fn new(values: Vec<T>, target: T) -> Self {
        Self { values, target }
    }
}

pub type ClassicalReport<T> = SolverReport<T, ClassicalDistribution<T>>;

/// Relative entropy of `rho` with respect to `phi`; states with `ρᵢ = 0`
/// contribute nothing.
pub fn relative_entropy<T: Real>(
    rho: &ClassicalDistribution<T>,
    phi: &ClassicalDistribution<T>,
    variant: EntropyVariant,
) -> Result<T> {
    if rho.len() != phi.len() {
        return Err(Error::shape(
            format!("{} states", phi.len()),
            format!("{} states", rho.len()),
        ));
    }
    let mut divergence = T::zero();
    for (i, (&r, &p)) in rho.weights.iter().zip(&phi.weights).enumerate() {
        if r == T::zero() {
            continue;
        }
        if p == T::zero() {
            return Err(Error::SupportViolation { index: i });
        }
        divergence = divergence + r * (r / p).ln();
    }
    Ok(match variant {
        EntropyVariant::Normalized => -divergence,
        EntropyVariant::Full => rho.total() - divergence,
    })
}

/// Screened constraint set: constraints whose observable is constant are
/// either vacuous (target equals the constant) or infeasible, and never
/// enter the dual.
pub(crate) struct Screened {
    pub active: Vec<usize>,
}

/// Checks each target against the open interval `(lower, upper)` spanned by
/// its observable.
pub(crate) fn screen_targets<T: Real>(bounds: &[(T, T)], targets: &[T], tol: T) -> Result<Screened> {
    let mut active = Vec::new();
    for (j, (&(lower, upper), &target)) in bounds.iter().zip(targets).enumerate() {
        let scale = T::one().max(lower.abs()).max(upper.abs());
        let edge = T::tolerance(1e-12) * scale;
        let infeasible = || Error::Infeasible {
            constraint: j,
            target: target.to_f64_lossy(),
            lower: lower.to_f64_lossy(),
            upper: upper.to_f64_lossy(),
        };
        if !target.is_finite() {
            return Err(infeasible());
        }
        if upper - lower <= edge {
            if (target - lower).abs() > tol.max(edge) {
                return Err(infeasible());
            }
            continue;
        }
        if target <= lower + edge || target >= upper - edge {
            return Err(infeasible());
        }
        active.push(j);
    }
    Ok(Screened { active })
}

struct ClassicalDual<'a, T> {
    log_prior: Vec<T>,
    constraints: Vec<&'a ClassicalConstraint<T>>,
}

impl<T: Real> ClassicalDual<'_, T> {
    /// Log-weights `ln φᵢ + Σⱼ αⱼ Aⱼ(xᵢ)`.
    fn scores(&self, alpha: &[T]) -> Vec<T> {
        self.log_prior
            .iter()
            .enumerate()
            .map(|(i, &lp)| {
                lp + self
                    .constraints
                    .iter()
                    .zip(alpha)
                    .map(|(c, &a)| a * c.values[i])
                    .sum::<T>()
            })
            .collect()
    }

    /// `(ln Z, normalized posterior)`.
    fn posterior(&self, alpha: &[T]) -> (T, Vec<T>) {
        let scores = self.scores(alpha);
        let log_z = log_sum_exp(&scores);
        let p = scores.iter().map(|&s| (s - log_z).exp()).collect();
        (log_z, p)
    }

    fn means(&self, p: &[T]) -> Vec<T> {
        self.constraints
            .iter()
            .map(|c| p.iter().zip(&c.values).map(|(&w, &v)| w * v).sum())
            .collect()
    }
}

impl<T: Real> DualObjective<T> for ClassicalDual<'_, T> {
    fn len(&self) -> usize {
        self.constraints.len()
    }

    fn evaluate(&self, alpha: &[T]) -> Result<(T, Vec<T>)> {
        let (log_z, p) = self.posterior(alpha);
        let means = self.means(&p);
        let value = log_z
            - alpha
                .iter()
                .zip(&self.constraints)
                .map(|(&a, c)| a * c.target)
                .sum::<T>();
        let gradient = means
            .iter()
            .zip(&self.constraints)
            .map(|(&m, c)| m - c.target)
            .collect();
        Ok((value, gradient))
    }

    /// Covariance of the constraint observables under the current posterior.
    fn hessian(&self, alpha: &[T], _gradient: &[T]) -> Result<Vec<T>> {
        let (_, p) = self.posterior(alpha);
        let means = self.means(&p);
        let m = self.len();
        let mut h = vec![T::zero(); m * m];
        for j in 0..m {
            for k in j..m {
                let cov: T = p
                    .iter()
                    .enumerate()
                    .map(|(i, &w)| {
                        w * (self.constraints[j].values[i] - means[j]) * (self.constraints[k].values[i] - means[k])
                    })
                    .sum();
                h[j * m + k] = cov;
                h[k * m + j] = cov;
            }
        }
        Ok(h)
    }
}

/// Maximizes the relative entropy relative to `prior` subject to every
/// constraint. The posterior has the canonical form
/// `ρᵢ = φᵢ·exp(Σⱼ αⱼ Aⱼ(xᵢ)) / Z`.
pub fn solve_classical<T: Real>(
    prior: &ClassicalDistribution<T>,
    constraints: &[ClassicalConstraint<T>],
    options: &SolverOptions<T>,
) -> Result<ClassicalReport<T>> {
    let n = prior.len();
    if let Some(i) = prior.weights.iter().position(|&w| !(w > T::zero())) {
        return Err(Error::InvalidArgument(format!(
            "prior weight {i} is zero; the dual needs a strictly positive prior"
        )));
    }
    for (j, c) in constraints.iter().enumerate() {
        if c.values.len() != n {
            return Err(Error::shape(
                format!("{n} values"),
                format!("{} values in constraint {j}", c.values.len()),
            ));
        }
        if c.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("constraint {j} has a non-finite value")));
        }
    }

    let bounds: Vec<(T, T)> = constraints
        .iter()
        .map(|c| {
            let lo = c.values.iter().copied().fold(T::infinity(), T::min);
            let hi = c.values.iter().copied().fold(T::neg_infinity(), T::max);
            (lo, hi)
        })
        .collect();
    let targets: Vec<T> = constraints.iter().map(|c| c.target).collect();
    let screened = screen_targets(&bounds, &targets, options.tol)?;

    let dual = ClassicalDual {
        log_prior: prior.weights.iter().map(|w| w.ln()).collect(),
        constraints: screened.active.iter().map(|&j| &constraints[j]).collect(),
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
    let (log_partition, weights) = dual.posterior(&outcome.alpha);
    let posterior = ClassicalDistribution {
        weights,
        normalized: true,
    };
    let residuals: Vec<T> = constraints
        .iter()
        .map(|c| posterior.expectation(&c.values).map(|m| m - c.target))
        .collect::<Result<_>>()?;
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
