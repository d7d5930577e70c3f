//! Damped Newton minimization of a convex Lagrange dual.
//!
//! Both updaters minimize `G(α) = ln Z(α) − Σ αᵢ tᵢ`, whose gradient is the
//! vector of constraint residuals `⟨Aᵢ⟩_α − tᵢ`. A stationary point of `G` is
//! therefore exactly a posterior that meets every constraint.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermitian::{ComplexMatrix, HermitianOperator};
use crate::scalar::Real;

/// Condition number above which the Newton system is not trusted.
const MAX_CONDITION: f64 = 1e12;
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    /// Bound on `max |residual|` for a solve to count as converged.
    pub tol: T,
    pub max_iter: usize,
    /// A multiplier larger than this in magnitude is taken as evidence that
    /// the targets are not jointly achievable.
    pub divergence_bound: T,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::tolerance(1e-10),
            max_iter: 200,
            divergence_bound: T::lit(1e3),
        }
    }
}

impl<T: Real> SolverOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// Outcome of a constrained update.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverReport<T, P> {
    /// One Lagrange multiplier per constraint, in input order.
    pub multipliers: Vec<T>,
    pub partition_value: T,
    pub log_partition: T,
    pub posterior: P,
    /// Signed violations `⟨Aᵢ⟩ − targetᵢ`.
    pub residuals: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Real, P> SolverReport<T, P> {
    pub fn max_residual(&self) -> T {
        self.residuals.iter().map(|r| r.abs()).fold(T::zero(), T::max)
    }
}

/// A smooth convex dual over the multipliers of the active constraints.
pub(crate) trait DualObjective<T: Real> {
    fn len(&self) -> usize;

    /// `(G(α), ∇G(α))`.
    fn evaluate(&self, alpha: &[T]) -> Result<(T, Vec<T>)>;

    /// Symmetric Hessian of `G` at `alpha`, row-major.
    fn hessian(&self, alpha: &[T], gradient: &[T]) -> Result<Vec<T>>;
}

#[derive(Debug, Clone)]
pub(crate) struct DualOutcome<T> {
    pub alpha: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

fn max_abs<T: Real>(v: &[T]) -> T {
    v.iter().map(|x| x.abs()).fold(T::zero(), T::max)
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn check_divergence<T: Real>(alpha: &[T], options: &SolverOptions<T>) -> Result<()> {
    let norm = max_abs(alpha);
    if norm > options.divergence_bound || !norm.is_finite() {
        return Err(Error::JointlyInfeasible {
            norm: norm.to_f64_lossy(),
            bound: options.divergence_bound.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Solves `H·d = −g` through the spectrum of `H`. Returns `None` when `H` is
/// not safely positive definite.
fn newton_direction<T: Real>(hessian: &[T], gradient: &[T]) -> Result<Option<Vec<T>>> {
    let m = gradient.len();
    let matrix = ComplexMatrix::from_fn(m, |i, j| num_complex::Complex::new(hessian[i * m + j], T::zero()));
    let spectrum = HermitianOperator::from_matrix_unchecked(matrix).eigh()?;
    let (lo, hi) = (spectrum.min_eigenvalue(), spectrum.max_eigenvalue());
    if !(lo > T::zero()) || hi / lo > T::lit(MAX_CONDITION) {
        return Ok(None);
    }
    let inverse = spectrum.apply(|l| T::one() / l);
    let direction = (0..m)
        .map(|i| -(0..m).map(|j| inverse.matrix().get(i, j).re * gradient[j]).sum::<T>())
        .collect();
    Ok(Some(direction))
}

/// Inverse-Hessian approximation maintained across iterations.
struct Bfgs<T> {
    inverse: Vec<T>,
    m: usize,
    scaled: bool,
}

impl<T: Real> Bfgs<T> {
    fn new(m: usize) -> Self {
        let mut inverse = vec![T::zero(); m * m];
        for i in 0..m {
            inverse[i * m + i] = T::one();
        }
        Self {
            inverse,
            m,
            scaled: false,
        }
    }

    fn direction(&self, gradient: &[T]) -> Vec<T> {
        let m = self.m;
        (0..m)
            .map(|i| -(0..m).map(|j| self.inverse[i * m + j] * gradient[j]).sum::<T>())
            .collect()
    }

    fn update(&mut self, step: &[T], grad_change: &[T]) {
        let m = self.m;
        let sy = dot(step, grad_change);
        if !(sy > T::epsilon() * dot(step, step).sqrt() * dot(grad_change, grad_change).sqrt()) {
            return;
        }
        if !self.scaled {
            let gamma = sy / dot(grad_change, grad_change);
            self.inverse.iter_mut().for_each(|v| *v = *v * gamma);
            self.scaled = true;
        }
        let rho = T::one() / sy;
        // H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ
        let hy: Vec<T> = (0..m)
            .map(|i| (0..m).map(|j| self.inverse[i * m + j] * grad_change[j]).sum())
            .collect();
        let yhy = dot(grad_change, &hy);
        for i in 0..m {
            for j in 0..m {
                let v = self.inverse[i * m + j] - rho * (step[i] * hy[j] + hy[i] * step[j])
                    + (rho * rho * yhy + rho) * step[i] * step[j];
                self.inverse[i * m + j] = v;
            }
        }
    }
}

/// Damped Newton from `α = 0`, with a BFGS direction whenever the Hessian is
/// singular or ill-conditioned, and Armijo backtracking on `G`.
pub(crate) fn minimize<T: Real, D: DualObjective<T>>(
    objective: &D,
    options: &SolverOptions<T>,
) -> Result<DualOutcome<T>> {
    let m = objective.len();
    let mut alpha = vec![T::zero(); m];
    let (mut value, mut gradient) = objective.evaluate(&alpha)?;
    let mut bfgs = Bfgs::new(m);
    let mut iterations = 0;

    loop {
        if max_abs(&gradient) <= options.tol {
            return Ok(DualOutcome {
                alpha,
                iterations,
                converged: true,
            });
        }
        if iterations >= options.max_iter {
            break;
        }
        iterations += 1;

        let hessian = objective.hessian(&alpha, &gradient)?;
        let mut direction = match newton_direction(&hessian, &gradient)? {
            Some(d) => d,
            None => bfgs.direction(&gradient),
        };
        if !(dot(&direction, &gradient) < T::zero()) {
            direction = gradient.iter().map(|&g| -g).collect();
        }

        let step = match line_search(objective, &alpha, value, &gradient, &direction)? {
            Some(found) => Some(found),
            None => {
                let steepest: Vec<T> = gradient.iter().map(|&g| -g).collect();
                line_search(objective, &alpha, value, &gradient, &steepest)?
            }
        };
        let Some((next_alpha, next_value, next_gradient)) = step else {
            break;
        };

        let s: Vec<T> = next_alpha.iter().zip(&alpha).map(|(&a, &b)| a - b).collect();
        let y: Vec<T> = next_gradient.iter().zip(&gradient).map(|(&a, &b)| a - b).collect();
        bfgs.update(&s, &y);

        alpha = next_alpha;
        value = next_value;
        gradient = next_gradient;
        check_divergence(&alpha, options)?;
    }

    Ok(DualOutcome {
        alpha,
        iterations,
        converged: false,
    })
}

type Trial<T> = (Vec<T>, T, Vec<T>);

fn line_search<T: Real, D: DualObjective<T>>(
    objective: &D,
    alpha: &[T],
    value: T,
    gradient: &[T],
    direction: &[T],
) -> Result<Option<Trial<T>>> {
    let slope = dot(gradient, direction);
    // G is evaluated in floating point; allow for its rounding noise.
    let slack = T::lit(8.0) * T::epsilon() * (value.abs() + T::one());
    let mut t = T::one();
    for _ in 0..MAX_HALVINGS {
        let trial: Vec<T> = alpha.iter().zip(direction).map(|(&a, &d)| a + t * d).collect();
        if let Ok((v, g)) = objective.evaluate(&trial) {
            if v.is_finite() && v <= value + T::lit(ARMIJO) * t * slope + slack {
                return Ok(Some((trial, v, g)));
            }
        }
        t = t * T::lit(0.5);
    }
    Ok(None)
}

/// Bracketing bisection on a one-constraint dual. The residual is
/// nondecreasing in the multiplier, so any sign change brackets the root.
pub(crate) fn bisect_single<T: Real, D: DualObjective<T>>(
    objective: &D,
    options: &SolverOptions<T>,
) -> Result<DualOutcome<T>> {
    debug_assert_eq!(objective.len(), 1);
    let residual = |a: T| -> Result<(T, Vec<T>)> {
        let (_, g) = objective.evaluate(&[a])?;
        Ok((g[0], g))
    };
    let mut iterations = 0;
    let (mut lo, mut hi) = (-T::one(), T::one());
    while residual(lo)?.0 > T::zero() {
        hi = lo;
        lo = lo * T::lit(2.0);
        iterations += 1;
        check_divergence(&[lo], options)?;
    }
    while residual(hi)?.0 < T::zero() {
        lo = hi;
        hi = hi * T::lit(2.0);
        iterations += 1;
        check_divergence(&[hi], options)?;
    }

    let (mut best, mut best_gradient) = {
        let (r_lo, g_lo) = residual(lo)?;
        let (r_hi, g_hi) = residual(hi)?;
        if r_lo.abs() <= r_hi.abs() {
            (lo, g_lo)
        } else {
            (hi, g_hi)
        }
    };
    while best_gradient[0].abs() > options.tol {
        let mid = lo + (hi - lo) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let (r, g) = residual(mid)?;
        if r.abs() < best_gradient[0].abs() {
            best = mid;
            best_gradient = g;
        }
        if r <= T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let converged = best_gradient[0].abs() <= options.tol;
    Ok(DualOutcome {
        alpha: vec![best],
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// G(α) = ½ αᵀQα − bᵀα with Q positive definite; minimizer Q⁻¹b.
    struct Quadratic {
        q: Vec<f64>,
        b: Vec<f64>,
    }

    impl DualObjective<f64> for Quadratic {
        fn len(&self) -> usize {
            self.b.len()
        }

        fn evaluate(&self, a: &[f64]) -> Result<(f64, Vec<f64>)> {
            let m = self.len();
            let qa: Vec<f64> = (0..m).map(|i| (0..m).map(|j| self.q[i * m + j] * a[j]).sum()).collect();
            let g: Vec<f64> = qa.iter().zip(&self.b).map(|(x, y)| x - y).collect();
            Ok((0.5 * dot(a, &qa) - dot(&self.b, a), g))
        }

        fn hessian(&self, _: &[f64], _: &[f64]) -> Result<Vec<f64>> {
            Ok(self.q.clone())
        }
    }

    #[test]
    fn newton_solves_quadratic_in_one_step() {
        let obj = Quadratic {
            q: vec![2.0, 0.5, 0.5, 1.0],
            b: vec![1.0, -1.0],
        };
        let out = minimize(&obj, &SolverOptions::with_tol(1e-12)).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
        // Q⁻¹b = [1.5/1.75, -2.5/1.75]
        assert!((out.alpha[0] - 1.5 / 1.75).abs() < 1e-14);
        assert!((out.alpha[1] + 2.5 / 1.75).abs() < 1e-14);
    }

    #[test]
    fn singular_hessian_falls_back_to_quasi_newton() {
        // Rank-one Q with b in its range: minimizers form a line.
        let obj = Quadratic {
            q: vec![1.0, 1.0, 1.0, 1.0],
            b: vec![2.0, 2.0],
        };
        let out = minimize(&obj, &SolverOptions::with_tol(1e-12)).unwrap();
        assert!(out.converged);
        assert!((out.alpha[0] + out.alpha[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn divergence_is_reported_as_infeasibility() {
        // Unbounded below along α: gradient never vanishes.
        struct Linear;
        impl DualObjective<f64> for Linear {
            fn len(&self) -> usize {
                1
            }
            fn evaluate(&self, a: &[f64]) -> Result<(f64, Vec<f64>)> {
                Ok((-a[0], vec![-1.0]))
            }
            fn hessian(&self, _: &[f64], _: &[f64]) -> Result<Vec<f64>> {
                Ok(vec![0.0])
            }
        }
        let options = SolverOptions {
            max_iter: 5000,
            ..SolverOptions::default()
        };
        let err = minimize(&Linear, &options).unwrap_err();
        assert!(err.is_infeasible());
    }

    #[test]
    fn bisection_finds_root_of_monotone_residual() {
        struct Tanh(f64);
        impl DualObjective<f64> for Tanh {
            fn len(&self) -> usize {
                1
            }
            fn evaluate(&self, a: &[f64]) -> Result<(f64, Vec<f64>)> {
                Ok((a[0].cosh().ln() - self.0 * a[0], vec![a[0].tanh() - self.0]))
            }
            fn hessian(&self, _: &[f64], _: &[f64]) -> Result<Vec<f64>> {
                unreachable!()
            }
        }
        let out = bisect_single(&Tanh(0.4), &SolverOptions::with_tol(1e-14)).unwrap();
        assert!(out.converged);
        assert!((out.alpha[0] - 0.4_f64.atanh()).abs() < 1e-13);
    }
}
