//! Closed-form spin-1/2 update.
//!
//! For a prior `φ̂ = a|+⟩⟨+| + b|−⟩⟨−|` and one observable
//! `c₁1 + cₓσₓ + c_yσ_y + c_zσ_z`, the generator `Ĉ = α·c·σ + ln φ̂` has the
//! eigenvalues `λ ± δλ` in closed form, and the constraint reduces to a
//! monotone scalar equation in `α`. None of this goes through the general
//! eigensolver, which makes the module an independent check of
//! [`crate::quantum`].

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::dual::SolverReport;
use crate::error::{Error, Result};
use crate::hermitian::ComplexMatrix;
use crate::quantum::DensityMatrix;
use crate::scalar::{tanhc, Real};

const MAX_BRACKET_DOUBLINGS: usize = 1100;

/// A spin-1/2 update problem. JSON: `{ "a":, "b":, "c": [c1, cx, cy, cz], "target": }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinProblem<T> {
    pub a: T,
    pub b: T,
    pub c: [T; 4],
    pub target: T,
}

impl<T: Real> SpinProblem<T> {
    pub fn new(a: T, b: T, c: [T; 4], target: T) -> Result<Self> {
        let p = Self { a, b, c, target };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > T::zero() && self.b > T::zero()) || !self.a.is_finite() || !self.b.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "prior weights must be positive and finite (a = {}, b = {})",
                self.a, self.b
            )));
        }
        if self.c.iter().chain([&self.target]).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "observable coefficients and target must be finite".into(),
            ));
        }
        Ok(())
    }

    fn log_ratio(&self) -> T {
        (self.a / self.b).ln()
    }

    /// `|(cx, cy, cz)|`.
    pub fn vector_norm(&self) -> T {
        let [_, cx, cy, cz] = self.c;
        (cx * cx + cy * cy + cz * cz).sqrt()
    }

    /// Open interval of achievable expectations, `c₁ ∓ |c⃗|`.
    pub fn target_range(&self) -> (T, T) {
        let (c1, r) = (self.c[0], self.vector_norm());
        (c1 - r, c1 + r)
    }

    /// `(λ, δλ)`: center and half-gap of the spectrum of `Ĉ`.
    pub fn center_and_gap(&self, alpha: T) -> (T, T) {
        let [c1, cx, cy, cz] = self.c;
        let two = T::lit(2.0);
        let center = alpha * c1 + T::lit(0.5) * (self.a * self.b).ln();
        let shifted = two * alpha * cz + self.log_ratio();
        let transverse = two * alpha;
        let gap = T::lit(0.5) * (shifted * shifted + transverse * transverse * (cx * cx + cy * cy)).sqrt();
        (center, gap)
    }
}

/// `(λ₊, λ₋) = (λ + δλ, λ − δλ)`.
pub fn spin_eigenvalues<T: Real>(p: &SpinProblem<T>, alpha: T) -> (T, T) {
    let (center, gap) = p.center_and_gap(alpha);
    (center + gap, center - gap)
}

/// `Z = e^{λ₊} + e^{λ₋} = 2e^λ cosh δλ`.
pub fn spin_partition<T: Real>(p: &SpinProblem<T>, alpha: T) -> T {
    let (center, gap) = p.center_and_gap(alpha);
    T::lit(2.0) * center.exp() * gap.cosh()
}

/// `ln Z`, evaluated without overflow for large gaps.
pub fn spin_log_partition<T: Real>(p: &SpinProblem<T>, alpha: T) -> T {
    let (center, gap) = p.center_and_gap(alpha);
    center + gap + (-(gap + gap)).exp().ln_1p()
}

/// `F(α) = c₁ + tanh(δλ)/(2δλ)·(2α|c⃗|² + c_z ln(a/b))`, the posterior
/// expectation of the observable at multiplier `α`.
pub fn spin_constraint_value<T: Real>(p: &SpinProblem<T>, alpha: T) -> T {
    let [c1, cx, cy, cz] = p.c;
    let (_, gap) = p.center_and_gap(alpha);
    let slope = T::lit(2.0) * alpha * (cx * cx + cy * cy + cz * cz) + cz * p.log_ratio();
    c1 + tanhc(gap) * slope * T::lit(0.5)
}

/// `ρ̂ = exp(α·c·σ + ln φ̂)/Z = (1 + tanh(δλ)/δλ·K̂)/2`, where `K̂ = Ĉ − λ1`
/// is the traceless part of the generator (`K̂² = δλ²·1`).
pub fn spin_posterior<T: Real>(p: &SpinProblem<T>, alpha: T) -> DensityMatrix<T> {
    let [_, cx, cy, cz] = p.c;
    let (_, gap) = p.center_and_gap(alpha);
    let half = T::lit(0.5);
    let k_diag = alpha * cz + half * p.log_ratio();
    let k_off = Complex::new(alpha * cx, -alpha * cy);
    let factor = tanhc(gap) * half;
    let zero = T::zero();
    let matrix = ComplexMatrix::new(
        2,
        vec![
            Complex::new(half + factor * k_diag, zero),
            k_off.scale(factor),
            k_off.conj().scale(factor),
            Complex::new(half - factor * k_diag, zero),
        ],
    )
    .expect("2×2 entries");
    DensityMatrix::from_matrix(matrix).expect("closed-form posterior is a state")
}

pub type SpinReport<T> = SolverReport<T, DensityMatrix<T>>;

/// Solves `F(α) = target` by geometric bracket expansion and bisection to
/// full precision. `F` is monotone, so the bracket always exists for a
/// target strictly inside [`SpinProblem::target_range`].
pub fn solve_spin<T: Real>(p: &SpinProblem<T>, tol: T) -> Result<SpinReport<T>> {
    p.validate()?;
    let (lower, upper) = p.target_range();
    let infeasible = || Error::Infeasible {
        constraint: 0,
        target: p.target.to_f64_lossy(),
        lower: lower.to_f64_lossy(),
        upper: upper.to_f64_lossy(),
    };

    if p.vector_norm() == T::zero() {
        if (p.c[0] - p.target).abs() > tol {
            return Err(infeasible());
        }
        return Ok(report(p, T::zero(), 0, tol));
    }
    if !(p.target > lower && p.target < upper) {
        return Err(infeasible());
    }

    // F is nondecreasing (it is d ln Z/dα); probe anyway and orient so that
    // `g` increases.
    let orientation = if spin_constraint_value(p, T::one()) >= spin_constraint_value(p, -T::one()) {
        T::one()
    } else {
        -T::one()
    };
    let g = |alpha: T| orientation * (spin_constraint_value(p, alpha) - p.target);

    let mut iterations = 0;
    let (mut lo, mut hi) = (-T::one(), T::one());
    while g(lo) > T::zero() {
        hi = lo;
        lo = lo * T::lit(2.0);
        iterations += 1;
        if iterations > MAX_BRACKET_DOUBLINGS || !lo.is_finite() {
            return Err(infeasible());
        }
    }
    while g(hi) < T::zero() {
        lo = hi;
        hi = hi * T::lit(2.0);
        iterations += 1;
        if iterations > MAX_BRACKET_DOUBLINGS || !hi.is_finite() {
            return Err(infeasible());
        }
    }

    let (mut best, mut best_residual) = if g(lo).abs() <= g(hi).abs() {
        (lo, g(lo))
    } else {
        (hi, g(hi))
    };
    loop {
        let mid = lo + (hi - lo) * T::lit(0.5);
        if mid <= lo || mid >= hi || best_residual == T::zero() {
            break;
        }
        iterations += 1;
        let r = g(mid);
        if r.abs() <= best_residual.abs() {
            best = mid;
            best_residual = r;
        }
        if r <= T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(report(p, best, iterations, tol))
}

fn report<T: Real>(p: &SpinProblem<T>, alpha: T, iterations: usize, tol: T) -> SpinReport<T> {
    let residual = spin_constraint_value(p, alpha) - p.target;
    let log_partition = spin_log_partition(p, alpha);
    SolverReport {
        multipliers: vec![alpha],
        partition_value: log_partition.exp(),
        log_partition,
        posterior: spin_posterior(p, alpha),
        residuals: vec![residual],
        iterations,
        converged: residual.abs() <= tol,
    }
}
