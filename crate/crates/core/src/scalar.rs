//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Real floating-point scalar (`f32` or `f64`) the linear algebra and solvers
/// are written against.
pub trait Real: Float + FromPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static {
    /// Converts an `f64` literal into this scalar.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    /// A tolerance of `v`, floored at 64 ulps of one so that thresholds chosen
    /// for `f64` stay meaningful in lower precision.
    fn tolerance(v: f64) -> Self {
        let floor = Self::epsilon() * Self::lit(64.0);
        Self::lit(v).max(floor)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `tanh(x) / x`, continuous through the removable singularity at zero.
pub fn tanhc<T: Real>(x: T) -> T {
    let ax = x.abs();
    if ax < T::lit(1e-6) {
        let x2 = x * x;
        T::one() - x2 / T::lit(3.0) + T::lit(2.0) * x2 * x2 / T::lit(15.0)
    } else {
        x.tanh() / x
    }
}

/// `ln(Σ exp(v_i))` without overflow. Returns `-inf` for an empty slice.
pub fn log_sum_exp<T: Real>(values: &[T]) -> T {
    let max = values.iter().copied().fold(T::neg_infinity(), T::max);
    if !max.is_finite() {
        return max;
    }
    let sum: T = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}
