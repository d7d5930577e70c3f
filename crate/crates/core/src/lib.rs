//! Maximum relative-entropy updating of probability distributions and
//! density matrices under linear expectation constraints.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar for everyday use.
//!
//! ```
//! use qmaxent::{pauli, DensityMatrixF64, QuantumConstraint, SolverOptions, solve_quantum};
//!
//! let prior = DensityMatrixF64::maximally_mixed(2);
//! let constraint = QuantumConstraint::new(pauli::sigma_z(), 0.4);
//! let report = solve_quantum(&prior, &[constraint], &SolverOptions::default()).unwrap();
//! assert!(report.converged);
//! assert!((report.multipliers[0] - 0.4_f64.atanh()).abs() < 1e-9);
//! ```

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod dual;
pub mod error;
pub mod hermitian;
pub mod json;
pub mod quantum;
pub mod scalar;
pub mod spin;
pub mod verification;

pub use classical::{
    relative_entropy, solve_classical, ClassicalConstraint, ClassicalDistribution, ClassicalReport, EntropyVariant,
};
pub use dual::{SolverOptions, SolverReport};
pub use error::{Error, Result};
pub use hermitian::{
    eigh, kron, matrix_function, partial_trace, pauli, trace_product, ComplexMatrix, HermitianOperator,
    SpectralDecomposition, Subsystem,
};
pub use quantum::{
    expectation, log_partition, posterior_from_multipliers, quantum_relative_entropy, solve_quantum, DensityMatrix,
    QuantumConstraint, QuantumReport,
};
pub use scalar::Real;
pub use spin::{
    solve_spin, spin_constraint_value, spin_eigenvalues, spin_partition, spin_posterior, SpinProblem, SpinReport,
};
pub use verification::PropertyResult;

pub type ComplexMatrixF64 = ComplexMatrix<f64>;
pub type HermitianOperatorF64 = HermitianOperator<f64>;
pub type SpectralDecompositionF64 = SpectralDecomposition<f64>;
pub type DensityMatrixF64 = DensityMatrix<f64>;
pub type ClassicalDistributionF64 = ClassicalDistribution<f64>;
pub type ClassicalConstraintF64 = ClassicalConstraint<f64>;
pub type QuantumConstraintF64 = QuantumConstraint<f64>;
pub type SpinProblemF64 = SpinProblem<f64>;
pub type ClassicalReportF64 = ClassicalReport<f64>;
pub type QuantumReportF64 = QuantumReport<f64>;

pub type ComplexMatrixF32 = ComplexMatrix<f32>;
pub type HermitianOperatorF32 = HermitianOperator<f32>;
pub type DensityMatrixF32 = DensityMatrix<f32>;
pub type ClassicalDistributionF32 = ClassicalDistribution<f32>;
pub type SpinProblemF32 = SpinProblem<f32>;
