//! Driver behind the `qmaxent` binary: problem-file parsing, solver dispatch
//! and JSON reports.
//!
//! Exit codes: 0 converged (or all checks passed), 1 parse/domain/usage
//! error, 2 infeasible constraints, 3 solver did not converge.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use qmaxent::json::to_report_string;
use qmaxent::verification::run_suite;
use qmaxent::{
    quantum_relative_entropy, relative_entropy, solve_classical, solve_quantum, solve_spin, ClassicalConstraintF64,
    ClassicalDistributionF64, ComplexMatrixF64, DensityMatrixF64, EntropyVariant, Error, HermitianOperatorF64,
    QuantumConstraintF64, SolverOptions, SolverReport, SpinProblemF64,
};
use serde::{Deserialize, Serialize};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let d = SolverOptions::<f64>::default();
        Self {
            tol: d.tol,
            max_iter: d.max_iter,
        }
    }
}

impl SolverSettings {
    fn options(&self) -> SolverOptions<f64> {
        SolverOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            ..SolverOptions::default()
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct VectorConstraint {
    pub observable: Vec<f64>,
    pub target: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct MatrixConstraint {
    pub observable: ComplexMatrixF64,
    pub target: f64,
}

/// Problem file, selected by its `"mode"` field.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ProblemFile {
    Classical {
        prior: Vec<f64>,
        #[serde(default)]
        constraints: Vec<VectorConstraint>,
        #[serde(default)]
        solver: SolverSettings,
    },
    Quantum {
        prior: ComplexMatrixF64,
        #[serde(default)]
        constraints: Vec<MatrixConstraint>,
        #[serde(default)]
        solver: SolverSettings,
    },
    Spin {
        a: f64,
        b: f64,
        c: [f64; 4],
        target: f64,
        #[serde(default)]
        solver: SolverSettings,
    },
}

impl ProblemFile {
    /// Parses a problem file. A file without `"mode"` but with spin fields
    /// (`a`, `b`, `c`) is read as a spin problem.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if let Some(obj) = value.as_object_mut() {
            let looks_like_spin = ["a", "b", "c"].iter().all(|k| obj.contains_key(*k));
            if !obj.contains_key("mode") && looks_like_spin {
                obj.insert("mode".into(), serde_json::Value::String("spin".into()));
            }
        }
        serde_json::from_value(value).map_err(|e| format!("{e}"))
    }
}

#[derive(Debug, Serialize)]
pub struct EntropyValues {
    pub full: f64,
    pub normalized: f64,
}

/// Solver report plus the entropy of the posterior relative to the prior.
#[derive(Debug, Serialize)]
pub struct UpdateOutput<P> {
    pub mode: &'static str,
    pub multipliers: Vec<f64>,
    pub partition_value: f64,
    pub log_partition: f64,
    pub posterior: P,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub entropy: EntropyValues,
}

impl<P> UpdateOutput<P> {
    fn new(mode: &'static str, report: SolverReport<f64, P>, entropy: EntropyValues) -> Self {
        Self {
            mode,
            multipliers: report.multipliers,
            partition_value: report.partition_value,
            log_partition: report.log_partition,
            posterior: report.posterior,
            residuals: report.residuals,
            iterations: report.iterations,
            converged: report.converged,
            entropy,
        }
    }
}

enum Solved {
    Classical(UpdateOutput<ClassicalDistributionF64>),
    Quantum(UpdateOutput<DensityMatrixF64>),
}

impl Solved {
    fn converged(&self) -> bool {
        match self {
            Solved::Classical(o) => o.converged,
            Solved::Quantum(o) => o.converged,
        }
    }

    fn summary(&self) -> String {
        let (mode, alpha, iterations, converged) = match self {
            Solved::Classical(o) => (o.mode, &o.multipliers, o.iterations, o.converged),
            Solved::Quantum(o) => (o.mode, &o.multipliers, o.iterations, o.converged),
        };
        let state = if converged { "converged" } else { "did not converge" };
        format!("{mode} update {state} after {iterations} iterations; multipliers {alpha:?}")
    }

    fn to_json(&self) -> serde_json::Result<String> {
        match self {
            Solved::Classical(o) => to_report_string(o),
            Solved::Quantum(o) => to_report_string(o),
        }
    }
}

fn solve(problem: &ProblemFile) -> Result<Solved, Error> {
    match problem {
        ProblemFile::Classical {
            prior,
            constraints,
            solver,
        } => {
            let prior = ClassicalDistributionF64::new(prior.clone())?;
            let constraints: Vec<ClassicalConstraintF64> = constraints
                .iter()
                .map(|c| ClassicalConstraintF64::new(c.observable.clone(), c.target))
                .collect();
            let report = solve_classical(&prior, &constraints, &solver.options())?;
            let reference = prior.normalize()?;
            let entropy = EntropyValues {
                full: relative_entropy(&report.posterior, &reference, EntropyVariant::Full)?,
                normalized: relative_entropy(&report.posterior, &reference, EntropyVariant::Normalized)?,
            };
            Ok(Solved::Classical(UpdateOutput::new("classical", report, entropy)))
        }
        ProblemFile::Quantum {
            prior,
            constraints,
            solver,
        } => {
            let prior = DensityMatrixF64::from_matrix(prior.clone())?;
            let constraints = constraints
                .iter()
                .map(|c| {
                    Ok(QuantumConstraintF64::new(
                        HermitianOperatorF64::new(c.observable.clone())?,
                        c.target,
                    ))
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let report = solve_quantum(&prior, &constraints, &solver.options())?;
            let entropy = quantum_entropies(&report.posterior, &prior)?;
            Ok(Solved::Quantum(UpdateOutput::new("quantum", report, entropy)))
        }
        ProblemFile::Spin {
            a,
            b,
            c,
            target,
            solver,
        } => {
            let p = SpinProblemF64::new(*a, *b, *c, *target)?;
            let report = solve_spin(&p, solver.tol)?;
            let prior = DensityMatrixF64::from_diagonal(&[*a / (*a + *b), *b / (*a + *b)])?;
            let entropy = quantum_entropies(&report.posterior, &prior)?;
            Ok(Solved::Quantum(UpdateOutput::new("spin", report, entropy)))
        }
    }
}

fn quantum_entropies(posterior: &DensityMatrixF64, prior: &DensityMatrixF64) -> Result<EntropyValues, Error> {
    Ok(EntropyValues {
        full: quantum_relative_entropy(posterior, prior, EntropyVariant::Full)?,
        normalized: quantum_relative_entropy(posterior, prior, EntropyVariant::Normalized)?,
    })
}

fn emit(text: &str, out: Option<&Path>) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, text),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

/// `update <problem.json> [--out <path>]`.
pub fn run_update(path: &Path, out: Option<&Path>) -> i32 {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return EXIT_ERROR;
        }
    };
    let problem = match ProblemFile::parse(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return EXIT_ERROR;
        }
    };
    let solved = match solve(&problem) {
        Ok(s) => s,
        Err(e) if e.is_infeasible() => {
            eprintln!("infeasible: {e}");
            return EXIT_INFEASIBLE;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    let json = match solved.to_json() {
        Ok(j) => j,
        Err(e) => {
            eprintln!("error: cannot serialize report: {e}");
            return EXIT_ERROR;
        }
    };
    if let Err(e) = emit(&json, out) {
        eprintln!("error: cannot write report: {e}");
        return EXIT_ERROR;
    }
    eprintln!("{}", solved.summary());
    if solved.converged() {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    }
}

/// `verify [--seed N] [--trials N] [--out <path>]`.
pub fn run_verify(seed: u64, trials: usize, out: Option<&Path>) -> i32 {
    if trials == 0 {
        eprintln!("error: --trials must be at least 1");
        return EXIT_ERROR;
    }
    let results = run_suite(seed, trials);
    let json = match to_report_string(&results) {
        Ok(j) => j,
        Err(e) => {
            eprintln!("error: cannot serialize report: {e}");
            return EXIT_ERROR;
        }
    };
    if let Err(e) = emit(&json, out) {
        eprintln!("error: cannot write report: {e}");
        return EXIT_ERROR;
    }
    for r in &results {
        let mark = if r.passed { "PASS" } else { "FAIL" };
        eprintln!(
            "{mark} {:<24} max deviation {:.3e} (threshold {:.0e})",
            r.name, r.max_deviation, r.threshold
        );
    }
    if results.iter().all(|r| r.passed) {
        EXIT_OK
    } else {
        EXIT_ERROR
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_mode() {
        let c = ProblemFile::parse(
            r#"{"mode":"classical","prior":[1,1,1],"constraints":[{"observable":[1,2,3],"target":2.5}]}"#,
        )
        .unwrap();
        assert!(matches!(c, ProblemFile::Classical { ref constraints, .. } if constraints.len() == 1));
        let q = ProblemFile::parse(r#"{"mode":"quantum","prior":{"dim":1,"entries":[[1,0]]}}"#).unwrap();
        assert!(matches!(q, ProblemFile::Quantum { .. }));
        let s = ProblemFile::parse(r#"{"a":0.5,"b":0.5,"c":[0,0,0,1],"target":0.4}"#).unwrap();
        assert!(matches!(s, ProblemFile::Spin { .. }));
    }

    #[test]
    fn parse_errors_name_the_problem() {
        let e = ProblemFile::parse(r#"{"mode":"classical"}"#).unwrap_err();
        assert!(e.contains("prior"), "{e}");
        let e = ProblemFile::parse("{\n\"mode\": \"spin\",\n").unwrap_err();
        assert!(e.contains("line"), "{e}");
        let e = ProblemFile::parse(r#"{"mode":"bogus"}"#).unwrap_err();
        assert!(e.contains("bogus"), "{e}");
        let e = ProblemFile::parse(r#"{"mode":"spin","a":1,"b":1,"c":[0,0,0,1],"target":0,"solver":{"tolerance":1}}"#)
            .unwrap_err();
        assert!(e.contains("tolerance"), "{e}");
    }

    #[test]
    fn solver_settings_default_to_library_defaults() {
        let s = SolverSettings::default();
        assert_eq!(s.tol, 1e-10);
        assert_eq!(s.max_iter, 200);
    }
}
