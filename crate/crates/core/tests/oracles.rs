//! Cross-checks against independent routes: a third-party eigensolver,
//! naive index summation, finite differences and the closed-form spin
//! solution.

use nalgebra::{Complex as NaComplex, DMatrix, SymmetricEigen};
use num_complex::Complex;
use qmaxent::classical::ClassicalConstraint;
use qmaxent::hermitian::{pauli, ComplexMatrix, HermitianOperator, Subsystem};
use qmaxent::quantum::{expectation, log_partition, posterior_from_multipliers, DensityMatrix, QuantumConstraint};
use qmaxent::spin::{solve_spin, spin_constraint_value, spin_eigenvalues, spin_partition, spin_posterior, SpinProblem};
use qmaxent::verification::random;
use qmaxent::{solve_classical, solve_quantum, trace_product, ClassicalDistribution, SolverOptions};
use rand::Rng;

fn to_nalgebra(m: &ComplexMatrix<f64>) -> DMatrix<NaComplex<f64>> {
    let n = m.dim();
    DMatrix::from_fn(n, n, |i, j| {
        let z = m.get(i, j);
        NaComplex::new(z.re, z.im)
    })
}

#[test]
fn eigenvalues_match_nalgebra() {
    let mut rng = random::rng(1);
    for dim in [2, 3, 4, 6, 8, 16] {
        for _ in 0..5 {
            let h = random::hermitian(&mut rng, dim, 2.0);
            let ours = h.eigh().unwrap();
            let mut theirs: Vec<f64> = SymmetricEigen::new(to_nalgebra(h.matrix()))
                .eigenvalues
                .iter()
                .copied()
                .collect();
            theirs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (a, b) in ours.eigenvalues.iter().zip(&theirs) {
                assert!((a - b).abs() < 1e-12, "dim {dim}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn random_reconstruction_within_contract() {
    let mut rng = random::rng(2);
    for dim in [4, 16, 32, 64] {
        let h = random::hermitian(&mut rng, dim, 1.0);
        let s = h.eigh().unwrap();
        let rebuilt = s.compose(&s.eigenvalues);
        assert!(rebuilt.matrix().max_abs_diff(h.matrix()) <= 1e-10, "dim {dim}");
        let utu = &s.unitary.adjoint() * &s.unitary;
        assert!(utu.max_abs_diff(&ComplexMatrix::identity(dim)) <= 1e-10);
    }
}

#[test]
fn exp_log_round_trip() {
    let mut rng = random::rng(3);
    for dim in 2..=6 {
        let rho = random::density_matrix(&mut rng, dim);
        let back = rho.ln().unwrap().exp().unwrap();
        assert!(back.matrix().max_abs_diff(rho.matrix()) <= 1e-10);
    }
}

#[test]
fn exp_matches_truncated_power_series() {
    let mut rng = random::rng(4);
    let h = random::hermitian(&mut rng, 4, 0.5);
    let mut term = ComplexMatrix::identity(4);
    let mut sum = ComplexMatrix::identity(4);
    for k in 1..30 {
        term = (&term * h.matrix()).scale(1.0 / k as f64);
        sum = &sum + &term;
    }
    assert!(h.exp().unwrap().matrix().max_abs_diff(&sum) < 1e-13);
}

#[test]
fn kron_mixed_product() {
    let mut rng = random::rng(5);
    for _ in 0..10 {
        let [a, b, c, d] = [0; 4].map(|_| random::hermitian(&mut rng, 2, 1.0).into_matrix());
        let lhs = &a.kron(&b) * &c.kron(&d);
        let rhs = (&a * &c).kron(&(&b * &d));
        assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
    }
}

#[test]
fn partial_trace_by_direct_summation() {
    let mut rng = random::rng(6);
    let (d1, d2) = (2, 3);
    let c = random::hermitian(&mut rng, d1 * d2, 1.0).into_matrix();
    let first = c.partial_trace((d1, d2), Subsystem::First).unwrap();
    let second = c.partial_trace((d1, d2), Subsystem::Second).unwrap();
    for i in 0..d1 {
        for j in 0..d1 {
            let mut acc = Complex::new(0.0, 0.0);
            for k in 0..d2 {
                acc += c.get(i * d2 + k, j * d2 + k);
            }
            assert!((first.get(i, j) - acc).norm() < 1e-15);
        }
    }
    for k in 0..d2 {
        for l in 0..d2 {
            let mut acc = Complex::new(0.0, 0.0);
            for i in 0..d1 {
                acc += c.get(i * d2 + k, i * d2 + l);
            }
            assert!((second.get(k, l) - acc).norm() < 1e-15);
        }
    }
    assert!((first.trace() - c.trace()).norm() <= 1e-12);
    assert!((second.trace() - c.trace()).norm() <= 1e-12);
}

#[test]
fn trace_product_by_direct_summation() {
    let mut rng = random::rng(7);
    for dim in [2, 3, 5] {
        let a = random::hermitian(&mut rng, dim, 1.0);
        let b = random::hermitian(&mut rng, dim, 1.0);
        let naive = (&a.matrix().clone() * b.matrix()).trace();
        assert!(naive.im.abs() < 1e-12);
        assert!((trace_product(&a, &b).unwrap() - naive.re).abs() <= 1e-12);
        let rho = random::density_matrix(&mut rng, dim);
        let mut direct = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                direct += (rho.matrix().get(i, j) * a.matrix().get(j, i)).re;
            }
        }
        assert!((expectation(&rho, &a).unwrap() - direct).abs() <= 1e-12);
    }
}

#[test]
fn log_of_tensor_with_identity() {
    let mut rng = random::rng(8);
    for dim in 2..=4 {
        let rho = random::density_matrix(&mut rng, dim);
        let id = HermitianOperator::identity(2);
        let lhs = rho.op().kron(&id).ln().unwrap();
        let rhs = rho.ln().unwrap().kron(&id);
        assert!(lhs.matrix().max_abs_diff(rhs.matrix()) <= 1e-9);
    }
}

#[test]
fn exp_of_commuting_sum_factorizes() {
    let mut rng = random::rng(9);
    for _ in 0..10 {
        let r1 = random::density_matrix(&mut rng, 2);
        let r2 = random::density_matrix(&mut rng, 3);
        let sum = r1
            .ln()
            .unwrap()
            .kron(&HermitianOperator::identity(3))
            .add(&HermitianOperator::identity(2).kron(&r2.ln().unwrap()))
            .unwrap();
        let product = r1.op().kron(r2.op());
        assert!(sum.exp().unwrap().matrix().max_abs_diff(product.matrix()) <= 1e-9);
    }
}

fn random_spin(rng: &mut impl Rng) -> SpinProblem<f64> {
    let a = rng.random_range(0.05..0.95);
    let c = [0; 4].map(|_| rng.random_range(-1.0..1.0));
    SpinProblem::new(a, 1.0 - a, c, 0.0).unwrap()
}

fn spin_generator(p: &SpinProblem<f64>, alpha: f64) -> HermitianOperator<f64> {
    let ln_prior = HermitianOperator::from_real_diagonal(&[p.a.ln(), p.b.ln()]);
    ln_prior.add_scaled(alpha, &pauli::combination(p.c)).unwrap()
}

#[test]
fn spin_closed_forms_match_general_machinery() {
    let mut rng = random::rng(10);
    for _ in 0..200 {
        let p = random_spin(&mut rng);
        let alpha = rng.random_range(-5.0..5.0);
        let generator = spin_generator(&p, alpha);

        let (plus, minus) = spin_eigenvalues(&p, alpha);
        let numeric = generator.eigh().unwrap().eigenvalues;
        assert!((minus - numeric[0]).abs() <= 1e-10);
        assert!((plus - numeric[1]).abs() <= 1e-10);
        assert!(plus >= minus);

        let z = generator.exp().unwrap().trace();
        assert!((spin_partition(&p, alpha) - z).abs() <= 1e-10 * z);

        let prior = DensityMatrix::from_diagonal(&[p.a, p.b]).unwrap();
        let observable = pauli::combination(p.c);
        let (rho, _) = posterior_from_multipliers(&prior, std::slice::from_ref(&observable), &[alpha]).unwrap();
        let f = spin_constraint_value(&p, alpha);
        assert!((f - expectation(&rho, &observable).unwrap()).abs() <= 1e-10);
        assert!(spin_posterior(&p, alpha).max_abs_diff(&rho) <= 1e-10);
    }
}

#[test]
fn spin_general_solver_at_published_example() {
    let p = SpinProblem::<f64>::new(0.6, 0.4, [0.0, 1.0, 0.0, 0.0], 0.2).unwrap();
    let oracle = solve_spin(&p, 1e-14).unwrap();
    let prior = DensityMatrix::from_diagonal(&[0.6, 0.4]).unwrap();
    let general = solve_quantum(
        &prior,
        &[QuantumConstraint::new(pauli::sigma_x(), 0.2)],
        &SolverOptions::with_tol(1e-13),
    )
    .unwrap();
    assert!((oracle.multipliers[0] - general.multipliers[0]).abs() <= 1e-8);
    assert!(oracle.posterior.max_abs_diff(&general.posterior) <= 1e-8);
}

#[test]
fn classical_gradient_and_convexity_by_finite_differences() {
    let mut rng = random::rng(11);
    for _ in 0..20 {
        let n = rng.random_range(2..8);
        let prior = random::distribution(&mut rng, n);
        let values = random::values(&mut rng, n, 2.0);
        let log_z = |alpha: f64| -> f64 {
            let s: Vec<f64> = prior
                .weights()
                .iter()
                .zip(&values)
                .map(|(w, v)| w.ln() + alpha * v)
                .collect();
            qmaxent::scalar::log_sum_exp(&s)
        };
        let alpha = rng.random_range(-1.0..1.0);
        let h = 1e-5;
        let fd = (log_z(alpha + h) - log_z(alpha - h)) / (2.0 * h);
        // gradient = posterior mean, read off a solve whose target is that mean
        let weights: Vec<f64> = prior
            .weights()
            .iter()
            .zip(&values)
            .map(|(w, v)| w * (alpha * v).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        let mean: f64 = weights.iter().zip(&values).map(|(w, v)| w * v).sum::<f64>() / total;
        assert!((fd - mean).abs() <= 1e-6 * mean.abs().max(1.0));
        let second = log_z(alpha + 1e-3) - 2.0 * log_z(alpha) + log_z(alpha - 1e-3);
        assert!(second >= -1e-8);

        let report = solve_classical(
            &prior,
            &[ClassicalConstraint::new(values.clone(), mean)],
            &SolverOptions::with_tol(1e-13),
        )
        .unwrap();
        assert!((report.multipliers[0] - alpha).abs() < 1e-7);
    }
}

#[test]
fn quantum_gradient_by_finite_differences() {
    let mut rng = random::rng(12);
    for dim in [2, 4, 8] {
        let prior = random::density_matrix(&mut rng, dim);
        let observables: Vec<HermitianOperator<f64>> = (0..3).map(|_| random::hermitian(&mut rng, dim, 1.0)).collect();
        let alphas: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (rho, _) = posterior_from_multipliers(&prior, &observables, &alphas).unwrap();
        for i in 0..3 {
            let h = 1e-5;
            let mut up = alphas.clone();
            up[i] += h;
            let mut down = alphas.clone();
            down[i] -= h;
            let fd = (log_partition(&prior, &observables, &up).unwrap()
                - log_partition(&prior, &observables, &down).unwrap())
                / (2.0 * h);
            let exact = expectation(&rho, &observables[i]).unwrap();
            assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0));
        }
    }
}

#[test]
fn quantum_response_is_monotone_in_multiplier() {
    let mut rng = random::rng(13);
    for _ in 0..10 {
        let dim = rng.random_range(2..=4);
        let prior = random::density_matrix(&mut rng, dim);
        let a = random::hermitian(&mut rng, dim, 1.0);
        let mut last = f64::NEG_INFINITY;
        for k in 0..100 {
            let alpha = -5.0 + 10.0 * k as f64 / 99.0;
            let (rho, _) = posterior_from_multipliers(&prior, std::slice::from_ref(&a), &[alpha]).unwrap();
            let value = expectation(&rho, &a).unwrap();
            assert!(value >= last - 1e-12);
            last = value;
        }
    }
}

#[test]
fn gibbs_state_recovery() {
    let mut rng = random::rng(14);
    for dim in [2, 3, 5] {
        let hamiltonian = random::hermitian(&mut rng, dim, 1.0);
        let witness = random::density_matrix(&mut rng, dim);
        let energy = expectation(&witness, &hamiltonian).unwrap();
        let prior = DensityMatrix::maximally_mixed(dim);
        let report = solve_quantum(
            &prior,
            &[QuantumConstraint::new(hamiltonian.clone(), energy)],
            &SolverOptions::with_tol(1e-12),
        )
        .unwrap();
        assert!(report.converged);
        let beta = -report.multipliers[0];
        let boltzmann = hamiltonian.scale(-beta).exp().unwrap();
        let gibbs = boltzmann.scale(1.0 / boltzmann.trace());
        assert!(report.posterior.matrix().max_abs_diff(gibbs.matrix()) < 1e-12);
    }
}

#[test]
fn solver_uniqueness_across_formulations() {
    // Scaling an observable rescales its multiplier; the posterior is unique.
    let mut rng = random::rng(15);
    let prior = random::density_matrix(&mut rng, 3);
    let a = random::hermitian(&mut rng, 3, 1.0);
    let witness = random::density_matrix(&mut rng, 3);
    let t = expectation(&witness, &a).unwrap();
    let options = SolverOptions::with_tol(1e-13);
    let r1 = solve_quantum(&prior, &[QuantumConstraint::new(a.clone(), t)], &options).unwrap();
    let r2 = solve_quantum(&prior, &[QuantumConstraint::new(a.scale(4.0), 4.0 * t)], &options).unwrap();
    assert!((r1.multipliers[0] - 4.0 * r2.multipliers[0]).abs() < 1e-6);
    assert!(r1.posterior.max_abs_diff(&r2.posterior) < 1e-10);
}

#[test]
fn posterior_is_normalized_and_positive() {
    let mut rng = random::rng(16);
    for _ in 0..20 {
        let dim = rng.random_range(2..=5);
        let prior = random::density_matrix(&mut rng, dim);
        let witness = random::density_matrix(&mut rng, dim);
        let constraints: Vec<QuantumConstraint<f64>> = (0..2)
            .map(|_| {
                let a = random::hermitian(&mut rng, dim, 1.0);
                let t = expectation(&witness, &a).unwrap();
                QuantumConstraint::new(a, t)
            })
            .collect();
        let report = solve_quantum(&prior, &constraints, &SolverOptions::default()).unwrap();
        assert!(report.converged);
        assert!((report.posterior.trace() - 1.0).abs() <= 1e-10);
        assert!(report.posterior.spectrum().min_eigenvalue() >= -1e-12);
        assert!(report.max_residual() <= 1e-10);
    }
}

#[test]
fn classical_subdomain_conditionals_preserved() {
    let prior = ClassicalDistribution::<f64>::uniform(4);
    let report = solve_classical(
        &prior,
        &[
            ClassicalConstraint::new(vec![1.0, 1.0, 0.0, 0.0], 0.5),
            ClassicalConstraint::new(vec![1.0, 2.0, 0.0, 0.0], 0.8),
        ],
        &SolverOptions::with_tol(1e-13),
    )
    .unwrap();
    // p1 + p2 = 0.5, p1 + 2 p2 = 0.8
    let expected = [0.2, 0.3, 0.25, 0.25];
    for (p, e) in report.posterior.weights().iter().zip(expected) {
        assert!((p - e).abs() < 1e-12);
    }
}
