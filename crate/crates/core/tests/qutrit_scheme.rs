//! End-to-end checks of the two-qutrit measurement scheme: the four composed
//! measurements, their probability tables on the reference states, and the
//! detection pipeline built on top of them.

use fgsep::bounds::{mum_bound, qutrit_three_bound};
use fgsep::composer::{compose_povm, cyclic_partition, qutrit_suite};
use fgsep::detector::{evaluate, ppt_check, threshold_bisect, BISECT_TOL, DetectorError};
use fgsep::linalg::{hermitian_eigensystem, tensor_product, ComplexMatrix};
use fgsep::measurements::{generalized_pauli, measure, prime_mub_set, smooth_mum, Povm};
use fgsep::states::{
    classically_correlated_qutrit, completely_mixed, paired_entangled, pure_state, werner_mixture,
    DensityMatrix, Ket,
};
use num_complex::Complex64;

fn suite() -> Vec<Povm> {
    qutrit_suite().unwrap()
}

/// (1/√3)(|z₀x₀⟩ + |z₁x₂⟩ + |z₂x₁⟩): the target the scheme detects best.
fn paired_target() -> Ket {
    let mubs = prime_mub_set(3).unwrap();
    paired_entangled(mubs.basis(0), mubs.basis(1), &[0, 2, 1]).unwrap()
}

/// (1/√3)(|00⟩ + |11⟩ + |22⟩): maximally entangled but flat on this suite.
fn diagonal_target() -> Ket {
    let mubs = prime_mub_set(3).unwrap();
    paired_entangled(mubs.basis(0), mubs.basis(0), &[0, 1, 2]).unwrap()
}

#[test]
fn probability_tables_on_the_reference_states() {
    let suite = suite();
    let close = |probs: &[f64], expected: &[f64]| {
        probs
            .iter()
            .zip(expected)
            .all(|(p, e)| (p - e).abs() < 1e-12)
    };

    let psi = pure_state(&paired_target(), (3, 3)).unwrap();
    let expected: [&[f64]; 4] = [
        &[1.0, 0.0, 0.0],
        &[1.0, 0.0, 0.0],
        &[0.0, 1.0, 0.0],
        &[1.0 / 3.0; 3],
    ];
    for (povm, row) in suite.iter().zip(expected) {
        let probs = measure(povm, &psi).unwrap();
        assert!(close(&probs, row), "{}: {probs:?}", povm.name());
    }

    let phi = pure_state(&diagonal_target(), (3, 3)).unwrap();
    for povm in &suite {
        let probs = measure(povm, &phi).unwrap();
        assert!(close(&probs, &[1.0 / 3.0; 3]), "{}: {probs:?}", povm.name());
    }

    let zz = classically_correlated_qutrit();
    for povm in &suite {
        let probs = measure(povm, &zz).unwrap();
        assert!(close(&probs, &[1.0 / 3.0; 3]), "{}: {probs:?}", povm.name());
    }
}

#[test]
fn composed_elements_are_total_eigenvalue_projectors() {
    let suite = suite();
    let (z, x) = generalized_pauli(3).unwrap();
    let omega = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let generators = [
        tensor_product(&z, &x),
        tensor_product(&x, &z),
        tensor_product(&z.matmul(&x), &z.matmul(&x)),
        tensor_product(&z.matmul(&x.pow(2)), &z.matmul(&x.pow(2))),
    ];
    for (povm, g) in suite.iter().zip(&generators) {
        let mut total = ComplexMatrix::zeros(9);
        for (k, el) in povm.elements().iter().enumerate() {
            // G · Λ_k = ω^k · Λ_k: the element spans the ω^k eigenspace of G.
            let lhs = g.matmul(el);
            let rhs = el.scale_c(omega.powu(k as u32));
            assert!(
                lhs.max_abs_diff(&rhs) < 1e-12,
                "{} outcome {k}",
                povm.name()
            );
            // Rank-3 projector: spectrum {0⁶, 1³}.
            let eig = hermitian_eigensystem(el, 1e-10).unwrap();
            let ones = eig.eigenvalues.iter().filter(|l| (**l - 1.0).abs() < 1e-10).count();
            let zeros = eig.eigenvalues.iter().filter(|l| l.abs() < 1e-10).count();
            assert_eq!((ones, zeros), (3, 6), "{} outcome {k}", povm.name());
            total = total.add(el);
        }
        assert!(total.max_abs_diff(&ComplexMatrix::identity(9)) < 1e-12);
    }
}

#[test]
fn paired_target_couples_each_standard_ket_to_one_shift_ket() {
    let mubs = prime_mub_set(3).unwrap();
    let psi = paired_target();
    let r = 1.0 / 3.0f64.sqrt();
    for i in 0..3 {
        for j in 0..3 {
            let product = mubs.basis(0)[i].tensor(&mubs.basis(1)[j]);
            let amp = product.inner(&psi).norm();
            let expected = if [0, 2, 1][i] == j { r } else { 0.0 };
            assert!((amp - expected).abs() < 1e-12, "pair ({i}, {j}): {amp}");
        }
    }
}

#[test]
fn detection_pipeline_on_white_noise_mixtures() {
    let aligned: Vec<Povm> = suite().into_iter().take(3).collect();
    let bound = qutrit_three_bound();
    let mixed = completely_mixed((3, 3));
    let psi = paired_target();

    let at = |s: f64| {
        let state = werner_mixture(&mixed, &psi, s).unwrap();
        evaluate(&state, &aligned, &bound).unwrap()
    };
    let hot = at(0.6);
    assert!(hot.violated);
    assert!((hot.sum_pmax - 2.2).abs() < 1e-10);
    assert!((hot.margin - (2.2 - bound.value)).abs() < 1e-10);
    let cold = at(0.5);
    assert!(!cold.violated);

    // Detection kicks in well after the partial-transpose criterion.
    let ppt_at = |s: f64| {
        ppt_check(&werner_mixture(&mixed, &psi, s).unwrap())
            .unwrap()
            .certified_entangled
    };
    assert!(ppt_at(0.3) && ppt_at(0.6));
    assert!(!ppt_at(0.2));
}

#[test]
fn flat_target_family_never_crosses_the_bound() {
    let aligned: Vec<Povm> = suite().into_iter().take(3).collect();
    let bound = qutrit_three_bound();
    let mixed = completely_mixed((3, 3));
    let phi = diagonal_target();
    for step in 0..=10 {
        let s = step as f64 / 10.0;
        let state = werner_mixture(&mixed, &phi, s).unwrap();
        let report = evaluate(&state, &aligned, &bound).unwrap();
        assert!((report.sum_pmax - 1.0).abs() < 1e-10, "s = {s}");
        assert!(!report.violated);
    }
    let err = threshold_bisect(
        |s| werner_mixture(&mixed, &phi, s),
        &aligned,
        &bound,
        BISECT_TOL,
    );
    assert!(matches!(err, Err(DetectorError::NoSignChange { .. })));
}

#[test]
fn smoothed_measurements_detect_with_the_efficiency_bound() {
    // Composing the smoothed (μ = 0.9) unbiased measurements the same way
    // keeps the paired target detectable against the κ-dependent bound:
    // each aligned measurement yields p_max = κ on the target.
    let mu = 0.9f64;
    let mums = smooth_mum(&prime_mub_set(3).unwrap(), mu).unwrap();
    let family = cyclic_partition(3);
    let p = mums.povms();
    let smoothed = [
        compose_povm(&p[0], &p[1], &family).unwrap(),
        compose_povm(&p[1], &p[0], &family).unwrap(),
        compose_povm(&p[2], &p[2], &family).unwrap(),
    ];
    let kappa = mums.kappa();
    let bound = mum_bound(3, 3, kappa).unwrap();
    let psi = pure_state(&paired_target(), (3, 3)).unwrap();
    let report = evaluate(&psi, &smoothed, &bound).unwrap();
    assert!(
        (report.sum_pmax - 3.0 * kappa).abs() < 1e-9,
        "sum = {}",
        report.sum_pmax
    );
    assert!(report.violated);

    // The completely mixed state stays far below the bound.
    let mixed = completely_mixed((3, 3));
    let report = evaluate(&mixed, &smoothed, &bound).unwrap();
    assert!((report.sum_pmax - 1.0).abs() < 1e-10);
    assert!(!report.violated);
}

#[test]
fn werner_states_over_classical_noise_share_the_threshold() {
    let aligned: Vec<Povm> = suite().into_iter().take(3).collect();
    let bound = qutrit_three_bound();
    let zz = classically_correlated_qutrit();
    let psi = paired_target();
    let result = threshold_bisect(
        |s| werner_mixture(&zz, &psi, s),
        &aligned,
        &bound,
        BISECT_TOL,
    )
    .unwrap();
    let reference = (std::f64::consts::PI / 18.0).cos() / 3.0f64.sqrt();
    assert!((result.s_star - reference).abs() < 1e-6);
    // The replaced noise term leaves the probability sums untouched.
    for step in 0..=4 {
        let s = step as f64 / 4.0;
        let a = evaluate(&werner_mixture(&zz, &psi, s).unwrap(), &aligned, &bound).unwrap();
        let b = evaluate(
            &werner_mixture(&completely_mixed((3, 3)), &psi, s).unwrap(),
            &aligned,
            &bound,
        )
        .unwrap();
        assert!((a.sum_pmax - b.sum_pmax).abs() < 1e-10, "s = {s}");
    }
}

#[test]
fn partial_transpose_threshold_is_shared_between_targets() {
    // Both maximally entangled targets hit the partial-transpose boundary at
    // the same mixing weight, even though only one is detected by the suite.
    let mixed = completely_mixed((3, 3));
    for target in [paired_target(), diagonal_target()] {
        let min_at = |s: f64| {
            ppt_check(&werner_mixture(&mixed, &target, s).unwrap())
                .unwrap()
                .min_eigenvalue
        };
        assert!(min_at(0.24) > 0.0);
        assert!(min_at(0.25).abs() < 1e-10);
        assert!(min_at(0.26) < 0.0);
    }
}

#[test]
fn pure_target_state_is_maximally_entangled() {
    for target in [paired_target(), diagonal_target()] {
        let rho = pure_state(&target, (3, 3)).unwrap();
        for side in [fgsep::linalg::Subsystem::A, fgsep::linalg::Subsystem::B] {
            let reduced = rho.reduced(side).unwrap();
            let reduced = DensityMatrix::new(reduced, (3, 1)).unwrap();
            assert!(
                reduced
                    .matrix()
                    .max_abs_diff(&ComplexMatrix::identity(3).scale(1.0 / 3.0))
                    < 1e-12
            );
        }
    }
}
