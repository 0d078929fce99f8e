use complementarity::linalg::{
    fidelity_unitary_pair, hermitian_eig, kron, partial_trace_detector, trace_norm, CMatrix,
};
use complementarity::qubit::{
    bloch_to_matrix, decompose, matrix_to_bloch, random_detector_state, random_qubit_state,
    random_unitary, BinaryQubitObservable, BlochVector, Effect,
};
use complementarity::rng;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn random_hermitian(d: usize, seed: u64) -> CMatrix {
    let mut r = rng::seeded(seed);
    let mut a = CMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            a[(i, j)] = Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        }
    }
    a.hermitian_part()
}

fn random_matrix(d: usize, seed: u64) -> CMatrix {
    let mut r = rng::seeded(seed);
    let mut a = CMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            a[(i, j)] = Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        }
    }
    a
}

proptest! {
    #[test]
    fn eigen_reconstruction(d in 2usize..=8, seed in any::<u64>()) {
        let a = random_hermitian(d, seed);
        let eig = hermitian_eig(&a).unwrap();
        prop_assert!(eig.reconstruct().max_abs_diff(&a) <= 1e-10, "seed {seed}");
        prop_assert!(eig.eigenvectors.orthonormality_defect() <= 1e-10);
        for k in 0..d {
            let v = eig.eigenvectors.column(k);
            let av: Vec<Complex64> = (0..d)
                .map(|i| (0..d).map(|j| a[(i, j)] * v[j]).sum())
                .collect();
            let resid = av
                .iter()
                .zip(&v)
                .map(|(x, y)| (x - y * eig.eigenvalues[k]).norm())
                .fold(0.0, f64::max);
            prop_assert!(resid <= 1e-10 * a.max_abs().max(1.0));
        }
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eigen_is_deterministic_with_phase_convention(d in 2usize..=6, seed in any::<u64>()) {
        let a = random_hermitian(d, seed);
        let first = hermitian_eig(&a).unwrap();
        let second = hermitian_eig(&a).unwrap();
        prop_assert_eq!(&first.eigenvectors, &second.eigenvectors);
        for k in 0..d {
            let lead = first.eigenvectors.column(k).into_iter().find(|z| z.norm() > 1e-10).unwrap();
            prop_assert!(lead.im.abs() < 1e-14 && lead.re > 0.0);
        }
    }

    #[test]
    fn trace_norm_matches_spectrum_and_bounds_trace(d in 2usize..=8, seed in any::<u64>()) {
        let a = random_hermitian(d, seed);
        let eig = hermitian_eig(&a).unwrap();
        let from_eig: f64 = eig.eigenvalues.iter().map(|l| l.abs()).sum();
        let tn = trace_norm(&a).unwrap();
        prop_assert!((tn - from_eig).abs() < 1e-12);
        prop_assert!(tn + 1e-12 >= a.trace().re.abs());
    }

    #[test]
    fn trace_norm_unitarily_invariant(d in 2usize..=8, seed in any::<u64>()) {
        let a = random_hermitian(d, seed);
        let u = random_unitary(d, seed.wrapping_add(1)).unwrap();
        let rotated = a.conjugate_by(&u).hermitian_part();
        prop_assert!((trace_norm(&a).unwrap() - trace_norm(&rotated).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn partial_trace_of_product(d in 2usize..=8, seed in any::<u64>()) {
        let rho = random_qubit_state(seed);
        let x = random_matrix(d, seed ^ 0xff);
        let reduced = partial_trace_detector(&kron(rho.matrix(), &x), d).unwrap();
        let expected = rho.matrix().scale(x.trace());
        prop_assert!(reduced.max_abs_diff(&expected) < 1e-13);
    }

    #[test]
    fn partial_trace_preserves_trace(d in 2usize..=8, seed in any::<u64>()) {
        let m = random_matrix(2 * d, seed);
        let reduced = partial_trace_detector(&m, d).unwrap();
        prop_assert!((reduced.trace() - m.trace()).norm() < 1e-12);
    }

    #[test]
    fn effect_roundtrip(bias in 0.0f64..=1.0, seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let dir = complementarity::qubit::random_direction(&mut r);
        let len = r.random::<f64>() * bias.min(1.0 - bias);
        let e = bloch_to_matrix(dir.scale(len), bias).unwrap();
        let (b2, v2) = matrix_to_bloch(&e);
        prop_assert!((b2 - bias).abs() < 1e-12);
        prop_assert!((v2 - dir.scale(len)).norm() < 1e-12);
    }
}

#[test]
fn fidelity_in_unit_interval_and_matches_bloch_form() {
    for seed in 0..10_000u64 {
        let rho = random_detector_state(2, seed).unwrap();
        let u = random_unitary(2, seed + 1_000_000).unwrap();
        let f = fidelity_unitary_pair(&rho, &u).unwrap();
        assert!((0.0..=1.0).contains(&f), "seed {seed}: F = {f}");
        let alpha = decompose(&rho).1.scale(2.0);
        let beta = decompose(&rho.conjugate_by(&u)).1.scale(2.0);
        let (a, b) = (alpha.dot(&alpha), alpha.dot(&beta));
        assert!(
            (f - (1.0 - (a - b) / 2.0).sqrt()).abs() < 1e-12,
            "seed {seed}"
        );
    }
}

#[test]
fn effect_validity_matches_bloch_norm_rule() {
    let mut r = rng::seeded(0xe44ec7);
    let mut valid = 0;
    for i in 0..10_000 {
        let bias: f64 = r.random_range(-0.1..1.1);
        let v = BlochVector::new(
            r.random_range(-0.7..0.7),
            r.random_range(-0.7..0.7),
            r.random_range(-0.7..0.7),
        );
        let by_norm = v.norm() <= bias.min(1.0 - bias);
        let by_spectrum = bloch_to_matrix(v, bias).is_ok();
        // Skip draws within rounding of the boundary.
        if (v.norm() - bias.min(1.0 - bias)).abs() < 1e-9 {
            continue;
        }
        assert_eq!(by_norm, by_spectrum, "draw {i}: bias {bias}, v {v:?}");
        let obs = BinaryQubitObservable { bias, vector: v };
        assert_eq!(obs.is_valid(), by_norm, "draw {i}");
        if by_norm {
            valid += 1;
            assert!(Effect::new(obs.effect1()).is_ok());
        }
    }
    assert!(valid > 100);
}

#[test]
fn random_generators_produce_valid_objects() {
    for seed in 0..10_000u64 {
        let s = random_qubit_state(seed);
        assert!(s.bloch().norm() <= 1.0 + 1e-10, "seed {seed}");
        let eig = hermitian_eig(s.matrix()).unwrap();
        assert!(eig.min_eigenvalue() >= -1e-10, "seed {seed}");
    }
    for seed in 0..2_000u64 {
        let d = 2 + (seed as usize % 7);
        let u = random_unitary(d, seed).unwrap();
        assert!(u.unitarity_defect() <= 1e-10, "seed {seed}");
        let rho = random_detector_state(d, seed).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-12, "seed {seed}");
        assert!(
            hermitian_eig(&rho).unwrap().min_eigenvalue() >= -1e-10,
            "seed {seed}"
        );
    }
}
