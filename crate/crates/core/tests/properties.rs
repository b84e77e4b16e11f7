use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;
use sympidx::flows::{expm, Rational};
use sympidx::indices::{mean_index, PathGenerator, SymplecticPath};
use sympidx::linalg::{max_abs, Mat};
use sympidx::pathio::{read_matrix, read_path, write_matrix, write_path, Metadata};
use sympidx::random::{draw, hamiltonian_matrix, Family, SeededRng};
use sympidx::rho::{compute_rho, rotation};
use sympidx::sympcore::{symplectic_inverse, symplectic_residual, validate_symplectic};

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![
        Just(Family::Orthogonal),
        Just(Family::Triangular),
        Just(Family::Generic)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_matrices_are_symplectic(seed in any::<u64>(), n in 1usize..=4, fam in family()) {
        let mut rng = SeededRng::new(seed, 0);
        let m = draw(&mut rng, n, fam);
        prop_assert!(symplectic_residual(&m) <= 1e-10);
        let again = draw(&mut SeededRng::new(seed, 0), n, fam);
        prop_assert_eq!(m, again);
    }

    #[test]
    fn rho_is_on_the_circle_and_conjugates_under_inverse(seed in any::<u64>(), n in 1usize..=4, fam in family()) {
        let m = draw(&mut SeededRng::new(seed, 1), n, fam);
        let inv = symplectic_inverse(&m);
        let r = compute_rho(&validate_symplectic(m, 1e-9).unwrap()).unwrap();
        let ri = compute_rho(&validate_symplectic(inv, 1e-8).unwrap()).unwrap();
        prop_assert!((r.norm() - 1.0).abs() < 1e-12);
        prop_assert!((ri - r.conj()).norm() < 1e-8);
    }

    #[test]
    fn matrix_documents_round_trip(seed in any::<u64>(), n in 1usize..=3) {
        let m = draw(&mut SeededRng::new(seed, 2), n, Family::Generic);
        let sm = validate_symplectic(m, 1e-9).unwrap();
        let bytes = write_matrix(&sm, &Metadata::new()).unwrap();
        let (back, _) = read_matrix(&bytes).unwrap();
        prop_assert_eq!(back.entries(), sm.entries());
        prop_assert_eq!(write_matrix(&back, &Metadata::new()).unwrap(), bytes);
    }

    #[test]
    fn path_documents_round_trip(seed in any::<u64>(), n in 1usize..=2, samples in 2usize..12) {
        let x = hamiltonian_matrix(&mut SeededRng::new(seed, 3), n, 0.5);
        let gen: PathGenerator = Arc::new(move |t| expm(&(&x * t)));
        let p = SymplecticPath::from_generator(n, samples, gen, 1e-9).unwrap();
        let bytes = write_path(&p, &Metadata::new()).unwrap();
        let (back, _) = read_path(&bytes).unwrap();
        prop_assert_eq!(back.frames(), p.frames());
        prop_assert_eq!(back.times(), p.times());
        prop_assert_eq!(write_path(&back, &Metadata::new()).unwrap(), bytes);
    }

    #[test]
    fn rotation_mean_index_is_twice_the_turns(theta in -3.0f64..3.0) {
        let gen: PathGenerator = Arc::new(move |t| rotation(1, 2.0 * PI * theta * t));
        let p = SymplecticPath::from_generator(1, 48, gen, 1e-9).unwrap();
        prop_assert!((mean_index(&p).unwrap().value() - 2.0 * theta).abs() < 1e-9);
    }

    #[test]
    fn mean_index_is_conjugation_invariant(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = SeededRng::new(seed, 4);
        let x = hamiltonian_matrix(&mut rng, n, 1.0);
        let b = draw(&mut rng, n, Family::Generic);
        let b_inv = symplectic_inverse(&b);
        let x2 = x.clone();
        let base: PathGenerator = Arc::new(move |t| expm(&(&x2 * t)));
        let conj: PathGenerator = Arc::new(move |t| &b * expm(&(&x * t)) * &b_inv);
        let d0 = mean_index(&SymplecticPath::from_generator(n, 64, base, 1e-9).unwrap()).unwrap();
        let d1 = mean_index(&SymplecticPath::from_generator(n, 64, conj, 1e-8).unwrap()).unwrap();
        prop_assert!((d0.value() - d1.value()).abs() < 1e-8);
    }

    #[test]
    fn rationals_print_and_parse_back(num in -1000i64..1000, den in 1i64..1000) {
        let r = Rational::new(num, den).unwrap();
        prop_assert_eq!(Rational::parse(&r.to_string()).unwrap(), r);
    }

    #[test]
    fn exponential_of_hamiltonian_is_symplectic(seed in any::<u64>(), n in 1usize..=4, scale in 0.01f64..2.0) {
        let x = hamiltonian_matrix(&mut SeededRng::new(seed, 5), n, scale);
        let e = expm(&x);
        prop_assert!(symplectic_residual(&e) <= 1e-10 * (1.0 + max_abs(&e)).powi(2));
        let back = expm(&(-x));
        prop_assert!(max_abs(&(&e * back - Mat::identity(2 * n, 2 * n))) < 1e-9 * (1.0 + max_abs(&e)).powi(2));
    }
}
