//! Randomized invariants with shrinking, complementing the fixed-seed
//! sweeps in the unit tests.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use schur_core::linalg::max_abs;
use schur_core::{
    decompose, decompose_perm, dim_q, multiplicity, partitions, reconstruct, valid_sources,
};

/// A unitary assembled from random two-level rotations and phases; every
/// such product is exactly unitary up to rounding, whatever the draws.
fn random_unitary(dim: usize, rotations: usize, seed: u64) -> DMatrix<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = DMatrix::identity(dim, dim);
    for _ in 0..rotations {
        let p = rng.gen_range(0..dim);
        let q = (p + rng.gen_range(1..dim)) % dim;
        let (p, q) = (p.min(q), p.max(q));
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let (c, s) = (theta.cos(), theta.sin());
        let w = C64::from_polar(1.0, phi);
        let mut g = DMatrix::identity(dim, dim);
        g[(p, p)] = C64::new(c, 0.0);
        g[(p, q)] = -s * w.conj();
        g[(q, p)] = C64::new(s, 0.0) * w;
        g[(q, q)] = C64::new(c, 0.0);
        u = g * u;
    }
    u
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decompose_round_trips_any_unitary(
        dim in 2usize..10,
        rotations in 0usize..30,
        seed in any::<u64>(),
    ) {
        let u = random_unitary(dim, rotations, seed);
        let factors = decompose(&u).unwrap();
        let err = max_abs(&(reconstruct(&factors, dim) - &u));
        prop_assert!(err <= 1e-10, "round trip error {err:.3e}");
    }

    #[test]
    fn permutations_round_trip_exactly(len in 2usize..48, seed in any::<u64>()) {
        let mut perm: Vec<usize> = (0..len).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let rotations = decompose_perm(&perm);
        let rebuilt = reconstruct(&rotations, len);
        for (i, &dest) in perm.iter().enumerate() {
            // `i` is routed to `dest` with weight exactly one.
            prop_assert_eq!(rebuilt[(dest, i)], C64::new(1.0, 0.0));
        }
    }
}

proptest! {
    #[test]
    fn multiplicity_satisfies_the_branching_recursion(n in 2u32..12, pick in any::<u64>()) {
        let shapes = partitions(n, n as usize);
        let shape = &shapes[(pick % shapes.len() as u64) as usize];
        let from_sources: u64 = valid_sources(shape, n as usize)
            .iter()
            .map(multiplicity)
            .sum();
        prop_assert_eq!(multiplicity(shape), from_sources);
    }

    #[test]
    fn irrep_dimensions_tile_the_space_for_any_local_dimension(
        n in 1u32..8,
        d in 2usize..5,
    ) {
        let mut sum: u128 = 0;
        for shape in partitions(n, d) {
            sum += u128::from(multiplicity(&shape)) * u128::from(dim_q(&shape, d));
        }
        prop_assert_eq!(sum, (d as u128).pow(n));
    }

    #[test]
    fn add_box_then_remove_box_is_the_identity(n in 1u32..10, pick in any::<u64>()) {
        let shapes = partitions(n, n as usize);
        let shape = &shapes[(pick % shapes.len() as u64) as usize];
        for row in 0..=shape.degree() {
            if let Some(grown) = shape.add_box(row, n as usize + 1) {
                prop_assert_eq!(&grown.remove_box(row).unwrap(), shape);
            }
        }
    }
}
