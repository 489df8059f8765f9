//! Deterministic built-in targets and benchmark combinations shared by the
//! command-line runner and the acceptance suite.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dictionaries::{BarronAtom, RidgeAtom};
use crate::domain::BoxDomain;
use crate::varnorm::SparseCombination;

fn unit_direction(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim)
            .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
            .collect();
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

/// Random ridge combination with kinks inside the domain: directions
/// uniform on the sphere, offsets uniform over the hyperplane-crossing
/// range, coefficients of magnitude in `[0.1, 1]` with random signs.
pub fn random_p1_combination(
    domain: &BoxDomain,
    count: usize,
    seed: u64,
) -> SparseCombination<RidgeAtom> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reach = domain.max_point_norm();
    let mut atoms = Vec::with_capacity(count);
    let mut coefficients = Vec::with_capacity(count);
    for _ in 0..count {
        let omega = unit_direction(domain.dim(), &mut rng);
        let b: f64 = rng.random_range(-reach..reach);
        let magnitude: f64 = rng.random_range(0.1..1.0);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        atoms.push(RidgeAtom::new(1, omega, b).expect("unit direction"));
        coefficients.push(sign * magnitude);
    }
    SparseCombination::new(atoms, coefficients)
}

/// The fixed 50-atom benchmark on `[-1, 1]²` used by the sampling-rate
/// experiment.
pub fn benchmark_fifty() -> (BoxDomain, SparseCombination<RidgeAtom>) {
    let domain = BoxDomain::symmetric_cube(2);
    let combination = random_p1_combination(&domain, 50, 7);
    (domain, combination)
}

/// A random normalized ReLU unit whose offset ranges over all three
/// decomposition cases (inside the window, vanishing, affine).
pub fn random_barron_atom(dim: usize, rng: &mut ChaCha8Rng) -> BarronAtom {
    loop {
        let omega: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let b: f64 = rng.random_range(-6.0..6.0);
        if let Ok(atom) = BarronAtom::new(omega, b) {
            return atom;
        }
    }
}

/// A random ridge atom with offset in the window `[c1, c2]`.
pub fn random_ridge_atom(dim: usize, k: u32, c1: f64, c2: f64, rng: &mut ChaCha8Rng) -> RidgeAtom {
    let omega = unit_direction(dim, rng);
    let b: f64 = rng.random_range(c1..c2);
    RidgeAtom::new(k, omega, b).expect("unit direction")
}
