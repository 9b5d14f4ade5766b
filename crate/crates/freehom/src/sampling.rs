//! Seeded random inputs for property sweeps and benchmarks.

use std::f64::consts::TAU;

use freehom_core::geometry::PhaseConfig;
use freehom_core::permanent::ComplexMatrix;
use freehom_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SweepRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SweepRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries with independent standard-normal real and imaginary parts.
pub fn random_complex_matrix(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
    .expect("finite gaussian entries")
}

/// `n` phases uniform in `[0, 2π)`.
pub fn random_phases(rng: &mut impl Rng, n: usize) -> PhaseConfig {
    PhaseConfig::new((0..n).map(|_| rng.random_range(0.0..TAU)).collect()).expect("finite phases")
}

/// Unitary from modified Gram-Schmidt on the rows of a complex Gaussian matrix.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let g = random_complex_matrix(rng, n);
    let mut rows: Vec<Vec<Complex64>> = (0..n).map(|r| g.row(r).to_vec()).collect();
    for i in 0..n {
        for j in 0..i {
            let (done, rest) = rows.split_at_mut(i);
            let proj: Complex64 = rest[0]
                .iter()
                .zip(&done[j])
                .map(|(a, b)| a * b.conj())
                .sum();
            for (a, b) in rest[0].iter_mut().zip(&done[j]) {
                *a -= proj * b;
            }
        }
        let norm = rows[i].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        rows[i].iter_mut().for_each(|z| *z /= norm);
    }
    ComplexMatrix::from_rows(&rows).expect("square unitary")
}

/// A uniformly random permutation of `0..n`.
pub fn random_permutation(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        p.swap(i, rng.random_range(0..=i));
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitaries_are_unitary() {
        let mut r = rng(3);
        for n in 1..=8 {
            assert!(random_unitary(&mut r, n).unitarity_defect() < 1e-12);
        }
    }

    #[test]
    fn seeded_streams_repeat() {
        let a = random_complex_matrix(&mut rng(42), 4);
        let b = random_complex_matrix(&mut rng(42), 4);
        assert_eq!(a, b);
    }

    #[test]
    fn permutations_are_permutations() {
        let mut r = rng(5);
        for n in 0..10 {
            let mut p = random_permutation(&mut r, n);
            p.sort_unstable();
            assert_eq!(p, (0..n).collect::<Vec<_>>());
        }
    }
}
