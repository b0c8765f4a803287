// Copyright 2026 The Bipartite Landscape Authors
// SPDX-License-Identifier: Apache-2.0

//! Seeded random matrices.
//!
//! Every random draw in the crate goes through [`SeededRng`] (ChaCha20,
//! seeded with `seed_from_u64`), whose stream is fixed across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c64, CMatrix, C64};

pub type SeededRng = ChaCha20Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Matrix with i.i.d. entries `x + iy`, `x, y ~ N(0, 1)`, filled column-major.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for z in m.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z = c64(re, im);
    }
    m
}

/// `(X + X^dag)/2` of a complex Gaussian matrix.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let x = gaussian_matrix(rng, n, n);
    (&x + x.adjoint()).scale(0.5)
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the
/// phases of `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let z = gaussian_matrix(rng, n, n);
    let qr = z.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for x in q.column_mut(j).iter_mut() {
            *x *= phase;
        }
    }
    q
}

/// Vector of i.i.d. `N(0, scale^2)` reals.
pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, len: usize, scale: f64) -> Vec<f64> {
    (0..len)
        .map(|_| {
            let x: f64 = rng.sample(StandardNormal);
            scale * x
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_deviation, unitarity_deviation};

    #[test]
    fn same_seed_same_stream() {
        let a = gaussian_matrix(&mut seeded_rng(11), 3, 3);
        let b = gaussian_matrix(&mut seeded_rng(11), 3, 3);
        assert_eq!(a, b);
        let c = gaussian_matrix(&mut seeded_rng(12), 3, 3);
        assert_ne!(a, c);
    }

    #[test]
    fn samples_have_their_tags() {
        let mut rng = seeded_rng(3);
        assert_eq!(hermitian_deviation(&random_hermitian(&mut rng, 5)), 0.0);
        for n in 1..6 {
            assert!(unitarity_deviation(&haar_unitary(&mut rng, n)) < 1e-12);
        }
    }
}
