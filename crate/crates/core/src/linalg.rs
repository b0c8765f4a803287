// Copyright 2026 The Bipartite Landscape Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are `nalgebra` dynamic matrices. Indexing is `(row, col)` with
//! zero-based indices; storage is column-major, so [`vec`] is a plain copy
//! of the storage slice.
//!
//! Unitary eigenphases and matrix logarithms use the principal branch
//! `(-pi, pi]`, and eigenphases are returned in descending order.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;
pub type RMatrix = DMatrix<f64>;
pub type RVector = DVector<f64>;

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Absolute tolerance on `max|U^dag U - I|` for accepting a matrix as unitary.
pub const UNITARY_TOL: f64 = 1e-10;
/// Relative eigenvalue gap below which [`spectral_integral`] uses the
/// degenerate limit of the divided difference.
pub const DEGENERATE_GAP: f64 = 1e-12;

const SOLVER_EPS: f64 = f64::EPSILON;
const SCHUR_MAX_ITER: usize = 10_000;
const SCHUR_EPS_LADDER: [f64; 4] = [
    f64::EPSILON,
    4.0 * f64::EPSILON,
    16.0 * f64::EPSILON,
    64.0 * f64::EPSILON,
];
/// Relative reconstruction residual above which a factorization is rejected.
const RESIDUAL_TOL: f64 = 1e-10;
const JACOBI_MAX_SWEEPS: usize = 100;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Largest entry modulus.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn max_abs_real(a: &RMatrix) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn is_finite(a: &CMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `max|X - X^dag|`.
pub fn hermitian_deviation(a: &CMatrix) -> f64 {
    max_abs(&(a - a.adjoint()))
}

/// `max|U^dag U - I|`.
pub fn unitarity_deviation(a: &CMatrix) -> f64 {
    let n = a.ncols();
    max_abs(&(a.adjoint() * a - identity(n)))
}

fn require_square(a: &CMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(a.nrows())
}

/// Checks the Hermitian tag: `max|X - X^dag| <= 1e-12 * max(1, max|X|)`.
pub fn check_hermitian(a: &CMatrix) -> Result<()> {
    require_square(a)?;
    if !is_finite(a) {
        return Err(Error::NonFinite("Hermitian check"));
    }
    let deviation = hermitian_deviation(a);
    if deviation > HERMITIAN_TOL * max_abs(a).max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Checks the unitary tag: `max|U^dag U - I| <= 1e-10`.
pub fn check_unitary(a: &CMatrix) -> Result<()> {
    require_square(a)?;
    if !is_finite(a) {
        return Err(Error::NonFinite("unitary check"));
    }
    let deviation = unitarity_deviation(a);
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

/// Kronecker product; for `b` of shape `p x q`,
/// `(a ⊗ b)[(i*p + k), (j*q + l)] = a[(i, j)] * b[(k, l)]`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Column-stacking vectorization.
pub fn vec(a: &CMatrix) -> CVector {
    CVector::from_column_slice(a.as_slice())
}

/// Inverse of [`vec`].
pub fn unvec(v: &CVector, rows: usize, cols: usize) -> Result<CMatrix> {
    if v.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "cannot reshape length {} into {rows}x{cols}",
            v.len()
        )));
    }
    Ok(CMatrix::from_column_slice(rows, cols, v.as_slice()))
}

/// Eigendecomposition `H = S diag(values) S^dag` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: RVector,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `S f(diag(values)) S^dag` for a complex-valued spectral function.
    pub fn apply<F: Fn(f64) -> C64>(&self, f: F) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let fj = f(lambda);
            for z in scaled.column_mut(j).iter_mut() {
                *z *= fj;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply(|l| c64(l, 0.0))
    }
}

pub fn eig_hermitian(h: &CMatrix) -> Result<HermitianEigen> {
    check_hermitian(h)?;
    let n = h.nrows();
    if n == 0 {
        return Ok(HermitianEigen {
            values: RVector::zeros(0),
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::try_new(sym, SOLVER_EPS, 0)
        .ok_or(Error::NoConvergence("Hermitian eigendecomposition"))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = RVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    let out = HermitianEigen { values, vectors };
    if max_abs(&(out.reconstruct() - h)) > RESIDUAL_TOL * max_abs(h).max(1.0) {
        return Err(Error::NoConvergence("Hermitian eigendecomposition"));
    }
    Ok(out)
}

/// `exp(-i t H)` for Hermitian `H`.
pub fn expm_i_hermitian(h: &CMatrix, t: f64) -> Result<CMatrix> {
    Ok(expm_from_eigen(&eig_hermitian(h)?, t))
}

/// `exp(-i t H)` from a precomputed eigendecomposition of `H`.
pub fn expm_from_eigen(eig: &HermitianEigen, t: f64) -> CMatrix {
    eig.apply(|l| C64::from_polar(1.0, -t * l))
}

/// Spectral decomposition `U = V diag(exp(i phases)) V^dag` of a unitary.
#[derive(Debug, Clone)]
pub struct UnitaryEigen {
    /// Principal eigenphases in `(-pi, pi]`, descending.
    pub phases: RVector,
    pub vectors: CMatrix,
}

impl UnitaryEigen {
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.phases.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let e = C64::from_polar(1.0, self.phases[j]);
            for z in scaled.column_mut(j).iter_mut() {
                *z *= e;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// Smallest distance between two eigenphases, measured on the circle.
    /// `f64::INFINITY` for dimension one.
    pub fn min_gap(&self) -> f64 {
        let n = self.phases.len();
        if n < 2 {
            return f64::INFINITY;
        }
        let mut gap = f64::INFINITY;
        for i in 0..n - 1 {
            gap = gap.min(self.phases[i] - self.phases[i + 1]);
        }
        // wrap-around between the smallest and largest phase
        gap.min(self.phases[n - 1] + 2.0 * PI - self.phases[0])
    }
}

/// Maps an angle to the principal branch `(-pi, pi]`.
pub fn principal_angle(theta: f64) -> f64 {
    let mut x = theta.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    x
}

/// Eigendecomposition of a unitary through its complex Schur form, which is
/// diagonal for normal matrices.
pub fn eig_unitary(u: &CMatrix) -> Result<UnitaryEigen> {
    check_unitary(u)?;
    let n = u.nrows();
    if n == 0 {
        return Ok(UnitaryEigen {
            phases: RVector::zeros(0),
            vectors: CMatrix::zeros(0, 0),
        });
    }
    for eps in SCHUR_EPS_LADDER {
        let Some(schur) = Schur::try_new(u.clone(), eps, SCHUR_MAX_ITER) else {
            continue;
        };
        let (q, t) = schur.unpack();
        let raw: Vec<f64> = (0..n)
            .map(|i| {
                let z = t[(i, i)];
                principal_angle(z.im.atan2(z.re))
            })
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| raw[b].total_cmp(&raw[a]));
        let phases = RVector::from_iterator(n, order.iter().map(|&i| raw[i]));
        let vectors = CMatrix::from_fn(n, n, |r, c| q[(r, order[c])]);
        let out = UnitaryEigen { phases, vectors };
        if max_abs(&(out.reconstruct() - u)) <= RESIDUAL_TOL {
            return Ok(out);
        }
    }
    Err(Error::NoConvergence("unitary eigendecomposition"))
}

/// `A = left diag(singular_values) right^dag`, singular values descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub left: CMatrix,
    pub singular_values: RVector,
    pub right: CMatrix,
}

impl Svd {
    pub fn nuclear_norm(&self) -> f64 {
        self.singular_values.iter().sum()
    }

    pub fn reconstruct(&self) -> CMatrix {
        let k = self.singular_values.len();
        let mut scaled = self.left.clone();
        for j in 0..k {
            let s = self.singular_values[j];
            for z in scaled.column_mut(j).iter_mut() {
                *z *= s;
            }
        }
        scaled * self.right.adjoint()
    }
}

/// Singular value decomposition by one-sided (Hestenes) Jacobi rotations.
pub fn svd(a: &CMatrix) -> Result<Svd> {
    if !is_finite(a) {
        return Err(Error::NonFinite("SVD input"));
    }
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        let k = m.min(n);
        return Ok(Svd {
            left: CMatrix::zeros(m, k),
            singular_values: RVector::zeros(k),
            right: CMatrix::zeros(n, k),
        });
    }
    let out = if m >= n {
        jacobi_svd(a)?
    } else {
        let t = jacobi_svd(&a.adjoint())?;
        Svd {
            left: t.right,
            singular_values: t.singular_values,
            right: t.left,
        }
    };
    if max_abs(&(out.reconstruct() - a)) > RESIDUAL_TOL * max_abs(a).max(1.0) {
        return Err(Error::NoConvergence("SVD"));
    }
    Ok(out)
}

/// Thin SVD of a matrix with at least as many rows as columns.
fn jacobi_svd(a: &CMatrix) -> Result<Svd> {
    let (m, n) = a.shape();
    let tol = (m as f64).sqrt() * f64::EPSILON;
    let mut work = a.clone();
    let mut v = identity(n);
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = work.column(p).norm_squared();
                let beta = work.column(q).norm_squared();
                let g = work.column(p).dotc(&work.column(q));
                let g_abs = g.norm();
                if g_abs == 0.0 || g_abs <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // phase-align the pair, then a real symmetric Jacobi rotation
                let phase = (g / g_abs).conj();
                let tau = (beta - alpha) / (2.0 * g_abs);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut work, p, q, c, s, phase);
                rotate_columns(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence("Jacobi SVD"));
    }
    let norms: Vec<f64> = (0..n).map(|j| work.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let singular_values = RVector::from_iterator(n, order.iter().map(|&j| norms[j]));
    let right = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    let mut left = CMatrix::zeros(m, n);
    let mut missing = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        if norms[j] > 0.0 {
            left.set_column(k, &work.column(j).unscale(norms[j]));
        } else {
            missing.push(k);
        }
    }
    complete_orthonormal(&mut left, &missing);
    Ok(Svd {
        left,
        singular_values,
        right,
    })
}

/// `[x, y] <- [c x - s e y, s x + c e y]` on columns `p, q` with `e` a unit phase.
fn rotate_columns(m: &mut CMatrix, p: usize, q: usize, c: f64, s: f64, phase: C64) {
    for r in 0..m.nrows() {
        let x = m[(r, p)];
        let y = m[(r, q)] * phase;
        m[(r, p)] = x * c - y * s;
        m[(r, q)] = x * s + y * c;
    }
}

/// Fills the listed columns with unit vectors orthogonal to all others.
fn complete_orthonormal(m: &mut CMatrix, missing: &[usize]) {
    let rows = m.nrows();
    let mut candidate = 0;
    for &k in missing {
        while candidate < rows {
            let mut x = CVector::zeros(rows);
            x[candidate] = c64(1.0, 0.0);
            candidate += 1;
            for j in 0..m.ncols() {
                if j == k || (missing.contains(&j) && m.column(j).norm() == 0.0) {
                    continue;
                }
                let proj = m.column(j).dotc(&x);
                x -= m.column(j) * proj;
            }
            let norm = x.norm();
            if norm > 0.5 {
                m.set_column(k, &x.unscale(norm));
                break;
            }
        }
    }
}

/// Singular values of a real matrix, descending.
pub fn singular_values_real(a: &RMatrix) -> RVector {
    if a.nrows() == 0 || a.ncols() == 0 {
        return RVector::zeros(0);
    }
    let z = a.map(|x| c64(x, 0.0));
    let dec = if z.nrows() >= z.ncols() { jacobi_svd(&z) } else { jacobi_svd(&z.transpose()) };
    match dec {
        Ok(d) => d.singular_values,
        Err(_) => RVector::from_element(a.nrows().min(a.ncols()), f64::NAN),
    }
}

/// `∫_0^t_max exp(iτH) X exp(-iτH) dτ`.
pub fn spectral_integral(h: &CMatrix, x: &CMatrix, t_max: f64) -> Result<CMatrix> {
    let eig = eig_hermitian(h)?;
    spectral_integral_from_eigen(&eig, x, t_max)
}

/// [`spectral_integral`] reusing an eigendecomposition of `H`.
pub fn spectral_integral_from_eigen(
    eig: &HermitianEigen,
    x: &CMatrix,
    t_max: f64,
) -> Result<CMatrix> {
    let n = eig.dim();
    if x.nrows() != n || x.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "spectral integral of a {}x{} operator under a {n}x{n} generator",
            x.nrows(),
            x.ncols()
        )));
    }
    if !(t_max > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "integration horizon must be positive, got {t_max}"
        )));
    }
    let s = &eig.vectors;
    let mut y = s.adjoint() * x * s;
    let scale = eig.values.amax().max(1.0);
    for k in 0..n {
        for j in 0..n {
            let d = eig.values[j] - eig.values[k];
            let psi = if d.abs() <= DEGENERATE_GAP * scale {
                c64(t_max, 0.0)
            } else {
                // (exp(i t d) - 1) / (i d)
                let (sin, cos) = (t_max * d).sin_cos();
                c64(sin / d, (1.0 - cos) / d)
            };
            y[(j, k)] *= psi;
        }
    }
    Ok(s * y * s.adjoint())
}

/// Orthonormal Hermitian operator basis, `Tr(B_a B_b) = δ_ab`.
///
/// Element order: `I/sqrt(n)` first, then for each pair `j < k` (row-major)
/// the symmetric `(E_jk + E_kj)/sqrt(2)` followed by the antisymmetric
/// `(-i E_jk + i E_kj)/sqrt(2)`, then the diagonal generators
/// `diag(1,...,1,-l,0,...)/sqrt(l(l+1))` for `l = 1..n-1`.
#[derive(Debug, Clone)]
pub struct HermitianBasis {
    dim: usize,
    elements: Vec<CMatrix>,
}

impl HermitianBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    /// `Σ_b φ_b B_b`.
    pub fn generator(&self, phi: &[f64]) -> Result<CMatrix> {
        if phi.len() != self.elements.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} basis coefficients, got {}",
                self.elements.len(),
                phi.len()
            )));
        }
        let mut g = CMatrix::zeros(self.dim, self.dim);
        for (b, &p) in self.elements.iter().zip(phi) {
            g += b.scale(p);
        }
        Ok(g)
    }

    /// Coefficients `Re Tr(B_b G)` of a Hermitian operator in this basis.
    pub fn coefficients(&self, g: &CMatrix) -> Vec<f64> {
        self.elements
            .iter()
            .map(|b| (b * g).trace().re)
            .collect()
    }
}

pub fn hermitian_basis(n: usize) -> Result<HermitianBasis> {
    if n == 0 {
        return Err(Error::InvalidArgument("basis dimension must be at least 1".into()));
    }
    let mut elements = Vec::with_capacity(n * n);
    elements.push(identity(n).scale(1.0 / (n as f64).sqrt()));
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..n {
        for k in j + 1..n {
            let mut sym = CMatrix::zeros(n, n);
            sym[(j, k)] = c64(r, 0.0);
            sym[(k, j)] = c64(r, 0.0);
            elements.push(sym);
            let mut anti = CMatrix::zeros(n, n);
            anti[(j, k)] = c64(0.0, -r);
            anti[(k, j)] = c64(0.0, r);
            elements.push(anti);
        }
    }
    for l in 1..n {
        let norm = ((l * (l + 1)) as f64).sqrt();
        let mut d = CMatrix::zeros(n, n);
        for i in 0..l {
            d[(i, i)] = c64(1.0 / norm, 0.0);
        }
        d[(l, l)] = c64(-(l as f64) / norm, 0.0);
        elements.push(d);
    }
    Ok(HermitianBasis { dim: n, elements })
}

/// Principal logarithm: Hermitian `G` with `exp(iG) = U`, eigenvalues in `(-pi, pi]`.
pub fn log_unitary(u: &CMatrix) -> Result<CMatrix> {
    let eig = eig_unitary(u)?;
    let n = eig.phases.len();
    let mut scaled = eig.vectors.clone();
    for j in 0..n {
        let w = eig.phases[j];
        for z in scaled.column_mut(j).iter_mut() {
            *z *= w;
        }
    }
    let g = scaled * eig.vectors.adjoint();
    Ok((&g + g.adjoint()).scale(0.5))
}

/// Pauli matrices `(σ_x, σ_y, σ_z)`.
pub fn pauli() -> [CMatrix; 3] {
    let z = c64(0.0, 0.0);
    let one = c64(1.0, 0.0);
    let i = c64(0.0, 1.0);
    [
        CMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        CMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{gaussian_matrix as random_matrix, haar_unitary as random_unitary, random_hermitian};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn kron_identity_and_diagonal() {
        assert_eq!(kron(&identity(2), &identity(2)), identity(4));
        let [_, _, sz] = pauli();
        let k = kron(&sz, &identity(2));
        let expect = CMatrix::from_diagonal(&CVector::from_vec(vec![
            c64(1.0, 0.0),
            c64(1.0, 0.0),
            c64(-1.0, 0.0),
            c64(-1.0, 0.0),
        ]));
        assert_eq!(k, expect);
    }

    #[test]
    fn kron_matches_index_formula() {
        let mut r = rng(1);
        let a = random_matrix(&mut r, 2, 3);
        let b = random_matrix(&mut r, 3, 2);
        let k = kron(&a, &b);
        assert_eq!(k.shape(), (6, 6));
        for i in 0..2 {
            for j in 0..3 {
                for p in 0..3 {
                    for q in 0..2 {
                        assert_eq!(k[(i * 3 + p, j * 2 + q)], a[(i, j)] * b[(p, q)]);
                    }
                }
            }
        }
    }

    #[test]
    fn vec_is_column_stacking() {
        let v = vec(&identity(2));
        assert_eq!(v.as_slice(), &[c64(1., 0.), c64(0., 0.), c64(0., 0.), c64(1., 0.)]);
        let a = CMatrix::from_row_slice(
            2,
            3,
            &[1., 2., 3., 4., 5., 6.].map(|x| c64(x, 0.0)),
        );
        let v = vec(&a);
        let expect = [1., 4., 2., 5., 3., 6.].map(|x| c64(x, 0.0));
        assert_eq!(v.as_slice(), &expect);
        assert_eq!(unvec(&v, 2, 3).unwrap(), a);
    }

    #[test]
    fn vec_of_product_identity() {
        let mut r = rng(2);
        let a = random_matrix(&mut r, 3, 3);
        let x = random_matrix(&mut r, 3, 3);
        let b = random_matrix(&mut r, 3, 3);
        let lhs = vec(&(&a * &x * &b));
        let rhs = kron(&b.transpose(), &a) * vec(&x);
        assert!((lhs - rhs).camax() < 1e-12);
    }

    #[test]
    fn eig_hermitian_examples() {
        let [sx, _, _] = pauli();
        let e = eig_hermitian(&sx).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);

        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![
            c64(3.0, 0.0),
            c64(1.0, 0.0),
            c64(2.0, 0.0),
        ]));
        let e = eig_hermitian(&d).unwrap();
        assert_eq!(e.values.as_slice(), &[1.0, 2.0, 3.0]);
        // permutation eigenvectors up to phase
        for (col, row) in [(0, 1), (1, 2), (2, 0)] {
            assert!((e.vectors[(row, col)].norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn eig_hermitian_reconstructs_random() {
        let mut r = rng(3);
        let h = random_hermitian(&mut r, 8);
        let e = eig_hermitian(&h).unwrap();
        assert!(max_abs(&(e.reconstruct() - &h)) < 1e-10);
        assert!(unitarity_deviation(&e.vectors) < 1e-10);
        assert!(e.values.as_slice().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eig_hermitian_rejects_non_hermitian() {
        let mut r = rng(4);
        let a = random_matrix(&mut r, 3, 3);
        assert!(matches!(eig_hermitian(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn expm_examples() {
        assert_eq!(expm_i_hermitian(&CMatrix::zeros(3, 3), 0.7).unwrap(), identity(3));
        let [_, _, sz] = pauli();
        let d = 0.37;
        let u = expm_i_hermitian(&sz, d).unwrap();
        assert!((u[(0, 0)] - C64::from_polar(1.0, -d)).norm() < 1e-15);
        assert!((u[(1, 1)] - C64::from_polar(1.0, d)).norm() < 1e-15);
        assert!(u[(0, 1)].norm() < 1e-15 && u[(1, 0)].norm() < 1e-15);
    }

    /// Scaled-and-squared Taylor series for exp(-itH), independent of the
    /// eigendecomposition path.
    fn taylor_expm(h: &CMatrix, t: f64) -> CMatrix {
        let n = h.nrows();
        let a = h.scale(t) * c64(0.0, -1.0);
        let norm = max_abs(&a) * n as f64;
        let squarings = (norm.max(1.0).log2().ceil() as i32 + 4).max(0) as u32;
        let a = a.unscale(2f64.powi(squarings as i32));
        let mut term = identity(n);
        let mut sum = identity(n);
        for k in 1..40 {
            term = &term * &a / c64(k as f64, 0.0);
            sum += &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn expm_matches_taylor_oracle() {
        let mut r = rng(5);
        let h = random_hermitian(&mut r, 4);
        let u = expm_i_hermitian(&h, 0.3).unwrap();
        assert!(max_abs(&(u - taylor_expm(&h, 0.3))) < 1e-10);
    }

    #[test]
    fn eig_unitary_examples() {
        let e = eig_unitary(&identity(4)).unwrap();
        assert!(e.phases.iter().all(|w| w.abs() < 1e-14));
        assert!(max_abs(&(e.reconstruct() - identity(4))) < 1e-12);

        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![c64(0.0, 1.0), c64(0.0, -1.0)]));
        let e = eig_unitary(&d).unwrap();
        assert!((e.phases[0] - PI / 2.0).abs() < 1e-14);
        assert!((e.phases[1] + PI / 2.0).abs() < 1e-14);

        let mut r = rng(6);
        let u = random_unitary(&mut r, 6);
        let e = eig_unitary(&u).unwrap();
        assert!(max_abs(&(e.reconstruct() - &u)) < 1e-9);
        assert!(e.phases.as_slice().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn eig_unitary_handles_cyclic_permutation() {
        // eigenvalues are the 5th roots of unity
        let n = 5;
        let p = CMatrix::from_fn(n, n, |i, j| {
            if i == (j + 1) % n {
                c64(1.0, 0.0)
            } else {
                c64(0.0, 0.0)
            }
        });
        let e = eig_unitary(&p).unwrap();
        assert!(max_abs(&(e.reconstruct() - &p)) < 1e-9);
        assert!(unitarity_deviation(&e.vectors) < 1e-10);
    }

    #[test]
    fn eig_unitary_rejects_non_unitary() {
        let a = identity(2).scale(1.1);
        assert!(matches!(eig_unitary(&a), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn svd_clustered_singular_values() {
        let mut r = rng(31);
        let sv = [2.0, 2.0 - 3e-7, 1.998, 1.998 - 3e-7, 1.97, 1.93, 1.87, 1.85];
        for _ in 0..20 {
            let left = random_unitary(&mut r, 8);
            let right = random_unitary(&mut r, 8);
            let diag = CMatrix::from_diagonal(&CVector::from_iterator(8, sv.iter().map(|&x| c64(x, 0.0))));
            let a = &left * diag * right.adjoint();
            let dec = svd(&a).unwrap();
            assert!(max_abs(&(dec.reconstruct() - &a)) < 1e-12);
            assert!((dec.nuclear_norm() - sv.iter().sum::<f64>()).abs() < 1e-12);
        }
    }

    #[test]
    fn svd_examples() {
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![c64(2.0, 0.0), c64(-3.0, 0.0)]));
        let s = svd(&d).unwrap();
        assert!((s.singular_values[0] - 3.0).abs() < 1e-14);
        assert!((s.singular_values[1] - 2.0).abs() < 1e-14);
        assert!(max_abs(&(s.reconstruct() - &d)) < 1e-13);

        let mut r = rng(7);
        let u = random_unitary(&mut r, 4);
        let s = svd(&u).unwrap();
        assert!(s.singular_values.iter().all(|q| (q - 1.0).abs() < 1e-12));
    }

    #[test]
    fn nuclear_norm_matches_gram_oracle() {
        let mut r = rng(8);
        let a = random_matrix(&mut r, 4, 4);
        let s = svd(&a).unwrap();
        let gram = eig_hermitian(&(a.adjoint() * &a)).unwrap();
        let oracle: f64 = gram.values.iter().map(|l| l.max(0.0).sqrt()).sum();
        assert!((s.nuclear_norm() - oracle).abs() < 1e-9);
        assert!(max_abs(&(s.reconstruct() - &a)) < 1e-12);
    }

    #[test]
    fn spectral_integral_trivial_cases() {
        let mut r = rng(9);
        let x = random_hermitian(&mut r, 3);
        let out = spectral_integral(&CMatrix::zeros(3, 3), &x, 0.8).unwrap();
        assert!(max_abs(&(out - x.scale(0.8))) < 1e-14);

        let h = random_hermitian(&mut r, 4);
        let out = spectral_integral(&h, &h, 0.5).unwrap();
        assert!(max_abs(&(out - h.scale(0.5))) < 1e-12);
    }

    #[test]
    fn spectral_integral_rejects_mismatch() {
        let h = identity(3);
        let x = identity(2);
        assert!(matches!(
            spectral_integral(&h, &x, 1.0),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn hermitian_basis_small_cases() {
        let b1 = hermitian_basis(1).unwrap();
        assert_eq!(b1.len(), 1);
        assert_eq!(b1.elements()[0], identity(1));

        let b2 = hermitian_basis(2).unwrap();
        let [sx, sy, sz] = pauli();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let expect = [identity(2).scale(r), sx.scale(r), sy.scale(r), sz.scale(r)];
        for (got, want) in b2.elements().iter().zip(&expect) {
            assert!(max_abs(&(got - want)) < 1e-15);
        }
    }

    #[test]
    fn log_unitary_examples() {
        assert!(max_abs(&log_unitary(&identity(3)).unwrap()) < 1e-14);
        let a = PI / 3.0;
        let u = CMatrix::from_diagonal(&CVector::from_vec(vec![
            C64::from_polar(1.0, a),
            C64::from_polar(1.0, -a),
        ]));
        let g = log_unitary(&u).unwrap();
        assert!((g[(0, 0)].re - a).abs() < 1e-14 && (g[(1, 1)].re + a).abs() < 1e-14);
    }

    #[test]
    fn log_unitary_round_trip() {
        let mut r = rng(10);
        let basis = hermitian_basis(3).unwrap();
        let phi: Vec<f64> = (0..9).map(|i| 0.2 * ((i as f64) * 0.7).sin()).collect();
        let gen = basis.generator(&phi).unwrap();
        let u = expm_i_hermitian(&gen, -1.0).unwrap();
        let g = log_unitary(&u).unwrap();
        assert!(max_abs(&(g - &gen)) < 1e-9);
        let recovered = basis.coefficients(&log_unitary(&u).unwrap());
        for (a, b) in recovered.iter().zip(&phi) {
            assert!((a - b).abs() < 1e-9);
        }
        let w = random_unitary(&mut r, 5);
        let back = expm_i_hermitian(&log_unitary(&w).unwrap(), -1.0).unwrap();
        assert!(max_abs(&(back - w)) < 1e-9);
    }

    /// Composite Simpson rule for the spectral integral, stepping the
    /// propagator by repeated multiplication with a Taylor step.
    fn simpson_integral(h: &CMatrix, x: &CMatrix, t_max: f64, panels: usize) -> CMatrix {
        let step = t_max / panels as f64;
        let half_back = taylor_expm(h, 0.5 * step);
        let half_fwd = half_back.adjoint();
        let mut fwd = identity(h.nrows());
        let mut back = identity(h.nrows());
        let mut sum = CMatrix::zeros(h.nrows(), h.nrows());
        for k in 0..=2 * panels {
            let weight = if k == 0 || k == 2 * panels {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            sum += (&fwd * x * &back).scale(weight);
            fwd = &fwd * &half_fwd;
            back = &back * &half_back;
        }
        sum.scale(step / 6.0)
    }

    #[test]
    fn spectral_integral_matches_quadrature() {
        let mut r = rng(11);
        for n in [2, 4, 8] {
            for _ in 0..3 {
                let h = random_hermitian(&mut r, n);
                let x = random_hermitian(&mut r, n);
                let t = 1.3;
                let got = spectral_integral(&h, &x, t).unwrap();
                let want = simpson_integral(&h, &x, t, 10_000);
                assert!(max_abs(&(got - want)) < 1e-6);
            }
        }
    }

    #[test]
    fn spectral_integral_degenerate_generator() {
        let h = CMatrix::from_diagonal(&CVector::from_vec(vec![
            c64(0.5, 0.0),
            c64(0.5, 0.0),
            c64(-1.0, 0.0),
        ]));
        let x = random_hermitian(&mut rng(12), 3);
        let got = spectral_integral(&h, &x, 0.9).unwrap();
        let want = simpson_integral(&h, &x, 0.9, 2_000);
        assert!(max_abs(&(got - want)) < 1e-9);
    }

    #[test]
    fn hermitian_basis_is_orthonormal_and_complete() {
        for n in [1, 2, 3, 4, 8] {
            let basis = hermitian_basis(n).unwrap();
            assert_eq!(basis.len(), n * n);
            for (a, ba) in basis.elements().iter().enumerate() {
                assert!(max_abs(&(ba - ba.adjoint())) < 1e-15);
                for (b, bb) in basis.elements().iter().enumerate() {
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!(((ba * bb).trace() - c64(want, 0.0)).norm() < 1e-12);
                }
            }
            // Σ_b vec(B_b) vec(B_b)^dag = I on the n^2-dimensional operator space
            let mut frame = CMatrix::zeros(n * n, n * n);
            for b in basis.elements() {
                let v = vec(b);
                frame += &v * v.adjoint();
            }
            assert!(max_abs(&(frame - identity(n * n))) < 1e-10);
        }
    }

    fn small_matrix(n: usize) -> impl Strategy<Value = CMatrix> {
        proptest::collection::vec(-1.0f64..1.0, 2 * n * n)
            .prop_map(move |v| CMatrix::from_fn(n, n, |r, c| c64(v[2 * (r * n + c)], v[2 * (r * n + c) + 1])))
    }

    fn small_hermitian(n: usize) -> impl Strategy<Value = CMatrix> {
        small_matrix(n).prop_map(|a| (&a + a.adjoint()).scale(0.5))
    }

    proptest! {
        #[test]
        fn kron_mixed_product(a in small_matrix(2), b in small_matrix(3), c in small_matrix(2), d in small_matrix(3)) {
            let lhs = kron(&a, &b) * kron(&c, &d);
            let rhs = kron(&(&a * &c), &(&b * &d));
            prop_assert!(max_abs(&(lhs - rhs)) < 1e-12);
        }

        #[test]
        fn expm_is_additive_in_time(h in small_hermitian(3), s in -2.0f64..2.0, t in -2.0f64..2.0) {
            let lhs = expm_i_hermitian(&h, s).unwrap() * expm_i_hermitian(&h, t).unwrap();
            let rhs = expm_i_hermitian(&h, s + t).unwrap();
            prop_assert!(max_abs(&(lhs - rhs)) < 1e-12);
        }

        #[test]
        fn eigenphases_sum_to_arg_det(h in small_hermitian(4), t in 0.1f64..3.0) {
            let u = expm_i_hermitian(&h, t).unwrap();
            let eig = eig_unitary(&u).unwrap();
            let total: f64 = eig.phases.iter().sum();
            let det = u.determinant();
            let diff = principal_angle(total - det.im.atan2(det.re));
            prop_assert!(diff.abs() < 1e-10);
        }

        #[test]
        fn svd_reconstructs(a in small_matrix(5)) {
            let dec = svd(&a).unwrap();
            prop_assert!(max_abs(&(dec.reconstruct() - &a)) < 1e-12);
            prop_assert!(unitarity_deviation(&dec.left) < 1e-12);
            prop_assert!(unitarity_deviation(&dec.right) < 1e-12);
        }
    }

    #[test]
    fn principal_angle_branch() {
        assert!((principal_angle(PI) - PI).abs() < 1e-15);
        assert!((principal_angle(-PI) - PI).abs() < 1e-15);
        assert!((principal_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }
}
