// Copyright 2026 The Bipartite Landscape Authors
// SPDX-License-Identifier: Apache-2.0

//! The landscape `F(c)`, the extended landscape `J(c, φ)` and their
//! spectral data.
//!
//! For `R = (W ⊗ I)^dag U(c)`, `Γ(c)` is the sum of the diagonal `N_B × N_B`
//! blocks of `R`, `F(c) = (‖Γ‖_* / N)^2`, and for any bath unitary `Φ`,
//! `J = Re Tr[(W ⊗ Φ)^dag U] = Re Tr(Φ^dag Γ)`.

use crate::error::{Error, Result};
use crate::linalg::{
    check_hermitian, eig_hermitian, eig_unitary, expm_i_hermitian, kron, log_unitary, svd, CMatrix,
    HermitianBasis, RVector, C64,
};
use crate::model::{ControlSystem, TargetSpec};
use crate::propagate::Propagation;

/// Eigenphase gap below which spectral data are flagged as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-8;

/// Snapshot of the landscape at `(c, φ_opt(c))`.
#[derive(Debug, Clone)]
pub struct LandscapeEval {
    pub gamma: CMatrix,
    pub gamma_singular_values: RVector,
    pub fidelity: f64,
    /// `J(c, φ_opt)` evaluated from the spectrum of `U_obj`.
    pub j_value: f64,
    pub phi_opt_matrix: CMatrix,
    pub phi_opt_vector: Vec<f64>,
    pub spectrum: ObjectiveSpectrum,
    pub fingerprint: u64,
}

impl LandscapeEval {
    pub fn omega(&self) -> &RVector {
        &self.spectrum.omega
    }

    pub fn v(&self) -> &CMatrix {
        &self.spectrum.v
    }

    pub fn u_obj(&self) -> &CMatrix {
        &self.spectrum.u_obj
    }

    pub fn degenerate(&self) -> bool {
        self.spectrum.degenerate
    }
}

/// `U_obj = (W ⊗ Φ)^dag U = V diag(exp(iω)) V^dag` at one `φ`.
#[derive(Debug, Clone)]
pub struct ObjectiveSpectrum {
    pub phi_matrix: CMatrix,
    pub u_obj: CMatrix,
    /// Spectral frequencies in `(-pi, pi]`, descending.
    pub omega: RVector,
    pub v: CMatrix,
    pub min_gap: f64,
    pub degenerate: bool,
}

impl ObjectiveSpectrum {
    /// `J = Σ cos ω`.
    pub fn j_value(&self) -> f64 {
        self.omega.iter().map(|w| w.cos()).sum()
    }
}

/// Kinematic objective `J(ω) = Σ cos ω` with its gradient and Hessian diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicPoint {
    pub omega: Vec<f64>,
    pub j: f64,
    pub gradient: Vec<f64>,
    pub hessian_diag: Vec<f64>,
}

pub fn kinematic_point(omega: &[f64]) -> KinematicPoint {
    KinematicPoint {
        omega: omega.to_vec(),
        j: omega.iter().map(|w| w.cos()).sum(),
        gradient: kinematic_gradient(omega),
        hessian_diag: omega.iter().map(|w| -w.cos()).collect(),
    }
}

/// `g(ω) = -sin ω`.
pub fn kinematic_gradient(omega: &[f64]) -> Vec<f64> {
    omega.iter().map(|w| -w.sin()).collect()
}

fn check_target(sys: &ControlSystem, w: &TargetSpec, u_total: &CMatrix) -> Result<()> {
    if w.dim() != sys.n_a() {
        return Err(Error::DimensionMismatch(format!(
            "target acts on dimension {}, system A has dimension {}",
            w.dim(),
            sys.n_a()
        )));
    }
    let n = sys.dim();
    if u_total.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "propagator is {}x{}, system dimension is {n}",
            u_total.nrows(),
            u_total.ncols()
        )));
    }
    Ok(())
}

/// `Γ = Σ_a [(W ⊗ I)^dag U]_{aa}` computed blockwise as
/// `Σ_{a,k} conj(W_ka) U_[k,a]`.
pub fn gamma(sys: &ControlSystem, w: &TargetSpec, u_total: &CMatrix) -> Result<CMatrix> {
    check_target(sys, w, u_total)?;
    let (n_a, n_b) = (sys.n_a(), sys.n_b());
    let wm = w.matrix();
    let mut g = CMatrix::zeros(n_b, n_b);
    for a in 0..n_a {
        for k in 0..n_a {
            let coef = wm[(k, a)].conj();
            if coef == C64::new(0.0, 0.0) {
                continue;
            }
            let block = u_total.view((k * n_b, a * n_b), (n_b, n_b));
            g += block * coef;
        }
    }
    Ok(g)
}

/// `F = (‖Γ‖_* / N)^2` from the singular values of `Γ`.
pub fn fidelity(gamma: &CMatrix, n: usize) -> Result<f64> {
    let nuc = svd(gamma)?.nuclear_norm();
    Ok((nuc / n as f64).powi(2))
}

/// `Φ(φ) = exp(i B(φ))`.
pub fn phi_matrix(basis: &HermitianBasis, phi: &[f64]) -> Result<CMatrix> {
    let b = basis.generator(phi)?;
    expm_i_hermitian(&b, -1.0)
}

/// Maximizer `Φ_opt = T_left T_right^dag` of `Re Tr(Φ^dag Γ)` and its
/// coordinates `φ_b = Tr(B_b G)` with `G` the principal log, `exp(iG) = Φ_opt`.
pub fn phi_opt(gamma: &CMatrix, basis: &HermitianBasis) -> Result<(CMatrix, Vec<f64>)> {
    if gamma.nrows() != basis.dim() || gamma.ncols() != basis.dim() {
        return Err(Error::DimensionMismatch(format!(
            "Γ is {}x{}, basis acts on dimension {}",
            gamma.nrows(),
            gamma.ncols(),
            basis.dim()
        )));
    }
    let dec = svd(gamma)?;
    let phi = &dec.left * dec.right.adjoint();
    let generator = log_unitary(&phi)?;
    let coords = basis.coefficients(&generator);
    Ok((phi, coords))
}

/// `J(c, φ) = Re Tr[(W ⊗ Φ(φ))^dag U(c)]`.
pub fn j_extended(
    sys: &ControlSystem,
    w: &TargetSpec,
    u_total: &CMatrix,
    basis: &HermitianBasis,
    phi: &[f64],
) -> Result<f64> {
    let g = gamma(sys, w, u_total)?;
    let p = phi_matrix(basis, phi)?;
    Ok((p.adjoint() * g).trace().re)
}

/// Spectral data of `U_obj = (W ⊗ Φ(φ))^dag U(c)`.
pub fn u_obj_and_omega(
    sys: &ControlSystem,
    w: &TargetSpec,
    u_total: &CMatrix,
    basis: &HermitianBasis,
    phi: &[f64],
) -> Result<ObjectiveSpectrum> {
    check_target(sys, w, u_total)?;
    let phi_m = phi_matrix(basis, phi)?;
    spectrum_for_phi_matrix(w, u_total, phi_m)
}

fn spectrum_for_phi_matrix(
    w: &TargetSpec,
    u_total: &CMatrix,
    phi_matrix: CMatrix,
) -> Result<ObjectiveSpectrum> {
    let extended = kron(w.matrix(), &phi_matrix);
    let u_obj = extended.adjoint() * u_total;
    let eig = eig_unitary(&u_obj)?;
    let min_gap = eig.min_gap();
    Ok(ObjectiveSpectrum {
        phi_matrix,
        u_obj,
        omega: eig.phases,
        v: eig.vectors,
        min_gap,
        degenerate: min_gap < DEGENERACY_GAP,
    })
}

/// Full landscape evaluation at `(c, φ_opt(c))` for a computed propagation.
pub fn evaluate(
    sys: &ControlSystem,
    w: &TargetSpec,
    prop: &Propagation,
    basis: &HermitianBasis,
) -> Result<LandscapeEval> {
    let u_total = prop.total();
    let g = gamma(sys, w, u_total)?;
    let dec = svd(&g)?;
    let fidelity = (dec.nuclear_norm() / sys.dim() as f64).powi(2);
    let (phi_opt_matrix, phi_opt_vector) = phi_opt(&g, basis)?;
    let spectrum = u_obj_and_omega(sys, w, u_total, basis, &phi_opt_vector)?;
    let j_value = spectrum.j_value();
    if !fidelity.is_finite() || !j_value.is_finite() {
        return Err(Error::NonFinite("landscape evaluation"));
    }
    Ok(LandscapeEval {
        gamma: g,
        gamma_singular_values: dec.singular_values,
        fidelity,
        j_value,
        phi_opt_matrix,
        phi_opt_vector,
        spectrum,
        fingerprint: prop.fingerprint(),
    })
}

/// Channel fidelity `Tr(Γ ρ Γ^dag) / N_A^2` for a bath density matrix `ρ`.
pub fn channel_fidelity(gamma: &CMatrix, rho_bar: &CMatrix, n_a: usize) -> Result<f64> {
    let n_b = gamma.nrows();
    if rho_bar.shape() != (n_b, n_b) || gamma.ncols() != n_b {
        return Err(Error::DimensionMismatch(format!(
            "density matrix is {}x{}, Γ is {}x{}",
            rho_bar.nrows(),
            rho_bar.ncols(),
            gamma.nrows(),
            gamma.ncols()
        )));
    }
    check_hermitian(rho_bar).map_err(|_| Error::InvalidDensity("not Hermitian".into()))?;
    let tr = rho_bar.trace();
    if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
        return Err(Error::InvalidDensity(format!("trace is {tr}, expected 1")));
    }
    let min_eig = eig_hermitian(rho_bar)?.values.min();
    if min_eig < -1e-10 {
        return Err(Error::InvalidDensity(format!(
            "not positive semidefinite (eigenvalue {min_eig:.3e})"
        )));
    }
    let value = (gamma * rho_bar * gamma.adjoint()).trace().re;
    Ok(value / (n_a * n_a) as f64)
}
