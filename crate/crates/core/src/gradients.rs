// Copyright 2026 The Bipartite Landscape Authors
// SPDX-License-Identifier: Apache-2.0

//! Dynamic gradients: the Jacobians `G_c = ∂ω/∂c` and `G_φ = ∂ω/∂φ` of the
//! spectral frequencies, so that `∇J = G g(ω)` with `g(ω) = -sin ω`.
//!
//! Rows of `G_c` follow the control-vector flattening (`l * M + m`), rows of
//! `G_φ` follow the basis order, columns follow the descending order of `ω`.

use crate::error::{Error, Result};
use crate::landscape::{
    self, evaluate, fidelity, gamma, kinematic_gradient, ObjectiveSpectrum,
};
use crate::linalg::{
    eig_hermitian, identity, kron, max_abs, singular_values_real, spectral_integral, spectral_integral_from_eigen,
    CMatrix, HermitianBasis, HermitianEigen, RMatrix, RVector,
};
use crate::model::{ControlSystem, ControlVector, TargetSpec};
use crate::propagate::{control_fingerprint, propagate, Propagation};

/// Tolerance on the imaginary part of the provably real entries `v^dag X v`.
pub const REAL_CAST_TOL: f64 = 1e-10;

/// Fidelity below which the `sqrt(F)` factor in `∇F` is treated as singular.
pub const FIDELITY_FLOOR: f64 = 1e-12;

/// Central-difference step used when the analytic gradient is bypassed.
pub const FALLBACK_STEP: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct GradientBundle {
    pub g_c: RMatrix,
    pub g_phi: RMatrix,
    /// `[G_c; G_φ]`.
    pub g_stack: RMatrix,
    pub omega: RVector,
    /// `g(ω) = -sin ω`.
    pub kinematic: RVector,
    pub grad_j_c: RVector,
    pub grad_j_phi: RVector,
    /// `∇_c F = (2 sqrt(F)/N) G_c g(ω)`; present only when the bundle was
    /// evaluated at `φ_opt(c)`.
    pub grad_f_c: Option<RVector>,
    pub fidelity: f64,
    /// Singular values of `g_stack`, descending.
    pub singular_values: RVector,
    /// Singular values of `g_c`, descending.
    pub g_c_singular_values: RVector,
    pub degenerate: bool,
}

impl GradientBundle {
    /// `[∇_c J; ∇_φ J]`.
    pub fn grad_j(&self) -> Vec<f64> {
        self.grad_j_c.iter().chain(self.grad_j_phi.iter()).copied().collect()
    }
}

/// `-diag(V^dag X V)` as reals, after asserting the imaginary residue is negligible.
fn negated_expectations(v: &CMatrix, x: &CMatrix, context: &'static str) -> Result<Vec<f64>> {
    let xv = x * v;
    let tol = REAL_CAST_TOL * max_abs(x).max(1.0);
    (0..v.ncols())
        .map(|n| {
            let z = v.column(n).dotc(&xv.column(n));
            if z.im.abs() > tol {
                return Err(Error::ImaginaryResidue { residue: z.im.abs(), context });
            }
            Ok(-z.re)
        })
        .collect()
}

/// `Q = ∫_0^δ exp(itH_l) (H_m ⊗ I_B) exp(-itH_l) dt`.
pub fn q_integral(h_step: &CMatrix, h_m: &CMatrix, n_b: usize, delta: f64) -> Result<CMatrix> {
    let embedded = kron(h_m, &identity(n_b));
    spectral_integral(h_step, &embedded, delta)
}

fn q_integral_from_eigen(eig: &HermitianEigen, embedded: &CMatrix, delta: f64) -> Result<CMatrix> {
    spectral_integral_from_eigen(eig, embedded, delta)
}

/// `(G_c)_{lm,n} = -v_{ln}^dag Q_{lm} v_{ln}` with `V_l = U_{l+1} ⋯ U_L V`.
///
/// `c` must be the control vector `prop` was computed from.
pub fn g_c(sys: &ControlSystem, prop: &Propagation, v: &CMatrix, c: &ControlVector) -> Result<RMatrix> {
    if control_fingerprint(c) != prop.fingerprint() {
        return Err(Error::Stale("propagation was computed for a different control vector"));
    }
    c.check_shape(sys)?;
    let frames = prop.suffix_frames(v)?;
    let m_count = sys.n_controls();
    let delta = sys.delta();
    let mut g = RMatrix::zeros(sys.n_params(), sys.dim());
    for (l, frame) in frames.iter().enumerate() {
        let eig = &prop.step_eigen()[l];
        for (m, embedded) in sys.embedded_controls().iter().enumerate() {
            let q = q_integral_from_eigen(eig, embedded, delta)?;
            let row = negated_expectations(frame, &q, "control gradient")?;
            for (n, x) in row.into_iter().enumerate() {
                g[(l * m_count + m, n)] = x;
            }
        }
    }
    Ok(g)
}

/// `P_b = ∫_0^1 exp(iτB(φ)) B_b exp(-iτB(φ)) dτ`, so that
/// `∂Φ/∂φ_b = i P_b Φ`.
pub fn p_integral(basis: &HermitianBasis, phi: &[f64]) -> Result<Vec<CMatrix>> {
    basis_integrals(basis, &basis.generator(phi)?)
}

fn basis_integrals(basis: &HermitianBasis, generator: &CMatrix) -> Result<Vec<CMatrix>> {
    let eig = eig_hermitian(generator)?;
    basis
        .elements()
        .iter()
        .map(|bb| spectral_integral_from_eigen(&eig, bb, 1.0))
        .collect()
}

/// `Φ^dag P_b Φ = ∫_0^1 exp(-iτB(φ)) B_b exp(iτB(φ)) dτ`, the right-frame
/// form with `∂Φ/∂φ_b = i Φ (Φ^dag P_b Φ)`.
pub fn p_integral_right_frame(basis: &HermitianBasis, phi: &[f64]) -> Result<Vec<CMatrix>> {
    basis_integrals(basis, &-basis.generator(phi)?)
}

/// `(G_φ)_{b,n} = -v_n^dag (I_A ⊗ P_b) v_n` for the supplied bath operators.
///
/// Pass [`p_integral_right_frame`] to obtain the Jacobian of `ω`.
pub fn g_phi(v: &CMatrix, p_list: &[CMatrix], n_a: usize) -> Result<RMatrix> {
    let n = v.nrows();
    if v.ncols() != n {
        return Err(Error::NotSquare { rows: n, cols: v.ncols() });
    }
    let id_a = identity(n_a);
    let mut g = RMatrix::zeros(p_list.len(), n);
    for (b, p) in p_list.iter().enumerate() {
        if p.nrows() * n_a != n || !p.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "bath operator is {}x{}, eigenvector matrix is {n}x{n} with N_A = {n_a}",
                p.nrows(),
                p.ncols()
            )));
        }
        let row = negated_expectations(v, &kron(&id_a, p), "bath gradient")?;
        for (k, x) in row.into_iter().enumerate() {
            g[(b, k)] = x;
        }
    }
    Ok(g)
}

/// Bound matrix `Σ_b z_b z_b^T` with `(z_b)_n = v_n^dag (I_A ⊗ B_b) v_n`.
/// A reporting quantity only.
pub fn z_bound_matrix(v: &CMatrix, basis: &HermitianBasis, n_a: usize) -> Result<RMatrix> {
    let z = g_phi(v, basis.elements(), n_a)?;
    Ok(z.transpose() * z)
}

fn assemble(
    sys: &ControlSystem,
    basis: &HermitianBasis,
    c: &ControlVector,
    prop: &Propagation,
    spectrum: &ObjectiveSpectrum,
    phi: &[f64],
    fidelity: f64,
    at_phi_opt: bool,
) -> Result<GradientBundle> {
    let g_c = g_c(sys, prop, &spectrum.v, c)?;
    let frames = p_integral_right_frame(basis, phi)?;
    let g_phi = g_phi(&spectrum.v, &frames, sys.n_a())?;
    let n = sys.dim();
    let mut g_stack = RMatrix::zeros(g_c.nrows() + g_phi.nrows(), n);
    g_stack.rows_mut(0, g_c.nrows()).copy_from(&g_c);
    g_stack.rows_mut(g_c.nrows(), g_phi.nrows()).copy_from(&g_phi);
    let kinematic = RVector::from_vec(kinematic_gradient(spectrum.omega.as_slice()));
    let grad_j_c = &g_c * &kinematic;
    let grad_j_phi = &g_phi * &kinematic;
    let grad_f_c = at_phi_opt.then(|| grad_j_c.scale(2.0 * fidelity.sqrt() / n as f64));
    let singular_values = singular_values_real(&g_stack);
    let g_c_singular_values = singular_values_real(&g_c);
    if grad_j_c.iter().chain(grad_j_phi.iter()).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("dynamic gradient"));
    }
    Ok(GradientBundle {
        g_c,
        g_phi,
        g_stack,
        omega: spectrum.omega.clone(),
        kinematic,
        grad_j_c,
        grad_j_phi,
        grad_f_c,
        fidelity,
        singular_values,
        g_c_singular_values,
        degenerate: spectrum.degenerate,
    })
}

/// All dynamic-gradient data at an arbitrary `(c, φ)`.
pub fn bundle(
    sys: &ControlSystem,
    w: &TargetSpec,
    basis: &HermitianBasis,
    c: &ControlVector,
    phi: &[f64],
) -> Result<GradientBundle> {
    let prop = propagate(sys, c)?;
    let spectrum = landscape::u_obj_and_omega(sys, w, prop.total(), basis, phi)?;
    let f = fidelity(&gamma(sys, w, prop.total())?, sys.dim())?;
    assemble(sys, basis, c, &prop, &spectrum, phi, f, false)
}

/// Gradient data at `(c, φ_opt(c))` from an existing landscape evaluation.
pub fn bundle_from_eval(
    sys: &ControlSystem,
    basis: &HermitianBasis,
    c: &ControlVector,
    prop: &Propagation,
    eval: &landscape::LandscapeEval,
) -> Result<GradientBundle> {
    if eval.fingerprint != prop.fingerprint() {
        return Err(Error::Stale("landscape evaluation belongs to a different propagation"));
    }
    assemble(sys, basis, c, prop, &eval.spectrum, &eval.phi_opt_vector, eval.fidelity, true)
}

/// Landscape evaluation and gradient data at `(c, φ_opt(c))`.
pub fn bundle_at_phi_opt(
    sys: &ControlSystem,
    w: &TargetSpec,
    basis: &HermitianBasis,
    c: &ControlVector,
) -> Result<(landscape::LandscapeEval, GradientBundle)> {
    let prop = propagate(sys, c)?;
    let eval = evaluate(sys, w, &prop, basis)?;
    let b = bundle_from_eval(sys, basis, c, &prop, &eval)?;
    Ok((eval, b))
}

/// Landscape gradient together with how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityGradient {
    pub gradient: Vec<f64>,
    pub fidelity: f64,
    /// Set when the fidelity was too small for the analytic formula and
    /// central differences were used instead. Degenerate spectra stay on the
    /// analytic path.
    pub finite_difference: bool,
}

/// `∇_c F` at `φ_opt(c)`.
pub fn grad_f(
    sys: &ControlSystem,
    w: &TargetSpec,
    basis: &HermitianBasis,
    c: &ControlVector,
) -> Result<FidelityGradient> {
    let (eval, b) = bundle_at_phi_opt(sys, w, basis, c)?;
    grad_f_from_bundle(sys, w, c, eval.fidelity, &b)
}

/// [`grad_f`] reusing a bundle computed at `φ_opt(c)`.
pub fn grad_f_from_bundle(
    sys: &ControlSystem,
    w: &TargetSpec,
    c: &ControlVector,
    fidelity: f64,
    b: &GradientBundle,
) -> Result<FidelityGradient> {
    match &b.grad_f_c {
        Some(g) if fidelity > FIDELITY_FLOOR => Ok(FidelityGradient {
            gradient: g.iter().copied().collect(),
            fidelity,
            finite_difference: false,
        }),
        _ => {
            log::warn!("using finite-difference fidelity gradient (F = {fidelity:.3e})");
            Ok(FidelityGradient {
                gradient: finite_diff_f(sys, w, c, FALLBACK_STEP)?,
                fidelity,
                finite_difference: true,
            })
        }
    }
}

/// Central differences `(f(x + h e_i) - f(x - h e_i)) / 2h` for every coordinate.
pub fn central_differences<F>(f: F, x: &[f64], step: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    let mut probe = x.to_vec();
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        probe[i] = x[i] + step;
        let plus = f(&probe)?;
        probe[i] = x[i] - step;
        let minus = f(&probe)?;
        probe[i] = x[i];
        out.push((plus - minus) / (2.0 * step));
    }
    Ok(out)
}

/// Central differences of `J` over `(c, φ)`, length `L M + N_B^2`.
pub fn finite_diff_j(
    sys: &ControlSystem,
    w: &TargetSpec,
    basis: &HermitianBasis,
    c: &ControlVector,
    phi: &[f64],
    step: f64,
) -> Result<Vec<f64>> {
    c.check_shape(sys)?;
    let k = c.len();
    let mut x = c.as_slice().to_vec();
    x.extend_from_slice(phi);
    central_differences(
        |x| {
            let cv = ControlVector::for_system(sys, x[..k].to_vec())?;
            let prop = propagate(sys, &cv)?;
            landscape::j_extended(sys, w, prop.total(), basis, &x[k..])
        },
        &x,
        step,
    )
}

/// Central differences of `F` over `c`.
pub fn finite_diff_f(sys: &ControlSystem, w: &TargetSpec, c: &ControlVector, step: f64) -> Result<Vec<f64>> {
    c.check_shape(sys)?;
    central_differences(
        |x| {
            let cv = ControlVector::for_system(sys, x.to_vec())?;
            let prop = propagate(sys, &cv)?;
            fidelity(&gamma(sys, w, prop.total())?, sys.dim())
        },
        c.as_slice(),
        step,
    )
}
