// Copyright 2026 The Bipartite Landscape Authors
// SPDX-License-Identifier: Apache-2.0

//! Numerical rank and the rank condition for trap-free search.

use serde::{Deserialize, Serialize};

use crate::gradients::GradientBundle;
use crate::landscape::LandscapeEval;
use crate::linalg::{principal_angle, singular_values_real, CMatrix, RMatrix, RVector};

pub const DEFAULT_RANK_TOL: f64 = 1e-8;
pub const CLASSIFY_TOL: f64 = 1e-8;
pub const PHI_OPT_TOL: f64 = 1e-7;

/// Metrics within this factor of [`CLASSIFY_TOL`] are reported as borderline.
const BORDERLINE_FACTOR: f64 = 10.0;

/// Number of singular values above `rel_tol * σ_1`; zero for a zero matrix.
pub fn rank_from_singular_values(singular_values: &[f64], rel_tol: f64) -> usize {
    match singular_values.first() {
        Some(&s1) if s1 > 0.0 => singular_values.iter().filter(|&&s| s > rel_tol * s1).count(),
        _ => 0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEstimate {
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub rel_tol: f64,
}

pub fn numerical_rank(m: &RMatrix, rel_tol: f64) -> RankEstimate {
    let sv: Vec<f64> = singular_values_real(m).iter().copied().collect();
    RankEstimate {
        rank: rank_from_singular_values(&sv, rel_tol),
        singular_values: sv,
        rel_tol,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SpectralCase {
    #[serde(rename = "UN")]
    UN,
    #[serde(rename = "SUN")]
    SUN,
    SymmetricSpectrum,
    Closed,
}

impl SpectralCase {
    pub fn label(&self) -> &'static str {
        match self {
            SpectralCase::UN => "UN",
            SpectralCase::SUN => "SUN",
            SpectralCase::SymmetricSpectrum => "SYMMETRIC_SPECTRUM",
            SpectralCase::Closed => "CLOSED",
        }
    }

    /// Rank of `G_{c,φ}` sufficient for trap-free search at dimension `n`.
    pub fn required_rank(&self, n: usize) -> usize {
        match self {
            SpectralCase::UN | SpectralCase::Closed => n,
            SpectralCase::SUN => n.saturating_sub(1),
            SpectralCase::SymmetricSpectrum => n / 2,
        }
    }
}

impl std::fmt::Display for SpectralCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub case: SpectralCase,
    /// Every case compatible with the metrics once borderline values are
    /// allowed to fall either way; always contains `case`.
    pub candidates: Vec<SpectralCase>,
    /// `Σ ω` mapped to `(-pi, pi]`.
    pub sum_omega_mod_2pi: f64,
    /// `max_i |ω_i + ω_{N-1-i}|` for descending `ω`, wrapped to `(-pi, pi]`.
    pub antisymmetry_defect: f64,
    pub det_defect: f64,
}

impl Classification {
    pub fn spectrum_antisymmetric(&self) -> bool {
        self.antisymmetry_defect <= CLASSIFY_TOL
    }

    pub fn borderline(&self) -> bool {
        self.candidates.len() > 1
    }
}

fn antisymmetry_defect(omega: &[f64]) -> f64 {
    let mut sorted = omega.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let n = sorted.len();
    (0..n)
        .map(|i| principal_angle(sorted[i] + sorted[n - 1 - i]).abs())
        .fold(0.0, f64::max)
}

/// Classifies `U_obj` for the rank condition.
///
/// Precedence: `CLOSED` when `n_b = 1`, then `SYMMETRIC_SPECTRUM` (unit
/// determinant and `ω` symmetric about zero), then `SUN`, else `UN`.
pub fn classify_case(u_obj: &CMatrix, omega: &[f64], n_b: usize) -> Classification {
    let sum = principal_angle(omega.iter().sum());
    let det_defect = (u_obj.determinant() - crate::linalg::c64(1.0, 0.0)).norm();
    let anti = antisymmetry_defect(omega);
    let decide = |sum_ok: bool, anti_ok: bool| {
        if n_b == 1 {
            SpectralCase::Closed
        } else if sum_ok && anti_ok {
            SpectralCase::SymmetricSpectrum
        } else if sum_ok {
            SpectralCase::SUN
        } else {
            SpectralCase::UN
        }
    };
    let sum_ok = sum.abs() <= CLASSIFY_TOL;
    let anti_ok = anti <= CLASSIFY_TOL;
    let case = decide(sum_ok, anti_ok);
    let near = |x: f64| x > CLASSIFY_TOL / BORDERLINE_FACTOR && x <= CLASSIFY_TOL * BORDERLINE_FACTOR;
    let sum_opts = if near(sum.abs()) { vec![true, false] } else { vec![sum_ok] };
    let anti_opts = if near(anti) { vec![true, false] } else { vec![anti_ok] };
    let mut candidates = vec![case];
    for &s in &sum_opts {
        for &a in &anti_opts {
            let alt = decide(s, a);
            if !candidates.contains(&alt) {
                candidates.push(alt);
            }
        }
    }
    Classification {
        case,
        candidates,
        sum_omega_mod_2pi: sum,
        antisymmetry_defect: anti,
        det_defect,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub singular_values: Vec<f64>,
    pub numerical_rank: usize,
    pub threshold_used: f64,
    pub g_c_rank: usize,
    pub case: SpectralCase,
    pub candidates: Vec<SpectralCase>,
    pub required_rank: usize,
    pub condition_met: bool,
    pub sum_omega_mod_2pi: f64,
    pub spectrum_antisymmetric: bool,
}

/// Evaluates `rank G_{c,φ} >= required_rank(case)` for a bundle at `φ_opt`.
pub fn rank_condition(bundle: &GradientBundle, class: &Classification, rel_tol: f64) -> RankReport {
    let sv: Vec<f64> = bundle.singular_values.iter().copied().collect();
    let gc_sv: Vec<f64> = bundle.g_c_singular_values.iter().copied().collect();
    let rank = rank_from_singular_values(&sv, rel_tol);
    let required = class.case.required_rank(bundle.omega.len());
    RankReport {
        numerical_rank: rank,
        singular_values: sv,
        threshold_used: rel_tol,
        g_c_rank: rank_from_singular_values(&gc_sv, rel_tol),
        case: class.case,
        candidates: class.candidates.clone(),
        required_rank: required,
        condition_met: rank >= required,
        sum_omega_mod_2pi: class.sum_omega_mod_2pi,
        spectrum_antisymmetric: class.spectrum_antisymmetric(),
    }
}

/// Predicted `rank G_{c,φ}` of a closed system from `rank G_c`.
pub fn closed_rank_identity(g_c_rank: usize, n: usize) -> usize {
    (g_c_rank + 1).min(n)
}

/// Closed-system check of the rank identity through its Schur-complement
/// argument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedRankCheck {
    pub g_c_rank: usize,
    pub stacked_rank: usize,
    pub predicted_rank: usize,
    /// `v_1^T (S_r^2 + v_1 v_1^T)^{-1} v_1`.
    pub schur_scalar: f64,
}

impl ClosedRankCheck {
    pub fn holds(&self) -> bool {
        self.stacked_rank == self.predicted_rank && self.schur_scalar < 1.0
    }
}

/// Appends `phase_row` to `g_c` and compares ranks; `v = V_c^T phase_row`.
pub fn closed_rank_check(g_c: &RMatrix, phase_row: &[f64], rel_tol: f64) -> ClosedRankCheck {
    let n = g_c.ncols();
    let mut stacked = g_c.clone().insert_row(g_c.nrows(), 0.0);
    for (j, x) in phase_row.iter().enumerate() {
        stacked[(g_c.nrows(), j)] = *x;
    }
    let stacked_rank = numerical_rank(&stacked, rel_tol).rank;
    let dec = g_c.clone().svd(false, true);
    let mut order: Vec<usize> = (0..dec.singular_values.len()).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
    let sv: Vec<f64> = order.iter().map(|&i| dec.singular_values[i]).collect();
    let r = rank_from_singular_values(&sv, rel_tol);
    let v_t = dec.v_t.expect("right singular vectors requested");
    let row = RVector::from_column_slice(phase_row);
    // rows of v_t are the right singular vectors
    let v1 = RVector::from_iterator(r, order[..r].iter().map(|&i| v_t.row(i).transpose().dot(&row)));
    let mut a = RMatrix::from_diagonal(&RVector::from_iterator(r, sv[..r].iter().map(|s| s * s)));
    a += &v1 * v1.transpose();
    let schur_scalar = match a.clone().cholesky() {
        Some(ch) => v1.dot(&ch.solve(&v1)),
        None => f64::NAN,
    };
    ClosedRankCheck {
        g_c_rank: r,
        stacked_rank,
        predicted_rank: closed_rank_identity(r, n),
        schur_scalar,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiOptIdentityReport {
    /// `|Σ sin ω|`.
    pub sum_sin_omega: f64,
    /// `‖G_φ g(ω)‖_∞`.
    pub phi_gradient_inf: f64,
    pub passed: bool,
}

pub fn phiopt_identity_check(eval: &LandscapeEval, bundle: &GradientBundle) -> PhiOptIdentityReport {
    phiopt_identity_values(eval.omega().as_slice(), &bundle.grad_j_phi)
}

pub(crate) fn phiopt_identity_values(omega: &[f64], grad_j_phi: &RVector) -> PhiOptIdentityReport {
    let sum_sin_omega = omega.iter().map(|w| w.sin()).sum::<f64>().abs();
    let phi_gradient_inf = grad_j_phi.amax();
    PhiOptIdentityReport {
        sum_sin_omega,
        phi_gradient_inf,
        passed: sum_sin_omega <= PHI_OPT_TOL && phi_gradient_inf <= PHI_OPT_TOL,
    }
}

/// Reduced form `Ḡ [I_{N-1}, -1]` of a gradient whose rows preserve the
/// determinant, with `Ḡ` the first `N - 1` columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedRankReport {
    pub direct_rank: usize,
    pub reduced_rank: usize,
    /// `max |G - Ḡ [I, -1]|`.
    pub residual: f64,
}

pub fn su_reduced_rank(g: &RMatrix, rel_tol: f64) -> ReducedRankReport {
    let n = g.ncols();
    let mut reduced = RMatrix::zeros(g.nrows(), n);
    if n > 0 {
        let bar = g.columns(0, n - 1);
        reduced.columns_mut(0, n - 1).copy_from(&bar);
        let last = -bar.column_sum();
        reduced.set_column(n - 1, &last);
    }
    ReducedRankReport {
        direct_rank: numerical_rank(g, rel_tol).rank,
        reduced_rank: numerical_rank(&reduced, rel_tol).rank,
        residual: (g - &reduced).amax(),
    }
}
