// Copyright 2026 The Bipartite Landscape Authors
// SPDX-License-Identifier: Apache-2.0

//! Adaptive-step gradient ascent `c ← c + γ ∇F(c)` with accept/reject step control.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{phiopt_identity_values, rank_from_singular_values, DEFAULT_RANK_TOL};
use crate::error::{Error, Result};
use crate::gradients::{bundle_from_eval, grad_f_from_bundle, GradientBundle, FIDELITY_FLOOR};
use crate::landscape::{evaluate, fidelity, gamma, LandscapeEval};
use crate::linalg::{hermitian_basis, HermitianBasis};
use crate::model::{ControlSystem, ControlVector, TargetSpec};
use crate::propagate::propagate;

pub const GAMMA_MIN: f64 = 1e-12;
pub const GAMMA_MAX: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AscentConfig {
    pub gamma0: f64,
    pub grow: f64,
    pub shrink: f64,
    pub max_iters: usize,
    pub max_rejects_in_row: usize,
    /// Minimum absolute gain in `F` for a step to be accepted.
    pub improvement_floor: f64,
    /// Stop once `1 - F` falls to this value.
    pub convergence_tol: f64,
    pub record_gradient_spectra: bool,
    pub rank_tolerance: f64,
}

impl Default for AscentConfig {
    fn default() -> Self {
        Self {
            gamma0: 0.01,
            grow: 2.0,
            shrink: 0.5,
            max_iters: 2000,
            max_rejects_in_row: 60,
            improvement_floor: 1e-12,
            convergence_tol: 1e-8,
            record_gradient_spectra: false,
            rank_tolerance: DEFAULT_RANK_TOL,
        }
    }
}

impl AscentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.gamma0 > 0.0 && self.gamma0.is_finite()) {
            return bad(format!("gamma0 must be positive, got {}", self.gamma0));
        }
        if !(self.grow > 1.0 && self.grow.is_finite()) {
            return bad(format!("grow must exceed 1, got {}", self.grow));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad(format!("shrink must lie in (0, 1), got {}", self.shrink));
        }
        if self.max_rejects_in_row == 0 {
            return bad("max_rejects_in_row must be at least 1".into());
        }
        if !(self.improvement_floor >= 0.0 && self.improvement_floor.is_finite()) {
            return bad(format!("improvement_floor must be non-negative, got {}", self.improvement_floor));
        }
        if !(self.convergence_tol >= 0.0) {
            return bad(format!("convergence_tol must be non-negative, got {}", self.convergence_tol));
        }
        if !(self.rank_tolerance > 0.0 && self.rank_tolerance < 1.0) {
            return bad(format!("rank_tolerance must lie in (0, 1), got {}", self.rank_tolerance));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalStatus {
    Converged,
    Stalled,
    MaxIters,
    NumericFailure,
    SaddleAtBottom,
}

impl TerminalStatus {
    pub fn label(&self) -> &'static str {
        match self {
            TerminalStatus::Converged => "converged",
            TerminalStatus::Stalled => "stalled",
            TerminalStatus::MaxIters => "max_iters",
            TerminalStatus::NumericFailure => "numeric_failure",
            TerminalStatus::SaddleAtBottom => "saddle_at_bottom",
        }
    }
}

/// One accepted iterate (iteration 0 is the starting point).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub fidelity: f64,
    pub one_minus_f: f64,
    pub j_value: f64,
    /// Step length that produced this iterate (`gamma0` at iteration 0).
    pub gamma: f64,
    /// `‖∇_c F‖` at this iterate.
    pub grad_norm: f64,
    pub rank_g_c: usize,
    pub rank_g_stack: usize,
    pub degenerate: bool,
    pub finite_difference: bool,
    pub sum_sin_omega: f64,
    pub phi_gradient_inf: f64,
    pub identities_ok: bool,
    /// Singular values of `G_c`, present when spectra are recorded.
    pub g_c_singular_values: Option<Vec<f64>>,
    /// Singular values of `G_{c,φ}`, present when spectra are recorded.
    pub g_stack_singular_values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerTrace {
    pub records: Vec<TraceRecord>,
    pub status: TerminalStatus,
    /// Human-readable detail for `numeric_failure`.
    pub message: Option<String>,
    pub final_controls: Vec<f64>,
    pub evaluations: usize,
}

impl OptimizerTrace {
    pub fn final_fidelity(&self) -> Option<f64> {
        self.records.last().map(|r| r.fidelity)
    }

    /// Accepted iterations after the starting point.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }
}

fn record(
    iter: usize,
    step: f64,
    eval: &LandscapeEval,
    b: &GradientBundle,
    grad: &[f64],
    finite_difference: bool,
    cfg: &AscentConfig,
) -> TraceRecord {
    let sv_stack: Vec<f64> = b.singular_values.iter().copied().collect();
    let sv_c: Vec<f64> = b.g_c_singular_values.iter().copied().collect();
    let ids = phiopt_identity_values(eval.omega().as_slice(), &b.grad_j_phi);
    TraceRecord {
        iter,
        fidelity: eval.fidelity,
        one_minus_f: 1.0 - eval.fidelity,
        j_value: eval.j_value,
        gamma: step,
        grad_norm: grad.iter().map(|x| x * x).sum::<f64>().sqrt(),
        rank_g_c: rank_from_singular_values(&sv_c, cfg.rank_tolerance),
        rank_g_stack: rank_from_singular_values(&sv_stack, cfg.rank_tolerance),
        degenerate: b.degenerate,
        finite_difference,
        sum_sin_omega: ids.sum_sin_omega,
        phi_gradient_inf: ids.phi_gradient_inf,
        identities_ok: ids.passed,
        g_c_singular_values: cfg.record_gradient_spectra.then_some(sv_c),
        g_stack_singular_values: cfg.record_gradient_spectra.then_some(sv_stack),
    }
}

struct Point {
    c: ControlVector,
    eval: LandscapeEval,
    bundle: GradientBundle,
}

fn analyse(sys: &ControlSystem, w: &TargetSpec, basis: &HermitianBasis, c: ControlVector) -> Result<Point> {
    let prop = propagate(sys, &c)?;
    let eval = evaluate(sys, w, &prop, basis)?;
    let bundle = bundle_from_eval(sys, basis, &c, &prop, &eval)?;
    Ok(Point { c, eval, bundle })
}

fn fidelity_at(sys: &ControlSystem, w: &TargetSpec, c: &ControlVector) -> Result<f64> {
    let prop = propagate(sys, c)?;
    let f = fidelity(&gamma(sys, w, prop.total())?, sys.dim())?;
    if !f.is_finite() {
        return Err(Error::NonFinite("fidelity"));
    }
    Ok(f)
}

fn failure(records: Vec<TraceRecord>, c: &ControlVector, evaluations: usize, err: Error) -> OptimizerTrace {
    OptimizerTrace {
        records,
        status: TerminalStatus::NumericFailure,
        message: Some(err.to_string()),
        final_controls: c.as_slice().to_vec(),
        evaluations,
    }
}

/// Runs gradient ascent on `F` from `c0`.
///
/// Returns `Err` only for invalid inputs; numerical breakdowns during the
/// run end the trace with [`TerminalStatus::NumericFailure`].
pub fn ascend(sys: &ControlSystem, w: &TargetSpec, c0: &ControlVector, cfg: &AscentConfig) -> Result<OptimizerTrace> {
    cfg.validate()?;
    c0.check_shape(sys)?;
    let basis = hermitian_basis(sys.n_b())?;
    let mut evaluations = 1;
    let mut records = Vec::new();
    let mut point = match analyse(sys, w, &basis, c0.clone()) {
        Ok(p) => p,
        Err(e) => return Ok(failure(records, c0, evaluations, e)),
    };
    let mut step = cfg.gamma0;
    let mut recorded_step = cfg.gamma0;

    let finish = |records, status, c: &ControlVector, evaluations| OptimizerTrace {
        records,
        status,
        message: None,
        final_controls: c.as_slice().to_vec(),
        evaluations,
    };

    for iter in 0..=cfg.max_iters {
        let grad = match grad_f_from_bundle(sys, w, &point.c, point.eval.fidelity, &point.bundle) {
            Ok(g) => g,
            Err(e) => return Ok(failure(records, &point.c, evaluations, e)),
        };
        if grad.gradient.iter().any(|x| !x.is_finite()) {
            return Ok(failure(records, &point.c, evaluations, Error::NonFinite("fidelity gradient")));
        }
        records.push(record(iter, recorded_step, &point.eval, &point.bundle, &grad.gradient, grad.finite_difference, cfg));
        let f = point.eval.fidelity;
        if 1.0 - f <= cfg.convergence_tol {
            return Ok(finish(records, TerminalStatus::Converged, &point.c, evaluations));
        }
        let grad_norm = records.last().map(|r| r.grad_norm).unwrap_or(0.0);
        if f <= FIDELITY_FLOOR && grad_norm <= FIDELITY_FLOOR {
            return Ok(finish(records, TerminalStatus::SaddleAtBottom, &point.c, evaluations));
        }
        if iter == cfg.max_iters {
            break;
        }

        let mut rejects = 0;
        let accepted = loop {
            let trial = point.c.stepped(step, &grad.gradient);
            evaluations += 1;
            let f_new = match fidelity_at(sys, w, &trial) {
                Ok(v) => v,
                Err(e) => return Ok(failure(records, &point.c, evaluations, e)),
            };
            if f_new - f > cfg.improvement_floor {
                recorded_step = step;
                step = (step * cfg.grow).min(GAMMA_MAX);
                break trial;
            }
            step = (step * cfg.shrink).max(GAMMA_MIN);
            rejects += 1;
            if rejects >= cfg.max_rejects_in_row {
                return Ok(finish(records, TerminalStatus::Stalled, &point.c, evaluations));
            }
        };
        point = match analyse(sys, w, &basis, accepted) {
            Ok(p) => p,
            Err(e) => return Ok(failure(records, &point.c, evaluations, e)),
        };
    }
    Ok(finish(records, TerminalStatus::MaxIters, &point.c, evaluations))
}
