// Copyright 2026 The Bipartite Landscape Authors
// SPDX-License-Identifier: Apache-2.0

//! The `gradcheck`, `rankscan` and `validate` commands.

use bipartite_landscape::diagnostics::{
    classify_case, closed_rank_check, closed_rank_identity, phiopt_identity_check, rank_condition, PHI_OPT_TOL,
};
use bipartite_landscape::gradients::{bundle, bundle_at_phi_opt, finite_diff_f, finite_diff_j};
use bipartite_landscape::linalg::hermitian_basis;
use bipartite_landscape::model::ControlVector;
use bipartite_landscape::sampling::{gaussian_vector, seeded_rng};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{stream_seed, LoadedConfig, Stream};
use crate::output::{self, fmt_f64};
use crate::run::CommonOptions;
use crate::CliError;

/// Relative-error bound above which `gradcheck` reports a violation.
pub const GRADCHECK_BOUND: f64 = 1e-5;

/// Scale of the random `φ` used by `gradcheck`.
const PHI_SCALE: f64 = 0.5;

pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff = analytic.iter().zip(numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let norm = numeric.iter().map(|b| b * b).sum::<f64>().sqrt();
    if norm == 0.0 {
        diff
    } else {
        diff / norm
    }
}

/// Seed for the `draw`-th random sample of run `seed`.
fn draw_seed(seed: u64, draw: usize) -> u64 {
    stream_seed(seed, Stream::Draws) ^ (draw as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradcheckDraw {
    pub draw: usize,
    pub seed: u64,
    /// `‖∇J - D J‖ / ‖D J‖` at a random `(c, φ)`.
    pub rel_err_j: f64,
    pub degenerate_j: bool,
    /// Same for `∇_c F` at `φ_opt(c)`.
    pub rel_err_f: f64,
    pub degenerate_f: bool,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradcheckSummary {
    pub config: String,
    pub step: f64,
    pub bound: f64,
    pub draws: Vec<GradcheckDraw>,
    /// Maximum over draws whose spectrum is not flagged degenerate.
    pub max_rel_err_j: f64,
    pub max_rel_err_f: f64,
    /// Maximum over all draws, flagged ones included.
    pub max_rel_err_all: f64,
    pub skipped_degenerate: usize,
    pub passed: bool,
}

pub fn gradcheck(
    cfg: &LoadedConfig,
    opts: &CommonOptions,
    draws: usize,
    step: f64,
) -> Result<GradcheckSummary, CliError> {
    let seeds = opts.seeds(cfg);
    let scale = cfg.sample_scale();
    let one = |draw: usize| -> Result<GradcheckDraw, CliError> {
        let seed = seeds[draw % seeds.len()];
        let sys = cfg.system(seed)?;
        let w = cfg.target(&sys, seed)?;
        let basis = hermitian_basis(sys.n_b())?;
        let mut rng = seeded_rng(draw_seed(seed, draw));
        let c = ControlVector::for_system(&sys, gaussian_vector(&mut rng, sys.n_params(), scale))?;
        let phi = gaussian_vector(&mut rng, basis.len(), PHI_SCALE);

        let b = bundle(&sys, &w, &basis, &c, &phi)?;
        let fd_j = finite_diff_j(&sys, &w, &basis, &c, &phi, step)?;
        let (eval, at_opt) = bundle_at_phi_opt(&sys, &w, &basis, &c)?;
        let grad_f = at_opt.grad_f_c.as_ref().expect("bundle evaluated at phi_opt");
        let fd_f = finite_diff_f(&sys, &w, &c, step)?;
        Ok(GradcheckDraw {
            draw,
            seed,
            rel_err_j: relative_error(&b.grad_j(), &fd_j),
            degenerate_j: b.degenerate,
            rel_err_f: relative_error(grad_f.as_slice(), &fd_f),
            degenerate_f: at_opt.degenerate,
            fidelity: eval.fidelity,
        })
    };
    let pool = opts.pool()?;
    let rows: Vec<Result<GradcheckDraw, CliError>> = pool.install(|| (0..draws).into_par_iter().map(one).collect());
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;

    let max = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0, f64::max);
    let max_rel_err_j = max(&mut rows.iter().filter(|r| !r.degenerate_j).map(|r| r.rel_err_j));
    let max_rel_err_f = max(&mut rows.iter().filter(|r| !r.degenerate_f).map(|r| r.rel_err_f));
    let max_rel_err_all = max(&mut rows.iter().flat_map(|r| [r.rel_err_j, r.rel_err_f]));
    let skipped = rows.iter().filter(|r| r.degenerate_j || r.degenerate_f).count();
    let passed = max_rel_err_j <= GRADCHECK_BOUND && max_rel_err_f <= GRADCHECK_BOUND;

    if let Some(dir) = &opts.out_dir {
        std::fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("gradcheck.csv")).map_err(std::io::Error::other)?;
        w.write_record(["draw", "seed", "rel_err_J", "degenerate_J", "rel_err_F", "degenerate_F", "F"])
            .map_err(std::io::Error::other)?;
        for r in &rows {
            w.write_record([
                r.draw.to_string(),
                r.seed.to_string(),
                fmt_f64(r.rel_err_j),
                u8::from(r.degenerate_j).to_string(),
                fmt_f64(r.rel_err_f),
                u8::from(r.degenerate_f).to_string(),
                fmt_f64(r.fidelity),
            ])
            .map_err(std::io::Error::other)?;
        }
        w.flush()?;
    }

    Ok(GradcheckSummary {
        config: cfg.path.display().to_string(),
        step,
        bound: GRADCHECK_BOUND,
        draws: rows,
        max_rel_err_j,
        max_rel_err_f,
        max_rel_err_all,
        skipped_degenerate: skipped,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankScanRow {
    pub seed: u64,
    pub point: usize,
    pub fidelity: f64,
    pub case: String,
    pub candidates: Vec<String>,
    pub rank_gc: usize,
    pub rank_gcphi: usize,
    pub required_rank: usize,
    pub condition_met: bool,
    pub sum_omega_mod_2pi: f64,
    pub degenerate: bool,
    /// `rank G_{c,φ} = min(rank G_c + 1, N)` with the Schur scalar below
    /// one; closed systems only.
    pub closed_identity: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankScanSummary {
    pub config: String,
    pub rank_tol: f64,
    pub rows: Vec<RankScanRow>,
    pub condition_met: usize,
    /// Smallest `rank G_{c,φ} - rank G_c` over the scan.
    pub min_rank_gain: i64,
    pub closed_identity_failures: usize,
}

/// Rank report at `points` random controls per seed.
pub fn rankscan(cfg: &LoadedConfig, opts: &CommonOptions, points: usize) -> Result<RankScanSummary, CliError> {
    let seeds = opts.seeds(cfg);
    let rank_tol = opts.rank_tol(cfg);
    let scale = cfg.sample_scale();
    let jobs: Vec<(u64, usize)> = seeds.iter().flat_map(|&s| (0..points).map(move |p| (s, p))).collect();
    let one = |&(seed, point): &(u64, usize)| -> Result<RankScanRow, CliError> {
        let sys = cfg.system(seed)?;
        let w = cfg.target(&sys, seed)?;
        let basis = hermitian_basis(sys.n_b())?;
        let mut rng = seeded_rng(draw_seed(seed, point));
        let c = ControlVector::for_system(&sys, gaussian_vector(&mut rng, sys.n_params(), scale))?;
        let (eval, b) = bundle_at_phi_opt(&sys, &w, &basis, &c)?;
        let class = classify_case(eval.u_obj(), eval.omega().as_slice(), sys.n_b());
        let report = rank_condition(&b, &class, rank_tol);
        let closed_identity = sys.is_closed().then(|| {
            let row: Vec<f64> = b.g_phi.row(0).iter().copied().collect();
            let check = closed_rank_check(&b.g_c, &row, rank_tol);
            check.holds() && report.numerical_rank == closed_rank_identity(report.g_c_rank, sys.dim())
        });
        Ok(RankScanRow {
            seed,
            point,
            fidelity: eval.fidelity,
            case: report.case.label().to_string(),
            candidates: report.candidates.iter().map(|c| c.label().to_string()).collect(),
            rank_gc: report.g_c_rank,
            rank_gcphi: report.numerical_rank,
            required_rank: report.required_rank,
            condition_met: report.condition_met,
            sum_omega_mod_2pi: report.sum_omega_mod_2pi,
            degenerate: eval.degenerate(),
            closed_identity,
        })
    };
    let pool = opts.pool()?;
    let rows: Vec<Result<RankScanRow, CliError>> = pool.install(|| jobs.par_iter().map(one).collect());
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;

    if let Some(dir) = &opts.out_dir {
        std::fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("rankscan.csv")).map_err(std::io::Error::other)?;
        w.write_record([
            "seed",
            "point",
            "F",
            "case",
            "candidates",
            "rank_Gc",
            "rank_Gcphi",
            "required_rank",
            "condition_met",
            "sum_omega",
            "degenerate",
            "closed_identity",
        ])
        .map_err(std::io::Error::other)?;
        for r in &rows {
            w.write_record([
                r.seed.to_string(),
                r.point.to_string(),
                fmt_f64(r.fidelity),
                r.case.clone(),
                r.candidates.join("|"),
                r.rank_gc.to_string(),
                r.rank_gcphi.to_string(),
                r.required_rank.to_string(),
                u8::from(r.condition_met).to_string(),
                fmt_f64(r.sum_omega_mod_2pi),
                u8::from(r.degenerate).to_string(),
                r.closed_identity.map(|b| u8::from(b).to_string()).unwrap_or_default(),
            ])
            .map_err(std::io::Error::other)?;
        }
        w.flush()?;
    }

    Ok(RankScanSummary {
        config: cfg.path.display().to_string(),
        rank_tol,
        condition_met: rows.iter().filter(|r| r.condition_met).count(),
        min_rank_gain: rows
            .iter()
            .map(|r| r.rank_gcphi as i64 - r.rank_gc as i64)
            .min()
            .unwrap_or(0),
        closed_identity_failures: rows.iter().filter(|r| r.closed_identity == Some(false)).count(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedValidation {
    pub seed: u64,
    pub rows: usize,
    pub monotone: bool,
    pub identity_violations: usize,
    /// `|F(final controls) - F(last row)|`, recomputed from scratch.
    pub final_fidelity_drift: f64,
    pub final_identities_ok: bool,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationSummary {
    pub output_dir: String,
    pub seeds: Vec<SeedValidation>,
    pub passed: bool,
}

/// Tolerance on the recomputed final fidelity.
const REPLAY_TOL: f64 = 1e-10;

/// Re-reads the files written by `run` and re-verifies them offline.
pub fn validate(cfg: &LoadedConfig, opts: &CommonOptions) -> Result<ValidationSummary, CliError> {
    let dir = opts.out_dir(cfg);
    let mut seeds = Vec::new();
    for seed in opts.seeds(cfg) {
        let rows = output::read_trace(&output::trace_path(&dir, seed))?;
        let controls = output::read_controls(&output::controls_path(&dir, seed))?;
        let monotone = rows.windows(2).all(|p| p[1].one_minus_f <= p[0].one_minus_f && p[1].iter == p[0].iter + 1);
        let identity_violations = rows
            .iter()
            .filter(|r| !(r.sum_sin_omega <= PHI_OPT_TOL && r.phi_gradient_inf <= PHI_OPT_TOL))
            .count();

        let sys = cfg.system(seed)?;
        let w = cfg.target(&sys, seed)?;
        let basis = hermitian_basis(sys.n_b())?;
        let c = ControlVector::for_system(&sys, controls)?;
        let (eval, b) = bundle_at_phi_opt(&sys, &w, &basis, &c)?;
        let last_f = rows.last().map_or(f64::NAN, |r| r.fidelity);
        let drift = (eval.fidelity - last_f).abs();
        let final_identities_ok = phiopt_identity_check(&eval, &b).passed;
        let ok = !rows.is_empty() && monotone && identity_violations == 0 && drift <= REPLAY_TOL && final_identities_ok;
        seeds.push(SeedValidation {
            seed,
            rows: rows.len(),
            monotone,
            identity_violations,
            final_fidelity_drift: drift,
            final_identities_ok,
            ok,
        });
    }
    Ok(ValidationSummary {
        output_dir: dir.display().to_string(),
        passed: seeds.iter().all(|s| s.ok),
        seeds,
    })
}
