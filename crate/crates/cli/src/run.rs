// Copyright 2026 The Bipartite Landscape Authors
// SPDX-License-Identifier: Apache-2.0

//! The `run` command: one gradient ascent per seed.

use std::path::{Path, PathBuf};

use bipartite_landscape::diagnostics::{classify_case, rank_condition, SpectralCase};
use bipartite_landscape::gradients::bundle_at_phi_opt;
use bipartite_landscape::linalg::hermitian_basis;
use bipartite_landscape::model::ControlVector;
use bipartite_landscape::optimizer::{ascend, OptimizerTrace, TerminalStatus};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::LoadedConfig;
use crate::output::{self, modal_value, rank_columns};
use crate::CliError;

/// Flags shared by every subcommand.
#[derive(Debug, Clone)]
pub struct CommonOptions {
    pub out_dir: Option<PathBuf>,
    pub jobs: usize,
    pub seed_offset: u64,
    pub rank_tol: Option<f64>,
}

impl Default for CommonOptions {
    fn default() -> Self {
        Self {
            out_dir: None,
            jobs: 1,
            seed_offset: 0,
            rank_tol: None,
        }
    }
}

impl CommonOptions {
    pub fn seeds(&self, cfg: &LoadedConfig) -> Vec<u64> {
        cfg.seeds().iter().map(|s| s.wrapping_add(self.seed_offset)).collect()
    }

    pub fn rank_tol(&self, cfg: &LoadedConfig) -> f64 {
        self.rank_tol.unwrap_or(cfg.optimizer().rank_tolerance)
    }

    /// Output directory: the flag, else the config entry, else `out`.
    pub fn out_dir(&self, cfg: &LoadedConfig) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| cfg.config.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    pub(crate) fn pool(&self) -> Result<rayon::ThreadPool, CliError> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs.max(1))
            .build()
            .map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))
    }
}

/// Rank condition at the last iterate of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinalRank {
    pub case: SpectralCase,
    pub candidates: Vec<SpectralCase>,
    pub rank_gc: usize,
    pub rank_gcphi: usize,
    pub required_rank: usize,
    pub condition_met: bool,
    pub sum_omega_mod_2pi: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub status: TerminalStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub iterations: usize,
    pub evaluations: usize,
    pub initial_fidelity: Option<f64>,
    pub final_fidelity: Option<f64>,
    pub final_one_minus_f: Option<f64>,
    /// `1 - F` never increased between recorded iterates.
    pub monotone: bool,
    pub identity_violations: usize,
    pub modal_rank_gc: Option<usize>,
    pub modal_rank_gcphi: Option<usize>,
    pub final_rank: Option<FinalRank>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub config: String,
    pub output_dir: String,
    pub runs: Vec<SeedSummary>,
}

impl RunSummary {
    pub fn numeric_failures(&self) -> usize {
        self.runs.iter().filter(|r| r.status == TerminalStatus::NumericFailure).count()
    }
}

/// Result of one seed, with the full trace for in-process callers.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub summary: SeedSummary,
    pub trace: OptimizerTrace,
}

fn final_rank(cfg: &LoadedConfig, seed: u64, controls: &[f64], rank_tol: f64) -> Result<FinalRank, CliError> {
    let sys = cfg.system(seed)?;
    let w = cfg.target(&sys, seed)?;
    let basis = hermitian_basis(sys.n_b())?;
    let c = ControlVector::for_system(&sys, controls.to_vec())?;
    let (eval, bundle) = bundle_at_phi_opt(&sys, &w, &basis, &c)?;
    let class = classify_case(eval.u_obj(), eval.omega().as_slice(), sys.n_b());
    let report = rank_condition(&bundle, &class, rank_tol);
    Ok(FinalRank {
        case: report.case,
        candidates: report.candidates,
        rank_gc: report.g_c_rank,
        rank_gcphi: report.numerical_rank,
        required_rank: report.required_rank,
        condition_met: report.condition_met,
        sum_omega_mod_2pi: report.sum_omega_mod_2pi,
        degenerate: eval.degenerate(),
    })
}

/// Runs the ascent for one seed and writes its files into `dir`.
pub fn run_seed(cfg: &LoadedConfig, seed: u64, rank_tol: f64, dir: &Path) -> Result<SeedRun, CliError> {
    let sys = cfg.system(seed)?;
    let w = cfg.target(&sys, seed)?;
    let c0 = cfg.initial_controls(&sys, seed);
    let emit = &cfg.config.emit;
    let mut opt = cfg.optimizer();
    opt.rank_tolerance = rank_tol;
    opt.record_gradient_spectra |= emit.spectra;
    log::info!("seed {seed}: ascent on N = {} with {} parameters", sys.dim(), sys.n_params());
    let trace = ascend(&sys, &w, &c0, &opt)?;
    log::info!(
        "seed {seed}: {} after {} iterations, F = {:?}",
        trace.status.label(),
        trace.iterations(),
        trace.final_fidelity()
    );

    if emit.trace {
        output::write_trace(&output::trace_path(dir, seed), &trace)?;
    }
    if emit.spectra {
        output::write_spectra(&output::spectra_path(dir, seed), &trace)?;
    }
    if emit.final_controls {
        output::write_controls(&output::controls_path(dir, seed), &trace.final_controls, sys.n_controls())?;
    }

    let (gc, gcphi) = rank_columns(&trace.records);
    let monotone = trace.records.windows(2).all(|p| p[1].one_minus_f <= p[0].one_minus_f);
    let final_rank = match trace.status {
        TerminalStatus::NumericFailure => None,
        _ => Some(final_rank(cfg, seed, &trace.final_controls, rank_tol)?),
    };
    let summary = SeedSummary {
        seed,
        status: trace.status,
        message: trace.message.clone(),
        iterations: trace.iterations(),
        evaluations: trace.evaluations,
        initial_fidelity: trace.records.first().map(|r| r.fidelity),
        final_fidelity: trace.final_fidelity(),
        final_one_minus_f: trace.records.last().map(|r| r.one_minus_f),
        monotone,
        identity_violations: trace.records.iter().filter(|r| !r.identities_ok).count(),
        modal_rank_gc: modal_value(gc),
        modal_rank_gcphi: modal_value(gcphi),
        final_rank,
    };
    Ok(SeedRun { summary, trace })
}

/// Runs every configured seed, concurrently up to `opts.jobs`.
pub fn run_all(cfg: &LoadedConfig, opts: &CommonOptions) -> Result<(RunSummary, Vec<SeedRun>), CliError> {
    let dir = opts.out_dir(cfg);
    std::fs::create_dir_all(&dir)?;
    let seeds = opts.seeds(cfg);
    let rank_tol = opts.rank_tol(cfg);
    let pool = opts.pool()?;
    let results: Vec<Result<SeedRun, CliError>> =
        pool.install(|| seeds.par_iter().map(|&s| run_seed(cfg, s, rank_tol, &dir)).collect());
    let runs = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let summary = RunSummary {
        config: cfg.path.display().to_string(),
        output_dir: dir.display().to_string(),
        runs: runs.iter().map(|r| r.summary.clone()).collect(),
    };
    output::write_json(&dir.join("summary.json"), &summary)?;
    Ok((summary, runs))
}
