// Copyright 2026 The Bipartite Landscape Authors
// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration files (TOML).

use std::ops::Range;
use std::path::{Path, PathBuf};

use bipartite_landscape::linalg::{c64, CMatrix};
use bipartite_landscape::model::{
    build_central_spin, build_custom, build_random_bath, random_target, ControlSystem, ControlVector, Horizon,
    TargetSpec,
};
use bipartite_landscape::sampling::{gaussian_vector, random_hermitian, seeded_rng};
use bipartite_landscape::AscentConfig;
use serde::Deserialize;
use toml::Spanned;

/// Independent random streams derived from one run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Model = 0,
    Target = 1,
    Init = 2,
    Draws = 3,
}

/// Seed of `stream` for run `seed`. Stream 0 is the run seed itself so a
/// random bath with run seed `s` uses `B_z` drawn from seed `s`.
pub fn stream_seed(seed: u64, stream: Stream) -> u64 {
    match stream {
        Stream::Model => seed,
        other => seed ^ ((other as u64) << 48) ^ 0x5EED_0000_0000_0000,
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}:{line}: {message}")]
    Invalid { path: PathBuf, line: usize, message: String },
}

/// Complex matrix written row-major as rows of `[re, im]` pairs.
pub type MatrixRows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Run seeds; one ascent per seed.
    pub seeds: Spanned<Vec<u64>>,
    /// Default output directory, relative to the working directory.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub model: Spanned<ModelConfig>,
    pub horizon: Spanned<HorizonConfig>,
    #[serde(default)]
    pub target: Option<Spanned<TargetConfig>>,
    #[serde(default)]
    pub init: Option<Spanned<InitConfig>>,
    #[serde(default)]
    pub optimizer: Option<Spanned<AscentConfig>>,
    #[serde(default)]
    pub emit: EmitConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    CentralSpin {
        bath_spins: usize,
        #[serde(default)]
        couplings: Option<Vec<f64>>,
    },
    RandomBath {
        bath_dim: usize,
    },
    /// Random closed system (`N_B = 1`) with seeded drift and controls.
    Closed {
        dim: usize,
        #[serde(default = "default_closed_controls")]
        controls: usize,
    },
    Custom {
        n_a: usize,
        n_b: usize,
        drift: MatrixRows,
        controls: Vec<MatrixRows>,
    },
}

fn default_closed_controls() -> usize {
    2
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizonConfig {
    pub intervals: usize,
    pub t_final: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetConfig {
    /// Haar-random target drawn from the run seed.
    Random,
    Identity,
    Explicit { matrix: MatrixRows },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitConfig {
    Zero,
    Gaussian { scale: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmitConfig {
    pub trace: bool,
    pub spectra: bool,
    pub final_controls: bool,
}

impl Default for EmitConfig {
    fn default() -> Self {
        Self {
            trace: true,
            spectra: true,
            final_controls: true,
        }
    }
}

fn line_of(source: &str, span: Range<usize>) -> usize {
    source[..span.start.min(source.len())].matches('\n').count() + 1
}

fn matrix_from_rows(entries: &MatrixRows) -> Result<CMatrix, String> {
    let rows = entries.len();
    let cols = entries.first().map_or(0, Vec::len);
    if entries.iter().any(|r| r.len() != cols) {
        return Err("matrix rows have different lengths".into());
    }
    Ok(CMatrix::from_fn(rows, cols, |r, c| c64(entries[r][c][0], entries[r][c][1])))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<LoadedConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    /// Parses and validates `text`; `path` only labels error messages.
    pub fn parse(text: &str, path: &Path) -> Result<LoadedConfig, ConfigError> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let loaded = LoadedConfig {
            config,
            source: text.to_string(),
            path: path.to_path_buf(),
        };
        loaded.validate()?;
        Ok(loaded)
    }
}

/// A parsed configuration together with its source text for error locations.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    source: String,
    pub path: PathBuf,
}

impl LoadedConfig {
    fn invalid<T>(&self, span: Range<usize>, message: impl Into<String>) -> Result<T, ConfigError> {
        Err(ConfigError::Invalid {
            path: self.path.clone(),
            line: line_of(&self.source, span),
            message: message.into(),
        })
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let cfg = &self.config;
        let seeds = cfg.seeds.get_ref();
        if seeds.is_empty() {
            return self.invalid(cfg.seeds.span(), "seeds: at least one seed is required");
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != seeds.len() {
            return self.invalid(cfg.seeds.span(), "seeds: duplicate seed");
        }
        let horizon = &cfg.horizon;
        if let Err(e) = Horizon::new(horizon.get_ref().intervals, horizon.get_ref().t_final) {
            return self.invalid(horizon.span(), format!("horizon: {e}"));
        }
        if let Some(opt) = &cfg.optimizer {
            if let Err(e) = opt.get_ref().validate() {
                return self.invalid(opt.span(), format!("optimizer: {e}"));
            }
        }
        if let Some(init) = &cfg.init {
            if let InitConfig::Gaussian { scale } = init.get_ref() {
                if !(*scale >= 0.0 && scale.is_finite()) {
                    return self.invalid(init.span(), format!("init: scale must be non-negative, got {scale}"));
                }
            }
        }
        let sys = self.system(seeds[0])?;
        self.target(&sys, seeds[0])?;
        Ok(())
    }

    pub fn seeds(&self) -> &[u64] {
        self.config.seeds.get_ref()
    }

    pub fn optimizer(&self) -> AscentConfig {
        self.config.optimizer.as_ref().map(|o| o.get_ref().clone()).unwrap_or_default()
    }

    pub fn horizon(&self) -> Horizon {
        let h = self.config.horizon.get_ref();
        Horizon::new(h.intervals, h.t_final).expect("validated at load")
    }

    /// Control system for run `seed`.
    pub fn system(&self, seed: u64) -> Result<ControlSystem, ConfigError> {
        let model = &self.config.model;
        let horizon = self.horizon();
        let built = match model.get_ref() {
            ModelConfig::CentralSpin { bath_spins, couplings } => {
                if *bath_spins == 0 || *bath_spins > 6 {
                    return self.invalid(model.span(), format!("model: bath_spins must lie in 1..=6, got {bath_spins}"));
                }
                let couplings = couplings.clone().unwrap_or_else(|| vec![1.0; *bath_spins]);
                build_central_spin(*bath_spins, &couplings, horizon)
            }
            ModelConfig::RandomBath { bath_dim } => build_random_bath(*bath_dim, stream_seed(seed, Stream::Model), horizon),
            ModelConfig::Closed { dim, controls } => {
                if *dim == 0 || *controls == 0 {
                    return self.invalid(model.span(), "model: dim and controls must be positive");
                }
                let mut rng = seeded_rng(stream_seed(seed, Stream::Model));
                let h0 = random_hermitian(&mut rng, *dim);
                let hs = (0..*controls).map(|_| random_hermitian(&mut rng, *dim)).collect();
                build_custom(h0, hs, *dim, 1, horizon)
            }
            ModelConfig::Custom { n_a, n_b, drift, controls } => {
                let h0 = match matrix_from_rows(drift) {
                    Ok(m) => m,
                    Err(e) => return self.invalid(model.span(), format!("model.drift: {e}")),
                };
                let mut hs = Vec::with_capacity(controls.len());
                for (i, m) in controls.iter().enumerate() {
                    match matrix_from_rows(m) {
                        Ok(m) => hs.push(m),
                        Err(e) => return self.invalid(model.span(), format!("model.controls[{i}]: {e}")),
                    }
                }
                build_custom(h0, hs, *n_a, *n_b, horizon)
            }
        };
        built.or_else(|e| self.invalid(model.span(), format!("model: {e}")))
    }

    pub fn target(&self, sys: &ControlSystem, seed: u64) -> Result<TargetSpec, ConfigError> {
        let (kind, span) = match &self.config.target {
            Some(t) => (t.get_ref().clone(), t.span()),
            None => (TargetConfig::Random, 0..0),
        };
        let built = match kind {
            TargetConfig::Random => random_target(sys.n_a(), stream_seed(seed, Stream::Target)),
            TargetConfig::Identity => Ok(TargetSpec::identity(sys.n_a())),
            TargetConfig::Explicit { matrix } => match matrix_from_rows(&matrix) {
                Ok(m) if m.nrows() == sys.n_a() && m.ncols() == sys.n_a() => TargetSpec::new(m),
                Ok(m) => {
                    return self.invalid(
                        span,
                        format!("target: matrix is {}x{}, system A has dimension {}", m.nrows(), m.ncols(), sys.n_a()),
                    )
                }
                Err(e) => return self.invalid(span, format!("target.matrix: {e}")),
            },
        };
        built.or_else(|e| self.invalid(span, format!("target: {e}")))
    }

    /// Starting controls for run `seed`.
    pub fn initial_controls(&self, sys: &ControlSystem, seed: u64) -> ControlVector {
        match self.config.init.as_ref().map(|i| i.get_ref()) {
            None | Some(InitConfig::Zero) => sys.zero_controls(),
            Some(InitConfig::Gaussian { scale }) => {
                let mut rng = seeded_rng(stream_seed(seed, Stream::Init));
                let values = gaussian_vector(&mut rng, sys.n_params(), *scale);
                ControlVector::for_system(sys, values).expect("finite gaussian controls")
            }
        }
    }

    /// Scale for randomly sampled controls in scans and gradient checks.
    pub fn sample_scale(&self) -> f64 {
        match self.config.init.as_ref().map(|i| i.get_ref()) {
            Some(InitConfig::Gaussian { scale }) if *scale > 0.0 => *scale,
            _ => 1.0,
        }
    }
}
