// Copyright 2026 The Bipartite Landscape Authors
// SPDX-License-Identifier: Apache-2.0

//! Control landscape analysis for a quantum system `A` coupled to an
//! inaccessible system `B`.
//!
//! The pipeline is
//! [`model`] (drift, controls, horizon) → [`propagate`] (piecewise-constant
//! evolution) → [`landscape`] (`Γ(c)`, `F(c)`, `Φ_opt`, spectral frequencies)
//! → [`gradients`] (dynamic gradients `G_c`, `G_φ`) → [`diagnostics`]
//! (numerical rank and the trap-free rank condition), with [`optimizer`]
//! running adaptive-step gradient ascent on `F(c)`.
//!
//! Conventions: system `A` is the first tensor factor, `U(c) = U_1 ⋯ U_L`
//! with `U_1` the leftmost factor, control vectors are flattened
//! interval-major (`index = l * M + m`), and unitary eigenphases live on
//! `(-pi, pi]` in descending order.

pub mod diagnostics;
pub mod error;
pub mod gradients;
pub mod landscape;
pub mod linalg;
pub mod model;
pub mod optimizer;
pub mod propagate;
pub mod sampling;

pub use error::{Error, Result};
pub use gradients::GradientBundle;
pub use landscape::LandscapeEval;
pub use model::{ControlSystem, ControlVector, Horizon, TargetSpec};
pub use optimizer::{AscentConfig, OptimizerTrace, TerminalStatus};
pub use propagate::Propagation;
