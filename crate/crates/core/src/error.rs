// Copyright 2026 The Bipartite Landscape Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the numerical kernel and the model/landscape layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (max deviation of U^dag U from I is {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    #[error("imaginary residue {residue:.3e} exceeds tolerance in {context}")]
    ImaginaryResidue { residue: f64, context: &'static str },

    #[error("stale input: {0}")]
    Stale(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
