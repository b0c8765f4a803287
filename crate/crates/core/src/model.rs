// Copyright 2026 The Bipartite Landscape Authors
// SPDX-License-Identifier: Apache-2.0

//! Bipartite control systems `H(t) = H_0 + Σ_m c_m(t) (H_m ⊗ I_B)`.
//!
//! System `A` is always the first tensor factor. In the central spin model
//! the bath spins follow in order, bath spin `q = 0` being the leftmost.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    check_hermitian, check_unitary, eig_hermitian, identity, kron, pauli, CMatrix,
};
use crate::sampling::{haar_unitary, random_hermitian, seeded_rng};

/// `L` uniform intervals over `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Horizon {
    pub intervals: usize,
    pub t_final: f64,
}

impl Horizon {
    pub fn new(intervals: usize, t_final: f64) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::InvalidModel("need at least one control interval".into()));
        }
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "final time must be positive, got {t_final}"
            )));
        }
        Ok(Self { intervals, t_final })
    }

    /// Interval width `δ = T / L`.
    pub fn delta(&self) -> f64 {
        self.t_final / self.intervals as f64
    }
}

#[derive(Debug, Clone)]
pub struct ControlSystem {
    n_a: usize,
    n_b: usize,
    h0: CMatrix,
    controls: Vec<CMatrix>,
    embedded: Vec<CMatrix>,
    horizon: Horizon,
}

impl ControlSystem {
    /// Validating constructor. `controls` act on `A` only and are embedded
    /// as `H_m ⊗ I_B`.
    pub fn new(
        h0: CMatrix,
        controls: Vec<CMatrix>,
        n_a: usize,
        n_b: usize,
        horizon: Horizon,
    ) -> Result<Self> {
        if n_a == 0 || n_b == 0 {
            return Err(Error::InvalidModel("subsystem dimensions must be positive".into()));
        }
        let n = n_a * n_b;
        if h0.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "drift is {}x{}, expected {n}x{n} for N_A = {n_a}, N_B = {n_b}",
                h0.nrows(),
                h0.ncols()
            )));
        }
        check_hermitian(&h0)?;
        if controls.is_empty() {
            return Err(Error::InvalidModel("need at least one control Hamiltonian".into()));
        }
        for (m, hm) in controls.iter().enumerate() {
            if hm.shape() != (n_a, n_a) {
                return Err(Error::DimensionMismatch(format!(
                    "control {m} is {}x{}, expected {n_a}x{n_a}",
                    hm.nrows(),
                    hm.ncols()
                )));
            }
            check_hermitian(hm)?;
        }
        Horizon::new(horizon.intervals, horizon.t_final)?;
        let id_b = identity(n_b);
        let embedded = controls.iter().map(|hm| kron(hm, &id_b)).collect();
        Ok(Self {
            n_a,
            n_b,
            h0,
            controls,
            embedded,
            horizon,
        })
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    /// Total dimension `N = N_A N_B`.
    pub fn dim(&self) -> usize {
        self.n_a * self.n_b
    }

    pub fn n_controls(&self) -> usize {
        self.controls.len()
    }

    pub fn drift(&self) -> &CMatrix {
        &self.h0
    }

    /// Control Hamiltonians on `A`.
    pub fn controls(&self) -> &[CMatrix] {
        &self.controls
    }

    /// `H_m ⊗ I_B`.
    pub fn embedded_controls(&self) -> &[CMatrix] {
        &self.embedded
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn delta(&self) -> f64 {
        self.horizon.delta()
    }

    /// Number of control parameters `L M`.
    pub fn n_params(&self) -> usize {
        self.horizon.intervals * self.controls.len()
    }

    pub fn is_closed(&self) -> bool {
        self.n_b == 1
    }

    pub fn with_horizon(&self, horizon: Horizon) -> Result<Self> {
        Self::new(
            self.h0.clone(),
            self.controls.clone(),
            self.n_a,
            self.n_b,
            horizon,
        )
    }

    pub fn zero_controls(&self) -> ControlVector {
        ControlVector::zeros(self.horizon.intervals, self.controls.len())
    }
}

/// Piecewise-constant amplitudes `c_{lm}`, flattened interval-major
/// (`index = l * M + m`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlVector {
    intervals: usize,
    n_controls: usize,
    values: Vec<f64>,
}

impl ControlVector {
    pub fn zeros(intervals: usize, n_controls: usize) -> Self {
        Self {
            intervals,
            n_controls,
            values: vec![0.0; intervals * n_controls],
        }
    }

    pub fn from_vec(intervals: usize, n_controls: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != intervals * n_controls {
            return Err(Error::DimensionMismatch(format!(
                "control vector has length {}, expected L*M = {}",
                values.len(),
                intervals * n_controls
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("control vector"));
        }
        Ok(Self {
            intervals,
            n_controls,
            values,
        })
    }

    /// Builds a control vector shaped for `sys`.
    pub fn for_system(sys: &ControlSystem, values: Vec<f64>) -> Result<Self> {
        Self::from_vec(sys.horizon().intervals, sys.n_controls(), values)
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn n_controls(&self) -> usize {
        self.n_controls
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, l: usize, m: usize) -> f64 {
        self.values[l * self.n_controls + m]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    /// `self + step * direction`.
    pub fn stepped(&self, step: f64, direction: &[f64]) -> Self {
        let values = self
            .values
            .iter()
            .zip(direction)
            .map(|(c, d)| c + step * d)
            .collect();
        Self {
            intervals: self.intervals,
            n_controls: self.n_controls,
            values,
        }
    }

    pub(crate) fn check_shape(&self, sys: &ControlSystem) -> Result<()> {
        if self.intervals != sys.horizon().intervals || self.n_controls != sys.n_controls() {
            return Err(Error::DimensionMismatch(format!(
                "control vector is {}x{}, system expects L = {}, M = {}",
                self.intervals,
                self.n_controls,
                sys.horizon().intervals,
                sys.n_controls()
            )));
        }
        Ok(())
    }
}

/// Desired unitary `W` on system `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpec {
    w: CMatrix,
}

impl TargetSpec {
    pub fn new(w: CMatrix) -> Result<Self> {
        check_unitary(&w)?;
        Ok(Self { w })
    }

    pub fn identity(n_a: usize) -> Self {
        Self { w: identity(n_a) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.w
    }

    pub fn dim(&self) -> usize {
        self.w.nrows()
    }
}

/// One system spin Heisenberg-coupled to `q_b` bath spins:
/// `H_0 = σ_y ⊗ I + Σ_q a_q Σ_s σ_s ⊗ σ_s^(q)`, single control `σ_z`.
pub fn build_central_spin(q_b: usize, couplings: &[f64], horizon: Horizon) -> Result<ControlSystem> {
    if q_b == 0 {
        return Err(Error::InvalidModel("central spin model needs at least one bath spin".into()));
    }
    if couplings.len() != q_b {
        return Err(Error::DimensionMismatch(format!(
            "{} couplings supplied for {q_b} bath spins",
            couplings.len()
        )));
    }
    let n_b = 1usize << q_b;
    let sigma = pauli();
    let mut h0 = kron(&sigma[1], &identity(n_b));
    for (q, &a) in couplings.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        for s in &sigma {
            let left = identity(1 << q);
            let right = identity(1 << (q_b - q - 1));
            let bath_op = kron(&kron(&left, s), &right);
            h0 += kron(s, &bath_op).scale(a);
        }
    }
    ControlSystem::new(h0, vec![sigma[2].clone()], 2, n_b, horizon)
}

/// Single spin dephased by a random bath: `H_0 = σ_z ⊗ B_z` with `‖B_z‖ = 1`
/// (spectral norm), single control `σ_x`.
pub fn build_random_bath(n_b: usize, seed: u64, horizon: Horizon) -> Result<ControlSystem> {
    let b_z = random_bath_operator(n_b, seed)?;
    let sigma = pauli();
    let h0 = kron(&sigma[2], &b_z);
    ControlSystem::new(h0, vec![sigma[0].clone()], 2, n_b, horizon)
}

/// Seeded random Hermitian `B_z` scaled to unit spectral norm.
pub fn random_bath_operator(n_b: usize, seed: u64) -> Result<CMatrix> {
    if n_b == 0 {
        return Err(Error::InvalidModel("bath dimension must be positive".into()));
    }
    let mut rng = seeded_rng(seed);
    let b = random_hermitian(&mut rng, n_b);
    let norm = eig_hermitian(&b)?.values.amax();
    Ok(b.unscale(norm))
}

pub fn build_custom(
    h0: CMatrix,
    controls: Vec<CMatrix>,
    n_a: usize,
    n_b: usize,
    horizon: Horizon,
) -> Result<ControlSystem> {
    ControlSystem::new(h0, controls, n_a, n_b, horizon)
}

/// Haar-random target on `A`, deterministic per seed.
pub fn random_target(n_a: usize, seed: u64) -> Result<TargetSpec> {
    if n_a == 0 {
        return Err(Error::InvalidModel("target dimension must be positive".into()));
    }
    let mut rng = seeded_rng(seed);
    TargetSpec::new(haar_unitary(&mut rng, n_a))
}
