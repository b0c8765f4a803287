// Copyright 2026 The Bipartite Landscape Authors
// SPDX-License-Identifier: Apache-2.0

//! Piecewise-constant evolution `U(c) = U_1 U_2 ⋯ U_L`, `U_l = exp(-i δ H_l)`.
//!
//! `U_1` is the leftmost factor of the product.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, expm_from_eigen, identity, CMatrix, HermitianEigen};
use crate::model::{ControlSystem, ControlVector};

#[derive(Debug, Clone)]
pub struct Propagation {
    step_hamiltonians: Vec<CMatrix>,
    step_eigen: Vec<HermitianEigen>,
    steps: Vec<CMatrix>,
    total: CMatrix,
    fingerprint: u64,
}

impl Propagation {
    pub fn steps(&self) -> &[CMatrix] {
        &self.steps
    }

    pub fn step_hamiltonians(&self) -> &[CMatrix] {
        &self.step_hamiltonians
    }

    /// Eigendecompositions of the `H_l`, shared with the gradient integrals.
    pub fn step_eigen(&self) -> &[HermitianEigen] {
        &self.step_eigen
    }

    pub fn total(&self) -> &CMatrix {
        &self.total
    }

    pub fn intervals(&self) -> usize {
        self.steps.len()
    }

    /// Hash of the control vector this propagation was computed from.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Ordered product `U_{start+1} ⋯ U_end` (1-based factors, empty range
    /// gives the identity).
    pub fn product(&self, start: usize, end: usize) -> CMatrix {
        let n = self.total.nrows();
        let mut acc = identity(n);
        for u in &self.steps[start..end] {
            acc *= u;
        }
        acc
    }

    /// Frames `V_l = U_{l+1} ⋯ U_L V` for `l = 1..L`; the last entry is `V`.
    pub fn suffix_frames(&self, v: &CMatrix) -> Result<Vec<CMatrix>> {
        if v.shape() != self.total.shape() {
            return Err(Error::DimensionMismatch(format!(
                "frame matrix is {}x{}, propagation is {}x{}",
                v.nrows(),
                v.ncols(),
                self.total.nrows(),
                self.total.ncols()
            )));
        }
        let l = self.steps.len();
        let mut frames = vec![CMatrix::zeros(0, 0); l];
        let mut acc = v.clone();
        for idx in (0..l).rev() {
            frames[idx] = acc.clone();
            acc = &self.steps[idx] * acc;
        }
        Ok(frames)
    }
}

/// Stable-within-a-process hash of the control amplitudes.
pub fn control_fingerprint(c: &ControlVector) -> u64 {
    let mut hasher = DefaultHasher::new();
    c.intervals().hash(&mut hasher);
    c.n_controls().hash(&mut hasher);
    for v in c.as_slice() {
        v.to_bits().hash(&mut hasher);
    }
    hasher.finish()
}

/// `H_l = H_0 + Σ_m c_{lm} (H_m ⊗ I_B)`.
pub fn step_hamiltonians(sys: &ControlSystem, c: &ControlVector) -> Result<Vec<CMatrix>> {
    c.check_shape(sys)?;
    let m_count = sys.n_controls();
    let hs = (0..c.intervals())
        .map(|l| {
            let mut h = sys.drift().clone();
            for (m, hm) in sys.embedded_controls().iter().enumerate().take(m_count) {
                let amp = c.get(l, m);
                if amp != 0.0 {
                    h += hm.scale(amp);
                }
            }
            h
        })
        .collect();
    Ok(hs)
}

pub fn propagate(sys: &ControlSystem, c: &ControlVector) -> Result<Propagation> {
    let step_hamiltonians = step_hamiltonians(sys, c)?;
    let delta = sys.delta();
    let step_eigen = step_hamiltonians
        .iter()
        .map(eig_hermitian)
        .collect::<Result<Vec<_>>>()?;
    let steps: Vec<CMatrix> = step_eigen.iter().map(|e| expm_from_eigen(e, delta)).collect();
    let mut total = identity(sys.dim());
    for u in &steps {
        total *= u;
    }
    if !crate::linalg::is_finite(&total) {
        return Err(Error::NonFinite("propagator"));
    }
    Ok(Propagation {
        step_hamiltonians,
        step_eigen,
        steps,
        total,
        fingerprint: control_fingerprint(c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, expm_i_hermitian, hermitian_deviation, max_abs, pauli, unitarity_deviation};
    use crate::model::{build_central_spin, build_custom, build_random_bath, Horizon};
    use crate::sampling::{gaussian_vector, random_hermitian, seeded_rng};

    #[test]
    fn zero_controls_give_drift() {
        let sys = build_central_spin(2, &[1.0, 0.5], Horizon::new(5, 1.0).unwrap()).unwrap();
        let hs = step_hamiltonians(&sys, &sys.zero_controls()).unwrap();
        assert_eq!(hs.len(), 5);
        assert!(hs.iter().all(|h| h == sys.drift()));
    }

    #[test]
    fn unit_control_adds_embedded_operator() {
        let sys = build_central_spin(1, &[1.0], Horizon::new(1, 1.0).unwrap()).unwrap();
        let c = ControlVector::for_system(&sys, vec![1.0]).unwrap();
        let hs = step_hamiltonians(&sys, &c).unwrap();
        let expect = sys.drift() + &sys.embedded_controls()[0];
        assert_eq!(hs[0], expect);
    }

    #[test]
    fn random_controls_keep_step_hamiltonians_hermitian() {
        let sys = build_random_bath(4, 1, Horizon::new(7, 1.0).unwrap()).unwrap();
        let c = ControlVector::for_system(&sys, gaussian_vector(&mut seeded_rng(2), 7, 1.0)).unwrap();
        for h in step_hamiltonians(&sys, &c).unwrap() {
            assert!(hermitian_deviation(&h) <= 1e-12);
        }
    }

    #[test]
    fn length_mismatch_rejected() {
        let sys = build_random_bath(2, 1, Horizon::new(3, 1.0).unwrap()).unwrap();
        let c = ControlVector::zeros(4, 1);
        assert!(matches!(propagate(&sys, &c), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn zero_hamiltonian_gives_identity() {
        let sys = build_custom(CMatrix::zeros(4, 4), vec![pauli()[0].clone()], 2, 2, Horizon::new(3, 1.0).unwrap())
            .unwrap();
        let prop = propagate(&sys, &sys.zero_controls()).unwrap();
        assert!(max_abs(&(prop.total() - identity(4))) < 1e-15);
    }

    #[test]
    fn single_interval_is_one_exponential() {
        let sys = build_central_spin(1, &[0.7], Horizon::new(1, 0.9).unwrap()).unwrap();
        let c = ControlVector::for_system(&sys, vec![0.4]).unwrap();
        let prop = propagate(&sys, &c).unwrap();
        let h = sys.drift() + sys.embedded_controls()[0].scale(0.4);
        let expect = expm_i_hermitian(&h, 0.9).unwrap();
        assert!(max_abs(&(prop.total() - expect)) < 1e-13);
    }

    #[test]
    fn time_ordering_first_interval_is_leftmost() {
        // H_1 = sx, H_2 = sz with δ = π/4: U = exp(-iπ/4 sx) exp(-iπ/4 sz)
        let s = pauli();
        let sys = build_custom(CMatrix::zeros(2, 2), vec![s[0].clone(), s[2].clone()], 2, 1,
            Horizon::new(2, std::f64::consts::FRAC_PI_2).unwrap())
        .unwrap();
        let c = ControlVector::for_system(&sys, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let prop = propagate(&sys, &c).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let ux = CMatrix::from_row_slice(2, 2, &[c64(r, 0.0), c64(0.0, -r), c64(0.0, -r), c64(r, 0.0)]);
        let uz = CMatrix::from_row_slice(2, 2, &[c64(r, -r), c64(0.0, 0.0), c64(0.0, 0.0), c64(r, r)]);
        let expect = &ux * &uz;
        assert!(max_abs(&(prop.total() - &expect)) < 1e-14);
        let reversed = &uz * &ux;
        assert!(max_abs(&(prop.total() - reversed)) > 0.5);
    }

    #[test]
    fn four_steps_match_ordered_exponentials() {
        let mut rng = seeded_rng(9);
        let h0 = random_hermitian(&mut rng, 4);
        let h1 = random_hermitian(&mut rng, 2);
        let sys = build_custom(h0.clone(), vec![h1.clone()], 2, 2, Horizon::new(4, 1.2).unwrap()).unwrap();
        let amps = gaussian_vector(&mut rng, 4, 1.0);
        let c = ControlVector::for_system(&sys, amps.clone()).unwrap();
        let prop = propagate(&sys, &c).unwrap();
        // independent oracle: Taylor series with 64 substeps per interval
        let embed = crate::linalg::kron(&h1, &identity(2));
        let mut expect = identity(4);
        for a in amps {
            let h = &h0 + embed.scale(a);
            let dt = 0.3 / 64.0;
            let mut step = identity(4);
            let mut term = identity(4);
            for k in 1..20 {
                term = (&term * &h) * c64(0.0, -dt / k as f64);
                step += &term;
            }
            for _ in 0..64 {
                expect *= &step;
            }
        }
        assert!(max_abs(&(prop.total() - expect)) < 1e-9);
    }

    #[test]
    fn unitary_at_desk_scale() {
        let sys = build_central_spin(3, &[1.0, 1.0, 1.0], Horizon::new(100, 20.0).unwrap()).unwrap();
        let c = ControlVector::for_system(&sys, gaussian_vector(&mut seeded_rng(4), 100, 1.0)).unwrap();
        let prop = propagate(&sys, &c).unwrap();
        assert!(unitarity_deviation(prop.total()) <= 1e-10);
        for u in prop.steps() {
            assert!(unitarity_deviation(u) <= 1e-10);
        }
    }

    #[test]
    fn halves_compose() {
        let sys = build_random_bath(4, 3, Horizon::new(10, 2.0).unwrap()).unwrap();
        let c = ControlVector::for_system(&sys, gaussian_vector(&mut seeded_rng(5), 10, 1.0)).unwrap();
        let prop = propagate(&sys, &c).unwrap();
        let composed = prop.product(0, 5) * prop.product(5, 10);
        assert!(max_abs(&(prop.total() - composed)) <= 1e-10);
    }

    #[test]
    fn suffix_frames_end_with_v() {
        let sys = build_random_bath(2, 3, Horizon::new(3, 1.0).unwrap()).unwrap();
        let c = ControlVector::for_system(&sys, vec![0.1, 0.2, 0.3]).unwrap();
        let prop = propagate(&sys, &c).unwrap();
        let v = crate::sampling::haar_unitary(&mut seeded_rng(1), 4);
        let frames = prop.suffix_frames(&v).unwrap();
        assert_eq!(frames[2], v);
        assert!(max_abs(&(&frames[0] - prop.product(1, 3) * &v)) < 1e-14);
        // U(c) V = U_1 V_1
        assert!(max_abs(&(prop.total() * &v - &prop.steps()[0] * &frames[0])) < 1e-13);
    }

    #[test]
    fn fingerprint_tracks_controls() {
        let a = ControlVector::from_vec(2, 1, vec![0.0, 1.0]).unwrap();
        let b = ControlVector::from_vec(2, 1, vec![0.0, 1.0 + 1e-15]).unwrap();
        assert_eq!(control_fingerprint(&a), control_fingerprint(&a.clone()));
        assert_ne!(control_fingerprint(&a), control_fingerprint(&b));
    }
}
