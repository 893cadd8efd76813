//! Exact propagation of `exp(-i H_cond t)` through a validated
//! eigendecomposition.
//!
//! The conditional Hamiltonians of all models here are time-independent and
//! of moderate dimension, so a one-off dense eigendecomposition turns every
//! no-jump propagation into two dense matrix-vector products, independent of
//! the requested time. The decomposition is accepted only when the residual
//! and the conditioning of the eigenvector matrix pass strict checks;
//! otherwise callers fall back to step-based integration.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Inverse, OperationNorm};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::quantum::Operator;

/// Eigendecomposition `H = P diag(lambda) P^{-1}` of a (generally
/// non-Hermitian) conditional Hamiltonian.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    eigvecs: Array2<C64>,
    eigvecs_inv: Array2<C64>,
    eigvals: Array1<C64>,
    dim: usize,
}

impl SpectralPropagator {
    /// Decompose `h` and validate residual and conditioning. Fails when the
    /// matrix is too close to defective for propagation to be trustworthy.
    pub fn new(h: &Operator) -> Result<Self> {
        let dense = h.to_dense();
        let dim = h.dim();
        let (eigvals, eigvecs) = dense
            .eig()
            .map_err(|e| Error::Integration(format!("eigendecomposition failed: {e}")))?;
        let eigvecs_inv = eigvecs
            .inv()
            .map_err(|e| Error::Integration(format!("eigenvector inversion failed: {e}")))?;

        // residual check: ||H P - P diag(lambda)|| relative to ||H||
        let hp = dense.dot(&eigvecs);
        let mut pl = eigvecs.clone();
        for (j, lam) in eigvals.iter().enumerate() {
            for i in 0..dim {
                pl[(i, j)] *= lam;
            }
        }
        let h_norm = dense.opnorm_fro().unwrap_or(1.0).max(1e-300);
        let resid = (&hp - &pl).opnorm_fro().unwrap_or(f64::INFINITY) / h_norm;
        if resid > 1e-10 {
            return Err(Error::Integration(format!(
                "spectral residual {resid:.3e} too large"
            )));
        }
        // conditioning check via ||P|| ||P^-1||
        let cond = eigvecs.opnorm_fro().unwrap_or(f64::INFINITY)
            * eigvecs_inv.opnorm_fro().unwrap_or(f64::INFINITY)
            / dim as f64;
        if !cond.is_finite() || cond > 1e8 {
            return Err(Error::Integration(format!(
                "eigenvector matrix too ill-conditioned (cond ~ {cond:.3e})"
            )));
        }
        Ok(Self {
            eigvecs,
            eigvecs_inv,
            eigvals,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Transform a state into the eigenbasis; the result can be propagated to
    /// any number of times cheaply.
    pub fn to_eigenbasis(&self, psi: &[C64]) -> Vec<C64> {
        debug_assert_eq!(psi.len(), self.dim);
        let mut c = vec![C64::new(0.0, 0.0); self.dim];
        for i in 0..self.dim {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..self.dim {
                acc += self.eigvecs_inv[(i, j)] * psi[j];
            }
            c[i] = acc;
        }
        c
    }

    /// `psi(t) = P exp(-i lambda t) c` for eigenbasis coefficients `c`.
    pub fn propagate_coeffs(&self, coeffs: &[C64], t: f64, out: &mut [C64]) {
        debug_assert_eq!(coeffs.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        let phased: Vec<C64> = coeffs
            .iter()
            .zip(self.eigvals.iter())
            .map(|(c, lam)| c * (-C64::i() * lam * t).exp())
            .collect();
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..self.dim {
                acc += self.eigvecs[(i, j)] * phased[j];
            }
            *o = acc;
        }
    }

    /// `exp(-i H t) psi` in one call.
    pub fn propagate(&self, psi: &[C64], t: f64) -> Vec<C64> {
        let c = self.to_eigenbasis(psi);
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        self.propagate_coeffs(&c, t, &mut out);
        out
    }

    /// Squared norm of the propagated state, for jump-time thresholding.
    pub fn norm_sq_at(&self, coeffs: &[C64], t: f64, scratch: &mut [C64]) -> f64 {
        self.propagate_coeffs(coeffs, t, scratch);
        scratch.iter().map(|x| x.norm_sqr()).sum()
    }
}
