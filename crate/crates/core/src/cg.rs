//! Unpreconditioned conjugate gradients, used as the ground-truth solver.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgConfig {
    /// Relative residual tolerance `‖Ax − b‖ ≤ tol·‖b‖`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CgConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 10_000 }
    }
}

impl CgConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(invalid("cg tol must be positive"));
        }
        if self.max_iter == 0 {
            return Err(invalid("cg max_iter must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final `‖Ax − b‖₂` (recurrence value).
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

fn check_dims(a: &CsrMatrix, x_len: usize, b_len: usize) -> Result<()> {
    if a.n_rows() != a.n_cols() || a.n_cols() != x_len || a.n_rows() != b_len {
        return Err(invalid(alloc::format!(
            "dimension mismatch: matrix {}x{}, x {}, b {}",
            a.n_rows(),
            a.n_cols(),
            x_len,
            b_len
        )));
    }
    Ok(())
}

/// Runs CG from `x = 0` until `‖r‖ ≤ target` or `max_iter` iterations.
fn iterate(a: &CsrMatrix, b: &[f64], target: f64, max_iter: usize) -> CgSolution {
    let n = b.len();
    let mut x = alloc::vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = alloc::vec![0.0; n];
    let mut rr = dot(&r, &r);
    let mut iterations = 0;
    while libm::sqrt(rr) > target && iterations < max_iter {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_next = dot(&r, &r);
        let beta = rr_next / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_next;
        iterations += 1;
    }
    CgSolution { x, iterations, residual: libm::sqrt(rr) }
}

pub fn cg_solve(a: &CsrMatrix, b: &[f64], cfg: &CgConfig) -> Result<CgSolution> {
    cfg.validate()?;
    check_dims(a, b.len(), b.len())?;
    let target = cfg.tol * norm(b);
    let sol = iterate(a, b, target, cfg.max_iter);
    let residual = residual_norm(a, &sol.x, b)?;
    // The recurrence residual can drift from the true one; judge on the true value
    // with a little slack for round-off.
    if sol.residual > target && residual > target {
        return Err(Error::ConvergenceFailure { iterations: sol.iterations, residual });
    }
    Ok(CgSolution { residual, ..sol })
}

/// Exactly `iterations` CG steps (fewer if the residual vanishes); never fails.
pub fn cg_estimate(a: &CsrMatrix, b: &[f64], iterations: usize) -> Result<Vec<f64>> {
    check_dims(a, b.len(), b.len())?;
    Ok(iterate(a, b, 0.0, iterations).x)
}

pub fn residual_norm(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Result<f64> {
    check_dims(a, x.len(), b.len())?;
    let ax = a.mul_vec(x);
    Ok(libm::sqrt(ax.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()))
}
