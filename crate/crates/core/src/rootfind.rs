//! Damped Newton iteration with a forward-difference Jacobian.
//!
//! Every implicit step map in the crate funnels through [`newton_solve`].
//! Once the tolerance is met, one chord step with the last Jacobian is tried
//! and kept if it lowers the residual, so converged solutions sit near the
//! roundoff floor rather than just under `tol`.

use thiserror::Error;

use crate::linalg::{self, Lu, Matrix};

/// Stopping and differencing parameters for [`newton_solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveSettings {
    /// Residual ∞-norm threshold.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative forward-difference increment for the Jacobian.
    pub fd_step: f64,
}

impl Default for SolveSettings {
    fn default() -> Self {
        SolveSettings {
            tol: 1e-12,
            max_iter: 50,
            fd_step: 1e-7,
        }
    }
}

impl SolveSettings {
    pub fn with_tol(self, tol: f64) -> Self {
        SolveSettings { tol, ..self }
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.tol > 0.0) || self.max_iter < 1 || !(self.fd_step > 0.0) {
            return Err(SolveError::InvalidSettings(*self));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SolveError {
    #[error("no convergence after {iterations} iterations (residual {residual_norm:e})")]
    MaxIterExceeded {
        last: Vec<f64>,
        residual_norm: f64,
        iterations: usize,
    },
    #[error("finite-difference Jacobian is singular at iteration {iteration}")]
    SingularJacobian { iteration: usize },
    #[error("residual is not finite")]
    NonFiniteResidual,
    #[error("invalid solver settings {0:?}")]
    InvalidSettings(SolveSettings),
}

/// A converged solve together with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
}

const DAMPING_FLOOR: f64 = 1e-10;

pub fn newton_solve<F>(residual: F, guess: &[f64], settings: &SolveSettings) -> Result<Solution, SolveError>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    settings.validate()?;
    let n = guess.len();
    let mut x = guess.to_vec();
    let mut r = residual(&x);
    if !all_finite(&r) {
        return Err(SolveError::NonFiniteResidual);
    }
    let mut norm = linalg::norm_inf(&r);
    let mut iterations = 0;
    let mut last_lu = None;

    while norm > settings.tol {
        if iterations == settings.max_iter {
            return Err(SolveError::MaxIterExceeded {
                last: x,
                residual_norm: norm,
                iterations,
            });
        }
        let jac = fd_jacobian(&residual, &x, &r, settings.fd_step);
        let lu = Lu::new(&jac).ok_or(SolveError::SingularJacobian {
            iteration: iterations,
        })?;
        let dx = lu.solve(&r);
        last_lu = Some(lu);
        iterations += 1;

        let mut lambda = 1.0;
        loop {
            let trial = linalg::axpy(&x, -lambda, &dx);
            let r_trial = residual(&trial);
            let finite = all_finite(&r_trial);
            let n_trial = if finite { linalg::norm_inf(&r_trial) } else { f64::INFINITY };
            if n_trial < norm || (lambda <= DAMPING_FLOOR && finite) {
                x = trial;
                r = r_trial;
                norm = n_trial;
                break;
            }
            if lambda <= DAMPING_FLOOR {
                return Err(SolveError::NonFiniteResidual);
            }
            lambda = (lambda * 0.5).max(DAMPING_FLOOR);
        }
        debug_assert_eq!(x.len(), n);
    }

    if let Some(lu) = last_lu.filter(|_| norm > 0.0) {
        let trial = linalg::axpy(&x, -1.0, &lu.solve(&r));
        let r_trial = residual(&trial);
        if all_finite(&r_trial) && linalg::norm_inf(&r_trial) < norm {
            norm = linalg::norm_inf(&r_trial);
            x = trial;
        }
    }

    Ok(Solution {
        x,
        iterations,
        residual_norm: norm,
    })
}

fn fd_jacobian<F>(residual: &F, x: &[f64], r: &[f64], fd_step: f64) -> Matrix
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = x.len();
    let m = r.len();
    let mut jac = Matrix::zeros(m, n);
    let mut xp = x.to_vec();
    for j in 0..n {
        let delta = fd_step * x[j].abs().max(1.0);
        xp[j] = x[j] + delta;
        // exact representable increment
        let dj = xp[j] - x[j];
        let rp = residual(&xp);
        for i in 0..m {
            jac[(i, j)] = (rp[i] - r[i]) / dj;
        }
        xp[j] = x[j];
    }
    jac
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}
