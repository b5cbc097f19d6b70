//! Numerical verifiers: convergence order, symplecticity, symmetry, adjoint
//! consistency and energy-error sweeps.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::genfunc::{adjoint_map, adjoint_right, DiscreteRightHamiltonian, OneStepMap};
use crate::linalg::{axpy, Matrix};
use crate::state::PhaseState;
use crate::system::SeparableSystem;

/// Central-difference step for Jacobians of step maps.
pub const JACOBIAN_FD_STEP: f64 = 1e-6;
/// Value substituted for runs that blow up or whose solver fails.
pub const OVERFLOW_SUBSTITUTE: f64 = 1e6;
/// Errors at or below this level carry no usable slope information.
pub const DEGENERATE_ERROR: f64 = 1e-12;

/// Number of steps covering `[0, t]`: the nearest integer to `t / h`.
pub fn step_count(t: f64, h: f64) -> usize {
    (t / h).abs().round() as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderEstimate {
    pub h_values: Vec<f64>,
    pub errors: Vec<f64>,
    /// `None` when every error is at roundoff level (exact methods).
    pub slope: Option<f64>,
}

impl OrderEstimate {
    pub fn is_degenerate(&self) -> bool {
        self.slope.is_none()
    }
}

/// Least-squares slope of `log y` against `log x`, independent of input
/// order.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let mut pts: Vec<(f64, f64)> = x.iter().zip(y).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
        return None;
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Global error at `t_final` for each `h`, and the fitted order.
pub fn convergence_order<R>(
    map: &OneStepMap,
    reference: R,
    s0: &PhaseState,
    t_final: f64,
    h_values: &[f64],
) -> Result<OrderEstimate>
where
    R: Fn(&PhaseState, f64) -> Result<PhaseState>,
{
    if h_values.len() < 3 {
        return Err(Error::InvalidArgument("order estimation needs at least 3 step sizes".into()));
    }
    let exact = reference(s0, t_final)?;
    let mut errors = Vec::with_capacity(h_values.len());
    for &h in h_values {
        let n = step_count(t_final, h);
        if n == 0 || ((n as f64) * h - t_final).abs() > 1e-9 * t_final.abs().max(1.0) {
            return Err(Error::InvalidArgument(format!("h = {h} does not divide T = {t_final}")));
        }
        errors.push(map.iterate(s0, h, n)?.distance(&exact));
    }
    let slope = if errors.iter().all(|e| *e <= DEGENERATE_ERROR) {
        None
    } else {
        log_log_slope(h_values, &errors)
    };
    Ok(OrderEstimate {
        h_values: h_values.to_vec(),
        errors,
        slope,
    })
}

/// Central-difference Jacobian of `s ↦ map(s, h)` in flat `(q, p)` layout.
pub fn jacobian(map: &OneStepMap, s: &PhaseState, h: f64, delta: f64) -> Result<Matrix> {
    let x = s.to_flat();
    let dim = x.len();
    let mut cols = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += delta;
        xm[i] -= delta;
        let fp = map.step(&PhaseState::from_flat(&xp)?, h)?.to_flat();
        let fm = map.step(&PhaseState::from_flat(&xm)?, h)?.to_flat();
        cols.push(axpy(&fp, -1.0, &fm).into_iter().map(|d| d / (2.0 * delta)).collect::<Vec<_>>());
    }
    let rows: Vec<Vec<f64>> = (0..dim).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
    let jac = Matrix::from_rows(&rows);
    if !jac.is_finite() {
        return Err(Error::NonFinite("Jacobian"));
    }
    Ok(jac)
}

/// Canonical `J = [[0, I], [−I, 0]]` of size `2n`.
pub fn canonical_j(n: usize) -> Matrix {
    let mut j = Matrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

/// `‖DᵀJD − J‖∞` (largest entry) with `D` the finite-difference Jacobian.
pub fn symplecticity_defect(map: &OneStepMap, s: &PhaseState, h: f64) -> Result<f64> {
    let d = jacobian(map, s, h, JACOBIAN_FD_STEP)?;
    let j = canonical_j(s.dim());
    Ok(d.transpose().mul(&j).mul(&d).sub(&j).max_abs())
}

/// `‖Φ_h(Φ_{−h}(s)) − s‖∞`.
pub fn symmetry_defect(map: &OneStepMap, s: &PhaseState, h: f64) -> Result<f64> {
    let back = map.step(s, -h)?;
    Ok(map.step(&back, h)?.distance(s))
}

/// Distance between the map of the adjoint generating function and the
/// numerically computed adjoint of the generated map.
pub fn adjoint_defect(hd: &DiscreteRightHamiltonian, s: &PhaseState, h: f64) -> Result<f64> {
    let via_gf = adjoint_right(hd).step(s, h)?;
    let via_map = adjoint_map(&hd.to_map()).step(s, h)?;
    Ok(via_gf.distance(&via_map))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub h_values: Vec<f64>,
    /// `max |H(t) − H(0)|` per step size, or the substitute.
    pub metrics: Vec<f64>,
    /// Whether the run at the same index was replaced by the substitute.
    pub substituted: Vec<bool>,
    pub overflow_substitute: f64,
}

impl SweepResult {
    pub fn len(&self) -> usize {
        self.h_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h_values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.h_values.iter().copied().zip(self.metrics.iter().copied())
    }
}

/// Maximum energy deviation along one trajectory, `None` on blow-up or
/// solver failure.
pub fn max_energy_error<E>(map: &OneStepMap, energy: &E, s0: &PhaseState, t_final: f64, h: f64) -> Option<f64>
where
    E: Fn(&PhaseState) -> f64,
{
    let e0 = energy(s0);
    if !e0.is_finite() {
        return None;
    }
    let mut s = s0.clone();
    let mut worst = 0.0f64;
    for _ in 0..step_count(t_final, h) {
        s = map.step(&s, h).ok()?;
        let e = energy(&s);
        if !e.is_finite() {
            return None;
        }
        worst = worst.max((e - e0).abs());
    }
    worst.is_finite().then_some(worst)
}

/// Runs [`max_energy_error`] for every `h` in parallel; results are ordered
/// as `h_values`.
pub fn energy_error_sweep<E>(
    map: &OneStepMap,
    energy: E,
    s0: &PhaseState,
    t_final: f64,
    h_values: &[f64],
    overflow_substitute: f64,
) -> SweepResult
where
    E: Fn(&PhaseState) -> f64 + Sync,
{
    let runs: Vec<Option<f64>> = h_values
        .par_iter()
        .map(|&h| max_energy_error(map, &energy, s0, t_final, h))
        .collect();
    SweepResult {
        h_values: h_values.to_vec(),
        metrics: runs.iter().map(|r| r.unwrap_or(overflow_substitute)).collect(),
        substituted: runs.iter().map(Option::is_none).collect(),
        overflow_substitute,
    }
}

/// Classical fourth-order Runge–Kutta for `q̇ = M⁻¹p, ṗ = −∇V`, used as a
/// reference flow with many small substeps.
pub fn rk4_flow(sys: &SeparableSystem, s: &PhaseState, t: f64, substeps: usize) -> Result<PhaseState> {
    s.expect_dim(sys.dim())?;
    if substeps == 0 {
        return Err(Error::InvalidArgument("rk4 needs at least one substep".into()));
    }
    let dt = t / substeps as f64;
    let f = |q: &[f64], p: &[f64]| (sys.inv_mass(p), sys.grad_potential(q).into_iter().map(|g| -g).collect::<Vec<_>>());
    let (mut q, mut p) = (s.q().to_vec(), s.p().to_vec());
    for _ in 0..substeps {
        let (k1q, k1p) = f(&q, &p);
        let (k2q, k2p) = f(&axpy(&q, 0.5 * dt, &k1q), &axpy(&p, 0.5 * dt, &k1p));
        let (k3q, k3p) = f(&axpy(&q, 0.5 * dt, &k2q), &axpy(&p, 0.5 * dt, &k2p));
        let (k4q, k4p) = f(&axpy(&q, dt, &k3q), &axpy(&p, dt, &k3p));
        for i in 0..q.len() {
            q[i] += dt / 6.0 * (k1q[i] + 2.0 * k2q[i] + 2.0 * k3q[i] + k4q[i]);
            p[i] += dt / 6.0 * (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i]);
        }
    }
    PhaseState::new(q, p)
}

/// Störmer–Verlet with step `h_ref`, the fallback reference when no closed
/// form flow is available.
pub fn verlet_reference(sys: &SeparableSystem, s: &PhaseState, t: f64, h_ref: f64) -> Result<PhaseState> {
    let sv = crate::taylor_vi::canned_method(crate::taylor_vi::CannedMethod::StormerVerlet, sys);
    let n = step_count(t, h_ref).max(1);
    sv.iterate(s, t / n as f64, n)
}

#[cfg(test)]
mod tests;
