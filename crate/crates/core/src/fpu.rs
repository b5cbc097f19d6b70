//! Fermi–Pasta–Ulam lattice with alternating stiff linear and soft quartic
//! springs, unit masses, and the IMEX integrator.
//!
//! With `n = 2m` coordinates (1-based in the formulas below)
//!
//! ```text
//! H = ½ Σ p_k² + ω²/4 Σ_{i=1}^m (q_{2i} − q_{2i−1})² + Σ_{i=0}^m (q_{2i+1} − q_{2i})⁴,
//! ```
//!
//! where `q_0 = q_{2m+1} = 0` are the fixed walls.
//!
//! The IMEX step is a half kick with the quartic force, one implicit-midpoint
//! step of the stiff linear system `q̇ = p, ṗ = −K q`, and a second quartic
//! half kick. The midpoint substep solves
//! `(I + h²/4 K) p1 = p0 − h K q0 − h²/4 K p0` and sets
//! `q1 = q0 + h/2 (p0 + p1)`; the matrix is factored once per step size.

use std::f64::consts::SQRT_2;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::genfunc::OneStepMap;
use crate::linalg::{axpy, Cholesky, Matrix};
use crate::state::PhaseState;
use crate::system::{Potential, SeparableSystem};
use crate::taylor_vi::{canned_method, CannedMethod};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpuSystem {
    m: usize,
    omega: f64,
}

/// Per-spring harmonic energies of the stiff springs and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatoryEnergy {
    pub per_spring: Vec<f64>,
    pub total: f64,
}

impl FpuSystem {
    pub fn new(m: usize, omega: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("FPU lattice needs m >= 1".into()));
        }
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::InvalidArgument(format!("omega must be > 0, got {omega}")));
        }
        Ok(FpuSystem { m, omega })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn dim(&self) -> usize {
        2 * self.m
    }

    fn check(&self, s: &PhaseState) -> Result<()> {
        s.expect_dim(self.dim())
    }

    /// `ω²/4 Σ (q_{2i} − q_{2i−1})²`.
    pub fn stiff_potential(&self, q: &[f64]) -> f64 {
        let w2 = self.omega * self.omega;
        q.chunks_exact(2).map(|c| (c[1] - c[0]).powi(2)).sum::<f64>() * w2 / 4.0
    }

    pub fn stiff_grad(&self, q: &[f64]) -> Vec<f64> {
        let half_w2 = 0.5 * self.omega * self.omega;
        let mut g = vec![0.0; q.len()];
        for (i, c) in q.chunks_exact(2).enumerate() {
            let f = half_w2 * (c[1] - c[0]);
            g[2 * i] = -f;
            g[2 * i + 1] = f;
        }
        g
    }

    /// `Σ_{i=0}^m (q_{2i+1} − q_{2i})⁴` with the wall values set to zero.
    pub fn quartic_potential(&self, q: &[f64]) -> f64 {
        let n = q.len();
        let at = |k: usize| if k == 0 || k > n { 0.0 } else { q[k - 1] };
        (0..=self.m).map(|i| (at(2 * i + 1) - at(2 * i)).powi(4)).sum()
    }

    pub fn quartic_grad(&self, q: &[f64]) -> Vec<f64> {
        let n = q.len();
        let at = |k: usize| if k == 0 || k > n { 0.0 } else { q[k - 1] };
        let mut g = vec![0.0; n];
        for i in 0..=self.m {
            let (lo, hi) = (2 * i, 2 * i + 1);
            let f = 4.0 * (at(hi) - at(lo)).powi(3);
            if hi <= n {
                g[hi - 1] += f;
            }
            if lo >= 1 {
                g[lo - 1] -= f;
            }
        }
        g
    }

    pub fn potential(&self) -> Potential {
        let (a, b) = (*self, *self);
        Potential::new(
            move |q| a.stiff_potential(q) + a.quartic_potential(q),
            move |q| crate::linalg::add(&b.stiff_grad(q), &b.quartic_grad(q)),
        )
    }

    /// The lattice as a unit-mass separable system, for the generic methods.
    pub fn as_separable(&self) -> SeparableSystem {
        SeparableSystem::with_unit_mass(self.dim(), self.potential())
    }

    /// Stiffness matrix `K` of the linear springs, block diagonal.
    pub fn stiffness(&self) -> Matrix {
        let n = self.dim();
        let half_w2 = 0.5 * self.omega * self.omega;
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..self.m {
            let (a, b) = (2 * i, 2 * i + 1);
            rows[a][a] = half_w2;
            rows[b][b] = half_w2;
            rows[a][b] = -half_w2;
            rows[b][a] = -half_w2;
        }
        Matrix::from_rows(&rows)
    }

    /// Benchmark initial data: in mean/difference coordinates of the
    /// first spring pair, slow displacement 1, velocity 1; fast displacement
    /// `1/ω`, velocity 1; everything else at rest.
    pub fn initial_state(&self) -> PhaseState {
        let n = self.dim();
        let mut q = vec![0.0; n];
        let mut p = vec![0.0; n];
        let (x0, x1) = (1.0, 1.0 / self.omega);
        let (y0, y1) = (1.0, 1.0);
        q[0] = (x0 - x1) / SQRT_2;
        q[1] = (x0 + x1) / SQRT_2;
        p[0] = (y0 - y1) / SQRT_2;
        p[1] = (y0 + y1) / SQRT_2;
        PhaseState::new(q, p).expect("finite initial data")
    }

    /// Maps back to `(q, p)` the slow/fast coordinates `(x0_j, x1_j)` and
    /// their velocities.
    pub fn from_modes(&self, x0: &[f64], x1: &[f64], y0: &[f64], y1: &[f64]) -> Result<PhaseState> {
        for v in [x0, x1, y0, y1] {
            if v.len() != self.m {
                return Err(Error::DimensionMismatch {
                    expected: self.m,
                    found: v.len(),
                });
            }
        }
        let mut q = Vec::with_capacity(self.dim());
        let mut p = Vec::with_capacity(self.dim());
        for j in 0..self.m {
            q.push((x0[j] - x1[j]) / SQRT_2);
            q.push((x0[j] + x1[j]) / SQRT_2);
            p.push((y0[j] - y1[j]) / SQRT_2);
            p.push((y0[j] + y1[j]) / SQRT_2);
        }
        PhaseState::new(q, p)
    }
}

pub fn fpu_energy(sys: &FpuSystem, s: &PhaseState) -> Result<f64> {
    sys.check(s)?;
    let kinetic = 0.5 * s.p().iter().map(|p| p * p).sum::<f64>();
    Ok(kinetic + sys.stiff_potential(s.q()) + sys.quartic_potential(s.q()))
}

/// `I_j = ½(y_j² + ω² x_j²)` with `x_j = (q_{2j} − q_{2j−1})/√2` and `y_j`
/// the same difference of momenta.
pub fn oscillatory_energy(sys: &FpuSystem, s: &PhaseState) -> Result<OscillatoryEnergy> {
    sys.check(s)?;
    let w2 = sys.omega * sys.omega;
    let per_spring: Vec<f64> = s
        .q()
        .chunks_exact(2)
        .zip(s.p().chunks_exact(2))
        .map(|(q, p)| {
            let x = (q[1] - q[0]) / SQRT_2;
            let y = (p[1] - p[0]) / SQRT_2;
            0.5 * (y * y + w2 * x * x)
        })
        .collect();
    let total = per_spring.iter().sum();
    Ok(OscillatoryEnergy { per_spring, total })
}

/// IMEX stepper with the midpoint matrix factored for one step size.
#[derive(Debug, Clone)]
pub struct ImexStepper {
    sys: FpuSystem,
    h: f64,
    k: Matrix,
    factor: Cholesky,
    quartic: bool,
}

impl ImexStepper {
    pub fn new(sys: FpuSystem, h: f64) -> Result<Self> {
        if h == 0.0 || !h.is_finite() {
            return Err(Error::ZeroStep);
        }
        let k = sys.stiffness();
        let n = sys.dim();
        let c = h * h / 4.0;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| f64::from(u8::from(i == j)) + c * k[(i, j)]).collect())
            .collect();
        let factor = Cholesky::new(&Matrix::from_rows(&rows))
            .ok_or_else(|| Error::InvalidArgument(format!("midpoint matrix not SPD at h = {h}")))?;
        Ok(ImexStepper {
            sys,
            h,
            k,
            factor,
            quartic: true,
        })
    }

    /// Drops the quartic force, leaving the plain midpoint rule on the stiff
    /// springs.
    pub fn without_quartic(mut self) -> Self {
        self.quartic = false;
        self
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    fn slow_kick(&self, q: &[f64], p: &[f64], tau: f64) -> Vec<f64> {
        if self.quartic {
            axpy(p, -tau, &self.sys.quartic_grad(q))
        } else {
            p.to_vec()
        }
    }

    pub fn step(&self, s: &PhaseState) -> Result<PhaseState> {
        self.sys.check(s)?;
        let h = self.h;
        let q0 = s.q();
        let p0 = self.slow_kick(q0, s.p(), 0.5 * h);
        let kq = self.k.mul_vec(q0);
        let kp = self.k.mul_vec(&p0);
        let rhs: Vec<f64> = (0..q0.len())
            .map(|i| p0[i] - h * kq[i] - 0.25 * h * h * kp[i])
            .collect();
        let p1 = self.factor.solve(&rhs);
        let q1: Vec<f64> = (0..q0.len()).map(|i| q0[i] + 0.5 * h * (p0[i] + p1[i])).collect();
        let p1 = self.slow_kick(&q1, &p1, 0.5 * h);
        PhaseState::new(q1, p1)
    }
}

pub fn imex_step(sys: &FpuSystem, s: &PhaseState, h: f64) -> Result<PhaseState> {
    ImexStepper::new(*sys, h)?.step(s)
}

/// IMEX as a one-step map; refactors the midpoint matrix whenever `h` changes.
pub fn imex_map(sys: &FpuSystem) -> OneStepMap {
    let sys = *sys;
    let cache: Arc<std::sync::Mutex<Option<ImexStepper>>> = Arc::default();
    OneStepMap::new("imex", move |s, h| {
        let mut slot = cache.lock().unwrap_or_else(|e| e.into_inner());
        let stepper = match slot.take() {
            Some(st) if st.h == h => st,
            _ => ImexStepper::new(sys, h)?,
        };
        let out = stepper.step(s);
        *slot = Some(stepper);
        out
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpuMethod {
    StormerVerlet,
    HTviTrapezoid,
    Imex,
}

impl FpuMethod {
    pub const ALL: [FpuMethod; 3] = [FpuMethod::StormerVerlet, FpuMethod::HTviTrapezoid, FpuMethod::Imex];

    pub fn name(self) -> &'static str {
        match self {
            FpuMethod::StormerVerlet => "sv",
            FpuMethod::HTviTrapezoid => "htvi",
            FpuMethod::Imex => "imex",
        }
    }

    pub fn map(self, sys: &FpuSystem) -> OneStepMap {
        match self {
            FpuMethod::StormerVerlet => canned_method(CannedMethod::StormerVerlet, &sys.as_separable()),
            FpuMethod::HTviTrapezoid => canned_method(CannedMethod::HTviTrapezoid, &sys.as_separable()),
            FpuMethod::Imex => imex_map(sys),
        }
    }
}

impl std::str::FromStr for FpuMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FpuMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

#[cfg(test)]
mod tests;
