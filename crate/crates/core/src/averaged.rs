//! Exact harmonic-oscillator integrators and averaged integrators for
//! `H = ½(p² + q²) + ε V_B(q)`.
//!
//! The unperturbed part is the unit harmonic oscillator acting componentwise.
//! Its boundary-value problems have closed forms: with `(q0, q1)` data the
//! trajectory is `[q0 sin(h−t) + q1 sin t] / sin h`, with `(q0, p1)` data it is
//! `[q0 cos(h−t) + p1 sin t] / cos h`. The first is singular at `h = kπ`, the
//! second at odd multiples of `π/2`; the averaged integrators inherit those
//! singular sets.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::genfunc::{DiscreteLagrangian, DiscreteRightHamiltonian, GeneratingFunction, OneStepMap};
use crate::quadrature::QuadratureRule;
use crate::state::PhaseState;
use crate::system::Potential;

/// `q1 = q0 cos h + p0 sin h`, `p1 = q1 cot h − q0 csc h`. Deliberately
/// unguarded near `h = kπ`.
pub fn exact_dl_ho_step(s: &PhaseState, h: f64) -> Result<PhaseState> {
    let (sn, cs) = h.sin_cos();
    let cot = cs / sn;
    let csc = 1.0 / sn;
    let q1: Vec<f64> = s.q().iter().zip(s.p()).map(|(q, p)| q * cs + p * sn).collect();
    let p1 = q1.iter().zip(s.q()).map(|(q1, q0)| q1 * cot - q0 * csc).collect();
    PhaseState::new(q1, p1).map_err(|_| Error::NonFinite("exact discrete Lagrangian step"))
}

/// `p1 = p0 cos h − q0 sin h`, `q1 = p1 tan h + q0 sec h`. Deliberately
/// unguarded near odd multiples of `π/2`.
pub fn exact_dh_ho_step(s: &PhaseState, h: f64) -> Result<PhaseState> {
    let (sn, cs) = h.sin_cos();
    let tan = sn / cs;
    let sec = 1.0 / cs;
    let p1: Vec<f64> = s.q().iter().zip(s.p()).map(|(q, p)| p * cs - q * sn).collect();
    let q1 = p1.iter().zip(s.q()).map(|(p1, q0)| p1 * tan + q0 * sec).collect();
    PhaseState::new(q1, p1).map_err(|_| Error::NonFinite("exact discrete right Hamiltonian step"))
}

/// Exact initial-value rotation by angle `h`; never singular.
pub fn ho_rotation(s: &PhaseState, h: f64) -> Result<PhaseState> {
    let (q, p) = rotate(s.q(), s.p(), h);
    PhaseState::new(q, p)
}

fn rotate(q: &[f64], p: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let (sn, cs) = h.sin_cos();
    let q1 = q.iter().zip(p).map(|(q, p)| q * cs + p * sn).collect();
    let p1 = q.iter().zip(p).map(|(q, p)| p * cs - q * sn).collect();
    (q1, p1)
}

fn rotation_predictor(s: &PhaseState, h: f64) -> (Vec<f64>, Vec<f64>) {
    rotate(s.q(), s.p(), h)
}

pub fn exact_dl_ho_map() -> OneStepMap {
    OneStepMap::new("exact_dl_ho", exact_dl_ho_step)
}

pub fn exact_dh_ho_map() -> OneStepMap {
    OneStepMap::new("exact_dh_ho", exact_dh_ho_step)
}

pub fn ho_rotation_map() -> OneStepMap {
    OneStepMap::new("ho_rotation", ho_rotation)
}

/// `L_d^E(q0, q1; h) = Σ [(q0² + q1²) cos h − 2 q0 q1] / (2 sin h)`.
pub fn exact_ho_lagrangian() -> DiscreteLagrangian {
    GeneratingFunction::analytic(
        "exact_ho_lagrangian",
        |q0, q1, h| {
            let (sn, cs) = h.sin_cos();
            q0.iter()
                .zip(q1)
                .map(|(a, b)| ((a * a + b * b) * cs - 2.0 * a * b) / (2.0 * sn))
                .sum()
        },
        |q0, q1, h| {
            let (sn, cs) = h.sin_cos();
            q0.iter().zip(q1).map(|(a, b)| (a * cs - b) / sn).collect()
        },
        |q0, q1, h| {
            let (sn, cs) = h.sin_cos();
            q0.iter().zip(q1).map(|(a, b)| (b * cs - a) / sn).collect()
        },
    )
    .with_predictor(rotation_predictor)
}

/// `H^{+,E}(q0, p1; h) = Σ q0 p1 sec h + ½(p1² + q0²) tan h`.
pub fn exact_ho_right_hamiltonian() -> DiscreteRightHamiltonian {
    GeneratingFunction::analytic(
        "exact_ho_right_hamiltonian",
        |q0, p1, h| {
            let (sn, cs) = h.sin_cos();
            q0.iter()
                .zip(p1)
                .map(|(q, p)| (q * p + 0.5 * (p * p + q * q) * sn) / cs)
                .sum()
        },
        |q0, p1, h| {
            let (sn, cs) = h.sin_cos();
            q0.iter().zip(p1).map(|(q, p)| (p + q * sn) / cs).collect()
        },
        |q0, p1, h| {
            let (sn, cs) = h.sin_cos();
            q0.iter().zip(p1).map(|(q, p)| (q + p * sn) / cs).collect()
        },
    )
    .with_predictor(rotation_predictor)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryVariant {
    /// Data `(q0, q1)`; singular where `sin h = 0`.
    Positions,
    /// Data `(q0, p1)`; singular where `cos h = 0`.
    PositionMomentum,
}

impl BoundaryVariant {
    fn singular_measure(self, h: f64) -> (&'static str, f64) {
        match self {
            BoundaryVariant::Positions => ("sin", h.sin().abs()),
            BoundaryVariant::PositionMomentum => ("cos", h.cos().abs()),
        }
    }

    fn check(self, h: f64, guard: f64) -> Result<()> {
        let (which, distance) = self.singular_measure(h);
        if distance <= guard {
            return Err(Error::SingularBvp { h, which, distance });
        }
        Ok(())
    }
}

/// Harmonic-oscillator trajectory `q_A(t) = c₁ cos t + c₂ sin t` matching
/// two-point boundary data.
#[derive(Debug, Clone, PartialEq)]
pub struct HoBoundaryFlow {
    variant: BoundaryVariant,
    h: f64,
    c1: Vec<f64>,
    c2: Vec<f64>,
}

/// Solves the boundary-value problem; `a` is `q0`, `b` is `q1` or `p1`
/// depending on `variant`. Refuses when within `guard` of the singular set.
pub fn ho_bvp(variant: BoundaryVariant, a: &[f64], b: &[f64], h: f64, guard: f64) -> Result<HoBoundaryFlow> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    variant.check(h, guard)?;
    let (sn, cs) = h.sin_cos();
    let c2 = match variant {
        BoundaryVariant::Positions => a.iter().zip(b).map(|(q0, q1)| (q1 - q0 * cs) / sn).collect(),
        BoundaryVariant::PositionMomentum => a.iter().zip(b).map(|(q0, p1)| (p1 + q0 * sn) / cs).collect(),
    };
    Ok(HoBoundaryFlow {
        variant,
        h,
        c1: a.to_vec(),
        c2,
    })
}

impl HoBoundaryFlow {
    pub fn variant(&self) -> BoundaryVariant {
        self.variant
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn coefficients(&self) -> (&[f64], &[f64]) {
        (&self.c1, &self.c2)
    }

    pub fn position(&self, t: f64) -> Vec<f64> {
        let (sn, cs) = t.sin_cos();
        self.c1.iter().zip(&self.c2).map(|(a, b)| a * cs + b * sn).collect()
    }

    pub fn velocity(&self, t: f64) -> Vec<f64> {
        let (sn, cs) = t.sin_cos();
        self.c1.iter().zip(&self.c2).map(|(a, b)| -a * sn + b * cs).collect()
    }
}

/// Scalar convenience wrapper for one-dimensional flows.
pub fn eval_q_a(flow: &HoBoundaryFlow, t: f64) -> f64 {
    flow.position(t)[0]
}

#[derive(Debug, Clone)]
pub struct AveragedConfig {
    pub epsilon: f64,
    /// Rule for `∫₀ʰ V_B(q_A(t)) dt` and its partials.
    pub quadrature: QuadratureRule,
    /// Distance to the singular set at which steps refuse; `0` disables.
    pub singular_guard: f64,
}

impl AveragedConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!("epsilon must be >= 0, got {epsilon}")));
        }
        Ok(AveragedConfig {
            epsilon,
            quadrature: QuadratureRule::gauss_legendre(4)?,
            singular_guard: 1e-8,
        })
    }

    pub fn with_guard(mut self, guard: f64) -> Self {
        self.singular_guard = guard.max(0.0);
        self
    }

    pub fn with_quadrature(mut self, quadrature: QuadratureRule) -> Self {
        self.quadrature = quadrature;
        self
    }
}

/// `∫₀ʰ ∇V_B(q_A(t)) ⊙ w(t) dt` for a trajectory and componentwise weight.
fn weighted_force_integral(
    quad: &QuadratureRule,
    v_b: &Potential,
    h: f64,
    traj: impl Fn(f64) -> Vec<f64>,
    weight: impl Fn(f64) -> f64,
    n: usize,
) -> Vec<f64> {
    let mut acc = vec![0.0; n];
    for (b, c) in quad.pairs() {
        let t = c * h;
        let g = v_b.grad(&traj(t));
        let w = b * h * weight(t);
        for (a, gi) in acc.iter_mut().zip(g) {
            *a += w * gi;
        }
    }
    acc
}

fn positions_traj(q0: &[f64], q1: &[f64], h: f64) -> impl Fn(f64) -> Vec<f64> {
    let (q0, q1) = (q0.to_vec(), q1.to_vec());
    let sh = h.sin();
    move |t| {
        let (a, b) = ((h - t).sin(), t.sin());
        q0.iter().zip(&q1).map(|(x, y)| (x * a + y * b) / sh).collect()
    }
}

fn momentum_traj(q0: &[f64], p1: &[f64], h: f64) -> impl Fn(f64) -> Vec<f64> {
    let (q0, p1) = (q0.to_vec(), p1.to_vec());
    let ch = h.cos();
    move |t| {
        let (a, b) = ((h - t).cos(), t.sin());
        q0.iter().zip(&p1).map(|(x, y)| (x * a + y * b) / ch).collect()
    }
}

/// `L_d(q0, q1; h) = L_d^E(q0, q1; h) − ε ∫₀ʰ V_B(q_A(q0, q1, t)) dt`.
pub fn averaged_lagrangian(cfg: &AveragedConfig, v_b: &Potential) -> DiscreteLagrangian {
    let exact = Arc::new(exact_ho_lagrangian());
    let eps = cfg.epsilon;
    let (e0, e1, e2) = (exact.clone(), exact.clone(), exact);
    let (w0, w1, w2) = (cfg.quadrature.clone(), cfg.quadrature.clone(), cfg.quadrature.clone());
    let (v0, v1, v2) = (v_b.clone(), v_b.clone(), v_b.clone());
    GeneratingFunction::analytic(
        "averaged_lagrangian",
        move |q0, q1, h| {
            let traj = positions_traj(q0, q1, h);
            e0.value(q0, q1, h) - eps * w0.integrate(h, |t| v0.value(&traj(t)))
        },
        move |q0, q1, h| {
            let sh = h.sin();
            let avg = weighted_force_integral(&w1, &v1, h, positions_traj(q0, q1, h), |t| (h - t).sin() / sh, q0.len());
            crate::linalg::axpy(&e1.d1(q0, q1, h), -eps, &avg)
        },
        move |q0, q1, h| {
            let sh = h.sin();
            let avg = weighted_force_integral(&w2, &v2, h, positions_traj(q0, q1, h), |t| t.sin() / sh, q0.len());
            crate::linalg::axpy(&e2.d2(q0, q1, h), -eps, &avg)
        },
    )
    .with_predictor(rotation_predictor)
}

/// `H⁺(q0, p1; h) = H^{+,E}(q0, p1; h) + ε ∫₀ʰ V_B(q_A(q0, p1, t)) dt`.
pub fn averaged_right_hamiltonian(cfg: &AveragedConfig, v_b: &Potential) -> DiscreteRightHamiltonian {
    let exact = Arc::new(exact_ho_right_hamiltonian());
    let eps = cfg.epsilon;
    let (e0, e1, e2) = (exact.clone(), exact.clone(), exact);
    let (w0, w1, w2) = (cfg.quadrature.clone(), cfg.quadrature.clone(), cfg.quadrature.clone());
    let (v0, v1, v2) = (v_b.clone(), v_b.clone(), v_b.clone());
    GeneratingFunction::analytic(
        "averaged_hamiltonian",
        move |q0, p1, h| {
            let traj = momentum_traj(q0, p1, h);
            e0.value(q0, p1, h) + eps * w0.integrate(h, |t| v0.value(&traj(t)))
        },
        move |q0, p1, h| {
            let ch = h.cos();
            let avg = weighted_force_integral(&w1, &v1, h, momentum_traj(q0, p1, h), |t| (h - t).cos() / ch, q0.len());
            crate::linalg::axpy(&e1.d1(q0, p1, h), eps, &avg)
        },
        move |q0, p1, h| {
            let ch = h.cos();
            let avg = weighted_force_integral(&w2, &v2, h, momentum_traj(q0, p1, h), |t| t.sin() / ch, q0.len());
            crate::linalg::axpy(&e2.d2(q0, p1, h), eps, &avg)
        },
    )
    .with_predictor(rotation_predictor)
}

/// The averaged integrators for one perturbation, ready to step.
#[derive(Debug, Clone)]
pub struct AveragedIntegrator {
    cfg: AveragedConfig,
    perturbation: Potential,
    lagrangian: DiscreteLagrangian,
    hamiltonian: DiscreteRightHamiltonian,
}

impl AveragedIntegrator {
    pub fn new(cfg: AveragedConfig, perturbation: Potential) -> Self {
        AveragedIntegrator {
            lagrangian: averaged_lagrangian(&cfg, &perturbation),
            hamiltonian: averaged_right_hamiltonian(&cfg, &perturbation),
            cfg,
            perturbation,
        }
    }

    pub fn config(&self) -> &AveragedConfig {
        &self.cfg
    }

    pub fn lagrangian(&self) -> &DiscreteLagrangian {
        &self.lagrangian
    }

    pub fn hamiltonian(&self) -> &DiscreteRightHamiltonian {
        &self.hamiltonian
    }

    pub fn lagrangian_step(&self, s: &PhaseState, h: f64) -> Result<PhaseState> {
        BoundaryVariant::Positions.check(h, self.cfg.singular_guard)?;
        self.lagrangian.step(s, h)
    }

    pub fn hamiltonian_step(&self, s: &PhaseState, h: f64) -> Result<PhaseState> {
        BoundaryVariant::PositionMomentum.check(h, self.cfg.singular_guard)?;
        self.hamiltonian.step(s, h)
    }

    /// Half kick `−ε(h/2)∇V_B(q0)`, exact rotation by `h`, half kick at `q1`.
    pub fn kick_drift_kick_step(&self, s: &PhaseState, h: f64) -> Result<PhaseState> {
        let eps = self.cfg.epsilon;
        let p = crate::linalg::axpy(s.p(), -0.5 * eps * h, &self.perturbation.grad(s.q()));
        let (q1, p1) = rotate(s.q(), &p, h);
        let p1 = crate::linalg::axpy(&p1, -0.5 * eps * h, &self.perturbation.grad(&q1));
        PhaseState::new(q1, p1)
    }

    pub fn lagrangian_map(&self) -> OneStepMap {
        let me = self.clone();
        OneStepMap::new("averaged_lagrangian", move |s, h| me.lagrangian_step(s, h))
    }

    pub fn hamiltonian_map(&self) -> OneStepMap {
        let me = self.clone();
        OneStepMap::new("averaged_hamiltonian", move |s, h| me.hamiltonian_step(s, h))
    }

    pub fn kick_drift_kick_map(&self) -> OneStepMap {
        let me = self.clone();
        OneStepMap::new("kick_drift_kick", move |s, h| me.kick_drift_kick_step(s, h))
    }
}

pub fn averaged_lagrangian_step(cfg: &AveragedConfig, v_b: &Potential, s: &PhaseState, h: f64) -> Result<PhaseState> {
    AveragedIntegrator::new(cfg.clone(), v_b.clone()).lagrangian_step(s, h)
}

pub fn averaged_hamiltonian_step(cfg: &AveragedConfig, v_b: &Potential, s: &PhaseState, h: f64) -> Result<PhaseState> {
    AveragedIntegrator::new(cfg.clone(), v_b.clone()).hamiltonian_step(s, h)
}

pub fn kick_drift_kick_step(cfg: &AveragedConfig, v_b: &Potential, s: &PhaseState, h: f64) -> Result<PhaseState> {
    AveragedIntegrator::new(cfg.clone(), v_b.clone()).kick_drift_kick_step(s, h)
}
