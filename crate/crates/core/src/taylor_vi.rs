//! Taylor variational integrators: generating functions assembled from a
//! low-order Taylor expansion of the flow and a quadrature rule, for all
//! three boundary-data types.
//!
//! A [`TaylorExpansion`] of order `r` expands velocity (or momentum) to
//! degree `r` in `t` and position to degree `r + 1`, so the `r = 0`
//! expansion moves on straight lines `q + t v` with frozen velocity.
//!
//! For `r = 0` the builders return generating functions with closed-form
//! partial derivatives; for `r = 1` the partials involve the Hessian of the
//! potential and are taken by finite differences instead.

use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::genfunc::{
    DiscreteLagrangian, DiscreteLeftHamiltonian, DiscreteRightHamiltonian, GeneratingFunction,
    OneStepMap,
};
use crate::linalg::{self, axpy, dot, scale};
use crate::rootfind::{newton_solve, SolveSettings};
use crate::state::PhaseState;
use crate::system::SeparableSystem;

pub use crate::quadrature::QuadratureRule;

/// Truncated Taylor flow `Ψ^{(r)}_t` of a separable system.
#[derive(Debug, Clone)]
pub struct TaylorExpansion {
    order: usize,
    sys: SeparableSystem,
}

impl TaylorExpansion {
    pub fn new(sys: &SeparableSystem, order: usize) -> Result<Self> {
        if order > 1 {
            return Err(Error::UnsupportedOrder(order));
        }
        Ok(TaylorExpansion {
            order,
            sys: sys.clone(),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Flow on the tangent bundle: `(q, v) ↦ (q(t), v(t))`.
    pub fn tangent(&self, q: &[f64], v: &[f64], t: f64) -> (Vec<f64>, Vec<f64>) {
        match self.order {
            0 => (axpy(q, t, v), v.to_vec()),
            _ => {
                let a = self.sys.acceleration(q);
                let qt = axpy(&axpy(q, t, v), 0.5 * t * t, &a);
                (qt, axpy(v, t, &a))
            }
        }
    }

    /// Flow on the cotangent bundle: `(q, p) ↦ (q(t), p(t))`.
    pub fn cotangent(&self, q: &[f64], p: &[f64], t: f64) -> (Vec<f64>, Vec<f64>) {
        let v = self.sys.inv_mass(p);
        match self.order {
            0 => (axpy(q, t, &v), p.to_vec()),
            _ => {
                let g = self.sys.grad_potential(q);
                let a = scale(&self.sys.inv_mass(&g), -1.0);
                let qt = axpy(&axpy(q, t, &v), 0.5 * t * t, &a);
                (qt, axpy(p, -t, &g))
            }
        }
    }
}

fn explicit_euler_predictor(sys: &SeparableSystem) -> impl Fn(&PhaseState, f64) -> (Vec<f64>, Vec<f64>) + Send + Sync + 'static {
    let sys = sys.clone();
    move |s: &PhaseState, h: f64| {
        let q1 = axpy(s.q(), h, &sys.inv_mass(s.p()));
        let p1 = axpy(s.p(), -h, &sys.grad_potential(s.q()));
        (q1, p1)
    }
}

fn rule_label(kind: &str, quad: &QuadratureRule, r: usize) -> String {
    format!("{kind}-tvi(r={r}, nodes={:?})", quad.nodes())
}

/// `L_d(q0, q1; h) = h Σ b_i L(Ψ^{(r)}_{c_i h}(q0, ṽ0))` with `ṽ0` fixed by
/// `q1 = π_Q Ψ^{(r+1)}_h(q0, ṽ0)`.
pub fn build_lagrangian_tvi(sys: &SeparableSystem, quad: &QuadratureRule, r: usize) -> Result<DiscreteLagrangian> {
    let taylor = TaylorExpansion::new(sys, r)?;
    let label = rule_label("lagrangian", quad, r);
    let g = match r {
        0 => {
            let (s0, s1, s2) = (sys.clone(), sys.clone(), sys.clone());
            let (w0, w1, w2) = (quad.clone(), quad.clone(), quad.clone());
            GeneratingFunction::analytic(
                label,
                move |q0, q1, h| {
                    let v = scale(&linalg::sub(q1, q0), 1.0 / h);
                    h * w0
                        .pairs()
                        .map(|(b, c)| b * s0.lagrangian(&axpy(q0, c * h, &v), &v))
                        .sum::<f64>()
                },
                move |q0, q1, h| {
                    let v = scale(&linalg::sub(q1, q0), 1.0 / h);
                    let mut d = scale(&s1.apply_mass(&v), -w1.weight_sum());
                    for (b, c) in w1.pairs() {
                        let g = s1.grad_potential(&axpy(q0, c * h, &v));
                        d = axpy(&d, -h * b * (1.0 - c), &g);
                    }
                    d
                },
                move |q0, q1, h| {
                    let v = scale(&linalg::sub(q1, q0), 1.0 / h);
                    let mut d = scale(&s2.apply_mass(&v), w2.weight_sum());
                    for (b, c) in w2.pairs() {
                        let g = s2.grad_potential(&axpy(q0, c * h, &v));
                        d = axpy(&d, -h * b * c, &g);
                    }
                    d
                },
            )
        }
        _ => {
            let (s, w) = (sys.clone(), quad.clone());
            GeneratingFunction::from_value(label, move |q0, q1, h| {
                // q1 = q0 + h v + ½h² a(q0)
                let a = s.acceleration(q0);
                let v0 = axpy(&scale(&linalg::sub(q1, q0), 1.0 / h), -0.5 * h, &a);
                h * w
                    .pairs()
                    .map(|(b, c)| {
                        let (q, v) = taylor.tangent(q0, &v0, c * h);
                        b * s.lagrangian(&q, &v)
                    })
                    .sum::<f64>()
            })
        }
    };
    Ok(g.with_predictor(explicit_euler_predictor(sys)))
}

/// `H⁺(q0, p1; h) = p1·q̃1 − h Σ b_i [p_i·q̇_i − H(q_i, p_i)]` with
/// `(q_i, p_i) = Ψ^{(r)}_{c_i h}(q0, p̃0)`, `p̃0` fixed by
/// `p1 = π_{T*Q} Ψ^{(r)}_h(q0, p̃0)` and `q̃1 = π_Q Ψ^{(r+1)}_h(q0, p̃0)`.
pub fn build_right_hamiltonian_tvi(
    sys: &SeparableSystem,
    quad: &QuadratureRule,
    r: usize,
) -> Result<DiscreteRightHamiltonian> {
    let taylor = TaylorExpansion::new(sys, r)?;
    let label = rule_label("right-hamiltonian", quad, r);
    let g = match r {
        0 => {
            let (s0, s1, s2) = (sys.clone(), sys.clone(), sys.clone());
            let (w0, w1, w2) = (quad.clone(), quad.clone(), quad.clone());
            GeneratingFunction::analytic(
                label,
                move |q0, p1, h| {
                    let u = s0.inv_mass(p1);
                    let q1 = axpy(q0, h, &u);
                    let pu = dot(p1, &u);
                    let sum: f64 = w0
                        .pairs()
                        .map(|(b, c)| b * (pu - s0.hamiltonian(&axpy(q0, c * h, &u), p1)))
                        .sum();
                    dot(p1, &q1) - h * sum
                },
                move |q0, p1, h| {
                    let u = s1.inv_mass(p1);
                    let mut d = p1.to_vec();
                    for (b, c) in w1.pairs() {
                        d = axpy(&d, h * b, &s1.grad_potential(&axpy(q0, c * h, &u)));
                    }
                    d
                },
                move |q0, p1, h| {
                    let u = s2.inv_mass(p1);
                    let mut d = axpy(q0, h * (2.0 - w2.weight_sum()), &u);
                    for (b, c) in w2.pairs() {
                        let g = s2.grad_potential(&axpy(q0, c * h, &u));
                        d = axpy(&d, h * h * b * c, &s2.inv_mass(&g));
                    }
                    d
                },
            )
        }
        _ => {
            let s = sys.clone();
            let w = quad.clone();
            GeneratingFunction::from_value(label, move |q0, p1, h| {
                // p1 = p̃0 − h∇V(q0)
                let g0 = s.grad_potential(q0);
                let p0 = axpy(p1, h, &g0);
                let q1 = axpy(
                    &axpy(q0, h, &s.inv_mass(&p0)),
                    -0.5 * h * h,
                    &s.inv_mass(&g0),
                );
                let sum: f64 = w
                    .pairs()
                    .map(|(b, c)| {
                        let (q, p) = taylor.cotangent(q0, &p0, c * h);
                        b * (dot(&p, &s.inv_mass(&p)) - s.hamiltonian(&q, &p))
                    })
                    .sum();
                dot(p1, &q1) - h * sum
            })
        }
    };
    Ok(g.with_predictor(explicit_euler_predictor(sys)))
}

/// Type III counterpart of [`build_right_hamiltonian_tvi`]: the expansion
/// runs backwards from `q1` with momentum fixed by `p0`, the boundary term is
/// `q̃0`, and `H⁻(p0, q1; h) = −p0·q̃0 − h Σ b_i [p_i·q̇_i − H(q_i, p_i)]`.
pub fn build_left_hamiltonian_tvi(
    sys: &SeparableSystem,
    quad: &QuadratureRule,
    r: usize,
) -> Result<DiscreteLeftHamiltonian> {
    let taylor = TaylorExpansion::new(sys, r)?;
    let label = rule_label("left-hamiltonian", quad, r);
    let g = match r {
        0 => {
            let (s0, s1, s2) = (sys.clone(), sys.clone(), sys.clone());
            let (w0, w1, w2) = (quad.clone(), quad.clone(), quad.clone());
            GeneratingFunction::analytic(
                label,
                move |p0, q1, h| {
                    let u = s0.inv_mass(p0);
                    let q0 = axpy(q1, -h, &u);
                    let pu = dot(p0, &u);
                    let sum: f64 = w0
                        .pairs()
                        .map(|(b, c)| b * (pu - s0.hamiltonian(&axpy(q1, -(1.0 - c) * h, &u), p0)))
                        .sum();
                    -dot(p0, &q0) - h * sum
                },
                move |p0, q1, h| {
                    let u = s1.inv_mass(p0);
                    let mut d = axpy(&scale(q1, -1.0), h * (2.0 - w1.weight_sum()), &u);
                    for (b, c) in w1.pairs() {
                        let g = s1.grad_potential(&axpy(q1, -(1.0 - c) * h, &u));
                        d = axpy(&d, -h * h * b * (1.0 - c), &s1.inv_mass(&g));
                    }
                    d
                },
                move |p0, q1, h| {
                    let u = s2.inv_mass(p0);
                    let mut d = scale(p0, -1.0);
                    for (b, c) in w2.pairs() {
                        d = axpy(&d, h * b, &s2.grad_potential(&axpy(q1, -(1.0 - c) * h, &u)));
                    }
                    d
                },
            )
        }
        _ => {
            let s = sys.clone();
            let w = quad.clone();
            GeneratingFunction::from_value(label, move |p0, q1, h| {
                // p0 = p̃1 + h∇V(q1), expansion backwards in time from q1
                let g1 = s.grad_potential(q1);
                let p1 = axpy(p0, -h, &g1);
                let q0 = backward(&taylor, q1, &p1, h);
                let sum: f64 = w
                    .pairs()
                    .map(|(b, c)| {
                        let tau = (1.0 - c) * h;
                        let q = backward(&taylor, q1, &p1, tau);
                        let p = axpy(&p1, tau, &g1);
                        b * (dot(&p, &s.inv_mass(&p)) - s.hamiltonian(&q, &p))
                    })
                    .sum();
                -dot(p0, &q0) - h * sum
            })
        }
    };
    Ok(g.with_predictor(explicit_euler_predictor(sys)))
}

/// Position `τ` time units before `(q1, p1)` under the Taylor expansion.
fn backward(taylor: &TaylorExpansion, q1: &[f64], p1: &[f64], tau: f64) -> Vec<f64> {
    taylor.cotangent(q1, p1, -tau).0
}

/// Closed-form classical methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CannedMethod {
    EulerA,
    EulerB,
    StormerVerlet,
    /// Type II trapezoid TVI; implicit and not symmetric.
    HTviTrapezoid,
    /// Non-symplectic explicit Euler, kept as a negative control.
    ExplicitEuler,
}

impl CannedMethod {
    pub const ALL: [CannedMethod; 5] = [
        CannedMethod::EulerA,
        CannedMethod::EulerB,
        CannedMethod::StormerVerlet,
        CannedMethod::HTviTrapezoid,
        CannedMethod::ExplicitEuler,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CannedMethod::EulerA => "euler_a",
            CannedMethod::EulerB => "euler_b",
            CannedMethod::StormerVerlet => "stormer_verlet",
            CannedMethod::HTviTrapezoid => "h_tvi_trapezoid",
            CannedMethod::ExplicitEuler => "explicit_euler",
        }
    }

    pub fn is_symplectic(self) -> bool {
        self != CannedMethod::ExplicitEuler
    }
}

impl FromStr for CannedMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CannedMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

/// Looks up a canned method by name and binds it to `sys`.
pub fn canned(name: &str, sys: &SeparableSystem) -> Result<OneStepMap> {
    Ok(canned_method(name.parse()?, sys))
}

pub fn canned_method(method: CannedMethod, sys: &SeparableSystem) -> OneStepMap {
    let sys = Arc::new(sys.clone());
    let label = method.name();
    match method {
        CannedMethod::EulerA => OneStepMap::new(label, move |s, h| {
            s.expect_dim(sys.dim())?;
            let p1 = axpy(s.p(), -h, &sys.grad_potential(s.q()));
            let q1 = axpy(s.q(), h, &sys.inv_mass(&p1));
            PhaseState::new(q1, p1)
        }),
        CannedMethod::EulerB => OneStepMap::new(label, move |s, h| {
            s.expect_dim(sys.dim())?;
            let q1 = axpy(s.q(), h, &sys.inv_mass(s.p()));
            let p1 = axpy(s.p(), -h, &sys.grad_potential(&q1));
            PhaseState::new(q1, p1)
        }),
        CannedMethod::StormerVerlet => OneStepMap::new(label, move |s, h| {
            s.expect_dim(sys.dim())?;
            let g0 = sys.grad_potential(s.q());
            let q1 = axpy(
                &axpy(s.q(), h, &sys.inv_mass(s.p())),
                -0.5 * h * h,
                &sys.inv_mass(&g0),
            );
            let g1 = sys.grad_potential(&q1);
            let p1 = axpy(s.p(), -0.5 * h, &linalg::add(&g0, &g1));
            PhaseState::new(q1, p1)
        }),
        CannedMethod::HTviTrapezoid => OneStepMap::new(label, move |s, h| {
            s.expect_dim(sys.dim())?;
            let (q0, p0) = (s.q(), s.p());
            let g0 = sys.grad_potential(q0);
            let residual = |p1: &[f64]| {
                let g1 = sys.grad_potential(&axpy(q0, h, &sys.inv_mass(p1)));
                // p1 − p0 + (h/2)(∇V(q0) + ∇V(q0 + hM⁻¹p1))
                axpy(&linalg::sub(p1, p0), 0.5 * h, &linalg::add(&g0, &g1))
            };
            let guess = axpy(p0, -h, &g0);
            let p1 = newton_solve(residual, &guess, &SolveSettings::default())
                .map_err(|e| Error::Solve {
                    label: label.to_string(),
                    source: e,
                })?
                .x;
            let q1 = axpy(
                &axpy(q0, h, &sys.inv_mass(p0)),
                -0.5 * h * h,
                &sys.inv_mass(&g0),
            );
            PhaseState::new(q1, p1)
        }),
        CannedMethod::ExplicitEuler => OneStepMap::new(label, move |s, h| {
            s.expect_dim(sys.dim())?;
            let q1 = axpy(s.q(), h, &sys.inv_mass(s.p()));
            let p1 = axpy(s.p(), -h, &sys.grad_potential(s.q()));
            PhaseState::new(q1, p1)
        }),
    }
}
