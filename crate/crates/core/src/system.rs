//! Mechanical systems: separable Hamiltonians `½pᵀM⁻¹p + V(q)` and
//! perturbed systems `H = H_A + εH_B`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{self, Cholesky, Matrix};
use crate::state::PhaseState;

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A potential together with its hand-written gradient.
#[derive(Clone)]
pub struct Potential {
    value: ScalarFn,
    grad: VectorFn,
}

impl Potential {
    pub fn new<V, G>(value: V, grad: G) -> Self
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Potential {
            value: Arc::new(value),
            grad: Arc::new(grad),
        }
    }

    pub fn zero() -> Self {
        Self::new(|_| 0.0, |q| vec![0.0; q.len()])
    }

    /// `½|q|²`
    pub fn harmonic() -> Self {
        Self::new(|q| 0.5 * linalg::dot(q, q), |q| q.to_vec())
    }

    /// `Σ qᵢ³ / 3`, the perturbation of the cubic oscillator.
    pub fn cubic() -> Self {
        Self::new(
            |q| q.iter().map(|x| x * x * x).sum::<f64>() / 3.0,
            |q| q.iter().map(|x| x * x).collect(),
        )
    }

    pub fn value(&self, q: &[f64]) -> f64 {
        (self.value)(q)
    }

    pub fn grad(&self, q: &[f64]) -> Vec<f64> {
        (self.grad)(q)
    }

    /// `self + s * other`
    pub fn plus_scaled(&self, s: f64, other: &Potential) -> Potential {
        let (a, b) = (self.clone(), other.clone());
        let (ag, bg) = (self.clone(), other.clone());
        Potential::new(
            move |q| a.value(q) + s * b.value(q),
            move |q| linalg::axpy(&ag.grad(q), s, &bg.grad(q)),
        )
    }

    /// Largest relative mismatch between the supplied gradient and central
    /// differences of the value with step `delta`.
    pub fn gradient_mismatch(&self, q: &[f64], delta: f64) -> f64 {
        let g = self.grad(q);
        let mut worst: f64 = 0.0;
        let mut x = q.to_vec();
        for i in 0..q.len() {
            let orig = x[i];
            x[i] = orig + delta;
            let fp = self.value(&x);
            x[i] = orig - delta;
            let fm = self.value(&x);
            x[i] = orig;
            let fd = (fp - fm) / (2.0 * delta);
            worst = worst.max((fd - g[i]).abs() / g[i].abs().max(1.0));
        }
        worst
    }
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Potential { .. }")
    }
}

/// `L(q, v) = ½vᵀMv − V(q)`, `H(q, p) = ½pᵀM⁻¹p + V(q)`.
#[derive(Clone, Debug)]
pub struct SeparableSystem {
    mass: Matrix,
    chol: Cholesky,
    potential: Potential,
}

impl SeparableSystem {
    pub fn new(mass: Matrix, potential: Potential) -> Result<Self> {
        if !mass.is_square() {
            return Err(Error::InvalidMass(format!(
                "{}x{} is not square",
                mass.rows(),
                mass.cols()
            )));
        }
        let asym = mass.sub(&mass.transpose()).max_abs();
        if asym > 1e-12 {
            return Err(Error::InvalidMass(format!("asymmetry {asym:e}")));
        }
        let chol = Cholesky::new(&mass)
            .ok_or_else(|| Error::InvalidMass("Cholesky factorization failed".into()))?;
        Ok(SeparableSystem {
            mass,
            chol,
            potential,
        })
    }

    /// Unit-mass system in `n` dimensions.
    pub fn with_unit_mass(n: usize, potential: Potential) -> Self {
        Self::new(Matrix::identity(n), potential).expect("identity is SPD")
    }

    /// `H = ½(p² + q²)` in one dimension.
    pub fn harmonic_oscillator() -> Self {
        Self::with_unit_mass(1, Potential::harmonic())
    }

    /// `H = ½(p² + q²) + (ε/3)q³`.
    pub fn cubic_oscillator(epsilon: f64) -> Self {
        Self::with_unit_mass(1, Potential::harmonic().plus_scaled(epsilon, &Potential::cubic()))
    }

    pub fn dim(&self) -> usize {
        self.mass.rows()
    }

    pub fn mass(&self) -> &Matrix {
        &self.mass
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn potential_value(&self, q: &[f64]) -> f64 {
        self.potential.value(q)
    }

    pub fn grad_potential(&self, q: &[f64]) -> Vec<f64> {
        self.potential.grad(q)
    }

    /// `a(q) = −M⁻¹∇V(q)`
    pub fn acceleration(&self, q: &[f64]) -> Vec<f64> {
        linalg::scale(&self.chol.solve(&self.grad_potential(q)), -1.0)
    }

    pub fn energy(&self, s: &PhaseState) -> Result<f64> {
        s.expect_dim(self.dim())?;
        Ok(self.hamiltonian(s.q(), s.p()))
    }

    /// Unchecked `H(q, p)`; callers guarantee dimensions.
    pub fn hamiltonian(&self, q: &[f64], p: &[f64]) -> f64 {
        0.5 * linalg::dot(p, &self.chol.solve(p)) + self.potential_value(q)
    }

    /// Unchecked `L(q, v)`.
    pub fn lagrangian(&self, q: &[f64], v: &[f64]) -> f64 {
        0.5 * linalg::dot(v, &self.mass.mul_vec(v)) - self.potential_value(q)
    }

    pub fn velocity_to_momentum(&self, _q: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v.len())?;
        Ok(self.mass.mul_vec(v))
    }

    pub fn momentum_to_velocity(&self, _q: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        self.check_len(p.len())?;
        Ok(self.chol.solve(p))
    }

    /// `M⁻¹x` without dimension checks.
    pub(crate) fn inv_mass(&self, x: &[f64]) -> Vec<f64> {
        self.chol.solve(x)
    }

    /// `Mx` without dimension checks.
    pub(crate) fn apply_mass(&self, x: &[f64]) -> Vec<f64> {
        self.mass.mul_vec(x)
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: n,
            });
        }
        Ok(())
    }
}

/// `H = H_A + εH_B` with `H_B(q) = V_B(q)` (so `L_B = −V_B`).
#[derive(Clone, Debug)]
pub struct PerturbedSystem {
    base: SeparableSystem,
    perturbation: Potential,
    epsilon: f64,
}

impl PerturbedSystem {
    pub fn new(base: SeparableSystem, perturbation: Potential, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be finite and >= 0, got {epsilon}"
            )));
        }
        Ok(PerturbedSystem {
            base,
            perturbation,
            epsilon,
        })
    }

    /// Harmonic oscillator perturbed by `q³/3`.
    pub fn cubic_oscillator(epsilon: f64) -> Result<Self> {
        Self::new(
            SeparableSystem::harmonic_oscillator(),
            Potential::cubic(),
            epsilon,
        )
    }

    pub fn base(&self) -> &SeparableSystem {
        &self.base
    }

    pub fn perturbation(&self) -> &Potential {
        &self.perturbation
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn base_energy(&self, s: &PhaseState) -> Result<f64> {
        self.base.energy(s)
    }

    pub fn energy(&self, s: &PhaseState) -> Result<f64> {
        let a = self.base.energy(s)?;
        if self.epsilon == 0.0 {
            return Ok(a);
        }
        Ok(a + self.epsilon * self.perturbation.value(s.q()))
    }

    /// The full system as a single separable system.
    pub fn to_separable(&self) -> SeparableSystem {
        SeparableSystem {
            mass: self.base.mass.clone(),
            chol: self.base.chol.clone(),
            potential: self
                .base
                .potential
                .plus_scaled(self.epsilon, &self.perturbation),
        }
    }
}
