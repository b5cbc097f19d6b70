//! Generating functions of Types I, II and III and the symplectic maps they
//! generate.
//!
//! | type | arguments    | map equations                                   |
//! |------|--------------|-------------------------------------------------|
//! | I    | `(q0, q1)`   | `p0 = −D1 L_d`, `p1 = D2 L_d`                   |
//! | II   | `(q0, p1)`   | `p0 = D1 H⁺`, `q1 = D2 H⁺`                      |
//! | III  | `(p0, q1)`   | `q0 = −D1 H⁻`, `p1 = −D2 H⁻`                    |
//!
//! Each step solves the "minus" discrete Legendre transform for the unknown
//! half of the boundary data with Newton's method and then evaluates the
//! "plus" transform, i.e. `F = 𝔽⁺ ∘ (𝔽⁻)⁻¹`.

mod map;

use std::fmt;
use std::marker::PhantomData;
use std::sync::Arc;

pub use map::{
    adjoint_map, adjoint_map_with, compose, symmetric_compose, symmetric_compose_with,
    symmetric_composition, OneStepMap, StepFn,
};

use crate::error::{Error, Result};
use crate::linalg;
use crate::rootfind::{newton_solve, Solution, SolveError, SolveSettings};
use crate::state::PhaseState;

pub type GenValue = Arc<dyn Fn(&[f64], &[f64], f64) -> f64 + Send + Sync>;
pub type GenGrad = Arc<dyn Fn(&[f64], &[f64], f64) -> Vec<f64> + Send + Sync>;
/// Cheap explicit estimate of the next state, used as the Newton guess.
pub type Predictor = Arc<dyn Fn(&PhaseState, f64) -> (Vec<f64>, Vec<f64>) + Send + Sync>;

/// Step of the two-point central difference used by
/// [`GeneratingFunction::derivative_mismatch`].
pub const FD_DERIVATIVE_STEP: f64 = 1e-6;
/// Step of the five-point stencil that supplies the partials of generating
/// functions given by value only. Its truncation and roundoff errors are
/// both near 1e-14, which keeps the generated maps smooth to that level.
pub const FD_STENCIL_STEP: f64 = 1e-3;

pub trait Kind: 'static {
    const NAME: &'static str;
}

/// Type I: `(q0, q1)`.
pub enum TypeOne {}
/// Type II: `(q0, p1)`.
pub enum TypeTwo {}
/// Type III: `(p0, q1)`.
pub enum TypeThree {}

impl Kind for TypeOne {
    const NAME: &'static str = "type I";
}
impl Kind for TypeTwo {
    const NAME: &'static str = "type II";
}
impl Kind for TypeThree {
    const NAME: &'static str = "type III";
}

pub type DiscreteLagrangian = GeneratingFunction<TypeOne>;
pub type DiscreteRightHamiltonian = GeneratingFunction<TypeTwo>;
pub type DiscreteLeftHamiltonian = GeneratingFunction<TypeThree>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    Analytic,
    FiniteDifference,
}

/// Newton diagnostics of one implicit step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub iterations: usize,
    pub residual_norm: f64,
}

impl From<&Solution> for StepReport {
    fn from(s: &Solution) -> Self {
        StepReport {
            iterations: s.iterations,
            residual_norm: s.residual_norm,
        }
    }
}

/// A scalar function `G(a, b; h)` of mixed boundary data with its partial
/// derivatives `D1 G = ∂G/∂a` and `D2 G = ∂G/∂b`.
pub struct GeneratingFunction<K: Kind> {
    label: String,
    value: GenValue,
    d1: GenGrad,
    d2: GenGrad,
    mode: DerivativeMode,
    predictor: Option<Predictor>,
    settings: SolveSettings,
    _kind: PhantomData<fn() -> K>,
}

impl<K: Kind> Clone for GeneratingFunction<K> {
    fn clone(&self) -> Self {
        GeneratingFunction {
            label: self.label.clone(),
            value: self.value.clone(),
            d1: self.d1.clone(),
            d2: self.d2.clone(),
            mode: self.mode,
            predictor: self.predictor.clone(),
            settings: self.settings,
            _kind: PhantomData,
        }
    }
}

impl<K: Kind> fmt::Debug for GeneratingFunction<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratingFunction")
            .field("kind", &K::NAME)
            .field("label", &self.label)
            .field("mode", &self.mode)
            .finish()
    }
}

impl<K: Kind> GeneratingFunction<K> {
    /// A generating function with hand-supplied partial derivatives.
    pub fn analytic<V, D1, D2>(label: impl Into<String>, value: V, d1: D1, d2: D2) -> Self
    where
        V: Fn(&[f64], &[f64], f64) -> f64 + Send + Sync + 'static,
        D1: Fn(&[f64], &[f64], f64) -> Vec<f64> + Send + Sync + 'static,
        D2: Fn(&[f64], &[f64], f64) -> Vec<f64> + Send + Sync + 'static,
    {
        Self::from_parts(
            label.into(),
            Arc::new(value),
            Arc::new(d1),
            Arc::new(d2),
            DerivativeMode::Analytic,
        )
    }

    /// A generating function whose partials are fourth-order central
    /// differences of its value.
    pub fn from_value<V>(label: impl Into<String>, value: V) -> Self
    where
        V: Fn(&[f64], &[f64], f64) -> f64 + Send + Sync + 'static,
    {
        let value: GenValue = Arc::new(value);
        let (v1, v2) = (value.clone(), value.clone());
        let d1: GenGrad = Arc::new(move |a, b, h| stencil_gradient(|x| v1(x, b, h), a));
        let d2: GenGrad = Arc::new(move |a, b, h| stencil_gradient(|x| v2(a, x, h), b));
        Self::from_parts(label.into(), value, d1, d2, DerivativeMode::FiniteDifference)
    }

    fn from_parts(label: String, value: GenValue, d1: GenGrad, d2: GenGrad, mode: DerivativeMode) -> Self {
        GeneratingFunction {
            label,
            value,
            d1,
            d2,
            mode,
            predictor: None,
            settings: SolveSettings::default(),
            _kind: PhantomData,
        }
    }

    pub fn with_predictor<P>(mut self, predictor: P) -> Self
    where
        P: Fn(&PhaseState, f64) -> (Vec<f64>, Vec<f64>) + Send + Sync + 'static,
    {
        self.predictor = Some(Arc::new(predictor));
        self
    }

    pub(crate) fn with_shared_predictor(mut self, predictor: Option<Predictor>) -> Self {
        self.predictor = predictor;
        self
    }

    pub fn with_settings(mut self, settings: SolveSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn mode(&self) -> DerivativeMode {
        self.mode
    }

    pub fn settings(&self) -> &SolveSettings {
        &self.settings
    }

    pub fn value(&self, a: &[f64], b: &[f64], h: f64) -> f64 {
        (self.value)(a, b, h)
    }

    pub fn d1(&self, a: &[f64], b: &[f64], h: f64) -> Vec<f64> {
        (self.d1)(a, b, h)
    }

    pub fn d2(&self, a: &[f64], b: &[f64], h: f64) -> Vec<f64> {
        (self.d2)(a, b, h)
    }

    /// Largest relative gap between the stored partials and central
    /// differences of the value.
    pub fn derivative_mismatch(&self, a: &[f64], b: &[f64], h: f64) -> f64 {
        let fd1 = central_gradient(|x| self.value(x, b, h), a);
        let fd2 = central_gradient(|x| self.value(a, x, h), b);
        let rel = |x: &[f64], y: &[f64]| {
            x.iter()
                .zip(y)
                .map(|(u, v)| (u - v).abs() / u.abs().max(1.0))
                .fold(0.0, f64::max)
        };
        rel(&self.d1(a, b, h), &fd1).max(rel(&self.d2(a, b, h), &fd2))
    }

    fn predict(&self, s: &PhaseState, h: f64) -> (Vec<f64>, Vec<f64>) {
        match &self.predictor {
            Some(p) => p(s, h),
            None => (s.q().to_vec(), s.p().to_vec()),
        }
    }

    fn solve<F>(&self, residual: F, guess: &[f64]) -> Result<Solution>
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        newton_solve(residual, guess, &self.settings).map_err(|e| Error::solve(self.label.clone(), e))
    }
}

fn central_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64]) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = xp[i];
            xp[i] = orig + FD_DERIVATIVE_STEP;
            let fp = f(&xp);
            xp[i] = orig - FD_DERIVATIVE_STEP;
            let fm = f(&xp);
            xp[i] = orig;
            (fp - fm) / (2.0 * FD_DERIVATIVE_STEP)
        })
        .collect()
}

fn stencil_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64]) -> Vec<f64> {
    let d = FD_STENCIL_STEP;
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = xp[i];
            let mut at = |k: f64| {
                xp[i] = orig + k * d;
                f(&xp)
            };
            let g = (at(-2.0) - 8.0 * at(-1.0) + 8.0 * at(1.0) - at(2.0)) / (12.0 * d);
            xp[i] = orig;
            g
        })
        .collect()
}

fn check_step(h: f64) -> Result<()> {
    if h == 0.0 {
        return Err(Error::ZeroStep);
    }
    if !h.is_finite() {
        return Err(Error::NonFinite("step size"));
    }
    Ok(())
}

fn neg(v: Vec<f64>) -> Vec<f64> {
    v.into_iter().map(|x| -x).collect()
}

impl DiscreteLagrangian {
    /// `𝔽⁻L_d(q0, q1) = (q0, −D1 L_d)`
    pub fn legendre_minus(&self, q0: &[f64], q1: &[f64], h: f64) -> Result<PhaseState> {
        PhaseState::new(q0.to_vec(), neg(self.d1(q0, q1, h)))
    }

    /// `𝔽⁺L_d(q0, q1) = (q1, D2 L_d)`
    pub fn legendre_plus(&self, q0: &[f64], q1: &[f64], h: f64) -> Result<PhaseState> {
        PhaseState::new(q1.to_vec(), self.d2(q0, q1, h))
    }

    /// Solves `p0 = −D1 L_d(q0, q1)` for `q1`.
    pub fn invert_legendre_minus(&self, s: &PhaseState, h: f64) -> Result<Solution> {
        check_step(h)?;
        let (q0, p0) = (s.q(), s.p());
        let (guess, _) = self.predict(s, h);
        self.solve(|q1| linalg::add(p0, &self.d1(q0, q1, h)), &guess)
    }

    pub fn step_with_report(&self, s: &PhaseState, h: f64) -> Result<(PhaseState, StepReport)> {
        let sol = self.invert_legendre_minus(s, h)?;
        Ok((self.legendre_plus(s.q(), &sol.x, h)?, StepReport::from(&sol)))
    }

    pub fn step(&self, s: &PhaseState, h: f64) -> Result<PhaseState> {
        self.step_with_report(s, h).map(|(s, _)| s)
    }

    /// `L_d*(q0, q1; h) = −L_d(q1, q0; −h)`
    pub fn adjoint(&self) -> DiscreteLagrangian {
        let (v, d1, d2) = (self.value.clone(), self.d1.clone(), self.d2.clone());
        GeneratingFunction::from_parts(
            format!("adjoint({})", self.label),
            Arc::new(move |q0, q1, h| -v(q1, q0, -h)),
            Arc::new(move |q0, q1, h| neg(d2(q1, q0, -h))),
            Arc::new(move |q0, q1, h| neg(d1(q1, q0, -h))),
            self.mode,
        )
        .with_shared_predictor(self.predictor.clone())
        .with_settings(self.settings)
    }

    pub fn to_map(&self) -> OneStepMap {
        let g = self.clone();
        OneStepMap::new(self.label.clone(), move |s, h| g.step(s, h))
    }
}

impl DiscreteRightHamiltonian {
    /// `𝔽⁺H⁺(q0, p1) = (D2 H⁺, p1)`
    pub fn legendre_plus(&self, q0: &[f64], p1: &[f64], h: f64) -> Result<PhaseState> {
        PhaseState::new(self.d2(q0, p1, h), p1.to_vec())
    }

    /// `𝔽⁻H⁺(q0, p1) = (q0, D1 H⁺)`
    pub fn legendre_minus(&self, q0: &[f64], p1: &[f64], h: f64) -> Result<PhaseState> {
        PhaseState::new(q0.to_vec(), self.d1(q0, p1, h))
    }

    /// Solves `p0 = D1 H⁺(q0, p1)` for `p1`.
    pub fn invert_legendre_minus(&self, s: &PhaseState, h: f64) -> Result<Solution> {
        check_step(h)?;
        let (q0, p0) = (s.q(), s.p());
        let (_, guess) = self.predict(s, h);
        self.solve(|p1| linalg::sub(&self.d1(q0, p1, h), p0), &guess)
    }

    pub fn step_with_report(&self, s: &PhaseState, h: f64) -> Result<(PhaseState, StepReport)> {
        let sol = self.invert_legendre_minus(s, h)?;
        Ok((self.legendre_plus(s.q(), &sol.x, h)?, StepReport::from(&sol)))
    }

    pub fn step(&self, s: &PhaseState, h: f64) -> Result<PhaseState> {
        self.step_with_report(s, h).map(|(s, _)| s)
    }

    /// `(H⁺)*(p0, q1; h) = −H⁺(q1, p0; −h)`
    pub fn adjoint(&self) -> DiscreteLeftHamiltonian {
        let (v, d1, d2) = (self.value.clone(), self.d1.clone(), self.d2.clone());
        GeneratingFunction::from_parts(
            format!("adjoint({})", self.label),
            Arc::new(move |p0, q1, h| -v(q1, p0, -h)),
            Arc::new(move |p0, q1, h| neg(d2(q1, p0, -h))),
            Arc::new(move |p0, q1, h| neg(d1(q1, p0, -h))),
            self.mode,
        )
        .with_shared_predictor(self.predictor.clone())
        .with_settings(self.settings)
    }

    /// The Type III function `H⁻(p0, q1) = −p0·q0 − p1·q1 + H⁺(q0, p1)`, with
    /// `(q0, p1)` recovered from `p0 = D1 H⁺`, `q1 = D2 H⁺`. It generates the
    /// same map as `self`.
    pub fn to_left_hamiltonian(&self) -> DiscreteLeftHamiltonian {
        let inner = Arc::new(self.clone());
        let (a, b, c) = (inner.clone(), inner.clone(), inner.clone());
        // D1 H⁻ = −q0 and D2 H⁻ = −p1 once the inner system holds.
        GeneratingFunction::from_parts(
            format!("legendre({})", self.label),
            Arc::new(move |p0, q1, h| match a.recover_boundary(p0, q1, h) {
                Some((q0, p1)) => -linalg::dot(p0, &q0) - linalg::dot(&p1, q1) + a.value(&q0, &p1, h),
                None => f64::NAN,
            }),
            Arc::new(move |p0, q1, h| match b.recover_boundary(p0, q1, h) {
                Some((q0, _)) => neg(q0),
                None => vec![f64::NAN; p0.len()],
            }),
            Arc::new(move |p0, q1, h| match c.recover_boundary(p0, q1, h) {
                Some((_, p1)) => neg(p1),
                None => vec![f64::NAN; p0.len()],
            }),
            DerivativeMode::Analytic,
        )
        .with_shared_predictor(self.predictor.clone())
        .with_settings(self.settings)
    }

    /// Solves `p0 = D1 H⁺(q0, p1)`, `q1 = D2 H⁺(q0, p1)` for `(q0, p1)`.
    fn recover_boundary(&self, p0: &[f64], q1: &[f64], h: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        let n = p0.len();
        let residual = |z: &[f64]| -> Vec<f64> {
            let (q0, p1) = z.split_at(n);
            let mut r = linalg::sub(&self.d1(q0, p1, h), p0);
            r.extend(linalg::sub(&self.d2(q0, p1, h), q1));
            r
        };
        let guess: Vec<f64> = q1.iter().chain(p0).copied().collect();
        let tight = self.settings.with_tol(self.settings.tol.min(1e-14));
        let x = match newton_solve(residual, &guess, &tight) {
            Ok(sol) => sol.x,
            Err(SolveError::MaxIterExceeded {
                last, residual_norm, ..
            }) if residual_norm <= self.settings.tol => last,
            Err(_) => return None,
        };
        let (q0, p1) = x.split_at(n);
        Some((q0.to_vec(), p1.to_vec()))
    }

    pub fn to_map(&self) -> OneStepMap {
        let g = self.clone();
        OneStepMap::new(self.label.clone(), move |s, h| g.step(s, h))
    }
}

impl DiscreteLeftHamiltonian {
    /// `𝔽⁺H⁻(p0, q1) = (q1, −D2 H⁻)`
    pub fn legendre_plus(&self, p0: &[f64], q1: &[f64], h: f64) -> Result<PhaseState> {
        PhaseState::new(q1.to_vec(), neg(self.d2(p0, q1, h)))
    }

    /// `𝔽⁻H⁻(p0, q1) = (−D1 H⁻, p0)`
    pub fn legendre_minus(&self, p0: &[f64], q1: &[f64], h: f64) -> Result<PhaseState> {
        PhaseState::new(neg(self.d1(p0, q1, h)), p0.to_vec())
    }

    /// Solves `q0 = −D1 H⁻(p0, q1)` for `q1`.
    pub fn invert_legendre_minus(&self, s: &PhaseState, h: f64) -> Result<Solution> {
        check_step(h)?;
        let (q0, p0) = (s.q(), s.p());
        let (guess, _) = self.predict(s, h);
        self.solve(|q1| linalg::add(q0, &self.d1(p0, q1, h)), &guess)
    }

    pub fn step_with_report(&self, s: &PhaseState, h: f64) -> Result<(PhaseState, StepReport)> {
        let sol = self.invert_legendre_minus(s, h)?;
        Ok((self.legendre_plus(s.p(), &sol.x, h)?, StepReport::from(&sol)))
    }

    pub fn step(&self, s: &PhaseState, h: f64) -> Result<PhaseState> {
        self.step_with_report(s, h).map(|(s, _)| s)
    }

    /// `(H⁻)*(q0, p1; h) = −H⁻(p1, q0; −h)`
    pub fn adjoint(&self) -> DiscreteRightHamiltonian {
        let (v, d1, d2) = (self.value.clone(), self.d1.clone(), self.d2.clone());
        GeneratingFunction::from_parts(
            format!("adjoint({})", self.label),
            Arc::new(move |q0, p1, h| -v(p1, q0, -h)),
            Arc::new(move |q0, p1, h| neg(d2(p1, q0, -h))),
            Arc::new(move |q0, p1, h| neg(d1(p1, q0, -h))),
            self.mode,
        )
        .with_shared_predictor(self.predictor.clone())
        .with_settings(self.settings)
    }

    pub fn to_map(&self) -> OneStepMap {
        let g = self.clone();
        OneStepMap::new(self.label.clone(), move |s, h| g.step(s, h))
    }
}

/// Type II → Type III adjoint.
pub fn adjoint_right(hd: &DiscreteRightHamiltonian) -> DiscreteLeftHamiltonian {
    hd.adjoint()
}

/// Type III → Type II adjoint.
pub fn adjoint_left(hd: &DiscreteLeftHamiltonian) -> DiscreteRightHamiltonian {
    hd.adjoint()
}

/// Type II → Type III Legendre transform; see
/// [`DiscreteRightHamiltonian::to_left_hamiltonian`].
pub fn legendre_right_to_left(hd: &DiscreteRightHamiltonian) -> DiscreteLeftHamiltonian {
    hd.to_left_hamiltonian()
}

#[cfg(test)]
mod tests;
