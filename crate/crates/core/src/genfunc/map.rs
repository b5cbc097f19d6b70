//! One-step maps, their adjoints, and compositions.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rootfind::{newton_solve, SolveSettings};
use crate::state::PhaseState;

pub type StepFn = Arc<dyn Fn(&PhaseState, f64) -> Result<PhaseState> + Send + Sync>;

/// A numerical one-step method `(state, h) ↦ state`.
#[derive(Clone)]
pub struct OneStepMap {
    label: String,
    step: StepFn,
}

impl OneStepMap {
    pub fn new<F>(label: impl Into<String>, step: F) -> Self
    where
        F: Fn(&PhaseState, f64) -> Result<PhaseState> + Send + Sync + 'static,
    {
        OneStepMap {
            label: label.into(),
            step: Arc::new(step),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn step(&self, s: &PhaseState, h: f64) -> Result<PhaseState> {
        let out = (self.step)(s, h)?;
        out.expect_dim(s.dim())?;
        Ok(out)
    }

    /// Applies `steps` consecutive steps of size `h`.
    pub fn iterate(&self, s: &PhaseState, h: f64, steps: usize) -> Result<PhaseState> {
        let mut cur = s.clone();
        for _ in 0..steps {
            cur = self.step(&cur, h)?;
        }
        Ok(cur)
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

impl fmt::Debug for OneStepMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OneStepMap").field("label", &self.label).finish()
    }
}

/// `Φ*_h = Φ⁻¹_{−h}`: each step solves `Φ(y, −h) = x` for `y`.
pub fn adjoint_map(map: &OneStepMap) -> OneStepMap {
    adjoint_map_with(map, SolveSettings::default())
}

pub fn adjoint_map_with(map: &OneStepMap, settings: SolveSettings) -> OneStepMap {
    let inner = map.clone();
    let label = format!("adjoint({})", map.label());
    let err_label = label.clone();
    OneStepMap::new(label, move |x: &PhaseState, h: f64| {
        if h == 0.0 {
            return Err(Error::ZeroStep);
        }
        let target = x.to_flat();
        let guess = inner.step(x, h).unwrap_or_else(|_| x.clone()).to_flat();
        let residual = |y: &[f64]| -> Vec<f64> {
            match PhaseState::from_flat(y).and_then(|ys| inner.step(&ys, -h)) {
                Ok(back) => back
                    .to_flat()
                    .iter()
                    .zip(&target)
                    .map(|(a, b)| a - b)
                    .collect(),
                Err(_) => vec![f64::NAN; y.len()],
            }
        };
        let sol = newton_solve(residual, &guess, &settings)
            .map_err(|e| Error::solve(err_label.clone(), e))?;
        PhaseState::from_flat(&sol.x)
    })
}

/// Applies `parts` in order, the first entry acting first; each map takes a
/// step of `fraction * h`. Fractions must sum to one.
pub fn compose(parts: Vec<(OneStepMap, f64)>) -> Result<OneStepMap> {
    if parts.is_empty() {
        return Err(Error::InvalidComposition("no maps given".into()));
    }
    if parts.iter().any(|(_, f)| !f.is_finite()) {
        return Err(Error::InvalidComposition("non-finite fraction".into()));
    }
    let total: f64 = parts.iter().map(|(_, f)| f).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidComposition(format!(
            "fractions sum to {total}, expected 1"
        )));
    }
    let label = parts
        .iter()
        .map(|(m, f)| format!("{}[{f}]", m.label()))
        .collect::<Vec<_>>()
        .join(" -> ");
    Ok(OneStepMap::new(label, move |s: &PhaseState, h: f64| {
        let mut cur = s.clone();
        for (m, f) in &parts {
            cur = m.step(&cur, f * h)?;
        }
        Ok(cur)
    }))
}

/// `F^{α_s h} ∘ F*^{β_s h} ∘ ⋯ ∘ F^{α_1 h} ∘ F*^{β_1 h}` with the palindromic
/// condition `α_{s+1−i} = β_i`.
pub fn symmetric_composition(
    method: &OneStepMap,
    adjoint: &OneStepMap,
    alphas: &[f64],
    betas: &[f64],
) -> Result<OneStepMap> {
    let s = alphas.len();
    if s == 0 || betas.len() != s {
        return Err(Error::InvalidComposition(format!(
            "need equally many alphas and betas (got {} and {})",
            alphas.len(),
            betas.len()
        )));
    }
    for i in 0..s {
        if (alphas[s - 1 - i] - betas[i]).abs() > 1e-14 {
            return Err(Error::InvalidComposition(format!(
                "alpha[{}] = {} differs from beta[{}] = {}",
                s - i,
                alphas[s - 1 - i],
                i + 1,
                betas[i]
            )));
        }
    }
    let parts = alphas
        .iter()
        .zip(betas)
        .flat_map(|(&a, &b)| [(adjoint.clone(), b), (method.clone(), a)])
        .collect();
    compose(parts)
}

/// `F^{h/2} ∘ F*^{h/2}`, with the adjoint obtained numerically.
pub fn symmetric_compose(map: &OneStepMap) -> OneStepMap {
    symmetric_compose_with(map, &adjoint_map(map))
}

/// As [`symmetric_compose`] with a known adjoint.
pub fn symmetric_compose_with(map: &OneStepMap, adjoint: &OneStepMap) -> OneStepMap {
    symmetric_composition(map, adjoint, &[0.5], &[0.5])
        .expect("half-step pair is palindromic")
        .relabel(format!("symmetric({})", map.label()))
}
