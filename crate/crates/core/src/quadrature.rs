//! Quadrature rules on the unit interval.

use crate::error::{Error, Result};

/// Weights `b_i` and nodes `c_i ∈ [0, 1]`, exact for polynomials of degree
/// below `order`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    weights: Vec<f64>,
    nodes: Vec<f64>,
    order: usize,
}

const EXACTNESS_TOL: f64 = 1e-13;

impl QuadratureRule {
    pub fn new(weights: Vec<f64>, nodes: Vec<f64>, order: usize) -> Result<Self> {
        if weights.is_empty() || weights.len() != nodes.len() {
            return Err(Error::InvalidQuadrature(format!(
                "{} weights for {} nodes",
                weights.len(),
                nodes.len()
            )));
        }
        if order == 0 {
            return Err(Error::InvalidQuadrature("order must be at least 1".into()));
        }
        if let Some(c) = nodes.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(Error::InvalidQuadrature(format!("node {c} outside [0, 1]")));
        }
        let rule = QuadratureRule {
            weights,
            nodes,
            order,
        };
        for degree in 0..order {
            let err = rule.monomial_error(degree);
            if err > EXACTNESS_TOL {
                return Err(Error::InvalidQuadrature(format!(
                    "not exact for t^{degree} (error {err:e})"
                )));
            }
        }
        Ok(rule)
    }

    /// `(b, c) = ((1), (0))`
    pub fn rectangle_initial() -> Self {
        Self::new(vec![1.0], vec![0.0], 1).unwrap()
    }

    /// `(b, c) = ((1), (1))`
    pub fn rectangle_end() -> Self {
        Self::new(vec![1.0], vec![1.0], 1).unwrap()
    }

    pub fn trapezoid() -> Self {
        Self::new(vec![0.5, 0.5], vec![0.0, 1.0], 2).unwrap()
    }

    pub fn midpoint() -> Self {
        Self::new(vec![1.0], vec![0.5], 2).unwrap()
    }

    /// `points`-point Gauss–Legendre rule mapped to `[0, 1]` (order `2·points`).
    pub fn gauss_legendre(points: usize) -> Result<Self> {
        if points == 0 || points > 32 {
            return Err(Error::InvalidQuadrature(format!(
                "Gauss-Legendre with {points} points is not supported"
            )));
        }
        let (x, w) = gauss_legendre_nodes(points);
        let nodes = x.iter().map(|x| 0.5 * (x + 1.0)).collect();
        let weights = w.iter().map(|w| 0.5 * w).collect();
        Self::new(weights, nodes, 2 * points)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Iterator over `(b_i, c_i)`.
    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.weights.iter().copied().zip(self.nodes.iter().copied())
    }

    /// Sum of the weights.
    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `∫₀ʰ f(t) dt ≈ h Σ b_i f(c_i h)`; `h` may be negative.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, h: f64, mut f: F) -> f64 {
        h * self.pairs().map(|(b, c)| b * f(c * h)).sum::<f64>()
    }

    /// `|Σ b_i c_i^k − 1/(k+1)|`
    pub fn monomial_error(&self, degree: usize) -> f64 {
        let approx: f64 = self.pairs().map(|(b, c)| b * c.powi(degree as i32)).sum();
        (approx - 1.0 / (degree as f64 + 1.0)).abs()
    }
}

/// Nodes and weights on `[-1, 1]` via Newton iteration on `P_n`.
fn gauss_legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_rules_are_exact_to_their_order() {
        let rules = [
            QuadratureRule::rectangle_initial(),
            QuadratureRule::rectangle_end(),
            QuadratureRule::trapezoid(),
            QuadratureRule::midpoint(),
            QuadratureRule::gauss_legendre(4).unwrap(),
        ];
        for r in &rules {
            assert!((r.weight_sum() - 1.0).abs() < 1e-15);
            for k in 0..r.order() {
                assert!(r.monomial_error(k) < 1e-13, "{r:?} degree {k}");
            }
            // and not beyond
            assert!(r.monomial_error(r.order()) > 1e-6, "{r:?}");
        }
    }

    #[test]
    fn gauss_legendre_two_point_nodes() {
        let r = QuadratureRule::gauss_legendre(2).unwrap();
        let c = 0.5 - 0.5 / 3f64.sqrt();
        assert!((r.nodes()[0] - c).abs() < 1e-15);
        assert!((r.nodes()[1] - (1.0 - c)).abs() < 1e-15);
        assert!((r.weights()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_nodes_symmetric() {
        for n in 1..=8 {
            let r = QuadratureRule::gauss_legendre(n).unwrap();
            for i in 0..n {
                assert!((r.nodes()[i] + r.nodes()[n - 1 - i] - 1.0).abs() < 1e-15);
                assert!((r.weights()[i] - r.weights()[n - 1 - i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rejects_invalid_rules() {
        assert!(QuadratureRule::new(vec![1.0], vec![1.5], 1).is_err());
        assert!(QuadratureRule::new(vec![0.9], vec![0.0], 1).is_err());
        assert!(QuadratureRule::new(vec![1.0], vec![0.0], 2).is_err());
        assert!(QuadratureRule::new(vec![], vec![], 1).is_err());
        assert!(QuadratureRule::gauss_legendre(0).is_err());
    }

    #[test]
    fn integrate_signed_interval() {
        let r = QuadratureRule::gauss_legendre(4).unwrap();
        let h: f64 = -0.7;
        let exact = h.sin();
        assert!((r.integrate(h, f64::cos) - exact).abs() < 1e-10);
    }
}
