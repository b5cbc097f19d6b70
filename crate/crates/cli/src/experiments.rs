//! The experiments behind the `genvi` subcommands.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use genvi_core::averaged::{
    exact_dh_ho_map, exact_dl_ho_map, exact_ho_right_hamiltonian, ho_rotation, AveragedConfig, AveragedIntegrator,
};
use genvi_core::fpu::{fpu_energy, oscillatory_energy, FpuMethod, FpuSystem};
use genvi_core::genfunc::{adjoint_map, adjoint_right, legendre_right_to_left, GeneratingFunction};
use genvi_core::taylor_vi::{canned_method, CannedMethod};
use genvi_core::verify::{convergence_order, energy_error_sweep, OrderEstimate, SweepResult, OVERFLOW_SUBSTITUTE};
use genvi_core::linalg::{axpy, dot};
use genvi_core::{OneStepMap, PerturbedSystem, PhaseState, Potential, SeparableSystem};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::output::{Outputs, Table};

/// `½(q² + p²)` summed over components.
pub fn ho_energy(s: &PhaseState) -> f64 {
    0.5 * s.q().iter().chain(s.p()).map(|x| x * x).sum::<f64>()
}

/// The four energy-error sweeps of the resonance study, from `(1, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceSweeps {
    pub averaged_l: SweepResult,
    pub averaged_h: SweepResult,
    pub exact_dl: SweepResult,
    pub exact_dh: SweepResult,
}

/// Runs the sweeps without the singularity guard; blow-ups and solver
/// failures become the overflow substitute.
pub fn resonance_sweeps(epsilon: f64, h_values: &[f64], t_final: f64) -> CliResult<ResonanceSweeps> {
    let s0 = PhaseState::scalar(1.0, 0.0)?;
    let avg = AveragedIntegrator::new(AveragedConfig::new(epsilon)?.with_guard(0.0), Potential::cubic());
    let sys = PerturbedSystem::cubic_oscillator(epsilon)?;
    let full = move |s: &PhaseState| sys.energy(s).unwrap_or(f64::NAN);
    let sweep = |map: OneStepMap, energy: &(dyn Fn(&PhaseState) -> f64 + Sync)| {
        energy_error_sweep(&map, energy, &s0, t_final, h_values, OVERFLOW_SUBSTITUTE)
    };
    Ok(ResonanceSweeps {
        averaged_l: sweep(avg.lagrangian_map(), &full),
        averaged_h: sweep(avg.hamiltonian_map(), &full),
        exact_dl: sweep(exact_dl_ho_map(), &ho_energy),
        exact_dh: sweep(exact_dh_ho_map(), &ho_energy),
    })
}

pub fn run_resonance(cfg: &ExperimentConfig) -> CliResult<Outputs> {
    cfg.validate()?;
    let hs = cfg.h_grid();
    let sw = resonance_sweeps(cfg.epsilon, &hs, cfg.t_final())?;
    let mut table = Table::new(&["h", "err_avgL", "err_avgH", "err_exactDL", "err_exactDH", "err_min"]);
    for (k, &h) in hs.iter().enumerate() {
        let vals = [
            sw.averaged_l.metrics[k],
            sw.averaged_h.metrics[k],
            sw.exact_dl.metrics[k],
            sw.exact_dh.metrics[k],
        ];
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        table.push(vec![h, vals[0], vals[1], vals[2], vals[3], min]);
    }
    Outputs::new(table, &cfg.to_string())
}

pub fn run_fpu(cfg: &ExperimentConfig) -> CliResult<Outputs> {
    cfg.validate()?;
    let sys = FpuSystem::new(cfg.m, cfg.omega)?;
    let method: FpuMethod = cfg.methods[0].parse()?;
    let map = method.map(&sys);
    let mut columns: Vec<String> = (1..=cfg.m).map(|j| format!("I{j}")).collect();
    columns.push("I_total".into());
    columns.push("H".into());
    let mut table = Table {
        columns: std::iter::once("t".to_string()).chain(columns).collect(),
        rows: Vec::new(),
    };
    let record = |table: &mut Table, t: f64, s: &PhaseState| -> CliResult<()> {
        let osc = oscillatory_energy(&sys, s)?;
        let mut row = vec![t];
        row.extend(&osc.per_spring);
        row.push(osc.total);
        row.push(fpu_energy(&sys, s)?);
        table.push(row);
        Ok(())
    };
    let h = cfg.h;
    let steps = genvi_core::verify::step_count(cfg.t_final(), h);
    let mut s = sys.initial_state();
    record(&mut table, 0.0, &s)?;
    for k in 1..=steps {
        s = map.step(&s, h)?;
        if k % cfg.stride == 0 || k == steps {
            record(&mut table, k as f64 * h, &s)?;
        }
    }
    Outputs::new(table, &cfg.to_string())
}

/// Methods accepted by the order study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderMethod {
    Canned(CannedMethod),
    SymmetricEulerA,
    ExactDl,
    ExactDh,
}

impl OrderMethod {
    pub fn name(self) -> &'static str {
        match self {
            OrderMethod::Canned(m) => m.name(),
            OrderMethod::SymmetricEulerA => "symmetric_euler_a",
            OrderMethod::ExactDl => "exact_dl_ho",
            OrderMethod::ExactDh => "exact_dh_ho",
        }
    }

    pub fn map(self, sys: &SeparableSystem) -> OneStepMap {
        match self {
            OrderMethod::Canned(m) => canned_method(m, sys),
            OrderMethod::SymmetricEulerA => {
                genvi_core::symmetric_compose(&canned_method(CannedMethod::EulerA, sys)).relabel(self.name())
            }
            OrderMethod::ExactDl => exact_dl_ho_map(),
            OrderMethod::ExactDh => exact_dh_ho_map(),
        }
    }
}

impl FromStr for OrderMethod {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        if let Ok(m) = s.parse::<CannedMethod>() {
            return Ok(OrderMethod::Canned(m));
        }
        [OrderMethod::SymmetricEulerA, OrderMethod::ExactDl, OrderMethod::ExactDh]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown method '{s}'")))
    }
}

pub const ORDER_STEPS: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];

/// Global error at `T = 1` on the harmonic oscillator from `(1, 0)` against
/// the exact rotation.
pub fn order_study(method: OrderMethod) -> CliResult<OrderEstimate> {
    let sys = SeparableSystem::harmonic_oscillator();
    let s0 = PhaseState::scalar(1.0, 0.0)?;
    Ok(convergence_order(&method.map(&sys), ho_rotation, &s0, 1.0, &ORDER_STEPS)?)
}

pub fn run_order(cfg: &ExperimentConfig) -> CliResult<(Outputs, Vec<(String, OrderEstimate)>)> {
    cfg.validate()?;
    let mut table = Table::new(&["h"]);
    let mut estimates = Vec::new();
    for name in &cfg.methods {
        let method: OrderMethod = name.parse()?;
        table.columns.push(format!("err_{}", method.name()));
        estimates.push((method.name().to_string(), order_study(method)?));
    }
    for (k, &h) in ORDER_STEPS.iter().enumerate() {
        let mut row = vec![h];
        row.extend(estimates.iter().map(|(_, e)| e.errors[k]));
        table.push(row);
    }
    Ok((Outputs::new(table, &cfg.to_string())?, estimates))
}

/// Adjoint relations on seeded random states: Euler-A's adjoint against
/// Euler-B, and the Legendre transform of the exact and Euler-A discrete
/// right Hamiltonians against their adjoints.
pub fn run_adjoint_demo(cfg: &ExperimentConfig) -> CliResult<Outputs> {
    cfg.validate()?;
    let sys = SeparableSystem::harmonic_oscillator();
    let ea = canned_method(CannedMethod::EulerA, &sys);
    let eb = canned_method(CannedMethod::EulerB, &sys);
    let adj_ea = adjoint_map(&ea);
    let exact = exact_ho_right_hamiltonian();
    let (exact_leg, exact_adj) = (legendre_right_to_left(&exact), adjoint_right(&exact));
    // p1·q0 + h(q0² + p1²)/2
    let euler_a_gf = GeneratingFunction::analytic(
        "euler_a_right",
        |q0: &[f64], p1: &[f64], h: f64| dot(p1, q0) + 0.5 * h * (dot(q0, q0) + dot(p1, p1)),
        |q0: &[f64], p1: &[f64], h: f64| axpy(p1, h, q0),
        |q0: &[f64], p1: &[f64], h: f64| axpy(q0, h, p1),
    );
    let (ea_leg, ea_adj) = (legendre_right_to_left(&euler_a_gf), adjoint_right(&euler_a_gf));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let h = 0.1;
    let mut table = Table::new(&["q0", "p0", "adjoint_euler_a_vs_euler_b", "exact_dh_self_adjoint", "euler_a_self_adjoint"]);
    for _ in 0..10 {
        let s = PhaseState::scalar(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))?;
        let d1 = adj_ea.step(&s, h)?.distance(&eb.step(&s, h)?);
        let d2 = exact_leg.step(&s, h)?.distance(&exact_adj.step(&s, h)?);
        let d3 = ea_leg.step(&s, h)?.distance(&ea_adj.step(&s, h)?);
        table.push(vec![s.q()[0], s.p()[0], d1, d2, d3]);
    }
    Outputs::new(table, &cfg.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Experiment;

    #[test]
    fn zero_epsilon_columns_agree() {
        let mut cfg = ExperimentConfig::new(Experiment::Resonance);
        cfg.epsilon = 0.0;
        cfg.h_min = 0.2;
        cfg.h_max = 1.4;
        cfg.h_count = 7;
        cfg.t_final = Some(100.0);
        let out = run_resonance(&cfg).unwrap();
        for row in &out.table.rows {
            assert!((row[1] - row[3]).abs() <= 1e-10, "{row:?}");
            assert!((row[2] - row[4]).abs() <= 1e-10, "{row:?}");
            assert_eq!(row[5], row[1..5].iter().copied().fold(f64::INFINITY, f64::min));
        }
    }

    #[test]
    fn empty_grid_rejected() {
        let mut cfg = ExperimentConfig::new(Experiment::Resonance);
        cfg.h_count = 0;
        assert!(matches!(run_resonance(&cfg), Err(CliError::Config(_))));
    }

    #[test]
    fn fpu_rows_follow_stride() {
        let mut cfg = ExperimentConfig::new(Experiment::Fpu);
        cfg.t_final = Some(1.0);
        cfg.stride = 25;
        let out = run_fpu(&cfg).unwrap();
        assert_eq!(out.table.columns, ["t", "I1", "I2", "I3", "I_total", "H"]);
        assert_eq!(out.table.rows.len(), 5);
        assert!((out.table.rows[0][4] - 1.0).abs() <= 1e-14);
        assert!((out.table.rows.last().unwrap()[0] - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn order_methods_parse() {
        for name in ["euler_a", "symmetric_euler_a", "exact_dl_ho", "exact_dh_ho", "h_tvi_trapezoid"] {
            assert_eq!(name.parse::<OrderMethod>().unwrap().name(), name);
        }
        assert!("bogus".parse::<OrderMethod>().is_err());
        let est = order_study(OrderMethod::Canned(CannedMethod::StormerVerlet)).unwrap();
        assert!((est.slope.unwrap() - 2.0).abs() <= 0.15);
    }

    #[test]
    fn adjoint_demo_shows_the_pairings() {
        let out = run_adjoint_demo(&ExperimentConfig::new(Experiment::AdjointDemo)).unwrap();
        for row in &out.table.rows {
            assert!(row[2] <= 1e-10 && row[3] <= 1e-9 && row[4] > 1e-4, "{row:?}");
        }
    }
}
