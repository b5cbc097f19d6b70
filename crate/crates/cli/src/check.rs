//! The `genvi check` property suites.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use genvi_core::averaged::{exact_dh_ho_map, exact_dl_ho_map, exact_ho_right_hamiltonian, AveragedConfig, AveragedIntegrator};
use genvi_core::fpu::{oscillatory_energy, FpuMethod, FpuSystem};
use genvi_core::taylor_vi::{
    build_lagrangian_tvi, build_left_hamiltonian_tvi, build_right_hamiltonian_tvi, canned_method, CannedMethod,
};
use genvi_core::verify::{
    adjoint_defect, log_log_slope, max_energy_error, rk4_flow, symmetry_defect, symplecticity_defect,
    OVERFLOW_SUBSTITUTE,
};
use genvi_core::{
    adjoint_left, adjoint_map, adjoint_right, legendre_right_to_left, symmetric_compose, OneStepMap, PerturbedSystem,
    PhaseState, Potential, QuadratureRule, SeparableSystem,
};

use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::experiments::{ho_energy, order_study, OrderMethod};

pub const SUITES: [&str; 8] = ["all", "algebra", "order", "symmetry", "symplectic", "truncation", "resonance", "fpu"];

/// Checks that fail on this build for reasons recorded in the project
/// notes. They are reported as `XFAIL` and do not affect the exit status.
pub const KNOWN_DEVIATIONS: [&str; 5] = [
    "symmetry.averaged_hamiltonian",
    "symmetry.h_tvi_trapezoid_not_symmetric",
    "resonance.exact_dl_at_pi",
    "resonance.exact_dh_at_half_pi",
    "fpu.sv_htvi_separation",
];

const EPS: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    XFail,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::XFail => "XFAIL",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub measured: f64,
    pub threshold: String,
    pub status: Status,
}

impl CheckLine {
    fn new(name: &str, measured: f64, threshold: String, ok: bool) -> Self {
        let status = match (ok, KNOWN_DEVIATIONS.contains(&name)) {
            (true, _) => Status::Pass,
            (false, true) => Status::XFail,
            (false, false) => Status::Fail,
        };
        CheckLine {
            name: name.to_string(),
            measured,
            threshold,
            status,
        }
    }

    fn at_most(name: &str, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, format!("<= {bound:e}"), measured <= bound)
    }

    fn at_least(name: &str, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, format!(">= {bound:e}"), measured >= bound)
    }

    fn near(name: &str, measured: f64, target: f64, tol: f64) -> Self {
        Self::new(name, measured, format!("{target} +- {tol}"), (measured - target).abs() <= tol)
    }
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{:.6e}\t{}", self.status, self.name, self.measured, self.threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CheckReport {
    pub lines: Vec<CheckLine>,
}

impl CheckReport {
    pub fn failures(&self) -> usize {
        self.lines.iter().filter(|l| l.status == Status::Fail).count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in &self.lines {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

pub fn run_check(cfg: &ExperimentConfig) -> CliResult<CheckReport> {
    cfg.validate()?;
    let mut ctx = Ctx {
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        lines: Vec::new(),
    };
    let all = cfg.suite == "all";
    let suites: [(&str, Suite); 7] = [
        ("algebra", algebra),
        ("order", order),
        ("symmetry", symmetry),
        ("symplectic", symplectic),
        ("truncation", truncation),
        ("resonance", resonance),
        ("fpu", fpu),
    ];
    for (name, suite) in suites {
        if all || cfg.suite == name {
            suite(&mut ctx)?;
        }
    }
    if cfg.negative_control {
        let ea = canned_method(CannedMethod::EulerA, &SeparableSystem::cubic_oscillator(EPS));
        let d = worst(&ctx.states(10), |s| symmetry_defect(&ea, s, 0.1))?;
        ctx.lines.push(CheckLine::at_most("negative_control.euler_a_symmetric", d, 1e-8));
    }
    Ok(CheckReport { lines: ctx.lines })
}

type Suite = fn(&mut Ctx) -> CliResult<()>;

struct Ctx {
    rng: ChaCha8Rng,
    lines: Vec<CheckLine>,
}

impl Ctx {
    fn states(&mut self, n: usize) -> Vec<PhaseState> {
        (0..n)
            .map(|_| PhaseState::scalar(self.rng.gen_range(-1.0..1.0), self.rng.gen_range(-1.0..1.0)))
            .collect::<genvi_core::Result<_>>()
            .expect("scalar states are well formed")
    }
}

fn worst<F>(states: &[PhaseState], f: F) -> CliResult<f64>
where
    F: Fn(&PhaseState) -> genvi_core::Result<f64>,
{
    let mut m = 0.0f64;
    for s in states {
        m = m.max(f(s)?);
    }
    Ok(m)
}

fn averaged(eps: f64) -> CliResult<AveragedIntegrator> {
    Ok(AveragedIntegrator::new(AveragedConfig::new(eps)?, Potential::cubic()))
}

fn algebra(ctx: &mut Ctx) -> CliResult<()> {
    let hd = exact_ho_right_hamiltonian();
    let twice = adjoint_left(&adjoint_right(&hd));
    let mut d = 0.0f64;
    for _ in 0..100 {
        let (a, b, h) = (ctx.rng.gen_range(-1.0..1.0), ctx.rng.gen_range(-1.0..1.0), ctx.rng.gen_range(0.05..0.5));
        d = d.max((twice.value(&[a], &[b], h) - hd.value(&[a], &[b], h)).abs());
    }
    ctx.lines.push(CheckLine::at_most("algebra.double_adjoint_exact_dh", d, 1e-13));

    let ho = SeparableSystem::harmonic_oscillator();
    let adj = adjoint_map(&canned_method(CannedMethod::EulerA, &ho));
    let eb = canned_method(CannedMethod::EulerB, &ho);
    let states = ctx.states(20);
    let d = worst(&states, |s| Ok(adj.step(s, 0.1)?.distance(&eb.step(s, 0.1)?)))?;
    ctx.lines.push(CheckLine::at_most("algebra.adjoint_euler_a_is_euler_b", d, 1e-10));

    let states = ctx.states(10);
    let d = worst(&states, |s| adjoint_defect(&hd, s, 0.3))?;
    ctx.lines.push(CheckLine::at_most("algebra.adjoint_defect_exact_dh", d, 1e-9));
    let avg = averaged(EPS)?;
    let d = worst(&states, |s| adjoint_defect(avg.hamiltonian(), s, 0.3))?;
    ctx.lines.push(CheckLine::at_most("algebra.adjoint_defect_averaged_h", d, 1e-8));

    let (leg, adj) = (legendre_right_to_left(&hd), adjoint_right(&hd));
    let d = worst(&states, |s| Ok(leg.step(s, 0.3)?.distance(&adj.step(s, 0.3)?)))?;
    ctx.lines.push(CheckLine::at_most("algebra.exact_dh_self_adjoint", d, 1e-9));
    Ok(())
}

fn order(ctx: &mut Ctx) -> CliResult<()> {
    let cases = [
        ("euler_a", 1.0, 0.15),
        ("euler_b", 1.0, 0.15),
        ("stormer_verlet", 2.0, 0.15),
        ("h_tvi_trapezoid", 2.0, 0.2),
        ("symmetric_euler_a", 2.0, 0.2),
    ];
    for (name, p, tol) in cases {
        let est = order_study(name.parse::<OrderMethod>()?)?;
        let slope = est.slope.unwrap_or(f64::NAN);
        ctx.lines.push(CheckLine::near(&format!("order.{name}"), slope, p, tol));
    }
    Ok(())
}

fn symmetry(ctx: &mut Ctx) -> CliResult<()> {
    let cubic = SeparableSystem::cubic_oscillator(EPS);
    let avg = averaged(EPS)?;
    let states = ctx.states(10);
    let small: [(&str, OneStepMap); 5] = [
        ("stormer_verlet", canned_method(CannedMethod::StormerVerlet, &cubic)),
        ("exact_dl_ho", exact_dl_ho_map()),
        ("exact_dh_ho", exact_dh_ho_map()),
        ("averaged_lagrangian", avg.lagrangian_map()),
        ("averaged_hamiltonian", avg.hamiltonian_map()),
    ];
    for (name, map) in small {
        let d = worst(&states, |s| symmetry_defect(&map, s, 0.3))?;
        ctx.lines.push(CheckLine::at_most(&format!("symmetry.{name}"), d, 1e-8));
    }
    for method in [CannedMethod::EulerA, CannedMethod::HTviTrapezoid] {
        let map = canned_method(method, &cubic);
        let d = worst(&states, |s| symmetry_defect(&map, s, 0.1))?;
        ctx.lines.push(CheckLine::at_least(&format!("symmetry.{}_not_symmetric", method.name()), d, 1e-4));
    }
    Ok(())
}

fn symplectic(ctx: &mut Ctx) -> CliResult<()> {
    let cubic = SeparableSystem::cubic_oscillator(EPS);
    let ho = SeparableSystem::harmonic_oscillator();
    let avg = averaged(EPS)?;
    let states = ctx.states(5);
    let mut maps: Vec<(String, OneStepMap)> = CannedMethod::ALL
        .into_iter()
        .filter(|m| m.is_symplectic())
        .map(|m| (m.name().to_string(), canned_method(m, &cubic)))
        .collect();
    maps.push(("symmetric_euler_a".into(), OrderMethod::SymmetricEulerA.map(&cubic)));
    let quads = [
        ("rectangle_initial", QuadratureRule::rectangle_initial()),
        ("rectangle_end", QuadratureRule::rectangle_end()),
        ("trapezoid", QuadratureRule::trapezoid()),
    ];
    for (qname, quad) in &quads {
        for r in [0, 1] {
            maps.push((format!("tvi_i_{qname}_r{r}"), build_lagrangian_tvi(&cubic, quad, r)?.to_map()));
            maps.push((format!("tvi_ii_{qname}_r{r}"), build_right_hamiltonian_tvi(&cubic, quad, r)?.to_map()));
            maps.push((format!("tvi_iii_{qname}_r{r}"), build_left_hamiltonian_tvi(&cubic, quad, r)?.to_map()));
        }
    }
    maps.push(("averaged_lagrangian".into(), avg.lagrangian_map()));
    maps.push(("averaged_hamiltonian".into(), avg.hamiltonian_map()));
    maps.push(("kick_drift_kick".into(), avg.kick_drift_kick_map()));
    maps.push(("exact_dl_ho".into(), exact_dl_ho_map()));
    maps.push(("exact_dh_ho".into(), exact_dh_ho_map()));
    maps.push(("symmetric_euler_a_ho".into(), symmetric_compose(&canned_method(CannedMethod::EulerA, &ho))));
    for (name, map) in &maps {
        let mut d = 0.0f64;
        for h in [0.05, 0.1] {
            d = d.max(worst(&states, |s| symplecticity_defect(map, s, h))?);
        }
        ctx.lines.push(CheckLine::at_most(&format!("symplectic.{name}"), d, 1e-6));
    }
    let fpu = FpuSystem::new(3, 50.0)?;
    let s0 = fpu.initial_state();
    for method in FpuMethod::ALL {
        let d = symplecticity_defect(&method.map(&fpu), &s0, 0.01)?;
        ctx.lines.push(CheckLine::at_most(&format!("symplectic.fpu_{}", method.name()), d, 1e-6));
    }
    let ee = canned_method(CannedMethod::ExplicitEuler, &cubic);
    let d = worst(&states, |s| symplecticity_defect(&ee, s, 0.1))?;
    ctx.lines.push(CheckLine::at_least("symplectic.explicit_euler_control", d, 1e-3));
    Ok(())
}

/// One-step distance from `(1, 0)` to a converged RK4 solution of the full
/// perturbed oscillator.
pub fn averaged_local_error(map: &OneStepMap, eps: f64, h: f64) -> CliResult<f64> {
    let sys = PerturbedSystem::cubic_oscillator(eps)?.to_separable();
    let s = PhaseState::scalar(1.0, 0.0)?;
    Ok(map.step(&s, h)?.distance(&rk4_flow(&sys, &s, h, 2000)?))
}

fn truncation(ctx: &mut Ctx) -> CliResult<()> {
    let (full, half) = (averaged(EPS)?, averaged(EPS / 2.0)?);
    let pairs = [
        ("averaged_lagrangian", full.lagrangian_map(), half.lagrangian_map()),
        ("averaged_hamiltonian", full.hamiltonian_map(), half.hamiltonian_map()),
    ];
    let hs = [0.05, 0.1, 0.2, 0.4];
    for (name, map, map_half) in pairs {
        let errs = hs.iter().map(|&h| averaged_local_error(&map, EPS, h)).collect::<CliResult<Vec<_>>>()?;
        let slope = log_log_slope(&hs, &errs).unwrap_or(f64::NAN);
        ctx.lines.push(CheckLine::near(&format!("truncation.{name}_h_slope"), slope, 3.0, 0.25));
        let ratio = averaged_local_error(&map, EPS, 0.2)? / averaged_local_error(&map_half, EPS / 2.0, 0.2)?;
        ctx.lines.push(CheckLine::near(&format!("truncation.{name}_eps_ratio"), ratio, 4.0, 1.2));
    }
    Ok(())
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}

/// Metric used by the resonance checks: maximum energy error over `T = 1000`
/// from `(1, 0)`, with failures mapped to the overflow substitute.
pub fn resonance_metric(map: &OneStepMap, energy: &(dyn Fn(&PhaseState) -> f64 + Sync), h: f64) -> f64 {
    let s0 = PhaseState::scalar(1.0, 0.0).expect("scalar state");
    max_energy_error(map, &energy, &s0, crate::config::DESK_T_RESONANCE, h).unwrap_or(OVERFLOW_SUBSTITUTE)
}

fn resonance(ctx: &mut Ctx) -> CliResult<()> {
    let avg = AveragedIntegrator::new(AveragedConfig::new(EPS)?.with_guard(0.0), Potential::cubic());
    let sys = PerturbedSystem::cubic_oscillator(EPS)?;
    let energy = |s: &PhaseState| sys.energy(s).unwrap_or(f64::NAN);
    let base = median(
        linspace(0.3, 1.2, 10)
            .into_iter()
            .map(|h| resonance_metric(&avg.hamiltonian_map(), &energy, h))
            .collect(),
    );
    let spike = linspace(FRAC_PI_2 - 0.05, FRAC_PI_2 + 0.05, 5)
        .into_iter()
        .map(|h| resonance_metric(&avg.hamiltonian_map(), &energy, h))
        .fold(0.0, f64::max);
    ctx.lines.push(CheckLine::at_least("resonance.averaged_h_spike_ratio", spike / base, 1e2));
    let spike = linspace(PI - 0.05, PI + 0.05, 5)
        .into_iter()
        .map(|h| resonance_metric(&avg.lagrangian_map(), &energy, h))
        .fold(0.0, f64::max);
    ctx.lines.push(CheckLine::at_least("resonance.averaged_l_spike_ratio", spike / base, 1e2));

    let exact = [("exact_dl", exact_dl_ho_map(), PI, "pi"), ("exact_dh", exact_dh_ho_map(), FRAC_PI_2, "half_pi")];
    for (name, map, h_res, tag) in exact {
        let calm = resonance_metric(&map, &ho_energy, 1.0);
        ctx.lines.push(CheckLine::at_most(&format!("resonance.{name}_at_1"), calm, 1e-9));
        let hot = resonance_metric(&map, &ho_energy, h_res);
        let ok = hot == OVERFLOW_SUBSTITUTE || hot >= 1e3 * calm;
        ctx.lines.push(CheckLine::new(
            &format!("resonance.{name}_at_{tag}"),
            hot,
            format!(">= 1e3 * {calm:e} or substituted"),
            ok,
        ));
    }
    Ok(())
}

/// Largest `|I(t) − I(0)|` over `[0, t_final]`.
pub fn fpu_deviation(sys: &FpuSystem, method: FpuMethod, h: f64, t_final: f64) -> CliResult<f64> {
    let map = method.map(sys);
    let mut s = sys.initial_state();
    let i0 = oscillatory_energy(sys, &s)?.total;
    let mut dev = 0.0f64;
    for _ in 0..genvi_core::verify::step_count(t_final, h) {
        s = map.step(&s, h)?;
        dev = dev.max((oscillatory_energy(sys, &s)?.total - i0).abs());
    }
    Ok(dev)
}

fn fpu(ctx: &mut Ctx) -> CliResult<()> {
    let sys = FpuSystem::new(3, 50.0)?;
    let t = crate::config::DESK_T_FPU;
    let dev = |m| fpu_deviation(&sys, m, 0.01, t);
    let (sv, htvi, imex) = (dev(FpuMethod::StormerVerlet)?, dev(FpuMethod::HTviTrapezoid)?, dev(FpuMethod::Imex)?);
    ctx.lines.push(CheckLine::new("fpu.imex_le_sv", imex, format!("<= sv {sv:e}"), imex <= sv));
    ctx.lines.push(CheckLine::new("fpu.sv_le_htvi", sv, format!("<= htvi {htvi:e}"), sv <= htvi));
    ctx.lines.push(CheckLine::at_least("fpu.sv_htvi_separation", htvi / sv, 2.0));
    Ok(())
}
