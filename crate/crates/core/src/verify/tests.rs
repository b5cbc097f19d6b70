use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;

use super::*;
use crate::averaged::{exact_dh_ho_map, exact_dl_ho_map, exact_ho_right_hamiltonian, ho_rotation, ho_rotation_map, AveragedConfig};
use crate::genfunc::{symmetric_compose, GeneratingFunction};
use crate::system::Potential;
use crate::taylor_vi::{canned_method, CannedMethod};

fn ho() -> SeparableSystem {
    SeparableSystem::harmonic_oscillator()
}

fn ho_energy(s: &PhaseState) -> f64 {
    0.5 * (s.q()[0].powi(2) + s.p()[0].powi(2))
}

fn rotation(s: &PhaseState, t: f64) -> Result<PhaseState> {
    ho_rotation(s, t)
}

fn unit() -> PhaseState {
    PhaseState::scalar(1.0, 0.0).unwrap()
}

fn euler_a_right() -> DiscreteRightHamiltonian {
    let sys = ho();
    let (s0, s1, s2) = (sys.clone(), sys.clone(), sys);
    GeneratingFunction::analytic(
        "euler_a_right",
        move |q0, p1, h| crate::linalg::dot(p1, q0) + h * s0.hamiltonian(q0, p1),
        move |q0, p1, h| axpy(p1, h, &s1.grad_potential(q0)),
        move |q0, p1, h| axpy(q0, h, &s2.inv_mass(p1)),
    )
}

#[test]
fn convergence_order_examples() {
    let hs = [0.1, 0.05, 0.025];
    let ea = convergence_order(&canned_method(CannedMethod::EulerA, &ho()), rotation, &unit(), 1.0, &hs).unwrap();
    assert!((ea.slope.unwrap() - 1.0).abs() <= 0.15);
    let sv = convergence_order(&canned_method(CannedMethod::StormerVerlet, &ho()), rotation, &unit(), 1.0, &hs).unwrap();
    assert!((sv.slope.unwrap() - 2.0).abs() <= 0.15);
    let exact = convergence_order(&exact_dl_ho_map(), rotation, &unit(), 1.0, &hs).unwrap();
    assert!(exact.is_degenerate());
    assert!(exact.errors.iter().all(|e| *e <= 1e-12));
}

#[test]
fn convergence_order_rejects_bad_grids() {
    let m = canned_method(CannedMethod::EulerA, &ho());
    assert!(convergence_order(&m, rotation, &unit(), 1.0, &[0.1, 0.05]).is_err());
    assert!(convergence_order(&m, rotation, &unit(), 1.0, &[0.1, 0.05, 0.3]).is_err());
}

#[test]
fn slope_of_exact_power_law() {
    let x = [0.1, 0.2, 0.4, 0.8];
    let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(3)).collect();
    assert!((log_log_slope(&x, &y).unwrap() - 3.0).abs() <= 1e-12);
    assert!(log_log_slope(&[1.0, 1.0], &[2.0, 3.0]).is_none());
    assert!(log_log_slope(&[1.0, 2.0], &[0.0, 3.0]).is_none());
}

#[test]
fn symplecticity_examples() {
    let ea = canned_method(CannedMethod::EulerA, &ho());
    let ee = canned_method(CannedMethod::ExplicitEuler, &ho());
    for s in [unit(), PhaseState::scalar(-0.3, 0.8).unwrap()] {
        assert!(symplecticity_defect(&ea, &s, 0.1).unwrap() <= 1e-7);
        assert!(symplecticity_defect(&ho_rotation_map(), &s, 0.7).unwrap() <= 1e-9);
        assert!(symplecticity_defect(&ee, &s, 0.1).unwrap() >= 1e-3);
    }
}

#[test]
fn symmetry_examples() {
    let sys = SeparableSystem::cubic_oscillator(0.1);
    let sv = canned_method(CannedMethod::StormerVerlet, &sys);
    let ea = canned_method(CannedMethod::EulerA, &sys);
    assert!(symmetry_defect(&sv, &unit(), 0.1).unwrap() <= 1e-10);
    assert!(symmetry_defect(&ea, &unit(), 0.1).unwrap() >= 1e-4);
    assert!(symmetry_defect(&symmetric_compose(&ea), &unit(), 0.1).unwrap() <= 1e-9);
}

#[test]
fn adjoint_defect_examples() {
    let s = PhaseState::scalar(0.6, -0.3).unwrap();
    assert!(adjoint_defect(&euler_a_right(), &s, 0.1).unwrap() <= 1e-9);
    assert!(adjoint_defect(&exact_ho_right_hamiltonian(), &s, 0.3).unwrap() <= 1e-9);
    let avg = crate::averaged::averaged_right_hamiltonian(&AveragedConfig::new(0.1).unwrap(), &Potential::cubic());
    assert!(adjoint_defect(&avg, &s, 0.3).unwrap() <= 1e-8);
}

#[test]
fn jacobian_of_rotation() {
    let d = jacobian(&ho_rotation_map(), &unit(), 0.5, JACOBIAN_FD_STEP).unwrap();
    let (sn, cs) = 0.5f64.sin_cos();
    let want = Matrix::from_rows(&[vec![cs, sn], vec![-sn, cs]]);
    assert!(d.sub(&want).max_abs() <= 1e-9);
    assert_eq!(canonical_j(1), Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]));
}

#[test]
fn exact_dl_sweep_at_unit_step() {
    let r = energy_error_sweep(&exact_dl_ho_map(), ho_energy, &unit(), 10_000.0, &[1.0], OVERFLOW_SUBSTITUTE);
    assert!(r.metrics[0] <= 1e-9, "{:e}", r.metrics[0]);
    assert!(!r.substituted[0]);
}

/// At the doubles nearest π and π/2 the closed-form steps from (1, 0) happen
/// to be exact: `cos` returns exactly −1 (resp. `sin` exactly 1), so the
/// singular terms cancel to zero.
#[test]
fn exact_steps_at_nearest_float_to_singular_steps() {
    let dl = energy_error_sweep(&exact_dl_ho_map(), ho_energy, &unit(), 1000.0, &[PI], OVERFLOW_SUBSTITUTE);
    assert_eq!(dl.metrics[0], 0.0);
    let dh = energy_error_sweep(&exact_dh_ho_map(), ho_energy, &unit(), 1000.0, &[FRAC_PI_2], OVERFLOW_SUBSTITUTE);
    assert_eq!(dh.metrics[0], 0.0);
    let off = PhaseState::scalar(0.6, 0.8).unwrap();
    let dl = energy_error_sweep(&exact_dl_ho_map(), ho_energy, &off, 1000.0, &[PI, 1.0], OVERFLOW_SUBSTITUTE);
    assert!((dl.metrics[0] - 0.32).abs() <= 1e-12);
    assert!(dl.metrics[0] >= 1e3 * dl.metrics[1]);
}

#[test]
fn failures_become_the_substitute() {
    let failing = OneStepMap::new("failing", |s, h| if h > 0.5 { Err(Error::ZeroStep) } else { Ok(s.clone()) });
    let r = energy_error_sweep(&failing, ho_energy, &unit(), 10.0, &[0.1, 1.0], OVERFLOW_SUBSTITUTE);
    assert_eq!(r.metrics, vec![0.0, OVERFLOW_SUBSTITUTE]);
    assert_eq!(r.substituted, vec![false, true]);
    let blowup = OneStepMap::new("blowup", |s, _| PhaseState::scalar(s.q()[0] * 1e200, 0.0));
    let r = energy_error_sweep(&blowup, ho_energy, &unit(), 10.0, &[1.0], 42.0);
    assert_eq!(r.metrics, vec![42.0]);
}

#[test]
fn step_count_rounds_to_nearest() {
    assert_eq!(step_count(10.0, 3.0), 3);
    assert_eq!(step_count(10.0, 0.3), 33);
    assert_eq!(step_count(10_000.0, PI), 3183);
    assert_eq!(step_count(1.0, 0.1), 10);
}

#[test]
fn sweep_is_deterministic_and_ordered() {
    let sv = canned_method(CannedMethod::StormerVerlet, &ho());
    let hs: Vec<f64> = (1..=16).map(|k| 0.1 * k as f64).collect();
    let a = energy_error_sweep(&sv, ho_energy, &unit(), 50.0, &hs, OVERFLOW_SUBSTITUTE);
    let b = energy_error_sweep(&sv, ho_energy, &unit(), 50.0, &hs, OVERFLOW_SUBSTITUTE);
    assert_eq!(a, b);
    for (k, (h, m)) in a.iter().enumerate() {
        assert_eq!(h, hs[k]);
        assert_eq!(m, max_energy_error(&sv, &ho_energy, &unit(), 50.0, h).unwrap_or(OVERFLOW_SUBSTITUTE));
    }
}

#[test]
fn rk4_matches_rotation() {
    let s = PhaseState::scalar(0.3, 0.9).unwrap();
    let got = rk4_flow(&ho(), &s, 2.0, 2000).unwrap();
    assert!(got.distance(&ho_rotation(&s, 2.0).unwrap()) <= 1e-13);
    let v = verlet_reference(&ho(), &s, 2.0, 1e-4).unwrap();
    assert!(v.distance(&ho_rotation(&s, 2.0).unwrap()) <= 1e-8);
    assert!(rk4_flow(&ho(), &s, 1.0, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn slope_invariant_under_grid_reversal(k in 0.5f64..4.0, c in 0.1f64..10.0) {
        let hs = [0.2, 0.1, 0.05, 0.025];
        let es: Vec<f64> = hs.iter().map(|h: &f64| c * h.powf(k) * (1.0 + 0.1 * h.sin())).collect();
        let (mut hr, mut er) = (hs.to_vec(), es.clone());
        hr.reverse();
        er.reverse();
        let a = log_log_slope(&hs, &es).unwrap();
        let b = log_log_slope(&hr, &er).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn sweep_invariant_under_momentum_flip(q in -1.5f64..1.5, p in -1.5f64..1.5) {
        let hs = [0.1, 0.5, 1.3];
        for map in [exact_dl_ho_map(), exact_dh_ho_map(), ho_rotation_map()] {
            let a = energy_error_sweep(&map, ho_energy, &PhaseState::scalar(q, p).unwrap(), 200.0, &hs, OVERFLOW_SUBSTITUTE);
            let b = energy_error_sweep(&map, ho_energy, &PhaseState::scalar(q, -p).unwrap(), 200.0, &hs, OVERFLOW_SUBSTITUTE);
            for (x, y) in a.metrics.iter().zip(&b.metrics) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    /// Odd forces commute with `(q, p) ↦ (−q, −p)`, so sweeps agree exactly.
    #[test]
    fn sweep_invariant_under_point_reflection(q in -1.5f64..1.5, p in -1.5f64..1.5) {
        let sv = canned_method(CannedMethod::StormerVerlet, &ho());
        let hs = [0.1, 0.5, 1.3];
        let a = energy_error_sweep(&sv, ho_energy, &PhaseState::scalar(q, p).unwrap(), 20.0, &hs, OVERFLOW_SUBSTITUTE);
        let b = energy_error_sweep(&sv, ho_energy, &PhaseState::scalar(-q, -p).unwrap(), 20.0, &hs, OVERFLOW_SUBSTITUTE);
        prop_assert_eq!(a.metrics, b.metrics);
    }

    #[test]
    fn verlet_is_symplectic_everywhere(q in -1.5f64..1.5, p in -1.5f64..1.5, h in 0.01f64..0.3) {
        let sv = canned_method(CannedMethod::StormerVerlet, &SeparableSystem::cubic_oscillator(0.3));
        prop_assert!(symplecticity_defect(&sv, &PhaseState::scalar(q, p).unwrap(), h).unwrap() <= 1e-7);
    }

    #[test]
    fn verifiers_are_pure(q in -1.0f64..1.0, p in -1.0f64..1.0) {
        let ea = canned_method(CannedMethod::EulerA, &SeparableSystem::cubic_oscillator(0.3));
        let s = PhaseState::scalar(q, p).unwrap();
        prop_assert_eq!(symmetry_defect(&ea, &s, 0.1).unwrap(), symmetry_defect(&ea, &s, 0.1).unwrap());
        prop_assert_eq!(symplecticity_defect(&ea, &s, 0.1).unwrap(), symplecticity_defect(&ea, &s, 0.1).unwrap());
    }
}
