use std::f64::consts::{PI, SQRT_2};

use super::*;
use crate::verify::{symmetry_defect, symplecticity_defect};

fn benchmark() -> FpuSystem {
    FpuSystem::new(3, 50.0).unwrap()
}

#[test]
fn energy_examples() {
    let sys = FpuSystem::new(1, 1.0).unwrap();
    let zero = PhaseState::new(vec![0.0; 2], vec![0.0; 2]).unwrap();
    assert_eq!(fpu_energy(&sys, &zero).unwrap(), 0.0);
    let s = PhaseState::new(vec![1.0, 1.0], vec![0.0, 0.0]).unwrap();
    assert_eq!(fpu_energy(&sys, &s).unwrap(), 2.0);
    let bad = PhaseState::new(vec![0.0; 3], vec![0.0; 3]).unwrap();
    assert!(matches!(fpu_energy(&sys, &bad), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn initial_data_energy_regression() {
    let sys = benchmark();
    let s = sys.initial_state();
    let expected = 1.5 + (0.98f64.powi(4) + 1.02f64.powi(4)) / 4.0;
    assert!((fpu_energy(&sys, &s).unwrap() - expected).abs() <= 1e-14);
    assert!((fpu_energy(&sys, &s).unwrap() - 2.001_200_08).abs() <= 1e-12);
    let osc = oscillatory_energy(&sys, &s).unwrap();
    assert!((osc.total - 1.0).abs() <= 1e-14);
    assert_eq!(&osc.per_spring[1..], &[0.0, 0.0]);
}

#[test]
fn oscillatory_energy_examples() {
    let sys = FpuSystem::new(1, 2.0).unwrap();
    let s = PhaseState::new(vec![0.0, SQRT_2], vec![0.0, 0.0]).unwrap();
    assert!((oscillatory_energy(&sys, &s).unwrap().per_spring[0] - 2.0).abs() <= 1e-15);
    let zero = PhaseState::new(vec![0.0; 6], vec![0.0; 6]).unwrap();
    let osc = oscillatory_energy(&benchmark(), &zero).unwrap();
    assert!(osc.per_spring.iter().all(|i| *i == 0.0));
}

#[test]
fn mode_round_trip() {
    let sys = benchmark();
    let s = sys.from_modes(&[1.0, 0.0, 0.0], &[0.02, 0.0, 0.0], &[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]).unwrap();
    assert!(s.distance(&sys.initial_state()) <= 1e-15);
    assert!(sys.from_modes(&[1.0], &[0.0], &[0.0], &[0.0]).is_err());
}

#[test]
fn gradient_matches_potential() {
    let sys = benchmark();
    let q = [0.3, -0.1, 0.5, 0.45, -0.2, 0.05];
    assert!(sys.potential().gradient_mismatch(&q, 1e-6) <= 1e-5);
}

#[test]
fn stiff_quarter_period_preserves_spring_energy() {
    let sys = FpuSystem::new(1, 50.0).unwrap();
    let stiff = SeparableSystem::with_unit_mass(
        2,
        Potential::new(move |q| sys.stiff_potential(q), move |q| sys.stiff_grad(q)),
    );
    let sv = canned_method(CannedMethod::StormerVerlet, &stiff);
    let s0 = sys.initial_state();
    let h = 1e-5;
    let steps = (PI / (2.0 * 50.0) / h).round() as usize;
    let s1 = sv.iterate(&s0, h, steps).unwrap();
    let (i0, i1) = (oscillatory_energy(&sys, &s0).unwrap(), oscillatory_energy(&sys, &s1).unwrap());
    assert!((i0.total - i1.total).abs() <= 1e-6);
}

#[test]
fn linear_imex_is_midpoint_and_conserves_quadratic_energy() {
    let sys = benchmark();
    let stepper = ImexStepper::new(sys, 0.01).unwrap().without_quartic();
    let linear = |s: &PhaseState| 0.5 * s.p().iter().map(|p| p * p).sum::<f64>() + sys.stiff_potential(s.q());
    let mut s = sys.initial_state();
    for _ in 0..100 {
        let next = stepper.step(&s).unwrap();
        assert!((linear(&next) - linear(&s)).abs() <= 1e-12);
        let mid_q: Vec<f64> = s.q().iter().zip(next.q()).map(|(a, b)| 0.5 * (a + b)).collect();
        let mid_p: Vec<f64> = s.p().iter().zip(next.p()).map(|(a, b)| 0.5 * (a + b)).collect();
        let force = sys.stiff_grad(&mid_q);
        for i in 0..6 {
            assert!((next.q()[i] - s.q()[i] - 0.01 * mid_p[i]).abs() <= 1e-13);
            assert!((next.p()[i] - s.p()[i] + 0.01 * force[i]).abs() <= 1e-11);
        }
        s = next;
    }
}

#[test]
fn imex_small_step_is_near_identity() {
    let sys = benchmark();
    let s = sys.initial_state();
    let d1 = imex_step(&sys, &s, 1e-4).unwrap().distance(&s);
    let d2 = imex_step(&sys, &s, 5e-5).unwrap().distance(&s);
    assert!(d1 < 1e-2 && (d1 / d2 - 2.0).abs() < 0.05, "{d1} {d2}");
    assert!(matches!(imex_step(&sys, &s, 0.0), Err(Error::ZeroStep)));
}

#[test]
fn fpu_maps_are_symplectic() {
    let sys = benchmark();
    let s = sys.initial_state();
    for m in FpuMethod::ALL {
        let d = symplecticity_defect(&m.map(&sys), &s, 0.01).unwrap();
        assert!(d <= 1e-5, "{}: {d:e}", m.name());
    }
}

#[test]
fn fpu_symmetry_pattern() {
    let sys = benchmark();
    let s = sys.initial_state();
    for m in [FpuMethod::StormerVerlet, FpuMethod::Imex] {
        assert!(symmetry_defect(&m.map(&sys), &s, 0.01).unwrap() <= 1e-9, "{}", m.name());
    }
    assert!(symmetry_defect(&FpuMethod::HTviTrapezoid.map(&sys), &s, 0.01).unwrap() > 1e-6);
}

#[test]
fn imex_map_tracks_step_size_changes() {
    let sys = benchmark();
    let map = imex_map(&sys);
    let s = sys.initial_state();
    for h in [0.01, 0.02, 0.01, -0.01] {
        assert_eq!(map.step(&s, h).unwrap(), imex_step(&sys, &s, h).unwrap());
    }
}

#[test]
fn method_names_and_validation() {
    for m in FpuMethod::ALL {
        assert_eq!(m.name().parse::<FpuMethod>().unwrap(), m);
    }
    assert!("rk4".parse::<FpuMethod>().is_err());
    assert!(FpuSystem::new(0, 50.0).is_err());
    assert!(FpuSystem::new(3, -1.0).is_err());
}
