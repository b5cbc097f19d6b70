use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::averaged::{exact_ho_lagrangian, exact_ho_right_hamiltonian};
use crate::system::SeparableSystem;
use crate::taylor_vi::{canned_method, CannedMethod};

fn ho() -> SeparableSystem {
    SeparableSystem::harmonic_oscillator()
}

/// `H⁺ = p1·q0 + h H(q0, p1)`, generating symplectic Euler-A.
fn euler_a_right(sys: SeparableSystem) -> DiscreteRightHamiltonian {
    let (s0, s1, s2) = (sys.clone(), sys.clone(), sys);
    GeneratingFunction::analytic(
        "euler_a_right",
        move |q0, p1, h| linalg::dot(p1, q0) + h * s0.hamiltonian(q0, p1),
        move |q0, p1, h| linalg::axpy(p1, h, &s1.grad_potential(q0)),
        move |q0, p1, h| linalg::axpy(q0, h, &s2.inv_mass(p1)),
    )
}

/// `H⁻ = −p0·q1 + h H(q1, p0)`, generating symplectic Euler-B.
fn euler_b_left(sys: SeparableSystem) -> DiscreteLeftHamiltonian {
    let (s0, s1, s2) = (sys.clone(), sys.clone(), sys);
    GeneratingFunction::analytic(
        "euler_b_left",
        move |p0, q1, h| -linalg::dot(p0, q1) + h * s0.hamiltonian(q1, p0),
        move |p0, q1, h| linalg::axpy(&neg(q1.to_vec()), h, &s1.inv_mass(p0)),
        move |p0, q1, h| linalg::axpy(&neg(p0.to_vec()), h, &s2.grad_potential(q1)),
    )
}

/// `L_d = h L(q0, (q1 − q0)/h)`.
fn euler_a_lagrangian(sys: SeparableSystem) -> DiscreteLagrangian {
    let (s0, s1, s2) = (sys.clone(), sys.clone(), sys);
    GeneratingFunction::analytic(
        "euler_a_lagrangian",
        move |q0, q1, h| {
            let v = linalg::scale(&linalg::sub(q1, q0), 1.0 / h);
            h * s0.lagrangian(q0, &v)
        },
        move |q0, q1, h| {
            let v = linalg::scale(&linalg::sub(q1, q0), 1.0 / h);
            linalg::axpy(&neg(s1.apply_mass(&v)), -h, &s1.grad_potential(q0))
        },
        move |q0, q1, h| {
            let v = linalg::scale(&linalg::sub(q1, q0), 1.0 / h);
            s2.apply_mass(&v)
        },
    )
}

fn random_states(n: usize, seed: u64) -> Vec<PhaseState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| PhaseState::scalar(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)).unwrap())
        .collect()
}

fn close(a: &PhaseState, q: f64, p: f64, tol: f64) -> bool {
    (a.q()[0] - q).abs() <= tol && (a.p()[0] - p).abs() <= tol
}

#[test]
fn type_one_euler_a_example() {
    let s = PhaseState::scalar(1.0, 0.0).unwrap();
    let out = euler_a_lagrangian(ho()).step(&s, 0.1).unwrap();
    assert!(close(&out, 0.99, -0.1, 1e-12), "{out:?}");
}

#[test]
fn type_one_exact_quarter_period() {
    let s = PhaseState::scalar(1.0, 0.0).unwrap();
    let out = exact_ho_lagrangian().step(&s, std::f64::consts::FRAC_PI_2).unwrap();
    assert!(close(&out, 0.0, -1.0, 1e-12), "{out:?}");
}

#[test]
fn zero_step_rejected_for_every_type() {
    let s = PhaseState::scalar(1.0, 0.0).unwrap();
    assert!(matches!(euler_a_lagrangian(ho()).step(&s, 0.0), Err(Error::ZeroStep)));
    assert!(matches!(euler_a_right(ho()).step(&s, 0.0), Err(Error::ZeroStep)));
    assert!(matches!(euler_b_left(ho()).step(&s, 0.0), Err(Error::ZeroStep)));
}

#[test]
fn type_two_examples() {
    let s = PhaseState::scalar(1.0, 0.0).unwrap();
    let out = euler_a_right(ho()).step(&s, 0.1).unwrap();
    assert!(close(&out, 0.99, -0.1, 1e-12), "{out:?}");
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let out = exact_ho_right_hamiltonian().step(&s, std::f64::consts::FRAC_PI_4).unwrap();
    assert!(close(&out, r, -r, 1e-12), "{out:?}");
}

#[test]
fn type_three_examples() {
    let s = PhaseState::scalar(1.0, 0.0).unwrap();
    let out = euler_b_left(ho()).step(&s, 0.1).unwrap();
    assert!(close(&out, 1.0, -0.1, 1e-12), "{out:?}");
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let out = adjoint_right(&exact_ho_right_hamiltonian()).step(&s, std::f64::consts::FRAC_PI_4).unwrap();
    assert!(close(&out, r, -r, 1e-10), "{out:?}");
}

#[test]
fn legendre_transforms_of_euler_a() {
    let hd = euler_a_right(ho());
    let minus = hd.legendre_minus(&[1.0], &[-0.1], 0.1).unwrap();
    assert!(close(&minus, 1.0, 0.0, 1e-15));
    let plus = hd.legendre_plus(&[1.0], &[-0.1], 0.1).unwrap();
    assert!(close(&plus, 0.99, -0.1, 1e-15));
}

#[test]
fn plus_after_inverse_minus_is_the_step() {
    let hd = euler_a_right(SeparableSystem::cubic_oscillator(0.3));
    for s in random_states(20, 1) {
        let p1 = hd.invert_legendre_minus(&s, 0.1).unwrap().x;
        let composed = hd.legendre_plus(s.q(), &p1, 0.1).unwrap();
        assert!(composed.distance(&hd.step(&s, 0.1).unwrap()) <= 1e-10);
    }
}

#[test]
fn euler_a_adjoint_has_the_documented_form() {
    let adj = adjoint_right(&euler_a_right(ho()));
    let reference = euler_b_left(ho());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let p0 = [rng.gen_range(-2.0..2.0)];
        let q1 = [rng.gen_range(-2.0..2.0)];
        let h = rng.gen_range(-0.5..0.5);
        assert!((adj.value(&p0, &q1, h) - reference.value(&p0, &q1, h)).abs() <= 1e-14);
    }
}

#[test]
fn double_adjoint_is_identity() {
    let gens = [euler_a_right(SeparableSystem::cubic_oscillator(0.2)), exact_ho_right_hamiltonian()];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for g in &gens {
        let back = adjoint_left(&adjoint_right(g));
        for _ in 0..100 {
            let a = [rng.gen_range(-2.0..2.0)];
            let b = [rng.gen_range(-2.0..2.0)];
            let h = rng.gen_range(-0.7..0.7);
            assert!((back.value(&a, &b, h) - g.value(&a, &b, h)).abs() <= 1e-13);
            assert!(linalg::norm_inf(&linalg::sub(&back.d1(&a, &b, h), &g.d1(&a, &b, h))) <= 1e-13);
            assert!(linalg::norm_inf(&linalg::sub(&back.d2(&a, &b, h), &g.d2(&a, &b, h))) <= 1e-13);
        }
    }
    let ld = euler_a_lagrangian(ho());
    let back = ld.adjoint().adjoint();
    for _ in 0..100 {
        let (a, b, h) = ([rng.gen_range(-2.0..2.0)], [rng.gen_range(-2.0..2.0)], rng.gen_range(0.05..0.7));
        assert!((back.value(&a, &b, h) - ld.value(&a, &b, h)).abs() <= 1e-13);
    }
}

#[test]
fn euler_b_left_adjoint_generates_euler_a() {
    let sys = SeparableSystem::cubic_oscillator(0.2);
    let adj = adjoint_left(&euler_b_left(sys.clone()));
    let ea = canned_method(CannedMethod::EulerA, &sys);
    for s in random_states(20, 4) {
        assert!(adj.step(&s, 0.1).unwrap().distance(&ea.step(&s, 0.1).unwrap()) <= 1e-10);
    }
}

#[test]
fn adjoint_map_pairs() {
    let sys = SeparableSystem::cubic_oscillator(0.2);
    let ea = canned_method(CannedMethod::EulerA, &sys);
    let eb = canned_method(CannedMethod::EulerB, &sys);
    let sv = canned_method(CannedMethod::StormerVerlet, &sys);
    let rot = crate::averaged::ho_rotation_map();
    let (adj_a, adj_sv, adj_rot) = (adjoint_map(&ea), adjoint_map(&sv), adjoint_map(&rot));
    for s in random_states(20, 5) {
        assert!(adj_a.step(&s, 0.1).unwrap().distance(&eb.step(&s, 0.1).unwrap()) <= 1e-10);
        assert!(adj_sv.step(&s, 0.1).unwrap().distance(&sv.step(&s, 0.1).unwrap()) <= 1e-10);
        assert!(adj_rot.step(&s, 0.7).unwrap().distance(&rot.step(&s, 0.7).unwrap()) <= 1e-10);
    }
}

#[test]
fn adjoint_of_exact_dh_generates_inverse_of_negative_step() {
    let hd = exact_ho_right_hamiltonian();
    let adj = adjoint_right(&hd);
    let numeric = adjoint_map(&hd.to_map());
    for s in random_states(20, 6) {
        assert!(adj.step(&s, 0.4).unwrap().distance(&numeric.step(&s, 0.4).unwrap()) <= 1e-10);
    }
}

#[test]
fn map_level_adjoint_consistency() {
    let hd = euler_a_right(SeparableSystem::cubic_oscillator(0.3));
    let numeric = adjoint_map(&hd.to_map());
    let adj = adjoint_right(&hd);
    for s in random_states(20, 7) {
        assert!(adj.step(&s, 0.1).unwrap().distance(&numeric.step(&s, 0.1).unwrap()) <= 1e-9);
    }
}

#[test]
fn legendre_right_to_left_generates_the_same_map() {
    let hd = euler_a_right(ho());
    let left = legendre_right_to_left(&hd);
    let mut a = PhaseState::scalar(1.0, 0.0).unwrap();
    let mut b = a.clone();
    for _ in 0..50 {
        a = hd.step(&a, 0.1).unwrap();
        b = left.step(&b, 0.1).unwrap();
        assert!(a.distance(&b) <= 1e-9);
    }
}

#[test]
fn exact_dh_is_self_adjoint_and_euler_a_is_not() {
    let exact = exact_ho_right_hamiltonian();
    let (leg, adj) = (legendre_right_to_left(&exact), adjoint_right(&exact));
    for s in random_states(10, 8) {
        assert!(leg.step(&s, 0.3).unwrap().distance(&adj.step(&s, 0.3).unwrap()) <= 1e-9);
    }
    let ea = euler_a_right(ho());
    let (leg, adj) = (legendre_right_to_left(&ea), adjoint_right(&ea));
    let s = PhaseState::scalar(1.0, 0.5).unwrap();
    assert!(leg.step(&s, 0.1).unwrap().distance(&adj.step(&s, 0.1).unwrap()) > 1e-3);
}

#[test]
fn legendre_left_value_matches_formula() {
    let hd = exact_ho_right_hamiltonian();
    let left = legendre_right_to_left(&hd);
    let (q0, p1, h) = ([0.3], [-0.4], 0.25);
    let p0 = hd.d1(&q0, &p1, h);
    let q1 = hd.d2(&q0, &p1, h);
    let expected = -p0[0] * q0[0] - p1[0] * q1[0] + hd.value(&q0, &p1, h);
    assert!((left.value(&p0, &q1, h) - expected).abs() <= 1e-12);
    assert!(left.derivative_mismatch(&p0, &q1, h) <= 1e-6);
}

#[test]
fn symmetric_compose_of_euler_a() {
    let ea = canned_method(CannedMethod::EulerA, &ho());
    let sym = symmetric_compose(&ea);
    let s = PhaseState::scalar(1.0, 0.0).unwrap();
    let out = sym.step(&s, 0.2).unwrap();
    assert!(close(&out, 0.98, -0.2, 1e-10), "{out:?}");
    let back = sym.step(&sym.step(&s, -0.2).unwrap(), 0.2).unwrap();
    assert!(back.distance(&s) <= 1e-9);
}

#[test]
fn composition_validation() {
    let ea = canned_method(CannedMethod::EulerA, &ho());
    let eb = canned_method(CannedMethod::EulerB, &ho());
    let single = compose(vec![(ea.clone(), 1.0)]).unwrap();
    for s in random_states(10, 9) {
        assert_eq!(single.step(&s, 0.1).unwrap(), ea.step(&s, 0.1).unwrap());
    }
    assert!(compose(vec![(ea.clone(), 0.5), (eb.clone(), 0.4)]).is_err());
    assert!(compose(vec![]).is_err());
    assert!(symmetric_composition(&ea, &eb, &[0.3, 0.2], &[0.3, 0.2]).is_err());
    let ok = symmetric_composition(&ea, &eb, &[0.25, 0.25], &[0.25, 0.25]).unwrap();
    let s = PhaseState::scalar(0.4, -0.2).unwrap();
    assert!(ok.step(&ok.step(&s, -0.1).unwrap(), 0.1).unwrap().distance(&s) <= 1e-12);
}

#[test]
fn analytic_partials_match_values() {
    let gens = [euler_a_right(SeparableSystem::cubic_oscillator(0.5)), exact_ho_right_hamiltonian()];
    for g in &gens {
        assert!(g.derivative_mismatch(&[0.3], &[-0.7], 0.2) <= 1e-7);
    }
    assert!(exact_ho_lagrangian().derivative_mismatch(&[0.3], &[-0.7], 0.4) <= 1e-7);
}

#[test]
fn solver_failures_carry_the_label() {
    let bad: DiscreteRightHamiltonian =
        GeneratingFunction::analytic("no-root", |_, _, _| 0.0, |_, p1, _| vec![p1[0] * p1[0] + 1.0], |q0, _, _| q0.to_vec());
    let err = bad.step(&PhaseState::scalar(0.0, 0.0).unwrap(), 0.1).unwrap_err();
    match err {
        Error::Solve { label, .. } => assert_eq!(label, "no-root"),
        other => panic!("unexpected {other:?}"),
    }
}
