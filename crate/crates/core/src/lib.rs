//! Variational and generating-function integrators for Hamiltonian systems.
//!
//! The crate builds symplectic one-step maps from generating functions of
//! Types I–III, assembles Taylor variational integrators from quadrature
//! rules, provides averaged integrators for perturbed harmonic oscillators,
//! an FPU lattice model, and verifiers for order, symplecticity and symmetry.

pub mod averaged;
pub mod error;
pub mod fpu;
pub mod genfunc;
pub mod linalg;
pub mod quadrature;
pub mod rootfind;
pub mod state;
pub mod system;
pub mod taylor_vi;
pub mod verify;

pub use error::{Error, Result};
pub use genfunc::{
    adjoint_left, adjoint_map, adjoint_right, compose, legendre_right_to_left, symmetric_compose,
    DiscreteLagrangian, DiscreteLeftHamiltonian, DiscreteRightHamiltonian, GeneratingFunction,
    OneStepMap,
};
pub use quadrature::QuadratureRule;
pub use rootfind::{newton_solve, SolveError, SolveSettings};
pub use state::PhaseState;
pub use system::{PerturbedSystem, Potential, SeparableSystem};
