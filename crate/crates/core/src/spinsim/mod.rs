//! Spin-1/2 operator algebra, lattice Hamiltonians and exact propagation for
//! clusters of at most [`MAX_SPINS`] protons.
//!
//! All Hamiltonians are in rad/s in the frame rotating at the carrier
//! plane's Larmor frequency. Rotations follow `R(θ) = exp(−iθ n·I)`, so a
//! rotation about x carries y into z.

mod evolve;
mod model;
mod operator;

pub use evolve::{
    expectation, fidelity, matrix_power, propagator, trotter_propagator, unitarity_error,
    HermitianEigen, State,
};
pub use model::{
    dipolar_hamiltonian, pair_hamiltonian, zeeman_hamiltonian, DipolarForm, SpinSystemModel,
};
pub use operator::{
    collective, product_operator, spin_operator, CMatrix, Operator, SpinAxis, C64, MAX_SPINS,
};

pub(crate) use operator::{add_product, trace_product};
