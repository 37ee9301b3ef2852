//! Simulation of adiabatic quantum evolution for deciding whether a
//! Diophantine equation has a nonnegative-integer solution.

pub mod adiabatic;
pub mod cli;
pub mod diophantine;
pub mod fock;
pub mod hamiltonian;
pub mod integrator;
pub mod par;
pub mod spectral;
