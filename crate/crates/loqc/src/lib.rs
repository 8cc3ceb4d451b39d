//! Exact simulation of few-photon linear-optical quantum logic.
//!
//! Qubits are single photons across pairs of polarization modes. States are
//! sparse maps from mode occupations to complex amplitudes, every optical
//! element acts through a mode unitary whose transition amplitudes are
//! matrix permanents, and two-qubit gates are heralded: ancilla photons and
//! detector outcomes decide success, with Pauli feedforward repairing the
//! accepted branches. Nothing is sampled unless a Monte Carlo routine is
//! called explicitly; reported probabilities are exact up to f64 rounding.

pub mod circuit;
pub mod elements;
pub mod fock;
pub mod gates;
pub mod measure;
pub mod sources;
