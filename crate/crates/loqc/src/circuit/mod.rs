//! A small text format for linear-optical circuits.
//!
//! A circuit declares polarization qubits, routes them through elements and
//! heralded gates, and ends with one logical measurement. [`parse_circuit`]
//! turns source text into an AST, [`elaborate`] checks labels and lays the
//! qubits out on concrete modes, and [`run_circuit`] computes the exact
//! outcome distribution.

pub mod ast;
pub mod elaborate;
pub mod parse;
pub mod run;

pub use ast::{three_qubit_parity, Circuit};
pub use elaborate::{elaborate, CircuitOp, ElaboratedCircuit};
pub use parse::{parse_circuit, Diagnostic, DiagnosticCategory, MAX_DIAGNOSTICS};
pub use run::{run_circuit, CircuitError, CircuitOutcome, CircuitReport};

/// Bundled example: three qubits folded to a single parity bit.
pub const PARITY3_SOURCE: &str = include_str!("../../data/parity3.loqc");

/// Parses and elaborates in one step.
pub fn compile(source: &str) -> Result<ElaboratedCircuit, Vec<Diagnostic>> {
    elaborate(&parse_circuit(source)?)
}
