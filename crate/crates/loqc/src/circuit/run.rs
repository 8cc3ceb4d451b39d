//! Executes an elaborated circuit exactly.
//!
//! The run tracks a list of weighted branches. Elements act on every branch
//! in place; a heralded gate splits each branch into one successor per
//! detector pattern, weighted by the pattern probability; a detect op keeps
//! only the branches where its analyzer fires. The weights reaching the
//! final measure sum to the circuit's acceptance probability, and the
//! reported output distribution is conditioned on acceptance.

use std::collections::BTreeMap;

use thiserror::Error;

use super::elaborate::{CircuitOp, ElaboratedCircuit};
use crate::elements::{apply_element, OpticsError};
use crate::fock::{FockError, FockState};
use crate::gates::{run_gate, GateError};
use crate::measure::{logical_readout, partition_by_counts, rotate_to_analyzer, MeasureError};

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// One logical readout value, as a bit string in measure-statement order.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitOutcome {
    pub value: String,
    pub probability: f64,
}

#[derive(Clone, Debug)]
pub struct CircuitReport {
    /// Probability that every herald and detect in the circuit fires.
    pub acceptance_probability: f64,
    /// Distribution over measured bit strings, conditioned on acceptance.
    pub outputs: Vec<CircuitOutcome>,
    /// Per-gate acceptance, conditioned on reaching that gate.
    pub per_gate_acceptance: Vec<f64>,
    /// Accepted weight whose readout was not a valid dual-rail word.
    pub invalid_probability: f64,
}

pub fn run_circuit(elab: &ElaboratedCircuit) -> Result<CircuitReport, CircuitError> {
    let mut branches: Vec<(f64, FockState)> = vec![(1.0, elab.initial_state.clone())];
    let mut gate_flow = vec![(0.0_f64, 0.0_f64); elab.gate_count];
    let mut outputs: BTreeMap<String, f64> = BTreeMap::new();
    let mut accepted_weight = 0.0;
    let mut invalid_weight = 0.0;

    for op in &elab.ops {
        match op {
            CircuitOp::Element(spec) => {
                for (_, state) in &mut branches {
                    *state = apply_element(state, spec)?;
                }
            }
            CircuitOp::Gate { definition, index } => {
                let mut next = Vec::new();
                for (weight, state) in &branches {
                    let run = run_gate(definition, state, 1)?;
                    gate_flow[*index].0 += weight;
                    gate_flow[*index].1 += weight * run.accepted_probability();
                    for outcome in run.outcomes {
                        if outcome.probability > 0.0 {
                            next.push((weight * outcome.probability, outcome.state));
                        }
                    }
                }
                branches = next;
            }
            CircuitOp::Detect { slot, angle } => {
                let mut next = Vec::new();
                for (weight, state) in &branches {
                    let rotated = rotate_to_analyzer(state, *slot, *angle)?;
                    let groups = [vec![slot.h], vec![slot.v]];
                    for (signature, probability, conditional) in
                        partition_by_counts(&rotated, &groups)?
                    {
                        if signature == [1, 0] && probability > 0.0 {
                            next.push((weight * probability, conditional));
                        }
                    }
                }
                branches = next;
            }
            CircuitOp::Measure { slots, angle, .. } => {
                for (weight, state) in &branches {
                    accepted_weight += weight;
                    let mut working = state.clone();
                    if *angle != 0.0 {
                        for slot in slots {
                            working = rotate_to_analyzer(&working, *slot, *angle)?;
                        }
                    }
                    let (distribution, invalid) = logical_readout(&working, slots);
                    invalid_weight += weight * invalid;
                    for (bits, probability) in distribution {
                        let value: String =
                            bits.iter().map(|b| char::from(b'0' + b)).collect();
                        *outputs.entry(value).or_insert(0.0) += weight * probability;
                    }
                }
            }
        }
    }

    let outputs = outputs
        .into_iter()
        .map(|(value, weight)| CircuitOutcome {
            value,
            probability: if accepted_weight > 0.0 {
                weight / accepted_weight
            } else {
                0.0
            },
        })
        .collect();
    Ok(CircuitReport {
        acceptance_probability: accepted_weight,
        outputs,
        per_gate_acceptance: gate_flow
            .into_iter()
            .map(|(incoming, accepted)| {
                if incoming > 0.0 {
                    accepted / incoming
                } else {
                    0.0
                }
            })
            .collect(),
        invalid_probability: if accepted_weight > 0.0 {
            invalid_weight / accepted_weight
        } else {
            0.0
        },
    })
}
