//! Turns a parsed circuit into modes, an initial state, and a run plan.
//!
//! Every qubit label owns a pair of adjacent modes, allocated in statement
//! order. Gates consume their input labels and bind fresh ones for their
//! outputs, so a label always refers to one photon's worth of rails at one
//! point in the circuit. Problems are reported as [`Diagnostic`]s with the
//! line of the offending statement.

use num_complex::Complex64;

use std::collections::BTreeMap;

use super::ast::{Circuit, CircuitElement, GateKind, QubitInit, Rail, RailRef, Statement};
use super::parse::{Diagnostic, DiagnosticCategory, MAX_DIAGNOSTICS};
use crate::elements::{ElementKind, ElementSpec};
use crate::fock::{FockState, OccupationVector, QubitSlot, DEFAULT_PHOTON_CAP};
use crate::gates::{
    destructive_xor, encoder, parity_check, pbs_cnot, AncillaPrep, GateDefinition,
};

/// One executable step of an elaborated circuit.
#[derive(Clone, Debug)]
pub enum CircuitOp {
    Element(ElementSpec),
    /// A heralded gate already remapped onto the circuit's modes. `index`
    /// counts gates in statement order.
    Gate {
        definition: GateDefinition,
        index: usize,
    },
    /// Postselects one photon on the slot's h rail after rotating the
    /// analyzer by `angle`.
    Detect {
        slot: QubitSlot,
        angle: f64,
    },
    /// Terminal logical readout of the listed qubits.
    Measure {
        labels: Vec<String>,
        slots: Vec<QubitSlot>,
        angle: f64,
    },
}

/// A circuit bound to concrete modes, ready to run.
#[derive(Clone, Debug)]
pub struct ElaboratedCircuit {
    pub mode_count: usize,
    pub initial_state: FockState,
    pub ops: Vec<CircuitOp>,
    pub gate_count: usize,
}

enum Prep {
    Single(QubitSlot, QubitInit),
    Pair(QubitSlot, QubitSlot),
}

enum Pending {
    Element {
        kind: ElementKind,
        modes: Vec<usize>,
    },
    Gate {
        line: usize,
        canonical: GateDefinition,
        rail_map: Vec<usize>,
        index: usize,
    },
    Detect {
        slot: QubitSlot,
        angle: f64,
    },
    Measure {
        labels: Vec<String>,
        slots: Vec<QubitSlot>,
        angle: f64,
    },
}

struct LabelInfo {
    slot: QubitSlot,
    live: bool,
    consumed_line: usize,
}

struct Builder {
    next_mode: usize,
    labels: BTreeMap<String, LabelInfo>,
    preps: Vec<Prep>,
    pending: Vec<Pending>,
    diagnostics: Vec<Diagnostic>,
    gate_count: usize,
}

impl Builder {
    fn diag(&mut self, line: usize, category: DiagnosticCategory, message: String) {
        self.diagnostics.push(Diagnostic {
            line,
            column: 1,
            category,
            message,
        });
    }

    fn alloc_slot(&mut self) -> QubitSlot {
        let slot = QubitSlot {
            h: self.next_mode,
            v: self.next_mode + 1,
        };
        self.next_mode += 2;
        slot
    }

    fn alloc_mode(&mut self) -> usize {
        let mode = self.next_mode;
        self.next_mode += 1;
        mode
    }

    /// Binds a fresh label. Labels are unique for the whole circuit, even
    /// after the qubit they name has been consumed.
    fn declare(&mut self, line: usize, label: &str) -> Option<QubitSlot> {
        if self.labels.contains_key(label) {
            self.diag(
                line,
                DiagnosticCategory::DuplicateLabel,
                format!("`{label}` is already declared"),
            );
            return None;
        }
        let slot = self.alloc_slot();
        self.labels.insert(
            label.to_string(),
            LabelInfo {
                slot,
                live: true,
                consumed_line: 0,
            },
        );
        Some(slot)
    }

    fn resolve(&mut self, line: usize, label: &str, consume: bool) -> Option<QubitSlot> {
        match self.labels.get_mut(label) {
            None => {
                self.diag(
                    line,
                    DiagnosticCategory::UnresolvedLabel,
                    format!("`{label}` is not declared"),
                );
                None
            }
            Some(info) if !info.live => {
                let at = info.consumed_line;
                self.diag(
                    line,
                    DiagnosticCategory::UnresolvedLabel,
                    format!("`{label}` was consumed at line {at}"),
                );
                None
            }
            Some(info) => {
                if consume {
                    info.live = false;
                    info.consumed_line = line;
                }
                Some(info.slot)
            }
        }
    }

    fn resolve_rail(&mut self, line: usize, rail_ref: &RailRef) -> Option<usize> {
        let slot = self.resolve(line, &rail_ref.qubit, false)?;
        Some(match rail_ref.rail {
            Rail::H => slot.h,
            Rail::V => slot.v,
        })
    }

    fn check_unit_interval(&mut self, line: usize, name: &str, value: f64) -> bool {
        if (0.0..=1.0).contains(&value) {
            true
        } else {
            self.diag(
                line,
                DiagnosticCategory::BadNumber,
                format!("{name} {value} is out of range, expected 0 to 1"),
            );
            false
        }
    }
}

fn canonical_gate(kind: GateKind) -> Result<GateDefinition, crate::gates::GateError> {
    match kind {
        GateKind::Parity => parity_check(),
        GateKind::Xor => destructive_xor(),
        GateKind::Encode => encoder(),
        GateKind::Cnot => pbs_cnot(),
    }
}

/// Resolves labels to modes and materializes gate definitions. Returns the
/// collected diagnostics when anything is wrong.
pub fn elaborate(circuit: &Circuit) -> Result<ElaboratedCircuit, Vec<Diagnostic>> {
    let mut b = Builder {
        next_mode: 0,
        labels: BTreeMap::new(),
        preps: Vec::new(),
        pending: Vec::new(),
        diagnostics: Vec::new(),
        gate_count: 0,
    };
    let mut measure_line = None;
    let last_line = circuit.statements.last().map(|s| s.line).unwrap_or(1);

    for spanned in &circuit.statements {
        let line = spanned.line;
        if b.diagnostics.len() >= MAX_DIAGNOSTICS {
            break;
        }
        if let Some(at) = measure_line {
            b.diag(
                line,
                DiagnosticCategory::Syntax,
                format!("no statements may follow the measure at line {at}"),
            );
            continue;
        }
        match &spanned.node {
            Statement::Qubit { label, init } => {
                if let Some(slot) = b.declare(line, label) {
                    b.preps.push(Prep::Single(slot, *init));
                }
            }
            Statement::Bell { a, b: second } => {
                let slot_a = b.declare(line, a);
                let slot_b = b.declare(line, second);
                if let (Some(sa), Some(sb)) = (slot_a, slot_b) {
                    b.preps.push(Prep::Pair(sa, sb));
                }
            }
            Statement::Element(element) => match element {
                CircuitElement::BeamSplitter { reflectivity, a, b: second } => {
                    let ok = b.check_unit_interval(line, "reflectivity", *reflectivity);
                    let mode_a = b.resolve_rail(line, a);
                    let mode_b = b.resolve_rail(line, second);
                    if let (true, Some(ma), Some(mb)) = (ok, mode_a, mode_b) {
                        if ma == mb {
                            b.diag(
                                line,
                                DiagnosticCategory::Syntax,
                                "both ports name the same rail".to_string(),
                            );
                        } else {
                            b.pending.push(Pending::Element {
                                kind: ElementKind::BeamSplitter {
                                    reflectivity: *reflectivity,
                                },
                                modes: vec![ma, mb],
                            });
                        }
                    }
                }
                CircuitElement::Phase { phase, rail } => {
                    if let Some(mode) = b.resolve_rail(line, rail) {
                        b.pending.push(Pending::Element {
                            kind: ElementKind::PhaseShifter { phase: *phase },
                            modes: vec![mode],
                        });
                    }
                }
                CircuitElement::Rotator { angle, qubit } => {
                    if let Some(slot) = b.resolve(line, qubit, false) {
                        b.pending.push(Pending::Element {
                            kind: ElementKind::PolarizationRotator { angle: *angle },
                            modes: vec![slot.h, slot.v],
                        });
                    }
                }
                CircuitElement::Pbs { a, b: second } => {
                    let slot_a = b.resolve(line, a, false);
                    let slot_b = b.resolve(line, second, false);
                    if let (Some(sa), Some(sb)) = (slot_a, slot_b) {
                        if sa == sb {
                            b.diag(
                                line,
                                DiagnosticCategory::Syntax,
                                "both ports name the same qubit".to_string(),
                            );
                        } else {
                            b.pending.push(Pending::Element {
                                kind: ElementKind::PolarizingBeamSplitter,
                                modes: vec![sa.h, sa.v, sb.h, sb.v],
                            });
                        }
                    }
                }
                CircuitElement::Loss { transmission, rail } => {
                    let ok = b.check_unit_interval(line, "transmission", *transmission);
                    if let Some(mode) = b.resolve_rail(line, rail) {
                        if ok {
                            let env = b.alloc_mode();
                            b.pending.push(Pending::Element {
                                kind: ElementKind::LossChannel {
                                    transmission: *transmission,
                                },
                                modes: vec![mode, env],
                            });
                        }
                    }
                }
            },
            Statement::Gate {
                kind,
                inputs,
                outputs,
            } => {
                let canonical = match canonical_gate(*kind) {
                    Ok(def) => def,
                    Err(err) => {
                        b.diag(
                            line,
                            DiagnosticCategory::Syntax,
                            format!("cannot build gate {}: {err}", kind.name()),
                        );
                        continue;
                    }
                };
                let mut resolved = Vec::with_capacity(inputs.len());
                for label in inputs {
                    resolved.push(b.resolve(line, label, true));
                }
                if resolved.iter().any(Option::is_none) {
                    continue;
                }
                let mut rail_map = vec![usize::MAX; canonical.mode_count];
                for (canon, slot) in canonical.input_slots.iter().zip(&resolved) {
                    let slot = slot.expect("checked above");
                    rail_map[canon.h] = slot.h;
                    rail_map[canon.v] = slot.v;
                }
                if let AncillaPrep::BellPair(ca, cb) = canonical.ancilla {
                    let slot_a = b.alloc_slot();
                    let slot_b = b.alloc_slot();
                    rail_map[ca.h] = slot_a.h;
                    rail_map[ca.v] = slot_a.v;
                    rail_map[cb.h] = slot_b.h;
                    rail_map[cb.v] = slot_b.v;
                    b.preps.push(Prep::Pair(slot_a, slot_b));
                }
                debug_assert!(rail_map.iter().all(|&m| m != usize::MAX));
                for (label, canon) in outputs.iter().zip(&canonical.output_slots) {
                    let circuit_slot = QubitSlot {
                        h: rail_map[canon.h],
                        v: rail_map[canon.v],
                    };
                    if b.labels.contains_key(label) {
                        b.diag(
                            line,
                            DiagnosticCategory::DuplicateLabel,
                            format!("`{label}` is already declared"),
                        );
                    } else {
                        b.labels.insert(
                            label.clone(),
                            LabelInfo {
                                slot: circuit_slot,
                                live: true,
                                consumed_line: 0,
                            },
                        );
                    }
                }
                let index = b.gate_count;
                b.gate_count += 1;
                b.pending.push(Pending::Gate {
                    line,
                    canonical,
                    rail_map,
                    index,
                });
            }
            Statement::Detect { qubit, basis } => {
                if let Some(slot) = b.resolve(line, qubit, true) {
                    b.pending.push(Pending::Detect {
                        slot,
                        angle: basis.angle(),
                    });
                }
            }
            Statement::Measure { qubits, basis } => {
                measure_line = Some(line);
                let mut slots = Vec::with_capacity(qubits.len());
                for label in qubits {
                    slots.push(b.resolve(line, label, false));
                }
                if slots.iter().all(Option::is_some) {
                    b.pending.push(Pending::Measure {
                        labels: qubits.clone(),
                        slots: slots.into_iter().flatten().collect(),
                        angle: basis.angle(),
                    });
                }
            }
        }
    }

    if measure_line.is_none() {
        b.diag(
            last_line,
            DiagnosticCategory::Syntax,
            "circuit has no measure statement".to_string(),
        );
    }

    let photon_total: u32 = b
        .preps
        .iter()
        .map(|prep| match prep {
            Prep::Single(..) => 1,
            Prep::Pair(..) => 2,
        })
        .sum();
    if photon_total > DEFAULT_PHOTON_CAP {
        b.diag(
            last_line,
            DiagnosticCategory::Syntax,
            format!(
                "circuit prepares {photon_total} photons, above the cap of {DEFAULT_PHOTON_CAP}"
            ),
        );
    }

    if !b.diagnostics.is_empty() {
        b.diagnostics.truncate(MAX_DIAGNOSTICS);
        return Err(b.diagnostics);
    }

    let mode_count = b.next_mode;
    let initial_state = build_initial_state(&b.preps, mode_count)
        .map_err(|err| vec![internal_diagnostic(last_line, &err.to_string())])?;

    let mut ops = Vec::with_capacity(b.pending.len());
    for pending in b.pending {
        match pending {
            Pending::Element { kind, modes } => {
                ops.push(CircuitOp::Element(ElementSpec::new(kind, modes)));
            }
            Pending::Gate {
                line,
                canonical,
                rail_map,
                index,
            } => match canonical.remapped(&rail_map, mode_count) {
                Ok(definition) => ops.push(CircuitOp::Gate { definition, index }),
                Err(err) => return Err(vec![internal_diagnostic(line, &err.to_string())]),
            },
            Pending::Detect { slot, angle } => ops.push(CircuitOp::Detect { slot, angle }),
            Pending::Measure {
                labels,
                slots,
                angle,
            } => ops.push(CircuitOp::Measure {
                labels,
                slots,
                angle,
            }),
        }
    }

    Ok(ElaboratedCircuit {
        mode_count,
        initial_state,
        ops,
        gate_count: b.gate_count,
    })
}

fn internal_diagnostic(line: usize, detail: &str) -> Diagnostic {
    Diagnostic {
        line,
        column: 1,
        category: DiagnosticCategory::Syntax,
        message: format!("cannot realize this statement: {detail}"),
    }
}

/// Product state over all declared qubits. Valid because every prep owns its
/// own pair of modes and nothing acts on them before the circuit starts.
fn build_initial_state(
    preps: &[Prep],
    mode_count: usize,
) -> Result<FockState, crate::fock::FockError> {
    let one = Complex64::new(1.0, 0.0);
    let mut terms: Vec<(Vec<u8>, Complex64)> = vec![(vec![0; mode_count], one)];
    for prep in preps {
        match prep {
            Prep::Single(slot, init) => {
                let branches: &[(usize, Complex64)] = match init {
                    QubitInit::Zero => &[(0, one)],
                    QubitInit::One => &[(1, one)],
                    QubitInit::Plus => &[(0, one), (1, one)],
                    QubitInit::Minus => &[(0, one), (1, Complex64::new(-1.0, 0.0))],
                };
                let mut next = Vec::with_capacity(terms.len() * branches.len());
                for (counts, amp) in &terms {
                    for (rail, weight) in branches {
                        let mut counts = counts.clone();
                        counts[if *rail == 0 { slot.h } else { slot.v }] = 1;
                        next.push((counts, amp * weight));
                    }
                }
                terms = next;
            }
            Prep::Pair(a, second) => {
                let mut next = Vec::with_capacity(terms.len() * 2);
                for (counts, amp) in &terms {
                    let mut hh = counts.clone();
                    hh[a.h] = 1;
                    hh[second.h] = 1;
                    next.push((hh, *amp));
                    let mut vv = counts.clone();
                    vv[a.v] = 1;
                    vv[second.v] = 1;
                    next.push((vv, *amp));
                }
                terms = next;
            }
        }
    }
    let occupations: Vec<(OccupationVector, Complex64)> = terms
        .into_iter()
        .map(|(counts, amp)| (OccupationVector::from_counts(&counts), amp))
        .collect();
    FockState::superpose(&occupations)
}
