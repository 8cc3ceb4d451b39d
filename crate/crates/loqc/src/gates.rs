//! Heralded dual-rail gates built from ancilla photons, linear elements,
//! and photon-counting detectors.
//!
//! Every gate here follows the same template: prepare ancilla photons next
//! to the inputs, run a fixed linear network, count photons at dedicated
//! detector rail pairs, and keep only the runs whose counts match a herald
//! pattern. Each accepted pattern leaves the output qubits in the ideal
//! state up to a known Pauli frame; the per-pattern corrections are not
//! hard-coded but recovered by searching Pauli assignments that reproduce
//! the gate's ideal action on a small probe set (all basis states plus two
//! superpositions that pin down relative phases).
//!
//! Partially distinguishable photons are handled by splitting each input
//! photon across temporal layers: layer `l` of rail `r` lives at mode
//! `l * rails + r`, the network acts identically on every layer, and
//! detectors count photons summed over layers.

use crate::elements::{
    apply_to_modes, element_unitary, make_distinguishable, ElementKind, ElementSpec, OpticsError,
};
use crate::fock::{FockError, FockState, OccupationVector, QubitSlot};
use crate::measure::{
    apply_pauli_paired, logical_fidelity, partition_by_counts, rotate_to_analyzer, MeasureError,
    PauliOp,
};
use num_complex::Complex64;
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_PI_4;
use thiserror::Error;

/// Herald probabilities at or below this are treated as never occurring.
const PATTERN_EPSILON: f64 = 1e-12;
/// A Pauli frame is accepted only if it restores the ideal output this close
/// to fidelity one on every probe.
const CORRECTION_FIDELITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum GateError {
    #[error("gate expects {expected} input qubits, got {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("logical basis labels must be 0 or 1, got {0}")]
    InvalidBit(u8),
    #[error("input state has {found} modes, the layered network needs {expected}")]
    ModeLayout { expected: usize, found: usize },
    #[error("no Pauli correction reproduces the ideal output for detector pattern {pattern:?}")]
    NoValidCorrection { pattern: Vec<u8> },
    #[error("no detector assignment admits a complete correction table")]
    NoValidAssignment,
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// Logical state over a register of dual-rail qubits, keyed by bit pattern.
pub type LogicalState = BTreeMap<Vec<u8>, Complex64>;

/// What the gate does to logical amplitudes when every herald succeeds.
///
/// `apply` returns the normalized ideal output, or `None` when the input is
/// annihilated (a parity check fed an odd-parity state has nothing left to
/// keep).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdealGate {
    ParityCheck,
    Xor,
    Encoder,
    Cnot,
}

impl IdealGate {
    pub fn input_arity(&self) -> usize {
        match self {
            IdealGate::ParityCheck | IdealGate::Xor | IdealGate::Cnot => 2,
            IdealGate::Encoder => 1,
        }
    }

    pub fn output_arity(&self) -> usize {
        match self {
            IdealGate::ParityCheck | IdealGate::Xor => 1,
            IdealGate::Encoder | IdealGate::Cnot => 2,
        }
    }

    pub fn apply(&self, input: &LogicalState) -> Option<LogicalState> {
        let mut out: LogicalState = BTreeMap::new();
        for (bits, amp) in input {
            let image = match self {
                IdealGate::ParityCheck => {
                    if bits[0] != bits[1] {
                        continue;
                    }
                    vec![bits[0]]
                }
                IdealGate::Xor => vec![bits[0] ^ bits[1]],
                IdealGate::Encoder => vec![bits[0], bits[0]],
                IdealGate::Cnot => vec![bits[0], bits[0] ^ bits[1]],
            };
            *out.entry(image).or_insert_with(|| Complex64::new(0.0, 0.0)) += amp;
        }
        let norm_sqr: f64 = out.values().map(|a| a.norm_sqr()).sum();
        if norm_sqr <= 1e-24 {
            return None;
        }
        let scale = norm_sqr.sqrt().recip();
        for amp in out.values_mut() {
            *amp *= scale;
        }
        out.retain(|_, amp| amp.norm_sqr() > 1e-24);
        Some(out)
    }
}

/// Ancilla photons prepared alongside the inputs before the network runs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AncillaPrep {
    None,
    /// Maximally entangled pair across two slots: both photons horizontal
    /// plus both vertical, with equal weight.
    BellPair(QubitSlot, QubitSlot),
}

/// One detector: a rail pair read in the analyzer basis rotated by
/// `basis_angle`, required to hold exactly one photon for acceptance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorSpec {
    pub slot: QubitSlot,
    pub basis_angle: f64,
}

/// Herald pattern (one entry per detector, 0 = first analyzer port) mapped
/// to the Pauli fix-up per output slot.
pub type CorrectionTable = BTreeMap<Vec<u8>, Vec<PauliOp>>;

#[derive(Clone, Debug)]
pub struct GateDefinition {
    pub name: &'static str,
    pub mode_count: usize,
    pub input_slots: Vec<QubitSlot>,
    pub output_slots: Vec<QubitSlot>,
    pub ancilla: AncillaPrep,
    pub elements: Vec<ElementSpec>,
    pub detectors: Vec<DetectorSpec>,
    pub corrections: CorrectionTable,
    pub ideal: IdealGate,
}

impl GateDefinition {
    /// Rebuilds the definition on a wider register. `rail_map[r]` gives the
    /// new index of rail `r`; the correction table is layout-independent and
    /// carries over unchanged.
    pub fn remapped(&self, rail_map: &[usize], mode_count: usize) -> Result<Self, GateError> {
        if rail_map.len() != self.mode_count {
            return Err(GateError::ModeLayout {
                expected: self.mode_count,
                found: rail_map.len(),
            });
        }
        let mut seen = BTreeSet::new();
        for &target in rail_map {
            if target >= mode_count {
                return Err(GateError::Fock(FockError::ModeOutOfRange {
                    index: target,
                    mode_count,
                }));
            }
            if !seen.insert(target) {
                return Err(GateError::Optics(OpticsError::DuplicatePlacement(target)));
            }
        }
        let map_slot =
            |slot: &QubitSlot| QubitSlot::new(rail_map[slot.h], rail_map[slot.v]);
        Ok(GateDefinition {
            name: self.name,
            mode_count,
            input_slots: self
                .input_slots
                .iter()
                .map(&map_slot)
                .collect::<Result<_, _>>()?,
            output_slots: self
                .output_slots
                .iter()
                .map(&map_slot)
                .collect::<Result<_, _>>()?,
            ancilla: match self.ancilla {
                AncillaPrep::None => AncillaPrep::None,
                AncillaPrep::BellPair(a, b) => AncillaPrep::BellPair(map_slot(&a)?, map_slot(&b)?),
            },
            elements: self
                .elements
                .iter()
                .map(|e| {
                    ElementSpec::new(
                        e.kind.clone(),
                        e.modes.iter().map(|&m| rail_map[m]).collect(),
                    )
                })
                .collect(),
            detectors: self
                .detectors
                .iter()
                .map(|d| {
                    Ok(DetectorSpec {
                        slot: map_slot(&d.slot)?,
                        basis_angle: d.basis_angle,
                    })
                })
                .collect::<Result<_, GateError>>()?,
            corrections: self.corrections.clone(),
            ideal: self.ideal,
        })
    }
}

/// Builds the photonic input: logical amplitudes on the input slots, the
/// ancilla photons in place, every other rail empty.
pub fn prepare_logical_input(
    def: &GateDefinition,
    amplitudes: &LogicalState,
) -> Result<FockState, GateError> {
    let arity = def.input_slots.len();
    let mut terms: Vec<(OccupationVector, Complex64)> = Vec::new();
    for (bits, amp) in amplitudes {
        if bits.len() != arity {
            return Err(GateError::ArityMismatch {
                expected: arity,
                found: bits.len(),
            });
        }
        let mut counts = vec![0u8; def.mode_count];
        for (slot, &bit) in def.input_slots.iter().zip(bits) {
            match bit {
                0 => counts[slot.h] = 1,
                1 => counts[slot.v] = 1,
                other => return Err(GateError::InvalidBit(other)),
            }
        }
        match def.ancilla {
            AncillaPrep::None => terms.push((OccupationVector::new(counts), *amp)),
            AncillaPrep::BellPair(a, b) => {
                let mut both_h = counts.clone();
                both_h[a.h] = 1;
                both_h[b.h] = 1;
                let mut both_v = counts;
                both_v[a.v] = 1;
                both_v[b.v] = 1;
                terms.push((OccupationVector::new(both_h), *amp));
                terms.push((OccupationVector::new(both_v), *amp));
            }
        }
    }
    Ok(FockState::superpose(&terms)?)
}

/// Single computational basis input.
pub fn prepare_basis_input(def: &GateDefinition, bits: &[u8]) -> Result<FockState, GateError> {
    let mut amplitudes = LogicalState::new();
    amplitudes.insert(bits.to_vec(), Complex64::new(1.0, 0.0));
    prepare_logical_input(def, &amplitudes)
}

/// Input state spread over temporal layers, ready for `run_gate`.
pub struct LayeredInput {
    pub state: FockState,
    pub layers: usize,
}

/// Prepares the gate input with every input photon only partially
/// indistinguishable from the rest: each input qubit keeps amplitude
/// `sqrt(overlap)` in the shared layer and moves the remainder into its own
/// fresh temporal layer. Ancilla photons stay fully in the shared layer.
pub fn prepare_layered_input(
    def: &GateDefinition,
    amplitudes: &LogicalState,
    overlap: f64,
) -> Result<LayeredInput, GateError> {
    if !(0.0..=1.0).contains(&overlap) || overlap.is_nan() {
        return Err(GateError::Optics(OpticsError::ParameterOutOfRange {
            name: "overlap",
            value: overlap,
        }));
    }
    let base = prepare_logical_input(def, amplitudes)?;
    if overlap == 1.0 {
        return Ok(LayeredInput {
            state: base,
            layers: 1,
        });
    }
    let rails = def.mode_count;
    let mut state = base;
    for slot in &def.input_slots {
        state = make_distinguishable(&state, *slot, overlap)?;
    }
    let layers = 1 + def.input_slots.len();
    let mut map: Vec<usize> = (0..rails).collect();
    for (j, slot) in def.input_slots.iter().enumerate() {
        map.push((1 + j) * rails + slot.h);
        map.push((1 + j) * rails + slot.v);
    }
    Ok(LayeredInput {
        state: state.remap_modes(&map, rails * layers),
        layers,
    })
}

fn slot_layer_pairs(slot: QubitSlot, rails: usize, layers: usize) -> Vec<(usize, usize)> {
    (0..layers)
        .map(|layer| (layer * rails + slot.h, layer * rails + slot.v))
        .collect()
}

/// Runs the linear network on every layer, then rotates each detector pair
/// into its analyzer basis.
fn propagate(
    def: &GateDefinition,
    input: &FockState,
    layers: usize,
) -> Result<FockState, GateError> {
    let rails = def.mode_count;
    if input.mode_count() != rails * layers {
        return Err(GateError::ModeLayout {
            expected: rails * layers,
            found: input.mode_count(),
        });
    }
    let mut state = input.clone();
    for element in &def.elements {
        let unitary = element_unitary(&element.kind)?;
        for layer in 0..layers {
            let modes: Vec<usize> = element.modes.iter().map(|&m| m + layer * rails).collect();
            state = apply_to_modes(&state, &unitary, &modes)?;
        }
    }
    for detector in &def.detectors {
        if detector.basis_angle == 0.0 {
            continue;
        }
        for layer in 0..layers {
            let slot = QubitSlot::new(
                detector.slot.h + layer * rails,
                detector.slot.v + layer * rails,
            )?;
            state = rotate_to_analyzer(&state, slot, detector.basis_angle)?;
        }
    }
    Ok(state)
}

/// Two count groups per detector: its first analyzer port summed over
/// layers, then its second.
fn detector_groups(def: &GateDefinition, layers: usize) -> Vec<Vec<usize>> {
    let rails = def.mode_count;
    let mut groups = Vec::with_capacity(2 * def.detectors.len());
    for detector in &def.detectors {
        groups.push(
            (0..layers)
                .map(|l| l * rails + detector.slot.h)
                .collect(),
        );
        groups.push(
            (0..layers)
                .map(|l| l * rails + detector.slot.v)
                .collect(),
        );
    }
    groups
}

fn pattern_from_signature(signature: &[u8]) -> Option<Vec<u8>> {
    signature
        .chunks(2)
        .map(|pair| match (pair[0], pair[1]) {
            (1, 0) => Some(0),
            (0, 1) => Some(1),
            _ => None,
        })
        .collect()
}

struct RawOutcome {
    pattern: Vec<u8>,
    probability: f64,
    state: FockState,
}

/// Propagates and splits by detector counts. Returns the herald outcomes
/// whose detectors each saw exactly one photon, plus the rejected weight.
fn enumerate_heralds(
    def: &GateDefinition,
    input: &FockState,
    layers: usize,
) -> Result<(Vec<RawOutcome>, f64), GateError> {
    let state = propagate(def, input, layers)?;
    let parts = partition_by_counts(&state, &detector_groups(def, layers))?;
    let mut raw = Vec::new();
    let mut rejected = 0.0;
    for (signature, probability, conditional) in parts {
        match pattern_from_signature(&signature) {
            Some(pattern) => raw.push(RawOutcome {
                pattern,
                probability,
                state: conditional,
            }),
            None => rejected += probability,
        }
    }
    Ok((raw, rejected))
}

/// One accepted herald: its pattern, its probability, and the conditional
/// state of the full register after feed-forward.
#[derive(Clone, Debug)]
pub struct GateOutcome {
    pub pattern: Vec<u8>,
    pub probability: f64,
    pub state: FockState,
}

#[derive(Clone, Debug)]
pub struct GateRun {
    pub outcomes: Vec<GateOutcome>,
    pub rejected_probability: f64,
}

impl GateRun {
    pub fn accepted_probability(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability).sum()
    }

    pub fn outcome(&self, pattern: &[u8]) -> Option<&GateOutcome> {
        self.outcomes.iter().find(|o| o.pattern == pattern)
    }
}

fn apply_output_corrections(
    def: &GateDefinition,
    state: &FockState,
    ops: &[PauliOp],
    layers: usize,
) -> FockState {
    let mut out = state.clone();
    for (slot, &op) in def.output_slots.iter().zip(ops) {
        if op == PauliOp::I {
            continue;
        }
        let pairs = slot_layer_pairs(*slot, def.mode_count, layers);
        out = apply_pauli_paired(&out, &pairs, op);
    }
    out
}

fn run_inner(
    def: &GateDefinition,
    input: &FockState,
    layers: usize,
    correct: bool,
) -> Result<GateRun, GateError> {
    let (raw, mut rejected) = enumerate_heralds(def, input, layers)?;
    let mut outcomes = Vec::new();
    for outcome in raw {
        match def.corrections.get(&outcome.pattern) {
            Some(ops) => {
                let state = if correct {
                    apply_output_corrections(def, &outcome.state, ops, layers)
                } else {
                    outcome.state
                };
                outcomes.push(GateOutcome {
                    pattern: outcome.pattern,
                    probability: outcome.probability,
                    state,
                });
            }
            None => rejected += outcome.probability,
        }
    }
    Ok(GateRun {
        outcomes,
        rejected_probability: rejected,
    })
}

/// Runs the gate and applies the feed-forward correction of each accepted
/// herald. Patterns outside the correction table count as rejected.
pub fn run_gate(
    def: &GateDefinition,
    input: &FockState,
    layers: usize,
) -> Result<GateRun, GateError> {
    run_inner(def, input, layers, true)
}

/// Same acceptance as `run_gate` but with the Pauli fix-ups skipped, which
/// exposes the raw per-pattern output frames.
pub fn run_gate_uncorrected(
    def: &GateDefinition,
    input: &FockState,
    layers: usize,
) -> Result<GateRun, GateError> {
    run_inner(def, input, layers, false)
}

/// Probe inputs that pin down a correction table: every basis state, the
/// uniform superposition, and a circular state on the first qubit. The two
/// superpositions separate Pauli frames that agree on basis states.
fn derivation_probes(arity: usize) -> Vec<LogicalState> {
    let mut probes = Vec::new();
    let patterns: Vec<Vec<u8>> = (0..1u32 << arity).map(|idx| basis_bits(idx, arity)).collect();
    for bits in &patterns {
        let mut probe = LogicalState::new();
        probe.insert(bits.clone(), Complex64::new(1.0, 0.0));
        probes.push(probe);
    }
    let mut plus = LogicalState::new();
    for bits in &patterns {
        plus.insert(bits.clone(), Complex64::new(1.0, 0.0));
    }
    probes.push(plus);
    let mut circular = LogicalState::new();
    circular.insert(vec![0; arity], Complex64::new(1.0, 0.0));
    let mut flipped = vec![0; arity];
    flipped[0] = 1;
    circular.insert(flipped, Complex64::new(0.0, 1.0));
    probes.push(circular);
    probes
}

fn basis_bits(index: u32, arity: usize) -> Vec<u8> {
    (0..arity)
        .map(|i| ((index >> (arity - 1 - i)) & 1) as u8)
        .collect()
}

fn candidate_ops(outputs: usize) -> Vec<Vec<PauliOp>> {
    (0..4usize.pow(outputs as u32))
        .map(|idx| {
            (0..outputs)
                .map(|i| PauliOp::ALL[(idx >> (2 * i)) & 3])
                .collect()
        })
        .collect()
}

/// Finds, for every herald pattern the gate can produce, the Pauli frame
/// that restores the ideal output on all probes at once. Fails if a pattern
/// occurs for an input the ideal gate annihilates, or if no frame reaches
/// fidelity one.
pub fn derive_correction_table(def: &GateDefinition) -> Result<CorrectionTable, GateError> {
    let arity = def.input_slots.len();
    let mut evaluations: Vec<(LogicalState, BTreeMap<Vec<u8>, FockState>)> = Vec::new();
    let mut patterns: BTreeSet<Vec<u8>> = BTreeSet::new();
    for probe in derivation_probes(arity) {
        let input = prepare_logical_input(def, &probe)?;
        let (raw, _) = enumerate_heralds(def, &input, 1)?;
        let target = def.ideal.apply(&probe);
        let mut by_pattern = BTreeMap::new();
        for outcome in raw {
            if outcome.probability <= PATTERN_EPSILON {
                continue;
            }
            match &target {
                Some(_) => {
                    patterns.insert(outcome.pattern.clone());
                    by_pattern.insert(outcome.pattern, outcome.state);
                }
                None => {
                    return Err(GateError::NoValidCorrection {
                        pattern: outcome.pattern,
                    })
                }
            }
        }
        if let Some(target) = target {
            evaluations.push((target, by_pattern));
        }
    }
    let mut table = CorrectionTable::new();
    'patterns: for pattern in patterns {
        'candidates: for ops in candidate_ops(def.output_slots.len()) {
            for (target, by_pattern) in &evaluations {
                let Some(state) = by_pattern.get(&pattern) else {
                    continue;
                };
                let corrected = apply_output_corrections(def, state, &ops, 1);
                let fidelity = logical_fidelity(&corrected, &def.output_slots, target);
                if fidelity < 1.0 - CORRECTION_FIDELITY_TOLERANCE {
                    continue 'candidates;
                }
            }
            table.insert(pattern, ops);
            continue 'patterns;
        }
        return Err(GateError::NoValidCorrection { pattern });
    }
    Ok(table)
}

/// Herald statistics split by what the correction table says about each
/// pattern: accepted outright, accepted after a nontrivial fix-up, or
/// rejected.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutcomeBreakdown {
    pub accept: f64,
    pub correctable: f64,
    pub reject: f64,
}

pub fn outcome_breakdown(
    def: &GateDefinition,
    input: &FockState,
    layers: usize,
) -> Result<OutcomeBreakdown, GateError> {
    let (raw, rejected) = enumerate_heralds(def, input, layers)?;
    let mut breakdown = OutcomeBreakdown {
        accept: 0.0,
        correctable: 0.0,
        reject: rejected,
    };
    for outcome in raw {
        match def.corrections.get(&outcome.pattern) {
            Some(ops) if ops.iter().all(|&op| op == PauliOp::I) => {
                breakdown.accept += outcome.probability;
            }
            Some(_) => breakdown.correctable += outcome.probability,
            None => breakdown.reject += outcome.probability,
        }
    }
    Ok(breakdown)
}

/// Distribution of logical values on the output slots, conditioned on
/// acceptance, plus the conditional weight on non-logical terms (a slot
/// empty or doubly occupied).
pub fn output_distribution(
    def: &GateDefinition,
    run: &GateRun,
    layers: usize,
) -> Result<(BTreeMap<Vec<u8>, f64>, f64), GateError> {
    let rails = def.mode_count;
    let mut groups = Vec::with_capacity(2 * def.output_slots.len());
    for slot in &def.output_slots {
        groups.push((0..layers).map(|l| l * rails + slot.h).collect::<Vec<_>>());
        groups.push((0..layers).map(|l| l * rails + slot.v).collect::<Vec<_>>());
    }
    let accepted = run.accepted_probability();
    let mut distribution: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
    let mut invalid = 0.0;
    if accepted == 0.0 {
        return Ok((distribution, invalid));
    }
    for outcome in &run.outcomes {
        for (signature, probability, _) in partition_by_counts(&outcome.state, &groups)? {
            let weight = outcome.probability * probability;
            match pattern_from_signature(&signature) {
                Some(bits) => *distribution.entry(bits).or_insert(0.0) += weight,
                None => invalid += weight,
            }
        }
    }
    for value in distribution.values_mut() {
        *value /= accepted;
    }
    Ok((distribution, invalid / accepted))
}

/// Overlap between the logical output and a normalized target, with every
/// non-output mode (detector rails, ancilla leftovers, temporal layers)
/// traced out. Which layer holds an output photon is environment: terms in
/// different layers add probabilities, terms in the same layer add
/// amplitudes.
pub fn output_fidelity(
    def: &GateDefinition,
    state: &FockState,
    layers: usize,
    target: &LogicalState,
) -> f64 {
    if layers == 1 {
        return logical_fidelity(state, &def.output_slots, target);
    }
    let rails = def.mode_count;
    let slot_pairs: Vec<Vec<(usize, usize)>> = def
        .output_slots
        .iter()
        .map(|slot| slot_layer_pairs(*slot, rails, layers))
        .collect();
    let slot_modes: BTreeSet<usize> = slot_pairs
        .iter()
        .flatten()
        .flat_map(|&(h, v)| [h, v])
        .collect();
    let env_modes: Vec<usize> = (0..state.mode_count())
        .filter(|m| !slot_modes.contains(m))
        .collect();
    let mut overlaps: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
    for (occ, amp) in state.terms() {
        let mut bits = Vec::with_capacity(slot_pairs.len());
        let mut layer_tags = Vec::with_capacity(slot_pairs.len());
        let mut valid = true;
        for pairs in &slot_pairs {
            let mut total = 0u32;
            let mut found = None;
            for (layer, &(h, v)) in pairs.iter().enumerate() {
                let (nh, nv) = (occ.count(h), occ.count(v));
                total += u32::from(nh) + u32::from(nv);
                if found.is_none() {
                    if (nh, nv) == (1, 0) {
                        found = Some((0u8, layer as u8));
                    } else if (nh, nv) == (0, 1) {
                        found = Some((1u8, layer as u8));
                    }
                }
            }
            match (total, found) {
                (1, Some((bit, layer))) => {
                    bits.push(bit);
                    layer_tags.push(layer);
                }
                _ => {
                    valid = false;
                    break;
                }
            }
        }
        if !valid {
            continue;
        }
        let Some(coeff) = target.get(&bits) else {
            continue;
        };
        let mut env: Vec<u8> = env_modes.iter().map(|&m| occ.count(m)).collect();
        env.extend(layer_tags);
        *overlaps
            .entry(env)
            .or_insert_with(|| Complex64::new(0.0, 0.0)) += coeff.conj() * amp;
    }
    overlaps.values().map(|o| o.norm_sqr()).sum()
}

/// Acceptance-weighted output fidelity over a whole run.
pub fn run_fidelity(
    def: &GateDefinition,
    run: &GateRun,
    layers: usize,
    target: &LogicalState,
) -> f64 {
    let accepted = run.accepted_probability();
    if accepted == 0.0 {
        return 0.0;
    }
    run.outcomes
        .iter()
        .map(|o| o.probability * output_fidelity(def, &o.state, layers, target))
        .sum::<f64>()
        / accepted
}

#[derive(Clone, Debug)]
pub struct TruthTableRow {
    pub input: Vec<u8>,
    /// Output value distribution conditioned on acceptance.
    pub outputs: BTreeMap<Vec<u8>, f64>,
    pub acceptance: f64,
    /// Conditional weight on outputs that are not a valid logical state.
    pub invalid: f64,
}

#[derive(Clone, Debug)]
pub struct GateReport {
    pub gate: String,
    pub overlap: f64,
    pub rows: Vec<TruthTableRow>,
    pub mean_acceptance: f64,
    /// Probability that an accepted run yields the ideal classical output,
    /// averaged over basis inputs with acceptance as the weight.
    pub truth_table_fidelity: f64,
    /// Worst-case quantum fidelity to the ideal output over the probe set.
    pub process_fidelity: f64,
}

/// Evaluates the gate on every basis input at the given photon overlap.
pub fn truth_table(def: &GateDefinition, overlap: f64) -> Result<GateReport, GateError> {
    let arity = def.input_slots.len();
    let mut rows = Vec::new();
    let mut acceptance_sum = 0.0;
    let mut weighted_correct = 0.0;
    let mut weight = 0.0;
    for idx in 0..1u32 << arity {
        let bits = basis_bits(idx, arity);
        let mut probe = LogicalState::new();
        probe.insert(bits.clone(), Complex64::new(1.0, 0.0));
        let layered = prepare_layered_input(def, &probe, overlap)?;
        let run = run_gate(def, &layered.state, layered.layers)?;
        let acceptance = run.accepted_probability();
        let (outputs, invalid) = output_distribution(def, &run, layered.layers)?;
        if let Some(ideal) = def.ideal.apply(&probe) {
            let correct: f64 = ideal
                .iter()
                .map(|(k, a)| outputs.get(k).copied().unwrap_or(0.0) * a.norm_sqr())
                .sum();
            weighted_correct += acceptance * correct;
        }
        weight += acceptance;
        acceptance_sum += acceptance;
        rows.push(TruthTableRow {
            input: bits,
            outputs,
            acceptance,
            invalid,
        });
    }
    let truth_table_fidelity = if weight > 0.0 {
        weighted_correct / weight
    } else {
        1.0
    };
    let mut process_fidelity = f64::INFINITY;
    for probe in derivation_probes(arity) {
        let Some(target) = def.ideal.apply(&probe) else {
            continue;
        };
        let layered = prepare_layered_input(def, &probe, overlap)?;
        let run = run_gate(def, &layered.state, layered.layers)?;
        if run.accepted_probability() <= PATTERN_EPSILON {
            continue;
        }
        process_fidelity = process_fidelity.min(run_fidelity(def, &run, layered.layers, &target));
    }
    if !process_fidelity.is_finite() {
        process_fidelity = 1.0;
    }
    Ok(GateReport {
        gate: def.name.to_string(),
        overlap,
        rows: rows.clone(),
        mean_acceptance: acceptance_sum / rows.len() as f64,
        truth_table_fidelity,
        process_fidelity,
    })
}

fn pbs_on(a: QubitSlot, b: QubitSlot) -> ElementSpec {
    ElementSpec::new(
        ElementKind::PolarizingBeamSplitter,
        vec![a.h, a.v, b.h, b.v],
    )
}

fn rotator_on(slot: QubitSlot, angle: f64) -> ElementSpec {
    ElementSpec::new(
        ElementKind::PolarizationRotator { angle },
        vec![slot.h, slot.v],
    )
}

/// Two-qubit parity check: the second qubit's rails are merged with the
/// first at a polarizing splitter and read out in the diagonal basis. Equal
/// basis values pass untouched, opposite values never herald.
pub fn parity_check() -> Result<GateDefinition, GateError> {
    let q0 = QubitSlot::new(0, 1)?;
    let q1 = QubitSlot::new(2, 3)?;
    let mut def = GateDefinition {
        name: "parity-check",
        mode_count: 4,
        input_slots: vec![q0, q1],
        output_slots: vec![q0],
        ancilla: AncillaPrep::None,
        elements: vec![pbs_on(q0, q1)],
        detectors: vec![DetectorSpec {
            slot: q1,
            basis_angle: FRAC_PI_4,
        }],
        corrections: CorrectionTable::new(),
        ideal: IdealGate::ParityCheck,
    };
    def.corrections = derive_correction_table(&def)?;
    Ok(def)
}

/// Destructive exclusive-or: the polarizing splitter is sandwiched between
/// opposite rotations so it merges the diagonal components, the target is
/// consumed at the detector, and the surviving qubit carries the sum.
pub fn destructive_xor() -> Result<GateDefinition, GateError> {
    let control = QubitSlot::new(0, 1)?;
    let target = QubitSlot::new(2, 3)?;
    let mut def = GateDefinition {
        name: "xor",
        mode_count: 4,
        input_slots: vec![control, target],
        output_slots: vec![control],
        ancilla: AncillaPrep::None,
        elements: vec![
            rotator_on(control, -FRAC_PI_4),
            rotator_on(target, -FRAC_PI_4),
            pbs_on(control, target),
            rotator_on(control, FRAC_PI_4),
            rotator_on(target, FRAC_PI_4),
        ],
        detectors: vec![DetectorSpec {
            slot: target,
            basis_angle: 0.0,
        }],
        corrections: CorrectionTable::new(),
        ideal: IdealGate::Xor,
    };
    def.corrections = derive_correction_table(&def)?;
    Ok(def)
}

/// Non-destructive encoder: a parity merge against one half of an
/// entangled pair copies the input value onto the pair, yielding two rails
/// that agree with the input.
pub fn encoder() -> Result<GateDefinition, GateError> {
    let input = QubitSlot::new(0, 1)?;
    let bell_x = QubitSlot::new(2, 3)?;
    let bell_y = QubitSlot::new(4, 5)?;
    let mut def = GateDefinition {
        name: "encoder",
        mode_count: 6,
        input_slots: vec![input],
        output_slots: vec![input, bell_y],
        ancilla: AncillaPrep::BellPair(bell_x, bell_y),
        elements: vec![pbs_on(input, bell_x)],
        detectors: vec![DetectorSpec {
            slot: bell_x,
            basis_angle: FRAC_PI_4,
        }],
        corrections: CorrectionTable::new(),
        ideal: IdealGate::Encoder,
    };
    def.corrections = derive_correction_table(&def)?;
    Ok(def)
}

/// Heralded controlled-not built from a parity merge on the control side, a
/// diagonal-basis merge on the target side, and an entangled pair bridging
/// the two halves.
///
/// Which two rail pairs host the detectors (and which carry the outputs) is
/// not fixed a priori: each stage's splitter treats its two ports
/// symmetrically. The constructor tries every assignment and keeps the
/// first one whose correction table reaches fidelity one on all probes with
/// every basis input heralding at a nonzero rate.
pub fn pbs_cnot() -> Result<GateDefinition, GateError> {
    let control = QubitSlot::new(0, 1)?;
    let bridge_x = QubitSlot::new(2, 3)?;
    let bridge_y = QubitSlot::new(4, 5)?;
    let target = QubitSlot::new(6, 7)?;
    let elements = vec![
        pbs_on(control, bridge_x),
        rotator_on(bridge_y, -FRAC_PI_4),
        rotator_on(target, -FRAC_PI_4),
        pbs_on(bridge_y, target),
        rotator_on(bridge_y, FRAC_PI_4),
        rotator_on(target, FRAC_PI_4),
    ];
    for (detector_one, control_out) in [(control, bridge_x), (bridge_x, control)] {
        for (detector_two, target_out) in [(bridge_y, target), (target, bridge_y)] {
            let mut def = GateDefinition {
                name: "cnot",
                mode_count: 8,
                input_slots: vec![control, target],
                output_slots: vec![control_out, target_out],
                ancilla: AncillaPrep::BellPair(bridge_x, bridge_y),
                elements: elements.clone(),
                detectors: vec![
                    DetectorSpec {
                        slot: detector_one,
                        basis_angle: FRAC_PI_4,
                    },
                    DetectorSpec {
                        slot: detector_two,
                        basis_angle: 0.0,
                    },
                ],
                corrections: CorrectionTable::new(),
                ideal: IdealGate::Cnot,
            };
            let Ok(table) = derive_correction_table(&def) else {
                continue;
            };
            if table.is_empty() {
                continue;
            }
            def.corrections = table;
            let mut all_basis_herald = true;
            for idx in 0..4u32 {
                let input = prepare_basis_input(&def, &basis_bits(idx, 2))?;
                let run = run_gate(&def, &input, 1)?;
                if run.accepted_probability() <= PATTERN_EPSILON {
                    all_basis_herald = false;
                    break;
                }
            }
            if all_basis_herald {
                return Ok(def);
            }
        }
    }
    Err(GateError::NoValidAssignment)
}
