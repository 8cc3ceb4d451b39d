//! Photon counting, detector imperfections, and feed-forward corrections.
//!
//! Projections here are the only non-unitary steps in the simulator. A
//! detection pattern selects the basis terms compatible with the observed
//! counts; the surviving amplitudes are renormalized into the conditional
//! state. Detector inefficiency is modelled unitarily, by coupling the
//! detected mode to a fresh environment mode before projecting, so no
//! probability is ever lost from the bookkeeping.

use crate::elements::{apply_to_modes, element_unitary, ElementKind, OpticsError};
use crate::fock::{FockError, FockState, OccupationVector, QubitSlot};
use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("detector efficiency must lie in [0, 1], got {0}")]
    EfficiencyOutOfRange(f64),
    #[error("a basis term holds {found} photons across the qubit slot; exactly one is required")]
    SlotOccupancy { found: u32 },
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// Detector response model: quantum efficiency plus whether the detector
/// resolves photon number or only clicks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorModel {
    pub efficiency: f64,
    pub number_resolving: bool,
}

impl DetectorModel {
    pub fn new(efficiency: f64, number_resolving: bool) -> Result<Self, MeasureError> {
        if !(0.0..=1.0).contains(&efficiency) || efficiency.is_nan() {
            return Err(MeasureError::EfficiencyOutOfRange(efficiency));
        }
        Ok(DetectorModel {
            efficiency,
            number_resolving,
        })
    }

    /// Lossless number-resolving detector, the default for gate heralds.
    pub fn ideal() -> Self {
        DetectorModel {
            efficiency: 1.0,
            number_resolving: true,
        }
    }
}

/// Required result at one mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CountRequirement {
    /// Number-resolving: exactly this many photons.
    Exactly(u8),
    /// Threshold: at least one photon.
    Click,
    /// Threshold: no photons.
    NoClick,
}

impl CountRequirement {
    fn matches(&self, count: u8) -> bool {
        match *self {
            CountRequirement::Exactly(n) => count == n,
            CountRequirement::Click => count >= 1,
            CountRequirement::NoClick => count == 0,
        }
    }

    /// A requirement pins the mode to one definite count exactly when it is
    /// not a bare click.
    fn definite(&self) -> bool {
        !matches!(self, CountRequirement::Click)
    }
}

/// Joint detection event: analyzer rotations to apply, then per-mode counts.
///
/// `rotations` lets a pattern measure in a rotated polarization basis; an
/// angle of 0 is the (h, v) basis and pi/4 the diagonal basis. Rotations are
/// realized with the same rotator element the rest of the crate uses.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectionPattern {
    pub rotations: Vec<(QubitSlot, f64)>,
    pub requirements: Vec<(usize, CountRequirement)>,
}

impl DetectionPattern {
    pub fn counting(requirements: Vec<(usize, CountRequirement)>) -> Self {
        DetectionPattern {
            rotations: Vec::new(),
            requirements,
        }
    }
}

/// Rotates a slot so that the analyzer basis at `angle` lands on (h, v).
pub fn rotate_to_analyzer(
    state: &FockState,
    slot: QubitSlot,
    angle: f64,
) -> Result<FockState, OpticsError> {
    if angle == 0.0 {
        return Ok(state.clone());
    }
    let rotator = element_unitary(&ElementKind::PolarizationRotator { angle: -angle })?;
    apply_to_modes(state, &rotator, &[slot.h, slot.v])
}

/// Projects onto one detection pattern.
///
/// Returns the conditional state and the pattern probability. Modes whose
/// requirement pins a definite count are dropped from the conditional state;
/// click modes stay, since their count still varies. A zero-probability
/// pattern yields `None`.
pub fn project_pattern(
    state: &FockState,
    pattern: &DetectionPattern,
) -> Result<(Option<FockState>, f64), MeasureError> {
    let mut working = state.clone();
    for &(slot, angle) in &pattern.rotations {
        working = rotate_to_analyzer(&working, slot, angle)?;
    }
    for &(mode, _) in &pattern.requirements {
        if mode >= working.mode_count() {
            return Err(MeasureError::Fock(FockError::ModeOutOfRange {
                index: mode,
                mode_count: working.mode_count(),
            }));
        }
    }
    let mut amps = BTreeMap::new();
    let mut probability = 0.0;
    for (occ, amp) in working.terms() {
        let matches = pattern
            .requirements
            .iter()
            .all(|&(mode, req)| req.matches(occ.count(mode)));
        if matches {
            probability += amp.norm_sqr();
            amps.insert(occ.clone(), *amp);
        }
    }
    if probability == 0.0 {
        return Ok((None, 0.0));
    }
    let mut conditional =
        FockState::from_parts(working.mode_count(), working.photon_cap(), amps);
    conditional.normalize()?;
    let drop: Vec<usize> = pattern
        .requirements
        .iter()
        .filter(|(_, req)| req.definite())
        .map(|&(mode, _)| mode)
        .collect();
    let conditional = conditional.drop_definite_modes(&drop)?;
    Ok((Some(conditional), probability))
}

/// Couples `mode` to a fresh environment mode with transmission equal to the
/// detector efficiency. The environment mode is appended at the end of the
/// mode list; project on `mode` afterwards to read the detector.
pub fn apply_detector_loss(
    state: &FockState,
    mode: usize,
    model: &DetectorModel,
) -> Result<FockState, MeasureError> {
    if mode >= state.mode_count() {
        return Err(MeasureError::Fock(FockError::ModeOutOfRange {
            index: mode,
            mode_count: state.mode_count(),
        }));
    }
    if model.efficiency == 1.0 {
        return Ok(state.clone());
    }
    let env = state.mode_count();
    let extended = state.with_appended_vacuum(1);
    let coupler = element_unitary(&ElementKind::LossChannel {
        transmission: model.efficiency,
    })?;
    Ok(apply_to_modes(&extended, &coupler, &[mode, env])?)
}

/// Pauli applied to one dual-rail qubit after a heralding measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PauliOp {
    I,
    X,
    Z,
    /// Z first, then X.
    XZ,
}

impl PauliOp {
    pub const ALL: [PauliOp; 4] = [PauliOp::I, PauliOp::X, PauliOp::Z, PauliOp::XZ];
}

impl std::fmt::Display for PauliOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            PauliOp::I => "I",
            PauliOp::X => "X",
            PauliOp::Z => "Z",
            PauliOp::XZ => "XZ",
        };
        write!(f, "{name}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliCorrection {
    pub slot: QubitSlot,
    pub op: PauliOp,
}

/// Applies Pauli corrections to qubit slots. X swaps the rail occupations,
/// Z flips the sign of terms with the photon on the v rail.
pub fn apply_feedforward(
    state: &FockState,
    corrections: &[PauliCorrection],
) -> Result<FockState, MeasureError> {
    let mut working = state.clone();
    for correction in corrections {
        for (occ, _) in working.terms() {
            let found =
                u32::from(occ.count(correction.slot.h)) + u32::from(occ.count(correction.slot.v));
            if found != 1 {
                return Err(MeasureError::SlotOccupancy { found });
            }
        }
        working = apply_pauli_paired(
            &working,
            &[(correction.slot.h, correction.slot.v)],
            correction.op,
        );
    }
    Ok(working)
}

/// Pauli acting on a qubit spread over several (h, v) rail pairs at once:
/// a qubit split across temporal layers passes all its layers here. The rail
/// swap and the v-rail phase are defined for any occupation, so branches
/// with stray photon counts pass through rather than erroring.
pub(crate) fn apply_pauli_paired(
    state: &FockState,
    pairs: &[(usize, usize)],
    op: PauliOp,
) -> FockState {
    if op == PauliOp::I {
        return state.clone();
    }
    let flip = matches!(op, PauliOp::X | PauliOp::XZ);
    let phase = matches!(op, PauliOp::Z | PauliOp::XZ);
    let mut amps = BTreeMap::new();
    for (occ, amp) in state.terms() {
        let mut value = *amp;
        if phase {
            let v_total: u32 = pairs.iter().map(|&(_, v)| u32::from(occ.count(v))).sum();
            if v_total % 2 == 1 {
                value = -value;
            }
        }
        let occ = if flip {
            let mut counts = occ.counts().to_vec();
            for &(h, v) in pairs {
                counts.swap(h, v);
            }
            OccupationVector::new(counts)
        } else {
            occ.clone()
        };
        amps.insert(occ, value);
    }
    FockState::from_parts(state.mode_count(), state.photon_cap(), amps)
}

/// Probabilities of the two analyzer outputs for one qubit slot, measured
/// in the basis rotated by `basis_angle` from (h, v).
pub fn measure_logical(
    state: &FockState,
    slot: QubitSlot,
    basis_angle: f64,
) -> Result<[f64; 2], MeasureError> {
    for (occ, _) in state.terms() {
        let found = u32::from(occ.count(slot.h)) + u32::from(occ.count(slot.v));
        if found != 1 {
            return Err(MeasureError::SlotOccupancy { found });
        }
    }
    let rotated = rotate_to_analyzer(state, slot, basis_angle)?;
    let mut probs = [0.0; 2];
    for (occ, amp) in rotated.terms() {
        if occ.count(slot.h) == 1 {
            probs[0] += amp.norm_sqr();
        } else {
            probs[1] += amp.norm_sqr();
        }
    }
    Ok(probs)
}

/// Joint logical readout of several slots in the (h, v) basis.
///
/// Returns the probability of each bit pattern together with the weight on
/// terms that are not a valid logical state of the slots (wrong photon
/// count in some slot). Modes outside the slots are marginalized.
pub fn logical_readout(
    state: &FockState,
    slots: &[QubitSlot],
) -> (BTreeMap<Vec<u8>, f64>, f64) {
    let mut distribution: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
    let mut invalid = 0.0;
    for (occ, amp) in state.terms() {
        let mut bits = Vec::with_capacity(slots.len());
        let mut valid = true;
        for slot in slots {
            match (occ.count(slot.h), occ.count(slot.v)) {
                (1, 0) => bits.push(0u8),
                (0, 1) => bits.push(1u8),
                _ => {
                    valid = false;
                    break;
                }
            }
        }
        if valid {
            *distribution.entry(bits).or_insert(0.0) += amp.norm_sqr();
        } else {
            invalid += amp.norm_sqr();
        }
    }
    (distribution, invalid)
}

/// Overlap |⟨target|state⟩|² between the logical content of `slots` and a
/// target logical state, traced over every mode outside the slots.
///
/// Terms are grouped by their non-slot occupation; within each group the
/// logical amplitudes are projected onto the target. Terms that are not a
/// valid logical state contribute zero.
pub fn logical_fidelity(
    state: &FockState,
    slots: &[QubitSlot],
    target: &BTreeMap<Vec<u8>, Complex64>,
) -> f64 {
    let slot_modes: Vec<usize> = slots.iter().flat_map(|s| s.modes()).collect();
    let env_modes: Vec<usize> = (0..state.mode_count())
        .filter(|m| !slot_modes.contains(m))
        .collect();
    let mut overlaps: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
    for (occ, amp) in state.terms() {
        let mut bits = Vec::with_capacity(slots.len());
        let mut valid = true;
        for slot in slots {
            match (occ.count(slot.h), occ.count(slot.v)) {
                (1, 0) => bits.push(0u8),
                (0, 1) => bits.push(1u8),
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
        let env: Vec<u8> = env_modes.iter().map(|&m| occ.count(m)).collect();
        *overlaps
            .entry(env)
            .or_insert_with(|| Complex64::new(0.0, 0.0)) += coeff.conj() * amp;
    }
    overlaps.values().map(|o| o.norm_sqr()).sum()
}

/// Splits a state by the total photon count in each mode group.
///
/// The groups must not overlap. Every term lands in exactly one signature,
/// so the returned probabilities sum to the squared norm of the input.
/// Conditional states keep the full mode list and are renormalized.
pub fn partition_by_counts(
    state: &FockState,
    groups: &[Vec<usize>],
) -> Result<Vec<(Vec<u8>, f64, FockState)>, MeasureError> {
    let mut seen = Vec::new();
    for group in groups {
        for &mode in group {
            if mode >= state.mode_count() {
                return Err(MeasureError::Fock(FockError::ModeOutOfRange {
                    index: mode,
                    mode_count: state.mode_count(),
                }));
            }
            if seen.contains(&mode) {
                return Err(MeasureError::Optics(OpticsError::DuplicatePlacement(mode)));
            }
            seen.push(mode);
        }
    }
    let mut buckets: BTreeMap<Vec<u8>, BTreeMap<OccupationVector, Complex64>> = BTreeMap::new();
    for (occ, amp) in state.terms() {
        let signature: Vec<u8> = groups
            .iter()
            .map(|group| group.iter().map(|&m| occ.count(m)).sum::<u8>())
            .collect();
        buckets
            .entry(signature)
            .or_default()
            .insert(occ.clone(), *amp);
    }
    let mut result = Vec::with_capacity(buckets.len());
    for (signature, amps) in buckets {
        let probability: f64 = amps.values().map(|a| a.norm_sqr()).sum();
        let mut conditional =
            FockState::from_parts(state.mode_count(), state.photon_cap(), amps);
        conditional.normalize()?;
        result.push((signature, probability, conditional));
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{encode_qubit, make_bell_ancilla};
    use std::f64::consts::FRAC_PI_4;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn occ(counts: &[u8]) -> OccupationVector {
        OccupationVector::from_counts(counts)
    }

    #[test]
    fn projecting_vacuum_on_the_second_mode_halves_a_split_photon() {
        let state = FockState::superpose(&[
            (occ(&[1, 0]), c(1.0, 0.0)),
            (occ(&[0, 1]), c(1.0, 0.0)),
        ])
        .unwrap();
        let pattern =
            DetectionPattern::counting(vec![(1, CountRequirement::Exactly(0))]);
        let (conditional, probability) = project_pattern(&state, &pattern).unwrap();
        assert!((probability - 0.5).abs() < 1e-12);
        let conditional = conditional.unwrap();
        assert_eq!(conditional.mode_count(), 1);
        assert!((conditional.amplitude(&occ(&[1])).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn impossible_pattern_reports_zero_probability() {
        let state = FockState::basis_state(&[2, 0]).unwrap();
        let pattern = DetectionPattern::counting(vec![
            (0, CountRequirement::Exactly(1)),
            (1, CountRequirement::Exactly(1)),
        ]);
        let (conditional, probability) = project_pattern(&state, &pattern).unwrap();
        assert!(conditional.is_none());
        assert_eq!(probability, 0.0);
    }

    #[test]
    fn bell_state_conditions_on_the_partner_outcome() {
        let s1 = QubitSlot::new(0, 1).unwrap();
        let s2 = QubitSlot::new(2, 3).unwrap();
        let bell = make_bell_ancilla(s1, s2, 4).unwrap();
        let pattern = DetectionPattern::counting(vec![
            (0, CountRequirement::Exactly(1)),
            (1, CountRequirement::Exactly(0)),
        ]);
        let (conditional, probability) = project_pattern(&bell, &pattern).unwrap();
        assert!((probability - 0.5).abs() < 1e-12);
        let conditional = conditional.unwrap();
        // Remaining modes are the partner slot only.
        assert_eq!(conditional.mode_count(), 2);
        assert!((conditional.amplitude(&occ(&[1, 0])).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lossy_threshold_detector_clicks_with_the_transmission() {
        let model = DetectorModel::new(0.6, false).unwrap();
        let state = FockState::basis_state(&[1]).unwrap();
        let lossy = apply_detector_loss(&state, 0, &model).unwrap();
        let pattern = DetectionPattern::counting(vec![(0, CountRequirement::Click)]);
        let (_, probability) = project_pattern(&lossy, &pattern).unwrap();
        assert!((probability - 0.6).abs() < 1e-12);
    }

    #[test]
    fn two_photons_click_unless_both_are_lost() {
        let model = DetectorModel::new(0.6, false).unwrap();
        let state = FockState::basis_state(&[2]).unwrap();
        let lossy = apply_detector_loss(&state, 0, &model).unwrap();
        let pattern = DetectionPattern::counting(vec![(0, CountRequirement::Click)]);
        let (_, probability) = project_pattern(&lossy, &pattern).unwrap();
        assert!((probability - 0.84).abs() < 1e-12, "1 - 0.4^2 = 0.84");
    }

    #[test]
    fn perfect_detector_adds_no_environment_mode() {
        let state = FockState::basis_state(&[1]).unwrap();
        let lossy = apply_detector_loss(&state, 0, &DetectorModel::ideal()).unwrap();
        assert_eq!(lossy.mode_count(), 1);
    }

    #[test]
    fn x_correction_swaps_the_rails() {
        let slot = QubitSlot::new(0, 1).unwrap();
        let state = encode_qubit(c(0.6, 0.0), c(0.8, 0.0), slot, 2).unwrap();
        let flipped =
            apply_feedforward(&state, &[PauliCorrection { slot, op: PauliOp::X }]).unwrap();
        assert!((flipped.amplitude(&occ(&[1, 0])) - c(0.8, 0.0)).norm() < 1e-12);
        assert!((flipped.amplitude(&occ(&[0, 1])) - c(0.6, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn z_correction_negates_the_v_rail() {
        let slot = QubitSlot::new(0, 1).unwrap();
        let state = encode_qubit(c(0.6, 0.0), c(0.8, 0.0), slot, 2).unwrap();
        let signed =
            apply_feedforward(&state, &[PauliCorrection { slot, op: PauliOp::Z }]).unwrap();
        assert!((signed.amplitude(&occ(&[0, 1])) - c(-0.8, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn double_x_is_the_identity() {
        let slot = QubitSlot::new(0, 1).unwrap();
        let state = encode_qubit(c(0.6, 0.0), c(0.0, 0.8), slot, 2).unwrap();
        let twice = apply_feedforward(
            &apply_feedforward(&state, &[PauliCorrection { slot, op: PauliOp::X }]).unwrap(),
            &[PauliCorrection { slot, op: PauliOp::X }],
        )
        .unwrap();
        assert!(twice.max_amplitude_difference(&state) < 1e-12);
    }

    #[test]
    fn xz_applies_z_before_x() {
        let slot = QubitSlot::new(0, 1).unwrap();
        let state = encode_qubit(c(0.6, 0.0), c(0.8, 0.0), slot, 2).unwrap();
        let corrected =
            apply_feedforward(&state, &[PauliCorrection { slot, op: PauliOp::XZ }]).unwrap();
        // Z gives (0.6, -0.8), X then swaps to (-0.8, 0.6).
        assert!((corrected.amplitude(&occ(&[1, 0])) - c(-0.8, 0.0)).norm() < 1e-12);
        assert!((corrected.amplitude(&occ(&[0, 1])) - c(0.6, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn feedforward_preserves_the_norm() {
        let slot = QubitSlot::new(0, 1).unwrap();
        let state = encode_qubit(c(0.5, 0.5), c(0.5, -0.5), slot, 2).unwrap();
        for op in PauliOp::ALL {
            let out = apply_feedforward(&state, &[PauliCorrection { slot, op }]).unwrap();
            assert!(out.is_normalized(), "{op} must preserve the norm");
        }
    }

    #[test]
    fn feedforward_rejects_empty_slots() {
        let slot = QubitSlot::new(0, 1).unwrap();
        let state = FockState::basis_state(&[0, 0]).unwrap();
        let err =
            apply_feedforward(&state, &[PauliCorrection { slot, op: PauliOp::X }]).unwrap_err();
        assert_eq!(err, MeasureError::SlotOccupancy { found: 0 });
    }

    #[test]
    fn logical_zero_reads_zero_in_the_hv_basis() {
        let slot = QubitSlot::new(0, 1).unwrap();
        let state = encode_qubit(c(1.0, 0.0), c(0.0, 0.0), slot, 2).unwrap();
        let probs = measure_logical(&state, slot, 0.0).unwrap();
        assert!((probs[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn logical_zero_is_balanced_in_the_diagonal_basis() {
        let slot = QubitSlot::new(0, 1).unwrap();
        let state = encode_qubit(c(1.0, 0.0), c(0.0, 0.0), slot, 2).unwrap();
        let probs = measure_logical(&state, slot, FRAC_PI_4).unwrap();
        assert!((probs[0] - 0.5).abs() < 1e-12);
        assert!((probs[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn plus_state_reads_deterministically_in_the_diagonal_basis() {
        let slot = QubitSlot::new(0, 1).unwrap();
        let state = encode_qubit(c(1.0, 0.0), c(1.0, 0.0), slot, 2).unwrap();
        let probs = measure_logical(&state, slot, FRAC_PI_4).unwrap();
        assert!((probs[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn measure_logical_rejects_invalid_occupancy() {
        let slot = QubitSlot::new(0, 1).unwrap();
        let state = FockState::basis_state(&[1, 1]).unwrap();
        let err = measure_logical(&state, slot, 0.0).unwrap_err();
        assert_eq!(err, MeasureError::SlotOccupancy { found: 2 });
    }

    #[test]
    fn bell_pair_always_reads_equal_values() {
        let s1 = QubitSlot::new(0, 1).unwrap();
        let s2 = QubitSlot::new(2, 3).unwrap();
        let bell = make_bell_ancilla(s1, s2, 4).unwrap();
        let (distribution, invalid) = logical_readout(&bell, &[s1, s2]);
        assert_eq!(invalid, 0.0);
        assert!((distribution[&vec![0, 0]] - 0.5).abs() < 1e-12);
        assert!((distribution[&vec![1, 1]] - 0.5).abs() < 1e-12);
        assert!(!distribution.contains_key(&vec![0, 1]));
    }

    #[test]
    fn logical_fidelity_matches_a_direct_overlap() {
        let s1 = QubitSlot::new(0, 1).unwrap();
        let s2 = QubitSlot::new(2, 3).unwrap();
        let bell = make_bell_ancilla(s1, s2, 4).unwrap();
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut target = BTreeMap::new();
        target.insert(vec![0, 0], c(inv_sqrt2, 0.0));
        target.insert(vec![1, 1], c(inv_sqrt2, 0.0));
        assert!((logical_fidelity(&bell, &[s1, s2], &target) - 1.0).abs() < 1e-12);

        let mut orthogonal = BTreeMap::new();
        orthogonal.insert(vec![0, 0], c(inv_sqrt2, 0.0));
        orthogonal.insert(vec![1, 1], c(-inv_sqrt2, 0.0));
        assert!(logical_fidelity(&bell, &[s1, s2], &orthogonal) < 1e-12);
    }

    #[test]
    fn partition_covers_the_whole_state() {
        let state = FockState::superpose(&[
            (occ(&[1, 1, 0]), c(1.0, 0.0)),
            (occ(&[0, 1, 1]), c(1.0, 0.0)),
            (occ(&[2, 0, 0]), c(1.0, 0.0)),
        ])
        .unwrap();
        let parts = partition_by_counts(&state, &[vec![0], vec![1, 2]]).unwrap();
        let total: f64 = parts.iter().map(|(_, p, _)| p).sum();
        assert!((total - 1.0).abs() < 1e-10, "patterns are exhaustive");
        for (_, probability, conditional) in &parts {
            assert!(*probability > 0.0);
            assert!(conditional.is_normalized());
        }
    }

    #[test]
    fn projection_is_idempotent() {
        let state = FockState::superpose(&[
            (occ(&[1, 0]), c(1.0, 0.0)),
            (occ(&[0, 1]), c(1.0, 0.0)),
        ])
        .unwrap();
        let pattern = DetectionPattern::counting(vec![(0, CountRequirement::Click)]);
        let (first, p1) = project_pattern(&state, &pattern).unwrap();
        let first = first.unwrap();
        let (second, p2) = project_pattern(&first, &pattern).unwrap();
        assert!((p1 - 0.5).abs() < 1e-12);
        assert!((p2 - 1.0).abs() < 1e-12);
        assert!(second.unwrap().max_amplitude_difference(&first) < 1e-12);
    }
}
