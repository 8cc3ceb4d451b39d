//! Sparse few-photon state vectors.
//!
//! A [`FockState`] maps occupation vectors (photon counts per optical mode) to
//! complex amplitudes. Only basis terms with nonzero amplitude are stored, so
//! states over many modes stay cheap as long as few terms are populated.
//!
//! Conventions used throughout the crate:
//! - A dual-rail qubit occupies a [`QubitSlot`], a pair of modes (h, v) holding
//!   exactly one photon. Logical 0 is the photon in `h`, logical 1 in `v`.
//! - Every state carries a `photon_cap`, the largest total photon number it
//!   admits. Operations that would exceed the cap fail instead of truncating.
//! - Amplitudes with magnitude below [`PRUNE_THRESHOLD`] are dropped after
//!   every operation, so exact cancellations leave no residue.

use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

/// Largest total photon number a state admits unless overridden.
pub const DEFAULT_PHOTON_CAP: u32 = 8;

/// Amplitudes at or below this magnitude are removed after each operation.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// States are considered normalized when the norm is 1 within this tolerance.
pub const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum FockError {
    #[error("basis term holds {total} photons, exceeding the cap of {cap}")]
    PhotonCapExceeded { total: u32, cap: u32 },
    #[error("occupation vector has {found} modes where {expected} were expected")]
    ModeCountMismatch { expected: usize, found: usize },
    #[error("superposition norm is zero after combining terms")]
    ZeroNorm,
    #[error("qubit amplitudes are both zero")]
    DegenerateQubit,
    #[error("mode index {index} is out of range for a {mode_count}-mode state")]
    ModeOutOfRange { index: usize, mode_count: usize },
    #[error("qubit slot would use mode {0} for both rails")]
    DegenerateSlot(usize),
    #[error("qubit slots overlap on mode {0}")]
    OverlappingSlots(usize),
    #[error("mode {0} has no definite photon count; it cannot be discarded")]
    IndefiniteMode(usize),
}

/// Photon counts per mode for one basis term.
///
/// Ordering is lexicographic, which gives every state a canonical term order
/// and makes all iteration in the crate deterministic.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OccupationVector(Vec<u8>);

impl OccupationVector {
    pub fn new(counts: Vec<u8>) -> Self {
        OccupationVector(counts)
    }

    pub fn from_counts(counts: &[u8]) -> Self {
        OccupationVector(counts.to_vec())
    }

    pub fn mode_count(&self) -> usize {
        self.0.len()
    }

    pub fn counts(&self) -> &[u8] {
        &self.0
    }

    pub fn count(&self, mode: usize) -> u8 {
        self.0[mode]
    }

    /// Total photon number summed over all modes.
    pub fn total(&self) -> u32 {
        self.0.iter().map(|&n| u32::from(n)).sum()
    }

    /// Copy with `count` written at `mode`.
    pub fn with_count(&self, mode: usize, count: u8) -> Self {
        let mut counts = self.0.clone();
        counts[mode] = count;
        OccupationVector(counts)
    }
}

impl std::fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "|")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ">")
    }
}

/// Mode pair carrying one dual-rail qubit: photon in `h` is logical 0,
/// photon in `v` is logical 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QubitSlot {
    pub h: usize,
    pub v: usize,
}

impl QubitSlot {
    pub fn new(h: usize, v: usize) -> Result<Self, FockError> {
        if h == v {
            return Err(FockError::DegenerateSlot(h));
        }
        Ok(QubitSlot { h, v })
    }

    pub fn modes(&self) -> [usize; 2] {
        [self.h, self.v]
    }

    fn check_range(&self, mode_count: usize) -> Result<(), FockError> {
        for index in self.modes() {
            if index >= mode_count {
                return Err(FockError::ModeOutOfRange { index, mode_count });
            }
        }
        Ok(())
    }
}

/// Pure state of a fixed set of optical modes, stored sparsely.
///
/// Value semantics: every operation returns a new state and leaves its
/// inputs untouched.
#[derive(Clone, Debug)]
pub struct FockState {
    mode_count: usize,
    photon_cap: u32,
    amps: BTreeMap<OccupationVector, Complex64>,
}

impl FockState {
    /// The zero-photon state over `mode_count` modes.
    pub fn vacuum(mode_count: usize) -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(
            OccupationVector(vec![0; mode_count]),
            Complex64::new(1.0, 0.0),
        );
        FockState {
            mode_count,
            photon_cap: DEFAULT_PHOTON_CAP,
            amps,
        }
    }

    /// Single basis term with the given counts and the default photon cap.
    pub fn basis_state(counts: &[u8]) -> Result<Self, FockError> {
        Self::basis_state_with_cap(counts, DEFAULT_PHOTON_CAP)
    }

    pub fn basis_state_with_cap(counts: &[u8], photon_cap: u32) -> Result<Self, FockError> {
        let occ = OccupationVector::from_counts(counts);
        let total = occ.total();
        if total > photon_cap {
            return Err(FockError::PhotonCapExceeded {
                total,
                cap: photon_cap,
            });
        }
        let mut amps = BTreeMap::new();
        let mode_count = occ.mode_count();
        amps.insert(occ, Complex64::new(1.0, 0.0));
        Ok(FockState {
            mode_count,
            photon_cap,
            amps,
        })
    }

    /// Normalized superposition of the given terms. Duplicate occupations are
    /// summed before normalizing, so exact cancellations are detected.
    pub fn superpose(terms: &[(OccupationVector, Complex64)]) -> Result<Self, FockError> {
        let Some((first, _)) = terms.first() else {
            return Err(FockError::ZeroNorm);
        };
        let mode_count = first.mode_count();
        let mut amps: BTreeMap<OccupationVector, Complex64> = BTreeMap::new();
        for (occ, amp) in terms {
            if occ.mode_count() != mode_count {
                return Err(FockError::ModeCountMismatch {
                    expected: mode_count,
                    found: occ.mode_count(),
                });
            }
            let total = occ.total();
            if total > DEFAULT_PHOTON_CAP {
                return Err(FockError::PhotonCapExceeded {
                    total,
                    cap: DEFAULT_PHOTON_CAP,
                });
            }
            *amps
                .entry(occ.clone())
                .or_insert_with(|| Complex64::new(0.0, 0.0)) += amp;
        }
        let mut state = FockState {
            mode_count,
            photon_cap: DEFAULT_PHOTON_CAP,
            amps,
        };
        state.prune();
        state.normalize()?;
        Ok(state)
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn photon_cap(&self) -> u32 {
        self.photon_cap
    }

    /// Replaces the cap. Fails if a stored term already exceeds the new cap.
    pub fn with_photon_cap(mut self, photon_cap: u32) -> Result<Self, FockError> {
        for occ in self.amps.keys() {
            let total = occ.total();
            if total > photon_cap {
                return Err(FockError::PhotonCapExceeded {
                    total,
                    cap: photon_cap,
                });
            }
        }
        self.photon_cap = photon_cap;
        Ok(self)
    }

    pub fn term_count(&self) -> usize {
        self.amps.len()
    }

    /// Amplitude of one basis term; zero if the term is not stored.
    pub fn amplitude(&self, occ: &OccupationVector) -> Complex64 {
        self.amps
            .get(occ)
            .copied()
            .unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }

    /// Terms in canonical (lexicographic) order.
    pub fn terms(&self) -> impl Iterator<Item = (&OccupationVector, &Complex64)> {
        self.amps.iter()
    }

    pub fn norm_squared(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORM_TOLERANCE
    }

    /// ⟨self|other⟩ with the left argument conjugated.
    pub fn inner_product(&self, other: &FockState) -> Result<Complex64, FockError> {
        if self.mode_count != other.mode_count {
            return Err(FockError::ModeCountMismatch {
                expected: self.mode_count,
                found: other.mode_count,
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (occ, amp) in &self.amps {
            if let Some(b) = other.amps.get(occ) {
                acc += amp.conj() * b;
            }
        }
        Ok(acc)
    }

    /// Product state over the concatenated mode list (self's modes first).
    /// The result keeps the larger of the two caps.
    pub fn tensor(&self, other: &FockState) -> Result<Self, FockError> {
        let photon_cap = self.photon_cap.max(other.photon_cap);
        let mode_count = self.mode_count + other.mode_count;
        let mut amps = BTreeMap::new();
        for (occ_a, amp_a) in &self.amps {
            for (occ_b, amp_b) in &other.amps {
                let total = occ_a.total() + occ_b.total();
                if total > photon_cap {
                    return Err(FockError::PhotonCapExceeded {
                        total,
                        cap: photon_cap,
                    });
                }
                let mut counts = Vec::with_capacity(mode_count);
                counts.extend_from_slice(occ_a.counts());
                counts.extend_from_slice(occ_b.counts());
                amps.insert(OccupationVector(counts), amp_a * amp_b);
            }
        }
        let mut state = FockState {
            mode_count,
            photon_cap,
            amps,
        };
        state.prune();
        Ok(state)
    }

    /// Appends `extra` vacuum modes at the end of the mode list.
    pub fn with_appended_vacuum(&self, extra: usize) -> Self {
        let mode_count = self.mode_count + extra;
        let amps = self
            .amps
            .iter()
            .map(|(occ, amp)| {
                let mut counts = Vec::with_capacity(mode_count);
                counts.extend_from_slice(occ.counts());
                counts.resize(mode_count, 0);
                (OccupationVector(counts), *amp)
            })
            .collect();
        FockState {
            mode_count,
            photon_cap: self.photon_cap,
            amps,
        }
    }

    /// Discards modes whose photon count is the same in every stored term.
    /// Discarding a mode that still varies across terms would silently mix
    /// the state, so that case is an error.
    pub fn drop_definite_modes(&self, modes: &[usize]) -> Result<Self, FockError> {
        for &index in modes {
            if index >= self.mode_count {
                return Err(FockError::ModeOutOfRange {
                    index,
                    mode_count: self.mode_count,
                });
            }
            let mut counts = self.amps.keys().map(|occ| occ.count(index));
            let first = counts.next();
            if let Some(first) = first {
                if counts.any(|c| c != first) {
                    return Err(FockError::IndefiniteMode(index));
                }
            }
        }
        let keep: Vec<usize> = (0..self.mode_count)
            .filter(|i| !modes.contains(i))
            .collect();
        let amps = self
            .amps
            .iter()
            .map(|(occ, amp)| {
                let counts: Vec<u8> = keep.iter().map(|&i| occ.count(i)).collect();
                (OccupationVector(counts), *amp)
            })
            .collect();
        Ok(FockState {
            mode_count: keep.len(),
            photon_cap: self.photon_cap,
            amps,
        })
    }

    /// Removes terms with negligible amplitude. Called by every operation
    /// that produces a state, so callers rarely need it directly.
    pub fn prune(&mut self) {
        self.amps.retain(|_, amp| amp.norm() > PRUNE_THRESHOLD);
    }

    /// Scales the state back to unit norm.
    pub fn normalize(&mut self) -> Result<(), FockError> {
        let norm = self.norm();
        if norm <= PRUNE_THRESHOLD {
            return Err(FockError::ZeroNorm);
        }
        let inv = 1.0 / norm;
        for amp in self.amps.values_mut() {
            *amp *= inv;
        }
        Ok(())
    }

    /// Moves every mode to a new index. `map[old] = new`; the map must be
    /// injective and cover all current modes. Unmapped target modes are empty.
    pub(crate) fn remap_modes(&self, map: &[usize], new_mode_count: usize) -> Self {
        debug_assert_eq!(map.len(), self.mode_count);
        debug_assert!(map.iter().all(|&m| m < new_mode_count));
        let mut amps = BTreeMap::new();
        for (occ, amp) in &self.amps {
            let mut counts = vec![0u8; new_mode_count];
            for (old, &count) in occ.counts().iter().enumerate() {
                counts[map[old]] += count;
            }
            amps.insert(OccupationVector::new(counts), *amp);
        }
        FockState::from_parts(new_mode_count, self.photon_cap, amps)
    }

    pub(crate) fn from_parts(
        mode_count: usize,
        photon_cap: u32,
        amps: BTreeMap<OccupationVector, Complex64>,
    ) -> Self {
        let mut state = FockState {
            mode_count,
            photon_cap,
            amps,
        };
        state.prune();
        state
    }

    /// Largest |amplitude difference| over the union of both term sets.
    pub fn max_amplitude_difference(&self, other: &FockState) -> f64 {
        let mut max = 0.0_f64;
        for (occ, amp) in &self.amps {
            max = max.max((amp - other.amplitude(occ)).norm());
        }
        for (occ, amp) in &other.amps {
            max = max.max((amp - self.amplitude(occ)).norm());
        }
        max
    }
}

/// State of `mode_count` modes with one photon in `slot`, in the
/// superposition `alpha`|photon in h⟩ + `beta`|photon in v⟩, normalized.
pub fn encode_qubit(
    alpha: Complex64,
    beta: Complex64,
    slot: QubitSlot,
    mode_count: usize,
) -> Result<FockState, FockError> {
    slot.check_range(mode_count)?;
    if alpha.norm_sqr() + beta.norm_sqr() == 0.0 {
        return Err(FockError::DegenerateQubit);
    }
    let mut terms = Vec::new();
    let vacuum = vec![0u8; mode_count];
    if alpha.norm() > 0.0 {
        let mut counts = vacuum.clone();
        counts[slot.h] = 1;
        terms.push((OccupationVector(counts), alpha));
    }
    if beta.norm() > 0.0 {
        let mut counts = vacuum;
        counts[slot.v] = 1;
        terms.push((OccupationVector(counts), beta));
    }
    FockState::superpose(&terms)
}

/// Two photons sharing the maximally correlated polarization state
/// (|0⟩|0⟩ + |1⟩|1⟩)/√2 across the two slots.
pub fn make_bell_ancilla(
    slot1: QubitSlot,
    slot2: QubitSlot,
    mode_count: usize,
) -> Result<FockState, FockError> {
    slot1.check_range(mode_count)?;
    slot2.check_range(mode_count)?;
    for m in slot1.modes() {
        if slot2.modes().contains(&m) {
            return Err(FockError::OverlappingSlots(m));
        }
    }
    let vacuum = vec![0u8; mode_count];
    let mut hh = vacuum.clone();
    hh[slot1.h] = 1;
    hh[slot2.h] = 1;
    let mut vv = vacuum;
    vv[slot1.v] = 1;
    vv[slot2.v] = 1;
    let one = Complex64::new(1.0, 0.0);
    FockState::superpose(&[
        (OccupationVector(hh), one),
        (OccupationVector(vv), one),
    ])
}
