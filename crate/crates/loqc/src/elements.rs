//! Linear-optical elements and multi-photon evolution.
//!
//! An element is a small unitary on a handful of modes. Multi-photon
//! transition amplitudes through any mode unitary reduce to matrix
//! permanents: for input occupation n and output occupation m,
//!
//! ```text
//! amp(m ← n) = perm(U[m|n]) / sqrt(prod_i m_i! * prod_j n_j!)
//! ```
//!
//! where U[m|n] repeats row i of U m_i times and column j n_j times.
//! [`evolve`] applies this formula; [`permanent`] computes permanents with
//! Ryser's inclusion-exclusion formula using Gray-code updates, which is
//! affordable for the matrix sizes a capped photon number can produce.

use crate::fock::{FockError, FockState, OccupationVector, QubitSlot};
use ndarray::Array2;
use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

/// Max-abs deviation from the identity allowed for U·U†.
pub const UNITARITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum OpticsError {
    #[error("matrix is {rows}x{cols}; permanents are defined for square matrices")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix deviates from unitarity by {deviation:.3e}")]
    NotUnitary { deviation: f64 },
    #[error("{name} must lie in [0, 1], got {value}")]
    ParameterOutOfRange { name: &'static str, value: f64 },
    #[error("placement mode {index} is out of range for {total} modes")]
    PlacementOutOfRange { index: usize, total: usize },
    #[error("placement lists mode {0} twice")]
    DuplicatePlacement(usize),
    #[error("placement names {found} modes for a {expected}-mode unitary")]
    PlacementSize { expected: usize, found: usize },
    #[error("unitary acts on {unitary} modes but the state has {state}")]
    DimensionMismatch { unitary: usize, state: usize },
    #[error("a basis term holds {found} photons in the slot; exactly one is required")]
    SlotOccupancy { found: u32 },
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// Unitary acting on a fixed list of modes, validated on construction.
#[derive(Clone, Debug)]
pub struct ModeUnitary {
    matrix: Array2<Complex64>,
}

impl ModeUnitary {
    pub fn new(matrix: Array2<Complex64>) -> Result<Self, OpticsError> {
        let (rows, cols) = matrix.dim();
        if rows != cols {
            return Err(OpticsError::NonSquare { rows, cols });
        }
        let deviation = unitarity_deviation(&matrix);
        if deviation > UNITARITY_TOLERANCE {
            return Err(OpticsError::NotUnitary { deviation });
        }
        Ok(ModeUnitary { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        ModeUnitary {
            matrix: Array2::eye(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    /// Matrix product `other · self`: the unitary that applies `self`
    /// first and `other` second.
    pub fn then(&self, other: &ModeUnitary) -> Result<Self, OpticsError> {
        if self.dim() != other.dim() {
            return Err(OpticsError::DimensionMismatch {
                unitary: other.dim(),
                state: self.dim(),
            });
        }
        ModeUnitary::new(other.matrix.dot(&self.matrix))
    }
}

/// Max-abs entry of U·U† − I.
pub fn unitarity_deviation(matrix: &Array2<Complex64>) -> f64 {
    let n = matrix.nrows();
    let mut max = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += matrix[(i, k)] * matrix[(j, k)].conj();
            }
            let target = if i == j { 1.0 } else { 0.0 };
            max = max.max((acc - Complex64::new(target, 0.0)).norm());
        }
    }
    max
}

/// The optical elements the simulator knows how to build.
///
/// Mode ordering conventions:
/// - `BeamSplitter` couples two modes with the real symmetric matrix
///   [[t, r], [r, -t]] where t = sqrt(1 - reflectivity), r = sqrt(reflectivity).
/// - `PolarizationRotator` rotates an (h, v) pair by `angle`.
/// - `PolarizingBeamSplitter` acts on two (h, v) pairs ordered
///   (a.h, a.v, b.h, b.v): h rails pass straight through, v rails swap
///   spatial ports, with no extra phase.
/// - `LossChannel` couples the target mode to a fresh vacuum mode with
///   transmission `eta`; the caller supplies the environment mode, which
///   keeps the evolution unitary and the norm exact.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ElementKind {
    BeamSplitter { reflectivity: f64 },
    PhaseShifter { phase: f64 },
    PolarizationRotator { angle: f64 },
    PolarizingBeamSplitter,
    LossChannel { transmission: f64 },
}

impl ElementKind {
    pub fn mode_count(&self) -> usize {
        match self {
            ElementKind::PhaseShifter { .. } => 1,
            ElementKind::BeamSplitter { .. }
            | ElementKind::PolarizationRotator { .. }
            | ElementKind::LossChannel { .. } => 2,
            ElementKind::PolarizingBeamSplitter => 4,
        }
    }
}

/// An element plus the state modes it acts on, in element order.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementSpec {
    pub kind: ElementKind,
    pub modes: Vec<usize>,
}

impl ElementSpec {
    pub fn new(kind: ElementKind, modes: Vec<usize>) -> Self {
        ElementSpec { kind, modes }
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// The unitary for one element, in the element's own mode ordering.
pub fn element_unitary(kind: &ElementKind) -> Result<ModeUnitary, OpticsError> {
    let matrix = match *kind {
        ElementKind::BeamSplitter { reflectivity } => {
            check_unit_interval("reflectivity", reflectivity)?;
            let t = (1.0 - reflectivity).sqrt();
            let r = reflectivity.sqrt();
            Array2::from_shape_vec((2, 2), vec![real(t), real(r), real(r), real(-t)])
                .expect("shape matches data")
        }
        ElementKind::PhaseShifter { phase } => {
            Array2::from_shape_vec((1, 1), vec![Complex64::from_polar(1.0, phase)])
                .expect("shape matches data")
        }
        ElementKind::PolarizationRotator { angle } => {
            let (s, c) = angle.sin_cos();
            Array2::from_shape_vec((2, 2), vec![real(c), real(-s), real(s), real(c)])
                .expect("shape matches data")
        }
        ElementKind::PolarizingBeamSplitter => {
            let mut m = Array2::zeros((4, 4));
            m[(0, 0)] = real(1.0); // a.h passes through
            m[(2, 2)] = real(1.0); // b.h passes through
            m[(3, 1)] = real(1.0); // a.v crosses to port b
            m[(1, 3)] = real(1.0); // b.v crosses to port a
            m
        }
        ElementKind::LossChannel { transmission } => {
            check_unit_interval("transmission", transmission)?;
            let t = transmission.sqrt();
            let r = (1.0 - transmission).sqrt();
            Array2::from_shape_vec((2, 2), vec![real(t), real(r), real(r), real(-t)])
                .expect("shape matches data")
        }
    };
    ModeUnitary::new(matrix)
}

fn check_unit_interval(name: &'static str, value: f64) -> Result<(), OpticsError> {
    if !(0.0..=1.0).contains(&value) || value.is_nan() {
        return Err(OpticsError::ParameterOutOfRange { name, value });
    }
    Ok(())
}

/// Expands `u` to `total_modes` modes: `u` on `placement`, identity elsewhere.
pub fn embed(
    u: &ModeUnitary,
    placement: &[usize],
    total_modes: usize,
) -> Result<ModeUnitary, OpticsError> {
    check_placement(placement, u.dim(), total_modes)?;
    let mut matrix = Array2::eye(total_modes);
    for (i, &row) in placement.iter().enumerate() {
        for (j, &col) in placement.iter().enumerate() {
            matrix[(row, col)] = u.matrix[(i, j)];
        }
    }
    ModeUnitary::new(matrix)
}

fn check_placement(
    placement: &[usize],
    dim: usize,
    total_modes: usize,
) -> Result<(), OpticsError> {
    if placement.len() != dim {
        return Err(OpticsError::PlacementSize {
            expected: dim,
            found: placement.len(),
        });
    }
    for (i, &index) in placement.iter().enumerate() {
        if index >= total_modes {
            return Err(OpticsError::PlacementOutOfRange {
                index,
                total: total_modes,
            });
        }
        if placement[..i].contains(&index) {
            return Err(OpticsError::DuplicatePlacement(index));
        }
    }
    Ok(())
}

/// Permanent of a square complex matrix.
///
/// Ryser's formula with Gray-code subset traversal: each step toggles one
/// column in the running row sums, so the whole sum costs O(2^n · n).
/// The 0x0 permanent is 1, matching the empty product.
pub fn permanent(matrix: &Array2<Complex64>) -> Result<Complex64, OpticsError> {
    let (rows, cols) = matrix.dim();
    if rows != cols {
        return Err(OpticsError::NonSquare { rows, cols });
    }
    let n = rows;
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut total = Complex64::new(0.0, 0.0);
    for k in 1u64..(1 << n) {
        let bit = k.trailing_zeros() as usize;
        let subset = k ^ (k >> 1);
        if subset & (1 << bit) != 0 {
            for i in 0..n {
                row_sums[i] += matrix[(i, bit)];
            }
        } else {
            for i in 0..n {
                row_sums[i] -= matrix[(i, bit)];
            }
        }
        let mut product = Complex64::new(1.0, 0.0);
        for sum in &row_sums {
            product *= sum;
        }
        if subset.count_ones() % 2 == 0 {
            total -= product;
        } else {
            total += product;
        }
    }
    if n % 2 == 0 {
        total = -total;
    }
    Ok(total)
}

const FACTORIALS: [f64; 9] = [
    1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0, 5040.0, 40320.0,
];

fn factorial(n: u8) -> f64 {
    let n = n as usize;
    if n < FACTORIALS.len() {
        FACTORIALS[n]
    } else {
        (1..=n).map(|k| k as f64).product()
    }
}

/// Applies a full-width mode unitary to a state.
///
/// Modes on which `u` is exactly the identity are spectators; only photons
/// in the remaining support redistribute, which keeps the permanent sizes
/// bounded by the photon count rather than the mode count.
pub fn evolve(state: &FockState, u: &ModeUnitary) -> Result<FockState, OpticsError> {
    if u.dim() != state.mode_count() {
        return Err(OpticsError::DimensionMismatch {
            unitary: u.dim(),
            state: state.mode_count(),
        });
    }
    let support = identity_support(u);
    let sub = submatrix(u, &support);
    apply_on_support(state, &sub, &support)
}

/// Applies a small unitary to the listed state modes; all other modes are
/// untouched. Equivalent to `evolve` with `embed(u, modes, ..)` but without
/// materializing the full matrix.
pub fn apply_to_modes(
    state: &FockState,
    u: &ModeUnitary,
    modes: &[usize],
) -> Result<FockState, OpticsError> {
    check_placement(modes, u.dim(), state.mode_count())?;
    apply_on_support(state, &u.matrix, modes)
}

/// Builds the element unitary and applies it to the listed modes.
pub fn apply_element(state: &FockState, spec: &ElementSpec) -> Result<FockState, OpticsError> {
    let u = element_unitary(&spec.kind)?;
    apply_to_modes(state, &u, &spec.modes)
}

fn identity_support(u: &ModeUnitary) -> Vec<usize> {
    let n = u.dim();
    let mut support = Vec::new();
    for i in 0..n {
        let mut trivial = true;
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            if u.matrix[(i, j)] != Complex64::new(target, 0.0)
                || u.matrix[(j, i)] != Complex64::new(target, 0.0)
            {
                trivial = false;
                break;
            }
        }
        if !trivial {
            support.push(i);
        }
    }
    support
}

fn submatrix(u: &ModeUnitary, modes: &[usize]) -> Array2<Complex64> {
    let k = modes.len();
    let mut sub = Array2::zeros((k, k));
    for (i, &row) in modes.iter().enumerate() {
        for (j, &col) in modes.iter().enumerate() {
            sub[(i, j)] = u.matrix[(row, col)];
        }
    }
    sub
}

fn apply_on_support(
    state: &FockState,
    sub: &Array2<Complex64>,
    support: &[usize],
) -> Result<FockState, OpticsError> {
    if support.is_empty() {
        return Ok(state.clone());
    }
    let mut out: BTreeMap<OccupationVector, Complex64> = BTreeMap::new();
    for (occ, amp) in state.terms() {
        let input: Vec<u8> = support.iter().map(|&m| occ.count(m)).collect();
        let photons: u32 = input.iter().map(|&n| u32::from(n)).sum();
        if photons == 0 {
            *out.entry(occ.clone())
                .or_insert_with(|| Complex64::new(0.0, 0.0)) += amp;
            continue;
        }
        let input_factor: f64 = input.iter().map(|&n| factorial(n)).product();
        for output in compositions(photons, support.len()) {
            let transition = transition_matrix(sub, &output, &input);
            let perm = permanent(&transition)?;
            if perm.norm() == 0.0 {
                continue;
            }
            let output_factor: f64 = output.iter().map(|&n| factorial(n)).product();
            let coeff = perm / (input_factor * output_factor).sqrt();
            let mut counts = occ.counts().to_vec();
            for (slot, &mode) in support.iter().enumerate() {
                counts[mode] = output[slot];
            }
            *out.entry(OccupationVector::new(counts))
                .or_insert_with(|| Complex64::new(0.0, 0.0)) += amp * coeff;
        }
    }
    Ok(FockState::from_parts(
        state.mode_count(),
        state.photon_cap(),
        out,
    ))
}

/// Transition submatrix: row i of `sub` repeated output[i] times, column j
/// repeated input[j] times.
fn transition_matrix(sub: &Array2<Complex64>, output: &[u8], input: &[u8]) -> Array2<Complex64> {
    let photons: usize = output.iter().map(|&n| n as usize).sum();
    let mut rows = Vec::with_capacity(photons);
    for (i, &m) in output.iter().enumerate() {
        for _ in 0..m {
            rows.push(i);
        }
    }
    let mut cols = Vec::with_capacity(photons);
    for (j, &n) in input.iter().enumerate() {
        for _ in 0..n {
            cols.push(j);
        }
    }
    let mut matrix = Array2::zeros((photons, photons));
    for (r, &i) in rows.iter().enumerate() {
        for (c, &j) in cols.iter().enumerate() {
            matrix[(r, c)] = sub[(i, j)];
        }
    }
    matrix
}

/// All ways to place `total` photons into `parts` modes, lexicographically.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u8>> {
    fn recurse(total: u32, parts: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if parts == 1 {
            let mut full = prefix.clone();
            full.push(total as u8);
            out.push(full);
            return;
        }
        for first in 0..=total {
            prefix.push(first as u8);
            recurse(total - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        return out;
    }
    recurse(total, parts, &mut Vec::new(), &mut out);
    out
}

/// Splits one photon's amplitude between its current temporal mode and a
/// fresh orthogonal one, modelling partial distinguishability.
///
/// The photon in `slot` keeps weight sqrt(overlap) in the original modes and
/// acquires weight sqrt(1 - overlap) in a newly appended (h, v) pair. With
/// overlap 1 the state is returned unchanged and no modes are added.
pub fn make_distinguishable(
    state: &FockState,
    slot: QubitSlot,
    overlap: f64,
) -> Result<FockState, OpticsError> {
    check_unit_interval("overlap", overlap)?;
    for index in slot.modes() {
        if index >= state.mode_count() {
            return Err(OpticsError::Fock(FockError::ModeOutOfRange {
                index,
                mode_count: state.mode_count(),
            }));
        }
    }
    for (occ, _) in state.terms() {
        let found = u32::from(occ.count(slot.h)) + u32::from(occ.count(slot.v));
        if found != 1 {
            return Err(OpticsError::SlotOccupancy { found });
        }
    }
    if overlap == 1.0 {
        return Ok(state.clone());
    }
    let base = state.mode_count();
    let extended = state.with_appended_vacuum(2);
    let splitter = element_unitary(&ElementKind::BeamSplitter {
        reflectivity: 1.0 - overlap,
    })?;
    let split_h = apply_to_modes(&extended, &splitter, &[slot.h, base])?;
    apply_to_modes(&split_h, &splitter, &[slot.v, base + 1])
}
