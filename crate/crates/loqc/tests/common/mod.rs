//! Shared oracles for the integration suites.
//!
//! The evolution oracle expands each input term as a polynomial in output
//! creation operators, photon by photon, and never touches the permanent
//! machinery under test, so agreement between the two is meaningful.

use std::collections::BTreeMap;

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;

use loqc::fock::{FockState, OccupationVector};

pub fn factorial(n: u8) -> f64 {
    (1..=u64::from(n)).map(|k| k as f64).product()
}

/// Evolves `state` through the mode map `u` by brute-force expansion.
///
/// Each photon in an input term independently picks an output mode; an
/// ordered assignment contributes the product of its matrix entries, and the
/// bosonic normalization converts collected monomials back to basis kets.
pub fn evolve_oracle(
    state: &FockState,
    u: &Array2<Complex64>,
) -> BTreeMap<OccupationVector, Complex64> {
    let modes = state.mode_count();
    let mut out: BTreeMap<OccupationVector, Complex64> = BTreeMap::new();
    for (occ, amp) in state.terms() {
        let sources: Vec<usize> = (0..modes)
            .flat_map(|j| std::iter::repeat(j).take(occ.count(j) as usize))
            .collect();
        let photon_count = sources.len();
        if photon_count == 0 {
            *out.entry(occ.clone())
                .or_insert_with(|| Complex64::new(0.0, 0.0)) += amp;
            continue;
        }
        let mut input_norm = 1.0;
        for j in 0..modes {
            input_norm *= factorial(occ.count(j));
        }
        let mut assignment = vec![0usize; photon_count];
        'assignments: loop {
            let mut product = *amp;
            for (k, &source) in sources.iter().enumerate() {
                product *= u[(assignment[k], source)];
            }
            let mut counts = vec![0u8; modes];
            for &target in &assignment {
                counts[target] += 1;
            }
            let mut output_norm = 1.0;
            for &c in &counts {
                output_norm *= factorial(c);
            }
            let key = OccupationVector::from_counts(&counts);
            *out.entry(key).or_insert_with(|| Complex64::new(0.0, 0.0)) +=
                product * (output_norm / input_norm).sqrt();
            for k in 0..photon_count {
                assignment[k] += 1;
                if assignment[k] < modes {
                    continue 'assignments;
                }
                assignment[k] = 0;
            }
            break;
        }
    }
    out
}

fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    let radius = (-2.0 * u1.ln()).sqrt();
    let angle = 2.0 * std::f64::consts::PI * u2;
    Complex64::new(radius * angle.cos(), radius * angle.sin())
}

/// Random unitary from a Gaussian matrix, orthonormalized column by column.
/// Two passes keep the unitarity deviation near machine precision.
pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> Array2<Complex64> {
    let mut m = Array2::from_shape_fn((dim, dim), |_| complex_gaussian(rng));
    for _ in 0..2 {
        for j in 0..dim {
            for k in 0..j {
                let mut proj = Complex64::new(0.0, 0.0);
                for i in 0..dim {
                    proj += m[(i, k)].conj() * m[(i, j)];
                }
                for i in 0..dim {
                    let correction = proj * m[(i, k)];
                    m[(i, j)] -= correction;
                }
            }
            let norm: f64 = (0..dim).map(|i| m[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            for i in 0..dim {
                m[(i, j)] /= norm;
            }
        }
    }
    m
}

/// Normalized superposition of a few random occupation terms.
pub fn random_state(
    rng: &mut impl Rng,
    modes: usize,
    max_photons: u8,
    term_count: usize,
) -> FockState {
    let mut terms = Vec::with_capacity(term_count);
    for _ in 0..term_count {
        let total = rng.gen_range(0..=max_photons);
        let mut counts = vec![0u8; modes];
        for _ in 0..total {
            counts[rng.gen_range(0..modes)] += 1;
        }
        terms.push((
            OccupationVector::from_counts(&counts),
            complex_gaussian(rng),
        ));
    }
    match FockState::superpose(&terms) {
        Ok(state) => state,
        // all-zero amplitudes or exact cancellation: fall back to vacuum
        Err(_) => FockState::vacuum(modes),
    }
}
