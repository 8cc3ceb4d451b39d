//! Photon sources: number statistics, heralded storage-loop delivery, and
//! their effect on gate error rates.
//!
//! The gate modules assume exactly one photon per input rail. Real sources
//! miss that in two ways: sometimes no photon arrives, sometimes more than
//! one does. This module models both and quantifies what they do to a
//! heralded gate, where a false herald can accept a run whose output rail
//! is empty or doubly occupied.

use crate::fock::{FockError, FockState, OccupationVector};
use crate::gates::{output_distribution, run_gate, GateDefinition, GateError, LogicalState};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SourceError {
    #[error("{name} must lie in [0, 1], got {value}")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },
    #[error("mean photon number must be finite and nonnegative, got {0}")]
    InvalidMean(f64),
    #[error("photon number statistics of a storage loop depend on the request schedule; use the delivery helpers")]
    ScheduleDependent,
    #[error("the {0} source has no storage loop")]
    NotALoop(&'static str),
    #[error("gate has {arity} inputs, cannot vary input {index}")]
    InvalidInputIndex { index: usize, arity: usize },
    #[error(transparent)]
    Gate(#[from] GateError),
}

/// Photon source models.
///
/// `AttenuatedLaser` emits Poisson-distributed photon numbers with the given
/// mean. `SpdcPair` emits zero or one pair per shot with probability
/// `pair_probability`, optionally extended with a double-pair term weighted
/// by the square of that probability. `HeraldedLoop` stores a heralded pair
/// in a fiber loop until requested: photons enter and leave through a switch
/// with the given transmission, lose `loop_transmission` per storage cycle,
/// and are discarded after `max_cycles` round trips.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SourceModel {
    AttenuatedLaser {
        mean: f64,
    },
    SpdcPair {
        pair_probability: f64,
        include_double_pairs: bool,
    },
    HeraldedLoop {
        pair_probability: f64,
        switch_transmission: f64,
        loop_transmission: f64,
        max_cycles: u32,
    },
}

impl SourceModel {
    pub fn name(&self) -> &'static str {
        match self {
            SourceModel::AttenuatedLaser { .. } => "attenuated-laser",
            SourceModel::SpdcPair { .. } => "spdc-pair",
            SourceModel::HeraldedLoop { .. } => "heralded-loop",
        }
    }

    fn validate(&self) -> Result<(), SourceError> {
        let check = |name: &'static str, value: f64| {
            if !(0.0..=1.0).contains(&value) || value.is_nan() {
                Err(SourceError::ProbabilityOutOfRange { name, value })
            } else {
                Ok(())
            }
        };
        match *self {
            SourceModel::AttenuatedLaser { mean } => {
                if !mean.is_finite() || mean < 0.0 {
                    return Err(SourceError::InvalidMean(mean));
                }
            }
            SourceModel::SpdcPair {
                pair_probability, ..
            } => check("pair probability", pair_probability)?,
            SourceModel::HeraldedLoop {
                pair_probability,
                switch_transmission,
                loop_transmission,
                ..
            } => {
                check("pair probability", pair_probability)?;
                check("switch transmission", switch_transmission)?;
                check("loop transmission", loop_transmission)?;
            }
        }
        Ok(())
    }
}

/// Emission number probabilities for `n` in `0..=cutoff`.
///
/// For the laser this is the exact Poisson mass function, not renormalized,
/// so the entries sum to less than one when the cutoff truncates real mass.
/// The pair source counts pairs, not photons. The storage loop has no
/// schedule-free number distribution and returns an error.
pub fn photon_number_distribution(
    source: &SourceModel,
    cutoff: usize,
) -> Result<Vec<f64>, SourceError> {
    source.validate()?;
    match *source {
        SourceModel::AttenuatedLaser { mean } => {
            let mut pmf = Vec::with_capacity(cutoff + 1);
            let mut term = (-mean).exp();
            pmf.push(term);
            for n in 1..=cutoff {
                term *= mean / n as f64;
                pmf.push(term);
            }
            Ok(pmf)
        }
        SourceModel::SpdcPair {
            pair_probability: p,
            include_double_pairs,
        } => {
            let mut pmf = vec![0.0; cutoff + 1];
            if include_double_pairs {
                let norm = 1.0 + p * p;
                pmf[0] = (1.0 - p) / norm;
                if cutoff >= 1 {
                    pmf[1] = p / norm;
                }
                if cutoff >= 2 {
                    pmf[2] = p * p / norm;
                }
            } else {
                pmf[0] = 1.0 - p;
                if cutoff >= 1 {
                    pmf[1] = p;
                }
            }
            Ok(pmf)
        }
        SourceModel::HeraldedLoop { .. } => Err(SourceError::ScheduleDependent),
    }
}

/// Probability of emitting at least `threshold` photons.
pub fn tail_probability(source: &SourceModel, threshold: usize) -> Result<f64, SourceError> {
    if threshold == 0 {
        source.validate()?;
        return Ok(1.0);
    }
    let head = photon_number_distribution(source, threshold - 1)?;
    Ok(1.0 - head.iter().sum::<f64>())
}

/// Probability that a photon stored for `cycles` round trips comes out of
/// the loop: through the switch twice and around the loop once per cycle.
/// Zero beyond the storage limit.
pub fn delivery_after_storage(source: &SourceModel, cycles: u32) -> Result<f64, SourceError> {
    source.validate()?;
    let SourceModel::HeraldedLoop {
        switch_transmission,
        loop_transmission,
        max_cycles,
        ..
    } = *source
    else {
        return Err(SourceError::NotALoop(source.name()));
    };
    if cycles > max_cycles {
        return Ok(0.0);
    }
    Ok(switch_transmission * switch_transmission * loop_transmission.powi(cycles as i32))
}

/// Probability that a request at the end of a segment of `segment_length`
/// pump pulses receives a photon.
///
/// The first pair generated in the segment is stored; it waits until the
/// request and survives storage per `delivery_after_storage`. Pairs are not
/// re-armed after a loss, so a pair stored beyond the cycle limit means the
/// request goes empty.
pub fn segment_delivery_probability(
    source: &SourceModel,
    segment_length: u32,
) -> Result<f64, SourceError> {
    source.validate()?;
    let SourceModel::HeraldedLoop {
        pair_probability: p,
        max_cycles,
        ..
    } = *source
    else {
        return Err(SourceError::NotALoop(source.name()));
    };
    if segment_length == 0 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for wait in 0..=max_cycles.min(segment_length - 1) {
        let generated = p * (1.0 - p).powi((segment_length - 1 - wait) as i32);
        total += generated * delivery_after_storage(source, wait)?;
    }
    Ok(total)
}

/// Mean number of storage cycles for photons that are delivered.
pub fn expected_cycles_stored(
    source: &SourceModel,
    segment_length: u32,
) -> Result<f64, SourceError> {
    source.validate()?;
    let SourceModel::HeraldedLoop {
        pair_probability: p,
        max_cycles,
        ..
    } = *source
    else {
        return Err(SourceError::NotALoop(source.name()));
    };
    if segment_length == 0 {
        return Ok(0.0);
    }
    let mut mass = 0.0;
    let mut weighted = 0.0;
    for wait in 0..=max_cycles.min(segment_length - 1) {
        let generated = p * (1.0 - p).powi((segment_length - 1 - wait) as i32);
        let term = generated * delivery_after_storage(source, wait)?;
        mass += term;
        weighted += term * wait as f64;
    }
    if mass == 0.0 {
        return Ok(0.0);
    }
    Ok(weighted / mass)
}

/// Monte Carlo tally of storage-loop deliveries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeliveryStats {
    pub trials: u64,
    pub delivered: u64,
    pub delivery_rate: f64,
    /// Mean storage cycles over delivered photons; zero when none arrived.
    pub mean_cycles_stored: f64,
}

/// Simulates `trials` independent request segments.
///
/// Each trial draws from its own counter-based stream of the seeded
/// generator, so results are reproducible for a given seed regardless of
/// trial count or ordering.
pub fn simulate_loop_delivery(
    source: &SourceModel,
    segment_length: u32,
    trials: u64,
    seed: u64,
) -> Result<DeliveryStats, SourceError> {
    source.validate()?;
    let SourceModel::HeraldedLoop {
        pair_probability: p,
        max_cycles,
        ..
    } = *source
    else {
        return Err(SourceError::NotALoop(source.name()));
    };
    let mut delivered = 0u64;
    let mut cycles_total = 0u64;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let mut stored_at = None;
        for pulse in 0..segment_length {
            if rng.gen::<f64>() < p {
                stored_at = Some(pulse);
                break;
            }
        }
        if let Some(pulse) = stored_at {
            let wait = segment_length - 1 - pulse;
            if wait <= max_cycles {
                let survival = delivery_after_storage(source, wait)?;
                if rng.gen::<f64>() < survival {
                    delivered += 1;
                    cycles_total += u64::from(wait);
                }
            }
        }
    }
    Ok(DeliveryStats {
        trials,
        delivered,
        delivery_rate: delivered as f64 / trials as f64,
        mean_cycles_stored: if delivered > 0 {
            cycles_total as f64 / delivered as f64
        } else {
            0.0
        },
    })
}

/// How a gate behaves when one input qubit is fed by a realistic source.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourcedGateStats {
    /// Herald probability over the full emission mixture, vacuum included.
    pub acceptance_probability: f64,
    /// Probability the accepted output is wrong or not a valid qubit, given
    /// that the source delivered at least one photon.
    pub conditional_error_rate: f64,
    /// Probability the source delivered at least one photon.
    pub delivered_probability: f64,
}

/// Feeds input `varied_input` of the gate from the source while the other
/// inputs stay ideal, then aggregates herald and error statistics over the
/// emission mixture, truncated at `truncation` photons.
///
/// Vacuum emissions can still herald (a false accept with an empty output
/// rail), which is why acceptance is reported over the full mixture while
/// the error rate conditions on an actual delivery.
pub fn gate_error_with_sources(
    def: &GateDefinition,
    input_bits: &[u8],
    source: &SourceModel,
    varied_input: usize,
    truncation: usize,
) -> Result<SourcedGateStats, SourceError> {
    let arity = def.input_slots.len();
    if varied_input >= arity {
        return Err(SourceError::InvalidInputIndex {
            index: varied_input,
            arity,
        });
    }
    if input_bits.len() != arity {
        return Err(SourceError::Gate(GateError::ArityMismatch {
            expected: arity,
            found: input_bits.len(),
        }));
    }
    let weights = photon_number_distribution(source, truncation)?;
    let mut probe = LogicalState::new();
    probe.insert(input_bits.to_vec(), Complex64::new(1.0, 0.0));
    let ideal = def.ideal.apply(&probe);
    let mut acceptance = 0.0;
    let mut delivered_accept = 0.0;
    let mut delivered_error = 0.0;
    for (n, &weight) in weights.iter().enumerate() {
        if weight == 0.0 {
            continue;
        }
        let input = prepare_source_input(def, input_bits, varied_input, n as u8)?;
        let run = run_gate(def, &input, 1)?;
        let accepted = run.accepted_probability();
        acceptance += weight * accepted;
        if n >= 1 && accepted > 0.0 {
            let (outputs, _) = output_distribution(def, &run, 1)?;
            let correct = match &ideal {
                Some(target) => target
                    .iter()
                    .map(|(bits, amp)| {
                        outputs.get(bits).copied().unwrap_or(0.0) * amp.norm_sqr()
                    })
                    .sum::<f64>(),
                None => 0.0,
            };
            delivered_accept += weight * accepted;
            delivered_error += weight * accepted * (1.0 - correct);
        }
    }
    let delivered_probability: f64 = weights[1..].iter().sum();
    let conditional_error_rate = if delivered_accept > 0.0 {
        delivered_error / delivered_accept
    } else {
        0.0
    };
    Ok(SourcedGateStats {
        acceptance_probability: acceptance,
        conditional_error_rate,
        delivered_probability,
    })
}

/// Basis input with the varied slot's occupied rail holding `photons`
/// photons instead of exactly one.
fn prepare_source_input(
    def: &GateDefinition,
    bits: &[u8],
    varied_input: usize,
    photons: u8,
) -> Result<FockState, GateError> {
    let mut counts = vec![0u8; def.mode_count];
    for (i, (slot, &bit)) in def.input_slots.iter().zip(bits).enumerate() {
        let rail = match bit {
            0 => slot.h,
            1 => slot.v,
            other => return Err(GateError::InvalidBit(other)),
        };
        counts[rail] = if i == varied_input { photons } else { 1 };
    }
    let terms: Vec<(OccupationVector, Complex64)> = match def.ancilla {
        crate::gates::AncillaPrep::None => {
            vec![(OccupationVector::new(counts), Complex64::new(1.0, 0.0))]
        }
        crate::gates::AncillaPrep::BellPair(a, b) => {
            let mut both_h = counts.clone();
            both_h[a.h] = 1;
            both_h[b.h] = 1;
            let mut both_v = counts;
            both_v[a.v] = 1;
            both_v[b.v] = 1;
            vec![
                (OccupationVector::new(both_h), Complex64::new(1.0, 0.0)),
                (OccupationVector::new(both_v), Complex64::new(1.0, 0.0)),
            ]
        }
    };
    FockState::superpose(&terms).map_err(|e| match e {
        FockError::ZeroNorm => GateError::Fock(FockError::ZeroNorm),
        other => GateError::Fock(other),
    })
}
