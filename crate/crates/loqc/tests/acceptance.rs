//! Acceptance suite: one test per numbered criterion. Each test prints a
//! single pass line once every check in it holds, so a full run reads as a
//! checklist.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use loqc::circuit::{compile, elaborate, parse_circuit, run_circuit, three_qubit_parity, DiagnosticCategory, MAX_DIAGNOSTICS, PARITY3_SOURCE};
use loqc::elements::{
    apply_element, apply_to_modes, element_unitary, evolve, make_distinguishable, ElementKind,
    ElementSpec, ModeUnitary,
};
use loqc::fock::{FockState, OccupationVector, QubitSlot};
use loqc::gates::{
    derive_correction_table, destructive_xor, encoder, output_fidelity, parity_check, pbs_cnot,
    prepare_basis_input, prepare_logical_input, run_fidelity, run_gate, run_gate_uncorrected,
    truth_table, LogicalState,
};
use loqc::sources::{
    photon_number_distribution, segment_delivery_probability, simulate_loop_delivery,
    tail_probability, SourceModel,
};

const EXACT: f64 = 1e-12;
const FIDELITY_FLOOR: f64 = 1.0 - 1e-9;
const ORACLE_TOLERANCE: f64 = 1e-10;
const DRIFT_BUDGET: f64 = 1e-9;

fn bell_target() -> LogicalState {
    let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut target = BTreeMap::new();
    target.insert(vec![0, 0], amp);
    target.insert(vec![1, 1], amp);
    target
}

#[test]
fn criterion_01_cnot_heralds_every_basis_input_at_one_quarter() {
    let def = pbs_cnot().unwrap();
    for idx in 0..4u8 {
        let bits = [idx >> 1 & 1, idx & 1];
        let input = prepare_basis_input(&def, &bits).unwrap();
        let run = run_gate(&def, &input, 1).unwrap();
        let acceptance = run.accepted_probability();
        assert!(
            (acceptance - 0.25).abs() <= EXACT,
            "input {bits:?} heralded at {acceptance}"
        );
    }
    println!("criterion 01 pass: cnot heralds each basis input with probability 1/4");
}

#[test]
fn criterion_02_cnot_truth_table_is_exact() {
    let def = pbs_cnot().unwrap();
    let report = truth_table(&def, 1.0).unwrap();
    assert_eq!(report.rows.len(), 4);
    for row in &report.rows {
        let expected = vec![row.input[0], row.input[0] ^ row.input[1]];
        let p = row.outputs.get(&expected).copied().unwrap_or(0.0);
        assert!(
            (p - 1.0).abs() <= EXACT,
            "input {:?} gave {expected:?} with probability {p}",
            row.input
        );
        assert!(row.invalid <= EXACT);
    }
    println!("criterion 02 pass: cnot maps every basis input to control, control xor target");
}

#[test]
fn criterion_03_cnot_entangles_a_superposed_control() {
    let def = pbs_cnot().unwrap();
    let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut input = BTreeMap::new();
    input.insert(vec![0, 0], amp);
    input.insert(vec![1, 0], amp);
    let state = prepare_logical_input(&def, &input).unwrap();
    let run = run_gate(&def, &state, 1).unwrap();
    assert!((run.accepted_probability() - 0.25).abs() <= EXACT);
    let target = bell_target();
    for outcome in &run.outcomes {
        let fidelity = output_fidelity(&def, &outcome.state, 1, &target);
        assert!(
            fidelity >= FIDELITY_FLOOR,
            "pattern {:?} reached fidelity {fidelity}",
            outcome.pattern
        );
    }
    assert!(run_fidelity(&def, &run, 1, &target) >= FIDELITY_FLOOR);
    println!("criterion 03 pass: cnot on a superposed control yields the even bell state");
}

#[test]
fn criterion_04_two_photon_primitives_herald_at_one_half_with_exact_corrections() {
    let gates = [
        ("parity", parity_check()),
        ("xor", destructive_xor()),
        ("encode", encoder()),
    ];
    for (name, def) in gates {
        let def = def.unwrap();
        let report = truth_table(&def, 1.0).unwrap();
        assert!(
            (report.mean_acceptance - 0.5).abs() <= EXACT,
            "{name} heralded at {}",
            report.mean_acceptance
        );
        assert!(
            report.process_fidelity >= FIDELITY_FLOOR,
            "{name} fidelity {}",
            report.process_fidelity
        );
        assert!((report.truth_table_fidelity - 1.0).abs() <= EXACT, "{name}");
    }
    println!("criterion 04 pass: parity, xor and encode herald at 1/2 and correct to fidelity 1");
}

#[test]
fn criterion_05_the_two_stage_parity_circuit_is_exact_for_all_basis_inputs() {
    let start = Instant::now();
    for idx in 0..8u8 {
        let bits = [idx >> 2 & 1, idx >> 1 & 1, idx & 1];
        let circuit = three_qubit_parity(bits);
        let elaborated = elaborate(&circuit).unwrap();
        let report = run_circuit(&elaborated).unwrap();
        let parity = (bits[0] + bits[1] + bits[2]) % 2;
        let expected = if parity == 0 { "0" } else { "1" };
        let p = report
            .outputs
            .iter()
            .find(|o| o.value == expected)
            .map(|o| o.probability)
            .unwrap_or(0.0);
        assert!((p - 1.0).abs() <= EXACT, "bits {bits:?} read {expected} at {p}");
        assert!(
            (report.acceptance_probability - 0.25).abs() <= EXACT,
            "bits {bits:?} accepted at {}",
            report.acceptance_probability
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    println!("criterion 05 pass: two chained xor gates fold any three bits exactly, under 5s");
}

#[test]
fn criterion_06_bell_pairs_read_out_perfectly_correlated() {
    for basis in ["hv", "diag"] {
        let source = format!("bell a b\nmeasure a b {basis}\n");
        let report = run_circuit(&compile(&source).unwrap()).unwrap();
        assert!((report.acceptance_probability - 1.0).abs() <= EXACT);
        let p = |value: &str| {
            report
                .outputs
                .iter()
                .find(|o| o.value == value)
                .map(|o| o.probability)
                .unwrap_or(0.0)
        };
        assert!((p("00") - 0.5).abs() <= EXACT, "{basis}");
        assert!((p("11") - 0.5).abs() <= EXACT, "{basis}");
        assert!(p("01") <= EXACT, "{basis}");
        assert!(p("10") <= EXACT, "{basis}");
        let first_marginal = p("00") + p("01");
        assert!((first_marginal - 0.5).abs() <= EXACT, "{basis}");
    }
    println!("criterion 06 pass: both halves of a bell pair agree, with uniform marginals");
}

fn coincidence(state: &FockState, port_a: &[usize], port_b: &[usize]) -> f64 {
    state
        .terms()
        .filter(|(occ, _)| {
            let a: u32 = port_a.iter().map(|&m| u32::from(occ.count(m))).sum();
            let b: u32 = port_b.iter().map(|&m| u32::from(occ.count(m))).sum();
            a == 1 && b == 1
        })
        .map(|(_, amp)| amp.norm_sqr())
        .sum()
}

#[test]
fn criterion_07_photon_bunching_follows_the_pairwise_overlap() {
    let bs = element_unitary(&ElementKind::BeamSplitter { reflectivity: 0.5 }).unwrap();
    let base = FockState::basis_state(&[1, 0, 1, 0]).unwrap();
    let slot_b = QubitSlot::new(2, 3).unwrap();

    for overlap in [0.0, 0.5] {
        let split = make_distinguishable(&base, slot_b, overlap).unwrap();
        let padded = split.with_appended_vacuum(2);
        let mixed = apply_to_modes(&padded, &bs, &[0, 2]).unwrap();
        let mixed = apply_to_modes(&mixed, &bs, &[6, 4]).unwrap();
        let observed = coincidence(&mixed, &[0, 6], &[2, 4]);
        let expected = (1.0 - overlap) / 2.0;
        assert!(
            (observed - expected).abs() <= EXACT,
            "overlap {overlap} gave coincidence {observed}"
        );
    }

    let identical = apply_to_modes(&base, &bs, &[0, 2]).unwrap();
    let both_ports = OccupationVector::from_counts(&[1, 0, 1, 0]);
    assert_eq!(identical.amplitude(&both_ports), Complex64::new(0.0, 0.0));
    assert_eq!(coincidence(&identical, &[0], &[2]), 0.0);
    assert_eq!(identical.term_count(), 2);
    println!("criterion 07 pass: coincidence rate is (1-overlap)/2 and cancels exactly at 1");
}

#[test]
fn criterion_08_permanent_evolution_matches_the_expansion_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut checked = 0;
    for dim in 1..=4usize {
        for _ in 0..25 {
            let matrix = common::random_unitary(&mut rng, dim);
            let state = common::random_state(&mut rng, dim, 3, 3);
            let unitary = ModeUnitary::new(matrix.clone()).unwrap();
            let evolved = evolve(&state, &unitary).unwrap();
            let oracle = common::evolve_oracle(&state, &matrix);
            let mut max_diff = 0.0_f64;
            for (occ, amp) in evolved.terms() {
                let reference = oracle
                    .get(occ)
                    .copied()
                    .unwrap_or_else(|| Complex64::new(0.0, 0.0));
                max_diff = max_diff.max((amp - reference).norm());
            }
            for (occ, reference) in &oracle {
                max_diff = max_diff.max((evolved.amplitude(occ) - reference).norm());
            }
            assert!(
                max_diff <= ORACLE_TOLERANCE,
                "dim {dim} diverged by {max_diff}"
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 100);
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    println!("criterion 08 pass: 100 random evolutions agree with the expansion oracle");
}

#[test]
fn criterion_09_norm_drift_stays_below_budget_over_a_thousand_elements() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut state = FockState::basis_state(&[1, 1, 1, 0, 0, 0]).unwrap();
    let mut modes: Vec<usize> = (0..6).collect();
    for _ in 0..1000 {
        modes.shuffle(&mut rng);
        let spec = match rng.gen_range(0..4) {
            0 => ElementSpec::new(
                ElementKind::BeamSplitter {
                    reflectivity: rng.gen(),
                },
                modes[..2].to_vec(),
            ),
            1 => ElementSpec::new(
                ElementKind::PhaseShifter {
                    phase: rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
                },
                modes[..1].to_vec(),
            ),
            2 => ElementSpec::new(
                ElementKind::PolarizationRotator {
                    angle: rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
                },
                modes[..2].to_vec(),
            ),
            _ => ElementSpec::new(ElementKind::PolarizingBeamSplitter, modes[..4].to_vec()),
        };
        state = apply_element(&state, &spec).unwrap();
    }
    let drift = (state.norm() - 1.0).abs();
    assert!(drift <= DRIFT_BUDGET, "norm drifted by {drift}");
    println!("criterion 09 pass: norm drift after 1000 random elements is within 1e-9");
}

#[test]
fn criterion_10_poisson_statistics_at_mean_one_are_exact() {
    let source = SourceModel::AttenuatedLaser { mean: 1.0 };
    let pmf = photon_number_distribution(&source, 1).unwrap();
    let e_inv = (-1.0_f64).exp();
    assert!((pmf[0] - e_inv).abs() <= EXACT);
    assert!((pmf[1] - e_inv).abs() <= EXACT);
    let tail = tail_probability(&source, 2).unwrap();
    assert!((tail - (1.0 - 2.0 * e_inv)).abs() <= EXACT);
    println!("criterion 10 pass: vacuum, single and multi mass at mean 1 match closed forms");
}

#[test]
fn criterion_11_loop_monte_carlo_tracks_the_analytic_rate_and_is_reproducible() {
    let start = Instant::now();
    let trials = 100_000u64;
    let settings = [
        (0.05, 0.99, 0.995, 20, 10),
        (0.10, 0.95, 0.980, 15, 6),
        (0.20, 0.90, 0.970, 10, 4),
        (0.30, 0.97, 0.990, 12, 8),
        (0.15, 1.00, 1.000, 20, 12),
    ];
    for (i, (p, switch, transit, max_cycles, segment)) in settings.into_iter().enumerate() {
        let source = SourceModel::HeraldedLoop {
            pair_probability: p,
            switch_transmission: switch,
            loop_transmission: transit,
            max_cycles,
        };
        let analytic = segment_delivery_probability(&source, segment).unwrap();
        let seed = 1100 + i as u64;
        let stats = simulate_loop_delivery(&source, segment, trials, seed).unwrap();
        let sigma = (analytic * (1.0 - analytic) / trials as f64).sqrt();
        assert!(
            (stats.delivery_rate - analytic).abs() <= 3.0 * sigma,
            "setting {i}: rate {} vs analytic {analytic} (sigma {sigma})",
            stats.delivery_rate
        );
        let again = simulate_loop_delivery(&source, segment, trials, seed).unwrap();
        assert_eq!(stats.delivered, again.delivered);
        assert_eq!(
            stats.mean_cycles_stored.to_bits(),
            again.mean_cycles_stored.to_bits()
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    println!("criterion 11 pass: five loop settings sit within 3 sigma and replay bit for bit");
}

#[test]
fn criterion_12_corrections_are_derivable_and_necessary() {
    for def in [parity_check(), destructive_xor(), encoder(), pbs_cnot()] {
        let def = def.unwrap();
        let derived = derive_correction_table(&def).unwrap();
        assert_eq!(derived, def.corrections, "{}", def.name);
    }

    let def = encoder().unwrap();
    let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut probe: LogicalState = BTreeMap::new();
    probe.insert(vec![0], amp);
    probe.insert(vec![1], amp);
    let input = prepare_logical_input(&def, &probe).unwrap();
    let target = def.ideal.apply(&probe).unwrap();

    let corrected = run_gate(&def, &input, 1).unwrap();
    for outcome in &corrected.outcomes {
        assert!(output_fidelity(&def, &outcome.state, 1, &target) >= FIDELITY_FLOOR);
    }

    let raw = run_gate_uncorrected(&def, &input, 1).unwrap();
    let worst = raw
        .outcomes
        .iter()
        .map(|o| output_fidelity(&def, &o.state, 1, &target))
        .fold(1.0_f64, f64::min);
    assert!(
        worst < 1.0 - 1e-3,
        "dropping corrections should hurt some outcome, worst was {worst}"
    );
    println!("criterion 12 pass: derived tables reach fidelity 1 and omitting them does not");
}

#[test]
fn criterion_13_cnot_degrades_monotonically_with_distinguishability() {
    let def = pbs_cnot().unwrap();
    let overlaps = [1.0, 0.75, 0.5, 0.25, 0.0];
    let expected = [1.0, 0.875, 0.75, 0.625, 0.5];
    let mut previous = f64::INFINITY;
    let mut last = 1.0;
    for (overlap, reference) in overlaps.into_iter().zip(expected) {
        let report = truth_table(&def, overlap).unwrap();
        let fidelity = report.truth_table_fidelity;
        assert!(
            (fidelity - reference).abs() <= 1e-9,
            "overlap {overlap} gave {fidelity}, expected {reference}"
        );
        assert!(
            fidelity <= previous + EXACT,
            "fidelity rose from {previous} to {fidelity} at overlap {overlap}"
        );
        assert!((report.mean_acceptance - 0.25).abs() <= EXACT);
        previous = fidelity;
        last = fidelity;
    }
    assert!(last < 1.0);
    println!("criterion 13 pass: truth-table fidelity falls as (1+overlap)/2 down to 1/2");
}

#[test]
fn criterion_14_the_circuit_format_round_trips_and_reports_precise_errors() {
    let circuit = parse_circuit(PARITY3_SOURCE).unwrap();
    assert_eq!(circuit.statements.len(), 6);
    let printed = circuit.to_string();
    let reparsed = parse_circuit(&printed).unwrap();
    assert_eq!(reparsed.nodes(), circuit.nodes());
    assert_eq!(circuit.nodes(), three_qubit_parity([0, 0, 0]).nodes());

    let bad = "qubit q0\nsplice q0\nelement phase warm q0.v\ngate xor q0 -> t\n";
    let diagnostics = parse_circuit(bad).unwrap_err();
    let find = |category: DiagnosticCategory| {
        diagnostics
            .iter()
            .find(|d| d.category == category)
            .unwrap_or_else(|| panic!("no {category} diagnostic"))
    };
    assert_eq!(find(DiagnosticCategory::UnknownKeyword).line, 2);
    assert_eq!(find(DiagnosticCategory::BadNumber).line, 3);
    assert_eq!(find(DiagnosticCategory::Syntax).line, 4);

    let unbound = "qubit a\nqubit a\nelement rot 0.1 ghost\nmeasure a hv\n";
    let diagnostics = compile(unbound).unwrap_err();
    let duplicate = diagnostics
        .iter()
        .find(|d| d.category == DiagnosticCategory::DuplicateLabel)
        .expect("duplicate-label diagnostic");
    assert_eq!(duplicate.line, 2);
    let unresolved = diagnostics
        .iter()
        .find(|d| d.category == DiagnosticCategory::UnresolvedLabel)
        .expect("unresolved-label diagnostic");
    assert_eq!(unresolved.line, 3);

    let noisy = "bogus\n".repeat(25);
    assert_eq!(parse_circuit(&noisy).unwrap_err().len(), MAX_DIAGNOSTICS);
    println!("criterion 14 pass: round trip is stable and all five error kinds carry lines");
}
