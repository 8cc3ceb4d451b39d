//! Command line front end.
//!
//! Reports go to stdout (or `--out`), diagnostics and errors to stderr.
//! Exit code 1 means the circuit failed to parse or elaborate; 2 means a
//! failure at run time, such as an unreadable file or an invalid parameter.
//!
//! All reals are printed with at most twelve significant digits, so reports
//! are stable across runs and platforms.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use loqc::circuit::{compile, run_circuit, CircuitReport, Diagnostic};
use loqc::gates::{
    destructive_xor, encoder, parity_check, pbs_cnot, truth_table, GateDefinition, GateReport,
};
use loqc::sources::{
    expected_cycles_stored, photon_number_distribution, segment_delivery_probability,
    simulate_loop_delivery, tail_probability, SourceModel,
};

#[derive(Parser)]
#[command(
    name = "loqc",
    version,
    about = "Exact few-photon simulator for linear-optical quantum logic"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a circuit file and report the outcome distribution.
    Run(RunArgs),
    /// Evaluate a heralded gate on every basis input.
    TruthTable(TruthTableArgs),
    /// Photon statistics for a single-photon source model.
    #[command(subcommand)]
    SourceStats(SourceCommand),
}

#[derive(Args)]
struct RunArgs {
    /// Circuit file to execute.
    file: PathBuf,
}

#[derive(Args)]
struct TruthTableArgs {
    /// Gate to evaluate.
    gate: GateName,
    /// Pairwise photon overlap between independent inputs; 1 is ideal.
    #[arg(long, default_value_t = 1.0)]
    overlap: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum GateName {
    Parity,
    Xor,
    Encode,
    Cnot,
}

#[derive(Subcommand)]
enum SourceCommand {
    /// Attenuated laser with Poissonian photon number.
    Laser {
        /// Mean photon number per pulse.
        #[arg(long)]
        mean: f64,
        /// Largest photon number to list.
        #[arg(long, default_value_t = 6)]
        cutoff: usize,
    },
    /// Parametric pair source.
    Pair {
        /// Probability of emitting a pair per pulse.
        #[arg(long)]
        pair_probability: f64,
        /// Keep the double-pair term instead of truncating it.
        #[arg(long)]
        include_double_pairs: bool,
        /// Largest photon number to list.
        #[arg(long, default_value_t = 4)]
        cutoff: usize,
    },
    /// Pair source feeding a switched storage loop.
    Loop {
        #[arg(long)]
        pair_probability: f64,
        #[arg(long, default_value_t = 1.0)]
        switch_transmission: f64,
        #[arg(long, default_value_t = 1.0)]
        loop_transmission: f64,
        /// Longest storage the loop supports, in cycles.
        #[arg(long, default_value_t = 20)]
        max_cycles: u32,
        /// Cycles between delivery requests.
        #[arg(long)]
        segment_length: u32,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

enum Failure {
    /// The circuit source is at fault; one line per problem.
    Diagnostics(Vec<Diagnostic>),
    /// Anything that stopped the requested computation itself.
    Runtime(String),
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(err: E) -> Self {
        Failure::Runtime(err.to_string())
    }
}

pub fn main() -> i32 {
    let cli = Cli::parse();
    let report = match &cli.command {
        Command::Run(args) => run_command(args, cli.format),
        Command::TruthTable(args) => truth_table_command(args, cli.format),
        Command::SourceStats(model) => source_stats_command(model, cli.format),
    };
    match report {
        Ok(report) => match deliver(&report, cli.out.as_deref()) {
            Ok(()) => 0,
            Err(err) => {
                eprintln!("error: {err}");
                2
            }
        },
        Err(Failure::Diagnostics(diagnostics)) => {
            for diagnostic in diagnostics {
                eprintln!("{diagnostic}");
            }
            1
        }
        Err(Failure::Runtime(message)) => {
            eprintln!("error: {message}");
            2
        }
    }
}

fn deliver(report: &str, out: Option<&std::path::Path>) -> Result<(), String> {
    match out {
        Some(path) => fs::write(path, report)
            .map_err(|err| format!("cannot write {}: {err}", path.display())),
        None => {
            print!("{report}");
            Ok(())
        }
    }
}

fn run_command(args: &RunArgs, format: Format) -> Result<String, Failure> {
    let source = fs::read_to_string(&args.file)
        .map_err(|err| Failure::Runtime(format!("cannot read {}: {err}", args.file.display())))?;
    let elaborated = compile(&source).map_err(Failure::Diagnostics)?;
    let report = run_circuit(&elaborated)?;
    Ok(match format {
        Format::Json => run_report_json(&report),
        Format::Csv => run_report_csv(&report),
    })
}

fn truth_table_command(args: &TruthTableArgs, format: Format) -> Result<String, Failure> {
    let definition: GateDefinition = match args.gate {
        GateName::Parity => parity_check()?,
        GateName::Xor => destructive_xor()?,
        GateName::Encode => encoder()?,
        GateName::Cnot => pbs_cnot()?,
    };
    let report = truth_table(&definition, args.overlap)?;
    Ok(match format {
        Format::Json => gate_report_json(&report),
        Format::Csv => gate_report_csv(&report),
    })
}

fn source_stats_command(model: &SourceCommand, format: Format) -> Result<String, Failure> {
    match *model {
        SourceCommand::Laser { mean, cutoff } => {
            let source = SourceModel::AttenuatedLaser { mean };
            distribution_report(&source, cutoff, format)
        }
        SourceCommand::Pair {
            pair_probability,
            include_double_pairs,
            cutoff,
        } => {
            let source = SourceModel::SpdcPair {
                pair_probability,
                include_double_pairs,
            };
            distribution_report(&source, cutoff, format)
        }
        SourceCommand::Loop {
            pair_probability,
            switch_transmission,
            loop_transmission,
            max_cycles,
            segment_length,
            trials,
            seed,
        } => {
            let source = SourceModel::HeraldedLoop {
                pair_probability,
                switch_transmission,
                loop_transmission,
                max_cycles,
            };
            let analytic = segment_delivery_probability(&source, segment_length)?;
            let expected_storage = expected_cycles_stored(&source, segment_length)?;
            let stats = simulate_loop_delivery(&source, segment_length, trials, seed)?;
            let fields = [
                ("segment_length", segment_length.to_string()),
                ("analytic_delivery_probability", fmt_real(analytic)),
                ("expected_cycles_stored", fmt_real(expected_storage)),
                ("trials", stats.trials.to_string()),
                ("delivered", stats.delivered.to_string()),
                ("delivery_rate", fmt_real(stats.delivery_rate)),
                ("mean_cycles_stored", fmt_real(stats.mean_cycles_stored)),
            ];
            Ok(match format {
                Format::Json => {
                    let body: Vec<String> = std::iter::once(format!(
                        "\"source\":{}",
                        json_string(source.name())
                    ))
                    .chain(fields.iter().map(|(key, value)| format!("\"{key}\":{value}")))
                    .collect();
                    format!("{{{}}}\n", body.join(","))
                }
                Format::Csv => {
                    let mut out = String::from("quantity,value\n");
                    for (key, value) in &fields {
                        out.push_str(&format!("{key},{value}\n"));
                    }
                    out
                }
            })
        }
    }
}

fn distribution_report(
    source: &SourceModel,
    cutoff: usize,
    format: Format,
) -> Result<String, Failure> {
    let pmf = photon_number_distribution(source, cutoff)?;
    let tail = tail_probability(source, cutoff + 1)?;
    Ok(match format {
        Format::Json => {
            let entries: Vec<String> = pmf.iter().map(|p| fmt_real(*p)).collect();
            format!(
                "{{\"source\":{},\"distribution\":[{}],\"tail_probability\":{}}}\n",
                json_string(source.name()),
                entries.join(","),
                fmt_real(tail)
            )
        }
        Format::Csv => {
            let mut out = String::from("n,probability\n");
            for (n, p) in pmf.iter().enumerate() {
                out.push_str(&format!("{n},{}\n", fmt_real(*p)));
            }
            out.push_str(&format!("tail,{}\n", fmt_real(tail)));
            out
        }
    })
}

/// At most twelve significant digits, exponent form, trailing zeros trimmed.
fn fmt_real(value: f64) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    let raw = format!("{value:.11e}");
    let (mantissa, exponent) = raw.split_once('e').expect("exponent form");
    let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
    format!("{mantissa}e{exponent}")
}

fn json_string(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn bits_string(bits: &[u8]) -> String {
    bits.iter().map(|b| char::from(b'0' + b)).collect()
}

fn run_report_json(report: &CircuitReport) -> String {
    let outputs: Vec<String> = report
        .outputs
        .iter()
        .map(|o| {
            format!(
                "{{\"value\":{},\"probability\":{}}}",
                json_string(&o.value),
                fmt_real(o.probability)
            )
        })
        .collect();
    let per_gate: Vec<String> = report
        .per_gate_acceptance
        .iter()
        .map(|a| fmt_real(*a))
        .collect();
    format!(
        "{{\"acceptance_probability\":{},\"outputs\":[{}],\"per_gate_acceptance\":[{}],\"invalid_probability\":{}}}\n",
        fmt_real(report.acceptance_probability),
        outputs.join(","),
        per_gate.join(","),
        fmt_real(report.invalid_probability)
    )
}

fn run_report_csv(report: &CircuitReport) -> String {
    let mut out = String::from("output,conditional_probability,acceptance_probability\n");
    for outcome in &report.outputs {
        out.push_str(&format!(
            "{},{},{}\n",
            outcome.value,
            fmt_real(outcome.probability),
            fmt_real(report.acceptance_probability)
        ));
    }
    out
}

fn gate_report_json(report: &GateReport) -> String {
    let rows: Vec<String> = report
        .rows
        .iter()
        .map(|row| {
            let outputs: Vec<String> = row
                .outputs
                .iter()
                .map(|(bits, p)| {
                    format!(
                        "{{\"value\":{},\"probability\":{}}}",
                        json_string(&bits_string(bits)),
                        fmt_real(*p)
                    )
                })
                .collect();
            format!(
                "{{\"input\":{},\"outputs\":[{}],\"acceptance\":{},\"invalid\":{}}}",
                json_string(&bits_string(&row.input)),
                outputs.join(","),
                fmt_real(row.acceptance),
                fmt_real(row.invalid)
            )
        })
        .collect();
    format!(
        "{{\"gate\":{},\"overlap\":{},\"rows\":[{}],\"mean_acceptance\":{},\"truth_table_fidelity\":{},\"process_fidelity\":{}}}\n",
        json_string(&report.gate),
        fmt_real(report.overlap),
        rows.join(","),
        fmt_real(report.mean_acceptance),
        fmt_real(report.truth_table_fidelity),
        fmt_real(report.process_fidelity)
    )
}

fn gate_report_csv(report: &GateReport) -> String {
    let mut out = String::from("input,output,conditional_probability,acceptance_probability\n");
    for row in &report.rows {
        for (bits, probability) in &row.outputs {
            if *probability > 0.0 {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    bits_string(&row.input),
                    bits_string(bits),
                    fmt_real(*probability),
                    fmt_real(row.acceptance)
                ));
            }
        }
    }
    out
}
