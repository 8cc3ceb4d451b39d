//! Circuit description statements and their canonical text form.
//!
//! A circuit is a flat statement list. Labels name dual-rail qubits; gates
//! consume their input labels and bind fresh labels to their outputs, so
//! every label refers to exactly one qubit lifetime. The `Display` impl
//! regenerates source text that parses back to the same statements.

use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub statements: Vec<Spanned<Statement>>,
}

/// Statement plus the 1-based source line it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Spanned<T> {
    pub line: usize,
    pub node: T,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Statement {
    /// Declares one qubit in the given initial state.
    Qubit { label: String, init: QubitInit },
    /// Declares two qubits jointly in the equal-weight entangled state.
    Bell { a: String, b: String },
    /// One linear element applied to live rails.
    Element(CircuitElement),
    /// A heralded gate: consumes the inputs, binds the outputs.
    Gate {
        kind: GateKind,
        inputs: Vec<String>,
        outputs: Vec<String>,
    },
    /// Requires exactly one photon at the analyzer's primary output of this
    /// qubit, then retires the label.
    Detect { qubit: String, basis: Basis },
    /// Terminal readout of the listed qubits.
    Measure { qubits: Vec<String>, basis: Basis },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QubitInit {
    Zero,
    One,
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateKind {
    Parity,
    Xor,
    Encode,
    Cnot,
}

impl GateKind {
    pub fn input_arity(&self) -> usize {
        match self {
            GateKind::Encode => 1,
            _ => 2,
        }
    }

    pub fn output_arity(&self) -> usize {
        match self {
            GateKind::Parity | GateKind::Xor => 1,
            GateKind::Encode | GateKind::Cnot => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::Parity => "parity",
            GateKind::Xor => "xor",
            GateKind::Encode => "encode",
            GateKind::Cnot => "cnot",
        }
    }
}

/// Analyzer basis: the plain rails, the diagonal, or an explicit angle in
/// radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Basis {
    Hv,
    Diag,
    Angle(f64),
}

impl Basis {
    pub fn angle(&self) -> f64 {
        match self {
            Basis::Hv => 0.0,
            Basis::Diag => std::f64::consts::FRAC_PI_4,
            Basis::Angle(a) => *a,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rail {
    H,
    V,
}

/// A single rail of a named qubit, written `label.h` or `label.v`.
#[derive(Clone, Debug, PartialEq)]
pub struct RailRef {
    pub qubit: String,
    pub rail: Rail,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CircuitElement {
    BeamSplitter {
        reflectivity: f64,
        a: RailRef,
        b: RailRef,
    },
    Phase {
        phase: f64,
        rail: RailRef,
    },
    Rotator {
        angle: f64,
        qubit: String,
    },
    /// Polarizing splitter between two whole qubits. Arguments may carry a
    /// rail suffix; the qubit the rail belongs to is what counts.
    Pbs {
        a: String,
        b: String,
    },
    Loss {
        transmission: f64,
        rail: RailRef,
    },
}

impl fmt::Display for Rail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rail::H => "h",
            Rail::V => "v",
        })
    }
}

impl fmt::Display for RailRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.qubit, self.rail)
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Hv => f.write_str("hv"),
            Basis::Diag => f.write_str("diag"),
            Basis::Angle(a) => write!(f, "{a}"),
        }
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Qubit { label, init } => match init {
                QubitInit::Zero => write!(f, "qubit {label}"),
                QubitInit::One => write!(f, "qubit {label} 1"),
                QubitInit::Plus => write!(f, "qubit {label} +"),
                QubitInit::Minus => write!(f, "qubit {label} -"),
            },
            Statement::Bell { a, b } => write!(f, "bell {a} {b}"),
            Statement::Element(element) => match element {
                CircuitElement::BeamSplitter {
                    reflectivity,
                    a,
                    b,
                } => write!(f, "element bs {reflectivity} {a} {b}"),
                CircuitElement::Phase { phase, rail } => {
                    write!(f, "element phase {phase} {rail}")
                }
                CircuitElement::Rotator { angle, qubit } => {
                    write!(f, "element rot {angle} {qubit}")
                }
                CircuitElement::Pbs { a, b } => write!(f, "element pbs {a} {b}"),
                CircuitElement::Loss { transmission, rail } => {
                    write!(f, "element loss {transmission} {rail}")
                }
            },
            Statement::Gate {
                kind,
                inputs,
                outputs,
            } => {
                write!(f, "gate {}", kind.name())?;
                for input in inputs {
                    write!(f, " {input}")?;
                }
                write!(f, " ->")?;
                for output in outputs {
                    write!(f, " {output}")?;
                }
                Ok(())
            }
            Statement::Detect { qubit, basis } => write!(f, "detect {qubit} {basis}"),
            Statement::Measure { qubits, basis } => {
                f.write_str("measure")?;
                for qubit in qubits {
                    write!(f, " {qubit}")?;
                }
                write!(f, " {basis}")
            }
        }
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for spanned in &self.statements {
            writeln!(f, "{}", spanned.node)?;
        }
        Ok(())
    }
}

impl Circuit {
    /// Statement sequence without source positions, for comparing circuits
    /// that came from differently commented text.
    pub fn nodes(&self) -> Vec<&Statement> {
        self.statements.iter().map(|s| &s.node).collect()
    }
}

/// Three qubits folded pairwise onto one survivor carrying their joint
/// parity. Matches the bundled `parity3.loqc` when all bits are zero.
pub fn three_qubit_parity(bits: [u8; 3]) -> Circuit {
    let init = |bit: u8| {
        if bit == 0 {
            QubitInit::Zero
        } else {
            QubitInit::One
        }
    };
    let statements = vec![
        Statement::Qubit {
            label: "q0".into(),
            init: init(bits[0]),
        },
        Statement::Qubit {
            label: "q1".into(),
            init: init(bits[1]),
        },
        Statement::Qubit {
            label: "q2".into(),
            init: init(bits[2]),
        },
        Statement::Gate {
            kind: GateKind::Xor,
            inputs: vec!["q0".into(), "q1".into()],
            outputs: vec!["t1".into()],
        },
        Statement::Gate {
            kind: GateKind::Xor,
            inputs: vec!["t1".into(), "q2".into()],
            outputs: vec!["t2".into()],
        },
        Statement::Measure {
            qubits: vec!["t2".into()],
            basis: Basis::Hv,
        },
    ];
    Circuit {
        statements: statements
            .into_iter()
            .enumerate()
            .map(|(i, node)| Spanned { line: i + 1, node })
            .collect(),
    }
}
