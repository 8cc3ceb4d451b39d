//! Line-oriented parser with collected diagnostics.
//!
//! Each line holds at most one statement; `#` starts a comment. Parsing
//! never aborts on the first problem: diagnostics accumulate with line and
//! column positions until the cap, and a circuit is only returned when the
//! source is clean.

use super::ast::{
    Basis, Circuit, CircuitElement, GateKind, QubitInit, Rail, RailRef, Spanned, Statement,
};

/// Parsing and elaboration stop collecting after this many problems.
pub const MAX_DIAGNOSTICS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagnosticCategory {
    Syntax,
    UnknownKeyword,
    BadNumber,
    DuplicateLabel,
    UnresolvedLabel,
}

impl std::fmt::Display for DiagnosticCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DiagnosticCategory::Syntax => "syntax",
            DiagnosticCategory::UnknownKeyword => "unknown-keyword",
            DiagnosticCategory::BadNumber => "bad-number",
            DiagnosticCategory::DuplicateLabel => "duplicate-label",
            DiagnosticCategory::UnresolvedLabel => "unresolved-label",
        })
    }
}

/// One problem in the source, with 1-based line and column.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub category: DiagnosticCategory,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "line {}:{}: {}: {}",
            self.line, self.column, self.category, self.message
        )
    }
}

#[derive(Clone, Copy)]
struct Token<'a> {
    column: usize,
    text: &'a str,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let body = match line.find('#') {
        Some(idx) => &line[..idx],
        None => line,
    };
    let mut tokens = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (column, (byte, ch)) in body.char_indices().enumerate() {
        if ch.is_whitespace() {
            if let Some((begin_col, begin_byte)) = start.take() {
                tokens.push(Token {
                    column: begin_col + 1,
                    text: &body[begin_byte..byte],
                });
            }
        } else if start.is_none() {
            start = Some((column, byte));
        }
    }
    if let Some((begin_col, begin_byte)) = start {
        tokens.push(Token {
            column: begin_col + 1,
            text: &body[begin_byte..],
        });
    }
    tokens
}

struct Cursor<'a> {
    line: usize,
    tokens: Vec<Token<'a>>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn next(&mut self) -> Option<Token<'a>> {
        let token = self.tokens.get(self.pos).copied();
        if token.is_some() {
            self.pos += 1;
        }
        token
    }

    fn peek_column(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|t| t.column)
            .unwrap_or_else(|| {
                self.tokens
                    .last()
                    .map(|t| t.column + t.text.chars().count())
                    .unwrap_or(1)
            })
    }

    fn require(&mut self, what: &str) -> Result<(usize, &'a str), Diagnostic> {
        let column = self.peek_column();
        match self.next() {
            Some(token) => Ok((token.column, token.text)),
            None => Err(Diagnostic {
                line: self.line,
                column,
                category: DiagnosticCategory::Syntax,
                message: format!("missing {what}"),
            }),
        }
    }

    fn finish(&mut self) -> Result<(), Diagnostic> {
        match self.next() {
            None => Ok(()),
            Some(token) => Err(Diagnostic {
                line: self.line,
                column: token.column,
                category: DiagnosticCategory::Syntax,
                message: format!("unexpected trailing token `{}`", token.text),
            }),
        }
    }

    fn error(
        &self,
        column: usize,
        category: DiagnosticCategory,
        message: String,
    ) -> Diagnostic {
        Diagnostic {
            line: self.line,
            column,
            category,
            message,
        }
    }
}

fn parse_label(cursor: &Cursor<'_>, column: usize, text: &str) -> Result<String, Diagnostic> {
    let mut chars = text.chars();
    let head_ok = chars
        .next()
        .map(|c| c.is_alphabetic() || c == '_')
        .unwrap_or(false);
    if head_ok && chars.all(|c| c.is_alphanumeric() || c == '_') {
        Ok(text.to_string())
    } else {
        Err(cursor.error(
            column,
            DiagnosticCategory::Syntax,
            format!("`{text}` is not a valid label"),
        ))
    }
}

fn parse_number(cursor: &Cursor<'_>, column: usize, text: &str) -> Result<f64, Diagnostic> {
    match text.parse::<f64>() {
        Ok(value) if value.is_finite() => Ok(value),
        _ => Err(cursor.error(
            column,
            DiagnosticCategory::BadNumber,
            format!("cannot read `{text}` as a number"),
        )),
    }
}

fn parse_rail_ref(cursor: &Cursor<'_>, column: usize, text: &str) -> Result<RailRef, Diagnostic> {
    let Some((label, rail)) = text.rsplit_once('.') else {
        return Err(cursor.error(
            column,
            DiagnosticCategory::Syntax,
            format!("`{text}` must name a rail, like `{text}.h`"),
        ));
    };
    let rail = match rail {
        "h" => Rail::H,
        "v" => Rail::V,
        other => {
            return Err(cursor.error(
                column,
                DiagnosticCategory::Syntax,
                format!("rail must be h or v, got `{other}`"),
            ))
        }
    };
    Ok(RailRef {
        qubit: parse_label(cursor, column, label)?,
        rail,
    })
}

/// A whole-qubit reference; a rail suffix is tolerated and stripped.
fn parse_qubit_ref(cursor: &Cursor<'_>, column: usize, text: &str) -> Result<String, Diagnostic> {
    match text.rsplit_once('.') {
        Some(_) => Ok(parse_rail_ref(cursor, column, text)?.qubit),
        None => parse_label(cursor, column, text),
    }
}

fn parse_basis(cursor: &Cursor<'_>, column: usize, text: &str) -> Result<Basis, Diagnostic> {
    match text {
        "hv" => Ok(Basis::Hv),
        "diag" => Ok(Basis::Diag),
        _ if text.starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '+' || c == '.') => {
            Ok(Basis::Angle(parse_number(cursor, column, text)?))
        }
        other => Err(cursor.error(
            column,
            DiagnosticCategory::UnknownKeyword,
            format!("unknown basis `{other}`"),
        )),
    }
}

fn parse_statement(cursor: &mut Cursor<'_>) -> Result<Statement, Diagnostic> {
    let (head_col, head) = cursor.require("a statement")?;
    match head {
        "qubit" => {
            let (col, text) = cursor.require("a qubit label")?;
            let label = parse_label(cursor, col, text)?;
            let init = match cursor.next() {
                None => QubitInit::Zero,
                Some(token) => match token.text {
                    "0" => QubitInit::Zero,
                    "1" => QubitInit::One,
                    "+" => QubitInit::Plus,
                    "-" => QubitInit::Minus,
                    other => {
                        return Err(cursor.error(
                            token.column,
                            DiagnosticCategory::Syntax,
                            format!("initial value must be 0, 1, + or -, got `{other}`"),
                        ))
                    }
                },
            };
            cursor.finish()?;
            Ok(Statement::Qubit { label, init })
        }
        "bell" => {
            let (col_a, text_a) = cursor.require("the first qubit label")?;
            let a = parse_label(cursor, col_a, text_a)?;
            let (col_b, text_b) = cursor.require("the second qubit label")?;
            let b = parse_label(cursor, col_b, text_b)?;
            cursor.finish()?;
            Ok(Statement::Bell { a, b })
        }
        "element" => {
            let (kind_col, kind) = cursor.require("an element name")?;
            let element = match kind {
                "bs" => {
                    let (col, text) = cursor.require("a reflectivity")?;
                    let reflectivity = parse_number(cursor, col, text)?;
                    let (col, text) = cursor.require("the first rail")?;
                    let a = parse_rail_ref(cursor, col, text)?;
                    let (col, text) = cursor.require("the second rail")?;
                    let b = parse_rail_ref(cursor, col, text)?;
                    CircuitElement::BeamSplitter { reflectivity, a, b }
                }
                "phase" => {
                    let (col, text) = cursor.require("a phase")?;
                    let phase = parse_number(cursor, col, text)?;
                    let (col, text) = cursor.require("a rail")?;
                    let rail = parse_rail_ref(cursor, col, text)?;
                    CircuitElement::Phase { phase, rail }
                }
                "rot" => {
                    let (col, text) = cursor.require("an angle")?;
                    let angle = parse_number(cursor, col, text)?;
                    let (col, text) = cursor.require("a qubit")?;
                    let qubit = parse_qubit_ref(cursor, col, text)?;
                    CircuitElement::Rotator { angle, qubit }
                }
                "pbs" => {
                    let (col, text) = cursor.require("the first qubit")?;
                    let a = parse_qubit_ref(cursor, col, text)?;
                    let (col, text) = cursor.require("the second qubit")?;
                    let b = parse_qubit_ref(cursor, col, text)?;
                    CircuitElement::Pbs { a, b }
                }
                "loss" => {
                    let (col, text) = cursor.require("a transmission")?;
                    let transmission = parse_number(cursor, col, text)?;
                    let (col, text) = cursor.require("a rail")?;
                    let rail = parse_rail_ref(cursor, col, text)?;
                    CircuitElement::Loss { transmission, rail }
                }
                other => {
                    return Err(cursor.error(
                        kind_col,
                        DiagnosticCategory::UnknownKeyword,
                        format!("unknown element `{other}`"),
                    ))
                }
            };
            cursor.finish()?;
            Ok(Statement::Element(element))
        }
        "gate" => {
            let (kind_col, kind_text) = cursor.require("a gate name")?;
            let kind = match kind_text {
                "parity" => GateKind::Parity,
                "xor" => GateKind::Xor,
                "encode" => GateKind::Encode,
                "cnot" => GateKind::Cnot,
                other => {
                    return Err(cursor.error(
                        kind_col,
                        DiagnosticCategory::UnknownKeyword,
                        format!("unknown gate `{other}`"),
                    ))
                }
            };
            let mut inputs = Vec::new();
            let arrow_col = loop {
                let (col, text) = cursor.require("`->`")?;
                if text == "->" {
                    break col;
                }
                inputs.push(parse_label(cursor, col, text)?);
            };
            let mut outputs = Vec::new();
            while let Some(token) = cursor.next() {
                let column = token.column;
                let text = token.text;
                outputs.push(parse_label(cursor, column, text)?);
            }
            if inputs.len() != kind.input_arity() || outputs.len() != kind.output_arity() {
                return Err(cursor.error(
                    arrow_col,
                    DiagnosticCategory::Syntax,
                    format!(
                        "gate {} takes {} inputs and {} outputs, got {} and {}",
                        kind.name(),
                        kind.input_arity(),
                        kind.output_arity(),
                        inputs.len(),
                        outputs.len()
                    ),
                ));
            }
            Ok(Statement::Gate {
                kind,
                inputs,
                outputs,
            })
        }
        "detect" => {
            let (col, text) = cursor.require("a qubit label")?;
            let qubit = parse_label(cursor, col, text)?;
            let (col, text) = cursor.require("a basis")?;
            let basis = parse_basis(cursor, col, text)?;
            cursor.finish()?;
            Ok(Statement::Detect { qubit, basis })
        }
        "measure" => {
            let mut refs = Vec::new();
            while let Some(token) = cursor.next() {
                refs.push((token.column, token.text));
            }
            if refs.len() < 2 {
                return Err(cursor.error(
                    head_col,
                    DiagnosticCategory::Syntax,
                    "measure needs at least one qubit and a basis".to_string(),
                ));
            }
            let (basis_col, basis_text) = refs.pop().unwrap();
            let basis = parse_basis(cursor, basis_col, basis_text)?;
            let qubits = refs
                .into_iter()
                .map(|(col, text)| parse_label(cursor, col, text))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Statement::Measure { qubits, basis })
        }
        other => Err(cursor.error(
            head_col,
            DiagnosticCategory::UnknownKeyword,
            format!("unknown statement `{other}`"),
        )),
    }
}

/// Parses a full source text. Returns the circuit only when no diagnostics
/// were produced; otherwise all collected problems, at most
/// `MAX_DIAGNOSTICS` of them.
pub fn parse_circuit(source: &str) -> Result<Circuit, Vec<Diagnostic>> {
    let mut statements = Vec::new();
    let mut diagnostics = Vec::new();
    for (index, raw) in source.lines().enumerate() {
        if diagnostics.len() >= MAX_DIAGNOSTICS {
            break;
        }
        let line = index + 1;
        let tokens = tokenize(raw);
        if tokens.is_empty() {
            continue;
        }
        let mut cursor = Cursor {
            line,
            tokens,
            pos: 0,
        };
        match parse_statement(&mut cursor) {
            Ok(node) => statements.push(Spanned { line, node }),
            Err(diagnostic) => diagnostics.push(diagnostic),
        }
    }
    if diagnostics.is_empty() {
        Ok(Circuit { statements })
    } else {
        diagnostics.truncate(MAX_DIAGNOSTICS);
        Err(diagnostics)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::ast::three_qubit_parity;

    #[test]
    fn parses_the_reference_parity_circuit() {
        let source = "\
# fold three bits into one
qubit q0
qubit q1
qubit q2
gate xor q0 q1 -> t1
gate xor t1 q2 -> t2
measure t2 hv
";
        let circuit = parse_circuit(source).unwrap();
        assert_eq!(circuit.nodes(), three_qubit_parity([0, 0, 0]).nodes());
    }

    #[test]
    fn printing_and_reparsing_is_stable() {
        let circuit = three_qubit_parity([1, 0, 1]);
        let printed = circuit.to_string();
        let reparsed = parse_circuit(&printed).unwrap();
        assert_eq!(reparsed, circuit);
    }

    #[test]
    fn element_statements_round_trip_with_their_parameters() {
        let source = "\
qubit a +
qubit b
element bs 0.25 a.h b.h
element phase 1.5 a.v
element rot 0.785 b
element pbs a b.h
element loss 0.9 b.v
measure a b hv
";
        let circuit = parse_circuit(source).unwrap();
        let reparsed = parse_circuit(&circuit.to_string()).unwrap();
        assert_eq!(circuit.nodes(), reparsed.nodes());
    }

    #[test]
    fn unknown_statement_heads_are_flagged_in_place() {
        let diagnostics = parse_circuit("qubit q0\nsplice q0\n").unwrap_err();
        assert_eq!(diagnostics.len(), 1);
        assert_eq!(diagnostics[0].line, 2);
        assert_eq!(diagnostics[0].column, 1);
        assert_eq!(diagnostics[0].category, DiagnosticCategory::UnknownKeyword);
    }

    #[test]
    fn malformed_numbers_point_at_the_token() {
        let diagnostics = parse_circuit("qubit q0\nelement phase fast q0.v\n").unwrap_err();
        assert_eq!(diagnostics[0].line, 2);
        assert_eq!(diagnostics[0].column, 15);
        assert_eq!(diagnostics[0].category, DiagnosticCategory::BadNumber);
    }

    #[test]
    fn missing_arrow_is_a_syntax_error() {
        let diagnostics = parse_circuit("gate xor a b\n").unwrap_err();
        assert_eq!(diagnostics[0].category, DiagnosticCategory::Syntax);
    }

    #[test]
    fn wrong_gate_arity_is_reported() {
        let diagnostics = parse_circuit("gate cnot a -> b\n").unwrap_err();
        assert_eq!(diagnostics[0].category, DiagnosticCategory::Syntax);
        assert!(diagnostics[0].message.contains("2 inputs"));
    }

    #[test]
    fn diagnostics_stop_at_the_cap() {
        let source = "bogus\n".repeat(25);
        let diagnostics = parse_circuit(&source).unwrap_err();
        assert_eq!(diagnostics.len(), MAX_DIAGNOSTICS);
    }

    #[test]
    fn comments_and_blank_lines_keep_line_numbers_honest() {
        let source = "\n# nothing\nqubit q0\n\nwat\n";
        let diagnostics = parse_circuit(source).unwrap_err();
        assert_eq!(diagnostics[0].line, 5);
    }

    #[test]
    fn angle_bases_parse_as_numbers() {
        let circuit = parse_circuit("qubit a\nmeasure a 0.5\n").unwrap();
        match &circuit.statements[1].node {
            crate::circuit::ast::Statement::Measure { basis, .. } => {
                assert_eq!(*basis, crate::circuit::ast::Basis::Angle(0.5));
            }
            other => panic!("expected measure, got {other:?}"),
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn numeric_parameters_survive_a_print_and_reparse(
                reflectivity in 0.0f64..=1.0,
                phase in -10.0f64..10.0,
            ) {
                let source = format!(
                    "qubit a\nqubit b\nelement bs {reflectivity} a.h b.h\n\
                     element phase {phase} a.v\nmeasure a b hv\n"
                );
                let circuit = parse_circuit(&source).unwrap();
                let reparsed = parse_circuit(&circuit.to_string()).unwrap();
                prop_assert_eq!(reparsed.nodes(), circuit.nodes());
            }
        }
    }
}
