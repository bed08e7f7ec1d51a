//! Reader and writer for the circuit text format, a small subset of
//! OpenQASM 2.0:
//!
//! ```text
//! // optional header
//! OPENQASM 2.0;
//! include "qelib1.inc";
//! qreg q[3];
//! h q[0];
//! cx q[0],q[2];
//! measure q[2];
//! ```
//!
//! `qreg` must appear exactly once, before any gate. Whitespace is
//! insignificant and `//` starts a comment running to the end of the line.

use std::fmt::{self, Write};

use super::{check_gate, Circuit, CircuitError, Gate, GateKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("qubit index {index} out of range for register of size {size}")]
    OperandOutOfRange { index: usize, size: usize },
    #[error("qubit {0} used after it was measured")]
    GateAfterMeasure(usize),
    #[error("gate operands must be distinct")]
    DuplicateOperand,
    #[error("expected a single `qreg` declaration before any gate")]
    MissingRegister,
    #[error("only one `qreg` declaration is allowed")]
    DuplicateRegister,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(usize),
    Real(String),
    Str(String),
    LBracket,
    RBracket,
    Comma,
    Semi,
    Arrow,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::Real(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Arrow => f.write_str("`->`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, msg: String| ParseError {
        line,
        column,
        kind: ParseErrorKind::Syntax(msg),
    };
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let tok = match c {
            '[' => {
                i += 1;
                col += 1;
                Tok::LBracket
            }
            ']' => {
                i += 1;
                col += 1;
                Tok::RBracket
            }
            ',' => {
                i += 1;
                col += 1;
                Tok::Comma
            }
            ';' => {
                i += 1;
                col += 1;
                Tok::Semi
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                i += 2;
                col += 2;
                Tok::Arrow
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                col += 1;
                loop {
                    match chars.get(i) {
                        None | Some('\n') => {
                            return Err(err(start_line, start_col, "unterminated string".into()))
                        }
                        Some('"') => {
                            i += 1;
                            col += 1;
                            break;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            i += 1;
                            col += 1;
                        }
                    }
                }
                Tok::Str(s)
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    s.push(chars[i]);
                    i += 1;
                    col += 1;
                }
                if s.contains('.') {
                    Tok::Real(s)
                } else {
                    Tok::Int(s.parse().map_err(|_| {
                        err(start_line, start_col, format!("integer `{s}` too large"))
                    })?)
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    s.push(chars[i]);
                    i += 1;
                    col += 1;
                }
                Tok::Ident(s)
            }
            other => return Err(err(line, col, format!("unexpected character `{other}`"))),
        };
        out.push(Spanned {
            tok,
            line: start_line,
            column: start_col,
        });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    eof: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map(|t| (t.line, t.column)).unwrap_or(self.eof)
    }

    fn error_here(&self, kind: ParseErrorKind) -> ParseError {
        let (line, column) = self.here();
        ParseError { line, column, kind }
    }

    fn next(&mut self, what: &str) -> Result<Spanned, ParseError> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => Err(self.error_here(ParseErrorKind::Syntax(format!(
                "expected {what}, found end of input"
            )))),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        let t = self.next(&tok.to_string())?;
        if t.tok == tok {
            Ok(())
        } else {
            Err(ParseError {
                line: t.line,
                column: t.column,
                kind: ParseErrorKind::Syntax(format!("expected {tok}, found {}", t.tok)),
            })
        }
    }

    fn ident(&mut self) -> Result<Spanned, ParseError> {
        let t = self.next("identifier")?;
        match &t.tok {
            Tok::Ident(_) => Ok(t),
            other => Err(ParseError {
                line: t.line,
                column: t.column,
                kind: ParseErrorKind::Syntax(format!("expected identifier, found {other}")),
            }),
        }
    }

    fn int(&mut self) -> Result<usize, ParseError> {
        let t = self.next("integer")?;
        match t.tok {
            Tok::Int(v) => Ok(v),
            other => Err(ParseError {
                line: t.line,
                column: t.column,
                kind: ParseErrorKind::Syntax(format!("expected integer, found {other}")),
            }),
        }
    }

    /// `name[index]`, resolved against the declared register.
    fn operand(&mut self, reg: &str, size: usize) -> Result<usize, ParseError> {
        let name = self.ident()?;
        let Tok::Ident(n) = &name.tok else { unreachable!() };
        if n != reg {
            return Err(ParseError {
                line: name.line,
                column: name.column,
                kind: ParseErrorKind::UnknownRegister(n.clone()),
            });
        }
        self.expect(Tok::LBracket)?;
        let (line, column) = self.here();
        let index = self.int()?;
        self.expect(Tok::RBracket)?;
        if index >= size {
            return Err(ParseError {
                line,
                column,
                kind: ParseErrorKind::OperandOutOfRange { index, size },
            });
        }
        Ok(index)
    }
}

/// Parses circuit text into a validated [`Circuit`].
pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let toks = lex(text)?;
    let eof = match text.lines().count() {
        0 => (1, 1),
        n => (n, text.lines().last().map_or(0, |l| l.chars().count()) + 1),
    };
    let mut p = Parser { toks, pos: 0, eof };
    let mut register: Option<(String, usize)> = None;
    let mut gates = Vec::new();
    let mut measured = Vec::new();

    while let Some(first) = p.peek().cloned() {
        let Tok::Ident(word) = &first.tok else {
            return Err(p.error_here(ParseErrorKind::Syntax(format!(
                "expected a statement, found {}",
                first.tok
            ))));
        };
        match word.as_str() {
            "OPENQASM" if register.is_none() && gates.is_empty() => {
                p.pos += 1;
                let t = p.next("version")?;
                if !matches!(t.tok, Tok::Real(_) | Tok::Int(_)) {
                    return Err(ParseError {
                        line: t.line,
                        column: t.column,
                        kind: ParseErrorKind::Syntax("expected version number".into()),
                    });
                }
                p.expect(Tok::Semi)?;
            }
            "include" if register.is_none() => {
                p.pos += 1;
                let t = p.next("file name")?;
                if !matches!(t.tok, Tok::Str(_)) {
                    return Err(ParseError {
                        line: t.line,
                        column: t.column,
                        kind: ParseErrorKind::Syntax("expected quoted file name".into()),
                    });
                }
                p.expect(Tok::Semi)?;
            }
            "qreg" => {
                if register.is_some() {
                    return Err(p.error_here(ParseErrorKind::DuplicateRegister));
                }
                p.pos += 1;
                let name = p.ident()?;
                let Tok::Ident(name) = name.tok else { unreachable!() };
                p.expect(Tok::LBracket)?;
                let size = p.int()?;
                p.expect(Tok::RBracket)?;
                p.expect(Tok::Semi)?;
                measured = vec![false; size];
                register = Some((name, size));
            }
            name => {
                let Some((reg, size)) = register.as_ref() else {
                    return Err(p.error_here(ParseErrorKind::MissingRegister));
                };
                let Some(kind) = GateKind::from_name(name) else {
                    return Err(p.error_here(ParseErrorKind::UnknownGate(name.to_string())));
                };
                p.pos += 1;
                let mut ops = vec![p.operand(reg, *size)?];
                if kind == GateKind::Cx {
                    p.expect(Tok::Comma)?;
                    ops.push(p.operand(reg, *size)?);
                }
                p.expect(Tok::Semi)?;
                let gate = Gate::new(kind, &ops).map_err(|_| ParseError {
                    line: first.line,
                    column: first.column,
                    kind: ParseErrorKind::DuplicateOperand,
                })?;
                check_gate(gates.len(), &gate, *size, &mut measured).map_err(|e| {
                    let kind = match e {
                        CircuitError::GateAfterMeasure { qubit, .. } => {
                            ParseErrorKind::GateAfterMeasure(qubit)
                        }
                        other => ParseErrorKind::Syntax(other.to_string()),
                    };
                    ParseError {
                        line: first.line,
                        column: first.column,
                        kind,
                    }
                })?;
                gates.push(gate);
            }
        }
    }

    let Some((_, size)) = register else {
        return Err(p.error_here(ParseErrorKind::MissingRegister));
    };
    Ok(Circuit {
        num_qubits: size,
        gates,
    })
}

/// Renders a circuit in the text format accepted by [`parse_circuit`].
pub fn emit_circuit(c: &Circuit) -> String {
    let mut out = String::with_capacity(16 * (c.len() + 1));
    writeln!(out, "qreg q[{}];", c.num_qubits()).unwrap();
    for g in c.gates() {
        writeln!(out, "{g};").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_cx() {
        let c = parse_circuit("qreg q[3]; cx q[0],q[2];").unwrap();
        assert_eq!(c.num_qubits(), 3);
        assert_eq!(c.gates(), &[Gate::cx(0, 2)]);
    }

    #[test]
    fn parses_h_then_measure() {
        let c = parse_circuit("qreg q[1]; h q[0]; measure q[0];").unwrap();
        assert_eq!(c.gates(), &[Gate::h(0), Gate::measure(0)]);
    }

    #[test]
    fn rejects_gate_after_measure() {
        let e = parse_circuit("qreg q[2]; measure q[0]; h q[0];").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::GateAfterMeasure(0));
        assert_eq!((e.line, e.column), (1, 26));
    }

    #[test]
    fn accepts_header_comments_and_whitespace() {
        let text = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n// register\nqreg  q [ 2 ] ;\n\
                    sdg q[1]; // trailing\n  cx   q[1] , q[0];\n";
        let c = parse_circuit(text).unwrap();
        assert_eq!(c.gates(), &[Gate::sdg(1), Gate::cx(1, 0)]);
    }

    #[test]
    fn reports_positions_for_errors() {
        let e = parse_circuit("qreg q[2];\nccx q[0],q[1];").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownGate("ccx".into()));
        assert_eq!((e.line, e.column), (2, 1));

        let e = parse_circuit("qreg q[2];\nh q[5];").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::OperandOutOfRange { index: 5, size: 2 });
        assert_eq!((e.line, e.column), (2, 5));

        let e = parse_circuit("qreg q[2];\nh q[0]").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));

        let e = parse_circuit("h q[0];").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::MissingRegister);

        let e = parse_circuit("qreg q[2]; qreg r[2];").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::DuplicateRegister);

        let e = parse_circuit("qreg q[2]; h r[0];").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownRegister("r".into()));

        let e = parse_circuit("qreg q[2]; cx q[1],q[1];").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::DuplicateOperand);

        let e = parse_circuit("qreg q[2]; h q[0]; $").unwrap_err();
        assert_eq!((e.line, e.column), (1, 20));
    }

    #[test]
    fn empty_program_needs_register() {
        assert!(parse_circuit("").is_err());
        assert_eq!(parse_circuit("qreg q[0];").unwrap().num_qubits(), 0);
    }

    #[test]
    fn emit_then_parse_is_identity() {
        let c = Circuit::new(
            3,
            vec![Gate::h(0), Gate::t(1), Gate::cx(2, 0), Gate::tdg(2), Gate::measure(1)],
        )
        .unwrap();
        assert_eq!(parse_circuit(&emit_circuit(&c)).unwrap(), c);
    }
}
