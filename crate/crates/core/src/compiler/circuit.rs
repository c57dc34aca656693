//! Line-oriented circuit programs.
//!
//! ```text
//! # comment
//! wires 2
//! rz 0 pi/4
//! rx 1 -0.25
//! cz 0 1
//! id 1
//! ```
//!
//! Angles are radians: a decimal literal, or a multiple of `pi` written as
//! `[-][N*]pi[/D]`.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, ParseError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "form")]
pub enum Angle {
    /// `num * pi / den`.
    PiFraction { num: i64, den: u64 },
    Radians { value: f64 },
}

impl Angle {
    pub fn radians(&self) -> f64 {
        match *self {
            Angle::PiFraction { num, den } => num as f64 * PI / den as f64,
            Angle::Radians { value } => value,
        }
    }

    pub fn from_radians(value: f64) -> Self {
        Angle::Radians { value }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Angle::PiFraction { num, den } => {
                match num {
                    1 => write!(f, "pi")?,
                    -1 => write!(f, "-pi")?,
                    n => write!(f, "{n}*pi")?,
                }
                if den != 1 {
                    write!(f, "/{den}")?;
                }
                Ok(())
            }
            Angle::Radians { value } => write!(f, "{value:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "gate")]
pub enum Gate {
    RotZ { wire: usize, angle: Angle },
    RotX { wire: usize, angle: Angle },
    Cz { a: usize, b: usize },
    Identity { wire: usize },
}

impl Gate {
    pub fn wires(&self) -> Vec<usize> {
        match *self {
            Gate::RotZ { wire, .. } | Gate::RotX { wire, .. } | Gate::Identity { wire } => vec![wire],
            Gate::Cz { a, b } => vec![a, b],
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::RotZ { wire, angle } => write!(f, "rz {wire} {angle}"),
            Gate::RotX { wire, angle } => write!(f, "rx {wire} {angle}"),
            Gate::Cz { a, b } => write!(f, "cz {a} {b}"),
            Gate::Identity { wire } => write!(f, "id {wire}"),
        }
    }
}

/// A circuit on `wire_count` qubits starting in `|0...0>` and ending with a
/// computational-basis readout of every wire.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircuitIR {
    pub wire_count: usize,
    pub gates: Vec<Gate>,
}

impl CircuitIR {
    pub fn new(wire_count: usize) -> Self {
        Self {
            wire_count,
            gates: Vec::new(),
        }
    }

    pub fn cz_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Cz { .. })).count()
    }
}

impl fmt::Display for CircuitIR {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "wires {}", self.wire_count)?;
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

pub fn print_circuit(ir: &CircuitIR) -> String {
    ir.to_string()
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &line[s..i],
                    column: line[..s].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            column: line[..s].chars().count() + 1,
        });
    }
    out
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse(ParseError {
        line,
        column,
        message: message.into(),
    })
}

fn parse_wire(tok: &Token, line: usize, wires: usize) -> Result<usize> {
    let w: usize = tok
        .text
        .parse()
        .map_err(|_| err(line, tok.column, format!("expected a wire index, found `{}`", tok.text)))?;
    if w >= wires {
        return Err(err(
            line,
            tok.column,
            format!("wire {w} out of range for {wires} wire(s)"),
        ));
    }
    Ok(w)
}

fn parse_angle(tok: &Token, line: usize) -> Result<Angle> {
    let bad = || err(line, tok.column, format!("malformed angle `{}`", tok.text));
    let text = tok.text;
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    if let Some(pi_at) = body.find("pi") {
        let (coef, rest) = body.split_at(pi_at);
        let rest = &rest[2..];
        let den: u64 = match rest.strip_prefix('/') {
            Some(d) if !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()) => {
                d.parse().map_err(|_| bad())?
            }
            Some(_) => return Err(bad()),
            None if rest.is_empty() => 1,
            None => return Err(bad()),
        };
        if den == 0 {
            return Err(err(line, tok.column, "angle denominator is zero"));
        }
        let coef = match coef {
            "" => None,
            c => Some(c.strip_suffix('*').ok_or_else(bad)?),
        };
        return match coef {
            None => Ok(Angle::PiFraction {
                num: if negative { -1 } else { 1 },
                den,
            }),
            Some(c) if !c.is_empty() && c.bytes().all(|b| b.is_ascii_digit()) => {
                let n: i64 = c.parse().map_err(|_| bad())?;
                Ok(Angle::PiFraction {
                    num: if negative { -n } else { n },
                    den,
                })
            }
            Some(c) => {
                let x: f64 = c.parse().map_err(|_| bad())?;
                if !x.is_finite() || c.starts_with(['+', '-']) {
                    return Err(bad());
                }
                let v = x * PI / den as f64;
                Ok(Angle::from_radians(if negative { -v } else { v }))
            }
        };
    }
    let ok_chars = body
        .bytes()
        .all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'e' | b'E' | b'+' | b'-'));
    if body.is_empty() || !ok_chars || !body.as_bytes()[0].is_ascii_digit() && body.as_bytes()[0] != b'.' {
        return Err(bad());
    }
    let v: f64 = text.parse().map_err(|_| bad())?;
    if !v.is_finite() {
        return Err(err(line, tok.column, "angle is not finite"));
    }
    Ok(Angle::from_radians(v))
}

/// Parses a circuit program. Errors carry 1-based line and column.
pub fn parse_circuit(text: &str) -> Result<CircuitIR> {
    let mut ir: Option<CircuitIR> = None;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let code = raw.split('#').next().unwrap_or("");
        let toks = tokens(code);
        let Some(head) = toks.first() else { continue };
        let arity = |n: usize| -> Result<()> {
            if toks.len() < n + 1 {
                let col = code.trim_end().chars().count() + 1;
                return Err(err(line, col, format!("`{}` expects {n} operand(s)", head.text)));
            }
            if let Some(extra) = toks.get(n + 1) {
                return Err(err(line, extra.column, format!("unexpected `{}`", extra.text)));
            }
            Ok(())
        };
        let Some(circuit) = ir.as_mut() else {
            if head.text != "wires" {
                return Err(err(line, head.column, "program must start with `wires N`"));
            }
            arity(1)?;
            let n: usize = toks[1].text.parse().map_err(|_| {
                err(line, toks[1].column, format!("expected a wire count, found `{}`", toks[1].text))
            })?;
            if n == 0 {
                return Err(err(line, toks[1].column, "wire count must be positive"));
            }
            ir = Some(CircuitIR::new(n));
            continue;
        };
        let wires = circuit.wire_count;
        let gate = match head.text {
            "wires" => return Err(err(line, head.column, "`wires` declared twice")),
            "rz" | "rx" => {
                arity(2)?;
                let wire = parse_wire(&toks[1], line, wires)?;
                let angle = parse_angle(&toks[2], line)?;
                if head.text == "rz" {
                    Gate::RotZ { wire, angle }
                } else {
                    Gate::RotX { wire, angle }
                }
            }
            "cz" => {
                arity(2)?;
                let a = parse_wire(&toks[1], line, wires)?;
                let b = parse_wire(&toks[2], line, wires)?;
                if a == b {
                    return Err(Error::Semantic(ParseError {
                        line,
                        column: toks[2].column,
                        message: format!("cz needs two distinct wires, got {a} twice"),
                    }));
                }
                if a.abs_diff(b) != 1 {
                    return Err(Error::Semantic(ParseError {
                        line,
                        column: toks[1].column,
                        message: format!("cz between non-adjacent wires {a} and {b}"),
                    }));
                }
                Gate::Cz { a, b }
            }
            "id" => {
                arity(1)?;
                Gate::Identity {
                    wire: parse_wire(&toks[1], line, wires)?,
                }
            }
            other => return Err(err(line, head.column, format!("unknown mnemonic `{other}`"))),
        };
        circuit.gates.push(gate);
    }
    ir.ok_or_else(|| err(last_line.max(1), 1, "missing `wires N` declaration"))
}
