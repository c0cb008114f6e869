//! Line-oriented circuit text format.
//!
//! ```text
//! # comment
//! QUBITS 2
//! RY(0.5) 2
//! CNOT 1 2
//! UNITARY 1 :
//! 1.0,0.0 0.0,0.0
//! 0.0,0.0 1.0,0.0
//! KRAUS(2) 1 : dissipation 1.0 0.05
//! 1.0,0.0 0.0,0.0
//! 0.0,0.0 0.8187307530779818,0.0
//! 0.0,0.0 0.574,0.0
//! 0.0,0.0 0.0,0.0
//! MEASURE_DISCARD 2
//! ```
//!
//! Qubits are 1-based. Real numbers use the shortest representation that
//! parses back to the same `f64`, so export followed by parse is lossless.
//! Complex entries are written `re,im`; matrix rows are one per line.

use std::fmt::Write as _;

use crate::channels::{KrausChannel, Provenance};
use crate::error::{Error, Result};
use crate::qcore::{CMatrix, C64};

use super::{Gate, Instruction, Program};

fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn fmt_c64(z: C64) -> String {
    format!("{:?},{:?}", z.re, z.im)
}

fn write_matrix(out: &mut String, m: &CMatrix) {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| fmt_c64(m[(i, j)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
}

fn provenance_tokens(p: &Provenance) -> String {
    match p {
        Provenance::Angles { upsilon, mu } => format!("angles {} {}", fmt_f64(*upsilon), fmt_f64(*mu)),
        Provenance::Dissipation { rate, time } => format!("dissipation {} {}", fmt_f64(*rate), fmt_f64(*time)),
        Provenance::DephasingPaper { rate, time } => {
            format!("dephasing-paper {} {}", fmt_f64(*rate), fmt_f64(*time))
        }
        Provenance::DephasingCorrected { rate, time } => {
            format!("dephasing-corrected {} {}", fmt_f64(*rate), fmt_f64(*time))
        }
        Provenance::Custom => "custom".to_string(),
    }
}

/// Header line of one instruction (matrix rows of `UNITARY` / `KRAUS` follow it).
pub fn instruction_header(ins: &Instruction) -> String {
    match ins {
        Instruction::Gate(g) => {
            let qubits: Vec<String> = g.qubits().iter().map(usize::to_string).collect();
            let qubits = qubits.join(" ");
            match g {
                Gate::Rx(t, _) | Gate::Ry(t, _) | Gate::Rz(t, _) | Gate::Cphase(t, ..) => {
                    format!("{}({}) {qubits}", g.name(), fmt_f64(*t))
                }
                Gate::Unitary { .. } => format!("UNITARY {qubits} :"),
                _ => format!("{} {qubits}", g.name()),
            }
        }
        Instruction::Kraus { channel, qubit } => {
            format!(
                "KRAUS({}) {qubit} : {}",
                channel.ops().len(),
                provenance_tokens(channel.provenance())
            )
        }
        Instruction::MeasureDiscard(q) => format!("MEASURE_DISCARD {q}"),
    }
}

pub fn export_text(p: &Program) -> String {
    let mut out = format!("QUBITS {}\n", p.n_qubits());
    for ins in p.instructions() {
        out.push_str(&instruction_header(ins));
        out.push('\n');
        match ins {
            Instruction::Gate(Gate::Unitary { matrix, .. }) => write_matrix(&mut out, matrix),
            Instruction::Kraus { channel, .. } => {
                for k in channel.ops() {
                    write_matrix(&mut out, k);
                }
            }
            _ => {}
        }
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-blank, non-comment line with its 1-based number.
    fn next_content(&mut self) -> Option<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            let t = line.trim();
            if !t.is_empty() && !t.starts_with('#') {
                return Some((i + 1, t));
            }
        }
        None
    }
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_f64(line: usize, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| perr(line, format!("`{s}` is not a number")))
}

fn parse_usize(line: usize, s: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| perr(line, format!("`{s}` is not a qubit index")))
}

fn parse_c64(line: usize, s: &str) -> Result<C64> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| perr(line, format!("`{s}` is not a complex entry `re,im`")))?;
    Ok(C64::new(parse_f64(line, re)?, parse_f64(line, im)?))
}

fn read_matrix(lines: &mut Lines<'_>, dim: usize, header_line: usize) -> Result<CMatrix> {
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        let (ln, row) = lines
            .next_content()
            .ok_or_else(|| perr(header_line, format!("expected {dim} matrix rows")))?;
        let entries: Vec<&str> = row.split_whitespace().collect();
        if entries.len() != dim {
            return Err(perr(ln, format!("expected {dim} entries, found {}", entries.len())));
        }
        for (j, e) in entries.iter().enumerate() {
            m[(i, j)] = parse_c64(ln, e)?;
        }
    }
    Ok(m)
}

/// Splits `NAME(arg)` into `("NAME", Some("arg"))`.
fn split_name(line: usize, token: &str) -> Result<(&str, Option<&str>)> {
    match token.split_once('(') {
        None => Ok((token, None)),
        Some((name, rest)) => {
            let arg = rest
                .strip_suffix(')')
                .ok_or_else(|| perr(line, format!("unbalanced parenthesis in `{token}`")))?;
            Ok((name, Some(arg)))
        }
    }
}

fn parse_provenance(line: usize, tokens: &[&str]) -> Result<Provenance> {
    let pair = |t: &[&str]| -> Result<(f64, f64)> {
        match t {
            [a, b] => Ok((parse_f64(line, a)?, parse_f64(line, b)?)),
            _ => Err(perr(line, "provenance takes two numbers")),
        }
    };
    match tokens.split_first() {
        Some((&"angles", rest)) => pair(rest).map(|(upsilon, mu)| Provenance::Angles { upsilon, mu }),
        Some((&"dissipation", rest)) => pair(rest).map(|(rate, time)| Provenance::Dissipation { rate, time }),
        Some((&"dephasing-paper", rest)) => pair(rest).map(|(rate, time)| Provenance::DephasingPaper { rate, time }),
        Some((&"dephasing-corrected", rest)) => {
            pair(rest).map(|(rate, time)| Provenance::DephasingCorrected { rate, time })
        }
        Some((&"custom", [])) | None => Ok(Provenance::Custom),
        Some((other, _)) => Err(perr(line, format!("unknown channel provenance `{other}`"))),
    }
}

pub fn parse_text(text: &str) -> Result<Program> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (ln, header) = lines.next_content().ok_or_else(|| perr(0, "empty circuit"))?;
    let n = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["QUBITS", n] => parse_usize(ln, n)?,
        _ => return Err(perr(ln, "circuit must start with `QUBITS <n>`")),
    };
    let mut program = Program::new(n);
    while let Some((ln, line)) = lines.next_content() {
        let (head, tail) = match line.split_once(':') {
            Some((h, t)) => (h.trim(), Some(t.trim())),
            None => (line, None),
        };
        let mut tokens = head.split_whitespace();
        let first = tokens.next().ok_or_else(|| perr(ln, "empty instruction"))?;
        let qubits = tokens.map(|t| parse_usize(ln, t)).collect::<Result<Vec<_>>>()?;
        let (name, arg) = split_name(ln, first)?;
        let angle = || -> Result<f64> { parse_f64(ln, arg.ok_or_else(|| perr(ln, format!("{name} needs an angle")))?) };
        let one = |q: &[usize]| -> Result<usize> {
            match q {
                [a] => Ok(*a),
                _ => Err(perr(ln, format!("{name} takes one qubit"))),
            }
        };
        let two = |q: &[usize]| -> Result<(usize, usize)> {
            match q {
                [a, b] => Ok((*a, *b)),
                _ => Err(perr(ln, format!("{name} takes two qubits"))),
            }
        };
        let ins: Instruction = match name {
            "X" => Gate::X(one(&qubits)?).into(),
            "H" => Gate::H(one(&qubits)?).into(),
            "RX" => Gate::Rx(angle()?, one(&qubits)?).into(),
            "RY" => Gate::Ry(angle()?, one(&qubits)?).into(),
            "RZ" => Gate::Rz(angle()?, one(&qubits)?).into(),
            "CZ" => {
                let (a, b) = two(&qubits)?;
                Gate::Cz(a, b).into()
            }
            "CNOT" => {
                let (control, target) = two(&qubits)?;
                Gate::Cnot { control, target }.into()
            }
            "CPHASE" => {
                let (a, b) = two(&qubits)?;
                Gate::Cphase(angle()?, a, b).into()
            }
            "UNITARY" => {
                if tail.is_none() || qubits.is_empty() || qubits.len() > 16 {
                    return Err(perr(ln, "expected `UNITARY q… :`"));
                }
                let matrix = read_matrix(&mut lines, 1 << qubits.len(), ln)?;
                Gate::Unitary { matrix, qubits }.into()
            }
            "KRAUS" => {
                let count: usize = parse_usize(ln, arg.ok_or_else(|| perr(ln, "KRAUS needs an operator count"))?)?;
                let qubit = one(&qubits)?;
                let tail = tail.ok_or_else(|| perr(ln, "expected `KRAUS(k) q : provenance`"))?;
                let provenance = parse_provenance(ln, &tail.split_whitespace().collect::<Vec<_>>())?;
                let ops = (0..count)
                    .map(|_| read_matrix(&mut lines, 2, ln))
                    .collect::<Result<Vec<_>>>()?;
                Instruction::Kraus {
                    channel: KrausChannel::new(ops, provenance)?,
                    qubit,
                }
            }
            "MEASURE_DISCARD" => Instruction::MeasureDiscard(one(&qubits)?),
            other => return Err(perr(ln, format!("unknown instruction `{other}`"))),
        };
        program.push(ins).map_err(|e| perr(ln, e.to_string()))?;
    }
    Ok(program)
}
