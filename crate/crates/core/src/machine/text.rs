//! Line-oriented machine-program text format.
//!
//! ```text
//! MACHINE_PROGRAM 1
//! ARRAY moving_rows=<int> cells=<int> module=<int> flat=<bool> parallelism=<full|chain>
//! QUBITS <addr> <addr> ...
//! PREP <X|Z> <addr>...
//! MEASURE <X|Z> <addr>...
//! MEASURE_RESET <X|Z> <addr>...
//! GATE1 <H|S|S_DAG|X|Y|Z> <addr>
//! GATE2 <CX|CY|CZ> <control> <target>
//! SHIFT <row> <s>
//! INTRA_SHIFT <row>:<module> <s>
//! END_LAYER
//! ```
//!
//! An address is `row:module:slot`. Every layer, including the last, is
//! terminated by `END_LAYER`. Blank lines and lines starting with `#` are
//! ignored.

use std::fmt::Write as _;

use super::{ArrayConfig, Gate1, Gate2, Instruction, MachineProgram, Parallelism, QubitAddr};
use crate::code::Basis;
use crate::error::{Error, Result};

pub fn write_program(program: &MachineProgram) -> String {
    let c = &program.config;
    let mut out = String::new();
    out.push_str("MACHINE_PROGRAM 1\n");
    let par = match c.parallelism {
        Parallelism::Full => "full",
        Parallelism::ChainSequential => "chain",
    };
    writeln!(
        out,
        "ARRAY moving_rows={} cells={} module={} flat={} parallelism={par}",
        c.moving_rows, c.cells, c.module_size, c.flat
    )
    .unwrap();
    out.push_str("QUBITS");
    for q in &program.qubits {
        write!(out, " {q}").unwrap();
    }
    out.push('\n');
    for layer in &program.layers {
        for ins in layer {
            match ins {
                Instruction::Prep { basis, targets } => {
                    write!(out, "PREP {basis}").unwrap();
                    targets.iter().for_each(|t| write!(out, " {t}").unwrap());
                }
                Instruction::Measure { basis, reset, targets } => {
                    let op = if *reset { "MEASURE_RESET" } else { "MEASURE" };
                    write!(out, "{op} {basis}").unwrap();
                    targets.iter().for_each(|t| write!(out, " {t}").unwrap());
                }
                Instruction::Gate1 { kind, target } => write!(out, "GATE1 {} {target}", kind.name()).unwrap(),
                Instruction::Gate2 { kind, control, target } => {
                    write!(out, "GATE2 {} {control} {target}", kind.name()).unwrap()
                }
                Instruction::Shift { row, s } => write!(out, "SHIFT {row} {s}").unwrap(),
                Instruction::IntraShift { row, module, s } => write!(out, "INTRA_SHIFT {row}:{module} {s}").unwrap(),
            }
            out.push('\n');
        }
        out.push_str("END_LAYER\n");
    }
    out
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_addr(line: usize, s: &str) -> Result<QubitAddr> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(perr(line, format!("bad address `{s}`")));
    }
    let n = |p: &str| p.parse::<usize>().map_err(|_| perr(line, format!("bad address `{s}`")));
    Ok(QubitAddr::new(n(parts[0])?, n(parts[1])?, n(parts[2])?))
}

fn parse_num<T: std::str::FromStr>(line: usize, s: Option<&str>, what: &str) -> Result<T> {
    s.and_then(|v| v.parse().ok()).ok_or_else(|| perr(line, format!("expected {what}")))
}

fn parse_basis(line: usize, s: Option<&str>) -> Result<Basis> {
    match s {
        Some("X") => Ok(Basis::X),
        Some("Z") => Ok(Basis::Z),
        _ => Err(perr(line, "expected basis X or Z")),
    }
}

fn parse_config(line: usize, fields: &[&str]) -> Result<ArrayConfig> {
    let get = |key: &str| -> Result<&str> {
        fields
            .iter()
            .find_map(|f| f.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
            .ok_or_else(|| perr(line, format!("missing `{key}`")))
    };
    let moving_rows = parse_num(line, Some(get("moving_rows")?), "moving_rows")?;
    let cells = parse_num(line, Some(get("cells")?), "cells")?;
    let module_size = parse_num(line, Some(get("module")?), "module")?;
    let flat = parse_num(line, Some(get("flat")?), "flat")?;
    let parallelism = match get("parallelism")? {
        "full" => Parallelism::Full,
        "chain" => Parallelism::ChainSequential,
        other => return Err(perr(line, format!("unknown parallelism `{other}`"))),
    };
    Ok(ArrayConfig { moving_rows, cells, module_size, flat, parallelism })
}

pub fn parse_program(text: &str) -> Result<MachineProgram> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (ln, header) = lines.next().ok_or_else(|| perr(0, "empty input"))?;
    if header != "MACHINE_PROGRAM 1" {
        return Err(perr(ln, "expected `MACHINE_PROGRAM 1`"));
    }
    let (ln, array) = lines.next().ok_or_else(|| perr(ln, "missing ARRAY line"))?;
    let fields: Vec<&str> = array.split_whitespace().collect();
    if fields.first() != Some(&"ARRAY") {
        return Err(perr(ln, "expected ARRAY line"));
    }
    let config = parse_config(ln, &fields[1..])?;
    let (ln, qline) = lines.next().ok_or_else(|| perr(ln, "missing QUBITS line"))?;
    let mut q = qline.split_whitespace();
    if q.next() != Some("QUBITS") {
        return Err(perr(ln, "expected QUBITS line"));
    }
    let qubits = q.map(|a| parse_addr(ln, a)).collect::<Result<Vec<_>>>()?;

    let mut program = MachineProgram::new(config, qubits);
    let mut layer = Vec::new();
    for (ln, l) in lines {
        let mut tok = l.split_whitespace();
        let op = tok.next().unwrap_or_default();
        let ins = match op {
            "END_LAYER" => {
                program.layers.push(std::mem::take(&mut layer));
                continue;
            }
            "PREP" => {
                let basis = parse_basis(ln, tok.next())?;
                let targets = tok.map(|a| parse_addr(ln, a)).collect::<Result<_>>()?;
                Instruction::Prep { basis, targets }
            }
            "MEASURE" | "MEASURE_RESET" => {
                let basis = parse_basis(ln, tok.next())?;
                let targets = tok.map(|a| parse_addr(ln, a)).collect::<Result<_>>()?;
                Instruction::Measure { basis, reset: op == "MEASURE_RESET", targets }
            }
            "GATE1" => {
                let kind = match tok.next() {
                    Some("H") => Gate1::H,
                    Some("S") => Gate1::S,
                    Some("S_DAG") => Gate1::SDag,
                    Some("X") => Gate1::X,
                    Some("Y") => Gate1::Y,
                    Some("Z") => Gate1::Z,
                    _ => return Err(perr(ln, "unknown single-qubit gate")),
                };
                let target = parse_addr(ln, tok.next().unwrap_or_default())?;
                Instruction::Gate1 { kind, target }
            }
            "GATE2" => {
                let kind = match tok.next() {
                    Some("CX") => Gate2::CX,
                    Some("CY") => Gate2::CY,
                    Some("CZ") => Gate2::CZ,
                    _ => return Err(perr(ln, "unknown two-qubit gate")),
                };
                let control = parse_addr(ln, tok.next().unwrap_or_default())?;
                let target = parse_addr(ln, tok.next().unwrap_or_default())?;
                Instruction::Gate2 { kind, control, target }
            }
            "SHIFT" => Instruction::Shift {
                row: parse_num(ln, tok.next(), "row")?,
                s: parse_num(ln, tok.next(), "shift size")?,
            },
            "INTRA_SHIFT" => {
                let rm = tok.next().unwrap_or_default();
                let (r, m) = rm.split_once(':').ok_or_else(|| perr(ln, "expected row:module"))?;
                Instruction::IntraShift {
                    row: parse_num(ln, Some(r), "row")?,
                    module: parse_num(ln, Some(m), "module")?,
                    s: parse_num(ln, tok.next(), "shift size")?,
                }
            }
            other => return Err(perr(ln, format!("unknown instruction `{other}`"))),
        };
        if tok_has_leftover(l, &ins) {
            return Err(perr(ln, "trailing tokens"));
        }
        layer.push(ins);
    }
    if !layer.is_empty() {
        return Err(perr(text.lines().count(), "last layer is missing END_LAYER"));
    }
    Ok(program)
}

fn tok_has_leftover(line: &str, ins: &Instruction) -> bool {
    let expected = match ins {
        Instruction::Gate1 { .. } | Instruction::Shift { .. } | Instruction::IntraShift { .. } => 3,
        Instruction::Gate2 { .. } => 4,
        _ => return false,
    };
    line.split_whitespace().count() != expected
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> MachineProgram {
        let cfg = ArrayConfig { moving_rows: 2, cells: 3, module_size: 4, flat: true, parallelism: Parallelism::ChainSequential };
        let a = QubitAddr::new(1, 2, 3);
        let d = QubitAddr::new(0, 0, 1);
        let mut p = MachineProgram::new(cfg, vec![a, d]);
        p.push_layer(vec![Instruction::Prep { basis: Basis::X, targets: vec![a] }]);
        p.push_layer(vec![Instruction::Shift { row: 1, s: -2 }, Instruction::Shift { row: 2, s: 1 }]);
        p.push_layer(vec![Instruction::IntraShift { row: 1, module: 2, s: 3 }]);
        p.push_layer(vec![
            Instruction::Gate2 { kind: Gate2::CY, control: a, target: d },
        ]);
        p.push_layer(vec![Instruction::Gate1 { kind: Gate1::SDag, target: d }]);
        p.push_layer(vec![Instruction::Measure { basis: Basis::Z, reset: true, targets: vec![a, d] }]);
        p
    }

    #[test]
    fn round_trip() {
        let p = sample();
        let text = write_program(&p);
        assert_eq!(parse_program(&text).unwrap(), p);
        assert_eq!(write_program(&parse_program(&text).unwrap()), text);
    }

    #[test]
    fn golden_lines() {
        let text = write_program(&sample());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "ARRAY moving_rows=2 cells=3 module=4 flat=true parallelism=chain");
        assert_eq!(lines[2], "QUBITS 1:2:3 0:0:1");
        assert_eq!(lines[3], "PREP X 1:2:3");
        assert!(text.contains("GATE2 CY 1:2:3 0:0:1\n"));
        assert!(text.contains("INTRA_SHIFT 1:2 3\n"));
        assert!(text.contains("MEASURE_RESET Z 1:2:3 0:0:1\n"));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = "MACHINE_PROGRAM 1\nARRAY moving_rows=1 cells=1 module=1 flat=false parallelism=full\nQUBITS 0:0:0\nFOO\n";
        assert!(matches!(parse_program(bad), Err(Error::Parse { line: 4, .. })));
        let unterminated = "MACHINE_PROGRAM 1\nARRAY moving_rows=1 cells=1 module=1 flat=false parallelism=full\nQUBITS 0:0:0\nGATE1 H 0:0:0\n";
        assert!(parse_program(unterminated).is_err());
    }
}
