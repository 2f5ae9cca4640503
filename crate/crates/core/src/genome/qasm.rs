//! OpenQASM 2.0 export and import, restricted to `rx`, `ry`, `rz` and `cx`.

use std::f64::consts::PI;
use std::fmt::Write;

use super::{Axis, Gene, Individual};
use crate::error::{Error, Result};

const HEADER: &str = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";

/// Renders `ind` as OpenQASM 2.0. Angles carry 17 significant digits so the
/// text round-trips through [`parse_qasm`] bit-exactly.
pub fn to_qasm(ind: &Individual) -> String {
    let mut out = String::from(HEADER);
    out.push_str("// qubit 0 is the least significant bit of the basis index\n");
    let _ = writeln!(out, "qreg q[{}];", ind.n_qubits());
    for gene in ind.genes() {
        match *gene {
            Gene::Rotation { axis, target, angle } => {
                let name = axis.gate_kind().mnemonic();
                let _ = writeln!(out, "{name}({}) q[{target}];", format_angle(angle));
            }
            Gene::Cnot { control, target } => {
                let _ = writeln!(out, "cx q[{control}],q[{target}];");
            }
        }
    }
    out
}

fn format_angle(angle: f64) -> String {
    if angle == 0.0 {
        return "0".to_owned();
    }
    let magnitude = angle.abs().log10().floor() as i32;
    if !(-6..=6).contains(&magnitude) {
        return format!("{angle:.16e}");
    }
    let decimals = (16 - magnitude).max(0) as usize;
    format!("{angle:.decimals$}")
}

struct Statement {
    line: usize,
    text: String,
}

fn statements(text: &str) -> Vec<Statement> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut start_line = 1;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split("//").next().unwrap_or("");
        for (j, piece) in line.split(';').enumerate() {
            if j > 0 {
                let stmt = current.trim().to_owned();
                if !stmt.is_empty() {
                    out.push(Statement { line: start_line, text: stmt });
                }
                current.clear();
            }
            if current.trim().is_empty() {
                start_line = i + 1;
            }
            current.push_str(piece);
            current.push(' ');
        }
    }
    let rest = current.trim();
    if !rest.is_empty() {
        out.push(Statement { line: start_line, text: rest.to_owned() });
    }
    out
}

/// Parses an OpenQASM 2.0 program over `rx`, `ry`, `rz` and `cx`.
///
/// Exactly one `qreg` is allowed; `creg` declarations are accepted and
/// ignored. Any other statement is rejected with [`Error::UnsupportedGate`].
pub fn parse_qasm(text: &str) -> Result<Individual> {
    let mut register: Option<(String, usize)> = None;
    let mut genes = Vec::new();
    for stmt in statements(text) {
        let err = |message: String| Error::Qasm { line: stmt.line, message };
        let s = stmt.text.as_str();
        let head_len = s.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(s.len());
        let (head, rest) = s.split_at(head_len);
        let rest = rest.trim();
        match head {
            "OPENQASM" => {
                if !rest.starts_with('2') {
                    return Err(err(format!("unsupported version {rest}")));
                }
            }
            "include" => {}
            "qreg" => {
                if register.is_some() {
                    return Err(err("only one qreg is supported".into()));
                }
                let (name, size) =
                    parse_indexed(rest).ok_or_else(|| err(format!("bad register declaration `{rest}`")))?;
                register = Some((name.to_owned(), size));
            }
            "creg" => {}
            "rx" | "ry" | "rz" => {
                let (name, size) = register.as_ref().ok_or_else(|| err("gate before qreg".into()))?;
                let rest = rest.strip_prefix('(').ok_or_else(|| err(format!("`{head}` needs an angle")))?;
                let close = rest.rfind(')').ok_or_else(|| err("unbalanced parenthesis".into()))?;
                let angle = eval_expr(&rest[..close]).map_err(err)?;
                let target = parse_operand(rest[close + 1..].trim(), name, *size).map_err(err)?;
                let axis = match head {
                    "rx" => Axis::X,
                    "ry" => Axis::Y,
                    _ => Axis::Z,
                };
                genes.push(Gene::Rotation { axis, target, angle });
            }
            "cx" | "CX" => {
                let (name, size) = register.as_ref().ok_or_else(|| err("gate before qreg".into()))?;
                let mut operands = rest.split(',');
                let (Some(c), Some(t), None) = (operands.next(), operands.next(), operands.next()) else {
                    return Err(err("cx takes two operands".into()));
                };
                let control = parse_operand(c.trim(), name, *size).map_err(err)?;
                let target = parse_operand(t.trim(), name, *size).map_err(err)?;
                genes.push(Gene::Cnot { control, target });
            }
            "" => return Err(err(format!("unexpected `{s}`"))),
            other => return Err(Error::UnsupportedGate(other.to_owned())),
        }
    }
    let (_, n_qubits) = register.ok_or(Error::Qasm { line: 0, message: "missing qreg".into() })?;
    Individual::new(n_qubits, genes)
}

fn parse_indexed(s: &str) -> Option<(&str, usize)> {
    let open = s.find('[')?;
    let close = s.find(']')?;
    if close != s.len() - 1 || close < open {
        return None;
    }
    let name = s[..open].trim();
    let index = s[open + 1..close].trim().parse().ok()?;
    Some((name, index))
}

fn parse_operand(s: &str, register: &str, size: usize) -> std::result::Result<usize, String> {
    match parse_indexed(s) {
        Some((name, index)) if name == register && index < size => Ok(index),
        Some((name, _)) if name != register => Err(format!("unknown register `{name}`")),
        Some((_, index)) => Err(format!("qubit {index} out of range for {register}[{size}]")),
        None => Err(format!("bad operand `{s}`")),
    }
}

// Angle expressions: numbers, `pi`, + - * /, unary minus and parentheses.

#[derive(Debug, Clone, Copy, PartialEq)]
enum Token {
    Num(f64),
    Op(char),
}

fn tokenize(s: &str) -> std::result::Result<Vec<Token>, String> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if "+-*/()".contains(c) {
            tokens.push(Token::Op(c));
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() {
                let d = chars[i];
                let exp_sign = (d == '+' || d == '-') && matches!(chars[i - 1], 'e' | 'E');
                if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                    i += 1;
                } else {
                    break;
                }
            }
            let lit: String = chars[start..i].iter().collect();
            tokens.push(Token::Num(lit.parse().map_err(|_| format!("bad number `{lit}`"))?));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let ident: String = chars[start..i].iter().collect();
            match ident.as_str() {
                "pi" => tokens.push(Token::Num(PI)),
                _ => return Err(format!("unknown identifier `{ident}` in angle")),
            }
        } else {
            return Err(format!("unexpected character `{c}` in angle"));
        }
    }
    Ok(tokens)
}

fn eval_expr(s: &str) -> std::result::Result<f64, String> {
    let tokens = tokenize(s)?;
    let mut pos = 0;
    let value = parse_sum(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(format!("trailing input in angle `{s}`"));
    }
    Ok(value)
}

fn parse_sum(t: &[Token], pos: &mut usize) -> std::result::Result<f64, String> {
    let mut acc = parse_product(t, pos)?;
    while let Some(Token::Op(op @ ('+' | '-'))) = t.get(*pos) {
        *pos += 1;
        let rhs = parse_product(t, pos)?;
        acc = if *op == '+' { acc + rhs } else { acc - rhs };
    }
    Ok(acc)
}

fn parse_product(t: &[Token], pos: &mut usize) -> std::result::Result<f64, String> {
    let mut acc = parse_unary(t, pos)?;
    while let Some(Token::Op(op @ ('*' | '/'))) = t.get(*pos) {
        *pos += 1;
        let rhs = parse_unary(t, pos)?;
        acc = if *op == '*' { acc * rhs } else { acc / rhs };
    }
    Ok(acc)
}

fn parse_unary(t: &[Token], pos: &mut usize) -> std::result::Result<f64, String> {
    match t.get(*pos) {
        Some(Token::Op('-')) => {
            *pos += 1;
            Ok(-parse_unary(t, pos)?)
        }
        Some(Token::Op('+')) => {
            *pos += 1;
            parse_unary(t, pos)
        }
        Some(Token::Num(v)) => {
            *pos += 1;
            Ok(*v)
        }
        Some(Token::Op('(')) => {
            *pos += 1;
            let v = parse_sum(t, pos)?;
            if t.get(*pos) != Some(&Token::Op(')')) {
                return Err("missing `)`".into());
            }
            *pos += 1;
            Ok(v)
        }
        _ => Err("expected a number".into()),
    }
}
