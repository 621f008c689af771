//! A small OpenQASM 2 subset.
//!
//! Supported statements: `OPENQASM`/`include` headers (ignored), `qreg`,
//! `creg`, `barrier` (ignored), the gates `h x y z rx ry rz cx cz cp swap`,
//! `measure q[i] -> c[j]`, `measure q -> c`, and `if(c==v)` / `if(c[j]==v)`
//! prefixes on single gates. Parameters accept arithmetic over numbers and
//! `pi`. Two non-standard gates, `unitary1(...)` and `unitary2(...)`, carry
//! explicit matrices as interleaved (re, im) row-major entries so that random
//! unitaries survive a round trip.

use std::fmt::Write as _;

use super::{Circuit, Gate, GateKind, Op};
use crate::error::{Error, Result};
use crate::tensor::C64;

#[derive(Debug)]
struct Register {
    name: String,
    offset: usize,
    size: usize,
}

#[derive(Default)]
struct Program {
    qregs: Vec<Register>,
    cregs: Vec<Register>,
    ops: Vec<(usize, Op)>,
}

impl Program {
    fn n_qubits(&self) -> usize {
        self.qregs.iter().map(|r| r.size).sum()
    }

    fn n_clbits(&self) -> usize {
        self.cregs.iter().map(|r| r.size).sum()
    }
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses QASM-subset text into a [`Circuit`].
///
/// Classical conditions are not checked against earlier measurements here;
/// use [`Circuit::validate`] for that.
pub fn parse_qasm_subset(text: &str) -> Result<Circuit> {
    let mut prog = Program::default();
    for (line, stmt) in statements(text)? {
        parse_statement(&mut prog, line, &stmt)?;
    }
    let n = prog.n_qubits();
    if n == 0 {
        return Err(err(1, "no qreg declared"));
    }
    let mut circuit = Circuit::new(n)?;
    circuit.reserve_clbits(prog.n_clbits());
    for (line, op) in prog.ops {
        let res = match op {
            Op::Gate(g) => circuit.push_gate(g).map(|_| ()),
            Op::Measure { qubit, clbit } => circuit.measure(qubit, clbit).map(|_| ()),
            Op::MeasureAll => {
                circuit.measure_all();
                Ok(())
            }
        };
        res.map_err(|e| err(line, e.to_string()))?;
    }
    Ok(circuit)
}

/// Splits into `;`-terminated statements tagged with their starting line.
fn statements(text: &str) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut start = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split("//").next().unwrap_or("");
        for ch in line.chars() {
            if ch == ';' {
                let stmt = current.trim().to_string();
                if stmt.is_empty() {
                    return Err(err(line_no, "empty statement"));
                }
                out.push((start, stmt));
                current.clear();
            } else {
                if current.trim().is_empty() && !ch.is_whitespace() {
                    start = line_no;
                }
                current.push(ch);
            }
        }
        current.push(' ');
    }
    if !current.trim().is_empty() {
        return Err(err(start, format!("missing ';' after '{}'", current.trim())));
    }
    Ok(out)
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str, line: usize) -> Self {
        Self { s, pos: 0, line }
    }

    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.s.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(err(self.line, format!("expected '{c}' at '{}'", self.rest())))
        }
    }

    fn eat_str(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let len = rest
            .char_indices()
            .find(|&(i, c)| !(c == '_' || c.is_ascii_alphabetic() || (i > 0 && c.is_ascii_digit())))
            .map_or(rest.len(), |(i, _)| i);
        if len == 0 {
            return Err(err(self.line, format!("expected identifier at '{rest}'")));
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    fn integer(&mut self) -> Result<usize> {
        self.skip_ws();
        let rest = self.rest();
        let len = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
        let value = rest[..len]
            .parse()
            .map_err(|_| err(self.line, format!("expected integer at '{rest}'")))?;
        self.pos += len;
        Ok(value)
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let bytes = self.rest().as_bytes();
        let mut len = 0;
        while len < bytes.len() {
            let b = bytes[len];
            let exp_sign = (b == b'-' || b == b'+') && len > 0 && matches!(bytes[len - 1], b'e' | b'E');
            if b.is_ascii_digit() || b == b'.' || b == b'e' || b == b'E' || exp_sign {
                len += 1;
            } else {
                break;
            }
        }
        let text = &self.rest()[..len];
        let v = text
            .parse()
            .map_err(|_| err(self.line, format!("malformed number '{text}'")))?;
        self.pos += len;
        Ok(v)
    }

    fn done(&mut self) -> Result<()> {
        self.skip_ws();
        if self.rest().is_empty() {
            Ok(())
        } else {
            Err(err(self.line, format!("unexpected trailing input '{}'", self.rest())))
        }
    }

    // expr := term (('+' | '-') term)*
    fn expr(&mut self) -> Result<f64> {
        let mut v = self.term()?;
        loop {
            if self.eat('+') {
                v += self.term()?;
            } else if self.eat('-') {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64> {
        let mut v = self.factor()?;
        loop {
            if self.eat('*') {
                v *= self.factor()?;
            } else if self.eat('/') {
                v /= self.factor()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn factor(&mut self) -> Result<f64> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(-self.factor()?)
            }
            Some('+') => {
                self.pos += 1;
                self.factor()
            }
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                self.expect(')')?;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => match self.ident()? {
                "pi" => Ok(std::f64::consts::PI),
                other => Err(err(self.line, format!("unknown symbol '{other}' in expression"))),
            },
            _ => Err(err(self.line, format!("malformed expression at '{}'", self.rest()))),
        }
    }
}

fn parse_statement(prog: &mut Program, line: usize, stmt: &str) -> Result<()> {
    let mut cur = Cursor::new(stmt, line);
    let head = cur.ident()?;
    match head {
        "OPENQASM" | "include" | "barrier" => Ok(()),
        "qreg" | "creg" => {
            let name = cur.ident()?.to_string();
            cur.expect('[')?;
            let size = cur.integer()?;
            cur.expect(']')?;
            cur.done()?;
            if size == 0 {
                return Err(err(line, format!("register '{name}' has size 0")));
            }
            let regs = if head == "qreg" { &mut prog.qregs } else { &mut prog.cregs };
            if regs.iter().any(|r| r.name == name) {
                return Err(err(line, format!("register '{name}' declared twice")));
            }
            let offset = regs.iter().map(|r| r.size).sum();
            regs.push(Register { name, offset, size });
            Ok(())
        }
        "measure" => {
            let q = parse_arg(&mut cur)?;
            if !cur.eat_str("->") {
                return Err(err(line, "expected '->' in measure"));
            }
            let c = parse_arg(&mut cur)?;
            cur.done()?;
            let op = measure_op(prog, line, q, c)?;
            prog.ops.push((line, op));
            Ok(())
        }
        "if" => {
            cur.expect('(')?;
            let reg_name = cur.ident()?;
            let index = if cur.eat('[') {
                let i = cur.integer()?;
                cur.expect(']')?;
                Some(i)
            } else {
                None
            };
            if !cur.eat_str("==") {
                return Err(err(line, "expected '==' in condition"));
            }
            let value = cur.integer()?;
            cur.expect(')')?;
            let reg = prog
                .cregs
                .iter()
                .find(|r| r.name == reg_name)
                .ok_or_else(|| err(line, format!("condition on undeclared creg '{reg_name}'")))?;
            let bit = match index {
                Some(i) if i < reg.size => reg.offset + i,
                Some(i) => return Err(err(line, format!("bit {i} out of range for creg '{reg_name}'"))),
                None if reg.size == 1 => reg.offset,
                None => {
                    return Err(err(
                        line,
                        format!("condition on multi-bit creg '{reg_name}' is not supported; use {reg_name}[i]"),
                    ))
                }
            };
            if value > 1 {
                return Err(err(line, format!("condition value must be 0 or 1, got {value}")));
            }
            let name = cur.ident()?;
            let gate = parse_gate(prog, &mut cur, line, name)?.conditioned(bit, value == 1);
            prog.ops.push((line, Op::Gate(gate)));
            Ok(())
        }
        name => {
            let gate = parse_gate(prog, &mut cur, line, name)?;
            prog.ops.push((line, Op::Gate(gate)));
            Ok(())
        }
    }
}

struct Arg<'a> {
    reg: &'a str,
    index: Option<usize>,
}

fn parse_arg<'a>(cur: &mut Cursor<'a>) -> Result<Arg<'a>> {
    let reg = cur.ident()?;
    let index = if cur.eat('[') {
        let i = cur.integer()?;
        cur.expect(']')?;
        Some(i)
    } else {
        None
    };
    Ok(Arg { reg, index })
}

fn resolve(regs: &[Register], line: usize, arg: &Arg<'_>, kind: &str) -> Result<(usize, usize)> {
    let reg = regs
        .iter()
        .find(|r| r.name == arg.reg)
        .ok_or_else(|| err(line, format!("undeclared {kind} '{}'", arg.reg)))?;
    match arg.index {
        Some(i) if i < reg.size => Ok((reg.offset + i, 1)),
        Some(i) => Err(err(line, format!("index {i} out of range for {kind} '{}'", arg.reg))),
        None => Ok((reg.offset, reg.size)),
    }
}

fn measure_op(prog: &Program, line: usize, q: Arg<'_>, c: Arg<'_>) -> Result<Op> {
    let (qi, qn) = resolve(&prog.qregs, line, &q, "qreg")?;
    let (ci, cn) = resolve(&prog.cregs, line, &c, "creg")?;
    match (q.index, c.index) {
        (Some(_), Some(_)) => Ok(Op::Measure { qubit: qi, clbit: ci }),
        (None, None) if prog.qregs.len() == 1 && ci == 0 && cn >= qn => Ok(Op::MeasureAll),
        _ => Err(err(
            line,
            "register-wide measure is only supported as 'measure q -> c' over the single qreg",
        )),
    }
}

fn parse_gate(prog: &Program, cur: &mut Cursor<'_>, line: usize, name: &str) -> Result<Gate> {
    let mut params = Vec::new();
    if cur.eat('(') {
        if !cur.eat(')') {
            loop {
                params.push(cur.expr()?);
                if cur.eat(')') {
                    break;
                }
                cur.expect(',')?;
            }
        }
    }
    let mut targets = Vec::new();
    loop {
        let arg = parse_arg(cur)?;
        let (q, size) = resolve(&prog.qregs, line, &arg, "qreg")?;
        if arg.index.is_none() && size != 1 {
            return Err(err(line, format!("register broadcast on '{}' is not supported", arg.reg)));
        }
        targets.push(q);
        if !cur.eat(',') {
            break;
        }
    }
    cur.done()?;

    let want = |n: usize| -> Result<()> {
        if params.len() == n {
            Ok(())
        } else {
            Err(err(line, format!("gate '{name}' takes {n} parameter(s), got {}", params.len())))
        }
    };
    let kind = match name.to_ascii_lowercase().as_str() {
        "h" => want(0).map(|_| GateKind::H)?,
        "x" => want(0).map(|_| GateKind::X)?,
        "y" => want(0).map(|_| GateKind::Y)?,
        "z" => want(0).map(|_| GateKind::Z)?,
        "rx" => want(1).map(|_| GateKind::Rx(params[0]))?,
        "ry" => want(1).map(|_| GateKind::Ry(params[0]))?,
        "rz" => want(1).map(|_| GateKind::Rz(params[0]))?,
        "cx" => want(0).map(|_| GateKind::Cx)?,
        "cz" => want(0).map(|_| GateKind::Cz)?,
        "cp" => want(1).map(|_| GateKind::Cp(params[0]))?,
        "swap" => want(0).map(|_| GateKind::Swap)?,
        "unitary1" => want(8).map(|_| GateKind::U1(pairs(&params)))?,
        "unitary2" => want(32).map(|_| GateKind::U2(pairs(&params)))?,
        other => return Err(err(line, format!("unknown gate '{other}'"))),
    };
    Ok(Gate::new(kind, targets))
}

fn pairs(params: &[f64]) -> Vec<C64> {
    params.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect()
}

/// Writes a circuit in the same subset accepted by [`parse_qasm_subset`].
pub fn emit_qasm(c: &Circuit) -> String {
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(out, "qreg q[{}];", c.n_qubits());
    if c.n_clbits() > 0 {
        let _ = writeln!(out, "creg c[{}];", c.n_clbits());
    }
    for op in c.ops() {
        match op {
            Op::Gate(g) => {
                if let Some(cond) = g.condition {
                    let _ = write!(out, "if(c[{}]=={}) ", cond.bit, u8::from(cond.value));
                }
                out.push_str(g.kind.name());
                let params: Vec<f64> = match &g.kind {
                    GateKind::Rx(t) | GateKind::Ry(t) | GateKind::Rz(t) | GateKind::Cp(t) => vec![*t],
                    GateKind::U1(m) | GateKind::U2(m) => m.iter().flat_map(|z| [z.re, z.im]).collect(),
                    _ => Vec::new(),
                };
                if !params.is_empty() {
                    let joined: Vec<String> = params.iter().map(|p| format!("{p:?}")).collect();
                    let _ = write!(out, "({})", joined.join(","));
                }
                let targets: Vec<String> = g.targets.iter().map(|q| format!("q[{q}]")).collect();
                let _ = writeln!(out, " {};", targets.join(","));
            }
            Op::Measure { qubit, clbit } => {
                let _ = writeln!(out, "measure q[{qubit}] -> c[{clbit}];");
            }
            Op::MeasureAll => out.push_str("measure q -> c;\n"),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::build_ghz;

    #[test]
    fn bell_fragment_matches_ghz2() {
        let c = parse_qasm_subset("qreg q[2]; h q[0]; cx q[0],q[1];").unwrap();
        assert_eq!(c.ops(), build_ghz(2).unwrap().ops());
    }

    #[test]
    fn conditional_x() {
        let c = parse_qasm_subset("qreg q[1];\ncreg c[1];\nif(c==1) x q[0];").unwrap();
        assert_eq!(
            c.ops(),
            &[Op::Gate(Gate::new(GateKind::X, vec![0]).conditioned(0, true))]
        );
    }

    #[test]
    fn expressions_and_comments() {
        let text = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n// header\nqreg q[2];\nrz(-pi/2) q[1]; // tail\ncp(2*pi/8) q[0], q[1];\nrx(1e-3) q[0];";
        let c = parse_qasm_subset(text).unwrap();
        let kinds: Vec<_> = c.gates().map(|g| g.kind.clone()).collect();
        assert_eq!(
            kinds,
            vec![
                GateKind::Rz(-std::f64::consts::FRAC_PI_2),
                GateKind::Cp(std::f64::consts::FRAC_PI_4),
                GateKind::Rx(1e-3)
            ]
        );
    }

    #[test]
    fn multiple_registers_are_flattened() {
        let c = parse_qasm_subset("qreg a[2]; qreg b[3]; creg m[1]; creg n[2]; cx a[1],b[2]; measure b[0] -> n[1];")
            .unwrap();
        assert_eq!(c.n_qubits(), 5);
        assert_eq!(c.n_clbits(), 3);
        assert_eq!(c.ops()[0], Op::Gate(Gate::new(GateKind::Cx, vec![1, 4])));
        assert_eq!(c.ops()[1], Op::Measure { qubit: 2, clbit: 2 });
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_qasm_subset("qreg q[1];\n\nfoo q[0];").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let e = parse_qasm_subset("qreg q[1];\nif(c==1) x q[0];").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, ref message } if message.contains("undeclared creg")));
        let e = parse_qasm_subset("qreg q[2];\nh q[0]\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        let e = parse_qasm_subset("qreg q[2];\nrx q[0];").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        let e = parse_qasm_subset("qreg q[2];\ncx q[0],q[0];").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        assert!(parse_qasm_subset("qreg q[2];\nh q[7];").is_err());
    }

    #[test]
    fn measure_all_round_trip() {
        let c = parse_qasm_subset("qreg q[3]; creg c[3]; h q[0]; measure q -> c;").unwrap();
        assert_eq!(c.ops().last(), Some(&Op::MeasureAll));
        let again = parse_qasm_subset(&emit_qasm(&c)).unwrap();
        assert_eq!(again.ops(), c.ops());
    }
}
