//! Parsers for the user-facing plain-text formats: differential-polynomial
//! expressions, the sectioned algebra file format, and the state expressions
//! of the logarithmic models; plus the inverse exporter for builtin tables.
//!
//! Expression grammar (whitespace-insensitive):
//!   expr   := term (('+'|'-') term)*
//!   term   := factor ('*' factor)*
//!   factor := '-'* atom ('^' uint)?
//!   atom   := uint ('/' uint)? | name | 'd' '(' name ',' uint ')' | '(' expr ')'
//! where `d(g,k)` denotes the k-th derivative of the generator `g`.
//!
//! Algebra files consist of a `[generators]` section with lines
//! `name = {parity = even|odd, degree = N, central = true|false}` and one
//! `[bracket.g.h]` section per stored entry with lines
//! `local = [{n = N, coeff = expr}, ...]` and
//! `nonlocal = [{left = expr, right = expr}, ...]`.

use crate::bracket::{Algebra, BracketEntry};
use crate::logva::fock::FockState;
use crate::logva::vm::PbwState;
use crate::q::{qi, q_display, Q};
use crate::superpoly::{DiffPoly, GeneratorDecl, Parity, Signature, Variable};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    line_start: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line, line_start: 0 }
    }

    fn error(&self, message: &str) -> ParseError {
        ParseError {
            line: self.line,
            column: self.pos - self.line_start + 1,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() {
            match self.src[self.pos] {
                b' ' | b'\t' => self.pos += 1,
                b'\n' => {
                    self.pos += 1;
                    self.line += 1;
                    self.line_start = self.pos;
                }
                _ => break,
            }
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn uint(&mut self) -> Result<u64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.error("expected a number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.error("number out of range"))
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.error("expected an identifier"));
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string())
    }
}

fn parse_expr_inner(lex: &mut Lexer, sig: &Signature) -> Result<DiffPoly, ParseError> {
    let mut acc = parse_term(lex, sig)?;
    loop {
        if lex.eat(b'+') {
            acc = acc.add(&parse_term(lex, sig)?);
        } else if lex.eat(b'-') {
            acc = acc.sub(&parse_term(lex, sig)?);
        } else {
            return Ok(acc);
        }
    }
}

fn parse_term(lex: &mut Lexer, sig: &Signature) -> Result<DiffPoly, ParseError> {
    let mut acc = parse_factor(lex, sig)?;
    while lex.eat(b'*') {
        acc = acc.mul(&parse_factor(lex, sig)?, sig);
    }
    Ok(acc)
}

fn parse_factor(lex: &mut Lexer, sig: &Signature) -> Result<DiffPoly, ParseError> {
    let mut neg = false;
    while lex.eat(b'-') {
        neg = !neg;
    }
    let mut p = parse_atom(lex, sig)?;
    if lex.eat(b'^') {
        let e = lex.uint()?;
        let base = p.clone();
        p = DiffPoly::one();
        for _ in 0..e {
            p = p.mul(&base, sig);
        }
    }
    Ok(if neg { p.neg() } else { p })
}

fn parse_atom(lex: &mut Lexer, sig: &Signature) -> Result<DiffPoly, ParseError> {
    match lex.peek() {
        Some(b'(') => {
            lex.bump();
            let p = parse_expr_inner(lex, sig)?;
            lex.expect(b')')?;
            Ok(p)
        }
        Some(c) if c.is_ascii_digit() => {
            let n = lex.uint()? as i64;
            if lex.eat(b'/') {
                let d = lex.uint()? as i64;
                if d == 0 {
                    return Err(lex.error("zero denominator"));
                }
                Ok(DiffPoly::constant(Q::new(n.into(), d.into())))
            } else {
                Ok(DiffPoly::constant(qi(n)))
            }
        }
        Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
            let name = lex.ident()?;
            if name == "d" && lex.peek() == Some(b'(') {
                lex.bump();
                let g = lex.ident()?;
                let idx = sig
                    .index_of(&g)
                    .ok_or_else(|| lex.error(&format!("unknown generator '{g}'")))?;
                lex.expect(b',')?;
                let k = lex.uint()? as u32;
                lex.expect(b')')?;
                Ok(DiffPoly::var(Variable { gen: idx, order: k }))
            } else {
                let idx = sig
                    .index_of(&name)
                    .ok_or_else(|| lex.error(&format!("unknown generator '{name}'")))?;
                Ok(DiffPoly::gen(idx))
            }
        }
        _ => Err(lex.error("expected a number, generator, or '('")),
    }
}

/// Parse a differential-polynomial expression over the given signature.
pub fn parse_expr(src: &str, sig: &Signature) -> Result<DiffPoly, ParseError> {
    parse_expr_at(src, sig, 1)
}

fn parse_expr_at(src: &str, sig: &Signature, line: usize) -> Result<DiffPoly, ParseError> {
    let mut lex = Lexer::new(src, line);
    let p = parse_expr_inner(&mut lex, sig)?;
    if lex.peek().is_some() {
        return Err(lex.error("unexpected trailing input"));
    }
    Ok(p)
}

/// Split the inside of `[...]` into top-level `{...}` records.
fn split_records(body: &str, line: usize) -> Result<Vec<String>, ParseError> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    for ch in body.chars() {
        match ch {
            '{' => {
                depth += 1;
                if depth == 1 {
                    current.clear();
                    continue;
                }
            }
            '}' => {
                if depth == 0 {
                    return Err(ParseError { line, column: 1, message: "unbalanced '}'".into() });
                }
                depth -= 1;
                if depth == 0 {
                    out.push(current.clone());
                    continue;
                }
            }
            ',' if depth == 0 => continue,
            _ => {}
        }
        if depth >= 1 {
            current.push(ch);
        } else if !ch.is_whitespace() {
            return Err(ParseError {
                line,
                column: 1,
                message: format!("unexpected '{ch}' between records"),
            });
        }
    }
    if depth != 0 {
        return Err(ParseError { line, column: 1, message: "unbalanced '{'".into() });
    }
    Ok(out)
}

/// Split a record body `key = value, key = value` at top-level commas.
fn record_fields(body: &str, line: usize) -> Result<BTreeMap<String, String>, ParseError> {
    let mut out = BTreeMap::new();
    let mut depth = 0i32;
    let mut piece = String::new();
    let mut pieces = Vec::new();
    for ch in body.chars() {
        match ch {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            ',' if depth == 0 => {
                pieces.push(std::mem::take(&mut piece));
                continue;
            }
            _ => {}
        }
        piece.push(ch);
    }
    if !piece.trim().is_empty() {
        pieces.push(piece);
    }
    for p in pieces {
        let (k, v) = p.split_once('=').ok_or_else(|| ParseError {
            line,
            column: 1,
            message: format!("expected 'key = value' in record, got '{}'", p.trim()),
        })?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// Parse an algebra from the sectioned file format. `name` labels the
/// resulting algebra in reports.
pub fn parse_algebra(text: &str, name: &str) -> Result<Algebra, String> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Generators,
        Bracket(String, String),
    }
    let mut section = Section::None;
    let mut decls: Vec<GeneratorDecl> = Vec::new();
    // Collected raw bracket lines, resolved after the signature is known.
    let mut raw: Vec<(String, String, String, String, usize)> = Vec::new();

    for (i, raw_line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let head = rest
                .strip_suffix(']')
                .ok_or_else(|| format!("line {lineno}: unterminated section header"))?;
            section = if head == "generators" {
                Section::Generators
            } else if let Some(spec) = head.strip_prefix("bracket.") {
                let mut parts = spec.split('.');
                match (parts.next(), parts.next(), parts.next()) {
                    (Some(g), Some(h), None) => Section::Bracket(g.to_string(), h.to_string()),
                    _ => return Err(format!("line {lineno}: expected [bracket.g.h]")),
                }
            } else {
                return Err(format!("line {lineno}: unknown section '{head}'"));
            };
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {lineno}: expected 'key = value'"))?;
        let (key, value) = (key.trim(), value.trim());
        match &section {
            Section::None => return Err(format!("line {lineno}: entry outside any section")),
            Section::Generators => {
                let body = value
                    .strip_prefix('{')
                    .and_then(|v| v.strip_suffix('}'))
                    .ok_or_else(|| format!("line {lineno}: expected {{...}} declaration"))?;
                let fields = record_fields(body, lineno).map_err(|e| e.to_string())?;
                let parity = match fields.get("parity").map(String::as_str) {
                    Some("even") => Parity::Even,
                    Some("odd") => Parity::Odd,
                    other => {
                        return Err(format!(
                            "line {lineno}: parity must be even|odd, got {:?}",
                            other.unwrap_or("<missing>")
                        ))
                    }
                };
                let degree: u32 = fields
                    .get("degree")
                    .ok_or_else(|| format!("line {lineno}: missing degree"))?
                    .parse()
                    .map_err(|_| format!("line {lineno}: bad degree"))?;
                let central = match fields.get("central").map(String::as_str) {
                    Some("true") => true,
                    Some("false") | None => false,
                    Some(other) => {
                        return Err(format!("line {lineno}: central must be true|false, got {other}"))
                    }
                };
                decls.push(GeneratorDecl { name: key.to_string(), parity, central, degree });
            }
            Section::Bracket(g, h) => {
                if key != "local" && key != "nonlocal" {
                    return Err(format!("line {lineno}: expected 'local' or 'nonlocal'"));
                }
                let body = value
                    .strip_prefix('[')
                    .and_then(|v| v.strip_suffix(']'))
                    .ok_or_else(|| format!("line {lineno}: expected [...] list"))?;
                raw.push((g.clone(), h.clone(), key.to_string(), body.to_string(), lineno));
            }
        }
    }

    if decls.is_empty() {
        return Err("no generators".to_string());
    }
    let sig = Signature::new(decls).map_err(|e| format!("{e:?}"))?;

    let mut table: BTreeMap<(usize, usize), BracketEntry> = BTreeMap::new();
    for (g, h, key, body, lineno) in raw {
        let gi = sig
            .index_of(&g)
            .ok_or_else(|| format!("line {lineno}: unknown generator '{g}'"))?;
        let hi = sig
            .index_of(&h)
            .ok_or_else(|| format!("line {lineno}: unknown generator '{h}'"))?;
        let entry = table
            .entry((gi, hi))
            .or_insert_with(|| BracketEntry { local: BTreeMap::new(), nonlocal: Vec::new() });
        for rec in split_records(&body, lineno).map_err(|e| e.to_string())? {
            let fields = record_fields(&rec, lineno).map_err(|e| e.to_string())?;
            if key == "local" {
                let n: u32 = fields
                    .get("n")
                    .ok_or_else(|| format!("line {lineno}: local entry missing n"))?
                    .parse()
                    .map_err(|_| format!("line {lineno}: bad exponent n"))?;
                let coeff = fields
                    .get("coeff")
                    .ok_or_else(|| format!("line {lineno}: local entry missing coeff"))?;
                let p = parse_expr_at(coeff, &sig, lineno).map_err(|e| e.to_string())?;
                entry.local.insert(n, p);
            } else {
                let left = fields
                    .get("left")
                    .ok_or_else(|| format!("line {lineno}: nonlocal entry missing left"))?;
                let right = fields
                    .get("right")
                    .ok_or_else(|| format!("line {lineno}: nonlocal entry missing right"))?;
                let p = parse_expr_at(left, &sig, lineno).map_err(|e| e.to_string())?;
                let q = parse_expr_at(right, &sig, lineno).map_err(|e| e.to_string())?;
                // The pair parity tag is determined by the left factor:
                // σ = parity(g) xor parity(p).
                let pp = p.parity(&sig).ok_or_else(|| {
                    format!("line {lineno}: inhomogeneous braiding left factor")
                })?;
                let s = if pp == sig.parity(gi) { Parity::Even } else { Parity::Odd };
                entry.nonlocal.push((p, q, s));
            }
        }
    }

    Algebra::new(name, sig, table).map_err(|e| format!("{e:?}"))
}

fn export_poly(p: &DiffPoly, sig: &Signature) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut parts = Vec::new();
    for (m, c) in &p.terms {
        let mut factors = Vec::new();
        if *c != qi(1) || m.is_unit() {
            factors.push(q_display(c));
        }
        for v in &m.vars {
            if v.order == 0 {
                factors.push(sig.decl(v.gen).name.clone());
            } else {
                factors.push(format!("d({},{})", sig.decl(v.gen).name, v.order));
            }
        }
        parts.push(factors.join("*"));
    }
    parts.join(" + ")
}

/// Render an algebra in the sectioned file format; `parse_algebra` of the
/// output reproduces the table exactly.
pub fn export_algebra(alg: &Algebra) -> String {
    let sig = &alg.sig;
    let mut out = String::from("[generators]\n");
    for d in sig.gens() {
        out.push_str(&format!(
            "{} = {{parity = {}, degree = {}, central = {}}}\n",
            d.name,
            if d.parity.is_odd() { "odd" } else { "even" },
            d.degree,
            d.central
        ));
    }
    for g in 0..sig.len() {
        for h in 0..sig.len() {
            let Some(e) = alg.entry(g, h) else { continue };
            if e.local.is_empty() && e.nonlocal.is_empty() {
                continue;
            }
            out.push_str(&format!(
                "\n[bracket.{}.{}]\n",
                sig.decl(g).name,
                sig.decl(h).name
            ));
            if !e.local.is_empty() {
                let items: Vec<String> = e
                    .local
                    .iter()
                    .map(|(n, c)| format!("{{n = {}, coeff = {}}}", n, export_poly(c, sig)))
                    .collect();
                out.push_str(&format!("local = [{}]\n", items.join(", ")));
            }
            if !e.nonlocal.is_empty() {
                let items: Vec<String> = e
                    .nonlocal
                    .iter()
                    .map(|(p, q, _)| {
                        format!(
                            "{{left = {}, right = {}}}",
                            export_poly(p, sig),
                            export_poly(q, sig)
                        )
                    })
                    .collect();
                out.push_str(&format!("nonlocal = [{}]\n", items.join(", ")));
            }
        }
    }
    out
}

/// Parse a free-boson Fock state, e.g. `x0*x1^2*K`, `3/2*x0`, `vac`.
pub fn parse_fock_state(src: &str) -> Result<FockState, String> {
    let mut state = FockState::vac();
    for tok in src.split('*') {
        let tok = tok.trim();
        if tok.is_empty() {
            return Err("empty factor".to_string());
        }
        let (base, pow) = match tok.split_once('^') {
            Some((b, e)) => (
                b.trim(),
                e.trim().parse::<u32>().map_err(|_| format!("bad exponent '{e}'"))?,
            ),
            None => (tok, 1),
        };
        let factor = if base == "vac" || base == "1" {
            FockState::vac()
        } else if base == "K" {
            FockState::k()
        } else if let Some(n) = base.strip_prefix('x') {
            let n: u32 = n.parse().map_err(|_| format!("bad variable '{base}'"))?;
            FockState::x(n)
        } else if let Ok(n) = base.parse::<i64>() {
            FockState::mono(0, &[], qi(n))
        } else if let Some((p, q)) = base.split_once('/') {
            let p: i64 = p.trim().parse().map_err(|_| format!("bad coefficient '{base}'"))?;
            let q: i64 = q.trim().parse().map_err(|_| format!("bad coefficient '{base}'"))?;
            if q == 0 {
                return Err("zero denominator".to_string());
            }
            FockState::mono(0, &[], Q::new(p.into(), q.into()))
        } else {
            return Err(format!("unknown factor '{base}'"));
        };
        for _ in 0..pow {
            state = state.mul(&factor);
        }
    }
    Ok(state)
}

/// Parse a mode-module state, e.g. `u(-3)u(-1)vac`, `C^2*u(-2)vac`, `vac`.
pub fn parse_pbw_state(src: &str) -> Result<PbwState, String> {
    let mut c_pow = 0u32;
    let mut coeff = qi(1);
    let mut word: Vec<u32> = Vec::new();
    let mut seen_vac = false;
    let mut rest = src.trim();
    while !rest.is_empty() {
        rest = rest.trim_start_matches(['*', ' ']);
        if rest.is_empty() {
            break;
        }
        if seen_vac {
            return Err("factors after 'vac'".to_string());
        }
        if let Some(r) = rest.strip_prefix("vac") {
            seen_vac = true;
            rest = r;
        } else if let Some(r) = rest.strip_prefix("u(") {
            let close = r.find(')').ok_or("unterminated 'u('")?;
            let n: i64 = r[..close].trim().parse().map_err(|_| "bad mode index")?;
            if n >= 0 {
                return Err(format!("u({n}) is not a creation operator"));
            }
            word.push((-n) as u32);
            rest = &r[close + 1..];
        } else if let Some(r) = rest.strip_prefix('C') {
            let (pow, r) = if let Some(r2) = r.strip_prefix('^') {
                let end = r2.find(|c: char| !c.is_ascii_digit()).unwrap_or(r2.len());
                (r2[..end].parse::<u32>().map_err(|_| "bad C exponent")?, &r2[end..])
            } else {
                (1, r)
            };
            c_pow += pow;
            rest = r;
        } else {
            let end = rest
                .find(|c: char| !(c.is_ascii_digit() || c == '/' || c == '-'))
                .unwrap_or(rest.len());
            if end == 0 {
                return Err(format!("unknown factor at '{rest}'"));
            }
            let num = &rest[..end];
            coeff *= if let Some((p, q)) = num.split_once('/') {
                let p: i64 = p.parse().map_err(|_| format!("bad coefficient '{num}'"))?;
                let q: i64 = q.parse().map_err(|_| format!("bad coefficient '{num}'"))?;
                if q == 0 {
                    return Err("zero denominator".to_string());
                }
                Q::new(p.into(), q.into())
            } else {
                qi(num.parse::<i64>().map_err(|_| format!("bad coefficient '{num}'"))?)
            };
            rest = &rest[end..];
        }
    }
    if !seen_vac {
        return Err("state must end in 'vac'".to_string());
    }
    word.sort_unstable_by(|a, b| b.cmp(a));
    let mut s = PbwState(BTreeMap::from([((c_pow, word), qi(1))]));
    s = s.scale(&coeff);
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{builtin, BUILTIN_NAMES};
    use crate::q::qr;

    #[test]
    fn expression_grammar() {
        let sig = builtin("potential-free-boson").unwrap().sig;
        let p = parse_expr("-1/2*K", &sig).unwrap();
        assert_eq!(p, DiffPoly::gen(1).scale(&qr(-1, 2)));
        let p = parse_expr("d(x,1)*d(x,1) + 2*x", &sig).unwrap();
        let dx = DiffPoly::var(Variable { gen: 0, order: 1 });
        assert_eq!(p, dx.mul(&dx, &sig).add(&DiffPoly::gen(0).scale(&qi(2))));
        let p = parse_expr("(x - 1)^2", &sig).unwrap();
        let xm1 = DiffPoly::gen(0).sub(&DiffPoly::one());
        assert_eq!(p, xm1.mul(&xm1, &sig));
        assert!(parse_expr("q", &sig).is_err());
        let err = parse_expr("x +", &sig).unwrap_err();
        assert_eq!(err.line, 1);
    }

    #[test]
    fn builtin_round_trip() {
        for name in BUILTIN_NAMES {
            let alg = builtin(name).unwrap();
            let text = export_algebra(&alg);
            let back = parse_algebra(&text, name)
                .unwrap_or_else(|e| panic!("round-trip of {name} failed: {e}\n{text}"));
            assert_eq!(back.sig, alg.sig, "{name} signature");
            for g in 0..alg.sig.len() {
                for h in 0..alg.sig.len() {
                    assert_eq!(back.entry(g, h), alg.entry(g, h), "{name} entry ({g},{h})");
                }
            }
        }
    }

    #[test]
    fn loader_rejects_bad_tables() {
        // Mutilated Virasoro-Magri entry without the −(1/λ)u' pair: skew fails.
        let text = "\
[generators]
u = {parity = even, degree = 1, central = false}
C = {parity = even, degree = 1, central = true}

[bracket.u.u]
local = [{n = 1, coeff = -1/12*C}]
nonlocal = [{left = -1, right = d(u,1)}]
";
        let err = parse_algebra(text, "bad").unwrap_err();
        assert!(err.contains("skew") || err.contains("transpose"), "{err}");
        // Empty generator list.
        assert_eq!(parse_algebra("", "empty").unwrap_err(), "no generators");
    }

    #[test]
    fn state_expressions() {
        let s = parse_fock_state("x0*x1^2*K").unwrap();
        assert_eq!(
            s,
            FockState::x(0)
                .mul(&FockState::x(1))
                .mul(&FockState::x(1))
                .mul(&FockState::k())
        );
        assert_eq!(parse_fock_state("vac").unwrap(), FockState::vac());
        let s = parse_pbw_state("u(-3)u(-1)vac").unwrap();
        assert_eq!(s, PbwState::word(&[3, 1]));
        let s = parse_pbw_state("C^2*u(-2)vac").unwrap();
        assert_eq!(s, PbwState::word(&[2]).mul_c().mul_c());
        assert!(parse_pbw_state("u(0)vac").is_err());
        assert!(parse_fock_state("y3").is_err());
    }
}
