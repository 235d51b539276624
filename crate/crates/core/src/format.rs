//! Line-oriented instance text format.
//!
//! Blank lines and lines starting with `#` are ignored. The first significant
//! line is `csp <name>`, followed by `var <id> : <int> <int> ...` lines, then
//! `con <id> : <varid> ... : (<int> ...) (<int> ...) ...` lines. Tokens are
//! whitespace-separated; parentheses may adhere to the numbers they bracket.
//! An empty relation is written with no parenthesized groups. Variables must
//! precede constraints.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use crate::model::{ConstraintSpec, Csp, ModelError, Value, VariableSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based line number.
    pub line: u32,
    /// 1-based column of the offending token.
    pub col: u32,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownVariable(String),
    DuplicateIdentifier(String),
    DuplicateDomainValue { variable: String, value: Value },
    DuplicateTuple,
    ArityMismatch { expected: usize, got: usize },
    ValueOutsideDomain { variable: String, value: Value },
    Model(ModelError),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, col {}: ", self.line, self.col)?;
        match &self.kind {
            ParseErrorKind::Syntax(msg) => write!(f, "{msg}"),
            ParseErrorKind::UnknownVariable(v) => write!(f, "unknown variable `{v}`"),
            ParseErrorKind::DuplicateIdentifier(v) => write!(f, "duplicate identifier `{v}`"),
            ParseErrorKind::DuplicateDomainValue { variable, value } => {
                write!(f, "duplicate value {value} in domain of `{variable}`")
            }
            ParseErrorKind::DuplicateTuple => write!(f, "duplicate tuple"),
            ParseErrorKind::ArityMismatch { expected, got } => {
                write!(f, "tuple of length {got} does not match scope length {expected}")
            }
            ParseErrorKind::ValueOutsideDomain { variable, value } => {
                write!(f, "value {value} is outside the domain of `{variable}`")
            }
            ParseErrorKind::Model(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ParseError {}

/// A token plus the 1-based column where it starts.
struct Tok<'a> {
    text: &'a str,
    col: u32,
}

/// Splits a line on whitespace, detaching `(` and `)` into their own tokens.
fn tokenize(line: &str) -> Vec<Tok<'_>> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() || ch == '(' || ch == ')' {
            if let Some(s) = start.take() {
                out.push(Tok { text: &line[s..i], col: s as u32 + 1 });
            }
            if ch == '(' || ch == ')' {
                out.push(Tok { text: &line[i..i + 1], col: i as u32 + 1 });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Tok { text: &line[s..], col: s as u32 + 1 });
    }
    out
}

fn err(line: u32, col: u32, kind: ParseErrorKind) -> ParseError {
    ParseError { line, col, kind }
}

fn syntax(line: u32, col: u32, msg: impl Into<String>) -> ParseError {
    err(line, col, ParseErrorKind::Syntax(msg.into()))
}

fn parse_int(line_no: u32, tok: &Tok<'_>) -> Result<Value, ParseError> {
    tok.text
        .parse::<Value>()
        .map_err(|_| syntax(line_no, tok.col, alloc::format!("expected integer, found `{}`", tok.text)))
}

pub fn parse_instance(text: &str) -> Result<Csp, ParseError> {
    let mut name: Option<String> = None;
    let mut vars: Vec<VariableSpec> = Vec::new();
    let mut cons: Vec<ConstraintSpec> = Vec::new();
    let mut seen_con = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx as u32 + 1;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let toks = tokenize(raw);
        let head = &toks[0];

        if name.is_none() {
            if head.text != "csp" {
                return Err(syntax(line_no, head.col, "expected `csp <name>` header"));
            }
            if toks.len() != 2 {
                return Err(syntax(line_no, head.col, "`csp` line takes exactly one name"));
            }
            name = Some(toks[1].text.to_string());
            continue;
        }

        match head.text {
            "var" => {
                if seen_con {
                    return Err(syntax(line_no, head.col, "variables must precede constraints"));
                }
                if toks.len() < 3 || toks[2].text != ":" {
                    return Err(syntax(line_no, head.col, "expected `var <id> : <int> ...`"));
                }
                let vname = toks[1].text.to_string();
                if vars.iter().any(|v| v.name == vname) {
                    return Err(err(line_no, toks[1].col, ParseErrorKind::DuplicateIdentifier(vname)));
                }
                if toks.len() == 3 {
                    return Err(syntax(line_no, toks[2].col, "variable declared with empty domain"));
                }
                let mut domain = Vec::with_capacity(toks.len() - 3);
                for tok in &toks[3..] {
                    let v = parse_int(line_no, tok)?;
                    if domain.contains(&v) {
                        return Err(err(
                            line_no,
                            tok.col,
                            ParseErrorKind::DuplicateDomainValue { variable: vname, value: v },
                        ));
                    }
                    domain.push(v);
                }
                vars.push(VariableSpec { name: vname, domain });
            }
            "con" => {
                seen_con = true;
                if toks.len() < 3 || toks[2].text != ":" {
                    return Err(syntax(line_no, head.col, "expected `con <id> : <varid> ... : (...) ...`"));
                }
                let cname = toks[1].text.to_string();
                if cons.iter().any(|c| c.name == cname) {
                    return Err(err(line_no, toks[1].col, ParseErrorKind::DuplicateIdentifier(cname)));
                }

                // Scope runs from after the first `:` to the second `:`.
                let mut i = 3;
                let mut scope: Vec<String> = Vec::new();
                while i < toks.len() && toks[i].text != ":" {
                    let tok = &toks[i];
                    if tok.text == "(" || tok.text == ")" {
                        return Err(syntax(line_no, tok.col, "expected variable name or `:`"));
                    }
                    let vname = tok.text.to_string();
                    if !vars.iter().any(|v| v.name == vname) {
                        return Err(err(line_no, tok.col, ParseErrorKind::UnknownVariable(vname)));
                    }
                    if scope.contains(&vname) {
                        return Err(err(line_no, tok.col, ParseErrorKind::DuplicateIdentifier(vname)));
                    }
                    scope.push(vname);
                    i += 1;
                }
                if i == toks.len() {
                    return Err(syntax(line_no, head.col, "missing `:` before relation"));
                }
                if scope.is_empty() {
                    return Err(syntax(line_no, toks[i].col, "constraint scope is empty"));
                }
                i += 1;

                let mut tuples: Vec<Vec<Value>> = Vec::new();
                while i < toks.len() {
                    if toks[i].text != "(" {
                        return Err(syntax(line_no, toks[i].col, "expected `(` starting a tuple"));
                    }
                    let open_col = toks[i].col;
                    i += 1;
                    let mut tuple = Vec::with_capacity(scope.len());
                    while i < toks.len() && toks[i].text != ")" {
                        if toks[i].text == "(" {
                            return Err(syntax(line_no, toks[i].col, "nested `(` in tuple"));
                        }
                        let v = parse_int(line_no, &toks[i])?;
                        // Check domain membership against the scope position.
                        if tuple.len() < scope.len() {
                            let var = vars.iter().find(|d| d.name == scope[tuple.len()]).unwrap();
                            if !var.domain.contains(&v) {
                                return Err(err(
                                    line_no,
                                    toks[i].col,
                                    ParseErrorKind::ValueOutsideDomain {
                                        variable: var.name.clone(),
                                        value: v,
                                    },
                                ));
                            }
                        }
                        tuple.push(v);
                        i += 1;
                    }
                    if i == toks.len() {
                        return Err(syntax(line_no, open_col, "unclosed `(`"));
                    }
                    i += 1; // consume `)`
                    if tuple.len() != scope.len() {
                        return Err(err(
                            line_no,
                            open_col,
                            ParseErrorKind::ArityMismatch { expected: scope.len(), got: tuple.len() },
                        ));
                    }
                    if tuples.contains(&tuple) {
                        return Err(err(line_no, open_col, ParseErrorKind::DuplicateTuple));
                    }
                    tuples.push(tuple);
                }
                cons.push(ConstraintSpec { name: cname, scope, tuples });
            }
            other => {
                return Err(syntax(
                    line_no,
                    head.col,
                    alloc::format!("expected `var` or `con`, found `{other}`"),
                ));
            }
        }
    }

    let name = name.ok_or_else(|| syntax(1, 1, "empty input: missing `csp <name>` header"))?;
    Csp::new(name, vars, cons).map_err(|e| err(0, 0, ParseErrorKind::Model(e)))
}

/// Canonical text form: declaration order for variables, scopes, and domains;
/// tuples in lexicographic order. `parse_instance(serialize_instance(csp))`
/// reproduces `csp` field-exactly.
pub fn serialize_instance(csp: &Csp) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "csp {}", csp.name());
    for v in csp.variables() {
        let _ = write!(out, "var {} :", v.name);
        for val in &v.domain {
            let _ = write!(out, " {val}");
        }
        let _ = writeln!(out);
    }
    for c in csp.constraints() {
        let _ = write!(out, "con {} :", c.name);
        for &v in &c.scope {
            let _ = write!(out, " {}", csp.variable(v).name);
        }
        let _ = write!(out, " :");
        for t in &c.tuples {
            let _ = write!(out, " (");
            for (k, val) in t.iter().enumerate() {
                if k > 0 {
                    let _ = write!(out, " ");
                }
                let _ = write!(out, "{val}");
            }
            let _ = write!(out, ")");
        }
        let _ = writeln!(out);
    }
    out
}
