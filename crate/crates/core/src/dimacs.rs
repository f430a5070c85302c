//! DIMACS CNF reading and writing.
//!
//! The writer emits exactly `p cnf N L` followed by one clause per line,
//! literals separated by single spaces and terminated by `0`. The reader
//! accepts `c` comment lines and clauses spread over or sharing lines.

use std::fmt::Write as _;

use thiserror::Error;

use crate::formula::{Formula, FormulaError, Lit};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("line {line}: malformed header `{text}`")]
    BadHeader { line: usize, text: String },
    #[error("line {line}: bad token `{token}`")]
    BadToken { line: usize, token: String },
    #[error("line {line}: literal {lit} out of range for {num_vars} variables")]
    LitOutOfRange { line: usize, lit: i64, num_vars: usize },
    #[error("header declares {declared} clauses but {found} were read")]
    ClauseCount { declared: usize, found: usize },
    #[error("last clause is not terminated by 0")]
    Unterminated,
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// Parse options. `strict_width` rejects any clause whose width differs.
#[derive(Copy, Clone, Debug, Default)]
pub struct ParseOptions {
    pub strict_width: Option<usize>,
}

pub fn parse_dimacs(text: &str) -> Result<Formula, DimacsError> {
    parse_dimacs_with(text, ParseOptions::default())
}

pub fn parse_dimacs_with(text: &str, opts: ParseOptions) -> Result<Formula, DimacsError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let mut current: Vec<Lit> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(DimacsError::BadHeader {
                    line: line_no,
                    text: line.to_owned(),
                });
            }
            header = Some(parse_header(line).ok_or_else(|| DimacsError::BadHeader {
                line: line_no,
                text: line.to_owned(),
            })?);
            continue;
        }
        let (num_vars, _) = header.ok_or(DimacsError::MissingHeader)?;
        for token in line.split_whitespace() {
            let value: i64 = token.parse().map_err(|_| DimacsError::BadToken {
                line: line_no,
                token: token.to_owned(),
            })?;
            if value == 0 {
                clauses.push(std::mem::take(&mut current));
                continue;
            }
            if value.unsigned_abs() > num_vars as u64 {
                return Err(DimacsError::LitOutOfRange {
                    line: line_no,
                    lit: value,
                    num_vars,
                });
            }
            current.push(Lit::from_dimacs(value).expect("nonzero, in range"));
        }
    }

    let (num_vars, declared) = header.ok_or(DimacsError::MissingHeader)?;
    if !current.is_empty() {
        return Err(DimacsError::Unterminated);
    }
    if clauses.len() != declared {
        return Err(DimacsError::ClauseCount {
            declared,
            found: clauses.len(),
        });
    }
    let formula = Formula::new(num_vars, &clauses)?;
    if let Some(k) = opts.strict_width {
        formula.check_width(k)?;
    }
    Ok(formula)
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut parts = line.split_whitespace();
    if parts.next()? != "p" || parts.next()? != "cnf" {
        return None;
    }
    let n = parts.next()?.parse().ok()?;
    let l = parts.next()?.parse().ok()?;
    parts.next().is_none().then_some((n, l))
}

pub fn emit_dimacs(formula: &Formula) -> String {
    let mut out = String::with_capacity(16 + formula.num_clauses() * 16);
    writeln!(out, "p cnf {} {}", formula.num_vars(), formula.num_clauses()).unwrap();
    for clause in formula.clauses() {
        for lit in clause {
            write!(out, "{} ", lit.to_dimacs()).unwrap();
        }
        out.push_str("0\n");
    }
    out
}
