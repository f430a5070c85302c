//! Columnar text format for traces.
//!
//! One file holds every try of one problem:
//!
//! ```text
//! # gsat-trace v1 problem=3 num_vars=500 num_clauses=2150 k=3
//! try_id,flip_index,variable,delta,score_after,poss_size,best_delta
//! # try try_id=0 seed=1234 initial_score=1880 solved_at=none flips=1250
//! 0,1,17,4,1884,12,4
//! ...
//! ```
//!
//! The first two lines are mandatory. Each try starts with a `# try`
//! metadata line followed by one row per flip. `solved_at` is a flip index
//! or `none`; variables are one-based.

use std::fmt::Write as _;

use thiserror::Error;

use crate::formula::Var;
use crate::gsat::{FlipRecord, Trace};

pub const COLUMNS: &str = "try_id,flip_index,variable,delta,score_after,poss_size,best_delta";
const MAGIC: &str = "# gsat-trace v1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceFormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing file header")]
    MissingHeader,
    #[error("try {try_id}: {msg}")]
    Inconsistent { try_id: u64, msg: String },
}

fn syntax(line: usize, msg: impl Into<String>) -> TraceFormatError {
    TraceFormatError::Syntax { line, msg: msg.into() }
}

/// Problem-level header fields.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct TraceHeader {
    pub problem_id: u64,
    pub num_vars: usize,
    pub num_clauses: usize,
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceFile {
    pub header: TraceHeader,
    pub traces: Vec<Trace>,
}

pub fn format_header(h: &TraceHeader) -> String {
    format!(
        "{MAGIC} problem={} num_vars={} num_clauses={} k={}\n{COLUMNS}\n",
        h.problem_id, h.num_vars, h.num_clauses, h.k
    )
}

/// The metadata line plus flip rows of one try.
pub fn format_try(trace: &Trace) -> String {
    let mut out = String::with_capacity(64 + trace.flips.len() * 28);
    let solved = trace
        .solved_at
        .map_or_else(|| "none".to_owned(), |s| s.to_string());
    writeln!(
        out,
        "# try try_id={} seed={} initial_score={} solved_at={} flips={}",
        trace.try_id,
        trace.seed,
        trace.initial_score,
        solved,
        trace.flips.len()
    )
    .unwrap();
    for r in &trace.flips {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            trace.try_id,
            r.index,
            r.var.number(),
            r.delta,
            r.score_after,
            r.poss_size,
            r.best_delta
        )
        .unwrap();
    }
    out
}

pub fn format_file(header: &TraceHeader, traces: &[Trace]) -> String {
    let mut out = format_header(header);
    for t in traces {
        out.push_str(&format_try(t));
    }
    out
}

fn key_values(line: usize, text: &str) -> impl Iterator<Item = Result<(&str, &str), TraceFormatError>> {
    text.split_whitespace().map(move |kv| {
        kv.split_once('=')
            .ok_or_else(|| syntax(line, format!("expected key=value, got `{kv}`")))
    })
}

fn num<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, TraceFormatError> {
    value
        .parse()
        .map_err(|_| syntax(line, format!("bad value `{value}` for {key}")))
}

pub fn parse_header(line_no: usize, line: &str) -> Result<TraceHeader, TraceFormatError> {
    let rest = line.strip_prefix(MAGIC).ok_or(TraceFormatError::MissingHeader)?;
    let (mut p, mut n, mut l, mut k) = (None, None, None, None);
    for kv in key_values(line_no, rest) {
        let (key, value) = kv?;
        match key {
            "problem" => p = Some(num(line_no, key, value)?),
            "num_vars" => n = Some(num(line_no, key, value)?),
            "num_clauses" => l = Some(num(line_no, key, value)?),
            "k" => k = Some(num(line_no, key, value)?),
            _ => return Err(syntax(line_no, format!("unknown header key `{key}`"))),
        }
    }
    match (p, n, l, k) {
        (Some(problem_id), Some(num_vars), Some(num_clauses), Some(k)) => Ok(TraceHeader {
            problem_id,
            num_vars,
            num_clauses,
            k,
        }),
        _ => Err(syntax(line_no, "incomplete header")),
    }
}

struct TryMeta {
    try_id: u64,
    seed: u64,
    initial_score: u32,
    solved_at: Option<u32>,
    flips: usize,
}

fn parse_try_meta(line_no: usize, rest: &str) -> Result<TryMeta, TraceFormatError> {
    let (mut try_id, mut seed, mut initial, mut solved, mut flips) = (None, None, None, None, None);
    for kv in key_values(line_no, rest) {
        let (key, value) = kv?;
        match key {
            "try_id" => try_id = Some(num(line_no, key, value)?),
            "seed" => seed = Some(num(line_no, key, value)?),
            "initial_score" => initial = Some(num(line_no, key, value)?),
            "solved_at" => {
                solved = Some(if value == "none" {
                    None
                } else {
                    Some(num(line_no, key, value)?)
                })
            }
            "flips" => flips = Some(num(line_no, key, value)?),
            _ => return Err(syntax(line_no, format!("unknown try key `{key}`"))),
        }
    }
    match (try_id, seed, initial, solved, flips) {
        (Some(try_id), Some(seed), Some(initial_score), Some(solved_at), Some(flips)) => Ok(TryMeta {
            try_id,
            seed,
            initial_score,
            solved_at,
            flips,
        }),
        _ => Err(syntax(line_no, "incomplete try metadata")),
    }
}

fn parse_row(line_no: usize, line: &str) -> Result<(u64, FlipRecord), TraceFormatError> {
    let mut fields = line.split(',');
    let mut next = |name: &str| {
        fields
            .next()
            .ok_or_else(|| syntax(line_no, format!("missing column {name}")))
    };
    let try_id: u64 = num(line_no, "try_id", next("try_id")?)?;
    let index = num(line_no, "flip_index", next("flip_index")?)?;
    let var: u32 = num(line_no, "variable", next("variable")?)?;
    if var == 0 {
        return Err(syntax(line_no, "variable 0"));
    }
    let delta = num(line_no, "delta", next("delta")?)?;
    let score_after = num(line_no, "score_after", next("score_after")?)?;
    let poss_size = num(line_no, "poss_size", next("poss_size")?)?;
    let best_delta = num(line_no, "best_delta", next("best_delta")?)?;
    if fields.next().is_some() {
        return Err(syntax(line_no, "too many columns"));
    }
    Ok((
        try_id,
        FlipRecord {
            index,
            var: Var::from_number(var),
            delta,
            score_after,
            poss_size,
            best_delta,
        },
    ))
}

/// Parse a trace file and check every try against its metadata and the
/// header's (N, L).
pub fn parse_file(text: &str) -> Result<TraceFile, TraceFormatError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (no, first) = lines.next().ok_or(TraceFormatError::MissingHeader)?;
    let header = parse_header(no, first)?;
    match lines.next() {
        Some((_, l)) if l == COLUMNS => {}
        Some((no, _)) => return Err(syntax(no, "expected column header")),
        None => return Err(syntax(no + 1, "expected column header")),
    }

    let mut traces: Vec<(Trace, usize)> = Vec::new();
    for (no, line) in lines {
        if let Some(rest) = line.strip_prefix("# try") {
            let meta = parse_try_meta(no, rest)?;
            traces.push((
                Trace {
                    problem_id: header.problem_id,
                    try_id: meta.try_id,
                    seed: meta.seed,
                    num_vars: header.num_vars,
                    num_clauses: header.num_clauses,
                    k: header.k,
                    initial_score: meta.initial_score,
                    flip_count: meta.flips as u32,
                    flips: Vec::with_capacity(meta.flips),
                    solved_at: meta.solved_at,
                },
                meta.flips,
            ));
        } else if line.is_empty() {
            continue;
        } else {
            let (try_id, record) = parse_row(no, line)?;
            let (current, _) = traces
                .last_mut()
                .ok_or_else(|| syntax(no, "flip row before any try metadata"))?;
            if current.try_id != try_id {
                return Err(syntax(no, format!("row for try {try_id} inside try {}", current.try_id)));
            }
            current.flips.push(record);
        }
    }

    let traces = traces
        .into_iter()
        .map(|(t, declared)| validate(&header, t, declared))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TraceFile { header, traces })
}

fn validate(h: &TraceHeader, t: Trace, declared: usize) -> Result<Trace, TraceFormatError> {
    let bad = |msg: String| TraceFormatError::Inconsistent { try_id: t.try_id, msg };
    if t.flips.len() != declared {
        return Err(bad(format!("declared {declared} flips, found {}", t.flips.len())));
    }
    let mut score = i64::from(t.initial_score);
    for (i, r) in t.flips.iter().enumerate() {
        if r.index as usize != i + 1 {
            return Err(bad(format!("flip {} out of order", r.index)));
        }
        if r.var.index() >= h.num_vars {
            return Err(bad(format!("variable {} exceeds N = {}", r.var.number(), h.num_vars)));
        }
        score += i64::from(r.delta);
        if score != i64::from(r.score_after) || r.score_after as usize > h.num_clauses {
            return Err(bad(format!("score mismatch at flip {}", r.index)));
        }
    }
    if let Some(s) = t.solved_at {
        if s as usize != t.flips.len() || t.score_at(s as usize) as usize != h.num_clauses {
            return Err(bad(format!("solved_at {s} inconsistent with records")));
        }
    }
    Ok(t)
}
