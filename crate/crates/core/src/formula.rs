//! CNF formulas, assignments, and the random k-SAT generator.

use std::fmt;

use thiserror::Error;

use crate::rng::Stream;

/// A propositional variable, stored zero-based. DIMACS and trace files use
/// the one-based [`Var::number`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(u32);

impl Var {
    pub fn from_index(index: usize) -> Self {
        Var(u32::try_from(index).expect("variable index overflows u32"))
    }

    /// Variable with one-based number `n`. Panics on 0.
    pub fn from_number(n: u32) -> Self {
        assert!(n >= 1, "variable numbers start at 1");
        Var(n - 1)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn number(self) -> u32 {
        self.0 + 1
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.number())
    }
}

/// A literal packed as `2 * var + negated`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Self {
        Lit(var.0 << 1 | u32::from(!positive))
    }

    pub fn positive(var: Var) -> Self {
        Self::new(var, true)
    }

    pub fn negative(var: Var) -> Self {
        Self::new(var, false)
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// True when the literal holds under `value` for its variable.
    #[inline]
    pub fn holds(self, value: bool) -> bool {
        value == self.is_positive()
    }

    /// Signed DIMACS form, e.g. `-3` for ¬x3.
    pub fn to_dimacs(self) -> i64 {
        let n = i64::from(self.var().number());
        if self.is_positive() {
            n
        } else {
            -n
        }
    }

    /// Inverse of [`Lit::to_dimacs`]. Returns `None` for 0 or out-of-range values.
    pub fn from_dimacs(value: i64) -> Option<Self> {
        if value == 0 {
            return None;
        }
        let n = u32::try_from(value.unsigned_abs()).ok()?;
        Some(Lit::new(Var::from_number(n), value > 0))
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_positive() {
            write!(f, "{}", self.var())
        } else {
            write!(f, "¬{}", self.var())
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("clause {clause} mentions variable {var} but the formula has {num_vars} variables")]
    VarOutOfRange { clause: usize, var: u32, num_vars: usize },
    #[error("clause {clause} mentions variable {var} more than once")]
    RepeatedVar { clause: usize, var: u32 },
    #[error("clause {clause} has {found} literals, expected {expected}")]
    Width { clause: usize, found: usize, expected: usize },
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("assignment has {found} values but the formula has {expected} variables")]
    Dimension { expected: usize, found: usize },
}

/// An immutable CNF formula.
///
/// Clauses are stored contiguously. Every clause lists distinct variables;
/// `k` is the widest clause (all clauses have exactly `k` literals for
/// generated instances). Per-variable occurrence lists are built once at
/// construction for flip updates.
#[derive(Clone, Debug)]
pub struct Formula {
    num_vars: usize,
    k: usize,
    lits: Vec<Lit>,
    starts: Vec<usize>,
    occ_starts: Vec<usize>,
    occ: Vec<Occurrence>,
}

/// One appearance of a variable: the clause and the literal it appears as.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Occurrence {
    pub clause: u32,
    pub lit: Lit,
}

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        // occurrence lists are derived data
        self.num_vars == other.num_vars
            && self.k == other.k
            && self.lits == other.lits
            && self.starts == other.starts
    }
}

impl Eq for Formula {}

impl Formula {
    /// Build a formula, checking variable ranges and per-clause distinctness.
    pub fn new<C>(num_vars: usize, clauses: C) -> Result<Self, FormulaError>
    where
        C: IntoIterator,
        C::Item: AsRef<[Lit]>,
    {
        let mut lits = Vec::new();
        let mut starts = vec![0];
        let mut k = 0;
        let mut seen = vec![usize::MAX; num_vars];
        for (ci, clause) in clauses.into_iter().enumerate() {
            let clause = clause.as_ref();
            for &lit in clause {
                let v = lit.var().index();
                if v >= num_vars {
                    return Err(FormulaError::VarOutOfRange {
                        clause: ci,
                        var: lit.var().number(),
                        num_vars,
                    });
                }
                if seen[v] == ci {
                    return Err(FormulaError::RepeatedVar {
                        clause: ci,
                        var: lit.var().number(),
                    });
                }
                seen[v] = ci;
            }
            k = k.max(clause.len());
            lits.extend_from_slice(clause);
            starts.push(lits.len());
        }
        Ok(Self::from_parts(num_vars, k, lits, starts))
    }

    fn from_parts(num_vars: usize, k: usize, lits: Vec<Lit>, starts: Vec<usize>) -> Self {
        let mut counts = vec![0usize; num_vars + 1];
        for lit in &lits {
            counts[lit.var().index() + 1] += 1;
        }
        for i in 0..num_vars {
            counts[i + 1] += counts[i];
        }
        let occ_starts = counts.clone();
        let mut fill = counts;
        let mut occ = vec![
            Occurrence {
                clause: 0,
                lit: Lit(0)
            };
            lits.len()
        ];
        for c in 0..starts.len() - 1 {
            for &lit in &lits[starts[c]..starts[c + 1]] {
                let v = lit.var().index();
                occ[fill[v]] = Occurrence {
                    clause: c as u32,
                    lit,
                };
                fill[v] += 1;
            }
        }
        Formula {
            num_vars,
            k,
            lits,
            starts,
            occ_starts,
            occ,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.starts.len() - 1
    }

    /// Width of the widest clause (0 for an empty formula).
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn clause(&self, c: usize) -> &[Lit] {
        &self.lits[self.starts[c]..self.starts[c + 1]]
    }

    pub fn clauses(&self) -> impl ExactSizeIterator<Item = &[Lit]> + '_ {
        (0..self.num_clauses()).map(move |c| self.clause(c))
    }

    pub fn occurrences(&self, var: Var) -> &[Occurrence] {
        let v = var.index();
        &self.occ[self.occ_starts[v]..self.occ_starts[v + 1]]
    }

    /// Largest number of clauses any single variable appears in.
    pub fn max_occurrences(&self) -> usize {
        (0..self.num_vars)
            .map(|v| self.occ_starts[v + 1] - self.occ_starts[v])
            .max()
            .unwrap_or(0)
    }

    /// Number of clauses satisfied by `assignment`.
    pub fn score(&self, assignment: &Assignment) -> Result<usize, FormulaError> {
        self.check_dimension(assignment)?;
        Ok(self
            .clauses()
            .filter(|clause| clause.iter().any(|&l| assignment.satisfies(l)))
            .count())
    }

    pub fn check_dimension(&self, assignment: &Assignment) -> Result<(), FormulaError> {
        if assignment.len() != self.num_vars {
            return Err(FormulaError::Dimension {
                expected: self.num_vars,
                found: assignment.len(),
            });
        }
        Ok(())
    }

    /// Check that every clause has exactly `k` literals.
    pub fn check_width(&self, k: usize) -> Result<(), FormulaError> {
        match self.clauses().position(|c| c.len() != k) {
            Some(clause) => Err(FormulaError::Width {
                clause,
                found: self.clause(clause).len(),
                expected: k,
            }),
            None => Ok(()),
        }
    }
}

/// A total truth assignment.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Self { values }
    }

    pub fn all_false(num_vars: usize) -> Self {
        Self::new(vec![false; num_vars])
    }

    /// Each variable independently true with probability ½, one coin per
    /// variable in index order.
    pub fn random(num_vars: usize, rng: &mut Stream) -> Self {
        Self::new((0..num_vars).map(|_| rng.coin()).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn value(&self, var: Var) -> bool {
        self.values[var.index()]
    }

    #[inline]
    pub fn satisfies(&self, lit: Lit) -> bool {
        lit.holds(self.values[lit.var().index()])
    }

    pub fn set(&mut self, var: Var, value: bool) {
        self.values[var.index()] = value;
    }

    pub fn flip(&mut self, var: Var) {
        let v = &mut self.values[var.index()];
        *v = !*v;
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }
}

/// How many clauses to generate: an explicit count or a clause/variable ratio.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum ClauseCount {
    Exact(usize),
    /// `L = round(ratio * N)`.
    Ratio(f64),
}

impl ClauseCount {
    pub fn resolve(self, num_vars: usize) -> usize {
        match self {
            ClauseCount::Exact(l) => l,
            ClauseCount::Ratio(r) => (r * num_vars as f64).round() as usize,
        }
    }
}

/// Parameters of a random k-SAT instance.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct GeneratorSpec {
    pub num_vars: usize,
    pub clauses: ClauseCount,
    pub k: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(num_vars: usize, num_clauses: usize, k: usize, seed: u64) -> Self {
        Self {
            num_vars,
            clauses: ClauseCount::Exact(num_clauses),
            k,
            seed,
        }
    }

    pub fn with_ratio(num_vars: usize, ratio: f64, k: usize, seed: u64) -> Self {
        Self {
            num_vars,
            clauses: ClauseCount::Ratio(ratio),
            k,
            seed,
        }
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.resolve(self.num_vars)
    }

    pub fn validate(&self) -> Result<(), FormulaError> {
        if self.k < 1 {
            return Err(FormulaError::InvalidSpec("k must be at least 1".into()));
        }
        if self.num_vars < self.k {
            return Err(FormulaError::InvalidSpec(format!(
                "need N >= k, got N = {} and k = {}",
                self.num_vars, self.k
            )));
        }
        if let ClauseCount::Ratio(r) = self.clauses {
            if !(r.is_finite() && r >= 0.0) {
                return Err(FormulaError::InvalidSpec(format!("bad clause ratio {r}")));
            }
        }
        Ok(())
    }
}

/// Draw a random k-SAT formula.
///
/// Each clause picks its `k` variables by repeated uniform draws from `1..=N`,
/// rejecting repeats, so the variable set is a uniform k-subset. Then one fair
/// coin per literal, in clause order, picks its sign. Clauses are independent
/// and may repeat.
pub fn generate_random_ksat(spec: &GeneratorSpec) -> Result<Formula, FormulaError> {
    spec.validate()?;
    let n = spec.num_vars;
    let k = spec.k;
    let num_clauses = spec.num_clauses();
    let mut rng = Stream::new(spec.seed);
    let mut lits = Vec::with_capacity(num_clauses * k);
    let mut starts = Vec::with_capacity(num_clauses + 1);
    starts.push(0);
    let mut vars: Vec<u32> = Vec::with_capacity(k);
    for _ in 0..num_clauses {
        vars.clear();
        while vars.len() < k {
            let v = rng.below(n as u64) as u32;
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        for &v in &vars {
            lits.push(Lit::new(Var(v), rng.coin()));
        }
        starts.push(lits.len());
    }
    let k = if num_clauses == 0 { 0 } else { k };
    Ok(Formula::from_parts(n, k, lits, starts))
}
