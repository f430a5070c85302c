//! Incremental GSAT search state.
//!
//! For every clause we keep the number of currently true literals, and for
//! every variable the score change its flip would cause (`make - break`).
//! Variables are filed in buckets keyed by that delta so the argmax set is
//! always the highest nonempty bucket. A flip visits only the clauses that
//! contain the flipped variable.

use crate::formula::{Assignment, Formula, FormulaError, Var};

const NOT_FILED: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct SearchState<'f> {
    formula: &'f Formula,
    assignment: Assignment,
    true_count: Vec<u32>,
    delta: Vec<i32>,
    score: usize,
    buckets: DeltaBuckets,
}

/// Variables grouped by delta; `max` is an upper bound on the highest
/// nonempty bucket, tightened lazily on lookup.
#[derive(Clone, Debug)]
struct DeltaBuckets {
    offset: i32,
    buckets: Vec<Vec<u32>>,
    position: Vec<u32>,
    max: usize,
}

impl DeltaBuckets {
    fn new(num_vars: usize, max_abs_delta: usize) -> Self {
        Self {
            offset: max_abs_delta as i32,
            buckets: vec![Vec::new(); 2 * max_abs_delta + 1],
            position: vec![NOT_FILED; num_vars],
            max: 0,
        }
    }

    #[inline]
    fn slot(&self, delta: i32) -> usize {
        (delta + self.offset) as usize
    }

    #[inline]
    fn insert(&mut self, var: u32, delta: i32) {
        let slot = self.slot(delta);
        let bucket = &mut self.buckets[slot];
        self.position[var as usize] = bucket.len() as u32;
        bucket.push(var);
        if slot > self.max {
            self.max = slot;
        }
    }

    #[inline]
    fn remove(&mut self, var: u32, delta: i32) {
        let slot = self.slot(delta);
        let bucket = &mut self.buckets[slot];
        let pos = self.position[var as usize] as usize;
        let last = bucket.pop().expect("var is filed in this bucket");
        if last != var {
            bucket[pos] = last;
            self.position[last as usize] = pos as u32;
        }
        self.position[var as usize] = NOT_FILED;
    }

    #[inline]
    fn top(&mut self) -> Option<(i32, &[u32])> {
        while self.buckets[self.max].is_empty() {
            if self.max == 0 {
                return None;
            }
            self.max -= 1;
        }
        Some((self.max as i32 - self.offset, &self.buckets[self.max]))
    }
}

impl<'f> SearchState<'f> {
    /// Build all caches for `assignment` from scratch.
    pub fn new(formula: &'f Formula, assignment: Assignment) -> Result<Self, FormulaError> {
        formula.check_dimension(&assignment)?;
        let n = formula.num_vars();
        let mut true_count = Vec::with_capacity(formula.num_clauses());
        let mut delta = vec![0i32; n];
        let mut score = 0;
        for clause in formula.clauses() {
            let count = clause.iter().filter(|&&l| assignment.satisfies(l)).count();
            match count {
                0 => {
                    for l in clause {
                        delta[l.var().index()] += 1;
                    }
                }
                1 => {
                    let sole = clause.iter().find(|&&l| assignment.satisfies(l)).unwrap();
                    delta[sole.var().index()] -= 1;
                }
                _ => {}
            }
            if count > 0 {
                score += 1;
            }
            true_count.push(count as u32);
        }
        let mut buckets = DeltaBuckets::new(n, formula.max_occurrences());
        for (v, &d) in delta.iter().enumerate() {
            buckets.insert(v as u32, d);
        }
        Ok(Self {
            formula,
            assignment,
            true_count,
            delta,
            score,
            buckets,
        })
    }

    pub fn formula(&self) -> &'f Formula {
        self.formula
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    pub fn into_assignment(self) -> Assignment {
        self.assignment
    }

    pub fn score(&self) -> usize {
        self.score
    }

    pub fn is_satisfied(&self) -> bool {
        self.score == self.formula.num_clauses()
    }

    /// Score change if `var` were flipped now.
    pub fn delta(&self, var: Var) -> i32 {
        self.delta[var.index()]
    }

    pub fn deltas(&self) -> &[i32] {
        &self.delta
    }

    pub fn true_counts(&self) -> &[u32] {
        &self.true_count
    }

    /// The best available delta and every variable attaining it.
    ///
    /// Returns `None` only when the formula has no variables. The slice order
    /// is an internal detail but is deterministic for a given flip history.
    pub fn poss_flips(&mut self) -> Option<(i32, &[u32])> {
        if self.delta.is_empty() {
            return None;
        }
        self.buckets.top()
    }

    #[inline]
    fn shift(&mut self, v: usize, by: i32) {
        let old = self.delta[v];
        let new = old + by;
        self.buckets.remove(v as u32, old);
        self.buckets.insert(v as u32, new);
        self.delta[v] = new;
    }

    /// Flip `var`, returning the score change (its delta before the flip).
    pub fn flip(&mut self, var: Var) -> Result<i32, FormulaError> {
        let v = var.index();
        if v >= self.delta.len() {
            return Err(FormulaError::Dimension {
                expected: self.delta.len(),
                found: v + 1,
            });
        }
        let applied = self.delta[v];
        let formula = self.formula;
        let old_value = self.assignment.value(var);
        for occ in formula.occurrences(var) {
            let c = occ.clause as usize;
            let clause = formula.clause(c);
            let count = self.true_count[c];
            if occ.lit.holds(old_value) {
                // literal goes false
                match count {
                    1 => {
                        // clause breaks: v stops being its sole support, and
                        // every variable in it can now repair it
                        for l in clause {
                            self.shift(l.var().index(), 1);
                        }
                        self.shift(v, 1);
                        self.score -= 1;
                    }
                    2 => {
                        let other = clause
                            .iter()
                            .find(|&&l| l.var() != var && self.assignment.satisfies(l))
                            .expect("second true literal");
                        self.shift(other.var().index(), -1);
                    }
                    _ => {}
                }
                self.true_count[c] = count - 1;
            } else {
                // literal goes true
                match count {
                    0 => {
                        for l in clause {
                            self.shift(l.var().index(), -1);
                        }
                        self.shift(v, -1);
                        self.score += 1;
                    }
                    1 => {
                        let sole = clause
                            .iter()
                            .find(|&&l| self.assignment.satisfies(l))
                            .expect("one true literal");
                        self.shift(sole.var().index(), 1);
                    }
                    _ => {}
                }
                self.true_count[c] = count + 1;
            }
        }
        self.assignment.flip(var);
        debug_assert_eq!(self.delta[v], -applied);
        Ok(applied)
    }
}

#[cfg(test)]
pub(crate) mod brute {
    //! From-scratch recomputation used as the oracle for the caches.
    use crate::formula::{Assignment, Formula, Var};

    pub fn score(f: &Formula, a: &Assignment) -> usize {
        f.clauses()
            .filter(|c| c.iter().any(|&l| a.satisfies(l)))
            .count()
    }

    pub fn deltas(f: &Formula, a: &Assignment) -> Vec<i32> {
        let base = score(f, a) as i32;
        (0..f.num_vars())
            .map(|v| {
                let mut b = a.clone();
                b.flip(Var::from_index(v));
                score(f, &b) as i32 - base
            })
            .collect()
    }

    pub fn true_counts(f: &Formula, a: &Assignment) -> Vec<u32> {
        f.clauses()
            .map(|c| c.iter().filter(|&&l| a.satisfies(l)).count() as u32)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{generate_random_ksat, GeneratorSpec, Lit};
    use crate::rng::Stream;
    use proptest::prelude::*;

    fn l(d: i64) -> Lit {
        Lit::from_dimacs(d).unwrap()
    }

    fn assert_consistent(s: &mut SearchState<'_>) {
        let f = s.formula();
        let a = s.assignment().clone();
        assert_eq!(s.score(), brute::score(f, &a));
        assert_eq!(s.deltas(), brute::deltas(f, &a).as_slice());
        assert_eq!(s.true_counts(), brute::true_counts(f, &a).as_slice());
        if f.num_vars() > 0 {
            let want_best = *s.deltas().iter().max().unwrap();
            let mut want: Vec<u32> = (0..f.num_vars() as u32)
                .filter(|&v| s.deltas()[v as usize] == want_best)
                .collect();
            let (best, set) = s.poss_flips().unwrap();
            let mut got = set.to_vec();
            got.sort_unstable();
            want.sort_unstable();
            assert_eq!(best, want_best);
            assert_eq!(got, want);
        }
    }

    #[test]
    fn empty_formula() {
        let f = Formula::new(4, Vec::<Vec<Lit>>::new()).unwrap();
        let mut s = SearchState::new(&f, Assignment::all_false(4)).unwrap();
        assert_eq!(s.score(), 0);
        assert!(s.deltas().iter().all(|&d| d == 0));
        assert!(s.is_satisfied());
        assert_eq!(s.poss_flips().unwrap().1.len(), 4);
    }

    #[test]
    fn single_clause_all_false() {
        let f = Formula::new(5, [[l(1), l(2), l(3)]]).unwrap();
        let mut s = SearchState::new(&f, Assignment::all_false(5)).unwrap();
        assert_eq!(s.score(), 0);
        assert_eq!(s.deltas(), &[1, 1, 1, 0, 0]);
        let (best, set) = s.poss_flips().unwrap();
        let mut set = set.to_vec();
        set.sort_unstable();
        assert_eq!((best, set), (1, vec![0, 1, 2]));

        assert_eq!(s.flip(Var::from_number(1)).unwrap(), 1);
        assert_eq!(s.score(), 1);
        assert_eq!(s.deltas(), &[-1, 0, 0, 0, 0]);
        assert_consistent(&mut s);
    }

    #[test]
    fn sideways_when_clause_doubly_supported() {
        let f = Formula::new(5, [[l(1), l(2), l(3)]]).unwrap();
        let a = Assignment::new(vec![true, true, false, false, false]);
        let mut s = SearchState::new(&f, a).unwrap();
        let (best, set) = s.poss_flips().unwrap();
        assert_eq!(best, 0);
        assert_eq!(set.len(), 5);
    }

    #[test]
    fn dimension_errors() {
        let f = Formula::new(3, [[l(1), l(2), l(3)]]).unwrap();
        assert!(SearchState::new(&f, Assignment::all_false(2)).is_err());
        let mut s = SearchState::new(&f, Assignment::all_false(3)).unwrap();
        assert!(s.flip(Var::from_number(4)).is_err());
    }

    #[test]
    fn double_flip_is_identity() {
        let f = generate_random_ksat(&GeneratorSpec::new(30, 120, 3, 5)).unwrap();
        let mut rng = Stream::new(11);
        let mut s = SearchState::new(&f, Assignment::random(30, &mut rng)).unwrap();
        let before = (s.assignment().clone(), s.deltas().to_vec(), s.true_counts().to_vec(), s.score());
        for v in 0..30 {
            let var = Var::from_index(v);
            let d = s.flip(var).unwrap();
            assert_eq!(s.flip(var).unwrap(), -d);
            let after = (s.assignment().clone(), s.deltas().to_vec(), s.true_counts().to_vec(), s.score());
            assert_eq!(before, after);
        }
    }

    #[test]
    fn init_matches_brute_force_on_1000_instances() {
        let mut rng = Stream::new(2024);
        for i in 0..1000 {
            let n = 3 + rng.below(28) as usize;
            let m = rng.below(121) as usize;
            let f = generate_random_ksat(&GeneratorSpec::new(n, m, 3, i)).unwrap();
            let mut s = SearchState::new(&f, Assignment::random(n, &mut rng)).unwrap();
            assert_consistent(&mut s);
        }
    }

    #[test]
    fn long_random_walk_stays_consistent() {
        let f = generate_random_ksat(&GeneratorSpec::new(25, 110, 3, 77)).unwrap();
        let mut rng = Stream::new(3);
        let mut s = SearchState::new(&f, Assignment::random(25, &mut rng)).unwrap();
        for _ in 0..10_000 {
            let var = Var::from_index(rng.below(25) as usize);
            let expect = s.score() as i32 + s.delta(var);
            s.flip(var).unwrap();
            assert_eq!(s.score() as i32, expect);
            assert_consistent(&mut s);
        }
    }

    #[test]
    fn flips_only_touch_neighbour_deltas() {
        let f = generate_random_ksat(&GeneratorSpec::new(60, 200, 3, 8)).unwrap();
        let mut rng = Stream::new(4);
        let mut s = SearchState::new(&f, Assignment::random(60, &mut rng)).unwrap();
        for _ in 0..500 {
            let var = Var::from_index(rng.below(60) as usize);
            let mut neighbours = [false; 60];
            for o in f.occurrences(var) {
                for lit in f.clause(o.clause as usize) {
                    neighbours[lit.var().index()] = true;
                }
            }
            let before = s.deltas().to_vec();
            s.flip(var).unwrap();
            for u in 0..60 {
                if !neighbours[u] {
                    assert_eq!(before[u], s.deltas()[u]);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn mixed_width_formulas_stay_consistent(
            n in 1usize..12,
            clauses in prop::collection::vec(prop::collection::vec((1u32..12, any::<bool>()), 0..5), 0..30),
            flips in prop::collection::vec(0usize..12, 0..60),
            seed in any::<u64>(),
        ) {
            let clauses: Vec<Vec<Lit>> = clauses
                .into_iter()
                .map(|c| {
                    let mut seen = Vec::new();
                    c.into_iter()
                        .filter(|&(v, _)| (v as usize) <= n)
                        .filter(|&(v, _)| if seen.contains(&v) { false } else { seen.push(v); true })
                        .map(|(v, p)| Lit::new(Var::from_number(v), p))
                        .collect()
                })
                .collect();
            let f = Formula::new(n, &clauses).unwrap();
            let mut rng = Stream::new(seed);
            let mut s = SearchState::new(&f, Assignment::random(n, &mut rng)).unwrap();
            assert_consistent(&mut s);
            for v in flips {
                s.flip(Var::from_index(v % n)).unwrap();
                assert_consistent(&mut s);
            }
        }
    }
}
