//! The GSAT procedure with per-flip instrumentation.

use crate::formula::{Assignment, Formula, Var};
use crate::rng::{derive_seed, Stream};
use crate::state::SearchState;

/// One executed flip.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct FlipRecord {
    /// 1-based position within the try.
    pub index: u32,
    pub var: Var,
    /// Score change caused by the flip.
    pub delta: i32,
    pub score_after: u32,
    /// Size of the argmax set the variable was drawn from.
    pub poss_size: u32,
    /// Best delta available at selection time. Always equals `delta`.
    pub best_delta: i32,
}

/// The record of one try.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub problem_id: u64,
    pub try_id: u64,
    pub seed: u64,
    pub num_vars: usize,
    pub num_clauses: usize,
    pub k: usize,
    pub initial_score: u32,
    /// Number of flips executed, kept even when `flips` is not recorded.
    pub flip_count: u32,
    pub flips: Vec<FlipRecord>,
    /// Flip index at which the score reached L (0 if the initial assignment
    /// already satisfied the formula).
    pub solved_at: Option<u32>,
}

impl Trace {
    pub fn is_solved(&self) -> bool {
        self.solved_at.is_some()
    }

    /// Flip sizes in order.
    pub fn deltas(&self) -> impl ExactSizeIterator<Item = i32> + '_ {
        self.flips.iter().map(|r| r.delta)
    }

    /// Score after `x` flips, for `x <= flips.len()`.
    pub fn score_at(&self, x: usize) -> u32 {
        if x == 0 {
            self.initial_score
        } else {
            self.flips[x - 1].score_after
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct GsatParams {
    pub max_tries: u32,
    pub max_flips: u32,
    pub record_trace: bool,
}

impl GsatParams {
    pub fn new(max_tries: u32, max_flips: u32) -> Self {
        assert!(max_tries > 0 && max_flips > 0, "max_tries and max_flips must be positive");
        Self {
            max_tries,
            max_flips,
            record_trace: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GsatOutcome {
    pub assignment: Option<Assignment>,
    pub tries_used: u32,
    /// One per try when `record_trace` is set; otherwise empty.
    pub traces: Vec<Trace>,
}

/// Run one try from a fresh random assignment drawn from `Stream::new(seed)`.
pub fn run_try(formula: &Formula, max_flips: u32, seed: u64) -> Trace {
    run_try_inner(formula, max_flips, seed, true).0
}

fn run_try_inner(formula: &Formula, max_flips: u32, seed: u64, record: bool) -> (Trace, Option<Assignment>) {
    let mut rng = Stream::new(seed);
    let start = Assignment::random(formula.num_vars(), &mut rng);
    let mut state = SearchState::new(formula, start).expect("assignment sized from formula");
    let initial_score = state.score() as u32;
    let mut flips = Vec::with_capacity(if record { max_flips as usize } else { 0 });
    let mut solved_at = state.is_satisfied().then_some(0);
    let mut flip_count = 0;

    while solved_at.is_none() && flip_count < max_flips {
        let (best, set) = state.poss_flips().expect("unsatisfied formula has variables");
        let poss_size = set.len() as u32;
        let var = Var::from_index(set[rng.below(u64::from(poss_size)) as usize] as usize);
        let applied = state.flip(var).expect("var drawn from the formula");
        flip_count += 1;
        if record {
            flips.push(FlipRecord {
                index: flip_count,
                var,
                delta: applied,
                score_after: state.score() as u32,
                poss_size,
                best_delta: best,
            });
        }
        if state.is_satisfied() {
            solved_at = Some(flip_count);
        }
    }

    let solution = solved_at.map(|_| state.assignment().clone());
    let trace = Trace {
        problem_id: 0,
        try_id: 0,
        seed,
        num_vars: formula.num_vars(),
        num_clauses: formula.num_clauses(),
        k: formula.k(),
        initial_score,
        flip_count,
        flips,
        solved_at,
    };
    (trace, solution)
}

/// Up to `max_tries` tries; try `t` is seeded with `derive_seed(seed, "try", 0, t)`.
pub fn run_gsat(formula: &Formula, params: GsatParams, seed: u64) -> GsatOutcome {
    let mut traces = Vec::new();
    for t in 0..params.max_tries {
        let try_seed = derive_seed(seed, "try", 0, u64::from(t));
        let (mut trace, solution) = run_try_inner(formula, params.max_flips, try_seed, params.record_trace);
        trace.try_id = u64::from(t);
        if params.record_trace {
            traces.push(trace);
        }
        if solution.is_some() {
            return GsatOutcome {
                assignment: solution,
                tries_used: t + 1,
                traces,
            };
        }
    }
    GsatOutcome {
        assignment: None,
        tries_used: params.max_tries,
        traces,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{generate_random_ksat, GeneratorSpec, Lit};

    fn l(d: i64) -> Lit {
        Lit::from_dimacs(d).unwrap()
    }

    #[test]
    fn empty_formula_is_solved_at_zero() {
        let f = Formula::new(5, Vec::<Vec<Lit>>::new()).unwrap();
        let t = run_try(&f, 10, 1);
        assert!(t.flips.is_empty());
        assert_eq!(t.solved_at, Some(0));
    }

    #[test]
    fn unit_clause_solved_in_first_try() {
        let f = Formula::new(1, [[l(1)]]).unwrap();
        for seed in 0..50 {
            let out = run_gsat(&f, GsatParams::new(2, 1), seed);
            assert_eq!(out.tries_used, 1);
            assert_eq!(out.assignment, Some(Assignment::new(vec![true])));
            assert!(out.traces[0].flip_count <= 1);
        }
    }

    #[test]
    fn contradiction_fails_on_a_plateau_of_one() {
        let f = Formula::new(1, [[l(1)], [l(-1)]]).unwrap();
        let out = run_gsat(&f, GsatParams::new(3, 7), 9);
        assert!(out.assignment.is_none());
        assert_eq!(out.tries_used, 3);
        assert_eq!(out.traces.len(), 3);
        for t in &out.traces {
            assert_eq!(t.initial_score, 1);
            assert_eq!(t.flips.len(), 7);
            assert!(t.flips.iter().all(|r| r.score_after == 1 && r.delta == 0));
        }
    }

    #[test]
    fn trace_records_are_consistent() {
        let f = generate_random_ksat(&GeneratorSpec::new(100, 430, 3, 1)).unwrap();
        for seed in 0..20 {
            let t = run_try(&f, 250, seed);
            let mut score = t.initial_score as i64;
            for (i, r) in t.flips.iter().enumerate() {
                assert_eq!(r.index as usize, i + 1);
                assert_eq!(r.delta, r.best_delta);
                score += i64::from(r.delta);
                assert_eq!(score, i64::from(r.score_after));
                assert!(r.poss_size >= 1 && r.poss_size <= 100);
            }
            assert_eq!(t.flip_count as usize, t.flips.len());
            if let Some(s) = t.solved_at {
                assert_eq!(s as usize, t.flips.len());
                assert_eq!(t.score_at(s as usize), 430);
            } else {
                assert_eq!(t.flips.len(), 250);
            }
        }
    }

    #[test]
    fn replay_is_identical() {
        let f = generate_random_ksat(&GeneratorSpec::new(200, 860, 3, 4)).unwrap();
        assert_eq!(run_try(&f, 500, 77), run_try(&f, 500, 77));
        assert_ne!(run_try(&f, 500, 77), run_try(&f, 500, 78));
    }

    #[test]
    fn unrecorded_runs_agree_with_recorded_ones() {
        let f = generate_random_ksat(&GeneratorSpec::new(50, 150, 3, 2)).unwrap();
        let mut p = GsatParams::new(5, 100);
        let a = run_gsat(&f, p, 3);
        p.record_trace = false;
        let b = run_gsat(&f, p, 3);
        assert_eq!(a.assignment, b.assignment);
        assert_eq!(a.tries_used, b.tries_used);
        assert!(b.traces.is_empty());
        if let Some(sol) = &a.assignment {
            assert_eq!(f.score(sol).unwrap(), 150);
        }
    }

    #[test]
    fn solves_some_easy_instances() {
        let f = generate_random_ksat(&GeneratorSpec::new(50, 150, 3, 10)).unwrap();
        let out = run_gsat(&f, GsatParams::new(10, 500), 1);
        let sol = out.assignment.expect("ratio 3 at N=50 is easy");
        assert_eq!(f.score(&sol).unwrap(), 150);
    }
}
