//! A laboratory for GSAT on random k-SAT.
//!
//! * [`formula`], [`dimacs`]: CNF instances, the random k-SAT generator, scoring, interchange.
//! * [`state`], [`gsat`]: the incremental search state and the instrumented procedure.
//! * [`trace_io`]: the per-problem trace file format.
//! * [`analysis`]: phase segmentation, mean curves, exponential-decay fits, exploratory tables.
//! * [`campaign`], [`report`]: the reproducible experiment harness and its CSV reports.

pub mod analysis;
pub mod campaign;
pub mod dimacs;
pub mod formula;
pub mod gsat;
pub mod report;
pub mod rng;
pub mod state;
pub mod trace_io;

pub use formula::{generate_random_ksat, Assignment, Formula, GeneratorSpec, Lit, Var};
pub use gsat::{run_gsat, run_try, FlipRecord, GsatOutcome, GsatParams, Trace};
pub use state::SearchState;
