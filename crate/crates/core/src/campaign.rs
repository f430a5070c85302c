//! Deterministic experiment campaigns.
//!
//! A campaign is `problems × tries` GSAT tries on random k-SAT instances of
//! one shape. Problem `i` is generated from `derive_seed(master, "gen", i, 0)`
//! and try `(i, t)` runs from `derive_seed(master, "try", i, t)`, so the
//! stored bytes depend only on the configuration.
//!
//! Store layout:
//!
//! ```text
//! <dir>/manifest.json                    written last; its presence seals the store
//! <dir>/traces/problem_00000.trace       every try of one problem, in try order
//! <dir>/traces/parts/p00000_t0000.part   finished tries awaiting assembly
//! ```
//!
//! Each part and trace file is written to a temporary name and renamed into
//! place, so an interrupted run leaves only whole units behind and a rerun
//! skips them.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{generate_random_ksat, Formula, FormulaError, GeneratorSpec};
use crate::gsat::{run_try, Trace};
use crate::rng::{derive_seed, RNG_ALGORITHM};
use crate::trace_io::{self, TraceFormatError, TraceHeader};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_FORMAT: &str = "gsat-lab campaign v1";

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("invalid campaign config: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}: {source}", path.display())]
    Format {
        path: PathBuf,
        #[source]
        source: TraceFormatError,
    },
    #[error("{}: {source}", path.display())]
    Manifest {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("store integrity: {0}")]
    Integrity(String),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CampaignError + '_ {
    move |source| CampaignError::Io {
        path: path.to_owned(),
        source,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub num_vars: usize,
    /// Clause/variable ratio; ignored when `num_clauses` is set.
    pub ratio: f64,
    pub num_clauses: Option<usize>,
    pub k: usize,
    pub problems: usize,
    pub tries_per_problem: usize,
    /// Defaults to `round(2.5 N)`.
    pub max_flips: Option<u32>,
    pub master_seed: u64,
    /// Curve horizon for analysis; defaults to the flip budget.
    pub horizon: Option<usize>,
    #[serde(skip)]
    pub output_dir: PathBuf,
    #[serde(skip)]
    pub workers: usize,
}

impl CampaignConfig {
    /// Random 3-SAT at `ratio`, 500 problems × 10 tries, 2.5 N flips.
    pub fn new(num_vars: usize, ratio: f64) -> Self {
        Self {
            num_vars,
            ratio,
            num_clauses: None,
            k: 3,
            problems: 500,
            tries_per_problem: 10,
            max_flips: None,
            master_seed: 0,
            horizon: None,
            output_dir: PathBuf::new(),
            workers: 1,
        }
    }

    pub fn clauses(&self) -> usize {
        self.num_clauses
            .unwrap_or_else(|| (self.ratio * self.num_vars as f64).round() as usize)
    }

    pub fn flips(&self) -> u32 {
        self.max_flips
            .unwrap_or_else(|| (2.5 * self.num_vars as f64).round().max(1.0) as u32)
    }

    pub fn horizon(&self) -> usize {
        self.horizon.unwrap_or(self.flips() as usize)
    }

    pub fn total_tries(&self) -> usize {
        self.problems * self.tries_per_problem
    }

    /// Directory name used under a store root, e.g. `n500_r4.3_k3`.
    pub fn name(&self) -> String {
        campaign_name(self.num_vars, self.num_clauses, self.ratio, self.k)
    }

    pub fn validate(&self) -> Result<(), CampaignError> {
        let bad = |m: &str| Err(CampaignError::Config(m.to_owned()));
        if self.num_vars == 0 {
            return bad("N must be positive");
        }
        if self.num_clauses.is_none() && !(self.ratio > 0.0 && self.ratio.is_finite()) {
            return bad("clause ratio must be positive");
        }
        if self.k == 0 || self.k > self.num_vars {
            return bad("need 1 <= k <= N");
        }
        if self.tries_per_problem == 0 {
            return bad("tries per problem must be positive");
        }
        if self.flips() == 0 {
            return bad("max flips must be at least 1");
        }
        if self.workers == 0 {
            return bad("worker count must be positive");
        }
        Ok(())
    }

    pub fn generator_spec(&self, problem: usize) -> GeneratorSpec {
        GeneratorSpec::new(
            self.num_vars,
            self.clauses(),
            self.k,
            derive_seed(self.master_seed, "gen", problem as u64, 0),
        )
    }

    pub fn try_seed(&self, problem: usize, try_index: usize) -> u64 {
        derive_seed(self.master_seed, "try", problem as u64, try_index as u64)
    }

    pub fn generate_problem(&self, problem: usize) -> Result<Formula, CampaignError> {
        Ok(generate_random_ksat(&self.generator_spec(problem))?)
    }

    fn pool(&self) -> Result<rayon::ThreadPool, CampaignError> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| CampaignError::Config(format!("worker pool: {e}")))
    }

    fn trace_dir(&self) -> PathBuf {
        self.output_dir.join("traces")
    }

    fn parts_dir(&self) -> PathBuf {
        self.trace_dir().join("parts")
    }
}

/// Canonical campaign directory name.
pub fn campaign_name(num_vars: usize, num_clauses: Option<usize>, ratio: f64, k: usize) -> String {
    match num_clauses {
        Some(l) => format!("n{num_vars}_l{l}_k{k}"),
        None => format!("n{num_vars}_r{ratio}_k{k}"),
    }
}

pub fn trace_file_name(problem: usize) -> String {
    format!("problem_{problem:05}.trace")
}

fn part_file_name(problem: usize, try_index: usize) -> String {
    format!("p{problem:05}_t{try_index:04}.part")
}

fn run_one(cfg: &CampaignConfig, formula: &Formula, problem: usize, try_index: usize) -> Trace {
    let mut trace = run_try(formula, cfg.flips(), cfg.try_seed(problem, try_index));
    trace.problem_id = problem as u64;
    trace.try_id = try_index as u64;
    trace
}

/// Run every try of a campaign in memory, ordered by (problem, try).
pub fn collect_traces(cfg: &CampaignConfig) -> Result<Vec<Trace>, CampaignError> {
    cfg.validate()?;
    let per_problem: Vec<Vec<Trace>> = cfg.pool()?.install(|| {
        (0..cfg.problems)
            .into_par_iter()
            .map(|p| {
                let formula = cfg.generate_problem(p)?;
                Ok((0..cfg.tries_per_problem)
                    .into_par_iter()
                    .map(|t| run_one(cfg, &formula, p, t))
                    .collect())
            })
            .collect::<Result<_, CampaignError>>()
    })?;
    Ok(per_problem.into_iter().flatten().collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemEntry {
    pub index: usize,
    pub gen_seed: u64,
    pub try_seeds: Vec<u64>,
    pub trace_file: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub finished_unix_secs: u64,
    pub elapsed_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignManifest {
    pub format: String,
    pub software_version: String,
    pub rng_algorithm: String,
    pub name: String,
    pub config: CampaignConfig,
    pub num_clauses: usize,
    pub max_flips: u32,
    pub horizon: usize,
    pub problems: Vec<ProblemEntry>,
    pub timing: Timing,
}

impl CampaignManifest {
    fn build(cfg: &CampaignConfig, timing: Timing) -> Self {
        let problems = (0..cfg.problems)
            .map(|p| ProblemEntry {
                index: p,
                gen_seed: cfg.generator_spec(p).seed,
                try_seeds: (0..cfg.tries_per_problem).map(|t| cfg.try_seed(p, t)).collect(),
                trace_file: format!("traces/{}", trace_file_name(p)),
            })
            .collect();
        Self {
            format: MANIFEST_FORMAT.to_owned(),
            software_version: env!("CARGO_PKG_VERSION").to_owned(),
            rng_algorithm: RNG_ALGORITHM.to_owned(),
            name: cfg.name(),
            config: cfg.clone(),
            num_clauses: cfg.clauses(),
            max_flips: cfg.flips(),
            horizon: cfg.horizon(),
            problems,
            timing,
        }
    }

    pub fn read(dir: &Path) -> Result<Self, CampaignError> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        serde_json::from_str(&text).map_err(|source| CampaignError::Manifest { path, source })
    }
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), CampaignError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Run a campaign into `cfg.output_dir`, skipping work already on disk.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignManifest, CampaignError> {
    cfg.validate()?;
    let started = Instant::now();
    let traces_dir = cfg.trace_dir();
    let parts_dir = cfg.parts_dir();
    fs::create_dir_all(&parts_dir).map_err(io_err(&parts_dir))?;

    cfg.pool()?.install(|| {
        (0..cfg.problems)
            .into_par_iter()
            .try_for_each(|p| run_problem(cfg, p, &traces_dir, &parts_dir))
    })?;
    let _ = fs::remove_dir(&parts_dir);

    let timing = Timing {
        finished_unix_secs: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        elapsed_secs: started.elapsed().as_secs_f64(),
    };
    let manifest = CampaignManifest::build(cfg, timing);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_atomic(&cfg.output_dir.join(MANIFEST_FILE), &(json + "\n"))?;
    Ok(manifest)
}

fn run_problem(cfg: &CampaignConfig, p: usize, traces_dir: &Path, parts_dir: &Path) -> Result<(), CampaignError> {
    let final_path = traces_dir.join(trace_file_name(p));
    let part_paths: Vec<PathBuf> = (0..cfg.tries_per_problem)
        .map(|t| parts_dir.join(part_file_name(p, t)))
        .collect();
    if !final_path.exists() {
        let missing: Vec<usize> = (0..cfg.tries_per_problem)
            .filter(|&t| !part_paths[t].exists())
            .collect();
        if !missing.is_empty() {
            let formula = cfg.generate_problem(p)?;
            missing
                .into_par_iter()
                .try_for_each(|t| write_atomic(&part_paths[t], &trace_io::format_try(&run_one(cfg, &formula, p, t))))?;
        }
        let header = TraceHeader {
            problem_id: p as u64,
            num_vars: cfg.num_vars,
            num_clauses: cfg.clauses(),
            k: cfg.k,
        };
        let mut text = trace_io::format_header(&header);
        for path in &part_paths {
            text.push_str(&fs::read_to_string(path).map_err(io_err(path))?);
        }
        write_atomic(&final_path, &text)?;
    }
    for path in &part_paths {
        match fs::remove_file(path) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(io_err(path)(e)),
        }
    }
    Ok(())
}

/// A sealed campaign loaded from disk.
#[derive(Clone, Debug)]
pub struct Store {
    pub dir: PathBuf,
    pub manifest: CampaignManifest,
    pub traces: Vec<Trace>,
}

impl Store {
    /// Load every trace named by the manifest and check it against the
    /// declared problem shape and seeds.
    pub fn load(dir: &Path) -> Result<Self, CampaignError> {
        let manifest = CampaignManifest::read(dir)?;
        let cfg = &manifest.config;
        let loaded: Vec<Vec<Trace>> = manifest
            .problems
            .par_iter()
            .map(|entry| {
                let path = dir.join(&entry.trace_file);
                let text = fs::read_to_string(&path).map_err(io_err(&path))?;
                let file = trace_io::parse_file(&text).map_err(|source| CampaignError::Format {
                    path: path.clone(),
                    source,
                })?;
                let h = file.header;
                if (h.num_vars, h.num_clauses, h.k) != (cfg.num_vars, manifest.num_clauses, cfg.k)
                    || h.problem_id != entry.index as u64
                {
                    return Err(CampaignError::Integrity(format!(
                        "{} declares {h:?}, manifest expects problem {} with N={} L={} k={}",
                        path.display(),
                        entry.index,
                        cfg.num_vars,
                        manifest.num_clauses,
                        cfg.k
                    )));
                }
                let seeds: Vec<u64> = file.traces.iter().map(|t| t.seed).collect();
                if seeds != entry.try_seeds {
                    return Err(CampaignError::Integrity(format!(
                        "{}: try seeds differ from the manifest",
                        path.display()
                    )));
                }
                Ok(file.traces)
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            dir: dir.to_owned(),
            manifest,
            traces: loaded.into_iter().flatten().collect(),
        })
    }

    pub fn num_vars(&self) -> usize {
        self.manifest.config.num_vars
    }

    pub fn horizon(&self) -> usize {
        self.manifest.horizon
    }
}
