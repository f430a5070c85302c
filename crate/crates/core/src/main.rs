use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use gsat_lab::campaign::{campaign_name, run_campaign, CampaignConfig, Store};
use gsat_lab::dimacs::emit_dimacs;
use gsat_lab::report::{analyze, find_campaign, report, ReportKind, ReportOptions};
use gsat_lab::{generate_random_ksat, GeneratorSpec};

/// GSAT experiments on random k-SAT: generate instances, run seeded
/// campaigns, analyse traces and reproduce the reference figures and tables.
#[derive(Parser)]
#[command(name = "gsat-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a random k-SAT instance in DIMACS CNF.
    Gen {
        #[command(flatten)]
        shape: Shape,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run (or resume) a campaign into `<out>/<campaign name>`.
    Run {
        #[command(flatten)]
        shape: Shape,
        #[arg(long, default_value_t = 500)]
        problems: usize,
        /// Tries per problem.
        #[arg(long, default_value_t = 10)]
        tries: usize,
        /// Flip budget per try [default: 2.5 N]
        #[arg(long)]
        max_flips: Option<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        root: Root,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Curve horizon used by analysis [default: max flips]
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Write curves.csv, phases.csv and fits.csv for one campaign.
    Analyze {
        #[command(flatten)]
        shape: Shape,
        #[command(flatten)]
        root: Root,
    },
    /// Reproduce a named figure or table from the campaigns under the root.
    Report {
        /// figure1..figure4, table1..table3, gradient, histogram, sec6, or all
        which: String,
        #[command(flatten)]
        shape: Shape,
        #[command(flatten)]
        root: Root,
    },
}

#[derive(Args)]
struct Shape {
    /// Number of variables N.
    #[arg(long = "n", default_value_t = 500)]
    num_vars: usize,
    /// Clauses per variable.
    #[arg(long, default_value_t = 4.3)]
    ratio: f64,
    /// Exact clause count; overrides --ratio.
    #[arg(long)]
    clauses: Option<usize>,
    #[arg(long, default_value_t = 3)]
    k: usize,
}

impl Shape {
    fn name(&self) -> String {
        campaign_name(self.num_vars, self.clauses, self.ratio, self.k)
    }
}

#[derive(Args)]
struct Root {
    /// Store root holding one directory per campaign.
    #[arg(long = "out", env = "GSAT_LAB_OUT", default_value = "gsat-runs")]
    dir: PathBuf,
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { shape, seed, out } => {
            let spec = match shape.clauses {
                Some(l) => GeneratorSpec::new(shape.num_vars, l, shape.k, seed),
                None => GeneratorSpec::with_ratio(shape.num_vars, shape.ratio, shape.k, seed),
            };
            let text = emit_dimacs(&generate_random_ksat(&spec)?);
            match out {
                Some(path) => fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
        }
        Command::Run {
            shape,
            problems,
            tries,
            max_flips,
            seed,
            root,
            workers,
            horizon,
        } => {
            let cfg = CampaignConfig {
                num_clauses: shape.clauses,
                k: shape.k,
                problems,
                tries_per_problem: tries,
                max_flips,
                master_seed: seed,
                horizon,
                output_dir: root.dir.join(shape.name()),
                workers,
                ..CampaignConfig::new(shape.num_vars, shape.ratio)
            };
            let manifest = run_campaign(&cfg)?;
            println!(
                "{}: {} problems x {} tries, N={} L={} k={}, {} flips per try, {:.1}s -> {}",
                manifest.name,
                problems,
                tries,
                shape.num_vars,
                manifest.num_clauses,
                shape.k,
                manifest.max_flips,
                manifest.timing.elapsed_secs,
                cfg.output_dir.display()
            );
        }
        Command::Analyze { shape, root } => {
            let name = shape.name();
            let Some(dir) = find_campaign(&root.dir, &name) else {
                bail!("campaign {name} not found under {}", root.dir.display());
            };
            let store = Store::load(&dir)?;
            let out = dir.join("reports");
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            for a in analyze(&store)? {
                let path = out.join(&a.file_name);
                fs::write(&path, &a.contents).with_context(|| format!("writing {}", path.display()))?;
                println!("wrote {}", path.display());
            }
        }
        Command::Report { which, shape, root } => {
            let kinds = if which == "all" {
                ReportKind::ALL.to_vec()
            } else {
                vec![which.parse::<ReportKind>()?]
            };
            let opts = ReportOptions {
                num_vars: shape.num_vars,
                ratio: shape.ratio,
                k: shape.k,
            };
            let mut failures = 0;
            for kind in kinds {
                println!("== {kind}");
                match report(&root.dir, kind, opts) {
                    Ok(out) => {
                        print!("{}", out.text);
                        for path in out.write(&root.dir)? {
                            println!("wrote {}", path.display());
                        }
                    }
                    Err(e) => {
                        eprintln!("{kind}: {e}");
                        failures += 1;
                    }
                }
            }
            if failures > 0 {
                bail!("{failures} report(s) could not be produced");
            }
        }
    }
    Ok(())
}
