use std::fs;
use std::path::Path;

use gsat_lab::campaign::{run_campaign, CampaignConfig, CampaignError, CampaignManifest, Store};
use gsat_lab::trace_io::format_try;
use gsat_lab::{generate_random_ksat, run_try, GeneratorSpec};

fn config(dir: &Path, problems: usize, tries: usize) -> CampaignConfig {
    CampaignConfig {
        problems,
        tries_per_problem: tries,
        master_seed: 99,
        output_dir: dir.to_owned(),
        ..CampaignConfig::new(40, 4.3)
    }
}

/// Every trace file's bytes, by file name.
fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir.join("traces"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn manifest_without_timing(dir: &Path) -> CampaignManifest {
    let mut m = CampaignManifest::read(dir).unwrap();
    m.timing = Default::default();
    m
}

#[test]
fn zero_problems_gives_a_manifest_only() {
    let dir = tempfile::tempdir().unwrap();
    let m = run_campaign(&config(dir.path(), 0, 10)).unwrap();
    assert!(m.problems.is_empty());
    assert!(dir.path().join("manifest.json").is_file());
    assert!(snapshot(dir.path()).is_empty());
    assert!(Store::load(dir.path()).unwrap().traces.is_empty());
}

#[test]
fn smoke_run_yields_every_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = CampaignConfig {
        problems: 50,
        tries_per_problem: 10,
        max_flips: Some(250),
        output_dir: dir.path().to_owned(),
        ..CampaignConfig::new(100, 4.3)
    };
    run_campaign(&cfg).unwrap();
    let store = Store::load(dir.path()).unwrap();
    assert_eq!(store.traces.len(), 500);
    assert!(store.traces.iter().all(|t| (t.num_vars, t.num_clauses, t.k) == (100, 430, 3)));
    assert!(store.traces.iter().all(|t| t.flips.len() <= 250));
    assert!(!dir.path().join("traces/parts").exists());
}

#[test]
fn reruns_and_worker_counts_reproduce_the_store() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_campaign(&config(a.path(), 6, 4)).unwrap();
    let first = snapshot(a.path());
    run_campaign(&config(a.path(), 6, 4)).unwrap();
    assert_eq!(snapshot(a.path()), first);
    run_campaign(&CampaignConfig {
        workers: 3,
        ..config(b.path(), 6, 4)
    })
    .unwrap();
    assert_eq!(snapshot(b.path()), first);
    assert_eq!(manifest_without_timing(a.path()), manifest_without_timing(b.path()));
}

#[test]
fn resuming_a_partial_store_matches_an_uninterrupted_run() {
    let full = tempfile::tempdir().unwrap();
    run_campaign(&config(full.path(), 5, 4)).unwrap();
    let want = snapshot(full.path());

    // interrupted: problem 0 finished, problem 2 halfway, nothing sealed
    let part = tempfile::tempdir().unwrap();
    let cfg = config(part.path(), 5, 4);
    let traces = part.path().join("traces");
    fs::create_dir_all(traces.join("parts")).unwrap();
    fs::copy(full.path().join("traces/problem_00000.trace"), traces.join("problem_00000.trace")).unwrap();
    let f = cfg.generate_problem(2).unwrap();
    for t in 0..2 {
        let mut tr = run_try(&f, cfg.flips(), cfg.try_seed(2, t));
        tr.problem_id = 2;
        tr.try_id = t as u64;
        fs::write(traces.join(format!("parts/p00002_t{t:04}.part")), format_try(&tr)).unwrap();
    }
    run_campaign(&cfg).unwrap();
    assert_eq!(snapshot(part.path()), want);

    // a lost trace file is rebuilt
    fs::remove_file(traces.join("problem_00003.trace")).unwrap();
    run_campaign(&cfg).unwrap();
    assert_eq!(snapshot(part.path()), want);
}

#[test]
fn manifest_seeds_replay_formulas_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), 3, 3);
    let m = run_campaign(&cfg).unwrap();
    let store = Store::load(dir.path()).unwrap();
    for entry in &m.problems {
        let f = generate_random_ksat(&GeneratorSpec::new(m.config.num_vars, m.num_clauses, m.config.k, entry.gen_seed)).unwrap();
        assert_eq!(f, cfg.generate_problem(entry.index).unwrap());
        for (t, &seed) in entry.try_seeds.iter().enumerate() {
            let replay = run_try(&f, m.max_flips, seed);
            let stored = &store.traces[entry.index * 3 + t];
            assert_eq!(replay.flips, stored.flips);
            assert_eq!(replay.initial_score, stored.initial_score);
        }
    }
}

#[test]
fn integrity_failures_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    run_campaign(&config(dir.path(), 2, 2)).unwrap();
    let path = dir.path().join("traces/problem_00001.trace");
    let text = fs::read_to_string(&path).unwrap();

    fs::write(&path, text.replace("num_clauses=172", "num_clauses=173")).unwrap();
    match Store::load(dir.path()) {
        Err(CampaignError::Integrity(msg)) => assert!(msg.contains("problem_00001"), "{msg}"),
        other => panic!("{other:?}"),
    }

    fs::write(&path, text.replacen("\n0,1,", "\n0,x,", 1)).unwrap();
    match Store::load(dir.path()) {
        Err(CampaignError::Format { path: p, .. }) => assert_eq!(p, path),
        other => panic!("{other:?}"),
    }

    fs::remove_file(&path).unwrap();
    match Store::load(dir.path()) {
        Err(CampaignError::Io { path: p, .. }) => assert_eq!(p, path),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unwritable_output_surfaces_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    match run_campaign(&config(&blocker, 1, 1)) {
        Err(CampaignError::Io { path, .. }) => assert!(path.starts_with(&blocker)),
        other => panic!("{other:?}"),
    }
}
