use std::collections::HashSet;
use std::path::Path;

use lyapforge::config::{GenerationConfig, Profile};
use lyapforge::error::PipelineError;
use lyapforge::generate::{generate_group, manifest_path, run_generation, shard_dir, Manifest, RunOptions};
use lyapforge::mix::mix_datasets;
use lyapforge::record::{read_records, write_records, DatasetRecord, GenKind};
use lyapforge::wild::filter_wild_records;
use proptest::prelude::*;

fn small(p: Profile) -> GenerationConfig {
    GenerationConfig {
        shard_size: 16,
        ..p.config()
    }
}

fn keep() -> RunOptions {
    RunOptions {
        keep_shards: true,
        ..RunOptions::default()
    }
}

fn manifest(out: &Path) -> Manifest {
    serde_json::from_slice(&std::fs::read(manifest_path(out)).unwrap()).unwrap()
}

#[test]
fn larger_rerun_extends_the_same_prefix() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.jsonl");
    let cfg = small(Profile::BPoly);
    run_generation(&cfg, 3, 60, &out, &keep()).unwrap();
    let first = read_records(&out).unwrap();
    assert!(shard_dir(&out).join("stamp.json").exists());
    let shards = manifest(&out).shards;

    // Resuming reuses finished shards and only appends.
    run_generation(&cfg, 3, 150, &out, &RunOptions::default()).unwrap();
    let second = read_records(&out).unwrap();
    assert_eq!(second.len(), 150);
    assert_eq!(&second[..60], &first[..]);
    assert!(manifest(&out).shards > shards);
    assert!(!shard_dir(&out).exists());
}

#[test]
fn stale_shards_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.jsonl");
    run_generation(&small(Profile::BPoly), 3, 20, &out, &keep()).unwrap();
    let err = run_generation(&small(Profile::BPoly), 4, 20, &out, &keep()).unwrap_err();
    assert!(matches!(err, PipelineError::ShardMismatch(_)), "{err}");
    let other = GenerationConfig {
        with_witness: true,
        ..small(Profile::BPoly)
    };
    assert!(matches!(run_generation(&other, 3, 20, &out, &keep()), Err(PipelineError::ShardMismatch(_))));
}

#[test]
fn manifest_describes_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.jsonl");
    let cfg = small(Profile::Poly3);
    run_generation(&cfg, 9, 40, &out, &RunOptions::default()).unwrap();
    let m = manifest(&out);
    assert_eq!((m.seed, m.requested, m.records), (9, 40, 40));
    assert_eq!(m.config, cfg);
    assert_eq!(m.config_hash, cfg.hash());
    assert_eq!(m.groups, m.shards * 16);
}

#[test]
fn exhausted_budget_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        max_groups: Some(16),
        ..RunOptions::default()
    };
    let err = run_generation(&small(Profile::Poly3), 1, 10_000, &dir.path().join("x.jsonl"), &opts).unwrap_err();
    assert!(matches!(err, PipelineError::Exhausted { requested: 10_000, .. }), "{err}");
}

#[test]
fn mixing_files_keeps_primary_order_and_exact_counts() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("b.jsonl");
    let w = dir.path().join("w.jsonl");
    let out = dir.path().join("mix.jsonl");
    run_generation(&small(Profile::BPoly), 1, 50, &b, &RunOptions::default()).unwrap();
    run_generation(&small(Profile::Poly3), 1, 40, &w, &RunOptions::default()).unwrap();
    assert_eq!(mix_datasets(&b, &[(w.clone(), 25)], &out, 5).unwrap(), 75);
    let mixed = read_records(&out).unwrap();
    let primary: Vec<_> = mixed.iter().filter(|r| r.gen_mode == GenKind::Backward).cloned().collect();
    assert_eq!(primary, read_records(&b).unwrap());
    assert_eq!(mixed.iter().filter(|r| r.gen_mode == GenKind::Wild).count(), 25);
    let err = mix_datasets(&b, &[(w, 41)], &out, 5).unwrap_err();
    assert!(matches!(err, PipelineError::InsufficientRecords { requested: 41, available: 40, .. }), "{err}");
}

fn check_emitted(recs: &[DatasetRecord]) {
    let mut keys = HashSet::new();
    for r in recs {
        r.validate().unwrap();
        let sys = r.decode_system().unwrap();
        assert_eq!(sys.dim(), r.n);
        if let Some(v) = r.decode_lyapunov().unwrap() {
            assert!(v.dimension() <= r.n);
        }
        assert!(keys.insert(r.key().to_owned()), "duplicate system {}", r.id);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn emitted_records_round_trip_and_are_distinct(seed in any::<u64>(), k in 0usize..4) {
        let p = [Profile::BPoly, Profile::BNonPoly, Profile::Poly3, Profile::NonPoly][k];
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("d.jsonl");
        run_generation(&small(p), seed, 30, &out, &RunOptions::default()).unwrap();
        let recs = read_records(&out).unwrap();
        prop_assert_eq!(recs.len(), 30);
        check_emitted(&recs);
        // Written records survive another write/read cycle unchanged.
        let again = dir.path().join("e.jsonl");
        write_records(&again, &recs).unwrap();
        prop_assert_eq!(read_records(&again).unwrap(), recs);
    }

    #[test]
    fn wild_filter_is_idempotent(seed in any::<u64>(), nonpoly in any::<bool>()) {
        let cfg = if nonpoly { Profile::NonPoly.config() } else { Profile::Poly5.config() };
        let recs: Vec<DatasetRecord> = (0..40).flat_map(|g| generate_group(&cfg, seed, g).records).collect();
        let (kept, rep) = filter_wild_records(recs.clone());
        prop_assert_eq!(rep.kept + rep.unstable + rep.domain_errors, recs.len());
        let (again, rep2) = filter_wild_records(kept.clone());
        prop_assert_eq!(again, kept);
        prop_assert_eq!(rep2.unstable + rep2.domain_errors, 0);
    }
}
