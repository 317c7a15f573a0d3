mod common;

use common::E_CLASSES;
use evasilab::property::{labeled_parity, Parity};
use evasilab::scanner::{finding_properties, scan, Checkpoint, ScanMode, ScanOptions};
use evasilab::{solve, ClassMask, ClassTable, Error, PositionTable, Property};

fn opts() -> ScanOptions {
    ScanOptions::default()
}

#[test]
fn dualities_do_not_change_findings() {
    for (n, mode) in [
        (4, ScanMode::Full),
        (5, ScanMode::ComplementClosed),
        (3, ScanMode::Full),
    ] {
        let reduced = scan(n, mode, &opts()).unwrap();
        let raw = scan(
            n,
            mode,
            &ScanOptions {
                dualities: false,
                ..opts()
            },
        )
        .unwrap();
        assert_eq!(reduced.findings, raw.findings, "n={n} {mode}");
        assert_eq!(raw.counters.examined, raw.candidates);
        assert_eq!(raw.counters.skipped_set_dual + raw.counters.skipped_graph_dual, 0);
        assert_eq!(reduced.counters.total(), reduced.candidates);
        assert!(reduced.counters.examined < raw.counters.examined);
    }
}

#[test]
fn parity_prune_is_sound_n4() {
    let plain = scan(
        4,
        ScanMode::Full,
        &ScanOptions {
            dualities: false,
            ..opts()
        },
    )
    .unwrap();
    let pruned = scan(
        4,
        ScanMode::Full,
        &ScanOptions {
            dualities: false,
            parity_prune: true,
            ..opts()
        },
    )
    .unwrap();
    assert_eq!(plain.findings, pruned.findings);
    assert_eq!(pruned.counters.pruned_parity, 1024);
    let classes = ClassTable::shared(4).unwrap();
    let table = PositionTable::shared(4).unwrap();
    for bits in 0u64..1 << classes.len() {
        let p = Property::from_mask(4, ClassMask::from_bits(classes.len(), bits));
        if labeled_parity(&p, classes) == Parity::Odd {
            assert!(solve(&p, table).unwrap().is_evasive(), "{:?}", p.class_ids());
        }
    }
}

#[test]
fn parity_prune_keeps_e_n5() {
    let plain = scan(5, ScanMode::ComplementClosed, &opts()).unwrap();
    let pruned = scan(
        5,
        ScanMode::ComplementClosed,
        &ScanOptions {
            parity_prune: true,
            ..opts()
        },
    )
    .unwrap();
    assert_eq!(plain.findings, pruned.findings);
    // Complement pairs share orbit sizes and both self-complementary classes
    // have even orbits, so every candidate here has even parity.
    assert_eq!(pruned.counters.pruned_parity, 0);

    let head = |parity_prune| ScanOptions {
        parity_prune,
        stop_at: Some(1 << 20),
        ..opts()
    };
    let plain = scan(5, ScanMode::Full, &head(false)).unwrap();
    let pruned = scan(5, ScanMode::Full, &head(true)).unwrap();
    assert_eq!(plain.findings, pruned.findings);
    assert!(pruned.counters.pruned_parity > 0);
    assert_eq!(pruned.counters.total(), plain.counters.total());
}

#[test]
fn complement_closed_scan_finds_e_and_its_complement() {
    let report = scan(5, ScanMode::ComplementClosed, &opts()).unwrap();
    assert!(report.is_complete());
    assert_eq!(report.candidates, 1 << 18);
    let props = finding_properties(&report).unwrap();
    assert_eq!(props.len(), 2);
    assert!(report.findings.contains(&E_CLASSES.to_vec()));
    assert_eq!(props[0].set_complement(), props[1]);
}

#[test]
fn worker_count_does_not_change_results() {
    let one = scan(5, ScanMode::ComplementClosed, &opts()).unwrap();
    for workers in [2, 3, 7] {
        let many = scan(5, ScanMode::ComplementClosed, &ScanOptions { workers, ..opts() }).unwrap();
        assert_eq!(one.without_timing(), many.without_timing(), "workers={workers}");
    }
    let head = |w| ScanOptions {
        workers: w,
        stop_at: Some(3 << 20),
        ..opts()
    };
    assert_eq!(
        scan(5, ScanMode::Full, &head(1)).unwrap().without_timing(),
        scan(5, ScanMode::Full, &head(4)).unwrap().without_timing()
    );
}

#[test]
fn interrupted_scan_resumes_to_the_same_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.json");
    let straight = scan(5, ScanMode::ComplementClosed, &opts()).unwrap();

    let with_ckpt = |stop_at, resume| ScanOptions {
        checkpoint: Some(path.clone()),
        resume,
        stop_at,
        checkpoint_every: 1 << 12,
        ..opts()
    };
    let first = scan(5, ScanMode::ComplementClosed, &with_ckpt(Some(100_003), false)).unwrap();
    assert!(!first.is_complete());
    assert_eq!(first.next, 100_003);
    let saved = Checkpoint::load(&path).unwrap();
    assert_eq!(saved.next, 100_003);
    assert_eq!(saved.counters, first.counters);

    let second = scan(5, ScanMode::ComplementClosed, &with_ckpt(Some(200_000), true)).unwrap();
    assert_eq!(second.next, 200_000);
    let last = scan(5, ScanMode::ComplementClosed, &with_ckpt(None, true)).unwrap();
    assert_eq!(last.without_timing(), straight.without_timing());
    assert_eq!(Checkpoint::load(&path).unwrap().next, 1 << 18);
}

#[test]
fn resume_rejects_mismatched_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.json");
    let base = ScanOptions {
        checkpoint: Some(path.clone()),
        stop_at: Some(1000),
        ..opts()
    };
    scan(4, ScanMode::Full, &base).unwrap();
    let resume = ScanOptions {
        resume: true,
        ..base.clone()
    };

    assert!(matches!(
        scan(5, ScanMode::Full, &resume),
        Err(Error::CheckpointMismatch(_))
    ));
    assert!(matches!(
        scan(4, ScanMode::ComplementClosed, &resume),
        Err(Error::CheckpointMismatch(_))
    ));
    let other = ScanOptions {
        parity_prune: true,
        ..resume.clone()
    };
    assert!(matches!(
        scan(4, ScanMode::Full, &other),
        Err(Error::CheckpointMismatch(_))
    ));
    let nowhere = ScanOptions {
        checkpoint: None,
        ..resume.clone()
    };
    assert!(scan(4, ScanMode::Full, &nowhere).is_err());

    let mut c = Checkpoint::load(&path).unwrap();
    c.counters.examined += 1;
    std::fs::write(&path, c.to_json()).unwrap();
    assert!(matches!(
        scan(4, ScanMode::Full, &resume),
        Err(Error::CheckpointMismatch(_))
    ));

    std::fs::write(&path, "{not json").unwrap();
    assert!(matches!(scan(4, ScanMode::Full, &resume), Err(Error::Parse(_))));
}

#[test]
fn checkpoint_carries_the_documented_fields() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.json");
    scan(
        4,
        ScanMode::Full,
        &ScanOptions {
            checkpoint: Some(path.clone()),
            ..opts()
        },
    )
    .unwrap();
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for key in ["version", "n", "mode", "next", "counters", "findings"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["mode"], "full");
    assert_eq!(v["next"], 2048);
    assert!(!dir.path().join("scan.tmp").exists());
}

#[test]
fn sampling_is_seed_deterministic() {
    let a = scan(
        5,
        ScanMode::Sample,
        &ScanOptions {
            sample_size: 3000,
            seed: 11,
            ..opts()
        },
    )
    .unwrap();
    let b = scan(
        5,
        ScanMode::Sample,
        &ScanOptions {
            sample_size: 3000,
            seed: 11,
            workers: 3,
            ..opts()
        },
    )
    .unwrap();
    assert_eq!(a.without_timing(), b.without_timing());
    assert_eq!(a.counters.examined, 3000);
    assert_eq!(a.counters.pruned_parity + a.counters.skipped_set_dual, 0);
}

#[test]
fn sampling_falls_back_to_a_full_sweep() {
    let full = scan(4, ScanMode::Full, &opts()).unwrap();
    let sampled = scan(
        4,
        ScanMode::Sample,
        &ScanOptions {
            sample_size: 4096,
            exhaustive_fallback: true,
            ..opts()
        },
    )
    .unwrap();
    assert_eq!(sampled.mode, ScanMode::Full);
    assert_eq!(sampled.without_timing(), full.without_timing());
}

#[test]
fn sampling_does_not_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let options = ScanOptions {
        checkpoint: Some(dir.path().join("s.json")),
        ..opts()
    };
    assert!(matches!(scan(4, ScanMode::Sample, &options), Err(Error::ScanMode(_))));
}

#[test]
fn scans_reject_out_of_range_n() {
    assert!(scan(6, ScanMode::ComplementClosed, &opts()).is_err());
    assert!(scan(1, ScanMode::Full, &opts()).is_err());
}
