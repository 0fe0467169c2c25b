//! Throughput of the parse -> lint -> fix pipeline over the committed corpus.

use std::collections::BTreeSet;
use std::path::PathBuf;

use chrono::NaiveDate;
use criterion::{black_box, criterion_group, criterion_main, Criterion};

use dockerdoctor_core::fix::{fix_all, FixContext};
use dockerdoctor_core::resolve::{PackageIndexSnapshot, RegistrySnapshot};
use dockerdoctor_core::rules::{lint, RuleId};
use dockerdoctor_core::{parse_dockerfile, print_dockerfile};

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

fn corpus() -> Vec<String> {
    let mut paths: Vec<_> = std::fs::read_dir(repo_root().join("corpus"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().map(|e| e == "Dockerfile").unwrap_or(false))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| std::fs::read_to_string(p).unwrap())
        .collect()
}

fn bench_pipeline(c: &mut Criterion) {
    let files = corpus();
    let registry =
        RegistrySnapshot::load_jsonl(&repo_root().join("fixtures/registry.jsonl")).unwrap();
    let apt = PackageIndexSnapshot::load_jsonl(&repo_root().join("fixtures/apt.jsonl")).unwrap();
    let ctx = FixContext {
        last_modified: NaiveDate::from_ymd_opt(2021, 7, 1).unwrap(),
        registry: &registry,
        apt_index: &apt,
    };
    let rules: BTreeSet<RuleId> = RuleId::ALL.into_iter().collect();

    c.bench_function("parse_corpus", |b| {
        b.iter(|| {
            for text in &files {
                black_box(parse_dockerfile(black_box(text)));
            }
        })
    });

    c.bench_function("lint_corpus", |b| {
        let asts: Vec<_> = files.iter().map(|t| parse_dockerfile(t)).collect();
        b.iter(|| {
            for ast in &asts {
                black_box(lint(black_box(ast)));
            }
        })
    });

    c.bench_function("fix_corpus", |b| {
        let asts: Vec<_> = files.iter().map(|t| parse_dockerfile(t)).collect();
        b.iter(|| {
            for ast in &asts {
                let (fixed, outcomes) = fix_all(black_box(ast), &ctx, &rules);
                black_box((print_dockerfile(&fixed), outcomes));
            }
        })
    });
}

criterion_group!(benches, bench_pipeline);
criterion_main!(benches);
