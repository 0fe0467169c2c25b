//! Randomized invariants across the crate, complementing the unit suites.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use proptest::prelude::*;

use dockerdoctor_core::history::{disappeared, SnapshotHistory};
use dockerdoctor_core::resolve::{select_apt_version, PackageIndexSnapshot, PackageRow};
use dockerdoctor_core::rules::{smell_set, RuleId};
use dockerdoctor_core::shell::parse_run_payload;
use dockerdoctor_core::study::{filter_candidates, stratified_sample, CandidateRecord};
use dockerdoctor_core::{parse_dockerfile, print_dockerfile};

fn keyword() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec![
        "FROM", "RUN", "COPY", "ADD", "ENV", "LABEL", "WORKDIR", "CMD", "MAINTAINER", "SHELL",
    ])
}

fn arg() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec![
        "ubuntu",
        "ubuntu:20.04",
        "apt-get update && apt-get install -y curl wget",
        "echo 'a && b'",
        "cd /app && make",
        "wget -qO- https://x.example | sh",
        "a/ /b/",
        "x.tar.gz /",
        "dev@example.com",
        "[\"/bin/bash\", \"-o\", \"pipefail\", \"-c\"]",
    ])
}

fn dockerfile_line() -> impl Strategy<Value = String> {
    prop_oneof![
        Just(String::new()),
        Just("# comment".to_string()),
        Just("   \t".to_string()),
        Just("garbage with no keyword".to_string()),
        (keyword(), arg()).prop_map(|(k, a)| format!("{k} {a}")),
        (keyword(), arg()).prop_map(|(k, a)| format!("  {k}   {a}")),
        Just("RUN apt-get update \\".to_string()),
        Just("    && apt-get install -y curl".to_string()),
    ]
}

fn dockerfile_text() -> impl Strategy<Value = String> {
    (prop::collection::vec(dockerfile_line(), 0..20), any::<bool>()).prop_map(
        |(lines, trailing_newline)| {
            let mut text = lines.join("\n");
            if trailing_newline && !text.is_empty() {
                text.push('\n');
            }
            text
        },
    )
}

proptest! {
    #[test]
    fn print_parse_is_identity(text in dockerfile_text()) {
        prop_assert_eq!(print_dockerfile(&parse_dockerfile(&text)), text);
    }

    #[test]
    fn shell_reassembly_is_exact(payload in "[a-z &|;'\"$()=/.-]{0,60}") {
        let chain = parse_run_payload(&payload);
        prop_assert_eq!(chain.reassemble(), payload);
    }

    #[test]
    fn no_split_inside_quotes(inner in "[a-z &|;]{0,20}") {
        // Against a trivial oracle: a fully quoted payload is one command.
        let payload = format!("echo '{inner}'");
        let chain = parse_run_payload(&payload);
        prop_assert_eq!(chain.commands.len(), 1);
        prop_assert!(chain.connectors.is_empty());
    }
}

fn package_rows() -> impl Strategy<Value = Vec<PackageRow>> {
    prop::collection::vec(
        (1u32..2000, prop::sample::select(vec!["1.0", "1.1", "2.0", "2.1.3"])),
        1..12,
    )
    .prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(|(i, (day_offset, version))| PackageRow {
                distribution: "ubuntu".to_string(),
                series: "focal".to_string(),
                package: "curl".to_string(),
                // Unique version strings so a version maps to one date.
                version: format!("{version}-r{i}"),
                published_date: NaiveDate::from_ymd_opt(2015, 1, 1).unwrap()
                    + chrono::Duration::days(day_offset as i64),
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn selection_date_is_monotone_in_cutoff(rows in package_rows(), a in 0u32..3000, b in 0u32..3000) {
        let mut index = PackageIndexSnapshot::default();
        let by_version: BTreeMap<String, NaiveDate> = rows
            .iter()
            .map(|r| (r.version.clone(), r.published_date))
            .collect();
        for row in rows {
            index.push(row);
        }
        let base = NaiveDate::from_ymd_opt(2015, 1, 1).unwrap();
        let (lo, hi) = (a.min(b), a.max(b));
        let early = select_apt_version("curl", "focal", base + chrono::Duration::days(lo as i64), &index);
        let late = select_apt_version("curl", "focal", base + chrono::Duration::days(hi as i64), &index);
        // A later cutoff never selects an older publication.
        if let (Some(e), Some(l)) = (early, late) {
            prop_assert!(by_version[&l] >= by_version[&e]);
        }
    }
}

fn candidates() -> impl Strategy<Value = Vec<CandidateRecord>> {
    prop::collection::vec(
        (
            0u64..40,
            0u64..1000,
            0u64..4,
            0i64..200,
            any::<bool>(),
            any::<bool>(),
            prop::sample::select(vec![RuleId::Dl3006, RuleId::Dl3008, RuleId::Dl4000]),
        ),
        0..30,
    )
    .prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(
                |(i, (repo, stars, prs, age, build_ok, in_latest, rule))| CandidateRecord {
                    repo_id: format!("repo{repo}-{i}"),
                    stars,
                    merged_pr_count: prs,
                    last_commit_date: NaiveDate::from_ymd_opt(2021, 9, 1).unwrap()
                        - chrono::Duration::days(age),
                    dockerfile_path: "Dockerfile".to_string(),
                    rule,
                    build_ok,
                    smell_in_latest: in_latest,
                },
            )
            .collect()
    })
}

proptest! {
    #[test]
    fn filter_is_monotone_and_sound(records in candidates()) {
        let today = NaiveDate::from_ymd_opt(2021, 9, 1).unwrap();
        let kept = filter_candidates(&records, today);
        prop_assert!(kept.len() <= records.len());
        let mut repos = BTreeSet::new();
        for r in &kept {
            prop_assert!(records.contains(r));
            prop_assert!(r.stars >= 10);
            prop_assert!(r.merged_pr_count >= 1);
            prop_assert!((today - r.last_commit_date).num_days() <= 92);
            prop_assert!(r.build_ok && r.smell_in_latest);
            prop_assert!(repos.insert(r.repo_id.clone()), "duplicate repo in output");
        }
    }

    #[test]
    fn quota_conservation(records in candidates(), total_frac in 0.0f64..1.0, seed in any::<u64>()) {
        let total = (records.len() as f64 * total_frac) as usize;
        match stratified_sample(&records, total, seed) {
            Ok(sample) => {
                prop_assert_eq!(sample.len(), total);
                let mut per_rule: BTreeMap<RuleId, usize> = BTreeMap::new();
                for r in &sample {
                    prop_assert!(records.contains(r));
                    *per_rule.entry(r.rule).or_default() += 1;
                }
                for (rule, n) in per_rule {
                    let size = records.iter().filter(|r| r.rule == rule).count();
                    prop_assert!(n <= size);
                }
                // Determinism under the same seed.
                prop_assert_eq!(sample, stratified_sample(&records, total, seed).unwrap());
            }
            Err(_) => prop_assert!(total > records.len()),
        }
    }
}

fn history_from(texts: Vec<&str>) -> SnapshotHistory {
    SnapshotHistory {
        path: "Dockerfile".to_string(),
        snapshots: texts
            .into_iter()
            .enumerate()
            .map(|(i, t)| dockerdoctor_core::history::Snapshot {
                commit_id: format!("c{i}"),
                commit_date: NaiveDate::from_ymd_opt(2021, 1, 1)
                    .unwrap()
                    .and_hms_opt(0, 0, 0)
                    .unwrap()
                    .and_utc(),
                content: t.as_bytes().to_vec(),
                message: None,
            })
            .collect(),
    }
}

fn snapshot_text() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec![
        "FROM ubuntu\nCMD [\"bash\"]\n",
        "FROM ubuntu:20.04\nCMD [\"bash\"]\n",
        "FROM ubuntu:20.04\nMAINTAINER x\n",
        "FROM ubuntu:20.04\nRUN apt-get update && apt-get install -y curl\n",
        "FROM scratch\nCOPY a /a\n",
    ])
}

proptest! {
    #[test]
    fn disappearance_set_algebra(a in snapshot_text(), b in snapshot_text()) {
        let history = history_from(vec![a, b]);
        let delta = disappeared(&history, 1).unwrap();
        let eta_prev = smell_set(&parse_dockerfile(a));
        let eta_curr = smell_set(&parse_dockerfile(b));
        prop_assert!(delta.is_subset(&eta_prev));
        prop_assert!(delta.is_disjoint(&eta_curr));
    }
}
