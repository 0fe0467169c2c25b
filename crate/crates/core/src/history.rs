//! Smell survivability over a Dockerfile's change history.
//!
//! Histories come in as JSON-lines manifests rather than live VCS access, so
//! runs are deterministic and a thin exporter can feed them from any
//! repository. For consecutive snapshots the disappearance set is the smells
//! present before and absent after; snapshots with a non-empty disappearance
//! set are the candidate fixing changes.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Read};

use base64::Engine;
use chrono::{DateTime, Datelike, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{parse_dockerfile, DockerfileAst, Keyword};
use crate::diff::lcs_pairs;
use crate::rules::{lint, smell_set, RuleId, SmellAnchor, SmellKey};
use crate::shell::parse_run_payload;

/// One commit-level state of a Dockerfile.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub commit_id: String,
    pub commit_date: DateTime<Utc>,
    pub content: Vec<u8>,
    pub message: Option<String>,
}

impl Snapshot {
    /// Parse the content; non-UTF-8 bytes make the snapshot unusable.
    fn ast(&self) -> Option<DockerfileAst> {
        std::str::from_utf8(&self.content)
            .ok()
            .map(parse_dockerfile)
    }
}

/// Ordered per-commit states of one Dockerfile path.
#[derive(Debug, Clone)]
pub struct SnapshotHistory {
    pub path: String,
    pub snapshots: Vec<Snapshot>,
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    BadRow { line: usize, message: String },
}

#[derive(Debug, Deserialize)]
struct ManifestRow {
    path: String,
    commit_id: String,
    commit_date: DateTime<Utc>,
    #[serde(default)]
    message: Option<String>,
    content_base64: String,
}

/// Load a history manifest: JSON lines ordered oldest-first, one
/// `{path, commit_id, commit_date, message, content_base64}` per line.
/// Rows are grouped by path in first-appearance order.
pub fn load_manifest<R: Read>(reader: R) -> Result<Vec<SnapshotHistory>, ManifestError> {
    let mut order: Vec<String> = Vec::new();
    let mut by_path: BTreeMap<String, Vec<Snapshot>> = BTreeMap::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: ManifestRow = serde_json::from_str(&line).map_err(|e| ManifestError::BadRow {
            line: i + 1,
            message: e.to_string(),
        })?;
        let content = base64::engine::general_purpose::STANDARD
            .decode(row.content_base64.trim())
            .map_err(|e| ManifestError::BadRow {
                line: i + 1,
                message: format!("bad base64: {e}"),
            })?;
        if !by_path.contains_key(&row.path) {
            order.push(row.path.clone());
        }
        by_path.entry(row.path).or_default().push(Snapshot {
            commit_id: row.commit_id,
            commit_date: row.commit_date,
            content,
            message: row.message,
        });
    }
    Ok(order
        .into_iter()
        .map(|path| {
            let snapshots = by_path.remove(&path).unwrap();
            SnapshotHistory { path, snapshots }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SnapshotError {
    #[error("snapshot {index} of {path} is not parseable")]
    Unparseable { path: String, index: usize },
}

/// Smells present in snapshot i-1 and absent in snapshot i.
pub fn disappeared(history: &SnapshotHistory, i: usize) -> Result<BTreeSet<SmellKey>, SnapshotError> {
    assert!(i >= 1 && i < history.snapshots.len(), "index out of range");
    let prev = history.snapshots[i - 1]
        .ast()
        .ok_or_else(|| SnapshotError::Unparseable {
            path: history.path.clone(),
            index: i - 1,
        })?;
    let curr = history.snapshots[i]
        .ast()
        .ok_or_else(|| SnapshotError::Unparseable {
            path: history.path.clone(),
            index: i,
        })?;
    Ok(smell_set(&prev)
        .difference(&smell_set(&curr))
        .cloned()
        .collect())
}

/// Indices of snapshots whose change made at least one smell disappear.
pub fn candidate_fix_set(history: &SnapshotHistory) -> BTreeSet<usize> {
    (1..history.snapshots.len())
        .filter(|&i| matches!(disappeared(history, i), Ok(d) if !d.is_empty()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Modified,
    Removed,
    FileRewritten,
}

/// A smell that stopped being reported between two snapshots.
#[derive(Debug, Clone, Serialize)]
pub struct DisappearanceEvent {
    /// Index of the snapshot the smell is no longer in (> 0).
    pub at: usize,
    pub key: SmellKey,
    pub classification: Classification,
    /// The commit message hints the change was aimed at the smell. A manual
    /// judgment call in the end; this flag only pre-sorts candidates.
    pub informed_hint: bool,
}

const REWRITE_THRESHOLD: f64 = 0.8;

/// Token whose survival in the new snapshot means the smelly line kept its
/// functionality.
fn anchor_token(prev: &DockerfileAst, key: &SmellKey, line: usize) -> String {
    match (&key.rule, &key.anchor) {
        (_, SmellAnchor::StagePackage { package, .. }) => package.clone(),
        (RuleId::Dl3006, SmellAnchor::Stage { stage }) => prev
            .instructions()
            .iter()
            .find(|i| i.keyword == Keyword::From && i.stage_index == *stage)
            .and_then(|i| crate::ast::parse_image_ref(&i.raw_args).ok())
            .map(|r| r.name)
            .unwrap_or_else(|| "FROM".to_string()),
        (RuleId::Dl4000, _) => "maintainer".to_string(),
        (RuleId::Dl3003, _) => prev
            .instruction_at_line(line)
            .map(|idx| parse_run_payload(&prev.instruction(idx).raw_args))
            .and_then(|chain| {
                chain
                    .commands
                    .iter()
                    .find(|c| c.head() == Some("cd"))
                    .and_then(|c| c.words.get(1).map(|w| w.text.clone()))
            })
            .unwrap_or_else(|| "cd".to_string()),
        (RuleId::Dl4006, _) => prev
            .instruction_at_line(line)
            .map(|idx| parse_run_payload(&prev.instruction(idx).raw_args))
            .and_then(|chain| chain.commands.first().and_then(|c| c.head().map(String::from)))
            .unwrap_or_else(|| "RUN".to_string()),
        _ => "apt-get".to_string(),
    }
}

/// Decide whether a disappearance looks like a fix (line modified, token
/// kept), an incidental removal, or a wholesale file rewrite.
pub fn classify_disappearance(
    history: &SnapshotHistory,
    i: usize,
    key: &SmellKey,
) -> Classification {
    let prev_text = String::from_utf8_lossy(&history.snapshots[i - 1].content).into_owned();
    let curr_text = String::from_utf8_lossy(&history.snapshots[i].content).into_owned();
    let prev_lines: Vec<&str> = prev_text.lines().collect();
    let curr_lines: Vec<&str> = curr_text.lines().collect();

    let pairs = lcs_pairs(&prev_lines, &curr_lines);
    let prev_ast = parse_dockerfile(&prev_text);
    let anchor_line = lint(&prev_ast)
        .iter()
        .find(|f| &f.key == key)
        .map(|f| f.line)
        .unwrap_or(1);
    let token = anchor_token(&prev_ast, key, anchor_line);
    let token_lower = token.to_ascii_lowercase();
    let anchor_idx = anchor_line - 1; // 0-based

    // Anchor line survived verbatim: something else changed around it, the
    // functionality is intact.
    if pairs.iter().any(|(a, _)| *a == anchor_idx) {
        return Classification::Modified;
    }

    // The anchor sits in a replacement region between two aligned lines.
    // If a replacement line still carries the token, the line was edited.
    let region_start = pairs
        .iter()
        .filter(|(a, _)| *a < anchor_idx)
        .map(|(_, b)| *b + 1)
        .last()
        .unwrap_or(0);
    let region_end = pairs
        .iter()
        .find(|(a, _)| *a > anchor_idx)
        .map(|(_, b)| *b)
        .unwrap_or(curr_lines.len());
    let replaced_with_token = curr_lines[region_start..region_end]
        .iter()
        .any(|l| l.to_ascii_lowercase().contains(&token_lower));
    if replaced_with_token {
        return Classification::Modified;
    }

    // Token gone: an incidental removal, unless almost nothing of the old
    // file survived — then the whole file was rewritten.
    if !prev_lines.is_empty() {
        let unaligned = prev_lines.len() - pairs.len();
        if unaligned as f64 > REWRITE_THRESHOLD * prev_lines.len() as f64 {
            return Classification::FileRewritten;
        }
    }
    Classification::Removed
}

/// Commit-message keywords that hint at an intentional smell fix.
fn informed_hint(message: Option<&str>, rule: RuleId) -> bool {
    let Some(msg) = message else {
        return false;
    };
    let lower = msg.to_ascii_lowercase();
    if lower.contains(&rule.as_str().to_ascii_lowercase())
        || lower.contains("hadolint")
        || lower.contains("smell")
        || lower.contains("best practice")
    {
        return true;
    }
    let keywords: &[&str] = match rule {
        RuleId::Dl3003 => &["workdir"],
        RuleId::Dl3006 | RuleId::Dl3008 => &["pin", "version pinning"],
        RuleId::Dl3009 => &["apt cache", "apt lists"],
        RuleId::Dl3015 => &["no-install-recommends"],
        RuleId::Dl3020 => &["copy instead"],
        RuleId::Dl4000 => &["maintainer"],
        RuleId::Dl4006 => &["pipefail"],
    };
    keywords.iter().any(|k| lower.contains(k))
}

/// All disappearance events of one history, oldest first. Pairs involving an
/// unparseable snapshot are skipped and reported as warnings.
pub fn events(history: &SnapshotHistory) -> (Vec<DisappearanceEvent>, Vec<SnapshotError>) {
    let mut out = Vec::new();
    let mut warnings = Vec::new();
    for i in 1..history.snapshots.len() {
        match disappeared(history, i) {
            Ok(keys) => {
                for key in keys {
                    let classification = classify_disappearance(history, i, &key);
                    out.push(DisappearanceEvent {
                        at: i,
                        informed_hint: informed_hint(
                            history.snapshots[i].message.as_deref(),
                            key.rule,
                        ),
                        classification,
                        key,
                    });
                }
            }
            Err(e) => warnings.push(e),
        }
    }
    (out, warnings)
}

/// Per-rule lifetime and classification totals.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RuleTotals {
    pub introduced: usize,
    pub modified: usize,
    pub removed: usize,
    pub rewritten: usize,
    pub alive_at_end: usize,
    pub median_lifetime_commits: Option<f64>,
    pub median_lifetime_days: Option<f64>,
}

/// One serialized disappearance, with file context.
#[derive(Debug, Clone, Serialize)]
pub struct EventRecord {
    pub path: String,
    pub at: usize,
    pub commit_id: String,
    pub rule: RuleId,
    pub key: SmellKey,
    pub classification: Classification,
    pub informed_hint: bool,
}

/// Survival summary across histories.
#[derive(Debug, Clone, Default)]
pub struct SurvivalReport {
    /// (rule, quarter) -> counts [introduced, modified, removed, rewritten].
    pub by_quarter: BTreeMap<(RuleId, String), [usize; 4]>,
    pub totals: BTreeMap<RuleId, RuleTotals>,
    pub events: Vec<EventRecord>,
    pub warnings: Vec<SnapshotError>,
}

fn quarter_of(date: DateTime<Utc>) -> String {
    format!("{}Q{}", date.year(), (date.month0() / 3) + 1)
}

fn median(values: &mut Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    })
}

/// Walk every history, tracking when each smell key appears and disappears.
pub fn summarize(histories: &[SnapshotHistory]) -> SurvivalReport {
    let mut report = SurvivalReport::default();
    let mut lifetimes_commits: BTreeMap<RuleId, Vec<f64>> = BTreeMap::new();
    let mut lifetimes_days: BTreeMap<RuleId, Vec<f64>> = BTreeMap::new();

    for history in histories {
        // Active smells: key -> (introduced index, introduced date).
        let mut active: BTreeMap<SmellKey, (usize, DateTime<Utc>)> = BTreeMap::new();
        let mut prev_ok: Option<usize> = None;
        for (i, snapshot) in history.snapshots.iter().enumerate() {
            let Some(ast) = snapshot.ast() else {
                report.warnings.push(SnapshotError::Unparseable {
                    path: history.path.clone(),
                    index: i,
                });
                continue;
            };
            let eta = smell_set(&ast);
            let quarter = quarter_of(snapshot.commit_date);

            // Disappearances first, then introductions.
            let gone: Vec<SmellKey> = active
                .keys()
                .filter(|k| !eta.contains(*k))
                .cloned()
                .collect();
            for key in gone {
                let (intro_idx, intro_date) = active.remove(&key).unwrap();
                let classification = match prev_ok {
                    Some(p) if p + 1 == i => classify_disappearance(history, i, &key),
                    // The direct predecessor was unparseable; still classify
                    // against the last parseable snapshot.
                    _ => classify_disappearance_between(history, prev_ok.unwrap_or(0), i, &key),
                };
                let rule = key.rule;
                let entry = report
                    .by_quarter
                    .entry((rule, quarter.clone()))
                    .or_default();
                match classification {
                    Classification::Modified => entry[1] += 1,
                    Classification::Removed => entry[2] += 1,
                    Classification::FileRewritten => entry[3] += 1,
                }
                let totals = report.totals.entry(rule).or_default();
                match classification {
                    Classification::Modified => totals.modified += 1,
                    Classification::Removed => totals.removed += 1,
                    Classification::FileRewritten => totals.rewritten += 1,
                }
                lifetimes_commits
                    .entry(rule)
                    .or_default()
                    .push((i - intro_idx) as f64);
                lifetimes_days
                    .entry(rule)
                    .or_default()
                    .push((snapshot.commit_date - intro_date).num_days() as f64);
                report.events.push(EventRecord {
                    path: history.path.clone(),
                    at: i,
                    commit_id: snapshot.commit_id.clone(),
                    rule,
                    classification,
                    informed_hint: informed_hint(snapshot.message.as_deref(), rule),
                    key,
                });
            }
            for key in &eta {
                if !active.contains_key(key) {
                    active.insert(key.clone(), (i, snapshot.commit_date));
                    report
                        .by_quarter
                        .entry((key.rule, quarter.clone()))
                        .or_default()[0] += 1;
                    report.totals.entry(key.rule).or_default().introduced += 1;
                }
            }
            prev_ok = Some(i);
        }
        for key in active.keys() {
            report.totals.entry(key.rule).or_default().alive_at_end += 1;
        }
    }

    for (rule, totals) in report.totals.iter_mut() {
        totals.median_lifetime_commits = median(lifetimes_commits.entry(*rule).or_default());
        totals.median_lifetime_days = median(lifetimes_days.entry(*rule).or_default());
    }
    report
}

/// Classification between two arbitrary snapshot indices.
fn classify_disappearance_between(
    history: &SnapshotHistory,
    from: usize,
    to: usize,
    key: &SmellKey,
) -> Classification {
    let shim = SnapshotHistory {
        path: history.path.clone(),
        snapshots: vec![
            history.snapshots[from].clone(),
            history.snapshots[to].clone(),
        ],
    };
    classify_disappearance(&shim, 1, key)
}

impl SurvivalReport {
    /// CSV with header `rule,quarter,introduced,modified,removed,rewritten`.
    pub fn to_csv(&self) -> String {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(["rule", "quarter", "introduced", "modified", "removed", "rewritten"])
            .unwrap();
        for ((rule, quarter), counts) in &self.by_quarter {
            wtr.write_record([
                rule.as_str(),
                quarter,
                &counts[0].to_string(),
                &counts[1].to_string(),
                &counts[2].to_string(),
                &counts[3].to_string(),
            ])
            .unwrap();
        }
        String::from_utf8(wtr.into_inner().unwrap()).unwrap()
    }

    /// One JSON object per disappearance event.
    pub fn events_jsonl(&self) -> String {
        self.events
            .iter()
            .map(|e| serde_json::to_string(e).unwrap())
            .fold(String::new(), |mut acc, line| {
                acc.push_str(&line);
                acc.push('\n');
                acc
            })
    }
}
