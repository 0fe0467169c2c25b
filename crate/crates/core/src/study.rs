//! Pull-request study support: candidate filtering, sample sizing,
//! stratified sampling, PR body rendering, and a local PR state ledger.
//!
//! Submitting and monitoring the pull requests themselves is human work; this
//! module only prepares deterministic inputs for it.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::rules::RuleId;

/// One fixable smell occurrence in one repository, as exported by the mining
/// pipeline. CSV header:
/// `repo_id,stars,merged_pr_count,last_commit_date,dockerfile_path,rule,build_ok,smell_in_latest`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub repo_id: String,
    pub stars: u64,
    pub merged_pr_count: u64,
    pub last_commit_date: NaiveDate,
    pub dockerfile_path: String,
    pub rule: RuleId,
    pub build_ok: bool,
    pub smell_in_latest: bool,
}

#[derive(Debug, Error)]
pub enum CandidateCsvError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Read candidates from headered CSV.
pub fn load_candidates<R: Read>(reader: R) -> Result<Vec<CandidateRecord>, CandidateCsvError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

/// Write candidates as headered CSV.
pub fn write_candidates<W: Write>(
    writer: W,
    records: &[CandidateRecord],
) -> Result<(), CandidateCsvError> {
    let mut wtr = csv::Writer::from_writer(writer);
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SampleSizeError {
    #[error("argument out of range: confidence, margin, and p must all be in (0, 1)")]
    Domain,
}

/// Infinite-population sample size: ceil(z² · p(1−p) / margin²), z being the
/// two-sided standard-normal quantile for the confidence level. Note the
/// ceiling: (0.95, 0.05, 0.5) gives 385 where floor-style rounding reports
/// 384.
pub fn required_sample_size(
    confidence: f64,
    margin: f64,
    p: f64,
) -> Result<u64, SampleSizeError> {
    for v in [confidence, margin, p] {
        if !(v > 0.0 && v < 1.0) {
            return Err(SampleSizeError::Domain);
        }
    }
    let normal = Normal::new(0.0, 1.0).unwrap();
    let z = normal.inverse_cdf((1.0 + confidence) / 2.0);
    Ok((z * z * p * (1.0 - p) / (margin * margin)).ceil() as u64)
}

/// Days of commit activity still counting as "recent". Three months, fixed
/// for determinism.
pub const ACTIVITY_WINDOW_DAYS: i64 = 92;

/// Repository-level eligibility: ≥10 stars, ≥1 merged PR, commit activity in
/// the last [`ACTIVITY_WINDOW_DAYS`], the smell still present, and a passing
/// build. Then at most one record per repository, keeping the first by input
/// order.
pub fn filter_candidates(records: &[CandidateRecord], today: NaiveDate) -> Vec<CandidateRecord> {
    let mut seen: std::collections::BTreeSet<&str> = std::collections::BTreeSet::new();
    records
        .iter()
        .filter(|r| {
            r.stars >= 10
                && r.merged_pr_count >= 1
                && (today - r.last_commit_date).num_days() <= ACTIVITY_WINDOW_DAYS
                && r.smell_in_latest
                && r.build_ok
        })
        .filter(|r| seen.insert(r.repo_id.as_str()))
        .cloned()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error("total {total} exceeds population {population}")]
    InsufficientPopulation { total: usize, population: usize },
}

/// Largest-remainder allocation of `total` into integer quotas proportional
/// to `weights`, each capped at the corresponding `capacities` entry. The
/// excess from capped strata is reallocated to strata with headroom.
fn allocate_quotas(
    weights: &BTreeMap<RuleId, f64>,
    capacities: &BTreeMap<RuleId, usize>,
    total: usize,
) -> Result<BTreeMap<RuleId, usize>, SampleError> {
    let population: usize = capacities.values().sum();
    if total > population {
        return Err(SampleError::InsufficientPopulation { total, population });
    }
    let mut quotas: BTreeMap<RuleId, usize> = capacities.keys().map(|r| (*r, 0)).collect();
    let mut remaining = total;
    // Iterate: distribute `remaining` over strata with headroom, cap, repeat.
    while remaining > 0 {
        let open: Vec<RuleId> = capacities
            .iter()
            .filter(|(r, cap)| quotas[r] < **cap && weights.get(r).copied().unwrap_or(0.0) > 0.0)
            .map(|(r, _)| *r)
            .collect();
        // Weightless strata left: fall back to uniform weights over headroom.
        let open = if open.is_empty() {
            capacities
                .iter()
                .filter(|(r, cap)| quotas[r] < **cap)
                .map(|(r, _)| *r)
                .collect()
        } else {
            open
        };
        let weight_of = |r: &RuleId| {
            let w = weights.get(r).copied().unwrap_or(0.0);
            if w > 0.0 {
                w
            } else {
                1.0
            }
        };
        let weight_sum: f64 = open.iter().map(weight_of).sum();
        // Ideal shares and floors.
        let mut floors: Vec<(RuleId, usize, f64)> = open
            .iter()
            .map(|r| {
                let ideal = remaining as f64 * weight_of(r) / weight_sum;
                (*r, ideal.floor() as usize, ideal - ideal.floor())
            })
            .collect();
        let mut assigned: usize = floors.iter().map(|(_, f, _)| *f).sum();
        // Hand out the leftover units by descending remainder, rule id as
        // tie-break for determinism.
        floors.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap().then(a.0.cmp(&b.0)));
        for entry in floors.iter_mut() {
            if assigned >= remaining {
                break;
            }
            entry.1 += 1;
            assigned += 1;
        }
        // Apply, capping at capacity; anything capped off stays in
        // `remaining` for the next round.
        let mut placed = 0usize;
        for (r, share, _) in floors {
            let cap = capacities[&r];
            let room = cap - quotas[&r];
            let take = share.min(room);
            *quotas.get_mut(&r).unwrap() += take;
            placed += take;
        }
        if placed == 0 {
            // No headroom anywhere despite total ≤ population: cannot happen,
            // but guard against an infinite loop.
            return Err(SampleError::InsufficientPopulation { total, population });
        }
        remaining -= placed;
    }
    Ok(quotas)
}

/// Stratified sample with smell type as stratum and quotas proportional to
/// stratum sizes. Deterministic in (input order, total, seed).
pub fn stratified_sample(
    records: &[CandidateRecord],
    total: usize,
    seed: u64,
) -> Result<Vec<CandidateRecord>, SampleError> {
    let mut sizes: BTreeMap<RuleId, usize> = BTreeMap::new();
    for r in records {
        *sizes.entry(r.rule).or_insert(0) += 1;
    }
    let weights: BTreeMap<RuleId, f64> = sizes.iter().map(|(r, n)| (*r, *n as f64)).collect();
    stratified_sample_weighted(records, total, seed, &weights)
}

/// As [`stratified_sample`], but with caller-supplied stratum weights (e.g.
/// historical fix counts instead of open-smell counts).
pub fn stratified_sample_weighted(
    records: &[CandidateRecord],
    total: usize,
    seed: u64,
    weights: &BTreeMap<RuleId, f64>,
) -> Result<Vec<CandidateRecord>, SampleError> {
    let mut strata: BTreeMap<RuleId, Vec<&CandidateRecord>> = BTreeMap::new();
    for r in records {
        strata.entry(r.rule).or_default().push(r);
    }
    let capacities: BTreeMap<RuleId, usize> =
        strata.iter().map(|(r, v)| (*r, v.len())).collect();
    let quotas = allocate_quotas(weights, &capacities, total)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(total);
    for (rule, members) in &strata {
        let quota = quotas[rule];
        let mut indices: Vec<usize> = (0..members.len()).collect();
        indices.shuffle(&mut rng);
        let mut chosen: Vec<usize> = indices.into_iter().take(quota).collect();
        chosen.sort_unstable();
        out.extend(chosen.into_iter().map(|i| members[i].clone()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("empty field: {0}")]
    EmptyField(&'static str),
}

/// Render the pull-request body with the four substitution sites filled in.
/// Byte-stable for golden comparison.
pub fn render_pr_body(
    dockerfile_path: &str,
    violation_id: RuleId,
    violation_description: &str,
    fixing_rule_explanation: &str,
) -> Result<String, RenderError> {
    if dockerfile_path.is_empty() {
        return Err(RenderError::EmptyField("dockerfile_path"));
    }
    if violation_description.is_empty() {
        return Err(RenderError::EmptyField("violation_description"));
    }
    if fixing_rule_explanation.is_empty() {
        return Err(RenderError::EmptyField("fixing_rule_explanation"));
    }
    let id = violation_id.as_str();
    Ok(format!(
        "Hi!\n\n\
         The Dockerfile placed at {dockerfile_path} contained a best practice violation, \
         detected by the linting tool hadolint, and identified as {id}.\n\n\
         The {id} occurs when {violation_description}\n\n\
         In this pull request, we propose a fix for the detected smell, automatically \
         generated by a tool. To fix this smell, specifically, we {fixing_rule_explanation}.\n\n\
         This change is only aimed at fixing the specific smell. In case of rejection, \
         please briefly indicate the reason (e.g., if you believe that the fix is not \
         valid or useful and why, along with suggestions for possible improvement).\n\n\
         Thanks in advance.\n"
    ))
}

/// A PR ready for human submission: rendered body plus the patch.
#[derive(Debug, Clone, Serialize)]
pub struct PrDraft {
    pub title: String,
    pub body: String,
    pub rule: RuleId,
    pub patch: String,
}

impl PrDraft {
    pub fn new(
        dockerfile_path: &str,
        rule: RuleId,
        patch: String,
    ) -> Result<PrDraft, RenderError> {
        Ok(PrDraft {
            title: format!("Fix {} Dockerfile best practice violation", rule.as_str()),
            body: render_pr_body(
                dockerfile_path,
                rule,
                rule.violation_description(),
                rule.fix_explanation(),
            )?,
            rule,
            patch,
        })
    }
}

/// Outcome states of a submitted PR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrState {
    /// No response from the maintainers.
    Ignored,
    /// Rejected or closed without merging.
    RejectedClosed,
    /// Awaiting a decision.
    Pending,
    /// Approved but not yet merged.
    Accepted,
    /// The fix is in the main branch.
    Fixed,
}

/// One append-only ledger row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrLedgerEntry {
    pub repo_id: String,
    pub rule: RuleId,
    pub state: PrState,
    pub recorded_at: NaiveDate,
}

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    BadRow { line: usize, message: String },
}

/// Local JSON-lines PR state ledger. The latest row per (repo_id, rule) is
/// the current state; history is never rewritten.
#[derive(Debug, Clone, Default)]
pub struct PrLedger {
    pub entries: Vec<PrLedgerEntry>,
}

impl PrLedger {
    pub fn load<R: Read>(reader: R) -> Result<PrLedger, LedgerError> {
        let mut entries = Vec::new();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            entries.push(serde_json::from_str(&line).map_err(|e| LedgerError::BadRow {
                line: i + 1,
                message: e.to_string(),
            })?);
        }
        Ok(PrLedger { entries })
    }

    pub fn record(&mut self, entry: PrLedgerEntry) {
        self.entries.push(entry);
    }

    pub fn current_state(&self, repo_id: &str, rule: RuleId) -> Option<PrState> {
        self.entries
            .iter()
            .rev()
            .find(|e| e.repo_id == repo_id && e.rule == rule)
            .map(|e| e.state)
    }

    /// Append rows past `already_written` to a writer, one JSON object per
    /// line.
    pub fn append_to<W: Write>(&self, writer: &mut W, already_written: usize) -> Result<(), LedgerError> {
        for entry in &self.entries[already_written..] {
            serde_json::to_writer(&mut *writer, entry)
                .map_err(|e| LedgerError::BadRow { line: 0, message: e.to_string() })?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }
}
