//! Dockerfile smell detection, rule-based auto-fixing, history mining, and
//! pull-request study tooling.
//!
//! The crate is organized as a pipeline:
//!
//! - [`ast`] — lossless Dockerfile parsing; `print(parse(x)) == x` and edits
//!   re-emit only the touched instructions.
//! - [`shell`] — connector-level scanning of `RUN` payloads (quotes and
//!   subshells are opaque; no full shell grammar).
//! - [`rules`] — the eight `DL*` detectors and the stable smell identity used
//!   for cross-snapshot set difference.
//! - [`resolve`] — offline registry and package-archive snapshots backing the
//!   version-pinning fixes.
//! - [`fix`] — the fixer: applies a rule's transformation or refuses with a
//!   machine-readable reason, never emitting an unverified edit.
//! - [`diff`] — LCS line alignment and unified-diff rendering, shared by
//!   patch output and history classification.
//! - [`history`] — smell survivability over commit histories (disappearance
//!   sets, fix-candidate commits, modified/removed/rewritten classification).
//! - [`study`] — candidate filtering, sample sizing, stratified sampling, and
//!   PR draft rendering.

pub mod ast;
pub mod diff;
pub mod fix;
pub mod history;
pub mod resolve;
pub mod rules;
pub mod shell;
pub mod study;

pub use ast::{parse_dockerfile, print_dockerfile, DockerfileAst, ImageRef, Instruction, Keyword};
pub use fix::{fix, fix_all, render_patch, FixContext, FixOutcome, FixStatus, RefusalReason};
pub use history::{
    candidate_fix_set, disappeared, summarize, Classification, SnapshotHistory, SurvivalReport,
};
pub use resolve::{PackageIndexSnapshot, RegistrySnapshot};
pub use rules::{lint, smell_set, FileReport, Finding, RuleId, SmellAnchor, SmellKey};
pub use study::{
    filter_candidates, render_pr_body, required_sample_size, stratified_sample, CandidateRecord,
    PrDraft, PrLedger, PrState,
};
