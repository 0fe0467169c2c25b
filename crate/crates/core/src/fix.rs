//! Rule-based fixing of detected smells.
//!
//! Each transform touches only the lines implicated by the finding (plus at
//! most one inserted line) so the resulting diffs stay reviewable in a pull
//! request. A fix that cannot be made safely is refused with a reason rather
//! than guessed.

use std::collections::BTreeSet;

use chrono::NaiveDate;
use thiserror::Error;

use crate::ast::{
    parse_dockerfile, parse_image_ref, print_dockerfile, DockerfileAst, Keyword,
};
use crate::diff::unified_diff;
use crate::resolve::{
    degrade_version, is_installable, resolve_image_tag, select_apt_version, DegradeError,
    PackageIndexSnapshot, RegistrySnapshot, WildcardLevel,
};
use crate::rules::{lint, smell_set, Finding, RuleId, SmellAnchor, SmellKey};
use crate::shell::{parse_run_payload, Connector};

/// Everything a fix may need besides the file itself.
#[derive(Debug, Clone, Copy)]
pub struct FixContext<'a> {
    /// Cutoff for apt version selection, usually the commit or mtime date.
    pub last_modified: NaiveDate,
    pub registry: &'a RegistrySnapshot,
    pub apt_index: &'a PackageIndexSnapshot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RefusalReason {
    UnresolvableVersion,
    NonUbuntuBase,
    VariableBearing,
    NoTagAvailable,
    TooFewSegments,
    UnsupportedShape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixStatus {
    Fixed,
    Refused,
}

/// Result of applying one fixing rule to one finding.
#[derive(Debug, Clone)]
pub struct FixOutcome {
    pub rule: RuleId,
    pub key: SmellKey,
    pub line: usize,
    pub status: FixStatus,
    pub patched: Option<DockerfileAst>,
    /// Original-numbering lines that were modified or adjacent-inserted.
    pub touched_lines: BTreeSet<usize>,
    pub refusal_reason: Option<RefusalReason>,
}

impl FixOutcome {
    fn fixed(finding: &Finding, patched: DockerfileAst, touched: BTreeSet<usize>) -> FixOutcome {
        FixOutcome {
            rule: finding.rule,
            key: finding.key.clone(),
            line: finding.line,
            status: FixStatus::Fixed,
            patched: Some(patched),
            touched_lines: touched,
            refusal_reason: None,
        }
    }

    fn refused(finding: &Finding, reason: RefusalReason) -> FixOutcome {
        FixOutcome {
            rule: finding.rule,
            key: finding.key.clone(),
            line: finding.line,
            status: FixStatus::Refused,
            patched: None,
            touched_lines: BTreeSet::new(),
            refusal_reason: Some(reason),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FixError {
    #[error("finding is not present in the given AST")]
    FindingNotPresent,
}

/// FROM tag -> Ubuntu series. Unmapped tags refuse the DL3008 fix rather
/// than pin a version from the wrong archive.
const TAG_SERIES: [(&str, &str); 4] = [
    ("20.04", "focal"),
    ("18.04", "bionic"),
    ("16.04", "xenial"),
    ("14.04", "trusty"),
];

const SERIES_NAMES: [&str; 6] = ["trusty", "xenial", "bionic", "focal", "jammy", "noble"];

fn stage_series(ast: &DockerfileAst, stage: usize) -> Option<String> {
    let from = ast
        .instructions()
        .iter()
        .find(|i| i.keyword == Keyword::From && i.stage_index == stage)?;
    let image = parse_image_ref(&from.raw_args).ok()?;
    let name_tail = image.name.rsplit('/').next().unwrap_or("");
    if !name_tail.eq_ignore_ascii_case("ubuntu") {
        return None;
    }
    let tag = image.tag?;
    if let Some((_, series)) = TAG_SERIES.iter().find(|(t, _)| *t == tag) {
        return Some((*series).to_string());
    }
    let lower = tag.to_ascii_lowercase();
    if SERIES_NAMES.contains(&lower.as_str()) {
        return Some(lower);
    }
    None
}

fn stage_base_name(ast: &DockerfileAst, stage: usize) -> Option<String> {
    let from = ast
        .instructions()
        .iter()
        .find(|i| i.keyword == Keyword::From && i.stage_index == stage)?;
    parse_image_ref(&from.raw_args)
        .ok()
        .map(|r| r.name.to_ascii_lowercase())
}

fn span_lines(ast: &DockerfileAst, idx: usize) -> BTreeSet<usize> {
    let span = ast.instruction(idx).span;
    (span.start_line..=span.end_line).collect()
}

/// Re-parse a candidate edit and accept it only if the finding's key is gone.
fn accept(finding: &Finding, edited: DockerfileAst, touched: BTreeSet<usize>) -> FixOutcome {
    let reparsed = parse_dockerfile(&print_dockerfile(&edited));
    if smell_set(&reparsed).contains(&finding.key) {
        FixOutcome::refused(finding, RefusalReason::UnsupportedShape)
    } else {
        FixOutcome::fixed(finding, reparsed, touched)
    }
}

/// Apply the fixing rule for one finding.
pub fn fix(finding: &Finding, ast: &DockerfileAst, ctx: &FixContext) -> Result<FixOutcome, FixError> {
    let current = lint(ast);
    let live = current
        .iter()
        .find(|f| f.key == finding.key)
        .ok_or(FixError::FindingNotPresent)?;
    let idx = ast
        .instruction_at_line(live.line)
        .ok_or(FixError::FindingNotPresent)?;

    let outcome = match finding.rule {
        RuleId::Dl3003 => fix_dl3003(live, ast, idx),
        RuleId::Dl3006 => fix_dl3006(live, ast, idx, ctx),
        RuleId::Dl3008 => fix_dl3008(live, ast, idx, ctx),
        RuleId::Dl3009 => fix_dl3009(live, ast, idx),
        RuleId::Dl3015 => fix_dl3015(live, ast, idx),
        RuleId::Dl3020 => fix_dl3020(live, ast, idx),
        RuleId::Dl4000 => fix_dl4000(live, ast, idx),
        RuleId::Dl4006 => fix_dl4006(live, ast, idx),
    };
    Ok(outcome)
}

fn fix_dl3003(finding: &Finding, ast: &DockerfileAst, idx: usize) -> FixOutcome {
    let ins = ast.instruction(idx);
    let chain = parse_run_payload(&ins.raw_args);
    if chain.exec_form || chain.unbalanced_quote {
        return FixOutcome::refused(finding, RefusalReason::UnsupportedShape);
    }
    let cd_positions: Vec<usize> = chain
        .commands
        .iter()
        .enumerate()
        .filter(|(_, c)| c.head() == Some("cd"))
        .map(|(i, _)| i)
        .collect();
    // Only the leading-cd pattern is safe: hoisting a mid-chain cd would
    // change which commands run in which directory.
    if cd_positions != [0] || chain.connectors.first() != Some(&Connector::AndIf) {
        return FixOutcome::refused(finding, RefusalReason::UnsupportedShape);
    }
    let cd = &chain.commands[0];
    if cd.words.len() != 2 || cd.words[0].text != "cd" {
        return FixOutcome::refused(finding, RefusalReason::UnsupportedShape);
    }
    let dir = &cd.words[1];
    if dir.has_expansion {
        return FixOutcome::refused(finding, RefusalReason::VariableBearing);
    }

    // Drop the leading `cd dir &&` and hoist the directory into WORKDIR.
    let rest_start = chain.commands[1].start;
    let remainder = ins.raw_args[rest_start..].trim_start().to_string();
    if remainder.is_empty() {
        return FixOutcome::refused(finding, RefusalReason::UnsupportedShape);
    }
    let mut edited = ast.clone();
    edited.insert_line_before(idx, format!("WORKDIR {}", dir.raw));
    edited.set_raw_args(idx, remainder);
    accept(finding, edited, span_lines(ast, idx))
}

fn fix_dl3006(finding: &Finding, ast: &DockerfileAst, idx: usize, ctx: &FixContext) -> FixOutcome {
    let ins = ast.instruction(idx);
    let Ok(image) = parse_image_ref(&ins.raw_args) else {
        return FixOutcome::refused(finding, RefusalReason::UnsupportedShape);
    };
    let tag = match resolve_image_tag(&image, ctx.registry) {
        Ok(tag) => tag,
        Err(_) => return FixOutcome::refused(finding, RefusalReason::NoTagAvailable),
    };
    // Replace the bare image token with name:tag, leaving flags and the
    // alias untouched.
    let mut new_args = None;
    let mut cursor = 0;
    for tok in ins.raw_args.split_whitespace() {
        let at = ins.raw_args[cursor..].find(tok).unwrap() + cursor;
        cursor = at + tok.len();
        if tok.starts_with("--") {
            continue;
        }
        let mut replaced = ins.raw_args.clone();
        replaced.replace_range(at..at + tok.len(), &format!("{}:{}", image.name, tag));
        new_args = Some(replaced);
        break;
    }
    let Some(new_args) = new_args else {
        return FixOutcome::refused(finding, RefusalReason::UnsupportedShape);
    };
    let mut edited = ast.clone();
    edited.set_raw_args(idx, new_args);
    accept(finding, edited, span_lines(ast, idx))
}

fn fix_dl3008(finding: &Finding, ast: &DockerfileAst, idx: usize, ctx: &FixContext) -> FixOutcome {
    let SmellAnchor::StagePackage { stage, package } = &finding.key.anchor else {
        return FixOutcome::refused(finding, RefusalReason::UnsupportedShape);
    };
    let Some(series) = stage_series(ast, *stage) else {
        return FixOutcome::refused(finding, RefusalReason::NonUbuntuBase);
    };
    let ins = ast.instruction(idx);
    let chain = parse_run_payload(&ins.raw_args);
    if chain.exec_form || chain.unbalanced_quote {
        return FixOutcome::refused(finding, RefusalReason::UnsupportedShape);
    }

    let Some(version) = select_apt_version(package, &series, ctx.last_modified, ctx.apt_index)
    else {
        return FixOutcome::refused(finding, RefusalReason::UnresolvableVersion);
    };
    let pattern = match degrade_version(&version, WildcardLevel::PatchWild) {
        Ok(p) if is_installable(package, &p, &series, ctx.apt_index) => p,
        Ok(_) | Err(DegradeError::TooFewSegments) => {
            match degrade_version(&version, WildcardLevel::MinorWild) {
                Ok(p) if is_installable(package, &p, &series, ctx.apt_index) => p,
                Ok(_) => return FixOutcome::refused(finding, RefusalReason::UnresolvableVersion),
                Err(DegradeError::TooFewSegments) => {
                    return FixOutcome::refused(finding, RefusalReason::TooFewSegments)
                }
            }
        }
    };

    // Pin every unpinned occurrence of this package in the instruction,
    // editing right-to-left so earlier spans stay valid.
    let mut edits: Vec<(usize, usize)> = Vec::new();
    for install in crate::rules::apt_installs(&chain) {
        for &wi in &install.unpinned {
            let w = &install.cmd.words[wi];
            if w.text == *package {
                edits.push((w.start, w.end));
            }
        }
    }
    if edits.is_empty() {
        return FixOutcome::refused(finding, RefusalReason::UnsupportedShape);
    }
    edits.sort_unstable();
    let mut new_args = ins.raw_args.clone();
    for (start, end) in edits.into_iter().rev() {
        new_args.replace_range(start..end, &format!("{}={}", package, pattern.text));
    }
    let mut edited = ast.clone();
    edited.set_raw_args(idx, new_args);
    accept(finding, edited, span_lines(ast, idx))
}

fn fix_dl3009(finding: &Finding, ast: &DockerfileAst, idx: usize) -> FixOutcome {
    let stage = ast.instruction(idx).stage_index;
    // Clean up in the last apt-bearing RUN of the stage: a later install
    // would re-create the lists and leave them in the final layer.
    let target = ast
        .instructions()
        .iter()
        .enumerate()
        .filter(|(_, ins)| {
            ins.keyword == Keyword::Run && ins.stage_index == stage && {
                let chain = parse_run_payload(&ins.raw_args);
                !chain.exec_form
                    && chain.commands.iter().any(|c| c.head() == Some("apt-get"))
            }
        })
        .map(|(i, _)| i)
        .last();
    let Some(target) = target else {
        return FixOutcome::refused(finding, RefusalReason::UnsupportedShape);
    };
    let ins = ast.instruction(target);
    let chain = parse_run_payload(&ins.raw_args);
    if chain.exec_form || chain.unbalanced_quote {
        return FixOutcome::refused(finding, RefusalReason::UnsupportedShape);
    }
    let mut edited = ast.clone();
    let new_args = format!("{} && rm -rf /var/lib/apt/lists/*", ins.raw_args.trim_end());
    edited.set_raw_args(target, new_args);
    accept(finding, edited, span_lines(ast, target))
}

fn fix_dl3015(finding: &Finding, ast: &DockerfileAst, idx: usize) -> FixOutcome {
    let ins = ast.instruction(idx);
    let chain = parse_run_payload(&ins.raw_args);
    if chain.exec_form || chain.unbalanced_quote {
        return FixOutcome::refused(finding, RefusalReason::UnsupportedShape);
    }
    // Insertion points: right after the `install` word of each offending
    // command, applied right-to-left.
    let mut points: Vec<usize> = crate::rules::apt_installs(&chain)
        .iter()
        .filter(|i| !i.has_no_install_recommends)
        .map(|i| i.cmd.words[i.install_word].end)
        .collect();
    if points.is_empty() {
        return FixOutcome::refused(finding, RefusalReason::UnsupportedShape);
    }
    points.sort_unstable();
    let mut new_args = ins.raw_args.clone();
    for p in points.into_iter().rev() {
        new_args.insert_str(p, " --no-install-recommends");
    }
    let mut edited = ast.clone();
    edited.set_raw_args(idx, new_args);
    accept(finding, edited, span_lines(ast, idx))
}

fn fix_dl3020(finding: &Finding, ast: &DockerfileAst, idx: usize) -> FixOutcome {
    let mut edited = ast.clone();
    edited.set_keyword(idx, "COPY");
    accept(finding, edited, span_lines(ast, idx))
}

fn fix_dl4000(finding: &Finding, ast: &DockerfileAst, idx: usize) -> FixOutcome {
    let ins = ast.instruction(idx);
    let text = ins.raw_args.trim();
    if text.is_empty() {
        return FixOutcome::refused(finding, RefusalReason::UnsupportedShape);
    }
    let escaped = text.replace('\\', "\\\\").replace('"', "\\\"");
    let mut edited = ast.clone();
    edited.set_keyword(idx, "LABEL");
    edited.set_raw_args(idx, format!("maintainer=\"{escaped}\""));
    accept(finding, edited, span_lines(ast, idx))
}

fn fix_dl4006(finding: &Finding, ast: &DockerfileAst, idx: usize) -> FixOutcome {
    let stage = ast.instruction(idx).stage_index;
    // The inserted shell is bash; refuse for bases that do not ship it.
    if let Some(base) = stage_base_name(ast, stage) {
        if base.contains("alpine") || base.contains("windows") {
            return FixOutcome::refused(finding, RefusalReason::UnsupportedShape);
        }
    }
    // Insert before the first piped RUN of the stage so every later pipe in
    // the stage is covered too.
    let first_piped = ast
        .instructions()
        .iter()
        .enumerate()
        .find(|(_, ins)| {
            ins.keyword == Keyword::Run && ins.stage_index == stage && {
                let chain = parse_run_payload(&ins.raw_args);
                !chain.exec_form && chain.has_pipe()
            }
        })
        .map(|(i, _)| i);
    let Some(target) = first_piped else {
        return FixOutcome::refused(finding, RefusalReason::UnsupportedShape);
    };
    let mut edited = ast.clone();
    edited.insert_line_before(target, "SHELL [\"/bin/bash\", \"-o\", \"pipefail\", \"-c\"]".to_string());
    let mut touched = BTreeSet::new();
    touched.insert(ast.instruction(target).span.start_line);
    accept(finding, edited, touched)
}

/// Apply fixes for every finding of the selected rules, ascending by line,
/// re-parsing between applications so spans never drift.
pub fn fix_all(
    ast: &DockerfileAst,
    ctx: &FixContext,
    rules: &BTreeSet<RuleId>,
) -> (DockerfileAst, Vec<FixOutcome>) {
    let mut current = parse_dockerfile(&print_dockerfile(ast));
    let mut outcomes = Vec::new();
    // Fixing one rule on a line can change the identity of other findings on
    // that line, so re-lint after every applied fix instead of working from a
    // stale list. Refused keys are skipped on later passes; every applied fix
    // eradicates its key, so the loop terminates. The cap is a safety net.
    let mut refused: BTreeSet<SmellKey> = BTreeSet::new();
    let cap = lint(&current).len() * RuleId::ALL.len() + 8;
    for _ in 0..cap {
        let next = lint(&current).into_iter().find(|f| {
            rules.contains(&f.rule) && !refused.contains(&f.key)
        });
        let Some(finding) = next else { break };
        match fix(&finding, &current, ctx) {
            Ok(outcome) => {
                if outcome.status == FixStatus::Fixed {
                    if let Some(patched) = &outcome.patched {
                        current = patched.clone();
                    }
                } else {
                    refused.insert(outcome.key.clone());
                }
                outcomes.push(outcome);
            }
            Err(FixError::FindingNotPresent) => unreachable!("finding taken from a fresh lint"),
        }
    }
    (current, outcomes)
}

/// Unified diff between two printed trees, 3 context lines.
pub fn render_patch(before: &DockerfileAst, after: &DockerfileAst) -> String {
    render_patch_with_path(before, after, "Dockerfile")
}

/// Same as `render_patch` with explicit a/ b/ path labels.
pub fn render_patch_with_path(before: &DockerfileAst, after: &DockerfileAst, path: &str) -> String {
    unified_diff(
        &print_dockerfile(before),
        &print_dockerfile(after),
        &format!("a/{path}"),
        &format!("b/{path}"),
        3,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resolve::PackageRow;

    fn date(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn registry() -> RegistrySnapshot {
        let mut r = RegistrySnapshot::default();
        r.insert("ubuntu", "sha256:d1", "latest", date("2020-06-01"));
        r.insert("ubuntu", "sha256:d1", "20.04", date("2020-05-20"));
        r.insert("onlylatest", "sha256:d9", "latest", date("2021-01-01"));
        r
    }

    fn index() -> PackageIndexSnapshot {
        let mut idx = PackageIndexSnapshot::default();
        for (pkg, series, version, d) in [
            ("curl", "focal", "7.68.0-1ubuntu2.5", "2021-05-10"),
            ("curl", "focal", "7.68.0-1ubuntu2.14", "2022-03-01"),
            ("curl", "trusty", "7.35.0-1ubuntu2.20", "2018-11-02"),
            ("wget", "focal", "1.20.3-1ubuntu2", "2020-04-23"),
        ] {
            idx.push(PackageRow {
                distribution: "ubuntu".to_string(),
                series: series.to_string(),
                package: pkg.to_string(),
                version: version.to_string(),
                published_date: date(d),
            });
        }
        idx
    }

    fn ctx<'a>(r: &'a RegistrySnapshot, i: &'a PackageIndexSnapshot) -> FixContext<'a> {
        FixContext {
            last_modified: date("2021-07-01"),
            registry: r,
            apt_index: i,
        }
    }

    fn fix_first(text: &str, rule: RuleId, ctx: &FixContext) -> FixOutcome {
        let ast = parse_dockerfile(text);
        let finding = lint(&ast).into_iter().find(|f| f.rule == rule).unwrap();
        fix(&finding, &ast, ctx).unwrap()
    }

    fn printed(outcome: &FixOutcome) -> String {
        print_dockerfile(outcome.patched.as_ref().unwrap())
    }

    #[test]
    fn dl3020_add_becomes_copy() {
        let r = registry();
        let i = index();
        let out = fix_first("FROM scratch\nADD src/ /app/\n", RuleId::Dl3020, &ctx(&r, &i));
        assert_eq!(out.status, FixStatus::Fixed);
        assert_eq!(printed(&out), "FROM scratch\nCOPY src/ /app/\n");
        assert_eq!(out.touched_lines, BTreeSet::from([2]));
    }

    #[test]
    fn dl4000_maintainer_becomes_label() {
        let r = registry();
        let i = index();
        let out = fix_first(
            "FROM scratch\nMAINTAINER Jane <j@x>\n",
            RuleId::Dl4000,
            &ctx(&r, &i),
        );
        assert_eq!(printed(&out), "FROM scratch\nLABEL maintainer=\"Jane <j@x>\"\n");
    }

    #[test]
    fn dl4000_escapes_quotes() {
        let r = registry();
        let i = index();
        let out = fix_first(
            "FROM scratch\nMAINTAINER \"Jane\"\n",
            RuleId::Dl4000,
            &ctx(&r, &i),
        );
        assert_eq!(
            printed(&out),
            "FROM scratch\nLABEL maintainer=\"\\\"Jane\\\"\"\n"
        );
    }

    #[test]
    fn dl3006_pins_tag() {
        let r = registry();
        let i = index();
        let out = fix_first("FROM ubuntu\n", RuleId::Dl3006, &ctx(&r, &i));
        assert_eq!(printed(&out), "FROM ubuntu:20.04\n");
    }

    #[test]
    fn dl3006_preserves_alias() {
        let r = registry();
        let i = index();
        let out = fix_first("FROM ubuntu AS base\nFROM base\n", RuleId::Dl3006, &ctx(&r, &i));
        assert_eq!(printed(&out), "FROM ubuntu:20.04 AS base\nFROM base\n");
    }

    #[test]
    fn dl3006_only_latest_refused() {
        let r = registry();
        let i = index();
        let out = fix_first("FROM onlylatest\n", RuleId::Dl3006, &ctx(&r, &i));
        assert_eq!(out.status, FixStatus::Refused);
        assert_eq!(out.refusal_reason, Some(RefusalReason::NoTagAvailable));
    }

    #[test]
    fn dl3008_pins_patch_wildcard() {
        let r = registry();
        let i = index();
        let out = fix_first(
            "FROM ubuntu:20.04\nRUN apt-get install -y curl\n",
            RuleId::Dl3008,
            &ctx(&r, &i),
        );
        assert_eq!(
            printed(&out),
            "FROM ubuntu:20.04\nRUN apt-get install -y curl=7.68.0-1ubuntu2.*\n"
        );
    }

    #[test]
    fn dl3008_non_ubuntu_refused() {
        let r = registry();
        let i = index();
        let out = fix_first(
            "FROM debian:buster\nRUN apt-get install -y curl\n",
            RuleId::Dl3008,
            &ctx(&r, &i),
        );
        assert_eq!(out.refusal_reason, Some(RefusalReason::NonUbuntuBase));
    }

    #[test]
    fn dl3008_unknown_package_refused() {
        let r = registry();
        let i = index();
        let out = fix_first(
            "FROM ubuntu:20.04\nRUN apt-get install -y nosuchpkg\n",
            RuleId::Dl3008,
            &ctx(&r, &i),
        );
        assert_eq!(out.refusal_reason, Some(RefusalReason::UnresolvableVersion));
    }

    #[test]
    fn dl3003_leading_cd_hoisted() {
        let r = registry();
        let i = index();
        let out = fix_first(
            "FROM ubuntu:20.04\nRUN cd /app && make\n",
            RuleId::Dl3003,
            &ctx(&r, &i),
        );
        assert_eq!(
            printed(&out),
            "FROM ubuntu:20.04\nWORKDIR /app\nRUN make\n"
        );
    }

    #[test]
    fn dl3003_mid_chain_refused() {
        let r = registry();
        let i = index();
        let out = fix_first(
            "FROM ubuntu:20.04\nRUN make && cd /out && cp a b\n",
            RuleId::Dl3003,
            &ctx(&r, &i),
        );
        assert_eq!(out.refusal_reason, Some(RefusalReason::UnsupportedShape));
    }

    #[test]
    fn dl3003_variable_dir_refused() {
        let r = registry();
        let i = index();
        let out = fix_first(
            "FROM ubuntu:20.04\nRUN cd $APP && make\n",
            RuleId::Dl3003,
            &ctx(&r, &i),
        );
        assert_eq!(out.refusal_reason, Some(RefusalReason::VariableBearing));
    }

    #[test]
    fn dl3009_appends_cleanup_to_last_apt_run() {
        let r = registry();
        let i = index();
        let out = fix_first(
            "FROM ubuntu:20.04\nRUN apt-get update && apt-get install -y curl=1\n",
            RuleId::Dl3009,
            &ctx(&r, &i),
        );
        assert_eq!(
            printed(&out),
            "FROM ubuntu:20.04\nRUN apt-get update && apt-get install -y curl=1 && rm -rf /var/lib/apt/lists/*\n"
        );
    }

    #[test]
    fn dl3015_inserts_flag_after_install() {
        let r = registry();
        let i = index();
        let out = fix_first(
            "FROM ubuntu:20.04\nRUN apt-get update && apt-get install -y curl=1 && rm -rf /var/lib/apt/lists/*\n",
            RuleId::Dl3015,
            &ctx(&r, &i),
        );
        assert!(printed(&out).contains("apt-get install --no-install-recommends -y curl=1"));
    }

    #[test]
    fn dl4006_inserts_shell_before_first_pipe() {
        let r = registry();
        let i = index();
        let out = fix_first(
            "FROM ubuntu:20.04\nRUN wget -O- x | tar xz\n",
            RuleId::Dl4006,
            &ctx(&r, &i),
        );
        assert_eq!(
            printed(&out),
            "FROM ubuntu:20.04\nSHELL [\"/bin/bash\", \"-o\", \"pipefail\", \"-c\"]\nRUN wget -O- x | tar xz\n"
        );
    }

    #[test]
    fn dl4006_alpine_refused() {
        let r = registry();
        let i = index();
        let out = fix_first(
            "FROM alpine:3.14\nRUN wget -O- x | tar xz\n",
            RuleId::Dl4006,
            &ctx(&r, &i),
        );
        assert_eq!(out.refusal_reason, Some(RefusalReason::UnsupportedShape));
    }

    #[test]
    fn fix_all_is_idempotent_and_eradicates() {
        let r = registry();
        let i = index();
        let c = ctx(&r, &i);
        let text = "FROM ubuntu\nMAINTAINER x\nRUN apt-get update && apt-get install -y curl wget\nADD src/ /app/\n";
        let rules: BTreeSet<RuleId> = RuleId::ALL.into_iter().collect();
        let (fixed, outcomes) = fix_all(&parse_dockerfile(text), &c, &rules);
        assert!(outcomes.iter().all(|o| o.status == FixStatus::Fixed));
        assert!(lint(&fixed).is_empty());
        let (fixed_again, _) = fix_all(&fixed, &c, &rules);
        assert_eq!(print_dockerfile(&fixed), print_dockerfile(&fixed_again));
    }

    #[test]
    fn empty_rule_set_is_identity() {
        let r = registry();
        let i = index();
        let c = ctx(&r, &i);
        let ast = parse_dockerfile("FROM ubuntu\n");
        let (out, outcomes) = fix_all(&ast, &c, &BTreeSet::new());
        assert!(outcomes.is_empty());
        assert_eq!(print_dockerfile(&out), "FROM ubuntu\n");
    }

    #[test]
    fn stale_finding_rejected() {
        let r = registry();
        let i = index();
        let c = ctx(&r, &i);
        let smelly = parse_dockerfile("FROM ubuntu\n");
        let finding = lint(&smelly).remove(0);
        let clean = parse_dockerfile("FROM ubuntu:20.04\n");
        assert!(matches!(
            fix(&finding, &clean, &c),
            Err(FixError::FindingNotPresent)
        ));
    }

    #[test]
    fn render_patch_identity_is_empty() {
        let a = parse_dockerfile("FROM ubuntu:20.04\n");
        assert_eq!(render_patch(&a, &a), "");
    }
}
