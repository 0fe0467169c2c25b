//! Detection of the eight target Dockerfile smells.
//!
//! Rule semantics are pinned to the observable behavior of the reference
//! linter via a committed golden corpus; variable-bearing sites are skipped
//! conservatively since fixes end up in front of humans.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ast::{parse_image_ref, DockerfileAst, Instruction, Keyword};
use crate::shell::{parse_run_payload, CommandChain, SimpleCommand};

/// The eight rule identifiers targeted by the fixer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RuleId {
    #[serde(rename = "DL3003")]
    Dl3003,
    #[serde(rename = "DL3006")]
    Dl3006,
    #[serde(rename = "DL3008")]
    Dl3008,
    #[serde(rename = "DL3009")]
    Dl3009,
    #[serde(rename = "DL3015")]
    Dl3015,
    #[serde(rename = "DL3020")]
    Dl3020,
    #[serde(rename = "DL4000")]
    Dl4000,
    #[serde(rename = "DL4006")]
    Dl4006,
}

impl RuleId {
    pub const ALL: [RuleId; 8] = [
        RuleId::Dl3003,
        RuleId::Dl3006,
        RuleId::Dl3008,
        RuleId::Dl3009,
        RuleId::Dl3015,
        RuleId::Dl3020,
        RuleId::Dl4000,
        RuleId::Dl4006,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RuleId::Dl3003 => "DL3003",
            RuleId::Dl3006 => "DL3006",
            RuleId::Dl3008 => "DL3008",
            RuleId::Dl3009 => "DL3009",
            RuleId::Dl3015 => "DL3015",
            RuleId::Dl3020 => "DL3020",
            RuleId::Dl4000 => "DL4000",
            RuleId::Dl4006 => "DL4006",
        }
    }

    /// Frozen catalog message, one per rule, so reports are diffable.
    pub fn message(&self) -> &'static str {
        match self {
            RuleId::Dl3003 => "Use WORKDIR to switch to a directory",
            RuleId::Dl3006 => "Always tag the version of an image explicitly",
            RuleId::Dl3008 => {
                "Pin versions in apt get install. Instead of `apt-get install <package>` use `apt-get install <package>=<version>`"
            }
            RuleId::Dl3009 => "Delete the apt-get lists after installing something",
            RuleId::Dl3015 => "Avoid additional packages by specifying `--no-install-recommends`",
            RuleId::Dl3020 => "Use COPY instead of ADD for files and folders",
            RuleId::Dl4000 => "MAINTAINER is deprecated",
            RuleId::Dl4006 => {
                "Set the SHELL option -o pipefail before RUN with a pipe in it"
            }
        }
    }

    /// Prose description of when the violation occurs, used in pull-request
    /// message bodies.
    pub fn violation_description(&self) -> &'static str {
        match self {
            RuleId::Dl3003 => {
                "the cd shell command is used to switch directory instead of the WORKDIR instruction."
            }
            RuleId::Dl3006 => {
                "the base image of a FROM instruction is not pinned with an explicit tag or digest."
            }
            RuleId::Dl3008 => {
                "packages installed with apt-get are not pinned to a specific version."
            }
            RuleId::Dl3009 => {
                "the apt-get lists are not deleted after installing packages, leaving a larger image layer."
            }
            RuleId::Dl3015 => {
                "apt-get install is used without the --no-install-recommends option, pulling in unneeded recommended packages."
            }
            RuleId::Dl3020 => {
                "the ADD instruction is used to copy plain files and folders instead of COPY."
            }
            RuleId::Dl4000 => "the deprecated MAINTAINER instruction is used.",
            RuleId::Dl4006 => {
                "a RUN instruction uses a pipe without setting the shell option -o pipefail first."
            }
        }
    }

    /// Prose description of the applied fix, used in pull-request bodies.
    pub fn fix_explanation(&self) -> &'static str {
        match self {
            RuleId::Dl3003 => "replaced the cd command with a WORKDIR instruction",
            RuleId::Dl3006 => {
                "pinned the base image to the most recent explicit tag assigned to its digest"
            }
            RuleId::Dl3008 => {
                "pinned the installed packages to the versions closest to the last modification date of the Dockerfile"
            }
            RuleId::Dl3009 => {
                "added the commands to clean the apt cache to the corresponding RUN instruction"
            }
            RuleId::Dl3015 => "added the --no-install-recommends option to apt-get install",
            RuleId::Dl3020 => "replaced the ADD instruction with COPY",
            RuleId::Dl4000 => {
                "replaced the MAINTAINER instruction with the equivalent LABEL instruction"
            }
            RuleId::Dl4006 => {
                "added the SHELL pipefail instruction before the RUN that uses a pipe"
            }
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleId::ALL
            .iter()
            .find(|r| r.as_str().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| format!("unknown rule id: {s}"))
    }
}

/// Rule-specific identity of a smell, stable across snapshots of the same
/// file so disappearance sets can be computed by set difference.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmellAnchor {
    /// DL3006: one per build stage.
    Stage { stage: usize },
    /// DL3008: one per unpinned package name per stage.
    StagePackage { stage: usize, package: String },
    /// DL4000: at most one per file.
    Maintainer,
    /// Everything else: instruction identity plus an ordinal for duplicates.
    Occurrence {
        stage: usize,
        normalized: String,
        ordinal: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SmellKey {
    pub rule: RuleId,
    pub anchor: SmellAnchor,
}

impl fmt::Display for SmellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.anchor {
            SmellAnchor::Stage { stage } => write!(f, "{}@stage{}", self.rule, stage),
            SmellAnchor::StagePackage { stage, package } => {
                write!(f, "{}@stage{}:{}", self.rule, stage, package)
            }
            SmellAnchor::Maintainer => write!(f, "{}@maintainer", self.rule),
            SmellAnchor::Occurrence {
                stage, ordinal, ..
            } => write!(f, "{}@stage{}#{}", self.rule, stage, ordinal),
        }
    }
}

/// One detected violation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub rule: RuleId,
    /// 1-based first physical line of the offending instruction.
    pub line: usize,
    pub message: String,
    pub key: SmellKey,
    pub snippet: String,
}

impl Finding {
    fn new(rule: RuleId, ins: &Instruction, anchor: SmellAnchor) -> Finding {
        Finding {
            rule,
            line: ins.span.start_line,
            message: rule.message().to_string(),
            key: SmellKey { rule, anchor },
            snippet: ins.first_line().trim().to_string(),
        }
    }
}

/// Serializable per-file report, stable field order.
#[derive(Debug, Clone, Serialize)]
pub struct FileReport {
    pub path: String,
    pub findings: Vec<FindingReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FindingReport {
    pub rule: RuleId,
    pub line: usize,
    pub message: String,
    pub snippet: String,
}

impl FileReport {
    pub fn new(path: &str, findings: &[Finding]) -> FileReport {
        FileReport {
            path: path.to_string(),
            findings: findings
                .iter()
                .map(|f| FindingReport {
                    rule: f.rule,
                    line: f.line,
                    message: f.message.clone(),
                    snippet: f.snippet.clone(),
                })
                .collect(),
        }
    }
}

/// Run every rule; findings come back ordered by (line, rule).
pub fn lint(ast: &DockerfileAst) -> Vec<Finding> {
    let mut findings: Vec<Finding> = RuleId::ALL
        .iter()
        .flat_map(|r| detect_rule(*r, ast))
        .collect();
    findings.sort_by(|a, b| (a.line, a.rule).cmp(&(b.line, b.rule)));
    findings
}

/// Smell identities present in a file.
pub fn smell_set(ast: &DockerfileAst) -> BTreeSet<SmellKey> {
    lint(ast).into_iter().map(|f| f.key).collect()
}

/// Run a single rule over the file.
pub fn detect_rule(rule: RuleId, ast: &DockerfileAst) -> Vec<Finding> {
    match rule {
        RuleId::Dl3003 => detect_dl3003(ast),
        RuleId::Dl3006 => detect_dl3006(ast),
        RuleId::Dl3008 => detect_dl3008(ast),
        RuleId::Dl3009 => detect_dl3009(ast),
        RuleId::Dl3015 => detect_dl3015(ast),
        RuleId::Dl3020 => detect_dl3020(ast),
        RuleId::Dl4000 => detect_dl4000(ast),
        RuleId::Dl4006 => detect_dl4006(ast),
    }
}

/// Assign occurrence ordinals to instructions sharing (stage, normalized).
fn occurrence_anchor(
    seen: &mut Vec<(usize, String)>,
    ins: &Instruction,
) -> SmellAnchor {
    let normalized = ins.normalized_text();
    let ordinal = seen
        .iter()
        .filter(|(s, n)| *s == ins.stage_index && *n == normalized)
        .count();
    seen.push((ins.stage_index, normalized.clone()));
    SmellAnchor::Occurrence {
        stage: ins.stage_index,
        normalized,
        ordinal,
    }
}

fn run_chains(ast: &DockerfileAst) -> Vec<(usize, &Instruction, CommandChain)> {
    ast.instructions()
        .iter()
        .enumerate()
        .filter(|(_, ins)| ins.keyword == Keyword::Run)
        .map(|(i, ins)| (i, ins, parse_run_payload(&ins.raw_args)))
        .collect()
}

fn detect_dl3003(ast: &DockerfileAst) -> Vec<Finding> {
    let mut seen = Vec::new();
    let mut out = Vec::new();
    for (_, ins, chain) in run_chains(ast) {
        if chain.unbalanced_quote {
            continue;
        }
        if chain.commands.iter().any(|c| c.head() == Some("cd")) {
            let anchor = occurrence_anchor(&mut seen, ins);
            out.push(Finding::new(RuleId::Dl3003, ins, anchor));
        }
    }
    out
}

fn detect_dl3006(ast: &DockerfileAst) -> Vec<Finding> {
    let mut aliases: Vec<String> = Vec::new();
    let mut out = Vec::new();
    for ins in ast.instructions() {
        if ins.keyword != Keyword::From {
            continue;
        }
        let Ok(image) = parse_image_ref(&ins.raw_args) else {
            continue;
        };
        let lower = image.name.to_ascii_lowercase();
        let is_smell = image.is_unpinned()
            && lower != "scratch"
            && !image.name.contains('$')
            && !aliases.contains(&lower);
        if is_smell {
            out.push(Finding::new(
                RuleId::Dl3006,
                ins,
                SmellAnchor::Stage {
                    stage: ins.stage_index,
                },
            ));
        }
        if let Some(alias) = image.alias {
            aliases.push(alias.to_ascii_lowercase());
        }
    }
    out
}

/// One `apt-get install` invocation inside a chain.
pub(crate) struct AptInstall<'a> {
    pub cmd: &'a SimpleCommand,
    /// Word indices of unpinned package names (no `=version`, no `$`).
    pub unpinned: Vec<usize>,
    pub has_no_install_recommends: bool,
    /// Word index of the `install` subcommand.
    pub install_word: usize,
}

/// Flags whose value is a separate word and must not be read as a package.
const VALUE_FLAGS: [&str; 5] = ["-t", "--target-release", "-o", "-c", "--config-file"];

pub(crate) fn apt_installs<'a>(chain: &'a CommandChain) -> Vec<AptInstall<'a>> {
    let mut out = Vec::new();
    for cmd in &chain.commands {
        if cmd.head() != Some("apt-get") {
            continue;
        }
        let words: Vec<&str> = cmd.words.iter().map(|w| w.text.as_str()).collect();
        let head_at = words.iter().position(|w| *w == "apt-get").unwrap_or(0);
        let mut install_word = None;
        let mut unpinned = Vec::new();
        let mut no_recommends = false;
        let mut skip_next = false;
        for i in head_at + 1..words.len() {
            if skip_next {
                skip_next = false;
                // A `-o` value can still disable recommends.
                if words[i]
                    .to_ascii_lowercase()
                    .contains("apt::install-recommends=false")
                {
                    no_recommends = true;
                }
                continue;
            }
            let w = words[i];
            if w.starts_with('-') {
                if w == "--no-install-recommends" {
                    no_recommends = true;
                } else if w
                    .to_ascii_lowercase()
                    .contains("apt::install-recommends=false")
                {
                    no_recommends = true;
                } else if VALUE_FLAGS.contains(&w) {
                    skip_next = true;
                }
                continue;
            }
            if install_word.is_none() {
                if w == "install" {
                    install_word = Some(i);
                    continue;
                }
                // Some other subcommand (update, upgrade, ...): not an install.
                break;
            }
            if cmd.words[i].has_expansion || w.contains('=') {
                continue;
            }
            unpinned.push(i);
        }
        if let Some(install_word) = install_word {
            out.push(AptInstall {
                cmd,
                unpinned,
                has_no_install_recommends: no_recommends,
                install_word,
            });
        }
    }
    out
}

fn has_apt_update(chain: &CommandChain) -> bool {
    chain.commands.iter().any(|cmd| {
        cmd.head() == Some("apt-get")
            && cmd
                .words
                .iter()
                .any(|w| w.text == "update" || w.text == "install")
    })
}

fn removes_apt_lists(chain: &CommandChain) -> bool {
    chain.commands.iter().any(|cmd| {
        cmd.head() == Some("rm")
            && cmd
                .words
                .iter()
                .any(|w| w.text.starts_with("/var/lib/apt/lists"))
    })
}

fn detect_dl3008(ast: &DockerfileAst) -> Vec<Finding> {
    let mut out = Vec::new();
    let mut seen: BTreeSet<(usize, String)> = BTreeSet::new();
    for (_, ins, chain) in run_chains(ast) {
        if chain.unbalanced_quote {
            continue;
        }
        for install in apt_installs(&chain) {
            for &wi in &install.unpinned {
                let package = install.cmd.words[wi].text.clone();
                // One key per unpinned package name per stage, no matter how
                // often the package repeats.
                if seen.insert((ins.stage_index, package.clone())) {
                    out.push(Finding::new(
                        RuleId::Dl3008,
                        ins,
                        SmellAnchor::StagePackage {
                            stage: ins.stage_index,
                            package,
                        },
                    ));
                }
            }
        }
    }
    out
}

fn detect_dl3009(ast: &DockerfileAst) -> Vec<Finding> {
    let chains = run_chains(ast);
    // Stage-level view: a cleanup anywhere in the stage suppresses the rule
    // for that stage, matching the reference linter.
    let cleaned_stages: BTreeSet<usize> = chains
        .iter()
        .filter(|(_, _, c)| removes_apt_lists(c))
        .map(|(_, ins, _)| ins.stage_index)
        .collect();
    let mut seen = Vec::new();
    let mut out = Vec::new();
    for (_, ins, chain) in &chains {
        if chain.unbalanced_quote || chain.exec_form {
            continue;
        }
        if has_apt_update(chain) && !cleaned_stages.contains(&ins.stage_index) {
            let anchor = occurrence_anchor(&mut seen, ins);
            out.push(Finding::new(RuleId::Dl3009, ins, anchor));
        }
    }
    out
}

fn detect_dl3015(ast: &DockerfileAst) -> Vec<Finding> {
    let mut seen = Vec::new();
    let mut out = Vec::new();
    for (_, ins, chain) in run_chains(ast) {
        if chain.unbalanced_quote {
            continue;
        }
        let offending = apt_installs(&chain)
            .iter()
            .any(|inst| !inst.has_no_install_recommends);
        if offending {
            let anchor = occurrence_anchor(&mut seen, ins);
            out.push(Finding::new(RuleId::Dl3015, ins, anchor));
        }
    }
    out
}

const ARCHIVE_SUFFIXES: [&str; 10] = [
    ".tar", ".tar.gz", ".tgz", ".tar.bz2", ".tbz2", ".tar.xz", ".txz", ".gz", ".bz2", ".zip",
];

fn is_archive_or_url(source: &str) -> bool {
    let lower = source.to_ascii_lowercase();
    lower.starts_with("http://")
        || lower.starts_with("https://")
        || lower.ends_with(".xz")
        || ARCHIVE_SUFFIXES.iter().any(|s| lower.ends_with(s))
}

fn detect_dl3020(ast: &DockerfileAst) -> Vec<Finding> {
    let mut seen = Vec::new();
    let mut out = Vec::new();
    for ins in ast.instructions() {
        if ins.keyword != Keyword::Add {
            continue;
        }
        let words: Vec<String> = if ins.raw_args.trim_start().starts_with('[') {
            serde_json::from_str::<Vec<String>>(ins.raw_args.trim()).unwrap_or_default()
        } else {
            ins.raw_args
                .split_whitespace()
                .filter(|w| !w.starts_with("--"))
                .map(|w| w.to_string())
                .collect()
        };
        if words.len() < 2 {
            continue;
        }
        let sources = &words[..words.len() - 1];
        if sources.iter().all(|s| !is_archive_or_url(s)) {
            let anchor = occurrence_anchor(&mut seen, ins);
            out.push(Finding::new(RuleId::Dl3020, ins, anchor));
        }
    }
    out
}

fn detect_dl4000(ast: &DockerfileAst) -> Vec<Finding> {
    ast.instructions()
        .iter()
        .filter(|ins| ins.keyword == Keyword::Maintainer)
        .map(|ins| Finding::new(RuleId::Dl4000, ins, SmellAnchor::Maintainer))
        .collect()
}

/// Does a SHELL instruction's argv enable pipefail?
fn shell_sets_pipefail(ins: &Instruction) -> bool {
    let argv: Vec<String> = if ins.raw_args.trim_start().starts_with('[') {
        serde_json::from_str(ins.raw_args.trim()).unwrap_or_default()
    } else {
        ins.raw_args
            .split_whitespace()
            .map(|w| w.to_string())
            .collect()
    };
    argv.iter().any(|w| w == "-o") && argv.iter().any(|w| w == "pipefail")
}

fn detect_dl4006(ast: &DockerfileAst) -> Vec<Finding> {
    let mut seen = Vec::new();
    let mut out = Vec::new();
    let mut pipefail_active = false;
    for ins in ast.instructions() {
        if ins.keyword == Keyword::From {
            pipefail_active = false;
        }
        match ins.keyword {
            Keyword::Shell => pipefail_active = shell_sets_pipefail(ins),
            Keyword::Run => {
                let chain = parse_run_payload(&ins.raw_args);
                // Exec-form RUN spawns no shell, so pipefail does not apply.
                if !chain.exec_form
                    && !chain.unbalanced_quote
                    && chain.has_pipe()
                    && !pipefail_active
                {
                    let anchor = occurrence_anchor(&mut seen, ins);
                    out.push(Finding::new(RuleId::Dl4006, ins, anchor));
                }
            }
            _ => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse_dockerfile;

    fn rules_of(text: &str) -> BTreeSet<RuleId> {
        lint(&parse_dockerfile(text))
            .into_iter()
            .map(|f| f.rule)
            .collect()
    }

    #[test]
    fn empty_file_is_clean() {
        assert!(lint(&parse_dockerfile("")).is_empty());
    }

    #[test]
    fn untagged_from_and_maintainer() {
        let findings = lint(&parse_dockerfile("FROM ubuntu\nMAINTAINER x\n"));
        let got: Vec<(RuleId, usize)> = findings.iter().map(|f| (f.rule, f.line)).collect();
        assert_eq!(got, vec![(RuleId::Dl3006, 1), (RuleId::Dl4000, 2)]);
    }

    #[test]
    fn dl3003_cd_in_chain() {
        let f = detect_rule(
            RuleId::Dl3003,
            &parse_dockerfile("FROM ubuntu:20.04\nRUN cd /app && make\n"),
        );
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].line, 2);
    }

    #[test]
    fn dl3006_skips_stage_alias_scratch_and_variables() {
        assert!(!rules_of("FROM golang:1.16 AS builder\nFROM builder\n").contains(&RuleId::Dl3006));
        assert!(!rules_of("FROM scratch\n").contains(&RuleId::Dl3006));
        assert!(!rules_of("ARG BASE=ubuntu:20.04\nFROM $BASE\n").contains(&RuleId::Dl3006));
        assert!(rules_of("FROM ubuntu\n").contains(&RuleId::Dl3006));
    }

    #[test]
    fn dl3008_pinned_package_is_clean() {
        let text = "FROM ubuntu:20.04\nRUN apt-get install -y curl=7.68.0-1ubuntu2.5\n";
        assert!(!rules_of(text).contains(&RuleId::Dl3008));
    }

    #[test]
    fn dl3008_one_key_per_package() {
        let ast = parse_dockerfile(
            "FROM ubuntu:20.04\nRUN apt-get install -y curl curl wget\n",
        );
        let keys = smell_set(&ast);
        let dl3008: Vec<_> = keys.iter().filter(|k| k.rule == RuleId::Dl3008).collect();
        assert_eq!(dl3008.len(), 2);
    }

    #[test]
    fn dl3008_skips_target_release_value_and_variables() {
        let ast = parse_dockerfile(
            "FROM ubuntu:20.04\nRUN apt-get install -y -t focal-backports $PKG curl\n",
        );
        let keys: Vec<SmellKey> = smell_set(&ast)
            .into_iter()
            .filter(|k| k.rule == RuleId::Dl3008)
            .collect();
        assert_eq!(
            keys,
            vec![SmellKey {
                rule: RuleId::Dl3008,
                anchor: SmellAnchor::StagePackage {
                    stage: 0,
                    package: "curl".to_string()
                }
            }]
        );
    }

    #[test]
    fn dl3009_suppressed_by_cleanup_in_same_stage() {
        let dirty = "FROM ubuntu:20.04\nRUN apt-get update && apt-get install -y curl=1\n";
        assert!(rules_of(dirty).contains(&RuleId::Dl3009));
        let clean = "FROM ubuntu:20.04\nRUN apt-get update && apt-get install -y curl=1\nRUN rm -rf /var/lib/apt/lists/*\n";
        assert!(!rules_of(clean).contains(&RuleId::Dl3009));
    }

    #[test]
    fn dl3015_option_spellings() {
        let flagged = "FROM ubuntu:20.04\nRUN apt-get install -y curl=1 && rm -rf /var/lib/apt/lists/*\n";
        assert!(rules_of(flagged).contains(&RuleId::Dl3015));
        let with_flag = "FROM ubuntu:20.04\nRUN apt-get install -y --no-install-recommends curl=1 && rm -rf /var/lib/apt/lists/*\n";
        assert!(!rules_of(with_flag).contains(&RuleId::Dl3015));
        let with_opt = "FROM ubuntu:20.04\nRUN apt-get install -y -o APT::Install-Recommends=false curl=1 && rm -rf /var/lib/apt/lists/*\n";
        assert!(!rules_of(with_opt).contains(&RuleId::Dl3015));
    }

    #[test]
    fn dl3020_archives_and_urls_allowed() {
        assert!(rules_of("FROM scratch\nADD src/ /app/\n").contains(&RuleId::Dl3020));
        assert!(!rules_of("FROM scratch\nADD rootfs.tar.gz /\n").contains(&RuleId::Dl3020));
        assert!(
            !rules_of("FROM scratch\nADD https://example.com/a /tmp/a\n")
                .contains(&RuleId::Dl3020)
        );
    }

    #[test]
    fn dl4000_case_insensitive() {
        assert!(rules_of("FROM scratch\nmaintainer someone\n").contains(&RuleId::Dl4000));
    }

    #[test]
    fn dl4006_shell_pipefail_suppresses() {
        let bad = "FROM ubuntu:20.04\nRUN wget -O- x | tar xz\n";
        assert!(rules_of(bad).contains(&RuleId::Dl4006));
        let good = "FROM ubuntu:20.04\nSHELL [\"/bin/bash\", \"-o\", \"pipefail\", \"-c\"]\nRUN wget -O- x | tar xz\n";
        assert!(!rules_of(good).contains(&RuleId::Dl4006));
        // A new stage resets the shell.
        let reset = "FROM ubuntu:20.04\nSHELL [\"/bin/bash\", \"-o\", \"pipefail\", \"-c\"]\nFROM ubuntu:20.04\nRUN wget -O- x | tar xz\n";
        assert!(rules_of(reset).contains(&RuleId::Dl4006));
    }

    #[test]
    fn key_stability_across_reparse() {
        let text = "FROM ubuntu\nRUN apt-get install -y curl wget\n";
        assert_eq!(
            smell_set(&parse_dockerfile(text)),
            smell_set(&parse_dockerfile(text))
        );
    }

    #[test]
    fn rule_id_round_trips_through_strings() {
        for r in RuleId::ALL {
            assert_eq!(r.as_str().parse::<RuleId>().unwrap(), r);
        }
        assert!("DL9999".parse::<RuleId>().is_err());
    }
}
