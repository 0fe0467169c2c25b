//! Lossless instruction-level Dockerfile parser.
//!
//! The parser keeps every byte of the input: instructions remember the exact
//! source slice they came from, and everything between instructions (comments,
//! blank lines) is stored verbatim. Printing an untouched tree reproduces the
//! input byte-for-byte, which keeps generated patches minimal.

use std::fmt;

use thiserror::Error;

/// Location of one instruction in the original source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    /// 1-based first physical line.
    pub start_line: usize,
    /// 1-based last physical line (inclusive, covers continuation lines).
    pub end_line: usize,
    /// Byte offset into the original text.
    pub byte_offset: usize,
    /// Length of the slice in bytes.
    pub byte_len: usize,
}

/// Recognized Dockerfile instruction keywords.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Keyword {
    From,
    Run,
    Copy,
    Add,
    Workdir,
    Maintainer,
    Label,
    Shell,
    Env,
    Arg,
    Cmd,
    Entrypoint,
    Expose,
    User,
    Volume,
    Onbuild,
    Healthcheck,
    Stopsignal,
    /// Anything else that still looks like an instruction word.
    Other(String),
}

impl Keyword {
    fn from_token(token: &str) -> Option<Keyword> {
        let upper = token.to_ascii_uppercase();
        let kw = match upper.as_str() {
            "FROM" => Keyword::From,
            "RUN" => Keyword::Run,
            "COPY" => Keyword::Copy,
            "ADD" => Keyword::Add,
            "WORKDIR" => Keyword::Workdir,
            "MAINTAINER" => Keyword::Maintainer,
            "LABEL" => Keyword::Label,
            "SHELL" => Keyword::Shell,
            "ENV" => Keyword::Env,
            "ARG" => Keyword::Arg,
            "CMD" => Keyword::Cmd,
            "ENTRYPOINT" => Keyword::Entrypoint,
            "EXPOSE" => Keyword::Expose,
            "USER" => Keyword::User,
            "VOLUME" => Keyword::Volume,
            "ONBUILD" => Keyword::Onbuild,
            "HEALTHCHECK" => Keyword::Healthcheck,
            "STOPSIGNAL" => Keyword::Stopsignal,
            _ => {
                if token
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
                {
                    Keyword::Other(upper)
                } else {
                    return None;
                }
            }
        };
        Some(kw)
    }
}

impl fmt::Display for Keyword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Keyword::From => "FROM",
            Keyword::Run => "RUN",
            Keyword::Copy => "COPY",
            Keyword::Add => "ADD",
            Keyword::Workdir => "WORKDIR",
            Keyword::Maintainer => "MAINTAINER",
            Keyword::Label => "LABEL",
            Keyword::Shell => "SHELL",
            Keyword::Env => "ENV",
            Keyword::Arg => "ARG",
            Keyword::Cmd => "CMD",
            Keyword::Entrypoint => "ENTRYPOINT",
            Keyword::Expose => "EXPOSE",
            Keyword::User => "USER",
            Keyword::Volume => "VOLUME",
            Keyword::Onbuild => "ONBUILD",
            Keyword::Healthcheck => "HEALTHCHECK",
            Keyword::Stopsignal => "STOPSIGNAL",
            Keyword::Other(w) => w,
        };
        f.write_str(s)
    }
}

/// One parsed instruction. Continuation lines are folded into `raw_args`, but
/// `span` and the retained source slice still cover every physical line.
#[derive(Debug, Clone)]
pub struct Instruction {
    pub keyword: Keyword,
    /// Keyword token exactly as written (original casing).
    pub keyword_raw: String,
    /// Argument text with continuations folded away.
    pub raw_args: String,
    pub span: SourceSpan,
    /// 0-based build-stage ordinal; instructions before the first FROM share
    /// stage 0 with it.
    pub stage_index: usize,
    original: String,
    indent: String,
    ends_with_newline: bool,
    dirty: bool,
    pending_inserts: Vec<String>,
}

impl Instruction {
    /// Keyword + single-spaced arguments, used for stable smell identity.
    pub fn normalized_text(&self) -> String {
        let args: Vec<&str> = self.raw_args.split_whitespace().collect();
        if args.is_empty() {
            self.keyword.to_string()
        } else {
            format!("{} {}", self.keyword, args.join(" "))
        }
    }

    /// First physical line of the instruction as written.
    pub fn first_line(&self) -> &str {
        self.original.lines().next().unwrap_or("")
    }
}

/// A problem found while parsing; never fatal.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseIssue {
    #[error("line {line}: malformed instruction")]
    MalformedInstruction { line: usize },
}

#[derive(Debug, Clone)]
enum Item {
    /// Verbatim interstitial text (comments, blank lines, malformed lines).
    Interstitial(String),
    /// Index into `instructions`.
    Instruction(usize),
}

/// Lossless parse result. `print` reproduces the original bytes exactly as
/// long as no instruction was edited.
#[derive(Debug, Clone)]
pub struct DockerfileAst {
    instructions: Vec<Instruction>,
    items: Vec<Item>,
    pub original_text: String,
    pub issues: Vec<ParseIssue>,
    pub escape_char: char,
}

impl DockerfileAst {
    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn instruction(&self, idx: usize) -> &Instruction {
        &self.instructions[idx]
    }

    /// Replace the argument text of an instruction. The instruction is
    /// re-emitted on a single line when printed.
    pub fn set_raw_args(&mut self, idx: usize, args: String) {
        let ins = &mut self.instructions[idx];
        ins.raw_args = args;
        ins.dirty = true;
    }

    /// Replace the keyword of an instruction (e.g. ADD -> COPY).
    pub fn set_keyword(&mut self, idx: usize, keyword: &str) {
        let ins = &mut self.instructions[idx];
        ins.keyword = Keyword::from_token(keyword).unwrap_or(Keyword::Other(keyword.to_string()));
        ins.keyword_raw = keyword.to_string();
        ins.dirty = true;
    }

    /// Queue a whole line to be emitted immediately before an instruction,
    /// sharing its indentation.
    pub fn insert_line_before(&mut self, idx: usize, line: String) {
        self.instructions[idx].pending_inserts.push(line);
    }

    /// Index of the instruction whose span starts at the given 1-based line.
    pub fn instruction_at_line(&self, line: usize) -> Option<usize> {
        self.instructions
            .iter()
            .position(|i| i.span.start_line <= line && line <= i.span.end_line)
    }
}

fn is_blank_or_comment(content: &str) -> bool {
    let t = content.trim_start();
    t.is_empty() || t.starts_with('#')
}

fn strip_newline(line: &str) -> &str {
    line.strip_suffix('\n').unwrap_or(line)
}

/// Pick up a `# escape=` parser directive from the leading comment block.
fn detect_escape_char(text: &str) -> char {
    for line in text.lines() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(rest) = t.strip_prefix('#') {
            if let Some((key, value)) = rest.split_once('=') {
                if key.trim().eq_ignore_ascii_case("escape") {
                    match value.trim() {
                        "`" => return '`',
                        "\\" => return '\\',
                        _ => {}
                    }
                }
            }
            continue;
        }
        break;
    }
    '\\'
}

/// Parse Dockerfile text into a lossless AST. Malformed lines are collected
/// as issues and kept as interstitial text so round-tripping still holds.
pub fn parse_dockerfile(text: &str) -> DockerfileAst {
    let escape = detect_escape_char(text);

    // Physical lines with their byte offsets, newline included.
    let mut lines: Vec<(usize, &str)> = Vec::new();
    let mut off = 0;
    while off < text.len() {
        let end = match text[off..].find('\n') {
            Some(i) => off + i + 1,
            None => text.len(),
        };
        lines.push((off, &text[off..end]));
        off = end;
    }

    let mut instructions: Vec<Instruction> = Vec::new();
    let mut items: Vec<Item> = Vec::new();
    let mut issues: Vec<ParseIssue> = Vec::new();
    let mut interstitial = String::new();

    let mut i = 0;
    while i < lines.len() {
        let (_, raw_line) = lines[i];
        let content = strip_newline(raw_line);
        if is_blank_or_comment(content) {
            interstitial.push_str(raw_line);
            i += 1;
            continue;
        }

        // Fold the logical instruction starting here.
        let start = i;
        let mut folded = String::new();
        let mut j = i;
        loop {
            if j >= lines.len() {
                break;
            }
            let line_content = strip_newline(lines[j].1);
            if j > start && is_blank_or_comment(line_content) {
                // Comment or blank line inside an open continuation: part of
                // the span, contributes nothing to the folded arguments.
                j += 1;
                continue;
            }
            if let Some(before) = line_content.strip_suffix(escape) {
                folded.push_str(before);
                j += 1;
            } else {
                folded.push_str(line_content);
                j += 1;
                break;
            }
        }

        let byte_offset = lines[start].0;
        let byte_end = if j < lines.len() { lines[j].0 } else { text.len() };
        let original = &text[byte_offset..byte_end];
        let ends_with_newline = original.ends_with('\n');

        // Split folded text into indent, keyword token, and arguments.
        let indent_len = folded.len() - folded.trim_start().len();
        let indent = folded[..indent_len].to_string();
        let after_indent = &folded[indent_len..];
        let token_len = after_indent
            .find(|c: char| c.is_whitespace())
            .unwrap_or(after_indent.len());
        let token = &after_indent[..token_len];
        let rest = after_indent[token_len..].trim_start();

        match Keyword::from_token(token) {
            Some(keyword) => {
                let idx = instructions.len();
                if !interstitial.is_empty() {
                    items.push(Item::Interstitial(std::mem::take(&mut interstitial)));
                }
                instructions.push(Instruction {
                    keyword,
                    keyword_raw: token.to_string(),
                    raw_args: rest.to_string(),
                    span: SourceSpan {
                        start_line: start + 1,
                        end_line: j,
                        byte_offset,
                        byte_len: byte_end - byte_offset,
                    },
                    stage_index: 0,
                    original: original.to_string(),
                    indent,
                    ends_with_newline,
                    dirty: false,
                    pending_inserts: Vec::new(),
                });
                items.push(Item::Instruction(idx));
            }
            None => {
                issues.push(ParseIssue::MalformedInstruction { line: start + 1 });
                interstitial.push_str(original);
            }
        }
        i = j;
    }
    if !interstitial.is_empty() {
        items.push(Item::Interstitial(interstitial));
    }

    // Stage ordinals: number of FROMs seen so far, clamped for anything that
    // precedes the first FROM.
    let mut from_count = 0usize;
    for ins in &mut instructions {
        if ins.keyword == Keyword::From {
            from_count += 1;
        }
        ins.stage_index = from_count.saturating_sub(1);
    }

    DockerfileAst {
        instructions,
        items,
        original_text: text.to_string(),
        issues,
        escape_char: escape,
    }
}

/// Print an AST back to text. Untouched instructions and interstitial text
/// come out byte-identical; edited instructions are re-emitted from their
/// current keyword and arguments on one line.
pub fn print_dockerfile(ast: &DockerfileAst) -> String {
    let mut out = String::with_capacity(ast.original_text.len());
    for item in &ast.items {
        match item {
            Item::Interstitial(s) => out.push_str(s),
            Item::Instruction(idx) => {
                let ins = &ast.instructions[*idx];
                for line in &ins.pending_inserts {
                    out.push_str(&ins.indent);
                    out.push_str(line);
                    out.push('\n');
                }
                if ins.dirty {
                    out.push_str(&ins.indent);
                    out.push_str(&ins.keyword_raw);
                    if !ins.raw_args.is_empty() {
                        out.push(' ');
                        out.push_str(&ins.raw_args);
                    }
                    if ins.ends_with_newline {
                        out.push('\n');
                    }
                } else {
                    out.push_str(&ins.original);
                }
            }
        }
    }
    out
}

/// Parsed FROM argument: `[--platform=..] name[:tag][@digest] [AS alias]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageRef {
    pub name: String,
    pub tag: Option<String>,
    pub digest: Option<String>,
    pub alias: Option<String>,
    pub platform: Option<String>,
}

impl ImageRef {
    /// Neither a tag nor a digest pins the image.
    pub fn is_unpinned(&self) -> bool {
        self.tag.is_none() && self.digest.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImageRefError {
    #[error("empty image name")]
    EmptyImageName,
}

/// Parse the argument text of a FROM instruction.
pub fn parse_image_ref(raw: &str) -> Result<ImageRef, ImageRefError> {
    let mut platform = None;
    let mut image_token: Option<&str> = None;
    let mut alias = None;

    let tokens: Vec<&str> = raw.split_whitespace().collect();
    let mut k = 0;
    while k < tokens.len() {
        let tok = tokens[k];
        if image_token.is_none() && tok.starts_with("--") {
            if let Some(v) = tok.strip_prefix("--platform=") {
                platform = Some(v.to_string());
            }
            k += 1;
            continue;
        }
        if image_token.is_none() {
            image_token = Some(tok);
            k += 1;
            continue;
        }
        if tok.eq_ignore_ascii_case("as") && k + 1 < tokens.len() {
            alias = Some(tokens[k + 1].to_string());
            k += 2;
            continue;
        }
        k += 1;
    }

    let token = image_token.ok_or(ImageRefError::EmptyImageName)?;
    let (repo, digest) = match token.split_once('@') {
        Some((r, d)) => (r, Some(d.to_string())),
        None => (token, None),
    };
    // A colon after the last slash separates the tag; earlier colons belong
    // to a registry port.
    let slash = repo.rfind('/').map(|p| p + 1).unwrap_or(0);
    let (name, tag) = match repo[slash..].rfind(':') {
        Some(c) => {
            let cut = slash + c;
            (&repo[..cut], Some(repo[cut + 1..].to_string()))
        }
        None => (repo, None),
    };
    if name.is_empty() {
        return Err(ImageRefError::EmptyImageName);
    }
    Ok(ImageRef {
        name: name.to_string(),
        tag,
        digest,
        alias,
        platform,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input() {
        let ast = parse_dockerfile("");
        assert!(ast.instructions().is_empty());
        assert_eq!(print_dockerfile(&ast), "");
    }

    #[test]
    fn two_instructions_one_stage() {
        let ast = parse_dockerfile("FROM ubuntu\nRUN apt-get update");
        assert_eq!(ast.instructions().len(), 2);
        assert_eq!(ast.instruction(0).keyword, Keyword::From);
        assert_eq!(ast.instruction(1).keyword, Keyword::Run);
        assert_eq!(ast.instruction(0).stage_index, 0);
        assert_eq!(ast.instruction(1).stage_index, 0);
    }

    #[test]
    fn stage_counting_with_alias() {
        let ast = parse_dockerfile("FROM a AS base\nFROM b\n");
        assert_eq!(ast.instruction(0).stage_index, 0);
        assert_eq!(ast.instruction(1).stage_index, 1);
        let r = parse_image_ref(&ast.instruction(0).raw_args).unwrap();
        assert_eq!(r.alias.as_deref(), Some("base"));
    }

    #[test]
    fn round_trip_identity() {
        let src = "FROM ubuntu\n";
        assert_eq!(print_dockerfile(&parse_dockerfile(src)), src);
    }

    #[test]
    fn round_trip_with_continuations_and_comments() {
        let src = "# header\nFROM ubuntu:20.04\n\nRUN apt-get update && \\\n    apt-get install -y \\\n    # inner comment\n    curl\n# tail\n";
        let ast = parse_dockerfile(src);
        assert_eq!(print_dockerfile(&ast), src);
        let run = ast.instruction(1);
        assert_eq!(run.span.start_line, 4);
        assert_eq!(run.span.end_line, 7);
        assert!(run.raw_args.contains("curl"));
        assert!(!run.raw_args.contains('\\'));
    }

    #[test]
    fn edited_instruction_reprints() {
        let mut ast = parse_dockerfile("FROM ubuntu\n");
        ast.set_raw_args(0, "ubuntu:20.04".to_string());
        assert_eq!(print_dockerfile(&ast), "FROM ubuntu:20.04\n");
    }

    #[test]
    fn malformed_line_collected_not_fatal() {
        let src = "FROM ubuntu\n!!bogus line\nRUN ls\n";
        let ast = parse_dockerfile(src);
        assert_eq!(ast.instructions().len(), 2);
        assert_eq!(
            ast.issues,
            vec![ParseIssue::MalformedInstruction { line: 2 }]
        );
        assert_eq!(print_dockerfile(&ast), src);
    }

    #[test]
    fn unknown_keyword_is_other() {
        let ast = parse_dockerfile("FROBNICATE xyz\n");
        assert_eq!(
            ast.instruction(0).keyword,
            Keyword::Other("FROBNICATE".to_string())
        );
    }

    #[test]
    fn escape_directive_switches_continuation() {
        let src = "# escape=`\nRUN echo a `\n    b\n";
        let ast = parse_dockerfile(src);
        assert_eq!(ast.escape_char, '`');
        assert_eq!(ast.instructions().len(), 1);
        assert_eq!(print_dockerfile(&ast), src);
    }

    #[test]
    fn image_ref_forms() {
        let r = parse_image_ref("ubuntu").unwrap();
        assert_eq!(r.name, "ubuntu");
        assert!(r.tag.is_none() && r.digest.is_none());

        let r = parse_image_ref("ubuntu:20.04 AS builder").unwrap();
        assert_eq!(r.tag.as_deref(), Some("20.04"));
        assert_eq!(r.alias.as_deref(), Some("builder"));

        let r = parse_image_ref("img@sha256:abc").unwrap();
        assert_eq!(r.digest.as_deref(), Some("sha256:abc"));
        assert!(r.tag.is_none());

        let r = parse_image_ref("registry.example:5000/team/app").unwrap();
        assert_eq!(r.name, "registry.example:5000/team/app");
        assert!(r.tag.is_none());

        let r = parse_image_ref("--platform=linux/amd64 alpine:3.14").unwrap();
        assert_eq!(r.platform.as_deref(), Some("linux/amd64"));
        assert_eq!(r.tag.as_deref(), Some("3.14"));

        assert_eq!(parse_image_ref(""), Err(ImageRefError::EmptyImageName));
    }

    #[test]
    fn insert_line_before_shares_indent() {
        let mut ast = parse_dockerfile("FROM ubuntu:20.04\n    RUN cd /app && make\n");
        ast.insert_line_before(1, "WORKDIR /app".to_string());
        ast.set_raw_args(1, "make".to_string());
        assert_eq!(
            print_dockerfile(&ast),
            "FROM ubuntu:20.04\n    WORKDIR /app\n    RUN make\n"
        );
    }
}
