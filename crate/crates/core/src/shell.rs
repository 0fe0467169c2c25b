//! Minimal shell model for RUN payloads.
//!
//! This is deliberately not a POSIX grammar: the detection rules only need
//! command heads, flags, package words, and pipe presence. Commands are split
//! on unquoted, top-level connectors; subshells and command substitutions stay
//! opaque single words.

use serde_json;

/// Connector between two commands in a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connector {
    AndIf,
    OrIf,
    Semicolon,
    Pipe,
    Newline,
}

impl Connector {
    pub fn as_str(&self) -> &'static str {
        match self {
            Connector::AndIf => "&&",
            Connector::OrIf => "||",
            Connector::Semicolon => ";",
            Connector::Pipe => "|",
            Connector::Newline => "\n",
        }
    }
}

/// One word of a command, quotes folded. `raw` mirrors the original text so
/// callers can rewrite the payload without disturbing quoting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    pub text: String,
    pub raw: String,
    pub has_expansion: bool,
    /// Byte range within the RUN raw_args.
    pub start: usize,
    pub end: usize,
}

/// A command: whitespace-tokenized words, no expansion performed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleCommand {
    pub words: Vec<Word>,
    /// Exact substring of the payload this command came from, including
    /// surrounding whitespace.
    pub raw: String,
    /// Byte offset of `raw` within the payload.
    pub start: usize,
}

impl SimpleCommand {
    /// Command head after skipping leading `NAME=value` assignments.
    pub fn head(&self) -> Option<&str> {
        self.words
            .iter()
            .map(|w| w.text.as_str())
            .find(|w| !is_env_assignment(w))
    }
}

fn is_env_assignment(word: &str) -> bool {
    match word.split_once('=') {
        Some((name, _)) => {
            !name.is_empty()
                && name
                    .chars()
                    .enumerate()
                    .all(|(i, c)| c == '_' || c.is_ascii_alphabetic() || (i > 0 && c.is_ascii_digit()))
        }
        None => false,
    }
}

/// Parsed RUN payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandChain {
    pub commands: Vec<SimpleCommand>,
    pub connectors: Vec<Connector>,
    pub exec_form: bool,
    /// Set when a quote never closed; rules treat such chains conservatively.
    pub unbalanced_quote: bool,
}

impl CommandChain {
    pub fn has_pipe(&self) -> bool {
        self.connectors.contains(&Connector::Pipe)
    }

    /// Rebuild the original payload from raw mirrors and connectors.
    pub fn reassemble(&self) -> String {
        let mut out = String::new();
        for (i, cmd) in self.commands.iter().enumerate() {
            out.push_str(&cmd.raw);
            if i < self.connectors.len() {
                out.push_str(self.connectors[i].as_str());
            }
        }
        out
    }
}

/// Parse the argument text of a RUN instruction, shell form or JSON exec form.
pub fn parse_run_payload(raw_args: &str) -> CommandChain {
    if raw_args.trim_start().starts_with('[') {
        if let Ok(argv) = serde_json::from_str::<Vec<String>>(raw_args.trim()) {
            let words = argv
                .into_iter()
                .map(|w| Word {
                    has_expansion: w.contains('$'),
                    raw: w.clone(),
                    text: w,
                    start: 0,
                    end: 0,
                })
                .collect::<Vec<_>>();
            let commands = if words.is_empty() {
                Vec::new()
            } else {
                vec![SimpleCommand {
                    words,
                    raw: raw_args.to_string(),
                    start: 0,
                }]
            };
            return CommandChain {
                commands,
                connectors: Vec::new(),
                exec_form: true,
                unbalanced_quote: false,
            };
        }
    }
    parse_shell_form(raw_args)
}

struct Scanner<'a> {
    bytes: &'a [u8],
    pos: usize,
    in_single: bool,
    in_double: bool,
    in_backtick: bool,
    paren_depth: usize,
}

impl<'a> Scanner<'a> {
    fn new(s: &'a str) -> Self {
        Scanner {
            bytes: s.as_bytes(),
            pos: 0,
            in_single: false,
            in_double: false,
            in_backtick: false,
            paren_depth: 0,
        }
    }

    fn quoted_or_nested(&self) -> bool {
        self.in_single || self.in_double || self.in_backtick || self.paren_depth > 0
    }

    /// Advance one byte, updating quote/nesting state. Returns the byte.
    fn step(&mut self) -> u8 {
        let b = self.bytes[self.pos];
        match b {
            b'\\' if !self.in_single => {
                // Escaped character: consume both bytes.
                self.pos += 2.min(self.bytes.len() - self.pos);
                return b;
            }
            b'\'' if !self.in_double => self.in_single = !self.in_single,
            b'"' if !self.in_single => self.in_double = !self.in_double,
            b'`' if !self.in_single => self.in_backtick = !self.in_backtick,
            b'(' if !self.in_single && !self.in_double => self.paren_depth += 1,
            b')' if !self.in_single && !self.in_double => {
                self.paren_depth = self.paren_depth.saturating_sub(1)
            }
            _ => {}
        }
        self.pos += 1;
        b
    }
}

fn parse_shell_form(raw_args: &str) -> CommandChain {
    // First pass: find top-level connector positions.
    let mut boundaries: Vec<(usize, usize, Connector)> = Vec::new(); // (start, end, op)
    let mut sc = Scanner::new(raw_args);
    while sc.pos < sc.bytes.len() {
        if !sc.quoted_or_nested() {
            let rest = &raw_args[sc.pos..];
            if rest.starts_with("&&") {
                boundaries.push((sc.pos, sc.pos + 2, Connector::AndIf));
                sc.pos += 2;
                continue;
            }
            if rest.starts_with("||") {
                boundaries.push((sc.pos, sc.pos + 2, Connector::OrIf));
                sc.pos += 2;
                continue;
            }
            if rest.starts_with(';') {
                boundaries.push((sc.pos, sc.pos + 1, Connector::Semicolon));
                sc.pos += 1;
                continue;
            }
            if rest.starts_with('|') {
                boundaries.push((sc.pos, sc.pos + 1, Connector::Pipe));
                sc.pos += 1;
                continue;
            }
            if rest.starts_with('\n') {
                boundaries.push((sc.pos, sc.pos + 1, Connector::Newline));
                sc.pos += 1;
                continue;
            }
        }
        sc.step();
    }
    let unbalanced = sc.in_single || sc.in_double;

    let mut commands = Vec::new();
    let mut connectors = Vec::new();
    let mut seg_start = 0;
    for (op_start, op_end, op) in boundaries {
        commands.push(make_command(raw_args, seg_start, op_start));
        connectors.push(op);
        seg_start = op_end;
    }
    commands.push(make_command(raw_args, seg_start, raw_args.len()));

    // An all-whitespace payload keeps its single wordless command so
    // reassembly stays byte-exact; `head()` is None for it.
    CommandChain {
        commands,
        connectors,
        exec_form: false,
        unbalanced_quote: unbalanced,
    }
}

fn make_command(raw_args: &str, start: usize, end: usize) -> SimpleCommand {
    let raw = &raw_args[start..end];
    let mut words = Vec::new();
    let mut sc = Scanner::new(raw);
    let mut word_start: Option<usize> = None;
    loop {
        let at_end = sc.pos >= sc.bytes.len();
        let boundary = at_end
            || (!sc.quoted_or_nested() && (sc.bytes[sc.pos] as char).is_ascii_whitespace());
        if boundary {
            if let Some(ws) = word_start.take() {
                let raw_word = &raw[ws..sc.pos];
                words.push(Word {
                    text: fold_quotes(raw_word),
                    raw: raw_word.to_string(),
                    has_expansion: raw_word.contains('$'),
                    start: start + ws,
                    end: start + sc.pos,
                });
            }
            if at_end {
                break;
            }
            sc.pos += 1;
        } else {
            if word_start.is_none() {
                word_start = Some(sc.pos);
            }
            sc.step();
        }
    }
    SimpleCommand {
        words,
        raw: raw.to_string(),
        start,
    }
}

/// Remove outer quote characters without performing any expansion.
fn fold_quotes(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.chars().peekable();
    let mut in_single = false;
    let mut in_double = false;
    while let Some(c) = chars.next() {
        match c {
            '\'' if !in_double => in_single = !in_single,
            '"' if !in_single => in_double = !in_double,
            '\\' if !in_single => {
                if let Some(&n) = chars.peek() {
                    out.push(n);
                    chars.next();
                }
            }
            _ => out.push(c),
        }
    }
    out
}
