//! `dockerdoctor`: lint Dockerfiles, apply rule-based fixes, mine smell
//! histories, and prepare the pull-request study inputs.
//!
//! Exit codes are the machine contract: `lint` exits 1 iff any finding,
//! `fix` exits 1 iff any fix was refused, usage errors exit 64, I/O errors
//! exit 74.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};

use dockerdoctor_core::fix::{fix_all, render_patch_with_path, FixContext, FixStatus};
use dockerdoctor_core::history::{load_manifest, summarize};
use dockerdoctor_core::resolve::{PackageIndexSnapshot, RegistrySnapshot};
use dockerdoctor_core::rules::{lint, FileReport, RuleId};
use dockerdoctor_core::study::{
    filter_candidates, load_candidates, stratified_sample, write_candidates, PrDraft,
};
use dockerdoctor_core::{parse_dockerfile, print_dockerfile};

const EXIT_USAGE: u8 = 64;
const EXIT_IO: u8 = 74;

#[derive(Parser)]
#[command(name = "dockerdoctor", version, about = "Dockerfile smell detector and fixer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct FixtureArgs {
    /// Directory holding registry.jsonl and apt.jsonl. Defaults to
    /// $DOCKERDOCTOR_FIXTURES.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Registry snapshot path; overrides the fixture directory.
    #[arg(long)]
    registry_fixture: Option<PathBuf>,
    /// Package index snapshot path; overrides the fixture directory.
    #[arg(long)]
    apt_fixture: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Report smells in one or more Dockerfiles.
    Lint {
        paths: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Restrict to a comma-separated rule subset (e.g. DL3006,DL4000).
        #[arg(long, value_delimiter = ',')]
        rules: Vec<RuleId>,
    },
    /// Fix smells; prints unified diffs unless --write is given.
    Fix {
        paths: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        rules: Vec<RuleId>,
        /// Rewrite the files in place instead of printing diffs.
        #[arg(long)]
        write: bool,
        /// Version-selection cutoff date (YYYY-MM-DD); defaults to each
        /// file's modification time.
        #[arg(long)]
        last_modified_override: Option<NaiveDate>,
        #[command(flatten)]
        fixtures: FixtureArgs,
    },
    /// Mine a history manifest into survival.csv and events.jsonl.
    History {
        manifest: PathBuf,
        /// Output directory for survival.csv and events.jsonl.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Filter and stratified-sample fix candidates from CSV.
    Sample {
        input: PathBuf,
        #[arg(long)]
        total: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Reference date for the activity window (YYYY-MM-DD).
        #[arg(long)]
        today: NaiveDate,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write PR draft files ({repo_id}-{rule}.md plus .patch) for a file's
    /// fixable smells.
    PrDraft {
        path: PathBuf,
        #[arg(long)]
        repo_id: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long, value_delimiter = ',')]
        rules: Vec<RuleId>,
        #[arg(long)]
        last_modified_override: Option<NaiveDate>,
        #[command(flatten)]
        fixtures: FixtureArgs,
    },
}

enum CliError {
    Usage(String),
    Io(String),
}

impl CliError {
    fn report(self) -> ExitCode {
        match self {
            CliError::Usage(msg) => {
                eprintln!("dockerdoctor: {msg}");
                ExitCode::from(EXIT_USAGE)
            }
            CliError::Io(msg) => {
                eprintln!("dockerdoctor: {msg}");
                ExitCode::from(EXIT_IO)
            }
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn rule_set(rules: &[RuleId]) -> BTreeSet<RuleId> {
    if rules.is_empty() {
        RuleId::ALL.into_iter().collect()
    } else {
        rules.iter().copied().collect()
    }
}

fn load_fixtures(
    args: &FixtureArgs,
    rules: &BTreeSet<RuleId>,
) -> Result<(RegistrySnapshot, PackageIndexSnapshot), CliError> {
    let dir = args
        .fixtures
        .clone()
        .or_else(|| std::env::var_os("DOCKERDOCTOR_FIXTURES").map(PathBuf::from));
    let registry_path = args
        .registry_fixture
        .clone()
        .or_else(|| dir.as_ref().map(|d| d.join("registry.jsonl")));
    let apt_path = args
        .apt_fixture
        .clone()
        .or_else(|| dir.as_ref().map(|d| d.join("apt.jsonl")));

    let needs = rules.contains(&RuleId::Dl3006) || rules.contains(&RuleId::Dl3008);
    match (registry_path, apt_path) {
        (Some(r), Some(a)) => Ok((
            RegistrySnapshot::load_jsonl(&r)
                .map_err(|e| CliError::Io(format!("{}: {e}", r.display())))?,
            PackageIndexSnapshot::load_jsonl(&a)
                .map_err(|e| CliError::Io(format!("{}: {e}", a.display())))?,
        )),
        _ if needs => Err(CliError::Usage(
            "DL3006/DL3008 fixes need --fixtures (or DOCKERDOCTOR_FIXTURES)".into(),
        )),
        _ => Ok((RegistrySnapshot::default(), PackageIndexSnapshot::default())),
    }
}

fn mtime_date(path: &Path) -> Result<NaiveDate, CliError> {
    let meta = std::fs::metadata(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let modified = meta
        .modified()
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(chrono::DateTime::<chrono::Utc>::from(modified).date_naive())
}

/// Run `work` on every path concurrently, returning outputs in input order.
fn for_each_file<T: Send>(
    paths: &[PathBuf],
    work: impl Fn(&Path) -> Result<T, CliError> + Sync,
) -> Vec<Result<T, CliError>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = paths
            .iter()
            .map(|p| scope.spawn(|| work(p)))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    })
}

fn run_lint(paths: &[PathBuf], format: Format, rules: &[RuleId]) -> Result<ExitCode, CliError> {
    if paths.is_empty() {
        return Err(CliError::Usage("lint needs at least one path".into()));
    }
    let selected = rule_set(rules);
    let reports = for_each_file(paths, |path| {
        let text = read_file(path)?;
        let findings: Vec<_> = lint(&parse_dockerfile(&text))
            .into_iter()
            .filter(|f| selected.contains(&f.rule))
            .collect();
        Ok(FileReport::new(&path.display().to_string(), &findings))
    });
    let mut any_finding = false;
    let mut collected = Vec::new();
    for report in reports {
        let report = report?;
        any_finding |= !report.findings.is_empty();
        collected.push(report);
    }
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&collected).unwrap()),
        Format::Text => {
            for report in &collected {
                for f in &report.findings {
                    println!("{}:{}: {} {}", report.path, f.line, f.rule.as_str(), f.message);
                }
            }
        }
    }
    Ok(ExitCode::from(u8::from(any_finding)))
}

#[allow(clippy::too_many_arguments)]
fn run_fix(
    paths: &[PathBuf],
    rules: &[RuleId],
    write: bool,
    last_modified_override: Option<NaiveDate>,
    fixtures: &FixtureArgs,
) -> Result<ExitCode, CliError> {
    if paths.is_empty() {
        return Err(CliError::Usage("fix needs at least one path".into()));
    }
    let selected = rule_set(rules);
    let (registry, apt) = load_fixtures(fixtures, &selected)?;
    let results = for_each_file(paths, |path| {
        let text = read_file(path)?;
        let last_modified = match last_modified_override {
            Some(d) => d,
            None => mtime_date(path)?,
        };
        let ctx = FixContext {
            last_modified,
            registry: &registry,
            apt_index: &apt,
        };
        let before = parse_dockerfile(&text);
        let (after, outcomes) = fix_all(&before, &ctx, &selected);
        let diff = render_patch_with_path(&before, &after, &path.display().to_string());
        Ok((path.to_path_buf(), print_dockerfile(&after), diff, outcomes))
    });

    let mut any_refused = false;
    for result in results {
        let (path, fixed_text, diff, outcomes) = result?;
        if write {
            std::fs::write(&path, &fixed_text)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        } else if !diff.is_empty() {
            print!("{diff}");
        }
        for o in &outcomes {
            match o.status {
                FixStatus::Fixed => {
                    eprintln!("{}:{}: fixed {}", path.display(), o.line, o.rule.as_str())
                }
                FixStatus::Refused => {
                    any_refused = true;
                    eprintln!(
                        "{}:{}: refused {} ({})",
                        path.display(),
                        o.line,
                        o.rule.as_str(),
                        serde_json::to_value(o.refusal_reason)
                            .unwrap()
                            .as_str()
                            .unwrap_or("unknown")
                    );
                }
            }
        }
    }
    Ok(ExitCode::from(u8::from(any_refused)))
}

fn run_history(manifest: &Path, out_dir: &Path) -> Result<ExitCode, CliError> {
    let file = std::fs::File::open(manifest)
        .map_err(|e| CliError::Io(format!("{}: {e}", manifest.display())))?;
    let histories =
        load_manifest(file).map_err(|e| CliError::Io(format!("{}: {e}", manifest.display())))?;
    let report = summarize(&histories);
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    let csv_path = out_dir.join("survival.csv");
    std::fs::write(&csv_path, report.to_csv())
        .map_err(|e| CliError::Io(format!("{}: {e}", csv_path.display())))?;
    let events_path = out_dir.join("events.jsonl");
    std::fs::write(&events_path, report.events_jsonl())
        .map_err(|e| CliError::Io(format!("{}: {e}", events_path.display())))?;
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    eprintln!(
        "wrote {} and {} ({} events)",
        csv_path.display(),
        events_path.display(),
        report.events.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn run_sample(
    input: &Path,
    total: usize,
    seed: u64,
    today: NaiveDate,
    output: Option<&Path>,
) -> Result<ExitCode, CliError> {
    let file =
        std::fs::File::open(input).map_err(|e| CliError::Io(format!("{}: {e}", input.display())))?;
    let records =
        load_candidates(file).map_err(|e| CliError::Io(format!("{}: {e}", input.display())))?;
    let eligible = filter_candidates(&records, today);
    let sample = stratified_sample(&eligible, total, seed)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    match output {
        Some(path) => {
            let out = std::fs::File::create(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            write_candidates(out, &sample)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        }
        None => {
            write_candidates(std::io::stdout(), &sample)
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_pr_draft(
    path: &Path,
    repo_id: &str,
    out_dir: &Path,
    rules: &[RuleId],
    last_modified_override: Option<NaiveDate>,
    fixtures: &FixtureArgs,
) -> Result<ExitCode, CliError> {
    let selected = rule_set(rules);
    let (registry, apt) = load_fixtures(fixtures, &selected)?;
    let text = read_file(path)?;
    let last_modified = match last_modified_override {
        Some(d) => d,
        None => mtime_date(path)?,
    };
    let ctx = FixContext {
        last_modified,
        registry: &registry,
        apt_index: &apt,
    };
    let before = parse_dockerfile(&text);
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    // One draft per rule so each PR stays a single-smell change.
    let mut written = 0;
    for rule in &selected {
        let only: BTreeSet<RuleId> = BTreeSet::from([*rule]);
        let (after, outcomes) = fix_all(&before, &ctx, &only);
        if !outcomes.iter().any(|o| o.status == FixStatus::Fixed) {
            continue;
        }
        let patch = render_patch_with_path(&before, &after, &path.display().to_string());
        if patch.is_empty() {
            continue;
        }
        let draft = PrDraft::new(&path.display().to_string(), *rule, patch)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let safe_repo = repo_id.replace('/', "_");
        let stem = format!("{safe_repo}-{}", rule.as_str());
        let md_path = out_dir.join(format!("{stem}.md"));
        let patch_path = out_dir.join(format!("{stem}.patch"));
        std::fs::write(&md_path, format!("# {}\n\n{}", draft.title, draft.body))
            .map_err(|e| CliError::Io(format!("{}: {e}", md_path.display())))?;
        std::fs::write(&patch_path, &draft.patch)
            .map_err(|e| CliError::Io(format!("{}: {e}", patch_path.display())))?;
        written += 1;
        eprintln!("wrote {} and {}", md_path.display(), patch_path.display());
    }
    if written == 0 {
        eprintln!("no fixable smells in {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            eprint!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
        Err(e) => {
            // --help / --version.
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let result = match &cli.command {
        Command::Lint { paths, format, rules } => run_lint(paths, *format, rules),
        Command::Fix {
            paths,
            rules,
            write,
            last_modified_override,
            fixtures,
        } => run_fix(paths, rules, *write, *last_modified_override, fixtures),
        Command::History { manifest, out_dir } => run_history(manifest, out_dir),
        Command::Sample {
            input,
            total,
            seed,
            today,
            output,
        } => run_sample(input, *total, *seed, *today, output.as_deref()),
        Command::PrDraft {
            path,
            repo_id,
            out_dir,
            rules,
            last_modified_override,
            fixtures,
        } => run_pr_draft(path, repo_id, out_dir, rules, *last_modified_override, fixtures),
    };
    match result {
        Ok(code) => code,
        Err(e) => e.report(),
    }
}
