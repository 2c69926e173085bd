//! `cnarg`: corpus checks, statistics, agreement, baselines and
//! counter-narrative scaffolds for annotated hate-speech tweets.
//!
//! The primary report goes to stdout and diagnostics to stderr. Exit codes:
//! 0 success, 1 validation failure, 2 usage or IO error, 3 malformed corpus,
//! 4 training failure.

mod config;
mod output;

use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use cnarg_core::agreement::{agreement_report, render_table, AgreementOptions};
use cnarg_core::corpus::{
    corpus_hash, load_corpus, write_corpus_dir, write_jsonl, CorpusConfig, CorpusError,
};
use cnarg_core::experiments::{
    emit_report, run_seed, run_task, ExperimentError, Grid, Task, TaskSpec,
};
use cnarg_core::linear::EmbeddingTable;
use cnarg_core::scaffold::{scaffold_corpus, TemplateSet};
use cnarg_core::scheme::{corpus_stats, validate_corpus, AnnotatedTweet, Severity};
use cnarg_core::tokens::TokenizerOptions;
use serde::Serialize;

use config::{CliConfig, Suite};
use output::OutputDir;

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_CORPUS: u8 = 3;
pub const EXIT_TRAINING: u8 = 4;

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Failure {
        let code = match e {
            CorpusError::Io { .. } | CorpusError::NotADirectory(_) => EXIT_USAGE,
            _ => EXIT_CORPUS,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Failure {
        let code = match e {
            ExperimentError::UnknownTask(_)
            | ExperimentError::MissingEmbeddings(_)
            | ExperimentError::EmptyGrid
            | ExperimentError::NoSeeds => EXIT_USAGE,
            ExperimentError::CorpusTooSmall(_) => EXIT_CORPUS,
            ExperimentError::Train { .. } | ExperimentError::Feature { .. } => EXIT_TRAINING,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cnarg",
    version,
    about = "Argument-structure annotation toolkit for hate-speech tweets"
)]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Corpus: a directory of .txt/.ann pairs or a .jsonl file.
    #[arg(long, global = true, env = "CNARG_CORPUS_ROOT")]
    corpus: Option<PathBuf>,
    /// TOML file with label, attribute and language-directory names.
    #[arg(long, global = true)]
    corpus_config: Option<PathBuf>,
    /// Output directory for artifacts and the manifest.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    /// More diagnostics on stderr (repeat for more).
    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Read a corpus and write it out as JSON lines (and optionally standoff files).
    Ingest(IngestArgs),
    /// Check every tweet against the annotation scheme.
    Validate,
    /// Corpus statistics per language.
    Stats(StatsArgs),
    /// Inter-annotator agreement between two annotations of the same tweets.
    Agreement(AgreementArgs),
    /// Fit one task per seed and save the selected models.
    Train(ExperimentArgs),
    /// Run the evaluation protocol and print the results table.
    Eval(ExperimentArgs),
    /// Draft counter-narrative scaffolds from the annotated components.
    Scaffold(ScaffoldArgs),
}

#[derive(Debug, Args, Serialize)]
struct IngestArgs {
    /// Also write the corpus back as standoff files.
    #[arg(long)]
    standoff: bool,
}

#[derive(Debug, Args, Serialize)]
struct StatsArgs {
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args, Serialize)]
struct AgreementArgs {
    /// Annotation A (reference side for precision and recall).
    #[arg(long)]
    a: PathBuf,
    /// Annotation B.
    #[arg(long)]
    b: PathBuf,
    /// Score the two pivot sides separately.
    #[arg(long)]
    split_pivot: bool,
    /// Print JSON instead of the table.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args, Serialize)]
struct ExperimentArgs {
    /// Task keys (arg, justification, conclusion, type_just, type_conc,
    /// collective, property, pivot). Defaults to all.
    #[arg(long, value_delimiter = ',')]
    tasks: Vec<String>,
    /// lr or lr_embed.
    #[arg(long)]
    family: Option<String>,
    #[arg(long, value_enum)]
    suite: Option<Suite>,
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    /// Values of C searched on dev.
    #[arg(long, value_delimiter = ',', conflicts_with = "reference_grid")]
    grid: Vec<f64>,
    /// Use the published best C per task instead of searching.
    #[arg(long)]
    reference_grid: bool,
    /// Context window (tokens on each side) for token tasks.
    #[arg(long)]
    window: Option<usize>,
    /// Drop punctuation tokens.
    #[arg(long)]
    no_punct: bool,
    /// Word vectors in text format (header line `count dim`).
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Print JSON instead of the table.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args, Serialize)]
struct ScaffoldArgs {
    /// TOML file with the six scaffold templates.
    #[arg(long)]
    templates: Option<PathBuf>,
    /// Print JSON lines instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Serialize)]
struct Snapshot<'a, A: Serialize> {
    config: &'a CliConfig,
    args: &'a A,
}

/// Effective configuration and the inputs every command may need.
struct Env {
    cfg: CliConfig,
}

impl Env {
    fn new(cli: &Cli) -> Result<Env, Failure> {
        let mut cfg = match &cli.config {
            Some(p) => CliConfig::load(p)?,
            None => CliConfig::default(),
        };
        if cli.corpus.is_some() {
            cfg.corpus = cli.corpus.clone();
        }
        if cli.corpus_config.is_some() {
            cfg.corpus_config = cli.corpus_config.clone();
        }
        if cli.out.is_some() {
            cfg.out = cli.out.clone();
        }
        Ok(Env { cfg })
    }

    fn corpus_config(&self) -> Result<CorpusConfig, Failure> {
        match &self.cfg.corpus_config {
            None => Ok(CorpusConfig::default()),
            Some(p) => {
                let src = fs::read_to_string(p)
                    .map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?;
                CorpusConfig::from_toml(&src)
                    .map_err(|e| Failure::usage(format!("{}: {e}", p.display())))
            }
        }
    }

    fn corpus_path(&self) -> Result<&Path, Failure> {
        let p = self.cfg.corpus.as_deref().ok_or_else(|| {
            Failure::usage("no corpus given (use --corpus, the config file or CNARG_CORPUS_ROOT)")
        })?;
        if !p.exists() {
            return Err(Failure::usage(format!("{} does not exist", p.display())));
        }
        Ok(p)
    }

    fn load(&self, path: &Path) -> Result<Vec<AnnotatedTweet>, Failure> {
        let corpus = load_corpus(path, &self.corpus_config()?)?;
        log::info!("loaded {} tweets from {}", corpus.len(), path.display());
        Ok(corpus)
    }

    fn corpus(&self) -> Result<(Vec<AnnotatedTweet>, BTreeMap<String, String>), Failure> {
        let path = self.corpus_path()?;
        let corpus = self.load(path)?;
        let mut inputs = BTreeMap::new();
        inputs.insert("corpus".to_owned(), corpus_hash(path)?);
        Ok((corpus, inputs))
    }

    fn out(&self) -> Result<Option<OutputDir>, Failure> {
        self.cfg.out.as_deref().map(OutputDir::create).transpose()
    }
}

fn commit<A: Serialize>(
    out: Option<OutputDir>,
    command: &str,
    env: &Env,
    args: &A,
    inputs: BTreeMap<String, String>,
) -> Result<(), Failure> {
    if let Some(o) = out {
        let dir = o.commit(
            command,
            &Snapshot {
                config: &env.cfg,
                args,
            },
            inputs,
        )?;
        log::info!("artifacts in {}", dir.display());
    }
    Ok(())
}

fn write(out: &mut Option<OutputDir>, rel: &str, contents: &str) -> Result<(), Failure> {
    match out {
        Some(o) => o.write(rel, contents.as_bytes()),
        None => Ok(()),
    }
}

fn ingest(env: &Env, args: &IngestArgs) -> Result<u8, Failure> {
    let (corpus, inputs) = env.corpus()?;
    let mut out = env
        .out()?
        .ok_or_else(|| Failure::usage("ingest needs an output directory (--out)"))?;
    let jsonl = out.staging().join("corpus.jsonl");
    write_jsonl(&jsonl, &corpus)?;
    out.record("corpus.jsonl")?;
    if args.standoff {
        write_corpus_dir(
            &out.staging().join("standoff"),
            &corpus,
            &env.corpus_config()?.mapping,
        )?;
        out.record("standoff")?;
    }
    let issues = validate_corpus(&corpus);
    let errors = issues
        .iter()
        .filter(|i| i.severity == Severity::Error)
        .count();
    println!(
        "{} tweets ingested, {} validation errors",
        corpus.len(),
        errors
    );
    commit(Some(out), "ingest", env, args, inputs)?;
    Ok(0)
}

fn validation(env: &Env) -> Result<u8, Failure> {
    let (corpus, inputs) = env.corpus()?;
    let issues = validate_corpus(&corpus);
    let mut report = String::new();
    for i in &issues {
        report.push_str(&i.to_string());
        report.push('\n');
    }
    print!("{report}");
    let errors = issues
        .iter()
        .filter(|i| i.severity == Severity::Error)
        .count();
    eprintln!(
        "{} tweets, {} errors, {} warnings",
        corpus.len(),
        errors,
        issues.len() - errors
    );
    let mut out = env.out()?;
    write(&mut out, "validation.tsv", &report)?;
    commit(out, "validate", env, &(), inputs)?;
    Ok(if errors > 0 { EXIT_VALIDATION } else { 0 })
}

fn stats(env: &Env, args: &StatsArgs) -> Result<u8, Failure> {
    let (corpus, inputs) = env.corpus()?;
    let report = corpus_stats(&corpus);
    let (text, json) = (report.to_text(), report.to_json());
    print!(
        "{}",
        if args.json {
            format!("{json}\n")
        } else {
            text.clone()
        }
    );
    let mut out = env.out()?;
    write(&mut out, "stats.txt", &text)?;
    write(&mut out, "stats.json", &json)?;
    commit(out, "stats", env, args, inputs)?;
    Ok(0)
}

fn agreement(env: &mut Env, args: &AgreementArgs) -> Result<u8, Failure> {
    if args.split_pivot {
        env.cfg.agreement.merge_pivot = false;
    }
    for p in [&args.a, &args.b] {
        if !p.exists() {
            return Err(Failure::usage(format!("{} does not exist", p.display())));
        }
    }
    let a = env.load(&args.a)?;
    let b = env.load(&args.b)?;
    let opts = AgreementOptions {
        tokenizer: TokenizerOptions::default(),
        merge_pivot: env.cfg.agreement.merge_pivot,
    };
    let report = agreement_report(&a, &b, opts).map_err(|e| Failure {
        code: EXIT_CORPUS,
        message: e.to_string(),
    })?;
    let table = render_table(&report, None);
    let json = report.to_json();
    print!(
        "{}",
        if args.json {
            format!("{json}\n")
        } else {
            table.clone()
        }
    );
    let mut inputs = BTreeMap::new();
    inputs.insert("a".to_owned(), corpus_hash(&args.a)?);
    inputs.insert("b".to_owned(), corpus_hash(&args.b)?);
    let mut out = env.out()?;
    write(&mut out, "agreement.txt", &table)?;
    write(&mut out, "agreement.json", &json)?;
    commit(out, "agreement", env, args, inputs)?;
    Ok(0)
}

fn apply_experiment_flags(env: &mut Env, args: &ExperimentArgs) {
    let e = &mut env.cfg.experiment;
    if !args.tasks.is_empty() {
        e.tasks = args.tasks.clone();
    }
    if let Some(f) = &args.family {
        e.family = f.clone();
    }
    if let Some(s) = args.suite {
        e.suite = s;
    }
    if !args.seeds.is_empty() {
        e.settings.seeds = args.seeds.clone();
    }
    if !args.grid.is_empty() {
        e.settings.grid = Grid::Search(args.grid.clone());
    }
    if args.reference_grid {
        e.settings.grid = Grid::Reference;
    }
    if let Some(w) = args.window {
        e.settings.window = w;
    }
    if args.no_punct {
        e.settings.include_punct = false;
    }
    if args.embeddings.is_some() {
        env.cfg.embeddings = args.embeddings.clone();
    }
}

fn specs(tasks: &[Task], suite: Suite) -> Vec<TaskSpec> {
    let conditioned = |t: &Task| !t.default_conditioning().is_empty();
    match suite {
        Suite::Baseline => tasks.iter().map(|&t| TaskSpec::new(t)).collect(),
        Suite::Conditioned => tasks
            .iter()
            .filter(|t| conditioned(t))
            .map(|&t| TaskSpec::conditioned(t))
            .collect(),
        Suite::Paired => tasks
            .iter()
            .flat_map(|&t| {
                let mut v = vec![TaskSpec::new(t)];
                if conditioned(&t) {
                    v.push(TaskSpec::conditioned(t));
                }
                v
            })
            .collect(),
    }
}

fn embeddings(
    env: &Env,
    inputs: &mut BTreeMap<String, String>,
) -> Result<Option<Arc<EmbeddingTable>>, Failure> {
    let Some(p) = &env.cfg.embeddings else {
        return Ok(None);
    };
    let f = fs::File::open(p).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?;
    let table = EmbeddingTable::read_text(BufReader::new(f)).map_err(|e| Failure {
        code: EXIT_CORPUS,
        message: format!("{}: {e}", p.display()),
    })?;
    inputs.insert("embeddings".to_owned(), corpus_hash(p)?);
    Ok(Some(Arc::new(table)))
}

fn spec_name(s: &TaskSpec) -> String {
    if s.conditioning.is_empty() {
        s.task.key().to_owned()
    } else {
        format!("{}-conditioned", s.task.key())
    }
}

fn train(env: &mut Env, args: &ExperimentArgs) -> Result<u8, Failure> {
    apply_experiment_flags(env, args);
    let family = env.cfg.family()?;
    let specs = specs(&env.cfg.tasks()?, env.cfg.experiment.suite);
    let (corpus, mut inputs) = env.corpus()?;
    let emb = embeddings(env, &mut inputs)?;
    let settings = &env.cfg.experiment.settings;
    let mut out = env.out()?;
    let mut records = Vec::new();
    for spec in &specs {
        for &seed in &settings.seeds {
            let o = run_seed(&corpus, spec, family, settings, emb.as_ref(), seed)?;
            let name = spec_name(spec);
            println!(
                "{name}\tseed {seed}\tC={}\ttest F1 {:.4}\titerations {}{}",
                o.record.selected_c,
                o.record.test.f1,
                o.record.iterations,
                if o.record.converged {
                    ""
                } else {
                    " (not converged)"
                }
            );
            write(
                &mut out,
                &format!("models/{name}-seed{seed}.json"),
                &o.model.to_json(),
            )?;
            records.push(serde_json::json!({ "spec": spec, "family": family, "run": o.record }));
        }
    }
    write(
        &mut out,
        "runs.json",
        &serde_json::to_string_pretty(&records).expect("records serialize"),
    )?;
    commit(out, "train", env, args, inputs)?;
    Ok(0)
}

fn eval(env: &mut Env, args: &ExperimentArgs) -> Result<u8, Failure> {
    apply_experiment_flags(env, args);
    let family = env.cfg.family()?;
    let specs = specs(&env.cfg.tasks()?, env.cfg.experiment.suite);
    let (corpus, mut inputs) = env.corpus()?;
    let emb = embeddings(env, &mut inputs)?;
    let settings = &env.cfg.experiment.settings;
    let results = specs
        .iter()
        .map(|s| run_task(&corpus, s, family, settings, emb.as_ref()))
        .collect::<Result<Vec<_>, _>>()?;
    let (text, json) = emit_report(&results);
    print!(
        "{}",
        if args.json {
            format!("{json}\n")
        } else {
            text.clone()
        }
    );
    let mut out = env.out()?;
    write(&mut out, "report.txt", &text)?;
    write(&mut out, "report.json", &json)?;
    commit(out, "eval", env, args, inputs)?;
    Ok(0)
}

fn scaffold(env: &mut Env, args: &ScaffoldArgs) -> Result<u8, Failure> {
    if args.templates.is_some() {
        env.cfg.scaffold.templates = args.templates.clone();
    }
    let (corpus, mut inputs) = env.corpus()?;
    let templates = match &env.cfg.scaffold.templates {
        None => TemplateSet::default(),
        Some(p) => {
            let src = fs::read_to_string(p)
                .map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?;
            inputs.insert("templates".to_owned(), output::sha256_hex(src.as_bytes()));
            TemplateSet::from_toml(&src)
                .map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?
        }
    };
    let drafted = scaffold_corpus(&corpus, &templates);
    for w in &drafted.warnings {
        log::warn!("{w}");
    }
    let (text, jsonl) = (drafted.to_text(&corpus), drafted.to_jsonl());
    print!("{}", if args.json { &jsonl } else { &text });
    let mut out = env.out()?;
    write(&mut out, "scaffolds.txt", &text)?;
    write(&mut out, "scaffolds.jsonl", &jsonl)?;
    commit(out, "scaffold", env, args, inputs)?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let mut env = Env::new(&cli)?;
    match &cli.command {
        Command::Ingest(a) => ingest(&env, a),
        Command::Validate => validation(&env),
        Command::Stats(a) => stats(&env, a),
        Command::Agreement(a) => agreement(&mut env, a),
        Command::Train(a) => train(&mut env, a),
        Command::Eval(a) => eval(&mut env, a),
        Command::Scaffold(a) => scaffold(&mut env, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
