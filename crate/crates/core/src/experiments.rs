//! Evaluation protocol for the detection baselines: seeded splits, grid
//! search on the dev split, test scores averaged over seeds.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agreement::{binary_prf, cell, macro_prf, Prf};
use crate::linear::{
    build_vocab, predict, train_logreg, EmbeddingTable, FeatureConfig, FeatureError, Featurizer,
    ModelFile, SparseMatrix, SparseVec, TrainConfig, TrainError,
};
use crate::scheme::{AnnotatedTweet, ComponentKind};
use crate::tokens::{overlap_labels, to_dataset, tokenize_with, Category, TokenizerOptions};

const REFERENCE_HYPERPARAMS: &str = include_str!("../configs/reference_hyperparams.toml");

/// The grid of inverse regularization strengths searched on dev.
pub const DEFAULT_GRID: [f64; 4] = [1.0, 0.1, 0.2, 0.5];
pub const DEFAULT_SEEDS: [u64; 3] = [1, 2, 3];

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("corpus has {0} tweets, at least 10 are needed for a split")]
    CorpusTooSmall(usize),
    #[error("task {task}, seed {seed}, C={c}: {source}")]
    Train {
        task: Task,
        seed: u64,
        c: f64,
        #[source]
        source: TrainError,
    },
    #[error("task {task}: {source}")]
    Feature {
        task: Task,
        #[source]
        source: FeatureError,
    },
    #[error("model family {0} needs an embedding table")]
    MissingEmbeddings(ModelFamily),
    #[error("unknown task '{0}'")]
    UnknownTask(String),
    #[error("empty hyperparameter grid")]
    EmptyGrid,
    #[error("no seeds given")]
    NoSeeds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Task {
    ArgVsNonArg,
    Justification,
    Conclusion,
    TypeJust,
    TypeConc,
    Collective,
    Property,
    Pivot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Granularity {
    Tweet,
    Token,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    /// F1 of the positive class.
    TargetF1,
    MacroF1,
}

impl Task {
    /// Report order.
    pub const ALL: [Task; 8] = [
        Task::ArgVsNonArg,
        Task::Justification,
        Task::Conclusion,
        Task::TypeJust,
        Task::TypeConc,
        Task::Collective,
        Task::Property,
        Task::Pivot,
    ];

    /// Tasks that have a conditioned variant.
    pub const CONDITIONED: [Task; 4] = [
        Task::TypeJust,
        Task::TypeConc,
        Task::Collective,
        Task::Pivot,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Task::ArgVsNonArg => "arg",
            Task::Justification => "justification",
            Task::Conclusion => "conclusion",
            Task::TypeJust => "type_just",
            Task::TypeConc => "type_conc",
            Task::Collective => "collective",
            Task::Property => "property",
            Task::Pivot => "pivot",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Task::ArgVsNonArg => "Arg./Non-Arg.",
            Task::Justification => "Justification",
            Task::Conclusion => "Conclusion",
            Task::TypeJust => "Type of Just.",
            Task::TypeConc => "Type of Conc.",
            Task::Collective => "Collective",
            Task::Property => "Property",
            Task::Pivot => "Pivot",
        }
    }

    pub fn from_key(s: &str) -> Result<Task, ExperimentError> {
        Task::ALL
            .into_iter()
            .find(|t| t.key() == s)
            .ok_or_else(|| ExperimentError::UnknownTask(s.to_owned()))
    }

    pub fn granularity(self) -> Granularity {
        match self {
            Task::ArgVsNonArg | Task::TypeJust | Task::TypeConc => Granularity::Tweet,
            _ => Granularity::Token,
        }
    }

    pub fn metric(self) -> Metric {
        match self {
            Task::TypeJust | Task::TypeConc => Metric::MacroF1,
            _ => Metric::TargetF1,
        }
    }

    pub fn n_classes(self) -> usize {
        match self.metric() {
            Metric::MacroF1 => 3,
            Metric::TargetF1 => 2,
        }
    }

    /// Components an annotator already knows when labelling this one.
    pub fn default_conditioning(self) -> &'static [ComponentKind] {
        match self {
            Task::Collective => &[ComponentKind::Property],
            Task::Pivot | Task::TypeJust | Task::TypeConc => {
                &[ComponentKind::Justification, ComponentKind::Conclusion]
            }
            _ => &[],
        }
    }

    fn category(self) -> Option<Category> {
        match self {
            Task::Justification => Some(Category::Justification),
            Task::Conclusion => Some(Category::Conclusion),
            Task::Collective => Some(Category::Collective),
            Task::Property => Some(Category::Property),
            Task::Pivot => Some(Category::Pivot),
            _ => None,
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task: Task,
    /// Gold components given to the model as features.
    pub conditioning: Vec<ComponentKind>,
}

impl TaskSpec {
    pub fn new(task: Task) -> Self {
        TaskSpec {
            task,
            conditioning: Vec::new(),
        }
    }

    pub fn conditioned(task: Task) -> Self {
        TaskSpec {
            task,
            conditioning: task.default_conditioning().to_vec(),
        }
    }

    fn normalized_conditioning(&self) -> Vec<ComponentKind> {
        let mut c = self.conditioning.clone();
        c.sort();
        c.dedup();
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelFamily {
    LrBow,
    LrEmbed,
}

impl ModelFamily {
    pub fn label(self) -> &'static str {
        match self {
            ModelFamily::LrBow => "LR",
            ModelFamily::LrEmbed => "LR w/embed",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            ModelFamily::LrBow => "lr",
            ModelFamily::LrEmbed => "lr_embed",
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grid {
    /// Select C on dev among these values.
    Search(Vec<f64>),
    /// Use the published best C per task, falling back to the default grid
    /// where none is listed.
    Reference,
}

/// Published best C per family and task.
pub fn reference_hyperparams() -> BTreeMap<String, BTreeMap<String, f64>> {
    toml::from_str(REFERENCE_HYPERPARAMS).expect("bundled hyperparameter table parses")
}

impl Grid {
    fn values(&self, spec: &TaskSpec, family: ModelFamily) -> Vec<f64> {
        match self {
            Grid::Search(v) => v.clone(),
            Grid::Reference => {
                let table = reference_hyperparams();
                let mut section = family.key().to_owned();
                if !spec.conditioning.is_empty() {
                    section.push_str("_conditioned");
                }
                table
                    .get(&section)
                    .or_else(|| table.get(family.key()))
                    .and_then(|s| s.get(spec.task.key()))
                    .map(|&c| vec![c])
                    .unwrap_or_else(|| DEFAULT_GRID.to_vec())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSettings {
    pub grid: Grid,
    pub seeds: Vec<u64>,
    pub include_punct: bool,
    pub window: usize,
    pub min_count: usize,
    pub train: TrainConfig,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        ExperimentSettings {
            grid: Grid::Search(DEFAULT_GRID.to_vec()),
            seeds: DEFAULT_SEEDS.to_vec(),
            include_punct: true,
            window: 2,
            min_count: 1,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub seed: u64,
    /// Indices into the corpus.
    pub train: Vec<usize>,
    pub dev: Vec<usize>,
    pub test: Vec<usize>,
}

/// Train/dev/test sizes: 770/100/100 for 970 tweets, otherwise
/// 79/10.5/10.5 percent with largest-remainder rounding (ties go to
/// train, then dev).
pub fn split_sizes(n: usize) -> (usize, usize, usize) {
    if n == 970 {
        return (770, 100, 100);
    }
    let parts = [790usize, 105, 105];
    let quotas: Vec<(usize, usize)> = parts.iter().map(|p| (n * p / 1000, n * p % 1000)).collect();
    let mut sizes: Vec<usize> = quotas.iter().map(|q| q.0).collect();
    let mut left = n - sizes.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| quotas[b].1.cmp(&quotas[a].1).then(a.cmp(&b)));
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        sizes[i] += 1;
        left -= 1;
    }
    (sizes[0], sizes[1], sizes[2])
}

/// Shuffles the corpus (ordered by tweet id first, so input order does not
/// matter) with a seeded generator and cuts it into train/dev/test.
pub fn make_splits(corpus: &[AnnotatedTweet], seed: u64) -> Result<Split, ExperimentError> {
    let n = corpus.len();
    if n < 10 {
        return Err(ExperimentError::CorpusTooSmall(n));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| corpus[a].id().cmp(corpus[b].id()));
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (tr, dv, _) = split_sizes(n);
    let test = idx.split_off(tr + dv);
    let dev = idx.split_off(tr);
    Ok(Split {
        seed,
        train: idx,
        dev,
        test,
    })
}

/// One training unit: a whole tweet or a tweet's token sequence.
#[derive(Debug, Clone)]
enum Unit {
    Tweet {
        id: String,
        tokens: Vec<String>,
        conditioned: Vec<Vec<String>>,
        label: usize,
    },
    Tokens {
        tokens: Vec<String>,
        indicators: Vec<Vec<u8>>,
        labels: Vec<usize>,
    },
}

impl Unit {
    fn tokens(&self) -> &[String] {
        match self {
            Unit::Tweet { tokens, .. } | Unit::Tokens { tokens, .. } => tokens,
        }
    }
}

/// Units per corpus tweet; `None` for tweets the task does not use.
fn prepare(
    corpus: &[AnnotatedTweet],
    spec: &TaskSpec,
    opts: TokenizerOptions,
) -> Vec<Option<Unit>> {
    let cond = spec.normalized_conditioning();
    match spec.task.category() {
        Some(category) => corpus
            .iter()
            .map(|t| {
                if !t.argumentative {
                    return None;
                }
                let mut ds = to_dataset(std::slice::from_ref(t), category, &cond, opts);
                let item = ds.items.pop()?;
                Some(Unit::Tokens {
                    tokens: item.tokens,
                    indicators: item.indicators,
                    labels: item.labels.into_iter().map(usize::from).collect(),
                })
            })
            .collect(),
        None => corpus
            .iter()
            .map(|t| {
                let label = match spec.task {
                    Task::ArgVsNonArg => usize::from(!t.argumentative),
                    Task::TypeJust if t.argumentative => t.justification_type?.index(),
                    Task::TypeConc if t.argumentative => t.conclusion_type?.index(),
                    _ => return None,
                };
                let tok = tokenize_with(&t.doc, opts);
                let conditioned = cond
                    .iter()
                    .map(|k| {
                        let inside = overlap_labels(&tok.tokens, &t.fragments_of(&[*k]));
                        tok.tokens
                            .iter()
                            .zip(inside)
                            .filter(|(_, on)| *on != 0)
                            .map(|(x, _)| x.surface.clone())
                            .collect()
                    })
                    .collect();
                Some(Unit::Tweet {
                    id: t.id().to_owned(),
                    tokens: tok.tokens.into_iter().map(|x| x.surface).collect(),
                    conditioned,
                    label,
                })
            })
            .collect(),
    }
}

fn featurize(
    f: &Featurizer,
    units: &[&Unit],
) -> Result<(Vec<SparseVec>, Vec<usize>), FeatureError> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for u in units {
        match u {
            Unit::Tweet {
                id,
                tokens,
                conditioned,
                label,
            } => {
                rows.push(f.tweet_features(id, tokens, conditioned)?);
                labels.push(*label);
            }
            Unit::Tokens {
                tokens,
                indicators,
                labels: l,
            } => {
                for i in 0..tokens.len() {
                    rows.push(f.token_features(tokens, indicators, i)?);
                }
                labels.extend_from_slice(l);
            }
        }
    }
    Ok((rows, labels))
}

fn score(metric: Metric, truth: &[usize], pred: &[usize]) -> Prf {
    match metric {
        Metric::TargetF1 => binary_prf(truth, pred),
        Metric::MacroF1 => macro_prf(truth, pred),
    }
}

/// One seed of one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub selected_c: f64,
    /// Dev score for every C tried, in grid order.
    pub dev_scores: Vec<(f64, f64)>,
    pub test: Prf,
    pub n_train: usize,
    pub n_dev: usize,
    pub n_test: usize,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub task: Task,
    pub family: ModelFamily,
    pub conditioning: Vec<ComponentKind>,
    pub metric: Metric,
    pub mean_f1: f64,
    /// Population standard deviation over runs.
    pub std_f1: f64,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub runs: Vec<RunRecord>,
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

fn population_std(xs: &[f64]) -> f64 {
    let m = mean(xs);
    mean(&xs.iter().map(|x| (x - m) * (x - m)).collect::<Vec<_>>()).sqrt()
}

impl ExperimentResult {
    pub fn from_runs(spec: &TaskSpec, family: ModelFamily, runs: Vec<RunRecord>) -> Self {
        let f1: Vec<f64> = runs.iter().map(|r| r.test.f1).collect();
        let p: Vec<f64> = runs.iter().map(|r| r.test.precision).collect();
        let r: Vec<f64> = runs.iter().map(|r| r.test.recall).collect();
        ExperimentResult {
            task: spec.task,
            family,
            conditioning: spec.normalized_conditioning(),
            metric: spec.task.metric(),
            mean_f1: mean(&f1),
            std_f1: population_std(&f1),
            mean_precision: mean(&p),
            mean_recall: mean(&r),
            runs,
        }
    }
}

/// Everything a single seed produces, including the selected model.
#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub record: RunRecord,
    pub model: ModelFile,
}

fn embeddings_for(
    family: ModelFamily,
    embeddings: Option<&Arc<EmbeddingTable>>,
) -> Result<Option<Arc<EmbeddingTable>>, ExperimentError> {
    match family {
        ModelFamily::LrBow => Ok(None),
        ModelFamily::LrEmbed => embeddings
            .cloned()
            .map(Some)
            .ok_or(ExperimentError::MissingEmbeddings(family)),
    }
}

/// Split with `seed`, build the vocabulary from train, fit one model per
/// grid value, keep the best on dev and score it on test. Test tweets are
/// only touched after selection.
pub fn run_seed(
    corpus: &[AnnotatedTweet],
    spec: &TaskSpec,
    family: ModelFamily,
    settings: &ExperimentSettings,
    embeddings: Option<&Arc<EmbeddingTable>>,
    seed: u64,
) -> Result<SeedOutcome, ExperimentError> {
    let emb = embeddings_for(family, embeddings)?;
    let units = prepare(
        corpus,
        spec,
        TokenizerOptions {
            include_punct: settings.include_punct,
        },
    );
    run_seed_prepared(corpus, &units, spec, family, settings, emb, seed)
}

fn run_seed_prepared(
    corpus: &[AnnotatedTweet],
    units: &[Option<Unit>],
    spec: &TaskSpec,
    family: ModelFamily,
    settings: &ExperimentSettings,
    emb: Option<Arc<EmbeddingTable>>,
    seed: u64,
) -> Result<SeedOutcome, ExperimentError> {
    let task = spec.task;
    let grid = settings.grid.values(spec, family);
    if grid.is_empty() {
        return Err(ExperimentError::EmptyGrid);
    }
    let split = make_splits(corpus, seed)?;
    let pick =
        |idx: &[usize]| -> Vec<&Unit> { idx.iter().filter_map(|&i| units[i].as_ref()).collect() };
    let (train_u, dev_u) = (pick(&split.train), pick(&split.dev));

    let vocab = build_vocab(
        train_u
            .iter()
            .flat_map(|u| u.tokens().iter().map(String::as_str)),
        settings.min_count,
    );
    let config = FeatureConfig {
        window: settings.window,
        n_conditioning: spec.normalized_conditioning().len(),
        embedding_dim: 0,
    };
    let feat_err = |source| ExperimentError::Feature { task, source };
    let featurizer = Featurizer::new(vocab, config, emb).map_err(feat_err)?;
    let dim = match task.granularity() {
        Granularity::Token => featurizer.token_dim(),
        Granularity::Tweet => featurizer.tweet_dim(),
    };
    let (train_rows, train_y) = featurize(&featurizer, &train_u).map_err(feat_err)?;
    let (dev_rows, dev_y) = featurize(&featurizer, &dev_u).map_err(feat_err)?;
    let x_train = SparseMatrix::from_rows(&train_rows, dim);
    let n_classes = task.n_classes();

    let fitted = grid
        .par_iter()
        .map(|&c| {
            let cfg = TrainConfig {
                reg_inverse: c,
                ..settings.train
            };
            let (model, report) =
                train_logreg(&x_train, &train_y, n_classes, &cfg).map_err(|source| {
                    ExperimentError::Train {
                        task,
                        seed,
                        c,
                        source,
                    }
                })?;
            let pred = predict_all(&model, &dev_rows).map_err(|source| ExperimentError::Train {
                task,
                seed,
                c,
                source,
            })?;
            let dev = score(task.metric(), &dev_y, &pred).f1;
            Ok((c, dev, model, report))
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;

    let mut best = 0;
    for (i, f) in fitted.iter().enumerate() {
        if f.1 > fitted[best].1 {
            best = i;
        }
    }
    let dev_scores = fitted.iter().map(|f| (f.0, f.1)).collect();
    let (c, _, model, report) = fitted.into_iter().nth(best).expect("grid not empty");

    let test_u = pick(&split.test);
    let (test_rows, test_y) = featurize(&featurizer, &test_u).map_err(feat_err)?;
    let pred = predict_all(&model, &test_rows).map_err(|source| ExperimentError::Train {
        task,
        seed,
        c,
        source,
    })?;
    let record = RunRecord {
        seed,
        selected_c: c,
        dev_scores,
        test: score(task.metric(), &test_y, &pred),
        n_train: train_u.len(),
        n_dev: dev_u.len(),
        n_test: test_u.len(),
        iterations: report.iterations,
        converged: report.converged,
    };
    let model = ModelFile::new(
        task.key(),
        featurizer.vocab().clone(),
        featurizer.config(),
        model,
    );
    Ok(SeedOutcome { record, model })
}

fn predict_all(
    model: &crate::linear::LogRegModel,
    rows: &[SparseVec],
) -> Result<Vec<usize>, TrainError> {
    rows.iter()
        .map(|r| predict(model, r).map(|p| p.label))
        .collect()
}

/// Runs every seed of `settings` (in parallel) and aggregates.
pub fn run_task(
    corpus: &[AnnotatedTweet],
    spec: &TaskSpec,
    family: ModelFamily,
    settings: &ExperimentSettings,
    embeddings: Option<&Arc<EmbeddingTable>>,
) -> Result<ExperimentResult, ExperimentError> {
    if settings.seeds.is_empty() {
        return Err(ExperimentError::NoSeeds);
    }
    let emb = embeddings_for(family, embeddings)?;
    let units = prepare(
        corpus,
        spec,
        TokenizerOptions {
            include_punct: settings.include_punct,
        },
    );
    let runs = settings
        .seeds
        .par_iter()
        .map(|&seed| {
            run_seed_prepared(corpus, &units, spec, family, settings, emb.clone(), seed)
                .map(|o| o.record)
        })
        .collect::<Result<Vec<_>, _>>()?;
    log::info!("{} {} done", spec.task, family);
    Ok(ExperimentResult::from_runs(spec, family, runs))
}

/// All eight tasks without conditioning.
pub fn run_baseline_suite(
    corpus: &[AnnotatedTweet],
    family: ModelFamily,
    settings: &ExperimentSettings,
    embeddings: Option<&Arc<EmbeddingTable>>,
) -> Result<Vec<ExperimentResult>, ExperimentError> {
    Task::ALL
        .par_iter()
        .map(|&t| run_task(corpus, &TaskSpec::new(t), family, settings, embeddings))
        .collect()
}

/// The four conditioned tasks, each followed by its unconditioned twin.
pub fn run_conditioned_suite(
    corpus: &[AnnotatedTweet],
    family: ModelFamily,
    settings: &ExperimentSettings,
    embeddings: Option<&Arc<EmbeddingTable>>,
) -> Result<Vec<ExperimentResult>, ExperimentError> {
    let specs: Vec<TaskSpec> = Task::CONDITIONED
        .iter()
        .flat_map(|&t| [TaskSpec::new(t), TaskSpec::conditioned(t)])
        .collect();
    specs
        .par_iter()
        .map(|s| run_task(corpus, s, family, settings, embeddings))
        .collect()
}

fn sort_key(r: &ExperimentResult) -> (Task, bool, ModelFamily, Vec<ComponentKind>) {
    (
        r.task,
        !r.conditioning.is_empty(),
        r.family,
        r.conditioning.clone(),
    )
}

/// Text table (task order, unconditioned before conditioned) and its JSON
/// twin.
pub fn emit_report(results: &[ExperimentResult]) -> (String, String) {
    let mut rows: Vec<&ExperimentResult> = results.iter().collect();
    rows.sort_by_key(|r| sort_key(r));

    let mut text = String::new();
    let _ = writeln!(
        text,
        "{:<14} {:<11} {:<26} {:>9} {:>5} {:>5}  C per run",
        "task", "model", "conditioning", "F1", "Pr", "Rec"
    );
    for r in &rows {
        let cond = if r.conditioning.is_empty() {
            "-".to_owned()
        } else {
            r.conditioning
                .iter()
                .map(|k| k.name())
                .collect::<Vec<_>>()
                .join("+")
        };
        let cs: Vec<String> = r.runs.iter().map(|x| format!("{}", x.selected_c)).collect();
        let _ = writeln!(
            text,
            "{:<14} {:<11} {:<26} {:>9} {:>5} {:>5}  {}",
            r.task.label(),
            r.family.label(),
            cond,
            format!("{}±{}", cell(r.mean_f1), cell(r.std_f1)),
            cell(r.mean_precision),
            cell(r.mean_recall),
            cs.join(",")
        );
    }
    let owned: Vec<&ExperimentResult> = rows;
    let json = serde_json::to_string_pretty(&owned).expect("results serialize");
    (text, json)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{generate, SyntheticConfig};

    #[test]
    fn split_sizes_by_largest_remainder() {
        assert_eq!(split_sizes(970), (770, 100, 100));
        assert_eq!(split_sizes(20), (16, 2, 2));
        assert_eq!(split_sizes(10), (8, 1, 1));
        assert_eq!(split_sizes(100), (79, 11, 10));
        for n in 10..500 {
            let (a, b, c) = split_sizes(n);
            assert_eq!(a + b + c, n);
        }
    }

    #[test]
    fn splits_are_disjoint_and_deterministic() {
        let corpus = generate(&SyntheticConfig {
            n_tweets: 57,
            ..SyntheticConfig::default()
        });
        let s = make_splits(&corpus, 1).unwrap();
        assert_eq!(s, make_splits(&corpus, 1).unwrap());
        assert_ne!(s, make_splits(&corpus, 2).unwrap());
        let mut all: Vec<usize> = s
            .train
            .iter()
            .chain(&s.dev)
            .chain(&s.test)
            .copied()
            .collect();
        all.sort();
        assert_eq!(all, (0..57).collect::<Vec<_>>());

        // input order does not matter
        let mut rev = corpus.clone();
        rev.reverse();
        let r = make_splits(&rev, 1).unwrap();
        let ids = |c: &[AnnotatedTweet], idx: &[usize]| {
            let mut v: Vec<String> = idx.iter().map(|&i| c[i].id().to_owned()).collect();
            v.sort();
            v
        };
        assert_eq!(ids(&corpus, &s.test), ids(&rev, &r.test));
    }

    #[test]
    fn too_small() {
        let corpus = generate(&SyntheticConfig {
            n_tweets: 9,
            ..SyntheticConfig::default()
        });
        assert!(matches!(
            make_splits(&corpus, 1),
            Err(ExperimentError::CorpusTooSmall(9))
        ));
    }

    #[test]
    fn population_std_of_runs() {
        assert_eq!(population_std(&[0.5, 0.5, 0.5]), 0.0);
        // mean 0.5, deviations -0.1, 0, 0.1 -> sqrt(0.02/3)
        assert!((population_std(&[0.4, 0.5, 0.6]) - (0.02f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn reference_table_loads() {
        let t = reference_hyperparams();
        assert_eq!(t["lr"]["conclusion"], 0.1);
        assert_eq!(t["lr_embed_conditioned"]["pivot"], 0.2);
        let spec = TaskSpec::conditioned(Task::Pivot);
        assert_eq!(
            Grid::Reference.values(&spec, ModelFamily::LrEmbed),
            vec![0.2]
        );
        // no conditioned LR row: fall back to the unconditioned LR value
        assert_eq!(Grid::Reference.values(&spec, ModelFamily::LrBow), vec![1.0]);
    }

    #[test]
    fn task_keys_round_trip() {
        for t in Task::ALL {
            assert_eq!(Task::from_key(t.key()).unwrap(), t);
        }
        assert!(Task::from_key("nope").is_err());
    }

    #[test]
    fn empty_report_is_header_only() {
        let (text, json) = emit_report(&[]);
        assert_eq!(text.lines().count(), 1);
        assert_eq!(json, "[]");
    }

    #[test]
    fn embed_family_needs_table() {
        let corpus = generate(&SyntheticConfig::default());
        let r = run_task(
            &corpus,
            &TaskSpec::new(Task::Justification),
            ModelFamily::LrEmbed,
            &ExperimentSettings::default(),
            None,
        );
        assert!(matches!(r, Err(ExperimentError::MissingEmbeddings(_))));
    }
}
