//! Inter-annotator agreement: Cohen's kappa and precision/recall/F1.
//!
//! Span categories are compared per word, pooling every token of every
//! tweet into a single contingency table. Argumentativeness is compared
//! per tweet, and the two proposition-type categories per tweet over
//! three classes, restricted to tweets that both sides marked
//! argumentative and typed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scheme::{AnnotatedTweet, PropositionType};
use crate::tokens::{overlap_labels, tokenize_with, Category, TokenizerOptions};

#[derive(Debug, Error, PartialEq)]
pub enum AgreementError {
    #[error("label sequences differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("label sequences are empty")]
    EmptyPair,
    #[error("the two corpora cover different tweets: {0}")]
    TweetSetMismatch(String),
    #[error("tweet {0} has different text on the two sides")]
    TextMismatch(String),
}

/// Two annotations of the same items; labels are class indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSequencePair {
    pub category: String,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

impl LabelSequencePair {
    pub fn new(category: impl Into<String>, a: Vec<usize>, b: Vec<usize>) -> Self {
        LabelSequencePair {
            category: category.into(),
            a,
            b,
        }
    }

    fn check(&self) -> Result<(), AgreementError> {
        if self.a.len() != self.b.len() {
            return Err(AgreementError::LengthMismatch(self.a.len(), self.b.len()));
        }
        if self.a.is_empty() {
            return Err(AgreementError::EmptyPair);
        }
        Ok(())
    }
}

/// Cohen's kappa with marginal-product chance agreement. Perfect observed
/// agreement scores 1 even when both sides are constant.
pub fn cohen_kappa(pair: &LabelSequencePair) -> Result<f64, AgreementError> {
    pair.check()?;
    let n = pair.a.len() as f64;
    let agree = pair.a.iter().zip(&pair.b).filter(|(x, y)| x == y).count();
    if agree == pair.a.len() {
        return Ok(1.0);
    }
    let p_o = agree as f64 / n;
    let mut count_a: BTreeMap<usize, usize> = BTreeMap::new();
    let mut count_b: BTreeMap<usize, usize> = BTreeMap::new();
    for (&x, &y) in pair.a.iter().zip(&pair.b) {
        *count_a.entry(x).or_default() += 1;
        *count_b.entry(y).or_default() += 1;
    }
    let p_e: f64 = count_a
        .iter()
        .map(|(k, &ca)| {
            let cb = count_b.get(k).copied().unwrap_or(0);
            (ca as f64 / n) * (cb as f64 / n)
        })
        .sum();
    Ok((p_o - p_e) / (1.0 - p_e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TruthSide {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision, recall and F1 of the positive class (label 1). When neither
/// side has a positive the two agree fully and all three are 1.
pub fn binary_prf(truth: &[usize], pred: &[usize]) -> Prf {
    let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
    for (&t, &p) in truth.iter().zip(pred) {
        match (t == 1, p == 1) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fneg += 1,
            (false, false) => {}
        }
    }
    if tp + fp + fneg == 0 {
        return Prf {
            precision: 1.0,
            recall: 1.0,
            f1: 1.0,
        };
    }
    prf_from_counts(tp, fp, fneg)
}

fn prf_from_counts(tp: usize, fp: usize, fneg: usize) -> Prf {
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fneg);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Prf {
        precision,
        recall,
        f1,
    }
}

/// Macro average over the classes present on either side. Per-class
/// precision/recall with a zero denominator count as 0.
pub fn macro_prf(truth: &[usize], pred: &[usize]) -> Prf {
    let classes: BTreeSet<usize> = truth.iter().chain(pred).copied().collect();
    if classes.is_empty() {
        return Prf {
            precision: 1.0,
            recall: 1.0,
            f1: 1.0,
        };
    }
    let mut sum = Prf {
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
    };
    for &c in &classes {
        let (mut tp, mut fp, mut fneg) = (0, 0, 0);
        for (&t, &p) in truth.iter().zip(pred) {
            match (t == c, p == c) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fneg += 1,
                (false, false) => {}
            }
        }
        let r = prf_from_counts(tp, fp, fneg);
        sum.precision += r.precision;
        sum.recall += r.recall;
        sum.f1 += r.f1;
    }
    let k = classes.len() as f64;
    Prf {
        precision: sum.precision / k,
        recall: sum.recall / k,
        f1: sum.f1 / k,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Averaging {
    /// F1 of label 1.
    Binary,
    Macro,
}

pub fn pairwise_f1(
    pair: &LabelSequencePair,
    truth_side: TruthSide,
    averaging: Averaging,
) -> Result<Prf, AgreementError> {
    if pair.a.len() != pair.b.len() {
        return Err(AgreementError::LengthMismatch(pair.a.len(), pair.b.len()));
    }
    let (truth, pred) = match truth_side {
        TruthSide::A => (&pair.a, &pair.b),
        TruthSide::B => (&pair.b, &pair.a),
    };
    Ok(match averaging {
        Averaging::Binary => binary_prf(truth, pred),
        Averaging::Macro => macro_prf(truth, pred),
    })
}

/// Overlap-tolerant span F1: a run of positive labels on one side counts as
/// matched when it shares at least one item with a run on the other side.
/// Not used for the main agreement table.
pub fn soft_span_f1(truth: &[usize], pred: &[usize]) -> Result<Prf, AgreementError> {
    if truth.len() != pred.len() {
        return Err(AgreementError::LengthMismatch(truth.len(), pred.len()));
    }
    let runs = |v: &[usize]| {
        let mut out = Vec::new();
        let mut i = 0;
        while i < v.len() {
            if v[i] == 1 {
                let s = i;
                while i < v.len() && v[i] == 1 {
                    i += 1;
                }
                out.push((s, i));
            } else {
                i += 1;
            }
        }
        out
    };
    let rt = runs(truth);
    let rp = runs(pred);
    if rt.is_empty() && rp.is_empty() {
        return Ok(Prf {
            precision: 1.0,
            recall: 1.0,
            f1: 1.0,
        });
    }
    let hit = |x: &(usize, usize), others: &[(usize, usize)]| {
        others.iter().any(|y| x.0 < y.1 && y.0 < x.1)
    };
    let matched_pred = rp.iter().filter(|r| hit(r, &rt)).count();
    let matched_truth = rt.iter().filter(|r| hit(r, &rp)).count();
    let precision = if rp.is_empty() {
        0.0
    } else {
        matched_pred as f64 / rp.len() as f64
    };
    let recall = if rt.is_empty() {
        0.0
    } else {
        matched_truth as f64 / rt.len() as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(Prf {
        precision,
        recall,
        f1,
    })
}

/// Rows of the agreement table, in display order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AgreementCategory {
    Collective,
    Property,
    Pivot,
    PivotJustificationSide,
    PivotConclusionSide,
    Justification,
    Conclusion,
    Argumentative,
    TypeOfConclusion,
    TypeOfJustification,
}

impl AgreementCategory {
    pub fn label(self) -> &'static str {
        match self {
            AgreementCategory::Collective => "Collect.",
            AgreementCategory::Property => "Prop.",
            AgreementCategory::Pivot => "Pivot",
            AgreementCategory::PivotJustificationSide => "Pivot-J",
            AgreementCategory::PivotConclusionSide => "Pivot-C",
            AgreementCategory::Justification => "Justif.",
            AgreementCategory::Conclusion => "Conc.",
            AgreementCategory::Argumentative => "Arg.",
            AgreementCategory::TypeOfConclusion => "Type Conc.",
            AgreementCategory::TypeOfJustification => "Type Just.",
        }
    }

    fn from_span(c: Category) -> Self {
        match c {
            Category::Collective => AgreementCategory::Collective,
            Category::Property => AgreementCategory::Property,
            Category::Pivot => AgreementCategory::Pivot,
            Category::PivotJustificationSide => AgreementCategory::PivotJustificationSide,
            Category::PivotConclusionSide => AgreementCategory::PivotConclusionSide,
            Category::Justification => AgreementCategory::Justification,
            Category::Conclusion => AgreementCategory::Conclusion,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementRow {
    pub category: AgreementCategory,
    pub kappa: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub n_items: usize,
    /// Class counts on side A and side B (index = class).
    pub marginals_a: Vec<usize>,
    pub marginals_b: Vec<usize>,
    /// Tweets left out of a type row because the sides disagree on
    /// argumentativeness or a type is missing.
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub rows: Vec<AgreementRow>,
}

impl AgreementReport {
    pub fn row(&self, c: AgreementCategory) -> Option<&AgreementRow> {
        self.rows.iter().find(|r| r.category == c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialize")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgreementOptions {
    pub tokenizer: TokenizerOptions,
    pub merge_pivot: bool,
}

impl Default for AgreementOptions {
    fn default() -> Self {
        AgreementOptions {
            tokenizer: TokenizerOptions::default(),
            merge_pivot: true,
        }
    }
}

fn marginals(v: &[usize], classes: usize) -> Vec<usize> {
    let mut m = vec![0; classes];
    for &x in v {
        if x >= m.len() {
            m.resize(x + 1, 0);
        }
        m[x] += 1;
    }
    m
}

fn row_for(
    category: AgreementCategory,
    a: Vec<usize>,
    b: Vec<usize>,
    classes: usize,
    averaging: Averaging,
    excluded: usize,
) -> AgreementRow {
    let n = a.len();
    let marginals_a = marginals(&a, classes);
    let marginals_b = marginals(&b, classes);
    if n == 0 {
        return AgreementRow {
            category,
            kappa: f64::NAN,
            precision: f64::NAN,
            recall: f64::NAN,
            f1: f64::NAN,
            n_items: 0,
            marginals_a,
            marginals_b,
            excluded,
        };
    }
    let pair = LabelSequencePair::new(category.label(), a, b);
    let kappa = cohen_kappa(&pair).expect("checked lengths");
    let prf = pairwise_f1(&pair, TruthSide::A, averaging).expect("checked lengths");
    AgreementRow {
        category,
        kappa,
        precision: prf.precision,
        recall: prf.recall,
        f1: prf.f1,
        n_items: n,
        marginals_a,
        marginals_b,
        excluded,
    }
}

/// Compares two annotations of the same tweets (side A is the reference
/// for precision and recall). Side B may be model output.
pub fn agreement_report(
    corpus_a: &[AnnotatedTweet],
    corpus_b: &[AnnotatedTweet],
    opts: AgreementOptions,
) -> Result<AgreementReport, AgreementError> {
    let by_id_b: BTreeMap<&str, &AnnotatedTweet> = corpus_b.iter().map(|t| (t.id(), t)).collect();
    let ids_a: BTreeSet<&str> = corpus_a.iter().map(|t| t.id()).collect();
    let ids_b: BTreeSet<&str> = by_id_b.keys().copied().collect();
    if ids_a != ids_b || ids_a.len() != corpus_a.len() || ids_b.len() != corpus_b.len() {
        let only_a: Vec<&str> = ids_a.difference(&ids_b).copied().collect();
        let only_b: Vec<&str> = ids_b.difference(&ids_a).copied().collect();
        return Err(AgreementError::TweetSetMismatch(format!(
            "only in A: {only_a:?}; only in B: {only_b:?}"
        )));
    }
    let mut pairs: Vec<(&AnnotatedTweet, &AnnotatedTweet)> =
        corpus_a.iter().map(|a| (a, by_id_b[a.id()])).collect();
    pairs.sort_by(|x, y| x.0.id().cmp(y.0.id()));
    for (a, b) in &pairs {
        if a.doc.text() != b.doc.text() {
            return Err(AgreementError::TextMismatch(a.id().to_owned()));
        }
    }

    let mut rows = Vec::new();
    for cat in Category::span_categories(opts.merge_pivot) {
        let (mut la, mut lb) = (Vec::new(), Vec::new());
        for (a, b) in &pairs {
            let tokens = tokenize_with(&a.doc, opts.tokenizer).tokens;
            la.extend(
                overlap_labels(&tokens, &a.fragments_of(cat.kinds()))
                    .into_iter()
                    .map(usize::from),
            );
            lb.extend(
                overlap_labels(&tokens, &b.fragments_of(cat.kinds()))
                    .into_iter()
                    .map(usize::from),
            );
        }
        rows.push(row_for(
            AgreementCategory::from_span(cat),
            la,
            lb,
            2,
            Averaging::Binary,
            0,
        ));
    }

    let la = pairs
        .iter()
        .map(|(a, _)| usize::from(a.argumentative))
        .collect();
    let lb = pairs
        .iter()
        .map(|(_, b)| usize::from(b.argumentative))
        .collect();
    rows.push(row_for(
        AgreementCategory::Argumentative,
        la,
        lb,
        2,
        Averaging::Binary,
        0,
    ));

    type TypeOf = fn(&AnnotatedTweet) -> Option<PropositionType>;
    let type_rows: [(AgreementCategory, TypeOf); 2] = [
        (AgreementCategory::TypeOfConclusion, |t| t.conclusion_type),
        (AgreementCategory::TypeOfJustification, |t| {
            t.justification_type
        }),
    ];
    for (cat, get) in type_rows {
        let (mut la, mut lb) = (Vec::new(), Vec::new());
        let mut excluded = 0;
        for (a, b) in &pairs {
            if !(a.argumentative || b.argumentative) {
                continue;
            }
            match (a.argumentative && b.argumentative, get(a), get(b)) {
                (true, Some(x), Some(y)) => {
                    la.push(x.index());
                    lb.push(y.index());
                }
                _ => excluded += 1,
            }
        }
        rows.push(row_for(cat, la, lb, 3, Averaging::Macro, excluded));
    }

    Ok(AgreementReport { rows })
}

pub(crate) fn cell(v: f64) -> String {
    if v.is_nan() {
        return "-".to_owned();
    }
    let s = format!("{v:.2}");
    // ".67" rather than "0.67"
    if let Some(rest) = s.strip_prefix("0.") {
        format!(".{rest}")
    } else if let Some(rest) = s.strip_prefix("-0.") {
        format!("-.{rest}")
    } else {
        s
    }
}

/// Aligned text table: a kappa row and a human-F1 row, plus a model-F1 row
/// when a model report is given. Type rows get a coverage footnote.
pub fn render_table(human: &AgreementReport, model: Option<&AgreementReport>) -> String {
    let mut out = String::new();
    let cats: Vec<AgreementCategory> = human.rows.iter().map(|r| r.category).collect();
    let _ = write!(out, "{:<22}", "");
    for c in &cats {
        let _ = write!(out, "{:>11}", c.label());
    }
    out.push('\n');
    let mut line = |name: &str, vals: Vec<f64>| {
        let _ = write!(out, "{name:<22}");
        for v in vals {
            let _ = write!(out, "{:>11}", cell(v));
        }
        out.push('\n');
    };
    line(
        "Cohen's kappa",
        human.rows.iter().map(|r| r.kappa).collect(),
    );
    line(
        "human annotator F1",
        human.rows.iter().map(|r| r.f1).collect(),
    );
    if let Some(m) = model {
        line(
            "automatic annotator F1",
            cats.iter()
                .map(|c| m.row(*c).map_or(f64::NAN, |r| r.f1))
                .collect(),
        );
    }
    for r in &human.rows {
        if r.excluded > 0 {
            let _ = writeln!(
                out,
                "{}: {} items compared, {} tweets excluded (argumentativeness or type disagreement)",
                r.category.label(),
                r.n_items,
                r.excluded
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(a: &[usize], b: &[usize]) -> LabelSequencePair {
        LabelSequencePair::new("t", a.to_vec(), b.to_vec())
    }

    #[test]
    fn identical_is_one() {
        assert_eq!(
            cohen_kappa(&pair(&[0, 1, 2, 1], &[0, 1, 2, 1])).unwrap(),
            1.0
        );
        assert_eq!(cohen_kappa(&pair(&[1, 1, 1], &[1, 1, 1])).unwrap(), 1.0);
    }

    #[test]
    fn hand_computed_kappa() {
        // p_o = .75, p_e = .5*.25 + .5*.75 = .5
        let k = cohen_kappa(&pair(&[1, 1, 0, 0], &[1, 0, 0, 0])).unwrap();
        assert!((k - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_but_different() {
        // p_o = 0, p_e = 0
        assert_eq!(cohen_kappa(&pair(&[0, 0], &[1, 1])).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        assert_eq!(
            cohen_kappa(&pair(&[1], &[1, 0])),
            Err(AgreementError::LengthMismatch(1, 2))
        );
        assert_eq!(cohen_kappa(&pair(&[], &[])), Err(AgreementError::EmptyPair));
        assert!(pairwise_f1(&pair(&[1], &[]), TruthSide::A, Averaging::Binary).is_err());
    }

    #[test]
    fn hand_computed_f1() {
        let p = pair(&[1, 1, 0, 0], &[1, 0, 0, 0]);
        let r = pairwise_f1(&p, TruthSide::A, Averaging::Binary).unwrap();
        assert_eq!(r.precision, 1.0);
        assert_eq!(r.recall, 0.5);
        assert!((r.f1 - 2.0 / 3.0).abs() < 1e-12);
        let s = pairwise_f1(&p, TruthSide::B, Averaging::Binary).unwrap();
        assert_eq!((s.precision, s.recall), (r.recall, r.precision));
        assert_eq!(s.f1, r.f1);
    }

    #[test]
    fn identical_and_disjoint_f1() {
        let r = pairwise_f1(
            &pair(&[0, 1, 1], &[0, 1, 1]),
            TruthSide::A,
            Averaging::Binary,
        )
        .unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (1.0, 1.0, 1.0));
        let r = pairwise_f1(&pair(&[1, 0], &[0, 1]), TruthSide::A, Averaging::Binary).unwrap();
        assert_eq!(r.f1, 0.0);
    }

    #[test]
    fn monte_carlo_independent_labels_near_zero() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 10_000;
        let a: Vec<usize> = (0..n).map(|_| usize::from(rng.gen_bool(0.3))).collect();
        let b: Vec<usize> = (0..n).map(|_| usize::from(rng.gen_bool(0.3))).collect();
        let k = cohen_kappa(&LabelSequencePair::new("mc", a, b)).unwrap();
        assert!(k.abs() < 0.05, "kappa {k}");
    }

    #[test]
    fn soft_match_credits_overlapping_runs() {
        let r = soft_span_f1(&[1, 1, 0, 0, 1], &[0, 1, 1, 0, 0]).unwrap();
        assert_eq!(r.precision, 1.0);
        assert_eq!(r.recall, 0.5);
        let strict = binary_prf(&[1, 1, 0, 0, 1], &[0, 1, 1, 0, 0]);
        assert!(strict.f1 < r.f1);
    }

    #[test]
    fn cell_formatting() {
        assert_eq!(cell(0.671), ".67");
        assert_eq!(cell(-0.049), "-.05");
        assert_eq!(cell(1.0), "1.00");
        assert_eq!(cell(f64::NAN), "-");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn pairs() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
            (1usize..40, 2usize..4).prop_flat_map(|(n, k)| {
                (
                    proptest::collection::vec(0..k, n),
                    proptest::collection::vec(0..k, n),
                )
            })
        }

        proptest! {
            #[test]
            fn kappa_symmetric_and_bounded((a, b) in pairs()) {
                let k1 = cohen_kappa(&pair(&a, &b)).unwrap();
                let k2 = cohen_kappa(&pair(&b, &a)).unwrap();
                prop_assert_eq!(k1, k2);
                let p_o = a.iter().zip(&b).filter(|(x, y)| x == y).count() as f64 / a.len() as f64;
                prop_assert!(k1 <= p_o + 1e-12);
                prop_assert!((-1.0 - 1e-12..=1.0).contains(&k1));
                prop_assert_eq!(k1 == 1.0, a == b);
            }

            #[test]
            fn f1_truth_swap((a, b) in pairs()) {
                for avg in [Averaging::Binary, Averaging::Macro] {
                    let p = pair(&a, &b);
                    let x = pairwise_f1(&p, TruthSide::A, avg).unwrap();
                    let y = pairwise_f1(&p, TruthSide::B, avg).unwrap();
                    prop_assert!((x.f1 - y.f1).abs() < 1e-12);
                    prop_assert!((x.precision - y.recall).abs() < 1e-12);
                    prop_assert!((x.recall - y.precision).abs() < 1e-12);
                    prop_assert!((0.0..=1.0).contains(&x.f1));
                }
            }
        }
    }
}
