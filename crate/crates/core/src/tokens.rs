//! Word tokenization and projection of character-span components onto
//! per-token binary labels.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scheme::{AnnotatedTweet, ComponentKind};
use crate::standoff::{Document, Span};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn span(&self) -> Span {
        Span::new(self.start, self.end)
    }

    pub fn is_punct(&self) -> bool {
        self.surface.chars().all(is_punct)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedTweet {
    pub tweet_id: String,
    pub tokens: Vec<Token>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizerOptions {
    /// Keep tokens made only of punctuation.
    pub include_punct: bool,
}

impl Default for TokenizerOptions {
    fn default() -> Self {
        TokenizerOptions {
            include_punct: true,
        }
    }
}

pub fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '…' | '“' | '”' | '‘' | '’' | '«' | '»' | '¡' | '¿' | '—' | '–' | '·'
        )
}

fn is_url(s: &str) -> bool {
    let lower = s.to_ascii_lowercase();
    lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.")
}

pub fn tokenize(doc: &Document) -> TokenizedTweet {
    tokenize_with(doc, TokenizerOptions::default())
}

/// Splits on whitespace, then peels leading and trailing punctuation off
/// each chunk one character at a time. URLs stay whole; hashtags and
/// mentions keep their sigil and word characters.
pub fn tokenize_with(doc: &Document, opts: TokenizerOptions) -> TokenizedTweet {
    let chars: Vec<char> = doc.text().chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        split_chunk(&chars, start, i, &mut tokens);
    }
    if !opts.include_punct {
        tokens.retain(|t| !t.is_punct());
    }
    TokenizedTweet {
        tweet_id: doc.id().to_owned(),
        tokens,
    }
}

fn split_chunk(chars: &[char], start: usize, end: usize, out: &mut Vec<Token>) {
    let make = |s: usize, e: usize| Token {
        surface: chars[s..e].iter().collect(),
        start: s,
        end: e,
    };
    let chunk: String = chars[start..end].iter().collect();
    if is_url(&chunk) {
        out.push(make(start, end));
        return;
    }

    let mut lo = start;
    let mut hi = end;
    let mut leading = Vec::new();
    while lo < hi && is_punct(chars[lo]) && !matches!(chars[lo], '#' | '@') {
        leading.push(make(lo, lo + 1));
        lo += 1;
    }
    // a sigil directly followed by a word character starts a hashtag/mention
    if lo + 1 < hi && matches!(chars[lo], '#' | '@') && is_word(chars[lo + 1]) {
        let mut j = lo + 1;
        while j < hi && is_word(chars[j]) {
            j += 1;
        }
        out.extend(leading);
        out.push(make(lo, j));
        split_chunk_rest(chars, j, hi, out);
        return;
    }
    // lone or trailing sigils are ordinary punctuation
    while lo < hi && is_punct(chars[lo]) {
        leading.push(make(lo, lo + 1));
        lo += 1;
    }
    let mut trailing = Vec::new();
    while hi > lo && is_punct(chars[hi - 1]) {
        trailing.push(make(hi - 1, hi));
        hi -= 1;
    }
    out.extend(leading);
    if lo < hi {
        out.push(make(lo, hi));
    }
    out.extend(trailing.into_iter().rev());
}

fn split_chunk_rest(chars: &[char], start: usize, end: usize, out: &mut Vec<Token>) {
    if start < end {
        split_chunk(chars, start, end, out);
    }
}

fn is_word(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Label category: a single component kind or the merged pivot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Justification,
    Conclusion,
    Collective,
    Property,
    /// Both pivot sides as one category.
    Pivot,
    PivotJustificationSide,
    PivotConclusionSide,
}

impl Category {
    pub fn kinds(self) -> &'static [ComponentKind] {
        use ComponentKind as K;
        match self {
            Category::Justification => &[K::Justification],
            Category::Conclusion => &[K::Conclusion],
            Category::Collective => &[K::Collective],
            Category::Property => &[K::Property],
            Category::Pivot => &[K::PivotJustificationSide, K::PivotConclusionSide],
            Category::PivotJustificationSide => &[K::PivotJustificationSide],
            Category::PivotConclusionSide => &[K::PivotConclusionSide],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Justification => "Justification",
            Category::Conclusion => "Conclusion",
            Category::Collective => "Collective",
            Category::Property => "Property",
            Category::Pivot => "Pivot",
            Category::PivotJustificationSide => "PivotJustificationSide",
            Category::PivotConclusionSide => "PivotConclusionSide",
        }
    }

    /// Categories evaluated per word. `merge_pivot` selects one Pivot
    /// category instead of the two sides.
    pub fn span_categories(merge_pivot: bool) -> Vec<Category> {
        let mut v = vec![Category::Collective, Category::Property];
        if merge_pivot {
            v.push(Category::Pivot);
        } else {
            v.push(Category::PivotJustificationSide);
            v.push(Category::PivotConclusionSide);
        }
        v.push(Category::Justification);
        v.push(Category::Conclusion);
        v
    }
}

impl From<ComponentKind> for Category {
    fn from(k: ComponentKind) -> Self {
        match k {
            ComponentKind::Justification => Category::Justification,
            ComponentKind::Conclusion => Category::Conclusion,
            ComponentKind::Collective => Category::Collective,
            ComponentKind::Property => Category::Property,
            ComponentKind::PivotJustificationSide => Category::PivotJustificationSide,
            ComponentKind::PivotConclusionSide => Category::PivotConclusionSide,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenLabeling {
    pub tweet_id: String,
    pub category: Category,
    pub labels: Vec<u8>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ProjectionError {
    #[error("tweet id {tweet:?} does not match tokenization id {tokens:?}")]
    IdMismatch { tweet: String, tokens: String },
}

/// 1 for every token sharing at least one code point with a fragment of
/// the category.
pub fn project(
    t: &AnnotatedTweet,
    tok: &TokenizedTweet,
    category: Category,
) -> Result<TokenLabeling, ProjectionError> {
    if t.id() != tok.tweet_id {
        return Err(ProjectionError::IdMismatch {
            tweet: t.id().to_owned(),
            tokens: tok.tweet_id.clone(),
        });
    }
    let spans = t.fragments_of(category.kinds());
    Ok(TokenLabeling {
        tweet_id: tok.tweet_id.clone(),
        category,
        labels: overlap_labels(&tok.tokens, &spans),
    })
}

pub(crate) fn overlap_labels(tokens: &[Token], spans: &[Span]) -> Vec<u8> {
    tokens
        .iter()
        .map(|tk| u8::from(spans.iter().any(|s| s.overlaps(&tk.span()))))
        .collect()
}

/// One tweet of a token-level dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceItem {
    pub tweet_id: String,
    pub tokens: Vec<String>,
    pub labels: Vec<u8>,
    /// `indicators[i][k]`: token i lies in the k-th conditioning kind.
    pub indicators: Vec<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceDataset {
    pub category: Category,
    pub conditioning: Vec<ComponentKind>,
    pub items: Vec<SequenceItem>,
}

/// Per-token rows with gold labels; indicator columns follow the order of
/// `ComponentKind` for the conditioning set.
pub fn to_dataset(
    corpus: &[AnnotatedTweet],
    category: Category,
    conditioning: &[ComponentKind],
    opts: TokenizerOptions,
) -> SequenceDataset {
    let mut cond: Vec<ComponentKind> = conditioning.to_vec();
    cond.sort();
    cond.dedup();
    let items = corpus
        .iter()
        .map(|t| {
            let tok = tokenize_with(&t.doc, opts);
            let labels = overlap_labels(&tok.tokens, &t.fragments_of(category.kinds()));
            let per_kind: Vec<Vec<u8>> = cond
                .iter()
                .map(|k| overlap_labels(&tok.tokens, &t.fragments_of(&[*k])))
                .collect();
            let indicators = (0..tok.tokens.len())
                .map(|i| per_kind.iter().map(|col| col[i]).collect())
                .collect();
            SequenceItem {
                tweet_id: t.id().to_owned(),
                tokens: tok.tokens.into_iter().map(|x| x.surface).collect(),
                labels,
                indicators,
            }
        })
        .collect();
    SequenceDataset {
        category,
        conditioning: cond,
        items,
    }
}

impl SequenceDataset {
    /// Column format: a `# <tweet id>` line, then one line per token with
    /// tab-separated token, indicator columns and gold label; a blank line
    /// ends each tweet.
    pub fn to_columns(&self) -> String {
        let mut out = String::new();
        let header: Vec<&str> = std::iter::once("token")
            .chain(self.conditioning.iter().map(|k| k.name()))
            .chain(std::iter::once(self.category.name()))
            .collect();
        let _ = writeln!(out, "#columns\t{}", header.join("\t"));
        out.push('\n');
        for item in &self.items {
            let _ = writeln!(out, "# {}", item.tweet_id);
            for (i, tok) in item.tokens.iter().enumerate() {
                out.push_str(tok);
                for v in &item.indicators[i] {
                    let _ = write!(out, "\t{v}");
                }
                let _ = writeln!(out, "\t{}", item.labels[i]);
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{Component, PropositionType};
    use crate::standoff::Lang;

    fn surfaces(text: &str) -> Vec<String> {
        let d = Document::new("x", text, Lang::En).unwrap();
        let tt = tokenize(&d);
        for t in &tt.tokens {
            assert_eq!(d.slice(t.start, t.end), t.surface);
        }
        tt.tokens.into_iter().map(|t| t.surface).collect()
    }

    #[test]
    fn splits_trailing_punct_keeps_hashtag() {
        assert_eq!(
            surfaces("No to #EU camps."),
            ["No", "to", "#EU", "camps", "."]
        );
    }

    #[test]
    fn url_kept_whole() {
        assert_eq!(surfaces("https://t.co/x y"), ["https://t.co/x", "y"]);
    }

    #[test]
    fn mentions_and_quotes() {
        assert_eq!(
            surfaces("\"@user: they're here!!\" #a_b…"),
            ["\"", "@user", ":", "they're", "here", "!", "!", "\"", "#a_b", "…"]
        );
    }

    #[test]
    fn whitespace_only_doc_has_no_tokens() {
        assert!(surfaces("   ").is_empty());
    }

    #[test]
    fn punct_can_be_dropped() {
        let d = Document::new("x", "Stop them , now !", Lang::En).unwrap();
        let t = tokenize_with(
            &d,
            TokenizerOptions {
                include_punct: false,
            },
        );
        let s: Vec<_> = t.tokens.iter().map(|t| t.surface.as_str()).collect();
        assert_eq!(s, ["Stop", "them", "now"]);
    }

    fn tweet(text: &str, comps: Vec<Component>) -> AnnotatedTweet {
        AnnotatedTweet {
            doc: Document::new("x", text, Lang::En).unwrap(),
            argumentative: !comps.is_empty(),
            components: comps,
            justification_type: Some(PropositionType::Fact),
            conclusion_type: Some(PropositionType::Policy),
            counter_narratives: vec![],
        }
    }

    #[test]
    fn contained_span_projects() {
        let t = tweet(
            "Build walls now",
            vec![Component::new(
                ComponentKind::Conclusion,
                vec![Span::new(0, 5)],
            )],
        );
        let l = project(&t, &tokenize(&t.doc), Category::Conclusion).unwrap();
        assert_eq!(l.labels, [1, 0, 0]);
    }

    #[test]
    fn partial_overlap_counts() {
        // fragment ends inside "walls"
        let t = tweet(
            "Build walls now",
            vec![Component::new(
                ComponentKind::Conclusion,
                vec![Span::new(0, 8)],
            )],
        );
        let l = project(&t, &tokenize(&t.doc), Category::Conclusion).unwrap();
        assert_eq!(l.labels, [1, 1, 0]);
    }

    #[test]
    fn missing_category_projects_zeros() {
        let t = tweet(
            "Build walls now",
            vec![Component::new(
                ComponentKind::Conclusion,
                vec![Span::new(0, 5)],
            )],
        );
        let l = project(&t, &tokenize(&t.doc), Category::Property).unwrap();
        assert_eq!(l.labels, [0, 0, 0]);
    }

    #[test]
    fn id_mismatch() {
        let t = tweet("Build walls now", vec![]);
        let mut tok = tokenize(&t.doc);
        tok.tweet_id = "other".into();
        assert!(matches!(
            project(&t, &tok, Category::Conclusion),
            Err(ProjectionError::IdMismatch { .. })
        ));
    }

    #[test]
    fn merged_pivot_covers_both_sides() {
        let t = tweet(
            "they steal so expel them",
            vec![
                Component::new(ComponentKind::PivotJustificationSide, vec![Span::new(0, 4)]),
                Component::new(ComponentKind::PivotConclusionSide, vec![Span::new(20, 24)]),
            ],
        );
        let tok = tokenize(&t.doc);
        assert_eq!(
            project(&t, &tok, Category::Pivot).unwrap().labels,
            [1, 0, 0, 0, 1]
        );
        assert_eq!(
            project(&t, &tok, Category::PivotConclusionSide)
                .unwrap()
                .labels,
            [0, 0, 0, 0, 1]
        );
    }

    fn fixture() -> AnnotatedTweet {
        tweet(
            "Migrants are criminals. Deport migrants!",
            vec![
                Component::new(ComponentKind::Justification, vec![Span::new(0, 22)]),
                Component::new(ComponentKind::Conclusion, vec![Span::new(24, 39)]),
                Component::new(ComponentKind::Collective, vec![Span::new(0, 8)]),
                Component::new(ComponentKind::Property, vec![Span::new(13, 22)]),
            ],
        )
    }

    #[test]
    fn conditioned_dataset_has_indicator_columns() {
        let ds = to_dataset(
            &[fixture()],
            Category::Collective,
            &[ComponentKind::Property],
            TokenizerOptions::default(),
        );
        let item = &ds.items[0];
        assert_eq!(
            item.tokens,
            [
                "Migrants",
                "are",
                "criminals",
                ".",
                "Deport",
                "migrants",
                "!"
            ]
        );
        assert_eq!(item.labels, [1, 0, 0, 0, 0, 0, 0]);
        let ind: Vec<u8> = item.indicators.iter().map(|r| r[0]).collect();
        assert_eq!(ind, [0, 0, 1, 0, 0, 0, 0]);

        let pivot = to_dataset(
            &[fixture()],
            Category::Pivot,
            &[ComponentKind::Conclusion, ComponentKind::Justification],
            TokenizerOptions::default(),
        );
        assert_eq!(
            pivot.conditioning,
            [ComponentKind::Justification, ComponentKind::Conclusion]
        );
        assert!(pivot.items[0].indicators.iter().all(|r| r.len() == 2));

        let plain = to_dataset(
            &[fixture()],
            Category::Collective,
            &[],
            TokenizerOptions::default(),
        );
        assert!(plain.items[0].indicators.iter().all(|r| r.is_empty()));
    }

    #[test]
    fn column_format() {
        let ds = to_dataset(
            &[fixture()],
            Category::Collective,
            &[ComponentKind::Property],
            TokenizerOptions::default(),
        );
        let text = ds.to_columns();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("#columns\ttoken\tProperty\tCollective"));
        assert_eq!(lines.next(), Some(""));
        assert_eq!(lines.next(), Some("# x"));
        assert_eq!(lines.next(), Some("Migrants\t0\t1"));
        assert_eq!(lines.next(), Some("are\t0\t0"));
        assert_eq!(lines.next(), Some("criminals\t1\t0"));
        assert!(text.ends_with("!\t0\t0\n\n"));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn tokens_reassemble_text(text in "[a-zA-Z#@.,!?' ]{1,60}|[ -~áé🔥]{1,40}") {
                let d = Document::new("p", text.clone(), Lang::En).unwrap();
                let tt = tokenize(&d);
                let mut rebuilt = String::new();
                let mut pos = 0;
                let chars: Vec<char> = text.chars().collect();
                for t in &tt.tokens {
                    prop_assert!(t.start >= pos && t.start < t.end);
                    rebuilt.extend(&chars[pos..t.start]);
                    rebuilt.push_str(&t.surface);
                    pos = t.end;
                }
                rebuilt.extend(&chars[pos..]);
                prop_assert_eq!(rebuilt, text);
                // gaps are whitespace only
                let mut pos = 0;
                for t in &tt.tokens {
                    prop_assert!(chars[pos..t.start].iter().all(|c| c.is_whitespace()));
                    pos = t.end;
                }
            }

            #[test]
            fn projection_is_monotone(
                words in 1usize..12,
                start in 0usize..40,
                len in 1usize..20,
                grow in 0usize..10,
            ) {
                let text = vec!["word"; words].join(" ");
                let n = text.chars().count();
                let s = start.min(n - 1);
                let e = (s + len).min(n);
                let e2 = (e + grow).min(n);
                let small = tweet(&text, vec![Component::new(ComponentKind::Property, vec![Span::new(s, e)])]);
                let big = tweet(&text, vec![Component::new(ComponentKind::Property, vec![Span::new(s, e2)])]);
                let tok = tokenize(&small.doc);
                let a = project(&small, &tok, Category::Property).unwrap().labels;
                let b = project(&big, &tok, Category::Property).unwrap().labels;
                prop_assert!(a.iter().zip(&b).all(|(x, y)| x <= y));
                prop_assert!(a.iter().map(|&x| x as usize).sum::<usize>() <= tok.tokens.len());
            }
        }
    }
}
