//! Typed argumentation-scheme model for annotated tweets and the
//! validator that checks each tweet against the annotation protocol.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::standoff::{Document, RawAnnotation, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ComponentKind {
    Justification,
    Conclusion,
    Collective,
    Property,
    PivotJustificationSide,
    PivotConclusionSide,
}

impl ComponentKind {
    pub const ALL: [ComponentKind; 6] = [
        ComponentKind::Justification,
        ComponentKind::Conclusion,
        ComponentKind::Collective,
        ComponentKind::Property,
        ComponentKind::PivotJustificationSide,
        ComponentKind::PivotConclusionSide,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ComponentKind::Justification => "Justification",
            ComponentKind::Conclusion => "Conclusion",
            ComponentKind::Collective => "Collective",
            ComponentKind::Property => "Property",
            ComponentKind::PivotJustificationSide => "PivotJustificationSide",
            ComponentKind::PivotConclusionSide => "PivotConclusionSide",
        }
    }

    pub fn is_pivot(self) -> bool {
        matches!(
            self,
            ComponentKind::PivotJustificationSide | ComponentKind::PivotConclusionSide
        )
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PropositionType {
    Fact,
    Value,
    Policy,
}

impl PropositionType {
    pub const ALL: [PropositionType; 3] = [
        PropositionType::Fact,
        PropositionType::Value,
        PropositionType::Policy,
    ];

    pub fn index(self) -> usize {
        match self {
            PropositionType::Fact => 0,
            PropositionType::Value => 1,
            PropositionType::Policy => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CnType {
    A,
    B,
    C,
    D,
}

impl CnType {
    pub const ALL: [CnType; 4] = [CnType::A, CnType::B, CnType::C, CnType::D];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterNarrative {
    pub cn_type: CnType,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub kind: ComponentKind,
    pub fragments: Vec<Span>,
    /// Id of the annotation line this component came from, if any.
    #[serde(default)]
    pub source_id: String,
}

impl Component {
    pub fn new(kind: ComponentKind, fragments: Vec<Span>) -> Self {
        Component {
            kind,
            fragments,
            source_id: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedTweet {
    pub doc: Document,
    pub argumentative: bool,
    pub components: Vec<Component>,
    pub justification_type: Option<PropositionType>,
    pub conclusion_type: Option<PropositionType>,
    pub counter_narratives: Vec<CounterNarrative>,
}

impl AnnotatedTweet {
    pub fn non_argumentative(doc: Document) -> Self {
        AnnotatedTweet {
            doc,
            argumentative: false,
            components: Vec::new(),
            justification_type: None,
            conclusion_type: None,
            counter_narratives: Vec::new(),
        }
    }

    pub fn id(&self) -> &str {
        self.doc.id()
    }

    pub fn components_of(&self, kind: ComponentKind) -> impl Iterator<Item = &Component> {
        self.components.iter().filter(move |c| c.kind == kind)
    }

    pub fn has(&self, kind: ComponentKind) -> bool {
        self.components_of(kind).any(|c| !c.fragments.is_empty())
    }

    /// All fragments of the given kinds, sorted by start.
    pub fn fragments_of(&self, kinds: &[ComponentKind]) -> Vec<Span> {
        let mut spans: Vec<Span> = self
            .components
            .iter()
            .filter(|c| kinds.contains(&c.kind))
            .flat_map(|c| c.fragments.iter().copied())
            .collect();
        spans.sort();
        spans
    }

    /// Surface text of all components of a kind, fragments joined by a space.
    pub fn surface(&self, kind: ComponentKind) -> String {
        let spans = self.fragments_of(&[kind]);
        let in_range: Vec<Span> = spans
            .into_iter()
            .filter(|s| s.start < s.end && s.end <= self.doc.char_len())
            .collect();
        self.doc.surface_of(&in_range)
    }

    pub fn has_cn(&self, cn_type: CnType) -> bool {
        self.counter_narratives.iter().any(|c| c.cn_type == cn_type)
    }
}

/// What a file label maps to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelTarget {
    Component(ComponentKind),
    /// One pivot label for both sides; the side is decided by whether the
    /// span lies inside the Justification or the Conclusion.
    PivotByContainment,
    Ignore,
}

/// Names used in a corpus for labels, attributes and notes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MappingConfig {
    pub labels: BTreeMap<String, LabelTarget>,
    /// Attribute on Justification/Conclusion spans that holds the proposition type.
    pub type_attribute: String,
    pub type_values: BTreeMap<String, PropositionType>,
    pub cn_note_types: BTreeMap<String, CnType>,
}

impl Default for MappingConfig {
    fn default() -> Self {
        use ComponentKind::*;
        let labels = [
            ("Justification", LabelTarget::Component(Justification)),
            ("Conclusion", LabelTarget::Component(Conclusion)),
            ("Collective", LabelTarget::Component(Collective)),
            ("Property", LabelTarget::Component(Property)),
            (
                "PivotJustification",
                LabelTarget::Component(PivotJustificationSide),
            ),
            (
                "PivotConclusion",
                LabelTarget::Component(PivotConclusionSide),
            ),
            ("Pivot", LabelTarget::PivotByContainment),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_owned(), v))
        .collect();
        let type_values = [
            ("Fact", PropositionType::Fact),
            ("Value", PropositionType::Value),
            ("Policy", PropositionType::Policy),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_owned(), v))
        .collect();
        let cn_note_types = [
            ("CN-A", CnType::A),
            ("CN-B", CnType::B),
            ("CN-C", CnType::C),
            ("CN-D", CnType::D),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_owned(), v))
        .collect();
        MappingConfig {
            labels,
            type_attribute: "Type".to_owned(),
            type_values,
            cn_note_types,
        }
    }
}

impl MappingConfig {
    pub fn from_toml(src: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(src)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SchemeError {
    #[error("{tweet_id}: label {label:?} has no entry in the mapping config")]
    UnknownLabel { tweet_id: String, label: String },
    #[error("{tweet_id}: {attribute} value {value:?} on {ann_id} is not a known proposition type")]
    UnknownTypeValue {
        tweet_id: String,
        ann_id: String,
        attribute: String,
        value: String,
    },
}

/// Builds a typed tweet from parsed annotations. The result may violate the
/// scheme; call [`validate`] to find out.
pub fn from_raw(
    doc: Document,
    raw: &[RawAnnotation],
    mapping: &MappingConfig,
) -> Result<AnnotatedTweet, SchemeError> {
    let mut components = Vec::new();
    let mut pivots_unresolved = Vec::new();
    let mut justification_type = None;
    let mut conclusion_type = None;
    let mut counter_narratives = Vec::new();

    for ann in raw {
        let target = mapping
            .labels
            .get(&ann.label)
            .ok_or_else(|| SchemeError::UnknownLabel {
                tweet_id: doc.id().to_owned(),
                label: ann.label.clone(),
            })?;
        let kind = match *target {
            LabelTarget::Ignore => None,
            LabelTarget::PivotByContainment => {
                pivots_unresolved.push(ann);
                None
            }
            LabelTarget::Component(kind) => Some(kind),
        };
        if let Some(kind) = kind {
            if let Some(value) = ann.attributes.get(&mapping.type_attribute) {
                let ty = *mapping.type_values.get(value).ok_or_else(|| {
                    SchemeError::UnknownTypeValue {
                        tweet_id: doc.id().to_owned(),
                        ann_id: ann.ann_id.clone(),
                        attribute: mapping.type_attribute.clone(),
                        value: value.clone(),
                    }
                })?;
                match kind {
                    ComponentKind::Justification => justification_type = Some(ty),
                    ComponentKind::Conclusion => conclusion_type = Some(ty),
                    _ => {}
                }
            }
            components.push(Component {
                kind,
                fragments: ann.fragments.clone(),
                source_id: ann.ann_id.clone(),
            });
        }
        for note in &ann.notes {
            if let Some(&cn_type) = mapping.cn_note_types.get(&note.note_type) {
                counter_narratives.push(CounterNarrative {
                    cn_type,
                    text: note.text.clone(),
                });
            }
        }
    }

    for ann in pivots_unresolved {
        let inside = |kind: ComponentKind| {
            let outer: Vec<Span> = components
                .iter()
                .filter(|c: &&Component| c.kind == kind)
                .flat_map(|c| c.fragments.iter().copied())
                .collect();
            ann.fragments.iter().all(|f| covered_by(*f, &outer))
        };
        // Spans inside neither side default to the justification side and
        // are flagged by validation.
        let kind = if inside(ComponentKind::Conclusion) && !inside(ComponentKind::Justification) {
            ComponentKind::PivotConclusionSide
        } else {
            ComponentKind::PivotJustificationSide
        };
        components.push(Component {
            kind,
            fragments: ann.fragments.clone(),
            source_id: ann.ann_id.clone(),
        });
    }

    let argumentative = !components.is_empty();
    Ok(AnnotatedTweet {
        doc,
        argumentative,
        components,
        justification_type,
        conclusion_type,
        counter_narratives,
    })
}

/// Converts a tweet back to raw annotations under the default naming of
/// `mapping` (first label listed for each kind).
pub fn to_raw(tweet: &AnnotatedTweet, mapping: &MappingConfig) -> Vec<RawAnnotation> {
    let label_for = |kind: ComponentKind| {
        mapping
            .labels
            .iter()
            .find(|(_, t)| **t == LabelTarget::Component(kind))
            .map(|(l, _)| l.clone())
            .unwrap_or_else(|| kind.name().to_owned())
    };
    let type_name = |ty: PropositionType| {
        mapping
            .type_values
            .iter()
            .find(|(_, t)| **t == ty)
            .map(|(n, _)| n.clone())
            .unwrap_or_else(|| format!("{ty:?}"))
    };
    let note_name = |cn: CnType| {
        mapping
            .cn_note_types
            .iter()
            .find(|(_, t)| **t == cn)
            .map(|(n, _)| n.clone())
            .unwrap_or_else(|| format!("CN-{cn:?}"))
    };

    let mut out: Vec<RawAnnotation> = tweet
        .components
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut attributes = BTreeMap::new();
            let ty = match c.kind {
                ComponentKind::Justification => tweet.justification_type,
                ComponentKind::Conclusion => tweet.conclusion_type,
                _ => None,
            };
            if let Some(ty) = ty {
                attributes.insert(mapping.type_attribute.clone(), type_name(ty));
            }
            RawAnnotation {
                ann_id: format!("T{}", i + 1),
                label: label_for(c.kind),
                fragments: c.fragments.clone(),
                surface: tweet.doc.surface_of(&c.fragments),
                attributes,
                notes: Vec::new(),
            }
        })
        .collect();
    // Counter-narratives hang off the conclusion when there is one.
    let anchor = tweet
        .components
        .iter()
        .position(|c| c.kind == ComponentKind::Conclusion)
        .unwrap_or(0);
    if let Some(ann) = out.get_mut(anchor) {
        for cn in &tweet.counter_narratives {
            ann.notes.push(crate::standoff::Note {
                note_type: note_name(cn.cn_type),
                text: cn.text.clone(),
            });
        }
    }
    out
}

fn covered_by(span: Span, outer: &[Span]) -> bool {
    // every code point of span is in some outer span
    (span.start..span.end).all(|p| outer.iter().any(|o| o.start <= p && p < o.end))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IssueCode {
    MissingJustification,
    MissingConclusion,
    DuplicateJustification,
    DuplicateConclusion,
    EmptyComponent,
    FragmentOutOfRange,
    MissingJustificationType,
    MissingConclusionType,
    ComponentsOnNonArgumentative,
    TypeOnNonArgumentative,
    CounterNarrativeOnNonArgumentative,
    UnpairedCollective,
    UnpairedProperty,
    IncompletePivot,
    DuplicatePivotSide,
    JustificationConclusionOverlap,
    PropertyCollectiveOverlap,
    ComponentOutsideArgument,
    TypeBWithoutProperty,
    EmptyCounterNarrative,
}

impl IssueCode {
    pub const ALL: [IssueCode; 20] = [
        IssueCode::MissingJustification,
        IssueCode::MissingConclusion,
        IssueCode::DuplicateJustification,
        IssueCode::DuplicateConclusion,
        IssueCode::EmptyComponent,
        IssueCode::FragmentOutOfRange,
        IssueCode::MissingJustificationType,
        IssueCode::MissingConclusionType,
        IssueCode::ComponentsOnNonArgumentative,
        IssueCode::TypeOnNonArgumentative,
        IssueCode::CounterNarrativeOnNonArgumentative,
        IssueCode::UnpairedCollective,
        IssueCode::UnpairedProperty,
        IssueCode::IncompletePivot,
        IssueCode::DuplicatePivotSide,
        IssueCode::JustificationConclusionOverlap,
        IssueCode::PropertyCollectiveOverlap,
        IssueCode::ComponentOutsideArgument,
        IssueCode::TypeBWithoutProperty,
        IssueCode::EmptyCounterNarrative,
    ];

    pub fn severity(self) -> Severity {
        match self {
            IssueCode::PropertyCollectiveOverlap => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub tweet_id: String,
    pub code: IssueCode,
    pub message: String,
    pub severity: Severity,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{}\t{sev}\t{:?}\t{}",
            self.tweet_id, self.code, self.message
        )
    }
}

/// Checks one tweet. Issues come back sorted by `(tweet_id, code, message)`.
pub fn validate(t: &AnnotatedTweet) -> Vec<ValidationIssue> {
    use ComponentKind::*;

    let mut issues = Vec::new();
    let mut push = |code: IssueCode, message: String| {
        issues.push(ValidationIssue {
            tweet_id: t.id().to_owned(),
            code,
            message,
            severity: code.severity(),
        });
    };

    let count = |kind: ComponentKind| t.components_of(kind).count();
    let len = t.doc.char_len();

    for c in &t.components {
        if c.fragments.is_empty() {
            push(
                IssueCode::EmptyComponent,
                format!("{} has no fragments", c.kind),
            );
        }
        for f in &c.fragments {
            if f.start >= f.end || f.end > len {
                push(
                    IssueCode::FragmentOutOfRange,
                    format!(
                        "{} fragment {}..{} outside 0..{len}",
                        c.kind, f.start, f.end
                    ),
                );
            }
        }
    }
    for cn in &t.counter_narratives {
        if cn.text.trim().is_empty() {
            push(
                IssueCode::EmptyCounterNarrative,
                format!("type {:?} counter-narrative is empty", cn.cn_type),
            );
        }
    }

    if !t.argumentative {
        if !t.components.is_empty() {
            push(
                IssueCode::ComponentsOnNonArgumentative,
                format!(
                    "{} components on a non-argumentative tweet",
                    t.components.len()
                ),
            );
        }
        if t.justification_type.is_some() || t.conclusion_type.is_some() {
            push(
                IssueCode::TypeOnNonArgumentative,
                "proposition type on a non-argumentative tweet".to_owned(),
            );
        }
        if !t.counter_narratives.is_empty() {
            push(
                IssueCode::CounterNarrativeOnNonArgumentative,
                format!(
                    "{} counter-narratives on a non-argumentative tweet",
                    t.counter_narratives.len()
                ),
            );
        }
        issues.sort();
        return issues;
    }

    match count(Justification) {
        0 => push(
            IssueCode::MissingJustification,
            "no Justification".to_owned(),
        ),
        1 => {}
        n => push(
            IssueCode::DuplicateJustification,
            format!("{n} Justification components"),
        ),
    }
    match count(Conclusion) {
        0 => push(IssueCode::MissingConclusion, "no Conclusion".to_owned()),
        1 => {}
        n => push(
            IssueCode::DuplicateConclusion,
            format!("{n} Conclusion components"),
        ),
    }
    if t.justification_type.is_none() {
        push(
            IssueCode::MissingJustificationType,
            "Justification has no type".to_owned(),
        );
    }
    if t.conclusion_type.is_none() {
        push(
            IssueCode::MissingConclusionType,
            "Conclusion has no type".to_owned(),
        );
    }

    let has_collective = t.has(Collective);
    let has_property = t.has(Property);
    if has_collective && !has_property {
        push(
            IssueCode::UnpairedCollective,
            "Collective without Property".to_owned(),
        );
    }
    if has_property && !has_collective {
        push(
            IssueCode::UnpairedProperty,
            "Property without Collective".to_owned(),
        );
    }

    let pj = count(PivotJustificationSide);
    let pc = count(PivotConclusionSide);
    if (pj == 0) != (pc == 0) {
        let missing = if pj == 0 {
            "justification"
        } else {
            "conclusion"
        };
        push(
            IssueCode::IncompletePivot,
            format!("pivot lacks its {missing} side"),
        );
    }
    if pj > 1 || pc > 1 {
        push(
            IssueCode::DuplicatePivotSide,
            format!("{pj} justification-side and {pc} conclusion-side pivot components"),
        );
    }

    let just = t.fragments_of(&[Justification]);
    let conc = t.fragments_of(&[Conclusion]);
    let overlap = |a: &[Span], b: &[Span]| a.iter().any(|x| b.iter().any(|y| x.overlaps(y)));
    if overlap(&just, &conc) {
        push(
            IssueCode::JustificationConclusionOverlap,
            "Justification and Conclusion overlap".to_owned(),
        );
    }
    let coll = t.fragments_of(&[Collective]);
    let prop = t.fragments_of(&[Property]);
    if overlap(&coll, &prop) {
        push(
            IssueCode::PropertyCollectiveOverlap,
            "Property overlaps Collective".to_owned(),
        );
    }

    let argument = t.fragments_of(&[Justification, Conclusion]);
    for c in &t.components {
        if !matches!(
            c.kind,
            Collective | Property | PivotJustificationSide | PivotConclusionSide
        ) {
            continue;
        }
        for f in &c.fragments {
            if f.start < f.end && !covered_by(*f, &argument) {
                push(
                    IssueCode::ComponentOutsideArgument,
                    format!(
                        "{} fragment {}..{} is not inside Justification or Conclusion",
                        c.kind, f.start, f.end
                    ),
                );
            }
        }
    }

    if t.has_cn(CnType::B) && !has_property {
        push(
            IssueCode::TypeBWithoutProperty,
            "type B counter-narrative without an explicit Property".to_owned(),
        );
    }

    issues.sort();
    issues
}

pub fn validate_corpus(corpus: &[AnnotatedTweet]) -> Vec<ValidationIssue> {
    let mut all: Vec<ValidationIssue> = corpus.iter().flat_map(validate).collect();
    all.sort();
    all
}

/// Number of whitespace-delimited words inside a set of fragments.
pub fn words_in(doc: &Document, spans: &[Span]) -> usize {
    spans
        .iter()
        .filter(|s| s.start < s.end && s.end <= doc.char_len())
        .map(|s| doc.slice_span(*s).split_whitespace().count())
        .sum()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeCounts {
    pub fact: usize,
    pub value: usize,
    pub policy: usize,
}

impl TypeCounts {
    fn add(&mut self, ty: PropositionType) {
        match ty {
            PropositionType::Fact => self.fact += 1,
            PropositionType::Value => self.value += 1,
            PropositionType::Policy => self.policy += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.fact + self.value + self.policy
    }

    fn merge(&mut self, o: &TypeCounts) {
        self.fact += o.fact;
        self.value += o.value;
        self.policy += o.policy;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnCounts {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordCounts {
    pub total: usize,
    pub justification: usize,
    pub conclusion: usize,
    pub collective: usize,
    pub property: usize,
    pub pivot: usize,
}

/// Counts for one language. Tweet counts for counter-narratives are the
/// number of argumentative tweets with at least one of that type.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LangStats {
    pub tweets: usize,
    pub non_argumentative: usize,
    pub argumentative: usize,
    pub with_collective_property: usize,
    pub with_pivot: usize,
    pub words: WordCounts,
    pub conclusion_types: TypeCounts,
    pub justification_types: TypeCounts,
    pub cn_tweets: CnCounts,
}

impl LangStats {
    fn add(&mut self, t: &AnnotatedTweet) {
        use ComponentKind::*;
        self.tweets += 1;
        self.words.total += t.doc.text().split_whitespace().count();
        if !t.argumentative {
            self.non_argumentative += 1;
            return;
        }
        self.argumentative += 1;
        if t.has(Collective) && t.has(Property) {
            self.with_collective_property += 1;
        }
        if t.has(PivotJustificationSide) || t.has(PivotConclusionSide) {
            self.with_pivot += 1;
        }
        let w = |kinds: &[ComponentKind]| words_in(&t.doc, &t.fragments_of(kinds));
        self.words.justification += w(&[Justification]);
        self.words.conclusion += w(&[Conclusion]);
        self.words.collective += w(&[Collective]);
        self.words.property += w(&[Property]);
        self.words.pivot += w(&[PivotJustificationSide, PivotConclusionSide]);
        if let Some(ty) = t.conclusion_type {
            self.conclusion_types.add(ty);
        }
        if let Some(ty) = t.justification_type {
            self.justification_types.add(ty);
        }
        self.cn_tweets.a += usize::from(t.has_cn(CnType::A));
        self.cn_tweets.b += usize::from(t.has_cn(CnType::B));
        self.cn_tweets.c += usize::from(t.has_cn(CnType::C));
        self.cn_tweets.d += usize::from(t.has_cn(CnType::D));
    }

    /// Associative merge, so per-shard stats can be combined.
    pub fn merge(&mut self, o: &LangStats) {
        self.tweets += o.tweets;
        self.non_argumentative += o.non_argumentative;
        self.argumentative += o.argumentative;
        self.with_collective_property += o.with_collective_property;
        self.with_pivot += o.with_pivot;
        self.words.total += o.words.total;
        self.words.justification += o.words.justification;
        self.words.conclusion += o.words.conclusion;
        self.words.collective += o.words.collective;
        self.words.property += o.words.property;
        self.words.pivot += o.words.pivot;
        self.conclusion_types.merge(&o.conclusion_types);
        self.justification_types.merge(&o.justification_types);
        self.cn_tweets.a += o.cn_tweets.a;
        self.cn_tweets.b += o.cn_tweets.b;
        self.cn_tweets.c += o.cn_tweets.c;
        self.cn_tweets.d += o.cn_tweets.d;
    }
}

pub fn percent(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsReport {
    pub by_lang: BTreeMap<crate::standoff::Lang, LangStats>,
}

impl StatsReport {
    pub fn lang(&self, lang: crate::standoff::Lang) -> LangStats {
        self.by_lang.get(&lang).cloned().unwrap_or_default()
    }

    pub fn merge(&mut self, o: &StatsReport) {
        for (lang, s) in &o.by_lang {
            self.by_lang.entry(*lang).or_default().merge(s);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize")
    }

    /// Plain-text rendering, one block per language.
    pub fn to_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        for (lang, s) in &self.by_lang {
            let arg = s.argumentative;
            let line = |out: &mut String, name: &str, n: usize, of: usize| {
                let _ = writeln!(out, "  {name:<34}{n:>7}  ({:.1}%)", percent(n, of));
            };
            let _ = writeln!(out, "[{}]", lang.code());
            let _ = writeln!(out, "  {:<34}{:>7}", "tweets", s.tweets);
            let _ = writeln!(out, "  {:<34}{:>7}", "words", s.words.total);
            line(&mut out, "non-argumentative", s.non_argumentative, s.tweets);
            line(&mut out, "argumentative", arg, s.tweets);
            line(
                &mut out,
                "with Collective and Property",
                s.with_collective_property,
                arg,
            );
            line(&mut out, "with pivot", s.with_pivot, arg);
            for (name, n) in [
                ("Justification words", s.words.justification),
                ("Conclusion words", s.words.conclusion),
                ("Collective words", s.words.collective),
                ("Property words", s.words.property),
                ("Pivot words", s.words.pivot),
            ] {
                let _ = writeln!(out, "  {name:<34}{n:>7}");
            }
            for (which, tc) in [
                ("Conclusion", &s.conclusion_types),
                ("Justification", &s.justification_types),
            ] {
                let total = tc.total();
                line(&mut out, &format!("{which} fact"), tc.fact, total);
                line(&mut out, &format!("{which} value"), tc.value, total);
                line(&mut out, &format!("{which} policy"), tc.policy, total);
            }
            for (name, n) in [
                ("counter-narrative A", s.cn_tweets.a),
                ("counter-narrative B", s.cn_tweets.b),
                ("counter-narrative C", s.cn_tweets.c),
                ("counter-narrative D", s.cn_tweets.d),
            ] {
                let _ = writeln!(out, "  {name:<34}{n:>7}");
            }
        }
        out
    }
}

pub fn corpus_stats(corpus: &[AnnotatedTweet]) -> StatsReport {
    let mut report = StatsReport::default();
    for t in corpus {
        report.by_lang.entry(t.doc.lang()).or_default().add(t);
    }
    report
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::standoff::{parse_annotations, Lang};

    const FIG: &str = "Illegals are criminals so deport them all #BuildTheWall";
    // Justification "Illegals are criminals" 0..22, Conclusion "deport them all" 26..41
    // Collective "Illegals" 0..8, Property "criminals" 13..22
    // pivot: "Illegals" (J side) -- "them" (C side)

    fn fig_doc() -> Document {
        Document::new("fig", FIG, Lang::En).unwrap()
    }

    pub(crate) fn well_formed() -> AnnotatedTweet {
        use ComponentKind::*;
        AnnotatedTweet {
            doc: fig_doc(),
            argumentative: true,
            components: vec![
                Component::new(Justification, vec![Span::new(0, 22)]),
                Component::new(Conclusion, vec![Span::new(26, 41)]),
                Component::new(Collective, vec![Span::new(0, 8)]),
                Component::new(Property, vec![Span::new(13, 22)]),
                Component::new(PivotJustificationSide, vec![Span::new(0, 8)]),
                Component::new(PivotConclusionSide, vec![Span::new(33, 37)]),
            ],
            justification_type: Some(PropositionType::Fact),
            conclusion_type: Some(PropositionType::Policy),
            counter_narratives: vec![CounterNarrative {
                cn_type: CnType::A,
                text: "Being undocumented is not a crime.".into(),
            }],
        }
    }

    fn codes(t: &AnnotatedTweet) -> Vec<IssueCode> {
        validate(t).into_iter().map(|i| i.code).collect()
    }

    #[test]
    fn figure_layout_slices() {
        let d = fig_doc();
        assert_eq!(d.slice(0, 22), "Illegals are criminals");
        assert_eq!(d.slice(26, 41), "deport them all");
        assert_eq!(d.slice(33, 37), "them");
    }

    #[test]
    fn empty_annotations_give_non_argumentative() {
        let t = from_raw(fig_doc(), &[], &MappingConfig::default()).unwrap();
        assert!(!t.argumentative);
        assert!(t.components.is_empty());
        assert!(validate(&t).is_empty());
    }

    #[test]
    fn from_raw_reads_types_and_notes() {
        let ann = "T1\tJustification 0 22\tIllegals are criminals\n\
                   T2\tConclusion 26 41\tdeport them all\n\
                   A1\tType T1 Fact\nA2\tType T2 Policy\n\
                   #1\tCN-A T2\tNo.\n#2\tAnnotatorNotes T2\tunsure\n";
        let raw = parse_annotations(ann.as_bytes(), &fig_doc()).unwrap();
        let t = from_raw(fig_doc(), &raw, &MappingConfig::default()).unwrap();
        assert!(t.argumentative);
        assert_eq!(t.justification_type, Some(PropositionType::Fact));
        assert_eq!(t.conclusion_type, Some(PropositionType::Policy));
        assert_eq!(t.counter_narratives.len(), 1);
        assert_eq!(codes(&t), vec![]);
    }

    #[test]
    fn unknown_label_is_an_error() {
        let raw = parse_annotations(b"T1\tPremise 0 8\tIllegals", &fig_doc()).unwrap();
        let err = from_raw(fig_doc(), &raw, &MappingConfig::default()).unwrap_err();
        assert_eq!(
            err,
            SchemeError::UnknownLabel {
                tweet_id: "fig".into(),
                label: "Premise".into()
            }
        );
    }

    #[test]
    fn pivot_side_resolved_by_containment() {
        let ann = "T1\tJustification 0 22\tIllegals are criminals\n\
                   T2\tConclusion 26 41\tdeport them all\n\
                   T3\tPivot 0 8\tIllegals\nT4\tPivot 33 37\tthem\n";
        let raw = parse_annotations(ann.as_bytes(), &fig_doc()).unwrap();
        let t = from_raw(fig_doc(), &raw, &MappingConfig::default()).unwrap();
        assert_eq!(t.components[2].kind, ComponentKind::PivotJustificationSide);
        assert_eq!(t.components[3].kind, ComponentKind::PivotConclusionSide);
    }

    #[test]
    fn well_formed_has_no_issues() {
        assert_eq!(validate(&well_formed()), vec![]);
    }

    #[test]
    fn duplicate_conclusion() {
        let mut t = well_formed();
        t.components.push(Component::new(
            ComponentKind::Conclusion,
            vec![Span::new(42, 55)],
        ));
        assert_eq!(codes(&t), vec![IssueCode::DuplicateConclusion]);
    }

    #[test]
    fn unpaired_collective() {
        let mut t = well_formed();
        t.components.retain(|c| c.kind != ComponentKind::Property);
        assert_eq!(codes(&t), vec![IssueCode::UnpairedCollective]);
    }

    #[test]
    fn property_collective_overlap_is_warning() {
        let mut t = well_formed();
        for c in &mut t.components {
            if c.kind == ComponentKind::Property {
                c.fragments = vec![Span::new(5, 22)];
            }
        }
        let issues = validate(&t);
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].code, IssueCode::PropertyCollectiveOverlap);
        assert_eq!(issues[0].severity, Severity::Warning);
    }

    #[test]
    fn uncovered_hashtag_is_fine() {
        // "#BuildTheWall" lies outside every component
        assert!(validate(&well_formed()).is_empty());
    }

    #[test]
    fn permutation_does_not_change_issues() {
        let mut t = well_formed();
        t.components.push(Component::new(
            ComponentKind::Collective,
            vec![Span::new(42, 55)],
        ));
        t.components.push(Component::new(
            ComponentKind::Conclusion,
            vec![Span::new(23, 25)],
        ));
        let before = validate(&t);
        t.components.reverse();
        assert_eq!(validate(&t), before);
        assert_eq!(validate(&t), validate(&t));
    }

    #[test]
    fn raw_round_trip_validates_identically() {
        let t = well_formed();
        let mapping = MappingConfig::default();
        let raw = to_raw(&t, &mapping);
        let text = crate::standoff::serialize_annotations(&raw);
        let reparsed = parse_annotations(text.as_bytes(), &t.doc).unwrap();
        let back = from_raw(t.doc.clone(), &reparsed, &mapping).unwrap();
        assert_eq!(validate(&back), validate(&t));
        assert_eq!(back.components.len(), t.components.len());
        assert_eq!(back.counter_narratives, t.counter_narratives);
    }

    #[test]
    fn stats_on_empty_corpus_are_zero() {
        let r = corpus_stats(&[]);
        assert_eq!(r.lang(Lang::En), LangStats::default());
        assert_eq!(r.lang(Lang::Es), LangStats::default());
    }

    #[test]
    fn stats_count_words_and_types() {
        let t = well_formed();
        let n =
            AnnotatedTweet::non_argumentative(Document::new("n", "No to camps", Lang::En).unwrap());
        let r = corpus_stats(&[t, n]);
        let s = r.lang(Lang::En);
        assert_eq!(s.tweets, 2);
        assert_eq!(s.argumentative, 1);
        assert_eq!(s.non_argumentative, 1);
        assert_eq!(s.with_collective_property, 1);
        assert_eq!(s.with_pivot, 1);
        assert_eq!(s.words.total, 8 + 3);
        assert_eq!(s.words.justification, 3);
        assert_eq!(s.words.conclusion, 3);
        assert_eq!(s.words.collective, 1);
        assert_eq!(s.words.property, 1);
        assert_eq!(s.words.pivot, 2);
        assert_eq!(s.conclusion_types.policy, 1);
        assert_eq!(s.justification_types.fact, 1);
        assert_eq!(
            s.cn_tweets,
            CnCounts {
                a: 1,
                b: 0,
                c: 0,
                d: 0
            }
        );
    }

    #[test]
    fn percentages_match_reported_rounding() {
        // 245 of 970 and the conclusion split of 725
        assert_eq!(format!("{:.1}", percent(245, 970)), "25.3");
        assert_eq!(format!("{:.1}", percent(267, 725)), "36.8");
        assert_eq!(format!("{:.1}", percent(41, 725)), "5.7");
        assert_eq!(format!("{:.1}", percent(417, 725)), "57.5");
        assert_eq!(format!("{:.1}", percent(675, 725)), "93.1");
    }

    #[test]
    fn merge_is_associative() {
        let a = corpus_stats(&[well_formed()]);
        let b = corpus_stats(&[AnnotatedTweet::non_argumentative(
            Document::new("n", "hola", Lang::Es).unwrap(),
        )]);
        let mut ab = a.clone();
        ab.merge(&b);
        let mut ba = b.clone();
        ba.merge(&a);
        assert_eq!(ab, ba);
        assert_eq!(
            ab,
            corpus_stats(&[
                well_formed(),
                AnnotatedTweet::non_argumentative(Document::new("n", "hola", Lang::Es).unwrap())
            ])
        );
    }
}
