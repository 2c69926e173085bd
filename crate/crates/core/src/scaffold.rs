//! Template-based counter-narrative scaffolds built from the annotated
//! components of a tweet. Scaffolds are drafts for a human writer: they
//! quote the tweet's own components inside fixed template wording.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scheme::{AnnotatedTweet, CnType, ComponentKind, PropositionType};

const DEFAULT_TEMPLATES: &str = include_str!("../templates/scaffolds.toml");

#[derive(Debug, Error, PartialEq)]
pub enum ScaffoldError {
    #[error("tweet {0} is not argumentative")]
    NotArgumentative(String),
    #[error("tweet {0} has no justification type")]
    MissingType(String),
    #[error("template {name}: {reason}")]
    Template { name: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Justification,
    Conclusion,
    Collective,
    Property,
    PivotJustification,
    PivotConclusion,
}

impl Slot {
    pub const ALL: [Slot; 6] = [
        Slot::Justification,
        Slot::Conclusion,
        Slot::Collective,
        Slot::Property,
        Slot::PivotJustification,
        Slot::PivotConclusion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Slot::Justification => "justification",
            Slot::Conclusion => "conclusion",
            Slot::Collective => "collective",
            Slot::Property => "property",
            Slot::PivotJustification => "pivot_justification",
            Slot::PivotConclusion => "pivot_conclusion",
        }
    }

    pub fn kind(self) -> ComponentKind {
        match self {
            Slot::Justification => ComponentKind::Justification,
            Slot::Conclusion => ComponentKind::Conclusion,
            Slot::Collective => ComponentKind::Collective,
            Slot::Property => ComponentKind::Property,
            Slot::PivotJustification => ComponentKind::PivotJustificationSide,
            Slot::PivotConclusion => ComponentKind::PivotConclusionSide,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece {
    Text(String),
    Slot(Slot),
}

/// A parsed template: literal text interleaved with slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pieces: Vec<Piece>,
}

impl Template {
    pub fn parse(name: &str, src: &str) -> Result<Template, ScaffoldError> {
        let err = |reason: String| ScaffoldError::Template {
            name: name.to_owned(),
            reason,
        };
        let mut pieces = Vec::new();
        let mut rest = src;
        while let Some(open) = rest.find(['{', '}']) {
            if rest[open..].starts_with('}') {
                return Err(err("unmatched '}'".to_owned()));
            }
            let close = rest[open..]
                .find('}')
                .map(|c| open + c)
                .ok_or_else(|| err("unclosed '{'".to_owned()))?;
            if open > 0 {
                pieces.push(Piece::Text(rest[..open].to_owned()));
            }
            let slot_name = &rest[open + 1..close];
            let slot = Slot::ALL
                .into_iter()
                .find(|s| s.name() == slot_name)
                .ok_or_else(|| err(format!("unknown slot '{slot_name}'")))?;
            pieces.push(Piece::Slot(slot));
            rest = &rest[close + 1..];
        }
        if !rest.is_empty() {
            pieces.push(Piece::Text(rest.to_owned()));
        }
        Ok(Template { pieces })
    }

    /// Slots in order of first use.
    pub fn slots(&self) -> Vec<Slot> {
        let mut out = Vec::new();
        for p in &self.pieces {
            if let Piece::Slot(s) = p {
                if !out.contains(s) {
                    out.push(*s);
                }
            }
        }
        out
    }

    /// The fixed wording, without slots.
    pub fn literal_text(&self) -> Vec<&str> {
        self.pieces
            .iter()
            .filter_map(|p| match p {
                Piece::Text(t) => Some(t.as_str()),
                Piece::Slot(_) => None,
            })
            .collect()
    }

    fn render(&self, fill: impl Fn(Slot) -> String) -> String {
        let mut out = String::new();
        for p in &self.pieces {
            match p {
                Piece::Text(t) => out.push_str(t),
                Piece::Slot(s) => out.push_str(&fill(*s)),
            }
        }
        out
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TemplateFile {
    type_a: String,
    type_a_pivot: String,
    type_b: String,
    type_c_fact: String,
    type_c_value: String,
    type_c_policy: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    pub type_a: Template,
    pub type_a_pivot: Template,
    pub type_b: Template,
    pub type_c_fact: Template,
    pub type_c_value: Template,
    pub type_c_policy: Template,
}

impl TemplateSet {
    pub fn from_toml(src: &str) -> Result<TemplateSet, ScaffoldError> {
        let f: TemplateFile = toml::from_str(src).map_err(|e| ScaffoldError::Template {
            name: "<file>".to_owned(),
            reason: e.to_string(),
        })?;
        Ok(TemplateSet {
            type_a: Template::parse("type_a", &f.type_a)?,
            type_a_pivot: Template::parse("type_a_pivot", &f.type_a_pivot)?,
            type_b: Template::parse("type_b", &f.type_b)?,
            type_c_fact: Template::parse("type_c_fact", &f.type_c_fact)?,
            type_c_value: Template::parse("type_c_value", &f.type_c_value)?,
            type_c_policy: Template::parse("type_c_policy", &f.type_c_policy)?,
        })
    }
}

impl Default for TemplateSet {
    fn default() -> Self {
        TemplateSet::from_toml(DEFAULT_TEMPLATES).expect("bundled templates parse")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotUse {
    Component(ComponentKind),
    JustificationType(PropositionType),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scaffold {
    pub tweet_id: String,
    pub cn_type: CnType,
    pub prompt_text: String,
    pub slots_used: Vec<SlotUse>,
}

/// Result of one scaffold attempt: the scaffold if every required slot
/// was filled, and warnings about degenerate inputs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Drafted {
    pub scaffold: Option<Scaffold>,
    pub warnings: Vec<String>,
}

fn trimmed_surface(t: &AnnotatedTweet, kind: ComponentKind) -> String {
    t.surface(kind).trim().to_owned()
}

/// Fills `template` if every slot it uses has non-empty text. Slots whose
/// component exists but is blank produce a warning.
fn fill(
    t: &AnnotatedTweet,
    cn_type: CnType,
    template: &Template,
    extra: Option<SlotUse>,
) -> Drafted {
    let mut warnings = Vec::new();
    let slots = template.slots();
    let mut values = Vec::new();
    for s in &slots {
        let v = trimmed_surface(t, s.kind());
        if v.is_empty() {
            if t.components_of(s.kind()).next().is_some() {
                warnings.push(format!(
                    "{}: {} is blank, no type {:?} scaffold",
                    t.id(),
                    s.kind(),
                    cn_type
                ));
            }
            return Drafted {
                scaffold: None,
                warnings,
            };
        }
        values.push((*s, v));
    }
    let prompt_text = template.render(|s| {
        values
            .iter()
            .find(|(k, _)| *k == s)
            .map(|(_, v)| v.clone())
            .unwrap_or_default()
    });
    let mut slots_used: Vec<SlotUse> = slots.iter().map(|s| SlotUse::Component(s.kind())).collect();
    slots_used.extend(extra);
    Drafted {
        scaffold: Some(Scaffold {
            tweet_id: t.id().to_owned(),
            cn_type,
            prompt_text,
            slots_used,
        }),
        warnings,
    }
}

fn require_argumentative(t: &AnnotatedTweet) -> Result<(), ScaffoldError> {
    if t.argumentative {
        Ok(())
    } else {
        Err(ScaffoldError::NotArgumentative(t.id().to_owned()))
    }
}

/// Questions that the Justification leads to the Conclusion, and the
/// pivot link when both pivot sides are annotated.
pub fn scaffold_type_a(
    t: &AnnotatedTweet,
    templates: &TemplateSet,
) -> Result<Drafted, ScaffoldError> {
    require_argumentative(t)?;
    let pivot = !trimmed_surface(t, ComponentKind::PivotJustificationSide).is_empty()
        && !trimmed_surface(t, ComponentKind::PivotConclusionSide).is_empty();
    let template = if pivot {
        &templates.type_a_pivot
    } else {
        &templates.type_a
    };
    Ok(fill(t, CnType::A, template, None))
}

/// Attacks the link between Collective and Property. Only for tweets
/// where both are annotated.
pub fn scaffold_type_b(
    t: &AnnotatedTweet,
    templates: &TemplateSet,
) -> Result<Drafted, ScaffoldError> {
    require_argumentative(t)?;
    let annotated = |k| t.components_of(k).next().is_some();
    if !annotated(ComponentKind::Collective) || !annotated(ComponentKind::Property) {
        return Ok(Drafted::default());
    }
    Ok(fill(t, CnType::B, &templates.type_b, None))
}

/// Attacks the Justification according to its proposition type.
pub fn scaffold_type_c(
    t: &AnnotatedTweet,
    templates: &TemplateSet,
) -> Result<Drafted, ScaffoldError> {
    require_argumentative(t)?;
    let ty = t
        .justification_type
        .ok_or_else(|| ScaffoldError::MissingType(t.id().to_owned()))?;
    let template = match ty {
        PropositionType::Fact => &templates.type_c_fact,
        PropositionType::Value => &templates.type_c_value,
        PropositionType::Policy => &templates.type_c_policy,
    };
    Ok(fill(
        t,
        CnType::C,
        template,
        Some(SlotUse::JustificationType(ty)),
    ))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusScaffolds {
    pub scaffolds: Vec<Scaffold>,
    pub warnings: Vec<String>,
}

impl CorpusScaffolds {
    pub fn count(&self, cn_type: CnType) -> usize {
        self.scaffolds
            .iter()
            .filter(|s| s.cn_type == cn_type)
            .count()
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for s in &self.scaffolds {
            out.push_str(&serde_json::to_string(s).expect("scaffold serialize"));
            out.push('\n');
        }
        out
    }

    /// Each tweet followed by its scaffolds.
    pub fn to_text(&self, corpus: &[AnnotatedTweet]) -> String {
        let mut out = String::new();
        for t in corpus {
            let mine: Vec<&Scaffold> = self
                .scaffolds
                .iter()
                .filter(|s| s.tweet_id == t.id())
                .collect();
            if mine.is_empty() {
                continue;
            }
            let _ = writeln!(out, "[{}] {}", t.id(), t.doc.text());
            for s in mine {
                let _ = writeln!(out, "  {:?}: {}", s.cn_type, s.prompt_text);
            }
            out.push('\n');
        }
        out
    }
}

/// Scaffolds of every argumentative tweet. Tweets that cannot get a type C
/// scaffold (no justification type) are reported as warnings.
pub fn scaffold_corpus(corpus: &[AnnotatedTweet], templates: &TemplateSet) -> CorpusScaffolds {
    let mut out = CorpusScaffolds::default();
    for t in corpus.iter().filter(|t| t.argumentative) {
        for f in [scaffold_type_a, scaffold_type_b, scaffold_type_c] {
            match f(t, templates) {
                Ok(d) => {
                    out.scaffolds.extend(d.scaffold);
                    out.warnings.extend(d.warnings);
                }
                Err(e) => out.warnings.push(e.to_string()),
            }
        }
    }
    out
}
