//! Seeded generator of annotated tweets with the same structure as the
//! real corpus. Used by tests and benchmarks when no corpus is at hand.
//!
//! The generator plants the regularities the conditioned models are meant
//! to exploit: collective nouns also occur unlabeled in tweets without a
//! Property, pivots only exist where the conclusion refers back to the
//! collective, and proposition-type cue words occur in both Justification
//! and Conclusion so that only span-restricted features can tell them apart.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scheme::{
    AnnotatedTweet, CnType, Component, ComponentKind, CounterNarrative, PropositionType,
};
use crate::standoff::{Document, Lang, Span};

#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub n_tweets: usize,
    pub seed: u64,
    pub lang: Lang,
    pub id_prefix: String,
    pub argumentative_rate: f64,
    pub collective_property_rate: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_tweets: 100,
            seed: 0,
            lang: Lang::En,
            id_prefix: "syn".to_owned(),
            argumentative_rate: 0.75,
            collective_property_rate: 0.55,
        }
    }
}

const COLLECTIVES: &[&str] = &[
    "immigrants",
    "migrants",
    "refugees",
    "illegals",
    "foreigners",
    "invaders",
    "newcomers",
];
const PROPERTIES: &[&str] = &[
    "criminals",
    "rapists",
    "violent",
    "dangerous",
    "lazy",
    "a burden on taxpayers",
    "stealing our jobs",
    "living off benefits",
    "terrorists",
];
const PLACES: &[&str] = &[
    "Spain", "Europe", "Italy", "Libya", "Greece", "London", "Madrid",
];
const HASHTAGS: &[&str] = &[
    "#BuildTheWall",
    "#StopInvasion",
    "#SendThemBack",
    "#Refugees",
    "#news",
];
const FILLERS: &[&str] = &[
    "every day",
    "again",
    "in our streets",
    "everywhere",
    "this week",
];

/// Type cue frames, shared by Justification and Conclusion.
const FRAMES: [&[&str]; 3] = [
    &[
        "the truth is that ",
        "it is a fact that ",
        "statistics show that ",
    ],
    &[
        "it is disgusting that ",
        "it is shameful that ",
        "I hate that ",
    ],
    &[
        "we must make sure that ",
        "the government should ensure that ",
        "we have to demand that ",
    ],
];
/// Inserted between the collective and its predicate, long enough to keep
/// the predicate outside a two-token window.
const ASIDES: &[&str] = &[
    ", as we all know, ",
    ", like it or not, ",
    ", as everyone can see, ",
];
const PREDICATES: &[&str] = &[
    "arriving every day",
    "in our streets",
    "coming in boats",
    "everywhere now",
    "here to stay",
];
/// Conclusion cores. The `bool` marks cores whose pronoun refers back to
/// the collective.
const CONCLUSIONS: &[(&str, bool)] = &[
    ("they leave", true),
    ("we send them back", true),
    ("they stay out", true),
    ("nobody lets them in", true),
    ("the borders are closed", false),
    ("our towns are protected", false),
    ("crime goes down", false),
];

struct Builder {
    text: String,
    pos: usize,
}

impl Builder {
    fn push(&mut self, s: &str) -> Span {
        let start = self.pos;
        self.text.push_str(s);
        self.pos += s.chars().count();
        Span::new(start, self.pos)
    }
}

fn pick<'a, R: Rng>(rng: &mut R, xs: &'a [&'a str]) -> &'a str {
    xs.choose(rng).copied().expect("non-empty pool")
}

fn draw_type<R: Rng>(rng: &mut R, weights: [f64; 3]) -> PropositionType {
    let r: f64 = rng.gen::<f64>() * weights.iter().sum::<f64>();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if r < acc {
            return PropositionType::ALL[i];
        }
    }
    PropositionType::Policy
}

/// Generates `cfg.n_tweets` tweets. Same config, same corpus.
pub fn generate(cfg: &SyntheticConfig) -> Vec<AnnotatedTweet> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let width = cfg.n_tweets.max(1).to_string().len().max(4);
    (0..cfg.n_tweets)
        .map(|i| {
            let id = format!("{}{:0width$}", cfg.id_prefix, i + 1);
            if rng.gen_bool(cfg.argumentative_rate) {
                argumentative(&mut rng, id, cfg)
            } else {
                non_argumentative(&mut rng, id, cfg.lang)
            }
        })
        .collect()
}

fn non_argumentative<R: Rng>(rng: &mut R, id: String, lang: Lang) -> AnnotatedTweet {
    let coll = pick(rng, COLLECTIVES);
    let place = pick(rng, PLACES);
    let text = match rng.gen_range(0..5) {
        0 => format!("{} arrive in {place} today", capitalize(coll)),
        1 => format!("No to {coll} camps in {place}"),
        2 => format!("Stop the {coll}!"),
        3 => format!("Watching the news about {coll} in {place}"),
        _ => format!(
            "{place} {} {coll} {}",
            pick(rng, &["welcomes", "counts", "registers"]),
            pick(rng, FILLERS)
        ),
    };
    let text = decorate(rng, text);
    AnnotatedTweet::non_argumentative(Document::new(id, text, lang).expect("non-empty"))
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn decorate<R: Rng>(rng: &mut R, mut text: String) -> String {
    if rng.gen_bool(0.5) {
        text.push(' ');
        text.push_str(pick(rng, HASHTAGS));
    }
    if rng.gen_bool(0.3) {
        text.push_str(&format!(
            " https://t.co/{:06x}",
            rng.gen_range(0..0xffffffu32)
        ));
    }
    text
}

struct JustificationParts {
    span: Span,
    collective: Span,
    property: Option<Span>,
}

/// `<frame><collective><aside>are <property or predicate>`
fn justification<R: Rng>(
    rng: &mut R,
    b: &mut Builder,
    ty: PropositionType,
    with_property: bool,
    coll: &str,
) -> JustificationParts {
    let start = b.pos;
    b.push(pick(rng, FRAMES[ty.index()]));
    let collective = b.push(coll);
    b.push(pick(rng, ASIDES));
    b.push("are ");
    let property = if with_property {
        Some(b.push(pick(rng, PROPERTIES)))
    } else {
        b.push(pick(rng, PREDICATES));
        None
    };
    JustificationParts {
        span: Span::new(start, b.pos),
        collective,
        property,
    }
}

/// `<frame><core>`; returns the span and the pronoun span, if any.
fn conclusion<R: Rng>(rng: &mut R, b: &mut Builder, ty: PropositionType) -> (Span, Option<Span>) {
    let start = b.pos;
    b.push(pick(rng, FRAMES[ty.index()]));
    let (core, has_pronoun) = *CONCLUSIONS.choose(rng).expect("non-empty pool");
    let pivot = if has_pronoun {
        let (at, len) = core
            .find("them")
            .map(|i| (i, 4))
            .or_else(|| core.find("they").map(|i| (i, 4)))
            .expect("pronoun present");
        b.push(&core[..at]);
        let p = b.push(&core[at..at + len]);
        b.push(&core[at + len..]);
        Some(p)
    } else {
        b.push(core);
        None
    };
    (Span::new(start, b.pos), pivot)
}

fn argumentative<R: Rng>(rng: &mut R, id: String, cfg: &SyntheticConfig) -> AnnotatedTweet {
    let jtype = draw_type(rng, [0.4, 0.3, 0.3]);
    let ctype = draw_type(rng, [0.3, 0.3, 0.4]);
    let with_property = rng.gen_bool(cfg.collective_property_rate);
    let coll = pick(rng, COLLECTIVES);

    let mut b = Builder {
        text: String::new(),
        pos: 0,
    };
    if rng.gen_bool(0.2) {
        b.push(&format!("@user{} ", rng.gen_range(1..500)));
    }
    let j_first = rng.gen_bool(0.7);
    let (j, c, pivot_c) = if j_first {
        let j = justification(rng, &mut b, jtype, with_property, coll);
        b.push(pick(rng, &[" so ", ", therefore ", ". ", " and so "]));
        let (c, p) = conclusion(rng, &mut b, ctype);
        (j, c, p)
    } else {
        let (c, p) = conclusion(rng, &mut b, ctype);
        b.push(pick(rng, &[" because ", " since "]));
        let j = justification(rng, &mut b, jtype, with_property, coll);
        (j, c, p)
    };
    if rng.gen_bool(0.5) {
        b.push(pick(rng, &["!", ".", "!!"]));
    }
    let text = decorate(rng, b.text);

    let mut components = vec![
        Component::new(ComponentKind::Justification, vec![j.span]),
        Component::new(ComponentKind::Conclusion, vec![c]),
    ];
    if let Some(p) = j.property {
        components.push(Component::new(
            ComponentKind::Collective,
            vec![j.collective],
        ));
        components.push(Component::new(ComponentKind::Property, vec![p]));
    }
    if let Some(pc) = pivot_c {
        components.push(Component::new(
            ComponentKind::PivotJustificationSide,
            vec![j.collective],
        ));
        components.push(Component::new(ComponentKind::PivotConclusionSide, vec![pc]));
    }

    let doc = Document::new(id, text, cfg.lang).expect("non-empty");
    let j_surface = doc.slice_span(j.span).to_owned();
    let c_surface = doc.slice_span(c).to_owned();
    let mut counter_narratives = Vec::new();
    if rng.gen_bool(0.96) {
        counter_narratives.push(CounterNarrative {
            cn_type: CnType::A,
            text: format!("Even if {j_surface}, that does not mean {c_surface}."),
        });
    }
    if let Some(p) = j.property {
        if rng.gen_bool(0.8) {
            counter_narratives.push(CounterNarrative {
                cn_type: CnType::B,
                text: format!(
                    "Not all {} are {}.",
                    doc.slice_span(j.collective),
                    doc.slice_span(p)
                ),
            });
        }
    }
    if rng.gen_bool(0.9) {
        counter_narratives.push(CounterNarrative {
            cn_type: CnType::C,
            text: format!("Where does the claim that {j_surface} come from?"),
        });
    }
    if rng.gen_bool(0.05) {
        counter_narratives.push(CounterNarrative {
            cn_type: CnType::D,
            text: "Most people who arrive are looking for work and safety.".to_owned(),
        });
    }

    AnnotatedTweet {
        doc,
        argumentative: true,
        components,
        justification_type: Some(jtype),
        conclusion_type: Some(ctype),
        counter_narratives,
    }
}
