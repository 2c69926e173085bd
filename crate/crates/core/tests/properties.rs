use cnarg_core::experiments::{make_splits, split_sizes};
use cnarg_core::scaffold::{scaffold_corpus, TemplateSet};
use cnarg_core::scheme::{corpus_stats, from_raw, to_raw, MappingConfig};
use cnarg_core::standoff::{parse_annotations, serialize_annotations};
use cnarg_core::synthetic::{generate, SyntheticConfig};
use proptest::prelude::*;

fn synthetic(n: usize, seed: u64) -> Vec<cnarg_core::AnnotatedTweet> {
    generate(&SyntheticConfig {
        n_tweets: n,
        seed,
        ..SyntheticConfig::default()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tweets_survive_standoff_round_trip(seed in any::<u64>()) {
        let mapping = MappingConfig::default();
        for t in synthetic(12, seed) {
            let raw = to_raw(&t, &mapping);
            let text = serialize_annotations(&raw);
            let parsed = parse_annotations(text.as_bytes(), &t.doc).unwrap();
            prop_assert_eq!(&parsed, &raw);
            let mut back = from_raw(t.doc.clone(), &parsed, &mapping).unwrap();
            // source ids are the annotation ids assigned on write
            for c in &mut back.components {
                c.source_id.clear();
            }
            prop_assert_eq!(back, t);
        }
    }

    #[test]
    fn stats_merge_matches_whole_corpus(seed in any::<u64>(), cut in 0usize..40) {
        let c = synthetic(40, seed);
        let mut left = corpus_stats(&c[..cut]);
        left.merge(&corpus_stats(&c[cut..]));
        prop_assert_eq!(left, corpus_stats(&c));
    }

    #[test]
    fn splits_partition_the_corpus(n in 10usize..400, seed in any::<u64>()) {
        let c = synthetic(n, 1);
        let s = make_splits(&c, seed).unwrap();
        let (tr, dv, te) = split_sizes(n);
        prop_assert_eq!((s.train.len(), s.dev.len(), s.test.len()), (tr, dv, te));
        let mut all: Vec<usize> = s.train.iter().chain(&s.dev).chain(&s.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn scaffolds_only_add_template_text(seed in any::<u64>()) {
        let templates = TemplateSet::default();
        let all = [
            &templates.type_a, &templates.type_a_pivot, &templates.type_b,
            &templates.type_c_fact, &templates.type_c_value, &templates.type_c_policy,
        ];
        let c = synthetic(20, seed);
        for s in &scaffold_corpus(&c, &templates).scaffolds {
            let t = c.iter().find(|t| t.id() == s.tweet_id).unwrap();
            let ok = all.iter().any(|tpl| {
                fills(&s.prompt_text, &tpl.literal_text())
                    .is_some_and(|f| f.iter().all(|x| from_tweet(x, t.doc.text())))
            });
            prop_assert!(ok, "unexpected text in {}", s.prompt_text);
        }
    }
}

/// Splits `prompt` at the template literals, in order; returns the gaps.
fn fills<'a>(prompt: &'a str, literals: &[&str]) -> Option<Vec<&'a str>> {
    let (first, rest) = literals.split_first()?;
    let mut at = prompt.strip_prefix(first).map(|_| first.len())?;
    let mut gaps = Vec::new();
    for (i, lit) in rest.iter().enumerate() {
        let found = if i + 1 == rest.len() {
            prompt[at..]
                .ends_with(lit)
                .then(|| prompt.len() - lit.len() - at)?
        } else {
            prompt[at..].find(lit)?
        };
        gaps.push(&prompt[at..at + found]);
        at += found + lit.len();
    }
    (at == prompt.len()).then_some(gaps)
}

/// Fillers are tweet fragments joined by single spaces.
fn from_tweet(fill: &str, text: &str) -> bool {
    !fill.is_empty() && fill.split(' ').all(|w| text.contains(w))
}
