use gecw_core::corpusio::TaggedSentence;
use gecw_core::wo_detect::{train_pos_model, DetectOptions, FlagReason, PosContextModel};
use proptest::prelude::*;

const TAGS: [&str; 5] = ["NOUN", "VERB", "ADJ", "ADV", "PRON"];

fn sentence() -> impl Strategy<Value = TaggedSentence> {
    prop::collection::vec(prop::sample::select(&TAGS[..]).prop_map(String::from), 0..9).prop_map(
        |pos| TaggedSentence {
            tokens: pos.iter().map(|t| t.to_lowercase()).collect(),
            pos,
        },
    )
}

fn rare_flags(m: &PosContextModel, s: &TaggedSentence, t: f64) -> Vec<(usize, usize)> {
    let opts = DetectOptions {
        threshold: t,
        ..DetectOptions::default()
    };
    m.detect_with(&s.pos, &opts)
        .into_iter()
        .filter(|f| f.reason == FlagReason::RareContext)
        .map(|f| (f.start, f.end))
        .collect()
}

proptest! {
    #[test]
    fn lower_threshold_flags_subset(
        train in prop::collection::vec(sentence(), 1..60),
        test in prop::collection::vec(sentence(), 1..10),
        support in 0u64..4,
    ) {
        let m = train_pos_model(&train).unwrap().with_min_support(support);
        for s in &test {
            let low = rare_flags(&m, s, 0.01);
            let mid = rare_flags(&m, s, 0.05);
            let high = rare_flags(&m, s, 0.1);
            prop_assert!(low.iter().all(|f| mid.contains(f)));
            prop_assert!(mid.iter().all(|f| high.contains(f)));
        }
    }

    #[test]
    fn probability_is_one_division(
        train in prop::collection::vec(sentence(), 1..40),
        s in sentence(),
    ) {
        let m = train_pos_model(&train).unwrap().with_min_support(0);
        let opts = DetectOptions { threshold: 1.1, ..DetectOptions::default() };
        let mut padded = vec!["<s>".to_string()];
        padded.extend(s.pos.iter().cloned());
        padded.push("</s>".to_string());
        for f in m.detect_with(&s.pos, &opts) {
            let ctx: [String; 5] = std::array::from_fn(|k| padded[f.start + k].clone());
            let tri: [String; 3] = std::array::from_fn(|k| ctx[k + 1].clone());
            let want = match m.trigram_counts.get(&tri) {
                Some(&t) => *m.context_counts.get(&ctx).unwrap_or(&0) as f64 / t as f64,
                None => 0.0,
            };
            prop_assert_eq!(f.probability, want);
        }
    }

    #[test]
    fn training_ignores_order(
        train in prop::collection::vec(sentence(), 1..40),
        seed in any::<u64>(),
    ) {
        let mut shuffled = train.clone();
        let n = shuffled.len();
        let mut x = seed;
        for i in (1..n).rev() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (x >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(train_pos_model(&train).unwrap(), train_pos_model(&shuffled).unwrap());
    }

    #[test]
    fn contexts_project_onto_trigrams(train in prop::collection::vec(sentence(), 1..40)) {
        let m = train_pos_model(&train).unwrap();
        for (c, &n) in &m.context_counts {
            let tri: [String; 3] = std::array::from_fn(|k| c[k + 1].clone());
            prop_assert!(m.trigram_counts.get(&tri).copied().unwrap_or(0) >= n);
        }
    }
}
