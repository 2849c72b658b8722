use std::collections::HashMap;

use gecw_core::ngram_lm::{train, NGramModel};
use gecw_core::spellkit::{
    correct_sentence, load_replacement_list, CandidateIndex, CorrectionPolicy, ReplacementList,
};
use proptest::prelude::*;

mod support;
use support::dl;

#[test]
fn dl_oracle_sanity() {
    assert_eq!(dl("ca", "abc"), 2);
    assert_eq!(dl("koli", "kool"), 2);
    assert_eq!(dl("koli", "kooli"), 1);
    assert_eq!(dl("lähen", "lähne"), 1);
    assert_eq!(dl("", "abc"), 3);
}

fn brute(vocab: &[String], word: &str, max: usize) -> Vec<(String, usize)> {
    let mut v: Vec<(String, usize)> = vocab
        .iter()
        .map(|w| (w.clone(), dl(word, w)))
        .filter(|(_, d)| *d <= max)
        .collect();
    v.sort();
    v.dedup();
    v
}

fn small_word() -> impl Strategy<Value = String> {
    "[aäkl]{0,6}"
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn candidates_equal_brute_force(
        vocab in prop::collection::vec(small_word(), 1..=500),
        queries in prop::collection::vec(small_word(), 1..30),
        max in 1usize..=2,
    ) {
        let idx = CandidateIndex::new(vocab.iter().cloned());
        for q in queries.iter().chain(vocab.iter().take(20)) {
            let mut got: Vec<(String, usize)> = idx
                .candidates(q, max)
                .into_iter()
                .map(|(id, d)| (idx.word(id).to_string(), d))
                .collect();
            got.sort();
            prop_assert_eq!(got, brute(&vocab, q, max), "query {:?}", q);
        }
    }

    #[test]
    fn replacement_length_rule(
        entries in prop::collection::vec(
            (prop::collection::vec("[abc]", 1..3), prop::collection::vec("[xyz]", 1..3)),
            0..6,
        ),
        input in prop::collection::vec("[abcx]", 0..12),
    ) {
        let list = ReplacementList::new(entries);
        let (out, edits) = list.apply_with_edits(&input);
        let delta: isize = edits.iter().map(|e| e.length_delta()).sum();
        prop_assert_eq!(out.len() as isize, input.len() as isize + delta);
        // matched spans are disjoint and left to right
        for w in edits.windows(2) {
            prop_assert!(w[0].end <= w[1].start);
        }
    }
}

fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

fn desk_model() -> NGramModel {
    let mut data = Vec::new();
    for _ in 0..30 {
        data.push(toks("väga hea"));
        data.push(toks("see on väga hea"));
        data.push(toks("ma lähen koju"));
        data.push(toks("ta läheb koju"));
    }
    data.push(toks("ta on vaga"));
    train(&data, 3).unwrap()
}

#[test]
fn corrector_is_idempotent_on_fixtures() {
    let m = desk_model();
    let idx = CandidateIndex::from_model(&m);
    let p = CorrectionPolicy::default();
    for s in [
        "vaga hea",
        "ma läjen koju",
        "see on vaga hae",
        "ta lähen koju",
        "väga hea",
        "kõik on korras",
    ] {
        let (once, _) = correct_sentence(&toks(s), &m, &idx, &p);
        let (twice, applied) = correct_sentence(&once, &m, &idx, &p);
        assert_eq!(once, twice, "{s}");
        assert!(applied.is_empty());
    }
}

#[test]
fn infinite_margin_and_zero_distance() {
    let m = desk_model();
    let idx = CandidateIndex::from_model(&m);
    let input = toks("vaga hea ta lähen koju");
    let strict = CorrectionPolicy {
        margin: f64::INFINITY,
        ..CorrectionPolicy::default()
    };
    assert_eq!(correct_sentence(&input, &m, &idx, &strict).0, input);
    let frozen = CorrectionPolicy {
        max_edit_distance_oov: 0,
        max_edit_distance_vocab: 0,
        ..CorrectionPolicy::default()
    };
    assert_eq!(correct_sentence(&input, &m, &idx, &frozen).0, input);
}

/// Counts and interpolated probabilities recomputed from the raw sentences.
struct HandLm {
    grams: HashMap<Vec<String>, f64>,
    total: f64,
    sentences: f64,
    outcomes: f64,
}

impl HandLm {
    fn new(data: &[Vec<String>]) -> HandLm {
        let mut grams = HashMap::new();
        let mut vocab = std::collections::HashSet::new();
        let mut total = 0.0;
        for s in data {
            let mut p = vec!["<s>".to_string(), "<s>".to_string()];
            p.extend(s.iter().cloned());
            p.push("</s>".to_string());
            vocab.extend(s.iter().cloned());
            for pos in 2..p.len() {
                total += 1.0;
                for n in 1..=3 {
                    *grams.entry(p[pos + 1 - n..=pos].to_vec()).or_insert(0.0) += 1.0;
                }
            }
        }
        HandLm {
            grams,
            total,
            sentences: data.len() as f64,
            outcomes: vocab.len() as f64 + 2.0,
        }
    }

    fn c(&self, g: &[&str]) -> f64 {
        let g: Vec<String> = g.iter().map(|s| s.to_string()).collect();
        *self.grams.get(&g).unwrap_or(&0.0)
    }

    fn p(&self, h2: &str, h1: &str, w: &str) -> f64 {
        let d = 0.01;
        let v = self.outcomes;
        let uni = (self.c(&[w]) + d) / (self.total + d * v);
        let h1c = if h1 == "<s>" {
            self.sentences
        } else {
            self.c(&[h1])
        };
        let bi = (self.c(&[h1, w]) + d) / (h1c + d * v);
        let h2c = if h2 == "<s>" && h1 == "<s>" {
            self.sentences
        } else {
            self.c(&[h2, h1])
        };
        let tri = (self.c(&[h2, h1, w]) + d) / (h2c + d * v);
        0.1 * uni + 0.3 * bi + 0.6 * tri
    }
}

#[test]
fn real_word_error_matches_hand_scoring() {
    let mut data = Vec::new();
    for _ in 0..30 {
        data.push(toks("väga hea"));
        data.push(toks("see on väga hea"));
        data.push(toks("ma lähen koju"));
        data.push(toks("ta läheb koju"));
    }
    data.push(toks("ta on vaga"));
    let hand = HandLm::new(&data);
    // positions 0 and 1 and the end marker see the first token
    let local = |w: &str| {
        (hand.p("<s>", "<s>", w) * hand.p("<s>", w, "hea") * hand.p(w, "hea", "</s>")).ln()
    };
    let keep = local("vaga");
    let swap = local("väga") - 4.0;
    // "vaga" is a real word, so the margin applies
    let hand_decision = swap > keep + 2.0;
    assert!(hand_decision, "fixture should favour the correction");

    let m = train(&data, 3).unwrap();
    let idx = CandidateIndex::from_model(&m);
    let (out, applied) =
        correct_sentence(&toks("vaga hea"), &m, &idx, &CorrectionPolicy::default());
    assert_eq!(out, toks("väga hea"));
    assert_eq!(applied.len(), 1);
    assert!((m.prob(&["<s>"; 0], "vaga") - hand.p("<s>", "<s>", "vaga")).abs() < 1e-12);
}

#[test]
fn oov_hand_scoring() {
    let mut data = Vec::new();
    for _ in 0..25 {
        data.push(toks("ma lähen koju"));
        data.push(toks("ta läheb koju"));
    }
    let hand = HandLm::new(&data);
    let local = |w: &str| {
        (hand.p("<s>", "ma", w) * hand.p("ma", w, "koju") * hand.p(w, "koju", "</s>")).ln()
    };
    let lahen = local("lähen") - 4.0;
    let laheb = local("läheb") - 4.0 * 2.0;
    assert!(lahen > laheb && lahen > local("läjen"));
    let m = train(&data, 3).unwrap();
    let idx = CandidateIndex::from_model(&m);
    let (out, _) = correct_sentence(
        &toks("ma läjen koju"),
        &m,
        &idx,
        &CorrectionPolicy::default(),
    );
    assert_eq!(out, toks("ma lähen koju"));
}

#[test]
fn replacement_list_then_statistics() {
    let (list, _) = load_replacement_list("kuidagimoodi\tkuidagi moodi\n").unwrap();
    let out = list.apply(&toks("see on kuidagimoodi"));
    assert_eq!(out, toks("see on kuidagi moodi"));
}
