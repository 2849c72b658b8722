//! Reference implementations shared by the integration tests. Nothing here
//! calls into the scorer or the spelling index.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use gecw_core::corpusio::{apply_edits, validate_edits, AnnotatedSentence, Edit};
use gecw_core::taxonomy::{BaseLabel, ErrorLabel};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const MAX_SPAN: usize = 4;

#[derive(Clone, Copy, PartialEq, Debug)]
pub enum Step {
    Keep,
    Sub,
    Ins,
    Del,
}

pub fn cost(src: &[String], hyp: &[String], i: usize, j: usize, step: Step) -> Option<u32> {
    match step {
        Step::Keep => (i < src.len() && j < hyp.len() && src[i] == hyp[j]).then_some(0),
        Step::Sub => {
            if i < src.len() && j < hyp.len() && src[i] != hyp[j] {
                Some(if src[i].to_lowercase() == hyp[j].to_lowercase() {
                    1
                } else {
                    2
                })
            } else {
                None
            }
        }
        Step::Ins => (j < hyp.len()).then_some(2),
        Step::Del => (i < src.len()).then_some(2),
    }
}

pub fn advance(i: usize, j: usize, step: Step) -> (usize, usize) {
    match step {
        Step::Keep | Step::Sub => (i + 1, j + 1),
        Step::Ins => (i, j + 1),
        Step::Del => (i + 1, j),
    }
}

pub fn min_cost(
    src: &[String],
    hyp: &[String],
    i: usize,
    j: usize,
    memo: &mut HashMap<(usize, usize), u32>,
) -> u32 {
    if i == src.len() && j == hyp.len() {
        return 0;
    }
    if let Some(&c) = memo.get(&(i, j)) {
        return c;
    }
    let mut best = u32::MAX;
    for step in [Step::Keep, Step::Sub, Step::Ins, Step::Del] {
        if let Some(c) = cost(src, hyp, i, j, step) {
            let (a, b) = advance(i, j, step);
            best = best.min(c + min_cost(src, hyp, a, b, memo));
        }
    }
    memo.insert((i, j), best);
    best
}

/// Every optimal sequence as a list of `(step, i, j)`.
pub fn optimal_sequences(src: &[String], hyp: &[String]) -> Vec<Vec<(Step, usize, usize)>> {
    let mut memo = HashMap::new();
    let total = min_cost(src, hyp, 0, 0, &mut memo);
    let mut out = Vec::new();
    let mut stack = vec![(0usize, 0usize, 0u32, Vec::new())];
    while let Some((i, j, spent, seq)) = stack.pop() {
        if i == src.len() && j == hyp.len() {
            out.push(seq);
            continue;
        }
        for step in [Step::Keep, Step::Sub, Step::Ins, Step::Del] {
            if let Some(c) = cost(src, hyp, i, j, step) {
                let (a, b) = advance(i, j, step);
                if spent + c + min_cost(src, hyp, a, b, &mut memo) == total {
                    let mut s = seq.clone();
                    s.push((step, i, j));
                    stack.push((a, b, spent + c, s));
                }
            }
        }
    }
    out
}

/// A hypothesis edit with its hypothesis coordinates.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct HypEdit {
    pub s: usize,
    pub e: usize,
    pub hs: usize,
    pub he: usize,
    pub corr: Vec<String>,
}

/// All partitions of one run of changed steps into groups of bounded
/// source span, with no two adjacent pure insertions.
pub fn groupings(run: &[(Step, usize, usize)]) -> Vec<Vec<(usize, usize)>> {
    if run.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for cut in 1..=run.len() {
        let src_span = run[..cut].iter().filter(|s| s.0 != Step::Ins).count();
        if src_span > MAX_SPAN {
            break;
        }
        for rest in groupings(&run[cut..]) {
            let mut g = vec![(0, cut)];
            g.extend(rest.into_iter().map(|(a, b)| (a + cut, b + cut)));
            out.push(g);
        }
    }
    out
}

pub fn is_pure_insertion(run: &[(Step, usize, usize)]) -> bool {
    run.iter().all(|s| s.0 == Step::Ins)
}

pub fn edit_sets(src: &[String], hyp: &[String]) -> (BTreeSet<Vec<HypEdit>>, Vec<BTreeSet<usize>>) {
    let mut sets = BTreeSet::new();
    let mut boundary: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); src.len() + 1];
    for seq in optimal_sequences(src, hyp) {
        for &(_, i, j) in &seq {
            boundary[i].insert(j);
        }
        boundary[src.len()].insert(hyp.len());
        // split into maximal runs of changed steps
        let mut runs: Vec<Vec<(Step, usize, usize)>> = Vec::new();
        let mut cur = Vec::new();
        for &st in &seq {
            if st.0 == Step::Keep {
                if !cur.is_empty() {
                    runs.push(std::mem::take(&mut cur));
                }
            } else {
                cur.push(st);
            }
        }
        if !cur.is_empty() {
            runs.push(cur);
        }
        let mut partial: Vec<Vec<HypEdit>> = vec![vec![]];
        for run in &runs {
            let mut next = Vec::new();
            for g in groupings(run) {
                let ok = g.windows(2).all(|w| {
                    !(is_pure_insertion(&run[w[0].0..w[0].1])
                        && is_pure_insertion(&run[w[1].0..w[1].1]))
                });
                if !ok {
                    continue;
                }
                let edits: Vec<HypEdit> = g
                    .iter()
                    .map(|&(a, b)| {
                        let first = run[a];
                        let last = run[b - 1];
                        let (ei, ej) = advance(last.1, last.2, last.0);
                        HypEdit {
                            s: first.1,
                            e: ei,
                            hs: first.2,
                            he: ej,
                            corr: hyp[first.2..ej].to_vec(),
                        }
                    })
                    .collect();
                for p in &partial {
                    let mut q = p.clone();
                    q.extend(edits.iter().cloned());
                    next.push(q);
                }
            }
            partial = next;
        }
        for mut p in partial {
            p.sort();
            sets.insert(p);
        }
    }
    (sets, boundary)
}

pub fn overlaps(a: (usize, usize), b: (usize, usize)) -> bool {
    if a.0 == a.1 && b.0 == b.1 {
        a.0 == b.0
    } else {
        a.0 < b.1 && b.0 < a.1
    }
}

pub fn inside(outer: &Edit, inner: &Edit) -> bool {
    overlaps((outer.start, outer.end), (inner.start, inner.end))
        && outer.start <= inner.start
        && inner.end <= outer.end
}

/// `(tp, fp, fn)` for one annotator.
pub fn oracle_annotator(src: &[String], hyp: &[String], gold: &[Edit]) -> (u64, u64, u64) {
    let (sets, boundary) = edit_sets(src, hyp);
    let wo: Vec<&Edit> = gold.iter().filter(|g| g.label.is_word_order()).collect();
    let plain: Vec<&Edit> = gold.iter().filter(|g| !g.label.is_word_order()).collect();

    let mut regions = Vec::new();
    for g in &wo {
        let swaps: Vec<(String, String)> = plain
            .iter()
            .filter(|n| inside(g, n) && n.end == n.start + 1 && n.correction.len() == 1)
            .map(|n| (src[n.start].clone(), n.correction[0].clone()))
            .collect();
        let equal = |h: &String, c: &String| {
            h == c
                || swaps
                    .iter()
                    .any(|(o, k)| (h == o && c == k) || (h == k && c == o))
        };
        let mut found = None;
        'search: for &hs in &boundary[g.start] {
            for &he in boundary[g.end].iter().rev() {
                if he >= hs
                    && he - hs == g.correction.len()
                    && (0..he - hs).all(|k| equal(&hyp[hs + k], &g.correction[k]))
                {
                    found = Some((hs, he));
                    break 'search;
                }
            }
        }
        if let Some((hs, he)) = found {
            regions.push((g.start, g.end, hs, he));
        }
    }

    let mut best: Option<(u64, u64)> = None;
    for set in &sets {
        let mut tp = 0;
        let mut fp = 0;
        for h in set {
            if plain
                .iter()
                .any(|g| g.start == h.s && g.end == h.e && g.correction == h.corr)
            {
                tp += 1;
            } else if !regions
                .iter()
                .any(|&(s, e, hs, he)| s <= h.s && h.e <= e && hs <= h.hs && h.he <= he)
            {
                fp += 1;
            }
        }
        if best.is_none_or(|(btp, bfp)| tp > btp || (tp == btp && fp < bfp)) {
            best = Some((tp, fp));
        }
    }
    let (tp, fp) = best.unwrap_or((0, 0));
    let tp = tp + regions.len() as u64;
    (tp, fp, gold.len() as u64 - tp)
}

/// F0.5 as an exact fraction `5tp / (5tp + fn + 4fp)`.
pub fn f_frac(c: (u64, u64, u64)) -> (u64, u64) {
    let num = 5 * c.0;
    let den = 5 * c.0 + c.2 + 4 * c.1;
    if den == 0 {
        (1, 1)
    } else {
        (num, den)
    }
}

pub fn f_greater(a: (u64, u64, u64), b: (u64, u64, u64)) -> bool {
    let (an, ad) = f_frac(a);
    let (bn, bd) = f_frac(b);
    an * bd > bn * ad
}

/// Per-sentence `(annotator, counts)` under running selection.
pub fn oracle_corpus(
    gold: &[AnnotatedSentence],
    hyps: &[Vec<String>],
) -> Vec<(u32, (u64, u64, u64))> {
    let mut running = (0, 0, 0);
    let mut out = Vec::new();
    for (s, h) in gold.iter().zip(hyps) {
        let mut cands: Vec<(u32, (u64, u64, u64))> = s
            .annotations
            .iter()
            .map(|(&a, edits)| {
                let edits: Vec<Edit> = edits
                    .iter()
                    .filter(|e| e.label != ErrorLabel::Noop)
                    .cloned()
                    .collect();
                (a, oracle_annotator(&s.source, h, &edits))
            })
            .collect();
        if cands.is_empty() {
            cands.push((0, oracle_annotator(&s.source, h, &[])));
        }
        let mut pick = cands[0];
        for &c in &cands[1..] {
            let with = |x: (u64, u64, u64)| (running.0 + x.0, running.1 + x.1, running.2 + x.2);
            if f_greater(with(c.1), with(pick.1)) {
                pick = c;
            }
        }
        running = (
            running.0 + pick.1 .0,
            running.1 + pick.1 .1,
            running.2 + pick.1 .2,
        );
        out.push(pick);
    }
    out
}

const VOCAB: [&str; 7] = ["a", "b", "c", "d", "A", "x", "y"];

pub fn word(rng: &mut ChaCha8Rng) -> String {
    VOCAB[rng.random_range(0..VOCAB.len())].to_string()
}

pub fn random_gold(rng: &mut ChaCha8Rng, src: &[String], annotator: u32) -> Vec<Edit> {
    let n = src.len();
    let mut edits: Vec<Edit> = Vec::new();
    if n >= 2 && rng.random_bool(0.25) {
        // a word-order edit with an optional nested form fix
        let len = rng.random_range(2..=n.min(3));
        let s = rng.random_range(0..=n - len);
        let mut corr: Vec<String> = src[s..s + len].to_vec();
        corr.rotate_left(1);
        if rng.random_bool(0.5) {
            let k = rng.random_range(s..s + len);
            let fixed = word(rng);
            if fixed != src[k] {
                let pos = corr.iter().position(|t| *t == src[k]).unwrap();
                corr[pos] = fixed.clone();
                edits.push(Edit::new(
                    k,
                    k + 1,
                    ErrorLabel::simple(BaseLabel::VerbForm),
                    vec![fixed],
                    annotator,
                ));
            }
        }
        if corr != src[s..s + len] {
            edits.push(Edit::new(
                s,
                s + len,
                ErrorLabel::simple(BaseLabel::WordOrder),
                corr,
                annotator,
            ));
        } else {
            edits.clear();
        }
    }
    let want = rng.random_range(0..=3usize);
    for _ in 0..20 {
        if edits.len() >= want {
            break;
        }
        let s = rng.random_range(0..=n);
        let len = rng.random_range(0..=2usize.min(n - s));
        let clen = rng.random_range(0..=2usize);
        if len == 0 && clen == 0 {
            continue;
        }
        let corr: Vec<String> = (0..clen).map(|_| word(rng)).collect();
        if corr == src[s..s + len] {
            continue;
        }
        let e = Edit::new(
            s,
            s + len,
            ErrorLabel::simple(BaseLabel::Lexical),
            corr,
            annotator,
        );
        let mut trial = edits.clone();
        trial.push(e);
        if validate_edits(n, &trial).is_ok() {
            edits = trial;
        }
    }
    edits
}

pub fn random_hyp(rng: &mut ChaCha8Rng, s: &AnnotatedSentence) -> Vec<String> {
    let mut hyp = match rng.random_range(0..4) {
        0 => s.source.clone(),
        1 | 2 => {
            let edits = &s.annotations[&0];
            let subset: Vec<Edit> = edits
                .iter()
                .filter(|e| e.label.is_word_order() || rng.random_bool(0.7))
                .cloned()
                .collect();
            apply_edits(&s.source, &subset).unwrap()
        }
        _ => s.source.clone(),
    };
    // a few random perturbations
    for _ in 0..rng.random_range(0..3) {
        match rng.random_range(0..3) {
            0 if !hyp.is_empty() => {
                let k = rng.random_range(0..hyp.len());
                hyp[k] = word(rng);
            }
            1 if hyp.len() < 10 => {
                let k = rng.random_range(0..=hyp.len());
                hyp.insert(k, word(rng));
            }
            2 if !hyp.is_empty() => {
                let k = rng.random_range(0..hyp.len());
                hyp.remove(k);
            }
            _ => {}
        }
    }
    hyp
}

pub fn random_fixture(rng: &mut ChaCha8Rng) -> (Vec<AnnotatedSentence>, Vec<Vec<String>>) {
    let mut gold = Vec::new();
    let mut hyps = Vec::new();
    for _ in 0..rng.random_range(1..=3) {
        let n = rng.random_range(1..=8);
        let src: Vec<String> = (0..n).map(|_| word(rng)).collect();
        let mut s = AnnotatedSentence::new(src.clone());
        for a in 0..rng.random_range(1..=2u32) {
            let g = random_gold(rng, &src, a);
            s = s.with_annotator(a, g);
        }
        s.validate().unwrap();
        hyps.push(random_hyp(rng, &s));
        gold.push(s);
    }
    (gold, hyps)
}

/// Unrestricted Damerau-Levenshtein (Lowrance-Wagner).
pub fn dl(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (n, m) = (a.len(), b.len());
    let big = n + m;
    let mut d = vec![vec![0usize; m + 2]; n + 2];
    d[0][0] = big;
    for i in 0..=n {
        d[i + 1][0] = big;
        d[i + 1][1] = i;
    }
    for j in 0..=m {
        d[0][j + 1] = big;
        d[1][j + 1] = j;
    }
    let mut last_row: HashMap<char, usize> = HashMap::new();
    for i in 1..=n {
        let mut last_match_col = 0;
        for j in 1..=m {
            let i1 = *last_row.get(&b[j - 1]).unwrap_or(&0);
            let j1 = last_match_col;
            let cost = if a[i - 1] == b[j - 1] {
                last_match_col = j;
                0
            } else {
                1
            };
            d[i + 1][j + 1] = (d[i][j] + cost)
                .min(d[i + 1][j] + 1)
                .min(d[i][j + 1] + 1)
                .min(d[i1][j1] + (i - i1 - 1) + 1 + (j - j1 - 1));
        }
        last_row.insert(a[i - 1], i);
    }
    d[n + 1][m + 1]
}
