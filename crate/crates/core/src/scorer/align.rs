//! Token-level Levenshtein alignment and the edit lattice built on it.
//!
//! Costs are kept doubled so they stay integral: a match costs 0, insertion,
//! deletion and substitution cost 2, and a substitution between tokens that
//! differ only in case costs 1. Every cell that lies on some minimum-cost path
//! is a lattice vertex; runs of non-match steps along those paths can be
//! grouped into edits of at most `max_merge_span` source tokens.

use std::collections::{BTreeSet, HashMap};

use crate::corpusio::Edit;
use crate::taxonomy::ErrorLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlignConfig {
    /// Longest source span a merged hypothesis edit may cover.
    pub max_merge_span: usize,
    /// Substitutions between case-insensitively equal tokens cost half.
    pub case_insensitive_half_cost: bool,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            max_merge_span: 4,
            case_insensitive_half_cost: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Match,
    Substitute,
    Insert,
    Delete,
}

impl Op {
    fn step(self) -> (usize, usize) {
        match self {
            Op::Match | Op::Substitute => (1, 1),
            Op::Insert => (0, 1),
            Op::Delete => (1, 0),
        }
    }
}

/// A cell `(i, j)`: `i` source tokens and `j` hypothesis tokens consumed.
pub type Vertex = (usize, usize);

#[derive(Debug, Clone)]
pub struct Alignment {
    source_len: usize,
    hyp_len: usize,
    /// Minimum doubled cost.
    pub cost: u32,
    /// Vertices on at least one optimal path, in lexicographic order.
    pub vertices: Vec<Vertex>,
    /// Optimal single steps `(from, to, op)` as vertex indices.
    pub steps: Vec<(usize, usize, Op)>,
    index: HashMap<Vertex, usize>,
}

fn sub_cost(a: &str, b: &str, cfg: &AlignConfig) -> u32 {
    if a == b {
        0
    } else if cfg.case_insensitive_half_cost && a.to_lowercase() == b.to_lowercase() {
        1
    } else {
        2
    }
}

impl Alignment {
    pub fn new(source: &[String], hyp: &[String], cfg: &AlignConfig) -> Self {
        let (n, m) = (source.len(), hyp.len());
        let op_cost = |i: usize, j: usize, op: Op| -> Option<u32> {
            match op {
                Op::Match => (source[i] == hyp[j]).then_some(0),
                Op::Substitute => (source[i] != hyp[j]).then(|| sub_cost(&source[i], &hyp[j], cfg)),
                Op::Insert | Op::Delete => Some(2),
            }
        };
        let ops = [Op::Match, Op::Substitute, Op::Insert, Op::Delete];
        let fits = |i: usize, j: usize, op: Op| {
            let (di, dj) = op.step();
            i + di <= n && j + dj <= m
        };

        let inf = u32::MAX / 4;
        let mut fwd = vec![vec![inf; m + 1]; n + 1];
        fwd[0][0] = 0;
        for i in 0..=n {
            for j in 0..=m {
                let here = fwd[i][j];
                if here == inf {
                    continue;
                }
                for op in ops {
                    if !fits(i, j, op) {
                        continue;
                    }
                    if let Some(c) = op_cost(i, j, op) {
                        let (di, dj) = op.step();
                        let cell = &mut fwd[i + di][j + dj];
                        *cell = (*cell).min(here + c);
                    }
                }
            }
        }
        let mut bwd = vec![vec![inf; m + 1]; n + 1];
        bwd[n][m] = 0;
        for i in (0..=n).rev() {
            for j in (0..=m).rev() {
                for op in ops {
                    if !fits(i, j, op) {
                        continue;
                    }
                    if let Some(c) = op_cost(i, j, op) {
                        let (di, dj) = op.step();
                        let next = bwd[i + di][j + dj];
                        if next != inf {
                            bwd[i][j] = bwd[i][j].min(next + c);
                        }
                    }
                }
            }
        }
        let total = fwd[n][m];

        let mut vertices = Vec::new();
        for (i, row) in fwd.iter().enumerate() {
            for (j, &f) in row.iter().enumerate() {
                if f != inf && bwd[i][j] != inf && f + bwd[i][j] == total {
                    vertices.push((i, j));
                }
            }
        }
        let index: HashMap<Vertex, usize> =
            vertices.iter().enumerate().map(|(k, v)| (*v, k)).collect();
        let mut steps = Vec::new();
        for (k, &(i, j)) in vertices.iter().enumerate() {
            for op in ops {
                if !fits(i, j, op) {
                    continue;
                }
                let Some(c) = op_cost(i, j, op) else { continue };
                let (di, dj) = op.step();
                let to = (i + di, j + dj);
                if fwd[i][j] + c + bwd[to.0][to.1] == total {
                    steps.push((k, index[&to], op));
                }
            }
        }
        Alignment {
            source_len: n,
            hyp_len: m,
            cost: total,
            vertices,
            steps,
            index,
        }
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    pub fn hyp_len(&self) -> usize {
        self.hyp_len
    }

    pub fn vertex_index(&self, v: Vertex) -> Option<usize> {
        self.index.get(&v).copied()
    }

    /// Hypothesis positions aligned to source boundary `i` on some optimal path.
    pub fn boundary_positions(&self, i: usize) -> Vec<usize> {
        self.vertices
            .iter()
            .filter(|v| v.0 == i)
            .map(|v| v.1)
            .collect()
    }
}

/// One lattice arc that proposes a change.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditArc {
    pub from: usize,
    pub to: usize,
    pub edit: Edit,
}

impl EditArc {
    pub fn is_insertion(&self) -> bool {
        self.edit.is_insertion()
    }
}

/// All ways of reading the hypothesis as a set of edits over the source.
#[derive(Debug, Clone)]
pub struct EditLattice {
    pub alignment: Alignment,
    /// Unchanged-token arcs `(from, to)`.
    pub match_arcs: Vec<(usize, usize)>,
    pub edit_arcs: Vec<EditArc>,
    outgoing: Vec<Vec<Arc>>,
}

#[derive(Debug, Clone, Copy)]
enum Arc {
    Keep(usize),
    Change(usize),
}

/// Builds the hypothesis edit lattice for one sentence.
pub fn extract_edits(source: &[String], hyp: &[String], cfg: &AlignConfig) -> EditLattice {
    let alignment = Alignment::new(source, hyp, cfg);
    let nv = alignment.vertices.len();
    let mut change_succ: Vec<Vec<usize>> = vec![Vec::new(); nv];
    let mut match_arcs = Vec::new();
    for &(from, to, op) in &alignment.steps {
        if op == Op::Match {
            match_arcs.push((from, to));
        } else {
            change_succ[from].push(to);
        }
    }

    let mut edit_arcs = Vec::new();
    for from in 0..nv {
        let (si, sj) = alignment.vertices[from];
        // every vertex reachable by a non-empty run of change steps
        let mut reached = BTreeSet::new();
        let mut stack = change_succ[from].clone();
        while let Some(v) = stack.pop() {
            let (vi, _) = alignment.vertices[v];
            if vi - si > cfg.max_merge_span || !reached.insert(v) {
                continue;
            }
            stack.extend(change_succ[v].iter().copied());
        }
        for to in reached {
            let (ti, tj) = alignment.vertices[to];
            edit_arcs.push(EditArc {
                from,
                to,
                edit: Edit::new(si, ti, ErrorLabel::Unlabeled, hyp[sj..tj].to_vec(), 0),
            });
        }
    }

    let mut outgoing = vec![Vec::new(); nv];
    for (k, &(from, _)) in match_arcs.iter().enumerate() {
        outgoing[from].push(Arc::Keep(k));
    }
    for (k, arc) in edit_arcs.iter().enumerate() {
        outgoing[arc.from].push(Arc::Change(k));
    }
    EditLattice {
        alignment,
        match_arcs,
        edit_arcs,
        outgoing,
    }
}

/// Per-arc contribution to the path objective: `(matched gold edits, false positives)`.
pub type ArcScore = (u32, u32);

impl EditLattice {
    fn target(&self, arc: Arc) -> usize {
        match arc {
            Arc::Keep(k) => self.match_arcs[k].1,
            Arc::Change(k) => self.edit_arcs[k].to,
        }
    }

    fn start_end(&self) -> Option<(usize, usize)> {
        let start = self.alignment.vertex_index((0, 0))?;
        let end = self
            .alignment
            .vertex_index((self.alignment.source_len, self.alignment.hyp_len))?;
        Some((start, end))
    }

    /// The path maximising matches, then minimising false positives, as
    /// edit-arc indices. Two insertions may not follow each other at one
    /// boundary, so every path is a valid non-overlapping edit set.
    pub fn best_path<F>(&self, score: F) -> (ArcScore, Vec<usize>)
    where
        F: Fn(&EditArc) -> ArcScore,
    {
        let Some((start, end)) = self.start_end() else {
            return ((0, 0), Vec::new());
        };
        let nv = self.alignment.vertices.len();
        // state = vertex * 2 + (entered by an insertion arc)
        type Back = Option<(usize, Arc)>;
        let mut best: Vec<Option<((u32, u32), Back)>> = vec![None; nv * 2];
        best[start * 2] = Some(((0, 0), None));
        let better = |a: (u32, u32), b: (u32, u32)| a.0 > b.0 || (a.0 == b.0 && a.1 < b.1);

        for v in 0..nv {
            for flag in 0..2 {
                let state = v * 2 + flag;
                let Some((here, _)) = best[state] else {
                    continue;
                };
                for &arc in &self.outgoing[v] {
                    let (gain, next_flag) = match arc {
                        Arc::Keep(_) => ((0, 0), 0),
                        Arc::Change(k) => {
                            let a = &self.edit_arcs[k];
                            if a.is_insertion() && flag == 1 {
                                continue;
                            }
                            (score(a), usize::from(a.is_insertion()))
                        }
                    };
                    let cand = (here.0 + gain.0, here.1 + gain.1);
                    let next = self.target(arc) * 2 + next_flag;
                    if best[next].is_none_or(|(cur, _)| better(cand, cur)) {
                        best[next] = Some((cand, Some((state, arc))));
                    }
                }
            }
        }

        let finals = [end * 2, end * 2 + 1];
        let mut chosen: Option<(usize, (u32, u32))> = None;
        for s in finals {
            if let Some((val, _)) = best[s] {
                if chosen.is_none_or(|(_, cur)| better(val, cur)) {
                    chosen = Some((s, val));
                }
            }
        }
        let Some((mut state, value)) = chosen else {
            return ((0, 0), Vec::new());
        };
        let mut path = Vec::new();
        while let Some((_, Some((prev, arc)))) = best[state] {
            if let Arc::Change(k) = arc {
                path.push(k);
            }
            state = prev;
        }
        path.reverse();
        (value, path)
    }

    /// Every candidate edit set, one per distinct lattice path. Exponential;
    /// meant for inspection and tests on short sentences.
    pub fn candidates(&self) -> Vec<Vec<Edit>> {
        let Some((start, end)) = self.start_end() else {
            return vec![Vec::new()];
        };
        let mut out = BTreeSet::new();
        let mut stack: Vec<(usize, bool, Vec<usize>)> = vec![(start, false, Vec::new())];
        while let Some((v, after_insertion, path)) = stack.pop() {
            if v == end {
                let key: Vec<(usize, usize, Vec<String>)> = path
                    .iter()
                    .map(|&k| {
                        let e = &self.edit_arcs[k].edit;
                        (e.start, e.end, e.correction.clone())
                    })
                    .collect();
                out.insert(key);
            }
            for &arc in &self.outgoing[v] {
                match arc {
                    Arc::Keep(_) => stack.push((self.target(arc), false, path.clone())),
                    Arc::Change(k) => {
                        let ins = self.edit_arcs[k].is_insertion();
                        if ins && after_insertion {
                            continue;
                        }
                        let mut p = path.clone();
                        p.push(k);
                        stack.push((self.target(arc), ins, p));
                    }
                }
            }
        }
        out.into_iter()
            .map(|set| {
                set.into_iter()
                    .map(|(s, e, c)| Edit::new(s, e, ErrorLabel::Unlabeled, c, 0))
                    .collect()
            })
            .collect()
    }
}
