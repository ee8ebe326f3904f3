//! Level sets `S_k`, `T_k` of the isolation recursion, truncations of Γ,
//! exact-overlap search and survivor counts.
//!
//! A child of the frontier enters `S` when its image of `M` meets no other
//! child's image. Children whose composed map coincides with another child's
//! map are *twins*: they go to `pruned` and are never expanded as frontier
//! words. Their images still block neighbouring children, so each class of
//! equal maps is carried forward once as a *ghost*. Ghost descendants keep
//! equal-map partners forever, so none of them can ever be isolated; keeping a
//! single copy reproduces the un-pruned `S` counts exactly while the frontier
//! stays small. Ghosts farther than `neighborhood_radius` hops from every live
//! frontier word are dropped since they can no longer touch a live descendant.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{image_box_unchecked, AxisBox, Ifs, Similitude, Word};

/// A word with its composed map and the image of the invariant box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub word: Word,
    pub map: Similitude,
    pub image: AxisBox,
}

impl Node {
    pub(crate) fn new(ifs: &Ifs, m: &AxisBox, word: Word) -> Result<Self> {
        let map = ifs.word_map(&word)?;
        let image = image_box_unchecked(&map, m);
        Ok(Node { word, map, image })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationOptions {
    pub prune_twins: bool,
    /// Hops of the frontier intersection graph kept around live words.
    pub neighborhood_radius: usize,
    pub frontier_budget: usize,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions { prune_twins: true, neighborhood_radius: 2, frontier_budget: 1_000_000 }
    }
}

#[derive(Clone, Debug)]
pub struct Level {
    pub depth: usize,
    pub s: Vec<Node>,
    pub t: Vec<Node>,
    pub pruned: Vec<Node>,
    pub ghosts: Vec<Node>,
    /// Intersection graph over `t` followed by `ghosts`.
    adjacency: Vec<Vec<usize>>,
}

impl Level {
    fn root(ifs: &Ifs, m: &AxisBox) -> Level {
        Level {
            depth: 0,
            s: Vec::new(),
            t: vec![Node { word: Word::empty(), map: Similitude::identity(ifs.dim()), image: m.clone() }],
            pruned: Vec::new(),
            ghosts: Vec::new(),
            adjacency: vec![Vec::new()],
        }
    }

    /// Rebuilds a level from its word lists, recomputing maps and the frontier graph.
    pub fn from_words(
        ifs: &Ifs,
        m: &AxisBox,
        depth: usize,
        s: &[Word],
        t: &[Word],
        pruned: &[Word],
        ghosts: &[Word],
    ) -> Result<Level> {
        let build = |ws: &[Word]| ws.iter().map(|w| Node::new(ifs, m, w.clone())).collect::<Result<Vec<_>>>();
        let t = build(t)?;
        let ghosts = build(ghosts)?;
        let frontier: Vec<&AxisBox> = t.iter().chain(&ghosts).map(|n| &n.image).collect();
        let mut adjacency = vec![Vec::new(); frontier.len()];
        for (i, j) in intersecting_pairs(&frontier) {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        adjacency.iter_mut().for_each(|a| a.sort_unstable());
        Ok(Level { depth, s: build(s)?, t, pruned: build(pruned)?, ghosts, adjacency })
    }

    /// Frontier node by index into `t ++ ghosts`.
    pub fn frontier_node(&self, i: usize) -> &Node {
        if i < self.t.len() {
            &self.t[i]
        } else {
            &self.ghosts[i - self.t.len()]
        }
    }

    pub fn frontier_len(&self) -> usize {
        self.t.len() + self.ghosts.len()
    }

    /// Frontier indices whose images meet the image of frontier node `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn t_index(&self, w: &Word) -> Option<usize> {
        self.t.binary_search_by(|n| n.word.cmp(w)).ok()
    }

    pub fn is_ghost(&self, i: usize) -> bool {
        i >= self.t.len()
    }
}

/// Index pairs `(i, j)`, `i < j`, of intersecting closed boxes.
pub fn intersecting_pairs(boxes: &[&AxisBox]) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by(|&a, &b| boxes[a].lo()[0].cmp(&boxes[b].lo()[0]).then(a.cmp(&b)));
    let mut active: Vec<usize> = Vec::new();
    let mut pairs = Vec::new();
    for &i in &order {
        let lo = &boxes[i].lo()[0];
        active.retain(|&j| &boxes[j].hi()[0] >= lo);
        for &j in &active {
            if boxes[i].intersects(boxes[j]) {
                pairs.push((i.min(j), i.max(j)));
            }
        }
        active.push(i);
    }
    pairs.sort_unstable();
    pairs
}

struct Candidate {
    word: Word,
    map: Similitude,
    image: AxisBox,
    live: bool,
}

fn expand(ifs: &Ifs, m: &AxisBox, prev: &Level, opts: &EnumerationOptions) -> Level {
    let alphabet = ifs.len() as u32;
    let parents: Vec<(&Node, bool)> =
        prev.t.iter().map(|n| (n, true)).chain(prev.ghosts.iter().map(|n| (n, false))).collect();
    let cands: Vec<Candidate> = parents
        .par_iter()
        .flat_map_iter(|&(p, live)| {
            (1..=alphabet).map(move |s| {
                let map = ifs.extend(&p.map, s);
                let image = image_box_unchecked(&map, m);
                Candidate { word: p.word.child(s), map, image, live }
            })
        })
        .collect();

    // one representative per distinct map
    let mut group_of = vec![0usize; cands.len()];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    {
        let mut index: HashMap<&Similitude, usize> = HashMap::with_capacity(cands.len());
        for (i, c) in cands.iter().enumerate() {
            let g = *index.entry(&c.map).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[g].push(i);
            group_of[i] = g;
        }
    }
    let group_boxes: Vec<&AxisBox> = groups.iter().map(|g| &cands[g[0]].image).collect();
    let mut group_adj = vec![Vec::new(); groups.len()];
    for (a, b) in intersecting_pairs(&group_boxes) {
        group_adj[a].push(b);
        group_adj[b].push(a);
    }

    let mut s = Vec::new();
    let mut t = Vec::new();
    let mut pruned = Vec::new();
    // frontier entries as (candidate index, group index)
    let mut t_idx = Vec::new();
    let mut ghost_groups: Vec<usize> = Vec::new();
    let mut is_ghost_group = vec![false; groups.len()];
    for (i, c) in cands.iter().enumerate() {
        let g = group_of[i];
        let twin = groups[g].len() > 1;
        if !c.live {
            if !is_ghost_group[g] {
                is_ghost_group[g] = true;
                ghost_groups.push(g);
            }
            continue;
        }
        if !twin && group_adj[g].is_empty() {
            s.push(i);
        } else if twin && opts.prune_twins {
            pruned.push(i);
            if !is_ghost_group[g] {
                is_ghost_group[g] = true;
                ghost_groups.push(g);
            }
        } else {
            t_idx.push(i);
        }
    }

    // retain ghosts within `radius` hops of a live frontier word
    let mut kept_ghosts: Vec<usize> = Vec::new();
    if opts.prune_twins && !ghost_groups.is_empty() {
        let mut dist = vec![usize::MAX; groups.len()];
        let mut queue = VecDeque::new();
        for &i in &t_idx {
            let g = group_of[i];
            if dist[g] == usize::MAX {
                dist[g] = 0;
                queue.push_back(g);
            }
        }
        while let Some(g) = queue.pop_front() {
            if dist[g] >= opts.neighborhood_radius.max(1) {
                continue;
            }
            for &h in &group_adj[g] {
                // S groups have no neighbours, so only frontier groups are reached
                if dist[h] == usize::MAX {
                    dist[h] = dist[g] + 1;
                    queue.push_back(h);
                }
            }
        }
        kept_ghosts = ghost_groups.into_iter().filter(|&g| dist[g] != usize::MAX).collect();
    }

    let take =
        |i: usize| Node { word: cands[i].word.clone(), map: cands[i].map.clone(), image: cands[i].image.clone() };
    let s_nodes: Vec<Node> = s.iter().map(|&i| take(i)).collect();
    let pruned_nodes: Vec<Node> = pruned.iter().map(|&i| take(i)).collect();
    for &i in &t_idx {
        t.push(take(i));
    }
    let mut ghosts: Vec<(Node, usize)> = kept_ghosts
        .iter()
        .map(|&g| {
            let rep = *groups[g].iter().min_by(|&&a, &&b| cands[a].word.cmp(&cands[b].word)).expect("nonempty group");
            (take(rep), g)
        })
        .collect();
    ghosts.sort_by(|a, b| a.0.word.cmp(&b.0.word));

    // frontier graph: t then ghosts; equal maps are adjacent too
    let frontier_groups: Vec<usize> =
        t_idx.iter().map(|&i| group_of[i]).chain(ghosts.iter().map(|(_, g)| *g)).collect();
    let mut members: HashMap<usize, Vec<usize>> = HashMap::new();
    for (fi, &g) in frontier_groups.iter().enumerate() {
        members.entry(g).or_default().push(fi);
    }
    let adjacency: Vec<Vec<usize>> = frontier_groups
        .iter()
        .enumerate()
        .map(|(fi, &g)| {
            let mut nb: Vec<usize> = std::iter::once(g)
                .chain(group_adj[g].iter().copied())
                .flat_map(|h| members.get(&h).into_iter().flatten().copied())
                .filter(|&fj| fj != fi)
                .collect();
            nb.sort_unstable();
            nb.dedup();
            nb
        })
        .collect();

    Level {
        depth: prev.depth + 1,
        s: s_nodes,
        t,
        pruned: pruned_nodes,
        ghosts: ghosts.into_iter().map(|(n, _)| n).collect(),
        adjacency,
    }
}

fn check_box(ifs: &Ifs, m: &AxisBox) -> Result<()> {
    if m.dim() != ifs.dim() {
        return Err(Error::DimensionMismatch { expected: ifs.dim(), found: m.dim() });
    }
    for (i, f) in ifs.maps().iter().enumerate() {
        if !m.contains_box(&image_box_unchecked(f, m)) {
            return Err(Error::NotInvariant(i + 1));
        }
    }
    Ok(())
}

pub fn initial_level(ifs: &Ifs, m: &AxisBox, opts: &EnumerationOptions) -> Result<Level> {
    check_box(ifs, m)?;
    Ok(expand(ifs, m, &Level::root(ifs, m), opts))
}

pub fn next_level(ifs: &Ifs, m: &AxisBox, prev: &Level, opts: &EnumerationOptions) -> Level {
    expand(ifs, m, prev, opts)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TruncationStatus {
    Complete,
    TruncatedByBudget { depth: usize },
}

#[derive(Clone, Debug)]
pub struct GammaTruncation {
    pub levels: Vec<Level>,
    pub status: TruncationStatus,
    pub options: EnumerationOptions,
}

impl GammaTruncation {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// All Γ words up to the truncation depth, level by level.
    pub fn gamma_words(&self) -> impl Iterator<Item = &Node> {
        self.levels.iter().flat_map(|l| l.s.iter())
    }

    pub fn s_counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.s.len()).collect()
    }

    pub fn t_counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.t.len()).collect()
    }

    pub fn pruned_counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.pruned.len()).collect()
    }

    pub fn ghost_counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.ghosts.len()).collect()
    }
}

/// Enumerates levels `1..=depth`, stopping early when the frontier outgrows the budget.
pub fn enumerate(ifs: &Ifs, m: &AxisBox, depth: usize, opts: &EnumerationOptions) -> Result<GammaTruncation> {
    enumerate_from(ifs, m, Vec::new(), depth, opts)
}

/// Continues an enumeration from already computed levels (e.g. replayed from a cache).
pub fn enumerate_from(
    ifs: &Ifs,
    m: &AxisBox,
    mut levels: Vec<Level>,
    depth: usize,
    opts: &EnumerationOptions,
) -> Result<GammaTruncation> {
    check_box(ifs, m)?;
    levels.truncate(depth);
    let mut status = TruncationStatus::Complete;
    if let Some(last) = levels.last() {
        if last.frontier_len() > opts.frontier_budget {
            status = TruncationStatus::TruncatedByBudget { depth: last.depth };
        }
    }
    while status == TruncationStatus::Complete && levels.len() < depth {
        let next = match levels.last() {
            None => initial_level(ifs, m, opts)?,
            Some(prev) => next_level(ifs, m, prev, opts),
        };
        let over = next.frontier_len() > opts.frontier_budget;
        if over {
            status = TruncationStatus::TruncatedByBudget { depth: next.depth };
        }
        let empty = next.t.is_empty() && next.ghosts.is_empty();
        levels.push(next);
        if empty {
            // nothing left to expand; later levels are empty
            while levels.len() < depth {
                let d = levels.len() + 1;
                levels.push(Level {
                    depth: d,
                    s: Vec::new(),
                    t: Vec::new(),
                    pruned: Vec::new(),
                    ghosts: Vec::new(),
                    adjacency: Vec::new(),
                });
            }
        }
    }
    Ok(GammaTruncation { levels, status, options: *opts })
}

/// Two distinct words with identical composed maps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OverlapPair {
    pub u: Word,
    pub v: Word,
}

impl fmt::Display for OverlapPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f_{} = f_{}", self.u, self.v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OverlapSearch {
    pub searched_depth: usize,
    pub requested_depth: usize,
    pub pairs: Vec<OverlapPair>,
}

/// Exact-overlap search over all words of length `≤ depth`.
///
/// Only indecomposable identities are reported: a pair is dropped when some
/// proper prefixes `u[..p]`, `v[..q]` already carry equal maps, which covers
/// common prefixes, common suffixes and products of shorter identities.
/// The search stops at the largest depth whose word count fits `word_budget`.
pub fn detect_overlaps(ifs: &Ifs, depth: usize, word_budget: usize) -> OverlapSearch {
    let m = ifs.len();
    let mut by_map: HashMap<Similitude, Vec<Word>> = HashMap::new();
    let mut layer = vec![(Word::empty(), Similitude::identity(ifs.dim()))];
    let mut total = 0usize;
    let mut searched = 0;
    for k in 1..=depth {
        let size = layer.len().saturating_mul(m);
        if total.saturating_add(size) > word_budget {
            break;
        }
        let next: Vec<(Word, Similitude)> = layer
            .par_iter()
            .flat_map_iter(|(w, g)| (1..=m as u32).map(move |s| (w.child(s), ifs.extend(g, s))))
            .collect();
        for (w, g) in &next {
            by_map.entry(g.clone()).or_default().push(w.clone());
        }
        total += size;
        searched = k;
        layer = next;
    }

    let mut pairs = Vec::new();
    for words in by_map.values().filter(|ws| ws.len() > 1) {
        let mut ws = words.clone();
        ws.sort_by(|a, b| a.shortlex_cmp(b));
        for i in 0..ws.len() {
            for j in i + 1..ws.len() {
                if indecomposable(ifs, &ws[i], &ws[j]) {
                    pairs.push(OverlapPair { u: ws[i].clone(), v: ws[j].clone() });
                }
            }
        }
    }
    pairs.sort_by(|a, b| {
        let la = a.u.len().max(a.v.len());
        let lb = b.u.len().max(b.v.len());
        la.cmp(&lb).then_with(|| a.u.shortlex_cmp(&b.u)).then_with(|| a.v.shortlex_cmp(&b.v))
    });
    OverlapSearch { searched_depth: searched, requested_depth: depth, pairs }
}

fn prefix_maps(ifs: &Ifs, w: &Word) -> Vec<Similitude> {
    let mut acc = Similitude::identity(ifs.dim());
    let mut out = Vec::with_capacity(w.len());
    for &s in w.symbols() {
        acc = ifs.extend(&acc, s);
        out.push(acc.clone());
    }
    out
}

fn indecomposable(ifs: &Ifs, u: &Word, v: &Word) -> bool {
    let pu = prefix_maps(ifs, u);
    let pv = prefix_maps(ifs, v);
    let inner_u: HashSet<&Similitude> = pu[..pu.len() - 1].iter().collect();
    !pv[..pv.len() - 1].iter().any(|g| inner_u.contains(g))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverMode {
    /// Distinct maps among `T_k ∪ pruned_k`.
    DedupOne,
    /// `|T_k|`: twin images carry no univoque point.
    PruneAll,
}

pub fn survivor_cover_counts(trunc: &GammaTruncation, mode: CoverMode) -> Vec<usize> {
    trunc
        .levels
        .iter()
        .map(|l| match mode {
            CoverMode::PruneAll => l.t.len(),
            CoverMode::DedupOne => {
                let maps: HashSet<&Similitude> = l.t.iter().chain(&l.pruned).map(|n| &n.map).collect();
                maps.len()
            }
        })
        .collect()
}

/// Checks that Γ words are prefix-free with pairwise disjoint images, and
/// that each `S_k` image avoids every level-`k` frontier image.
pub fn prefix_free_check(trunc: &GammaTruncation) -> bool {
    let mut words: Vec<&Word> = trunc.gamma_words().map(|n| &n.word).collect();
    words.sort();
    if words.windows(2).any(|w| w[0].is_prefix_of(w[1])) {
        return false;
    }
    let images: Vec<&AxisBox> = trunc.gamma_words().map(|n| &n.image).collect();
    if !intersecting_pairs(&images).is_empty() {
        return false;
    }
    trunc.levels.iter().all(|l| {
        let boxes: Vec<&AxisBox> = l.s.iter().chain(&l.t).chain(&l.pruned).chain(&l.ghosts).map(|n| &n.image).collect();
        let ns = l.s.len();
        intersecting_pairs(&boxes).into_iter().all(|(i, _)| i >= ns)
    })
}

/// `S ∪ T ∪ pruned` equals `prev.T × Ω` as word sets, without duplicates.
pub fn partition_holds(ifs: &Ifs, prev_t: &[Word], level: &Level) -> bool {
    let mut expected: Vec<Word> = prev_t.iter().flat_map(|w| (1..=ifs.len() as u32).map(move |s| w.child(s))).collect();
    expected.sort();
    let mut got: Vec<Word> = level.s.iter().chain(&level.t).chain(&level.pruned).map(|n| n.word.clone()).collect();
    got.sort();
    let unique = got.windows(2).all(|w| w[0] != w[1]);
    unique && got == expected
}
