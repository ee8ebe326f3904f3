//! Neighbour types of frontier words and the integer transfer matrix they induce.
//!
//! The type of a frontier word `u` is read off its neighbourhood in the
//! frontier intersection graph (live words and ghosts alike), normalised by
//! `g_u⁻¹`. Radius 1 records the relative maps of intersecting neighbours;
//! radius 2 also records each neighbour's own radius-1 set, which separates
//! words whose immediate neighbours agree but whose next ring differs.

use std::collections::HashMap;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gamma::{self, EnumerationOptions, GammaTruncation, Level};
use crate::geometry::{AxisBox, Ifs, Similitude, Word};
use crate::spectral::{self, SpectralBounds};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint {
    /// Sorted relative maps `g_u⁻¹∘g_v` of intersecting neighbours `v`.
    pub near: Vec<Similitude>,
    /// Sorted pairs (relative map, neighbour's `near`); empty at radius 1.
    pub ring: Vec<(Similitude, Vec<Similitude>)>,
}

impl Fingerprint {
    pub fn is_empty(&self) -> bool {
        self.near.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborType {
    pub fingerprint: Fingerprint,
    pub representative: Word,
    pub first_depth: usize,
}

/// Children of one frontier word, by kind.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TypeProfile {
    /// Types of the `T` children, sorted.
    pub t_children: Vec<usize>,
    pub s_children: u64,
    pub pruned_children: u64,
}

#[derive(Clone, Debug)]
pub struct TypeAutomaton {
    pub types: Vec<NeighborType>,
    pub profiles: Vec<Option<TypeProfile>>,
    /// `matrix[t'][t]`: `T` children of type `t'` of a type-`t` word.
    pub matrix: Vec<Vec<u64>>,
    pub emission: Vec<u64>,
    pub recurrent: Vec<bool>,
    pub base_depth: usize,
    pub base_counts: Vec<u64>,
    pub preperiodic_s: Vec<u64>,
    pub closed: bool,
    /// Depth at which closure was detected, or the last depth inspected.
    pub depth_reached: usize,
    pub radius: usize,
}

fn near_sets(level: &Level) -> Vec<Vec<Similitude>> {
    (0..level.frontier_len())
        .into_par_iter()
        .map(|i| {
            let g = &level.frontier_node(i).map;
            let mut v: Vec<Similitude> =
                level.neighbors(i).iter().map(|&j| g.relative(&level.frontier_node(j).map)).collect();
            v.sort();
            v.dedup();
            v
        })
        .collect()
}

fn fingerprint_at(level: &Level, near: &[Vec<Similitude>], i: usize, radius: usize) -> Fingerprint {
    let ring = if radius >= 2 {
        let g = &level.frontier_node(i).map;
        let mut r: Vec<(Similitude, Vec<Similitude>)> =
            level.neighbors(i).iter().map(|&j| (g.relative(&level.frontier_node(j).map), near[j].clone())).collect();
        r.sort();
        r.dedup();
        r
    } else {
        Vec::new()
    };
    Fingerprint { near: near[i].clone(), ring }
}

/// Fingerprints of every live frontier word of `level`, in word order.
pub fn level_fingerprints(level: &Level, radius: usize) -> Vec<Fingerprint> {
    let near = near_sets(level);
    (0..level.t.len()).into_par_iter().map(|i| fingerprint_at(level, &near, i, radius)).collect()
}

pub fn fingerprint(level: &Level, w: &Word, radius: usize) -> Result<Fingerprint> {
    let i = level.t_index(w).ok_or_else(|| Error::NotInFrontier(w.to_string()))?;
    Ok(fingerprint_at(level, &near_sets(level), i, radius))
}

/// Incremental type assignment, one level at a time.
struct Builder {
    radius: usize,
    index: HashMap<Fingerprint, usize>,
    types: Vec<NeighborType>,
    profiles: Vec<Option<TypeProfile>>,
    level_types: Vec<Vec<usize>>,
    s_counts: Vec<u64>,
    closed: bool,
}

impl Builder {
    fn new(radius: usize) -> Self {
        Builder {
            radius,
            index: HashMap::new(),
            types: Vec::new(),
            profiles: Vec::new(),
            level_types: Vec::new(),
            s_counts: Vec::new(),
            closed: false,
        }
    }

    fn feed(&mut self, prev: Option<&Level>, level: &Level) -> Result<()> {
        let fps = level_fingerprints(level, self.radius);
        let mut fresh = 0;
        let mut ids = Vec::with_capacity(fps.len());
        for (node, fp) in level.t.iter().zip(fps) {
            let next = self.types.len();
            let id = *self.index.entry(fp.clone()).or_insert(next);
            if id == next {
                fresh += 1;
                self.types.push(NeighborType {
                    fingerprint: fp,
                    representative: node.word.clone(),
                    first_depth: level.depth,
                });
                self.profiles.push(None);
            }
            ids.push(id);
        }

        if let Some(prev) = prev {
            let parent_types = self.level_types.last().expect("previous level typed");
            let mut acc = vec![TypeProfile::default(); prev.t.len()];
            let parent = |w: &Word| prev.t_index(&w.parent()).expect("child of a live word");
            level.s.iter().for_each(|n| acc[parent(&n.word)].s_children += 1);
            level.pruned.iter().for_each(|n| acc[parent(&n.word)].pruned_children += 1);
            for (n, &id) in level.t.iter().zip(&ids) {
                acc[parent(&n.word)].t_children.push(id);
            }
            for (p, mut prof) in acc.into_iter().enumerate() {
                prof.t_children.sort_unstable();
                let ty = parent_types[p];
                match &self.profiles[ty] {
                    None => self.profiles[ty] = Some(prof),
                    Some(known) if *known == prof => {}
                    Some(_) => return Err(Error::InconsistentType(ty)),
                }
            }
        }

        self.level_types.push(ids);
        self.s_counts.push(level.s.len() as u64);
        self.closed = level.t.is_empty() || (prev.is_some() && fresh == 0);
        Ok(())
    }

    fn finish(self) -> TypeAutomaton {
        let n = self.types.len();
        let mut matrix = vec![vec![0u64; n]; n];
        let mut emission = vec![0u64; n];
        for (t, prof) in self.profiles.iter().enumerate() {
            if let Some(p) = prof {
                p.t_children.iter().for_each(|&c| matrix[c][t] += 1);
                emission[t] = p.s_children;
            }
        }
        // edge t → t' when a type-t word has a type-t' child
        let forward: Vec<Vec<u64>> = (0..n).map(|t| (0..n).map(|c| matrix[c][t]).collect()).collect();
        let reach = spectral::reachability(&forward);
        let recurrent: Vec<bool> = (0..n).map(|t| reach[t][t]).collect();

        let base = self.level_types.iter().position(|ids| ids.iter().all(|&t| recurrent[t])).unwrap_or(0);
        let mut base_counts = vec![0u64; n];
        if let Some(ids) = self.level_types.get(base) {
            ids.iter().for_each(|&t| base_counts[t] += 1);
        }
        TypeAutomaton {
            types: self.types,
            profiles: self.profiles,
            matrix,
            emission,
            recurrent,
            base_depth: base + 1,
            base_counts,
            preperiodic_s: self.s_counts[..=base.min(self.s_counts.len().saturating_sub(1))].to_vec(),
            closed: self.closed,
            depth_reached: self.level_types.len(),
            radius: self.radius,
        }
    }
}

fn fingerprint_radius(opts: &EnumerationOptions) -> usize {
    opts.neighborhood_radius.clamp(1, 2)
}

/// Builds the automaton from an enumeration made with twin pruning enabled,
/// scanning levels until closure.
pub fn from_truncation(trunc: &GammaTruncation) -> Result<TypeAutomaton> {
    if !trunc.options.prune_twins {
        return Err(Error::Config(vec!["type automaton requires twin pruning".into()]));
    }
    let mut b = Builder::new(fingerprint_radius(&trunc.options));
    let mut prev: Option<&Level> = None;
    for level in &trunc.levels {
        b.feed(prev, level)?;
        if b.closed {
            break;
        }
        prev = Some(level);
    }
    Ok(b.finish())
}

/// Enumerates with pruning on until the type set closes or `max_depth` is reached.
pub fn build(ifs: &Ifs, m: &AxisBox, max_depth: usize, opts: &EnumerationOptions) -> Result<TypeAutomaton> {
    let opts = EnumerationOptions { prune_twins: true, ..*opts };
    let mut b = Builder::new(fingerprint_radius(&opts));
    let mut prev = gamma::initial_level(ifs, m, &opts)?;
    b.feed(None, &prev)?;
    while !b.closed && prev.depth < max_depth.max(2) {
        if prev.frontier_len() > opts.frontier_budget {
            break;
        }
        let next = gamma::next_level(ifs, m, &prev, &opts);
        b.feed(Some(&prev), &next)?;
        prev = next;
    }
    Ok(b.finish())
}

impl TypeAutomaton {
    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    fn ensure_closed(&self) -> Result<()> {
        if self.closed {
            Ok(())
        } else {
            Err(Error::AutomatonOpen)
        }
    }

    /// Type multiplicities at depth `n` and `|S_{n+1}|`, exactly.
    pub fn counts(&self, n: usize) -> Result<(BigUint, Vec<BigUint>)> {
        self.ensure_closed()?;
        if n < self.base_depth {
            return Err(Error::Config(vec![format!("depth {n} below base depth {}", self.base_depth)]));
        }
        let mut v: Vec<BigUint> = self.base_counts.iter().map(|&c| BigUint::from(c)).collect();
        for _ in self.base_depth..n {
            v = self.step(&v);
        }
        Ok((self.emit(&v), v))
    }

    fn step(&self, v: &[BigUint]) -> Vec<BigUint> {
        self.matrix.iter().map(|row| row.iter().zip(v).filter(|(a, _)| **a > 0).map(|(&a, x)| x * a).sum()).collect()
    }

    fn emit(&self, v: &[BigUint]) -> BigUint {
        self.emission.iter().zip(v).filter(|(e, _)| **e > 0).map(|(&e, x)| x * e).sum()
    }

    /// `|S_1|, …, |S_depth|` from the automaton.
    pub fn s_counts(&self, depth: usize) -> Result<Vec<BigUint>> {
        self.ensure_closed()?;
        let mut out: Vec<BigUint> = self.preperiodic_s.iter().take(depth).map(|&c| BigUint::from(c)).collect();
        let mut v: Vec<BigUint> = self.base_counts.iter().map(|&c| BigUint::from(c)).collect();
        while out.len() < depth {
            out.push(self.emit(&v));
            v = self.step(&v);
        }
        Ok(out)
    }

    /// Live frontier sizes `|T_1|, …, |T_depth|` from the automaton.
    pub fn t_counts(&self, depth: usize, observed: &[usize]) -> Result<Vec<BigUint>> {
        self.ensure_closed()?;
        let mut out: Vec<BigUint> =
            observed.iter().take(self.base_depth.min(depth)).map(|&c| BigUint::from(c)).collect();
        let mut v: Vec<BigUint> = self.base_counts.iter().map(|&c| BigUint::from(c)).collect();
        for _ in self.base_depth..depth {
            v = self.step(&v);
            out.push(v.iter().sum());
        }
        Ok(out)
    }

    pub fn recurrent_count(&self) -> usize {
        self.recurrent.iter().filter(|&&r| r).count()
    }
}

/// Growth rate of live frontier counts: bounds on the spectral radius of the
/// transfer matrix.
pub fn survivor_growth(aut: &TypeAutomaton) -> Result<SpectralBounds> {
    aut.ensure_closed()?;
    Ok(spectral::spectral_radius(&aut.matrix, 2000))
}

/// A permutation `p` with `a[p[i]][p[j]] == b[i][j]` for all `i, j`, if any.
pub fn equivalent_up_to_relabeling(a: &[Vec<u64>], b: &[Vec<u64>]) -> Option<Vec<usize>> {
    fn extend(a: &[Vec<u64>], b: &[Vec<u64>], p: &mut Vec<usize>, used: &mut [bool]) -> bool {
        let i = p.len();
        if i == a.len() {
            return true;
        }
        for c in 0..a.len() {
            if used[c] || a[c][c] != b[i][i] {
                continue;
            }
            if (0..i).all(|j| a[c][p[j]] == b[i][j] && a[p[j]][c] == b[j][i]) {
                used[c] = true;
                p.push(c);
                if extend(a, b, p, used) {
                    return true;
                }
                p.pop();
                used[c] = false;
            }
        }
        false
    }
    if a.len() != b.len() {
        return None;
    }
    let mut p = Vec::with_capacity(a.len());
    let mut used = vec![false; a.len()];
    extend(a, b, &mut p, &mut used).then_some(p)
}
