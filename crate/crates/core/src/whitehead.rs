//! Whitehead graphs, Whitehead automorphisms, length minimization and the
//! primitivity / simplicity decision procedures.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::words::{alphabet_size, push_reduced, CyclicWord, Letter, Word, WordError};

/// Ranks above this do not fit the 64-bit letter masks.
pub const MAX_RANK: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WhiteheadError {
    #[error("the trivial word has no Whitehead graph and is neither primitive nor simple")]
    TrivialWord,
    #[error("rank {0} is not supported (need 2 <= rank <= {MAX_RANK})")]
    UnsupportedRank(usize),
    #[error("malformed automorphism record: {0}")]
    BadRecord(String),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Simple graph on the `2N` letters; vertex `i` is `Letter::from_index(i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WhiteheadGraph {
    rank: usize,
    adjacency: Vec<u64>,
}

/// For each cyclic two-letter subword `xy`, the edge `{x⁻¹, y}`.
pub fn whitehead_graph(w: &CyclicWord) -> Result<WhiteheadGraph, WhiteheadError> {
    if w.is_empty() {
        return Err(WhiteheadError::TrivialWord);
    }
    let rank = w.rank();
    if rank > MAX_RANK {
        return Err(WhiteheadError::UnsupportedRank(rank));
    }
    let mut adjacency = vec![0u64; alphabet_size(rank)];
    let letters = w.representative().letters();
    let n = letters.len();
    for i in 0..n {
        let u = letters[i].inverse().index();
        let v = letters[(i + 1) % n].index();
        debug_assert_ne!(u, v);
        adjacency[u] |= 1 << v;
        adjacency[v] |= 1 << u;
    }
    Ok(WhiteheadGraph { rank, adjacency })
}

impl WhiteheadGraph {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn has_edge(&self, x: Letter, y: Letter) -> bool {
        self.adjacency[x.index()] & (1 << y.index()) != 0
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].count_ones() as usize
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(|m| m.count_ones() as usize).sum::<usize>() / 2
    }

    /// Edges as index pairs `(u, v)` with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.adjacency.len() {
            for v in u + 1..self.adjacency.len() {
                if self.adjacency[u] & (1 << v) != 0 {
                    out.push((u, v));
                }
            }
        }
        out
    }

    fn component_count(&self, removed: Option<usize>) -> usize {
        let n = self.adjacency.len();
        let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let mut unseen = full & !removed.map_or(0, |r| 1u64 << r);
        let mut components = 0;
        while unseen != 0 {
            components += 1;
            let start = unseen.trailing_zeros() as usize;
            let mut frontier = 1u64 << start;
            unseen &= !frontier;
            while frontier != 0 {
                let v = frontier.trailing_zeros() as usize;
                frontier &= frontier - 1;
                let next = self.adjacency[v] & unseen;
                unseen &= !next;
                frontier |= next;
            }
        }
        components
    }

    pub fn is_connected(&self) -> bool {
        self.component_count(None) <= 1
    }

    /// Articulation points by the low-link method.
    pub fn articulation_points(&self) -> Vec<usize> {
        let n = self.adjacency.len();
        let mut order = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut is_cut = vec![false; n];
        let mut counter = 0;
        for root in 0..n {
            if order[root] == usize::MAX {
                self.low_link(root, usize::MAX, &mut counter, &mut order, &mut low, &mut is_cut);
            }
        }
        (0..n).filter(|&v| is_cut[v]).collect()
    }

    fn low_link(
        &self,
        v: usize,
        parent: usize,
        counter: &mut usize,
        order: &mut [usize],
        low: &mut [usize],
        is_cut: &mut [bool],
    ) {
        order[v] = *counter;
        low[v] = *counter;
        *counter += 1;
        let mut children = 0;
        let mut rest = self.adjacency[v];
        while rest != 0 {
            let u = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if order[u] == usize::MAX {
                children += 1;
                self.low_link(u, v, counter, order, low, is_cut);
                low[v] = low[v].min(low[u]);
                if parent != usize::MAX && low[u] >= order[v] {
                    is_cut[v] = true;
                }
            } else if u != parent {
                low[v] = low[v].min(order[u]);
            }
        }
        if parent == usize::MAX && children > 1 {
            is_cut[v] = true;
        }
    }

    /// A vertex whose removal disconnects the graph; a disconnected graph
    /// with at least one edge counts as having one.
    pub fn has_cut_vertex(&self) -> bool {
        if self.edge_count() == 0 {
            return false;
        }
        !self.is_connected() || !self.articulation_points().is_empty()
    }

    /// True when the graph is a single cycle through all `2N` vertices.
    pub fn is_hamiltonian_cycle(&self) -> bool {
        self.is_connected() && (0..self.vertex_count()).all(|v| self.degree(v) == 2)
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph whitehead {\n");
        for v in 0..self.vertex_count() {
            let _ = writeln!(out, "  v{} [label=\"{}\"];", v, Letter::from_index(v).symbol(self.rank));
        }
        for (u, v) in self.edges() {
            let _ = writeln!(out, "  v{u} -- v{v};");
        }
        out.push_str("}\n");
        out
    }

    /// Builds a graph from explicit edges, for testing the cut-vertex logic
    /// on arbitrary simple graphs.
    pub fn from_edges(rank: usize, edges: &[(usize, usize)]) -> WhiteheadGraph {
        let mut adjacency = vec![0u64; alphabet_size(rank)];
        for &(u, v) in edges {
            assert_ne!(u, v, "no loops in a simple graph");
            adjacency[u] |= 1 << v;
            adjacency[v] |= 1 << u;
        }
        WhiteheadGraph { rank, adjacency }
    }
}

/// A Whitehead automorphism of `F_rank`.
///
/// `TypeI` is a signed permutation of the generators (`images[g-1]` is the
/// image of `a_g`). `TypeII` is given by a multiplier letter `x` and a set
/// `S` of letters (bit `i` for `Letter::from_index(i)`) with `x ∈ S`,
/// `x⁻¹ ∉ S`; every letter `z ≠ x^{±1}` is sent to
/// `x^{-[z⁻¹∈S]} z x^{[z∈S]}` and `x` is fixed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum WhiteheadAutomorphism {
    TypeI { rank: usize, images: Vec<Letter> },
    TypeII { rank: usize, multiplier: Letter, subset: u64 },
}

impl WhiteheadAutomorphism {
    pub fn type_two(rank: usize, multiplier: Letter, subset: u64) -> WhiteheadAutomorphism {
        let m = multiplier.index();
        assert!(subset & (1 << m) != 0, "multiplier must belong to the subset");
        assert!(subset & (1 << (m ^ 1)) == 0, "inverse multiplier must not belong to the subset");
        assert!(subset >> alphabet_size(rank) == 0, "subset exceeds alphabet");
        WhiteheadAutomorphism::TypeII { rank, multiplier, subset }
    }

    pub fn rank(&self) -> usize {
        match self {
            WhiteheadAutomorphism::TypeI { rank, .. } | WhiteheadAutomorphism::TypeII { rank, .. } => *rank,
        }
    }

    fn push_image(&self, z: Letter, out: &mut Vec<Letter>) {
        match self {
            WhiteheadAutomorphism::TypeI { images, .. } => {
                let image = images[z.generator() - 1];
                push_reduced(out, if z.is_inverse() { image.inverse() } else { image });
            }
            WhiteheadAutomorphism::TypeII { multiplier, subset, .. } => {
                let x = *multiplier;
                if z.generator() == x.generator() {
                    push_reduced(out, z);
                    return;
                }
                if subset & (1 << z.inverse().index()) != 0 {
                    push_reduced(out, x.inverse());
                }
                push_reduced(out, z);
                if subset & (1 << z.index()) != 0 {
                    push_reduced(out, x);
                }
            }
        }
    }

    pub fn apply(&self, w: &Word) -> Word {
        assert_eq!(w.rank(), self.rank(), "automorphism rank mismatch");
        let mut out = Vec::with_capacity(w.len() + 4);
        for &z in w.letters() {
            self.push_image(z, &mut out);
        }
        Word::from_reduced_unchecked(out, w.rank())
    }

    pub fn apply_cyclic(&self, w: &CyclicWord) -> CyclicWord {
        CyclicWord::new(&self.apply(w.representative()))
    }

    pub fn inverse(&self) -> WhiteheadAutomorphism {
        match self {
            WhiteheadAutomorphism::TypeI { rank, images } => {
                let mut inv = vec![Letter::positive(1); *rank];
                for (g, image) in images.iter().enumerate() {
                    inv[image.generator() - 1] = Letter::new(g + 1, image.is_inverse());
                }
                WhiteheadAutomorphism::TypeI { rank: *rank, images: inv }
            }
            WhiteheadAutomorphism::TypeII { rank, multiplier, subset } => {
                let m = multiplier.index();
                let flipped = (subset & !(1 << m)) | (1 << (m ^ 1));
                WhiteheadAutomorphism::TypeII { rank: *rank, multiplier: multiplier.inverse(), subset: flipped }
            }
        }
    }

    /// Acts as the identity (`S = {x}`).
    pub fn is_identity(&self) -> bool {
        match self {
            WhiteheadAutomorphism::TypeI { images, .. } => {
                images.iter().enumerate().all(|(g, l)| *l == Letter::positive(g + 1))
            }
            WhiteheadAutomorphism::TypeII { multiplier, subset, .. } => *subset == 1 << multiplier.index(),
        }
    }

    /// Conjugation by a letter (`S` = everything but `x⁻¹`); trivial on
    /// cyclic words.
    pub fn is_inner(&self) -> bool {
        match self {
            WhiteheadAutomorphism::TypeI { .. } => false,
            WhiteheadAutomorphism::TypeII { rank, multiplier, subset } => {
                let full = full_mask(*rank);
                *subset == full & !(1 << multiplier.inverse().index())
            }
        }
    }

    pub fn to_record(&self) -> AutomorphismRecord {
        let rank = self.rank();
        match self {
            WhiteheadAutomorphism::TypeI { images, .. } => AutomorphismRecord {
                kind: "I".into(),
                rank,
                multiplier: None,
                subset: None,
                images: Some(images.iter().map(|l| l.symbol(rank)).collect()),
            },
            WhiteheadAutomorphism::TypeII { multiplier, subset, .. } => AutomorphismRecord {
                kind: "II".into(),
                rank,
                multiplier: Some(multiplier.symbol(rank)),
                subset: Some(
                    (0..alphabet_size(rank))
                        .filter(|i| subset & (1 << i) != 0)
                        .map(|i| Letter::from_index(i).symbol(rank))
                        .collect(),
                ),
                images: None,
            },
        }
    }

    pub fn from_record(record: &AutomorphismRecord) -> Result<WhiteheadAutomorphism, WhiteheadError> {
        let rank = record.rank;
        let letter = |s: &str| -> Result<Letter, WhiteheadError> {
            let w = Word::parse(s, rank)?;
            match w.letters() {
                [l] => Ok(*l),
                _ => Err(WhiteheadError::BadRecord(format!("{s:?} is not a single letter"))),
            }
        };
        match record.kind.as_str() {
            "I" => {
                let images = record
                    .images
                    .as_ref()
                    .ok_or_else(|| WhiteheadError::BadRecord("type I record without images".into()))?
                    .iter()
                    .map(|s| letter(s))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut seen = vec![false; rank];
                for l in &images {
                    if std::mem::replace(&mut seen[l.generator() - 1], true) {
                        return Err(WhiteheadError::BadRecord("images are not a signed permutation".into()));
                    }
                }
                if images.len() != rank {
                    return Err(WhiteheadError::BadRecord("wrong number of images".into()));
                }
                Ok(WhiteheadAutomorphism::TypeI { rank, images })
            }
            "II" => {
                let multiplier = letter(
                    record
                        .multiplier
                        .as_deref()
                        .ok_or_else(|| WhiteheadError::BadRecord("type II record without multiplier".into()))?,
                )?;
                let mut subset = 0u64;
                for s in record.subset.as_deref().unwrap_or_default() {
                    subset |= 1 << letter(s)?.index();
                }
                let m = multiplier.index();
                if subset & (1 << m) == 0 || subset & (1 << (m ^ 1)) != 0 {
                    return Err(WhiteheadError::BadRecord("subset must contain x and not x^-1".into()));
                }
                Ok(WhiteheadAutomorphism::TypeII { rank, multiplier, subset })
            }
            other => Err(WhiteheadError::BadRecord(format!("unknown kind {other:?}"))),
        }
    }
}

/// JSON form of an automorphism in a trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomorphismRecord {
    pub kind: String,
    pub rank: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub multiplier: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub subset: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub images: Option<Vec<String>>,
}

impl Serialize for WhiteheadAutomorphism {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_record().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for WhiteheadAutomorphism {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let record = AutomorphismRecord::deserialize(deserializer)?;
        WhiteheadAutomorphism::from_record(&record).map_err(serde::de::Error::custom)
    }
}

fn full_mask(rank: usize) -> u64 {
    let n = alphabet_size(rank);
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Spreads the bits of `free` over the letter positions other than
/// `multiplier` and its inverse, then adds the multiplier bit.
fn subset_from_free_bits(rank: usize, multiplier: usize, free: u64) -> u64 {
    let pair = multiplier & !1;
    let mut subset = 1u64 << multiplier;
    let mut bit = 0;
    for pos in 0..alphabet_size(rank) {
        if pos == pair || pos == pair + 1 {
            continue;
        }
        if free & (1 << bit) != 0 {
            subset |= 1 << pos;
        }
        bit += 1;
    }
    subset
}

/// Number of Type II pairs `(x, S)`: `2r · 2^{2r-2}`.
pub fn type_two_count(rank: usize) -> usize {
    2 * rank * (1usize << (2 * rank - 2))
}

/// Census of the generating set returned by [`whitehead_generators`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeneratorCensus {
    /// All `(x, S)` pairs, `2r · 2^{2r-2}`.
    pub type_two_total: usize,
    /// Pairs with `S = {x}`, one per letter.
    pub type_two_identity: usize,
    /// Pairs acting as conjugation by a letter, one per letter.
    pub type_two_inner: usize,
    /// Signed transpositions plus one inversion.
    pub type_one_generators: usize,
}

/// All Type II Whitehead automorphisms in canonical order (multiplier index
/// ascending, subset bitmask ascending), followed by a generating set of the
/// Type I group: adjacent transpositions and the inversion of `a_1`.
pub fn whitehead_generators(rank: usize) -> Result<Vec<WhiteheadAutomorphism>, WhiteheadError> {
    if !(2..=MAX_RANK).contains(&rank) || rank > 16 {
        return Err(WhiteheadError::UnsupportedRank(rank));
    }
    let mut out = Vec::with_capacity(type_two_count(rank) + rank);
    for m in 0..alphabet_size(rank) {
        for free in 0..(1u64 << (2 * rank - 2)) {
            out.push(WhiteheadAutomorphism::TypeII {
                rank,
                multiplier: Letter::from_index(m),
                subset: subset_from_free_bits(rank, m, free),
            });
        }
    }
    out.extend(type_one_generators(rank));
    Ok(out)
}

pub fn census(rank: usize) -> GeneratorCensus {
    GeneratorCensus {
        type_two_total: type_two_count(rank),
        type_two_identity: alphabet_size(rank),
        type_two_inner: alphabet_size(rank),
        type_one_generators: type_one_generators(rank).len(),
    }
}

fn type_one_generators(rank: usize) -> Vec<WhiteheadAutomorphism> {
    let identity: Vec<Letter> = (1..=rank).map(Letter::positive).collect();
    let mut out = Vec::new();
    for g in 0..rank - 1 {
        let mut images = identity.clone();
        images.swap(g, g + 1);
        out.push(WhiteheadAutomorphism::TypeI { rank, images });
    }
    let mut images = identity;
    images[0] = images[0].inverse();
    out.push(WhiteheadAutomorphism::TypeI { rank, images });
    out
}

/// Every signed permutation of the generators (`2^r · r!` elements).
pub fn type_one_group(rank: usize) -> Vec<WhiteheadAutomorphism> {
    fn permutations(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == items.len() {
            out.push(items.clone());
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permutations(items, k + 1, out);
            items.swap(k, i);
        }
    }
    let mut perms = Vec::new();
    permutations(&mut (1..=rank).collect(), 0, &mut perms);
    let mut out = Vec::new();
    for perm in perms {
        for signs in 0..(1u32 << rank) {
            let images = perm.iter().enumerate().map(|(i, &g)| Letter::new(g, signs & (1 << i) != 0)).collect();
            out.push(WhiteheadAutomorphism::TypeI { rank, images });
        }
    }
    out
}

/// Enumeration order of the Type II moves tried during descent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TieBreak {
    /// Multiplier ascending, subset ascending.
    #[default]
    Forward,
    /// Multiplier descending, subset descending.
    Reverse,
}

/// Maximal runs of the multiplier generator between consecutive other
/// letters of a cyclic word, as `(x, m, y)`: letter before, signed
/// exponent of the run, letter after.
struct Gaps {
    gaps: Vec<(Letter, i64, Letter)>,
    /// Total `|m|` over all gaps.
    run_length: i64,
    /// Set when the word is a power of the multiplier.
    pure_power: bool,
}

fn gaps_for(letters: &[Letter], multiplier_generator: usize) -> Gaps {
    let n = letters.len();
    let others: Vec<usize> = (0..n).filter(|&i| letters[i].generator() != multiplier_generator).collect();
    if others.is_empty() {
        return Gaps { gaps: Vec::new(), run_length: n as i64, pure_power: true };
    }
    let mut gaps = Vec::with_capacity(others.len());
    let mut run_length = 0;
    for (j, &i) in others.iter().enumerate() {
        let next = others[(j + 1) % others.len()];
        let between = (next + n - i - 1) % n;
        let mut m = 0i64;
        for s in 1..=between {
            m += if letters[(i + s) % n].is_inverse() { -1 } else { 1 };
        }
        run_length += m.abs();
        gaps.push((letters[i], m, letters[next]));
    }
    Gaps { gaps, run_length, pure_power: false }
}

/// Change in cyclic length caused by the Type II move `(x, S)` where `x`
/// has positive orientation `sign` (`+1` for `x = a_g`, `-1` for `a_g⁻¹`).
fn length_change(g: &Gaps, multiplier: Letter, subset: u64) -> i64 {
    if g.pure_power {
        return 0;
    }
    let sign = if multiplier.is_inverse() { -1 } else { 1 };
    let mut total = 0;
    for &(x, m, y) in &g.gaps {
        let tail = i64::from(subset & (1 << x.index()) != 0);
        let head = i64::from(subset & (1 << y.inverse().index()) != 0);
        total += (sign * (tail - head) + m).abs();
    }
    total - g.run_length
}

/// Greedy length descent by Type II moves; returns a word of minimal length
/// in its automorphic orbit and the moves applied.
pub fn whitehead_minimize(w: &CyclicWord) -> (CyclicWord, Vec<WhiteheadAutomorphism>) {
    whitehead_minimize_with(w, TieBreak::Forward)
}

pub fn whitehead_minimize_with(w: &CyclicWord, order: TieBreak) -> (CyclicWord, Vec<WhiteheadAutomorphism>) {
    let rank = w.rank();
    let mut current = w.clone();
    let mut trace = Vec::new();
    if rank < 2 || current.len() <= 1 {
        return (current, trace);
    }
    'descent: loop {
        if let Some(auto) = first_shortening(&current, order) {
            current = auto.apply_cyclic(&current);
            trace.push(auto);
            if current.len() <= 1 {
                break 'descent;
            }
        } else {
            break 'descent;
        }
    }
    (current, trace)
}

fn first_shortening(w: &CyclicWord, order: TieBreak) -> Option<WhiteheadAutomorphism> {
    let rank = w.rank();
    let letters = w.representative().letters();
    let free_count = 1u64 << (2 * rank - 2);
    let multipliers: Vec<usize> = match order {
        TieBreak::Forward => (0..alphabet_size(rank)).collect(),
        TieBreak::Reverse => (0..alphabet_size(rank)).rev().collect(),
    };
    let mut cached: Option<(usize, Gaps)> = None;
    for m in multipliers {
        let generator = m / 2 + 1;
        if cached.as_ref().map(|c| c.0) != Some(generator) {
            cached = Some((generator, gaps_for(letters, generator)));
        }
        let gaps = &cached.as_ref().unwrap().1;
        if gaps.pure_power {
            continue;
        }
        let multiplier = Letter::from_index(m);
        for step in 0..free_count {
            let free = match order {
                TieBreak::Forward => step,
                TieBreak::Reverse => free_count - 1 - step,
            };
            let subset = subset_from_free_bits(rank, m, free);
            if length_change(gaps, multiplier, subset) < 0 {
                return Some(WhiteheadAutomorphism::TypeII { rank, multiplier, subset });
            }
        }
    }
    None
}

/// Why a word was judged primitive, or evidence that it is not.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "evidence", rename_all = "snake_case")]
pub enum Primitivity {
    /// Some generator occurs exactly once in the cyclic reduction.
    SingleOccurrence { generator: usize },
    /// Descent reached a single letter.
    MinimizationTrace { trace: Vec<WhiteheadAutomorphism>, minimal: Word },
    /// The Whitehead graph of a cyclically reduced form has no cut vertex.
    NoCutVertex { witness: Word },
    /// Descent stopped above length one.
    MinimalLength { minimal: Word, trace: Vec<WhiteheadAutomorphism> },
}

impl Primitivity {
    pub fn is_primitive(&self) -> bool {
        matches!(self, Primitivity::SingleOccurrence { .. } | Primitivity::MinimizationTrace { .. })
    }
}

fn nontrivial_core(w: &Word) -> Result<CyclicWord, WhiteheadError> {
    let core = CyclicWord::new(w);
    if core.is_empty() {
        return Err(WhiteheadError::TrivialWord);
    }
    if core.rank() > MAX_RANK {
        return Err(WhiteheadError::UnsupportedRank(core.rank()));
    }
    Ok(core)
}

fn single_occurrence(core: &CyclicWord) -> Option<usize> {
    core.representative().occurrences().iter().position(|&c| c == 1).map(|g| g + 1)
}

pub fn primitivity(w: &Word) -> Result<Primitivity, WhiteheadError> {
    primitivity_with(w, TieBreak::Forward)
}

pub fn primitivity_with(w: &Word, order: TieBreak) -> Result<Primitivity, WhiteheadError> {
    let core = nontrivial_core(w)?;
    if let Some(generator) = single_occurrence(&core) {
        return Ok(Primitivity::SingleOccurrence { generator });
    }
    if core.rank() == 1 {
        // a^k with |k| >= 2
        return Ok(Primitivity::MinimalLength { minimal: core.into_word(), trace: Vec::new() });
    }
    if !whitehead_graph(&core)?.has_cut_vertex() {
        return Ok(Primitivity::NoCutVertex { witness: core.into_word() });
    }
    let (minimal, trace) = whitehead_minimize_with(&core, order);
    if minimal.len() == 1 {
        Ok(Primitivity::MinimizationTrace { trace, minimal: minimal.into_word() })
    } else {
        Ok(Primitivity::MinimalLength { minimal: minimal.into_word(), trace })
    }
}

pub fn is_primitive(w: &Word) -> Result<bool, WhiteheadError> {
    Ok(primitivity(w)?.is_primitive())
}

/// Why a word was judged simple, or evidence that it is not.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "evidence", rename_all = "snake_case")]
pub enum Simplicity {
    /// Applying `trace` to the cyclic reduction yields `image`, which does
    /// not involve `generator`.
    OmittedGenerator { generator: usize, trace: Vec<WhiteheadAutomorphism>, image: Word },
    /// An element of the orbit has a Whitehead graph without cut vertex.
    NoCutVertex { witness: Word, trace: Vec<WhiteheadAutomorphism> },
    /// The whole minimal-length level set was searched without finding a
    /// word omitting a generator.
    LevelSetExhausted { minimal: Word, states: usize },
}

impl Simplicity {
    pub fn is_simple(&self) -> bool {
        matches!(self, Simplicity::OmittedGenerator { .. })
    }
}

fn omitted_generator(w: &CyclicWord) -> Option<usize> {
    w.representative().occurrences().iter().position(|&c| c == 0).map(|g| g + 1)
}

pub fn simplicity(w: &Word) -> Result<Simplicity, WhiteheadError> {
    simplicity_with(w, TieBreak::Forward)
}

/// Decides membership in a proper free factor: minimize, then search the
/// minimal-length level set (modulo rotation and inversion) under Type II
/// moves for a word that omits a generator.
pub fn simplicity_with(w: &Word, order: TieBreak) -> Result<Simplicity, WhiteheadError> {
    let core = nontrivial_core(w)?;
    if core.rank() < 2 {
        return Err(WhiteheadError::UnsupportedRank(core.rank()));
    }
    if let Some(generator) = omitted_generator(&core) {
        return Ok(Simplicity::OmittedGenerator { generator, trace: Vec::new(), image: core.into_word() });
    }
    if !whitehead_graph(&core)?.has_cut_vertex() {
        return Ok(Simplicity::NoCutVertex { witness: core.into_word(), trace: Vec::new() });
    }
    let (minimal, trace) = whitehead_minimize_with(&core, order);
    let rank = core.rank();

    let key = |c: &CyclicWord| c.canonical_up_to_inversion();
    let mut parents: HashMap<Word, Option<(Word, WhiteheadAutomorphism)>> = HashMap::new();
    let mut words: HashMap<Word, CyclicWord> = HashMap::new();
    let start = key(&minimal);
    parents.insert(start.clone(), None);
    words.insert(start.clone(), minimal.clone());
    let mut queue = VecDeque::from([start]);

    let path_to = |parents: &HashMap<Word, Option<(Word, WhiteheadAutomorphism)>>, mut k: Word| {
        let mut moves = Vec::new();
        while let Some(Some((parent, auto))) = parents.get(&k) {
            moves.push(auto.clone());
            k = parent.clone();
        }
        moves.reverse();
        moves
    };

    while let Some(k) = queue.pop_front() {
        let current = words[&k].clone();
        if let Some(generator) = omitted_generator(&current) {
            let mut full = trace.clone();
            full.extend(path_to(&parents, k));
            let image = replay(&core, &full);
            return Ok(Simplicity::OmittedGenerator { generator, trace: full, image: image.into_word() });
        }
        if !whitehead_graph(&current)?.has_cut_vertex() {
            let mut full = trace.clone();
            full.extend(path_to(&parents, k));
            let witness = replay(&core, &full);
            return Ok(Simplicity::NoCutVertex { witness: witness.into_word(), trace: full });
        }
        for auto in level_moves(&current, rank) {
            let image = auto.apply_cyclic(&current);
            debug_assert_eq!(image.len(), current.len());
            let ik = key(&image);
            if !parents.contains_key(&ik) {
                parents.insert(ik.clone(), Some((k.clone(), auto)));
                words.insert(ik.clone(), image);
                queue.push_back(ik);
            }
        }
    }
    Ok(Simplicity::LevelSetExhausted { minimal: minimal.into_word(), states: parents.len() })
}

/// Non-trivial Type II moves that keep the cyclic length unchanged.
fn level_moves(w: &CyclicWord, rank: usize) -> Vec<WhiteheadAutomorphism> {
    let letters = w.representative().letters();
    let mut out = Vec::new();
    for generator in 1..=rank {
        let gaps = gaps_for(letters, generator);
        if gaps.pure_power {
            continue;
        }
        for m in [2 * (generator - 1), 2 * (generator - 1) + 1] {
            let multiplier = Letter::from_index(m);
            for free in 0..(1u64 << (2 * rank - 2)) {
                let subset = subset_from_free_bits(rank, m, free);
                let auto = WhiteheadAutomorphism::TypeII { rank, multiplier, subset };
                if auto.is_identity() || auto.is_inner() {
                    continue;
                }
                if length_change(&gaps, multiplier, subset) == 0 {
                    out.push(auto);
                }
            }
        }
    }
    out
}

/// Applies `trace` in order to a cyclic word.
pub fn replay(w: &CyclicWord, trace: &[WhiteheadAutomorphism]) -> CyclicWord {
    trace.iter().fold(w.clone(), |acc, auto| auto.apply_cyclic(&acc))
}

pub fn is_simple(w: &Word) -> Result<bool, WhiteheadError> {
    Ok(simplicity(w)?.is_simple())
}
