//! Labelled graphs over the free-group alphabet: Stallings folding, covers
//! of the rose, spanning trees, dual bases and rewriting.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::words::{alphabet_size, Letter, Word, WordError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StallingsError {
    #[error("graph is not folded")]
    NotFolded,
    #[error("graph is not connected")]
    Disconnected,
    #[error("graph is not a cover of the rose")]
    NotACover,
    #[error("word {0} does not label a loop at the basepoint")]
    NotInSubgroup(String),
    #[error("degree must be at least 1, got {0}")]
    InvalidDegree(usize),
    #[error("invalid permutation data: {0}")]
    InvalidPermutation(String),
    #[error("edge set is not a spanning tree: {0}")]
    NotASpanningTree(String),
    #[error("rank mismatch: graph has rank {graph}, word has rank {word}")]
    RankMismatch { graph: usize, word: usize },
    #[error("this operation needs rank {expected}, graph has rank {found}")]
    UnsupportedRank { expected: usize, found: usize },
    #[error(transparent)]
    Word(#[from] WordError),
}

/// A positively oriented edge labelled by generator `generator` (1-based);
/// its reverse carries the inverse label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub generator: usize,
}

impl Edge {
    pub fn label(&self) -> Letter {
        Letter::positive(self.generator)
    }
}

/// A finite graph labelled by `a_1, …, a_N` with a basepoint. Edges are
/// stored once, positively oriented; the involution is implicit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AGraph {
    rank: usize,
    vertex_count: usize,
    basepoint: usize,
    edges: Vec<Edge>,
}

/// Transition table of a folded graph: `(target, edge index)` for each
/// vertex and letter.
#[derive(Clone, Debug)]
pub struct Transitions {
    letters: usize,
    table: Vec<Option<(usize, usize)>>,
}

impl Transitions {
    pub fn step(&self, v: usize, letter: Letter) -> Option<usize> {
        self.table[v * self.letters + letter.index()].map(|(t, _)| t)
    }

    pub fn step_edge(&self, v: usize, letter: Letter) -> Option<(usize, usize)> {
        self.table[v * self.letters + letter.index()]
    }

    pub fn trace(&self, start: usize, w: &Word) -> Option<usize> {
        w.letters().iter().try_fold(start, |v, &l| self.step(v, l))
    }
}

struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns `(kept, absorbed)` roots, or `None` if already joined.
    fn union(&mut self, a: usize, b: usize) -> Option<(usize, usize)> {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return None;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        Some((ra, rb))
    }
}

impl AGraph {
    pub fn new(rank: usize, vertex_count: usize, basepoint: usize) -> AGraph {
        assert!(basepoint < vertex_count.max(1));
        AGraph { rank, vertex_count: vertex_count.max(1), basepoint, edges: Vec::new() }
    }

    /// The rose `R_N`: one vertex with a loop per generator.
    pub fn rose(rank: usize) -> AGraph {
        let mut g = AGraph::new(rank, 1, 0);
        for generator in 1..=rank {
            g.add_edge(0, 0, generator);
        }
        g
    }

    pub fn add_vertex(&mut self) -> usize {
        self.vertex_count += 1;
        self.vertex_count - 1
    }

    /// Adds a positively oriented edge and returns its index.
    pub fn add_edge(&mut self, from: usize, to: usize, generator: usize) -> usize {
        assert!(from < self.vertex_count && to < self.vertex_count, "edge endpoint out of range");
        assert!((1..=self.rank).contains(&generator), "generator out of range");
        self.edges.push(Edge { from, to, generator });
        self.edges.len() - 1
    }

    /// Adds an edge reading `letter` from `from` to `to`.
    pub fn add_letter_edge(&mut self, from: usize, to: usize, letter: Letter) -> usize {
        if letter.is_inverse() {
            self.add_edge(to, from, letter.generator())
        } else {
            self.add_edge(from, to, letter.generator())
        }
    }

    /// Attaches a subdivided circle reading `w` at the basepoint.
    pub fn attach_loop(&mut self, w: &Word) -> Result<(), StallingsError> {
        if w.rank() != self.rank {
            return Err(StallingsError::RankMismatch { graph: self.rank, word: w.rank() });
        }
        let n = w.len();
        let mut current = self.basepoint;
        for (i, &l) in w.letters().iter().enumerate() {
            let next = if i + 1 == n { self.basepoint } else { self.add_vertex() };
            self.add_letter_edge(current, next, l);
            current = next;
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, index: usize) -> Edge {
        self.edges[index]
    }

    /// Number of oriented edges leaving `v` (loops count twice).
    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().map(|e| usize::from(e.from == v) + usize::from(e.to == v)).sum()
    }

    pub fn is_folded(&self) -> bool {
        self.transitions().is_ok()
    }

    pub fn transitions(&self) -> Result<Transitions, StallingsError> {
        let letters = alphabet_size(self.rank);
        let mut table = vec![None; self.vertex_count * letters];
        for (i, e) in self.edges.iter().enumerate() {
            let fwd = e.from * letters + e.label().index();
            let bwd = e.to * letters + e.label().inverse().index();
            if table[fwd].is_some() || table[bwd].is_some() {
                return Err(StallingsError::NotFolded);
            }
            table[fwd] = Some((e.to, i));
            table[bwd] = Some((e.from, i));
        }
        Ok(Transitions { letters, table })
    }

    pub fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for e in &self.edges {
            adj[e.from].push(e.to);
            adj[e.to].push(e.from);
        }
        let mut seen = vec![false; self.vertex_count];
        seen[self.basepoint] = true;
        let mut stack = vec![self.basepoint];
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == self.vertex_count
    }

    /// Folded, connected and `2N`-regular.
    pub fn is_cover(&self) -> bool {
        self.edges.len() == self.rank * self.vertex_count && self.is_folded() && self.is_connected()
    }

    /// Identifies vertices in the given pairs without folding; the result
    /// is renumbered in ascending order of class representatives.
    pub fn quotient(&self, pairs: &[(usize, usize)]) -> AGraph {
        self.quotient_with_map(pairs).0
    }

    /// As [`AGraph::quotient`], also returning the image of each old vertex.
    pub fn quotient_with_map(&self, pairs: &[(usize, usize)]) -> (AGraph, Vec<usize>) {
        let mut ds = DisjointSet::new(self.vertex_count);
        for &(u, v) in pairs {
            ds.union(u, v);
        }
        self.relabel_by_classes(&mut ds)
    }

    fn relabel_by_classes(&self, ds: &mut DisjointSet) -> (AGraph, Vec<usize>) {
        let mut label = vec![usize::MAX; self.vertex_count];
        let mut next = 0;
        for v in 0..self.vertex_count {
            let r = ds.find(v);
            if label[r] == usize::MAX {
                label[r] = next;
                next += 1;
            }
        }
        let map = |ds: &mut DisjointSet, v: usize| label[ds.find(v)];
        let mut g = AGraph::new(self.rank, next, map(ds, self.basepoint));
        for e in &self.edges {
            let (f, t) = (map(ds, e.from), map(ds, e.to));
            g.edges.push(Edge { from: f, to: t, generator: e.generator });
        }
        let images = (0..self.vertex_count).map(|v| map(ds, v)).collect();
        (g, images)
    }

    /// Stallings folding: repeatedly identifies pairs of edges with a common
    /// origin and label, using a worklist over a union-find of vertices.
    pub fn fold(&self) -> AGraph {
        let letters = alphabet_size(self.rank);
        let n = self.vertex_count;
        let mut out: Vec<Vec<Option<usize>>> = vec![vec![None; letters]; n];
        let mut pending: Vec<(usize, usize)> = Vec::new();
        let mut ds = DisjointSet::new(n);

        let add =
            |out: &mut Vec<Vec<Option<usize>>>, pending: &mut Vec<(usize, usize)>, v: usize, l: usize, t: usize| {
                match out[v][l] {
                    Some(existing) => pending.push((existing, t)),
                    None => out[v][l] = Some(t),
                }
            };
        for e in &self.edges {
            let l = e.label().index();
            add(&mut out, &mut pending, e.from, l, e.to);
            add(&mut out, &mut pending, e.to, l ^ 1, e.from);
        }
        while let Some((x, y)) = pending.pop() {
            if let Some((kept, absorbed)) = ds.union(x, y) {
                let moved = std::mem::take(&mut out[absorbed]);
                for (l, t) in moved.into_iter().enumerate() {
                    if let Some(t) = t {
                        add(&mut out, &mut pending, kept, l, t);
                    }
                }
            }
        }

        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        for v in 0..n {
            let r = ds.find(v);
            if label[r] == usize::MAX {
                label[r] = next;
                next += 1;
            }
        }
        let mut g = AGraph::new(self.rank, next, label[ds.find(self.basepoint)]);
        let mut reps: Vec<usize> = (0..n).filter(|&v| ds.find(v) == v).collect();
        reps.sort_by_key(|&r| label[r]);
        for r in reps {
            for generator in 1..=self.rank {
                if let Some(t) = out[r][2 * (generator - 1)] {
                    let t = label[ds.find(t)];
                    g.edges.push(Edge { from: label[r], to: t, generator });
                }
            }
        }
        g
    }

    /// Whether `w` labels a loop at the basepoint (of the folded graph).
    pub fn contains(&self, w: &Word) -> bool {
        if w.rank() != self.rank {
            return false;
        }
        let folded;
        let graph = if self.is_folded() {
            self
        } else {
            folded = self.fold();
            &folded
        };
        let t = graph.transitions().expect("folded");
        t.trace(graph.basepoint, w) == Some(graph.basepoint)
    }

    /// Basepoint-preserving label isomorphism between connected folded graphs.
    pub fn is_isomorphic(&self, other: &AGraph) -> bool {
        if self.rank != other.rank || self.vertex_count != other.vertex_count || self.edges.len() != other.edges.len() {
            return false;
        }
        let (Ok(ta), Ok(tb)) = (self.transitions(), other.transitions()) else {
            return false;
        };
        let mut forward = vec![usize::MAX; self.vertex_count];
        let mut backward = vec![usize::MAX; other.vertex_count];
        forward[self.basepoint] = other.basepoint;
        backward[other.basepoint] = self.basepoint;
        let mut queue = VecDeque::from([self.basepoint]);
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            let image = forward[v];
            for l in crate::words::alphabet(self.rank) {
                match (ta.step(v, l), tb.step(image, l)) {
                    (None, None) => {}
                    (Some(x), Some(y)) => {
                        if forward[x] == usize::MAX && backward[y] == usize::MAX {
                            forward[x] = y;
                            backward[y] = x;
                            reached += 1;
                            queue.push_back(x);
                        } else if forward[x] != y || backward[y] != x {
                            return false;
                        }
                    }
                    _ => return false,
                }
            }
        }
        reached == self.vertex_count
    }

    /// DOT rendering; `a_1` edges red, `a_2` blue, others black.
    pub fn to_dot(&self) -> String {
        const COLORS: [&str; 4] = ["red", "blue", "darkgreen", "orange"];
        let mut out = String::from("digraph agraph {\n");
        for v in 0..self.vertex_count {
            let shape = if v == self.basepoint { "doublecircle" } else { "circle" };
            let _ = writeln!(out, "  v{v} [shape={shape}];");
        }
        for e in &self.edges {
            let color = COLORS.get(e.generator - 1).copied().unwrap_or("black");
            let _ = writeln!(
                out,
                "  v{} -> v{} [label=\"{}\", color={}];",
                e.from,
                e.to,
                e.label().symbol(self.rank),
                color
            );
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Serialize, Deserialize)]
struct AGraphRepr {
    rank: usize,
    vertices: usize,
    basepoint: usize,
    edges: Vec<(usize, usize, String)>,
}

impl Serialize for AGraph {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        AGraphRepr {
            rank: self.rank,
            vertices: self.vertex_count,
            basepoint: self.basepoint,
            edges: self.edges.iter().map(|e| (e.from, e.to, e.label().symbol(self.rank))).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AGraph {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<AGraph, D::Error> {
        let repr = AGraphRepr::deserialize(deserializer)?;
        if repr.basepoint >= repr.vertices.max(1) {
            return Err(D::Error::custom("basepoint out of range"));
        }
        let mut g = AGraph::new(repr.rank, repr.vertices, repr.basepoint);
        for (from, to, label) in repr.edges {
            let w = Word::parse(&label, repr.rank).map_err(D::Error::custom)?;
            match w.letters() {
                [l] if from < g.vertex_count && to < g.vertex_count => {
                    g.add_letter_edge(from, to, *l);
                }
                _ => return Err(D::Error::custom(format!("bad edge ({from}, {to}, {label:?})"))),
            }
        }
        Ok(g)
    }
}

/// Folded graph of the subgroup generated by `generators`.
pub fn subgroup_graph(generators: &[Word], rank: usize) -> Result<AGraph, StallingsError> {
    let mut g = AGraph::new(rank, 1, 0);
    for w in generators {
        g.attach_loop(w)?;
    }
    Ok(g.fold())
}

/// A transitive action of the generators on `{0, …, degree-1}`; the
/// subgroup is the stabilizer of 0. `perms[g-1][v]` is the endpoint of the
/// `a_g`-edge leaving `v`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoverPermutations {
    degree: usize,
    perms: Vec<Vec<usize>>,
}

impl CoverPermutations {
    pub fn new(perms: Vec<Vec<usize>>) -> Result<CoverPermutations, StallingsError> {
        let degree = perms.first().map(Vec::len).unwrap_or(0);
        if degree == 0 {
            return Err(StallingsError::InvalidDegree(0));
        }
        for p in &perms {
            if p.len() != degree {
                return Err(StallingsError::InvalidPermutation("permutations of different size".into()));
            }
            let mut seen = vec![false; degree];
            for &x in p {
                if x >= degree || std::mem::replace(&mut seen[x], true) {
                    return Err(StallingsError::InvalidPermutation(format!("{p:?} is not a permutation")));
                }
            }
        }
        let c = CoverPermutations { degree, perms };
        if !c.is_transitive() {
            return Err(StallingsError::Disconnected);
        }
        Ok(c)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn rank(&self) -> usize {
        self.perms.len()
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    pub fn step(&self, v: usize, letter: Letter) -> usize {
        let p = &self.perms[letter.generator() - 1];
        if letter.is_inverse() {
            p.iter().position(|&x| x == v).expect("permutation")
        } else {
            p[v]
        }
    }

    /// Endpoint of the path reading `w` from `v`.
    pub fn act(&self, v: usize, w: &Word) -> usize {
        let inverses = self.inverse_perms();
        w.letters().iter().fold(v, |v, l| {
            if l.is_inverse() {
                inverses[l.generator() - 1][v]
            } else {
                self.perms[l.generator() - 1][v]
            }
        })
    }

    fn inverse_perms(&self) -> Vec<Vec<usize>> {
        self.perms
            .iter()
            .map(|p| {
                let mut inv = vec![0; self.degree];
                for (i, &x) in p.iter().enumerate() {
                    inv[x] = i;
                }
                inv
            })
            .collect()
    }

    pub fn contains(&self, w: &Word) -> bool {
        w.rank() == self.rank() && self.act(0, w) == 0
    }

    pub fn is_transitive(&self) -> bool {
        let mut seen = vec![false; self.degree];
        seen[0] = true;
        let mut stack = vec![0];
        let mut count = 1;
        let inverses = self.inverse_perms();
        while let Some(v) = stack.pop() {
            for p in self.perms.iter().chain(inverses.iter()) {
                let u = p[v];
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == self.degree
    }

    /// The cover as an A-graph; edge `(g-1)·degree + v` is the `a_g`-edge
    /// leaving `v`.
    pub fn to_graph(&self) -> AGraph {
        let mut g = AGraph::new(self.rank(), self.degree, 0);
        for (gi, p) in self.perms.iter().enumerate() {
            for (v, &t) in p.iter().enumerate() {
                g.add_edge(v, t, gi + 1);
            }
        }
        g
    }

    pub fn from_graph(g: &AGraph) -> Result<CoverPermutations, StallingsError> {
        if !g.is_cover() {
            return Err(StallingsError::NotACover);
        }
        let t = g.transitions()?;
        // renumber so that the basepoint becomes 0
        let n = g.vertex_count();
        let relabel = |v: usize| {
            if v == g.basepoint() {
                0
            } else if v == 0 {
                g.basepoint()
            } else {
                v
            }
        };
        let mut perms = vec![vec![0; n]; g.rank()];
        for (gi, p) in perms.iter_mut().enumerate() {
            for v in 0..n {
                let target = t.step(v, Letter::positive(gi + 1)).ok_or(StallingsError::NotACover)?;
                p[relabel(v)] = relabel(target);
            }
        }
        CoverPermutations::new(perms)
    }

    /// Relabels vertices in first-visit order of a breadth-first search from
    /// 0 with letters in the order `a_1 < a_1⁻¹ < a_2 < …`.
    pub fn canonical(&self) -> CoverPermutations {
        let mut label = vec![usize::MAX; self.degree];
        let mut order = vec![0];
        label[0] = 0;
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for l in crate::words::alphabet(self.rank()) {
                let u = self.step(v, l);
                if label[u] == usize::MAX {
                    label[u] = order.len();
                    order.push(u);
                }
            }
        }
        let perms = self
            .perms
            .iter()
            .map(|p| {
                let mut q = vec![0; self.degree];
                for v in 0..self.degree {
                    q[label[v]] = label[p[v]];
                }
                q
            })
            .collect();
        CoverPermutations { degree: self.degree, perms }
    }
}

/// Streams every subgroup of index `degree` in `F_rank` exactly once, as a
/// canonically labelled transitive permutation action.
///
/// Cells `(v, x)` of the coset table are filled in order of `v`, then of the
/// letter index of `x`; a cell either points to an existing vertex whose
/// matching inverse cell is free, or to the next unused vertex number. This
/// produces exactly the tables whose labelling agrees with the breadth-first
/// relabelling of [`CoverPermutations::canonical`].
pub fn enumerate_covers(rank: usize, degree: usize) -> Result<CoverEnumerator, StallingsError> {
    if degree < 1 {
        return Err(StallingsError::InvalidDegree(degree));
    }
    Ok(CoverEnumerator::new(rank, degree))
}

pub struct CoverEnumerator {
    rank: usize,
    degree: usize,
    letters: usize,
    table: Vec<Option<usize>>,
    used: usize,
    stack: Vec<Frame>,
    descending: bool,
    finished: bool,
}

#[derive(Clone, Copy)]
struct Frame {
    cell: usize,
    target: usize,
    created: bool,
}

impl CoverEnumerator {
    fn new(rank: usize, degree: usize) -> CoverEnumerator {
        let letters = alphabet_size(rank);
        CoverEnumerator {
            rank,
            degree,
            letters,
            table: vec![None; degree * letters],
            used: 1,
            stack: Vec::new(),
            descending: true,
            finished: false,
        }
    }

    /// Assigns the smallest admissible target `>= from` to `cell`.
    fn try_assign(&mut self, cell: usize, from: usize) -> bool {
        let (v, l) = (cell / self.letters, cell % self.letters);
        let limit = if self.used < self.degree { self.used + 1 } else { self.used };
        for t in from..limit {
            let back = t * self.letters + (l ^ 1);
            if self.table[back].is_some() {
                continue;
            }
            let created = t == self.used;
            if created {
                self.used += 1;
            }
            self.table[cell] = Some(t);
            self.table[back] = Some(v);
            self.stack.push(Frame { cell, target: t, created });
            return true;
        }
        false
    }

    fn undo(&mut self, frame: Frame) {
        let l = frame.cell % self.letters;
        self.table[frame.cell] = None;
        self.table[frame.target * self.letters + (l ^ 1)] = None;
        if frame.created {
            self.used -= 1;
        }
    }

    fn snapshot(&self) -> CoverPermutations {
        let perms = (0..self.rank)
            .map(|g| (0..self.degree).map(|v| self.table[v * self.letters + 2 * g].unwrap()).collect())
            .collect();
        CoverPermutations { degree: self.degree, perms }
    }
}

impl Iterator for CoverEnumerator {
    type Item = CoverPermutations;

    fn next(&mut self) -> Option<CoverPermutations> {
        loop {
            if self.finished {
                return None;
            }
            if self.descending {
                let start = self.stack.last().map_or(0, |f| f.cell + 1);
                let empty = (start..self.table.len()).find(|&c| self.table[c].is_none());
                match empty {
                    None => {
                        self.descending = false;
                        if self.used == self.degree {
                            return Some(self.snapshot());
                        }
                    }
                    Some(cell) => {
                        if cell / self.letters >= self.used || !self.try_assign(cell, 0) {
                            self.descending = false;
                        }
                    }
                }
            } else {
                match self.stack.pop() {
                    None => {
                        self.finished = true;
                    }
                    Some(frame) => {
                        self.undo(frame);
                        if self.try_assign(frame.cell, frame.target + 1) {
                            self.descending = true;
                        }
                    }
                }
            }
        }
    }
}

/// How to grow a spanning tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TreePolicy {
    /// Breadth-first from the basepoint, letters in index order.
    #[default]
    Bfs,
    /// Follow chains of edges reading this letter as far as possible from
    /// every newly reached vertex before continuing breadth-first.
    PreferLabel(Letter),
}

/// A spanning tree of an A-graph, stored as the set of tree edges together
/// with the label of the tree path from the basepoint to each vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningTree {
    in_tree: Vec<bool>,
    prefixes: Vec<Word>,
}

impl SpanningTree {
    pub fn edge_indices(&self) -> Vec<usize> {
        (0..self.in_tree.len()).filter(|&i| self.in_tree[i]).collect()
    }

    pub fn contains_edge(&self, edge: usize) -> bool {
        self.in_tree[edge]
    }

    /// Label of the tree path `[x_0, v]_T`.
    pub fn prefix(&self, v: usize) -> &Word {
        &self.prefixes[v]
    }

    /// Checks that `edges` form a spanning tree of `g` and records it.
    pub fn from_edges(g: &AGraph, edges: &[usize]) -> Result<SpanningTree, StallingsError> {
        let mut in_tree = vec![false; g.edges().len()];
        for &e in edges {
            if e >= in_tree.len() {
                return Err(StallingsError::NotASpanningTree(format!("edge {e} out of range")));
            }
            in_tree[e] = true;
        }
        if in_tree.iter().filter(|&&b| b).count() + 1 != g.vertex_count() {
            return Err(StallingsError::NotASpanningTree("wrong number of edges".into()));
        }
        let prefixes = tree_prefixes(g, &in_tree)
            .ok_or_else(|| StallingsError::NotASpanningTree("edges do not reach every vertex".into()))?;
        Ok(SpanningTree { in_tree, prefixes })
    }

    /// Extends a forest `seed` containing the basepoint to a spanning tree
    /// under the given policy.
    pub fn extend(g: &AGraph, seed: &[usize], policy: TreePolicy) -> Result<SpanningTree, StallingsError> {
        let n = g.vertex_count();
        let mut incident: Vec<Vec<(usize, usize, Letter)>> = vec![Vec::new(); n];
        for (i, e) in g.edges().iter().enumerate() {
            incident[e.from].push((i, e.to, e.label()));
            incident[e.to].push((i, e.from, e.label().inverse()));
        }
        for list in &mut incident {
            list.sort_by_key(|&(i, _, l)| (l.index(), i));
        }
        let mut in_tree = vec![false; g.edges().len()];
        let mut reached = vec![false; n];
        reached[g.basepoint()] = true;
        let mut queue = VecDeque::from([g.basepoint()]);

        // absorb the seed forest component of the basepoint
        let mut seed_mask = vec![false; g.edges().len()];
        for &e in seed {
            seed_mask[e] = true;
        }
        let mut stack = vec![g.basepoint()];
        while let Some(v) = stack.pop() {
            for &(i, u, _) in &incident[v] {
                if seed_mask[i] && !in_tree[i] {
                    if reached[u] {
                        return Err(StallingsError::NotASpanningTree("seed contains a cycle".into()));
                    }
                    in_tree[i] = true;
                    reached[u] = true;
                    queue.push_back(u);
                    stack.push(u);
                }
            }
        }

        let follow_chain =
            |start: usize, in_tree: &mut Vec<bool>, reached: &mut Vec<bool>, queue: &mut VecDeque<usize>| {
                if let TreePolicy::PreferLabel(x) = policy {
                    let mut v = start;
                    loop {
                        let next = incident[v].iter().find(|&&(i, u, l)| l == x && !reached[u] && !in_tree[i]).copied();
                        match next {
                            Some((i, u, _)) => {
                                in_tree[i] = true;
                                reached[u] = true;
                                queue.push_back(u);
                                v = u;
                            }
                            None => break,
                        }
                    }
                }
            };
        if seed.is_empty() {
            follow_chain(g.basepoint(), &mut in_tree, &mut reached, &mut queue);
        }
        while let Some(v) = queue.pop_front() {
            for &(i, u, _) in &incident[v] {
                if !reached[u] {
                    in_tree[i] = true;
                    reached[u] = true;
                    queue.push_back(u);
                    follow_chain(u, &mut in_tree, &mut reached, &mut queue);
                }
            }
        }
        if reached.iter().any(|&r| !r) {
            return Err(StallingsError::Disconnected);
        }
        let prefixes = tree_prefixes(g, &in_tree).ok_or(StallingsError::Disconnected)?;
        Ok(SpanningTree { in_tree, prefixes })
    }
}

fn tree_prefixes(g: &AGraph, in_tree: &[bool]) -> Option<Vec<Word>> {
    let n = g.vertex_count();
    let mut incident: Vec<Vec<(usize, Letter)>> = vec![Vec::new(); n];
    for (i, e) in g.edges().iter().enumerate() {
        if in_tree[i] {
            incident[e.from].push((e.to, e.label()));
            incident[e.to].push((e.from, e.label().inverse()));
        }
    }
    let mut prefixes: Vec<Option<Word>> = vec![None; n];
    prefixes[g.basepoint()] = Some(Word::identity(g.rank()));
    let mut stack = vec![g.basepoint()];
    while let Some(v) = stack.pop() {
        let pv = prefixes[v].clone().unwrap();
        for &(u, l) in &incident[v] {
            if prefixes[u].is_none() {
                prefixes[u] = Some(pv.concat(&Word::letter(l, g.rank()).unwrap()));
                stack.push(u);
            }
        }
    }
    prefixes.into_iter().collect()
}

pub fn spanning_tree(g: &AGraph, policy: TreePolicy) -> Result<SpanningTree, StallingsError> {
    SpanningTree::extend(g, &[], policy)
}

/// Basis of `π_1(g, x_0)` dual to a spanning tree: one word per non-tree
/// edge, in edge order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualBasis {
    pub words: Vec<Word>,
    /// Graph edge index behind each basis word.
    pub edges: Vec<usize>,
}

pub fn dual_basis(g: &AGraph, t: &SpanningTree) -> Result<DualBasis, StallingsError> {
    if !g.is_folded() {
        return Err(StallingsError::NotFolded);
    }
    let mut words = Vec::new();
    let mut edges = Vec::new();
    for (i, e) in g.edges().iter().enumerate() {
        if t.contains_edge(i) {
            continue;
        }
        let letter = Word::letter(e.label(), g.rank())?;
        let beta = t.prefix(e.from).concat(&letter).concat(&t.prefix(e.to).inverse());
        words.push(beta);
        edges.push(i);
    }
    Ok(DualBasis { words, edges })
}

/// Rewrites loops at the basepoint of a folded graph in the dual basis of
/// a spanning tree.
pub struct Rewriter {
    transitions: Transitions,
    basis_letter: Vec<Option<usize>>,
    basis_rank: usize,
    basepoint: usize,
    rank: usize,
}

impl Rewriter {
    pub fn new(g: &AGraph, t: &SpanningTree) -> Result<Rewriter, StallingsError> {
        let transitions = g.transitions()?;
        let mut basis_letter = vec![None; g.edges().len()];
        let mut next = 0;
        for (i, slot) in basis_letter.iter_mut().enumerate() {
            if !t.contains_edge(i) {
                next += 1;
                *slot = Some(next);
            }
        }
        Ok(Rewriter { transitions, basis_letter, basis_rank: next, basepoint: g.basepoint(), rank: g.rank() })
    }

    pub fn basis_rank(&self) -> usize {
        self.basis_rank
    }

    pub fn rewrite(&self, w: &Word) -> Result<Word, StallingsError> {
        if w.rank() != self.rank {
            return Err(StallingsError::RankMismatch { graph: self.rank, word: w.rank() });
        }
        let mut v = self.basepoint;
        let mut out = Vec::new();
        for &l in w.letters() {
            let (u, e) =
                self.transitions.step_edge(v, l).ok_or_else(|| StallingsError::NotInSubgroup(w.to_string()))?;
            if let Some(b) = self.basis_letter[e] {
                out.push(Letter::new(b, l.is_inverse()));
            }
            v = u;
        }
        if v != self.basepoint {
            return Err(StallingsError::NotInSubgroup(w.to_string()));
        }
        Ok(Word::free_reduce(out, self.basis_rank)?)
    }
}

pub fn rewrite_in_basis(g: &AGraph, t: &SpanningTree, w: &Word) -> Result<Word, StallingsError> {
    Rewriter::new(g, t)?.rewrite(w)
}

/// Completes each generator's partial permutation on the same vertex set,
/// matching unmatched sources to unmatched targets in ascending order.
pub fn hall_completion(g: &AGraph) -> Result<AGraph, StallingsError> {
    if !g.is_folded() {
        return Err(StallingsError::NotFolded);
    }
    if !g.is_connected() {
        return Err(StallingsError::Disconnected);
    }
    let n = g.vertex_count();
    let mut out = g.clone();
    for generator in 1..=g.rank() {
        let mut has_out = vec![false; n];
        let mut has_in = vec![false; n];
        for e in g.edges().iter().filter(|e| e.generator == generator) {
            has_out[e.from] = true;
            has_in[e.to] = true;
        }
        let sources = (0..n).filter(|&v| !has_out[v]);
        let targets: Vec<usize> = (0..n).filter(|&v| !has_in[v]).collect();
        for (s, &t) in sources.zip(targets.iter()) {
            out.add_edge(s, t, generator);
        }
    }
    debug_assert!(out.is_cover());
    Ok(out)
}

/// Orders of the basepoint under `σ_a` and `σ_b` for a cover of `R_2`:
/// the least `k`, `l` with `a^k`, `b^l` in the subgroup.
pub fn smallest_powers(g: &AGraph) -> Result<(usize, usize), StallingsError> {
    if g.rank() != 2 {
        return Err(StallingsError::UnsupportedRank { expected: 2, found: g.rank() });
    }
    if !g.is_cover() {
        return Err(StallingsError::NotACover);
    }
    let t = g.transitions()?;
    let order = |letter: Letter| {
        let mut v = t.step(g.basepoint(), letter).unwrap();
        let mut k = 1;
        while v != g.basepoint() {
            v = t.step(v, letter).unwrap();
            k += 1;
        }
        k
    };
    Ok((order(Letter::positive(1)), order(Letter::positive(2))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(text: &str) -> Word {
        Word::parse(text, 2).unwrap()
    }

    #[test]
    fn folding_two_a_loops() {
        let g = subgroup_graph(&[w("a"), w("a")], 2).unwrap();
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.edges().len(), 1);
        assert!(g.is_folded());
        assert_eq!(g.fold(), g);
    }

    #[test]
    fn folding_keeps_language() {
        let g = subgroup_graph(&[w("a^2 b^2"), w("a")], 2).unwrap();
        assert!(g.is_folded());
        assert!(g.contains(&w("a^2 b^2")));
        assert!(g.contains(&w("a")));
        assert!(g.contains(&w("b^2")));
        assert!(!g.contains(&w("b")));
    }

    #[test]
    fn subgroup_graph_examples() {
        let g = subgroup_graph(&[w("a^2"), w("ab"), w("b^2")], 2).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert!(g.is_cover());
        let g = subgroup_graph(&[w("a")], 2).unwrap();
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.edges().len(), 1);
        let g = subgroup_graph(&[w("a"), w("b")], 2).unwrap();
        assert!(g.is_isomorphic(&AGraph::rose(2)));
    }

    #[test]
    fn contains_examples() {
        let c = CoverPermutations::new(vec![vec![1, 2, 0], vec![2, 0, 1]]).unwrap();
        let g = c.to_graph();
        assert!(!g.contains(&w("a")));
        assert!(g.contains(&w("a b")));
        assert!(g.contains(&Word::identity(2)));
    }

    #[test]
    fn enumerate_small_degrees() {
        assert_eq!(enumerate_covers(2, 1).unwrap().count(), 1);
        assert_eq!(enumerate_covers(2, 2).unwrap().count(), 3);
        assert_eq!(enumerate_covers(2, 3).unwrap().count(), 13);
        assert_eq!(enumerate_covers(1, 4).unwrap().count(), 1);
        assert!(enumerate_covers(2, 0).is_err());
    }

    #[test]
    fn enumerated_covers_are_canonical() {
        for d in 1..=4 {
            for c in enumerate_covers(2, d).unwrap() {
                assert!(c.is_transitive());
                assert_eq!(c.canonical(), c);
            }
        }
    }

    #[test]
    fn cover_graph_examples() {
        let c = CoverPermutations::new(vec![vec![1, 0], vec![1, 0]]).unwrap();
        let g = c.to_graph();
        assert!(g.is_cover());
        for x in ["a^2", "ab", "b^2"] {
            assert!(g.contains(&w(x)));
        }
        assert!((0..2).all(|v| g.degree(v) == 4));
        let rose = CoverPermutations::new(vec![vec![0], vec![0]]).unwrap().to_graph();
        assert!(rose.is_isomorphic(&AGraph::rose(2)));
        assert_eq!(CoverPermutations::from_graph(&g).unwrap(), c);
    }

    #[test]
    fn spanning_tree_examples() {
        let rose = AGraph::rose(2);
        let t = spanning_tree(&rose, TreePolicy::Bfs).unwrap();
        assert!(t.edge_indices().is_empty());
        let basis = dual_basis(&rose, &t).unwrap();
        assert_eq!(basis.words, vec![w("a"), w("b")]);

        // d-cycle of a's
        let d = 5;
        let mut cyc = AGraph::new(2, d, 0);
        for v in 0..d {
            cyc.add_edge(v, (v + 1) % d, 1);
        }
        let t = spanning_tree(&cyc, TreePolicy::PreferLabel(Letter::positive(1))).unwrap();
        assert_eq!(t.edge_indices(), vec![0, 1, 2, 3]);
        assert_eq!(t.prefix(3), &w("a^3"));
    }

    #[test]
    fn dual_basis_size_and_refold() {
        for d in 1..=4 {
            for c in enumerate_covers(2, d).unwrap() {
                let g = c.to_graph();
                let t = spanning_tree(&g, TreePolicy::Bfs).unwrap();
                let basis = dual_basis(&g, &t).unwrap();
                assert_eq!(basis.words.len(), d + 1);
                assert_eq!(basis.words.len(), g.edges().len() - g.vertex_count() + 1);
                let refold = subgroup_graph(&basis.words, 2).unwrap();
                assert!(refold.is_isomorphic(&g));
            }
        }
    }

    #[test]
    fn rewrite_round_trip() {
        let c = CoverPermutations::new(vec![vec![1, 2, 0], vec![2, 0, 1]]).unwrap();
        let g = c.to_graph();
        let t = spanning_tree(&g, TreePolicy::Bfs).unwrap();
        let basis = dual_basis(&g, &t).unwrap();
        for x in ["a^3", "a b", "b^3 a^3 b A", "a^4 b^2"] {
            let x = w(x);
            if g.contains(&x) {
                let r = rewrite_in_basis(&g, &t, &x).unwrap();
                assert_eq!(r.substitute(&basis.words).unwrap(), x);
            } else {
                assert!(rewrite_in_basis(&g, &t, &x).is_err());
            }
        }
    }

    #[test]
    fn hall_completion_examples() {
        let mut g = AGraph::new(2, 1, 0);
        g.add_edge(0, 0, 1);
        let h = hall_completion(&g).unwrap();
        assert!(h.is_cover());
        assert!(h.contains(&w("b")));

        let c = CoverPermutations::new(vec![vec![1, 0], vec![1, 0]]).unwrap().to_graph();
        assert_eq!(hall_completion(&c).unwrap(), c);
    }

    #[test]
    fn smallest_powers_examples() {
        assert_eq!(smallest_powers(&AGraph::rose(2)).unwrap(), (1, 1));
        let c = CoverPermutations::new(vec![vec![0, 1], vec![1, 0]]).unwrap().to_graph();
        assert_eq!(smallest_powers(&c).unwrap(), (1, 2));
        let k3 = CoverPermutations::new(vec![vec![1, 2, 0], vec![2, 0, 1]]).unwrap().to_graph();
        assert_eq!(smallest_powers(&k3).unwrap(), (3, 3));
        let mut partial = AGraph::new(2, 1, 0);
        partial.add_edge(0, 0, 1);
        assert_eq!(smallest_powers(&partial), Err(StallingsError::NotACover));
    }

    #[test]
    fn json_round_trip() {
        let g = CoverPermutations::new(vec![vec![1, 2, 0], vec![0, 2, 1]]).unwrap().to_graph();
        let json = serde_json::to_string(&g).unwrap();
        assert!(json.contains(r#""edges":[[0,1,"a"]"#));
        let back: AGraph = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn long_chain_folds_without_recursion() {
        let n = 420;
        let x = crate::words::power_word(n, n).unwrap();
        let y = crate::words::power_word(n, n - 1).unwrap();
        let g = subgroup_graph(&[x.clone(), y.clone()], 2).unwrap();
        assert!(g.contains(&x) && g.contains(&y));
        assert!(g.contains(&w("b")));
    }
}
