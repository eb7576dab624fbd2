//! Explicit covers and bases for words `a^n b^t` in `F(a, b)`.
//!
//! Every construction re-checks the identities it relies on (labels of the
//! dual basis, products produced by Nielsen moves, the image of the witness
//! word) so that a wrong claim surfaces as an error, not a silent result.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stallings::{
    dual_basis, hall_completion, smallest_powers, spanning_tree, subgroup_graph, AGraph, CoverPermutations, Rewriter,
    SpanningTree, StallingsError, TreePolicy,
};
use crate::whitehead::{primitivity, Primitivity, WhiteheadError};
use crate::words::{Letter, LetterMap, Word, WordError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("degree must be at least 2, got {0}")]
    InvalidDegree(usize),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("identity check failed: {0}")]
    IdentityFailed(String),
    #[error(transparent)]
    Stallings(#[from] StallingsError),
    #[error(transparent)]
    Whitehead(#[from] WhiteheadError),
    #[error(transparent)]
    Word(#[from] WordError),
}

fn a(exp: i64) -> Word {
    Word::letter_power(Letter::positive(1), exp, 2).expect("rank 2")
}

fn b(exp: i64) -> Word {
    Word::letter_power(Letter::positive(2), exp, 2).expect("rank 2")
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), ConstructionError> {
    if ok {
        Ok(())
    } else {
        Err(ConstructionError::IdentityFailed(what()))
    }
}

fn check_eq(found: &Word, expected: &Word, what: &str) -> Result<(), ConstructionError> {
    check(found == expected, || format!("{what}: expected {expected}, found {found}"))
}

/// An a-cycle `i → i+1` and a b-cycle `i → i−1` on the same `d` vertices,
/// obtained by gluing two separate cycles vertex by vertex.
pub fn double_cycle_cover(d: usize) -> Result<AGraph, ConstructionError> {
    if d < 2 {
        return Err(ConstructionError::InvalidDegree(d));
    }
    let mut g = AGraph::new(2, 2 * d, 0);
    for i in 0..d {
        g.add_edge(i, (i + 1) % d, 1);
    }
    for i in 0..d {
        g.add_edge(d + i, d + (i + d - 1) % d, 2);
    }
    let pairs: Vec<(usize, usize)> = (0..d).map(|i| (i, d + i)).collect();
    let glued = g.quotient(&pairs);
    debug_assert!(glued.is_cover());
    Ok(glued)
}

/// Schreier graph of the kernel of `F(a, b) → Z_d`, `a ↦ 1`, `b ↦ −1`.
pub fn kernel_phi_cover(d: usize) -> Result<AGraph, ConstructionError> {
    if d < 2 {
        return Err(ConstructionError::InvalidDegree(d));
    }
    let images = [1i64, -1];
    let perms =
        images.iter().map(|&s| (0..d).map(|v| (v as i64 + s).rem_euclid(d as i64) as usize).collect()).collect();
    Ok(CoverPermutations::new(perms)?.to_graph())
}

/// One elementary Nielsen move on an indexed basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NielsenMove {
    /// Slot being replaced.
    pub target: usize,
    /// Slot it is multiplied by.
    pub factor: usize,
    /// `true` for `factor · target`, `false` for `target · factor`.
    pub left: bool,
    pub result: Word,
}

/// A basis evolving under Nielsen moves, remembering how each original
/// element is expressed in the current basis.
#[derive(Clone, Debug)]
struct NielsenTracker {
    current: Vec<Word>,
    originals_in_current: Vec<Word>,
    moves: Vec<NielsenMove>,
}

impl NielsenTracker {
    fn new(basis: Vec<Word>) -> Self {
        let n = basis.len();
        let originals_in_current = (1..=n).map(|g| Word::generator(g, n).unwrap()).collect();
        NielsenTracker { current: basis, originals_in_current, moves: Vec::new() }
    }

    fn apply(&mut self, target: usize, factor: usize, left: bool) {
        assert_ne!(target, factor);
        let n = self.current.len();
        let (t, f) = (&self.current[target], &self.current[factor]);
        let result = if left { f.concat(t) } else { t.concat(f) };
        self.current[target] = result.clone();
        // the old target in terms of the new basis
        let mut images: Vec<Word> = (1..=n).map(|g| Word::generator(g, n).unwrap()).collect();
        let tw = Word::generator(target + 1, n).unwrap();
        let fw = Word::generator(factor + 1, n).unwrap().inverse();
        images[target] = if left { fw.concat(&tw) } else { tw.concat(&fw) };
        for w in &mut self.originals_in_current {
            *w = w.substitute(&images).unwrap();
        }
        self.moves.push(NielsenMove { target, factor, left, result });
    }
}

/// The index-`d` subgroup with basis `a^d, ab, a²b², …, b^d`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LemmaOneBasis {
    pub d: usize,
    pub graph: AGraph,
    pub tree_edges: Vec<usize>,
    /// Dual basis of the a-path tree, `z_0 = a^d`, `z_i = a^i b a^{−(i−1)}`,
    /// `z_d = b a^{−(d−1)}`.
    pub z: Vec<Word>,
    /// After replacing `z_1, …, z_{d−1}` by `a^i b^i`.
    pub y_prime: Vec<Word>,
    pub y: Vec<Word>,
    pub moves: Vec<NielsenMove>,
    /// `z_j` written in the final basis `y`.
    pub z_in_y: Vec<Word>,
    /// Dual-basis edge order → slot of `z`.
    slot_of_edge: Vec<usize>,
}

pub fn lemma_one_basis(d: usize) -> Result<LemmaOneBasis, ConstructionError> {
    let g = double_cycle_cover(d)?;
    let tree = spanning_tree(&g, TreePolicy::PreferLabel(Letter::positive(1)))?;
    let tree_edges = tree.edge_indices();
    check(tree_edges == (0..d - 1).collect::<Vec<_>>(), || format!("unexpected tree {tree_edges:?}"))?;
    let basis = dual_basis(&g, &tree)?;

    let mut z = vec![Word::identity(2); d + 1];
    let mut slot_of_edge = Vec::new();
    for (word, &e) in basis.words.iter().zip(&basis.edges) {
        let edge = g.edge(e);
        let slot = match (edge.generator, edge.from) {
            (1, _) => 0,
            (_, 0) => d,
            (_, v) => v,
        };
        z[slot] = word.clone();
        slot_of_edge.push(slot);
    }
    let di = d as i64;
    check_eq(&z[0], &a(di), "z_0")?;
    for i in 1..di {
        check_eq(&z[i as usize], &a(i).concat(&b(1)).concat(&a(-(i - 1))), "z_i")?;
    }
    check_eq(&z[d], &b(1).concat(&a(-(di - 1))), "z_d")?;

    let mut tracker = NielsenTracker::new(z.clone());
    for i in 2..d {
        tracker.apply(i, i - 1, false);
    }
    for i in 1..d {
        let expected_product = (1..=i).rev().fold(Word::identity(2), |acc, j| acc.concat(&z[j]));
        check_eq(&expected_product, &a(i as i64).concat(&b(i as i64)), "z_i ⋯ z_1")?;
        check_eq(&tracker.current[i], &expected_product, "y_i")?;
    }
    let y_prime = tracker.current.clone();
    tracker.apply(d, d - 1, false);
    check_eq(&tracker.current[d], &b(di), "z_d y_{d-1}")?;
    let y = tracker.current.clone();

    let refold_z = subgroup_graph(&z, 2)?;
    let refold_y = subgroup_graph(&y, 2)?;
    check(refold_z.is_isomorphic(&g) && refold_y.is_isomorphic(&g), || "re-folded basis differs".into())?;

    Ok(LemmaOneBasis {
        d,
        graph: g,
        tree_edges,
        z,
        y_prime,
        y,
        moves: tracker.moves,
        z_in_y: tracker.originals_in_current,
        slot_of_edge,
    })
}

impl LemmaOneBasis {
    /// Writes a member of the subgroup in the basis `y_0, …, y_d`
    /// (`y_j` is generator `j+1`).
    pub fn rewrite(&self, w: &Word) -> Result<Word, ConstructionError> {
        let tree = SpanningTree::from_edges(&self.graph, &self.tree_edges)?;
        let in_edges = Rewriter::new(&self.graph, &tree)?.rewrite(w)?;
        let images: Vec<Word> = self.slot_of_edge.iter().map(|&s| self.z_in_y[s].clone()).collect();
        Ok(in_edges.substitute(&images)?)
    }
}

/// Certificate that `a^n b^t` is primitive in a subgroup of index `d+d′−2`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GluedCycles {
    pub n: usize,
    pub t: usize,
    pub d: usize,
    pub d_prime: usize,
    pub r: usize,
    pub r_prime: usize,
    /// The two glued cycles before completion.
    pub partial: AGraph,
    pub cover: AGraph,
    pub tree_edges: Vec<usize>,
    pub basis: Vec<Word>,
    pub witness: Word,
    /// The witness in the basis dual to the tree of the glued cycles; the
    /// first three letters are the loops `x`, `y_1`, `y_2`.
    pub eta: Word,
    /// Image of `eta` under `y_1 ↦ y_2⁻¹ y_1`.
    pub eta_image: Word,
    pub evidence: Primitivity,
}

pub fn glued_cycles_cover(n: usize, t: usize, d: usize, d_prime: usize) -> Result<GluedCycles, ConstructionError> {
    if d < 2 || d_prime < 2 || d > n || d_prime > t || n.is_multiple_of(d) || t.is_multiple_of(d_prime) {
        return Err(ConstructionError::Hypothesis(format!(
            "need 2 <= d <= n, 2 <= d' <= t, d ∤ n, d' ∤ t; got n={n}, t={t}, d={d}, d'={d_prime}"
        )));
    }
    let (k, r) = (n / d, n % d);
    let (k2, r2) = (t / d_prime, t % d_prime);

    // x_i = i, z_j = d + j
    let mut g = AGraph::new(2, d + d_prime, 0);
    for i in 0..d {
        g.add_edge(i, (i + 1) % d, 1);
    }
    for j in 0..d_prime {
        g.add_edge(d + j, d + (j + 1) % d_prime, 2);
    }
    let (partial, _) = g.quotient_with_map(&[(0, d), (r, d + d_prime - r2)]);
    check(partial.vertex_count() == d + d_prime - 2, || "glued graph has the wrong size".into())?;
    check(partial.is_folded() && partial.is_connected(), || "glued graph is not folded".into())?;

    let a_edge = |i: usize| i;
    let b_edge = |j: usize| d + j;
    let mut tree_edges: Vec<usize> = (0..r).map(a_edge).collect();
    tree_edges.extend((r..d - 1).map(a_edge));
    tree_edges.extend((0..d_prime - r2 - 1).map(b_edge));
    tree_edges.extend((d_prime - r2..d_prime - 1).map(b_edge));
    tree_edges.sort_unstable();
    let tree = SpanningTree::from_edges(&partial, &tree_edges)?;
    let partial_basis = dual_basis(&partial, &tree)?;
    check(partial_basis.words.len() == 3, || "glued graph should have rank 3".into())?;

    let witness = crate::words::power_word(n as i64, t as i64)?;
    let eta = Rewriter::new(&partial, &tree)?.rewrite(&witness)?;
    let x = Word::generator(1, 3)?;
    let y1 = Word::generator(2, 3)?;
    let y2 = Word::generator(3, 3)?;
    let expected = x.pow(k as i64).concat(&y2.concat(&y1).pow(k2 as i64)).concat(&y2);
    check_eq(&eta, &expected, "collapse image")?;

    let phi = LetterMap::new(vec![x.clone(), y2.inverse().concat(&y1), y2.clone()])?;
    let phi_inverse = LetterMap::new(vec![x.clone(), y2.concat(&y1), y2.clone()])?;
    let eta_image = eta.apply_letter_map(&phi)?;
    check_eq(&eta_image, &x.pow(k as i64).concat(&y1.pow(k2 as i64)).concat(&y2), "automorphism image")?;
    check_eq(&eta_image.apply_letter_map(&phi_inverse)?, &eta, "inverse automorphism")?;
    check(eta_image.occurrences()[2] == 1, || "y_2 should occur once".into())?;

    let cover = hall_completion(&partial)?;
    check(cover.vertex_count() == partial.vertex_count(), || "completion added vertices".into())?;
    check(cover.contains(&witness), || "cover misses the witness".into())?;
    let cover_tree = SpanningTree::from_edges(&cover, &tree_edges)?;
    let basis = dual_basis(&cover, &cover_tree)?.words;
    let rewritten = Rewriter::new(&cover, &cover_tree)?.rewrite(&witness)?;
    check_eq(&rewritten, &eta.with_rank(basis.len())?, "rewrite in completed cover")?;
    let evidence = primitivity(&rewritten)?;
    check(evidence.is_primitive(), || format!("{rewritten} is not primitive"))?;

    Ok(GluedCycles {
        n,
        t,
        d,
        d_prime,
        r,
        r_prime: r2,
        partial,
        cover,
        tree_edges,
        basis,
        witness,
        eta,
        eta_image,
        evidence,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerCase {
    /// The circuits of `a^k` and `b^l` meet only at the basepoint.
    Separate,
    /// They share further vertices.
    Shared,
}

/// A basis of a finite-index subgroup of `F(a, b)` containing `a^k` and
/// `b^l` for the least such powers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PowerBasis {
    pub k: usize,
    pub l: usize,
    /// Number of arcs the b-circuit is cut into by the a-circuit.
    pub m: usize,
    pub case: PowerCase,
    pub graph: AGraph,
    pub tree_edges: Vec<usize>,
    /// Dual basis: `z_0 = a^k`, then one element per arc, then the rest.
    pub z: Vec<Word>,
    pub moves: Vec<NielsenMove>,
    /// Final basis; slot 0 is `a^k`, slot `m` is `b^l`.
    pub y: Vec<Word>,
    z_in_y: Vec<Word>,
    slot_of_edge: Vec<usize>,
}

impl PowerBasis {
    pub fn a_slot(&self) -> usize {
        0
    }

    pub fn b_slot(&self) -> usize {
        self.m
    }

    /// Writes a member of the subgroup in the basis `y` (slot `j` is
    /// generator `j+1`).
    pub fn rewrite(&self, w: &Word) -> Result<Word, ConstructionError> {
        let tree = SpanningTree::from_edges(&self.graph, &self.tree_edges)?;
        let in_edges = Rewriter::new(&self.graph, &tree)?.rewrite(w)?;
        let images: Vec<Word> = self.slot_of_edge.iter().map(|&s| self.z_in_y[s].clone()).collect();
        Ok(in_edges.substitute(&images)?)
    }
}

pub fn power_basis(g: &AGraph) -> Result<PowerBasis, ConstructionError> {
    let (k, l) = smallest_powers(g)?;
    let trans = g.transitions()?;
    let x0 = g.basepoint();
    let p = g.vertex_count();

    // position of each vertex along the a-circuit
    let mut a_pos = vec![None; p];
    let mut a_edges = Vec::with_capacity(k);
    let mut v = x0;
    for s in 0..k {
        a_pos[v] = Some(s);
        let (u, e) = trans.step_edge(v, Letter::positive(1)).expect("cover");
        a_edges.push(e);
        v = u;
    }

    let mut seed: Vec<usize> = a_edges[..k - 1].to_vec();
    let mut arc_ends = Vec::new(); // (closing edge, s_{i-1}, t_i, s_i)
    let mut v = x0;
    let (mut start_pos, mut run) = (0usize, 0usize);
    for _ in 0..l {
        let (u, e) = trans.step_edge(v, Letter::positive(2)).expect("cover");
        run += 1;
        match a_pos[u] {
            Some(s) => {
                arc_ends.push((e, start_pos, run, s));
                start_pos = s;
                run = 0;
            }
            None => seed.push(e),
        }
        v = u;
    }
    let m = arc_ends.len();
    let tree = SpanningTree::extend(g, &seed, TreePolicy::Bfs)?;
    let basis = dual_basis(g, &tree)?;

    let mut slot_for = vec![None; g.edges().len()];
    slot_for[a_edges[k - 1]] = Some(0);
    for (i, &(e, ..)) in arc_ends.iter().enumerate() {
        slot_for[e] = Some(i + 1);
    }
    let mut next = m + 1;
    let mut slot_of_edge = Vec::new();
    let mut z = vec![Word::identity(2); basis.words.len()];
    for (word, &e) in basis.words.iter().zip(&basis.edges) {
        let slot = slot_for[e].unwrap_or_else(|| {
            next += 1;
            next - 1
        });
        z[slot] = word.clone();
        slot_of_edge.push(slot);
    }
    check(next == basis.words.len(), || "basis slots do not line up".into())?;
    check_eq(&z[0], &a(k as i64), "z_0")?;
    for (i, &(_, s_prev, t_i, s_i)) in arc_ends.iter().enumerate() {
        let expected = a(s_prev as i64).concat(&b(t_i as i64)).concat(&a(-(s_i as i64)));
        check_eq(&z[i + 1], &expected, "arc element")?;
    }

    let mut tracker = NielsenTracker::new(z.clone());
    for j in (1..m).rev() {
        tracker.apply(m, j, true);
    }
    check_eq(&tracker.current[m], &b(l as i64), "z_1 ⋯ z_m")?;
    let y = tracker.current.clone();
    check(y.len() == p + 1, || "basis has the wrong size".into())?;
    check(subgroup_graph(&y, 2)?.is_isomorphic(g), || "re-folded basis differs".into())?;

    Ok(PowerBasis {
        k,
        l,
        m,
        case: if m == 1 { PowerCase::Separate } else { PowerCase::Shared },
        graph: g.clone(),
        tree_edges: tree.edge_indices(),
        z,
        moves: tracker.moves,
        y,
        z_in_y: tracker.originals_in_current,
        slot_of_edge,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stallings::enumerate_covers;
    use crate::whitehead::is_primitive;

    fn w(text: &str) -> Word {
        Word::parse(text, 2).unwrap()
    }

    #[test]
    fn double_cycle_small() {
        let g = double_cycle_cover(2).unwrap();
        assert_eq!(g.vertex_count(), 2);
        for x in ["a^2", "a b", "b^2"] {
            assert!(g.contains(&w(x)));
        }
        let g = double_cycle_cover(3).unwrap();
        for x in ["a^3", "b^3", "a b", "a^2 b^2"] {
            assert!(g.contains(&w(x)));
        }
        assert!(g.is_cover());
        assert!(double_cycle_cover(1).is_err());
    }

    #[test]
    fn kernel_cover_membership() {
        let g = kernel_phi_cover(5).unwrap();
        for x in ["a^5", "b^5", "a^2 b^2"] {
            assert!(g.contains(&w(x)));
        }
        assert!(!g.contains(&w("a")));
        assert!(!kernel_phi_cover(3).unwrap().contains(&w("a")));
        for d in 2..=20 {
            assert!(kernel_phi_cover(d).unwrap().is_isomorphic(&double_cycle_cover(d).unwrap()));
        }
    }

    #[test]
    fn kernel_basis_small_cases() {
        let l2 = lemma_one_basis(2).unwrap();
        assert_eq!(l2.z, vec![w("a^2"), w("a b"), w("b A")]);
        assert_eq!(l2.y, vec![w("a^2"), w("a b"), w("b^2")]);
        let l3 = lemma_one_basis(3).unwrap();
        assert_eq!(l3.y, vec![w("a^3"), w("a b"), w("a^2 b^2"), w("b^3")]);
        assert_eq!(l3.moves.len(), 2);
    }

    #[test]
    fn kernel_basis_rewrites_power_words() {
        for d in 2..=7 {
            let basis = lemma_one_basis(d).unwrap();
            for n in (d + 1)..40 {
                if n % d == 0 {
                    continue;
                }
                let (k, r) = (n / d, n % d);
                let x = crate::words::power_word(n as i64, n as i64).unwrap();
                let y = basis.rewrite(&x).unwrap();
                let gen = |j: usize| Word::generator(j + 1, d + 1).unwrap();
                let expected = gen(0).pow(k as i64).concat(&gen(r)).concat(&gen(d).pow(k as i64));
                assert_eq!(y, expected);
                assert_eq!(y.substitute(&basis.y).unwrap(), x);
            }
        }
    }

    #[test]
    fn glued_cycles_examples() {
        let c = glued_cycles_cover(3, 3, 2, 2).unwrap();
        assert_eq!(c.cover.vertex_count(), 2);
        assert!(c.evidence.is_primitive());
        let c = glued_cycles_cover(7, 5, 3, 2).unwrap();
        assert_eq!(c.partial.vertex_count(), 3);
        assert!(c.cover.is_cover());
        assert!(matches!(glued_cycles_cover(3, 2, 2, 2), Err(ConstructionError::Hypothesis(_))));
        assert!(matches!(glued_cycles_cover(4, 3, 2, 2), Err(ConstructionError::Hypothesis(_))));
    }

    #[test]
    fn glued_cycles_certificates_hold() {
        for n in 3..12 {
            for t in 3..12 {
                for d in 2..=n {
                    for d2 in 2..=t {
                        if n % d == 0 || t % d2 == 0 {
                            continue;
                        }
                        let c = glued_cycles_cover(n, t, d, d2).unwrap();
                        assert_eq!(c.cover.vertex_count(), d + d2 - 2);
                        let tree = SpanningTree::from_edges(&c.cover, &c.tree_edges).unwrap();
                        let again = Rewriter::new(&c.cover, &tree).unwrap().rewrite(&c.witness).unwrap();
                        assert!(is_primitive(&again).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn power_basis_examples() {
        let rose = AGraph::rose(2);
        let pb = power_basis(&rose).unwrap();
        assert_eq!(pb.y, vec![w("a"), w("b")]);
        let kernel = kernel_phi_cover(2).unwrap();
        let pb = power_basis(&kernel).unwrap();
        assert!(pb.y.contains(&w("a^2")) && pb.y.contains(&w("b^2")));
        for c in enumerate_covers(2, 3).unwrap() {
            let g = c.to_graph();
            let pb = power_basis(&g).unwrap();
            assert_eq!(pb.y[pb.a_slot()], a(pb.k as i64));
            assert_eq!(pb.y[pb.b_slot()], b(pb.l as i64));
            assert_eq!(pb.y.len(), 4);
        }
    }

    #[test]
    fn power_basis_rewrite() {
        for c in enumerate_covers(2, 4).unwrap() {
            let g = c.to_graph();
            let pb = power_basis(&g).unwrap();
            let x = crate::words::power_word(12, 12).unwrap();
            if !g.contains(&x) {
                continue;
            }
            let y = pb.rewrite(&x).unwrap();
            assert_eq!(y.substitute(&pb.y).unwrap(), x);
        }
    }
}
