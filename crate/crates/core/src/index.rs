//! Primitivity and simplicity indices by exhaustive search over covers of
//! the rose, and checks of the explicit upper and lower bounds for
//! `a^n b^n`.
//!
//! Covers are examined degree by degree. Every degree below the answer is
//! scanned completely and logged, so a certificate carries its own lower
//! bound. Within the winning degree the first success in enumeration order
//! is reported, which keeps output independent of the worker count.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructions::{
    glued_cycles_cover, lemma_one_basis, power_basis, ConstructionError, GluedCycles, PowerCase,
};
use crate::numtheory::{lcm_upto, smallest_nondivisor, smallest_nondivisor_big};
use crate::stallings::{
    dual_basis, enumerate_covers, spanning_tree, CoverPermutations, Rewriter, SpanningTree, StallingsError, TreePolicy,
};
use crate::whitehead::{
    primitivity, primitivity_with, replay, simplicity, simplicity_with, whitehead_graph, Primitivity, Simplicity,
    TieBreak, WhiteheadError,
};
use crate::words::{power_word, CyclicWord, Word};

pub const SCHEMA_VERSION: u32 = 1;

/// Default bound on the rank of rewritten words.
pub const DEFAULT_MAX_RANK: usize = 8;

const CHUNK: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IndexError {
    #[error("the trivial word has no index")]
    TrivialWord,
    #[error("no subgroup of index <= {cap} works")]
    CapExhausted { cap: usize, log: Vec<DegreeRecord> },
    #[error("degree {degree} gives rank {rank}, above the limit {max_rank}")]
    Infeasible { degree: usize, rank: usize, max_rank: usize, log: Vec<DegreeRecord> },
    #[error("certificate check failed: {0}")]
    Verification(String),
    #[error("bound check failed: {0}")]
    BoundFailed(String),
    #[error(transparent)]
    Stallings(#[from] StallingsError),
    #[error(transparent)]
    Whitehead(#[from] WhiteheadError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexKind {
    Primitivity,
    Simplicity,
}

impl std::str::FromStr for IndexKind {
    type Err = String;

    fn from_str(s: &str) -> Result<IndexKind, String> {
        match s {
            "prim" | "primitivity" => Ok(IndexKind::Primitivity),
            "simp" | "simplicity" => Ok(IndexKind::Simplicity),
            other => Err(format!("unknown index kind {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexEvidence {
    Primitivity(Primitivity),
    Simplicity(Simplicity),
}

impl IndexEvidence {
    pub fn accepts(&self) -> bool {
        match self {
            IndexEvidence::Primitivity(p) => p.is_primitive(),
            IndexEvidence::Simplicity(s) => s.is_simple(),
        }
    }
}

/// Outcome of scanning the covers of one degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeRecord {
    pub degree: usize,
    pub covers_examined: usize,
    pub containing: usize,
    pub accepted: usize,
    pub all_rejected: bool,
    /// Whether every cover of this degree was looked at.
    pub complete: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexCertificate {
    pub schema_version: u32,
    pub word: Word,
    pub rank: usize,
    pub kind: IndexKind,
    pub index: usize,
    pub cover: CoverPermutations,
    /// Edge `g·d + v` of the cover is the `a_{g+1}`-edge leaving `v`.
    pub tree_edges: Vec<usize>,
    pub basis: Vec<Word>,
    pub rewritten: Word,
    pub evidence: IndexEvidence,
    pub lower_bound_log: Vec<DegreeRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Largest degree to try; defaults to `max(1, ‖w‖ − 1)`.
    pub cap: Option<usize>,
    pub max_rank: usize,
    /// Worker threads; `None` uses the ambient rayon pool.
    pub workers: Option<usize>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { cap: None, max_rank: DEFAULT_MAX_RANK, workers: None }
    }
}

fn evaluate(kind: IndexKind, w: &Word, order: TieBreak) -> Result<IndexEvidence, WhiteheadError> {
    Ok(match kind {
        IndexKind::Primitivity => IndexEvidence::Primitivity(primitivity_with(w, order)?),
        IndexKind::Simplicity => IndexEvidence::Simplicity(simplicity_with(w, order)?),
    })
}

/// Rewrites `w` in the breadth-first dual basis of `cover`, or `None` when
/// `w` is not in the subgroup.
fn rewrite_in_cover(cover: &CoverPermutations, w: &Word) -> Result<Option<(SpanningTree, Word)>, IndexError> {
    if !cover.contains(w) {
        return Ok(None);
    }
    let g = cover.to_graph();
    let tree = spanning_tree(&g, TreePolicy::Bfs)?;
    let rewritten = Rewriter::new(&g, &tree)?.rewrite(w)?;
    Ok(Some((tree, rewritten)))
}

struct Scan {
    record: DegreeRecord,
    first_success: Option<CoverPermutations>,
}

type Memo = Mutex<HashMap<Word, bool>>;

fn scan_degree(
    w: &Word,
    kind: IndexKind,
    degree: usize,
    stop_at_success: bool,
    memo: &Memo,
) -> Result<Scan, IndexError> {
    let mut record =
        DegreeRecord { degree, covers_examined: 0, containing: 0, accepted: 0, all_rejected: true, complete: true };
    let mut covers = enumerate_covers(w.rank(), degree)?;
    let mut first_success = None;
    loop {
        let chunk: Vec<CoverPermutations> = covers.by_ref().take(CHUNK).collect();
        if chunk.is_empty() {
            break;
        }
        let results: Vec<Result<Option<bool>, IndexError>> = chunk
            .par_iter()
            .map(|c| {
                let Some((_, rewritten)) = rewrite_in_cover(c, w)? else {
                    return Ok(None);
                };
                let key = CyclicWord::new(&rewritten).canonical_up_to_inversion();
                if let Some(&hit) = memo.lock().unwrap().get(&key) {
                    return Ok(Some(hit));
                }
                let ok = evaluate(kind, &rewritten, TieBreak::Forward)?.accepts();
                memo.lock().unwrap().insert(key, ok);
                Ok(Some(ok))
            })
            .collect();
        for (c, r) in chunk.iter().zip(results) {
            record.covers_examined += 1;
            match r? {
                None => {}
                Some(ok) => {
                    record.containing += 1;
                    if ok {
                        record.accepted += 1;
                        record.all_rejected = false;
                        if first_success.is_none() {
                            first_success = Some(c.clone());
                        }
                    }
                }
            }
        }
        if stop_at_success && first_success.is_some() {
            record.complete = covers.next().is_none();
            break;
        }
    }
    Ok(Scan { record, first_success })
}

fn rank_at_degree(rank: usize, degree: usize) -> usize {
    degree * (rank.max(1) - 1) + 1
}

fn run_with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().expect("thread pool").install(f),
        None => f(),
    }
}

/// Full scan of one degree, for logs and reconciliation.
pub fn exhaust_degree(w: &Word, kind: IndexKind, degree: usize) -> Result<DegreeRecord, IndexError> {
    let memo = Memo::default();
    Ok(scan_degree(w, kind, degree, false, &memo)?.record)
}

pub fn search_index(w: &Word, kind: IndexKind, options: &SearchOptions) -> Result<IndexCertificate, IndexError> {
    let core = CyclicWord::new(w);
    if core.is_empty() {
        return Err(IndexError::TrivialWord);
    }
    let cap = options.cap.unwrap_or_else(|| core.len().saturating_sub(1).max(1));
    run_with_workers(options.workers, || {
        let memo = Memo::default();
        let mut log = Vec::new();
        for degree in 1..=cap {
            let rank = rank_at_degree(w.rank(), degree);
            if rank > options.max_rank {
                return Err(IndexError::Infeasible { degree, rank, max_rank: options.max_rank, log });
            }
            let scan = scan_degree(w, kind, degree, true, &memo)?;
            match scan.first_success {
                Some(cover) => return certificate(w, kind, cover, log),
                None => log.push(scan.record),
            }
        }
        Err(IndexError::CapExhausted { cap, log })
    })
}

fn certificate(
    w: &Word,
    kind: IndexKind,
    cover: CoverPermutations,
    lower_bound_log: Vec<DegreeRecord>,
) -> Result<IndexCertificate, IndexError> {
    let (tree, rewritten) = rewrite_in_cover(&cover, w)?.expect("accepted cover contains the word");
    let basis = dual_basis(&cover.to_graph(), &tree)?.words;
    let evidence = evaluate(kind, &rewritten, TieBreak::Forward)?;
    Ok(IndexCertificate {
        schema_version: SCHEMA_VERSION,
        word: w.clone(),
        rank: w.rank(),
        kind,
        index: cover.degree(),
        tree_edges: tree.edge_indices(),
        cover,
        basis,
        rewritten,
        evidence,
        lower_bound_log,
    })
}

pub fn d_prim(w: &Word, options: &SearchOptions) -> Result<IndexCertificate, IndexError> {
    search_index(w, IndexKind::Primitivity, options)
}

pub fn d_simp(w: &Word, options: &SearchOptions) -> Result<IndexCertificate, IndexError> {
    search_index(w, IndexKind::Simplicity, options)
}

fn fail(msg: impl Into<String>) -> IndexError {
    IndexError::Verification(msg.into())
}

impl IndexCertificate {
    /// Re-derives every claim from scratch; the decision is re-run with the
    /// opposite tie-break order.
    pub fn verify(&self) -> Result<(), IndexError> {
        if self.cover.degree() != self.index || self.word.rank() != self.rank {
            return Err(fail("header fields disagree"));
        }
        let g = self.cover.to_graph();
        if !g.contains(&self.word) {
            return Err(fail("cover does not contain the word"));
        }
        let tree = SpanningTree::from_edges(&g, &self.tree_edges)?;
        if dual_basis(&g, &tree)?.words != self.basis {
            return Err(fail("basis is not dual to the tree"));
        }
        if Rewriter::new(&g, &tree)?.rewrite(&self.word)? != self.rewritten {
            return Err(fail("rewritten word does not match"));
        }
        if self.rewritten.substitute(&self.basis).map_err(|e| fail(e.to_string()))? != self.word {
            return Err(fail("substitution does not recover the word"));
        }
        let core = CyclicWord::new(&self.rewritten);
        match &self.evidence {
            IndexEvidence::Primitivity(p) => {
                if !p.is_primitive() || !primitivity_with(&self.rewritten, TieBreak::Reverse)?.is_primitive() {
                    return Err(fail("primitivity not confirmed"));
                }
                match p {
                    Primitivity::SingleOccurrence { generator } => {
                        if core.representative().occurrences().get(generator - 1) != Some(&1) {
                            return Err(fail("generator does not occur once"));
                        }
                    }
                    Primitivity::MinimizationTrace { trace, minimal } => {
                        let end = replay(&core, trace);
                        if end.len() != 1 || end.canonical() != CyclicWord::new(minimal).canonical() {
                            return Err(fail("trace does not reach a letter"));
                        }
                    }
                    _ => unreachable!(),
                }
            }
            IndexEvidence::Simplicity(s) => {
                if !s.is_simple() || !simplicity_with(&self.rewritten, TieBreak::Reverse)?.is_simple() {
                    return Err(fail("simplicity not confirmed"));
                }
                if let Simplicity::OmittedGenerator { generator, trace, .. } = s {
                    let image = replay(&core, trace);
                    if image.representative().occurrences().get(generator - 1) != Some(&0) {
                        return Err(fail("image still involves the generator"));
                    }
                }
            }
        }
        let degrees: Vec<usize> = self.lower_bound_log.iter().map(|r| r.degree).collect();
        if degrees != (1..self.index).collect::<Vec<_>>() {
            return Err(fail("lower-bound log does not cover every smaller degree"));
        }
        for r in &self.lower_bound_log {
            if !(r.all_rejected && r.complete && r.accepted == 0) {
                return Err(fail(format!("degree {} was not fully rejected", r.degree)));
            }
            let mut total = 0;
            let mut containing = 0;
            for c in enumerate_covers(self.rank, r.degree)? {
                total += 1;
                if g_contains_by_action(&c, &self.word) {
                    containing += 1;
                }
            }
            if (total, containing) != (r.covers_examined, r.containing) {
                return Err(fail(format!("degree {} counts differ", r.degree)));
            }
        }
        Ok(())
    }

    pub fn summary(&self) -> String {
        let kind = match self.kind {
            IndexKind::Primitivity => "primitivity",
            IndexKind::Simplicity => "simplicity",
        };
        let mut out = format!("{kind} index of {} in F_{}: {}\n", self.word, self.rank, self.index);
        for r in &self.lower_bound_log {
            out += &format!(
                "  degree {}: {} covers, {} contain the word, all rejected\n",
                r.degree, r.covers_examined, r.containing
            );
        }
        out += &format!("  witness basis rank {}, rewritten {}\n", self.basis.len(), self.rewritten);
        out
    }
}

fn g_contains_by_action(c: &CoverPermutations, w: &Word) -> bool {
    c.act(0, w) == 0
}

/// Constructive bound `d_prim(a^n b^n) <= d(n)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UpperBoundReport {
    pub n: usize,
    pub degree: usize,
    pub quotient: usize,
    pub remainder: usize,
    pub basis: Vec<Word>,
    pub rewritten: Word,
    /// A basis letter occurring once in the rewritten word.
    pub single_generator: usize,
    pub gap: f64,
}

pub fn verify_upper_bound_thm1(n: usize) -> Result<UpperBoundReport, IndexError> {
    if n < 1 {
        return Err(IndexError::BoundFailed("n must be positive".into()));
    }
    let w = power_word(n as i64, n as i64).map_err(|e| IndexError::BoundFailed(e.to_string()))?;
    if n == 1 {
        return Ok(UpperBoundReport {
            n,
            degree: 1,
            quotient: 0,
            remainder: 1,
            basis: vec![Word::parse("a", 2).unwrap(), Word::parse("b", 2).unwrap()],
            single_generator: single_letter(&w).ok_or_else(|| IndexError::BoundFailed("ab".into()))?,
            rewritten: w,
            gap: 1.0,
        });
    }
    let d = smallest_nondivisor(n as u64).unwrap() as usize;
    let (k, r) = (n / d, n % d);
    let basis = lemma_one_basis(d)?;
    let rewritten = basis.rewrite(&w)?;
    let gen = |j: usize| Word::generator(j + 1, d + 1).unwrap();
    let expected = gen(0).pow(k as i64).concat(&gen(r)).concat(&gen(d).pow(k as i64));
    if rewritten != expected {
        return Err(IndexError::BoundFailed(format!("expected {expected}, found {rewritten}")));
    }
    let single_generator = match primitivity(&rewritten)? {
        Primitivity::SingleOccurrence { generator } => generator,
        other => return Err(IndexError::BoundFailed(format!("unexpected evidence {other:?}"))),
    };
    if rewritten.occurrences()[r] != 1 {
        return Err(IndexError::BoundFailed(format!("y_{r} should occur once in {rewritten}")));
    }
    Ok(UpperBoundReport {
        n,
        degree: d,
        quotient: k,
        remainder: r,
        basis: basis.y,
        rewritten,
        single_generator,
        gap: d as f64 - (n as f64).ln(),
    })
}

fn single_letter(w: &Word) -> Option<usize> {
    CyclicWord::new(w).representative().occurrences().iter().position(|&c| c == 1).map(|g| g + 1)
}

/// Rejection of one subgroup in the lower-bound argument.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubgroupRejection {
    pub degree: usize,
    pub cover: CoverPermutations,
    pub k: usize,
    pub l: usize,
    pub p: usize,
    pub q: usize,
    pub case: PowerCase,
    /// `w` in a basis containing `a^k` and `b^l`.
    pub power_form: Word,
    pub theory_rejects: bool,
    pub brute_rejects: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub i: usize,
    pub n_i: usize,
    pub bound: usize,
    pub log: Vec<DegreeRecord>,
    pub rejections: Vec<SubgroupRejection>,
}

impl LowerBoundReport {
    pub fn agree(&self) -> bool {
        self.rejections.iter().all(|r| r.theory_rejects && r.brute_rejects)
    }
}

/// Shows no subgroup of index below `d(lcm(1..i))` contains
/// `a^{n_i} b^{n_i}` as a primitive element, once through the power basis
/// and once by Whitehead minimization of the breadth-first rewrite.
pub fn verify_lower_bound_thm2(i: usize, max_rank: usize) -> Result<LowerBoundReport, IndexError> {
    if i < 3 {
        return Err(IndexError::BoundFailed("i must be at least 3".into()));
    }
    let n_big = lcm_upto(i as u64);
    let bound = smallest_nondivisor_big(&n_big).unwrap() as usize;
    let n_i: usize = n_big.try_into().map_err(|_| IndexError::BoundFailed("lcm too large".into()))?;
    let top = bound - 1;
    if rank_at_degree(2, top) > max_rank {
        return Err(IndexError::Infeasible { degree: top, rank: rank_at_degree(2, top), max_rank, log: Vec::new() });
    }
    let w = power_word(n_i as i64, n_i as i64).map_err(|e| IndexError::BoundFailed(e.to_string()))?;
    let mut log = Vec::new();
    let mut rejections = Vec::new();
    for degree in 1..=top {
        let covers: Vec<CoverPermutations> = enumerate_covers(2, degree)?.collect();
        let examined = covers.len();
        let checks: Vec<Result<Option<SubgroupRejection>, IndexError>> =
            covers.into_par_iter().map(|c| reject_subgroup(&w, n_i, c)).collect();
        let mut record = DegreeRecord {
            degree,
            covers_examined: examined,
            containing: 0,
            accepted: 0,
            all_rejected: true,
            complete: true,
        };
        for r in checks {
            if let Some(rej) = r? {
                record.containing += 1;
                if !(rej.theory_rejects && rej.brute_rejects) {
                    record.all_rejected = false;
                    record.accepted += 1;
                }
                rejections.push(rej);
            }
        }
        log.push(record);
    }
    Ok(LowerBoundReport { i, n_i, bound, log, rejections })
}

fn reject_subgroup(w: &Word, n: usize, cover: CoverPermutations) -> Result<Option<SubgroupRejection>, IndexError> {
    let Some((_, rewritten)) = rewrite_in_cover(&cover, w)? else {
        return Ok(None);
    };
    let g = cover.to_graph();
    let pb = power_basis(&g)?;
    let (k, l) = (pb.k, pb.l);
    if !n.is_multiple_of(k) || !n.is_multiple_of(l) {
        return Err(IndexError::BoundFailed(format!("a^{k} or b^{l} power does not divide {n}")));
    }
    let (p, q) = (n / k, n / l);
    let power_form = pb.rewrite(w)?;
    let rank = pb.y.len();
    let ya = Word::generator(pb.a_slot() + 1, rank).unwrap();
    let yb = Word::generator(pb.b_slot() + 1, rank).unwrap();
    let expected = ya.pow(p as i64).concat(&yb.pow(q as i64));
    // x^p y^q with p, q >= 2 has a circular Whitehead graph in F(x, y)
    let two_letter = Word::parse(&format!("a^{p} b^{q}"), 2).unwrap();
    let circle = !whitehead_graph(&CyclicWord::new(&two_letter))?.has_cut_vertex();
    let theory_rejects = power_form == expected && p >= 2 && q >= 2 && circle;
    let brute_rejects = !primitivity(&rewritten)?.is_primitive();
    Ok(Some(SubgroupRejection {
        degree: cover.degree(),
        cover,
        k,
        l,
        p,
        q,
        case: pb.case,
        power_form,
        theory_rejects,
        brute_rejects,
    }))
}

/// `d_simp(a^n b^n) = 2`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimplicityIndexReport {
    pub n: usize,
    /// The Whitehead graph of `a^n b^n` is a single 4-cycle.
    pub circular_graph: bool,
    pub basis: Vec<Word>,
    pub rewritten: Word,
    pub evidence: IndexEvidence,
}

pub fn verify_thm4(n: usize) -> Result<SimplicityIndexReport, IndexError> {
    if n < 2 {
        return Err(IndexError::BoundFailed("n must be at least 2".into()));
    }
    let w = power_word(n as i64, n as i64).map_err(|e| IndexError::BoundFailed(e.to_string()))?;
    let graph = whitehead_graph(&CyclicWord::new(&w))?;
    let circular_graph = graph.is_hamiltonian_cycle() && !graph.has_cut_vertex();
    if !circular_graph || simplicity(&w)?.is_simple() {
        return Err(IndexError::BoundFailed(format!("{w} should not be simple in F_2")));
    }
    let basis = lemma_one_basis(2)?;
    let rewritten = basis.rewrite(&w)?;
    let y = |j: usize| Word::generator(j + 1, 3).unwrap();
    let k = (n / 2) as i64;
    let evidence = if n % 2 == 1 {
        let expected = y(0).pow(k).concat(&y(1)).concat(&y(2).pow(k));
        if rewritten != expected {
            return Err(IndexError::BoundFailed(format!("expected {expected}, found {rewritten}")));
        }
        IndexEvidence::Primitivity(primitivity(&rewritten)?)
    } else {
        let expected = y(0).pow(k).concat(&y(2).pow(k));
        if rewritten != expected {
            return Err(IndexError::BoundFailed(format!("expected {expected}, found {rewritten}")));
        }
        IndexEvidence::Simplicity(simplicity(&rewritten)?)
    };
    if !evidence.accepts() {
        return Err(IndexError::BoundFailed("index-2 witness rejected".into()));
    }
    Ok(SimplicityIndexReport { n, circular_graph, basis: basis.y, rewritten, evidence })
}

/// Exact values stated elsewhere that the glued-cycle bound is compared
/// against: `((n, t), d_prim(a^n b^t))`.
pub const STATED_PRIMITIVITY_INDICES: &[((usize, usize), usize)] = &[((3, 3), 3)];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Discrepancy {
    pub word: Word,
    pub stated: usize,
    pub certified_bound: usize,
    pub note: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GluedBoundReport {
    pub bound: usize,
    pub certificate: GluedCycles,
    pub discrepancy: Option<Discrepancy>,
}

pub fn verify_prop4(n: usize, t: usize, d: usize, d_prime: usize) -> Result<GluedBoundReport, IndexError> {
    let certificate = glued_cycles_cover(n, t, d, d_prime)?;
    let bound = d + d_prime - 2;
    if certificate.cover.vertex_count() != bound || !certificate.evidence.is_primitive() {
        return Err(IndexError::BoundFailed("glued certificate does not establish the bound".into()));
    }
    let discrepancy = STATED_PRIMITIVITY_INDICES
        .iter()
        .find(|((a, b), _)| (*a, *b) == (n, t))
        .filter(|(_, stated)| bound < *stated)
        .map(|&(_, stated)| Discrepancy {
            word: certificate.witness.clone(),
            stated,
            certified_bound: bound,
            note: format!("a primitive witness in a subgroup of index {bound} contradicts the stated value {stated}"),
        });
    Ok(GluedBoundReport { bound, certificate, discrepancy })
}

/// Exhaustive value next to a stated one, with the glued-cycle certificate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Reconciliation {
    pub stated: usize,
    pub computed: IndexCertificate,
    /// Full scans of every degree up to the stated value.
    pub scans: Vec<DegreeRecord>,
    pub glued: Option<GluedBoundReport>,
    pub discrepancy: Option<Discrepancy>,
}

pub fn reconcile_stated_value(n: usize, t: usize) -> Result<Option<Reconciliation>, IndexError> {
    let Some(&(_, stated)) = STATED_PRIMITIVITY_INDICES.iter().find(|((a, b), _)| (*a, *b) == (n, t)) else {
        return Ok(None);
    };
    let w = power_word(n as i64, t as i64).map_err(|e| IndexError::BoundFailed(e.to_string()))?;
    let computed = d_prim(&w, &SearchOptions::default())?;
    computed.verify()?;
    let scans = (1..=stated).map(|d| exhaust_degree(&w, IndexKind::Primitivity, d)).collect::<Result<Vec<_>, _>>()?;
    let glued = smallest_glued(n, t).map(|(d, d2)| verify_prop4(n, t, d, d2)).transpose()?;
    let discrepancy = (computed.index != stated).then(|| Discrepancy {
        word: w.clone(),
        stated,
        certified_bound: computed.index,
        note: format!(
            "exhaustive search finds a primitive witness at index {} below the stated value {stated}",
            computed.index
        ),
    });
    Ok(Some(Reconciliation { stated, computed, scans, glued, discrepancy }))
}

fn smallest_glued(n: usize, t: usize) -> Option<(usize, usize)> {
    let ds = (2..=n).find(|d| !n.is_multiple_of(*d))?;
    let d2 = (2..=t).find(|d| !t.is_multiple_of(*d))?;
    Some((ds, d2))
}
