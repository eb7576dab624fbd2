use freeindex::constructions::lemma_one_basis;
use freeindex::stallings::{rewrite_in_basis, SpanningTree};
use freeindex::whitehead::{
    is_primitive, is_simple, replay, whitehead_generators, whitehead_graph, whitehead_minimize, WhiteheadAutomorphism,
};
use freeindex::{CyclicWord, Letter, LetterMap, Word};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

fn config(cases: u32) -> Config {
    Config { cases, rng_seed: RngSeed::Fixed(0x5eed), failure_persistence: None, ..Config::default() }
}

fn raw_letters(rank: usize, max_len: usize) -> impl Strategy<Value = Vec<i32>> {
    let r = rank as i32;
    prop::collection::vec((1..=r, any::<bool>()).prop_map(|(g, inv)| if inv { -g } else { g }), 0..max_len)
}

fn word(rank: usize, max_len: usize) -> impl Strategy<Value = Word> {
    raw_letters(rank, max_len).prop_map(move |raw| Word::from_signed(&raw, rank).unwrap())
}

fn nontrivial_word(rank: usize, max_len: usize) -> impl Strategy<Value = Word> {
    word(rank, max_len).prop_filter("nontrivial cyclic core", |w| !CyclicWord::new(w).is_empty())
}

fn automorphism(rank: usize) -> impl Strategy<Value = WhiteheadAutomorphism> {
    let all = whitehead_generators(rank).unwrap();
    (0..all.len()).prop_map(move |i| all[i].clone())
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn free_reduction_is_idempotent(raw in raw_letters(3, 30)) {
        let once = Word::free_reduce(raw.iter().map(|&x| Letter::from_signed(x)), 3).unwrap();
        let twice = Word::free_reduce(once.letters().iter().copied(), 3).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert!(once.letters().windows(2).all(|p| p[0] != p[1].inverse()));
    }

    #[test]
    fn product_length_is_subadditive(u in word(2, 20), v in word(2, 20)) {
        let uv = u.concat(&v);
        prop_assert!(uv.len() <= u.len() + v.len());
        let touching = match (u.letters().last(), v.letters().first()) {
            (Some(&x), Some(&y)) => x == y.inverse(),
            _ => false,
        };
        prop_assert_eq!(uv.len() == u.len() + v.len(), !touching);
    }

    #[test]
    fn cyclic_reduction_is_a_conjugate(w in word(2, 30)) {
        let (core, conj) = w.cyclic_reduce();
        prop_assert!(core.len() <= w.len());
        prop_assert!(core.representative().is_cyclically_reduced());
        let back = conj.concat(core.representative()).concat(&conj.inverse());
        prop_assert_eq!(back, w);
    }

    #[test]
    fn letter_maps_are_homomorphisms(u in word(2, 12), v in word(2, 12), x in word(3, 5), y in word(3, 5)) {
        let map = LetterMap::new(vec![x, y]).unwrap();
        let lhs = u.concat(&v).apply_letter_map(&map).unwrap();
        let rhs = u.apply_letter_map(&map).unwrap().concat(&v.apply_letter_map(&map).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn whitehead_graph_ignores_rotation(w in nontrivial_word(3, 20), shift in 0usize..20) {
        let core = CyclicWord::new(&w);
        let letters = core.representative().letters();
        let k = shift % letters.len();
        let rotated: Vec<Letter> = letters[k..].iter().chain(&letters[..k]).copied().collect();
        let rotated = CyclicWord::new(&Word::free_reduce(rotated, 3).unwrap());
        let g = whitehead_graph(&core).unwrap();
        prop_assert_eq!(g.edges(), whitehead_graph(&rotated).unwrap().edges());
        prop_assert!(g.edge_count() <= core.len());
    }

    #[test]
    fn automorphism_inverse_on_short_words(auto in automorphism(3), w in word(3, 3)) {
        prop_assert_eq!(auto.inverse().apply(&auto.apply(&w)), w);
    }
}

proptest! {
    #![proptest_config(config(96))]

    #[test]
    fn minimization_terminates_and_descends(w in nontrivial_word(3, 18)) {
        let core = CyclicWord::new(&w);
        let (minimal, trace) = whitehead_minimize(&core);
        let mut current = core.clone();
        for step in &trace {
            let next = step.apply_cyclic(&current);
            prop_assert!(next.len() < current.len());
            current = next;
        }
        prop_assert_eq!(replay(&core, &trace), minimal.clone());
        prop_assert!(trace.len() < core.len());
    }

    #[test]
    fn primitivity_is_invariant(w in nontrivial_word(2, 12), auto in automorphism(2)) {
        let image = auto.apply(&w);
        prop_assert_eq!(is_primitive(&w).unwrap(), is_primitive(&image).unwrap());
    }

    #[test]
    fn simplicity_is_invariant(w in nontrivial_word(2, 10), auto in automorphism(2)) {
        let image = auto.apply(&w);
        prop_assert_eq!(is_simple(&w).unwrap(), is_simple(&image).unwrap());
    }

    #[test]
    fn primitive_implies_simple(w in nontrivial_word(3, 14)) {
        if is_primitive(&w).unwrap() {
            prop_assert!(is_simple(&w).unwrap());
        }
    }

    #[test]
    fn power_words_are_not_simple(p in 2i64..12, q in 2i64..12) {
        let w = freeindex::words::power_word(p, q).unwrap();
        prop_assert!(!is_simple(&w).unwrap());
    }
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn rewriting_round_trips(d in 2usize..7, picks in prop::collection::vec((0usize..8, any::<bool>()), 0..8)) {
        let basis = lemma_one_basis(d).unwrap();
        let mut member = Word::identity(2);
        for (i, inv) in picks {
            let z = &basis.z[i % basis.z.len()];
            member = member.concat(&if inv { z.inverse() } else { z.clone() });
        }
        let tree = SpanningTree::from_edges(&basis.graph, &basis.tree_edges).unwrap();
        let rewritten = rewrite_in_basis(&basis.graph, &tree, &member).unwrap();
        let dual = freeindex::stallings::dual_basis(&basis.graph, &tree).unwrap();
        prop_assert_eq!(rewritten.substitute(&dual.words).unwrap(), member.clone());
        prop_assert_eq!(basis.rewrite(&member).unwrap().substitute(&basis.y).unwrap(), member);
    }
}
