//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use freeindex::constructions::{double_cycle_cover, kernel_phi_cover, lemma_one_basis, power_basis};
use freeindex::index::{
    d_prim, d_simp, reconcile_stated_value, verify_lower_bound_thm2, verify_thm4, verify_upper_bound_thm1,
    IndexEvidence, SearchOptions, DEFAULT_MAX_RANK,
};
use freeindex::numtheory::{
    lcm_upto, lemma2_bounds_check, rosser_schoenfeld_check, smallest_nondivisor, ChebyshevTable,
};
use freeindex::stallings::{enumerate_covers, subgroup_graph, AGraph};
use freeindex::whitehead::{
    is_primitive, is_simple, whitehead_generators, whitehead_graph, whitehead_minimize, WhiteheadAutomorphism,
};
use freeindex::words::power_word;
use freeindex::{CyclicWord, Word};
use num_bigint::BigUint;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn pw(n: usize, t: usize) -> Word {
    power_word(n as i64, t as i64).unwrap()
}

// Hall's recursion, kept separate from the enumerator
fn hall_counts(up_to: usize) -> Vec<u64> {
    let fact = |n: usize| (1..=n as u64).product::<u64>();
    let mut a: Vec<u64> = Vec::new();
    for n in 1..=up_to {
        let mut value = n as u64 * fact(n);
        for k in 1..n {
            value -= fact(n - k) * a[k - 1];
        }
        a.push(value);
    }
    a
}

fn stated_index_small_word() -> Outcome {
    let rec = reconcile_stated_value(3, 3).map_err(err)?.ok_or("no stated value on record")?;
    rec.computed.verify().map_err(err)?;
    let below = &rec.computed.lower_bound_log;
    ensure(below.iter().all(|r| r.complete && r.all_rejected), || "incomplete exhaustion log".into())?;
    ensure(rec.scans.iter().all(|r| r.complete), || "scans incomplete".into())?;
    if rec.computed.index == rec.stated {
        ensure(rec.discrepancy.is_none(), || "discrepancy raised on agreement".into())?;
        return Ok(format!("d_prim = {} with degrees 1..{} exhausted", rec.stated, rec.stated - 1));
    }
    let d = rec.discrepancy.as_ref().ok_or("values disagree without a discrepancy record")?;
    let glued = rec.glued.as_ref().ok_or("glued-cycle certificate missing")?;
    ensure(glued.bound == rec.computed.index && glued.certificate.evidence.is_primitive(), || {
        "glued certificate does not match the exhaustive value".into()
    })?;
    let record = serde_json::to_string(d).map_err(err)?;
    println!("    discrepancy: {record}");
    println!("    exhaustive certificate: {}", rec.computed.summary());
    println!(
        "    glued certificate: index {} witness {} in basis of rank {}",
        glued.bound,
        glued.certificate.eta,
        glued.certificate.basis.len()
    );
    Ok(format!("computed {} vs stated {}; discrepancy recorded with both certificates", rec.computed.index, rec.stated))
}

fn simplicity_index_is_two() -> Outcome {
    for n in 2..=8 {
        let report = verify_thm4(n).map_err(err)?;
        let w = pw(n, n);
        let g = whitehead_graph(&CyclicWord::new(&w)).map_err(err)?;
        ensure(g.is_hamiltonian_cycle() && !g.has_cut_vertex() && report.circular_graph, || {
            format!("n={n}: Whitehead graph is not a cut-vertex-free 4-cycle")
        })?;
        ensure(report.evidence.accepts(), || format!("n={n}: witness rejected"))?;
        let cert = d_simp(&w, &SearchOptions::default()).map_err(err)?;
        cert.verify().map_err(err)?;
        ensure(cert.index == 2, || format!("n={n}: driver found {}", cert.index))?;
    }
    Ok("n = 2..8 all equal 2".into())
}

fn upper_bound_by_nondivisor() -> Outcome {
    for n in 2..=200usize {
        let r = verify_upper_bound_thm1(n).map_err(err)?;
        let d = smallest_nondivisor(n as u64).map_err(err)? as usize;
        ensure(r.degree == d, || format!("n={n}: degree {} != d(n) = {d}", r.degree))?;
        ensure(r.rewritten.occurrences()[r.single_generator - 1] == 1, || format!("n={n}: no single occurrence"))?;
        ensure(is_primitive(&r.rewritten).map_err(err)?, || format!("n={n}: rewritten word not primitive"))?;
    }
    Ok("n = 2..200 certified".into())
}

fn lower_bound_exact() -> Outcome {
    let mut out = Vec::new();
    for (i, expected) in [(3usize, 4usize), (4, 5)] {
        let r = verify_lower_bound_thm2(i, DEFAULT_MAX_RANK).map_err(err)?;
        ensure(r.bound == expected, || format!("i={i}: bound {}", r.bound))?;
        ensure(r.agree(), || format!("i={i}: theory and brute force disagree"))?;
        ensure(r.rejections.iter().all(|s| s.theory_rejects && s.brute_rejects && s.p >= 2 && s.q >= 2), || {
            format!("i={i}: a subgroup was not rejected")
        })?;
        let w = pw(r.n_i, r.n_i);
        let hall = hall_counts(expected - 1);
        for (rec, deg) in r.log.iter().zip(1..) {
            ensure(rec.degree == deg && rec.complete && rec.all_rejected, || format!("i={i}: degree {deg} open"))?;
            ensure(rec.covers_examined as u64 == hall[deg - 1], || format!("i={i}: degree {deg} miscounted"))?;
            let containing = enumerate_covers(2, deg).map_err(err)?.filter(|c| c.contains(&w)).count();
            ensure(rec.containing == containing, || format!("i={i}: degree {deg} containment mismatch"))?;
        }
        ensure(r.log.len() == expected - 1, || format!("i={i}: log covers {} degrees", r.log.len()))?;
        let up = verify_upper_bound_thm1(r.n_i).map_err(err)?;
        ensure(up.degree == expected, || format!("i={i}: upper bound {}", up.degree))?;
        out.push(format!("d_prim(a^{0}b^{0}) = {expected} ({1} subgroups rejected)", r.n_i, r.rejections.len()));
    }
    Ok(out.join(", "))
}

fn cover_counts() -> Outcome {
    let expected = hall_counts(5);
    let counts: Vec<u64> = (1..=5).map(|d| enumerate_covers(2, d).unwrap().count() as u64).collect();
    ensure(counts == [1, 3, 13, 71, 461] && counts == expected, || format!("counts {counts:?}"))?;
    Ok(format!("{counts:?}"))
}

fn cyclic_basis_identities() -> Outcome {
    for d in 2..=20 {
        let double = double_cycle_cover(d).map_err(err)?;
        let kernel = kernel_phi_cover(d).map_err(err)?;
        ensure(double.is_isomorphic(&kernel), || format!("d={d}: covers differ"))?;
        let basis = lemma_one_basis(d).map_err(err)?;
        for family in [&basis.z, &basis.y_prime, &basis.y] {
            ensure(subgroup_graph(family, 2).map_err(err)?.is_isomorphic(&kernel), || {
                format!("d={d}: re-folded basis differs")
            })?;
        }
        for (z, z_y) in basis.z.iter().zip(&basis.z_in_y) {
            ensure(&z_y.substitute(&basis.y).map_err(err)? == z, || format!("d={d}: basis change broken"))?;
        }
    }
    Ok("d = 2..20".into())
}

fn smallest_power(g: &AGraph, generator: usize) -> usize {
    let x = Word::generator(generator, 2).unwrap();
    (1..=g.vertex_count()).find(|&k| g.contains(&x.pow(k as i64))).unwrap()
}

fn power_bases() -> Outcome {
    let mut count = 0;
    let mut shared = 0;
    for d in 1..=4 {
        for c in enumerate_covers(2, d).map_err(err)? {
            let g = c.to_graph();
            let pb = power_basis(&g).map_err(err)?;
            let (k, l) = (smallest_power(&g, 1), smallest_power(&g, 2));
            ensure((pb.k, pb.l) == (k, l), || format!("wrong powers for {c:?}"))?;
            let a_k = Word::generator(1, 2).unwrap().pow(k as i64);
            let b_l = Word::generator(2, 2).unwrap().pow(l as i64);
            ensure(pb.y.contains(&a_k) && pb.y.contains(&b_l), || format!("powers missing for {c:?}"))?;
            ensure(pb.y.len() == d + 1, || format!("basis size for {c:?}"))?;
            ensure(subgroup_graph(&pb.y, 2).map_err(err)?.is_isomorphic(&g), || format!("re-fold for {c:?}"))?;
            count += 1;
            shared += usize::from(pb.m > 1);
        }
    }
    ensure(count == 88, || format!("{count} subgroups"))?;
    Ok(format!("{count} subgroups, {shared} with shared arcs"))
}

fn chebyshev_bounds() -> Outcome {
    let env = rosser_schoenfeld_check(100_000).map_err(err)?;
    ensure(env.holds(), || {
        format!(
            "violations: lower {:?} upper {:?} ratio {:?}",
            env.lower_violations, env.upper_violations, env.ratio_bound_violations
        )
    })?;
    ensure(env.argmax == 113, || format!("argmax {}", env.argmax))?;
    ensure(env.lcm_deviation < 1e-9, || format!("lcm deviation {}", env.lcm_deviation))?;
    let report = lemma2_bounds_check(2, 30).map_err(err)?;
    ensure(report.failures.is_empty(), || format!("d(n_i) < i+1 at {:?}", report.failures))?;
    for row in &report.rows {
        // d(n_i) is the least prime power above i, so every k <= i divides n_i
        let n = lcm_upto(row.i);
        ensure((2..=row.i).all(|k| (&n % k).is_zero()) && !(&n % row.d).is_zero(), || {
            format!("i={}: nondivisor check", row.i)
        })?;
        ensure(row.d > row.i, || format!("i={}: d = {}", row.i, row.d))?;
    }
    Ok(format!("argmax 113, max ratio {:.6}, d(n_i) >= i+1 for i = 2..30", env.max_ratio))
}

fn log_gap_table() -> Outcome {
    let report = lemma2_bounds_check(2, 30).map_err(err)?;
    println!("    {:>3} {:>14} {:>5} {:>9} {:>7}", "i", "n_i", "d", "ln n_i", "gap");
    for row in &report.rows {
        let n = if row.n_i.len() > 14 { format!("~1e{}", row.n_i.len() - 1) } else { row.n_i.clone() };
        println!("    {:>3} {:>14} {:>5} {:>9.4} {:>7.4}", row.i, n, row.d, row.ln_n_i, row.gap());
    }
    // exact chain: lcm(1..d(n)-1) divides n, so psi(d(n)-1) <= ln n, and
    // d_prim(a^n b^n) <= d(n) from the constructive bound
    let table = ChebyshevTable::new(64);
    for n in 2..=200u64 {
        let d = smallest_nondivisor(n).map_err(err)?;
        let l = lcm_upto(d - 1);
        ensure((BigUint::from(n) % &l).is_zero(), || format!("n={n}: lcm(1..d-1) does not divide n"))?;
        ensure(table.psi(d - 1) <= (n as f64).ln() + 1e-9, || format!("n={n}: psi(d-1) > ln n"))?;
        let up = verify_upper_bound_thm1(n as usize).map_err(err)?;
        ensure(up.degree as u64 == d, || format!("n={n}: constructive degree differs"))?;
    }
    for (i, exact) in [(3u64, 4u64), (4, 5)] {
        let row = report.rows.iter().find(|r| r.i == i).unwrap();
        ensure(row.d == exact && table.psi(i) <= table.psi(exact - 1) + 1e-9, || format!("i={i}: chain broken"))?;
    }
    let outside: Vec<(u64, f64)> = report.rows.iter().filter(|r| r.gap().abs() > 3.0).map(|r| (r.i, r.gap())).collect();
    let max = report.rows.iter().map(|r| r.gap()).fold(f64::NEG_INFINITY, f64::max);
    ensure(outside.is_empty(), || {
        let list: Vec<String> = outside.iter().map(|(i, g)| format!("i={i}: {g:.3}")).collect();
        format!("log-sandwich holds, but d(n_i) - ln n_i leaves [-3, 3] (max {max:.3}): {}", list.join(", "))
    })?;
    Ok(format!("gap within [-3, 3], max {max:.3}; log-sandwich holds"))
}

fn random_word(rng: &mut ChaCha8Rng, rank: usize, len: usize) -> Word {
    let raw: Vec<i32> = (0..len)
        .map(|_| {
            let g = rng.gen_range(1..=rank as i32);
            if rng.gen_bool(0.5) {
                g
            } else {
                -g
            }
        })
        .collect();
    Word::from_signed(&raw, rank).unwrap()
}

fn random_automorphism(rng: &mut ChaCha8Rng, all: &[WhiteheadAutomorphism]) -> WhiteheadAutomorphism {
    all[rng.gen_range(0..all.len())].clone()
}

fn seeded_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    for _ in 0..500 {
        let len = rng.gen_range(0..40);
        let w = random_word(&mut rng, 3, len);
        let again = Word::free_reduce(w.letters().iter().copied(), 3).map_err(err)?;
        ensure(again == w, || format!("free reduction not idempotent on {w}"))?;
    }

    let gens = whitehead_generators(2).map_err(err)?;
    let words: Vec<Word> =
        ["a", "a b", "a^2 b", "a b a B", "a^2 b^2", "a^3 b^3", "a^2 b^3", "a b A B", "a^3 b", "a b^2 a b"]
            .iter()
            .map(|t| Word::parse(t, 2).unwrap())
            .collect();
    for w in &words {
        let (p, s) = (is_primitive(w).map_err(err)?, is_simple(w).map_err(err)?);
        for _ in 0..20 {
            let image = random_automorphism(&mut rng, &gens).apply(w);
            ensure(is_primitive(&image).map_err(err)? == p && is_simple(&image).map_err(err)? == s, || {
                format!("invariance fails for {w} -> {image}")
            })?;
        }
    }

    for _ in 0..200 {
        let len = rng.gen_range(1..20);
        let core = CyclicWord::new(&random_word(&mut rng, 3, len));
        let (minimal, trace) = whitehead_minimize(&core);
        let mut current = core.clone();
        for step in &trace {
            let next = step.apply_cyclic(&current);
            ensure(next.len() < current.len(), || format!("non-decreasing step on {core:?}"))?;
            current = next;
        }
        ensure(current == minimal, || "trace does not replay".into())?;
    }

    let opts = SearchOptions::default();
    let mut certs = Vec::new();
    for text in ["a b", "a^2 b^2", "a^3 b^3", "a^2 b^3", "a^5 b^5", "a b a B"] {
        let w = Word::parse(text, 2).unwrap();
        certs.push(d_prim(&w, &opts).map_err(err)?);
        certs.push(d_simp(&w, &opts).map_err(err)?);
    }
    for c in &certs {
        c.verify().map_err(|e| format!("{}: {e}", c.word))?;
        let alt = match &c.evidence {
            IndexEvidence::Primitivity(_) => is_primitive(&c.rewritten),
            IndexEvidence::Simplicity(_) => is_simple(&c.rewritten),
        };
        ensure(alt.map_err(err)?, || format!("{}: evidence not reproduced", c.word))?;
    }

    for text in ["a^3 b^3", "a^2 b^3"] {
        let w = Word::parse(text, 2).unwrap();
        let base = d_prim(&w, &opts).map_err(err)?.index;
        for _ in 0..20 {
            let image = random_automorphism(&mut rng, &gens).apply(&w);
            let value = d_prim(&image, &opts).map_err(err)?.index;
            ensure(value == base, || format!("d_prim({image}) = {value}, expected {base}"))?;
        }
    }
    Ok(format!("fixed seed, {} certificates re-verified", certs.len()))
}

struct Criterion {
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { name: "stated index of a^3 b^3", limit: Duration::from_secs(1), run: stated_index_small_word },
        Criterion { name: "simplicity index of a^n b^n", limit: Duration::from_secs(5), run: simplicity_index_is_two },
        Criterion {
            name: "upper bound d(n) for n <= 200",
            limit: Duration::from_secs(10),
            run: upper_bound_by_nondivisor,
        },
        Criterion { name: "exact lower bounds at n = 6, 12", limit: Duration::from_secs(300), run: lower_bound_exact },
        Criterion { name: "cover counts in degrees 1..5", limit: Duration::from_secs(30), run: cover_counts },
        Criterion {
            name: "cyclic cover basis identities",
            limit: Duration::from_secs(5),
            run: cyclic_basis_identities,
        },
        Criterion { name: "power bases up to index 4", limit: Duration::from_secs(60), run: power_bases },
        Criterion { name: "Chebyshev bounds up to 1e5", limit: Duration::from_secs(30), run: chebyshev_bounds },
        Criterion { name: "log gap table for i <= 30", limit: Duration::from_secs(30), run: log_gap_table },
        Criterion { name: "seeded property suites", limit: Duration::from_secs(60), run: seeded_properties },
    ];
    let mut failed = 0;
    for (k, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.limit => Err(format!("{detail}; too slow")),
            other => other,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        failed += usize::from(outcome.is_err());
        println!("{tag} criterion {:>2} [{}] {:.2?} (limit {:?}): {detail}", k + 1, c.name, elapsed, c.limit);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
