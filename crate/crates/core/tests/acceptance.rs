//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use waring_core::decomp::{lee_elementary, lee_term_count, monomial_product_decomposition, ryser_elementary};
use waring_core::engines::{
    approx_multilinear_sum, approx_parameters, certify_support_intersection, count_hamiltonian, count_set_partitions,
    count_simple_cycles, count_subgraphs_approx, detect_multilinear_char2, exact_multilinear_sum, permanent,
    ApproxConfig, CycleConvention, DetectConfig,
};
use waring_core::genpoly::{cycle_poly, hom_poly, sparse_blackbox, GfBlackBox, Graph, SetSystem, TreeDecomposition};
use waring_core::gf2m::Gf2m;
use waring_core::oracle::{
    catalecticant, enumerate_count, hankel_catalecticant_bound_check, hankel_support_polynomial,
    is_positive_multilinear, rank_lower_bound_check, Problem,
};
use waring_core::polycore::{binomial, integer, rational, CountingBlackBox};
use waring_core::splitters::{
    balanced_size, perfect_size, sample_verified_balanced, sample_verified_perfect, verify_balanced, verify_perfect,
    BalancedSpec,
};
use waring_core::{BlackBoxPolynomial, Limits, Rational, SparsePolynomial};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(value: &Rational, truth: &Rational, eps: &Rational) -> bool {
    (value - truth).abs() <= eps * truth
}

fn check_time(started: Instant, limit: Duration) -> Result<(), String> {
    ensure(started.elapsed() < limit, || format!("took {:.1?}, limit {limit:?}", started.elapsed()))
}

fn err(e: waring_core::Error) -> String {
    e.to_string()
}

fn decomposition_exactness() -> Outcome {
    let started = Instant::now();
    let limits = Limits::default();
    let mut checked = 0;
    for n in 1..=8 {
        for d in 1..=n.min(5) {
            let target = SparsePolynomial::elementary(n, d);
            let ryser = ryser_elementary(n, d).map_err(err)?.expand(&limits).map_err(err)?;
            ensure(ryser == target, || format!("ryser({n},{d}) does not expand to e_{{{n},{d}}}"))?;
            checked += 1;
            if d % 2 == 1 || n > d {
                let lee = lee_elementary(n, d).map_err(err)?.expand(&limits).map_err(err)?;
                ensure(lee == target, || format!("lee({n},{d}) does not expand to e_{{{n},{d}}}"))?;
                checked += 1;
            }
        }
    }
    check_time(started, Duration::from_secs(60))?;
    Ok(format!("{checked} expansions exact in {:.1?}", started.elapsed()))
}

fn term_counts() -> Outcome {
    for (n, d, expected) in [(5, 3, 6usize), (7, 3, 8), (9, 5, 46)] {
        let got = lee_elementary(n, d).map_err(err)?.rank_bound();
        ensure(got == expected, || format!("lee({n},{d}) has {got} terms, expected {expected}"))?;
    }
    for n in 1..=11usize {
        for d in (1..=n).step_by(2) {
            let closed: BigInt = (0..=d / 2).map(|i| binomial(n as u64, i as u64)).sum();
            let got = lee_elementary(n, d).map_err(err)?.rank_bound();
            ensure(BigInt::from(got) == closed && lee_term_count(n, d) == closed, || {
                format!("lee({n},{d}) has {got} terms, closed form {closed}")
            })?;
        }
    }
    Ok("6, 8, 46 and all odd d for n <= 11".into())
}

fn random_graph(rng: &mut ChaCha20Rng, n: usize, directed: bool) -> Graph {
    let edges: Vec<(usize, usize)> = (0..n)
        .cartesian_product(0..n)
        .filter(|&(u, v)| u != v && (directed || u < v) && rng.gen_bool(0.5))
        .collect();
    Graph::new(n, directed, &edges).expect("valid edges")
}

fn exact_counting() -> Outcome {
    let started = Instant::now();
    let limits = Limits::default();
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let mut comparisons = 0;
    for i in 0..100u64 {
        let n = rng.gen_range(3..=8);
        let directed = i % 4 == 3;
        let g = if directed { random_graph(&mut rng, n, true) } else { Graph::erdos_renyi(n, 1, 2, 1000 + i) };
        let conventions: &[CycleConvention] = if directed {
            &[CycleConvention::RootedDirected, CycleConvention::DirectedCycles]
        } else {
            &[CycleConvention::RootedDirected, CycleConvention::DirectedCycles, CycleConvention::UndirectedCycles]
        };
        for d in 3..=n {
            for &convention in conventions {
                let fast = count_simple_cycles(&g, d, convention).map_err(err)?.value;
                let slow = enumerate_count(&Problem::Cycles { graph: &g, d, convention }, &limits).map_err(err)?;
                ensure(fast == slow, || format!("graph {i}, d={d}, {convention}: {fast} vs oracle {slow}"))?;
                comparisons += 1;
            }
        }
    }
    for n in 1..=8usize {
        let a: Vec<Vec<Rational>> =
            (0..n).map(|_| (0..n).map(|_| rational(rng.gen_range(-3..=5), rng.gen_range(1..=3))).collect()).collect();
        let fast = permanent(&a, &limits).map_err(err)?.value;
        let slow = enumerate_count(&Problem::Permanent(&a), &limits).map_err(err)?;
        ensure(fast == slow, || format!("permanent {n}x{n}: {fast} vs oracle {slow}"))?;
        comparisons += 1;
    }
    for n in 3..=8usize {
        for directed in [false, true] {
            let g = random_graph(&mut rng, n, directed);
            for convention in [CycleConvention::RootedDirected, CycleConvention::DirectedCycles] {
                let fast = count_hamiltonian(&g, convention, &limits).map_err(err)?.value;
                let slow = enumerate_count(&Problem::Hamiltonian { graph: &g, convention }, &limits).map_err(err)?;
                ensure(fast == slow, || format!("hamiltonian n={n}: {fast} vs oracle {slow}"))?;
                comparisons += 1;
            }
        }
    }
    for (k, r) in [(2usize, 2usize), (2, 3), (3, 2), (2, 4), (5, 2), (3, 3)] {
        let ground = k * r;
        let sets: Vec<Vec<usize>> = (0..ground).combinations(r).filter(|_| rng.gen_bool(0.6)).collect();
        if sets.is_empty() {
            continue;
        }
        let s = SetSystem::new(ground, k, sets).map_err(err)?;
        let fast = count_set_partitions(&s, &limits).map_err(err)?.value;
        let slow = enumerate_count(&Problem::Partitions(&s), &limits).map_err(err)?;
        ensure(fast == slow, || format!("partitions k={k} r={r}: {fast} vs oracle {slow}"))?;
        comparisons += 1;
    }
    check_time(started, Duration::from_secs(180))?;
    Ok(format!("{comparisons} exact comparisons in {:.1?}", started.elapsed()))
}

fn query_budget() -> Outcome {
    for (n, d) in [(5, 3), (7, 3), (8, 5), (9, 5), (6, 1)] {
        let counted = CountingBlackBox::new(sparse_blackbox(&SparsePolynomial::elementary(n, d)));
        let report = exact_multilinear_sum(&counted).map_err(err)?;
        let closed: BigInt = (0..=d / 2).map(|i| binomial(n as u64, i as u64)).sum();
        ensure(BigInt::from(counted.calls()) == closed && BigInt::from(report.queries) == closed, || {
            format!("exact n={n} d={d}: {} calls, {} reported, closed form {closed}", counted.calls(), report.queries)
        })?;
        ensure(report.value == integer(binomial(n as u64, d as u64)), || format!("exact n={n} d={d}: wrong value"))?;
    }
    let g = Graph::complete(6);
    let counted = CountingBlackBox::new(cycle_poly(&g, 5).map_err(err)?);
    exact_multilinear_sum(&counted).map_err(err)?;
    ensure(counted.calls() == 1 + 6 + 15, || format!("cycle pipeline used {} calls", counted.calls()))?;

    let params = approx_parameters(3, &rational(1, 2)).map_err(err)?;
    ensure(params.n0 == 5 && params.m == 25 && params.per_function_queries == 6, || format!("{params:?}"))?;
    let counted = CountingBlackBox::new(sparse_blackbox(&SparsePolynomial::elementary(6, 3)));
    let report = approx_multilinear_sum(&counted, &ApproxConfig::new(rational(1, 2), 7)).map_err(err)?;
    ensure(counted.calls() == 150 && report.queries == 150, || {
        format!("approx d=3 eps=1/2: {} calls, {} reported, expected 150", counted.calls(), report.queries)
    })?;
    for (d, eps) in [(2, rational(1, 3)), (4, rational(2, 5)), (5, rational(3, 4))] {
        let p = approx_parameters(d, &eps).map_err(err)?;
        let n0 = (155 * d).div_ceil(100);
        let prob = Rational::new(
            (0..d).map(|i| BigInt::from(n0 - i)).product(),
            num_traits::pow(BigInt::from(n0), d),
        );
        let m = (integer(3) / (&eps * &eps * &prob)).ceil();
        let per: BigInt = (0..=d / 2).map(|i| binomial(n0 as u64, i as u64)).sum();
        let f = CountingBlackBox::new(sparse_blackbox(&SparsePolynomial::elementary(d + 2, d)));
        let r = approx_multilinear_sum(&f, &ApproxConfig::new(eps.clone(), 1)).map_err(err)?;
        let expected = m.to_integer() * per;
        ensure(BigInt::from(f.calls()) == expected && BigInt::from(r.queries) == expected && p.n0 == n0, || {
            format!("approx d={d}: {} calls, expected {expected}", f.calls())
        })?;
    }
    Ok("exact Lee counts and approx M * C(n0, <= d/2) (150 at d=3, eps=1/2)".into())
}

fn coverage<F: Fn(u64) -> Result<Rational, String>>(runs: u64, truth: &Rational, eps: &Rational, run: F) -> Result<(u64, Rational), String> {
    let mut hits = 0;
    let mut sum = Rational::zero();
    for seed in 0..runs {
        let v = run(seed)?;
        if within(&v, truth, eps) {
            hits += 1;
        }
        sum += v;
    }
    Ok((hits, sum / integer(runs)))
}

fn approximation_guarantee() -> Outcome {
    let started = Instant::now();
    let g = Graph::erdos_renyi(20, 3, 10, 2024);
    let truth = enumerate_count(
        &Problem::Cycles { graph: &g, d: 3, convention: CycleConvention::UndirectedCycles },
        &Limits::default(),
    )
    .map_err(err)?;
    let rooted = truth.clone() * integer(6);
    let poly = cycle_poly(&g, 3).map_err(err)?;
    let eps = rational(3, 10);
    let (hits, _) = coverage(300, &rooted, &eps, |seed| {
        Ok(approx_multilinear_sum(&poly, &ApproxConfig::new(eps.clone(), seed)).map_err(err)?.value)
    })?;
    let ok = hits * 100 >= 60 * 300;
    check_time(started, Duration::from_secs(300))?;
    let detail = format!("{hits}/300 runs within 0.3 of {truth} triangles in {:.1?}", started.elapsed());
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn unbiasedness() -> Outcome {
    let f = sparse_blackbox(&SparsePolynomial::elementary(6, 3));
    let runs = 500u64;
    let values: Vec<Rational> = (0..runs)
        .map(|seed| approx_multilinear_sum(&f, &ApproxConfig::new(rational(1, 2), seed)).map(|r| r.value))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let mean: Rational = values.iter().sum::<Rational>() / integer(runs);
    let var: Rational =
        values.iter().map(|v| (v - &mean) * (v - &mean)).sum::<Rational>() / integer(runs - 1);
    let dev = &mean - integer(20);
    let ok = &dev * &dev * integer(runs) <= integer(9) * &var;
    let z = (&dev * &dev * integer(runs) / &var).to_integer();
    let detail = format!("mean {:.3} over {runs} seeds, z^2 ~ {z} (bound 9)", to_f64(&mean));
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn to_f64(r: &Rational) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

fn subgraph_counting() -> Outcome {
    let limits = Limits::default();
    let h = Graph::path(3);
    let g = Graph::complete(4);
    let td = TreeDecomposition::min_degree(&h);
    let truth = enumerate_count(&Problem::Subgraphs { pattern: &h, host: &g }, &limits).map_err(err)?;
    ensure(truth == integer(12), || format!("oracle gives {truth} copies of P3 in K4"))?;
    let eps = rational(3, 10);
    let (hits, mean) = coverage(300, &truth, &eps, |seed| {
        Ok(count_subgraphs_approx(&h, &g, &td, &ApproxConfig::new(eps.clone(), seed), &limits).map_err(err)?.value)
    })?;
    ensure(hits * 100 >= 60 * 300, || format!("only {hits}/300 runs within 0.3 of 12"))?;

    let mut rng = ChaCha20Rng::seed_from_u64(77);
    let ones = |n: usize| vec![Rational::one(); n];
    let mut pairs = 0;
    for hn in 1..=6 {
        for gn in 1..=7 {
            for _ in 0..3 {
                let pattern = random_graph(&mut rng, hn, false);
                let host = random_graph(&mut rng, gn, false);
                for td in [TreeDecomposition::min_degree(&pattern), TreeDecomposition::trivial(&pattern)] {
                    let p = hom_poly(&pattern, &host, &td, &limits).map_err(err)?;
                    let slow = enumerate_count(&Problem::Homomorphisms { pattern: &pattern, host: &host }, &limits)
                        .map_err(err)?;
                    let fast = p.eval(&ones(gn));
                    ensure(fast == slow, || format!("hom |H|={hn} |G|={gn}: {fast} vs oracle {slow}"))?;
                }
                pairs += 1;
            }
        }
    }
    Ok(format!("{hits}/300 within 0.3 of 12 (mean {:.2}); {pairs} hom pairs exact", to_f64(&mean)))
}

/// Counts GF(2^m) evaluations.
struct CountingGf<F> {
    inner: F,
    calls: AtomicU64,
}

impl<F: GfBlackBox> GfBlackBox for CountingGf<F> {
    fn nvars(&self) -> usize {
        self.inner.nvars()
    }
    fn degree(&self) -> usize {
        self.inner.degree()
    }
    fn eval_gf(&self, field: &Gf2m, point: &[u64]) -> u64 {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.eval_gf(field, point)
    }
}

/// Degree-`d` polynomial in `n` variables whose every monomial repeats a
/// variable.
fn multilinear_free(rng: &mut ChaCha20Rng, n: usize, d: usize) -> SparsePolynomial {
    let mut p = SparsePolynomial::zero(n, d);
    for _ in 0..rng.gen_range(1..=12) {
        let mut e = vec![0u32; n];
        e[rng.gen_range(0..n)] = 2;
        for _ in 2..d {
            e[rng.gen_range(0..n)] += 1;
        }
        p.add_term(e, integer(rng.gen_range(1..=9))).expect("shape matches");
    }
    p
}

fn one_sided_error() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let mut trials = 0usize;
    let mut false_positives = 0;
    for i in 0..40u64 {
        let (n, d) = (rng.gen_range(3..=7), rng.gen_range(2..=3));
        let p = multilinear_free(&mut rng, n, d);
        let counted = CountingGf { inner: sparse_blackbox(&p), calls: AtomicU64::new(0) };
        let r = detect_multilinear_char2(&counted, &DetectConfig { trials: 200, seed: i, m: None }).map_err(err)?;
        ensure(counted.calls.load(Ordering::Relaxed) == r.queries && r.queries == (r.trials_run as u64) * ((1 << d) - 1), || {
            format!("detector query count {} disagrees with trials * (2^d - 1)", r.queries)
        })?;
        false_positives += usize::from(r.detected);
        trials += r.trials_run;
    }
    for (i, (n, d)) in [(6usize, 4usize), (7, 4), (8, 6), (5, 4)].into_iter().enumerate() {
        let tree = Graph::path(n);
        let r = detect_multilinear_char2(&cycle_poly(&tree, d).map_err(err)?, &DetectConfig { trials: 500, seed: 50 + i as u64, m: None })
            .map_err(err)?;
        false_positives += usize::from(r.detected);
        trials += r.trials_run;
    }
    ensure(trials >= 10_000, || format!("only {trials} trials run"))?;
    ensure(false_positives == 0, || format!("{false_positives} false positives in {trials} trials"))?;

    let e53 = sparse_blackbox(&SparsePolynomial::elementary(5, 3));
    let detected = (0..200u64)
        .filter(|&s| detect_multilinear_char2(&e53, &DetectConfig { trials: 10, seed: 9000 + s, m: None }).is_ok_and(|r| r.detected))
        .count();
    ensure(detected * 100 >= 99 * 200, || format!("e_(5,3) detected in only {detected}/200 repetitions"))?;

    let mut cert_runs = 0;
    for seed in 0..150u64 {
        let (n, d) = (rng.gen_range(3..=6), rng.gen_range(2..=3));
        let f = sparse_blackbox(&multilinear_free(&mut rng, n, d));
        let g = lee_elementary(n, d).or_else(|_| ryser_elementary(n, d)).map_err(err)?;
        ensure(!certify_support_intersection(&g, &f, &rational(1, 4), seed).map_err(err)?, || {
            format!("certification false positive at seed {seed}")
        })?;
        cert_runs += 1;
    }
    let yes = sparse_blackbox(&SparsePolynomial::elementary(5, 3));
    let g = lee_elementary(5, 3).map_err(err)?;
    let certified = (0..50u64).filter(|&s| certify_support_intersection(&g, &yes, &rational(1, 4), s).unwrap_or(false)).count();
    ensure(certified == 50, || format!("e_(5,3) certified in only {certified}/50 runs"))?;
    Ok(format!(
        "0 false positives in {trials} detector trials and {cert_runs} certifications; e_(5,3) detected {detected}/200"
    ))
}

fn splitter_suite() -> Outcome {
    let limits = Limits::default();
    ensure(perfect_size(8, 2, 2, 2).map_err(err)? == 9, || "perfect_size(8,2,2,2) != 9".into())?;
    for (n, k, l) in [(10usize, 3usize, 3usize), (8, 2, 4)] {
        let spec = BalancedSpec { n, k, l, delta: integer(2) };
        let fam = sample_verified_balanced(&spec, 11, &limits).map_err(err)?;
        ensure(fam.len() == balanced_size(&spec).map_err(err)?, || format!("({n},{k},{l}) has the wrong size"))?;
        let report = verify_balanced(&fam, k, &spec.delta, &limits).map_err(err)?;
        let worst = (0..n).combinations(k).map(|s| integer(fam.injective_count(&s))).fold(None, |acc: Option<(Rational, Rational)>, c| {
            Some(match acc {
                None => (c.clone(), c),
                Some((lo, hi)) => (lo.min(c.clone()), hi.max(c)),
            })
        });
        let (lo, hi) = worst.ok_or("no subsets")?;
        let c = &report.c;
        ensure(report.ok && lo >= c / &spec.delta && hi <= c * &spec.delta, || {
            format!("({n},{k},{l}) family is not 2-balanced: counts in [{lo}, {hi}], c = {c}")
        })?;
    }
    let fam = sample_verified_perfect(6, 2, 3, 2, 13, &limits).map_err(err)?;
    ensure(verify_perfect(&fam, 2, 2, &limits).map_err(err)?, || "(6,2,3,2) family fails verification".into())?;
    ensure(fam.len() == perfect_size(6, 2, 3, 2).map_err(err)?, || "(6,2,3,2) family has the wrong size".into())?;
    Ok("sizes match, (10,3,3), (8,2,4) balanced and (6,2,3,2) perfect verified".into())
}

fn algebraic_audits() -> Outcome {
    let limits = Limits::default();
    let e32 = SparsePolynomial::elementary(3, 2);
    let r = catalecticant(&e32, 1, 1, &limits).map_err(err)?.rank();
    ensure(r == 3, || format!("rank Cat_(e_3,2)(1,1) = {r}"))?;
    let mut audited = 0;
    for n in 1..=6 {
        for d in 1..=n.min(4) {
            let g = SparsePolynomial::elementary(n, d);
            let mut decomps = vec![ryser_elementary(n, d).map_err(err)?];
            if d % 2 == 1 || n > d {
                decomps.push(lee_elementary(n, d).map_err(err)?);
            }
            if n == d {
                decomps.push(monomial_product_decomposition(&vec![1; n]).map_err(err)?);
            }
            for dec in decomps {
                ensure(rank_lower_bound_check(&g, &dec, &limits).map_err(err)?, || format!("rank bound fails at n={n} d={d}"))?;
                audited += 1;
            }
        }
    }
    for d in [2, 3] {
        ensure(hankel_catalecticant_bound_check(d, &limits).map_err(err)?, || format!("Hankel bound fails at d={d}"))?;
    }
    let mut rng = ChaCha20Rng::seed_from_u64(10);
    for _ in 0..20 {
        let mut nodes: Vec<Rational> = Vec::new();
        while nodes.len() < 6 {
            let x = rational(rng.gen_range(-20..=20), rng.gen_range(1..=5));
            if !nodes.contains(&x) {
                nodes.push(x);
            }
        }
        let p = hankel_support_polynomial(6, 3, &nodes, &limits).map_err(err)?;
        ensure(is_positive_multilinear(&p) && p.len() == 20, || "Hankel support polynomial not positive on all 20 monomials".into())?;
    }
    Ok(format!("rank 3, {audited} decompositions audited, Hankel d=2,3 and 20 node sets positive"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("decomposition exactness", decomposition_exactness),
        ("term counts", term_counts),
        ("exact counting vs oracle", exact_counting),
        ("query budget", query_budget),
        ("approximation guarantee", approximation_guarantee),
        ("unbiasedness", unbiasedness),
        ("subgraph counting", subgraph_counting),
        ("one-sided error", one_sided_error),
        ("splitter suite", splitter_suite),
        ("algebraic audits", algebraic_audits),
    ];
    let mut passed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match &outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(detail) => println!("criterion {:>2} FAIL {name}: {detail}", i + 1),
        }
        passed.push(outcome.is_ok());
    }
    let declared = passed[3] && passed[4];
    println!(
        "criterion 11 {} asymptotic runtimes (declared): covered by the query-count and guarantee checks of criteria 4 and 5",
        if declared { "PASS" } else { "FAIL" }
    );
    passed.push(declared);
    if passed.iter().any(|ok| !ok) {
        std::process::exit(1);
    }
}
