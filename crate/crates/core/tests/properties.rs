use proptest::prelude::*;

use waring_core::decomp::{lee_elementary, ryser_elementary};
use waring_core::engines::{approx_multilinear_sum, count_simple_cycles, ApproxConfig, CycleConvention};
use waring_core::genpoly::{cycle_poly, hom_poly, sparse_blackbox, Graph, TreeDecomposition};
use waring_core::gf2m::Gf2m;
use waring_core::oracle::{catalecticant, enumerate_count, Problem};
use waring_core::polycore::{format_rational, integer, parse_rational, rational};
use waring_core::{apply_operator, BlackBoxPolynomial, Limits, Rational, SparsePolynomial, WaringDecomposition};

fn sparse(n: usize, d: usize) -> impl Strategy<Value = SparsePolynomial> {
    prop::collection::vec((prop::collection::vec(0..n, d), -5i64..=5), 1..8).prop_map(move |terms| {
        let mut p = SparsePolynomial::zero(n, d);
        for (vars, c) in terms {
            let mut e = vec![0u32; n];
            vars.into_iter().for_each(|v| e[v] += 1);
            p.add_term(e, integer(c)).unwrap();
        }
        p
    })
}

fn shape() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=6).prop_flat_map(|n| (Just(n), 1..=n))
}

fn graph(max_n: usize, directed: bool) -> impl Strategy<Value = Graph> {
    (3..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(any::<bool>(), n * n).prop_map(move |bits| {
            let edges: Vec<(usize, usize)> = (0..n)
                .flat_map(|u| (0..n).map(move |v| (u, v)))
                .filter(|&(u, v)| u != v && (directed || u < v) && bits[u * n + v])
                .collect();
            Graph::new(n, directed, &edges).unwrap()
        })
    })
}

fn elementary_decomposition(n: usize, d: usize) -> WaringDecomposition {
    if d % 2 == 1 || n > d {
        lee_elementary(n, d).unwrap()
    } else {
        ryser_elementary(n, d).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn operator_extracts_the_multilinear_sum((n, d, f) in shape().prop_flat_map(|(n, d)| (Just(n), Just(d), sparse(n, d)))) {
        let g = elementary_decomposition(n, d);
        let expected = f.multilinear_sum();
        prop_assert_eq!(apply_operator(&g, &sparse_blackbox(&f)).unwrap(), expected, "n={} d={}", n, d);
    }

    #[test]
    fn operator_is_linear(f in sparse(5, 3), h in sparse(5, 3), a in -4i64..=4) {
        let g = lee_elementary(5, 3).unwrap();
        let combo = f.add(&h.scale(&integer(a))).unwrap();
        let lhs = apply_operator(&g, &sparse_blackbox(&combo)).unwrap();
        let rhs = apply_operator(&g, &sparse_blackbox(&f)).unwrap()
            + integer(a) * apply_operator(&g, &sparse_blackbox(&h)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn decomposition_json_round_trips((n, d) in shape()) {
        let g = ryser_elementary(n, d).unwrap();
        prop_assert_eq!(WaringDecomposition::from_json(&g.to_json().unwrap()).unwrap(), g);
    }

    #[test]
    fn rationals_round_trip(p in -10_000i64..10_000, q in 1i64..10_000) {
        let r = rational(p, q);
        prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
    }

    #[test]
    fn cycle_counts_match_enumeration(g in graph(7, false), d in 3usize..=7) {
        prop_assume!(d <= g.n());
        for convention in [CycleConvention::RootedDirected, CycleConvention::UndirectedCycles] {
            let fast = count_simple_cycles(&g, d, convention).unwrap().value;
            let slow = enumerate_count(&Problem::Cycles { graph: &g, d, convention }, &Limits::default()).unwrap();
            prop_assert_eq!(fast, slow);
        }
    }

    #[test]
    fn directed_cycle_counts_match_enumeration(g in graph(6, true), d in 3usize..=6) {
        prop_assume!(d <= g.n());
        let fast = count_simple_cycles(&g, d, CycleConvention::DirectedCycles).unwrap().value;
        let slow = enumerate_count(
            &Problem::Cycles { graph: &g, d, convention: CycleConvention::DirectedCycles },
            &Limits::default(),
        ).unwrap();
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn catalecticant_transpose_symmetry(f in sparse(4, 3)) {
        let limits = Limits::default();
        for u in 0..=3 {
            let a = catalecticant(&f, u, 3 - u, &limits).unwrap().rank();
            let b = catalecticant(&f, 3 - u, u, &limits).unwrap().rank();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn catalecticant_rank_is_invariant_under_unimodular_change(f in sparse(3, 3), s in -3i64..=3, t in -3i64..=3) {
        let limits = Limits::default();
        let m = vec![
            vec![integer(1), integer(s), integer(t)],
            vec![integer(0), integer(1), integer(s)],
            vec![integer(0), integer(0), integer(1)],
        ];
        let moved = f.linear_substitute(&m).unwrap();
        for u in 0..=3 {
            prop_assert_eq!(
                catalecticant(&f, u, 3 - u, &limits).unwrap().rank(),
                catalecticant(&moved, u, 3 - u, &limits).unwrap().rank()
            );
        }
    }

    #[test]
    fn hom_poly_ignores_the_decomposition(h in graph(5, false), g in graph(5, false), seed in 0u64..1000) {
        let limits = Limits::default();
        let a = hom_poly(&h, &g, &TreeDecomposition::min_degree(&h), &limits).unwrap();
        let b = hom_poly(&h, &g, &TreeDecomposition::trivial(&h), &limits).unwrap();
        let point: Vec<Rational> = (0..g.n()).map(|i| rational((seed as i64 * 7 + i as i64 * 13) % 11 - 5, 1 + i as i64)).collect();
        prop_assert_eq!(a.eval(&point), b.eval(&point));
    }

    #[test]
    fn field_axioms(m in 1u32..=20, a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let f = Gf2m::new(m).unwrap();
        let mask = (f.order() - 1) as u64;
        let (a, b, c) = (a & mask, b & mask, c & mask);
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn approximation_is_a_function_of_the_seed(seed in any::<u64>()) {
        let g = Graph::complete(5);
        let p = cycle_poly(&g, 3).unwrap();
        let cfg = ApproxConfig::new(rational(1, 2), seed);
        let a = approx_multilinear_sum(&p, &cfg).unwrap();
        let b = approx_multilinear_sum(&p, &cfg).unwrap();
        prop_assert_eq!(a.value, b.value);
    }
}
