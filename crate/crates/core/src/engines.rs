//! End-to-end counting pipelines: exact multilinear sums, the sampled
//! approximation, inclusion-exclusion over the cube, the characteristic-2
//! detector and randomized support certification.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::decomp::{char2_permanent_points, lee_elementary, monomial_product_decomposition};
use crate::error::{Error, Result};
use crate::genpoly::{cycle_poly, hom_poly, partition_poly, prod_poly, GfBlackBox, Graph, SetSystem, TreeDecomposition};
use crate::gf2m::Gf2m;
use crate::numeric::{ceil_rational, derive_seed, u128_of};
use crate::polycore::{
    apply_operator, apply_operator_traced, falling_factorial, format_rational, integer, BlackBoxPolynomial, Limits,
    Rational, WaringDecomposition,
};

/// How closed walks without repeated vertices are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CycleConvention {
    /// Every starting vertex and direction counted separately.
    RootedDirected,
    /// Rooted count divided by `d`.
    DirectedCycles,
    /// Rooted count divided by `2d`.
    UndirectedCycles,
}

impl CycleConvention {
    fn divisor(self, d: usize) -> usize {
        match self {
            CycleConvention::RootedDirected => 1,
            CycleConvention::DirectedCycles => d,
            CycleConvention::UndirectedCycles => 2 * d,
        }
    }
}

impl fmt::Display for CycleConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CycleConvention::RootedDirected => "rooted-directed",
            CycleConvention::DirectedCycles => "directed-cycles",
            CycleConvention::UndirectedCycles => "undirected-cycles",
        })
    }
}

impl FromStr for CycleConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rooted-directed" | "rooted" => Ok(CycleConvention::RootedDirected),
            "directed-cycles" | "directed" => Ok(CycleConvention::DirectedCycles),
            "undirected-cycles" | "undirected" => Ok(CycleConvention::UndirectedCycles),
            other => Err(Error::domain(format!("unknown cycle convention {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApproxConfig {
    pub epsilon: Rational,
    pub seed: u64,
    /// Independent repetitions; the reported value is their median.
    pub trials: usize,
}

impl ApproxConfig {
    pub fn new(epsilon: Rational, seed: u64) -> Self {
        ApproxConfig { epsilon, seed, trials: 1 }
    }
}

/// Result of a counting pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountReport {
    pub value: Rational,
    pub queries: u64,
    pub method: String,
    pub seed: Option<u64>,
    pub parameters: BTreeMap<String, String>,
    pub elapsed: Duration,
    /// Largest numerator or denominator bit length returned by the black box.
    pub max_value_bits: u64,
}

impl CountReport {
    fn new(method: &str, value: Rational, queries: u64, started: Instant) -> Self {
        CountReport {
            value,
            queries,
            method: method.to_string(),
            seed: None,
            parameters: BTreeMap::new(),
            elapsed: started.elapsed(),
            max_value_bits: 0,
        }
    }

    fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }
}

/// Decomposition of `e_{n,d}` used by the exact pipeline: the Lee
/// construction, or the monomial one when `d` is even and `n = d`.
pub fn exact_decomposition(n: usize, d: usize) -> Result<(WaringDecomposition, &'static str)> {
    if d == 0 || d > n {
        return Err(Error::domain(format!("multilinear sum needs 1 <= d <= n, got n={n} d={d}")));
    }
    if d % 2 == 0 && n == d {
        Ok((monomial_product_decomposition(&vec![1; d])?, "monomial"))
    } else {
        Ok((lee_elementary(n, d)?, if d % 2 == 1 { "lee_odd" } else { "lee_even" }))
    }
}

/// Sum of the multilinear coefficients of `f`, i.e. `e_{n,d}(d/dx) f`.
pub fn exact_multilinear_sum<F: BlackBoxPolynomial + ?Sized>(f: &F) -> Result<CountReport> {
    let started = Instant::now();
    let (g, kind) = exact_decomposition(f.nvars(), f.degree())?;
    let (value, stats) = apply_operator_traced(&g, f)?;
    let mut report = CountReport::new("exact_multilinear_sum", value, stats.evaluations, started)
        .param("decomposition", kind)
        .param("n", f.nvars())
        .param("d", f.degree());
    report.max_value_bits = stats.max_value_bits;
    Ok(report)
}

fn divide_exact(value: &Rational, by: usize, what: &str) -> Result<Rational> {
    let q = value / integer(by);
    if !q.is_integer() {
        return Err(Error::Consistency(format!("{what}: {} is not divisible by {by}", format_rational(value))));
    }
    Ok(q)
}

fn check_convention(g: &Graph, d: usize, convention: CycleConvention) -> Result<()> {
    if convention != CycleConvention::RootedDirected && d < 3 {
        return Err(Error::domain(format!("cycle conventions need length d >= 3, got {d}")));
    }
    if convention == CycleConvention::UndirectedCycles && g.is_directed() {
        return Err(Error::domain("undirected-cycles convention needs an undirected graph"));
    }
    Ok(())
}

/// Cycles of length `d` from the multilinear part of `trace(M(x)^d)`.
pub fn count_simple_cycles(g: &Graph, d: usize, convention: CycleConvention) -> Result<CountReport> {
    check_convention(g, d, convention)?;
    let mut report = exact_multilinear_sum(&cycle_poly(g, d)?)?;
    report.value = divide_exact(&report.value, convention.divisor(d), "cycle convention")?;
    report.method = "count_simple_cycles".into();
    Ok(report.param("convention", convention))
}

/// `n0 = ceil(1.55 d)`, `p = (n0)_d / n0^d`, `M = ceil(3 / (eps^2 p))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApproxParameters {
    pub n0: usize,
    pub p: Rational,
    pub m: usize,
    pub per_function_queries: usize,
}

pub fn approx_parameters(d: usize, epsilon: &Rational) -> Result<ApproxParameters> {
    if !(epsilon.is_positive() && *epsilon < Rational::one()) {
        return Err(Error::domain(format!("epsilon must lie in (0,1), got {}", format_rational(epsilon))));
    }
    if d == 0 {
        return Err(Error::domain("degree must be positive"));
    }
    let n0 = (155 * d).div_ceil(100);
    let p = Rational::new(falling_factorial(n0 as u64, d as u64), num_traits::pow(BigInt::from(n0), d));
    let m = ceil_rational(&(integer(3) / (epsilon * epsilon * &p)));
    let m = m.to_usize().ok_or_else(|| Error::budget("sample count", u128::MAX, usize::MAX as u128))?;
    let per_function_queries = lee_elementary(n0, d)?.rank_bound();
    Ok(ApproxParameters { n0, p, m, per_function_queries })
}

/// `f(y_{pi(1)}, ..., y_{pi(n)})` as a polynomial in `n0` variables.
struct Substituted<'a, F: ?Sized> {
    f: &'a F,
    pi: Vec<usize>,
    n0: usize,
}

impl<F: BlackBoxPolynomial + ?Sized> BlackBoxPolynomial for Substituted<'_, F> {
    fn nvars(&self) -> usize {
        self.n0
    }
    fn degree(&self) -> usize {
        self.f.degree()
    }
    fn eval(&self, point: &[Rational]) -> Rational {
        let full: Vec<Rational> = self.pi.iter().map(|&j| point[j].clone()).collect();
        self.f.eval(&full)
    }
}

fn approx_once<F: BlackBoxPolynomial + ?Sized>(
    f: &F,
    params: &ApproxParameters,
    lee: &WaringDecomposition,
    seed: u64,
) -> Result<(Rational, u64)> {
    let n = f.nvars();
    let results: Vec<Result<(Rational, u64)>> = (0..params.m)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(seed, i as u64));
            let pi: Vec<usize> = (0..n).map(|_| rng.gen_range(0..params.n0)).collect();
            let sub = Substituted { f, pi, n0: params.n0 };
            let (v, stats) = apply_operator_traced(lee, &sub)?;
            Ok((v, stats.max_value_bits))
        })
        .collect();
    let mut total = Rational::zero();
    let mut bits = 0;
    for r in results {
        let (v, b) = r?;
        total += v;
        bits = bits.max(b);
    }
    Ok((total / (&params.p * integer(params.m)), bits))
}

/// Unbiased estimate of the multilinear coefficient sum of a polynomial with
/// nonnegative coefficients, within `(1 ± eps)` with probability at least
/// 2/3 per trial.
pub fn approx_multilinear_sum<F: BlackBoxPolynomial + ?Sized>(f: &F, cfg: &ApproxConfig) -> Result<CountReport> {
    let started = Instant::now();
    let d = f.degree();
    if d > f.nvars() {
        return Err(Error::domain(format!("degree {d} exceeds the {} variables", f.nvars())));
    }
    if cfg.trials == 0 {
        return Err(Error::domain("trials must be positive"));
    }
    let params = approx_parameters(d, &cfg.epsilon)?;
    let lee = lee_elementary(params.n0, d)?;
    let mut values = Vec::with_capacity(cfg.trials);
    let mut bits = 0;
    for t in 0..cfg.trials {
        let seed = if cfg.trials == 1 { cfg.seed } else { derive_seed(cfg.seed, u64::MAX - t as u64) };
        let (v, b) = approx_once(f, &params, &lee, seed)?;
        values.push(v);
        bits = bits.max(b);
    }
    values.sort();
    let value = values[(values.len() - 1) / 2].clone();
    let queries = (cfg.trials * params.m * params.per_function_queries) as u64;
    let mut report = CountReport::new("approx_multilinear_sum", value, queries, started)
        .param("n0", params.n0)
        .param("p", format_rational(&params.p))
        .param("M", params.m)
        .param("epsilon", format_rational(&cfg.epsilon))
        .param("trials", cfg.trials);
    report.seed = Some(cfg.seed);
    report.max_value_bits = bits;
    Ok(report)
}

/// `|Aut(H)|` by checking every vertex permutation.
pub fn count_automorphisms(h: &Graph, limits: &Limits) -> Result<u64> {
    if h.n() > limits.permutation_vertices {
        return Err(Error::budget("automorphism search vertices", h.n() as u128, limits.permutation_vertices as u128));
    }
    let arcs: Vec<(usize, usize)> = h.arcs().collect();
    Ok((0..h.n())
        .permutations(h.n())
        .filter(|sigma| arcs.iter().all(|&(u, v)| h.has_edge(sigma[u], sigma[v])))
        .count() as u64)
}

fn check_pattern(h: &Graph, g: &Graph) -> Result<()> {
    if h.n() > g.n() {
        return Err(Error::domain(format!("pattern has {} vertices, host only {}", h.n(), g.n())));
    }
    Ok(())
}

/// Approximate number of subgraphs of `g` isomorphic to `h`.
pub fn count_subgraphs_approx(
    h: &Graph,
    g: &Graph,
    td: &TreeDecomposition,
    cfg: &ApproxConfig,
    limits: &Limits,
) -> Result<CountReport> {
    check_pattern(h, g)?;
    let aut = count_automorphisms(h, limits)?;
    let p = hom_poly(h, g, td, limits)?;
    let mut report = approx_multilinear_sum(&p, cfg)?;
    report.value /= integer(aut);
    report.method = "count_subgraphs_approx".into();
    Ok(report.param("automorphisms", aut).param("treewidth", td.width()))
}

/// Exact number of subgraphs of `g` isomorphic to `h`.
pub fn count_subgraphs_exact(h: &Graph, g: &Graph, td: &TreeDecomposition, limits: &Limits) -> Result<CountReport> {
    check_pattern(h, g)?;
    let aut = count_automorphisms(h, limits)?;
    let p = hom_poly(h, g, td, limits)?;
    let mut report = exact_multilinear_sum(&p)?;
    report.value = divide_exact(&report.value, aut as usize, "automorphism count")?;
    report.method = "count_subgraphs_exact".into();
    Ok(report.param("automorphisms", aut).param("treewidth", td.width()))
}

/// `sum_{alpha in {0,1}^n} (-1)^{|alpha|+n} f(alpha)`, the coefficient of
/// `x_1 ... x_n` in a degree-`n` form in `n` variables.
pub fn cube_sum<F: BlackBoxPolynomial + ?Sized>(f: &F, limits: &Limits) -> Result<(Rational, u64)> {
    let n = f.nvars();
    if f.degree() != n {
        return Err(Error::contract(format!("cube sum needs degree = nvars, got degree {} on {n}", f.degree())));
    }
    if n > limits.cube_dimension {
        return Err(Error::budget("inclusion-exclusion dimension", n as u128, limits.cube_dimension as u128));
    }
    let value = (1u64..(1u64 << n))
        .into_par_iter()
        .map(|mask| {
            let point: Vec<Rational> = (0..n).map(|i| integer(((mask >> i) & 1) as i64)).collect();
            let v = f.eval(&point);
            if (mask.count_ones() as usize + n) % 2 == 1 {
                -v
            } else {
                v
            }
        })
        .reduce(Rational::zero, |a, b| a + b);
    Ok((value, (1u64 << n) - 1))
}

/// Permanent by inclusion-exclusion over the row-sum polynomial.
pub fn permanent(a: &[Vec<Rational>], limits: &Limits) -> Result<CountReport> {
    let started = Instant::now();
    let (value, queries) = cube_sum(&prod_poly(a)?, limits)?;
    Ok(CountReport::new("permanent", value, queries, started).param("n", a.len()))
}

pub fn count_hamiltonian(g: &Graph, convention: CycleConvention, limits: &Limits) -> Result<CountReport> {
    let started = Instant::now();
    let n = g.n();
    check_convention(g, n, convention)?;
    let (rooted, queries) = cube_sum(&cycle_poly(g, n)?, limits)?;
    let value = divide_exact(&rooted, convention.divisor(n), "cycle convention")?;
    Ok(CountReport::new("count_hamiltonian", value, queries, started).param("convention", convention))
}

/// Ordered partitions of the ground set into `k` of the sets; the unordered
/// count is recorded under `unordered`.
pub fn count_set_partitions(s: &SetSystem, limits: &Limits) -> Result<CountReport> {
    let started = Instant::now();
    let (value, queries) = cube_sum(&partition_poly(s), limits)?;
    let k_fact = u128_of(&crate::polycore::factorial(s.k() as u64));
    let unordered = divide_exact(&value, k_fact as usize, "unordered partitions")?;
    Ok(CountReport::new("count_set_partitions", value, queries, started)
        .param("unordered", format_rational(&unordered))
        .param("k", s.k()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectConfig {
    pub trials: usize,
    pub seed: u64,
    /// Field degree; defaults to the smallest `m` with `2^m >= max(2d, n+d)`.
    pub m: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectReport {
    pub detected: bool,
    pub trials_run: usize,
    pub queries: u64,
    pub m: u32,
}

/// The `d x n` Cauchy matrix `1 / (u_j + v_i)` with `u_j = j`, `v_i = d + i`.
pub fn cauchy_matrix(field: &Gf2m, d: usize, n: usize) -> Result<Vec<Vec<u64>>> {
    if (n + d) as u128 > field.order() {
        return Err(Error::domain(format!("GF(2^{}) has too few elements for a {d} x {n} Cauchy matrix", field.degree())));
    }
    (0..d)
        .map(|j| (0..n).map(|i| field.inv(field.add(j as u64, (d + i) as u64))).collect())
        .collect()
}

/// One-sided test for a multilinear monomial in the support of `f` over
/// GF(2^m). Never reports `true` when `f` has none.
pub fn detect_multilinear_char2<F: GfBlackBox + ?Sized>(f: &F, cfg: &DetectConfig) -> Result<DetectReport> {
    let (n, d) = (f.nvars(), f.degree());
    if d == 0 || d > n {
        return Err(Error::domain(format!("need 1 <= d <= n, got n={n} d={d}")));
    }
    let needed = (2 * d).max(n + d) as u128;
    let field = match cfg.m {
        Some(m) => {
            let field = Gf2m::new(m)?;
            if field.order() < 2 * d as u128 {
                return Err(Error::domain(format!("2^m = {} is smaller than 2d = {}", field.order(), 2 * d)));
            }
            field
        }
        None => Gf2m::with_at_least(needed)?,
    };
    if d >= 40 {
        return Err(Error::budget("row combinations per trial", 1u128 << d.min(127), 1 << 40));
    }
    let a = cauchy_matrix(&field, d, n)?;
    let combos = char2_permanent_points(&field, &a)?;
    let mut trials_run = 0;
    let mut detected = false;
    for t in 0..cfg.trials {
        trials_run += 1;
        let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(cfg.seed, t as u64));
        let scale: Vec<u64> = (0..n).map(|_| field.random(&mut rng)).collect();
        let sum = combos
            .par_iter()
            .map(|p| {
                let point: Vec<u64> = p.iter().zip(&scale).map(|(&x, &s)| field.mul(x, s)).collect();
                f.eval_gf(&field, &point)
            })
            .reduce(|| 0, |x, y| field.add(x, y));
        if sum != 0 {
            detected = true;
            break;
        }
    }
    Ok(DetectReport { detected, trials_run, queries: (trials_run * combos.len()) as u64, m: field.degree() })
}

/// `f(a_1 x_1, ..., a_n x_n)`.
struct Rescaled<'a, F: ?Sized> {
    f: &'a F,
    a: Vec<Rational>,
}

impl<F: BlackBoxPolynomial + ?Sized> BlackBoxPolynomial for Rescaled<'_, F> {
    fn nvars(&self) -> usize {
        self.f.nvars()
    }
    fn degree(&self) -> usize {
        self.f.degree()
    }
    fn eval(&self, point: &[Rational]) -> Rational {
        let p: Vec<Rational> = point.iter().zip(&self.a).map(|(x, a)| x * a).collect();
        self.f.eval(&p)
    }
}

/// Randomized test for `supp(f) ∩ supp(g) ≠ ∅` with one-sided error at most
/// `delta`.
pub fn certify_support_intersection<F: BlackBoxPolynomial + ?Sized>(
    g: &WaringDecomposition,
    f: &F,
    delta: &Rational,
    seed: u64,
) -> Result<bool> {
    if !(delta.is_positive() && *delta < Rational::one()) {
        return Err(Error::domain("delta must lie in (0,1)"));
    }
    let size = ceil_rational(&(integer(f.degree()) / delta)).max(BigInt::one());
    let size = size.to_u64().ok_or_else(|| Error::domain("sampling range too large"))?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let a = (0..f.nvars()).map(|_| integer(rng.gen_range(1..=size))).collect();
    let value = apply_operator(g, &Rescaled { f, a })?;
    Ok(!value.is_zero())
}

/// Deterministic variant for `g` and `f` with nonnegative coefficients.
pub fn certify_nonnegative<F: BlackBoxPolynomial + ?Sized>(g: &WaringDecomposition, f: &F) -> Result<bool> {
    Ok(apply_operator(g, f)?.is_positive())
}
