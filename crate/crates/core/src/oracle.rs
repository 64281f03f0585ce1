//! Brute-force baselines and algebraic audits: exhaustive counting,
//! catalecticant ranks and the Hankel/Vandermonde support polynomial.
//!
//! Nothing here shares code with the fast pipelines it checks. Counts are
//! produced by direct enumeration, ranks by fraction-free elimination.

use std::collections::HashSet;

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::engines::CycleConvention;
use crate::error::{Error, Result};
use crate::genpoly::{Graph, SetSystem};
use crate::numeric;
use crate::polycore::{binomial, factorial, integer, Limits, Rational, SparsePolynomial, WaringDecomposition};

/// An instance for [`enumerate_count`].
#[derive(Debug, Clone)]
pub enum Problem<'a> {
    Cycles { graph: &'a Graph, d: usize, convention: CycleConvention },
    Subgraphs { pattern: &'a Graph, host: &'a Graph },
    Hamiltonian { graph: &'a Graph, convention: CycleConvention },
    Permanent(&'a [Vec<Rational>]),
    Homomorphisms { pattern: &'a Graph, host: &'a Graph },
    /// Ordered partitions of the ground set into `k` of the sets.
    Partitions(&'a SetSystem),
}

fn check_enumeration(what: &str, base: usize, exp: usize, limits: &Limits) -> Result<()> {
    let needed = (base as u128).checked_pow(exp as u32).unwrap_or(u128::MAX);
    if needed > limits.enumeration {
        return Err(Error::budget(what, needed, limits.enumeration));
    }
    Ok(())
}

/// Exact count by exhaustive enumeration.
pub fn enumerate_count(problem: &Problem<'_>, limits: &Limits) -> Result<Rational> {
    match *problem {
        Problem::Cycles { graph, d, convention } => {
            check_enumeration("cycle enumeration", graph.n(), d, limits)?;
            Ok(integer(count_cycles(graph, d, convention)))
        }
        Problem::Hamiltonian { graph, convention } => {
            check_permutations(graph.n(), limits)?;
            Ok(integer(count_cycles(graph, graph.n(), convention)))
        }
        Problem::Subgraphs { pattern, host } => {
            check_enumeration("subgraph enumeration", host.n(), pattern.n(), limits)?;
            Ok(integer(count_subgraphs(pattern, host)))
        }
        Problem::Homomorphisms { pattern, host } => {
            check_enumeration("homomorphism enumeration", host.n(), pattern.n(), limits)?;
            Ok(integer(count_homomorphisms(pattern, host)))
        }
        Problem::Permanent(a) => {
            if a.iter().any(|r| r.len() != a.len()) {
                return Err(Error::domain("permanent needs a square matrix"));
            }
            check_permutations(a.len(), limits)?;
            Ok(permanent_by_permutations(a))
        }
        Problem::Partitions(s) => {
            check_enumeration("partition enumeration", s.sets().len(), s.k(), limits)?;
            Ok(integer(count_ordered_partitions(s)))
        }
    }
}

fn check_permutations(n: usize, limits: &Limits) -> Result<()> {
    if n > limits.permutation_vertices {
        return Err(Error::budget("permutation enumeration size", n as u128, limits.permutation_vertices as u128));
    }
    Ok(())
}

/// Cycles of length `d` counted under `convention`, enumerated in canonical
/// form: the start is the smallest vertex, and for undirected cycles the
/// second vertex is smaller than the last.
fn count_cycles(g: &Graph, d: usize, convention: CycleConvention) -> u64 {
    if d == 0 || d > g.n() {
        return 0;
    }
    let mut total = 0u64;
    let mut path = Vec::with_capacity(d);
    let mut on_path = vec![false; g.n()];
    for start in 0..g.n() {
        path.push(start);
        on_path[start] = true;
        extend(g, d, convention, &mut path, &mut on_path, &mut total);
        on_path[start] = false;
        path.pop();
    }
    total
}

fn extend(g: &Graph, d: usize, conv: CycleConvention, path: &mut Vec<usize>, on_path: &mut [bool], total: &mut u64) {
    let start = path[0];
    let last = *path.last().expect("nonempty path");
    if path.len() == d {
        if d >= 2 && g.has_edge(last, start) {
            let canonical = match conv {
                CycleConvention::RootedDirected => true,
                CycleConvention::DirectedCycles => path.iter().all(|&v| v >= start),
                CycleConvention::UndirectedCycles => {
                    path.iter().all(|&v| v >= start) && (d < 3 || path[1] < path[d - 1])
                }
            };
            if canonical {
                *total += 1;
            }
        }
        return;
    }
    for &next in g.out_neighbours(last) {
        if !on_path[next] {
            on_path[next] = true;
            path.push(next);
            extend(g, d, conv, path, on_path, total);
            path.pop();
            on_path[next] = false;
        }
    }
}

fn count_homomorphisms(h: &Graph, g: &Graph) -> u64 {
    (0..h.n())
        .map(|_| 0..g.n())
        .multi_cartesian_product()
        .filter(|phi| h.arcs().all(|(a, b)| g.has_edge(phi[a], phi[b])))
        .count() as u64
}

/// Distinct images (vertex set, arc set) of injective homomorphisms.
fn count_subgraphs(h: &Graph, g: &Graph) -> u64 {
    let mut images: HashSet<(Vec<usize>, Vec<(usize, usize)>)> = HashSet::new();
    for phi in (0..g.n()).permutations(h.n()) {
        if h.arcs().all(|(a, b)| g.has_edge(phi[a], phi[b])) {
            let vertices: Vec<usize> = phi.iter().copied().sorted().collect();
            let arcs: Vec<(usize, usize)> = h.arcs().map(|(a, b)| (phi[a], phi[b])).sorted().collect();
            images.insert((vertices, arcs));
        }
    }
    images.len() as u64
}

fn permanent_by_permutations(a: &[Vec<Rational>]) -> Rational {
    (0..a.len())
        .permutations(a.len())
        .map(|sigma| sigma.iter().enumerate().map(|(i, &j)| a[i][j].clone()).product::<Rational>())
        .sum()
}

fn count_ordered_partitions(s: &SetSystem) -> u64 {
    fn rec(s: &SetSystem, depth: usize, used: &mut [bool]) -> u64 {
        if depth == s.k() {
            return u64::from(used.iter().all(|&u| u));
        }
        let mut total = 0;
        for set in s.sets() {
            if set.iter().all(|&x| !used[x]) {
                set.iter().for_each(|&x| used[x] = true);
                total += rec(s, depth + 1, used);
                set.iter().for_each(|&x| used[x] = false);
            }
        }
        total
    }
    rec(s, 0, &mut vec![false; s.ground()])
}

/// All exponent vectors of total degree `d` in `n` variables, in
/// lexicographic order.
pub fn monomials(n: usize, d: usize) -> Vec<Vec<u32>> {
    (0..n)
        .combinations_with_replacement(d)
        .map(|c| {
            let mut e = vec![0u32; n];
            c.into_iter().for_each(|i| e[i] += 1);
            e
        })
        .collect()
}

/// Matrix of `f -> f(d/dx) g` from degree-`u` forms to degree-`v` forms:
/// rows are degree-`v` monomials `beta`, columns degree-`u` monomials
/// `alpha`, and entry `g_{alpha+beta} (alpha+beta)! / beta!`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalecticantMatrix {
    pub u: usize,
    pub v: usize,
    pub rows: Vec<Vec<u32>>,
    pub cols: Vec<Vec<u32>>,
    pub entries: Vec<Vec<Rational>>,
}

impl CatalecticantMatrix {
    pub fn rank(&self) -> usize {
        rank(&self.entries)
    }
}

fn multi_factorial(e: &[u32]) -> BigInt {
    e.iter().map(|&k| factorial(k as u64)).product()
}

pub fn catalecticant(g: &SparsePolynomial, u: usize, v: usize, limits: &Limits) -> Result<CatalecticantMatrix> {
    if u + v != g.degree() {
        return Err(Error::contract(format!("u + v = {} but the form has degree {}", u + v, g.degree())));
    }
    let n = g.nvars();
    let r = numeric::u128_of(&binomial((n + v).saturating_sub(1) as u64, v as u64));
    let c = numeric::u128_of(&binomial((n + u).saturating_sub(1) as u64, u as u64));
    if r.saturating_mul(c) > limits.table_entries {
        return Err(Error::budget("catalecticant entries", r.saturating_mul(c), limits.table_entries));
    }
    let rows = monomials(n, v);
    let cols = monomials(n, u);
    let entries = rows
        .iter()
        .map(|beta| {
            cols.iter()
                .map(|alpha| {
                    let gamma: Vec<u32> = alpha.iter().zip(beta).map(|(a, b)| a + b).collect();
                    let coeff = g.coeff(&gamma);
                    if coeff.is_zero() {
                        return coeff;
                    }
                    coeff * Rational::new(multi_factorial(&gamma), multi_factorial(beta))
                })
                .collect()
        })
        .collect();
    Ok(CatalecticantMatrix { u, v, rows, cols, entries })
}

/// Scales each row to integers, for fraction-free elimination.
fn integer_rows(m: &[Vec<Rational>]) -> Vec<Vec<BigInt>> {
    m.iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            row.iter().map(|x| (x * Rational::from_integer(l.clone())).to_integer()).collect()
        })
        .collect()
}

/// Bareiss elimination in place; returns the rank and the sign-corrected
/// last pivot (the determinant when the matrix is square and full rank).
fn bareiss(mut a: Vec<Vec<BigInt>>) -> (usize, BigInt) {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut rank = 0;
    let mut sign = BigInt::one();
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        if p != rank {
            a.swap(p, rank);
            sign = -sign;
        }
        for r in rank + 1..rows {
            for c in col + 1..cols {
                let value = &a[r][c] * &a[rank][col] - &a[r][col] * &a[rank][c];
                a[r][c] = value / &prev;
            }
            a[r][col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
    }
    (rank, sign * prev)
}

/// Exact rank by fraction-free elimination.
pub fn rank(m: &[Vec<Rational>]) -> usize {
    if m.is_empty() {
        return 0;
    }
    bareiss(integer_rows(m)).0
}

/// Exact determinant of a square matrix.
pub fn determinant(m: &[Vec<Rational>]) -> Result<Rational> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(Error::domain("determinant needs a square matrix"));
    }
    if n == 0 {
        return Ok(Rational::one());
    }
    let row_scale: BigInt = m.iter().map(|row| row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))).product();
    let (r, det) = bareiss(integer_rows(m));
    if r < n {
        return Ok(Rational::zero());
    }
    Ok(Rational::new(det, row_scale))
}

/// Checks `expand(decomp) = g` and `rank Cat_g(u, v) <= |terms|` for every
/// `u + v = d`.
pub fn rank_lower_bound_check(g: &SparsePolynomial, decomp: &WaringDecomposition, limits: &Limits) -> Result<bool> {
    let expanded = decomp.expand(limits)?;
    if &expanded != g {
        return Err(Error::contract("decomposition does not expand to the given polynomial"));
    }
    let d = g.degree();
    for u in 0..=d {
        if catalecticant(g, u, d - u, limits)?.rank() > decomp.rank_bound() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Largest catalecticant rank of `g` over all splits `u + v = d`.
pub fn max_catalecticant_rank(g: &SparsePolynomial, limits: &Limits) -> Result<usize> {
    let d = g.degree();
    (0..=d).map(|u| catalecticant(g, u, d - u, limits).map(|c| c.rank())).try_fold(0, |m, r| Ok(m.max(r?)))
}

/// `sum_{|S| = d} det(V_S)^2 x^S` for the `d x n` Vandermonde matrix
/// `V_{ij} = nodes_j^i`.
pub fn hankel_support_polynomial(n: usize, d: usize, nodes: &[Rational], limits: &Limits) -> Result<SparsePolynomial> {
    if nodes.len() != n {
        return Err(Error::contract(format!("{} nodes for {n} variables", nodes.len())));
    }
    if d == 0 || d > n {
        return Err(Error::domain(format!("need 1 <= d <= n, got n={n} d={d}")));
    }
    if nodes.iter().collect::<HashSet<_>>().len() != n {
        return Err(Error::domain("nodes must be pairwise distinct"));
    }
    let count = numeric::u128_of(&binomial(n as u64, d as u64));
    if count > limits.subsets {
        return Err(Error::budget("support polynomial monomials", count, limits.subsets));
    }
    let mut terms = Vec::new();
    for s in (0..n).combinations(d) {
        let minor: Vec<Vec<Rational>> =
            (0..d).map(|i| s.iter().map(|&j| num_traits::pow(nodes[j].clone(), i)).collect()).collect();
        let det = determinant(&minor)?;
        let mut e = vec![0u32; n];
        s.iter().for_each(|&j| e[j] = 1);
        terms.push((e, &det * &det));
    }
    SparsePolynomial::from_terms(n, d, terms)
}

/// `h_d = det(x_{i+j-1})_{i,j <= d}` on `2d - 1` variables, by permutation
/// expansion.
pub fn hankel_determinant(d: usize) -> Result<SparsePolynomial> {
    if d == 0 {
        return Err(Error::domain("Hankel determinant needs d >= 1"));
    }
    let n = 2 * d - 1;
    let mut terms = Vec::new();
    for sigma in (0..d).permutations(d) {
        let inversions = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).filter(|&(i, j)| sigma[i] > sigma[j]).count();
        let mut e = vec![0u32; n];
        for (i, &j) in sigma.iter().enumerate() {
            e[i + j] += 1;
        }
        terms.push((e, if inversions % 2 == 0 { integer(1) } else { integer(-1) }));
    }
    SparsePolynomial::from_terms(n, d, terms)
}

/// `rank Cat_{h_d}(u, v) <= C(2v + u, u)` for all `u <= v`, `u + v = d`.
pub fn hankel_catalecticant_bound_check(d: usize, limits: &Limits) -> Result<bool> {
    if d > 4 {
        return Err(Error::budget("Hankel determinant degree", d as u128, 4));
    }
    let h = hankel_determinant(d)?;
    for u in 0..=d / 2 {
        let v = d - u;
        let bound = binomial((2 * v + u) as u64, u as u64);
        if BigInt::from(catalecticant(&h, u, v, limits)?.rank()) > bound {
            return Ok(false);
        }
    }
    Ok(true)
}

/// True iff every coefficient is strictly positive and the support is all
/// of the degree-`d` multilinear monomials.
pub fn is_positive_multilinear(p: &SparsePolynomial) -> bool {
    let full = numeric::u128_of(&binomial(p.nvars() as u64, p.degree() as u64));
    p.is_multilinear() && p.len() as u128 == full && p.terms().all(|(_, c)| c.is_positive())
}
