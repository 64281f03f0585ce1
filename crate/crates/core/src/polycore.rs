//! Exact arithmetic, linear forms, Waring decompositions and the apolarity
//! pairing.
//!
//! A [`WaringDecomposition`] stores `scale * sum_i weight_i * form_i^d` and
//! represents that polynomial itself; the `d!` of the differential-operator
//! identity is applied in [`apply_operator`], never stored.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{self, eval_exact, Kernel, MonomialIndexer};

pub use crate::numeric::{binomial, binomial_prefix_sum, factorial, falling_factorial};

/// Exact rational scalar, always in lowest terms with a positive denominator.
pub type Rational = BigRational;

pub fn rational(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn integer(p: impl Into<BigInt>) -> Rational {
    Rational::from_integer(p.into())
}

/// Parses `"p"`, `"p/q"` or a finite decimal such as `"0.3"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::domain(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.trim_start().starts_with('-');
        let int_part = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            BigInt::from_str(int).map_err(|_| bad())?
        };
        let denom = num_traits::pow(BigInt::from(10), frac.len());
        let frac_part = BigInt::from_str(frac).map_err(|_| bad())?;
        let magnitude = int_part.abs() * &denom + frac_part;
        let numer = if negative { -magnitude } else { magnitude };
        return Ok(Rational::new(numer, denom));
    }
    BigInt::from_str(s).map(Rational::from_integer).map_err(|_| bad())
}

/// `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Size caps for every exponential enumeration in the crate. Exceeding one
/// is reported as [`Error::Budget`], never by truncating.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Limits {
    /// Maximum `C(n+d-1, d)` for a symbolic expansion.
    pub expansion_monomials: u128,
    /// Maximum number of subsets enumerated by splitter verification and
    /// support audits.
    pub subsets: u128,
    /// Maximum `n` for sums over `{0,1}^n`.
    pub cube_dimension: usize,
    /// Maximum vertex count for permutation enumeration.
    pub permutation_vertices: usize,
    /// Maximum entries of one dynamic-programming table.
    pub table_entries: u128,
    /// Maximum number of terms a composed decomposition may have.
    pub decomposition_terms: u128,
    /// Maximum number of assignments a brute-force oracle may visit.
    pub enumeration: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            expansion_monomials: 1_000_000,
            subsets: 1_000_000,
            cube_dimension: 30,
            permutation_vertices: 10,
            table_entries: 10_000_000,
            decomposition_terms: 10_000_000,
            enumeration: 100_000_000,
        }
    }
}

impl Limits {
    /// Applies one cap to every enumeration budget.
    pub fn uniform(cap: u128) -> Self {
        Limits {
            expansion_monomials: cap,
            subsets: cap,
            cube_dimension: (u128::BITS - cap.leading_zeros()).saturating_sub(1) as usize,
            permutation_vertices: (1..=34usize)
                .take_while(|&k| numeric::u128_of(&factorial(k as u64)) <= cap)
                .last()
                .unwrap_or(1),
            table_entries: cap,
            decomposition_terms: cap,
            enumeration: cap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearForm {
    coeffs: Vec<Rational>,
}

impl LinearForm {
    pub fn new(coeffs: Vec<Rational>) -> Self {
        LinearForm { coeffs }
    }

    pub fn from_integers<I: IntoIterator<Item = i64>>(coeffs: I) -> Self {
        LinearForm { coeffs: coeffs.into_iter().map(|c| integer(c)).collect() }
    }

    pub fn nvars(&self) -> usize {
        self.coeffs.len()
    }

    /// The point `l^*` at which a black box is evaluated.
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        self.coeffs.iter().zip(point).map(|(c, x)| c * x).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaringTerm {
    pub weight: Rational,
    pub form: LinearForm,
}

/// `scale * sum_i weight_i * form_i^degree` over `nvars` variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaringDecomposition {
    nvars: usize,
    degree: usize,
    scale: Rational,
    terms: Vec<WaringTerm>,
}

impl WaringDecomposition {
    /// Builds a decomposition, dropping terms whose weight or form is zero.
    pub fn new<I>(nvars: usize, degree: usize, scale: Rational, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Rational, LinearForm)>,
    {
        if nvars == 0 || degree == 0 {
            return Err(Error::contract("a decomposition needs nvars >= 1 and degree >= 1"));
        }
        let mut kept = Vec::new();
        for (weight, form) in terms {
            if form.nvars() != nvars {
                return Err(Error::contract(format!(
                    "linear form has {} coefficients, decomposition has {nvars} variables",
                    form.nvars()
                )));
            }
            if weight.is_zero() || form.is_zero() {
                continue;
            }
            kept.push(WaringTerm { weight, form });
        }
        Ok(WaringDecomposition { nvars, degree, scale, terms: kept })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn scale(&self) -> &Rational {
        &self.scale
    }

    pub fn terms(&self) -> &[WaringTerm] {
        &self.terms
    }

    /// Number of powers in the decomposition, an upper bound on Waring rank.
    pub fn rank_bound(&self) -> usize {
        self.terms.len()
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        WaringDecomposition { scale: &self.scale * factor, ..self.clone() }
    }

    /// Folds the global scale into the term weights.
    pub fn normalized(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| WaringTerm { weight: &t.weight * &self.scale, form: t.form.clone() })
            .filter(|t| !t.weight.is_zero())
            .collect();
        WaringDecomposition { nvars: self.nvars, degree: self.degree, scale: One::one(), terms }
    }

    /// Replaces every old variable `x_o` by `sum of x_m over m with o in
    /// sources[m]`; the result lives on `sources.len()` variables.
    pub fn substitute(&self, sources: &[Vec<usize>]) -> Result<Self> {
        if let Some(bad) = sources.iter().flatten().find(|&&o| o >= self.nvars) {
            return Err(Error::contract(format!(
                "substitution references variable {bad}, decomposition has {}",
                self.nvars
            )));
        }
        let terms = self.terms.iter().map(|t| {
            let coeffs = sources
                .iter()
                .map(|srcs| srcs.iter().map(|&o| &t.form.coeffs[o]).sum())
                .collect();
            (t.weight.clone(), LinearForm::new(coeffs))
        });
        WaringDecomposition::new(sources.len(), self.degree, self.scale.clone(), terms)
    }

    /// Differentiates once with respect to each listed variable and deletes
    /// those variables from every form.
    ///
    /// Only meaningful when the differentiated polynomial no longer depends
    /// on the deleted variables, e.g. for multilinear polynomials where the
    /// variables act as padding that is always present.
    pub fn differentiate_out(&self, vars: &[usize]) -> Result<Self> {
        let p = vars.len();
        if p >= self.degree {
            return Err(Error::contract("cannot differentiate away the whole degree"));
        }
        let mut seen = vec![false; self.nvars];
        for &v in vars {
            if v >= self.nvars || std::mem::replace(&mut seen[v], true) {
                return Err(Error::contract(format!("bad or repeated padding variable {v}")));
            }
        }
        let falling = integer(falling_factorial(self.degree as u64, p as u64));
        let terms = self.terms.iter().map(|t| {
            let factor: Rational = vars.iter().map(|&v| t.form.coeffs[v].clone()).product();
            let coeffs = (0..self.nvars)
                .filter(|&i| !seen[i])
                .map(|i| t.form.coeffs[i].clone())
                .collect();
            (&t.weight * factor * &falling, LinearForm::new(coeffs))
        });
        WaringDecomposition::new(self.nvars - p, self.degree - p, self.scale.clone(), terms)
    }

    /// Expands `scale * sum weight_i * form_i^d` into an explicit coefficient
    /// table.
    pub fn expand(&self, limits: &Limits) -> Result<SparsePolynomial> {
        let (n, d) = (self.nvars, self.degree);
        let size = numeric::u128_of(&binomial((n + d - 1) as u64, d as u64));
        if size > limits.expansion_monomials {
            return Err(Error::budget("symbolic expansion", size, limits.expansion_monomials));
        }
        let indexer = MonomialIndexer::new(n, d);

        // Clear denominators: weight * form^d = (weight / D^d) * (D form)^d
        // with D the lcm of the form's denominators, then put every
        // multiplier over one common denominator so accumulation stays
        // integral.
        let mut prepared = Vec::with_capacity(self.terms.len());
        let mut common = BigInt::one();
        for t in &self.terms {
            let denom = t.form.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
            let int_coeffs: Vec<(usize, BigInt)> = t
                .form
                .coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (i, (c * Rational::from_integer(denom.clone())).to_integer()))
                .collect();
            let multiplier = &t.weight / Rational::from_integer(num_traits::pow(denom, d));
            common = common.lcm(multiplier.denom());
            prepared.push((multiplier, int_coeffs));
        }

        let mut acc: Vec<Accumulator> = vec![Accumulator::Small(0); size as usize];
        let mut exps_of: Vec<Option<Box<[u32]>>> = vec![None; size as usize];
        let mut exps = vec![0u32; n];
        for (multiplier, coeffs) in &prepared {
            let m = (multiplier * Rational::from_integer(common.clone())).to_integer();
            let fits = coeffs_fit_small(coeffs, d) && i128::try_from(&m).is_ok();
            if fits {
                let small: Vec<(usize, i128)> =
                    coeffs.iter().map(|(i, c)| (*i, i128::try_from(c).unwrap())).collect();
                let m = i128::try_from(&m).unwrap();
                if expand_power(&small, d, m, &mut exps, &indexer, &mut acc, &mut exps_of) {
                    continue;
                }
            }
            expand_power(coeffs, d, m, &mut exps, &indexer, &mut acc, &mut exps_of);
        }

        let factor = &self.scale / Rational::from_integer(common);
        let mut table = BTreeMap::new();
        for (a, e) in acc.into_iter().zip(exps_of) {
            let value = a.into_bigint();
            if value.is_zero() {
                continue;
            }
            let e = e.expect("touched monomials record their exponents");
            table.insert(e.into_vec(), Rational::from_integer(value) * &factor);
        }
        Ok(SparsePolynomial { nvars: n, degree: d, coeffs: table })
    }

    /// Concatenates term lists; scales are folded into the weights.
    pub fn concat(gs: &[WaringDecomposition]) -> Result<Self> {
        let first = gs.first().ok_or_else(|| Error::contract("concat of an empty list"))?;
        let (n, d) = (first.nvars, first.degree);
        if gs.iter().any(|g| g.nvars != n || g.degree != d) {
            return Err(Error::contract("concat needs equal nvars and degree"));
        }
        let terms = gs
            .iter()
            .flat_map(|g| g.terms.iter().map(move |t| (&t.weight * &g.scale, t.form.clone())));
        WaringDecomposition::new(n, d, One::one(), terms)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&DecompositionDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DecompositionDoc = serde_json::from_str(text)?;
        doc.try_into()
    }
}

fn coeffs_fit_small(coeffs: &[(usize, BigInt)], d: usize) -> bool {
    // |c|^d * d! must stay well inside i128 for every monomial coefficient
    let max_bits = coeffs.iter().map(|(_, c)| c.bits()).max().unwrap_or(0);
    let fact_bits = factorial(d as u64).bits();
    max_bits * d as u64 + fact_bits < 100
}

#[derive(Clone, Debug)]
enum Accumulator {
    Small(i128),
    Big(BigInt),
}

impl Accumulator {
    fn add<T: numeric::Scalar + Into<BigInt>>(&mut self, v: T) {
        let v: BigInt = v.into();
        match self {
            Accumulator::Small(s) => {
                if let Ok(small) = i128::try_from(&v) {
                    if let Some(sum) = s.checked_add(small) {
                        *s = sum;
                        return;
                    }
                }
                *self = Accumulator::Big(BigInt::from(*s) + v);
            }
            Accumulator::Big(b) => *b += v,
        }
    }

    fn into_bigint(self) -> BigInt {
        match self {
            Accumulator::Small(s) => BigInt::from(s),
            Accumulator::Big(b) => b,
        }
    }
}

/// Adds `m * (sum_i c_i x_i)^d` into the accumulators. Returns false if the
/// scalar type overflowed, in which case nothing was added.
fn expand_power<T: numeric::Scalar + Into<BigInt>>(
    coeffs: &[(usize, T)],
    d: usize,
    m: T,
    exps: &mut [u32],
    indexer: &MonomialIndexer,
    acc: &mut [Accumulator],
    exps_of: &mut [Option<Box<[u32]>>],
) -> bool {
    // Collect first so an overflow midway leaves the accumulators untouched.
    let mut out: Vec<(usize, T)> = Vec::new();
    let binoms: Vec<Vec<T>> = (0..=d)
        .map(|r| (0..=r).map(|k| <T as numeric::Scalar>::from_rational(&integer(binomial(r as u64, k as u64))).unwrap()).collect())
        .collect();
    fn rec<T: numeric::Scalar>(
        coeffs: &[(usize, T)],
        pos: usize,
        remaining: usize,
        value: T,
        binoms: &[Vec<T>],
        exps: &mut [u32],
        indexer: &MonomialIndexer,
        out: &mut Vec<(usize, T)>,
    ) -> Option<()> {
        if remaining == 0 {
            out.push((indexer.rank(exps), value));
            return Some(());
        }
        if pos == coeffs.len() {
            return Some(());
        }
        let (var, ref c) = coeffs[pos];
        let last = pos + 1 == coeffs.len();
        let lo = if last { remaining } else { 0 };
        let mut power = numeric::pow(c, lo)?;
        for k in lo..=remaining {
            if k > lo {
                power = power.mul(c)?;
            }
            let v = value.mul(&binoms[remaining][k])?.mul(&power)?;
            exps[var] = k as u32;
            rec(coeffs, pos + 1, remaining - k, v, binoms, exps, indexer, out)?;
        }
        exps[var] = 0;
        Some(())
    }
    let ok = rec(coeffs, 0, d, m, &binoms, exps, indexer, &mut out).is_some();
    exps.iter_mut().for_each(|e| *e = 0);
    if !ok {
        return false;
    }
    if out.is_empty() {
        return true;
    }
    // Re-derive exponent vectors lazily for newly touched slots.
    let mut need: Vec<usize> = out.iter().map(|(r, _)| *r).filter(|&r| exps_of[r].is_none()).collect();
    if !need.is_empty() {
        need.sort_unstable();
        record_exponents(coeffs.iter().map(|(v, _)| *v).collect::<Vec<_>>().as_slice(), d, exps, indexer, exps_of);
    }
    for (r, v) in out {
        acc[r].add(v);
    }
    true
}

fn record_exponents(
    support: &[usize],
    d: usize,
    exps: &mut [u32],
    indexer: &MonomialIndexer,
    exps_of: &mut [Option<Box<[u32]>>],
) {
    fn rec(
        support: &[usize],
        pos: usize,
        remaining: usize,
        exps: &mut [u32],
        indexer: &MonomialIndexer,
        exps_of: &mut [Option<Box<[u32]>>],
    ) {
        if remaining == 0 {
            let r = indexer.rank(exps);
            if exps_of[r].is_none() {
                exps_of[r] = Some(exps.to_vec().into_boxed_slice());
            }
            return;
        }
        if pos == support.len() {
            return;
        }
        let var = support[pos];
        let lo = if pos + 1 == support.len() { remaining } else { 0 };
        for k in lo..=remaining {
            exps[var] = k as u32;
            rec(support, pos + 1, remaining - k, exps, indexer, exps_of);
        }
        exps[var] = 0;
    }
    rec(support, 0, d, exps, indexer, exps_of);
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    weight: String,
    coeffs: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct DecompositionDoc {
    nvars: usize,
    degree: usize,
    scale: String,
    terms: Vec<TermDoc>,
}

impl From<&WaringDecomposition> for DecompositionDoc {
    fn from(g: &WaringDecomposition) -> Self {
        DecompositionDoc {
            nvars: g.nvars,
            degree: g.degree,
            scale: format_rational(&g.scale),
            terms: g
                .terms
                .iter()
                .map(|t| TermDoc {
                    weight: format_rational(&t.weight),
                    coeffs: t.form.coeffs.iter().map(format_rational).collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<DecompositionDoc> for WaringDecomposition {
    type Error = Error;

    fn try_from(doc: DecompositionDoc) -> Result<Self> {
        let terms = doc
            .terms
            .iter()
            .map(|t| {
                let coeffs = t.coeffs.iter().map(|c| parse_rational(c)).collect::<Result<Vec<_>>>()?;
                Ok((parse_rational(&t.weight)?, LinearForm::new(coeffs)))
            })
            .collect::<Result<Vec<_>>>()?;
        WaringDecomposition::new(doc.nvars, doc.degree, parse_rational(&doc.scale)?, terms)
    }
}

/// Explicit homogeneous polynomial: exponent vector to nonzero coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePolynomial {
    nvars: usize,
    degree: usize,
    coeffs: BTreeMap<Vec<u32>, Rational>,
}

impl SparsePolynomial {
    pub fn zero(nvars: usize, degree: usize) -> Self {
        SparsePolynomial { nvars, degree, coeffs: BTreeMap::new() }
    }

    /// Sums duplicate exponent vectors and drops zero coefficients.
    pub fn from_terms<I>(nvars: usize, degree: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut p = SparsePolynomial::zero(nvars, degree);
        for (exps, c) in terms {
            p.add_term(exps, c)?;
        }
        Ok(p)
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: Rational) -> Result<()> {
        if exps.len() != self.nvars {
            return Err(Error::contract(format!(
                "exponent vector of length {} in a {}-variable polynomial",
                exps.len(),
                self.nvars
            )));
        }
        let total: u32 = exps.iter().sum();
        if total as usize != self.degree {
            return Err(Error::contract(format!(
                "monomial of degree {total} in a degree-{} form",
                self.degree
            )));
        }
        let entry = self.coeffs.entry(exps).or_insert_with(Zero::zero);
        *entry += c;
        if entry.is_zero() {
            // re-borrow to remove the key we just zeroed
            let key = self
                .coeffs
                .iter()
                .find(|(_, v)| v.is_zero())
                .map(|(k, _)| k.clone())
                .expect("zero entry exists");
            self.coeffs.remove(&key);
        }
        Ok(())
    }

    /// `e_{n,d}`: every degree-`d` multilinear monomial with coefficient 1.
    pub fn elementary(n: usize, d: usize) -> Self {
        use itertools::Itertools;
        let mut p = SparsePolynomial::zero(n, d);
        for subset in (0..n).combinations(d) {
            let mut e = vec![0u32; n];
            subset.into_iter().for_each(|i| e[i] = 1);
            p.coeffs.insert(e, One::one());
        }
        p
    }

    pub fn monomial(exps: Vec<u32>, c: Rational) -> Self {
        let degree = exps.iter().sum::<u32>() as usize;
        let mut p = SparsePolynomial::zero(exps.len(), degree);
        if !c.is_zero() {
            p.coeffs.insert(exps, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, exps: &[u32]) -> Rational {
        self.coeffs.get(exps).cloned().unwrap_or_else(Zero::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &Rational)> {
        self.coeffs.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn is_multilinear(&self) -> bool {
        self.coeffs.keys().all(|e| e.iter().all(|&x| x <= 1))
    }

    /// Sum of the coefficients of the multilinear monomials.
    pub fn multilinear_sum(&self) -> Rational {
        self.terms().filter(|(e, _)| e.iter().all(|&x| x <= 1)).map(|(_, c)| c.clone()).sum()
    }

    pub fn add(&self, other: &SparsePolynomial) -> Result<SparsePolynomial> {
        if self.nvars != other.nvars || self.degree != other.degree {
            return Err(Error::contract("adding polynomials of different shapes"));
        }
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.add_term(e.to_vec(), c.clone())?;
        }
        Ok(out)
    }

    pub fn scale(&self, factor: &Rational) -> SparsePolynomial {
        if factor.is_zero() {
            return SparsePolynomial::zero(self.nvars, self.degree);
        }
        let coeffs = self.coeffs.iter().map(|(e, c)| (e.clone(), c * factor)).collect();
        SparsePolynomial { nvars: self.nvars, degree: self.degree, coeffs }
    }

    pub fn mul(&self, other: &SparsePolynomial) -> Result<SparsePolynomial> {
        if self.nvars != other.nvars {
            return Err(Error::contract("multiplying polynomials in different rings"));
        }
        let mut out = SparsePolynomial::zero(self.nvars, self.degree + other.degree);
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                let e = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb)?;
            }
        }
        Ok(out)
    }

    /// `g(T x)`: substitutes `x_i -> sum_j matrix[i][j] y_j`.
    pub fn linear_substitute(&self, matrix: &[Vec<Rational>]) -> Result<SparsePolynomial> {
        if matrix.len() != self.nvars {
            return Err(Error::contract("substitution matrix needs one row per variable"));
        }
        let m = matrix.first().map_or(0, Vec::len);
        if matrix.iter().any(|row| row.len() != m) {
            return Err(Error::contract("ragged substitution matrix"));
        }
        let images: Vec<SparsePolynomial> = matrix
            .iter()
            .map(|row| {
                SparsePolynomial::from_terms(
                    m,
                    1,
                    row.iter().enumerate().map(|(j, c)| {
                        let mut e = vec![0u32; m];
                        e[j] = 1;
                        (e, c.clone())
                    }),
                )
            })
            .collect::<Result<_>>()?;
        let mut out = SparsePolynomial::zero(m, self.degree);
        for (e, c) in self.terms() {
            let mut term = SparsePolynomial::monomial(vec![0; m], c.clone());
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    term = term.mul(&images[i])?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        eval_exact(self, point)
    }
}

impl Kernel for SparsePolynomial {
    fn run<T: numeric::Scalar>(&self, point: &[T]) -> Option<T> {
        let mut total = T::zero();
        for (e, c) in &self.coeffs {
            let mut term = <T as numeric::Scalar>::from_rational(c)?;
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    term = term.mul(&numeric::pow(x, k as usize)?)?;
                }
            }
            total = total.add(&term)?;
        }
        Some(total)
    }
}

impl fmt::Display for SparsePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", format_rational(c))?;
            for (v, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*x{}", v + 1)?,
                    _ => write!(f, "*x{}^{}", v + 1, k)?,
                }
            }
        }
        Ok(())
    }
}

/// A homogeneous polynomial available only through point evaluations.
///
/// `eval` must be deterministic and side-effect free; it may be called
/// concurrently.
pub trait BlackBoxPolynomial: Send + Sync {
    fn nvars(&self) -> usize;
    fn degree(&self) -> usize;
    fn eval(&self, point: &[Rational]) -> Rational;
}

impl<T: BlackBoxPolynomial + ?Sized> BlackBoxPolynomial for &T {
    fn nvars(&self) -> usize {
        (**self).nvars()
    }
    fn degree(&self) -> usize {
        (**self).degree()
    }
    fn eval(&self, point: &[Rational]) -> Rational {
        (**self).eval(point)
    }
}

impl<T: BlackBoxPolynomial + ?Sized> BlackBoxPolynomial for Box<T> {
    fn nvars(&self) -> usize {
        (**self).nvars()
    }
    fn degree(&self) -> usize {
        (**self).degree()
    }
    fn eval(&self, point: &[Rational]) -> Rational {
        (**self).eval(point)
    }
}

/// Black box built from a closure.
pub struct FnBlackBox<F> {
    nvars: usize,
    degree: usize,
    f: F,
}

impl<F> FnBlackBox<F>
where
    F: Fn(&[Rational]) -> Rational + Send + Sync,
{
    pub fn new(nvars: usize, degree: usize, f: F) -> Self {
        FnBlackBox { nvars, degree, f }
    }
}

impl<F> BlackBoxPolynomial for FnBlackBox<F>
where
    F: Fn(&[Rational]) -> Rational + Send + Sync,
{
    fn nvars(&self) -> usize {
        self.nvars
    }
    fn degree(&self) -> usize {
        self.degree
    }
    fn eval(&self, point: &[Rational]) -> Rational {
        (self.f)(point)
    }
}

/// Wraps a black box and counts its evaluations.
pub struct CountingBlackBox<F> {
    inner: F,
    calls: AtomicU64,
}

impl<F: BlackBoxPolynomial> CountingBlackBox<F> {
    pub fn new(inner: F) -> Self {
        CountingBlackBox { inner, calls: AtomicU64::new(0) }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }
}

impl<F: BlackBoxPolynomial> BlackBoxPolynomial for CountingBlackBox<F> {
    fn nvars(&self) -> usize {
        self.inner.nvars()
    }
    fn degree(&self) -> usize {
        self.inner.degree()
    }
    fn eval(&self, point: &[Rational]) -> Rational {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.eval(point)
    }
}

/// Telemetry from one operator application.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalStats {
    pub evaluations: u64,
    /// Largest bit length of a numerator or denominator returned by the box.
    pub max_value_bits: u64,
}

fn check_shapes<F: BlackBoxPolynomial + ?Sized>(g: &WaringDecomposition, f: &F) -> Result<()> {
    if g.nvars != f.nvars() || g.degree != f.degree() {
        return Err(Error::contract(format!(
            "decomposition is ({} vars, degree {}), black box is ({} vars, degree {})",
            g.nvars,
            g.degree,
            f.nvars(),
            f.degree()
        )));
    }
    Ok(())
}

/// `g(d/dx) f = scale * d! * sum_i weight_i * f(form_i^*)`, one evaluation of
/// `f` per term.
pub fn apply_operator<F: BlackBoxPolynomial + ?Sized>(g: &WaringDecomposition, f: &F) -> Result<Rational> {
    apply_operator_traced(g, f).map(|(v, _)| v)
}

pub fn apply_operator_traced<F: BlackBoxPolynomial + ?Sized>(
    g: &WaringDecomposition,
    f: &F,
) -> Result<(Rational, EvalStats)> {
    check_shapes(g, f)?;
    let (sum, bits) = g
        .terms
        .par_iter()
        .map(|t| {
            let v = f.eval(&t.form.coeffs);
            let bits = v.numer().bits().max(v.denom().bits());
            (&t.weight * v, bits)
        })
        .reduce(|| (Rational::zero(), 0), |(a, ba), (b, bb)| (a + b, ba.max(bb)));
    let value = sum * &g.scale * integer(factorial(g.degree as u64));
    let stats = EvalStats { evaluations: g.terms.len() as u64, max_value_bits: bits };
    Ok((value, stats))
}

/// The apolarity pairing `sum_alpha g_alpha f_alpha alpha!`, symmetric in its
/// arguments.
pub fn operator_on_sparse(g: &SparsePolynomial, f: &SparsePolynomial) -> Result<Rational> {
    if g.nvars != f.nvars || g.degree != f.degree {
        return Err(Error::contract("pairing polynomials of different shapes"));
    }
    let (small, large) = if g.len() <= f.len() { (g, f) } else { (f, g) };
    Ok(small
        .terms()
        .filter_map(|(e, c)| large.coeffs.get(e).map(|c2| (e, c * c2)))
        .map(|(e, c)| {
            let fact: BigInt = e.iter().map(|&k| factorial(k as u64)).product();
            c * integer(fact)
        })
        .sum())
}

/// Checks `f(lambda v) = lambda^d f(v)` on `trials` seeded random rational
/// pairs.
pub fn homogeneity_probe<F: BlackBoxPolynomial + ?Sized>(f: &F, trials: usize, seed: u64) -> bool {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha20Rng| {
        let p: i64 = rng.gen_range(-9..=9);
        let q: i64 = rng.gen_range(1..=4);
        rational(p, q)
    };
    (0..trials).all(|_| {
        let mut lambda = draw(&mut rng);
        while lambda.is_zero() {
            lambda = draw(&mut rng);
        }
        let v: Vec<Rational> = (0..f.nvars()).map(|_| draw(&mut rng)).collect();
        let scaled: Vec<Rational> = v.iter().map(|x| x * &lambda).collect();
        f.eval(&scaled) == num_traits::pow(lambda, f.degree()) * f.eval(&v)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(n: usize, d: usize, terms: &[(&[u32], i64)]) -> SparsePolynomial {
        SparsePolynomial::from_terms(n, d, terms.iter().map(|(e, c)| (e.to_vec(), integer(*c)))).unwrap()
    }

    fn sparse_box(f: SparsePolynomial) -> FnBlackBox<impl Fn(&[Rational]) -> Rational + Send + Sync> {
        let (n, d) = (f.nvars(), f.degree());
        FnBlackBox::new(n, d, move |v: &[Rational]| f.eval(v))
    }

    fn xy_by_squares() -> WaringDecomposition {
        // x1 x2 = ((x1+x2)^2 - (x1-x2)^2) / 4
        WaringDecomposition::new(
            2,
            2,
            rational(1, 4),
            [
                (integer(1), LinearForm::from_integers([1, 1])),
                (integer(-1), LinearForm::from_integers([1, -1])),
            ],
        )
        .unwrap()
    }

    #[test]
    fn rational_round_trip() {
        assert_eq!(parse_rational("3/6").unwrap(), rational(1, 2));
        assert_eq!(parse_rational("-7").unwrap(), integer(-7));
        assert_eq!(parse_rational("0.3").unwrap(), rational(3, 10));
        assert_eq!(parse_rational("-1.25").unwrap(), rational(-5, 4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert_eq!(format_rational(&rational(101, 4)), "101/4");
        assert_eq!(format_rational(&integer(-3)), "-3");
    }

    #[test]
    fn expand_binomial_square() {
        let g = WaringDecomposition::new(2, 2, integer(1), [(integer(1), LinearForm::from_integers([1, 1]))])
            .unwrap();
        let e = g.expand(&Limits::default()).unwrap();
        assert_eq!(e, poly(2, 2, &[(&[2, 0], 1), (&[1, 1], 2), (&[0, 2], 1)]));
    }

    #[test]
    fn expand_handles_fractional_forms_and_large_values() {
        let g = WaringDecomposition::new(
            2,
            3,
            integer(1),
            [(rational(2, 3), LinearForm::new(vec![rational(1, 2), integer(BigInt::from(1u64) << 40usize)]))],
        )
        .unwrap();
        let e = g.expand(&Limits::default()).unwrap();
        let big = BigInt::from(1u64) << 40usize;
        // (2/3)(x/2 + 2^40 y)^3
        assert_eq!(e.coeff(&[3, 0]), rational(2, 3) * rational(1, 8));
        assert_eq!(e.coeff(&[0, 3]), rational(2, 3) * integer(big.pow(3)));
        assert_eq!(e.coeff(&[1, 2]), rational(2, 3) * integer(3) * rational(1, 2) * integer(big.pow(2)));
    }

    #[test]
    fn expand_respects_budget() {
        let g = WaringDecomposition::new(50, 5, integer(1), [(integer(1), LinearForm::new(vec![integer(1); 50]))])
            .unwrap();
        let limits = Limits { expansion_monomials: 1000, ..Limits::default() };
        assert!(matches!(g.expand(&limits), Err(Error::Budget { .. })));
    }

    #[test]
    fn zero_terms_are_dropped() {
        let g = WaringDecomposition::new(
            2,
            2,
            integer(1),
            [
                (integer(0), LinearForm::from_integers([1, 1])),
                (integer(3), LinearForm::from_integers([0, 0])),
                (integer(1), LinearForm::from_integers([1, 0])),
            ],
        )
        .unwrap();
        assert_eq!(g.rank_bound(), 1);
    }

    #[test]
    fn mismatched_form_length_is_rejected() {
        let r = WaringDecomposition::new(3, 2, integer(1), [(integer(1), LinearForm::from_integers([1, 1]))]);
        assert!(matches!(r, Err(Error::Contract(_))));
    }

    #[test]
    fn apply_operator_differentiates() {
        let f = sparse_box(poly(2, 2, &[(&[1, 1], 1)]));
        // g represents x1 x2, and d1 d2 (x1 x2) = 1
        assert_eq!(apply_operator(&xy_by_squares(), &f).unwrap(), integer(1));
        let f2 = sparse_box(poly(2, 2, &[(&[2, 0], 1)]));
        assert_eq!(apply_operator(&xy_by_squares(), &f2).unwrap(), integer(0));
    }

    #[test]
    fn apply_operator_checks_shapes() {
        let f = sparse_box(poly(3, 2, &[(&[1, 1, 0], 1)]));
        assert!(matches!(apply_operator(&xy_by_squares(), &f), Err(Error::Contract(_))));
        let f = sparse_box(poly(2, 3, &[(&[2, 1], 1)]));
        assert!(matches!(apply_operator(&xy_by_squares(), &f), Err(Error::Contract(_))));
    }

    #[test]
    fn apply_operator_queries_once_per_term() {
        let f = CountingBlackBox::new(sparse_box(poly(2, 2, &[(&[1, 1], 5)])));
        let g = xy_by_squares();
        apply_operator(&g, &f).unwrap();
        assert_eq!(f.calls(), g.rank_bound() as u64);
    }

    #[test]
    fn pairing_examples() {
        let xy = poly(2, 2, &[(&[1, 1], 1)]);
        assert_eq!(operator_on_sparse(&xy, &xy).unwrap(), integer(1));
        let xx = poly(2, 2, &[(&[2, 0], 1)]);
        assert_eq!(operator_on_sparse(&xx, &xx).unwrap(), integer(2));
        // e_{3,2} paired with x1x2 + 5 x1x3
        let e32 = SparsePolynomial::elementary(3, 2);
        let f = poly(3, 2, &[(&[1, 1, 0], 1), (&[1, 0, 1], 5)]);
        assert_eq!(operator_on_sparse(&e32, &f).unwrap(), integer(6));
        assert!(operator_on_sparse(&e32, &xy).is_err());
    }

    #[test]
    fn concat_sums_expansions() {
        let x1 = WaringDecomposition::new(2, 2, integer(1), [(integer(1), LinearForm::from_integers([1, 0]))])
            .unwrap();
        let x2 = WaringDecomposition::new(2, 2, integer(2), [(integer(1), LinearForm::from_integers([0, 1]))])
            .unwrap();
        let c = WaringDecomposition::concat(&[x1.clone(), x2]).unwrap();
        assert_eq!(c.rank_bound(), 2);
        let lim = Limits::default();
        assert_eq!(c.expand(&lim).unwrap(), poly(2, 2, &[(&[2, 0], 1), (&[0, 2], 2)]));
        let single = WaringDecomposition::concat(std::slice::from_ref(&xy_by_squares())).unwrap();
        assert_eq!(single.expand(&lim).unwrap(), xy_by_squares().expand(&lim).unwrap());
        assert!(WaringDecomposition::concat(&[]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = xy_by_squares();
        let text = g.to_json().unwrap();
        assert!(text.contains("\"scale\":\"1/4\""));
        assert_eq!(WaringDecomposition::from_json(&text).unwrap(), g);
    }

    #[test]
    fn substitute_and_differentiate() {
        // (x0 + x1)^2 with x0 -> y0 + y1, x1 -> y2
        let g = WaringDecomposition::new(2, 2, integer(1), [(integer(1), LinearForm::from_integers([1, 1]))])
            .unwrap();
        let s = g.substitute(&[vec![0], vec![0], vec![1]]).unwrap();
        assert_eq!(s.terms()[0].form, LinearForm::from_integers([1, 1, 1]));
        // d/dy2 of x0 x1 padded: expand stays consistent
        let xy = xy_by_squares();
        let dx = xy.differentiate_out(&[1]).unwrap();
        assert_eq!(dx.nvars(), 1);
        assert_eq!(dx.expand(&Limits::default()).unwrap(), poly(1, 1, &[(&[1], 1)]));
    }

    #[test]
    fn sparse_polynomial_basics() {
        let p = poly(2, 2, &[(&[1, 1], 1), (&[1, 1], -1)]);
        assert!(p.is_empty());
        assert!(SparsePolynomial::from_terms(2, 2, [(vec![1, 0], integer(1))]).is_err());
        let e = SparsePolynomial::elementary(3, 2);
        assert_eq!(e.eval(&[integer(1), integer(1), integer(1)]), integer(3));
        assert_eq!(e.multilinear_sum(), integer(3));
        let xy = poly(2, 2, &[(&[1, 1], 1)]);
        assert_eq!(xy.eval(&[integer(2), integer(3)]), integer(6));
        assert_eq!(SparsePolynomial::zero(2, 2).eval(&[integer(2), integer(3)]), integer(0));
    }

    #[test]
    fn homogeneity_probe_accepts_forms_and_rejects_inhomogeneous() {
        let f = sparse_box(poly(3, 3, &[(&[1, 1, 1], 2), (&[3, 0, 0], -1)]));
        assert!(homogeneity_probe(&f, 20, 7));
        let bad = FnBlackBox::new(1, 2, |v: &[Rational]| &v[0] * &v[0] + &v[0]);
        assert!(!homogeneity_probe(&bad, 20, 7));
    }
}
