//! Explicit Waring decompositions supported on multilinear monomials, and
//! the composers that build larger ones from smaller ones.

use std::collections::HashMap;
use std::fmt;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::gf2m::Gf2m;
use crate::numeric::binomial_signed;
use crate::polycore::{
    binomial, factorial, integer, LinearForm, Limits, Rational, WaringDecomposition,
};
use crate::splitters::{mean_injective_count, FunctionFamily, RangeShape};

/// Which construction produced a decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecompositionKind {
    Ryser,
    LeeOdd,
    LeeEven,
    Monomial,
    ColorCoding,
    SplitterComposed,
    DirectPowerSum,
    Char2Permanent,
}

impl fmt::Display for DecompositionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            DecompositionKind::Ryser => "ryser",
            DecompositionKind::LeeOdd => "lee_odd",
            DecompositionKind::LeeEven => "lee_even",
            DecompositionKind::Monomial => "monomial",
            DecompositionKind::ColorCoding => "colorcoding",
            DecompositionKind::SplitterComposed => "splitter_composed",
            DecompositionKind::DirectPowerSum => "direct_power_sum",
            DecompositionKind::Char2Permanent => "char2_permanent",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionSpec {
    pub kind: DecompositionKind,
    pub n: usize,
    pub d: usize,
}

impl DecompositionSpec {
    /// Builds the decompositions of `e_{n,d}` that need no extra input.
    pub fn build(&self) -> Result<WaringDecomposition> {
        match self.kind {
            DecompositionKind::Ryser => ryser_elementary(self.n, self.d),
            DecompositionKind::LeeOdd | DecompositionKind::LeeEven => {
                if (self.d % 2 == 1) != (self.kind == DecompositionKind::LeeOdd) {
                    return Err(Error::domain(format!("{} does not match the parity of d = {}", self.kind, self.d)));
                }
                lee_elementary(self.n, self.d)
            }
            DecompositionKind::Monomial if self.n == self.d => monomial_product_decomposition(&vec![1; self.n]),
            kind => Err(Error::domain(format!("{kind} needs inputs beyond (n, d)"))),
        }
    }
}

fn check_elementary(n: usize, d: usize) -> Result<()> {
    if d == 0 || d > n {
        return Err(Error::domain(format!("elementary symmetric e_(n,d) needs 1 <= d <= n, got n={n} d={d}")));
    }
    Ok(())
}

fn indicator_form(n: usize, support: &[usize], on: i64, off: i64) -> LinearForm {
    let mut c = vec![off; n];
    support.iter().for_each(|&i| c[i] = on);
    LinearForm::from_integers(c)
}

/// Inclusion-exclusion over `alpha` in `{0,1}^n`, `|alpha| <= d`.
pub fn ryser_elementary(n: usize, d: usize) -> Result<WaringDecomposition> {
    check_elementary(n, d)?;
    let inv = Rational::new(One::one(), factorial(d as u64));
    let terms = (1..=d).flat_map(|size| {
        let w = integer(binomial((n - size) as u64, (d - size) as u64)) * &inv;
        let w = if (size + d) % 2 == 1 { -w } else { w };
        (0..n).combinations(size).map(move |s| (w.clone(), indicator_form(n, &s, 1, 0)))
    });
    WaringDecomposition::new(n, d, One::one(), terms)
}

/// Decomposition of `e_{n,d}` into `sum_{i <= d/2} C(n,i)` powers of `±1`
/// forms. Even `d` needs `n > d`.
pub fn lee_elementary(n: usize, d: usize) -> Result<WaringDecomposition> {
    check_elementary(n, d)?;
    let h = d / 2;
    let even = d % 2 == 0;
    if even && n == d {
        return Err(Error::domain(format!(
            "the even-degree construction needs n > d (got n = d = {d}); use ryser_elementary or pad variables"
        )));
    }
    let mut scale = Rational::new(One::one(), num_traits::pow(BigInt::from(2), d - 1) * factorial(d as u64));
    if even {
        scale /= integer(2 * (n - d));
    }
    let terms = (0..=h).flat_map(|s| {
        let mut w = binomial_signed((n - h - s - 1) as i64, (h - s) as i64);
        if even {
            w *= n as i64 - 2 * s as i64;
        }
        if s % 2 == 1 {
            w = -w;
        }
        let w = integer(w);
        (0..n).combinations(s).map(move |set| (w.clone(), indicator_form(n, &set, -1, 1)))
    });
    WaringDecomposition::new(n, d, scale, terms)
}

/// Number of terms [`lee_elementary`] produces.
pub fn lee_term_count(n: usize, d: usize) -> BigInt {
    crate::polycore::binomial_prefix_sum(n as u64, (d / 2) as u64)
}

/// Merges terms whose forms are proportional: `(λ l)^D = λ^D l^D`.
fn merge_proportional(nvars: usize, degree: usize, scale: Rational, terms: Vec<(Rational, Vec<Rational>)>) -> Result<WaringDecomposition> {
    let mut index: HashMap<Vec<Rational>, usize> = HashMap::new();
    let mut merged: Vec<(Rational, Vec<Rational>)> = Vec::new();
    for (w, coeffs) in terms {
        let Some(lead) = coeffs.iter().find(|c| !c.is_zero()).cloned() else {
            continue;
        };
        let canon: Vec<Rational> = coeffs.iter().map(|c| c / &lead).collect();
        let w = w * num_traits::pow(lead, degree);
        match index.get(&canon) {
            Some(&i) => merged[i].0 += w,
            None => {
                index.insert(canon.clone(), merged.len());
                merged.push((w, canon));
            }
        }
    }
    WaringDecomposition::new(nvars, degree, scale, merged.into_iter().map(|(w, c)| (w, LinearForm::new(c))))
}

/// Decomposition of `x_1^{a_1} ... x_t^{a_t}` from the symmetric integer
/// shifts `c_i in {a_i - 2j}` with finite-difference weights, after merging
/// proportional forms.
pub fn monomial_product_decomposition(exponents: &[usize]) -> Result<WaringDecomposition> {
    if exponents.is_empty() {
        return Err(Error::domain("monomial needs at least one exponent"));
    }
    if exponents.contains(&0) {
        return Err(Error::domain("monomial exponents must be positive"));
    }
    let t = exponents.len();
    let total: usize = exponents.iter().sum();
    let per_var: Vec<Vec<(Rational, i64)>> = exponents
        .iter()
        .map(|&a| {
            let norm = num_traits::pow(BigInt::from(2), a) * factorial(a as u64);
            (0..=a)
                .map(|j| {
                    let w = Rational::new(binomial(a as u64, j as u64), norm.clone());
                    (if j % 2 == 1 { -w } else { w }, a as i64 - 2 * j as i64)
                })
                .collect()
        })
        .collect();
    let multinomial: BigInt =
        factorial(total as u64) / exponents.iter().map(|&a| factorial(a as u64)).product::<BigInt>();
    let terms = per_var
        .iter()
        .multi_cartesian_product()
        .map(|choice| {
            let w: Rational = choice.iter().map(|(w, _)| w.clone()).product();
            (w, choice.iter().map(|(_, c)| integer(*c)).collect())
        })
        .collect();
    merge_proportional(t, total, Rational::new(One::one(), multinomial), terms)
}

fn flat_range(family: &FunctionFamily) -> Result<usize> {
    match family.range() {
        RangeShape::Flat(l) => Ok(l),
        RangeShape::Product(_) => Err(Error::domain("expected a family with a flat range [l]")),
    }
}

/// `sum_pi prod_j L_{pi,j}` with `L_{pi,j} = sum_{pi(i) = j} x_i`, written
/// as powers by inclusion-exclusion over the colour classes.
pub fn colorcoding_decomposition(n: usize, d: usize, family: &FunctionFamily) -> Result<WaringDecomposition> {
    check_elementary(n, d)?;
    if flat_range(family)? != d || family.n() != n {
        return Err(Error::domain(format!("colour-coding needs functions [{n}] -> [{d}]")));
    }
    let scale = Rational::new(One::one(), factorial(d as u64));
    let mut terms = Vec::with_capacity(family.len() * ((1 << d) - 1));
    for f in family.functions() {
        for mask in 1u64..(1 << d) {
            let size = mask.count_ones() as usize;
            let w = if (size + d) % 2 == 0 { integer(1) } else { integer(-1) };
            let form = LinearForm::from_integers(f.iter().map(|&c| ((mask >> c) & 1) as i64));
            terms.push((w, form));
        }
    }
    WaringDecomposition::new(n, d, scale, terms)
}

/// A splitter composition together with the balance constant it was divided
/// by.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitterComposed {
    pub decomposition: WaringDecomposition,
    pub balance: Rational,
}

/// `(1/c) sum_pi base(L_pi)` for a family `[n] -> [n0]`.
///
/// `c` is the family's recorded balance constant when present, otherwise the
/// mean injective count over all `d`-subsets.
pub fn splitter_composed(base: &WaringDecomposition, n: usize, family: &FunctionFamily, limits: &Limits) -> Result<SplitterComposed> {
    let n0 = flat_range(family)?;
    if base.nvars() != n0 || family.n() != n {
        return Err(Error::contract(format!(
            "base has {} variables and the family maps [{}] -> [{n0}], expected [{n}] -> [{}]",
            base.nvars(),
            family.n(),
            base.nvars()
        )));
    }
    let count = (family.len() as u128).saturating_mul(base.rank_bound() as u128);
    if count > limits.decomposition_terms {
        return Err(Error::budget("composed decomposition terms", count, limits.decomposition_terms));
    }
    let balance = match &family.balance {
        Some(c) => c.clone(),
        None => mean_injective_count(family, base.degree(), limits)?,
    };
    if balance.is_zero() {
        return Err(Error::domain("family never maps a subset injectively; balance constant is zero"));
    }
    let parts = family
        .functions()
        .iter()
        .map(|f| base.substitute(&f.iter().map(|&v| vec![v]).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    let decomposition = WaringDecomposition::concat(&parts)?.scaled(&(Rational::one() / &balance));
    Ok(SplitterComposed { decomposition, balance })
}

/// Relative error of a splitter composition: the smallest `eps` with
/// `(1+eps)/(1+eps0) >= delta` and `(1-eps0)/(1-eps) >= delta`.
pub fn composed_epsilon(eps0: &Rational, delta: &Rational) -> Rational {
    let one = Rational::one();
    let up = delta * (&one + eps0) - &one;
    let down = &one - (&one - eps0) / delta;
    up.max(down)
}

/// `g^{(s,t)} = sum_{i<s} prod_{j<t} g(x_{i,j,*})`, with `x_{i,j,k}` at
/// index `(i t + j) n0 + k`.
pub fn direct_power_sum(base: &WaringDecomposition, s: usize, t: usize, limits: &Limits) -> Result<WaringDecomposition> {
    if s == 0 || t == 0 {
        return Err(Error::domain("direct power sum needs s, t >= 1"));
    }
    let (n0, d) = (base.nvars(), base.degree());
    let product = monomial_product_decomposition(&vec![d; t])?;
    let r = base.rank_bound() as u128;
    let count = (s as u128)
        .saturating_mul(r.saturating_pow(t as u32))
        .saturating_mul(product.rank_bound() as u128);
    if count > limits.decomposition_terms {
        return Err(Error::budget("direct power sum terms", count, limits.decomposition_terms));
    }
    let nvars = s * t * n0;
    let scale = num_traits::pow(base.scale().clone(), t) * product.scale();
    let mut terms = Vec::with_capacity(count as usize);
    for i in 0..s {
        for choice in (0..t).map(|_| base.terms().iter()).multi_cartesian_product() {
            let w: Rational = choice.iter().map(|term| term.weight.clone()).product();
            for p in product.terms() {
                let mut coeffs = vec![Rational::zero(); nvars];
                for (j, term) in choice.iter().enumerate() {
                    let c = &p.form.coeffs()[j];
                    let offset = (i * t + j) * n0;
                    for (k, a) in term.form.coeffs().iter().enumerate() {
                        coeffs[offset + k] = c * a;
                    }
                }
                terms.push((&w * &p.weight, LinearForm::new(coeffs)));
            }
        }
    }
    WaringDecomposition::new(nvars, t * d, scale, terms)
}

/// Substitutes `x_{i,j,k} -> sum_{pi_i(m) = (j,k)} x_m` into
/// `direct_power_sum(base, |F|, d/d0)`.
pub fn perfect_splitter_composed(
    base: &WaringDecomposition,
    n: usize,
    d: usize,
    family: &FunctionFamily,
    limits: &Limits,
) -> Result<WaringDecomposition> {
    let (n0, d0) = (base.nvars(), base.degree());
    if d % d0 != 0 {
        return Err(Error::domain(format!(
            "d0 = {d0} does not divide d = {d}; pad with fresh variables (see perfect_splitter_padded)"
        )));
    }
    let t = d / d0;
    if family.range() != RangeShape::Product([t, n0]) || family.n() != n {
        return Err(Error::contract(format!("expected a family [{n}] -> [{t}] x [{n0}]")));
    }
    let powered = direct_power_sum(base, family.len(), t, limits)?;
    let sources: Vec<Vec<usize>> = (0..n)
        .map(|m| {
            family
                .functions()
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let (j, k) = (f[m] / n0, f[m] % n0);
                    (i * t + j) * n0 + k
                })
                .collect()
        })
        .collect();
    powered.substitute(&sources)
}

/// Handles `d0 ∤ d` by composing at degree `D = ceil(d/d0) d0` on `n + D - d`
/// variables and differentiating away the `D - d` padding variables, which
/// are the last ones of the family's domain.
pub fn perfect_splitter_padded(
    base: &WaringDecomposition,
    n: usize,
    d: usize,
    family: &FunctionFamily,
    limits: &Limits,
) -> Result<WaringDecomposition> {
    let d0 = base.degree();
    let big_d = d.div_ceil(d0) * d0;
    let pad = big_d - d;
    let composed = perfect_splitter_composed(base, n + pad, big_d, family, limits)?;
    if pad == 0 {
        return Ok(composed);
    }
    composed.differentiate_out(&(n..n + pad).collect::<Vec<_>>())
}

/// The `2^d - 1` points `sum_j alpha_j A_j` (row combinations of `A`) for
/// nonzero `alpha in {0,1}^d`, in increasing order of `alpha`.
pub fn char2_permanent_points(field: &Gf2m, a: &[Vec<u64>]) -> Result<Vec<Vec<u64>>> {
    let d = a.len();
    if d == 0 {
        return Err(Error::domain("matrix needs at least one row"));
    }
    let n = a[0].len();
    if a.iter().any(|row| row.len() != n) {
        return Err(Error::contract("ragged matrix"));
    }
    if d >= 63 {
        return Err(Error::budget("row combinations", 1u128 << d.min(127), 1 << 62));
    }
    let mut points = Vec::with_capacity((1 << d) - 1);
    for mask in 1u64..(1u64 << d) {
        let mut p = vec![0u64; n];
        for (j, row) in a.iter().enumerate() {
            if (mask >> j) & 1 == 1 {
                p.iter_mut().zip(row).for_each(|(x, &y)| *x = field.add(*x, y));
            }
        }
        points.push(p);
    }
    Ok(points)
}
