//! Sampled balanced splitters, perfect splitters, their exhaustive
//! verifiers, and the lower bound on perfectly balanced hash families.

use itertools::Itertools;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{self, derive_seed};
use crate::polycore::{
    binomial, binomial_prefix_sum, factorial, falling_factorial, format_rational, integer,
    parse_rational, Limits, Rational,
};

/// Verify-and-resample loops give up after this many attempts.
pub const MAX_ATTEMPTS: usize = 20;

/// Codomain of a family: `[l]`, or `[groups] x [n0]` with the value `(j, k)`
/// stored as `j * n0 + k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RangeShape {
    Flat(usize),
    Product([usize; 2]),
}

impl RangeShape {
    pub fn size(&self) -> usize {
        match *self {
            RangeShape::Flat(l) => l,
            RangeShape::Product([t, n0]) => t * n0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Balanced,
    Perfect,
    Explicit,
}

/// A family of functions `[n] -> range`, each stored as its value table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionFamily {
    n: usize,
    range: RangeShape,
    functions: Vec<Vec<usize>>,
    pub kind: FamilyKind,
    pub seed: Option<u64>,
    /// Balance constant measured by [`verify_balanced`].
    pub balance: Option<Rational>,
    /// Whether an exhaustive verifier accepted the family.
    pub verified: bool,
}

impl FunctionFamily {
    pub fn new(n: usize, range: RangeShape, functions: Vec<Vec<usize>>) -> Result<Self> {
        if functions.is_empty() {
            return Err(Error::domain("a function family needs at least one function"));
        }
        let size = range.size();
        for f in &functions {
            if f.len() != n {
                return Err(Error::domain(format!("function of length {} on a domain of size {n}", f.len())));
            }
            if let Some(v) = f.iter().find(|&&v| v >= size) {
                return Err(Error::domain(format!("function value {v} outside a range of size {size}")));
            }
        }
        Ok(FunctionFamily {
            n,
            range,
            functions,
            kind: FamilyKind::Explicit,
            seed: None,
            balance: None,
            verified: false,
        })
    }

    /// Every bijection `[n] -> [n]`.
    pub fn all_bijections(n: usize) -> Result<Self> {
        FunctionFamily::new(n, RangeShape::Flat(n), (0..n).permutations(n).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn range(&self) -> RangeShape {
        self.range
    }

    pub fn functions(&self) -> &[Vec<usize>] {
        &self.functions
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// Number of functions injective on `subset`.
    pub fn injective_count(&self, subset: &[usize]) -> usize {
        let mut seen = vec![usize::MAX; self.range.size()];
        self.functions
            .iter()
            .enumerate()
            .filter(|(idx, f)| {
                subset.iter().all(|&i| {
                    let slot = &mut seen[f[i]];
                    std::mem::replace(slot, *idx) != *idx
                })
            })
            .count()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = FamilyDoc {
            n: self.n,
            range: self.range,
            seed: self.seed,
            kind: self.kind,
            functions: self.functions.clone(),
            balance: self.balance.as_ref().map(format_rational),
            verified: Some(self.verified),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: FamilyDoc = serde_json::from_str(text)?;
        let mut family = FunctionFamily::new(doc.n, doc.range, doc.functions)?;
        family.kind = doc.kind;
        family.seed = doc.seed;
        family.balance = doc.balance.as_deref().map(parse_rational).transpose()?;
        family.verified = doc.verified.unwrap_or(false);
        Ok(family)
    }
}

#[derive(Serialize, Deserialize)]
struct FamilyDoc {
    n: usize,
    range: RangeShape,
    seed: Option<u64>,
    kind: FamilyKind,
    functions: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    balance: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    verified: Option<bool>,
}

/// Parameters of a δ-balanced `(n, k, l)`-splitter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalancedSpec {
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub delta: Rational,
}

impl BalancedSpec {
    fn check(&self) -> Result<()> {
        if self.delta <= Rational::one() || self.delta > integer(2) {
            return Err(Error::domain("balanced splitters need 1 < delta <= 2"));
        }
        if self.k == 0 || self.k > self.l {
            return Err(Error::domain(format!("need 1 <= k <= l, got k={} l={}", self.k, self.l)));
        }
        if self.k > self.n {
            return Err(Error::domain(format!("need k <= n, got k={} n={}", self.k, self.n)));
        }
        Ok(())
    }
}

/// `p = (l)_k / l^k`, the chance a uniform function is injective on a fixed
/// `k`-set.
pub fn injective_probability(l: usize, k: usize) -> Rational {
    Rational::new(falling_factorial(l as u64, k as u64), num_traits::pow(l.into(), k))
}

fn to_f64(r: &Rational) -> f64 {
    r.to_f64().expect("finite rational")
}

/// `M = ceil(8 (k ln n + 1) / (p (delta - 1)^2))`.
pub fn balanced_size(spec: &BalancedSpec) -> Result<usize> {
    spec.check()?;
    let p = injective_probability(spec.l, spec.k);
    let gap = &spec.delta - Rational::one();
    let m = 8.0 * (spec.k as f64 * (spec.n as f64).ln() + 1.0) / (to_f64(&p) * to_f64(&(&gap * &gap)));
    Ok(m.ceil() as usize)
}

fn random_functions(n: usize, range: usize, count: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..n).map(|_| rng.gen_range(0..range)).collect()).collect()
}

pub fn sample_balanced_splitter(spec: &BalancedSpec, seed: u64) -> Result<FunctionFamily> {
    let size = balanced_size(spec)?;
    let mut family = FunctionFamily::new(spec.n, RangeShape::Flat(spec.l), random_functions(spec.n, spec.l, size, seed))?;
    family.kind = FamilyKind::Balanced;
    family.seed = Some(seed);
    Ok(family)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalanceReport {
    pub ok: bool,
    pub c: Rational,
    /// `max / min` over all `k`-subsets; `None` when some subset is never
    /// hit injectively.
    pub worst_ratio: Option<Rational>,
    pub min: usize,
    pub max: usize,
}

fn check_subsets(n: usize, k: usize, limits: &Limits) -> Result<()> {
    let count = numeric::u128_of(&binomial(n as u64, k as u64));
    if count > limits.subsets {
        return Err(Error::budget("exhaustive subset verification", count, limits.subsets));
    }
    Ok(())
}

/// Injective-count extremes over all `k`-subsets.
pub fn injective_extremes(family: &FunctionFamily, k: usize, limits: &Limits) -> Result<(usize, usize)> {
    check_subsets(family.n, k, limits)?;
    let subsets: Vec<Vec<usize>> = (0..family.n).combinations(k).collect();
    Ok(subsets
        .par_iter()
        .map(|s| {
            let c = family.injective_count(s);
            (c, c)
        })
        .reduce(|| (usize::MAX, 0), |(a, b), (c, d)| (a.min(c), b.max(d))))
}

/// Exhaustive balance check. When `max / min <= delta^2` the constant is
/// `c = (max/delta + delta*min) / 2`, which puts every count inside
/// `[c/delta, c*delta]`; otherwise `c = (max + min) / 2`.
pub fn verify_balanced(family: &FunctionFamily, k: usize, delta: &Rational, limits: &Limits) -> Result<BalanceReport> {
    if k == 0 || k > family.n {
        return Err(Error::domain(format!("subset size {k} outside 1..={}", family.n)));
    }
    let (min, max) = injective_extremes(family, k, limits)?;
    let (lo, hi) = (integer(min), integer(max));
    let worst_ratio = (min > 0).then(|| &hi / &lo);
    let ok = worst_ratio.as_ref().is_some_and(|r| *r <= delta * delta);
    let c = if ok { (&hi / delta + delta * &lo) / integer(2) } else { (&hi + &lo) / integer(2) };
    Ok(BalanceReport { ok, c, worst_ratio, min, max })
}

/// Samples until [`verify_balanced`] accepts, recording `c` in the family.
/// Beyond the verification budget the first sample is returned unverified.
pub fn sample_verified_balanced(spec: &BalancedSpec, seed: u64, limits: &Limits) -> Result<FunctionFamily> {
    spec.check()?;
    if check_subsets(spec.n, spec.k, limits).is_err() {
        return sample_balanced_splitter(spec, seed);
    }
    for attempt in 0..MAX_ATTEMPTS {
        let s = if attempt == 0 { seed } else { derive_seed(seed, attempt as u64) };
        let mut family = sample_balanced_splitter(spec, s)?;
        let report = verify_balanced(&family, spec.k, &spec.delta, limits)?;
        if report.ok {
            family.balance = Some(report.c);
            family.verified = true;
            return Ok(family);
        }
    }
    Err(Error::Resample { attempts: MAX_ATTEMPTS })
}

fn perfect_check(n: usize, d: usize, n0: usize, d0: usize) -> Result<usize> {
    if d0 == 0 || d == 0 || d % d0 != 0 {
        return Err(Error::domain(format!("d0 must divide d, got d={d} d0={d0}")));
    }
    if n0 < d0 {
        return Err(Error::domain(format!("need n0 >= d0, got n0={n0} d0={d0}")));
    }
    if n < d {
        return Err(Error::domain(format!("need n >= d, got n={n} d={d}")));
    }
    Ok(d / d0)
}

/// `sigma = ceil((n0^d0/(n0)_d0)^t * d0!^t * t^d / d! * d ln n)` with
/// `t = d / d0`.
pub fn perfect_size(n: usize, d: usize, n0: usize, d0: usize) -> Result<usize> {
    let t = perfect_check(n, d, n0, d0)?;
    let per_group = Rational::new(num_traits::pow(n0.into(), d0), falling_factorial(n0 as u64, d0 as u64));
    let exact = num_traits::pow(per_group * integer(factorial(d0 as u64)), t)
        * integer(num_traits::pow(num_bigint::BigInt::from(t), d))
        / integer(factorial(d as u64));
    let sigma = to_f64(&exact) * d as f64 * (n as f64).ln();
    Ok((sigma.ceil() as usize).max(1))
}

pub fn sample_perfect_splitter(n: usize, d: usize, n0: usize, d0: usize, seed: u64) -> Result<FunctionFamily> {
    let t = perfect_check(n, d, n0, d0)?;
    let size = perfect_size(n, d, n0, d0)?;
    let mut family = FunctionFamily::new(n, RangeShape::Product([t, n0]), random_functions(n, t * n0, size, seed))?;
    family.kind = FamilyKind::Perfect;
    family.seed = Some(seed);
    Ok(family)
}

fn splits_evenly(f: &[usize], subset: &[usize], groups: usize, n0: usize, d0: usize) -> bool {
    let mut per_group = vec![0usize; groups];
    let mut used = vec![false; groups * n0];
    for &i in subset {
        let v = f[i];
        if std::mem::replace(&mut used[v], true) {
            return false;
        }
        per_group[v / n0] += 1;
    }
    per_group.iter().all(|&c| c == d0)
}

/// True iff every `d`-subset is split into `d/d0` groups of `d0` elements
/// with distinct second coordinates inside each group by some member.
pub fn verify_perfect(family: &FunctionFamily, d: usize, d0: usize, limits: &Limits) -> Result<bool> {
    let RangeShape::Product([t, n0]) = family.range else {
        return Err(Error::domain("perfect splitters need a product range [t] x [n0]"));
    };
    if perfect_check(family.n, d, n0, d0)? != t {
        return Err(Error::domain(format!("range has {t} groups but d/d0 = {}", d / d0)));
    }
    check_subsets(family.n, d, limits)?;
    let subsets: Vec<Vec<usize>> = (0..family.n).combinations(d).collect();
    Ok(subsets
        .par_iter()
        .all(|s| family.functions.iter().any(|f| splits_evenly(f, s, t, n0, d0))))
}

pub fn sample_verified_perfect(
    n: usize,
    d: usize,
    n0: usize,
    d0: usize,
    seed: u64,
    limits: &Limits,
) -> Result<FunctionFamily> {
    perfect_check(n, d, n0, d0)?;
    if check_subsets(n, d, limits).is_err() {
        return sample_perfect_splitter(n, d, n0, d0, seed);
    }
    for attempt in 0..MAX_ATTEMPTS {
        let s = if attempt == 0 { seed } else { derive_seed(seed, attempt as u64) };
        let mut family = sample_perfect_splitter(n, d, n0, d0, s)?;
        if verify_perfect(&family, d, d0, limits)? {
            family.verified = true;
            return Ok(family);
        }
    }
    Err(Error::Resample { attempts: MAX_ATTEMPTS })
}

/// Mean of the injective counts over all `d`-subsets, or `p |F|` when the
/// subsets are too many to enumerate.
pub fn mean_injective_count(family: &FunctionFamily, d: usize, limits: &Limits) -> Result<Rational> {
    if check_subsets(family.n, d, limits).is_err() {
        return Ok(injective_probability(family.range.size(), d) * integer(family.len()));
    }
    let subsets: Vec<Vec<usize>> = (0..family.n).combinations(d).collect();
    let total: usize = subsets.par_iter().map(|s| family.injective_count(s)).sum();
    Ok(Rational::new(total.into(), subsets.len().into()))
}

/// Lower bound on the size of a perfectly `k`-balanced hash family
/// `[n] -> [l]`.
pub fn hash_family_lower_bound(n: usize, k: usize, l: usize) -> Result<Rational> {
    if !(n > l && l >= k && k > 0) {
        return Err(Error::domain(format!("need n > l >= k > 0, got n={n} k={k} l={l}")));
    }
    let h = (k / 2) as u64;
    let denom = binomial_prefix_sum(l as u64, h);
    let numer = if k % 2 == 1 {
        binomial_prefix_sum(n as u64, h)
    } else {
        binomial_prefix_sum(n as u64, h) - binomial(n as u64 - 1, h)
    };
    if denom.is_zero() {
        return Err(Error::domain("empty denominator"));
    }
    Ok(Rational::new(numer, denom))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::rational;
    use proptest::prelude::*;

    fn spec(n: usize, k: usize, l: usize, delta: Rational) -> BalancedSpec {
        BalancedSpec { n, k, l, delta }
    }

    #[test]
    fn balanced_size_examples() {
        assert_eq!(balanced_size(&spec(4, 2, 2, integer(2))).unwrap(), 61);
        assert_eq!(injective_probability(3, 2), rational(2, 3));
        assert!(balanced_size(&spec(4, 3, 2, integer(2))).is_err());
        assert!(balanced_size(&spec(4, 2, 2, integer(1))).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = spec(6, 2, 3, rational(3, 2));
        assert_eq!(sample_balanced_splitter(&s, 11).unwrap(), sample_balanced_splitter(&s, 11).unwrap());
        assert_ne!(
            sample_balanced_splitter(&s, 11).unwrap().functions(),
            sample_balanced_splitter(&s, 12).unwrap().functions()
        );
    }

    #[test]
    fn bijections_are_perfectly_balanced() {
        let f = FunctionFamily::all_bijections(4).unwrap();
        let r = verify_balanced(&f, 4, &integer(2), &Limits::default()).unwrap();
        assert!(r.ok);
        assert_eq!(r.worst_ratio, Some(integer(1)));
        assert_eq!((r.min, r.max), (24, 24));
        let bound = hash_family_lower_bound(5, 4, 4);
        assert!(bound.is_ok());
    }

    #[test]
    fn collapsing_function_is_rejected() {
        let f = FunctionFamily::new(2, RangeShape::Flat(1), vec![vec![0, 0]]).unwrap();
        let r = verify_balanced(&f, 2, &integer(2), &Limits::default()).unwrap();
        assert!(!r.ok);
        assert_eq!(r.worst_ratio, None);
    }

    #[test]
    fn balance_constant_brackets_all_counts() {
        let s = spec(10, 3, 3, integer(2));
        let f = sample_verified_balanced(&s, 1, &Limits::default()).unwrap();
        let c = f.balance.clone().unwrap();
        for subset in (0..10).combinations(3) {
            let count = integer(f.injective_count(&subset));
            assert!(count >= &c / &s.delta && count <= &c * &s.delta);
        }
    }

    #[test]
    fn perfect_size_examples() {
        assert_eq!(perfect_size(8, 2, 2, 2).unwrap(), 9);
        assert_eq!(perfect_size(6, 2, 3, 2).unwrap(), 6);
        assert!(perfect_size(6, 3, 3, 2).is_err());
    }

    #[test]
    fn perfect_verifier_cases() {
        let id = FunctionFamily::new(3, RangeShape::Product([1, 3]), vec![vec![0, 1, 2]]).unwrap();
        assert!(verify_perfect(&id, 3, 3, &Limits::default()).unwrap());
        let collide = FunctionFamily::new(3, RangeShape::Product([1, 3]), vec![vec![0, 0, 0]]).unwrap();
        assert!(!verify_perfect(&collide, 3, 3, &Limits::default()).unwrap());
        let f = sample_verified_perfect(6, 2, 3, 2, 5, &Limits::default()).unwrap();
        assert!(f.verified);
    }

    #[test]
    fn perfect_with_two_groups() {
        // d = 4, d0 = 2: every 4-set must be split 2 + 2 with distinct colours
        let f = sample_verified_perfect(6, 4, 3, 2, 9, &Limits::default()).unwrap();
        assert!(verify_perfect(&f, 4, 2, &Limits::default()).unwrap());
    }

    #[test]
    fn hash_bound_examples() {
        assert_eq!(hash_family_lower_bound(100, 3, 3).unwrap(), rational(101, 4));
        assert_eq!(hash_family_lower_bound(10, 1, 1).unwrap(), integer(1));
        assert_eq!(hash_family_lower_bound(10, 2, 2).unwrap(), rational(2, 3));
        assert!(hash_family_lower_bound(3, 3, 3).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = spec(10, 3, 3, integer(2));
        let f = sample_verified_balanced(&s, 4, &Limits::default()).unwrap();
        let back = FunctionFamily::from_json(&f.to_json().unwrap()).unwrap();
        assert_eq!(back, f);
        let p = sample_perfect_splitter(6, 2, 3, 2, 1).unwrap();
        let text = p.to_json().unwrap();
        assert!(text.contains("\"range\":[1,3]"));
        assert_eq!(FunctionFamily::from_json(&text).unwrap(), p);
        assert!(FunctionFamily::from_json(r#"{"n":2,"range":2,"seed":null,"kind":"explicit","functions":[[0,5]]}"#).is_err());
    }

    fn ln_size(k: usize, n: usize, l: usize, num: i64, den: i64) -> usize {
        let p = falling_factorial(l as u64, k as u64).to_f64().unwrap() / (l as f64).powi(k as i32);
        let gap = num as f64 / den as f64 - 1.0;
        (8.0 * (k as f64 * (n as f64).ln() + 1.0) / (p * gap * gap)).ceil() as usize
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn sampled_sizes_match_formula(n in 2usize..40, k in 1usize..4, extra in 0usize..3, num in 11i64..=20) {
            let k = k.min(n);
            let l = k + extra;
            let s = spec(n, k, l, rational(num, 10));
            let fam = sample_balanced_splitter(&s, 0).unwrap();
            prop_assert_eq!(fam.len(), ln_size(k, n, l, num, 10));
        }
    }
}
