//! Small-integer fast paths and combinatorial helpers shared by the crate.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::polycore::Rational;

/// Ring operations that may refuse (overflow) so a kernel can be retried
/// in a wider type.
pub(crate) trait Scalar: Clone + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Option<Self>;
    fn mul(&self, other: &Self) -> Option<Self>;
    fn from_rational(r: &Rational) -> Option<Self>;
    fn into_rational(self) -> Rational;
}

impl Scalar for i128 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn add(&self, other: &Self) -> Option<Self> {
        self.checked_add(*other)
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        self.checked_mul(*other)
    }
    fn from_rational(r: &Rational) -> Option<Self> {
        if r.is_integer() {
            r.numer().to_i128()
        } else {
            None
        }
    }
    fn into_rational(self) -> Rational {
        Rational::from_integer(BigInt::from(self))
    }
}

impl Scalar for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, other: &Self) -> Option<Self> {
        Some(self + other)
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        Some(self * other)
    }
    fn from_rational(r: &Rational) -> Option<Self> {
        Some(r.clone())
    }
    fn into_rational(self) -> Rational {
        self
    }
}

impl Scalar for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, other: &Self) -> Option<Self> {
        Some(self + other)
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        Some(self * other)
    }
    fn from_rational(r: &Rational) -> Option<Self> {
        r.is_integer().then(|| r.numer().clone())
    }
    fn into_rational(self) -> Rational {
        Rational::from_integer(self)
    }
}

/// An evaluation routine generic over the scalar type. Returning `None`
/// means the scalar type could not represent an intermediate value.
pub(crate) trait Kernel {
    fn run<T: Scalar>(&self, point: &[T]) -> Option<T>;
}

/// Evaluates `kernel` with checked `i128` arithmetic when every coordinate is
/// an integer, falling back to exact rationals on overflow or fractions.
pub(crate) fn eval_exact<K: Kernel>(kernel: &K, point: &[Rational]) -> Rational {
    let small: Option<Vec<i128>> = point.iter().map(i128::from_rational).collect();
    if let Some(ints) = small {
        if let Some(v) = kernel.run::<i128>(&ints) {
            return v.into_rational();
        }
    }
    kernel
        .run::<Rational>(point)
        .expect("rational arithmetic never overflows")
}

pub(crate) fn pow<T: Scalar>(base: &T, exp: usize) -> Option<T> {
    let mut acc = T::one();
    for _ in 0..exp {
        acc = acc.mul(base)?;
    }
    Some(acc)
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return <BigInt as Zero>::zero();
    }
    let k = k.min(n - k);
    let mut acc = <BigInt as One>::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Binomial coefficient that is zero for negative upper arguments.
pub(crate) fn binomial_signed(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        <BigInt as Zero>::zero()
    } else {
        binomial(n as u64, k as u64)
    }
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(<BigInt as One>::one(), |acc, i| acc * BigInt::from(i))
}

/// `(n)_k = n (n-1) ... (n-k+1)`.
pub fn falling_factorial(n: u64, k: u64) -> BigInt {
    if k > n {
        return <BigInt as Zero>::zero();
    }
    (0..k).fold(<BigInt as One>::one(), |acc, i| acc * BigInt::from(n - i))
}

/// Sum of `C(n, i)` for `i <= k`.
pub fn binomial_prefix_sum(n: u64, k: u64) -> BigInt {
    (0..=k).map(|i| binomial(n, i)).sum()
}

pub(crate) fn u128_of(b: &BigInt) -> u128 {
    b.to_u128().unwrap_or(u128::MAX)
}

pub(crate) fn ceil_rational(r: &Rational) -> BigInt {
    let (q, rem) = r.numer().div_rem(r.denom());
    if rem.is_positive() {
        q + 1
    } else {
        // div_rem truncates toward zero, which is the ceiling for negatives
        q
    }
}

/// Independent 64-bit seed for sub-task `index` of a run seeded with `seed`
/// (SplitMix64 finalizer), so parallel and serial schedules agree.
pub(crate) fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Colex ranking of degree-`d` monomials in `n` variables onto
/// `0..C(n+d-1, d)`.
#[derive(Debug, Clone)]
pub(crate) struct MonomialIndexer {
    // choose[a][b] = C(a, b), a < n + d, b <= d
    choose: Vec<Vec<u64>>,
}

impl MonomialIndexer {
    pub(crate) fn new(n: usize, d: usize) -> Self {
        let rows = n + d + 1;
        let mut choose = vec![vec![0u64; d + 2]; rows];
        for a in 0..rows {
            choose[a][0] = 1;
            for b in 1..=(d + 1).min(a) {
                choose[a][b] = choose[a - 1][b - 1].saturating_add(if b <= a - 1 {
                    choose[a - 1][b]
                } else {
                    0
                });
            }
        }
        MonomialIndexer { choose }
    }

    /// Rank of the exponent vector; the vector must have total degree `d`.
    pub(crate) fn rank(&self, exps: &[u32]) -> usize {
        let mut rank = 0u64;
        let mut j = 0usize;
        for (var, &e) in exps.iter().enumerate() {
            for _ in 0..e {
                j += 1;
                rank += self.choose[var + j - 1][j];
            }
        }
        rank as usize
    }
}
