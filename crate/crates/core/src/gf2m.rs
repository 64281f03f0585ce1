//! Binary extension fields GF(2^m), 1 <= m <= 64.
//!
//! Elements are `u64` bit vectors in the polynomial basis. The modulus for
//! each `m` is the irreducible trinomial `x^m + x^k + 1` with the smallest
//! `k` when one exists, otherwise the pentanomial `x^m + x^a + x^b + x^c + 1`
//! with the lexicographically smallest `(a, b, c)`.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gf2m {
    m: u32,
    // Full modulus including the x^m bit.
    modulus: u128,
}

impl Gf2m {
    pub fn new(m: u32) -> Result<Self> {
        if !(1..=64).contains(&m) {
            return Err(Error::domain(format!("extension degree must be in 1..=64, got {m}")));
        }
        Ok(Gf2m { m, modulus: find_modulus(m) })
    }

    /// Smallest field with at least `size` elements.
    pub fn with_at_least(size: u128) -> Result<Self> {
        let m = (1..=64u32)
            .find(|&m| (1u128 << m) >= size)
            .ok_or_else(|| Error::domain(format!("no GF(2^m) with m <= 64 has {size} elements")))?;
        Gf2m::new(m)
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn modulus(&self) -> u128 {
        self.modulus
    }

    pub fn order(&self) -> u128 {
        1u128 << self.m
    }

    fn mask(&self) -> u64 {
        if self.m == 64 {
            u64::MAX
        } else {
            (1u64 << self.m) - 1
        }
    }

    pub fn contains(&self, a: u64) -> bool {
        a & !self.mask() == 0
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        a ^ b
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        reduce(clmul(a as u128, b as u128), self.modulus, self.m) as u64
    }

    pub fn pow(&self, mut a: u64, mut e: u128) -> u64 {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> Result<u64> {
        if a == 0 {
            return Err(Error::domain("inverse of zero in GF(2^m)"));
        }
        Ok(self.pow(a, self.order() - 2))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.gen::<u64>() & self.mask()
    }

    /// Reduces an integer into the prime subfield GF(2).
    pub fn from_parity(&self, c: &num_bigint::BigInt) -> u64 {
        use num_integer::Integer;
        u64::from(c.is_odd())
    }
}

fn clmul(a: u128, b: u128) -> u128 {
    let mut acc = 0u128;
    let mut b = b;
    let mut shift = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a << shift;
        }
        b >>= 1;
        shift += 1;
    }
    acc
}

fn degree_of(p: u128) -> i32 {
    127 - p.leading_zeros() as i32
}

fn reduce(mut p: u128, modulus: u128, m: u32) -> u128 {
    let m = m as i32;
    while degree_of(p) >= m {
        p ^= modulus << (degree_of(p) - m);
    }
    p
}

fn poly_gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = if degree_of(a) >= degree_of(b) { reduce(a, b, degree_of(b) as u32) } else { a };
        a = b;
        b = r;
    }
    a
}

/// Rabin's test: `f` of degree `m` is irreducible over GF(2) iff
/// `x^(2^m) = x (mod f)` and `gcd(x^(2^(m/q)) - x, f) = 1` for every prime
/// `q | m`.
fn is_irreducible(f: u128, m: u32) -> bool {
    let frob = |k: u32| {
        let mut x = 2u128;
        for _ in 0..k {
            x = reduce(clmul(x, x), f, m);
        }
        x
    };
    if frob(m) != reduce(2, f, m) {
        return false;
    }
    prime_factors(m).into_iter().all(|q| poly_gcd(f, frob(m / q) ^ 2) == 1)
}

fn prime_factors(mut m: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            out.push(p);
            while m % p == 0 {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

fn find_modulus(m: u32) -> u128 {
    let top = 1u128 << m;
    if m == 1 {
        return top | 1;
    }
    for k in 1..m {
        let f = top | (1 << k) | 1;
        if is_irreducible(f, m) {
            return f;
        }
    }
    for a in 3..m {
        for b in 2..a {
            for c in 1..b {
                let f = top | (1 << a) | (1 << b) | (1 << c) | 1;
                if is_irreducible(f, m) {
                    return f;
                }
            }
        }
    }
    unreachable!("every degree has an irreducible trinomial or pentanomial up to 64")
}
