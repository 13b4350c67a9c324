//! Exact arithmetic: primes, p-adic valuations, Legendre's formula and
//! finite-precision p-adic numbers.

pub mod padic;
pub mod rational;

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use padic::{padic_reduce, padic_reduce_absolute, padic_reduce_fraction, PadicApprox};
pub use rational::Rational;

/// A prime number, checked once at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if is_prime(p) {
            Ok(Prime(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn as_biguint(self) -> BigUint {
        BigUint::from(self.0)
    }

    pub fn as_bigint(self) -> BigInt {
        BigInt::from(self.0)
    }
}

impl TryFrom<u64> for Prime {
    type Error = Error;

    fn try_from(p: u64) -> Result<Self> {
        Prime::new(p)
    }
}

impl From<Prime> for u64 {
    fn from(p: Prime) -> u64 {
        p.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn primes_up_to(bound: u64) -> Vec<Prime> {
    (2..=bound).filter(|&n| is_prime(n)).map(Prime).collect()
}

/// A p-adic valuation; `Infinite` is the valuation of zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_at_least(self, bound: i64) -> bool {
        match self {
            Valuation::Finite(v) => v >= bound,
            Valuation::Infinite => true,
        }
    }
}

impl std::ops::Add for Valuation {
    type Output = Valuation;

    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Valuation::Finite(v) => s.serialize_i64(*v),
            Valuation::Infinite => s.serialize_str("infinity"),
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => f.write_str("infinity"),
        }
    }
}

/// Sum of the base-p digits of `m`.
pub fn digit_sum(m: u64, p: Prime) -> u64 {
    let mut m = m;
    let mut s = 0;
    while m > 0 {
        s += m % p.0;
        m /= p.0;
    }
    s
}

/// Number of base-p digits of `m` (zero has none).
pub fn digit_count(m: u64, p: Prime) -> u64 {
    let mut m = m;
    let mut d = 0;
    while m > 0 {
        d += 1;
        m /= p.0;
    }
    d
}

/// `v_p(m!)` by Legendre's formula `(m - S_m)/(p - 1)`.
pub fn factorial_valuation(m: u64, p: Prime) -> u64 {
    let s = digit_sum(m, p);
    let excess = m - s;
    assert_eq!(
        excess % (p.0 - 1),
        0,
        "m - S_m must be divisible by p - 1 (m = {m}, p = {p})"
    );
    excess / (p.0 - 1)
}

/// Exponent of `p` in a nonzero integer.
pub fn int_valuation(n: &BigInt, p: Prime) -> Valuation {
    if n.is_zero() {
        return Valuation::Infinite;
    }
    Valuation::Finite(strip_prime(n.magnitude(), p).1 as i64)
}

/// Splits `n = p^v * rest` with `p` not dividing `rest`; `n` must be nonzero.
pub(crate) fn strip_prime(n: &BigUint, p: Prime) -> (BigUint, u64) {
    debug_assert!(!n.is_zero());
    if p.0 == 2 {
        let v = n.trailing_zeros().unwrap_or(0);
        return (n >> v, v);
    }
    let pb = p.as_biguint();
    let mut rest = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = rest.div_rem(&pb);
        if !r.is_zero() {
            break;
        }
        rest = q;
        v += 1;
    }
    (rest, v)
}

pub fn rational_valuation(r: &Rational, p: Prime) -> Valuation {
    if r.is_zero() {
        return Valuation::Infinite;
    }
    let num = int_valuation(r.numer(), p).finite().unwrap();
    let den = int_valuation(r.denom(), p).finite().unwrap();
    Valuation::Finite(num - den)
}

/// `|r|_p` as an exact rational, `p^(-v_p(r))`.
pub fn padic_norm(r: &Rational, p: Prime) -> Rational {
    match rational_valuation(r, p) {
        Valuation::Infinite => Rational::zero(),
        Valuation::Finite(v) => rational::pow(&Rational::from_integer(p.as_bigint()), -v),
    }
}

pub fn factorial(m: u64) -> BigUint {
    (1..=m).fold(BigUint::one(), |acc, i| acc * i)
}

/// `(m+1)(m+2)...(m+mu)`.
pub fn rising_factorial(m: u64, mu: u64) -> BigUint {
    (m + 1..=m + mu).fold(BigUint::one(), |acc, i| acc * i)
}

/// Memo of `0!, 1!, 2!, ...` for evaluating many terms of one series.
#[derive(Debug, Clone)]
pub struct FactorialTable {
    values: Vec<BigUint>,
}

impl Default for FactorialTable {
    fn default() -> Self {
        FactorialTable {
            values: vec![BigUint::one()],
        }
    }
}

impl FactorialTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, m: u64) -> &BigUint {
        let m = m as usize;
        while self.values.len() <= m {
            let next = self.values.len();
            let v = &self.values[next - 1] * BigUint::from(next);
            self.values.push(v);
        }
        &self.values[m]
    }

    /// `(m!)^e` as a rational, `e` may be negative.
    pub fn power(&mut self, m: u64, e: i64) -> Rational {
        let f = Rational::from_integer(BigInt::from(self.get(m).clone()));
        rational::pow(&f, e)
    }
}
