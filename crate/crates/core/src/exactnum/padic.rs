use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::{strip_prime, Prime, Rational, Valuation};

/// A p-adic number known to finite relative precision.
///
/// A nonzero value is `p^valuation * unit`, known modulo
/// `p^(valuation + precision)`, with `unit` a p-free residue below
/// `p^precision`. When `is_zero` is set the value is indistinguishable from
/// zero: it is only known that it lies in `p^valuation Z_p`, so `valuation`
/// then records the absolute precision and `precision` is 0. An exact zero
/// uses `valuation == i64::MAX`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicApprox {
    prime: Prime,
    valuation: i64,
    unit: BigUint,
    precision: u32,
    is_zero: bool,
}

fn prime_power(p: Prime, k: u64) -> BigUint {
    num_traits::pow::Pow::pow(&p.as_biguint(), k)
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let g = a.extended_gcd(m);
    assert!(g.gcd.is_one(), "{a} is not invertible modulo {m}");
    g.x.mod_floor(m)
}

impl PadicApprox {
    pub fn zero(prime: Prime, absolute_precision: i64) -> Self {
        PadicApprox {
            prime,
            valuation: absolute_precision,
            unit: BigUint::zero(),
            precision: 0,
            is_zero: true,
        }
    }

    pub fn exact_zero(prime: Prime) -> Self {
        Self::zero(prime, i64::MAX)
    }

    /// Normalises `p^valuation * residue` known modulo `p^(valuation + precision)`.
    pub fn from_parts(prime: Prime, valuation: i64, residue: BigUint, precision: u32) -> Self {
        let residue = residue % prime_power(prime, precision as u64);
        if residue.is_zero() {
            return Self::zero(prime, valuation + precision as i64);
        }
        let (unit, shift) = strip_prime(&residue, prime);
        PadicApprox {
            prime,
            valuation: valuation + shift as i64,
            unit,
            precision: precision - shift as u32,
            is_zero: false,
        }
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn valuation(&self) -> i64 {
        self.valuation
    }

    pub fn unit(&self) -> &BigUint {
        &self.unit
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn is_zero(&self) -> bool {
        self.is_zero
    }

    pub fn is_exact_zero(&self) -> bool {
        self.is_zero && self.valuation == i64::MAX
    }

    /// The value is known modulo `p^absolute_precision()`.
    pub fn absolute_precision(&self) -> i64 {
        if self.is_zero {
            self.valuation
        } else {
            self.valuation + self.precision as i64
        }
    }

    /// Valuation as far as it is known; a zero approximation reports its
    /// absolute precision as a lower bound.
    pub fn known_valuation(&self) -> Valuation {
        if self.is_exact_zero() {
            Valuation::Infinite
        } else {
            Valuation::Finite(self.valuation)
        }
    }

    /// Forgets digits beyond absolute precision `abs`; never adds digits.
    pub fn truncate(&self, abs: i64) -> Self {
        if abs >= self.absolute_precision() {
            return self.clone();
        }
        if self.is_zero || abs <= self.valuation {
            return Self::zero(self.prime, abs);
        }
        Self::from_parts(
            self.prime,
            self.valuation,
            self.unit.clone(),
            (abs - self.valuation) as u32,
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.prime, other.prime, "mixed primes in p-adic addition");
        let abs = self.absolute_precision().min(other.absolute_precision());
        if self.is_zero {
            return other.truncate(abs);
        }
        if other.is_zero {
            return self.truncate(abs);
        }
        let p = self.prime;
        let vmin = self.valuation.min(other.valuation);
        let width = (abs - vmin) as u64;
        let modulus = prime_power(p, width);
        let shifted = |x: &Self| -> BigUint {
            let shift = (x.valuation - vmin) as u64;
            if shift >= width {
                BigUint::zero()
            } else {
                &x.unit * prime_power(p, shift)
            }
        };
        let sum = (shifted(self) + shifted(other)) % modulus;
        Self::from_parts(p, vmin, sum, width as u32)
    }

    pub fn neg(&self) -> Self {
        if self.is_zero {
            return self.clone();
        }
        let modulus = prime_power(self.prime, self.precision as u64);
        PadicApprox {
            unit: &modulus - &self.unit,
            ..self.clone()
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.prime, other.prime, "mixed primes in p-adic product");
        if self.is_zero || other.is_zero {
            let abs = self.valuation.saturating_add(other.valuation);
            return Self::zero(self.prime, abs);
        }
        let precision = self.precision.min(other.precision);
        let unit = (&self.unit * &other.unit) % prime_power(self.prime, precision as u64);
        PadicApprox {
            prime: self.prime,
            valuation: self.valuation + other.valuation,
            unit,
            precision,
            is_zero: false,
        }
    }

    /// True when both values agree on every jointly known digit.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.sub(other).is_zero
    }

    /// Base-p digits of the unit, least significant first.
    pub fn digits(&self) -> Vec<u64> {
        let p = self.prime.as_biguint();
        let mut rest = self.unit.clone();
        (0..self.precision)
            .map(|_| {
                let (q, r) = rest.div_rem(&p);
                rest = q;
                r.iter_u64_digits().next().unwrap_or(0)
            })
            .collect()
    }

    /// The value modulo `p^absolute_precision()` when it is a p-adic integer.
    pub fn residue(&self) -> Option<BigUint> {
        if self.is_zero {
            return Some(BigUint::zero());
        }
        if self.valuation < 0 {
            return None;
        }
        Some(&self.unit * prime_power(self.prime, self.valuation as u64))
    }

    /// Digits of the value itself (not the unit) when it is a p-adic
    /// integer, `absolute_precision()` of them.
    pub fn absolute_digits(&self) -> Option<Vec<u64>> {
        let abs = self.absolute_precision();
        if self.is_exact_zero() || abs < 0 {
            return None;
        }
        let mut out = vec![0; self.valuation.clamp(0, abs) as usize];
        if !self.is_zero {
            if self.valuation < 0 {
                return None;
            }
            out.extend(self.digits());
        }
        Some(out)
    }
}

impl fmt::Display for PadicApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.prime;
        if self.is_exact_zero() {
            return f.write_str("0");
        }
        if self.is_zero {
            return write!(f, "O({p}^{})", self.valuation);
        }
        write!(f, "{p}^{} * (", self.valuation)?;
        for (i, d) in self.digits().iter().enumerate() {
            match i {
                0 => write!(f, "{d}")?,
                1 => write!(f, " + {d}*{p}")?,
                _ => write!(f, " + {d}*{p}^{i}")?,
            }
        }
        f.write_str(")")
    }
}

impl Serialize for PadicApprox {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("PadicApprox", 6)?;
        st.serialize_field("prime", &self.prime.get())?;
        st.serialize_field("is_zero", &self.is_zero)?;
        if self.is_exact_zero() {
            st.serialize_field("valuation", "infinity")?;
        } else {
            st.serialize_field("valuation", &self.valuation)?;
        }
        st.serialize_field("precision", &self.precision)?;
        st.serialize_field("digits", &self.digits())?;
        st.serialize_field("text", &self.to_string())?;
        st.end()
    }
}

/// Image of `r` in `Q_p` with `precision` known digits after its leading one.
pub fn padic_reduce(r: &Rational, p: Prime, precision: u32) -> PadicApprox {
    assert!(precision >= 1, "p-adic precision must be at least 1");
    if r.is_zero() {
        return PadicApprox::exact_zero(p);
    }
    let (num, den, v) = split(r.numer(), r.denom().magnitude(), p);
    unit_part(p, v, &num, &den, precision)
}

/// Image of `r` in `Q_p` known modulo `p^abs`.
pub fn padic_reduce_absolute(r: &Rational, p: Prime, abs: i64) -> PadicApprox {
    padic_reduce_fraction(r.numer(), r.denom().magnitude(), p, abs)
}

/// Like [`padic_reduce_absolute`] for `num/den` not necessarily in lowest
/// terms (`den > 0`), which spares the gcd of huge products.
pub fn padic_reduce_fraction(num: &BigInt, den: &BigUint, p: Prime, abs: i64) -> PadicApprox {
    assert!(!den.is_zero(), "zero denominator");
    if num.is_zero() {
        return PadicApprox::exact_zero(p);
    }
    let (n, d, v) = split(num, den, p);
    if v >= abs {
        return PadicApprox::zero(p, abs);
    }
    unit_part(p, v, &n, &d, (abs - v) as u32)
}

/// Strips `p` from both parts: `(signed p-free numerator, p-free denominator, valuation)`.
fn split(num: &BigInt, den: &BigUint, p: Prime) -> (BigInt, BigUint, i64) {
    let (n, vn) = strip_prime(num.magnitude(), p);
    let (d, vd) = strip_prime(den, p);
    let n = if num.sign() == Sign::Minus {
        -BigInt::from(n)
    } else {
        BigInt::from(n)
    };
    (n, d, vn as i64 - vd as i64)
}

fn unit_part(p: Prime, valuation: i64, num: &BigInt, den: &BigUint, precision: u32) -> PadicApprox {
    let modulus = BigInt::from(prime_power(p, precision as u64));
    let den = BigInt::from(den % modulus.magnitude());
    let unit = (num.mod_floor(&modulus) * mod_inverse(&den, &modulus)).mod_floor(&modulus);
    PadicApprox {
        prime: p,
        valuation,
        unit: unit.to_biguint().expect("reduced residue is nonnegative"),
        precision,
        is_zero: false,
    }
}
