//! The factorial power-series family
//!
//! ```text
//! sum_n  eps^n * I(q; mu*n+nu) * prod_i ((alpha_i*n + beta_i)!)^lambda_i * P(n) * x^(mu*n+nu)
//! ```
//!
//! with the regulating factor `I(q; m) = (m!)^m / (q + (m!)^m)`, which is
//! identically 1 for `q = 0`.

pub mod poly;

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::pow::Pow;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{rational, rational_valuation, FactorialTable, Prime, Rational, Valuation};

pub use poly::PolynomialQ;

/// One block `((alpha*n + beta)!)^lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactorSpec {
    pub alpha: u64,
    pub beta: u64,
    pub lambda: i64,
}

impl FactorSpec {
    pub fn new(alpha: u64, beta: u64, lambda: i64) -> Self {
        FactorSpec {
            alpha,
            beta,
            lambda,
        }
    }

    pub fn argument(&self, n: u64) -> u64 {
        self.alpha * n + self.beta
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SpecJson", into = "SpecJson")]
pub struct SeriesSpec {
    epsilon: i8,
    q: Rational,
    mu: u64,
    nu: u64,
    factors: Vec<FactorSpec>,
    poly: PolynomialQ,
}

/// On-disk form; every CLI command reads series in this shape.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecJson {
    epsilon: i64,
    q: String,
    mu: i64,
    nu: i64,
    factors: Vec<FactorJson>,
    poly: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorJson {
    alpha: i64,
    beta: i64,
    lambda: i64,
}

impl TryFrom<SpecJson> for SeriesSpec {
    type Error = Error;

    fn try_from(j: SpecJson) -> Result<Self> {
        let factors = j
            .factors
            .iter()
            .map(|f| {
                if f.alpha < 1 {
                    return Err(invalid("alpha", format!("must be >= 1, got {}", f.alpha)));
                }
                if f.beta < 0 {
                    return Err(invalid("beta", format!("must be >= 0, got {}", f.beta)));
                }
                Ok(FactorSpec::new(f.alpha as u64, f.beta as u64, f.lambda))
            })
            .collect::<Result<Vec<_>>>()?;
        let poly = j
            .poly
            .iter()
            .map(|c| rational::parse(c))
            .collect::<Result<Vec<_>>>()?;
        SeriesSpec::new(
            j.epsilon,
            rational::parse(&j.q)?,
            j.mu,
            j.nu,
            factors,
            PolynomialQ::new(poly),
        )
    }
}

impl From<SeriesSpec> for SpecJson {
    fn from(s: SeriesSpec) -> Self {
        SpecJson {
            epsilon: s.epsilon as i64,
            q: s.q.to_string(),
            mu: s.mu as i64,
            nu: s.nu as i64,
            factors: s
                .factors
                .iter()
                .map(|f| FactorJson {
                    alpha: f.alpha as i64,
                    beta: f.beta as i64,
                    lambda: f.lambda,
                })
                .collect(),
            poly: s.poly.coeffs().iter().map(ToString::to_string).collect(),
        }
    }
}

fn invalid(field: &'static str, reason: String) -> Error {
    Error::InvalidSpec { field, reason }
}

impl SeriesSpec {
    /// Validated constructor; rejects `q < 0`, `mu < 1`, `nu < 0`,
    /// `epsilon` other than +-1 and `alpha < 1`.
    pub fn new(
        epsilon: i64,
        q: Rational,
        mu: i64,
        nu: i64,
        factors: Vec<FactorSpec>,
        poly: PolynomialQ,
    ) -> Result<Self> {
        if epsilon != 1 && epsilon != -1 {
            return Err(invalid(
                "epsilon",
                format!("must be 1 or -1, got {epsilon}"),
            ));
        }
        if q.is_negative() {
            return Err(invalid("q", format!("must be nonnegative, got {q}")));
        }
        if mu < 1 {
            return Err(invalid("mu", format!("must be >= 1, got {mu}")));
        }
        if nu < 0 {
            return Err(invalid("nu", format!("must be >= 0, got {nu}")));
        }
        if let Some(f) = factors.iter().find(|f| f.alpha < 1) {
            return Err(invalid("alpha", format!("must be >= 1, got {}", f.alpha)));
        }
        Ok(SeriesSpec {
            epsilon: epsilon as i8,
            q,
            mu: mu as u64,
            nu: nu as u64,
            factors,
            poly,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialises")
    }

    pub fn epsilon(&self) -> i8 {
        self.epsilon
    }

    pub fn q(&self) -> &Rational {
        &self.q
    }

    pub fn mu(&self) -> u64 {
        self.mu
    }

    pub fn nu(&self) -> u64 {
        self.nu
    }

    pub fn factors(&self) -> &[FactorSpec] {
        &self.factors
    }

    pub fn poly(&self) -> &PolynomialQ {
        &self.poly
    }

    pub fn with_poly(&self, poly: PolynomialQ) -> Self {
        SeriesSpec {
            poly,
            ..self.clone()
        }
    }

    pub fn with_q(&self, q: Rational) -> Result<Self> {
        if q.is_negative() {
            return Err(invalid("q", format!("must be nonnegative, got {q}")));
        }
        Ok(SeriesSpec { q, ..self.clone() })
    }

    /// Exponent of `x` in term `n`: `mu*n + nu`.
    pub fn exponent(&self, n: u64) -> u64 {
        self.mu * n + self.nu
    }

    /// Net factorial weight `sum_i alpha_i * lambda_i`.
    pub fn factor_weight(&self) -> i64 {
        self.factors.iter().map(|f| f.alpha as i64 * f.lambda).sum()
    }

    pub fn sign(&self, n: u64) -> Rational {
        if self.epsilon < 0 && n % 2 == 1 {
            -Rational::one()
        } else {
            Rational::one()
        }
    }
}

/// `I(q; m) = (m!)^m / (q + (m!)^m)`.
pub fn i_factor(q: &Rational, m: u64, table: &mut FactorialTable) -> Rational {
    if q.is_zero() {
        return Rational::one();
    }
    let big = table.power(m, m as i64);
    &big / (q + &big)
}

/// Exact value of term `n` of `spec` at `x`.
pub fn term_exact(spec: &SeriesSpec, n: u64, x: &Rational) -> Rational {
    term_with_table(spec, n, x, &mut FactorialTable::new())
}

pub(crate) fn term_with_table(
    spec: &SeriesSpec,
    n: u64,
    x: &Rational,
    table: &mut FactorialTable,
) -> Rational {
    let m = spec.exponent(n);
    let poly = spec.poly.eval_at(n);
    if poly.is_zero() || (x.is_zero() && m > 0) {
        return Rational::zero();
    }
    let mut t = spec.sign(n) * i_factor(&spec.q, m, table) * poly;
    for f in &spec.factors {
        t *= table.power(f.argument(n), f.lambda);
    }
    t * rational::pow(x, m as i64)
}

/// Term `n` as an unreduced fraction `(numerator, denominator)`, or `None`
/// when it vanishes. Skips the gcds that [`term_exact`] pays for.
pub(crate) fn term_fraction(
    spec: &SeriesSpec,
    n: u64,
    x: &Rational,
    table: &mut FactorialTable,
) -> Option<(BigInt, BigUint)> {
    let m = spec.exponent(n);
    let poly = spec.poly.eval_at(n);
    if poly.is_zero() || (x.is_zero() && m > 0) {
        return None;
    }
    let mut num = poly.numer().clone();
    let mut den = poly.denom().magnitude().clone();
    if spec.epsilon < 0 && n % 2 == 1 {
        num = -num;
    }
    if !spec.q.is_zero() {
        let big = Pow::pow(table.get(m), m);
        let qd = spec.q.denom().magnitude();
        den *= spec.q.numer().magnitude() + &big * qd;
        num *= BigInt::from(big * qd);
    }
    for f in &spec.factors {
        let e = f.lambda.unsigned_abs();
        if e == 0 {
            continue;
        }
        let block = Pow::pow(table.get(f.argument(n)), e);
        if f.lambda > 0 {
            num *= BigInt::from(block);
        } else {
            den *= block;
        }
    }
    if m > 0 {
        num *= Pow::pow(x.numer(), m);
        den *= Pow::pow(x.denom().magnitude(), m);
    }
    Some((num, den))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    AllOfQp,
    ValuationThreshold,
}

/// Where a series converges in `Q_p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConvergenceDomain {
    pub prime: Prime,
    pub kind: DomainKind,
    /// Present iff `kind` is `ValuationThreshold`: `x` converges iff
    /// `x = 0` or `v_p(x) >= v_min`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_min: Option<i64>,
    /// `sum alpha_i*lambda_i >= mu`: the domain then contains every rational
    /// for all but finitely many primes.
    pub covers_all_rational_points: bool,
}

impl ConvergenceDomain {
    pub fn contains(&self, x: &Rational) -> bool {
        match (self.kind, rational_valuation(x, self.prime)) {
            (DomainKind::AllOfQp, _) | (_, Valuation::Infinite) => true,
            (DomainKind::ValuationThreshold, Valuation::Finite(v)) => v >= self.v_min.unwrap(),
        }
    }
}

pub fn convergence_domain(spec: &SeriesSpec, p: Prime) -> ConvergenceDomain {
    let weight = spec.factor_weight();
    let covers_all_rational_points = weight >= spec.mu as i64;
    if !spec.q.is_zero() {
        return ConvergenceDomain {
            prime: p,
            kind: DomainKind::AllOfQp,
            v_min: None,
            covers_all_rational_points,
        };
    }
    // |x|_p < p^r with r = weight / ((p-1) mu); the smallest integer
    // valuation strictly above -r is floor(-r) + 1.
    let denom = (p.get() as i64 - 1) * spec.mu as i64;
    let v_min = (-weight).div_euclid(denom) + 1;
    ConvergenceDomain {
        prime: p,
        kind: DomainKind::ValuationThreshold,
        v_min: Some(v_min),
        covers_all_rational_points,
    }
}

/// Radius `base^(1/root)` kept exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Radius {
    pub base: Rational,
    pub root: u64,
}

impl Radius {
    fn simplified(base: Rational, root: u64) -> Self {
        let mut base = base;
        let mut root = root;
        let mut d = root;
        while d > 1 {
            if root.is_multiple_of(d) {
                if let Some(r) = exact_root(&base, d) {
                    base = r;
                    root /= d;
                    d = root;
                    continue;
                }
            }
            d -= 1;
        }
        Radius { base, root }
    }
}

fn exact_root(r: &Rational, d: u64) -> Option<Rational> {
    let d32 = u32::try_from(d).ok()?;
    let root_of = |n: &BigInt| -> Option<BigInt> {
        let c = n.nth_root(d32);
        (num_traits::pow::Pow::pow(&c, d32) == *n).then_some(c)
    };
    Some(Rational::new(root_of(r.numer())?, root_of(r.denom())?))
}

impl fmt::Display for Radius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.root == 1 {
            write!(f, "{}", self.base)
        } else {
            write!(f, "({})^(1/{})", self.base, self.root)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RealClassification {
    ConvergesEverywhere,
    /// Converges for `|x| < rho`.
    ConvergesWithin(Radius),
    DivergesForAllNonzero,
}

impl RealClassification {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            RealClassification::ConvergesEverywhere => {
                serde_json::json!({ "kind": "converges_everywhere" })
            }
            RealClassification::DivergesForAllNonzero => {
                serde_json::json!({ "kind": "diverges_for_all_nonzero_x" })
            }
            RealClassification::ConvergesWithin(r) => serde_json::json!({
                "kind": "converges_within",
                "radius": r.to_string(),
                "radius_base": r.base.to_string(),
                "radius_root": r.root,
            }),
        }
    }
}

/// d'Alembert ratio test over the reals. The regulating factor tends to 1
/// and does not affect the radius; consecutive factorial blocks grow like
/// `n^(sum alpha*lambda) * prod alpha^(alpha*lambda)`.
pub fn real_classify(spec: &SeriesSpec) -> RealClassification {
    if spec.poly.is_zero() {
        return RealClassification::ConvergesEverywhere;
    }
    match spec.factor_weight().signum() {
        1 => RealClassification::DivergesForAllNonzero,
        -1 => RealClassification::ConvergesEverywhere,
        _ => {
            let growth = spec.factors.iter().fold(Rational::one(), |acc, f| {
                let a = rational::int(f.alpha as i64);
                acc * rational::pow(&a, f.alpha as i64 * f.lambda)
            });
            RealClassification::ConvergesWithin(Radius::simplified(growth.recip(), spec.mu))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rational::{frac, int};

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn factorial_series() -> SeriesSpec {
        SeriesSpec::new(
            1,
            int(0),
            1,
            0,
            vec![FactorSpec::new(1, 0, 1)],
            PolynomialQ::one(),
        )
        .unwrap()
    }

    fn exponential(q: Rational) -> SeriesSpec {
        SeriesSpec::new(
            1,
            q,
            1,
            0,
            vec![FactorSpec::new(1, 0, -1)],
            PolynomialQ::one(),
        )
        .unwrap()
    }

    #[test]
    fn validation() {
        let err = SeriesSpec::new(1, int(-1), 1, 0, vec![], PolynomialQ::one()).unwrap_err();
        assert!(matches!(err, Error::InvalidSpec { field: "q", .. }));
        let err = SeriesSpec::new(1, int(0), 0, 0, vec![], PolynomialQ::one()).unwrap_err();
        assert!(matches!(err, Error::InvalidSpec { field: "mu", .. }));
        let err = SeriesSpec::new(2, int(0), 1, 0, vec![], PolynomialQ::one()).unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidSpec {
                field: "epsilon",
                ..
            }
        ));
        let err = SeriesSpec::new(
            1,
            int(0),
            1,
            0,
            vec![FactorSpec::new(0, 0, 1)],
            PolynomialQ::one(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidSpec { field: "alpha", .. }));
    }

    #[test]
    fn json_round_trip_and_schema() {
        let text = r#"{"epsilon":-1,"q":"1/2","mu":2,"nu":1,
            "factors":[{"alpha":1,"beta":3,"lambda":-2}],"poly":["0","-3/4","1"]}"#;
        let spec = SeriesSpec::from_json(text).unwrap();
        assert_eq!(spec.q(), &frac(1, 2));
        assert_eq!(spec.poly().coeffs()[1], frac(-3, 4));
        assert_eq!(SeriesSpec::from_json(&spec.to_json()).unwrap(), spec);
        assert!(SeriesSpec::from_json(
            r#"{"epsilon":1,"q":"-1","mu":1,"nu":0,"factors":[],"poly":["1"]}"#
        )
        .is_err());
        assert!(SeriesSpec::from_json(
            r#"{"epsilon":1,"q":"0","mu":1,"nu":0,"factors":[],"poly":["1"],"x":"2"}"#
        )
        .is_err());
    }

    #[test]
    fn terms() {
        assert_eq!(term_exact(&factorial_series(), 3, &int(1)), int(6));
        // n = 0 with nu = 0, q = 0: product of beta_i!^lambda_i
        let spec = SeriesSpec::new(
            -1,
            int(0),
            2,
            0,
            vec![FactorSpec::new(2, 3, 1), FactorSpec::new(1, 2, -2)],
            PolynomialQ::one(),
        )
        .unwrap();
        assert_eq!(term_exact(&spec, 0, &int(5)), frac(6, 4));
        // I(1; 2) = 4/5, times 1/2!
        assert_eq!(term_exact(&exponential(int(1)), 2, &int(1)), frac(2, 5));
        assert_eq!(term_exact(&exponential(int(1)), 0, &int(0)), frac(1, 2));
        assert_eq!(term_exact(&exponential(int(1)), 1, &int(0)), int(0));
    }

    #[test]
    fn domains() {
        for prime in [2, 3, 5, 7, 11] {
            let d = convergence_domain(&factorial_series(), p(prime));
            assert_eq!(d.kind, DomainKind::ValuationThreshold);
            assert_eq!(d.v_min, Some(0));
            assert!(d.covers_all_rational_points);
        }
        assert_eq!(
            convergence_domain(&exponential(frac(1, 2)), p(7)).kind,
            DomainKind::AllOfQp
        );
        assert_eq!(
            convergence_domain(&exponential(int(0)), p(2)).v_min,
            Some(2)
        );
        assert_eq!(
            convergence_domain(&exponential(int(0)), p(3)).v_min,
            Some(1)
        );
        assert_eq!(
            convergence_domain(&exponential(int(0)), p(5)).v_min,
            Some(1)
        );
        let d = convergence_domain(&exponential(int(0)), p(2));
        assert!(d.contains(&int(4)) && d.contains(&int(0)) && !d.contains(&int(2)));
    }

    #[test]
    fn real_side() {
        assert_eq!(
            real_classify(&exponential(int(1))),
            RealClassification::ConvergesEverywhere
        );
        assert_eq!(
            real_classify(&factorial_series()),
            RealClassification::DivergesForAllNonzero
        );
        let plain =
            SeriesSpec::new(1, int(0), 1, 0, vec![], PolynomialQ::from_ints(&[3, 0, 1])).unwrap();
        assert_eq!(
            real_classify(&plain),
            RealClassification::ConvergesWithin(Radius {
                base: int(1),
                root: 1
            })
        );
        // (2n)!/(n!)^2 x^n: ratio -> 4|x|, radius 1/4
        let central = SeriesSpec::new(
            1,
            int(0),
            1,
            0,
            vec![FactorSpec::new(2, 0, 1), FactorSpec::new(1, 0, -2)],
            PolynomialQ::one(),
        )
        .unwrap();
        assert_eq!(
            real_classify(&central),
            RealClassification::ConvergesWithin(Radius {
                base: frac(1, 4),
                root: 1
            })
        );
        let squared = central.clone();
        let squared = SeriesSpec::new(
            1,
            int(0),
            2,
            0,
            squared.factors().to_vec(),
            PolynomialQ::one(),
        )
        .unwrap();
        assert_eq!(
            real_classify(&squared),
            RealClassification::ConvergesWithin(Radius {
                base: frac(1, 2),
                root: 1
            })
        );
        let cubic = SeriesSpec::new(
            1,
            int(0),
            3,
            0,
            vec![FactorSpec::new(2, 0, 1), FactorSpec::new(1, 0, -2)],
            PolynomialQ::one(),
        )
        .unwrap();
        assert_eq!(real_classify(&cubic).to_json()["radius"], "(1/4)^(1/3)");
    }
}
