use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::adele::e_family;
use crate::error::{Error, Result};
use crate::evaluator::{Series, SeriesAt};
use crate::exactnum::{
    padic_reduce_absolute, rational, rational_valuation, FactorialTable, PadicApprox, Prime,
    Rational, Valuation,
};
use crate::series_model::{FactorSpec, PolynomialQ, SeriesSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IdentityId {
    A1,
    A2,
    A3,
    A4,
    A5,
    A6,
    A7,
    A8,
    A9,
    A10,
    A11,
    A12,
    A13,
    A14,
    A15,
    A16,
}

impl IdentityId {
    pub const ALL: [IdentityId; 16] = [
        IdentityId::A1,
        IdentityId::A2,
        IdentityId::A3,
        IdentityId::A4,
        IdentityId::A5,
        IdentityId::A6,
        IdentityId::A7,
        IdentityId::A8,
        IdentityId::A9,
        IdentityId::A10,
        IdentityId::A11,
        IdentityId::A12,
        IdentityId::A13,
        IdentityId::A14,
        IdentityId::A15,
        IdentityId::A16,
    ];

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.to_string().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One `(alpha, beta)` block of an A16 profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Block {
    pub alpha: u64,
    pub beta: u64,
}

/// Slot values; each identity reads the slots it declares and ignores none silently.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_text")]
    pub q: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta1: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta2: Option<u64>,
    /// `C_1, C_2, ...`
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "opt_text_vec"
    )]
    pub c: Option<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Vec<Block>>,
}

mod opt_text {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::exactnum::{rational, Rational};

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_str(&r.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|t| rational::parse(&t).map_err(serde::de::Error::custom))
            .transpose()
    }
}

mod opt_text_vec {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::exactnum::{rational, Rational};

    pub fn serialize<S: Serializer>(r: &Option<Vec<Rational>>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(v) => s.collect_seq(v.iter().map(|r| r.to_string())),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Rational>>, D::Error> {
        Option::<Vec<String>>::deserialize(d)?
            .map(|v| {
                v.iter()
                    .map(|t| rational::parse(t).map_err(serde::de::Error::custom))
                    .collect()
            })
            .transpose()
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = serde_json::to_string(self).map_err(|_| fmt::Error)?;
        f.write_str(&text)
    }
}

/// Static description of an identity.
#[derive(Debug, Clone, Serialize)]
pub struct FixtureInfo {
    pub id: IdentityId,
    pub slots: &'static [&'static str],
    pub series: &'static str,
    pub sum: &'static str,
    pub admissible: &'static str,
}

pub fn list_identities() -> Vec<FixtureInfo> {
    use IdentityId::*;
    let info = |id, slots, series, sum, admissible| FixtureInfo {
        id,
        slots,
        series,
        sum,
        admissible,
    };
    vec![
        info(A1, &["q"], "(-1)^n [((n+1)!)^n/(q+((n+1)!)^(n+1)) + (n!)^(n-1)/(q+(n!)^n)]", "1/(q+1)", "q > 0 (q = 0 has no p-adic limit)"),
        info(A2, &["c"], "n! [C5 n^5 + C4 n^4 + C3 n^3 + C2 n^2 + C1 n + 9C5 - 2C4 - C3 + C2]", "5C5 - 5C4 + C3 + C2 - C1", "five rationals C1..C5"),
        info(A3, &["beta", "c"], "(n+b)! [C2 n^2 + C1 n - C2 b^2 + C1 b + C2]", "b! (C2 (b+1) - C1)", "b >= 0, two rationals C1, C2"),
        info(A4, &["beta"], "(2n+b)! [4n^2 + 2(2b+3)n + b^2 + 3b + 1]", "-b!", "b >= 0"),
        info(A5, &["beta"], "(2n+b)! [8n^3 - 2(3b^2+9b+8)n - 2b^3 - 9b^2 - 11b - 1]", "b! (2b+5)", "b >= 0"),
        info(A6, &["beta"], "(2n+b)! [4n^2 + 2(2b+3)n + b(b+3)] / 2^n", "-2 b!", "b >= 0"),
        info(A7, &["beta"], "(2n+b)! [8n^3 - 6(b^2+3b+3)n - 2b^3 - 9b^2 - 9b + 4] / 2^n", "2 b! (2b+5)", "b >= 0"),
        info(A8, &["beta"], "((n+b)!)^2 [n^2 + 2(b+1)n + b^2 + 2b]", "-(b!)^2", "b >= 0"),
        info(A9, &["beta"], "((n+b)!)^2 [n^3 - (3b^2+6b+4)n - 2(b+1)^3 + 2b + 3]", "(b!)^2 (2b+3)", "b >= 0"),
        info(A10, &["beta"], "((n+b)!)^2 [n^2 + 2(b+1)n + b^2 + 2b - 1] / 2^n", "-2 (b!)^2", "b >= 0"),
        info(A11, &["beta"], "((n+b)!)^2 [n^3 - (3b^2+6b+5)n - 2(b+1)^3 + 2(2b+3)] / 2^(n+1)", "(b!)^2 (2b+3)", "b >= 0"),
        info(A12, &["beta1", "beta2"], "(n+b1)! (n+b2)! [n^2 + (b1+b2+2)n + (b1+1)(b2+1) - 1]", "-b1! b2!", "b1, b2 >= 0"),
        info(A13, &["beta1", "beta2"], "(n+b1)! (n+b2)! [n^3 - (b1^2+b2^2+b1 b2+3b1+3b2+4)n - (b1+b2+2)(b1 b2+b1+b2) + 1]", "b1! b2! (b1+b2+3)", "b1, b2 >= 0"),
        info(A14, &["beta1", "beta2"], "(-1)^n (n+b1)! (n+b2)! [n^2 + (b1+b2+2)n + (b1+1)(b2+1) + 1]", "b1! b2!", "b1, b2 >= 0"),
        info(A15, &["beta1", "beta2"], "(-1)^n (n+b1)! (n+b2)! [n^3 - (b1^2+b2^2+b1 b2+3b1+3b2+2)n - (b1+b2+2)(b1 b2+b1+b2+2) - 1]", "-b1! b2! (b1+b2+3)", "b1, b2 >= 0"),
        info(A16, &["epsilon", "k", "profile"], "eps^n prod (a_i n+b_i)! [prod (a_i n+b_i+1)_(a_i) (n+1)^k - eps n^k]", "0", "eps = +-1, k >= 1, nonempty profile with a_i >= 1"),
    ]
}

/// Series of one identity instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FixtureSeries {
    /// Instance of the factorial family at a fixed point.
    Family(SeriesAt),
    /// The regulated alternating pair sum of A1.
    Regulated { q: Rational },
}

impl FixtureSeries {
    fn a1_block(q: &Rational, m: u64, table: &mut FactorialTable) -> Rational {
        table.power(m, m as i64 - 1) / (q + table.power(m, m as i64))
    }
}

impl Series for FixtureSeries {
    fn term(&self, n: u64) -> Rational {
        self.terms(n + 1).pop().unwrap()
    }

    fn terms(&self, count: u64) -> Vec<Rational> {
        match self {
            FixtureSeries::Family(s) => s.terms(count),
            FixtureSeries::Regulated { q } => {
                let mut table = FactorialTable::new();
                (0..count)
                    .map(|n| {
                        let t =
                            Self::a1_block(q, n + 1, &mut table) + Self::a1_block(q, n, &mut table);
                        if n % 2 == 1 {
                            -t
                        } else {
                            t
                        }
                    })
                    .collect()
            }
        }
    }

    fn term_valuations(&self, count: u64, p: Prime) -> Vec<Valuation> {
        match self {
            FixtureSeries::Family(s) => s.term_valuations(count, p),
            FixtureSeries::Regulated { .. } => self
                .terms(count)
                .iter()
                .map(|t| rational_valuation(t, p))
                .collect(),
        }
    }

    fn reduced_terms(&self, count: u64, p: Prime, abs: i64) -> Vec<PadicApprox> {
        match self {
            FixtureSeries::Family(s) => s.reduced_terms(count, p, abs),
            FixtureSeries::Regulated { .. } => self
                .terms(count)
                .iter()
                .map(|t| padic_reduce_absolute(t, p, abs))
                .collect(),
        }
    }

    fn tail_bound(&self, p: Prime, target: i64) -> Result<u64> {
        match self {
            FixtureSeries::Family(s) => s.tail_bound(p, target),
            // both blocks are E-series terms, at n and n+1
            FixtureSeries::Regulated { q } => {
                SeriesAt::new(e_family(1, q.clone(), 1, 0)?, Rational::one()).tail_bound(p, target)
            }
        }
    }
}

/// A fully parameterised identity: its series, the claimed sum and, for the
/// `q = 0` family, the carrier used by the telescoping cross-check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub id: IdentityId,
    pub params: Params,
    pub series: FixtureSeries,
    pub claimed: Rational,
}

impl Instance {
    /// The [`SeriesSpec`] (with the printed polynomial) for identities in the factorial family.
    pub fn spec(&self) -> Option<&SeriesSpec> {
        match &self.series {
            FixtureSeries::Family(s) => Some(s.spec()),
            FixtureSeries::Regulated { .. } => None,
        }
    }

    pub fn x(&self) -> Option<&Rational> {
        match &self.series {
            FixtureSeries::Family(s) => Some(s.x()),
            FixtureSeries::Regulated { .. } => None,
        }
    }
}

fn r(n: i64) -> Rational {
    rational::int(n)
}

fn fact(n: u64) -> Rational {
    FactorialTable::new().power(n, 1)
}

fn slot<T: Clone>(id: IdentityId, name: &str, v: &Option<T>) -> Result<T> {
    v.clone().ok_or_else(|| Error::Inadmissible {
        id: id.to_string(),
        reason: format!("missing slot `{name}`"),
    })
}

fn inadmissible(id: IdentityId, reason: impl Into<String>) -> Error {
    Error::Inadmissible {
        id: id.to_string(),
        reason: reason.into(),
    }
}

fn family(
    epsilon: i64,
    nu: u64,
    factors: Vec<FactorSpec>,
    poly: Vec<Rational>,
    x: Rational,
) -> Result<FixtureSeries> {
    let spec = SeriesSpec::new(
        epsilon,
        Rational::zero(),
        1,
        nu as i64,
        factors,
        PolynomialQ::new(poly),
    )?;
    Ok(FixtureSeries::Family(SeriesAt::new(spec, x)))
}

/// Expands the printed A16 bracket.
fn a16_poly(epsilon: i64, k: u64, profile: &[Block]) -> PolynomialQ {
    let rising = profile.iter().fold(PolynomialQ::one(), |acc, b| {
        (1..=b.alpha).fold(acc, |acc, j| {
            &acc * &PolynomialQ::linear(r(b.alpha as i64), r((b.beta + j) as i64))
        })
    });
    let up = &rising * &PolynomialQ::from_ints(&[1, 1]).pow(k as u32);
    &up - &PolynomialQ::monomial(r(epsilon), k as usize)
}

/// Builds the instance of `id` at `params`.
pub fn instantiate(id: IdentityId, params: &Params) -> Result<Instance> {
    use IdentityId::*;
    let beta = || slot(id, "beta", &params.beta).map(|b| b as i64);
    let betas = || {
        Ok::<_, Error>((
            slot(id, "beta1", &params.beta1)? as i64,
            slot(id, "beta2", &params.beta2)? as i64,
        ))
    };
    let one = Rational::one();
    let half = rational::frac(1, 2);
    let (series, claimed) = match id {
        A1 => {
            let q = slot(id, "q", &params.q)?;
            if q < Rational::zero() {
                return Err(inadmissible(id, "q must be nonnegative"));
            }
            if q.is_zero() {
                return Err(inadmissible(
                    id,
                    "at q = 0 the terms reduce to (-1)^n (1/(n+1)! + 1/n!), which do not tend to 0 in any Q_p",
                ));
            }
            let claimed = one.clone() / (&q + &one);
            (FixtureSeries::Regulated { q }, claimed)
        }
        A2 => {
            let c = slot(id, "c", &params.c)?;
            if c.len() != 5 {
                return Err(inadmissible(id, "needs exactly five coefficients C1..C5"));
            }
            let (c1, c2, c3, c4, c5) = (&c[0], &c[1], &c[2], &c[3], &c[4]);
            let c0 = r(9) * c5 - r(2) * c4 - c3 + c2;
            let sum = r(5) * c5 - r(5) * c4 + c3 + c2 - c1;
            let poly = vec![
                c0,
                c1.clone(),
                c2.clone(),
                c3.clone(),
                c4.clone(),
                c5.clone(),
            ];
            (
                family(1, 0, vec![FactorSpec::new(1, 0, 1)], poly, one)?,
                sum,
            )
        }
        A3 => {
            let b = beta()?;
            let c = slot(id, "c", &params.c)?;
            if c.len() < 2 {
                return Err(inadmissible(id, "needs coefficients C1, C2"));
            }
            let (c1, c2) = (&c[0], &c[1]);
            let rb = r(b);
            let constant = -c2 * &rb * &rb + c1 * &rb + c2;
            let poly = vec![constant, c1.clone(), c2.clone()];
            let sum = fact(b as u64) * (c2 * (&rb + &one) - c1);
            (
                family(1, 0, vec![FactorSpec::new(1, b as u64, 1)], poly, one)?,
                sum,
            )
        }
        A4 | A5 | A6 | A7 => {
            let b = beta()?;
            let fb = fact(b as u64);
            let factors = vec![FactorSpec::new(2, b as u64, 1)];
            let (poly, sum, x) = match id {
                A4 => (
                    vec![r(b * b + 3 * b + 1), r(2 * (2 * b + 3)), r(4)],
                    -fb,
                    one,
                ),
                A5 => (
                    vec![
                        r(-2 * b * b * b - 9 * b * b - 11 * b - 1),
                        r(-2 * (3 * b * b + 9 * b + 8)),
                        r(0),
                        r(8),
                    ],
                    fb * r(2 * b + 5),
                    one,
                ),
                A6 => (
                    vec![r(b * (b + 3)), r(2 * (2 * b + 3)), r(4)],
                    -fb * r(2),
                    half,
                ),
                _ => (
                    vec![
                        r(-2 * b * b * b - 9 * b * b - 9 * b + 4),
                        r(-6 * (b * b + 3 * b + 3)),
                        r(0),
                        r(8),
                    ],
                    fb * r(2) * r(2 * b + 5),
                    half,
                ),
            };
            (family(1, 0, factors, poly, x)?, sum)
        }
        A8 | A9 | A10 | A11 => {
            let b = beta()?;
            let fb2 = fact(b as u64) * fact(b as u64);
            let factors = vec![FactorSpec::new(1, b as u64, 2)];
            let b1 = b + 1;
            let (poly, sum, x, nu) = match id {
                A8 => (vec![r(b * b + 2 * b), r(2 * b1), r(1)], -fb2, one, 0),
                A9 => (
                    vec![
                        r(-2 * b1 * b1 * b1 + 2 * b + 3),
                        r(-(3 * b * b + 6 * b + 4)),
                        r(0),
                        r(1),
                    ],
                    fb2 * r(2 * b + 3),
                    one,
                    0,
                ),
                A10 => (
                    vec![r(b * b + 2 * b - 1), r(2 * b1), r(1)],
                    -r(2) * fb2,
                    half,
                    0,
                ),
                _ => (
                    vec![
                        r(-2 * b1 * b1 * b1 + 2 * (2 * b + 3)),
                        r(-(3 * b * b + 6 * b + 5)),
                        r(0),
                        r(1),
                    ],
                    fb2 * r(2 * b + 3),
                    half,
                    1,
                ),
            };
            (family(1, nu, factors, poly, x)?, sum)
        }
        A12 | A13 | A14 | A15 => {
            let (b1, b2) = betas()?;
            let ff = fact(b1 as u64) * fact(b2 as u64);
            let factors = vec![
                FactorSpec::new(1, b1 as u64, 1),
                FactorSpec::new(1, b2 as u64, 1),
            ];
            let s = b1 + b2 + 2;
            let sq = b1 * b1 + b2 * b2 + b1 * b2 + 3 * b1 + 3 * b2;
            let (eps, poly, sum) = match id {
                A12 => (1, vec![r((b1 + 1) * (b2 + 1) - 1), r(s), r(1)], -ff),
                A13 => (
                    1,
                    vec![r(-s * (b1 * b2 + b1 + b2) + 1), r(-(sq + 4)), r(0), r(1)],
                    ff * r(b1 + b2 + 3),
                ),
                A14 => (-1, vec![r((b1 + 1) * (b2 + 1) + 1), r(s), r(1)], ff),
                _ => (
                    -1,
                    vec![
                        r(-s * (b1 * b2 + b1 + b2 + 2) - 1),
                        r(-(sq + 2)),
                        r(0),
                        r(1),
                    ],
                    -ff * r(b1 + b2 + 3),
                ),
            };
            (family(eps, 0, factors, poly, one)?, sum)
        }
        A16 => {
            let eps = slot(id, "epsilon", &params.epsilon)?;
            let k = slot(id, "k", &params.k)?;
            let profile = slot(id, "profile", &params.profile)?;
            if profile.is_empty() || profile.iter().any(|b| b.alpha == 0) {
                return Err(inadmissible(
                    id,
                    "profile must be nonempty with every alpha >= 1",
                ));
            }
            if k == 0 {
                // the generator n^0 leaves the boundary term -eps prod b_i! behind
                return Err(inadmissible(id, "k must be at least 1"));
            }
            let factors = profile
                .iter()
                .map(|b| FactorSpec::new(b.alpha, b.beta, 1))
                .collect();
            let poly = a16_poly(eps, k, &profile);
            (
                family(eps, 0, factors, poly.coeffs().to_vec(), one)?,
                Rational::zero(),
            )
        }
    };
    Ok(Instance {
        id,
        params: params.clone(),
        series,
        claimed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::partial_sum;
    use crate::exactnum::rational::{frac, int};

    fn beta(b: u64) -> Params {
        Params {
            beta: Some(b),
            ..Params::default()
        }
    }

    #[test]
    fn sixteen_listed() {
        let list = list_identities();
        assert_eq!(list.len(), 16);
        assert_eq!(list[0].sum, "1/(q+1)");
        assert_eq!(list[3].sum, "-b!");
        assert_eq!(list[15].slots, &["epsilon", "k", "profile"]);
    }

    #[test]
    fn ids_parse() {
        assert_eq!(IdentityId::parse("a7"), Some(IdentityId::A7));
        assert_eq!(IdentityId::parse("A17"), None);
    }

    #[test]
    fn printed_polynomials_at_beta_zero() {
        // A4 at beta = 0: (2n)! (4n^2 + 6n + 1)
        let a4 = instantiate(IdentityId::A4, &beta(0)).unwrap();
        assert_eq!(
            a4.spec().unwrap().poly(),
            &PolynomialQ::from_ints(&[1, 6, 4])
        );
        assert_eq!(a4.claimed, int(-1));
        let a6 = instantiate(IdentityId::A6, &beta(0)).unwrap();
        assert_eq!(a6.x(), Some(&frac(1, 2)));
        assert_eq!(a6.claimed, int(-2));
        let a8 = instantiate(IdentityId::A8, &beta(0)).unwrap();
        assert_eq!(
            a8.spec().unwrap().poly(),
            &PolynomialQ::from_ints(&[0, 2, 1])
        );
    }

    #[test]
    fn a1_terms() {
        let a1 = instantiate(
            IdentityId::A1,
            &Params {
                q: Some(int(1)),
                ..Params::default()
            },
        )
        .unwrap();
        // n = 0: 1/(1+1) + (0!)^(-1)/(1+1) = 1
        assert_eq!(a1.series.term(0), int(1));
        // n = 1: -(2/(1+4) + 1/2)
        assert_eq!(a1.series.term(1), frac(-9, 10));
        assert!(matches!(
            instantiate(
                IdentityId::A1,
                &Params {
                    q: Some(int(0)),
                    ..Params::default()
                }
            ),
            Err(Error::Inadmissible { .. })
        ));
    }

    #[test]
    fn a16_bracket() {
        let params = Params {
            epsilon: Some(1),
            k: Some(1),
            profile: Some(vec![Block { alpha: 1, beta: 0 }]),
            ..Params::default()
        };
        let a16 = instantiate(IdentityId::A16, &params).unwrap();
        assert_eq!(
            a16.spec().unwrap().poly(),
            &PolynomialQ::from_ints(&[1, 1, 1])
        );
    }

    #[test]
    fn a16_rejects_k0() {
        let params = Params {
            epsilon: Some(1),
            k: Some(0),
            profile: Some(vec![Block { alpha: 1, beta: 2 }]),
            ..Params::default()
        };
        assert!(matches!(
            instantiate(IdentityId::A16, &params),
            Err(Error::Inadmissible { .. })
        ));
    }

    #[test]
    fn missing_slots_are_reported() {
        let err = instantiate(IdentityId::A12, &beta(1)).unwrap_err();
        assert!(err.to_string().contains("beta1"));
    }

    #[test]
    fn a1_real_partial_sums_approach_claim() {
        // the A1 series also converges over the reals; partial sums near 1/(q+1)
        let a1 = instantiate(
            IdentityId::A1,
            &Params {
                q: Some(int(3)),
                ..Params::default()
            },
        )
        .unwrap();
        let s = partial_sum(&a1.series, 12);
        let gap = &s - frac(1, 4);
        assert!(rational::abs(&gap) < frac(1, 1_000_000));
    }
}
