//! Adelic checks over finitely many primes.
//!
//! An adele is stored as a sketch: its components at `p <= P_max` plus the
//! set of primes where the component leaves `Z_p`. Exceptional sets come
//! from denominator factorisations, never from sampling.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evaluator::{eval_padic, tail_index, Series, SeriesAt};
use crate::exactnum::{
    padic_reduce_absolute, primes_up_to, rational, rational_valuation, rising_factorial,
    FactorialTable, PadicApprox, Prime, Rational, Valuation,
};
use crate::par::{self, Execution};
use crate::series_model::{FactorSpec, PolynomialQ, SeriesSpec};
use crate::telescope::TelescopedSeries;

/// Sum of the H-series: `-(nu!)^(nu-1) / (q + (nu!)^nu) * x^nu`.
pub fn h_series_sum(mu: u64, nu: u64, q: &Rational, x: &Rational) -> Result<Rational> {
    e_family(1, q.clone(), mu, nu)?;
    let mut table = FactorialTable::new();
    let lead = table.power(nu, nu as i64);
    Ok(-table.power(nu, nu as i64 - 1) / (q + lead) * rational::pow(x, nu as i64))
}

/// `sum eps^n I(q; mu*n+nu) x^(mu*n+nu) / (mu*n+nu)!`.
pub fn e_family(epsilon: i64, q: Rational, mu: u64, nu: u64) -> Result<SeriesSpec> {
    SeriesSpec::new(
        epsilon,
        q,
        mu as i64,
        nu as i64,
        vec![FactorSpec::new(mu, nu, -1)],
        PolynomialQ::one(),
    )
}

/// The H-series as the telescoped E-family with generator 1.
pub fn h_series(mu: u64, nu: u64, q: &Rational, x: &Rational) -> Result<TelescopedSeries> {
    let carrier = e_family(1, q.clone(), mu, nu)?;
    Ok(TelescopedSeries::new(
        &carrier,
        PolynomialQ::one(),
        x.clone(),
    ))
}

/// Term `n` of the H-series written out block by block.
pub fn h_term(mu: u64, nu: u64, q: &Rational, x: &Rational, n: u64) -> Rational {
    let mut table = FactorialTable::new();
    let m = mu * n + nu;
    let big_m = m + mu;
    let fm = Rational::from_integer(table.get(m).clone().into());
    let rising = Rational::from_integer(rising_factorial(m, mu).into());
    let forward = rational::pow(&fm, mu as i64) * rational::pow(&rising, big_m as i64 - 1)
        / (q + table.power(big_m, big_m as i64))
        * rational::pow(x, mu as i64);
    let back = Rational::one() / (q + table.power(m, m as i64));
    rational::pow(&fm, m as i64 - 1) * (forward - back) * rational::pow(x, m as i64)
}

/// Primes `p <= p_max` dividing the reduced denominator of `r`.
pub fn exceptional_primes_of(r: &Rational, p_max: u64) -> Vec<Prime> {
    primes_up_to(p_max)
        .into_iter()
        .filter(|&p| !rational_valuation(r, p).is_at_least(0))
        .collect()
}

fn is_integral(a: &PadicApprox) -> bool {
    a.is_zero() || a.valuation() >= 0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Pass,
    Mismatch,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HPrimeRow {
    pub prime: Prime,
    pub status: RowStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<PadicApprox>,
    pub expected: PadicApprox,
    /// Component lies in `Z_p`; required outside the exceptional set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integral: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HSeriesReport {
    pub mu: u64,
    pub nu: u64,
    #[serde(with = "rational::text")]
    pub q: Rational,
    #[serde(with = "rational::text")]
    pub x: Rational,
    pub precision: i64,
    #[serde(with = "rational::text")]
    pub sum: Rational,
    pub exceptional_primes: Vec<Prime>,
    pub rows: Vec<HPrimeRow>,
}

impl HSeriesReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.status == RowStatus::Pass)
    }
}

/// Evaluates the H-series in every `Q_p` requested and compares it with its
/// rational sum; outside the exceptional set of the sum the component must
/// also be integral.
pub fn h_series_cross_check(
    mu: u64,
    nu: u64,
    q: &Rational,
    x: &Rational,
    primes: &[Prime],
    precision: i64,
    mode: Execution,
) -> Result<HSeriesReport> {
    let sum = h_series_sum(mu, nu, q, x)?;
    let series = h_series(mu, nu, q, x)?;
    let p_max = primes.iter().map(|p| p.get()).max().unwrap_or(2);
    let exceptional_primes = exceptional_primes_of(&sum, p_max);
    let rows = par::map(primes.to_vec(), mode, |p| {
        let expected = padic_reduce_absolute(&sum, p, precision);
        match eval_padic(&series, p, precision) {
            Ok(report) => {
                let congruent = report.value.agrees_with(&expected);
                let integral = is_integral(&report.value);
                let ok = congruent && (integral || exceptional_primes.contains(&p));
                HPrimeRow {
                    prime: p,
                    status: if ok {
                        RowStatus::Pass
                    } else {
                        RowStatus::Mismatch
                    },
                    value: Some(report.value),
                    expected,
                    integral: Some(integral),
                    detail: (!ok).then(|| {
                        if congruent {
                            format!("component is not in Z_{p} although {p} is not exceptional")
                        } else {
                            "series value differs from the rational sum".to_string()
                        }
                    }),
                }
            }
            Err(e) => HPrimeRow {
                prime: p,
                status: RowStatus::Error,
                value: None,
                expected,
                integral: None,
                detail: Some(e.to_string()),
            },
        }
    });
    Ok(HSeriesReport {
        mu,
        nu,
        q: q.clone(),
        x: x.clone(),
        precision,
        sum,
        exceptional_primes,
        rows,
    })
}

/// Finite sketch of the adele of E-series with `q = p^(-s)` at each prime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdeleSketch {
    #[serde(with = "rational::text")]
    pub x: Rational,
    pub prime_bound: u64,
    pub s: u64,
    /// The real component uses `q = 0`; it is defined for every real `x` and not evaluated.
    pub real_slot: &'static str,
    pub per_prime_values: BTreeMap<Prime, PadicApprox>,
    pub exceptional_primes: Vec<Prime>,
    /// Primes where some term can exceed norm 1: those dividing the denominator of `x`.
    pub witness_primes: Vec<Prime>,
    /// Every summed term outside the witness set has valuation `>= s`.
    pub term_bound_holds: bool,
    /// Primes whose evaluation failed, with the reason.
    pub errors: BTreeMap<Prime, String>,
}

impl AdeleSketch {
    /// Exceptional primes all lie in the analytic witness set.
    pub fn witness_covers_exceptions(&self) -> bool {
        self.exceptional_primes
            .iter()
            .all(|p| self.witness_primes.contains(p))
    }
}

#[allow(clippy::too_many_arguments)]
pub fn adelic_e_check(
    mu: u64,
    nu: u64,
    epsilon: i64,
    s: u64,
    x: &Rational,
    p_max: u64,
    precision: i64,
    mode: Execution,
) -> Result<AdeleSketch> {
    if s == 0 {
        return Err(Error::InvalidSpec {
            field: "s",
            reason: "must be at least 1".into(),
        });
    }
    e_family(epsilon, Rational::zero(), mu, nu)?;
    let witness_primes = exceptional_primes_of(x, p_max);
    let results = par::map(primes_up_to(p_max), mode, |p| {
        let q = rational::pow(&Rational::from_integer(p.as_bigint()), -(s as i64));
        let spec = e_family(epsilon, q, mu, nu)?;
        let series = SeriesAt::new(spec, x.clone());
        let value = eval_padic(&series, p, precision)?.value;
        let n0 = tail_index(&series, p, precision)?;
        let bound_ok = witness_primes.contains(&p)
            || series
                .term_valuations(n0, p)
                .iter()
                .all(|v| *v == Valuation::Infinite || v.is_at_least(s as i64));
        Ok::<_, Error>((p, value, bound_ok))
    });
    let mut per_prime_values = BTreeMap::new();
    let mut exceptional_primes = Vec::new();
    let mut errors = BTreeMap::new();
    let mut term_bound_holds = true;
    for (p, r) in primes_up_to(p_max).into_iter().zip(results) {
        match r {
            Ok((p, value, bound_ok)) => {
                if !is_integral(&value) {
                    exceptional_primes.push(p);
                }
                term_bound_holds &= bound_ok;
                per_prime_values.insert(p, value);
            }
            Err(e) => {
                errors.insert(p, e.to_string());
            }
        }
    }
    Ok(AdeleSketch {
        x: x.clone(),
        prime_bound: p_max,
        s,
        real_slot: "defined for all real x (q = 0 component, not evaluated)",
        per_prime_values,
        exceptional_primes,
        witness_primes,
        term_bound_holds,
        errors,
    })
}
