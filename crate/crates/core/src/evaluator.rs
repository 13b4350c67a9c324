//! Certified evaluation in `Q_p`.
//!
//! A p-adic series converges iff its terms tend to zero, and by the
//! ultrametric inequality the dropped tail of a convergent series has
//! valuation at least the smallest valuation among its terms. So summing
//! the exact terms below a certified index `n0` gives the value modulo
//! `p^N` as soon as every term from `n0` on has valuation `>= N`.
//!
//! The certificates come from Legendre's formula `v_p(m!) = (m - S_m)/(p-1)`
//! together with `1 <= S_m <= (p-1) * digits_p(m)`.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{
    digit_count, factorial_valuation, padic_reduce_absolute, padic_reduce_fraction, rational,
    rational_valuation, FactorialTable, PadicApprox, Prime, Rational, Valuation,
};
use crate::series_model::{
    convergence_domain, i_factor, term_fraction, term_with_table, DomainKind, SeriesSpec,
};

/// Anything with exact rational terms and a provable tail bound.
pub trait Series: Sync {
    fn term(&self, n: u64) -> Rational;

    /// Terms `0..count`; implementations may share work between terms.
    fn terms(&self, count: u64) -> Vec<Rational> {
        (0..count).map(|n| self.term(n)).collect()
    }

    fn term_valuations(&self, count: u64, p: Prime) -> Vec<Valuation> {
        self.terms(count)
            .iter()
            .map(|t| rational_valuation(t, p))
            .collect()
    }

    /// Some index from which every term has valuation `>= target`. It need
    /// not be the smallest such index; [`tail_index`] refines it.
    /// Terms `0..count` reduced to absolute precision `abs` in `Q_p`.
    fn reduced_terms(&self, count: u64, p: Prime, abs: i64) -> Vec<PadicApprox> {
        self.terms(count)
            .iter()
            .map(|t| padic_reduce_absolute(t, p, abs))
            .collect()
    }

    fn tail_bound(&self, p: Prime, target: i64) -> Result<u64>;
}

/// A [`SeriesSpec`] evaluated at a fixed rational point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesAt {
    spec: SeriesSpec,
    x: Rational,
}

fn rat(n: i64) -> Rational {
    rational::int(n)
}

fn ratio(n: i64, d: i64) -> Rational {
    rational::frac(n, d)
}

impl SeriesAt {
    pub fn new(spec: SeriesSpec, x: Rational) -> Self {
        SeriesAt { spec, x }
    }

    pub fn spec(&self) -> &SeriesSpec {
        &self.spec
    }

    pub fn x(&self) -> &Rational {
        &self.x
    }

    /// Exact `v_p(term(n))` without building the term.
    pub fn exact_valuation(&self, n: u64, p: Prime) -> Valuation {
        let m = self.spec.exponent(n);
        let poly = self.spec.poly().eval_at(n);
        if poly.is_zero() || (self.x.is_zero() && m > 0) {
            return Valuation::Infinite;
        }
        let mut v = rational_valuation(&poly, p).finite().unwrap();
        for f in self.spec.factors() {
            v += f.lambda * factorial_valuation(f.argument(n), p) as i64;
        }
        if m > 0 {
            v += m as i64 * rational_valuation(&self.x, p).finite().unwrap();
        }
        Valuation::Finite(v + self.i_factor_valuation(m, p))
    }

    fn i_factor_valuation(&self, m: u64, p: Prime) -> i64 {
        let q = self.spec.q();
        if q.is_zero() {
            return 0;
        }
        let big = m as i64 * factorial_valuation(m, p) as i64;
        let vq = rational_valuation(q, p).finite().unwrap();
        if big != vq {
            return big - big.min(vq);
        }
        let i = i_factor(q, m, &mut FactorialTable::new());
        rational_valuation(&i, p).finite().unwrap()
    }

    pub fn check_domain(&self, p: Prime) -> Result<()> {
        let domain = convergence_domain(&self.spec, p);
        if domain.contains(&self.x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                x: self.x.to_string(),
                prime: p,
                v_min: domain.v_min.unwrap(),
            })
        }
    }

    /// q = 0 inside the domain: the drift `d = W/(p-1) + mu*v(x)` is positive.
    /// Term `n` has valuation at least `d*n + c0 - sum_{lambda>0} lambda*D(alpha*n+beta)`
    /// with `D` the base-p digit count. On a block `[a, p*a)` this is at least
    /// `R(a) = d*a + c0 - sum lambda*(D(alpha*a+beta) + 1)`, and
    /// `R(p*a) >= R(a)` once `d*a*(p-1) >= sum lambda`, so the first `a` with
    /// both conditions bounds every later block as well.
    fn tail_bound_without_regulator(&self, p: Prime, target: i64, vx: i64, min_c: i64) -> u64 {
        let pm1 = p.get() as i64 - 1;
        let spec = &self.spec;
        let drift = ratio(spec.factor_weight(), pm1) + rat(spec.mu() as i64 * vx);
        debug_assert!(drift.is_positive());
        let c0 = spec
            .factors()
            .iter()
            .fold(rat(spec.nu() as i64 * vx + min_c), |acc, f| {
                acc + ratio(f.lambda * f.beta as i64, pm1)
            });
        let positive: Vec<_> = spec.factors().iter().filter(|f| f.lambda > 0).collect();
        let lambda_plus: i64 = positive.iter().map(|f| f.lambda).sum();
        let block_bound = |a: u64| {
            positive
                .iter()
                .fold(&drift * rat(a as i64) + &c0, |acc, f| {
                    acc - rat(f.lambda * (digit_count(f.argument(a), p) as i64 + 1))
                })
        };
        let target = rat(target);
        let mut a = 1u64;
        loop {
            let stable = &drift * rat(a as i64 * pm1) >= rat(lambda_plus);
            if stable && block_bound(a) >= target {
                return a;
            }
            a *= 2;
        }
    }

    /// q != 0: for `m*v_p(m!) > v_p(q)` the regulator has valuation
    /// `m*v_p(m!) - v_p(q) >= m*(m-p+1)/p - v_p(q)`, which makes the whole
    /// lower bound a quadratic in `n` with positive leading coefficient.
    fn tail_bound_with_regulator(&self, p: Prime, target: i64, vx: i64, min_c: i64) -> u64 {
        let spec = &self.spec;
        let pi = p.get() as i64;
        let pm1 = pi - 1;
        let vq = rational_valuation(spec.q(), p).finite().unwrap();
        let (mu, nu) = (spec.mu() as i64, spec.nu() as i64);
        let negative: Vec<_> = spec.factors().iter().filter(|f| f.lambda < 0).collect();
        let regulator = |m: i64| ratio(m * (m - pi + 1), pi) - rat(vq);
        let bound = |n: i64| {
            let m = mu * n + nu;
            let fact = negative.iter().fold(Rational::zero(), |acc, f| {
                acc + ratio(f.lambda * (f.alpha as i64 * n + f.beta as i64), pm1)
            });
            regulator(m) + fact + rat(min_c + m * vx)
        };
        // g(n) = a2 n^2 + a1 n + c; increasing past the vertex -a1/(2 a2).
        let a2 = ratio(mu * mu, pi);
        let lin = negative.iter().fold(rat(mu * vx), |acc, f| {
            acc + ratio(f.lambda * f.alpha as i64, pm1)
        });
        let a1 = ratio(mu * (2 * nu - pi + 1), pi) + lin;
        let vertex = (-a1 / (a2 * rat(2))).ceil().to_integer();
        let vertex = i64::try_from(vertex).unwrap_or(0).max(0);
        let past_p = (pi - nu + mu - 1).div_euclid(mu).max(0);
        let mut n = vertex.max(past_p);
        let target = rat(target);
        loop {
            if regulator(mu * n + nu).is_positive() && bound(n) >= target {
                return n as u64;
            }
            n += 1;
        }
    }
}

impl Series for SeriesAt {
    fn term(&self, n: u64) -> Rational {
        term_with_table(&self.spec, n, &self.x, &mut FactorialTable::new())
    }

    fn terms(&self, count: u64) -> Vec<Rational> {
        let mut table = FactorialTable::new();
        (0..count)
            .map(|n| term_with_table(&self.spec, n, &self.x, &mut table))
            .collect()
    }

    fn term_valuations(&self, count: u64, p: Prime) -> Vec<Valuation> {
        (0..count).map(|n| self.exact_valuation(n, p)).collect()
    }

    fn reduced_terms(&self, count: u64, p: Prime, abs: i64) -> Vec<PadicApprox> {
        let mut table = FactorialTable::new();
        (0..count)
            .map(
                |n| match term_fraction(&self.spec, n, &self.x, &mut table) {
                    Some((num, den)) => padic_reduce_fraction(&num, &den, p, abs),
                    None => PadicApprox::exact_zero(p),
                },
            )
            .collect()
    }

    fn tail_bound(&self, p: Prime, target: i64) -> Result<u64> {
        if self.spec.poly().is_zero() {
            return Ok(0);
        }
        if self.x.is_zero() {
            return Ok(if self.spec.nu() > 0 { 0 } else { 1 });
        }
        self.check_domain(p)?;
        let vx = rational_valuation(&self.x, p).finite().unwrap();
        let min_c = self.spec.poly().min_coeff_valuation(p).finite().unwrap();
        Ok(if self.spec.q().is_zero() {
            self.tail_bound_without_regulator(p, target, vx, min_c)
        } else {
            self.tail_bound_with_regulator(p, target, vx, min_c)
        })
    }
}

/// Smallest `n0` such that every term from `n0` on has valuation `>= target`.
pub fn tail_index<S: Series + ?Sized>(series: &S, p: Prime, target: i64) -> Result<u64> {
    let certified = series.tail_bound(p, target)?;
    let vals = series.term_valuations(certified, p);
    Ok(vals
        .iter()
        .rposition(|v| !v.is_at_least(target))
        .map_or(0, |i| i as u64 + 1))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvalReport {
    pub value: PadicApprox,
    pub terms_used: u64,
    /// Every dropped term has at least this valuation.
    pub tail_bound_valuation: i64,
    pub guard_digits: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_term_valuations: Option<Vec<Valuation>>,
}

/// Smallest `k` with `p^k >= n`.
fn ceil_log(n: u64, p: Prime) -> i64 {
    let mut k = 0;
    let mut power = 1u128;
    while power < n as u128 {
        power *= p.get() as u128;
        k += 1;
    }
    k
}

/// Sum of the series in `Q_p`, certified modulo `p^precision`.
pub fn eval_padic<S: Series + ?Sized>(series: &S, p: Prime, precision: i64) -> Result<EvalReport> {
    eval_inner(series, p, precision, false)
}

/// [`eval_padic`] that also records the valuation of every summed term.
pub fn eval_padic_traced<S: Series + ?Sized>(
    series: &S,
    p: Prime,
    precision: i64,
) -> Result<EvalReport> {
    eval_inner(series, p, precision, true)
}

fn eval_inner<S: Series + ?Sized>(
    series: &S,
    p: Prime,
    precision: i64,
    trace: bool,
) -> Result<EvalReport> {
    if precision < 1 {
        return Err(Error::InvalidPrecision(precision));
    }
    let n0 = tail_index(series, p, precision)?;
    let guard = ceil_log(n0, p) + 2;
    let working = precision + guard;
    let value = series
        .reduced_terms(n0, p, working)
        .iter()
        .fold(PadicApprox::exact_zero(p), |acc, t| acc.add(t))
        .truncate(precision);
    Ok(EvalReport {
        value,
        terms_used: n0,
        tail_bound_valuation: precision,
        guard_digits: guard,
        per_term_valuations: trace.then(|| series.term_valuations(n0, p)),
    })
}

/// Exact rational sum of terms `0..count`.
pub fn partial_sum<S: Series + ?Sized>(series: &S, count: u64) -> Rational {
    series.terms(count).into_iter().sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayVerdict {
    Decaying,
    NotDecaying,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecayReport {
    pub verdict: DecayVerdict,
    pub certificate: String,
    pub trace: Vec<Valuation>,
}

/// Whether `|term(n)|_p -> 0`. Verdicts other than `Inconclusive` rest on an
/// analytic certificate; the valuation trace up to `n_max` is diagnostic.
pub fn check_term_decay(
    spec: &SeriesSpec,
    x: &Rational,
    p: Prime,
    n_max: u64,
) -> Result<DecayReport> {
    let series = SeriesAt::new(spec.clone(), x.clone());
    let trace: Vec<_> = (0..=n_max).map(|n| series.exact_valuation(n, p)).collect();
    let domain = convergence_domain(spec, p);
    if x.is_zero() || spec.poly().is_zero() || domain.contains(x) {
        let bound = trace.iter().filter_map(|v| v.finite()).max().unwrap_or(0) + 1;
        let n0 = tail_index(&series, p, bound)?;
        return Ok(DecayReport {
            verdict: DecayVerdict::Decaying,
            certificate: format!("every term from n = {n0} on has {p}-adic valuation >= {bound}"),
            trace,
        });
    }
    debug_assert_eq!(domain.kind, DomainKind::ValuationThreshold);
    let (verdict, certificate) = not_decaying_certificate(spec, x, p);
    Ok(DecayReport {
        verdict,
        certificate,
        trace,
    })
}

/// Outside the domain (q = 0, drift `d <= 0`). Pick `r` with `P(r) != 0`;
/// along `n = r + j*p^K` with `K + min v(C_j) > v(P(r))` the polynomial keeps
/// valuation `v(P(r))`, and term valuations are bounded above by
/// `d*n + U0 + sum_{lambda<0} |lambda|*D(alpha*n+beta)`.
fn not_decaying_certificate(spec: &SeriesSpec, x: &Rational, p: Prime) -> (DecayVerdict, String) {
    let pm1 = p.get() as i64 - 1;
    let vx = rational_valuation(x, p).finite().unwrap();
    let poly = spec.poly();
    let min_c = poly.min_coeff_valuation(p).finite().unwrap();
    let top = poly.degree().unwrap() as u64 + 1;
    let (r, vr) = (0..=top)
        .find_map(|r| {
            rational_valuation(&poly.eval_at(r), p)
                .finite()
                .map(|v| (r, v))
        })
        .expect("a nonzero polynomial has a non-root among deg+2 points");
    let k = vr - min_c + 1;
    let drift = ratio(spec.factor_weight(), pm1) + rat(spec.mu() as i64 * vx);
    let u0 = spec
        .factors()
        .iter()
        .fold(rat(spec.nu() as i64 * vx + vr), |acc, f| {
            let beta = f.beta as i64;
            if f.lambda > 0 {
                acc + ratio(f.lambda * (beta - 1), pm1)
            } else {
                acc + ratio(f.lambda * beta, pm1)
            }
        });
    let negative: Vec<_> = spec.factors().iter().filter(|f| f.lambda < 0).collect();
    let progression = format!("n = {r} + j*{p}^{k}, j >= 1");
    if negative.is_empty() {
        return (
            DecayVerdict::NotDecaying,
            format!("along {progression} every term has {p}-adic valuation <= {u0}"),
        );
    }
    if drift.is_negative() {
        let lambda_minus: i64 = negative.iter().map(|f| -f.lambda).sum();
        let mut a = 1u64;
        while -&drift * rat(a as i64 * pm1) < rat(lambda_minus) {
            a *= 2;
        }
        let cap = negative
            .iter()
            .fold(&drift * rat(a as i64) + &u0, |acc, f| {
                acc + rat(-f.lambda * (digit_count(f.argument(a), p) as i64 + 1))
            });
        return (
            DecayVerdict::NotDecaying,
            format!("along {progression}, n >= {a}, every term has {p}-adic valuation <= {cap}"),
        );
    }
    (
        DecayVerdict::Inconclusive,
        "boundary case with factorials in the denominator: no analytic certificate".to_string(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rational::{frac, int};
    use crate::exactnum::{digit_sum, padic_reduce};
    use crate::series_model::{FactorSpec, PolynomialQ};
    use num_bigint::BigUint;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn factorial_series(poly: PolynomialQ) -> SeriesSpec {
        SeriesSpec::new(1, int(0), 1, 0, vec![FactorSpec::new(1, 0, 1)], poly).unwrap()
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
    fn tail_index_factorial_p2() {
        let s = SeriesAt::new(factorial_series(PolynomialQ::one()), int(1));
        assert_eq!(tail_index(&s, p(2), 8).unwrap(), 10);
    }

    #[test]
    fn tail_index_factorial_p3_matches_digit_scan() {
        // oracle: last n whose (n - S_n)/2 falls short of 6, plus one
        let oracle = (0..200u64)
            .filter(|&n| (n - digit_sum(n, p(3))) / 2 < 6)
            .max()
            .unwrap()
            + 1;
        let s = SeriesAt::new(factorial_series(PolynomialQ::one()), int(1));
        assert_eq!(tail_index(&s, p(3), 6).unwrap(), oracle);
        assert_eq!(oracle, 15);
    }

    #[test]
    fn zero_point() {
        let spec = SeriesSpec::new(
            1,
            int(0),
            1,
            2,
            vec![FactorSpec::new(1, 0, 1)],
            PolynomialQ::one(),
        )
        .unwrap();
        let s = SeriesAt::new(spec, int(0));
        assert_eq!(tail_index(&s, p(5), 0).unwrap(), 0);
        assert!(eval_padic(&s, p(5), 10).unwrap().value.is_zero());
    }

    #[test]
    fn factorial_sum_mod_16() {
        let s = SeriesAt::new(factorial_series(PolynomialQ::one()), int(1));
        let r = eval_padic(&s, p(2), 4).unwrap();
        assert_eq!(r.value.residue(), Some(BigUint::from(10u32)));
        assert_eq!(r.value.absolute_digits(), Some(vec![0, 1, 0, 1]));
    }

    #[test]
    fn factorial_times_n_is_minus_one() {
        let s = SeriesAt::new(factorial_series(PolynomialQ::from_ints(&[0, 1])), int(1));
        for prime in [2, 3, 5] {
            let r = eval_padic(&s, p(prime), 10).unwrap();
            assert!(r.value.agrees_with(&padic_reduce(&int(-1), p(prime), 20)));
        }
    }

    #[test]
    fn outside_domain_is_rejected() {
        let s = SeriesAt::new(factorial_series(PolynomialQ::one()), frac(1, 2));
        assert!(matches!(
            eval_padic(&s, p(2), 5),
            Err(Error::OutsideDomain { v_min: 0, .. })
        ));
        assert!(matches!(
            eval_padic(&s, p(3), 0),
            Err(Error::InvalidPrecision(0))
        ));
    }

    #[test]
    fn regulated_series_accepts_large_norms() {
        for prime in [2, 3, 5] {
            let x = rational::pow(&int(prime as i64), -3);
            let s = SeriesAt::new(exponential(frac(1, 2)), x);
            let n0 = tail_index(&s, p(prime), 10).unwrap();
            let r = eval_padic(&s, p(prime), 10).unwrap();
            let exact = padic_reduce_absolute(&partial_sum(&s, n0 + 10), p(prime), 10);
            assert!(r.value.agrees_with(&exact));
        }
    }

    #[test]
    fn exact_valuation_matches_terms() {
        let spec = SeriesSpec::new(
            -1,
            frac(3, 4),
            2,
            1,
            vec![FactorSpec::new(2, 1, 1), FactorSpec::new(1, 3, -1)],
            PolynomialQ::new(vec![frac(1, 6), int(0), int(9)]),
        )
        .unwrap();
        for x in [int(1), frac(2, 9), int(6)] {
            let s = SeriesAt::new(spec.clone(), x);
            for prime in [2, 3, 5, 7] {
                let from_terms: Vec<_> = s
                    .terms(12)
                    .iter()
                    .map(|t| rational_valuation(t, p(prime)))
                    .collect();
                assert_eq!(s.term_valuations(12, p(prime)), from_terms);
            }
        }
    }

    #[test]
    fn decay_verdicts() {
        let spec = factorial_series(PolynomialQ::one());
        assert_eq!(
            check_term_decay(&spec, &int(1), p(5), 60).unwrap().verdict,
            DecayVerdict::Decaying
        );
        let r = check_term_decay(&spec, &frac(1, 2), p(2), 60).unwrap();
        assert_eq!(r.verdict, DecayVerdict::NotDecaying);
        // v_2(n! / 2^n) = -S_n
        for (n, v) in r.trace.iter().enumerate() {
            assert_eq!(*v, Valuation::Finite(-(digit_sum(n as u64, p(2)) as i64)));
        }
        assert_eq!(
            check_term_decay(&spec, &int(0), p(2), 10).unwrap().verdict,
            DecayVerdict::Decaying
        );
        // exp at |x|_2 = 1/2 sits on the boundary with a factorial in the denominator
        let exp = exponential(int(0));
        assert_eq!(
            check_term_decay(&exp, &int(2), p(2), 40).unwrap().verdict,
            DecayVerdict::Inconclusive
        );
        assert_eq!(
            check_term_decay(&exp, &int(1), p(3), 40).unwrap().verdict,
            DecayVerdict::NotDecaying
        );
    }
}
