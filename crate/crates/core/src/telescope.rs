//! Telescoping summation.
//!
//! For a carrier spec with polynomial `A` put `K(n) = I(q; mu*n+nu) * F(n) * A(n) * x^(mu*n+nu)`,
//! `F(n) = prod ((alpha_i*n+beta_i)!)^lambda_i`. The telescoped series has terms
//!
//! ```text
//! T(n) = eps^n * K(n+1) - eps^(n+1) * K(n)
//! ```
//!
//! so partial sums collapse to `H(N) - H(0)` with `H(n) = eps^(n+1) K(n)`, and
//! wherever `K(n) -> 0` the sum is `-eps * K(0)`. For `q = 0` and `lambda_i >= 0`
//! the bracket is a polynomial in `n` and the series is an ordinary spec.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evaluator::{eval_padic, Series, SeriesAt};
use crate::exactnum::{
    factorial, padic_reduce_absolute, rational, rational_valuation, rising_factorial,
    FactorialTable, PadicApprox, Prime, Rational, Valuation,
};
use crate::linalg::{solve_any, Matrix};
use crate::par::{self, Execution};
use crate::series_model::{term_with_table, PolynomialQ, SeriesSpec};

/// `((M)!)^M == ((m)!)^m * ((m)!)^mu * ((m+1)_mu)^M` with `m = mu*n+nu`, `M = m + mu`.
pub fn verify_rising_identity(mu: u64, nu: u64, n: u64) -> bool {
    let m = mu * n + nu;
    let big_m = m + mu;
    let pow = |b: &BigUint, e: u64| num_traits::pow::Pow::pow(b, e);
    let fm = factorial(m);
    let lhs = pow(&factorial(big_m), big_m);
    let rhs = pow(&fm, m) * pow(&fm, mu) * pow(&rising_factorial(m, mu), big_m);
    lhs == rhs
}

fn int(n: u64) -> Rational {
    rational::int(n as i64)
}

/// `prod_i ((alpha_i*n + beta_i + 1)_(alpha_i))^lambda_i` as a polynomial in `n`.
fn rising_block(base: &SeriesSpec) -> PolynomialQ {
    base.factors().iter().fold(PolynomialQ::one(), |acc, f| {
        let block = (1..=f.alpha).fold(PolynomialQ::one(), |b, j| {
            &b * &PolynomialQ::linear(int(f.alpha), int(f.beta + j))
        });
        &acc * &block.pow(f.lambda as u32)
    })
}

fn require_polynomial_path(base: &SeriesSpec) -> Result<()> {
    if !base.q().is_zero() {
        return Err(Error::NotPolynomial(format!(
            "q = {} is nonzero; use the term-function telescoping",
            base.q()
        )));
    }
    if let Some(f) = base.factors().iter().find(|f| f.lambda < 0) {
        return Err(Error::NotPolynomial(format!(
            "factor ({}n+{})! has lambda = {} and would put rising factorials in a \
             denominator; use the term-function telescoping",
            f.alpha, f.beta, f.lambda
        )));
    }
    Ok(())
}

/// `P(n) = prod (alpha_i n + beta_i + 1)_(alpha_i)^lambda_i * x^mu * A(n+1) - eps * A(n)`.
/// The `poly` of `base` is ignored.
pub fn construct_p_from_a(base: &SeriesSpec, a: &PolynomialQ, x: &Rational) -> Result<PolynomialQ> {
    require_polynomial_path(base)?;
    let xmu = rational::pow(x, base.mu() as i64);
    let forward = (&rising_block(base) * &a.shift(&Rational::one())).scale(&xmu);
    let back = a.scale(&rational::int(base.epsilon() as i64));
    Ok(&forward - &back)
}

/// Solves `construct_p_from_a(base, A, x) == target` for `A`, trying degrees
/// `0..=deg(target)+1`; `None` when no polynomial generator exists.
pub fn reconstruct_generator(
    base: &SeriesSpec,
    target: &PolynomialQ,
    x: &Rational,
) -> Result<Option<PolynomialQ>> {
    require_polynomial_path(base)?;
    let Some(deg) = target.degree() else {
        return Ok(Some(PolynomialQ::zero()));
    };
    for eta in 0..=deg + 1 {
        let columns: Vec<PolynomialQ> = (0..=eta)
            .map(|j| construct_p_from_a(base, &PolynomialQ::monomial(Rational::one(), j), x))
            .collect::<Result<_>>()?;
        let rows = columns
            .iter()
            .filter_map(PolynomialQ::degree)
            .max()
            .unwrap_or(0)
            .max(deg)
            + 1;
        let mut m = Matrix::zeros(rows, eta + 1);
        for (j, col) in columns.iter().enumerate() {
            for i in 0..rows {
                m.set(i, j, col.coeff(i));
            }
        }
        let rhs: Vec<_> = (0..rows).map(|i| target.coeff(i)).collect();
        if let Some(a) = solve_any(&m, &rhs)? {
            return Ok(Some(PolynomialQ::new(a)));
        }
    }
    Ok(None)
}

/// A telescoped series built from a carrier spec and a generator `A` at a point `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TelescopedSeries {
    base: SeriesSpec,
    x: Rational,
    effective_p: Option<PolynomialQ>,
    rhs: Rational,
}

impl TelescopedSeries {
    /// `base` supplies eps, q, mu, nu and the factors; its `poly` is replaced by `generator`.
    pub fn new(base: &SeriesSpec, generator: PolynomialQ, x: Rational) -> Self {
        let base = base.with_poly(generator);
        let effective_p = construct_p_from_a(&base, base.poly(), &x).ok();
        let rhs = general_rhs(&base, &x);
        TelescopedSeries {
            base,
            x,
            effective_p,
            rhs,
        }
    }

    pub fn base(&self) -> &SeriesSpec {
        &self.base
    }

    pub fn generator(&self) -> &PolynomialQ {
        self.base.poly()
    }

    pub fn x(&self) -> &Rational {
        &self.x
    }

    /// The polynomial bracket, present on the `q = 0`, `lambda >= 0` path.
    pub fn effective_p(&self) -> Option<&PolynomialQ> {
        self.effective_p.as_ref()
    }

    /// The telescoped series as an ordinary spec, when the bracket is a polynomial.
    pub fn as_spec(&self) -> Option<SeriesSpec> {
        self.effective_p.clone().map(|p| self.base.with_poly(p))
    }

    /// Carrier series `sum eps^n K(n)`; it controls every valuation here.
    pub fn carrier(&self) -> SeriesAt {
        SeriesAt::new(self.base.clone(), self.x.clone())
    }

    /// `H(n) = eps^(n+1) K(n)`.
    pub fn boundary(&self, n: u64) -> Rational {
        let t = term_with_table(&self.base, n, &self.x, &mut FactorialTable::new());
        t * rational::int(self.base.epsilon() as i64)
    }

    /// Exact `sum_{n < count} T(n)` from the two surviving boundary blocks.
    pub fn partial_sum_closed_form(&self, count: u64) -> Rational {
        self.boundary(count) - self.boundary(0)
    }

    /// `-eps (nu!)^nu / (q + (nu!)^nu) * prod (beta_i!)^lambda_i * A(0) * x^nu`.
    pub fn rhs(&self) -> &Rational {
        &self.rhs
    }

    /// `-eps * prod (beta_i!)^lambda_i * A(0) * x^nu`, the `q = 0` generator form.
    pub fn generated_rhs(&self) -> Option<Rational> {
        self.effective_p.as_ref()?;
        let mut table = FactorialTable::new();
        let beta_part = self.base.factors().iter().fold(Rational::one(), |acc, f| {
            acc * table.power(f.beta, f.lambda)
        });
        Some(
            -rational::int(self.base.epsilon() as i64)
                * beta_part
                * self.generator().eval_at(0)
                * rational::pow(&self.x, self.base.nu() as i64),
        )
    }

    /// Literal bracket form of term `n` with both regulating denominators.
    fn regulated_term(&self, n: u64, table: &mut FactorialTable) -> Rational {
        let spec = &self.base;
        let (mu, q) = (spec.mu(), spec.q());
        let m = spec.exponent(n);
        let big_m = m + mu;
        let lead = table.power(m, m as i64);
        let fm = Rational::from_integer(table.get(m).clone().into());
        let rising = Rational::from_integer(rising_factorial(m, mu).into());
        let next_big = table.power(big_m, big_m as i64);
        let (mut blocks, mut rising_blocks) = (Rational::one(), Rational::one());
        for f in spec.factors() {
            blocks *= table.power(f.argument(n), f.lambda);
            let r = Rational::from_integer(rising_factorial(f.argument(n), f.alpha).into());
            rising_blocks *= rational::pow(&r, f.lambda);
        }
        let eps = rational::int(spec.epsilon() as i64);
        let forward = rational::pow(&fm, mu as i64) * rational::pow(&rising, big_m as i64)
            / (q + next_big)
            * rising_blocks
            * spec.poly().eval_at(n + 1)
            * rational::pow(&self.x, mu as i64);
        let back = &eps * spec.poly().eval_at(n) / (q + &lead);
        spec.sign(n) * lead * blocks * (forward - back) * rational::pow(&self.x, m as i64)
    }
}

fn general_rhs(base: &SeriesSpec, x: &Rational) -> Rational {
    let mut table = FactorialTable::new();
    let nu = base.nu();
    let lead = table.power(nu, nu as i64);
    let beta_part = base.factors().iter().fold(Rational::one(), |acc, f| {
        acc * table.power(f.beta, f.lambda)
    });
    -rational::int(base.epsilon() as i64) * &lead / (base.q() + &lead)
        * beta_part
        * base.poly().eval_at(0)
        * rational::pow(x, nu as i64)
}

impl Series for TelescopedSeries {
    fn term(&self, n: u64) -> Rational {
        self.terms(n + 1).pop().unwrap()
    }

    fn terms(&self, count: u64) -> Vec<Rational> {
        match self.as_spec() {
            Some(spec) => SeriesAt::new(spec, self.x.clone()).terms(count),
            None => {
                let mut table = FactorialTable::new();
                (0..count)
                    .map(|n| self.regulated_term(n, &mut table))
                    .collect()
            }
        }
    }

    fn term_valuations(&self, count: u64, p: Prime) -> Vec<Valuation> {
        match self.as_spec() {
            Some(spec) => SeriesAt::new(spec, self.x.clone()).term_valuations(count, p),
            None => self
                .terms(count)
                .iter()
                .map(|t| rational_valuation(t, p))
                .collect(),
        }
    }

    fn reduced_terms(&self, count: u64, p: Prime, abs: i64) -> Vec<PadicApprox> {
        match self.as_spec() {
            Some(spec) => SeriesAt::new(spec, self.x.clone()).reduced_terms(count, p, abs),
            None => self
                .terms(count)
                .iter()
                .map(|t| padic_reduce_absolute(t, p, abs))
                .collect(),
        }
    }

    /// `v(T(n)) >= min(v(K(n)), v(K(n+1)))`, so the carrier's bound carries over.
    fn tail_bound(&self, p: Prime, target: i64) -> Result<u64> {
        self.carrier().tail_bound(p, target)
    }
}

pub fn telescoped_sum(t: &TelescopedSeries) -> Rational {
    t.rhs().clone()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TelescopeCheck {
    pub prime: Prime,
    pub precision: i64,
    pub terms_used: u64,
    pub value: PadicApprox,
    pub expected: PadicApprox,
    pub congruent: bool,
}

/// Evaluates the telescoped series in `Q_p` and compares with the rational sum.
pub fn verify_telescoping(
    t: &TelescopedSeries,
    p: Prime,
    precision: i64,
) -> Result<TelescopeCheck> {
    let report = eval_padic(t, p, precision)?;
    let expected = padic_reduce_absolute(t.rhs(), p, precision);
    Ok(TelescopeCheck {
        prime: p,
        precision,
        terms_used: report.terms_used,
        congruent: report.value.agrees_with(&expected),
        value: report.value,
        expected,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimeFailure {
    pub prime: Prime,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdelicAssignment {
    #[serde(with = "rational::text")]
    pub rational_sum: Rational,
    pub verified_primes: Vec<Prime>,
    pub failures: Vec<PrimeFailure>,
}

impl AdelicAssignment {
    /// The value assigned by adelic summation: present only if no prime failed.
    pub fn assigned(&self) -> Option<&Rational> {
        self.failures.is_empty().then_some(&self.rational_sum)
    }
}

pub fn adelic_sum_assignment(
    t: &TelescopedSeries,
    primes: &[Prime],
    precision: i64,
    mode: Execution,
) -> AdelicAssignment {
    let results = par::map(primes.to_vec(), mode, |p| {
        (p, verify_telescoping(t, p, precision))
    });
    let mut verified_primes = Vec::new();
    let mut failures = Vec::new();
    for (prime, r) in results {
        match r {
            Ok(c) if c.congruent => verified_primes.push(prime),
            Ok(c) => failures.push(PrimeFailure {
                prime,
                reason: format!(
                    "series gives {} but the rational sum gives {}",
                    c.value, c.expected
                ),
            }),
            Err(e) => failures.push(PrimeFailure {
                prime,
                reason: e.to_string(),
            }),
        }
    }
    AdelicAssignment {
        rational_sum: t.rhs().clone(),
        verified_primes,
        failures,
    }
}
