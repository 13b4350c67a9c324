use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;

use padic_series::evaluator::{eval_padic, partial_sum, Series, SeriesAt};
use padic_series::exactnum::rational::{self, frac, int};
use padic_series::exactnum::{factorial_valuation, padic_reduce_absolute, rational_valuation};
use padic_series::series_model::{convergence_domain, FactorSpec, PolynomialQ, SeriesSpec};
use padic_series::telescope::{verify_rising_identity, TelescopedSeries};
use padic_series::ukvk::{general_family, solve_pair};
use padic_series::{Prime, Rational, Valuation};

const SMALL_PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

fn prime() -> impl Strategy<Value = Prime> {
    prop::sample::select(&SMALL_PRIMES[..]).prop_map(|p| Prime::new(p).unwrap())
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-60i64..60, 1i64..40).prop_map(|(n, d)| frac(n, d))
}

fn factor(lambdas: Vec<i64>) -> impl Strategy<Value = FactorSpec> {
    (1u64..=2, 0u64..=3, prop::sample::select(lambdas))
        .prop_map(|(a, b, l)| FactorSpec::new(a, b, l))
}

fn poly(max_degree: usize) -> impl Strategy<Value = PolynomialQ> {
    prop::collection::vec(-5i64..=5, 1..=max_degree + 1).prop_map(|c| PolynomialQ::from_ints(&c))
}

/// Without `general`, only the `q = 0`, `lambda > 0` polynomial family.
fn spec(general: bool) -> impl Strategy<Value = SeriesSpec> {
    let (q, lambdas) = if general {
        (
            prop::sample::select(vec![int(0), int(1), frac(1, 2), int(3)]).boxed(),
            vec![-1, 1, 2],
        )
    } else {
        (Just(int(0)).boxed(), vec![1, 2])
    };
    (
        prop::sample::select(vec![1i64, -1]),
        q,
        1i64..=3,
        0i64..=2,
        prop::collection::vec(factor(lambdas), 0..=2),
        poly(3),
    )
        .prop_map(|(e, q, mu, nu, f, p)| SeriesSpec::new(e, q, mu, nu, f, p).unwrap())
}

/// A point of the closed domain: `p^t * unit`.
fn point_in(spec: &SeriesSpec, p: Prime, unit: &Rational, extra: i64) -> Rational {
    let d = convergence_domain(spec, p);
    let t = d.v_min.unwrap_or(0).max(0) + extra;
    unit * rational::pow(&Rational::from_integer(p.as_bigint()), t)
}

fn unit_for(p: Prime) -> impl Strategy<Value = Rational> {
    prop::sample::select(vec![int(1), int(-1), frac(2, 3), frac(-7, 5), frac(11, 13)])
        .prop_filter("unit", move |u| {
            rational_valuation(u, p) == Valuation::Finite(0)
        })
}

fn brute_factorial_valuation(m: u64, p: u64) -> u64 {
    (1..=m)
        .map(|mut i| {
            let mut v = 0;
            while i % p == 0 {
                i /= p;
                v += 1;
            }
            v
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn legendre_matches_brute_force(m in 0u64..3000, p in prime()) {
        prop_assert_eq!(factorial_valuation(m, p), brute_factorial_valuation(m, p.get()));
    }

    #[test]
    fn valuation_is_additive(a in small_rational(), b in small_rational(), p in prime()) {
        prop_assume!(!a.is_zero() && !b.is_zero());
        prop_assert_eq!(rational_valuation(&(&a * &b), p), rational_valuation(&a, p) + rational_valuation(&b, p));
        let sum = &a + &b;
        prop_assert!(rational_valuation(&sum, p) >= rational_valuation(&a, p).min(rational_valuation(&b, p)));
    }

    #[test]
    fn reduction_is_a_ring_map(a in small_rational(), b in small_rational(), p in prime(), n in 1i64..12) {
        let ra = padic_reduce_absolute(&a, p, n + 4);
        let rb = padic_reduce_absolute(&b, p, n + 4);
        let sum = padic_reduce_absolute(&(&a + &b), p, n);
        prop_assert!(ra.add(&rb).truncate(n).agrees_with(&sum));
        let prod = padic_reduce_absolute(&(&a * &b), p, n);
        // products lose absolute precision by the valuation of the other factor
        let guard = 4 + rational_valuation(&a, p).finite().unwrap_or(0).abs() + rational_valuation(&b, p).finite().unwrap_or(0).abs();
        let ra = padic_reduce_absolute(&a, p, n + guard);
        let rb = padic_reduce_absolute(&b, p, n + guard);
        prop_assert!(ra.mul(&rb).truncate(n).agrees_with(&prod));
    }

    #[test]
    fn rational_text_round_trips(r in small_rational(), big in any::<i64>()) {
        prop_assert_eq!(rational::parse(&r.to_string()).unwrap(), r);
        let r = Rational::new(BigInt::from(big) * BigInt::from(big), BigInt::from(7));
        prop_assert_eq!(rational::parse(&r.to_string()).unwrap(), r);
    }

    #[test]
    fn rising_identity(mu in 0u64..=6, nu in 0u64..=6, n in 0u64..=12) {
        prop_assert!(verify_rising_identity(mu, nu, n));
    }

    #[test]
    fn exact_valuations_match_terms(s in spec(true), p in prime(), x in small_rational()) {
        prop_assume!(!x.is_zero());
        let series = SeriesAt::new(s, x);
        for (n, t) in series.terms(10).iter().enumerate() {
            prop_assert_eq!(series.exact_valuation(n as u64, p), rational_valuation(t, p), "n = {}", n);
        }
    }

    #[test]
    fn telescoped_partial_sums_are_exact(s in spec(true), a in poly(3), x in small_rational(), count in 0u64..12) {
        let t = TelescopedSeries::new(&s, a, x);
        prop_assert_eq!(partial_sum(&t, count), t.partial_sum_closed_form(count));
    }

    #[test]
    fn general_family_is_linear(
        c in prop::collection::vec(small_rational(), 1..=6),
        d in prop::collection::vec(small_rational(), 6),
        lambda in small_rational(),
    ) {
        let d = &d[..c.len()];
        let combo: Vec<Rational> = c.iter().zip(d).map(|(a, b)| &lambda * a + b).collect();
        let (c0, sc) = general_family(&c).unwrap();
        let (d0, sd) = general_family(d).unwrap();
        prop_assert_eq!(general_family(&combo).unwrap(), (&lambda * c0 + d0, &lambda * sc + sd));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// The certified index is sound: the next fifty terms all vanish mod p^N,
    /// and for `q = 0` the exact longer partial sum reduces to the same value.
    #[test]
    fn certification_is_sound(s in spec(true), p in prime(), extra in 0i64..2, n in 1i64..8, seed in any::<u64>()) {
        let units = [int(1), int(-1), frac(2, 3), frac(-7, 5), frac(11, 13)];
        let unit = units.iter().cycle().skip(seed as usize % 5).find(|u| rational_valuation(u, p) == Valuation::Finite(0)).unwrap();
        let x = point_in(&s, p, unit, extra);
        let series = SeriesAt::new(s, x);
        let report = match eval_padic(&series, p, n) {
            Ok(r) => r,
            // boundary points of a non-polynomial family can diverge
            Err(_) => return Ok(()),
        };
        let n0 = report.terms_used;
        let tail = series.term_valuations(n0 + 50, p);
        prop_assert!(tail[n0 as usize..].iter().all(|v| v.is_at_least(n)));
        if series.spec().q().is_zero() {
            let longer = partial_sum(&series, n0 + 20);
            prop_assert!(report.value.agrees_with(&padic_reduce_absolute(&longer, p, n)));
        }
    }

    #[test]
    fn telescoped_sums_agree_in_q_p(s in spec(false), a in poly(3), p in prime(), unit in unit_for(Prime::new(7).unwrap())) {
        let x = point_in(&s, p, &unit, 0);
        prop_assume!(rational_valuation(&unit, p) == Valuation::Finite(0));
        let t = TelescopedSeries::new(&s, a, x);
        let report = eval_padic(&t, p, 8).unwrap();
        prop_assert!(report.value.agrees_with(&padic_reduce_absolute(t.rhs(), p, 8)));
    }
}

#[test]
fn pairs_hold_p_adically_up_to_twelve() {
    for k in 1..=12u64 {
        let pair = solve_pair(k).unwrap();
        assert!(pair.identity_holds());
        let mut coeffs = vec![pair.u.clone()];
        coeffs.resize(k as usize, int(0));
        coeffs.push(int(1));
        let spec = SeriesSpec::new(
            1,
            int(0),
            1,
            0,
            vec![FactorSpec::new(1, 0, 1)],
            PolynomialQ::new(coeffs),
        )
        .unwrap();
        let series = SeriesAt::new(spec, int(1));
        for p in [2u64, 3, 5] {
            let p = Prime::new(p).unwrap();
            let got = eval_padic(&series, p, 10).unwrap().value;
            assert!(
                got.agrees_with(&padic_reduce_absolute(&pair.v, p, 10)),
                "k = {k}, p = {p}"
            );
        }
    }
}
