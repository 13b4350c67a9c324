//! The sixteen closed-form factorial-series identities, as parameterised
//! fixtures, with p-adic verification and a symbolic cross-check through the
//! telescoping construction.

mod fixtures;
pub mod grid;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evaluator::eval_padic;
use crate::exactnum::{padic_reduce_absolute, rational, PadicApprox, Prime, Rational};
use crate::par::{self, Execution};
use crate::series_model::PolynomialQ;
use crate::telescope::{construct_p_from_a, reconstruct_generator, TelescopedSeries};
use crate::ukvk::general_generator;

pub use fixtures::{
    instantiate, list_identities, Block, FixtureInfo, FixtureSeries, IdentityId, Instance, Params,
};
pub use grid::{run_grid, CorpusReport, GridConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

/// One `{id, params, prime, N, status}` row of a verification report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationRow {
    pub id: IdentityId,
    pub params: Params,
    pub prime: Prime,
    #[serde(rename = "N")]
    pub precision: i64,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms_used: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<PadicApprox>,
    #[serde(with = "rational::text")]
    pub claimed: Rational,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Checks one instance in `Q_p` for each prime.
pub fn verify_instance(
    inst: &Instance,
    primes: &[Prime],
    precision: i64,
    mode: Execution,
) -> Vec<VerificationRow> {
    par::map(primes.to_vec(), mode, |p| {
        let row = |status, terms_used, value, detail| VerificationRow {
            id: inst.id,
            params: inst.params.clone(),
            prime: p,
            precision,
            status,
            terms_used,
            value,
            claimed: inst.claimed.clone(),
            detail,
        };
        match eval_padic(&inst.series, p, precision) {
            Ok(r) => {
                let expected = padic_reduce_absolute(&inst.claimed, p, precision);
                if r.value.agrees_with(&expected) {
                    row(Status::Pass, Some(r.terms_used), Some(r.value), None)
                } else {
                    let detail = format!(
                        "partial sum {} but claimed sum reduces to {}",
                        r.value, expected
                    );
                    row(
                        Status::Fail,
                        Some(r.terms_used),
                        Some(r.value),
                        Some(detail),
                    )
                }
            }
            Err(e) => row(Status::Fail, None, None, Some(e.to_string())),
        }
    })
}

pub fn verify_identity(
    id: IdentityId,
    params: &Params,
    primes: &[Prime],
    precision: i64,
    mode: Execution,
) -> Result<Vec<VerificationRow>> {
    if precision < 1 {
        return Err(Error::InvalidPrecision(precision));
    }
    let inst = instantiate(id, params)?;
    Ok(verify_instance(&inst, primes, precision, mode))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossValidation {
    pub id: IdentityId,
    pub params: Params,
    /// Generator `A` with `construct_p_from_a(A) ==` the printed polynomial.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<PolynomialQ>,
    pub polynomial_matches: bool,
    pub sum_matches: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CrossValidation {
    pub fn passed(&self) -> bool {
        self.polynomial_matches && self.sum_matches
    }
}

/// Recovers a generator for the printed polynomial and checks that it
/// reproduces both the polynomial and the claimed sum exactly.
pub fn cross_validate_with_telescope(id: IdentityId, params: &Params) -> Result<CrossValidation> {
    let inst = instantiate(id, params)?;
    let (Some(spec), Some(x)) = (inst.spec(), inst.x()) else {
        return Err(Error::Inadmissible {
            id: id.to_string(),
            reason: "the telescoping cross-check covers the q = 0 polynomial family only".into(),
        });
    };
    let printed = spec.poly();
    let generator = match id {
        IdentityId::A2 => Some(general_generator(params.c.as_deref().unwrap_or_default())?),
        IdentityId::A16 => Some(PolynomialQ::monomial(
            Rational::from_integer(1.into()),
            params.k.unwrap_or(0) as usize,
        )),
        _ => reconstruct_generator(spec, printed, x)?,
    };
    let Some(a) = generator else {
        return Ok(CrossValidation {
            id,
            params: params.clone(),
            generator: None,
            polynomial_matches: false,
            sum_matches: false,
            detail: Some(format!("no polynomial generator reproduces {printed}")),
        });
    };
    let rebuilt = construct_p_from_a(spec, &a, x)?;
    let t = TelescopedSeries::new(spec, a.clone(), x.clone());
    let sum = t.generated_rhs().expect("polynomial path");
    let polynomial_matches = &rebuilt == printed;
    let sum_matches = sum == inst.claimed;
    let detail = match (polynomial_matches, sum_matches) {
        (true, true) => None,
        (false, _) => Some(format!(
            "generator gives {rebuilt}, printed polynomial is {printed}"
        )),
        (true, false) => Some(format!(
            "generator sum {sum} differs from claimed {}",
            inst.claimed
        )),
    };
    Ok(CrossValidation {
        id,
        params: params.clone(),
        generator: Some(a),
        polynomial_matches,
        sum_matches,
        detail,
    })
}
