//! The pairs `(u_k, v_k)` with `sum n! (n^k + u_k) = v_k`.
//!
//! A generator `A` of degree `k-1` with `(n+1) A(n+1) - A(n) = n^k + u`
//! telescopes the series to `-A(0)`. Matching the coefficients of
//! `n^0..n^k` gives `k+1` linear equations in `a_0..a_(k-1), u`.

use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{rational, Rational};
use crate::linalg::{solve_square, Matrix};
use crate::series_model::PolynomialQ;

/// Which telescoping equation a pair solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    /// `(n+1) A(n+1) - A(n) = n^k + u` for `sum n! P(n)`, sum `-A(0)`.
    Plain,
    /// `(n+1) A(n+1) + A(n) = n^k + u` for `sum (-1)^n n! P(n)`, sum `A(0)`.
    Alternating,
}

impl PairKind {
    fn back_sign(self) -> i64 {
        match self {
            PairKind::Plain => -1,
            PairKind::Alternating => 1,
        }
    }

    /// Left side of the equation applied to `a`.
    pub fn apply(self, a: &PolynomialQ) -> PolynomialQ {
        let forward = &PolynomialQ::from_ints(&[1, 1]) * &a.shift(&Rational::one());
        &forward + &a.scale(&rational::int(self.back_sign()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairSolution {
    pub k: u64,
    pub kind: PairKind,
    #[serde(with = "rational::text")]
    pub u: Rational,
    #[serde(with = "rational::text")]
    pub v: Rational,
    /// Generator `A_(k-1)`, coefficients ascending.
    pub a: PolynomialQ,
    #[serde(with = "rational::text")]
    pub system_determinant: Rational,
}

impl PairSolution {
    /// Expands the defining equation and checks it coefficient by coefficient.
    pub fn identity_holds(&self) -> bool {
        let rhs = &PolynomialQ::monomial(Rational::one(), self.k as usize)
            + &PolynomialQ::constant(self.u.clone());
        self.kind.apply(&self.a) == rhs
    }
}

/// The coefficient-matching system; columns are `a_0..a_(k-1), u`, rows are powers of `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSystem {
    pub k: u64,
    pub kind: PairKind,
    pub matrix: Matrix,
    pub rhs: Vec<Rational>,
}

pub fn build_system(k: u64, kind: PairKind) -> PairSystem {
    let size = k as usize + 1;
    let mut matrix = Matrix::zeros(size, size);
    for j in 0..k as usize {
        let column = kind.apply(&PolynomialQ::monomial(Rational::one(), j));
        for i in 0..size {
            matrix.set(i, j, column.coeff(i));
        }
    }
    matrix.set(0, k as usize, -Rational::one());
    let mut rhs = vec![Rational::zero(); size];
    rhs[k as usize] = Rational::one();
    PairSystem {
        k,
        kind,
        matrix,
        rhs,
    }
}

/// Solves a (possibly modified) system; a zero determinant is the non-uniqueness alarm.
pub fn solve_system(system: &PairSystem) -> Result<PairSolution> {
    let s = solve_square(&system.matrix, &system.rhs)?;
    let Some(x) = s.solution else {
        return Err(Error::NonUniquePair { k: system.k });
    };
    let k = system.k as usize;
    let a = PolynomialQ::new(x[..k].to_vec());
    let a0 = a.eval_at(0);
    let v = match system.kind {
        PairKind::Plain => -a0,
        PairKind::Alternating => a0,
    };
    Ok(PairSolution {
        k: system.k,
        kind: system.kind,
        u: x[k].clone(),
        v,
        a,
        system_determinant: s.determinant,
    })
}

fn check_k(k: u64) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidSpec {
            field: "k",
            reason: "must be at least 1".into(),
        });
    }
    Ok(())
}

pub fn solve_pair(k: u64) -> Result<PairSolution> {
    check_k(k)?;
    solve_system(&build_system(k, PairKind::Plain))
}

pub fn alternating_pair(k: u64) -> Result<PairSolution> {
    check_k(k)?;
    solve_system(&build_system(k, PairKind::Alternating))
}

/// `(C_0, D)` with `sum n! (C_k n^k + ... + C_1 n + C_0) = D`; `c[j-1]` is `C_j`.
pub fn general_family(c: &[Rational]) -> Result<(Rational, Rational)> {
    let form = general_family_form(c.len() as u64)?;
    Ok((form.c0.apply(c), form.d.apply(c)))
}

/// A linear form `sum_j coeffs[j-1] * C_j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct LinearForm {
    #[serde(with = "rational::text_vec")]
    pub coeffs: Vec<Rational>,
}

impl LinearForm {
    pub fn apply(&self, c: &[Rational]) -> Rational {
        self.coeffs.iter().zip(c).map(|(a, b)| a * b).sum()
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, a) in self.coeffs.iter().enumerate().rev() {
            if a.is_zero() {
                continue;
            }
            let mag = rational::abs(a);
            let sign = if *a < Rational::zero() { "-" } else { "+" };
            match (first, sign) {
                (true, "-") => f.write_str("-")?,
                (true, _) => {}
                (false, s) => write!(f, " {s} ")?,
            }
            first = false;
            if !mag.is_one() {
                write!(f, "{mag}")?;
            }
            write!(f, "C_{}", j + 1)?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// `C_0` and `D` as linear forms in `C_1..C_k`: the coefficients are `u_j` and `v_j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneralFamilyForm {
    pub c0: LinearForm,
    pub d: LinearForm,
}

pub fn general_family_form(k: u64) -> Result<GeneralFamilyForm> {
    let pairs = (1..=k).map(solve_pair).collect::<Result<Vec<_>>>()?;
    Ok(GeneralFamilyForm {
        c0: LinearForm {
            coeffs: pairs.iter().map(|s| s.u.clone()).collect(),
        },
        d: LinearForm {
            coeffs: pairs.iter().map(|s| s.v.clone()).collect(),
        },
    })
}

/// Generator of the general family: `sum_j C_j A_(j-1)`.
pub fn general_generator(c: &[Rational]) -> Result<PolynomialQ> {
    (1..=c.len() as u64).try_fold(PolynomialQ::zero(), |acc, j| {
        let a = solve_pair(j)?.a;
        Ok(&acc + &a.scale(&c[j as usize - 1]))
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeterminantEntry {
    pub k: u64,
    #[serde(with = "rational::text")]
    pub determinant: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UniquenessReport {
    pub determinants: Vec<DeterminantEntry>,
    /// Set when some determinant vanished; names the rationality consequence.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alarm: Option<String>,
}

pub fn uniqueness_evidence(k_max: u64) -> UniquenessReport {
    uniqueness_evidence_for((1..=k_max).map(|k| build_system(k, PairKind::Plain)))
}

/// Same report for arbitrary systems; lets tests feed in a singular one.
pub fn uniqueness_evidence_for(systems: impl IntoIterator<Item = PairSystem>) -> UniquenessReport {
    let mut determinants = Vec::new();
    let mut alarm = None;
    for system in systems {
        let determinant = solve_square(&system.matrix, &system.rhs)
            .map(|s| s.determinant)
            .unwrap_or_else(|_| Rational::zero());
        if determinant.is_zero() && alarm.is_none() {
            alarm = Some(format!(
                "{}; with two pairs (u, v) != (u', v') one would have sum n! = (v - v')/(u - u')",
                Error::NonUniquePair { k: system.k }
            ));
        }
        determinants.push(DeterminantEntry {
            k: system.k,
            determinant,
        });
    }
    UniquenessReport {
        determinants,
        alarm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rational::int;

    #[test]
    fn first_pairs() {
        let expected = [(0, -1), (1, 1), (-1, 1), (-2, -5), (9, 5)];
        for (k, (u, v)) in (1..).zip(expected) {
            let s = solve_pair(k).unwrap();
            assert_eq!((s.u.clone(), s.v.clone()), (int(u), int(v)), "k = {k}");
            assert!(s.identity_holds());
            assert!(!s.system_determinant.is_zero());
        }
    }

    #[test]
    fn k1_determinant_is_unit() {
        let d = solve_pair(1).unwrap().system_determinant;
        assert!(d == int(1) || d == int(-1));
    }

    #[test]
    fn rejects_k0() {
        assert!(solve_pair(0).is_err());
        assert!(alternating_pair(0).is_err());
    }

    #[test]
    fn a2_pattern() {
        let form = general_family_form(5).unwrap();
        assert_eq!(form.c0.to_string(), "9C_5 - 2C_4 - C_3 + C_2");
        assert_eq!(form.d.to_string(), "5C_5 - 5C_4 + C_3 + C_2 - C_1");
        assert_eq!(general_family(&[int(1)]).unwrap(), (int(0), int(-1)));
        assert_eq!(general_family(&vec![int(0); 4]).unwrap(), (int(0), int(0)));
    }

    #[test]
    fn alternating_identities() {
        for k in 1..=6 {
            assert!(alternating_pair(k).unwrap().identity_holds());
        }
    }

    #[test]
    fn singular_system_raises_alarm() {
        let mut broken = build_system(3, PairKind::Plain);
        for i in 0..4 {
            broken.matrix.set(i, 3, Rational::zero());
        }
        assert_eq!(solve_system(&broken), Err(Error::NonUniquePair { k: 3 }));
        let report = uniqueness_evidence_for([build_system(2, PairKind::Plain), broken]);
        assert!(report.alarm.unwrap().contains("(v - v')/(u - u')"));
        assert!(uniqueness_evidence(12).alarm.is_none());
    }
}
