//! Reproducible corpus runs driven by a JSON grid file.

use serde::{Deserialize, Serialize};

use super::{
    cross_validate_with_telescope, instantiate, verify_instance, Block, CrossValidation,
    IdentityId, Instance, Params, Status, VerificationRow,
};
use crate::error::Result;
use crate::exactnum::{rational, Prime, Rational};
use crate::par::{self, Execution};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct A16Grid {
    pub epsilon: Vec<i64>,
    pub k: Vec<u64>,
    /// Each profile lists the `alpha_i`; betas range over the main `beta` grid.
    pub alpha_profiles: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub primes: Vec<Prime>,
    pub precision: i64,
    pub beta: Vec<u64>,
    #[serde(with = "rational::text_vec")]
    pub q: Vec<Rational>,
    /// The fixed `C_1..C_5` tuple.
    #[serde(with = "rational::text_vec")]
    pub c: Vec<Rational>,
    pub a16: A16Grid,
    /// Restrict the run to these identities; all sixteen when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub only: Option<Vec<IdentityId>>,
}

impl GridConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// The grid shipped with the crate.
    pub fn default_grid() -> Self {
        Self::from_json(include_str!("../../data/default_grid.json"))
            .expect("bundled grid is valid")
    }

    fn profiles(&self) -> Vec<Vec<Block>> {
        let mut out = Vec::new();
        for alphas in &self.a16.alpha_profiles {
            let mut partial: Vec<Vec<Block>> = vec![Vec::new()];
            for &alpha in alphas {
                partial = partial
                    .into_iter()
                    .flat_map(|prefix| {
                        self.beta.iter().map(move |&beta| {
                            let mut p = prefix.clone();
                            p.push(Block { alpha, beta });
                            p
                        })
                    })
                    .collect();
            }
            out.extend(partial);
        }
        out
    }

    /// Every parameter tuple of the grid, in a fixed order.
    pub fn parameter_sets(&self) -> Vec<(IdentityId, Params)> {
        use IdentityId::*;
        let mut out = Vec::new();
        let wanted = |id| self.only.as_ref().is_none_or(|o| o.contains(&id));
        for id in IdentityId::ALL.into_iter().filter(|&id| wanted(id)) {
            match id {
                A1 => out.extend(
                    self.q
                        .iter()
                        .map(|q| Params {
                            q: Some(q.clone()),
                            ..Params::default()
                        })
                        .map(|p| (id, p)),
                ),
                A2 => out.push((
                    id,
                    Params {
                        c: Some(self.c.clone()),
                        ..Params::default()
                    },
                )),
                A3 => out.extend(self.beta.iter().map(|&b| {
                    (
                        id,
                        Params {
                            beta: Some(b),
                            c: Some(self.c.iter().take(2).cloned().collect()),
                            ..Params::default()
                        },
                    )
                })),
                A4 | A5 | A6 | A7 | A8 | A9 | A10 | A11 => out.extend(self.beta.iter().map(|&b| {
                    (
                        id,
                        Params {
                            beta: Some(b),
                            ..Params::default()
                        },
                    )
                })),
                A12 | A13 | A14 | A15 => {
                    for &b1 in &self.beta {
                        for &b2 in &self.beta {
                            out.push((
                                id,
                                Params {
                                    beta1: Some(b1),
                                    beta2: Some(b2),
                                    ..Params::default()
                                },
                            ));
                        }
                    }
                }
                A16 => {
                    for &eps in &self.a16.epsilon {
                        for &k in &self.a16.k {
                            for profile in self.profiles() {
                                out.push((
                                    id,
                                    Params {
                                        epsilon: Some(eps),
                                        k: Some(k),
                                        profile: Some(profile),
                                        ..Params::default()
                                    },
                                ));
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Skipped {
    pub id: IdentityId,
    pub params: Params,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusReport {
    pub rows: Vec<VerificationRow>,
    pub cross_validations: Vec<CrossValidation>,
    /// Grid points outside an identity's admissible range.
    pub skipped: Vec<Skipped>,
}

impl CorpusReport {
    pub fn failures(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.status == Status::Fail)
            .count()
            + self
                .cross_validations
                .iter()
                .filter(|c| !c.passed())
                .count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }

    /// Identities that produced at least one passing row.
    pub fn identities_covered(&self) -> Vec<IdentityId> {
        let mut ids: Vec<_> = self.rows.iter().map(|r| r.id).collect();
        ids.dedup();
        ids
    }
}

fn expand(grid: &GridConfig) -> (Vec<Instance>, Vec<Skipped>) {
    let mut instances = Vec::new();
    let mut skipped = Vec::new();
    for (id, params) in grid.parameter_sets() {
        match instantiate(id, &params) {
            Ok(inst) => instances.push(inst),
            Err(e) => skipped.push(Skipped {
                id,
                params,
                reason: e.to_string(),
            }),
        }
    }
    (instances, skipped)
}

/// Verifies every admissible grid point at every grid prime. Rows come out
/// ordered by identity, then parameters, then prime, whatever the mode.
pub fn run_grid(grid: &GridConfig, mode: Execution) -> CorpusReport {
    let (instances, skipped) = expand(grid);
    let work: Vec<(usize, Prime)> = (0..instances.len())
        .flat_map(|i| grid.primes.iter().map(move |&p| (i, p)))
        .collect();
    let rows = par::map(work, mode, |(i, p)| {
        verify_instance(&instances[i], &[p], grid.precision, Execution::Sequential).remove(0)
    });
    let cross_validations = par::map(
        instances.iter().filter(|i| i.spec().is_some()).collect(),
        mode,
        |inst: &Instance| {
            cross_validate_with_telescope(inst.id, &inst.params).unwrap_or_else(|e| {
                CrossValidation {
                    id: inst.id,
                    params: inst.params.clone(),
                    generator: None,
                    polynomial_matches: false,
                    sum_matches: false,
                    detail: Some(e.to_string()),
                }
            })
        },
    );
    CorpusReport {
        rows,
        cross_validations,
        skipped,
    }
}
