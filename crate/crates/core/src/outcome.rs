use serde::Serialize;

use crate::evaluator::{is_feasible, metrics, Metrics, ViolationReport};
use crate::model::{Instance, Placement};

/// A feasible placement together with its metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    #[serde(skip)]
    pub assignment: Vec<usize>,
    pub placement: Placement,
    pub metrics: Metrics,
}

impl Outcome {
    /// Host ids used by the placement.
    pub fn hosts_used<'a>(&self, inst: &'a Instance) -> Vec<&'a str> {
        let mut used: Vec<usize> = self.assignment.clone();
        used.sort_unstable();
        used.dedup();
        used.into_iter()
            .map(|h| inst.hosts[h].id.as_str())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlaceError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("cluster count {k} exceeds the limit {limit}")]
    KTooLarge { k: usize, limit: usize },
    #[error("no host can fit vnf {vnf:?}")]
    NoHostFits { vnf: String },
    #[error("no feasible host assignment for vnf {vnf:?}")]
    NoFeasibleAssignment { vnf: String },
    #[error("placement violates {} constraint(s)", report.violations.len())]
    Infeasible {
        placement: Placement,
        report: ViolationReport,
    },
    #[error("could not find a feasible chromosome to seed the pool")]
    CannotSeedPool,
    #[error(transparent)]
    BruteForce(#[from] crate::evaluator::BruteForceError),
}

/// Runs the authoritative feasibility check on a complete assignment.
pub fn finalize(inst: &Instance, assignment: Vec<usize>) -> Result<Outcome, PlaceError> {
    let report = is_feasible(inst, &assignment);
    if !report.is_empty() {
        return Err(PlaceError::Infeasible {
            placement: inst.placement(&assignment),
            report,
        });
    }
    Ok(Outcome {
        placement: inst.placement(&assignment),
        metrics: metrics(inst, &assignment),
        assignment,
    })
}
