//! Dominance, Pareto fronts and quality indicators over design points, plus
//! a budgeted harness for replaying exploration strategies against a
//! populated store.
//!
//! All objectives are minimized.

mod indicators;
mod objective;
mod pareto;
mod strategy;

use thiserror::Error;

pub use indicators::{adrs, hypervolume_2d};
pub use objective::{scalarize_area, scalarize_area_normalized, Objective, ObjectiveSpec, XCZU9EG_CAPACITY};
pub use pareto::{dominates, pareto_front, ParetoFront};
pub use strategy::{
    evaluate_strategy, DseTrace, Exhaustive, HillClimb, Oracle, SpaceView, Strategy, StrategyEvaluation, UniformRandom,
};

use crate::store::StoreError;

/// A minimized objective vector tagged with the configuration it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignPoint {
    pub objectives: Vec<f64>,
    pub configuration_id: i64,
}

impl DesignPoint {
    pub fn new(objectives: Vec<f64>, configuration_id: i64) -> Self {
        DesignPoint { objectives, configuration_id }
    }

    pub fn dim(&self) -> usize {
        self.objectives.len()
    }
}

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("empty point set")]
    Empty,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("objective values must be finite")]
    NonFinite,
    #[error("objective values must be non-negative")]
    Negative,
    #[error("reference point {configuration_id} has a zero component at objective {objective}")]
    ZeroReferenceComponent { configuration_id: i64, objective: usize },
    #[error("point {configuration_id} lies outside the hypervolume reference point")]
    ExceedsReference { configuration_id: i64 },
    #[error("hypervolume is only defined here for 2 objectives, found {0}")]
    NotTwoDimensional(usize),
    #[error("area weights must be non-negative and not all zero")]
    InvalidWeights,
    #[error("unknown objective `{0}`")]
    UnknownObjective(String),
    #[error("query budget exhausted")]
    BudgetExhausted,
    #[error("configuration {0} is not part of the space")]
    UnknownConfiguration(i64),
    #[error("strategy selected configuration {0} without querying it")]
    UnqueriedSelection(i64),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Space(#[from] crate::space::SpaceError),
}

pub(crate) fn check_points(points: &[DesignPoint]) -> Result<usize, AnalyticsError> {
    let dim = points.first().ok_or(AnalyticsError::Empty)?.dim();
    for p in points {
        if p.dim() != dim {
            return Err(AnalyticsError::DimensionMismatch { expected: dim, found: p.dim() });
        }
        if p.objectives.iter().any(|v| !v.is_finite()) {
            return Err(AnalyticsError::NonFinite);
        }
    }
    Ok(dim)
}
