use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{adrs, pareto_front, AnalyticsError, DesignPoint, ObjectiveSpec, ParetoFront};
use crate::outcome::ToolFilter;
use crate::space::{build_index, SpaceIndex};
use crate::store::Store;

/// What a strategy may see of the space: its structure and the
/// configuration id of every index, never the results.
pub struct SpaceView<'a> {
    pub space_id: i64,
    pub index: &'a SpaceIndex,
    /// Configuration id of each index, in index order.
    pub configuration_ids: &'a [i64],
}

impl SpaceView<'_> {
    pub fn total(&self) -> u64 {
        self.index.total
    }

    pub fn id_of(&self, index: u64) -> i64 {
        self.configuration_ids[index as usize]
    }
}

/// Ordered record of the queries a strategy issued.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DseTrace {
    /// (configuration id, observed point). `None` when the configuration has
    /// no successful implementation.
    pub entries: Vec<(i64, Option<DesignPoint>)>,
    pub budget: usize,
    /// Set when the strategy tried to go past its budget.
    pub truncated: bool,
}

/// Budgeted, caching synthesis oracle backed by stored results. Repeated
/// queries for the same configuration are free.
pub struct Oracle<'a> {
    results: &'a HashMap<i64, Option<DesignPoint>>,
    cache: HashMap<i64, Option<DesignPoint>>,
    trace: DseTrace,
}

impl<'a> Oracle<'a> {
    pub fn new(results: &'a HashMap<i64, Option<DesignPoint>>, budget: usize) -> Self {
        Oracle { results, cache: HashMap::new(), trace: DseTrace { budget, ..Default::default() } }
    }

    pub fn query(&mut self, configuration_id: i64) -> Result<Option<DesignPoint>, AnalyticsError> {
        if let Some(hit) = self.cache.get(&configuration_id) {
            return Ok(hit.clone());
        }
        let observed =
            self.results.get(&configuration_id).ok_or(AnalyticsError::UnknownConfiguration(configuration_id))?;
        if self.trace.entries.len() >= self.trace.budget {
            self.trace.truncated = true;
            return Err(AnalyticsError::BudgetExhausted);
        }
        self.cache.insert(configuration_id, observed.clone());
        self.trace.entries.push((configuration_id, observed.clone()));
        Ok(observed.clone())
    }

    pub fn is_queried(&self, configuration_id: i64) -> bool {
        self.cache.contains_key(&configuration_id)
    }

    pub fn used(&self) -> usize {
        self.trace.entries.len()
    }

    pub fn remaining(&self) -> usize {
        self.trace.budget - self.trace.entries.len()
    }

    pub fn trace(&self) -> &DseTrace {
        &self.trace
    }

    fn into_trace(self) -> DseTrace {
        self.trace
    }
}

/// An exploration procedure. It returns the configurations it selects as
/// its approximation of the front; all of them must have been queried.
pub trait Strategy {
    fn name(&self) -> &str;
    fn explore(&mut self, space: &SpaceView<'_>, oracle: &mut Oracle<'_>) -> Result<Vec<i64>, AnalyticsError>;
}

/// Query every configuration in index order.
pub struct Exhaustive;

impl Strategy for Exhaustive {
    fn name(&self) -> &str {
        "exhaustive"
    }

    fn explore(&mut self, space: &SpaceView<'_>, oracle: &mut Oracle<'_>) -> Result<Vec<i64>, AnalyticsError> {
        for &id in space.configuration_ids {
            oracle.query(id)?;
        }
        Ok(space.configuration_ids.to_vec())
    }
}

/// Spend the whole budget on a uniform sample without replacement.
pub struct UniformRandom {
    pub seed: u64,
}

impl Strategy for UniformRandom {
    fn name(&self) -> &str {
        "random"
    }

    fn explore(&mut self, space: &SpaceView<'_>, oracle: &mut Oracle<'_>) -> Result<Vec<i64>, AnalyticsError> {
        let n = (oracle.remaining() as u64).min(space.total());
        let picks: Vec<i64> = space.index.sample_indices(n, self.seed)?.into_iter().map(|i| space.id_of(i)).collect();
        for &id in &picks {
            oracle.query(id)?;
        }
        Ok(picks)
    }
}

/// Multi-start greedy descent over one-step neighbors. Each restart draws a
/// random weighting of the log-objectives and a random unexplored start.
pub struct HillClimb {
    pub seed: u64,
}

impl HillClimb {
    fn cost(weights: &[f64], p: &DesignPoint) -> f64 {
        weights.iter().zip(&p.objectives).map(|(w, v)| w * v.max(0.0).ln_1p()).sum()
    }
}

impl Strategy for HillClimb {
    fn name(&self) -> &str {
        "hill_climb"
    }

    fn explore(&mut self, space: &SpaceView<'_>, oracle: &mut Oracle<'_>) -> Result<Vec<i64>, AnalyticsError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let starts = space.index.sample_indices(space.total(), self.seed ^ 0x9e37_79b9_7f4a_7c15)?;
        let mut starts = starts.into_iter();

        'restarts: while oracle.remaining() > 0 {
            let Some(start) = starts.by_ref().find(|&i| !oracle.is_queried(space.id_of(i))) else {
                break;
            };
            let Some(mut here) = oracle.query(space.id_of(start))? else {
                continue;
            };
            let mut at = start;
            let dim = here.dim();
            let mut weights: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() + 1e-9).collect();
            let sum: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= sum);

            loop {
                let mut best: Option<(u64, DesignPoint)> = None;
                for n in space.index.neighbors(at)? {
                    if oracle.remaining() == 0 && !oracle.is_queried(space.id_of(n)) {
                        break 'restarts;
                    }
                    if let Some(p) = oracle.query(space.id_of(n))? {
                        let better = match &best {
                            Some((_, b)) => Self::cost(&weights, &p) < Self::cost(&weights, b),
                            None => true,
                        };
                        if better {
                            best = Some((n, p));
                        }
                    }
                }
                match best {
                    Some((n, p)) if Self::cost(&weights, &p) < Self::cost(&weights, &here) => {
                        at = n;
                        here = p;
                    }
                    _ => break,
                }
            }
        }
        Ok(oracle.trace().entries.iter().map(|(id, _)| *id).collect())
    }
}

#[derive(Debug, Clone)]
pub struct StrategyEvaluation {
    pub strategy: String,
    pub trace: DseTrace,
    pub reference_front: ParetoFront,
    pub approx_front: Option<ParetoFront>,
    /// `None` when the strategy observed no successful implementation.
    pub adrs: Option<f64>,
    pub queries_used: usize,
}

/// Replay `strategy` against the stored results of a space and score its
/// selection against the exhaustive front.
pub fn evaluate_strategy(
    store: &Store,
    space_id: i64,
    strategy: &mut dyn Strategy,
    budget: usize,
    objectives: &ObjectiveSpec,
    tool: Option<&ToolFilter>,
) -> Result<StrategyEvaluation, AnalyticsError> {
    let csd = store.space_csd(space_id)?;
    let index = build_index(&csd)?;
    let configuration_ids: Vec<i64> = store.configurations(space_id)?.iter().map(|c| c.id).collect();
    let points = store.fetch_points(space_id, objectives, tool)?;
    let reference_front = pareto_front(&points)?;

    let mut results: HashMap<i64, Option<DesignPoint>> = configuration_ids.iter().map(|&id| (id, None)).collect();
    for p in points {
        // first ok implementation wins when several tools contributed
        let slot = results.entry(p.configuration_id).or_insert(None);
        if slot.is_none() {
            *slot = Some(p);
        }
    }

    let view = SpaceView { space_id, index: &index, configuration_ids: &configuration_ids };
    let mut oracle = Oracle::new(&results, budget);
    let chosen = match strategy.explore(&view, &mut oracle) {
        Ok(chosen) => Some(chosen),
        Err(AnalyticsError::BudgetExhausted) => None,
        Err(e) => return Err(e),
    };
    let trace = oracle.into_trace();
    let queried: HashSet<i64> = trace.entries.iter().map(|(id, _)| *id).collect();
    let chosen = match chosen {
        Some(chosen) => {
            if let Some(&bad) = chosen.iter().find(|id| !queried.contains(id)) {
                return Err(AnalyticsError::UnqueriedSelection(bad));
            }
            chosen
        }
        None => trace.entries.iter().map(|(id, _)| *id).collect(),
    };

    let observed: HashMap<i64, &DesignPoint> =
        trace.entries.iter().filter_map(|(id, p)| p.as_ref().map(|p| (*id, p))).collect();
    let approx: Vec<DesignPoint> = chosen.iter().filter_map(|id| observed.get(id).map(|p| (*p).clone())).collect();
    let (approx_front, adrs_value) = if approx.is_empty() {
        (None, None)
    } else {
        let front = pareto_front(&approx)?;
        let value = adrs(&reference_front.points, &front.points)?;
        (Some(front), Some(value))
    };

    Ok(StrategyEvaluation {
        strategy: strategy.name().to_string(),
        queries_used: trace.entries.len(),
        trace,
        reference_front,
        approx_front,
        adrs: adrs_value,
    })
}
