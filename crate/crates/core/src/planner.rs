//! Types shared by the single-agent planners.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use web_time::Instant;

use crate::cost::CostVector;
use crate::error::{Error, Result};
use crate::intervals::{max_goal_constraint_time, ConstraintSet, Time};
use crate::problem::{Path, SingleAgentProblem};

/// Selection rule among OPEN entries. Both rules are linear extensions of
/// dominance, so the popped entry is always non-dominated within OPEN.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpenOrder {
    #[default]
    Lexicographic,
    ReverseLexicographic,
}

impl OpenOrder {
    pub fn compare(&self, a: &CostVector, b: &CostVector) -> Ordering {
        match self {
            OpenOrder::Lexicographic => a.lex_cmp(b),
            OpenOrder::ReverseLexicographic => a.reverse_lex_cmp(b),
        }
    }

    /// A key whose plain lexicographic order realizes this rule.
    pub(crate) fn key(&self, f: &CostVector) -> CostVector {
        match self {
            OpenOrder::Lexicographic => f.clone(),
            OpenOrder::ReverseLexicographic => {
                CostVector::from_slice(&f.as_slice().iter().rev().copied().collect::<Vec<_>>())
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct PlanOptions {
    pub order: OpenOrder,
    /// Reject trajectories arriving after this time. Required when
    /// `pruning` is off.
    pub max_arrival: Option<Time>,
    /// Label-dominance pruning and OPEN filtering. Off only for checks.
    pub pruning: bool,
    pub deadline: Option<Instant>,
    /// Time-expanded planner only: first horizon tried (default
    /// `|V| + max constraint time + 1`) and the doubling cap.
    pub initial_horizon: Option<Time>,
    pub horizon_cap: Time,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions {
            order: OpenOrder::Lexicographic,
            max_arrival: None,
            pruning: true,
            deadline: None,
            initial_horizon: None,
            horizon_cap: 1 << 16,
        }
    }
}

impl PlanOptions {
    pub(crate) fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanStatus {
    /// Search finished; the trajectory set is complete and non-empty.
    Solved,
    /// Search finished and no constraint-satisfying trajectory exists.
    Infeasible,
    /// Deadline hit; trajectories found so far are returned.
    TimedOut,
    /// Time-expanded planner: the horizon cap was too small to certify the
    /// result.
    HorizonTooSmall,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub expanded: u64,
    pub generated: u64,
}

/// Cost-unique Pareto-optimal trajectories plus how the search ended.
#[derive(Clone, Debug)]
pub struct PlanOutcome {
    pub status: PlanStatus,
    pub trajectories: Vec<Path>,
    pub stats: SearchStats,
}

impl PlanOutcome {
    pub fn is_complete(&self) -> bool {
        matches!(self.status, PlanStatus::Solved | PlanStatus::Infeasible)
    }

    /// Sorted cost vectors, convenient for set comparisons.
    pub fn cost_set(&self) -> Vec<CostVector> {
        let mut v: Vec<CostVector> = self.trajectories.iter().map(|p| p.cost.clone()).collect();
        v.sort();
        v
    }
}

/// Replays `path` against `problem` and `cs`: start and goal, adjacency,
/// node and edge constraints, no goal constraint after arrival, and the
/// stored cost.
pub fn check_trajectory(problem: &SingleAgentProblem<'_>, cs: &ConstraintSet, path: &Path) -> Result<()> {
    let invalid = |message: String| Err(Error::InvalidPath { agent: path.agent, message });
    let (Some(&first), Some(&last)) = (path.vertices.first(), path.vertices.last()) else {
        return invalid("empty vertex sequence".into());
    };
    if first != problem.start || last != problem.goal {
        return invalid(format!("runs {first} -> {last}, expected {} -> {}", problem.start, problem.goal));
    }
    for (t, &v) in path.vertices.iter().enumerate() {
        if cs.node_blocked(v, t as Time) {
            return invalid(format!("occupies blocked node {v} at t = {t}"));
        }
    }
    for (t, w) in path.vertices.windows(2).enumerate() {
        if w[0] != w[1] && cs.edge_blocked_unchecked(w[0], w[1], t as Time) {
            return invalid(format!("traverses blocked edge {} -> {} at t = {t}", w[0], w[1]));
        }
    }
    let arrival = path.arrival() as Time;
    if let Some(t) = max_goal_constraint_time(problem.goal, cs).filter(|&t| t > arrival) {
        return invalid(format!("stops at the goal at t = {arrival} but the goal is blocked at t = {t}"));
    }
    let cost = path.recompute_cost(problem.graph, problem.costs)?;
    if cost != path.cost {
        return invalid(format!("stored cost {} differs from replayed cost {cost}", path.cost));
    }
    Ok(())
}
