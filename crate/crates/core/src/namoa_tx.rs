//! Multi-objective A* over the time-augmented graph `G x {0..T}`.
//!
//! Every timed vertex `(v, t)` keeps its own set of non-dominated cost
//! vectors; labels at the same node but different times are never
//! compared. Constraints are blocked timed vertices and blocked timed edges.
//! Goal handling and OPEN filtering match [`crate::mosipp`], so both planners
//! return the same Pareto cost set.

use std::collections::HashMap;

use crate::cost::{CostVector, ParetoSet};
use crate::graph::NodeId;
use crate::intervals::{max_goal_constraint_time, ConstraintSet, Time};
use crate::open::OpenList;
use crate::planner::{PlanOptions, PlanOutcome, PlanStatus, SearchStats};
use crate::problem::{Path, SingleAgentProblem};

/// A vertex of the time-augmented graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TimedVertex {
    pub node: NodeId,
    pub time: Time,
}

#[derive(Clone, Debug)]
struct TxLabel {
    at: TimedVertex,
    g: CostVector,
    parent: Option<usize>,
}

/// Horizon tried first when none is configured.
pub fn default_horizon(problem: &SingleAgentProblem<'_>, cs: &ConstraintSet) -> Time {
    problem.graph.num_nodes() as Time + cs.max_time().unwrap_or(0) + 1
}

/// Same contract as [`crate::mosipp::plan`]. Without an arrival cap the
/// horizon starts at [`default_horizon`] and doubles while truncation could
/// have hidden a solution, up to `options.horizon_cap`. A feasible instance
/// always has an arrival within [`default_horizon`], so an empty run at that
/// horizon or beyond proves infeasibility.
pub fn plan_tx(problem: &SingleAgentProblem<'_>, cs: &ConstraintSet, options: &PlanOptions) -> PlanOutcome {
    if let Some(cap) = options.max_arrival {
        return search(problem, cs, options, cap).outcome;
    }
    let sufficient = default_horizon(problem, cs);
    let mut horizon = options.initial_horizon.unwrap_or(sufficient);
    let mut stats = SearchStats::default();
    loop {
        let run = search(problem, cs, options, horizon);
        stats.expanded += run.outcome.stats.expanded;
        stats.generated += run.outcome.stats.generated;
        if !run.truncated || run.outcome.status == PlanStatus::TimedOut {
            return PlanOutcome { stats, ..run.outcome };
        }
        if horizon >= sufficient && run.outcome.trajectories.is_empty() {
            return PlanOutcome { status: PlanStatus::Infeasible, stats, ..run.outcome };
        }
        if horizon >= options.horizon_cap {
            return PlanOutcome { status: PlanStatus::HorizonTooSmall, stats, ..run.outcome };
        }
        horizon = horizon.saturating_mul(2).min(options.horizon_cap);
    }
}

struct Run {
    outcome: PlanOutcome,
    /// Some label was cut off at the horizon and no solution covers it.
    truncated: bool,
}

fn search(problem: &SingleAgentProblem<'_>, cs: &ConstraintSet, options: &PlanOptions, horizon: Time) -> Run {
    let m = problem.objectives();
    let goal = problem.goal;
    let goal_release = max_goal_constraint_time(goal, cs);
    let wait = &problem.costs.wait;
    let heuristic = problem.heuristic.table(problem.graph, goal, m);

    let mut labels: Vec<TxLabel> = Vec::new();
    let mut open = OpenList::new(options.order);
    let mut per_vertex: HashMap<TimedVertex, Vec<usize>> = HashMap::new();
    let mut solutions: ParetoSet<usize> = ParetoSet::new();
    let mut cut_off: Vec<usize> = Vec::new();
    let mut stats = SearchStats::default();

    let finish = |status: PlanStatus, labels: &[TxLabel], solutions: ParetoSet<usize>, stats, truncated| Run {
        outcome: PlanOutcome {
            status,
            trajectories: solutions.iter().map(|&(_, id)| reconstruct(labels, id)).collect(),
            stats,
        },
        truncated,
    };

    if cs.node_blocked(problem.start, 0) {
        return finish(PlanStatus::Infeasible, &labels, solutions, stats, false);
    }
    let start = TimedVertex { node: problem.start, time: 0 };
    labels.push(TxLabel { at: start, g: CostVector::zeros(m), parent: None });
    per_vertex.insert(start, vec![0]);
    open.push(0, &(&labels[0].g + &heuristic[problem.start]), 0);

    while let Some(id) = open.pop() {
        if options.expired() {
            return finish(PlanStatus::TimedOut, &labels, solutions, stats, false);
        }
        if options.pruning && solutions.covers(&labels[id].g) {
            continue;
        }
        let at = labels[id].at;
        if at.node == goal && goal_release.is_none_or(|t| t <= at.time) {
            let g = labels[id].g.clone();
            solutions.insert(g.clone(), id);
            if options.pruning {
                open.retain(|other| !g.dominates_or_equal(&labels[other].g));
            }
            continue;
        }
        if at.time >= horizon {
            cut_off.push(id);
            continue;
        }
        stats.expanded += 1;

        let t_next = at.time + 1;
        let mut moves: Vec<(NodeId, CostVector)> = Vec::with_capacity(5);
        if !cs.node_blocked(at.node, t_next) {
            moves.push((at.node, labels[id].g.clone() + wait));
        }
        for &(u, e) in problem.graph.neighbors(at.node) {
            if !cs.node_blocked(u, t_next) && !cs.edge_blocked_unchecked(at.node, u, at.time) {
                moves.push((u, &labels[id].g + &problem.costs.edge[e]));
            }
        }
        for (node, g) in moves {
            stats.generated += 1;
            let succ = TimedVertex { node, time: t_next };
            let members = per_vertex.entry(succ).or_default();
            if options.pruning {
                if members.iter().any(|&o| labels[o].g.dominates_or_equal(&g)) {
                    continue;
                }
                members.retain(|&o| {
                    let dominated = g.dominates(&labels[o].g);
                    if dominated {
                        open.remove(o);
                    }
                    !dominated
                });
            }
            let new_id = labels.len();
            members.push(new_id);
            let f = &g + &heuristic[node];
            labels.push(TxLabel { at: succ, g, parent: Some(id) });
            open.push(new_id, &f, t_next as u64);
        }
    }

    let status = if solutions.is_empty() { PlanStatus::Infeasible } else { PlanStatus::Solved };
    let truncated = options.max_arrival.is_none() && cut_off.iter().any(|&id| !solutions.covers(&labels[id].g));
    finish(status, &labels, solutions, stats, truncated)
}

fn reconstruct(labels: &[TxLabel], id: usize) -> Path {
    let mut vertices = Vec::with_capacity(labels[id].at.time as usize + 1);
    let mut cur = Some(id);
    while let Some(i) = cur {
        vertices.push(labels[i].at.node);
        cur = labels[i].parent;
    }
    vertices.reverse();
    Path { agent: 0, vertices, cost: labels[id].g.clone() }
}
