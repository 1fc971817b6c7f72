//! Multi-objective safe-interval path planning.
//!
//! The search runs over safe states `(node, safe interval)`. A label is one
//! concrete trajectory prefix reaching a safe state: its cost-to-come `g` and
//! arrival time. Successors are generated with the earliest arrival time into
//! every reachable safe interval of every neighbor. At each safe state a
//! frontier of mutually non-label-dominating labels is kept; a label `l`
//! label-dominates `l'` at the same state when it arrives no later and
//! `g(l) + (t_r(l') - t_r(l)) * c_wait <= g(l')`, i.e. `l` can wait in place
//! until `l'` arrives and still be no worse.
//!
//! A popped goal label is a solution only if no node constraint at the goal
//! lies in its future; otherwise it is expanded like any other label. Each
//! solution filters OPEN of every label whose `g` it dominates or equals.

use std::collections::HashMap;

use crate::cost::{CostVector, ParetoSet};
use crate::graph::NodeId;
use crate::intervals::{max_goal_constraint_time, ConstraintSet, IntervalTable, SafeState, Time, INFINITY};
use crate::open::OpenList;
use crate::planner::{PlanOptions, PlanOutcome, PlanStatus, SearchStats};
use crate::problem::{Path, SingleAgentProblem};

pub type LabelId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Label {
    pub state: SafeState,
    pub g: CostVector,
    pub arrival: Time,
    pub parent: Option<LabelId>,
}

impl Label {
    pub fn node(&self) -> NodeId {
        self.state.node
    }
}

/// Label dominance between two labels at the same safe state.
///
/// Panics if the states differ.
pub fn label_dominates(l: &Label, other: &Label, c_wait: &CostVector) -> bool {
    assert_eq!(l.state, other.state, "label dominance is only defined within one safe state");
    if l.arrival > other.arrival {
        return false;
    }
    let dt = (other.arrival - l.arrival) as u64;
    l.g
        .as_slice()
        .iter()
        .zip(c_wait.as_slice())
        .zip(other.g.as_slice())
        .all(|((g, w), g_other)| g + dt * w <= *g_other)
}

/// Per-state sets of mutually non-label-dominating labels.
#[derive(Clone, Debug, Default)]
pub struct FrontierSet {
    sets: HashMap<SafeState, Vec<LabelId>>,
}

impl FrontierSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn members(&self, state: &SafeState) -> &[LabelId] {
        self.sets.get(state).map_or(&[], Vec::as_slice)
    }

    /// Decides whether candidate `cand` (already stored in `labels`) is
    /// discarded. If some frontier member label-dominates it, returns true
    /// and leaves everything untouched. Otherwise evicts every member the
    /// candidate label-dominates from the frontier and from `open`, inserts
    /// the candidate, and returns false.
    pub fn label_dominated(
        &mut self,
        cand: LabelId,
        labels: &[Label],
        open: &mut OpenList,
        c_wait: &CostVector,
    ) -> bool {
        let l_new = &labels[cand];
        let members = self.sets.entry(l_new.state).or_default();
        if members.iter().any(|&m| label_dominates(&labels[m], l_new, c_wait)) {
            return true;
        }
        members.retain(|&m| {
            let dominated = label_dominates(l_new, &labels[m], c_wait);
            if dominated {
                open.remove(m);
            }
            !dominated
        });
        members.push(cand);
        false
    }

    pub fn insert_unchecked(&mut self, id: LabelId, labels: &[Label]) {
        self.sets.entry(labels[id].state).or_default().push(id);
    }

    /// True when no member of any frontier label-dominates another member.
    pub fn is_consistent(&self, labels: &[Label], c_wait: &CostVector) -> bool {
        self.sets.values().all(|members| {
            members.iter().all(|&a| {
                members.iter().all(|&b| a == b || !label_dominates(&labels[a], &labels[b], c_wait))
            })
        })
    }

    pub fn len(&self) -> usize {
        self.sets.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Removes from `open` every label whose `g` is dominated by or equal to
/// the solution cost `goal_g`.
pub fn filter_open(goal_g: &CostVector, open: &mut OpenList, labels: &[Label]) {
    open.retain(|id| !goal_g.dominates_or_equal(&labels[id].g));
}

/// Successors of `label` with the earliest arrival time into each reachable
/// safe interval of each neighbor. Parents are left unset.
///
/// Arrival `t'` into interval `[a, b]` of neighbor `u` is the least
/// `t' >= max(t_r + 1, a)` with `t' <= b`, departure `t' - 1` inside the
/// current interval, and the edge not blocked at departure. The cost adds
/// the waiting before departure and the move.
pub fn get_successors(
    label: &Label,
    problem: &SingleAgentProblem<'_>,
    table: &IntervalTable<'_>,
    max_arrival: Option<Time>,
) -> Vec<Label> {
    let mut out = Vec::new();
    let v = label.node();
    let cs = table.constraints();
    let wait = &problem.costs.wait;
    // Latest feasible arrival from this state: depart no later than t_b.
    let depart_limit = label.state.interval.end;
    let edge_horizon = cs.max_time().unwrap_or(0);

    for &(u, e) in problem.graph.neighbors(v) {
        for interval in table.intervals(u) {
            let earliest = (label.arrival + 1).max(interval.start);
            if depart_limit != INFINITY && earliest > depart_limit + 1 {
                break;
            }
            if max_arrival.is_some_and(|cap| earliest > cap) {
                break;
            }
            if earliest > interval.end {
                continue;
            }
            let mut latest = interval.end;
            if depart_limit != INFINITY {
                latest = latest.min(depart_limit + 1);
            }
            if let Some(cap) = max_arrival {
                latest = latest.min(cap);
            }
            let mut arrival = earliest;
            loop {
                if !cs.edge_blocked_unchecked(v, u, arrival - 1) {
                    let waited = (arrival - 1 - label.arrival) as u64;
                    let mut g = label.g.add_scaled(wait, waited);
                    g += &problem.costs.edge[e];
                    out.push(Label {
                        state: SafeState { node: u, interval: *interval },
                        g,
                        arrival,
                        parent: None,
                    });
                    break;
                }
                // Edge constraints are finite, so an unbounded window always
                // has a free departure past the last of them.
                debug_assert!(arrival <= edge_horizon + 1);
                if arrival >= latest {
                    break;
                }
                arrival += 1;
            }
        }
    }
    out
}

/// Walks parent links and expands waits into repeated vertices.
pub fn reconstruct(labels: &[Label], id: LabelId, agent: usize) -> Path {
    let mut chain = Vec::new();
    let mut cur = Some(id);
    while let Some(i) = cur {
        chain.push(i);
        cur = labels[i].parent;
    }
    chain.reverse();
    let first = &labels[chain[0]];
    let mut vertices = vec![first.node(); first.arrival as usize + 1];
    for pair in chain.windows(2) {
        let (from, to) = (&labels[pair[0]], &labels[pair[1]]);
        vertices.extend(std::iter::repeat(from.node()).take((to.arrival - from.arrival - 1) as usize));
        vertices.push(to.node());
    }
    Path { agent, vertices, cost: labels[id].g.clone() }
}

/// Outcome of one [`MoSipp::step`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Expanded(LabelId),
    Solution(LabelId),
    Skipped(LabelId),
    Done,
}

/// A resumable MO-SIPP search; [`plan`] runs one to completion.
#[derive(Debug)]
pub struct MoSipp<'a> {
    problem: SingleAgentProblem<'a>,
    table: IntervalTable<'a>,
    options: PlanOptions,
    labels: Vec<Label>,
    open: OpenList,
    frontier: FrontierSet,
    heuristic: Vec<CostVector>,
    solutions: ParetoSet<LabelId>,
    goal_release: Option<Time>,
    stats: SearchStats,
    start_blocked: bool,
}

impl<'a> MoSipp<'a> {
    pub fn new(problem: SingleAgentProblem<'a>, cs: &'a ConstraintSet, options: PlanOptions) -> Self {
        assert!(
            options.pruning || options.max_arrival.is_some(),
            "a search without pruning needs an arrival cap to terminate"
        );
        let m = problem.objectives();
        let table = IntervalTable::new(cs);
        let heuristic = problem.heuristic.table(problem.graph, problem.goal, m);
        let mut search = MoSipp {
            problem,
            open: OpenList::new(options.order),
            options,
            labels: Vec::new(),
            frontier: FrontierSet::new(),
            heuristic,
            solutions: ParetoSet::new(),
            goal_release: max_goal_constraint_time(problem.goal, cs),
            stats: SearchStats::default(),
            start_blocked: false,
            table,
        };
        match search.table.state_at(problem.start, 0) {
            Some(state) => {
                search.labels.push(Label { state, g: CostVector::zeros(m), arrival: 0, parent: None });
                search.frontier.insert_unchecked(0, &search.labels);
                let f = &search.labels[0].g + &search.heuristic[problem.start];
                search.open.push(0, &f, 0);
            }
            None => search.start_blocked = true,
        }
        search
    }

    fn is_solution(&self, label: &Label) -> bool {
        label.node() == self.problem.goal && self.goal_release.is_none_or(|t| t <= label.arrival)
    }

    pub fn step(&mut self) -> Step {
        let Some(id) = self.open.pop() else {
            return Step::Done;
        };
        if self.options.pruning && self.solutions.covers(&self.labels[id].g) {
            return Step::Skipped(id);
        }
        if self.is_solution(&self.labels[id]) {
            let g = self.labels[id].g.clone();
            self.solutions.insert(g.clone(), id);
            if self.options.pruning {
                filter_open(&g, &mut self.open, &self.labels);
            }
            return Step::Solution(id);
        }

        self.stats.expanded += 1;
        let successors = get_successors(&self.labels[id], &self.problem, &self.table, self.options.max_arrival);
        for mut succ in successors {
            self.stats.generated += 1;
            succ.parent = Some(id);
            let new_id = self.labels.len();
            self.labels.push(succ);
            if self.options.pruning
                && self.frontier.label_dominated(new_id, &self.labels, &mut self.open, &self.problem.costs.wait)
            {
                self.labels.pop();
                continue;
            }
            let label = &self.labels[new_id];
            let f = &label.g + &self.heuristic[label.node()];
            self.open.push(new_id, &f, label.arrival as u64);
        }
        Step::Expanded(id)
    }

    pub fn run(mut self) -> PlanOutcome {
        if self.start_blocked {
            return self.finish(PlanStatus::Infeasible);
        }
        loop {
            if self.options.expired() {
                return self.finish(PlanStatus::TimedOut);
            }
            if self.step() == Step::Done {
                let status = if self.solutions.is_empty() { PlanStatus::Infeasible } else { PlanStatus::Solved };
                return self.finish(status);
            }
        }
    }

    fn finish(self, status: PlanStatus) -> PlanOutcome {
        let agent = 0;
        let trajectories = self.solutions.iter().map(|&(_, id)| reconstruct(&self.labels, id, agent)).collect();
        PlanOutcome { status, trajectories, stats: self.stats }
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn frontier(&self) -> &FrontierSet {
        &self.frontier
    }

    pub fn open(&self) -> &OpenList {
        &self.open
    }
}

/// All cost-unique Pareto-optimal constraint-satisfying trajectories from
/// `problem.start` at time 0 to `problem.goal`.
pub fn plan(problem: &SingleAgentProblem<'_>, cs: &ConstraintSet, options: &PlanOptions) -> PlanOutcome {
    MoSipp::new(*problem, cs, options.clone()).run()
}
