//! Brute-force ground truth for the planners.
//!
//! Nothing here uses the planners' search code: only the cost kernel, the
//! graph and raw constraint membership queries are shared. Every enumerator
//! takes a budget and refuses with [`Error::BudgetExceeded`] rather than
//! return a truncated answer.
//!
//! All enumerators are horizon bounded: a trajectory must reach its final
//! arrival at or before `horizon`. [`late_arrival_bound`] and
//! [`joint_late_arrival_bound`] give lower bounds on the cost of anything
//! arriving later, which certifies when a bounded answer is also the
//! unbounded one.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use crate::cost::{Cost, CostVector, ParetoSet};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::intervals::{ConstraintSet, Time};
use crate::problem::{AgentCosts, Instance, JointPath, Path, SingleAgentProblem};

/// Environment variable overriding [`DEFAULT_BUDGET`].
pub const BUDGET_ENV: &str = "MOMAPF_ORACLE_BUDGET";

/// Search nodes (single agent) or joint labels an enumerator may visit.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// [`DEFAULT_BUDGET`] unless [`BUDGET_ENV`] holds a valid integer.
pub fn oracle_budget() -> u64 {
    std::env::var(BUDGET_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_BUDGET)
}

fn blocked_at(cs: &ConstraintSet, v: NodeId, t: usize) -> bool {
    cs.node_blocked(v, t as Time)
}

fn may_stop(cs: &ConstraintSet, goal: NodeId, t: usize) -> bool {
    cs.node_times(goal).is_none_or(|times| times.range(t as Time + 1..).next().is_none())
}

/// Successor steps `(next, cost)` from `v` at time `t`, wait first.
fn steps<'a>(
    graph: &'a Graph,
    costs: &'a AgentCosts,
    cs: &'a ConstraintSet,
    v: NodeId,
    t: usize,
) -> impl Iterator<Item = (NodeId, &'a CostVector)> + 'a {
    std::iter::once((v, &costs.wait))
        .chain(graph.neighbors(v).iter().map(|&(u, e)| (u, &costs.edge[e])))
        .filter(move |&(u, _)| {
            !blocked_at(cs, u, t + 1) && (u == v || !cs.edge_blocked_unchecked(v, u, t as Time))
        })
}

/// Number of constraint-respecting vertex sequences of length `1..=horizon+1`
/// from `(start, 0)`: exactly the nodes [`enumerate_single_pareto`] visits.
pub fn count_search_nodes(problem: &SingleAgentProblem<'_>, cs: &ConstraintSet, horizon: Time) -> u128 {
    if blocked_at(cs, problem.start, 0) {
        return 0;
    }
    let n = problem.graph.num_nodes();
    let mut layer = vec![0u128; n];
    layer[problem.start] = 1;
    let mut total = 1u128;
    for t in 0..horizon as usize {
        let mut next = vec![0u128; n];
        for v in 0..n {
            if layer[v] == 0 {
                continue;
            }
            for (u, _) in steps(problem.graph, problem.costs, cs, v, t) {
                next[u] = next[u].saturating_add(layer[v]);
            }
        }
        total = next.iter().fold(total, |acc, &c| acc.saturating_add(c));
        layer = next;
    }
    total
}

/// Every cost-unique Pareto-optimal trajectory arriving by `horizon`, found
/// by listing all constraint-respecting vertex-time sequences.
///
/// A sequence is a trajectory if it ends at the goal and no goal constraint
/// lies after its end; sequences may pass through the goal and leave. Costs
/// are Pareto filtered first-wins in depth-first order (waits before moves,
/// neighbors ascending).
pub fn enumerate_single_pareto(
    problem: &SingleAgentProblem<'_>,
    cs: &ConstraintSet,
    horizon: Time,
    budget: u64,
) -> Result<Vec<Path>> {
    if count_search_nodes(problem, cs, horizon) > budget as u128 {
        return Err(Error::BudgetExceeded { budget });
    }
    let mut found: ParetoSet<Vec<NodeId>> = ParetoSet::new();
    if !blocked_at(cs, problem.start, 0) {
        let mut seq = vec![problem.start];
        let mut cost = vec![0 as Cost; problem.objectives()];
        dfs(problem, cs, horizon as usize, &mut seq, &mut cost, &mut found);
    }
    let mut out: Vec<Path> =
        found.into_vec().into_iter().map(|(cost, vertices)| Path { agent: 0, vertices, cost }).collect();
    out.sort_by(|a, b| a.cost.cmp(&b.cost));
    Ok(out)
}

fn dfs(
    problem: &SingleAgentProblem<'_>,
    cs: &ConstraintSet,
    horizon: usize,
    seq: &mut Vec<NodeId>,
    cost: &mut Vec<Cost>,
    found: &mut ParetoSet<Vec<NodeId>>,
) {
    let t = seq.len() - 1;
    let v = seq[t];
    if v == problem.goal && may_stop(cs, v, t) {
        let c = CostVector::from_slice(cost);
        if !found.covers(&c) {
            found.insert(c, seq.clone());
        }
    }
    if t == horizon {
        return;
    }
    for (u, step) in steps(problem.graph, problem.costs, cs, v, t) {
        for (acc, s) in cost.iter_mut().zip(step.as_slice()) {
            *acc += s;
        }
        seq.push(u);
        dfs(problem, cs, horizon, seq, cost, found);
        seq.pop();
        for (acc, s) in cost.iter_mut().zip(step.as_slice()) {
            *acc -= s;
        }
    }
}

/// Second single-agent oracle: forward value iteration over `(node, t)`
/// carrying the full non-dominated cost set of every timed vertex.
/// Returns the sorted Pareto cost set.
pub fn dp_single_pareto(problem: &SingleAgentProblem<'_>, cs: &ConstraintSet, horizon: Time) -> Vec<CostVector> {
    let n = problem.graph.num_nodes();
    let mut result: ParetoSet<()> = ParetoSet::new();
    if blocked_at(cs, problem.start, 0) {
        return Vec::new();
    }
    let mut layer: Vec<ParetoSet<()>> = (0..n).map(|_| ParetoSet::new()).collect();
    layer[problem.start].insert(CostVector::zeros(problem.objectives()), ());
    for t in 0..=horizon as usize {
        for c in layer[problem.goal].costs() {
            if may_stop(cs, problem.goal, t) {
                result.insert(c.clone(), ());
            }
        }
        if t == horizon as usize {
            break;
        }
        let mut next: Vec<ParetoSet<()>> = (0..n).map(|_| ParetoSet::new()).collect();
        for v in 0..n {
            for c in layer[v].costs() {
                for (u, step) in steps(problem.graph, problem.costs, cs, v, t) {
                    next[u].insert(c + step, ());
                }
            }
        }
        layer = next;
    }
    let mut out: Vec<CostVector> = result.into_vec().into_iter().map(|(c, _)| c).collect();
    out.sort();
    out
}

/// Minimum of component `m` over all trajectories, by Dijkstra on the
/// time-expanded graph. `None` if no trajectory exists.
///
/// Exact without a horizon parameter: once every constraint has passed the
/// cheapest continuation is a static shortest path, so an optimum arrives
/// by `max constraint time + |V|`, the horizon searched here.
pub fn time_expanded_optimum(problem: &SingleAgentProblem<'_>, cs: &ConstraintSet, m: usize) -> Option<Cost> {
    let n = problem.graph.num_nodes();
    let horizon = cs.max_time().unwrap_or(0) as usize + n + 1;
    if blocked_at(cs, problem.start, 0) {
        return None;
    }
    let mut dist: Vec<Vec<Cost>> = vec![vec![Cost::MAX; n]; horizon + 1];
    let mut heap = BinaryHeap::new();
    dist[0][problem.start] = 0;
    heap.push(Reverse((0 as Cost, 0usize, problem.start)));
    while let Some(Reverse((d, t, v))) = heap.pop() {
        if d > dist[t][v] {
            continue;
        }
        if v == problem.goal && may_stop(cs, v, t) {
            return Some(d);
        }
        if t == horizon {
            continue;
        }
        for (u, step) in steps(problem.graph, problem.costs, cs, v, t) {
            let nd = d + step.get(m);
            if nd < dist[t + 1][u] {
                dist[t + 1][u] = nd;
                heap.push(Reverse((nd, t + 1, u)));
            }
        }
    }
    None
}

/// Constraint-free shortest-path cost to `goal` in component `m`, per node.
pub fn static_distances(graph: &Graph, costs: &AgentCosts, goal: NodeId, m: usize) -> Vec<Option<Cost>> {
    let mut dist = vec![None; graph.num_nodes()];
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((0 as Cost, goal)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if dist[v].is_some() {
            continue;
        }
        dist[v] = Some(d);
        for &(u, e) in graph.neighbors(v) {
            if dist[u].is_none() {
                heap.push(Reverse((d + costs.edge[e].get(m), u)));
            }
        }
    }
    dist
}

/// Component-wise lower bound on the cost of every trajectory whose final
/// arrival is after `horizon`. `None` when no such trajectory exists.
///
/// Such a trajectory is somewhere at `horizon + 1`; component `m` of its
/// cost is at least the cheapest constraint-respecting prefix of
/// `horizon + 1` steps ending at some `x`, plus the static distance from
/// `x` to the goal.
pub fn late_arrival_bound(problem: &SingleAgentProblem<'_>, cs: &ConstraintSet, horizon: Time) -> Option<CostVector> {
    let n = problem.graph.num_nodes();
    if blocked_at(cs, problem.start, 0) {
        return None;
    }
    let mut bound = Vec::with_capacity(problem.objectives());
    for m in 0..problem.objectives() {
        let mut layer = vec![None::<Cost>; n];
        layer[problem.start] = Some(0);
        for t in 0..=horizon as usize {
            let mut next = vec![None::<Cost>; n];
            for v in 0..n {
                let Some(d) = layer[v] else { continue };
                for (u, step) in steps(problem.graph, problem.costs, cs, v, t) {
                    let nd = d + step.get(m);
                    if next[u].is_none_or(|x| nd < x) {
                        next[u] = Some(nd);
                    }
                }
            }
            layer = next;
        }
        let to_goal = static_distances(problem.graph, problem.costs, problem.goal, m);
        let best = (0..n).filter_map(|x| Some(layer[x]? + to_goal[x]?)).min()?;
        bound.push(best);
    }
    Some(bound.into())
}

/// True when `found` makes any late arrival redundant: some member
/// dominates or equals `bound`, or nothing can arrive late.
pub fn certifies(found: &[CostVector], bound: Option<&CostVector>) -> bool {
    match bound {
        None => true,
        Some(b) => found.iter().any(|c| c.dominates_or_equal(b)),
    }
}

/// Joint counterpart of [`late_arrival_bound`] for an unconstrained
/// instance: some agent arrives late and every other agent pays at least
/// its static distance.
pub fn joint_late_arrival_bound(instance: &Instance, horizon: Time) -> Option<CostVector> {
    let m = instance.objectives();
    let empty = ConstraintSet::new();
    let statics: Vec<CostVector> = (0..instance.num_agents())
        .map(|i| {
            let a = &instance.agents[i];
            let d: Option<Vec<Cost>> = (0..m)
                .map(|k| static_distances(&instance.graph, &instance.costs[i], a.goal, k)[a.start])
                .collect();
            d.map(CostVector::from)
        })
        .collect::<Option<Vec<_>>>()?;
    let mut bound: Option<CostVector> = None;
    for i in 0..instance.num_agents() {
        let Some(late) = late_arrival_bound(&instance.problem(i), &empty, horizon) else { continue };
        let total = statics.iter().enumerate().filter(|&(j, _)| j != i).fold(late, |acc, (_, s)| acc + s);
        bound = Some(match bound {
            None => total,
            Some(b) => b.as_slice().iter().zip(total.as_slice()).map(|(x, y)| *x.min(y)).collect::<Vec<_>>().into(),
        });
    }
    bound
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct JointKey {
    positions: Vec<NodeId>,
    finished: u32,
}

struct JointLabel {
    key: JointKey,
    t: usize,
    cost: CostVector,
    parent: Option<usize>,
}

/// Every cost-unique Pareto-optimal conflict-free joint path in which each
/// agent's final arrival is at or before `horizon`.
///
/// Each agent either moves, waits, or (at its goal) stops for good; a
/// stopped agent keeps occupying its goal. Costs are exact Pareto sets per
/// joint state `(positions, stopped agents, t)`, which loses nothing since
/// the future of a joint state does not depend on how it was reached.
/// `budget` bounds the number of joint labels created.
pub fn enumerate_joint_pareto(instance: &Instance, horizon: Time, budget: u64) -> Result<Vec<JointPath>> {
    let n = instance.num_agents();
    assert!(n <= 32, "joint oracle supports at most 32 agents");
    let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let goals: Vec<NodeId> = instance.agents.iter().map(|a| a.goal).collect();
    let mut labels: Vec<JointLabel> = Vec::new();
    let mut created = 0u64;
    let mut insert = |layer: &mut BTreeMap<JointKey, ParetoSet<usize>>,
                      labels: &mut Vec<JointLabel>,
                      label: JointLabel|
     -> Result<()> {
        created += 1;
        if created > budget {
            return Err(Error::BudgetExceeded { budget });
        }
        let set = layer.entry(label.key.clone()).or_default();
        if !set.covers(&label.cost) {
            set.insert(label.cost.clone(), labels.len());
            labels.push(label);
        }
        Ok(())
    };

    let mut results: ParetoSet<usize> = ParetoSet::new();
    let mut layer: BTreeMap<JointKey, ParetoSet<usize>> = BTreeMap::new();
    let start = JointKey { positions: instance.agents.iter().map(|a| a.start).collect(), finished: 0 };
    insert(
        &mut layer,
        &mut labels,
        JointLabel { key: start, t: 0, cost: CostVector::zeros(instance.objectives()), parent: None },
    )?;

    for t in 0..=horizon as usize {
        // Stopping keeps the cost, so it happens within the layer; keys are
        // visited by increasing number of stopped agents.
        for popcount in 0..n as u32 {
            let keys: Vec<JointKey> = layer.keys().filter(|k| k.finished.count_ones() == popcount).cloned().collect();
            for key in keys {
                let can_stop: Vec<usize> =
                    (0..n).filter(|&i| key.finished & (1 << i) == 0 && key.positions[i] == goals[i]).collect();
                let members: Vec<usize> = layer[&key].iter().map(|&(_, id)| id).collect();
                for subset in 1u32..(1 << can_stop.len()) {
                    let mut finished = key.finished;
                    for (b, &i) in can_stop.iter().enumerate() {
                        if subset & (1 << b) != 0 {
                            finished |= 1 << i;
                        }
                    }
                    for &id in &members {
                        let label = JointLabel {
                            key: JointKey { positions: key.positions.clone(), finished },
                            t,
                            cost: labels[id].cost.clone(),
                            parent: Some(id),
                        };
                        insert(&mut layer, &mut labels, label)?;
                    }
                }
            }
        }
        if let Some(done) = layer.remove(&JointKey { positions: goals.clone(), finished: all }) {
            for (cost, id) in done.into_vec() {
                results.insert(cost, id);
            }
        }
        if t == horizon as usize {
            break;
        }
        let mut next: BTreeMap<JointKey, ParetoSet<usize>> = BTreeMap::new();
        for (key, set) in &layer {
            let members: Vec<usize> = set.iter().map(|&(_, id)| id).collect();
            for (positions, step) in joint_moves(instance, key) {
                for &id in &members {
                    let label = JointLabel {
                        key: JointKey { positions: positions.clone(), finished: key.finished },
                        t: t + 1,
                        cost: &labels[id].cost + &step,
                        parent: Some(id),
                    };
                    insert(&mut next, &mut labels, label)?;
                }
            }
        }
        layer = next;
    }

    let mut out: Vec<JointPath> = results.into_vec().into_iter().map(|(_, id)| joint_path(instance, &labels, id)).collect();
    out.sort_by(|a, b| a.cost.cmp(&b.cost));
    Ok(out)
}

/// Conflict-free joint successors of `key` and their step cost.
fn joint_moves(instance: &Instance, key: &JointKey) -> Vec<(Vec<NodeId>, CostVector)> {
    let n = instance.num_agents();
    let options: Vec<Vec<(NodeId, CostVector)>> = (0..n)
        .map(|i| {
            let v = key.positions[i];
            if key.finished & (1 << i) != 0 {
                return vec![(v, CostVector::zeros(instance.objectives()))];
            }
            let costs = &instance.costs[i];
            std::iter::once((v, costs.wait.clone()))
                .chain(instance.graph.neighbors(v).iter().map(|&(u, e)| (u, costs.edge[e].clone())))
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut choice = vec![0usize; n];
    'outer: loop {
        let next: Vec<NodeId> = (0..n).map(|i| options[i][choice[i]].0).collect();
        let valid = (0..n).all(|i| {
            (i + 1..n).all(|j| {
                next[i] != next[j]
                    && !(next[i] == key.positions[j] && next[j] == key.positions[i] && next[i] != key.positions[i])
            })
        });
        if valid {
            let m = instance.objectives();
            out.push((next, CostVector::sum(m, (0..n).map(|i| &options[i][choice[i]].1))));
        }
        for i in (0..n).rev() {
            choice[i] += 1;
            if choice[i] < options[i].len() {
                continue 'outer;
            }
            choice[i] = 0;
        }
        return out;
    }
}

fn joint_path(instance: &Instance, labels: &[JointLabel], id: usize) -> JointPath {
    let mut chain = Vec::new();
    let mut cur = Some(id);
    while let Some(i) = cur {
        chain.push(i);
        cur = labels[i].parent;
    }
    chain.reverse();
    let n = instance.num_agents();
    let mut vertices: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    let mut stopped = vec![false; n];
    for &i in &chain {
        let label = &labels[i];
        for a in 0..n {
            if !stopped[a] && vertices[a].len() == label.t {
                vertices[a].push(label.key.positions[a]);
            }
            stopped[a] |= label.key.finished & (1 << a) != 0;
        }
    }
    let paths = (0..n)
        .map(|a| {
            let mut p = Path { agent: instance.agents[a].id, vertices: std::mem::take(&mut vertices[a]), cost: CostVector::zeros(0) };
            p.cost = p.recompute_cost(&instance.graph, &instance.costs[a]).expect("oracle path is a walk");
            std::sync::Arc::new(p)
        })
        .collect();
    let jp = JointPath::new(paths);
    debug_assert_eq!(jp.cost, labels[id].cost);
    jp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intervals::Constraint;
    use crate::problem::AgentSpec;

    fn corridor(n: u32, edge: &[u64], wait: &[u64]) -> (Graph, AgentCosts) {
        let g = Graph::grid(1, n, |_, _| true);
        let costs = AgentCosts::uniform(&g, CostVector::from_slice(edge), CostVector::from_slice(wait));
        (g, costs)
    }

    fn problem<'a>(g: &'a Graph, c: &'a AgentCosts, start: NodeId, goal: NodeId) -> SingleAgentProblem<'a> {
        SingleAgentProblem { graph: g, costs: c, start, goal, heuristic: Default::default() }
    }

    #[test]
    fn one_edge_corridor() {
        let (g, c) = corridor(2, &[2, 3], &[2, 3]);
        let p = problem(&g, &c, 0, 1);
        let out = enumerate_single_pareto(&p, &ConstraintSet::new(), 4, DEFAULT_BUDGET).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].cost, CostVector::from([2, 3]));
        assert_eq!(out[0].vertices, vec![0, 1]);
        assert_eq!(dp_single_pareto(&p, &ConstraintSet::new(), 4), vec![CostVector::from([2, 3])]);
    }

    #[test]
    fn budget_refuses() {
        let g = Graph::grid(3, 3, |_, _| true);
        let c = AgentCosts::uniform(&g, [1].into(), [1].into());
        let p = problem(&g, &c, 0, 8);
        let err = enumerate_single_pareto(&p, &ConstraintSet::new(), 10, 1000).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { budget: 1000 }));
    }

    #[test]
    fn counts_match_a_hand_count() {
        // 1x2 corridor: every step has two choices.
        let (g, c) = corridor(2, &[1], &[1]);
        let p = problem(&g, &c, 0, 1);
        assert_eq!(count_search_nodes(&p, &ConstraintSet::new(), 3), 1 + 2 + 4 + 8);
    }

    #[test]
    fn goal_constraint_after_arrival() {
        let (g, c) = corridor(2, &[1], &[1]);
        let p = problem(&g, &c, 0, 1);
        let cs = ConstraintSet::from_constraints([Constraint::Node { node: 1, time: 3 }]);
        let out = enumerate_single_pareto(&p, &cs, 6, DEFAULT_BUDGET).unwrap();
        assert_eq!(out[0].arrival(), 4);
        assert!(enumerate_single_pareto(&p, &cs, 3, DEFAULT_BUDGET).unwrap().is_empty());
    }

    #[test]
    fn scalar_dijkstra_and_certificate() {
        let (g, c) = corridor(3, &[1], &[1]);
        let p = problem(&g, &c, 0, 2);
        let cs = ConstraintSet::from_constraints([Constraint::Node { node: 1, time: 1 }]);
        assert_eq!(time_expanded_optimum(&p, &cs, 0), Some(3));
        let found = dp_single_pareto(&p, &cs, 3);
        assert_eq!(found, vec![CostVector::from([3])]);
        let bound = late_arrival_bound(&p, &cs, 3).unwrap();
        assert_eq!(bound, CostVector::from([4]));
        assert!(certifies(&found, Some(&bound)));
    }

    fn corridor_instance(n: u32, endpoints: &[(NodeId, NodeId)]) -> Instance {
        let g = Graph::grid(1, n, |_, _| true);
        let agents: Vec<AgentSpec> = endpoints
            .iter()
            .enumerate()
            .map(|(id, &(start, goal))| AgentSpec { id, start, goal, cost_scale: CostVector::from([1]) })
            .collect();
        let costs = agents.iter().map(|_| AgentCosts::uniform(&g, [1].into(), [1].into())).collect();
        Instance::with_costs(g, agents, costs, Default::default()).unwrap()
    }

    #[test]
    fn joint_swap_in_a_corridor_is_impossible() {
        let inst = corridor_instance(3, &[(0, 2), (2, 0)]);
        assert!(enumerate_joint_pareto(&inst, 8, DEFAULT_BUDGET).unwrap().is_empty());
    }

    #[test]
    fn joint_disjoint_is_a_cross_product() {
        let inst = corridor_instance(5, &[(0, 1), (3, 4)]);
        let out = enumerate_joint_pareto(&inst, 4, DEFAULT_BUDGET).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].cost, CostVector::from([2]));
        assert_eq!(out[0].paths[0].vertices, vec![0, 1]);
        assert_eq!(out[0].paths[1].vertices, vec![3, 4]);
    }

    #[test]
    fn joint_follow_the_leader() {
        let inst = corridor_instance(4, &[(1, 3), (0, 2)]);
        let out = enumerate_joint_pareto(&inst, 6, DEFAULT_BUDGET).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].cost, CostVector::from([4]));
    }

    #[test]
    fn budget_env_parses() {
        assert!(oracle_budget() > 0);
    }
}
