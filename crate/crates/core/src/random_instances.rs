//! Seeded small random instances for oracle comparisons.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, NodeId};
use crate::intervals::{Constraint, ConstraintSet, Time};
use crate::map_io::{generate_cost_profile_in, DEFAULT_COST_RANGE};
use crate::oracle::count_search_nodes;
use crate::problem::{AgentCosts, AgentSpec, Heuristic, Instance, SingleAgentProblem};

/// A single-agent problem with constraints and an oracle horizon.
#[derive(Clone, Debug)]
pub struct SingleCase {
    pub seed: u64,
    pub graph: Graph,
    pub costs: AgentCosts,
    pub start: NodeId,
    pub goal: NodeId,
    pub constraints: ConstraintSet,
    pub horizon: Time,
}

impl SingleCase {
    pub fn problem(&self) -> SingleAgentProblem<'_> {
        SingleAgentProblem {
            graph: &self.graph,
            costs: &self.costs,
            start: self.start,
            goal: self.goal,
            heuristic: Heuristic::Manhattan,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SingleSpec {
    pub max_side: u32,
    pub objectives: usize,
    pub max_horizon: Time,
    pub max_constraints: usize,
    /// The horizon is lowered until the literal enumeration visits at most
    /// this many nodes.
    pub node_limit: u128,
    pub cost_range: std::ops::RangeInclusive<u64>,
}

impl Default for SingleSpec {
    fn default() -> Self {
        SingleSpec {
            max_side: 4,
            objectives: 2,
            max_horizon: 12,
            max_constraints: 8,
            node_limit: 4_000_000,
            cost_range: DEFAULT_COST_RANGE,
        }
    }
}

fn random_grid(rng: &mut ChaCha8Rng, max_side: u32, min_cells: usize) -> Graph {
    loop {
        let h = rng.gen_range(1..=max_side);
        let w = rng.gen_range(if h == 1 { 2 } else { 1 }..=max_side);
        let blocked: Vec<bool> = (0..h * w).map(|_| rng.gen_bool(0.15)).collect();
        let g = Graph::grid(h, w, |r, c| !blocked[(r * w + c) as usize]);
        if g.num_nodes() >= min_cells && g.num_edges() > 0 {
            return g;
        }
    }
}

fn random_constraints(rng: &mut ChaCha8Rng, graph: &Graph, count: usize, max_time: Time, protect: NodeId) -> ConstraintSet {
    let mut cs = ConstraintSet::new();
    for _ in 0..count {
        if rng.gen_bool(0.6) || graph.num_edges() == 0 {
            let node = rng.gen_range(0..graph.num_nodes());
            let time = rng.gen_range(0..=max_time);
            if node == protect && time == 0 {
                continue;
            }
            cs.add(Constraint::Node { node, time });
        } else {
            let (a, b) = graph.edges()[rng.gen_range(0..graph.num_edges())];
            let (from, to) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
            cs.add(Constraint::Edge { from, to, time: rng.gen_range(0..max_time.max(1)) });
        }
    }
    cs
}

/// A random grid of at most `max_side` by `max_side` cells with ~15%
/// obstacles, seeded costs and up to `max_constraints` node or edge
/// constraints no later than the horizon.
pub fn random_single(seed: u64, spec: &SingleSpec) -> SingleCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = random_grid(&mut rng, spec.max_side, 2);
    let nodes: Vec<NodeId> = (0..graph.num_nodes()).collect();
    let start = *nodes.choose(&mut rng).expect("non-empty graph");
    let goal = if rng.gen_bool(0.05) { start } else { *nodes.choose(&mut rng).expect("non-empty graph") };
    let profile = generate_cost_profile_in(rng.gen(), spec.objectives, 1, &graph, spec.cost_range.clone());
    let agent = AgentSpec { id: 0, start, goal, cost_scale: profile.agent_scales[0].clone() };
    let costs = AgentCosts::new(&agent, &profile.edge_scales);
    let mut horizon = rng.gen_range(spec.max_horizon.min(6)..=spec.max_horizon);
    let count = rng.gen_range(0..=spec.max_constraints);
    let constraints = random_constraints(&mut rng, &graph, count, horizon, start);
    let mut case = SingleCase { seed, graph, costs, start, goal, constraints, horizon };
    while horizon > 1 && count_search_nodes(&case.problem(), &case.constraints, horizon) > spec.node_limit {
        horizon -= 1;
    }
    case.horizon = horizon;
    case
}

/// A random multi-agent instance on a grid of at most `max_side` by
/// `max_side` cells, with distinct starts and distinct goals, plus an
/// oracle horizon in `min_horizon..=max_horizon`.
pub fn random_joint(
    seed: u64,
    agents: usize,
    objectives: usize,
    max_side: u32,
    horizon: std::ops::RangeInclusive<Time>,
) -> (Instance, Time) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = random_grid(&mut rng, max_side, agents + 1);
    let mut nodes: Vec<NodeId> = (0..graph.num_nodes()).collect();
    nodes.shuffle(&mut rng);
    let starts: Vec<NodeId> = nodes[..agents].to_vec();
    nodes.shuffle(&mut rng);
    let goals: Vec<NodeId> = nodes[..agents].to_vec();
    let profile = generate_cost_profile_in(rng.gen(), objectives, agents, &graph, DEFAULT_COST_RANGE);
    let specs = (0..agents)
        .map(|id| AgentSpec { id, start: starts[id], goal: goals[id], cost_scale: profile.agent_scales[id].clone() })
        .collect();
    let h = rng.gen_range(horizon);
    let instance = Instance::new(graph, specs, &profile.edge_scales, Heuristic::Manhattan).expect("valid random instance");
    (instance, h)
}
