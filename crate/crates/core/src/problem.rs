//! Agents, cost assignment, heuristics and paths.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cost::CostVector;
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, NodeId};

/// One agent: start, goal and the per-agent cost scale `a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentSpec {
    pub id: usize,
    pub start: NodeId,
    pub goal: NodeId,
    pub cost_scale: CostVector,
}

/// Per-edge scaling vectors `b(e)`, indexed by [`EdgeId`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeScales(pub Vec<CostVector>);

impl EdgeScales {
    pub fn get(&self, e: EdgeId) -> Result<&CostVector> {
        self.0.get(e).ok_or(Error::UnknownEdge(e))
    }

    pub fn uniform(graph: &Graph, m: usize) -> Self {
        EdgeScales(vec![CostVector::splat(m, 1); graph.num_edges()])
    }
}

/// Cost of agent `agent` traversing edge `e`: the component-wise product of
/// the agent scale and the edge scale.
pub fn edge_cost(agent: &AgentSpec, e: EdgeId, scales: &EdgeScales) -> Result<CostVector> {
    Ok(agent.cost_scale.hadamard(scales.get(e)?))
}

/// Cost of one wait step; constant over nodes.
pub fn wait_cost(agent: &AgentSpec) -> CostVector {
    agent.cost_scale.clone()
}

/// Precomputed move and wait costs of one agent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentCosts {
    pub edge: Vec<CostVector>,
    pub wait: CostVector,
}

impl AgentCosts {
    pub fn new(agent: &AgentSpec, scales: &EdgeScales) -> Self {
        AgentCosts {
            edge: scales.0.iter().map(|b| agent.cost_scale.hadamard(b)).collect(),
            wait: wait_cost(agent),
        }
    }

    /// Every edge costs `edge`, every wait costs `wait`.
    pub fn uniform(graph: &Graph, edge: CostVector, wait: CostVector) -> Self {
        AgentCosts { edge: vec![edge; graph.num_edges()], wait }
    }

    pub fn objectives(&self) -> usize {
        self.wait.len()
    }
}

/// Vector heuristic used to order OPEN lists.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Heuristic {
    /// Manhattan distance times the all-ones vector. Admissible when every
    /// move costs at least one in each component.
    #[default]
    Manhattan,
    Zero,
}

impl Heuristic {
    /// Falls back to the zero vector when either node lacks grid geometry.
    pub fn eval(&self, graph: &Graph, node: NodeId, goal: NodeId, m: usize) -> CostVector {
        match self {
            Heuristic::Zero => CostVector::zeros(m),
            Heuristic::Manhattan => match graph.manhattan(node, goal) {
                Some(d) => CostVector::splat(m, d),
                None => CostVector::zeros(m),
            },
        }
    }

    pub fn table(&self, graph: &Graph, goal: NodeId, m: usize) -> Vec<CostVector> {
        (0..graph.num_nodes()).map(|v| self.eval(graph, v, goal, m)).collect()
    }
}

/// Free-function form of [`Heuristic::Manhattan`].
pub fn heuristic(graph: &Graph, node: NodeId, goal: NodeId, agent: &AgentSpec) -> CostVector {
    Heuristic::Manhattan.eval(graph, node, goal, agent.cost_scale.len())
}

/// Everything a single-agent planner needs.
#[derive(Clone, Copy, Debug)]
pub struct SingleAgentProblem<'a> {
    pub graph: &'a Graph,
    pub costs: &'a AgentCosts,
    pub start: NodeId,
    pub goal: NodeId,
    pub heuristic: Heuristic,
}

impl SingleAgentProblem<'_> {
    pub fn objectives(&self) -> usize {
        self.costs.objectives()
    }
}

/// A vertex sequence at unit time steps from `t = 0`; equal consecutive
/// vertices are waits. The path ends at its final arrival.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Path {
    pub agent: usize,
    pub vertices: Vec<NodeId>,
    pub cost: CostVector,
}

impl Path {
    pub fn arrival(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    /// Position at time `t`; the agent stays at its last vertex forever.
    pub fn at(&self, t: usize) -> NodeId {
        self.vertices[t.min(self.vertices.len() - 1)]
    }

    /// Sums per-step costs, checking adjacency of every move.
    pub fn recompute_cost(&self, graph: &Graph, costs: &AgentCosts) -> Result<CostVector> {
        let invalid = |message: String| Error::InvalidPath { agent: self.agent, message };
        if self.vertices.is_empty() {
            return Err(invalid("empty vertex sequence".into()));
        }
        let mut total = CostVector::zeros(costs.objectives());
        for w in self.vertices.windows(2) {
            if w[0] == w[1] {
                total += &costs.wait;
            } else {
                let e = graph
                    .edge_between(w[0], w[1])
                    .ok_or_else(|| invalid(format!("{} and {} are not adjacent", w[0], w[1])))?;
                total += &costs.edge[e];
            }
        }
        Ok(total)
    }
}

/// One path per agent plus the summed cost.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointPath {
    pub paths: Vec<Arc<Path>>,
    pub cost: CostVector,
}

impl JointPath {
    pub fn new(paths: Vec<Arc<Path>>) -> Self {
        let cost = joint_cost(&paths);
        JointPath { paths, cost }
    }
}

/// Component-wise sum of the agents' path costs.
///
/// Panics on an empty slice: the dimension would be unknown.
pub fn joint_cost<P: AsRef<Path>>(paths: &[P]) -> CostVector {
    let m = paths.first().expect("joint cost of zero paths").as_ref().cost.len();
    CostVector::sum(m, paths.iter().map(|p| &p.as_ref().cost))
}

impl AsRef<Path> for Path {
    fn as_ref(&self) -> &Path {
        self
    }
}

/// A multi-agent instance: workspace, agents and their cost models.
#[derive(Clone, Debug)]
pub struct Instance {
    pub graph: Graph,
    pub agents: Vec<AgentSpec>,
    pub costs: Vec<AgentCosts>,
    pub heuristic: Heuristic,
}

impl Instance {
    /// Validates endpoints (vertices, pairwise-distinct starts and goals)
    /// and derives each agent's costs from `scales`.
    pub fn new(graph: Graph, agents: Vec<AgentSpec>, scales: &EdgeScales, heuristic: Heuristic) -> Result<Self> {
        if scales.0.len() != graph.num_edges() {
            return Err(Error::InvalidInstance(format!(
                "{} edge scales for {} edges",
                scales.0.len(),
                graph.num_edges()
            )));
        }
        let costs = agents.iter().map(|a| AgentCosts::new(a, scales)).collect();
        Self::with_costs(graph, agents, costs, heuristic)
    }

    pub fn with_costs(graph: Graph, agents: Vec<AgentSpec>, costs: Vec<AgentCosts>, heuristic: Heuristic) -> Result<Self> {
        let invalid = |m: String| Err(Error::InvalidInstance(m));
        if agents.is_empty() {
            return invalid("no agents".into());
        }
        if costs.len() != agents.len() {
            return invalid(format!("{} cost models for {} agents", costs.len(), agents.len()));
        }
        let m = costs[0].objectives();
        for (i, a) in agents.iter().enumerate() {
            if !graph.contains_node(a.start) || !graph.contains_node(a.goal) {
                return invalid(format!("agent {i} has an endpoint outside the graph"));
            }
            if costs[i].objectives() != m || costs[i].edge.iter().any(|c| c.len() != m) {
                return invalid(format!("agent {i} has costs of the wrong dimension"));
            }
            if costs[i].edge.len() != graph.num_edges() {
                return invalid(format!("agent {i} has {} edge costs", costs[i].edge.len()));
            }
            for b in &agents[..i] {
                if a.start == b.start {
                    return invalid(format!("agents {} and {i} share a start", b.id));
                }
                if a.goal == b.goal {
                    return invalid(format!("agents {} and {i} share a goal", b.id));
                }
            }
        }
        Ok(Instance { graph, agents, costs, heuristic })
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn objectives(&self) -> usize {
        self.costs[0].objectives()
    }

    pub fn problem(&self, agent: usize) -> SingleAgentProblem<'_> {
        SingleAgentProblem {
            graph: &self.graph,
            costs: &self.costs[agent],
            start: self.agents[agent].start,
            goal: self.agents[agent].goal,
            heuristic: self.heuristic,
        }
    }
}
