//! Tree-wise multi-objective conflict-based search (MO-CBS-t).
//!
//! Each agent first gets its full Pareto set of individual paths. Root
//! nodes are combinations of those paths, generated one at a time in
//! lexicographic order of the per-agent cost tuple (agent 0 outermost), and
//! each root's tree is searched until its OPEN list is empty before the next
//! root is generated. High-level OPEN is ordered lexicographically by joint
//! cost. With [`Backend::Sipp`] this is MO-CBS-ts.
//!
//! For conflict detection an agent stays parked at its goal forever after
//! its final arrival.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use web_time::Instant;

use crate::cost::{CostVector, ParetoSet};
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::intervals::{Constraint, ConstraintSet, Time};
use crate::mosipp;
use crate::namoa_tx::plan_tx;
use crate::open::OpenList;
use crate::planner::{OpenOrder, PlanOptions, PlanOutcome, PlanStatus};
use crate::problem::{Instance, JointPath, Path};

/// Low-level planner used for every individual replan.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Multi-objective A* on the time-augmented graph (MO-CBS-t).
    Tx,
    /// MO-SIPP (MO-CBS-ts).
    #[default]
    Sipp,
}

impl Backend {
    pub const ALL: [Backend; 2] = [Backend::Tx, Backend::Sipp];

    pub fn as_str(&self) -> &'static str {
        match self {
            Backend::Tx => "tx",
            Backend::Sipp => "sipp",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "tx" => Ok(Backend::Tx),
            "sipp" => Ok(Backend::Sipp),
            other => Err(format!("unknown backend `{other}` (expected `tx` or `sipp`)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Conflict {
    /// Agents `i` and `j` both occupy `node` at `time`.
    Vertex { i: usize, j: usize, node: NodeId, time: Time },
    /// Agent `i` moves `from -> to` while agent `j` moves `to -> from`,
    /// both departing at `time`.
    Edge { i: usize, j: usize, from: NodeId, to: NodeId, time: Time },
}

impl Conflict {
    pub fn agents(&self) -> (usize, usize) {
        match *self {
            Conflict::Vertex { i, j, .. } | Conflict::Edge { i, j, .. } => (i, j),
        }
    }

    pub fn time(&self) -> Time {
        match *self {
            Conflict::Vertex { time, .. } | Conflict::Edge { time, .. } => time,
        }
    }
}

/// Scans time steps in increasing order; at each step first vertex conflicts
/// over agent pairs in index order, then swaps departing at that step.
pub fn detect_first_conflict<P: AsRef<Path>>(paths: &[P]) -> Option<Conflict> {
    let horizon = paths.iter().map(|p| p.as_ref().arrival()).max()?;
    for t in 0..=horizon {
        for i in 0..paths.len() {
            for j in i + 1..paths.len() {
                let v = paths[i].as_ref().at(t);
                if v == paths[j].as_ref().at(t) {
                    return Some(Conflict::Vertex { i, j, node: v, time: t as Time });
                }
            }
        }
        if t == horizon {
            break;
        }
        for i in 0..paths.len() {
            let (u, v) = (paths[i].as_ref().at(t), paths[i].as_ref().at(t + 1));
            if u == v {
                continue;
            }
            for j in i + 1..paths.len() {
                if paths[j].as_ref().at(t) == v && paths[j].as_ref().at(t + 1) == u {
                    return Some(Conflict::Edge { i, j, from: u, to: v, time: t as Time });
                }
            }
        }
    }
    None
}

/// The two child constraints, each paired with the agent it applies to.
pub fn split_conflict(c: &Conflict) -> [(usize, Constraint); 2] {
    match *c {
        Conflict::Vertex { i, j, node, time } => {
            assert_ne!(i, j, "conflict of an agent with itself");
            [(i, Constraint::Node { node, time }), (j, Constraint::Node { node, time })]
        }
        Conflict::Edge { i, j, from, to, time } => {
            assert_ne!(i, j, "conflict of an agent with itself");
            [(i, Constraint::Edge { from, to, time }), (j, Constraint::Edge { from: to, to: from, time })]
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub backend: Backend,
    pub time_limit: Option<Duration>,
    /// Drop OPEN nodes whose joint cost a found solution dominates or
    /// equals. Off only for checks.
    pub filtering: bool,
    /// Forwarded to the low level: individual arrivals after this time are
    /// rejected, which bounds the whole search.
    pub max_arrival: Option<Time>,
    /// Low-level OPEN selection rule.
    pub low_level_order: OpenOrder,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            backend: Backend::Sipp,
            time_limit: None,
            filtering: true,
            max_arrival: None,
            low_level_order: OpenOrder::Lexicographic,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    /// High-level nodes popped and checked for conflicts.
    pub expansions: u64,
    pub generated: u64,
    pub roots_generated: u64,
    pub roots_skipped: u64,
    pub init_calls: u64,
    pub replan_calls: u64,
    /// Wall time of every low-level call in call order, initial calls first.
    pub call_times_s: Vec<f64>,
    pub low_level_expanded: u64,
    pub first_solution_s: Option<f64>,
    pub first_solution_expansions: Option<u64>,
    pub elapsed_s: f64,
}

impl RunStats {
    pub fn calls(&self) -> u64 {
        self.init_calls + self.replan_calls
    }

    pub fn mean_call_time_s(&self) -> Option<f64> {
        if self.call_times_s.is_empty() {
            None
        } else {
            Some(self.call_times_s.iter().sum::<f64>() / self.call_times_s.len() as f64)
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    /// Conflict-free joint paths with pairwise distinct, non-dominated
    /// costs, sorted by cost.
    pub solutions: Vec<JointPath>,
    /// The search exhausted every root; `solutions` is the full set.
    pub complete: bool,
    pub stats: RunStats,
}

impl SolveResult {
    pub fn cost_set(&self) -> Vec<CostVector> {
        self.solutions.iter().map(|s| s.cost.clone()).collect()
    }
}

struct HlNode {
    paths: Vec<Arc<Path>>,
    cost: CostVector,
    parent: Option<usize>,
    increment: Option<(usize, Constraint)>,
}

struct Search<'a> {
    instance: &'a Instance,
    options: &'a SolveOptions,
    started: Instant,
    deadline: Option<Instant>,
    stats: RunStats,
}

enum Interrupted {
    TimedOut,
    Failed(Error),
}

impl Search<'_> {
    fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn low_level(&mut self, agent: usize, cs: &ConstraintSet, initial: bool) -> std::result::Result<Vec<Arc<Path>>, Interrupted> {
        let problem = self.instance.problem(agent);
        let options = PlanOptions {
            order: self.options.low_level_order,
            max_arrival: self.options.max_arrival,
            deadline: self.deadline,
            ..PlanOptions::default()
        };
        let t0 = Instant::now();
        let outcome: PlanOutcome = match self.options.backend {
            Backend::Tx => plan_tx(&problem, cs, &options),
            Backend::Sipp => mosipp::plan(&problem, cs, &options),
        };
        self.stats.call_times_s.push(t0.elapsed().as_secs_f64());
        if initial {
            self.stats.init_calls += 1;
        } else {
            self.stats.replan_calls += 1;
        }
        self.stats.low_level_expanded += outcome.stats.expanded;
        match outcome.status {
            PlanStatus::Solved | PlanStatus::Infeasible => {}
            PlanStatus::TimedOut => return Err(Interrupted::TimedOut),
            PlanStatus::HorizonTooSmall => {
                return Err(Interrupted::Failed(Error::LowLevel(format!(
                    "horizon cap too small for agent {agent} under {} constraints",
                    cs.len()
                ))))
            }
        }
        let mut paths = outcome.trajectories;
        paths.sort_by(|a, b| a.cost.cmp(&b.cost));
        Ok(paths
            .into_iter()
            .map(|mut p| {
                p.agent = self.instance.agents[agent].id;
                Arc::new(p)
            })
            .collect())
    }

    fn constraints_of(nodes: &[HlNode], mut id: usize, agent: usize) -> ConstraintSet {
        let mut cs = ConstraintSet::new();
        loop {
            if let Some((a, c)) = nodes[id].increment {
                if a == agent {
                    cs.add(c);
                }
            }
            match nodes[id].parent {
                Some(p) => id = p,
                None => return cs,
            }
        }
    }

    /// Searches one constraint tree until OPEN is empty.
    fn search_root(&mut self, root: Vec<Arc<Path>>, found: &mut ParetoSet<JointPath>) -> std::result::Result<(), Interrupted> {
        let filtering = self.options.filtering;
        let mut nodes = vec![HlNode { cost: crate::problem::joint_cost(&root), paths: root, parent: None, increment: None }];
        let mut open = OpenList::new(OpenOrder::Lexicographic);
        open.push(0, &nodes[0].cost, 0);
        while let Some(id) = open.pop() {
            if self.expired() {
                return Err(Interrupted::TimedOut);
            }
            if filtering && found.covers(&nodes[id].cost) {
                continue;
            }
            self.stats.expansions += 1;
            let Some(conflict) = detect_first_conflict(&nodes[id].paths) else {
                let cost = nodes[id].cost.clone();
                let solution = JointPath { paths: nodes[id].paths.clone(), cost: cost.clone() };
                if found.insert(cost.clone(), solution) && self.stats.first_solution_s.is_none() {
                    self.stats.first_solution_s = Some(self.started.elapsed().as_secs_f64());
                    self.stats.first_solution_expansions = Some(self.stats.expansions);
                }
                if filtering {
                    open.retain(|other| !cost.dominates_or_equal(&nodes[other].cost));
                }
                continue;
            };
            for (agent, constraint) in split_conflict(&conflict) {
                let mut cs = Self::constraints_of(&nodes, id, agent);
                cs.add(constraint);
                for path in self.low_level(agent, &cs, false)? {
                    let mut paths = nodes[id].paths.clone();
                    paths[agent] = path;
                    let cost = crate::problem::joint_cost(&paths);
                    let child = nodes.len();
                    open.push(child, &cost, 0);
                    nodes.push(HlNode { paths, cost, parent: Some(id), increment: Some((agent, constraint)) });
                    self.stats.generated += 1;
                }
            }
        }
        Ok(())
    }
}

/// Runs MO-CBS-t with the configured backend.
///
/// An infeasible instance gives an empty, complete result. When the time
/// limit expires the solutions found so far are returned with
/// `complete == false`. Low-level failures are returned as errors.
pub fn solve(instance: &Instance, options: &SolveOptions) -> Result<SolveResult> {
    let started = Instant::now();
    let mut search = Search {
        instance,
        options,
        started,
        deadline: options.time_limit.map(|d| started + d),
        stats: RunStats::default(),
    };
    let mut found: ParetoSet<JointPath> = ParetoSet::new();
    let complete = match run(&mut search, &mut found) {
        Ok(()) => true,
        Err(Interrupted::TimedOut) => false,
        Err(Interrupted::Failed(e)) => return Err(e),
    };
    let mut solutions: Vec<JointPath> = found.into_vec().into_iter().map(|(_, s)| s).collect();
    solutions.sort_by(|a, b| a.cost.cmp(&b.cost));
    search.stats.elapsed_s = started.elapsed().as_secs_f64();
    Ok(SolveResult { solutions, complete, stats: search.stats })
}

fn run(search: &mut Search<'_>, found: &mut ParetoSet<JointPath>) -> std::result::Result<(), Interrupted> {
    let n = search.instance.num_agents();
    let empty = ConstraintSet::new();
    let mut individual = Vec::with_capacity(n);
    for agent in 0..n {
        let paths = search.low_level(agent, &empty, true)?;
        if paths.is_empty() {
            return Ok(());
        }
        individual.push(paths);
    }
    // Odometer over per-agent indices; the last agent turns fastest.
    let mut idx = vec![0usize; n];
    loop {
        if search.expired() {
            return Err(Interrupted::TimedOut);
        }
        let root: Vec<Arc<Path>> = idx.iter().enumerate().map(|(a, &k)| individual[a][k].clone()).collect();
        if search.options.filtering && found.covers(&crate::problem::joint_cost(&root)) {
            search.stats.roots_skipped += 1;
        } else {
            search.stats.roots_generated += 1;
            search.search_root(root, found)?;
        }
        let mut a = n;
        loop {
            if a == 0 {
                return Ok(());
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < individual[a].len() {
                break;
            }
            idx[a] = 0;
        }
    }
}

/// Solutions of both backends against the joint oracle.
#[derive(Clone, Debug)]
pub struct CrossValidation {
    pub tx: Vec<CostVector>,
    pub sipp: Vec<CostVector>,
    pub oracle: Vec<CostVector>,
}

impl CrossValidation {
    pub fn agrees(&self) -> bool {
        self.tx == self.sipp && self.sipp == self.oracle
    }

    /// Describes every vector present in one set but missing from another.
    pub fn mismatch(&self) -> Option<String> {
        if self.agrees() {
            return None;
        }
        let mut out = String::new();
        for (name, set) in [("tx", &self.tx), ("sipp", &self.sipp)] {
            let extra: Vec<_> = set.iter().filter(|c| !self.oracle.contains(c)).collect();
            let missing: Vec<_> = self.oracle.iter().filter(|c| !set.contains(c)).collect();
            if !extra.is_empty() || !missing.is_empty() {
                out.push_str(&format!("{name}: extra {extra:?}, missing {missing:?}; "));
            }
        }
        Some(out.trim_end_matches("; ").to_string())
    }
}

/// Solves with both backends, arrivals capped at `horizon`, and compares
/// the cost sets with the joint oracle at the same horizon.
pub fn cross_validate(instance: &Instance, horizon: Time) -> Result<CrossValidation> {
    let mut sets = Vec::with_capacity(2);
    for backend in Backend::ALL {
        let options = SolveOptions { backend, max_arrival: Some(horizon), ..SolveOptions::default() };
        let result = solve(instance, &options)?;
        sets.push(result.cost_set());
    }
    let oracle = crate::oracle::enumerate_joint_pareto(instance, horizon, crate::oracle::oracle_budget())?;
    let sipp = sets.pop().unwrap_or_default();
    let tx = sets.pop().unwrap_or_default();
    Ok(CrossValidation { tx, sipp, oracle: oracle.into_iter().map(|s| s.cost).collect() })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathRecord {
    pub agent: usize,
    pub vertices: Vec<NodeId>,
    /// `[row, col]` per step when the graph is a grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<[u32; 2]>>,
    pub cost: CostVector,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub cost: CostVector,
    pub paths: Vec<PathRecord>,
}

/// Serialized form of a run: solutions, metadata and statistics. Only the
/// `*_s` fields of `stats` vary between identical runs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionFile {
    pub backend: Backend,
    pub seed: Option<u64>,
    pub objectives: usize,
    pub agents: usize,
    pub complete: bool,
    pub solutions: Vec<SolutionRecord>,
    pub stats: RunStats,
}

impl SolutionFile {
    pub fn new(instance: &Instance, backend: Backend, seed: Option<u64>, result: &SolveResult) -> Self {
        let graph = &instance.graph;
        let record = |p: &Path| PathRecord {
            agent: p.agent,
            vertices: p.vertices.clone(),
            cells: graph
                .has_coords()
                .then(|| p.vertices.iter().filter_map(|&v| graph.coord(v)).map(|(r, c)| [r, c]).collect()),
            cost: p.cost.clone(),
        };
        SolutionFile {
            backend,
            seed,
            objectives: instance.objectives(),
            agents: instance.num_agents(),
            complete: result.complete,
            solutions: result
                .solutions
                .iter()
                .map(|s| SolutionRecord { cost: s.cost.clone(), paths: s.paths.iter().map(|p| record(p)).collect() })
                .collect(),
            stats: result.stats.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution file serializes")
    }
}
