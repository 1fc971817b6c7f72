//! Multi-objective multi-agent path finding.
//!
//! Single-agent planners return every cost-unique Pareto-optimal trajectory
//! under a set of node and edge constraints:
//!
//! * [`mosipp`]: multi-objective safe-interval path planning, searching over
//!   `(node, safe interval)` states with label-dominance pruning;
//! * [`namoa_tx`]: multi-objective A* over the time-augmented graph, the
//!   baseline.
//!
//! [`mocbs`] runs tree-wise multi-objective conflict-based search on top of
//! either planner. [`oracle`] holds brute-force enumerators used as ground
//! truth in tests, and [`bench`] the benchmark harness behind the CLI.

pub mod bench;
pub mod cost;
pub mod error;
pub mod graph;
pub mod intervals;
pub mod map_io;
pub mod mocbs;
pub mod mosipp;
pub mod namoa_tx;
pub mod open;
pub mod oracle;
pub mod planner;
pub mod problem;
pub mod random_instances;

pub use cost::{pareto_filter, CostVector, ParetoSet};
pub use error::{Error, Result};
pub use graph::{Graph, NodeId};
pub use intervals::{Constraint, ConstraintSet, SafeInterval, SafeState, Time};
pub use planner::{OpenOrder, PlanOptions, PlanOutcome, PlanStatus};
pub use problem::{AgentCosts, AgentSpec, EdgeScales, Heuristic, Instance, JointPath, Path, SingleAgentProblem};
