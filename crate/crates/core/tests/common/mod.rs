#![allow(dead_code)]

use momapf::graph::Graph;
use momapf::{AgentCosts, Constraint, ConstraintSet, CostVector, NodeId};

/// ```text
/// a b c
/// d e f
/// ```
/// An obstacle enters `b` at t = 2, moves to `e` at t = 3 and stays,
/// represented up to `horizon`.
pub struct MovingObstacle {
    pub graph: Graph,
    pub costs: AgentCosts,
    pub constraints: ConstraintSet,
    pub horizon: u32,
}

pub const A: NodeId = 0;
pub const B: NodeId = 1;
pub const C: NodeId = 2;
pub const D: NodeId = 3;
pub const E: NodeId = 4;
pub const F: NodeId = 5;

pub fn moving_obstacle(horizon: u32) -> MovingObstacle {
    let graph = Graph::grid(2, 3, |_, _| true);
    let costs = AgentCosts::uniform(&graph, CostVector::from([1]), CostVector::from([1]));
    let mut constraints = ConstraintSet::from_constraints([Constraint::Node { node: B, time: 2 }]);
    for t in 3..=horizon {
        constraints.add(Constraint::Node { node: E, time: t });
    }
    MovingObstacle { graph, costs, constraints, horizon }
}

/// Drops every CSV column whose header ends in `_s`.
pub fn strip_csv_timing(csv: &str) -> String {
    let mut lines = csv.lines();
    let Some(header) = lines.next() else { return String::new() };
    let keep: Vec<bool> = header.split(',').map(|h| !h.ends_with("_s")).collect();
    let filter = |line: &str| -> String {
        line.split(',').zip(&keep).filter(|(_, &k)| k).map(|(f, _)| f).collect::<Vec<_>>().join(",")
    };
    std::iter::once(filter(header)).chain(lines.map(filter)).collect::<Vec<_>>().join("\n")
}

/// Drops every JSON object key ending in `_s`, recursively.
pub fn strip_json_timing(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Object(map) => {
            map.retain(|k, _| !k.ends_with("_s"));
            map.values_mut().for_each(strip_json_timing);
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(strip_json_timing),
        _ => {}
    }
}
