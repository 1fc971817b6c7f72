//! Safe intervals and the constraint sets they are built from.
//!
//! A node constraint `(v, t)` forbids being at `v` at time `t`. An edge
//! constraint `(u, v, t)` forbids traversing `u -> v` departing at `t`; it is
//! directional.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::{Graph, NodeId};

pub type Time = u32;

/// Unbounded interval end. Ordered above every finite time.
pub const INFINITY: Time = Time::MAX;

/// A maximal run `[start, end]` of unconstrained time steps at one node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SafeInterval {
    pub start: Time,
    pub end: Time,
}

impl SafeInterval {
    pub const ALWAYS: SafeInterval = SafeInterval { start: 0, end: INFINITY };

    pub fn new(start: Time, end: Time) -> Self {
        debug_assert!(start <= end);
        SafeInterval { start, end }
    }

    pub fn contains(&self, t: Time) -> bool {
        self.start <= t && t <= self.end
    }

    pub fn is_unbounded(&self) -> bool {
        self.end == INFINITY
    }
}

impl fmt::Display for SafeInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_unbounded() {
            write!(f, "[{},inf]", self.start)
        } else {
            write!(f, "[{},{}]", self.start, self.end)
        }
    }
}

/// A node paired with one of its safe intervals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SafeState {
    pub node: NodeId,
    pub interval: SafeInterval,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Constraint {
    Node { node: NodeId, time: Time },
    Edge { from: NodeId, to: NodeId, time: Time },
}

impl Constraint {
    pub fn time(&self) -> Time {
        match *self {
            Constraint::Node { time, .. } | Constraint::Edge { time, .. } => time,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstraintSet {
    node: HashMap<NodeId, BTreeSet<Time>>,
    edge: HashSet<(NodeId, NodeId, Time)>,
    max_time: Option<Time>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_constraints(constraints: impl IntoIterator<Item = Constraint>) -> Self {
        let mut cs = Self::new();
        for c in constraints {
            cs.add(c);
        }
        cs
    }

    pub fn add(&mut self, c: Constraint) {
        match c {
            Constraint::Node { node, time } => {
                self.node.entry(node).or_default().insert(time);
            }
            Constraint::Edge { from, to, time } => {
                self.edge.insert((from, to, time));
            }
        }
        self.max_time = Some(self.max_time.map_or(c.time(), |m| m.max(c.time())));
    }

    pub fn add_node(&mut self, node: NodeId, time: Time) {
        self.add(Constraint::Node { node, time });
    }

    pub fn add_edge(&mut self, from: NodeId, to: NodeId, time: Time) {
        self.add(Constraint::Edge { from, to, time });
    }

    pub fn is_empty(&self) -> bool {
        self.node.is_empty() && self.edge.is_empty()
    }

    pub fn len(&self) -> usize {
        self.node.values().map(BTreeSet::len).sum::<usize>() + self.edge.len()
    }

    pub fn node_blocked(&self, node: NodeId, t: Time) -> bool {
        self.node.get(&node).is_some_and(|ts| ts.contains(&t))
    }

    /// Unchecked directional edge lookup; see [`edge_blocked`].
    pub fn edge_blocked_unchecked(&self, from: NodeId, to: NodeId, t: Time) -> bool {
        !self.edge.is_empty() && self.edge.contains(&(from, to, t))
    }

    pub fn node_times(&self, node: NodeId) -> Option<&BTreeSet<Time>> {
        self.node.get(&node)
    }

    pub fn has_edge_constraints(&self) -> bool {
        !self.edge.is_empty()
    }

    /// Largest constraint time of any kind.
    pub fn max_time(&self) -> Option<Time> {
        self.max_time
    }

    /// All constraints in a deterministic order.
    pub fn to_sorted_vec(&self) -> Vec<Constraint> {
        let mut out: Vec<Constraint> = self
            .node
            .iter()
            .flat_map(|(&node, ts)| ts.iter().map(move |&time| Constraint::Node { node, time }))
            .chain(self.edge.iter().map(|&(from, to, time)| Constraint::Edge { from, to, time }))
            .collect();
        out.sort_unstable();
        out
    }
}

/// Safe intervals of `node`: maximal, disjoint, sorted, covering exactly
/// the unconstrained time steps. The last interval is always unbounded.
pub fn build_intervals(node: NodeId, cs: &ConstraintSet) -> Vec<SafeInterval> {
    let Some(times) = cs.node_times(node) else {
        return vec![SafeInterval::ALWAYS];
    };
    let mut out = Vec::with_capacity(times.len() + 1);
    let mut next_free: Time = 0;
    for &t in times {
        if t > next_free {
            out.push(SafeInterval::new(next_free, t - 1));
        }
        next_free = t + 1;
    }
    out.push(SafeInterval::new(next_free, INFINITY));
    out
}

/// [`build_intervals`] restricted to `[0, horizon]`: intervals starting
/// after the horizon are dropped and the rest are clipped to it.
pub fn build_intervals_within(node: NodeId, cs: &ConstraintSet, horizon: Time) -> Vec<SafeInterval> {
    build_intervals(node, cs)
        .into_iter()
        .filter(|i| i.start <= horizon)
        .map(|i| SafeInterval::new(i.start, i.end.min(horizon)))
        .collect()
}

/// The safe state of `node` containing time `t`, if `t` is not constrained.
pub fn state_at(node: NodeId, t: Time, cs: &ConstraintSet) -> Option<SafeState> {
    find_interval(&build_intervals(node, cs), t).map(|interval| SafeState { node, interval })
}

fn find_interval(intervals: &[SafeInterval], t: Time) -> Option<SafeInterval> {
    let idx = intervals.partition_point(|i| i.end < t);
    intervals.get(idx).filter(|i| i.contains(t)).copied()
}

/// Whether the high level forbids traversing `from -> to` departing at `t`.
///
/// Panics if `(from, to)` is not an edge of `graph`.
pub fn edge_blocked(graph: &Graph, from: NodeId, to: NodeId, t: Time, cs: &ConstraintSet) -> bool {
    assert!(graph.edge_between(from, to).is_some(), "({from},{to}) is not an edge");
    cs.edge_blocked_unchecked(from, to, t)
}

/// Latest node-constraint time at `v`.
pub fn max_goal_constraint_time(v: NodeId, cs: &ConstraintSet) -> Option<Time> {
    cs.node_times(v).and_then(|ts| ts.last().copied())
}

/// Lazily built interval lists for every node under one constraint set.
#[derive(Debug)]
pub struct IntervalTable<'a> {
    cs: &'a ConstraintSet,
    cache: HashMap<NodeId, Vec<SafeInterval>>,
}

const UNCONSTRAINED: &[SafeInterval] = &[SafeInterval::ALWAYS];

impl<'a> IntervalTable<'a> {
    pub fn new(cs: &'a ConstraintSet) -> Self {
        let cache = cs.node.keys().map(|&v| (v, build_intervals(v, cs))).collect();
        IntervalTable { cs, cache }
    }

    pub fn intervals(&self, node: NodeId) -> &[SafeInterval] {
        self.cache.get(&node).map_or(UNCONSTRAINED, Vec::as_slice)
    }

    pub fn state_at(&self, node: NodeId, t: Time) -> Option<SafeState> {
        find_interval(self.intervals(node), t).map(|interval| SafeState { node, interval })
    }

    pub fn constraints(&self) -> &'a ConstraintSet {
        self.cs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn si(a: Time, b: Time) -> SafeInterval {
        SafeInterval::new(a, b)
    }

    #[test]
    fn single_occupancy_splits_interval() {
        let cs = ConstraintSet::from_constraints([Constraint::Node { node: 1, time: 2 }]);
        assert_eq!(build_intervals(1, &cs), vec![si(0, 1), si(3, INFINITY)]);
    }

    #[test]
    fn horizon_capped_permanent_occupancy() {
        let mut cs = ConstraintSet::new();
        for t in 3..=10 {
            cs.add_node(4, t);
        }
        assert_eq!(build_intervals_within(4, &cs, 10), vec![si(0, 2)]);
        assert_eq!(build_intervals(4, &cs), vec![si(0, 2), si(11, INFINITY)]);
    }

    #[test]
    fn unconstrained_node_is_always_safe() {
        assert_eq!(build_intervals(0, &ConstraintSet::new()), vec![SafeInterval::ALWAYS]);
    }

    #[test]
    fn constraint_at_zero_and_adjacent_steps() {
        let cs = ConstraintSet::from_constraints(
            [0, 1, 5, 6, 8].map(|time| Constraint::Node { node: 0, time }),
        );
        assert_eq!(build_intervals(0, &cs), vec![si(2, 4), si(7, 7), si(9, INFINITY)]);
    }

    #[test]
    fn state_lookup() {
        let cs = ConstraintSet::from_constraints([Constraint::Node { node: 1, time: 2 }]);
        assert_eq!(state_at(1, 0, &cs), Some(SafeState { node: 1, interval: si(0, 1) }));
        assert_eq!(state_at(1, 2, &cs), None);
        assert_eq!(state_at(1, 9, &cs).unwrap().interval, si(3, INFINITY));
        assert_eq!(state_at(0, 7, &cs), Some(SafeState { node: 0, interval: SafeInterval::ALWAYS }));
        let table = IntervalTable::new(&cs);
        assert_eq!(table.state_at(1, 1), state_at(1, 1, &cs));
        assert_eq!(table.state_at(1, 2), None);
    }

    #[test]
    fn edge_constraints_are_directional() {
        let g = Graph::new(2, &[(0, 1)]).unwrap();
        let mut cs = ConstraintSet::new();
        assert!(!edge_blocked(&g, 0, 1, 3, &cs));
        cs.add_edge(0, 1, 3);
        assert!(edge_blocked(&g, 0, 1, 3, &cs));
        assert!(!edge_blocked(&g, 1, 0, 3, &cs));
        assert!(!edge_blocked(&g, 0, 1, 4, &cs));
    }

    #[test]
    #[should_panic(expected = "not an edge")]
    fn edge_query_on_non_edge_panics() {
        let g = Graph::new(3, &[(0, 1)]).unwrap();
        edge_blocked(&g, 0, 2, 0, &ConstraintSet::new());
    }

    #[test]
    fn latest_goal_constraint() {
        let cs = ConstraintSet::from_constraints([
            Constraint::Node { node: 7, time: 4 },
            Constraint::Node { node: 7, time: 9 },
            Constraint::Node { node: 2, time: 20 },
        ]);
        assert_eq!(max_goal_constraint_time(7, &cs), Some(9));
        assert_eq!(max_goal_constraint_time(3, &cs), None);
        assert_eq!(max_goal_constraint_time(3, &ConstraintSet::new()), None);
    }
}
