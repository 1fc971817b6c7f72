use std::collections::BTreeSet;

use proptest::prelude::*;

use momapf::cost::{pareto_filter, CostVector};
use momapf::intervals::{build_intervals, state_at, IntervalTable, INFINITY};
use momapf::mosipp::{get_successors, reconstruct, Label, MoSipp, Step};
use momapf::namoa_tx::plan_tx;
use momapf::oracle::{dp_single_pareto, enumerate_single_pareto, oracle_budget};
use momapf::planner::check_trajectory;
use momapf::random_instances::{random_single, SingleSpec};
use momapf::{ConstraintSet, PlanOptions};

fn cost(m: usize) -> impl Strategy<Value = CostVector> {
    prop::collection::vec(0u64..6, m).prop_map(CostVector::from)
}

fn small_spec() -> SingleSpec {
    SingleSpec { node_limit: 300_000, ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn dominance_is_a_strict_partial_order(a in cost(3), b in cost(3), c in cost(3)) {
        prop_assert!(!a.dominates(&a));
        prop_assert!(!(a.dominates(&b) && b.dominates(&a)));
        if a.dominates(&b) && b.dominates(&c) {
            prop_assert!(a.dominates(&c));
        }
        prop_assert_eq!(a.dominates_or_equal(&b), a.dominates(&b) || a == b);
    }

    #[test]
    fn lexicographic_order_extends_dominance(a in cost(3), b in cost(3)) {
        if a.dominates(&b) {
            prop_assert!(a < b);
            prop_assert_eq!(a.reverse_lex_cmp(&b), std::cmp::Ordering::Less);
        }
    }

    #[test]
    fn pareto_filter_is_maximal_and_cost_unique(items in prop::collection::vec(cost(2), 0..30)) {
        let kept = pareto_filter(items.iter().cloned().map(|c| (c, ())));
        for (i, (a, _)) in kept.iter().enumerate() {
            for (b, _) in &kept[i + 1..] {
                prop_assert!(a != b && !a.dominates(b) && !b.dominates(a));
            }
        }
        for c in &items {
            prop_assert!(kept.iter().any(|(k, _)| k.dominates_or_equal(c)));
        }
    }

    #[test]
    fn safe_intervals_partition_the_free_times(times in prop::collection::btree_set(0u32..20, 0..8)) {
        let mut cs = ConstraintSet::new();
        for &t in &times {
            cs.add_node(3, t);
        }
        let intervals = build_intervals(3, &cs);
        for w in intervals.windows(2) {
            // Disjoint, sorted and maximal: exactly one blocked step between.
            prop_assert!(w[0].end < w[1].start);
            prop_assert!((w[0].end + 1..w[1].start).all(|t| times.contains(&t)));
        }
        prop_assert_eq!(intervals.last().map(|i| i.end), Some(INFINITY));
        for t in 0..25 {
            let inside = intervals.iter().filter(|i| i.contains(t)).count();
            prop_assert_eq!(inside, usize::from(!times.contains(&t)));
            prop_assert_eq!(state_at(3, t, &cs).is_some(), !times.contains(&t));
        }
    }

    #[test]
    fn earlier_arrival_reaches_a_superset_of_states(seed in any::<u64>(), pick in any::<u64>()) {
        let case = random_single(seed, &small_spec());
        let problem = case.problem();
        let table = IntervalTable::new(&case.constraints);
        let v = (pick as usize) % case.graph.num_nodes();
        for interval in table.intervals(v) {
            let end = interval.end.min(interval.start + 6);
            for t1 in interval.start..=end {
                for t2 in t1..=end {
                    let label = |t| Label {
                        state: momapf::SafeState { node: v, interval: *interval },
                        g: CostVector::zeros(problem.objectives()),
                        arrival: t,
                        parent: None,
                    };
                    let states = |l: &Label| -> BTreeSet<_> {
                        get_successors(l, &problem, &table, None).into_iter().map(|s| s.state).collect()
                    };
                    prop_assert!(states(&label(t2)).is_subset(&states(&label(t1))));
                }
            }
        }
    }

    #[test]
    fn search_invariants_hold_at_every_step(seed in any::<u64>()) {
        let case = random_single(seed, &small_spec());
        let problem = case.problem();
        let wait = problem.costs.wait.clone();
        let mut search = MoSipp::new(problem, &case.constraints, PlanOptions::default());
        let mut steps = 0;
        loop {
            let step = search.step();
            prop_assert!(search.frontier().is_consistent(search.labels(), &wait));
            if step == Step::Done || steps > 20_000 {
                break;
            }
            steps += 1;
        }
        for (id, l) in search.labels().iter().enumerate() {
            prop_assert!(l.state.interval.contains(l.arrival));
            let path = reconstruct(search.labels(), id, 0);
            prop_assert_eq!(path.arrival(), l.arrival as usize);
            prop_assert_eq!(&path.recompute_cost(&case.graph, &case.costs).unwrap(), &l.g);
        }
    }

    #[test]
    fn returned_trajectories_replay(seed in any::<u64>()) {
        let case = random_single(seed, &small_spec());
        let problem = case.problem();
        for outcome in [
            momapf::mosipp::plan(&problem, &case.constraints, &PlanOptions::default()),
            plan_tx(&problem, &case.constraints, &PlanOptions::default()),
        ] {
            let costs = outcome.cost_set();
            for (i, p) in outcome.trajectories.iter().enumerate() {
                check_trajectory(&problem, &case.constraints, p).unwrap();
                prop_assert!(costs.iter().enumerate().all(|(j, c)| j == i || c != &p.cost));
            }
            for (i, a) in costs.iter().enumerate() {
                prop_assert!(costs.iter().enumerate().all(|(j, b)| i == j || !b.dominates(a)));
            }
        }
    }

    #[test]
    fn two_oracles_agree(seed in any::<u64>()) {
        let case = random_single(seed, &small_spec());
        let problem = case.problem();
        let dfs: Vec<CostVector> = enumerate_single_pareto(&problem, &case.constraints, case.horizon, oracle_budget())
            .unwrap()
            .into_iter()
            .map(|p| p.cost)
            .collect();
        prop_assert_eq!(dfs, dp_single_pareto(&problem, &case.constraints, case.horizon));
    }

    #[test]
    fn longer_horizons_only_cover_more(seed in any::<u64>()) {
        let case = random_single(seed, &small_spec());
        let problem = case.problem();
        let h = case.horizon;
        let short = dp_single_pareto(&problem, &case.constraints, h);
        let long = dp_single_pareto(&problem, &case.constraints, h + 2);
        let long_paths = enumerate_single_pareto(&problem, &case.constraints, h + 2, u64::MAX).unwrap();
        for c in &short {
            if long.contains(c) {
                continue;
            }
            // A member can only disappear to a strictly cheaper late arrival.
            let late = long_paths.iter().find(|p| p.cost.dominates(c));
            prop_assert!(late.is_some_and(|p| p.arrival() > h as usize), "{c:?} vanished");
        }
    }

    #[test]
    fn time_expanded_result_does_not_depend_on_the_first_horizon(seed in any::<u64>(), first in 1u32..6) {
        let case = random_single(seed, &small_spec());
        let problem = case.problem();
        let a = plan_tx(&problem, &case.constraints, &PlanOptions::default());
        let b = plan_tx(&problem, &case.constraints, &PlanOptions { initial_horizon: Some(first), ..Default::default() });
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(a.cost_set(), b.cost_set());
    }
}

#[test]
fn a_longer_horizon_can_replace_a_member() {
    // Corridor 0-1-2 with a detour 0-3-4-2; node 1 is blocked until t = 5.
    // By t = 4 only the detour arrives; waiting for 1 to clear is cheaper.
    use momapf::graph::Graph;
    use momapf::{AgentCosts, Constraint, SingleAgentProblem};
    let g = Graph::new(5, &[(0, 1), (1, 2), (0, 3), (3, 4), (4, 2)]).unwrap();
    let mut costs = AgentCosts::uniform(&g, [1].into(), [1].into());
    for e in [g.edge_between(0, 3).unwrap(), g.edge_between(3, 4).unwrap(), g.edge_between(4, 2).unwrap()] {
        costs.edge[e] = [10].into();
    }
    let cs = ConstraintSet::from_constraints((1..=5).map(|t| Constraint::Node { node: 1, time: t }));
    let p = SingleAgentProblem { graph: &g, costs: &costs, start: 0, goal: 2, heuristic: Default::default() };
    assert_eq!(dp_single_pareto(&p, &cs, 4), vec![CostVector::from([30])]);
    assert_eq!(dp_single_pareto(&p, &cs, 8), vec![CostVector::from([7])]);
}
