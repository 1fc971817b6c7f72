use std::time::Duration;

use momapf::mocbs::{cross_validate, detect_first_conflict, solve, Backend, SolutionFile, SolveOptions};
use momapf::oracle::{certifies, enumerate_joint_pareto, joint_late_arrival_bound, oracle_budget};
use momapf::random_instances::random_joint;
use momapf::{CostVector, Instance};

fn capped(backend: Backend, horizon: u32) -> SolveOptions {
    SolveOptions { backend, max_arrival: Some(horizon), ..Default::default() }
}

fn check_solutions(instance: &Instance, result: &momapf::mocbs::SolveResult) {
    for s in &result.solutions {
        assert!(detect_first_conflict(&s.paths).is_none());
        for (i, p) in s.paths.iter().enumerate() {
            assert_eq!(p.vertices[0], instance.agents[i].start);
            assert_eq!(*p.vertices.last().unwrap(), instance.agents[i].goal);
            assert_eq!(p.recompute_cost(&instance.graph, &instance.costs[i]).unwrap(), p.cost);
        }
    }
}

#[test]
fn capped_search_matches_the_joint_oracle() {
    for seed in 0..40u64 {
        let agents = 2 + (seed % 2) as usize;
        let (instance, horizon) = random_joint(seed, agents, 2, 4, 4..=8);
        let report = cross_validate(&instance, horizon).unwrap();
        assert!(report.agrees(), "seed {seed}: {}", report.mismatch().unwrap());
        let r = solve(&instance, &capped(Backend::Sipp, horizon)).unwrap();
        assert!(r.complete);
        check_solutions(&instance, &r);
    }
}

#[test]
fn uncapped_search_matches_on_certified_instances() {
    let mut certified = 0;
    for seed in 100..130u64 {
        let (instance, horizon) = random_joint(seed, 2, 2, 3, 6..=8);
        let oracle: Vec<CostVector> =
            enumerate_joint_pareto(&instance, horizon, oracle_budget()).unwrap().into_iter().map(|s| s.cost).collect();
        if oracle.is_empty() || !certifies(&oracle, joint_late_arrival_bound(&instance, horizon).as_ref()) {
            continue;
        }
        certified += 1;
        for backend in Backend::ALL {
            let options = SolveOptions { backend, time_limit: Some(Duration::from_secs(60)), ..Default::default() };
            let r = solve(&instance, &options).unwrap();
            assert!(r.complete, "seed {seed}");
            assert_eq!(r.cost_set(), oracle, "seed {seed}, {backend}");
            check_solutions(&instance, &r);
        }
    }
    assert!(certified >= 5, "only {certified} certified instances");
}

#[test]
fn filtering_does_not_change_the_solution_set() {
    for seed in 200..220u64 {
        let (instance, horizon) = random_joint(seed, 2, 2, 3, 4..=6);
        let on = solve(&instance, &capped(Backend::Sipp, horizon)).unwrap();
        let off = solve(&instance, &SolveOptions { filtering: false, ..capped(Backend::Sipp, horizon) }).unwrap();
        assert_eq!(on.cost_set(), off.cost_set(), "seed {seed}");
    }
}

#[test]
fn runs_are_deterministic() {
    let (instance, horizon) = random_joint(7, 3, 2, 4, 6..=6);
    let run = |backend| {
        let r = solve(&instance, &capped(backend, horizon)).unwrap();
        let mut file = SolutionFile::new(&instance, backend, Some(7), &r);
        file.stats.call_times_s.clear();
        file.stats.elapsed_s = 0.0;
        file.stats.first_solution_s = None;
        file.to_json()
    };
    for backend in Backend::ALL {
        assert_eq!(run(backend), run(backend));
    }
}
