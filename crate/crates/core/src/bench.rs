//! Benchmark protocol: low-level timing comparison and success-rate sweeps.
//!
//! Both sweeps write one CSV with instance rows followed by aggregate rows;
//! the `row` column tells them apart. Column sets are documented on
//! [`LowLevelRow`] and [`SuccessRow`]. Every field except those ending in
//! `_s` is reproducible from the inputs, provided no run hits its time
//! limit. Aggregates are plain means over the instance rows in row order,
//! so re-summing the emitted values reproduces them exactly.
//!
//! Instance `k` with `N` agents takes scenario entries `k*N .. k*N+N`, and
//! its costs are drawn with [`cost_seed`]`(seed, k)`.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::Cell;
use crate::intervals::ConstraintSet;
use crate::map_io::{build_instance, GridMap, ScenEntry};
use crate::mocbs::{solve, Backend, SolveOptions};
use crate::mosipp;
use crate::namoa_tx::plan_tx;
use crate::planner::PlanOptions;
use crate::problem::Instance;

pub const SCHEMA_VERSION: u32 = 1;

/// Header of the `bench-lowlevel` CSV, in [`LowLevelRow`] field order.
pub const LOWLEVEL_COLUMNS: &[&str] = &[
    "schema", "row", "map", "objectives", "agents", "seed", "instance", "backend", "complete", "solutions", "calls",
    "init_calls", "replan_calls", "expansions", "agree", "n", "error", "mean_call_time_s", "mean_init_call_time_s",
    "mean_replan_call_time_s", "elapsed_s",
];

/// Header of the `bench-success` CSV, in [`SuccessRow`] field order.
pub const SUCCESS_COLUMNS: &[&str] = &[
    "schema", "row", "map", "objectives", "agents", "seed", "instance", "backend", "complete", "found", "solutions",
    "expansions", "first_solution_expansions", "metric", "successes", "n", "success_rate", "error",
    "first_solution_s", "elapsed_s",
];

/// A square map of `rooms x rooms` rooms of `room` free cells per side.
/// Each room has a one-cell wall on its bottom and right side, so the map
/// is `rooms * (room + 1)` cells wide (8 rooms of 3 give 32). Doors form a
/// random spanning tree over the rooms; every other wall segment gets a
/// door with probability 1/4.
pub fn room_map(seed: u64, rooms: u32, room: u32) -> GridMap {
    let side = rooms * (room + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells = vec![true; (side * side) as usize];
    for r in 0..side {
        for c in 0..side {
            if r % (room + 1) == room || c % (room + 1) == room {
                cells[(r * side + c) as usize] = false;
            }
        }
    }
    let id = |rr: u32, rc: u32| (rr * rooms + rc) as usize;
    // Walls between horizontally or vertically adjacent rooms.
    let mut walls: Vec<(usize, usize, bool, u32, u32)> = Vec::new();
    for rr in 0..rooms {
        for rc in 0..rooms {
            if rc + 1 < rooms {
                walls.push((id(rr, rc), id(rr, rc + 1), true, rr, rc));
            }
            if rr + 1 < rooms {
                walls.push((id(rr, rc), id(rr + 1, rc), false, rr, rc));
            }
        }
    }
    walls.shuffle(&mut rng);
    let mut parent: Vec<usize> = (0..(rooms * rooms) as usize).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (a, b, horizontal, rr, rc) in walls {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        let open = if ra != rb {
            parent[ra] = rb;
            true
        } else {
            rng.gen_bool(0.25)
        };
        if open {
            let offset = rng.gen_range(0..room);
            let (r, c) = if horizontal {
                (rr * (room + 1) + offset, rc * (room + 1) + room)
            } else {
                (rr * (room + 1) + room, rc * (room + 1) + offset)
            };
            cells[(r * side + c) as usize] = true;
        }
    }
    GridMap { height: side, width: side, cells }
}

fn bfs_lengths(map: &GridMap, from: Cell) -> Vec<Option<u32>> {
    let w = map.width;
    let mut dist = vec![None; (map.height * w) as usize];
    let mut queue = VecDeque::from([from]);
    dist[(from.0 * w + from.1) as usize] = Some(0);
    while let Some((r, c)) = queue.pop_front() {
        let d = dist[(r * w + c) as usize].unwrap_or(0);
        let next = [(r.wrapping_sub(1), c), (r + 1, c), (r, c.wrapping_sub(1)), (r, c + 1)];
        for cell in next {
            if map.passable(cell) && dist[(cell.0 * w + cell.1) as usize].is_none() {
                dist[(cell.0 * w + cell.1) as usize] = Some(d + 1);
                queue.push_back(cell);
            }
        }
    }
    dist
}

/// `count` connected start/goal pairs. Within every block of `block`
/// consecutive entries starts are pairwise distinct and goals are pairwise
/// distinct, so any block is a valid multi-agent instance.
pub fn random_scen(map: &GridMap, map_name: &str, seed: u64, count: usize, block: usize) -> Vec<ScenEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let free: Vec<Cell> =
        (0..map.height).flat_map(|r| (0..map.width).map(move |c| (r, c))).filter(|&c| map.passable(c)).collect();
    let mut out: Vec<ScenEntry> = Vec::with_capacity(count);
    while out.len() < count {
        let block_start = out.len() - out.len() % block.max(1);
        let start = *free.choose(&mut rng).expect("map has free cells");
        let goal = *free.choose(&mut rng).expect("map has free cells");
        let taken = out[block_start..].iter().any(|e| e.start == start || e.goal == goal);
        let Some(len) = bfs_lengths(map, start)[(goal.0 * map.width + goal.1) as usize] else { continue };
        if start == goal || taken {
            continue;
        }
        out.push(ScenEntry { bucket: len / 4, map_name: map_name.to_string(), start, goal, optimal_length: len as f64 });
    }
    out
}

/// Serializes entries in the MovingAI `.scen` format.
pub fn format_scen(entries: &[ScenEntry], map: &GridMap) -> String {
    let mut s = String::from("version 1\n");
    for e in entries {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            e.bucket, e.map_name, map.width, map.height, e.start.1, e.start.0, e.goal.1, e.goal.0, e.optimal_length
        );
    }
    s
}

/// Seed of the cost profile of instance `k` under sweep seed `seed`.
pub fn cost_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(k as u64)
}

/// Agents `k*n .. k*n+n` of the scenario, or `None` past its end.
pub fn block(entries: &[ScenEntry], n: usize, k: usize) -> Option<Vec<(Cell, Cell)>> {
    entries.get(k * n..k * n + n).map(|b| b.iter().map(|e| (e.start, e.goal)).collect())
}

#[derive(Clone, Debug)]
pub struct LowLevelConfig {
    pub map_name: String,
    pub objectives: Vec<usize>,
    pub agents: usize,
    pub seeds: Vec<u64>,
    pub instances: usize,
    pub time_limit: Duration,
}

/// One row of `bench-lowlevel`.
///
/// Instance rows (`row = instance`) hold one MO-CBS-t run. `mean_call_time_s`
/// is the instance's average low-level time per call; the init/replan split
/// separates the initial individual plans from replans under constraints.
/// `agree` is whether both backends returned the same cost set, blank when
/// either run was cut off. Aggregate rows (`row = map`) average
/// `mean_call_time_s` over the instance rows of one (objectives, backend)
/// with at least one call; `n` is how many.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowLevelRow {
    pub schema: u32,
    pub row: String,
    pub map: String,
    pub objectives: usize,
    pub agents: usize,
    pub seed: Option<u64>,
    pub instance: Option<usize>,
    pub backend: Backend,
    pub complete: Option<bool>,
    pub solutions: Option<usize>,
    pub calls: Option<u64>,
    pub init_calls: Option<u64>,
    pub replan_calls: Option<u64>,
    pub expansions: Option<u64>,
    pub agree: Option<bool>,
    pub n: Option<usize>,
    pub error: Option<String>,
    pub mean_call_time_s: Option<f64>,
    pub mean_init_call_time_s: Option<f64>,
    pub mean_replan_call_time_s: Option<f64>,
    pub elapsed_s: Option<f64>,
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

fn warm_up(instance: &Instance) {
    let problem = instance.problem(0);
    let cs = ConstraintSet::new();
    let options = PlanOptions { deadline: Some(web_time::Instant::now() + Duration::from_secs(5)), ..Default::default() };
    let _ = mosipp::plan(&problem, &cs, &options);
    let _ = plan_tx(&problem, &cs, &options);
}

/// Runs MO-CBS-t with both backends on every (objectives, seed, instance).
pub fn bench_lowlevel(scen: &[ScenEntry], map: &GridMap, config: &LowLevelConfig, mut log: impl FnMut(&str)) -> Vec<LowLevelRow> {
    let mut rows = Vec::new();
    for &m in &config.objectives {
        for &seed in &config.seeds {
            for k in 0..config.instances {
                let Some(endpoints) = block(scen, config.agents, k) else { break };
                let base = LowLevelRow {
                    schema: SCHEMA_VERSION,
                    row: "instance".into(),
                    map: config.map_name.clone(),
                    objectives: m,
                    agents: config.agents,
                    seed: Some(seed),
                    instance: Some(k),
                    backend: Backend::Tx,
                    complete: None,
                    solutions: None,
                    calls: None,
                    init_calls: None,
                    replan_calls: None,
                    expansions: None,
                    agree: None,
                    n: None,
                    error: None,
                    mean_call_time_s: None,
                    mean_init_call_time_s: None,
                    mean_replan_call_time_s: None,
                    elapsed_s: None,
                };
                let instance = match build_instance(map, &endpoints, m, cost_seed(seed, k)) {
                    Ok(i) => i,
                    Err(e) => {
                        for backend in Backend::ALL {
                            rows.push(LowLevelRow { backend, error: Some(e.to_string()), ..base.clone() });
                        }
                        continue;
                    }
                };
                warm_up(&instance);
                let mut pair = Vec::with_capacity(2);
                for backend in Backend::ALL {
                    let options = SolveOptions { backend, time_limit: Some(config.time_limit), ..Default::default() };
                    let row = match solve(&instance, &options) {
                        Ok(r) => {
                            let s = &r.stats;
                            let init = s.init_calls as usize;
                            let (init_t, replan_t) = s.call_times_s.split_at(init.min(s.call_times_s.len()));
                            log(&format!(
                                "M={m} seed={seed} instance={k} {backend}: {} calls, {} solutions{}",
                                s.calls(),
                                r.solutions.len(),
                                if r.complete { "" } else { " (time limit)" }
                            ));
                            pair.push(r.complete.then(|| r.cost_set()));
                            LowLevelRow {
                                backend,
                                complete: Some(r.complete),
                                solutions: Some(r.solutions.len()),
                                calls: Some(s.calls()),
                                init_calls: Some(s.init_calls),
                                replan_calls: Some(s.replan_calls),
                                expansions: Some(s.expansions),
                                mean_call_time_s: s.mean_call_time_s(),
                                mean_init_call_time_s: mean(init_t),
                                mean_replan_call_time_s: mean(replan_t),
                                elapsed_s: Some(s.elapsed_s),
                                ..base.clone()
                            }
                        }
                        Err(e) => {
                            pair.push(None);
                            LowLevelRow { backend, error: Some(e.to_string()), ..base.clone() }
                        }
                    };
                    rows.push(row);
                }
                let agree = match (&pair[0], &pair[1]) {
                    (Some(a), Some(b)) => Some(a == b),
                    _ => None,
                };
                let len = rows.len();
                for r in &mut rows[len - 2..] {
                    r.agree = agree;
                }
                if agree == Some(false) {
                    log(&format!("M={m} seed={seed} instance={k}: backends disagree"));
                }
            }
        }
    }
    let mut groups: BTreeMap<(usize, Backend), Vec<f64>> = BTreeMap::new();
    for r in &rows {
        if let Some(t) = r.mean_call_time_s {
            groups.entry((r.objectives, r.backend)).or_default().push(t);
        }
    }
    for ((m, backend), times) in groups {
        rows.push(LowLevelRow {
            schema: SCHEMA_VERSION,
            row: "map".into(),
            map: config.map_name.clone(),
            objectives: m,
            agents: config.agents,
            seed: None,
            instance: None,
            backend,
            complete: None,
            solutions: None,
            calls: None,
            init_calls: None,
            replan_calls: None,
            expansions: None,
            agree: None,
            n: Some(times.len()),
            error: None,
            mean_call_time_s: mean(&times),
            mean_init_call_time_s: None,
            mean_replan_call_time_s: None,
            elapsed_s: None,
        });
    }
    rows
}

#[derive(Clone, Debug)]
pub struct SuccessConfig {
    pub map_name: String,
    pub objectives: usize,
    pub agents: Vec<usize>,
    pub seeds: Vec<u64>,
    pub instances: usize,
    pub time_limit: Duration,
}

/// One row of `bench-success`.
///
/// Instance rows (`row = instance`): `complete` is success metric 1 (every
/// root searched to depletion within the limit), `found` is metric 2 (at
/// least one solution within the limit). Aggregate rows (`row = rate`) give,
/// per (agents, backend, metric), `successes` out of `n` runs and
/// `success_rate = successes / n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessRow {
    pub schema: u32,
    pub row: String,
    pub map: String,
    pub objectives: usize,
    pub agents: usize,
    pub seed: Option<u64>,
    pub instance: Option<usize>,
    pub backend: Backend,
    pub complete: Option<bool>,
    pub found: Option<bool>,
    pub solutions: Option<usize>,
    pub expansions: Option<u64>,
    pub first_solution_expansions: Option<u64>,
    pub metric: Option<String>,
    pub successes: Option<usize>,
    pub n: Option<usize>,
    pub success_rate: Option<f64>,
    pub error: Option<String>,
    pub first_solution_s: Option<f64>,
    pub elapsed_s: Option<f64>,
}

pub fn bench_success(scen: &[ScenEntry], map: &GridMap, config: &SuccessConfig, mut log: impl FnMut(&str)) -> Vec<SuccessRow> {
    let mut rows = Vec::new();
    for &n_agents in &config.agents {
        for &seed in &config.seeds {
            for k in 0..config.instances {
                let Some(endpoints) = block(scen, n_agents, k) else { break };
                let base = SuccessRow {
                    schema: SCHEMA_VERSION,
                    row: "instance".into(),
                    map: config.map_name.clone(),
                    objectives: config.objectives,
                    agents: n_agents,
                    seed: Some(seed),
                    instance: Some(k),
                    backend: Backend::Tx,
                    complete: None,
                    found: None,
                    solutions: None,
                    expansions: None,
                    first_solution_expansions: None,
                    metric: None,
                    successes: None,
                    n: None,
                    success_rate: None,
                    error: None,
                    first_solution_s: None,
                    elapsed_s: None,
                };
                let instance = match build_instance(map, &endpoints, config.objectives, cost_seed(seed, k)) {
                    Ok(i) => i,
                    Err(e) => {
                        for backend in Backend::ALL {
                            rows.push(SuccessRow { backend, error: Some(e.to_string()), ..base.clone() });
                        }
                        continue;
                    }
                };
                warm_up(&instance);
                for backend in Backend::ALL {
                    let options = SolveOptions { backend, time_limit: Some(config.time_limit), ..Default::default() };
                    rows.push(match solve(&instance, &options) {
                        Ok(r) => {
                            log(&format!(
                                "N={n_agents} seed={seed} instance={k} {backend}: complete={} solutions={}",
                                r.complete,
                                r.solutions.len()
                            ));
                            SuccessRow {
                                backend,
                                complete: Some(r.complete),
                                found: Some(!r.solutions.is_empty()),
                                solutions: Some(r.solutions.len()),
                                expansions: Some(r.stats.expansions),
                                first_solution_expansions: r.stats.first_solution_expansions,
                                first_solution_s: r.stats.first_solution_s,
                                elapsed_s: Some(r.stats.elapsed_s),
                                ..base.clone()
                            }
                        }
                        Err(e) => SuccessRow { backend, error: Some(e.to_string()), ..base.clone() },
                    });
                }
            }
        }
    }
    let mut groups: BTreeMap<(usize, Backend), (usize, usize, usize)> = BTreeMap::new();
    for r in &rows {
        let g = groups.entry((r.agents, r.backend)).or_default();
        g.0 += 1;
        g.1 += usize::from(r.complete == Some(true));
        g.2 += usize::from(r.found == Some(true));
    }
    for ((agents, backend), (n, complete, found)) in groups {
        for (metric, successes) in [("complete", complete), ("found", found)] {
            rows.push(SuccessRow {
                schema: SCHEMA_VERSION,
                row: "rate".into(),
                map: config.map_name.clone(),
                objectives: config.objectives,
                agents,
                seed: None,
                instance: None,
                backend,
                complete: None,
                found: None,
                solutions: None,
                expansions: None,
                first_solution_expansions: None,
                metric: Some(metric.into()),
                successes: Some(successes),
                n: Some(n),
                success_rate: Some(successes as f64 / n as f64),
                error: None,
                first_solution_s: None,
                elapsed_s: None,
            });
        }
    }
    rows
}

/// Mean `mean_call_time_s` of the aggregate row for `(objectives, backend)`.
pub fn map_mean(rows: &[LowLevelRow], objectives: usize, backend: Backend) -> Option<f64> {
    rows.iter()
        .find(|r| r.row == "map" && r.objectives == objectives && r.backend == backend)
        .and_then(|r| r.mean_call_time_s)
}

/// Success rate of the aggregate row for `(agents, backend, metric)`.
pub fn success_rate(rows: &[SuccessRow], agents: usize, backend: Backend, metric: &str) -> Option<f64> {
    rows.iter()
        .find(|r| r.row == "rate" && r.agents == agents && r.backend == backend && r.metric.as_deref() == Some(metric))
        .and_then(|r| r.success_rate)
}
