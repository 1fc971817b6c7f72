//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes a MovingAI map as text plus a JSON request and returns
//! a JSON string. Failures come back as `{"error": "..."}` so the page never
//! has to catch exceptions.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;
use wasm_bindgen::prelude::*;
use web_time::Instant;

use momapf::graph::Cell;
use momapf::intervals::{build_intervals, INFINITY};
use momapf::map_io::{build_instance, parse_map, GridMap};
use momapf::mocbs::{solve, Backend, SolutionFile, SolveOptions};
use momapf::namoa_tx::plan_tx;
use momapf::{mosipp, Constraint, ConstraintSet, Graph, OpenOrder, PlanOptions, PlanOutcome};

/// A cell blocked for one time step, e.g. by a moving obstacle.
#[derive(Clone, Debug, Deserialize)]
pub struct Block {
    pub cell: [u32; 2],
    pub time: u32,
}

#[derive(Clone, Debug, Deserialize)]
pub struct PlanRequest {
    pub start: [u32; 2],
    pub goal: [u32; 2],
    #[serde(default = "two")]
    pub objectives: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub blocks: Vec<Block>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct AgentRequest {
    pub start: [u32; 2],
    pub goal: [u32; 2],
}

#[derive(Clone, Debug, Deserialize)]
pub struct SolveRequest {
    pub agents: Vec<AgentRequest>,
    #[serde(default = "two")]
    pub objectives: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub backend: Backend,
    #[serde(default = "default_limit_ms")]
    pub time_limit_ms: u64,
}

fn two() -> usize {
    2
}

fn default_limit_ms() -> u64 {
    5_000
}

#[derive(Serialize)]
struct PlannerReport {
    status: String,
    costs: Vec<Vec<u64>>,
    paths: Vec<Vec<Cell>>,
    expanded: u64,
    generated: u64,
    time_ms: f64,
}

fn cell(c: [u32; 2]) -> Cell {
    (c[0], c[1])
}

fn constraints(graph: &Graph, blocks: &[Block]) -> Result<ConstraintSet, String> {
    let mut cs = ConstraintSet::new();
    for b in blocks {
        let node = graph.node_at(cell(b.cell)).ok_or_else(|| format!("cell {:?} is not passable", b.cell))?;
        cs.add(Constraint::Node { node, time: b.time });
    }
    Ok(cs)
}

fn report(graph: &Graph, outcome: PlanOutcome, elapsed: Duration) -> PlannerReport {
    PlannerReport {
        status: format!("{:?}", outcome.status),
        costs: outcome.trajectories.iter().map(|p| p.cost.as_slice().to_vec()).collect(),
        paths: outcome
            .trajectories
            .iter()
            .map(|p| p.vertices.iter().filter_map(|&v| graph.coord(v)).collect())
            .collect(),
        expanded: outcome.stats.expanded,
        generated: outcome.stats.generated,
        time_ms: elapsed.as_secs_f64() * 1e3,
    }
}

fn finish(result: Result<serde_json::Value, String>) -> String {
    result.unwrap_or_else(|e| json!({ "error": e })).to_string()
}

fn load(map_text: &str) -> Result<GridMap, String> {
    parse_map(map_text).map_err(|e| e.to_string())
}

fn safe_intervals_json(map_text: &str, blocks_json: &str) -> Result<serde_json::Value, String> {
    let map = load(map_text)?;
    let graph = map.to_graph();
    let blocks: Vec<Block> = serde_json::from_str(blocks_json).map_err(|e| e.to_string())?;
    let cs = constraints(&graph, &blocks)?;
    let cells: Vec<_> = (0..graph.num_nodes())
        .map(|v| {
            let intervals: Vec<_> = build_intervals(v, &cs)
                .iter()
                .map(|i| json!([i.start, (i.end != INFINITY).then_some(i.end)]))
                .collect();
            json!({ "cell": graph.coord(v), "intervals": intervals })
        })
        .collect();
    Ok(json!({ "cells": cells }))
}

fn plan_pareto_json(map_text: &str, request_json: &str) -> Result<serde_json::Value, String> {
    let map = load(map_text)?;
    let req: PlanRequest = serde_json::from_str(request_json).map_err(|e| e.to_string())?;
    let instance = build_instance(&map, &[(cell(req.start), cell(req.goal))], req.objectives, req.seed)
        .map_err(|e| e.to_string())?;
    let cs = constraints(&instance.graph, &req.blocks)?;
    let problem = instance.problem(0);
    let options = PlanOptions { order: OpenOrder::Lexicographic, ..Default::default() };
    let t0 = Instant::now();
    let sipp = mosipp::plan(&problem, &cs, &options);
    let sipp = report(&instance.graph, sipp, t0.elapsed());
    let t0 = Instant::now();
    let tx = plan_tx(&problem, &cs, &options);
    let tx = report(&instance.graph, tx, t0.elapsed());
    Ok(json!({ "sipp": sipp, "tx": tx }))
}

fn solve_mapf_json(map_text: &str, request_json: &str) -> Result<serde_json::Value, String> {
    let map = load(map_text)?;
    let req: SolveRequest = serde_json::from_str(request_json).map_err(|e| e.to_string())?;
    let endpoints: Vec<(Cell, Cell)> = req.agents.iter().map(|a| (cell(a.start), cell(a.goal))).collect();
    let instance = build_instance(&map, &endpoints, req.objectives, req.seed).map_err(|e| e.to_string())?;
    let options = SolveOptions {
        backend: req.backend,
        time_limit: Some(Duration::from_millis(req.time_limit_ms)),
        ..Default::default()
    };
    let result = solve(&instance, &options).map_err(|e| e.to_string())?;
    let file = SolutionFile::new(&instance, req.backend, Some(req.seed), &result);
    serde_json::to_value(file).map_err(|e| e.to_string())
}

/// Safe intervals of every passable cell under `blocks_json`, a list of
/// `{"cell": [row, col], "time": t}`. Unbounded ends are `null`.
#[wasm_bindgen]
pub fn safe_intervals(map_text: &str, blocks_json: &str) -> String {
    finish(safe_intervals_json(map_text, blocks_json))
}

/// Single-agent Pareto paths from both planners for a [`PlanRequest`].
#[wasm_bindgen]
pub fn plan_pareto(map_text: &str, request_json: &str) -> String {
    finish(plan_pareto_json(map_text, request_json))
}

/// Multi-agent Pareto-optimal solutions for a [`SolveRequest`], in the
/// solution file format written by the `momapf solve` command.
#[wasm_bindgen]
pub fn solve_mapf(map_text: &str, request_json: &str) -> String {
    finish(solve_mapf_json(map_text, request_json))
}
