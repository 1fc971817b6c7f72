//! Grid maps, scenarios, cost profiles and instance files.
//!
//! Maps and scenarios use the MovingAI benchmark formats. Instance configs
//! are TOML:
//!
//! ```toml
//! map = "maps/room-32-32-4.map"   # relative to the config file
//! objectives = 2
//! seed = 7
//! time_limit_s = 300.0
//! agents = [ { start = [1, 1], goal = [5, 9] } ]  # [row, col]
//! ```
//!
//! Cost profiles are drawn from `ChaCha8Rng::seed_from_u64(seed)` (crate
//! `rand_chacha` 0.3), sampling uniform integers with `rand` 0.8's
//! `gen_range`: first every agent scale (agent-major, component-minor), then
//! every edge scale in edge-id order, i.e. sorted `(min, max)` endpoints.

use std::fmt;
use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path as FsPath, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cost::CostVector;
use crate::error::{Error, Result};
use crate::graph::{Cell, Graph};
use crate::problem::{AgentSpec, EdgeScales, Heuristic, Instance};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridMap {
    pub height: u32,
    pub width: u32,
    /// Row-major passability.
    pub cells: Vec<bool>,
}

impl GridMap {
    pub fn passable(&self, (row, col): Cell) -> bool {
        row < self.height && col < self.width && self.cells[(row * self.width + col) as usize]
    }

    /// 4-connected graph over the passable cells.
    pub fn to_graph(&self) -> Graph {
        Graph::grid(self.height, self.width, |r, c| self.passable((r, c)))
    }
}

impl fmt::Display for GridMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "type octile\nheight {}\nwidth {}\nmap", self.height, self.width)?;
        for row in self.cells.chunks(self.width as usize) {
            let line: String = row.iter().map(|&p| if p { '.' } else { '@' }).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

fn header_value(lines: &[&str], idx: usize, key: &str) -> Result<String> {
    let line = lines.get(idx).ok_or_else(|| Error::parse(idx + 1, format!("missing `{key}` line")))?;
    let mut parts = line.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some(k), Some(v), None) if k == key => Ok(v.to_string()),
        _ => Err(Error::parse(idx + 1, format!("expected `{key} <value>`, found `{line}`"))),
    }
}

/// Parses a MovingAI `.map` file.
pub fn parse_map(text: &str) -> Result<GridMap> {
    let lines: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).collect();
    header_value(&lines, 0, "type")?;
    let dim = |idx, key| -> Result<u32> {
        let v = header_value(&lines, idx, key)?;
        v.parse().map_err(|_| Error::parse(idx + 1, format!("`{key}` is not a non-negative integer")))
    };
    let height = dim(1, "height")?;
    let width = dim(2, "width")?;
    if lines.get(3).map(|l| l.trim()) != Some("map") {
        return Err(Error::parse(4, "expected `map`"));
    }
    if height == 0 || width == 0 {
        return Err(Error::parse(2, "map must have positive height and width"));
    }
    let mut cells = Vec::with_capacity((height * width) as usize);
    for r in 0..height as usize {
        let line_no = r + 5;
        let row = lines
            .get(r + 4)
            .ok_or_else(|| Error::parse(line_no, format!("expected {height} map rows, found {r}")))?;
        if row.chars().count() != width as usize {
            return Err(Error::parse(line_no, format!("row has {} cells, expected {width}", row.chars().count())));
        }
        for ch in row.chars() {
            cells.push(match ch {
                '.' | 'G' => true,
                '@' | 'O' | 'T' | 'W' => false,
                other => return Err(Error::parse(line_no, format!("unknown cell character `{other}`"))),
            });
        }
    }
    if let Some(extra) = lines[4 + height as usize..].iter().position(|l| !l.trim().is_empty()) {
        return Err(Error::parse(5 + height as usize + extra, "trailing content after map rows"));
    }
    Ok(GridMap { height, width, cells })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenEntry {
    pub bucket: u32,
    pub map_name: String,
    pub start: Cell,
    pub goal: Cell,
    pub optimal_length: f64,
}

/// Parses a MovingAI `.scen` file and checks every endpoint against `map`.
pub fn parse_scen(text: &str, map: &GridMap) -> Result<Vec<ScenEntry>> {
    let mut lines = text.lines().map(|l| l.trim_end_matches('\r')).enumerate();
    match lines.next() {
        Some((_, l)) if matches!(l.split_whitespace().collect::<Vec<_>>()[..], ["version", "1" | "1.0"]) => {}
        Some((_, l)) => return Err(Error::parse(1, format!("unsupported scenario header `{l}`"))),
        None => return Err(Error::parse(1, "empty scenario file")),
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 9 {
            return Err(Error::parse(line_no, format!("expected 9 tab-separated fields, found {}", fields.len())));
        }
        let num = |i: usize| -> Result<u32> {
            fields[i].trim().parse().map_err(|_| Error::parse(line_no, format!("field {} is not an integer", i + 1)))
        };
        let (map_w, map_h) = (num(2)?, num(3)?);
        if (map_w, map_h) != (map.width, map.height) {
            return Err(Error::parse(line_no, format!("scenario map is {map_w}x{map_h}, loaded map is {}x{}", map.width, map.height)));
        }
        let start = (num(5)?, num(4)?);
        let goal = (num(7)?, num(6)?);
        for (what, cell) in [("start", start), ("goal", goal)] {
            if cell.0 >= map.height || cell.1 >= map.width {
                return Err(Error::parse(line_no, format!("{what} {cell:?} is out of bounds")));
            }
            if !map.passable(cell) {
                return Err(Error::parse(line_no, format!("{what} {cell:?} is a blocked cell")));
            }
        }
        out.push(ScenEntry {
            bucket: num(0)?,
            map_name: fields[1].to_string(),
            start,
            goal,
            optimal_length: fields[8]
                .trim()
                .parse()
                .map_err(|_| Error::parse(line_no, "optimal length is not a number"))?,
        });
    }
    Ok(out)
}

/// Agent scales `a` and edge scales `b(e)` of one instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostProfile {
    pub agent_scales: Vec<CostVector>,
    pub edge_scales: EdgeScales,
}

pub const DEFAULT_COST_RANGE: RangeInclusive<u64> = 1..=10;

/// Seeded cost profile with every component drawn from `[1, 10]`.
pub fn generate_cost_profile(seed: u64, objectives: usize, agents: usize, graph: &Graph) -> CostProfile {
    generate_cost_profile_in(seed, objectives, agents, graph, DEFAULT_COST_RANGE)
}

/// [`generate_cost_profile`] with a custom component range.
pub fn generate_cost_profile_in(
    seed: u64,
    objectives: usize,
    agents: usize,
    graph: &Graph,
    range: RangeInclusive<u64>,
) -> CostProfile {
    assert!(objectives >= 1, "at least one objective");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> CostVector {
        (0..objectives).map(|_| rng.gen_range(range.clone())).collect::<Vec<_>>().into()
    };
    let agent_scales = (0..agents).map(|_| draw(&mut rng)).collect();
    let edge_scales = EdgeScales((0..graph.num_edges()).map(|_| draw(&mut rng)).collect());
    CostProfile { agent_scales, edge_scales }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub start: [u32; 2],
    pub goal: [u32; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub map: PathBuf,
    pub objectives: usize,
    pub seed: u64,
    pub time_limit_s: f64,
    pub agents: Vec<AgentConfig>,
    /// Where the agents came from, e.g. `room.scen[0..2]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

/// Reads an instance config and checks that the referenced map exists.
/// A relative map path is resolved against the config's directory and
/// stored resolved.
pub fn load_instance(path: impl AsRef<FsPath>) -> Result<InstanceConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut config: InstanceConfig =
        toml::from_str(&text).map_err(|e| Error::Schema { path: path.to_path_buf(), message: e.to_string() })?;
    if config.map.is_relative() {
        if let Some(dir) = path.parent() {
            config.map = dir.join(&config.map);
        }
    }
    if !config.map.is_file() {
        return Err(Error::Schema {
            path: path.to_path_buf(),
            message: format!("map file {} does not exist", config.map.display()),
        });
    }
    Ok(config)
}

pub fn save_instance(path: impl AsRef<FsPath>, config: &InstanceConfig) -> Result<()> {
    let path = path.as_ref();
    let text = toml::to_string(config).map_err(|e| Error::Schema { path: path.to_path_buf(), message: e.to_string() })?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_map(path: impl AsRef<FsPath>) -> Result<GridMap> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_map(&text).map_err(|e| Error::Schema { path: path.to_path_buf(), message: e.to_string() })
}

pub fn read_scen(path: impl AsRef<FsPath>, map: &GridMap) -> Result<Vec<ScenEntry>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scen(&text, map).map_err(|e| Error::Schema { path: path.to_path_buf(), message: e.to_string() })
}

/// Builds a solvable instance: graph, agents and seeded costs.
pub fn build_instance(map: &GridMap, endpoints: &[(Cell, Cell)], objectives: usize, seed: u64) -> Result<Instance> {
    let graph = map.to_graph();
    let node = |cell: Cell| {
        graph.node_at(cell).ok_or_else(|| Error::InvalidInstance(format!("cell {cell:?} is not passable")))
    };
    let mut agents = Vec::with_capacity(endpoints.len());
    let profile = generate_cost_profile(seed, objectives, endpoints.len(), &graph);
    for (id, (&(s, g), scale)) in endpoints.iter().zip(profile.agent_scales).enumerate() {
        agents.push(AgentSpec { id, start: node(s)?, goal: node(g)?, cost_scale: scale });
    }
    Instance::new(graph, agents, &profile.edge_scales, Heuristic::Manhattan)
}

/// Resolves a loaded config into an [`Instance`].
pub fn instance_from_config(config: &InstanceConfig) -> Result<Instance> {
    let map = read_map(&config.map)?;
    let endpoints: Vec<(Cell, Cell)> =
        config.agents.iter().map(|a| ((a.start[0], a.start[1]), (a.goal[0], a.goal[1]))).collect();
    build_instance(&map, &endpoints, config.objectives, config.seed)
}

/// Writes `header` and then the serialized records as CSV with LF line
/// endings. The header is written even when there are no records.
pub fn save_results<T: Serialize>(path: impl AsRef<FsPath>, header: &[&str], records: &[T]) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_results(file, header, records)
}

pub fn write_results<T: Serialize, W: std::io::Write>(out: W, header: &[&str], records: &[T]) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    writer.write_record(header)?;
    for r in records {
        writer.serialize(r)?;
    }
    writer.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map_text(rows: &[&str]) -> String {
        format!("type octile\nheight {}\nwidth {}\nmap\n{}\n", rows.len(), rows[0].len(), rows.join("\n"))
    }

    #[test]
    fn parses_small_maps() {
        let g = parse_map(&map_text(&["..", ".."])).unwrap().to_graph();
        assert_eq!((g.num_nodes(), g.num_edges()), (4, 4));
        let g = parse_map(&map_text(&["..", ".@"])).unwrap().to_graph();
        assert_eq!((g.num_nodes(), g.num_edges()), (3, 2));
        let m = parse_map(&map_text(&["G.T", "OW@"])).unwrap();
        assert_eq!(m.cells, vec![true, true, false, false, false, false]);
    }

    #[test]
    fn rejects_malformed_maps() {
        assert!(matches!(parse_map("type octile\nheight 0\nwidth 3\nmap\n"), Err(Error::Parse { .. })));
        let err = parse_map("type octile\nheight 2\nwidth 2\nmap\n..\n.\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 6, .. }), "{err}");
        let err = parse_map(&map_text(&["..", ".x"])).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 6, .. }), "{err}");
        assert!(parse_map("type octile\nwidth 2\nheight 2\nmap\n..\n..\n").is_err());
        assert!(parse_map("type octile\nheight 1\nwidth 2\nmap\n..\n..\n").is_err());
    }

    #[test]
    fn display_round_trips() {
        let m = parse_map(&map_text(&[".@.", "...", "@@."])).unwrap();
        assert_eq!(parse_map(&m.to_string()).unwrap(), m);
    }

    #[test]
    fn scenario_parsing() {
        let m = parse_map(&map_text(&["...", ".@."])).unwrap();
        let row = |sc, sr, gc, gr| format!("0\tx.map\t3\t2\t{sc}\t{sr}\t{gc}\t{gr}\t3.0");
        let entries = parse_scen(&format!("version 1\n{}\n", row(0, 0, 2, 1)), &m).unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!((entries[0].start, entries[0].goal), ((0, 0), (1, 2)));
        assert!(parse_scen(&format!("version 1\n{}\n", row(1, 1, 2, 1)), &m).is_err());
        assert!(parse_scen(&format!("version 1\n{}\n", row(5, 0, 2, 1)), &m).is_err());
        assert!(parse_scen("version 1\n", &m).unwrap().is_empty());
        assert!(parse_scen("version 2\n", &m).is_err());
    }

    #[test]
    fn cost_profiles_are_seeded_and_in_range() {
        let g = Graph::grid(4, 4, |_, _| true);
        let a = generate_cost_profile(42, 3, 2, &g);
        assert_eq!(a, generate_cost_profile(42, 3, 2, &g));
        assert_ne!(a, generate_cost_profile(43, 3, 2, &g));
        assert_eq!(a.edge_scales.0.len(), g.num_edges());
        let all = a.agent_scales.iter().chain(a.edge_scales.0.iter()).flat_map(|c| c.as_slice().to_vec());
        assert!(all.clone().all(|x| (1..=10).contains(&x)));
        let scalar = generate_cost_profile(1, 1, 1, &g);
        assert!(scalar.agent_scales.iter().all(|c| c.len() == 1));
    }

    #[test]
    fn instance_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("m.map"), map_text(&["...", "..."])).unwrap();
        let config = InstanceConfig {
            map: PathBuf::from("m.map"),
            objectives: 2,
            seed: 9,
            time_limit_s: 1.5,
            agents: vec![AgentConfig { start: [0, 0], goal: [1, 2] }],
            source: None,
        };
        let path = dir.path().join("inst.toml");
        save_instance(&path, &config).unwrap();
        let loaded = load_instance(&path).unwrap();
        assert_eq!(loaded, InstanceConfig { map: dir.path().join("m.map"), ..config.clone() });

        fs::write(&path, "map = \"m.map\"\nobjectives = 2\ntime_limit_s = 1.0\nagents = []\n").unwrap();
        let err = load_instance(&path).unwrap_err();
        assert!(err.to_string().contains("seed"), "{err}");

        let missing = InstanceConfig { map: PathBuf::from("nope.map"), ..config };
        save_instance(&path, &missing).unwrap();
        let err = load_instance(&path).unwrap_err();
        assert!(err.to_string().contains("nope.map"), "{err}");
    }
}
