use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use momapf::bench::{self, LowLevelConfig, SuccessConfig};
use momapf::map_io::{self, build_instance, instance_from_config, load_instance};
use momapf::mocbs::{cross_validate, solve, Backend, SolutionFile, SolveOptions};
use momapf::random_instances::random_joint;
use momapf::{Error, Instance, Result};

#[derive(Parser)]
#[command(name = "momapf", version, about = "Multi-objective multi-agent path finding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance config and write the solutions as JSON.
    Solve(SolveArgs),
    /// Average low-level time per call for both backends.
    BenchLowlevel(LowLevelArgs),
    /// Success rates of both backends as the number of agents grows.
    BenchSuccess(SuccessArgs),
    /// Compare both backends with the brute-force joint oracle.
    OracleCheck(OracleArgs),
    /// Write a generated room map and a matching scenario file.
    GenRoom(GenRoomArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "sipp")]
    backend: Backend,
    /// Overrides the config's time limit.
    #[arg(long)]
    time_limit_s: Option<f64>,
    /// Reject individual arrivals after this time step.
    #[arg(long)]
    max_arrival: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    scen: PathBuf,
    #[arg(long = "seeds", alias = "seed", value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    /// Instances per seed, taken as consecutive blocks of scenario entries.
    #[arg(long, default_value_t = 10)]
    instances: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LowLevelArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    objectives: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    agents: usize,
    #[arg(long, default_value_t = 60.0)]
    time_limit_s: f64,
}

#[derive(Args)]
struct SuccessArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    #[arg(long, default_value_t = 2)]
    objectives: usize,
    #[arg(long, value_delimiter = ',', default_value = "2,4,6,8")]
    agents: Vec<usize>,
    #[arg(long, default_value_t = 300.0)]
    time_limit_s: f64,
}

#[derive(Args)]
struct OracleArgs {
    /// Check this instance instead of random ones.
    #[arg(long, conflicts_with_all = ["map", "scen"])]
    config: Option<PathBuf>,
    /// With `--scen`: check scenario blocks instead of random grids.
    #[arg(long, requires = "scen")]
    map: Option<PathBuf>,
    #[arg(long, requires = "map")]
    scen: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    agents: usize,
    #[arg(long, default_value_t = 2)]
    objectives: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of instances to check.
    #[arg(long, default_value_t = 20)]
    count: usize,
    /// Arrival cap shared by the planners and the oracle.
    #[arg(long, default_value_t = 8)]
    horizon: u32,
    /// Largest side of random grids.
    #[arg(long, default_value_t = 4)]
    max_side: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenRoomArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    rooms: u32,
    #[arg(long, default_value_t = 3)]
    room_size: u32,
    #[arg(long, default_value_t = 200)]
    entries: usize,
    /// Entries are pairwise distinct within blocks of this size.
    #[arg(long, default_value_t = 10)]
    block: usize,
    #[arg(long)]
    map_out: PathBuf,
    #[arg(long)]
    scen_out: PathBuf,
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| Error::Io { path: path.to_path_buf(), source: e }),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Error::Io { path: PathBuf::from("<stdout>"), source: e }),
    }
}

fn map_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn seconds(s: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(s).map_err(|_| Error::InvalidInstance(format!("invalid time limit {s}")))
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode> {
    let config = load_instance(&args.config)?;
    let instance = instance_from_config(&config)?;
    let options = SolveOptions {
        backend: args.backend,
        time_limit: Some(seconds(args.time_limit_s.unwrap_or(config.time_limit_s))?),
        max_arrival: args.max_arrival,
        ..Default::default()
    };
    let result = solve(&instance, &options)?;
    let file = SolutionFile::new(&instance, args.backend, Some(config.seed), &result);
    write_output(args.out.as_deref(), (file.to_json() + "\n").as_bytes())?;
    if result.complete {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("time limit reached; {} solutions found so far", result.solutions.len());
        Ok(ExitCode::from(2))
    }
}

fn load_sweep(args: &SweepArgs) -> Result<(map_io::GridMap, Vec<map_io::ScenEntry>)> {
    let map = map_io::read_map(&args.map)?;
    let scen = map_io::read_scen(&args.scen, &map)?;
    Ok((map, scen))
}

fn csv_bytes<T: serde::Serialize>(header: &[&str], rows: &[T]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    map_io::write_results(&mut buf, header, rows)?;
    Ok(buf)
}

fn cmd_bench_lowlevel(args: LowLevelArgs) -> Result<ExitCode> {
    let (map, scen) = load_sweep(&args.sweep)?;
    let config = LowLevelConfig {
        map_name: map_name(&args.sweep.map),
        objectives: args.objectives,
        agents: args.agents,
        seeds: args.sweep.seeds.clone(),
        instances: args.sweep.instances,
        time_limit: seconds(args.time_limit_s)?,
    };
    let rows = bench::bench_lowlevel(&scen, &map, &config, |line| eprintln!("{line}"));
    for &m in &config.objectives {
        if let (Some(tx), Some(sipp)) =
            (bench::map_mean(&rows, m, Backend::Tx), bench::map_mean(&rows, m, Backend::Sipp))
        {
            eprintln!("M={m}: mean call time tx {tx:.3e} s, sipp {sipp:.3e} s, ratio {:.2}", tx / sipp);
        }
    }
    write_output(args.sweep.out.as_deref(), &csv_bytes(bench::LOWLEVEL_COLUMNS, &rows)?)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench_success(args: SuccessArgs) -> Result<ExitCode> {
    let (map, scen) = load_sweep(&args.sweep)?;
    let config = SuccessConfig {
        map_name: map_name(&args.sweep.map),
        objectives: args.objectives,
        agents: args.agents,
        seeds: args.sweep.seeds.clone(),
        instances: args.sweep.instances,
        time_limit: seconds(args.time_limit_s)?,
    };
    let rows = bench::bench_success(&scen, &map, &config, |line| eprintln!("{line}"));
    write_output(args.sweep.out.as_deref(), &csv_bytes(bench::SUCCESS_COLUMNS, &rows)?)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle_check(args: OracleArgs) -> Result<ExitCode> {
    let mut cases: Vec<(String, Instance)> = Vec::new();
    if let Some(path) = &args.config {
        cases.push((path.display().to_string(), instance_from_config(&load_instance(path)?)?));
    } else if let (Some(map_path), Some(scen_path)) = (&args.map, &args.scen) {
        let map = map_io::read_map(map_path)?;
        let scen = map_io::read_scen(scen_path, &map)?;
        for k in 0..args.count {
            let Some(endpoints) = bench::block(&scen, args.agents, k) else { break };
            let instance = build_instance(&map, &endpoints, args.objectives, bench::cost_seed(args.seed, k))?;
            cases.push((format!("instance {k}"), instance));
        }
    } else {
        for s in args.seed..args.seed + args.count as u64 {
            let (instance, _) = random_joint(s, args.agents, args.objectives, args.max_side, 1..=1);
            cases.push((format!("seed {s}"), instance));
        }
    }
    let mut report = String::new();
    let mut failures = 0;
    for (name, instance) in &cases {
        let check = cross_validate(instance, args.horizon)?;
        match check.mismatch() {
            None => report.push_str(&format!("{name}: ok, {} solutions\n", check.oracle.len())),
            Some(m) => {
                failures += 1;
                report.push_str(&format!("{name}: MISMATCH {m}\n"));
            }
        }
    }
    report.push_str(&format!("{} of {} instances agree\n", cases.len() - failures, cases.len()));
    write_output(args.out.as_deref(), report.as_bytes())?;
    Ok(if failures == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_gen_room(args: GenRoomArgs) -> Result<ExitCode> {
    let map = bench::room_map(args.seed, args.rooms, args.room_size);
    let entries = bench::random_scen(&map, &map_name(&args.map_out), args.seed, args.entries, args.block);
    write_output(Some(&args.map_out), map.to_string().as_bytes())?;
    write_output(Some(&args.scen_out), bench::format_scen(&entries, &map).as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::BenchLowlevel(a) => cmd_bench_lowlevel(a),
        Command::BenchSuccess(a) => cmd_bench_success(a),
        Command::OracleCheck(a) => cmd_oracle_check(a),
        Command::GenRoom(a) => cmd_gen_room(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
