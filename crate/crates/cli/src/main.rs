//! Command-line front end: scenario generation, single runs and the
//! cluster-count sweep.
//!
//! Exit status: 0 on success, 1 when the placement is infeasible, 2 on
//! input errors (unreadable or invalid scenario, bad parameters).

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nfv_orch::cluster::ClusterParams;
use nfv_orch::evaluator::{BruteForceError, Objective};
use nfv_orch::experiment::{run_one, sweep, write_rows, Algorithm, Format, Row, Timing};
use nfv_orch::ga::{GaConfig, GaObjective};
use nfv_orch::scenario_gen::{reference_scenario, ReferenceParams};
use nfv_orch::{validate_scenario, Instance, Outcome, PlaceError, Scenario};

const EXIT_INFEASIBLE: u8 = 1;
const EXIT_INPUT: u8 = 2;

#[derive(Parser)]
#[command(name = "nfv-orch", version, about = "VNF forwarding-graph placement")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the structured output here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
    /// Report runtime_ms as 0 so that output is byte-reproducible.
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    JsonLines,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a fat-tree scenario with random services.
    Generate(GenerateArgs),
    /// Place one scenario with one algorithm.
    Run(RunArgs),
    /// Cluster-count sweep plus GA benchmark rows.
    Sweep(SweepArgs),
    /// Check a scenario file.
    Validate { scenario: PathBuf },
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 4)]
    fat_tree_k: usize,
    #[arg(long, default_value_t = 3)]
    services: usize,
    #[arg(long, default_value_t = 5)]
    vnf_min: usize,
    #[arg(long, default_value_t = 10)]
    vnf_max: usize,
    /// Number of administrative domains the pods are spread over.
    #[arg(long, default_value_t = 1)]
    domains: usize,
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long, default_value_t = 10.0)]
    interdomain_weight: f64,
    #[arg(long, default_value_t = 10.0)]
    foreign_cost_factor: f64,
    #[arg(long)]
    local_domain: Option<String>,
}

impl ClusterArgs {
    fn params(&self, k: usize) -> ClusterParams {
        ClusterParams {
            k,
            interdomain_weight: self.interdomain_weight,
            foreign_cost_factor: self.foreign_cost_factor,
            local_domain: self.local_domain.clone(),
        }
    }
}

#[derive(Args)]
struct GaArgs {
    #[arg(long, default_value_t = 50)]
    ga_pool: usize,
    #[arg(long, default_value_t = 200)]
    ga_generations: usize,
    #[arg(long, default_value_t = 0.8)]
    ga_crossover: f64,
    #[arg(long, default_value_t = 0.05)]
    ga_mutation: f64,
}

impl GaArgs {
    fn config(&self, objective: GaObjective, seed: u64) -> GaConfig {
        GaConfig {
            pool_size: self.ga_pool,
            generations: self.ga_generations,
            crossover_rate: self.ga_crossover,
            mutation_rate: self.ga_mutation,
            objective,
            seed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    MinDistance,
    MinLatency,
    Cluster,
    Ga,
    BruteForce,
}

#[derive(Clone, Copy, ValueEnum)]
enum Goal {
    Cost,
    Delay,
}

#[derive(Args)]
struct RunArgs {
    scenario: PathBuf,
    #[arg(long, value_enum)]
    algo: Algo,
    #[arg(long, default_value_t = 1)]
    clusters: usize,
    #[command(flatten)]
    cluster: ClusterArgs,
    #[command(flatten)]
    ga: GaArgs,
    #[arg(long, value_enum, default_value_t = Goal::Cost)]
    ga_objective: Goal,
    /// Objective of the brute-force oracle.
    #[arg(long, value_enum, default_value_t = Goal::Cost)]
    objective: Goal,
}

#[derive(Args)]
struct SweepArgs {
    scenario: PathBuf,
    #[arg(long, default_value_t = 1)]
    k_min: usize,
    #[arg(long, default_value_t = 7)]
    k_max: usize,
    /// Skip the GA(cost) and GA(delay) rows.
    #[arg(long)]
    no_ga: bool,
    #[command(flatten)]
    cluster: ClusterArgs,
    #[command(flatten)]
    ga: GaArgs,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Infeasible(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Infeasible(msg)) => {
            eprintln!("infeasible: {msg}");
            ExitCode::from(EXIT_INFEASIBLE)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Generate(args) => generate(cli, args),
        Command::Run(args) => run(cli, args),
        Command::Sweep(args) => run_sweep(cli, args),
        Command::Validate { scenario } => {
            let inst = load(scenario)?;
            println!(
                "valid: {} vnfs, {} hosts, {} services, resources [{}]",
                inst.n_vnfs(),
                inst.n_hosts(),
                inst.services.len(),
                inst.resources.join(", ")
            );
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<Instance, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let raw = Scenario::from_json(&text)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    validate_scenario(raw).map_err(|errs| {
        let lines: Vec<String> = errs.iter().map(|e| format!("  {e}")).collect();
        Failure::Input(format!(
            "{} is invalid:\n{}",
            path.display(),
            lines.join("\n")
        ))
    })
}

fn sink(cli: &Cli) -> Result<Box<dyn Write>, Failure> {
    Ok(match &cli.output {
        Some(p) => Box::new(io::BufWriter::new(
            fs::File::create(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn timing(cli: &Cli) -> Timing {
    if cli.no_timing {
        Timing::Omitted
    } else {
        Timing::Measured
    }
}

fn format(cli: &Cli) -> Format {
    match cli.format {
        OutFormat::Csv => Format::Csv,
        OutFormat::JsonLines => Format::JsonLines,
    }
}

fn generate(cli: &Cli, args: &GenerateArgs) -> Result<(), Failure> {
    let mut params = ReferenceParams::default();
    params.fat_tree.k = args.fat_tree_k;
    params.fat_tree.domains = args.domains;
    params.services.count = args.services;
    params.services.vnf_min = args.vnf_min;
    params.services.vnf_max = args.vnf_max;
    let scenario =
        reference_scenario(&params, cli.seed).map_err(|e| Failure::Input(e.to_string()))?;
    let mut out = sink(cli)?;
    writeln!(out, "{}", scenario.to_json())?;
    out.flush()?;
    Ok(())
}

fn goal_ga(g: Goal) -> GaObjective {
    match g {
        Goal::Cost => GaObjective::Cost,
        Goal::Delay => GaObjective::Delay,
    }
}

fn run(cli: &Cli, args: &RunArgs) -> Result<(), Failure> {
    let inst = load(&args.scenario)?;
    let algo = match args.algo {
        Algo::MinDistance => Algorithm::MinDistance,
        Algo::MinLatency => Algorithm::MinLatency,
        Algo::Cluster => Algorithm::Cluster(args.cluster.params(args.clusters)),
        Algo::Ga => Algorithm::Ga(args.ga.config(goal_ga(args.ga_objective), cli.seed)),
        Algo::BruteForce => Algorithm::BruteForce(match args.objective {
            Goal::Cost => Objective::Cost,
            Goal::Delay => Objective::Delay,
        }),
    };
    let record = run_one(&inst, &algo, timing(cli));

    print!("{}", report(&inst, &algo, &record.row, &record.result));
    if cli.output.is_some() {
        write_rows(std::slice::from_ref(&record.row), format(cli), sink(cli)?)?;
    }

    match record.result {
        Ok(_) => Ok(()),
        Err(PlaceError::InvalidParams(m)) => Err(Failure::Input(m)),
        Err(e @ PlaceError::KTooLarge { .. }) => Err(Failure::Input(e.to_string())),
        Err(e @ PlaceError::BruteForce(BruteForceError::SearchSpaceTooLarge { .. })) => {
            Err(Failure::Input(e.to_string()))
        }
        Err(e) => Err(Failure::Infeasible(e.to_string())),
    }
}

fn report(
    inst: &Instance,
    algo: &Algorithm,
    row: &Row,
    result: &Result<Outcome, PlaceError>,
) -> String {
    let mut s = String::new();
    let param = algo.param();
    if param.is_empty() {
        s += &format!("algorithm: {}\n", algo.label());
    } else {
        s += &format!("algorithm: {} ({param})\n", algo.label());
    }
    match result {
        Ok(out) => {
            s += "placement:\n";
            for (v, h) in &out.placement.assignment {
                s += &format!("  {v} -> {h}\n");
            }
            s += "service delay (ms):\n";
            for (id, d) in &out.metrics.service_delays {
                s += &format!("  {id}: {d}\n");
            }
            s += &format!("total cost: {}\n", out.metrics.total_cost);
            s += &format!("total delay: {} ms\n", out.metrics.total_delay);
            s += &format!("max utilization: {}\n", out.metrics.max_utilization);
            s += &format!("hosts used: {}\n", out.hosts_used(inst).len());
            s += "verdict: feasible\n";
        }
        Err(PlaceError::Infeasible { placement, report }) => {
            s += "placement:\n";
            for (v, h) in &placement.assignment {
                s += &format!("  {v} -> {h}\n");
            }
            s += "verdict: infeasible\n";
            s += &format!("violations: {}\n", report.to_json());
        }
        Err(e) => {
            s += &format!("verdict: infeasible ({e})\n");
        }
    }
    s += &format!("wall time: {} ms\n", row.runtime_ms);
    s
}

fn run_sweep(cli: &Cli, args: &SweepArgs) -> Result<(), Failure> {
    let inst = load(&args.scenario)?;
    let ga = if args.no_ga {
        Vec::new()
    } else {
        vec![
            args.ga.config(GaObjective::Cost, cli.seed),
            args.ga.config(GaObjective::Delay, cli.seed),
        ]
    };
    let records = sweep(
        &inst,
        args.k_min..=args.k_max,
        &args.cluster.params(1),
        &ga,
        timing(cli),
    )
    .map_err(|e| Failure::Input(e.to_string()))?;
    let rows: Vec<Row> = records.into_iter().map(|r| r.row).collect();
    write_rows(&rows, format(cli), sink(cli)?)?;
    Ok(())
}
