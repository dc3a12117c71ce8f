use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;

use d2d_offload::harness::{
    run_sweep, solve_one, timer_cdf, Solution, SolveOptions, SolverKind, SweepConfig,
    SweepVariable, FIG2_FILE, FIG3_FILE, FIG4_FILE,
};
use d2d_offload::instance::generate;
use d2d_offload::montecarlo::validate_assignment;
use d2d_offload::solvers::{evaluate_all_pairs, OrderingKey};
use d2d_offload::{GeneratorConfig, Instance, SolverParams};

/// Offloading experiments: generate instances, solve them, run sweeps and
/// check the analytic model by simulation.
#[derive(Parser)]
#[command(name = "d2d-offload", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random instance and write it as JSON.
    Generate(GenerateArgs),
    /// Solve an instance and write the solution as JSON.
    Solve(SolveArgs),
    /// Average solver costs over a helper-count or alpha sweep (CSV).
    Sweep(SweepArgs),
    /// Empirical CDF of relative timers for a list of alphas (CSV).
    TimerCdf(TimerCdfArgs),
    /// Simulate a solution's helper pairs and compare with the analytic costs.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// JSON generator config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    requesters: Option<usize>,
    #[arg(long)]
    helpers: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    horizon: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Lagrangian,
    CostBased,
    ContactBased,
    Exact,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Lagrangian => SolverKind::Lagrangian,
            SolverArg::CostBased => SolverKind::CostBased,
            SolverArg::ContactBased => SolverKind::ContactBased,
            SolverArg::Exact => SolverKind::Exact,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderingArg {
    Best,
    Mean,
}

impl From<OrderingArg> for OrderingKey {
    fn from(o: OrderingArg) -> Self {
        match o {
            OrderingArg::Best => OrderingKey::Best,
            OrderingArg::Mean => OrderingKey::Mean,
        }
    }
}

#[derive(Args)]
struct ParamArgs {
    /// JSON solver parameters; flags below override its fields.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    subgradient_tolerance: Option<f64>,
    #[arg(long)]
    multiplier_tolerance: Option<f64>,
}

impl ParamArgs {
    fn resolve(&self, base: SolverParams) -> Result<SolverParams> {
        let mut p = match &self.params {
            Some(path) => read_json(path)?,
            None => base,
        };
        if let Some(v) = self.max_iterations {
            p.max_iterations = v;
        }
        if let Some(v) = self.eta {
            p.eta = v;
        }
        if let Some(v) = self.subgradient_tolerance {
            p.subgradient_tolerance = v;
        }
        if let Some(v) = self.multiplier_tolerance {
            p.multiplier_tolerance = v;
        }
        Ok(p)
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(short, long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "lagrangian")]
    solver: SolverArg,
    /// Baseline ordering key.
    #[arg(long, value_enum, default_value = "best")]
    ordering: OrderingArg,
    /// Also run the exhaustive solver and report the gap to the optimum.
    #[arg(long)]
    exact_gap: bool,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariableArg {
    H,
    Alpha,
}

#[derive(Args)]
struct SweepCommon {
    /// JSON sweep config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    requesters: Option<usize>,
    /// Helper count for alpha sweeps.
    #[arg(long)]
    helpers: Option<usize>,
    /// Alpha for helper sweeps.
    #[arg(long)]
    alpha: Option<f64>,
    #[command(flatten)]
    params: ParamArgs,
    /// Directory for the CSV output.
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
}

impl SweepCommon {
    fn resolve(&self, variable: Option<SweepVariable>) -> Result<SweepConfig> {
        let mut c: SweepConfig = match &self.config {
            Some(path) => read_json(path)?,
            None => SweepConfig::default(),
        };
        if let Some(v) = variable {
            if c.variable != v {
                c.variable = v;
                c.values = default_values(v);
            }
        }
        if let Some(v) = &self.values {
            c.values.clone_from(v);
        }
        if let Some(v) = self.instances {
            c.instances = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.requesters {
            c.base.requesters = v;
        }
        if let Some(v) = self.helpers {
            c.base.helpers = v;
        }
        if let Some(v) = self.alpha {
            c.base.alpha = v;
        }
        c.params = self.params.resolve(c.params.clone())?;
        Ok(c)
    }
}

fn default_values(v: SweepVariable) -> Vec<f64> {
    match v {
        SweepVariable::Helpers => vec![3.0, 4.0, 5.0, 6.0, 7.0],
        SweepVariable::Alpha => vec![0.0008, 0.004, 0.02, 0.1],
    }
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    variable: Option<VariableArg>,
    /// Include the exhaustive solver (small instances only).
    #[arg(long)]
    exact: bool,
    #[arg(long, value_enum)]
    ordering: Option<OrderingArg>,
    #[command(flatten)]
    common: SweepCommon,
}

#[derive(Args)]
struct TimerCdfArgs {
    #[command(flatten)]
    common: SweepCommon,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(short, long)]
    instance: PathBuf,
    #[arg(short, long)]
    solution: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the full report as JSON.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn generate_cmd(args: GenerateArgs) -> Result<()> {
    let mut config: GeneratorConfig = match &args.config {
        Some(path) => read_json(path)?,
        None => GeneratorConfig::default(),
    };
    if let Some(v) = args.requesters {
        config.requesters = v;
    }
    if let Some(v) = args.helpers {
        config.helpers = v;
    }
    if let Some(v) = args.alpha {
        config.alpha = v;
    }
    if let Some(v) = args.horizon {
        config.horizon = v;
        config.max_deadline = config.max_deadline.min(v);
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    let instance = generate(&config)?;
    instance
        .save(&args.output)
        .with_context(|| format!("writing {}", args.output.display()))?;
    println!(
        "wrote {} requesters x {} helpers to {}",
        instance.requesters(),
        instance.helpers(),
        args.output.display()
    );
    Ok(())
}

fn solve_cmd(args: SolveArgs) -> Result<()> {
    let options = SolveOptions {
        solver: args.solver.into(),
        params: args.params.resolve(SolverParams::default())?,
        ordering: args.ordering.into(),
        with_exact: args.exact_gap,
    };
    let (_, summary) = solve_one(&args.instance, &options, args.output.as_deref())
        .with_context(|| format!("solving {}", args.instance.display()))?;
    print!("{summary}");
    Ok(())
}

fn sweep_cmd(args: SweepArgs) -> Result<()> {
    let variable = args.variable.map(|v| match v {
        VariableArg::H => SweepVariable::Helpers,
        VariableArg::Alpha => SweepVariable::Alpha,
    });
    let mut config = args.common.resolve(variable)?;
    if args.exact {
        config.solvers.exact = true;
    }
    if let Some(o) = args.ordering {
        config.ordering = o.into();
    }
    let table = run_sweep(&config)?;
    let name = match config.variable {
        SweepVariable::Helpers => FIG2_FILE,
        SweepVariable::Alpha => FIG3_FILE,
    };
    write_csv(&args.common.output_dir, name, &table.to_csv())
}

fn timer_cdf_cmd(args: TimerCdfArgs) -> Result<()> {
    let mut config = args.common.resolve(Some(SweepVariable::Alpha))?;
    if args.common.values.is_none() && args.common.config.is_none() {
        config.values = vec![0.00016, 0.004, 0.1];
    }
    let table = timer_cdf(&config)?;
    write_csv(&args.common.output_dir, FIG4_FILE, &table.to_csv())
}

fn write_csv(dir: &Path, name: &str, csv: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn validate_cmd(args: ValidateArgs) -> Result<bool> {
    let instance = Instance::load(&args.instance)
        .with_context(|| format!("loading {}", args.instance.display()))?;
    let solution = Solution::load(&args.solution)
        .with_context(|| format!("loading {}", args.solution.display()))?;
    let table = evaluate_all_pairs(&instance)?;
    let assignment = table.assignment(solution.choices());
    let report = validate_assignment(&instance, &table, &assignment, args.trials, args.seed)?;
    for row in &report.rows {
        println!(
            "r{} -> h{} t={}: cost {:.6} vs {:.6} (z {:.2}), energy {:.6} vs {:.6} (z {:.2}) {}",
            row.requester,
            row.helper,
            row.timer,
            row.analytic_cost,
            row.empirical_cost,
            row.cost_z,
            row.analytic_energy,
            row.empirical_energy,
            row.energy_z,
            if row.pass { "ok" } else { "MISMATCH" }
        );
    }
    println!(
        "total: analytic {:.6}, empirical {:.6} +/- {:.6}; {}",
        report.analytic_total,
        report.empirical_total,
        report.empirical_total_se,
        if report.pass { "pass" } else { "FAIL" }
    );
    if let Some(path) = &args.output {
        fs::write(path, serde_json::to_string_pretty(&report)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(report.pass)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => generate_cmd(a),
        Command::Solve(a) => solve_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::TimerCdf(a) => timer_cdf_cmd(a),
        Command::Validate(a) => {
            if !validate_cmd(a)? {
                bail!("simulation disagrees with the analytic model");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
