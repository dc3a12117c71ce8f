//! Seeded experiment sweeps and single-instance solves.
//!
//! A sweep varies either the number of helpers or the completion-cost weight
//! `alpha`, draws `instances` random instances per value, runs the selected
//! solvers and averages their objectives. Every replicate gets its own seed
//! derived from the base seed, the sweep value and the replicate index, and
//! results are reduced in replicate order, so output is bit-identical across
//! runs and thread counts.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{generate, GeneratorConfig, Instance};
use crate::seed;
use crate::solvers::{
    contact_based_baseline, cost_based_baseline, evaluate_all_pairs, exact_solve, lagrangian_solve,
    Assignment, Choice, OrderingKey, PairTable, SolverParams, TraceRow, EXACT_LOG2_LIMIT,
};

pub const FIG2_FILE: &str = "fig2_cost_vs_H.csv";
pub const FIG3_FILE: &str = "fig3_cost_vs_alpha.csv";
pub const FIG4_FILE: &str = "fig4_timer_cdf.csv";

/// Points of the relative-timer grid `0, 0.05, ..., 1`.
pub const CDF_STEPS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Helpers,
    Alpha,
}

impl SweepVariable {
    pub fn column(&self) -> &'static str {
        match self {
            SweepVariable::Helpers => "H",
            SweepVariable::Alpha => "alpha",
        }
    }

    fn tag(&self) -> u64 {
        match self {
            SweepVariable::Helpers => 1,
            SweepVariable::Alpha => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSet {
    pub lagrangian: bool,
    pub cost_based: bool,
    pub contact_based: bool,
    pub exact: bool,
    pub lower_bound: bool,
}

impl Default for SolverSet {
    fn default() -> Self {
        Self {
            lagrangian: true,
            cost_based: true,
            contact_based: true,
            exact: false,
            lower_bound: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    /// Fixed parameters; the swept field is overwritten per point and the
    /// seed is replaced by derived replicate seeds.
    pub base: GeneratorConfig,
    pub instances: usize,
    pub solvers: SolverSet,
    pub seed: u64,
    pub params: SolverParams,
    pub ordering: OrderingKey,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            variable: SweepVariable::Helpers,
            values: vec![3.0, 4.0, 5.0, 6.0, 7.0],
            base: GeneratorConfig::default(),
            instances: 100,
            solvers: SolverSet::default(),
            seed: 0,
            params: SolverParams::default(),
            ordering: OrderingKey::Best,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.values.is_empty() {
            bad.push("values must not be empty".to_string());
        }
        if self.instances == 0 {
            bad.push("instances must be at least 1".to_string());
        }
        for v in &self.values {
            let ok = match self.variable {
                SweepVariable::Helpers => v.is_finite() && *v >= 0.0 && v.fract() == 0.0,
                SweepVariable::Alpha => v.is_finite() && *v >= 0.0,
            };
            if !ok {
                bad.push(format!("invalid {} value {v}", self.variable.column()));
            }
        }
        if self.solvers.exact {
            let max_helpers = match self.variable {
                SweepVariable::Helpers => self.values.iter().copied().fold(0.0, f64::max) as usize,
                SweepVariable::Alpha => self.base.helpers,
            };
            let size = self.base.requesters as f64 * ((max_helpers + 1) as f64).log2();
            if size > EXACT_LOG2_LIMIT {
                bad.push(format!(
                    "exact solver enabled but {} requesters x {} helpers exceeds its size guard",
                    self.base.requesters, max_helpers
                ));
            }
        }
        if let Err(Error::Invalid { fields, .. }) =
            self.point_config(0, 0).and_then(|c| c.validate())
        {
            bad.extend(fields);
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid("sweep config", bad))
        }
    }

    fn point_config(&self, point: usize, replicate: usize) -> Result<GeneratorConfig> {
        let value = *self.values.get(point).ok_or_else(|| {
            Error::invalid("sweep config", vec!["values must not be empty".into()])
        })?;
        let mut config = self.base.clone();
        match self.variable {
            SweepVariable::Helpers => config.helpers = value as usize,
            SweepVariable::Alpha => config.alpha = value,
        }
        config.seed = seed::derive(
            self.seed,
            &[self.variable.tag(), value.to_bits(), replicate as u64],
        );
        Ok(config)
    }
}

/// What one replicate contributes to a sweep point.
#[derive(Debug, Clone, Default, PartialEq)]
struct Replicate {
    lagrangian: Option<f64>,
    lower: Option<f64>,
    cost_based: Option<f64>,
    contact_based: Option<f64>,
    exact: Option<f64>,
    /// `t* / d` of every helper-assigned requester in the Lagrangian solution.
    relative_timers: Vec<(u32, u32)>,
}

fn run_replicate(config: &SweepConfig, point: usize, replicate: usize) -> Result<Replicate> {
    let instance = generate(&config.point_config(point, replicate)?)?;
    let table = evaluate_all_pairs(&instance)?;
    let mut out = Replicate::default();
    let solvers = &config.solvers;
    if solvers.lagrangian || solvers.lower_bound {
        let state = lagrangian_solve(&table, &config.params)?;
        out.lagrangian = Some(state.upper);
        out.lower = Some(state.lower);
        out.relative_timers = helper_timers(&instance, &table, &state.incumbent);
    }
    if solvers.cost_based {
        out.cost_based = Some(cost_based_baseline(&table, config.ordering).objective);
    }
    if solvers.contact_based {
        out.contact_based =
            Some(contact_based_baseline(&table, &instance.rates, config.ordering).objective);
    }
    if solvers.exact {
        out.exact = Some(exact_solve(&table)?.objective);
    }
    Ok(out)
}

fn helper_timers(instance: &Instance, table: &PairTable, a: &Assignment) -> Vec<(u32, u32)> {
    a.choices
        .iter()
        .enumerate()
        .filter_map(|(r, c)| match *c {
            Choice::Helper(h) => Some((table.pairs[r][h].timer, instance.tasks[r].deadline)),
            Choice::Server => None,
        })
        .collect()
}

fn run_point(config: &SweepConfig, point: usize) -> Result<Vec<Replicate>> {
    (0..config.instances)
        .into_par_iter()
        .map(|i| run_replicate(config, point, i))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub solver: &'static str,
    pub mean_cost: f64,
    pub std_error: f64,
    pub mean_lower_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub variable: SweepVariable,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "{},solver,mean_cost,std_error,mean_lower_bound\n",
            self.variable.column()
        );
        for row in &self.rows {
            let lower = row
                .mean_lower_bound
                .map(|v| format!("{v:e}"))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{:e},{:e},{}",
                row.value, row.solver, row.mean_cost, row.std_error, lower
            );
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(fs::write(path, self.to_csv())?)
    }

    /// Mean cost of `solver` at every sweep value, in sweep order.
    pub fn series(&self, solver: &str) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.solver == solver)
            .map(|r| (r.value, r.mean_cost))
            .collect()
    }
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Averages each enabled solver's objective over the replicates of every sweep value.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepTable> {
    config.validate()?;
    let mut rows = Vec::new();
    for (point, &value) in config.values.iter().enumerate() {
        let reps = run_point(config, point)?;
        let collect =
            |f: fn(&Replicate) -> Option<f64>| -> Vec<f64> { reps.iter().filter_map(f).collect() };
        let lower = collect(|r| r.lower);
        let mean_lower = (!lower.is_empty()).then(|| mean_and_se(&lower).0);

        let mut push = |solver: &'static str, xs: Vec<f64>, with_lower: bool| {
            let (mean_cost, std_error) = mean_and_se(&xs);
            rows.push(SweepRow {
                value,
                solver,
                mean_cost,
                std_error,
                mean_lower_bound: if with_lower { mean_lower } else { None },
            });
        };
        let s = &config.solvers;
        if s.lagrangian {
            push("lagrangian", collect(|r| r.lagrangian), true);
        }
        if s.cost_based {
            push("cost_based", collect(|r| r.cost_based), false);
        }
        if s.contact_based {
            push("contact_based", collect(|r| r.contact_based), false);
        }
        if s.exact {
            push("exact", collect(|r| r.exact), false);
        }
        if s.lower_bound {
            push("lower_bound", lower.clone(), false);
        }
    }
    Ok(SweepTable {
        variable: config.variable,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdfRow {
    pub alpha: f64,
    /// `None` marks an alpha with no helper-assigned requesters.
    pub relative_timer: Option<f64>,
    pub cumulative_fraction: Option<f64>,
    pub assigned: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdfTable {
    pub rows: Vec<CdfRow>,
}

impl CdfTable {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("alpha,relative_timer,cumulative_fraction,assigned_requesters\n");
        for row in &self.rows {
            let x = row
                .relative_timer
                .map(|v| v.to_string())
                .unwrap_or_default();
            let y = row
                .cumulative_fraction
                .map(|v| format!("{v:e}"))
                .unwrap_or_default();
            let _ = writeln!(out, "{},{x},{y},{}", row.alpha, row.assigned);
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(fs::write(path, self.to_csv())?)
    }

    /// CDF value at relative timer 0 (share of timers equal to zero).
    pub fn zero_fraction(&self, alpha: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.alpha == alpha && r.relative_timer == Some(0.0))
            .and_then(|r| r.cumulative_fraction)
    }
}

/// Empirical CDF of `t* / d` over the Lagrangian solution's helper-assigned
/// requesters, for every alpha in `config.values`.
pub fn timer_cdf(config: &SweepConfig) -> Result<CdfTable> {
    if config.variable != SweepVariable::Alpha {
        return Err(Error::invalid(
            "sweep config",
            vec!["timer CDF sweeps alpha".to_string()],
        ));
    }
    let config = SweepConfig {
        solvers: SolverSet {
            lagrangian: true,
            cost_based: false,
            contact_based: false,
            exact: false,
            lower_bound: false,
        },
        ..config.clone()
    };
    config.validate()?;
    let mut rows = Vec::new();
    for (point, &alpha) in config.values.iter().enumerate() {
        let timers: Vec<(u32, u32)> = run_point(&config, point)?
            .into_iter()
            .flat_map(|r| r.relative_timers)
            .collect();
        let assigned = timers.len();
        if assigned == 0 {
            rows.push(CdfRow {
                alpha,
                relative_timer: None,
                cumulative_fraction: None,
                assigned,
            });
            continue;
        }
        for step in 0..=CDF_STEPS {
            // t / d <= step / STEPS, in integers
            let below = timers
                .iter()
                .filter(|&&(t, d)| {
                    u64::from(t) * u64::from(CDF_STEPS) <= u64::from(step) * u64::from(d)
                })
                .count();
            rows.push(CdfRow {
                alpha,
                relative_timer: Some(f64::from(step) / f64::from(CDF_STEPS)),
                cumulative_fraction: Some(below as f64 / assigned as f64),
                assigned,
            });
        }
    }
    Ok(CdfTable { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[default]
    Lagrangian,
    CostBased,
    ContactBased,
    Exact,
}

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::Lagrangian => "lagrangian",
            SolverKind::CostBased => "cost_based",
            SolverKind::ContactBased => "contact_based",
            SolverKind::Exact => "exact",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveOptions {
    pub solver: SolverKind,
    pub params: SolverParams,
    pub ordering: OrderingKey,
    /// Also run the exhaustive solver and report the gap to the optimum.
    pub with_exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionEntry {
    pub requester: usize,
    pub choice: Choice,
    /// Timer of the chosen pair; absent for the server.
    pub timer: Option<u32>,
    pub expected_cost: f64,
    pub expected_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Solution {
    pub schema_version: u32,
    pub solver: String,
    pub objective: f64,
    pub feasible: bool,
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<f64>,
    pub gap_percent: Option<f64>,
    pub iterations: Option<usize>,
    pub exact_objective: Option<f64>,
    pub exact_gap_percent: Option<f64>,
    pub assignment: Vec<SolutionEntry>,
    pub trace: Vec<TraceRow>,
}

impl Solution {
    pub fn choices(&self) -> Vec<Choice> {
        self.assignment.iter().map(|e| e.choice).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        Ok(fs::write(path, text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Human-readable report of objective, bounds and gaps.
    pub fn summary(&self) -> String {
        let helpers = self
            .assignment
            .iter()
            .filter(|e| matches!(e.choice, Choice::Helper(_)))
            .count();
        let mut s = format!(
            "solver: {}\nobjective: {:.6}\nfeasible: {}\nrequesters on helpers: {} of {}\n",
            self.solver,
            self.objective,
            self.feasible,
            helpers,
            self.assignment.len()
        );
        if helpers == 0 {
            s.push_str("all requesters on the server\n");
        }
        if let (Some(lo), Some(hi)) = (self.lower_bound, self.upper_bound) {
            let _ = writeln!(s, "lower bound: {lo:.6}\nupper bound: {hi:.6}");
        }
        if let Some(gap) = self.gap_percent {
            let _ = writeln!(s, "gap: {gap:.4}%");
        }
        if let Some(it) = self.iterations {
            let _ = writeln!(s, "iterations: {it}");
        }
        if let (Some(opt), Some(gap)) = (self.exact_objective, self.exact_gap_percent) {
            let _ = writeln!(s, "exact optimum: {opt:.6}\ngap to optimum: {gap:.4}%");
        }
        s
    }
}

fn percent(above: f64, below: f64, base: f64) -> f64 {
    if base == 0.0 {
        0.0
    } else {
        100.0 * (above - below) / base
    }
}

/// Solves one instance with the selected solver.
pub fn solve_instance(instance: &Instance, options: &SolveOptions) -> Result<Solution> {
    let table = evaluate_all_pairs(instance)?;
    let mut lower_bound = None;
    let mut upper_bound = None;
    let mut gap_percent = None;
    let mut iterations = None;
    let mut trace = Vec::new();
    let assignment = match options.solver {
        SolverKind::Lagrangian => {
            let state = lagrangian_solve(&table, &options.params)?;
            lower_bound = Some(state.lower);
            upper_bound = Some(state.upper);
            gap_percent = Some(percent(state.upper, state.lower, state.upper));
            iterations = Some(state.iterations);
            trace = state.trace;
            state.incumbent
        }
        SolverKind::CostBased => cost_based_baseline(&table, options.ordering),
        SolverKind::ContactBased => {
            contact_based_baseline(&table, &instance.rates, options.ordering)
        }
        SolverKind::Exact => exact_solve(&table)?,
    };
    let exact_objective = if options.with_exact || options.solver == SolverKind::Exact {
        Some(exact_solve(&table)?.objective)
    } else {
        None
    };
    let exact_gap_percent = exact_objective.map(|opt| percent(assignment.objective, opt, opt));

    let entries = assignment
        .choices
        .iter()
        .enumerate()
        .map(|(r, &choice)| match choice {
            Choice::Helper(h) => SolutionEntry {
                requester: r,
                choice,
                timer: Some(table.pairs[r][h].timer),
                expected_cost: table.pairs[r][h].expected_cost,
                expected_energy: table.pairs[r][h].expected_energy,
            },
            Choice::Server => SolutionEntry {
                requester: r,
                choice,
                timer: None,
                expected_cost: table.server_costs[r],
                expected_energy: 0.0,
            },
        })
        .collect();
    Ok(Solution {
        schema_version: crate::instance::SCHEMA_VERSION,
        solver: options.solver.name().to_string(),
        objective: assignment.objective,
        feasible: assignment.feasible,
        lower_bound,
        upper_bound,
        gap_percent,
        iterations,
        exact_objective,
        exact_gap_percent,
        assignment: entries,
        trace,
    })
}

/// Loads an instance, solves it and writes the solution next to a summary.
pub fn solve_one(
    instance_path: impl AsRef<Path>,
    options: &SolveOptions,
    output: Option<&Path>,
) -> Result<(Solution, String)> {
    let instance = Instance::load(instance_path)?;
    let solution = solve_instance(&instance, options)?;
    if let Some(path) = output {
        solution.save(path)?;
    }
    let summary = solution.summary();
    Ok((solution, summary))
}

/// Configuration for a cost-versus-alpha sweep at the default scenario.
pub fn alpha_sweep(values: Vec<f64>, instances: usize, seed: u64) -> SweepConfig {
    SweepConfig {
        variable: SweepVariable::Alpha,
        values,
        instances,
        seed,
        ..SweepConfig::default()
    }
}

/// Configuration for a cost-versus-helpers sweep at the default scenario.
pub fn helper_sweep(values: Vec<f64>, instances: usize, seed: u64) -> SweepConfig {
    SweepConfig {
        variable: SweepVariable::Helpers,
        values,
        instances,
        seed,
        ..SweepConfig::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(variable: SweepVariable, values: Vec<f64>) -> SweepConfig {
        SweepConfig {
            variable,
            values,
            instances: 4,
            seed: 3,
            base: GeneratorConfig {
                requesters: 6,
                helpers: 2,
                ..GeneratorConfig::default()
            },
            ..SweepConfig::default()
        }
    }

    #[test]
    fn csv_layout_is_stable() {
        let table = run_sweep(&tiny(SweepVariable::Helpers, vec![1.0, 2.0])).unwrap();
        let csv = table.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "H,solver,mean_cost,std_error,mean_lower_bound");
        assert_eq!(lines.len(), 1 + 2 * 4);
        let solvers: Vec<&str> = lines[1..5]
            .iter()
            .map(|l| l.split(',').nth(1).unwrap())
            .collect();
        assert_eq!(
            solvers,
            ["lagrangian", "cost_based", "contact_based", "lower_bound"]
        );
        assert!(lines[1].starts_with("1,lagrangian,"));
        assert_eq!(lines[1].split(',').count(), 5);
        assert!(lines[2].ends_with(','));
    }

    #[test]
    fn sweeps_repeat_bit_for_bit() {
        let config = tiny(SweepVariable::Alpha, vec![0.0, 0.1]);
        assert_eq!(
            run_sweep(&config).unwrap().to_csv(),
            run_sweep(&config).unwrap().to_csv()
        );
        assert_eq!(
            timer_cdf(&config).unwrap().to_csv(),
            timer_cdf(&config).unwrap().to_csv()
        );
    }

    #[test]
    fn replicate_seeds_do_not_repeat() {
        let config = tiny(SweepVariable::Helpers, vec![2.0, 3.0, 4.0]);
        let mut seeds = std::collections::HashSet::new();
        for p in 0..3 {
            for i in 0..config.instances {
                assert!(seeds.insert(config.point_config(p, i).unwrap().seed));
            }
        }
    }

    #[test]
    fn single_replicate_matches_direct_solve() {
        let mut config = tiny(SweepVariable::Helpers, vec![3.0]);
        config.instances = 1;
        config.solvers = SolverSet {
            lagrangian: true,
            cost_based: false,
            contact_based: false,
            exact: false,
            lower_bound: false,
        };
        let table = run_sweep(&config).unwrap();
        assert_eq!(table.rows.len(), 1);
        let inst = generate(&config.point_config(0, 0).unwrap()).unwrap();
        let state = lagrangian_solve(&evaluate_all_pairs(&inst).unwrap(), &config.params).unwrap();
        assert_eq!(table.rows[0].mean_cost, state.upper);
        assert_eq!(table.rows[0].mean_lower_bound, Some(state.lower));
        assert_eq!(table.rows[0].std_error, 0.0);
    }

    #[test]
    fn invalid_sweeps_are_rejected() {
        let mut config = tiny(SweepVariable::Helpers, vec![]);
        assert!(run_sweep(&config).is_err());
        config.values = vec![2.5];
        assert!(run_sweep(&config).is_err());
        config.values = vec![2.0];
        config.instances = 0;
        assert!(run_sweep(&config).is_err());
        let mut big = tiny(SweepVariable::Helpers, vec![7.0]);
        big.base.requesters = 15;
        big.solvers.exact = true;
        assert!(matches!(big.validate(), Err(Error::Invalid { .. })));
        assert!(timer_cdf(&tiny(SweepVariable::Helpers, vec![2.0])).is_err());
    }

    #[test]
    fn cdf_is_monotone_and_ends_at_one() {
        let table = timer_cdf(&tiny(SweepVariable::Alpha, vec![0.004])).unwrap();
        assert_eq!(table.rows.len(), CDF_STEPS as usize + 1);
        let ys: Vec<f64> = table
            .rows
            .iter()
            .map(|r| r.cumulative_fraction.unwrap())
            .collect();
        assert!(ys.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(*ys.last().unwrap(), 1.0);
    }

    #[test]
    fn no_helpers_gives_empty_cdf_marker() {
        let mut config = tiny(SweepVariable::Alpha, vec![0.1]);
        config.base.helpers = 0;
        let table = timer_cdf(&config).unwrap();
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0].assigned, 0);
        assert_eq!(table.to_csv().lines().nth(1), Some("0.1,,,0"));
    }

    #[test]
    fn no_helper_solve_reports_zero_gap() {
        let inst = generate(&GeneratorConfig {
            requesters: 5,
            helpers: 0,
            ..GeneratorConfig::default()
        })
        .unwrap();
        let sol = solve_instance(&inst, &SolveOptions::default()).unwrap();
        assert_eq!(sol.gap_percent, Some(0.0));
        assert!(sol.summary().contains("all requesters on the server"));
        assert!(sol
            .assignment
            .iter()
            .all(|e| e.choice == Choice::Server && e.timer.is_none()));
    }

    #[test]
    fn exact_gap_is_reported() {
        let inst = generate(&GeneratorConfig {
            requesters: 7,
            helpers: 2,
            seed: 4,
            ..GeneratorConfig::default()
        })
        .unwrap();
        let options = SolveOptions {
            with_exact: true,
            ..SolveOptions::default()
        };
        let sol = solve_instance(&inst, &options).unwrap();
        let opt = exact_solve(&evaluate_all_pairs(&inst).unwrap())
            .unwrap()
            .objective;
        assert_eq!(sol.exact_objective, Some(opt));
        let gap = sol.exact_gap_percent.unwrap();
        assert!(gap >= 0.0);
        assert!((gap - 100.0 * (sol.objective - opt) / opt).abs() < 1e-12);
        let back = Solution::from_json(&sol.to_json().unwrap()).unwrap();
        assert_eq!(back, sol);
    }
}
