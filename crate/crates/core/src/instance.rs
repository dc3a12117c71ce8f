//! Problem instances: data model, scenario generator, Knapsack reduction and
//! JSON persistence.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::contact::ContactPair;
use crate::cost::{CompletionCostFn, TaskSpec};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Bits in one megabyte of task data.
pub const BITS_PER_MB: f64 = 8.0e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub tasks: Vec<TaskSpec>,
    /// Energy budget `E_h` of every helper, Joules.
    pub helper_energy: Vec<f64>,
    /// `rates[r][h]`: contacts per unit time between requester `r` and helper `h`.
    pub rates: Vec<Vec<f64>>,
    /// Number of slots `T`.
    pub horizon: u32,
    pub slot_duration: f64,
    pub completion_cost: CompletionCostFn,
    /// Optional `R x H` override of each task's `helper_proc_cost`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub helper_proc_costs: Option<Vec<Vec<f64>>>,
}

impl Instance {
    pub fn requesters(&self) -> usize {
        self.tasks.len()
    }

    pub fn helpers(&self) -> usize {
        self.helper_energy.len()
    }

    pub fn contact(&self, r: usize, h: usize) -> Result<ContactPair> {
        ContactPair::new(self.rates[r][h], self.slot_duration)
    }

    /// Task `r` with the processing cost it incurs on helper `h`.
    pub fn task_for(&self, r: usize, h: usize) -> TaskSpec {
        let mut task = self.tasks[r];
        if let Some(costs) = &self.helper_proc_costs {
            task.helper_proc_cost = costs[r][h];
        }
        task
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        let (r_count, h_count) = (self.requesters(), self.helpers());
        if r_count == 0 {
            bad.push("at least one requester is required".to_string());
        }
        if self.horizon == 0 {
            bad.push("horizon must be at least one slot".to_string());
        }
        if !(self.slot_duration.is_finite() && self.slot_duration > 0.0) {
            bad.push(format!(
                "slot_duration must be > 0, got {}",
                self.slot_duration
            ));
        }
        for (h, e) in self.helper_energy.iter().enumerate() {
            if !(e.is_finite() && *e >= 0.0) {
                bad.push(format!(
                    "helper_energy[{h}] must be finite and >= 0, got {e}"
                ));
            }
        }
        for (r, task) in self.tasks.iter().enumerate() {
            if let Err(Error::Invalid { fields, .. }) = task.validate() {
                bad.extend(fields.into_iter().map(|f| format!("tasks[{r}]: {f}")));
            }
            if task.deadline > self.horizon {
                bad.push(format!(
                    "tasks[{r}]: deadline {} exceeds horizon {}",
                    task.deadline, self.horizon
                ));
            }
        }
        check_matrix(&mut bad, "rates", &self.rates, r_count, h_count);
        if let Some(costs) = &self.helper_proc_costs {
            check_matrix(&mut bad, "helper_proc_costs", costs, r_count, h_count);
        }
        if let Err(Error::Invalid { fields, .. }) = self.completion_cost.validate() {
            bad.extend(fields.into_iter().map(|f| format!("completion_cost: {f}")));
        }
        if let Some(max) = self.completion_cost.max_slot() {
            if max < self.horizon {
                bad.push(format!(
                    "completion_cost: table covers slots 0..={max}, horizon is {}",
                    self.horizon
                ));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid("instance", bad))
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = InstanceDocument {
            schema_version: SCHEMA_VERSION,
            instance: self.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDocument = serde_json::from_str(text)?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(
                "instance",
                vec![format!(
                    "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                    doc.schema_version
                )],
            ));
        }
        doc.instance.validate()?;
        Ok(doc.instance)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut file = fs::File::create(path)?;
        file.write_all(self.to_json()?.as_bytes())?;
        file.write_all(b"\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

fn check_matrix(bad: &mut Vec<String>, name: &str, m: &[Vec<f64>], rows: usize, cols: usize) {
    if m.len() != rows {
        bad.push(format!("{name} has {} rows, expected {rows}", m.len()));
    }
    for (r, row) in m.iter().enumerate() {
        if row.len() != cols {
            bad.push(format!(
                "{name}[{r}] has {} entries, expected {cols}",
                row.len()
            ));
        }
        for (h, v) in row.iter().enumerate() {
            if !(v.is_finite() && *v >= 0.0) {
                bad.push(format!("{name}[{r}][{h}] must be finite and >= 0, got {v}"));
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDocument {
    schema_version: u32,
    instance: Instance,
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    fn check(&self, name: &str, bad: &mut Vec<String>) {
        if !(self.lo.is_finite() && self.hi.is_finite() && 0.0 <= self.lo && self.lo <= self.hi) {
            bad.push(format!(
                "{name} must satisfy 0 <= lo <= hi, got [{}, {}]",
                self.lo, self.hi
            ));
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            rng.random_range(self.lo..=self.hi)
        }
    }
}

/// Scenario generator parameters. Defaults reproduce the evaluation setup:
/// 15 requesters, 5 helpers, 24 one-hour slots and `f(t) = 0.004 t^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub requesters: usize,
    pub helpers: usize,
    pub horizon: u32,
    pub slot_duration: f64,
    pub alpha: f64,
    /// Joules.
    pub helper_energy: Interval,
    /// Megabytes.
    pub data_size_mb: Interval,
    pub cycles_per_bit: Interval,
    /// Joules per CPU cycle.
    pub energy_per_cycle: f64,
    /// Joules per transmitted bit.
    pub energy_per_bit: f64,
    pub helper_proc_multiplier: f64,
    pub server_proc_multiplier: f64,
    pub bs_comm_multiplier: f64,
    pub server_comm_multiplier: f64,
    pub min_deadline: u32,
    pub max_deadline: u32,
    pub rate_shape: f64,
    pub rate_scale: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            requesters: 15,
            helpers: 5,
            horizon: 24,
            slot_duration: 1.0,
            alpha: 0.004,
            helper_energy: Interval::new(1000.0, 3000.0),
            data_size_mb: Interval::new(0.5, 5.0),
            cycles_per_bit: Interval::new(2000.0, 37000.0),
            energy_per_cycle: 1.0 / 730.0e6,
            energy_per_bit: 1.42e-7,
            helper_proc_multiplier: 1.0,
            server_proc_multiplier: 10.0,
            bs_comm_multiplier: 100.0,
            server_comm_multiplier: 1000.0,
            min_deadline: 1,
            max_deadline: 24,
            rate_shape: 0.5,
            rate_scale: 1.0,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.requesters == 0 {
            bad.push("requesters must be at least 1".to_string());
        }
        if self.horizon == 0 {
            bad.push("horizon must be at least 1".to_string());
        }
        if !(self.slot_duration.is_finite() && self.slot_duration > 0.0) {
            bad.push(format!(
                "slot_duration must be > 0, got {}",
                self.slot_duration
            ));
        }
        self.helper_energy.check("helper_energy", &mut bad);
        self.data_size_mb.check("data_size_mb", &mut bad);
        self.cycles_per_bit.check("cycles_per_bit", &mut bad);
        let scalars = [
            ("alpha", self.alpha),
            ("energy_per_cycle", self.energy_per_cycle),
            ("energy_per_bit", self.energy_per_bit),
            ("helper_proc_multiplier", self.helper_proc_multiplier),
            ("server_proc_multiplier", self.server_proc_multiplier),
            ("bs_comm_multiplier", self.bs_comm_multiplier),
            ("server_comm_multiplier", self.server_comm_multiplier),
        ];
        for (name, v) in scalars {
            if !(v.is_finite() && v >= 0.0) {
                bad.push(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if self.min_deadline == 0 || self.min_deadline > self.max_deadline {
            bad.push(format!(
                "deadline range must satisfy 1 <= min <= max, got [{}, {}]",
                self.min_deadline, self.max_deadline
            ));
        }
        if self.max_deadline > self.horizon {
            bad.push(format!(
                "max_deadline {} exceeds horizon {}",
                self.max_deadline, self.horizon
            ));
        }
        for (name, v) in [
            ("rate_shape", self.rate_shape),
            ("rate_scale", self.rate_scale),
        ] {
            if !(v.is_finite() && v > 0.0) {
                bad.push(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid("generator config", bad))
        }
    }
}

/// Draws a random instance. Same config (seed included) gives the same instance.
pub fn generate(config: &GeneratorConfig) -> Result<Instance> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let gamma = Gamma::new(config.rate_shape, config.rate_scale).map_err(|e| {
        Error::invalid(
            "generator config",
            vec![format!("contact-rate distribution: {e}")],
        )
    })?;

    let helper_energy: Vec<f64> = (0..config.helpers)
        .map(|_| config.helper_energy.sample(&mut rng))
        .collect();
    let rates: Vec<Vec<f64>> = (0..config.requesters)
        .map(|_| {
            (0..config.helpers)
                .map(|_| gamma.sample(&mut rng))
                .collect()
        })
        .collect();

    let mut energies = Vec::with_capacity(config.requesters);
    for _ in 0..config.requesters {
        let bits = config.data_size_mb.sample(&mut rng) * BITS_PER_MB;
        let cycles = bits * config.cycles_per_bit.sample(&mut rng);
        energies.push((
            cycles * config.energy_per_cycle,
            bits * config.energy_per_bit,
        ));
    }

    // Deadlines are drawn independently, then handed out by rank of processing
    // energy so that hungrier tasks get the longer deadlines.
    let mut deadlines: Vec<u32> = (0..config.requesters)
        .map(|_| rng.random_range(config.min_deadline..=config.max_deadline))
        .collect();
    deadlines.sort_unstable();
    let mut by_energy: Vec<usize> = (0..config.requesters).collect();
    by_energy.sort_by(|&a, &b| energies[a].0.total_cmp(&energies[b].0).then(a.cmp(&b)));
    let mut deadline_of = vec![0; config.requesters];
    for (rank, &r) in by_energy.iter().enumerate() {
        deadline_of[r] = deadlines[rank];
    }

    let tasks = energies
        .iter()
        .zip(&deadline_of)
        .map(|(&(proc, comm), &deadline)| TaskSpec {
            processing_energy: proc,
            bs_comm_energy: comm,
            deadline,
            helper_proc_cost: config.helper_proc_multiplier * proc,
            server_proc_cost: config.server_proc_multiplier * proc,
            bs_comm_cost: config.bs_comm_multiplier * comm,
            server_comm_cost: config.server_comm_multiplier * comm,
        })
        .collect();

    let instance = Instance {
        tasks,
        helper_energy,
        rates,
        horizon: config.horizon,
        slot_duration: config.slot_duration,
        completion_cost: CompletionCostFn::quadratic(config.alpha),
        helper_proc_costs: None,
    };
    instance.validate()?;
    Ok(instance)
}

/// Encodes a 0/1 Knapsack instance as a single-helper offloading instance.
///
/// Every requester meets the helper within its one-slot deadline with
/// probability `1 - epsilon`; helper-side costs are zero and the server costs
/// `values[r]`, so offloading task `r` to the helper gains (almost) `values[r]`
/// and consumes (almost) `weights[r]` of the helper's `capacity`.
pub fn build_knapsack_reduction(
    weights: &[f64],
    values: &[f64],
    capacity: f64,
    epsilon: f64,
) -> Result<Instance> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if weights.len() != values.len() {
        return Err(Error::Domain(format!(
            "{} weights but {} values",
            weights.len(),
            values.len()
        )));
    }
    let rate = (1.0 / epsilon).ln();
    let tasks = weights
        .iter()
        .zip(values)
        .map(|(&w, &g)| TaskSpec {
            processing_energy: w,
            bs_comm_energy: 0.0,
            deadline: 1,
            helper_proc_cost: 0.0,
            server_proc_cost: 0.0,
            bs_comm_cost: 0.0,
            server_comm_cost: g / 2.0,
        })
        .collect();
    let instance = Instance {
        tasks,
        helper_energy: vec![capacity],
        rates: vec![vec![rate]; weights.len()],
        horizon: 1,
        slot_duration: 1.0,
        completion_cost: CompletionCostFn::zero(),
        helper_proc_costs: None,
    };
    instance.validate()?;
    Ok(instance)
}
