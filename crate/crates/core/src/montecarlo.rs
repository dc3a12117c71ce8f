//! Trial-by-trial simulation of one requester/helper pair.
//!
//! Each trial samples the pair's meetings over slots `1..=d`, classifies the
//! outcome into one of the five events by literally applying the offloading
//! rules, and records what that trial cost and how much helper energy it used.
//! Means over many trials estimate the analytic quantities in [`crate::cost`].
//! Chunk statistics are combined with pairwise updates in chunk order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contact::ContactPair;
use crate::cost::{CompletionCostFn, EventVector, PairProfile, TaskSpec};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::seed;
use crate::solvers::{Assignment, Choice, PairTable};

/// Trials per independently seeded work unit.
const CHUNK: u64 = 1 << 14;

/// Rejection threshold of [`validate_assignment`], in standard errors.
pub const VALIDATION_Z: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    /// 1..=5.
    pub event: u8,
    pub cost: f64,
    pub energy: f64,
    /// Messages exchanged with the base station, 0 or 2.
    pub bs_messages: u8,
}

/// How meetings are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingPath {
    /// Independent Poisson contact count per slot.
    #[default]
    SlotCounts,
    /// Exponential inter-contact times in continuous time, binned into slots.
    ExponentialGaps,
}

/// Slots of the meetings that decide a trial's outcome.
#[derive(Debug, Default)]
struct Meetings {
    before: u32,
    second_before: Option<u32>,
    first_after: Option<u32>,
}

impl Meetings {
    /// Records `count` meetings in `slot`; returns true once the outcome is decided.
    fn record(&mut self, slot: u32, count: u64, timer: u32) -> bool {
        if count == 0 {
            return false;
        }
        if slot <= timer {
            let before = u64::from(self.before) + count;
            if self.before < 2 && before >= 2 {
                self.second_before = Some(slot);
            }
            self.before = before.min(2) as u32;
            self.second_before.is_some()
        } else {
            self.first_after.get_or_insert(slot);
            true
        }
    }
}

struct Simulator<'a> {
    task: &'a TaskSpec,
    f: &'a CompletionCostFn,
    timer: u32,
    slot_duration: f64,
    per_slot: Option<Poisson<f64>>,
    gaps: Option<Exp<f64>>,
    path: SamplingPath,
}

impl<'a> Simulator<'a> {
    fn new(
        pair: &ContactPair,
        task: &'a TaskSpec,
        f: &'a CompletionCostFn,
        timer: u32,
        path: SamplingPath,
    ) -> Self {
        let mean = pair.slot_mean();
        Self {
            task,
            f,
            timer,
            slot_duration: pair.slot_duration(),
            per_slot: (mean > 0.0).then(|| Poisson::new(mean).expect("positive finite mean")),
            gaps: (pair.rate() > 0.0).then(|| Exp::new(pair.rate()).expect("positive finite rate")),
            path,
        }
    }

    fn meetings(&self, rng: &mut impl Rng) -> Meetings {
        let mut m = Meetings::default();
        let d = self.task.deadline;
        match self.path {
            SamplingPath::SlotCounts => {
                let Some(poisson) = &self.per_slot else {
                    return m;
                };
                for slot in 1..=d {
                    let count = poisson.sample(rng) as u64;
                    if m.record(slot, count, self.timer) {
                        break;
                    }
                }
            }
            SamplingPath::ExponentialGaps => {
                let Some(exp) = &self.gaps else { return m };
                let end = f64::from(d) * self.slot_duration;
                let mut clock = 0.0;
                loop {
                    clock += exp.sample(rng);
                    if clock > end {
                        break;
                    }
                    // slot k covers ((k-1) theta, k theta]
                    let slot = ((clock / self.slot_duration).ceil() as u32).clamp(1, d);
                    if m.record(slot, 1, self.timer) {
                        break;
                    }
                }
            }
        }
        m
    }

    fn trial(&self, rng: &mut impl Rng) -> TrialOutcome {
        let m = self.meetings(rng);
        let task = self.task;
        let proc = task.helper_proc_cost;
        let relay = 2.0 * task.bs_comm_cost;
        let full = task.processing_energy;
        let with_bs = task.processing_energy + task.bs_comm_energy;
        match (m.before, m.second_before, m.first_after) {
            (_, Some(k), _) => TrialOutcome {
                event: 1,
                cost: self.f.eval(k) + proc,
                energy: full,
                bs_messages: 0,
            },
            (1, None, Some(k)) => TrialOutcome {
                event: 2,
                cost: self.f.eval(k) + proc,
                energy: full,
                bs_messages: 0,
            },
            (0, None, Some(k)) => TrialOutcome {
                event: 3,
                cost: self.f.eval(k) + proc + relay,
                energy: with_bs,
                bs_messages: 2,
            },
            (1, None, None) => TrialOutcome {
                event: 4,
                cost: self.f.eval(self.timer) + proc + relay,
                energy: with_bs,
                bs_messages: 2,
            },
            _ => TrialOutcome {
                event: 5,
                cost: task.server_cost(),
                energy: 0.0,
                bs_messages: 0,
            },
        }
    }
}

/// Running mean and centered second moment, mergeable across chunks.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn add(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let weight = other.n as f64 / n as f64;
        self.mean += delta * weight;
        self.m2 += other.m2 + delta * delta * self.n as f64 * weight;
        self.n = n;
    }

    /// Mean and standard error of the mean.
    fn summary(&self) -> (f64, f64) {
        if self.n < 2 {
            return (self.mean, 0.0);
        }
        let n = self.n as f64;
        let var = (self.m2 / (n - 1.0)).max(0.0);
        (self.mean, (var / n).sqrt())
    }
}

#[derive(Debug, Clone, Default)]
struct Tally {
    trials: u64,
    cost: Moments,
    energy: Moments,
    counts: [u64; 5],
    /// Cost times the event indicator, per event.
    event_cost: [Moments; 5],
}

impl Tally {
    fn add(&mut self, o: &TrialOutcome) {
        self.trials += 1;
        self.cost.add(o.cost);
        self.energy.add(o.energy);
        let i = usize::from(o.event - 1);
        self.counts[i] += 1;
        for (j, m) in self.event_cost.iter_mut().enumerate() {
            m.add(if j == i { o.cost } else { 0.0 });
        }
    }

    fn merge(&mut self, other: &Tally) {
        self.trials += other.trials;
        self.cost.merge(&other.cost);
        self.energy.merge(&other.energy);
        for i in 0..5 {
            self.counts[i] += other.counts[i];
            self.event_cost[i].merge(&other.event_cost[i]);
        }
    }
}

/// Empirical estimates from [`simulate_pair`], each with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEstimate {
    pub trials: u64,
    pub mean_cost: f64,
    pub cost_se: f64,
    pub mean_energy: f64,
    pub energy_se: f64,
    pub event_freq: EventVector,
    pub event_freq_se: EventVector,
    /// Mean of cost times the event-`i` indicator; estimates the event's expected cost.
    pub event_cost: EventVector,
    pub event_cost_se: EventVector,
}

impl From<&Tally> for PairEstimate {
    fn from(t: &Tally) -> Self {
        let n = t.trials;
        let (mean_cost, cost_se) = t.cost.summary();
        let (mean_energy, energy_se) = t.energy.summary();
        let mut est = PairEstimate {
            trials: n,
            mean_cost,
            cost_se,
            mean_energy,
            energy_se,
            event_freq: [0.0; 5],
            event_freq_se: [0.0; 5],
            event_cost: [0.0; 5],
            event_cost_se: [0.0; 5],
        };
        for i in 0..5 {
            let p = t.counts[i] as f64 / n as f64;
            est.event_freq[i] = p;
            est.event_freq_se[i] = (p * (1.0 - p) / n as f64).sqrt();
            (est.event_cost[i], est.event_cost_se[i]) = t.event_cost[i].summary();
        }
        est
    }
}

/// Runs `trials` independent trials of the pair at timer `t`.
///
/// Work is split into fixed-size chunks, each with its own ChaCha stream
/// derived from `seed`, and reduced in chunk order, so results do not depend
/// on the thread count.
pub fn simulate_pair(
    pair: &ContactPair,
    task: &TaskSpec,
    f: &CompletionCostFn,
    t: u32,
    trials: u64,
    seed: u64,
) -> Result<PairEstimate> {
    simulate_pair_with(pair, task, f, t, trials, seed, SamplingPath::SlotCounts)
}

pub fn simulate_pair_with(
    pair: &ContactPair,
    task: &TaskSpec,
    f: &CompletionCostFn,
    t: u32,
    trials: u64,
    seed: u64,
    path: SamplingPath,
) -> Result<PairEstimate> {
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    // validates task, f and deadline coverage
    PairProfile::new(pair, task, f)?.event_probabilities(t)?;

    let sim = Simulator::new(pair, task, f, t, path);
    let chunks = trials.div_ceil(CHUNK);
    let tallies: Vec<Tally> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let n = CHUNK.min(trials - c * CHUNK);
            let mut tally = Tally::default();
            for _ in 0..n {
                tally.add(&sim.trial(&mut rng));
            }
            tally
        })
        .collect();
    let mut total = Tally::default();
    for t in &tallies {
        total.merge(t);
    }
    Ok(PairEstimate::from(&total))
}

/// Single trial, exposed for inspection and tests.
pub fn run_trial(
    pair: &ContactPair,
    task: &TaskSpec,
    f: &CompletionCostFn,
    t: u32,
    path: SamplingPath,
    rng: &mut impl Rng,
) -> TrialOutcome {
    Simulator::new(pair, task, f, t, path).trial(rng)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub requester: usize,
    pub helper: usize,
    pub timer: u32,
    pub analytic_cost: f64,
    pub empirical_cost: f64,
    pub cost_se: f64,
    pub cost_z: f64,
    pub analytic_energy: f64,
    pub empirical_energy: f64,
    pub energy_se: f64,
    pub energy_z: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub trials: u64,
    pub threshold_z: f64,
    pub rows: Vec<ValidationRow>,
    pub analytic_total: f64,
    pub empirical_total: f64,
    pub empirical_total_se: f64,
    pub pass: bool,
}

/// Standard error with a floor of `range / n`: an outcome rarer than `1 / n`
/// can go unobserved and shift the mean by up to that much.
fn floored_se(se: f64, range: f64, trials: u64) -> f64 {
    let floor = range / trials as f64;
    (se * se + floor * floor).sqrt()
}

fn z_score(analytic: f64, empirical: f64, se: f64) -> f64 {
    let diff = empirical - analytic;
    if se > 0.0 {
        diff / se
    } else if diff.abs() <= 1e-9 * (1.0 + analytic.abs()) {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    }
}

/// Simulates every helper-assigned pair at its optimal timer and compares the
/// empirical cost and energy with the analytic values.
pub fn validate_assignment(
    instance: &Instance,
    table: &PairTable,
    assignment: &Assignment,
    trials: u64,
    seed: u64,
) -> Result<ValidationReport> {
    if assignment.choices.len() != instance.requesters() {
        return Err(Error::Infeasible(format!(
            "{} choices for {} requesters",
            assignment.choices.len(),
            instance.requesters()
        )));
    }
    if let Some(h) = assignment.choices.iter().find_map(|c| match c {
        Choice::Helper(h) if *h >= instance.helpers() => Some(*h),
        _ => None,
    }) {
        return Err(Error::Infeasible(format!("helper {h} does not exist")));
    }
    if !table.is_feasible(&assignment.choices) {
        return Err(Error::Infeasible("helper energy budget exceeded".into()));
    }

    let mut rows = Vec::new();
    let mut empirical_total = 0.0;
    let mut var_total = 0.0;
    for (r, choice) in assignment.choices.iter().enumerate() {
        let Choice::Helper(h) = *choice else {
            empirical_total += table.server_costs[r];
            continue;
        };
        let eval = &table.pairs[r][h];
        let task = instance.task_for(r, h);
        let f = &instance.completion_cost;
        let est = simulate_pair(
            &instance.contact(r, h)?,
            &task,
            f,
            eval.timer,
            trials,
            seed::derive(seed, &[r as u64, h as u64]),
        )?;
        let max_wait = (0..=task.deadline).map(|t| f.eval(t)).fold(0.0, f64::max);
        let cost_range = task
            .server_cost()
            .max(max_wait + task.helper_proc_cost + 2.0 * task.bs_comm_cost);
        let energy_range = task.processing_energy + task.bs_comm_energy;
        let cost_se = floored_se(est.cost_se, cost_range, trials);
        let energy_se = floored_se(est.energy_se, energy_range, trials);
        let cost_z = z_score(eval.expected_cost, est.mean_cost, cost_se);
        let energy_z = z_score(eval.expected_energy, est.mean_energy, energy_se);
        empirical_total += est.mean_cost;
        var_total += cost_se * cost_se;
        rows.push(ValidationRow {
            requester: r,
            helper: h,
            timer: eval.timer,
            analytic_cost: eval.expected_cost,
            empirical_cost: est.mean_cost,
            cost_se,
            cost_z,
            analytic_energy: eval.expected_energy,
            empirical_energy: est.mean_energy,
            energy_se,
            energy_z,
            pass: cost_z.abs() <= VALIDATION_Z && energy_z.abs() <= VALIDATION_Z,
        });
    }
    Ok(ValidationReport {
        trials,
        threshold_z: VALIDATION_Z,
        pass: rows.iter().all(|r| r.pass),
        rows,
        analytic_total: table.objective(&assignment.choices),
        empirical_total,
        empirical_total_se: var_total.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::PairProfile;
    use crate::solvers::{evaluate_all_pairs, lagrangian_solve, SolverParams};

    fn task(d: u32) -> TaskSpec {
        TaskSpec {
            processing_energy: 2.0,
            bs_comm_energy: 1.0,
            deadline: d,
            helper_proc_cost: 1.0,
            server_proc_cost: 10.0,
            bs_comm_cost: 3.0,
            server_comm_cost: 20.0,
        }
    }

    #[test]
    fn zero_rate_is_always_server() {
        let pair = ContactPair::new(0.0, 1.0).unwrap();
        let f = CompletionCostFn::quadratic(0.004);
        for path in [SamplingPath::SlotCounts, SamplingPath::ExponentialGaps] {
            let est = simulate_pair_with(&pair, &task(5), &f, 2, 1000, 1, path).unwrap();
            assert_eq!(est.event_freq, [0.0, 0.0, 0.0, 0.0, 1.0]);
            assert_eq!(est.mean_cost, 50.0);
            assert_eq!(est.cost_se, 0.0);
            assert_eq!(est.mean_energy, 0.0);
        }
    }

    #[test]
    fn timer_at_deadline_leaves_no_post_timer_events() {
        let pair = ContactPair::new(0.4, 1.0).unwrap();
        let f = CompletionCostFn::quadratic(0.004);
        let est = simulate_pair(&pair, &task(6), &f, 6, 20_000, 3).unwrap();
        assert_eq!(est.event_freq[1], 0.0);
        assert_eq!(est.event_freq[2], 0.0);
    }

    #[test]
    fn outcomes_respect_event_semantics() {
        let pair = ContactPair::new(0.3, 1.0).unwrap();
        let spec = task(8);
        let f = CompletionCostFn::quadratic(0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut seen = [false; 5];
        for path in [SamplingPath::SlotCounts, SamplingPath::ExponentialGaps] {
            for _ in 0..5000 {
                let o = run_trial(&pair, &spec, &f, 3, path, &mut rng);
                assert!((1..=5).contains(&o.event));
                seen[usize::from(o.event - 1)] = true;
                match o.event {
                    1 | 2 => {
                        assert_eq!(o.bs_messages, 0);
                        assert_eq!(o.energy, 2.0);
                    }
                    3 | 4 => {
                        assert_eq!(o.bs_messages, 2);
                        assert_eq!(o.energy, 3.0);
                    }
                    _ => {
                        assert_eq!(o.cost, spec.server_cost());
                        assert_eq!(o.energy, 0.0);
                    }
                }
                if o.event == 4 {
                    assert_eq!(o.cost, f.eval(3) + 1.0 + 6.0);
                }
            }
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn seeded_runs_repeat() {
        let pair = ContactPair::new(0.5, 1.0).unwrap();
        let f = CompletionCostFn::quadratic(0.004);
        let a = simulate_pair(&pair, &task(4), &f, 2, 50_000, 9).unwrap();
        let b = simulate_pair(&pair, &task(4), &f, 2, 50_000, 9).unwrap();
        assert_eq!(a, b);
        let c = simulate_pair(&pair, &task(4), &f, 2, 50_000, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn agrees_with_analytic_model() {
        let pair = ContactPair::new(0.5, 1.0).unwrap();
        let spec = task(4);
        let f = CompletionCostFn::quadratic(0.004);
        let profile = PairProfile::new(&pair, &spec, &f).unwrap();
        let est = simulate_pair(&pair, &spec, &f, 2, 400_000, 21).unwrap();
        let probs = profile.event_probabilities(2).unwrap();
        let costs = profile.event_costs(2).unwrap();
        for i in 0..5 {
            assert!((est.event_freq[i] - probs[i]).abs() <= 4.0 * est.event_freq_se[i]);
            assert!((est.event_cost[i] - costs[i]).abs() <= 4.0 * est.event_cost_se[i]);
        }
        assert!((est.mean_cost - profile.total_cost(2).unwrap()).abs() <= 4.0 * est.cost_se);
        assert!(
            (est.mean_energy - profile.expected_energy(2).unwrap()).abs() <= 4.0 * est.energy_se
        );
    }

    #[test]
    fn all_server_assignment_simulates_nothing() {
        let inst = crate::instance::generate(&crate::instance::GeneratorConfig {
            requesters: 4,
            helpers: 2,
            ..Default::default()
        })
        .unwrap();
        let table = evaluate_all_pairs(&inst).unwrap();
        let report = validate_assignment(&inst, &table, &table.all_server(), 100, 1).unwrap();
        assert!(report.rows.is_empty());
        assert!(report.pass);
        assert_eq!(report.empirical_total, report.analytic_total);
    }

    #[test]
    fn infeasible_assignment_is_rejected() {
        let mut inst = crate::instance::generate(&crate::instance::GeneratorConfig {
            requesters: 3,
            helpers: 1,
            ..Default::default()
        })
        .unwrap();
        inst.helper_energy = vec![0.0];
        inst.rates = vec![vec![1.0]; 3];
        let table = evaluate_all_pairs(&inst).unwrap();
        let a = table.assignment(vec![Choice::Helper(0), Choice::Server, Choice::Server]);
        assert!(matches!(
            validate_assignment(&inst, &table, &a, 100, 1),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn single_pair_report_is_one_simulation() {
        let inst = Instance {
            tasks: vec![task(4)],
            helper_energy: vec![10.0],
            rates: vec![vec![0.5]],
            horizon: 4,
            slot_duration: 1.0,
            completion_cost: CompletionCostFn::quadratic(0.004),
            helper_proc_costs: None,
        };
        let table = evaluate_all_pairs(&inst).unwrap();
        let a = table.assignment(vec![Choice::Helper(0)]);
        let report = validate_assignment(&inst, &table, &a, 20_000, 5).unwrap();
        assert_eq!(report.rows.len(), 1);
        let est = simulate_pair(
            &inst.contact(0, 0).unwrap(),
            &inst.tasks[0],
            &inst.completion_cost,
            table.pairs[0][0].timer,
            20_000,
            seed::derive(5, &[0, 0]),
        )
        .unwrap();
        assert_eq!(report.rows[0].empirical_cost, est.mean_cost);
        assert_eq!(report.empirical_total, est.mean_cost);
    }

    #[test]
    fn lagrangian_solution_validates() {
        let inst = crate::instance::generate(&crate::instance::GeneratorConfig {
            requesters: 5,
            helpers: 3,
            seed: 42,
            ..Default::default()
        })
        .unwrap();
        let table = evaluate_all_pairs(&inst).unwrap();
        let state = lagrangian_solve(&table, &SolverParams::default()).unwrap();
        let report = validate_assignment(&inst, &table, &state.incumbent, 100_000, 8).unwrap();
        assert!(report.pass, "{report:?}");
    }
}
