//! Expected cost of handing one task to one helper.
//!
//! Given a timer `t`, five mutually exclusive events can happen to a
//! requester/helper pair before the task deadline `d`:
//!
//! 1. at least two meetings in slots `1..=t`: task out and result back over D2D;
//! 2. exactly one meeting before the timer and at least one in `t+1..=d`;
//! 3. no meeting before the timer, at least one after it: the base station
//!    relays the task (two BS messages), the result comes back over D2D;
//! 4. exactly one meeting before the timer and none after it: the result is
//!    relayed by the base station at slot `t`;
//! 5. no meeting at all: the task goes to the remote server.
//!
//! [`PairProfile`] evaluates every event for every timer `0..=d` in `O(d)`
//! using prefix and suffix recurrences, which is what makes the timer scan in
//! [`optimal_timer`] linear.

use serde::{Deserialize, Serialize};

use crate::contact::ContactPair;
use crate::error::{Error, Result};

/// Cost of waiting `t` slots for a task result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CompletionCostFn {
    /// `alpha * t^2`.
    Quadratic { alpha: f64 },
    /// Explicit values for `t = 0, 1, ..., values.len() - 1`.
    Table { values: Vec<f64> },
}

impl CompletionCostFn {
    pub fn quadratic(alpha: f64) -> Self {
        CompletionCostFn::Quadratic { alpha }
    }

    pub fn zero() -> Self {
        CompletionCostFn::Quadratic { alpha: 0.0 }
    }

    /// Largest `t` the function is defined for.
    pub fn max_slot(&self) -> Option<u32> {
        match self {
            CompletionCostFn::Quadratic { .. } => None,
            CompletionCostFn::Table { values } => Some(
                u32::try_from(values.len())
                    .unwrap_or(u32::MAX)
                    .saturating_sub(1),
            ),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        match self {
            CompletionCostFn::Quadratic { alpha } => {
                if !(alpha.is_finite() && *alpha >= 0.0) {
                    bad.push(format!("alpha must be finite and >= 0, got {alpha}"));
                }
            }
            CompletionCostFn::Table { values } => {
                if values.is_empty() {
                    bad.push("table must define f(0)".to_string());
                }
                for (t, v) in values.iter().enumerate() {
                    if !(v.is_finite() && *v >= 0.0) {
                        bad.push(format!("f({t}) must be finite and >= 0, got {v}"));
                    }
                }
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid("completion cost function", bad))
        }
    }

    /// Callers guarantee `t <= max_slot()`.
    pub fn eval(&self, t: u32) -> f64 {
        match self {
            CompletionCostFn::Quadratic { alpha } => {
                let t = f64::from(t);
                alpha * t * t
            }
            CompletionCostFn::Table { values } => values[t as usize],
        }
    }

    fn check_defined(&self, through: u32) -> Result<()> {
        match self.max_slot() {
            Some(max) if max < through => Err(Error::Domain(format!(
                "completion cost is tabulated through slot {max}, needed through {through}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Energies, deadline and cost coefficients of a task as seen by one helper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    /// Joules to process the task.
    pub processing_energy: f64,
    /// Joules per message exchanged with the base station.
    pub bs_comm_energy: f64,
    /// Deadline in slots, `1..=horizon`.
    pub deadline: u32,
    pub helper_proc_cost: f64,
    pub server_proc_cost: f64,
    pub bs_comm_cost: f64,
    pub server_comm_cost: f64,
}

impl TaskSpec {
    /// Cost of the server route: processing plus two server messages.
    pub fn server_cost(&self) -> f64 {
        self.server_proc_cost + 2.0 * self.server_comm_cost
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        let fields = [
            ("processing_energy", self.processing_energy),
            ("bs_comm_energy", self.bs_comm_energy),
            ("helper_proc_cost", self.helper_proc_cost),
            ("server_proc_cost", self.server_proc_cost),
            ("bs_comm_cost", self.bs_comm_cost),
            ("server_comm_cost", self.server_comm_cost),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v >= 0.0) {
                bad.push(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if self.deadline == 0 {
            bad.push("deadline must be at least one slot".to_string());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid("task", bad))
        }
    }
}

/// Probabilities of events 1..5, indexed from 0.
pub type EventVector = [f64; 5];

/// Outcome of optimizing the timer of one pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairEvaluation {
    pub timer: u32,
    pub expected_cost: f64,
    pub expected_energy: f64,
    pub event_probs: EventVector,
}

/// Event probabilities and costs of a pair for every timer `0..=deadline`.
#[derive(Debug, Clone)]
pub struct PairProfile {
    task: TaskSpec,
    probs: Vec<EventVector>,
    costs: Vec<EventVector>,
}

impl PairProfile {
    pub fn new(pair: &ContactPair, task: &TaskSpec, f: &CompletionCostFn) -> Result<Self> {
        task.validate()?;
        f.validate()?;
        f.check_defined(task.deadline)?;

        let d = task.deadline;
        let len = d as usize + 1;
        let mu = pair.slot_mean();
        let q = (-mu).exp();
        let one_minus_q = -(-mu).exp_m1();

        // Before-timer counts over slots 1..=t.
        let mut none_before = Vec::with_capacity(len);
        let mut one_before = Vec::with_capacity(len);
        let mut two_before = Vec::with_capacity(len);
        for t in 0..=d {
            let p0 = pair.prob_exactly(1, t, 0)?;
            let p1 = pair.prob_exactly(1, t, 1)?;
            none_before.push(p0);
            one_before.push(p1);
            two_before.push((1.0 - p0 - p1).clamp(0.0, 1.0));
        }

        // Expected f of the second meeting, restricted to it landing in 1..=t.
        let mut second_meeting = vec![0.0; len];
        for t in 1..len {
            second_meeting[t] =
                second_meeting[t - 1] + f.eval(t as u32) * (two_before[t] - two_before[t - 1]);
        }

        // after[t] = sum_{k=t+1..d} f(k) * P(first post-timer meeting in slot k).
        // The slot-k mass is q^{k-t-1} (1 - q); accumulated backwards from d.
        let mut discounted = vec![0.0; len];
        for t in (0..d as usize).rev() {
            discounted[t] = f.eval(t as u32 + 1) + q * discounted[t + 1];
        }

        let proc = task.helper_proc_cost;
        let relay = proc + 2.0 * task.bs_comm_cost;
        let server = task.server_cost();

        let mut probs = Vec::with_capacity(len);
        let mut costs = Vec::with_capacity(len);
        for t in 0..=d {
            let i = t as usize;
            let none_after = pair.prob_exactly(t + 1, d, 0)?;
            let some_after = pair.prob_at_least(t + 1, d, 1)?;
            let after = one_minus_q * discounted[i];

            let p1 = two_before[i];
            let p2 = one_before[i] * some_after;
            let p3 = none_before[i] * some_after;
            let p4 = one_before[i] * none_after;
            let p5 = (1.0 - (p1 + p2 + p3 + p4)).max(0.0);

            let c1 = second_meeting[i] + p1 * proc;
            let c2 = one_before[i] * after + p2 * proc;
            let c3 = none_before[i] * after + p3 * relay;
            let c4 = p4 * (f.eval(t) + relay);
            let c5 = p5 * server;

            probs.push([p1, p2, p3, p4, p5]);
            costs.push([c1, c2, c3, c4, c5]);
        }

        Ok(Self {
            task: *task,
            probs,
            costs,
        })
    }

    pub fn deadline(&self) -> u32 {
        self.task.deadline
    }

    fn index(&self, t: u32) -> Result<usize> {
        if t > self.task.deadline {
            Err(Error::Domain(format!(
                "timer {t} exceeds deadline {}",
                self.task.deadline
            )))
        } else {
            Ok(t as usize)
        }
    }

    pub fn event_probabilities(&self, t: u32) -> Result<EventVector> {
        Ok(self.probs[self.index(t)?])
    }

    pub fn event_costs(&self, t: u32) -> Result<EventVector> {
        Ok(self.costs[self.index(t)?])
    }

    pub fn total_cost(&self, t: u32) -> Result<f64> {
        Ok(self.costs[self.index(t)?].iter().sum())
    }

    pub fn expected_energy(&self, t: u32) -> Result<f64> {
        let p = self.probs[self.index(t)?];
        Ok(energy_from_probs(&p, &self.task))
    }

    /// Minimizes the total cost over all timers; the smallest minimizing timer wins.
    pub fn optimize(&self) -> PairEvaluation {
        let mut best_t = 0usize;
        let mut best_cost = f64::INFINITY;
        for (t, c) in self.costs.iter().enumerate() {
            let total: f64 = c.iter().sum();
            if total < best_cost {
                best_cost = total;
                best_t = t;
            }
        }
        let probs = self.probs[best_t];
        PairEvaluation {
            timer: best_t as u32,
            expected_cost: best_cost,
            expected_energy: energy_from_probs(&probs, &self.task),
            event_probs: probs,
        }
    }
}

fn energy_from_probs(p: &EventVector, task: &TaskSpec) -> f64 {
    let e = (p[0] + p[1]) * task.processing_energy
        + (p[2] + p[3]) * (task.processing_energy + task.bs_comm_energy);
    e.clamp(0.0, task.processing_energy + task.bs_comm_energy)
}

pub fn event_probabilities(pair: &ContactPair, task: &TaskSpec, t: u32) -> Result<EventVector> {
    PairProfile::new(pair, task, &CompletionCostFn::zero())?.event_probabilities(t)
}

pub fn event_costs(
    pair: &ContactPair,
    task: &TaskSpec,
    f: &CompletionCostFn,
    t: u32,
) -> Result<EventVector> {
    PairProfile::new(pair, task, f)?.event_costs(t)
}

pub fn total_expected_cost(
    pair: &ContactPair,
    task: &TaskSpec,
    f: &CompletionCostFn,
    t: u32,
) -> Result<f64> {
    PairProfile::new(pair, task, f)?.total_cost(t)
}

pub fn expected_energy(pair: &ContactPair, task: &TaskSpec, t: u32) -> Result<f64> {
    PairProfile::new(pair, task, &CompletionCostFn::zero())?.expected_energy(t)
}

pub fn optimal_timer(
    pair: &ContactPair,
    task: &TaskSpec,
    f: &CompletionCostFn,
) -> Result<PairEvaluation> {
    Ok(PairProfile::new(pair, task, f)?.optimize())
}
