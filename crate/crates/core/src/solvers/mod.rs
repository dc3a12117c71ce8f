//! Assignment of requesters to helpers or the server.
//!
//! Once every pair's timer is fixed at its optimum the total cost becomes
//! linear in the assignment variables: requester `r` on helper `h` costs
//! `Δ*_rh` and draws `e_rh` expected Joules from `E_h`; on the server it costs
//! `δ^p_rN + 2δ^c_rN` and draws nothing. The solvers here all work on that
//! linearized table.

mod baselines;
mod exact;
mod lagrangian;
mod repair;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{optimal_timer, PairEvaluation};
use crate::error::Result;
use crate::instance::Instance;

pub use baselines::{contact_based_baseline, cost_based_baseline, OrderingKey};
pub use exact::{exact_solve, EXACT_LOG2_LIMIT};
pub use lagrangian::{
    lagrangian_solve, polyak_step, solve_relaxation, subgradient, DualState, Relaxation,
    SolverParams, TraceRow,
};
pub use repair::repair;

/// Energy slack tolerated when checking helper budgets, Joules.
pub const ENERGY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Choice {
    Helper(usize),
    Server,
}

/// Preprocessed pair evaluations plus everything else the linear problem needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTable {
    /// `pairs[r][h]`, evaluated at the pair's optimal timer.
    pub pairs: Vec<Vec<PairEvaluation>>,
    pub server_costs: Vec<f64>,
    pub capacities: Vec<f64>,
}

impl PairTable {
    pub fn requesters(&self) -> usize {
        self.server_costs.len()
    }

    pub fn helpers(&self) -> usize {
        self.capacities.len()
    }

    pub fn cost(&self, r: usize, choice: Choice) -> f64 {
        match choice {
            Choice::Helper(h) => self.pairs[r][h].expected_cost,
            Choice::Server => self.server_costs[r],
        }
    }

    pub fn energy(&self, r: usize, h: usize) -> f64 {
        self.pairs[r][h].expected_energy
    }

    /// Expected energy drawn from each helper by `choices`.
    pub fn loads(&self, choices: &[Choice]) -> Vec<f64> {
        let mut loads = vec![0.0; self.helpers()];
        for (r, c) in choices.iter().enumerate() {
            if let Choice::Helper(h) = *c {
                loads[h] += self.energy(r, h);
            }
        }
        loads
    }

    pub fn objective(&self, choices: &[Choice]) -> f64 {
        choices
            .iter()
            .enumerate()
            .map(|(r, &c)| self.cost(r, c))
            .sum()
    }

    pub fn is_feasible(&self, choices: &[Choice]) -> bool {
        self.loads(choices)
            .iter()
            .zip(&self.capacities)
            .all(|(load, cap)| *load <= cap + ENERGY_TOLERANCE)
    }

    pub fn assignment(&self, choices: Vec<Choice>) -> Assignment {
        Assignment {
            objective: self.objective(&choices),
            feasible: self.is_feasible(&choices),
            choices,
        }
    }

    pub fn all_server(&self) -> Assignment {
        self.assignment(vec![Choice::Server; self.requesters()])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub choices: Vec<Choice>,
    pub objective: f64,
    pub feasible: bool,
}

impl Assignment {
    pub fn helper_count(&self) -> usize {
        self.choices
            .iter()
            .filter(|c| matches!(c, Choice::Helper(_)))
            .count()
    }
}

/// Optimizes the timer of every requester/helper pair, in parallel over requesters.
pub fn evaluate_all_pairs(instance: &Instance) -> Result<PairTable> {
    instance.validate()?;
    let pairs = (0..instance.requesters())
        .into_par_iter()
        .map(|r| {
            (0..instance.helpers())
                .map(|h| {
                    optimal_timer(
                        &instance.contact(r, h)?,
                        &instance.task_for(r, h),
                        &instance.completion_cost,
                    )
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PairTable {
        pairs,
        server_costs: instance.tasks.iter().map(|t| t.server_cost()).collect(),
        capacities: instance.helper_energy.clone(),
    })
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;
    use crate::instance::{generate, GeneratorConfig};

    pub fn random_instance(seed: u64, r: usize, h: usize) -> Instance {
        generate(&GeneratorConfig {
            requesters: r,
            helpers: h,
            seed,
            ..GeneratorConfig::default()
        })
        .unwrap()
    }

    /// Builds a table directly from (cost, energy) pairs.
    pub fn table(entries: &[&[(f64, f64)]], server: &[f64], caps: &[f64]) -> PairTable {
        PairTable {
            pairs: entries
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|&(c, e)| PairEvaluation {
                            timer: 0,
                            expected_cost: c,
                            expected_energy: e,
                            event_probs: [0.0, 0.0, 0.0, 0.0, 1.0],
                        })
                        .collect()
                })
                .collect(),
            server_costs: server.to_vec(),
            capacities: caps.to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::testing::random_instance;
    use super::*;
    use crate::contact::ContactPair;
    use crate::cost::{total_expected_cost, CompletionCostFn, TaskSpec};

    #[test]
    fn zero_rates_cost_the_server() {
        let mut inst = random_instance(5, 4, 3);
        for row in &mut inst.rates {
            row.iter_mut().for_each(|x| *x = 0.0);
        }
        let table = evaluate_all_pairs(&inst).unwrap();
        for r in 0..4 {
            for h in 0..3 {
                assert_eq!(table.pairs[r][h].expected_cost, table.server_costs[r]);
                assert_eq!(table.pairs[r][h].expected_energy, 0.0);
            }
        }
    }

    #[test]
    fn single_pair_delegates_to_timer_optimization() {
        let task = TaskSpec {
            processing_energy: 2.0,
            bs_comm_energy: 1.0,
            deadline: 4,
            helper_proc_cost: 2.0,
            server_proc_cost: 20.0,
            bs_comm_cost: 100.0,
            server_comm_cost: 1000.0,
        };
        let inst = Instance {
            tasks: vec![task],
            helper_energy: vec![10.0],
            rates: vec![vec![0.5]],
            horizon: 4,
            slot_duration: 1.0,
            completion_cost: CompletionCostFn::quadratic(0.004),
            helper_proc_costs: None,
        };
        let table = evaluate_all_pairs(&inst).unwrap();
        let direct = optimal_timer(
            &ContactPair::new(0.5, 1.0).unwrap(),
            &task,
            &inst.completion_cost,
        )
        .unwrap();
        assert_eq!(table.pairs[0][0], direct);
        assert_eq!(table.server_costs, vec![2020.0]);
    }

    #[test]
    fn table_matches_entrywise_rescan() {
        let inst = random_instance(17, 3, 2);
        let table = evaluate_all_pairs(&inst).unwrap();
        for r in 0..3 {
            for h in 0..2 {
                let pair = inst.contact(r, h).unwrap();
                let task = inst.task_for(r, h);
                let best = (0..=task.deadline)
                    .map(|t| total_expected_cost(&pair, &task, &inst.completion_cost, t).unwrap())
                    .fold(f64::INFINITY, f64::min);
                assert_eq!(table.pairs[r][h].expected_cost, best);
            }
        }
    }

    #[test]
    fn per_pair_processing_costs_override_uniform() {
        let mut inst = random_instance(2, 2, 2);
        let base = evaluate_all_pairs(&inst).unwrap();
        inst.helper_proc_costs = Some(vec![vec![0.0, 1e9], vec![0.0, 0.0]]);
        let table = evaluate_all_pairs(&inst).unwrap();
        assert!(table.pairs[0][1].expected_cost > base.pairs[0][1].expected_cost);
        assert!(table.pairs[0][0].expected_cost <= base.pairs[0][0].expected_cost);
    }
}
