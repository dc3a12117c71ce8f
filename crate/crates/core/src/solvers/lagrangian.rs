//! Lagrangian relaxation of the helper energy budgets and its subgradient
//! ascent with Polyak step lengths.

use serde::{Deserialize, Serialize};

use super::{repair, Assignment, Choice, PairTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    /// Iteration cap `K`.
    pub max_iterations: usize,
    /// Stop once the subgradient norm drops to this value.
    pub subgradient_tolerance: f64,
    /// Stop once a multiplier update moves less than this.
    pub multiplier_tolerance: f64,
    /// Polyak step parameter, `0 < eta < 2`.
    pub eta: f64,
    /// Starting multipliers; zeros when absent.
    pub initial_multipliers: Option<Vec<f64>>,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            subgradient_tolerance: 1e-6,
            multiplier_tolerance: 1e-6,
            eta: 1.0,
            initial_multipliers: None,
        }
    }
}

impl SolverParams {
    pub fn validate(&self, helpers: usize) -> Result<()> {
        let mut bad = Vec::new();
        if self.max_iterations == 0 {
            bad.push("max_iterations must be at least 1".to_string());
        }
        for (name, v) in [
            ("subgradient_tolerance", self.subgradient_tolerance),
            ("multiplier_tolerance", self.multiplier_tolerance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                bad.push(format!("{name} must be > 0, got {v}"));
            }
        }
        if !(self.eta > 0.0 && self.eta < 2.0) {
            bad.push(format!("eta must lie in (0, 2), got {}", self.eta));
        }
        if let Some(u) = &self.initial_multipliers {
            if u.len() != helpers {
                bad.push(format!(
                    "initial_multipliers has {} entries for {helpers} helpers",
                    u.len()
                ));
            }
            if u.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                bad.push("initial_multipliers must be finite and >= 0".to_string());
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid("solver parameters", bad))
        }
    }
}

/// Optimal solution of the relaxed problem for fixed multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct Relaxation {
    /// `L(u)`, a lower bound on the optimum.
    pub value: f64,
    pub choices: Vec<Choice>,
}

/// With the budgets priced into the objective, each requester independently
/// takes its cheapest option. Ties go to the server, then the lowest helper.
pub fn solve_relaxation(table: &PairTable, multipliers: &[f64]) -> Result<Relaxation> {
    if multipliers.len() != table.helpers() {
        return Err(Error::Domain(format!(
            "{} multipliers for {} helpers",
            multipliers.len(),
            table.helpers()
        )));
    }
    if let Some(u) = multipliers.iter().find(|u| u.is_nan() || **u < 0.0) {
        return Err(Error::Domain(format!("multipliers must be >= 0, got {u}")));
    }
    let mut value = 0.0;
    let mut choices = Vec::with_capacity(table.requesters());
    for r in 0..table.requesters() {
        let mut best = (table.server_costs[r], Choice::Server);
        for (h, u) in multipliers.iter().enumerate() {
            let priced = table.pairs[r][h].expected_cost + u * table.energy(r, h);
            if priced < best.0 {
                best = (priced, Choice::Helper(h));
            }
        }
        value += best.0;
        choices.push(best.1);
    }
    value -= multipliers
        .iter()
        .zip(&table.capacities)
        .map(|(u, cap)| u * cap)
        .sum::<f64>();
    Ok(Relaxation { value, choices })
}

/// `d_h = load_h - E_h`.
pub fn subgradient(table: &PairTable, choices: &[Choice]) -> Vec<f64> {
    table
        .loads(choices)
        .iter()
        .zip(&table.capacities)
        .map(|(load, cap)| load - cap)
        .collect()
}

/// `max(0, eta * (upper - dual_value) / |d|^2)`.
pub fn polyak_step(upper: f64, dual_value: f64, direction: &[f64], eta: f64) -> Result<f64> {
    let norm_sq: f64 = direction.iter().map(|d| d * d).sum();
    if norm_sq == 0.0 {
        return Err(Error::Domain("zero subgradient has no step length".into()));
    }
    if !(eta > 0.0 && eta < 2.0) {
        return Err(Error::Domain(format!("eta must lie in (0, 2), got {eta}")));
    }
    Ok((eta * (upper - dual_value) / norm_sq).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub dual_value: f64,
    pub lower: f64,
    pub upper: f64,
    pub step: f64,
    pub subgradient_norm: f64,
}

/// Subgradient state: multipliers, bounds and incumbent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualState {
    pub multipliers: Vec<f64>,
    /// Best dual value seen, a lower bound on the optimum.
    pub lower: f64,
    /// Objective of `incumbent`, an upper bound on the optimum.
    pub upper: f64,
    pub incumbent: Assignment,
    pub iterations: usize,
    pub last_subgradient: Vec<f64>,
    pub trace: Vec<TraceRow>,
}

impl DualState {
    /// Relative gap `(upper - lower) / upper`, zero when both vanish.
    pub fn gap(&self) -> f64 {
        if self.upper == 0.0 {
            0.0
        } else {
            (self.upper - self.lower) / self.upper
        }
    }
}

/// Subgradient ascent on the Lagrangian dual with a repaired primal incumbent.
///
/// Each iteration solves the relaxation, raises the lower bound, repairs the
/// relaxed assignment into a feasible one to lower the upper bound, and moves
/// the multipliers along the subgradient with a Polyak step, projected onto
/// `u >= 0`. Runs until `max_iterations`, a small subgradient, or a small
/// multiplier move.
pub fn lagrangian_solve(table: &PairTable, params: &SolverParams) -> Result<DualState> {
    params.validate(table.helpers())?;
    let incumbent = table.all_server();
    let mut state = DualState {
        multipliers: params
            .initial_multipliers
            .clone()
            .unwrap_or_else(|| vec![0.0; table.helpers()]),
        lower: f64::NEG_INFINITY,
        upper: incumbent.objective,
        incumbent,
        iterations: 0,
        last_subgradient: Vec::new(),
        trace: Vec::new(),
    };

    for k in 1..=params.max_iterations {
        state.iterations = k;
        let relaxed = solve_relaxation(table, &state.multipliers)?;
        if relaxed.value > state.lower {
            state.lower = relaxed.value;
        }

        let repaired = repair(&relaxed.choices, table);
        if repaired.objective < state.upper {
            state.upper = repaired.objective;
            state.incumbent = repaired;
        }
        // lower <= upper up to rounding
        state.lower = state.lower.min(state.upper);

        let direction = subgradient(table, &relaxed.choices);
        let norm = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
        state.last_subgradient = direction;

        if norm <= params.subgradient_tolerance {
            state.trace.push(TraceRow {
                iteration: k,
                dual_value: relaxed.value,
                lower: state.lower,
                upper: state.upper,
                step: 0.0,
                subgradient_norm: norm,
            });
            break;
        }

        let step = polyak_step(
            state.upper,
            relaxed.value,
            &state.last_subgradient,
            params.eta,
        )?;
        state.trace.push(TraceRow {
            iteration: k,
            dual_value: relaxed.value,
            lower: state.lower,
            upper: state.upper,
            step,
            subgradient_norm: norm,
        });

        let mut moved = 0.0;
        for (u, d) in state.multipliers.iter_mut().zip(&state.last_subgradient) {
            let next = (*u + step * d).max(0.0);
            moved += (next - *u) * (next - *u);
            *u = next;
        }
        if moved.sqrt() <= params.multiplier_tolerance {
            break;
        }
    }
    Ok(state)
}
