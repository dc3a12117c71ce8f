//! Greedy reference strategies.
//!
//! Tasks are visited one at a time in descending order of a per-task key and
//! placed on a helper that still has enough expected energy left, or on the
//! server; residual energies are updated after every placement. A helper is
//! only used when it beats the server route.

use serde::{Deserialize, Serialize};

use super::{Assignment, Choice, PairTable, ENERGY_TOLERANCE};

/// How a task's per-helper values collapse into its ordering key.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingKey {
    /// Cheapest helper cost for the cost-based rule, highest rate for the contact-based one.
    #[default]
    Best,
    Mean,
}

/// Tasks in descending expected completion cost, each on its cheapest fitting helper.
pub fn cost_based_baseline(table: &PairTable, key: OrderingKey) -> Assignment {
    let keys: Vec<f64> = (0..table.requesters())
        .map(|r| {
            let costs = table.pairs[r].iter().map(|p| p.expected_cost);
            match key {
                OrderingKey::Best => costs.fold(f64::INFINITY, f64::min),
                OrderingKey::Mean => mean(costs),
            }
        })
        .collect();
    greedy(table, &keys, |r, a, b| {
        table.pairs[r][a]
            .expected_cost
            .total_cmp(&table.pairs[r][b].expected_cost)
    })
}

/// Tasks in descending contact rate, each on its best-connected fitting helper.
pub fn contact_based_baseline(
    table: &PairTable,
    rates: &[Vec<f64>],
    key: OrderingKey,
) -> Assignment {
    let keys: Vec<f64> = rates
        .iter()
        .map(|row| {
            let it = row.iter().copied();
            match key {
                OrderingKey::Best => it.fold(f64::NEG_INFINITY, f64::max),
                OrderingKey::Mean => mean(it),
            }
        })
        .collect();
    greedy(table, &keys, |r, a, b| rates[r][b].total_cmp(&rates[r][a]))
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn greedy(
    table: &PairTable,
    keys: &[f64],
    prefer: impl Fn(usize, usize, usize) -> std::cmp::Ordering,
) -> Assignment {
    let mut order: Vec<usize> = (0..table.requesters()).collect();
    order.sort_by(|&a, &b| keys[b].total_cmp(&keys[a]).then(a.cmp(&b)));

    let mut residual = table.capacities.clone();
    let mut choices = vec![Choice::Server; table.requesters()];
    for r in order {
        let mut helpers: Vec<usize> = (0..table.helpers()).collect();
        helpers.sort_by(|&a, &b| prefer(r, a, b).then(a.cmp(&b)));
        let placed = helpers.into_iter().find(|&h| {
            table.energy(r, h) <= residual[h] + ENERGY_TOLERANCE
                && table.pairs[r][h].expected_cost < table.server_costs[r]
        });
        if let Some(h) = placed {
            residual[h] -= table.energy(r, h);
            choices[r] = Choice::Helper(h);
        }
    }
    table.assignment(choices)
}
