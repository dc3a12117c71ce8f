use super::{Assignment, Choice, PairTable, ENERGY_TOLERANCE};
use crate::error::{Error, Result};

/// Largest `R * log2(H + 1)` accepted by [`exact_solve`].
pub const EXACT_LOG2_LIMIT: f64 = 30.0;

/// Globally optimal feasible assignment by depth-first enumeration of all
/// `(H + 1)^R` assignments.
///
/// Branches are cut when they break a budget or when the partial cost plus
/// every remaining requester's cheapest option cannot beat the incumbent.
/// Options are tried server first, then helpers by index, and only strict
/// improvements replace the incumbent.
pub fn exact_solve(table: &PairTable) -> Result<Assignment> {
    let (r_count, h_count) = (table.requesters(), table.helpers());
    if r_count as f64 * ((h_count + 1) as f64).log2() > EXACT_LOG2_LIMIT {
        return Err(Error::TooLarge {
            requesters: r_count,
            options: h_count + 1,
        });
    }

    // cheapest_tail[r] = sum over r' >= r of the cheapest option ignoring budgets
    let mut cheapest_tail = vec![0.0; r_count + 1];
    for r in (0..r_count).rev() {
        let cheapest = table.pairs[r]
            .iter()
            .map(|p| p.expected_cost)
            .fold(table.server_costs[r], f64::min);
        cheapest_tail[r] = cheapest_tail[r + 1] + cheapest;
    }

    let start = table.all_server();
    let mut search = Search {
        table,
        cheapest_tail,
        loads: vec![0.0; h_count],
        current: vec![Choice::Server; r_count],
        best_cost: start.objective,
        best: start.choices,
    };
    search.descend(0, 0.0);
    let best = search.best;
    Ok(table.assignment(best))
}

struct Search<'a> {
    table: &'a PairTable,
    cheapest_tail: Vec<f64>,
    loads: Vec<f64>,
    current: Vec<Choice>,
    best_cost: f64,
    best: Vec<Choice>,
}

impl Search<'_> {
    fn descend(&mut self, r: usize, partial: f64) {
        if r == self.current.len() {
            if partial < self.best_cost {
                self.best_cost = partial;
                self.best.clone_from(&self.current);
            }
            return;
        }
        if partial + self.cheapest_tail[r] >= self.best_cost {
            return;
        }

        self.current[r] = Choice::Server;
        self.descend(r + 1, partial + self.table.server_costs[r]);

        for h in 0..self.table.helpers() {
            let energy = self.table.energy(r, h);
            if self.loads[h] + energy > self.table.capacities[h] + ENERGY_TOLERANCE {
                continue;
            }
            self.loads[h] += energy;
            self.current[r] = Choice::Helper(h);
            self.descend(r + 1, partial + self.table.pairs[r][h].expected_cost);
            self.loads[h] -= energy;
        }
        self.current[r] = Choice::Server;
    }
}
