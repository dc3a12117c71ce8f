use super::{Assignment, Choice, PairTable, ENERGY_TOLERANCE};

/// Turns an assignment that may break helper budgets into a feasible one.
///
/// Overloaded helpers are handled in order of decreasing violation. While a
/// helper is over budget, the task whose move costs least (cheapest feasible
/// alternative minus its current cost) leaves for that alternative: another
/// helper with enough residual energy, or the server. The server takes
/// anything, so this always terminates with a feasible assignment.
pub fn repair(choices: &[Choice], table: &PairTable) -> Assignment {
    let mut choices = choices.to_vec();
    let mut loads = table.loads(&choices);
    let caps = &table.capacities;

    let mut overloaded: Vec<usize> = (0..table.helpers())
        .filter(|&h| loads[h] > caps[h] + ENERGY_TOLERANCE)
        .collect();
    overloaded.sort_by(|&a, &b| {
        (loads[b] - caps[b])
            .total_cmp(&(loads[a] - caps[a]))
            .then(a.cmp(&b))
    });

    for h in overloaded {
        while loads[h] > caps[h] + ENERGY_TOLERANCE {
            let mut best: Option<(f64, usize, Choice)> = None;
            for (r, _) in choices
                .iter()
                .enumerate()
                .filter(|(_, c)| **c == Choice::Helper(h))
            {
                let (alt_cost, alt) = cheapest_alternative(table, &loads, r, h);
                let penalty = alt_cost - table.cost(r, Choice::Helper(h));
                if best.is_none_or(|(p, _, _)| penalty < p) {
                    best = Some((penalty, r, alt));
                }
            }
            let Some((_, r, alt)) = best else { break };
            loads[h] -= table.energy(r, h);
            if let Choice::Helper(to) = alt {
                loads[to] += table.energy(r, to);
            }
            choices[r] = alt;
        }
    }
    table.assignment(choices)
}

fn cheapest_alternative(table: &PairTable, loads: &[f64], r: usize, from: usize) -> (f64, Choice) {
    let mut best = (table.server_costs[r], Choice::Server);
    for (to, load) in loads.iter().enumerate() {
        if to == from {
            continue;
        }
        let fits = load + table.energy(r, to) <= table.capacities[to] + ENERGY_TOLERANCE;
        let cost = table.pairs[r][to].expected_cost;
        if fits && cost < best.0 {
            best = (cost, Choice::Helper(to));
        }
    }
    best
}
