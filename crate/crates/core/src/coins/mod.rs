//! Coin weighing: find coin values from the total weight of chosen subsets.

mod sum;
mod weighted;

use std::sync::Arc;

use crate::error::Result;
use crate::game::Subset;
use crate::strategy::{Ask, BoxStrategy, Plan};

pub use sum::{k, leaf_depth, pile_size, solve_leaf_heavy, solve_sum, sum_ceiling, LeafHeavy, Pile, TermSolver};
pub use weighted::{
    solve_counted, solve_sparse, solve_sparse_on, solve_weighted, solve_weighted_on, CountedFamily,
    WeightedFamily,
};

/// Weighs a single coin, answer in {0,1}.
pub fn weigh_one(id: u32) -> BoxStrategy<Subset, u64> {
    Plan::ask(Ask::bounded(Subset::single(id), 1), |v| Ok(Plan::Done(v))).into_strategy()
}

/// Finds which of the given coins are counterfeit (value 1) in at most
/// `16n − 15` queries, `n` the least with `k_n ≥ ids.len()`.
pub fn solve_coins_on(ids: Vec<u32>) -> Result<BoxStrategy<Subset, Vec<u64>>> {
    let ids = Arc::new(ids);
    let n = ids.len();
    let solver: TermSolver<Subset, u64> = Arc::new(move |i| Ok(weigh_one(ids[i])));
    solve_sum(n, 1.0, true, solver)
}

/// [`solve_coins_on`] for coins `1..=n`.
pub fn solve_coins(n: usize) -> Result<BoxStrategy<Subset, Vec<u64>>> {
    solve_coins_on((1..=n as u32).collect())
}

/// Step ceiling of [`solve_coins`].
pub fn coins_ceiling(n: usize) -> u64 {
    sum_ceiling(n, 1.0, true)
}
