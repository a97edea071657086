//! Inputs shared by the benchmarks.

use stochorder::{Copula2, Game, LossDistribution, MultiGame, TruncationPolicy};

pub fn gumbel(a: f64, b: f64) -> LossDistribution {
    LossDistribution::gumbel(a, b).unwrap()
}

pub fn compact(d: LossDistribution) -> LossDistribution {
    d.truncate(&TruncationPolicy::default()).unwrap()
}

/// Gumbel cells, the better law on the diagonal.
pub fn gumbel_game(n: usize) -> Game {
    let payoff = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| gumbel(if i == j { 31.0063 } else { 32.0063 + 0.1 * j as f64 }, 1.74346))
                .collect()
        })
        .collect();
    Game::new(payoff, Copula2::Product).unwrap()
}

pub fn point_game(a: &[&[f64]]) -> Game {
    let payoff = a
        .iter()
        .map(|r| r.iter().map(|x| LossDistribution::point(*x).unwrap()).collect())
        .collect();
    Game::new(payoff, Copula2::Product).unwrap()
}

pub fn two_goals() -> MultiGame {
    let u = |lo, hi| LossDistribution::uniform(lo, hi).unwrap();
    let second = Game::new(
        vec![vec![u(1.0, 3.0), u(2.0, 4.0)], vec![u(1.0, 2.0), u(1.0, 5.0)]],
        Copula2::Product,
    )
    .unwrap();
    MultiGame::new(vec![gumbel_game(2), second]).unwrap()
}
