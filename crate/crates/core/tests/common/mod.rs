#![allow(dead_code, clippy::needless_range_loop)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stochorder::{Copula2, Game, LossDistribution, TruncationPolicy};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn point_game(a: &[Vec<f64>]) -> Game {
    let payoff = a
        .iter()
        .map(|r| r.iter().map(|x| LossDistribution::point(*x).unwrap()).collect())
        .collect();
    Game::new(payoff, Copula2::Product).unwrap()
}

pub fn gumbel_pennies() -> Game {
    let g = |a| LossDistribution::gumbel(a, 1.74346).unwrap();
    Game::new(
        vec![vec![g(31.0063), g(32.0063)], vec![g(32.0063), g(31.0063)]],
        Copula2::Product,
    )
    .unwrap()
}

/// Uniform, point and Gumbel cells; row 0 is the only optimal row.
pub fn mixed_3x3() -> Game {
    let u = |lo, hi| LossDistribution::uniform(lo, hi).unwrap();
    Game::new(
        vec![
            vec![u(1.0, 3.0), u(2.0, 4.0), LossDistribution::point(2.5).unwrap()],
            vec![u(1.0, 2.0), u(1.0, 5.0), u(0.0, 3.5)],
            vec![truncated(LossDistribution::gumbel(3.0, 0.3).unwrap()), u(2.0, 3.0), u(0.5, 4.5)],
        ],
        Copula2::Product,
    )
    .unwrap()
}

pub fn truncated(d: LossDistribution) -> LossDistribution {
    d.truncate(&TruncationPolicy::default()).unwrap_or(d)
}

/// Gaussian elimination with partial pivoting; `None` when singular.
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|x, y| a[*x][c].abs().total_cmp(&a[*y][c].abs()))?;
        if a[piv][c].abs() < 1e-12 {
            return None;
        }
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect())
        .collect()
}

#[derive(Debug, Clone)]
pub struct ScalarEquilibrium {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub value: f64,
}

/// All equilibria of the loss matrix `a` (rows minimize) by support
/// enumeration over equal-size supports.
pub fn scalar_equilibria(a: &[Vec<f64>]) -> Vec<ScalarEquilibrium> {
    let (n, m) = (a.len(), a[0].len());
    let mut out: Vec<ScalarEquilibrium> = Vec::new();
    for k in 1..=n.min(m) {
        for s in subsets(n, k) {
            for t in subsets(m, k) {
                // unknowns: p_s (k) and v; equations: columns in t equalize, sum p = 1
                let mut mp = vec![vec![0.0; k + 1]; k + 1];
                let mut rhs = vec![0.0; k + 1];
                for (r, &j) in t.iter().enumerate() {
                    for (c, &i) in s.iter().enumerate() {
                        mp[r][c] = a[i][j];
                    }
                    mp[r][k] = -1.0;
                }
                for c in 0..k {
                    mp[k][c] = 1.0;
                }
                rhs[k] = 1.0;
                let Some(px) = solve_linear(mp, rhs.clone()) else { continue };
                let mut mq = vec![vec![0.0; k + 1]; k + 1];
                for (r, &i) in s.iter().enumerate() {
                    for (c, &j) in t.iter().enumerate() {
                        mq[r][c] = a[i][j];
                    }
                    mq[r][k] = -1.0;
                }
                for c in 0..k {
                    mq[k][c] = 1.0;
                }
                let Some(qx) = solve_linear(mq, rhs) else { continue };
                if px[..k].iter().chain(&qx[..k]).any(|x| *x < -1e-12) {
                    continue;
                }
                let mut p = vec![0.0; n];
                let mut q = vec![0.0; m];
                for (c, &i) in s.iter().enumerate() {
                    p[i] = px[c].max(0.0);
                }
                for (c, &j) in t.iter().enumerate() {
                    q[j] = qx[c].max(0.0);
                }
                let v = px[k];
                let col_ok = (0..m).all(|j| (0..n).map(|i| p[i] * a[i][j]).sum::<f64>() <= v + 1e-9);
                let row_ok = (0..n).all(|i| (0..m).map(|j| a[i][j] * q[j]).sum::<f64>() >= v - 1e-9);
                if !(col_ok && row_ok) {
                    continue;
                }
                let dup = out.iter().any(|e| {
                    e.p.iter().zip(&p).all(|(x, y)| (x - y).abs() < 1e-9)
                        && e.q.iter().zip(&q).all(|(x, y)| (x - y).abs() < 1e-9)
                });
                if !dup {
                    out.push(ScalarEquilibrium { p, q, value: v });
                }
            }
        }
    }
    out
}

/// Random integer loss matrices with a unique equilibrium.
pub fn unique_integer_games(seed: u64, n: usize, count: usize) -> Vec<(Vec<Vec<f64>>, ScalarEquilibrium)> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let a: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| r.gen_range(1..=9) as f64).collect())
            .collect();
        let eqs = scalar_equilibria(&a);
        if eqs.len() == 1 {
            out.push((a, eqs[0].clone()));
        }
    }
    out
}

/// Random simplex vector of length `n`.
pub fn random_simplex<R: Rng>(r: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -r.gen::<f64>().max(1e-300).ln()).collect();
    let s: f64 = raw.iter().sum();
    let mut v: Vec<f64> = raw.iter().map(|x| x / s).collect();
    let head: f64 = v[..n - 1].iter().sum();
    v[n - 1] = (1.0 - head).max(0.0);
    v
}

/// A random compact loss law from a mix of families.
pub fn random_compact<R: Rng>(r: &mut R) -> LossDistribution {
    match r.gen_range(0..4) {
        0 => truncated(LossDistribution::gumbel(r.gen_range(2.0..40.0), r.gen_range(0.5..3.0)).unwrap()),
        1 => {
            let lo = r.gen_range(0.0..10.0);
            LossDistribution::uniform(lo, lo + r.gen_range(0.5..10.0)).unwrap()
        }
        2 => {
            let mean = r.gen_range(5.0..20.0);
            let sd = r.gen_range(0.5..4.0);
            LossDistribution::truncated_normal(mean, sd, 0.0, mean + 4.0 * sd).unwrap()
        }
        _ => truncated(LossDistribution::weibull(r.gen_range(1.5..20.0), r.gen_range(1.0..15.0)).unwrap()),
    }
}
