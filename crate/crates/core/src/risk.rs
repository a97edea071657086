//! Risk figures compiled from solved games.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::copula::joint_weights;
use crate::error::{Error, Result};
use crate::game::{mixed_payoff, Game, SolveResult};
use crate::mgss::{MgssResult, MultiGame};
use crate::moments::MomentSequence;

pub const DEFAULT_QUANTILES: [f64; 2] = [0.05, 0.95];
pub const PLOT_POINTS: usize = 1024;

/// Figures for one outcome distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoalRisk {
    pub expected_loss: f64,
    pub variance: f64,
    /// `(alpha, value)` pairs, increasing in `alpha`.
    pub quantile_bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskReport {
    pub expected_loss: f64,
    pub variance: f64,
    pub quantile_bounds: Vec<(f64, f64)>,
    /// One entry per goal for multi-goal results; the top-level figures then
    /// repeat the goal with the largest expected loss.
    pub per_goal: Vec<GoalRisk>,
}

/// Outcome law at fixed strategies: the weighted mixture of compact cells.
#[derive(Debug, Clone)]
pub struct OutcomeMixture<'a> {
    game: &'a Game,
    cells: Vec<((usize, usize), f64)>,
    lo: f64,
    hi: f64,
}

impl<'a> OutcomeMixture<'a> {
    pub fn new(game: &'a Game, p: &[f64], q: &[f64]) -> Result<Self> {
        let w = joint_weights(game.copula(), p, q)?;
        let mut cells = Vec::new();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..game.rows() {
            for j in 0..game.cols() {
                let wij = w.get(i, j);
                if wij > 0.0 {
                    let s = game.compact_cell(i, j).support();
                    lo = lo.min(s.lo);
                    hi = hi.max(s.hi);
                    cells.push(((i, j), wij));
                }
            }
        }
        Ok(Self { game, cells, lo, hi })
    }

    /// Smallest interval holding all the mass.
    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let s: f64 = self
            .cells
            .iter()
            .map(|((i, j), w)| w * self.game.compact_cell(*i, *j).cdf(x))
            .sum();
        s.clamp(0.0, 1.0)
    }

    /// Left-continuous inverse `inf { x : F(x) >= alpha }` by bisection.
    pub fn quantile(&self, alpha: f64) -> f64 {
        let (mut a, mut b) = (self.lo, self.hi);
        if a == b || self.cdf(a) >= alpha {
            return a;
        }
        let tol = 1e-13 * (b - a).max(a.abs().max(b.abs()) * 1e-3);
        while b - a > tol {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if self.cdf(mid) >= alpha {
                b = mid;
            } else {
                a = mid;
            }
        }
        b
    }
}

fn goal_risk(seq: &MomentSequence, mix: &OutcomeMixture<'_>, alphas: &[f64]) -> Result<GoalRisk> {
    let mut sorted = alphas.to_vec();
    if sorted.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
        return Err(Error::Validation {
            location: "quantiles".into(),
            reason: "levels must lie in (0, 1)".into(),
        });
    }
    sorted.sort_by(f64::total_cmp);
    let mut bounds: Vec<(f64, f64)> = sorted.iter().map(|a| (*a, mix.quantile(*a))).collect();
    for k in 1..bounds.len() {
        bounds[k].1 = bounds[k].1.max(bounds[k - 1].1);
    }
    Ok(GoalRisk {
        expected_loss: seq.mean(),
        variance: seq.variance().max(0.0),
        quantile_bounds: bounds,
    })
}

/// Report for a zero-sum result, taken from the outcome at `(p*, q*)`.
pub fn compile_report(g: &Game, r: &SolveResult, alphas: &[f64]) -> Result<RiskReport> {
    let mix = OutcomeMixture::new(g, r.p_star.probs(), r.q_star.probs())?;
    single(goal_risk(&r.saddle_payoff, &mix, alphas)?)
}

/// Same as [`compile_report`] from bare strategies.
pub fn report_at(g: &Game, p: &[f64], q: &[f64], alphas: &[f64]) -> Result<RiskReport> {
    let mix = OutcomeMixture::new(g, p, q)?;
    single(goal_risk(&mixed_payoff(g, p, q)?, &mix, alphas)?)
}

fn single(one: GoalRisk) -> Result<RiskReport> {
    Ok(RiskReport {
        expected_loss: one.expected_loss,
        variance: one.variance,
        quantile_bounds: one.quantile_bounds.clone(),
        per_goal: Vec::new(),
    })
}

/// Report for a multi-goal result, one entry per goal.
pub fn compile_mgss_report(mg: &MultiGame, r: &MgssResult, alphas: &[f64]) -> Result<RiskReport> {
    let qs: Vec<&[f64]> = r.q_stars.iter().map(|q| q.probs()).collect();
    mgss_report_at(mg, r.p_star.probs(), &qs, alphas)
}

/// Same as [`compile_mgss_report`] from bare strategies.
pub fn mgss_report_at(mg: &MultiGame, p: &[f64], qs: &[&[f64]], alphas: &[f64]) -> Result<RiskReport> {
    if qs.len() != mg.len() {
        return Err(Error::ShapeMismatch(format!("{} column strategies for {} goals", qs.len(), mg.len())));
    }
    let mut per_goal = Vec::with_capacity(mg.len());
    for (i, g) in mg.goals().iter().enumerate() {
        let q = qs[i];
        let seq = mixed_payoff(g, p, q)?;
        per_goal.push(goal_risk(&seq, &OutcomeMixture::new(g, p, q)?, alphas)?);
    }
    let worst = per_goal
        .iter()
        .max_by(|a, b| a.expected_loss.total_cmp(&b.expected_loss))
        .cloned()
        .ok_or_else(|| Error::ShapeMismatch("no goals".into()))?;
    Ok(RiskReport {
        expected_loss: worst.expected_loss,
        variance: worst.variance,
        quantile_bounds: worst.quantile_bounds,
        per_goal,
    })
}

/// Plot rows `(x, density, cdf)` on [`PLOT_POINTS`] equispaced points.
///
/// The density column is the mixture mass of the bin around each point
/// divided by its width, so atoms show up as spikes and the trapezoid rule
/// over the column returns the total mass.
pub fn plot_rows(mix: &OutcomeMixture<'_>) -> Vec<(f64, f64, f64)> {
    let (lo, hi) = mix.support();
    let n = PLOT_POINTS;
    if hi <= lo {
        // a single atom: one unit-mass bin of nominal width
        let h = 1.0 / (n - 1) as f64;
        return (0..n)
            .map(|i| {
                let x = lo + (i as f64 - (n / 2) as f64) * h;
                let d = if i == n / 2 { 1.0 / h } else { 0.0 };
                (x, d, mix.cdf(x))
            })
            .collect();
    }
    let h = (hi - lo) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| if i == n - 1 { hi } else { lo + i as f64 * h }).collect();
    let edges: Vec<f64> = (0..=n)
        .map(|k| match k {
            0 => f64::NEG_INFINITY,
            k if k == n => f64::INFINITY,
            k => lo + (k as f64 - 0.5) * h,
        })
        .collect();
    let f: Vec<f64> = edges
        .iter()
        .map(|e| match *e {
            e if e == f64::NEG_INFINITY => 0.0,
            e if e == f64::INFINITY => 1.0,
            e => mix.cdf(e),
        })
        .collect();
    (0..n)
        .map(|i| {
            let width = if i == 0 || i == n - 1 { 0.5 * h } else { h };
            let mass = (f[i + 1] - f[i]).max(0.0);
            (xs[i], mass / width, mix.cdf(xs[i]))
        })
        .collect()
}

/// Decimal rendering with ten significant digits.
pub fn format_sig10(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-6..15).contains(&mag) {
        return format!("{v:.9e}");
    }
    let prec = (9 - mag).max(0) as usize;
    format!("{v:.prec$}")
}

pub fn plot_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("x,density,cdf\n");
    for (x, d, c) in rows {
        let _ = writeln!(out, "{},{},{}", format_sig10(*x), format_sig10(*d), format_sig10(*c));
    }
    out
}

/// Writes the plot CSV of the outcome at `(p*, q*)` to `path`.
pub fn emit_plot_data(g: &Game, r: &SolveResult, path: &Path) -> Result<()> {
    emit_plot_data_at(g, r.p_star.probs(), r.q_star.probs(), path)
}

pub fn emit_plot_data_at(g: &Game, p: &[f64], q: &[f64], path: &Path) -> Result<()> {
    let mix = OutcomeMixture::new(g, p, q)?;
    std::fs::write(path, plot_csv(&plot_rows(&mix))).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::Copula2;
    use crate::dist::LossDistribution;
    use crate::game::{solve_zero_sum, SolverConfig};

    fn one_by_one(d: LossDistribution) -> (Game, SolveResult) {
        let g = Game::new(vec![vec![d]], Copula2::Product).unwrap();
        let r = solve_zero_sum(&g, &SolverConfig::default()).unwrap();
        (g, r)
    }

    #[test]
    fn uniform_closed_forms() {
        let (g, r) = one_by_one(LossDistribution::uniform(1.0, 2.0).unwrap());
        let rep = compile_report(&g, &r, &DEFAULT_QUANTILES).unwrap();
        assert!((rep.expected_loss - 1.5).abs() < 1e-9);
        assert!((rep.variance - 1.0 / 12.0).abs() < 1e-9);
        assert!((rep.quantile_bounds[0].1 - 1.05).abs() < 1e-9);
        assert!((rep.quantile_bounds[1].1 - 1.95).abs() < 1e-9);
    }

    #[test]
    fn uniform_plot_is_flat() {
        let (g, r) = one_by_one(LossDistribution::uniform(1.0, 2.0).unwrap());
        let mix = OutcomeMixture::new(&g, r.p_star.probs(), r.q_star.probs()).unwrap();
        let rows = plot_rows(&mix);
        assert_eq!(rows.len(), PLOT_POINTS);
        assert!(rows.iter().all(|(_, d, _)| (d - 1.0).abs() < 1e-9));
    }

    #[test]
    fn point_mixture_quantiles_hit_atoms() {
        let payoff = [[3.0, 1.0], [2.0, 4.0]]
            .iter()
            .map(|r| r.iter().map(|x| LossDistribution::point(*x).unwrap()).collect())
            .collect();
        let g = Game::new(payoff, Copula2::Product).unwrap();
        let mix = OutcomeMixture::new(&g, &[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert!((mix.quantile(0.05) - 1.0).abs() < 1e-9);
        assert!((mix.quantile(0.3) - 2.0).abs() < 1e-9);
        assert!((mix.quantile(0.95) - 4.0).abs() < 1e-9);
        let rows = plot_rows(&mix);
        let h = rows[1].0 - rows[0].0;
        let area: f64 = rows.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * h).sum();
        assert!((area - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sig10_formatting() {
        assert_eq!(format_sig10(1.5), "1.500000000");
        assert_eq!(format_sig10(31.0063), "31.00630000");
        assert_eq!(format_sig10(0.0), "0");
        assert_eq!(format_sig10(1e-9), "1.000000000e-9");
    }

    #[test]
    fn io_errors_carry_the_path() {
        let (g, r) = one_by_one(LossDistribution::uniform(1.0, 2.0).unwrap());
        let bad = Path::new("/nonexistent-dir/out.csv");
        match emit_plot_data(&g, &r, bad) {
            Err(Error::Io { path, .. }) => assert_eq!(path, bad),
            other => panic!("{other:?}"),
        }
    }
}
