//! Brute-force reference implementations used to cross-check the fast paths.

use crate::dist::{DistKind, LossDistribution, TruncationPolicy};
use crate::error::{Error, Result};
use crate::game::{mixed_payoff, simplex_grid, Game};
use crate::moments::{log_sum_exp, MomentSequence};
use crate::ordering::{compare_sequences, DecidedBy, OrderingConfig, PreferenceOutcome, Relation};

pub const ORACLE_K_MAX: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Grid step for both simplices; `None` picks 0.01 for two actions and
    /// 0.02 for three.
    pub simplex_resolution: Option<f64>,
    /// Simpson intervals per density.
    pub moment_resolution: usize,
    pub k_max: usize,
    /// Horizon for the extrapolated sign-change test.
    pub horizon: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            simplex_resolution: None,
            moment_resolution: 65536,
            k_max: ORACLE_K_MAX,
            horizon: 256,
        }
    }
}

impl OracleConfig {
    pub fn resolution_for(&self, actions: usize) -> f64 {
        self.simplex_resolution
            .unwrap_or(if actions <= 2 { 0.01 } else { 0.02 })
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.simplex_resolution {
            let steps = 1.0 / r;
            if !(r > 0.0 && r <= 1.0) || (steps - steps.round()).abs() > 1e-12 * steps.max(1.0) {
                return Err(Error::Validation {
                    location: "oracle.simplex_resolution".into(),
                    reason: format!("{r} does not divide 1"),
                });
            }
        }
        if self.moment_resolution < 2 || !self.moment_resolution.is_multiple_of(2) {
            return Err(Error::Validation {
                location: "oracle.moment_resolution".into(),
                reason: "needs an even number of intervals".into(),
            });
        }
        Ok(())
    }
}

/// `ln E[(X + offset)^k]` for `k = 1..=k_max` by composite Simpson sums in
/// log space, or exact sums for atoms.
pub fn oracle_log_moments(d: &LossDistribution, offset: f64, cfg: &OracleConfig) -> Vec<f64> {
    let k_max = cfg.k_max;
    let from_atoms = |pts: &[f64], ms: &[f64]| -> Vec<f64> {
        (1..=k_max)
            .map(|k| {
                log_sum_exp(
                    pts.iter()
                        .zip(ms)
                        .filter(|(_, m)| **m > 0.0)
                        .map(|(x, m)| m.ln() + k as f64 * (x + offset).ln()),
                )
            })
            .collect()
    };
    match d.kind() {
        DistKind::PointMass(a) => return from_atoms(&[*a], &[1.0]),
        DistKind::DiscretePmf { points, masses } => return from_atoms(points, masses),
        _ => {}
    }
    let s = d.support();
    let n = cfg.moment_resolution;
    let h = (s.hi - s.lo) / n as f64;
    let mut lw = Vec::with_capacity(n + 1);
    let mut ly = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let x = if i == n { s.hi } else { s.lo + i as f64 * h };
        let c: f64 = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let y = x + offset;
        let lf = d.ln_density(x).unwrap_or(f64::NEG_INFINITY);
        if y > 0.0 && lf > f64::NEG_INFINITY {
            lw.push((c * h / 3.0).ln() + lf);
            ly.push(y.ln());
        }
    }
    let l0 = log_sum_exp(lw.iter().copied());
    (1..=k_max)
        .map(|k| log_sum_exp(lw.iter().zip(&ly).map(|(w, y)| w + k as f64 * y)) - l0)
        .collect()
}

/// Decides by the raw sign pattern of high-resolution log-moment
/// differences up to `k_max`, with no shortcuts.
///
/// A trailing run of one sign (zeros allowed) covering the last quarter
/// decides, unless its magnitudes are shrinking fast enough to change sign
/// before `horizon`.
pub fn oracle_compare(d1: &LossDistribution, d2: &LossDistribution, cfg: &OracleConfig) -> PreferenceOutcome {
    let policy = TruncationPolicy::default();
    let c1 = match d1.truncate(&policy) {
        Ok(t) => t,
        Err(_) => d1.clone(),
    };
    let c2 = match d2.truncate(&policy) {
        Ok(t) => t,
        Err(_) => d2.clone(),
    };
    let offset = (-c1.ess_inf()).max(-c2.ess_inf()).max(0.0);
    let m1 = oracle_log_moments(&c1, offset, cfg);
    let m2 = oracle_log_moments(&c2, offset, cfg);
    let k_max = cfg.k_max;
    let diffs: Vec<f64> = m1.iter().zip(&m2).map(|(a, b)| a - b).collect();
    let signs: Vec<i8> = m1
        .iter()
        .zip(&m2)
        .map(|(a, b)| {
            let tol = 1e-9 * a.abs().max(b.abs()).max(1.0);
            if a == b || (a - b).abs() <= tol {
                0
            } else if a > b {
                1
            } else {
                -1
            }
        })
        .collect();
    let need = k_max.div_ceil(4);
    let zeros = signs.iter().rev().take_while(|s| **s == 0).count();
    if zeros >= need {
        return PreferenceOutcome {
            relation: Relation::Equivalent,
            strict: false,
            decided_by: Some(DecidedBy::MomentDominance(k_max - zeros + 1)),
            witness_k: Some(k_max - zeros + 1),
        };
    }
    let sigma = signs[k_max - 1 - zeros];
    let run = signs.iter().rev().take_while(|s| **s == 0 || **s == sigma).count();
    if run < need {
        return PreferenceOutcome::undecided();
    }
    // linear extrapolation of the last eight differences
    let tail = &diffs[k_max - 8..];
    let slope = (tail[7] - tail[0]) / 7.0;
    let last = tail[7];
    if last * slope < 0.0 {
        let cross = k_max as f64 + last.abs() / slope.abs();
        if cross <= cfg.horizon as f64 {
            return PreferenceOutcome::undecided();
        }
    }
    let start = k_max - run + 1;
    PreferenceOutcome {
        relation: if sigma > 0 {
            Relation::SecondPreferred
        } else {
            Relation::FirstPreferred
        },
        strict: signs[start - 1..].iter().all(|s| *s != 0),
        decided_by: Some(DecidedBy::MomentDominance(start)),
        witness_k: Some(start),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleEquilibrium {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// The row player's guaranteed outcome at `p`.
    pub value: MomentSequence,
}

enum Val {
    Scalar(f64),
    Seq(MomentSequence),
}

fn less(a: &Val, b: &Val, cfg: &OrderingConfig) -> Result<bool> {
    match (a, b) {
        (Val::Scalar(x), Val::Scalar(y)) => Ok(*x < *y - 1e-12 * x.abs().max(y.abs()).max(1.0)),
        (Val::Seq(x), Val::Seq(y)) => Ok(compare_sequences(x, y, cfg)?.relation == Relation::FirstPreferred),
        _ => unreachable!("mixed value kinds"),
    }
}

/// Exhaustive minimax over simplex grids for games with at most three
/// actions per side.
pub fn oracle_equilibrium(g: &Game, cfg: &OracleConfig) -> Result<OracleEquilibrium> {
    let (n, m) = (g.rows(), g.cols());
    if n > 3 || m > 3 {
        return Err(Error::TooLarge { rows: n, cols: m });
    }
    cfg.validate()?;
    let ord = OrderingConfig::with_k_max(g.k_max());
    let value_at = |p: &[f64], q: &[f64]| -> Result<Val> {
        Ok(match g.scalar_payoff(p, q) {
            Some(v) => Val::Scalar(v),
            None => Val::Seq(mixed_payoff(g, p, q)?),
        })
    };
    let pure = |k: usize, i: usize| -> Vec<f64> {
        let mut e = vec![0.0; k];
        e[i] = 1.0;
        e
    };

    let mut best: Option<(Vec<f64>, Val)> = None;
    for p in simplex_grid(n, cfg.resolution_for(n)) {
        let mut worst = value_at(&p, &pure(m, 0))?;
        for j in 1..m {
            let v = value_at(&p, &pure(m, j))?;
            if less(&worst, &v, &ord)? {
                worst = v;
            }
        }
        let better = match &best {
            None => true,
            Some((_, b)) => less(&worst, b, &ord)?,
        };
        if better {
            best = Some((p, worst));
        }
    }
    let mut best_q: Option<(Vec<f64>, Val)> = None;
    for q in simplex_grid(m, cfg.resolution_for(m)) {
        let mut least = value_at(&pure(n, 0), &q)?;
        for i in 1..n {
            let v = value_at(&pure(n, i), &q)?;
            if less(&v, &least, &ord)? {
                least = v;
            }
        }
        let better = match &best_q {
            None => true,
            Some((_, b)) => less(b, &least, &ord)?,
        };
        if better {
            best_q = Some((q, least));
        }
    }
    let (p, v) = best.expect("non-empty grid");
    let (q, _) = best_q.expect("non-empty grid");
    let value = match v {
        Val::Scalar(x) => MomentSequence::point_mass(x, g.k_max(), g.offset()),
        Val::Seq(s) => s,
    };
    Ok(OracleEquilibrium { p, q, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::Copula2;
    use crate::moments::moment_sequence_at;

    fn points(a: &[&[f64]]) -> Game {
        let payoff = a
            .iter()
            .map(|r| r.iter().map(|x| LossDistribution::point(*x).unwrap()).collect())
            .collect();
        Game::new(payoff, Copula2::Product).unwrap()
    }

    #[test]
    fn simpson_moments_match_adaptive_quadrature() {
        let d = LossDistribution::gumbel(31.0063, 1.74346)
            .unwrap()
            .truncate(&TruncationPolicy::default())
            .unwrap();
        let off = -d.ess_inf();
        let cfg = OracleConfig::default();
        let a = oracle_log_moments(&d, off, &cfg);
        let b = moment_sequence_at(&d, 64, off).unwrap();
        for k in 1..=64 {
            assert!((a[k - 1] - b.log_moment(k)).abs() < 1e-8 * b.log_moment(k).abs().max(1.0), "k={k}");
        }
    }

    #[test]
    fn self_comparison_is_equivalent() {
        let d = LossDistribution::gumbel(6.27294, 2.20532).unwrap();
        let out = oracle_compare(&d, &d, &OracleConfig::default());
        assert_eq!(out.relation, Relation::Equivalent);
    }

    #[test]
    fn shifted_gumbel_is_worse() {
        let a = LossDistribution::gumbel(31.0063, 1.74346).unwrap();
        let b = LossDistribution::gumbel(32.0063, 1.74346).unwrap();
        let out = oracle_compare(&a, &b, &OracleConfig::default());
        assert_eq!(out.relation, Relation::FirstPreferred);
        assert!(out.strict);
    }

    #[test]
    fn scalar_game_value() {
        let g = points(&[&[3.0, 1.0], &[2.0, 4.0]]);
        let eq = oracle_equilibrium(&g, &OracleConfig::default()).unwrap();
        assert!((eq.value.mean() - 2.5).abs() < 0.01);
        assert!((eq.p[0] - 0.5).abs() < 0.011);
        assert!((eq.q[0] - 0.75).abs() < 0.011);
    }

    #[test]
    fn dominant_row() {
        let g = points(&[&[1.0, 1.0], &[5.0, 5.0]]);
        let eq = oracle_equilibrium(&g, &OracleConfig::default()).unwrap();
        assert_eq!(eq.p, vec![1.0, 0.0]);
    }

    #[test]
    fn size_limit() {
        let g = points(&[&[1.0, 2.0, 3.0, 4.0]]);
        assert!(matches!(
            oracle_equilibrium(&g, &OracleConfig::default()),
            Err(Error::TooLarge { rows: 1, cols: 4 })
        ));
    }

    #[test]
    fn resolution_must_divide_one() {
        let cfg = OracleConfig {
            simplex_resolution: Some(0.03),
            ..OracleConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
