//! Log-domain moment sequences.
//!
//! A sequence describes `Y = X + offset` for a nonnegative shift chosen so
//! that `Y >= 0`; sequences that are compared or mixed must share the shift.

use crate::dist::{DistKind, LossDistribution};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureConfig};

pub const DEFAULT_K_MAX: usize = 64;

/// Environment variable overriding the default horizon.
pub const K_MAX_ENV: &str = "STOCHORDER_KMAX";

/// `DEFAULT_K_MAX`, or the value of `STOCHORDER_KMAX` if set and valid.
pub fn k_max_from_env() -> usize {
    std::env::var(K_MAX_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|k| *k >= 1)
        .unwrap_or(DEFAULT_K_MAX)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    log_moments: Vec<f64>,
    offset: f64,
    scale_b: f64,
}

impl MomentSequence {
    /// `log_moments[k - 1] = ln E[Y^k]`; `scale_b` is the essential supremum of `Y`.
    pub fn new(log_moments: Vec<f64>, offset: f64, scale_b: f64) -> Result<Self> {
        if log_moments.is_empty() {
            return Err(Error::InvalidDistribution("empty moment sequence".into()));
        }
        if log_moments.iter().any(|l| l.is_nan() || *l == f64::INFINITY) {
            return Err(Error::InvalidDistribution("moment sequence is not finite".into()));
        }
        Ok(Self {
            log_moments,
            offset,
            scale_b,
        })
    }

    /// Sequence of the constant `a` under shift `offset`.
    pub fn point_mass(a: f64, k_max: usize, offset: f64) -> Self {
        let la = (a + offset).ln();
        Self {
            log_moments: (1..=k_max).map(|k| k as f64 * la).collect(),
            offset,
            scale_b: a + offset,
        }
    }

    pub fn k_max(&self) -> usize {
        self.log_moments.len()
    }

    pub fn log_moments(&self) -> &[f64] {
        &self.log_moments
    }

    /// `ln E[Y^k]` for 1-based `k`.
    pub fn log_moment(&self, k: usize) -> f64 {
        self.log_moments[k - 1]
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn scale_b(&self) -> f64 {
        self.scale_b
    }

    /// `ln E[Y^k] - k ln s`, finite-precision friendly for large `k`.
    pub fn normalized(&self, k: usize, s: f64) -> f64 {
        self.log_moment(k) - k as f64 * s.ln()
    }

    /// First `n` moments of the shifted variable `Y`.
    pub fn shifted_moments(&self, n: usize) -> Vec<f64> {
        self.log_moments.iter().take(n).map(|l| l.exp()).collect()
    }

    /// First `n` raw moments `E[X^k]` of the unshifted variable.
    pub fn raw_moments(&self, n: usize) -> Vec<f64> {
        let n = n.min(self.k_max());
        let y: Vec<f64> = std::iter::once(1.0)
            .chain(self.shifted_moments(n))
            .collect();
        let c = -self.offset;
        (1..=n)
            .map(|k| {
                let mut binom = 1.0;
                let mut acc = 0.0;
                for (j, yj) in y.iter().enumerate().take(k + 1) {
                    acc += binom * yj * c.powi((k - j) as i32);
                    binom = binom * (k - j) as f64 / (j + 1) as f64;
                }
                acc
            })
            .collect()
    }

    pub fn mean(&self) -> f64 {
        self.log_moment(1).exp() - self.offset
    }

    /// Shift-invariant variance `E[Y^2] - E[Y]^2`.
    pub fn variance(&self) -> f64 {
        if self.k_max() < 2 {
            return 0.0;
        }
        let m1 = self.log_moment(1).exp();
        let m2 = self.log_moment(2).exp();
        m2 - m1 * m1
    }

    /// Scales every raw moment `E[Y^k]` by `factor^k`.
    pub fn scaled(&self, factor: f64) -> Self {
        let lf = factor.ln();
        Self {
            log_moments: self
                .log_moments
                .iter()
                .enumerate()
                .map(|(i, l)| l + (i + 1) as f64 * lf)
                .collect(),
            offset: self.offset,
            scale_b: self.scale_b * factor,
        }
    }
}

/// Shift that makes the law nonnegative.
pub fn natural_offset(d: &LossDistribution) -> f64 {
    (-d.ess_inf()).max(0.0)
}

pub fn moment_sequence(d: &LossDistribution, k_max: usize) -> Result<MomentSequence> {
    moment_sequence_at(d, k_max, natural_offset(d))
}

/// Moment sequence of `d + offset`.
pub fn moment_sequence_at(d: &LossDistribution, k_max: usize, offset: f64) -> Result<MomentSequence> {
    moment_sequence_with(d, k_max, offset, QuadratureConfig::default())
}

pub fn moment_sequence_with(
    d: &LossDistribution,
    k_max: usize,
    offset: f64,
    cfg: QuadratureConfig,
) -> Result<MomentSequence> {
    if k_max == 0 {
        return Err(Error::InvalidDistribution("K_max must be at least 1".into()));
    }
    if !d.is_compact() {
        return Err(Error::UnboundedSupport);
    }
    let lo = d.ess_inf() + offset;
    if lo < -1e-12 * offset.abs().max(1.0) {
        return Err(Error::InvalidDistribution(format!(
            "offset {offset} leaves mass below zero"
        )));
    }
    let scale_b = d.ess_sup() + offset;
    let log_moments = match d.kind() {
        DistKind::PointMass(a) => {
            return Ok(MomentSequence::point_mass(*a, k_max, offset));
        }
        DistKind::DiscretePmf { points, masses } => {
            let ln_terms: Vec<(f64, f64)> = points
                .iter()
                .zip(masses)
                .filter(|(_, m)| **m > 0.0)
                .map(|(p, m)| ((p + offset).max(0.0).ln(), m.ln()))
                .collect();
            (1..=k_max)
                .map(|k| log_sum_exp(ln_terms.iter().map(|(ly, lm)| lm + k as f64 * ly)))
                .collect()
        }
        DistKind::Parametric(_) | DistKind::GridDensity { .. } => {
            continuous_log_moments(d, k_max, offset, scale_b, cfg)
        }
    };
    MomentSequence::new(log_moments, offset, scale_b)
}

fn continuous_log_moments(
    d: &LossDistribution,
    k_max: usize,
    offset: f64,
    scale_b: f64,
    cfg: QuadratureConfig,
) -> Vec<f64> {
    let s = d.support();
    let breaks: Vec<f64> = match d.kind() {
        DistKind::GridDensity { densities, .. } => {
            let n = densities.len() - 1;
            (0..=n).map(|i| s.lo + s.width() * i as f64 / n as f64).collect()
        }
        _ => {
            let n = 64;
            (0..=n).map(|i| s.lo + s.width() * i as f64 / n as f64).collect()
        }
    };
    let ln_s = scale_b.ln();
    // component 0 is the total mass, used to cancel normalization error
    let res = integrate(
        |x, out| {
            let lf = d.ln_density(x).unwrap_or(f64::NEG_INFINITY);
            let y = x + offset;
            if lf == f64::NEG_INFINITY || y <= 0.0 {
                out.fill(0.0);
                out[0] = lf.exp();
                return;
            }
            let ly = y.ln() - ln_s;
            for (k, o) in out.iter_mut().enumerate() {
                *o = (k as f64 * ly + lf).exp();
            }
        },
        &breaks,
        k_max + 1,
        cfg,
    );
    let ln_mass = res.values[0].ln();
    (1..=k_max)
        .map(|k| res.values[k].ln() - ln_mass + k as f64 * ln_s)
        .collect()
}

/// Stable `ln sum exp(x_i)`; `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Mixture `sum_c w_c * cell_c` in moment space.
pub fn mix_moments(cells: &[&MomentSequence], weights: &[f64]) -> Result<MomentSequence> {
    if cells.is_empty() || cells.len() != weights.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} cells but {} weights",
            cells.len(),
            weights.len()
        )));
    }
    let k_max = cells[0].k_max();
    let offset = cells[0].offset;
    for c in cells {
        if c.k_max() != k_max {
            return Err(Error::ShapeMismatch(format!(
                "cells carry {} and {} moments",
                k_max,
                c.k_max()
            )));
        }
        if (c.offset - offset).abs() > 1e-12 * offset.abs().max(1.0) {
            return Err(Error::ShapeMismatch("cells use different moment shifts".into()));
        }
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::NotASimplex("mixture weights must be nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::NotASimplex(format!("mixture weights sum to {total}")));
    }
    let active: Vec<(f64, &MomentSequence)> = weights
        .iter()
        .zip(cells)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, c)| (w.ln(), *c))
        .collect();
    let log_moments = (0..k_max)
        .map(|k| log_sum_exp(active.iter().map(|(lw, c)| lw + c.log_moments[k])))
        .collect();
    let scale_b = active
        .iter()
        .map(|(_, c)| c.scale_b)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(MomentSequence {
        log_moments,
        offset,
        scale_b,
    })
}

/// First `n` raw moments `E[X^k]` by direct signed quadrature (exact sums
/// for discrete kinds).
pub fn raw_moments(d: &LossDistribution, n: usize) -> Result<Vec<f64>> {
    if !d.is_compact() {
        return Err(Error::UnboundedSupport);
    }
    match d.kind() {
        DistKind::PointMass(a) => Ok((1..=n).map(|k| a.powi(k as i32)).collect()),
        DistKind::DiscretePmf { points, masses } => Ok((1..=n)
            .map(|k| {
                points
                    .iter()
                    .zip(masses)
                    .map(|(p, m)| m * p.powi(k as i32))
                    .sum()
            })
            .collect()),
        _ => {
            let s = d.support();
            let pieces = 64;
            let breaks: Vec<f64> = (0..=pieces)
                .map(|i| s.lo + s.width() * i as f64 / pieces as f64)
                .collect();
            let cfg = QuadratureConfig {
                rel_tol: 1e-12,
                ..QuadratureConfig::default()
            };
            let res = integrate(
                |x, out| {
                    let f = d.density(x).unwrap_or(0.0);
                    let mut xp = 1.0;
                    for o in out.iter_mut() {
                        *o = xp * f;
                        xp *= x;
                    }
                },
                &breaks,
                n + 1,
                cfg,
            );
            let mass = res.values[0];
            Ok(res.values[1..].iter().map(|v| v / mass).collect())
        }
    }
}
