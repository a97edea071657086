//! Loss distributions: parametric families, discrete pmfs, grid densities and
//! point masses, together with density/CDF/quantile evaluation and truncation.

use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};

/// Default number of nodes for densities sampled onto a grid.
pub const DEFAULT_GRID_RESOLUTION: usize = 4096;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Closed interval `[lo, hi]`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub lo: f64,
    pub hi: f64,
}

impl Support {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(Error::InvalidDistribution(format!(
                "support [{lo}, {hi}] is not an interval"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn is_compact(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

/// Which integers carry mass in a [`Family::PoissonLike`] law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

/// Parametric families. Scale-type parameters must be positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// Minimum-type Gumbel with density `exp(z - e^z) / scale`, `z = (x - location) / scale`.
    Gumbel { location: f64, scale: f64 },
    Gamma { shape: f64, scale: f64 },
    Weibull { shape: f64, scale: f64 },
    /// Frechet (inverse Weibull), heavy right tail.
    Frechet { shape: f64, scale: f64 },
    Normal { mean: f64, sd: f64 },
    Uniform { lo: f64, hi: f64 },
    /// Poisson(lambda) mass `P(j)` placed on `2j` (even) or `2j + 1` (odd).
    PoissonLike { lambda: f64, parity: Parity },
}

impl Family {
    fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidDistribution(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        let fin = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidDistribution(format!("{name} must be finite, got {v}")))
            }
        };
        match *self {
            Family::Gumbel { location, scale } => {
                fin("location", location)?;
                pos("scale", scale)
            }
            Family::Gamma { shape, scale }
            | Family::Weibull { shape, scale }
            | Family::Frechet { shape, scale } => {
                pos("shape", shape)?;
                pos("scale", scale)
            }
            Family::Normal { mean, sd } => {
                fin("mean", mean)?;
                pos("sd", sd)
            }
            Family::Uniform { lo, hi } => {
                fin("lo", lo)?;
                fin("hi", hi)?;
                if lo < hi {
                    Ok(())
                } else {
                    Err(Error::InvalidDistribution(format!(
                        "uniform needs lo < hi, got [{lo}, {hi}]"
                    )))
                }
            }
            Family::PoissonLike { lambda, .. } => pos("lambda", lambda),
        }
    }

    /// Support of the untruncated law.
    pub fn natural_support(&self) -> Support {
        match *self {
            Family::Gumbel { .. } | Family::Normal { .. } => Support {
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
            },
            Family::Gamma { .. } | Family::Weibull { .. } | Family::Frechet { .. } => Support {
                lo: 0.0,
                hi: f64::INFINITY,
            },
            Family::Uniform { lo, hi } => Support { lo, hi },
            Family::PoissonLike { parity, .. } => Support {
                lo: parity_shift(parity),
                hi: f64::INFINITY,
            },
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Family::PoissonLike { .. })
    }

    /// Log density (log mass for the discrete family) of the untruncated law.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        match *self {
            Family::Gumbel { location, scale } => {
                let z = (x - location) / scale;
                z - z.exp() - scale.ln()
            }
            Family::Gamma { shape, scale } => {
                if x < 0.0 {
                    return f64::NEG_INFINITY;
                }
                if x == 0.0 {
                    return match shape.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Less) => f64::INFINITY,
                        Some(std::cmp::Ordering::Equal) => -scale.ln(),
                        _ => f64::NEG_INFINITY,
                    };
                }
                -shape * scale.ln() + (shape - 1.0) * x.ln() - x / scale - ln_gamma(shape)
            }
            Family::Weibull { shape, scale } => {
                if x < 0.0 {
                    return f64::NEG_INFINITY;
                }
                let t = x / scale;
                if t == 0.0 {
                    return match shape.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Less) => f64::INFINITY,
                        Some(std::cmp::Ordering::Equal) => -scale.ln(),
                        _ => f64::NEG_INFINITY,
                    };
                }
                (shape / scale).ln() + (shape - 1.0) * t.ln() - t.powf(shape)
            }
            Family::Frechet { shape, scale } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let t = x / scale;
                (shape / scale).ln() - (1.0 + shape) * t.ln() - t.powf(-shape)
            }
            Family::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                -0.5 * z * z - (sd * (2.0 * std::f64::consts::PI).sqrt()).ln()
            }
            Family::Uniform { lo, hi } => {
                if x < lo || x > hi {
                    f64::NEG_INFINITY
                } else {
                    -(hi - lo).ln()
                }
            }
            Family::PoissonLike { lambda, parity } => match poisson_index(x, parity) {
                Some(j) => j * lambda.ln() - lambda - ln_gamma(j + 1.0),
                None => f64::NEG_INFINITY,
            },
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Family::Gumbel { location, scale } => {
                let z = (x - location) / scale;
                -(-z.exp()).exp_m1()
            }
            Family::Gamma { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else if x == f64::INFINITY {
                    1.0
                } else {
                    gamma_lr(shape, x / scale)
                }
            }
            Family::Weibull { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-(x / scale).powf(shape)).exp_m1()
                }
            }
            Family::Frechet { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    (-(x / scale).powf(-shape)).exp()
                }
            }
            Family::Normal { mean, sd } => 0.5 * erfc(-(x - mean) / (sd * SQRT_2)),
            Family::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Family::PoissonLike { lambda, parity } => match poisson_floor(x, parity) {
                None => 0.0,
                Some(j) if j == f64::INFINITY => 1.0,
                // P(N <= j) = Q(j + 1, lambda)
                Some(j) => gamma_ur(j + 1.0, lambda),
            },
        }
    }

    /// Survival function `P(X > x)`, accurate deep in the right tail.
    pub fn sf(&self, x: f64) -> f64 {
        match *self {
            Family::Gumbel { location, scale } => {
                let z = (x - location) / scale;
                (-z.exp()).exp()
            }
            Family::Gamma { shape, scale } => {
                if x <= 0.0 {
                    1.0
                } else if x == f64::INFINITY {
                    0.0
                } else {
                    gamma_ur(shape, x / scale)
                }
            }
            Family::Weibull { shape, scale } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-(x / scale).powf(shape)).exp()
                }
            }
            Family::Frechet { shape, scale } => {
                if x <= 0.0 {
                    1.0
                } else {
                    -(-(x / scale).powf(-shape)).exp_m1()
                }
            }
            Family::Normal { mean, sd } => 0.5 * erfc((x - mean) / (sd * SQRT_2)),
            Family::Uniform { lo, hi } => ((hi - x) / (hi - lo)).clamp(0.0, 1.0),
            Family::PoissonLike { lambda, parity } => match poisson_floor(x, parity) {
                None => 1.0,
                Some(j) if j == f64::INFINITY => 0.0,
                Some(j) => gamma_lr(j + 1.0, lambda),
            },
        }
    }

    /// Closed-form quantile where one exists.
    fn quantile_closed(&self, p: f64) -> Option<f64> {
        match *self {
            Family::Gumbel { location, scale } => {
                Some(location + scale * (-(-p).ln_1p()).ln())
            }
            Family::Weibull { shape, scale } => Some(scale * (-(-p).ln_1p()).powf(1.0 / shape)),
            Family::Frechet { shape, scale } => Some(scale * (-p.ln()).powf(-1.0 / shape)),
            Family::Uniform { lo, hi } => Some(lo + p * (hi - lo)),
            _ => None,
        }
    }

    /// Closed-form inverse survival function where one exists.
    fn isf_closed(&self, s: f64) -> Option<f64> {
        match *self {
            Family::Gumbel { location, scale } => Some(location + scale * (-s.ln()).ln()),
            Family::Weibull { shape, scale } => Some(scale * (-s.ln()).powf(1.0 / shape)),
            Family::Frechet { shape, scale } => {
                Some(scale * (-(-s).ln_1p()).powf(-1.0 / shape))
            }
            Family::Uniform { lo, hi } => Some(hi - s * (hi - lo)),
            _ => None,
        }
    }
}

fn parity_shift(parity: Parity) -> f64 {
    match parity {
        Parity::Even => 0.0,
        Parity::Odd => 1.0,
    }
}

/// Poisson index `j` such that `x` is the `j`-th mass point.
fn poisson_index(x: f64, parity: Parity) -> Option<f64> {
    let t = x - parity_shift(parity);
    if t < 0.0 || t.fract() != 0.0 || (t / 2.0).fract() != 0.0 {
        return None;
    }
    Some(t / 2.0)
}

/// Largest Poisson index whose mass point lies at or below `x`.
fn poisson_floor(x: f64, parity: Parity) -> Option<f64> {
    let t = x - parity_shift(parity);
    if t < 0.0 {
        None
    } else {
        Some((t / 2.0).floor())
    }
}

/// Numeric representation of a loss distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum DistKind {
    /// A parametric family, possibly restricted to a sub-interval of its
    /// natural support and renormalized there.
    Parametric(Family),
    DiscretePmf { points: Vec<f64>, masses: Vec<f64> },
    /// Piecewise-linear density through equally spaced nodes.
    GridDensity { lo: f64, hi: f64, densities: Vec<f64> },
    PointMass(f64),
}

/// A loss model with declared support. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct LossDistribution {
    kind: DistKind,
    support: Support,
    // Parametric restriction: F(lo), S(hi), and the retained mass.
    f_lo: f64,
    s_hi: f64,
    mass: f64,
    // Cumulative mass at pmf points or grid nodes.
    cum: Vec<f64>,
}

impl LossDistribution {
    /// A family on its natural support.
    pub fn parametric(family: Family) -> Result<Self> {
        family.validate()?;
        let s = family.natural_support();
        Self::parametric_on(family, s.lo, s.hi)
    }

    /// A family restricted to `[lo, hi]` and renormalized.
    pub fn parametric_on(family: Family, lo: f64, hi: f64) -> Result<Self> {
        family.validate()?;
        let nat = family.natural_support();
        let lo = lo.max(nat.lo);
        let hi = hi.min(nat.hi);
        let support = Support::new(lo, hi)?;
        if lo == hi && !family.is_discrete() {
            return Err(Error::InvalidDistribution(format!(
                "degenerate support [{lo}, {hi}] for a continuous family"
            )));
        }
        let f_lo = if lo == nat.lo {
            0.0
        } else if family.is_discrete() {
            // mass strictly below lo
            family.cdf(lo) - family.pdf(lo)
        } else {
            family.cdf(lo)
        };
        let s_hi = if hi == nat.hi { 0.0 } else { family.sf(hi) };
        let s_lo = if family.is_discrete() {
            1.0 - f_lo
        } else if lo == nat.lo {
            1.0
        } else {
            family.sf(lo)
        };
        let f_hi = if hi == nat.hi { 1.0 } else { family.cdf(hi) };
        // take whichever difference is better conditioned
        let mass = if f_lo > 0.5 { s_lo - s_hi } else { f_hi - f_lo };
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "interval [{lo}, {hi}] carries no probability mass"
            )));
        }
        Ok(Self {
            kind: DistKind::Parametric(family),
            support,
            f_lo,
            s_hi,
            mass,
            cum: Vec::new(),
        })
    }

    pub fn gumbel(location: f64, scale: f64) -> Result<Self> {
        Self::parametric(Family::Gumbel { location, scale })
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        Self::parametric(Family::Gamma { shape, scale })
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        Self::parametric(Family::Weibull { shape, scale })
    }

    pub fn frechet(shape: f64, scale: f64) -> Result<Self> {
        Self::parametric(Family::Frechet { shape, scale })
    }

    pub fn truncated_normal(mean: f64, sd: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::parametric_on(Family::Normal { mean, sd }, lo, hi)
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::parametric(Family::Uniform { lo, hi })
    }

    pub fn poisson_like(lambda: f64, parity: Parity) -> Result<Self> {
        Self::parametric(Family::PoissonLike { lambda, parity })
    }

    /// Finite pmf; points strictly increasing, masses summing to one.
    pub fn pmf(points: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != masses.len() {
            return Err(Error::InvalidDistribution(format!(
                "pmf needs equally many points and masses (got {} and {})",
                points.len(),
                masses.len()
            )));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidDistribution("pmf points must be finite".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDistribution(
                "pmf points must be strictly increasing".into(),
            ));
        }
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::InvalidDistribution("pmf masses must be nonnegative".into()));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!(
                "pmf masses sum to {total}, not 1"
            )));
        }
        let mut acc = 0.0;
        let cum = masses
            .iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect();
        let support = Support::new(points[0], points[points.len() - 1])?;
        Ok(Self {
            kind: DistKind::DiscretePmf { points, masses },
            support,
            f_lo: 0.0,
            s_hi: 0.0,
            mass: 1.0,
            cum,
        })
    }

    /// Pmf from unnormalized nonnegative weights.
    pub fn pmf_normalized(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidDistribution("pmf weights carry no mass".into()));
        }
        let mut masses: Vec<f64> = weights.iter().map(|w| w / total).collect();
        // absorb the rounding residue into the largest mass
        let resid = 1.0 - masses.iter().sum::<f64>();
        if let Some(big) = masses
            .iter_mut()
            .max_by(|a, b| a.total_cmp(b))
        {
            *big += resid;
        }
        Self::pmf(points, masses)
    }

    /// Grid density on `[lo, hi]` through `densities.len()` equally spaced
    /// nodes, renormalized to unit trapezoid integral.
    pub fn grid(lo: f64, hi: f64, densities: Vec<f64>) -> Result<Self> {
        if densities.len() < 2 {
            return Err(Error::InvalidDistribution(
                "grid density needs at least two nodes".into(),
            ));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidDistribution(format!(
                "grid range [{lo}, {hi}] is not a finite interval"
            )));
        }
        if densities.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::InvalidDistribution(
                "grid densities must be finite and nonnegative".into(),
            ));
        }
        let h = (hi - lo) / (densities.len() - 1) as f64;
        let integral: f64 = densities.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).sum();
        if !(integral > 0.0) {
            return Err(Error::InvalidDistribution("grid density integrates to zero".into()));
        }
        let densities: Vec<f64> = if (integral - 1.0).abs() <= 4.0 * f64::EPSILON {
            densities
        } else {
            densities.iter().map(|d| d / integral).collect()
        };
        let mut cum = Vec::with_capacity(densities.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for w in densities.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            cum.push(acc);
        }
        Ok(Self {
            kind: DistKind::GridDensity { lo, hi, densities },
            support: Support { lo, hi },
            f_lo: 0.0,
            s_hi: 0.0,
            mass: 1.0,
            cum,
        })
    }

    /// Samples `f` at `n` equally spaced nodes of `[lo, hi]`.
    pub fn grid_from_fn<F: Fn(f64) -> f64>(lo: f64, hi: f64, n: usize, f: F) -> Result<Self> {
        let n = n.max(2);
        let h = (hi - lo) / (n - 1) as f64;
        Self::grid(lo, hi, (0..n).map(|i| f(lo + h * i as f64)).collect())
    }

    pub fn point(a: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "point mass location must be finite, got {a}"
            )));
        }
        Ok(Self {
            kind: DistKind::PointMass(a),
            support: Support { lo: a, hi: a },
            f_lo: 0.0,
            s_hi: 0.0,
            mass: 1.0,
            cum: Vec::new(),
        })
    }

    pub fn kind(&self) -> &DistKind {
        &self.kind
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn family(&self) -> Option<Family> {
        match self.kind {
            DistKind::Parametric(f) => Some(f),
            _ => None,
        }
    }

    pub fn is_compact(&self) -> bool {
        self.support.is_compact()
    }

    pub fn is_point_mass(&self) -> bool {
        matches!(self.kind, DistKind::PointMass(_))
    }

    /// True for laws concentrated on countably many atoms (pmfs, point
    /// masses and the Poisson-like family).
    pub fn is_discrete(&self) -> bool {
        match &self.kind {
            DistKind::Parametric(f) => f.is_discrete(),
            DistKind::DiscretePmf { .. } | DistKind::PointMass(_) => true,
            DistKind::GridDensity { .. } => false,
        }
    }

    /// Whether the parametric restriction touches the natural support's ends.
    pub fn is_restricted(&self) -> bool {
        match self.kind {
            DistKind::Parametric(f) => f.natural_support() != self.support,
            _ => false,
        }
    }

    /// Largest x with mass in every neighbourhood.
    pub fn ess_sup(&self) -> f64 {
        match &self.kind {
            DistKind::DiscretePmf { points, masses } => points
                .iter()
                .zip(masses)
                .rev()
                .find(|(_, m)| **m > 0.0)
                .map(|(p, _)| *p)
                .unwrap_or(self.support.hi),
            DistKind::GridDensity { lo, hi, densities } => {
                let h = (hi - lo) / (densities.len() - 1) as f64;
                match densities.iter().rposition(|d| *d > 0.0) {
                    Some(i) if i + 1 < densities.len() => lo + h * (i + 1) as f64,
                    _ => *hi,
                }
            }
            _ => self.support.hi,
        }
    }

    /// Smallest x with mass in every neighbourhood.
    pub fn ess_inf(&self) -> f64 {
        match &self.kind {
            DistKind::DiscretePmf { points, masses } => points
                .iter()
                .zip(masses)
                .find(|(_, m)| **m > 0.0)
                .map(|(p, _)| *p)
                .unwrap_or(self.support.lo),
            DistKind::GridDensity { lo, hi, densities } => {
                let h = (hi - lo) / (densities.len() - 1) as f64;
                match densities.iter().position(|d| *d > 0.0) {
                    Some(i) if i > 0 => lo + h * (i - 1) as f64,
                    _ => *lo,
                }
            }
            _ => self.support.lo,
        }
    }

    /// Density at `x`; the mass at `x` for discrete kinds.
    pub fn density(&self, x: f64) -> Result<f64> {
        Ok(self.ln_density(x)?.exp())
    }

    pub fn ln_density(&self, x: f64) -> Result<f64> {
        if !self.support.contains(x) {
            return match self.kind {
                DistKind::PointMass(_) => Err(Error::NoDensity),
                _ => Ok(f64::NEG_INFINITY),
            };
        }
        match &self.kind {
            DistKind::Parametric(f) => Ok(f.ln_pdf(x) - self.mass.ln()),
            DistKind::DiscretePmf { points, masses } => Ok(match find_point(points, x) {
                Some(i) => masses[i].ln(),
                None => f64::NEG_INFINITY,
            }),
            DistKind::GridDensity { .. } => Ok(self.grid_density(x).ln()),
            DistKind::PointMass(_) => Err(Error::NoDensity),
        }
    }

    fn grid_density(&self, x: f64) -> f64 {
        let DistKind::GridDensity { lo, hi, densities } = &self.kind else {
            unreachable!()
        };
        let n = densities.len();
        let h = (hi - lo) / (n - 1) as f64;
        let t = ((x - lo) / h).clamp(0.0, (n - 1) as f64);
        let i = (t.floor() as usize).min(n - 2);
        let u = t - i as f64;
        densities[i] * (1.0 - u) + densities[i + 1] * u
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x < self.support.lo {
            return 0.0;
        }
        if x >= self.support.hi {
            return 1.0;
        }
        match &self.kind {
            DistKind::Parametric(f) => {
                let v = if self.f_lo > 0.5 {
                    1.0 - (f.sf(x) - self.s_hi) / self.mass
                } else {
                    (f.cdf(x) - self.f_lo) / self.mass
                };
                v.clamp(0.0, 1.0)
            }
            DistKind::DiscretePmf { points, .. } => {
                let idx = points.partition_point(|p| *p <= x);
                if idx == 0 {
                    0.0
                } else {
                    self.cum[idx - 1].min(1.0)
                }
            }
            DistKind::GridDensity { lo, hi, densities } => {
                let n = densities.len();
                let h = (hi - lo) / (n - 1) as f64;
                let t = (x - lo) / h;
                let i = (t.floor() as usize).min(n - 2);
                let dx = x - (lo + h * i as f64);
                let slope = (densities[i + 1] - densities[i]) / h;
                (self.cum[i] + densities[i] * dx + 0.5 * slope * dx * dx).clamp(0.0, 1.0)
            }
            DistKind::PointMass(_) => 1.0,
        }
    }

    /// Survival function `P(X > x)`.
    pub fn sf(&self, x: f64) -> f64 {
        if x < self.support.lo {
            return 1.0;
        }
        if x >= self.support.hi {
            return 0.0;
        }
        match &self.kind {
            DistKind::Parametric(f) => ((f.sf(x) - self.s_hi) / self.mass).clamp(0.0, 1.0),
            _ => 1.0 - self.cdf(x),
        }
    }

    /// `inf { x : cdf(x) >= alpha }`.
    pub fn quantile(&self, alpha: f64) -> f64 {
        let alpha = alpha.clamp(0.0, 1.0);
        match &self.kind {
            DistKind::PointMass(a) => *a,
            DistKind::DiscretePmf { points, .. } => {
                let idx = self.cum.partition_point(|c| *c < alpha);
                points[idx.min(points.len() - 1)]
            }
            DistKind::Parametric(f) if f.is_discrete() => self.discrete_family_quantile(*f, alpha),
            DistKind::Parametric(f) => {
                let closed = if alpha > 0.5 {
                    // target survival in the base law
                    f.isf_closed(self.s_hi + (1.0 - alpha) * self.mass)
                } else {
                    f.quantile_closed(self.f_lo + alpha * self.mass)
                };
                match closed {
                    Some(x) if x.is_finite() => x.clamp(self.support.lo, self.support.hi),
                    _ => self.bisect_quantile(alpha),
                }
            }
            DistKind::GridDensity { .. } => self.bisect_quantile(alpha),
        }
    }

    /// Inverse of [`sf`](Self::sf); accurate for tiny tail masses.
    pub fn isf(&self, s: f64) -> f64 {
        if let DistKind::Parametric(f) = &self.kind {
            if !f.is_discrete() {
                if let Some(x) = f.isf_closed(self.s_hi + s * self.mass) {
                    if x.is_finite() {
                        return x.clamp(self.support.lo, self.support.hi);
                    }
                }
                let (mut a, mut b) = self.bracket();
                for _ in 0..400 {
                    let m = 0.5 * (a + b);
                    if m <= a || m >= b {
                        break;
                    }
                    if self.sf(m) > s {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                return b;
            }
        }
        self.quantile(1.0 - s)
    }

    fn discrete_family_quantile(&self, f: Family, alpha: f64) -> f64 {
        let Family::PoissonLike { parity, .. } = f else {
            unreachable!()
        };
        let step = 2.0;
        let mut x = self.support.lo;
        if (x - parity_shift(parity)) % 2.0 != 0.0 {
            x = parity_shift(parity) + 2.0 * ((x - parity_shift(parity)) / 2.0).ceil();
        }
        while x < self.support.hi && self.cdf(x) < alpha {
            x += step;
        }
        x.min(self.support.hi)
    }

    /// Finite bracket around the bulk of the law for bisection.
    fn bracket(&self) -> (f64, f64) {
        let mut lo = self.support.lo;
        let mut hi = self.support.hi;
        if !lo.is_finite() || !hi.is_finite() {
            let mid = if lo.is_finite() {
                lo
            } else if hi.is_finite() {
                hi
            } else {
                0.0
            };
            let mut w = 1.0;
            if !lo.is_finite() {
                lo = mid - w;
                while self.cdf(lo) > 0.0 && w < 1e300 {
                    w *= 2.0;
                    lo = mid - w;
                }
            }
            w = 1.0;
            if !hi.is_finite() {
                hi = mid + w;
                while self.sf(hi) > 0.0 && w < 1e300 {
                    w *= 2.0;
                    hi = mid + w;
                }
            }
        }
        (lo, hi)
    }

    fn bisect_quantile(&self, alpha: f64) -> f64 {
        let (mut a, mut b) = self.bracket();
        let tol = 1e-12 * (b - a).max(f64::MIN_POSITIVE);
        for _ in 0..400 {
            if b - a <= tol {
                break;
            }
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let below = if alpha > 0.5 {
                self.sf(m) > 1.0 - alpha
            } else {
                self.cdf(m) < alpha
            };
            if below {
                a = m;
            } else {
                b = m;
            }
        }
        b
    }

    /// Mass points and masses of a finite discrete law.
    pub fn atoms(&self) -> Option<(&[f64], &[f64])> {
        match &self.kind {
            DistKind::DiscretePmf { points, masses } => Some((points, masses)),
            _ => None,
        }
    }

    /// Restricts to `[a, b]` and renormalizes.
    pub fn truncate_to(&self, a: f64, b: f64) -> Result<Self> {
        let lo = a.max(self.support.lo);
        let hi = b.min(self.support.hi);
        if lo > hi {
            return Err(Error::InvalidDistribution(format!(
                "truncation range [{a}, {b}] misses the support"
            )));
        }
        if lo == self.support.lo && hi == self.support.hi {
            return Ok(self.clone());
        }
        match &self.kind {
            DistKind::Parametric(f @ Family::PoissonLike { parity, .. }) => {
                let shift = parity_shift(*parity);
                let j_lo = ((lo - shift) / 2.0).ceil().max(0.0) as u64;
                let j_hi = ((hi - shift) / 2.0).floor() as u64;
                if j_hi < j_lo {
                    return Err(Error::InvalidDistribution(format!(
                        "no mass points in [{a}, {b}]"
                    )));
                }
                let points: Vec<f64> = (j_lo..=j_hi).map(|j| shift + 2.0 * j as f64).collect();
                let ln_max = points.iter().map(|p| f.ln_pdf(*p)).fold(f64::NEG_INFINITY, f64::max);
                let weights = points.iter().map(|p| (f.ln_pdf(*p) - ln_max).exp()).collect();
                Self::pmf_normalized(points, weights)
            }
            DistKind::Parametric(f) => Self::parametric_on(*f, lo, hi),
            DistKind::DiscretePmf { points, masses } => {
                let (p, m): (Vec<f64>, Vec<f64>) = points
                    .iter()
                    .zip(masses)
                    .filter(|(p, _)| **p >= lo && **p <= hi)
                    .map(|(p, m)| (*p, *m))
                    .unzip();
                if p.is_empty() {
                    return Err(Error::InvalidDistribution(format!(
                        "no mass points in [{a}, {b}]"
                    )));
                }
                Self::pmf_normalized(p, m)
            }
            DistKind::GridDensity { .. } => {
                let n = DEFAULT_GRID_RESOLUTION;
                Self::grid_from_fn(lo, hi, n, |x| self.grid_density(x))
            }
            DistKind::PointMass(_) => Ok(self.clone()),
        }
    }

    /// Brings the law into compact support per `policy`.
    ///
    /// An infinite right end is cut where the survival function drops to
    /// `delta` (or `delta / 2` when the left end is also cut).
    pub fn truncate(&self, policy: &TruncationPolicy) -> Result<Self> {
        policy.validate()?;
        let s = self.support;
        let cap = policy.max_support_cap;
        let within_cap = s.lo >= -cap && s.hi <= cap;
        if s.is_compact() && within_cap {
            return Err(Error::AlreadyCompact);
        }
        let both = !s.lo.is_finite() && !s.hi.is_finite();
        let tail = if both {
            0.5 * policy.tail_mass_delta
        } else {
            policy.tail_mass_delta
        };
        let a = if s.lo.is_finite() { s.lo } else { self.quantile(tail) };
        let b = if s.hi.is_finite() {
            s.hi
        } else if self.is_discrete() {
            self.discrete_tail_cut(tail)
        } else {
            self.isf(tail)
        };
        self.truncate_to(a.max(-cap), b.min(cap))
    }

    /// Smallest mass point with survival below `tail`.
    fn discrete_tail_cut(&self, tail: f64) -> f64 {
        let mut x = self.ess_inf();
        while self.sf(x) >= tail && x < 1e15 {
            x += 2.0;
        }
        x
    }
}

fn find_point(points: &[f64], x: f64) -> Option<usize> {
    let tol = 1e-12 * x.abs().max(1.0);
    let idx = points.partition_point(|p| *p < x - tol);
    (idx < points.len() && (points[idx] - x).abs() <= tol).then_some(idx)
}

/// How infinite supports are cut back to compact ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub tail_mass_delta: f64,
    pub max_support_cap: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            tail_mass_delta: 1e-9,
            max_support_cap: 1e12,
        }
    }
}

impl TruncationPolicy {
    pub fn with_delta(delta: f64) -> Self {
        Self {
            tail_mass_delta: delta,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tail_mass_delta > 0.0 && self.tail_mass_delta < 1.0) {
            return Err(Error::InvalidDistribution(format!(
                "tail mass delta must lie in (0, 1), got {}",
                self.tail_mass_delta
            )));
        }
        if !(self.max_support_cap > 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "support cap must be positive, got {}",
                self.max_support_cap
            )));
        }
        Ok(())
    }
}

/// Compact version of `d`: truncated per `policy`, or `d` itself.
pub fn ensure_compact(d: &LossDistribution, policy: &TruncationPolicy) -> Result<LossDistribution> {
    match d.truncate(policy) {
        Ok(t) => Ok(t),
        Err(Error::AlreadyCompact) => Ok(d.clone()),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn uniform_basics() {
        let u = LossDistribution::uniform(1.0, 2.0).unwrap();
        assert_eq!(u.density(1.5).unwrap(), 1.0);
        assert_eq!(u.density(3.0).unwrap(), 0.0);
        assert!(close(u.cdf(1.25), 0.25, 1e-15));
        assert!(close(u.quantile(0.5), 1.5, 1e-12));
    }

    #[test]
    fn gumbel_density_at_location() {
        let (a, b) = (31.0063, 1.74346);
        let g = LossDistribution::gumbel(a, b).unwrap();
        let want = (-1.0_f64).exp() / b;
        assert!(close(g.density(a).unwrap(), want, 1e-15));
        assert!(close(want, 0.21099, 5e-5));
    }

    #[test]
    fn gumbel_cdf_tends_to_one() {
        let g = LossDistribution::gumbel(6.27294, 2.20532).unwrap();
        assert_eq!(g.cdf(1e6), 1.0);
        assert!(g.cdf(40.0) > 1.0 - 1e-15);
    }

    #[test]
    fn point_mass_step_and_no_density() {
        let p = LossDistribution::point(3.0).unwrap();
        assert_eq!(p.cdf(2.0), 0.0);
        assert_eq!(p.cdf(3.0), 1.0);
        assert!(matches!(p.density(3.0), Err(Error::NoDensity)));
        assert_eq!(LossDistribution::point(4.0).unwrap().quantile(0.3), 4.0);
    }

    #[test]
    fn pmf_validation() {
        assert!(LossDistribution::pmf(vec![1.0, 2.0], vec![0.5, 0.4]).is_err());
        assert!(LossDistribution::pmf(vec![2.0, 1.0], vec![0.5, 0.5]).is_err());
        let d = LossDistribution::pmf(vec![1.0, 2.0, 4.0], vec![0.25, 0.25, 0.5]).unwrap();
        assert_eq!(d.density(2.0).unwrap(), 0.25);
        assert_eq!(d.density(3.0).unwrap(), 0.0);
        assert_eq!(d.quantile(0.5), 2.0);
        assert_eq!(d.quantile(0.51), 4.0);
        assert_eq!(d.cdf(3.9), 0.5);
    }

    #[test]
    fn grid_is_renormalized() {
        let d = LossDistribution::grid(1.0, 3.0, vec![1.0, 2.0, 3.0, 2.0, 1.0]).unwrap();
        assert!(close(d.cdf(3.0), 1.0, 1e-12));
        let DistKind::GridDensity { densities, .. } = d.kind() else {
            panic!()
        };
        let h = 0.5;
        let integral: f64 = densities.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).sum();
        assert!(close(integral, 1.0, 1e-12));
    }

    #[test]
    fn grid_quantile_matches_dense_inversion() {
        let d = LossDistribution::grid_from_fn(1.0, 5.0, DEFAULT_GRID_RESOLUTION, |x| {
            (-(x - 2.5) * (x - 2.5)).exp()
        })
        .unwrap();
        let q = d.quantile(0.95);
        // dense inversion of the piecewise-quadratic CDF
        let n = 2_000_000;
        let mut x_hit = 5.0;
        for i in 0..=n {
            let x = 1.0 + 4.0 * i as f64 / n as f64;
            if d.cdf(x) >= 0.95 {
                x_hit = x;
                break;
            }
        }
        assert!(close(q, x_hit, 1e-6), "{q} vs {x_hit}");
    }

    #[test]
    fn cdf_quantile_round_trip() {
        let dists = [
            LossDistribution::gumbel(31.0063, 1.74346).unwrap(),
            LossDistribution::gamma(260.345, 0.0373929).unwrap(),
            LossDistribution::weibull(20.0, 10.0).unwrap(),
            LossDistribution::truncated_normal(3.0, 1.0, 1.0, 6.0).unwrap(),
            LossDistribution::frechet(3.0, 2.0).unwrap(),
        ];
        for d in &dists {
            for alpha in [0.05, 0.25, 0.5, 0.75, 0.95] {
                let x = d.quantile(alpha);
                assert!(close(d.cdf(x), alpha, 1e-6), "{d:?} alpha={alpha}");
            }
        }
    }

    #[test]
    fn truncation_cut_points() {
        let pol = TruncationPolicy::default();
        let g = LossDistribution::gumbel(31.0063, 1.74346).unwrap().truncate(&pol).unwrap();
        let s = g.support();
        assert!(close(s.lo, -6.33, 0.01) && close(s.hi, 36.35, 0.01), "{s:?}");
        let w = LossDistribution::weibull(20.0, 10.0).unwrap().truncate(&pol).unwrap();
        assert!(close(w.support().hi, 11.6365, 1e-4));
        assert_eq!(w.support().lo, 0.0);
        let gm = LossDistribution::gamma(260.345, 0.0373929).unwrap().truncate(&pol).unwrap();
        assert!(close(gm.support().hi, 13.80, 0.01), "{:?}", gm.support());
    }

    #[test]
    fn truncation_is_idempotent_and_respects_compact() {
        let pol = TruncationPolicy::default();
        let u = LossDistribution::uniform(1.0, 2.0).unwrap();
        assert!(matches!(u.truncate(&pol), Err(Error::AlreadyCompact)));
        let g = LossDistribution::gumbel(6.27294, 2.20532).unwrap().truncate(&pol).unwrap();
        assert!(matches!(g.truncate(&pol), Err(Error::AlreadyCompact)));
    }

    #[test]
    fn truncated_cdf_stays_within_delta() {
        let pol = TruncationPolicy::default();
        let d = LossDistribution::gamma(4.0, 2.0).unwrap();
        let t = d.truncate(&pol).unwrap();
        let hi = t.support().hi;
        for i in 0..=1000 {
            let x = hi * i as f64 / 1000.0;
            assert!((d.cdf(x) - t.cdf(x)).abs() < pol.tail_mass_delta);
        }
    }

    #[test]
    fn poisson_like_masses_and_truncation() {
        let even = LossDistribution::poisson_like(2.0, Parity::Even).unwrap();
        let odd = LossDistribution::poisson_like(2.0, Parity::Odd).unwrap();
        let p0 = (-2.0_f64).exp();
        assert!(close(even.density(0.0).unwrap(), p0, 1e-15));
        assert_eq!(even.density(1.0).unwrap(), 0.0);
        assert!(close(odd.density(3.0).unwrap(), 2.0 * p0, 1e-15));
        assert!(close(even.cdf(2.5), 3.0 * p0, 1e-14));
        let t = even.truncate_to(0.0, 9.0).unwrap();
        let (pts, _) = t.atoms().unwrap();
        assert_eq!(pts, &[0.0, 2.0, 4.0, 6.0, 8.0]);
        let cut = odd.truncate(&TruncationPolicy::default()).unwrap();
        assert!(cut.sf(0.0) > 0.0 && cut.is_compact());
    }

    #[test]
    fn essential_endpoints() {
        let d = LossDistribution::pmf(vec![1.0, 2.0, 3.0], vec![0.5, 0.5, 0.0]).unwrap();
        assert_eq!(d.ess_sup(), 2.0);
        let g = LossDistribution::grid(0.0, 4.0, vec![0.0, 0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(g.ess_inf(), 1.0);
        assert_eq!(g.ess_sup(), 4.0);
        let g2 = LossDistribution::grid(0.0, 4.0, vec![1.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(g2.ess_sup(), 2.0);
    }
}
