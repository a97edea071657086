//! Preference between loss distributions: smaller losses in the long run
//! (eventually smaller moments) win.

use crate::dist::{DistKind, LossDistribution, TruncationPolicy};
use crate::error::{Error, Result};
use crate::moments::{moment_sequence_at, natural_offset, MomentSequence, DEFAULT_K_MAX};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderingConfig {
    pub k_max: usize,
    /// Per-index tolerance on log-moment differences.
    pub moment_tol: f64,
    /// Absolute tolerance on density (or atom mass) differences.
    pub density_tol: f64,
    /// Relative tolerance on support endpoints.
    pub support_tol: f64,
    pub tail_grid_points: usize,
    /// Share of the common support scanned by the tail rule.
    pub tail_fraction: f64,
    /// Ratio bound `c < 1` of the density-ratio criterion.
    pub ratio_c: f64,
    pub ratio_window: usize,
    pub ratio_horizon: f64,
    /// Number of cut levels `delta_n = 10^-(3 + n)`.
    pub truncation_levels: usize,
    /// Extra integer-spaced caps after the first level.
    pub integer_sweep: usize,
}

impl Default for OrderingConfig {
    fn default() -> Self {
        Self {
            k_max: DEFAULT_K_MAX,
            moment_tol: 1e-9,
            density_tol: 1e-12,
            support_tol: 1e-9,
            tail_grid_points: 8192,
            tail_fraction: 0.25,
            ratio_c: 0.5,
            ratio_window: 4,
            ratio_horizon: 1e12,
            truncation_levels: 6,
            integer_sweep: 6,
        }
    }
}

impl OrderingConfig {
    pub fn with_k_max(k_max: usize) -> Self {
        Self {
            k_max,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    FirstPreferred,
    SecondPreferred,
    Equivalent,
    Undecided,
}

impl Relation {
    pub fn is_strict(self) -> bool {
        matches!(self, Relation::FirstPreferred | Relation::SecondPreferred)
    }

    pub fn flipped(self) -> Self {
        match self {
            Relation::FirstPreferred => Relation::SecondPreferred,
            Relation::SecondPreferred => Relation::FirstPreferred,
            r => r,
        }
    }
}

/// The rule of the decision cascade that settled a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecidedBy {
    /// Moment dominance from index `K` on.
    MomentDominance(usize),
    TailDensity,
    SupportEndpoint,
    RatioCriterion,
    PointMassRule,
    /// Agreement of compact truncations along increasing caps.
    TruncationSequence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreferenceOutcome {
    pub relation: Relation,
    pub strict: bool,
    /// `None` exactly when the relation is undecided.
    pub decided_by: Option<DecidedBy>,
    pub witness_k: Option<usize>,
}

impl PreferenceOutcome {
    fn decided(relation: Relation, strict: bool, by: DecidedBy) -> Self {
        let witness_k = match by {
            DecidedBy::MomentDominance(k) => Some(k),
            _ => None,
        };
        Self {
            relation,
            strict: strict && relation != Relation::Equivalent,
            decided_by: Some(by),
            witness_k,
        }
    }

    pub fn undecided() -> Self {
        Self {
            relation: Relation::Undecided,
            strict: false,
            decided_by: None,
            witness_k: None,
        }
    }

    /// `FirstPreferred` if `first_smaller`, else `SecondPreferred`; strict.
    fn strict_by(first_smaller: bool, by: DecidedBy) -> Self {
        let r = if first_smaller {
            Relation::FirstPreferred
        } else {
            Relation::SecondPreferred
        };
        Self::decided(r, true, by)
    }

    /// Outcome of the comparison with the arguments swapped.
    pub fn flipped(self) -> Self {
        Self {
            relation: self.relation.flipped(),
            ..self
        }
    }

    pub fn is_decided(&self) -> bool {
        self.relation != Relation::Undecided
    }

    /// First is weakly preferred (`d1 <= d2`).
    pub fn first_weakly_preferred(&self) -> bool {
        matches!(self.relation, Relation::FirstPreferred | Relation::Equivalent)
    }

    pub fn second_weakly_preferred(&self) -> bool {
        matches!(self.relation, Relation::SecondPreferred | Relation::Equivalent)
    }
}

/// Compares two loss distributions.
pub fn compare(d1: &LossDistribution, d2: &LossDistribution, cfg: &OrderingConfig) -> PreferenceOutcome {
    match (d1.is_compact(), d2.is_compact()) {
        (false, false) => {
            return compare_extended(d1, d2, cfg).unwrap_or_else(|_| PreferenceOutcome::undecided())
        }
        (true, false) => return PreferenceOutcome::strict_by(true, DecidedBy::SupportEndpoint),
        (false, true) => return PreferenceOutcome::strict_by(false, DecidedBy::SupportEndpoint),
        (true, true) => {}
    }
    if let Some(out) = point_mass_rule(d1, d2, cfg) {
        return out;
    }
    if let Some(out) = endpoint_rule(d1.ess_sup(), d2.ess_sup(), cfg) {
        return out;
    }
    if let Some(out) = tail_density_rule(d1, d2, cfg) {
        return out;
    }
    let offset = natural_offset(d1).max(natural_offset(d2));
    match (
        moment_sequence_at(d1, cfg.k_max, offset),
        moment_sequence_at(d2, cfg.k_max, offset),
    ) {
        (Ok(s1), Ok(s2)) => moment_rule(&s1, &s2, cfg),
        _ => PreferenceOutcome::undecided(),
    }
}

/// Point mass against point mass or against a spread-out law.
///
/// A constant `a` beats anything whose essential supremum exceeds `a`; at a
/// common endpoint the law with mass below it has strictly smaller moments.
pub fn point_mass_rule(
    d1: &LossDistribution,
    d2: &LossDistribution,
    cfg: &OrderingConfig,
) -> Option<PreferenceOutcome> {
    let tie = |a: f64, b: f64| (a - b).abs() <= cfg.support_tol * a.abs().max(b.abs()).max(1.0);
    match (d1.kind(), d2.kind()) {
        (DistKind::PointMass(a), DistKind::PointMass(b)) => Some(if tie(*a, *b) {
            PreferenceOutcome::decided(Relation::Equivalent, false, DecidedBy::PointMassRule)
        } else {
            PreferenceOutcome::strict_by(a < b, DecidedBy::PointMassRule)
        }),
        (DistKind::PointMass(a), _) => {
            let e = d2.ess_sup();
            Some(PreferenceOutcome::strict_by(
                *a < e && !tie(*a, e),
                DecidedBy::PointMassRule,
            ))
        }
        (_, DistKind::PointMass(_)) => point_mass_rule(d2, d1, cfg).map(PreferenceOutcome::flipped),
        _ => None,
    }
}

/// The smaller essential supremum wins outright.
pub fn endpoint_rule(e1: f64, e2: f64, cfg: &OrderingConfig) -> Option<PreferenceOutcome> {
    let scale = e1.abs().max(e2.abs()).max(1.0);
    if (e1 - e2).abs() > cfg.support_tol * scale {
        Some(PreferenceOutcome::strict_by(e1 < e2, DecidedBy::SupportEndpoint))
    } else {
        None
    }
}

/// Decides by the rightmost place where the densities (or atom masses)
/// differ; the smaller one there wins.
pub fn tail_density_rule(
    d1: &LossDistribution,
    d2: &LossDistribution,
    cfg: &OrderingConfig,
) -> Option<PreferenceOutcome> {
    match (d1.is_discrete(), d2.is_discrete()) {
        (false, false) => {
            let top = d1.ess_sup().max(d2.ess_sup());
            let bottom = d1.ess_inf().min(d2.ess_inf());
            let span = cfg.tail_fraction * (top - bottom);
            let n = cfg.tail_grid_points.max(2);
            for i in 0..n {
                let x = top - span * i as f64 / (n - 1) as f64;
                let f1 = d1.density(x).ok()?;
                let f2 = d2.density(x).ok()?;
                if (f1 - f2).abs() > cfg.density_tol {
                    return Some(PreferenceOutcome::strict_by(f1 < f2, DecidedBy::TailDensity));
                }
            }
            None
        }
        (true, true) => {
            let (p1, m1) = atoms_of(d1)?;
            let (p2, m2) = atoms_of(d2)?;
            let (mut i, mut j) = (p1.len(), p2.len());
            let tol = |x: f64| cfg.support_tol * x.abs().max(1.0);
            while i > 0 || j > 0 {
                let x1 = if i > 0 { p1[i - 1] } else { f64::NEG_INFINITY };
                let x2 = if j > 0 { p2[j - 1] } else { f64::NEG_INFINITY };
                let (a, b) = if (x1 - x2).abs() <= tol(x1.max(x2)) {
                    i -= 1;
                    j -= 1;
                    (m1[i], m2[j])
                } else if x1 > x2 {
                    i -= 1;
                    (m1[i], 0.0)
                } else {
                    j -= 1;
                    (0.0, m2[j])
                };
                if (a - b).abs() > cfg.density_tol {
                    return Some(PreferenceOutcome::strict_by(a < b, DecidedBy::TailDensity));
                }
            }
            None
        }
        // an atom at the common endpoint outweighs any density there
        (true, false) => Some(PreferenceOutcome::strict_by(false, DecidedBy::TailDensity)),
        (false, true) => Some(PreferenceOutcome::strict_by(true, DecidedBy::TailDensity)),
    }
}

fn atoms_of(d: &LossDistribution) -> Option<(Vec<f64>, Vec<f64>)> {
    match d.kind() {
        DistKind::PointMass(a) => Some((vec![*a], vec![1.0])),
        DistKind::DiscretePmf { points, masses } => Some((points.clone(), masses.clone())),
        _ => None,
    }
}

/// Sign of `a - b` with a dead zone of width `tol`; equal infinities tie.
fn sign_with_tol(a: f64, b: f64, tol: f64) -> i8 {
    if a == b {
        return 0;
    }
    let d = a - b;
    if d.abs() <= tol {
        0
    } else if d > 0.0 {
        1
    } else {
        -1
    }
}

/// Eventual per-index dominance of log moments.
///
/// The trailing run of indices whose differences agree in sign (zeros
/// allowed) decides once it covers the last quarter of the horizon; an
/// all-zero run of that length means equivalence.
pub fn moment_rule(s1: &MomentSequence, s2: &MomentSequence, cfg: &OrderingConfig) -> PreferenceOutcome {
    let k_max = s1.k_max().min(s2.k_max());
    let signs: Vec<i8> = (1..=k_max)
        .map(|k| sign_with_tol(s1.log_moment(k), s2.log_moment(k), cfg.moment_tol))
        .collect();
    let need = k_max.div_ceil(4).max(1);

    let zero_tail = signs.iter().rev().take_while(|s| **s == 0).count();
    if zero_tail == k_max || zero_tail >= need {
        let start = k_max - zero_tail + 1;
        return PreferenceOutcome::decided(
            Relation::Equivalent,
            false,
            DecidedBy::MomentDominance(start),
        );
    }
    let sigma = signs[k_max - 1 - zero_tail];
    let run = signs
        .iter()
        .rev()
        .take_while(|s| **s == 0 || **s == sigma)
        .count();
    if run < need {
        return PreferenceOutcome::undecided();
    }
    let start = k_max - run + 1;
    let strict = signs[start - 1..].iter().all(|s| *s != 0);
    let relation = if sigma > 0 {
        Relation::SecondPreferred
    } else {
        Relation::FirstPreferred
    };
    PreferenceOutcome::decided(relation, strict, DecidedBy::MomentDominance(start))
}

/// Compares precomputed sequences: endpoint rule, then moment dominance.
pub fn compare_sequences(
    s1: &MomentSequence,
    s2: &MomentSequence,
    cfg: &OrderingConfig,
) -> Result<PreferenceOutcome> {
    if (s1.offset() - s2.offset()).abs() > 1e-12 * s1.offset().abs().max(1.0) {
        return Err(Error::ShapeMismatch(format!(
            "sequences use shifts {} and {}",
            s1.offset(),
            s2.offset()
        )));
    }
    if s1.k_max() != s2.k_max() {
        return Err(Error::ShapeMismatch(format!(
            "sequences carry {} and {} moments",
            s1.k_max(),
            s2.k_max()
        )));
    }
    if let Some(out) = endpoint_rule(s1.scale_b(), s2.scale_b(), cfg) {
        return Ok(out);
    }
    Ok(moment_rule(s1, s2, cfg))
}

/// Indices of a least and a greatest element; earlier indices win ties.
pub fn min_max(items: &[MomentSequence], cfg: &OrderingConfig) -> Result<(usize, usize)> {
    if items.is_empty() {
        return Err(Error::ShapeMismatch("min_max of an empty list".into()));
    }
    let (mut lo, mut hi) = (0, 0);
    for i in 1..items.len() {
        let vs_lo = compare_sequences(&items[i], &items[lo], cfg)?;
        match vs_lo.relation {
            Relation::Undecided => return Err(Error::IncomparablePair(lo, i)),
            Relation::FirstPreferred => lo = i,
            _ => {}
        }
        let vs_hi = compare_sequences(&items[i], &items[hi], cfg)?;
        match vs_hi.relation {
            Relation::Undecided => return Err(Error::IncomparablePair(hi, i)),
            Relation::SecondPreferred => hi = i,
            _ => {}
        }
    }
    Ok((lo, hi))
}

/// `max_k |ln E[Y1^k] - ln E[Y2^k]| / k`, the largest log-ratio of the
/// `L^k` norms.
pub fn lk_log_distance(s1: &MomentSequence, s2: &MomentSequence) -> f64 {
    (1..=s1.k_max().min(s2.k_max()))
        .map(|k| {
            let (a, b) = (s1.log_moment(k), s2.log_moment(k));
            if a == b {
                0.0
            } else {
                (a - b).abs() / k as f64
            }
        })
        .fold(0.0, f64::max)
}

/// Preference on laws with unbounded support: the density-ratio criterion,
/// then agreement along a family of compact truncations.
pub fn compare_extended(
    d1: &LossDistribution,
    d2: &LossDistribution,
    cfg: &OrderingConfig,
) -> Result<PreferenceOutcome> {
    match (d1.is_compact(), d2.is_compact()) {
        (true, true) => return Err(Error::BothCompact),
        (true, false) => return Ok(PreferenceOutcome::strict_by(true, DecidedBy::SupportEndpoint)),
        (false, true) => return Ok(PreferenceOutcome::strict_by(false, DecidedBy::SupportEndpoint)),
        (false, false) => {}
    }
    if let Some(out) = ratio_criterion(d1, d2, cfg) {
        return Ok(out);
    }
    let outcomes = truncation_outcomes(d1, d2, cfg)?;
    let tail = &outcomes[1.min(outcomes.len() - 1)..];
    let first = tail[0].relation;
    if first == Relation::Undecided || tail.iter().any(|o| o.relation != first) {
        return Ok(PreferenceOutcome::undecided());
    }
    let strict = tail.iter().all(|o| o.strict);
    Ok(PreferenceOutcome::decided(first, strict, DecidedBy::TruncationSequence))
}

/// Density-ratio test on the geometric grid `x0 * 2^i`.
pub fn ratio_criterion(
    d1: &LossDistribution,
    d2: &LossDistribution,
    cfg: &OrderingConfig,
) -> Option<PreferenceOutcome> {
    if d1.is_discrete() || d2.is_discrete() || d1.support().hi.is_finite() || d2.support().hi.is_finite() {
        return None;
    }
    let x0 = d1.quantile(0.5).max(d2.quantile(0.5)).max(1.0);
    let mut ratios = Vec::new();
    let mut x = x0;
    while x <= cfg.ratio_horizon {
        let l1 = d1.ln_density(x).ok()?;
        let l2 = d2.ln_density(x).ok()?;
        match (l1 == f64::NEG_INFINITY, l2 == f64::NEG_INFINITY) {
            (true, true) => {}
            (true, false) => ratios.push(f64::NEG_INFINITY),
            (false, true) => ratios.push(f64::INFINITY),
            (false, false) => ratios.push(l1 - l2),
        }
        x *= 2.0;
    }
    let w = cfg.ratio_window.max(2);
    if ratios.len() < w {
        return None;
    }
    let window = &ratios[ratios.len() - w..];
    let lc = cfg.ratio_c.ln();
    let trending = |v: &[f64]| v.windows(2).all(|p| p[1] <= p[0]);
    if window.iter().all(|r| *r < lc) && trending(window) {
        return Some(PreferenceOutcome::strict_by(true, DecidedBy::RatioCriterion));
    }
    let inv: Vec<f64> = window.iter().map(|r| -r).collect();
    if inv.iter().all(|r| *r < lc) && trending(&inv) {
        return Some(PreferenceOutcome::strict_by(false, DecidedBy::RatioCriterion));
    }
    None
}

/// Shared caps `a_n` for the truncation test: the larger of the two
/// `1 - delta_n` quantiles, then integer steps beyond the first cap.
pub fn truncation_caps(d1: &LossDistribution, d2: &LossDistribution, cfg: &OrderingConfig) -> Vec<(f64, f64)> {
    let cut = |d: &LossDistribution, delta: f64| -> (f64, f64) {
        let s = d.support();
        let policy = TruncationPolicy::with_delta(delta);
        match d.truncate(&policy) {
            Ok(t) => (t.support().lo, t.support().hi),
            Err(_) => (s.lo, s.hi),
        }
    };
    let mut caps = Vec::new();
    for n in 1..=cfg.truncation_levels {
        let delta = 10f64.powi(-(3 + n as i32));
        let (lo1, hi1) = cut(d1, delta);
        let (lo2, hi2) = cut(d2, delta);
        caps.push((lo1.min(lo2), hi1.max(hi2)));
    }
    if let Some(&(lo, hi)) = caps.first() {
        for j in 0..cfg.integer_sweep {
            caps.push((lo, hi.ceil() + j as f64));
        }
    }
    caps
}

/// `compare` on both laws truncated at each shared cap.
pub fn truncation_outcomes(
    d1: &LossDistribution,
    d2: &LossDistribution,
    cfg: &OrderingConfig,
) -> Result<Vec<PreferenceOutcome>> {
    truncation_caps(d1, d2, cfg)
        .into_iter()
        .map(|(lo, hi)| {
            let t1 = d1.truncate_to(lo, hi)?;
            let t2 = d2.truncate_to(lo, hi)?;
            Ok(compare(&t1, &t2, cfg))
        })
        .collect()
}
