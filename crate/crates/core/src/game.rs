//! Zero-sum matrix games with loss-distribution payoffs.
//!
//! The row player suffers the loss and picks a `⪯`-least outcome; the
//! column player picks a `⪯`-greatest one.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula::{check_simplex, joint_weights, Copula2};
use crate::dist::{ensure_compact, LossDistribution, TruncationPolicy};
use crate::error::{Error, Result};
use crate::moments::{mix_moments, moment_sequence_at, natural_offset, MomentSequence, DEFAULT_K_MAX};
use crate::ordering::{
    compare_extended, compare_sequences, lk_log_distance, OrderingConfig, PreferenceOutcome, Relation,
};

/// Cell count above which candidate payoffs are evaluated in parallel.
const PARALLEL_CELLS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MixedStrategy {
    pub(crate) probs: Vec<f64>,
}

impl MixedStrategy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_simplex(&probs, "mixed strategy")?;
        Ok(Self { probs })
    }

    pub(crate) fn new_unchecked(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    pub fn pure(n: usize, i: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[i] = 1.0;
        Self { probs }
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn linf_distance(&self, other: &MixedStrategy) -> f64 {
        linf(&self.probs, &other.probs)
    }

    /// Drops weights below `tol` and renormalizes.
    pub fn purified(&self, tol: f64) -> Self {
        let kept: Vec<f64> = self.probs.iter().map(|p| if *p < tol { 0.0 } else { *p }).collect();
        let s: f64 = kept.iter().sum();
        if s <= 0.0 {
            return self.clone();
        }
        Self {
            probs: kept.iter().map(|p| p / s).collect(),
        }
    }
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Row,
    Column,
}

/// Settings fixed when a game is built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameOptions {
    pub k_max: usize,
    pub truncation: TruncationPolicy,
    pub ordering: OrderingConfig,
}

impl Default for GameOptions {
    fn default() -> Self {
        Self {
            k_max: DEFAULT_K_MAX,
            truncation: TruncationPolicy::default(),
            ordering: OrderingConfig::default(),
        }
    }
}

impl GameOptions {
    pub fn with_k_max(k_max: usize) -> Self {
        Self {
            k_max,
            ordering: OrderingConfig::with_k_max(k_max),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct Game {
    n: usize,
    m: usize,
    payoff: Vec<LossDistribution>,
    compact: Vec<LossDistribution>,
    cells: Vec<MomentSequence>,
    copula: Copula2,
    row_labels: Option<Vec<String>>,
    col_labels: Option<Vec<String>>,
    options: GameOptions,
    offset: f64,
    deterministic: bool,
    incomparable: Vec<(usize, usize)>,
}

/// Games are equal when built from the same cells, copula, labels and
/// options; everything else is derived.
impl PartialEq for Game {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.m == other.m
            && self.payoff == other.payoff
            && self.copula == other.copula
            && self.row_labels == other.row_labels
            && self.col_labels == other.col_labels
            && self.options == other.options
    }
}

impl Game {
    pub fn new(payoff: Vec<Vec<LossDistribution>>, copula: Copula2) -> Result<Self> {
        Self::with_options(payoff, copula, GameOptions::default())
    }

    /// Builds the game: truncates unbounded cells, computes every cell's
    /// moment sequence under one common shift, and records pairs of
    /// unbounded cells that admit no preference.
    pub fn with_options(
        payoff: Vec<Vec<LossDistribution>>,
        copula: Copula2,
        options: GameOptions,
    ) -> Result<Self> {
        let n = payoff.len();
        let m = payoff.first().map_or(0, Vec::len);
        if n == 0 || m == 0 {
            return Err(Error::ShapeMismatch("payoff matrix must be nonempty".into()));
        }
        if let Some(i) = payoff.iter().position(|r| r.len() != m) {
            return Err(Error::ShapeMismatch(format!(
                "row {i} has {} cells, expected {m}",
                payoff[i].len()
            )));
        }
        let payoff: Vec<LossDistribution> = payoff.into_iter().flatten().collect();
        let compact = payoff
            .iter()
            .enumerate()
            .map(|(c, d)| {
                ensure_compact(d, &options.truncation).map_err(|e| Error::Validation {
                    location: format!("cell ({}, {})", c / m, c % m),
                    reason: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let offset = compact.iter().map(natural_offset).fold(0.0, f64::max);
        let cells = compact
            .par_iter()
            .enumerate()
            .map(|(c, d)| {
                moment_sequence_at(d, options.k_max, offset).map_err(|e| Error::Validation {
                    location: format!("cell ({}, {})", c / m, c % m),
                    reason: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let deterministic = copula.is_product() && payoff.iter().all(LossDistribution::is_point_mass);

        let unbounded: Vec<usize> = (0..payoff.len()).filter(|c| !payoff[*c].is_compact()).collect();
        let pairs: Vec<(usize, usize)> = unbounded
            .iter()
            .enumerate()
            .flat_map(|(a, &x)| unbounded[a + 1..].iter().map(move |&y| (x, y)))
            .collect();
        let incomparable = pairs
            .into_par_iter()
            .filter(|(x, y)| {
                matches!(
                    compare_extended(&payoff[*x], &payoff[*y], &options.ordering),
                    Ok(PreferenceOutcome {
                        relation: Relation::Undecided,
                        ..
                    })
                )
            })
            .collect();

        Ok(Self {
            n,
            m,
            payoff,
            compact,
            cells,
            copula,
            row_labels: None,
            col_labels: None,
            options,
            offset,
            deterministic,
            incomparable,
        })
    }

    pub fn with_labels(mut self, rows: Option<Vec<String>>, cols: Option<Vec<String>>) -> Result<Self> {
        if rows.as_ref().is_some_and(|r| r.len() != self.n) {
            return Err(Error::ShapeMismatch("row label count differs from rows".into()));
        }
        if cols.as_ref().is_some_and(|c| c.len() != self.m) {
            return Err(Error::ShapeMismatch("column label count differs from columns".into()));
        }
        self.row_labels = rows;
        self.col_labels = cols;
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.m
    }

    pub fn copula(&self) -> &Copula2 {
        &self.copula
    }

    pub fn options(&self) -> &GameOptions {
        &self.options
    }

    pub fn k_max(&self) -> usize {
        self.options.k_max
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn row_labels(&self) -> Option<&[String]> {
        self.row_labels.as_deref()
    }

    pub fn col_labels(&self) -> Option<&[String]> {
        self.col_labels.as_deref()
    }

    /// Payoff as given, before truncation.
    pub fn cell(&self, i: usize, j: usize) -> &LossDistribution {
        &self.payoff[i * self.m + j]
    }

    /// Compact payoff used for all computations.
    pub fn compact_cell(&self, i: usize, j: usize) -> &LossDistribution {
        &self.compact[i * self.m + j]
    }

    pub fn cell_moments(&self, i: usize, j: usize) -> &MomentSequence {
        &self.cells[i * self.m + j]
    }

    /// Whether all payoffs are constants under independent play.
    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    /// Pairs of cells (as `(i, j)` positions) with no preference between them.
    pub fn incomparable_cells(&self) -> Vec<((usize, usize), (usize, usize))> {
        self.incomparable
            .iter()
            .map(|(a, b)| ((a / self.m, a % self.m), (b / self.m, b % self.m)))
            .collect()
    }

    /// Classical payoff `p^T A q`; defined only for deterministic games.
    pub fn scalar_payoff(&self, p: &[f64], q: &[f64]) -> Option<f64> {
        if !self.payoff.iter().all(LossDistribution::is_point_mass) {
            return None;
        }
        let mut v = 0.0;
        for (i, pi) in p.iter().enumerate() {
            for (j, qj) in q.iter().enumerate() {
                if let crate::dist::DistKind::PointMass(a) = self.payoff[i * self.m + j].kind() {
                    v += pi * qj * a;
                }
            }
        }
        Some(v)
    }

    fn check_dims(&self, p: &[f64], q: &[f64]) -> Result<()> {
        if p.len() != self.n || q.len() != self.m {
            return Err(Error::ShapeMismatch(format!(
                "strategies of length {} and {} for a {}x{} game",
                p.len(),
                q.len(),
                self.n,
                self.m
            )));
        }
        Ok(())
    }

    fn cell_refs(&self) -> Vec<&MomentSequence> {
        self.cells.iter().collect()
    }

    /// Optimization outcome scored for best responses.
    pub(crate) fn scored(&self, p: &[f64], q: &[f64]) -> Result<Scored> {
        if self.deterministic {
            self.check_dims(p, q)?;
            return Ok(Scored::Scalar(self.scalar_payoff(p, q).unwrap_or(0.0)));
        }
        Ok(Scored::Seq(mixed_payoff(self, p, q)?))
    }
}

/// Moment sequence of the outcome distribution under `(p, q)` and the
/// game's copula.
pub fn mixed_payoff(g: &Game, p: &[f64], q: &[f64]) -> Result<MomentSequence> {
    g.check_dims(p, q)?;
    let w = joint_weights(&g.copula, p, q)?;
    mix_moments(&g.cell_refs(), w.as_slice())
}

/// Outcome as the solver ranks it.
///
/// For all-constant games under independent play the outcome is the
/// constant `p^T A q`; otherwise it is [`mixed_payoff`].
pub fn outcome(g: &Game, p: &[f64], q: &[f64]) -> Result<MomentSequence> {
    match g.scored(p, q)? {
        Scored::Scalar(v) => Ok(MomentSequence::point_mass(v, g.k_max(), g.offset)),
        Scored::Seq(s) => Ok(s),
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Scored {
    Scalar(f64),
    Seq(MomentSequence),
}

pub(crate) fn compare_scored(a: &Scored, b: &Scored, cfg: &OrderingConfig) -> Result<Relation> {
    match (a, b) {
        (Scored::Scalar(x), Scored::Scalar(y)) => {
            let tol = cfg.support_tol * x.abs().max(y.abs()).max(1.0);
            Ok(if (x - y).abs() <= tol {
                Relation::Equivalent
            } else if x < y {
                Relation::FirstPreferred
            } else {
                Relation::SecondPreferred
            })
        }
        (Scored::Seq(x), Scored::Seq(y)) => Ok(compare_sequences(x, y, cfg)?.relation),
        _ => Err(Error::ShapeMismatch("mixed outcome kinds".into())),
    }
}

fn candidate_outcomes(g: &Game, against: &[f64], side: Side) -> Result<Vec<Scored>> {
    let count = match side {
        Side::Row => g.n,
        Side::Column => g.m,
    };
    let eval = |k: usize| -> Result<Scored> {
        match side {
            Side::Row => g.scored(&MixedStrategy::pure(g.n, k).probs, against),
            Side::Column => g.scored(against, &MixedStrategy::pure(g.m, k).probs),
        }
    };
    if g.n * g.m * count >= PARALLEL_CELLS {
        (0..count).into_par_iter().map(eval).collect()
    } else {
        (0..count).map(eval).collect()
    }
}

/// Surfaces candidates whose payoffs mix cells known to be incomparable.
fn check_incomparable(g: &Game, against: &[f64], side: Side) -> Result<()> {
    if g.incomparable.is_empty() {
        return Ok(());
    }
    let count = match side {
        Side::Row => g.n,
        Side::Column => g.m,
    };
    let support = |k: usize| -> Vec<usize> {
        match side {
            Side::Row => (0..g.m).filter(|&j| against[j] > 0.0).map(|j| k * g.m + j).collect(),
            Side::Column => (0..g.n).filter(|&i| against[i] > 0.0).map(|i| i * g.m + k).collect(),
        }
    };
    for a in 0..count {
        for b in a + 1..count {
            let (sa, sb) = (support(a), support(b));
            let clash = g.incomparable.iter().any(|(x, y)| {
                (sa.contains(x) && sb.contains(y)) || (sa.contains(y) && sb.contains(x))
            });
            if clash {
                return Err(Error::IncomparablePayoffs(a, b));
            }
        }
    }
    Ok(())
}

fn best_of(outcomes: &[Scored], side: Side, cfg: &OrderingConfig) -> Result<usize> {
    let mut best = 0;
    for k in 1..outcomes.len() {
        match compare_scored(&outcomes[k], &outcomes[best], cfg)? {
            Relation::Undecided => return Err(Error::IncomparablePayoffs(best, k)),
            Relation::FirstPreferred if side == Side::Row => best = k,
            Relation::SecondPreferred if side == Side::Column => best = k,
            _ => {}
        }
    }
    Ok(best)
}

/// Pure best response against `against`: `⪯`-least for the row player,
/// `⪯`-greatest for the column player, lowest index on ties.
pub fn best_response(g: &Game, against: &MixedStrategy, side: Side, cfg: &OrderingConfig) -> Result<usize> {
    best_response_probs(g, &against.probs, side, cfg)
}

pub(crate) fn best_response_probs(g: &Game, against: &[f64], side: Side, cfg: &OrderingConfig) -> Result<usize> {
    let expected = match side {
        Side::Row => g.m,
        Side::Column => g.n,
    };
    if against.len() != expected {
        return Err(Error::ShapeMismatch(format!(
            "opponent strategy has length {}, expected {expected}",
            against.len()
        )));
    }
    check_incomparable(g, against, side)?;
    best_of(&candidate_outcomes(g, against, side)?, side, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Stop once both empirical mixtures moved less than this over the window.
    pub eps: f64,
    pub window: usize,
    pub max_iters: usize,
    pub init_row: usize,
    pub init_col: usize,
    /// Weights below this are dropped from the final strategies.
    pub purify_tol: f64,
    pub ordering: OrderingConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eps: 1e-3,
            window: 100,
            max_iters: 200_000,
            init_row: 0,
            init_col: 0,
            purify_tol: 1e-3,
            ordering: OrderingConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub p_star: MixedStrategy,
    pub q_star: MixedStrategy,
    /// Security level of `p_star`: the `⪯`-greatest outcome any column
    /// strategy can force against it.
    pub assurance: MomentSequence,
    /// Outcome distribution at `(p_star, q_star)`.
    pub saddle_payoff: MomentSequence,
    pub iterations: usize,
    pub converged: bool,
    /// Whether a pure row replaced the averaged play.
    pub polished: bool,
    /// Per-iteration sup-norm change of the empirical mixtures.
    pub history: Vec<f64>,
}

/// Fictitious play on the `⪯`-ordered game.
pub fn solve_zero_sum(g: &Game, cfg: &SolverConfig) -> Result<SolveResult> {
    if !g.copula.is_product() {
        return Err(Error::UnsupportedCoupling);
    }
    if cfg.init_row >= g.n || cfg.init_col >= g.m {
        return Err(Error::ShapeMismatch("initial play out of range".into()));
    }
    let fp = fictitious_play(
        g.n,
        &[g.m],
        cfg,
        |qs| best_response_probs(g, &qs[0], Side::Row, &cfg.ordering),
        |_, p| best_response_probs(g, p, Side::Column, &cfg.ordering),
    )?;
    finish(g, fp, cfg)
}

pub(crate) struct FpRun {
    pub p: Vec<f64>,
    pub qs: Vec<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<f64>,
}

/// Simultaneous fictitious play of one row player against `ms.len()`
/// column players, with windowed convergence on the empirical mixtures.
pub(crate) fn fictitious_play<R, C>(
    n: usize,
    ms: &[usize],
    cfg: &SolverConfig,
    mut row_br: R,
    mut col_br: C,
) -> Result<FpRun>
where
    R: FnMut(&[Vec<f64>]) -> Result<usize>,
    C: FnMut(usize, &[f64]) -> Result<usize>,
{
    let mut cp = vec![0.0; n];
    cp[cfg.init_row] = 1.0;
    let mut cqs: Vec<Vec<f64>> = ms
        .iter()
        .map(|&m| {
            let mut c = vec![0.0; m];
            c[cfg.init_col] = 1.0;
            c
        })
        .collect();
    let w = cfg.window.max(1);
    // the forced opening play must be light enough to purify away, and the
    // players get one window to react once it is
    let min_iters = if cfg.purify_tol > 0.0 {
        (1.0 / cfg.purify_tol).floor() as usize + 1 + w
    } else {
        0
    };
    let mut ring: Vec<(Vec<f64>, Vec<Vec<f64>>)> = Vec::with_capacity(w);
    let mut history = Vec::new();
    let mut prev: Option<(Vec<f64>, Vec<Vec<f64>>)> = None;
    let mut t = 1usize;
    let mut converged = false;
    let moved = |a: &(Vec<f64>, Vec<Vec<f64>>), b: &(Vec<f64>, Vec<Vec<f64>>)| {
        a.1.iter()
            .zip(&b.1)
            .map(|(x, y)| linf(x, y))
            .fold(linf(&a.0, &b.0), f64::max)
    };
    loop {
        let tf = t as f64;
        let state = (
            cp.iter().map(|c| c / tf).collect::<Vec<f64>>(),
            cqs.iter()
                .map(|cq| cq.iter().map(|c| c / tf).collect())
                .collect::<Vec<Vec<f64>>>(),
        );
        if let Some(pr) = &prev {
            history.push(moved(&state, pr));
        }
        if ring.len() == w {
            let slot = t % w;
            if t >= min_iters && moved(&state, &ring[slot]) < cfg.eps {
                converged = true;
                prev = Some(state);
                break;
            }
            ring[slot] = state.clone();
        } else {
            ring.push(state.clone());
        }
        if t >= cfg.max_iters {
            prev = Some(state);
            break;
        }
        // respond to the mixtures as purification would report them, so a
        // stray early play cannot steer the tail comparison forever
        let qs_seen: Vec<Vec<f64>> = state.1.iter().map(|q| trimmed(q, cfg.purify_tol)).collect();
        let p_seen = trimmed(&state.0, cfg.purify_tol);
        let i = row_br(&qs_seen)?;
        let js = (0..ms.len())
            .map(|g| col_br(g, &p_seen))
            .collect::<Result<Vec<usize>>>()?;
        cp[i] += 1.0;
        for (cq, j) in cqs.iter_mut().zip(js) {
            cq[j] += 1.0;
        }
        prev = Some(state);
        t += 1;
    }
    let (p, qs) = prev.expect("at least one iterate");
    Ok(FpRun {
        p,
        qs,
        iterations: t,
        converged,
        history,
    })
}

/// `v` without entries below `tol`, renormalized.
fn trimmed(v: &[f64], tol: f64) -> Vec<f64> {
    let kept: f64 = v.iter().filter(|x| **x >= tol).sum();
    if kept <= 0.0 {
        return v.to_vec();
    }
    v.iter().map(|x| if *x >= tol { x / kept } else { 0.0 }).collect()
}

fn finish(g: &Game, fp: FpRun, cfg: &SolverConfig) -> Result<SolveResult> {
    let p_star = MixedStrategy { probs: fp.p }.purified(cfg.purify_tol);
    let q_star = MixedStrategy {
        probs: fp.qs.into_iter().next().expect("one opponent"),
    }
    .purified(cfg.purify_tol);
    let mut assurance = security_level(g, &p_star, &cfg.ordering)?;
    // history that has not yet decayed can keep a heavy-tailed row in the
    // average; a pure row with a strictly better guarantee replaces it
    let mut polished = false;
    let mut p_star = p_star;
    for i in 0..g.n {
        let e = MixedStrategy::pure(g.n, i);
        let s = security_level(g, &e, &cfg.ordering)?;
        if compare_sequences(&s, &assurance, &cfg.ordering)?.relation == Relation::FirstPreferred {
            p_star = e;
            assurance = s;
            polished = true;
        }
    }
    let q_star = if polished {
        MixedStrategy::pure(g.m, best_response(g, &p_star, Side::Column, &cfg.ordering)?)
    } else {
        q_star
    };
    let saddle_payoff = mixed_payoff(g, &p_star.probs, &q_star.probs)?;
    Ok(SolveResult {
        p_star,
        q_star,
        assurance,
        saddle_payoff,
        iterations: fp.iterations,
        converged: fp.converged,
        polished,
        history: fp.history,
    })
}

/// `⪯`-greatest outcome of `p` over pure column replies.
pub fn security_level(g: &Game, p: &MixedStrategy, cfg: &OrderingConfig) -> Result<MomentSequence> {
    let j = best_response(g, p, Side::Column, cfg)?;
    outcome(g, &p.probs, &MixedStrategy::pure(g.m, j).probs)
}

/// All points of the simplex in `R^n` with coordinates on multiples of `res`.
pub fn simplex_grid(n: usize, res: f64) -> Vec<Vec<f64>> {
    let steps = (1.0 / res).round() as usize;
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    fn rec(k: usize, left: usize, steps: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        let n = cur.len();
        if k == n - 1 {
            cur[k] = left;
            out.push(cur.iter().map(|c| *c as f64 / steps as f64).collect());
            return;
        }
        for c in 0..=left {
            cur[k] = c;
            rec(k + 1, left - c, steps, cur, out);
        }
    }
    rec(0, steps, steps, &mut cur, &mut out);
    out
}

/// Worst deviation found on one side of the saddle inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SideViolation {
    /// Grid points where the inequality fails strictly beyond tolerance.
    pub count: usize,
    /// Largest first-moment gap in the violating direction.
    pub worst_mean_gap: f64,
    /// Largest `L^k` log distance in the violating direction.
    pub worst_log_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaddleReport {
    pub grid_points: usize,
    /// Row deviations: `F(p, q*) ≺ F(p*, q*)`.
    pub row: SideViolation,
    /// Column deviations: `F(p*, q) ≻ F(p*, q*)`.
    pub column: SideViolation,
}

impl SaddleReport {
    pub fn holds(&self) -> bool {
        self.row.count == 0 && self.column.count == 0
    }
}

/// Checks `F(p*, q) ⪯ F(p*, q*) ⪯ F(p, q*)` on a simplex grid.
///
/// A grid point counts as a violation when it is strictly better for the
/// deviating player and its `L^k` log distance from the saddle outcome
/// exceeds `tol`.
pub fn verify_saddle(g: &Game, r: &SolveResult, grid_res: f64, tol: f64, cfg: &OrderingConfig) -> Result<SaddleReport> {
    let star = outcome(g, r.p_star.probs(), r.q_star.probs())?;
    let star_mean = star.mean();
    let rows = simplex_grid(g.n, grid_res);
    let cols = simplex_grid(g.m, grid_res);
    let mut report = SaddleReport {
        grid_points: rows.len() + cols.len(),
        row: SideViolation::default(),
        column: SideViolation::default(),
    };
    let tally = |side: &mut SideViolation, other: &MomentSequence, worse: Relation| -> Result<()> {
        let rel = compare_sequences(other, &star, cfg)?.relation;
        if rel == worse.flipped() || rel == Relation::Undecided {
            let dist = lk_log_distance(other, &star);
            side.worst_log_distance = side.worst_log_distance.max(dist);
            side.worst_mean_gap = side.worst_mean_gap.max((other.mean() - star_mean).abs());
            if dist > tol {
                side.count += 1;
            }
        }
        Ok(())
    };
    for p in &rows {
        let o = outcome(g, p, r.q_star.probs())?;
        tally(&mut report.row, &o, Relation::SecondPreferred)?;
    }
    for q in &cols {
        let o = outcome(g, r.p_star.probs(), q)?;
        tally(&mut report.column, &o, Relation::FirstPreferred)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExchangeReport {
    /// Largest pairwise `L^k` log distance among the four cross outcomes.
    pub max_log_distance: f64,
    pub equivalent: bool,
}

/// For two saddle candidates, checks that all four cross outcomes
/// `F(p_a, q_b)` coincide within `tol`.
pub fn verify_exchange(g: &Game, a: &SolveResult, b: &SolveResult, tol: f64) -> Result<ExchangeReport> {
    let outs = [
        outcome(g, a.p_star.probs(), a.q_star.probs())?,
        outcome(g, a.p_star.probs(), b.q_star.probs())?,
        outcome(g, b.p_star.probs(), a.q_star.probs())?,
        outcome(g, b.p_star.probs(), b.q_star.probs())?,
    ];
    let mut worst: f64 = 0.0;
    for x in 0..4 {
        for y in x + 1..4 {
            worst = worst.max(lk_log_distance(&outs[x], &outs[y]));
        }
    }
    Ok(ExchangeReport {
        max_log_distance: worst,
        equivalent: worst <= tol,
    })
}
