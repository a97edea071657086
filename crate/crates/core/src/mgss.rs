//! Multi-goal security strategies via the one-against-all auxiliary game.

use serde::Serialize;

use crate::copula::Copula2;
use crate::error::{Error, Result};
use crate::game::{
    best_response_probs, compare_scored, fictitious_play, outcome, simplex_grid, Game, MixedStrategy, Scored,
    Side, SolverConfig,
};
use crate::moments::MomentSequence;
use crate::ordering::{compare_sequences, lk_log_distance, OrderingConfig, Relation};

/// One defender facing `d` goals, each a zero-sum game of the same shape.
#[derive(Debug, Clone)]
pub struct MultiGame {
    goals: Vec<Game>,
}

impl MultiGame {
    pub fn new(goals: Vec<Game>) -> Result<Self> {
        let first = goals
            .first()
            .ok_or_else(|| Error::ShapeMismatch("at least one goal is required".into()))?;
        let (n, m) = (first.rows(), first.cols());
        for (i, g) in goals.iter().enumerate() {
            if g.rows() != n || g.cols() != m {
                return Err(Error::ShapeMismatch(format!(
                    "goal {i} is {}x{}, goal 0 is {n}x{m}",
                    g.rows(),
                    g.cols()
                )));
            }
            if g.copula() != first.copula() {
                return Err(Error::ShapeMismatch(format!("goal {i} uses a different copula")));
            }
            if g.k_max() != first.k_max() {
                return Err(Error::ShapeMismatch(format!("goal {i} uses a different K_max")));
            }
        }
        Ok(Self { goals })
    }

    pub fn goals(&self) -> &[Game] {
        &self.goals
    }

    pub fn goal(&self, i: usize) -> &Game {
        &self.goals[i]
    }

    pub fn len(&self) -> usize {
        self.goals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.goals.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.goals[0].rows()
    }

    pub fn cols(&self) -> usize {
        self.goals[0].cols()
    }

    pub fn copula(&self) -> &Copula2 {
        self.goals[0].copula()
    }
}

/// The `(d + 1)`-player game: player 0 picks rows and receives the vector of
/// goal outcomes; opponent `i` picks columns and only sees goal `i`.
#[derive(Debug, Clone, Copy)]
pub struct AuxiliaryGame<'a> {
    mg: &'a MultiGame,
}

pub fn build_auxiliary(mg: &MultiGame) -> AuxiliaryGame<'_> {
    AuxiliaryGame { mg }
}

impl<'a> AuxiliaryGame<'a> {
    pub fn opponents(&self) -> usize {
        self.mg.len()
    }

    pub fn defender_actions(&self) -> usize {
        self.mg.rows()
    }

    pub fn opponent_actions(&self) -> usize {
        self.mg.cols()
    }

    /// The scalar game opponent `i` plays against player 0.
    pub fn opponent_game(&self, i: usize) -> &'a Game {
        self.mg.goal(i)
    }

    /// Player 0's outcome vector when opponent `i` plays `qs[i]`.
    pub fn defender_payoff(&self, p: &[f64], qs: &[Vec<f64>]) -> Result<Vec<MomentSequence>> {
        if qs.len() != self.mg.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} opponent strategies for {} goals",
                qs.len(),
                self.mg.len()
            )));
        }
        qs.iter()
            .enumerate()
            .map(|(i, q)| outcome(self.mg.goal(i), p, q))
            .collect()
    }

    /// Opponent `i`'s outcome; depends on `p` and `q_i` only.
    pub fn opponent_payoff(&self, i: usize, p: &[f64], q_i: &[f64]) -> Result<MomentSequence> {
        outcome(self.mg.goal(i), p, q_i)
    }

    pub fn opponent_best_response(&self, i: usize, p: &[f64], cfg: &OrderingConfig) -> Result<usize> {
        best_response_probs(self.mg.goal(i), p, Side::Column, cfg)
    }

    /// Player 0's best response by weighted majority over the goals.
    ///
    /// Row `a` beats row `b` when the weights of the goals where `a` is
    /// strictly better exceed one half. Among unbeaten rows (or all rows if
    /// the relation cycles) the goal-lexicographic least one wins, then the
    /// lowest index.
    pub fn defender_best_response(&self, qs: &[Vec<f64>], weights: &[f64], cfg: &OrderingConfig) -> Result<usize> {
        let n = self.mg.rows();
        let d = self.mg.len();
        let mut outs: Vec<Vec<Scored>> = Vec::with_capacity(n);
        for r in 0..n {
            let e = MixedStrategy::pure(n, r);
            outs.push(
                (0..d)
                    .map(|i| self.mg.goal(i).scored(e.probs(), &qs[i]))
                    .collect::<Result<_>>()?,
            );
        }
        // rel[a][b][i]: relation of row a to row b in goal i
        let mut beaten = vec![false; n];
        let mut rel = vec![vec![Vec::new(); n]; n];
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let r: Vec<Relation> = (0..d)
                    .map(|i| compare_scored(&outs[a][i], &outs[b][i], cfg))
                    .collect::<Result<_>>()?;
                if r.contains(&Relation::Undecided) {
                    return Err(Error::IncomparablePayoffs(a.min(b), a.max(b)));
                }
                rel[a][b] = r;
            }
        }
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let wins: f64 = (0..d)
                    .filter(|&i| rel[a][b][i] == Relation::FirstPreferred)
                    .map(|i| weights[i])
                    .sum();
                if wins > 0.5 {
                    beaten[b] = true;
                }
            }
        }
        let mut pool: Vec<usize> = (0..n).filter(|r| !beaten[*r]).collect();
        if pool.is_empty() {
            pool = (0..n).collect();
        }
        let mut best = pool[0];
        for &c in &pool[1..] {
            let lex = rel[c][best].iter().find(|r| **r != Relation::Equivalent);
            if lex == Some(&Relation::FirstPreferred) {
                best = c;
            }
        }
        Ok(best)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MgssResult {
    pub p_star: MixedStrategy,
    pub q_stars: Vec<MixedStrategy>,
    /// Per-goal assurance: the security level of `p_star` in that goal.
    pub assurance: Vec<MomentSequence>,
    pub iterations: usize,
    pub converged: bool,
    pub axiom_report: AxiomReport,
}

/// Tolerances for the axiom checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxiomConfig {
    pub grid_res: f64,
    /// `L^k` log distance below which outcomes count as equivalent.
    pub tol: f64,
}

impl Default for AxiomConfig {
    fn default() -> Self {
        Self {
            grid_res: 0.05,
            tol: 0.01,
        }
    }
}

/// Solves for a multi-goal security strategy and its assurance vector.
pub fn solve_mgss(mg: &MultiGame, cfg: &SolverConfig, weights: &[f64]) -> Result<MgssResult> {
    solve_mgss_with(mg, cfg, weights, &AxiomConfig::default())
}

pub fn solve_mgss_with(
    mg: &MultiGame,
    cfg: &SolverConfig,
    weights: &[f64],
    axioms: &AxiomConfig,
) -> Result<MgssResult> {
    if weights.len() != mg.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} weights for {} goals",
            weights.len(),
            mg.len()
        )));
    }
    if weights.iter().any(|w| !(*w > 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::NotASimplex("goal weights must be positive and sum to 1".into()));
    }
    if !mg.copula().is_product() {
        return Err(Error::UnsupportedCoupling);
    }
    if cfg.init_row >= mg.rows() || cfg.init_col >= mg.cols() {
        return Err(Error::ShapeMismatch("initial play out of range".into()));
    }
    let aux = build_auxiliary(mg);
    let ms = vec![mg.cols(); mg.len()];
    let fp = fictitious_play(
        mg.rows(),
        &ms,
        cfg,
        |qs| aux.defender_best_response(qs, weights, &cfg.ordering),
        |i, p| aux.opponent_best_response(i, p, &cfg.ordering),
    )?;
    let p_star = MixedStrategy::new_unchecked(fp.p).purified(cfg.purify_tol);
    let q_stars: Vec<MixedStrategy> = fp
        .qs
        .into_iter()
        .map(|q| MixedStrategy::new_unchecked(q).purified(cfg.purify_tol))
        .collect();
    let assurance = (0..mg.len())
        .map(|i| crate::game::security_level(mg.goal(i), &p_star, &cfg.ordering))
        .collect::<Result<Vec<_>>>()?;
    let axiom_report = check_axioms(mg, &p_star, &assurance, axioms, &cfg.ordering)?;
    Ok(MgssResult {
        p_star,
        q_stars,
        assurance,
        iterations: fp.iterations,
        converged: fp.converged,
        axiom_report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub grid_res: f64,
    pub tol: f64,
    /// Grid `q` where some goal's outcome exceeds its assurance.
    pub assurance_violations: usize,
    pub worst_assurance_distance: f64,
    /// Per goal: whether some grid `q` meets the assurance.
    pub attained: Vec<bool>,
    /// Grid rows strategies that improve on every assurance at once.
    pub efficiency_violations: Vec<Vec<f64>>,
}

impl AxiomReport {
    pub fn assurance_holds(&self) -> bool {
        self.assurance_violations == 0 && self.attained.iter().all(|a| *a)
    }

    pub fn efficiency_holds(&self) -> bool {
        self.efficiency_violations.is_empty()
    }

    pub fn holds(&self) -> bool {
        self.assurance_holds() && self.efficiency_holds()
    }
}

/// Checks both axioms for `p` with assurance vector `v` on a simplex grid.
///
/// Assurance: every goal outcome `u_i(p, q)` is `⪯ V_i`, and some `q`
/// meets `V_i`. Efficiency: for each other grid strategy `p'` some goal and
/// some `q` give an outcome no better than that goal's assurance.
pub fn check_axioms(
    mg: &MultiGame,
    p: &MixedStrategy,
    v: &[MomentSequence],
    axioms: &AxiomConfig,
    cfg: &OrderingConfig,
) -> Result<AxiomReport> {
    if v.len() != mg.len() {
        return Err(Error::ShapeMismatch(format!("{} assurances for {} goals", v.len(), mg.len())));
    }
    let cols = simplex_grid(mg.cols(), axioms.grid_res);
    let mut report = AxiomReport {
        grid_res: axioms.grid_res,
        tol: axioms.tol,
        assurance_violations: 0,
        worst_assurance_distance: 0.0,
        attained: vec![false; mg.len()],
        efficiency_violations: Vec::new(),
    };
    for (i, vi) in v.iter().enumerate() {
        let g = mg.goal(i);
        for q in &cols {
            let u = outcome(g, p.probs(), q)?;
            let dist = lk_log_distance(&u, vi);
            let rel = compare_sequences(&u, vi, cfg)?.relation;
            if dist <= axioms.tol || rel == Relation::Equivalent {
                report.attained[i] = true;
            }
            if matches!(rel, Relation::SecondPreferred | Relation::Undecided) && dist > axioms.tol {
                report.assurance_violations += 1;
                report.worst_assurance_distance = report.worst_assurance_distance.max(dist);
            }
        }
    }
    for alt in simplex_grid(mg.rows(), axioms.grid_res) {
        let alt = MixedStrategy::new_unchecked(alt);
        if alt.linf_distance(p) < 1e-9 {
            continue;
        }
        if efficiency_witness(mg, &alt, v, axioms, cfg)?.is_none() {
            report.efficiency_violations.push(alt.probs().to_vec());
        }
    }
    Ok(report)
}

/// A goal and grid reply `q` under which `p` does no better than the
/// assurance, if any.
pub fn efficiency_witness(
    mg: &MultiGame,
    p: &MixedStrategy,
    v: &[MomentSequence],
    axioms: &AxiomConfig,
    cfg: &OrderingConfig,
) -> Result<Option<(usize, Vec<f64>)>> {
    let cols = simplex_grid(mg.cols(), axioms.grid_res);
    for (i, vi) in v.iter().enumerate() {
        for q in &cols {
            let u = outcome(mg.goal(i), p.probs(), q)?;
            let rel = compare_sequences(&u, vi, cfg)?.relation;
            let no_better = matches!(rel, Relation::SecondPreferred | Relation::Equivalent)
                || lk_log_distance(&u, vi) <= axioms.tol;
            if no_better {
                return Ok(Some((i, q.clone())));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::LossDistribution;
    use crate::game::solve_zero_sum;

    fn points(a: &[&[f64]]) -> Game {
        let payoff = a
            .iter()
            .map(|r| r.iter().map(|x| LossDistribution::point(*x).unwrap()).collect())
            .collect();
        Game::new(payoff, Copula2::Product).unwrap()
    }

    #[test]
    fn single_goal_matches_zero_sum() {
        let g = points(&[&[3.0, 1.0], &[2.0, 4.0]]);
        let cfg = SolverConfig::default();
        let zs = solve_zero_sum(&g, &cfg).unwrap();
        let mg = MultiGame::new(vec![g]).unwrap();
        let r = solve_mgss(&mg, &cfg, &[1.0]).unwrap();
        assert!(r.p_star.linf_distance(&zs.p_star) < 1e-12);
        assert!(r.q_stars[0].linf_distance(&zs.q_star) < 1e-12);
        assert_eq!(r.assurance[0], zs.assurance);
        assert!(r.axiom_report.holds(), "{:?}", r.axiom_report);
    }

    #[test]
    fn duplicated_goal_is_symmetric() {
        let g = points(&[&[3.0, 1.0], &[2.0, 4.0]]);
        let cfg = SolverConfig::default();
        let one = solve_mgss(&MultiGame::new(vec![g.clone()]).unwrap(), &cfg, &[1.0]).unwrap();
        let two = solve_mgss(&MultiGame::new(vec![g.clone(), g]).unwrap(), &cfg, &[0.5, 0.5]).unwrap();
        assert!(two.p_star.linf_distance(&one.p_star) < 1e-12);
        assert!(lk_log_distance(&two.assurance[0], &two.assurance[1]) < 1e-12);
        assert!(two.axiom_report.holds());
    }

    #[test]
    fn auxiliary_accessors_match_cells() {
        let a = points(&[&[3.0, 1.0], &[2.0, 4.0]]);
        let b = points(&[&[5.0, 6.0], &[7.0, 8.0]]);
        let mg = MultiGame::new(vec![a, b]).unwrap();
        let aux = build_auxiliary(&mg);
        assert_eq!(aux.opponents(), 2);
        let u = aux
            .defender_payoff(&[0.0, 1.0], &[vec![1.0, 0.0], vec![0.0, 1.0]])
            .unwrap();
        assert!((u[0].mean() - 2.0).abs() < 1e-12);
        assert!((u[1].mean() - 8.0).abs() < 1e-12);
        let o = aux.opponent_payoff(1, &[1.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!((o.mean() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn shrunken_assurance_fails_the_guarantee() {
        let g = points(&[&[3.0, 1.0], &[2.0, 4.0]]);
        let mg = MultiGame::new(vec![g]).unwrap();
        let cfg = SolverConfig::default();
        let r = solve_mgss(&mg, &cfg, &[1.0]).unwrap();
        let smaller: Vec<MomentSequence> = r.assurance.iter().map(|v| v.scaled(1.0 / 1.02)).collect();
        let rep = check_axioms(&mg, &r.p_star, &smaller, &AxiomConfig::default(), &cfg.ordering).unwrap();
        assert!(!rep.assurance_holds());
    }

    #[test]
    fn mismatched_goals_are_rejected() {
        let a = points(&[&[3.0, 1.0], &[2.0, 4.0]]);
        let b = points(&[&[3.0, 1.0]]);
        assert!(matches!(MultiGame::new(vec![a, b]), Err(Error::ShapeMismatch(_))));
    }
}
