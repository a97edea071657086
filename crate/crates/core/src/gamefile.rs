//! JSON game files.
//!
//! A file holds either one payoff matrix (`payoffs`) or a list of them
//! (`goals`), each cell a tagged distribution literal:
//!
//! ```json
//! {
//!   "version": 1,
//!   "copula": "product",
//!   "payoffs": [[{"kind": "gumbel", "location": 30.0, "scale": 2.0},
//!                {"kind": "point", "at": 25.0}]]
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::copula::{Copula2, CopulaTable};
use crate::dist::{DistKind, Family, LossDistribution, Parity, TruncationPolicy};
use crate::error::{Error, Result};
use crate::game::{Game, GameOptions, SolverConfig};
use crate::mgss::MultiGame;
use crate::moments::{DEFAULT_K_MAX, K_MAX_ENV};
use crate::ordering::OrderingConfig;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParityLiteral {
    Even,
    Odd,
}

/// One cell's loss distribution. Parametric kinds accept optional `lo` and
/// `hi` restricting (and renormalizing) the law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistLiteral {
    Gumbel {
        #[serde(alias = "a")]
        location: f64,
        #[serde(alias = "b")]
        scale: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lo: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hi: Option<f64>,
    },
    Gamma {
        shape: f64,
        scale: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lo: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hi: Option<f64>,
    },
    Weibull {
        shape: f64,
        scale: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lo: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hi: Option<f64>,
    },
    Frechet {
        shape: f64,
        scale: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lo: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hi: Option<f64>,
    },
    Normal {
        mean: f64,
        sd: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lo: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hi: Option<f64>,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    PoissonLike {
        lambda: f64,
        parity: ParityLiteral,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lo: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hi: Option<f64>,
    },
    Pmf {
        points: Vec<f64>,
        masses: Vec<f64>,
    },
    Grid {
        lo: f64,
        hi: f64,
        densities: Vec<f64>,
    },
    Point {
        #[serde(alias = "a")]
        at: f64,
    },
}

fn restricted(family: Family, lo: Option<f64>, hi: Option<f64>) -> Result<LossDistribution> {
    if lo.is_none() && hi.is_none() {
        return LossDistribution::parametric(family);
    }
    LossDistribution::parametric_on(family, lo.unwrap_or(f64::NEG_INFINITY), hi.unwrap_or(f64::INFINITY))
}

impl DistLiteral {
    pub fn build(&self) -> Result<LossDistribution> {
        match self.clone() {
            DistLiteral::Gumbel { location, scale, lo, hi } => restricted(Family::Gumbel { location, scale }, lo, hi),
            DistLiteral::Gamma { shape, scale, lo, hi } => restricted(Family::Gamma { shape, scale }, lo, hi),
            DistLiteral::Weibull { shape, scale, lo, hi } => restricted(Family::Weibull { shape, scale }, lo, hi),
            DistLiteral::Frechet { shape, scale, lo, hi } => restricted(Family::Frechet { shape, scale }, lo, hi),
            DistLiteral::Normal { mean, sd, lo, hi } => restricted(Family::Normal { mean, sd }, lo, hi),
            DistLiteral::Uniform { lo, hi } => LossDistribution::uniform(lo, hi),
            DistLiteral::PoissonLike { lambda, parity, lo, hi } => {
                let parity = match parity {
                    ParityLiteral::Even => Parity::Even,
                    ParityLiteral::Odd => Parity::Odd,
                };
                restricted(Family::PoissonLike { lambda, parity }, lo, hi)
            }
            DistLiteral::Pmf { points, masses } => LossDistribution::pmf(points, masses),
            DistLiteral::Grid { lo, hi, densities } => LossDistribution::grid(lo, hi, densities),
            DistLiteral::Point { at } => LossDistribution::point(at),
        }
    }

    /// The literal describing `d`.
    pub fn from_dist(d: &LossDistribution) -> Self {
        let s = d.support();
        let (lo, hi) = if d.is_restricted() {
            (Some(s.lo), Some(s.hi))
        } else {
            (None, None)
        };
        match d.kind() {
            DistKind::Parametric(f) => match *f {
                Family::Gumbel { location, scale } => DistLiteral::Gumbel { location, scale, lo, hi },
                Family::Gamma { shape, scale } => DistLiteral::Gamma { shape, scale, lo, hi },
                Family::Weibull { shape, scale } => DistLiteral::Weibull { shape, scale, lo, hi },
                Family::Frechet { shape, scale } => DistLiteral::Frechet { shape, scale, lo, hi },
                Family::Normal { mean, sd } => DistLiteral::Normal { mean, sd, lo, hi },
                Family::Uniform { lo, hi } => DistLiteral::Uniform { lo, hi },
                Family::PoissonLike { lambda, parity } => DistLiteral::PoissonLike {
                    lambda,
                    parity: match parity {
                        Parity::Even => ParityLiteral::Even,
                        Parity::Odd => ParityLiteral::Odd,
                    },
                    lo,
                    hi,
                },
            },
            DistKind::DiscretePmf { points, masses } => DistLiteral::Pmf {
                points: points.clone(),
                masses: masses.clone(),
            },
            DistKind::GridDensity { lo, hi, densities } => DistLiteral::Grid {
                lo: *lo,
                hi: *hi,
                densities: densities.clone(),
            },
            DistKind::PointMass(a) => DistLiteral::Point { at: *a },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CopulaLiteral {
    #[default]
    Product,
    Min,
    /// `grid x grid` values on the regular unit grid, row-major.
    Table { grid: usize, values: Vec<f64> },
}

impl CopulaLiteral {
    pub fn build(&self) -> Result<Copula2> {
        Ok(match self {
            CopulaLiteral::Product => Copula2::Product,
            CopulaLiteral::Min => Copula2::Min,
            CopulaLiteral::Table { grid, values } => Copula2::Tabulated(CopulaTable::new(*grid, values.clone())?),
        })
    }

    pub fn from_copula(c: &Copula2) -> Self {
        match c {
            Copula2::Product => CopulaLiteral::Product,
            Copula2::Min => CopulaLiteral::Min,
            Copula2::Tabulated(t) => CopulaLiteral::Table {
                grid: t.grid(),
                values: t.values().to_vec(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Labels {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_row: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_col: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub purify_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderingOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_grid_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_levels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integer_sweep: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_mass_delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_support_cap: Option<f64>,
}

pub type Matrix = Vec<Vec<DistLiteral>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpecFile {
    pub version: u32,
    #[serde(default)]
    pub copula: CopulaLiteral,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoffs: Option<Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goals: Option<Vec<Matrix>>,
    /// Goal weights for the multi-goal solver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Labels>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverOverrides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordering: Option<OrderingOverrides>,
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum Model {
    Game(Game),
    Multi(MultiGame),
}

/// A validated file: the model plus the solver settings it asks for.
#[derive(Debug, Clone)]
pub struct LoadedGame {
    pub model: Model,
    pub solver: SolverConfig,
    pub spec: GameSpecFile,
}

impl LoadedGame {
    pub fn game(&self) -> Option<&Game> {
        match &self.model {
            Model::Game(g) => Some(g),
            Model::Multi(_) => None,
        }
    }

    pub fn multi(&self) -> Option<&MultiGame> {
        match &self.model {
            Model::Multi(m) => Some(m),
            Model::Game(_) => None,
        }
    }
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn invalid(location: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Validation {
        location: location.into(),
        reason: reason.into(),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `STOCHORDER_KMAX` if it is set.
pub fn k_max_override() -> Result<Option<usize>> {
    match std::env::var(K_MAX_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k >= 1 => Ok(Some(k)),
            _ => Err(invalid(K_MAX_ENV, format!("expected a positive integer, got {v:?}"))),
        },
    }
}

/// Reads and validates a game file; `STOCHORDER_KMAX` wins over the file.
pub fn parse_game(path: &Path) -> Result<LoadedGame> {
    parse_game_str(&read(path)?, k_max_override()?)
}

pub fn parse_game_str(text: &str, k_max_override: Option<usize>) -> Result<LoadedGame> {
    let spec: GameSpecFile = serde_json::from_str(text).map_err(parse_error)?;
    load_spec(spec, k_max_override)
}

fn options_of(spec: &GameSpecFile, k_override: Option<usize>) -> Result<GameOptions> {
    let o = spec.ordering.clone().unwrap_or_default();
    let k_max = k_override.or(o.k_max).unwrap_or(DEFAULT_K_MAX);
    if k_max < 4 {
        return Err(invalid("ordering.k_max", "needs at least 4 moments"));
    }
    let d = OrderingConfig::with_k_max(k_max);
    let ordering = OrderingConfig {
        k_max,
        moment_tol: o.moment_tol.unwrap_or(d.moment_tol),
        density_tol: o.density_tol.unwrap_or(d.density_tol),
        support_tol: o.support_tol.unwrap_or(d.support_tol),
        tail_grid_points: o.tail_grid_points.unwrap_or(d.tail_grid_points),
        tail_fraction: o.tail_fraction.unwrap_or(d.tail_fraction),
        ratio_c: o.ratio_c.unwrap_or(d.ratio_c),
        ratio_window: o.ratio_window.unwrap_or(d.ratio_window),
        ratio_horizon: o.ratio_horizon.unwrap_or(d.ratio_horizon),
        truncation_levels: o.truncation_levels.unwrap_or(d.truncation_levels),
        integer_sweep: o.integer_sweep.unwrap_or(d.integer_sweep),
    };
    if !(ordering.tail_fraction > 0.0 && ordering.tail_fraction <= 1.0) {
        return Err(invalid("ordering.tail_fraction", "must lie in (0, 1]"));
    }
    if !(ordering.ratio_c > 0.0 && ordering.ratio_c < 1.0) {
        return Err(invalid("ordering.ratio_c", "must lie in (0, 1)"));
    }
    let t = TruncationPolicy::default();
    let truncation = TruncationPolicy {
        tail_mass_delta: o.tail_mass_delta.unwrap_or(t.tail_mass_delta),
        max_support_cap: o.max_support_cap.unwrap_or(t.max_support_cap),
    };
    if !(truncation.tail_mass_delta > 0.0 && truncation.tail_mass_delta < 1.0) {
        return Err(invalid("ordering.tail_mass_delta", "must lie in (0, 1)"));
    }
    Ok(GameOptions {
        k_max,
        truncation,
        ordering,
    })
}

fn solver_of(spec: &GameSpecFile, ordering: OrderingConfig) -> Result<SolverConfig> {
    let s = spec.solver.clone().unwrap_or_default();
    let d = SolverConfig::default();
    let cfg = SolverConfig {
        eps: s.eps.unwrap_or(d.eps),
        window: s.window.unwrap_or(d.window),
        max_iters: s.max_iters.unwrap_or(d.max_iters),
        init_row: s.init_row.unwrap_or(d.init_row),
        init_col: s.init_col.unwrap_or(d.init_col),
        purify_tol: s.purify_tol.unwrap_or(d.purify_tol),
        ordering,
    };
    if !(cfg.eps > 0.0) {
        return Err(invalid("solver.eps", "must be positive"));
    }
    if cfg.window == 0 || cfg.max_iters == 0 {
        return Err(invalid("solver", "window and max_iters must be positive"));
    }
    Ok(cfg)
}

fn build_matrix(m: &Matrix, prefix: &str) -> Result<Vec<Vec<LossDistribution>>> {
    if m.is_empty() || m[0].is_empty() {
        return Err(invalid(prefix.trim_end_matches(", "), "payoff matrix is empty"));
    }
    let cols = m[0].len();
    m.iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() != cols {
                return Err(invalid(
                    format!("{prefix}row {i}"),
                    format!("has {} cells, expected {cols}", row.len()),
                ));
            }
            row.iter()
                .enumerate()
                .map(|(j, lit)| {
                    lit.build()
                        .map_err(|e| invalid(format!("{prefix}cell ({i}, {j})"), e.to_string()))
                })
                .collect()
        })
        .collect()
}

fn requalify(e: Error, prefix: &str) -> Error {
    match e {
        Error::Validation { location, reason } if !prefix.is_empty() => Error::Validation {
            location: format!("{prefix}{location}"),
            reason,
        },
        other => other,
    }
}

/// Validates a parsed file and builds the model.
pub fn load_spec(spec: GameSpecFile, k_override: Option<usize>) -> Result<LoadedGame> {
    if spec.version != FORMAT_VERSION {
        return Err(invalid(
            "version",
            format!("unsupported version {}, expected {FORMAT_VERSION}", spec.version),
        ));
    }
    let options = options_of(&spec, k_override)?;
    let solver = solver_of(&spec, options.ordering)?;
    let copula = spec.copula.build().map_err(|e| invalid("copula", e.to_string()))?;
    let labels = spec.labels.clone().unwrap_or_default();
    let build = |m: &Matrix, prefix: &str| -> Result<Game> {
        let cells = build_matrix(m, prefix)?;
        Game::with_options(cells, copula.clone(), options)
            .map_err(|e| requalify(e, prefix))?
            .with_labels(labels.rows.clone(), labels.cols.clone())
            .map_err(|e| invalid("labels", e.to_string()))
    };
    let model = match (&spec.payoffs, &spec.goals) {
        (Some(m), None) => Model::Game(build(m, "")?),
        (None, Some(goals)) => {
            if goals.is_empty() {
                return Err(invalid("goals", "needs at least one goal"));
            }
            let games = goals
                .iter()
                .enumerate()
                .map(|(g, m)| build(m, &format!("goal {g}, ")))
                .collect::<Result<Vec<_>>>()?;
            Model::Multi(MultiGame::new(games).map_err(|e| invalid("goals", e.to_string()))?)
        }
        (Some(_), Some(_)) => return Err(invalid("payoffs", "give either payoffs or goals, not both")),
        (None, None) => return Err(invalid("payoffs", "missing payoffs or goals")),
    };
    let (rows, cols) = match &model {
        Model::Game(g) => (g.rows(), g.cols()),
        Model::Multi(m) => (m.rows(), m.cols()),
    };
    if solver.init_row >= rows || solver.init_col >= cols {
        return Err(invalid("solver", "initial play out of range"));
    }
    if let Some(w) = &spec.weights {
        let Model::Multi(mg) = &model else {
            return Err(invalid("weights", "only meaningful with goals"));
        };
        if w.len() != mg.len() || w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(invalid("weights", format!("need {} positive weights", mg.len())));
        }
    }
    Ok(LoadedGame { model, solver, spec })
}

fn matrix_of(g: &Game) -> Matrix {
    (0..g.rows())
        .map(|i| (0..g.cols()).map(|j| DistLiteral::from_dist(g.cell(i, j))).collect())
        .collect()
}

fn overrides_of(o: &GameOptions) -> OrderingOverrides {
    let c = &o.ordering;
    OrderingOverrides {
        k_max: Some(o.k_max),
        moment_tol: Some(c.moment_tol),
        density_tol: Some(c.density_tol),
        support_tol: Some(c.support_tol),
        tail_grid_points: Some(c.tail_grid_points),
        tail_fraction: Some(c.tail_fraction),
        ratio_c: Some(c.ratio_c),
        ratio_window: Some(c.ratio_window),
        ratio_horizon: Some(c.ratio_horizon),
        truncation_levels: Some(c.truncation_levels),
        integer_sweep: Some(c.integer_sweep),
        tail_mass_delta: Some(o.truncation.tail_mass_delta),
        max_support_cap: Some(o.truncation.max_support_cap),
    }
}

fn labels_of(g: &Game) -> Option<Labels> {
    let l = Labels {
        rows: g.row_labels().map(<[String]>::to_vec),
        cols: g.col_labels().map(<[String]>::to_vec),
    };
    (l.rows.is_some() || l.cols.is_some()).then_some(l)
}

/// File description of a game, with every setting spelled out.
pub fn spec_from_game(g: &Game) -> GameSpecFile {
    GameSpecFile {
        version: FORMAT_VERSION,
        copula: CopulaLiteral::from_copula(g.copula()),
        payoffs: Some(matrix_of(g)),
        goals: None,
        weights: None,
        labels: labels_of(g),
        solver: None,
        ordering: Some(overrides_of(g.options())),
    }
}

pub fn spec_from_multi(mg: &MultiGame) -> GameSpecFile {
    let g0 = mg.goal(0);
    GameSpecFile {
        version: FORMAT_VERSION,
        copula: CopulaLiteral::from_copula(g0.copula()),
        payoffs: None,
        goals: Some(mg.goals().iter().map(matrix_of).collect()),
        weights: None,
        labels: labels_of(g0),
        solver: None,
        ordering: Some(overrides_of(g0.options())),
    }
}

pub fn to_json(spec: &GameSpecFile) -> String {
    serde_json::to_string_pretty(spec).expect("game specs always serialize")
}

/// Reads a single distribution literal.
pub fn parse_distribution(path: &Path) -> Result<LossDistribution> {
    parse_distribution_str(&read(path)?)
}

pub fn parse_distribution_str(text: &str) -> Result<LossDistribution> {
    let lit: DistLiteral = serde_json::from_str(text).map_err(parse_error)?;
    lit.build().map_err(|e| invalid("distribution", e.to_string()))
}
