//! Total ordering of loss distributions by their moment sequences, and
//! matrix games whose payoffs are such distributions.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::needless_range_loop)]

pub mod copula;
pub mod dist;
pub mod error;
pub mod game;
pub mod gamefile;
pub mod mgss;
pub mod moments;
pub mod oracle;
pub mod ordering;
pub mod quadrature;
pub mod risk;

pub use copula::{joint_weights, Copula2, CopulaTable, JointCellWeights};
pub use dist::{DistKind, Family, LossDistribution, Parity, Support, TruncationPolicy};
pub use error::{Error, Result};
pub use game::{
    best_response, mixed_payoff, outcome, security_level, solve_zero_sum, verify_exchange, verify_saddle, Game,
    GameOptions, MixedStrategy, SaddleReport, Side, SolveResult, SolverConfig,
};
pub use gamefile::{parse_distribution, parse_game, LoadedGame, Model};
pub use mgss::{build_auxiliary, check_axioms, solve_mgss, AxiomConfig, AxiomReport, MgssResult, MultiGame};
pub use moments::{mix_moments, moment_sequence, moment_sequence_at, MomentSequence, DEFAULT_K_MAX};
pub use oracle::{oracle_compare, oracle_equilibrium, OracleConfig};
pub use ordering::{compare, compare_extended, min_max, DecidedBy, OrderingConfig, PreferenceOutcome, Relation};
pub use risk::{compile_mgss_report, compile_report, emit_plot_data, RiskReport};
