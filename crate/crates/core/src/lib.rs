//! Finite repeated games with exact rational payoffs.
//!
//! The crate models n-player stage games, computes minimax payoffs, runs
//! finite-state reactive strategies, checks type-k coordination equilibria
//! (a group of `k` players following a periodic path enforced by grim
//! trigger while outsiders reply myopically) and describes the payoff
//! space geometrically.
//!
//! ```
//! use typek_core::{fig4, minimax_point, PayoffVector};
//!
//! assert_eq!(minimax_point(&fig4()), PayoffVector::from_ints(&[2, 2, -1]));
//! ```

pub mod equilibrium;
pub mod format;
pub mod game;
pub mod geometry;
mod lp;
pub mod minimax;
pub mod rational;
pub mod simulate;
pub mod strategy;

pub use equilibrium::{
    check_eq4, check_eq5, discount_threshold, enumerate_type_k, stage_ne_stability, stage_pure_ne,
    verify_type_k, DeviationMode, DiscountThreshold, EquilibriumError, VerificationReport,
    VerifyOptions,
};
pub use format::{parse_game, to_document, FormatError};
pub use game::{
    builtin_game, fig1, fig2, fig4, random_integer_game, ActionProfile, GameError, PayoffVector,
    StageGame,
};
pub use geometry::{group_frontier, project_points, GeometryError, ParetoFrontier, PayoffGeometry};
pub use minimax::{
    correlated_minimax_point, correlated_minimax_value, minimax_point, minimax_value, MinimaxKind,
};
pub use rational::{format_rational, parse_rational, Rational};
pub use simulate::{
    coordination_experiment, deterministic_outcome, fig2_convergence_experiment, run,
    SimulationError,
};
pub use strategy::{grim_trigger, CoordinationPlan, ReactiveStrategy, StrategyError};
