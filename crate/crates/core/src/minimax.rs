//! Minimax payoffs: the lowest payoff the other players can hold a player
//! to when that player best-responds.
//!
//! [`minimax_value`] works over pure opponent profiles and pure replies and
//! also yields the punishment profile and the player's reply to it, which
//! the trigger strategies use as their punishment action.
//! [`correlated_minimax_value`] lets the opponents randomise jointly over
//! their pure profiles and is the value of the zero-sum game between the
//! player and the coalition of everybody else.

use std::fmt;
use std::str::FromStr;

use crate::game::{GameError, PayoffVector, StageGame};
use crate::lp::matrix_game;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimaxResult {
    pub player: usize,
    pub value: Rational,
    /// Opponents' actions achieving the outer minimum, in player order
    /// with `player` left out.
    pub punisher_profile: Vec<usize>,
    /// The player's action achieving the inner maximum against the punishers.
    pub best_reply: usize,
}

impl MinimaxResult {
    /// The full joint profile (punishers plus best reply).
    pub fn profile(&self) -> Vec<usize> {
        let mut full = self.punisher_profile.clone();
        full.insert(self.player, self.best_reply);
        full
    }
}

/// Pure-strategy minimax for `player`.
///
/// Ties go to the lexicographically smallest opponents' profile, then to the
/// smallest own action index.
pub fn minimax_value(game: &StageGame, player: usize) -> Result<MinimaxResult, GameError> {
    game.check_player(player)?;
    let opponents = game.opponents(player);
    let mut best: Option<MinimaxResult> = None;
    for others in game.joint_actions(&opponents) {
        let mut full = others.clone();
        full.insert(player, 0);
        let (reply, value) = game.best_reply_value(player, &full);
        if best.as_ref().is_none_or(|b| value < b.value) {
            best = Some(MinimaxResult {
                player,
                value,
                punisher_profile: others,
                best_reply: reply,
            });
        }
    }
    Ok(best.expect("opponents always have at least one joint action"))
}

/// The minimax payoff profile `(v_1, ..., v_n)` over pure strategies.
pub fn minimax_point(game: &StageGame) -> PayoffVector {
    PayoffVector::new(
        (0..game.num_players())
            .map(|p| minimax_value(game, p).expect("player index in range").value)
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrelatedMinimax {
    pub player: usize,
    pub value: Rational,
    /// Probability on each opponents' joint action, row-major over
    /// [`StageGame::joint_actions`] of the opponents.
    pub punishment: Vec<Rational>,
    /// The player's maximin mixed strategy over own actions.
    pub security_strategy: Vec<Rational>,
}

/// Minimax for `player` against opponents who may correlate their mixing.
pub fn correlated_minimax_value(
    game: &StageGame,
    player: usize,
) -> Result<CorrelatedMinimax, GameError> {
    game.check_player(player)?;
    let opponents = game.opponents(player);
    let columns = game.joint_actions(&opponents);
    let matrix: Vec<Vec<Rational>> = (0..game.num_actions(player))
        .map(|a| {
            columns
                .iter()
                .map(|others| {
                    let mut full = others.clone();
                    full.insert(player, a);
                    game.payoff_slice(&full).get(player).clone()
                })
                .collect()
        })
        .collect();
    let (value, security_strategy, punishment) = matrix_game(&matrix);
    Ok(CorrelatedMinimax {
        player,
        value,
        punishment,
        security_strategy,
    })
}

pub fn correlated_minimax_point(game: &StageGame) -> PayoffVector {
    PayoffVector::new(
        (0..game.num_players())
            .map(|p| {
                correlated_minimax_value(game, p)
                    .expect("player index in range")
                    .value
            })
            .collect(),
    )
}

/// Which minimax notion anchors the equilibrium and folk-region checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MinimaxKind {
    Pure,
    #[default]
    Correlated,
}

impl MinimaxKind {
    pub fn point(self, game: &StageGame) -> PayoffVector {
        match self {
            MinimaxKind::Pure => minimax_point(game),
            MinimaxKind::Correlated => correlated_minimax_point(game),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MinimaxKind::Pure => "pure",
            MinimaxKind::Correlated => "correlated",
        }
    }
}

impl fmt::Display for MinimaxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MinimaxKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pure" => Ok(MinimaxKind::Pure),
            "correlated" | "mixed" => Ok(MinimaxKind::Correlated),
            other => Err(format!(
                "unknown minimax kind `{other}` (expected pure or correlated)"
            )),
        }
    }
}
