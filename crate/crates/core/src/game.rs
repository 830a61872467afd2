//! Finite n-player stage games.
//!
//! Payoffs are stored as a dense row-major table over joint action profiles:
//! the first declared player is the most significant index, the last player
//! varies fastest.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_traits::Zero;
use rand::Rng;

use crate::rational::{format_vector, int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GameError {
    #[error("a game needs at least two players, got {0}")]
    TooFewPlayers(usize),
    #[error("player `{0}` has no actions")]
    NoActions(String),
    #[error("duplicate player label `{0}`")]
    DuplicatePlayer(String),
    #[error("duplicate action label `{action}` for player `{player}`")]
    DuplicateAction { player: String, action: String },
    #[error("{players} players declared but {action_sets} action sets given")]
    ActionSetCount { players: usize, action_sets: usize },
    #[error("expected {expected} payoff entries, got {found}")]
    PayoffCount { expected: usize, found: usize },
    #[error("payoff vector at `{key}` has length {found}, expected {expected}")]
    PayoffArity {
        key: String,
        expected: usize,
        found: usize,
    },
    #[error("player index {0} out of range")]
    PlayerOutOfRange(usize),
    #[error("action index {action} out of range for player {player}")]
    ActionOutOfRange { player: usize, action: usize },
    #[error("profile has {found} actions, game has {expected} players")]
    ProfileArity { expected: usize, found: usize },
    #[error("unknown player `{0}`")]
    UnknownPlayer(String),
    #[error("unknown action `{action}` for player `{player}`")]
    UnknownAction { player: String, action: String },
}

/// One action index per player, in player order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionProfile(Vec<usize>);

impl ActionProfile {
    pub fn new(actions: Vec<usize>) -> Self {
        ActionProfile(actions)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn action(&self, player: usize) -> usize {
        self.0[player]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Copy with `player`'s action replaced.
    pub fn with(&self, player: usize, action: usize) -> Self {
        let mut v = self.0.clone();
        v[player] = action;
        ActionProfile(v)
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl From<Vec<usize>> for ActionProfile {
    fn from(v: Vec<usize>) -> Self {
        ActionProfile(v)
    }
}

/// One payoff per player, in player order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PayoffVector(Vec<Rational>);

impl PayoffVector {
    pub fn new(values: Vec<Rational>) -> Self {
        PayoffVector(values)
    }

    pub fn from_ints(values: &[i64]) -> Self {
        PayoffVector(values.iter().map(|&v| int(v)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        PayoffVector(vec![Rational::zero(); n])
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    pub fn get(&self, i: usize) -> &Rational {
        &self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<Rational> {
        self.0
    }

    pub fn add_assign(&mut self, other: &PayoffVector) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    pub fn add_scaled(&mut self, other: &PayoffVector, scale: &Rational) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b * scale;
        }
    }

    pub fn scaled(&self, scale: &Rational) -> PayoffVector {
        PayoffVector(self.0.iter().map(|v| v * scale).collect())
    }

    /// Keeps only the coordinates listed in `indices`.
    pub fn select(&self, indices: &[usize]) -> PayoffVector {
        PayoffVector(indices.iter().map(|&i| self.0[i].clone()).collect())
    }
}

impl fmt::Display for PayoffVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_vector(&self.0))
    }
}

/// An immutable finite normal-form game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageGame {
    name: String,
    players: Vec<String>,
    actions: Vec<Vec<String>>,
    payoffs: Vec<PayoffVector>,
    strides: Vec<usize>,
}

impl StageGame {
    /// Builds a game from a row-major payoff table.
    pub fn new(
        name: impl Into<String>,
        players: Vec<String>,
        actions: Vec<Vec<String>>,
        payoffs: Vec<PayoffVector>,
    ) -> Result<Self, GameError> {
        let n = players.len();
        if n < 2 {
            return Err(GameError::TooFewPlayers(n));
        }
        let mut seen = HashSet::new();
        for p in &players {
            if !seen.insert(p.as_str()) {
                return Err(GameError::DuplicatePlayer(p.clone()));
            }
        }
        if actions.len() != n {
            return Err(GameError::ActionSetCount {
                players: n,
                action_sets: actions.len(),
            });
        }
        for (p, acts) in players.iter().zip(&actions) {
            if acts.is_empty() {
                return Err(GameError::NoActions(p.clone()));
            }
            let mut seen = HashSet::new();
            for a in acts {
                if !seen.insert(a.as_str()) {
                    return Err(GameError::DuplicateAction {
                        player: p.clone(),
                        action: a.clone(),
                    });
                }
            }
        }
        let mut strides = vec![1usize; n];
        for i in (0..n - 1).rev() {
            strides[i] = strides[i + 1] * actions[i + 1].len();
        }
        let total = strides[0] * actions[0].len();
        if payoffs.len() != total {
            return Err(GameError::PayoffCount {
                expected: total,
                found: payoffs.len(),
            });
        }
        let game = StageGame {
            name: name.into(),
            players,
            actions,
            payoffs,
            strides,
        };
        for (idx, v) in game.payoffs.iter().enumerate() {
            if v.len() != n {
                return Err(GameError::PayoffArity {
                    key: game.profile_key(&game.profile_at(idx)),
                    expected: n,
                    found: v.len(),
                });
            }
        }
        Ok(game)
    }

    /// Builds a game by evaluating `f` on every profile.
    pub fn from_fn(
        name: impl Into<String>,
        players: Vec<String>,
        actions: Vec<Vec<String>>,
        mut f: impl FnMut(&[usize]) -> PayoffVector,
    ) -> Result<Self, GameError> {
        let sizes: Vec<usize> = actions.iter().map(Vec::len).collect();
        let payoffs = ProfileIter::new(&sizes).map(|p| f(p.as_slice())).collect();
        StageGame::new(name, players, actions, payoffs)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_players(&self) -> usize {
        self.players.len()
    }

    pub fn players(&self) -> &[String] {
        &self.players
    }

    pub fn player_label(&self, i: usize) -> &str {
        &self.players[i]
    }

    pub fn actions(&self, player: usize) -> &[String] {
        &self.actions[player]
    }

    pub fn action_sets(&self) -> &[Vec<String>] {
        &self.actions
    }

    pub fn num_actions(&self, player: usize) -> usize {
        self.actions[player].len()
    }

    pub fn action_counts(&self) -> Vec<usize> {
        self.actions.iter().map(Vec::len).collect()
    }

    pub fn num_profiles(&self) -> usize {
        self.payoffs.len()
    }

    pub fn check_player(&self, player: usize) -> Result<(), GameError> {
        if player < self.num_players() {
            Ok(())
        } else {
            Err(GameError::PlayerOutOfRange(player))
        }
    }

    pub fn check_action(&self, player: usize, action: usize) -> Result<(), GameError> {
        self.check_player(player)?;
        if action < self.num_actions(player) {
            Ok(())
        } else {
            Err(GameError::ActionOutOfRange { player, action })
        }
    }

    pub fn player_index(&self, label: &str) -> Result<usize, GameError> {
        self.players
            .iter()
            .position(|p| p == label)
            .ok_or_else(|| GameError::UnknownPlayer(label.to_string()))
    }

    pub fn action_index(&self, player: usize, label: &str) -> Result<usize, GameError> {
        self.check_player(player)?;
        self.actions[player]
            .iter()
            .position(|a| a == label)
            .ok_or_else(|| GameError::UnknownAction {
                player: self.players[player].clone(),
                action: label.to_string(),
            })
    }

    /// Row-major index of a profile, validating bounds.
    pub fn index_of(&self, profile: &[usize]) -> Result<usize, GameError> {
        if profile.len() != self.num_players() {
            return Err(GameError::ProfileArity {
                expected: self.num_players(),
                found: profile.len(),
            });
        }
        let mut idx = 0;
        for (player, (&a, stride)) in profile.iter().zip(&self.strides).enumerate() {
            if a >= self.num_actions(player) {
                return Err(GameError::ActionOutOfRange { player, action: a });
            }
            idx += a * stride;
        }
        Ok(idx)
    }

    /// Row-major index without bounds checks; callers guarantee validity.
    pub(crate) fn index_unchecked(&self, profile: &[usize]) -> usize {
        profile.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn profile_at(&self, index: usize) -> ActionProfile {
        let mut rest = index;
        let v = self
            .strides
            .iter()
            .map(|&s| {
                let a = rest / s;
                rest %= s;
                a
            })
            .collect();
        ActionProfile(v)
    }

    /// Exact lookup of the payoff vector at `profile`.
    pub fn payoff(&self, profile: &ActionProfile) -> Result<&PayoffVector, GameError> {
        Ok(&self.payoffs[self.index_of(profile.as_slice())?])
    }

    pub(crate) fn payoff_slice(&self, profile: &[usize]) -> &PayoffVector {
        &self.payoffs[self.index_unchecked(profile)]
    }

    pub fn payoff_at(&self, index: usize) -> &PayoffVector {
        &self.payoffs[index]
    }

    pub fn payoff_table(&self) -> &[PayoffVector] {
        &self.payoffs
    }

    /// All profiles in row-major order.
    pub fn profiles(&self) -> ProfileIter {
        ProfileIter::new(&self.action_counts())
    }

    /// All joint actions of the players in `subset` (kept in the given order),
    /// row-major with the first listed player most significant.
    pub fn joint_actions(&self, subset: &[usize]) -> Vec<Vec<usize>> {
        let sizes: Vec<usize> = subset.iter().map(|&p| self.num_actions(p)).collect();
        ProfileIter::new(&sizes)
            .map(ActionProfile::into_vec)
            .collect()
    }

    /// Every player except `player`, in player order.
    pub fn opponents(&self, player: usize) -> Vec<usize> {
        (0..self.num_players()).filter(|&p| p != player).collect()
    }

    /// Joint-profile key, e.g. `D,D,L`.
    pub fn profile_key(&self, profile: &ActionProfile) -> String {
        profile
            .as_slice()
            .iter()
            .enumerate()
            .map(|(p, &a)| self.actions[p][a].as_str())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Inverse of [`StageGame::profile_key`].
    pub fn parse_profile_key(&self, key: &str) -> Result<ActionProfile, GameError> {
        let parts: Vec<&str> = key.split(',').map(str::trim).collect();
        if parts.len() != self.num_players() {
            return Err(GameError::ProfileArity {
                expected: self.num_players(),
                found: parts.len(),
            });
        }
        parts
            .iter()
            .enumerate()
            .map(|(p, label)| self.action_index(p, label))
            .collect::<Result<Vec<_>, _>>()
            .map(ActionProfile)
    }

    /// True iff every payoff vector sums to exactly zero.
    pub fn is_zero_sum(&self) -> bool {
        self.payoffs
            .iter()
            .all(|v| v.values().iter().sum::<Rational>().is_zero())
    }

    /// True iff `dominant` yields `player` a strictly higher payoff than
    /// `dominated` against every opponents' profile.
    pub fn strictly_dominates(&self, player: usize, dominant: usize, dominated: usize) -> bool {
        self.profiles()
            .filter(|p| p.action(player) == dominated)
            .all(|p| {
                let alt = p.with(player, dominant);
                self.payoff_slice(alt.as_slice()).get(player)
                    > self.payoff_slice(p.as_slice()).get(player)
            })
    }

    /// Maximum of `player`'s payoff over their own actions, other actions fixed.
    pub(crate) fn best_reply_value(&self, player: usize, profile: &[usize]) -> (usize, Rational) {
        let mut scratch = profile.to_vec();
        let mut best: Option<(usize, Rational)> = None;
        for a in 0..self.num_actions(player) {
            scratch[player] = a;
            let v = self.payoff_slice(&scratch).get(player);
            if best.as_ref().is_none_or(|(_, b)| v > b) {
                best = Some((a, v.clone()));
            }
        }
        best.expect("every player has at least one action")
    }
}

/// Row-major enumeration of the Cartesian product of `0..sizes[i]`.
#[derive(Debug, Clone)]
pub struct ProfileIter {
    sizes: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl ProfileIter {
    pub fn new(sizes: &[usize]) -> Self {
        let next = if sizes.iter().all(|&s| s > 0) {
            Some(vec![0; sizes.len()])
        } else {
            None
        };
        ProfileIter {
            sizes: sizes.to_vec(),
            next,
        }
    }
}

impl Iterator for ProfileIter {
    type Item = ActionProfile;

    fn next(&mut self) -> Option<ActionProfile> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut i = succ.len();
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            succ[i] += 1;
            if succ[i] < self.sizes[i] {
                self.next = Some(succ);
                break;
            }
            succ[i] = 0;
        }
        Some(ActionProfile(current))
    }
}

fn labels(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// Three-player zero-sum prisoner's dilemma with a police player.
pub fn fig1() -> StageGame {
    // (X, Y, Z) with X, Y in {D, C} and Z in {L, R}
    let table: [[i64; 3]; 8] = [
        [-3, -3, 6],
        [-2, -2, 4],
        [1, -5, 4],
        [2, -4, 2],
        [-5, 1, 4],
        [-4, 2, 2],
        [0, 0, 0],
        [1, 1, -2],
    ];
    StageGame::new(
        "fig1",
        labels(&["X", "Y", "Z"]),
        vec![
            labels(&["D", "C"]),
            labels(&["D", "C"]),
            labels(&["L", "R"]),
        ],
        table.iter().map(|r| PayoffVector::from_ints(r)).collect(),
    )
    .expect("fig1 fixture is valid")
}

/// Two-player pure coordination game with two off-diagonal equilibria.
pub fn fig2() -> StageGame {
    let table: [[i64; 2]; 4] = [[0, 0], [1, 1], [1, 1], [0, 0]];
    StageGame::new(
        "fig2",
        labels(&["Row", "Col"]),
        vec![labels(&["L", "R"]), labels(&["L", "R"])],
        table.iter().map(|r| PayoffVector::from_ints(r)).collect(),
    )
    .expect("fig2 fixture is valid")
}

/// Three-player game where `R` is strictly dominated by `L` for everyone.
pub fn fig4() -> StageGame {
    let table: [[i64; 3]; 8] = [
        [2, 2, 2],
        [2, 2, 1],
        [9, 1, -1],
        [7, 1, -2],
        [1, 9, -1],
        [1, 7, -2],
        [3, 3, 4],
        [4, 4, 3],
    ];
    StageGame::new(
        "fig4",
        labels(&["X", "Y", "Z"]),
        vec![
            labels(&["L", "R"]),
            labels(&["L", "R"]),
            labels(&["L", "R"]),
        ],
        table.iter().map(|r| PayoffVector::from_ints(r)).collect(),
    )
    .expect("fig4 fixture is valid")
}

/// The bundled fixture games keyed by label.
pub fn builtin_games() -> BTreeMap<&'static str, StageGame> {
    BTreeMap::from([("fig1", fig1()), ("fig2", fig2()), ("fig4", fig4())])
}

pub fn builtin_game(label: &str) -> Option<StageGame> {
    match label {
        "fig1" => Some(fig1()),
        "fig2" => Some(fig2()),
        "fig4" => Some(fig4()),
        _ => None,
    }
}

/// Game with integer payoffs drawn uniformly from `low..=high`.
///
/// Players are labelled `P0, P1, ...` and actions `a0, a1, ...`.
pub fn random_integer_game<R: Rng + ?Sized>(
    action_counts: &[usize],
    low: i64,
    high: i64,
    rng: &mut R,
) -> Result<StageGame, GameError> {
    let n = action_counts.len();
    let players = (0..n).map(|i| format!("P{i}")).collect();
    let actions = action_counts
        .iter()
        .map(|&m| (0..m).map(|a| format!("a{a}")).collect())
        .collect();
    StageGame::from_fn("random", players, actions, |_| {
        PayoffVector::new((0..n).map(|_| int(rng.random_range(low..=high))).collect())
    })
}
