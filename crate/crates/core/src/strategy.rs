//! Reactive strategies as finite-state machines.
//!
//! A machine emits its initial distribution in round 0. After every round it
//! observes the realised joint profile and moves to a new state; from round 1
//! on it emits the distribution attached to its current state. The machines
//! built here for group members and outsiders only ever inspect the other
//! players' components of the observation. The coordination machines for
//! the two-player coordination game also read their own realised action,
//! since their rule conditions on the last joint outcome.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::game::{GameError, StageGame};
use crate::minimax::minimax_value;
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StrategyError {
    #[error("a coordination group needs at least two members, got {0}")]
    GroupTooSmall(usize),
    #[error("player {0} listed twice in the group")]
    DuplicateMember(usize),
    #[error("coordination path is empty")]
    EmptyPath,
    #[error("path phase {phase} has {found} actions for a group of {expected}")]
    PhaseArity {
        phase: usize,
        expected: usize,
        found: usize,
    },
    #[error("player {0} is not a member of the coordination group")]
    NotMember(usize),
    #[error("player {0} belongs to the coordination group")]
    IsMember(usize),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("strategy does not fit the game: {0}")]
    ShapeMismatch(String),
    #[error("unknown strategy preset `{0}`")]
    UnknownPreset(String),
    #[error("preset `{0}` needs a coordination plan")]
    NeedsPlan(String),
    #[error("invalid path spec `{0}`")]
    PathSpec(String),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// A probability distribution over a player's own actions with exact weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution {
    weights: Vec<Rational>,
    thresholds: Vec<u64>,
    total: u64,
}

impl Distribution {
    pub fn new(weights: Vec<Rational>) -> Result<Self, StrategyError> {
        if weights.is_empty() {
            return Err(StrategyError::InvalidDistribution("no actions".into()));
        }
        if weights.iter().any(Signed::is_negative) {
            return Err(StrategyError::InvalidDistribution("negative weight".into()));
        }
        let sum: Rational = weights.iter().sum();
        if !sum.is_one() {
            return Err(StrategyError::InvalidDistribution(format!(
                "weights sum to {}",
                format_rational(&sum)
            )));
        }
        let lcm = weights
            .iter()
            .fold(num_bigint::BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let total = lcm.to_u64().ok_or_else(|| {
            StrategyError::InvalidDistribution("denominators too large to sample".into())
        })?;
        let mut acc = 0u64;
        let thresholds = weights
            .iter()
            .map(|w| {
                let scaled = w.numer() * (&lcm / w.denom());
                acc += scaled.to_u64().expect("bounded by the common denominator");
                acc
            })
            .collect();
        Ok(Distribution {
            weights,
            thresholds,
            total,
        })
    }

    pub fn point(num_actions: usize, action: usize) -> Self {
        let weights = (0..num_actions)
            .map(|a| {
                if a == action {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect();
        Distribution::new(weights).expect("point mass is a valid distribution")
    }

    pub fn uniform(num_actions: usize) -> Self {
        let w = Rational::new(1.into(), (num_actions as u64).into());
        Distribution::new(vec![w; num_actions]).expect("uniform is a valid distribution")
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn probability(&self, action: usize) -> &Rational {
        &self.weights[action]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// The action carrying all the mass, if there is one.
    pub fn as_point(&self) -> Option<usize> {
        self.weights.iter().position(One::is_one)
    }

    /// Draws an action; point masses consume no randomness.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if let Some(a) = self.as_point() {
            return a;
        }
        let r = rng.random_range(0..self.total);
        self.thresholds
            .iter()
            .position(|&t| r < t)
            .expect("thresholds end at total")
    }
}

/// A finite-state reactive strategy for one player of a given game shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReactiveStrategy {
    player: usize,
    label: String,
    initial: Distribution,
    start: usize,
    state_names: Vec<String>,
    emissions: Vec<Distribution>,
    /// `transitions[state][joint profile index]`
    transitions: Vec<Vec<usize>>,
}

impl ReactiveStrategy {
    pub fn new(
        player: usize,
        label: impl Into<String>,
        initial: Distribution,
        start: usize,
        state_names: Vec<String>,
        emissions: Vec<Distribution>,
        transitions: Vec<Vec<usize>>,
    ) -> Result<Self, StrategyError> {
        let states = emissions.len();
        if states == 0 || state_names.len() != states || transitions.len() != states {
            return Err(StrategyError::ShapeMismatch(
                "state tables disagree in size".into(),
            ));
        }
        if start >= states {
            return Err(StrategyError::ShapeMismatch(format!(
                "start state {start} out of range"
            )));
        }
        let num_actions = initial.len();
        if emissions.iter().any(|e| e.len() != num_actions) {
            return Err(StrategyError::ShapeMismatch(
                "emission over a different action count".into(),
            ));
        }
        let profiles = transitions[0].len();
        if transitions
            .iter()
            .any(|row| row.len() != profiles || row.iter().any(|&s| s >= states))
        {
            return Err(StrategyError::ShapeMismatch(
                "transition table is not total".into(),
            ));
        }
        Ok(ReactiveStrategy {
            player,
            label: label.into(),
            initial,
            start,
            state_names,
            emissions,
            transitions,
        })
    }

    pub fn player(&self) -> usize {
        self.player
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn initial(&self) -> &Distribution {
        &self.initial
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn num_states(&self) -> usize {
        self.emissions.len()
    }

    pub fn state_name(&self, state: usize) -> &str {
        &self.state_names[state]
    }

    pub fn emission(&self, state: usize) -> &Distribution {
        &self.emissions[state]
    }

    pub fn next_state(&self, state: usize, observed_profile: usize) -> usize {
        self.transitions[state][observed_profile]
    }

    /// True iff every emission (and the initial action) is a point mass.
    pub fn is_deterministic(&self) -> bool {
        self.initial.as_point().is_some() && self.emissions.iter().all(|e| e.as_point().is_some())
    }

    pub fn fits(&self, game: &StageGame) -> Result<(), StrategyError> {
        if self.player >= game.num_players() {
            return Err(StrategyError::Game(GameError::PlayerOutOfRange(
                self.player,
            )));
        }
        if self.initial.len() != game.num_actions(self.player) {
            return Err(StrategyError::ShapeMismatch(format!(
                "`{}` emits over {} actions, player {} has {}",
                self.label,
                self.initial.len(),
                self.player,
                game.num_actions(self.player)
            )));
        }
        if self.transitions[0].len() != game.num_profiles() {
            return Err(StrategyError::ShapeMismatch(format!(
                "`{}` observes {} profiles, game has {}",
                self.label,
                self.transitions[0].len(),
                game.num_profiles()
            )));
        }
        Ok(())
    }

    /// Same machine, started in `state` and emitting that state's
    /// distribution in round 0.
    pub fn starting_in(&self, state: usize) -> Result<Self, StrategyError> {
        if state >= self.num_states() {
            return Err(StrategyError::ShapeMismatch(format!(
                "state {state} out of range"
            )));
        }
        let mut s = self.clone();
        s.start = state;
        s.initial = self.emissions[state].clone();
        Ok(s)
    }

    pub fn runner(&self) -> StrategyRunner<'_> {
        StrategyRunner {
            strategy: self,
            state: self.start,
            started: false,
        }
    }
}

/// Mutable execution state of one machine during a run.
#[derive(Debug, Clone)]
pub struct StrategyRunner<'a> {
    strategy: &'a ReactiveStrategy,
    state: usize,
    started: bool,
}

impl StrategyRunner<'_> {
    pub fn current_distribution(&self) -> &Distribution {
        if self.started {
            &self.strategy.emissions[self.state]
        } else {
            &self.strategy.initial
        }
    }

    pub fn act<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.current_distribution().sample(rng)
    }

    pub fn observe(&mut self, profile_index: usize) {
        self.state = self.strategy.next_state(self.state, profile_index);
        self.started = true;
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn has_started(&self) -> bool {
        self.started
    }
}

/// A group `K` and the periodic joint path its members follow.
///
/// The group is kept in ascending player order; `path[phase][m]` is the
/// action of the `m`-th member. The path is stored in minimal period form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoordinationPlan {
    group: Vec<usize>,
    path: Vec<Vec<usize>>,
}

impl CoordinationPlan {
    pub fn new(group: Vec<usize>, path: Vec<Vec<usize>>) -> Result<Self, StrategyError> {
        if group.len() < 2 {
            return Err(StrategyError::GroupTooSmall(group.len()));
        }
        if path.is_empty() {
            return Err(StrategyError::EmptyPath);
        }
        for (phase, actions) in path.iter().enumerate() {
            if actions.len() != group.len() {
                return Err(StrategyError::PhaseArity {
                    phase,
                    expected: group.len(),
                    found: actions.len(),
                });
            }
        }
        let mut order: Vec<usize> = (0..group.len()).collect();
        order.sort_by_key(|&m| group[m]);
        for w in order.windows(2) {
            if group[w[0]] == group[w[1]] {
                return Err(StrategyError::DuplicateMember(group[w[0]]));
            }
        }
        let sorted_group = order.iter().map(|&m| group[m]).collect();
        let sorted_path: Vec<Vec<usize>> = path
            .iter()
            .map(|phase| order.iter().map(|&m| phase[m]).collect())
            .collect();
        let p = minimal_period(&sorted_path);
        Ok(CoordinationPlan {
            group: sorted_group,
            path: sorted_path[..p].to_vec(),
        })
    }

    /// Parses labels: `group` like `X,Y` and `path` like `L,R|R,L`, with
    /// member actions aligned to the order of `group`.
    pub fn parse(game: &StageGame, group: &str, path: &str) -> Result<Self, StrategyError> {
        let members = group
            .split(',')
            .map(|s| game.player_index(s.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        let phases = path
            .split('|')
            .map(|phase| {
                let labels: Vec<&str> = phase.split(',').map(str::trim).collect();
                if labels.len() != members.len() {
                    return Err(StrategyError::PathSpec(path.to_string()));
                }
                labels
                    .iter()
                    .zip(&members)
                    .map(|(label, &m)| game.action_index(m, label).map_err(StrategyError::from))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let plan = CoordinationPlan::new(members, phases)?;
        plan.validate(game)?;
        Ok(plan)
    }

    pub fn validate(&self, game: &StageGame) -> Result<(), StrategyError> {
        for phase in &self.path {
            for (&player, &action) in self.group.iter().zip(phase) {
                game.check_action(player, action)?;
            }
        }
        Ok(())
    }

    pub fn group(&self) -> &[usize] {
        &self.group
    }

    pub fn path(&self) -> &[Vec<usize>] {
        &self.path
    }

    pub fn period(&self) -> usize {
        self.path.len()
    }

    pub fn phase(&self, t: usize) -> &[usize] {
        &self.path[t % self.path.len()]
    }

    pub fn position(&self, player: usize) -> Option<usize> {
        self.group.iter().position(|&p| p == player)
    }

    pub fn contains(&self, player: usize) -> bool {
        self.position(player).is_some()
    }

    pub fn outsiders(&self, num_players: usize) -> Vec<usize> {
        (0..num_players).filter(|p| !self.contains(*p)).collect()
    }

    /// The lexicographically smallest rotation of the path.
    pub fn canonical_path(&self) -> Vec<Vec<usize>> {
        least_rotation(&self.path)
    }

    /// Human-readable path, e.g. `L,R|R,L`.
    pub fn path_label(&self, game: &StageGame) -> String {
        self.path
            .iter()
            .map(|phase| {
                phase
                    .iter()
                    .zip(&self.group)
                    .map(|(&a, &p)| game.actions(p)[a].as_str())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join("|")
    }

    pub fn group_label(&self, game: &StageGame) -> String {
        self.group
            .iter()
            .map(|&p| game.player_label(p))
            .collect::<Vec<_>>()
            .join(",")
    }
}

pub(crate) fn minimal_period<T: PartialEq>(path: &[T]) -> usize {
    let n = path.len();
    (1..=n)
        .find(|&p| n.is_multiple_of(p) && (0..n).all(|i| path[i] == path[i % p]))
        .unwrap_or(n)
}

pub(crate) fn least_rotation<T: Ord + Clone>(path: &[T]) -> Vec<T> {
    let n = path.len();
    (0..n)
        .map(|r| {
            path[r..]
                .iter()
                .chain(&path[..r])
                .cloned()
                .collect::<Vec<T>>()
        })
        .min()
        .unwrap_or_default()
}

/// Full joint profile at every phase: members follow `path`, outsiders
/// resolve in player order, each a myopic best reply to the members'
/// actions and the outsiders before them (later outsiders start at action
/// 0). Ties go to the smallest action index.
pub fn phase_profiles(game: &StageGame, group: &[usize], path: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let outsiders: Vec<usize> = (0..game.num_players())
        .filter(|p| !group.contains(p))
        .collect();
    path.iter()
        .map(|phase| {
            let mut full = vec![0; game.num_players()];
            for (&p, &a) in group.iter().zip(phase) {
                full[p] = a;
            }
            for &o in &outsiders {
                full[o] = game.best_reply_value(o, &full).0;
            }
            full
        })
        .collect()
}

fn names(prefix: &str, count: usize) -> Vec<String> {
    (0..count).map(|j| format!("{prefix}{j}")).collect()
}

/// Grim-trigger enforcement of `plan` for `member`.
///
/// States `0..p` follow the path; state `p` punishes. Any observed departure
/// of another member from the current phase moves to punishment, which
/// emits the member's minimax best reply forever. Outsiders are ignored.
pub fn grim_trigger(
    game: &StageGame,
    plan: &CoordinationPlan,
    member: usize,
) -> Result<ReactiveStrategy, StrategyError> {
    plan.validate(game)?;
    let pos = plan
        .position(member)
        .ok_or(StrategyError::NotMember(member))?;
    let p = plan.period();
    let m = game.num_actions(member);
    let punish_action = minimax_value(game, member)?.best_reply;

    let mut emissions: Vec<Distribution> = plan
        .path()
        .iter()
        .map(|phase| Distribution::point(m, phase[pos]))
        .collect();
    emissions.push(Distribution::point(m, punish_action));

    let mut transitions = vec![vec![p; game.num_profiles()]; p + 1];
    for (j, row) in transitions.iter_mut().enumerate().take(p) {
        let expected = plan.phase(j);
        for (idx, profile) in game.profiles().enumerate() {
            let conforming = plan
                .group()
                .iter()
                .zip(expected)
                .all(|(&q, &a)| q == member || profile.action(q) == a);
            if conforming {
                row[idx] = (j + 1) % p;
            }
        }
    }
    let mut state_names = names("path", p);
    state_names.push("punish".into());
    ReactiveStrategy::new(
        member,
        format!("grim[{}]", plan.path_label(game)),
        emissions[0].clone(),
        0,
        state_names,
        emissions,
        transitions,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordinationSide {
    Row,
    Column,
}

/// States of the coordination machines.
pub const UNCOORDINATED: usize = 0;
pub const LOCKED_LR: usize = 1;
pub const LOCKED_RL: usize = 2;

/// Coordination machine for the 2x2 coordination game.
///
/// After a round that ended in `(L, R)` the row player plays `L` and the
/// column player `R`; after `(R, L)` they play `R` and `L`; after anything
/// else both randomise uniformly.
pub fn fig2_coordinator(side: CoordinationSide) -> ReactiveStrategy {
    const L: usize = 0;
    const R: usize = 1;
    let (player, locked_lr, locked_rl) = match side {
        CoordinationSide::Row => (0, L, R),
        CoordinationSide::Column => (1, R, L),
    };
    let emissions = vec![
        Distribution::uniform(2),
        Distribution::point(2, locked_lr),
        Distribution::point(2, locked_rl),
    ];
    // observed profile index = 2 * row + col
    let row = [UNCOORDINATED, LOCKED_LR, LOCKED_RL, UNCOORDINATED];
    ReactiveStrategy::new(
        player,
        match side {
            CoordinationSide::Row => "fig2row",
            CoordinationSide::Column => "fig2col",
        },
        Distribution::uniform(2),
        UNCOORDINATED,
        vec![
            "uncoordinated".into(),
            "locked(L,R)".into(),
            "locked(R,L)".into(),
        ],
        emissions,
        vec![row.to_vec(); 3],
    )
    .expect("coordination machine tables are consistent")
}

/// Single-state machine that always plays `action`.
pub fn constant_strategy(
    game: &StageGame,
    player: usize,
    action: usize,
) -> Result<ReactiveStrategy, StrategyError> {
    game.check_action(player, action)?;
    let d = Distribution::point(game.num_actions(player), action);
    ReactiveStrategy::new(
        player,
        format!("const:{}", game.actions(player)[action]),
        d.clone(),
        0,
        vec!["const".into()],
        vec![d],
        vec![vec![0; game.num_profiles()]],
    )
}

/// Plays `actions` cyclically, ignoring observations.
pub fn cyclic_strategy(
    game: &StageGame,
    player: usize,
    actions: &[usize],
) -> Result<ReactiveStrategy, StrategyError> {
    if actions.is_empty() {
        return Err(StrategyError::EmptyPath);
    }
    for &a in actions {
        game.check_action(player, a)?;
    }
    let m = game.num_actions(player);
    let p = actions.len();
    let emissions: Vec<Distribution> = actions.iter().map(|&a| Distribution::point(m, a)).collect();
    let transitions = (0..p)
        .map(|j| vec![(j + 1) % p; game.num_profiles()])
        .collect();
    let label = actions
        .iter()
        .map(|&a| game.actions(player)[a].as_str())
        .collect::<Vec<_>>()
        .join("|");
    ReactiveStrategy::new(
        player,
        format!("path:{label}"),
        emissions[0].clone(),
        0,
        names("phase", p),
        emissions,
        transitions,
    )
}

/// Outsider that best-responds, phase by phase, to the group's path.
pub fn myopic_best_responder(
    game: &StageGame,
    player: usize,
    plan: &CoordinationPlan,
) -> Result<ReactiveStrategy, StrategyError> {
    game.check_player(player)?;
    plan.validate(game)?;
    if plan.contains(player) {
        return Err(StrategyError::IsMember(player));
    }
    let actions: Vec<usize> = phase_profiles(game, plan.group(), plan.path())
        .iter()
        .map(|full| full[player])
        .collect();
    let mut s = cyclic_strategy(game, player, &actions)?;
    s.label = format!("myopic[{}]", plan.path_label(game));
    Ok(s)
}

/// Named strategy presets accepted on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StrategyPreset {
    Grim,
    Fig2Row,
    Fig2Col,
    Const(String),
    Myopic,
    Path(Vec<String>),
}

impl FromStr for StrategyPreset {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, StrategyError> {
        let s = s.trim();
        Ok(match s {
            "grim" => StrategyPreset::Grim,
            "fig2row" => StrategyPreset::Fig2Row,
            "fig2col" => StrategyPreset::Fig2Col,
            "myopic" => StrategyPreset::Myopic,
            _ => {
                if let Some(a) = s.strip_prefix("const:") {
                    StrategyPreset::Const(a.to_string())
                } else if let Some(p) = s.strip_prefix("path:") {
                    StrategyPreset::Path(p.split('|').map(|a| a.trim().to_string()).collect())
                } else {
                    return Err(StrategyError::UnknownPreset(s.to_string()));
                }
            }
        })
    }
}

impl fmt::Display for StrategyPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyPreset::Grim => f.write_str("grim"),
            StrategyPreset::Fig2Row => f.write_str("fig2row"),
            StrategyPreset::Fig2Col => f.write_str("fig2col"),
            StrategyPreset::Myopic => f.write_str("myopic"),
            StrategyPreset::Const(a) => write!(f, "const:{a}"),
            StrategyPreset::Path(p) => write!(f, "path:{}", p.join("|")),
        }
    }
}

impl StrategyPreset {
    pub fn build(
        &self,
        game: &StageGame,
        player: usize,
        plan: Option<&CoordinationPlan>,
    ) -> Result<ReactiveStrategy, StrategyError> {
        let need_plan = || plan.ok_or_else(|| StrategyError::NeedsPlan(self.to_string()));
        match self {
            StrategyPreset::Grim => grim_trigger(game, need_plan()?, player),
            StrategyPreset::Myopic => myopic_best_responder(game, player, need_plan()?),
            StrategyPreset::Const(a) => {
                constant_strategy(game, player, game.action_index(player, a)?)
            }
            StrategyPreset::Path(labels) => {
                let actions = labels
                    .iter()
                    .map(|a| game.action_index(player, a))
                    .collect::<Result<Vec<_>, _>>()?;
                cyclic_strategy(game, player, &actions)
            }
            StrategyPreset::Fig2Row | StrategyPreset::Fig2Col => {
                let side = if *self == StrategyPreset::Fig2Row {
                    CoordinationSide::Row
                } else {
                    CoordinationSide::Column
                };
                let s = fig2_coordinator(side);
                if s.player() != player {
                    return Err(StrategyError::ShapeMismatch(format!(
                        "{self} plays as player {}",
                        s.player()
                    )));
                }
                s.fits(game)?;
                Ok(s)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{fig1, fig2, fig4};
    use crate::rational::ratio;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn state_after(s: &ReactiveStrategy, observations: &[usize]) -> usize {
        let mut r = s.runner();
        for &o in observations {
            r.observe(o);
        }
        r.state()
    }

    #[test]
    fn grim_fig1_two_states() {
        let g = fig1();
        let plan = CoordinationPlan::parse(&g, "X,Y", "C,C").unwrap();
        let s = grim_trigger(&g, &plan, 0).unwrap();
        assert_eq!(s.num_states(), 2);
        let cc_l = g.index_of(&[1, 1, 0]).unwrap();
        let cc_r = g.index_of(&[1, 1, 1]).unwrap();
        let cd_l = g.index_of(&[1, 0, 0]).unwrap();
        assert_eq!(
            s.emission(state_after(&s, &[cc_l, cc_r])).as_point(),
            Some(1)
        );
        let punished = state_after(&s, &[cc_l, cd_l]);
        assert_eq!(s.state_name(punished), "punish");
        assert_eq!(s.emission(punished).as_point(), Some(0));
        // absorbing, even if Y returns to C
        assert_eq!(state_after(&s, &[cd_l, cc_l, cc_l]), punished);
    }

    #[test]
    fn grim_fig4_alternating_three_states() {
        let g = fig4();
        let plan = CoordinationPlan::parse(&g, "X,Y", "L,R|R,L").unwrap();
        let s = grim_trigger(&g, &plan, 0).unwrap();
        assert_eq!(s.num_states(), 3);
        assert_eq!(s.emission(0).as_point(), Some(0));
        assert_eq!(s.emission(1).as_point(), Some(1));
        assert_eq!(s.emission(2).as_point(), Some(0));
        let lr_l = g.index_of(&[0, 1, 0]).unwrap();
        let rl_r = g.index_of(&[1, 0, 1]).unwrap();
        assert_eq!(state_after(&s, &[lr_l]), 1);
        assert_eq!(state_after(&s, &[lr_l, rl_r]), 0);
        assert_eq!(state_after(&s, &[lr_l, lr_l]), 2);
    }

    #[test]
    fn grim_path_equal_to_punishment() {
        let g = fig1();
        let plan = CoordinationPlan::parse(&g, "X,Y", "D,D").unwrap();
        let s = grim_trigger(&g, &plan, 0).unwrap();
        assert_eq!(s.emission(0), s.emission(1));
    }

    #[test]
    fn trigger_machines_ignore_own_and_outsider_actions() {
        let g = fig4();
        let plan = CoordinationPlan::parse(&g, "X,Y", "L,R|R,L").unwrap();
        let s = grim_trigger(&g, &plan, 0).unwrap();
        for state in 0..s.num_states() {
            for p in g.profiles() {
                let base = s.next_state(state, g.index_of(p.as_slice()).unwrap());
                for own in 0..2 {
                    for z in 0..2 {
                        let q = p.with(0, own).with(2, z);
                        assert_eq!(s.next_state(state, g.index_of(q.as_slice()).unwrap()), base);
                    }
                }
            }
        }
    }

    #[test]
    fn grim_rejects_outsiders() {
        let g = fig1();
        let plan = CoordinationPlan::parse(&g, "X,Y", "C,C").unwrap();
        assert_eq!(grim_trigger(&g, &plan, 2), Err(StrategyError::NotMember(2)));
        assert_eq!(
            myopic_best_responder(&g, 0, &plan),
            Err(StrategyError::IsMember(0))
        );
    }

    #[test]
    fn fig2_rules() {
        let row = fig2_coordinator(CoordinationSide::Row);
        let col = fig2_coordinator(CoordinationSide::Column);
        let lr = 1;
        let rl = 2;
        let ll = 0;
        assert_eq!(row.emission(state_after(&row, &[lr])).as_point(), Some(0));
        assert_eq!(col.emission(state_after(&col, &[rl])).as_point(), Some(0));
        let d = row.emission(state_after(&row, &[ll]));
        assert_eq!(d.weights(), &[ratio(1, 2), ratio(1, 2)]);
        assert!(row.fits(&fig2()).is_ok());
    }

    #[test]
    fn constant_machines() {
        let g4 = fig4();
        assert_eq!(
            constant_strategy(&g4, 2, 0).unwrap().emission(0).as_point(),
            Some(0)
        );
        let g1 = fig1();
        let z = constant_strategy(&g1, 2, 1).unwrap();
        assert_eq!(z.num_states(), 1);
        assert_eq!(z.initial().as_point(), Some(1));
        assert!(constant_strategy(&g1, 2, 2).is_err());
        let g2 = fig2();
        assert_eq!(constant_strategy(&g2, 0, 0).unwrap().label(), "const:L");
    }

    #[test]
    fn myopic_outsiders() {
        let g4 = fig4();
        let rr = CoordinationPlan::parse(&g4, "X,Y", "R,R").unwrap();
        let z = myopic_best_responder(&g4, 2, &rr).unwrap();
        assert_eq!(z.emission(0).as_point(), Some(0));
        let alt = CoordinationPlan::parse(&g4, "X,Y", "L,R|R,L").unwrap();
        let z = myopic_best_responder(&g4, 2, &alt).unwrap();
        assert_eq!(z.num_states(), 2);
        assert!((0..2).all(|s| z.emission(s).as_point() == Some(0)));
        let g1 = fig1();
        let cc = CoordinationPlan::parse(&g1, "X,Y", "C,C").unwrap();
        assert_eq!(
            myopic_best_responder(&g1, 2, &cc)
                .unwrap()
                .emission(0)
                .as_point(),
            Some(0)
        );
    }

    #[test]
    fn plan_normalisation() {
        let g = fig4();
        let plan = CoordinationPlan::parse(&g, "Y,X", "R,L|L,R|R,L|L,R").unwrap();
        assert_eq!(plan.group(), &[0, 1]);
        // (Y,X) = (R,L) is (X,Y) = (L,R)
        assert_eq!(plan.path(), &[vec![0, 1], vec![1, 0]]);
        let shifted = CoordinationPlan::parse(&g, "X,Y", "R,L|L,R").unwrap();
        assert_eq!(shifted.canonical_path(), vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(plan.path_label(&g), "L,R|R,L");
        assert!(matches!(
            CoordinationPlan::new(vec![0], vec![vec![0]]),
            Err(StrategyError::GroupTooSmall(1))
        ));
        assert!(matches!(
            CoordinationPlan::new(vec![0, 0], vec![vec![0, 0]]),
            Err(StrategyError::DuplicateMember(0))
        ));
        assert!(matches!(
            CoordinationPlan::new(vec![0, 1], vec![]),
            Err(StrategyError::EmptyPath)
        ));
        assert!(CoordinationPlan::parse(&g, "X,Y", "L").is_err());
    }

    #[test]
    fn presets_parse_and_build() {
        let g = fig1();
        let plan = CoordinationPlan::parse(&g, "X,Y", "C,C").unwrap();
        for (spec, player) in [("grim", 0), ("myopic", 2), ("const:R", 2), ("path:L|R", 2)] {
            let preset: StrategyPreset = spec.parse().unwrap();
            assert_eq!(preset.to_string(), spec);
            preset.build(&g, player, Some(&plan)).unwrap();
        }
        assert!(matches!(
            "grim".parse::<StrategyPreset>().unwrap().build(&g, 0, None),
            Err(StrategyError::NeedsPlan(_))
        ));
        assert!(matches!(
            "tft".parse::<StrategyPreset>(),
            Err(StrategyError::UnknownPreset(_))
        ));
        assert!("fig2row"
            .parse::<StrategyPreset>()
            .unwrap()
            .build(&fig2(), 0, None)
            .is_ok());
        assert!("fig2row"
            .parse::<StrategyPreset>()
            .unwrap()
            .build(&g, 0, None)
            .is_err());
    }

    #[test]
    fn distribution_sampling_is_exact_and_seeded() {
        let d = Distribution::new(vec![ratio(1, 3), ratio(2, 3)]).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        let xs: Vec<usize> = (0..50).map(|_| d.sample(&mut a)).collect();
        let ys: Vec<usize> = (0..50).map(|_| d.sample(&mut b)).collect();
        assert_eq!(xs, ys);
        assert!(xs.contains(&0) && xs.contains(&1));
        assert!(Distribution::new(vec![ratio(1, 2), ratio(1, 3)]).is_err());
        assert!(Distribution::new(vec![ratio(3, 2), ratio(-1, 2)]).is_err());
    }
}
