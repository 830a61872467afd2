//! Game-description documents.
//!
//! A document is a JSON object:
//!
//! ```json
//! {
//!   "name": "fig2",
//!   "players": ["Row", "Col"],
//!   "actions": [["L", "R"], ["L", "R"]],
//!   "payoffs": { "L,L": [0, 0], "L,R": [1, 1], "R,L": [1, 1], "R,R": ["0", "0/1"] }
//! }
//! ```
//!
//! Payoff numbers are JSON integers or strings holding an integer or a
//! fraction `p/q`. Keys join action labels with `,` in player order.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_traits::ToPrimitive;
use serde::de::{Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::game::{GameError, PayoffVector, StageGame};
use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid document at line {line}, column {column}: {message}")]
    Schema {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing payoff entry for `{0}`")]
    MissingPayoff(String),
    #[error("duplicate payoff key `{0}`")]
    DuplicateKey(String),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("unknown action in payoff key `{0}`")]
    UnknownAction(String),
    #[error("invalid payoff number `{value}` at `{key}`")]
    InvalidNumber { key: String, value: String },
    #[error("invalid game: {0}")]
    Game(GameError),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    name: String,
    players: Vec<String>,
    actions: Vec<Vec<String>>,
    payoffs: RawPayoffs,
}

/// Payoff entries in document order, duplicates preserved.
struct RawPayoffs(Vec<(String, Vec<serde_json::Value>)>);

impl<'de> Deserialize<'de> for RawPayoffs {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct EntriesVisitor;

        impl<'de> Visitor<'de> for EntriesVisitor {
            type Value = RawPayoffs;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object mapping profile keys to payoff arrays")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<RawPayoffs, A::Error> {
                let mut entries = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, Vec<serde_json::Value>>()? {
                    entries.push((k, v));
                }
                Ok(RawPayoffs(entries))
            }
        }

        deserializer.deserialize_map(EntriesVisitor)
    }
}

fn parse_number(key: &str, value: &serde_json::Value) -> Result<Rational, FormatError> {
    let invalid = || FormatError::InvalidNumber {
        key: key.to_string(),
        value: value.to_string(),
    };
    match value {
        serde_json::Value::Number(n) if n.is_i64() || n.is_u64() => {
            parse_rational(&n.to_string()).map_err(|_| invalid())
        }
        serde_json::Value::String(s) if !s.contains('.') => {
            parse_rational(s).map_err(|_| invalid())
        }
        _ => Err(invalid()),
    }
}

/// Parses and validates a game-description document.
pub fn parse_game(text: &str) -> Result<StageGame, FormatError> {
    let raw: RawDocument = serde_json::from_str(text).map_err(|e| {
        let (line, column, message) = (e.line(), e.column(), e.to_string());
        match e.classify() {
            serde_json::error::Category::Data => FormatError::Schema {
                line,
                column,
                message,
            },
            _ => FormatError::Syntax {
                line,
                column,
                message,
            },
        }
    })?;

    let n = raw.players.len();
    let mut seen = HashSet::new();
    for p in &raw.players {
        if !seen.insert(p) {
            return Err(FormatError::DuplicateLabel(p.clone()));
        }
    }
    if raw.actions.len() != n {
        return Err(FormatError::ArityMismatch(format!(
            "{n} players but {} action lists",
            raw.actions.len()
        )));
    }
    for (p, acts) in raw.players.iter().zip(&raw.actions) {
        let mut seen = HashSet::new();
        for a in acts {
            if !seen.insert(a) {
                return Err(FormatError::DuplicateLabel(format!("{p}.{a}")));
            }
        }
    }

    let index: Vec<HashMap<&str, usize>> = raw
        .actions
        .iter()
        .map(|acts| {
            acts.iter()
                .enumerate()
                .map(|(i, a)| (a.as_str(), i))
                .collect()
        })
        .collect();
    let sizes: Vec<usize> = raw.actions.iter().map(Vec::len).collect();
    let total: usize = sizes.iter().product();
    let mut cells: Vec<Option<PayoffVector>> = vec![None; total];

    for (key, values) in &raw.payoffs.0 {
        let parts: Vec<&str> = key.split(',').collect();
        if parts.len() != n {
            return Err(FormatError::ArityMismatch(format!(
                "key `{key}` names {} actions for {n} players",
                parts.len()
            )));
        }
        let mut flat = 0;
        for (p, part) in parts.iter().enumerate() {
            let a = *index[p]
                .get(part)
                .ok_or_else(|| FormatError::UnknownAction(key.clone()))?;
            flat = flat * sizes[p] + a;
        }
        if values.len() != n {
            return Err(FormatError::ArityMismatch(format!(
                "payoff at `{key}` has {} values for {n} players",
                values.len()
            )));
        }
        if cells[flat].is_some() {
            return Err(FormatError::DuplicateKey(key.clone()));
        }
        let vector = values
            .iter()
            .map(|v| parse_number(key, v))
            .collect::<Result<Vec<_>, _>>()?;
        cells[flat] = Some(PayoffVector::new(vector));
    }

    let mut payoffs = Vec::with_capacity(total);
    for (flat, cell) in cells.into_iter().enumerate() {
        match cell {
            Some(v) => payoffs.push(v),
            None => {
                let mut rest = flat;
                let mut labels = vec![""; n];
                for p in (0..n).rev() {
                    labels[p] = raw.actions[p][rest % sizes[p]].as_str();
                    rest /= sizes[p];
                }
                return Err(FormatError::MissingPayoff(labels.join(",")));
            }
        }
    }

    StageGame::new(raw.name, raw.players, raw.actions, payoffs).map_err(FormatError::Game)
}

struct PayoffEntries<'a>(&'a StageGame);

impl Serialize for PayoffEntries<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let game = self.0;
        let mut map = serializer.serialize_map(Some(game.num_profiles()))?;
        for profile in game.profiles() {
            let values: Vec<serde_json::Value> = game
                .payoff_slice(profile.as_slice())
                .values()
                .iter()
                .map(|r| match r.numer().to_i64() {
                    Some(v) if r.is_integer() => serde_json::Value::from(v),
                    _ => serde_json::Value::String(format_rational(r)),
                })
                .collect();
            map.serialize_entry(&game.profile_key(&profile), &values)?;
        }
        map.end()
    }
}

struct Document<'a>(&'a StageGame);

impl Serialize for Document<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let g = self.0;
        let mut s = serializer.serialize_struct("Game", 4)?;
        s.serialize_field("name", g.name())?;
        s.serialize_field("players", g.players())?;
        s.serialize_field("actions", g.action_sets())?;
        s.serialize_field("payoffs", &PayoffEntries(g))?;
        s.end()
    }
}

/// Renders a game as a pretty-printed document, payoff keys in row-major order.
pub fn to_document(game: &StageGame) -> String {
    serde_json::to_string_pretty(&Document(game)).expect("game documents always serialise")
}
