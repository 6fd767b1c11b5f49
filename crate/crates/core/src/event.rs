//! Event vocabularies: the raw play-by-play event types and the nine
//! modeled rate metrics built from them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Event type as recorded in a play-by-play row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EventType {
    Shot,
    Miss,
    Block,
    Hit,
    Give,
    Take,
    Goal,
    Fac,
    Other,
}

impl EventType {
    pub const ALL: [EventType; 9] = [
        EventType::Shot,
        EventType::Miss,
        EventType::Block,
        EventType::Hit,
        EventType::Give,
        EventType::Take,
        EventType::Goal,
        EventType::Fac,
        EventType::Other,
    ];

    /// Events that are credited to a team and counted per team-game.
    pub const COUNTED: [EventType; 7] = [
        EventType::Shot,
        EventType::Miss,
        EventType::Block,
        EventType::Hit,
        EventType::Give,
        EventType::Take,
        EventType::Goal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventType::Shot => "SHOT",
            EventType::Miss => "MISS",
            EventType::Block => "BLOCK",
            EventType::Hit => "HIT",
            EventType::Give => "GIVE",
            EventType::Take => "TAKE",
            EventType::Goal => "GOAL",
            EventType::Fac => "FAC",
            EventType::Other => "OTHER",
        }
    }

    /// FAC and OTHER rows may omit the event team.
    pub fn requires_team(self) -> bool {
        !matches!(self, EventType::Fac | EventType::Other)
    }

    /// Position in [`EventType::COUNTED`], if counted.
    pub fn counted_index(self) -> Option<usize> {
        EventType::COUNTED.iter().position(|&e| e == self)
    }
}

impl fmt::Display for EventType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EventType::ALL
            .iter()
            .copied()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown event type `{s}`")))
    }
}

/// A modeled per-team-game rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Metric {
    Shot,
    Miss,
    Block,
    Hit,
    Give,
    Take,
    Corsi,
    Fenwick,
    Turn,
}

impl Metric {
    pub const ALL: [Metric; 9] = [
        Metric::Block,
        Metric::Give,
        Metric::Hit,
        Metric::Miss,
        Metric::Shot,
        Metric::Take,
        Metric::Corsi,
        Metric::Fenwick,
        Metric::Turn,
    ];

    /// Metrics recorded directly as a single event type.
    pub const PRIMITIVE: [Metric; 6] = [
        Metric::Block,
        Metric::Give,
        Metric::Hit,
        Metric::Miss,
        Metric::Shot,
        Metric::Take,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Shot => "SHOT",
            Metric::Miss => "MISS",
            Metric::Block => "BLOCK",
            Metric::Hit => "HIT",
            Metric::Give => "GIVE",
            Metric::Take => "TAKE",
            Metric::Corsi => "CORSI",
            Metric::Fenwick => "FENWICK",
            Metric::Turn => "TURN",
        }
    }

    /// Dense index used for per-metric arrays.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn primitive_event(self) -> Option<EventType> {
        match self {
            Metric::Shot => Some(EventType::Shot),
            Metric::Miss => Some(EventType::Miss),
            Metric::Block => Some(EventType::Block),
            Metric::Hit => Some(EventType::Hit),
            Metric::Give => Some(EventType::Give),
            Metric::Take => Some(EventType::Take),
            Metric::Corsi | Metric::Fenwick | Metric::Turn => None,
        }
    }

    /// Recorded event types that make up one unit of this metric for the
    /// crediting team. TURN is excluded: its giveaway half belongs to the
    /// opponent.
    pub fn credited_events(self) -> Option<&'static [EventType]> {
        match self {
            Metric::Shot => Some(&[EventType::Shot]),
            Metric::Miss => Some(&[EventType::Miss]),
            Metric::Block => Some(&[EventType::Block]),
            Metric::Hit => Some(&[EventType::Hit]),
            Metric::Give => Some(&[EventType::Give]),
            Metric::Take => Some(&[EventType::Take]),
            Metric::Corsi => Some(&[
                EventType::Shot,
                EventType::Miss,
                EventType::Block,
                EventType::Goal,
            ]),
            Metric::Fenwick => Some(&[EventType::Shot, EventType::Miss, EventType::Goal]),
            Metric::Turn => None,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase();
        Metric::ALL
            .iter()
            .copied()
            .find(|m| m.as_str() == upper)
            .ok_or_else(|| Error::InvalidInput(format!("`{s}` is not a modeled rate")))
    }
}
