//! Opaque identifiers for games, teams and players.

use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! opaque_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

opaque_id!(GameId);
opaque_id!(TeamId);
opaque_id!(PlayerId);

/// A team's five-player unit. Players are kept sorted by id so that the key is
/// independent of the order in which they were observed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LineupKey {
    pub team: TeamId,
    pub players: [PlayerId; 5],
}

impl LineupKey {
    pub fn new(team: TeamId, mut players: [PlayerId; 5]) -> Self {
        players.sort();
        Self { team, players }
    }

    pub fn contains(&self, player: &PlayerId) -> bool {
        self.players.iter().any(|p| p == player)
    }

    /// Stable textual id, `team:p1-p2-p3-p4-p5`.
    pub fn id(&self) -> String {
        let players: Vec<&str> = self.players.iter().map(PlayerId::as_str).collect();
        format!("{}:{}", self.team, players.join("-"))
    }

    /// Parses the form produced by [`LineupKey::id`]; commas are accepted as
    /// player separators too.
    pub fn parse(s: &str) -> Option<Self> {
        let (team, rest) = s.split_once(':')?;
        let ids: Vec<PlayerId> = rest
            .split(['-', ','])
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(PlayerId::from)
            .collect();
        let players: [PlayerId; 5] = ids.try_into().ok()?;
        let key = LineupKey::new(TeamId::from(team.trim()), players);
        let mut distinct = key.players.to_vec();
        distinct.dedup();
        (distinct.len() == 5).then_some(key)
    }
}

impl fmt::Display for LineupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}
