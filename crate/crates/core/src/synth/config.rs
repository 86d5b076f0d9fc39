use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::court::{CourtGrid, CellIndex};
use crate::error::{Error, Result};
use crate::ids::{LineupKey, PlayerId, TeamId};
use crate::metrics::LINEUP_SIZE;

/// Logistic make probability in hoop distance:
/// `xi(d) = 1 / (1 + exp(-(intercept + offset + slope * d)))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FgpCurve {
    pub intercept: f64,
    pub slope: f64,
}

impl Default for FgpCurve {
    fn default() -> Self {
        FgpCurve {
            intercept: 0.3,
            slope: -0.035,
        }
    }
}

/// Per-player deviations from the league curve. Missing fields inherit it.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlayerCurve {
    pub offset: f64,
    pub intercept: Option<f64>,
    pub slope: Option<f64>,
}

/// How a lineup's attempts in a cell are split among its players, keyed on
/// the players' true FG% ranks in that cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AllocationPolicy {
    /// Better shooters take more shots.
    RankMatched,
    /// Better shooters take fewer shots.
    Inverted,
    /// Every attempt goes to a uniformly chosen player.
    Random,
    /// Share by FG% rank, best first. Normalized internally.
    Custom(Vec<f64>),
}

pub(crate) const MATCHED_WEIGHTS: [f64; LINEUP_SIZE] = [0.35, 0.25, 0.2, 0.12, 0.08];

impl AllocationPolicy {
    /// Per-rank weights, or `None` for per-shot random assignment.
    pub(crate) fn rank_weights(&self) -> Option<[f64; LINEUP_SIZE]> {
        match self {
            AllocationPolicy::RankMatched => Some(MATCHED_WEIGHTS),
            AllocationPolicy::Inverted => {
                let mut w = MATCHED_WEIGHTS;
                w.reverse();
                Some(w)
            }
            AllocationPolicy::Random => None,
            AllocationPolicy::Custom(w) => {
                let total: f64 = w.iter().sum();
                Some(std::array::from_fn(|k| w[k] / total))
            }
        }
    }
}

/// Where shots come from: weights of the rim, mid-range and three-point zones.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocationMixture {
    pub rim: f64,
    pub mid: f64,
    pub three: f64,
    /// Three-point attempts are drawn from cells no deeper than this.
    pub max_three_distance: f64,
}

impl Default for LocationMixture {
    fn default() -> Self {
        LocationMixture {
            rim: 0.35,
            mid: 0.25,
            three: 0.40,
            max_three_distance: 26.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineupSpec {
    pub players: [String; LINEUP_SIZE],
    /// Season minutes for this unit.
    pub minutes: f64,
    /// Season field-goal attempts for this unit.
    pub shots: usize,
    pub policy: AllocationPolicy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TeamSpec {
    pub id: String,
    pub lineups: Vec<LineupSpec>,
    /// Offense and defense effects for the game model; drawn when absent.
    #[serde(default)]
    pub offense: Option<f64>,
    #[serde(default)]
    pub defense: Option<f64>,
}

/// Truth for simulated scores.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GameModel {
    pub mu: f64,
    pub gamma: f64,
    pub theta: f64,
    pub sigma: f64,
    /// Standard deviation for team effects not given explicitly.
    pub team_sd: f64,
}

impl Default for GameModel {
    fn default() -> Self {
        GameModel {
            mu: 100.0,
            gamma: 2.0,
            theta: -0.62,
            sigma: 10.0,
            team_sd: 4.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    /// Full round-robins; every team plays `rounds * (teams - 1)` games.
    pub rounds: usize,
    #[serde(default)]
    pub curve: FgpCurve,
    #[serde(default)]
    pub players: BTreeMap<String, PlayerCurve>,
    #[serde(default)]
    pub mixture: LocationMixture,
    pub teams: Vec<TeamSpec>,
    #[serde(default)]
    pub game_model: Option<GameModel>,
}

pub(crate) const GAME_MINUTES: f64 = 48.0;

impl SynthConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SynthConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Two teams, two lineups each, ten games apiece: one efficient and one
    /// inverted starting unit.
    pub fn example(seed: u64) -> Self {
        let lineup = |ids: [&str; 5], minutes: f64, shots: usize, policy| LineupSpec {
            players: ids.map(str::to_owned),
            minutes,
            shots,
            policy,
        };
        let offsets = [
            ("A1", 0.35),
            ("A2", 0.2),
            ("A3", 0.05),
            ("A4", -0.1),
            ("A5", -0.25),
            ("A6", -0.3),
            ("B1", 0.3),
            ("B2", 0.15),
            ("B3", 0.0),
            ("B4", -0.15),
            ("B5", -0.3),
            ("B6", 0.1),
        ];
        SynthConfig {
            seed,
            rounds: 10,
            curve: FgpCurve::default(),
            players: offsets
                .iter()
                .map(|(id, off)| {
                    ((*id).to_owned(), PlayerCurve { offset: *off, ..Default::default() })
                })
                .collect(),
            mixture: LocationMixture::default(),
            teams: vec![
                TeamSpec {
                    id: "AAA".into(),
                    lineups: vec![
                        lineup(["A1", "A2", "A3", "A4", "A5"], 300.0, 900, AllocationPolicy::RankMatched),
                        lineup(["A1", "A2", "A3", "A4", "A6"], 180.0, 500, AllocationPolicy::Random),
                    ],
                    offense: None,
                    defense: None,
                },
                TeamSpec {
                    id: "BBB".into(),
                    lineups: vec![
                        lineup(["B1", "B2", "B3", "B4", "B5"], 300.0, 900, AllocationPolicy::Inverted),
                        lineup(["B1", "B2", "B3", "B6", "B5"], 180.0, 500, AllocationPolicy::Random),
                    ],
                    offense: None,
                    defense: None,
                },
            ],
            game_model: Some(GameModel::default()),
        }
    }

    pub fn games_per_team(&self) -> usize {
        self.rounds * self.teams.len().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));
        if self.teams.len() < 2 {
            return err(format!("need at least two teams, got {}", self.teams.len()));
        }
        if self.rounds == 0 {
            return err("rounds must be at least 1".into());
        }
        let m = &self.mixture;
        if [m.rim, m.mid, m.three].iter().any(|w| !(*w >= 0.0 && w.is_finite())) || m.rim + m.mid + m.three <= 0.0 {
            return err("location mixture weights must be non-negative with a positive sum".into());
        }
        if m.three > 0.0 && m.max_three_distance < 23.75 {
            return err("max_three_distance must reach the three-point line".into());
        }
        let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
        let mut team_ids = BTreeSet::new();
        let game_minutes = GAME_MINUTES * self.games_per_team() as f64;
        for team in &self.teams {
            if team.id.is_empty() || !team_ids.insert(team.id.as_str()) {
                return err(format!("duplicate or empty team id `{}`", team.id));
            }
            if team.lineups.is_empty() {
                return err(format!("team {} has no lineups", team.id));
            }
            let mut total = 0.0;
            let mut keys = BTreeSet::new();
            for l in &team.lineups {
                let unique: BTreeSet<&String> = l.players.iter().collect();
                if unique.len() != LINEUP_SIZE || l.players.iter().any(String::is_empty) {
                    return err(format!("team {}: lineup {:?} needs five distinct players", team.id, l.players));
                }
                if !keys.insert(unique) {
                    return err(format!("team {}: lineup {:?} listed twice", team.id, l.players));
                }
                for p in &l.players {
                    if let Some(other) = owner.insert(p, &team.id) {
                        if other != team.id {
                            return err(format!("player {p} appears on teams {other} and {}", team.id));
                        }
                    }
                }
                if !(l.minutes > 0.0 && l.minutes.is_finite()) {
                    return err(format!("team {}: lineup minutes must be positive", team.id));
                }
                if let AllocationPolicy::Custom(w) = &l.policy {
                    if w.len() != LINEUP_SIZE || w.iter().any(|x| !(*x >= 0.0)) || w.iter().sum::<f64>() <= 0.0 {
                        return err(format!("team {}: custom weights need five non-negative values", team.id));
                    }
                }
                total += l.minutes;
            }
            if (total - game_minutes).abs() > 1e-6 * game_minutes {
                return err(format!(
                    "team {}: lineup minutes sum to {total}, but {} games need {game_minutes}",
                    team.id,
                    self.games_per_team()
                ));
            }
        }
        if let Some(gm) = &self.game_model {
            if !(gm.sigma > 0.0) || !(gm.team_sd >= 0.0) {
                return err("game model needs sigma > 0 and team_sd >= 0".into());
            }
        }
        Ok(())
    }

    pub(crate) fn lineup_key(&self, team: &TeamSpec, lineup: &LineupSpec) -> LineupKey {
        LineupKey::new(TeamId::from(team.id.as_str()), lineup.players.clone().map(PlayerId::from))
    }

    fn curve_for(&self, player: &str) -> (f64, f64) {
        let p = self.players.get(player).cloned().unwrap_or_default();
        (
            p.intercept.unwrap_or(self.curve.intercept) + p.offset,
            p.slope.unwrap_or(self.curve.slope),
        )
    }

    /// True make probability of `player` in every grid cell.
    pub fn true_fgp(&self, player: &str, grid: &CourtGrid) -> Vec<f64> {
        let (a, b) = self.curve_for(player);
        grid.cells()
            .map(|c: CellIndex| {
                let d = grid.centroid(c).hoop_distance();
                1.0 / (1.0 + (-(a + b * d)).exp())
            })
            .collect()
    }

    pub fn all_players(&self) -> BTreeSet<&str> {
        self.teams
            .iter()
            .flat_map(|t| t.lineups.iter().flat_map(|l| l.players.iter().map(String::as_str)))
            .collect()
    }
}
