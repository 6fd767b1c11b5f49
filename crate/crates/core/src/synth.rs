//! Synthetic leagues with planted multiplicative effects.
//!
//! Each team-game log-rate of a recorded event type is
//!
//! ```text
//! ln(mean) + ln(rink) + ln(asd)·ASD + ln(home)·is_home + ln(homer)·is_home + ε
//! ```
//!
//! with ε ~ N(0, noise_sd²). Composite metrics are assembled from the drawn
//! primitive rates by the same rules the team-game builder uses. Every
//! random stream is derived from the config seed and a per-season label.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::effects::EffectTable;
use crate::error::{Error, Result};
use crate::event::{EventType, Metric};
use crate::ingest::{GameLog, RawEvent, PERIOD_SECONDS, REGULATION_SECONDS};
use crate::seed;
use crate::teamgame::{team_games_from_logs, GoalTerm, TeamGame, TeamGameOptions, RATE_BASE_SECONDS};

pub const NHL_TEAMS: [&str; 30] = [
    "ANA", "BOS", "BUF", "CAR", "CBJ", "CGY", "CHI", "COL", "DAL", "DET", "EDM", "FLA", "L.A", "MIN", "MTL", "N.J",
    "NSH", "NYI", "NYR", "OTT", "PHI", "PHX", "PIT", "S.J", "STL", "T.B", "TOR", "VAN", "WPG", "WSH",
];

pub const TRUTH_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseModel {
    /// Gaussian noise on the log rate; rates are used as drawn.
    #[default]
    LogNormal,
    /// Log-normal rates, then Poisson counts; rates are recomputed from the
    /// counts. The fitted model does not describe this noise exactly.
    Count,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Several events with planted rink and homer effects.
    Desk,
    /// Every effect equal to 1.
    Null,
    /// Eighteen planted GIVE rink effects in [0.54, 2.17], twelve null rinks.
    Give,
}

impl std::str::FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scenario::Desk),
            "null" => Ok(Scenario::Null),
            "give" => Ok(Scenario::Give),
            other => Err(Error::Config(format!("unknown scenario `{other}` (desk, null, give)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeasonConfig {
    pub label: String,
    pub games: usize,
}

/// Planted exp-scale effects for one recorded event type. Rinks not listed
/// have effect 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantedEvent {
    pub metric: Metric,
    pub mean: f64,
    #[serde(default = "one")]
    pub asd: f64,
    #[serde(default = "one")]
    pub home: f64,
    #[serde(default)]
    pub rink: BTreeMap<String, f64>,
    #[serde(default)]
    pub homer: BTreeMap<String, f64>,
}

fn one() -> f64 {
    1.0
}

impl PlantedEvent {
    pub fn neutral(metric: Metric, mean: f64) -> Self {
        PlantedEvent {
            metric,
            mean,
            asd: 1.0,
            home: 1.0,
            rink: BTreeMap::new(),
            homer: BTreeMap::new(),
        }
    }

    pub fn rink_effect(&self, rink: &str) -> f64 {
        self.rink.get(rink).copied().unwrap_or(1.0)
    }

    pub fn homer_effect(&self, rink: &str) -> f64 {
        self.homer.get(rink).copied().unwrap_or(1.0)
    }
}

/// Typical per-60 NEN5v5 rates used for events a config leaves out.
pub fn default_mean(metric: Metric) -> f64 {
    match metric {
        Metric::Block => 12.0,
        Metric::Give => 7.0,
        Metric::Hit => 22.0,
        Metric::Miss => 11.0,
        Metric::Shot => 27.0,
        Metric::Take => 6.0,
        Metric::Corsi | Metric::Fenwick | Metric::Turn => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub teams: Vec<String>,
    pub seasons: Vec<SeasonConfig>,
    /// Standard deviation of the log-scale noise.
    pub noise_sd: f64,
    pub noise_model: NoiseModel,
    /// Mean of the home team's ASD; the away team's is its negative.
    pub asd_home_shift: f64,
    pub asd_sd: f64,
    /// NEN5v5 seconds per game, drawn uniformly from this range.
    pub nen5v5_seconds: [f64; 2],
    pub goals_per_hour: f64,
    pub events: Vec<PlantedEvent>,
}

pub fn default_seasons() -> Vec<SeasonConfig> {
    ["20072008", "20082009", "20092010", "20102011", "20112012", "20122013"]
        .iter()
        .enumerate()
        .map(|(i, s)| SeasonConfig {
            label: (*s).to_owned(),
            games: if i == 5 { 720 } else { 1230 },
        })
        .collect()
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig::scenario(Scenario::Desk, 0)
    }
}

fn planted(metric: Metric, mean: f64, asd: f64, home: f64, rink: &[(&str, f64)], homer: &[(&str, f64)]) -> PlantedEvent {
    let map = |v: &[(&str, f64)]| v.iter().map(|(k, e)| ((*k).to_owned(), *e)).collect();
    PlantedEvent {
        metric,
        mean,
        asd,
        home,
        rink: map(rink),
        homer: map(homer),
    }
}

/// GIVE rink effects spanning [0.54, 2.17]: eight above and ten below
/// average. The other twelve rinks are null.
pub const GIVE_PLANTED: [(&str, f64); 18] = [
    ("EDM", 2.167),
    ("NYI", 1.748),
    ("S.J", 1.612),
    ("WPG", 1.560),
    ("DAL", 1.539),
    ("CHI", 1.524),
    ("PIT", 1.337),
    ("STL", 1.298),
    ("ANA", 0.80),
    ("BUF", 0.76),
    ("CGY", 0.72),
    ("COL", 0.68),
    ("DET", 0.65),
    ("FLA", 0.62),
    ("MIN", 0.60),
    ("NSH", 0.57),
    ("PHI", 0.55),
    ("CBJ", 0.54),
];

impl SyntheticConfig {
    pub fn scenario(scenario: Scenario, seed: u64) -> Self {
        let events = match scenario {
            Scenario::Null => Metric::PRIMITIVE
                .iter()
                .map(|&m| PlantedEvent::neutral(m, default_mean(m)))
                .collect(),
            Scenario::Give => vec![planted(Metric::Give, 5.0, 0.95, 1.68, &GIVE_PLANTED, &[])],
            Scenario::Desk => vec![
                planted(Metric::Block, 12.0, 1.05, 1.02, &[("N.J", 0.541), ("BOS", 0.866), ("NYI", 1.35), ("TOR", 1.10)], &[]),
                planted(Metric::Give, 7.0, 0.95, 1.68, &[("EDM", 2.167), ("CBJ", 0.60), ("S.J", 1.5)], &[]),
                planted(Metric::Hit, 22.0, 1.0, 1.08, &[("L.A", 1.297), ("N.J", 0.581), ("MIN", 1.45)], &[("N.J", 1.186)]),
                planted(Metric::Miss, 11.0, 0.97, 1.0, &[("TOR", 1.15), ("DAL", 0.80)], &[]),
                planted(Metric::Shot, 27.0, 0.93, 1.04, &[("TOR", 1.12)], &[]),
                planted(Metric::Take, 6.0, 1.0, 1.30, &[("CHI", 1.6), ("NSH", 0.7)], &[("CHI", 1.25)]),
            ],
        };
        SyntheticConfig {
            seed,
            teams: NHL_TEAMS.iter().map(|t| (*t).to_owned()).collect(),
            seasons: default_seasons(),
            noise_sd: 0.35,
            noise_model: NoiseModel::LogNormal,
            asd_home_shift: 0.1,
            asd_sd: 0.75,
            nen5v5_seconds: [2400.0, 3200.0],
            goals_per_hour: 2.0,
            events,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SyntheticConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let teams: BTreeSet<&str> = self.teams.iter().map(String::as_str).collect();
        if teams.len() < 2 || teams.len() != self.teams.len() {
            return bad("need at least two distinct teams".into());
        }
        if self.seasons.is_empty() {
            return bad("need at least one season".into());
        }
        let labels: BTreeSet<&str> = self.seasons.iter().map(|s| s.label.as_str()).collect();
        if labels.len() != self.seasons.len() {
            return bad("season labels must be distinct".into());
        }
        for s in &self.seasons {
            if s.games < teams.len() / 2 || s.games == 0 {
                return bad(format!("season {} has {} games, fewer than teams/2", s.label, s.games));
            }
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) || !(self.asd_sd >= 0.0 && self.asd_sd.is_finite()) {
            return bad("noise_sd and asd_sd must be finite and non-negative".into());
        }
        if !self.asd_home_shift.is_finite() || !(self.goals_per_hour >= 0.0 && self.goals_per_hour.is_finite()) {
            return bad("asd_home_shift and goals_per_hour must be finite; goals_per_hour non-negative".into());
        }
        let [lo, hi] = self.nen5v5_seconds;
        if !(lo > 0.0 && lo <= hi && hi <= f64::from(REGULATION_SECONDS)) {
            return bad(format!("nen5v5_seconds range [{lo}, {hi}] must lie within (0, 3600]"));
        }
        let mut seen = BTreeSet::new();
        for e in &self.events {
            if e.metric.primitive_event().is_none() {
                return bad(format!("{} is derived from other events and cannot be planted", e.metric));
            }
            if !seen.insert(e.metric) {
                return bad(format!("{} planted twice", e.metric));
            }
            let effects = [e.mean, e.asd, e.home]
                .into_iter()
                .chain(e.rink.values().copied())
                .chain(e.homer.values().copied());
            for v in effects {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(format!("{} has non-positive or non-finite effect {v}", e.metric));
                }
            }
            if let Some(r) = e.rink.keys().chain(e.homer.keys()).find(|r| !teams.contains(r.as_str())) {
                return bad(format!("{} plants an effect at unknown rink `{r}`", e.metric));
            }
        }
        Ok(())
    }

    /// Planted events for all six recorded event types, filling defaults.
    pub fn full_plan(&self) -> Vec<PlantedEvent> {
        Metric::PRIMITIVE
            .iter()
            .map(|&m| {
                self.events
                    .iter()
                    .find(|e| e.metric == m)
                    .cloned()
                    .unwrap_or_else(|| PlantedEvent::neutral(m, default_mean(m)))
            })
            .collect()
    }
}

/// Planted truth saved next to generated data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub schema_version: u32,
    pub config: SyntheticConfig,
    /// Every recorded event type, every rink listed explicitly.
    pub events: Vec<PlantedEvent>,
}

impl TruthRecord {
    fn new(config: &SyntheticConfig) -> Self {
        let events = config
            .full_plan()
            .into_iter()
            .map(|mut e| {
                for t in &config.teams {
                    e.rink.entry(t.clone()).or_insert(1.0);
                    e.homer.entry(t.clone()).or_insert(1.0);
                }
                e
            })
            .collect();
        TruthRecord {
            schema_version: TRUTH_SCHEMA_VERSION,
            config: config.clone(),
            events,
        }
    }

    pub fn event(&self, metric: Metric) -> Option<&PlantedEvent> {
        self.events.iter().find(|e| e.metric == metric)
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        Ok(())
    }

    pub fn read_json<R: std::io::Read>(input: R) -> Result<Self> {
        let t: TruthRecord = serde_json::from_reader(input)?;
        if t.schema_version != TRUTH_SCHEMA_VERSION {
            return Err(Error::Schema(format!("truth schema_version {} is not supported", t.schema_version)));
        }
        Ok(t)
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub team_games: Vec<TeamGame>,
    /// Play-by-play logs, when event-level output was requested.
    pub games: Option<Vec<GameLog>>,
    pub truth: TruthRecord,
}

struct Plan {
    /// Indexed like `Metric::PRIMITIVE`.
    events: Vec<PlantedEvent>,
    normal: Normal<f64>,
    asd: Normal<f64>,
}

impl Plan {
    /// Log-scale draw of every primitive rate for one side, indexed by
    /// [`Metric::index`].
    fn rates(&self, rink: &str, is_home: bool, asd: f64, rng: &mut ChaCha8Rng) -> [f64; 9] {
        let mut out = [0.0; 9];
        for e in &self.events {
            // multiplicative form keeps unit effects exact
            let mut rate = e.mean * e.rink_effect(rink) * e.asd.powf(asd);
            if is_home {
                rate *= e.home * e.homer_effect(rink);
            }
            out[e.metric.index()] = rate * self.normal.sample(rng).exp();
        }
        out
    }
}

fn schedule(teams: &[String], games: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(games);
    let mut order: Vec<usize> = (0..teams.len()).collect();
    while out.len() < games {
        order.shuffle(rng);
        for pair in order.chunks_exact(2) {
            if out.len() == games {
                break;
            }
            let (a, b) = (pair[0], pair[1]);
            out.push(if rng.random_bool(0.5) { (a, b) } else { (b, a) });
        }
    }
    out
}

fn poisson(mean: f64, rng: &mut ChaCha8Rng) -> u32 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng) as u32
}

fn counted(metric: Metric) -> usize {
    metric.primitive_event().and_then(EventType::counted_index).expect("recorded event")
}

/// Counts for one side from drawn rates over `seconds` of NEN5v5 play.
fn side_counts(rates: &[f64; 9], goals: u32, seconds: f64, model: NoiseModel, rng: &mut ChaCha8Rng) -> [u32; 7] {
    let mut counts = [0u32; 7];
    for m in Metric::PRIMITIVE {
        let expected = rates[m.index()] * seconds / RATE_BASE_SECONDS;
        counts[counted(m)] = match model {
            NoiseModel::LogNormal => expected.round() as u32,
            NoiseModel::Count => poisson(expected, rng),
        };
    }
    counts[EventType::Goal.counted_index().expect("goal")] = goals;
    counts
}

fn compose(own: &[f64; 9], opp: &[f64; 9], goals: u32) -> [f64; 9] {
    let mut r = *own;
    let g = f64::from(goals);
    r[Metric::Corsi.index()] = own[Metric::Shot.index()] + own[Metric::Miss.index()] + own[Metric::Block.index()] + g;
    r[Metric::Fenwick.index()] = own[Metric::Shot.index()] + own[Metric::Miss.index()] + g;
    r[Metric::Turn.index()] = own[Metric::Take.index()] + opp[Metric::Give.index()];
    r
}

fn rates_from_counts(own: &[u32; 7], opp: &[u32; 7], seconds: f64) -> [f64; 9] {
    let scale = RATE_BASE_SECONDS / seconds;
    let mut r = [0.0; 9];
    for m in Metric::PRIMITIVE {
        r[m.index()] = f64::from(own[counted(m)]) * scale;
    }
    let mut opp_r = [0.0; 9];
    opp_r[Metric::Give.index()] = f64::from(opp[counted(Metric::Give)]) * scale;
    compose(&r, &opp_r, own[EventType::Goal.counted_index().expect("goal")])
}

fn season_team_games(cfg: &SyntheticConfig, plan: &Plan, season: &SeasonConfig) -> Vec<TeamGame> {
    let mut rng = seed::rng(cfg.seed, &format!("synth/season/{}", season.label));
    let games = schedule(&cfg.teams, season.games, &mut rng);
    let goal_rate = cfg.goals_per_hour / RATE_BASE_SECONDS;
    let mut rows = Vec::with_capacity(2 * games.len());
    for (k, (h, a)) in games.into_iter().enumerate() {
        let (home, away) = (&cfg.teams[h], &cfg.teams[a]);
        let seconds = rng.random_range(cfg.nen5v5_seconds[0]..=cfg.nen5v5_seconds[1]);
        let asd = plan.asd.sample(&mut rng);
        let hr = plan.rates(home, true, asd, &mut rng);
        let ar = plan.rates(home, false, -asd, &mut rng);
        let (hg, ag) = (poisson(goal_rate * seconds, &mut rng), poisson(goal_rate * seconds, &mut rng));
        let hc = side_counts(&hr, hg, seconds, cfg.noise_model, &mut rng);
        let ac = side_counts(&ar, ag, seconds, cfg.noise_model, &mut rng);
        let (hrates, arates) = match cfg.noise_model {
            NoiseModel::LogNormal => (compose(&hr, &ar, hg), compose(&ar, &hr, ag)),
            NoiseModel::Count => (rates_from_counts(&hc, &ac, seconds), rates_from_counts(&ac, &hc, seconds)),
        };
        let game_id = (20001 + k).to_string();
        let row = |for_team: &str, against: &str, is_home: bool, asd: f64, rates: [f64; 9], counts: [u32; 7]| TeamGame {
            game_id: game_id.clone(),
            season: season.label.clone(),
            for_team: for_team.to_owned(),
            against_team: against.to_owned(),
            is_home,
            rink: home.clone(),
            asd,
            nen5v5_seconds: seconds,
            rates,
            counts,
        };
        rows.push(row(home, away, true, asd, hrates, hc));
        rows.push(row(away, home, false, -asd, arates, ac));
    }
    rows
}

/// Builds one game's play-by-play. Regulation has one shorthanded segment
/// inside the second period; everything else is NEN5v5. Goals are placed
/// first, the realized ASD drives the rate draws, and every counted event
/// gets its own 5v5 second.
fn season_logs(cfg: &SyntheticConfig, plan: &Plan, season: &SeasonConfig) -> Result<Vec<GameLog>> {
    let mut rng = seed::rng(cfg.seed, &format!("synth/events/{}", season.label));
    let games = schedule(&cfg.teams, season.games, &mut rng);
    let goal_rate = cfg.goals_per_hour / RATE_BASE_SECONDS;
    let period = PERIOD_SECONDS;
    let mut logs = Vec::with_capacity(games.len());
    for (k, (h, a)) in games.into_iter().enumerate() {
        let (home, away) = (&cfg.teams[h], &cfg.teams[a]);
        let lo = cfg.nen5v5_seconds[0].ceil().max(f64::from(REGULATION_SECONDS - period)) as u32;
        let hi = (cfg.nen5v5_seconds[1].floor() as u32).max(lo);
        let nen = rng.random_range(lo..=hi);
        let pk = REGULATION_SECONDS - nen;
        let pk_start = period + rng.random_range(0..=period - pk);
        let pk_end = pk_start + pk;
        let markers = [0, period, 2 * period, pk_start, pk_end];
        let mut free: Vec<u32> = (0..REGULATION_SECONDS)
            .filter(|t| (*t < pk_start || *t >= pk_end) && !markers.contains(t))
            .collect();
        free.shuffle(&mut rng);
        let take = |n: u32, free: &mut Vec<u32>| -> Result<Vec<u32>> {
            if n as usize > free.len() {
                return Err(Error::Config(format!("game {} needs more 5v5 seconds than it has", k + 1)));
            }
            Ok(free.split_off(free.len() - n as usize))
        };
        let hg = take(poisson(goal_rate * f64::from(nen), &mut rng), &mut free)?;
        let ag = take(poisson(goal_rate * f64::from(nen), &mut rng), &mut free)?;
        let mut lead_changes: Vec<(u32, i64)> = hg.iter().map(|&t| (t, 1)).chain(ag.iter().map(|&t| (t, -1))).collect();
        lead_changes.sort();
        let home_asd = lead_changes
            .iter()
            .map(|&(t, d)| d as f64 * f64::from(REGULATION_SECONDS - t))
            .sum::<f64>()
            / f64::from(REGULATION_SECONDS);
        let hr = plan.rates(home, true, home_asd, &mut rng);
        let ar = plan.rates(home, false, -home_asd, &mut rng);
        let hc = side_counts(&hr, 0, f64::from(nen), cfg.noise_model, &mut rng);
        let ac = side_counts(&ar, 0, f64::from(nen), cfg.noise_model, &mut rng);

        let mut placed: Vec<(u32, EventType, &str)> = Vec::new();
        placed.extend(hg.iter().map(|&t| (t, EventType::Goal, home.as_str())));
        placed.extend(ag.iter().map(|&t| (t, EventType::Goal, away.as_str())));
        for (counts, team) in [(&hc, home), (&ac, away)] {
            for m in Metric::PRIMITIVE {
                let ev = m.primitive_event().expect("primitive");
                for t in take(counts[counted(m)], &mut free)? {
                    placed.push((t, ev, team.as_str()));
                }
            }
        }
        placed.sort();

        let game_id = (20001 + k).to_string();
        let state = |t: u32| {
            let pk = (pk_start..pk_end).contains(&t);
            let (hs, as_) = lead_changes.iter().filter(|(g, _)| *g <= t).fold((0u32, 0u32), |(h, a), (_, d)| {
                if *d > 0 {
                    (h + 1, a)
                } else {
                    (h, a + 1)
                }
            });
            (pk, hs, as_)
        };
        let make = |t: u32, ty: EventType, team: Option<&str>, player: Option<String>| {
            let (pk, hs, as_) = state(t);
            RawEvent {
                season: season.label.clone(),
                game_id: game_id.clone(),
                period: t / period + 1,
                elapsed_seconds: t,
                event_type: ty,
                event_team: team.map(str::to_owned),
                home_team: home.clone(),
                away_team: away.clone(),
                home_score: hs,
                away_score: as_,
                home_skaters: 5,
                away_skaters: if pk { 4 } else { 5 },
                home_goalie_on: true,
                away_goalie_on: true,
                player,
            }
        };
        let mut events = vec![
            make(0, EventType::Fac, None, None),
            make(period, EventType::Fac, None, None),
            make(2 * period, EventType::Fac, None, None),
            make(pk_start, EventType::Other, None, None),
            make(pk_end, EventType::Other, None, None),
        ];
        for (t, ty, team) in placed {
            let player = format!("{team} #{}", rng.random_range(1..=12));
            events.push(make(t, ty, Some(team), Some(player)));
        }
        events.sort_by_key(|e| (e.period, e.elapsed_seconds));
        logs.push(GameLog {
            game_id,
            season: season.label.clone(),
            home_team: home.clone(),
            away_team: away.clone(),
            events,
        });
    }
    Ok(logs)
}

/// Generates a league. With `with_events`, play-by-play logs are produced
/// and the team-game rows are derived from them exactly as ingest would.
pub fn generate(config: &SyntheticConfig, with_events: bool) -> Result<SyntheticData> {
    config.validate()?;
    let plan = Plan {
        events: config.full_plan(),
        normal: Normal::new(0.0, config.noise_sd).map_err(|e| Error::Config(e.to_string()))?,
        asd: Normal::new(config.asd_home_shift, config.asd_sd).map_err(|e| Error::Config(e.to_string()))?,
    };
    let truth = TruthRecord::new(config);
    if !with_events {
        let team_games = config
            .seasons
            .par_iter()
            .map(|s| season_team_games(config, &plan, s))
            .collect::<Vec<_>>()
            .concat();
        return Ok(SyntheticData {
            team_games,
            games: None,
            truth,
        });
    }
    let games = config
        .seasons
        .par_iter()
        .map(|s| season_logs(config, &plan, s))
        .collect::<Result<Vec<_>>>()?
        .concat();
    let opts = TeamGameOptions {
        goal_term: GoalTerm::Raw,
        ..Default::default()
    };
    let (team_games, diagnostics) = team_games_from_logs(&games, &opts);
    if let Some(d) = diagnostics.first() {
        return Err(Error::InvalidInput(format!("generated game failed ingest: {}", d.message)));
    }
    Ok(SyntheticData {
        team_games,
        games: Some(games),
        truth,
    })
}

pub fn generate_team_games(config: &SyntheticConfig) -> Result<(Vec<TeamGame>, TruthRecord)> {
    let d = generate(config, false)?;
    Ok((d.team_games, d.truth))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryError {
    pub metric: Metric,
    /// |ln(estimate) − ln(truth)| per planted rink.
    pub per_rink: BTreeMap<String, f64>,
    pub max_log_error: f64,
    pub mean_log_error: f64,
    /// Nonzero estimates at rinks whose truth is 1.
    pub false_positives: usize,
    /// Estimates of exactly 1 at planted rinks.
    pub false_negatives: usize,
}

/// Compares estimated rink effects with planted ones; both must cover the
/// same rinks.
pub fn recovery_error(truth: &PlantedEvent, estimated: &EffectTable) -> Result<RecoveryError> {
    let t: BTreeSet<&String> = truth.rink.keys().collect();
    let e: BTreeSet<&String> = estimated.rink_effect.keys().collect();
    if t != e {
        return Err(Error::InvalidInput(format!(
            "truth covers {} rinks, estimate {}; sets differ",
            t.len(),
            e.len()
        )));
    }
    let mut per_rink = BTreeMap::new();
    let (mut fp, mut fn_) = (0, 0);
    for (rink, &tv) in &truth.rink {
        let ev = estimated.rink_effect[rink];
        if tv == 1.0 {
            if ev != 1.0 {
                fp += 1;
            }
        } else {
            if ev == 1.0 {
                fn_ += 1;
            }
            per_rink.insert(rink.clone(), (ev.ln() - tv.ln()).abs());
        }
    }
    let max = per_rink.values().copied().fold(0.0, f64::max);
    let mean = if per_rink.is_empty() {
        0.0
    } else {
        per_rink.values().sum::<f64>() / per_rink.len() as f64
    };
    Ok(RecoveryError {
        metric: truth.metric,
        per_rink,
        max_log_error: max,
        mean_log_error: mean,
        false_positives: fp,
        false_negatives: fn_,
    })
}
