//! Per-game aggregation into two team-game observations: prorated rates,
//! derived metrics and the average score differential.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{EventType, Metric};
use crate::ingest::{compute_intervals, is_nen5v5, Diagnostic, EventInterval, GameLog, REGULATION_SECONDS};

/// Baseline length rates are scaled to.
pub const RATE_BASE_SECONDS: f64 = 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AsdOrientation {
    /// Each row carries the lead of its own `for_team`.
    #[default]
    ForTeam,
    /// Both rows carry the home-minus-away value.
    Home,
}

impl FromStr for AsdOrientation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "for-team" => Ok(Self::ForTeam),
            "home" => Ok(Self::Home),
            _ => Err(Error::Config(format!("unknown ASD orientation `{s}`"))),
        }
    }
}

/// How goals enter CORSI and FENWICK rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GoalTerm {
    /// Raw NEN5v5 goal count added to the prorated attempt rates.
    #[default]
    Raw,
    Prorated,
}

impl FromStr for GoalTerm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Self::Raw),
            "prorated" => Ok(Self::Prorated),
            _ => Err(Error::Config(format!("unknown goal-term mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NeutralSitePolicy {
    /// Charge the game to the designated home team's rink.
    #[default]
    DesignatedHome,
    Exclude,
}

impl FromStr for NeutralSitePolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "designated-home" => Ok(Self::DesignatedHome),
            "exclude" => Ok(Self::Exclude),
            _ => Err(Error::Config(format!("unknown neutral-site policy `{s}`"))),
        }
    }
}

/// Franchise to arena lookup. Without an entry, a team's rink id is its
/// team id. A season of `*` applies to every season.
#[derive(Debug, Clone, Default)]
pub struct RinkMap {
    arenas: BTreeMap<(String, String), String>,
    neutral: BTreeSet<(String, String)>,
}

impl RinkMap {
    pub fn insert(&mut self, season: &str, team: &str, rink: &str) {
        self.arenas
            .insert((season.to_owned(), team.to_owned()), rink.to_owned());
    }

    pub fn mark_neutral(&mut self, season: &str, game_id: &str) {
        self.neutral.insert((season.to_owned(), game_id.to_owned()));
    }

    pub fn rink_for(&self, season: &str, home_team: &str) -> String {
        self.arenas
            .get(&(season.to_owned(), home_team.to_owned()))
            .or_else(|| self.arenas.get(&("*".to_owned(), home_team.to_owned())))
            .cloned()
            .unwrap_or_else(|| home_team.to_owned())
    }

    pub fn is_neutral(&self, season: &str, game_id: &str) -> bool {
        self.neutral
            .contains(&(season.to_owned(), game_id.to_owned()))
    }

    /// Reads `season,team,rink` rows.
    pub fn read_arenas<R: Read>(&mut self, input: R) -> Result<()> {
        let mut rdr = csv::Reader::from_reader(input);
        expect_header(rdr.headers()?, &["season", "team", "rink"])?;
        for rec in rdr.records() {
            let rec = rec?;
            self.insert(&rec[0], &rec[1], &rec[2]);
        }
        Ok(())
    }

    /// Reads `season,game_id` rows naming neutral-site games.
    pub fn read_neutral_sites<R: Read>(&mut self, input: R) -> Result<()> {
        let mut rdr = csv::Reader::from_reader(input);
        expect_header(rdr.headers()?, &["season", "game_id"])?;
        for rec in rdr.records() {
            let rec = rec?;
            self.mark_neutral(&rec[0], &rec[1]);
        }
        Ok(())
    }
}

fn expect_header(got: &csv::StringRecord, want: &[&str]) -> Result<()> {
    if got.iter().map(str::trim).eq(want.iter().copied()) {
        Ok(())
    } else {
        Err(Error::Schema(format!(
            "expected header `{}`, got `{}`",
            want.join(","),
            got.iter().collect::<Vec<_>>().join(",")
        )))
    }
}

#[derive(Debug, Clone, Default)]
pub struct TeamGameOptions {
    pub asd_orientation: AsdOrientation,
    pub goal_term: GoalTerm,
    pub neutral_sites: NeutralSitePolicy,
    pub rinks: RinkMap,
}

/// One team's side of one game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamGame {
    pub game_id: String,
    pub season: String,
    pub for_team: String,
    pub against_team: String,
    pub is_home: bool,
    pub rink: String,
    pub asd: f64,
    pub nen5v5_seconds: f64,
    /// Indexed by [`Metric::index`].
    pub rates: [f64; 9],
    /// NEN5v5 counts credited to `for_team`, indexed like [`EventType::COUNTED`].
    pub counts: [u32; 7],
}

impl TeamGame {
    pub fn rate(&self, metric: Metric) -> f64 {
        self.rates[metric.index()]
    }

    pub fn count(&self, event: EventType) -> u32 {
        event.counted_index().map_or(0, |i| self.counts[i])
    }

    /// Shot attempts (shots, misses, blocks and goals) credited to this row.
    pub fn corsi_count(&self) -> u32 {
        [EventType::Shot, EventType::Miss, EventType::Block, EventType::Goal]
            .iter()
            .map(|&e| self.count(e))
            .sum()
    }
}

/// Scales an event count to a per-3600-second rate.
pub fn prorate(count: u32, nen5v5_seconds: f64) -> Result<f64> {
    if !(nen5v5_seconds > 0.0) {
        return Err(Error::InvalidInput(format!(
            "cannot prorate over {nen5v5_seconds} seconds of NEN5v5 play"
        )));
    }
    Ok(f64::from(count) * RATE_BASE_SECONDS / nen5v5_seconds)
}

/// Time-weighted average lead over regulation, seen from `orientation`
/// (which must be the home or away team of the game).
pub fn compute_asd(intervals: &[EventInterval], orientation: &str) -> Result<f64> {
    let Some(first) = intervals.first() else {
        return Err(Error::InvalidInput("no intervals".into()));
    };
    let total: f64 = intervals.iter().map(|iv| iv.length_seconds).sum();
    if total != f64::from(REGULATION_SECONDS) {
        return Err(Error::game(
            first.event.game_id.as_str(),
            format!("intervals cover {total} s, expected {REGULATION_SECONDS}"),
        ));
    }
    let weighted: f64 = intervals
        .iter()
        .map(|iv| {
            (f64::from(iv.event.home_score) - f64::from(iv.event.away_score)) * iv.length_seconds
        })
        .sum();
    let home_asd = weighted / f64::from(REGULATION_SECONDS);
    if orientation == first.event.home_team {
        Ok(home_asd)
    } else if orientation == first.event.away_team {
        Ok(-home_asd)
    } else {
        Err(Error::InvalidInput(format!(
            "`{orientation}` did not play in game {}",
            first.event.game_id
        )))
    }
}

fn side_rates(own: &[u32; 7], opp: &[u32; 7], seconds: f64, goal_term: GoalTerm) -> Result<[f64; 9]> {
    let idx = |e: EventType| e.counted_index().expect("counted event");
    let r = |e: EventType| prorate(own[idx(e)], seconds);
    let mut rates = [0.0; 9];
    for m in Metric::PRIMITIVE {
        rates[m.index()] = r(m.primitive_event().expect("primitive"))?;
    }
    let goals = match goal_term {
        GoalTerm::Raw => f64::from(own[idx(EventType::Goal)]),
        GoalTerm::Prorated => r(EventType::Goal)?,
    };
    let (shot, miss, block) = (
        rates[Metric::Shot.index()],
        rates[Metric::Miss.index()],
        rates[Metric::Block.index()],
    );
    rates[Metric::Corsi.index()] = shot + miss + block + goals;
    rates[Metric::Fenwick.index()] = shot + miss + goals;
    rates[Metric::Turn.index()] = prorate(own[idx(EventType::Take)] + opp[idx(EventType::Give)], seconds)?;
    Ok(rates)
}

/// Builds the home and away rows of one game from its regulation intervals
/// (all strengths; the NEN5v5 filter is applied here). Returns the rows in
/// `(home, away)` order.
pub fn build_team_games(intervals: &[EventInterval], opts: &TeamGameOptions) -> Result<(TeamGame, TeamGame)> {
    let Some(first) = intervals.first() else {
        return Err(Error::InvalidInput("no intervals".into()));
    };
    let game = &first.event;
    let mut home_counts = [0u32; 7];
    let mut away_counts = [0u32; 7];
    let mut seconds = 0.0;
    for iv in intervals.iter().filter(|iv| is_nen5v5(&iv.event)) {
        seconds += iv.length_seconds;
        let ev = &iv.event;
        let Some(slot) = ev.event_type.counted_index() else {
            continue;
        };
        match ev.event_team.as_deref() {
            Some(t) if t == game.home_team => home_counts[slot] += 1,
            Some(t) if t == game.away_team => away_counts[slot] += 1,
            _ => {}
        }
    }
    if seconds <= 0.0 {
        return Err(Error::game(game.game_id.as_str(), "no NEN5v5 time; both rows dropped"));
    }
    let home_asd = compute_asd(intervals, &game.home_team)?;
    let (home_side_asd, away_side_asd) = match opts.asd_orientation {
        AsdOrientation::ForTeam => (home_asd, -home_asd),
        AsdOrientation::Home => (home_asd, home_asd),
    };
    let rink = opts.rinks.rink_for(&game.season, &game.home_team);
    let row = |for_team: &str, against: &str, is_home: bool, asd: f64, own: &[u32; 7], opp: &[u32; 7]| -> Result<TeamGame> {
        Ok(TeamGame {
            game_id: game.game_id.clone(),
            season: game.season.clone(),
            for_team: for_team.to_owned(),
            against_team: against.to_owned(),
            is_home,
            rink: rink.clone(),
            asd,
            nen5v5_seconds: seconds,
            rates: side_rates(own, opp, seconds, opts.goal_term)?,
            counts: *own,
        })
    };
    Ok((
        row(&game.home_team, &game.away_team, true, home_side_asd, &home_counts, &away_counts)?,
        row(&game.away_team, &game.home_team, false, away_side_asd, &away_counts, &home_counts)?,
    ))
}

/// Runs interval accounting and aggregation over every parsed game. Games
/// that fail validation are dropped and reported, never imputed.
pub fn team_games_from_logs(games: &[GameLog], opts: &TeamGameOptions) -> (Vec<TeamGame>, Vec<Diagnostic>) {
    let per_game: Vec<std::result::Result<(TeamGame, TeamGame), Diagnostic>> = games
        .par_iter()
        .map(|g| {
            if opts.neutral_sites == NeutralSitePolicy::Exclude && opts.rinks.is_neutral(&g.season, &g.game_id) {
                return Err(Diagnostic::game(&g.game_id, "neutral-site game excluded"));
            }
            compute_intervals(&g.events)
                .and_then(|iv| build_team_games(&iv, opts))
                .map_err(|e| Diagnostic::game(&g.game_id, format!("game rejected: {e}")))
        })
        .collect();
    let mut rows = Vec::with_capacity(games.len() * 2);
    let mut diags = Vec::new();
    for r in per_game {
        match r {
            Ok((h, a)) => {
                rows.push(h);
                rows.push(a);
            }
            Err(d) => diags.push(d),
        }
    }
    (rows, diags)
}

fn team_game_header() -> Vec<String> {
    let mut h: Vec<String> = [
        "season",
        "game_id",
        "for_team",
        "against_team",
        "is_home",
        "rink",
        "asd",
        "nen5v5_seconds",
    ]
    .iter()
    .map(|s| (*s).to_owned())
    .collect();
    h.extend(Metric::ALL.iter().map(|m| format!("rate_{}", m.as_str().to_ascii_lowercase())));
    h.extend(EventType::COUNTED.iter().map(|e| format!("n_{}", e.as_str().to_ascii_lowercase())));
    h
}

/// Writes the team-game table: one row per observation, rates in
/// [`Metric::ALL`] order, then NEN5v5 counts.
pub fn write_team_games<W: Write>(out: W, rows: &[TeamGame]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(team_game_header())?;
    for tg in rows {
        let mut rec = vec![
            tg.season.clone(),
            tg.game_id.clone(),
            tg.for_team.clone(),
            tg.against_team.clone(),
            if tg.is_home { "1" } else { "0" }.to_owned(),
            tg.rink.clone(),
            tg.asd.to_string(),
            tg.nen5v5_seconds.to_string(),
        ];
        rec.extend(Metric::ALL.iter().map(|m| tg.rate(*m).to_string()));
        rec.extend(tg.counts.iter().map(u32::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_team_games<R: Read>(input: R) -> Result<Vec<TeamGame>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = team_game_header();
    let want: Vec<&str> = header.iter().map(String::as_str).collect();
    expect_header(rdr.headers()?, &want)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let num = |i: usize| -> Result<f64> {
            rec[i].parse::<f64>().map_err(|_| Error::Parse {
                line,
                field: want[i].to_owned(),
                message: format!("expected a number, got `{}`", &rec[i]),
            })
        };
        let is_home = match &rec[4] {
            "1" => true,
            "0" => false,
            other => {
                return Err(Error::Parse {
                    line,
                    field: "is_home".into(),
                    message: format!("expected `1` or `0`, got `{other}`"),
                })
            }
        };
        let mut rates = [0.0; 9];
        for (k, m) in Metric::ALL.iter().enumerate() {
            rates[m.index()] = num(8 + k)?;
        }
        let mut counts = [0u32; 7];
        for (k, c) in counts.iter_mut().enumerate() {
            let i = 17 + k;
            *c = rec[i].parse().map_err(|_| Error::Parse {
                line,
                field: want[i].to_owned(),
                message: format!("expected a count, got `{}`", &rec[i]),
            })?;
        }
        let nen5v5_seconds = num(7)?;
        if !(nen5v5_seconds > 0.0) || rates.iter().any(|r| !(*r >= 0.0)) {
            return Err(Error::Parse {
                line,
                field: "rate".into(),
                message: "rates must be non-negative and NEN5v5 seconds positive".into(),
            });
        }
        out.push(TeamGame {
            season: rec[0].to_owned(),
            game_id: rec[1].to_owned(),
            for_team: rec[2].to_owned(),
            against_team: rec[3].to_owned(),
            is_home,
            rink: rec[5].to_owned(),
            asd: num(6)?,
            nen5v5_seconds,
            rates,
            counts,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::tests::ev;
    use crate::ingest::RawEvent;

    fn intervals(events: &[RawEvent]) -> Vec<EventInterval> {
        compute_intervals(events).unwrap()
    }

    #[test]
    fn prorate_examples() {
        assert_eq!(prorate(14, 3000.0).unwrap(), 16.8);
        assert_eq!(prorate(0, 2875.0).unwrap(), 0.0);
        for n in [0, 1, 7, 55, 301] {
            assert_eq!(prorate(n, 3600.0).unwrap(), f64::from(n));
        }
        assert!(prorate(3, 0.0).is_err());
    }

    fn scored(t: u32, h: u32, a: u32) -> RawEvent {
        let mut e = ev(t, EventType::Fac, None);
        e.home_score = h;
        e.away_score = a;
        e
    }

    #[test]
    fn asd_worked_example() {
        // lead of 1 for 1240 s, lead of 2 for 213 s, level otherwise
        let events = vec![scored(0, 0, 0), scored(1000, 1, 0), scored(2240, 2, 0), scored(2453, 2, 2)];
        let iv = intervals(&events);
        let home = compute_asd(&iv, "N.J").unwrap();
        assert!((home - 0.463).abs() < 5e-4, "{home}");
        assert_eq!(compute_asd(&iv, "L.A").unwrap(), -home);
    }

    #[test]
    fn asd_tied_and_constant_lead() {
        let iv = intervals(&[scored(0, 0, 0)]);
        assert_eq!(compute_asd(&iv, "N.J").unwrap(), 0.0);
        assert_eq!(compute_asd(&iv, "L.A").unwrap(), 0.0);
        let iv = intervals(&[scored(0, 1, 0)]);
        assert_eq!(compute_asd(&iv, "L.A").unwrap(), -1.0);
        assert!(compute_asd(&iv, "BOS").is_err());
    }

    #[test]
    fn asd_rejects_short_cover() {
        let iv = vec![EventInterval {
            event: scored(0, 0, 0),
            length_seconds: 3000.0,
        }];
        assert!(compute_asd(&iv, "N.J").is_err());
    }

    fn strength(mut e: RawEvent, home: u8, away: u8) -> RawEvent {
        e.home_skaters = home;
        e.away_skaters = away;
        e
    }

    #[test]
    fn hits_prorated_over_nen5v5_time() {
        // 3000 s at 5v5, then 600 s of home power play
        let mut events = vec![ev(0, EventType::Fac, None)];
        for k in 0..14 {
            events.push(ev(100 + 10 * k, EventType::Hit, Some("N.J")));
        }
        events.push(strength(ev(3000, EventType::Other, None), 5, 4));
        events.push(strength(ev(3100, EventType::Hit, Some("N.J")), 5, 4));
        let (home, away) = build_team_games(&intervals(&events), &TeamGameOptions::default()).unwrap();
        assert_eq!(home.nen5v5_seconds, 3000.0);
        assert_eq!(home.rate(Metric::Hit), 16.8);
        assert_eq!(home.count(EventType::Hit), 14);
        assert_eq!(away.rate(Metric::Hit), 0.0);
        assert!(home.is_home && !away.is_home);
        assert_eq!(home.rink, "N.J");
        assert_eq!(away.rink, "N.J");
    }

    #[test]
    fn turn_is_empty_without_takes_or_opponent_gives() {
        let events = vec![
            ev(0, EventType::Fac, None),
            ev(5, EventType::Give, Some("N.J")),
            ev(9, EventType::Take, Some("L.A")),
        ];
        let (home, away) = build_team_games(&intervals(&events), &TeamGameOptions::default()).unwrap();
        assert_eq!(home.rate(Metric::Turn), 0.0);
        assert_eq!(away.rate(Metric::Turn), 2.0);
    }

    /// Hand tally of a five-event game, 3600 s all at 5v5 except the last
    /// 1800 s which are 5v4.
    #[test]
    fn five_event_fixture_matches_hand_count() {
        let mut goal = ev(700, EventType::Goal, Some("N.J"));
        goal.home_score = 1;
        let after = |t, ty, team| {
            let mut e = ev(t, ty, team);
            e.home_score = 1;
            e
        };
        let events = vec![
            ev(0, EventType::Fac, None),
            ev(300, EventType::Shot, Some("N.J")),
            ev(500, EventType::Block, Some("L.A")),
            goal,
            after(1000, EventType::Miss, Some("L.A")),
            strength(after(1800, EventType::Take, Some("N.J")), 5, 4),
        ];
        let (home, away) = build_team_games(&intervals(&events), &TeamGameOptions::default()).unwrap();
        // NEN5v5 time is 0..1800 => scale factor 2
        assert_eq!(home.nen5v5_seconds, 1800.0);
        assert_eq!(home.rate(Metric::Shot), 2.0);
        assert_eq!(home.rate(Metric::Take), 0.0);
        assert_eq!(home.rate(Metric::Corsi), 2.0 + 1.0);
        assert_eq!(home.rate(Metric::Fenwick), 2.0 + 1.0);
        assert_eq!(away.rate(Metric::Block), 2.0);
        assert_eq!(away.rate(Metric::Miss), 2.0);
        assert_eq!(away.rate(Metric::Corsi), 4.0);
        assert_eq!(away.rate(Metric::Fenwick), 2.0);
        // lead of 1 from 700 s to the end
        assert!((home.asd - 2900.0 / 3600.0).abs() < 1e-15);
        assert_eq!(away.asd, -home.asd);

        let opts = TeamGameOptions {
            goal_term: GoalTerm::Prorated,
            asd_orientation: AsdOrientation::Home,
            ..Default::default()
        };
        let (home, away) = build_team_games(&intervals(&events), &opts).unwrap();
        assert_eq!(home.rate(Metric::Corsi), 4.0);
        assert_eq!(away.asd, home.asd);
    }

    #[test]
    fn no_nen5v5_time_drops_the_game() {
        let events = vec![strength(ev(0, EventType::Fac, None), 4, 4)];
        assert!(build_team_games(&intervals(&events), &TeamGameOptions::default()).is_err());
    }

    #[test]
    fn rink_map_and_neutral_sites() {
        let mut map = RinkMap::default();
        map.read_arenas("season,team,rink\n*,ATL,Philips Arena\n20112012,WPG,MTS Centre\n".as_bytes())
            .unwrap();
        map.read_neutral_sites("season,game_id\n20112012,g1\n".as_bytes()).unwrap();
        assert_eq!(map.rink_for("20082009", "ATL"), "Philips Arena");
        assert_eq!(map.rink_for("20112012", "WPG"), "MTS Centre");
        assert_eq!(map.rink_for("20112012", "BOS"), "BOS");
        assert!(map.is_neutral("20112012", "g1"));

        let log = GameLog {
            game_id: "g1".into(),
            season: "20122013".into(),
            home_team: "N.J".into(),
            away_team: "L.A".into(),
            events: vec![ev(0, EventType::Fac, None)],
        };
        let mut opts = TeamGameOptions::default();
        opts.rinks.mark_neutral("20122013", "g1");
        assert_eq!(team_games_from_logs(std::slice::from_ref(&log), &opts).0.len(), 2);
        opts.neutral_sites = NeutralSitePolicy::Exclude;
        let (rows, diags) = team_games_from_logs(&[log], &opts);
        assert!(rows.is_empty());
        assert_eq!(diags.len(), 1);
    }

    #[test]
    fn table_round_trip() {
        let events = vec![
            ev(0, EventType::Fac, None),
            ev(5, EventType::Give, Some("N.J")),
            ev(77, EventType::Shot, Some("L.A")),
        ];
        let (h, a) = build_team_games(&intervals(&events), &TeamGameOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_team_games(&mut buf, &[h.clone(), a.clone()]).unwrap();
        assert_eq!(read_team_games(buf.as_slice()).unwrap(), vec![h, a]);
    }
}
