//! Play-by-play ingestion: parsing the delimited event log, per-event
//! interval lengths, and the non-empty-net five-on-five filter.

use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::EventType;

/// Seconds of regulation play (three 20-minute periods).
pub const REGULATION_SECONDS: u32 = 3600;
pub const PERIOD_SECONDS: u32 = 1200;

/// Required header, in order. A trailing `player` column is also accepted.
pub const PBP_COLUMNS: [&str; 14] = [
    "season",
    "game_id",
    "period",
    "elapsed_seconds",
    "event_type",
    "event_team",
    "home_team",
    "away_team",
    "home_score",
    "away_score",
    "home_skaters",
    "away_skaters",
    "home_goalie_on",
    "away_goalie_on",
];
pub const PLAYER_COLUMN: &str = "player";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RawEvent {
    pub season: String,
    pub game_id: String,
    pub period: u32,
    pub elapsed_seconds: u32,
    pub event_type: EventType,
    pub event_team: Option<String>,
    pub home_team: String,
    pub away_team: String,
    pub home_score: u32,
    pub away_score: u32,
    pub home_skaters: u8,
    pub away_skaters: u8,
    pub home_goalie_on: bool,
    pub away_goalie_on: bool,
    /// Present only in the extended schema used for player adjustments.
    pub player: Option<String>,
}

impl RawEvent {
    pub fn is_home_event(&self) -> bool {
        self.event_team.as_deref() == Some(self.home_team.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventInterval {
    pub event: RawEvent,
    /// Seconds until the next event, or until the end of regulation.
    pub length_seconds: f64,
}

/// All rows of one game, sorted by `(period, elapsed_seconds)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GameLog {
    pub game_id: String,
    pub season: String,
    pub home_team: String,
    pub away_team: String,
    pub events: Vec<RawEvent>,
}

/// A non-fatal note produced while ingesting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub game_id: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl Diagnostic {
    pub fn game(game_id: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            game_id: Some(game_id.to_owned()),
            line: None,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParsedLog {
    pub games: Vec<GameLog>,
    pub diagnostics: Vec<Diagnostic>,
    /// Whether the input carried the `player` column.
    pub has_player: bool,
}

fn field_err(line: usize, field: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        field: field.to_owned(),
        message: message.into(),
    }
}

fn parse_uint<T: std::str::FromStr>(raw: &str, line: usize, field: &str) -> Result<T> {
    raw.trim()
        .parse::<T>()
        .map_err(|_| field_err(line, field, format!("expected a non-negative integer, got `{raw}`")))
}

fn parse_flag(raw: &str, line: usize, field: &str) -> Result<bool> {
    match raw.trim() {
        "1" => Ok(true),
        "0" => Ok(false),
        other => Err(field_err(line, field, format!("expected `1` or `0`, got `{other}`"))),
    }
}

fn parse_skaters(raw: &str, line: usize, field: &str) -> Result<u8> {
    let n: u8 = parse_uint(raw, line, field)?;
    if !(3..=6).contains(&n) {
        return Err(field_err(line, field, format!("skater count {n} outside 3..=6")));
    }
    Ok(n)
}

fn non_empty(raw: &str, line: usize, field: &str) -> Result<String> {
    let v = raw.trim();
    if v.is_empty() {
        return Err(field_err(line, field, "missing value"));
    }
    Ok(v.to_owned())
}

fn parse_row(rec: &csv::StringRecord, line: usize, has_player: bool) -> Result<RawEvent> {
    let get = |i: usize| rec.get(i).unwrap_or("");
    let season = non_empty(get(0), line, "season")?;
    let game_id = non_empty(get(1), line, "game_id")?;
    let period: u32 = parse_uint(get(2), line, "period")?;
    if period == 0 {
        return Err(field_err(line, "period", "periods start at 1"));
    }
    let elapsed_seconds: u32 = parse_uint(get(3), line, "elapsed_seconds")?;
    if period <= 3 && elapsed_seconds > REGULATION_SECONDS {
        return Err(field_err(
            line,
            "elapsed_seconds",
            format!("{elapsed_seconds} exceeds regulation length in period {period}"),
        ));
    }
    let event_type: EventType = get(4)
        .trim()
        .parse()
        .map_err(|_| field_err(line, "event_type", format!("unknown event type `{}`", get(4))))?;
    let home_team = non_empty(get(6), line, "home_team")?;
    let away_team = non_empty(get(7), line, "away_team")?;
    if home_team == away_team {
        return Err(field_err(line, "away_team", "home and away team are identical"));
    }
    let event_team = match get(5).trim() {
        "" => None,
        t => Some(t.to_owned()),
    };
    match &event_team {
        None if event_type.requires_team() => {
            return Err(field_err(line, "event_team", format!("{event_type} requires an event team")));
        }
        Some(t) if *t != home_team && *t != away_team => {
            return Err(field_err(
                line,
                "event_team",
                format!("`{t}` is neither `{home_team}` nor `{away_team}`"),
            ));
        }
        _ => {}
    }
    let player = if has_player {
        match rec.get(14).map(str::trim) {
            None | Some("") => None,
            Some(p) => Some(p.to_owned()),
        }
    } else {
        None
    };
    Ok(RawEvent {
        season,
        game_id,
        period,
        elapsed_seconds,
        event_type,
        event_team,
        home_score: parse_uint(get(8), line, "home_score")?,
        away_score: parse_uint(get(9), line, "away_score")?,
        home_skaters: parse_skaters(get(10), line, "home_skaters")?,
        away_skaters: parse_skaters(get(11), line, "away_skaters")?,
        home_goalie_on: parse_flag(get(12), line, "home_goalie_on")?,
        away_goalie_on: parse_flag(get(13), line, "away_goalie_on")?,
        home_team,
        away_team,
        player,
    })
}

fn check_header(header: &csv::StringRecord) -> Result<bool> {
    let cols: Vec<&str> = header.iter().map(str::trim).collect();
    let base_ok = cols.len() >= PBP_COLUMNS.len() && cols[..PBP_COLUMNS.len()] == PBP_COLUMNS;
    match (base_ok, cols.len()) {
        (true, 14) => Ok(false),
        (true, 15) if cols[14] == PLAYER_COLUMN => Ok(true),
        _ => Err(Error::Schema(format!(
            "expected header `{}` (optionally followed by `{PLAYER_COLUMN}`), got `{}`",
            PBP_COLUMNS.join(","),
            cols.join(",")
        ))),
    }
}

/// Parses a play-by-play log and groups its rows by game.
///
/// Games are returned ordered by `(season, game_id)`; rows within a game are
/// stably sorted by `(period, elapsed_seconds)`. Games whose rows all lie in
/// overtime are dropped with a diagnostic, as are rows whose clock does not
/// fall inside their recorded period (those are kept, only flagged).
pub fn parse_pbp<R: Read>(input: R) -> Result<ParsedLog> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input);
    let has_player = check_header(reader.headers()?)?;
    let width = if has_player { 15 } else { 14 };

    let mut grouped: BTreeMap<(String, String), Vec<(usize, RawEvent)>> = BTreeMap::new();
    let mut diagnostics = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != width {
            return Err(field_err(
                line,
                "*",
                format!("expected {width} columns, found {}", rec.len()),
            ));
        }
        let ev = parse_row(&rec, line, has_player)?;
        if ev.period <= 3 {
            let lo = PERIOD_SECONDS * (ev.period - 1);
            let hi = PERIOD_SECONDS * ev.period;
            if ev.elapsed_seconds < lo || ev.elapsed_seconds > hi {
                diagnostics.push(Diagnostic {
                    game_id: Some(ev.game_id.clone()),
                    line: Some(line),
                    message: format!(
                        "clock {} lies outside period {}; keeping the recorded period",
                        ev.elapsed_seconds, ev.period
                    ),
                });
            }
        }
        grouped.entry((ev.season.clone(), ev.game_id.clone())).or_default().push((line, ev));
    }

    let mut games = Vec::with_capacity(grouped.len());
    for ((_, game_id), mut rows) in grouped {
        let (first_line, first) = &rows[0];
        for (line, ev) in &rows[1..] {
            if ev.home_team != first.home_team || ev.away_team != first.away_team {
                return Err(field_err(
                    *line,
                    "game_id",
                    format!(
                        "teams disagree with line {first_line} of game `{game_id}`"
                    ),
                ));
            }
        }
        let mut seen: HashSet<&RawEvent> = HashSet::with_capacity(rows.len());
        for (line, ev) in &rows {
            if !seen.insert(ev) {
                return Err(field_err(
                    *line,
                    "*",
                    format!("duplicate event row in game `{game_id}`"),
                ));
            }
        }
        if rows.iter().all(|(_, ev)| ev.period > 3) {
            diagnostics.push(Diagnostic::game(
                &game_id,
                "game rejected: no events in periods 1-3",
            ));
            continue;
        }
        let season = first.season.clone();
        let home_team = first.home_team.clone();
        let away_team = first.away_team.clone();
        rows.sort_by_key(|(_, ev)| (ev.period, ev.elapsed_seconds));
        games.push(GameLog {
            game_id,
            season,
            home_team,
            away_team,
            events: rows.into_iter().map(|(_, ev)| ev).collect(),
        });
    }
    games.sort_by(|a, b| (&a.season, &a.game_id).cmp(&(&b.season, &b.game_id)));
    Ok(ParsedLog {
        games,
        diagnostics,
        has_player,
    })
}

/// Writes events in the ingest schema. The `player` column is emitted when
/// `with_player` is set.
pub fn write_pbp<'a, W, I>(out: W, events: I, with_player: bool) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a RawEvent>,
{
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = PBP_COLUMNS.to_vec();
    if with_player {
        header.push(PLAYER_COLUMN);
    }
    w.write_record(&header)?;
    let flag = |b: bool| if b { "1" } else { "0" };
    for ev in events {
        let mut row = vec![
            ev.season.clone(),
            ev.game_id.clone(),
            ev.period.to_string(),
            ev.elapsed_seconds.to_string(),
            ev.event_type.to_string(),
            ev.event_team.clone().unwrap_or_default(),
            ev.home_team.clone(),
            ev.away_team.clone(),
            ev.home_score.to_string(),
            ev.away_score.to_string(),
            ev.home_skaters.to_string(),
            ev.away_skaters.to_string(),
            flag(ev.home_goalie_on).to_owned(),
            flag(ev.away_goalie_on).to_owned(),
        ];
        if with_player {
            row.push(ev.player.clone().unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Computes the time each regulation event "owns": the gap to the next
/// event, with the final event running to the end of the third period.
/// Overtime rows are ignored. Lengths must cover exactly 3600 seconds.
pub fn compute_intervals(events: &[RawEvent]) -> Result<Vec<EventInterval>> {
    let regulation: Vec<&RawEvent> = events.iter().filter(|e| e.period <= 3).collect();
    let Some(first) = regulation.first() else {
        return Err(Error::InvalidInput("no events in periods 1-3".into()));
    };
    let game_id = &first.game_id;
    for pair in regulation.windows(2) {
        if pair[1].elapsed_seconds < pair[0].elapsed_seconds {
            return Err(Error::game(
                game_id.as_str(),
                format!(
                    "events out of order: t={} follows t={}",
                    pair[1].elapsed_seconds, pair[0].elapsed_seconds
                ),
            ));
        }
    }
    let mut out = Vec::with_capacity(regulation.len());
    let mut total = 0u32;
    for (i, ev) in regulation.iter().enumerate() {
        let end = regulation
            .get(i + 1)
            .map_or(REGULATION_SECONDS, |next| next.elapsed_seconds);
        let len = end - ev.elapsed_seconds;
        total += len;
        out.push(EventInterval {
            event: (*ev).clone(),
            length_seconds: f64::from(len),
        });
    }
    if total != REGULATION_SECONDS {
        return Err(Error::game(
            game_id.as_str(),
            format!("intervals cover {total} s of regulation, expected {REGULATION_SECONDS}"),
        ));
    }
    Ok(out)
}

/// Five skaters a side, both goalies in net, regulation time.
pub fn is_nen5v5(ev: &RawEvent) -> bool {
    ev.period <= 3
        && ev.home_skaters == 5
        && ev.away_skaters == 5
        && ev.home_goalie_on
        && ev.away_goalie_on
}

pub fn filter_nen5v5(intervals: &[EventInterval]) -> Vec<EventInterval> {
    intervals
        .iter()
        .filter(|iv| is_nen5v5(&iv.event))
        .cloned()
        .collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const HEADER: &str = "season,game_id,period,elapsed_seconds,event_type,event_team,home_team,away_team,home_score,away_score,home_skaters,away_skaters,home_goalie_on,away_goalie_on";

    pub(crate) fn ev(t: u32, ty: EventType, team: Option<&str>) -> RawEvent {
        RawEvent {
            season: "20122013".into(),
            game_id: "g1".into(),
            period: (t / PERIOD_SECONDS + 1).min(3),
            elapsed_seconds: t,
            event_type: ty,
            event_team: team.map(str::to_owned),
            home_team: "N.J".into(),
            away_team: "L.A".into(),
            home_score: 0,
            away_score: 0,
            home_skaters: 5,
            away_skaters: 5,
            home_goalie_on: true,
            away_goalie_on: true,
            player: None,
        }
    }

    fn parse_str(body: &str) -> Result<ParsedLog> {
        parse_pbp(format!("{HEADER}\n{body}").as_bytes())
    }

    #[test]
    fn single_hit_row() {
        let log = parse_str("20122013,g1,1,15,HIT,N.J,N.J,L.A,0,0,5,5,1,1\n").unwrap();
        assert_eq!(log.games.len(), 1);
        let e = &log.games[0].events[0];
        assert_eq!(e.event_type, EventType::Hit);
        assert_eq!(e.event_team.as_deref(), Some("N.J"));
        assert_eq!(e.elapsed_seconds, 15);
        assert!(!log.has_player);
    }

    #[test]
    fn skater_count_out_of_range() {
        let err = parse_str("20122013,g1,1,15,HIT,N.J,N.J,L.A,0,0,9,5,1,1\n").unwrap_err();
        match err {
            Error::Parse { line, field, .. } => {
                assert_eq!(line, 2);
                assert_eq!(field, "home_skaters");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn interleaved_games_are_grouped_and_sorted() {
        let body = "\
20122013,g2,1,300,SHOT,BOS,BOS,TOR,0,0,5,5,1,1
20122013,g1,1,100,HIT,N.J,N.J,L.A,0,0,5,5,1,1
20122013,g2,1,0,FAC,,BOS,TOR,0,0,5,5,1,1
20122013,g1,1,0,FAC,,N.J,L.A,0,0,5,5,1,1
20122013,g2,2,1500,MISS,TOR,BOS,TOR,0,0,5,5,1,1
";
        let log = parse_str(body).unwrap();
        assert_eq!(log.games.len(), 2);
        assert_eq!(log.games[0].game_id, "g1");
        let g2: Vec<u32> = log.games[1].events.iter().map(|e| e.elapsed_seconds).collect();
        assert_eq!(g2, vec![0, 300, 1500]);
    }

    #[test]
    fn empty_event_team_only_for_faceoffs_and_other() {
        assert!(parse_str("20122013,g1,1,0,FAC,,N.J,L.A,0,0,5,5,1,1\n").is_ok());
        assert!(parse_str("20122013,g1,1,0,SHOT,,N.J,L.A,0,0,5,5,1,1\n").is_err());
        assert!(parse_str("20122013,g1,1,0,SHOT,BOS,N.J,L.A,0,0,5,5,1,1\n").is_err());
    }

    #[test]
    fn missing_strength_field_is_rejected() {
        let err = parse_str("20122013,g1,1,0,FAC,,N.J,L.A,0,0,,5,1,1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { ref field, .. } if field == "home_skaters"));
    }

    #[test]
    fn wrong_header_is_a_schema_error() {
        let err = parse_pbp("a,b,c\n1,2,3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn duplicate_rows_collide() {
        let body = "\
20122013,g1,1,100,HIT,N.J,N.J,L.A,0,0,5,5,1,1
20122013,g1,1,100,HIT,N.J,N.J,L.A,0,0,5,5,1,1
";
        assert!(parse_str(body).is_err());
    }

    #[test]
    fn overtime_only_game_is_rejected_with_diagnostic() {
        let log = parse_str("20122013,g1,4,3700,SHOT,N.J,N.J,L.A,0,0,4,4,1,1\n").unwrap();
        assert!(log.games.is_empty());
        assert_eq!(log.diagnostics.len(), 1);
    }

    #[test]
    fn period_mismatch_is_flagged_not_fatal() {
        let log = parse_str("20122013,g1,2,100,SHOT,N.J,N.J,L.A,0,0,5,5,1,1\n").unwrap();
        assert_eq!(log.games[0].events[0].period, 2);
        assert_eq!(log.diagnostics.len(), 1);
        assert_eq!(log.diagnostics[0].line, Some(2));
    }

    #[test]
    fn player_column_is_optional() {
        let text = format!("{HEADER},player\n20122013,g1,1,5,HIT,N.J,N.J,L.A,0,0,5,5,1,1,C Clutterbuck\n");
        let log = parse_pbp(text.as_bytes()).unwrap();
        assert!(log.has_player);
        assert_eq!(log.games[0].events[0].player.as_deref(), Some("C Clutterbuck"));
    }

    #[test]
    fn interval_lengths() {
        let events = vec![
            ev(0, EventType::Fac, None),
            ev(1240, EventType::Hit, Some("N.J")),
            ev(1453, EventType::Shot, Some("L.A")),
        ];
        let lens: Vec<f64> = compute_intervals(&events)
            .unwrap()
            .iter()
            .map(|i| i.length_seconds)
            .collect();
        assert_eq!(lens, vec![1240.0, 213.0, 2147.0]);
    }

    #[test]
    fn lone_event_owns_the_whole_game() {
        let iv = compute_intervals(&[ev(0, EventType::Fac, None)]).unwrap();
        assert_eq!(iv[0].length_seconds, 3600.0);
    }

    #[test]
    fn out_of_order_is_an_error() {
        let events = vec![ev(10, EventType::Fac, None), ev(5, EventType::Hit, Some("N.J"))];
        assert!(compute_intervals(&events).is_err());
    }

    #[test]
    fn late_first_event_leaves_game_short() {
        assert!(compute_intervals(&[ev(30, EventType::Fac, None)]).is_err());
    }

    #[test]
    fn overtime_rows_do_not_count() {
        let mut ot = ev(3700, EventType::Shot, Some("N.J"));
        ot.period = 4;
        let iv = compute_intervals(&[ev(0, EventType::Fac, None), ot]).unwrap();
        assert_eq!(iv.len(), 1);
        assert_eq!(iv[0].length_seconds, 3600.0);
    }

    #[test]
    fn nen5v5_filter() {
        let mut pp = ev(0, EventType::Fac, None);
        pp.away_skaters = 4;
        let mut empty_net = ev(10, EventType::Shot, Some("N.J"));
        empty_net.home_goalie_on = false;
        let mut ot = ev(3650, EventType::Shot, Some("N.J"));
        ot.period = 4;
        let keep = ev(20, EventType::Hit, Some("L.A"));
        let ivs: Vec<EventInterval> = [pp, empty_net, ot, keep.clone()]
            .into_iter()
            .map(|event| EventInterval {
                event,
                length_seconds: 1.0,
            })
            .collect();
        let out = filter_nen5v5(&ivs);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].event, keep);
    }
}
