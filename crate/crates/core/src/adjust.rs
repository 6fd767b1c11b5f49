//! Rink-adjusted player counts and team CORSI percentages.
//!
//! Each recorded event at a rink with a persistent effect is counted as
//! 1/effect, or 1/(effect × homer effect) when the home team records it at
//! a rink with a persistent homer effect.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::effects::{PersistenceEntry, PersistenceReport};
use crate::error::{Error, Result};
use crate::event::Metric;
use crate::ingest::GameLog;
use crate::teamgame::{RinkMap, TeamGame};

/// Weight for one event given its rink's persistence entry.
pub fn entry_weight(entry: &PersistenceEntry, is_home: bool) -> f64 {
    if !entry.persistent {
        return 1.0;
    }
    if is_home && entry.homer_persistent {
        1.0 / (entry.pooled_effect * entry.pooled_homer_effect)
    } else {
        1.0 / entry.pooled_effect
    }
}

pub fn event_weight(report: &PersistenceReport, rink: &str, is_home: bool) -> Result<f64> {
    report
        .entries
        .get(rink)
        .map(|e| entry_weight(e, is_home))
        .ok_or_else(|| Error::InvalidInput(format!("rink `{rink}` has no {} persistence entry", report.metric)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RinkWeight {
    pub home: f64,
    pub away: f64,
}

/// Per-rink multipliers for one event type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjustmentWeights {
    pub metric: Metric,
    pub rinks: BTreeMap<String, RinkWeight>,
}

impl AdjustmentWeights {
    pub fn from_report(report: &PersistenceReport) -> Self {
        AdjustmentWeights {
            metric: report.metric,
            rinks: report
                .entries
                .iter()
                .map(|(r, e)| {
                    let w = RinkWeight {
                        home: entry_weight(e, true),
                        away: entry_weight(e, false),
                    };
                    (r.clone(), w)
                })
                .collect(),
        }
    }

    /// The same weight for both teams at every listed rink.
    pub fn uniform<'a>(metric: Metric, rinks: impl IntoIterator<Item = &'a str>, weight: f64) -> Self {
        AdjustmentWeights {
            metric,
            rinks: rinks
                .into_iter()
                .map(|r| (r.to_owned(), RinkWeight { home: weight, away: weight }))
                .collect(),
        }
    }

    pub fn weight(&self, rink: &str, is_home: bool) -> Result<f64> {
        let w = self
            .rinks
            .get(rink)
            .ok_or_else(|| Error::InvalidInput(format!("no {} weight for rink `{rink}`", self.metric)))?;
        Ok(if is_home { w.home } else { w.away })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjustedCountRow {
    pub name: String,
    pub team: String,
    pub metric: Metric,
    pub adjusted: f64,
    pub raw: u64,
    pub differential: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjustedCounts {
    pub metric: Metric,
    pub rows: Vec<AdjustedCountRow>,
    /// Matching events that carried no player.
    pub skipped: usize,
}

/// Sums event weights per (player, team) over every recorded event of the
/// metric's type, optionally restricted to one season. Rows are sorted by
/// adjusted count, descending.
pub fn adjust_player_counts(
    games: &[GameLog],
    weights: &AdjustmentWeights,
    rinks: &RinkMap,
    season: Option<&str>,
) -> Result<AdjustedCounts> {
    let event = weights.metric.primitive_event().ok_or_else(|| {
        Error::InvalidInput(format!("{} is not a single recorded event type", weights.metric))
    })?;
    let mut totals: BTreeMap<(String, String), (f64, u64)> = BTreeMap::new();
    let mut skipped = 0;
    for g in games.iter().filter(|g| season.is_none_or(|s| g.season == s)) {
        let rink = rinks.rink_for(&g.season, &g.home_team);
        for ev in g.events.iter().filter(|e| e.event_type == event) {
            let (Some(player), Some(team)) = (ev.player.as_ref(), ev.event_team.as_ref()) else {
                skipped += 1;
                continue;
            };
            let w = weights.weight(&rink, ev.is_home_event())?;
            let slot = totals.entry((player.clone(), team.clone())).or_default();
            slot.0 += w;
            slot.1 += 1;
        }
    }
    let mut rows: Vec<AdjustedCountRow> = totals
        .into_iter()
        .map(|((name, team), (adjusted, raw))| AdjustedCountRow {
            name,
            team,
            metric: weights.metric,
            adjusted,
            raw,
            differential: adjusted - raw as f64,
        })
        .collect();
    rows.sort_by(|a, b| b.adjusted.total_cmp(&a.adjusted).then_with(|| (&a.name, &a.team).cmp(&(&b.name, &b.team))));
    Ok(AdjustedCounts {
        metric: weights.metric,
        rows,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorsiPctRow {
    pub team: String,
    pub raw_for: u64,
    pub raw_against: u64,
    pub adjusted_for: f64,
    pub adjusted_against: f64,
    pub raw_pct: f64,
    pub adjusted_pct: f64,
}

/// CORSI-for share per team, before and after weighting every shot
/// attempt by the weight of the rink and side that recorded it.
pub fn adjust_corsi_pct(rows: &[TeamGame], weights: &AdjustmentWeights, season: Option<&str>) -> Result<Vec<CorsiPctRow>> {
    let rows: Vec<&TeamGame> = rows.iter().filter(|r| season.is_none_or(|s| r.season == s)).collect();
    let mut opponent: HashMap<(&str, &str, bool), u32> = HashMap::with_capacity(rows.len());
    for r in &rows {
        opponent.insert((&r.season, &r.game_id, r.is_home), r.corsi_count());
    }
    #[derive(Default)]
    struct Acc {
        raw_for: u64,
        raw_against: u64,
        adj_for: f64,
        adj_against: f64,
    }
    let mut acc: BTreeMap<&str, Acc> = BTreeMap::new();
    for r in &rows {
        let against = *opponent.get(&(r.season.as_str(), r.game_id.as_str(), !r.is_home)).ok_or_else(|| {
            Error::game(r.game_id.as_str(), "team-game row has no opponent row")
        })?;
        let cf = r.corsi_count();
        let a = acc.entry(&r.for_team).or_default();
        a.raw_for += u64::from(cf);
        a.raw_against += u64::from(against);
        a.adj_for += weights.weight(&r.rink, r.is_home)? * f64::from(cf);
        a.adj_against += weights.weight(&r.rink, !r.is_home)? * f64::from(against);
    }
    let share = |f: f64, a: f64| if f + a > 0.0 { f / (f + a) } else { 0.0 };
    Ok(acc
        .into_iter()
        .map(|(team, a)| CorsiPctRow {
            team: team.to_owned(),
            raw_for: a.raw_for,
            raw_against: a.raw_against,
            adjusted_for: a.adj_for,
            adjusted_against: a.adj_against,
            raw_pct: share(a.raw_for as f64, a.raw_against as f64),
            adjusted_pct: share(a.adj_for, a.adj_against),
        })
        .collect())
}

/// Fixed-point text without a sign on values that round to zero.
fn fixed(v: f64, decimals: usize) -> String {
    let text = format!("{v:.decimals$}");
    match text.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_owned(),
        _ => text,
    }
}

/// `name,team,adjusted,raw,differential`, one decimal place as in published
/// count tables.
pub fn write_counts_csv<W: Write>(out: W, counts: &AdjustedCounts) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["name", "team", "adjusted", "raw", "differential"])?;
    for r in &counts.rows {
        w.write_record([
            r.name.as_str(),
            &r.team,
            &fixed(r.adjusted, 1),
            &r.raw.to_string(),
            &fixed(r.differential, 1),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `team,adjusted,raw,differential` with percentages to four decimals,
/// sorted by adjusted percentage, descending.
pub fn write_pct_csv<W: Write>(out: W, rows: &[CorsiPctRow]) -> Result<()> {
    let mut sorted: Vec<&CorsiPctRow> = rows.iter().collect();
    sorted.sort_by(|a, b| b.adjusted_pct.total_cmp(&a.adjusted_pct).then_with(|| a.team.cmp(&b.team)));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["team", "adjusted", "raw", "differential"])?;
    for r in sorted {
        w.write_record([
            r.team.as_str(),
            &fixed(r.adjusted_pct, 4),
            &fixed(r.raw_pct, 4),
            &fixed(r.adjusted_pct - r.raw_pct, 4),
        ])?;
    }
    w.flush()?;
    Ok(())
}
