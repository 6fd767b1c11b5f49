//! Yearly and pooled fits per event type, multiplicative effect tables, and
//! persistence classification of rink and homer effects.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{encode_pooled, encode_yearly, ColumnLabel, DesignMatrix, EncodeOptions, Family};
use crate::error::{Error, Result};
use crate::event::Metric;
use crate::seed;
use crate::solver::{cross_validate, ElasticNetSpec, FitResult};
use crate::teamgame::TeamGame;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Season(String),
    Pooled,
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Season(s) => f.write_str(s),
            Scope::Pooled => f.write_str("pooled"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Above,
    Below,
}

impl Direction {
    fn of(coef: f64) -> Option<Direction> {
        if coef > 0.0 {
            Some(Direction::Above)
        } else if coef < 0.0 {
            Some(Direction::Below)
        } else {
            None
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Above => "above",
            Direction::Below => "below",
        }
    }
}

/// Multiplicative effects from one fit at its CV-chosen λ. Per-season terms
/// are keyed by season; a yearly table has exactly one key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectTable {
    pub metric: Metric,
    pub scope: Scope,
    pub lambda_chosen: f64,
    pub mean_effect: BTreeMap<String, f64>,
    pub asd_effect: BTreeMap<String, f64>,
    pub home_effect: BTreeMap<String, f64>,
    pub rink_effect: BTreeMap<String, f64>,
    pub homer_effect: BTreeMap<String, f64>,
    /// Log-scale coefficient of every column, keyed by column label.
    pub coefficients: BTreeMap<String, f64>,
}

impl EffectTable {
    pub fn from_fit(metric: Metric, scope: Scope, x: &DesignMatrix, rows: &[TeamGame], fit: &FitResult) -> Self {
        let coef = fit.chosen_coefficients();
        let intercept = fit.chosen_intercept();
        let seasons: BTreeSet<&str> = rows.iter().map(|r| r.season.as_str()).collect();
        let mut t = EffectTable {
            metric,
            scope,
            lambda_chosen: fit.lambda_chosen(),
            mean_effect: BTreeMap::new(),
            asd_effect: BTreeMap::new(),
            home_effect: BTreeMap::new(),
            rink_effect: BTreeMap::new(),
            homer_effect: BTreeMap::new(),
            coefficients: BTreeMap::new(),
        };
        let per_season = |label: &ColumnLabel, s: &str| match &label.season {
            Some(ls) => ls == s,
            None => true,
        };
        for s in &seasons {
            let mut mu = intercept;
            for (j, label) in x.labels().iter().enumerate() {
                if !per_season(label, s) {
                    continue;
                }
                match label.family {
                    Family::Intercept => mu += coef[j],
                    Family::Asd => {
                        t.asd_effect.insert((*s).to_owned(), coef[j].exp());
                    }
                    Family::Home => {
                        t.home_effect.insert((*s).to_owned(), coef[j].exp());
                    }
                    _ => {}
                }
            }
            t.mean_effect.insert((*s).to_owned(), mu.exp());
        }
        for (j, label) in x.labels().iter().enumerate() {
            let level = label.level.clone().unwrap_or_default();
            match label.family {
                Family::Rink => {
                    t.rink_effect.insert(level, coef[j].exp());
                }
                Family::HomeRink => {
                    t.homer_effect.insert(level, coef[j].exp());
                }
                _ => {}
            }
            t.coefficients.insert(label.to_string(), coef[j]);
        }
        t
    }

    fn coefficient(&self, family: Family, level: &str) -> Option<f64> {
        self.coefficients
            .get(&ColumnLabel::new(family, Some(level), None).to_string())
            .copied()
    }

    pub fn rink_coefficient(&self, rink: &str) -> Option<f64> {
        self.coefficient(Family::Rink, rink)
    }

    pub fn homer_coefficient(&self, rink: &str) -> Option<f64> {
        self.coefficient(Family::HomeRink, rink)
    }

    pub fn rinks(&self) -> impl Iterator<Item = &str> {
        self.rink_effect.keys().map(String::as_str)
    }
}

/// One fitted model together with the design it was fitted on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub table: EffectTable,
    pub labels: Vec<ColumnLabel>,
    pub penalized: Vec<bool>,
    pub fit: FitResult,
}

#[derive(Debug, Clone, Default)]
pub struct EffectsSettings {
    pub spec: ElasticNetSpec,
    pub encode: EncodeOptions,
    /// Yearly fits a persistent effect must be nonzero in; `None` means
    /// one fewer than the number of seasons.
    pub min_seasons: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventModels {
    pub metric: Metric,
    pub yearly: Vec<ModelFit>,
    pub pooled: ModelFit,
}

impl EventModels {
    pub fn yearly_tables(&self) -> Vec<&EffectTable> {
        self.yearly.iter().map(|m| &m.table).collect()
    }
}

fn fit_one(rows: &[TeamGame], metric: Metric, scope: Scope, settings: &EffectsSettings) -> Result<ModelFit> {
    let (x, y) = match &scope {
        Scope::Season(_) => encode_yearly(rows, metric, &settings.encode)?,
        Scope::Pooled => encode_pooled(rows, metric, &settings.encode)?,
    };
    let spec = ElasticNetSpec {
        seed: seed::derive(settings.spec.seed, &format!("folds/{metric}/{scope}")),
        ..settings.spec.clone()
    };
    let fit = cross_validate(&x, &y.values, &spec).map_err(|e| e.context(format!("event {metric}, {scope}")))?;
    log::debug!(
        "{metric} {scope}: {} rows, {} columns, lambda {:.5} ({} of {})",
        x.n_rows(),
        x.n_cols(),
        fit.lambda_chosen(),
        fit.chosen_index() + 1,
        fit.lambdas.len()
    );
    Ok(ModelFit {
        table: EffectTable::from_fit(metric, scope, &x, rows, &fit),
        labels: x.labels().to_vec(),
        penalized: x.penalized().to_vec(),
        fit,
    })
}

/// One cross-validated fit per season plus one pooled fit.
pub fn fit_event_models(rows: &[TeamGame], metric: Metric, settings: &EffectsSettings) -> Result<EventModels> {
    let mut by_season: BTreeMap<&str, Vec<TeamGame>> = BTreeMap::new();
    for r in rows {
        by_season.entry(&r.season).or_default().push(r.clone());
    }
    if by_season.is_empty() {
        return Err(Error::InvalidInput("no team-game rows".into()));
    }
    let (yearly, pooled) = rayon::join(
        || {
            by_season
                .par_iter()
                .map(|(s, season_rows)| fit_one(season_rows, metric, Scope::Season((*s).to_owned()), settings))
                .collect::<Result<Vec<_>>>()
        },
        || fit_one(rows, metric, Scope::Pooled, settings),
    );
    Ok(EventModels {
        metric,
        yearly: yearly?,
        pooled: pooled?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceEntry {
    pub rink: String,
    pub persistent: bool,
    pub direction: Option<Direction>,
    pub pooled_effect: f64,
    /// exp(γ̂) per season; `None` where the rink is absent that season.
    pub yearly_effects: BTreeMap<String, Option<f64>>,
    pub homer_persistent: bool,
    pub homer_direction: Option<Direction>,
    pub pooled_homer_effect: f64,
    pub yearly_homer_effects: BTreeMap<String, Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceReport {
    pub metric: Metric,
    pub seasons: Vec<String>,
    pub min_seasons: usize,
    pub entries: BTreeMap<String, PersistenceEntry>,
}

impl PersistenceReport {
    pub fn persistent(&self) -> impl Iterator<Item = &PersistenceEntry> {
        self.entries.values().filter(|e| e.persistent)
    }
}

/// The three sign conditions: the pooled coefficient is nonzero, at least
/// `min_seasons` yearly coefficients are nonzero with its sign, and none is
/// nonzero with the opposite sign. Absent seasons count as zero.
pub fn sign_rule(yearly: &[Option<f64>], pooled: f64, min_seasons: usize) -> Option<Direction> {
    let dir = Direction::of(pooled)?;
    let mut same = 0;
    for c in yearly.iter().flatten() {
        match Direction::of(*c) {
            Some(d) if d == dir => same += 1,
            Some(_) => return None,
            None => {}
        }
    }
    (same >= min_seasons).then_some(dir)
}

pub fn default_min_seasons(n_seasons: usize) -> usize {
    n_seasons.saturating_sub(1).max(1)
}

pub fn classify_persistence(yearly: &[&EffectTable], pooled: &EffectTable, rink: &str, min_seasons: usize) -> PersistenceEntry {
    let season_of = |t: &EffectTable| t.scope.to_string();
    let rink_coefs: Vec<Option<f64>> = yearly.iter().map(|t| t.rink_coefficient(rink)).collect();
    let homer_coefs: Vec<Option<f64>> = yearly.iter().map(|t| t.homer_coefficient(rink)).collect();
    let pooled_rink = pooled.rink_coefficient(rink).unwrap_or(0.0);
    let pooled_homer = pooled.homer_coefficient(rink).unwrap_or(0.0);
    let direction = sign_rule(&rink_coefs, pooled_rink, min_seasons);
    let homer_direction = sign_rule(&homer_coefs, pooled_homer, min_seasons);
    let effects = |coefs: &[Option<f64>]| {
        yearly
            .iter()
            .zip(coefs)
            .map(|(t, c)| (season_of(t), c.map(f64::exp)))
            .collect()
    };
    PersistenceEntry {
        rink: rink.to_owned(),
        persistent: direction.is_some(),
        direction,
        pooled_effect: pooled_rink.exp(),
        yearly_effects: effects(&rink_coefs),
        homer_persistent: homer_direction.is_some(),
        homer_direction,
        pooled_homer_effect: pooled_homer.exp(),
        yearly_homer_effects: effects(&homer_coefs),
    }
}

/// Classifies every rink seen in any of the fits.
pub fn persistence_report(models: &EventModels, min_seasons: Option<usize>) -> PersistenceReport {
    let yearly = models.yearly_tables();
    let min_seasons = min_seasons.unwrap_or_else(|| default_min_seasons(yearly.len()));
    let mut rinks: BTreeSet<&str> = models.pooled.table.rinks().collect();
    for t in &yearly {
        rinks.extend(t.rinks());
    }
    PersistenceReport {
        metric: models.metric,
        seasons: yearly.iter().map(|t| t.scope.to_string()).collect(),
        min_seasons,
        entries: rinks
            .into_iter()
            .map(|r| (r.to_owned(), classify_persistence(&yearly, &models.pooled.table, r, min_seasons)))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventAnalysis {
    pub models: EventModels,
    pub report: PersistenceReport,
}

pub fn analyze_event(rows: &[TeamGame], metric: Metric, settings: &EffectsSettings) -> Result<EventAnalysis> {
    let models = fit_event_models(rows, metric, settings)?;
    let report = persistence_report(&models, settings.min_seasons);
    Ok(EventAnalysis { models, report })
}

/// Runs every requested event independently; output order follows `metrics`.
pub fn analyze_events(rows: &[TeamGame], metrics: &[Metric], settings: &EffectsSettings) -> Result<Vec<EventAnalysis>> {
    metrics
        .par_iter()
        .map(|&m| analyze_event(rows, m, settings))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub metric: Metric,
    pub persistent: usize,
    pub persistent_homers: usize,
    /// max − min of the persistent pooled effects; 0 when there are none.
    pub range: f64,
    /// Averages over the yearly fits.
    pub mean_asd_effect: f64,
    pub mean_home_effect: f64,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        1.0
    } else {
        s / n as f64
    }
}

pub fn summary_row(report: &PersistenceReport, yearly: &[&EffectTable]) -> SummaryRow {
    let pooled: Vec<f64> = report.persistent().map(|e| e.pooled_effect).collect();
    let range = if pooled.is_empty() {
        0.0
    } else {
        pooled.iter().copied().fold(f64::NEG_INFINITY, f64::max) - pooled.iter().copied().fold(f64::INFINITY, f64::min)
    };
    SummaryRow {
        metric: report.metric,
        persistent: pooled.len(),
        persistent_homers: report.entries.values().filter(|e| e.homer_persistent).count(),
        range,
        mean_asd_effect: mean(yearly.iter().flat_map(|t| t.asd_effect.values().copied())),
        mean_home_effect: mean(yearly.iter().flat_map(|t| t.home_effect.values().copied())),
    }
}

pub fn summarize(analyses: &[EventAnalysis]) -> Vec<SummaryRow> {
    analyses
        .iter()
        .map(|a| summary_row(&a.report, &a.models.yearly_tables()))
        .collect()
}

#[derive(Serialize)]
struct EffectsDocument<'a> {
    schema_version: u32,
    events: Vec<EventDocument<'a>>,
}

#[derive(Serialize)]
struct EventDocument<'a> {
    metric: Metric,
    yearly: Vec<&'a EffectTable>,
    pooled: &'a EffectTable,
    persistence: &'a PersistenceReport,
}

/// Effect tables and persistence reports as one JSON document.
pub fn write_effects_json<W: Write>(mut out: W, analyses: &[EventAnalysis]) -> Result<()> {
    let doc = EffectsDocument {
        schema_version: SCHEMA_VERSION,
        events: analyses
            .iter()
            .map(|a| EventDocument {
                metric: a.models.metric,
                yearly: a.models.yearly_tables(),
                pooled: &a.models.pooled.table,
                persistence: &a.report,
            })
            .collect(),
    };
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)?;
    Ok(())
}

/// One event's entry in the effects document, as read back.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct EventEffects {
    pub metric: Metric,
    pub yearly: Vec<EffectTable>,
    pub pooled: EffectTable,
    pub persistence: PersistenceReport,
}

impl EventEffects {
    pub fn summary(&self) -> SummaryRow {
        summary_row(&self.persistence, &self.yearly.iter().collect::<Vec<_>>())
    }
}

#[derive(Deserialize)]
struct EffectsInput {
    schema_version: u32,
    events: Vec<EventEffects>,
}

/// Reads back [`write_effects_json`] output.
pub fn read_effects_json<R: std::io::Read>(input: R) -> Result<Vec<EventEffects>> {
    let doc: EffectsInput = serde_json::from_reader(input)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::Schema(format!(
            "effects schema_version {} is not supported (expected {SCHEMA_VERSION})",
            doc.schema_version
        )));
    }
    Ok(doc.events)
}

pub fn read_persistence_json<R: std::io::Read>(input: R) -> Result<Vec<PersistenceReport>> {
    Ok(read_effects_json(input)?.into_iter().map(|e| e.persistence).collect())
}

/// Long-format effect table: `event,scope,term,level,season,coefficient,effect`.
pub fn write_effects_csv<W: Write>(out: W, analyses: &[EventAnalysis]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["event", "scope", "term", "level", "season", "coefficient", "effect"])?;
    for a in analyses {
        let tables = a.models.yearly_tables().into_iter().chain(std::iter::once(&a.models.pooled.table));
        for t in tables {
            for (label, c) in &t.coefficients {
                let l: ColumnLabel = label.parse()?;
                w.write_record([
                    t.metric.as_str(),
                    &t.scope.to_string(),
                    l.family.as_str(),
                    l.level.as_deref().unwrap_or(""),
                    l.season.as_deref().unwrap_or(""),
                    &c.to_string(),
                    &c.exp().to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn opt_dir(d: Option<Direction>) -> &'static str {
    d.map_or("", Direction::as_str)
}

/// One row per (event, rink) with yearly effects in season order; absent
/// seasons are left empty.
pub fn write_persistence_csv<W: Write>(out: W, reports: &[PersistenceReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "event",
        "rink",
        "persistent",
        "direction",
        "pooled_effect",
        "homer_persistent",
        "homer_direction",
        "pooled_homer_effect",
        "yearly_effects",
    ])?;
    for r in reports {
        for e in r.entries.values() {
            let yearly: Vec<String> = r
                .seasons
                .iter()
                .map(|s| match e.yearly_effects.get(s).copied().flatten() {
                    Some(v) => format!("{s}={v}"),
                    None => format!("{s}="),
                })
                .collect();
            w.write_record([
                r.metric.as_str(),
                &e.rink,
                &e.persistent.to_string(),
                opt_dir(e.direction),
                &e.pooled_effect.to_string(),
                &e.homer_persistent.to_string(),
                opt_dir(e.homer_direction),
                &e.pooled_homer_effect.to_string(),
                &yearly.join(";"),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "event",
        "persistent_rink_effects",
        "persistent_homer_effects",
        "range",
        "mean_asd_effect",
        "mean_home_effect",
    ])?;
    for r in rows {
        w.write_record([
            r.metric.as_str(),
            &r.persistent.to_string(),
            &r.persistent_homers.to_string(),
            &format!("{:.3}", r.range),
            &format!("{:.3}", r.mean_asd_effect),
            &format!("{:.3}", r.mean_home_effect),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Plot-ready grid: one row per rink × season × event with the yearly
/// effect, plus a `pooled` row, and the rink's persistence direction.
pub fn write_grid_csv<W: Write>(out: W, reports: &[PersistenceReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rink", "season", "event", "effect", "persistent", "direction"])?;
    for r in reports {
        for e in r.entries.values() {
            let rows = r
                .seasons
                .iter()
                .map(|s| (s.as_str(), e.yearly_effects.get(s).copied().flatten()))
                .chain(std::iter::once(("pooled", Some(e.pooled_effect))));
            for (season, effect) in rows {
                w.write_record([
                    e.rink.as_str(),
                    season,
                    r.metric.as_str(),
                    &effect.map_or(String::new(), |v| v.to_string()),
                    &e.persistent.to_string(),
                    opt_dir(e.direction),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
