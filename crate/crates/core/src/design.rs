//! Design-matrix encoding for the yearly and pooled log-rate models.
//!
//! Every categorical level gets its own indicator column (no reference
//! level is dropped); the elastic-net penalty makes each effect a deviation
//! from the league baseline. Columns are stored sparsely and left raw; the
//! solver standardizes internally.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::Metric;
use crate::teamgame::TeamGame;

/// Added to every rate before taking logs.
pub const RATE_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Intercept,
    Rink,
    Asd,
    TeamFor,
    TeamAgainst,
    Home,
    HomeRink,
    /// Unlabeled numeric predictor (matrices not built by the encoder).
    Feature,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Intercept => "intercept",
            Family::Rink => "rink",
            Family::Asd => "asd",
            Family::TeamFor => "for",
            Family::TeamAgainst => "against",
            Family::Home => "home",
            Family::HomeRink => "home_rink",
            Family::Feature => "x",
        }
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            Family::Intercept,
            Family::Rink,
            Family::Asd,
            Family::TeamFor,
            Family::TeamAgainst,
            Family::Home,
            Family::HomeRink,
        ]
        .into_iter()
        .find(|f| f.as_str() == s)
        .ok_or_else(|| Error::Config(format!("unknown column family `{s}`")))
    }
}

/// Rendered as `family[:level][@season]`, e.g. `rink:BOS`, `for:N.J@20072008`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ColumnLabel {
    pub family: Family,
    pub level: Option<String>,
    pub season: Option<String>,
}

impl ColumnLabel {
    pub fn new(family: Family, level: Option<&str>, season: Option<&str>) -> Self {
        ColumnLabel {
            family,
            level: level.map(str::to_owned),
            season: season.map(str::to_owned),
        }
    }
}

impl fmt::Display for ColumnLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.family.as_str())?;
        if let Some(l) = &self.level {
            write!(f, ":{l}")?;
        }
        if let Some(s) = &self.season {
            write!(f, "@{s}")?;
        }
        Ok(())
    }
}

impl FromStr for ColumnLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (head, season) = match s.rsplit_once('@') {
            Some((h, season)) => (h, Some(season)),
            None => (s, None),
        };
        let (family, level) = match head.split_once(':') {
            Some((f, l)) => (f, Some(l)),
            None => (head, None),
        };
        let family = if family == "x" {
            Family::Feature
        } else {
            family.parse()?
        };
        Ok(ColumnLabel::new(family, level, season))
    }
}

/// Nonzero entries of one column.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseColumn {
    pub rows: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseColumn {
    fn push(&mut self, row: usize, value: f64) {
        if value != 0.0 {
            self.rows.push(row as u32);
            self.values.push(value);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.rows.iter().map(|&r| r as usize).zip(self.values.iter().copied())
    }

    pub fn nnz(&self) -> usize {
        self.rows.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    n_rows: usize,
    columns: Vec<SparseColumn>,
    labels: Vec<ColumnLabel>,
    penalized: Vec<bool>,
}

impl DesignMatrix {
    /// Builds a matrix from dense columns with generic `x:<j>` labels.
    pub fn from_dense_columns(columns: &[Vec<f64>], penalized: Vec<bool>) -> Result<Self> {
        let n_rows = columns.first().map_or(0, Vec::len);
        if penalized.len() != columns.len() || columns.iter().any(|c| c.len() != n_rows) {
            return Err(Error::InvalidInput("ragged dense columns".into()));
        }
        let mut out = DesignMatrix {
            n_rows,
            columns: Vec::with_capacity(columns.len()),
            labels: Vec::with_capacity(columns.len()),
            penalized,
        };
        for (j, col) in columns.iter().enumerate() {
            let mut sc = SparseColumn::default();
            for (i, &v) in col.iter().enumerate() {
                sc.push(i, v);
            }
            out.columns.push(sc);
            out.labels
                .push(ColumnLabel::new(Family::Feature, Some(&j.to_string()), None));
        }
        Ok(out)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &SparseColumn {
        &self.columns[j]
    }

    pub fn labels(&self) -> &[ColumnLabel] {
        &self.labels
    }

    pub fn penalized(&self) -> &[bool] {
        &self.penalized
    }

    pub fn set_penalized(&mut self, j: usize, penalized: bool) {
        self.penalized[j] = penalized;
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let c = &self.columns[col];
        match c.rows.binary_search(&(row as u32)) {
            Ok(k) => c.values[k],
            Err(_) => 0.0,
        }
    }

    pub fn find(&self, label: &ColumnLabel) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Column indices of one family, in column order.
    pub fn family_columns(&self, family: Family) -> impl Iterator<Item = usize> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(move |(_, l)| l.family == family)
            .map(|(j, _)| j)
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.n_cols()).map(|j| self.get(i, j)).collect()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n_cols()]; self.n_rows];
        for (j, col) in self.columns.iter().enumerate() {
            for (i, v) in col.iter() {
                out[i][j] = v;
            }
        }
        out
    }

    /// Submatrix of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> DesignMatrix {
        let mut position = vec![u32::MAX; self.n_rows];
        for (new, &old) in rows.iter().enumerate() {
            position[old] = new as u32;
        }
        let columns = self
            .columns
            .iter()
            .map(|col| {
                let mut entries: Vec<(u32, f64)> = col
                    .iter()
                    .filter(|(i, _)| position[*i] != u32::MAX)
                    .map(|(i, v)| (position[i], v))
                    .collect();
                entries.sort_by_key(|e| e.0);
                SparseColumn {
                    rows: entries.iter().map(|e| e.0).collect(),
                    values: entries.iter().map(|e| e.1).collect(),
                }
            })
            .collect();
        DesignMatrix {
            n_rows: rows.len(),
            columns,
            labels: self.labels.clone(),
            penalized: self.penalized.clone(),
        }
    }

    /// `intercept + X·coefficients` for every row.
    pub fn predict(&self, intercept: f64, coefficients: &[f64]) -> Vec<f64> {
        let mut out = vec![intercept; self.n_rows];
        for (col, &b) in self.columns.iter().zip(coefficients) {
            if b != 0.0 {
                for (i, v) in col.iter() {
                    out[i] += b * v;
                }
            }
        }
        out
    }

    /// Debug dump: header of column labels (plus `response` when given).
    pub fn write_csv<W: Write>(&self, out: W, response: Option<&[f64]>) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = self.labels.iter().map(ToString::to_string).collect();
        if response.is_some() {
            header.push("response".into());
        }
        w.write_record(&header)?;
        for (i, row) in self.to_dense().into_iter().enumerate() {
            let mut rec: Vec<String> = row.iter().map(f64::to_string).collect();
            if let Some(y) = response {
                rec.push(y[i].to_string());
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Log-transformed per-row rates.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseVector {
    pub metric: Metric,
    pub values: Vec<f64>,
}

pub fn response(rows: &[TeamGame], metric: Metric) -> ResponseVector {
    ResponseVector {
        metric,
        values: rows.iter().map(|r| (r.rate(metric) + RATE_FLOOR).ln()).collect(),
    }
}

/// Families exempt from the penalty in addition to the intercepts.
#[derive(Debug, Clone, Default)]
pub struct EncodeOptions {
    pub unpenalized: BTreeSet<Family>,
}

struct Builder {
    n_rows: usize,
    columns: Vec<SparseColumn>,
    labels: Vec<ColumnLabel>,
    penalized: Vec<bool>,
}

impl Builder {
    fn add(&mut self, label: ColumnLabel, column: SparseColumn, opts: &EncodeOptions) {
        let free = label.family == Family::Intercept || opts.unpenalized.contains(&label.family);
        self.penalized.push(!free);
        self.labels.push(label);
        self.columns.push(column);
    }

    fn finish(self) -> DesignMatrix {
        DesignMatrix {
            n_rows: self.n_rows,
            columns: self.columns,
            labels: self.labels,
            penalized: self.penalized,
        }
    }
}

fn indicator<F: Fn(&TeamGame) -> bool>(rows: &[TeamGame], pred: F) -> SparseColumn {
    let mut c = SparseColumn::default();
    for (i, r) in rows.iter().enumerate() {
        if pred(r) {
            c.push(i, 1.0);
        }
    }
    c
}

fn numeric<F: Fn(&TeamGame) -> f64>(rows: &[TeamGame], value: F) -> SparseColumn {
    let mut c = SparseColumn::default();
    for (i, r) in rows.iter().enumerate() {
        c.push(i, value(r));
    }
    c
}

fn rink_levels(rows: &[TeamGame]) -> Result<Vec<String>> {
    let rinks: BTreeSet<&str> = rows.iter().map(|r| r.rink.as_str()).collect();
    if rinks.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 rinks to separate rink effects, found {}",
            rinks.len()
        )));
    }
    Ok(rinks.into_iter().map(str::to_owned).collect())
}

fn check_rows(rows: &[TeamGame]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("no team-game rows".into()));
    }
    if let Some(bad) = rows.iter().find(|r| !r.asd.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite ASD in game {}", bad.game_id)));
    }
    Ok(())
}

/// Per-season model: one intercept, rink, ASD slope, for/against team,
/// home, and home-by-rink columns.
pub fn encode_yearly(rows: &[TeamGame], metric: Metric, opts: &EncodeOptions) -> Result<(DesignMatrix, ResponseVector)> {
    check_rows(rows)?;
    let season = &rows[0].season;
    if let Some(other) = rows.iter().find(|r| &r.season != season) {
        return Err(Error::InvalidInput(format!(
            "yearly encoding mixes seasons {season} and {}",
            other.season
        )));
    }
    let rinks = rink_levels(rows)?;
    let for_teams: BTreeSet<&str> = rows.iter().map(|r| r.for_team.as_str()).collect();
    let against_teams: BTreeSet<&str> = rows.iter().map(|r| r.against_team.as_str()).collect();

    let mut b = Builder {
        n_rows: rows.len(),
        columns: Vec::new(),
        labels: Vec::new(),
        penalized: Vec::new(),
    };
    b.add(ColumnLabel::new(Family::Intercept, None, None), indicator(rows, |_| true), opts);
    for rink in &rinks {
        b.add(ColumnLabel::new(Family::Rink, Some(rink), None), indicator(rows, |r| &r.rink == rink), opts);
    }
    b.add(ColumnLabel::new(Family::Asd, None, None), numeric(rows, |r| r.asd), opts);
    for t in &for_teams {
        b.add(ColumnLabel::new(Family::TeamFor, Some(t), None), indicator(rows, |r| r.for_team == *t), opts);
    }
    for t in &against_teams {
        b.add(
            ColumnLabel::new(Family::TeamAgainst, Some(t), None),
            indicator(rows, |r| r.against_team == *t),
            opts,
        );
    }
    b.add(ColumnLabel::new(Family::Home, None, None), indicator(rows, |r| r.is_home), opts);
    for rink in &rinks {
        b.add(
            ColumnLabel::new(Family::HomeRink, Some(rink), None),
            indicator(rows, |r| r.is_home && &r.rink == rink),
            opts,
        );
    }
    Ok((b.finish(), response(rows, metric)))
}

/// Multi-season model: season-specific intercept, ASD slope, team and home
/// terms; rink and home-by-rink terms shared across seasons.
pub fn encode_pooled(rows: &[TeamGame], metric: Metric, opts: &EncodeOptions) -> Result<(DesignMatrix, ResponseVector)> {
    check_rows(rows)?;
    let rinks = rink_levels(rows)?;
    let mut for_by_season: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut against_by_season: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for r in rows {
        for_by_season.entry(&r.season).or_default().insert(&r.for_team);
        against_by_season.entry(&r.season).or_default().insert(&r.against_team);
    }
    let seasons: Vec<&str> = for_by_season.keys().copied().collect();

    let mut b = Builder {
        n_rows: rows.len(),
        columns: Vec::new(),
        labels: Vec::new(),
        penalized: Vec::new(),
    };
    for s in &seasons {
        b.add(
            ColumnLabel::new(Family::Intercept, None, Some(s)),
            indicator(rows, |r| r.season == *s),
            opts,
        );
    }
    for rink in &rinks {
        b.add(ColumnLabel::new(Family::Rink, Some(rink), None), indicator(rows, |r| &r.rink == rink), opts);
    }
    for s in &seasons {
        b.add(
            ColumnLabel::new(Family::Asd, None, Some(s)),
            numeric(rows, |r| if r.season == *s { r.asd } else { 0.0 }),
            opts,
        );
    }
    for s in &seasons {
        for t in &for_by_season[s] {
            b.add(
                ColumnLabel::new(Family::TeamFor, Some(t), Some(s)),
                indicator(rows, |r| r.season == *s && r.for_team == *t),
                opts,
            );
        }
    }
    for s in &seasons {
        for t in &against_by_season[s] {
            b.add(
                ColumnLabel::new(Family::TeamAgainst, Some(t), Some(s)),
                indicator(rows, |r| r.season == *s && r.against_team == *t),
                opts,
            );
        }
    }
    for s in &seasons {
        b.add(
            ColumnLabel::new(Family::Home, None, Some(s)),
            indicator(rows, |r| r.season == *s && r.is_home),
            opts,
        );
    }
    for rink in &rinks {
        b.add(
            ColumnLabel::new(Family::HomeRink, Some(rink), None),
            indicator(rows, |r| r.is_home && &r.rink == rink),
            opts,
        );
    }
    Ok((b.finish(), response(rows, metric)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn tg(season: &str, game: &str, for_team: &str, against: &str, is_home: bool, asd: f64, hit: f64) -> TeamGame {
        let home = if is_home { for_team } else { against };
        let mut rates = [0.0; 9];
        rates[Metric::Hit.index()] = hit;
        TeamGame {
            game_id: game.into(),
            season: season.into(),
            for_team: for_team.into(),
            against_team: against.into(),
            is_home,
            rink: home.into(),
            asd,
            nen5v5_seconds: 3000.0,
            rates,
            counts: [0; 7],
        }
    }

    /// Two games between A and B, one at each rink.
    fn two_game_fixture(season: &str) -> Vec<TeamGame> {
        vec![
            tg(season, "g1", "A", "B", true, 0.5, 20.0),
            tg(season, "g1", "B", "A", false, -0.5, 0.0),
            tg(season, "g2", "B", "A", true, 1.25, 30.0),
            tg(season, "g2", "A", "B", false, -1.25, 10.0),
        ]
    }

    #[test]
    fn yearly_matrix_matches_hand_fixture() {
        let (x, y) = encode_yearly(&two_game_fixture("2012"), Metric::Hit, &EncodeOptions::default()).unwrap();
        let labels: Vec<String> = x.labels().iter().map(ToString::to_string).collect();
        assert_eq!(
            labels,
            [
                "intercept", "rink:A", "rink:B", "asd", "for:A", "for:B", "against:A", "against:B", "home",
                "home_rink:A", "home_rink:B"
            ]
        );
        #[rustfmt::skip]
        let expected = vec![
            vec![1.0, 1.0, 0.0,  0.5,  1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0, -0.5,  0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, 1.0,  1.25, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 1.0],
            vec![1.0, 0.0, 1.0, -1.25, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
        ];
        assert_eq!(x.to_dense(), expected);
        assert_eq!(x.penalized().iter().filter(|p| !**p).count(), 1);
        assert!(!x.penalized()[0]);
        assert_eq!(y.values[0], (20.0f64 + 1e-3).ln());
        assert!((y.values[1] - (-6.9078)).abs() < 1e-4);
    }

    #[test]
    fn pooled_two_season_fixture() {
        let mut rows = two_game_fixture("2011");
        rows.extend(two_game_fixture("2012"));
        let (x, _) = encode_pooled(&rows, Metric::Hit, &EncodeOptions::default()).unwrap();
        let labels: Vec<String> = x.labels().iter().map(ToString::to_string).collect();
        assert_eq!(
            labels,
            [
                "intercept@2011", "intercept@2012", "rink:A", "rink:B", "asd@2011", "asd@2012",
                "for:A@2011", "for:B@2011", "for:A@2012", "for:B@2012",
                "against:A@2011", "against:B@2011", "against:A@2012", "against:B@2012",
                "home@2011", "home@2012", "home_rink:A", "home_rink:B"
            ]
        );
        #[rustfmt::skip]
        let expected = vec![
            vec![1.,0., 1.,0.,  0.5, 0.,   1.,0.,0.,0., 0.,1.,0.,0., 1.,0., 1.,0.],
            vec![1.,0., 1.,0., -0.5, 0.,   0.,1.,0.,0., 1.,0.,0.,0., 0.,0., 0.,0.],
            vec![1.,0., 0.,1.,  1.25,0.,   0.,1.,0.,0., 1.,0.,0.,0., 1.,0., 0.,1.],
            vec![1.,0., 0.,1., -1.25,0.,   1.,0.,0.,0., 0.,1.,0.,0., 0.,0., 0.,0.],
            vec![0.,1., 1.,0.,  0., 0.5,   0.,0.,1.,0., 0.,0.,0.,1., 0.,1., 1.,0.],
            vec![0.,1., 1.,0.,  0.,-0.5,   0.,0.,0.,1., 0.,0.,1.,0., 0.,0., 0.,0.],
            vec![0.,1., 0.,1.,  0., 1.25,  0.,0.,0.,1., 0.,0.,1.,0., 0.,1., 0.,1.],
            vec![0.,1., 0.,1.,  0.,-1.25,  0.,0.,1.,0., 0.,0.,0.,1., 0.,0., 0.,0.],
        ];
        assert_eq!(x.to_dense(), expected);
        assert_eq!(x.penalized().iter().filter(|p| !**p).count(), 2);
    }

    #[test]
    fn pooled_single_season_equals_yearly_values() {
        let rows = two_game_fixture("2012");
        let opts = EncodeOptions::default();
        let (a, ya) = encode_yearly(&rows, Metric::Hit, &opts).unwrap();
        let (b, yb) = encode_pooled(&rows, Metric::Hit, &opts).unwrap();
        assert_eq!(a.to_dense(), b.to_dense());
        assert_eq!(a.penalized(), b.penalized());
        assert_eq!(ya, yb);
    }

    #[test]
    fn needs_two_rinks_and_one_season() {
        let rows = vec![tg("2012", "g1", "A", "B", true, 0.0, 1.0), tg("2012", "g1", "B", "A", false, 0.0, 1.0)];
        assert!(encode_yearly(&rows, Metric::Hit, &EncodeOptions::default()).is_err());
        let mut mixed = two_game_fixture("2011");
        mixed.extend(two_game_fixture("2012"));
        assert!(encode_yearly(&mixed, Metric::Hit, &EncodeOptions::default()).is_err());
    }

    #[test]
    fn unpenalized_families_are_flagged() {
        let opts = EncodeOptions {
            unpenalized: [Family::Asd, Family::Home].into_iter().collect(),
        };
        let (x, _) = encode_yearly(&two_game_fixture("2012"), Metric::Hit, &opts).unwrap();
        let free: Vec<String> = x
            .labels()
            .iter()
            .zip(x.penalized())
            .filter(|(_, p)| !**p)
            .map(|(l, _)| l.to_string())
            .collect();
        assert_eq!(free, ["intercept", "asd", "home"]);
    }

    #[test]
    fn labels_parse_back() {
        let mut rows = two_game_fixture("2011");
        rows.extend(two_game_fixture("2012"));
        let (x, _) = encode_pooled(&rows, Metric::Hit, &EncodeOptions::default()).unwrap();
        for l in x.labels() {
            assert_eq!(&l.to_string().parse::<ColumnLabel>().unwrap(), l);
        }
        let unique: BTreeSet<&ColumnLabel> = x.labels().iter().collect();
        assert_eq!(unique.len(), x.n_cols());
    }

    fn random_league() -> impl Strategy<Value = Vec<TeamGame>> {
        let teams = ["A", "B", "C", "D"];
        prop::collection::vec((0usize..4, 1usize..4, 0usize..2, -3.0f64..3.0, 0.0f64..40.0), 2..30).prop_map(
            move |games| {
                let mut rows = Vec::new();
                for (g, (h, off, s, asd, rate)) in games.into_iter().enumerate() {
                    let season = ["2011", "2012"][s];
                    let home = teams[h];
                    let away = teams[(h + off) % 4];
                    let id = format!("g{g}");
                    rows.push(tg(season, &id, home, away, true, asd, rate));
                    rows.push(tg(season, &id, away, home, false, -asd, rate / 2.0));
                }
                rows
            },
        )
    }

    proptest! {
        #[test]
        fn row_indicator_sums_and_home_rink_product(rows in random_league()) {
            let rinks: BTreeSet<&str> = rows.iter().map(|r| r.rink.as_str()).collect();
            prop_assume!(rinks.len() >= 2);
            let (x, y) = encode_pooled(&rows, Metric::Hit, &EncodeOptions::default()).unwrap();
            prop_assert!(y.values.iter().all(|v| v.is_finite()));
            let dense = x.to_dense();
            let home_cols: Vec<usize> = x.family_columns(Family::Home).collect();
            for (i, row) in dense.iter().enumerate() {
                let sum = |f: Family| x.family_columns(f).map(|j| row[j]).sum::<f64>();
                prop_assert_eq!(sum(Family::Rink), 1.0);
                prop_assert_eq!(sum(Family::TeamFor), 1.0);
                prop_assert_eq!(sum(Family::TeamAgainst), 1.0);
                let home: f64 = home_cols.iter().map(|&j| row[j]).sum();
                prop_assert_eq!(home, if rows[i].is_home { 1.0 } else { 0.0 });
                for j in x.family_columns(Family::HomeRink) {
                    let level = x.labels()[j].level.clone().unwrap();
                    let rink_j = x.find(&ColumnLabel::new(Family::Rink, Some(&level), None)).unwrap();
                    prop_assert_eq!(row[j], home * row[rink_j]);
                }
            }
            let (x2, _) = encode_pooled(&rows, Metric::Hit, &EncodeOptions::default()).unwrap();
            prop_assert_eq!(x, x2);
        }
    }
}
