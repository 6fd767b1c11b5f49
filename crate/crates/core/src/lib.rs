//! Rink-effect estimation for recorded hockey events.
//!
//! Play-by-play rows are aggregated into per-team-game NEN5v5 rates, a
//! log-linear model with rink, score-state, team and home terms is fitted
//! by the elastic net with cross-validated λ, and rinks whose recording
//! bias is consistent across seasons are used to reweight counts.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN-rejecting checks

pub mod adjust;
pub mod design;
pub mod effects;
pub mod error;
pub mod event;
pub mod ingest;
pub mod seed;
pub mod solver;
pub mod synth;
pub mod teamgame;

pub use adjust::{AdjustedCountRow, AdjustedCounts, AdjustmentWeights, CorsiPctRow};
pub use design::{ColumnLabel, DesignMatrix, EncodeOptions, Family, ResponseVector};
pub use effects::{EffectTable, EffectsSettings, EventAnalysis, PersistenceEntry, PersistenceReport, Scope, SummaryRow};
pub use error::{Error, Result};
pub use event::{EventType, Metric};
pub use ingest::{GameLog, ParsedLog, RawEvent};
pub use solver::{ElasticNetSpec, FitResult};
pub use synth::{Scenario, SyntheticConfig, TruthRecord};
pub use teamgame::{AsdOrientation, GoalTerm, NeutralSitePolicy, RinkMap, TeamGame, TeamGameOptions};
