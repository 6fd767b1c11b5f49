//! Shared inputs for the benchmarks.

use rinkfx_core::synth::{default_seasons, Scenario, SyntheticConfig};
use rinkfx_core::Metric;

/// Desk scenario restricted to one event, with `games` per season.
pub fn league(metric: Metric, games: usize, seed: u64) -> SyntheticConfig {
    let mut cfg = SyntheticConfig::scenario(Scenario::Desk, seed);
    cfg.events.retain(|e| e.metric == metric);
    cfg.seasons = default_seasons()
        .into_iter()
        .map(|mut s| {
            s.games = games;
            s
        })
        .collect();
    cfg
}
