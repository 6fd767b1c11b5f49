use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rinkfx_bench::league;
use rinkfx_core::design::{encode_pooled, encode_yearly};
use rinkfx_core::effects::{analyze_event, EffectsSettings};
use rinkfx_core::solver::{cross_validate, fit_path};
use rinkfx_core::synth::{generate, generate_team_games};
use rinkfx_core::teamgame::team_games_from_logs;
use rinkfx_core::{ElasticNetSpec, EncodeOptions, Metric, TeamGameOptions};

fn ingest(c: &mut Criterion) {
    let games = generate(&league(Metric::Hit, 200, 1), true).unwrap().games.unwrap();
    c.bench_function("team_games_from_logs/1200 games", |b| {
        b.iter(|| team_games_from_logs(black_box(&games), &TeamGameOptions::default()))
    });
}

fn solver(c: &mut Criterion) {
    let (rows, _) = generate_team_games(&league(Metric::Block, 1230, 2)).unwrap();
    let season: Vec<_> = rows.iter().filter(|r| r.season == "20102011").cloned().collect();
    let (x, y) = encode_yearly(&season, Metric::Block, &EncodeOptions::default()).unwrap();
    let mut g = c.benchmark_group("solver");
    g.sample_size(10);
    g.bench_function("fit_path/yearly 2460 rows", |b| {
        b.iter(|| fit_path(black_box(&x), &y.values, &ElasticNetSpec::default()).unwrap())
    });
    g.bench_function("cross_validate/yearly 2460 rows", |b| {
        b.iter(|| cross_validate(black_box(&x), &y.values, &ElasticNetSpec::default()).unwrap())
    });
    let (xp, yp) = encode_pooled(&rows, Metric::Block, &EncodeOptions::default()).unwrap();
    g.bench_function("fit_path/pooled", |b| {
        b.iter(|| fit_path(black_box(&xp), &yp.values, &ElasticNetSpec::default()).unwrap())
    });
    g.finish();
}

fn analysis(c: &mut Criterion) {
    let (rows, _) = generate_team_games(&league(Metric::Hit, 300, 3)).unwrap();
    let mut g = c.benchmark_group("effects");
    g.sample_size(10);
    g.bench_function("analyze_event/6 x 300 games", |b| {
        b.iter(|| analyze_event(black_box(&rows), Metric::Hit, &EffectsSettings::default()).unwrap())
    });
    g.finish();
}

criterion_group!(benches, ingest, solver, analysis);
criterion_main!(benches);
