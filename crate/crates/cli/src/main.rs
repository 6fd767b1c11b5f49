//! `rinkfx`: ingest play-by-play, fit rink-effect models, classify
//! persistent effects, adjust counts, and generate synthetic leagues.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rinkfx_core::adjust::{adjust_corsi_pct, adjust_player_counts, write_counts_csv, write_pct_csv};
use rinkfx_core::design::Family;
use rinkfx_core::effects::{
    analyze_events, fit_event_models, read_effects_json, write_effects_csv, write_effects_json, write_grid_csv,
    write_persistence_csv, write_summary_csv, EventModels, SCHEMA_VERSION,
};
use rinkfx_core::ingest::{parse_pbp, write_pbp};
use rinkfx_core::synth::{generate, Scenario};
use rinkfx_core::teamgame::{read_team_games, team_games_from_logs, write_team_games};
use rinkfx_core::{
    AdjustmentWeights, AsdOrientation, EffectsSettings, ElasticNetSpec, EncodeOptions, Error, GoalTerm, Metric,
    NeutralSitePolicy, RinkMap, SyntheticConfig, TeamGame, TeamGameOptions,
};
use serde::Serialize;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  invalid flags or configuration
  3  file could not be read or written
  4  input does not match the expected format or schema version
  5  the solver did not converge
  6  input data is inconsistent or insufficient";

#[derive(Parser)]
#[command(name = "rinkfx", version, about = "Estimate and correct rink recording biases", after_help = EXIT_CODES)]
struct Cli {
    /// More log output on stderr (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the team-game table from a play-by-play file.
    #[command(after_help = EXIT_CODES)]
    Ingest(IngestArgs),
    /// Fit the yearly and pooled models and write the fits with their CV curves.
    #[command(after_help = EXIT_CODES)]
    Fit(FitArgs),
    /// Fit the models and classify persistent rink and homer effects.
    #[command(after_help = EXIT_CODES)]
    Effects(EffectsArgs),
    /// Reweight player counts or CORSI shares by the persistent effects.
    #[command(after_help = EXIT_CODES)]
    Adjust(AdjustArgs),
    /// Generate a synthetic league with planted effects.
    #[command(after_help = EXIT_CODES)]
    Synth(SynthArgs),
    /// Summarize an effects file per event, plus a plot-ready grid.
    #[command(after_help = EXIT_CODES)]
    Report(ReportArgs),
}

#[derive(Args)]
struct RinkArgs {
    /// `season,team,rink` rows; teams without a row play in a rink named after them.
    #[arg(long)]
    arenas: Option<PathBuf>,
    /// `season,game_id` rows naming neutral-site games.
    #[arg(long)]
    neutral_sites: Option<PathBuf>,
}

#[derive(Args)]
struct IngestArgs {
    /// Play-by-play CSV.
    #[arg(long)]
    input: PathBuf,
    /// Team-game CSV to write.
    #[arg(long)]
    output: PathBuf,
    /// Per-game notes for dropped or suspect games.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
    /// Keep only these seasons (comma-separated).
    #[arg(long, value_delimiter = ',')]
    seasons: Vec<String>,
    /// `for-team`: each row carries its own lead; `home`: both rows carry home minus away.
    #[arg(long, default_value = "for-team")]
    asd_orientation: AsdOrientation,
    /// How goals enter CORSI and FENWICK: `raw` count or `prorated`.
    #[arg(long, default_value = "raw")]
    goal_term: GoalTerm,
    /// Neutral-site games: `designated-home` or `exclude`.
    #[arg(long, default_value = "designated-home")]
    neutral_policy: NeutralSitePolicy,
    #[command(flatten)]
    rinks: RinkArgs,
}

#[derive(Args)]
struct ModelArgs {
    /// Team-game CSV from `ingest` or `synth`.
    #[arg(long)]
    input: PathBuf,
    /// Directory for the outputs; created if missing.
    #[arg(long)]
    out_dir: PathBuf,
    /// Events to model (comma-separated).
    #[arg(long, value_delimiter = ',', default_value = "BLOCK,GIVE,HIT,MISS,SHOT,TAKE")]
    events: Vec<Metric>,
    /// Keep only these seasons (comma-separated).
    #[arg(long, value_delimiter = ',')]
    seasons: Vec<String>,
    /// Elastic-net mixing: 0 is ridge, 1 is lasso.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Cross-validation folds.
    #[arg(long, default_value_t = 10)]
    folds: usize,
    /// Seed for fold assignment.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Points on the lambda path.
    #[arg(long, default_value_t = 100)]
    n_lambda: usize,
    /// Smallest lambda as a fraction of lambda_max.
    #[arg(long, default_value_t = 1e-4)]
    lambda_ratio: f64,
    /// Convergence tolerance on the largest scaled coefficient change.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// Coordinate-descent sweeps allowed per lambda.
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
    /// Column families left unpenalized besides the intercepts, e.g. `asd,home`.
    #[arg(long, value_delimiter = ',')]
    unpenalized: Vec<Family>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct EffectsArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Yearly fits a persistent effect must appear in [default: one fewer than the number of seasons].
    #[arg(long)]
    min_seasons: Option<usize>,
}

#[derive(Args)]
struct AdjustArgs {
    /// `effects.json` from `effects`.
    #[arg(long)]
    effects: PathBuf,
    /// Event whose weights are applied.
    #[arg(long)]
    event: Metric,
    /// Play-by-play CSV with a player column; writes adjusted player counts.
    #[arg(long)]
    pbp: Option<PathBuf>,
    /// Team-game CSV; writes adjusted CORSI shares (requires `--event CORSI`).
    #[arg(long)]
    team_games: Option<PathBuf>,
    /// Restrict to one season.
    #[arg(long)]
    season: Option<String>,
    /// Directory for the outputs; created if missing.
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    rinks: RinkArgs,
}

#[derive(Args)]
struct SynthArgs {
    /// Seed for every random draw [default: 0, or the config file's seed].
    #[arg(long)]
    seed: Option<u64>,
    /// Built-in scenario: `desk`, `null` or `give`.
    #[arg(long, default_value = "desk")]
    scenario: Scenario,
    /// TOML file overriding the scenario's settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Log-scale noise standard deviation [default: from the scenario, 0.35].
    #[arg(long)]
    noise_sd: Option<f64>,
    /// Also write event-level play-by-play.
    #[arg(long)]
    pbp: bool,
    /// Directory for the outputs; created if missing.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// `effects.json` from `effects`.
    #[arg(long)]
    effects: PathBuf,
    /// Directory for the outputs; created if missing.
    #[arg(long)]
    out_dir: PathBuf,
}

/// A flag problem found before any file is read.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

fn core_code(e: &Error) -> u8 {
    match e.root() {
        Error::Config(_) => 2,
        Error::Io(_) => 3,
        Error::Csv(c) if c.is_io_error() => 3,
        Error::Parse { .. } | Error::Schema(_) | Error::Csv(_) | Error::Json(_) => 4,
        Error::NoConvergence { .. } => 5,
        Error::InvalidInput(_) | Error::Game { .. } => 6,
        Error::Context { .. } => 1,
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return core_code(e);
        }
        if cause.is::<std::io::Error>() {
            return 3;
        }
        if cause.is::<serde_json::Error>() {
            return 4;
        }
    }
    1
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// Writes `path` through `body`, flushing before returning.
fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> rinkfx_core::Result<()>) -> Result<()> {
    let mut out = create(path)?;
    body(&mut out).with_context(|| format!("writing {}", path.display()))?;
    out.flush().with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn make_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

/// Refuses outputs that would overwrite an input.
fn check_distinct(inputs: &[&Path], outputs: &[&Path]) -> Result<()> {
    for o in outputs {
        if inputs.iter().any(|i| i == o) {
            return Err(usage(format!("output {} would overwrite an input", o.display())));
        }
    }
    Ok(())
}

fn read_rinks(args: &RinkArgs) -> Result<RinkMap> {
    let mut rinks = RinkMap::default();
    if let Some(p) = &args.arenas {
        rinks.read_arenas(open(p)?).with_context(|| format!("reading {}", p.display()))?;
    }
    if let Some(p) = &args.neutral_sites {
        rinks.read_neutral_sites(open(p)?).with_context(|| format!("reading {}", p.display()))?;
    }
    Ok(rinks)
}

fn read_rows(path: &Path, seasons: &[String]) -> Result<Vec<TeamGame>> {
    let mut rows = read_team_games(open(path)?).with_context(|| format!("reading {}", path.display()))?;
    if !seasons.is_empty() {
        rows.retain(|r| seasons.contains(&r.season));
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput(format!("no team-game rows in {}", path.display())).into());
    }
    Ok(rows)
}

fn ingest(args: &IngestArgs) -> Result<()> {
    let mut outputs = vec![args.output.as_path()];
    outputs.extend(args.diagnostics.as_deref());
    check_distinct(&[&args.input], &outputs)?;
    let opts = TeamGameOptions {
        asd_orientation: args.asd_orientation,
        goal_term: args.goal_term,
        neutral_sites: args.neutral_policy,
        rinks: read_rinks(&args.rinks)?,
    };
    let mut parsed = parse_pbp(open(&args.input)?).with_context(|| format!("reading {}", args.input.display()))?;
    if !args.seasons.is_empty() {
        parsed.games.retain(|g| args.seasons.contains(&g.season));
    }
    let (rows, mut notes) = team_games_from_logs(&parsed.games, &opts);
    notes.splice(0..0, parsed.diagnostics);
    log::info!("{} games, {} team-game rows, {} notes", parsed.games.len(), rows.len(), notes.len());
    write_file(&args.output, |w| write_team_games(w, &rows))?;
    if let Some(p) = &args.diagnostics {
        write_file(p, |w| {
            writeln!(w, "game_id,line,message")?;
            for n in &notes {
                let line = n.line.map_or(String::new(), |l| l.to_string());
                writeln!(w, "{},{},\"{}\"", n.game_id.as_deref().unwrap_or(""), line, n.message.replace('"', "\"\""))?;
            }
            Ok(())
        })?;
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput("no game survived ingestion".into()).into());
    }
    Ok(())
}

fn settings(args: &ModelArgs, min_seasons: Option<usize>) -> Result<EffectsSettings> {
    let spec = ElasticNetSpec {
        alpha: args.alpha,
        folds: args.folds,
        seed: args.seed,
        n_lambda: args.n_lambda,
        path_ratio: args.lambda_ratio,
        tol: args.tol,
        max_iter: args.max_iter,
        ..ElasticNetSpec::default()
    };
    spec.validate().map_err(|e| usage(e.to_string()))?;
    if args.events.is_empty() {
        return Err(usage("no events selected"));
    }
    if min_seasons == Some(0) {
        return Err(usage("--min-seasons must be at least 1"));
    }
    if args.unpenalized.contains(&Family::Rink) {
        return Err(usage("the rink family must stay penalized"));
    }
    Ok(EffectsSettings {
        spec,
        encode: EncodeOptions {
            unpenalized: args.unpenalized.iter().copied().collect(),
        },
        min_seasons,
    })
}

#[derive(Serialize)]
struct FitsDocument<'a> {
    schema_version: u32,
    events: &'a [EventModels],
}

fn fit(args: &FitArgs) -> Result<()> {
    let m = &args.model;
    let settings = settings(m, None)?;
    let rows = read_rows(&m.input, &m.seasons)?;
    let models = m
        .events
        .iter()
        .map(|&e| fit_event_models(&rows, e, &settings))
        .collect::<rinkfx_core::Result<Vec<_>>>()?;
    make_dir(&m.out_dir)?;
    let cv_dir = m.out_dir.join("cv");
    make_dir(&cv_dir)?;
    for em in &models {
        for mf in em.yearly.iter().chain(std::iter::once(&em.pooled)) {
            let path = cv_dir.join(format!("{}_{}.csv", em.metric, mf.table.scope));
            write_file(&path, |w| mf.fit.write_cv_table(w, &mf.penalized))?;
        }
    }
    write_file(&m.out_dir.join("fits.json"), |w| {
        let doc = FitsDocument {
            schema_version: SCHEMA_VERSION,
            events: &models,
        };
        serde_json::to_writer_pretty(&mut *w, &doc)?;
        writeln!(w)?;
        Ok(())
    })
}

fn effects(args: &EffectsArgs) -> Result<()> {
    let m = &args.model;
    let settings = settings(m, args.min_seasons)?;
    let rows = read_rows(&m.input, &m.seasons)?;
    let analyses = analyze_events(&rows, &m.events, &settings)?;
    for a in &analyses {
        log::info!("{}: {} persistent rink effects", a.report.metric, a.report.persistent().count());
    }
    make_dir(&m.out_dir)?;
    write_file(&m.out_dir.join("effects.json"), |w| write_effects_json(w, &analyses))?;
    write_file(&m.out_dir.join("effects.csv"), |w| write_effects_csv(w, &analyses))?;
    let reports: Vec<_> = analyses.iter().map(|a| a.report.clone()).collect();
    write_file(&m.out_dir.join("persistence.csv"), |w| write_persistence_csv(w, &reports))
}

fn adjust(args: &AdjustArgs) -> Result<()> {
    if args.pbp.is_none() && args.team_games.is_none() {
        return Err(usage("give --pbp, --team-games or both"));
    }
    if args.pbp.is_some() && args.event.primitive_event().is_none() {
        return Err(usage(format!("--pbp needs a single recorded event type, not {}", args.event)));
    }
    if args.team_games.is_some() && args.event != Metric::Corsi {
        return Err(usage("--team-games adjusts CORSI shares and needs --event CORSI"));
    }
    let reports = read_effects_json(open(&args.effects)?).with_context(|| format!("reading {}", args.effects.display()))?;
    let report = reports
        .iter()
        .find(|r| r.persistence.metric == args.event)
        .ok_or_else(|| Error::InvalidInput(format!("{} holds no {} model", args.effects.display(), args.event)))?;
    let weights = AdjustmentWeights::from_report(&report.persistence);
    make_dir(&args.out_dir)?;
    if let Some(p) = &args.pbp {
        let rinks = read_rinks(&args.rinks)?;
        let parsed = parse_pbp(open(p)?).with_context(|| format!("reading {}", p.display()))?;
        if !parsed.has_player {
            return Err(Error::Schema(format!("{} has no player column", p.display())).into());
        }
        let counts = adjust_player_counts(&parsed.games, &weights, &rinks, args.season.as_deref())?;
        if counts.skipped > 0 {
            log::warn!("{} {} events had no player", counts.skipped, args.event);
        }
        write_file(&args.out_dir.join(format!("counts_{}.csv", args.event)), |w| write_counts_csv(w, &counts))?;
    }
    if let Some(p) = &args.team_games {
        let rows = read_rows(p, &[])?;
        let pct = adjust_corsi_pct(&rows, &weights, args.season.as_deref())?;
        write_file(&args.out_dir.join("corsi_pct.csv"), |w| write_pct_csv(w, &pct))?;
    }
    Ok(())
}

fn synth(args: &SynthArgs) -> Result<()> {
    if args.noise_sd.is_some_and(|s| !(s >= 0.0 && s.is_finite())) {
        return Err(usage("--noise-sd must be finite and non-negative"));
    }
    let mut config = match &args.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            SyntheticConfig::from_toml(&text).with_context(|| format!("reading {}", p.display()))?
        }
        None => SyntheticConfig::scenario(args.scenario, 0),
    };
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(sd) = args.noise_sd {
        config.noise_sd = sd;
    }
    config.validate().map_err(|e| usage(e.to_string()))?;
    let data = generate(&config, args.pbp)?;
    make_dir(&args.out_dir)?;
    write_file(&args.out_dir.join("team_games.csv"), |w| write_team_games(w, &data.team_games))?;
    write_file(&args.out_dir.join("truth.json"), |w| data.truth.write_json(w))?;
    if let Some(games) = &data.games {
        write_file(&args.out_dir.join("pbp.csv"), |w| {
            write_pbp(w, games.iter().flat_map(|g| &g.events), true)
        })?;
    }
    Ok(())
}

fn report(args: &ReportArgs) -> Result<()> {
    let events = read_effects_json(open(&args.effects)?).with_context(|| format!("reading {}", args.effects.display()))?;
    let summary: Vec<_> = events.iter().map(|e| e.summary()).collect();
    let reports: Vec<_> = events.into_iter().map(|e| e.persistence).collect();
    make_dir(&args.out_dir)?;
    write_file(&args.out_dir.join("summary.csv"), |w| write_summary_csv(w, &summary))?;
    write_file(&args.out_dir.join("grid.csv"), |w| write_grid_csv(w, &reports))
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Fit(a) => fit(a),
        Command::Effects(a) => effects(a),
        Command::Adjust(a) => adjust(a),
        Command::Synth(a) => synth(a),
        Command::Report(a) => report(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::new().parse_filters(level).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rinkfx: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
