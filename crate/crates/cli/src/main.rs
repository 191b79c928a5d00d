//! `tagscope`: batch access to import, validation, charts, similarity,
//! evaluation, benchmarks, and the HTTP service.
//!
//! Exit status: 0 on success, 1 on a domain error, 2 on a usage error.

use std::fs;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::error::ContextKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use tagscope_core::analytics::{self, CountMode, Scope, TagFilter};
use tagscope_core::evaluation::{
    build_trials, report_csv, score_responses, simulate, NoisyScoreRater, Rater,
    ScoreFaithfulRater, UniformRandomRater,
};
use tagscope_core::import::{
    import_project, list_remote_projects, update_project, RemoteCredentials,
};
use tagscope_core::model::{
    load_project, parse_project, save_project, ModelError, Project, TextId,
};
use tagscope_core::scaling;
use tagscope_core::similarity::{
    heatmap_svg, matrix_csv, mean_matrix, rank_similar, similarity_matrix, MatrixOptions,
    PairOptions, SimilarityMatrix, DEFAULT_RADIUS,
};

#[derive(Parser)]
#[command(
    name = "tagscope",
    version,
    about = "Annotated-corpus charts, similarity, and evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List or import projects from a remote store (directory or http(s) URL).
    Import(ImportArgs),
    /// Check a project document; lists violations and exits 1 if any.
    Validate { file: PathBuf },
    /// Export chart data.
    Charts(ChartArgs),
    /// Pairwise similarity matrix.
    Matrix(MatrixArgs),
    /// Similarity heatmap as SVG.
    Heatmap(HeatmapArgs),
    /// Texts ordered by similarity to a target.
    Rank(RankArgs),
    /// Build ranking trials and score a simulated rater.
    Evaluate(EvaluateArgs),
    /// Time exact DTW against FastDTW on random binary series.
    Bench(BenchArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Serve a remote-store directory over HTTP, for testing imports.
    FixtureRemote(FixtureRemoteArgs),
}

#[derive(Args)]
struct ImportArgs {
    #[arg(long)]
    endpoint: String,
    #[arg(long, env = "TAGSCOPE_API_KEY", hide_env_values = true)]
    api_key: String,
    /// Remote project id; omit to list projects.
    #[arg(long)]
    project: Option<String>,
    /// Output file. An existing project here is updated in place order.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProjectArg {
    /// Project document in canonical format.
    #[arg(long)]
    project: PathBuf,
}

#[derive(Args)]
struct Output {
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChartKind {
    Gantt,
    Stacked,
    Sunburst,
    Gallery,
    /// Tag shares across several projects.
    Compare,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Occurrences,
    Characters,
}

impl From<Mode> for CountMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Occurrences => CountMode::Occurrences,
            Mode::Characters => CountMode::Characters,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct ChartArgs {
    #[arg(value_enum)]
    kind: ChartKind,
    /// Project document; repeat for `compare`.
    #[arg(long = "project", required = true)]
    projects: Vec<PathBuf>,
    #[arg(long)]
    text: Option<String>,
    /// Comma-separated tag ids or names.
    #[arg(long, value_delimiter = ',')]
    tags: Vec<String>,
    #[arg(long)]
    bin: Option<usize>,
    #[arg(long, value_enum, default_value = "occurrences")]
    mode: Mode,
    /// `csv` is available for `stacked`.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SimilarityArgs {
    #[command(flatten)]
    project: ProjectArg,
    /// Tag id or name; several comma-separated tags average their matrices.
    #[arg(long, value_delimiter = ',', required = true)]
    tag: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_RADIUS)]
    radius: usize,
    /// Count annotations of descendant tags too.
    #[arg(long)]
    rollup: bool,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct MatrixArgs {
    #[command(flatten)]
    sim: SimilarityArgs,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct HeatmapArgs {
    #[command(flatten)]
    sim: SimilarityArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct RankArgs {
    #[command(flatten)]
    sim: SimilarityArgs,
    #[arg(long)]
    target: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum RaterKind {
    /// Orders candidates by their matrix score.
    Faithful,
    /// Score plus uniform noise of amplitude `--noise`.
    Noisy,
    /// Uniformly random order.
    Random,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    sim: SimilarityArgs,
    #[arg(long, value_enum, default_value = "random")]
    rater: RaterKind,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    /// Trials per text; every text is a target this many times.
    #[arg(long, default_value_t = 1)]
    rounds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the generated trials (with provenance) as JSON.
    #[arg(long)]
    trials_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "1000,2000,4000")]
    lengths: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_RADIUS)]
    radius: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "TAGSCOPE_HOST", default_value = "127.0.0.1")]
    host: IpAddr,
    #[arg(long, env = "TAGSCOPE_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, env = "TAGSCOPE_DATA_DIR", default_value = "tagscope-data")]
    data_dir: PathBuf,
    /// Concurrent matrix jobs.
    #[arg(long, env = "TAGSCOPE_WORKERS", default_value_t = 2)]
    workers: usize,
}

#[derive(Args)]
struct FixtureRemoteArgs {
    #[arg(long)]
    dir: PathBuf,
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
    #[arg(long, default_value_t = 8090)]
    port: u16,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let usage = e
                .context()
                .find_map(|(kind, _)| (kind == ContextKind::Usage).then_some(()))
                .is_some();
            if !usage {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return ExitCode::from(2);
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Import(a) => import(a)?,
        Command::Validate { file } => return validate(&file),
        Command::Charts(a) => charts(a)?,
        Command::Matrix(a) => {
            let m = matrix_for(&a.sim)?;
            let body = match a.format {
                Format::Json => json(&m),
                Format::Csv => matrix_csv(&m),
            };
            emit(&a.output, &body)?;
        }
        Command::Heatmap(a) => {
            let project = load(&a.sim.project.project)?;
            let m = matrix_of(&project, &a.sim)?;
            let labels: Vec<String> = m
                .texts
                .iter()
                .map(|t| {
                    project
                        .text(t.as_str())
                        .map_or_else(|| t.to_string(), |t| t.title.clone())
                })
                .collect();
            emit(&a.output, &heatmap_svg(&m, &labels))?;
        }
        Command::Rank(a) => {
            let m = matrix_for(&a.sim)?;
            let mut out = String::from("rank,text,score\n");
            for (k, (t, s)) in rank_similar(&m, &a.target)?.iter().enumerate() {
                out.push_str(&format!("{},{t},{s:.6}\n", k + 1));
            }
            print!("{out}");
        }
        Command::Evaluate(a) => evaluate(a)?,
        Command::Bench(a) => {
            let report = scaling::measure(&a.lengths, a.trials, a.radius, a.seed);
            match a.format {
                Some(Format::Json) => println!("{}", json(&report)),
                Some(Format::Csv) => {
                    println!("length,exact_secs,fast_secs,exact_distance,fast_distance");
                    for r in &report.rows {
                        println!(
                            "{},{},{},{},{}",
                            r.length, r.exact_secs, r.fast_secs, r.exact_distance, r.fast_distance
                        );
                    }
                }
                None => print!("{}", report.to_table()),
            }
        }
        Command::Serve(a) => serve(a)?,
        Command::FixtureRemote(a) => fixture_remote(a)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn load(path: &Path) -> Result<Project> {
    load_project(path).with_context(|| format!("loading {}", path.display()))
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("outputs serialize");
    s.push('\n');
    s
}

fn emit(output: &Output, body: &str) -> Result<()> {
    match &output.out {
        Some(path) => fs::write(path, body).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

fn import(a: ImportArgs) -> Result<()> {
    let creds = RemoteCredentials::new(&a.endpoint, &a.api_key);
    let Some(remote_id) = a.project else {
        for d in list_remote_projects(&creds)? {
            println!("{}\t{}\t{}", d.id, d.last_modified, d.name);
        }
        return Ok(());
    };
    let existing = match &a.out {
        Some(p) if p.exists() => Some(load(p)?),
        _ => None,
    };
    let project = match existing {
        Some(old) if old.id.as_str() == remote_id => update_project(&creds, &remote_id, &old)?,
        _ => import_project(&creds, &remote_id)?,
    };
    match &a.out {
        Some(path) => save_project(&project, path)?,
        None => print!("{}", json(&project)),
    }
    eprintln!(
        "imported {}: {} texts, {} annotations",
        project.id,
        project.texts.len(),
        project.annotations.len()
    );
    Ok(())
}

fn validate(file: &Path) -> Result<ExitCode> {
    let raw = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    match parse_project(&raw) {
        Ok(p) => {
            println!(
                "{}: valid ({} texts, {} annotations)",
                file.display(),
                p.texts.len(),
                p.annotations.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Err(ModelError::Invalid(violations)) => {
            for v in &violations {
                println!("{v}");
            }
            eprintln!("{}: {} violation(s)", file.display(), violations.len());
            Ok(ExitCode::FAILURE)
        }
        Err(e) => Err(e).with_context(|| format!("parsing {}", file.display())),
    }
}

fn filter_for(project: &Project, tags: &[String]) -> Result<TagFilter> {
    if tags.is_empty() {
        return Ok(TagFilter::all());
    }
    let ids = tags
        .iter()
        .map(|k| {
            project
                .resolve_tag(k)
                .map(|t| t.id.clone())
                .with_context(|| format!("unknown tag: {k}"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TagFilter::only(ids))
}

fn charts(a: ChartArgs) -> Result<()> {
    let projects = a
        .projects
        .iter()
        .map(|p| load(p))
        .collect::<Result<Vec<_>>>()?;
    if !matches!(a.kind, ChartKind::Compare) && projects.len() > 1 {
        bail!("only `compare` takes more than one project");
    }
    if a.format == Format::Csv && !matches!(a.kind, ChartKind::Stacked) {
        bail!("csv output is available for stacked charts only");
    }
    let p = &projects[0];
    let text = || {
        a.text
            .as_deref()
            .context("--text is required for this chart")
    };
    let body = match a.kind {
        ChartKind::Gantt => json(&analytics::gantt(p, text()?, &filter_for(p, &a.tags)?)?),
        ChartKind::Stacked => {
            let series = analytics::stacked_area(p, text()?, a.bin)?;
            match a.format {
                Format::Json => json(&series),
                Format::Csv => analytics::stacked_csv(&series),
            }
        }
        ChartKind::Sunburst => {
            let scope = a.text.clone().map_or(Scope::Project, Scope::Text);
            json(&analytics::sunburst(p, &scope, a.mode.into())?)
        }
        ChartKind::Gallery => json(&analytics::gallery(p, &filter_for(p, &a.tags)?)),
        ChartKind::Compare => {
            let refs: Vec<&Project> = projects.iter().collect();
            json(&analytics::compare_distributions(&refs, a.mode.into()))
        }
    };
    emit(&a.output, &body)
}

fn matrix_of(project: &Project, a: &SimilarityArgs) -> Result<SimilarityMatrix> {
    let opts = MatrixOptions {
        pair: PairOptions {
            radius: a.radius,
            ..PairOptions::default()
        },
        rollup: a.rollup,
        workers: a.workers,
    };
    let matrices = a
        .tag
        .iter()
        .map(|t| similarity_matrix(project, t, opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(match <[_; 1]>::try_from(matrices) {
        Ok([single]) => single,
        Err(many) => mean_matrix(&many)?,
    })
}

fn matrix_for(a: &SimilarityArgs) -> Result<SimilarityMatrix> {
    matrix_of(&load(&a.project.project)?, a)
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let m = matrix_for(&a.sim)?;
    let targets: Vec<TextId> = (0..a.rounds)
        .flat_map(|_| m.texts.iter().cloned())
        .collect();
    let trials = build_trials(&m, &targets, a.seed)?;
    if let Some(path) = &a.trials_out {
        fs::write(path, json(&trials)).with_context(|| format!("writing {}", path.display()))?;
    }
    // Rater randomness derives from the same seed, offset from the trial stream.
    let mut rater: Box<dyn Rater> = match a.rater {
        RaterKind::Faithful => Box::new(ScoreFaithfulRater),
        RaterKind::Noisy => Box::new(NoisyScoreRater::new(a.noise, a.seed ^ 0x5eed)),
        RaterKind::Random => Box::new(UniformRandomRater::new(a.seed ^ 0x5eed)),
    };
    let name = match a.rater {
        RaterKind::Faithful => "faithful",
        RaterKind::Noisy => "noisy",
        RaterKind::Random => "random",
    };
    let responses = simulate(rater.as_mut(), name, &trials, &m)?;
    let report = score_responses(&responses, &trials)?;
    if let Some(rate) = report.least_similar_hit_rate {
        eprintln!(
            "least-similar hit rate: {rate:.4} ({}/{})",
            report.hits, report.trial_count
        );
    }
    let body = match a.format {
        Format::Csv => report_csv(&report),
        Format::Json => json(&report),
    };
    emit(&a.output, &body)
}

fn runtime() -> Result<tokio::runtime::Runtime> {
    Ok(tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?)
}

async fn shutdown_signal() {
    #[cfg(unix)]
    {
        let mut term = tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate())
            .expect("SIGTERM handler installs");
        tokio::select! {
            _ = tokio::signal::ctrl_c() => {}
            _ = term.recv() => {}
        }
    }
    #[cfg(not(unix))]
    let _ = tokio::signal::ctrl_c().await;
}

fn serve(a: ServeArgs) -> Result<()> {
    let config = tagscope_service::Config {
        addr: SocketAddr::new(a.host, a.port),
        data_dir: a.data_dir,
        workers: a.workers,
    };
    runtime()?.block_on(async {
        let (listener, service) = tagscope_service::bind(&config).await?;
        println!("listening on http://{}", listener.local_addr()?);
        std::io::stdout().flush()?;
        tagscope_service::run(listener, service, shutdown_signal()).await?;
        Ok(())
    })
}

fn fixture_remote(a: FixtureRemoteArgs) -> Result<()> {
    validate_remote_dir(&a.dir)?;
    runtime()?.block_on(async {
        let listener = tokio::net::TcpListener::bind(SocketAddr::new(a.host, a.port)).await?;
        println!("listening on http://{}", listener.local_addr()?);
        std::io::stdout().flush()?;
        axum_serve(listener, a.dir).await
    })
}

fn validate_remote_dir(dir: &Path) -> Result<()> {
    let index = dir.join(tagscope_core::import::LOCAL_INDEX);
    if !index.is_file() {
        bail!(
            "{} has no {}",
            dir.display(),
            tagscope_core::import::LOCAL_INDEX
        );
    }
    Ok(())
}

async fn axum_serve(listener: tokio::net::TcpListener, dir: PathBuf) -> Result<()> {
    tagscope_service::serve_router(
        listener,
        tagscope_service::remote_fixture_router(dir),
        shutdown_signal(),
    )
    .await?;
    Ok(())
}
