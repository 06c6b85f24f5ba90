use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use moodnet::abm::{GlobalParams, Model, SentimentMode};
use moodnet::calibrate::{ParamRanges, RhoWeights, Strategy};
use moodnet::communicability::CommunicabilityConfig;
use moodnet::ingest::FilterConfig;
use moodnet::io;
use moodnet::pipeline::stages::{self, Eligible, Method};
use moodnet::pipeline::{
    emit_report, run_pipeline, threads_from_env, PipelineConfig, ReportKind, ReportOptions,
};
use moodnet::{DateRange, Result, ScaleKind};

#[derive(Parser)]
#[command(
    name = "moodnet",
    version,
    about = "Sentiment and communicability analysis of mention networks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Filter users, extract the reciprocated core and build the networks.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        /// `<start>..<end>`, inclusive UTC days.
        #[arg(long)]
        window: DateRange,
        /// Window of the weighted interaction graph (default: --window).
        #[arg(long)]
        graph_window: Option<DateRange>,
        #[arg(long)]
        strict: bool,
        /// Store mention counts instead of 0/1 entries.
        #[arg(long)]
        weighted: bool,
        /// TOML file with filter thresholds.
        #[arg(long)]
        filter: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Broadcast and receive scores of an evolving network.
    Communicability {
        #[arg(long)]
        network: PathBuf,
        #[arg(long, default_value_t = 0.75)]
        alpha: f64,
        #[arg(long, default_value_t = 10)]
        truncation: usize,
        /// `first-day` or `all`.
        #[arg(long, default_value = "first-day")]
        eligible: Eligible,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the sentiment of top broadcasters with the whole population.
    SentMetrics {
        #[arg(long)]
        scores: PathBuf,
        /// Directory holding `edges.csv` from `ingest`.
        #[arg(long)]
        edges: PathBuf,
        #[arg(long, default_value = "mc")]
        scale: ScaleKind,
        #[arg(long, value_delimiter = ',', default_value = "500,1000,5000")]
        top: Vec<usize>,
        #[arg(long, default_value_t = 100_000)]
        nsamples: usize,
        #[arg(long, default_value_t = 100)]
        ma_window: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Detect communities on a weighted interaction graph.
    Communities {
        #[arg(long)]
        graph: PathBuf,
        /// `louvain`, `wlouvain` or `kclique`.
        #[arg(long, default_value = "louvain")]
        method: Method,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        min_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write per-community statistics (needs --tweets and --window).
        #[arg(long)]
        stats: bool,
        #[arg(long)]
        tweets: Option<PathBuf>,
        #[arg(long)]
        window: Option<DateRange>,
        #[arg(long, default_value = "mc")]
        scale: ScaleKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// User loss between two periods and daily sentiment series.
    Endure {
        #[arg(long)]
        tweets: PathBuf,
        #[arg(long)]
        communities: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        period_a: DateRange,
        #[arg(long)]
        period_b: DateRange,
        #[arg(long)]
        series_window: Option<DateRange>,
        #[arg(long, default_value_t = 3.0)]
        z: f64,
        #[arg(long, default_value = "mc")]
        scale: ScaleKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build and run agent-based models.
    Abm {
        #[command(subcommand)]
        cmd: AbmCmd,
    },
    /// Fit the global model parameters to a community's history.
    Calibrate {
        #[command(flatten)]
        history: History,
        /// TOML search ranges (default: the full space for the scale).
        #[arg(long)]
        ranges: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        stages: usize,
        #[arg(long, default_value_t = 50)]
        runs: usize,
        #[arg(long)]
        seed: u64,
        /// Also write the model rebuilt with the best parameters.
        #[arg(long)]
        model_out: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare ways for a new user to join a community.
    Scenario {
        #[arg(long)]
        model: PathBuf,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "most_positive_3,most_negative_3,highest_reply_3,lowest_reply_3"
        )]
        strategy: Vec<Strategy>,
        #[arg(long, default_value_t = 3.0)]
        multiplier: f64,
        #[arg(long, default_value_t = 30)]
        days: usize,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Independent random numbers per arm.
        #[arg(long)]
        independent: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plot-ready tables from stage artifacts.
    Report {
        #[arg(long)]
        artifacts: PathBuf,
        /// broadcast-vs-sentiment, endurance, daily-series, calibration or scenario.
        #[arg(long)]
        kind: ReportKind,
        #[arg(long, default_value = "mc")]
        scale: ScaleKind,
        #[arg(long, default_value_t = 100)]
        ma_window: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the stages listed in a pipeline config file.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct History {
    /// Tweets in JSON Lines.
    #[arg(long)]
    history: PathBuf,
    /// Community members, one id per line.
    #[arg(long)]
    community: PathBuf,
    #[arg(long, default_value = "mc")]
    scale: ScaleKind,
    #[arg(long)]
    window: DateRange,
}

#[derive(Subcommand)]
enum AbmCmd {
    /// Build a model from a community's history.
    Build {
        #[command(flatten)]
        history: History,
        /// TOML file with global parameters.
        #[arg(long)]
        globals: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate a model and write the message log.
    Run {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 30)]
        days: usize,
        #[arg(long)]
        seed: u64,
        /// One noise draw per message instead of per burst.
        #[arg(long)]
        per_message: bool,
        #[arg(long)]
        out: PathBuf,
        /// Also write the run's moment summary as JSON.
        #[arg(long)]
        moments: Option<PathBuf>,
    },
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| moodnet::Error::IoPath {
        path: path.to_path_buf(),
        source: e,
    })?;
    toml::from_str(&text).map_err(|e| moodnet::Error::Config(format!("{}: {e}", path.display())))
}

fn tweets(path: &Path) -> Result<Vec<moodnet::TweetRecord>> {
    Ok(stages::load_tweets(path, false)?.0)
}

fn run(cmd: Cmd) -> Result<bool> {
    match cmd {
        Cmd::Ingest {
            input,
            window,
            graph_window,
            strict,
            weighted,
            filter,
            out,
        } => {
            let filter: FilterConfig = filter
                .as_deref()
                .map(read_toml)
                .transpose()?
                .unwrap_or_default();
            filter.validate()?;
            let (t, errors) = stages::load_tweets(&input, strict)?;
            for e in &errors {
                eprintln!("line {}: {}", e.line, e.message);
            }
            stages::ingest(&t, &errors, &window, &filter, &out)?;
            stages::networks(
                &t,
                &window,
                &graph_window.unwrap_or(window),
                !weighted,
                &out,
            )?;
        }
        Cmd::Communicability {
            network,
            alpha,
            truncation,
            eligible,
            out,
        } => {
            stages::communicability(
                &network,
                &CommunicabilityConfig::new(alpha, truncation)?,
                eligible,
                &out,
            )?;
        }
        Cmd::SentMetrics {
            scores,
            edges,
            scale,
            top,
            nsamples,
            ma_window,
            seed,
            out,
        } => {
            let csv = out.with_file_name(format!(
                "{}_moving_average.csv",
                out.file_stem()
                    .map_or("report".into(), |s| s.to_string_lossy())
            ));
            let p = stages::SentMetricsParams {
                scale,
                n_samples: nsamples,
                ma_window,
                seed,
            };
            stages::sent_metrics(&scores, &edges.join(stages::EDGES), &top, &p, &out, &csv)?;
        }
        Cmd::Communities {
            graph,
            method,
            k,
            min_size,
            seed,
            stats,
            tweets: tw,
            window,
            scale,
            out,
        } => {
            let loaded;
            let si = if stats {
                let (Some(path), Some(window)) = (tw, window) else {
                    return Err(moodnet::Error::InvalidInput(
                        "--stats needs --tweets and --window".into(),
                    ));
                };
                loaded = tweets(&path)?;
                Some(stages::StatsInput {
                    tweets: &loaded,
                    scale,
                    window,
                })
            } else {
                None
            };
            stages::communities(&graph, method, k, min_size, seed, si.as_ref(), &out)?;
        }
        Cmd::Endure {
            tweets: tw,
            communities,
            graph,
            period_a,
            period_b,
            series_window,
            z,
            scale,
            out,
        } => {
            let p = stages::EnduranceParams {
                scale,
                period_a,
                period_b,
                series_window,
                z_threshold: z,
            };
            stages::endurance(&tweets(&tw)?, &communities, &graph, &p, &out)?;
        }
        Cmd::Abm {
            cmd:
                AbmCmd::Build {
                    history,
                    globals,
                    out,
                },
        } => {
            let g: GlobalParams = globals
                .as_deref()
                .map(read_toml)
                .transpose()?
                .unwrap_or_default();
            let members = io::read_user_list(&history.community)?;
            stages::build(
                &tweets(&history.history)?,
                &members,
                g,
                history.scale,
                &history.window,
                &out,
            )?;
        }
        Cmd::Abm {
            cmd:
                AbmCmd::Run {
                    model,
                    days,
                    seed,
                    per_message,
                    out,
                    moments,
                },
        } => {
            let mut m: Model = io::read_json(&model)?;
            if per_message {
                m = m.with_sentiment_mode(SentimentMode::PerMessage);
            }
            stages::run_abm(&m, days, seed, &out, moments.as_deref())?;
        }
        Cmd::Calibrate {
            history,
            ranges,
            stages: n,
            runs,
            seed,
            model_out,
            out,
        } => {
            let ranges = match ranges {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| moodnet::Error::IoPath {
                        path: p.clone(),
                        source: e,
                    })?;
                    ParamRanges::from_toml(&text)?
                }
                None => ParamRanges::defaults(history.scale),
            };
            let members = io::read_user_list(&history.community)?;
            let p = stages::CalibrateParams {
                scale: history.scale,
                window: history.window,
                ranges,
                stages: n,
                runs,
                seed,
                weights: RhoWeights::default(),
            };
            stages::calibrate(
                &tweets(&history.history)?,
                &members,
                &p,
                &out,
                model_out.as_deref(),
            )?;
        }
        Cmd::Scenario {
            model,
            strategy,
            multiplier,
            days,
            runs,
            seed,
            independent,
            out,
        } => {
            let m: Model = io::read_json(&model)?;
            let p = stages::ScenarioParams {
                strategies: strategy,
                multiplier,
                days,
                runs,
                seed,
                common_random_numbers: !independent,
            };
            stages::scenario(&m, &p, &out)?;
        }
        Cmd::Report {
            artifacts,
            kind,
            scale,
            ma_window,
            out,
        } => {
            for p in emit_report(kind, &artifacts, &out, &ReportOptions { scale, ma_window })? {
                println!("{}", p.display());
            }
        }
        Cmd::Pipeline { config } => {
            let cfg = PipelineConfig::from_file(&config)?;
            let manifest = run_pipeline(&cfg)?;
            for s in &manifest.stages {
                match &s.error {
                    Some(e) => eprintln!("{}: {:?} ({}: {})", s.stage, s.status, e.kind, e.message),
                    None => eprintln!("{}: {:?}", s.stage, s.status),
                }
            }
            return Ok(manifest.succeeded());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = threads_from_env().and_then(|threads| {
        if let Some(n) = threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| moodnet::Error::Config(e.to_string()))?;
        }
        run(cli.cmd)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
