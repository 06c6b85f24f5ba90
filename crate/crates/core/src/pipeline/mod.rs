//! Config-driven runs of the whole analysis, from raw tweets to calibrated
//! models and scenario comparisons, with a manifest of every artifact.

mod report;
pub mod stages;

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::abm::{GlobalParams, Model};
use crate::calibrate::{ParamRanges, RhoWeights, Strategy};
use crate::communicability::CommunicabilityConfig;
use crate::community::Community;
use crate::error::{Error, Result};
use crate::ingest::FilterConfig;
use crate::io;
use crate::model::{DateRange, ScaleKind, TweetRecord};
use crate::rng::{derive_seed, name_key};

pub use report::{emit_report, ReportKind, ReportOptions};

pub const MANIFEST: &str = "manifest.json";
pub const THREADS_ENV: &str = "MOODNET_THREADS";

/// Pipeline stages in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Ingest,
    Networks,
    Communicability,
    SentMetrics,
    Communities,
    Endurance,
    Model,
    Simulate,
    Calibrate,
    Scenario,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 11] = [
        Stage::Ingest,
        Stage::Networks,
        Stage::Communicability,
        Stage::SentMetrics,
        Stage::Communities,
        Stage::Endurance,
        Stage::Model,
        Stage::Simulate,
        Stage::Calibrate,
        Stage::Scenario,
        Stage::Report,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Networks => "networks",
            Stage::Communicability => "communicability",
            Stage::SentMetrics => "sent_metrics",
            Stage::Communities => "communities",
            Stage::Endurance => "endurance",
            Stage::Model => "model",
            Stage::Simulate => "simulate",
            Stage::Calibrate => "calibrate",
            Stage::Scenario => "scenario",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown stage '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub tweets: PathBuf,
    #[serde(default)]
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworksConfig {
    pub binary: bool,
    /// Window of the weighted interaction graph; the main window if absent.
    pub graph_window: Option<DateRange>,
}

impl Default for NetworksConfig {
    fn default() -> Self {
        Self {
            binary: true,
            graph_window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommunicabilitySection {
    pub alpha: f64,
    pub truncation: usize,
    pub eligible: stages::Eligible,
}

impl Default for CommunicabilitySection {
    fn default() -> Self {
        let c = CommunicabilityConfig::default();
        Self {
            alpha: c.alpha,
            truncation: c.truncation_order,
            eligible: stages::Eligible::FirstDay,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SentMetricsConfig {
    pub tops: Vec<usize>,
    pub n_samples: usize,
    pub ma_window: usize,
}

impl Default for SentMetricsConfig {
    fn default() -> Self {
        Self {
            tops: vec![500, 1000, 5000],
            n_samples: 100_000,
            ma_window: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommunitiesConfig {
    pub method: stages::Method,
    pub k: usize,
    pub min_size: usize,
}

impl Default for CommunitiesConfig {
    fn default() -> Self {
        Self {
            method: stages::Method::Louvain,
            k: 4,
            min_size: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnduranceConfig {
    pub period_a: DateRange,
    pub period_b: DateRange,
    #[serde(default)]
    pub series_window: Option<DateRange>,
    #[serde(default = "default_z")]
    pub z_threshold: f64,
}

fn default_z() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Community id to model; the largest community if absent.
    pub community: Option<usize>,
    pub globals: GlobalParams,
    /// Days simulated by the `simulate` stage.
    pub days: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            community: None,
            globals: GlobalParams::default(),
            days: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrateConfig {
    pub stages: usize,
    pub runs: usize,
    /// Search space; the defaults for the scale if absent.
    pub ranges: Option<ParamRanges>,
    pub weights: RhoWeights,
}

impl Default for CalibrateConfig {
    fn default() -> Self {
        Self {
            stages: 5,
            runs: 50,
            ranges: None,
            weights: RhoWeights::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub strategies: Vec<Strategy>,
    pub multiplier: f64,
    pub days: usize,
    pub runs: usize,
    pub common_random_numbers: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            strategies: Strategy::ALL.to_vec(),
            multiplier: 3.0,
            days: 30,
            runs: 100,
            common_random_numbers: true,
        }
    }
}

/// A full run description, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub output: PathBuf,
    pub stages: Vec<Stage>,
    pub scale: ScaleKind,
    /// Main analysis window: networks, community statistics, model history.
    pub window: DateRange,
    pub input: InputConfig,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default)]
    pub networks: NetworksConfig,
    #[serde(default)]
    pub communicability: CommunicabilitySection,
    #[serde(default)]
    pub sent_metrics: SentMetricsConfig,
    #[serde(default)]
    pub communities: CommunitiesConfig,
    #[serde(default)]
    pub endurance: Option<EnduranceConfig>,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub calibrate: CalibrateConfig,
    #[serde(default)]
    pub scenario: ScenarioConfig,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative paths inside it are taken from the
    /// file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.output = base.join(&cfg.output);
        cfg.input.tweets = base.join(&cfg.input.tweets);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.filter.validate()?;
        CommunicabilityConfig::new(self.communicability.alpha, self.communicability.truncation)?;
        self.model.globals.validate()?;
        self.calibrate.weights.validate()?;
        if let Some(r) = &self.calibrate.ranges {
            r.validate()?;
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the config.
    pub fn hash(&self) -> String {
        hex(&Sha256::digest(
            serde_json::to_vec(self).expect("config serializes"),
        ))
    }

    /// Seed of a named stage, derived from the top-level seed.
    pub fn stage_seed(&self, stage: Stage) -> u64 {
        derive_seed(self.seed, &[name_key(stage.name())])
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Ok,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageError {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub status: StageStatus,
    pub artifacts: Vec<ArtifactEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<StageError>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_sha256: String,
    pub seed: u64,
    pub stages: Vec<StageRecord>,
}

impl Manifest {
    pub fn succeeded(&self) -> bool {
        self.stages.iter().all(|s| s.status == StageStatus::Ok)
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Io(_) | Error::IoPath { .. } => "io",
        Error::Json(_) => "json",
        Error::Parse { .. } => "parse",
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::EmptyInput(_) => "empty_input",
        Error::InvalidInput(_) => "invalid_input",
        Error::UnknownUser(_) => "unknown_user",
        Error::NoOutgoingEdges => "no_outgoing_edges",
        Error::CommunityExtinct => "community_extinct",
        Error::InsufficientData(_) => "insufficient_data",
        Error::ZeroVariance => "zero_variance",
        Error::MismatchedUsers => "mismatched_users",
        Error::Config(_) => "config",
        Error::MissingArtifact(_) => "missing_artifact",
    }
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io_at(path, e))?;
    Ok(hex(&Sha256::digest(bytes)))
}

struct Runner<'a> {
    cfg: &'a PipelineConfig,
    out: &'a Path,
    tweets: Option<Vec<TweetRecord>>,
}

impl Runner<'_> {
    fn tweets(&mut self) -> Result<&[TweetRecord]> {
        if self.tweets.is_none() {
            let (t, _) = stages::load_tweets(&self.cfg.input.tweets, self.cfg.input.strict)?;
            self.tweets = Some(t);
        }
        Ok(self.tweets.as_deref().expect("loaded above"))
    }

    fn target_members(&self) -> Result<BTreeSet<crate::model::UserId>> {
        let found: Vec<Community> = io::read_json(&self.out.join(stages::COMMUNITIES))?;
        stages::pick_community(&found, self.cfg.model.community)
    }

    fn run(&mut self, stage: Stage) -> Result<Vec<PathBuf>> {
        let cfg = self.cfg;
        let out = self.out;
        let seed = cfg.stage_seed(stage);
        match stage {
            Stage::Ingest => {
                let (tweets, errors) = stages::load_tweets(&cfg.input.tweets, cfg.input.strict)?;
                let paths = stages::ingest(&tweets, &errors, &cfg.window, &cfg.filter, out)?;
                self.tweets = Some(tweets);
                Ok(paths)
            }
            Stage::Networks => {
                let gw = cfg.networks.graph_window.unwrap_or(cfg.window);
                let binary = cfg.networks.binary;
                stages::networks(self.tweets()?, &cfg.window, &gw, binary, out)
            }
            Stage::Communicability => {
                let c = &cfg.communicability;
                stages::communicability(
                    &out.join(stages::NETWORK_DIR),
                    &CommunicabilityConfig::new(c.alpha, c.truncation)?,
                    c.eligible,
                    &out.join(stages::SCORES),
                )
            }
            Stage::SentMetrics => {
                let s = &cfg.sent_metrics;
                stages::sent_metrics(
                    &out.join(stages::SCORES),
                    &out.join(stages::EDGES),
                    &s.tops,
                    &stages::SentMetricsParams {
                        scale: cfg.scale,
                        n_samples: s.n_samples,
                        ma_window: s.ma_window,
                        seed,
                    },
                    &out.join(stages::SENT_METRICS),
                    &out.join(stages::SENT_MOVING_AVERAGE),
                )
            }
            Stage::Communities => {
                let c = &cfg.communities;
                let scale = cfg.scale;
                let window = cfg.networks.graph_window.unwrap_or(cfg.window);
                let tweets = self.tweets()?;
                let si = stages::StatsInput {
                    tweets,
                    scale,
                    window,
                };
                stages::communities(
                    &out.join(stages::GRAPH),
                    c.method,
                    c.k,
                    c.min_size,
                    seed,
                    Some(&si),
                    out,
                )
            }
            Stage::Endurance => {
                let e = cfg.endurance.as_ref().ok_or_else(|| {
                    Error::Config("the endurance stage needs an [endurance] section".into())
                })?;
                let p = stages::EnduranceParams {
                    scale: cfg.scale,
                    period_a: e.period_a,
                    period_b: e.period_b,
                    series_window: e.series_window,
                    z_threshold: e.z_threshold,
                };
                let tweets = self.tweets()?;
                stages::endurance(
                    tweets,
                    &out.join(stages::COMMUNITIES),
                    &out.join(stages::GRAPH),
                    &p,
                    out,
                )
            }
            Stage::Model => {
                let members = self.target_members()?;
                let tweets = self.tweets()?;
                stages::build(
                    tweets,
                    &members,
                    cfg.model.globals,
                    cfg.scale,
                    &cfg.window,
                    &out.join(stages::MODEL),
                )
            }
            Stage::Simulate => {
                let model: Model = io::read_json(&out.join(stages::MODEL))?;
                stages::run_abm(
                    &model,
                    cfg.model.days,
                    seed,
                    &out.join(stages::LOG),
                    Some(&out.join(stages::SIM_MOMENTS)),
                )
            }
            Stage::Calibrate => {
                let members = self.target_members()?;
                let c = &cfg.calibrate;
                let p = stages::CalibrateParams {
                    scale: cfg.scale,
                    window: cfg.window,
                    ranges: c
                        .ranges
                        .clone()
                        .unwrap_or_else(|| ParamRanges::defaults(cfg.scale)),
                    stages: c.stages,
                    runs: c.runs,
                    seed,
                    weights: c.weights,
                };
                let tweets = self.tweets()?;
                stages::calibrate(
                    tweets,
                    &members,
                    &p,
                    &out.join(stages::CALIBRATION),
                    Some(&out.join(stages::CALIBRATED_MODEL)),
                )
            }
            Stage::Scenario => {
                let calibrated = out.join(stages::CALIBRATED_MODEL);
                let path = if cfg.stages.contains(&Stage::Calibrate) && calibrated.exists() {
                    calibrated
                } else {
                    out.join(stages::MODEL)
                };
                let model: Model = io::read_json(&path)?;
                let s = &cfg.scenario;
                let p = stages::ScenarioParams {
                    strategies: s.strategies.clone(),
                    multiplier: s.multiplier,
                    days: s.days,
                    runs: s.runs,
                    seed,
                    common_random_numbers: s.common_random_numbers,
                };
                stages::scenario(&model, &p, &out.join(stages::SCENARIO))
            }
            Stage::Report => {
                let o = ReportOptions {
                    scale: cfg.scale,
                    ma_window: cfg.sent_metrics.ma_window,
                };
                let dir = out.join("reports");
                let mut paths = Vec::new();
                for kind in ReportKind::ALL {
                    let needed = match kind {
                        ReportKind::BroadcastVsSentiment => Stage::SentMetrics,
                        ReportKind::Endurance | ReportKind::DailySeries => Stage::Endurance,
                        ReportKind::Calibration => Stage::Calibrate,
                        ReportKind::Scenario => Stage::Scenario,
                    };
                    let series = kind != ReportKind::DailySeries
                        || cfg
                            .endurance
                            .as_ref()
                            .is_some_and(|e| e.series_window.is_some());
                    if cfg.stages.contains(&needed) && series {
                        paths.extend(emit_report(kind, out, &dir, &o)?);
                    }
                }
                Ok(paths)
            }
        }
    }
}

/// Runs the configured stages in dependency order and writes the manifest.
///
/// The first failing stage is recorded with its error and the remaining
/// stages are skipped. An empty stage list writes nothing.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<Manifest> {
    let requested: BTreeSet<Stage> = cfg.stages.iter().copied().collect();
    let mut manifest = Manifest {
        config_sha256: cfg.hash(),
        seed: cfg.seed,
        stages: Vec::new(),
    };
    if requested.is_empty() {
        return Ok(manifest);
    }
    std::fs::create_dir_all(&cfg.output).map_err(|e| Error::io_at(&cfg.output, e))?;
    let mut runner = Runner {
        cfg,
        out: &cfg.output,
        tweets: None,
    };
    let mut failed = false;
    for stage in requested {
        if failed {
            manifest.stages.push(StageRecord {
                stage,
                status: StageStatus::Skipped,
                artifacts: Vec::new(),
                error: None,
            });
            continue;
        }
        let record = match runner.run(stage) {
            Ok(paths) => StageRecord {
                stage,
                status: StageStatus::Ok,
                artifacts: paths
                    .iter()
                    .map(|p| {
                        Ok(ArtifactEntry {
                            path: relative(p, &cfg.output),
                            sha256: sha256_file(p)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
                error: None,
            },
            Err(e) => {
                failed = true;
                StageRecord {
                    stage,
                    status: StageStatus::Failed,
                    artifacts: Vec::new(),
                    error: Some(StageError {
                        kind: error_kind(&e).into(),
                        message: e.to_string(),
                    }),
                }
            }
        };
        manifest.stages.push(record);
    }
    io::write_json(&cfg.output.join(MANIFEST), &manifest)?;
    Ok(manifest)
}

fn relative(p: &Path, base: &Path) -> String {
    let rel = p.strip_prefix(base).unwrap_or(p);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

/// Worker count from `MOODNET_THREADS`; `None` when unset or empty.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .map(Some)
            .ok_or_else(|| {
                Error::Config(format!(
                    "{THREADS_ENV} must be a positive integer, got '{v}'"
                ))
            }),
        _ => Ok(None),
    }
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}
