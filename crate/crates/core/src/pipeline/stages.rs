//! Individual analysis steps working from files to files. The command-line
//! subcommands and the configured pipeline both call these.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::abm::{
    build_model, simulate, summarize, summarize_history, GlobalParams, Model, MomentSummary,
};
use crate::calibrate::{
    grid_search, scenario_compare, HistoryModelBuilder, ParamRanges, RhoWeights, SearchResult,
    Strategy,
};
use crate::communicability::{
    broadcast_scores, rank_by_score, receive_scores, CommunicabilityConfig,
};
use crate::community::{
    community_stats, daily_sentiment_series, flag_sentiment_anomalies, k_clique_communities,
    louvain, pearson, user_loss_factor, Community, CommunityStats, EnduranceRecord,
};
use crate::error::{Error, Result};
use crate::ingest::{
    build_evolving_network, build_interaction_graph_among, filter_users, reciprocal_core,
    FilterConfig, LineError,
};
use crate::io;
use crate::model::{DateRange, ScaleKind, TweetRecord, UserId, WeightedInteractionGraph};
use crate::sentiment::{
    attributes_by_user, compare_top_groups, moving_averages_by_rank, Attribute,
    TopBroadcasterReport, UserSentimentAttributes,
};

pub const FILTER_REPORT: &str = "filter_report.json";
pub const PARSE_ERRORS: &str = "parse_errors.json";
pub const CORE_USERS: &str = "core_users.txt";
pub const NETWORK_DIR: &str = "network";
pub const EDGES: &str = "edges.csv";
pub const GRAPH: &str = "interaction_graph.csv";
pub const SCORES: &str = "scores.csv";
pub const SENT_METRICS: &str = "sent_metrics.json";
pub const SENT_MOVING_AVERAGE: &str = "sent_moving_average.csv";
pub const COMMUNITIES: &str = "communities.json";
pub const COMMUNITY_STATS: &str = "community_stats.json";
pub const ENDURANCE: &str = "endurance.json";
pub const SERIES_DIR: &str = "series";
pub const MODEL: &str = "model.json";
pub const LOG: &str = "log.csv";
pub const SIM_MOMENTS: &str = "sim_moments.json";
pub const CALIBRATION: &str = "calibration.json";
pub const CALIBRATED_MODEL: &str = "calibrated_model.json";
pub const SCENARIO: &str = "scenario.json";

pub fn load_tweets(path: &Path, strict: bool) -> Result<(Vec<TweetRecord>, Vec<LineError>)> {
    let parsed = io::read_tweets(path, strict)?;
    Ok((parsed.records, parsed.errors))
}

/// Filters users and extracts the reciprocated core of `window`. Writes the
/// filter report, the parse errors and the core user list into `out`.
pub fn ingest(
    tweets: &[TweetRecord],
    errors: &[LineError],
    window: &DateRange,
    filter: &FilterConfig,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    let report = filter_users(tweets, filter)?;
    let core = reciprocal_core(tweets, &report.retained, window);
    let paths = [
        out.join(FILTER_REPORT),
        out.join(PARSE_ERRORS),
        out.join(CORE_USERS),
    ];
    io::write_json(&paths[0], &report)?;
    io::write_json(&paths[1], errors)?;
    io::write_user_list(&paths[2], &core)?;
    Ok(paths.to_vec())
}

/// Builds the evolving network over the core users, their scored edges, and
/// the weighted interaction graph over all retained users of `graph_window`.
pub fn networks(
    tweets: &[TweetRecord],
    window: &DateRange,
    graph_window: &DateRange,
    binary: bool,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    let core = io::read_user_list(&existing(out.join(CORE_USERS))?)?;
    let report: crate::ingest::FilterReport = io::read_json(&out.join(FILTER_REPORT))?;
    if core.is_empty() {
        return Err(Error::EmptyInput("reciprocated core is empty"));
    }
    let net = build_evolving_network(tweets, &core, window, binary)?;
    let dir = out.join(NETWORK_DIR);
    io::write_network(&dir, &net)?;
    io::write_edges(&out.join(EDGES), &io::edge_rows(tweets, &core, window))?;
    let graph = build_interaction_graph_among(tweets, &report.retained, graph_window, 1)?;
    io::write_graph(&out.join(GRAPH), &graph)?;
    Ok(vec![
        dir.join(io::NETWORK_CSV),
        dir.join(io::NETWORK_USERS),
        dir.join(io::NETWORK_META),
        out.join(EDGES),
        out.join(GRAPH),
    ])
}

fn existing(p: PathBuf) -> Result<PathBuf> {
    if p.exists() {
        Ok(p)
    } else {
        Err(Error::MissingArtifact(p))
    }
}

/// Who may be ranked by broadcast score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Eligible {
    /// Users sending at least one mention on the first day.
    #[default]
    FirstDay,
    All,
}

impl std::str::FromStr for Eligible {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first-day" => Ok(Eligible::FirstDay),
            "all" => Ok(Eligible::All),
            _ => Err(Error::invalid(format!("unknown eligibility '{s}'"))),
        }
    }
}

/// Broadcast and receive scores of every network user, ranked by broadcast.
pub fn communicability(
    network_dir: &Path,
    cfg: &CommunicabilityConfig,
    eligible: Eligible,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    let net = io::read_network(network_dir)?;
    let b = broadcast_scores(&net, cfg)?;
    let r = receive_scores(&net, cfg)?;
    let pool: BTreeSet<UserId> = match eligible {
        Eligible::FirstDay => net.first_day_active().into_iter().collect(),
        Eligible::All => net.users().iter().cloned().collect(),
    };
    let ranking = rank_by_score(net.users(), &b, &pool)?;
    let rank: BTreeMap<&UserId, usize> = ranking
        .iter()
        .enumerate()
        .map(|(i, u)| (u, i + 1))
        .collect();
    let rows: Vec<io::ScoreRow> = net
        .users()
        .iter()
        .enumerate()
        .map(|(i, u)| io::ScoreRow {
            user: u.clone(),
            broadcast: b.values[i],
            receive: r.values[i],
            rank: rank.get(u).copied(),
        })
        .collect();
    io::write_scores(out, &rows)?;
    Ok(vec![out.to_path_buf()])
}

/// Per-sender scores on `scale` from an edge table.
pub fn edge_scores_from_rows(rows: &[io::EdgeRow], scale: ScaleKind) -> BTreeMap<UserId, Vec<f64>> {
    let mut out: BTreeMap<UserId, Vec<f64>> = BTreeMap::new();
    for r in rows {
        let s = match scale {
            ScaleKind::Mc => r.mc.map(f64::from),
            ScaleKind::Ss => r.ss.map(f64::from),
            ScaleKind::L => r.l,
        };
        if let Some(s) = s {
            out.entry(r.src.clone()).or_default().push(s);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentMetricsParams {
    pub scale: ScaleKind,
    pub n_samples: usize,
    pub ma_window: usize,
    pub seed: u64,
}

/// Top-broadcaster comparison plus moving averages along the ranking.
/// `tops` larger than the ranked population are dropped.
pub fn sent_metrics(
    scores: &Path,
    edges: &Path,
    tops: &[usize],
    p: &SentMetricsParams,
    out_json: &Path,
    out_csv: &Path,
) -> Result<Vec<PathBuf>> {
    let ranking = io::ranking_from_scores(&io::read_scores(scores)?);
    let attrs = attributes_by_user(&edge_scores_from_rows(&io::read_edges(edges)?, p.scale));
    let ranked = ranking.iter().filter(|u| attrs.contains_key(*u)).count();
    if ranked == 0 {
        return Err(Error::InsufficientData(
            "no ranked user has scored edges".into(),
        ));
    }
    let tops: Vec<usize> = tops
        .iter()
        .copied()
        .filter(|&k| k >= 1 && k <= ranked)
        .collect();
    let report: TopBroadcasterReport =
        compare_top_groups(&attrs, &ranking, &tops, p.n_samples, p.seed)?;
    io::write_json(out_json, &report)?;
    let (header, rows) = moving_average_table(&attrs, &ranking, p.ma_window)?;
    io::write_table(out_csv, &header, &rows)?;
    Ok(vec![out_json.to_path_buf(), out_csv.to_path_buf()])
}

/// Moving averages of every attribute along `ranking`, one row per window
/// start (1-based rank).
pub(crate) fn moving_average_table(
    attrs: &BTreeMap<UserId, UserSentimentAttributes>,
    ranking: &[UserId],
    window: usize,
) -> Result<(Vec<&'static str>, Vec<Vec<String>>)> {
    let ma = moving_averages_by_rank(attrs, ranking, window)?;
    let len = ma.values().next().map_or(0, Vec::len);
    let mut header = vec!["rank"];
    header.extend(Attribute::ALL.iter().map(Attribute::name));
    let rows = (0..len)
        .map(|i| {
            let mut r = vec![(i + 1).to_string()];
            r.extend(Attribute::ALL.iter().map(|a| ma[a][i].to_string()));
            r
        })
        .collect();
    Ok((header, rows))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Louvain,
    Wlouvain,
    Kclique,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "louvain" => Ok(Method::Louvain),
            "wlouvain" => Ok(Method::Wlouvain),
            "kclique" => Ok(Method::Kclique),
            _ => Err(Error::invalid(format!("unknown community method '{s}'"))),
        }
    }
}

pub fn detect(
    graph: &WeightedInteractionGraph,
    method: Method,
    k: usize,
    seed: u64,
) -> Result<Vec<Community>> {
    match method {
        Method::Louvain => Ok(louvain(graph, false, seed)),
        Method::Wlouvain => Ok(louvain(graph, true, seed)),
        Method::Kclique => k_clique_communities(graph, k),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityStatsRow {
    pub id: usize,
    #[serde(flatten)]
    pub stats: CommunityStats,
}

/// What `community_stats` needs beyond the graph.
pub struct StatsInput<'a> {
    pub tweets: &'a [TweetRecord],
    pub scale: ScaleKind,
    pub window: DateRange,
}

/// Detects communities of at least `min_size` members; with `stats`, also
/// writes their statistics.
pub fn communities(
    graph_path: &Path,
    method: Method,
    k: usize,
    min_size: usize,
    seed: u64,
    stats: Option<&StatsInput<'_>>,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    let graph = io::read_graph(graph_path, &BTreeSet::new())?;
    let found: Vec<Community> = detect(&graph, method, k, seed)?
        .into_iter()
        .filter(|c| c.len() >= min_size)
        .collect();
    let mut paths = vec![out.join(COMMUNITIES)];
    io::write_json(&paths[0], &found)?;
    if let Some(si) = stats {
        let rows = found
            .iter()
            .map(|c| {
                Ok(CommunityStatsRow {
                    id: c.id,
                    stats: community_stats(
                        &graph,
                        si.tweets,
                        &c.member_set(),
                        si.scale,
                        &si.window,
                    )?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        paths.push(out.join(COMMUNITY_STATS));
        io::write_json(&paths[1], &rows)?;
    }
    Ok(paths)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityEndurance {
    pub id: usize,
    pub size: usize,
    pub conductance: f64,
    pub weighted_conductance: f64,
    pub mean_internal_sentiment: Option<f64>,
    /// Absent when no member was active in the later period.
    pub endurance: Option<EnduranceRecord>,
    pub extinct: bool,
    /// Days whose mean sentiment deviates strongly; empty without a series.
    pub anomalies: Vec<chrono::NaiveDate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnduranceReport {
    pub period_a: DateRange,
    pub period_b: DateRange,
    pub communities: Vec<CommunityEndurance>,
    /// Pearson correlation of the loss factor with conductance, over
    /// surviving communities.
    pub loss_vs_conductance: Option<f64>,
    pub loss_vs_sentiment: Option<f64>,
}

pub struct EnduranceParams {
    pub scale: ScaleKind,
    pub period_a: DateRange,
    pub period_b: DateRange,
    /// Writes one `date,mean,count` series per community over this window.
    pub series_window: Option<DateRange>,
    pub z_threshold: f64,
}

/// User loss between two periods for every community, with the statistics
/// the loss is compared against.
pub fn endurance(
    tweets: &[TweetRecord],
    communities_path: &Path,
    graph_path: &Path,
    p: &EnduranceParams,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    let found: Vec<Community> = io::read_json(communities_path)?;
    let graph = io::read_graph(graph_path, &BTreeSet::new())?;
    let mut paths = Vec::new();
    let mut rows = Vec::with_capacity(found.len());
    for c in &found {
        let members = c.member_set();
        let stats = community_stats(&graph, tweets, &members, p.scale, &p.period_a)?;
        let (endurance, extinct) =
            match user_loss_factor(tweets, &members, &p.period_a, &p.period_b) {
                Ok(r) => (Some(r), false),
                Err(Error::CommunityExtinct) => (None, true),
                Err(e) => return Err(e),
            };
        let mut anomalies = Vec::new();
        if let Some(w) = &p.series_window {
            let series = daily_sentiment_series(tweets, &members, p.scale, w);
            let path = out.join(SERIES_DIR).join(format!("{}.csv", c.id));
            io::write_series(&path, &series)?;
            paths.push(path);
            match flag_sentiment_anomalies(&series, p.z_threshold) {
                Ok(days) => anomalies = days,
                Err(Error::InsufficientData(_)) => {}
                Err(e) => return Err(e),
            }
        }
        rows.push(CommunityEndurance {
            id: c.id,
            size: c.len(),
            conductance: stats.conductance,
            weighted_conductance: stats.weighted_conductance,
            mean_internal_sentiment: stats.mean_internal_sentiment,
            endurance,
            extinct,
            anomalies,
        });
    }
    let corr = |f: &dyn Fn(&CommunityEndurance) -> Option<f64>| {
        let (xs, ys): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .filter_map(|r| Some((r.endurance.as_ref()?.user_loss_factor, f(r)?)))
            .unzip();
        pearson(&xs, &ys).ok()
    };
    let report = EnduranceReport {
        period_a: p.period_a,
        period_b: p.period_b,
        loss_vs_conductance: corr(&|r| Some(r.conductance)),
        loss_vs_sentiment: corr(&|r| r.mean_internal_sentiment),
        communities: rows,
    };
    let path = out.join(ENDURANCE);
    io::write_json(&path, &report)?;
    paths.insert(0, path);
    Ok(paths)
}

/// The community with the given id, or the largest one (smallest id on ties).
pub fn pick_community(found: &[Community], id: Option<usize>) -> Result<BTreeSet<UserId>> {
    let c = match id {
        Some(id) => found.iter().find(|c| c.id == id),
        None => found
            .iter()
            .min_by_key(|c| (std::cmp::Reverse(c.len()), c.id)),
    };
    c.map(Community::member_set)
        .ok_or_else(|| Error::InsufficientData("no matching community".into()))
}

pub fn build(
    tweets: &[TweetRecord],
    members: &BTreeSet<UserId>,
    globals: GlobalParams,
    scale: ScaleKind,
    window: &DateRange,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    let model = build_model(tweets, members, globals, scale, window)?;
    io::write_json(out, &model)?;
    Ok(vec![out.to_path_buf()])
}

/// Simulates `days` days and writes the log and its moments.
pub fn run_abm(
    model: &Model,
    days: usize,
    seed: u64,
    log_out: &Path,
    moments_out: Option<&Path>,
) -> Result<Vec<PathBuf>> {
    let log = simulate(model, days, seed)?;
    io::write_log(log_out, &log)?;
    let mut paths = vec![log_out.to_path_buf()];
    if let Some(m) = moments_out {
        io::write_json(m, &summarize(&log)?)?;
        paths.push(m.to_path_buf());
    }
    Ok(paths)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub window: DateRange,
    pub scale: ScaleKind,
    pub runs_per_cell: usize,
    pub seed: u64,
    pub weights: RhoWeights,
    pub real: MomentSummary,
    pub result: SearchResult,
}

pub struct CalibrateParams {
    pub scale: ScaleKind,
    pub window: DateRange,
    pub ranges: ParamRanges,
    pub stages: usize,
    pub runs: usize,
    pub seed: u64,
    pub weights: RhoWeights,
}

/// Calibrates the globals of `members` against their history; writes the
/// full search trace and the calibrated model.
pub fn calibrate(
    tweets: &[TweetRecord],
    members: &BTreeSet<UserId>,
    p: &CalibrateParams,
    out: &Path,
    model_out: Option<&Path>,
) -> Result<Vec<PathBuf>> {
    let real = summarize_history(tweets, members, &p.window, p.scale)?;
    let builder = HistoryModelBuilder::new(tweets, members, p.scale, p.window);
    let result = grid_search(
        &builder, &p.ranges, &real, p.stages, p.runs, p.seed, &p.weights,
    )?;
    let best = result.best;
    io::write_json(
        out,
        &CalibrationReport {
            window: p.window,
            scale: p.scale,
            runs_per_cell: p.runs,
            seed: p.seed,
            weights: p.weights,
            real,
            result,
        },
    )?;
    let mut paths = vec![out.to_path_buf()];
    if let Some(m) = model_out {
        io::write_json(m, &build_model(tweets, members, best, p.scale, &p.window)?)?;
        paths.push(m.to_path_buf());
    }
    Ok(paths)
}

pub struct ScenarioParams {
    pub strategies: Vec<Strategy>,
    pub multiplier: f64,
    pub days: usize,
    pub runs: usize,
    pub seed: u64,
    pub common_random_numbers: bool,
}

pub fn scenario(model: &Model, p: &ScenarioParams, out: &Path) -> Result<Vec<PathBuf>> {
    let report = scenario_compare(
        model,
        &p.strategies,
        p.multiplier,
        p.days,
        p.runs,
        p.seed,
        p.common_random_numbers,
    )?;
    io::write_json(out, &report)?;
    Ok(vec![out.to_path_buf()])
}
