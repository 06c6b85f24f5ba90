//! Reading and writing the on-disk artifacts: tweet files, user lists,
//! network triplets, graphs, score tables, series and simulation logs.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::abm::MessageLog;
use crate::community::DailySentiment;
use crate::error::{Error, Result};
use crate::ingest::{mention_pairs, parse_tweets, ParsedTweets};
use crate::model::{
    DateRange, EvolvingMentionNetwork, Snapshot, TweetRecord, UserId, WeightedInteractionGraph,
};
use crate::sparse::SparseMatrix;

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io_at(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io_at(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io_at(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io_at(path, io),
        other => Error::Parse {
            line: 0,
            message: format!("{}: {other:?}", path.display()),
        },
    }
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for r in rows {
        w.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io_at(path, e))
}

fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    if !path.exists() {
        return Err(Error::MissingArtifact(path.to_path_buf()));
    }
    let mut r = csv::Reader::from_reader(open(path)?);
    r.deserialize()
        .map(|row| row.map_err(|e| csv_err(path, e)))
        .collect()
}

pub fn read_tweets(path: &Path, strict: bool) -> Result<ParsedTweets> {
    parse_tweets(open(path)?, strict)
}

pub fn write_tweets(path: &Path, tweets: &[TweetRecord]) -> Result<()> {
    let mut w = create(path)?;
    for t in tweets {
        serde_json::to_writer(&mut w, t)?;
        w.write_all(b"\n").map_err(|e| Error::io_at(path, e))?;
    }
    w.flush().map_err(|e| Error::io_at(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io_at(path, e))?;
    w.flush().map_err(|e| Error::io_at(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    if !path.exists() {
        return Err(Error::MissingArtifact(path.to_path_buf()));
    }
    Ok(serde_json::from_reader(open(path)?)?)
}

/// One user id per line; blank lines and `#` comments are ignored.
pub fn read_user_list(path: &Path) -> Result<BTreeSet<UserId>> {
    let mut out = BTreeSet::new();
    for line in open(path)?.lines() {
        let line = line.map_err(|e| Error::io_at(path, e))?;
        let id = line.trim();
        if !id.is_empty() && !id.starts_with('#') {
            out.insert(UserId::from(id));
        }
    }
    Ok(out)
}

pub fn write_user_list<'a>(path: &Path, users: impl IntoIterator<Item = &'a UserId>) -> Result<()> {
    let mut w = create(path)?;
    for u in users {
        writeln!(w, "{u}").map_err(|e| Error::io_at(path, e))?;
    }
    w.flush().map_err(|e| Error::io_at(path, e))
}

/// Side information needed to rebuild a network from its triplets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkMeta {
    pub window: DateRange,
    pub binary: bool,
    pub users: usize,
}

#[derive(Serialize, Deserialize)]
struct TripletRow {
    day: NaiveDate,
    src: UserId,
    dst: UserId,
    weight: f64,
}

pub const NETWORK_CSV: &str = "network.csv";
pub const NETWORK_USERS: &str = "users.txt";
pub const NETWORK_META: &str = "network_meta.json";

/// Writes `network.csv` (`day,src,dst,weight`), `users.txt` and
/// `network_meta.json` into `dir`.
pub fn write_network(dir: &Path, net: &EvolvingMentionNetwork) -> Result<()> {
    let users = net.users();
    let rows = net.snapshots().iter().flat_map(|s| {
        s.adjacency.triplets().map(move |(i, j, w)| TripletRow {
            day: s.date,
            src: users[i].clone(),
            dst: users[j].clone(),
            weight: w,
        })
    });
    write_rows(&dir.join(NETWORK_CSV), rows)?;
    write_user_list(&dir.join(NETWORK_USERS), users)?;
    let first = net.snapshots().first().map(|s| s.date);
    let last = net.snapshots().last().map(|s| s.date);
    let (Some(start), Some(end)) = (first, last) else {
        return Err(Error::EmptyInput("network without snapshots"));
    };
    write_json(
        &dir.join(NETWORK_META),
        &NetworkMeta {
            window: DateRange::new(start, end)?,
            binary: net.is_binary(),
            users: users.len(),
        },
    )
}

pub fn read_network(dir: &Path) -> Result<EvolvingMentionNetwork> {
    let meta: NetworkMeta = read_json(&dir.join(NETWORK_META))?;
    let users: Vec<UserId> = read_user_list(&dir.join(NETWORK_USERS))?
        .into_iter()
        .collect();
    if users.len() != meta.users {
        return Err(Error::DimensionMismatch {
            expected: meta.users,
            found: users.len(),
        });
    }
    let index = |u: &UserId| {
        users
            .binary_search(u)
            .map_err(|_| Error::UnknownUser(u.0.clone()))
    };
    let mut per_day: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); meta.window.len()];
    for row in read_rows::<TripletRow>(&dir.join(NETWORK_CSV))? {
        let d = meta
            .window
            .day_index(row.day)
            .ok_or_else(|| Error::invalid(format!("day {} outside {}", row.day, meta.window)))?;
        per_day[d].push((index(&row.src)?, index(&row.dst)?, row.weight));
    }
    let n = users.len();
    let snapshots = meta
        .window
        .days()
        .zip(per_day)
        .map(|(date, trip)| {
            Ok(Snapshot {
                date,
                adjacency: SparseMatrix::from_triplets(n, trip)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    EvolvingMentionNetwork::new(users, snapshots, meta.binary)
}

#[derive(Serialize, Deserialize)]
struct GraphRow {
    src: UserId,
    dst: UserId,
    weight: u64,
}

/// Undirected edges as `src,dst,weight`, one row per edge.
pub fn write_graph(path: &Path, g: &WeightedInteractionGraph) -> Result<()> {
    let users = g.users();
    write_rows(
        path,
        g.edges().iter().map(|&(a, b, w)| GraphRow {
            src: users[a].clone(),
            dst: users[b].clone(),
            weight: w,
        }),
    )
}

/// Reads a graph; its users are the edge endpoints plus `extra_users`.
pub fn read_graph(path: &Path, extra_users: &BTreeSet<UserId>) -> Result<WeightedInteractionGraph> {
    let rows: Vec<GraphRow> = read_rows(path)?;
    let mut users: BTreeSet<UserId> = extra_users.clone();
    for r in &rows {
        users.insert(r.src.clone());
        users.insert(r.dst.clone());
    }
    let users: Vec<UserId> = users.into_iter().collect();
    let idx = |u: &UserId| users.binary_search(u).expect("collected above");
    let edges: Vec<_> = rows
        .iter()
        .map(|r| (idx(&r.src), idx(&r.dst), r.weight))
        .collect();
    WeightedInteractionGraph::from_edges(users, edges)
}

/// A row of the communicability score table. `rank` is the 1-based position
/// by broadcast score among eligible users and absent for the others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub user: UserId,
    pub broadcast: f64,
    pub receive: f64,
    pub rank: Option<usize>,
}

pub fn write_scores(path: &Path, rows: &[ScoreRow]) -> Result<()> {
    write_rows(path, rows)
}

pub fn read_scores(path: &Path) -> Result<Vec<ScoreRow>> {
    read_rows(path)
}

/// Eligible users in rank order.
pub fn ranking_from_scores(rows: &[ScoreRow]) -> Vec<UserId> {
    let mut ranked: Vec<(usize, &UserId)> = rows
        .iter()
        .filter_map(|r| r.rank.map(|k| (k, &r.user)))
        .collect();
    ranked.sort();
    ranked.into_iter().map(|(_, u)| u.clone()).collect()
}

/// A scored mention between two users, one per (tweet, mentioned user).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRow {
    pub date: NaiveDate,
    pub src: UserId,
    pub dst: UserId,
    pub mc: Option<i32>,
    pub ss: Option<i32>,
    pub l: Option<f64>,
}

/// Mentions among `users` inside `window`, self-mentions excluded.
pub fn edge_rows(
    tweets: &[TweetRecord],
    users: &BTreeSet<UserId>,
    window: &DateRange,
) -> Vec<EdgeRow> {
    mention_pairs(tweets, Some(users), window)
        .map(|(t, m)| EdgeRow {
            date: t.date(),
            src: t.sender.clone(),
            dst: m.clone(),
            mc: t.scores.mc,
            ss: t.scores.ss,
            l: t.scores.l,
        })
        .collect()
}

pub fn write_edges(path: &Path, rows: &[EdgeRow]) -> Result<()> {
    write_rows(path, rows)
}

pub fn read_edges(path: &Path) -> Result<Vec<EdgeRow>> {
    read_rows(path)
}

/// `date,mean,count`; days without a scored message have an empty mean.
pub fn write_series(path: &Path, series: &[DailySentiment]) -> Result<()> {
    write_rows(path, series)
}

pub fn read_series(path: &Path) -> Result<Vec<DailySentiment>> {
    read_rows(path)
}

#[derive(Serialize, Deserialize)]
struct LogRow {
    step: u64,
    sender: UserId,
    recipient: UserId,
    burst: u32,
    sentiment: f64,
}

/// `step,sender,recipient,burst,sentiment`.
pub fn write_log(path: &Path, log: &MessageLog) -> Result<()> {
    write_rows(
        path,
        log.entries.iter().map(|e| LogRow {
            step: e.step,
            sender: log.users[e.sender].clone(),
            recipient: log.users[e.recipient].clone(),
            burst: e.burst,
            sentiment: e.sentiment,
        }),
    )
}

/// Writes rows of plain values under `header`.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io_at(path, e))
}
