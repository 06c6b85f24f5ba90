#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::NaiveDate;
use moodnet::abm::synthetic::{history, random_model, CommunitySpec};
use moodnet::abm::GlobalParams;
use moodnet::model::Snapshot;
use moodnet::sparse::SparseMatrix;
use moodnet::{EvolvingMentionNetwork, ScaleKind, TweetRecord, UserId, WeightedInteractionGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

/// Dense daily adjacency lists: `days[t][i]` = list of `(j, weight)`.
pub type DenseDays = Vec<Vec<Vec<(usize, f64)>>>;

pub fn random_days(
    r: &mut ChaCha8Rng,
    n: usize,
    t: usize,
    density: f64,
    weighted: bool,
) -> DenseDays {
    let mut days = vec![vec![Vec::new(); n]; t];
    for rows in &mut days {
        for (i, row) in rows.iter_mut().enumerate() {
            for j in 0..n {
                if j != i && r.random_bool(density) {
                    let w = if weighted {
                        f64::from(r.random_range(1..4u8))
                    } else {
                        1.0
                    };
                    row.push((j, w));
                }
            }
        }
    }
    days
}

pub fn network_of(days: &DenseDays, n: usize, binary: bool) -> EvolvingMentionNetwork {
    let users: Vec<UserId> = (0..n).map(|i| UserId(format!("u{i}"))).collect();
    let start = date(2014, 10, 9);
    let snaps = days
        .iter()
        .enumerate()
        .map(|(d, rows)| {
            let trip = rows
                .iter()
                .enumerate()
                .flat_map(|(i, r)| r.iter().map(move |&(j, w)| (i, j, w)))
                .collect::<Vec<_>>();
            Snapshot {
                date: start + chrono::Duration::days(d as i64),
                adjacency: SparseMatrix::from_triplets(n, trip).unwrap(),
            }
        })
        .collect();
    EvolvingMentionNetwork::new(users, snaps, binary).unwrap()
}

/// Sum over every walk of at most `k` hops starting at `u` on one day, of
/// `alpha^len` times the product of edge weights, split by end node.
fn day_walks(rows: &[Vec<(usize, f64)>], alpha: f64, k: usize, u: usize, acc: &mut [f64]) {
    fn go(
        rows: &[Vec<(usize, f64)>],
        alpha: f64,
        left: usize,
        at: usize,
        weight: f64,
        acc: &mut [f64],
    ) {
        acc[at] += weight;
        if left == 0 {
            return;
        }
        for &(j, w) in &rows[at] {
            go(rows, alpha, left - 1, j, weight * alpha * w, acc);
        }
    }
    go(rows, alpha, k, u, 1.0, acc);
}

/// Broadcast scores by enumerating time-respecting walks: each day
/// contributes a walk of at most `k` hops continuing from where the
/// previous day's walk ended.
pub fn walk_broadcast(days: &DenseDays, n: usize, alpha: f64, k: usize) -> Vec<f64> {
    // tail[v]: total weight of walk continuations from v over the days
    // after the current one
    let mut tail = vec![1.0; n];
    for rows in days.iter().rev() {
        let mut next = vec![0.0; n];
        for (u, slot) in next.iter_mut().enumerate() {
            let mut ends = vec![0.0; n];
            day_walks(rows, alpha, k, u, &mut ends);
            *slot = ends.iter().zip(&tail).map(|(e, t)| e * t).sum();
        }
        tail = next;
    }
    tail
}

/// Receive scores: walks ending at each node, summed over start nodes.
pub fn walk_receive(days: &DenseDays, n: usize, alpha: f64, k: usize) -> Vec<f64> {
    let mut head = vec![1.0; n];
    for rows in days {
        let mut next = vec![0.0; n];
        for (u, &h) in head.iter().enumerate() {
            let mut ends = vec![0.0; n];
            day_walks(rows, alpha, k, u, &mut ends);
            for (v, e) in ends.into_iter().enumerate() {
                next[v] += h * e;
            }
        }
        head = next;
    }
    head
}

pub fn random_graph(r: &mut ChaCha8Rng, n: usize, p: f64, max_w: u64) -> WeightedInteractionGraph {
    let users: Vec<UserId> = (0..n).map(|i| UserId(format!("v{i:02}"))).collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if r.random_bool(p) {
                edges.push((a, b, r.random_range(1..=max_w)));
            }
        }
    }
    WeightedInteractionGraph::from_edges(users, edges).unwrap()
}

/// Conductance by direct edge counting on the edge list.
pub fn brute_conductance(g: &WeightedInteractionGraph, s: &BTreeSet<usize>, weighted: bool) -> f64 {
    let (mut cut, mut vin, mut vout) = (0.0, 0.0, 0.0);
    for &(a, b, w) in g.edges() {
        let w = if weighted { w as f64 } else { 1.0 };
        let (ia, ib) = (s.contains(&a), s.contains(&b));
        if ia != ib {
            cut += w;
        }
        vin += w * (u8::from(ia) + u8::from(ib)) as f64;
        vout += w * (u8::from(!ia) + u8::from(!ib)) as f64;
    }
    let d = vin.min(vout);
    if d == 0.0 {
        1.0
    } else {
        cut / d
    }
}

/// Newman modularity of a labelling, from the edge list.
pub fn brute_modularity(g: &WeightedInteractionGraph, labels: &[usize], weighted: bool) -> f64 {
    let n = g.len();
    let mut a = vec![vec![0.0; n]; n];
    for &(x, y, w) in g.edges() {
        let w = if weighted { w as f64 } else { 1.0 };
        a[x][y] += w;
        a[y][x] += w;
    }
    let k: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += a[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Every set partition of `0..n` as restricted-growth label vectors.
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(i: usize, n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for l in 0..=max + 1 {
            cur.push(l);
            go(i + 1, n, max.max(l), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return vec![vec![]];
    }
    let mut cur = vec![0];
    go(1, n, 0, &mut cur, &mut out);
    out
}

/// k-clique communities from all k-subsets: cliques sharing k-1 nodes are
/// joined, and each component contributes the union of its cliques.
pub fn brute_kclique(g: &WeightedInteractionGraph, k: usize) -> BTreeSet<BTreeSet<usize>> {
    let n = g.len();
    let adj = |a: usize, b: usize| g.weight(a, b) > 0;
    let mut cliques: Vec<Vec<usize>> = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let nodes: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        if nodes
            .iter()
            .all(|&a| nodes.iter().all(|&b| a == b || adj(a, b)))
        {
            cliques.push(nodes);
        }
    }
    let mut parent: Vec<usize> = (0..cliques.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for i in 0..cliques.len() {
        for j in i + 1..cliques.len() {
            let shared = cliques[i].iter().filter(|x| cliques[j].contains(x)).count();
            if shared == k - 1 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (i, c) in cliques.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().extend(c.iter().copied());
    }
    groups.into_values().collect()
}

/// Two groups of 15 simulated users mentioning each other for 60 days from
/// 2014-10-01, scored on the MC scale.
pub fn fixture_tweets(seed: u64) -> Vec<TweetRecord> {
    let globals = GlobalParams {
        iterations_per_day: 24,
        mean_burst_size: 1.5,
        contagion_factor: 0.05,
        reset_probability: 0.1,
        sentiment_noise: 1.0,
        neighbour_threshold: 1,
    };
    let spec = CommunitySpec {
        agents: 30,
        edge_probability: 0.5,
        groups: 2,
        cross_edge_probability: 0.02,
        p_init: (0.005, 0.02),
        p_reply: (0.05, 0.2),
        ..Default::default()
    };
    let model = random_model(&spec, globals, ScaleKind::Mc, seed).unwrap();
    history(&model, 60, date(2014, 10, 1), seed + 1).unwrap()
}

pub const FULL_CONFIG: &str = r#"
seed = 99
output = "out"
stages = ["ingest", "networks", "communicability", "sent_metrics", "communities",
          "endurance", "model", "simulate", "calibrate", "scenario", "report"]
scale = "mc"
window = "2014-10-01..2014-10-30"

[input]
tweets = "tweets.jsonl"

[networks]
graph_window = "2014-10-01..2014-11-29"

[communicability]
alpha = 0.15
truncation = 6

[sent_metrics]
tops = [5, 10]
n_samples = 500
ma_window = 4

[communities]
method = "louvain"
min_size = 4

[endurance]
period_a = "2014-10-01..2014-10-30"
period_b = "2014-10-31..2014-11-29"
series_window = "2014-10-01..2014-11-29"

[model]
days = 10

[model.globals]
iterations_per_day = 24
mean_burst_size = 1.5
contagion_factor = 0.05
reset_probability = 0.1
sentiment_noise = 1.0
neighbour_threshold = 1

[calibrate]
stages = 2
runs = 2

[calibrate.ranges]
iterations_per_day = { values = [24] }
mean_burst_size = { lo = 1.5, hi = 1.5, points = 1 }
contagion_factor = { lo = 0.0, hi = 0.2, points = 3 }
reset_probability = { lo = 0.1, hi = 0.1, points = 1 }
sentiment_noise = { lo = 1.0, hi = 1.0, points = 1 }
neighbour_threshold = { values = [1, 5] }

[scenario]
days = 10
runs = 6
"#;

/// Writes the fixture tweets and `config` (with `stages` replaced when
/// given) into `dir`, returning the config path.
pub fn write_fixture(dir: &Path, config: &str, stages: Option<&str>) -> std::path::PathBuf {
    moodnet::io::write_tweets(&dir.join("tweets.jsonl"), &fixture_tweets(5)).unwrap();
    let text = match stages {
        None => config.to_string(),
        Some(s) => {
            let start = config.find("stages = [").unwrap();
            let end = start + config[start..].find(']').unwrap() + 1;
            format!("{}stages = {s}{}", &config[..start], &config[end..])
        }
    };
    let path = dir.join("pipeline.toml");
    std::fs::write(&path, text).unwrap();
    path
}

/// Every file under `dir` with its bytes, keyed by relative path.
pub fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(base: &Path, at: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for e in std::fs::read_dir(at).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(base, &p, out);
            } else {
                let rel = p.strip_prefix(base).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}
