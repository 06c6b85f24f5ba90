//! Louvain modularity optimization (resolution 1): local moves in a seeded
//! random order, then aggregation, until a level makes no move.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use super::{Community, SourceAlgorithm};
use crate::model::WeightedInteractionGraph;
use crate::rng::substream;

/// A node only moves when that raises modularity by more than this.
pub const LOUVAIN_MIN_GAIN: f64 = 1e-9;

struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
}

impl Level {
    fn from_graph(graph: &WeightedInteractionGraph, use_weights: bool) -> Self {
        let adj = (0..graph.len())
            .map(|i| {
                graph
                    .neighbours(i)
                    .iter()
                    .map(|&(j, w)| (j, if use_weights { w as f64 } else { 1.0 }))
                    .collect()
            })
            .collect();
        Self {
            adj,
            self_loops: vec![0.0; graph.len()],
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    fn strength(&self, i: usize) -> f64 {
        self.adj[i].iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * self.self_loops[i]
    }

    /// Local-move phase. Returns the community label of every node and
    /// whether any node moved.
    fn local_moves(&self, rng: &mut crate::rng::SimRng) -> (Vec<usize>, bool) {
        let n = self.len();
        let k: Vec<f64> = (0..n).map(|i| self.strength(i)).collect();
        let m2: f64 = k.iter().sum();
        let mut comm: Vec<usize> = (0..n).collect();
        let mut tot = k.clone();
        let mut moved_any = false;
        if m2 == 0.0 {
            return (comm, false);
        }
        let m = m2 / 2.0;
        let mut order: Vec<usize> = (0..n).collect();
        let mut links: BTreeMap<usize, f64> = BTreeMap::new();
        loop {
            order.shuffle(rng);
            let mut moved = false;
            for &i in &order {
                let ci = comm[i];
                links.clear();
                for &(j, w) in &self.adj[i] {
                    *links.entry(comm[j]).or_default() += w;
                }
                tot[ci] -= k[i];
                let gain = |c: usize, kin: f64| (kin - tot[c] * k[i] / m2) / m;
                let stay = gain(ci, links.get(&ci).copied().unwrap_or(0.0));
                let mut best = (ci, stay);
                for (&c, &kin) in &links {
                    let g = gain(c, kin);
                    if g > best.1 {
                        best = (c, g);
                    }
                }
                let target = if best.0 != ci && best.1 - stay > LOUVAIN_MIN_GAIN {
                    moved = true;
                    best.0
                } else {
                    ci
                };
                comm[i] = target;
                tot[target] += k[i];
            }
            if !moved {
                break;
            }
            moved_any = true;
        }
        (comm, moved_any)
    }

    /// Collapses communities into nodes. `labels` must be dense `0..count`.
    fn aggregate(&self, labels: &[usize], count: usize) -> Self {
        let mut self_loops = vec![0.0; count];
        let mut between: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); count];
        for i in 0..self.len() {
            let ci = labels[i];
            self_loops[ci] += self.self_loops[i];
            for &(j, w) in &self.adj[i] {
                let cj = labels[j];
                if ci == cj {
                    // each internal edge is seen from both endpoints
                    self_loops[ci] += w / 2.0;
                } else {
                    *between[ci].entry(cj).or_default() += w;
                }
            }
        }
        Self {
            adj: between
                .into_iter()
                .map(|m| m.into_iter().collect())
                .collect(),
            self_loops,
        }
    }
}

fn relabel(labels: &mut [usize]) -> usize {
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    // first-seen order keeps labels stable
    let mut next = 0;
    for l in labels.iter_mut() {
        let e = map.entry(*l).or_insert_with(|| {
            next += 1;
            next - 1
        });
        *l = *e;
    }
    next
}

/// Partitions every user of `graph` into communities. The same seed always
/// gives the same partition. Communities are ordered by their smallest user id.
pub fn louvain(graph: &WeightedInteractionGraph, use_weights: bool, seed: u64) -> Vec<Community> {
    let n = graph.len();
    let mut membership: Vec<usize> = (0..n).collect();
    let mut level = Level::from_graph(graph, use_weights);
    let mut rng = substream(seed, &[crate::rng::name_key("louvain")]);
    loop {
        let (mut labels, moved) = level.local_moves(&mut rng);
        if !moved {
            break;
        }
        let count = relabel(&mut labels);
        for m in membership.iter_mut() {
            *m = labels[*m];
        }
        level = level.aggregate(&labels, count);
    }

    let algo = if use_weights {
        SourceAlgorithm::WeightedLouvain
    } else {
        SourceAlgorithm::Louvain
    };
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &c) in membership.iter().enumerate() {
        groups.entry(c).or_default().push(i);
    }
    let mut members: Vec<Vec<crate::model::UserId>> = groups
        .into_values()
        .map(|idx| {
            let mut m: Vec<_> = idx.into_iter().map(|i| graph.users()[i].clone()).collect();
            m.sort();
            m
        })
        .collect();
    members.sort();
    members
        .into_iter()
        .enumerate()
        .map(|(id, members)| Community {
            id,
            source_algorithm: algo,
            members,
        })
        .collect()
}

/// Newman modularity of a labelling (`labels[i]` is node `i`'s community).
/// An edgeless graph has modularity 0.
pub fn modularity(graph: &WeightedInteractionGraph, labels: &[usize], use_weights: bool) -> f64 {
    let w = |x: u64| if use_weights { x as f64 } else { 1.0 };
    let m: f64 = graph.edges().iter().map(|&(_, _, x)| w(x)).sum();
    if m == 0.0 {
        return 0.0;
    }
    let mut internal: BTreeMap<usize, f64> = BTreeMap::new();
    let mut degree: BTreeMap<usize, f64> = BTreeMap::new();
    for &(a, b, x) in graph.edges() {
        if labels[a] == labels[b] {
            *internal.entry(labels[a]).or_default() += w(x);
        }
        *degree.entry(labels[a]).or_default() += w(x);
        *degree.entry(labels[b]).or_default() += w(x);
    }
    degree
        .iter()
        .map(|(c, &d)| internal.get(c).copied().unwrap_or(0.0) / m - (d / (2.0 * m)).powi(2))
        .sum()
}
