use std::collections::{BTreeSet, HashMap};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{rho_score, Axis, ParamRanges, RhoWeights};
use crate::abm::{build_model, simulate, summarize, GlobalParams, Model, MomentSummary};
use crate::error::{Error, Result};
use crate::model::{DateRange, ScaleKind, TweetRecord, UserId};
use crate::rng::derive_seed;

/// Produces the model to simulate for a set of global parameters.
pub trait ModelBuilder: Sync {
    fn build(&self, globals: &GlobalParams) -> Result<Model>;
}

/// Rebuilds the model from history; the graph and the probabilities depend
/// on the neighbour threshold and the iterations per day, so models are
/// cached per pair of those.
pub struct HistoryModelBuilder<'a> {
    pub tweets: &'a [TweetRecord],
    pub community: &'a BTreeSet<UserId>,
    pub scale: ScaleKind,
    pub window: DateRange,
    cache: Mutex<HashMap<(u32, u64), Model>>,
}

impl<'a> HistoryModelBuilder<'a> {
    pub fn new(
        tweets: &'a [TweetRecord],
        community: &'a BTreeSet<UserId>,
        scale: ScaleKind,
        window: DateRange,
    ) -> Self {
        Self {
            tweets,
            community,
            scale,
            window,
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl ModelBuilder for HistoryModelBuilder<'_> {
    fn build(&self, globals: &GlobalParams) -> Result<Model> {
        let key = (globals.iterations_per_day, globals.neighbour_threshold);
        if let Some(m) = self.cache.lock().expect("cache lock").get(&key) {
            return m.clone().with_globals(*globals);
        }
        let m = build_model(
            self.tweets,
            self.community,
            *globals,
            self.scale,
            &self.window,
        )?;
        self.cache
            .lock()
            .expect("cache lock")
            .insert(key, m.clone());
        Ok(m)
    }
}

/// Keeps the graph and profiles of a given model and only swaps the globals.
pub struct FixedModelBuilder(pub Model);

impl ModelBuilder for FixedModelBuilder {
    fn build(&self, globals: &GlobalParams) -> Result<Model> {
        self.0.clone().with_globals(*globals)
    }
}

/// Mean ρ over `runs` simulations spanning the real data's days. Run `r`
/// uses the seed derived from `(seed, r)` whatever the parameters, so
/// different cells share random numbers.
pub fn evaluate_params(
    builder: &dyn ModelBuilder,
    params: &GlobalParams,
    real: &MomentSummary,
    runs: usize,
    seed: u64,
    weights: &RhoWeights,
) -> Result<f64> {
    if runs == 0 {
        return Err(Error::invalid("runs must be >= 1"));
    }
    let model = builder.build(params)?;
    let scores = (0..runs)
        .into_par_iter()
        .map(|r| {
            let log = simulate(&model, real.days, derive_seed(seed, &[r as u64]))?;
            rho_score(real, &summarize(&log)?, weights)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(scores.iter().sum::<f64>() / runs as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellScore {
    pub params: GlobalParams,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTrace {
    pub stage: usize,
    /// Values searched per parameter, in tie-break order.
    pub grids: Vec<Vec<f64>>,
    pub cells: Vec<CellScore>,
    pub best: CellScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best: GlobalParams,
    pub rho: f64,
    pub stages: Vec<StageTrace>,
}

const DISCRETE: [bool; 6] = [true, false, false, false, false, true];

#[derive(Debug, Clone)]
enum Current {
    List(Vec<f64>),
    Span {
        lo: f64,
        hi: f64,
        points: usize,
        integer: bool,
    },
}

impl Current {
    fn grid(&self) -> Vec<f64> {
        match self {
            Current::List(v) => v.clone(),
            Current::Span {
                lo,
                hi,
                points,
                integer,
            } => {
                let mut g: Vec<f64> = if points <= &1 || lo == hi {
                    vec![*lo]
                } else {
                    // endpoints exactly, interior points without overshoot
                    (0..*points)
                        .map(|i| {
                            if i + 1 == *points {
                                *hi
                            } else {
                                (lo + (hi - lo) * i as f64 / (*points - 1) as f64).min(*hi)
                            }
                        })
                        .collect()
                };
                if *integer {
                    for x in &mut g {
                        *x = x.round();
                    }
                    g.dedup();
                }
                g
            }
        }
    }

    /// The box from the grid neighbour below `best` to the one above.
    fn zoom(&self, grid: &[f64], best: usize) -> Current {
        let lo_i = best.saturating_sub(1);
        let hi_i = (best + 1).min(grid.len() - 1);
        match self {
            Current::List(_) => Current::List(grid[lo_i..=hi_i].to_vec()),
            Current::Span {
                points, integer, ..
            } => Current::Span {
                lo: grid[lo_i],
                hi: grid[hi_i],
                points: *points,
                integer: *integer,
            },
        }
    }
}

fn params_of(v: &[f64; 6]) -> GlobalParams {
    GlobalParams {
        iterations_per_day: v[0].round() as u32,
        mean_burst_size: v[1],
        contagion_factor: v[2],
        reset_probability: v[3],
        sentiment_noise: v[4],
        neighbour_threshold: v[5].round() as u64,
    }
}

/// Zooming grid search minimising `objective`.
///
/// Each stage scores the full product grid and keeps the best cell, ties going
/// to the lexicographically smallest (iterations, burst, contagion, reset,
/// noise, threshold) tuple. The next stage re-grids each parameter between
/// the best value's grid neighbours. Iterations per day and the neighbour
/// threshold freeze once the same value wins two stages in a row.
pub fn grid_search_with<F>(
    ranges: &ParamRanges,
    stages: usize,
    objective: F,
) -> Result<SearchResult>
where
    F: Fn(&GlobalParams) -> Result<f64> + Sync,
{
    ranges.validate()?;
    if stages == 0 {
        return Err(Error::invalid("stages must be >= 1"));
    }
    let mut current: Vec<Current> = ranges
        .axes()
        .iter()
        .zip(DISCRETE)
        .map(|(axis, discrete)| match axis {
            Axis::Values { values } => {
                let mut v = values.clone();
                v.sort_by(f64::total_cmp);
                v.dedup();
                Current::List(v)
            }
            Axis::Range { lo, hi, points } => Current::Span {
                lo: *lo,
                hi: *hi,
                points: *points,
                integer: discrete,
            },
        })
        .collect();
    let mut previous_best: Option<[f64; 6]> = None;
    let mut trace = Vec::with_capacity(stages);

    for stage in 0..stages {
        let grids: Vec<Vec<f64>> = current.iter().map(Current::grid).collect();
        let mut cells: Vec<[f64; 6]> = vec![[0.0; 6]];
        for (d, g) in grids.iter().enumerate() {
            cells = cells
                .into_iter()
                .flat_map(|c| {
                    g.iter().map(move |&x| {
                        let mut c = c;
                        c[d] = x;
                        c
                    })
                })
                .collect();
        }
        if cells.is_empty() {
            return Err(Error::invalid("empty search grid"));
        }
        let scores = cells
            .par_iter()
            .map(|c| objective(&params_of(c)))
            .collect::<Result<Vec<f64>>>()?;
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate() {
            if s < scores[best] {
                best = i;
            }
        }
        let best_cell = cells[best];

        let mut next = Vec::with_capacity(6);
        for d in 0..6 {
            let idx = grids[d]
                .iter()
                .position(|&x| x == best_cell[d])
                .expect("best value is on the grid");
            let stable = previous_best.is_some_and(|p| p[d] == best_cell[d]);
            next.push(if DISCRETE[d] && stable {
                Current::List(vec![best_cell[d]])
            } else {
                current[d].zoom(&grids[d], idx)
            });
        }
        trace.push(StageTrace {
            stage: stage + 1,
            grids,
            cells: cells
                .iter()
                .zip(&scores)
                .map(|(c, &rho)| CellScore {
                    params: params_of(c),
                    rho,
                })
                .collect(),
            best: CellScore {
                params: params_of(&best_cell),
                rho: scores[best],
            },
        });
        previous_best = Some(best_cell);
        current = next;
    }
    let last = trace.last().expect("at least one stage").best.clone();
    Ok(SearchResult {
        best: last.params,
        rho: last.rho,
        stages: trace,
    })
}

/// Calibrates the global parameters against `real` by simulated moments.
pub fn grid_search(
    builder: &dyn ModelBuilder,
    ranges: &ParamRanges,
    real: &MomentSummary,
    stages: usize,
    runs_per_cell: usize,
    seed: u64,
    weights: &RhoWeights,
) -> Result<SearchResult> {
    weights.validate()?;
    grid_search_with(ranges, stages, |p| {
        evaluate_params(builder, p, real, runs_per_cell, seed, weights)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ranges_1d(axis: Axis) -> ParamRanges {
        ParamRanges {
            iterations_per_day: Axis::Values { values: vec![48.0] },
            mean_burst_size: Axis::fixed(2.0),
            contagion_factor: axis,
            reset_probability: Axis::fixed(0.1),
            sentiment_noise: Axis::fixed(1.0),
            neighbour_threshold: Axis::fixed(1.0),
        }
    }

    #[test]
    fn single_cell() {
        let r = ranges_1d(Axis::fixed(0.3));
        let res = grid_search_with(&r, 1, |_| Ok(4.0)).unwrap();
        assert_eq!(res.best.contagion_factor, 0.3);
        assert_eq!(res.rho, 4.0);
        assert_eq!(res.stages[0].cells.len(), 1);
    }

    #[test]
    fn converges_on_convex_objective() {
        let x0 = 0.3217;
        let r = ranges_1d(Axis::range(0.0, 0.5, 5));
        let res = grid_search_with(&r, 5, |p| Ok((p.contagion_factor - x0).abs())).unwrap();
        // final cell width: 0.5/4 halves each stage
        let width = 0.125 / 2f64.powi(4);
        assert!((res.best.contagion_factor - x0).abs() <= width);
        assert!(res.stages.iter().all(|s| s
            .cells
            .iter()
            .all(|c| (0.0..=0.5).contains(&c.params.contagion_factor))));
    }

    #[test]
    fn ties_go_to_smallest_tuple() {
        let r = ranges_1d(Axis::range(0.0, 0.4, 5));
        let res = grid_search_with(&r, 1, |p| {
            Ok(if p.contagion_factor >= 0.2 { 1.0 } else { 2.0 })
        })
        .unwrap();
        assert_eq!(res.best.contagion_factor, 0.2);
    }

    #[test]
    fn discrete_parameters_freeze_after_two_wins() {
        let mut r = ranges_1d(Axis::range(0.0, 0.5, 3));
        r.iterations_per_day = Axis::Values {
            values: vec![24.0, 48.0, 96.0, 192.0],
        };
        r.neighbour_threshold = Axis::range(1.0, 60.0, 5);
        let res = grid_search_with(&r, 4, |p| {
            Ok((f64::from(p.iterations_per_day) - 96.0).abs()
                + (p.neighbour_threshold as f64 - 30.0).abs())
        })
        .unwrap();
        assert_eq!(res.stages[0].grids[0], vec![24.0, 48.0, 96.0, 192.0]);
        assert_eq!(res.stages[1].grids[0], vec![48.0, 96.0, 192.0]);
        assert_eq!(res.stages[2].grids[0], vec![96.0]);
        assert_eq!(res.best.iterations_per_day, 96);
        assert_eq!(res.stages[0].grids[5], vec![1.0, 16.0, 31.0, 45.0, 60.0]);
        assert!(res
            .stages
            .iter()
            .all(|s| s.grids[5].iter().all(|t| t.fract() == 0.0)));
    }
}
