//! Simulated-moments calibration of the global parameters and what-if
//! scenarios for a newly joining user.

mod scenario;
mod search;

use serde::{Deserialize, Serialize};

use crate::abm::MomentSummary;
use crate::error::{Error, Result};
use crate::model::ScaleKind;

pub use scenario::{scenario_compare, scenario_new_user, ArmSummary, ScenarioReport, Strategy};
pub use search::{
    evaluate_params, grid_search, grid_search_with, CellScore, FixedModelBuilder,
    HistoryModelBuilder, ModelBuilder, SearchResult, StageTrace,
};

/// Weights of the four moment gaps in the ρ score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoWeights {
    pub w_count_mean: f64,
    pub w_count_std: f64,
    pub w_sent_mean: f64,
    pub w_sent_std: f64,
}

impl Default for RhoWeights {
    fn default() -> Self {
        Self {
            w_count_mean: 1.0,
            w_count_std: 0.1,
            w_sent_mean: 10.0,
            w_sent_std: 100.0,
        }
    }
}

impl RhoWeights {
    pub fn validate(&self) -> Result<()> {
        let w = [
            self.w_count_mean,
            self.w_count_std,
            self.w_sent_mean,
            self.w_sent_std,
        ];
        if w.iter().any(|x| !(*x >= 0.0 && x.is_finite())) || w.iter().all(|&x| x == 0.0) {
            return Err(Error::invalid("rho weights must be >= 0 and not all zero"));
        }
        Ok(())
    }
}

/// Weighted L1 distance between two moment summaries over the same users.
pub fn rho_score(real: &MomentSummary, sim: &MomentSummary, w: &RhoWeights) -> Result<f64> {
    if real.users != sim.users
        || real.count_mean.len() != real.len()
        || sim.count_mean.len() != sim.len()
        || real.count_std.len() != real.len()
        || sim.count_std.len() != sim.len()
    {
        return Err(Error::MismatchedUsers);
    }
    let mean_gap: f64 = real
        .count_mean
        .iter()
        .zip(&sim.count_mean)
        .map(|(a, b)| (a - b).abs())
        .sum();
    let std_gap: f64 = real
        .count_std
        .iter()
        .zip(&sim.count_std)
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(w.w_count_mean * mean_gap
        + w.w_count_std * std_gap
        + w.w_sent_mean * (real.sentiment_mean - sim.sentiment_mean).abs()
        + w.w_sent_std * (real.sentiment_std - sim.sentiment_std).abs())
}

/// Values searched along one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    /// An explicit list; refining keeps the best value and its list neighbours.
    Values { values: Vec<f64> },
    /// `points` evenly spaced values from `lo` to `hi`.
    Range {
        lo: f64,
        hi: f64,
        #[serde(default = "default_points")]
        points: usize,
    },
}

fn default_points() -> usize {
    5
}

impl Axis {
    pub fn fixed(x: f64) -> Self {
        Axis::Range {
            lo: x,
            hi: x,
            points: 1,
        }
    }

    pub fn range(lo: f64, hi: f64, points: usize) -> Self {
        Axis::Range { lo, hi, points }
    }

    fn validate(&self, name: &str) -> Result<()> {
        let ok = match self {
            Axis::Values { values } => !values.is_empty() && values.iter().all(|v| v.is_finite()),
            Axis::Range { lo, hi, points } => {
                lo.is_finite()
                    && hi.is_finite()
                    && lo <= hi
                    && (*points >= 2 || (lo == hi && *points >= 1))
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("bad search range for {name}")))
        }
    }
}

/// Search ranges for the six global parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRanges {
    pub iterations_per_day: Axis,
    pub mean_burst_size: Axis,
    pub contagion_factor: Axis,
    pub reset_probability: Axis,
    pub sentiment_noise: Axis,
    pub neighbour_threshold: Axis,
}

impl ParamRanges {
    /// The full default search space for `scale`.
    pub fn defaults(scale: ScaleKind) -> Self {
        let noise_hi = match scale {
            ScaleKind::Mc => 2.5,
            ScaleKind::Ss => 1.8,
            ScaleKind::L => 13.0,
        };
        Self {
            iterations_per_day: Axis::Values {
                values: (0..7).map(|m| 24.0 * f64::from(1u32 << m)).collect(),
            },
            mean_burst_size: Axis::range(1.1, 2.8, 5),
            contagion_factor: Axis::range(0.0, 0.5, 5),
            reset_probability: Axis::range(0.0, 0.5, 5),
            sentiment_noise: Axis::range(0.0, noise_hi, 5),
            neighbour_threshold: Axis::range(1.0, 60.0, 5),
        }
    }

    /// Axes in the order used for tie-breaking.
    pub(crate) fn axes(&self) -> [&Axis; 6] {
        [
            &self.iterations_per_day,
            &self.mean_burst_size,
            &self.contagion_factor,
            &self.reset_probability,
            &self.sentiment_noise,
            &self.neighbour_threshold,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let names = [
            "iterations_per_day",
            "mean_burst_size",
            "contagion_factor",
            "reset_probability",
            "sentiment_noise",
            "neighbour_threshold",
        ];
        for (axis, name) in self.axes().into_iter().zip(names) {
            axis.validate(name)?;
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let r: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        r.validate()?;
        Ok(r)
    }
}
