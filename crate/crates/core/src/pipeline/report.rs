use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::stages::{self, CalibrationReport, EnduranceReport};
use crate::calibrate::ScenarioReport;
use crate::error::{Error, Result};
use crate::io;
use crate::model::ScaleKind;
use crate::sentiment::attributes_by_user;

/// Plot-ready tables derived from stage artifacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportKind {
    BroadcastVsSentiment,
    Endurance,
    DailySeries,
    Calibration,
    Scenario,
}

impl ReportKind {
    pub const ALL: [ReportKind; 5] = [
        ReportKind::BroadcastVsSentiment,
        ReportKind::Endurance,
        ReportKind::DailySeries,
        ReportKind::Calibration,
        ReportKind::Scenario,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ReportKind::BroadcastVsSentiment => "broadcast-vs-sentiment",
            ReportKind::Endurance => "endurance",
            ReportKind::DailySeries => "daily-series",
            ReportKind::Calibration => "calibration",
            ReportKind::Scenario => "scenario",
        }
    }
}

impl std::str::FromStr for ReportKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ReportKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown report kind '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub scale: ScaleKind,
    /// Window of the moving averages along the broadcast ranking.
    pub ma_window: usize,
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes the `kind` table(s) from the artifacts in `artifacts` into `out`.
pub fn emit_report(
    kind: ReportKind,
    artifacts: &Path,
    out: &Path,
    o: &ReportOptions,
) -> Result<Vec<PathBuf>> {
    match kind {
        ReportKind::BroadcastVsSentiment => {
            let ranking =
                io::ranking_from_scores(&io::read_scores(&artifacts.join(stages::SCORES))?);
            let edges = io::read_edges(&artifacts.join(stages::EDGES))?;
            let attrs = attributes_by_user(&stages::edge_scores_from_rows(&edges, o.scale));
            let (header, rows) = stages::moving_average_table(&attrs, &ranking, o.ma_window)?;
            let path = out.join("broadcast_vs_sentiment.csv");
            io::write_table(&path, &header, &rows)?;
            Ok(vec![path])
        }
        ReportKind::Endurance => {
            let rep: EnduranceReport = io::read_json(&artifacts.join(stages::ENDURANCE))?;
            let rows: Vec<Vec<String>> = rep
                .communities
                .iter()
                .map(|c| {
                    vec![
                        c.id.to_string(),
                        c.size.to_string(),
                        c.conductance.to_string(),
                        c.weighted_conductance.to_string(),
                        opt(c.mean_internal_sentiment),
                        c.endurance
                            .as_ref()
                            .map_or(String::new(), |e| e.active_a.to_string()),
                        c.endurance
                            .as_ref()
                            .map_or("0".into(), |e| e.active_b.to_string()),
                        opt(c.endurance.as_ref().map(|e| e.user_loss_factor)),
                    ]
                })
                .collect();
            let path = out.join("endurance.csv");
            io::write_table(
                &path,
                &[
                    "community",
                    "size",
                    "conductance",
                    "weighted_conductance",
                    "mean_internal_sentiment",
                    "active_autumn",
                    "active_spring",
                    "user_loss_factor",
                ],
                &rows,
            )?;
            Ok(vec![path])
        }
        ReportKind::DailySeries => {
            let rep: EnduranceReport = io::read_json(&artifacts.join(stages::ENDURANCE))?;
            let mut paths = Vec::new();
            for c in &rep.communities {
                let series = io::read_series(
                    &artifacts
                        .join(stages::SERIES_DIR)
                        .join(format!("{}.csv", c.id)),
                )?;
                let rows: Vec<Vec<String>> = series
                    .iter()
                    .map(|d| {
                        vec![
                            d.date.to_string(),
                            opt(d.mean),
                            d.count.to_string(),
                            u8::from(c.anomalies.contains(&d.date)).to_string(),
                        ]
                    })
                    .collect();
                let path = out.join(format!("daily_series_{}.csv", c.id));
                io::write_table(&path, &["date", "mean", "count", "anomaly"], &rows)?;
                paths.push(path);
            }
            Ok(paths)
        }
        ReportKind::Calibration => {
            let rep: CalibrationReport = io::read_json(&artifacts.join(stages::CALIBRATION))?;
            let rows: Vec<Vec<String>> = rep
                .result
                .stages
                .iter()
                .flat_map(|s| {
                    s.cells.iter().map(move |c| {
                        let p = &c.params;
                        vec![
                            s.stage.to_string(),
                            p.iterations_per_day.to_string(),
                            p.mean_burst_size.to_string(),
                            p.contagion_factor.to_string(),
                            p.reset_probability.to_string(),
                            p.sentiment_noise.to_string(),
                            p.neighbour_threshold.to_string(),
                            c.rho.to_string(),
                        ]
                    })
                })
                .collect();
            let path = out.join("calibration_cells.csv");
            io::write_table(
                &path,
                &[
                    "stage",
                    "iterations_per_day",
                    "mean_burst_size",
                    "contagion_factor",
                    "reset_probability",
                    "sentiment_noise",
                    "neighbour_threshold",
                    "rho",
                ],
                &rows,
            )?;
            Ok(vec![path])
        }
        ReportKind::Scenario => {
            let rep: ScenarioReport = io::read_json(&artifacts.join(stages::SCENARIO))?;
            let rows: Vec<Vec<String>> = rep
                .arms
                .iter()
                .map(|a| {
                    vec![
                        a.arm.clone(),
                        a.activity_mean.to_string(),
                        a.activity_std.to_string(),
                        a.sentiment_mean.to_string(),
                        a.sentiment_std.to_string(),
                    ]
                })
                .collect();
            let path = out.join("scenario.csv");
            io::write_table(
                &path,
                &[
                    "arm",
                    "activity_mean",
                    "activity_std",
                    "sentiment_mean",
                    "sentiment_std",
                ],
                &rows,
            )?;
            Ok(vec![path])
        }
    }
}
