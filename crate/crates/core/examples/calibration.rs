//! Fits the contagion factor and reset probability of a synthetic community
//! by a three-stage zooming grid search over simulated moments.

use std::collections::BTreeSet;

use chrono::NaiveDate;
use moodnet::abm::synthetic::{history, random_model, CommunitySpec};
use moodnet::abm::{summarize_history, GlobalParams};
use moodnet::calibrate::{grid_search, Axis, FixedModelBuilder, ParamRanges, RhoWeights};
use moodnet::{DateRange, ScaleKind, UserId};

fn main() -> moodnet::Result<()> {
    let truth = GlobalParams {
        iterations_per_day: 48,
        contagion_factor: 0.2,
        reset_probability: 0.1,
        sentiment_noise: 1.0,
        ..Default::default()
    };
    let model = random_model(&CommunitySpec::default(), truth, ScaleKind::Mc, 21)?;
    let start = NaiveDate::from_ymd_opt(2015, 3, 1).unwrap();
    let tweets = history(&model, 30, start, 22)?;
    let members: BTreeSet<UserId> = model.users.iter().cloned().collect();
    let real = summarize_history(
        &tweets,
        &members,
        &DateRange::starting(start, 30)?,
        ScaleKind::Mc,
    )?;

    let ranges = ParamRanges {
        iterations_per_day: Axis::Values { values: vec![48.0] },
        mean_burst_size: Axis::fixed(truth.mean_burst_size),
        contagion_factor: Axis::range(0.0, 0.5, 5),
        reset_probability: Axis::range(0.0, 0.5, 5),
        sentiment_noise: Axis::fixed(1.0),
        neighbour_threshold: Axis::fixed(1.0),
    };
    let res = grid_search(
        &FixedModelBuilder(model),
        &ranges,
        &real,
        3,
        10,
        23,
        &RhoWeights::default(),
    )?;
    for s in &res.stages {
        println!(
            "stage {}: contagion grid {:?}, best ({:.3}, {:.3}) rho {:.2}",
            s.stage,
            s.grids[2],
            s.best.params.contagion_factor,
            s.best.params.reset_probability,
            s.best.rho
        );
    }
    println!("generated with (0.200, 0.100)");
    Ok(())
}
