//! Where should a newcomer plug in? Compares the four attachment strategies
//! against the unchanged community, with common random numbers across arms.

use moodnet::abm::synthetic::{random_model, CommunitySpec};
use moodnet::abm::GlobalParams;
use moodnet::calibrate::{scenario_compare, Strategy};
use moodnet::ScaleKind;

fn main() -> moodnet::Result<()> {
    let globals = GlobalParams {
        contagion_factor: 0.2,
        reset_probability: 0.1,
        sentiment_noise: 1.0,
        ..Default::default()
    };
    let model = random_model(&CommunitySpec::default(), globals, ScaleKind::Mc, 5)?;
    let report = scenario_compare(&model, &Strategy::ALL, 3.0, 30, 50, 6, true)?;
    println!(
        "{:<16} {:>10} {:>10} {:>10} {:>10}",
        "arm", "activity", "act sd", "sentiment", "sent sd"
    );
    for a in &report.arms {
        println!(
            "{:<16} {:>10.1} {:>10.2} {:>10.3} {:>10.3}",
            a.arm, a.activity_mean, a.activity_std, a.sentiment_mean, a.sentiment_std
        );
    }
    Ok(())
}
