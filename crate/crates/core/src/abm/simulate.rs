use chrono::{Duration, NaiveDate, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use super::{agent_act, agent_evolve, AgentState, Model};
use crate::error::{Error, Result};
use crate::model::{ScaleKind, Scores, TweetRecord, UserId};
use crate::rng::{step_stream, StepRng};

const PHASE_ACT: u64 = 1;
const PHASE_EVOLVE: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub step: u64,
    pub sender: usize,
    pub recipient: usize,
    pub burst: u32,
    pub sentiment: f64,
}

/// Every emission of a run, in step order then sender order.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageLog {
    pub users: Vec<UserId>,
    pub iterations_per_day: u32,
    pub days: usize,
    pub entries: Vec<LogEntry>,
}

impl MessageLog {
    pub fn message_count(&self) -> u64 {
        self.entries.iter().map(|e| u64::from(e.burst)).sum()
    }

    pub fn day_of(&self, step: u64) -> usize {
        (step / u64::from(self.iterations_per_day)) as usize
    }
}

/// Runs `days * iterations_per_day` synchronous steps from the baseline state.
pub fn simulate(model: &Model, days: usize, seed: u64) -> Result<MessageLog> {
    if days == 0 {
        return Err(Error::invalid("simulation needs at least one day"));
    }
    let n = model.len();
    let steps = days as u64 * u64::from(model.globals.iterations_per_day);
    let mut states: Vec<AgentState> = model.profiles.iter().map(AgentState::initial).collect();
    let mut inbox: Vec<Vec<(usize, f64, u32)>> = vec![Vec::new(); n];
    let mut entries = Vec::new();
    let reset = model.globals.reset_probability;
    let needs_evolve_draw = reset > 0.0 && reset < 1.0;
    // stands in when the evolve rule consumes no randomness
    let mut idle = step_stream(seed, &[0]);

    for step in 0..steps {
        for (a, state) in states.iter().enumerate() {
            if model.neighbours[a].is_empty() {
                continue;
            }
            let mut rng = step_stream(seed, &[a as u64, step, PHASE_ACT]);
            for e in agent_act(model, a, state, &mut rng) {
                inbox[e.recipient].push((a, e.sentiment, e.burst));
                entries.push(LogEntry {
                    step,
                    sender: a,
                    recipient: e.recipient,
                    burst: e.burst,
                    sentiment: e.sentiment,
                });
            }
        }
        for (a, state) in states.iter_mut().enumerate() {
            let mut fresh: StepRng;
            let rng = if needs_evolve_draw {
                fresh = step_stream(seed, &[a as u64, step, PHASE_EVOLVE]);
                &mut fresh
            } else {
                &mut idle
            };
            *state = agent_evolve(model, a, state, &inbox[a], rng);
            inbox[a].clear();
        }
    }
    Ok(MessageLog {
        users: model.users.clone(),
        iterations_per_day: model.globals.iterations_per_day,
        days,
        entries,
    })
}

/// Turns a log into tweets starting at `start` (UTC midnight): one tweet per
/// message, stamped at the start of its step and scored on `scale`.
pub fn log_to_tweets(log: &MessageLog, start: NaiveDate, scale: ScaleKind) -> Vec<TweetRecord> {
    let origin = Utc.from_utc_datetime(&start.and_hms_opt(0, 0, 0).expect("midnight"));
    let ipd = u64::from(log.iterations_per_day);
    let mut out = Vec::with_capacity(log.message_count() as usize);
    for e in &log.entries {
        let day = e.step / ipd;
        // first whole second that falls inside this step's window
        let secs = ((e.step % ipd) * 86_400).div_ceil(ipd);
        let timestamp = origin + Duration::days(day as i64) + Duration::seconds(secs as i64);
        let mut scores = Scores::default();
        scores.set(scale, e.sentiment);
        for _ in 0..e.burst {
            out.push(TweetRecord {
                tweet_id: format!("sim-{}", out.len()),
                timestamp,
                sender: log.users[e.sender].clone(),
                mentions: vec![log.users[e.recipient].clone()],
                scores,
            });
        }
    }
    out
}
