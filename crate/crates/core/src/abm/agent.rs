use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

use super::{AgentState, Model, SentimentMode};

/// Messages from one sender to one recipient in a single step. In per-message
/// mode every message is its own emission with `burst == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Emission {
    pub recipient: usize,
    pub burst: u32,
    pub sentiment: f64,
}

fn burst_size<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u32 {
    if mean <= 1.0 {
        return 1;
    }
    let extra: f64 = Poisson::new(mean - 1.0).expect("positive rate").sample(rng);
    1 + extra as u32
}

fn noisy<R: Rng + ?Sized>(current: f64, sd: f64, rng: &mut R) -> f64 {
    if sd == 0.0 {
        current
    } else {
        current + Normal::new(0.0, sd).expect("finite sd").sample(rng)
    }
}

/// What `agent` sends this step given its state. Neighbours are visited in
/// index order; each gets an independent decision.
pub fn agent_act<R: Rng + ?Sized>(
    model: &Model,
    agent: usize,
    state: &AgentState,
    rng: &mut R,
) -> Vec<Emission> {
    let profile = &model.profiles[agent];
    let g = &model.globals;
    let scale = model.sentiment_scale();
    let mut out = Vec::new();
    let initiating = state.recent_senders.is_empty();
    for &nb in &model.neighbours[agent] {
        let p = if initiating {
            profile.p_init
        } else if state.recent_senders.binary_search(&nb).is_ok() {
            profile.p_reply
        } else {
            profile.p_prop
        };
        if !rng.random_bool(p) {
            continue;
        }
        let size = burst_size(g.mean_burst_size, rng);
        match model.sentiment_mode {
            SentimentMode::PerBurst => out.push(Emission {
                recipient: nb,
                burst: size,
                sentiment: scale.clamp(noisy(state.current_sentiment, g.sentiment_noise, rng)),
            }),
            SentimentMode::PerMessage => {
                for _ in 0..size {
                    out.push(Emission {
                        recipient: nb,
                        burst: 1,
                        sentiment: scale.clamp(noisy(
                            state.current_sentiment,
                            g.sentiment_noise,
                            rng,
                        )),
                    });
                }
            }
        }
    }
    out
}

/// Mood update after receiving `received` as `(sender, sentiment, messages)`.
/// A reset (drawn first) returns the agent to its baseline; otherwise every
/// received message shifts the mood by `(S - neutral) * contagion`.
pub fn agent_evolve<R: Rng + ?Sized>(
    model: &Model,
    agent: usize,
    state: &AgentState,
    received: &[(usize, f64, u32)],
    rng: &mut R,
) -> AgentState {
    let profile = &model.profiles[agent];
    let g = &model.globals;
    let reset = match g.reset_probability {
        p if p <= 0.0 => false,
        p if p >= 1.0 => true,
        p => rng.random_bool(p),
    };
    let current_sentiment = if reset {
        profile.baseline_sentiment
    } else {
        state.current_sentiment
            + received
                .iter()
                .map(|&(_, s, k)| (s - profile.neutral_sentiment) * g.contagion_factor * k as f64)
                .sum::<f64>()
    };
    let mut recent_senders: Vec<usize> = received.iter().map(|&(from, _, _)| from).collect();
    recent_senders.sort_unstable();
    recent_senders.dedup();
    AgentState {
        current_sentiment,
        recent_senders,
    }
}
