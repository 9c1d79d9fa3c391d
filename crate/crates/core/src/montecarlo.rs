//! Stochastic cross-checks for the analytic results.
//!
//! Replications are independent and each draws from its own ChaCha8 stream,
//! so results depend only on `(seed, config)`, never on thread count or
//! scheduling. Estimates pool replication means with a normal-approximation
//! 99% confidence interval.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{ChannelParams, WorkloadParams};
use crate::timeout::sojourn_rate;

/// Recorded in run manifests so other implementations can reproduce a run.
pub const RNG_ALGORITHM: &str =
    "ChaCha8 (rand_chacha 0.9); key = seed_from_u64(seed); stream = (component << 32) | replication";

/// Two-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_901;

const ENGSET_STREAM: u64 = 1;
const TIMEOUT_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub seed: u64,
    pub replications: u32,
    /// Arrival events (loss system) or sessions (timeout process) per replication.
    pub horizon: u64,
    /// Leading fraction of each loss-system replication that is discarded.
    pub warmup_fraction: f64,
}

impl SimConfig {
    pub fn new(seed: u64, replications: u32, horizon: u64) -> Result<Self> {
        let cfg = SimConfig {
            seed,
            replications,
            horizon,
            warmup_fraction: 0.1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_warmup(self, warmup_fraction: f64) -> Result<Self> {
        let cfg = SimConfig {
            warmup_fraction,
            ..self
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return Err(Error::domain("replications must be >= 1"));
        }
        if self.horizon < 1 {
            return Err(Error::domain("horizon must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(Error::domain(format!(
                "warmup_fraction must lie in [0, 1), got {}",
                self.warmup_fraction
            )));
        }
        Ok(())
    }

    fn rng(&self, component: u64, replication: u32) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((component << 32) | u64::from(replication));
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimEstimate {
    pub mean: f64,
    /// Infinite when only one replication was run.
    pub ci99_halfwidth: f64,
    /// Observations counted across all replications.
    pub samples: u64,
    pub replications: u32,
}

impl SimEstimate {
    /// Pools per-replication means (all replications carry equal weight).
    pub fn from_replications(means: &[f64], samples: u64) -> Self {
        let r = means.len();
        let mean = means.iter().sum::<f64>() / r as f64;
        let ci99_halfwidth = if r < 2 {
            f64::INFINITY
        } else {
            let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (r - 1) as f64;
            Z_99 * (var / r as f64).sqrt()
        };
        SimEstimate {
            mean,
            ci99_halfwidth,
            samples,
            replications: r as u32,
        }
    }

    pub fn covers(&self, value: f64) -> bool {
        (self.mean - value).abs() <= self.ci99_halfwidth
    }
}

/// What to do when the central link has no steady state (`M C <= Lambda`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UnstableLink {
    Reject,
    /// Use the q = 0 limit: every probe misses its deadline.
    AllProbesFail,
}

struct Counts {
    hits: u64,
    trials: u64,
}

impl Counts {
    fn ratio(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.hits as f64 / self.trials as f64
        }
    }
}

/// One loss-system replication: `(blocked, counted arrivals)`.
///
/// Holding times do not change which state an arrival sees, so only the jump
/// chain is simulated: from `n` active sessions the next event is an arrival
/// with probability `(S-n) lambda / ((S-n) lambda + n mu)`.
fn engset_replication(
    population: u32,
    licenses: u32,
    workload: &WorkloadParams,
    cfg: &SimConfig,
    rng: &mut ChaCha8Rng,
) -> Counts {
    let warmup = (cfg.warmup_fraction * cfg.horizon as f64).floor() as u64;
    let mut active = 0u32;
    let mut seen = 0u64;
    let mut counts = Counts { hits: 0, trials: 0 };
    while seen < cfg.horizon {
        let arrival_rate = f64::from(population - active) * workload.lambda;
        let departure_rate = f64::from(active) * workload.mu;
        let u: f64 = rng.random::<f64>() * (arrival_rate + departure_rate);
        if u < arrival_rate {
            seen += 1;
            let counted = seen > warmup;
            if active >= licenses {
                // lost call cleared: the user goes back to idle
                counts.hits += u64::from(counted);
            } else {
                active += 1;
            }
            counts.trials += u64::from(counted);
        } else {
            active -= 1;
        }
    }
    counts
}

/// Estimates call congestion of a finite-source loss system with `licenses` servers.
pub fn simulate_engset(
    population: u32,
    licenses: u32,
    workload: &WorkloadParams,
    cfg: &SimConfig,
) -> Result<SimEstimate> {
    cfg.validate()?;
    if population == 0 {
        return Err(Error::domain("population must be >= 1"));
    }
    let per_rep: Vec<Counts> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = cfg.rng(ENGSET_STREAM, rep);
            engset_replication(population, licenses, workload, cfg, &mut rng)
        })
        .collect();
    let means: Vec<f64> = per_rep.iter().map(Counts::ratio).collect();
    Ok(SimEstimate::from_replications(
        &means,
        per_rep.iter().map(|c| c.trials).sum(),
    ))
}

/// One timeout replication: `(timed-out sessions, sessions)`.
fn timeout_replication(
    session_length: &Exp<f64>,
    probe_delay: Option<&Exp<f64>>,
    channel: &ChannelParams,
    sessions: u64,
    rng: &mut ChaCha8Rng,
) -> Counts {
    let interval = channel.probe_interval();
    let tau = channel.timeout_threshold;
    let mut hits = 0u64;
    for _ in 0..sessions {
        let target = session_length.sample(rng);
        let mut k = 1u64;
        loop {
            let probe_time = k as f64 * interval;
            if probe_time >= target {
                break;
            }
            let failed = match probe_delay {
                Some(delay) => delay.sample(rng) > tau,
                None => true,
            };
            if failed {
                hits += 1;
                break;
            }
            k += 1;
        }
    }
    Counts {
        hits,
        trials: sessions,
    }
}

fn probe_delay_distribution(channel: &ChannelParams, unstable: UnstableLink) -> Result<Option<Exp<f64>>> {
    let rate = sojourn_rate(channel);
    if rate > 0.0 {
        return Exp::new(rate)
            .map(Some)
            .map_err(|e| Error::domain(format!("probe delay rate {rate}: {e}")));
    }
    match unstable {
        UnstableLink::AllProbesFail => Ok(None),
        UnstableLink::Reject => Err(Error::domain(format!(
            "link is unstable (M*C = {} <= Lambda = {}); opt into the q = 0 limit to simulate it",
            channel.service_rate(),
            channel.background_rate
        ))),
    }
}

fn session_distribution(mu: f64) -> Result<Exp<f64>> {
    Exp::new(mu).map_err(|e| Error::domain(format!("session rate {mu}: {e}")))
}

/// Estimates the fraction of sessions torn down by a late probe.
///
/// Each session draws `T ~ Exp(mu)` and probes at `k / r`, `k >= 1`; each
/// probe's delay is an independent M/M/1 sojourn time `Exp(M C - Lambda)`.
/// The session times out when a probe sent before `T` takes longer than `tau`.
pub fn simulate_timeout(
    channel: &ChannelParams,
    mu: f64,
    cfg: &SimConfig,
    unstable: UnstableLink,
) -> Result<SimEstimate> {
    cfg.validate()?;
    let delay = probe_delay_distribution(channel, unstable)?;
    let length = session_distribution(mu)?;
    let per_rep: Vec<Counts> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = cfg.rng(TIMEOUT_STREAM, rep);
            timeout_replication(&length, delay.as_ref(), channel, cfg.horizon, &mut rng)
        })
        .collect();
    let means: Vec<f64> = per_rep.iter().map(Counts::ratio).collect();
    Ok(SimEstimate::from_replications(
        &means,
        per_rep.iter().map(|c| c.trials).sum(),
    ))
}

/// Estimates `(admitted fraction) * (admitted sessions without timeout)` by
/// running both simulations in every replication and multiplying their rates.
pub fn simulate_success_centralized(
    workload: &WorkloadParams,
    channel: &ChannelParams,
    licenses: u32,
    population: u32,
    cfg: &SimConfig,
    unstable: UnstableLink,
) -> Result<SimEstimate> {
    cfg.validate()?;
    if population == 0 {
        return Err(Error::domain("population must be >= 1"));
    }
    let delay = probe_delay_distribution(channel, unstable)?;
    let length = session_distribution(workload.mu)?;
    let per_rep: Vec<(f64, u64)> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = cfg.rng(ENGSET_STREAM, rep);
            let blocked = engset_replication(population, licenses, workload, cfg, &mut rng);
            let mut rng = cfg.rng(TIMEOUT_STREAM, rep);
            let timed_out = timeout_replication(&length, delay.as_ref(), channel, cfg.horizon, &mut rng);
            (
                (1.0 - blocked.ratio()) * (1.0 - timed_out.ratio()),
                blocked.trials,
            )
        })
        .collect();
    let means: Vec<f64> = per_rep.iter().map(|r| r.0).collect();
    Ok(SimEstimate::from_replications(
        &means,
        per_rep.iter().map(|r| r.1).sum(),
    ))
}
