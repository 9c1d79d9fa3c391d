//! End-to-end success probabilities: admitted and never timed out.

use serde::Serialize;

use crate::engset;
use crate::error::{Error, Result};
use crate::params::{ChannelParams, PoolLayout, WorkloadParams};
use crate::timeout;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Centralized,
    Distributed,
}

impl std::fmt::Display for Architecture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Architecture::Centralized => "centralized",
            Architecture::Distributed => "distributed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuccessReport {
    pub architecture: Architecture,
    pub blocking: f64,
    pub timeout: f64,
    pub success: f64,
    /// Set when the central link had no steady state and `q` was taken as 0.
    pub channel_unstable: bool,
}

/// `s_c = (1 - b(L, S)) (1 - p(C))` for one central pool behind the link.
pub fn success_centralized(
    workload: &WorkloadParams,
    channel: &ChannelParams,
    licenses: u32,
    population: u32,
) -> Result<SuccessReport> {
    let blocking = engset::try_blocking_recursive(licenses, population, workload.rho())?;
    let t = timeout::timeout_probability(channel, workload.mu)?;
    Ok(SuccessReport {
        architecture: Architecture::Centralized,
        blocking,
        timeout: t.p,
        success: (1.0 - blocking) * (1.0 - t.p),
        channel_unstable: t.unstable,
    })
}

/// `s_d = 1 - b_d`; local pools see no congestion timeouts.
pub fn success_distributed(workload: &WorkloadParams, layout: &PoolLayout) -> Result<SuccessReport> {
    let blocking = engset::blocking_distributed(layout, workload.rho())?;
    Ok(SuccessReport {
        architecture: Architecture::Distributed,
        blocking,
        timeout: 0.0,
        success: 1.0 - blocking,
        channel_unstable: false,
    })
}

/// Largest timeout probability that still meets `success_min` given blocking `blocking`:
/// `p <= 1 - s / (1 - b)`.
pub fn max_timeout_for_sla(success_min: f64, blocking: f64) -> Result<f64> {
    if !(success_min > 0.0 && success_min < 1.0) {
        return Err(Error::domain(format!(
            "success_min must lie in (0, 1), got {success_min}"
        )));
    }
    if !(0.0..1.0).contains(&blocking) {
        return Err(Error::Infeasible(format!(
            "blocking probability {blocking} leaves no admitted sessions"
        )));
    }
    let admitted = 1.0 - blocking;
    if admitted <= success_min {
        return Err(Error::Infeasible(format!(
            "admission probability {admitted} does not exceed the SLA target {success_min}"
        )));
    }
    Ok(1.0 - success_min / admitted)
}
