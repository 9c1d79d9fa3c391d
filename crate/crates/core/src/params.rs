//! Validated domain parameters.
//!
//! Every type here is an immutable value in internal units (seconds, bits,
//! bits per second, events per second). Constructors check invariants; the
//! analytic modules assume validated inputs.

use serde::Serialize;

use crate::error::{Error, Result};

pub const BITS_PER_MEGABIT: f64 = 1e6;

/// Per-user session workload.
///
/// The target session duration is `Exponential(mu)`; `rho` is derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorkloadParams {
    /// Session request rate per idle user, per second.
    pub lambda: f64,
    /// Session completion rate, per second (reciprocal of mean target duration).
    pub mu: f64,
}

impl WorkloadParams {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::domain(format!("lambda must be > 0, got {lambda}")));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::domain(format!("mu must be > 0, got {mu}")));
        }
        let w = WorkloadParams { lambda, mu };
        if !(w.rho().is_finite() && w.rho() > 0.0) {
            return Err(Error::domain("lambda/mu is not a finite positive ratio"));
        }
        Ok(w)
    }

    /// Builds a workload from the offered load per user and the completion rate.
    pub fn from_rho(rho: f64, mu: f64) -> Result<Self> {
        Self::new(rho * mu, mu)
    }

    pub fn rho(&self) -> f64 {
        self.lambda / self.mu
    }

    pub fn mean_session_duration(&self) -> f64 {
        1.0 / self.mu
    }
}

/// The link between users and a central pool.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelParams {
    /// Installed capacity C0, bits per second.
    pub capacity_base: f64,
    /// Purchased extra capacity C', bits per second.
    pub capacity_extra: f64,
    /// M: packets per bit, so that `M * C` is the service rate in packets per second.
    pub packet_service_factor: f64,
    /// Background packet arrival rate, packets per second.
    pub background_rate: f64,
    /// Probe (state renewal) rate r, per second.
    pub probe_rate: f64,
    /// Timeout detection threshold tau, seconds.
    pub timeout_threshold: f64,
}

impl ChannelParams {
    pub fn new(
        capacity_base: f64,
        capacity_extra: f64,
        packet_service_factor: f64,
        background_rate: f64,
        probe_rate: f64,
        timeout_threshold: f64,
    ) -> Result<Self> {
        let c = ChannelParams {
            capacity_base,
            capacity_extra,
            packet_service_factor,
            background_rate,
            probe_rate,
            timeout_threshold,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, what: &str, v: f64| {
            if ok {
                Ok(())
            } else {
                Err(Error::domain(format!("{what}, got {v}")))
            }
        };
        let finite = |v: f64| v.is_finite();
        check(
            finite(self.capacity_base) && self.capacity_base > 0.0,
            "capacity_base must be > 0",
            self.capacity_base,
        )?;
        check(
            finite(self.capacity_extra) && self.capacity_extra >= 0.0,
            "capacity_extra must be >= 0",
            self.capacity_extra,
        )?;
        check(
            finite(self.packet_service_factor) && self.packet_service_factor > 0.0,
            "packet_service_factor must be > 0",
            self.packet_service_factor,
        )?;
        check(
            finite(self.background_rate) && self.background_rate >= 0.0,
            "background_rate must be >= 0",
            self.background_rate,
        )?;
        check(
            finite(self.probe_rate) && self.probe_rate > 0.0,
            "probe_rate must be > 0",
            self.probe_rate,
        )?;
        check(
            finite(self.timeout_threshold) && self.timeout_threshold > 0.0,
            "timeout_threshold must be > 0",
            self.timeout_threshold,
        )?;
        if self.timeout_threshold >= 1.0 / self.probe_rate {
            return Err(Error::domain(format!(
                "timeout_threshold ({} s) must be shorter than the probe interval ({} s)",
                self.timeout_threshold,
                1.0 / self.probe_rate
            )));
        }
        Ok(())
    }

    /// Total capacity C = C0 + C', bits per second.
    pub fn total_capacity(&self) -> f64 {
        self.capacity_base + self.capacity_extra
    }

    /// Link service rate M*C in packets per second.
    pub fn service_rate(&self) -> f64 {
        self.packet_service_factor * self.total_capacity()
    }

    pub fn probe_interval(&self) -> f64 {
        1.0 / self.probe_rate
    }

    /// Capacity at which the M/M/1 link saturates (M*C = Lambda).
    pub fn stability_boundary(&self) -> f64 {
        self.background_rate / self.packet_service_factor
    }

    pub fn with_capacity_extra(&self, capacity_extra: f64) -> Self {
        ChannelParams {
            capacity_extra,
            ..*self
        }
    }

    /// Same channel with the total capacity set to `capacity`; C' absorbs the difference.
    ///
    /// When `capacity < C0` the base is lowered instead so that C' stays non-negative.
    pub fn with_total_capacity(&self, capacity: f64) -> Self {
        if capacity >= self.capacity_base {
            self.with_capacity_extra(capacity - self.capacity_base)
        } else {
            ChannelParams {
                capacity_base: capacity,
                capacity_extra: 0.0,
                ..*self
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Site {
    pub population: u32,
    pub licenses: u32,
}

/// Users and licenses per site. A single-site layout is the centralized pool.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PoolLayout {
    sites: Vec<Site>,
}

impl PoolLayout {
    pub fn new(sites: Vec<Site>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::domain("a pool layout needs at least one site"));
        }
        if let Some((i, _)) = sites.iter().enumerate().find(|(_, s)| s.population == 0) {
            return Err(Error::domain(format!("site {i} has zero population")));
        }
        Ok(PoolLayout { sites })
    }

    pub fn from_parts(populations: &[u32], licenses: &[u32]) -> Result<Self> {
        if populations.len() != licenses.len() {
            return Err(Error::domain(format!(
                "{} populations but {} license counts",
                populations.len(),
                licenses.len()
            )));
        }
        Self::new(
            populations
                .iter()
                .zip(licenses)
                .map(|(&population, &licenses)| Site {
                    population,
                    licenses,
                })
                .collect(),
        )
    }

    pub fn single(population: u32, licenses: u32) -> Result<Self> {
        Self::new(vec![Site {
            population,
            licenses,
        }])
    }

    /// Splits `population` users and `licenses` licenses across `sites` sites as
    /// evenly as possible; earlier sites receive the floor share.
    pub fn split_evenly(population: u32, licenses: u32, sites: u32) -> Result<Self> {
        if sites == 0 {
            return Err(Error::domain("cannot split across zero sites"));
        }
        let share = |total: u32, i: u32| {
            let lo = total / sites;
            let extra = total % sites;
            // the last `extra` sites get one more
            lo + u32::from(i >= sites - extra)
        };
        Self::new(
            (0..sites)
                .map(|i| Site {
                    population: share(population, i),
                    licenses: share(licenses, i),
                })
                .collect(),
        )
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn population(&self) -> u32 {
        self.sites.iter().map(|s| s.population).sum()
    }

    pub fn licenses(&self) -> u32 {
        self.sites.iter().map(|s| s.licenses).sum()
    }

    pub fn populations(&self) -> Vec<u32> {
        self.sites.iter().map(|s| s.population).collect()
    }
}

/// Objective c = alpha*L + beta*n*C', with C' in Mbps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostModel {
    pub alpha: f64,
    /// Cost per Mbps of extra capacity on one link.
    pub beta: f64,
    pub links_upgraded: u32,
}

impl CostModel {
    pub fn new(alpha: f64, beta: f64, links_upgraded: u32) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::domain(format!("alpha must be >= 0, got {alpha}")));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::domain(format!("beta must be >= 0, got {beta}")));
        }
        if links_upgraded < 1 {
            return Err(Error::domain("links_upgraded must be >= 1"));
        }
        Ok(CostModel {
            alpha,
            beta,
            links_upgraded,
        })
    }

    /// Cost of `licenses` licenses plus `capacity_extra` bits per second on every upgraded link.
    pub fn cost(&self, licenses: u32, capacity_extra: f64) -> f64 {
        self.alpha * f64::from(licenses) + self.bandwidth_coefficient() * capacity_extra / BITS_PER_MEGABIT
    }

    /// beta * n, the price of one extra Mbps across all upgraded links.
    pub fn bandwidth_coefficient(&self) -> f64 {
        self.beta * f64::from(self.links_upgraded)
    }

    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(self.alpha * k, self.beta * k, self.links_upgraded)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlaTarget {
    pub success_min: f64,
}

impl SlaTarget {
    pub fn new(success_min: f64) -> Result<Self> {
        if !(success_min > 0.0 && success_min < 1.0) {
            return Err(Error::domain(format!(
                "success_min must lie in (0, 1), got {success_min}"
            )));
        }
        Ok(SlaTarget { success_min })
    }
}
