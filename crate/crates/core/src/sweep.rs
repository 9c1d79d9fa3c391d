//! Grid evaluations that regenerate the planning figures as long-format rows.
//!
//! Every cell is a direct call into the analytic modules; rows come back in
//! grid order no matter how many threads evaluated them.

use rayon::prelude::*;
use serde::Serialize;

use crate::engset;
use crate::error::{Error, Result};
use crate::params::{ChannelParams, CostModel, PoolLayout, SlaTarget, WorkloadParams, BITS_PER_MEGABIT};
use crate::planner;
use crate::sla;
use crate::timeout;

/// Inclusive real grid `start, start + step, ..., <= stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        let r = Range { start, stop, step };
        r.validate()?;
        Ok(r)
    }

    fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) {
            return Err(Error::domain("range bounds must be finite"));
        }
        if self.step <= 0.0 {
            return Err(Error::domain(format!("range step must be > 0, got {}", self.step)));
        }
        if self.stop < self.start {
            return Err(Error::domain(format!(
                "empty range: stop {} < start {}",
                self.stop, self.start
            )));
        }
        Ok(())
    }

    /// Grid points, each computed as `start + i * step` so that coarse grids
    /// are exact subsequences of finer ones on shared points.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// Inclusive integer grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IntRange {
    pub start: u32,
    pub stop: u32,
    pub step: u32,
}

impl IntRange {
    pub fn new(start: u32, stop: u32, step: u32) -> Result<Self> {
        if step == 0 {
            return Err(Error::domain("integer range step must be > 0"));
        }
        if stop < start {
            return Err(Error::domain(format!("empty range: stop {stop} < start {start}")));
        }
        Ok(IntRange { start, stop, step })
    }

    pub fn points(&self) -> Vec<u32> {
        (self.start..=self.stop).step_by(self.step as usize).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    BlockingVsLicenses,
    TimeoutVsCapacity,
    TimeoutVsUtilization,
    SuccessSurface,
    CostContours,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::BlockingVsLicenses => "blocking_vs_licenses",
            SweepKind::TimeoutVsCapacity => "timeout_vs_capacity",
            SweepKind::TimeoutVsUtilization => "timeout_vs_utilization",
            SweepKind::SuccessSurface => "success_surface",
            SweepKind::CostContours => "cost_contours",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        [
            SweepKind::BlockingVsLicenses,
            SweepKind::TimeoutVsCapacity,
            SweepKind::TimeoutVsUtilization,
            SweepKind::SuccessSurface,
            SweepKind::CostContours,
        ]
        .into_iter()
        .find(|k| k.as_str() == s.replace('-', "_"))
        .ok_or_else(|| Error::Config(format!("unknown sweep kind `{s}`")))
    }
}

/// One background-load series of the utilization sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoadSeries {
    pub background_rate: f64,
    pub capacity_mbps: Range,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SweepSpec {
    /// Centralized vs equal-split distributed blocking over the license count.
    BlockingVsLicenses {
        population: u32,
        sites: u32,
        rho: f64,
        licenses: IntRange,
    },
    /// Timeout probability over total capacity, one series per threshold.
    TimeoutVsCapacity {
        channel: ChannelParams,
        mu: f64,
        taus: Vec<f64>,
        capacity_mbps: Range,
    },
    /// Timeout probability against background utilization, one series per load.
    TimeoutVsUtilization {
        channel: ChannelParams,
        mu: f64,
        series: Vec<LoadSeries>,
    },
    /// Centralized success over (licenses, capacity).
    SuccessSurface {
        workload: WorkloadParams,
        channel: ChannelParams,
        population: u32,
        licenses: IntRange,
        capacity_mbps: Range,
    },
    /// Cost lines and the two SLA constraint loci in the (L, C) plane.
    CostContours {
        workload: WorkloadParams,
        channel: ChannelParams,
        populations: Vec<u32>,
        cost: CostModel,
        sla: SlaTarget,
        levels: Vec<f64>,
        licenses: IntRange,
        capacity_mbps: Range,
    },
}

impl SweepSpec {
    pub fn kind(&self) -> SweepKind {
        match self {
            SweepSpec::BlockingVsLicenses { .. } => SweepKind::BlockingVsLicenses,
            SweepSpec::TimeoutVsCapacity { .. } => SweepKind::TimeoutVsCapacity,
            SweepSpec::TimeoutVsUtilization { .. } => SweepKind::TimeoutVsUtilization,
            SweepSpec::SuccessSurface { .. } => SweepKind::SuccessSurface,
            SweepSpec::CostContours { .. } => SweepKind::CostContours,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub sweep_kind: SweepKind,
    pub series: String,
    pub x_name: &'static str,
    pub x: f64,
    pub y_name: &'static str,
    pub y: f64,
    /// Cost level, only for cost-line rows of `cost_contours`.
    pub level: Option<f64>,
}

fn row(kind: SweepKind, series: String, x_name: &'static str, x: f64, y_name: &'static str, y: f64) -> Row {
    Row {
        sweep_kind: kind,
        series,
        x_name,
        x,
        y_name,
        y,
        level: None,
    }
}

fn mbps(v: f64) -> f64 {
    v * BITS_PER_MEGABIT
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<Row>> {
    let kind = spec.kind();
    match spec {
        SweepSpec::BlockingVsLicenses {
            population,
            sites,
            rho,
            licenses,
        } => {
            let grid = licenses.points();
            let cells: Vec<(bool, u32)> = [false, true]
                .into_iter()
                .flat_map(|dist| grid.iter().map(move |&l| (dist, l)))
                .collect();
            cells
                .par_iter()
                .map(|&(dist, l)| {
                    let (series, y) = if dist {
                        let layout = PoolLayout::split_evenly(*population, l, *sites)?;
                        ("distributed", engset::blocking_distributed(&layout, *rho)?)
                    } else {
                        ("centralized", engset::try_blocking_recursive(l, *population, *rho)?)
                    };
                    Ok(row(kind, series.into(), "licenses", f64::from(l), "blocking", y))
                })
                .collect()
        }
        SweepSpec::TimeoutVsCapacity {
            channel,
            mu,
            taus,
            capacity_mbps,
        } => {
            capacity_mbps.validate()?;
            let cells: Vec<(f64, f64)> = taus
                .iter()
                .flat_map(|&tau| capacity_mbps.points().into_iter().map(move |c| (tau, c)))
                .collect();
            cells
                .par_iter()
                .map(|&(tau, c)| {
                    let ch = ChannelParams {
                        timeout_threshold: tau,
                        ..channel.with_total_capacity(mbps(c))
                    };
                    ch.validate()?;
                    let p = timeout::timeout_probability(&ch, *mu)?.p;
                    Ok(row(kind, format!("tau_s={tau}"), "capacity_mbps", c, "timeout", p))
                })
                .collect()
        }
        SweepSpec::TimeoutVsUtilization {
            channel,
            mu,
            series,
        } => {
            let mut cells = Vec::new();
            for s in series {
                s.capacity_mbps.validate()?;
                cells.extend(s.capacity_mbps.points().into_iter().map(|c| (s.background_rate, c)));
            }
            cells
                .par_iter()
                .map(|&(lambda, c)| {
                    let ch = ChannelParams {
                        background_rate: lambda,
                        ..channel.with_total_capacity(mbps(c))
                    };
                    ch.validate()?;
                    let p = timeout::timeout_probability(&ch, *mu)?.p;
                    Ok(row(
                        kind,
                        format!("background_pkt_s={lambda}"),
                        "utilization",
                        timeout::utilization(&ch),
                        "timeout",
                        p,
                    ))
                })
                .collect()
        }
        SweepSpec::SuccessSurface {
            workload,
            channel,
            population,
            licenses,
            capacity_mbps,
        } => {
            capacity_mbps.validate()?;
            let cells: Vec<(f64, u32)> = capacity_mbps
                .points()
                .into_iter()
                .flat_map(|c| licenses.points().into_iter().map(move |l| (c, l)))
                .collect();
            cells
                .par_iter()
                .map(|&(c, l)| {
                    let r = sla::success_centralized(workload, &channel.with_total_capacity(mbps(c)), l, *population)?;
                    Ok(row(kind, format!("capacity_mbps={c}"), "licenses", f64::from(l), "success", r.success))
                })
                .collect()
        }
        SweepSpec::CostContours {
            workload,
            channel,
            populations,
            cost,
            sla,
            levels,
            licenses,
            capacity_mbps,
        } => cost_contours(workload, channel, populations, cost, sla, levels, licenses, capacity_mbps),
    }
}

#[allow(clippy::too_many_arguments)]
fn cost_contours(
    workload: &WorkloadParams,
    channel: &ChannelParams,
    populations: &[u32],
    cost: &CostModel,
    sla: &SlaTarget,
    levels: &[f64],
    licenses: &IntRange,
    capacity_mbps: &Range,
) -> Result<Vec<Row>> {
    capacity_mbps.validate()?;
    let kind = SweepKind::CostContours;
    let base = channel.with_capacity_extra(0.0);
    let c0 = base.capacity_base / BITS_PER_MEGABIT;
    let coef = cost.bandwidth_coefficient();
    let mut rows = Vec::new();

    // c = alpha L + beta n (C - C0)
    for &level in levels {
        if coef > 0.0 {
            for l in licenses.points() {
                let extra = (level - cost.alpha * f64::from(l)) / coef;
                if extra >= 0.0 {
                    rows.push(Row {
                        level: Some(level),
                        ..row(kind, "cost_line".into(), "licenses", f64::from(l), "capacity_mbps", c0 + extra)
                    });
                }
            }
        } else if cost.alpha > 0.0 {
            // bandwidth is free: the line is vertical at L = level / alpha
            for c in capacity_mbps.points() {
                rows.push(Row {
                    level: Some(level),
                    ..row(kind, "cost_line".into(), "licenses", level / cost.alpha, "capacity_mbps", c)
                });
            }
        }
    }

    let population: u32 = populations.iter().sum();
    let rho = workload.rho();
    let centralized: Vec<Option<Row>> = licenses
        .points()
        .par_iter()
        .map(|&l| {
            let b = engset::try_blocking_recursive(l, population, rho)?;
            let Ok(p_max) = sla::max_timeout_for_sla(sla.success_min, b) else {
                return Ok(None);
            };
            // outside the attainable range there is no capacity on the locus
            let Ok(c) = timeout::capacity_for_timeout(p_max, workload.mu, &base) else {
                return Ok(None);
            };
            Ok(Some(row(kind, "sc_constraint".into(), "licenses", f64::from(l), "capacity_mbps", c / BITS_PER_MEGABIT)))
        })
        .collect::<Result<_>>()?;
    rows.extend(centralized.into_iter().flatten());

    let distributed = planner::optimize_distributed(workload, populations, cost, sla)?;
    for c in capacity_mbps.points() {
        rows.push(row(
            kind,
            "sd_constraint".into(),
            "licenses",
            f64::from(distributed.licenses_total),
            "capacity_mbps",
            c,
        ));
    }
    Ok(rows)
}
