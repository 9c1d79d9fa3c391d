//! Minimum-cost provisioning for the centralized and distributed architectures.
//!
//! Centralized: for each license count `L` the timeout budget left by the SLA
//! is `p_max = 1 - s / (1 - b(L, S))`, and the cheapest link meeting it comes
//! straight from the capacity inversion. Scanning `L = 0..=S` is therefore an
//! exact search over the whole feasible region.
//!
//! Distributed: no link upgrade, so only the per-site license split matters.
//! Blocking curves are not convex in `L`, so marginal-gain allocation can
//! overshoot; the split is found by dynamic programming over sites instead.

use serde::Serialize;

use crate::engset;
use crate::error::{Error, Result};
use crate::params::{ChannelParams, CostModel, PoolLayout, SlaTarget, WorkloadParams, BITS_PER_MEGABIT};
use crate::sla::{self, Architecture};
use crate::timeout;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanResult {
    pub architecture: Architecture,
    pub licenses_total: u32,
    /// Per-site licenses; a single entry for the centralized pool.
    pub pool_licenses: Vec<u32>,
    /// Extra link capacity C', bits per second. Always 0 when distributed.
    pub capacity_extra: f64,
    pub cost: f64,
    pub blocking: f64,
    pub timeout: f64,
    pub achieved_success: f64,
    pub feasible: bool,
}

impl PlanResult {
    pub fn capacity_extra_mbps(&self) -> f64 {
        self.capacity_extra / BITS_PER_MEGABIT
    }
}

/// Both optimal arms and the selected one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanComparison {
    pub chosen: PlanResult,
    pub centralized: Option<PlanResult>,
    pub distributed: Option<PlanResult>,
}

/// Smallest extra capacity (bps) at which `licenses` central licenses meet the SLA,
/// or `None` when blocking alone already violates it.
pub fn required_capacity_extra(
    workload: &WorkloadParams,
    channel_base: &ChannelParams,
    licenses: u32,
    population: u32,
    sla: &SlaTarget,
) -> Result<Option<f64>> {
    let blocking = engset::try_blocking_recursive(licenses, population, workload.rho())?;
    let p_max = match sla::max_timeout_for_sla(sla.success_min, blocking) {
        Ok(p) => p,
        Err(Error::Infeasible(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let base = channel_base.with_capacity_extra(0.0);
    let p_base = timeout::timeout_probability(&base, workload.mu)?.p;
    let mut extra = if p_base <= p_max {
        0.0
    } else {
        let needed = timeout::capacity_for_timeout(p_max, workload.mu, &base)?;
        (needed - base.capacity_base).max(0.0)
    };
    // the inversion is exact up to rounding; step up until the product form agrees
    for _ in 0..256 {
        let report = sla::success_centralized(
            workload,
            &base.with_capacity_extra(extra),
            licenses,
            population,
        )?;
        if report.success >= sla.success_min {
            return Ok(Some(extra));
        }
        extra = if extra == 0.0 {
            f64::EPSILON * base.capacity_base
        } else {
            extra + (extra + base.capacity_base) * 4.0 * f64::EPSILON
        };
    }
    Err(Error::domain(format!(
        "capacity inversion did not converge for L = {licenses}"
    )))
}

pub fn optimize_centralized(
    workload: &WorkloadParams,
    channel_base: &ChannelParams,
    population: u32,
    cost: &CostModel,
    sla: &SlaTarget,
) -> Result<PlanResult> {
    let base = channel_base.with_capacity_extra(0.0);
    let mut best: Option<(f64, u32, f64)> = None;
    for licenses in 0..=population {
        let Some(extra) = required_capacity_extra(workload, &base, licenses, population, sla)? else {
            continue;
        };
        let c = cost.cost(licenses, extra);
        let better = match best {
            None => true,
            // ascending L: equal cost keeps the smaller L (then the smaller C')
            Some((best_cost, _, _)) => c < best_cost,
        };
        if better {
            best = Some((c, licenses, extra));
        }
    }
    let (c, licenses, extra) = best.ok_or_else(|| {
        Error::Infeasible("no license count meets the SLA at any capacity".into())
    })?;
    let report = sla::success_centralized(workload, &base.with_capacity_extra(extra), licenses, population)?;
    Ok(PlanResult {
        architecture: Architecture::Centralized,
        licenses_total: licenses,
        pool_licenses: vec![licenses],
        capacity_extra: extra,
        cost: c,
        blocking: report.blocking,
        timeout: report.timeout,
        achieved_success: report.success,
        feasible: report.success >= sla.success_min,
    })
}

fn weighted_blocking(populations: &[u32], curves: &[Vec<f64>], alloc: &[u32], total: f64) -> f64 {
    let mut acc = 0.0;
    for ((&pop, curve), &l) in populations.iter().zip(curves).zip(alloc) {
        acc += f64::from(pop) * curve[l as usize];
    }
    acc / total
}

/// Marginal-gain allocation: one license at a time to the site whose next
/// license removes the most weighted blocking, ties to the lowest index.
/// Only exact when every blocking curve has nonincreasing decrements, which
/// Engset curves do not guarantee at small `L`.
pub fn greedy_allocation(workload: &WorkloadParams, populations: &[u32], sla: &SlaTarget) -> Result<Vec<u32>> {
    PoolLayout::from_parts(populations, &vec![0; populations.len()])?;
    let curves = blocking_curves(populations, workload.rho())?;
    let total = f64::from(populations.iter().sum::<u32>());
    let mut alloc = vec![0u32; populations.len()];
    loop {
        let b = weighted_blocking(populations, &curves, &alloc, total);
        if 1.0 - b >= sla.success_min {
            return Ok(alloc);
        }
        let mut pick: Option<(usize, f64)> = None;
        for (i, (&pop, curve)) in populations.iter().zip(&curves).enumerate() {
            let l = alloc[i] as usize;
            if l >= pop as usize {
                continue;
            }
            let gain = f64::from(pop) * (curve[l] - curve[l + 1]);
            if pick.is_none_or(|(_, g)| gain > g) {
                pick = Some((i, gain));
            }
        }
        match pick {
            Some((i, _)) => alloc[i] += 1,
            None => unreachable!("fully licensed sites have zero blocking"),
        }
    }
}

fn blocking_curves(populations: &[u32], rho: f64) -> Result<Vec<Vec<f64>>> {
    populations.iter().map(|&s| engset::blocking_curve(s, rho)).collect()
}

/// Smallest total split meeting the SLA. `best[k][L]` is the least weighted
/// blocking of sites `k..` holding `L` licenses between them; the first total
/// whose best split is feasible wins. Among optimal splits the least blocking
/// is kept, then the one giving earlier sites more licenses.
fn exact_allocation(populations: &[u32], curves: &[Vec<f64>], success_min: f64) -> Vec<u32> {
    let n = populations.len();
    let total = populations.iter().sum::<u32>() as usize;
    let mut best = vec![vec![f64::INFINITY; total + 1]; n + 1];
    best[n][0] = 0.0;
    for k in (0..n).rev() {
        let pop = populations[k] as usize;
        for l_total in 0..=total {
            let mut m = f64::INFINITY;
            for l in 0..=pop.min(l_total) {
                m = m.min(populations[k] as f64 * curves[k][l] + best[k + 1][l_total - l]);
            }
            best[k][l_total] = m;
        }
    }
    let weight = total as f64;
    for l_total in 0..=total {
        if !best[0][l_total].is_finite() {
            continue;
        }
        let mut alloc = Vec::with_capacity(n);
        let mut left = l_total;
        for k in 0..n {
            let pop = populations[k] as usize;
            let l = (0..=pop.min(left))
                .rev()
                .find(|&l| populations[k] as f64 * curves[k][l] + best[k + 1][left - l] == best[k][left])
                .expect("minimum is attained");
            alloc.push(l as u32);
            left -= l;
        }
        if 1.0 - weighted_blocking(populations, curves, &alloc, weight) >= success_min {
            return alloc;
        }
    }
    populations.to_vec()
}

pub fn optimize_distributed(
    workload: &WorkloadParams,
    populations: &[u32],
    cost: &CostModel,
    sla: &SlaTarget,
) -> Result<PlanResult> {
    // validates populations
    PoolLayout::from_parts(populations, &vec![0; populations.len()])?;
    let curves = blocking_curves(populations, workload.rho())?;
    let alloc = exact_allocation(populations, &curves, sla.success_min);

    let layout = PoolLayout::from_parts(populations, &alloc)?;
    let report = sla::success_distributed(workload, &layout)?;
    let licenses_total = layout.licenses();
    Ok(PlanResult {
        architecture: Architecture::Distributed,
        licenses_total,
        pool_licenses: alloc,
        capacity_extra: 0.0,
        cost: cost.cost(licenses_total, 0.0),
        blocking: report.blocking,
        timeout: 0.0,
        achieved_success: report.success,
        feasible: report.success >= sla.success_min,
    })
}

/// Runs both programs on the same users and keeps the cheaper one; ties go to
/// the distributed layout since it needs no link upgrade.
pub fn plan(
    workload: &WorkloadParams,
    channel_base: &ChannelParams,
    populations: &[u32],
    cost: &CostModel,
    sla: &SlaTarget,
) -> Result<PlanComparison> {
    let population: u32 = populations.iter().sum();
    let keep_infeasible = |r: Result<PlanResult>| match r {
        Ok(p) => Ok(Some(p)),
        Err(Error::Infeasible(_)) => Ok(None),
        Err(e) => Err(e),
    };
    let centralized = keep_infeasible(optimize_centralized(workload, channel_base, population, cost, sla))?;
    let distributed = keep_infeasible(optimize_distributed(workload, populations, cost, sla))?;
    let chosen = match (&centralized, &distributed) {
        (Some(c), Some(d)) => {
            if c.cost < d.cost {
                c.clone()
            } else {
                d.clone()
            }
        }
        (Some(c), None) => c.clone(),
        (None, Some(d)) => d.clone(),
        (None, None) => {
            return Err(Error::Infeasible(
                "neither architecture can meet the SLA".into(),
            ))
        }
    };
    Ok(PlanComparison {
        chosen,
        centralized,
        distributed,
    })
}
