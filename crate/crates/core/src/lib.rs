//! Capacity planning for floating software licenses: pooled blocking,
//! probe timeouts over a shared link, SLA success, and cost optimization
//! between one central pool and per-site pools.

pub mod cli;
pub mod config;
pub mod engset;
pub mod error;
pub mod montecarlo;
pub mod output;
pub mod params;
pub mod planner;
pub mod sla;
pub mod sweep;
pub mod timeout;
pub mod units;

pub use error::{Error, Result};
pub use params::{ChannelParams, CostModel, PoolLayout, Site, SlaTarget, WorkloadParams};
pub use planner::{PlanComparison, PlanResult};
pub use sla::{Architecture, SuccessReport};
