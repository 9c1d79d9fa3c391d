//! C ABI over the `pooltrade` planner.
//!
//! Every function returns a [`PtStatus`]; results go through out-pointers.
//! On failure a message is kept per thread and read with [`pt_last_error`].
//! Scenarios are opaque handles built from the same TOML text the CLI reads.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use pooltrade::config::RawConfig;
use pooltrade::engset;
use pooltrade::params::PoolLayout;
use pooltrade::planner::{self, PlanResult};
use pooltrade::sla::{self, Architecture};
use pooltrade::timeout;
use pooltrade::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PtStatus {
    Ok = 0,
    Infeasible = 1,
    Domain = 2,
    Unit = 3,
    NullPointer = 4,
    InvalidUtf8 = 5,
    Overflow = 6,
    Panic = 7,
    Config = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PtArchitecture {
    Centralized = 0,
    Distributed = 1,
}

/// Optimal configuration of one architecture. `available` is false when the
/// architecture cannot meet the SLA; the other fields are then zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtPlan {
    pub available: bool,
    pub feasible: bool,
    pub architecture: PtArchitecture,
    pub licenses_total: u32,
    /// Bits per second; 0 for the distributed architecture.
    pub capacity_extra_bps: f64,
    pub cost: f64,
    pub blocking: f64,
    pub timeout: f64,
    pub success: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtPlanComparison {
    pub chosen: PtArchitecture,
    pub centralized: PtPlan,
    pub distributed: PtPlan,
}

/// Opaque parameter set.
pub struct PtScenario {
    raw: RawConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> PtStatus {
    match e {
        Error::Infeasible(_) => PtStatus::Infeasible,
        Error::Domain(_) => PtStatus::Domain,
        Error::Unit { .. } => PtStatus::Unit,
        Error::Overflow { .. } => PtStatus::Overflow,
        Error::Config(_) | Error::Io(_) => PtStatus::Config,
    }
}

fn fail(status: PtStatus, msg: &str) -> PtStatus {
    set_last_error(msg);
    status
}

/// Runs `f`, mapping errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), PtStatus>) -> PtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            PtStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => fail(PtStatus::Panic, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, PtStatus>;
}

impl<T> OrStatus<T> for pooltrade::Result<T> {
    fn or_status(self) -> Result<T, PtStatus> {
        self.map_err(|e| fail(status_of(&e), &e.to_string()))
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), PtStatus> {
    if p.is_null() {
        Err(fail(PtStatus::NullPointer, &format!("`{name}` is null")))
    } else {
        Ok(())
    }
}

/// # Safety
/// `p` must be null or a valid NUL-terminated string.
unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, PtStatus> {
    non_null(p, name)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(PtStatus::InvalidUtf8, &format!("`{name}` is not valid UTF-8")))
}

/// # Safety
/// `p` must be null or point to a live scenario.
unsafe fn scenario<'a>(p: *const PtScenario) -> Result<&'a PtScenario, PtStatus> {
    non_null(p, "scenario")?;
    Ok(&*p)
}

/// # Safety
/// `out` must be null or valid for one write.
unsafe fn write<T>(out: *mut T, v: T) -> Result<(), PtStatus> {
    non_null(out, "out")?;
    out.write(v);
    Ok(())
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn pt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn pt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses flat TOML config text into a new scenario written to `out`.
/// Release it with [`pt_scenario_free`].
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn pt_scenario_from_toml(toml: *const c_char, out: *mut *mut PtScenario) -> PtStatus {
    guard(|| {
        let text = c_str(toml, "toml")?;
        non_null(out, "out")?;
        let raw = RawConfig::from_toml_str(text).or_status()?;
        write(out, Box::into_raw(Box::new(PtScenario { raw })))
    })
}

/// Sets or overrides one key, e.g. `("tau", "10 ms")`.
///
/// # Safety
/// `s` must be a live scenario; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn pt_scenario_set(s: *mut PtScenario, key: *const c_char, value: *const c_char) -> PtStatus {
    guard(|| {
        non_null(s, "scenario")?;
        let (key, value) = (c_str(key, "key")?, c_str(value, "value")?);
        (*s).raw.set(key, value).or_status()
    })
}

/// # Safety
/// `s` must be null or a pointer from [`pt_scenario_from_toml`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pt_scenario_free(s: *mut PtScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Engset blocking via the stable recursion.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn pt_blocking(licenses: u32, population: u32, rho: f64, out: *mut f64) -> PtStatus {
    guard(|| write(out, engset::try_blocking_recursive(licenses, population, rho).or_status()?))
}

/// Engset blocking from the binomial sums; fails with overflow for large populations.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn pt_blocking_direct(licenses: u32, population: u32, rho: f64, out: *mut f64) -> PtStatus {
    guard(|| write(out, engset::blocking_direct(licenses, population, rho).or_status()?))
}

/// Population-weighted blocking of `n` isolated sites.
///
/// # Safety
/// `populations` and `licenses` must each point to `n` values; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn pt_blocking_distributed(
    populations: *const u32,
    licenses: *const u32,
    n: usize,
    rho: f64,
    out: *mut f64,
) -> PtStatus {
    guard(|| {
        non_null(populations, "populations")?;
        non_null(licenses, "licenses")?;
        let pops = std::slice::from_raw_parts(populations, n);
        let lics = std::slice::from_raw_parts(licenses, n);
        let layout = PoolLayout::from_parts(pops, lics).or_status()?;
        write(out, engset::blocking_distributed(&layout, rho).or_status()?)
    })
}

/// Timeout probability at the scenario's link capacity.
///
/// # Safety
/// `s` must be a live scenario; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn pt_timeout_probability(s: *const PtScenario, out: *mut f64) -> PtStatus {
    guard(|| {
        let raw = &scenario(s)?.raw;
        let channel = raw.channel().or_status()?;
        let mu = raw.mu().or_status()?;
        write(out, timeout::timeout_probability(&channel, mu).or_status()?.p)
    })
}

/// Total link capacity, bits per second, at which the timeout probability is `p_target`.
///
/// # Safety
/// `s` must be a live scenario; `out_bps` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn pt_capacity_for_timeout(s: *const PtScenario, p_target: f64, out_bps: *mut f64) -> PtStatus {
    guard(|| {
        let raw = &scenario(s)?.raw;
        let channel = raw.channel().or_status()?;
        let mu = raw.mu().or_status()?;
        write(out_bps, timeout::capacity_for_timeout(p_target, mu, &channel).or_status()?)
    })
}

/// Centralized success with `licenses` licenses shared by the whole population.
///
/// # Safety
/// `s` must be a live scenario; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn pt_success_centralized(s: *const PtScenario, licenses: u32, out: *mut f64) -> PtStatus {
    guard(|| {
        let raw = &scenario(s)?.raw;
        let w = raw.workload().or_status()?;
        let channel = raw.channel().or_status()?;
        let population = raw.total_population().or_status()?;
        write(out, sla::success_centralized(&w, &channel, licenses, population).or_status()?.success)
    })
}

fn to_c(arch: Architecture) -> PtArchitecture {
    match arch {
        Architecture::Centralized => PtArchitecture::Centralized,
        Architecture::Distributed => PtArchitecture::Distributed,
    }
}

fn to_plan(r: Option<&PlanResult>, arch: PtArchitecture) -> PtPlan {
    match r {
        Some(r) => PtPlan {
            available: true,
            feasible: r.feasible,
            architecture: arch,
            licenses_total: r.licenses_total,
            capacity_extra_bps: r.capacity_extra,
            cost: r.cost,
            blocking: r.blocking,
            timeout: r.timeout,
            success: r.achieved_success,
        },
        None => PtPlan {
            available: false,
            feasible: false,
            architecture: arch,
            licenses_total: 0,
            capacity_extra_bps: 0.0,
            cost: 0.0,
            blocking: 0.0,
            timeout: 0.0,
            success: 0.0,
        },
    }
}

/// Optimizes both architectures. The scenario's own `capacity_extra` is ignored.
/// When `pool_licenses` is non-null it receives the distributed per-site split
/// and `pool_len` must equal the number of sites.
///
/// # Safety
/// `s` must be a live scenario, `out` valid for one write, and `pool_licenses`
/// null or valid for `pool_len` writes.
#[no_mangle]
pub unsafe extern "C" fn pt_plan(
    s: *const PtScenario,
    out: *mut PtPlanComparison,
    pool_licenses: *mut u32,
    pool_len: usize,
) -> PtStatus {
    guard(|| {
        let raw = &scenario(s)?.raw;
        non_null(out, "out")?;
        let channel = raw.channel().or_status()?.with_capacity_extra(0.0);
        let populations = raw.populations().or_status()?;
        let cmp = planner::plan(
            &raw.workload().or_status()?,
            &channel,
            &populations,
            &raw.cost().or_status()?,
            &raw.sla().or_status()?,
        )
        .or_status()?;
        if !pool_licenses.is_null() {
            if pool_len != populations.len() {
                return Err(fail(
                    PtStatus::Domain,
                    &format!("pool_len is {pool_len} but the scenario has {} sites", populations.len()),
                ));
            }
            let dst = std::slice::from_raw_parts_mut(pool_licenses, pool_len);
            match &cmp.distributed {
                Some(d) => dst.copy_from_slice(&d.pool_licenses),
                None => dst.fill(0),
            }
        }
        write(
            out,
            PtPlanComparison {
                chosen: to_c(cmp.chosen.architecture),
                centralized: to_plan(cmp.centralized.as_ref(), PtArchitecture::Centralized),
                distributed: to_plan(cmp.distributed.as_ref(), PtArchitecture::Distributed),
            },
        )
    })
}
