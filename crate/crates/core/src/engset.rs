//! Finite-source loss system (Engset) blocking probabilities.
//!
//! `b(L, S)` is call congestion: the probability that a session request from
//! one of `S` homogeneous users finds all `L` licenses busy. An arriving user
//! sees the other `S - 1` users, hence the `C(S-1, i)` binomials.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::PoolLayout;

/// Largest population for which [`blocking_direct`] evaluates binomials exactly.
pub const DIRECT_POPULATION_LIMIT: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Recursive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockingResult {
    pub probability: f64,
    pub method: Method,
}

pub fn blocking(licenses: u32, population: u32, rho: f64, method: Method) -> Result<BlockingResult> {
    let probability = match method {
        Method::Direct => blocking_direct(licenses, population, rho)?,
        Method::Recursive => blocking_recursive(licenses, population, rho),
    };
    Ok(BlockingResult {
        probability,
        method,
    })
}

fn check_inputs(population: u32, rho: f64) -> Result<()> {
    if population == 0 {
        return Err(Error::domain("population must be >= 1"));
    }
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::domain(format!("rho must be > 0, got {rho}")));
    }
    Ok(())
}

/// The Engset formula evaluated term by term with exact integer binomials.
///
/// Kept as a small-instance oracle; production paths use [`blocking_recursive`].
pub fn blocking_direct(licenses: u32, population: u32, rho: f64) -> Result<f64> {
    check_inputs(population, rho)?;
    if population > DIRECT_POPULATION_LIMIT {
        return Err(Error::Overflow {
            population,
            limit: DIRECT_POPULATION_LIMIT,
        });
    }
    if licenses >= population {
        return Ok(0.0);
    }
    let n = u128::from(population - 1);
    let mut binom: u128 = 1;
    let mut power = 1.0;
    let mut denominator = 0.0;
    let mut last_term = 0.0;
    for i in 0..=u128::from(licenses) {
        if let Some(k) = std::num::NonZeroU128::new(i) {
            binom = binom * (n - i + 1) / k;
            power *= rho;
        }
        last_term = binom as f64 * power;
        denominator += last_term;
    }
    Ok(last_term / denominator)
}

/// Numerically stable Engset recursion over the `S - 1` sources an arrival sees:
/// `b(j) = rho (S-j) b(j-1) / (j + rho (S-j) b(j-1))`, `b(0) = 1`.
///
/// Returns exactly 0 for `licenses >= population`. Panics on an invalid
/// population or `rho`; see [`try_blocking_recursive`] for a checked variant.
pub fn blocking_recursive(licenses: u32, population: u32, rho: f64) -> f64 {
    try_blocking_recursive(licenses, population, rho).expect("invalid Engset inputs")
}

pub fn try_blocking_recursive(licenses: u32, population: u32, rho: f64) -> Result<f64> {
    check_inputs(population, rho)?;
    if licenses >= population {
        return Ok(0.0);
    }
    let mut b = 1.0;
    for j in 1..=licenses {
        let a = rho * f64::from(population - j) * b;
        b = a / (f64::from(j) + a);
    }
    Ok(b)
}

/// `b(L, S)` for every `L` in `0..=S`, computed in one pass of the recursion.
pub fn blocking_curve(population: u32, rho: f64) -> Result<Vec<f64>> {
    check_inputs(population, rho)?;
    let mut out = Vec::with_capacity(population as usize + 1);
    let mut b = 1.0;
    out.push(b);
    for j in 1..population {
        let a = rho * f64::from(population - j) * b;
        b = a / (f64::from(j) + a);
        out.push(b);
    }
    out.push(0.0);
    Ok(out)
}

/// Population-weighted blocking of isolated per-site pools (no overflow between sites).
pub fn blocking_distributed(layout: &PoolLayout, rho: f64) -> Result<f64> {
    let mut weighted = 0.0;
    for site in layout.sites() {
        weighted += f64::from(site.population) * try_blocking_recursive(site.licenses, site.population, rho)?;
    }
    Ok(weighted / f64::from(layout.population()))
}

/// Smallest `L` with `b(L, S) <= blocking_max`. Never exceeds `S`.
pub fn min_licenses_for_blocking(population: u32, rho: f64, blocking_max: f64) -> Result<u32> {
    if !(blocking_max > 0.0 && blocking_max < 1.0) {
        return Err(Error::domain(format!(
            "blocking_max must lie in (0, 1), got {blocking_max}"
        )));
    }
    let curve = blocking_curve(population, rho)?;
    Ok(curve
        .iter()
        .position(|&b| b <= blocking_max)
        .expect("b(S, S) = 0 satisfies any positive bound") as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force stationary distribution of the birth-death chain seen by an
    /// arrival (S-1 other sources), solved by detailed balance.
    fn oracle_call_congestion(licenses: u32, population: u32, rho: f64) -> f64 {
        if licenses >= population {
            return 0.0;
        }
        let others = population - 1;
        let mut weights = vec![1.0f64];
        for n in 1..=licenses {
            let prev = weights[n as usize - 1];
            weights.push(prev * rho * f64::from(others - n + 1) / f64::from(n));
        }
        weights[licenses as usize] / weights.iter().sum::<f64>()
    }

    #[test]
    fn hand_evaluated_cases() {
        assert_eq!(blocking_direct(0, 7, 0.3).unwrap(), 1.0);
        assert_eq!(blocking_direct(1, 2, 1.0).unwrap(), 0.5);
        assert_eq!(blocking_direct(2, 3, 1.0).unwrap(), 0.25);
        assert_eq!(blocking_direct(5, 5, 2.0).unwrap(), 0.0);
        assert_eq!(blocking_direct(9, 5, 2.0).unwrap(), 0.0);

        assert_eq!(blocking_recursive(0, 30, 0.8), 1.0);
        assert!((blocking_recursive(2, 3, 1.0) - 0.25).abs() < 1e-15);
        assert_eq!(blocking_recursive(30, 30, 0.8), 0.0);
    }

    #[test]
    fn direct_guards_large_population() {
        assert!(blocking_direct(10, 60, 1.0).is_ok());
        let err = blocking_direct(10, 61, 1.0).unwrap_err();
        assert!(matches!(err, Error::Overflow { population: 61, .. }));
        // the recursion has no such limit
        let b = blocking_recursive(500, 2000, 0.3);
        assert!(b > 0.0 && b < 1.0);
    }

    #[test]
    fn invalid_inputs() {
        assert!(blocking_direct(1, 0, 1.0).is_err());
        assert!(try_blocking_recursive(1, 3, 0.0).is_err());
        assert!(try_blocking_recursive(1, 3, f64::INFINITY).is_err());
        assert!(min_licenses_for_blocking(3, 1.0, 1.0).is_err());
        assert!(min_licenses_for_blocking(3, 1.0, 0.0).is_err());
    }

    #[test]
    fn distributed_examples() {
        let two = PoolLayout::from_parts(&[2, 3], &[1, 2]).unwrap();
        assert!((blocking_distributed(&two, 1.0).unwrap() - 0.35).abs() < 1e-15);

        let equal = PoolLayout::from_parts(&[15, 15], &[7, 7]).unwrap();
        let single = blocking_recursive(7, 15, 0.8);
        assert!((blocking_distributed(&equal, 0.8).unwrap() - single).abs() < 1e-15);

        let one = PoolLayout::single(30, 20).unwrap();
        assert_eq!(
            blocking_distributed(&one, 0.8).unwrap(),
            blocking_recursive(20, 30, 0.8)
        );
    }

    #[test]
    fn min_licenses_examples() {
        // b(1,3,1) = 2/3, b(2,3,1) = 1/4
        assert_eq!(min_licenses_for_blocking(3, 1.0, 0.3).unwrap(), 2);
        assert_eq!(min_licenses_for_blocking(3, 1.0, 0.25).unwrap(), 2);
        // b(1,2,rho) = rho/(1+rho) <= 0.5 for small rho, and b(0,2) = 1 never qualifies
        assert_eq!(min_licenses_for_blocking(2, 1e-6, 0.5).unwrap(), 1);
        assert_eq!(min_licenses_for_blocking(30, 0.8, 1e-300).unwrap(), 30);
    }

    #[test]
    fn curve_matches_pointwise() {
        let curve = blocking_curve(30, 0.8).unwrap();
        assert_eq!(curve.len(), 31);
        for (l, &b) in curve.iter().enumerate() {
            assert_eq!(b, blocking_recursive(l as u32, 30, 0.8));
        }
    }

    #[test]
    fn recursion_matches_brute_force_chain() {
        for s in 1..=40u32 {
            for l in 0..=s {
                for &rho in &[0.05, 0.8, 1.0, 3.0] {
                    let a = blocking_recursive(l, s, rho);
                    let b = oracle_call_congestion(l, s, rho);
                    assert!((a - b).abs() <= 1e-12 * b.max(1e-300) + 1e-300, "L={l} S={s} rho={rho}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn direct_equals_recursive(s in 1u32..=25, l_frac in 0.0f64..=1.0, rho in 0.01f64..5.0) {
            let l = (l_frac * f64::from(s)).round() as u32;
            let d = blocking_direct(l, s, rho).unwrap();
            let r = blocking_recursive(l, s, rho);
            prop_assert!((d - r).abs() <= 1e-10);
        }

        #[test]
        fn decreasing_in_licenses(s in 1u32..=80, rho in 0.01f64..5.0) {
            let curve = blocking_curve(s, rho).unwrap();
            for w in curve.windows(2) {
                prop_assert!(w[1] < w[0]);
            }
        }

        #[test]
        fn nondecreasing_in_rho(s in 1u32..=60, l in 0u32..=60, rho in 0.01f64..5.0, bump in 0.0f64..2.0) {
            let l = l.min(s);
            prop_assert!(blocking_recursive(l, s, rho + bump) >= blocking_recursive(l, s, rho));
        }

        #[test]
        fn pooling_never_hurts(half in 1u32..=30, l_frac in 0.0f64..1.0, rho in 0.05f64..3.0) {
            // uneven splits can beat the pool under population weighting
            let s = 2 * half;
            let l = 2 * ((l_frac * f64::from(half)).floor() as u32).max(1);
            let split = PoolLayout::split_evenly(s, l, 2).unwrap();
            let bd = blocking_distributed(&split, rho).unwrap();
            prop_assert!(bd >= blocking_recursive(l, s, rho));
        }

        #[test]
        fn probability_in_unit_interval(s in 1u32..=500, l in 0u32..=500, rho in 1e-3f64..100.0) {
            let b = blocking_recursive(l, s, rho);
            prop_assert!((0.0..=1.0).contains(&b));
        }
    }
}
