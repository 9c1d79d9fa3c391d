//! Congestion-induced timeouts of soft-state sessions.
//!
//! A session with target duration `T ~ Exp(mu)` sends a renewal probe every
//! `1/r` seconds. A probe fails when its M/M/1 sojourn time on the central
//! link exceeds `tau`, which happens with probability `1 - q`,
//! `q = 1 - exp(-(M C - Lambda) tau)`. The number of successful probes before
//! the first failure is geometric, so the time to timeout `D` is a sum of
//! constant `1/r` intervals and the timeout probability is
//! `p = P(T > D) = D*(mu)`.
//!
//! Probe traffic itself is assumed negligible next to the background load.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ChannelParams;

/// Single-probe success probability and whether the link was unstable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeSuccess {
    pub q: f64,
    /// `M C <= Lambda`: no steady state exists, `q` is reported as 0.
    pub unstable: bool,
}

/// Geometric probe process feeding the time-to-timeout transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeModel {
    pub q: f64,
    /// `1 - q`, kept separately so that tiny failure probabilities survive.
    failure: f64,
    pub probe_rate: f64,
    pub mu: f64,
}

impl ProbeModel {
    pub fn new(q: f64, probe_rate: f64, mu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::domain(format!("q must lie in [0, 1], got {q}")));
        }
        Self::with_failure(1.0 - q, probe_rate, mu)
    }

    fn with_failure(failure: f64, probe_rate: f64, mu: f64) -> Result<Self> {
        if !(probe_rate.is_finite() && probe_rate > 0.0) {
            return Err(Error::domain("probe_rate must be > 0"));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::domain("mu must be > 0"));
        }
        Ok(ProbeModel {
            q: 1.0 - failure,
            failure,
            probe_rate,
            mu,
        })
    }

    pub fn from_channel(channel: &ChannelParams, mu: f64) -> Result<Self> {
        Self::with_failure(probe_failure(channel), channel.probe_rate, mu)
    }

    pub fn failure_probability(&self) -> f64 {
        self.failure
    }

    /// `P(N = n) = q^n (1 - q)`: probes that succeed before the first failure.
    pub fn probe_count_pmf(&self, n: u32) -> f64 {
        self.q.powi(n as i32) * self.failure
    }

    /// Mean time until a probe fails, `E[D] = 1 / (r (1 - q))`.
    pub fn mean_time_to_timeout(&self) -> f64 {
        1.0 / (self.probe_rate * self.failure)
    }
}

/// Departure rate minus arrival rate, `M C - Lambda`, in packets per second.
pub fn sojourn_rate(channel: &ChannelParams) -> f64 {
    channel.service_rate() - channel.background_rate
}

fn probe_failure(channel: &ChannelParams) -> f64 {
    let rate = sojourn_rate(channel);
    if rate <= 0.0 {
        1.0
    } else {
        (-rate * channel.timeout_threshold).exp()
    }
}

/// Probability that one renewal probe crosses the link within `tau`.
pub fn probe_success(channel: &ChannelParams) -> ProbeSuccess {
    let rate = sojourn_rate(channel);
    if rate <= 0.0 {
        return ProbeSuccess {
            q: 0.0,
            unstable: true,
        };
    }
    ProbeSuccess {
        q: -(-rate * channel.timeout_threshold).exp_m1(),
        unstable: false,
    }
}

/// Laplace transform of the time to timeout,
/// `D*(s) = e^{-s/r} (1 - q) / (1 - e^{-s/r} q)`.
pub fn timeout_laplace(model: &ProbeModel, s: f64) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::domain(format!("transform argument must be >= 0, got {s}")));
    }
    let f = model.failure;
    if f == 0.0 {
        if s == 0.0 {
            return Err(Error::domain(
                "q = 1: time to timeout is almost surely infinite, transform undefined at s = 0",
            ));
        }
        return Ok(0.0);
    }
    let y = s / model.probe_rate;
    let z = (-y).exp();
    // 1 - z q = (1 - z) + z (1 - q)
    Ok(z * f / (-(-y).exp_m1() + z * f))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeoutOutcome {
    pub p: f64,
    pub q: f64,
    pub unstable: bool,
}

/// Probability that a session is torn down by a failed probe before its target duration ends.
pub fn timeout_probability(channel: &ChannelParams, mu: f64) -> Result<TimeoutOutcome> {
    let probe = probe_success(channel);
    let model = ProbeModel::from_channel(channel, mu)?;
    let p = if model.failure == 1.0 {
        // no successful probe: timeout iff the session outlives the first interval
        (-mu / channel.probe_rate).exp()
    } else {
        timeout_laplace(&model, mu)?
    };
    Ok(TimeoutOutcome {
        p,
        q: probe.q,
        unstable: probe.unstable,
    })
}

/// Largest timeout probability any capacity can produce, `e^{-mu/r}` (reached when q = 0).
pub fn max_timeout_probability(mu: f64, probe_rate: f64) -> f64 {
    (-mu / probe_rate).exp()
}

/// Total capacity (bits per second) at which the timeout probability equals `p_target`.
///
/// Inverts the closed form: `C = (Lambda + ln((1-p) / (p (e^{mu/r} - 1))) / tau) / M`.
/// Only the channel's link and probe parameters are used; its capacity is ignored.
pub fn capacity_for_timeout(p_target: f64, mu: f64, channel: &ChannelParams) -> Result<f64> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::domain("mu must be > 0"));
    }
    let ceiling = max_timeout_probability(mu, channel.probe_rate);
    if p_target.is_nan() || p_target <= 0.0 {
        return Err(Error::domain(format!(
            "timeout target {p_target} needs infinite capacity"
        )));
    }
    if p_target >= ceiling {
        return Err(Error::domain(format!(
            "timeout target {p_target} is not below e^(-mu/r) = {ceiling}; no stable capacity yields it"
        )));
    }
    let log_arg = (-p_target).ln_1p() - p_target.ln() - (mu / channel.probe_rate).exp_m1().ln();
    Ok((channel.background_rate + log_arg / channel.timeout_threshold) / channel.packet_service_factor)
}

/// Background utilization of the link, `Lambda / (M C)`.
pub fn utilization(channel: &ChannelParams) -> f64 {
    channel.background_rate / channel.service_rate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MU: f64 = 1.0 / 28800.0;

    fn paper(capacity: f64, tau: f64) -> ChannelParams {
        ChannelParams::new(10e6, 0.0, 1e-4, 900.0, 1.0 / 120.0, tau)
            .unwrap()
            .with_total_capacity(capacity)
    }

    /// Direct summation of P(T > D) over the geometric probe count:
    /// sum_n q^n (1-q) e^{-mu (n+1)/r}.
    fn oracle_series(q: f64, mu: f64, r: f64) -> f64 {
        let z = (-mu / r).exp();
        let mut total = 0.0;
        let mut term = (1.0 - q) * z;
        for _ in 0..2_000_000 {
            total += term;
            term *= q * z;
            if term < 1e-30 {
                break;
            }
        }
        total
    }

    #[test]
    fn q_at_paper_parameters() {
        let q = probe_success(&paper(10e6, 0.01));
        assert!(!q.unstable);
        assert!((q.q - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((q.q - 0.632121).abs() < 1e-6);
    }

    #[test]
    fn boundary_and_unstable_give_zero_q() {
        let at = probe_success(&paper(9e6, 0.01));
        assert_eq!(at.q, 0.0);
        assert!(at.unstable);
        let below = timeout_probability(&paper(5e6, 0.01), MU).unwrap();
        assert!(below.unstable);
        assert_eq!(below.p, (-MU * 120.0).exp());
    }

    #[test]
    fn q_grows_with_tau() {
        let mut last = 0.0;
        for k in [1.0, 10.0, 100.0, 1000.0] {
            let q = probe_success(&ChannelParams { timeout_threshold: 1e-5 * k, ..paper(10e6, 0.01) }).q;
            assert!(q > last);
            last = q;
        }
        // (MC - Lambda) tau = 100 * 0.01
        assert!((last - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn laplace_examples() {
        let r = 2.0;
        let m0 = ProbeModel::new(0.0, r, 1.0).unwrap();
        assert!((timeout_laplace(&m0, 0.7).unwrap() - (-0.35f64).exp()).abs() < 1e-15);
        let half = ProbeModel::new(0.5, r, 1.0).unwrap();
        assert!((timeout_laplace(&half, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let v = timeout_laplace(&half, r * 2f64.ln()).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
        let one = ProbeModel::new(1.0, r, 1.0).unwrap();
        assert!(timeout_laplace(&one, 0.0).is_err());
        assert_eq!(timeout_laplace(&one, 0.1).unwrap(), 0.0);
        assert!(timeout_laplace(&half, -1.0).is_err());
        assert!(ProbeModel::new(1.5, r, 1.0).is_err());
    }

    #[test]
    fn laplace_matches_series() {
        for &q in &[0.0, 0.3, 0.9, 0.999] {
            let m = ProbeModel::new(q, 1.0 / 120.0, MU).unwrap();
            let closed = timeout_laplace(&m, MU).unwrap();
            let series = oracle_series(q, MU, 1.0 / 120.0);
            assert!((closed - series).abs() < 1e-9 * series, "q={q}");
        }
    }

    #[test]
    fn pmf_sums_to_one() {
        let m = ProbeModel::new(0.7, 1.0, 1.0).unwrap();
        let total: f64 = (0..400).map(|n| m.probe_count_pmf(n)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((m.mean_time_to_timeout() - 1.0 / 0.3).abs() < 1e-12);
    }

    #[test]
    fn timeout_at_twenty_megabits() {
        // independent high-precision evaluation: 3.984126381386654669e-3
        let p = timeout_probability(&paper(20e6, 0.01), MU).unwrap().p;
        assert!((p - 3.984_126_381_386_655e-3).abs() < 1e-15);
    }

    #[test]
    fn huge_capacity_gives_zero() {
        let p = timeout_probability(&paper(1e12, 0.01), MU).unwrap();
        assert_eq!(p.q, 1.0);
        assert_eq!(p.p, 0.0);
    }

    #[test]
    fn capacity_round_trip_at_twenty() {
        let ch = paper(20e6, 0.01);
        let p = timeout_probability(&ch, MU).unwrap().p;
        let c = capacity_for_timeout(p, MU, &ch).unwrap();
        assert!((c - 20e6).abs() <= 1e-9 * 20e6, "{c}");
    }

    #[test]
    fn capacity_near_ceiling_approaches_boundary() {
        let ch = paper(10e6, 0.01);
        let ceiling = max_timeout_probability(MU, ch.probe_rate);
        let c = capacity_for_timeout(ceiling * (1.0 - 1e-12), MU, &ch).unwrap();
        assert!((c - 9e6).abs() < 1.0, "{c}");
    }

    #[test]
    fn capacity_rejects_unattainable() {
        let ch = paper(10e6, 0.01);
        assert!(capacity_for_timeout(0.0, MU, &ch).is_err());
        assert!(capacity_for_timeout(-0.1, MU, &ch).is_err());
        let ceiling = max_timeout_probability(MU, ch.probe_rate);
        assert!(capacity_for_timeout(ceiling, MU, &ch).is_err());
        // mu/r = ln 2 puts the ceiling at exactly one half
        let fast = ChannelParams { probe_rate: 1.0, timeout_threshold: 0.5, ..ch };
        assert!(capacity_for_timeout(0.5, 2f64.ln(), &fast).is_err());
    }

    #[test]
    fn utilization_examples() {
        let mut ch = paper(10e6, 0.01);
        ch.packet_service_factor = 1e-4;
        assert!((utilization(&ch.with_total_capacity(1e7)) - 0.9).abs() < 1e-15);
        assert!((utilization(&ch.with_total_capacity(25e6)) - 0.36).abs() < 1e-15);
        ch.background_rate = 0.0;
        assert_eq!(utilization(&ch), 0.0);
    }

    proptest! {
        #[test]
        fn decreasing_in_capacity(c in 9.01e6f64..40e6, dc in 1e3f64..5e6) {
            let lo = timeout_probability(&paper(c, 0.01), MU).unwrap().p;
            let hi = timeout_probability(&paper(c + dc, 0.01), MU).unwrap().p;
            prop_assert!(hi < lo);
            prop_assert!(hi > 0.0);
            prop_assert!(lo <= max_timeout_probability(MU, 1.0 / 120.0));
        }

        #[test]
        fn increasing_in_background(lambda in 0.0f64..1500.0, d in 1.0f64..400.0) {
            let mut ch = paper(20e6, 0.01);
            ch.background_rate = lambda;
            let lo = timeout_probability(&ch, MU).unwrap().p;
            ch.background_rate = lambda + d;
            let hi = timeout_probability(&ch, MU).unwrap().p;
            prop_assert!(hi > lo);
        }

        #[test]
        fn decreasing_in_tau(tau in 1e-3f64..0.05, dt in 1e-4f64..0.02) {
            let lo = timeout_probability(&paper(15e6, tau + dt), MU).unwrap().p;
            let hi = timeout_probability(&paper(15e6, tau), MU).unwrap().p;
            prop_assert!(lo < hi);
        }

        #[test]
        fn inversion_round_trips(c in 9.05e6f64..30e6) {
            let ch = paper(c, 0.01);
            let p = timeout_probability(&ch, MU).unwrap().p;
            let back = capacity_for_timeout(p, MU, &ch).unwrap();
            prop_assert!((back - c).abs() <= 1e-9 * c);
        }

        #[test]
        fn scaling_at_fixed_utilization(u in 0.05f64..0.95, c in 1e6f64..30e6, k in 1.01f64..5.0) {
            let p_at = |cap: f64| {
                let mut ch = paper(cap, 0.01);
                ch.background_rate = u * ch.packet_service_factor * cap;
                timeout_probability(&ch, MU).unwrap().p
            };
            let small = p_at(c);
            let large = p_at(c * k);
            prop_assert!(large < small || small == 0.0);
        }
    }
}
