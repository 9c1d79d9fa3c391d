//! Flat key/value configuration with unit-suffixed values.
//!
//! ```toml
//! session_duration = "8 h"
//! rho = 1.0
//! capacity_base = "10 Mbps"
//! packet_size = "1250 B"
//! background_rate = "900 pkt/s"
//! probe_interval = "120 s"
//! tau = "0.01 s"
//! populations = [15, 15]
//! alpha = 1
//! beta = 2
//! success_min = 0.95
//! ```
//!
//! Values are kept as strings until a typed accessor resolves them, so flags
//! and file entries share one code path and one set of error messages.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{ChannelParams, CostModel, PoolLayout, SlaTarget, WorkloadParams};
use crate::units::{format_quantity, parse_quantity, Dimension};

/// Every key the planner understands, with its dimension.
pub const KEYS: &[(&str, Dimension)] = &[
    ("session_duration", Dimension::Duration),
    ("rho", Dimension::Dimensionless),
    ("idle_duration", Dimension::Duration),
    ("arrival_rate", Dimension::Rate),
    ("capacity_base", Dimension::Bandwidth),
    ("capacity_extra", Dimension::Bandwidth),
    ("capacity", Dimension::Bandwidth),
    ("packet_size", Dimension::Size),
    ("background_rate", Dimension::PacketRate),
    ("probe_interval", Dimension::Duration),
    ("probe_rate", Dimension::Rate),
    ("tau", Dimension::Duration),
    ("population", Dimension::Dimensionless),
    ("populations", Dimension::Dimensionless),
    ("licenses", Dimension::Dimensionless),
    ("alpha", Dimension::Dimensionless),
    ("beta", Dimension::Dimensionless),
    ("links_upgraded", Dimension::Dimensionless),
    ("success_min", Dimension::Dimensionless),
];

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

/// All five parameter groups in internal units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizedConfig {
    pub workload: WorkloadParams,
    pub channel: ChannelParams,
    pub layout: PoolLayout,
    pub cost: CostModel,
    pub sla: SlaTarget,
}

impl RawConfig {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses a flat TOML document. Arrays of integers become comma-separated lists.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_owned()))?;
        let mut cfg = RawConfig::new();
        for (key, value) in table {
            let s = match value {
                toml::Value::String(s) => s,
                toml::Value::Integer(i) => i.to_string(),
                toml::Value::Float(f) => f.to_string(),
                toml::Value::Array(items) => {
                    let parts: Result<Vec<String>> = items
                        .iter()
                        .map(|v| match v {
                            toml::Value::Integer(i) => Ok(i.to_string()),
                            other => Err(Error::Config(format!(
                                "`{key}`: list entries must be integers, found {other}"
                            ))),
                        })
                        .collect();
                    parts?.join(",")
                }
                other => {
                    return Err(Error::Config(format!(
                        "`{key}`: unsupported value {other}; expected a string, number or integer list"
                    )))
                }
            };
            cfg.set(&key, s)?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Sets (or overrides) `key`. Hyphens are accepted in place of underscores.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        let key = key.replace('-', "_");
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(Error::Config(format!("unknown key `{key}`")));
        }
        self.entries.insert(key, value.into());
        Ok(())
    }

    /// Applies every entry of `other` on top of `self`.
    pub fn merge(&mut self, other: &RawConfig) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    pub fn dimension(key: &str) -> Dimension {
        KEYS.iter()
            .find(|(k, _)| *k == key)
            .map(|(_, d)| *d)
            .expect("key table covers every accessor")
    }

    pub fn quantity(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|raw| parse_quantity(key, raw, Self::dimension(key)))
            .transpose()
    }

    fn required(&self, key: &str) -> Result<f64> {
        self.quantity(key)?
            .ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
    }

    /// Exactly one of `keys` must be present.
    fn one_of<'a>(&self, keys: &[&'a str]) -> Result<(&'a str, f64)> {
        let present: Vec<&str> = keys.iter().copied().filter(|k| self.get(k).is_some()).collect();
        match present.as_slice() {
            [k] => Ok((k, self.required(k)?)),
            [] => Err(Error::Config(format!(
                "missing key: one of {}",
                keys.iter().map(|k| format!("`{k}`")).collect::<Vec<_>>().join(", ")
            ))),
            many => Err(Error::Config(format!(
                "conflicting keys {}; give only one",
                many.iter().map(|k| format!("`{k}`")).collect::<Vec<_>>().join(", ")
            ))),
        }
    }

    pub fn count(&self, key: &str) -> Result<Option<u32>> {
        let Some(raw) = self.get(key) else {
            return Ok(None);
        };
        raw.trim()
            .parse::<u32>()
            .map(Some)
            .map_err(|_| Error::unit(key, raw, "expected a non-negative integer count"))
    }

    pub fn count_list(&self, key: &str) -> Result<Option<Vec<u32>>> {
        let Some(raw) = self.get(key) else {
            return Ok(None);
        };
        raw.trim_matches(|c| c == '[' || c == ']')
            .split(',')
            .map(|part| {
                part.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::unit(key, raw, "expected a comma-separated list of counts"))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    /// Session completion rate; needs only `session_duration`.
    pub fn mu(&self) -> Result<f64> {
        let duration = self.required("session_duration")?;
        if duration <= 0.0 {
            return Err(Error::domain("session_duration must be > 0"));
        }
        Ok(1.0 / duration)
    }

    /// `rho` as given, or derived from the workload keys when it is absent.
    pub fn rho(&self) -> Result<f64> {
        match self.quantity("rho")? {
            Some(rho) if self.get("session_duration").is_none() => {
                if !(rho.is_finite() && rho > 0.0) {
                    return Err(Error::domain(format!("rho must be finite and > 0, got {rho}")));
                }
                Ok(rho)
            }
            _ => Ok(self.workload()?.rho()),
        }
    }

    /// Sum over `populations`, or `population`.
    pub fn total_population(&self) -> Result<u32> {
        Ok(self.populations()?.iter().sum())
    }

    /// `licenses` as a single pool size.
    pub fn single_licenses(&self) -> Result<u32> {
        match self.count_list("licenses")?.as_deref() {
            Some([l]) => Ok(*l),
            Some(list) => Err(Error::Config(format!(
                "expected one license count for a single pool, got {} values",
                list.len()
            ))),
            None => Err(Error::Config("missing required key `licenses`".into())),
        }
    }

    /// Every entry in canonical units; entries that fail to parse are kept verbatim.
    pub fn resolved(&self) -> BTreeMap<String, String> {
        self.entries
            .iter()
            .map(|(k, raw)| {
                let dim = Self::dimension(k);
                let v = match dim {
                    Dimension::Dimensionless => raw.clone(),
                    _ => parse_quantity(k, raw, dim).map_or_else(|_| raw.clone(), |v| format_quantity(v, dim)),
                };
                (k.clone(), v)
            })
            .collect()
    }

    pub fn workload(&self) -> Result<WorkloadParams> {
        let duration = self.required("session_duration")?;
        if duration <= 0.0 {
            return Err(Error::domain("session_duration must be > 0"));
        }
        let mu = 1.0 / duration;
        let lambda = match self.one_of(&["rho", "idle_duration", "arrival_rate"])? {
            ("rho", rho) => rho * mu,
            ("idle_duration", idle) => {
                if idle <= 0.0 {
                    return Err(Error::domain("idle_duration must be > 0"));
                }
                1.0 / idle
            }
            (_, rate) => rate,
        };
        WorkloadParams::new(lambda, mu)
    }

    /// Channel parameters. `capacity` (total) may stand in for `capacity_extra`.
    pub fn channel(&self) -> Result<ChannelParams> {
        let base = self.required("capacity_base")?;
        let extra = match (self.quantity("capacity_extra")?, self.quantity("capacity")?) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "conflicting keys `capacity_extra`, `capacity`; give only one".into(),
                ))
            }
            (Some(extra), None) => extra,
            (None, Some(total)) => {
                if total < base {
                    return Err(Error::domain(format!(
                        "capacity ({total} bps) is below capacity_base ({base} bps)"
                    )));
                }
                total - base
            }
            (None, None) => 0.0,
        };
        let packet_size = self.required("packet_size")?;
        if packet_size <= 0.0 {
            return Err(Error::domain("packet_size must be > 0"));
        }
        let probe_rate = match self.one_of(&["probe_interval", "probe_rate"])? {
            ("probe_interval", interval) => {
                if interval <= 0.0 {
                    return Err(Error::domain("probe_interval must be > 0"));
                }
                1.0 / interval
            }
            (_, rate) => rate,
        };
        ChannelParams::new(
            base,
            extra,
            1.0 / packet_size,
            self.required("background_rate")?,
            probe_rate,
            self.required("tau")?,
        )
    }

    /// Site populations from `populations` (list) or `population` (single site).
    pub fn populations(&self) -> Result<Vec<u32>> {
        match (self.count_list("populations")?, self.count("population")?) {
            (Some(_), Some(_)) => Err(Error::Config(
                "conflicting keys `populations`, `population`; give only one".into(),
            )),
            (Some(list), None) => Ok(list),
            (None, Some(s)) => Ok(vec![s]),
            (None, None) => Err(Error::Config(
                "missing key: one of `populations`, `population`".into(),
            )),
        }
    }

    pub fn layout(&self) -> Result<PoolLayout> {
        let populations = self.populations()?;
        let licenses = self
            .count_list("licenses")?
            .ok_or_else(|| Error::Config("missing required key `licenses`".into()))?;
        PoolLayout::from_parts(&populations, &licenses)
    }

    pub fn cost(&self) -> Result<CostModel> {
        let links = self.count("links_upgraded")?.unwrap_or(1);
        CostModel::new(self.required("alpha")?, self.required("beta")?, links)
    }

    pub fn sla(&self) -> Result<SlaTarget> {
        SlaTarget::new(self.required("success_min")?)
    }

    pub fn normalize(&self) -> Result<NormalizedConfig> {
        Ok(NormalizedConfig {
            workload: self.workload()?,
            channel: self.channel()?,
            layout: self.layout()?,
            cost: self.cost()?,
            sla: self.sla()?,
        })
    }

    /// Renders the config as TOML text (all values as strings).
    pub fn to_toml_string(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(&format!("{k} = {v:?}\n"));
        }
        out
    }
}

impl NormalizedConfig {
    /// Writes the config back out in canonical units.
    pub fn denormalize(&self) -> RawConfig {
        let mut entries = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            entries.insert(k.to_owned(), v);
        };
        put(
            "session_duration",
            format_quantity(self.workload.mean_session_duration(), Dimension::Duration),
        );
        put(
            "arrival_rate",
            format_quantity(self.workload.lambda, Dimension::Rate),
        );
        let c = &self.channel;
        put("capacity_base", format_quantity(c.capacity_base, Dimension::Bandwidth));
        put("capacity_extra", format_quantity(c.capacity_extra, Dimension::Bandwidth));
        put(
            "packet_size",
            format_quantity(1.0 / c.packet_service_factor, Dimension::Size),
        );
        put(
            "background_rate",
            format_quantity(c.background_rate, Dimension::PacketRate),
        );
        put("probe_rate", format_quantity(c.probe_rate, Dimension::Rate));
        put("tau", format_quantity(c.timeout_threshold, Dimension::Duration));
        let join = |v: Vec<u32>| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        put("populations", join(self.layout.populations()));
        put(
            "licenses",
            join(self.layout.sites().iter().map(|s| s.licenses).collect()),
        );
        put("alpha", format!("{}", self.cost.alpha));
        put("beta", format!("{}", self.cost.beta));
        put("links_upgraded", self.cost.links_upgraded.to_string());
        put("success_min", format!("{}", self.sla.success_min));
        RawConfig { entries }
    }
}
