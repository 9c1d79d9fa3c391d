//! Unit-tagged scalar parsing.
//!
//! Values arrive as strings like `"8 h"`, `"10 Mbps"` or `"1250 B"` and are
//! converted to the internal convention: seconds, bits, bits per second and
//! events (sessions, probes, packets) per second.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Duration,
    Rate,
    PacketRate,
    Bandwidth,
    Size,
    Dimensionless,
}

impl Dimension {
    fn name(self) -> &'static str {
        match self {
            Dimension::Duration => "duration",
            Dimension::Rate => "rate",
            Dimension::PacketRate => "packet rate",
            Dimension::Bandwidth => "bandwidth",
            Dimension::Size => "size",
            Dimension::Dimensionless => "dimensionless",
        }
    }

    /// Unit used when writing values back out.
    pub fn canonical_unit(self) -> &'static str {
        match self {
            Dimension::Duration => "s",
            Dimension::Rate => "1/s",
            Dimension::PacketRate => "pkt/s",
            Dimension::Bandwidth => "bps",
            Dimension::Size => "bit",
            Dimension::Dimensionless => "",
        }
    }

    fn accepted(self) -> &'static [(&'static str, f64)] {
        match self {
            Dimension::Duration => &[
                ("s", 1.0),
                ("sec", 1.0),
                ("ms", 1e-3),
                ("min", 60.0),
                ("h", 3600.0),
                ("hour", 3600.0),
                ("hours", 3600.0),
                ("d", 86400.0),
            ],
            Dimension::Rate => &[
                ("1/s", 1.0),
                ("/s", 1.0),
                ("Hz", 1.0),
                ("1/min", 1.0 / 60.0),
                ("/min", 1.0 / 60.0),
                ("1/h", 1.0 / 3600.0),
                ("/h", 1.0 / 3600.0),
            ],
            Dimension::PacketRate => &[
                ("pkt/s", 1.0),
                ("pkts/s", 1.0),
                ("pps", 1.0),
            ],
            Dimension::Bandwidth => &[
                ("bps", 1.0),
                ("bit/s", 1.0),
                ("kbps", 1e3),
                ("Mbps", 1e6),
                ("Gbps", 1e9),
            ],
            Dimension::Size => &[
                ("bit", 1.0),
                ("bits", 1.0),
                ("B", 8.0),
                ("byte", 8.0),
                ("bytes", 8.0),
                ("kB", 8e3),
            ],
            Dimension::Dimensionless => &[],
        }
    }
}

/// Parses `raw` as a quantity of dimension `dim` and returns it in canonical units.
///
/// `key` is only used to name the offending entry in error messages.
pub fn parse_quantity(key: &str, raw: &str, dim: Dimension) -> Result<f64> {
    let trimmed = raw.trim();
    let split = trimmed
        .find(|c: char| c.is_whitespace())
        .unwrap_or(trimmed.len());
    let (num, unit) = trimmed.split_at(split);
    let unit = unit.trim();
    let value: f64 = num
        .parse()
        .map_err(|_| Error::unit(key, raw, format!("cannot parse number `{num}`")))?;
    if !value.is_finite() {
        return Err(Error::unit(key, raw, "value is not finite"));
    }

    if dim == Dimension::Dimensionless {
        if unit.is_empty() {
            return Ok(value);
        }
        return Err(Error::unit(
            key,
            raw,
            format!("expected a plain number, found unit `{unit}`"),
        ));
    }
    if unit.is_empty() {
        return Err(Error::unit(
            key,
            raw,
            format!(
                "missing unit; expected a {} such as `{}`",
                dim.name(),
                dim.canonical_unit()
            ),
        ));
    }
    match dim.accepted().iter().find(|(u, _)| *u == unit) {
        Some((_, factor)) => Ok(value * factor),
        None => {
            let known: Vec<&str> = dim.accepted().iter().map(|(u, _)| *u).collect();
            Err(Error::unit(
                key,
                raw,
                format!(
                    "unit `{unit}` is not a {}; accepted: {}",
                    dim.name(),
                    known.join(", ")
                ),
            ))
        }
    }
}

/// Formats a canonical value so that [`parse_quantity`] reads it back bit-exactly.
pub fn format_quantity(value: f64, dim: Dimension) -> String {
    match dim {
        Dimension::Dimensionless => format!("{value}"),
        _ => format!("{value} {}", dim.canonical_unit()),
    }
}
