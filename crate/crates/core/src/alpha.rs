//! The tuning parameter of the loss family.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Half-width of the band around 1 that is routed to the log-loss branch.
pub const LOG_GUARD_BAND: f64 = 1e-9;

/// Extended positive real `α ∈ (0, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AlphaParam(f64);

/// Which closed form applies for a given α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Branch {
    /// α within [`LOG_GUARD_BAND`] of 1.
    Log,
    Infinite,
    /// Any other finite α, carried by value.
    General(f64),
}

impl AlphaParam {
    pub const ONE: AlphaParam = AlphaParam(1.0);
    pub const INFINITY: AlphaParam = AlphaParam(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value <= 0.0 {
            return Err(Error::Argument(format!(
                "alpha must be in (0, inf], got {value}"
            )));
        }
        Ok(AlphaParam(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    pub fn branch(self) -> Branch {
        if self.0.is_infinite() {
            Branch::Infinite
        } else if (self.0 - 1.0).abs() < LOG_GUARD_BAND {
            Branch::Log
        } else {
            Branch::General(self.0)
        }
    }

    /// `1/α`, with `1/∞ = 0`.
    pub fn inverse(self) -> f64 {
        if self.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }

    /// Exponent `1 − 1/α` that appears throughout the loss family.
    pub fn exponent(self) -> f64 {
        match self.branch() {
            Branch::Log => 0.0,
            _ => 1.0 - self.inverse(),
        }
    }
}

impl Default for AlphaParam {
    fn default() -> Self {
        AlphaParam::ONE
    }
}

impl fmt::Display for AlphaParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for AlphaParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "infinity" | "∞" => Ok(AlphaParam::INFINITY),
            _ => {
                let v: f64 = t
                    .parse()
                    .map_err(|_| Error::Argument(format!("cannot parse alpha from '{s}'")))?;
                AlphaParam::new(v)
            }
        }
    }
}

impl TryFrom<f64> for AlphaParam {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        AlphaParam::new(v)
    }
}

/// Parses a comma-separated α list such as `0.65,1,4,inf`.
pub fn parse_alpha_list(s: &str) -> Result<Vec<AlphaParam>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(str::parse)
        .collect()
}

impl Serialize for AlphaParam {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for AlphaParam {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(deserializer)? {
            Raw::Num(v) => AlphaParam::new(v),
            Raw::Text(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}
