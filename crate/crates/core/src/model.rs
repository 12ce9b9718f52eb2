//! Game model variants and pebbling conventions.

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Exact rational cost. All cost accounting in this crate is exact; floats
/// never enter threshold comparisons.
pub type Cost = Ratio<i64>;

/// The four game variants. They share the move set of the base game and
/// differ only in which moves are available and what they cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Transfers cost 1, compute and delete are free and unrestricted.
    Base,
    /// Each node may be computed at most once.
    Oneshot,
    /// Delete is not available; pebbles can only be turned blue.
    Nodel,
    /// Like `Base`, but every compute costs `epsilon`.
    Compcost,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Base,
        Variant::Oneshot,
        Variant::Nodel,
        Variant::Compcost,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Base => "base",
            Variant::Oneshot => "oneshot",
            Variant::Nodel => "nodel",
            Variant::Compcost => "compcost",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, ModelError> {
        match s {
            "base" => Ok(Variant::Base),
            "oneshot" => Ok(Variant::Oneshot),
            "nodel" => Ok(Variant::Nodel),
            "compcost" => Ok(Variant::Compcost),
            other => Err(ModelError::UnknownVariant(other.to_string())),
        }
    }
}

/// How source nodes start out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartConvention {
    /// Sources are regular nodes with zero inputs: computable for free at
    /// any time, initially empty.
    FreeSources,
    /// Sources begin with a blue pebble and are never computable; they must
    /// be loaded into fast memory.
    BlueSources,
}

/// What the final state must look like on the sinks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FinishConvention {
    /// Every sink holds a pebble of either color.
    AnyPebbleOnSinks,
    /// Every sink holds a blue pebble.
    BlueOnSinks,
}

/// A fully specified game: variant, compute cost, and start/finish rules.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelSpec {
    pub variant: Variant,
    /// Compute cost under `Compcost`; ignored by the other variants.
    /// Always an exact rational strictly between 0 and 1.
    #[serde(with = "rational_serde")]
    pub epsilon: Cost,
    pub start: StartConvention,
    pub finish: FinishConvention,
}

impl ModelSpec {
    /// Default epsilon: cache is roughly a hundred times faster than a bus
    /// access.
    pub fn default_epsilon() -> Cost {
        Ratio::new(1, 100)
    }

    pub fn new(variant: Variant) -> Self {
        ModelSpec {
            variant,
            epsilon: Self::default_epsilon(),
            start: StartConvention::FreeSources,
            finish: FinishConvention::AnyPebbleOnSinks,
        }
    }

    pub fn with_epsilon(variant: Variant, epsilon: Cost) -> Result<Self, ModelError> {
        check_epsilon(epsilon)?;
        Ok(ModelSpec {
            epsilon,
            ..Self::new(variant)
        })
    }

    pub fn with_conventions(
        mut self,
        start: StartConvention,
        finish: FinishConvention,
    ) -> Self {
        self.start = start;
        self.finish = finish;
        self
    }

    /// Cost of one compute move.
    pub fn compute_cost(&self) -> Cost {
        match self.variant {
            Variant::Compcost => self.epsilon,
            _ => Cost::zero(),
        }
    }
}

fn check_epsilon(epsilon: Cost) -> Result<(), ModelError> {
    if epsilon <= Cost::zero() || epsilon >= Cost::one() {
        return Err(ModelError::EpsilonOutOfRange(epsilon.to_string()));
    }
    Ok(())
}

/// Parse an exact rational written as `P/Q` (or a bare integer `P`).
pub fn parse_ratio(s: &str) -> Result<Cost, ModelError> {
    let bad = || ModelError::BadRational(s.to_string());
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (
            n.trim().parse::<i64>().map_err(|_| bad())?,
            d.trim().parse::<i64>().map_err(|_| bad())?,
        ),
        None => (s.trim().parse::<i64>().map_err(|_| bad())?, 1),
    };
    if den <= 0 || num < 0 {
        return Err(bad());
    }
    Ok(Ratio::new(num, den))
}

/// Parse an epsilon flag value: a `P/Q` rational strictly inside (0, 1).
pub fn parse_epsilon(s: &str) -> Result<Cost, ModelError> {
    let r = parse_ratio(s)?;
    check_epsilon(r)?;
    Ok(r)
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown model variant `{0}` (expected base|oneshot|nodel|compcost)")]
    UnknownVariant(String),
    #[error("epsilon {0} must lie strictly between 0 and 1")]
    EpsilonOutOfRange(String),
    #[error("`{0}` is not a valid rational (expected <int>/<int>)")]
    BadRational(String),
}

/// Serde helpers for exact rationals as `{"num": .., "den": ..}`.
pub mod rational_serde {
    use super::Cost;
    use num_rational::Ratio;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Repr {
        num: i64,
        den: i64,
    }

    pub fn serialize<S: Serializer>(value: &Cost, ser: S) -> Result<S::Ok, S::Error> {
        Repr {
            num: *value.numer(),
            den: *value.denom(),
        }
        .serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Cost, D::Error> {
        let repr = Repr::deserialize(de)?;
        if repr.den == 0 {
            return Err(serde::de::Error::custom("rational with zero denominator"));
        }
        Ok(Ratio::new(repr.num, repr.den))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_base_definitions() {
        let m = ModelSpec::new(Variant::Compcost);
        assert_eq!(m.epsilon, Ratio::new(1, 100));
        assert_eq!(m.start, StartConvention::FreeSources);
        assert_eq!(m.finish, FinishConvention::AnyPebbleOnSinks);
    }

    #[test]
    fn epsilon_must_be_in_unit_interval() {
        assert!(parse_epsilon("1/100").is_ok());
        assert!(parse_epsilon("1/4").is_ok());
        assert!(parse_epsilon("0/5").is_err());
        assert!(parse_epsilon("5/5").is_err());
        assert!(parse_epsilon("7/5").is_err());
        assert!(parse_epsilon("-1/5").is_err());
        assert!(parse_epsilon("x/5").is_err());
    }

    #[test]
    fn compute_cost_is_zero_outside_compcost() {
        for v in [Variant::Base, Variant::Oneshot, Variant::Nodel] {
            assert_eq!(ModelSpec::new(v).compute_cost(), Cost::zero());
        }
        assert_eq!(
            ModelSpec::new(Variant::Compcost).compute_cost(),
            Ratio::new(1, 100)
        );
    }

    #[test]
    fn variant_round_trips_through_str() {
        for v in Variant::ALL {
            assert_eq!(v.as_str().parse::<Variant>().unwrap(), v);
        }
        assert!("fancy".parse::<Variant>().is_err());
    }
}
