//! The four irreducible association types and their algebra.
//!
//! Every association resolves to an [`StType`]: one of four kinds
//! (proximity, ordering, containment, expression), read either forward or
//! as its reciprocal, and either asserted or denied. Proximity reads the same
//! in both directions, so `NEAR` only exists in the forward direction, which
//! leaves 14 distinct canonical labels.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// Proximity, similarity, adjacency. Symmetric.
    Near,
    /// Ordering and dependency: "depends on", "follows", "is caused by".
    Follows,
    /// Aggregation and membership: "contains", "generalizes".
    Contains,
    /// Property expression: "expresses", "has name or value".
    Expresses,
}

impl Kind {
    pub const ALL: [Kind; 4] = [Kind::Near, Kind::Follows, Kind::Contains, Kind::Expresses];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Near => "near",
            Kind::Follows => "follows",
            Kind::Contains => "contains",
            Kind::Expresses => "expresses",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "near" => Ok(Kind::Near),
            "follows" => Ok(Kind::Follows),
            "contains" => Ok(Kind::Contains),
            "expresses" => Ok(Kind::Expresses),
            other => Err(Error::invalid(format!(
                "unknown association kind {other:?} (expected near, follows, contains or expresses)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[serde(rename = "fwd")]
    Forward,
    #[serde(rename = "recip")]
    Reciprocal,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Forward => Direction::Reciprocal,
            Direction::Reciprocal => Direction::Forward,
        }
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fwd" | "forward" => Ok(Direction::Forward),
            "recip" | "reciprocal" => Ok(Direction::Reciprocal),
            other => Err(Error::invalid(format!(
                "unknown direction {other:?} (expected fwd or recip)"
            ))),
        }
    }
}

/// A canonical association type label.
///
/// Construct through [`StType::new`] (or the shorthands), which folds
/// `NEAR` reciprocal onto `NEAR` forward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "RawStType", into = "RawStType")]
pub struct StType {
    kind: Kind,
    direction: Direction,
    negated: bool,
}

#[derive(Serialize, Deserialize)]
struct RawStType {
    kind: Kind,
    dir: Direction,
    negated: bool,
}

impl From<RawStType> for StType {
    fn from(raw: RawStType) -> Self {
        StType::new(raw.kind, raw.dir, raw.negated)
    }
}

impl From<StType> for RawStType {
    fn from(t: StType) -> Self {
        RawStType {
            kind: t.kind,
            dir: t.direction,
            negated: t.negated,
        }
    }
}

impl StType {
    pub fn new(kind: Kind, direction: Direction, negated: bool) -> Self {
        let direction = if kind == Kind::Near {
            Direction::Forward
        } else {
            direction
        };
        StType {
            kind,
            direction,
            negated,
        }
    }

    pub fn forward(kind: Kind) -> Self {
        StType::new(kind, Direction::Forward, false)
    }

    pub fn reciprocal(kind: Kind) -> Self {
        StType::new(kind, Direction::Reciprocal, false)
    }

    pub fn kind(self) -> Kind {
        self.kind
    }

    pub fn direction(self) -> Direction {
        self.direction
    }

    pub fn is_negated(self) -> bool {
        self.negated
    }

    pub fn is_positive(self) -> bool {
        !self.negated
    }

    /// The same association read from the other end.
    pub fn reciprocal_of(self) -> Self {
        StType::new(self.kind, self.direction.flip(), self.negated)
    }

    /// The denial of this association.
    pub fn negate(self) -> Self {
        StType::new(self.kind, self.direction, !self.negated)
    }

    /// All 14 canonical labels, in a fixed order.
    pub fn all() -> Vec<StType> {
        let mut out = Vec::with_capacity(14);
        for kind in Kind::ALL {
            for negated in [false, true] {
                out.push(StType::new(kind, Direction::Forward, negated));
                if kind != Kind::Near {
                    out.push(StType::new(kind, Direction::Reciprocal, negated));
                }
            }
        }
        out
    }
}

impl fmt::Display for StType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("not ")?;
        }
        f.write_str(self.kind.as_str())?;
        if self.direction == Direction::Reciprocal {
            f.write_str(" (reciprocal)")?;
        }
        Ok(())
    }
}

/// Free-function form of [`StType::reciprocal_of`].
pub fn reciprocal_of(t: StType) -> StType {
    t.reciprocal_of()
}

/// Free-function form of [`StType::negate`].
pub fn negate_type(t: StType) -> StType {
    t.negate()
}
