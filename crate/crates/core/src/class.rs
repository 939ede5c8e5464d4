use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Occupational class. Ordered by status: `Working < Middle < Upper`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OccClass {
    Working,
    Middle,
    Upper,
}

impl OccClass {
    pub const ALL: [OccClass; 3] = [OccClass::Working, OccClass::Middle, OccClass::Upper];

    /// Row/column position in every 3×3 matrix and share vector.
    pub fn index(self) -> usize {
        match self {
            OccClass::Working => 0,
            OccClass::Middle => 1,
            OccClass::Upper => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    /// Single-letter code used in the CSV formats.
    pub fn code(self) -> &'static str {
        match self {
            OccClass::Working => "W",
            OccClass::Middle => "M",
            OccClass::Upper => "U",
        }
    }
}

impl fmt::Display for OccClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown occupational class code `{0}` (expected W, M or U)")]
pub struct ParseClassError(pub String);

impl FromStr for OccClass {
    type Err = ParseClassError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "W" => Ok(OccClass::Working),
            "M" => Ok(OccClass::Middle),
            "U" => Ok(OccClass::Upper),
            _ => Err(ParseClassError(s.to_string())),
        }
    }
}
