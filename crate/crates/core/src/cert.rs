//! Numeric certificates: the machine-checked record of an inequality.
//!
//! Convention: `worst_residual` is the largest value of LHS - RHS seen on
//! the checked set, so `pass` holds exactly when `worst_residual <= 0`.
//! Fitted constants are nudged up by a relative epsilon before the residual
//! sweep so that a constant obtained as a max ratio certifies cleanly.

use crate::grid::GridDescriptor;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Multiplicative nudge applied to fitted constants before re-checking.
pub const FIT_NUDGE: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: String,
    pub constants: BTreeMap<String, f64>,
    pub worst_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Vec<f64>>,
    pub pass: bool,
    pub grid: GridDescriptor,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub profile: Option<Vec<f64>>,
}

impl Certificate {
    pub fn new(kind: impl Into<String>, grid: GridDescriptor) -> Certificate {
        Certificate {
            kind: kind.into(),
            constants: BTreeMap::new(),
            worst_residual: 0.0,
            witness: None,
            pass: true,
            grid,
            notes: Vec::new(),
            profile: None,
        }
    }

    pub fn with_constant(mut self, key: impl Into<String>, value: f64) -> Certificate {
        self.constants.insert(key.into(), value);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Certificate {
        self.notes.push(note.into());
        self
    }

    pub fn with_profile(mut self, profile: Vec<f64>) -> Certificate {
        self.profile = Some(profile);
        self
    }

    /// Set the residual and derive `pass` from the sign convention.
    pub fn finish(mut self, worst_residual: f64, witness: Option<Vec<f64>>) -> Certificate {
        self.worst_residual = worst_residual;
        self.witness = witness;
        self.pass = worst_residual <= 0.0;
        self
    }

    pub fn constant(&self, key: &str) -> Option<f64> {
        self.constants.get(key).copied()
    }
}
