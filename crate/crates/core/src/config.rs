//! Run-wide tolerances and work budgets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute tolerance for identities that hold exactly in exact arithmetic.
    pub exact: f64,
    /// Increment below which a truncated martingale is reported as converged.
    pub convergence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { exact: 1e-10, convergence: 1e-8 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Largest GNS dimension `(d^L)²` for which dense operators are materialized.
    pub max_dense_dim: usize,
    /// Largest group order that may be enumerated.
    pub max_enumeration: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_dense_dim: 4096, max_enumeration: 5040 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        if self.exact > 0.0 && self.convergence > 0.0 {
            Ok(())
        } else {
            Err(Error::ConfigInvalid("tolerances must be positive".into()))
        }
    }
}

impl Budget {
    pub fn validate(&self) -> Result<()> {
        if self.max_dense_dim > 0 && self.max_enumeration > 0 {
            Ok(())
        } else {
            Err(Error::ConfigInvalid("budgets must be positive".into()))
        }
    }
}
