//! Model configuration files.
//!
//! A model is the product-state JSON with optional extra keys:
//! `"chain"` (default: symmetric chain up to `min(L, 4)`), `"m0"`,
//! `"tolerances"` and `"budget"`. A file holding only
//! `{"chain": {"type": "rotation_example", "beta": b}}` selects the 2×2
//! rotation model.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Deserialize;
use serde_json::Value;

use qistate_core::algebra::{ElementaryTensor, ProductState, ProductStateJson, DEFAULT_MAX_TOTAL_DIM};
use qistate_core::config::{Budget, Tolerances};
use qistate_core::error::Error;
use qistate_core::group::{rotation_example, ChainConfig, GroupChain};

/// Environment variable overriding the dense-operator cap.
pub const MAX_DENSE_ENV: &str = "QISTATE_MAX_DENSE";

#[derive(Debug, Default, Deserialize)]
struct Extras {
    chain: Option<ChainConfig>,
    m0: Option<usize>,
    tolerances: Option<Tolerances>,
    budget: Option<Budget>,
}

#[derive(Clone, Debug)]
pub struct Model {
    pub state: ProductState,
    pub chain_config: ChainConfig,
    pub m0: Option<usize>,
    pub tolerances: Tolerances,
    pub budget: Budget,
}

impl Model {
    pub fn is_rotation(&self) -> bool {
        matches!(self.chain_config, ChainConfig::RotationExample { .. })
    }

    pub fn chain(&self) -> Result<GroupChain> {
        Ok(self.chain_config.build(self.budget.max_enumeration)?)
    }

    /// The symmetric chain `S_1 ⊂ … ⊂ S_nmax` on this model's sites, or the
    /// single rotation group when `nmax = 1` on the rotation model.
    pub fn chain_up_to(&self, nmax: usize) -> Result<GroupChain> {
        match self.chain_config {
            ChainConfig::RotationExample { .. } if nmax == 1 => self.chain(),
            ChainConfig::RotationExample { .. } => {
                Err(Error::InvalidRange(format!("the rotation model has a single group, got nmax = {nmax}")).into())
            }
            ChainConfig::Symmetric { num_sites, .. } => {
                Ok(ChainConfig::Symmetric { num_sites, max_n: nmax }.build(self.budget.max_enumeration)?)
            }
        }
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| Error::ConfigInvalid(format!("{}: {e}", path.display())).into())
}

fn config_error(path: &Path, e: serde_json::Error) -> anyhow::Error {
    Error::ConfigInvalid(format!("{}: {e}", path.display())).into()
}

/// Dense cap from the environment, if set.
pub fn dense_cap_override() -> Result<Option<usize>> {
    match std::env::var(MAX_DENSE_ENV) {
        Ok(v) => {
            let cap: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::ConfigInvalid(format!("{MAX_DENSE_ENV} must be a positive integer, got {v:?}")))?;
            if cap == 0 {
                return Err(Error::ConfigInvalid(format!("{MAX_DENSE_ENV} must be positive")).into());
            }
            Ok(Some(cap))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::ConfigInvalid(format!("{MAX_DENSE_ENV}: {e}")).into()),
    }
}

pub fn load_model(path: &Path) -> Result<Model> {
    let value = read_json(path)?;
    if !value.is_object() {
        return Err(Error::ConfigInvalid(format!("{}: model config must be a JSON object", path.display())).into());
    }
    let extras: Extras = serde_json::from_value(value.clone()).map_err(|e| config_error(path, e))?;
    let has_state = value.get("tail_density").is_some();
    let state = match (&extras.chain, has_state) {
        (Some(ChainConfig::RotationExample { beta }), false) => rotation_example(*beta)?.0,
        (_, true) => {
            let json: ProductStateJson = serde_json::from_value(value).map_err(|e| config_error(path, e))?;
            json.build_with_limit(DEFAULT_MAX_TOTAL_DIM)?
        }
        (_, false) => {
            return Err(Error::ConfigInvalid(format!(
                "{}: expected product-state fields or a rotation_example chain",
                path.display()
            ))
            .into())
        }
    };
    let alg = state.algebra();
    let chain_config = match extras.chain {
        Some(ChainConfig::Symmetric { num_sites, .. }) if num_sites != alg.num_sites() => {
            return Err(Error::ConfigInvalid(format!(
                "chain has {num_sites} sites but the state has {}",
                alg.num_sites()
            ))
            .into())
        }
        Some(ChainConfig::RotationExample { .. }) if alg.site_dim() != 2 || alg.num_sites() != 1 => {
            return Err(Error::ConfigInvalid("the rotation chain acts on a single 2×2 site".into()).into())
        }
        Some(c) => c,
        None => ChainConfig::Symmetric { num_sites: alg.num_sites(), max_n: alg.num_sites().min(4) },
    };
    let tolerances = extras.tolerances.unwrap_or_default();
    tolerances.validate()?;
    let mut budget = extras.budget.unwrap_or_default();
    if let Some(cap) = dense_cap_override()? {
        budget.max_dense_dim = cap;
    }
    budget.validate()?;
    Ok(Model { state, chain_config, m0: extras.m0, tolerances, budget })
}

/// An elementary tensor given as a list of `{"site": n, "matrix": m}`.
pub fn load_observable(path: &Path) -> Result<ElementaryTensor> {
    let value = read_json(path)?;
    serde_json::from_value(value).map_err(|e| config_error(path, e))
}
