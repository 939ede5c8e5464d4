//! TOML configuration for `occmob simulate`.

use std::path::Path;

use occmob_core::model::thresholds_from_primitives;
use occmob_core::{ModelParams, Primitives, Thresholds};
use serde::Deserialize;

use crate::CliError;

/// Birth year written to simulated records when the config has none.
pub const DEFAULT_BIRTH_YEAR: i32 = 1960;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub population: Option<u64>,
    pub seed: Option<u64>,
    pub birth_year: Option<i32>,
    /// Fathers' class shares (Working, Middle, Upper).
    pub fathers: [f64; 3],
    pub params: Option<ModelParams>,
    pub primitives: Option<Primitives>,
    pub supports: Option<Supports>,
}

/// Endowment support bounds, used together with `[primitives]`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Supports {
    pub theta_max: f64,
    pub theta_min: f64,
    pub theta_m_max: f64,
    pub theta_m_min: f64,
}

/// Parameters to simulate, plus the thresholds when derived from primitives.
#[derive(Debug, Clone, Copy)]
pub struct ResolvedParams {
    pub params: ModelParams,
    pub thresholds: Option<Thresholds>,
}

impl SimulateConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot open `{}`: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Input(format!("invalid config `{}`: {e}", path.display())))
    }

    pub fn resolve(&self) -> Result<ResolvedParams, CliError> {
        match (&self.params, &self.primitives, &self.supports) {
            (Some(params), None, None) => Ok(ResolvedParams { params: *params, thresholds: None }),
            (None, Some(primitives), Some(s)) => {
                let t = thresholds_from_primitives(primitives).map_err(|e| CliError::Input(e.to_string()))?;
                let params = ModelParams::from_thresholds(&t, s.theta_max, s.theta_min, s.theta_m_max, s.theta_m_min);
                Ok(ResolvedParams { params, thresholds: Some(t) })
            }
            (None, Some(_), None) => Err(CliError::Input("`[primitives]` requires a `[supports]` table".into())),
            _ => Err(CliError::Input("give either `[params]` or `[primitives]` with `[supports]`".into())),
        }
    }
}
