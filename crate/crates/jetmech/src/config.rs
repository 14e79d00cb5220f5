//! Scenario configuration: one JSON document per scenario, with expressions
//! in the grammar of `jetmech_core::expr`. Built-in scenarios resolve by
//! name without a file.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use jetmech_core::expr::{self, VarLayout};
use jetmech_core::mechanics::{HamiltonianSystem, LagrangianSystem};
use jetmech_core::scenarios::{self, Scenario};

/// On-disk scenario description.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub n: usize,
    #[serde(default)]
    pub lagrangian: Option<String>,
    #[serde(default)]
    pub hamiltonian: Option<String>,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError(format!("invalid scenario config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Parses the expressions and builds the runtime scenario.
    pub fn into_scenario(self) -> Result<Scenario, ConfigError> {
        if self.n == 0 {
            return Err(ConfigError("fiber dimension n must be >= 1".into()));
        }
        if self.lagrangian.is_none() && self.hamiltonian.is_none() {
            return Err(ConfigError(
                "scenario needs a lagrangian, a hamiltonian, or both".into(),
            ));
        }
        let lagrangian = self
            .lagrangian
            .as_deref()
            .map(|src| {
                let field = expr::parse(src, VarLayout::lagrangian(self.n), &self.parameters)
                    .map_err(|e| ConfigError(format!("lagrangian: {e}")))?;
                LagrangianSystem::new(self.n, self.name.clone(), field)
                    .map_err(|e| ConfigError(e.to_string()))
            })
            .transpose()?;
        let hamiltonian = self
            .hamiltonian
            .as_deref()
            .map(|src| {
                let field = expr::parse(src, VarLayout::hamiltonian(self.n), &self.parameters)
                    .map_err(|e| ConfigError(format!("hamiltonian: {e}")))?;
                HamiltonianSystem::explicit(self.n, self.name.clone(), field)
                    .map_err(|e| ConfigError(e.to_string()))
            })
            .transpose()?;
        Ok(Scenario {
            name: self.name,
            n: self.n,
            lagrangian,
            hamiltonian,
        })
    }
}

/// Resolves `--scenario NAME` against the built-in registry.
pub fn resolve_builtin(name: &str, n: usize) -> Result<Scenario, ConfigError> {
    scenarios::builtin(name, n).ok_or_else(|| {
        ConfigError(format!(
            "unknown scenario '{name}' (built-ins: {})",
            scenarios::BUILTIN_NAMES.join(", ")
        ))
    })
}
