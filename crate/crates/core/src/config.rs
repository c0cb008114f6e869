//! JSON run configuration.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "description": "free text",
//!   "fmo": { "epsilon": [...], "nu": [[...], ...] },
//!   "noise": { "dissipation": [...], "dephasing": [...] },
//!   "nmr": { "omega": [...], "J": [...] },
//!   "evolution": { "t_max": 2.0, "dt": 0.05, "method": "trotter",
//!                  "initial_state": "site:1", "lowering": "dense-blocks" },
//!   "output": { "trajectory_csv": "out.csv" }
//! }
//! ```
//!
//! `nmr` is optional and defaults to `ω_l = 2ε_l`, `J_l = 2ν_{l,l+1}`.
//! Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{initial_state, Lowering, NoiseParameters};
use crate::error::{Error, Result};
use crate::hamiltonians::{FmoParameters, NmrParameters};

pub const SCHEMA_VERSION: u32 = 1;

/// Largest register the dense simulators are configured for.
pub const MAX_SITES: usize = 10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvolutionMethod {
    Exact,
    #[default]
    Trotter,
    Both,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoweringChoice {
    #[default]
    DenseBlocks,
    CompiledPulses,
}

impl From<LoweringChoice> for Lowering {
    fn from(c: LoweringChoice) -> Self {
        match c {
            LoweringChoice::DenseBlocks => Lowering::DenseBlocks,
            LoweringChoice::CompiledPulses => Lowering::CompiledPulses,
        }
    }
}

fn default_initial_state() -> String {
    "site:1".into()
}

fn default_exact_dt() -> f64 {
    1e-3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub t_max: f64,
    /// Output spacing and Trotter step.
    pub dt: f64,
    #[serde(default)]
    pub method: EvolutionMethod,
    #[serde(default = "default_initial_state")]
    pub initial_state: String,
    #[serde(default)]
    pub lowering: LoweringChoice,
    /// Upper bound on the RK4 step of the exact integrator.
    #[serde(default = "default_exact_dt")]
    pub exact_dt: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory_csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states_json: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub fmo: FmoParameters,
    pub noise: NoiseParameters,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nmr: Option<NmrParameters>,
    pub evolution: EvolutionConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| Error::Config(e.to_string());
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.fmo.validate().map_err(wrap)?;
        let n = self.fmo.n_sites();
        if n > MAX_SITES {
            return Err(Error::Config(format!("{n} sites exceed the supported {MAX_SITES}")));
        }
        self.noise.validate(n).map_err(wrap)?;
        if let Some(nmr) = &self.nmr {
            nmr.validate().map_err(wrap)?;
            if nmr.n_qubits() != n {
                return Err(Error::Config(format!(
                    "nmr describes {} qubits but fmo has {n} sites",
                    nmr.n_qubits()
                )));
            }
        }
        let ev = &self.evolution;
        if !(ev.t_max.is_finite() && ev.t_max >= 0.0) {
            return Err(Error::Config("evolution.t_max must be finite and non-negative".into()));
        }
        for (name, v) in [("dt", ev.dt), ("exact_dt", ev.exact_dt)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("evolution.{name} must be positive")));
            }
        }
        initial_state(&ev.initial_state, n).map_err(wrap)?;
        if ev.lowering == LoweringChoice::CompiledPulses && self.fmo.has_long_range() {
            return Err(Error::Config(
                "compiled-pulses lowering needs nearest-neighbour hopping only".into(),
            ));
        }
        Ok(())
    }

    /// NMR register parameters: the explicit block or the FMO mapping.
    pub fn nmr_parameters(&self) -> NmrParameters {
        self.nmr.clone().unwrap_or_else(|| NmrParameters::from_fmo(&self.fmo))
    }

    /// RK4 step dividing `dt` exactly and not exceeding `exact_dt`, with the
    /// number of RK4 steps per output sample.
    pub fn exact_step(&self) -> (f64, usize) {
        let ev = &self.evolution;
        let per = (ev.dt / ev.exact_dt).ceil().max(1.0) as usize;
        (ev.dt / per as f64, per)
    }
}
