//! Run configuration: plant, dynamics, prices, profiles, error model,
//! training, MPC and evaluation settings in one TOML document.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adp::TrainingConfig;
use crate::baselines::MpcConfig;
use crate::ccgt::ArmaParams;
use crate::dispatch::{BinaryMode, Plant};
use crate::error::{Error, Result};
use crate::model::{DayAheadForecast, MicrogridParams};
use crate::scenario::{
    derive_seed, load_profiles, ErrorModel, PriceSchedule, ProfileShape, ScenarioSet,
};

/// Where the day-ahead forecast comes from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    /// CSV with columns `period,wind,demand_e,price,demand_q`; overrides `shape`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    pub shape: ProfileShape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub scenarios: usize,
    /// LP solves allowed per full-day mixed-integer schedule.
    pub milp_max_nodes: usize,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            scenarios: 20,
            milp_max_nodes: 5000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Master seed; every random stream of a run is derived from it.
    pub seed: u64,
    pub plant: MicrogridParams,
    pub arma: ArmaParams,
    pub prices: PriceSchedule,
    pub profiles: ProfileConfig,
    pub errors: ErrorModel,
    pub training: TrainingConfig,
    pub mpc: MpcConfig,
    pub evaluation: EvaluationConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 42,
            plant: MicrogridParams::default(),
            arma: ArmaParams::default(),
            prices: PriceSchedule::default(),
            profiles: ProfileConfig::default(),
            errors: ErrorModel::default(),
            training: TrainingConfig::default(),
            mpc: MpcConfig::default(),
            evaluation: EvaluationConfig::default(),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.plant.validate()?;
        self.arma.validate()?;
        let period_s = self.arma.sample_interval_s * self.arma.samples_per_period as f64;
        if (period_s - self.plant.dt_hours * 3600.0).abs() > 1e-6 {
            return Err(Error::param(
                "arma.samples_per_period",
                format!(
                    "samples cover {period_s} s but a period lasts {} s",
                    self.plant.dt_hours * 3600.0
                ),
            ));
        }
        let horizon = self.plant.horizon;
        self.prices.validate(horizon)?;
        self.errors.validate()?;
        self.training.validate()?;
        self.mpc.validate(horizon)?;
        if self.evaluation.scenarios == 0 {
            return Err(Error::param("evaluation.scenarios", "must be at least 1"));
        }
        if self.profiles.csv.is_none() {
            self.profiles.shape.build(&self.prices, horizon)?;
        }
        Ok(())
    }

    pub fn plant(&self) -> Result<Plant> {
        Plant::new(self.plant.clone(), self.arma.clone())
    }

    pub fn forecast(&self) -> Result<DayAheadForecast> {
        let horizon = self.plant.horizon;
        let f = match &self.profiles.csv {
            Some(path) => load_profiles(path)?,
            None => self.profiles.shape.build(&self.prices, horizon)?,
        };
        if f.len() != horizon {
            return Err(Error::param(
                "profiles.csv",
                format!("holds {} periods, horizon is {horizon}", f.len()),
            ));
        }
        Ok(f)
    }

    /// Scenarios the value functions are trained on.
    pub fn training_set(&self) -> Result<ScenarioSet> {
        ScenarioSet::new(
            self.forecast()?,
            self.errors.clone(),
            derive_seed(self.seed, "training-scenarios"),
            self.training.scenarios,
        )
    }

    /// Held-out scenarios shared by every evaluated policy.
    pub fn evaluation_set(&self, count: usize) -> Result<ScenarioSet> {
        ScenarioSet::new(
            self.forecast()?,
            self.errors.clone(),
            derive_seed(self.seed, "evaluation-scenarios"),
            count,
        )
    }

    /// Training settings with the draw seed derived from the master seed.
    pub fn training_config(&self) -> TrainingConfig {
        TrainingConfig {
            seed: derive_seed(self.seed, "training-draws"),
            ..self.training.clone()
        }
    }

    pub fn milp_mode(&self) -> BinaryMode {
        BinaryMode::BranchAndBound {
            max_nodes: self.evaluation.milp_max_nodes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let cfg = Config::default();
        let text = cfg.to_toml().unwrap();
        assert_eq!(Config::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn shipped_file_equals_defaults() {
        let text = include_str!("../config/default.toml");
        assert_eq!(Config::from_toml(text).unwrap(), Config::default());
    }

    #[test]
    fn partial_file_uses_defaults() {
        let cfg = Config::from_toml("seed = 7\n[training]\niterations = 5\n").unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.training.iterations, 5);
        assert_eq!(cfg.plant, MicrogridParams::default());
    }

    #[test]
    fn errors_name_the_field() {
        let err = Config::from_toml("[training]\nperturbation = -1.0\n").unwrap_err();
        assert!(err.to_string().contains("training.perturbation"), "{err}");
        let err = Config::from_toml("[mpc]\nhorizon = 500\n").unwrap_err();
        assert!(err.to_string().contains("mpc.horizon"), "{err}");
        let err = Config::from_toml("bogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(Config::load(Path::new("/nonexistent/cfg.toml")).is_err());
    }

    #[test]
    fn seeds_are_separated() {
        let cfg = Config::default();
        assert_ne!(
            cfg.training_set().unwrap().seed,
            cfg.evaluation_set(20).unwrap().seed
        );
    }
}
