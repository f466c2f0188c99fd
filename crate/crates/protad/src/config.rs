//! Pipeline configuration.

use std::path::{Path, PathBuf};

use protad_core::{
    data::SynthConfig, detect::DetectorConfig, forecaster::TrainConfig,
    spectral::SpectralConfig,
};
use serde::{Deserialize, Serialize};

use crate::{
    error::{CliError, Result},
    files::resolve,
};

/// Overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "PROTAD_OUT_DIR";

/// Input files. Unset entries default to the files `synth` writes into the
/// output directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataPaths {
    pub schema: Option<PathBuf>,
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    /// Steps before a labeled segment in which a flag counts as early.
    pub lookback: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig { lookback: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub output_dir: PathBuf,
    pub data: DataPaths,
    pub window: usize,
    pub horizon: usize,
    /// Seed of the synthetic generator.
    pub seed: u64,
    pub synth: SynthConfig,
    pub train: TrainConfig,
    pub detector: DetectorConfig,
    pub metrics: MetricsConfig,
    pub spectral: SpectralConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            output_dir: PathBuf::from("out"),
            data: DataPaths::default(),
            window: 5,
            horizon: 1,
            seed: 0,
            synth: SynthConfig::default(),
            train: TrainConfig::default(),
            detector: DetectorConfig::default(),
            metrics: MetricsConfig::default(),
            spectral: SpectralConfig::default(),
        }
    }
}

impl PipelineConfig {
    /// Reads a config; relative paths inside it are taken relative to the
    /// directory holding the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: PipelineConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.rebase(base);
        cfg.validate()?;
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        self.output_dir = resolve(base, &self.output_dir);
        for p in [
            &mut self.data.schema,
            &mut self.data.train,
            &mut self.data.test,
            &mut self.data.labels,
        ]
        .into_iter()
        .flatten()
        {
            *p = resolve(base, p);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon != 1 {
            return Err(CliError::Config(format!(
                "horizon must be 1, found {}",
                self.horizon
            )));
        }
        if self.window == 0 {
            return Err(CliError::Config("window must be positive".into()));
        }
        self.train.validate(self.window)?;
        self.spectral.validate()?;
        Ok(())
    }

    /// Applies the output-directory environment override, if set.
    pub fn apply_env(&mut self) {
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()) {
            self.output_dir = PathBuf::from(dir);
        }
    }

    fn data_path(&self, set: &Option<PathBuf>, default: &str) -> PathBuf {
        set.clone().unwrap_or_else(|| self.output_dir.join(default))
    }

    pub fn schema_path(&self) -> PathBuf {
        self.data_path(&self.data.schema, "schema.json")
    }

    pub fn train_path(&self) -> PathBuf {
        self.data_path(&self.data.train, "train.csv")
    }

    pub fn test_path(&self) -> PathBuf {
        self.data_path(&self.data.test, "test.csv")
    }

    pub fn labels_path(&self) -> PathBuf {
        self.data_path(&self.data.labels, "labels.csv")
    }

    pub fn out(&self, file: &str) -> PathBuf {
        self.output_dir.join(file)
    }
}
