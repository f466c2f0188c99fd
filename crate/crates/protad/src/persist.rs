//! Model and detector documents.

use std::{collections::BTreeMap, path::Path};

use protad_core::{
    data::{FeatureSchema, Normalizer},
    detect::Detector,
    forecaster::{ForecastModel, ModelShape},
};
use serde::{Deserialize, Serialize};

use crate::{
    error::{CliError, Result},
    files::{read_json, write_json, FORMAT_VERSION},
};

/// A trained forecaster with the normalizer and schema it was trained on.
/// Tensors are stored by name as flat row-major arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format_version: u32,
    pub schema: FeatureSchema,
    pub shape: ModelShape,
    pub normalizer: Normalizer,
    pub tensors: BTreeMap<String, Vec<f64>>,
}

impl ModelFile {
    pub fn new(schema: &FeatureSchema, normalizer: &Normalizer, model: &ForecastModel) -> Self {
        ModelFile {
            format_version: FORMAT_VERSION,
            schema: schema.clone(),
            shape: model.shape().clone(),
            normalizer: normalizer.clone(),
            tensors: model
                .named_tensors()
                .map(|(name, v)| (name.to_string(), v.to_vec()))
                .collect(),
        }
    }

    pub fn model(&self) -> Result<ForecastModel> {
        Ok(ForecastModel::from_named(
            self.shape.clone(),
            self.tensors.iter().map(|(k, v)| (k.as_str(), v.clone())),
        )?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: ModelFile = read_json(path)?;
        check_version(path, file.format_version)?;
        file.model().map_err(|e| e.in_file(path))?;
        Ok(file)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorFile {
    pub format_version: u32,
    pub schema: FeatureSchema,
    pub detector: Detector,
}

impl DetectorFile {
    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: DetectorFile = read_json(path)?;
        check_version(path, file.format_version)?;
        Ok(file)
    }
}

fn check_version(path: &Path, found: u32) -> Result<()> {
    if found != FORMAT_VERSION {
        return Err(CliError::Data(format!(
            "{}: format_version {found} is not supported (expected {FORMAT_VERSION})",
            path.display()
        )));
    }
    Ok(())
}
