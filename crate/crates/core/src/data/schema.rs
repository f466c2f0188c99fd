use alloc::{
    collections::BTreeSet,
    string::{String, ToString},
    vec::Vec,
};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A categorical column and the number of codes it may take.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscreteFeature {
    pub name: String,
    pub cardinality: usize,
}

/// Which columns are continuous, which are discrete, and how wide the
/// one-hot encoding of discrete codes is.
///
/// Columns are always laid out continuous first, then discrete, in
/// declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SchemaDoc", into = "SchemaDoc")]
pub struct FeatureSchema {
    continuous: Vec<String>,
    discrete: Vec<DiscreteFeature>,
    embedding_dim: usize,
}

#[derive(Serialize, Deserialize)]
struct SchemaDoc {
    #[serde(default)]
    continuous: Vec<String>,
    #[serde(default)]
    discrete: Vec<DiscreteFeature>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    embedding_dim: Option<usize>,
}

impl TryFrom<SchemaDoc> for FeatureSchema {
    type Error = Error;

    fn try_from(doc: SchemaDoc) -> Result<Self> {
        FeatureSchema::new(doc.continuous, doc.discrete, doc.embedding_dim)
    }
}

impl From<FeatureSchema> for SchemaDoc {
    fn from(s: FeatureSchema) -> Self {
        SchemaDoc {
            continuous: s.continuous,
            discrete: s.discrete,
            embedding_dim: Some(s.embedding_dim),
        }
    }
}

impl FeatureSchema {
    /// Validates and builds a schema. `embedding_dim` defaults to the largest
    /// discrete cardinality, or 1 when there are no discrete columns.
    pub fn new(
        continuous: Vec<String>,
        discrete: Vec<DiscreteFeature>,
        embedding_dim: Option<usize>,
    ) -> Result<Self> {
        if continuous.is_empty() && discrete.is_empty() {
            return Err(Error::config("schema declares no columns"));
        }
        let mut seen = BTreeSet::new();
        for name in continuous.iter().chain(discrete.iter().map(|f| &f.name)) {
            if !seen.insert(name.as_str()) {
                return Err(Error::config(alloc::format!(
                    "duplicate column name {name:?}"
                )));
            }
        }
        let max_card = discrete.iter().map(|f| f.cardinality).max().unwrap_or(1);
        if let Some(f) = discrete.iter().find(|f| f.cardinality == 0) {
            return Err(Error::config(alloc::format!(
                "discrete column {:?} has zero cardinality",
                f.name
            )));
        }
        let embedding_dim = embedding_dim.unwrap_or(max_card);
        if embedding_dim == 0 {
            return Err(Error::config("embedding_dim must be positive"));
        }
        if max_card > embedding_dim {
            return Err(Error::config(alloc::format!(
                "embedding_dim {embedding_dim} is smaller than cardinality {max_card}"
            )));
        }
        Ok(FeatureSchema {
            continuous,
            discrete,
            embedding_dim,
        })
    }

    /// Schema with anonymous columns `c0..`, `d0..`.
    pub fn anonymous(
        continuous: usize,
        cardinalities: &[usize],
        embedding_dim: Option<usize>,
    ) -> Result<Self> {
        let cont = (0..continuous).map(|i| alloc::format!("c{i}")).collect();
        let disc = cardinalities
            .iter()
            .enumerate()
            .map(|(j, &cardinality)| DiscreteFeature {
                name: alloc::format!("d{j}"),
                cardinality,
            })
            .collect();
        FeatureSchema::new(cont, disc, embedding_dim)
    }

    /// Number of continuous columns (c).
    pub fn continuous_count(&self) -> usize {
        self.continuous.len()
    }

    /// Number of discrete columns (d).
    pub fn discrete_count(&self) -> usize {
        self.discrete.len()
    }

    /// One-hot width (e).
    pub fn embedding_dim(&self) -> usize {
        self.embedding_dim
    }

    /// c + d.
    pub fn width(&self) -> usize {
        self.continuous.len() + self.discrete.len()
    }

    pub fn continuous(&self) -> &[String] {
        &self.continuous
    }

    pub fn discrete(&self) -> &[DiscreteFeature] {
        &self.discrete
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.discrete.iter().map(|f| f.cardinality).collect()
    }

    /// Column names in storage order.
    pub fn column_names(&self) -> Vec<String> {
        self.continuous
            .iter()
            .cloned()
            .chain(self.discrete.iter().map(|f| f.name.to_string()))
            .collect()
    }
}
