//! Versioned JSON persistence for fitted predictors.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fair::{EdfModel, FairRidgeModel, Predictor};
use crate::forest::ForestModel;
use crate::neighbors::KnnModel;
use crate::table::Table;

pub const FORMAT: &str = "fairscope-model";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "kebab-case")]
pub enum SavedModel {
    Knn(KnnModel),
    Forest(ForestModel),
    FairRidge(FairRidgeModel),
    Edf(EdfModel),
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    #[serde(flatten)]
    body: SavedModel,
}

impl SavedModel {
    pub fn predict(&self, rows: &Table) -> Result<Vec<f64>> {
        match self {
            SavedModel::Knn(m) => m.predict(rows),
            SavedModel::Forest(m) => m.predict(rows),
            SavedModel::FairRidge(m) => m.predict(rows),
            SavedModel::Edf(m) => m.predict(rows),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let env = Envelope {
            format: FORMAT.into(),
            version: VERSION,
            body: self.clone(),
        };
        Ok(serde_json::to_string_pretty(&env)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let env: Envelope = serde_json::from_str(text)?;
        if env.format != FORMAT {
            return Err(invalid(format!("not a {FORMAT} file (format `{}`)", env.format)));
        }
        if env.version != VERSION {
            return Err(invalid(format!(
                "model file version {} is not supported (expected {VERSION})",
                env.version
            )));
        }
        Ok(env.body)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::ModelSpec;
    use crate::neighbors::fit_knn;
    use crate::table::Column;
    use std::collections::BTreeMap;

    #[test]
    fn round_trip_and_version_check() {
        let t = Table::new(
            "t",
            vec![
                Column::numeric("x", vec![0.0, 1.0, 2.0, 3.0]),
                Column::numeric("y", vec![1.0, 2.0, 3.0, 5.0]),
            ],
        )
        .unwrap();
        let spec = ModelSpec::new(&t, "y", None).unwrap();
        let m = SavedModel::Knn(fit_knn(&t, &spec, 2, &BTreeMap::new()).unwrap());
        let text = m.to_json().unwrap();
        assert!(text.contains("\"format\": \"fairscope-model\""));
        let back = SavedModel::from_json(&text).unwrap();
        assert_eq!(back.predict(&t).unwrap(), m.predict(&t).unwrap());
        let bumped = text.replace("\"version\": 1", "\"version\": 99");
        assert!(SavedModel::from_json(&bumped).is_err());
    }
}
