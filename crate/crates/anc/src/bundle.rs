//! Versioned JSON model bundle: the fitted ensemble plus the training-season
//! player table it was built from.

use std::collections::BTreeMap;
use std::path::Path;

use anc_core::ensemble::TunedEnsembleModel;
use anc_core::stats::PlayerSeasonStats;
use serde::{Deserialize, Serialize};

use crate::error::{AncError, Result};

pub const BUNDLE_FORMAT: &str = "lineup-anc-model";
pub const BUNDLE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format: String,
    pub version: u32,
    pub model: TunedEnsembleModel,
    pub feature_names: Vec<String>,
    /// Training-season statistics, used to build features for prediction.
    pub players: Vec<PlayerSeasonStats>,
}

impl ModelBundle {
    pub fn new(
        model: TunedEnsembleModel,
        players: impl IntoIterator<Item = PlayerSeasonStats>,
    ) -> ModelBundle {
        ModelBundle {
            format: BUNDLE_FORMAT.into(),
            version: BUNDLE_VERSION,
            feature_names: model.config.feature_mode.feature_names(),
            model,
            players: players.into_iter().collect(),
        }
    }

    pub fn player_map(&self) -> BTreeMap<String, PlayerSeasonStats> {
        self.players
            .iter()
            .map(|p| (p.player_id.clone(), p.clone()))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<ModelBundle> {
        let b: ModelBundle = serde_json::from_str(text)?;
        if b.format != BUNDLE_FORMAT {
            return Err(AncError::Invalid(format!(
                "not a model bundle (format {:?})",
                b.format
            )));
        }
        if b.version != BUNDLE_VERSION {
            return Err(AncError::Invalid(format!(
                "bundle version {} is not supported (expected {BUNDLE_VERSION})",
                b.version
            )));
        }
        b.model.config.validate()?;
        Ok(b)
    }

    pub fn load(path: &Path) -> Result<ModelBundle> {
        let text = std::fs::read_to_string(path).map_err(|e| AncError::file(path, e))?;
        ModelBundle::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| AncError::file(path, e))
    }
}
