//! TOML plan files.
//!
//! ```toml
//! trials = 50
//! delta_true = 1.0471975511965976
//! base_seed = 20200917
//! sigmas = [0.0, 0.5, 1.0]        # optional, defaults to i/9 for i = 0..9
//! aggregator = "median"           # optional
//!
//! [image]                         # optional
//! width = 256
//! height = 256
//! fringe_scale = 20.0
//!
//! [[combination]]
//! case = "I"
//! prefilter = "none"
//! estimator = "tan"
//!
//! [prefilters.gfb]                # optional overrides
//! bandwidth = 2.0
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{default_sigmas, Combination, ExperimentPlan, ImageParams, DEFAULT_BASE_SEED, DEFAULT_TRIALS};
use crate::error::{Error, Result};
use crate::gs::Aggregator;
use crate::prefilter::PrefilterConfig;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    #[serde(default = "default_trials")]
    trials: usize,
    #[serde(default = "default_delta")]
    delta_true: f64,
    #[serde(default = "default_seed")]
    base_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigmas: Option<Vec<f64>>,
    #[serde(default)]
    aggregator: Aggregator,
    #[serde(default)]
    image: ImageParams,
    #[serde(default)]
    prefilters: PrefilterConfig,
    #[serde(rename = "combination")]
    combinations: Vec<Combination>,
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

fn default_delta() -> f64 {
    std::f64::consts::FRAC_PI_3
}

fn default_seed() -> u64 {
    DEFAULT_BASE_SEED
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates a plan.
pub fn parse_plan(text: &str) -> Result<ExperimentPlan> {
    let file: PlanFile = toml::from_str(text).map_err(|e| Error::Parse {
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    let plan = ExperimentPlan {
        combinations: file.combinations,
        sigmas: file.sigmas.unwrap_or_else(default_sigmas),
        trials: file.trials,
        delta_true: file.delta_true,
        base_seed: file.base_seed,
        image: file.image,
        aggregator: file.aggregator,
        prefilters: file.prefilters,
    };
    plan.validate()?;
    Ok(plan)
}

pub fn read_plan(path: impl AsRef<Path>) -> Result<ExperimentPlan> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_plan(&text)
}

impl ExperimentPlan {
    /// Serializes the plan in the format [`parse_plan`] reads.
    pub fn to_toml(&self) -> String {
        let file = PlanFile {
            trials: self.trials,
            delta_true: self.delta_true,
            base_seed: self.base_seed,
            sigmas: Some(self.sigmas.clone()),
            aggregator: self.aggregator,
            image: self.image,
            prefilters: self.prefilters,
            combinations: self.combinations.clone(),
        };
        toml::to_string(&file).expect("plan serializes")
    }
}
