use serde::{Deserialize, Serialize};

use crate::pitch::YinConfig;
use crate::scoring::QUERY_MATCH_THRESHOLD;
use crate::segmentation::SegmentationConfig;

/// Every DSP parameter used while preprocessing a lesson or scoring a take.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub segmentation: SegmentationConfig,
    pub pitch: YinConfig,
    /// Pitch frames below this confidence are dropped before note aggregation.
    pub min_confidence: f64,
    /// A region matches a melody query when its score is strictly above this.
    pub query_threshold: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            segmentation: SegmentationConfig::default(),
            pitch: YinConfig::default(),
            min_confidence: 0.70,
            query_threshold: QUERY_MATCH_THRESHOLD,
        }
    }
}
